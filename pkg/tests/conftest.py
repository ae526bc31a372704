import pytest

from oee_ca.ensemble import SamplePlan, aggregate, run_ensemble
from oee_ca.variants import Variant

# acceptance verdict lines collected by test_acceptance.verdict(); echoed
# after the test summary so they survive pytest's output capture
acceptance_lines: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def case1_44_records():
    """Full-pipeline Case I ensemble at w_o = w_e = 4, shared by the
    correlation, metagenome and complexity-direction checks."""
    plan = SamplePlan(Variant.CASE_I, 4, 4, sample_count=10_000, master_seed=11)
    return run_ensemble(plan)


@pytest.fixture(scope="session")
def case1_44_report(case1_44_records):
    return aggregate(case1_44_records)
