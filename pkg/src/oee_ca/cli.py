"""Command-line interface.

Subcommands: run (single trajectory), ensemble (sampled plan -> records CSV
+ report JSON), oracle (counterfactual cache), norm (normalization cache),
analyze (report + SVG plots from a records CSV), render (large-width PGM).

Exit codes: 0 success, 2 usage error, 3 data/format error.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from . import complexity as cx
from . import ensemble as ens
from . import io_formats as iof
from .eca import (
    BitState,
    ConfigurationError,
    canonical_rules,
    set_default_class_table,
    step_bits,
)
from .innovation import brute_force_counterfactual, load_oracle_cache
from .variants import (
    SystemSnapshot,
    Variant,
    VariantConfig,
    case1_update_bits,
    execution_rng,
    run_trajectory,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3


def _variant(name: str) -> Variant:
    try:
        return Variant(name)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"unknown variant {name!r} (choose from case1, case2, case3, eca)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oee-ca", description=__doc__)
    parser.add_argument("--version", action="version", version=f"oee-ca {__version__}")
    parser.add_argument("--class-table", help="override the Wolfram class data file")
    parser.add_argument("--config", help="flat key = value file mirroring flags "
                                         "(explicit flags take precedence)")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate one configuration")
    run.add_argument("--variant", type=_variant, required=True)
    run.add_argument("--wo", type=int, required=True)
    run.add_argument("--we", type=int)
    run.add_argument("--mu", type=float, default=0.5)
    run.add_argument("--rule-o", type=int)
    run.add_argument("--rule-e", type=int)
    run.add_argument("--state-o", help="initial organism state, binary string")
    run.add_argument("--state-e", help="initial environment state, binary string")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--cap", type=int)
    run.add_argument("--out", default="trajectory.csv")
    run.add_argument("--pgm", help="also render the organism trajectory to PGM")

    em = sub.add_parser("ensemble", help="execute a sampling plan")
    em.add_argument("--variant", type=_variant, required=True)
    em.add_argument("--wo", type=int, required=True)
    em.add_argument("--we", type=int)
    em.add_argument("--ratio", choices=ens.CASE1_RATIOS,
                    help="environment/organism width ratio (Case I)")
    em.add_argument("--mu", type=float, default=0.5)
    em.add_argument("--samples", type=int, required=True)
    em.add_argument("--seed", type=int, default=0)
    em.add_argument("--cap", type=int)
    em.add_argument("--workers", type=int, default=1)
    em.add_argument("--norm-samples", type=int, default=1000)
    em.add_argument("--norm-steps", type=int, default=1024)
    em.add_argument("--norm-seed", type=int, default=0)
    em.add_argument("--norm-cache")
    em.add_argument("--out", default="records.csv")
    em.add_argument("--report", default="report.json")

    orc = sub.add_parser("oracle", help="build or verify the counterfactual cache")
    orc.add_argument("--width", type=int, required=True)
    orc.add_argument("--out", default="oracle.bin")
    orc.add_argument("--verify", action="store_true",
                     help="check an existing cache against fresh enumeration")

    nrm = sub.add_parser("norm", help="build the compressibility normalization cache")
    nrm.add_argument("--width", type=int, required=True,
                     help="full-system width w_o + w_e")
    nrm.add_argument("--samples", type=int, default=10000)
    nrm.add_argument("--steps", type=int, default=65536)
    nrm.add_argument("--seed", type=int, default=0)
    nrm.add_argument("--cache", default="norm_cache.txt")

    an = sub.add_parser("analyze", help="recompute a report from a records CSV")
    an.add_argument("--records", required=True)
    an.add_argument("--report", default="report.json")
    an.add_argument("--svg-dir", help="also emit SVG plots into this directory")

    rd = sub.add_parser("render", help="render a large-width run to PGM")
    rd.add_argument("--variant", type=_variant, default=Variant.CASE_I)
    rd.add_argument("--wo", type=int, required=True)
    rd.add_argument("--we", type=int)
    rd.add_argument("--steps", type=int, default=400)
    rd.add_argument("--seed", type=int, default=0)
    rd.add_argument("--out", default="render.pgm")
    return parser


def _apply_config_file(parser, argv, args):
    """Fill unset flags from the --config file; CLI takes precedence."""
    overrides = iof.read_config_file(args.config)
    explicit = {a.lstrip("-").split("=")[0].replace("-", "_") for a in argv if a.startswith("--")}
    for key, value in overrides.items():
        dest = key.replace("-", "_")
        if dest in explicit or not hasattr(args, dest):
            continue
        current = getattr(args, dest)
        setattr(args, dest, type(current)(value) if current is not None else value)
    return args


def _config_echo(args) -> dict:
    skip = {"command", "config", "class_table"}
    return {k: (v.value if isinstance(v, Variant) else v)
            for k, v in sorted(vars(args).items()) if k not in skip}


def _random_config(args) -> VariantConfig:
    rng = execution_rng(args.seed)
    canon = canonical_rules()
    r_o = args.rule_o if args.rule_o is not None else canon[int(rng.integers(0, 88))]
    r_e = args.rule_e if args.rule_e is not None else canon[int(rng.integers(0, 88))]
    s_o = (BitState.from_string(args.state_o) if args.state_o
           else BitState(int(rng.integers(0, 1 << args.wo)), args.wo))
    variant = args.variant
    if variant is Variant.CASE_III:
        return VariantConfig(variant, s_o, r_o, mu=args.mu, seed=args.seed)
    if variant is Variant.ISOLATED:
        return VariantConfig(variant, s_o, r_o)
    w_e = 8 if variant is Variant.CASE_II else args.we
    if w_e is None:
        raise ValueError("this variant requires --we")
    s_e = (BitState.from_string(args.state_e) if args.state_e
           else BitState(int(rng.integers(0, 1 << w_e)), w_e))
    return VariantConfig(variant, s_o, r_o, s_e=s_e, r_e=r_e)


def cmd_run(args) -> int:
    config = _random_config(args)
    traj = run_trajectory(config, args.cap)
    echo = _config_echo(args)
    with open(args.out + ".tmp", "w") as fh:
        fh.write(f"# oee-ca {__version__}\n")
        for key, value in echo.items():
            fh.write(f"# {key} = {value}\n")
        fh.write("t,s_o,r_o,s_e\n")
        for snap in traj.snapshots:
            s_e = snap.s_e.to_string() if snap.s_e is not None else ""
            fh.write(f"{snap.t},{snap.s_o.to_string()},{snap.r_o},{s_e}\n")
    os.replace(args.out + ".tmp", args.out)
    if traj.cap_hit:
        print(f"warning: step cap reached after {len(traj.snapshots) - 1} steps",
              file=sys.stderr)
    if args.pgm:
        iof.write_pgm([(s.s_o.bits, s.s_o.width) for s in traj.snapshots], args.pgm)
    print(f"wrote {args.out} ({len(traj.snapshots)} snapshots)")
    return EXIT_OK


def cmd_ensemble(args) -> int:
    w_e = args.we
    if args.variant is Variant.CASE_I and w_e is None:
        if args.ratio is None:
            raise ValueError("Case I needs --we or --ratio")
        w_e = ens.environment_width(args.wo, args.ratio)
    plan = ens.SamplePlan(
        variant=args.variant, w_o=args.wo,
        w_e=w_e if args.variant is Variant.CASE_I else None,
        mu=args.mu if args.variant is Variant.CASE_III else None,
        sample_count=args.samples, master_seed=args.seed, step_cap=args.cap,
        norm_samples=args.norm_samples, norm_steps=args.norm_steps,
        norm_seed=args.norm_seed)
    records = ens.run_ensemble(plan, workers=args.workers, norm_cache=args.norm_cache)
    echo = _config_echo(args)
    echo["effective_we"] = plan.w_e
    iof.write_records_csv(records, args.out, config_echo=echo)
    report = ens.aggregate(records)
    iof.write_report_json(report, args.report, config_echo=echo)
    print(f"wrote {args.out} and {args.report}: "
          f"OEE% = {report.oee_percent:.2f}, INN% = {report.inn_percent:.2f}, "
          f"UE% = {report.ue_percent:.2f} over {report.n_records} records "
          f"({report.n_censored} censored)")
    return EXIT_OK


def cmd_oracle(args) -> int:
    if args.verify:
        cached = load_oracle_cache(args.out, expect_width=args.width)
        fresh = brute_force_counterfactual(args.width)
        if cached.trajectories != fresh.trajectories:
            print("oracle cache does not match fresh enumeration", file=sys.stderr)
            return EXIT_DATA
        print(f"{args.out}: verified against fresh enumeration")
        return EXIT_OK
    brute_force_counterfactual(args.width, cache_path=args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_norm(args) -> int:
    bits = cx.normalization_constant(args.width, args.samples, args.steps,
                                     args.seed, cache_path=args.cache)
    print(f"norm({args.width}, samples={args.samples}, steps={args.steps}, "
          f"seed={args.seed}) = {bits} bits -> {args.cache}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    records = iof.read_records_csv(args.records)
    report = ens.aggregate(records)
    iof.write_report_json(report, args.report, config_echo=_config_echo(args))
    if args.svg_dir:
        os.makedirs(args.svg_dir, exist_ok=True)
        join = lambda name: os.path.join(args.svg_dir, name)
        iof.write_svg(iof.svg_histogram(report.t_r_ratio_hist, "t_r / t_P (log2 bins)"),
                      join("t_r_hist.svg"))
        iof.write_svg(iof.svg_histogram(report.t_a_ratio_hist, "t_a / t_P (log2 bins)"),
                      join("t_a_hist.svg"))
        iof.write_svg(iof.svg_box(report.t_r_ratio_box, "t_r / t_P"), join("t_r_box.svg"))
        iof.write_svg(iof.svg_scatter(report.innovation_points, "innovation vs recurrence",
                                      "I", "t_r"), join("inn_vs_t_r.svg"))
        iof.write_svg(iof.svg_histogram(report.c_hist, "compressibility C"),
                      join("c_hist.svg"))
        iof.write_svg(iof.svg_histogram(report.k_hist, "Lyapunov exponent k"),
                      join("k_hist.svg"))
    print(f"wrote {args.report}")
    return EXIT_OK


def cmd_render(args) -> int:
    """Large-width render; widths here are unbounded (rendering only)."""
    rng = execution_rng(args.seed)
    canon = canonical_rules()
    w_o = args.wo
    w_e = args.we or w_o
    r_o = canon[int(rng.integers(0, 88))]
    r_e = canon[int(rng.integers(0, 88))]
    s_o = int(rng.integers(0, 2**63)) % (1 << w_o) if w_o > 62 else int(rng.integers(0, 1 << w_o))
    s_e = int(rng.integers(0, 2**63)) % (1 << w_e) if w_e > 62 else int(rng.integers(0, 1 << w_e))
    if w_o > 62:  # widen sparse draws for big rings
        for _ in range(w_o // 48):
            s_o = (s_o << 48) | int(rng.integers(0, 1 << 48))
        s_o %= 1 << w_o
    rows = [(s_o, w_o)]
    for _ in range(args.steps):
        if args.variant is Variant.CASE_I:
            r_o = case1_update_bits(s_o, w_o, r_o, s_e, w_e)
        elif args.variant is Variant.CASE_II:
            r_o = s_e
        s_o = step_bits(r_o, s_o, w_o)
        if args.variant in (Variant.CASE_I, Variant.CASE_II):
            s_e = step_bits(r_e, s_e, w_e)
        rows.append((s_o, w_o))
    iof.write_pgm(rows, args.out)
    print(f"wrote {args.out} ({args.steps + 1} rows x {w_o} columns)")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "ensemble": cmd_ensemble,
    "oracle": cmd_oracle,
    "norm": cmd_norm,
    "analyze": cmd_analyze,
    "render": cmd_render,
}


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.config:
            args = _apply_config_file(parser, argv, args)
        if args.class_table:
            set_default_class_table(args.class_table)
        return COMMANDS[args.command](args)
    except (ValueError, OSError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
