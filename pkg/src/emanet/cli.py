"""Command-line entry point: validate, analyze, cohort, synth, export-network.

Exit codes: 0 success, 2 input/schema error, 3 statistical precondition
failure (a pool too small for the requested sample size).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .contexts import (
    BASELINE,
    CONTEXT_FLAGS,
    DISPLAY_NAMES,
    ContextSpec,
    all_context_specs,
    baseline_pool,
    categorize,
)
from .ingest import (
    ParticipantDataset,
    SchemaViolation,
    backfill_emas,
    eligibility,
    parse_participant,
    write_participant,
)
from .netcore import ItemSubset, export_network, pearson_network
from .permtest import (
    InsufficientPool,
    PermutationConfig,
    child_rng,
    compare_to_baseline,
    run_baseline_permutation,
    run_context_permutation,
)
from .synthgen import SynthConfig, correlated_block, generate

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PRECONDITION = 3

P_FLOOR = 1e-300

SUBSET_DISPLAY = {"all": "All EMAs", "positive": "Positive EMAs", "negative": "Negative EMAs"}

TABLE_FOOTER = (
    "* p < 0.001, ** p < 0.05\n"
    "Note: pairs are matched by permutation index; iterations resample\n"
    "overlapping day sets, so paired t-test independence assumptions are\n"
    "approximate.\n"
)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def significance_marker(p: float) -> str:
    if p < 0.001:
        return "*"
    if p < 0.05:
        return "**"
    return ""


def format_p(p: float) -> str:
    if p == 0.0 or p < P_FLOOR:
        return "< 1e-300"
    return format(p, ".6g")


def machine_p(p: float) -> float:
    return 0.0 if p < P_FLOOR else p


def _t_cell(t: float) -> str:
    if math.isinf(t):
        return "inf" if t > 0 else "-inf"
    return f"{t:.2f}"


def histogram_csv(baseline_diffs, context_diffs) -> str:
    """Shared fixed-width bins for both distributions (Freedman-Diaconis width
    on the pooled data); per-distribution counts sum to n_permutations."""
    pooled = np.asarray(list(baseline_diffs) + list(context_diffs), dtype=float)
    q75, q25 = np.percentile(pooled, [75, 25])
    width = 2.0 * (q75 - q25) * len(pooled) ** (-1.0 / 3.0)
    if width <= 0.0:
        width = 1.0
    lo = float(pooled.min())
    hi = float(pooled.max())
    nbins = max(1, int(math.ceil((hi - lo) / width))) if hi > lo else 1
    edges = lo + width * np.arange(nbins + 1)
    if edges[-1] < hi:
        edges = np.append(edges, edges[-1] + width)
    base_counts, _ = np.histogram(np.asarray(baseline_diffs, dtype=float), bins=edges)
    ctx_counts, _ = np.histogram(np.asarray(context_diffs, dtype=float), bins=edges)
    lines = ["bin_left,bin_right,baseline_count,context_count"]
    for i in range(len(edges) - 1):
        lines.append(f"{edges[i]!r},{edges[i + 1]!r},{base_counts[i]},{ctx_counts[i]}")
    return "\n".join(lines) + "\n"


def render_table(participant_id: str, feature: str, subset_flag: str, comparison) -> str:
    name = DISPLAY_NAMES[feature]
    base, ctx, test = comparison.baseline, comparison.context, comparison.test
    mark = significance_marker(test.p_value)
    header1 = f"{'':16s}{'Baseline':22s}{name}"
    header2 = f"{'':16s}{'x̄':>8s}{'σ':>10s}    {'x̄':>8s}{'σ':>10s}{'t':>12s}"
    row = (
        f"{SUBSET_DISPLAY[subset_flag]:16s}"
        f"{base.mean:8.2f}{base.std:10.2f}    "
        f"{ctx.mean:8.2f}{ctx.std:10.2f}{_t_cell(test.t_score):>12s} {mark}"
    )
    lines = [
        f"Participant: {participant_id}",
        "",
        header1,
        header2,
        row.rstrip(),
        "",
        f"p = {format_p(test.p_value)}, df = {test.df}",
        "",
        TABLE_FOOTER.rstrip(),
    ]
    return "\n".join(lines) + "\n"


def _run_json(participant_id, feature, subset_flag, cfg, run, comparison, emit_differences, verbose_indices):
    payload = {
        "participant_id": participant_id,
        "context": feature,
        "subset": subset_flag,
        "config": {
            "n_permutations": cfg.n_permutations,
            "sample_size": cfg.sample_size,
            "seed": cfg.seed,
            "subset": subset_flag,
        },
        "stats": {"mean": run.stats.mean, "std": run.stats.std},
    }
    if comparison is not None:
        payload["comparison"] = {
            "t_score": comparison.test.t_score if not math.isinf(comparison.test.t_score) else ("inf" if comparison.test.t_score > 0 else "-inf"),
            "p_value": machine_p(comparison.test.p_value),
            "df": comparison.test.df,
            "baseline": {"mean": comparison.baseline.mean, "std": comparison.baseline.std},
            "context": {"mean": comparison.context.mean, "std": comparison.context.std},
        }
    if emit_differences:
        payload["differences"] = list(run.differences)
    if verbose_indices:
        payload["sampled_indices"] = [[list(a), list(b)] for a, b in run.sampled_indices]
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def analyze_participant(
    input_path: Path,
    context_flag: str,
    subset_flag: str,
    seed: int,
    permutations: int,
    sample_size: int,
    outdir: Path,
    emit_differences: bool = False,
    verbose_indices: bool = False,
    stream_prefix: str = "",
):
    """Full single-participant pipeline; writes all artifacts into outdir.

    Returns the ComparisonResult. Raises SchemaViolation or InsufficientPool.
    """
    ds = backfill_emas(parse_participant(input_path))
    ctx = ContextSpec.from_flag(context_flag)
    if ctx.is_baseline:
        raise ValueError("analyze requires a non-baseline context; the baseline run is built automatically")
    subset = ItemSubset.from_flag(subset_flag)
    cfg = PermutationConfig(subset=subset, n_permutations=permutations, sample_size=sample_size, seed=seed)

    pools = categorize(ds, ctx)
    pool = baseline_pool(ds)
    ctx_run = run_context_permutation(
        ds, pools, cfg, rng=child_rng(seed, stream_prefix + ctx.feature), log_indices=verbose_indices
    )
    base_run = run_baseline_permutation(
        ds, pool, cfg, rng=child_rng(seed, stream_prefix + BASELINE), log_indices=verbose_indices
    )
    comparison = compare_to_baseline(ctx_run, base_run)

    outdir.mkdir(parents=True, exist_ok=True)
    outputs = {}

    def emit(name: str, text: str):
        (outdir / name).write_text(text, encoding="utf-8")
        outputs[name] = hashlib.sha256(text.encode("utf-8")).hexdigest()

    emit("run.json", _run_json(ds.participant_id, ctx.feature, subset_flag, cfg, ctx_run, comparison, emit_differences, verbose_indices))
    emit("baseline.json", _run_json(ds.participant_id, BASELINE, subset_flag, cfg, base_run, None, emit_differences, verbose_indices))
    emit("histogram.csv", histogram_csv(base_run.differences, ctx_run.differences))
    # Presentation networks use ALL days in each category, not 25-day samples.
    by_date = ds.by_date()
    for category, days in (("isolation", pools.isolation_days), ("sociability", pools.sociability_days)):
        net = pearson_network([by_date[d].ema for d in days], subset)
        emit(f"network_{category}.json", export_network(net, "json"))
        emit(f"network_{category}.dot", export_network(net, "dot"))
    emit("table.txt", render_table(ds.participant_id, ctx.feature, subset_flag, comparison))

    manifest = {
        "tool_version": __version__,
        "master_seed": seed,
        "inputs": {input_path.name: _sha256(input_path)},
        "config": {
            "command": "analyze",
            "context": context_flag,
            "subset": subset_flag,
            "n_permutations": permutations,
            "sample_size": sample_size,
            "emit_differences": emit_differences,
            "verbose_indices": verbose_indices,
        },
        "outputs": outputs,
    }
    (outdir / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return comparison


def cmd_validate(args) -> int:
    try:
        ds = parse_participant(Path(args.input))
    except FileNotFoundError:
        print(f"error: file not found: {args.input}", file=sys.stderr)
        return EXIT_INPUT
    except SchemaViolation as exc:
        print(f"schema violation: {exc}", file=sys.stderr)
        return EXIT_INPUT
    ds = backfill_emas(ds)
    print(f"Participant {ds.participant_id}: {len(ds.records)} days, {ds.usable_days} with EMA")
    print()
    print(f"{'Context':34s}{'Isolation':>10s}{'Sociability':>12s}  Eligible (>= {args.min_days}/category)")
    for ctx in all_context_specs():
        rep = eligibility(ds, ctx, args.min_days)
        verdict = "yes" if rep.eligible else f"no (limiting: {rep.limiting_category})"
        print(f"{DISPLAY_NAMES[ctx.feature]:34s}{rep.isolation_days:>10d}{rep.sociability_days:>12d}  {verdict}")
    n_pool = len(baseline_pool(ds))
    base_ok = "yes" if n_pool >= 2 * args.min_days else "no"
    print(f"{'Baseline (random unfiltered)':34s}{n_pool:>10d}{'':>12s}  {base_ok} (needs >= {2 * args.min_days})")
    return EXIT_OK


def cmd_analyze(args) -> int:
    try:
        comparison = analyze_participant(
            Path(args.input),
            args.context,
            args.subset,
            args.seed,
            args.permutations,
            args.sample_size,
            Path(args.out),
            emit_differences=args.emit_differences,
            verbose_indices=args.verbose_indices,
        )
    except FileNotFoundError:
        print(f"error: file not found: {args.input}", file=sys.stderr)
        return EXIT_INPUT
    except SchemaViolation as exc:
        print(f"schema violation: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InsufficientPool as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    print((Path(args.out) / "table.txt").read_text(encoding="utf-8"), end="")
    _ = comparison
    return EXIT_OK


def cmd_cohort(args) -> int:
    indir = Path(args.inputs)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    files = sorted(indir.glob("*.csv"))
    rows = []
    excluded = []
    for f in files:
        pid = f.stem
        try:
            comparison = analyze_participant(
                f,
                args.context,
                args.subset,
                args.seed,
                args.permutations,
                args.sample_size,
                outdir / pid,
                emit_differences=args.emit_differences,
                verbose_indices=args.verbose_indices,
                stream_prefix=pid + "/",
            )
        except SchemaViolation as exc:
            excluded.append((pid, f"schema violation: {exc}"))
            continue
        except InsufficientPool as exc:
            excluded.append((pid, str(exc)))
            continue
        rows.append((pid, comparison))
    feature = CONTEXT_FLAGS[args.context]
    lines = [
        f"{'':10s}{'Baseline':22s}{DISPLAY_NAMES[feature]}",
        f"{'ID':10s}{'x̄':>8s}{'σ':>10s}    {'x̄':>8s}{'σ':>10s}{'t':>12s}",
    ]
    for pid, comp in rows:
        mark = significance_marker(comp.test.p_value)
        lines.append(
            (
                f"{pid:10s}"
                f"{comp.baseline.mean:8.2f}{comp.baseline.std:10.2f}    "
                f"{comp.context.mean:8.2f}{comp.context.std:10.2f}"
                f"{_t_cell(comp.test.t_score):>12s} {mark}"
            ).rstrip()
        )
    lines.append("")
    if excluded:
        lines.append("Excluded participants:")
        for pid, reason in excluded:
            lines.append(f"  {pid}: {reason}")
        lines.append("")
    lines.append(TABLE_FOOTER.rstrip())
    table = "\n".join(lines) + "\n"
    (outdir / "cohort_table.txt").write_text(table, encoding="utf-8")
    print(table, end="")
    if not rows:
        print("error: no eligible participants", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def _synth_config_from_args(args) -> SynthConfig:
    if args.config:
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
        for key in ("isolation_corr", "sociability_corr"):
            if key in raw:
                raw[key] = tuple(tuple(float(v) for v in row) for row in raw[key])
        for key in ("isolation_mean", "sociability_mean"):
            if key in raw:
                raw[key] = tuple(float(v) for v in raw[key])
        return SynthConfig(**raw)
    kwargs = dict(
        n_days=args.days,
        seed=args.seed,
        report_cadence=args.cadence,
        planted_feature=args.feature,
        context_mix=args.mix,
        missing_sensor_rate=args.missing_rate,
    )
    if args.planted_r and not args.null:
        kwargs["isolation_corr"] = correlated_block(args.planted_r)
    return SynthConfig(**kwargs)


def cmd_synth(args) -> int:
    try:
        cfg = _synth_config_from_args(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: invalid synth config: {exc}", file=sys.stderr)
        return EXIT_INPUT
    ds = generate(cfg)
    write_participant(ds, Path(args.out))
    print(f"wrote {len(ds.records)} days ({ds.usable_days} reported EMAs) to {args.out}")
    return EXIT_OK


def cmd_export_network(args) -> int:
    try:
        ds = backfill_emas(parse_participant(Path(args.input)))
    except FileNotFoundError:
        print(f"error: file not found: {args.input}", file=sys.stderr)
        return EXIT_INPUT
    except SchemaViolation as exc:
        print(f"schema violation: {exc}", file=sys.stderr)
        return EXIT_INPUT
    subset = ItemSubset.from_flag(args.subset)
    ctx = ContextSpec.from_flag(args.context)
    by_date = ds.by_date()
    if ctx.is_baseline:
        days = baseline_pool(ds)
    else:
        pools = categorize(ds, ctx)
        days = pools.isolation_days if args.category == "isolation" else pools.sociability_days
    if len(days) < 2:
        print(f"error: {args.category} pool has {len(days)} days, need 2", file=sys.stderr)
        return EXIT_PRECONDITION
    net = pearson_network([by_date[d].ema for d in days], subset)
    text = export_network(net, args.format)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--subset", choices=("all", "positive", "negative"), default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--permutations", type=int, default=2000)
    p.add_argument("--sample-size", type=int, default=25)
    p.add_argument("--emit-differences", action="store_true", help="include per-iteration differences in JSON output")
    p.add_argument("--verbose-indices", action="store_true", help="log per-iteration sampled day indices")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="emanet", description=__doc__)
    parser.add_argument("--version", action="version", version=f"emanet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="schema check and per-context eligibility report")
    p.add_argument("input")
    p.add_argument("--min-days", type=int, default=25)
    p.set_defaults(func=cmd_validate)

    context_choices = [c for c in CONTEXT_FLAGS if c != "baseline"]

    p = sub.add_parser("analyze", help="run one context's permutation analysis end to end")
    p.add_argument("input")
    p.add_argument("--context", choices=context_choices, required=True)
    p.add_argument("--out", required=True)
    _add_run_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("cohort", help="analyze every participant CSV in a directory")
    p.add_argument("inputs")
    p.add_argument("--context", choices=context_choices, required=True)
    p.add_argument("--out", required=True)
    _add_run_flags(p)
    p.set_defaults(func=cmd_cohort)

    p = sub.add_parser("synth", help="generate a synthetic participant CSV")
    p.add_argument("--out", required=True)
    p.add_argument("--config", help="JSON file with SynthConfig keys (overrides other flags)")
    p.add_argument("--days", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cadence", type=int, default=3)
    p.add_argument("--feature", choices=list(CONTEXT_FLAGS.values())[:-1], default="locations_visited")
    p.add_argument("--mix", type=float, default=0.5)
    p.add_argument("--planted-r", type=float, default=0.0, help="latent correlation among positive items in isolation")
    p.add_argument("--null", action="store_true", help="identical correlation targets for both categories")
    p.add_argument("--missing-rate", type=float, default=0.0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("export-network", help="export an all-day category network as JSON or DOT")
    p.add_argument("input")
    p.add_argument("--context", choices=list(CONTEXT_FLAGS), required=True)
    p.add_argument("--category", choices=("isolation", "sociability"), default="isolation")
    p.add_argument("--subset", choices=("all", "positive", "negative"), default="all")
    p.add_argument("--format", choices=("json", "dot"), default="dot")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export_network)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
