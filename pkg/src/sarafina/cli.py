"""Command-line front end.

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 configuration
error. Settings come from an optional flat ``section.key = value`` config
file; command-line flags override it.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import __version__
from .chart import emit_chart
from .dataio import (
    PRESETS,
    available,
    builtin,
    case_study,
    emit_report,
    interpolate_annual,
    parse_observations,
    parse_queries,
    parse_report,
    parse_training,
    report_to_dict,
)
from .diagnostics import DiagnosticsConfig, annotate, consistency, convergence_check, resiliency
from .errors import ConfigError, SarafinaError, ValidationError
from .estimator import (
    DEFAULT_CATEGORIES,
    argmax_category,
    build_bins,
    estimate_p_final,
    fit,
    holdout_accuracy,
    posterior,
)
from .metric import p_final, score_series
from .model import GapSeries, ImprovementCategorySet, PolicyIntervention, ScoreReport, gap_at
from .projection import ProjectionSpec, project

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_CONFIG = 0, 1, 2, 3

CONFIG_KEYS = {
    "source.dataset": str,
    "source.input": str,
    "source.interpolate": "bool",
    "policy.name": str,
    "policy.enactment_year": int,
    "policy.reduction_fraction": float,
    "projection.model": str,
    "projection.horizon_years": int,
    "projection.rate": float,
    "diagnostics.delta": float,
    "diagnostics.sigma": float,
    "diagnostics.trials": int,
    "diagnostics.seed": int,
    "diagnostics.manipulation_threshold": float,
    "diagnostics.window": int,
    "diagnostics.tol": float,
    "estimator.training": str,
    "estimator.indicators": str,
    "estimator.bins": int,
    "estimator.smoothing": float,
    "estimator.categories": str,
    "estimator.uniform_priors": "bool",
    "output.path": str,
    "output.svg": str,
    "output.format": str,
}

# config key -> argparse dest
FLAG_FOR_KEY = {
    "source.dataset": "dataset",
    "source.input": "input",
    "source.interpolate": "interpolate",
    "policy.name": "policy_name",
    "policy.enactment_year": "enactment",
    "policy.reduction_fraction": "reduction",
    "projection.model": "model",
    "projection.horizon_years": "horizon",
    "projection.rate": "rate",
    "diagnostics.delta": "delta",
    "diagnostics.sigma": "sigma",
    "diagnostics.trials": "trials",
    "diagnostics.seed": "seed",
    "diagnostics.manipulation_threshold": "threshold",
    "diagnostics.window": "window",
    "diagnostics.tol": "tol",
    "estimator.training": "training",
    "estimator.indicators": "indicators",
    "estimator.bins": "bins",
    "estimator.smoothing": "smoothing",
    "estimator.categories": "categories",
    "estimator.uniform_priors": "uniform_priors",
    "output.path": "output",
    "output.svg": "svg",
    "output.format": "format",
}


def _to_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_config(text: str, origin: str = "config") -> dict[str, object]:
    out: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected 'section.key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{origin}:{lineno}: unknown key {key!r}")
        kind = CONFIG_KEYS[key]
        try:
            out[key] = _to_bool(value) if kind == "bool" else kind(value)
        except ValueError as exc:
            raise ConfigError(f"{origin}:{lineno}: bad value for {key}: {exc}") from None
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


@dataclass
class RunConfig:
    """Merged settings for one invocation; flags take precedence over the file."""

    values: dict[str, object]

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> RunConfig:
        values: dict[str, object] = {}
        if getattr(args, "config", None):
            path = Path(args.config)
            values.update(parse_config(path.read_text(encoding="utf-8"), str(path)))
        for key, dest in FLAG_FOR_KEY.items():
            v = getattr(args, dest, None)
            if v is not None:
                values[key] = v
        return cls(values)

    def get(self, key: str, default=None):
        return self.values.get(key, default)

    def diagnostics(self) -> DiagnosticsConfig:
        d = DiagnosticsConfig()
        try:
            return DiagnosticsConfig(
                perturbation_delta=self.get("diagnostics.delta", d.perturbation_delta),
                noise_sigma=self.get("diagnostics.sigma", d.noise_sigma),
                trials=self.get("diagnostics.trials", d.trials),
                seed=self.get("diagnostics.seed", d.seed),
                manipulation_threshold=self.get("diagnostics.manipulation_threshold",
                                                d.manipulation_threshold),
                convergence_window=self.get("diagnostics.window", d.convergence_window),
                convergence_tol=self.get("diagnostics.tol", d.convergence_tol),
            )
        except ValidationError as exc:
            raise ConfigError(f"diagnostics settings: {exc}") from None

    def projection_spec(self) -> ProjectionSpec:
        try:
            return ProjectionSpec(
                model=self.get("projection.model", "linear"),
                horizon_years=self.get("projection.horizon_years", 10),
                rate=self.get("projection.rate"),
            )
        except ValidationError as exc:
            raise ConfigError(f"projection settings: {exc}") from None


@dataclass
class Scenario:
    series: GapSeries
    policy: PolicyIntervention
    spec: ProjectionSpec
    source: str
    category_note: str | None = None

    def projection(self):
        baseline = gap_at(self.series, self.policy.enactment_year)
        pf = p_final(self.policy.reduction_fraction, baseline)
        years = list(range(self.policy.enactment_year, self.series.observations[-1].year + 1))
        return project(self.spec, baseline, pf, years)


def _categories(text: str | None) -> ImprovementCategorySet:
    if not text:
        return DEFAULT_CATEGORIES
    try:
        return ImprovementCategorySet(tuple(float(p) / 100.0 for p in text.split(",")))
    except ValueError as exc:
        raise ConfigError(f"bad category list {text!r}: {exc}") from None


def _fit_from(cfg: RunConfig):
    training = parse_training(Path(cfg.get("estimator.training")).read_text(encoding="utf-8"))
    cats = _categories(cfg.get("estimator.categories"))
    bins = build_bins(training, cfg.get("estimator.bins", 3))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        model = fit(training, cats, bins, cfg.get("estimator.smoothing", 1.0),
                    uniform_priors=cfg.get("estimator.uniform_priors", False))
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return training, model


def resolve_scenario(cfg: RunConfig) -> Scenario:
    dataset, path = cfg.get("source.dataset"), cfg.get("source.input")
    if (dataset is None) == (path is None):
        raise ConfigError("give exactly one observation source: --dataset NAME or --input CSV")
    preset = None
    if dataset is not None:
        if dataset in PRESETS:
            preset = case_study(dataset)
            series, source = preset.series, dataset
        else:
            series, source = builtin(dataset), dataset
    else:
        series = parse_observations(Path(path).read_text(encoding="utf-8"))
        source = str(path)
    if cfg.get("source.interpolate", False):
        series = interpolate_annual(series)

    reduction = cfg.get("policy.reduction_fraction")
    query = cfg.get("estimator.indicators")
    if reduction is not None and query is not None:
        raise ConfigError("--reduction and --indicators are mutually exclusive")
    enactment = cfg.get("policy.enactment_year",
                        preset.enactment_year if preset else series.observations[0].year)
    note = None
    if query is not None:
        if cfg.get("estimator.training") is None:
            raise ConfigError("--indicators needs --training")
        _, model = _fit_from(cfg)
        queries = parse_queries(Path(query).read_text(encoding="utf-8"))
        if len(queries) != 1:
            raise ConfigError(f"--indicators file must hold exactly one row, got {len(queries)}")
        reduction = argmax_category(posterior(model, queries[0]))
        note = f"estimated category {reduction * 100:g}%"
    if reduction is None:
        if preset is None:
            raise ConfigError("no policy impact: give --reduction or --training/--indicators")
        reduction = preset.reduction_fraction
    spec = cfg.projection_spec()
    name = cfg.get("policy.name", preset.policy_name if preset else "policy")
    try:
        policy = PolicyIntervention(name, int(enactment), float(reduction), spec.horizon_years)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from None
    return Scenario(series, policy, spec, source, note)


def format_table(report: ScoreReport) -> str:
    head = ("year", "observed_gap", "projected_gap", "regret", "penalty", "policy_impact",
            "sarafina_score")
    lines = ["  ".join(f"{h:>14}" if i else f"{h:>4}" for i, h in enumerate(head))]
    for r in report.rows:
        lines.append("  ".join([
            f"{r.year:>4}", f"{r.observed_gap:>14.4f}", f"{r.projected_gap:>14.4f}",
            f"{r.regret:>14.4f}", f"{r.penalty:>14.6f}", f"{r.policy_impact:>14.4f}",
            f"{r.sarafina_score:>14.4f}"]))
    for f in report.flags:
        lines.append(f"# flag {f.year} {f.kind}: {f.message}")
    return "\n".join(lines) + "\n"


def _write(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")


def _emit(cfg: RunConfig, text_table: str, payload: dict) -> None:
    fmt = cfg.get("output.format", "table")
    if fmt == "json":
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    elif fmt == "table":
        sys.stdout.write(text_table)
    else:
        raise ConfigError(f"unknown format {fmt!r}; use table or json")


def _scored(cfg: RunConfig, with_flags: bool) -> tuple[Scenario, ScoreReport]:
    sc = resolve_scenario(cfg)
    report = score_series(sc.series, sc.policy, sc.projection())
    meta = [("source", sc.source), ("projection", sc.spec.model),
            ("horizon_years", str(sc.spec.horizon_years))]
    if sc.spec.rate is not None:
        meta.append(("rate", repr(sc.spec.rate)))
    if sc.category_note:
        meta.append(("estimate", sc.category_note))
    report = ScoreReport(report.rows, report.flags, report.policy, report.p_final, tuple(meta))
    if with_flags:
        report = annotate(report, cfg.diagnostics())
    return sc, report


def cmd_score(cfg: RunConfig, args) -> int:
    _, report = _scored(cfg, args.flags)
    text = emit_report(report)
    fmt = cfg.get("output.format", "table")
    if fmt not in ("table", "json"):
        raise ConfigError(f"unknown format {fmt!r}; use table or json")
    sys.stdout.write(text if fmt == "json" else format_table(report))
    _write(cfg.get("output.path"), text)
    if cfg.get("output.svg"):
        _write(cfg.get("output.svg"), emit_chart(report))
    return EXIT_OK


def cmd_project(cfg: RunConfig, args) -> int:
    sc = resolve_scenario(cfg)
    traj = sc.projection()
    payload = {
        "schema_version": 1,
        "model": sc.spec.model,
        "horizon_years": sc.spec.horizon_years,
        "rate": sc.spec.rate,
        "years": list(traj.years),
        "projected_gap": [float(f"{v:.12g}") for v in traj.projected_gap],
    }
    table = "year  projected_gap\n" + "".join(
        f"{y:>4}  {v:>13.4f}\n" for y, v in zip(traj.years, traj.projected_gap))
    _emit(cfg, table, payload)
    _write(cfg.get("output.path"), json.dumps(payload, indent=2) + "\n")
    return EXIT_OK


def cmd_estimate(cfg: RunConfig, args) -> int:
    if cfg.get("estimator.training") is None or cfg.get("estimator.indicators") is None:
        raise ConfigError("estimate needs --training CSV and --query CSV")
    training, model = _fit_from(cfg)
    queries = parse_queries(Path(cfg.get("estimator.indicators")).read_text(encoding="utf-8"))
    baseline = args.baseline
    results = []
    lines = []
    cat_head = "  ".join(f"{'P(' + format(c * 100, 'g') + '%)':>10}" for c in model.categories)
    lines.append(f"{'row':>4}  {cat_head}  {'category':>9}" + ("  p_final" if baseline else ""))
    for i, q in enumerate(queries, start=1):
        post = posterior(model, q)
        cat = argmax_category(post)
        entry = {
            "row": i,
            "posterior": {format(c * 100, "g"): float(f"{p:.12g}") for c, p in post.items()},
            "category_pct": float(f"{cat * 100:.12g}"),
        }
        line = f"{i:>4}  " + "  ".join(f"{p:>10.6f}" for p in post.values()) + f"  {cat * 100:>8g}%"
        if baseline:
            pf = estimate_p_final(cat, baseline)
            entry["p_final"] = float(f"{pf:.12g}")
            line += f"  {pf:.4f}"
        results.append(entry)
        lines.append(line)
    payload = {"schema_version": 1, "categories_pct": [c * 100 for c in model.categories],
               "estimates": results}
    if args.holdout:
        acc = holdout_accuracy(training, model.categories, args.holdout,
                               cfg.get("estimator.bins", 3), cfg.get("estimator.smoothing", 1.0),
                               seed=cfg.get("diagnostics.seed", 0))
        payload["holdout_accuracy"] = acc
        lines.append(f"# holdout accuracy ({args.holdout:g} held out): {acc:.4f}")
    _emit(cfg, "\n".join(lines) + "\n", payload)
    _write(cfg.get("output.path"), json.dumps(payload, indent=2) + "\n")
    return EXIT_OK


def cmd_diagnose(cfg: RunConfig, args) -> int:
    sc, report = _scored(cfg, True)
    dcfg = cfg.diagnostics()
    proj = sc.projection()
    res = resiliency(sc.series, sc.policy, proj, dcfg.perturbation_delta)
    cons = consistency(sc.series, sc.policy, proj, dcfg)
    payload = {
        "schema_version": 1,
        "resiliency": {
            "delta": res.delta,
            "per_year": {str(y): float(f"{v:.12g}") for y, v in res.per_year.items()},
            "max_change": float(f"{res.max_change:.12g}"),
            "max_year": res.max_year,
        },
        "consistency": {
            "trials": cons.trials, "seed": cons.seed, "sigma": cons.sigma,
            "mean": float(f"{cons.mean:.12g}"), "std": float(f"{cons.std:.12g}"),
            "noiseless": float(f"{cons.noiseless:.12g}"),
        },
        "flags": report_to_dict(report)["flags"],
    }
    lines = [f"resiliency (delta={res.delta:g}): max final-score change {res.max_change:.6f}"
             f" from perturbing {res.max_year}"]
    for y, v in res.per_year.items():
        lines.append(f"  {y}: {v:.6f}")
        if args.verbose:
            lines.append("    rows: " + " ".join(f"{x:.6f}" for x in res.row_changes[y]))
    lines.append(f"consistency (sigma={cons.sigma:g}, trials={cons.trials}, seed={cons.seed}): "
                 f"mean {cons.mean:.6f}, std {cons.std:.6f}, noiseless {cons.noiseless:.6f}")
    if len(report.rows) >= dcfg.convergence_window + 1:
        conv = convergence_check(report, dcfg.convergence_window, dcfg.convergence_tol)
        payload["convergence"] = {"converged": conv.converged,
                                  "limiting_estimate": float(f"{conv.limiting_estimate:.12g}"),
                                  "change": float(f"{conv.change:.12g}")}
        lines.append(f"convergence (window={dcfg.convergence_window}, tol={dcfg.convergence_tol:g}): "
                     f"{'converged' if conv.converged else 'not converged'}, "
                     f"limiting estimate {conv.limiting_estimate:.6f}")
    for f in report.flags:
        lines.append(f"# flag {f.year} {f.kind}: {f.message}")
    _emit(cfg, "\n".join(lines) + "\n", payload)
    _write(cfg.get("output.path"), json.dumps(payload, indent=2) + "\n")
    if cfg.get("output.svg"):
        _write(cfg.get("output.svg"), emit_chart(report))
    return EXIT_OK


def cmd_datasets(cfg: RunConfig, args) -> int:
    if not args.name:
        names = available()
        payload = {"datasets": names}
        _emit(cfg, "".join(f"{n}\n" for n in names), payload)
        return EXIT_OK
    series = case_study(args.name).series if args.name in PRESETS else builtin(args.name)
    rows = [{"year": o.year, "men_pct": o.men_share, "women_pct": o.women_share, "gap_pct": o.gap,
             "synthetic": o.synthetic, "source": o.source, "sample_size": o.sample_size}
            for o in series]
    table = "year   men_pct  women_pct   gap_pct  source\n" + "".join(
        f"{r['year']:>4}  {r['men_pct']:>8.2f}  {r['women_pct']:>9.2f}  {r['gap_pct']:>8.2f}  "
        f"{r['source'] or ''}{' (n=' + str(r['sample_size']) + ')' if r['sample_size'] else ''}\n"
        for r in rows)
    _emit(cfg, table, {"name": args.name, "rows": rows})
    return EXIT_OK


def cmd_report(cfg: RunConfig, args) -> int:
    report = parse_report(Path(args.report).read_text(encoding="utf-8"))
    text = emit_report(report)
    fmt = cfg.get("output.format", "table")
    if fmt not in ("table", "json"):
        raise ConfigError(f"unknown format {fmt!r}; use table or json")
    sys.stdout.write(text if fmt == "json" else format_table(report))
    _write(cfg.get("output.path"), text)
    if cfg.get("output.svg"):
        _write(cfg.get("output.svg"), emit_chart(report))
    return EXIT_OK


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    g = p.add_argument_group("global options")
    g.add_argument("--config", metavar="PATH", default=d, help="flat 'section.key = value' config file")
    g.add_argument("--output", metavar="PATH", default=d, help="write the JSON result here")
    g.add_argument("--svg", metavar="PATH", default=d, help="write an SVG chart here")
    g.add_argument("--format", choices=("table", "json"), default=d, help="standard output format")
    g.add_argument("--seed", type=int, default=d, help="Monte Carlo seed (unsigned 64-bit)")


def _source_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("observations and policy")
    g.add_argument("--dataset", metavar="NAME",
                   help=f"built-in dataset or case study: {', '.join(available())}")
    g.add_argument("--input", metavar="CSV", help="observation CSV (year,men_pct,women_pct or year,gap_pct)")
    g.add_argument("--interpolate", action="store_const", const=True,
                   help="linearly interpolate to one row per year before scoring")
    g.add_argument("--enactment", type=int, metavar="YEAR", help="policy enactment year")
    g.add_argument("--reduction", type=float, metavar="FRACTION",
                   help="estimated final reduction as a fraction of the baseline gap (0.25 = 25%%)")
    g.add_argument("--policy-name", dest="policy_name", metavar="TEXT", help="label for the policy")
    g.add_argument("--training", metavar="CSV", help="training CSV for estimating the reduction")
    g.add_argument("--indicators", metavar="CSV",
                   help="one-row indicator CSV; estimates the reduction instead of --reduction")
    g.add_argument("--bins", type=int, metavar="B", help="quantile bins per indicator (default 3)")
    g.add_argument("--smoothing", type=float, metavar="ALPHA", help="Laplace smoothing (default 1)")
    g.add_argument("--categories", metavar="PCTS", help="comma-separated categories in percent (default 2,4,6)")
    g.add_argument("--uniform-priors", dest="uniform_priors", action="store_const", const=True,
                   help="use uniform category priors instead of smoothed counts")
    g = p.add_argument_group("projection")
    g.add_argument("--model", choices=("linear", "exponential"), help="projection shape (default linear)")
    g.add_argument("--horizon", type=int, metavar="YEARS", help="linear projection horizon (default 10)")
    g.add_argument("--rate", type=float, help="exponential decay constant per year")


def _diagnostic_flags(p: argparse.ArgumentParser, full: bool) -> None:
    g = p.add_argument_group("diagnostics")
    if full:
        g.add_argument("--delta", type=float, help="resiliency perturbation in points (default 1.0)")
        g.add_argument("--sigma", type=float, help="consistency noise sigma in points (default 0.5)")
        g.add_argument("--trials", type=int, help="Monte Carlo replicates, >= 100 (default 1000)")
        g.add_argument("--verbose", action="store_true", help="show per-row resiliency changes")
    g.add_argument("--threshold", type=float, help="manipulation flag threshold, points/year (default 1.0)")
    g.add_argument("--window", type=int, help="convergence window in years (default 3)")
    g.add_argument("--tol", type=float, help="convergence tolerance in points (default 0.25)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sarafina", description="Policy-adjusted gender asset gap scoring.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("score", help="score a gap series against a policy projection")
    _source_flags(p)
    _diagnostic_flags(p, full=False)
    p.add_argument("--flags", action="store_true", help="attach manipulation and convergence flags")
    _global_flags(p, suppress=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("project", help="print the projected gap trajectory")
    _source_flags(p)
    _global_flags(p, suppress=True)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("estimate", help="estimate the improvement category from proxy indicators")
    p.add_argument("--training", required=False, metavar="CSV", help="training CSV")
    p.add_argument("--query", dest="indicators", metavar="CSV", help="query CSV, one row per estimate")
    p.add_argument("--categories", metavar="PCTS", help="comma-separated categories in percent (default 2,4,6)")
    p.add_argument("--bins", type=int, metavar="B", help="quantile bins per indicator (default 3)")
    p.add_argument("--smoothing", type=float, metavar="ALPHA", help="Laplace smoothing (default 1)")
    p.add_argument("--uniform-priors", dest="uniform_priors", action="store_const", const=True,
                   help="use uniform category priors")
    p.add_argument("--baseline", type=float, metavar="GAP", help="baseline gap; also report p_final")
    p.add_argument("--holdout", type=float, metavar="FRACTION", help="report accuracy on a held-out fraction")
    _global_flags(p, suppress=True)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("diagnose", help="resiliency, consistency, manipulation and convergence checks")
    _source_flags(p)
    _diagnostic_flags(p, full=True)
    _global_flags(p, suppress=True)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("datasets", help="list built-in datasets or show one")
    p.add_argument("name", nargs="?", help="dataset or case-study name")
    _global_flags(p, suppress=True)
    p.set_defaults(func=cmd_datasets)

    p = sub.add_parser("report", help="re-render a saved JSON report as a table, JSON or SVG")
    p.add_argument("--report", required=True, metavar="JSON", help="report written by 'score --output'")
    _global_flags(p, suppress=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = RunConfig.from_args(args)
        return args.func(cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SarafinaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
