"""CSV ingestion, built-in datasets, interpolation and JSON reports."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Sequence

from .errors import ValidationError
from .model import (
    Flag,
    GapObservation,
    GapSeries,
    IndicatorVector,
    PolicyIntervention,
    ScoreReport,
    ScoreRow,
    TrainingRecord,
    validate_series,
)

SCHEMA_VERSION = 1
SHARE_HEADER = ["year", "men_pct", "women_pct"]
GAP_HEADER = ["year", "gap_pct"]
TARGET_COLUMN = "realized_reduction_pct"

# (year, men %, women %, gap %, source, n)
_BRAZIL = [
    (2000, 89.0, 11.0, 78.0, "Deere et al. 2003", 39904),
    (2006, 89.8, 10.2, 79.6, "Araujo et al. 2024", 2779),
    (2017, 85.2, 14.8, 70.4, "Araujo et al. 2024", 2779),
]
_MEXICO = [
    (1984, 87.0, 13.0, 74.0, "Hamilton 2002", 225),
    (1996, 78.0, 22.0, 56.0, "Hamilton 2002", 77),
    (2002, 77.6, 22.4, 55.2, "Araujo et al. 2024", 2_900_000),
]


def _table(rows) -> GapSeries:
    return validate_series(GapSeries(
        GapObservation(y, m, w, g, source=src, sample_size=n) for y, m, w, g, src, n in rows))


DATASETS = {"brazil": _BRAZIL, "mexico": _MEXICO}


def builtin(name: str) -> GapSeries:
    if name not in DATASETS:
        raise ValidationError(f"unknown dataset {name!r}; available: {sorted(DATASETS)}")
    return _table(DATASETS[name])


def interpolate_annual(series: GapSeries) -> GapSeries:
    """One row per year between the first and last observation.

    Observed rows are kept as-is; rows in between get a linearly
    interpolated gap, symmetric back-filled shares and ``synthetic=True``.
    """
    validate_series(series)
    obs = series.observations
    if len(obs) < 2:
        raise ValidationError("interpolation needs at least two observations")
    out = [obs[0]]
    for a, b in zip(obs, obs[1:]):
        span = b.year - a.year
        for year in range(a.year + 1, b.year):
            g = a.gap + (b.gap - a.gap) * (year - a.year) / span
            out.append(GapObservation.from_gap(year, g, synthetic=True, source="interpolated"))
        out.append(b)
    return GapSeries(out)


@dataclass(frozen=True)
class CaseStudy:
    name: str
    series: GapSeries
    enactment_year: int
    reduction_fraction: float
    policy_name: str
    note: str

    def policy(self, horizon_years: int = 10) -> PolicyIntervention:
        return PolicyIntervention(self.policy_name, self.enactment_year,
                                  self.reduction_fraction, horizon_years)


def _brazil_case() -> CaseStudy:
    # 2008 baseline carries the 2006 survey value forward; the 2017 endpoint
    # 70.42 follows a rounded 1.02/yr decline from that baseline.
    anchors = GapSeries([
        GapObservation.from_gap(2008, 79.6, source="2006 survey carried to 2008"),
        GapObservation.from_gap(2017, 70.42, source="2017 survey, 1.02/yr rounded slope"),
    ])
    return CaseStudy("brazil-case-study", interpolate_annual(anchors), 2008, 0.25,
                     "Espaco Feminista (2008)",
                     "Brazil 2008-2017, annual gaps interpolated between 79.6 and 70.42")


def _mexico_case() -> CaseStudy:
    anchors = GapSeries([
        GapObservation.from_gap(1992, 74.0, source="1984 survey carried to 1992"),
        GapObservation.from_shares(1996, 78.0, 22.0, source="Hamilton 2002", sample_size=77),
        GapObservation.from_shares(2002, 77.6, 22.4, source="Araujo et al. 2024",
                                   sample_size=2_900_000),
    ])
    return CaseStudy("mexico-case-study", interpolate_annual(anchors), 1992, 0.25,
                     "1992 constitutional revision",
                     "Mexico 1992-2002, baseline 74 at 1992, interpolated through 1996 and 2002")


PRESETS = {"brazil-case-study": _brazil_case, "mexico-case-study": _mexico_case}


def case_study(name: str) -> CaseStudy:
    if name not in PRESETS:
        raise ValidationError(f"unknown case study {name!r}; available: {sorted(PRESETS)}")
    return PRESETS[name]()


def available() -> list[str]:
    return sorted(DATASETS) + sorted(PRESETS)


def _read_rows(text: str) -> tuple[list[str], list[list[str]]]:
    rows = [r for r in csv.reader(io.StringIO(text.lstrip("﻿"))) if any(c.strip() for c in r)]
    if not rows:
        raise ValidationError("CSV is empty")
    return [h.strip() for h in rows[0]], rows[1:]


def _number(cell: str, row: int, column: str) -> float:
    try:
        return float(cell.strip())
    except ValueError:
        raise ValidationError(f"row {row}, column {column!r}: {cell!r} is not a number") from None


def _year(cell: str, row: int) -> int:
    v = _number(cell, row, "year")
    if v != int(v):
        raise ValidationError(f"row {row}, column 'year': {cell!r} is not an integer year")
    return int(v)


def parse_observations(text: str) -> GapSeries:
    header, rows = _read_rows(text)
    if header == SHARE_HEADER:
        shares = True
    elif header == GAP_HEADER:
        shares = False
    else:
        raise ValidationError(
            f"unexpected header {','.join(header)!r}; expected "
            f"{','.join(SHARE_HEADER)!r} or {','.join(GAP_HEADER)!r}")
    obs = {}
    for i, r in enumerate(rows, start=2):
        if len(r) != len(header):
            raise ValidationError(f"row {i}: expected {len(header)} cells, got {len(r)}")
        year = _year(r[0], i)
        if year in obs:
            raise ValidationError(f"row {i}: duplicate year {year}")
        if shares:
            obs[year] = GapObservation.from_shares(
                year, _number(r[1], i, "men_pct"), _number(r[2], i, "women_pct"))
        else:
            obs[year] = GapObservation.from_gap(year, _number(r[1], i, "gap_pct"))
    if not obs:
        raise ValidationError("CSV has a header but no data rows")
    return validate_series(GapSeries(obs[y] for y in sorted(obs)))


def _fmt(x: float) -> str:
    return repr(float(x))


def serialize_observations(series: GapSeries, form: str = "shares") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if form == "shares":
        w.writerow(SHARE_HEADER)
        for o in series:
            w.writerow([o.year, _fmt(o.men_share), _fmt(o.women_share)])
    elif form == "gap":
        w.writerow(GAP_HEADER)
        for o in series:
            w.writerow([o.year, _fmt(o.gap)])
    else:
        raise ValueError(f"form must be 'shares' or 'gap', got {form!r}")
    return buf.getvalue()


def parse_training(text: str) -> list[TrainingRecord]:
    """Indicator columns plus ``realized_reduction_pct`` (percent, e.g. 4 for 4%)."""
    header, rows = _read_rows(text)
    if TARGET_COLUMN not in header:
        raise ValidationError(f"training CSV needs a {TARGET_COLUMN!r} column")
    if len(set(header)) != len(header):
        raise ValidationError(f"duplicate column names in {header}")
    names = [h for h in header if h != TARGET_COLUMN]
    if not names:
        raise ValidationError("training CSV has no indicator columns")
    out = []
    for i, r in enumerate(rows, start=2):
        if len(r) != len(header):
            raise ValidationError(f"row {i}: expected {len(header)} cells, got {len(r)}")
        cells = dict(zip(header, r))
        vals = {n: _number(cells[n], i, n) for n in names}
        pct = _number(cells[TARGET_COLUMN], i, TARGET_COLUMN)
        out.append(TrainingRecord(IndicatorVector(vals), pct / 100.0))
    if not out:
        raise ValidationError("training CSV has no data rows")
    return out


def parse_queries(text: str) -> list[IndicatorVector]:
    header, rows = _read_rows(text)
    if len(set(header)) != len(header):
        raise ValidationError(f"duplicate column names in {header}")
    out = []
    for i, r in enumerate(rows, start=2):
        if len(r) != len(header):
            raise ValidationError(f"row {i}: expected {len(header)} cells, got {len(r)}")
        out.append(IndicatorVector({h: _number(c, i, h) for h, c in zip(header, r)}))
    return out


def _num(x: float) -> float:
    return float(f"{x:.12g}")


def report_to_dict(report: ScoreReport) -> dict:
    policy = None
    if report.policy is not None:
        p = report.policy
        policy = {
            "name": p.name,
            "enactment_year": p.enactment_year,
            "reduction_fraction": _num(p.reduction_fraction),
            "horizon_years": p.horizon_years,
        }
    return {
        "schema_version": SCHEMA_VERSION,
        "policy": policy,
        "p_final": None if report.p_final is None else _num(report.p_final),
        "metadata": {k: v for k, v in report.metadata},
        "rows": [
            {
                "year": r.year,
                "observed_gap": _num(r.observed_gap),
                "projected_gap": _num(r.projected_gap),
                "regret": _num(r.regret),
                "penalty": _num(r.penalty),
                "policy_impact": _num(r.policy_impact),
                "sarafina_score": _num(r.sarafina_score),
            }
            for r in report.rows
        ],
        "flags": [{"year": f.year, "kind": f.kind, "message": f.message} for f in report.flags],
    }


def emit_report(report: ScoreReport) -> str:
    """JSON text with fixed key order and at most 12 significant digits per number."""
    return json.dumps(report_to_dict(report), indent=2, ensure_ascii=False) + "\n"


def parse_report(text: str) -> ScoreReport:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"report is not valid JSON: {exc}") from None
    if d.get("schema_version") != SCHEMA_VERSION:
        raise ValidationError(f"unsupported report schema_version {d.get('schema_version')!r}")
    try:
        p = d.get("policy")
        policy = None if p is None else PolicyIntervention(
            p["name"], int(p["enactment_year"]), float(p["reduction_fraction"]), int(p["horizon_years"]))
        rows = [ScoreRow(int(r["year"]), *(float(r[k]) for k in (
            "observed_gap", "projected_gap", "regret", "penalty", "policy_impact", "sarafina_score")))
            for r in d["rows"]]
        flags = [Flag(int(f["year"]), f["kind"], f["message"]) for f in d["flags"]]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed report: {exc!r}") from None
    pf = d.get("p_final")
    meta = tuple((str(k), str(v)) for k, v in (d.get("metadata") or {}).items())
    return ScoreReport(rows, flags, policy, None if pf is None else float(pf), meta)
