"""Multi-seed experiment sweeps and their CSV reports.

Each mode sweeps a cartesian grid of parameters over an ensemble of
discretisation seeds, records per-run error norms as CSV rows, and
appends seed-band and fitted-slope summary lines.  Reports are exactly
reproducible: identical configurations produce byte-identical files.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import analysis, manufactured
from .errors import ConfigError, SlopeFitError
from .geometry import discretize_disc
from .linsys import solve_poisson

DEFAULT_M = [2, 3, 4]
DEFAULT_H = [0.16, 0.08, 0.04, 0.02]
# Dilation sweep runs toward flatter fields so the solution error stays
# far from its saturation level at the fixed spacing; the growth law in
# the dilation factor reads off the same slope.
DEFAULT_R = [0.125, 0.25, 0.5, 1.0]
DEFAULT_SEEDS = 5
DEFAULT_TOL = 1.0e-10

SWEEP_MODES = ("converge-h", "converge-r", "terms")
MODES = SWEEP_MODES + ("solve", "nodes")


def _fmt(value) -> str:
    if value is None:
        return ""
    return f"{value:.17g}"


@dataclass
class ExperimentConfig:
    mode: str
    m_list: list[int] = field(default_factory=lambda: list(DEFAULT_M))
    h_list: list[float] = field(default_factory=lambda: list(DEFAULT_H))
    R_list: list[float] = field(default_factory=lambda: list(DEFAULT_R))
    seeds: int = DEFAULT_SEEDS
    tol: float = DEFAULT_TOL
    d_max: int | None = None
    out: str | None = None

    def validate(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.m_list:
            raise ConfigError("--m: need at least one degree")
        for m in self.m_list:
            if not 2 <= m <= 6:
                raise ConfigError(f"--m: degrees must lie in [2, 6], got {m}")
        if not self.h_list:
            raise ConfigError("--h: need at least one spacing")
        for h in self.h_list:
            if not 0.0 < h < 2.0:
                raise ConfigError(f"--h: spacings must lie in (0, 2), got {h}")
        for r in self.R_list:
            if not r > 0:
                raise ConfigError(f"--r: dilations must be positive, got {r}")
        if self.seeds < 1:
            raise ConfigError(f"--seeds: need at least 1, got {self.seeds}")
        if not self.tol > 0:
            raise ConfigError(f"--tol: tolerance must be positive, got {self.tol}")
        if self.mode == "terms":
            if len(self.m_list) != 1:
                raise ConfigError("--m: terms mode takes a single degree")
            if self.d_max is not None and self.d_max <= self.m_list[0]:
                raise ConfigError(
                    f"--dmax: must exceed the degree {self.m_list[0]}, got {self.d_max}"
                )
        if self.mode == "converge-r" and len(self.h_list) != 1:
            raise ConfigError("--h: converge-r mode takes a single spacing")
        return self

    def effective_d_max(self) -> int:
        return self.d_max if self.d_max is not None else self.m_list[0] + 6

    def as_json(self) -> str:
        # The output path is deliberately not part of the provenance
        # header: identical experiments written to different files must
        # produce byte-identical reports.
        payload = {
            "mode": self.mode,
            "m": self.m_list,
            "h": self.h_list,
            "r": self.R_list,
            "seeds": self.seeds,
            "tol": self.tol,
            "dmax": self.d_max,
        }
        return json.dumps(payload, sort_keys=True)


@dataclass
class ReportRow:
    mode: str
    m: int
    h: float
    R: float
    seed: int
    norm_kind: str
    e_op: float
    e_sol: float
    term_degree: int | None = None
    term_value: float | None = None


@dataclass
class SlopeSummary:
    m: int
    group: str
    norm_kind: str
    slope: float


@dataclass
class BandSummary:
    m: int
    h: float
    R: float
    norm_kind: str
    field: str
    lo: float
    hi: float
    mean: float


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: list[ReportRow]
    slopes: list[SlopeSummary]
    bands: list[BandSummary]
    failures: list[str]


NORM_KINDS = ("mean_l1", "linf")


def _norm_pair(e) -> dict[str, float]:
    mean_l1, linf = analysis.error_norms(e)
    return {"mean_l1": mean_l1, "linf": linf}


def _field_norms(values: np.ndarray) -> dict[str, float]:
    return {
        "mean_l1": float(np.abs(values).sum() / values.shape[0]),
        "linf": float(np.abs(values).max()),
    }


def _fit_or_nan(scales, errs, failures, label) -> float:
    try:
        return analysis.fit_slope(scales, errs)
    except SlopeFitError as exc:
        failures.append(f"slope {label}: {exc}")
        return float("nan")


def _collect_bands(bands, m, h, R, fields):
    """Seed min/max/mean per parameter cell, mirroring shaded plot bands."""
    for norm in NORM_KINDS:
        for fieldname, values in fields.items():
            vals = values[norm]
            if not vals:
                continue
            bands.append(
                BandSummary(
                    m=m, h=h, R=R, norm_kind=norm, field=fieldname,
                    lo=float(np.min(vals)), hi=float(np.max(vals)), mean=float(np.mean(vals)),
                )
            )


def run_converge_h(config: ExperimentConfig) -> ExperimentReport:
    """Operator and solution error norms under decreasing spacing at R=1."""
    config.validate()
    rows, slopes, bands, failures = [], [], [], []
    for m in config.m_list:
        cell_means: dict[str, dict[str, list]] = {"e_op": {k: [] for k in NORM_KINDS},
                                                  "e_sol": {k: [] for k in NORM_KINDS}}
        fitted_h: list[float] = []
        for h in config.h_list:
            per_seed = {"e_op": {k: [] for k in NORM_KINDS}, "e_sol": {k: [] for k in NORM_KINDS}}
            for seed in range(config.seeds):
                try:
                    sol = solve_poisson(h, m, seed=seed, tol=config.tol)
                    op = _norm_pair(analysis.operator_error(sol.nodes, sol.stencils, sol.weights, 1.0))
                    so = _norm_pair(analysis.solution_error(sol.result.x, sol.nodes, 1.0))
                except Exception as exc:
                    failures.append(f"mode=converge-h m={m} h={_fmt(h)} seed={seed}: {exc}")
                    continue
                for norm in NORM_KINDS:
                    rows.append(ReportRow("converge-h", m, h, 1.0, seed, norm, op[norm], so[norm]))
                    per_seed["e_op"][norm].append(op[norm])
                    per_seed["e_sol"][norm].append(so[norm])
            _collect_bands(bands, m, h, 1.0, per_seed)
            if per_seed["e_op"]["mean_l1"]:
                fitted_h.append(h)
                for fieldname in ("e_op", "e_sol"):
                    for norm in NORM_KINDS:
                        cell_means[fieldname][norm].append(float(np.mean(per_seed[fieldname][norm])))
        for fieldname in ("e_op", "e_sol"):
            for norm in NORM_KINDS:
                slopes.append(
                    SlopeSummary(m, fieldname, norm,
                                 _fit_or_nan(fitted_h, cell_means[fieldname][norm], failures,
                                             f"m={m} {fieldname} {norm}"))
                )
    return ExperimentReport(config, rows, slopes, bands, failures)


def run_converge_r(config: ExperimentConfig) -> ExperimentReport:
    """Error norms against the dilation factor at one fixed spacing."""
    config.validate()
    h = config.h_list[0]
    rows, slopes, bands, failures = [], [], [], []
    for m in config.m_list:
        cell_means = {"e_op": {k: [] for k in NORM_KINDS}, "e_sol": {k: [] for k in NORM_KINDS}}
        fitted_r: list[float] = []
        for R in config.R_list:
            per_seed = {"e_op": {k: [] for k in NORM_KINDS}, "e_sol": {k: [] for k in NORM_KINDS}}
            for seed in range(config.seeds):
                try:
                    sol = solve_poisson(h, m, seed=seed, R=R, tol=config.tol)
                    op = _norm_pair(analysis.operator_error(sol.nodes, sol.stencils, sol.weights, R))
                    so = _norm_pair(analysis.solution_error(sol.result.x, sol.nodes, R))
                except Exception as exc:
                    failures.append(f"mode=converge-r m={m} h={_fmt(h)} R={_fmt(R)} seed={seed}: {exc}")
                    continue
                for norm in NORM_KINDS:
                    rows.append(ReportRow("converge-r", m, h, R, seed, norm, op[norm], so[norm]))
                    per_seed["e_op"][norm].append(op[norm])
                    per_seed["e_sol"][norm].append(so[norm])
            _collect_bands(bands, m, h, R, per_seed)
            if per_seed["e_op"]["mean_l1"]:
                fitted_r.append(R)
                for fieldname in ("e_op", "e_sol"):
                    for norm in NORM_KINDS:
                        cell_means[fieldname][norm].append(float(np.mean(per_seed[fieldname][norm])))
        for fieldname in ("e_op", "e_sol"):
            for norm in NORM_KINDS:
                slopes.append(
                    SlopeSummary(m, fieldname, norm,
                                 _fit_or_nan(fitted_r, cell_means[fieldname][norm], failures,
                                             f"m={m} {fieldname} {norm}"))
                )
    return ExperimentReport(config, rows, slopes, bands, failures)


def run_terms(config: ExperimentConfig) -> ExperimentReport:
    """Per-degree truncation-term norms before and after global inversion."""
    config.validate()
    m = config.m_list[0]
    d_max = config.effective_d_max()
    degrees = list(range(m + 1, d_max + 1))
    rows, slopes, bands, failures = [], [], [], []

    pre_means = {d: {k: [] for k in NORM_KINDS} for d in degrees}
    post_means = {d: {k: [] for k in NORM_KINDS} for d in degrees}
    fitted_h: list[float] = []
    for h in config.h_list:
        per_seed_pre = {d: {k: [] for k in NORM_KINDS} for d in degrees}
        per_seed_post = {d: {k: [] for k in NORM_KINDS} for d in degrees}
        any_ok = False
        for seed in range(config.seeds):
            try:
                sol = solve_poisson(h, m, seed=seed, tol=config.tol)
                op = _norm_pair(analysis.operator_error(sol.nodes, sol.stencils, sol.weights, 1.0))
                terms = analysis.truncation_terms(sol.nodes, sol.stencils, sol.weights, 1.0, m, d_max)
                groups = analysis.group_terms_by_degree(terms)
                for group in groups:
                    pre = _field_norms(group.values)
                    post = _field_norms(analysis.invert_term(sol.system, group, tol=config.tol))
                    for norm in NORM_KINDS:
                        rows.append(
                            ReportRow("terms", m, h, 1.0, seed, norm, op[norm], post[norm],
                                      term_degree=group.degree, term_value=pre[norm])
                        )
                        per_seed_pre[group.degree][norm].append(pre[norm])
                        per_seed_post[group.degree][norm].append(post[norm])
                any_ok = True
            except Exception as exc:
                failures.append(f"mode=terms m={m} h={_fmt(h)} seed={seed}: {exc}")
        band_fields = {}
        for d in degrees:
            band_fields[f"term{d}_pre"] = per_seed_pre[d]
            band_fields[f"term{d}_post"] = per_seed_post[d]
        _collect_bands(bands, m, h, 1.0, band_fields)
        if any_ok:
            fitted_h.append(h)
            for d in degrees:
                for norm in NORM_KINDS:
                    pre_means[d][norm].append(float(np.mean(per_seed_pre[d][norm])))
                    post_means[d][norm].append(float(np.mean(per_seed_post[d][norm])))
    for d in degrees:
        for norm in NORM_KINDS:
            slopes.append(SlopeSummary(m, f"term{d}_pre", norm,
                                       _fit_or_nan(fitted_h, pre_means[d][norm], failures,
                                                   f"m={m} term{d}_pre {norm}")))
            slopes.append(SlopeSummary(m, f"term{d}_post", norm,
                                       _fit_or_nan(fitted_h, post_means[d][norm], failures,
                                                   f"m={m} term{d}_post {norm}")))
    return ExperimentReport(config, rows, slopes, bands, failures)


def run_mode(config: ExperimentConfig) -> ExperimentReport:
    runner = {"converge-h": run_converge_h, "converge-r": run_converge_r, "terms": run_terms}
    if config.mode not in runner:
        raise ConfigError(f"mode {config.mode!r} is not a sweep mode")
    return runner[config.mode](config)


def render_report(report: ExperimentReport) -> str:
    """Serialize a report to CSV text with summary comment lines."""
    lines = [f"# config: {report.config.as_json()}"]
    lines.append("mode,m,h,R,seed,norm_kind,e_op,e_sol,term_degree,term_value")
    for r in report.rows:
        degree = "" if r.term_degree is None else str(r.term_degree)
        lines.append(
            f"{r.mode},{r.m},{_fmt(r.h)},{_fmt(r.R)},{r.seed},{r.norm_kind},"
            f"{_fmt(r.e_op)},{_fmt(r.e_sol)},{degree},{_fmt(r.term_value)}"
        )
    for msg in report.failures:
        lines.append(f"# failed: {msg}")
    for b in report.bands:
        lines.append(
            f"# band: m={b.m} h={_fmt(b.h)} R={_fmt(b.R)} norm={b.norm_kind} "
            f"field={b.field} min={_fmt(b.lo)} max={_fmt(b.hi)} mean={_fmt(b.mean)}"
        )
    for s in report.slopes:
        lines.append(f"# slope: m={s.m} group={s.group} norm={s.norm_kind} slope={_fmt(s.slope)}")
    return "\n".join(lines) + "\n"


def write_report(report: ExperimentReport, path: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_report(report))


def read_report(path: str):
    """Parse a report file back into (config dict, rows, slopes, bands, failures)."""
    rows, slopes, bands, failures = [], [], [], []
    config = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# config: "):
                config = json.loads(line[len("# config: "):])
            elif line.startswith("# failed: "):
                failures.append(line[len("# failed: "):])
            elif line.startswith("# band: "):
                kv = dict(item.split("=", 1) for item in line[len("# band: "):].split(" "))
                bands.append(
                    BandSummary(int(kv["m"]), float(kv["h"]), float(kv["R"]), kv["norm"],
                                kv["field"], float(kv["min"]), float(kv["max"]), float(kv["mean"]))
                )
            elif line.startswith("# slope: "):
                kv = dict(item.split("=", 1) for item in line[len("# slope: "):].split(" "))
                slopes.append(SlopeSummary(int(kv["m"]), kv["group"], kv["norm"], float(kv["slope"])))
            elif line.startswith("#") or line.startswith("mode,") or not line:
                continue
            else:
                parts = line.split(",")
                rows.append(
                    ReportRow(parts[0], int(parts[1]), float(parts[2]), float(parts[3]),
                              int(parts[4]), parts[5], float(parts[6]), float(parts[7]),
                              int(parts[8]) if parts[8] else None,
                              float(parts[9]) if parts[9] else None)
                )
    return config, rows, slopes, bands, failures


def node_table(h: float, seed: int) -> str:
    """CSV dump of one discretisation: x,y,kind."""
    nodes = discretize_disc(h, seed)
    lines = ["x,y,kind"]
    for (x, y), bnd in zip(nodes.xy, nodes.is_boundary):
        kind = "boundary" if bnd else "interior"
        lines.append(f"{_fmt(x)},{_fmt(y)},{kind}")
    return "\n".join(lines) + "\n"


def solution_table(h: float, m: int, seed: int, R: float, tol: float) -> str:
    """CSV dump of one solve: x,y,kind,u_num,u_exact,err."""
    sol = solve_poisson(h, m, seed=seed, R=R, tol=tol)
    nodes = sol.nodes
    u_num = sol.result.x
    u_exact = manufactured.exact_u(nodes.xy[:, 0], nodes.xy[:, 1], R)
    err = analysis.solution_error(u_num, nodes, R).values
    lines = ["x,y,kind,u_num,u_exact,err"]
    for i in range(nodes.n_nodes):
        kind = "boundary" if nodes.is_boundary[i] else "interior"
        lines.append(
            f"{_fmt(nodes.xy[i, 0])},{_fmt(nodes.xy[i, 1])},{kind},"
            f"{_fmt(u_num[i])},{_fmt(u_exact[i])},{_fmt(err[i])}"
        )
    return "\n".join(lines) + "\n"
