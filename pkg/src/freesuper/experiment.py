"""Superconvergence experiments: configuration, runner and report emitters."""
from __future__ import annotations

import copy
import csv
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import additive as add
from . import inversion as inv
from . import limits as L
from . import mult_circle as mc
from . import mult_halfline as mh
from .generators import ArrayGenerator, GeneratorError, generate_row
from .measures import Domain, infinitesimality_deficit
from .sweep import NoCrossing

REPORT_FIELDS = ("n", "sup_err", "d1_err", "d2_err", "deficit", "excluded")
PIPELINE_ERRORS = (NoCrossing, inv.InversionError, add.WindowNotCovered,
                   add.NonMonotoneAbscissae, ArithmeticError)
DEFAULTS = {"window": {"floor": 0.01}, "grids": {"param": 801, "metric": 401},
            "tolerances": {"deficit_eps": 0.5}, "seed": 0,
            "outputs": {"stem": "report", "formats": ["csv", "json", "svg"]}}


class ConfigError(ValueError):
    pass


def load_config(source):
    """Config from a path, a JSON string or a dict, with defaults filled in."""
    if isinstance(source, dict):
        cfg = copy.deepcopy(source)
    else:
        text = Path(source).read_text() if Path(str(source)).exists() else source
        try:
            cfg = json.loads(text)
        except (json.JSONDecodeError, TypeError) as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    for key, val in DEFAULTS.items():
        if isinstance(val, dict):
            cfg[key] = {**val, **cfg.get(key, {})}
        else:
            cfg.setdefault(key, val)
    for key in ("generator", "limit", "schedule"):
        if key not in cfg:
            raise ConfigError(f"config lacks {key!r}")
    if "J" not in cfg["window"]:
        raise ConfigError("window needs an interval J")
    return cfg


def make_generator(cfg):
    g = cfg["generator"]
    try:
        return ArrayGenerator(g["kind"], dict(g.get("params", {})), g.get("profile", "uniform"),
                              int(cfg.get("seed", 0)))
    except (KeyError, GeneratorError) as exc:
        raise ConfigError(f"bad generator: {exc}") from exc


def make_limit(desc, gen: ArrayGenerator | None = None):
    """Oracle callable, representation data, the string 'cauchy', or None."""
    kind = desc.get("kind")
    try:
        if kind == "oracle":
            name, kw = desc["name"], {k: desc[k] for k in ("lam", "d") if k in desc}
            L.oracle_density(name, np.array([]), **kw)
            return lambda x: L.oracle_density(name, x, **kw)
        if kind == "generator":
            return gen.limit_data()
        if kind == "nevanlinna":
            return L.NevanlinnaData(desc["c"], desc["x"], desc["w"])
        if kind == "exp_sigma_halfline":
            t = [np.inf if v is None or v == "inf" else v for v in desc["t"]]
            return L.ExpSigmaDataHalfline(desc["gamma"], t, desc["w"])
        if kind == "herglotz_circle":
            g = desc.get("gamma", 0.0)
            return L.HerglotzSigmaDataCircle(np.exp(1j * g), desc["angles"], desc["w"])
        if kind == "cauchy":
            return "cauchy"
    except (KeyError, L.LimitError) as exc:
        raise ConfigError(f"bad limit: {exc}") from exc
    raise ConfigError(f"unknown limit kind {kind!r}")


def pipeline_curve(obj, domain, J, num):
    """Density curve of a row or of limit data over the window J."""
    if domain is Domain.LINE:
        return add.curve_on_window(obj, J, num)
    if domain is Domain.HALFLINE:
        return mh.curve_on_window(obj, J, num)
    center = 0.5 * (J[0] + J[1])
    curve = mc.density_curve_circle(obj, num, center)
    if curve.x.size == 0 or ((curve.x[0] > J[0] or curve.x[-1] < J[1]) and curve.excluded == 0):
        raise add.WindowNotCovered(f"the recovered density does not cover {J}")
    curve.extra["zero_outside"] = curve.excluded > 0
    return curve


@dataclass
class SuperconvReport:
    schedule: list
    entries: list
    limit: str
    config: dict
    seed: int
    trend: dict = field(default_factory=dict)
    curves: dict = field(default_factory=dict, repr=False, compare=False)
    limit_curve: object = field(default=None, repr=False, compare=False)

    def to_dict(self):
        d = asdict(self)
        d.pop("curves")
        d.pop("limit_curve")
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**d)

    def column(self, key):
        return [e[key] for e in self.entries]


def _strictly_decreasing(vals):
    v = [x for x in vals]
    return all(a is not None and b is not None and b < a for a, b in zip(v, v[1:]))


def run_experiment(config):
    """Build each row of the schedule, recover its density and compare with the limit."""
    cfg = load_config(config)
    gen = make_generator(cfg)
    limit = make_limit(cfg["limit"], gen)
    J = tuple(float(v) for v in cfg["window"]["J"])
    num = int(cfg["grids"]["param"])
    mnum = int(cfg["grids"]["metric"])
    eps = float(cfg["tolerances"]["deficit_eps"])
    schedule = [int(n) for n in cfg["schedule"]]
    domain = gen.domain

    limit_curve = None
    if isinstance(limit, (L.NevanlinnaData, L.ExpSigmaDataHalfline, L.HerglotzSigmaDataCircle)):
        limit_curve = pipeline_curve(limit, domain, J, num)
        target = limit_curve
    else:
        target = limit

    curves, errors = {}, {}
    ns = list(schedule)
    if target == "cauchy":
        ns.append(int(cfg["limit"].get("reference_n", 4 * schedule[-1])))
    for n in ns:
        try:
            curves[n] = pipeline_curve(generate_row(gen, n), domain, J, num)
        except PIPELINE_ERRORS as exc:
            errors[n] = f"{type(exc).__name__}: {exc}"

    entries = []
    for k, n in enumerate(schedule):
        row = generate_row(gen, n)
        entry = {"n": n, "sup_err": None, "d1_err": None, "d2_err": None,
                 "deficit": infinitesimality_deficit(row, eps), "excluded": None, "error": None}
        ref = ns[k + 1] if target == "cauchy" else None
        if n in curves and (ref is None or ref in curves):
            entry["excluded"] = curves[n].excluded
            try:
                m = add.superconv_metrics(curves[n], curves[ref] if ref else target, J, mnum)
                entry.update(m)
            except PIPELINE_ERRORS as exc:
                entry["error"] = f"{type(exc).__name__}: {exc}"
        else:
            entry["error"] = errors.get(n) or errors.get(ref)
        entries.append(entry)

    trend = {"sup_err_decreasing": _strictly_decreasing([e["sup_err"] for e in entries]),
             "d1_err_decreasing": _strictly_decreasing([e["d1_err"] for e in entries])}
    label = cfg["limit"].get("name", cfg["limit"]["kind"])
    return SuperconvReport(schedule, entries, label, cfg, int(cfg["seed"]), trend,
                           curves, limit_curve if limit_curve is not None else target)


# -- emitters ----------------------------------------------------------------

def _fmt(v):
    if v is None:
        return ""
    return repr(float(v)) if isinstance(v, float) else str(v)


def report_csv(report: SuperconvReport):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_FIELDS)
    for e in report.entries:
        w.writerow([_fmt(e[k]) for k in REPORT_FIELDS])
    return buf.getvalue()


def density_csv(curve):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("x", "p"))
    for x, p in zip(curve.x, curve.p):
        w.writerow((repr(float(x)), repr(float(p))))
    return buf.getvalue()


def report_json(report: SuperconvReport):
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


def _limit_samples(report, J, num=201):
    lim = report.limit_curve
    if lim is None or isinstance(lim, str):
        return None
    if isinstance(lim, add.DensityCurve):
        keep = (lim.x >= J[0]) & (lim.x <= J[1])
        return lim.x[keep], lim.p[keep]
    x = np.linspace(J[0], J[1], num)
    return x, np.asarray(lim(x), dtype=float)


def svg_document(series, J, width=800, height=500, pad=40):
    """Static SVG with one polyline per (label, x, p) series; no external references."""
    pmax = max([float(np.max(p)) for _, x, p in series if len(p)] + [1e-12])
    sx = (width - 2 * pad) / (J[1] - J[0])
    sy = (height - 2 * pad) / (1.05 * pmax)
    colours = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
           f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>']
    for k, (label, x, p) in enumerate(series):
        keep = (x >= J[0]) & (x <= J[1])
        pts = " ".join(f"{pad + (a - J[0]) * sx:.3f},{height - pad - b * sy:.3f}"
                       for a, b in zip(x[keep], p[keep]))
        col = "black" if label == "limit" else colours[k % len(colours)]
        out.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.5" '
                   f'points="{pts}"><title>{label}</title></polyline>')
        out.append(f'<text x="{width - pad - 120}" y="{pad + 16 * k}" font-size="12" '
                   f'fill="{col}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def report_svg(report: SuperconvReport):
    J = tuple(report.config["window"]["J"])
    series = [(f"n={n}", c.x, c.p) for n, c in sorted(report.curves.items())
              if n in report.schedule]
    lim = _limit_samples(report, J)
    if lim is not None:
        series.append(("limit", *lim))
    return svg_document(series, J)


def emit(report, fmt, path):
    """Write the report (or a density curve) as csv, json or svg."""
    path = Path(path)
    if isinstance(report, add.DensityCurve):
        if fmt == "csv":
            text = density_csv(report)
        elif fmt == "json":
            text = json.dumps({"x": [float(v) for v in report.x],
                               "p": [float(v) for v in report.p]}) + "\n"
        elif fmt == "svg":
            text = svg_document([("density", report.x, report.p)],
                                (float(report.x[0]), float(report.x[-1])))
        else:
            raise ValueError(f"unknown format {fmt!r}")
    else:
        text = {"csv": report_csv, "json": report_json, "svg": report_svg}[fmt](report)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IOError(f"cannot write {path}: {exc}") from exc
    return path
