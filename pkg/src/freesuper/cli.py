"""Command line entry point: density, superconv, transform, selftest."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import additive as add
from . import experiment as ex
from . import inversion as inv
from . import transforms as tr
from .generators import generate_row
from .measures import Domain, MeasureError, atomic

log = logging.getLogger("freesuper")

EXIT_OK, EXIT_CONFIG, EXIT_PIPELINE, EXIT_SELFTEST = 0, 2, 3, 4
FORMATS = ("csv", "json", "svg")


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ex.ConfigError(f"cannot read config {path}: {exc}") from exc


def _formats(args, default):
    return args.format or default


def _measure(desc):
    try:
        dom = Domain(desc.get("domain", "line"))
        return atomic(dom, desc["positions"], desc["weights"])
    except (KeyError, ValueError, MeasureError) as exc:
        raise ex.ConfigError(f"bad measure: {exc}") from exc


def cmd_superconv(args):
    cfg = ex.load_config(_read_json(args.config))
    if args.seed is not None:
        cfg["seed"] = args.seed
    report = ex.run_experiment(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = cfg["outputs"]["stem"]
    for fmt in _formats(args, cfg["outputs"]["formats"]):
        log.info("wrote %s", ex.emit(report, fmt, out / f"{stem}.{fmt}"))
    if not args.no_figures:
        from .plotting import render
        for p in render(report, out, stem):
            log.info("wrote %s", p)
    for e in report.entries:
        log.info("n=%d sup_err=%s error=%s", e["n"], e["sup_err"], e["error"])
    if all(e["sup_err"] is None for e in report.entries):
        return EXIT_PIPELINE
    return EXIT_OK


def cmd_density(args):
    cfg = _read_json(args.config)
    if "window" not in cfg or "J" not in cfg["window"]:
        raise ex.ConfigError("density needs window.J")
    J = tuple(cfg["window"]["J"])
    num = int(cfg.get("grids", {}).get("param", 801))
    if "generator" in cfg:
        cfg.setdefault("seed", args.seed if args.seed is not None else 0)
        gen = ex.make_generator(cfg)
        obj, domain = generate_row(gen, int(cfg.get("n", 16))), gen.domain
    elif "row" in cfg:
        ms = [_measure(s) for s in cfg["row"]]
        obj, domain = ms, ms[0].domain
    elif "limit" in cfg:
        obj = ex.make_limit(cfg["limit"])
        domain = {"nevanlinna": Domain.LINE, "exp_sigma_halfline": Domain.HALFLINE,
                  "herglotz_circle": Domain.CIRCLE}.get(cfg["limit"]["kind"])
        if domain is None:
            raise ex.ConfigError("density needs representation data as limit")
    else:
        raise ex.ConfigError("density needs a generator, a row or limit data")
    try:
        curve = ex.pipeline_curve(obj, domain, J, num)
    except ex.PIPELINE_ERRORS as exc:
        log.error("pipeline failed: %s", exc)
        return EXIT_PIPELINE
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for fmt in _formats(args, ["csv"]):
        log.info("wrote %s", ex.emit(curve, fmt, out / f"density.{fmt}"))
    return EXIT_OK


TRANSFORM_KINDS = ("G", "F", "psi", "eta", "phi", "sigma")


def cmd_transform(args):
    cfg = _read_json(args.config)
    m = _measure(cfg.get("measure", {}))
    kind = cfg.get("kind")
    if kind not in TRANSFORM_KINDS:
        raise ex.ConfigError(f"kind must be one of {TRANSFORM_KINDS}")
    pts = [complex(*p) if isinstance(p, list) else complex(p) for p in cfg.get("points", [])]
    rows = []
    for z in pts:
        try:
            if kind == "phi":
                v = inv.phi(m, z)
            elif kind == "sigma":
                v = inv.sigma(m, z)
            else:
                v = complex(tr.evaluate(m, tr.Kind(kind), z))
        except (ArithmeticError, ValueError) as exc:
            log.error("%s at %s: %s", kind, z, exc)
            return EXIT_PIPELINE
        rows.append((z, v))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "transform.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("z_re", "z_im", "re", "im"))
        for z, v in rows:
            w.writerow([repr(z.real), repr(z.imag), repr(v.real), repr(v.imag)])
    log.info("wrote %s", path)
    return EXIT_OK


def selftest_checks():
    """Fast invariant checks: (name, passed, detail)."""
    from . import limits as L
    from . import mult_circle as mc
    from . import mult_halfline as mh
    from .measures import symmetric_bernoulli
    out = []
    k = symmetric_bernoulli(1 / np.sqrt(3))
    c = add.density_curve([k] * 3, np.array([0.0]))
    out.append(("kesten p(0)", abs(c.p[0] - np.sqrt(6) / (3 * np.pi)) < 1e-9, float(c.p[0])))
    f = add.boundary_f(L.semicircle_data(), 0.6)
    out.append(("semicircle f(0.6)", abs(f - 0.8) < 1e-10, f))
    b = symmetric_bernoulli(1.0)
    z = 3j
    ps = add.phi_sum([b, b], z)
    out.append(("linearization", abs(ps - (np.sqrt(z * z + 4) - z)) < 1e-10, abs(ps)))
    Q = inv.ContourRect((-0.5, 0.5), (2.0, 3.0))
    w = inv.contour_inverse(lambda s: s + 1 / s, Q, 2j, lambda s: 1 - 1 / s ** 2)
    out.append(("contour inverse", abs(w - (1 + np.sqrt(2)) * 1j) < 1e-10, w))
    d = L.ExpSigmaDataHalfline(1.0, [1.0], [0.25])
    mass, mean = mh.curve_moments(d, 128)
    out.append(("half-line mean", abs(mean - np.exp(0.25)) < 1e-6, mean))
    cd = L.HerglotzSigmaDataCircle(1.0, [0.0], [0.5])
    mass, m1 = mc.curve_moments(cd, 128)
    out.append(("circle mass", abs(mass - 1) < 1e-6, mass))
    return out


def cmd_selftest(args):
    failed = 0
    for name, ok, detail in selftest_checks():
        print(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")
        failed += not ok
    return EXIT_SELFTEST if failed else EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="freesuper", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn, need_cfg in (("density", cmd_density, True), ("superconv", cmd_superconv, True),
                               ("transform", cmd_transform, True), ("selftest", cmd_selftest, False)):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=need_cfg)
        sp.add_argument("--out", default=".")
        sp.add_argument("--format", action="append", choices=FORMATS)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--verbose", action="store_true")
        if name == "superconv":
            sp.add_argument("--no-figures", action="store_true", help="skip the PNG figures")
        sp.set_defaults(func=fn)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ex.ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
