"""Batch harness: geometry, phase, zeros, asym and converge subcommands.

Every run is driven by a serializable config (CLI flags, optionally seeded
from a JSON file via --config, with JRH_* environment variables overriding
flag defaults) and owns its output directory through a lockfile.  Outputs
are deterministic: identical configs produce byte-identical files.

Exit codes: 0 success, 2 validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
from gmpy2 import mpq
from mpmath import mp, mpc, mpf

from .asymptotics import LocalFrame, local_eval, outer_eval
from .errors import (
    ExactInteger,
    IntegerResonance,
    NearBranchPoint,
    ParameterError,
    VarJacobiError,
)
from .geometry import ArcKind, Geometry
from .params import ParameterPair
from .phase import Phase
from .reference import build_jacobi, eval_poly, find_zeros
from .svgout import svg_figure
from .zerodist import compare_zeros, predict_attractor, rate_exponents

ENV_PREFIX = "JRH_"

_DEFAULTS = {
    "A": None,
    "B": None,
    "n": None,
    "alpha": None,
    "beta": None,
    "prec_bits": 192,
    "tol": 1e-9,
    "out": None,
    "levels": "",
    "seed": 0,
    "points": "",
    "ns": "40,80,160",
    "re": None,
    "im": None,
}


def _env(name, fallback):
    return os.environ.get(ENV_PREFIX + name.upper(), fallback)


def _parse_rational(s) -> mpq:
    f = Fraction(str(s))
    return mpq(f.numerator, f.denominator)


def _param_pair(cfg) -> ParameterPair:
    if cfg.get("A") is None or cfg.get("B") is None:
        raise ParameterError("this command needs --A and --B")
    with mp.workprec(int(cfg["prec_bits"])):
        return ParameterPair(mpf(str(cfg["A"])), mpf(str(cfg["B"])))


def _write(path: Path, text: str):
    with open(path, "w", newline="") as fh:
        fh.write(text)


class _OutputDir:
    """Owns an output directory through a lockfile for the run's duration."""

    def __init__(self, out):
        if not out:
            raise ParameterError("this command needs --out")
        self.path = Path(out)
        self.path.mkdir(parents=True, exist_ok=True)
        self.lock = self.path / ".lock"

    def __enter__(self):
        try:
            fd = os.open(self.lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise ParameterError(
                f"output directory {self.path} is locked by another run"
            ) from None
        os.close(fd)
        return self.path

    def __exit__(self, *exc):
        try:
            os.unlink(self.lock)
        except FileNotFoundError:
            pass
        return False


def _config_json(cfg) -> str:
    return json.dumps({k: cfg[k] for k in sorted(cfg)}, indent=1, sort_keys=True)


def load_config(text: str) -> dict:
    """Parse a config JSON back into the canonical dict (round-trip safe)."""
    raw = json.loads(text)
    cfg = dict(_DEFAULTS)
    cfg.update(raw)
    cfg["command"] = raw.get("command")
    return cfg


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_geometry(cfg) -> int:
    params = _param_pair(cfg)
    geom = Geometry(params, tol=float(cfg["tol"]), prec=int(cfg["prec_bits"]))
    levels = [float(s) for s in str(cfg["levels"]).split(",") if s.strip()]
    level_arcs = []
    for r in levels:
        level_arcs.extend(geom.trace_level_set(r))
    arcs = [geom.arcs[k] for k in geom.arcs] + level_arcs
    with _OutputDir(cfg["out"]) as out:
        _write(out / "arcs.csv", geom.export_csv(arcs))
        _write(out / "arcs.json", geom.export_json(arcs))
        polys = [(a.label(), a.floats) for a in arcs]
        _write(out / "geometry.svg", svg_figure(polys, []))
        _write(out / "config.json", _config_json(cfg))
    return 0


def cmd_phase(cfg) -> int:
    params = _param_pair(cfg)
    if cfg.get("re") is None or cfg.get("im") is None:
        raise ParameterError("phase eval needs --re and --im")
    tol = float(cfg["tol"])
    geom = Geometry(params, prec=int(cfg["prec_bits"]))
    phase = Phase(geom, tol=min(tol, 1e-20))
    with mp.workprec(phase.prec):
        z = mpc(mpf(str(cfg["re"])), mpf(str(cfg["im"])))
        v = phase.phi(z, tol=tol)
        digits = mp.dps
        payload = {
            "re": str(cfg["re"]),
            "im": str(cfg["im"]),
            "phi_re": mp.nstr(v.phi.real, digits),
            "phi_im": mp.nstr(v.phi.imag, digits),
            "error_bound": mp.nstr(v.quad_error_bound, 6),
        }
    print(json.dumps(payload, indent=1, sort_keys=True))
    if cfg.get("out"):
        with _OutputDir(cfg["out"]) as out:
            _write(out / "phase.json", json.dumps(payload, indent=1, sort_keys=True))
            _write(out / "config.json", _config_json(cfg))
    return 0


def cmd_zeros(cfg) -> int:
    if cfg.get("n") is None or cfg.get("alpha") is None or cfg.get("beta") is None:
        raise ParameterError("zeros needs --n, --alpha, --beta")
    n = int(cfg["n"])
    alpha = _parse_rational(cfg["alpha"])
    beta = _parse_rational(cfg["beta"])
    prec = int(cfg["prec_bits"])
    with mp.workprec(prec):
        if cfg.get("A") is not None:
            params = _param_pair(cfg)
        else:
            params = ParameterPair(
                mpf(alpha.numerator) / mpf(alpha.denominator) / n,
                mpf(beta.numerator) / mpf(beta.denominator) / n,
            )
    geom = Geometry(params, tol=float(cfg["tol"]))
    try:
        exps = rate_exponents(alpha, beta, n)
    except ExactInteger as exc:
        raise ExactInteger(
            f"{exc}; an exactly-integer parameter pins zeros at +-1 or drops "
            "the degree (classical factorization cases)"
        ) from exc
    pred = predict_attractor(exps, params, geom)
    poly = build_jacobi(n, alpha, beta).to_monic()
    zs = find_zeros(poly, prec=max(prec, 256), seed=int(cfg["seed"]))
    report = compare_zeros(zs, pred)
    with _OutputDir(cfg["out"]) as out:
        _write(out / "zeros.csv", zs.export_csv())
        payload = json.loads(report.to_json())
        payload.update(
            {
                "case": pred.case.value,
                "level": pred.r,
                "rate_exponents": [
                    float(exps.r_alpha), float(exps.r_beta), float(exps.r_alphabeta)
                ],
                "arcs": [a.label() for a in pred.arcs],
            }
        )
        _write(out / "report.json", json.dumps(payload, indent=1, sort_keys=True))
        _write(out / "report.txt", report.to_table() + "\n")
        polys = [(a.label(), a.floats) for a in pred.arcs]
        zpts = np.array([complex(float(z.real), float(z.imag)) for z in zs.zeros])
        _write(out / "zeros.svg", svg_figure(polys, [("zeros", zpts)]))
        _write(out / "config.json", _config_json(cfg))
    return 0


def _asym_rows(cfg, compare: bool):
    params = _param_pair(cfg)
    if cfg.get("n") is None:
        raise ParameterError("asym needs --n")
    n = int(cfg["n"])
    pts = []
    if cfg.get("points"):
        for chunk in str(cfg["points"]).split(";"):
            re_s, im_s = chunk.split(",")
            pts.append((re_s.strip(), im_s.strip()))
    elif cfg.get("re") is not None and cfg.get("im") is not None:
        pts.append((str(cfg["re"]), str(cfg["im"])))
    else:
        raise ParameterError("asym needs --points or --re/--im")
    geom = Geometry(params, tol=float(cfg["tol"]))
    phase = Phase(geom)
    frame = LocalFrame(geom, phase)
    if compare:
        alpha = (
            _parse_rational(cfg["alpha"])
            if cfg.get("alpha") is not None
            else _parse_rational(cfg["A"]) * n
        )
        beta = (
            _parse_rational(cfg["beta"])
            if cfg.get("beta") is not None
            else _parse_rational(cfg["B"]) * n
        )
        poly = build_jacobi(n, alpha, beta).to_monic()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["re", "im", "mode", "domain", "asym_re", "asym_im", "abs_n11_term",
              "abs_n12_term"]
    if compare:
        header += ["exact_re", "exact_im", "rel_err"]
    w.writerow(header)
    with mp.workprec(phase.prec):
        for re_s, im_s in pts:
            z = mpc(mpf(re_s), mpf(im_s))
            try:
                val, label, terms = outer_eval(z, n, params, geom, phase)
                mode = "outer"
                dom = label.domain.name
                t1 = abs(terms.exp_plus * terms.n11)
                t2 = abs(terms.exp_minus * terms.n12)
            except NearBranchPoint:
                val = local_eval(z, n, params, geom, phase, frame)
                mode = "local"
                dom = "-"
                t1 = t2 = mpf(0)
            digits = 17
            row = [re_s, im_s, mode, dom,
                   mp.nstr(val.real, digits), mp.nstr(val.imag, digits),
                   mp.nstr(t1, 8), mp.nstr(t2, 8)]
            if compare:
                exact, _ = eval_poly(poly, z, prec=phase.prec + 10 * n // 4)
                rel = abs(val - exact) / abs(exact)
                row += [mp.nstr(exact.real, digits), mp.nstr(exact.imag, digits),
                        mp.nstr(rel, 6)]
            w.writerow(row)
    return buf.getvalue()


def cmd_asym(cfg) -> int:
    text = _asym_rows(cfg, compare=cfg["action"] == "compare")
    if cfg.get("out"):
        with _OutputDir(cfg["out"]) as out:
            _write(out / "asym.csv", text)
            _write(out / "config.json", _config_json(cfg))
    else:
        sys.stdout.write(text)
    return 0


def _converge_grid(geom: Geometry, frame_delta) -> list:
    """One representative per domain, away from the branch points."""
    found = {}
    xs = np.linspace(float(geom.xi_left) - 2.0, float(geom.xi_right) + 2.0, 61)
    excl = 1.15 * float(frame_delta)
    zp = complex(float(geom.bp.zeta_plus.real), float(geom.bp.zeta_plus.imag))
    for y in (0.4, -0.4, 1.1, -1.1, 0.15, -0.15):
        for x in xs:
            z = complex(x, y)
            if abs(z - zp) < excl or abs(z - zp.conjugate()) < excl:
                continue
            lab = geom.classify_point(z)
            if lab.on_boundary:
                continue
            if min(a.distance(z) for a in geom.arcs.values()) < 0.25:
                continue
            found.setdefault(lab.domain.name, z)
        if len(found) == 6:
            break
    return sorted(found.items())


def cmd_converge(cfg) -> int:
    params = _param_pair(cfg)
    ns = [int(s) for s in str(cfg["ns"]).split(",") if s.strip()]
    geom = Geometry(params, tol=float(cfg["tol"]))
    phase = Phase(geom)
    frame = LocalFrame(geom, phase)
    a_rat = _parse_rational(cfg["A"])
    b_rat = _parse_rational(cfg["B"])
    grid = _converge_grid(geom, frame.delta)
    locals_ = [
        ("local-1", geom.bp.zeta_minus + frame.delta / 2 * mp.expjpi(mpf("0.3"))),
        ("local-2", geom.bp.zeta_minus + frame.delta / 2 * mp.expjpi(mpf("-0.1"))),
    ]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["point", "re", "im", "mode", "n", "rel_err", "observed_order", "note"])
    with mp.workprec(phase.prec):
        for name, z in [(d, mpc(p)) for d, p in grid] + locals_:
            errs = []
            for n in ns:
                try:
                    alpha = a_rat * n
                    beta = b_rat * n
                    poly = build_jacobi(n, alpha, beta).to_monic()
                    exact, _ = eval_poly(poly, z, prec=phase.prec + 6 * n)
                    if name.startswith("local"):
                        approx = local_eval(z, n, params, geom, phase, frame)
                        mode = "local"
                    else:
                        approx, _, _ = outer_eval(
                            z, n, params, geom, phase, exclusion=frame.delta
                        )
                        mode = "outer"
                    rel = abs(approx - exact) / abs(exact)
                    order = ""
                    if errs and errs[-1][1] > 0:
                        order = "%.3f" % (
                            float(mp.log(errs[-1][1] / rel, 2))
                            / float(mp.log(mpf(n) / errs[-1][0], 2))
                        )
                    errs.append((n, rel))
                    w.writerow(
                        [name, mp.nstr(z.real, 12), mp.nstr(z.imag, 12), mode, n,
                         mp.nstr(rel, 6), order, ""]
                    )
                except IntegerResonance:
                    w.writerow(
                        [name, mp.nstr(z.real, 12), mp.nstr(z.imag, 12), "-", n,
                         "", "", "skipped: (A+B)n within 1e-12 of an integer"]
                    )
    with _OutputDir(cfg["out"]) as out:
        _write(out / "converge.csv", buf.getvalue())
        _write(out / "config.json", _config_json(cfg))
    return 0


# ---------------------------------------------------------------------------
# parsing and entry point
# ---------------------------------------------------------------------------


def _add_common(sp):
    sp.add_argument("--A", default=_env("A", None))
    sp.add_argument("--B", default=_env("B", None))
    sp.add_argument("--n", default=_env("N", None))
    sp.add_argument("--alpha", default=_env("ALPHA", None))
    sp.add_argument("--beta", default=_env("BETA", None))
    sp.add_argument("--prec-bits", dest="prec_bits",
                    default=_env("PREC_BITS", _DEFAULTS["prec_bits"]), type=int)
    sp.add_argument("--tol", default=_env("TOL", _DEFAULTS["tol"]), type=float)
    sp.add_argument("--out", default=_env("OUT", None))
    sp.add_argument("--levels", default=_env("LEVELS", ""))
    sp.add_argument("--seed", default=_env("SEED", 0), type=int)
    sp.add_argument("--config", default=None, help="JSON config file with defaults")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="varjacobi",
        description="Trajectory geometry, phase, exact zeros and asymptotics "
        "for Jacobi polynomials with varying negative parameters",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("geometry", help="trace arcs and level sets, emit CSV/JSON/SVG")
    _add_common(g)

    p = sub.add_parser("phase", help="evaluate the phase function")
    p.add_argument("action", choices=["eval"])
    p.add_argument("--re", required=False)
    p.add_argument("--im", required=False)
    _add_common(p)

    z = sub.add_parser("zeros", help="exact zeros, attractor prediction, report")
    _add_common(z)

    a = sub.add_parser("asym", help="asymptotic evaluation (optionally vs exact)")
    a.add_argument("action", choices=["eval", "compare"])
    a.add_argument("--re", required=False)
    a.add_argument("--im", required=False)
    a.add_argument("--points", default=_env("POINTS", ""))
    _add_common(a)

    c = sub.add_parser("converge", help="convergence table across the domains")
    c.add_argument("--ns", default=_env("NS", _DEFAULTS["ns"]))
    _add_common(c)
    return ap


_COMMANDS = {
    "geometry": cmd_geometry,
    "phase": cmd_phase,
    "zeros": cmd_zeros,
    "asym": cmd_asym,
    "converge": cmd_converge,
}


def main(argv=None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    cfg = dict(_DEFAULTS)
    if getattr(ns, "config", None):
        cfg.update(load_config(Path(ns.config).read_text()))
    for key, val in vars(ns).items():
        if key == "config":
            continue
        if val is not None and (val != "" or key not in cfg):
            cfg[key] = val
    cfg["command"] = ns.command
    if getattr(ns, "action", None):
        cfg["action"] = ns.action
    try:
        return _COMMANDS[ns.command](cfg)
    except (ParameterError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except VarJacobiError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
