"""Command-line entry point: ``quasitaub <command> ...``.

Every command resolves its arguments into an effective config, runs it and
emits a JSON report carrying ``schema_version`` and that config.  Feeding a
report (or its config) to ``quasitaub replay`` reproduces it byte for byte.

Exit status: 0 success, 2 negative mathematical verdict, 1 error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import calderon as C
from . import fields as F
from . import kernels as K
from . import tauber as T
from .applications import heat as H
from .applications import laplace as LP
from .errors import ConfigInvalid, QuasitaubError
from .slowvary import Site, SlowVarySpec
from .transform import ScaleGrid, compute_sheet

SCHEMA_VERSION = 1
EXIT_OK, EXIT_ERROR, EXIT_NEGATIVE = 0, 1, 2
DEFAULT_DIM = {"degenerate_demo": 2, "paper_mixed": 2}
FIELD_SHORTHANDS = ("delta", "heaviside", "constant", "log_heaviside", "abs:<a>", "plus:<a>")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigInvalid(message)


# -- helpers -------------------------------------------------------------------------------

def _cvec(v):
    return [[float(z.real), float(z.imag)] for z in np.atleast_1d(np.asarray(v, dtype=complex))]


def _field_from_arg(text, dim):
    """A field JSON path or a shorthand such as ``delta`` or ``abs:0.5``."""
    path = Path(text)
    if path.suffix == ".json" or path.exists():
        try:
            return F.from_dict(json.loads(path.read_text()))
        except (OSError, ValueError, KeyError) as exc:
            raise ConfigInvalid(f"cannot read field {text}: {exc}") from None
    name, _, arg = text.partition(":")
    name = name.lower()
    try:
        if name == "delta":
            return F.delta(dim)
        if name == "heaviside":
            return F.heaviside()
        if name == "constant":
            return F.constant(float(arg) if arg else 1.0, dim)
        if name == "log_heaviside":
            return F.log_heaviside()
        if name == "abs":
            return F.homogeneous_abs(float(arg), dim)
        if name == "plus":
            return F.homogeneous_plus(float(arg))
    except ValueError as exc:
        raise ConfigInvalid(str(exc)) from None
    raise ConfigInvalid(f"unknown field {text!r}; use a JSON file or one of {', '.join(FIELD_SHORTHANDS)}")


def _kernel(name, dim):
    try:
        return K.make_kernel(name, dim)
    except ValueError as exc:
        raise ConfigInvalid(str(exc)) from None


def _slow(cfg, site):
    if cfg.get("L") is None:
        return None
    d = dict(cfg["L"])
    d.setdefault("site", site)
    return SlowVarySpec.from_dict(d)


def _positive(name, value):
    if not value > 0:
        raise ConfigInvalid(f"{name} must be positive")
    return value


def _grid(cfg):
    n = cfg["n_lambda"]
    if n < 16:
        raise ConfigInvalid("n_lambda must be at least 16")
    try:
        return ScaleGrid.default(cfg["dim"], cfg["site"], n, _positive("ratio", cfg["ratio"]),
                                 _positive("lam0", cfg["lam0"]))
    except ValueError as exc:
        raise ConfigInvalid(str(exc)) from None


# -- commands ------------------------------------------------------------------------------

def cmd_kernel_check(cfg):
    k = _kernel(cfg["kernel"], cfg["dim"])
    nd = K.check_nondegenerate(k, _positive("tol", cfg["tol"]))
    strong = K.check_strongly_nondegenerate(k, cfg["N"], cfg["tol"])
    tt = K.taylor_terms(k, cfg["N"])
    moments = K.moments(k, cfg["N"])
    result = {
        "kernel": k.name,
        "nondegenerate": nd.verdict,
        "worst_ray": list(nd.worst_ray),
        "worst_max": nd.worst_max,
        "strongly_nondegenerate": strong.verdict,
        "witness_order": strong.witness_order,
        "lizorkin": K.is_lizorkin(k),
        "moments": [{"m": list(m), "value": _cvec(v)[0]} for m, v in sorted(moments.items())],
        "taylor_terms": tt.to_dict(),
    }
    return (EXIT_OK if nd.verdict else EXIT_NEGATIVE), result, None


def cmd_transform(cfg):
    f = F.from_dict(cfg["field"])
    k = _kernel(cfg["kernel"], f.dim)
    grid = _grid(cfg)
    sheet = compute_sheet(f, k, grid, cfg.get("method"))
    result = {"field": f.describe(), "kernel": k.name, "method": sheet.method.value,
              "grid": grid.to_dict(),
              "values": [[_cvec(v) for v in row] for row in sheet.values]}
    return EXIT_OK, result, list(sheet.csv_rows())


def cmd_scaling(cfg):
    f = F.from_dict(cfg["field"])
    k = _kernel(cfg["kernel"], f.dim)
    grid = _grid(cfg)
    if not K.check_nondegenerate(k).verdict:
        raise T.DegenerateKernel(f"{k.name} vanishes identically on some ray")
    sheet = compute_sheet(f, k, grid)
    rep = T.report_from_sheet(sheet, cfg.get("alpha"), _slow(cfg, cfg["site"]))
    result = rep.to_dict()
    truth = F.ground_truth(f, grid.site)
    if truth is not None:
        result["ground_truth"] = {"alpha": truth.alpha, "slow_vary": truth.slow_vary.to_dict()}
    q = T.normalized_norms(sheet, rep.alpha_hat, rep.slow_vary_hat)
    rows = [[d, *grid.directions[d].tolist(), float(lam), float(q[d, j])]
            for d in range(len(grid.directions)) for j, lam in enumerate(grid.lambdas)]
    code = EXIT_OK if rep.k_hat is not None else EXIT_NEGATIVE
    return code, result, rows


def cmd_calderon_verify(cfg):
    psi = _kernel(cfg["wavelet"], 1)
    box = C.CalderonBox(cfg["X"], cfg["dx"], cfg["y_min"], cfg["y_max"], cfg["per_octave"])
    rep = C.admissibility(psi, psi)
    eta = C.reconstruction_wavelet(psi)
    cross = C.admissibility(psi, eta)
    errs = {name: C.reconstruction_error(C.TEST_FUNCTIONS[name], psi, eta, box=box)
            for name in C.RECONSTRUCTION_SET}
    pair = {}
    cases = {"Delta": (F.delta(), "gauss_lizorkin"),
             "DeltaComb": (F.delta_comb([(0.0, 1.0), (1.0, -1.0)]), "gauss_lizorkin"),
             "Heaviside": (F.heaviside(), "derivative")}
    for label, (f, rname) in cases.items():
        rho = C.TEST_FUNCTIONS[rname]
        got = C.desingularized_pairing(f, rho, psi, eta, box)
        want = C.direct_pairing(f, rho)
        pair[label] = float(np.max(np.abs(got - want)) / np.max(np.abs(want)))
    result = {
        "c": [float(rep.c.real), float(rep.c.imag)] if rep.c is not None else None,
        "c_psi_psi": rep.to_dict(),
        "c_psi_eta": [float(cross.c.real), float(cross.c.imag)] if cross.c is not None else None,
        "is_constant": rep.is_constant,
        "reconstruction_wavelet": eta.name,
        "reconstruction_rel_err": errs,
        "reconstruction_max_rel_err": max(errs.values()),
        "pairing_rel_err": pair,
    }
    return EXIT_OK, result, None


def cmd_heat(cfg):
    f = _field_from_arg(cfg["init"], cfg["dim"]) if isinstance(cfg["init"], str) else F.from_dict(cfg["init"])
    tmax = _positive("tmax", cfg["tmax"])
    t_grid = np.logspace(0, np.log10(tmax), cfg["n_t"])
    prob = H.CauchyProblem(cfg["dim"], f, cfg["symbol"], t_grid)
    alpha = cfg["alpha"]
    if alpha is None:
        truth = F.ground_truth(f, Site.INFINITY)
        if truth is None:
            raise ConfigInvalid("pass --alpha: the initial datum has no catalogued degree")
        alpha = truth.alpha
    L = _slow(cfg, "infinity")
    stab = H.check_d_curve_stabilization(prob, alpha, L)
    result = {"problem": prob.to_dict(), "alpha": alpha, "d_curves": stab.to_dict()}
    if not stab.stabilizes:
        result["time"] = None
        return EXIT_NEGATIVE, result, None
    xs = np.linspace(-cfg["x_max"], cfg["x_max"], cfg["n_x"])
    result["time"] = H.time_stabilization(prob, alpha, L, xs).to_dict()
    return EXIT_OK, result, None


def cmd_littlewood(cfg):
    if cfg.get("series"):
        series = LP.read_series_csv(cfg["series"], cfg["tail"], cfg["tail_constant"])
    else:
        if cfg["builtin"] not in LP.BUILTINS:
            raise ConfigInvalid(f"unknown builtin {cfg['builtin']!r}; choose from {', '.join(LP.BUILTINS)}")
        series = LP.builtin_series(cfg["builtin"], cfg["N"])
    rep = LP.littlewood_analyze(series)
    result = {"series": series.to_dict(), **rep.to_dict()}
    if rep.counterexample:
        return EXIT_ERROR, result, None
    return (EXIT_OK if rep.verdict.startswith("convergent") else EXIT_NEGATIVE), result, None


COMMANDS = {
    "kernel check": cmd_kernel_check,
    "transform": cmd_transform,
    "scaling": cmd_scaling,
    "calderon verify": cmd_calderon_verify,
    "heat": cmd_heat,
    "littlewood": cmd_littlewood,
}


# -- argument handling ---------------------------------------------------------------------------

def _add_output(p, csv_too=False):
    p.add_argument("--json", nargs="?", const="-", default="-", metavar="PATH",
                   help="write the JSON report here (default: stdout)")
    if csv_too:
        p.add_argument("--csv", metavar="PATH", help="write plot-ready CSV diagnostics")


def _add_grid(p):
    p.add_argument("--site", choices=["origin", "infinity"], default="infinity")
    p.add_argument("--n-lambda", type=int, default=64)
    p.add_argument("--ratio", type=float, default=2 ** 0.25)
    p.add_argument("--lam0", type=float, default=1.0)


def _add_slow(p):
    p.add_argument("--alpha", type=float, default=None, help="fix the degree instead of estimating it")
    p.add_argument("--L", dest="L", default=None, metavar="FAMILY[:b]",
                   help="fix L: One, LogPow:<b> or LogLogPow:<b>")


def build_parser():
    p = _Parser(prog="quasitaub", description="Regularizing transforms and Tauberian scaling estimates.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    kp = sub.add_parser("kernel", help="kernel diagnostics")
    ksub = kp.add_subparsers(dest="action", required=True, parser_class=_Parser)
    kc = ksub.add_parser("check", help="non-degeneracy and strong non-degeneracy")
    kc.add_argument("kernel")
    kc.add_argument("--dim", type=int, default=None)
    kc.add_argument("--tol", type=float, default=1e-9)
    kc.add_argument("--N", type=int, default=K.N_MAX)
    _add_output(kc)

    tp = sub.add_parser("transform", help="transform sheet over a scale grid")
    tp.add_argument("--field", required=True, help="field JSON file or shorthand (delta, abs:0.5, ...)")
    tp.add_argument("--kernel", default="gaussian")
    tp.add_argument("--dim", type=int, default=1)
    tp.add_argument("--method", choices=["ClosedForm", "Quadrature", "FFT"], default=None)
    _add_grid(tp)
    _add_output(tp, csv_too=True)

    sp = sub.add_parser("scaling", help="estimate alpha, L, k and the limits")
    sp.add_argument("--field", required=True, help="field JSON file or shorthand (delta, abs:0.5, ...)")
    sp.add_argument("--kernel", default="gaussian")
    sp.add_argument("--dim", type=int, default=1)
    _add_grid(sp)
    _add_slow(sp)
    _add_output(sp, csv_too=True)

    cp = sub.add_parser("calderon", help="Calderon identities")
    csub = cp.add_subparsers(dest="action", required=True, parser_class=_Parser)
    cv = csub.add_parser("verify", help="admissibility, reconstruction and desingularized pairings")
    cv.add_argument("--wavelet", default="paper_lizorkin")
    cv.add_argument("--X", type=float, default=16.0)
    cv.add_argument("--dx", type=float, default=1 / 32)
    cv.add_argument("--y-min", type=float, default=2.0 ** -8)
    cv.add_argument("--y-max", type=float, default=2.0 ** 8)
    cv.add_argument("--per-octave", type=int, default=16)
    _add_output(cv)

    hp = sub.add_parser("heat", help="stabilization of a heat-type Cauchy problem")
    hp.add_argument("--init", required=True, help="initial datum: field JSON file or shorthand")
    hp.add_argument("--dim", type=int, default=1)
    hp.add_argument("--symbol", choices=sorted(H.SYMBOLS), default="heat")
    hp.add_argument("--tmax", type=float, default=1e6)
    hp.add_argument("--n-t", type=int, default=25)
    hp.add_argument("--x-max", type=float, default=5.0)
    hp.add_argument("--n-x", type=int, default=41)
    _add_slow(hp)
    _add_output(hp)

    lp = sub.add_parser("littlewood", help="Abel summability and Littlewood's theorem")
    src = lp.add_mutually_exclusive_group(required=True)
    src.add_argument("--series", help="CSV with columns n, re[, im]")
    src.add_argument("--builtin", help=f"one of {', '.join(LP.BUILTINS)}")
    lp.add_argument("--N", type=int, default=LP.DEFAULT_N, help="prefix length for builtins")
    lp.add_argument("--tail", choices=["none", "OInvN"], default="none")
    lp.add_argument("--tail-constant", type=float, default=0.0)
    _add_output(lp)

    rp = sub.add_parser("replay", help="rerun a report's effective config")
    rp.add_argument("config", help="JSON report or config file")
    _add_output(rp, csv_too=True)
    return p


def _parse_L(text):
    if text is None:
        return None
    fam, _, b = text.partition(":")
    try:
        return SlowVarySpec(fam, float(b) if b else 0.0).to_dict()
    except ValueError:
        raise ConfigInvalid(f"bad slowly varying spec {text!r}") from None


def config_from_args(args):
    """Effective config: every input that affects the result, and nothing else."""
    cmd = args.command
    if cmd == "kernel":
        dim = args.dim or DEFAULT_DIM.get(args.kernel.lower(), 1)
        return {"command": "kernel check", "kernel": args.kernel, "dim": dim, "tol": args.tol, "N": args.N}
    if cmd in ("transform", "scaling"):
        f = _field_from_arg(args.field, args.dim)
        cfg = {"command": cmd, "field": F.to_dict(f), "kernel": args.kernel, "dim": f.dim, "site": args.site,
               "n_lambda": args.n_lambda, "ratio": args.ratio, "lam0": args.lam0}
        if cmd == "transform":
            cfg["method"] = args.method
        else:
            cfg["alpha"] = args.alpha
            cfg["L"] = _parse_L(args.L)
        return cfg
    if cmd == "calderon":
        return {"command": "calderon verify", "wavelet": args.wavelet, "X": args.X, "dx": args.dx,
                "y_min": args.y_min, "y_max": args.y_max, "per_octave": args.per_octave}
    if cmd == "heat":
        f = _field_from_arg(args.init, args.dim)
        return {"command": "heat", "init": F.to_dict(f), "dim": args.dim, "symbol": args.symbol,
                "tmax": args.tmax, "n_t": args.n_t, "x_max": args.x_max, "n_x": args.n_x,
                "alpha": args.alpha, "L": _parse_L(args.L)}
    if cmd == "littlewood":
        return {"command": "littlewood", "series": args.series, "builtin": args.builtin, "N": args.N,
                "tail": args.tail, "tail_constant": args.tail_constant}
    raise ConfigInvalid(f"unknown command {cmd!r}")


def run(config):
    """Execute an effective config; returns (exit status, report dict, csv rows or None)."""
    name = config.get("command")
    if name not in COMMANDS:
        raise ConfigInvalid(f"unknown command {name!r}")
    code, result, rows = COMMANDS[name](config)
    status = {EXIT_OK: "ok", EXIT_NEGATIVE: "negative", EXIT_ERROR: "failed"}[code]
    report = {"schema_version": SCHEMA_VERSION, "command": name, "status": status,
              "config": config, "result": result}
    return code, report, rows


def dumps(report):
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=True) + "\n"


def _emit(report, path):
    text = dumps(report)
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _write_csv(rows, path):
    with open(path, "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)


def _check_threads():
    raw = os.environ.get("QUASITAUB_THREADS")
    if raw is None:
        return
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise ConfigInvalid("QUASITAUB_THREADS must be a positive integer")


def main(argv=None):
    out = "-"
    try:
        _check_threads()
        args = build_parser().parse_args(argv)
        out = args.json
        if args.command == "replay":
            data = json.loads(Path(args.config).read_text())
            config = data.get("config", data)
        else:
            config = config_from_args(args)
        code, report, rows = run(config)
        _emit(report, out)
        if rows is not None and getattr(args, "csv", None):
            _write_csv(rows, args.csv)
        return code
    except (QuasitaubError, OSError, json.JSONDecodeError) as exc:
        err = exc.to_dict() if isinstance(exc, QuasitaubError) else {"type": type(exc).__name__,
                                                                     "message": str(exc)}
        _emit({"schema_version": SCHEMA_VERSION, "status": "error", "error": err}, out)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
