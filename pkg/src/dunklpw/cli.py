"""Command-line experiment runner.

Every subcommand writes its data files plus ``summary.json`` into
``--out``.  ``run <config.json>`` executes a list of experiments from a
JSON config; command-line flags override config fields.  Exit status is
0 when every experiment passes, 1 when one fails, 2 on a configuration
error (in which case nothing is written).
"""

import argparse
import hashlib
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from . import analysis as an
from . import funcrep, kernel, quadrature, transform as tr
from .errors import ConfigError, DunklError, InstabilityError

EXPERIMENTS = ("kernel-check", "identities", "bang", "support", "certify-pw", "roundtrip")
IDENTITY_TOL = 1e-6
ROUNDTRIP_TOL = 1e-8
BANG_BAND = (0.85, 1.05)


def defaults():
    """Numerical defaults, echoed into every report."""
    return {
        "kernel_tol": kernel.DEFAULT_TOL,
        "quadrature_orders": list(quadrature.ORDERS),
        "origin_panel": quadrature.DELTA,
        "max_refine": quadrature.MAX_REFINE,
        "transform_tol": tr.QUAD_TOL,
        "norm_tol": tr.NORM_TOL,
        "window_factor": tr.WINDOW_FACTOR,
        "trim_tol": funcrep.TRIM_TOL,
        "trim_budget": funcrep.TRIM_BUDGET,
        "sup_grid": funcrep.SUP_GRID,
        "support_eps": an.SUPPORT_EPS,
        "bump_rho": 0.9,
        "direct_cap": an.DIRECT_CAP,
        "condition_limit": an.COND_LIMIT,
        "bang_band": list(BANG_BAND),
    }


# --- config --------------------------------------------------------------


def _parse_p(p):
    if isinstance(p, str) and p.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        v = float(p)
    except (TypeError, ValueError):
        raise ConfigError(f"bad p {p!r}") from None
    if not (v >= 1):
        raise ConfigError(f"p must be >= 1 or inf, got {p!r}")
    return v


def _parse_k(k):
    try:
        return kernel.Multiplicity.of(k)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad multiplicity {k!r}: {exc}") from None


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def _positive(name, v):
    try:
        v = float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number, got {v!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise ConfigError(f"{name} must be positive and finite, got {v!r}")
    return v


def _k_json(k):
    return {"re": k.re, "im": k.im}


def validate(exp):
    """Normalise one experiment entry; raises ConfigError."""
    if not isinstance(exp, dict):
        raise ConfigError("each experiment must be a JSON object")
    tag = exp.get("experiment")
    if tag not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {tag!r}; choose from {', '.join(EXPERIMENTS)}")
    known = {"experiment", "k", "p", "R", "n_max", "grids", "tolerances", "seed", "lam", "z",
             "method", "source", "n", "tau_max", "sigma_max", "eps", "lam_max"}
    extra = set(exp) - known
    if extra:
        raise ConfigError(f"unknown field(s) {sorted(extra)} in {tag} experiment")
    out = {"experiment": tag}
    out["k"] = [_parse_k(k) for k in _as_list(exp.get("k", 0))]
    out["p"] = [_parse_p(p) for p in _as_list(exp.get("p", "inf"))]
    out["R"] = [_positive("R", r) for r in _as_list(exp.get("R", 1.0))]
    n_max = exp.get("n_max", 64)
    if not isinstance(n_max, int) or isinstance(n_max, bool) or n_max < 1:
        raise ConfigError(f"n_max must be a positive integer, got {n_max!r}")
    out["n_max"] = n_max
    seed = exp.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError(f"seed must be an integer, got {seed!r}")
    out["seed"] = seed
    tols = exp.get("tolerances", {})
    if not isinstance(tols, dict):
        raise ConfigError("tolerances must be an object")
    out["tolerances"] = {name: _positive(f"tolerance {name}", v) for name, v in sorted(tols.items())}
    grids = exp.get("grids", {})
    if not isinstance(grids, dict):
        raise ConfigError("grids must be an object")
    out["grids"] = dict(sorted(grids.items()))
    if "grid" in grids:
        g = grids["grid"]
        if not (isinstance(g, list) and len(g) == 2 and all(isinstance(v, int) and v >= 2 for v in g)):
            raise ConfigError("grids.grid must be two integers >= 2")
    out["lam"] = [complex(v) if isinstance(v, str) else v for v in _as_list(exp.get("lam", 1.0))]
    out["z"] = [complex(v) if isinstance(v, str) else v for v in _as_list(exp.get("z", 1.0))]
    out["method"] = exp.get("method", "spectral")
    if out["method"] not in ("spectral", "direct"):
        raise ConfigError(f"method must be spectral or direct, got {out['method']!r}")
    if out["method"] == "direct" and n_max > an.DIRECT_CAP:
        raise ConfigError(f"the direct method is capped at n_max = {an.DIRECT_CAP}")
    out["source"] = exp.get("source", "bandlimited")
    if out["source"] not in ("bandlimited", "gaussian"):
        raise ConfigError(f"source must be bandlimited or gaussian, got {out['source']!r}")
    ns = _as_list(exp.get("n", [0, 2, 4]))
    if not all(isinstance(v, int) and v >= 0 for v in ns):
        raise ConfigError("n must be nonnegative integers")
    out["n"] = ns
    out["tau_max"] = float(exp.get("tau_max", 3.0))
    out["sigma_max"] = _positive("sigma_max", exp.get("sigma_max", 20.0))
    if out["tau_max"] < 0:
        raise ConfigError("tau_max must be >= 0")
    out["eps"] = _positive("eps", exp.get("eps", an.SUPPORT_EPS))
    lam_max = exp.get("lam_max")
    out["lam_max"] = None if lam_max is None else _positive("lam_max", lam_max)
    for v in out["lam"] + out["z"]:
        try:
            complex(v)
        except (TypeError, ValueError):
            raise ConfigError(f"bad complex value {v!r}") from None
    return out


def _jsonable(exp):
    d = dict(exp)
    d["k"] = [str(k) for k in exp["k"]]
    d["p"] = ["inf" if math.isinf(p) else p for p in exp["p"]]
    d["lam"] = [repr(complex(v)) for v in exp["lam"]]
    d["z"] = [repr(complex(v)) for v in exp["z"]]
    return d


def config_hash(exps):
    blob = json.dumps([_jsonable(e) for e in exps], sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def load_config(path, overrides):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if isinstance(raw, dict) and "experiments" in raw:
        base = {key: v for key, v in raw.items() if key not in ("experiments", "out")}
        items = raw["experiments"]
        if not isinstance(items, list) or not items:
            raise ConfigError("experiments must be a non-empty list")
        items = [{**base, **it} if isinstance(it, dict) else it for it in items]
        out = raw.get("out")
    elif isinstance(raw, dict):
        items = [{key: v for key, v in raw.items() if key != "out"}]
        out = raw.get("out")
    else:
        raise ConfigError("config must be a JSON object")
    items = [{**it, **overrides} if isinstance(it, dict) else it for it in items]
    return [validate(it) for it in items], out


# --- experiments ---------------------------------------------------------


def _fmt(x):
    return "inf" if x is an.INF or (isinstance(x, float) and math.isinf(x)) else x


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _tag_k(k):
    return str(k).replace("+", "p").replace("-", "m")


def _tag_p(p):
    return "inf" if math.isinf(p) else f"{p:g}"


def run_kernel_check(exp, out):
    rows = []
    for k in exp["k"]:
        for lam in exp["lam"]:
            for z in exp["z"]:
                v = kernel.kernel_eval(k, complex(lam), complex(z),
                                       tol=exp["tolerances"].get("kernel", kernel.DEFAULT_TOL))
                rows.append({"k": _k_json(k), "lambda": repr(complex(lam)), "z": repr(complex(z)),
                             "value": [v.value.real, v.value.imag], "order": v.order,
                             "tail_bound": v.tail_bound, "method": v.method})
    _write_json(os.path.join(out, "kernel_check.json"), rows)
    return True, max(r["tail_bound"] for r in rows), rows


def run_identities(exp, out):
    tol = exp["tolerances"].get("identity", IDENTITY_TOL)
    worst = 0.0
    reports = []
    for k in exp["k"]:
        rep = an.identity_suite(k, seed=exp["seed"])
        _write_json(os.path.join(out, f"identities_k{_tag_k(k)}.json"), rep)
        worst = max(worst, *rep.values())
        reports.append({"k": _k_json(k), "defects": rep})
    return worst <= tol, worst, reports


def _source(exp, k, R):
    if exp["source"] == "gaussian":
        return funcrep.Gaussian(1.0)
    return an.band_limited_synthesize_cached(k, R)


def run_bang(exp, out):
    ok = True
    worst = 0.0
    results = []
    lo, hi = BANG_BAND
    for k in exp["k"]:
        for R in exp["R"]:
            src = _source(exp, k, R)
            for p in exp["p"]:
                name = f"bang_k{_tag_k(k)}_R{R:g}_p{_tag_p(p)}_{exp['method']}.csv"
                try:
                    seq = an.bang_sequence(k, src, p, exp["n_max"], method=exp["method"])
                except InstabilityError as err:
                    if err.partial is not None:
                        err.partial.to_csv(os.path.join(out, name))
                    results.append({"k": _k_json(k), "R": R, "p": _fmt(p), "error": str(err)})
                    ok = False
                    continue
                seq.to_csv(os.path.join(out, name))
                a_last = seq.entries[-1][2]
                entry = {"k": _k_json(k), "R": R, "p": _fmt(p), "file": name, "a_last": a_last,
                         "richardson": {str(n): v for n, v in seq.richardson().items()}}
                if exp["source"] == "bandlimited" and exp["n_max"] >= 64:
                    dev = a_last / R
                    entry["within_band"] = lo <= dev <= hi
                    ok &= entry["within_band"]
                    worst = max(worst, abs(dev - 1))
                results.append(entry)
    return ok, worst, results


def run_support(exp, out):
    results = []
    ok = True
    for k in exp["k"]:
        for R in exp["R"]:
            if exp["source"] == "gaussian":
                est = an.support_radius(k, funcrep.Gaussian(1.0), eps=exp["eps"],
                                        lam_max=exp["lam_max"] or 12.0)
            else:
                est = an.support_radius(k, _source(exp, k, R), eps=exp["eps"], lam_max=exp["lam_max"])
                ok &= (not est.unbounded) and 0.95 * R <= est.radius <= 1.02 * R
            results.append({"k": _k_json(k), "R": R, **est.to_dict()})
    _write_json(os.path.join(out, "support.json"), results)
    worst = max((abs(r["radius"] / r["R"] - 1) for r in results if r["radius"] != "inf"), default=0.0)
    return ok, worst, results


def run_certify(exp, out):
    results = []
    ok = True
    grid = tuple(exp["grids"].get("grid", (41, 13)))
    tol = exp["tolerances"].get("stability", 0.01)
    worst = 0.0
    for k in exp["k"]:
        for R in exp["R"]:
            f = funcrep.Bump(1.0, 0.5)
            certs = an.growth_certify(k, f, R, n=exp["n"], tau_max=exp["tau_max"],
                                      sigma_max=exp["sigma_max"], grid=grid, tol=tol)
            for c in certs:
                name = f"certificate_k{_tag_k(k)}_R{R:g}_n{c.n}.json"
                _write_json(os.path.join(out, name), c.to_dict())
                ok &= c.valid
                worst = max(worst, c.stability)
                results.append({"k": _k_json(k), "R": R, "n": c.n, "file": name, "valid": c.valid})
    return ok, worst, results


def run_roundtrip(exp, out):
    tol = exp["tolerances"].get("roundtrip", ROUNDTRIP_TOL)
    worst = 0.0
    results = []
    for k in exp["k"]:
        f = funcrep.Gaussian(1.0)
        q = quadrature.QuadratureGrid(k.re, 12.0, b=k.im, panel=0.25)
        prof = tr.dunkl_transform(k, f, q)
        base = os.path.join(out, f"profile_k{_tag_k(k)}")
        prof.to_csv(base + ".csv")
        prof.to_json(base + ".json")
        xs = np.linspace(-5, 5, 101)
        back = tr.inverse_transform(k, prof, xs)
        d = float(np.max(np.abs(back - f(xs))))
        worst = max(worst, d)
        results.append({"k": _k_json(k), "defect": d, "profile": os.path.basename(base) + ".csv"})
    return worst <= tol, worst, results


RUNNERS = {"kernel-check": run_kernel_check, "identities": run_identities, "bang": run_bang,
           "support": run_support, "certify-pw": run_certify, "roundtrip": run_roundtrip}


def execute(exps, out):
    """Run validated experiments; returns the exit status."""
    os.makedirs(out, exist_ok=True)
    summary = {"version": __version__, "config_hash": config_hash(exps), "defaults": defaults(),
               "experiments": []}
    timing = {}
    status = 0
    for i, exp in enumerate(exps):
        t0 = time.perf_counter()
        entry = {"experiment": exp["experiment"], "config": _jsonable(exp)}
        try:
            ok, worst, details = RUNNERS[exp["experiment"]](exp, out)
            entry.update({"pass": bool(ok), "worst_defect": float(worst), "results": details})
        except DunklError as exc:
            entry.update({"pass": False, "worst_defect": None, "error": f"{type(exc).__name__}: {exc}"})
            print(f"error in {exp['experiment']}: {exc}", file=sys.stderr)
        if not entry["pass"]:
            status = 1
        timing[f"{i}:{exp['experiment']}"] = time.perf_counter() - t0
        summary["experiments"].append(entry)
    summary["pass"] = status == 0
    summary["runtime_file"] = "runtime.json"
    _write_json(os.path.join(out, "summary.json"), _clean(summary))
    # wall times vary run to run, so they live outside the deterministic reports
    _write_json(os.path.join(out, "runtime.json"), timing)
    return status


def _clean(obj):
    if isinstance(obj, dict):
        return {str(key): _clean(v) for key, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return "inf" if math.isinf(v) else v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if obj is an.INF:
        return "inf"
    return obj


# --- argument parsing ----------------------------------------------------


def _common(sp, k=True):
    if k:
        sp.add_argument("--k", action="append", help="multiplicity re[,im]; repeatable")
    sp.add_argument("--out", default="results", help="output directory (default: results)")
    sp.add_argument("--seed", type=int, help="random seed (default 0)")
    sp.add_argument("--tol", type=float, help="pass/fail tolerance for the experiment")


def build_parser():
    ap = argparse.ArgumentParser(prog="dunklpw", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("kernel-eval", help="evaluate the Dunkl kernel at one point")
    sp.add_argument("--k", default="0", help="multiplicity re[,im]")
    sp.add_argument("--lam", "--lambda", dest="lam", default="1", help="spectral parameter (complex ok)")
    sp.add_argument("--z", default="1", help="argument (complex ok)")
    sp.add_argument("--tol", type=float, default=kernel.DEFAULT_TOL)

    sp = sub.add_parser("identities", help="transform identity defects")
    _common(sp)

    sp = sub.add_parser("bang", help="Bang sequence a_n = ||T^n f||^(1/n)")
    _common(sp)
    sp.add_argument("--p", action="append", help="1, 2 or inf; repeatable")
    sp.add_argument("--R", type=float, action="append", help="band limit; repeatable")
    sp.add_argument("--n-max", type=int)
    sp.add_argument("--method", choices=("spectral", "direct"))
    sp.add_argument("--source", choices=("bandlimited", "gaussian"))

    sp = sub.add_parser("support", help="spectral support radius")
    _common(sp)
    sp.add_argument("--R", type=float, action="append")
    sp.add_argument("--source", choices=("bandlimited", "gaussian"))
    sp.add_argument("--eps", type=float)
    sp.add_argument("--lam-max", type=float)

    sp = sub.add_parser("certify-pw", help="Paley-Wiener growth certificate for Bump(1, 0.5)")
    _common(sp)
    sp.add_argument("--R", type=float, action="append", help="claimed type; repeatable")
    sp.add_argument("--n", type=int, action="append", help="polynomial order; repeatable")
    sp.add_argument("--tau-max", type=float)
    sp.add_argument("--sigma-max", type=float)

    sp = sub.add_parser("roundtrip", help="transform and inverse of a Gaussian")
    _common(sp)

    sp = sub.add_parser("run", help="run experiments from a JSON config")
    sp.add_argument("config")
    sp.add_argument("--out", help="output directory (overrides the config)")
    sp.add_argument("--k", action="append")
    sp.add_argument("--p", action="append")
    sp.add_argument("--R", type=float, action="append")
    sp.add_argument("--n-max", type=int)
    sp.add_argument("--seed", type=int)
    return ap


_TOL_NAME = {"identities": "identity", "roundtrip": "roundtrip", "certify-pw": "stability",
             "kernel-eval": "kernel"}


def _overrides(args):
    o = {}
    for flag, key in (("k", "k"), ("p", "p"), ("R", "R"), ("n_max", "n_max"), ("seed", "seed"),
                      ("method", "method"), ("source", "source"), ("n", "n"), ("tau_max", "tau_max"),
                      ("sigma_max", "sigma_max"), ("eps", "eps"), ("lam_max", "lam_max")):
        v = getattr(args, flag, None)
        if v is not None:
            o[key] = v
    tol = getattr(args, "tol", None)
    if tol is not None and args.command in _TOL_NAME:
        o["tolerances"] = {_TOL_NAME[args.command]: tol}
    return o


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "kernel-eval":
            k = _parse_k(args.k)
            try:
                lam, z = complex(args.lam.replace(" ", "")), complex(args.z.replace(" ", ""))
            except ValueError:
                raise ConfigError("lambda and z must be numbers") from None
            if not args.tol > 0:
                raise ConfigError("--tol must be positive")
            v = kernel.kernel_eval(k, lam, z, tol=args.tol)
            print(f"psi = {v.value.real:.16g} {v.value.imag:+.16g}i")
            print(f"terms = {v.order}  tail_bound = {v.tail_bound:.3e}  method = {v.method}")
            return 0
        if args.command == "run":
            exps, out = load_config(args.config, _overrides(args))
            out = args.out or out or "results"
        else:
            tag = "kernel-check" if args.command == "kernel-eval" else args.command
            exps = [validate({"experiment": tag, **_overrides(args)})]
            out = args.out
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DunklError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return execute(exps, out)


if __name__ == "__main__":
    sys.exit(main())
