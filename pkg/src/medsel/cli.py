"""Command-line front end: CSV ingestion, analysis, geometry, study, and
collective-prior reports.

Exit codes: 0 ok, 2 usage, 3 data, 4 numeric.  Errors are emitted as a
single-line JSON object on stderr.  Floats in reports are serialized with 17
significant digits so outputs are stable enough for golden-file testing.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import sys
from importlib import metadata

import numpy as np

from . import geometry2d, study
from .core import (
    DesignStats,
    GPrior,
    IndependentNormal,
    JeffreysSigma,
    KnownSigma,
    Model,
    SpikeSlab,
)
from .errors import (
    BoundaryTieError,
    CapacityError,
    DataError,
    DomainError,
    MedselError,
    NumericError,
)
from .posterior import (
    BetaBinomialFirstOrder,
    UniformModels,
    inclusion_threshold_z2,
    posterior_summary,
)
from .priors import (
    Bernoulli,
    BetaBinomial,
    Dilution,
    UniformOverModels,
    UniformOverSizes,
    collective_odds_approx,
    collective_prior_mass,
    collective_prior_odds,
)
from .risk import posterior_means, risk_report

USAGE_EXIT, DATA_EXIT, NUMERIC_EXIT = 2, 3, 4


# --- JSON with fixed float formatting ---------------------------------------


def _json_scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        f = float(v)
        if f != f:
            return "NaN"
        if f == float("inf"):
            return "Infinity"
        if f == float("-inf"):
            return "-Infinity"
        return format(f, ".17g")
    raise TypeError(f"not a scalar: {v!r}")


def dumps(obj, indent: int = 0) -> str:
    """JSON serializer with 17-significant-digit floats and stable key order
    (insertion order; all keys are snake_case by construction)."""
    pad = " " * indent
    inner = " " * (indent + 2)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{inner}"{k}": {dumps(v, indent + 2)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{inner}{dumps(v, indent + 2)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    return _json_scalar(obj)


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage errors as machine-readable JSON."""

    def error(self, message):
        print(dumps({"error": "usage", "message": message}), file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


# --- flag parsing helpers ----------------------------------------------------


def _parse_coef_prior(spec: str, g: float, sigma):
    name, _, arg = spec.partition(":")
    if name == "gprior":
        return GPrior(g=g, sigma=sigma)
    if name == "indep":
        variance = float(arg) if arg else 1.0
        if not isinstance(sigma, KnownSigma):
            raise DomainError("indep prior requires --sigma known:S2")
        return IndependentNormal(variance=variance, sigma=sigma)
    if name == "spikeslab":
        try:
            v0, v1 = (float(t) for t in arg.split(","))
        except ValueError as exc:
            raise DomainError("spikeslab needs v0,v1") from exc
        if not isinstance(sigma, KnownSigma):
            raise DomainError("spikeslab prior requires --sigma known:S2")
        return SpikeSlab(v0=v0, v1=v1, sigma=sigma)
    raise DomainError(f"unknown coefficient prior {spec!r}")


def _parse_model_prior(spec: str):
    name, _, arg = spec.partition(":")
    if name == "uniform":
        return UniformOverModels()
    if name == "sizes":
        return UniformOverSizes()
    if name == "bernoulli":
        return Bernoulli(theta=float(arg))
    if name == "betabinom":
        a, b = (float(t) for t in arg.split(","))
        return BetaBinomial(a=a, b=b)
    if name == "dilution":
        t1, k = arg.split(",")
        return Dilution(theta1=float(t1), k=int(k))
    raise DomainError(f"unknown model prior {spec!r}")


def _parse_sigma(spec: str):
    name, _, arg = spec.partition(":")
    if name == "jeffreys":
        return JeffreysSigma()
    if name == "known":
        return KnownSigma(sigma2=float(arg))
    raise DomainError(f"unknown sigma mode {spec!r}")


def _read_csv(path: str, response: str):
    try:
        with open(path, newline="") as fh:
            raw = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    digest = hashlib.sha256(raw.encode()).hexdigest()
    reader = csv.reader(raw.splitlines())
    rows = list(reader)
    if not rows:
        raise DataError("empty CSV file")
    header = rows[0]
    if response not in header:
        raise DataError(f"response column {response!r} not in header {header}")
    y_col = header.index(response)
    cov_names = [h for i, h in enumerate(header) if i != y_col]
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DataError(f"line {lineno}: expected {len(header)} cells, got {len(row)}")
        try:
            data.append([float(v) for v in row])
        except ValueError as exc:
            raise DataError(f"line {lineno}: non-numeric cell") from exc
    arr = np.asarray(data)
    if arr.shape[0] < 2:
        raise DataError("need at least two data rows")
    y = arr[:, y_col]
    x = np.delete(arr, y_col, axis=1)
    return x, y, cov_names, digest


# --- subcommand implementations ----------------------------------------------


def _cmd_analyze(ns) -> dict:
    x, y, names, digest = _read_csv(ns.data, ns.response)
    n, q = x.shape
    if q > 24:
        raise CapacityError(f"{q} covariates exceed the exhaustive-enumeration cap")
    g = float(n) if ns.g == "auto" else float(ns.g)
    sigma = _parse_sigma(ns.sigma)
    coef_prior = _parse_coef_prior(ns.coef_prior, g, sigma)
    model_prior = _parse_model_prior(ns.model_prior)
    stats = DesignStats.from_data(x, y, standardize="unit", center_response=True)
    post = posterior_summary(stats, coef_prior, model_prior, block=ns.block)
    means = posterior_means(stats, post, coef_prior)
    report = risk_report(stats, post, means)
    config = {
        "data": ns.data,
        "response": ns.response,
        "g": g,
        "coef_prior": ns.coef_prior,
        "model_prior": ns.model_prior,
        "sigma": ns.sigma,
        "block": ns.block,
    }
    return {
        "covariates": names,
        "posterior": {
            "model_probs": {str(m): float(p) for m, p in zip(post.models, post.probs)},
            "inclusion": [float(v) for v in post.incl],
            "collective": post.collective,
        },
        "risk_table": [
            {
                "model": str(m),
                "risk": float(r),
                "relative": float(rel),
                "posterior_prob": float(p),
            }
            for m, r, rel, p in zip(post.models, report.risk, report.relative, post.probs)
        ],
        "selected": {
            "mpm": str(report.mpm),
            "hpm": str(report.hpm),
            "optimal": str(report.optimal),
        },
        "provenance": {
            "input_sha256": digest,
            "n": n,
            "q": q,
            "response_centered": True,
            "covariates_unit_norm": True,
            "package_version": _version(),
            "config": config,
        },
    }


def _cmd_geometry(ns) -> dict:
    pts = geometry2d.alpha_points(ns.r12, ns.r1y, ns.r2y)
    case = geometry2d.classify_case(ns.r12, ns.r1y, ns.r2y)
    out = {
        "case": case.tag.value,
        "a1": case.a1,
        "a2": case.a2,
        "b1": case.b1,
        "b2": case.b2,
        "alpha": {
            "a00": [0.0, 0.0],
            "a10": [pts.a, 0.0],
            "a01": [pts.b, pts.c],
            "a11": [pts.a, pts.d],
            "midpoint": list(pts.midpoint),
        },
        "coefficients": {"a": pts.a, "b": pts.b, "c": pts.c, "d": pts.d},
    }
    if ns.probs is not None:
        p = [float(t) for t in ns.probs.split(",")]
        if len(p) != 4:
            raise DomainError("--probs needs p00,p10,p01,p11")
        abar = p[1] * pts.a10 + p[2] * pts.a01 + p[3] * pts.a11
        out["abar"] = list(abar)
        weights = {}
        for system in ("W1", "W2", "W3", "W4", "W5"):
            try:
                weights[system] = geometry2d.region_weights(abar, pts, system)
            except MedselError:
                continue
        out["weights"] = weights
        out["optimal_by_distance"] = str(geometry2d.euclidean_optimal(pts, np.array(p)))
        try:
            out["optimal_by_conditions"] = str(
                geometry2d.optimal_from_conditions(*p, ns.r12, ns.r1y, ns.r2y)
            )
        except BoundaryTieError as exc:
            out["optimal_by_conditions"] = None
            out["tie_contenders"] = [str(m) for m in exc.contenders]
        except MedselError:
            # ratio conditions undefined (reduced or degenerate geometry)
            out["optimal_by_conditions"] = None
    return out


def _cmd_study(ns):
    scenario = {s.value: s for s in study.Scenario}[ns.scenario]
    sizes = tuple(int(t) for t in ns.n.split(","))
    table = study.run_study(study.StudyConfig(scenario=scenario, sample_sizes=sizes))
    if ns.out_format == "csv":
        return table.to_csv()
    return {
        "scenario": table.scenario,
        "rows": table.to_records(),
        "skipped_cells": [
            {"n": s.n, "triple": list(s.triple), "reason": s.reason}
            for s in table.skipped
        ],
    }


def _cmd_collective(ns) -> dict:
    prior = _parse_model_prior(ns.model_prior)
    gamma1 = Model((1 << ns.gamma1_size) - 1, ns.p) if ns.p else Model(0, 0)
    out = {
        "p": ns.p,
        "k": ns.k,
        "gamma1_size": ns.gamma1_size,
        "mass_with_x": collective_prior_mass(prior, gamma1, ns.k, include_x=True),
        "mass_without_x": collective_prior_mass(prior, gamma1, ns.k, include_x=False),
        "odds": collective_prior_odds(prior, ns.gamma1_size, ns.p, ns.k),
    }
    if isinstance(prior, BetaBinomial):
        approx = collective_odds_approx(
            ns.gamma1_size, prior.a, prior.b, max(ns.p, 1), ns.k
        )
        out["odds_product_approx"] = approx.value
        out["odds_product_exact"] = approx.exact
    if ns.n is not None:
        thr = inclusion_threshold_z2(ns.n, ns.k, ns.sigma2, UniformModels())
        out["threshold_z2_uniform"] = thr
        if isinstance(prior, BetaBinomial) and ns.p >= 1:
            out["threshold_z2_betabinom_first_order"] = inclusion_threshold_z2(
                ns.n, ns.k, ns.sigma2,
                BetaBinomialFirstOrder(i=ns.gamma1_size, a=prior.a, p=ns.p),
            )
        if ns.z is not None:
            out["z2"] = ns.z**2
            out["include_x"] = bool(ns.z**2 > thr)
    return out


def _version() -> str:
    try:
        return metadata.version("medsel")
    except metadata.PackageNotFoundError:
        return "0.1.0+local"


def build_parser() -> _Parser:
    parser = _Parser(prog="medsel", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="exact posterior analysis of a CSV dataset")
    pa.add_argument("--data", required=True)
    pa.add_argument("--response", required=True)
    pa.add_argument("--g", default="auto", help="g value or 'auto' for g = n")
    pa.add_argument("--coef-prior", default="gprior",
                    help="gprior | indep[:V] | spikeslab:v0,v1")
    pa.add_argument("--model-prior", default="uniform",
                    help="uniform | sizes | bernoulli:T | betabinom:A,B | dilution:T1,K")
    pa.add_argument("--sigma", default="jeffreys", help="known:S2 | jeffreys")
    pa.add_argument("--block", type=int, default=None,
                    help="duplicate-block boundary for collective probabilities")
    pa.add_argument("--out", default=None)

    pg = sub.add_parser("geometry", help="two-covariate geometry report")
    pg.add_argument("--r12", type=float, required=True)
    pg.add_argument("--r1y", type=float, required=True)
    pg.add_argument("--r2y", type=float, required=True)
    pg.add_argument("--probs", default=None, help="p00,p10,p01,p11")
    pg.add_argument("--out", default=None)

    ps = sub.add_parser("study", help="deterministic two-covariate numerical study")
    ps.add_argument("--scenario", required=True, choices=["full", "onevar", "null"])
    ps.add_argument("--n", default="10,50,100")
    ps.add_argument("--out-format", default="json", choices=["json", "csv"])
    ps.add_argument("--out", default=None)

    pc = sub.add_parser("collective", help="prior masses and thresholds of a collective")
    pc.add_argument("--p", type=int, required=True)
    pc.add_argument("--k", type=int, required=True)
    pc.add_argument("--gamma1-size", type=int, default=0)
    pc.add_argument("--model-prior", default="uniform")
    pc.add_argument("--z", type=float, default=None)
    pc.add_argument("--n", type=int, default=None)
    pc.add_argument("--sigma2", type=float, default=1.0)
    pc.add_argument("--out", default=None)

    return parser


_HANDLERS = {
    "analyze": _cmd_analyze,
    "geometry": _cmd_geometry,
    "study": _cmd_study,
    "collective": _cmd_collective,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        result = _HANDLERS[ns.command](ns)
    except (DataError, CapacityError) as exc:
        print(dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return DATA_EXIT
    except NumericError as exc:
        print(dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return NUMERIC_EXIT
    except MedselError as exc:
        print(dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return USAGE_EXIT
    text = result if isinstance(result, str) else dumps(result)
    out_path = getattr(ns, "out", None)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
