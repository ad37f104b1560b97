"""Complete two-covariate geometry: projection points, case taxonomy,
barycentric weight systems, closed-form optimality conditions, and the
scanner for the seven q=2 selection theorems.

With standardized variables the four candidate models project y onto points
a00=(0,0), a10=(a,0), a01=(b,c), a11=(a,d) in the plane, and selecting the
risk-minimizing model means picking the point nearest to the model average
abar.  Everything below works in these coordinates.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import Model
from .errors import BoundaryTieError, DegenerateGeometryError, DomainError

#: strict-inequality condition checks treat anything closer than this to the
#: boundary as a tie
BOUNDARY_TOL = 1e-9

M00, M10, M01, M11 = (Model(m, 2) for m in range(4))


def _corr_det(r12: float, r1y: float, r2y: float) -> float:
    return 1.0 + 2.0 * r12 * r1y * r2y - r12**2 - r1y**2 - r2y**2


def _validate_triple(r12: float, r1y: float, r2y: float) -> None:
    if not (abs(r12) < 1.0 and abs(r1y) <= 1.0 and abs(r2y) <= 1.0):
        raise DomainError("correlations must lie in [-1, 1] with |r12| < 1")
    if _corr_det(r12, r1y, r2y) < -1e-12:
        raise DomainError("the (x1, x2, y) correlation matrix is not PSD")


@dataclass(frozen=True)
class AlphaPoints:
    """Projection points of y onto the four model spans (common sqrt(n)
    factor dropped)."""

    a: float
    b: float
    c: float
    d: float

    @property
    def a00(self) -> np.ndarray:
        return np.zeros(2)

    @property
    def a10(self) -> np.ndarray:
        return np.array([self.a, 0.0])

    @property
    def a01(self) -> np.ndarray:
        return np.array([self.b, self.c])

    @property
    def a11(self) -> np.ndarray:
        return np.array([self.a, self.d])

    @property
    def midpoint(self) -> np.ndarray:
        """E, the midpoint of the a00 -- a11 edge."""
        return np.array([self.a / 2.0, self.d / 2.0])

    def vertex(self, label: str) -> np.ndarray:
        return {
            "00": self.a00, "10": self.a10, "01": self.a01,
            "11": self.a11, "E": self.midpoint,
        }[label]

    def points(self) -> np.ndarray:
        """Rows a00, a10, a01, a11 in model-mask order."""
        return np.vstack([self.a00, self.a10, self.a01, self.a11])


def alpha_points(r12: float, r1y: float, r2y: float) -> AlphaPoints:
    """Coordinates a = r1y, b = r12 r2y, c = sqrt(1-r12^2) r2y,
    d = (r2y - r12 r1y)/sqrt(1-r12^2)."""
    _validate_triple(r12, r1y, r2y)
    root = math.sqrt(1.0 - r12**2)
    return AlphaPoints(
        a=r1y,
        b=r12 * r2y,
        c=root * r2y,
        d=(r2y - r12 * r1y) / root,
    )


class Case(enum.Enum):
    ORTHOGONAL = "Orthogonal"
    CASE1 = "Case1"
    CASE2 = "Case2"
    CASE3 = "Case3"
    BOUNDARY = "Boundary"
    REDUCED = "Reduced"


@dataclass(frozen=True)
class GeomCase:
    tag: Case
    a1: float
    a2: float
    b1: float
    b2: float
    swapped: bool = False


def classify_case(
    r12: float, r1y: float, r2y: float, *, tol: float = BOUNDARY_TOL
) -> GeomCase:
    """Correlation-regime taxonomy.

    Orthogonal iff r12 = 0; Case1 iff r12 r1y/r2y < 0; with a positive sign,
    Case2 iff |r12| < min(|r1y/r2y|, |r2y/r1y|) and Case3 iff the smaller
    ratio magnitude falls below |r12|.  Exact boundary inputs are reported
    as Boundary, never silently binned.  When |r1y| > |r2y| the Case3 test
    applies with the covariate roles swapped (flagged).
    """
    _validate_triple(r12, r1y, r2y)
    if r1y == 0.0 or r2y == 0.0:
        return GeomCase(Case.REDUCED, math.nan, math.nan, math.nan, math.nan)
    a1 = r12 * r1y / r2y
    a2 = r12 * r2y / r1y
    b1 = a1 * (1.0 - a2) / (1.0 - a1) if a1 != 1.0 else math.inf
    b2 = a2 * (1.0 - a1) / (1.0 - a2) if a2 != 1.0 else math.inf
    if r12 == 0.0:
        return GeomCase(Case.ORTHOGONAL, a1, a2, b1, b2)
    if abs(a1) <= tol:
        return GeomCase(Case.BOUNDARY, a1, a2, b1, b2)
    if a1 < 0.0:
        return GeomCase(Case.CASE1, a1, a2, b1, b2)
    ratio = abs(r1y / r2y)
    lo, hi = min(ratio, 1.0 / ratio), max(ratio, 1.0 / ratio)
    if abs(abs(r12) - lo) <= tol * max(1.0, lo):
        return GeomCase(Case.BOUNDARY, a1, a2, b1, b2)
    if abs(r12) < lo:
        return GeomCase(Case.CASE2, a1, a2, b1, b2)
    return GeomCase(Case.CASE3, a1, a2, b1, b2, swapped=ratio > 1.0)


_SYSTEM_VERTICES = {
    "W1": ("00", "10", "11"),
    "W2": ("00", "01", "11"),
    "W3": ("10", "01", "E"),
    "W4": ("00", "10", "E"),
    "W5": ("01", "11", "E"),
}


def region_weights(
    abar: np.ndarray, pts: AlphaPoints, system: str
) -> dict[str, float]:
    """Barycentric weights of abar in one of the five triangles

    S1={a00,a10,a11}, S2={a00,a01,a11}, S3={a10,a01,E}, S4={a00,a10,E},
    S5={a01,a11,E}, with E the midpoint of a00--a11.  Weights sum to one and
    reconstruct abar exactly.
    """
    if system not in _SYSTEM_VERTICES:
        raise DomainError(f"unknown weight system {system!r}")
    x, y = float(abar[0]), float(abar[1])
    a, b, c, d = pts.a, pts.b, pts.c, pts.d
    if system in ("W1", "W4"):
        den = a * d
    elif system == "W3":
        den = a * c + b * d - a * d
    else:
        den = a * c - b * d
    if abs(den) < 1e-300:
        raise DegenerateGeometryError(f"degenerate geometry for system {system}")
    if system == "W1":
        w11 = y / d
        w10 = x / a - y / d
        return {"00": 1.0 - x / a, "10": w10, "11": w11}
    if system == "W2":
        w01 = (a * y - d * x) / (a * c - b * d)
        w11 = (c * x - b * y) / (a * c - b * d)
        return {"00": 1.0 + ((d - c) * x + (b - a) * y) / (a * c - b * d),
                "01": w01, "11": w11}
    if system == "W3":
        dn = a * c + b * d - a * d
        w10 = ((2 * c - d) * x - (2 * b - a) * y - a * c + b * d) / dn
        w01 = (d * x + a * y - a * d) / dn
        we = 2.0 * (a * c - c * x - (a - b) * y) / dn
        return {"10": w10, "01": w01, "E": we}
    if system == "W4":
        return {"00": 1.0 - x / a - y / d, "10": x / a - y / d, "E": 2.0 * y / d}
    # W5
    dn = a * c - b * d
    w01 = (a * y - d * x) / dn
    w11 = ((2 * c - d) * x - (2 * b - a) * y) / dn - 1.0
    we = 2.0 * ((d - c) * x + (b - a) * y) / dn + 2.0
    return {"01": w01, "11": w11, "E": we}


def reconstruct(pts: AlphaPoints, weights: dict[str, float]) -> np.ndarray:
    """Weighted vertex combination; inverse of region_weights."""
    out = np.zeros(2)
    for label, w in weights.items():
        out += w * pts.vertex(label)
    return out


def euclidean_optimal(pts: AlphaPoints, probs: np.ndarray) -> Model:
    """Distance oracle: the model whose alpha point is nearest to abar.

    Exact distance ties resolve to the smaller model, then lexicographic.
    """
    probs = np.asarray(probs, dtype=float)
    abar = probs[1:] @ pts.points()[1:]
    d2 = ((pts.points() - abar) ** 2).sum(axis=1)
    order = sorted(range(4), key=lambda i: (d2[i], Model(i, 2).size, i))
    return Model(order[0], 2)


def risk_differences(pts: AlphaPoints, abar: np.ndarray) -> dict[str, float]:
    """The five weight-based pairwise risk differences, e.g.
    R(M10) - R(M00) = 2 a^2 (w1_00 - 1/2).

    The "01-10" pair carries the constant c(ac+bd-ad)/b: the w3 median
    through E coincides with the 10--01 perpendicular bisector, and this is
    the factor that makes the affine forms agree everywhere, not just at
    their common zero line.
    """
    a, b, c, d = pts.a, pts.b, pts.c, pts.d
    w1 = region_weights(abar, pts, "W1")
    w2 = region_weights(abar, pts, "W2")
    w3 = region_weights(abar, pts, "W3")
    return {
        "10-00": 2.0 * a**2 * (w1["00"] - 0.5),
        "01-00": 2.0 * (b**2 + c**2) * (w2["00"] - 0.5),
        "11-10": 2.0 * d**2 * (0.5 - w1["11"]),
        "11-01": 2.0 * (a**2 + d**2 - b**2 - c**2) * (0.5 - w2["11"]),
        "01-10": (c * (a * c + b * d - a * d) / b) * (w3["10"] - w3["01"]),
    }


def _condition_blocks(
    p00: float, p10: float, p01: float, p11: float,
    r12: float, r1y: float, r2y: float,
) -> dict[Model, tuple[float, ...]]:
    """Margins of each model's optimality block; all must be >= 0."""
    p1, p2 = p10 + p11, p01 + p11
    a1 = r12 * r1y / r2y
    a2 = r12 * r2y / r1y
    if a1 == 1.0 or a2 == 1.0:
        raise DegenerateGeometryError("A1 or A2 equals 1; conditions are undefined")
    b1 = a1 * (1.0 - a2) / (1.0 - a1)
    b2 = a2 * (1.0 - a1) / (1.0 - a2)
    ratio2 = (r1y / r2y) ** 2
    side = ratio2 * ((1.0 - a2) * p1 - 0.5) - ((1.0 - a1) * p2 - 0.5)
    return {
        M00: (0.5 - (p1 + p01 * a2), 0.5 - (p2 + p10 * a1)),
        M10: ((p1 + p01 * a2) - 0.5, 0.5 - (p2 + p01 * b1), side),
        M01: (0.5 - (p1 + p10 * b2), (p2 + p10 * a1) - 0.5, -side),
        M11: ((p2 + p01 * b1) - 0.5, (p1 + p10 * b2) - 0.5),
    }


def optimal_from_conditions(
    p00: float, p10: float, p01: float, p11: float,
    r12: float, r1y: float, r2y: float,
    *,
    tol: float = BOUNDARY_TOL,
) -> Model:
    """Closed-form optimal model from the four condition blocks.

    Raises BoundaryTieError when no block (or more than one) is satisfied
    with margin above ``tol``; the error lists the contending models.
    """
    total = p00 + p10 + p01 + p11
    if abs(total - 1.0) > 1e-9 or min(p00, p10, p01, p11) < -1e-15:
        raise DomainError("probabilities must be nonnegative and sum to 1")
    if r1y == 0.0 or r2y == 0.0:
        raise DomainError("the ratio conditions need r1y != 0 and r2y != 0")
    _validate_triple(r12, r1y, r2y)
    blocks = _condition_blocks(p00, p10, p01, p11, r12, r1y, r2y)
    satisfied = [m for m, margins in blocks.items() if all(v > tol for v in margins)]
    if len(satisfied) == 1:
        return satisfied[0]
    near = [m for m, margins in blocks.items() if all(v > -tol for v in margins)]
    raise BoundaryTieError(
        "optimality conditions did not isolate a single model", contenders=near
    )


# --- mini-theorem scanner ----------------------------------------------------

#: PSD correlation triples used by default, keyed by their case tag; the
#: first triple of each case is the worked configuration from the geometric
#: analysis (|r12| = 0.5).
DEFAULT_TRIPLES: dict[Case, tuple[tuple[float, float, float], ...]] = {
    Case.CASE1: ((-0.5, 0.3, 0.4), (-0.3, 0.2, 0.6), (-0.8, 0.15, 0.35)),
    Case.CASE2: ((0.5, 0.3, 0.4), (0.3, 0.45, 0.55), (0.6, 0.5, 0.65)),
    Case.CASE3: ((0.5, 0.1, 0.3), (0.7, 0.2, 0.5), (0.9, 0.05, 0.4)),
}


@dataclass(frozen=True)
class Violation:
    statement: int
    triple: tuple[float, float, float]
    probs: tuple[float, float, float, float]
    mpm: Model
    optimal: Model
    detail: str


@dataclass(frozen=True)
class ScanReport:
    violations: tuple[Violation, ...]
    cells_checked: dict[Case, int]
    cells_skipped: dict[Case, int]

    @property
    def ok(self) -> bool:
        return not self.violations


def simplex_grid(resolution: int, offset: float = 1e-6) -> np.ndarray:
    """Deterministic lattice over the 4-model probability simplex.

    Lattice points (i, j, k, l)/m are nudged by coordinate-dependent offsets
    so that no cell sits exactly on an inclusion-probability boundary.
    """
    m = resolution
    pts = []
    for i in range(m + 1):
        for j in range(m + 1 - i):
            for k in range(m + 1 - i - j):
                pts.append((i, j, k, m - i - j - k))
    arr = np.asarray(pts, dtype=float)
    shift = offset * m * np.array([1.0, 2.0, 3.0, 4.0])
    arr = arr + shift[None, :]
    return arr / arr.sum(axis=1, keepdims=True)


def _scan_triple(
    triple: tuple[float, float, float],
    probs: np.ndarray,
    tag: Case,
    tol: float,
) -> tuple[list[Violation], int, int]:
    pts = alpha_points(*triple)
    verts = pts.points()
    abar = probs[:, 1:] @ verts[1:]
    d2 = (
        (abar[:, None, :] - verts[None, :, :]) ** 2
    ).sum(axis=2)  # (N, 4) squared distances in mask order 00,10,01,11
    order = np.argsort(d2, axis=1)
    best = order[:, 0]
    margin = d2[np.arange(len(d2)), order[:, 1]] - d2[np.arange(len(d2)), best]
    p1 = probs[:, 1] + probs[:, 3]
    p2 = probs[:, 2] + probs[:, 3]
    interior = (
        (margin > 1e-12)
        & (np.abs(p1 - 0.5) > tol)
        & (np.abs(p2 - 0.5) > tol)
        & (np.abs(probs[:, 0] - 0.5) > tol)
        & (np.abs(probs[:, 3] - 0.5) > tol)
    )
    skipped = int((~interior).sum())
    probs, p1, p2, best = probs[interior], p1[interior], p2[interior], best[interior]
    mpm_code = (p1 > 0.5).astype(int) + 2 * (p2 > 0.5).astype(int)

    checks: list[tuple[int, np.ndarray, np.ndarray, str]] = []
    if tag == Case.CASE1:
        checks.append((1, mpm_code == 0, best == 0, "MPM=M00 must be optimal"))
    if tag == Case.CASE2:
        checks.append((2, mpm_code == 3, best == 3, "MPM=M11 must be optimal"))
    if tag in (Case.CASE1, Case.CASE3):
        premise = ((p1 > 0.5).astype(int) + (p2 > 0.5).astype(int)) <= 1
        checks.append((3, premise, best != 3, "M11 cannot be optimal"))
    if tag in (Case.CASE2, Case.CASE3):
        premise = (p1 > 0.5) | (p2 > 0.5)
        checks.append((4, premise, best != 0, "M00 cannot be optimal"))
    if tag in (Case.CASE1, Case.CASE2):
        checks.append((5, probs[:, 0] > 0.5, best == 0, "p00>1/2 makes M00 optimal"))
        checks.append((5, probs[:, 3] > 0.5, best == 3, "p11>1/2 makes M11 optimal"))
    checks.append((6, probs[:, 0] > 0.5, best != 3, "p00>1/2 forbids M11 optimal"))
    checks.append((6, probs[:, 3] > 0.5, best != 0, "p11>1/2 forbids M00 optimal"))
    if tag == Case.CASE3:
        checks.append((7, probs[:, 0] < 0.5, best != 0, "p00<1/2 forbids M00 optimal"))
        checks.append((7, probs[:, 3] < 0.5, best != 3, "p11<1/2 forbids M11 optimal"))

    violations: list[Violation] = []
    for stmt, premise, conclusion, text in checks:
        bad = premise & ~conclusion
        for idx in np.nonzero(bad)[0]:
            violations.append(
                Violation(
                    statement=stmt,
                    triple=triple,
                    probs=tuple(probs[idx]),
                    mpm=Model(int(mpm_code[idx]), 2),
                    optimal=Model(int(best[idx]), 2),
                    detail=text,
                )
            )
    return violations, int(interior.sum()), skipped


def mini_theorem_scan(
    triples: dict[Case, tuple[tuple[float, float, float], ...]] | None = None,
    *,
    resolution: int = 60,
    offset: float = 1e-6,
    tol: float = 1e-6,
) -> ScanReport:
    """Check the seven q=2 statements against the distance oracle on a dense
    probability lattice crossed with per-case correlation triples."""
    triples = DEFAULT_TRIPLES if triples is None else triples
    probs = simplex_grid(resolution, offset)
    violations: list[Violation] = []
    checked: dict[Case, int] = {}
    skipped: dict[Case, int] = {}
    for tag, trips in triples.items():
        checked[tag] = 0
        skipped[tag] = 0
        for triple in trips:
            got = classify_case(*triple)
            if got.tag != tag:
                raise DomainError(f"triple {triple} classifies as {got.tag}, not {tag}")
            v, n_ok, n_skip = _scan_triple(triple, probs, tag, tol)
            violations.extend(v)
            checked[tag] += n_ok
            skipped[tag] += n_skip
    return ScanReport(
        violations=tuple(violations), cells_checked=checked, cells_skipped=skipped
    )
