import numpy as np
import pytest

from medsel import DesignStats


def duplicate_design_stats(p, k, z_head, z_dup, n, yty=None):
    """Sufficient statistics of an orthonormal head block plus k exact copies
    of one unit-norm predictor."""
    q = p + k
    gram = np.zeros((q, q))
    gram[:p, :p] = np.eye(p)
    gram[p:, p:] = 1.0
    xty = np.concatenate([np.asarray(z_head, dtype=float), np.full(k, float(z_dup))])
    if yty is None:
        yty = float(xty @ xty) + 3.0
    return DesignStats(q=q, n=n, gram=gram, xty=xty, yty=yty, normalization="unit")


def random_unit_gram(q, rng, extra_rows=4):
    """Well-conditioned gram of unit-norm columns."""
    a = rng.standard_normal((q + extra_rows, q))
    a /= np.linalg.norm(a, axis=0)
    return a.T @ a


def perturbed_frame(n, p, k, rng):
    """Orthonormal columns (B, x, deltas) for near-duplicate designs."""
    m = rng.standard_normal((n, p + 1 + k))
    q, _ = np.linalg.qr(m)
    return q[:, :p], q[:, p], q[:, p + 1 :]


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
