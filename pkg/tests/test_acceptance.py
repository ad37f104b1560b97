"""Acceptance suite: one test per release criterion, each printing a
single PASS/FAIL line (run with `pytest -s tests/test_acceptance.py`)."""

import math
import time
from itertools import combinations

import numpy as np

from medsel import (
    DesignStats,
    GPrior,
    IndependentNormal,
    KnownSigma,
    Model,
    SpikeSlab,
    UniformModels,
    UniformOverModels,
    alpha_points,
    collective_odds_approx,
    equicorrelated_risk,
    inclusion_threshold_z2,
    limiting_marginal,
    marginal_likelihood,
    mini_theorem_scan,
    nested_transform,
    optimal_from_conditions,
    orthogonal_duplicate_risk,
    posterior_means,
    posterior_summary,
    region_weights,
    risk_report,
)
from medsel.errors import BoundaryTieError
from medsel.geometry2d import euclidean_optimal, reconstruct
from medsel.risk import kkt_residual, lasso_solution

from conftest import duplicate_design_stats, perturbed_frame


def report(num, ok, detail):
    print(f"criterion {num:>2} [{'PASS' if ok else 'FAIL'}] {detail}")


def test_criterion_1_orthogonal_mpm_optimality():
    """500 orthonormal instances per prior family: optimal == MPM."""
    t0 = time.time()
    rng = np.random.default_rng(101)
    families = {
        "gprior": lambda n: GPrior(g=float(n), sigma=KnownSigma(1.0)),
        "independent": lambda n: IndependentNormal(variance=1.0, sigma=KnownSigma(1.0)),
        "spikeslab": lambda n: SpikeSlab(v0=0.02, v1=1.5, sigma=KnownSigma(1.0)),
    }
    mismatches = 0
    boundary = 0
    for name, make in families.items():
        for _ in range(500):
            q = int(rng.integers(2, 7))
            n = 50
            z = rng.uniform(-1.0, 1.0, q)
            stats = DesignStats(q=q, n=n, gram=np.eye(q), xty=z,
                                yty=float(z @ z) + 1.5, normalization="unit")
            prior = make(n)
            post = posterior_summary(stats, prior, UniformOverModels())
            if np.any(np.abs(np.asarray(post.incl) - 0.5) < 1e-9):
                boundary += 1
                continue
            means = posterior_means(stats, post, prior)
            rep = risk_report(stats, post, means)
            if rep.optimal != rep.mpm:
                mismatches += 1
    elapsed = time.time() - t0
    ok = mismatches == 0 and elapsed < 10.0
    report(1, ok, f"orthogonal MPM optimality: 0 of 1500 required, got "
                  f"{mismatches} mismatches ({boundary} boundary skips), {elapsed:.1f}s")
    assert mismatches == 0
    assert elapsed < 10.0


def test_criterion_2_mini_theorem_scan():
    """>= 1e5 probability/correlation cells per case, zero violations."""
    t0 = time.time()
    scan = mini_theorem_scan(resolution=60, offset=1e-6)
    elapsed = time.time() - t0
    min_cells = min(scan.cells_checked.values())
    ok = not scan.violations and min_cells >= 100_000 and elapsed < 60.0
    report(2, ok, f"mini-theorem scan: {len(scan.violations)} violations over "
                  f">= {min_cells} cells/case, {elapsed:.1f}s")
    assert min_cells >= 100_000
    assert not scan.violations
    assert elapsed < 60.0


def test_criterion_3_study_tables():
    """Reference-table reproduction within the stated windows."""
    from medsel.study import Scenario, StudyConfig, run_study

    t0 = time.time()
    targets = {
        Scenario.FULL: 88.7,
        Scenario.ONEVAR: 84.1,
        Scenario.NULL: 81.6,
    }
    shares = {}
    gms = None
    for scenario, target in targets.items():
        table = run_study(StudyConfig(scenario=scenario, sample_sizes=(10, 50, 100)))
        shares[scenario.value] = table.share("MHO")
        if scenario is Scenario.FULL:
            row = table.overall
            gms = (row.gm_mpm, row.gm_hpm)
    elapsed = time.time() - t0
    ok = (
        abs(shares["full"] - 88.7) <= 3.0
        and abs(shares["onevar"] - 84.1) <= 3.0
        and abs(shares["null"] - 81.6) <= 3.0
        and abs(gms[0] - 1.03) <= 0.03
        and abs(gms[1] - 1.07) <= 0.04
        and elapsed < 120.0
    )
    report(3, ok, "study tables: M=H=O "
                  f"full {shares['full']:.1f}% (88.7±3), "
                  f"onevar {shares['onevar']:.1f}% (84.1±3), "
                  f"null {shares['null']:.1f}% (81.6±3); "
                  f"GM {gms[0]:.3f}/{gms[1]:.3f} (1.03±0.03 / 1.07±0.04), {elapsed:.1f}s")
    assert abs(shares["full"] - 88.7) <= 3.0
    assert abs(shares["onevar"] - 84.1) <= 3.0
    assert abs(shares["null"] - 81.6) <= 3.0
    assert abs(gms[0] - 1.03) <= 0.03
    assert abs(gms[1] - 1.07) <= 0.04
    assert elapsed < 120.0


def test_criterion_4_threshold_equivalence():
    """Collective posterior crosses 1/2 exactly at the closed-form z^2."""
    t0 = time.time()
    rng = np.random.default_rng(104)
    disagreements = 0
    checks = 0
    for n in (10, 100):
        prior = GPrior(g=float(n), sigma=KnownSigma(1.0))
        for k in range(1, 7):
            thr = inclusion_threshold_z2(n, k, 1.0, UniformModels())
            for p in range(4):
                z_head = rng.uniform(-0.5, 0.5, p)
                for delta in (1e-7, 1e-3, 0.3):
                    for sign in (1.0, -1.0):
                        z2 = thr + sign * delta
                        if z2 <= 0:
                            continue
                        stats = duplicate_design_stats(p, k, z_head, math.sqrt(z2), n)
                        post = posterior_summary(stats, prior, UniformOverModels(),
                                                 block=p)
                        checks += 1
                        if (post.collective > 0.5) != (z2 > thr):
                            disagreements += 1
    elapsed = time.time() - t0
    ok = disagreements == 0 and elapsed < 5.0
    report(4, ok, f"threshold equivalence: {disagreements} disagreements over "
                  f"{checks} grid points, {elapsed:.1f}s")
    assert disagreements == 0
    assert elapsed < 5.0


def test_criterion_5_dimensional_matching():
    """Collective log-marginal spread shrinks linearly in the perturbation."""
    t0 = time.time()
    rng = np.random.default_rng(105)
    n, p, k, g, s2 = 12, 2, 3, 25.0, 1.0
    b, x, deltas = perturbed_frame(n, p, k, rng)
    y = rng.standard_normal(n)
    spreads = []
    indep_spreads = []
    for eps in (1e-2, 1e-4, 1e-6):
        vals = []
        for j in range(1, k + 1):
            for subset in combinations(range(k), j):
                x_s = (x[:, None] + eps * deltas[:, list(subset)]).mean(axis=1)
                vals.append(limiting_marginal(b, x_s, y, g, s2))
        spreads.append(max(vals) - min(vals))
        xmat = np.hstack([b, x[:, None] + eps * deltas])
        stats = DesignStats.from_data(xmat, y, standardize=None, center_response=False)
        prior = IndependentNormal(variance=s2, sigma=KnownSigma(s2))
        ivals = []
        for j in range(1, k + 1):
            for subset in combinations(range(k), j):
                mask = (1 << p) - 1
                for s in subset:
                    mask |= 1 << (p + s)
                ivals.append(marginal_likelihood(stats, Model(mask, p + k), prior).log_value)
        indep_spreads.append(max(ivals) - min(ivals))
    r1 = spreads[0] / spreads[1]
    r2 = spreads[1] / spreads[2]
    elapsed = time.time() - t0
    ok = 50 < r1 < 200 and 50 < r2 < 200 and indep_spreads[2] > 0.1 and elapsed < 5.0
    report(5, ok, f"dimensional matching: spread ratios {r1:.0f}, {r2:.0f} "
                  f"(window [50, 200]); independent-prior spread "
                  f"{indep_spreads[2]:.2f} nats (> 0.1), {elapsed:.1f}s")
    assert 50 < r1 < 200 and 50 < r2 < 200
    assert indep_spreads[2] > 0.1
    assert elapsed < 5.0


def test_criterion_6_decomposition_identities():
    """Closed-form risk splits match the generic report to 1e-10."""
    t0 = time.time()
    rng = np.random.default_rng(106)
    worst = 0.0
    for trial in range(100):
        p = int(rng.integers(1, 6))
        k = int(rng.integers(1, 5))
        n = 40
        z_head = rng.uniform(-0.5, 0.5, p)
        z_dup = float(rng.uniform(-0.5, 0.5))
        stats = duplicate_design_stats(p, k, z_head, z_dup, n)
        kind = "gprior" if trial % 2 == 0 else "independent"
        if kind == "gprior":
            prior = GPrior(g=float(n), sigma=KnownSigma(1.0))
        else:
            prior = IndependentNormal(variance=1.0, sigma=KnownSigma(1.0))
        post = posterior_summary(stats, prior, UniformOverModels(), block=p)
        means = posterior_means(stats, post, prior)
        rep = risk_report(stats, post, means)
        closed = orthogonal_duplicate_risk(z_head, z_dup, float(n), post, kind)
        for m in post.models:
            worst = max(worst, abs(sum(closed[m]) - rep.risk_for(m)))
    worst_eq = 0.0
    count_eq = 0
    for r in (-0.2, 0.0, 0.5, 0.9):
        while count_eq < 25 * ((-0.2, 0.0, 0.5, 0.9).index(r) + 1):
            p = int(rng.integers(2, 6))
            if p > 1 and r <= -1.0 / (p - 1):
                continue
            gram = (1 - r) * np.eye(p) + r * np.ones((p, p))
            z = rng.uniform(-0.5, 0.5, p)
            yty = float(abs(z @ np.linalg.solve(gram, z))) + 2.0
            stats = DesignStats(q=p, n=30, gram=gram, xty=z, yty=yty,
                                normalization="unit")
            prior = GPrior(g=30.0, sigma=KnownSigma(1.0))
            post = posterior_summary(stats, prior, UniformOverModels())
            means = posterior_means(stats, post, prior)
            rep = risk_report(stats, post, means)
            closed = equicorrelated_risk(z, r, post, 30.0)
            for m in post.models:
                worst_eq = max(worst_eq, abs(closed[m] - rep.risk_for(m)))
            count_eq += 1
    elapsed = time.time() - t0
    ok = worst <= 1e-10 and worst_eq <= 1e-10 and elapsed < 5.0
    report(6, ok, f"decomposition identities: duplicate-split max err {worst:.1e}, "
                  f"equicorrelated max err {worst_eq:.1e} (<= 1e-10), {elapsed:.1f}s")
    assert worst <= 1e-10
    assert worst_eq <= 1e-10
    assert elapsed < 5.0


def test_criterion_7_odds_approximation_order():
    """Second-order error ratio between p and 2p inside [3, 5] for
    i=2, a=b=1, k=5: the error is measured against the approximated odds."""
    t0 = time.time()
    ratios = []
    for p in (50, 100, 200):
        e_p = collective_odds_approx(2, 1, 1, p, 5, order="second").relative_error
        e_2p = collective_odds_approx(2, 1, 1, 2 * p, 5, order="second").relative_error
        ratios.append(e_p / e_2p)
    elapsed = time.time() - t0
    ok = all(3.0 <= r <= 5.0 for r in ratios) and elapsed < 1.0
    report(7, ok, "odds approximation order: error ratios "
                  + ", ".join(f"{r:.2f}" for r in ratios)
                  + f" within [3, 5], {elapsed:.2f}s")
    assert elapsed < 1.0
    assert all(3.0 <= r <= 5.0 for r in ratios)


def test_criterion_8_geometry_oracle_agreement():
    """Condition blocks match the distance argmin on 1e4 draws per triple."""
    t0 = time.time()
    rng = np.random.default_rng(108)
    triples = [(-0.5, 0.3, 0.4), (0.5, 0.3, 0.4), (0.5, 0.1, 0.3)]
    disagreements = 0
    ties = 0
    worst_reconstruction = 0.0
    for triple in triples:
        pts = alpha_points(*triple)
        draws = rng.dirichlet((1.0,) * 4, size=10_000)
        for probs in draws:
            try:
                got = optimal_from_conditions(*probs, *triple)
            except BoundaryTieError:
                ties += 1
                continue
            if got != euclidean_optimal(pts, probs):
                disagreements += 1
        for probs in draws[:2_000]:
            abar = probs[1] * pts.a10 + probs[2] * pts.a01 + probs[3] * pts.a11
            for system in ("W1", "W2", "W3", "W4", "W5"):
                w = region_weights(abar, pts, system)
                err = float(np.abs(reconstruct(pts, w) - abar).max())
                worst_reconstruction = max(worst_reconstruction, err)
    elapsed = time.time() - t0
    ok = disagreements == 0 and worst_reconstruction <= 1e-12 and elapsed < 5.0
    report(8, ok, f"geometry oracle: {disagreements} disagreements "
                  f"({ties} boundary ties) over 30000 draws, worst "
                  f"reconstruction {worst_reconstruction:.1e} (<= 1e-12), {elapsed:.1f}s")
    assert disagreements == 0
    assert worst_reconstruction <= 1e-12
    assert elapsed < 5.0


def test_criterion_9_rescaled_prior_worked_example():
    """Back-transformed variances of the near-collinear worked design."""
    t0 = time.time()
    eps, g = 0.01, 2.0
    x = np.array([[1.0, 1.0], [1.0, 1.0], [1.0, 1.0 + eps]])
    gram = x.T @ x
    flat = nested_transform(gram, d=np.array([g, g]))
    v_flat = flat.prior_covariance[1, 1]
    rescaled = nested_transform(gram, d=np.array([g, g * eps**2]))
    v_rescaled = rescaled.prior_covariance[1, 1]
    elapsed = time.time() - t0
    target_flat = 3 * g / (2 * eps**2)
    ok = (
        abs(v_flat / target_flat - 1) <= 0.01
        and abs(v_rescaled / (1.5 * g) - 1) <= 0.01
        and elapsed < 1.0
    )
    report(9, ok, f"rescaled-prior example: {v_flat:.1f} vs 3g/(2e^2)={target_flat:.1f} "
                  f"and {v_rescaled:.4f} vs 1.5g={1.5 * g:.1f} (both within 1%), "
                  f"{elapsed:.2f}s")
    assert abs(v_flat / target_flat - 1) <= 0.01
    assert abs(v_rescaled / (1.5 * g) - 1) <= 0.01
    assert elapsed < 1.0


def test_criterion_10_lasso_kkt():
    """Subgradient conditions within 1e-8 on 200 random triples."""
    t0 = time.time()
    rng = np.random.default_rng(110)
    worst = 0.0
    for trial in range(200):
        q = int(rng.integers(2, 8))
        a = rng.standard_normal((q + 3, q))
        a /= np.linalg.norm(a, axis=0)
        gram = a.T @ a
        beta_bar = rng.standard_normal(q) * 2.0
        if trial % 3 == 0:
            lam = 0.0
        elif trial % 3 == 1:
            lam = float(np.abs(gram @ beta_bar).max()) * 1.5  # above the null threshold
        else:
            lam = float(rng.uniform(0.01, 1.0))
        b = lasso_solution(gram, beta_bar, lam)
        worst = max(worst, kkt_residual(gram, beta_bar, lam, b))
        if lam >= float(np.abs(gram @ beta_bar).max()):
            assert not np.any(b)
    elapsed = time.time() - t0
    ok = worst <= 1e-8 and elapsed < 5.0
    report(10, ok, f"lasso KKT: worst residual {worst:.1e} (<= 1e-8) over "
                   f"200 triples, {elapsed:.1f}s")
    assert worst <= 1e-8
    assert elapsed < 5.0
