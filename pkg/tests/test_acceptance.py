"""Acceptance checks, one test per numbered criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS/FAIL line
per criterion with the measured values.  Every tolerance is pinned in the
assertions below; nothing is tuned at runtime.
"""

import math
import time

import numpy as np

from mixent import (
    EpiExperimentConfig,
    MixingMatrix,
    Observation,
    canonical_form,
    circular_gaussian,
    classify_components,
    contrast,
    exact_entropy,
    exponential,
    gaussian,
    hat_embed,
    knn_entropy,
    laplace,
    match_entropy,
    minimize_contrast,
    oracle_decompose,
    quantile_transport,
    run_epi_trial,
    run_lemma2_sweep,
    sample,
    sample_sources,
    separation_quality,
    spacing_entropy,
    transport_log_derivative_expectation,
    uniform,
    uniform_disk,
    unit_variance_uniform,
)

H_NORMAL = 0.5 * math.log(2.0 * math.pi * math.e)
AVG = np.array([[1.0, 0.0, 0.0], [0.0, 2**-0.5, 2**-0.5]])
STRICT_GAP = 0.5 * (1.0 - math.log(2.0))


def report(num, ok, detail):
    print(f"\ncriterion {num:2d}: {'PASS' if ok else 'FAIL'} -- {detail}")
    assert ok, f"criterion {num} failed: {detail}"


def test_criterion_1_log_concavity_sweep():
    start = time.perf_counter()
    rep = run_lemma2_sweep(1000, seed=0)
    elapsed = time.perf_counter() - start
    ok = (
        rep.count == 1000
        and rep.violations == 0
        and rep.min_gap >= -1e-9
        and rep.equal_scale_max_abs_gap <= 1e-9
        and rep.block_violations == 0
        and elapsed < 5.0
    )
    report(
        1,
        ok,
        f"1000 instances, min gap {rep.min_gap:.3e}, equal-scale max |gap| "
        f"{rep.equal_scale_max_abs_gap:.3e}, block min gap {rep.block_min_gap:.3e}, "
        f"{elapsed:.2f}s < 5s",
    )


def test_criterion_2_embedding_identities():
    gen = np.random.Generator(np.random.Philox(202))
    start = time.perf_counter()
    worst_mult = worst_adj = worst_det = 0.0
    for _ in range(200):
        m, k, n = (int(v) for v in gen.integers(1, 5, 3))
        A = gen.standard_normal((m, k)) + 1j * gen.standard_normal((m, k))
        B = gen.standard_normal((k, n)) + 1j * gen.standard_normal((k, n))
        S = gen.standard_normal((k, k)) + 1j * gen.standard_normal((k, k))
        worst_mult = max(
            worst_mult, np.abs(hat_embed(A @ B) - hat_embed(A) @ hat_embed(B)).max()
        )
        worst_adj = max(worst_adj, np.abs(hat_embed(A.conj().T) - hat_embed(A).T).max())
        det2 = abs(np.linalg.det(S)) ** 2
        worst_det = max(worst_det, abs(np.linalg.det(hat_embed(S)) - det2) / det2)
    elapsed = time.perf_counter() - start
    ok = worst_mult <= 1e-12 and worst_adj <= 1e-12 and worst_det <= 1e-10 and elapsed < 1.0
    report(
        2,
        ok,
        f"200 matrices, product {worst_mult:.2e} <= 1e-12, adjoint {worst_adj:.2e} "
        f"<= 1e-12, det-squared rel {worst_det:.2e} <= 1e-10, {elapsed:.2f}s < 1s",
    )


def test_criterion_3_estimator_calibration():
    worst_spacing = 0.0
    for model, target in (
        (gaussian(1.0), H_NORMAL),
        (uniform(0.0, 1.0), 0.0),
        (exponential(1.0), 1.0),
    ):
        est = spacing_entropy(sample(model, 100_000, 3))
        worst_spacing = max(worst_spacing, abs(est.value - target))
    xy = sample_sources([gaussian(1.0), gaussian(1.0)], 100_000, 3)
    err_2d = abs(knn_entropy(xy, k=4).value - 2.0 * H_NORMAL)
    z = sample(circular_gaussian(1.0), 100_000, 3).reshape(-1, 1)
    err_complex = abs(knn_entropy(z, k=4).value - math.log(math.pi * math.e))
    ok = worst_spacing <= 0.01 and err_2d <= 0.03 and err_complex <= 0.03
    report(
        3,
        ok,
        f"spacing worst {worst_spacing:.4f} <= 0.01, knn 2d err {err_2d:.4f} <= 0.03, "
        f"knn complex err {err_complex:.4f} <= 0.03 (N=1e5)",
    )


def test_criterion_4_strict_gap():
    config = EpiExperimentConfig(
        matrix=MixingMatrix.from_array(AVG),
        sources=(unit_variance_uniform(),) * 3,
        n_samples=50_000,
        seed=11,
    )
    start = time.perf_counter()
    rep = run_epi_trial(config)
    elapsed = time.perf_counter() - start
    ok = abs(rep.gap - STRICT_GAP) <= 0.05 and rep.verdict == "strict" and elapsed < 30.0
    report(
        4,
        ok,
        f"gap {rep.gap:.6f} within {STRICT_GAP:.6f} +/- 0.05, verdict {rep.verdict}, "
        f"{elapsed:.1f}s < 30s",
    )


def test_criterion_5_equality_cases():
    real_config = EpiExperimentConfig(
        matrix=MixingMatrix.from_array(AVG),
        sources=(unit_variance_uniform(), gaussian(1.0), gaussian(1.0)),
        n_samples=50_000,
        seed=3,
    )
    real_gap = run_epi_trial(real_config).gap
    complex_config = EpiExperimentConfig(
        matrix=MixingMatrix.from_array(np.array([[2**-0.5, 2**-0.5 * 1j]])),
        sources=(circular_gaussian(1.0), circular_gaussian(1.0)),
        n_samples=50_000,
        seed=3,
    )
    complex_gap = run_epi_trial(complex_config).gap
    ok = abs(real_gap) <= 0.03 and abs(complex_gap) <= 0.03
    report(
        5,
        ok,
        f"|real gap| {abs(real_gap):.6f} <= 0.03, |complex gap| "
        f"{abs(complex_gap):.6f} <= 0.03 (N=5e4)",
    )


def test_criterion_6_transport_identity():
    targets = (uniform(0.0, 1.0), laplace(1.0))
    worst = 0.0
    for model in targets:
        got = transport_log_derivative_expectation(quantile_transport(model), 100_000, 3)
        worst = max(worst, abs(got - (exact_entropy(model) - H_NORMAL)))
    normal_value = transport_log_derivative_expectation(
        quantile_transport(gaussian(1.0)), 100_000, 3
    )
    worst_matched = 0.0
    for model in targets:
        matched = match_entropy(model, H_NORMAL)
        worst_matched = max(
            worst_matched,
            abs(transport_log_derivative_expectation(quantile_transport(matched), 100_000, 3)),
        )
    ok = worst <= 0.01 and normal_value == 0.0 and worst_matched <= 0.01
    report(
        6,
        ok,
        f"entropy-difference err {worst:.4f} <= 0.01, normal target {normal_value!r} == 0.0, "
        f"matched-target err {worst_matched:.4f} <= 0.01 (N=1e5)",
    )


def _sign_matrices(m, n):
    count = 3 ** (m * n)
    digits = (np.arange(count)[:, None] // 3 ** np.arange(m * n)) % 3
    return (digits - 1.0).reshape(count, m, n)


def test_criterion_7_recoverability_and_canonical():
    total = 0
    mismatches = 0
    for m in range(1, 4):
        for n in range(m, 5):
            mats = _sign_matrices(m, n)
            svals = np.linalg.svd(mats, compute_uv=False)
            mats = mats[svals[:, m - 1] > 1e-8]
            total += len(mats)
            if n == m:
                oracle = np.ones((len(mats), n), dtype=bool)
            else:
                oracle = np.zeros((len(mats), n), dtype=bool)
                for j in range(n):
                    row = np.broadcast_to(np.eye(n)[j], (len(mats), 1, n))
                    aug = np.concatenate([mats, row], axis=1)
                    aug_svals = np.linalg.svd(aug, compute_uv=False)
                    oracle[:, j] = aug_svals[:, m] <= 1e-8
            for A, want_mask in zip(mats, oracle):
                got = classify_components(A).recoverable
                if got != tuple(int(j) for j in np.flatnonzero(want_mask)):
                    mismatches += 1

    gen = np.random.Generator(np.random.Philox(703))
    checked = 0
    recon_worst = 0.0
    min_det = math.inf
    while checked < 500:
        m = int(gen.integers(1, 4))
        n = int(gen.integers(m, 5))
        r = int(gen.integers(0, m + 1)) if n == m else int(gen.integers(0, m))
        core = np.zeros((m, n))
        core[:r, :r] = np.eye(r)
        if m > r:
            core[r:, r:] = gen.standard_normal((m - r, n - r))
        B0 = gen.standard_normal((m, m))
        while abs(np.linalg.det(B0)) < 0.1:
            B0 = gen.standard_normal((m, m))
        P = np.eye(n)[gen.permutation(n)]
        A = np.linalg.solve(B0, core) @ P.T
        if np.linalg.matrix_rank(A) < m or np.any(np.abs(A).max(axis=0) < 1e-12):
            continue
        dec = canonical_form(A)
        got = dec.B @ A @ np.eye(n)[:, dec.permutation]
        target = np.zeros((m, n))
        target[: dec.r, : dec.r] = np.eye(dec.r)
        target[dec.r :, dec.r :] = got[dec.r :, dec.r :]
        recon_worst = max(recon_worst, np.abs(got - target).max())
        min_det = min(min_det, abs(np.linalg.det(dec.B)))
        checked += 1

    ok = total == 478_868 and mismatches == 0 and recon_worst <= 1e-10 and min_det > 1e-12
    report(
        7,
        ok,
        f"{total} full-rank sign matrices, {mismatches} oracle mismatches, 500 random "
        f"reconstructions worst {recon_worst:.2e} <= 1e-10, min |det B| {min_det:.2e}",
    )


def test_criterion_8_contrast_invariance():
    gen = np.random.Generator(np.random.Philox(801))
    worst = 0.0
    X = sample_sources([unit_variance_uniform(), laplace(1.0), exponential(1.0)], 2000, 100)
    obs = Observation.from_samples(X)
    for _ in range(50):
        W = gen.standard_normal((2, 3))
        D = np.diag(gen.uniform(0.5, 2.0, 2) * gen.choice([-1.0, 1.0], 2))
        P = np.eye(2)[gen.permutation(2)]
        c1 = contrast(W, obs)
        c2 = contrast(P @ D @ W, obs)
        worst = max(worst, abs(c2 - c1) / (1.0 + abs(c1)))
    Z = sample_sources([uniform_disk(1.0)] * 3, 2000, 101)
    obs_z = Observation.from_samples(Z)
    for _ in range(50):
        W = gen.standard_normal((2, 3)) + 1j * gen.standard_normal((2, 3))
        D = np.diag(gen.uniform(0.5, 2.0, 2) * np.exp(1j * gen.uniform(-np.pi, np.pi, 2)))
        P = np.eye(2)[gen.permutation(2)]
        c1 = contrast(W, obs_z)
        c2 = contrast(P @ D @ W, obs_z)
        worst = max(worst, abs(c2 - c1) / (1.0 + abs(c1)))
    ok = worst <= 1e-9
    report(8, ok, f"100 trials (50 real + 50 complex), worst relative drift {worst:.2e} <= 1e-9")


def test_criterion_9_extraction_end_to_end():
    sources = (unit_variance_uniform(),) * 3 + (gaussian(1.0),)
    successes = 0
    worst_time = 0.0
    dominances = []
    for seed in range(10):
        gen = np.random.Generator(np.random.Philox(9000 + seed))
        M, _ = np.linalg.qr(gen.standard_normal((4, 4)))
        X = sample_sources(sources, 20_000, seed)
        obs = Observation.from_samples(X @ M.T)
        start = time.perf_counter()
        result = minimize_contrast(obs, 2, seed=seed)
        worst_time = max(worst_time, time.perf_counter() - start)
        quality = separation_quality(result.demixer, M, threshold=0.95)
        dominances.append(min(quality.dominance))
        successes += bool(quality.success)
    ok = successes >= 9 and worst_time < 60.0
    report(
        9,
        ok,
        f"{successes}/10 seeds separated (need >= 9), min dominance {min(dominances):.3f}, "
        f"slowest seed {worst_time:.1f}s < 60s",
    )


def _decompose_over_demixers(demixers, mixing, sources):
    min_marginal = math.inf
    min_alignment = math.inf
    max_residual = 0.0
    exact_zero = 0
    worst_ratio = 0.0
    for W in demixers:
        dec = oracle_decompose(W, mixing, sources, n_samples=20_000, seed=7)
        min_marginal = min(min_marginal, dec.marginal_term)
        min_alignment = min(min_alignment, dec.alignment_term)
        max_residual = max(max_residual, abs(dec.residual))
        exact_zero += dec.residual == 0.0
        worst_ratio = max(worst_ratio, abs(dec.identity_gap) / (2.0 * dec.std_error))
    return min_marginal, min_alignment, max_residual, exact_zero, worst_ratio


def test_criterion_10_oracle_decomposition():
    gen_m = np.random.Generator(np.random.Philox(20260819))
    Mq, _ = np.linalg.qr(gen_m.standard_normal((4, 4)))
    gen_w = np.random.Generator(np.random.Philox(555))
    demixers = [gen_w.standard_normal((2, 4)) for _ in range(50)]

    normal_sources = (gaussian(1.0),) * 4
    n_marg, n_align, n_res, n_zero, n_ratio = _decompose_over_demixers(
        demixers, Mq, normal_sources
    )
    sep = oracle_decompose(Mq.T[:2], Mq, normal_sources, n_samples=20_000, seed=7)

    uniform_sources = (unit_variance_uniform(),) * 4
    u_marg, u_align, u_res, _, u_ratio = _decompose_over_demixers(
        demixers, Mq, uniform_sources
    )

    ok = (
        n_marg >= -0.03
        and n_align >= -0.05
        and n_zero == 50
        and n_ratio <= 1.0
        and abs(sep.marginal_term) <= 0.03
        and abs(sep.alignment_term) <= 0.03
        and sep.residual == 0.0
        and u_marg >= -0.03
        and u_align >= -0.05
        and u_res <= 1e-13
        and u_ratio <= 1.0
    )
    report(
        10,
        ok,
        f"normal scenario: min C_h {n_marg:.4f} >= -0.03, min C_i {n_align:.2e} >= -0.05, "
        f"{n_zero}/50 residuals exactly 0, identity ratio {n_ratio:.2f} <= 1; separating "
        f"demixer C_h {sep.marginal_term:.4f}, C_i {sep.alignment_term:.2e} within 0.03; "
        f"uniform variant: min C_h {u_marg:.4f}, max |residual| {u_res:.2e} <= 1e-13, "
        f"ratio {u_ratio:.2f}",
    )
