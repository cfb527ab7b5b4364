"""Acceptance suite: one test per criterion, printed pass/fail lines.

Monte Carlo tolerances combine the stated slack with 3 cluster-robust
standard errors.  Fixed seeds make every run identical.
"""

import math

import numpy as np
import pytest
from scipy import stats

from conftest import draw_inits
from iasim.modem import (ConstellationShape, ber_awgn_instant, minil_avg_ber,
                         modulate, shape_for_bits)
from iasim.network import NetworkConfig
from iasim.simulate import estimate_ber, fig1_stats
from iasim.solvers import evaluate_true_sinr, minil_solve_batch

SEED = 20240817


def run_curve(cfg, mode, snr_list, loading=False, target_errors=500,
              max_bits=6_000_000):
    return {
        snr: estimate_ber(cfg, mode, snr, target_errors=target_errors,
                          max_bits=max_bits, loading=loading)
        for snr in snr_list
    }


def crossing_snr(curve, level, required=True):
    """SNR where the measured curve crosses `level` (log-linear)."""
    pts = sorted((snr, est.estimate) for snr, est in curve.items()
                 if est.bit_errors >= 20)
    for (s0, b0), (s1, b1) in zip(pts, pts[1:]):
        if b0 >= level >= b1:
            t = (math.log10(level) - math.log10(b0)) / \
                (math.log10(b1) - math.log10(b0))
            return s0 + t * (s1 - s0)
    if required:
        raise AssertionError(f"curve never crosses {level}")
    return None


def slope_last_decade(curve, min_errors=50):
    """log10(BER) drop per 10 dB over the lowest measured decade."""
    pts = sorted((snr, est.estimate) for snr, est in curve.items()
                 if est.bit_errors >= min_errors and est.estimate > 0)
    logs = np.array([math.log10(b) for _, b in pts])
    lo = logs.min()
    sel = [(snr, lb) for (snr, _), lb in zip(pts, logs) if lb <= lo + 1.0]
    snrs = np.array([s for s, _ in sel])
    vals = np.array([lb for _, lb in sel])
    fit = np.polyfit(snrs / 10.0, vals, 1)
    return -fit[0]


def report(num, name, ok, detail):
    flag = "PASS" if ok else "FAIL"
    print(f"[criterion {num:>2}] {flag}  {name}: {detail}")
    assert ok, f"criterion {num} ({name}): {detail}"


@pytest.fixture(scope="module")
def cfg22():
    return NetworkConfig(k_pairs=3, nt=2, nr=2, rate_per_pair=2, seed=SEED)


@pytest.fixture(scope="module")
def cfg32():
    return NetworkConfig(k_pairs=3, nt=3, nr=2, rate_per_pair=2, seed=SEED)


@pytest.fixture(scope="module")
def curves_2x2(cfg22):
    """Unloaded curves around the 1e-2 crossings (criteria 2 and 3).

    The measured gaps sit near their tolerance edges, so the points
    bracketing each crossing run a full 6M bits (~10k frames, ~1%
    cluster error -> crossing jitter well under 0.1 dB).
    """
    dense = dict(target_errors=10**9, max_bits=6_000_000)
    return {
        "minil": run_curve(cfg22, "minil",
                           [13.75, 15.0, 16.25, 17.5, 18.75], **dense),
        "maxsinr": run_curve(cfg22, "maxsinr",
                             [7.5, 8.75, 10.0, 11.25], **dense),
        "svd": run_curve(cfg22, "svd",
                         [17.5, 18.75, 20.0, 21.25], **dense),
    }


@pytest.fixture(scope="module")
def curves_3x2(cfg32):
    """Unloaded curves for the asymmetric network (criterion 4)."""
    grid = [0.0, 2.5, 5.0, 7.5, 10.0, 12.5, 15.0, 17.5, 20.0, 22.5, 25.0]
    return {
        "minil": run_curve(cfg32, "minil", grid, target_errors=600),
        "maxsinr": run_curve(cfg32, "maxsinr", grid[:7], target_errors=600,
                             max_bits=12_000_000),
        "svd": run_curve(cfg32, "svd", grid[:9], target_errors=600,
                         max_bits=12_000_000),
    }


@pytest.fixture(scope="module")
def curves_loaded(cfg22):
    """Bit-loaded curves plus adaptive (criteria 10-12)."""
    grid = [0.0, 2.5, 5.0, 7.5, 10.0, 12.5, 15.0, 17.5]
    kw = dict(loading=True, target_errors=300, max_bits=16_000_000)
    return {
        "minil": run_curve(cfg22, "minil", grid + [20.0], **kw),
        "maxsinr": run_curve(cfg22, "maxsinr", grid, **kw),
        "svd": run_curve(cfg22, "svd", grid, **kw),
        "adaptive": run_curve(cfg22, "adaptive", grid, **kw),
    }


def test_criterion_1_minil_analytic_agreement(cfg22):
    shape = ConstellationShape(2, 2)
    worst = 0.0
    for snr in (0.0, 5.0, 10.0, 15.0, 20.0):
        est = estimate_ber(cfg22, "minil", snr, target_errors=10**9,
                           max_bits=2_400_000)
        ana = minil_avg_ber(shape, 10 ** (snr / 10))
        tol = max(0.10 * ana, 3 * est.stderr)
        worst = max(worst, abs(est.estimate - ana) / ana)
        assert est.bits_sent >= 2_000_000
        assert abs(est.estimate - ana) <= tol, (snr, est.estimate, ana)
    anchor = minil_avg_ber(shape, 10.0)
    assert anchor == pytest.approx(0.5 * (1 - math.sqrt(10 / 12)), rel=1e-12)
    report(1, "aligned-design analytic agreement", True,
           f"worst relative gap {worst:.1%} (tolerance 10% / 3 SE), "
           f"anchor {anchor:.4e}")


def test_criterion_2_maxsinr_gain_over_minil(curves_2x2):
    s_minil = crossing_snr(curves_2x2["minil"], 1e-2)
    s_max = crossing_snr(curves_2x2["maxsinr"], 1e-2)
    gap = s_minil - s_max
    report(2, "SINR-design gain over leakage design", gap >= 6.0,
           f"gap at BER 1e-2 = {gap:.2f} dB (need >= 6)")


def test_criterion_3_minil_vs_svd(curves_2x2):
    s_minil = crossing_snr(curves_2x2["minil"], 1e-2)
    s_svd = crossing_snr(curves_2x2["svd"], 1e-2)
    gap = s_svd - s_minil
    report(3, "leakage design vs eigenmode benchmark", 1.0 <= gap <= 3.0,
           f"gap at BER 1e-2 = {gap:.2f} dB (need within [1, 3])")


def test_criterion_4_diversity_slopes(curves_3x2):
    sl_minil = slope_last_decade(curves_3x2["minil"])
    sl_svd = slope_last_decade(curves_3x2["svd"])
    gap = crossing_snr(curves_3x2["svd"], 1e-2) \
        - crossing_snr(curves_3x2["maxsinr"], 1e-2)
    ok = 0.8 <= sl_minil <= 1.2 and 1.6 <= sl_svd <= 2.4 and 7.0 <= gap <= 11.0
    report(4, "asymmetric-network slopes and gain", ok,
           f"slopes minil {sl_minil:.2f} (in [0.8,1.2]), svd {sl_svd:.2f} "
           f"(in [1.6,2.4]); SINR-design vs SM gap {gap:.1f} dB (9 +- 2)")


def test_criterion_5_uncertainty_crossover(cfg22):
    from dataclasses import replace
    results = {}
    for eps in (0.01, 0.05, 0.1, 0.3):
        cfg = replace(cfg22, epsilon=eps)
        for mode in ("minil", "maxsinr", "svd"):
            est = estimate_ber(cfg, mode, 20.0, target_errors=600,
                               max_bits=6_000_000)
            results[mode, eps] = est.estimate
    ok = all(results["maxsinr", e] <= min(results["minil", e],
                                          results["svd", e])
             for e in (0.01, 0.05, 0.1))
    at3 = [results[m, 0.3] for m in ("minil", "maxsinr", "svd")]
    ok = ok and max(at3) / min(at3) <= 10.0
    winners = ["%.2e" % results["maxsinr", e] for e in (0.01, 0.05, 0.1)]
    report(5, "uncertainty crossover at 20 dB", ok,
           f"SINR design lowest for eps <= 0.1: {winners}; "
           f"spread at eps 0.3 = {max(at3) / min(at3):.2f}x (need <= 10)")


def test_criterion_6_error_floor(cfg22):
    from dataclasses import replace
    cfg = replace(cfg22, epsilon=0.05)
    b30 = estimate_ber(cfg, "minil", 30.0, target_errors=4000,
                       max_bits=6_000_000)
    b40 = estimate_ber(cfg, "minil", 40.0, target_errors=4000,
                       max_bits=6_000_000)
    limit = minil_avg_ber(ConstellationShape(2, 2), 1e12, 0.05, 3)
    ratio = b40.estimate / b30.estimate
    ok = ratio < 1.5 and abs(b40.estimate - limit) <= 0.15 * limit
    report(6, "uncertainty error floor", ok,
           f"BER(40)/BER(30) = {ratio:.3f} (< 1.5); floor {b40.estimate:.4e} "
           f"vs limit {limit:.4e} ({abs(b40.estimate-limit)/limit:+.1%}, "
           "need within 15%)")


def test_criterion_7_residual_interference_power(cfg22):
    from dataclasses import replace
    worst = 0.0
    for eps in (0.1, 0.5, 1.0):
        for p in (10.0, 100.0):
            cfg = replace(cfg22, epsilon=eps, power_p=p)
            cs, inits = draw_inits(cfg, range(10_000))
            sol = minil_solve_batch(cs.h_hat, p, cfg.iterations, inits[:, 0])
            _, _, interf = evaluate_true_sinr(sol, cs.h)
            expect = eps * (cfg.k_pairs - 1) * p
            rel = abs(interf.mean() - expect) / expect
            worst = max(worst, rel)
            assert rel <= 0.05, (eps, p, interf.mean(), expect)
    report(7, "residual interference power", True,
           f"worst deviation from eps*(K-1)*P = {worst:.2%} (need <= 5%)")


def test_criterion_8_equivalent_channel_distribution(cfg22):
    frames = 100_000
    z = np.empty(frames, dtype=complex)
    chunk = 20_000
    for start in range(0, frames, chunk):
        cs, inits = draw_inits(cfg22, range(start, start + chunk))
        sol = minil_solve_batch(cs.h, 100.0, cfg22.iterations, inits[:, 0])
        z[start:start + chunk] = sol.z[:, 0]
    z2 = np.abs(z) ** 2
    mean = z2.mean()
    ks = stats.kstest(z2, "expon")
    ok = 0.98 <= mean <= 1.02 and ks.pvalue > 0.01
    report(8, "unit-mean exponential equivalent channel", ok,
           f"mean |z|^2 = {mean:.4f} (in [0.98, 1.02]); "
           f"KS p-value = {ks.pvalue:.3f} (> 0.01)")


def test_criterion_9_bounded_interference_statistics(cfg32):
    rows = fig1_stats(cfg32, [1.0, 10.0, 100.0, 1000.0, 10000.0],
                      frames=10_000)
    leak = [r["avg_interference"] for r in rows]
    ratios = [b / a for a, b in zip(leak, leak[1:])]
    bracket = all(1.0 <= r["avg_desired_power"] <= r["beamforming_power"]
                  for r in rows)
    ok = all(r < 1.5 for r in ratios) and bracket
    report(9, "bounded residual interference", ok,
           f"leakage ratios {['%.2f' % r for r in ratios]} (all < 1.5); "
           f"1 <= avg|z|^2 <= E[sigma_max^2]: {bracket}")


def test_criterion_10_bitloading_gains(curves_2x2, curves_loaded):
    g_minil = crossing_snr(curves_2x2["minil"], 1e-2) \
        - crossing_snr(curves_loaded["minil"], 1e-2)
    g_max = crossing_snr(curves_2x2["maxsinr"], 1e-2) \
        - crossing_snr(curves_loaded["maxsinr"], 1e-2)
    ok = g_minil >= 4.0 and g_max >= 2.5
    report(10, "bit-loading gains", ok,
           f"gains at BER 1e-2: leakage design {g_minil:.2f} dB (>= 4), "
           f"SINR design {g_max:.2f} dB (>= 2.5)")


def test_criterion_11_bitloaded_levels_at_15db(cfg22):
    targets = {"minil": 2e-3, "maxsinr": 2e-4, "svd": 7e-4}
    measured = {}
    ok = True
    for mode, target in targets.items():
        est = estimate_ber(cfg22, mode, 15.0, target_errors=600,
                           max_bits=30_000_000, loading=True)
        measured[mode] = est.estimate
        ok = ok and target / 3 <= est.estimate <= target * 3
    report(11, "bit-loaded levels at 15 dB", ok,
           "; ".join(f"{m}: {v:.2e} (target {targets[m]:.0e} x/3)"
                     for m, v in measured.items()))


def test_criterion_12_adaptive_dominance(curves_loaded):
    dominated = True
    for snr in curves_loaded["adaptive"]:
        ad = curves_loaded["adaptive"][snr]
        for mode in ("minil", "maxsinr", "svd"):
            other = curves_loaded[mode][snr]
            slack = 3 * math.sqrt(ad.stderr**2 + other.stderr**2)
            if ad.estimate > other.estimate + slack:
                dominated = False
    # Modes that never get down to 1e-4 inside the grid cannot be the
    # best fixed mode there.
    crossings = [crossing_snr(curves_loaded[m], 1e-4, required=False)
                 for m in ("minil", "maxsinr", "svd")]
    best_fixed = min(c for c in crossings if c is not None)
    gain = best_fixed - crossing_snr(curves_loaded["adaptive"], 1e-4)
    ok = dominated and gain >= 2.0
    report(12, "adaptive dominance", ok,
           f"adaptive <= best mode + 3 SE at every point: {dominated}; "
           f"gain at BER 1e-4 = {gain:.2f} dB (>= 2)")


def test_criterion_13_property_suite(cfg22, rng):
    # Compact re-assertion of the always-on invariants; the full versions
    # live in the per-module test files.
    import itertools
    from iasim.bitload import greedy_bitload
    from iasim.simulate import run_frames

    # budget exactness + unit norms on a live loaded run
    cs, inits = draw_inits(cfg22, range(50))
    sol = minil_solve_batch(cs.h, cfg22.power_p, 100, inits[:, 0])
    assert np.allclose(np.linalg.norm(sol.u, axis=-1), 1.0, atol=1e-12)
    assert np.allclose(np.linalg.norm(sol.v, axis=-1), 1.0, atol=1e-12)

    def ber_of(i, b):
        return ber_awgn_instant(shape_for_bits(b), (i + 1.0) * b)

    assert greedy_bitload(ber_of, 3, 6).sum() == 6

    # leakage monotonicity
    from iasim.solvers import minil_solve
    from iasim.network import substream
    _, trace = minil_solve(cs.h[0], cfg22.power_p, 60, substream(SEED, 0),
                           init_v=inits[0, 0], track_leakage=True)
    assert np.all(np.diff(trace) <= 1e-9 * max(trace[0], 1.0))

    # Gray adjacency for every supported shape
    for b in range(1, 7):
        sh = shape_for_bits(b)
        words = np.array(list(itertools.product([0, 1], repeat=b)))
        sym = modulate(words, sh)
        d2 = np.abs(sym[:, None] - sym[None, :]) ** 2
        np.fill_diagonal(d2, np.inf)
        for i, j in zip(*np.where(np.isclose(d2, d2.min()))):
            assert np.sum(words[i] != words[j]) == 1

    # closed form vs AWGN Monte Carlo at 3 and 10 dB for the core shapes
    for b, snr_db in itertools.product((1, 2, 3, 4), (3.0, 10.0)):
        sh = shape_for_bits(b)
        snr = 10 ** (snr_db / 10)
        n = 150_000
        bits = rng.integers(0, 2, (n, b))
        x = modulate(bits, sh) * math.sqrt(snr)
        noise = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) \
            / math.sqrt(2)
        from iasim.modem import demodulate
        mc = np.mean(demodulate(x + noise, 1.0, math.sqrt(snr), sh) != bits)
        cf = ber_awgn_instant(sh, snr)
        se = math.sqrt(max(cf * (1 - cf), 1e-12) / (n * b))
        assert abs(mc - cf) <= max(3 * se, 5e-5), (b, snr_db, mc, cf)

    report(13, "always-on property suite", True,
           "budget, norms, monotonicity, Gray adjacency, closed-form vs "
           "Monte Carlo all hold")
