"""Dev scratch: solver convergence and statistics."""
import time
import numpy as np

from iasim.network import NetworkConfig, sample_channel_batch, substream, complex_normal
from iasim.solvers import (minil_solve_batch, maxsinr_solve_batch, minil_solve,
                           maxsinr_solve, evaluate_true_sinr)
from iasim.linalg import unit

def batch_init(cfg, idxs, draws=1):
    """Channels + per-frame init draws in substream order."""
    cs = sample_channel_batch(cfg, idxs)
    inits = []
    for f, idx in enumerate(idxs):
        rng = substream(cfg.seed, int(idx))
        complex_normal(rng, (cfg.k_pairs, cfg.k_pairs, cfg.nr, cfg.nt))
        complex_normal(rng, (cfg.k_pairs, cfg.k_pairs, cfg.nr, cfg.nt))
        inits.append([unit(complex_normal(rng, (cfg.k_pairs, cfg.nt))) for _ in range(draws)])
    return cs, np.array(inits)

# 1. MinIL convergence K=3 2x2 (feasible)
cfg = NetworkConfig(k_pairs=3, nt=2, nr=2, power_p=100.0, seed=11)
F = 4000
cs, inits = batch_init(cfg, range(F))
t0 = time.perf_counter()
sol = minil_solve_batch(cs.h, cfg.power_p, 100, inits[:, 0])
dt = time.perf_counter() - t0
norm_leak = sol.leakage.sum(axis=1) / (cfg.k_pairs * cfg.power_p)
print(f"MinIL K=3 2x2 100it ({dt:.2f}s/{F}f): frac<1e-8: {(norm_leak < 1e-8).mean():.4f}, "
      f"median {np.median(norm_leak):.2e}, p99 {np.percentile(norm_leak, 99):.2e}")
for iters in (200, 400, 1000):
    s2 = minil_solve_batch(cs.h, cfg.power_p, iters, inits[:, 0])
    nl = s2.leakage.sum(axis=1) / (cfg.k_pairs * cfg.power_p)
    print(f"  iters={iters}: frac<1e-8 {(nl < 1e-8).mean():.4f}  p99 {np.percentile(nl, 99):.2e}")

# 2. MinIL K=4 2x2 (improper): leakage stays away from zero
cfg4 = NetworkConfig(k_pairs=4, nt=2, nr=2, power_p=100.0, seed=12)
cs4, init4 = batch_init(cfg4, range(2000))
sol4 = minil_solve_batch(cs4.h, cfg4.power_p, 100, init4[:, 0])
nl4 = sol4.leakage.sum(axis=1) / (4 * cfg4.power_p)
print(f"MinIL K=4 2x2: frac>1e-3: {(nl4 > 1e-3).mean():.4f} min {nl4.min():.2e}")

# 3. E|z|^2 and exponential law under MinIL
z2 = np.abs(sol.z).ravel() ** 2
print(f"E|z|^2 over {z2.size}: {z2.mean():.4f}")

# 4. monotonic leakage
_, trace = minil_solve(cs.h[0], cfg.power_p, 50, substream(99, 0), track_leakage=True)
print("monotone:", np.all(np.diff(trace) <= 1e-9 * max(trace.max(), 1)), trace[:3], trace[-1])

# 5. Max-SINR vs MinIL SINR dominance at P=100
solm = maxsinr_solve_batch(cs.h, cfg.power_p, 100, inits[:, 0])
frac = (solm.sinr >= sol.sinr - 1e-9).all(axis=1).mean()
fracany = (solm.sinr >= sol.sinr - 1e-9).mean()
print(f"MaxSINR>=MinIL SINR: all-pairs/frame {frac:.4f} per-pair {fracany:.4f}")

# 6. Max-SINR K=1 power iteration -> dominant singular value
cfg1 = NetworkConfig(k_pairs=1, nt=2, nr=2, power_p=10.0, seed=5)
rng = substream(5, 0)
h1 = complex_normal(rng, (1, 1, 2, 2))
s1 = maxsinr_solve(h1, 10.0, 100, rng)
smax = np.linalg.svd(h1[0, 0], compute_uv=False)[0]
print(f"K=1: |z|={abs(s1.z[0]):.9f} sigma_max={smax:.9f} diff={abs(s1.z[0])-smax:.2e}")

# 7. Max-SINR boundedness & bracket (K=3, 3x2)
cfg32 = NetworkConfig(k_pairs=3, nt=3, nr=2, power_p=1.0, seed=21)
cs32, init32 = batch_init(cfg32, range(3000))
prev = None
for p in [1.0, 10.0, 100.0, 1000.0, 10000.0]:
    sm = maxsinr_solve_batch(cs32.h, p, 100, init32[:, 0])
    li = sm.leakage.mean()
    z2m = (np.abs(sm.z) ** 2).mean()
    ratio = li / prev if prev else float('nan')
    prev = li
    print(f"P={p:>7}: avg L {li:.4f} (ratio {ratio:.3f})  avg|z|^2 {z2m:.4f}")
# beamforming bracket
hs = cs32.h[:, np.arange(3), np.arange(3)]
sig = np.linalg.svd(hs.reshape(-1, 2, 3), compute_uv=False)[:, 0]
print(f"E[sigma_max^2] = {(sig**2).mean():.4f}")

# 8. MinIL with eps: residual interference power ~ eps*(K-1)*P
for eps in (0.1, 0.5, 1.0):
    cfge = NetworkConfig(k_pairs=3, nt=2, nr=2, power_p=100.0, epsilon=eps, seed=31)
    cse, inite = batch_init(cfge, range(3000))
    sole = minil_solve_batch(cse.h_hat, cfge.power_p, 100, inite[:, 0])
    sinr, zt, interf = evaluate_true_sinr(sole, cse.h)
    expect = eps * 2 * 100.0
    print(f"eps={eps}: avg interference {interf.mean():.2f} expect {expect:.1f} "
          f"rel {(interf.mean()-expect)/expect:+.3%}")
EOF = None
