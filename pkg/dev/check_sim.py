"""Dev scratch: end-to-end Monte Carlo engine checks."""
import time
import numpy as np

from iasim.network import NetworkConfig, substream
from iasim.simulate import run_frame, run_frames, estimate_ber, analytic_ber
from iasim.modem import minil_avg_ber, svd_avg_ber, shape_for_bits

cfg = NetworkConfig(k_pairs=3, nt=2, nr=2, power_p=10.0, rate_per_pair=2, seed=7)

# reproducibility: batch == per-frame
counts_b = run_frames(cfg, "minil", range(20))
counts_s = np.array([run_frame(cfg, "minil", substream(cfg.seed, i),
                               active_pair=i % 3) for i in range(20)])
print("batch==frame (minil):", np.array_equal(counts_b, counts_s))
for mode in ("maxsinr", "svd", "adaptive"):
    loading = mode == "adaptive"
    cb = run_frames(cfg, mode, range(12), loading=loading)
    cs = np.array([run_frame(cfg, mode, substream(cfg.seed, i), loading=loading,
                             active_pair=i % 3) for i in range(12)])
    print(f"batch==frame ({mode}, loading={loading}):", np.array_equal(cb, cs))

# split invariance
c1 = run_frames(cfg, "maxsinr", range(0, 7))
c2 = run_frames(cfg, "maxsinr", range(7, 20))
print("split==joint:", np.array_equal(np.vstack([c1, c2]),
                                      run_frames(cfg, "maxsinr", range(20))))

# MinIL analytic agreement at several SNRs
print("\nMinIL vs closed form (eps=0):")
sh = shape_for_bits(2)
for snr in (0, 5, 10, 15, 20):
    t0 = time.perf_counter()
    est = estimate_ber(cfg, "minil", snr, target_errors=400, max_bits=4_000_000)
    dt = time.perf_counter() - t0
    ana = minil_avg_ber(sh, 10**(snr/10))
    se = est.stderr
    print(f" snr={snr:2d}: sim {est.estimate:.5f} ana {ana:.5f} "
          f"rel {(est.estimate-ana)/ana:+.2%} ({(est.estimate-ana)/se:+.1f} se) "
          f"bits {est.bits_sent} [{dt:.1f}s]")

# SVD-SM analytic agreement
print("\nSVD-SM vs closed form (eps=0, 8QAM/stream):")
for snr in (0, 5, 10, 15):
    est = estimate_ber(cfg, "svd", snr, target_errors=400, max_bits=4_000_000)
    ana = svd_avg_ber(shape_for_bits(3), 3 * 10**(snr/10), 2, 2)
    print(f" snr={snr:2d}: sim {est.estimate:.5f} ana {ana:.5f} "
          f"rel {(est.estimate-ana)/ana:+.2%} ({(est.estimate-ana)/est.stderr:+.1f} se)")

# Max-SINR curve glance + high-P zero errors
print("\nMax-SINR:")
for snr in (0, 5, 10):
    est = estimate_ber(cfg, "maxsinr", snr, target_errors=300, max_bits=4_000_000)
    print(f" snr={snr:2d}: sim {est.estimate:.5f}")
hi = NetworkConfig(k_pairs=3, nt=2, nr=2, power_p=1e8, seed=3)
counts = run_frames(hi, "minil", range(1000))
print("errors at P=1e8 over 1000 frames:", counts[:, :, 1].sum())

# eps=1 high P: interference-limited floor
cfg_e1 = NetworkConfig(k_pairs=3, nt=2, nr=2, power_p=10**3, epsilon=1.0, seed=9)
counts = run_frames(cfg_e1, "minil", range(2000))
ber = counts[:, :, 1].sum() / counts[:, :, 0].sum()
ana_floor = minil_avg_ber(sh, 10**3, 1.0, 3)
print(f"eps=1 floor: sim {ber:.4f} closed {ana_floor:.4f} rel {(ber-ana_floor)/ana_floor:+.2%}")
