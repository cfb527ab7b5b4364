"""Dev scratch: validate modem closed forms against oracles."""
import numpy as np
from scipy.integrate import quad

from iasim.modem import (ConstellationShape, shape_for_bits, modulate,
                         demodulate, ber_awgn_instant, minil_avg_ber,
                         svd_avg_ber, qfunc, _q_gamma_moment,
                         _eigensum_coeffs)

rng = np.random.default_rng(42)

# 1. round trip at zero noise
for b in range(1, 7):
    sh = shape_for_bits(b)
    bits = rng.integers(0, 2, (1000, b))
    sym = modulate(bits, sh)
    # energy check
    allbits = np.array([[ (x >> (b-1-i)) & 1 for i in range(b)] for x in range(2**b)])
    allsym = modulate(allbits, sh)
    print(f"b={b} shape {sh.i_side}x{sh.j_side} mean energy {np.mean(np.abs(allsym)**2):.12f}")
    back = demodulate(sym * 3.0 * np.exp(1j*0.7), np.exp(1j*0.7), 3.0, sh)
    assert np.array_equal(back, bits), f"round trip failed b={b}"

# 2. ber_awgn_instant reductions
for g in [0.0, 1.0, 5.0, 10.0]:
    v = ber_awgn_instant(ConstellationShape(2, 2), g)
    print(f"4QAM gamma={g}: {v:.10f} vs Q(sqrt) {float(qfunc(np.sqrt(g))):.10f}")

# 3. AWGN MC for several shapes
def awgn_mc(sh, snr, nsym=400_000, seed=1):
    r = np.random.default_rng(seed)
    bits = r.integers(0, 2, (nsym, sh.bits))
    sym = modulate(bits, sh) * np.sqrt(snr)
    noise = (r.standard_normal(nsym) + 1j * r.standard_normal(nsym)) / np.sqrt(2)
    back = demodulate(sym + noise, 1.0, np.sqrt(snr), sh)
    return np.mean(back != bits)

for b, snr in [(1, 4.0), (2, 10.0), (3, 10.0), (4, 20.0), (6, 60.0)]:
    sh = shape_for_bits(b)
    mc = awgn_mc(sh, snr)
    cf = ber_awgn_instant(sh, snr)
    n = 400_000 * sh.bits
    se = np.sqrt(max(cf*(1-cf), 1e-12)/n)
    print(f"shape {sh.i_side}x{sh.j_side} snr={snr}: closed {cf:.6f} mc {mc:.6f} diff/se {(mc-cf)/se:+.2f}")

# 4. minil_avg_ber reduction
for P in [1.0, 10.0, 1000.0]:
    v = minil_avg_ber(ConstellationShape(2, 2), P)
    ref = 0.5 * (1 - np.sqrt(P / (P + 2)))
    print(f"minil avg 4QAM P={P}: {v:.10e} ref {ref:.10e}")

# 5. _q_gamma_moment vs quadrature
for j in range(0, 7):
    for beta in [0.3, 2.0, 40.0]:
        num, _ = quad(lambda x: x**j * np.exp(-x) * float(qfunc(np.sqrt(beta*x))), 0, np.inf)
        cf = _q_gamma_moment(j, beta)
        assert abs(num - cf) < 1e-6 * max(abs(cf), 1e-10), (j, beta, num, cf)
print("q_gamma_moment matches quadrature")

# 6. eigensum coefficients: compare sum_i E[Q(sqrt(beta x_i))] via Wishart MC
def wishart_eigs(n_min, n_max, n=200_000, seed=7):
    r = np.random.default_rng(seed)
    h = (r.standard_normal((n, n_max, n_min)) + 1j*r.standard_normal((n, n_max, n_min)))/np.sqrt(2)
    g = np.linalg.svd(h, compute_uv=False)**2
    return g  # (n, n_min) descending

for (n_min, n_max) in [(1, 1), (2, 2), (2, 3), (3, 3)]:
    eigs = wishart_eigs(n_min, n_max)
    for beta in [1.0, 10.0]:
        mc = float(qfunc(np.sqrt(beta*eigs)).sum(axis=1).mean())
        js, cj = _eigensum_coeffs(n_min, n_max)
        cf = sum(c * _q_gamma_moment(int(j), beta) for j, c in zip(js, cj))
        print(f"({n_min},{n_max}) beta={beta}: MC {mc:.5f} closed {cf:.5f} rel {(mc-cf)/cf:+.4%}")

# 7. svd_avg_ber exact vs link MC (eps=0), and the high-SNR question
def svd_link_mc(sh, kp, n, frames=60_000, uses=20, seed=3):
    r = np.random.default_rng(seed)
    errors = 0
    bits_tot = 0
    for _ in range(frames):
        h = (r.standard_normal((n, n)) + 1j*r.standard_normal((n, n)))/np.sqrt(2)
        lam = np.linalg.svd(h, compute_uv=False)
        for i in range(n):
            snr = lam[i]**2 * kp / n
            bits = r.integers(0, 2, (uses, sh.bits))
            sym = modulate(bits, sh) * np.sqrt(snr)
            noise = (r.standard_normal(uses) + 1j*r.standard_normal(uses))/np.sqrt(2)
            back = demodulate(sym + noise, 1.0, max(np.sqrt(snr), 1e-300), sh)
            errors += np.sum(back != bits)
            bits_tot += bits.size
    return errors / bits_tot

sh = ConstellationShape(2, 2)
for kp in [6.0, 30.0]:
    cf = svd_avg_ber(sh, kp, 2, 2)
    mc = svd_link_mc(sh, kp, 2)
    print(f"svd 4QAM 2x2 KP={kp}: closed {cf:.6f} linkMC {mc:.6f} rel {(mc-cf)/cf:+.3%}")

cf = svd_avg_ber(sh, 3*1000.0, 2, 2)
print(f"svd 4QAM N=2 K=3 P=1e3: closed {cf:.6e}; N^2/(2PK)={4/6000:.3e}; N/(2PK)={2/6000:.3e}")
cf32 = svd_avg_ber(shape_for_bits(3), 3*10.0, 2, 3)
print(f"svd 8QAM (2,3) KP=30: closed {cf32:.6f}")
