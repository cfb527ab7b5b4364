"""Dev scratch: eigenmode-average BER with transmitter-side uncertainty."""
import numpy as np

from iasim.modem import ConstellationShape, shape_for_bits, modulate, demodulate, svd_avg_ber

sh = ConstellationShape(2, 2)

# continuity eps -> 0+
for n_min, n_max in [(1, 1), (2, 2), (2, 3)]:
    base = svd_avg_ber(sh, 30.0, n_min, n_max, 0.0)
    lim = svd_avg_ber(sh, 30.0, n_min, n_max, 1e-9)
    print(f"({n_min},{n_max}) eps=0: {base:.12f} eps=1e-9: {lim:.12f} rel {(lim-base)/base:+.2e}")

def svd_link_mc_eps(sh, kp, n, eps, frames=200_000, uses=10, seed=5):
    r = np.random.default_rng(seed)
    errors = 0
    bits_tot = 0
    pstream = kp / n
    for _ in range(frames):
        hh = (r.standard_normal((n, n)) + 1j*r.standard_normal((n, n)))/np.sqrt(2)
        w = (r.standard_normal((n, n)) + 1j*r.standard_normal((n, n)))/np.sqrt(2)
        h = np.sqrt(1-eps)*hh + np.sqrt(eps)*w
        uh, s, vhh = np.linalg.svd(hh)
        g = uh.conj().T @ h @ vhh.conj().T
        bits = r.integers(0, 2, (n, uses, sh.bits))
        x = np.stack([modulate(bits[i], sh) for i in range(n)]) * np.sqrt(pstream)
        noise = (r.standard_normal((n, uses)) + 1j*r.standard_normal((n, uses)))/np.sqrt(2)
        y = g @ x + noise
        for i in range(n):
            gain = g[i, i]
            back = demodulate(y[i], gain if abs(gain) > 0 else 0.0, np.sqrt(pstream), sh)
            errors += np.sum(back != bits[i])
            bits_tot += bits[i].size
    return errors / bits_tot, bits_tot

for eps in [0.05, 0.2]:
    for kp in [30.0]:
        cf = svd_avg_ber(sh, kp, 2, 2, eps)
        mc, nb = svd_link_mc_eps(sh, kp, 2, eps)
        se = np.sqrt(mc*(1-mc)/nb)
        print(f"eps={eps} KP={kp}: closed {cf:.6f} linkMC {mc:.6f} (se {se:.2e}) rel {(mc-cf)/cf:+.3%}")
