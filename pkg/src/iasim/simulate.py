"""Monte Carlo link-level engine.

Each frame: draw a channel realization from its own counter-based
substream, design transceivers (and bit allocations, when loading) from
the transmitter-side estimates, push random data through the TRUE
channels with unit-variance complex AWGN, and count bit errors after
nearest-neighbor detection.  Residual cross-interference is physically
present in the received samples; receivers equalize by the true effective
scalar of their own stream only.

Frames are independent, so any partitioning across workers reproduces
the serial counts exactly.
"""

import concurrent.futures
from dataclasses import dataclass, replace

import numpy as np

from . import bitload
from .bitload import (MODE_MAXSINR, MODE_MINIL, MODE_SVD,
                      greedy_bitload_table)
from .modem import (BerEstimate, ber_awgn_instant, minil_avg_ber,
                    shape_for_bits, svd_avg_ber, modulate, demodulate)
from .network import NetworkConfig, complex_normal, substream
from .solvers import cross_gains, maxsinr_solve_batch, minil_solve_batch
from .linalg import unit

MODE_ADAPTIVE = "adaptive"
RUN_MODES = (MODE_MINIL, MODE_MAXSINR, MODE_SVD, MODE_ADAPTIVE)
FRAME_USES = 100  # symbols per stream per frame


def check_mode_config(cfg: NetworkConfig, mode: str, loading: bool):
    """Reject configurations a mode cannot carry, before any frame runs."""
    if mode not in RUN_MODES:
        raise ValueError(f"unknown mode {mode!r}")
    r = cfg.total_rate
    if mode in (MODE_MINIL, MODE_MAXSINR) or mode == MODE_ADAPTIVE:
        if loading or mode == MODE_ADAPTIVE:
            bitload.check_rate_budget(cfg.k_pairs, r)
        elif cfg.rate_per_pair > bitload.MAX_BITS_PER_CHANNEL:
            raise ValueError(
                f"rate_per_pair {cfg.rate_per_pair} exceeds the supported "
                f"{bitload.MAX_BITS_PER_CHANNEL} bits per channel")
    if mode in (MODE_SVD, MODE_ADAPTIVE):
        if loading or mode == MODE_ADAPTIVE:
            bitload.check_rate_budget(cfg.n_min, r)
        else:
            if r % cfg.n_min:
                raise ValueError(
                    f"network rate {r} is not divisible by "
                    f"n_min={cfg.n_min}; the equal-rate benchmark "
                    "requires divisibility")
            if r // cfg.n_min > bitload.MAX_BITS_PER_CHANNEL:
                raise ValueError(
                    f"{r // cfg.n_min} bits per eigenmode exceeds the "
                    f"supported {bitload.MAX_BITS_PER_CHANNEL}")


def _transmit(gains: np.ndarray, bits_per_ch: np.ndarray,
              powers: np.ndarray, rng: np.random.Generator,
              uses: int) -> tuple[np.ndarray, np.ndarray]:
    """Send one frame over an effective n x n scalar-gain network.

    gains[i, j] couples transmit stream j into receive stream i.  Returns
    (bits_sent, bit_errors) per stream.  Draw order: data bits per stream
    in index order, then one noise block.
    """
    n = gains.shape[0]
    x = np.zeros((n, uses), dtype=complex)
    tx_bits = []
    for i in range(n):
        b = int(bits_per_ch[i])
        if b > 0:
            data = rng.integers(0, 2, size=(uses, b))
            x[i] = modulate(data, shape_for_bits(b))
        else:
            data = None
        tx_bits.append(data)
    noise = complex_normal(rng, (n, uses))
    amps = np.sqrt(powers)
    r = gains @ (amps[:, None] * x) + noise

    sent = np.zeros(n, dtype=np.int64)
    errors = np.zeros(n, dtype=np.int64)
    for i in range(n):
        b = int(bits_per_ch[i])
        if b == 0:
            continue
        g = gains[i, i]
        rx = demodulate(r[i], g if abs(g) > 0 else 0.0, float(amps[i]),
                        shape_for_bits(b))
        sent[i] = uses * b
        errors[i] = int(np.sum(rx != tx_bits[i]))
    return sent, errors


def _sample_frames(cfg: NetworkConfig, frame_indices):
    """Per-frame substreams and their channel draws, in draw order."""
    rngs = [substream(cfg.seed, int(i)) for i in frame_indices]
    f = len(rngs)
    shape = (cfg.k_pairs, cfg.k_pairs, cfg.nr, cfg.nt)
    h_hat = np.empty((f,) + shape, dtype=complex)
    w = np.empty_like(h_hat)
    for i, rng in enumerate(rngs):
        h_hat[i] = complex_normal(rng, shape)
        w[i] = complex_normal(rng, shape)
    h = np.sqrt(1.0 - cfg.epsilon) * h_hat + np.sqrt(cfg.epsilon) * w
    return rngs, h_hat, h


def _draw_inits(cfg, rngs, want_minil: bool, want_maxsinr: bool):
    f = len(rngs)
    init_m = np.empty((f, cfg.k_pairs, cfg.nt), dtype=complex)
    init_x = np.empty_like(init_m)
    for i, rng in enumerate(rngs):
        if want_minil:
            init_m[i] = unit(complex_normal(rng, (cfg.k_pairs, cfg.nt)))
        if want_maxsinr:
            init_x[i] = unit(complex_normal(rng, (cfg.k_pairs, cfg.nt)))
    return init_m, init_x


def _ia_ber_table(gains_sq: np.ndarray, kp: float, r: int) -> np.ndarray:
    """Per-channel BER lookup for greedy loading, (F, n, max_bits)."""
    maxb = min(r, bitload.MAX_BITS_PER_CHANNEL)
    f, n = gains_sq.shape
    table = np.empty((f, n, maxb))
    for b in range(1, maxb + 1):
        table[:, :, b - 1] = ber_awgn_instant(
            shape_for_bits(b), gains_sq * (kp / r) * b)
    return table


def _predicted_from_bits(bits: np.ndarray, snr_of_bit, r: int) -> np.ndarray:
    """(1/R) sum_i ber(shape(b_i), snr_of_bit(i, b_i)) * b_i, batched."""
    f, n = bits.shape
    pred = np.zeros(f)
    for b in range(1, bitload.MAX_BITS_PER_CHANNEL + 1):
        mask = bits == b
        if not np.any(mask):
            continue
        snr = snr_of_bit(mask, b)
        contrib = ber_awgn_instant(shape_for_bits(b), snr) * b
        rows, _ = np.nonzero(mask)
        np.add.at(pred, rows, contrib)
    return pred / r


def _svd_of_direct(h_hat: np.ndarray, active: np.ndarray):
    """Batched SVD of each frame's active direct channel estimate."""
    f = h_hat.shape[0]
    mats = h_hat[np.arange(f), active, active]
    u, s, vh = np.linalg.svd(mats)
    return u, s, vh


@dataclass
class _FrameDesign:
    """Everything decided from transmitter-side knowledge for one batch."""

    mode_per_frame: list
    ia_u: np.ndarray | None
    ia_v: np.ndarray | None
    ia_bits: np.ndarray | None
    ia_powers: np.ndarray | None
    sm_u: np.ndarray | None
    sm_vh: np.ndarray | None
    sm_bits: np.ndarray | None
    sm_powers: np.ndarray | None
    predicted: np.ndarray | None
    audit_bits: np.ndarray | None


def _design_batch(cfg: NetworkConfig, mode: str, loading: bool,
                  rngs, h_hat, active) -> _FrameDesign:
    f = len(rngs)
    k = cfg.k_pairs
    kp = k * cfg.power_p
    r = cfg.total_rate
    adaptive = mode == MODE_ADAPTIVE
    want_minil = mode == MODE_MINIL or adaptive
    want_maxsinr = mode == MODE_MAXSINR or adaptive
    want_svd = mode == MODE_SVD or adaptive
    init_m, init_x = _draw_inits(cfg, rngs, want_minil, want_maxsinr)

    ia_u = ia_v = ia_bits = ia_powers = None
    sm_u = sm_vh = sm_bits = sm_powers = None
    predicted = audit_bits = None

    sol_m = sol_x = None
    pred_m = pred_x = pred_s = None
    bits_m = bits_x = bits_s = None

    if want_minil:
        sol_m = minil_solve_batch(h_hat, cfg.power_p, cfg.iterations, init_m)
        if loading or adaptive:
            table = _ia_ber_table(np.abs(sol_m.z) ** 2, kp, r)
            bits_m = greedy_bitload_table(table, r)
            taken = np.take_along_axis(table, np.maximum(bits_m, 1)[..., None] - 1,
                                       axis=2)[..., 0]
            pred_m = (taken * bits_m).sum(axis=1) / r

    if want_maxsinr:
        sol_x = maxsinr_solve_batch(h_hat, cfg.power_p, cfg.iterations, init_x)
        if loading or adaptive:
            table = _ia_ber_table(sol_x.sinr / cfg.power_p, kp, r)
            bits_x = greedy_bitload_table(table, r)
            # One re-design pass under the loaded powers, warm-started.
            powers_x = kp / r * bits_x
            sol_x = maxsinr_solve_batch(h_hat, powers_x, cfg.iterations,
                                        sol_x.v)
            pred_x = _predicted_from_bits(
                bits_x, lambda m, b: sol_x.sinr[m], r)

    if want_svd:
        sm_u, sm_s, sm_vh = _svd_of_direct(h_hat, active)
        if loading or adaptive:
            table = _ia_ber_table(sm_s[:, : cfg.n_min] ** 2, kp, r)
            bits_s = greedy_bitload_table(table, r)
            taken = np.take_along_axis(table, np.maximum(bits_s, 1)[..., None] - 1,
                                       axis=2)[..., 0]
            pred_s = (taken * bits_s).sum(axis=1) / r

    if adaptive:
        # Tie order: Max-SINR, then SVD-SM, then MinIL (argmin keeps first).
        stack = np.stack([pred_x, pred_s, pred_m])
        choice = np.argmin(stack, axis=0)
        mode_per_frame = [(MODE_MAXSINR, MODE_SVD, MODE_MINIL)[c]
                          for c in choice]
        predicted = stack[choice, np.arange(f)]
    else:
        mode_per_frame = [mode] * f

    # Assemble per-frame IA design (MinIL or Max-SINR frames).
    if sol_m is not None or sol_x is not None:
        nr, nt = cfg.nr, cfg.nt
        ia_u = np.zeros((f, k, nr), dtype=complex)
        ia_v = np.zeros((f, k, nt), dtype=complex)
        ia_bits = np.zeros((f, k), dtype=int)
        ia_powers = np.zeros((f, k))
        for i, m in enumerate(mode_per_frame):
            if m == MODE_MINIL:
                sol, bits = sol_m, bits_m
            elif m == MODE_MAXSINR:
                sol, bits = sol_x, bits_x
            else:
                continue
            ia_u[i] = sol.u[i]
            ia_v[i] = sol.v[i]
            if loading or adaptive:
                ia_bits[i] = bits[i]
                ia_powers[i] = kp / r * bits[i]
            else:
                ia_bits[i] = cfg.rate_per_pair
                ia_powers[i] = cfg.power_p

    if sm_u is not None:
        n_min = cfg.n_min
        sm_bits = np.zeros((f, n_min), dtype=int)
        sm_powers = np.zeros((f, n_min))
        for i, m in enumerate(mode_per_frame):
            if m != MODE_SVD:
                continue
            if loading or adaptive:
                sm_bits[i] = bits_s[i]
                sm_powers[i] = kp / r * bits_s[i]
            else:
                sm_bits[i] = r // n_min
                sm_powers[i] = kp / n_min

    if loading or adaptive:
        audit = np.zeros((f, max(k, cfg.n_min)), dtype=int)
        for i, m in enumerate(mode_per_frame):
            row = {MODE_MINIL: bits_m, MODE_MAXSINR: bits_x,
                   MODE_SVD: bits_s}[m][i]
            audit[i, : len(row)] = row
        audit_bits = audit
        if predicted is None:
            predicted = {MODE_MINIL: pred_m, MODE_MAXSINR: pred_x,
                         MODE_SVD: pred_s}[mode]

    return _FrameDesign(mode_per_frame=mode_per_frame, ia_u=ia_u, ia_v=ia_v,
                        ia_bits=ia_bits, ia_powers=ia_powers, sm_u=sm_u,
                        sm_vh=sm_vh, sm_bits=sm_bits, sm_powers=sm_powers,
                        predicted=predicted, audit_bits=audit_bits)


def run_frames(cfg: NetworkConfig, mode: str, frame_indices,
               loading: bool = False, uses: int = FRAME_USES,
               audit: list | None = None) -> np.ndarray:
    """Simulate the given frames; returns (F, K, 2) bits/errors per pair.

    The active pair of the single-pair benchmark rotates with the frame
    index.  Counts are identical however frames are split across calls.
    """
    check_mode_config(cfg, mode, loading)
    frame_indices = [int(i) for i in frame_indices]
    if not frame_indices:
        return np.zeros((0, cfg.k_pairs, 2), dtype=np.int64)
    rngs, h_hat, h = _sample_frames(cfg, frame_indices)
    active = np.array([i % cfg.k_pairs for i in frame_indices])
    design = _design_batch(cfg, mode, loading, rngs, h_hat, active)

    f = len(frame_indices)
    out = np.zeros((f, cfg.k_pairs, 2), dtype=np.int64)
    for i in range(f):
        m = design.mode_per_frame[i]
        rng = rngs[i]
        if m in (MODE_MINIL, MODE_MAXSINR):
            gains = cross_gains(h[i], design.ia_u[i], design.ia_v[i])
            sent, errors = _transmit(gains, design.ia_bits[i],
                                     design.ia_powers[i], rng, uses)
            out[i, :, 0] = sent
            out[i, :, 1] = errors
        else:
            a = active[i]
            n_min = cfg.n_min
            geff = (design.sm_u[i].conj().T @ h[i, a, a]
                    @ design.sm_vh[i].conj().T)[:n_min, :n_min]
            sent, errors = _transmit(geff, design.sm_bits[i],
                                     design.sm_powers[i], rng, uses)
            out[i, a, 0] = sent.sum()
            out[i, a, 1] = errors.sum()
        if audit is not None:
            pred = (design.predicted[i] if design.predicted is not None
                    else float("nan"))
            bits_row = (design.audit_bits[i] if design.audit_bits is not None
                        else (design.ia_bits[i] if m != MODE_SVD
                              else design.sm_bits[i]))
            audit.append({"frame": frame_indices[i], "mode": m,
                          "bits": list(map(int, bits_row)),
                          "predicted_ber": float(pred)})
    return out


def run_frame(cfg: NetworkConfig, mode: str, frame_rng: np.random.Generator,
              loading: bool = False, uses: int = FRAME_USES,
              active_pair: int = 0) -> np.ndarray:
    """Simulate one frame from an explicit stream; returns (K, 2) counts."""
    check_mode_config(cfg, mode, loading)
    state = frame_rng
    # Reuse the batch machinery with a single-frame "substream".
    k = cfg.k_pairs
    shape = (k, k, cfg.nr, cfg.nt)
    h_hat = complex_normal(state, shape)[None]
    w = complex_normal(state, shape)[None]
    h = np.sqrt(1.0 - cfg.epsilon) * h_hat + np.sqrt(cfg.epsilon) * w
    design = _design_batch(cfg, mode, loading, [state], h_hat,
                           np.array([active_pair]))
    m = design.mode_per_frame[0]
    out = np.zeros((k, 2), dtype=np.int64)
    if m in (MODE_MINIL, MODE_MAXSINR):
        gains = cross_gains(h[0], design.ia_u[0], design.ia_v[0])
        sent, errors = _transmit(gains, design.ia_bits[0],
                                 design.ia_powers[0], state, uses)
        out[:, 0] = sent
        out[:, 1] = errors
    else:
        n_min = cfg.n_min
        geff = (design.sm_u[0].conj().T @ h[0, active_pair, active_pair]
                @ design.sm_vh[0].conj().T)[:n_min, :n_min]
        sent, errors = _transmit(geff, design.sm_bits[0],
                                 design.sm_powers[0], state, uses)
        out[active_pair, 0] = sent.sum()
        out[active_pair, 1] = errors.sum()
    return out


def _run_range(args):
    cfg, mode, start, stop, loading, uses = args
    counts = run_frames(cfg, mode, range(start, stop), loading, uses)
    return counts.sum(axis=1)


def estimate_ber(cfg: NetworkConfig, mode: str, snr_db: float,
                 target_errors: int = 200, max_bits: int = 20_000_000,
                 loading: bool = False, uses: int = FRAME_USES,
                 chunk_frames: int = 400, workers: int = 1) -> BerEstimate:
    """Accumulate frames until enough errors (or the bit cap) is reached.

    Deterministic for a fixed (cfg.seed, target_errors, max_bits,
    chunk_frames) regardless of worker count: stopping is evaluated at
    fixed chunk boundaries and every frame's counts depend only on its
    own substream.  The confidence interval is cluster-robust over
    frames, since all the bits of one frame share a channel draw.
    """
    power = 10.0 ** (snr_db / 10.0)
    cfg = replace(cfg, power_p=power)
    check_mode_config(cfg, mode, loading)
    per_frame = []
    bits = errors = 0
    start = 0
    while errors < target_errors and bits < max_bits:
        stop = start + chunk_frames
        if workers > 1:
            bounds = np.linspace(start, stop, workers + 1, dtype=int)
            jobs = [(cfg, mode, int(a), int(b), loading, uses)
                    for a, b in zip(bounds[:-1], bounds[1:]) if a < b]
            with concurrent.futures.ProcessPoolExecutor(workers) as pool:
                chunk = np.vstack(list(pool.map(_run_range, jobs)))
        else:
            chunk = run_frames(cfg, mode, range(start, stop), loading,
                               uses).sum(axis=1)
        per_frame.append(chunk)
        bits += int(chunk[:, 0].sum())
        errors += int(chunk[:, 1].sum())
        start = stop
    frames = np.vstack(per_frame)
    p_hat = errors / bits
    resid = frames[:, 1] - p_hat * frames[:, 0]
    ratio_var = float((resid**2).sum() / bits**2)
    return BerEstimate(bits_sent=bits, bit_errors=errors,
                       ratio_var=ratio_var)


def fig1_stats(cfg: NetworkConfig, p_grid, frames: int = 10_000) -> list:
    """Average desired-signal and interference power of the SINR design.

    For each power on the grid: mean |z|^2 and mean per-pair leakage over
    `frames` Monte Carlo frames, alongside the aligned-design baseline
    (unit power) and the matched-beamforming ceiling estimated by
    singular-value sampling of the same frames' direct channels.
    """
    rngs, h_hat, h = _sample_frames(cfg, range(frames))
    _, init_x = _draw_inits(cfg, rngs, False, True)
    k = cfg.k_pairs
    direct = h_hat[:, np.arange(k), np.arange(k)]
    smax = np.linalg.svd(direct.reshape(-1, cfg.nr, cfg.nt),
                         compute_uv=False)[:, 0]
    e_sigma_max_sq = float(np.mean(smax**2))
    rows = []
    for p in p_grid:
        sol = maxsinr_solve_batch(h_hat, float(p), cfg.iterations, init_x)
        rows.append({
            "power": float(p),
            "avg_desired_power": float(np.mean(np.abs(sol.z) ** 2)),
            "avg_interference": float(np.mean(sol.leakage)),
            "minil_baseline": 1.0,
            "beamforming_power": e_sigma_max_sq,
        })
    return rows


def analytic_ber(cfg: NetworkConfig, mode: str, snr_db: float,
                 loading: bool) -> float | None:
    """Closed-form average BER where one exists (unloaded MinIL / SVD-SM)."""
    if loading or mode not in (MODE_MINIL, MODE_SVD):
        return None
    p = 10.0 ** (snr_db / 10.0)
    if mode == MODE_MINIL:
        shape = shape_for_bits(cfg.rate_per_pair)
        return minil_avg_ber(shape, p, cfg.epsilon, cfg.k_pairs)
    if cfg.epsilon >= 1.0:
        return None
    shape = shape_for_bits(cfg.total_rate // cfg.n_min)
    return svd_avg_ber(shape, cfg.k_pairs * p, cfg.n_min, cfg.n_max,
                       cfg.epsilon)


def sweep(cfg: NetworkConfig, snr_grid, eps_grid, modes, loading_flags,
          target_errors: int = 200, max_bits: int = 20_000_000,
          uses: int = FRAME_USES, workers: int = 1) -> list:
    """Cross product of settings -> one BER estimate row per cell."""
    snr_grid = list(snr_grid)
    eps_grid = list(eps_grid)
    modes = list(modes)
    loading_flags = list(loading_flags)
    if not (snr_grid and eps_grid and modes and loading_flags):
        raise ValueError("sweep grids must be nonempty")
    rows = []
    for eps in eps_grid:
        cfg_e = replace(cfg, epsilon=float(eps))
        for mode in modes:
            for loading in loading_flags:
                if mode == MODE_ADAPTIVE and not loading:
                    continue  # adaptive is defined over the loaded modes
                for snr_db in snr_grid:
                    est = estimate_ber(cfg_e, mode, snr_db,
                                       target_errors=target_errors,
                                       max_bits=max_bits, loading=loading,
                                       uses=uses, workers=workers)
                    ana = analytic_ber(cfg_e, mode, snr_db, loading)
                    rows.append({
                        "mode": mode,
                        "loading": int(loading),
                        "K": cfg.k_pairs,
                        "nt": cfg.nt,
                        "nr": cfg.nr,
                        "snr_db": float(snr_db),
                        "epsilon": float(eps),
                        "bits": est.bits_sent,
                        "errors": est.bit_errors,
                        "ber": est.estimate,
                        "ci95": est.ci95,
                        "analytic_ber": ana,
                    })
    return rows
