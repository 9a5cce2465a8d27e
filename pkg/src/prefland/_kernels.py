"""Hot numerical kernels, JIT-compiled with numba when available.

Set PREFLAND_NO_NUMBA=1 to force the pure numpy/Python fallbacks. Value
iteration uses only add/multiply/max, so both paths produce bit-identical
tables; the Metropolis chain consumes pre-drawn randomness, so a given seed
reproduces the same stream within either path.
"""
from __future__ import annotations

import os
import warnings

import numpy as np

_USE_NUMBA = not os.environ.get("PREFLAND_NO_NUMBA")
if _USE_NUMBA:
    try:
        with warnings.catch_warnings():
            warnings.filterwarnings("ignore", message="The TBB threading layer")
            import numba
            from numba import njit, prange

        # the default OpenMP layer is not fork-safe; session batches fork
        numba.config.THREADING_LAYER = "workqueue"
    except ImportError:
        _USE_NUMBA = False

if not _USE_NUMBA:
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

    prange = range


@njit(parallel=True, cache=True)
def _vi_sweeps_numba(r, nxt, discount, tolerance, cap):
    n_states, n_actions = r.shape
    q = np.zeros((n_states, n_actions))
    v = np.zeros(n_states)
    for sweep in range(cap):
        dv = 0.0
        for s in prange(n_states):
            best = q[s, 0]
            for a in range(1, n_actions):
                if q[s, a] > best:
                    best = q[s, a]
            dv = max(dv, abs(best - v[s]))
            v[s] = best
        for s in prange(n_states):
            for a in range(n_actions):
                q[s, a] = r[s, a] + discount * v[nxt[s, a]]
        # discount * dv bounds the sup-norm change of this sweep's Q update
        if sweep > 0 and discount * dv <= tolerance:
            return q, sweep + 1
    return q, -1


def _vi_sweeps_numpy(r, nxt, discount, tolerance, cap):
    q = np.zeros_like(r)
    v = np.zeros(r.shape[0])
    v_new = np.empty_like(v)
    for sweep in range(cap):
        np.max(q, axis=1, out=v_new)
        dv = np.abs(v_new - v).max()
        v, v_new = v_new, v
        np.take(v * discount, nxt, out=q)
        q += r
        if sweep > 0 and discount * dv <= tolerance:
            return q, sweep + 1
    return q, -1


def value_sweeps(r: np.ndarray, nxt: np.ndarray, discount: float,
                 tolerance: float, cap: int) -> tuple[np.ndarray, int]:
    """Synchronous Bellman sweeps until the sup-norm sweep change is within
    tolerance. Returns (q, sweeps); sweeps is -1 if the cap was hit."""
    r = np.ascontiguousarray(r, dtype=np.float64)
    nxt = np.ascontiguousarray(nxt, dtype=np.int32)
    if _USE_NUMBA:
        return _vi_sweeps_numba(r, nxt, discount, tolerance, cap)
    return _vi_sweeps_numpy(r, nxt, discount, tolerance, cap)


def _metropolis_chain(x0a, x0b, gg, cc, normals, log_unifs, warmup_steps,
                      sigma0, reg, scale, min_comp, burn_in, thinning, out):
    """Adaptive random-walk Metropolis in the 2-D free simplex coordinates.

    gg (n, 2) and cc (n,) encode each record's response-signed reward gap as
    an affine function of (alpha, beta). Proposal noise and acceptance draws
    come pre-generated in ``normals`` and ``log_unifs``. The proposal
    covariance follows the chain's running covariance scaled by ``scale``
    plus ``reg`` on the diagonal, after ``warmup_steps`` fixed-width steps.
    Thinned post-burn-in states are written to ``out``; returns the number of
    accepted moves after warm-up.
    """
    n_records = gg.shape[0]
    total = normals.shape[0]

    def log_post(a, b):
        g = 1.0 - a - b
        if a < min_comp or b < min_comp or g < min_comp:
            return -np.inf
        lp = 0.0
        for i in range(n_records):
            z = gg[i, 0] * a + gg[i, 1] * b + cc[i]
            # log sigmoid(z), stable for large |z|
            if z > 0.0:
                lp -= np.log1p(np.exp(-z))
            else:
                lp += z - np.log1p(np.exp(z))
        return lp

    xa, xb = x0a, x0b
    lp_cur = log_post(xa, xb)
    # running mean / scatter for the adaptive covariance
    count = 1.0
    mean_a, mean_b = xa, xb
    s_aa = 0.0
    s_ab = 0.0
    s_bb = 0.0
    accepted = 0
    kept = 0
    for t in range(total):
        if t < warmup_steps or count < 3.0:
            l11 = sigma0
            l21 = 0.0
            l22 = sigma0
        else:
            denom = count - 1.0
            c11 = scale * (s_aa / denom + reg)
            c12 = scale * (s_ab / denom)
            c22 = scale * (s_bb / denom + reg)
            l11 = np.sqrt(c11)
            l21 = c12 / l11
            l22 = np.sqrt(max(c22 - l21 * l21, reg * scale))
        pa = xa + l11 * normals[t, 0]
        pb = xb + l21 * normals[t, 0] + l22 * normals[t, 1]
        lp_prop = log_post(pa, pb)
        if log_unifs[t] <= lp_prop - lp_cur:
            xa, xb = pa, pb
            lp_cur = lp_prop
            if t >= warmup_steps:
                accepted += 1
        count += 1.0
        da = xa - mean_a
        db = xb - mean_b
        mean_a += da / count
        mean_b += db / count
        s_aa += da * (xa - mean_a)
        s_ab += da * (xb - mean_b)
        s_bb += db * (xb - mean_b)
        if t >= burn_in and (t - burn_in) % thinning == thinning - 1:
            out[kept, 0] = xa
            out[kept, 1] = xb
            kept += 1
    return accepted


metropolis_chain = njit(cache=True)(_metropolis_chain) if _USE_NUMBA else _metropolis_chain
