"""Pure numpy implementations of the hot kernels.

Selected at import time when the compiled extension is unavailable (see
``backend.py``).  Semantics match ``_kernels.pyx``: both consume the same
pre-drawn random arrays, so spin trajectories agree across backends up to
floating-point rounding of the local-field reductions.
"""

from __future__ import annotations

import math

import numpy as np

NAME = "numpy"


def run_chain(bool_t, gauss_t, diag, const0, sigma, mm, gg, beta,
              perms, unifs, metropolis, m_out, e_out, sig_out, hist):
    """Run one block of single-spin heat-bath sweeps.

    Arguments mirror the compiled kernel: transposed pattern matrices
    (site-major), running overlaps mm/gg updated in place, one permutation
    and one uniform row per sweep.  Returns the number of accepted flips.
    """
    n = sigma.shape[0]
    nsweeps = perms.shape[0]
    inv_n = 1.0 / n
    accepted = 0
    for b in range(nsweeps):
        perm = perms[b]
        unif = unifs[b]
        for j in range(n):
            i = int(perm[j])
            si = float(sigma[i])
            h = (float(bool_t[i] @ mm) + float(gauss_t[i] @ gg) - si * diag[i]) * inv_n
            if metropolis:
                de = 2.0 * si * h
                if de <= 0.0:
                    prob = 1.0
                else:
                    x = beta * de
                    prob = 0.0 if x > 700.0 else math.exp(-x)
            else:
                x = 2.0 * beta * si * h
                if x > 700.0:
                    prob = 0.0
                elif x < -700.0:
                    prob = 1.0
                else:
                    prob = 1.0 / (1.0 + math.exp(x))
            if unif[j] < prob:
                delta = -2.0 * si
                sigma[i] = -sigma[i]
                mm += bool_t[i] * delta
                gg += gauss_t[i] * delta
                accepted += 1
        m_out[b] = mm
        e_out[b] = -(float(mm @ mm) + float(gg @ gg) - const0) * inv_n * 0.5
        if sig_out is not None:
            sig_out[b] = sigma
        if hist is not None:
            idx = 0
            for i in range(n):
                if sigma[i] > 0:
                    idx |= 1 << i
            hist[idx] += 1
    return accepted


_CHUNK_BITS = 14


def enum_logz(boolean, gaussian, coef, sub_b, sub_g):
    """log sum_sigma exp(coef * sum_rows (overlap^2 - sub)) over all 2^n states.

    Chunked vectorized enumeration with a streaming log-sum-exp merge.
    """
    n = boolean.shape[1] if boolean.size else gaussian.shape[1]
    total = 1 << n
    chunk = min(total, 1 << _CHUNK_BITS)
    bits = np.arange(n, dtype=np.int64)
    bt = boolean.T  # (n, k)
    gt = gaussian.T  # (n, p)
    mx = -math.inf
    acc = 0.0
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        signs = (((idx[:, None] >> bits[None, :]) & 1) * 2 - 1).astype(np.float64)
        expo = np.zeros(idx.shape[0])
        if bt.size:
            m = signs @ bt
            expo += (m * m - sub_b).sum(axis=1)
        if gt.size:
            g = signs @ gt
            expo += (g * g - sub_g).sum(axis=1)
        expo *= coef
        cmx = float(expo.max())
        csum = float(np.exp(expo - cmx).sum())
        if cmx > mx:
            acc = acc * math.exp(mx - cmx) + csum if acc else csum
            mx = cmx
        else:
            acc += csum * math.exp(cmx - mx)
    return mx + math.log(acc)
