"""Compiled inner loops and worker-count control.

The update is Jacobi style: every new value is computed from the previous
field only, and each parallel iteration writes exclusively to its own slot.
That makes trajectories bit-identical for any thread count, which is the
contract the WAVEGATES_WORKERS environment variable relies on. The health
reductions (max magnitude, NaN count) are order-independent, so they are
deterministic too.
"""

from __future__ import annotations

import os
import warnings

_env_workers = os.environ.get("WAVEGATES_WORKERS")
if _env_workers and "NUMBA_NUM_THREADS" not in os.environ:
    # numba sizes its pool at import; make room before that happens
    try:
        _requested = max(1, int(_env_workers))
        os.environ["NUMBA_NUM_THREADS"] = str(max(_requested, os.cpu_count() or 1))
    except ValueError:
        pass

# the portable threading layer starts without probing TBB/OpenMP; results
# are layer-independent, so this only affects startup noise
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    import numba
    from numba import njit, prange


def configure_workers() -> int:
    """Apply WAVEGATES_WORKERS (if set) to the numba thread pool.

    Only throughput may change; results never do. Returns the count in use.
    """
    raw = os.environ.get("WAVEGATES_WORKERS")
    if raw:
        try:
            requested = max(1, int(raw))
        except ValueError:
            requested = 1
        numba.set_num_threads(min(requested, numba.config.NUMBA_NUM_THREADS))
    return numba.get_num_threads()


@njit(parallel=True, cache=True)
def fhn_step(u, v, u_next, v_next, neighbors, i_ext, dt, inv_dx2, d_u, a, b, c1, c2):
    """One explicit Euler step over the compacted conductive nodes.

    neighbors[k, j] is the compact index of the j-th 4-neighbor of node k,
    or -1 where the neighbor is absent or non-conductive; absent neighbors
    contribute nothing, which realizes the no-flux boundary.

    Returns (max |u,v| over the new state, count of NaNs produced).
    """
    n = u.shape[0]
    worst = 0.0
    bad = 0
    for k in prange(n):
        uk = u[k]
        acc = 0.0
        for j in range(4):
            m = neighbors[k, j]
            if m >= 0:
                acc += u[m] - uk
        lap = acc * inv_dx2
        un = uk + dt * (
            c1 * uk * (uk - a) * (1.0 - uk) - c2 * uk * v[k] + i_ext[k] + d_u * lap
        )
        vn = v[k] + dt * (b * (uk - v[k]))
        u_next[k] = un
        v_next[k] = vn
        if un != un or vn != vn:
            bad += 1
        au = abs(un)
        av = abs(vn)
        m2 = au if au > av else av
        worst = max(worst, m2)
    return worst, bad


@njit(parallel=True, cache=True)
def fhn_step_nostim(u, v, u_next, v_next, neighbors, dt, inv_dx2, d_u, a, b, c1, c2):
    """fhn_step without the external-current gather; the common hot path."""
    n = u.shape[0]
    worst = 0.0
    bad = 0
    for k in prange(n):
        uk = u[k]
        acc = 0.0
        for j in range(4):
            m = neighbors[k, j]
            if m >= 0:
                acc += u[m] - uk
        lap = acc * inv_dx2
        un = uk + dt * (
            c1 * uk * (uk - a) * (1.0 - uk) - c2 * uk * v[k] + d_u * lap
        )
        vn = v[k] + dt * (b * (uk - v[k]))
        u_next[k] = un
        v_next[k] = vn
        if un != un or vn != vn:
            bad += 1
        au = abs(un)
        av = abs(vn)
        m2 = au if au > av else av
        worst = max(worst, m2)
    return worst, bad


@njit(parallel=True, cache=True)
def laplacian_all(u, neighbors, inv_dx2, out):
    """Masked five-node Laplacian of u at every conductive node."""
    n = u.shape[0]
    for k in prange(n):
        uk = u[k]
        acc = 0.0
        for j in range(4):
            m = neighbors[k, j]
            if m >= 0:
                acc += u[m] - uk
        out[k] = acc * inv_dx2


def warmup() -> None:
    """Force JIT compilation of all kernels on a toy problem."""
    import numpy as np

    u = np.zeros(4)
    v = np.zeros(4)
    nbr = -np.ones((4, 4), dtype=np.int32)
    nbr[0, 3] = 1
    nbr[1, 2] = 0
    fhn_step(u, v, u.copy(), v.copy(), nbr, u.copy(), 0.015, 0.25, 1.0, 0.13, 0.013, 0.26, 0.1)
    fhn_step_nostim(u, v, u.copy(), v.copy(), nbr, 0.015, 0.25, 1.0, 0.13, 0.013, 0.26, 0.1)
    laplacian_all(u, nbr, 0.25, u.copy())
