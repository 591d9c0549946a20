"""NumPy fallback for the RK4 kernels (same signatures as the compiled module).

A polynomial field is given by an exponent matrix ``E`` (m×d, int64) and a
coefficient matrix ``C`` (m×d): ``f(x) = Σ_r C[r] Π_j x_j^{E[r, j]}``.
"""
import numpy as np


def eval_field(E, C, x):
    mon = np.prod(np.power(x[None, :], E), axis=1)
    return mon @ C


def _inside(x, lo, hi):
    return bool(np.all(x >= lo) and np.all(x <= hi) and np.all(np.isfinite(x)))


def _rk4(E, C, x, M, lo, hi):
    h = 1.0 / M
    for _ in range(M):
        k1 = eval_field(E, C, x)
        k2 = eval_field(E, C, x + 0.5 * h * k1)
        k3 = eval_field(E, C, x + 0.5 * h * k2)
        k4 = eval_field(E, C, x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not _inside(x, lo, hi):
            return x, False
    return x, True


def rk4_chain(E, Cs, x0, M, lo, hi):
    """Apply the unit-time RK4 flows of ``Cs[0], Cs[1], ...`` in sequence.

    Returns ``(states, status)``: ``states[j]`` is the point before step ``j``
    and ``status`` is the first step that left the box, or -1.
    """
    E = np.asarray(E, dtype=np.int64)
    Cs = np.asarray(Cs, dtype=np.float64)
    x = np.array(x0, dtype=np.float64)
    n = Cs.shape[0]
    states = np.empty((n + 1, x.shape[0]))
    states[0] = x
    for j in range(n):
        x, ok = _rk4(E, Cs[j], x, M, lo, hi)
        states[j + 1] = x
        if not ok:
            states[j + 2:] = np.nan
            return states, j
    return states, -1


def rk4_many(E, Cs, X0, M, lo, hi):
    """Independent unit-time flows: ``out[j] = flow(Cs[j])(X0[j])``; status -1 or 0 per row."""
    E = np.asarray(E, dtype=np.int64)
    Cs = np.asarray(Cs, dtype=np.float64)
    X0 = np.asarray(X0, dtype=np.float64)
    out = np.empty_like(X0)
    status = np.full(X0.shape[0], -1, dtype=np.int64)
    for j in range(X0.shape[0]):
        out[j], ok = _rk4(E, Cs[j], X0[j], M, lo, hi)
        if not ok:
            status[j] = 0
    return out, status
