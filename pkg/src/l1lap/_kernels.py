"""Inner-loop kernels, each with a numba and a pure-numpy implementation.

The numba versions are used when numba imports and the environment variable
``L1LAP_DISABLE_NUMBA`` is unset or ``0``. :func:`set_backend` switches at
runtime; callers must look kernels up through this module
(``_kernels.pgs_update(...)``) for the switch to take effect.
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

def pgs_update_np(x, g, inv_beta, delta):
    return np.maximum(delta, x * np.exp(-inv_beta * g))


def ags_update_np(x, x0, g, cum, alpha, inv_beta, delta, tau, entropic):
    cum = cum + alpha * g
    if entropic:
        y = np.maximum(delta, x - x * inv_beta * g)
        z = np.maximum(delta, x0 - x0 * inv_beta * cum)
    else:
        y = np.maximum(delta, x - inv_beta * g)
        z = np.maximum(delta, x0 - inv_beta * cum)
    # the mix can round an ulp below delta when y = z = delta
    return y, z, np.maximum(delta, tau * z + (1.0 - tau) * y), cum


def pcg_np(A, x, rhs, p0, tol, maxiter):
    """Jacobi-preconditioned CG on ``A diag(x) A^T p = rhs``, matrix-free.

    Returns ``(p, iterations, relative_residual)``.
    """
    diag = (A * A) @ x
    p = p0.copy()
    r = rhs - A @ (x * (A.T @ p))
    rnorm0 = np.linalg.norm(rhs)
    if rnorm0 == 0.0:
        return np.zeros_like(p), 0, 0.0
    z = r / diag
    d = z.copy()
    rz = r @ z
    it = 0
    res = np.linalg.norm(r) / rnorm0
    while res > tol and it < maxiter:
        Ld = A @ (x * (A.T @ d))
        step = rz / (d @ Ld)
        p += step * d
        r -= step * Ld
        z = r / diag
        rz_new = r @ z
        d = z + (rz_new / rz) * d
        rz = rz_new
        it += 1
        res = np.linalg.norm(r) / rnorm0
    return p, it, res


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if numba is not None:

    @numba.njit(cache=True)
    def pgs_update_nb(x, g, inv_beta, delta):
        out = np.empty_like(x)
        for j in range(x.shape[0]):
            v = x[j] * np.exp(-inv_beta * g[j])
            out[j] = v if v > delta else delta
        return out

    @numba.njit(cache=True)
    def ags_update_nb(x, x0, g, cum, alpha, inv_beta, delta, tau, entropic):
        m = x.shape[0]
        y = np.empty(m)
        z = np.empty(m)
        xn = np.empty(m)
        cum_new = np.empty(m)
        for j in range(m):
            c = cum[j] + alpha * g[j]
            cum_new[j] = c
            if entropic:
                yj = x[j] - x[j] * inv_beta * g[j]
                zj = x0[j] - x0[j] * inv_beta * c
            else:
                yj = x[j] - inv_beta * g[j]
                zj = x0[j] - inv_beta * c
            yj = yj if yj > delta else delta
            zj = zj if zj > delta else delta
            y[j] = yj
            z[j] = zj
            xj = tau * zj + (1.0 - tau) * yj
            xn[j] = xj if xj > delta else delta
        return y, z, xn, cum_new

    @numba.njit(cache=True)
    def _lap_matvec(A, x, v, out):
        # np.dot dispatches to BLAS gemv inside numba
        out[:] = np.dot(A, x * np.dot(v, A))

    @numba.njit(cache=True)
    def pcg_nb(A, x, rhs, p0, tol, maxiter):
        n = A.shape[0]
        diag = np.dot(A * A, x)
        Ld = np.empty(n)
        p = p0.copy()
        _lap_matvec(A, x, p, Ld)
        r = rhs - Ld
        rnorm0 = np.sqrt(np.dot(rhs, rhs))
        if rnorm0 == 0.0:
            return np.zeros(n), 0, 0.0
        z = r / diag
        d = z.copy()
        rz = np.dot(r, z)
        it = 0
        res = np.sqrt(np.dot(r, r)) / rnorm0
        while res > tol and it < maxiter:
            _lap_matvec(A, x, d, Ld)
            step = rz / np.dot(d, Ld)
            for i in range(n):
                p[i] += step * d[i]
                r[i] -= step * Ld[i]
                z[i] = r[i] / diag[i]
            rz_new = np.dot(r, z)
            beta = rz_new / rz
            for i in range(n):
                d[i] = z[i] + beta * d[i]
            rz = rz_new
            it += 1
            res = np.sqrt(np.dot(r, r)) / rnorm0
        return p, it, res

else:  # pragma: no cover
    pgs_update_nb = ags_update_nb = pcg_nb = None


_IMPLS = {
    "numpy": (pgs_update_np, ags_update_np, pcg_np),
    "numba": (pgs_update_nb, ags_update_nb, pcg_nb),
}

BACKEND = None
pgs_update = ags_update = pcg = None


def available_backends():
    return [name for name, impl in _IMPLS.items() if impl[0] is not None]


def set_backend(name):
    """Select ``"numba"`` or ``"numpy"`` kernels for subsequent calls."""
    global BACKEND, pgs_update, ags_update, pcg
    if name not in available_backends():
        raise ValueError(f"kernel backend {name!r} is not available")
    BACKEND = name
    pgs_update, ags_update, pcg = _IMPLS[name]


def _default_backend():
    flag = os.environ.get("L1LAP_DISABLE_NUMBA", "").strip().lower()
    if flag not in ("", "0", "false", "no") or numba is None:
        return "numpy"
    return "numba"


set_backend(_default_backend())
