"""Pure numpy implementation of the hot evaluation kernels.

Every routine takes the structure data of a finite-order function

    E(z) = kappa * exp(-i a z) * prod_k (z - z_k),    Im z_k < 0,

as plain arrays (``a`` real, ``zeros`` complex, phase/log-modulus of kappa as
floats) so that the compiled twin in ``_ckernels`` can share the signatures.
"""

import numpy as np

__all__ = ["log_theta", "log_abs_e", "arg_e", "s_matrix", "clog1p", "cexpm1"]

TWO_PI = 2.0 * np.pi


def clog1p(u):
    """Accurate complex ``log(1 + u)``, also for tiny ``|u|``."""
    u = np.asarray(u, dtype=complex)
    x, y = u.real, u.imag
    small = np.abs(u) < 0.5
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        re_small = 0.5 * np.log1p(x * (2.0 + x) + y * y)
        re_big = np.log(np.hypot(1.0 + x, y))
    re = np.where(small, re_small, re_big)
    return re + 1j * np.arctan2(y, 1.0 + x)


def cexpm1(g):
    """Accurate complex ``exp(g) - 1``, also for tiny ``|g|``."""
    g = np.asarray(g, dtype=complex)
    x, y = g.real, g.imag
    with np.errstate(over="ignore", invalid="ignore"):
        s_half = np.sin(0.5 * y)
        re = np.expm1(x) * np.cos(y) - 2.0 * s_half * s_half
        im = np.exp(x) * np.sin(y)
    return re + 1j * im


def _wrap(phi):
    return np.mod(phi + np.pi, TWO_PI) - np.pi


def log_theta(z, a, zeros, phase0):
    """Return ``log Theta(z)`` for ``Theta = E^# / E``.

    The real part is accumulated through ``log1p`` of the exact modulus
    defect of each Blaschke factor, so ``1 - |Theta|`` keeps full relative
    precision near the real axis and at large height.
    """
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    re = -2.0 * a * y
    im = phase0 + 2.0 * a * x
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for zk in np.asarray(zeros, dtype=complex).ravel():
            p, q = zk.real, -zk.imag
            dx = x - p
            den = dx * dx + (y + q) * (y + q)
            re = re + 0.5 * np.log1p(-4.0 * y * q / den)
            # 1 + u with u = -2iq/(z - z_k)
            u = -2j * q / (z - zk)
            im = im + np.arctan2(u.imag, 1.0 + u.real)
    im = _wrap(im)
    return re + 1j * im


def log_abs_e(z, a, zeros, logk):
    """Return ``log|E(z)|``."""
    z = np.asarray(z, dtype=complex)
    out = logk + a * z.imag
    with np.errstate(divide="ignore"):
        for zk in np.asarray(zeros, dtype=complex).ravel():
            out = out + np.log(np.hypot(z.real - zk.real, z.imag - zk.imag))
    return out + np.zeros(z.shape)


def arg_e(z, a, zeros, argk):
    """Return ``arg E(z)`` reduced to ``(-pi, pi]``."""
    z = np.asarray(z, dtype=complex)
    out = argk - _wrap(a * z.real)
    for zk in np.asarray(zeros, dtype=complex).ravel():
        out = out + np.arctan2(z.imag - zk.imag, z.real - zk.real)
    return _wrap(out + np.zeros(z.shape))


def _root_slope(c, a, zeros, phase0):
    """``Theta'(c)`` at a zero ``c`` of ``Theta``."""
    hit = zeros.conj() == c
    if np.count_nonzero(hit) > 1:
        return 0j
    rest = zeros[~hit]
    lt = log_theta(np.array([c]), a, rest, phase0)[0]
    return np.exp(lt) / (c - zeros[hit][0])


def s_matrix(w, z, a, zeros, phase0):
    """Reduced reproducing-kernel factor ``s(w_j, z_i)`` as an (nz, nw) array.

    For ``Im w >= 0`` this is ``(1 - conj(Theta(w)) Theta(z)) / (conj(w) - z)``;
    for ``Im w < 0`` it is ``(Theta(c) - Theta(z)) / (c - z)`` with
    ``c = conj(w)``. Both are written as ``F * expm1(g) / h`` where
    ``h = z - c`` and ``g = log Theta(z) - log Theta(c)`` is assembled from
    ``log1p`` terms, so no exponential of a large quantity ever forms.
    """
    w = np.atleast_1d(np.asarray(w, dtype=complex)).ravel()
    z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    zeros = np.asarray(zeros, dtype=complex).ravel()
    c = np.conj(w)
    lower = w.imag < 0
    h = z[:, None] - c[None, :]
    g = 2j * a * h
    deriv = np.full(w.size, 2j * a)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if zeros.size:
            # all nodes and zeros at once: (zeros, points, nodes)
            cb = c[None, :] - np.conj(zeros)[:, None]
            cz = c[None, :] - zeros[:, None]
            g = g + np.sum(clog1p(h[None] / cb[:, None]) - clog1p(h[None] / cz[:, None]),
                           axis=0)
            deriv = deriv + np.sum(1.0 / cb - 1.0 / cz, axis=0)
        out = cexpm1(g) / h
        out = np.where(h == 0, deriv[None, :], out)
        if np.any(lower):
            # Theta(c) (exp(g) - 1) / h, or Theta(z) (1 - exp(-g)) / h when
            # |Theta(z)| > |Theta(c)|, so no overflow meets an underflow
            ltc = log_theta(c[lower], a, zeros, phase0)[None, :]
            gl, hl = g[:, lower], h[:, lower]
            up = gl.real > 0
            val = np.where(up, -cexpm1(-gl) * np.exp(ltc + np.where(up, gl, 0)),
                           cexpm1(gl) * np.exp(ltc)) / hl
            val = np.where(hl == 0, deriv[None, lower] * np.exp(ltc), val)
            # Theta(z) = 0 exactly at its zeros
            at_zero = np.isin(z, np.conj(zeros))[:, None] & (hl != 0)
            val = np.where(at_zero, -np.exp(ltc) / hl, val)
            out[:, lower] = val
    # nodes sitting exactly on a zero of E or of Theta
    for j in range(w.size):
        if lower[j] and np.any(c[j] == np.conj(zeros)):
            with np.errstate(divide="ignore", invalid="ignore"):
                th = np.exp(log_theta(z, a, zeros, phase0)) / h[:, j]
            out[:, j] = np.where(h[:, j] == 0, _root_slope(c[j], a, zeros, phase0), th)
        elif not lower[j] and np.any(c[j] == zeros):
            out[:, j] = -1.0 / h[:, j]
    return out
