"""High-precision reference values computed with mpmath."""

import mpmath as mp


def theta_mp(E, z):
    kappa = mp.mpc(E.scale.real, E.scale.imag)
    z = mp.mpc(z.real, z.imag)
    val = mp.conj(kappa) / kappa * mp.exp(2j * E.exp_coeff * z)
    for zk in E.zeros:
        zk = mp.mpc(zk.real, zk.imag)
        val *= (z - mp.conj(zk)) / (z - zk)
    return val


def s_mp(E, w, z, dps=60):
    """Reduced kernel factor straight from its defining quotient."""
    with mp.workdps(dps):
        wm = mp.mpc(w.real, w.imag)
        zm = mp.mpc(z.real, z.imag)
        c = mp.conj(wm)
        if w.imag >= 0:
            return complex((1 - mp.conj(theta_mp(E, w)) * theta_mp(E, z)) / (c - zm))
        return complex((theta_mp(E, c) - theta_mp(E, z)) / (c - zm))
