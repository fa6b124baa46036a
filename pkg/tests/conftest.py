"""Shared independent oracles for the test suite.

These deliberately avoid the package's operator matrices: moments are taken
by direct index arithmetic on Fock amplitudes, reduced states by reshaping.
"""

import numpy as np


def fock_ladder_moments(amp):
    """Moments of a, a^2, a^dag a by index shifts on the Fock amplitudes."""
    amp = np.asarray(amp, dtype=complex)
    n = np.arange(len(amp))
    c = amp.conj()
    a1 = np.sum(c[:-1] * amp[1:] * np.sqrt(n[1:]))
    a2 = np.sum(c[:-2] * amp[2:] * np.sqrt(n[2:] * (n[2:] - 1)))
    num = np.sum(n * np.abs(amp) ** 2)
    return {"a": a1, "aa": a2, "n": num}


def quadrature_variances(amp, alpha):
    """(<(a'+a'^dag)^2>, <(a'-a'^dag)^2>) with a' = a - alpha, from ladder moments."""
    m = fock_ladder_moments(amp)
    ap = m["a"] - alpha                       # <a'>
    ap2 = m["aa"] - 2 * alpha * m["a"] + alpha**2   # <a'^2>
    npr = m["n"] - alpha * m["a"].conjugate() - alpha * m["a"] + alpha**2  # <a'^dag a'>
    # X+^2 = a'^2 + a'^dag^2 + 2 a'^dag a' + 1;  X-^2 = a'^2 + a'^dag^2 - 2 a'^dag a' - 1
    plus = ap2 + np.conj(ap2) + 2 * npr + 1
    minus = ap2 + np.conj(ap2) - 2 * npr - 1
    assert abs(ap) < 1e-6 or alpha == 0  # displaced mode should be centered
    return plus.real, minus.real


def reduced_atomic_density(joint_amp, n_atoms, n_max):
    """Partial trace over the field of an atom-major joint amplitude vector."""
    blocks = np.asarray(joint_amp).reshape(2**n_atoms, n_max + 1)
    return blocks @ blocks.conj().T


def joint_excitation(joint_amp, n_atoms, n_max):
    """<Jz + a^dag a> from the atom-major layout, without operator matrices."""
    blocks = np.abs(np.asarray(joint_amp).reshape(2**n_atoms, n_max + 1)) ** 2
    popcount = np.array([bin(b).count("1") for b in range(2**n_atoms)])
    jz = np.sum((popcount - n_atoms / 2.0) * blocks.sum(axis=1))
    photons = np.sum(np.arange(n_max + 1) * blocks.sum(axis=0))
    return jz + photons
