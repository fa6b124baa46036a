"""Hilbert-space bookkeeping: atomic states, field states, collective operators.

Conventions (fixed once, tested via the jz spectrum and quadrature variances):

* hbar = 1 and g = 1; times are the dimensionless product g*t.
* Atomic basis: atom 1 is the most significant bit, |e> maps to bit 1, so
  the all-ground state is index 0 and the all-excited state is index 2^N - 1.
* Field basis: photon number n = 0..n_max.
* Joint states are atom-major: index = atom_index * (n_max + 1) + n.
* Squeezing sign: r > 0 squeezes the amplitude quadrature a' + a'^dag of the
  displaced mode a' = a - alpha, i.e. <(a'+a'^dag)^2> = exp(-2r).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply
from scipy.special import gammaln

MAX_ATOMS = 12
MAX_SQUEEZING = 3.0
TAIL_MARGIN = 10          # top Fock levels that must stay essentially empty
TAIL_MASS_LIMIT = 1e-10


class TruncationError(ValueError):
    """Fock-space truncation too small for the requested state."""


def default_n_max(alpha: float, r: float = 0.0) -> int:
    """Default Fock cutoff: Poisson tail plus squeezing-induced broadening.

    The squeezed-vacuum pair ladder decays only as tanh(|r|)^(2k), so an
    extra term keeps its tail below the 1e-10 mass contract at small alpha.
    """
    base = alpha**2 + 12.0 * alpha * math.exp(abs(r)) + 30.0
    if r != 0.0:
        base += 30.0 / -math.log(math.tanh(abs(r)))
    return math.ceil(base)


@dataclass(frozen=True)
class FieldState:
    """Truncated-Fock-basis state of the driving mode."""

    amplitudes: np.ndarray   # complex, length n_max + 1
    alpha: float             # coherent amplitude, real >= 0
    r: float                 # squeezing parameter
    n_max: int

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amp)
        amp.setflags(write=False)
        if amp.shape != (self.n_max + 1,):
            raise ValueError(
                f"amplitude vector length {amp.shape} inconsistent with n_max={self.n_max}"
            )
        _check_field_tail(amp, self.n_max)

    @property
    def mean_photons(self) -> float:
        n = np.arange(self.n_max + 1)
        return float(np.real(np.sum(n * np.abs(self.amplitudes) ** 2)))


@dataclass(frozen=True)
class AtomState:
    """Pure state of N two-level atoms on the 2^N computational basis."""

    amplitudes: np.ndarray   # complex, length 2^N
    n_atoms: int

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amp)
        amp.setflags(write=False)
        if self.n_atoms < 1:
            raise ValueError(f"n_atoms must be >= 1, got {self.n_atoms}")
        if amp.shape != (2**self.n_atoms,):
            raise ValueError(
                f"amplitude vector length {amp.shape} inconsistent with n_atoms={self.n_atoms}"
            )


@dataclass(frozen=True)
class CollectiveOps:
    """Sparse collective (pseudo-angular-momentum) operators on 2^N."""

    jplus: sp.csr_matrix
    jminus: sp.csr_matrix
    jx: sp.csr_matrix
    jy: sp.csr_matrix
    jz: sp.csr_matrix
    n_atoms: int


@dataclass(frozen=True)
class JointState:
    """Tensor-product state on atoms (x) field, atom-major layout."""

    amplitudes: np.ndarray   # complex, length 2^N * (n_max + 1)
    n_atoms: int
    n_max: int

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amp)
        amp.setflags(write=False)
        dim = 2**self.n_atoms * (self.n_max + 1)
        if amp.shape != (dim,):
            raise ValueError(f"amplitude vector length {amp.shape}, expected ({dim},)")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def _check_field_tail(amp: np.ndarray, n_max: int, limit: float = TAIL_MASS_LIMIT):
    tail = float(np.sum(np.abs(amp[max(1, n_max + 1 - TAIL_MARGIN):]) ** 2))
    if tail > limit:
        raise TruncationError(
            f"tail mass {tail:.3e} in the top {TAIL_MARGIN} Fock levels exceeds "
            f"{limit:.0e}; increase n_max beyond {n_max}"
        )


def annihilation_op(n_max: int) -> sp.csr_matrix:
    """Sparse annihilation operator a on the truncated Fock space."""
    return sp.diags(np.sqrt(np.arange(1, n_max + 1)), 1, format="csr", dtype=complex)


def build_collective_ops(n_atoms: int) -> CollectiveOps:
    """Collective operators J+, J-, Jx, Jy, Jz for N two-level atoms.

    J+ = sum_i |e>_i<g| in the computational basis described in the module
    docstring; Jz eigenvalues are popcount(b) - N/2.
    """
    if not 1 <= n_atoms <= MAX_ATOMS:
        raise ValueError(f"n_atoms must be in [1, {MAX_ATOMS}], got {n_atoms}")
    dim = 2**n_atoms
    rows, cols = [], []
    for b in range(dim):
        for i in range(n_atoms):
            bit = 1 << (n_atoms - 1 - i)   # atom 1 is the most significant bit
            if not b & bit:
                rows.append(b | bit)
                cols.append(b)
    data = np.ones(len(rows), dtype=complex)
    jplus = sp.csr_matrix((data, (rows, cols)), shape=(dim, dim))
    jminus = jplus.conj().T.tocsr()
    jx = (0.5 * (jplus + jminus)).tocsr()
    jy = (-0.5j * (jplus - jminus)).tocsr()
    popcount = np.array([bin(b).count("1") for b in range(dim)], dtype=float)
    jz = sp.diags(popcount - n_atoms / 2.0, 0, format="csr", dtype=complex)
    return CollectiveOps(jplus=jplus, jminus=jminus, jx=jx, jy=jy, jz=jz, n_atoms=n_atoms)


def coherent_state(alpha: float, n_max: int | None = None) -> FieldState:
    """Coherent state |alpha> with real alpha >= 0, c_n ~ alpha^n / sqrt(n!)."""
    if not np.isfinite(alpha) or alpha < 0:
        raise ValueError(f"alpha must be finite and >= 0, got {alpha}")
    if n_max is None:
        n_max = default_n_max(alpha)
    n = np.arange(n_max + 1)
    if alpha == 0.0:
        amp = np.zeros(n_max + 1, dtype=complex)
        amp[0] = 1.0
    else:
        # log-domain to avoid overflow at large alpha
        logc = n * math.log(alpha) - 0.5 * gammaln(n + 1) - alpha**2 / 2.0
        amp = np.exp(logc).astype(complex)
    try:
        _check_field_tail(amp, n_max)
    except TruncationError as exc:
        raise TruncationError(
            f"{exc}; alpha={alpha} needs n_max >= {default_n_max(alpha)}"
        ) from None
    amp = amp / np.linalg.norm(amp)
    return FieldState(amplitudes=amp, alpha=float(alpha), r=0.0, n_max=n_max)


def squeezed_coherent_state(alpha: float, r: float, n_max: int | None = None) -> FieldState:
    """Displaced squeezed vacuum D(alpha) S(r) |0>, S(r) = exp[(r/2)(a^2 - a^dag^2)].

    r > 0 squeezes the amplitude quadrature of the displaced mode:
    <(a'+a'^dag)^2> = exp(-2r) with a' = a - alpha.
    """
    if not (np.isfinite(alpha) and np.isfinite(r)):
        raise ValueError(f"alpha and r must be finite, got alpha={alpha}, r={r}")
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    if abs(r) > MAX_SQUEEZING:
        raise ValueError(f"|r| must be <= {MAX_SQUEEZING}, got {r}")
    if n_max is None:
        n_max = default_n_max(alpha, r)
    if r == 0.0:
        state = coherent_state(alpha, n_max)
        return state
    a = annihilation_op(n_max)
    adag = a.conj().T
    vac = np.zeros(n_max + 1, dtype=complex)
    vac[0] = 1.0
    squeeze_gen = (r / 2.0) * (a @ a - adag @ adag)
    amp = expm_multiply(squeeze_gen.tocsc(), vac)
    if alpha != 0.0:
        displace_gen = alpha * (adag - a)
        amp = expm_multiply(displace_gen.tocsc(), amp)
    try:
        _check_field_tail(amp, n_max)
    except TruncationError as exc:
        raise TruncationError(
            f"{exc}; alpha={alpha}, r={r} needs n_max >= {default_n_max(alpha, r)}"
        ) from None
    amp = amp / np.linalg.norm(amp)
    return FieldState(amplitudes=amp, alpha=float(alpha), r=float(r), n_max=n_max)


def cat_state(kind: str, n_atoms: int) -> AtomState:
    """Cat state of the atomic ensemble.

    kind "z": (|gg...> + |ee...>)/sqrt(2); kind "x": (|++...> + |--...>)/sqrt(2)
    with |+-> = (|e> +- |g>)/sqrt(2).
    """
    if n_atoms < 1:
        raise ValueError(f"n_atoms must be >= 1, got {n_atoms}")
    dim = 2**n_atoms
    if kind == "z":
        amp = np.zeros(dim, dtype=complex)
        amp[0] = amp[-1] = 1.0 / math.sqrt(2.0)
    elif kind == "x":
        popcount = np.array([bin(b).count("1") for b in range(dim)])
        plus = np.full(dim, 2.0 ** (-n_atoms / 2.0), dtype=complex)
        minus = plus * (-1.0) ** (n_atoms - popcount)
        amp = (plus + minus) / math.sqrt(2.0)
        amp = amp / np.linalg.norm(amp)
    else:
        raise ValueError(f"kind must be 'z' or 'x', got {kind!r}")
    return AtomState(amplitudes=amp, n_atoms=n_atoms)


def haar_random_state(n_atoms: int, seed) -> AtomState:
    """Haar-uniform random pure state: normalized i.i.d. complex Gaussians.

    Deterministic per seed; the RNG is numpy's PCG64 (default_rng).  seed may
    be an int or a sequence of ints (used by the ensemble module to derive
    per-sample streams).
    """
    if n_atoms < 1:
        raise ValueError(f"n_atoms must be >= 1, got {n_atoms}")
    rng = np.random.default_rng(seed)
    dim = 2**n_atoms
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return AtomState(amplitudes=z / np.linalg.norm(z), n_atoms=n_atoms)


def tensor(atoms: AtomState, field: FieldState) -> JointState:
    """Product state atoms (x) field in the atom-major layout."""
    amp = np.kron(atoms.amplitudes, field.amplitudes)
    return JointState(amplitudes=amp, n_atoms=atoms.n_atoms, n_max=field.n_max)


def expectation(op, state) -> complex:
    """<state| op |state> for a sparse/dense operator and an amplitude vector."""
    vec = state.amplitudes if hasattr(state, "amplitudes") else np.asarray(state)
    if op.shape[1] != vec.shape[0]:
        raise ValueError(f"operator shape {op.shape} incompatible with vector {vec.shape}")
    return complex(np.vdot(vec, op @ vec))
