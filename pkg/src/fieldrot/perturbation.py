"""Second-order perturbative gate-error predictor for arbitrary initial states.

The predictor assembles the explicit first- and second-order corrections to
the joint atom-field state.  With X+ = a' + a'^dag and X- = a' - a'^dag
(a' = a - alpha), and writing c for cos(theta), s for sin(theta):

|Psi1> = (-i/2a)[ theta Jx X+  +  i s Jy X-  +  i (c - 1) Jz X- ] |Psi0>

|Psi2> = (-1/4a^2)[ (theta^2/2) Jx^2 X+X+
                    - i(c-1)               JxJy X+X-
                    + i(s - theta)         JxJz X+X-
                    + i(theta s + c - 1)   JyJx X-X+
                    - (s^2/2)              JyJy X-X-
                    - (theta/2 + sin(2 theta)/4 - s) JyJz X-X-
                    - i(s - theta c)       JzJx X-X+
                    + (theta/2 - sin(2 theta)/4)     JzJy X-X-
                    + (s^2/2 + c - 1)      JzJz X-X- ] |Psi0>

All fluctuation operators are the primed ones uniformly; the error is
eps = -2 Re<Psi0|Psi1> - ||<psi0|Psi1>||^2 - 2 Re<Psi0|Psi2>, plus the
delta^2 Var(Jx) penalty when the interaction time is offset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from fieldrot.core import (
    AtomState,
    FieldState,
    annihilation_op,
    build_collective_ops,
)
from fieldrot.dynamics import ErrorReport, RotationSpec

VALIDITY_THRESHOLD = 0.2   # predictions above this are outside the trust region

# (atomic pair, field-moment key); coefficient functions in second_order_coefficients
SECOND_ORDER_PAIRS = [
    ("xx", "pp"),
    ("xy", "pm"),
    ("xz", "pm"),
    ("yx", "mp"),
    ("yy", "mm"),
    ("yz", "mm"),
    ("zx", "mp"),
    ("zy", "mm"),
    ("zz", "mm"),
]


def first_order_coefficients(theta: float) -> dict[str, complex]:
    """Coefficients of Jx X+, Jy X-, Jz X- in the first-order correction."""
    return {
        "x": theta,
        "y": 1j * math.sin(theta),
        "z": 1j * (math.cos(theta) - 1.0),
    }


def second_order_coefficients(theta: float) -> dict[str, complex]:
    """The nine time-integrated coefficient functions of the second order."""
    s, c = math.sin(theta), math.cos(theta)
    s2 = math.sin(2.0 * theta)
    return {
        "xx": theta**2 / 2.0,
        "xy": -1j * (c - 1.0),
        "xz": 1j * (s - theta),
        "yx": 1j * (theta * s + c - 1.0),
        "yy": -(s**2) / 2.0,
        "yz": -(theta / 2.0 + s2 / 4.0 - s),
        "zx": -1j * (s - theta * c),
        "zy": theta / 2.0 - s2 / 4.0,
        "zz": s**2 / 2.0 + c - 1.0,
    }


@dataclass(frozen=True)
class FieldMoments:
    """First and second moments of X+ = a'+a'^dag and X- = a'-a'^dag."""

    x_plus: complex
    x_minus: complex
    pp: complex   # <X+ X+>
    pm: complex   # <X+ X->
    mp: complex   # <X- X+>
    mm: complex   # <X- X->

    def pair(self, key: str) -> complex:
        return {"pp": self.pp, "pm": self.pm, "mp": self.mp, "mm": self.mm}[key]


@dataclass(frozen=True)
class PerturbationTerms:
    """Everything the error assembly needs, exposed for regression tests."""

    first_order_atomic: dict[str, complex]    # coeff(theta) * <Ja>
    second_order_atomic: dict[str, complex]   # coeff(theta) * <Ja Jb>
    field_moments: FieldMoments


def field_quadrature_moments(field: FieldState) -> FieldMoments:
    """Exact quadrature moments of the displaced mode on the Fock vector."""
    a = annihilation_op(field.n_max)
    phi = field.amplitudes
    # a' = a - alpha; X+ = a + a^dag - 2 alpha, X- = a - a^dag
    a_phi = a @ phi
    adag_phi = a.conj().T @ phi
    vp = a_phi + adag_phi - 2.0 * field.alpha * phi
    vm = a_phi - adag_phi
    # X+ is Hermitian, X- is anti-Hermitian (X-^dag = -X-), so e.g.
    # <X- X+> = <(X-)^dag phi | X+ phi> = -<X- phi | X+ phi>.
    return FieldMoments(
        x_plus=complex(np.vdot(phi, vp)),
        x_minus=complex(np.vdot(phi, vm)),
        pp=complex(np.vdot(vp, vp)),
        pm=complex(np.vdot(vp, vm)),
        mp=complex(-np.vdot(vm, vp)),
        mm=complex(-np.vdot(vm, vm)),
    )


@lru_cache(maxsize=16)
def _second_moment_ops(n_atoms: int):
    ops = build_collective_ops(n_atoms)
    dense = {
        "x": ops.jx.toarray(),
        "y": ops.jy.toarray(),
        "z": ops.jz.toarray(),
    }
    pair_ops = {key: dense[key[0]] @ dense[key[1]] for key, _ in SECOND_ORDER_PAIRS}
    return dense, pair_ops


def atomic_moments(states: np.ndarray, n_atoms: int) -> dict[str, np.ndarray]:
    """First and second collective-spin moments for a batch of state vectors.

    states: array (n_states, 2^N).  Returns arrays of length n_states keyed
    by "x","y","z" and the nine ordered pairs.
    """
    dense, pair_ops = _second_moment_ops(n_atoms)
    conj = states.conj()
    out = {}
    for key, op in {**dense, **pair_ops}.items():
        out[key] = np.einsum("si,ij,sj->s", conj, op, states)
    return out


def error_terms_from_moments(
    am: dict[str, np.ndarray],
    fm: FieldMoments,
    alpha: float,
    theta: float,
    delta: float = 0.0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(first_order, second_order, time_offset) error terms, vectorized.

    Every occurrence of theta in the perturbative coefficients is replaced by
    theta + delta; the time-offset penalty is delta^2 Var(Jx) (second-order
    expansion of the residual zero-order rotation).
    """
    theta_eff = theta + delta
    c1 = first_order_coefficients(theta_eff)
    c2 = second_order_coefficients(theta_eff)
    # -2 Re <Psi0|Psi1>: vanishes when the first field moments do.
    overlap1 = (-1j / (2.0 * alpha)) * (
        c1["x"] * am["x"] * fm.x_plus
        + c1["y"] * am["y"] * fm.x_minus
        + c1["z"] * am["z"] * fm.x_minus
    )
    # ||<psi0|Psi1>||^2: norm of A X+ |Phi0> + i B X- |Phi0| with real A, B.
    a_coef = theta_eff * np.real(am["x"])
    b_coef = math.sin(theta_eff) * np.real(am["y"]) + (
        math.cos(theta_eff) - 1.0
    ) * np.real(am["z"])
    norm1_sq = (
        a_coef**2 * np.real(fm.pp)
        - b_coef**2 * np.real(fm.mm)
        + a_coef * b_coef * np.real(1j * (fm.pm + fm.mp))
    ) / (4.0 * alpha**2)
    first_order = -2.0 * np.real(overlap1) - norm1_sq
    overlap2 = np.zeros_like(am["xx"])
    for key, moment_key in SECOND_ORDER_PAIRS:
        overlap2 = overlap2 + c2[key] * am[key] * fm.pair(moment_key)
    second_order = -2.0 * np.real((-1.0 / (4.0 * alpha**2)) * overlap2)
    time_offset = delta**2 * (np.real(am["xx"]) - np.real(am["x"]) ** 2)
    return first_order, second_order, time_offset


def perturbation_terms(psi0: AtomState, field: FieldState, theta: float) -> PerturbationTerms:
    """Assembled coefficient-times-expectation terms for one state."""
    am = atomic_moments(psi0.amplitudes[np.newaxis, :], psi0.n_atoms)
    c1 = first_order_coefficients(theta)
    c2 = second_order_coefficients(theta)
    return PerturbationTerms(
        first_order_atomic={k: complex(c1[k] * am[k][0]) for k in ("x", "y", "z")},
        second_order_atomic={k: complex(c2[k] * am[k][0]) for k, _ in SECOND_ORDER_PAIRS},
        field_moments=field_quadrature_moments(field),
    )


def perturbative_error(psi0: AtomState, field: FieldState, spec: RotationSpec) -> ErrorReport:
    """Second-order perturbative gate error for an arbitrary initial state."""
    if psi0.n_atoms != spec.n_atoms:
        raise ValueError(f"spec.n_atoms={spec.n_atoms} does not match state ({psi0.n_atoms})")
    if abs(field.alpha - spec.alpha) > 1e-12:
        raise ValueError(f"spec.alpha={spec.alpha} does not match field.alpha={field.alpha}")
    am = atomic_moments(psi0.amplitudes[np.newaxis, :], psi0.n_atoms)
    fm = field_quadrature_moments(field)
    first, second, offset = error_terms_from_moments(
        am, fm, spec.alpha, spec.theta, spec.delta
    )
    total = float(first[0] + second[0] + offset[0])
    return ErrorReport(
        total=total,
        method="perturbative",
        first_order_term=float(first[0]),
        second_order_term=float(second[0]),
        time_offset_term=float(offset[0]),
        validity_warning=bool(total > VALIDITY_THRESHOLD or total < 0.0),
    )


def perturbative_error_haar_average(
    n_atoms: int, alpha: float, r: float, theta: float
) -> float:
    """Haar-average of the perturbative error over initial atomic states:

    [1/(1+2^-N)] (N/16 alpha^2) (theta^2 e^{-2r} + 4 sin^2(theta/2) e^{2r})
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    pref = 1.0 / (1.0 + 2.0 ** (-n_atoms)) * n_atoms / (16.0 * alpha**2)
    return pref * (
        theta**2 * math.exp(-2.0 * r)
        + 4.0 * math.sin(theta / 2.0) ** 2 * math.exp(2.0 * r)
    )
