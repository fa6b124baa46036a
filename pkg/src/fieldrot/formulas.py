"""Closed-form error, optimal-squeezing, averaging and degeneracy formulas.

Every optimum exposed here has a golden-section cross-check in the test
suite; the combinatorial identities are evaluated in exact integer
arithmetic.  Angle conventions: formulas accept theta in [0, 2*pi], but the
optima are only certified on (0, pi] (log-singular prefactors at 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np


@dataclass(frozen=True)
class CatErrorParams:
    kind: str                 # "z" | "x"
    n_atoms: int
    alpha: float
    theta: float
    r: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("z", "x"):
            raise ValueError(f"kind must be 'z' or 'x', got {self.kind!r}")
        if self.n_atoms < 1:
            raise ValueError(f"n_atoms must be >= 1, got {self.n_atoms}")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")


@dataclass(frozen=True)
class DegeneracySpec:
    n_atoms: int
    j: float        # half-integer, j_min <= j <= N/2, N/2 - j integer

    def __post_init__(self):
        two_j = round(2 * self.j)
        if abs(2 * self.j - two_j) > 1e-12 or two_j < 0:
            raise ValueError(f"j must be a non-negative half-integer, got {self.j}")
        if (self.n_atoms - two_j) % 2 != 0 or two_j > self.n_atoms:
            raise ValueError(
                f"j={self.j} invalid for N={self.n_atoms}: need N/2 - j a"
                " non-negative integer"
            )


def _theta_positive(theta: float):
    if theta <= 0:
        raise ValueError(f"theta must be > 0 for squeezing optima, got {theta}")


def cat_error(p: CatErrorParams) -> float:
    """Error for a rotation of an N-atom cat state (N >= 2).

    For N >= 3 this is the cat-state error with theta -> theta + delta in the
    bracket plus the delta^2 Var(Jx) penalty (N/4 for z, N^2/4 for x); for
    N = 2 the x- and z-cats coincide and the full (r, delta) form applies.
    """
    if p.n_atoms < 2:
        raise ValueError("cat_error requires n_atoms >= 2 (see single_atom_error)")
    if p.n_atoms == 2:
        return two_atom_error_rd(p.alpha, p.theta, p.r, p.delta)
    n = p.n_atoms
    th = p.theta + p.delta
    em, ep = math.exp(-2.0 * p.r), math.exp(2.0 * p.r)
    pref = n / (16.0 * p.alpha**2)
    if p.kind == "z":
        bracket = th**2 * em + (
            math.sin(th) ** 2 + 4.0 * n * math.sin(th / 2.0) ** 4
        ) * ep
        penalty = (n / 4.0) * p.delta**2
    else:
        bracket = n * th**2 * em + 4.0 * math.sin(th / 2.0) ** 2 * ep
        penalty = (n**2 / 4.0) * p.delta**2
    return pref * bracket + penalty


def cat_r_opt(kind: str, n_atoms: int, theta: float) -> float:
    """Squeezing parameter minimizing the cat-state error.

    z: (1/4) ln[theta^2 / (sin^2 theta + 4N sin^4(theta/2))]
    x: (1/4) ln[N theta^2 / (4 sin^2(theta/2))]
    N = 2 (either kind): (1/4) ln[theta^2 / (4 sin^4(theta/2))]
    """
    if n_atoms < 2:
        raise ValueError("cat_r_opt requires n_atoms >= 2")
    _theta_positive(theta)
    if n_atoms == 2:
        return 0.25 * math.log(theta**2 / (4.0 * math.sin(theta / 2.0) ** 4))
    if kind == "z":
        return 0.25 * math.log(
            theta**2 / (math.sin(theta) ** 2 + 4.0 * n_atoms * math.sin(theta / 2.0) ** 4)
        )
    if kind == "x":
        return 0.25 * math.log(n_atoms * theta**2 / (4.0 * math.sin(theta / 2.0) ** 2))
    raise ValueError(f"kind must be 'z' or 'x', got {kind!r}")


def cat_error_opt(kind: str, n_atoms: int, alpha: float, theta: float) -> float:
    """Cat-state error at the optimal squeezing.

    z: (N/8 alpha^2) theta sqrt(sin^2 theta + 4N sin^4(theta/2))
    x: (N sqrt(N)/4 alpha^2) theta sin(theta/2)
    N = 2: (1/alpha^2) theta sin^2(theta/2)
    """
    if n_atoms < 2:
        raise ValueError("cat_error_opt requires n_atoms >= 2")
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    if theta == 0.0:
        return 0.0
    _theta_positive(theta)
    if n_atoms == 2:
        return theta * math.sin(theta / 2.0) ** 2 / alpha**2
    if kind == "z":
        return (n_atoms / (8.0 * alpha**2)) * theta * math.sqrt(
            math.sin(theta) ** 2 + 4.0 * n_atoms * math.sin(theta / 2.0) ** 4
        )
    if kind == "x":
        return (n_atoms * math.sqrt(n_atoms) / (4.0 * alpha**2)) * theta * math.sin(theta / 2.0)
    raise ValueError(f"kind must be 'z' or 'x', got {kind!r}")


def single_atom_error(alpha: float, theta: float, r: float, initial: str = "excited") -> float:
    """Jaynes-Cummings rotation error: (1/16 alpha^2)(theta e^-r +- sin(theta) e^r)^2.

    "+" for the initially excited atom (the worst case), "-" for ground.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    if initial == "excited":
        sign = 1.0
    elif initial == "ground":
        sign = -1.0
    else:
        raise ValueError(f"initial must be 'excited' or 'ground', got {initial!r}")
    return (theta * math.exp(-r) + sign * math.sin(theta) * math.exp(r)) ** 2 / (
        16.0 * alpha**2
    )


def single_atom_r_opt(theta: float) -> float:
    """Squeezing minimizing the single-atom (excited) error: (1/2) ln(theta/sin theta)."""
    if not 0 < theta < math.pi:
        raise ValueError(f"theta must be in (0, pi), got {theta}")
    return 0.5 * math.log(theta / math.sin(theta))


def avg_error(n_atoms: int, alpha: float, theta: float, r: float) -> float:
    """Haar-average error; valid for all N >= 1.

    [1/(1+2^-N)] (N/16 alpha^2) (theta^2 e^{-2r} + 4 sin^2(theta/2) e^{2r})
    """
    if n_atoms < 1:
        raise ValueError(f"n_atoms must be >= 1, got {n_atoms}")
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    pref = n_atoms / ((1.0 + 2.0 ** (-n_atoms)) * 16.0 * alpha**2)
    return pref * (
        theta**2 * math.exp(-2.0 * r)
        + 4.0 * math.sin(theta / 2.0) ** 2 * math.exp(2.0 * r)
    )


def avg_r_opt(theta: float) -> float:
    """Squeezing minimizing the average error, independent of N:

    (1/4) ln[theta^2 / (4 sin^2(theta/2))]; the theta -> 0 limit is 0.
    """
    _theta_positive(theta)
    return 0.25 * math.log(theta**2 / (4.0 * math.sin(theta / 2.0) ** 2))


def avg_error_opt(n_atoms: int, alpha: float, theta: float) -> float:
    """Average error at the optimal squeezing: [1/(1+2^-N)] (N/4 alpha^2) theta sin(theta/2)."""
    if n_atoms < 1:
        raise ValueError(f"n_atoms must be >= 1, got {n_atoms}")
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    return (
        n_atoms
        / ((1.0 + 2.0 ** (-n_atoms)) * 4.0 * alpha**2)
        * theta
        * math.sin(theta / 2.0)
    )


def avg_error_opt_bound(n_atoms: int, nbar: float) -> float:
    """theta = pi worst case of the optimal average error: [1/(1+2^-N)] pi N / (4 nbar)."""
    if nbar <= 0:
        raise ValueError(f"nbar must be > 0, got {nbar}")
    return math.pi * n_atoms / ((1.0 + 2.0 ** (-n_atoms)) * 4.0 * nbar)


def kmax(spec: DegeneracySpec) -> int:
    """Degeneracy of the spin-j multiplet: N!(2j+1) / ((N/2+j+1)!(N/2-j)!), exact."""
    n = spec.n_atoms
    two_j = round(2 * spec.j)
    value = Fraction(math.factorial(n) * (two_j + 1))
    value /= math.factorial((n + two_j) // 2 + 1)
    value /= math.factorial((n - two_j) // 2)
    if value.denominator != 1:
        raise ArithmeticError(f"degeneracy for N={n}, j={spec.j} is not an integer")
    return int(value)


def multiplet_js(n_atoms: int) -> list[float]:
    """The allowed j values j_min..N/2 in steps of 1 (j_min = 0 or 1/2)."""
    two_js = range(n_atoms % 2, n_atoms + 1, 2)
    return [tj / 2.0 for tj in two_js]


def haar_jz_mean_sq(n_atoms: int) -> float:
    """Haar average of <Jz>^2: N / (4 (2^N + 1)).

    Internally verified against the binomial sum
    (2 / (2^N (2^N + 1))) sum_m m^2 binom(N, N/2 + m).
    """
    if n_atoms < 1:
        raise ValueError(f"n_atoms must be >= 1, got {n_atoms}")
    closed = Fraction(n_atoms, 4 * (2**n_atoms + 1))
    from_sum = Fraction(jz_sq_binomial_sum_quarters(n_atoms), 4) * Fraction(
        2, 2**n_atoms * (2**n_atoms + 1)
    )
    if closed != from_sum:
        raise ArithmeticError(
            f"closed form {closed} disagrees with the binomial sum {from_sum} at N={n_atoms}"
        )
    return float(closed)


def jz_sq_binomial_sum_quarters(n_atoms: int) -> int:
    """4 * sum_m m^2 binom(N, N/2+m), m from 0 or 1/2 up to N/2 (exact integer).

    The factor 4 keeps half-integer m^2 exact; for N >= 3 the sum itself
    equals 2^(N-3) N, i.e. this function returns 2^(N-1) N.
    """
    total = 0
    for two_m in range(n_atoms % 2, n_atoms + 1, 2):
        total += two_m**2 * math.comb(n_atoms, (n_atoms + two_m) // 2)
    return total


def jz_sq_binomial_sum(n_atoms: int) -> Fraction:
    """sum_m m^2 binom(N, N/2+m) as an exact rational (integer for N >= 2)."""
    return Fraction(jz_sq_binomial_sum_quarters(n_atoms), 4)


def haar_jsq_mean(n_atoms: int) -> float:
    """Haar average of <J^2>: 3N/4, verified against the multiplet sum.

    The multiplet sum is (1/2^N) sum_j j(j+1)(2j+1) kmax(N, j).
    """
    if n_atoms < 1:
        raise ValueError(f"n_atoms must be >= 1, got {n_atoms}")
    total = Fraction(0)
    for j in multiplet_js(n_atoms):
        two_j = round(2 * j)
        jj1 = Fraction(two_j * (two_j + 2), 4)   # j(j+1)
        total += jj1 * (two_j + 1) * kmax(DegeneracySpec(n_atoms=n_atoms, j=j))
    from_sum = total / 2**n_atoms
    closed = Fraction(3 * n_atoms, 4)
    if closed != from_sum:
        raise ArithmeticError(
            f"closed form {closed} disagrees with the multiplet sum {from_sum} at N={n_atoms}"
        )
    return float(closed)


def delta_opt(kind: str, n_atoms: int, theta: float, nbar: float) -> float:
    """Optimal interaction-time offset (zero squeezing).

    z-cat (N > 2):
        -[ (N-1) sin(2 theta)/2 - N sin(theta) - theta ]
         / [ (N-1) cos(2 theta) - N cos(theta) - 1 - 4 nbar ]
    two_atom (N = 2):
        -[ theta + sin(theta)(1 - cos(theta)) ]
         / [ 1 + 4 nbar + cos(theta) - cos(2 theta) ]
    """
    if nbar <= 0:
        raise ValueError(f"nbar must be > 0, got {nbar}")
    if kind == "two_atom":
        if n_atoms != 2:
            raise ValueError(f"kind 'two_atom' requires n_atoms=2, got {n_atoms}")
        num = theta + math.sin(theta) * (1.0 - math.cos(theta))
        den = 1.0 + 4.0 * nbar + math.cos(theta) - math.cos(2.0 * theta)
        return -num / den
    if kind == "zcat":
        if n_atoms <= 2:
            raise ValueError(f"kind 'zcat' requires n_atoms > 2, got {n_atoms}")
        n = n_atoms
        num = 0.5 * (n - 1) * math.sin(2.0 * theta) - n * math.sin(theta) - theta
        den = (n - 1) * math.cos(2.0 * theta) - n * math.cos(theta) - 1.0 - 4.0 * nbar
        return -num / den
    raise ValueError(f"kind must be 'zcat' or 'two_atom', got {kind!r}")


def two_atom_error_rd(alpha: float, theta: float, r: float, delta: float) -> float:
    """Two-atom cat error with squeezing and time offset:

    delta^2 + (1/4 alpha^2)[(theta+delta)^2 e^{-2r} + 4 sin^4((theta+delta)/2) e^{2r}]
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    th = theta + delta
    return delta**2 + (
        th**2 * math.exp(-2.0 * r)
        + 4.0 * math.sin(th / 2.0) ** 4 * math.exp(2.0 * r)
    ) / (4.0 * alpha**2)


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def minimize_scalar(f, bracket: tuple[float, float], tol: float = 1e-8) -> tuple[float, float]:
    """Golden-section minimum of a unimodal f on [lo, hi].

    Returns (argmin, min).  Raises if the bracket shows no interior decrease
    (the minimum would sit on an endpoint).
    """
    lo, hi = bracket
    if not hi > lo:
        raise ValueError(f"invalid bracket {bracket}")
    m1 = hi - _INV_PHI * (hi - lo)
    m2 = lo + _INV_PHI * (hi - lo)
    f_lo, f_hi, f_m1, f_m2 = f(lo), f(hi), f(m1), f(m2)
    if min(f_m1, f_m2) > min(f_lo, f_hi):
        raise ValueError(
            f"no interior decrease on bracket {bracket}: f is not unimodal with an"
            " interior minimum there"
        )
    while hi - lo > tol:
        if f_m1 < f_m2:
            hi, m2, f_m2 = m2, m1, f_m1
            m1 = hi - _INV_PHI * (hi - lo)
            f_m1 = f(m1)
        else:
            lo, m1, f_m1 = m1, m2, f_m2
            m2 = lo + _INV_PHI * (hi - lo)
            f_m2 = f(m2)
    x = 0.5 * (lo + hi)
    return x, f(x)
