"""Two-body sector of the rank-1 Yamaguchi separable potential.

The interaction is lam * g(q) g(q') with form factor g(q) = 1/(beta^2 + q^2)
and lam > 0 attractive.  Units are hbar = m = 1 throughout, so the relative
kinetic energy of a pair is q^2 and a bound dimer sits at E = -kappa_d^2.

The module provides the off-shell amplitude, the loop function h evaluated
at bound-state kinematics, the exact effective-range expansion of k*cot(delta)
(a quartic polynomial in k for this potential), and the bidirectional map
between (lam, beta) and the low-energy constants (1/a, r0, R0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    InfeasibleRangeError,
    NoDimerError,
    ParameterError,
    PoleError,
)

FOUR_PI = 4.0 * math.pi

__all__ = [
    "PotentialParams",
    "EREParams",
    "DimerState",
    "form_factor",
    "h_bound",
    "off_shell_amplitude",
    "k_cot_delta",
    "k_cot_delta_from_ksq",
    "map_potential_to_ere",
    "map_ere_to_potential",
    "potential_from_inv_a_r0",
    "dimer_binding",
]


@dataclass(frozen=True)
class PotentialParams:
    """Coupling lam (inverse volume) and range parameter beta (momentum)."""

    lam: float
    beta: float

    def __post_init__(self):
        if not (self.lam > 0.0):
            raise ParameterError(f"coupling lam must be positive, got {self.lam}")
        if not (self.beta > 0.0):
            raise ParameterError(f"range beta must be positive, got {self.beta}")


@dataclass(frozen=True)
class EREParams:
    """Low-energy constants of k*cot(delta) = -1/a + r0 k^2 / 2 + ...

    inv_a is 1/a in momentum units (0 encodes unitarity).  r0 is the
    effective range.  R0 is the range correction that multiplies
    kappa1^2 = 3p^2/4 + alpha^2 in the short-range trimer equation; it is
    optional because only the short-range model consumes it.
    """

    inv_a: float
    r0: float | None = None
    R0: float | None = None


@dataclass(frozen=True)
class DimerState:
    """Bound dimer: pole of the two-body amplitude at k = i*kappa_d."""

    kappa_d: float

    @property
    def energy(self) -> float:
        return -self.kappa_d**2


def form_factor(q, beta):
    """Yamaguchi form factor g(q) = 1/(beta^2 + q^2).  Even in q."""
    if not np.all(np.asarray(beta) > 0.0):
        raise ParameterError("form factor needs beta > 0")
    return 1.0 / (beta * beta + np.asarray(q) ** 2)


def h_bound(kappa, beta):
    """Loop function h at bound-state kinematics k = i*kappa.

    h(i kappa) = (2 pi)^-3 * integral d^3q g(q)^2 / (q^2 + kappa^2)
               = 1 / (8 pi beta (beta + kappa)^2)

    The closed form is validated against adaptive quadrature in the test
    suite.  Strictly decreasing in both kappa and beta.
    """
    kappa = np.asarray(kappa, dtype=float)
    if not np.all(np.asarray(beta) > 0.0):
        raise ParameterError("h_bound needs beta > 0")
    if np.any(kappa < 0.0):
        raise ParameterError("h_bound needs kappa >= 0")
    out = 1.0 / (8.0 * math.pi * beta * (beta + kappa) ** 2)
    return out if out.ndim else float(out)


def _h_continued(k, beta):
    """h(k) for general complex k with the +i*epsilon prescription.

    Analytic continuation of h_bound: h(k) = 1/(8 pi beta (beta - i k)^2),
    which reduces to h_bound for k = i*kappa and carries the unitarity cut
    Im h = k g(k)^2 / (4 pi) for real k > 0.
    """
    k = complex(k)
    return 1.0 / (8.0 * math.pi * beta * (beta - 1j * k) ** 2)


def off_shell_amplitude(q, k, params: PotentialParams):
    """Half-off-shell amplitude a(q, k) = g(q) g(k) / (4 pi (1/lam - h(k))).

    The second argument fixes the energy E = k^2; bound-state kinematics are
    reached with imaginary k (e.g. k = 1j*kappa).  The g-product numerator is
    symmetric under q <-> k; on shell the amplitude satisfies
    1/a(k, k) = k*cot(delta) - i k exactly.

    Raises PoleError at the dimer pole k = i*kappa_d.
    """
    lam, beta = params.lam, params.beta
    denom = 1.0 / lam - _h_continued(k, beta)
    if abs(denom) <= 1e-14 / lam:
        kappa_d = None
        if map_potential_to_ere(params).inv_a > 0.0:
            kappa_d = dimer_binding(params).kappa_d
        raise PoleError("amplitude evaluated at the dimer pole", kappa_d=kappa_d)
    gq = 1.0 / (beta * beta + complex(q) ** 2)
    gk = 1.0 / (beta * beta + complex(k) ** 2)
    return gq * gk / (FOUR_PI * denom)


def k_cot_delta_from_ksq(ksq, params: PotentialParams):
    """k*cot(delta) as a polynomial in k^2, usable for continuation to k^2 < 0.

    k cot(delta) = 4 pi / lam * (beta^2 + k^2)^2 - beta/2 + k^2/(2 beta)

    Exact for the Yamaguchi potential: identical to
    -1/a + r0 k^2 / 2 + (4 pi / lam) k^4 with (a, r0) from
    map_potential_to_ere.  At a bound state, k^2 = -kappa_d^2 gives -kappa_d.
    """
    lam, beta = params.lam, params.beta
    ksq = np.asarray(ksq, dtype=float)
    out = (FOUR_PI / lam) * (beta * beta + ksq) ** 2 - 0.5 * beta + ksq / (2.0 * beta)
    return out if out.ndim else float(out)


def k_cot_delta(k, params: PotentialParams):
    """k*cot(delta) at real scattering momentum k >= 0."""
    k = np.asarray(k, dtype=float)
    if np.any(k < 0.0):
        raise ParameterError("k_cot_delta needs k >= 0")
    return k_cot_delta_from_ksq(k * k, params)


def map_potential_to_ere(params: PotentialParams) -> EREParams:
    """Low-energy constants generated by (lam, beta).

    1/a = beta/2 - 4 pi beta^4 / lam
    r0  = 16 pi beta^2 / lam + 1/beta
    R0  = -(r0/2 - 3/(2 beta) + 2/(a beta^2))

    The R0 combination cancels identically for a self-consistent Yamaguchi
    pair (1/lam carries no k dependence), so it comes out as rounding noise;
    the strict short-range identification is R0 -> -r0/2 and both values are
    reported by the CLI.
    """
    lam, beta = params.lam, params.beta
    inv_a = 0.5 * beta - FOUR_PI * beta**4 / lam
    r0 = 16.0 * math.pi * beta**2 / lam + 1.0 / beta
    R0 = -(0.5 * r0 - 1.5 / beta + 2.0 * inv_a / beta**2)
    return EREParams(inv_a=inv_a, r0=r0, R0=R0)


def map_ere_to_potential(ere: EREParams, beta: float) -> PotentialParams:
    """Yamaguchi pair reproducing 1/a at the given range parameter beta.

    lam = 4 pi beta^4 / (beta/2 - 1/a); the effective range is then fixed
    by beta (recover it with map_potential_to_ere).  Raises
    InfeasibleRangeError when beta/2 <= 1/a, where no attractive coupling
    reproduces the pair.
    """
    if not (beta > 0.0):
        raise ParameterError(f"beta must be positive, got {beta}")
    denom = 0.5 * beta - ere.inv_a
    if denom <= 0.0:
        raise InfeasibleRangeError(
            f"no attractive Yamaguchi potential for 1/a={ere.inv_a} at beta={beta}"
            " (needs beta/2 > 1/a)"
        )
    return PotentialParams(lam=FOUR_PI * beta**4 / denom, beta=beta)


def potential_from_inv_a_r0(inv_a: float, r0: float) -> PotentialParams:
    """Invert (1/a, r0) to a Yamaguchi pair.

    Uses r0 = 3/beta - 4/(a beta^2), i.e. r0 beta^2 - 3 beta + 4/a = 0, and
    takes the larger root (continuous with beta = 3/r0 at unitarity).
    """
    if not (r0 > 0.0):
        raise InfeasibleRangeError(
            f"Yamaguchi effective range is positive; cannot match r0={r0}"
        )
    disc = 9.0 - 16.0 * r0 * inv_a
    if disc < 0.0:
        raise InfeasibleRangeError(
            f"no real beta reproduces 1/a={inv_a}, r0={r0} (discriminant < 0)"
        )
    beta = (3.0 + math.sqrt(disc)) / (2.0 * r0)
    return map_ere_to_potential(EREParams(inv_a=inv_a), beta)


def dimer_binding(params: PotentialParams, rel_tol: float = 1e-12) -> DimerState:
    """Bound dimer as the root of 1/lam = h_bound(kappa_d, beta).

    Located by bracketing and bisection to the given relative tolerance in
    kappa.  A dimer exists iff 1/a > 0; otherwise NoDimerError is raised.
    """
    lam, beta = params.lam, params.beta
    target = 1.0 / lam

    def f(kappa):
        return target - h_bound(kappa, beta)

    if f(0.0) >= 0.0:  # 1/lam >= h(0) <=> 1/a <= 0
        raise NoDimerError(
            f"no bound dimer for lam={lam}, beta={beta} (1/a <= 0)"
        )
    hi = beta
    while f(hi) < 0.0:
        hi *= 2.0
        if hi > 1e12 * beta:
            raise NoDimerError("failed to bracket the dimer pole")
    lo = 0.0
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return DimerState(kappa_d=0.5 * (lo + hi))
