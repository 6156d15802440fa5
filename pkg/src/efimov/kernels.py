"""One-dimensional trimer kernels after s-wave azimuthal integration.

Two models of the same bound-state integral equation

    D(p; alpha) phi(p) = integral_0^Lambda K(p, p'; alpha) phi(p') dp'

are supported for three identical bosons at trial binding energy
E = -alpha^2:

* finite range -- the full separable-potential equation, with
  D = 1/lam - h(kappa1) and a numerically angular-integrated kernel built
  from two form factors and the three-body Green's function; and
* short range -- its beta -> infinity limit,
  D = -1/a + R0*kappa1^2 + kappa1 with a closed-form logarithmic kernel,

where kappa1(p) = sqrt(3 p^2/4 + alpha^2) is the pair binding momentum seen
by the spectator.  Multiplying the finite-range pair by 4 pi beta^4 turns it
into the short-range pair up to O(1/beta) corrections; limit_identity
exposes the denominator half of that statement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ParameterError, ThresholdViolationError
from .twobody import EREParams, PotentialParams, form_factor, h_bound

__all__ = [
    "KernelSpec",
    "TrialBinding",
    "subsystem_momentum",
    "denominator",
    "short_range_kernel",
    "finite_range_kernel",
    "limit_identity",
    "reconstruct_wavefunction",
]

# below p <= SERIES_SWITCH * p' the log form is replaced by its p -> 0 limit
SERIES_SWITCH = 1e-8


def subsystem_momentum(p, alpha):
    """kappa1(p) = sqrt(3 p^2 / 4 + alpha^2)."""
    p = np.asarray(p, dtype=float)
    return np.sqrt(0.75 * p * p + alpha * alpha)


@dataclass(frozen=True)
class TrialBinding:
    """Trial trimer binding momentum alpha, E = -alpha^2 < 0."""

    alpha: float

    def __post_init__(self):
        if not (self.alpha > 0.0):
            raise ParameterError(f"trial binding needs alpha > 0, got {self.alpha}")

    def kappa1(self, p):
        return subsystem_momentum(p, self.alpha)


@dataclass(frozen=True)
class KernelSpec:
    """Model choice for the trimer equation plus an optional momentum cutoff.

    kind is "finite" (Yamaguchi parameters) or "short" (low-energy
    constants).  The cutoff is mandatory for the short-range model at
    R0 = 0, where it supplies the missing three-body scale (Danilov
    non-uniqueness); otherwise it only truncates the quadrature.
    """

    kind: str
    params: PotentialParams | None = None
    ere: EREParams | None = None
    cutoff: float | None = None

    def __post_init__(self):
        if self.kind not in ("finite", "short"):
            raise ParameterError(f"unknown kernel kind {self.kind!r}")
        if self.cutoff is not None and not (self.cutoff > 0.0):
            raise ParameterError(f"cutoff must be positive, got {self.cutoff}")
        if self.kind == "finite":
            if self.params is None:
                raise ParameterError("finite-range spec needs PotentialParams")
        else:
            if self.ere is None:
                raise ParameterError("short-range spec needs EREParams")
            if self.ere.R0 is None:
                raise ParameterError("short-range spec needs an explicit R0")
            if self.ere.R0 == 0.0 and self.cutoff is None:
                raise ParameterError(
                    "short-range model with R0 = 0 requires a cutoff: the "
                    "zero-range spectrum is not unique without one"
                )

    @classmethod
    def finite_range(cls, params: PotentialParams, cutoff: float | None = None):
        return cls(kind="finite", params=params, cutoff=cutoff)

    @classmethod
    def short_range(cls, ere: EREParams, cutoff: float | None = None):
        return cls(kind="short", ere=ere, cutoff=cutoff)

    def threshold(self) -> float:
        """Lowest admissible trial alpha (dimer binding momentum if 1/a > 0).

        The trimer search must stay below the particle-dimer threshold,
        alpha > kappa_d, which is where the p -> 0 denominator changes sign.
        """
        if self.kind == "finite":
            from .errors import NoDimerError
            from .twobody import dimer_binding

            try:
                return dimer_binding(self.params).kappa_d
            except NoDimerError:
                return 0.0
        inv_a, R0 = self.ere.inv_a, self.ere.R0
        if inv_a <= 0.0:
            return 0.0
        disc = 1.0 + 4.0 * R0 * inv_a
        if disc <= 0.0:
            raise ThresholdViolationError(
                f"short-range denominator never positive for 1/a={inv_a}, R0={R0}"
            )
        # smaller positive root of R0 k^2 + k - 1/a = 0, continuous at R0 = 0
        return 2.0 * inv_a / (1.0 + math.sqrt(disc))


def denominator(p, trial: TrialBinding, spec: KernelSpec):
    """Left-hand-side denominator D(p; alpha) of the trimer equation.

    Finite range: 1/lam - h(kappa1(p)); short range:
    -1/a + R0 kappa1^2 + kappa1.  Raises ThresholdViolationError if the
    result is not strictly positive anywhere on the requested momenta.
    """
    kappa1 = trial.kappa1(p)
    if spec.kind == "finite":
        out = 1.0 / spec.params.lam - h_bound(kappa1, spec.params.beta)
    else:
        inv_a, R0 = spec.ere.inv_a, spec.ere.R0
        out = -inv_a + R0 * kappa1 * kappa1 + kappa1
    if np.any(np.asarray(out) <= 0.0):
        raise ThresholdViolationError(
            f"nonpositive denominator at alpha={trial.alpha}: trial binding too "
            "shallow (or mesh extends past a denominator zero)"
        )
    return out


def short_range_kernel(p, pprime, alpha):
    """Azimuthally integrated zero-range kernel.

    K(p, p') = (2/pi) (p'/p) ln[(p^2 + p'^2 + p p' + alpha^2) /
                                (p^2 + p'^2 - p p' + alpha^2)]

    The log argument exceeds 1 for all p, p' > 0, so the kernel is strictly
    positive; at alpha = 0 it is invariant under joint rescaling of p, p'.
    Evaluated through arctanh of p p' / (p^2 + p'^2 + alpha^2) <= 1/2, with
    the analytic p -> 0 limit (4/pi) p'^2 / (p'^2 + alpha^2) spliced in for
    p <= 1e-8 p'.
    """
    p = np.asarray(p, dtype=float)
    pprime = np.asarray(pprime, dtype=float)
    a2 = alpha * alpha
    big = p * p + pprime * pprime + a2
    small = p <= SERIES_SWITCH * pprime
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = (4.0 / math.pi) * (pprime / p) * np.arctanh(p * pprime / big)
    limit = (4.0 / math.pi) * pprime * pprime / big
    out = np.where(small, limit, direct)
    return out if out.ndim else float(out)


@lru_cache(maxsize=16)
def _leggauss(order: int):
    x, w = leggauss(order)
    return x, w


# Fraction of c = p*p' below which a pole of the angular integrand sits too
# close to x = -1 for Gauss-Legendre; those entries use the analytic form.
_RIDGE_DELTA = 0.05


def _angular_coeffs(p, pprime, alpha, beta):
    """Linear-in-x factor constants (a1, a2, a3, c) of the angular integrand."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(pprime, dtype=float)
    b2 = beta * beta
    a1 = b2 + q * q + 0.25 * p * p
    a2 = b2 + p * p + 0.25 * q * q
    a3 = p * p + q * q + alpha * alpha
    return a1, a2, a3, p * q


def _angular_gl(a1, a2, a3, c, order):
    """Gauss-Legendre value of integral_-1^1 dx / prod_i (a_i + c x)."""
    x, w = _leggauss(order)
    cx = c[..., None] * x
    f = (a1[..., None] + cx) * (a2[..., None] + cx) * (a3[..., None] + cx)
    return (1.0 / f) @ w


def _angular_partial_fractions(a1, a2, a3, c):
    """Analytic value of integral_-1^1 dx / prod_i (a_i + c x).

    Valid for c > 0 and distinct a_i; suffers cancellation when two a_i
    nearly coincide (p ~ p'), which never happens on the near-pole ridge
    p ~ 2 p' >> beta where it is used in production.
    """
    r1 = 1.0 / ((a2 - a1) * (a3 - a1))
    r2 = 1.0 / ((a1 - a2) * (a3 - a2))
    r3 = 1.0 / ((a1 - a3) * (a2 - a3))
    total = (r1 * np.log((a1 + c) / (a1 - c))
             + r2 * np.log((a2 + c) / (a2 - c))
             + r3 * np.log((a3 + c) / (a3 - c)))
    return total / c


def _near_pole(a1, a2, c):
    """Entries whose integrand pole approaches x = -1 (distance < delta*c)."""
    return np.minimum(a1, a2) - c < _RIDGE_DELTA * c


def finite_range_kernel(p, pprime, trial: TrialBinding, params: PotentialParams,
                        order: int = 32, tol: float = 1e-10):
    """Angular-integrated finite-range kernel.

    K(p, p') = p'^2 / (2 pi^2) * integral_-1^1 dx
               [ (beta^2 + p'^2 + p^2/4 + p p' x)
                 (beta^2 + p^2 + p'^2/4 + p p' x)
                 (p^2 + p'^2 + p p' x + alpha^2) ]^-1

    The x-integral is evaluated by Gauss-Legendre, doubling the order until
    two consecutive orders agree to `tol` relative.  The integrand poles sit
    at x <= -(1 + (beta^2 + (p' - p/2)^2)/(p p')) and its mirror, so the base
    order converges fast except on the ridge p ~ 2 p' (or p' ~ 2 p) at
    momenta >> beta, where the pole crowds x = -1; those entries switch to
    the analytic partial-fraction form, whose residues are well separated
    exactly there.  4 pi beta^4 * K approaches the short-range kernel as
    beta -> infinity.
    """
    a1, a2, a3, c = _angular_coeffs(p, pprime, trial.alpha, params.beta)
    ridge = _near_pole(a1, a2, c)
    val = _angular_gl(a1, a2, a3, c, order)
    safe = ~ridge
    while order < 512 and np.any(safe):
        order *= 2
        ref = _angular_gl(a1, a2, a3, c, order)
        err = np.abs(ref - val) / np.maximum(np.abs(ref), 1e-300)
        val = ref
        if np.max(np.where(safe, err, 0.0)) <= tol:
            break
    if np.any(ridge):
        shape = np.shape(val)
        a1b, a2b, a3b, cb = (np.ravel(arr) for arr in
                             np.broadcast_arrays(a1, a2, a3, c))
        mask = np.ravel(np.broadcast_to(ridge, shape))
        val = np.ravel(np.array(val, copy=True))
        val[mask] = _angular_partial_fractions(a1b[mask], a2b[mask],
                                               a3b[mask], cb[mask])
        val = val.reshape(shape)
    out = np.asarray(pprime, dtype=float) ** 2 / (2.0 * math.pi**2) * val
    return out if out.ndim else float(out)


class _AngularTables:
    """Per-(mesh, beta) tables for fast finite-range matrix assembly.

    Everything independent of the trial binding is precomputed: the product
    of the two form-factor x-factors on the Gauss-Legendre grid, the outer
    momentum combinations, and the near-pole ridge mask.
    """

    def __init__(self, nodes: np.ndarray, beta: float, order: int):
        x, w = _leggauss(order)
        self.weights_x = w
        p = nodes[:, None]
        q = nodes[None, :]
        b2 = beta * beta
        self.a1 = b2 + q * q + 0.25 * p * p
        self.a2 = b2 + p * p + 0.25 * q * q
        self.psum = p * p + q * q
        self.c = p * q
        self.cx = self.c[:, :, None] * x
        self.g12 = 1.0 / ((self.a1[:, :, None] + self.cx)
                          * (self.a2[:, :, None] + self.cx))
        self.ridge = _near_pole(self.a1, self.a2, self.c)
        self.qsq = q * q


_MATRIX_ORDER = 48
_table_cache: dict = {}


def _angular_tables(nodes: np.ndarray, beta: float) -> _AngularTables:
    key = (id(nodes), float(beta))
    hit = _table_cache.get(key)
    if hit is not None and hit[0] is nodes:
        return hit[1]
    tab = _AngularTables(nodes, beta, _MATRIX_ORDER)
    if len(_table_cache) >= 4:
        _table_cache.pop(next(iter(_table_cache)))
    _table_cache[key] = (nodes, tab)
    return tab


def finite_range_kernel_matrix(nodes: np.ndarray, trial: TrialBinding,
                               params: PotentialParams) -> np.ndarray:
    """K(p_i, p_j) on a full mesh, reusing cached alpha-independent tables.

    Same hybrid evaluation as finite_range_kernel with a fixed
    Gauss-Legendre order (validated against the doubling path in the test
    suite); only the third angular factor depends on alpha, so repeated
    calls at different trial bindings on one mesh are cheap.
    """
    tab = _angular_tables(nodes, params.beta)
    a3 = tab.psum + trial.alpha**2
    val = (tab.g12 / (a3[:, :, None] + tab.cx)) @ tab.weights_x
    if np.any(tab.ridge):
        m = tab.ridge
        val[m] = _angular_partial_fractions(tab.a1[m], tab.a2[m], a3[m], tab.c[m])
    return tab.qsq / (2.0 * math.pi**2) * val


def limit_identity(beta, kappa):
    """beta/2 - 4 pi beta^4 h_bound(kappa, beta), the short-range denominator seed.

    Equals beta*kappa*(2*beta + kappa) / (2*(beta + kappa)^2) exactly (the
    cancelled form used here to avoid losing digits at large beta) and tends
    to kappa from below with error 3*kappa^2/(2*beta) + O(1/beta^2).
    """
    beta = np.asarray(beta, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    if np.any(beta <= 0.0):
        raise ParameterError("limit_identity needs beta > 0")
    if np.any(kappa < 0.0):
        raise ParameterError("limit_identity needs kappa >= 0")
    out = beta * kappa * (2.0 * beta + kappa) / (2.0 * (beta + kappa) ** 2)
    return out if out.ndim else float(out)


def reconstruct_wavefunction(q, p, cos_theta, alpha, phi, spec: KernelSpec):
    """Momentum-space trimer wave function from the spectator function.

    Psi(q, p, cos_theta) =
        [g(q) phi(p) + g(|-3p/4 - q/2|) phi(|q - p/2|)
                     + g(|3p/4 - q/2|) phi(|q + p/2|)]
        / (q^2 + 3 p^2/4 + alpha^2)

    with cos_theta the angle between the pair momentum q and spectator
    momentum p.  g is the Yamaguchi form factor for the finite-range model
    and 1 for the short-range one (the beta^2 g -> 1 normalization is
    absorbed into phi).  Symmetric under cos_theta -> -cos_theta combined
    with exchange of the two cross terms.  phi must cover all spectator
    arguments; it raises ExtrapolationError otherwise.
    """
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    c = np.asarray(cos_theta, dtype=float)
    if np.any(np.abs(c) > 1.0):
        raise ParameterError("cos_theta must lie in [-1, 1]")

    qq, pp = q * q, p * p
    cross = p * q * c
    g2_arg = np.sqrt(0.5625 * pp + 0.25 * qq + 0.75 * cross)  # |-3p/4 - q/2|
    g3_arg = np.sqrt(0.5625 * pp + 0.25 * qq - 0.75 * cross)  # |3p/4 - q/2|
    phi2_arg = np.sqrt(qq + 0.25 * pp - cross)                # |q - p/2|
    phi3_arg = np.sqrt(qq + 0.25 * pp + cross)                # |q + p/2|

    if spec.kind == "finite":
        beta = spec.params.beta
        g = lambda m: form_factor(m, beta)
    else:
        g = lambda m: np.ones_like(np.asarray(m, dtype=float))

    num = g(q) * phi(p) + g(g2_arg) * phi(phi2_arg) + g(g3_arg) * phi(phi3_arg)
    den = qq + 0.75 * pp + alpha * alpha
    out = num / den
    return out if np.ndim(out) else float(out)
