"""Quantitative universality checks on the solved trimer spectra.

The discrete-scale-invariance exponent s0 is obtained from the standard
transcendental equation as an oracle independent of the solver; spectra are
then tested against e^(2 pi / s0) energy ratios, the cutoff (Danilov)
non-uniqueness of the zero-range model is demonstrated, and the
finite-range equation is shown to converge onto the short-range one as the
form-factor range grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleRangeError, InsufficientDataError, ParameterError
from .kernels import KernelSpec
from .solver import MomentumMesh, TrimerSpectrum, build_mesh, find_levels
from .twobody import EREParams, map_ere_to_potential, map_potential_to_ere

__all__ = [
    "efimov_s0",
    "energy_ratio_target",
    "alpha_ratio_target",
    "scaling_ratios",
    "RatioStudy",
    "CutoffStudy",
    "BetaStudy",
    "UniversalityReport",
    "ratio_study",
    "cutoff_study",
    "beta_convergence",
]

# deviation windows for ratio tests: exclude the regulator-dominated ground
# level (alpha0/alpha_n >= 22) and the mesh floor (alpha_n * cutoff >= 100)
RATIO_DEPTH_MIN = 22.0
RATIO_FLOOR = 100.0
RATIO_TOL = 0.02
LOGPERIOD_TOL = 0.01
DOUBLING_SHIFT_MIN = 0.25


def _s0_equation(s: float) -> float:
    return s * math.cosh(0.5 * math.pi * s) - (8.0 / math.sqrt(3.0)) * math.sinh(
        math.pi * s / 6.0
    )


def efimov_s0(tol: float = 1e-12) -> float:
    """Efimov exponent s0: root of s cosh(pi s/2) = (8/sqrt 3) sinh(pi s/6).

    Bisection on (0.5, 1.5); the root is ~1.00624, giving the geometric
    energy ratio e^(2 pi/s0) ~ 515.03 between successive levels.
    """
    lo, hi = 0.5, 1.5
    flo = _s0_equation(lo)
    if flo * _s0_equation(hi) >= 0.0:
        raise ParameterError("s0 bracket does not straddle the root")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if flo * _s0_equation(mid) <= 0.0:
            hi = mid
        else:
            lo = mid
            flo = _s0_equation(lo)
    return 0.5 * (lo + hi)


def energy_ratio_target() -> float:
    """Universal E_n / E_{n+1} for neighbouring Efimov levels."""
    return math.exp(2.0 * math.pi / efimov_s0())


def alpha_ratio_target() -> float:
    """Universal alpha_n / alpha_{n+1} (square root of the energy ratio)."""
    return math.exp(math.pi / efimov_s0())


def scaling_ratios(spectrum: TrimerSpectrum) -> np.ndarray:
    """Energy ratios E_n / E_{n+1} of consecutive levels."""
    if spectrum.n_levels < 2:
        raise InsufficientDataError(
            f"need at least 2 levels for ratios, got {spectrum.n_levels}"
        )
    alphas = spectrum.alphas
    return (alphas[:-1] / alphas[1:]) ** 2


@dataclass
class RatioStudy:
    """Efimov energy ratios of one spectrum against the universal target."""

    inv_a: float
    R0: float
    cutoff: float
    alphas: np.ndarray
    ratios: np.ndarray
    deviations: np.ndarray
    tested: np.ndarray  # ratio indices inside the universality window
    target: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "inv_a": self.inv_a,
            "R0": self.R0,
            "cutoff": self.cutoff,
            "alphas": self.alphas.tolist(),
            "energy_ratios": self.ratios.tolist(),
            "deviations": self.deviations.tolist(),
            "tested_pairs": self.tested.tolist(),
            "target": self.target,
            "passed": self.passed,
        }


def _ratio_window(alphas: np.ndarray, cutoff: float) -> np.ndarray:
    """Indices n of ratios E_n/E_{n+1} whose BOTH levels sit in the window."""
    ok_level = (alphas[0] / alphas >= RATIO_DEPTH_MIN) & (alphas * cutoff >= RATIO_FLOOR)
    return np.where(ok_level[:-1] & ok_level[1:])[0]


def ratio_study(inv_a: float = 0.0, R0: float = 1.0, n: int = 300,
                cutoff: float | None = None, scale: float | None = None,
                alpha_range=None, max_levels: int = 4,
                points_per_decade: int = 40) -> RatioStudy:
    """Solve the short-range model and test its ratios against e^(2 pi/s0).

    Defaults reproduce the unitarity R0 = 1 benchmark: at least three
    levels whose excited-pair energy ratios land within 2% of 515.03.
    """
    if alpha_range is None:
        alpha_range = (2e-5 / max(R0, 1e-30), 1.0 / max(R0, 1e-30))
    if cutoff is None:
        cutoff = 1e4 * max(alpha_range[1], 1.0 / R0 if R0 > 0 else alpha_range[1])
    if scale is None:
        scale = math.sqrt(alpha_range[0] * alpha_range[1])
    spec = KernelSpec.short_range(EREParams(inv_a=inv_a, R0=R0), cutoff=cutoff)
    mesh = build_mesh(n, scale=scale, cutoff=cutoff)
    spectrum = find_levels(spec, mesh, alpha_range, max_levels=max_levels,
                           points_per_decade=points_per_decade)
    ratios = scaling_ratios(spectrum)
    target = energy_ratio_target()
    deviations = np.abs(ratios / target - 1.0)
    tested = _ratio_window(spectrum.alphas, cutoff)
    # the pair (0, 1) carries the regulator imprint; excited pairs must pass
    excited = np.arange(1, ratios.size)
    check = np.union1d(tested, excited)
    passed = spectrum.n_levels >= 3 and bool(np.all(deviations[check] <= RATIO_TOL))
    return RatioStudy(inv_a=inv_a, R0=R0, cutoff=cutoff, alphas=spectrum.alphas,
                      ratios=ratios, deviations=deviations, tested=check,
                      target=target, passed=passed)


@dataclass
class CutoffStudy:
    """Danilov non-uniqueness of the zero-range model at unitarity.

    Spectra of the R0 = 0 equation at several cutoffs: rescaling the cutoff
    by e^(pi/s0) maps the spectrum onto itself (log-periodicity), rescaling
    it by 2 does not (the absolute spectrum is regulator-defined), while
    level ratios are cutoff-independent.
    """

    cutoffs: list
    spectra: list  # list of np.ndarray of alphas
    logperiod_pairs: list = field(default_factory=list)  # (i, j, deviation)
    doubling_pairs: list = field(default_factory=list)   # (i, j, shift)
    ratio_deviation_max: float = 0.0
    logperiod_passed: bool = False
    doubling_passed: bool = False
    ratios_passed: bool = False

    @property
    def passed(self) -> bool:
        return self.logperiod_passed and self.doubling_passed and self.ratios_passed

    def to_dict(self) -> dict:
        return {
            "cutoffs": list(self.cutoffs),
            "spectra": [a.tolist() for a in self.spectra],
            "logperiod_pairs": self.logperiod_pairs,
            "doubling_pairs": self.doubling_pairs,
            "ratio_deviation_max": self.ratio_deviation_max,
            "logperiod_passed": self.logperiod_passed,
            "doubling_passed": self.doubling_passed,
            "ratios_passed": self.ratios_passed,
            "passed": self.passed,
        }


def cutoff_study(cutoffs, n: int = 300, scale_fraction: float = 0.02,
                 max_levels: int = 4, points_per_decade: int = 40) -> CutoffStudy:
    """Solve the unitarity zero-range model per cutoff and test Danilov scaling.

    The mesh scale tracks the cutoff (scale_fraction * cutoff) so each solve
    is the same discrete problem in its own units; what the study shows is
    that the physics itself fixes only ratios, never absolute energies.
    """
    cutoffs = [float(c) for c in cutoffs]
    if len(cutoffs) < 2:
        raise InsufficientDataError("cutoff study needs at least 2 cutoffs")
    target_alpha = alpha_ratio_target()
    spectra = []
    for lam_cut in cutoffs:
        spec = KernelSpec.short_range(EREParams(inv_a=0.0, R0=0.0), cutoff=lam_cut)
        mesh = build_mesh(n, scale=scale_fraction * lam_cut, cutoff=lam_cut)
        spectrum = find_levels(spec, mesh, (1e-4 * lam_cut, lam_cut),
                               max_levels=max_levels,
                               points_per_decade=points_per_decade)
        spectra.append(spectrum.alphas)

    study = CutoffStudy(cutoffs=cutoffs, spectra=spectra)
    ratio_devs = [0.0]
    for alphas in spectra:
        if alphas.size >= 2:
            ratios = alphas[:-1] / alphas[1:]
            idx = _ratio_window_alpha(alphas)
            if idx.size:
                ratio_devs.append(float(np.max(np.abs(ratios[idx] / target_alpha - 1.0))))
    study.ratio_deviation_max = max(ratio_devs)
    study.ratios_passed = all(a.size >= 2 for a in spectra) and \
        study.ratio_deviation_max <= RATIO_TOL

    for i, ci in enumerate(cutoffs):
        for j, cj in enumerate(cutoffs):
            if j == i or not (spectra[i].size and spectra[j].size):
                continue
            r = cj / ci
            if abs(r / target_alpha - 1.0) < 0.05:
                dev = abs(spectra[j][0] / r / spectra[i][0] - 1.0)
                study.logperiod_pairs.append((i, j, float(dev)))
            if abs(r / 2.0 - 1.0) < 0.10:
                shift = abs(spectra[j][0] / spectra[i][0] - 1.0)
                study.doubling_pairs.append((i, j, float(shift)))

    study.logperiod_passed = bool(study.logperiod_pairs) and all(
        dev <= LOGPERIOD_TOL for _, _, dev in study.logperiod_pairs
    )
    study.doubling_passed = bool(study.doubling_pairs) and all(
        shift > DOUBLING_SHIFT_MIN for _, _, shift in study.doubling_pairs
    )
    return study


def _ratio_window_alpha(alphas: np.ndarray) -> np.ndarray:
    """Ratio indices whose both levels avoid the ground-level regulator imprint."""
    ok = alphas[0] / alphas >= RATIO_DEPTH_MIN
    idx = np.where(ok[:-1] & ok[1:])[0]
    if idx.size == 0 and alphas.size >= 2:
        # fall back to excited pairs when the spectrum is short
        idx = np.arange(1, alphas.size - 1)
    return idx


@dataclass
class BetaStudy:
    """Convergence of the finite-range equation onto its short-range limit.

    Both equations share one fixed cutoff (the three-body regulator; at
    unitarity nothing else pins the spectrum).  Per form-factor range beta
    the finite-range model is tuned to the same 1/a, its effective range
    r0(beta) and the two candidate range corrections are recorded, and the
    level-`level` energies of the two solvers are compared.
    """

    inv_a: float
    cutoff: float
    alpha_ref: float
    level: int
    rows: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    monotone: bool = False

    def deviations(self) -> np.ndarray:
        return np.array([row["deviation"] for row in self.rows])

    def to_dict(self) -> dict:
        return {
            "inv_a": self.inv_a,
            "cutoff": self.cutoff,
            "alpha_ref": self.alpha_ref,
            "level": self.level,
            "rows": self.rows,
            "skipped": self.skipped,
            "monotone": self.monotone,
        }


def beta_convergence(ere: EREParams, beta_multiples, level: int = 0,
                     n: int = 300, cutoff: float = 1.0,
                     points_per_decade: int = 40) -> BetaStudy:
    """Compare finite-range and short-range spectra at growing beta.

    beta_multiples are in units of the reference ground binding momentum
    alpha_ref of the short-range R0 = 0 problem at the shared cutoff.  For
    each beta the Yamaguchi coupling is fixed from 1/a, the short-range
    comparator runs at the Eq-consistent range correction R0(beta) derived
    from that potential (algebraically zero, kept symbolic), and both report
    r0(beta) and the strict-limit value -r0(beta)/2.  Infeasible betas are
    skipped with a notice.  Deviations of the level energies decrease
    monotonically in beta: the finite-range equation becomes the short-range
    one on the fixed momentum domain.
    """
    mesh = build_mesh(n, scale=0.1 * cutoff, cutoff=cutoff)
    ref_spec = KernelSpec.short_range(EREParams(inv_a=ere.inv_a, R0=0.0),
                                      cutoff=cutoff)
    ref_lo = max(0.02 * cutoff, 1.001 * ref_spec.threshold())
    ref = find_levels(ref_spec, mesh, (ref_lo, 0.9 * cutoff),
                      max_levels=level + 1,
                      points_per_decade=points_per_decade)
    if ref.n_levels <= level:
        raise InsufficientDataError(
            f"reference problem has no level {level} below the cutoff"
        )
    alpha_ref = float(ref.alphas[level])
    study = BetaStudy(inv_a=ere.inv_a, cutoff=cutoff, alpha_ref=alpha_ref,
                      level=level)

    for mult in beta_multiples:
        beta = float(mult) * alpha_ref
        try:
            pot = map_ere_to_potential(EREParams(inv_a=ere.inv_a), beta)
        except InfeasibleRangeError as err:
            study.skipped.append({"beta": beta, "reason": str(err)})
            continue
        ere_beta = map_potential_to_ere(pot)
        sr_spec = KernelSpec.short_range(
            EREParams(inv_a=ere.inv_a, R0=ere_beta.R0), cutoff=cutoff)
        fr_spec = KernelSpec.finite_range(pot, cutoff=cutoff)
        lo = max(0.25 * alpha_ref,
                 1.001 * max(fr_spec.threshold(), sr_spec.threshold()))
        window = (lo, 0.9 * cutoff)
        fr = find_levels(fr_spec, mesh, window, max_levels=level + 1,
                         points_per_decade=points_per_decade)
        sr = find_levels(sr_spec, mesh, window, max_levels=level + 1,
                         points_per_decade=points_per_decade)
        if fr.n_levels <= level or sr.n_levels <= level:
            study.skipped.append({"beta": beta,
                                  "reason": "requested level not found"})
            continue
        e_fr = float(fr.energies[level])
        e_sr = float(sr.energies[level])
        study.rows.append({
            "beta": beta,
            "beta_over_alpha_ref": beta / alpha_ref,
            "lam": pot.lam,
            "r0": ere_beta.r0,
            "R0_eq31": ere_beta.R0,
            "R0_strict": -0.5 * ere_beta.r0,
            "alpha_fr": float(fr.alphas[level]),
            "alpha_sr": float(sr.alphas[level]),
            "energy_fr": e_fr,
            "energy_sr": e_sr,
            "deviation": abs(e_fr / e_sr - 1.0),
        })
    devs = study.deviations()
    study.monotone = devs.size >= 2 and bool(np.all(np.diff(devs) < 0.0))
    return study


@dataclass
class UniversalityReport:
    """Bundle of the universality analyses that were actually run."""

    s0: float
    energy_ratio: float
    alpha_ratio: float
    ratio: RatioStudy | None = None
    cutoff: CutoffStudy | None = None
    beta: BetaStudy | None = None

    @classmethod
    def build(cls, ratio=None, cutoff=None, beta=None) -> "UniversalityReport":
        s0 = efimov_s0()
        return cls(s0=s0, energy_ratio=math.exp(2.0 * math.pi / s0),
                   alpha_ratio=math.exp(math.pi / s0), ratio=ratio,
                   cutoff=cutoff, beta=beta)

    @property
    def passed(self) -> bool:
        checks = []
        if self.ratio is not None:
            checks.append(self.ratio.passed)
        if self.cutoff is not None:
            checks.append(self.cutoff.passed)
        if self.beta is not None:
            checks.append(self.beta.monotone)
        return all(checks) if checks else True

    def to_dict(self) -> dict:
        return {
            "s0": self.s0,
            "energy_ratio_target": self.energy_ratio,
            "alpha_ratio_target": self.alpha_ratio,
            "ratio": self.ratio.to_dict() if self.ratio else None,
            "cutoff": self.cutoff.to_dict() if self.cutoff else None,
            "beta": self.beta.to_dict() if self.beta else None,
            "passed": self.passed,
        }
