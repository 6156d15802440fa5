"""Nystrom discretization and bound-state search for the trimer equation.

The integral equation D(p) phi(p) = integral K(p, p') phi(p') dp' is
discretized on a mapped Gauss-Legendre mesh into the dense eigenproblem
phi = M phi with M_ij = w_j K(p_i, p_j) / D(p_i).  M is nonnegative and
similar to a symmetric matrix, so its spectrum is real; trimer levels are
the trial bindings alpha at which an eigenvalue branch of M crosses 1.
The deepest level belongs to the Perron root, which is strictly decreasing
in alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import eigh

from .errors import (
    ExtrapolationError,
    NumericalFailureError,
    ParameterError,
    StaleLevelError,
    ThresholdViolationError,
)
from .kernels import (
    KernelSpec,
    TrialBinding,
    denominator,
    finite_range_kernel_matrix,
    short_range_kernel,
)

__all__ = [
    "MomentumMesh",
    "build_mesh",
    "SpectatorFunction",
    "KernelSystem",
    "assemble",
    "principal_eigenvalue",
    "find_levels",
    "spectator",
    "TrimerSpectrum",
    "default_cutoff",
    "default_scale",
]

MIN_MESH_SIZE = 16


@dataclass(frozen=True)
class MomentumMesh:
    """Quadrature nodes and weights on (0, cutoff).

    Gauss-Legendre nodes t on (0, t_max) pushed through the rational map
    p = scale * t / (1 - t) with t_max = cutoff / (scale + cutoff), so the
    nodes fill (0, cutoff) with density concentrated around p ~ scale.
    """

    nodes: np.ndarray
    weights: np.ndarray
    scale: float
    cutoff: float

    @property
    def n(self) -> int:
        return self.nodes.size

    def integrate(self, values: np.ndarray) -> float:
        return float(self.weights @ values)


def build_mesh(n: int, scale: float, cutoff: float) -> MomentumMesh:
    """Mapped Gauss-Legendre mesh with n nodes on (0, cutoff)."""
    if not isinstance(n, (int, np.integer)) or n < MIN_MESH_SIZE:
        raise ParameterError(f"mesh needs at least {MIN_MESH_SIZE} nodes, got {n}")
    if not (0.0 < scale < cutoff):
        raise ParameterError(f"mesh needs 0 < scale < cutoff, got {scale}, {cutoff}")
    x, w = leggauss(int(n))
    t_max = cutoff / (scale + cutoff)
    t = 0.5 * (x + 1.0) * t_max
    wt = 0.5 * t_max * w
    one_minus_t = 1.0 - t
    nodes = scale * t / one_minus_t
    weights = wt * scale / one_minus_t**2
    return MomentumMesh(nodes=nodes, weights=weights, scale=scale, cutoff=cutoff)


@dataclass
class SpectatorFunction:
    """Spectator amplitude phi on the mesh, normalized to max |phi| = 1.

    Calling it interpolates linearly in (log p, log |phi|) with the sign
    taken from the nearest node; arguments outside the mesh support raise
    ExtrapolationError.
    """

    momenta: np.ndarray
    values: np.ndarray
    alpha: float
    _log_p: np.ndarray = field(init=False, repr=False)
    _log_abs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        peak = np.max(np.abs(self.values))
        if peak > 0.0:
            self.values = self.values / peak
        self._log_p = np.log(self.momenta)
        self._log_abs = np.log(np.maximum(np.abs(self.values), 1e-300))

    def __call__(self, p):
        p = np.asarray(p, dtype=float)
        if np.any(p < self.momenta[0]) or np.any(p > self.momenta[-1]):
            raise ExtrapolationError(
                f"spectator function sampled outside mesh range "
                f"[{self.momenta[0]:.3e}, {self.momenta[-1]:.3e}]"
            )
        mag = np.exp(np.interp(np.log(p), self._log_p, self._log_abs))
        idx = np.clip(np.searchsorted(self.momenta, p), 1, self.momenta.size - 1)
        left_closer = (p - self.momenta[idx - 1]) <= (self.momenta[idx] - p)
        nearest = np.where(left_closer, idx - 1, idx)
        sign = np.sign(self.values[nearest])
        out = mag * np.where(sign == 0.0, 1.0, sign)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class KernelSystem:
    """Discretized trimer operator M_ij = w_j K(p_i, p_j) / D(p_i)."""

    matrix: np.ndarray
    denominators: np.ndarray
    mesh: MomentumMesh
    trial: TrialBinding
    spec: KernelSpec


def assemble(alpha: float, spec: KernelSpec, mesh: MomentumMesh) -> KernelSystem:
    """Build the dense Nystrom matrix at trial binding alpha.

    Propagates ThresholdViolationError from the denominator when alpha is
    too shallow for the spec.
    """
    trial = TrialBinding(alpha)
    denoms = np.asarray(denominator(mesh.nodes, trial, spec))
    if spec.kind == "short":
        kernel = short_range_kernel(mesh.nodes[:, None], mesh.nodes[None, :], alpha)
    else:
        kernel = finite_range_kernel_matrix(mesh.nodes, trial, spec.params)
    matrix = kernel * mesh.weights[None, :] / denoms[:, None]
    if not np.all(np.isfinite(matrix)) or np.any(matrix < 0.0):
        raise NumericalFailureError("kernel matrix has invalid entries")
    return KernelSystem(matrix=matrix, denominators=denoms, mesh=mesh,
                        trial=trial, spec=spec)


def principal_eigenvalue(system: KernelSystem, tol: float = 1e-11,
                         maxiter: int = 100_000):
    """Perron root of the kernel matrix by power iteration.

    The matrix is nonnegative and irreducible, so iteration from the
    all-ones vector converges to the unique positive eigenvector.  Returns
    (eta, SpectatorFunction).
    """
    matrix = system.matrix
    v = np.ones(matrix.shape[0]) / math.sqrt(matrix.shape[0])
    eta_prev = -1.0
    for _ in range(maxiter):
        w = matrix @ v
        eta = float(np.linalg.norm(w))
        if eta == 0.0:
            raise NumericalFailureError("power iteration hit the zero vector")
        v = w / eta
        if abs(eta - eta_prev) <= tol * eta:
            phi = SpectatorFunction(momenta=system.mesh.nodes, values=v,
                                    alpha=system.trial.alpha)
            return eta, phi
        eta_prev = eta
    raise NumericalFailureError(
        f"power iteration did not reach tol={tol} in {maxiter} iterations"
    )


def _symmetrized(system: KernelSystem) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric matrix similar to M, plus the similarity column scaling.

    K(p, p')/p'^2 is symmetric, hence B = C M C^-1 with
    C = diag(sqrt(w p^2 D)) is symmetric and shares M's (real) spectrum;
    an eigenvector u of B maps back to phi = u / c.
    """
    mesh, denoms = system.mesh, system.denominators
    c = np.sqrt(mesh.weights * mesh.nodes**2 * denoms)
    b = system.matrix * (c[:, None] / c[None, :])
    b = 0.5 * (b + b.T)  # symmetrize float round-off
    return b, c


def _top_eigenvalues(system: KernelSystem, count: int) -> np.ndarray:
    """Largest `count` eigenvalues of M, descending."""
    b, _ = _symmetrized(system)
    n = b.shape[0]
    vals = eigh(b, eigvals_only=True, subset_by_index=(n - count, n - 1))
    return vals[::-1]


@dataclass(frozen=True)
class TrimerSpectrum:
    """Bound trimer levels: binding momenta alpha_0 > alpha_1 > ...

    energies are E_n = -alpha_n^2; residuals store |eta(alpha_n) - 1| for
    the eigenvalue branch that crosses 1 at each level.
    """

    alphas: np.ndarray
    residuals: np.ndarray

    def __post_init__(self):
        if self.alphas.size > 1 and not np.all(np.diff(self.alphas) < 0.0):
            raise NumericalFailureError("spectrum levels must strictly decrease")

    @property
    def energies(self) -> np.ndarray:
        return -self.alphas**2

    @property
    def n_levels(self) -> int:
        return self.alphas.size


def find_levels(spec: KernelSpec, mesh: MomentumMesh, alpha_range,
                max_levels: int = 4, points_per_decade: int = 40,
                residual_tol: float = 1e-9) -> TrimerSpectrum:
    """Locate trimer levels inside [alpha_min, alpha_max].

    Scans a log-spaced grid of trial bindings, evaluates the leading
    eigenvalue branches of M(alpha) at every point, brackets each branch's
    crossing of 1 and bisects it to |eta - 1| <= residual_tol.  Branch j
    crossing 1 is level j: the Perron root gives the deepest state and each
    lower branch one more excited state (their eigenvectors gain nodes).
    Returns the levels deepest-first; no crossing at all yields an empty
    spectrum, which is not an error.
    """
    alpha_min, alpha_max = float(alpha_range[0]), float(alpha_range[1])
    if not (0.0 < alpha_min < alpha_max):
        raise ParameterError(f"need 0 < alpha_min < alpha_max, got {alpha_range}")
    thr = spec.threshold()
    if alpha_min <= thr:
        raise ThresholdViolationError(
            f"alpha_min={alpha_min} does not exceed the dimer threshold {thr}"
        )
    decades = math.log10(alpha_max / alpha_min)
    n_grid = max(2, int(math.ceil(decades * points_per_decade)) + 1)
    grid = np.geomspace(alpha_max, alpha_min, n_grid)  # descending
    n_branch = min(max_levels + 2, mesh.n)

    table = np.empty((n_grid, n_branch))
    for i, alpha in enumerate(grid):
        table[i] = _top_eigenvalues(assemble(alpha, spec, mesh), n_branch)

    def branch_value(alpha, j):
        return _top_eigenvalues(assemble(alpha, spec, mesh), j + 1)[j]

    alphas, residuals = [], []
    for j in range(n_branch):
        if len(alphas) >= max_levels:
            break
        excess = table[:, j] - 1.0
        hit = None
        for i in range(n_grid - 1):
            if excess[i] < 0.0 <= excess[i + 1]:
                hit = i
                break
        if hit is None:
            break  # branches are ordered: deeper ones cross even later
        hi, lo = grid[hit], grid[hit + 1]  # eta(hi) < 1 <= eta(lo)
        val = table[hit + 1, j]
        best_alpha, best_res = lo, abs(val - 1.0)
        for _ in range(200):
            if best_res <= residual_tol or hi - lo <= 1e-15 * hi:
                break
            mid = math.sqrt(hi * lo)
            val = branch_value(mid, j)
            res = abs(val - 1.0)
            if res < best_res:
                best_alpha, best_res = mid, res
            if val >= 1.0:
                lo = mid
            else:
                hi = mid
        alphas.append(best_alpha)
        residuals.append(best_res)

    return TrimerSpectrum(alphas=np.asarray(alphas), residuals=np.asarray(residuals))


def spectator(spec: KernelSpec, mesh: MomentumMesh, alpha_n: float,
              level_tol: float = 1e-6) -> SpectatorFunction:
    """Spectator function at a solved level alpha_n.

    Takes the eigenvector whose eigenvalue lies closest to 1; raises
    StaleLevelError when no eigenvalue is within level_tol of 1 (alpha_n is
    not a level of this spec/mesh).  The deepest level carries the strictly
    positive Perron vector; excited ones oscillate.
    """
    system = assemble(alpha_n, spec, mesh)
    b, c = _symmetrized(system)
    vals, vecs = eigh(b)
    idx = int(np.argmin(np.abs(vals - 1.0)))
    if abs(vals[idx] - 1.0) > level_tol:
        raise StaleLevelError(
            f"alpha={alpha_n} is not a level: nearest eigenvalue "
            f"{vals[idx]:.9f} misses 1 by more than {level_tol}"
        )
    phi = vecs[:, idx] / c
    if phi[np.argmax(np.abs(phi))] < 0.0:
        phi = -phi
    return SpectatorFunction(momenta=mesh.nodes, values=phi, alpha=alpha_n)


def default_cutoff(spec: KernelSpec, alpha_max: float) -> float:
    """Quadrature cutoff policy when the user supplies none.

    Short range with R0 > 0: 10^4 * max(alpha_max, 1/R0) (pure truncation,
    the R0 term already regularizes).  R0 < 0: just below the ultraviolet
    zero of the denominator.  R0 = 0 has no default: the cutoff is physics.
    Finite range: 10^3 * max(alpha_max, beta).
    """
    if spec.kind == "finite":
        return 1e3 * max(alpha_max, spec.params.beta)
    inv_a, R0 = spec.ere.inv_a, spec.ere.R0
    if R0 > 0.0:
        return 1e4 * max(alpha_max, 1.0 / R0)
    if R0 == 0.0:
        raise ParameterError("short-range model with R0 = 0 needs an explicit cutoff")
    disc = 1.0 + 4.0 * R0 * inv_a
    if disc <= 0.0:
        raise ThresholdViolationError(
            f"short-range denominator never positive for 1/a={inv_a}, R0={R0}"
        )
    kappa_uv = (1.0 + math.sqrt(disc)) / (2.0 * abs(R0))
    lam_max = 2.0 / math.sqrt(3.0) * math.sqrt(max(kappa_uv**2 - alpha_max**2, 0.0))
    if lam_max <= 0.0:
        raise ThresholdViolationError(
            f"no admissible cutoff below the denominator zero for R0={R0}"
        )
    return 0.8 * lam_max


def default_scale(alpha_min: float, alpha_max: float) -> float:
    """Mesh map scale centered (geometrically) on the search window."""
    return math.sqrt(alpha_min * alpha_max)
