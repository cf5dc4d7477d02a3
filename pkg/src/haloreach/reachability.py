"""Energy-limited reachable sets of forced periodic deviations.

Assembles the quadratic cost form over stacked boundary deviations
(dx0, dxf) from a precomputed STM/Gram history, restricts it to the forced
periodic case dxf = dx0, extracts the eigenstructure whose semi-axes bound
the reachable hyperellipsoid, converts thrust limits into energy bounds,
samples the ellipsoid boundary, and reconstructs linear trajectories.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import IllConditionedBvpError

# Eigenvalues below CLAMP_RATIO * max are treated as exact zeros; axes with
# eigenvalues below NEAR_ZERO_RATIO * max are reported unbounded. The gap
# keeps "numerically zero" and "suspiciously small" distinguishable.
EIGEN_CLAMP_RATIO = 1e-12
NEAR_ZERO_RATIO = 1e-8
COND_LIMIT = 1e12


@dataclass(frozen=True)
class EForm:
    """Cost form over stacked boundary deviations [dx0; dxf].

    ``bvp_map`` sends [dx0; dxf] to the initial augmented deviation
    [dx0; dlam0] that realizes those boundary conditions under linearized
    optimal control.
    """

    matrix: np.ndarray        # (12, 12) symmetric PSD
    bvp_map: np.ndarray       # (12, 12)
    cond_estimate: float      # conditioning of the state-costate block


@dataclass(frozen=True)
class EStarForm:
    """Forced periodic cost form with its eigenstructure.

    Eigenvalues ascend, so the first axis is the cheap (along-track)
    direction and the last the stiffest. Entries below the clamp threshold
    are stored as exact zeros. Eigenvectors are orthonormal columns with
    the largest-magnitude component normalized positive.
    """

    matrix: np.ndarray        # (6, 6) symmetrized
    eigenvalues: np.ndarray   # (6,) ascending, clamped
    eigenvectors: np.ndarray  # (6, 6) columns


@dataclass(frozen=True)
class ReachableSet:
    """Semi-axis description of the energy-limited reachable hyperellipsoid."""

    form: EStarForm
    j_star: float
    extents: np.ndarray       # (6,) descending; inf on unbounded axes
    directions: np.ndarray    # (6, 6) columns aligned with extents
    unbounded: np.ndarray     # (6,) bool

    @property
    def semi_axes(self):
        """Finite semi-axis vectors a_i = extent_i * w_i, as columns."""
        finite = ~self.unbounded
        return self.directions[:, finite] * self.extents[finite]


def assemble_e(history):
    """Build the boundary-deviation cost form from a one-period history.

    Extracts the final-state sensitivity blocks Phi_xx and Phi_xlam from
    the period-end STM, forms the boundary-to-initial-costate map through
    linear solves (never an explicit inverse), and sandwiches the final
    cost Gram integral between that map and its transpose.
    """
    final = history.final
    phi = final.stm
    phi_xx = phi[0:6, 0:6]
    phi_xlam = phi[0:6, 6:12]
    cond = float(np.linalg.cond(phi_xlam))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise IllConditionedBvpError(
            f"state/costate sensitivity of '{history.reference.name}' has "
            f"condition estimate {cond:.3e}; the boundary value problem is "
            "numerically singular")
    bvp_map = np.zeros((12, 12))
    bvp_map[0:6, 0:6] = np.eye(6)
    bvp_map[6:12, 0:6] = -np.linalg.solve(phi_xlam, phi_xx)
    bvp_map[6:12, 6:12] = np.linalg.solve(phi_xlam, np.eye(6))
    matrix = bvp_map.T @ final.gram @ bvp_map
    matrix = 0.5 * (matrix + matrix.T)
    return EForm(matrix=matrix, bvp_map=bvp_map, cond_estimate=cond)


def assemble_e_star(e):
    """Restrict the boundary form to forced periodic deviations dxf = dx0."""
    m = e.matrix
    star = m[0:6, 0:6] + m[0:6, 6:12] + m[6:12, 0:6] + m[6:12, 6:12]
    star = 0.5 * (star + star.T)
    values, vectors = np.linalg.eigh(star)
    gamma_max = float(values[-1])
    if gamma_max > 0.0:
        clamped = np.where(values < EIGEN_CLAMP_RATIO * gamma_max, 0.0, values)
        near_zero = int(np.sum(clamped < NEAR_ZERO_RATIO * gamma_max))
    else:
        clamped = np.zeros_like(values)
        near_zero = values.size
    if near_zero > 1:
        warnings.warn(
            f"{near_zero} near-zero eigenvalues: the forced periodic cost "
            "form is degenerate beyond the along-track direction",
            RuntimeWarning, stacklevel=2)
    for col in range(vectors.shape[1]):
        lead = np.argmax(np.abs(vectors[:, col]))
        if vectors[lead, col] < 0.0:
            vectors[:, col] = -vectors[:, col]
    return EStarForm(matrix=star, eigenvalues=clamped, eigenvectors=vectors)


def quadratic_cost(form, dx0):
    """Energy 0.5 * dx0^T E* dx0 through the clamped eigensystem (>= 0).

    Accepts a single 6-vector or a batch shaped (..., 6).
    """
    dx0 = np.asarray(dx0, dtype=float)
    coords = dx0 @ form.eigenvectors
    cost = 0.5 * np.sum(form.eigenvalues * coords * coords, axis=-1)
    if dx0.ndim == 1:
        return float(cost)
    return cost


def j_star_from_thrust(u_max, period):
    """Energy bound of thrusting at u_max for one full period."""
    if u_max < 0.0:
        raise ValueError("u_max must be nonnegative")
    return 0.5 * u_max * u_max * period


def reachable_set(form, j_star):
    """Semi-axes of the reachable ellipsoid for energy bound j_star."""
    if not j_star > 0.0:
        raise ValueError("j_star must be positive")
    gamma = form.eigenvalues
    gamma_max = gamma[-1]
    if gamma_max > 0.0:
        unbounded = gamma < NEAR_ZERO_RATIO * gamma_max
    else:
        unbounded = np.ones_like(gamma, dtype=bool)
    extents = np.full(6, np.inf)
    finite = ~unbounded
    extents[finite] = np.sqrt(2.0 * j_star / gamma[finite])
    return ReachableSet(form=form, j_star=float(j_star), extents=extents,
                        directions=form.eigenvectors.copy(), unbounded=unbounded)


def sample_boundary(rset, n, seed):
    """Draw n deviations on the ellipsoid boundary, cost exactly j_star.

    Directions are uniform on the unit sphere of the finite eigen-axes
    (unbounded axes carry no component); each draw is stretched through the
    semi-axes. Deterministic for a fixed seed.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    finite = ~rset.unbounded
    if not np.any(finite):
        raise ValueError("every axis is unbounded; the boundary is empty")
    rng = np.random.default_rng(seed)
    coords = rng.standard_normal((n, 6))
    coords[:, rset.unbounded] = 0.0
    norms = np.linalg.norm(coords, axis=1)
    while np.any(norms < 1e-12):
        bad = norms < 1e-12
        fresh = rng.standard_normal((int(bad.sum()), 6))
        fresh[:, rset.unbounded] = 0.0
        coords[bad] = fresh
        norms = np.linalg.norm(coords, axis=1)
    coords /= norms[:, None]
    axes = rset.directions[:, finite] * rset.extents[finite]
    return coords[:, finite] @ axes.T


@dataclass(frozen=True)
class LinearTrajectory:
    """Linearized optimally controlled deviation history at checkpoints."""

    times: np.ndarray       # (N,)
    dx: np.ndarray          # (N, 6) state deviations
    dlam: np.ndarray        # (N, 6) costate deviations
    dlam0: np.ndarray       # (6,) initial costate deviation
    cost: float             # energy from the boundary quadratic form

    @property
    def u_mag(self):
        """Thrust magnitude history |u(t)| = |dlam_v(t)|."""
        return np.linalg.norm(self.dlam[:, 3:6], axis=1)


def propagate_linear(history, dx0, dxf, e=None):
    """Map boundary deviations through the STM history.

    Solves the linearized boundary value problem for the initial costate,
    pushes the initial augmented deviation through every checkpointed STM,
    and prices the trajectory with the boundary cost form.
    """
    if e is None:
        e = assemble_e(history)
    bc = np.concatenate([np.asarray(dx0, dtype=float),
                         np.asarray(dxf, dtype=float)])
    dy0 = e.bvp_map @ bc
    devs = history.stms @ dy0
    cost = 0.5 * float(bc @ e.matrix @ bc)
    return LinearTrajectory(times=history.times, dx=devs[:, 0:6],
                            dlam=devs[:, 6:12], dlam0=dy0[6:12], cost=cost)
