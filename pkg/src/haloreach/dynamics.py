"""CR3BP dynamics in the canonical rotating frame.

Provides the natural vector field for the third body, its analytic Jacobian,
and the augmented state/costate system of linearized energy-optimal control,
where the control acceleration is recovered as u = -lambda_v. Everything is
expressed in canonical units: primary separation 1 DU, mean motion 1/TU.

State layout conventions used throughout the package:

* state ``x`` : ``[x, y, z, vx, vy, vz]``             (6,)
* costate ``lam`` : ``[lam_r (3), lam_v (3)]``        (6,)
* augmented ``y`` : ``[x (6), lam (6)]``              (12,)

Two costate propagation conventions are supported. The ``adjoint``
convention integrates lam-dot = -J(x)^T lam, which is the optimality
condition of the energy cost and is the default everywhere in the library.
The ``jacobian`` convention integrates lam-dot = -J(x) lam instead; it is
not energy-optimal, but it is the convention that reproduces the reference
eigenstructure tables this package is checked against, so the command-line
pipeline keeps it selectable (and defaults to it for reproduction runs).
See the README for the quantitative comparison of the two.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularityError

I3 = np.eye(3)

# Constant Coriolis block of the acceleration rows: d(a)/d(v).
CORIOLIS = np.array([[0.0, 2.0, 0.0],
                     [-2.0, 0.0, 0.0],
                     [0.0, 0.0, 0.0]])

# Row slice of a 12x12 augmented STM belonging to the velocity costates.
VEL_COSTATE_ROWS = slice(9, 12)

ADJOINT = "adjoint"
JACOBIAN = "jacobian"
COSTATE_CONVENTIONS = (ADJOINT, JACOBIAN)


@dataclass(frozen=True)
class SystemParams:
    """CR3BP mass parameter plus the singularity guard radius.

    Parameters
    ----------
    mu_star : float
        Mass parameter m2 / (m1 + m2); must lie strictly in (0, 0.5).
    label : str
        Free-text system name used in error messages and reports.
    singularity_floor : float
        Hard lower bound on the distance to either primary, in DU.
        Evaluating the dynamics closer than this raises SingularityError.
    """

    mu_star: float
    label: str = "system"
    singularity_floor: float = 1e-12

    def __post_init__(self):
        if not 0.0 < self.mu_star < 0.5:
            raise ValueError(f"mu_star must lie in (0, 0.5), got {self.mu_star}")
        if not self.singularity_floor > 0.0:
            raise ValueError("singularity_floor must be positive")


@dataclass(frozen=True)
class ReferenceOrbit:
    """A periodic solution of the natural dynamics used as reference.

    The closure of the orbit (return to ``initial_state`` after one period
    under zero costate) is not checked here; ``propagation.check_closure``
    quantifies it.
    """

    params: SystemParams
    initial_state: np.ndarray
    period: float
    name: str = "reference"

    def __post_init__(self):
        state = np.array(self.initial_state, dtype=float)
        if state.shape != (6,) or not np.all(np.isfinite(state)):
            raise ValueError("initial_state must be a finite 6-vector")
        state.setflags(write=False)
        object.__setattr__(self, "initial_state", state)
        if not self.period > 0.0:
            raise ValueError(f"period must be positive, got {self.period}")


def _offsets(state, params):
    """Offsets from both primaries and their norms, guarding the floor."""
    mu = params.mu_star
    d1 = np.array([state[0] + mu, state[1], state[2]])
    d2 = np.array([state[0] - 1.0 + mu, state[1], state[2]])
    r1 = float(np.sqrt(d1 @ d1))
    r2 = float(np.sqrt(d2 @ d2))
    if r1 < params.singularity_floor or r2 < params.singularity_floor:
        raise SingularityError(
            f"state within {params.singularity_floor:g} DU of a primary of "
            f"'{params.label}' (R1={r1:.3e}, R2={r2:.3e})")
    return d1, d2, r1, r2


def cr3bp_field(state, params):
    """Natural CR3BP vector field [v; a] in the rotating frame.

    The acceleration combines the Coriolis terms (+2 vy, -2 vx), the
    centrifugal terms (x, y), and the gravity of both primaries located at
    (-mu, 0, 0) and (1 - mu, 0, 0).
    """
    state = np.asarray(state, dtype=float)
    d1, d2, r1, r2 = _offsets(state, params)
    mu = params.mu_star
    omm = 1.0 - mu
    r13 = r1 * r1 * r1
    r23 = r2 * r2 * r2
    x, y, z, vx, vy, vz = state
    ax = 2.0 * vy + x - omm * d1[0] / r13 - mu * d2[0] / r23
    ay = -2.0 * vx + y - omm * y / r13 - mu * y / r23
    az = -omm * z / r13 - mu * z / r23
    return np.array([vx, vy, vz, ax, ay, az])


def potential_hessian(state, params):
    """Hessian of the effective potential (gravity gradient + centrifugal).

    Symmetric 3x3 block feeding the acceleration rows of the Jacobian.
    """
    d1, d2, r1, r2 = _offsets(state, params)
    mu = params.mu_star
    hess = np.zeros((3, 3))
    for d, m, r in ((d1, 1.0 - mu, r1), (d2, mu, r2)):
        r3 = r * r * r
        r5 = r3 * r * r
        hess += m * (3.0 * np.outer(d, d) / r5 - I3 / r3)
    hess[0, 0] += 1.0
    hess[1, 1] += 1.0
    return hess


def cr3bp_jacobian(state, params):
    """Analytic Jacobian of ``cr3bp_field``: block form [[0, I], [U, 2*Omega]]."""
    state = np.asarray(state, dtype=float)
    jac = np.zeros((6, 6))
    jac[0:3, 3:6] = I3
    jac[3:6, 0:3] = potential_hessian(state, params)
    jac[3:6, 3:6] = CORIOLIS
    return jac


def _hessian_gradient_action(state, w, params):
    """d/dr of (U(r) @ w): potential third partials contracted with w."""
    d1, d2, _, _ = _offsets(state, params)
    mu = params.mu_star
    out = np.zeros((3, 3))
    for d, m in ((d1, 1.0 - mu), (d2, mu)):
        rsq = float(d @ d)
        r5 = rsq ** 2.5
        r7 = rsq ** 3.5
        dw = float(d @ w)
        out += m * (3.0 * (dw * I3 + np.outer(d, w) + np.outer(w, d)) / r5
                    - 15.0 * dw * np.outer(d, d) / r7)
    return out


class Cr3bpModel:
    """Callback bundle consumed by the propagator.

    Test suites may substitute any object exposing ``field`` and
    ``jacobian`` (plus optionally ``costate_matrix`` / ``costate_coupling``)
    to drive the propagation and reachability machinery with different
    dynamics for closed-form cross-checks.
    """

    def __init__(self, params: SystemParams, costate_convention: str = ADJOINT):
        if costate_convention not in COSTATE_CONVENTIONS:
            raise ValueError(
                f"costate_convention must be one of {COSTATE_CONVENTIONS}, "
                f"got {costate_convention!r}")
        self.params = params
        self.costate_convention = costate_convention

    def field(self, x):
        return cr3bp_field(x, self.params)

    def jacobian(self, x):
        return cr3bp_jacobian(x, self.params)

    def costate_matrix(self, jac):
        """d(lam-dot)/d(lam) given the state Jacobian at the same point."""
        if self.costate_convention == ADJOINT:
            return -jac.T
        return -jac

    def costate_coupling(self, x, lam):
        """d(lam-dot)/d(x): the only state dependence is through U(r)."""
        out = np.zeros((6, 6))
        if self.costate_convention == ADJOINT:
            # lam_r-dot = -U(r) lam_v
            out[0:3, 0:3] = -_hessian_gradient_action(x, lam[3:6], self.params)
        else:
            # lam_v-dot = -U(r) lam_r - Coriolis^T lam_v
            out[3:6, 0:3] = -_hessian_gradient_action(x, lam[0:3], self.params)
        return out

    def field_and_jacobian(self, x):
        """Field and Jacobian sharing one distance evaluation (hot path)."""
        x = np.asarray(x, dtype=float)
        d1, d2, r1, r2 = _offsets(x, self.params)
        mu = self.params.mu_star
        omm = 1.0 - mu
        r13 = r1 * r1 * r1
        r23 = r2 * r2 * r2
        px, py, pz, vx, vy, vz = x
        field = np.array([
            vx, vy, vz,
            2.0 * vy + px - omm * d1[0] / r13 - mu * d2[0] / r23,
            -2.0 * vx + py - omm * py / r13 - mu * py / r23,
            -omm * pz / r13 - mu * pz / r23,
        ])
        hess = np.zeros((3, 3))
        for d, m, r in ((d1, omm, r1), (d2, mu, r2)):
            rc = r * r * r
            rq = rc * r * r
            hess += m * (3.0 * np.outer(d, d) / rq - I3 / rc)
        hess[0, 0] += 1.0
        hess[1, 1] += 1.0
        jac = np.zeros((6, 6))
        jac[0:3, 3:6] = I3
        jac[3:6, 0:3] = hess
        jac[3:6, 3:6] = CORIOLIS
        return field, jac


def as_model(system, costate_convention: str = ADJOINT):
    """Accept either SystemParams or a ready dynamics model object."""
    if hasattr(system, "field"):
        return system
    return Cr3bpModel(system, costate_convention)


def model_field_and_jacobian(model, x):
    """Field and Jacobian of a model, fused when the model supports it."""
    fused = getattr(model, "field_and_jacobian", None)
    if fused is not None:
        return fused(x)
    return model.field(x), model.jacobian(x)


def _costate_matrix(model, jac):
    fn = getattr(model, "costate_matrix", None)
    if fn is not None:
        return fn(jac)
    return -jac.T


def _costate_coupling(model, x, lam):
    fn = getattr(model, "costate_coupling", None)
    if fn is not None:
        return fn(x, lam)
    return None


def model_augmented_field(model, y):
    """Augmented field [x-dot; lam-dot] with the control substituted.

    The state half is the natural field minus lambda_v in the acceleration
    rows (u = -lambda_v); the costate half follows the model's costate
    convention (adjoint by default).
    """
    y = np.asarray(y, dtype=float)
    x = y[0:6]
    lam = y[6:12]
    field, jac = model_field_and_jacobian(model, x)
    out = np.empty(12)
    out[0:6] = field
    out[3:6] -= lam[3:6]
    out[6:12] = _costate_matrix(model, jac) @ lam
    return out


def model_augmented_jacobian(model, y):
    """Exact 12x12 Jacobian of ``model_augmented_field``.

    At zero costate the coupling block vanishes and the matrix is block
    triangular, so the state rows of the augmented STM reproduce the plain
    6x6 variational flow exactly.
    """
    y = np.asarray(y, dtype=float)
    x = y[0:6]
    lam = y[6:12]
    jac = model.jacobian(x)
    out = np.zeros((12, 12))
    out[0:6, 0:6] = jac
    out[3:6, 9:12] = -I3
    out[6:12, 6:12] = _costate_matrix(model, jac)
    coupling = _costate_coupling(model, x, lam)
    if coupling is not None:
        out[6:12, 0:6] = coupling
    return out


def model_augmented_field_and_jacobian(model, y):
    """Both augmented field and Jacobian from one state evaluation."""
    y = np.asarray(y, dtype=float)
    x = y[0:6]
    lam = y[6:12]
    field, jac = model_field_and_jacobian(model, x)
    cmat = _costate_matrix(model, jac)
    dy = np.empty(12)
    dy[0:6] = field
    dy[3:6] -= lam[3:6]
    dy[6:12] = cmat @ lam
    amat = np.zeros((12, 12))
    amat[0:6, 0:6] = jac
    amat[3:6, 9:12] = -I3
    amat[6:12, 6:12] = cmat
    coupling = _costate_coupling(model, x, lam)
    if coupling is not None:
        amat[6:12, 0:6] = coupling
    return dy, amat


def augmented_field(y, params, costate_convention: str = ADJOINT):
    """CR3BP augmented state/costate field.

    With the default convention the costate half is -J(x)^T lam, the
    optimality condition of the quadratic energy cost.
    """
    return model_augmented_field(Cr3bpModel(params, costate_convention), y)


def augmented_jacobian(y, params, costate_convention: str = ADJOINT):
    """CR3BP 12x12 augmented Jacobian (see ``model_augmented_jacobian``)."""
    return model_augmented_jacobian(Cr3bpModel(params, costate_convention), y)
