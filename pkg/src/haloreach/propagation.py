"""Adaptive 8th-order Runge-Kutta propagation with checkpointed output.

Integrates the natural state, the augmented state with its running control
cost, and the coupled system (reference state, 12x12 state transition
matrix, 12x12 cost Gram integral) that downstream reachability analysis
consumes. The stepper is scipy's DOP853 pair (explicit 8th order with
embedded error estimate), driven manually so that step budgets, minimum
step checks, and checkpoint evaluation stay under local control.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import DOP853

from .dynamics import (
    ReferenceOrbit,
    as_model,
    model_augmented_field,
    model_augmented_field_and_jacobian,
)
from .errors import PropagationError

# Packed storage pattern for the symmetric 12x12 Gram integral.
_TRIU_I, _TRIU_J = np.triu_indices(12)
_N_SYM = _TRIU_I.size  # 78


@dataclass(frozen=True)
class IntegratorConfig:
    """Error-control and budget settings for the adaptive RK8 stepper."""

    abs_tol: float = 1e-13
    rel_tol: float = 1e-13
    max_step: float = math.inf
    min_step: float = 0.0
    max_steps: int = 500_000

    def __post_init__(self):
        if not (self.abs_tol > 0.0 and self.rel_tol > 0.0):
            raise ValueError("tolerances must be positive")
        if not self.min_step < self.max_step:
            raise ValueError("min_step must be smaller than max_step")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")


def _pack_sym(mat):
    return mat[_TRIU_I, _TRIU_J]


def _unpack_sym(packed):
    mat = np.zeros((12, 12))
    mat[_TRIU_I, _TRIU_J] = packed
    mat[_TRIU_J, _TRIU_I] = packed
    return mat


def _integrate(rhs, t0, tf, y0, cfg, checkpoint_times=None):
    """Run DOP853 from t0 to tf; optionally record dense output.

    Returns ``(y_final, checkpoint_values)`` where the second element is
    None when no checkpoint times were requested. Checkpoint times must lie
    within the integration span and be ordered in the direction of
    integration; values at interior times come from the order-7 dense
    interpolant, endpoint values are taken exactly.
    """
    y0 = np.asarray(y0, dtype=float)
    t0 = float(t0)
    tf = float(tf)
    want = checkpoint_times is not None
    if want:
        checkpoint_times = np.asarray(checkpoint_times, dtype=float)
        lo, hi = min(t0, tf), max(t0, tf)
        if checkpoint_times.size and not (
                checkpoint_times.min() >= lo and checkpoint_times.max() <= hi):
            raise ValueError("checkpoint times must lie within the span")
        out = np.empty((checkpoint_times.size, y0.size))

    if tf == t0:
        if want:
            out[:] = y0
            return y0.copy(), out
        return y0.copy(), None

    solver = DOP853(rhs, t0, y0, tf, rtol=cfg.rel_tol, atol=cfg.abs_tol,
                    max_step=cfg.max_step)
    forward = tf > t0
    idx = 0
    nsteps = 0
    while solver.status == "running":
        message = solver.step()
        nsteps += 1
        if solver.status == "failed":
            raise PropagationError(
                f"step-size underflow at t={solver.t:.9g}: {message}")
        if nsteps > cfg.max_steps:
            raise PropagationError(f"exceeded max_steps={cfg.max_steps}")
        if (cfg.min_step > 0.0 and solver.status == "running"
                and solver.step_size is not None
                and solver.step_size < cfg.min_step):
            raise PropagationError(
                f"step size {solver.step_size:.3e} fell below the configured "
                f"minimum {cfg.min_step:.3e} at t={solver.t:.9g}")
        if want:
            dense = None
            while idx < checkpoint_times.size:
                tc = checkpoint_times[idx]
                reached = tc <= solver.t if forward else tc >= solver.t
                if not reached:
                    break
                if tc == t0:
                    out[idx] = y0
                elif tc == solver.t:
                    out[idx] = solver.y
                else:
                    if dense is None:
                        dense = solver.dense_output()
                    out[idx] = dense(tc)
                idx += 1
    if want:
        # Anything left can only sit at the final time to within roundoff.
        while idx < checkpoint_times.size:
            out[idx] = solver.y
            idx += 1
        return solver.y.copy(), out
    return solver.y.copy(), None


def propagate_state(state0, span, system, cfg=None, checkpoint_times=None):
    """Propagate the natural dynamics over ``span = (t0, tf)``.

    Returns the final 6-state, or ``(final, values)`` with per-checkpoint
    states when ``checkpoint_times`` is given.
    """
    cfg = cfg or IntegratorConfig()
    model = as_model(system)
    state0 = np.asarray(state0, dtype=float)
    if state0.shape != (6,) or not np.all(np.isfinite(state0)):
        raise ValueError("state0 must be a finite 6-vector")

    def rhs(_t, y):
        return model.field(y)

    final, values = _integrate(rhs, span[0], span[1], state0, cfg,
                               checkpoint_times)
    if checkpoint_times is None:
        return final
    return final, values


@dataclass(frozen=True)
class AugmentedResult:
    """Outcome of an augmented propagation.

    ``cost`` is the accumulated control energy 0.5 * integral of |lambda_v|^2,
    carried as an extra ODE component under the same error control.
    """

    state: np.ndarray             # (12,) final augmented state
    cost: float
    times: np.ndarray | None = None
    states: np.ndarray | None = None   # (N, 12) checkpointed augmented states
    costs: np.ndarray | None = None    # (N,) running cost at the checkpoints


def propagate_augmented(y0, span, system, cfg=None, checkpoint_times=None):
    """Propagate state + costate with the cost quadrature attached."""
    cfg = cfg or IntegratorConfig()
    model = as_model(system)
    y0 = np.asarray(y0, dtype=float)
    if y0.shape != (12,) or not np.all(np.isfinite(y0)):
        raise ValueError("y0 must be a finite 12-vector")

    def rhs(_t, z):
        dz = np.empty(13)
        dz[0:12] = model_augmented_field(model, z[0:12])
        lv = z[9:12]
        dz[12] = 0.5 * (lv @ lv)
        return dz

    z0 = np.append(y0, 0.0)
    zf, values = _integrate(rhs, span[0], span[1], z0, cfg, checkpoint_times)
    if values is None:
        return AugmentedResult(state=zf[0:12], cost=float(zf[12]))
    return AugmentedResult(
        state=zf[0:12], cost=float(zf[12]),
        times=np.asarray(checkpoint_times, dtype=float).copy(),
        states=values[:, 0:12], costs=values[:, 12])


@dataclass(frozen=True)
class StmRecord:
    """Augmented STM and accumulated cost Gram integral at one checkpoint."""

    t: float
    y: np.ndarray        # (12,) reference augmented state, costate half zero
    stm: np.ndarray      # (12, 12) transition matrix from t0 to t
    gram: np.ndarray     # (12, 12) integral of Phi_lv^T Phi_lv up to t


@dataclass(frozen=True)
class StmHistory:
    """Checkpointed STM/Gram history along one reference period."""

    times: np.ndarray     # (N,)
    states: np.ndarray    # (N, 12)
    stms: np.ndarray      # (N, 12, 12)
    grams: np.ndarray     # (N, 12, 12)
    reference: ReferenceOrbit
    abs_tol: float
    rel_tol: float

    def __len__(self):
        return self.times.size

    def record(self, i) -> StmRecord:
        return StmRecord(t=float(self.times[i]), y=self.states[i],
                         stm=self.stms[i], gram=self.grams[i])

    @property
    def records(self):
        return [self.record(i) for i in range(len(self))]

    @property
    def final(self) -> StmRecord:
        return self.record(len(self) - 1)

    def save(self, path):
        np.savez_compressed(
            path, times=self.times, states=self.states, stms=self.stms,
            grams=self.grams, mu_star=self.reference.params.mu_star,
            singularity_floor=self.reference.params.singularity_floor,
            label=self.reference.params.label, name=self.reference.name,
            initial_state=self.reference.initial_state,
            period=self.reference.period,
            abs_tol=self.abs_tol, rel_tol=self.rel_tol)

    @classmethod
    def load(cls, path):
        from .dynamics import SystemParams
        data = np.load(path, allow_pickle=False)
        params = SystemParams(mu_star=float(data["mu_star"]),
                              label=str(data["label"]),
                              singularity_floor=float(data["singularity_floor"]))
        orbit = ReferenceOrbit(params=params,
                               initial_state=data["initial_state"],
                               period=float(data["period"]),
                               name=str(data["name"]))
        return cls(times=data["times"], states=data["states"],
                   stms=data["stms"], grams=data["grams"], reference=orbit,
                   abs_tol=float(data["abs_tol"]), rel_tol=float(data["rel_tol"]))


def history_cache_key(orbit, n_checkpoints, cfg, extra=""):
    """Stable content key for caching a history artifact.

    ``extra`` distinguishes otherwise identical builds, e.g. the costate
    convention of the model the history was propagated with.
    """
    h = hashlib.sha256()
    h.update(np.asarray(orbit.initial_state, dtype=float).tobytes())
    payload = (orbit.params.mu_star, orbit.period, int(n_checkpoints),
               cfg.abs_tol, cfg.rel_tol, cfg.max_step, cfg.min_step, extra)
    h.update(repr(payload).encode())
    return h.hexdigest()[:24]


def _verify_history(history):
    first = history.record(0)
    if not np.array_equal(first.stm, np.eye(12)):
        raise PropagationError("initial STM record is not the identity")
    if np.any(first.gram != 0.0):
        raise PropagationError("initial Gram record is not zero")
    if np.any(np.diff(history.times) <= 0.0):
        raise PropagationError("checkpoint times are not strictly increasing")
    sign, logdet = np.linalg.slogdet(history.stms)
    if np.any(sign == 0.0) or not np.all(np.isfinite(logdet)):
        raise PropagationError("singular STM encountered at a checkpoint")
    eigs = np.linalg.eigvalsh(history.grams)
    traces = np.maximum(np.trace(history.grams, axis1=1, axis2=2), 1.0)
    if np.any(eigs[:, 0] < -1e-12 * traces):
        raise PropagationError("cost Gram integral lost positive semidefiniteness")


def build_stm_history(orbit, n_checkpoints=2000, cfg=None, model=None):
    """Jointly integrate the reference, its 12x12 STM, and the cost Gram.

    The three pieces form one coupled ODE system so the Gram integral
    inherits the stepper's error control instead of relying on post-hoc
    quadrature over checkpoints. Checkpoints are uniform in time over one
    period, the first at t0 and the last at t0 + period.
    """
    if n_checkpoints < 2:
        raise ValueError("n_checkpoints must be at least 2")
    cfg = cfg or IntegratorConfig()
    model = as_model(model if model is not None else orbit.params)

    def rhs(_t, z):
        y = z[0:12]
        if np.max(np.abs(y[6:12])) > 1e-15:
            # The reference carries an identically zero costate; anything
            # else means the caller fed a contaminated initial state.
            raise PropagationError("reference costate drifted off zero")
        dy, amat = model_augmented_field_and_jacobian(model, y)
        phi = z[12:156].reshape(12, 12)
        lv_rows = phi[9:12, :]
        dz = np.empty(z.size)
        dz[0:12] = dy
        dz[12:156] = (amat @ phi).reshape(144)
        dz[156:] = _pack_sym(lv_rows.T @ lv_rows)
        return dz

    z0 = np.concatenate([np.asarray(orbit.initial_state, dtype=float),
                         np.zeros(6), np.eye(12).reshape(144),
                         np.zeros(_N_SYM)])
    times = np.linspace(0.0, orbit.period, int(n_checkpoints))
    _, values = _integrate(rhs, 0.0, orbit.period, z0, cfg, times)

    states = values[:, 0:12].copy()
    stms = values[:, 12:156].reshape(-1, 12, 12).copy()
    grams = np.stack([_unpack_sym(row) for row in values[:, 156:]])
    history = StmHistory(times=times, states=states, stms=stms, grams=grams,
                         reference=orbit, abs_tol=cfg.abs_tol,
                         rel_tol=cfg.rel_tol)
    _verify_history(history)
    return history


@dataclass(frozen=True)
class ClosureReport:
    """One-period return errors plus the inherent maintenance cost."""

    position_error: float    # DU
    velocity_error: float    # DU/TU
    inherent_cost: float     # DU^2/TU^3


def check_closure(orbit, cfg=None, shooting_cfg=None, model=None,
                  inherent_skip_bound=None):
    """Quantify how periodic the stored reference actually is.

    The position/velocity errors come from a plain one-period propagation.
    The inherent cost is the converged energy of the nonlinear forced
    periodic solution that pins the trajectory back to its own initial
    state, i.e. the price of the truncated digits in the catalog entry.

    When ``inherent_skip_bound`` is given and the position error already
    exceeds it, the (hopeless) shooting solve is skipped and the inherent
    cost reported as NaN.
    """
    cfg = cfg or IntegratorConfig()
    model = as_model(model if model is not None else orbit.params)
    final = propagate_state(orbit.initial_state, (0.0, orbit.period), model, cfg)
    diff = final - orbit.initial_state
    position_error = float(np.linalg.norm(diff[0:3]))
    velocity_error = float(np.linalg.norm(diff[3:6]))
    if inherent_skip_bound is not None and position_error > inherent_skip_bound:
        return ClosureReport(position_error=position_error,
                             velocity_error=velocity_error,
                             inherent_cost=float("nan"))

    from .shooting import ShootingConfig, shoot_nonlinear  # cycle break

    result = shoot_nonlinear(orbit, np.zeros(6),
                             cfg=shooting_cfg or ShootingConfig(),
                             integrator=cfg, model=model, n_checkpoints=2)
    return ClosureReport(position_error=position_error,
                         velocity_error=velocity_error,
                         inherent_cost=result.true_cost)
