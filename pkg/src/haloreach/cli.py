"""Command-line pipeline: orbit checks, reachable sets, validation sweeps,
and eigendirection trajectory exports.

Configuration comes from built-in defaults, an optional JSON config file,
and command-line flags, in that order of increasing precedence. All CSV
output is in canonical units at 17 significant digits; ``--si`` appends
converted columns where a single-unit conversion is meaningful.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 threshold violation in check commands.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import units
from .catalog import OrbitCatalogEntry, get_orbit_entry
from .csvio import write_csv
from .dynamics import ADJOINT, COSTATE_CONVENTIONS, JACOBIAN, Cr3bpModel
from .errors import (
    ConfigError,
    HaloReachError,
    IllConditionedBvpError,
    PropagationError,
    ShootingError,
    SingularityError,
)
from .propagation import (
    IntegratorConfig,
    StmHistory,
    build_stm_history,
    check_closure,
    history_cache_key,
)
from .reachability import (
    assemble_e,
    assemble_e_star,
    j_star_from_thrust,
    propagate_linear,
    quadratic_cost,
    reachable_set,
    sample_boundary,
)
from .shooting import ShootingConfig, shoot_nonlinear, validation_sweep

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_THRESHOLD = 4

CLOSURE_HEADER = ["position_error", "velocity_error", "inherent_cost"]
EIGEN_HEADER = ["axis", "gamma", "extent", "unbounded",
                "dir_x", "dir_y", "dir_z", "dir_vx", "dir_vy", "dir_vz"]
SAMPLES_HEADER = ["sample", "dx", "dy", "dz", "dvx", "dvy", "dvz", "cost"]
TRAJECTORY_HEADER = ["sample", "t", "dx", "dy", "dz", "dvx", "dvy", "dvz", "u_mag"]
VALIDATION_HEADER = ["scale", "linear_cost", "true_cost", "abs_error",
                     "rel_error", "trusted", "iterations", "residual", "failure"]
EIGEN_TRAJ_HEADER = ["axis", "t", "dx", "dy", "dz", "dvx", "dvy", "dvz", "u_mag"]
THRUST_HEADER = ["axis", "t", "u_mag"]


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings for one pipeline invocation."""

    orbit: str = "em-l2-halo-southern"
    orbit_inline: dict | None = None
    catalog: str | None = None
    u_max: float | None = None          # DU/TU^2
    u_max_si: float | None = None       # m/s^2
    j_star: float | None = None         # DU^2/TU^3
    n_samples: int = 10000
    n_checkpoints: int = 2000
    n_trajectories: int = 256
    trajectory_stride: int = 10
    seed: int = 0
    abs_tol: float = 1e-13
    rel_tol: float = 1e-13
    residual_tol: float = 1e-11
    costate_convention: str = JACOBIAN
    out_dir: str = "out"
    cache_stm: bool = False
    cache_dir: str | None = None
    si: bool = False
    closure_position_bound: float = 1e-6
    direction: int = 4
    cost_min: float = 1e-6
    cost_max: float = 3.51e-4
    n_scales: int = 16

    def validate(self):
        given = [name for name, value in
                 (("u_max", self.u_max), ("u_max_si", self.u_max_si),
                  ("j_star", self.j_star)) if value is not None]
        if len(given) > 1:
            raise ConfigError(
                f"exactly one of u_max / u_max_si / j_star may be set, "
                f"got {given}")
        if self.n_samples < 0:
            raise ConfigError("n_samples must be nonnegative")
        if self.n_checkpoints < 2:
            raise ConfigError("n_checkpoints must be at least 2")
        if self.n_trajectories < 0:
            raise ConfigError("n_trajectories must be nonnegative")
        if self.trajectory_stride < 1:
            raise ConfigError("trajectory_stride must be positive")
        if self.costate_convention not in COSTATE_CONVENTIONS:
            raise ConfigError(
                f"costate_convention must be one of {COSTATE_CONVENTIONS}")
        if not 1 <= self.direction <= 6:
            raise ConfigError("direction must be an axis index in 1..6")
        if self.n_scales < 0:
            raise ConfigError("n_scales must be nonnegative")
        if self.n_scales >= 1 and not 0.0 < self.cost_min <= self.cost_max:
            raise ConfigError("need 0 < cost_min <= cost_max")
        return self

    def resolved_j_star(self, period):
        """Energy bound in canonical units from whichever limit was given."""
        if self.j_star is not None:
            if self.j_star <= 0:
                raise ConfigError("j_star must be positive")
            return self.j_star
        if self.u_max is not None:
            return j_star_from_thrust(self.u_max, period)
        u_si = self.u_max_si if self.u_max_si is not None else 5e-5
        return j_star_from_thrust(units.accel_si_to_canonical(u_si), period)


def load_config_file(path) -> dict:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    known = {f.name for f in fields(RunConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if isinstance(raw.get("orbit"), dict):
        raw["orbit_inline"] = raw.pop("orbit")
    return raw


def build_config(args) -> RunConfig:
    config = RunConfig()
    if getattr(args, "config", None):
        config = replace(config, **load_config_file(args.config))
    overrides = {}
    for name in (f.name for f in fields(RunConfig)):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if overrides:
        config = replace(config, **overrides)
    return config.validate()


def resolve_orbit(config):
    if config.orbit_inline is not None:
        try:
            entry = OrbitCatalogEntry(**config.orbit_inline)
        except TypeError as exc:
            raise ConfigError(f"malformed inline orbit: {exc}") from exc
    else:
        entry = get_orbit_entry(config.orbit, config.catalog)
    return entry.to_orbit()


def integrator_config(config):
    return IntegratorConfig(abs_tol=config.abs_tol, rel_tol=config.rel_tol)


def obtain_history(config, orbit, model):
    """Build the STM history, optionally via the on-disk artifact cache."""
    integ = integrator_config(config)
    if not config.cache_stm:
        return build_stm_history(orbit, config.n_checkpoints, integ, model=model)
    key = history_cache_key(orbit, config.n_checkpoints, integ,
                            extra=config.costate_convention)
    cache_dir = Path(config.cache_dir) if config.cache_dir else Path(config.out_dir) / "stm-cache"
    cache_file = cache_dir / f"history-{key}.npz"
    if cache_file.exists():
        return StmHistory.load(cache_file)
    history = build_stm_history(orbit, config.n_checkpoints, integ, model=model)
    cache_dir.mkdir(parents=True, exist_ok=True)
    history.save(cache_file)
    return history


def _print_eigen_table(rset):
    print("axis  extent [DU]          gamma                direction [x y z vx vy vz]")
    for i in range(6):
        extent = "unbounded" if rset.unbounded[i] else f"{rset.extents[i]:.8f}"
        direction = " ".join(f"{v: .6f}" for v in rset.directions[:, i])
        print(f"{i + 1:<5d} {extent:<20s} {rset.form.eigenvalues[i]:<20.10g} [{direction}]")


def cmd_orbit_check(config) -> int:
    orbit = resolve_orbit(config)
    model = Cr3bpModel(orbit.params, config.costate_convention)
    report = check_closure(orbit, integrator_config(config),
                           ShootingConfig(residual_tol=config.residual_tol),
                           model=model,
                           inherent_skip_bound=config.closure_position_bound)
    header = list(CLOSURE_HEADER)
    row = [report.position_error, report.velocity_error, report.inherent_cost]
    if config.si:
        header += ["position_error_km", "velocity_error_m_s"]
        row += [units.length_canonical_to_km(report.position_error),
                units.speed_canonical_to_m_s(report.velocity_error)]
    out = Path(config.out_dir)
    write_csv(out / "closure.csv", header, [row])
    print(f"orbit '{orbit.name}': one-period return errors "
          f"{report.position_error:.3e} DU / {report.velocity_error:.3e} DU/TU, "
          f"inherent cost {report.inherent_cost:.3e} DU^2/TU^3")
    if report.position_error > config.closure_position_bound:
        print(f"orbit '{orbit.name}' fails closure: position error "
              f"{report.position_error:.3e} DU exceeds bound "
              f"{config.closure_position_bound:.3e} DU", file=sys.stderr)
        return EXIT_THRESHOLD
    return EXIT_OK


def cmd_reachable(config) -> int:
    orbit = resolve_orbit(config)
    model = Cr3bpModel(orbit.params, config.costate_convention)
    history = obtain_history(config, orbit, model)
    e = assemble_e(history)
    estar = assemble_e_star(e)
    j_star = config.resolved_j_star(orbit.period)
    rset = reachable_set(estar, j_star)
    out = Path(config.out_dir)

    eigen_header = list(EIGEN_HEADER)
    if config.si:
        eigen_header.append("extent_km")
    eigen_rows = []
    for i in range(6):
        row = [i + 1, float(estar.eigenvalues[i]), float(rset.extents[i]),
               bool(rset.unbounded[i])] + [float(v) for v in rset.directions[:, i]]
        if config.si:
            row.append(units.length_canonical_to_km(float(rset.extents[i])))
        eigen_rows.append(row)
    write_csv(out / "eigenstructure.csv", eigen_header, eigen_rows)

    if config.n_samples > 0:
        samples = sample_boundary(rset, config.n_samples, config.seed)
        costs = quadratic_cost(estar, samples)
    else:
        samples = np.empty((0, 6))
        costs = np.empty(0)
    write_csv(out / "samples.csv", SAMPLES_HEADER,
              ([i, *map(float, samples[i]), float(costs[i])]
               for i in range(samples.shape[0])))

    n_traj = min(config.n_trajectories, samples.shape[0])
    keep = np.unique(np.append(
        np.arange(0, history.times.size, config.trajectory_stride),
        history.times.size - 1))

    def trajectory_rows():
        for i in range(n_traj):
            lin = propagate_linear(history, samples[i], samples[i], e=e)
            u_mag = lin.u_mag
            for k in keep:
                yield [i, float(lin.times[k]), *map(float, lin.dx[k]),
                       float(u_mag[k])]

    write_csv(out / "trajectories.csv", TRAJECTORY_HEADER, trajectory_rows())

    print(f"orbit '{orbit.name}' ({config.costate_convention} costate "
          f"convention), J* = {j_star:.8e} DU^2/TU^3")
    _print_eigen_table(rset)
    print(f"{samples.shape[0]} boundary samples, {n_traj} linear "
          f"trajectories written to {out}")
    return EXIT_OK


def cmd_validate(config) -> int:
    orbit = resolve_orbit(config)
    model = Cr3bpModel(orbit.params, config.costate_convention)
    history = obtain_history(config, orbit, model)
    estar = assemble_e_star(assemble_e(history))
    axis = config.direction - 1
    gamma = float(estar.eigenvalues[axis])
    out = Path(config.out_dir)
    if config.n_scales == 0:
        write_csv(out / "validation.csv", VALIDATION_HEADER, [])
        print("empty scale list; wrote header-only validation.csv")
        return EXIT_OK
    if gamma <= 0.0:
        raise ConfigError(
            f"axis {config.direction} is unbounded (near-zero eigenvalue); "
            "pick a finite direction for the sweep")
    direction = estar.eigenvectors[:, axis]
    costs = np.geomspace(config.cost_min, config.cost_max, config.n_scales)
    scales = np.sqrt(2.0 * costs / gamma)

    shooting_cfg = ShootingConfig(residual_tol=config.residual_tol)
    integ = integrator_config(config)
    inherent = shoot_nonlinear(orbit, np.zeros(6), cfg=shooting_cfg,
                               integrator=integ, model=model,
                               history=history, n_checkpoints=2)
    rows = validation_sweep(orbit, direction, scales, cfg=shooting_cfg,
                            integrator=integ, model=model, history=history,
                            form=estar, inherent_cost=inherent.true_cost)
    write_csv(out / "validation.csv", VALIDATION_HEADER,
              ([r.scale, r.linear_cost, r.true_cost, r.abs_error, r.rel_error,
                r.trusted, r.iterations, r.residual, r.failure] for r in rows))
    print(f"axis {config.direction} sweep on '{orbit.name}' "
          f"({config.costate_convention} costate convention), inherent cost "
          f"{inherent.true_cost:.3e} DU^2/TU^3")
    print("scale          linear_cost    true_cost      rel_error   trusted")
    for r in rows:
        if r.failure:
            print(f"{r.scale:<14.6e} failed: {r.failure}")
        else:
            print(f"{r.scale:<14.6e} {r.linear_cost:<14.6e} "
                  f"{r.true_cost:<14.6e} {r.rel_error:<11.3e} "
                  f"{'yes' if r.trusted else 'no'}")
    return EXIT_OK


def cmd_eigentrajectories(config) -> int:
    orbit = resolve_orbit(config)
    model = Cr3bpModel(orbit.params, config.costate_convention)
    history = obtain_history(config, orbit, model)
    e = assemble_e(history)
    estar = assemble_e_star(e)
    j_star = config.resolved_j_star(orbit.period)
    rset = reachable_set(estar, j_star)
    out = Path(config.out_dir)

    traj_rows = []
    thrust_rows = []
    for i in range(6):
        if rset.unbounded[i]:
            print(f"axis {i + 1} is unbounded (along-track); skipped")
            continue
        deviation = rset.extents[i] * rset.directions[:, i]
        lin = propagate_linear(history, deviation, deviation, e=e)
        u_mag = lin.u_mag
        for k in range(lin.times.size):
            traj_rows.append([i + 1, float(lin.times[k]),
                              *map(float, lin.dx[k]), float(u_mag[k])])
            thrust_rows.append([i + 1, float(lin.times[k]), float(u_mag[k])])

    thrust_header = list(THRUST_HEADER)
    if config.si:
        thrust_header.append("u_mag_m_s2")
        for row in thrust_rows:
            row.append(units.accel_canonical_to_si(row[2]))
    write_csv(out / "eigen_trajectories.csv", EIGEN_TRAJ_HEADER, traj_rows)
    write_csv(out / "thrust_history.csv", thrust_header, thrust_rows)
    print(f"eigendirection trajectories for '{orbit.name}' written to {out}")
    return EXIT_OK


COMMANDS = {
    "orbit-check": cmd_orbit_check,
    "reachable": cmd_reachable,
    "validate": cmd_validate,
    "eigentrajectories": cmd_eigentrajectories,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--orbit", help="catalog orbit name")
    common.add_argument("--catalog", help="alternate orbit catalog file")
    common.add_argument("--out", dest="out_dir", help="output directory")
    common.add_argument("--seed", type=int, help="sampling seed")
    common.add_argument("--samples", dest="n_samples", type=int,
                        help="number of boundary samples")
    common.add_argument("--checkpoints", dest="n_checkpoints", type=int,
                        help="checkpoints per period")
    common.add_argument("--u-max", dest="u_max", type=float,
                        help="thrust acceleration limit, DU/TU^2")
    common.add_argument("--u-max-si", dest="u_max_si", type=float,
                        help="thrust acceleration limit, m/s^2")
    common.add_argument("--j-star", dest="j_star", type=float,
                        help="energy bound, DU^2/TU^3")
    common.add_argument("--abs-tol", dest="abs_tol", type=float)
    common.add_argument("--rel-tol", dest="rel_tol", type=float)
    common.add_argument("--costate-convention", dest="costate_convention",
                        choices=list(COSTATE_CONVENTIONS),
                        help="costate propagation convention "
                             "(jacobian reproduces the reference tables; "
                             "adjoint is energy-optimal)")
    common.add_argument("--cache-stm", dest="cache_stm", action="store_const",
                        const=True, help="reuse cached STM histories")
    common.add_argument("--cache-dir", dest="cache_dir")
    common.add_argument("--si", dest="si", action="store_const", const=True,
                        help="append SI-converted columns")

    parser = argparse.ArgumentParser(
        prog="haloreach",
        description="Energy-limited forced periodic trajectories near a "
                    "CR3BP reference orbit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("orbit-check", parents=[common],
                       help="closure and inherent cost of a catalog orbit")
    p.add_argument("--position-bound", dest="closure_position_bound",
                   type=float, help="max acceptable one-period position error")

    p = sub.add_parser("reachable", parents=[common],
                       help="eigenstructure, boundary samples, trajectories")
    p.add_argument("--trajectories", dest="n_trajectories", type=int,
                   help="samples that get full trajectory export")
    p.add_argument("--trajectory-stride", dest="trajectory_stride", type=int,
                   help="checkpoint stride in trajectories.csv")

    p = sub.add_parser("validate", parents=[common],
                       help="linear vs nonlinear cost sweep")
    p.add_argument("--direction", type=int, help="eigen-axis index, 1..6")
    p.add_argument("--cost-min", dest="cost_min", type=float)
    p.add_argument("--cost-max", dest="cost_max", type=float)
    p.add_argument("--points", dest="n_scales", type=int,
                   help="number of sweep points")

    sub.add_parser("eigentrajectories", parents=[common],
                   help="per-eigendirection trajectories and thrust histories")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = build_config(args)
        return COMMANDS[args.command](config)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SingularityError, PropagationError, IllConditionedBvpError,
            ShootingError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except HaloReachError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
