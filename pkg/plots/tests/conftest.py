import shutil
import subprocess

import numpy as np
import pytest


@pytest.fixture()
def validation_csv(tmp_path):
    path = tmp_path / "validation.csv"
    lines = ["scale,linear_cost,true_cost,abs_error,rel_error,trusted,"
             "iterations,residual,failure"]
    scales = np.geomspace(1e-4, 5e-3, 8)
    for s in scales:
        lin = 16.5 * s * s / 2.0
        true = lin * (1.0 + 0.4 * s)
        lines.append(f"{s},{lin},{true},{abs(lin - true)},"
                     f"{abs(lin - true) / true},1,3,1e-12,")
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture()
def trajectories_csv(tmp_path):
    path = tmp_path / "trajectories.csv"
    rng = np.random.default_rng(0)
    lines = ["sample,t,dx,dy,dz,dvx,dvy,dvz,u_mag"]
    t = np.linspace(0.0, 2.0, 40)
    for sample in range(6):
        phase = rng.uniform(0, 2 * np.pi)
        amp = rng.uniform(0.5, 1.5) * 1e-2
        for tk in t:
            dx = amp * np.cos(tk * np.pi + phase)
            dy = 0.3 * amp * np.sin(tk * np.pi + phase)
            dz = 0.7 * amp * np.cos(2 * tk + phase)
            lines.append(f"{sample},{tk},{dx},{dy},{dz},0,0,0,{abs(dx)}")
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture()
def eigen_csv(tmp_path):
    path = tmp_path / "eigen_trajectories.csv"
    lines = ["axis,t,dx,dy,dz,dvx,dvy,dvz,u_mag"]
    t = np.linspace(0.0, 2.0, 50)
    for axis in range(2, 7):
        for tk in t:
            dx = 1e-2 * axis * np.cos(tk * np.pi)
            dy = 1e-3 * axis * np.sin(tk * np.pi)
            dz = -5e-3 * axis * np.cos(2 * tk)
            lines.append(f"{axis},{tk},{dx},{dy},{dz},0,0,0,{abs(dy)}")
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture()
def thrust_csv(tmp_path):
    path = tmp_path / "thrust_history.csv"
    lines = ["axis,t,u_mag"]
    t = np.linspace(0.0, 2.0, 50)
    for axis in range(2, 7):
        for tk in t:
            lines.append(f"{axis},{tk},{1e-3 * axis * (1.2 + np.sin(3 * tk))}")
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture(scope="session")
def pipeline_outputs(tmp_path_factory):
    """Real CSVs from a small end-to-end run of the numerical CLI."""
    exe = shutil.which("haloreach")
    if exe is None:
        pytest.skip("haloreach CLI not installed")
    out = tmp_path_factory.mktemp("pipeline")
    fast = ["--checkpoints", "300", "--abs-tol", "1e-12", "--rel-tol", "1e-12",
            "--out", str(out)]
    commands = [
        [exe, "reachable", "--samples", "80", "--trajectories", "6"] + fast,
        [exe, "validate", "--points", "3", "--cost-min", "1e-6",
         "--cost-max", "5e-6"] + fast,
        [exe, "eigentrajectories"] + fast,
    ]
    for cmd in commands:
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
    return out
