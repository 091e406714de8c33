"""Figure datasets: decay vector fields, uncertainty ellipses, rate curves.

Every builder returns a FigureDataset whose CSV serialization is
deterministic (fixed float formatting, metadata sorted by key), so repeated
runs with the same configuration are byte-identical.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .lindblad import evolve, spin_liouvillian
from .moments import (SqueezingParams, decay_rates, input_field_variances,
                      spin_moments_from_state)
from .spin_algebra import BlochAngles, DickeSpace, build_collective_ops, spin_coherent_state

__all__ = [
    "FigureDataset",
    "max_hilbert_dim",
    "fig3a_vector_field",
    "fig3b_ellipses",
    "fig4a_rates",
    "fig4b_variance_derivatives",
]

DEFAULT_ELLIPSE_SCALES = {1: 0.12, 5: 0.25, 15: 0.4}


def max_hilbert_dim() -> int:
    """Resource cap on Hilbert dimension, overridable via SQUEEZELAX_MAX_DIM."""
    return int(os.environ.get("SQUEEZELAX_MAX_DIM", "512"))


def _check_dim(dim: int):
    cap = max_hilbert_dim()
    if dim > cap:
        raise ValueError(f"Hilbert dimension {dim} exceeds the cap {cap} "
                         f"(set SQUEEZELAX_MAX_DIM to raise it)")


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


@dataclass
class FigureDataset:
    figure_id: str
    columns: list[str]
    rows: list[tuple] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError("row length does not match the column schema")
            for v in row:
                if not isinstance(v, str) and not math.isfinite(float(v)):
                    raise ValueError(f"non-finite value in dataset {self.figure_id}")

    def to_csv(self) -> str:
        lines = [f"# figure = {self.figure_id}"]
        for key in sorted(self.metadata):
            lines.append(f"# {key} = {_fmt(self.metadata[key])}")
        lines.append(",".join(self.columns))
        for row in self.rows:
            lines.append(",".join(_fmt(v) for v in row))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        payload = {
            "figure": self.figure_id,
            "metadata": self.metadata,
            "columns": self.columns,
            "rows": [list(row) for row in self.rows],
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def write(self, path: str, fmt: str = "csv"):
        text = self.to_csv() if fmt == "csv" else self.to_json()
        with open(path, "w") as handle:
            handle.write(text)


def _pmap(fn, items, jobs: int):
    """Order-preserving map, optionally on a thread pool."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _base_metadata(params: SqueezingParams, **extra) -> dict:
    meta = {
        "version": __version__,
        "squeezing_nbar": params.nbar,
        "squeezing_m": params.m_corr,
        "gamma_p": params.gamma_p,
    }
    meta.update(extra)
    return meta


def fig3a_vector_field(n_list, nbar: float, theta_grid, phi_grid,
                       gamma_p: float = 1.0, jobs: int = 1) -> FigureDataset:
    """Decay arrows of spin coherent states on the lower Bloch hemisphere.

    Per grid point: transverse means and their time derivatives from the
    angle-dependent rate formula, plus a symmetric oscillator reference panel.
    """
    params = SqueezingParams.minimal(nbar, gamma_p=gamma_p)
    theta_grid = [float(t) for t in theta_grid]
    phi_grid = [float(p) for p in phi_grid]
    if not theta_grid or not phi_grid:
        raise ValueError("theta and phi grids must be nonempty")
    if any(not math.pi / 2 < t <= math.pi for t in theta_grid):
        raise ValueError("theta grid must lie in the lower hemisphere (pi/2, pi]")

    columns = ["system", "n", "theta", "phi", "mean_x", "mean_y",
               "dmean_x", "dmean_y", "rate_x", "rate_y"]
    rows = []
    for n in n_list:
        _check_dim(n + 1)
        for theta in theta_grid:
            gx, gy = decay_rates(n, theta, params)
            for phi in phi_grid:
                mx = n * math.sin(theta) * math.cos(phi)
                my = n * math.sin(theta) * math.sin(phi)
                rows.append(("spins", n, theta, phi, mx, my,
                             -gx * mx, -gy * my, gx, gy))
    # oscillator panel: radial decay at gamma_p / 2, unit-n radius scale
    for theta in theta_grid:
        for phi in phi_grid:
            mx = math.sin(theta) * math.cos(phi)
            my = math.sin(theta) * math.sin(phi)
            rows.append(("oscillator", 0, theta, phi, mx, my,
                         -0.5 * gamma_p * mx, -0.5 * gamma_p * my,
                         0.5 * gamma_p, 0.5 * gamma_p))
    meta = _base_metadata(params, spins=",".join(str(n) for n in n_list))
    return FigureDataset("fig3a", columns, rows, meta)


def _ellipse(var_x: float, var_y: float, cov_xy: float) -> tuple[float, float, float]:
    """(major axis, minor axis, tilt) of the one-sigma covariance ellipse."""
    cov = np.array([[var_x, cov_xy], [cov_xy, var_y]])
    vals, vecs = np.linalg.eigh(cov)
    major = math.sqrt(max(vals[1], 0.0))
    minor = math.sqrt(max(vals[0], 0.0))
    tilt = math.atan2(vecs[1, 1], vecs[0, 1])
    return major, minor, tilt


def fig3b_ellipses(n_list, nbar: float, theta_list, phi_grid,
                   scale_map: dict | None = None, dt_factor: float = 0.008,
                   oscillator_dt: float = 0.1, gamma_p: float = 1.0,
                   rtol: float = 1e-10, jobs: int = 1) -> FigureDataset:
    """Uncertainty ellipses of spin coherent states before and after a short evolution.

    The exact state is evolved under the master equation for
    dt = dt_factor * n / gamma_p and the moment functionals are recorded on
    both endpoints; the oscillator panel evolves a coherent state by the
    closed-form quadrature solutions for oscillator_dt / gamma_p.
    """
    params = SqueezingParams.minimal(nbar, gamma_p=gamma_p)
    scale_map = DEFAULT_ELLIPSE_SCALES if scale_map is None else scale_map
    theta_list = [float(t) for t in theta_list]
    phi_grid = [float(p) for p in phi_grid]
    if any(not 0.0 < t <= math.pi for t in theta_list):
        raise ValueError("theta values must lie in (0, pi]")

    columns = ["system", "n", "theta", "phi", "stage", "mean_x", "mean_y",
               "var_x", "var_y", "cov_xy", "axis_major", "axis_minor",
               "tilt", "scale"]

    tasks = [(n, theta, phi) for n in n_list for theta in theta_list
             for phi in phi_grid]
    for n in n_list:
        _check_dim(n + 1)

    spaces = {n: DickeSpace(n) for n in set(n_list)}
    all_ops = {n: build_collective_ops(spaces[n]) for n in set(n_list)}

    def run(task):
        n, theta, phi = task
        ops = all_ops[n]
        state = spin_coherent_state(spaces[n], BlochAngles(theta, phi))
        scale = float(scale_map.get(n, 1.0))
        pre = spin_moments_from_state(state, ops)
        liouv = spin_liouvillian(ops, params)
        traj = evolve(liouv, state, dt_factor * n / gamma_p, rtol=rtol,
                      record_every=10 ** 9)
        from .spin_algebra import QuantumState
        post_state = QuantumState(traj.final_state, "matrix")
        post = spin_moments_from_state(post_state, ops)
        out = []
        for stage, m in (("pre", pre), ("post", post)):
            major, minor, tilt = _ellipse(m.var_x, m.var_y, m.cov_xy)
            out.append(("spins", n, theta, phi, stage, m.mean_x, m.mean_y,
                        m.var_x, m.var_y, m.cov_xy, major, minor, tilt, scale))
        return out

    rows = [row for chunk in _pmap(run, tasks, jobs) for row in chunk]

    # oscillator panel: coherent state at unit radius, closed-form evolution
    vx_in, vy_in = input_field_variances(params)
    dt = oscillator_dt / gamma_p
    decay_mean = math.exp(-0.5 * gamma_p * dt)
    decay_var = math.exp(-gamma_p * dt)
    for phi in phi_grid:
        mx, my = math.cos(phi), math.sin(phi)
        for stage, (cx, cy, vx, vy) in (
                ("pre", (mx, my, 1.0, 1.0)),
                ("post", (mx * decay_mean, my * decay_mean,
                          vx_in + (1.0 - vx_in) * decay_var,
                          vy_in + (1.0 - vy_in) * decay_var))):
            major, minor, tilt = _ellipse(vx, vy, 0.0)
            rows.append(("oscillator", 0, 0.0, phi, stage, cx, cy,
                         vx, vy, 0.0, major, minor, tilt, 1.0))

    meta = _base_metadata(params, spins=",".join(str(n) for n in n_list),
                          dt_factor=dt_factor, oscillator_dt=oscillator_dt)
    return FigureDataset("fig3b", columns, rows, meta)


def fig4a_rates(n_values, nbar: float, theta_list,
                gamma_p: float = 1.0) -> FigureDataset:
    """Transverse decay rates versus spin count, with oscillator references."""
    params = SqueezingParams.minimal(nbar, gamma_p=gamma_p)
    theta_list = [float(t) for t in theta_list]
    columns = ["n", "theta", "rate_x", "rate_y", "collective_ref", "oscillator_ref"]
    rows = []
    for n in n_values:
        for theta in theta_list:
            gx, gy = decay_rates(n, theta, params)
            rows.append((n, theta, gx, gy, 0.5 * n * gamma_p, 0.5 * gamma_p))
    meta = _base_metadata(params)
    return FigureDataset("fig4a", columns, rows, meta)


def fig4b_variance_derivatives(n_values, nbar: float, theta_list,
                               phi: float = 0.0, gamma_p: float = 1.0,
                               jobs: int = 1) -> FigureDataset:
    """Covariance derivatives of spin coherent states versus spin count.

    Evaluated exactly on the coherent state (no closure); oscillator
    reference rows give the quadrature variance derivatives of a coherent
    state (V = 1) under the same bath.
    """
    from .moments import collective_cov_rhs

    params = SqueezingParams.minimal(nbar, gamma_p=gamma_p)
    theta_list = [float(t) for t in theta_list]
    columns = ["system", "n", "theta", "phi", "dvar_x", "dvar_y", "dcov_xy"]

    tasks = [(n, theta) for n in n_values for theta in theta_list]
    for n in n_values:
        _check_dim(n + 1)

    def run(task):
        n, theta = task
        space = DickeSpace(n)
        ops = build_collective_ops(space)
        state = spin_coherent_state(space, BlochAngles(theta, phi))
        dvx, dvy, dcxy = collective_cov_rhs(state, ops, params)
        return ("spins", n, theta, phi, dvx, dvy, dcxy)

    rows = _pmap(run, tasks, jobs)

    vx_in, vy_in = input_field_variances(params)
    for theta in theta_list:
        rows.append(("oscillator", 0, theta, phi,
                     -gamma_p * (1.0 - vx_in), -gamma_p * (1.0 - vy_in), 0.0))
    meta = _base_metadata(params, phi=phi)
    return FigureDataset("fig4b", columns, rows, meta)
