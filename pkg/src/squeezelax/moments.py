"""Closed-form moment dynamics for spins and oscillators in a squeezed bath.

Single-spin (Gardiner) mean equations, oscillator mean/covariance ODEs,
collective-spin mean and covariance right-hand sides evaluated on an exact
state, angle-dependent decay rates, and their split into field-fluctuation
and self-reaction contributions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .spin_algebra import CollectiveOps, QuantumState, expectation, sym_covariance, third_moment

__all__ = [
    "SqueezingParams",
    "SpinMoments",
    "OscillatorMoments",
    "RateDecomposition",
    "minimal_m",
    "input_field_variances",
    "gardiner_rhs",
    "oscillator_mean_rhs",
    "oscillator_cov_rhs",
    "collective_mean_rhs",
    "collective_cov_rhs",
    "decay_rates",
    "rate_decomposition",
    "oscillator_rate_decomposition",
    "spin_moments_from_state",
]

_MIN_UNCERTAINTY_ATOL = 1e-12


def minimal_m(nbar: float) -> float:
    """Largest squeezing correlation compatible with nbar photons: sqrt(nbar (nbar+1))."""
    if nbar < 0:
        raise ValueError(f"mean photon number must be >= 0, got {nbar}")
    return math.sqrt(nbar * (nbar + 1.0))


@dataclass(frozen=True)
class SqueezingParams:
    """Broadband squeezed bath statistics plus the Purcell rate.

    nbar: mean reservoir photon number.
    m_corr: two-photon correlation (real, >= 0 after phase alignment),
            bounded by sqrt(nbar (nbar+1)).
    gamma_p: Purcell rate (inverse time).
    """

    nbar: float
    m_corr: float
    gamma_p: float = 1.0

    def __post_init__(self):
        if self.nbar < 0:
            raise ValueError(f"mean photon number must be >= 0, got {self.nbar}")
        if self.m_corr < 0:
            raise ValueError(f"squeezing correlation must be >= 0, got {self.m_corr}")
        if self.m_corr > minimal_m(self.nbar) + _MIN_UNCERTAINTY_ATOL:
            raise ValueError(
                f"m_corr={self.m_corr} violates the bound sqrt(nbar (nbar+1))"
                f"={minimal_m(self.nbar)}")
        if self.gamma_p <= 0:
            raise ValueError(f"Purcell rate must be > 0, got {self.gamma_p}")

    @classmethod
    def minimal(cls, nbar: float, gamma_p: float = 1.0) -> "SqueezingParams":
        """Minimum-uncertainty bath at the given photon number."""
        return cls(nbar=nbar, m_corr=minimal_m(nbar), gamma_p=gamma_p)

    @property
    def is_minimal_uncertainty(self) -> bool:
        return abs(self.m_corr - minimal_m(self.nbar)) <= _MIN_UNCERTAINTY_ATOL


@dataclass(frozen=True)
class SpinMoments:
    """First moments and symmetrized transverse covariances of a spin system."""

    mean_x: float
    mean_y: float
    mean_z: float
    var_x: float = 0.0
    var_y: float = 0.0
    cov_xy: float = 0.0


@dataclass(frozen=True)
class OscillatorMoments:
    """Quadrature means and symmetrized covariance matrix of an oscillator."""

    mean_x: float
    mean_y: float
    var_x: float = 1.0
    var_y: float = 1.0
    cov_xy: float = 0.0

    def __post_init__(self):
        if self.var_x <= 0 or self.var_y <= 0:
            raise ValueError("quadrature variances must be positive")
        if self.var_x * self.var_y - self.cov_xy ** 2 < 1.0 - 1e-9:
            raise ValueError("covariance matrix violates the Heisenberg bound")


@dataclass(frozen=True)
class RateDecomposition:
    """A decay rate split into field-fluctuation and self-reaction parts."""

    total: float
    ff_part: float
    sr_part: float

    def __post_init__(self):
        if abs(self.total - (self.ff_part + self.sr_part)) > 1e-12 * max(1.0, abs(self.total)):
            raise ValueError("decomposition parts do not sum to the total rate")


def input_field_variances(p: SqueezingParams) -> tuple[float, float]:
    """Variances (anti-squeezed, squeezed) of the input quadratures.

    (2 nbar + 2 m + 1, 2 nbar - 2 m + 1); their product is >= 1 with
    equality exactly at minimal uncertainty.
    """
    return (2 * p.nbar + 2 * p.m_corr + 1.0, 2 * p.nbar - 2 * p.m_corr + 1.0)


def gardiner_rhs(m: SpinMoments, p: SqueezingParams) -> SpinMoments:
    """Mean-value derivatives for a single spin in a squeezed reservoir.

    d<sx>/dt = -gp (nbar + m + 1/2) <sx>
    d<sy>/dt = -gp (nbar - m + 1/2) <sy>
    d<sz>/dt = -gp (2 nbar + 1) <sz> - gp
    """
    gp, nb, mc = p.gamma_p, p.nbar, p.m_corr
    return SpinMoments(
        mean_x=-gp * (nb + mc + 0.5) * m.mean_x,
        mean_y=-gp * (nb - mc + 0.5) * m.mean_y,
        mean_z=-gp * (2 * nb + 1.0) * m.mean_z - gp,
    )


def oscillator_mean_rhs(m: OscillatorMoments, p: SqueezingParams) -> tuple[float, float]:
    """Quadrature mean derivatives: symmetric damping at gamma_p / 2, independent of squeezing."""
    return (-0.5 * p.gamma_p * m.mean_x, -0.5 * p.gamma_p * m.mean_y)


def oscillator_cov_rhs(m: OscillatorMoments, p: SqueezingParams) -> tuple[float, float, float]:
    """Quadrature covariance derivatives; fixed point equals the input-field variances."""
    vx_in, vy_in = input_field_variances(p)
    gp = p.gamma_p
    return (-gp * (m.var_x - vx_in), -gp * (m.var_y - vy_in), -gp * m.cov_xy)


def collective_mean_rhs(state: QuantumState, ops: CollectiveOps,
                        p: SqueezingParams) -> tuple[float, float, float]:
    """Exact mean-value derivatives of the collective spin components.

    Evaluates the operator products <S-Sz + SzS+>, <S-Sz - SzS+> and <S-S+>
    on the supplied state; no moment closure is applied.
    """
    gp, nb, mc = p.gamma_p, p.nbar, p.m_corr
    sm, sp, sz = ops.sm, ops.sp, ops.sz
    dx = 0.5 * gp * expectation(sm @ sz + sz @ sp, state).real \
        - gp * (nb + mc + 1.0) * expectation(ops.sx, state).real
    dy = (0.5j * gp * expectation(sm @ sz - sz @ sp, state)).real \
        - gp * (nb - mc + 1.0) * expectation(ops.sy, state).real
    dz = -2.0 * gp * expectation(sm @ sp, state).real \
        - 2.0 * gp * (nb + 1.0) * expectation(sz, state).real
    return (dx, dy, dz)


def collective_cov_rhs(state: QuantumState, ops: CollectiveOps,
                       p: SqueezingParams) -> tuple[float, float, float]:
    """Exact derivatives of (V_Sx, V_Sy, C_SxSy) on the supplied state.

    Involves <Sz^2> and symmetrized third moments, so the covariance system
    is not closed; the state supplies the higher moments.
    """
    gp, nb, mc = p.gamma_p, p.nbar, p.m_corr
    sx, sy, sz = ops.sx, ops.sy, ops.sz
    var_x = sym_covariance(sx, sx, state)
    var_y = sym_covariance(sy, sy, state)
    cov_xy = sym_covariance(sx, sy, state)
    sz2 = expectation(sz @ sz, state).real
    mz = expectation(sz, state).real
    dvx = -gp * ((2 * nb + 2 * mc + 1.0) * (var_x - sz2) + mz
                 - third_moment(sx, sx, sz, state))
    dvy = -gp * ((2 * nb - 2 * mc + 1.0) * (var_y - sz2) + mz
                 - third_moment(sy, sy, sz, state))
    dcxy = -gp * ((2 * nb + 1.0) * cov_xy
                  - 0.5 * (third_moment(sx, sy, sz, state)
                           + third_moment(sy, sx, sz, state)))
    return (dvx, dvy, dcxy)


def decay_rates(n: int, theta: float, p: SqueezingParams) -> tuple[float, float]:
    """Effective transverse decay rates of a spin coherent state at polar angle theta.

    gamma_x = gp [nbar + m + 1/2 - (n-1) cos(theta) / 2] and the same with
    -m for gamma_y. Independent of the azimuthal angle.
    """
    if n < 1:
        raise ValueError("spin count must be >= 1")
    gp = p.gamma_p
    sr = -(n - 1) * math.cos(theta) / 2.0
    return (gp * (p.nbar + p.m_corr + 0.5 + sr), gp * (p.nbar - p.m_corr + 0.5 + sr))


def rate_decomposition(n: int, theta: float, p: SqueezingParams,
                       component: str = "x") -> RateDecomposition:
    """Split a transverse decay rate into field-fluctuation and self-reaction parts.

    The bath-statistics-dependent damping gp (nbar +- m + 1) originates in
    the field-fluctuation channel; the remainder, gp [-1/2 - (n-1) cos(theta)/2],
    is radiation self-reaction and carries the collective n-enhancement.
    """
    if component not in ("x", "y"):
        raise ValueError(f"component must be 'x' or 'y', got {component!r}")
    gx, gy = decay_rates(n, theta, p)
    total = gx if component == "x" else gy
    sign = 1.0 if component == "x" else -1.0
    ff = p.gamma_p * (p.nbar + sign * p.m_corr + 1.0)
    return RateDecomposition(total=total, ff_part=ff, sr_part=total - ff)


def oscillator_rate_decomposition(p: SqueezingParams) -> RateDecomposition:
    """Oscillator quadrature damping: all of gamma_p / 2 comes from self-reaction."""
    return RateDecomposition(total=0.5 * p.gamma_p, ff_part=0.0, sr_part=0.5 * p.gamma_p)


def spin_moments_from_state(state: QuantumState, ops: CollectiveOps) -> SpinMoments:
    """Collect first moments and transverse covariances of a state."""
    return SpinMoments(
        mean_x=expectation(ops.sx, state).real,
        mean_y=expectation(ops.sy, state).real,
        mean_z=expectation(ops.sz, state).real,
        var_x=sym_covariance(ops.sx, ops.sx, state),
        var_y=sym_covariance(ops.sy, ops.sy, state),
        cov_xy=sym_covariance(ops.sx, ops.sy, state),
    )
