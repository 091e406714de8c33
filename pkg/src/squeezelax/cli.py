"""Command-line interface: figure datasets, scenario runs and verification.

Exit codes: 0 success, 2 configuration error, 3 verification failure,
4 integrator or truncation failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from .figures import (FigureDataset, fig3a_vector_field, fig3b_ellipses,
                      fig4a_rates, fig4b_variance_derivatives, max_hilbert_dim)
from .lindblad import (CutoffError, evolve, spin_liouvillian, steady_state)
from .moments import (OscillatorMoments, SpinMoments, SqueezingParams,
                      gardiner_rhs, minimal_m, oscillator_cov_rhs,
                      oscillator_mean_rhs)
from .ode import IntegrationError, IntegratorConfig, integrate
from .spin_algebra import DickeSpace, build_collective_ops
from .verification import SCOPES, verify

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VERIFY = 3
EXIT_INTEGRATOR = 4


class ConfigError(ValueError):
    pass


@dataclass
class Scenario:
    """A single configured run (used by the non-figure subcommands)."""

    system: str                  # "single-spin" | "collective" | "oscillator"
    params: SqueezingParams
    n: int = 1
    theta: float = 0.5 * math.pi
    phi: float = 0.0
    t_final: float = 3.0
    rtol: float = 1e-10

    def check_limits(self):
        cap = max_hilbert_dim()
        if self.n + 1 > cap:
            raise ConfigError(f"n={self.n} exceeds the Hilbert-dimension cap {cap}")


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse float list {text!r}") from exc


def _parse_ints(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse integer list {text!r}") from exc


def _squeezing(args) -> SqueezingParams:
    nbar = args.squeezing_n
    if args.squeezing_m == "minimal":
        m = minimal_m(nbar)
    else:
        try:
            m = float(args.squeezing_m)
        except ValueError as exc:
            raise ConfigError(f"--squeezing-m must be a number or 'minimal', "
                              f"got {args.squeezing_m!r}") from exc
    try:
        return SqueezingParams(nbar=nbar, m_corr=m, gamma_p=1.0)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _emit(dataset: FigureDataset, args):
    text = dataset.to_csv() if args.format == "csv" else dataset.to_json()
    if args.out:
        with open(args.out, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _add_common(parser, default_n: float, default_theta: str):
    parser.add_argument("--squeezing-n", type=float, default=default_n,
                        help="mean reservoir photon number")
    parser.add_argument("--squeezing-m", default="minimal",
                        help="squeezing correlation, or 'minimal'")
    parser.add_argument("--theta", default=default_theta,
                        help="comma-separated polar angles in units of pi")
    parser.add_argument("--phi", type=float, default=None,
                        help="azimuthal angle (radians); default is a grid")
    parser.add_argument("--out", default=None, help="output path (default stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--jobs", type=int, default=1, help="worker pool size")


def _phi_grid(args, points: int) -> list[float]:
    if args.phi is not None:
        return [args.phi]
    return [2 * math.pi * k / points for k in range(points)]


def _spins_list(text: str, expand_single: bool = False) -> list[int]:
    values = _parse_ints(text)
    if not values or any(v < 1 for v in values):
        raise ConfigError("--spins must be positive integers")
    if expand_single and len(values) == 1:
        return list(range(1, values[0] + 1))
    return values


def cmd_fig3a(args) -> int:
    n_list = _spins_list(args.spins)
    thetas = [t * math.pi for t in _parse_floats(args.theta)]
    dataset = fig3a_vector_field(n_list, args.squeezing_n, thetas,
                                 _phi_grid(args, 16), jobs=args.jobs)
    _emit(dataset, args)
    return EXIT_OK


def cmd_fig3b(args) -> int:
    n_list = _spins_list(args.spins)
    thetas = [t * math.pi for t in _parse_floats(args.theta)]
    dataset = fig3b_ellipses(n_list, args.squeezing_n, thetas,
                             _phi_grid(args, 12), rtol=args.rtol, jobs=args.jobs)
    _emit(dataset, args)
    return EXIT_OK


def cmd_fig4a(args) -> int:
    n_values = _spins_list(args.spins, expand_single=True)
    thetas = [t * math.pi for t in _parse_floats(args.theta)]
    dataset = fig4a_rates(n_values, args.squeezing_n, thetas)
    _emit(dataset, args)
    return EXIT_OK


def cmd_fig4b(args) -> int:
    n_values = _spins_list(args.spins, expand_single=True)
    thetas = [t * math.pi for t in _parse_floats(args.theta)]
    phi = args.phi if args.phi is not None else 0.0
    dataset = fig4b_variance_derivatives(n_values, args.squeezing_n, thetas,
                                         phi=phi, jobs=args.jobs)
    _emit(dataset, args)
    return EXIT_OK


def cmd_single_spin(args) -> int:
    params = _squeezing(args)
    theta = _parse_floats(args.theta)[0] * math.pi
    phi = args.phi if args.phi is not None else 0.0
    scenario = Scenario("single-spin", params, n=1, theta=theta, phi=phi,
                        t_final=args.t_final, rtol=args.rtol)
    scenario.check_limits()
    y0 = np.array([math.sin(theta) * math.cos(phi),
                   math.sin(theta) * math.sin(phi), math.cos(theta)])

    def rhs(y, _t):
        d = gardiner_rhs(SpinMoments(*y), params)
        return np.array([d.mean_x, d.mean_y, d.mean_z])

    cfg = IntegratorConfig(method="rk45", rtol=args.rtol, atol=1e-14)
    result = integrate(rhs, y0, (0.0, args.t_final), cfg)
    rows = [(t,) + tuple(state) for t, state in zip(result.times, result.states)]
    dataset = FigureDataset("single-spin", ["t", "mean_x", "mean_y", "mean_z"],
                            rows, {"squeezing_nbar": params.nbar,
                                   "squeezing_m": params.m_corr,
                                   "theta": theta, "phi": phi})
    _emit(dataset, args)
    return EXIT_OK


def cmd_oscillator(args) -> int:
    params = _squeezing(args)
    phi = args.phi if args.phi is not None else 0.0
    y0 = np.array([2.0 * math.cos(phi), 2.0 * math.sin(phi), 1.0, 1.0, 0.0])

    def rhs(y, _t):
        m = OscillatorMoments(*y)
        return np.array(oscillator_mean_rhs(m, params) + oscillator_cov_rhs(m, params))

    cfg = IntegratorConfig(method="rk45", rtol=args.rtol, atol=1e-14)
    result = integrate(rhs, y0, (0.0, args.t_final), cfg)
    rows = [(t,) + tuple(state) for t, state in zip(result.times, result.states)]
    dataset = FigureDataset("oscillator",
                            ["t", "mean_x", "mean_y", "var_x", "var_y", "cov_xy"],
                            rows, {"squeezing_nbar": params.nbar,
                                   "squeezing_m": params.m_corr, "phi": phi})
    _emit(dataset, args)
    return EXIT_OK


def cmd_steady_state(args) -> int:
    params = _squeezing(args)
    n_list = _spins_list(args.spins)
    if len(n_list) != 1:
        raise ConfigError("steady-state expects a single --spins value")
    scenario = Scenario("collective", params, n=n_list[0])
    scenario.check_limits()
    ops = build_collective_ops(DickeSpace(scenario.n))
    rho = steady_state(spin_liouvillian(ops, params))
    payload = {
        "n": scenario.n,
        "squeezing_nbar": params.nbar,
        "squeezing_m": params.m_corr,
        "mean_x": float(np.trace(ops.sx @ rho).real),
        "mean_y": float(np.trace(ops.sy @ rho).real),
        "mean_z": float(np.trace(ops.sz @ rho).real),
        "purity": float(np.trace(rho @ rho).real),
    }
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    report = verify(scope=args.scope, seed=args.seed)
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report["passed"] else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="squeezelax",
        description="Collective spin relaxation in a broadband squeezed bath")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fig3a", help="decay vector field on the lower hemisphere")
    p.add_argument("--spins", default="1,5,15")
    _add_common(p, default_n=0.5, default_theta="0.55,0.65,0.75,0.85,0.95")
    p.set_defaults(func=cmd_fig3a)

    p = sub.add_parser("fig3b", help="uncertainty ellipses before/after a short evolution")
    p.add_argument("--spins", default="1,5,15")
    p.add_argument("--rtol", type=float, default=1e-10)
    _add_common(p, default_n=5.0, default_theta="0.55,0.75,0.87")
    p.set_defaults(func=cmd_fig3b)

    p = sub.add_parser("fig4a", help="transverse decay rates versus spin count")
    p.add_argument("--spins", default="40", help="n_max, or an explicit list")
    _add_common(p, default_n=0.05, default_theta="0.55,0.75,0.87")
    p.set_defaults(func=cmd_fig4a)

    p = sub.add_parser("fig4b", help="covariance derivatives versus spin count")
    p.add_argument("--spins", default="40", help="n_max, or an explicit list")
    _add_common(p, default_n=0.05, default_theta="0.55,0.75,0.87")
    p.set_defaults(func=cmd_fig4b)

    p = sub.add_parser("single-spin", help="Gardiner mean-value trajectory")
    p.add_argument("--t-final", type=float, default=3.0)
    p.add_argument("--rtol", type=float, default=1e-10)
    _add_common(p, default_n=0.5, default_theta="0.5")
    p.set_defaults(func=cmd_single_spin)

    p = sub.add_parser("oscillator", help="oscillator moment trajectory")
    p.add_argument("--t-final", type=float, default=20.0)
    p.add_argument("--rtol", type=float, default=1e-10)
    _add_common(p, default_n=1.0, default_theta="0.5")
    p.set_defaults(func=cmd_oscillator)

    p = sub.add_parser("steady-state", help="exact collective steady state")
    p.add_argument("--spins", default="2")
    _add_common(p, default_n=0.5, default_theta="0.5")
    p.set_defaults(func=cmd_steady_state)

    p = sub.add_parser("verify", help="oracle-vs-formula and invariant checks")
    p.add_argument("--scope", choices=SCOPES, default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, CutoffError) as exc:
        print(f"integration error: {exc}", file=sys.stderr)
        return EXIT_INTEGRATOR


if __name__ == "__main__":
    sys.exit(main())
