"""Command-line entry point: ``hopf-dirac --config run.ini [--override key=value ...]``.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import Optional, Sequence

import numpy as np

from .aharonov_casher import build_zero_modes, spin_purity, transition_residuals
from .config import RunConfig, load_config
from .errors import ConfigError, HopfDiracError, HypothesisViolation, NumericalError
from .reports import (TransferSamples, ZeroModeSamples, emit_spectrum, render_transfer, render_zeromodes,
                      verification_table, write_text)
from .spectrum3d import assemble_spectrum
from .sphere_bundle import build_gauge, flux_and_constants, reduced_flux_density, theta_to_radius
from .transfer_r3 import (SphericalGrid, constant_field_kernel, l2_norm, magnetic_field,
                          modulus_profile_deviation, norm_stability, r3_dirac_residual, transfer_zero_mode)
from .verification import VerifyContext, run_checks

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def spectrum_command(cfg: RunConfig, stream=None) -> int:
    report = assemble_spectrum(cfg.field, cfg.energy_max, cfg.n_theta, doublings=cfg.doublings,
                               stencil=cfg.stencil)
    emit_spectrum(report, cfg, stream)
    return EXIT_OK


def zeromode_samples(cfg: RunConfig) -> ZeroModeSamples:
    """Explicit zero modes of block ``cfg.zeromode_block`` sampled along phi = 0 in chart plus."""
    constants = flux_and_constants(cfg.field)
    k = cfg.zeromode_block
    chern = constants.m - k
    gauge = build_gauge(reduced_flux_density(cfg.field, k, constants), chern)
    basis = build_zero_modes(gauge)
    theta = np.linspace(0.0, math.pi, cfg.zeromode_samples + 2)[1:-1]
    radii = theta_to_radius(theta).astype(complex)
    values = np.array([mode.plus(radii) for mode in basis.modes]).reshape(len(basis), theta.size, 2)
    return ZeroModeSamples(chern=chern, sectors=tuple(basis.sectors), theta=theta, values=values,
                           condition_number=basis.condition_number,
                           transition_residuals=tuple(transition_residuals(basis)),
                           spin_purity=spin_purity(basis) if len(basis) else 0.0)


def zeromodes_command(cfg: RunConfig, stream=None) -> int:
    write_text(render_zeromodes(zeromode_samples(cfg), cfg.output_format), cfg.output_path, stream)
    return EXIT_OK


def transfer_samples(cfg: RunConfig) -> TransferSamples:
    """R^3 zero modes of a constant field g = 2m + 1 on a coarse export grid plus a norm summary."""
    if not cfg.field.is_constant:
        raise ConfigError("transfer supports constant fields only (kind=constant)")
    g = cfg.field.g0
    modes = constant_field_kernel(g)
    export = SphericalGrid.build(radius_max=cfg.transfer_radius_max, radius_min=1e-2,
                                 radial=cfg.transfer_radial, polar=4, azimuthal=6)
    points = export.points().reshape(-1, 3)
    values = np.array([transfer_zero_mode(xi, export, g=g).values.reshape(-1, 2) for xi in modes])
    field = np.linalg.norm(magnetic_field(points, g), axis=-1)
    first = transfer_zero_mode(modes[0], SphericalGrid.build(radius_max=cfg.transfer_radius_max))
    norm = l2_norm(first)
    stability, raw_change = norm_stability(first, (cfg.transfer_radius_max / 10.0, cfg.transfer_radius_max))
    summary = {"modes": len(modes), "norm_squared": norm.completed, "norm_truncated": norm.truncated,
               "decay_power": norm.decay_power, "norm_stability": stability,
               "truncated_norm_change": raw_change, "modulus_profile_deviation": modulus_profile_deviation(first),
               "dirac_residual": r3_dirac_residual(modes[0], g)}
    return TransferSamples(field_strength=g, points=points, values=values, field_modulus=field, summary=summary)


def transfer_command(cfg: RunConfig, stream=None) -> int:
    write_text(render_transfer(transfer_samples(cfg), cfg.output_format), cfg.output_path, stream)
    return EXIT_OK


def verify_command(cfg: RunConfig, stream=None, sign_errors: Sequence[str] = ()) -> int:
    """Run the invariant suite and print its table; ``sign_errors`` is a harness test hook."""
    stream = sys.stdout if stream is None else stream
    ctx = VerifyContext(seed=cfg.seed, sign_errors=frozenset(sign_errors))
    outcomes = run_checks(ctx)
    table = verification_table(outcomes)
    stream.write(table)
    if cfg.output_path is not None:
        write_text(table, cfg.output_path)
    return EXIT_OK if all(o.passed for o in outcomes) else EXIT_VERIFY_FAILED


COMMANDS = {"spectrum": spectrum_command, "zeromodes": zeromodes_command,
            "transfer": transfer_command, "verify": verify_command}


def run(cfg: RunConfig, stream=None) -> int:
    return COMMANDS[cfg.command](cfg, stream)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hopf-dirac", description=__doc__.splitlines()[0])
    parser.add_argument("--config", required=True, help="INI-like run configuration")
    parser.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                        help="replace a config entry, as section.key=value (repeatable)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    err = sys.stderr
    try:
        cfg = load_config(args.config, args.override)
    except OSError as exc:
        err.write(f"hopf-dirac: {exc}\n")
        return EXIT_IO
    except UnicodeDecodeError as exc:
        err.write(f"hopf-dirac: config error: not UTF-8 text: {exc}\n")
        return EXIT_CONFIG
    except ConfigError as exc:
        err.write(f"hopf-dirac: config error: {exc}\n")
        return EXIT_CONFIG
    try:
        return run(cfg, sys.stdout)
    except OSError as exc:
        err.write(f"hopf-dirac: {exc}\n")
        return EXIT_IO
    except (ConfigError, HypothesisViolation) as exc:
        err.write(f"hopf-dirac: config error: {exc}\n")
        return EXIT_CONFIG
    except (NumericalError, HopfDiracError, ValueError) as exc:
        err.write(f"hopf-dirac: numerical error: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
