"""Centralized numeric tolerances shared by every module."""

from dataclasses import dataclass


@dataclass(frozen=True)
class ToleranceConfig:
    """Tolerance knobs for the whole package.

    structural: identities expected to hold in exact arithmetic up to
        double rounding (characteristic-function algebra, parameter maps).
    quadrature: default absolute error budget for exponent integrals.
    exact_stat: verdict threshold for statistics computed in exact
        arithmetic (Lindeberg sums on discrete rows, drift sums).
    coarse_stat: verdict threshold for quadrature-backed or mass-gap
        statistics.
    atom_merge: accumulation-measure sites closer than this are merged.
    """

    structural: float = 1e-12
    quadrature: float = 1e-6
    exact_stat: float = 1e-3
    coarse_stat: float = 1e-2
    atom_merge: float = 1e-14


DEFAULT_TOLERANCES = ToleranceConfig()


def standard_t_grid() -> tuple[float, ...]:
    """The grid -20..20 in steps of 0.1 used by the structural test suite."""
    return tuple(i / 10.0 for i in range(-200, 201))
