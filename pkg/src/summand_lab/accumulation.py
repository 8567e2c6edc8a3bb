"""Accumulation measures dK(x) = x^2 * sum_k dF_k(x).

Construction from rows (optionally centered at per-component means), exact
CDF evaluation, and pre-weak / weak distances to candidate limit measures.
Continuous components contribute exact partial-mass callables; nothing here
is discretized.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Sequence

from .arrays import ComponentDist, FiniteDiscrete, RowSpec, component_from_json, component_to_json, grouped_components
from .config import DEFAULT_TOLERANCES


class DiscontinuityPointError(ValueError):
    """A grid point sits on (or too near) a discontinuity of the limit."""


@dataclass(frozen=True)
class AccumMeasure:
    """Finite measure made of point masses plus x^2-weighted continuous pieces.

    atoms: (site, mass) pairs, sorted by site, sites merged within the
        atom_merge tolerance, zero masses dropped.
    pieces: (weight, dist) pairs; each contributes weight * y^2 dF_dist(y).
    total_mass: validated against the parts when supplied, computed otherwise.
    row_n / centered: provenance metadata when built from a row.
    """

    atoms: tuple[tuple[float, float], ...] = ()
    pieces: tuple[tuple[float, ComponentDist], ...] = ()
    total_mass: float | None = None
    row_n: int | None = None
    centered: bool | None = None

    def __post_init__(self):
        merged = _merge_atoms(self.atoms)
        pieces = []
        for w, d in self.pieces:
            w = float(w)
            if w < 0.0:
                raise ValueError(f"negative piece weight {w}")
            if isinstance(d, FiniteDiscrete):
                raise ValueError("discrete components enter as atoms, not pieces")
            if w > 0.0:
                pieces.append((w, d))
        expected = math.fsum(m for _, m in merged) + math.fsum(
            w * d.second_moment() for w, d in pieces
        )
        object.__setattr__(self, "atoms", merged)
        object.__setattr__(self, "pieces", tuple(pieces))
        if self.total_mass is None:
            object.__setattr__(self, "total_mass", expected)
        elif abs(self.total_mass - expected) > 1e-10 * max(1.0, abs(expected)):
            raise ValueError(
                f"total_mass {self.total_mass} inconsistent with parts {expected}"
            )

    def cdf(self, x: float) -> float:
        """Mass of (-inf, x]; right-continuous at atom sites."""
        acc = 0.0
        for site, mass in self.atoms:
            if site <= x:
                acc += mass
            else:
                break
        for w, d in self.pieces:
            acc += w * d.partial_m2(x)
        return acc

    def mass_at(self, x: float, tol: float | None = None) -> float:
        """Atom mass carried by the single point {x}."""
        tol = DEFAULT_TOLERANCES.atom_merge if tol is None else tol
        return math.fsum(m for s, m in self.atoms if abs(s - x) <= tol)

    def scaled_mass(self, factor: float) -> "AccumMeasure":
        if factor < 0.0:
            raise ValueError("mass factor must be nonnegative")
        return AccumMeasure(
            atoms=tuple((s, m * factor) for s, m in self.atoms),
            pieces=tuple((w * factor, d) for w, d in self.pieces),
            row_n=self.row_n,
            centered=self.centered,
        )


def _merge_atoms(atoms) -> tuple[tuple[float, float], ...]:
    tol = DEFAULT_TOLERANCES.atom_merge
    cleaned = []
    for site, mass in atoms:
        site, mass = float(site), float(mass)
        if not (math.isfinite(site) and math.isfinite(mass)):
            raise ValueError(f"non-finite atom ({site}, {mass})")
        if mass < 0.0:
            raise ValueError(f"negative atom mass {mass} at {site}")
        if mass > 0.0:
            cleaned.append((site, mass))
    cleaned.sort()
    merged: list[tuple[float, float]] = []
    for site, mass in cleaned:
        if merged and site - merged[-1][0] <= tol:
            merged[-1] = (merged[-1][0], merged[-1][1] + mass)
        else:
            merged.append((site, mass))
    return tuple(merged)


def build_accum(row: RowSpec, center: bool) -> AccumMeasure:
    """K_n of a row: atoms x^2*prob per discrete site, pieces per continuous
    component; with center=True every component is first shifted by its mean."""
    site_mass: dict[float, float] = {}
    piece_weight: dict[ComponentDist, float] = {}
    for dist, count, _ in grouped_components(row.components):
        d = dist.shifted(dist.mean()) if center else dist
        if isinstance(d, FiniteDiscrete):
            for x, p in d.atoms:
                m = x * x * p * count
                if m != 0.0:
                    site_mass[x] = site_mass.get(x, 0.0) + m
        else:
            piece_weight[d] = piece_weight.get(d, 0.0) + float(count)
    return AccumMeasure(
        atoms=tuple(site_mass.items()),
        pieces=tuple((w, d) for d, w in piece_weight.items()),
        row_n=row.n,
        centered=center,
    )


def eval_accum(m: AccumMeasure, x: float) -> float:
    return m.cdf(x)


# ---------------------------------------------------------------------------
# Candidate limit measures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiracAtZero:
    """K(x) = mass * 1_(x >= 0)."""

    mass: float = 1.0

    def __post_init__(self):
        if not self.mass > 0.0:
            raise ValueError("mass must be positive")

    def to_measure(self) -> AccumMeasure:
        return AccumMeasure(atoms=((0.0, float(self.mass)),))

    def cdf(self, x: float) -> float:
        return float(self.mass) if x >= 0.0 else 0.0

    def discontinuities(self) -> tuple[float, ...]:
        return (0.0,)

    def total(self) -> float:
        return float(self.mass)


@dataclass(frozen=True)
class ScaledDiracAtOne:
    """K(x) = lam * 1_(x >= 1)."""

    lam: float = 1.0

    def __post_init__(self):
        if not self.lam > 0.0:
            raise ValueError("lambda must be positive")

    def to_measure(self) -> AccumMeasure:
        return AccumMeasure(atoms=((1.0, float(self.lam)),))

    def cdf(self, x: float) -> float:
        return float(self.lam) if x >= 1.0 else 0.0

    def discontinuities(self) -> tuple[float, ...]:
        return (1.0,)

    def total(self) -> float:
        return float(self.lam)


@dataclass(frozen=True)
class ExplicitLimit:
    measure: AccumMeasure

    def to_measure(self) -> AccumMeasure:
        return self.measure

    def cdf(self, x: float) -> float:
        return self.measure.cdf(x)

    def discontinuities(self) -> tuple[float, ...]:
        return tuple(s for s, _ in self.measure.atoms)

    def total(self) -> float:
        return self.measure.total_mass


LimitMeasureSpec = DiracAtZero | ScaledDiracAtOne | ExplicitLimit


@dataclass(frozen=True)
class PreweakDistance:
    sup_deviation: float
    mass_gap: float


def preweak_distance(
    measures: Sequence[AccumMeasure],
    limit: LimitMeasureSpec,
    grid: Sequence[float],
    exclusion: float = 0.0,
) -> list[PreweakDistance]:
    """Per measure: sup over the grid of |K_n(x) - K(x)|, plus the total-mass
    gap (the extra requirement separating weak from pre-weak convergence).

    Grid points within `exclusion` of a limit discontinuity are rejected;
    with the default 0.0 only exact hits are."""
    grid = tuple(float(x) for x in grid)
    if not grid:
        raise ValueError("grid must be nonempty")
    for x in grid:
        for s in limit.discontinuities():
            if abs(x - s) <= exclusion:
                raise DiscontinuityPointError(
                    f"grid point {x} is a discontinuity point of the limit (site {s})"
                )
    total = limit.total()
    out = []
    for m in measures:
        dev = max(abs(m.cdf(x) - limit.cdf(x)) for x in grid)
        out.append(PreweakDistance(dev, abs(m.total_mass - total)))
    return out


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def measure_to_json(m: AccumMeasure) -> dict:
    return {
        "atoms": [[s, mass] for s, mass in m.atoms],
        "pieces": [{"weight": w, "dist": component_to_json(d)} for w, d in m.pieces],
    }


def measure_from_json(obj, path: str = "") -> AccumMeasure:
    if not isinstance(obj, dict):
        raise ValueError(f"{path or '/'}: expected an object")
    atoms = obj.get("atoms", [])
    pieces = obj.get("pieces", [])
    if not isinstance(atoms, list) or not isinstance(pieces, list):
        raise ValueError(f"{path}: atoms and pieces must be lists")
    return AccumMeasure(
        atoms=tuple((float(a[0]), float(a[1])) for a in atoms),
        pieces=tuple(
            (float(p["weight"]), component_from_json(p["dist"], f"{path}/pieces/{i}/dist"))
            for i, p in enumerate(pieces)
        ),
    )


def export_measure_csv(m: AccumMeasure) -> tuple[str, str]:
    """(csv_text, json_header_text): atom table plus a total-mass header."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["site", "mass"])
    for site, mass in m.atoms:
        w.writerow([repr(site), repr(mass)])
    header = {"total_mass": m.total_mass, "n": m.row_n, "centered": m.centered}
    return buf.getvalue(), json.dumps(header, indent=2) + "\n"
