"""Limit-criterion checks and verdicts.

Lindeberg tail sums (Gaussian and Poisson flavors), the log-vs-(f-1)
comparison residual with its quartic envelope, and pass/fail verdicts for
Gaussian, translated-Poisson, and general canonical limits.

"Trend below tolerance" means: the statistic at the largest n is below the
tolerance AND the statistic is nonincreasing over the last three n entries.
Both facts are recorded separately so failures are attributable.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

from .accumulation import (
    LimitMeasureSpec,
    ScaledDiracAtOne,
    build_accum,
    preweak_distance,
)
from .arrays import (
    ArrayGenerator,
    HypothesisReport,
    RowSpec,
    grouped_components,
    hypothesis_check,
    row_statistics,
)
from .cf import CharFn, GaussianCF, to_json
from .config import DEFAULT_TOLERANCES, ToleranceConfig
from .exponent import limit_char_fn

_MONOTONE_SLACK = 1e-12


class ComparisonRegimeError(ValueError):
    """max_k |f_k(u) - 1| >= 1: outside the principal-log comparison regime."""


class NonCenteredRowError(ValueError):
    """A centered-only verdict was fed rows with nonzero means."""


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------


def lindeberg_gaussian(row: RowSpec, eps: float) -> float:
    """Sum over k of the second moment carried by {|x| >= eps}."""
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    return math.fsum(
        count * d.tail_m2(0.0, eps, inclusive=True)
        for d, count, _ in grouped_components(row.components)
    )


def lindeberg_poisson(row: RowSpec, eps: float) -> float:
    """Sum over k of the centered second moment carried by {|x - 1| > eps}.

    Components are centered at their own means before the tail is taken.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    total = 0.0
    for d, count, _ in grouped_components(row.components):
        centered = d.shifted(d.mean())
        total += count * centered.tail_m2(1.0, eps, inclusive=False)
    return total


def comparison_residual(row: RowSpec, u: float, c_bound: float) -> tuple[float, float]:
    """|sum_k [Log f_k(u) - (f_k(u) - 1)]| and the envelope c u^4 B_n / 4.

    Principal logarithm; requires max_k |f_k(u) - 1| < 1. The envelope is the
    centered-row regime: feed rows of mean-zero components (RowSpec.centered()).
    """
    acc = 0.0 + 0.0j
    b = 0.0
    for d, count, first in grouped_components(row.components):
        f = d.cf(u)
        if abs(f - 1.0) >= 1.0:
            raise ComparisonRegimeError(
                f"component {first} has |f(u) - 1| = {abs(f - 1.0):.6g} >= 1 at u = {u}"
            )
        acc += count * (cmath.log(f) - (f - 1.0))
        b = max(b, d.var())
    bound = c_bound * u ** 4 * b / 4.0
    return abs(acc), bound


# ---------------------------------------------------------------------------
# Verdict plumbing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrendCheck:
    code: str
    label: str
    values: tuple[float, ...]
    tol: float
    final_ok: bool
    monotone_ok: bool

    @property
    def passed(self) -> bool:
        return self.final_ok and self.monotone_ok

    def to_dict(self) -> dict:
        return {
            "code": self.code,
            "label": self.label,
            "values": list(self.values),
            "tol": self.tol,
            "final_ok": self.final_ok,
            "monotone_ok": self.monotone_ok,
            "passed": self.passed,
        }


def _trend(code: str, label: str, values: Sequence[float], tol: float) -> TrendCheck:
    values = tuple(float(v) for v in values)
    tail = values[-3:]
    monotone = all(b <= a + _MONOTONE_SLACK for a, b in zip(tail, tail[1:]))
    return TrendCheck(code, label, values, tol, values[-1] < tol, monotone)


def _level(code: str, label: str, values: Sequence[float], tol: float) -> TrendCheck:
    # an "all n" requirement rather than a limit: every entry below tol
    values = tuple(float(v) for v in values)
    return TrendCheck(code, label, values, tol, max(values) <= tol, True)


@dataclass(frozen=True)
class VerdictReport:
    task: str
    n_list: tuple[int, ...]
    eps_list: tuple[float, ...]
    hypothesis: HypothesisReport
    columns: dict[str, tuple[float, ...]]                  # per-n statistics
    series: dict[str, dict[float, tuple[float, ...]]]      # per-eps per-n tables
    checks: tuple[TrendCheck, ...]
    passed: bool
    reasons: tuple[str, ...]
    predicted_limit: CharFn | None

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "passed": self.passed,
            "reasons": list(self.reasons),
            "n_list": list(self.n_list),
            "eps_list": list(self.eps_list),
            "columns": {k: list(v) for k, v in self.columns.items()},
            "series": {
                name: {repr(eps): list(col) for eps, col in table.items()}
                for name, table in self.series.items()
            },
            "checks": [c.to_dict() for c in self.checks],
            "hypothesis": self.hypothesis.to_dict(),
            "predicted_limit": None if self.predicted_limit is None else to_json(self.predicted_limit),
        }

    def to_text(self) -> str:
        """Aligned one-row-per-check table for terminals."""
        width = max(len(c.code) for c in self.checks)
        lines = [f"{self.task}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            lines.append(
                f"  {'ok  ' if c.passed else 'FAIL'} {c.code:<{width}}  "
                f"final={c.values[-1]:.6g} (tol {c.tol:g})  "
                f"monotone={'yes' if c.monotone_ok else 'no'}"
            )
        return "\n".join(lines)


def _finish(task, n_list, eps_list, hyp, columns, series, checks, predicted) -> VerdictReport:
    reasons = tuple(c.code for c in checks if not c.passed)
    passed = not reasons
    return VerdictReport(
        task=task,
        n_list=tuple(n_list),
        eps_list=tuple(eps_list),
        hypothesis=hyp,
        columns=columns,
        series=series,
        checks=tuple(checks),
        passed=passed,
        reasons=reasons,
        predicted_limit=predicted if passed else None,
    )


def _validate_n_list(n_list) -> tuple[int, ...]:
    n_list = tuple(int(n) for n in n_list)
    if not n_list:
        raise ValueError("n_list must be nonempty")
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be strictly increasing")
    return n_list


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------


def gaussian_verdict(
    gen: ArrayGenerator,
    n_list: Sequence[int],
    eps_list: Sequence[float],
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
) -> VerdictReport:
    """Standard-normal limit: unit variance sum, vanishing Lindeberg tails,
    vanishing max variance. Rows must be centered."""
    n_list = _validate_n_list(n_list)
    eps_list = tuple(float(e) for e in eps_list)
    rows = [gen.row(n) for n in n_list]
    for row in rows:
        for d, _, first in grouped_components(row.components):
            if abs(d.mean()) > tolerances.structural:
                raise NonCenteredRowError(
                    f"row n={row.n} component {first} has mean {d.mean():.3g}; "
                    "use general_verdict (or poisson_verdict) for non-centered arrays"
                )

    hyp = hypothesis_check(gen, n_list, eps_list, c_target=1.0, tol=tolerances.exact_stat)
    stats = [row_statistics(r, eps_list[0]) for r in rows]
    mv = tuple(s.mv for s in stats)
    b = tuple(s.b for s in stats)
    a = tuple(s.a for s in stats)

    checks = [
        _level("GC0 normalization", "|MV(n) - 1|", [abs(x - 1.0) for x in mv], tolerances.exact_stat),
        _trend("max-variance", "B_n", b, tolerances.exact_stat),
    ]
    lindeberg: dict[float, tuple[float, ...]] = {}
    for eps in eps_list:
        col = tuple(lindeberg_gaussian(r, eps) for r in rows)
        lindeberg[eps] = col
        checks.append(_trend(f"lindeberg eps={eps!r}", f"g_n({eps!r})", col, tolerances.exact_stat))

    return _finish(
        "verdict-gaussian", n_list, eps_list, hyp,
        {"mv": mv, "b": b, "a": a},
        {"lindeberg_gaussian": lindeberg},
        checks,
        GaussianCF(0.0, 1.0),
    )


def poisson_verdict(
    gen: ArrayGenerator,
    n_list: Sequence[int],
    eps_list: Sequence[float],
    target: tuple[float, float],
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
) -> VerdictReport:
    """Translated-Poisson limit b + Poisson(lam): vanishing max variance,
    variance sum to lam, drift sum to b + lam, vanishing Poisson tails."""
    n_list = _validate_n_list(n_list)
    eps_list = tuple(float(e) for e in eps_list)
    b_target, lam = float(target[0]), float(target[1])
    if lam <= 0.0:
        raise ValueError("target lambda must be positive")
    rows = [gen.row(n) for n in n_list]
    hyp = hypothesis_check(gen, n_list, eps_list, c_target=lam, tol=tolerances.exact_stat)
    stats = [row_statistics(r, eps_list[0]) for r in rows]
    mv = tuple(s.mv for s in stats)
    bvals = tuple(s.b for s in stats)
    avals = tuple(s.a for s in stats)

    checks = [
        _trend("max-variance", "B_n", bvals, tolerances.exact_stat),
        _trend("variance-sum", f"|MV(n) - {lam!r}|", [abs(x - lam) for x in mv], tolerances.exact_stat),
        _trend("drift", f"|a_n - {b_target + lam!r}|", [abs(x - (b_target + lam)) for x in avals], tolerances.exact_stat),
    ]
    table: dict[float, tuple[float, ...]] = {}
    for eps in eps_list:
        col = tuple(lindeberg_poisson(r, eps) for r in rows)
        table[eps] = col
        checks.append(
            _trend(f"lindeberg-poisson eps={eps!r}", f"g_n,pois({eps!r})", col, tolerances.exact_stat)
        )

    predicted = limit_char_fn(ScaledDiracAtOne(lam).to_measure(), b_target + lam)
    return _finish(
        "verdict-poisson", n_list, eps_list, hyp,
        {"mv": mv, "b": bvals, "a": avals},
        {"lindeberg_poisson": table},
        checks,
        predicted,
    )


def general_verdict(
    gen: ArrayGenerator,
    n_list: Sequence[int],
    limit: LimitMeasureSpec,
    shift_target: float | None,
    grid: Sequence[float],
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
    eps_list: Sequence[float] = (0.5,),
) -> VerdictReport:
    """Canonical limit via the centered accumulation measures: pre-weak grid
    distance, the total-mass gap (the weak upgrade), and the drift trend."""
    n_list = _validate_n_list(n_list)
    eps_list = tuple(float(e) for e in eps_list)
    rows = [gen.row(n) for n in n_list]
    hyp = hypothesis_check(gen, n_list, eps_list, c_target=limit.total(), tol=tolerances.coarse_stat)
    measures = [build_accum(r, center=True) for r in rows]
    dists = preweak_distance(measures, limit, grid)
    stats = [row_statistics(r, eps_list[0]) for r in rows]
    avals = tuple(s.a for s in stats)

    sup_dev = tuple(d.sup_deviation for d in dists)
    mass_gap = tuple(d.mass_gap for d in dists)
    checks = [
        _trend("preweak-distance", "sup grid deviation", sup_dev, tolerances.coarse_stat),
        _trend("mass-gap", "|mass(K_n) - mass(K)|", mass_gap, tolerances.coarse_stat),
    ]
    if shift_target is not None:
        checks.append(
            _trend("drift", f"|a_n - {shift_target!r}|", [abs(x - shift_target) for x in avals], tolerances.exact_stat)
        )

    predicted = limit_char_fn(limit.to_measure(), 0.0 if shift_target is None else shift_target)
    return _finish(
        "verdict-general", n_list, eps_list, hyp,
        {
            "a": avals,
            "sup_deviation": sup_dev,
            "mass_gap": mass_gap,
            "mv": tuple(s.mv for s in stats),
            "b": tuple(s.b for s in stats),
        },
        {},
        checks,
        predicted,
    )
