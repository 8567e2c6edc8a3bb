"""Triangular-array rows: component distributions, row statistics, generators.

Component families are restricted to those with closed-form partial and
tail second moments (finite-discrete, Gaussian, uniform), so accumulation
measures and Lindeberg sums downstream carry no quadrature error.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class ArraySpecError(ValueError):
    """An array JSON document violates the schema; message carries a JSON pointer."""


# ---------------------------------------------------------------------------
# Component distributions
# ---------------------------------------------------------------------------


class ComponentDist:
    """One array entry's distribution, with exact moment functionals.

    Subclasses are frozen dataclasses; all methods are pure.
    """

    def mean(self) -> float:
        raise NotImplementedError

    def var(self) -> float:
        raise NotImplementedError

    def second_moment(self) -> float:
        return self.var() + self.mean() ** 2

    def cf(self, t: float) -> complex:
        """Characteristic function at t."""
        raise NotImplementedError

    def prob_abs_ge(self, eps: float) -> float:
        """P(|X| >= eps)."""
        raise NotImplementedError

    def partial_m2(self, x: float) -> float:
        """Partial second moment: integral of y^2 dF(y) over (-inf, x]."""
        raise NotImplementedError

    def partial_m3(self, x: float) -> float:
        """Partial third moment: integral of y^3 dF(y) over (-inf, x]."""
        raise NotImplementedError

    def tail_m2(self, center: float, eps: float, inclusive: bool = False) -> float:
        """Integral of y^2 dF(y) over |y - center| > eps (or >= eps if inclusive)."""
        raise NotImplementedError

    def shifted(self, c: float) -> "ComponentDist":
        """Distribution of X - c."""
        raise NotImplementedError

    def scaled(self, s: float) -> "ComponentDist":
        """Distribution of X / s, s > 0."""
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class FiniteDiscrete(ComponentDist):
    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.atoms:
            raise ValueError("FiniteDiscrete needs at least one atom")
        coerced = []
        total = 0.0
        for site, prob in self.atoms:
            site, prob = float(site), float(prob)
            if not (math.isfinite(site) and math.isfinite(prob)):
                raise ValueError(f"non-finite atom ({site}, {prob})")
            if prob < 0.0:
                raise ValueError(f"negative probability {prob} at site {site}")
            coerced.append((site, prob))
            total += prob
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"atom probabilities sum to {total}, expected 1")
        object.__setattr__(self, "atoms", tuple(coerced))

    def mean(self):
        return math.fsum(x * p for x, p in self.atoms)

    def var(self):
        m = self.mean()
        return math.fsum((x - m) ** 2 * p for x, p in self.atoms)

    def second_moment(self):
        return math.fsum(x * x * p for x, p in self.atoms)

    def cf(self, t):
        return sum(p * complex(math.cos(t * x), math.sin(t * x)) for x, p in self.atoms)

    def prob_abs_ge(self, eps):
        return math.fsum(p for x, p in self.atoms if abs(x) >= eps)

    def partial_m2(self, x):
        return math.fsum(s * s * p for s, p in self.atoms if s <= x)

    def partial_m3(self, x):
        return math.fsum(s * s * s * p for s, p in self.atoms if s <= x)

    def tail_m2(self, center, eps, inclusive=False):
        if inclusive:
            return math.fsum(s * s * p for s, p in self.atoms if abs(s - center) >= eps)
        return math.fsum(s * s * p for s, p in self.atoms if abs(s - center) > eps)

    def shifted(self, c):
        if c == 0.0:
            return self
        return FiniteDiscrete(tuple((x - c, p) for x, p in self.atoms))

    def scaled(self, s):
        if s <= 0.0:
            raise ValueError("scale must be positive")
        return FiniteDiscrete(tuple((x / s, p) for x, p in self.atoms))

    def sample(self, rng, size):
        sites = np.array([x for x, _ in self.atoms])
        cum = np.cumsum([p for _, p in self.atoms])
        idx = np.searchsorted(cum, rng.random(size), side="right")
        return sites[np.minimum(idx, len(sites) - 1)]


@dataclass(frozen=True)
class Gaussian(ComponentDist):
    m: float
    v: float  # variance, strictly positive

    def __post_init__(self):
        object.__setattr__(self, "m", float(self.m))
        object.__setattr__(self, "v", float(self.v))
        if not (self.v > 0.0 and math.isfinite(self.v) and math.isfinite(self.m)):
            raise ValueError(f"Gaussian needs finite mean and variance > 0, got ({self.m}, {self.v})")

    def mean(self):
        return self.m

    def var(self):
        return self.v

    def cf(self, t):
        return cexp(self.m * t, -0.5 * self.v * t * t)

    def prob_abs_ge(self, eps):
        sd = math.sqrt(self.v)
        return float(ndtr((self.m - eps) / sd) + ndtr((-eps - self.m) / sd))

    def partial_m2(self, x):
        sd = math.sqrt(self.v)
        z = (x - self.m) / sd
        phi = _INV_SQRT_2PI * math.exp(-0.5 * z * z)
        return (self.m * self.m + self.v) * float(ndtr(z)) - sd * (x + self.m) * phi

    def partial_m3(self, x):
        sd = math.sqrt(self.v)
        z = (x - self.m) / sd
        phi = _INV_SQRT_2PI * math.exp(-0.5 * z * z)
        head = (self.m ** 3 + 3.0 * self.m * self.v) * float(ndtr(z))
        return head - phi * (3.0 * self.m * self.m * sd + 3.0 * self.m * self.v * z + sd ** 3 * (z * z + 2.0))

    def tail_m2(self, center, eps, inclusive=False):
        left = self.partial_m2(center - eps)
        right = self.second_moment() - self.partial_m2(center + eps)
        return left + max(right, 0.0)

    def shifted(self, c):
        return self if c == 0.0 else Gaussian(self.m - c, self.v)

    def scaled(self, s):
        if s <= 0.0:
            raise ValueError("scale must be positive")
        return Gaussian(self.m / s, self.v / (s * s))

    def pdf(self, x: np.ndarray) -> np.ndarray:
        sd = math.sqrt(self.v)
        z = (np.asarray(x, dtype=float) - self.m) / sd
        return _INV_SQRT_2PI / sd * np.exp(-0.5 * z * z)

    def sample(self, rng, size):
        # inverse-CDF on an open-(0,1) uniform so the draw is a pure function
        # of the bit stream (no rejection steps)
        u = _uniform_open(rng, size)
        return self.m + math.sqrt(self.v) * ndtri(u)


@dataclass(frozen=True)
class Uniform(ComponentDist):
    lo: float
    hi: float

    def __post_init__(self):
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.lo < self.hi):
            raise ValueError(f"Uniform needs lo < hi, got ({self.lo}, {self.hi})")

    def mean(self):
        return 0.5 * (self.lo + self.hi)

    def var(self):
        return (self.hi - self.lo) ** 2 / 12.0

    def cf(self, t):
        half = 0.5 * (self.hi - self.lo) * t
        mid = 0.5 * (self.hi + self.lo) * t
        return cexp(mid, 0.0) * _sinc(half)

    def prob_abs_ge(self, eps):
        overlap = max(0.0, min(self.hi, eps) - max(self.lo, -eps))
        return 1.0 - overlap / (self.hi - self.lo)

    def _m2_raw(self, x):
        return (x ** 3 - self.lo ** 3) / (3.0 * (self.hi - self.lo))

    def partial_m2(self, x):
        if x <= self.lo:
            return 0.0
        return self._m2_raw(min(x, self.hi))

    def partial_m3(self, x):
        if x <= self.lo:
            return 0.0
        xx = min(x, self.hi)
        return (xx ** 4 - self.lo ** 4) / (4.0 * (self.hi - self.lo))

    def tail_m2(self, center, eps, inclusive=False):
        left = self.partial_m2(center - eps)
        right = self._m2_raw(self.hi) - self.partial_m2(center + eps)
        return left + max(right, 0.0)

    def shifted(self, c):
        return self if c == 0.0 else Uniform(self.lo - c, self.hi - c)

    def scaled(self, s):
        if s <= 0.0:
            raise ValueError("scale must be positive")
        return Uniform(self.lo / s, self.hi / s)

    def pdf(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        dens = 1.0 / (self.hi - self.lo)
        return np.where((x >= self.lo) & (x <= self.hi), dens, 0.0)

    def sample(self, rng, size):
        return self.lo + (self.hi - self.lo) * rng.random(size)


def cexp(imag_arg: float, real_arg: float) -> complex:
    """exp(real_arg + i*imag_arg)."""
    r = math.exp(real_arg)
    return complex(r * math.cos(imag_arg), r * math.sin(imag_arg))


def _sinc(z: float) -> float:
    if abs(z) < 1e-4:
        z2 = z * z
        return 1.0 - z2 / 6.0 + z2 * z2 / 120.0
    return math.sin(z) / z


def _uniform_open(rng: np.random.Generator, size: int) -> np.ndarray:
    # 53-bit uniforms on the open interval (0,1); ndtri stays finite
    return rng.integers(1, 1 << 53, size=size).astype(np.float64) / float(1 << 53)


class ComponentMoments(NamedTuple):
    mean: float
    var: float
    cf: Callable[[float], complex]
    partial_m2: Callable[[float], float]
    tail_m2: Callable[[float, float], float]


def component_moments(d: ComponentDist) -> ComponentMoments:
    """Bundle the exact moment functionals of one component."""
    return ComponentMoments(d.mean(), d.var(), d.cf, d.partial_m2, d.tail_m2)


# ---------------------------------------------------------------------------
# Rows and generators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RowSpec:
    n: int
    components: tuple[ComponentDist, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if len(self.components) < 1:
            raise ValueError("a row needs at least one component")

    def k(self) -> int:
        return len(self.components)

    def centered(self) -> "RowSpec":
        """Row with every component shifted by its own mean."""
        cache: dict[int, ComponentDist] = {}
        out = []
        for comp in self.components:
            got = cache.get(id(comp))
            if got is None:
                got = comp.shifted(comp.mean())
                cache[id(comp)] = got
            out.append(got)
        return RowSpec(self.n, tuple(out))


def grouped_components(components: Sequence[ComponentDist]):
    """Group repeated (identical-object) components: [(dist, count, first_index)].

    Generators build rows as n references to one object, so statistics loops
    run in O(#unique) instead of O(k(n)).
    """
    order: list[list] = []
    index: dict[int, list] = {}
    for pos, comp in enumerate(components):
        ent = index.get(id(comp))
        if ent is None:
            ent = [comp, 0, pos]
            index[id(comp)] = ent
            order.append(ent)
        ent[1] += 1
    return [(c, cnt, first) for c, cnt, first in order]


class RowStats(NamedTuple):
    u: float   # max_k P(|X_k| >= eps)
    mv: float  # sum of variances
    b: float   # max variance
    a: float   # sum of means


def row_statistics(row: RowSpec, eps: float) -> RowStats:
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    u = 0.0
    mv = 0.0
    b = 0.0
    a = 0.0
    for dist, count, _ in grouped_components(row.components):
        u = max(u, dist.prob_abs_ge(eps))
        v = dist.var()
        mv += v * count
        b = max(b, v)
        a += dist.mean() * count
    return RowStats(u, mv, b, a)


class ArrayGenerator:
    """Deterministic pure rule n -> RowSpec."""

    def row(self, n: int) -> RowSpec:
        raise NotImplementedError


@dataclass(frozen=True)
class StandardizedIid(ArrayGenerator):
    """n copies of base / s_n with s_n^2 = n * Var(base)."""

    base: ComponentDist

    def __post_init__(self):
        if self.base.var() <= 0.0:
            raise ValueError("StandardizedIid base needs positive variance")

    def row(self, n):
        if n < 1:
            raise ValueError("row index must be >= 1")
        comp = self.base.scaled(math.sqrt(n * self.base.var()))
        return RowSpec(n, (comp,) * n)


@dataclass(frozen=True)
class BernoulliPoisson(ArrayGenerator):
    """n copies of Bernoulli(lam / n) on {0, 1}."""

    lam: float

    def __post_init__(self):
        object.__setattr__(self, "lam", float(self.lam))
        if not (self.lam > 0.0 and math.isfinite(self.lam)):
            raise ValueError("lambda must be positive and finite")

    def row(self, n):
        if n < 1:
            raise ValueError("row index must be >= 1")
        p = self.lam / n
        if p > 1.0:
            raise ValueError(f"row {n} would need success probability {p} > 1")
        comp = FiniteDiscrete(((0.0, 1.0 - p), (1.0, p)))
        return RowSpec(n, (comp,) * n)


@dataclass(frozen=True)
class ExplicitArray(ArrayGenerator):
    rows: tuple[RowSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        if not self.rows:
            raise ValueError("ExplicitArray needs at least one row")

    def row(self, n):
        for r in self.rows:
            if r.n == n:
                return r
        have = sorted(r.n for r in self.rows)
        raise ValueError(f"no explicit row for n={n}; available: {have}")


# ---------------------------------------------------------------------------
# Hypothesis statistics over a list of row indices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HypothesisReport:
    """Raw bounded-variance / variance-convergence / negligibility statistics.

    markov_bound holds eps^-2 * max_k E[X_{k,n}^2]; for centered rows this is
    the classical Chebyshev envelope for the per-term exceedance probability.
    """

    n_list: tuple[int, ...]
    eps_list: tuple[float, ...]
    mv: tuple[float, ...]
    b: tuple[float, ...]
    a: tuple[float, ...]
    sup_mv: float
    c_target: float | None
    vch_gap: tuple[float, ...] | None
    u_table: tuple[tuple[float, ...], ...]        # [i_eps][i_n]
    markov_bound: tuple[tuple[float, ...], ...]   # [i_eps][i_n]
    markov_ok: bool
    uan_final: tuple[float, ...]                  # U at largest n, per eps
    uan_ok: bool
    vch_ok: bool | None

    def to_dict(self) -> dict:
        d = {
            "n_list": list(self.n_list),
            "eps_list": list(self.eps_list),
            "mv": list(self.mv),
            "b": list(self.b),
            "a": list(self.a),
            "sup_mv": self.sup_mv,
            "c_target": self.c_target,
            "vch_gap": None if self.vch_gap is None else list(self.vch_gap),
            "u_table": {repr(e): list(col) for e, col in zip(self.eps_list, self.u_table)},
            "markov_bound": {repr(e): list(col) for e, col in zip(self.eps_list, self.markov_bound)},
            "markov_ok": self.markov_ok,
            "uan_final": list(self.uan_final),
            "uan_ok": self.uan_ok,
            "vch_ok": self.vch_ok,
        }
        return d


def hypothesis_check(
    gen: ArrayGenerator,
    n_list: Sequence[int],
    eps_list: Sequence[float],
    c_target: float | None = None,
    tol: float = 1e-3,
) -> HypothesisReport:
    """Tabulate MV(n), B_n, a_n and U(n, eps), plus the Markov envelope."""
    n_list = tuple(int(n) for n in n_list)
    if not n_list:
        raise ValueError("n_list must be nonempty")
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be strictly increasing")
    eps_list = tuple(float(e) for e in eps_list)
    if any(e <= 0 for e in eps_list):
        raise ValueError("eps values must be positive")

    rows = [gen.row(n) for n in n_list]
    mv, b, a, max_m2 = [], [], [], []
    for row in rows:
        st = row_statistics(row, eps_list[0] if eps_list else 1.0)
        mv.append(st.mv)
        b.append(st.b)
        a.append(st.a)
        max_m2.append(max(d.second_moment() for d, _, _ in grouped_components(row.components)))

    u_table, bound_table = [], []
    markov_ok = True
    for eps in eps_list:
        col, bcol = [], []
        for row, m2 in zip(rows, max_m2):
            u = row_statistics(row, eps).u
            bound = m2 / (eps * eps)
            col.append(u)
            bcol.append(bound)
            if u > bound + 1e-12:
                markov_ok = False
        u_table.append(tuple(col))
        bound_table.append(tuple(bcol))

    uan_final = tuple(col[-1] for col in u_table)
    uan_ok = all(f <= tol for f in uan_final)
    vch_gap = None
    vch_ok = None
    if c_target is not None:
        vch_gap = tuple(abs(x - c_target) for x in mv)
        vch_ok = vch_gap[-1] <= tol

    return HypothesisReport(
        n_list=n_list,
        eps_list=eps_list,
        mv=tuple(mv),
        b=tuple(b),
        a=tuple(a),
        sup_mv=max(mv),
        c_target=c_target,
        vch_gap=vch_gap,
        u_table=tuple(u_table),
        markov_bound=tuple(bound_table),
        markov_ok=markov_ok,
        uan_final=uan_final,
        uan_ok=uan_ok,
        vch_ok=vch_ok,
    )


# ---------------------------------------------------------------------------
# JSON loading / dumping
# ---------------------------------------------------------------------------


def component_to_json(d: ComponentDist) -> dict:
    if isinstance(d, FiniteDiscrete):
        return {"kind": "finite_discrete", "atoms": [[x, p] for x, p in d.atoms]}
    if isinstance(d, Gaussian):
        return {"kind": "gaussian", "mean": d.m, "var": d.v}
    if isinstance(d, Uniform):
        return {"kind": "uniform", "lo": d.lo, "hi": d.hi}
    raise TypeError(f"unknown component type {type(d).__name__}")


def component_from_json(obj, path: str = "") -> ComponentDist:
    if not isinstance(obj, dict):
        raise ArraySpecError(f"{path or '/'}: expected an object")
    kind = obj.get("kind")
    if kind is None:
        raise ArraySpecError(f"{path}/kind: missing required field")
    try:
        if kind == "finite_discrete":
            atoms = obj.get("atoms")
            if not isinstance(atoms, list) or not atoms:
                raise ArraySpecError(f"{path}/atoms: expected a nonempty list")
            return FiniteDiscrete(tuple((float(a[0]), float(a[1])) for a in atoms))
        if kind == "gaussian":
            return Gaussian(_req_num(obj, "mean", path), _req_num(obj, "var", path))
        if kind == "uniform":
            return Uniform(_req_num(obj, "lo", path), _req_num(obj, "hi", path))
    except (ValueError, TypeError, IndexError) as exc:
        if isinstance(exc, ArraySpecError):
            raise
        raise ArraySpecError(f"{path}: {exc}") from exc
    raise ArraySpecError(f"{path}/kind: unknown component kind {kind!r}")


def _req_num(obj: dict, key: str, path: str) -> float:
    if key not in obj:
        raise ArraySpecError(f"{path}/{key}: missing required field")
    v = obj[key]
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ArraySpecError(f"{path}/{key}: expected a number, got {v!r}")
    return float(v)


def generator_to_json(gen: ArrayGenerator) -> dict:
    if isinstance(gen, StandardizedIid):
        return {"generator": "standardized_iid", "base": component_to_json(gen.base)}
    if isinstance(gen, BernoulliPoisson):
        return {"generator": "bernoulli_poisson", "lambda": gen.lam}
    if isinstance(gen, ExplicitArray):
        return {
            "generator": "explicit",
            "rows": [
                {"n": r.n, "components": [component_to_json(c) for c in r.components]}
                for r in gen.rows
            ],
        }
    raise TypeError(f"unknown generator type {type(gen).__name__}")


def generator_from_json(obj, path: str = "") -> ArrayGenerator:
    if not isinstance(obj, dict):
        raise ArraySpecError(f"{path or '/'}: expected an object")
    name = obj.get("generator")
    if name is None:
        raise ArraySpecError(f"{path}/generator: missing required field")
    if name == "standardized_iid":
        if "base" not in obj:
            raise ArraySpecError(f"{path}/base: missing required field")
        base = component_from_json(obj["base"], f"{path}/base")
        try:
            return StandardizedIid(base)
        except ValueError as exc:
            raise ArraySpecError(f"{path}/base: {exc}") from exc
    if name == "bernoulli_poisson":
        lam = _req_num(obj, "lambda", path)
        try:
            return BernoulliPoisson(lam)
        except ValueError as exc:
            raise ArraySpecError(f"{path}/lambda: {exc}") from exc
    if name == "explicit":
        rows = obj.get("rows")
        if not isinstance(rows, list) or not rows:
            raise ArraySpecError(f"{path}/rows: expected a nonempty list")
        built = []
        for i, robj in enumerate(rows):
            rpath = f"{path}/rows/{i}"
            if not isinstance(robj, dict) or "n" not in robj or "components" not in robj:
                raise ArraySpecError(f"{rpath}: expected an object with 'n' and 'components'")
            comps = tuple(
                component_from_json(c, f"{rpath}/components/{j}")
                for j, c in enumerate(robj["components"])
            )
            try:
                built.append(RowSpec(int(robj["n"]), comps))
            except (ValueError, TypeError) as exc:
                raise ArraySpecError(f"{rpath}: {exc}") from exc
        return ExplicitArray(tuple(built))
    raise ArraySpecError(f"{path}/generator: unknown generator {name!r}")


def load_array_spec(source: str | dict) -> ArrayGenerator:
    """Load an array generator from a JSON string or an already-parsed dict.

    On syntax errors the JSONDecodeError carries line and column; semantic
    errors carry a JSON pointer in the message.
    """
    if isinstance(source, str):
        source = json.loads(source)
    return generator_from_json(source, "")
