"""Extended-real Lawvere metrics, finite measures, and the L^p metric on maps.

Distances live in [0, inf].  Only the identity law and the triangle
inequality are required; symmetry and positive definiteness are not.
The measure-theoretic convention 0 * inf = 0 is used everywhere, so
zero-mass points never contribute infinite cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InstanceError

__all__ = [
    "INF",
    "TOL",
    "ext_mul",
    "ext_root",
    "MetricData",
    "MeasureData",
    "discrete_metric",
    "shortest_path_metric",
    "is_short_map",
    "is_measure_decreasing",
    "lp_distance",
]

INF = math.inf
TOL = 1e-9


def ext_mul(a: float, b: float) -> float:
    """Product in [0, inf] with the convention 0 * inf = 0."""
    if a == 0.0 or b == 0.0:
        return 0.0
    return a * b


def ext_root(a: float, p: float) -> float:
    """p-th root in [0, inf]; inf ** (1/p) = inf."""
    if a == INF:
        return INF
    return a ** (1.0 / p)


@dataclass(frozen=True, eq=False)
class MetricData:
    """A Lawvere metric on {0..n-1}: zero diagonal plus the triangle inequality."""

    n: int
    d: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        object.__setattr__(self, "d", d)
        if d.shape != (self.n, self.n):
            raise DimensionError(f"metric matrix must be {self.n}x{self.n}, got {d.shape}")
        if np.any(np.isnan(d)) or np.any(d < 0):
            raise InstanceError("metric entries must be nonnegative (or inf)")
        if self.n and np.any(np.abs(np.diag(d)) > TOL):
            raise InstanceError("metric diagonal must be zero")
        for k in range(self.n):
            # d(i,j) <= d(i,k) + d(k,j) for all i,j
            if np.any(d > d[:, [k]] + d[[k], :] + TOL):
                i, j = np.argwhere(d > d[:, [k]] + d[[k], :] + TOL)[0]
                raise InstanceError(
                    f"triangle inequality fails: d({i},{j}) > d({i},{k}) + d({k},{j})"
                )

    def is_discrete(self) -> bool:
        """True when the metric is 0 on the diagonal and inf everywhere else."""
        off = ~np.eye(self.n, dtype=bool)
        return bool(np.all(np.isinf(self.d[off])))

    def is_symmetric(self) -> bool:
        d, dt = self.d, self.d.T
        both_inf = np.isinf(d) & np.isinf(dt)
        return bool(np.all(both_inf | (np.abs(np.where(both_inf, 0.0, d - dt)) <= TOL)))


@dataclass(frozen=True, eq=False)
class MeasureData:
    """A finite nonnegative measure on {0..n-1}, stored as a weight vector."""

    n: int
    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        object.__setattr__(self, "w", w)
        if w.shape != (self.n,):
            raise DimensionError(f"measure must have length {self.n}, got {w.shape}")
        if np.any(np.isnan(w)) or np.any(np.isinf(w)) or np.any(w < 0):
            raise InstanceError("measure weights must be finite and nonnegative")

    def total(self) -> float:
        return float(self.w.sum())

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.w > 0)


def counting_measure(n: int) -> MeasureData:
    return MeasureData(n, np.ones(n))


def uniform_measure(n: int) -> MeasureData:
    if n == 0:
        return MeasureData(0, np.zeros(0))
    return MeasureData(n, np.full(n, 1.0 / n))


def discrete_metric(n: int) -> MetricData:
    """0 on the diagonal, inf off it."""
    d = np.full((n, n), INF)
    np.fill_diagonal(d, 0.0)
    return MetricData(n, d)


def shortest_path_metric(x, weights=None) -> MetricData:
    """All-pairs shortest directed path distance on the vertices of a graph-like
    instance (objects V, E with generators src, tgt); inf when unreachable.

    ``weights`` optionally gives a nonnegative length per edge; the default
    counts edges.
    """
    t = x.theory
    if not (t.has_object("V") and t.has_object("E")):
        raise InstanceError("shortest_path_metric needs objects V and E")
    try:
        src = x.maps["src"]
        tgt = x.maps["tgt"]
    except KeyError:
        raise InstanceError("shortest_path_metric needs generators src and tgt")
    n = x.sets["V"]
    m = x.sets["E"]
    if weights is None:
        weights = np.ones(m)
    else:
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (m,):
            raise DimensionError(f"expected {m} edge weights, got {weights.shape}")
        if np.any(weights < 0):
            raise InstanceError("negative edge weight")
    d = np.full((n, n), INF)
    np.fill_diagonal(d, 0.0)
    for e in range(m):
        a, b = src[e], tgt[e]
        if weights[e] < d[a, b]:
            d[a, b] = weights[e]
    for k in range(n):
        d = np.minimum(d, d[:, [k]] + d[[k], :])
    return MetricData(n, d)


def _as_matrix(k) -> np.ndarray:
    """Accept a FiniteKernel, a stochastic matrix, or a finite function array."""
    p = getattr(k, "p", k)
    p = np.asarray(p)
    if p.ndim == 1:
        # function given by its value array; caller supplies codomain via muY
        return p
    return p.astype(float)


def is_short_map(f, dX: MetricData, dY: MetricData, tol: float = TOL) -> bool:
    """d_Y(f(i), f(j)) <= d_X(i, j) for every pair; inf on the right always passes."""
    f = np.asarray(f, dtype=int)
    if f.shape != (dX.n,):
        raise DimensionError(f"function has length {f.shape}, domain metric has n={dX.n}")
    if f.size and (f.min() < 0 or f.max() >= dY.n):
        raise DimensionError("function value out of range of the codomain metric")
    if dX.n == 0:
        return True
    dff = dY.d[np.ix_(f, f)]
    return bool(np.all(dff <= dX.d + tol))


def is_measure_decreasing(k, muX: MeasureData, muY: MeasureData, tol: float = TOL) -> bool:
    """Pushforward of muX along a function or kernel is <= muY entrywise."""
    p = _as_matrix(k)
    if p.ndim == 1:
        if p.shape != (muX.n,):
            raise DimensionError("function length does not match domain measure")
        if muX.n and p.size and (p.min() < 0 or p.max() >= muY.n):
            raise DimensionError("function value out of range of the codomain measure")
        push = np.bincount(p, weights=muX.w, minlength=muY.n) if muX.n else np.zeros(muY.n)
    else:
        if p.shape != (muX.n, muY.n):
            raise DimensionError(
                f"kernel shape {p.shape} does not match measures ({muX.n}, {muY.n})"
            )
        push = muX.w @ p
    return bool(np.all(push <= muY.w + tol))


def lp_distance(f, g, muX: MeasureData | None, dY: MetricData, p: float) -> float:
    """L^p distance between functions f, g: X -> Y.

    For finite p this is (sum_x d_Y(f(x), g(x))^p mu(x))^(1/p); for p = inf it
    is the supremum of d_Y(f(x), g(x)) over the support of mu, or over all of X
    when no measure is given.
    """
    f = np.asarray(f, dtype=int)
    g = np.asarray(g, dtype=int)
    if f.shape != g.shape:
        raise DimensionError("functions have different domains")
    n = f.shape[0]
    if muX is not None and muX.n != n:
        raise DimensionError("measure does not match function domain")
    if f.size and (max(f.max(), g.max()) >= dY.n or min(f.min(), g.min()) < 0):
        raise DimensionError("function value out of range of the target metric")
    if p == INF:
        idx = np.arange(n) if muX is None else muX.support()
        if idx.size == 0:
            return 0.0
        return float(np.max(dY.d[f[idx], g[idx]]))
    if p < 1:
        raise ValueError("order p must be >= 1")
    if muX is None:
        raise InstanceError("a measure on the domain is required when p is finite")
    total = 0.0
    dvals = dY.d[f, g]
    for i in range(n):
        total += ext_mul(muX.w[i], dvals[i] ** p if dvals[i] != INF else INF)
        if total == INF:
            return INF
    return ext_root(total, p)
