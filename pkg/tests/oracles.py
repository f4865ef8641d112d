"""Independent brute-force oracles used to derive expected values.

These deliberately avoid the code paths they check: the LP oracle
enumerates polytope vertices with dense linear algebra, transport values
come from that oracle, shortest paths from explicit path enumeration, and
Hausdorff minima from full product enumeration with a from-scratch weight
formula.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

INF = math.inf


# -- LP oracle: vertex enumeration --------------------------------------------


def _hyperplanes(model):
    """Rows of the polyhedron as (normal, rhs, kind) with kind in {eq, le, ge}."""
    n = model.num_vars
    planes = []
    for _, terms, rel, rhs in model.constraints:
        row = np.zeros(n)
        for idx, coef in terms:
            row[idx] += coef
        kind = {"=": "eq", "<=": "le", ">=": "ge"}[rel]
        planes.append((row, float(rhs), kind))
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        planes.append((e, 0.0, "ge"))
        if math.isfinite(model.var_upper[i]):
            planes.append((e, float(model.var_upper[i]), "le"))
    return planes


def _feasible(planes, x, tol=1e-7):
    for row, rhs, kind in planes:
        v = row @ x - rhs
        if kind == "eq" and abs(v) > tol:
            return False
        if kind == "le" and v > tol:
            return False
        if kind == "ge" and v < -tol:
            return False
    return True


def _independent_rows(rows):
    """Greedy maximal linearly independent subset (indices)."""
    picked = []
    mat = None
    for i, r in enumerate(rows):
        cand = r[None, :] if mat is None else np.vstack([mat, r])
        if np.linalg.matrix_rank(cand, tol=1e-9) == cand.shape[0]:
            picked.append(i)
            mat = cand
    return picked


def enumerate_vertices(model, tol=1e-9):
    """All vertices of the feasible region (x >= 0 makes it pointed).

    A maximal independent set of equality planes is always active; the
    remaining active planes are chosen from the inequalities and bounds.
    Every candidate is checked against the full constraint list, so
    dependent equalities are still enforced.
    """
    n = model.num_vars
    planes = _hyperplanes(model)
    eqs = [(r, b) for r, b, k in planes if k == "eq"]
    others = [(r, b) for r, b, k in planes if k != "eq"]
    keep = _independent_rows([r for r, _ in eqs]) if eqs else []
    eq_rows = [eqs[i][0] for i in keep]
    eq_rhs = [eqs[i][1] for i in keep]
    vertices = []
    need = n - len(eq_rows)
    if need < 0:
        return []
    for combo in itertools.combinations(range(len(others)), need):
        rows = eq_rows + [others[i][0] for i in combo]
        rhs = eq_rhs + [others[i][1] for i in combo]
        A = np.asarray(rows).reshape(n, n)
        try:
            x = np.linalg.solve(A, np.asarray(rhs))
        except np.linalg.LinAlgError:
            continue
        if not np.all(np.isfinite(x)):
            continue
        if _feasible(planes, x):
            if not any(np.allclose(x, v, atol=1e-7) for v in vertices):
                vertices.append(x)
    return vertices


def _recession_unbounded(model, tol=1e-9):
    """True when some recession direction has negative cost."""
    import cset_transport.lp as lpmod

    n = model.num_vars
    ray = lpmod.LpModel()
    for i, name in enumerate(model.var_names):
        upper = 0.0 if math.isfinite(model.var_upper[i]) else INF
        ray.add_variable(name, upper=upper)
    for cname, terms, rel, rhs in model.constraints:
        ray.add_constraint(cname, terms, rel if rel != "=" else "=", 0.0)
    ray.add_constraint("norm", [(i, 1.0) for i in range(n)], "=", 1.0)
    c = np.zeros(n)
    for idx, coef in model.objective.items():
        c[idx] = coef
    best = None
    for v in enumerate_vertices(ray):
        val = c @ v
        if best is None or val < best:
            best = val
    return best is not None and best < -1e-9


def brute_force_lp(model):
    """(status, objective) by vertex enumeration; independent of the simplex."""
    c = np.zeros(model.num_vars)
    for idx, coef in model.objective.items():
        c[idx] = coef
    vertices = enumerate_vertices(model)
    if not vertices:
        return "infeasible", None
    if _recession_unbounded(model):
        return "unbounded", None
    return "optimal", min(float(c @ v) for v in vertices)


# -- transport oracle ----------------------------------------------------------


def brute_transport(mu, nu, cost):
    """Optimal transport value by vertex enumeration of the coupling polytope."""
    import cset_transport.lp as lpmod

    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    cost = np.asarray(cost, dtype=float)
    n, m = cost.shape
    model = lpmod.LpModel()
    idx = {}
    for i in range(n):
        for j in range(m):
            if not math.isinf(cost[i, j]):
                idx[i, j] = model.add_variable(f"x{i}_{j}")
    for i in range(n):
        terms = [(idx[i, j], 1.0) for j in range(m) if (i, j) in idx]
        if not terms and mu[i] > 0:
            return INF
        model.add_constraint(f"r{i}", terms, "=", float(mu[i]))
    for j in range(m):
        terms = [(idx[i, j], 1.0) for i in range(n) if (i, j) in idx]
        if not terms and nu[j] > 0:
            return INF
        model.add_constraint(f"c{j}", terms, "=", float(nu[j]))
    best = None
    for v in enumerate_vertices(model):
        val = sum(cost[i, j] * v[k] for (i, j), k in idx.items())
        if best is None or val < best:
            best = val
    return INF if best is None else float(best)


# -- shortest paths by explicit path enumeration --------------------------------


def brute_shortest_paths(nv, src, tgt, weights=None):
    """d[i][j] = min total weight over directed paths of at most nv edges."""
    if weights is None:
        weights = [1.0] * len(src)
    d = np.full((nv, nv), INF)
    np.fill_diagonal(d, 0.0)
    # breadth-first over explicit paths, up to nv edges
    frontier = {(v,): 0.0 for v in range(nv)}
    for _ in range(nv):
        nxt = {}
        for path, cost in frontier.items():
            v = path[-1]
            for e in range(len(src)):
                if src[e] == v:
                    w = tgt[e]
                    c = cost + weights[e]
                    if c < d[path[0], w]:
                        d[path[0], w] = c
                    key = path + (w,)
                    if len(key) <= nv and (key not in nxt or nxt[key] > c):
                        nxt[key] = c
        frontier = nxt
    return d


# -- Hausdorff oracle ------------------------------------------------------------


def _all_maps(n_from, n_to):
    if n_from == 0:
        yield ()
        return
    yield from itertools.product(range(n_to), repeat=n_from)


def _lp_weight(x, y, comps, gen, p):
    """Naturality defect recomputed from scratch."""
    g = x.theory.generator(gen)
    d = y.metric(g.cod).d
    mu = x.measures.get(g.dom)
    xf = x.maps[gen]
    yf = y.maps[gen]
    cdom = comps[g.dom]
    ccod = comps[g.cod]
    vals = [float(d[ccod[xf[e]], yf[cdom[e]]]) for e in range(x.sets[g.dom])]
    if p == INF:
        picked = [v for e, v in enumerate(vals) if mu is None or mu.w[e] > 0]
        return max(picked, default=0.0)
    total = 0.0
    for e, v in enumerate(vals):
        w = mu.w[e]
        if w > 0:
            total += w * v**p if v != INF else INF
    return total ** (1.0 / p) if total != INF else INF


def brute_hausdorff(x, y, p, component_class="mm"):
    """Minimum aggregated weight over the full product of admissible maps."""
    from cset_transport.mm import is_measure_decreasing, is_short_map

    objects = list(x.theory.objects)
    cands = []
    for ob in objects:
        if ob in x.fixed:
            cands.append([tuple(range(x.sets[ob]))])
            continue
        ok = []
        for f in _all_maps(x.sets[ob], y.sets[ob]):
            arr = np.asarray(f, dtype=int)
            if component_class in ("met", "mm") and not is_short_map(
                arr, x.metric(ob), y.metric(ob)
            ):
                continue
            if component_class == "mm" and not is_measure_decreasing(
                arr, x.measure(ob), y.measure(ob)
            ):
                continue
            ok.append(f)
        cands.append(ok)
    best = INF
    for combo in itertools.product(*cands):
        comps = {ob: np.asarray(c, dtype=int) for ob, c in zip(objects, combo)}
        weights = [_lp_weight(x, y, comps, g.name, p) for g in x.theory.generators]
        if p == INF:
            agg = max(weights, default=0.0)
        else:
            tot = 0.0
            for w in weights:
                tot += w**p if w != INF else INF
            agg = tot ** (1.0 / p) if tot != INF else INF
        best = min(best, agg)
    return best


# -- random generators -----------------------------------------------------------


def random_graph(rng, max_v=4, max_e=5, min_v=1):
    from cset_transport.cset import Instance
    from cset_transport.theory import builtin_theory

    nv = int(rng.integers(min_v, max_v + 1))
    ne = int(rng.integers(0, max_e + 1))
    return Instance(
        builtin_theory("Graph"),
        {"E": ne, "V": nv},
        {"src": rng.integers(0, nv, ne), "tgt": rng.integers(0, nv, ne)},
    )


def random_metric(rng, n, max_d=4.0, symmetric=False):
    """Random finite Lawvere metric: min-plus closure of a nonnegative matrix."""
    from cset_transport.mm import MetricData

    d = rng.uniform(0.5, max_d, size=(n, n))
    if symmetric:
        d = (d + d.T) / 2
    np.fill_diagonal(d, 0.0)
    for k in range(n):
        d = np.minimum(d, d[:, [k]] + d[[k], :])
    return MetricData(n, d)


def random_measure(rng, n, max_w=2.0):
    from cset_transport.mm import MeasureData

    return MeasureData(n, rng.uniform(0.1, max_w, size=n))


def random_kernel(rng, rows, cols):
    from cset_transport.markov import FiniteKernel

    p = rng.uniform(0.05, 1.0, size=(rows, cols))
    p /= p.sum(axis=1, keepdims=True)
    return FiniteKernel(rows, cols, p)
