"""Finite instances of a theory: validation, path evaluation, homomorphism
search, and enumeration of (not necessarily natural) transformations.

Elements of each carrier set are the integers 0..n-1, so the action of a
generator is a plain integer array and composites are array lookups.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, GuardExceeded, InstanceError, TheoryError
from .mm import (
    INF,
    MeasureData,
    MetricData,
    counting_measure,
    discrete_metric,
    shortest_path_metric,
    uniform_measure,
)
from .theory import Path, TheoryPresentation, builtin_theory, parse_theory, render_theory

__all__ = [
    "Instance",
    "Transformation",
    "validate_instance",
    "evaluate_path",
    "find_homomorphism",
    "is_natural",
    "enumerate_transformations",
    "count_transformations",
    "instance_from_json",
    "instance_to_json",
    "load_instance",
    "ENUMERATION_GUARD",
]

ENUMERATION_GUARD = 10**7
SEARCH_NODE_GUARD = 10**7


@dataclass(frozen=True, eq=False)
class Instance:
    """A finite C-set, optionally with per-object metric and measure data."""

    theory: TheoryPresentation
    sets: dict[str, int]
    maps: dict[str, np.ndarray]
    metrics: dict[str, MetricData] = field(default_factory=dict)
    measures: dict[str, MeasureData] = field(default_factory=dict)
    fixed: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(
            self,
            "maps",
            {k: np.asarray(v, dtype=int) for k, v in self.maps.items()},
        )
        object.__setattr__(self, "fixed", frozenset(self.fixed))

    def card(self, obj: str) -> int:
        return self.sets[obj]

    def metric(self, obj: str) -> MetricData:
        if obj not in self.metrics:
            raise InstanceError(f"no metric on object {obj!r}")
        return self.metrics[obj]

    def measure(self, obj: str) -> MeasureData:
        if obj not in self.measures:
            raise InstanceError(f"no measure on object {obj!r}")
        return self.measures[obj]

    def with_data(self, metrics=None, measures=None, fixed=None) -> "Instance":
        return Instance(
            self.theory,
            dict(self.sets),
            dict(self.maps),
            dict(self.metrics if metrics is None else metrics),
            dict(self.measures if measures is None else measures),
            frozenset(self.fixed if fixed is None else fixed),
        )


@dataclass(frozen=True, eq=False)
class Transformation:
    """Per-object functions X(c) -> Y(c); not necessarily natural."""

    components: dict[str, np.ndarray]

    def __post_init__(self):
        object.__setattr__(
            self,
            "components",
            {k: np.asarray(v, dtype=int) for k, v in self.components.items()},
        )

    def component(self, obj: str) -> np.ndarray:
        return self.components[obj]


def validate_instance(x: Instance) -> None:
    """Check carriers, maps and every theory equation; raise InstanceError."""
    problems = []
    for ob in x.theory.objects:
        n = x.sets.get(ob)
        if n is None or n < 0:
            problems.append(f"missing or negative cardinality for object {ob!r}")
    for g in x.theory.generators:
        arr = x.maps.get(g.name)
        if arr is None:
            problems.append(f"missing map for generator {g.name!r}")
            continue
        ndom = x.sets.get(g.dom, 0)
        ncod = x.sets.get(g.cod, 0)
        if arr.shape != (ndom,):
            problems.append(
                f"map {g.name!r} must have length {ndom}, got {arr.shape}"
            )
            continue
        if arr.size and (arr.min() < 0 or arr.max() >= ncod):
            problems.append(f"map {g.name!r} has an entry outside 0..{ncod - 1}")
    if not problems:
        for lhs, rhs in x.theory.equations:
            left = evaluate_path(x, lhs)
            right = evaluate_path(x, rhs)
            if not np.array_equal(left, right):
                bad = int(np.flatnonzero(left != right)[0])
                problems.append(
                    f"equation {lhs} = {rhs} violated at {lhs.dom}[{bad}]"
                )
    for ob, metric in x.metrics.items():
        if metric.n != x.sets.get(ob):
            problems.append(f"metric on {ob!r} has wrong size {metric.n}")
    for ob, measure in x.measures.items():
        if measure.n != x.sets.get(ob):
            problems.append(f"measure on {ob!r} has wrong size {measure.n}")
    for ob in x.fixed:
        if ob not in x.theory.objects:
            problems.append(f"fixed object {ob!r} is not in the theory")
    if problems:
        raise InstanceError("; ".join(problems))


def evaluate_path(x: Instance, p: Path) -> np.ndarray:
    """Array of the composite action along ``p``; identity for the empty path."""
    if p.dom not in x.sets:
        raise InstanceError(f"path domain {p.dom!r} is not an object of the instance")
    out = np.arange(x.sets[p.dom])
    at = p.dom
    for step in p.steps:
        g = x.theory.generator(step)
        if g.dom != at:
            raise TheoryError(f"path {p} is not composable at step {step!r}")
        out = x.maps[step][out]
        at = g.cod
    return out


def _check_same_theory(x: Instance, y: Instance) -> None:
    if x.theory != y.theory:
        raise TheoryError(
            f"instances are over different theories "
            f"({x.theory.name} vs {y.theory.name})"
        )


def _check_fixed(x: Instance, y: Instance) -> None:
    if x.fixed != y.fixed:
        raise InstanceError("instances designate different fixed objects")
    for ob in x.fixed:
        if x.sets[ob] != y.sets[ob]:
            raise InstanceError(
                f"fixed object {ob!r} has different cardinalities "
                f"({x.sets[ob]} vs {y.sets[ob]})"
            )


def is_natural(x: Instance, y: Instance, t: Transformation) -> bool:
    """True when every generator's naturality square commutes."""
    _check_same_theory(x, y)
    for ob in x.theory.objects:
        comp = t.components.get(ob)
        if comp is None or comp.shape != (x.sets[ob],):
            raise DimensionError(f"component at {ob!r} is missing or mis-sized")
        if comp.size and (comp.min() < 0 or comp.max() >= y.sets[ob]):
            raise DimensionError(f"component at {ob!r} lands outside Y({ob})")
    for g in x.theory.generators:
        lhs = t.components[g.cod][x.maps[g.name]]
        rhs = y.maps[g.name][t.components[g.dom]]
        if not np.array_equal(lhs, rhs):
            return False
    return True


def find_homomorphism(
    x: Instance, y: Instance, node_guard: int = SEARCH_NODE_GUARD
) -> Transformation | None:
    """Exhaustive backtracking search for a natural transformation.

    Objects are filled in declaration order and candidate images ascend, so
    the first solution found is deterministic.  Components at fixed objects
    are pinned to the identity.
    """
    _check_same_theory(x, y)
    _check_fixed(x, y)
    t = x.theory

    slots = []  # (object, element) in declaration order
    for ob in t.objects:
        for i in range(x.sets[ob]):
            slots.append((ob, i))
    assign = {ob: np.full(x.sets[ob], -1) for ob in t.objects}
    for ob in x.fixed:
        assign[ob] = np.arange(x.sets[ob])

    # preimage lists: for g: b -> c and i in X(c), which e in X(b) hit i
    preimages = {}
    for g in t.generators:
        idx = [[] for _ in range(x.sets[g.cod])]
        for e, v in enumerate(x.maps[g.name]):
            idx[v].append(e)
        preimages[g.name] = idx

    def consistent(ob, i, v):
        for g in t.generators:
            if g.dom == ob:
                j = x.maps[g.name][i]
                w = assign[g.cod][j]
                if w >= 0 and w != y.maps[g.name][v]:
                    return False
            if g.cod == ob:
                for e in preimages[g.name][i]:
                    u = assign[g.dom][e]
                    if u >= 0 and y.maps[g.name][u] != v:
                        return False
        return True

    order = [s for s in slots if s[0] not in x.fixed]
    # fixed components are pre-assigned; make sure they are consistent already
    for ob in x.fixed:
        for i in range(x.sets[ob]):
            if not consistent(ob, i, assign[ob][i]):
                return None

    nodes = 0
    k = 0
    trail = [0] * len(order)
    while True:
        if k == len(order):
            comps = {ob: assign[ob].copy() for ob in t.objects}
            return Transformation(comps)
        ob, i = order[k]
        found = False
        for v in range(trail[k], y.sets[ob]):
            nodes += 1
            if nodes > node_guard:
                raise GuardExceeded(
                    f"homomorphism search exceeded {node_guard} nodes", nodes
                )
            if consistent(ob, i, v):
                assign[ob][i] = v
                trail[k] = v + 1
                found = True
                break
        if found:
            k += 1
            if k < len(order):
                trail[k] = 0
        else:
            trail[k] = 0
            assign[ob][i] = -1
            k -= 1
            if k < 0:
                return None
            pob, pi = order[k]
            assign[pob][pi] = -1


def _all_maps(n_from: int, n_to: int):
    """All functions {0..n_from-1} -> {0..n_to-1} in lexicographic order."""
    if n_from == 0:
        yield np.zeros(0, dtype=int)
        return
    for tup in itertools.product(range(n_to), repeat=n_from):
        yield np.asarray(tup, dtype=int)


def candidate_components(
    x: Instance,
    y: Instance,
    component_filter=None,
    guard: int = ENUMERATION_GUARD,
    force: bool = False,
) -> dict[str, list[np.ndarray]]:
    """Per-object lists of admissible component maps, in lexicographic order.

    ``component_filter(obj, mapping) -> bool`` restricts the per-object maps;
    fixed objects always contribute exactly the identity.  Raises
    GuardExceeded when the product of candidate counts would exceed ``guard``
    (pass force=True to proceed anyway).
    """
    _check_same_theory(x, y)
    _check_fixed(x, y)
    out = {}
    for ob in x.theory.objects:
        nx_, ny_ = x.sets[ob], y.sets[ob]
        if ob in x.fixed:
            ident = np.arange(nx_)
            if component_filter is not None and not component_filter(ob, ident):
                out[ob] = []
            else:
                out[ob] = [ident]
            continue
        if nx_ > 0 and ny_ == 0:
            out[ob] = []
            continue
        raw = ny_**nx_
        if raw > guard and not force:
            raise GuardExceeded(
                f"object {ob!r} alone has {raw} candidate maps "
                f"(guard {guard}); pass --force to enumerate anyway",
                raw,
            )
        if component_filter is None:
            out[ob] = list(_all_maps(nx_, ny_))
        else:
            out[ob] = [m for m in _all_maps(nx_, ny_) if component_filter(ob, m)]
    sizes = [len(v) for v in out.values()]
    total = math.prod(sizes)
    if total > guard and not force:
        raise GuardExceeded(
            f"{total} candidate transformations exceed the guard {guard}; "
            "pass --force to enumerate anyway",
            total,
        )
    return out


def enumerate_transformations(
    x: Instance,
    y: Instance,
    component_filter=None,
    guard: int = ENUMERATION_GUARD,
    force: bool = False,
):
    """Yield every transformation whose components pass the per-object filter,
    in lexicographic order of component tuples (objects in declaration order)."""
    cands = candidate_components(x, y, component_filter, guard, force)
    objects = list(x.theory.objects)
    for combo in itertools.product(*(cands[ob] for ob in objects)):
        yield Transformation(dict(zip(objects, combo)))


def count_transformations(x, y, component_filter=None, guard=ENUMERATION_GUARD, force=False):
    cands = candidate_components(x, y, component_filter, guard, force)
    return math.prod(len(v) for v in cands.values())


# -- JSON input/output --------------------------------------------------------


def _metric_from_json(obj, entry, inst_sets, inst_maps, theory):
    kind = entry.get("kind")
    n = inst_sets[obj]
    if kind == "discrete":
        return discrete_metric(n)
    if kind == "shortest_path":
        stub = Instance(theory, dict(inst_sets), dict(inst_maps))
        if obj != "V":
            raise InstanceError("shortest_path metric is defined on the object V")
        return shortest_path_metric(stub, entry.get("weights"))
    if kind == "explicit":
        rows = [
            [INF if v == "inf" else float(v) for v in row] for row in entry["matrix"]
        ]
        return MetricData(n, np.asarray(rows))
    raise InstanceError(f"unknown metric kind {kind!r} on object {obj!r}")


def _measure_from_json(obj, entry, inst_sets):
    kind = entry.get("kind")
    n = inst_sets[obj]
    if kind == "counting":
        return counting_measure(n)
    if kind == "uniform":
        return uniform_measure(n)
    if kind == "explicit":
        return MeasureData(n, np.asarray([float(v) for v in entry["weights"]]))
    raise InstanceError(f"unknown measure kind {kind!r} on object {obj!r}")


def instance_from_json(data: dict, theory: TheoryPresentation | None = None) -> Instance:
    """Build and validate an Instance from its JSON dict form."""
    if theory is None:
        entry = data.get("theory")
        if isinstance(entry, str):
            theory = builtin_theory(entry)
        elif isinstance(entry, dict) and "dsl" in entry:
            theory = parse_theory(entry["dsl"])
        else:
            raise InstanceError("instance JSON needs a 'theory' (builtin name or {'dsl': ...})")
    sets = {k: int(v) for k, v in data.get("sets", {}).items()}
    maps = {k: np.asarray(v, dtype=int) for k, v in data.get("maps", {}).items()}
    metrics = {
        ob: _metric_from_json(ob, entry, sets, maps, theory)
        for ob, entry in (data.get("metrics") or {}).items()
    }
    measures = {
        ob: _measure_from_json(ob, entry, sets)
        for ob, entry in (data.get("measures") or {}).items()
    }
    fixed = frozenset(data.get("fixed") or [])
    inst = Instance(theory, sets, maps, metrics, measures, fixed)
    validate_instance(inst)
    return inst


def _metric_to_json(metric: MetricData):
    rows = [["inf" if math.isinf(v) else v for v in row] for row in metric.d.tolist()]
    return {"kind": "explicit", "matrix": rows}


def instance_to_json(x: Instance) -> dict:
    """Serialize an instance; metrics and measures are written explicitly."""
    from .theory import BUILTIN_THEORY_NAMES

    tname = None
    for name in BUILTIN_THEORY_NAMES:
        if builtin_theory(name) == x.theory:
            tname = name
            break
    data = {
        "theory": tname if tname is not None else {"dsl": render_theory(x.theory)},
        "sets": dict(x.sets),
        "maps": {k: v.tolist() for k, v in x.maps.items()},
    }
    if x.metrics:
        data["metrics"] = {ob: _metric_to_json(m) for ob, m in x.metrics.items()}
    if x.measures:
        data["measures"] = {
            ob: {"kind": "explicit", "weights": m.w.tolist()}
            for ob, m in x.measures.items()
        }
    if x.fixed:
        data["fixed"] = sorted(x.fixed)
    return data


def load_instance(path: str) -> Instance:
    """Load an instance from a JSON file or a builtin: URI."""
    if path.startswith("builtin:"):
        from .gallery import builtin_instance

        return builtin_instance(path[len("builtin:"):])
    with open(path, "r", encoding="utf-8") as fh:
        return instance_from_json(json.load(fh))
