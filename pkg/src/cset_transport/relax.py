"""The two flagship linear programs: Markov-morphism feasibility (with the
measure-preserving variant) and the Wasserstein metric on metric measure
instances.

Infinite metric entries never reach the solver.  Cost cells of infinite
value force their coupling variables to zero (realized as upper bound 0, an
equality pin), and distance-decrease constraint rows with an infinite
right-hand side are dropped as vacuous.  Structural impossibilities (total
mass growth, a fully pinned stochastic row) are reported as an infinite
distance without solving.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cset import Instance, _check_fixed, _check_same_theory
from .errors import CsetTransportError, InstanceError, LpNumericalError
from .hausdorff import HausdorffConfig, hausdorff_distance
from .lp import LpModel, LpSolution, solve
from .markov import KERNEL_TOL, FiniteKernel, MarkovTransformation, identity_kernel
from .mm import INF, ext_root, is_measure_decreasing

__all__ = [
    "WassersteinProgram",
    "markov_feasibility_lp",
    "markov_feasible",
    "wasserstein_cset_lp",
    "wasserstein_cset_distance",
    "relaxation_gap",
    "WASSERSTEIN_CLASSES",
]

WASSERSTEIN_CLASSES = ("mm", "noshort")
EXTRACT_TOL = 1e-7


# -- Markov-morphism feasibility ----------------------------------------------


def _phi_blocks(model: LpModel, x: Instance, y: Instance, objects) -> dict:
    """Create the stochastic-matrix variables for each object in ``objects``."""
    layout = {}
    for ob in objects:
        nx_, ny_ = x.sets[ob], y.sets[ob]
        start = model.num_vars
        for i in range(nx_):
            for j in range(ny_):
                model.add_variable(f"phi_{ob}_{i}_{j}")
        layout[ob] = (start, nx_, ny_)
    return layout


def _phi_var(layout, ob, i, j):
    start, _, ny_ = layout[ob]
    return start + i * ny_ + j


def _feasibility_program(x: Instance, y: Instance, measure_preserving: bool):
    _check_same_theory(x, y)
    _check_fixed(x, y)
    t = x.theory
    model = LpModel()
    layout = _phi_blocks(model, x, y, t.objects)

    for ob in t.objects:
        _, nx_, ny_ = layout[ob]
        for i in range(nx_):
            terms = [(_phi_var(layout, ob, i, j), 1.0) for j in range(ny_)]
            model.add_constraint(f"row_{ob}_{i}", terms, "=", 1.0)
    for ob in sorted(x.fixed):
        for i in range(x.sets[ob]):
            model.add_constraint(
                f"pin_{ob}_{i}", [(_phi_var(layout, ob, i, i), 1.0)], "=", 1.0
            )
    for g in t.generators:
        xf = x.maps[g.name]
        yf = y.maps[g.name]
        preim = [np.flatnonzero(yf == k) for k in range(y.sets[g.cod])]
        for i in range(x.sets[g.dom]):
            for k in range(y.sets[g.cod]):
                # (Xf . Phi_cod)[i,k] = (Phi_dom . Yf)[i,k]
                terms = [(_phi_var(layout, g.cod, int(xf[i]), k), 1.0)]
                for j in preim[k]:
                    terms.append((_phi_var(layout, g.dom, i, int(j)), -1.0))
                model.add_constraint(f"nat_{g.name}_{i}_{k}", terms, "=", 0.0)
    if measure_preserving:
        for ob in t.objects:
            mux, muy = x.measure(ob), y.measure(ob)
            for k in range(y.sets[ob]):
                terms = [
                    (_phi_var(layout, ob, i, k), float(mux.w[i]))
                    for i in range(x.sets[ob])
                ]
                model.add_constraint(f"mp_{ob}_{k}", terms, "=", float(muy.w[k]))
    return model, layout


def markov_feasibility_lp(x: Instance, y: Instance, measure_preserving: bool = False) -> LpModel:
    """The feasibility program: row-stochastic Phi_c with every generator's
    naturality square commuting; objective identically zero."""
    model, _ = _feasibility_program(x, y, measure_preserving)
    return model


def _extract_phi(sol: LpSolution, layout, objects) -> dict[str, FiniteKernel]:
    comps = {}
    for ob in objects:
        start, nx_, ny_ = layout[ob]
        mat = sol.values[start : start + nx_ * ny_].reshape(nx_, ny_)
        mat = np.clip(mat, 0.0, None)
        if nx_:
            sums = mat.sum(axis=1)
            if np.any(np.abs(sums - 1.0) > EXTRACT_TOL):
                raise LpNumericalError(
                    f"solver returned a row of {ob!r} off-stochastic by "
                    f"{np.abs(sums - 1.0).max():.2e}"
                )
            mat = mat / sums[:, None]
        comps[ob] = FiniteKernel(nx_, ny_, mat)
    return comps


def markov_feasible(
    x: Instance, y: Instance, measure_preserving: bool = False
) -> MarkovTransformation | None:
    """Solve the feasibility LP; on success return verified row-stochastic
    components, else None."""
    model, layout = _feasibility_program(x, y, measure_preserving)
    sol = solve(model)
    if sol.status == "infeasible":
        return None
    if sol.status != "optimal":
        raise LpNumericalError(f"feasibility LP reported {sol.status}")
    comps = _extract_phi(sol, layout, x.theory.objects)
    for g in x.theory.generators:
        lhs = comps[g.cod].p[x.maps[g.name], :]
        rhs = comps[g.dom].p @ _function_matrix(y, g.name)
        if np.abs(lhs - rhs).max(initial=0.0) > 1e-6:
            raise LpNumericalError(
                f"extracted kernels violate naturality at {g.name!r}"
            )
    return MarkovTransformation(comps)


def _function_matrix(inst: Instance, gen: str) -> np.ndarray:
    g = inst.theory.generator(gen)
    f = inst.maps[gen]
    mat = np.zeros((inst.sets[g.dom], inst.sets[g.cod]))
    mat[np.arange(len(f)), f] = 1.0
    return mat


# -- Wasserstein program -------------------------------------------------------


@dataclass
class WassersteinProgram:
    """The assembled linear program with its variable layout and the record of
    which blocks were eliminated or pinned and why."""

    model: LpModel
    layout: dict
    cost_vectors: dict
    eliminated: dict
    pins: list[str]
    objective_constant: float
    p: float
    component_class: str
    structurally_infinite: str | None = None


def _delta(metric, p) -> np.ndarray:
    """Flattened d^p cost vector over the product of the space with itself."""
    d = metric.d
    return np.where(np.isinf(d), INF, d**p).reshape(-1)


def _require_data(x: Instance, y: Instance, cls: str) -> None:
    t = x.theory
    for ob in t.objects:
        x.metric(ob)
        y.metric(ob)
        if ob not in x.fixed:
            x.measure(ob)
            y.measure(ob)
    for g in t.generators:
        if g.dom in x.fixed and g.dom not in x.measures:
            raise InstanceError(
                f"a measure on fixed object {g.dom!r} is needed to weight "
                f"the objective of generator {g.name!r}"
            )


def _check_fixed_spaces(x: Instance, y: Instance) -> None:
    for ob in sorted(x.fixed):
        dx, dy = x.metric(ob), y.metric(ob)
        same = np.array_equal(
            np.nan_to_num(dx.d, posinf=-1.0), np.nan_to_num(dy.d, posinf=-1.0)
        )
        if not same:
            raise InstanceError(f"fixed object {ob!r} carries different metrics")


def wasserstein_cset_lp(
    x: Instance, y: Instance, p: float, component_class: str = "mm"
) -> WassersteinProgram:
    """Assemble the Wasserstein program for d_{W,p}(x, y)^p.

    Simplifications applied while building:

    * a self-product block for an object is dropped when the domain metric is
      discrete (every kernel out of a discrete space is distance-decreasing);
    * a generator into a fixed object contributes a closed-form linear
      objective in the domain kernel instead of a coupling block;
    * distance rows with infinite right-hand side are dropped, and variables
      multiplying an infinite cost are pinned to zero.

    With ``component_class="noshort"`` the measure-decreasing rows and the
    self-product blocks are omitted entirely; the value is then a general
    cost optimum, not a metric.
    """
    if not (1 <= p < INF):
        raise ValueError("p must satisfy 1 <= p < inf")
    if component_class not in WASSERSTEIN_CLASSES:
        raise ValueError(f"component_class must be one of {WASSERSTEIN_CLASSES}")
    _check_same_theory(x, y)
    _check_fixed(x, y)
    _require_data(x, y, component_class)
    _check_fixed_spaces(x, y)

    t = x.theory
    model = LpModel()
    movable = [ob for ob in t.objects if ob not in x.fixed]
    layout = {"phi": _phi_blocks(model, x, y, movable), "pi_obj": {}, "pi_gen": {}}
    eliminated = {"pi_obj": {}, "pi_gen": {}}
    pins: list[str] = []
    infinite: str | None = None
    constant = 0.0

    mm = component_class == "mm"
    if mm:
        for ob in movable:
            if x.measure(ob).total() > y.measure(ob).total() + KERNEL_TOL:
                infinite = (
                    f"total mass on {ob!r} shrinks from {x.measure(ob).total()} "
                    f"to {y.measure(ob).total()}: no measure-decreasing kernel"
                )
        for ob in sorted(x.fixed):
            if ob in x.measures and ob in y.measures:
                if not is_measure_decreasing(
                    identity_kernel(x.sets[ob]), x.measure(ob), y.measure(ob)
                ):
                    infinite = f"identity on fixed {ob!r} is not measure-decreasing"

    def pin(idx):
        model.var_upper[idx] = 0.0
        pins.append(model.var_names[idx])

    # stochasticity and measure rows for each movable object
    for ob in movable:
        start, nx_, ny_ = layout["phi"][ob]
        for i in range(nx_):
            model.add_constraint(
                f"phirow_{ob}_{i}",
                [(_phi_var(layout["phi"], ob, i, j), 1.0) for j in range(ny_)],
                "=",
                1.0,
            )
        if mm:
            mux, muy = x.measure(ob), y.measure(ob)
            for k in range(ny_):
                terms = [
                    (_phi_var(layout["phi"], ob, i, k), float(mux.w[i]))
                    for i in range(nx_)
                ]
                model.add_constraint(f"meas_{ob}_{k}", terms, "<=", float(muy.w[k]))

    # self-product blocks carrying the distance-decreasing constraints
    cost_vectors = {}
    for ob in t.objects:
        cost_vectors[ob] = {
            "delta_x": _delta(x.metric(ob), p),
            "delta_y": _delta(y.metric(ob), p),
        }
    if mm:
        for ob in movable:
            if x.metric(ob).is_discrete():
                eliminated["pi_obj"][ob] = "domain metric is discrete"
                continue
            nx_, ny_ = x.sets[ob], y.sets[ob]
            dX = cost_vectors[ob]["delta_x"]
            dY = cost_vectors[ob]["delta_y"]
            # a pair whose distance row is vacuous constrains nothing (any two
            # stochastic rows admit a coupling), so its sub-block is not
            # materialized: the diagonal, pairs at infinite domain distance,
            # and pairs dominating every finite codomain cost
            if ny_ and not np.any(np.isinf(dY)):
                dominated = float(np.max(dY))
            else:
                dominated = INF
            pairs = [
                (x1, x2)
                for x1 in range(nx_)
                for x2 in range(nx_)
                if x1 != x2
                and dX[x1 * nx_ + x2] != INF
                and dX[x1 * nx_ + x2] < dominated
            ]
            if not pairs:
                eliminated["pi_obj"][ob] = "all distance rows vacuous"
                continue
            start = model.num_vars
            for (x1, x2) in pairs:
                for yy in range(ny_ * ny_):
                    model.add_variable(f"piobj_{ob}_{x1}_{x2}_{yy}")
            layout["pi_obj"][ob] = (start, pairs, ny_)
            if len(pairs) < nx_ * nx_:
                eliminated.setdefault("pi_obj_pairs", {})[ob] = (
                    f"kept {len(pairs)} of {nx_ * nx_} self-product rows"
                )

            for k, (x1, x2) in enumerate(pairs):
                base = start + k * ny_ * ny_
                # row-stochasticity is implied by the first marginal block
                # together with the phi row sums
                for y1 in range(ny_):
                    terms = [(base + y1 * ny_ + y2, 1.0) for y2 in range(ny_)]
                    terms.append((_phi_var(layout["phi"], ob, x1, y1), -1.0))
                    model.add_constraint(f"pom1_{ob}_{x1}_{x2}_{y1}", terms, "=", 0.0)
                for y2 in range(ny_):
                    terms = [(base + y1 * ny_ + y2, 1.0) for y1 in range(ny_)]
                    terms.append((_phi_var(layout["phi"], ob, x2, y2), -1.0))
                    model.add_constraint(f"pom2_{ob}_{x1}_{x2}_{y2}", terms, "=", 0.0)
                terms = []
                for yy in range(ny_ * ny_):
                    if dY[yy] == INF:
                        pin(base + yy)
                    elif dY[yy] != 0.0:
                        terms.append((base + yy, float(dY[yy])))
                model.add_constraint(
                    f"pod_{ob}_{x1}_{x2}", terms, "<=", float(dX[x1 * nx_ + x2])
                )

    # generator blocks: coupling variables, or the closed form into fixed objects
    for g in t.generators:
        xf, yf = x.maps[g.name], y.maps[g.name]
        mux = x.measure(g.dom) if g.dom not in x.fixed or g.dom in x.measures else None
        dcod = y.metric(g.cod).d
        if g.cod in x.fixed:
            # deterministic target leg: linear (or constant) closed form
            if g.dom in x.fixed:
                for i in range(x.sets[g.dom]):
                    w = float(mux.w[i]) if mux is not None else 1.0
                    dv = dcod[int(xf[i]), int(yf[i])]
                    if w > 0 and dv == INF:
                        infinite = (
                            f"generator {g.name!r} between fixed objects has an "
                            f"infinite defect at element {i}"
                        )
                    elif w > 0:
                        constant += w * float(dv) ** p
                eliminated["pi_gen"][g.name] = "both endpoints fixed: constant defect"
                continue
            start, nx_, ny_ = layout["phi"][g.dom]
            for i in range(x.sets[g.dom]):
                w = float(mux.w[i])
                if w <= 0:
                    continue
                for j in range(y.sets[g.dom]):
                    dv = dcod[int(xf[i]), int(yf[j])]
                    idx = _phi_var(layout["phi"], g.dom, i, j)
                    if dv == INF:
                        pin(idx)
                    elif dv != 0.0:
                        model.add_objective(idx, w * float(dv) ** p)
            eliminated["pi_gen"][g.name] = "codomain fixed: closed-form objective"
            continue

        nxc = x.sets[g.dom]
        nyc = y.sets[g.cod]
        start = model.num_vars
        for i in range(nxc):
            for yy in range(nyc * nyc):
                model.add_variable(f"pigen_{g.name}_{i}_{yy}")
        layout["pi_gen"][g.name] = (start, nxc, nyc)
        dY = cost_vectors[g.cod]["delta_y"]

        def gvar(i, yy, start=start, nyc=nyc):
            return start + i * nyc * nyc + yy

        for i in range(nxc):
            # row-stochasticity is implied by the first marginal block
            # marginal along the first factor: (Xf . Phi_cod)(i)
            for y1 in range(nyc):
                terms = [(gvar(i, y1 * nyc + y2), 1.0) for y2 in range(nyc)]
                terms.append((_phi_var(layout["phi"], g.cod, int(xf[i]), y1), -1.0))
                model.add_constraint(f"pgm1_{g.name}_{i}_{y1}", terms, "=", 0.0)
            # marginal along the second factor: (Phi_dom . Yf)(i)
            for y2 in range(nyc):
                terms = [(gvar(i, y1 * nyc + y2), 1.0) for y1 in range(nyc)]
                if g.dom in x.fixed:
                    rhs = 1.0 if int(yf[i]) == y2 else 0.0
                    model.add_constraint(f"pgm2_{g.name}_{i}_{y2}", terms, "=", rhs)
                else:
                    for j in np.flatnonzero(yf == y2):
                        terms.append((_phi_var(layout["phi"], g.dom, i, int(j)), -1.0))
                    model.add_constraint(f"pgm2_{g.name}_{i}_{y2}", terms, "=", 0.0)
            w = float(mux.w[i]) if mux is not None else 1.0
            if w <= 0:
                continue
            for yy in range(nyc * nyc):
                if dY[yy] == INF:
                    pin(gvar(i, yy))
                elif dY[yy] != 0.0:
                    model.add_objective(gvar(i, yy), w * float(dY[yy]))

    # a stochastic row with every variable pinned is structurally infeasible
    if infinite is None:
        pinned = {name for name in pins}
        for ob in movable:
            _, nx_, ny_ = layout["phi"][ob]
            for i in range(nx_):
                names = [
                    model.var_names[_phi_var(layout["phi"], ob, i, j)]
                    for j in range(ny_)
                ]
                if names and all(nm in pinned for nm in names):
                    infinite = f"every image of {ob!r}[{i}] is forbidden by infinite costs"

    return WassersteinProgram(
        model,
        layout,
        cost_vectors,
        eliminated,
        pins,
        constant,
        p,
        component_class,
        infinite,
    )


def wasserstein_cset_distance(
    x: Instance, y: Instance, p: float, component_class: str = "mm"
) -> tuple[float, MarkovTransformation | None]:
    """Solve the Wasserstein program; the distance is the p-th root of its
    value.  Structural impossibility or LP infeasibility yields inf."""
    prog = wasserstein_cset_lp(x, y, p, component_class)
    if prog.structurally_infinite is not None:
        return INF, None
    sol = solve(prog.model)
    if sol.status == "infeasible":
        return INF, None
    if sol.status != "optimal":
        raise LpNumericalError(f"Wasserstein LP reported {sol.status}")
    value = max(sol.objective + prog.objective_constant, 0.0)
    comps = _extract_phi(sol, prog.layout["phi"], list(prog.layout["phi"]))
    for ob in sorted(x.fixed):
        comps[ob] = identity_kernel(x.sets[ob])
    if component_class == "mm":
        for ob in prog.layout["phi"]:
            if not is_measure_decreasing(
                comps[ob], x.measure(ob), y.measure(ob), tol=EXTRACT_TOL
            ):
                raise LpNumericalError(
                    f"extracted kernel at {ob!r} is not measure-decreasing"
                )
    return ext_root(value, p), MarkovTransformation(comps)


def relaxation_gap(
    x: Instance, y: Instance, p: float, cfg: HausdorffConfig | None = None
) -> tuple[float, float]:
    """(Wasserstein, Hausdorff) distances on the same data; the former can
    never exceed the latter."""
    cfg = cfg or HausdorffConfig()
    if cfg.component_class == "met":
        raise InstanceError("the Wasserstein side needs measures; use class mm or all")
    wcls = "mm" if cfg.component_class == "mm" else "noshort"
    hcfg = HausdorffConfig(p, cfg.component_class, "none", cfg.guard, cfg.force)
    dw, _ = wasserstein_cset_distance(x, y, p, wcls)
    dh = hausdorff_distance(x, y, hcfg).distance
    if not (dw <= dh + 1e-6):
        raise CsetTransportError(
            f"relaxation inequality violated: W = {dw} > H = {dh}; this is a bug"
        )
    return dw, dh
