"""Finite-dimensional chart maps with analytic derivatives through order 3.

A chart is a smooth map Phi : U subset R^n -> R^n given by vectorized
evaluators for the value and its first three derivative tensors.  Index
conventions, with g the grid-sample axis:

    jacobian[g, i, j]    = d Phi_i / d x_j
    hessian[g, i, j, k]  = d^2 Phi_i / (d x_j d x_k)
    third[g, i, j, k, l] = d^3 Phi_i / (d x_j d x_k d x_l)

Nonlinear built-ins are generated symbolically, so the supplied tensors
are exact; finite differences appear only in tests, as oracles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import sympy as sp

# Default domain slack, in chart coordinates, demanded of every sample.
DEFAULT_MARGIN = 0.05


@dataclass
class DiffeoChart:
    n: int
    name: str
    value: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    hessian: Callable[[np.ndarray], np.ndarray]
    third: Callable[[np.ndarray], np.ndarray] | None = None
    # Signed distance proxy to the domain boundary; samples must clear the
    # margin.  None means the chart is defined on all of R^n.
    boundary_clearance: Callable[[np.ndarray], np.ndarray] | None = None
    inverse: "DiffeoChart | None" = field(default=None, repr=False)

    def contains(self, points: np.ndarray, margin: float = DEFAULT_MARGIN) -> bool:
        if self.boundary_clearance is None:
            return True
        return bool(np.all(self.boundary_clearance(points) >= margin))


def pair_inverses(a: DiffeoChart, b: DiffeoChart) -> DiffeoChart:
    a.inverse = b
    b.inverse = a
    return a


def _entry_evaluator(fns: list, n_in: int, shape: tuple[int, ...]):
    """Bundle lambdified scalar entries into one (G,n)->(G,)+shape evaluator."""

    def run(points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        cols = [points[:, j] for j in range(n_in)]
        G = points.shape[0]
        out = np.empty((len(fns), G), dtype=float)
        for m, fn in enumerate(fns):
            out[m] = np.broadcast_to(np.asarray(fn(*cols), dtype=float), (G,))
        return np.moveaxis(out.reshape(shape + (G,)), -1, 0)

    return run


def chart_from_sympy(
    exprs,
    symbols,
    name: str,
    boundary_clearance=None,
    with_third: bool = True,
) -> DiffeoChart:
    """Build a chart from sympy expressions, differentiating symbolically."""
    n = len(symbols)
    exprs = [sp.sympify(e) for e in exprs]
    if len(exprs) != n:
        raise ValueError("chart must map R^n to R^n")

    def lam(e):
        return sp.lambdify(symbols, e, modules="numpy")

    val = _entry_evaluator([lam(e) for e in exprs], n, (n,))
    d1 = [sp.diff(exprs[i], symbols[j]) for i in range(n) for j in range(n)]
    jac = _entry_evaluator([lam(e) for e in d1], n, (n, n))
    d2 = [
        sp.diff(exprs[i], symbols[j], symbols[k])
        for i in range(n)
        for j in range(n)
        for k in range(n)
    ]
    hes = _entry_evaluator([lam(e) for e in d2], n, (n, n, n))
    third = None
    if with_third:
        d3 = [
            sp.diff(exprs[i], symbols[j], symbols[k], symbols[l])
            for i in range(n)
            for j in range(n)
            for k in range(n)
            for l in range(n)
        ]
        third = _entry_evaluator([lam(e) for e in d3], n, (n, n, n, n))
    return DiffeoChart(
        n=n,
        name=name,
        value=val,
        jacobian=jac,
        hessian=hes,
        third=third,
        boundary_clearance=boundary_clearance,
    )


# ---------------------------------------------------------------------------
# built-in charts


def identity_chart(n: int = 2) -> DiffeoChart:
    chart = DiffeoChart(
        n=n,
        name="identity",
        value=lambda x: np.array(x, dtype=float, copy=True),
        jacobian=lambda x: np.broadcast_to(np.eye(n), (x.shape[0], n, n)).copy(),
        hessian=lambda x: np.zeros((x.shape[0], n, n, n)),
        third=lambda x: np.zeros((x.shape[0], n, n, n, n)),
    )
    chart.inverse = chart
    return chart


def linear_chart(A: np.ndarray, name: str = "linear") -> DiffeoChart:
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or abs(np.linalg.det(A)) < 1e-12:
        raise ValueError("linear chart needs an invertible square matrix")

    def make(M: np.ndarray, nm: str) -> DiffeoChart:
        return DiffeoChart(
            n=n,
            name=nm,
            value=lambda x: x @ M.T,
            jacobian=lambda x: np.broadcast_to(M, (x.shape[0], n, n)).copy(),
            hessian=lambda x: np.zeros((x.shape[0], n, n, n)),
            third=lambda x: np.zeros((x.shape[0], n, n, n, n)),
        )

    return pair_inverses(make(A, name), make(np.linalg.inv(A), name + "_inv"))


def shear_chart() -> DiffeoChart:
    """Planar shear (x, y) -> (x, y + x^2); polynomial, globally invertible."""

    def make(sign: float, nm: str) -> DiffeoChart:
        def value(p):
            out = np.array(p, dtype=float, copy=True)
            out[:, 1] += sign * p[:, 0] ** 2
            return out

        def jac(p):
            G = p.shape[0]
            out = np.broadcast_to(np.eye(2), (G, 2, 2)).copy()
            out[:, 1, 0] = 2.0 * sign * p[:, 0]
            return out

        def hes(p):
            out = np.zeros((p.shape[0], 2, 2, 2))
            out[:, 1, 0, 0] = 2.0 * sign
            return out

        return DiffeoChart(
            n=2,
            name=nm,
            value=value,
            jacobian=jac,
            hessian=hes,
            third=lambda p: np.zeros((p.shape[0], 2, 2, 2, 2)),
        )

    return pair_inverses(make(1.0, "shear"), make(-1.0, "shear_inv"))


def rotation_field_chart(strength: float = 1.0) -> DiffeoChart:
    """Rotation by the position-dependent angle strength * |x|^2.

    Radius preserving with unit Jacobian determinant everywhere, so it is
    a global diffeomorphism whose inverse rotates by the opposite angle.
    """
    x, y = sp.symbols("x y", real=True)

    def exprs(lam):
        theta = lam * (x**2 + y**2)
        return [sp.cos(theta) * x - sp.sin(theta) * y, sp.sin(theta) * x + sp.cos(theta) * y]

    fwd = chart_from_sympy(exprs(strength), (x, y), f"rotation_field[{strength}]")
    bwd = chart_from_sympy(exprs(-strength), (x, y), f"rotation_field[{-strength}]")
    return pair_inverses(fwd, bwd)


def inversion_chart(min_radius: float = 0.0) -> DiffeoChart:
    """The planar inversion x -> x / |x|^2 on R^2 minus the origin.

    This is the transition between the two stereographic charts of the
    round sphere; it is an involution.
    """
    x, y = sp.symbols("x y", real=True)
    r2 = x**2 + y**2

    def clearance(p):
        return np.sqrt(p[:, 0] ** 2 + p[:, 1] ** 2) - min_radius

    chart = chart_from_sympy(
        [x / r2, y / r2], (x, y), "inversion", boundary_clearance=clearance
    )
    chart.inverse = chart
    return chart


def c1_only_chart() -> DiffeoChart:
    """Planar map (x, y) -> (x, y + x|x|/2) whose second derivative is a jump.

    The map is C^1 with Lipschitz first derivative, but the supplied
    second derivative sign(x) is discontinuous, so the second-order
    extension checks must flag divergence.  No third derivative exists.
    """

    def value(p):
        out = np.array(p, dtype=float, copy=True)
        out[:, 1] += 0.5 * p[:, 0] * np.abs(p[:, 0])
        return out

    def jac(p):
        G = p.shape[0]
        out = np.broadcast_to(np.eye(2), (G, 2, 2)).copy()
        out[:, 1, 0] = np.abs(p[:, 0])
        return out

    def hes(p):
        out = np.zeros((p.shape[0], 2, 2, 2))
        out[:, 1, 0, 0] = np.sign(p[:, 0])
        return out

    return DiffeoChart(n=2, name="c1_only", value=value, jacobian=jac, hessian=hes, third=None)


def compose_charts(outer: DiffeoChart, inner: DiffeoChart, _wire_inverse: bool = True) -> DiffeoChart:
    """Chart of the composite outer(inner(.)), chain-ruled through order 3."""
    if outer.n != inner.n:
        raise ValueError("chart dimensions do not match")
    n = outer.n

    def value(p):
        return outer.value(inner.value(p))

    def jac(p):
        y = inner.value(p)
        return np.einsum("gik,gkj->gij", outer.jacobian(y), inner.jacobian(p))

    def hes(p):
        y = inner.value(p)
        Do, Ho = outer.jacobian(y), outer.hessian(y)
        Di, Hi = inner.jacobian(p), inner.hessian(p)
        quad = np.einsum("giab,gaj,gbk->gijk", Ho, Di, Di)
        lin = np.einsum("gia,gajk->gijk", Do, Hi)
        return quad + lin

    third = None
    if outer.third is not None and inner.third is not None:
        def third(p):
            y = inner.value(p)
            Do, Ho, To = outer.jacobian(y), outer.hessian(y), outer.third(y)
            Di, Hi, Ti = inner.jacobian(p), inner.hessian(p), inner.third(p)
            out = np.einsum("giabc,gaj,gbk,gcl->gijkl", To, Di, Di, Di)
            out += np.einsum("giab,gajl,gbk->gijkl", Ho, Hi, Di)
            out += np.einsum("giab,gaj,gbkl->gijkl", Ho, Di, Hi)
            out += np.einsum("giab,gajk,gbl->gijkl", Ho, Hi, Di)
            out += np.einsum("gia,gajkl->gijkl", Do, Ti)
            return out

    clearance = None
    if inner.boundary_clearance is not None or outer.boundary_clearance is not None:
        def clearance(p):
            vals = np.full(p.shape[0], np.inf)
            if inner.boundary_clearance is not None:
                vals = np.minimum(vals, inner.boundary_clearance(p))
            if outer.boundary_clearance is not None:
                vals = np.minimum(vals, outer.boundary_clearance(inner.value(p)))
            return vals

    chart = DiffeoChart(
        n=n,
        name=f"({outer.name} o {inner.name})",
        value=value,
        jacobian=jac,
        hessian=hes,
        third=third,
        boundary_clearance=clearance,
    )
    if _wire_inverse and outer.inverse is not None and inner.inverse is not None:
        inv = compose_charts(inner.inverse, outer.inverse, _wire_inverse=False)
        chart.inverse = inv
        inv.inverse = chart
    return chart
