"""Velocity fields, exact solutions and boundary data for the test problems.

All fields are vectorised callables ``f(x, y)`` on numpy arrays. Vector
fields return arrays with a trailing axis of length 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

INFLOW = "inflow"
OUTFLOW = "outflow"
SPEED_FLOOR = 1e-10

Scalar = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class VectorField:
    value: Callable[[np.ndarray, np.ndarray], np.ndarray]
    divergence: Scalar
    name: str = ""

    def __call__(self, x, y) -> np.ndarray:
        return self.value(np.asarray(x, dtype=float), np.asarray(y, dtype=float))


@dataclass(frozen=True)
class ProblemCase:
    """Advection-reaction problem ``beta . grad u + sigma u = f`` with data ``g``.

    ``exact_degree`` is the polynomial degree of the exact solution when it is
    a polynomial (``None`` otherwise); the Galerkin orthogonality check needs it.
    """

    name: str
    beta: VectorField
    sigma: Scalar
    f: Scalar
    g: Scalar
    u: Scalar | None = None
    grad_u: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    data_side: str = INFLOW
    exact_degree: int | None = None
    speed_floor: float = SPEED_FLOOR
    params: dict = field(default_factory=dict)

    def with_data_side(self, side: str) -> "ProblemCase":
        if side not in (INFLOW, OUTFLOW):
            raise ValueError(f"data_side must be {INFLOW!r} or {OUTFLOW!r}, got {side!r}")
        return ProblemCase(**{**self.__dict__, "data_side": side})

    @property
    def has_exact(self) -> bool:
        return self.u is not None


def _const(c: float) -> Scalar:
    return lambda x, y: np.full(np.broadcast(np.asarray(x), np.asarray(y)).shape, float(c))


def velocity(velocity_id: int, eps: float | None = None) -> VectorField:
    """The three velocity fields of the experiments, with analytic divergence."""
    if velocity_id == 1:
        return VectorField(
            lambda x, y: np.stack([-((x + 1.0) ** 4) + y, -8.0 * (y - x)], axis=-1),
            lambda x, y: -4.0 * (x + 1.0) ** 3 - 8.0,
            "beta1",
        )
    if velocity_id == 2:
        return VectorField(
            lambda x, y: -100.0 * np.stack([x + y, y - x], axis=-1),
            _const(-200.0),
            "beta2",
        )
    if velocity_id == 3:
        if eps is None or not eps > 0.0:
            raise ValueError(f"beta3 needs eps > 0, got {eps!r}")
        return VectorField(
            lambda x, y: np.stack(
                [
                    10.0 * np.arctan((y - 0.5) / eps) - x**2 / eps,
                    np.sin(x / eps) + np.sin(y / eps),
                ],
                axis=-1,
            ),
            lambda x, y: -2.0 * x / eps + np.cos(y / eps) / eps,
            f"beta3(eps={eps:g})",
        )
    raise ValueError(f"unknown velocity id {velocity_id!r}; expected 1, 2 or 3")


def constant_velocity(bx: float, by: float) -> VectorField:
    return VectorField(
        lambda x, y: np.stack(
            np.broadcast_arrays(np.full(np.shape(x), float(bx)), np.full(np.shape(y), float(by))),
            axis=-1,
        ),
        _const(0.0),
        f"const({bx:g},{by:g})",
    )


def clamped_speed(beta_values: np.ndarray, floor: float = SPEED_FLOOR) -> np.ndarray:
    """``max(|beta|, floor)`` along the trailing axis."""
    return np.maximum(np.linalg.norm(np.asarray(beta_values, dtype=float), axis=-1), floor)


def _bubble(x, y):
    return 30.0 * x * (1.0 - x) * y * (1.0 - y)


def _bubble_grad(x, y):
    return 30.0 * np.stack(
        [(1.0 - 2.0 * x) * y * (1.0 - y), x * (1.0 - x) * (1.0 - 2.0 * y)], axis=-1
    )


def manufactured(
    name: str,
    beta: VectorField,
    sigma: Scalar,
    u: Scalar,
    grad_u,
    *,
    data_side: str = INFLOW,
    exact_degree: int | None = None,
    params: dict | None = None,
) -> ProblemCase:
    """Case whose source is ``f = beta . grad u + sigma u`` and whose boundary data is ``u``."""

    def f(x, y):
        return np.einsum("...i,...i->...", beta(x, y), grad_u(x, y)) + sigma(x, y) * u(x, y)

    return ProblemCase(
        name=name,
        beta=beta,
        sigma=sigma,
        f=f,
        g=u,
        u=u,
        grad_u=grad_u,
        data_side=data_side,
        exact_degree=exact_degree,
        params=params or {},
    )


def smooth_case(velocity_id: int = 1, eps: float | None = None, data_side: str = INFLOW) -> ProblemCase:
    """Conservation-form transport with exact solution ``30 x(1-x) y(1-y)``.

    ``sigma = div beta``; ``g = 0`` because the solution vanishes on the boundary.
    """
    beta = velocity(velocity_id, eps)
    case = manufactured(
        "smooth",
        beta,
        beta.divergence,
        _bubble,
        _bubble_grad,
        data_side=data_side,
        params={"velocity": velocity_id, "eps": eps},
    )
    return ProblemCase(**{**case.__dict__, "g": _const(0.0)})


def discontinuous_case() -> ProblemCase:
    """beta2 with ``f = 0`` and inflow data equal to one where ``x > 0.8`` and ``y < 0.5``."""
    beta = velocity(2)

    def g(x, y):
        return np.where((np.asarray(x) > 0.8) & (np.asarray(y) < 0.5), 1.0, 0.0)

    return ProblemCase(
        name="discontinuous",
        beta=beta,
        sigma=beta.divergence,
        f=_const(0.0),
        g=g,
        data_side=INFLOW,
        params={"velocity": 2},
    )


def zero_case(velocity_id: int = 1, eps: float | None = None, data_side: str = INFLOW) -> ProblemCase:
    """Homogeneous data; the exact solution is zero."""
    beta = velocity(velocity_id, eps)
    zero = _const(0.0)
    return ProblemCase(
        name="zero",
        beta=beta,
        sigma=beta.divergence,
        f=zero,
        g=zero,
        u=zero,
        grad_u=lambda x, y: np.zeros(np.shape(x) + (2,)),
        data_side=data_side,
        exact_degree=0,
        params={"velocity": velocity_id, "eps": eps},
    )


def polynomial_case(
    degree: int,
    beta: tuple[float, float] = (1.0, 2.0),
    sigma: float = 1.0,
    data_side: str = INFLOW,
) -> ProblemCase:
    """Constant coefficients and a polynomial exact solution of the given degree.

    degree 1: ``u = x + y``; degree 2: ``u = x^2 + xy - 2y^2 + x + y``.
    """
    if degree == 1:
        u = lambda x, y: x + y  # noqa: E731
        grad = lambda x, y: np.stack(np.broadcast_arrays(np.ones_like(x), np.ones_like(y)), axis=-1)  # noqa: E731
    elif degree == 2:
        u = lambda x, y: x**2 + x * y - 2.0 * y**2 + x + y  # noqa: E731
        grad = lambda x, y: np.stack([2.0 * x + y + 1.0, x - 4.0 * y + 1.0], axis=-1)  # noqa: E731
    else:
        raise ValueError(f"polynomial case of degree {degree} not available")
    return manufactured(
        f"poly{degree}",
        constant_velocity(*beta),
        _const(sigma),
        u,
        grad,
        data_side=data_side,
        exact_degree=degree,
        params={"beta": tuple(beta), "sigma": sigma},
    )


CATALOG = {
    "smooth": "u = 30x(1-x)y(1-y), conservation form, velocity in {1, 2, 3}; eps for velocity 3",
    "discontinuous": "velocity 2, f = 0, g = 1 where x > 0.8 and y < 0.5",
    "zero": "f = 0, g = 0, exact solution 0 (velocity in {1, 2, 3})",
    "poly1": "beta = (1, 2), sigma = 1, u = x + y",
    "poly2": "beta = (1, 2), sigma = 1, u = x^2 + xy - 2y^2 + x + y",
}

VELOCITIES = {
    1: "beta1 = (-(x+1)^4 + y, -8(y - x)), div = -4(x+1)^3 - 8",
    2: "beta2 = -100 (x + y, y - x), div = -200",
    3: "beta3(eps) = (10 arctan((y - 1/2)/eps) - x^2/eps, sin(x/eps) + sin(y/eps))",
}


def make_case(name: str, velocity_id: int = 1, eps: float | None = None, data_side: str = INFLOW) -> ProblemCase:
    if name == "smooth":
        return smooth_case(velocity_id, eps, data_side)
    if name == "discontinuous":
        return discontinuous_case().with_data_side(data_side)
    if name == "zero":
        return zero_case(velocity_id, eps, data_side)
    if name == "poly1":
        return polynomial_case(1, data_side=data_side)
    if name == "poly2":
        return polynomial_case(2, data_side=data_side)
    raise ValueError(f"unknown case {name!r}; available: {', '.join(CATALOG)}")
