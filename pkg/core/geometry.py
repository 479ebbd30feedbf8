#!/usr/bin/env python3
"""
Boundary geometry for bounded multiply connected domains.

Each boundary component is a 2*pi-periodic parametrization sampled at n
equispaced parameter values. Polygons use a polynomial grading substitution
so that nodes cluster at the corners. Slit domains are handled through the
open-up map psi2 (exterior of [0, 1] -> exterior of the unit disk).
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.errors import (
    BoundaryIndeterminateError,
    ContainmentError,
    GeometryError,
    OrientationError,
)

logger = logging.getLogger(__name__)

TWO_PI: float = 2.0 * np.pi

CCW: str = "ccw"
CW: str = "cw"

# Smallest gap between consecutive polygon nodes, relative to the longest side.
MIN_NODE_GAP: float = 1e-11

# Curve functions return (value, first derivative, second derivative).
CoordinateFn = Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray, np.ndarray]]


class PointClass(Enum):
    INTERIOR = "interior"
    EXTERIOR = "exterior"
    BOUNDARY = "boundary-guard"


def _frozen(values: np.ndarray, dtype: type) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.flags.writeable = False
    return arr


def _check_n(n: int) -> None:
    if int(n) != n or n < 8 or n % 2 != 0:
        raise GeometryError(f"node count must be an even integer >= 8, got {n}", {"n": n})


def _check_orientation(orientation: str) -> None:
    if orientation not in (CCW, CW):
        raise OrientationError(f"orientation must be '{CCW}' or '{CW}', got {orientation!r}")


def equispaced_params(n: int, offset: float = 0.0) -> np.ndarray:
    """t_j = 2*pi*(j + offset)/n."""
    return TWO_PI * (np.arange(n) + offset) / n


# =========================
# DOMAIN TYPES
# =========================
@dataclass(frozen=True)
class ParamBoundary:
    """
    One discretized Jordan curve.

    Attributes:
        component_index: 0 for the outer curve, 1..ell for inner curves
        nodes: eta(t_i)
        first_derivs: eta'(t_i)
        second_derivs: eta''(t_i)
        params: t_i in [0, 2*pi)
        corner_mask: True at graded corner nodes, where eta' vanishes by construction
    """

    component_index: int
    nodes: np.ndarray
    first_derivs: np.ndarray
    second_derivs: np.ndarray
    params: np.ndarray
    corner_mask: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        nodes = _frozen(self.nodes, complex)
        n = nodes.shape[0]
        mask = np.zeros(n, dtype=bool) if self.corner_mask is None else self.corner_mask
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "first_derivs", _frozen(self.first_derivs, complex))
        object.__setattr__(self, "second_derivs", _frozen(self.second_derivs, complex))
        object.__setattr__(self, "params", _frozen(self.params, float))
        object.__setattr__(self, "corner_mask", _frozen(mask, bool))

        lengths = {a.shape[0] for a in (self.nodes, self.first_derivs, self.second_derivs,
                                        self.params, self.corner_mask)}
        if len(lengths) != 1:
            raise GeometryError("boundary arrays must share one length", {"lengths": sorted(lengths)})
        if n % 2 != 0:
            raise GeometryError(f"node count must be even, got {n}", {"n": n})
        if self.component_index < 0:
            raise GeometryError("component index must be >= 0")

        speed = np.abs(self.first_derivs)
        bad = (speed == 0.0) & ~self.corner_mask
        if np.any(bad):
            raise GeometryError(
                "eta' vanishes at a non-corner node",
                {"component": self.component_index, "nodes": np.flatnonzero(bad)[:10].tolist()},
            )

    @property
    def n(self) -> int:
        return int(self.nodes.shape[0])

    @property
    def signed_area(self) -> float:
        """Signed enclosed area by the trapezoidal rule; positive for counterclockwise curves."""
        integrand = np.imag(np.conj(self.nodes) * self.first_derivs)
        return float(0.5 * np.sum(integrand) * TWO_PI / self.n)

    @property
    def orientation(self) -> str:
        return CCW if self.signed_area > 0 else CW

    def reversed(self) -> "ParamBoundary":
        """Same curve traversed backwards: eta(2*pi - t)."""
        idx = (-np.arange(self.n)) % self.n
        return ParamBoundary(
            component_index=self.component_index,
            nodes=self.nodes[idx],
            first_derivs=-self.first_derivs[idx],
            second_derivs=self.second_derivs[idx],
            params=self.params,
            corner_mask=self.corner_mask[idx],
        )

    def oriented(self, orientation: str) -> "ParamBoundary":
        _check_orientation(orientation)
        return self if self.orientation == orientation else self.reversed()

    def with_index(self, component_index: int) -> "ParamBoundary":
        return ParamBoundary(
            component_index=component_index,
            nodes=self.nodes,
            first_derivs=self.first_derivs,
            second_derivs=self.second_derivs,
            params=self.params,
            corner_mask=self.corner_mask,
        )

    def mapped(
        self,
        fn: Callable[[np.ndarray], np.ndarray],
        fn_deriv: Callable[[np.ndarray], np.ndarray],
        fn_second: Callable[[np.ndarray], np.ndarray],
    ) -> "ParamBoundary":
        """Image of the curve under an analytic map, derivatives by the chain rule."""
        d1 = fn_deriv(self.nodes)
        d2 = fn_second(self.nodes)
        return ParamBoundary(
            component_index=self.component_index,
            nodes=fn(self.nodes),
            first_derivs=d1 * self.first_derivs,
            second_derivs=d2 * self.first_derivs ** 2 + d1 * self.second_derivs,
            params=self.params,
            corner_mask=self.corner_mask,
        )


@dataclass(frozen=True)
class CornerSpec:
    """
    Corner locations in parameter space plus the grading order.

    Side k of a polygon occupies [corner_params[k], corner_params[k+1]].
    """

    corner_params: Tuple[float, ...]
    grading_order: int = 3

    def __post_init__(self) -> None:
        params = tuple(float(t) for t in self.corner_params)
        object.__setattr__(self, "corner_params", params)
        if self.grading_order < 2:
            raise GeometryError(f"grading order must be >= 2, got {self.grading_order}")
        arr = np.asarray(params)
        if arr.size == 0 or np.any(arr < 0) or np.any(arr >= TWO_PI):
            raise GeometryError("corner parameters must lie in [0, 2*pi)", {"corner_params": list(params)})
        if np.any(np.diff(arr) <= 0):
            raise GeometryError("corner parameters must be strictly increasing", {"corner_params": list(params)})

    @classmethod
    def uniform(cls, corners: int, grading_order: int = 3) -> "CornerSpec":
        return cls(tuple(TWO_PI * k / corners for k in range(corners)), grading_order)


@dataclass(frozen=True)
class DomainGeometry:
    """
    Outer curve plus ell inner curves, all sampled with the same n.

    Outer curve counterclockwise, inner curves clockwise, so the domain lies
    to the left of every boundary component.
    """

    boundaries: Tuple[ParamBoundary, ...]
    guard_factor: float = 1e-6

    @property
    def ell(self) -> int:
        return len(self.boundaries) - 1

    @property
    def outer(self) -> ParamBoundary:
        return self.boundaries[0]

    @property
    def inners(self) -> Tuple[ParamBoundary, ...]:
        return self.boundaries[1:]

    @property
    def n(self) -> int:
        return self.boundaries[0].n

    @property
    def total_nodes(self) -> int:
        return self.n * len(self.boundaries)

    @property
    def nodes(self) -> np.ndarray:
        return np.concatenate([b.nodes for b in self.boundaries])

    @property
    def first_derivs(self) -> np.ndarray:
        return np.concatenate([b.first_derivs for b in self.boundaries])

    @property
    def second_derivs(self) -> np.ndarray:
        return np.concatenate([b.second_derivs for b in self.boundaries])

    @property
    def params(self) -> np.ndarray:
        return np.concatenate([b.params for b in self.boundaries])

    @property
    def corner_mask(self) -> np.ndarray:
        return np.concatenate([b.corner_mask for b in self.boundaries])

    @property
    def component_ids(self) -> np.ndarray:
        return np.repeat(np.arange(len(self.boundaries)), self.n)

    def component_slice(self, k: int) -> slice:
        return slice(k * self.n, (k + 1) * self.n)

    @cached_property
    def outer_diameter(self) -> float:
        pts = self.outer.nodes
        if pts.size > 512:
            pts = pts[:: int(np.ceil(pts.size / 512))]
        return float(np.max(np.abs(pts[:, None] - pts[None, :])))

    @property
    def guard(self) -> float:
        return self.guard_factor * self.outer_diameter

    @property
    def bbox(self) -> Tuple[float, float, float, float]:
        z = self.outer.nodes
        return (float(z.real.min()), float(z.real.max()), float(z.imag.min()), float(z.imag.max()))


@dataclass(frozen=True)
class SlitDomain:
    """
    Domain bounded by an outer Jordan curve with one straight slit removed.

    The slit [slit_start, slit_end] is opened up by psi2 after the affine
    normalization z -> (z - slit_start) / (slit_end - slit_start).
    """

    outer: ParamBoundary
    slit_start: complex
    slit_end: complex
    guard_factor: float = 1e-6

    def __post_init__(self) -> None:
        object.__setattr__(self, "outer", self.outer.oriented(CCW).with_index(0))
        object.__setattr__(self, "slit_start", complex(self.slit_start))
        object.__setattr__(self, "slit_end", complex(self.slit_end))
        if self.slit_start == self.slit_end:
            raise GeometryError("slit endpoints coincide")
        for z in (self.slit_start, self.slit_end):
            if classify_point(self._outer_domain, z) is not PointClass.INTERIOR:
                raise ContainmentError("slit endpoint not inside the outer curve", {"point": [z.real, z.imag]})

    @property
    def ell(self) -> int:
        return 1

    @property
    def n(self) -> int:
        return self.outer.n

    @property
    def scale(self) -> complex:
        """Derivative of the affine normalization."""
        return 1.0 / (self.slit_end - self.slit_start)

    def normalize(self, z: Union[complex, np.ndarray]) -> Union[complex, np.ndarray]:
        return (z - self.slit_start) * self.scale

    @cached_property
    def _outer_domain(self) -> DomainGeometry:
        return assemble_domain(self.outer, [])

    @property
    def outer_diameter(self) -> float:
        return self._outer_domain.outer_diameter

    @property
    def guard(self) -> float:
        return self.guard_factor * self.outer_diameter

    @property
    def bbox(self) -> Tuple[float, float, float, float]:
        return self._outer_domain.bbox

    @cached_property
    def _opened(self) -> DomainGeometry:
        s = self.scale
        opened = self.outer.mapped(
            lambda z: open_up_psi2(self.normalize(z)),
            lambda z: open_up_psi2_deriv(self.normalize(z)) * s,
            lambda z: open_up_psi2_second_deriv(self.normalize(z)) * s * s,
        )
        return assemble_domain(opened, [make_circle(0.0, 1.0, CW, self.n)])

    def opened_up(self) -> DomainGeometry:
        """The image domain: psi2 of the normalized outer curve, with the unit circle as inner curve.

        Built once per instance; repeated evaluations share it.
        """
        return self._opened


Domain = Union[DomainGeometry, SlitDomain]


# =========================
# CURVE CONSTRUCTORS
# =========================
def make_circle(center: complex, radius: float, orientation: str = CCW, n: int = 1024) -> ParamBoundary:
    """
    Circle center + radius * exp(+-it) at n equispaced parameters.

    Args:
        center: circle center
        radius: circle radius, > 0
        orientation: 'ccw' or 'cw'
        n: even node count, >= 8

    Returns:
        ParamBoundary with analytic derivatives
    """
    if not radius > 0:
        raise GeometryError(f"radius must be positive, got {radius}")
    _check_n(n)
    _check_orientation(orientation)
    t = equispaced_params(n)
    sign = 1.0 if orientation == CCW else -1.0
    e = np.exp(1j * sign * t)
    return ParamBoundary(
        component_index=0,
        nodes=complex(center) + radius * e,
        first_derivs=1j * sign * radius * e,
        second_derivs=-radius * e,
        params=t,
    )


def make_smooth_curve(x_fn: CoordinateFn, y_fn: CoordinateFn, orientation: str = CCW, n: int = 1024) -> ParamBoundary:
    """
    Sample a smooth periodic curve given by its coordinate functions.

    Args:
        x_fn: t -> (x, x', x'')
        y_fn: t -> (y, y', y'')
        orientation: requested orientation; the curve is reversed if needed
        n: even node count

    Returns:
        ParamBoundary in the requested orientation
    """
    _check_n(n)
    _check_orientation(orientation)
    t = equispaced_params(n)
    x, xp, xpp = (np.asarray(a, dtype=float) for a in x_fn(t))
    y, yp, ypp = (np.asarray(a, dtype=float) for a in y_fn(t))
    curve = ParamBoundary(
        component_index=0,
        nodes=x + 1j * y,
        first_derivs=xp + 1j * yp,
        second_derivs=xpp + 1j * ypp,
        params=t,
    )
    return curve.oriented(orientation)


def make_fourier_curve(
    coefficients: Sequence[Tuple[int, complex]], orientation: str = CCW, n: int = 1024
) -> ParamBoundary:
    """Curve eta(t) = sum_k c_k exp(ikt) from (k, c_k) pairs."""
    terms = [(int(k), complex(c)) for k, c in coefficients]
    if not terms:
        raise GeometryError("fourier curve needs at least one coefficient")

    def parts(t: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        z = sum(c * np.exp(1j * k * t) for k, c in terms)
        zp = sum(1j * k * c * np.exp(1j * k * t) for k, c in terms)
        zpp = sum(-(k ** 2) * c * np.exp(1j * k * t) for k, c in terms)
        return np.asarray(z), np.asarray(zp), np.asarray(zpp)

    def x_fn(t: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return tuple(a.real for a in parts(t))  # type: ignore[return-value]

    def y_fn(t: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return tuple(a.imag for a in parts(t))  # type: ignore[return-value]

    return make_smooth_curve(x_fn, y_fn, orientation, n)


def make_ellipse(
    center: complex, a: float, b: float, angle: float = 0.0, orientation: str = CCW, n: int = 1024
) -> ParamBoundary:
    """Ellipse with semi-axes a, b rotated by angle."""
    if not (a > 0 and b > 0):
        raise GeometryError("ellipse semi-axes must be positive", {"a": a, "b": b})
    rot = np.exp(1j * angle)
    # a cos t + i b sin t = (a+b)/2 e^{it} + (a-b)/2 e^{-it}
    coeffs = [(0, complex(center)), (1, rot * (a + b) / 2.0), (-1, rot * (a - b) / 2.0)]
    return make_fourier_curve(coeffs, orientation, n)


# =========================
# GRADED POLYGONS
# =========================
def _grading_v(s: np.ndarray, p: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    c = 1.0 / p - 0.5
    u = (np.pi - s) / np.pi
    v = c * u ** 3 + (s - np.pi) / (p * np.pi) + 0.5
    vp = -3.0 * c * u ** 2 / np.pi + 1.0 / (p * np.pi)
    vpp = 6.0 * c * u / np.pi ** 2
    return v, vp, vpp


def grading_substitution(s: np.ndarray, p: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Polynomial grading w: [0, 2*pi] -> [0, 2*pi] with w^(j) = 0 at both ends for j < p.

    Returns:
        (w, w', w'') evaluated at s
    """
    s = np.asarray(s, dtype=float)
    v, vp, vpp = _grading_v(s, p)
    r, rp, rpp = _grading_v(TWO_PI - s, p)

    a = v ** p
    ap = p * v ** (p - 1) * vp
    app = p * (p - 1) * v ** (p - 2) * vp ** 2 + p * v ** (p - 1) * vpp
    b = r ** p
    bp = -p * r ** (p - 1) * rp
    bpp = p * (p - 1) * r ** (p - 2) * rp ** 2 + p * r ** (p - 1) * rpp

    d = a + b
    num = ap * b - a * bp
    w = TWO_PI * a / d
    wp = TWO_PI * num / d ** 2
    wpp = TWO_PI * ((app * b - a * bpp) * d - 2.0 * num * (ap + bp)) / d ** 3
    return w, wp, wpp


def _signed_polygon_area(vertices: np.ndarray) -> float:
    x, y = vertices.real, vertices.imag
    return float(0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _segments_cross(p1: complex, p2: complex, q1: complex, q2: complex) -> bool:
    def cross(o: complex, a: complex, b: complex) -> float:
        return (a - o).real * (b - o).imag - (a - o).imag * (b - o).real

    d1, d2 = cross(q1, q2, p1), cross(q1, q2, p2)
    d3, d4 = cross(p1, p2, q1), cross(p1, p2, q2)
    return (d1 * d2 <= 0) and (d3 * d4 <= 0)


def _check_simple(vertices: np.ndarray) -> None:
    m = len(vertices)
    edges = [(vertices[k], vertices[(k + 1) % m]) for k in range(m)]
    for i in range(m):
        for j in range(i + 1, m):
            if j == i + 1 or (i == 0 and j == m - 1):
                continue
            if _segments_cross(*edges[i], *edges[j]):
                raise GeometryError("polygon is self-intersecting", {"edges": [i, j]})


def make_polygon(
    vertices: Sequence[complex],
    orientation: str = CCW,
    n: Optional[int] = None,
    n_per_side: Optional[int] = None,
    grading: Optional[CornerSpec] = None,
) -> ParamBoundary:
    """
    Piecewise-linear boundary with a graded mesh at the corners.

    Side k runs over [corner_params[k], corner_params[k+1]]; inside it the
    grading substitution concentrates nodes near both vertices, and eta'
    vanishes at the vertices themselves. The parameters are shifted by half a
    step, t_j = 2*pi*(j + 1/2)/n, so no node sits on a vertex when the corner
    parameters fall on the uniform grid.

    Args:
        vertices: polygon vertices in order (either orientation)
        orientation: requested orientation
        n: total node count (even); alternative to n_per_side
        n_per_side: nodes per side; total n = sides * n_per_side
        grading: corner parameters and grading order (default uniform, p = 3)

    Returns:
        ParamBoundary with corner_mask set on nodes that hit a vertex

    Raises:
        GeometryError: bad vertices, or a grading so steep that nodes coincide
    """
    verts = np.asarray([complex(v) for v in vertices])
    m = len(verts)
    if m < 3:
        raise GeometryError(f"polygon needs at least 3 vertices, got {m}")
    _check_orientation(orientation)
    if n is None:
        if n_per_side is None:
            raise GeometryError("give either n or n_per_side")
        n = m * n_per_side
    _check_n(n)

    area = _signed_polygon_area(verts)
    if area == 0:
        raise GeometryError("polygon is degenerate (zero area)")
    _check_simple(verts)
    if (area > 0) != (orientation == CCW):
        verts = np.concatenate([verts[:1], verts[1:][::-1]])

    grading = grading or CornerSpec.uniform(m)
    if len(grading.corner_params) != m:
        raise GeometryError(
            "one corner parameter per vertex required",
            {"vertices": m, "corner_params": len(grading.corner_params)},
        )
    p = grading.grading_order
    # corners on grid points, so every side holds a whole number of half-step nodes
    snapped = np.round(np.asarray(grading.corner_params) * n / TWO_PI) * TWO_PI / n
    if np.any(np.diff(np.append(snapped, snapped[0] + TWO_PI)) <= 0):
        raise GeometryError("node count too small to separate the corners", {"n": n, "vertices": m})
    tau = np.append(snapped, snapped[0] + TWO_PI)

    t = equispaced_params(n, offset=0.5)
    # shift parameters so that side 0 starts at tau[0]
    shifted = np.mod(t - tau[0], TWO_PI) + tau[0]
    side = np.clip(np.searchsorted(tau, shifted, side="right") - 1, 0, m - 1)
    width = tau[side + 1] - tau[side]
    s = TWO_PI * (shifted - tau[side]) / width
    w, wp, wpp = grading_substitution(s, p)

    start = verts[side]
    edge = verts[(side + 1) % m] - start
    scale = TWO_PI / width
    nodes = start + edge * w / TWO_PI
    d1 = edge * wp * scale / TWO_PI
    d2 = edge * wpp * scale ** 2 / TWO_PI

    at_corner = (s < 1e-12) | (s > TWO_PI - 1e-12)
    nodes = np.where(at_corner & (s < np.pi), start, nodes)
    d1 = np.where(at_corner, 0.0, d1)
    d2 = np.where(at_corner, 0.0, d2)

    gaps = np.abs(np.roll(nodes, -1) - nodes)
    longest = float(np.max(np.abs(np.roll(verts, -1) - verts)))
    if gaps.min() < MIN_NODE_GAP * longest:
        raise GeometryError(
            "grading order too high for this node count: consecutive nodes coincide",
            {"grading_order": p, "n": n, "min_gap": float(gaps.min())},
        )

    return ParamBoundary(
        component_index=0,
        nodes=nodes,
        first_derivs=d1,
        second_derivs=d2,
        params=t,
        corner_mask=at_corner,
    )


# =========================
# DOMAIN ASSEMBLY AND PREDICATES
# =========================
def _winding_trapezoid(boundary: ParamBoundary, z: np.ndarray) -> np.ndarray:
    diff = boundary.nodes[None, :] - z[:, None]
    return np.sum(boundary.first_derivs[None, :] / diff, axis=1).imag / boundary.n


def _winding_angles(boundary: ParamBoundary, z: np.ndarray) -> np.ndarray:
    diff = boundary.nodes[None, :] - z[:, None]
    step = np.angle(np.roll(diff, -1, axis=1) / diff)
    return np.sum(step, axis=1) / TWO_PI


def winding_numbers(boundary: ParamBoundary, points: Union[complex, Sequence[complex], np.ndarray],
                    chunk: int = 512) -> np.ndarray:
    """
    Integer winding numbers of a discretized curve about points.

    The trapezoidal rule for (1/2*pi*i) * integral eta'/(eta - z) is rounded to the
    nearest integer; where it is not within 1e-3 of an integer (points within a
    few node spacings of the curve) the angle sum over the node polygon is used.
    """
    z = np.atleast_1d(np.asarray(points, dtype=complex))
    out = np.empty(z.shape[0], dtype=int)
    for lo in range(0, z.shape[0], chunk):
        part = z[lo:lo + chunk]
        with np.errstate(divide="ignore", invalid="ignore"):
            value = _winding_trapezoid(boundary, part)
            unsure = ~np.isfinite(value) | (np.abs(value - np.round(value)) > 1e-3)
            if np.any(unsure):
                value[unsure] = _winding_angles(boundary, part[unsure])
        out[lo:lo + chunk] = np.round(np.nan_to_num(value)).astype(int)
    return out


def assemble_domain(outer: ParamBoundary, inners: Sequence[ParamBoundary],
                    guard_factor: float = 1e-6) -> DomainGeometry:
    """
    Build a DomainGeometry: orient the curves and verify nesting.

    Args:
        outer: the curve enclosing all others
        inners: inner curves (holes)
        guard_factor: boundary guard distance as a fraction of the outer diameter

    Returns:
        DomainGeometry with Gamma_0 ccw and Gamma_k cw, component indices 0..ell
    """
    sizes = {outer.n} | {b.n for b in inners}
    if len(sizes) != 1:
        raise GeometryError("all boundary components must share the node count n", {"n": sorted(sizes)})

    oriented_outer = outer.oriented(CCW).with_index(0)
    oriented_inners = [b.oriented(CW).with_index(k + 1) for k, b in enumerate(inners)]

    for inner in oriented_inners:
        wind = winding_numbers(oriented_outer, inner.nodes)
        if not np.all(wind == 1):
            raise ContainmentError("inner curve not inside the outer curve",
                                   {"component": inner.component_index})
    for i, first in enumerate(oriented_inners):
        for second in oriented_inners[i + 1:]:
            if np.any(winding_numbers(first, second.nodes) != 0) or \
                    np.any(winding_numbers(second, first.nodes) != 0):
                raise ContainmentError("inner curves overlap",
                                       {"components": [first.component_index, second.component_index]})

    return DomainGeometry(boundaries=(oriented_outer, *oriented_inners), guard_factor=guard_factor)


def _segment_distances(z: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distances from points z (rows) to segments [a_j, b_j] (columns)."""
    ab = b - a
    denom = np.abs(ab) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.real((z[:, None] - a[None, :]) * np.conj(ab)[None, :]) / denom[None, :]
    lam = np.clip(np.nan_to_num(lam), 0.0, 1.0)
    proj = a[None, :] + lam * ab[None, :]
    return np.abs(z[:, None] - proj)


def _curve_distances(boundary: ParamBoundary, z: np.ndarray, chunk: int = 256) -> np.ndarray:
    a = boundary.nodes
    b = np.roll(a, -1)
    out = np.empty(z.shape[0])
    for lo in range(0, z.shape[0], chunk):
        out[lo:lo + chunk] = _segment_distances(z[lo:lo + chunk], a, b).min(axis=1)
    return out


def distances_to_boundary(domain: Domain, points: Union[Sequence[complex], np.ndarray]) -> np.ndarray:
    """Vectorized dist_to_boundary over many points."""
    z = np.atleast_1d(np.asarray(points, dtype=complex))
    if isinstance(domain, SlitDomain):
        curve = _curve_distances(domain.outer, z)
        slit = _segment_distances(z, np.array([domain.slit_start]), np.array([domain.slit_end]))[:, 0]
        return np.minimum(curve, slit)
    return np.min(np.stack([_curve_distances(b, z) for b in domain.boundaries]), axis=0)


def _node_spacings(domain: DomainGeometry) -> np.ndarray:
    """Larger of the two gaps to the neighbouring nodes, per node."""
    out = []
    for b in domain.boundaries:
        gap = np.abs(np.roll(b.nodes, -1) - b.nodes)
        out.append(np.maximum(gap, np.roll(gap, 1)))
    return np.concatenate(out)


def resolution_ratios(domain: Domain, points: Union[Sequence[complex], np.ndarray],
                      chunk: int = 256) -> np.ndarray:
    """
    Distance to the boundary in units of the node spacing next to each point.

    For slit domains the ratio is taken in the opened-up plane, where the
    boundary is actually discretized. The Nystrom values lose accuracy once
    the ratio drops to about one.
    """
    z = np.atleast_1d(np.asarray(points, dtype=complex))
    if isinstance(domain, SlitDomain):
        z = np.asarray(open_up_psi2(domain.normalize(z)), dtype=complex).reshape(-1)
        domain = domain.opened_up()
    nodes = domain.nodes
    spacing = _node_spacings(domain)
    nearest = np.empty(z.shape[0], dtype=int)
    for lo in range(0, z.shape[0], chunk):
        nearest[lo:lo + chunk] = np.argmin(np.abs(nodes[None, :] - z[lo:lo + chunk, None]), axis=1)
    return distances_to_boundary(domain, z) / spacing[nearest]


def dist_to_boundary(domain: Domain, z: complex) -> float:
    """
    Distance from z to the discretized boundary.

    Minimum over the segments joining consecutive nodes of every component,
    so the error is O(h^2) in the node spacing.
    """
    return float(distances_to_boundary(domain, [z])[0])


def classify_points(domain: Domain, points: Union[Sequence[complex], np.ndarray],
                    guard: Optional[float] = None) -> np.ndarray:
    """
    Classify points as interior, exterior or boundary-guard.

    Returns:
        object array of PointClass values
    """
    z = np.atleast_1d(np.asarray(points, dtype=complex))
    guard = domain.guard if guard is None else guard
    near = distances_to_boundary(domain, z) <= guard

    if isinstance(domain, SlitDomain):
        inside = winding_numbers(domain.outer, z) == 1
    else:
        inside = winding_numbers(domain.outer, z) == 1
        for inner in domain.inners:
            inside &= winding_numbers(inner, z) == 0

    out = np.full(z.shape[0], PointClass.EXTERIOR, dtype=object)
    out[inside] = PointClass.INTERIOR
    out[near] = PointClass.BOUNDARY
    return out


def classify_point(domain: Domain, z: complex, guard: Optional[float] = None) -> PointClass:
    return classify_points(domain, [z], guard)[0]


def contains(domain: Domain, z: complex, guard: Optional[float] = None) -> bool:
    """
    True iff z lies in the domain.

    Raises:
        BoundaryIndeterminateError: z is within the guard distance of the boundary
    """
    cls = classify_point(domain, z, guard)
    if cls is PointClass.BOUNDARY:
        raise BoundaryIndeterminateError(
            "point lies within the boundary guard distance",
            {"point": [complex(z).real, complex(z).imag]},
        )
    return cls is PointClass.INTERIOR


# =========================
# OPEN-UP MAPS
# =========================
def open_up_psi1(w: Union[complex, np.ndarray]) -> Union[complex, np.ndarray]:
    """psi1(w) = (w + 1/w)/4 + 1/2: exterior of the unit disk onto the exterior of [0, 1]."""
    return (w + 1.0 / w) / 4.0 + 0.5


def _check_off_slit(z: np.ndarray, tol: float) -> None:
    on = (np.abs(z.imag) <= tol) & (z.real >= -tol) & (z.real <= 1.0 + tol)
    if np.any(on):
        bad = z[on][0]
        raise GeometryError("point lies on the slit [0, 1]", {"point": [bad.real, bad.imag]})


def open_up_psi2(z: Union[complex, np.ndarray], tol: float = 1e-14) -> Union[complex, np.ndarray]:
    """
    Inverse of psi1: exterior of [0, 1] onto the exterior of the unit disk.

    psi2(z) = (2z - 1)(1 + sqrt(1 - 1/(2z - 1)^2)) on the branch with sqrt(1) = 1.
    """
    arr = np.asarray(z, dtype=complex)
    _check_off_slit(np.atleast_1d(arr), tol)
    u = 2.0 * arr - 1.0
    out = u * (1.0 + np.sqrt(1.0 - 1.0 / u ** 2))
    return complex(out) if np.ndim(out) == 0 else out


def open_up_psi2_deriv(z: Union[complex, np.ndarray], tol: float = 1e-14) -> Union[complex, np.ndarray]:
    """psi2'(z) = 4 psi2^2 / (psi2^2 - 1)."""
    w = np.asarray(open_up_psi2(z, tol))
    out = 4.0 * w ** 2 / (w ** 2 - 1.0)
    return complex(out) if np.ndim(out) == 0 else out


def open_up_psi2_second_deriv(z: Union[complex, np.ndarray], tol: float = 1e-14) -> Union[complex, np.ndarray]:
    """psi2''(z) = -8 psi2 / (psi2^2 - 1)^2 * psi2'(z)."""
    w = np.asarray(open_up_psi2(z, tol))
    d1 = 4.0 * w ** 2 / (w ** 2 - 1.0)
    out = -8.0 * w / (w ** 2 - 1.0) ** 2 * d1
    return complex(out) if np.ndim(out) == 0 else out


def boundary_summary(domain: DomainGeometry) -> List[dict]:
    """Per-component summary used in reports."""
    return [
        {
            "component": b.component_index,
            "orientation": b.orientation,
            "n": b.n,
            "corners": int(np.count_nonzero(b.corner_mask)),
            "signed_area": round(b.signed_area, 12),
        }
        for b in domain.boundaries
    ]
