"""Shared phase-space primitives: units, grids, fields, quadrature, IO.

Conventions used throughout the package:

* Phase-space points are ``(x, p)`` with ``x`` position-like and ``p``
  momentum-like.  2-D arrays are indexed ``[i, j] -> (x_i, p_j)``.
* Wigner functions are normalized so that ``iint W(x, p) dx dp = 1``.
* All floating-point text output (CSV, JSON) uses shortest round-trip
  formatting, so files are byte-identical across runs and thread counts.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson


class PhaseSpaceError(Exception):
    """Base class for all errors raised by this package."""


class InvalidFieldError(PhaseSpaceError):
    """A sampled field contains NaN/Inf or has inconsistent shape."""


class CoverageError(PhaseSpaceError):
    """A grid window does not cover the state's support."""


class ResolutionError(PhaseSpaceError):
    """A grid is too coarse to resolve the structure being measured."""


class WindowError(PhaseSpaceError):
    """An integration window clips non-negligible weight at its edges."""


@dataclass(frozen=True)
class UnitSystem:
    """Physical constants fixing the unit conventions.

    Parameters
    ----------
    hbar : float
        Reduced Planck constant.  Sets the phase-space area scale.
    kB : float
        Boltzmann constant.  Enters only through bath temperatures.
    """

    hbar: float = 1.0
    kB: float = 1.0

    def __post_init__(self) -> None:
        if not (self.hbar > 0 and math.isfinite(self.hbar)):
            raise ValueError(f"hbar must be positive and finite, got {self.hbar}")
        if not (self.kB > 0 and math.isfinite(self.kB)):
            raise ValueError(f"kB must be positive and finite, got {self.kB}")


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Uniform rectangular grid on phase space.

    Parameters
    ----------
    x_min, x_max : float
        Position window, ``x_min < x_max``.
    p_min, p_max : float
        Momentum window, ``p_min < p_max``.
    nx, np : int
        Number of samples along each axis (at least 2).
    """

    x_min: float
    x_max: float
    p_min: float
    p_max: float
    nx: int
    np: int

    def __post_init__(self) -> None:
        for name in ("x_min", "x_max", "p_min", "p_max"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")
        if not self.x_min < self.x_max:
            raise ValueError(f"need x_min < x_max, got [{self.x_min}, {self.x_max}]")
        if not self.p_min < self.p_max:
            raise ValueError(f"need p_min < p_max, got [{self.p_min}, {self.p_max}]")
        if self.nx < 2 or self.np < 2:
            raise ValueError(f"need at least 2 points per axis, got nx={self.nx}, np={self.np}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def dp(self) -> float:
        return (self.p_max - self.p_min) / (self.np - 1)

    def xs(self) -> np.ndarray:
        """Position samples, shape ``(nx,)``."""
        return np.linspace(self.x_min, self.x_max, self.nx)

    def ps(self) -> np.ndarray:
        """Momentum samples, shape ``(np,)``."""
        return np.linspace(self.p_min, self.p_max, self.np)

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        """``(X, P)`` arrays of shape ``(nx, np)``."""
        return np.meshgrid(self.xs(), self.ps(), indexing="ij")


def linspace_grid(
    x_half: float, p_half: float, nx: int, np: int, x_center: float = 0.0, p_center: float = 0.0
) -> PhaseSpaceGrid:
    """Symmetric grid covering ``center +- half`` along each axis."""
    if x_half <= 0 or p_half <= 0:
        raise ValueError("half-widths must be positive")
    return PhaseSpaceGrid(
        x_min=x_center - x_half,
        x_max=x_center + x_half,
        p_min=p_center - p_half,
        p_max=p_center + p_half,
        nx=nx,
        np=np,
    )


@dataclass(frozen=True)
class WignerField:
    """A real-valued function sampled on a :class:`PhaseSpaceGrid`.

    Parameters
    ----------
    grid : PhaseSpaceGrid
        Sample locations.
    values : numpy.ndarray
        Real samples of shape ``(grid.nx, grid.np)``; ``values[i, j]``
        is the function at ``(xs()[i], ps()[j])``.
    """

    grid: PhaseSpaceGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.nx, self.grid.np):
            raise InvalidFieldError(
                f"values shape {v.shape} does not match grid ({self.grid.nx}, {self.grid.np})"
            )
        if not np.all(np.isfinite(v)):
            raise InvalidFieldError("field contains non-finite samples")
        object.__setattr__(self, "values", v)

    def at_origin(self) -> float:
        """Value at the grid node nearest ``(0, 0)``."""
        i = int(np.argmin(np.abs(self.grid.xs())))
        j = int(np.argmin(np.abs(self.grid.ps())))
        return float(self.values[i, j])


_QUAD_RULES = ("trapezoid", "simpson", "gauss-hermite")


@dataclass(frozen=True)
class Quadrature:
    """Quadrature configuration for integral transforms and overlaps.

    Parameters
    ----------
    rule : str
        One of ``"trapezoid"``, ``"simpson"``, ``"gauss-hermite"``.
        The first two sample integrands on uniform grids chosen from the
        integrand's bandwidth; the last uses Hermite nodes and is only
        advisable for slowly oscillating integrands.
    order : int
        Node count for ``gauss-hermite``; ignored by the uniform rules.
    """

    rule: str = "trapezoid"
    order: int = 64

    def __post_init__(self) -> None:
        if self.rule not in _QUAD_RULES:
            raise ValueError(f"unknown quadrature rule {self.rule!r}; expected one of {_QUAD_RULES}")
        if self.order < 16:
            raise ValueError(f"quadrature order must be >= 16, got {self.order}")


def integrate_2d(field: WignerField, rule: str = "trapezoid") -> float:
    """Integrate a sampled field over its grid window.

    Parameters
    ----------
    field : WignerField
        Samples on a uniform grid.
    rule : str
        ``"trapezoid"`` or ``"simpson"``.  Simpson requires an odd
        number of samples along both axes.

    Returns
    -------
    float
    """
    v = field.values
    if not np.all(np.isfinite(v)):
        raise InvalidFieldError("field contains non-finite samples")
    if rule == "trapezoid":
        return float(np.trapezoid(np.trapezoid(v, dx=field.grid.dp, axis=1), dx=field.grid.dx))
    if rule == "simpson":
        if field.grid.nx % 2 == 0 or field.grid.np % 2 == 0:
            raise ValueError("simpson rule needs an odd number of samples along each axis")
        return float(simpson(simpson(v, dx=field.grid.dp, axis=1), dx=field.grid.dx))
    raise ValueError(f"unknown integration rule {rule!r}")


def parallel_map(fn, items, threads: int = 1) -> list:
    """Map ``fn`` over ``items`` preserving order.

    With ``threads > 1`` the calls run on a thread pool; results are
    returned in input order either way, so output is independent of the
    thread count as long as ``fn`` is pure.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _format_float(v: float) -> str:
    """Shortest round-trip decimal form (deterministic)."""
    return repr(float(v))


def write_text_atomic(path: str, text: str) -> None:
    """Write ``text`` to ``path`` via a temp file and atomic rename."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_json(obj, path: str) -> None:
    """Serialize ``obj`` to JSON with sorted keys, atomically."""
    write_text_atomic(path, json.dumps(obj, sort_keys=True, indent=2) + "\n")


def field_to_csv(field: WignerField, path: str) -> None:
    """Write a sampled field as ``x,p,w`` rows (x-major order)."""
    xs = field.grid.xs()
    ps = field.grid.ps()
    lines = ["x,p,w"]
    for i in range(field.grid.nx):
        xi = _format_float(xs[i])
        row = field.values[i]
        for j in range(field.grid.np):
            lines.append(f"{xi},{_format_float(ps[j])},{_format_float(row[j])}")
    write_text_atomic(path, "\n".join(lines) + "\n")


def field_summary(field: WignerField) -> dict:
    """Compact JSON-ready description of a sampled field."""
    return {
        "nx": field.grid.nx,
        "np": field.grid.np,
        "x_min": field.grid.x_min,
        "x_max": field.grid.x_max,
        "p_min": field.grid.p_min,
        "p_max": field.grid.p_max,
        "min": float(field.values.min()),
        "max": float(field.values.max()),
        "integral": integrate_2d(field),
    }
