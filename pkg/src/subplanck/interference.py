"""Zero-lattice geometry of the interference region.

The even mixture of a position cat and a momentum cat develops a
checkerboard of alternating-sign diamonds near the phase-space origin.
This module measures that structure from sampled fields:

* :func:`zero_condition_residual` — the bracket whose roots are the
  zero set of the mixed-state Wigner function, with the envelope
  divided out (numerically stable form).
* :func:`find_zero_lattice` — a two-pass detector for the lattice of
  zero lines.  On the axes themselves the two cosine terms conspire so
  that the Wigner function only *touches* zero (tangential minima); the
  detector first locates those touches, then rescans along offset rows
  and columns where the crossings become transversal and can be
  bracketed and refined.
* :func:`tile_area`, :func:`checkerboard_report`,
  :func:`lattice_report` — derived measurements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from subplanck.core import (
    PhaseSpaceError,
    ResolutionError,
    UnitSystem,
    WignerField,
)


class LatticeError(PhaseSpaceError):
    """No usable zero-line structure was found."""


def zero_condition_residual(x, p, x0: float, p0: float, sigma: float,
                            units: UnitSystem = UnitSystem()):
    """Zero-set bracket of the mixed-cat Wigner function.

    The mixed-state Wigner function factors as

        W(x, p) = (2 pi hbar)^-1 exp(-x^2/(2 sigma^2) - 2 sigma^2 p^2/hbar^2) * B(x, p)

    and this returns ``B``.  Zeros of ``W`` are exactly the roots of
    ``B``; dividing out the envelope keeps the roots well-conditioned
    far from the origin.  ``B(0, 0) = 2`` identically.

    The two ``cosh`` hyperbolic terms are evaluated as paired
    exponentials with the lobe offsets folded in, so the expression
    stays finite wherever the Wigner function itself is representable.
    """
    hbar = units.hbar
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    n1sq = 1.0 / (2 * (1 + math.exp(-(x0**2) / (2 * sigma**2))))
    n2sq = 1.0 / (2 * (1 + math.exp(-2 * p0**2 * sigma**2 / hbar**2)))
    hyp1 = np.exp((x * x0 - x0**2 / 2) / sigma**2) + np.exp((-x * x0 - x0**2 / 2) / sigma**2)
    hyp2 = np.exp(2 * sigma**2 * (2 * p * p0 - p0**2) / hbar**2) + np.exp(
        2 * sigma**2 * (-2 * p * p0 - p0**2) / hbar**2
    )
    return (
        n1sq * hyp1
        + n2sq * hyp2
        + 2 * n1sq * np.cos(2 * p * x0 / hbar)
        + 2 * n2sq * np.cos(2 * p0 * x / hbar)
    )


@dataclass(frozen=True)
class ZeroLattice:
    """Measured zero-line lattice of a Wigner function.

    Attributes
    ----------
    x_lines : numpy.ndarray
        Sorted positions of zero lines at constant ``x``.
    p_lines : numpy.ndarray
        Sorted positions of zero lines at constant ``p``.
    p_offset_row : float
        Momentum of the scan row used to measure ``x_lines``.
    x_offset_col : float
        Position of the scan column used to measure ``p_lines``.
    x_touch_first : float or None
        First positive tangential minimum on the ``p = 0`` axis, if any.
    p_touch_first : float or None
        First positive tangential minimum on the ``x = 0`` axis, if any.
    """

    x_lines: np.ndarray = field(default_factory=lambda: np.empty(0))
    p_lines: np.ndarray = field(default_factory=lambda: np.empty(0))
    p_offset_row: float = 0.0
    x_offset_col: float = 0.0
    x_touch_first: float | None = None
    p_touch_first: float | None = None

    def first_x_line(self) -> float:
        pos = self.x_lines[self.x_lines > 0]
        if pos.size == 0:
            raise LatticeError("no positive zero line at constant x")
        return float(pos.min())

    def first_p_line(self) -> float:
        pos = self.p_lines[self.p_lines > 0]
        if pos.size == 0:
            raise LatticeError("no positive zero line at constant p")
        return float(pos.min())

    def x_spacing(self) -> float:
        if self.x_lines.size < 2:
            raise LatticeError("need at least two x lines for a spacing")
        return float(np.median(np.diff(np.sort(self.x_lines))))

    def p_spacing(self) -> float:
        if self.p_lines.size < 2:
            raise LatticeError("need at least two p lines for a spacing")
        return float(np.median(np.diff(np.sort(self.p_lines))))


def _crossings(coords: np.ndarray, vals: np.ndarray) -> list[tuple[float, float]]:
    """Brackets ``(a, b)`` around strict sign changes."""
    out = []
    s = np.sign(vals)
    for i in range(len(vals) - 1):
        if s[i] != 0 and s[i + 1] != 0 and s[i] != s[i + 1]:
            out.append((float(coords[i]), float(coords[i + 1])))
        elif s[i] != 0 and s[i + 1] == 0:
            # exact zero on a node: bracket around it
            j = i + 2
            while j < len(vals) and s[j] == 0:
                j += 1
            if j < len(vals) and s[j] != s[i]:
                out.append((float(coords[i]), float(coords[j])))
    return out


def _touches(coords: np.ndarray, vals: np.ndarray, threshold: float) -> list[float]:
    """Tangential near-zero minima: deep dips of ``|vals|`` without a
    sign change, prominent against their neighborhoods."""
    out = []
    av = np.abs(vals)
    scale = float(av.max())
    if scale == 0:
        return out
    deep = threshold * scale
    prominent = 10 * deep
    for i in range(1, len(vals) - 1):
        if not (av[i] < deep and av[i] < av[i - 1] and av[i] <= av[i + 1]):
            continue
        if vals[i - 1] * vals[i + 1] < 0:
            continue  # that's a crossing, not a touch
        left_ok = any(av[j] >= prominent for j in range(i - 1, -1, -1))
        right_ok = any(av[j] >= prominent for j in range(i + 1, len(vals)))
        if left_ok and right_ok:
            out.append(float(coords[i]))
    return out


def _refine_crossing(fn, a: float, b: float) -> float:
    return float(brentq(fn, a, b, xtol=1e-12, rtol=8.9e-16, maxiter=200))


def _refine_touch(fn, center: float, half: float) -> float:
    res = minimize_scalar(fn, bounds=(center - half, center + half), method="bounded",
                          options={"xatol": 1e-12})
    return float(res.x)


def _interp_roots(coords: np.ndarray, vals: np.ndarray) -> np.ndarray:
    """Linear-interpolation roots at sign changes (no-evaluator fallback)."""
    roots = []
    for a, b in _crossings(coords, vals):
        ia = int(np.searchsorted(coords, a))
        ib = int(np.searchsorted(coords, b))
        va, vb = vals[ia], vals[ib]
        roots.append(a + (b - a) * va / (va - vb))
    return np.asarray(roots)


def find_zero_lattice(
    field_in: WignerField,
    evaluator=None,
    threshold: float = 1e-3,
    min_nodes_per_gap: int = 8,
) -> ZeroLattice:
    """Measure the lattice of zero lines of a sampled Wigner function.

    Pass 1 scans the two axes of the grid.  Transversal sign changes
    found there are refined directly into zero lines.  Where a family
    of lines only *touches* zero on the axis (the generic situation for
    the cat mixture, whose on-axis profile is a non-negative
    ``1 + cos``), the touch positions fix the lattice scale, and pass 2
    rescans along a row/column offset by half the first touch, where
    the same lines cross zero transversally and can be bracketed.

    Parameters
    ----------
    field_in : WignerField
        Sampled Wigner function whose grid drives the detection.
    evaluator : callable, optional
        Vectorized ``(x, p) -> W`` used to refine features to high
        accuracy and to evaluate the offset scans at their exact
        locations.  Without it, features are interpolated from the grid
        samples only, which limits accuracy to the grid scale.
    threshold : float
        Relative depth below which an axis minimum counts as a touch.
    min_nodes_per_gap : int
        Resolution gate: measured line spacings must span at least this
        many grid steps, otherwise :class:`ResolutionError` is raised.

    Returns
    -------
    ZeroLattice

    Raises
    ------
    LatticeError
        If no zero structure is present on either axis.
    ResolutionError
        If structure is present but the grid undersamples it.
    """
    grid = field_in.grid
    xs, ps = grid.xs(), grid.ps()
    i0 = int(np.argmin(np.abs(xs)))
    j0 = int(np.argmin(np.abs(ps)))
    row = field_in.values[:, j0]  # W(x, ~0)
    col = field_in.values[i0, :]  # W(~0, p)
    p_axis = float(ps[j0])
    x_axis = float(xs[i0])

    row_cross = _crossings(xs, row)
    col_cross = _crossings(ps, col)
    row_touch = _touches(xs, row, threshold)
    col_touch = _touches(ps, col, threshold)

    x_touch_first = min((t for t in row_touch if t > 0), default=None)
    p_touch_first = min((t for t in col_touch if t > 0), default=None)
    if evaluator is not None:
        if x_touch_first is not None:
            x_touch_first = _refine_touch(lambda x: float(evaluator(x, p_axis)),
                                          x_touch_first, grid.dx)
        if p_touch_first is not None:
            p_touch_first = _refine_touch(lambda p: float(evaluator(x_axis, p)),
                                          p_touch_first, grid.dp)

    def refine_family(coords, vals, fixed: float, along_x: bool) -> np.ndarray:
        brackets = _crossings(coords, vals)
        if evaluator is None:
            return _interp_roots(coords, vals)
        if along_x:
            fn = lambda t: float(evaluator(t, fixed))
        else:
            fn = lambda t: float(evaluator(fixed, t))
        return np.asarray(sorted(_refine_crossing(fn, a, b) for a, b in brackets))

    # x-line family (zero lines at constant x)
    x_lines = np.empty(0)
    p_offset_row = p_axis
    if row_cross:
        x_lines = refine_family(xs, row, p_axis, along_x=True)
    elif row_touch and p_touch_first is not None:
        p_offset_row = p_touch_first / 2
        if evaluator is not None:
            off_vals = np.asarray(evaluator(xs, p_offset_row), dtype=float)
        else:
            j = int(np.argmin(np.abs(ps - p_offset_row)))
            p_offset_row = float(ps[j])
            off_vals = field_in.values[:, j]
        x_lines = refine_family(xs, off_vals, p_offset_row, along_x=True)

    # p-line family (zero lines at constant p)
    p_lines = np.empty(0)
    x_offset_col = x_axis
    if col_cross:
        p_lines = refine_family(ps, col, x_axis, along_x=False)
    elif col_touch and x_touch_first is not None:
        x_offset_col = x_touch_first / 2
        if evaluator is not None:
            off_vals = np.asarray(evaluator(x_offset_col, ps), dtype=float)
        else:
            i = int(np.argmin(np.abs(xs - x_offset_col)))
            x_offset_col = float(xs[i])
            off_vals = field_in.values[i, :]
        p_lines = refine_family(ps, off_vals, x_offset_col, along_x=False)

    if x_lines.size == 0 and p_lines.size == 0:
        raise LatticeError(
            "no zero crossings or near-zero touches detected on either axis; "
            "the field appears to have no interference zero structure"
        )

    if x_lines.size >= 2:
        spacing = float(np.median(np.diff(x_lines)))
        if spacing < min_nodes_per_gap * grid.dx:
            raise ResolutionError(
                f"x-line spacing {spacing:.4g} spans fewer than {min_nodes_per_gap} "
                f"grid steps (dx = {grid.dx:.4g}); refine the grid"
            )
    if p_lines.size >= 2:
        spacing = float(np.median(np.diff(p_lines)))
        if spacing < min_nodes_per_gap * grid.dp:
            raise ResolutionError(
                f"p-line spacing {spacing:.4g} spans fewer than {min_nodes_per_gap} "
                f"grid steps (dp = {grid.dp:.4g}); refine the grid"
            )

    return ZeroLattice(
        x_lines=x_lines,
        p_lines=p_lines,
        p_offset_row=p_offset_row,
        x_offset_col=x_offset_col,
        x_touch_first=x_touch_first,
        p_touch_first=p_touch_first,
    )


def tile_area(lattice: ZeroLattice) -> float:
    """Area ``x1 * p1`` spanned by the first positive zero lines.

    This is the conventional figure of merit for the central
    interference tile; the full cell of the checkerboard (spacing
    between consecutive lines in each family) has four times this area.
    """
    return lattice.first_x_line() * lattice.first_p_line()


def checkerboard_report(evaluator, lattice: ZeroLattice, kmax: int = 3, mmax: int = 3) -> dict:
    """Classify the sign pattern of the interference tiles.

    For a full lattice the tile centers sit on the diamond sublattice
    ``(k Dx, m Dp)`` with ``k + m`` even, where ``Dx``/``Dp`` are the
    line spacings; their signs must follow ``(-1)^k``.  With only one
    line family present, the midpoints between consecutive lines must
    alternate instead.

    Parameters
    ----------
    evaluator : callable
        Vectorized ``(x, p) -> W``.
    lattice : ZeroLattice
    kmax, mmax : int
        Extent of the checked block of tiles; keep modest so the test
        stays inside the interference region.

    Returns
    -------
    dict
        ``pattern`` in ``{"checkerboard", "stripes_p", "stripes_x",
        "single"}``, the number of centers checked, whether all signs
        matched, and the first mismatch if any.
    """
    have_x = lattice.x_lines.size >= 2
    have_p = lattice.p_lines.size >= 2

    if have_x and have_p:
        dx_t = lattice.x_spacing()
        dp_t = lattice.p_spacing()
        checked = 0
        mismatch = None
        ok = True
        for k in range(-kmax, kmax + 1):
            for m in range(-mmax, mmax + 1):
                if (k + m) % 2 != 0:
                    continue
                val = float(evaluator(k * dx_t, m * dp_t))
                expect = 1.0 if k % 2 == 0 else -1.0
                checked += 1
                if math.copysign(1.0, val) != expect:
                    ok = False
                    if mismatch is None:
                        mismatch = {"k": k, "m": m, "x": k * dx_t, "p": m * dp_t, "w": val}
        return {
            "pattern": "checkerboard",
            "centers_checked": checked,
            "signs_ok": ok,
            "first_mismatch": mismatch,
            "spacing_x": dx_t,
            "spacing_p": dp_t,
        }

    if have_p or have_x:
        lines = np.sort(lattice.p_lines if have_p else lattice.x_lines)
        mids = 0.5 * (lines[:-1] + lines[1:])
        if have_p:
            vals = [float(evaluator(0.0, m)) for m in mids]
        else:
            vals = [float(evaluator(m, 0.0)) for m in mids]
        signs = [math.copysign(1.0, v) for v in vals]
        ok = all(signs[i] != signs[i + 1] for i in range(len(signs) - 1))
        return {
            "pattern": "stripes_p" if have_p else "stripes_x",
            "centers_checked": len(mids),
            "signs_ok": ok,
            "first_mismatch": None,
            "spacing_x": lattice.x_spacing() if have_x else None,
            "spacing_p": lattice.p_spacing() if have_p else None,
        }

    return {
        "pattern": "single",
        "centers_checked": 0,
        "signs_ok": True,
        "first_mismatch": None,
        "spacing_x": None,
        "spacing_p": None,
    }


def lattice_report(
    lattice: ZeroLattice,
    units: UnitSystem = UnitSystem(),
    predicted_area: float | None = None,
) -> dict:
    """JSON-ready summary of a measured lattice."""
    out: dict = {
        "x_lines": [float(v) for v in lattice.x_lines],
        "p_lines": [float(v) for v in lattice.p_lines],
        "p_offset_row": lattice.p_offset_row,
        "x_offset_col": lattice.x_offset_col,
    }
    try:
        area = tile_area(lattice)
    except LatticeError:
        area = None
    out["tile_area_measured"] = area
    out["cell_area_measured"] = 4 * area if area is not None else None
    out["subplanck"] = bool(area < units.hbar) if area is not None else None
    out["hbar"] = units.hbar
    if predicted_area is not None:
        out["tile_area_predicted"] = predicted_area
        if area is not None:
            out["relative_error"] = abs(area - predicted_area) / abs(predicted_area)
    return out
