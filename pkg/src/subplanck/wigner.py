"""Wigner functions: defining-integral oracle and closed forms.

Conventions
-----------
Wigner transform (normalized to ``iint W dx dp = 1``):

    W(x, p) = (2 pi hbar)^-1  int <x - y/2| rho |x + y/2> exp(i p y / hbar) dy

Characteristic function (Fourier pairing ``x <-> P``, ``p <-> Q``):

    Wt(Q, P) = iint exp(-i (x P + p Q) / hbar) W(x, p) dx dp
             = int psi(x - Q/2) psi*(x + Q/2) exp(-i x P / hbar) dx

so ``Wt(0, 0) = 1`` for a normalized state.

Two independent evaluation routes are provided for superpositions of
Gaussian packets: :func:`wigner_transform` integrates the defining
integral numerically (quadrature on the evaluated wave packets), while
:func:`wigner_closed` sums the exact per-pair Gaussian integrals.
Their agreement is a strong end-to-end check of both.
"""

from __future__ import annotations

import cmath
import math

import numpy as np
from scipy.special import roots_hermite

from subplanck.core import (
    CoverageError,
    PhaseSpaceGrid,
    Quadrature,
    UnitSystem,
    WignerField,
)
from subplanck.states import CatSpec, FockVector, GaussianComponent, MixedSpec

_TAIL_SIGMAS = 8.5  # Gaussian tails are below 3e-16 beyond this many widths


def _branches(state: CatSpec | MixedSpec) -> tuple[tuple[float, CatSpec], ...]:
    if isinstance(state, CatSpec):
        return ((1.0, state),)
    if isinstance(state, MixedSpec):
        return state.branches
    raise TypeError(f"unsupported state type {type(state).__name__}")


def _packet_eval(comp: GaussianComponent, u: np.ndarray, hbar: float) -> np.ndarray:
    """Unit-normalized wave packet evaluated at ``u`` (complex array)."""
    front = (2 * math.pi * comp.sigma**2) ** -0.25
    return front * np.exp(
        -((u - comp.x0) ** 2) / (4 * comp.sigma**2)
        + 1j * (comp.p0 * u / hbar + comp.phase)
    )


def _pair_scale(cj: GaussianComponent, ck: GaussianComponent) -> tuple[float, float]:
    """Gaussian width ``s`` and slope of the center ``mu(x)`` of the
    chord product ``phi_j(x - y/2) phi_k*(x + y/2)`` seen as a function
    of ``y``."""
    sj2, sk2 = cj.sigma**2, ck.sigma**2
    s = math.sqrt(8 * sj2 * sk2 / (sj2 + sk2))
    dmu_dx = 2 * (sk2 - sj2) / (sj2 + sk2)
    return s, dmu_dx


def _pair_center(cj: GaussianComponent, ck: GaussianComponent, x: np.ndarray) -> np.ndarray:
    sj2, sk2 = cj.sigma**2, ck.sigma**2
    return (2 * sk2 * (x - cj.x0) - 2 * sj2 * (x - ck.x0)) / (sj2 + sk2)


def _pair_integral_uniform(
    cj: GaussianComponent,
    ck: GaussianComponent,
    xs: np.ndarray,
    ps: np.ndarray,
    hbar: float,
    rule: str,
) -> np.ndarray:
    """``I_jk(x, p) = int phi_j(x - y/2) phi_k*(x + y/2) e^{i p y/hbar} dy``
    on the outer grid ``xs x ps``, by direct quadrature of the evaluated
    packets.

    The integrand is a Gaussian of width ``s`` in ``y`` times a tone of
    angular frequency ``(p - (p0_j + p0_k)/2) / hbar``; a uniform step
    ``h = 2 pi / (omega_max + tail/s)`` keeps the aliasing error of the
    trapezoid sum at the level of the Gaussian tail itself.
    """
    s, _ = _pair_scale(cj, ck)
    mus = _pair_center(cj, ck, xs)
    lo = float(mus.min()) - _TAIL_SIGMAS * s
    hi = float(mus.max()) + _TAIL_SIGMAS * s
    qbar = 0.5 * (cj.p0 + ck.p0)
    omega_max = float(np.max(np.abs(ps - qbar))) / hbar
    h = 2 * math.pi / (omega_max + _TAIL_SIGMAS / s)
    if rule == "simpson":
        # Composite Simpson mixes trapezoid sums at step h and 2h, so the
        # anti-aliasing step criterion must hold for the doubled step too.
        h /= 2
    ny = max(int(math.ceil((hi - lo) / h)) + 1, 16)
    if rule == "simpson" and ny % 2 == 0:
        ny += 1
    ys = np.linspace(lo, hi, ny)
    step = ys[1] - ys[0]

    if rule == "trapezoid":
        w = np.full(ny, step)
        w[0] = w[-1] = step / 2
    elif rule == "simpson":
        w = np.full(ny, 2 * step / 3)
        w[1::2] = 4 * step / 3
        w[0] = w[-1] = step / 3
    else:
        raise ValueError(f"unsupported uniform rule {rule!r}")

    kern = _packet_eval(cj, xs[:, None] - ys[None, :] / 2, hbar) * np.conj(
        _packet_eval(ck, xs[:, None] + ys[None, :] / 2, hbar)
    )
    tone = w[:, None] * np.exp(1j * np.outer(ys, ps) / hbar)
    return kern @ tone


def _pair_quadratic(
    cj: GaussianComponent, ck: GaussianComponent, x: np.ndarray, hbar: float
) -> tuple[float, np.ndarray, np.ndarray]:
    """Exact quadratic form of the chord product in ``y``.

    Writes ``phi_j(x-y/2) phi_k*(x+y/2) = front * exp(-A (y-mu)^2 + D - i qbar y/hbar)``
    with ``qbar = (p0_j + p0_k)/2``; returns ``(A, mu(x), D(x))`` where
    ``D`` is complex and its real part is non-positive.
    """
    sj2, sk2 = cj.sigma**2, ck.sigma**2
    a_y = (sj2 + sk2) / (16 * sj2 * sk2)
    lin = (x - cj.x0) / (4 * sj2) - (x - ck.x0) / (4 * sk2)
    mu = lin / (2 * a_y)
    const = (
        -((x - cj.x0) ** 2) / (4 * sj2)
        - ((x - ck.x0) ** 2) / (4 * sk2)
        + 1j * ((cj.p0 - ck.p0) * x / hbar + (cj.phase - ck.phase))
    )
    d = lin**2 / (4 * a_y) + const
    return a_y, mu, d


def _pair_front(cj: GaussianComponent, ck: GaussianComponent) -> float:
    return (2 * math.pi * cj.sigma**2) ** -0.25 * (2 * math.pi * ck.sigma**2) ** -0.25


def _pair_integral_hermite(
    cj: GaussianComponent,
    ck: GaussianComponent,
    xs: np.ndarray,
    ps: np.ndarray,
    hbar: float,
    order: int,
) -> np.ndarray:
    """Gauss-Hermite evaluation of the same pair integral.

    The Gaussian factor is absorbed into the Hermite weight
    analytically (evaluating it and dividing back out would overflow),
    so only the residual tone is sampled at the nodes.  Accurate while
    the tone completes few cycles across the Gaussian; for fast tones
    prefer the uniform rules.
    """
    t, w = roots_hermite(order)
    a_y, mu, d = _pair_quadratic(cj, ck, xs, hbar)
    ys = mu[:, None] + t[None, :] / math.sqrt(a_y)  # (nx, order)
    qbar = 0.5 * (cj.p0 + ck.p0)
    omega = (ps - qbar) / hbar  # (np,)
    phase = np.exp(1j * ys[:, :, None] * omega[None, None, :])  # (nx, order, np)
    amp = _pair_front(cj, ck) * np.exp(d) / math.sqrt(a_y)  # (nx,)
    return amp[:, None] * np.einsum("t,xtp->xp", w, phase)


def _pair_integral_exact(
    cj: GaussianComponent,
    ck: GaussianComponent,
    x: np.ndarray,
    p: np.ndarray,
    hbar: float,
) -> np.ndarray:
    """Closed form of the pair integral (exact Gaussian integral).

    ``x`` and ``p`` broadcast against each other.
    """
    a_y, mu, d = _pair_quadratic(cj, ck, x, hbar)
    qbar = 0.5 * (cj.p0 + ck.p0)
    omega = (p - qbar) / hbar
    # int exp(-A (y-mu)^2 + i omega y) dy
    #   = sqrt(pi/A) exp(i omega mu - omega^2 / (4A))
    return (
        _pair_front(cj, ck)
        * math.sqrt(math.pi / a_y)
        * np.exp(d + 1j * omega * mu - omega**2 / (4 * a_y))
    )


def _sum_pairs(
    state: CatSpec | MixedSpec,
    hbar: float,
    pair_fn,
) -> np.ndarray:
    """``sum_b P_b N_b^2 sum_jk c_j c_k* I_jk / (2 pi hbar)`` using the
    hermiticity of the pair integrals to evaluate only ``j <= k``."""
    total = None
    for prob, cat in _branches(state):
        acc = None
        n = len(cat.components)
        for j in range(n):
            for k in range(j, n):
                weight = cat.coefficients[j] * np.conj(cat.coefficients[k])
                term = weight * pair_fn(cat.components[j], cat.components[k])
                term = term.real if j == k else 2 * term.real
                acc = term if acc is None else acc + term
        scaled = prob * cat.norm**2 * acc
        total = scaled if total is None else total + scaled
    return total / (2 * math.pi * hbar)


def wigner_transform(
    state: CatSpec | MixedSpec,
    grid: PhaseSpaceGrid,
    units: UnitSystem = UnitSystem(),
    quadrature: Quadrature = Quadrature(),
) -> WignerField:
    """Wigner function by numerical quadrature of the defining integral.

    Parameters
    ----------
    state : CatSpec or MixedSpec
        Superposition (or mixture of superpositions) of Gaussian packets.
    grid : PhaseSpaceGrid
        Output sample locations.
    units : UnitSystem
    quadrature : Quadrature
        ``trapezoid`` (default) and ``simpson`` auto-select their node
        grids from the integrand bandwidth; ``gauss-hermite`` uses
        ``quadrature.order`` nodes.

    Returns
    -------
    WignerField
    """
    xs, ps = grid.xs(), grid.ps()
    hbar = units.hbar
    if quadrature.rule == "gauss-hermite":
        pair_fn = lambda cj, ck: _pair_integral_hermite(cj, ck, xs, ps, hbar, quadrature.order)
    else:
        pair_fn = lambda cj, ck: _pair_integral_uniform(cj, ck, xs, ps, hbar, quadrature.rule)
    return WignerField(grid=grid, values=_sum_pairs(state, hbar, pair_fn))


def wigner_point(
    state: CatSpec | MixedSpec,
    x: float,
    p: float,
    units: UnitSystem = UnitSystem(),
    quadrature: Quadrature = Quadrature(),
) -> float:
    """Single-point version of :func:`wigner_transform`."""
    xs = np.array([float(x)])
    ps = np.array([float(p)])
    hbar = units.hbar
    if quadrature.rule == "gauss-hermite":
        pair_fn = lambda cj, ck: _pair_integral_hermite(cj, ck, xs, ps, hbar, quadrature.order)
    else:
        pair_fn = lambda cj, ck: _pair_integral_uniform(cj, ck, xs, ps, hbar, quadrature.rule)
    return float(_sum_pairs(state, hbar, pair_fn)[0, 0])


def wigner_closed_eval(
    state: CatSpec | MixedSpec,
    x,
    p,
    units: UnitSystem = UnitSystem(),
) -> np.ndarray:
    """Closed-form Wigner function at arbitrary points.

    ``x`` and ``p`` broadcast against each other; the result has the
    broadcast shape.
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    pair_fn = lambda cj, ck: _pair_integral_exact(cj, ck, x, p, units.hbar)
    return _sum_pairs(state, units.hbar, pair_fn)


def wigner_closed(
    state: CatSpec | MixedSpec,
    grid: PhaseSpaceGrid,
    units: UnitSystem = UnitSystem(),
) -> WignerField:
    """Wigner function from the exact per-pair Gaussian integrals."""
    xm, pm = grid.meshgrid()
    return WignerField(grid=grid, values=wigner_closed_eval(state, xm, pm, units))


def wigner_closed_point(
    state: CatSpec | MixedSpec,
    x: float,
    p: float,
    units: UnitSystem = UnitSystem(),
) -> float:
    """Single-point version of :func:`wigner_closed`."""
    return float(wigner_closed_eval(state, float(x), float(p), units))


def wc1_closed(x, p, x0: float, sigma: float, units: UnitSystem = UnitSystem()):
    """Wigner function of the position cat (packets at ``(+-x0, 0)``).

    Two lobes at ``x = +-x0`` under a momentum Gaussian, plus an
    oscillating interference band along ``x = 0`` with full amplitude 2
    and fringe ``cos(2 p x0 / hbar)``.
    """
    hbar = units.hbar
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    n1sq = 1.0 / (2 * (1 + math.exp(-(x0**2) / (2 * sigma**2))))
    env = np.exp(-2 * sigma**2 * p**2 / hbar**2)
    return (n1sq / (math.pi * hbar)) * env * (
        np.exp(-((x - x0) ** 2) / (2 * sigma**2))
        + np.exp(-((x + x0) ** 2) / (2 * sigma**2))
        + 2 * np.exp(-(x**2) / (2 * sigma**2)) * np.cos(2 * p * x0 / hbar)
    )


def wc2_closed(x, p, p0: float, sigma: float, units: UnitSystem = UnitSystem()):
    """Wigner function of the momentum cat (packets at ``(0, +-p0)``)."""
    hbar = units.hbar
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    n2sq = 1.0 / (2 * (1 + math.exp(-2 * p0**2 * sigma**2 / hbar**2)))
    env = np.exp(-(x**2) / (2 * sigma**2))
    return (n2sq / (math.pi * hbar)) * env * (
        np.exp(-2 * sigma**2 * (p - p0) ** 2 / hbar**2)
        + np.exp(-2 * sigma**2 * (p + p0) ** 2 / hbar**2)
        + 2 * np.exp(-2 * sigma**2 * p**2 / hbar**2) * np.cos(2 * p0 * x / hbar)
    )


def wrho_closed(x, p, x0: float, p0: float, sigma: float, units: UnitSystem = UnitSystem()):
    """Wigner function of the even mixture of position and momentum cats."""
    return 0.5 * (wc1_closed(x, p, x0, sigma, units) + wc2_closed(x, p, p0, sigma, units))


def wrho_perturbed(
    x,
    p,
    delta1: float,
    delta2: float,
    x0: float,
    p0: float,
    sigma: float,
    units: UnitSystem = UnitSystem(),
):
    """Mixed-cat Wigner function displaced by ``(delta1, delta2)``.

    ``delta1`` boosts the state along momentum and ``delta2`` shifts it
    along position, i.e. the perturbed function is the rigid translate
    ``W(x + delta2, p + delta1)``.
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    return wrho_closed(x + delta2, p + delta1, x0, p0, sigma, units)


def characteristic_of_cat(
    state: CatSpec | MixedSpec,
    Q,
    P,
    units: UnitSystem = UnitSystem(),
) -> np.ndarray:
    """Characteristic function ``Wt(Q, P)`` of a packet superposition.

    Evaluates ``int psi(x - Q/2) psi*(x + Q/2) exp(-i x P / hbar) dx``
    in closed form per component pair.  ``Q`` and ``P`` broadcast
    against each other; the result is complex with ``Wt(0,0) = 1``.
    """
    hbar = units.hbar
    Q = np.asarray(Q, dtype=float)
    P = np.asarray(P, dtype=float)
    out = np.zeros(np.broadcast(Q, P).shape, dtype=complex)
    for prob, cat in _branches(state):
        acc = np.zeros_like(out)
        for j, cj in enumerate(cat.components):
            for k, ck in enumerate(cat.components):
                sj2, sk2 = cj.sigma**2, ck.sigma**2
                alpha = 1 / (4 * sj2) + 1 / (4 * sk2)
                beta = (
                    (cj.x0 + Q / 2) / (2 * sj2)
                    + (ck.x0 - Q / 2) / (2 * sk2)
                    + 1j * (cj.p0 - ck.p0 - P) / hbar
                )
                gamma = (
                    -((cj.x0 + Q / 2) ** 2) / (4 * sj2)
                    - ((ck.x0 - Q / 2) ** 2) / (4 * sk2)
                    - 1j * (cj.p0 + ck.p0) * Q / (2 * hbar)
                    + 1j * (cj.phase - ck.phase)
                )
                weight = cat.coefficients[j] * np.conj(cat.coefficients[k])
                acc += weight * _pair_front(cj, ck) * math.sqrt(math.pi / alpha) * np.exp(
                    beta**2 / (4 * alpha) + gamma
                )
        out += prob * cat.norm**2 * acc
    return out


def char_cat_position(Q, P, x0: float, sigma: float, units: UnitSystem = UnitSystem()):
    """Characteristic function of the position cat, explicit form.

    Lobes map to an oscillating term at the origin and the interference
    band maps to displaced Gaussians at ``Q = +-2 x0`` — the mirror
    image of the roles they play in the Wigner function.
    """
    hbar = units.hbar
    Q = np.asarray(Q, dtype=float)
    P = np.asarray(P, dtype=float)
    n1sq = 1.0 / (2 * (1 + math.exp(-(x0**2) / (2 * sigma**2))))
    return n1sq * np.exp(-(sigma**2) * P**2 / (2 * hbar**2)) * (
        2 * np.cos(x0 * P / hbar) * np.exp(-(Q**2) / (8 * sigma**2))
        + np.exp(-((Q - 2 * x0) ** 2) / (8 * sigma**2))
        + np.exp(-((Q + 2 * x0) ** 2) / (8 * sigma**2))
    )


def char_cat_momentum(Q, P, p0: float, sigma: float, units: UnitSystem = UnitSystem()):
    """Characteristic function of the momentum cat, explicit form."""
    hbar = units.hbar
    Q = np.asarray(Q, dtype=float)
    P = np.asarray(P, dtype=float)
    n2sq = 1.0 / (2 * (1 + math.exp(-2 * p0**2 * sigma**2 / hbar**2)))
    return n2sq * np.exp(-(Q**2) / (8 * sigma**2)) * (
        2 * np.cos(p0 * Q / hbar) * np.exp(-(sigma**2) * P**2 / (2 * hbar**2))
        + np.exp(-(sigma**2) * (P - 2 * p0) ** 2 / (2 * hbar**2))
        + np.exp(-(sigma**2) * (P + 2 * p0) ** 2 / (2 * hbar**2))
    )


def wigner_of_fock(
    state: FockVector,
    grid: PhaseSpaceGrid,
    sigma_ref: float,
    units: UnitSystem = UnitSystem(),
    max_cutoff: int = 128,
) -> WignerField:
    """Wigner function of a number-basis state.

    The wave function is synthesized on a chord grid by the oscillator
    eigenfunction recursion (reference width ``sigma_ref``), then the
    defining integral is evaluated the same way as for packet states.

    Parameters
    ----------
    state : FockVector
    grid : PhaseSpaceGrid
    sigma_ref : float
        Ground-state position width of the oscillator basis.
    units : UnitSystem
    max_cutoff : int
        Guard against accidentally huge bases.
    """
    if state.cutoff > max_cutoff:
        raise ValueError(f"cutoff {state.cutoff} exceeds limit {max_cutoff}")
    if sigma_ref <= 0:
        raise ValueError(f"sigma_ref must be positive, got {sigma_ref}")
    hbar = units.hbar
    nmax = state.cutoff
    scale = math.sqrt(2 * nmax + 1) + 11.0
    x_r = sigma_ref * math.sqrt(2) * scale
    p_r = hbar * scale / (sigma_ref * math.sqrt(2))

    xs, ps = grid.xs(), grid.ps()
    p_absmax = float(np.max(np.abs(ps)))
    h = 2 * math.pi * hbar / (p_absmax + p_r)
    ny = max(int(math.ceil(4 * x_r / h)) + 1, 16)
    ys = np.linspace(-2 * x_r, 2 * x_r, ny)
    step = ys[1] - ys[0]

    def psi_on(u: np.ndarray) -> np.ndarray:
        xi = u / (sigma_ref * math.sqrt(2))
        prev = np.zeros_like(u)
        cur = (2 * math.pi * sigma_ref**2) ** -0.25 * np.exp(-(xi**2) / 2)
        out = state.amplitudes[0] * cur
        for n in range(nmax):
            prev, cur = cur, xi * math.sqrt(2 / (n + 1)) * cur - math.sqrt(n / (n + 1)) * prev
            out = out + state.amplitudes[n + 1] * cur
        return out

    kern = psi_on(xs[:, None] - ys[None, :] / 2) * np.conj(psi_on(xs[:, None] + ys[None, :] / 2))
    w = np.full(ny, step)
    w[0] = w[-1] = step / 2
    tone = w[:, None] * np.exp(1j * np.outer(ys, ps) / hbar)
    values = (kern @ tone).real / (2 * math.pi * hbar)
    return WignerField(grid=grid, values=values)


def check_coverage(
    state: CatSpec | MixedSpec,
    grid: PhaseSpaceGrid,
    units: UnitSystem = UnitSystem(),
    n_sigma: float = 6.1,
) -> None:
    """Raise :class:`CoverageError` unless the window contains every
    component center with an ``n_sigma`` margin along both axes."""
    for _, cat in _branches(state):
        for comp in cat.components:
            x_lo, x_hi = comp.x0 - n_sigma * comp.sigma, comp.x0 + n_sigma * comp.sigma
            p_half = n_sigma * units.hbar / (2 * comp.sigma)
            p_lo, p_hi = comp.p0 - p_half, comp.p0 + p_half
            if x_lo < grid.x_min or x_hi > grid.x_max:
                raise CoverageError(
                    f"x window [{grid.x_min}, {grid.x_max}] misses component support "
                    f"[{x_lo:.3f}, {x_hi:.3f}]"
                )
            if p_lo < grid.p_min or p_hi > grid.p_max:
                raise CoverageError(
                    f"p window [{grid.p_min}, {grid.p_max}] misses component support "
                    f"[{p_lo:.3f}, {p_hi:.3f}]"
                )


def compare_closed_vs_oracle(
    state: CatSpec | MixedSpec,
    grid: PhaseSpaceGrid,
    units: UnitSystem = UnitSystem(),
    quadrature: Quadrature = Quadrature(),
) -> dict:
    """Compare the closed-form and quadrature routes on a grid.

    Returns
    -------
    dict
        ``max_abs_diff``, ``l2_diff`` (integral-weighted), location of
        the worst point, and ``max_abs_value`` of the closed form for
        scale.
    """
    closed = wigner_closed(state, grid, units)
    oracle = wigner_transform(state, grid, units, quadrature)
    diff = np.abs(closed.values - oracle.values)
    i, j = np.unravel_index(int(np.argmax(diff)), diff.shape)
    return {
        "max_abs_diff": float(diff.max()),
        "l2_diff": float(math.sqrt(float((diff**2).sum()) * grid.dx * grid.dp)),
        "x_at_max": float(grid.xs()[i]),
        "p_at_max": float(grid.ps()[j]),
        "max_abs_value": float(np.abs(closed.values).max()),
    }
