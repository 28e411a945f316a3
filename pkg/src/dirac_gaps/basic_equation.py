"""Roots of the scalar equation (z - alpha_n(z))^2 = beta_n^+(z) beta_n^-(z) in |z| < 1/4.

The two roots come from the split fixed-point maps

    zeta^+(z) = alpha(z) + beta^+(z) sqrt(eta(z)),   zeta^-(z) = alpha(z) - beta^+(z) sqrt(eta(z)),

with eta = beta^- / beta^+ and one continuous branch of the square root, fixed
at z = 0 by the principal argument of eta(0).  All products of beta values are
formed in the log domain, so factorially small coefficients never underflow.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .coefficients import CoefficientValue, LogComplex, eval_S
from .errors import BranchTrackingError, SolverError
from .potentials import FourierPotential

DISC = 0.25
STEP_TOL = 1e-14
MAX_ITER = 200
NONCONTRACT_RUN = 5
FD_STEP = 1e-5

Evaluator = Callable[[complex], CoefficientValue]


# ----------------------------------------------------------------------------
# square-root branch

def _unwrap_step(prev: float, raw: float) -> tuple[float, float]:
    """Continue the phase `prev` to the representative of `raw` nearest to it."""
    d = (raw - prev + math.pi) % (2 * math.pi) - math.pi
    return prev + d, abs(d)


def sqrt_branch(eta, max_jump: float = math.pi, max_excursion: float = math.pi) -> np.ndarray:
    """sqrt(|eta|) e^{i phi/2} with phi unwrapped continuously from the first sample.

    Raises BranchTrackingError when eta vanishes, when consecutive samples differ
    in phase by max_jump or more (the path is too coarse to tell a crossing of 0
    from a smooth turn), or when the phase wanders max_excursion or more away from
    its start (the path encircles 0, so no single branch covers it).
    """
    eta = np.asarray(eta, dtype=complex).ravel()
    if eta.size == 0:
        return eta
    if np.any(eta == 0):
        raise BranchTrackingError("eta vanishes on the path")
    raw = np.angle(eta)
    phi = np.empty_like(raw)
    phi[0] = raw[0]
    for k in range(1, len(raw)):
        phi[k], jump = _unwrap_step(phi[k - 1], raw[k])
        if jump >= max_jump:
            raise BranchTrackingError(f"phase jump {jump:.3g} at sample {k}")
        if abs(phi[k] - phi[0]) >= max_excursion:
            raise BranchTrackingError(f"phase excursion reached {abs(phi[k] - phi[0]):.3g} at sample {k}")
    return np.sqrt(np.abs(eta)) * np.exp(0.5j * phi)


class _Branch:
    """Incremental version of sqrt_branch for eta held as LogComplex."""

    def __init__(self, phi0: float):
        self.phi0 = phi0
        self.phi = phi0

    def advance(self, eta: LogComplex) -> float:
        if eta.is_zero:
            raise BranchTrackingError("eta vanishes on the iteration path")
        phi, jump = _unwrap_step(self.phi, eta.phase)
        if jump >= math.pi or abs(phi - self.phi0) >= math.pi:
            raise BranchTrackingError(f"square-root branch lost (phase {phi:.3g} from base {self.phi0:.3g})")
        self.phi = phi
        return phi


def _eta(c: CoefficientValue) -> LogComplex:
    return c.beta_minus_log / c.beta_plus_log


def _s(c: CoefficientValue, phi: float) -> complex:
    """beta^+ sqrt(eta) on the branch with arg eta = phi."""
    bp, bm = c.beta_plus_log, c.beta_minus_log
    if bp.is_zero or bm.is_zero:
        return 0j
    return LogComplex(0.5 * (bp.log_magnitude + bm.log_magnitude), bp.phase + 0.5 * phi).to_complex()


# ----------------------------------------------------------------------------
# result type

@dataclass
class BasicRoots:
    n: int
    z1: complex
    z2: complex
    iterations: tuple[int, int]
    contraction: tuple[float, float]          # local Lipschitz constants of zeta^+, zeta^- at the roots
    phi0: float                               # branch base: arg eta(0)
    phi: tuple[float, float]                  # continued phase of eta at z1, z2
    log_abs_eta: tuple[float, float]          # log |eta(z1)|, log |eta(z2)|
    residuals: tuple[float, float]            # |(z - alpha)^2 - beta+ beta-| / max(1, |beta+ beta-|)
    method: str                               # fixed-point | newton | degenerate
    root_count: int                           # zeros of F in |z| < 1/4 by the argument principle
    gap: complex                              # z1 - z2 without cancellation
    coeffs: tuple[CoefficientValue, CoefficientValue] = field(repr=False, default=None)

    @property
    def gamma(self) -> float:
        return abs(self.gap)

    @property
    def psi(self) -> float:
        return 0.5 * (self.phi[0] - self.phi[1])

    @property
    def degenerate(self) -> bool:
        return self.method == "degenerate"

    def eigenvalues(self) -> tuple[complex, complex]:
        return self.n + self.z1, self.n + self.z2

    def to_dict(self) -> dict:
        def c(z):
            return [z.real, z.imag]
        return {
            "n": self.n, "z1": c(self.z1), "z2": c(self.z2), "gap": abs(self.gap),
            "iterations": list(self.iterations), "contraction": list(self.contraction),
            "phi0": self.phi0, "phi": list(self.phi), "psi": self.psi,
            "log_abs_eta": [x if math.isfinite(x) else None for x in self.log_abs_eta],
            "residuals": list(self.residuals), "method": self.method, "root_count": self.root_count,
        }


# ----------------------------------------------------------------------------
# solver pieces

def _residual(c: CoefficientValue, z: complex) -> float:
    prod = c.beta_plus_log * c.beta_minus_log
    pv = prod.to_complex()
    scale = max(1.0, math.exp(prod.log_magnitude) if not prod.is_zero else 0.0)
    return abs((z - c.alpha) ** 2 - pv) / scale


def _F(c: CoefficientValue, z: complex) -> complex:
    return (z - c.alpha) ** 2 - (c.beta_plus_log * c.beta_minus_log).to_complex()


def _fixed_point(ev: Evaluator, sign: int, phi0: float):
    """Iterate zeta^sign from 0. Returns (z, iterations, coeff, phi) or None on non-contraction."""
    br = _Branch(phi0)
    z = 0j
    c = ev(z)
    br.advance(_eta(c))
    prev_step = math.inf
    bad = 0
    for it in range(1, MAX_ITER + 1):
        z_new = c.alpha + sign * _s(c, br.phi)
        if abs(z_new) >= DISC:
            return None
        step = abs(z_new - z)
        z = z_new
        c = ev(z)
        br.advance(_eta(c))
        if step < STEP_TOL:
            return z, it, c, br.phi
        bad = bad + 1 if step >= prev_step else 0
        if bad >= NONCONTRACT_RUN:
            return None
        prev_step = step
    return z, MAX_ITER, c, br.phi


def _fixed_point_alpha(ev: Evaluator):
    z = 0j
    prev_step, bad = math.inf, 0
    for it in range(1, MAX_ITER + 1):
        c = ev(z)
        z_new = c.alpha
        step = abs(z_new - z)
        z = z_new
        if step < STEP_TOL:
            return z, it
        bad = bad + 1 if step >= prev_step else 0
        if bad >= NONCONTRACT_RUN or abs(z) >= DISC:
            raise SolverError("iteration z = alpha(z) does not contract")
        prev_step = step
    return z, MAX_ITER


def _newton_F(ev: Evaluator, seed: complex, exclude: complex | None = None):
    """Complex Newton on F (optionally deflated by (z - exclude)); derivative by central difference."""
    def g(z):
        f = _F(ev(z), z)
        return f / (z - exclude) if exclude is not None else f

    z = complex(seed)
    for _ in range(80):
        f = g(z)
        df = (g(z + FD_STEP) - g(z - FD_STEP)) / (2 * FD_STEP)
        if df == 0:
            return None
        step = f / df
        z -= step
        if abs(z) >= DISC:
            return None
        if abs(step) < STEP_TOL:
            return z
    return None


def _phase_at(ev: Evaluator, phi0: float, z: complex) -> tuple[CoefficientValue, float]:
    """Continue the branch along the straight segment 0 -> z."""
    br = _Branch(phi0)
    c = None
    for t in np.linspace(0.0, 1.0, 9):
        c = ev(t * z)
        br.advance(_eta(c))
    return c, br.phi


def root_count(ev: Evaluator, radius: float = DISC, points: int = 64) -> int:
    """Winding number of F(z) = (z - alpha)^2 - beta+ beta- around |z| = radius."""
    zs = radius * np.exp(2j * np.pi * np.arange(points + 1) / points)
    vals = np.array([_F(ev(complex(z)), complex(z)) for z in zs])
    if np.any(vals == 0):
        raise SolverError("F vanishes on the counting contour")
    ph = np.unwrap(np.angle(vals))
    return int(round((ph[-1] - ph[0]) / (2 * math.pi)))


def _local_lipschitz(ev: Evaluator, z: complex, phi: float, sign: int, r: float = 1e-3) -> float:
    c0 = ev(z)
    base = c0.alpha + sign * _s(c0, phi)
    worst = 0.0
    for k in range(8):
        w = z + r * cmath.exp(2j * math.pi * k / 8)
        c = ev(w)
        br = _Branch(phi)
        ph = br.advance(_eta(c)) if not (c.beta_plus_log.is_zero or c.beta_minus_log.is_zero) else phi
        worst = max(worst, abs(c.alpha + sign * _s(c, ph) - base) / r)
    return worst


def _alpha_slope(ev: Evaluator, z: complex) -> complex:
    return (ev(z + FD_STEP).alpha - ev(z - FD_STEP).alpha) / (2 * FD_STEP)


# ----------------------------------------------------------------------------
# driver

def solve(n: int, v: FourierPotential, evaluator: Evaluator | None = None,
          tol: float = 1e-12, count_roots: bool = True) -> BasicRoots:
    """Both roots of the basic equation for index n.

    `evaluator(z)` returns the coefficient values at z (default: adaptive series).
    `tol` bounds the accepted relative residual.
    """
    ev: Evaluator = evaluator or (lambda z: eval_S(n, z, v))
    c0 = ev(0j)
    nroots = root_count(ev) if count_roots else -1
    if c0.beta_plus_structural_zero or c0.beta_minus_structural_zero:
        z, it = _fixed_point_alpha(ev)
        c = ev(z)
        r = _residual(c, z)
        if r > tol:
            raise SolverError(f"n={n}: residual {r:.3g} at the double root")
        lip = _local_lipschitz(ev, z, 0.0, 1)
        return BasicRoots(n, z, z, (it, it), (lip, lip), 0.0, (0.0, 0.0),
                          (-math.inf, -math.inf), (r, r), "degenerate", nroots, 0j, (c, c))

    phi0 = _eta(c0).phase
    method = "fixed-point"
    try:
        r1 = _fixed_point(ev, +1, phi0)
        r2 = _fixed_point(ev, -1, phi0)
    except BranchTrackingError:
        r1 = r2 = None
    if r1 is None or r2 is None:
        method = "newton"
        z1 = _newton_F(ev, 0.01 + 0.01j)
        z2 = _newton_F(ev, -0.01 - 0.01j, exclude=z1) if z1 is not None else None
        if z1 is None or z2 is None:
            raise SolverError(f"n={n}: fixed-point and Newton both failed")
        (c1, p1), (c2, p2) = _phase_at(ev, phi0, z1), _phase_at(ev, phi0, z2)
        # label so that z1 solves z = zeta^+(z) on the base branch
        if abs(z1 - c1.alpha - _s(c1, p1)) > abs(z1 - c1.alpha + _s(c1, p1)):
            z1, z2, c1, c2, p1, p2 = z2, z1, c2, c1, p2, p1
        it1 = it2 = 0
    else:
        z1, it1, c1, p1 = r1
        z2, it2, c2, p2 = r2

    res = (_residual(c1, z1), _residual(c2, z2))
    if max(res) > tol:
        raise SolverError(f"n={n}: root residuals {res[0]:.3g}, {res[1]:.3g} exceed {tol:g}")
    # z1 - z2 = alpha(z1) - alpha(z2) + s1 + s2, and alpha(z1) - alpha(z2) ~ alpha'(mid)(z1 - z2)
    s1, s2 = _s(c1, p1), _s(c2, p2)
    gap = (s1 + s2) / (1 - _alpha_slope(ev, 0.5 * (z1 + z2)))
    lip = (_local_lipschitz(ev, z1, p1, +1), _local_lipschitz(ev, z2, p2, -1))
    le = (_eta(c1).log_magnitude, _eta(c2).log_magnitude)
    return BasicRoots(n, z1, z2, (it1, it2), lip, phi0, (p1, p2), le, res, method, nroots, gap, (c1, c2))


def solve_range(v: FourierPotential, ns, tol: float = 1e-12, count_roots: bool = True) -> dict[int, BasicRoots]:
    return {n: solve(n, v, tol=tol, count_roots=count_roots) for n in ns}


# ----------------------------------------------------------------------------
# two-sided gap estimates

@dataclass(frozen=True)
class GapBoundRow:
    n: int
    gamma: float
    beta_sum: float
    upper: float
    lower: float | None
    upper_margin: float
    lower_margin: float | None

    @property
    def upper_ok(self) -> bool:
        return self.upper_margin >= 0

    @property
    def lower_ok(self) -> bool | None:
        return None if self.lower_margin is None else self.lower_margin >= 0


def gap_bounds_report(n: int, gamma: float, coeff_at_zstar: CoefficientValue,
                      c: float | None = None, rel_slack: float = 1e-9) -> GapBoundRow:
    """Check gamma <= 2(|b-| + |b+|) and, given c, gamma >= 2 sqrt(c)/(1 + 4c) (|b-| + |b+|).

    Margins are (bound - gamma) and (gamma - bound); `rel_slack` absorbs rounding
    of gamma relative to the bound's scale.
    """
    bsum = abs(coeff_at_zstar.beta_minus) + abs(coeff_at_zstar.beta_plus)
    upper = 2 * bsum
    slack = rel_slack * bsum
    lower = lower_m = None
    if c is not None:
        lower = 2 * math.sqrt(c) / (1 + 4 * c) * bsum
        lower_m = gamma - lower + slack
    return GapBoundRow(n, gamma, bsum, upper, lower, upper - gamma + slack, lower_m)


__all__ = ["BasicRoots", "GapBoundRow", "solve", "solve_range", "sqrt_branch", "root_count",
           "gap_bounds_report"]
