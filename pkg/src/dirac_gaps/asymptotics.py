"""Leading-order asymptotics of beta_n^pm(0) for the two-mode example and the correction maps Phi_N, A_N.

For P = a e^{2ix} + b e^{-2ix}, Q = A e^{2ix} + B e^{-2ix} and odd n >= 1,

    beta_n^+(0) ~ A^{(n+1)/2} a^{(n-1)/2} 4^{-n+1} / ((n-1)/2)!^2,
    beta_n^-(0) ~ b^{(n+1)/2} B^{(n-1)/2} 4^{-n+1} / ((n-1)/2)!^2,

evaluated here with log-gamma so that large n never underflows.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .coefficients import CoefficientValue, LogComplex, eval_S
from .errors import MissingSpectralData
from .potentials import FourierPotential, SymmetryClass, classify_symmetry


def _log_power(x: complex, e: int) -> LogComplex:
    if e == 0:
        return LogComplex(0.0, 0.0)
    if x == 0:
        return LogComplex.zero()
    return LogComplex(e * math.log(abs(x)), e * cmath.phase(x))


def closed_form_beta(n: int, a: complex, b: complex, A: complex, B: complex) -> tuple[LogComplex, LogComplex]:
    """Leading terms (beta_n^+(0), beta_n^-(0)) for odd n >= 1, as LogComplex."""
    if n % 2 == 0 or n < 1:
        raise ValueError(f"closed form needs odd n >= 1, got {n}")
    if 0 in (a, b, A, B):
        raise ValueError("a, b, A, B must be nonzero")
    h = (n - 1) // 2
    common = LogComplex(-(n - 1) * math.log(4.0) - 2 * math.lgamma(h + 1), 0.0)
    plus = _log_power(A, h + 1) * _log_power(a, h) * common
    minus = _log_power(b, h + 1) * _log_power(B, h) * common
    return plus, minus


@dataclass(frozen=True)
class AsymptoticsRow:
    n: int
    log10_beta_plus: float
    log10_beta_minus: float
    log10_closed_plus: float
    log10_closed_minus: float
    ratio_plus: complex             # computed / closed form
    ratio_minus: complex

    @property
    def deviation(self) -> float:
        return max(abs(self.ratio_plus - 1), abs(self.ratio_minus - 1))


@dataclass
class AsymptoticsTable:
    params: tuple[complex, complex, complex, complex]
    rows: list[AsymptoticsRow]
    envelope: list[float]           # running max of the deviation from the right
    fit_exponent: float | None      # slope of log envelope against log n
    envelope_decreasing: bool


def _ratio(num: LogComplex, den: LogComplex) -> complex:
    return (num / den).to_complex()


def compare_asymptotics(a: complex, b: complex, A: complex, B: complex, ns,
                        evaluator: Callable[[int, FourierPotential], CoefficientValue] | None = None
                        ) -> AsymptoticsTable:
    """Computed beta_n^pm(0) against the closed forms over odd n."""
    from .potentials import example_c15

    v = example_c15(a, b, A, B)
    ev = evaluator or (lambda n, w: eval_S(n, 0j, w))
    rows = []
    for n in sorted(ns):
        if n % 2 == 0:
            raise ValueError(f"odd n expected, got {n}")
        c = ev(n, v)
        cp, cm = closed_form_beta(n, a, b, A, B)
        rows.append(AsymptoticsRow(n, c.beta_plus_log.log10_abs, c.beta_minus_log.log10_abs,
                                   cp.log10_abs, cm.log10_abs,
                                   _ratio(c.beta_plus_log, cp), _ratio(c.beta_minus_log, cm)))
    dev = [r.deviation for r in rows]
    env = list(np.maximum.accumulate(np.array(dev)[::-1])[::-1]) if dev else []
    slope = None
    pos = [(r.n, e) for r, e in zip(rows, env) if e > 0]
    if len(pos) >= 3:
        x = np.log([p[0] for p in pos])
        y = np.log([p[1] for p in pos])
        slope = float(np.polyfit(x, y, 1)[0])
    decreasing = all(env[i + 1] <= env[i] for i in range(len(env) - 1))
    return AsymptoticsTable((a, b, A, B), rows, [float(e) for e in env], slope, decreasing)


# ----------------------------------------------------------------------------
# correction maps

@dataclass
class MapResult:
    N: int
    nmax: int
    phi: FourierPotential = field(repr=False)
    a_of_v: FourierPotential = field(repr=False)
    max_correction: float
    truncated_beyond: int           # modes with |n| > nmax are set to zero

    def symmetry(self, tol: float = 1e-10) -> SymmetryClass:
        return classify_symmetry(self.a_of_v, tol)


def zstars_from_basic_equation(v: FourierPotential, ns) -> dict[int, complex]:
    from .basic_equation import solve

    out = {}
    for n in ns:
        r = solve(n, v, count_roots=False)
        out[n] = 0.5 * (r.z1 + r.z2)
    return out


def phi_map(v: FourierPotential, N: int, nmax: int, zstar: dict[int, complex],
            evaluator: Callable[[int, complex], CoefficientValue] | None = None) -> MapResult:
    """Phi_N replaces p(-2n) by beta_n^-(z_n^*) and q(2n) by beta_n^+(z_n^*) for N < |n| <= nmax."""
    need = [n for n in range(-nmax, nmax + 1) if abs(n) > N]
    missing = [n for n in need if n not in zstar]
    if missing:
        raise MissingSpectralData(missing)
    ev = evaluator or (lambda n, z: eval_S(n, z, v))
    dp, dq = [], []
    for n in need:
        c = ev(n, zstar[n])
        dp.append((-2 * n, c.beta_minus - v.pc(-2 * n)))
        dq.append((2 * n, c.beta_plus - v.qc(2 * n)))
    phi = FourierPotential(dict((k, x) for k, x in dp if x != 0), dict((k, x) for k, x in dq if x != 0))
    biggest = max([abs(x) for _, x in dp + dq], default=0.0)
    return MapResult(N, nmax, phi, v + phi, biggest, nmax)


__all__ = ["closed_form_beta", "compare_asymptotics", "AsymptoticsTable", "AsymptoticsRow",
           "MapResult", "phi_map", "zstars_from_basic_equation"]
