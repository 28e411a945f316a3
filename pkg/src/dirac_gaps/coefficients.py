"""Lyapunov-Schmidt coefficient series alpha_n(z), beta_n^+(z), beta_n^-(z).

With D_j = 1/(n - j + z) on the window J = {j = n mod 2, j != n, |j| <= |n| + 2 buf},
Hankel blocks Phat[j, j'] = p(-j-j'), Qhat[j, j'] = q(j+j') and boundary vectors
qv_j = q(n+j), pv_j = p(-n-j), the series terms are

    S11_{2v+1} = pv . D (Qhat D Phat D)^v qv
    S22_{2v+1} = qv . D (Phat D Qhat D)^v pv
    S21_{2v}   = qv . D (Phat D Qhat D)^(v-1) Phat D qv,   S21_0 = q(2n)
    S12_{2v}   = pv . D (Qhat D Phat D)^(v-1) Qhat D pv,   S12_0 = p(-2n)

and alpha = S11, beta^+ = S21, beta^- = S12.  Two alternating chains started
from D qv and D pv produce all four series; each chain is renormalized per step
and its log-scale carried separately, so factorially small terms never underflow.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .potentials import FourierPotential

REL_STOP = 1e-16
MAX_RADIUS = 0.5


@dataclass(frozen=True)
class LogComplex:
    """m e^{i theta} stored as (log m, theta); log_magnitude = -inf encodes zero."""

    log_magnitude: float
    phase: float = 0.0

    @classmethod
    def from_complex(cls, z: complex) -> "LogComplex":
        if z == 0:
            return cls(-math.inf, 0.0)
        return cls(math.log(abs(z)), math.atan2(z.imag, z.real))

    @classmethod
    def zero(cls) -> "LogComplex":
        return cls(-math.inf, 0.0)

    @property
    def is_zero(self) -> bool:
        return self.log_magnitude == -math.inf

    def to_complex(self) -> complex:
        if self.is_zero:
            return 0j
        return complex(math.exp(self.log_magnitude) * math.cos(self.phase),
                       math.exp(self.log_magnitude) * math.sin(self.phase)) if self.log_magnitude < 709 \
            else complex(math.inf, math.inf)

    @property
    def log10_abs(self) -> float:
        return self.log_magnitude / math.log(10.0)

    def __mul__(self, other: "LogComplex") -> "LogComplex":
        return LogComplex(self.log_magnitude + other.log_magnitude, self.phase + other.phase)

    def __truediv__(self, other: "LogComplex") -> "LogComplex":
        if other.is_zero:
            raise ZeroDivisionError("division by a zero LogComplex")
        return LogComplex(self.log_magnitude - other.log_magnitude, self.phase - other.phase)

    def conjugate(self) -> "LogComplex":
        return LogComplex(self.log_magnitude, -self.phase)

    def sqrt(self) -> "LogComplex":
        return LogComplex(0.5 * self.log_magnitude, 0.5 * self.phase)

    def scale(self, c: complex) -> "LogComplex":
        return self * LogComplex.from_complex(c)


def log_sum(terms) -> LogComplex:
    """Sum of LogComplex terms without leaving the log domain."""
    terms = [t for t in terms if not t.is_zero]
    if not terms:
        return LogComplex.zero()
    ref = max(t.log_magnitude for t in terms)
    acc = sum(complex(math.exp(t.log_magnitude - ref) * math.cos(t.phase),
                      math.exp(t.log_magnitude - ref) * math.sin(t.phase)) for t in terms)
    if acc == 0:
        return LogComplex.zero()
    return LogComplex(ref + math.log(abs(acc)), math.atan2(acc.imag, acc.real))


@dataclass(frozen=True)
class SeriesWindow:
    n: int
    z: complex
    nu_max: int
    window_buf: int

    def __post_init__(self):
        if self.n == 0:
            raise ValueError("n = 0 is not covered by the series")
        if abs(self.z) > MAX_RADIUS + 1e-15:
            raise ValueError(f"|z| = {abs(self.z):.3g} exceeds 1/2")
        if self.window_buf < 0 or self.nu_max < 0:
            raise ValueError("window_buf and nu_max must be non-negative")

    @property
    def indices(self) -> np.ndarray:
        n = self.n
        R = abs(n) + 2 * self.window_buf
        js = np.arange(-R, R + 1)
        return js[(js % 2 == n % 2) & (js != n)]


@dataclass
class CoefficientValue:
    n: int
    z: complex
    nu_max: int
    window_buf: int
    alpha_log: LogComplex
    alpha22_log: LogComplex
    beta_plus_log: LogComplex
    beta_minus_log: LogComplex
    # log10 |term| per order (index = nu); -inf for exactly vanishing orders
    alpha_orders: list[float] = field(repr=False)
    alpha22_orders: list[float] = field(repr=False)
    beta_plus_orders: list[float] = field(repr=False)
    beta_minus_orders: list[float] = field(repr=False)
    # raw per-order terms for identity checks
    terms: dict[str, list[LogComplex]] = field(repr=False)
    tail_ratio: float = 0.0
    converged: bool = True

    @property
    def alpha(self) -> complex:
        return self.alpha_log.to_complex()

    @property
    def alpha22(self) -> complex:
        return self.alpha22_log.to_complex()

    @property
    def beta_plus(self) -> complex:
        return self.beta_plus_log.to_complex()

    @property
    def beta_minus(self) -> complex:
        return self.beta_minus_log.to_complex()

    def value(self, which: str) -> complex:
        return {"alpha": self.alpha, "beta+": self.beta_plus, "beta-": self.beta_minus}[which]

    @property
    def beta_plus_structural_zero(self) -> bool:
        return self.beta_plus_log.is_zero and all(t.is_zero for t in self.terms["S21"])

    @property
    def beta_minus_structural_zero(self) -> bool:
        return self.beta_minus_log.is_zero and all(t.is_zero for t in self.terms["S12"])

    def to_dict(self) -> dict:
        def c(z):
            return [z.real, z.imag]

        def lc(x: LogComplex):
            return {"log10_abs": x.log10_abs if not x.is_zero else None, "phase": x.phase}

        return {
            "n": self.n, "z": c(complex(self.z)), "nu_max": self.nu_max, "window_buf": self.window_buf,
            "alpha": c(self.alpha), "alpha22": c(self.alpha22),
            "beta_plus": c(self.beta_plus), "beta_minus": c(self.beta_minus),
            "alpha_log": lc(self.alpha_log), "beta_plus_log": lc(self.beta_plus_log),
            "beta_minus_log": lc(self.beta_minus_log),
            "orders": {
                "alpha_log10": [_jsonable(x) for x in self.alpha_orders],
                "beta_plus_log10": [_jsonable(x) for x in self.beta_plus_orders],
                "beta_minus_log10": [_jsonable(x) for x in self.beta_minus_orders],
            },
            "tail_ratio": self.tail_ratio, "converged": self.converged,
        }


def _jsonable(x: float):
    return None if x == -math.inf else x


def default_window_buf(v: FourierPotential) -> int:
    return 2 * v.support_bound + 4


def default_nu_max(n: int) -> int:
    return abs(n) + 6


def _window_operators(v: FourierPotential, w: SeriesWindow):
    js = w.indices
    n = w.n
    ssum = js[:, None] + js[None, :]
    Ph = np.zeros(ssum.shape, dtype=complex)
    Qh = np.zeros(ssum.shape, dtype=complex)
    for k, c in v.p.items():
        Ph[ssum == -k] = c
    for k, c in v.q.items():
        Qh[ssum == k] = c
    qv = np.array([v.qc(n + j) for j in js], dtype=complex)
    pv = np.array([v.pc(-n - j) for j in js], dtype=complex)
    D = 1.0 / (n - js + w.z)
    return Ph, Qh, qv, pv, D


class _Chain:
    """Renormalized vector x_k with true value exp(logscale) * x_k."""

    def __init__(self, start: np.ndarray):
        s = float(np.max(np.abs(start))) if start.size else 0.0
        if s == 0.0:
            self.x, self.logscale = start, -math.inf
        else:
            self.x, self.logscale = start / s, math.log(s)

    def step(self, A: np.ndarray, D: np.ndarray):
        if self.logscale == -math.inf:
            return
        y = D * (A @ self.x)
        s = float(np.max(np.abs(y)))
        if s == 0.0:
            self.x, self.logscale = y, -math.inf
        else:
            self.x, self.logscale = y / s, self.logscale + math.log(s)

    def dot(self, row: np.ndarray) -> LogComplex:
        if self.logscale == -math.inf:
            return LogComplex.zero()
        d = complex(row @ self.x)
        if d == 0:
            return LogComplex.zero()
        return LogComplex(math.log(abs(d)) + self.logscale, math.atan2(d.imag, d.real))


def _order_log10(terms):
    return [t.log10_abs if not t.is_zero else -math.inf for t in terms]


def _small_tail(terms, k=3):
    if len(terms) < k + 1:
        return False
    total = log_sum(terms)
    if total.is_zero:
        return all(t.is_zero for t in terms)
    return all(t.is_zero or t.log_magnitude - total.log_magnitude < math.log(REL_STOP)
               for t in terms[-k:])


def _tail_ratio(terms) -> float:
    nz = [t for t in terms if not t.is_zero]
    if len(nz) < 2:
        return 0.0
    return math.exp(nz[-1].log_magnitude - nz[-2].log_magnitude)


def eval_S(n: int, z: complex, v: FourierPotential, nu_max: int | None = None,
           window_buf: int | None = None, adaptive: bool | None = None) -> CoefficientValue:
    """Evaluate alpha_n(z), beta_n^pm(z) by the alternating-product recursion.

    With nu_max omitted the default |n| + 6 orders are summed and the series is
    then extended until three consecutive orders are below 1e-16 relative.
    An explicit nu_max sums exactly orders 0..nu_max.
    """
    if adaptive is None:
        adaptive = nu_max is None
    if nu_max is None:
        nu_max = default_nu_max(n)
    if window_buf is None:
        window_buf = default_window_buf(v)
    w = SeriesWindow(n, complex(z), nu_max, window_buf)
    Ph, Qh, qv, pv, D = _window_operators(v, w)

    t11, t22 = [], []
    t21 = [LogComplex.from_complex(v.qc(2 * n))]
    t12 = [LogComplex.from_complex(v.pc(-2 * n))]
    a = _Chain(D * qv)      # feeds S11 (odd steps) and S21 (even steps)
    b = _Chain(D * pv)      # feeds S22 and S12
    cap = nu_max if not adaptive else 4 * nu_max + 50
    nu = 0
    while True:
        t11.append(a.dot(pv))
        t22.append(b.dot(qv))
        a.step(Ph, D)
        b.step(Qh, D)
        # after one more step the chains carry order 2(nu+1) off-diagonal terms
        t21.append(a.dot(qv))
        t12.append(b.dot(pv))
        a.step(Qh, D)
        b.step(Ph, D)
        nu += 1
        if nu > nu_max - 1 and (not adaptive or nu >= cap or
                                 all(_small_tail(t) for t in (t11, t21, t12))):
            break
    # t21/t12 now hold orders 0..nu, t11/t22 orders 0..nu-1; align both to nu_used
    nu_used = nu
    if not adaptive:
        t21, t12 = t21[:nu_max + 1], t12[:nu_max + 1]
        if len(t11) < nu_max + 1:
            t11.append(a.dot(pv))
            t22.append(b.dot(qv))
        nu_used = nu_max
    else:
        t11.append(a.dot(pv))
        t22.append(b.dot(qv))

    ratios = [_tail_ratio(t) for t in (t11, t21, t12)]
    tail = max(ratios)
    converged = tail < 1.0
    if not converged:
        warnings.warn(f"coefficient series for n={n}, z={z} not contracting (ratio {tail:.3g})",
                      RuntimeWarning, stacklevel=2)
    return CoefficientValue(
        n=n, z=w.z, nu_max=nu_used, window_buf=window_buf,
        alpha_log=log_sum(t11), alpha22_log=log_sum(t22),
        beta_plus_log=log_sum(t21), beta_minus_log=log_sum(t12),
        alpha_orders=_order_log10(t11), alpha22_orders=_order_log10(t22),
        beta_plus_orders=_order_log10(t21), beta_minus_orders=_order_log10(t12),
        terms={"S11": t11, "S22": t22, "S21": t21, "S12": t12},
        tail_ratio=tail, converged=converged,
    )


# ----------------------------------------------------------------------------
# literal nested summation (oracle)

def eval_S_bruteforce(n: int, z: complex, v: FourierPotential, nu_max: int = 3,
                      window_buf: int | None = None) -> CoefficientValue:
    """Direct multi-index summation of the series as written; nu_max <= 3."""
    if nu_max > 3:
        raise ValueError("brute-force summation is limited to nu_max <= 3")
    if window_buf is None:
        window_buf = default_window_buf(v)
    w = SeriesWindow(n, complex(z), nu_max, window_buf)
    js = [int(j) for j in w.indices]
    zz = w.z
    p, q = v.pc, v.qc
    def d(j):
        return 1.0 / (n - j + zz)

    def terms_for(kind, nu):
        # kind in S11 (length 2nu+1), S22 (2nu+1), S21 (2nu), S12 (2nu)
        L = 2 * nu + 1 if kind in ("S11", "S22") else 2 * nu
        if L == 0:
            return q(2 * n) if kind == "S21" else p(-2 * n)
        total = 0j
        for seq in _nonzero_sequences(kind, L, js, n, p, q):
            val = 1 + 0j
            for j in seq:
                val *= d(j)
            val *= _coef_product(kind, seq, n, p, q)
            total += val
        return total

    out = {}
    for kind in ("S11", "S22", "S21", "S12"):
        out[kind] = [LogComplex.from_complex(terms_for(kind, nu)) for nu in range(nu_max + 1)]
    return CoefficientValue(
        n=n, z=zz, nu_max=nu_max, window_buf=window_buf,
        alpha_log=log_sum(out["S11"]), alpha22_log=log_sum(out["S22"]),
        beta_plus_log=log_sum(out["S21"]), beta_minus_log=log_sum(out["S12"]),
        alpha_orders=_order_log10(out["S11"]), alpha22_orders=_order_log10(out["S22"]),
        beta_plus_orders=_order_log10(out["S21"]), beta_minus_orders=_order_log10(out["S12"]),
        terms=out, tail_ratio=max(_tail_ratio(out[k]) for k in ("S11", "S21", "S12")),
    )


def _factor_sequence(kind, seq, n, p, q):
    """Numerator factors of one multi-index term, in the order they are written."""
    L = len(seq)
    if kind == "S11":
        # p(-n-j0) q(j0+j1) p(-j1-j2) ... q(j_{2v}+n)
        f = [p(-n - seq[0])]
        for i in range(L - 1):
            f.append(q(seq[i] + seq[i + 1]) if i % 2 == 0 else p(-seq[i] - seq[i + 1]))
        f.append(q(seq[-1] + n))
    elif kind == "S22":
        # q(n+i0) p(-i0-i1) q(i1+i2) ... p(-i_{2v}-n)
        f = [q(n + seq[0])]
        for i in range(L - 1):
            f.append(p(-seq[i] - seq[i + 1]) if i % 2 == 0 else q(seq[i] + seq[i + 1]))
        f.append(p(-seq[-1] - n))
    elif kind == "S12":
        # p(-n-j1) q(j1+j2) p(-j2-j3) ... p(-j_{2v}-n)
        f = [p(-n - seq[0])]
        for i in range(L - 1):
            f.append(q(seq[i] + seq[i + 1]) if i % 2 == 0 else p(-seq[i] - seq[i + 1]))
        f.append(p(-seq[-1] - n))
    else:
        # q(n+j1) p(-j1-j2) q(j2+j3) ... q(j_{2v}+n)
        f = [q(n + seq[0])]
        for i in range(L - 1):
            f.append(p(-seq[i] - seq[i + 1]) if i % 2 == 0 else q(seq[i] + seq[i + 1]))
        f.append(q(seq[-1] + n))
    return f


def _coef_product(kind, seq, n, p, q):
    val = 1 + 0j
    for c in _factor_sequence(kind, seq, n, p, q):
        val *= c
    return val


def _nonzero_sequences(kind, L, js, n, p, q):
    """All index tuples of length L whose numerator is not identically zero.

    Built left to right: a prefix is extended only while every factor written so
    far is nonzero, which enumerates exactly the nonzero terms of the sum.
    """
    first_p = kind in ("S11", "S12")
    last_p = kind in ("S22", "S12")

    def link(i, a, b):
        # link between positions i and i+1; alternates starting with q if first is p
        use_q = (i % 2 == 0) == first_p
        return q(a + b) if use_q else p(-a - b)

    def rec(prefix):
        if len(prefix) == L:
            last = p(-prefix[-1] - n) if last_p else q(prefix[-1] + n)
            if last != 0:
                yield tuple(prefix)
            return
        for j in js:
            if not prefix:
                f = p(-n - j) if first_p else q(n + j)
            else:
                f = link(len(prefix) - 1, prefix[-1], j)
            if f != 0:
                prefix.append(j)
                yield from rec(prefix)
                prefix.pop()

    yield from rec([])


# ----------------------------------------------------------------------------
# identities

@dataclass
class IdentityReport:
    passed: bool
    checks: int
    failures: list[str]


def _rel_close(a: LogComplex, b: LogComplex, tol: float) -> bool:
    if a.is_zero and b.is_zero:
        return True
    if a.is_zero or b.is_zero:
        return False
    ref = max(a.log_magnitude, b.log_magnitude)
    ca = complex(math.exp(a.log_magnitude - ref) * math.cos(a.phase),
                 math.exp(a.log_magnitude - ref) * math.sin(a.phase))
    cb = complex(math.exp(b.log_magnitude - ref) * math.cos(b.phase),
                 math.exp(b.log_magnitude - ref) * math.sin(b.phase))
    return abs(ca - cb) <= tol


def check_identities(v: FourierPotential, n: int, z: complex, nu_max: int = 3,
                     tol: float = 1e-12, rng: np.random.Generator | None = None,
                     window_buf: int | None = None) -> IdentityReport:
    """Per-order algebraic identities of the series (symmetry, conjugation, scaling)."""
    from .potentials import classify_symmetry

    rng = rng or np.random.default_rng(0)
    if window_buf is None:
        window_buf = default_window_buf(v)
    z = complex(z)
    base = eval_S(n, z, v, nu_max, window_buf)
    failures: list[str] = []
    checks = 0

    def expect(ok, what):
        nonlocal checks
        checks += 1
        if not ok:
            failures.append(what)

    T = base.terms
    for nu in range(nu_max + 1):
        expect(_rel_close(T["S11"][nu], T["S22"][nu], tol), f"S11=S22 at order {2 * nu + 1}")

    # conj S21(n, conj z; p, q) = S12(n, z; conj q, conj p)
    conj_side = eval_S(n, z.conjugate(), v, nu_max, window_buf)
    adj = eval_S(n, z, v.adjoint(), nu_max, window_buf)
    for nu in range(nu_max + 1):
        expect(_rel_close(conj_side.terms["S21"][nu].conjugate(), adj.terms["S12"][nu], tol),
               f"conj(S21(conj z)) = S12(adjoint) at order {2 * nu}")

    t, s = rng.uniform(0.3, 3.0, size=2) * rng.choice([-1.0, 1.0], size=2)
    sc = eval_S(n, z, v.scale_pq(t, s), nu_max, window_buf)
    for nu in range(nu_max + 1):
        expect(_rel_close(sc.terms["S21"][nu], T["S21"][nu].scale(t ** nu * s ** (nu + 1)), tol),
               f"S21 scaling at order {2 * nu}")
        expect(_rel_close(sc.terms["S12"][nu], T["S12"][nu].scale(t ** (nu + 1) * s ** nu), tol),
               f"S12 scaling at order {2 * nu}")
        for key in ("S11", "S22"):
            expect(_rel_close(sc.terms[key][nu], T[key][nu].scale((t * s) ** (nu + 1)), tol),
                   f"{key} scaling at order {2 * nu + 1}")

    cls = classify_symmetry(v)
    if cls.is_xt:
        c = cls.t
        for nu in range(nu_max + 1):
            expect(_rel_close(conj_side.terms["S21"][nu].conjugate(), T["S12"][nu].scale(c), tol),
                   f"conj(S21(conj z)) = c S12 at order {2 * nu} (c={c})")
            for key in ("S11", "S22"):
                expect(_rel_close(T[key][nu].conjugate(), conj_side.terms[key][nu], tol),
                       f"conj({key}(z)) = {key}(conj z) at order {2 * nu + 1}")
    return IdentityReport(not failures, checks, failures)


def derivative_fd(n: int, z: complex, v: FourierPotential, which: str, h: float = 1e-6,
                  **kw) -> complex:
    """Central difference d/dz of alpha, beta+ or beta-."""
    if abs(z) > 0.25 + 1e-15:
        raise ValueError("derivative is taken for |z| <= 1/4")
    if h > 1e-5:
        raise ValueError("step h must be <= 1e-5")
    fp = eval_S(n, complex(z) + h, v, **kw).value(which)
    fm = eval_S(n, complex(z) - h, v, **kw).value(which)
    return (fp - fm) / (2 * h)


# ----------------------------------------------------------------------------
# truncation bound

def tail_energy(v: FourierPotential, m: int) -> float:
    """E_m(r) = (sum_{|k| >= m} r(k)^2)^(1/2), r(k) = max(|p(+-k)|, |q(+-k)|)."""
    ks = {abs(k) for k in list(v.p) + list(v.q)}
    tot = 0.0
    for k in ks:
        if k < m:
            continue
        r = max(abs(v.pc(k)), abs(v.pc(-k)), abs(v.qc(k)), abs(v.qc(-k)))
        # both k and -k contribute to the sum over |k| >= m
        tot += r * r * (1 if k == 0 else 2)
    return math.sqrt(tot)


@dataclass(frozen=True)
class TruncationBound:
    n: int
    tail_energy: float
    bound: float


def truncation_bound(v: FourierPotential, n: int, C: float = 1.0) -> TruncationBound:
    e = tail_energy(v, abs(n))
    return TruncationBound(n, e, C * (e + abs(n) ** -0.5))
