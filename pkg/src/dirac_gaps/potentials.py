"""Pi-periodic Dirac potentials stored as finite Fourier series.

A potential ``v = [[0, P], [Q, 0]]`` is held through the coefficients of

    P(x) = sum_k p(k) e^{ikx},   Q(x) = sum_k q(k) e^{ikx},   k even.

Everything downstream reads coefficients through :meth:`FourierPotential.pc`
and :meth:`FourierPotential.qc`, which return 0 off the support.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .errors import PotentialParseError


def _normalize(entries: Iterable[tuple[int, complex]], name: str) -> dict[int, complex]:
    out: dict[int, complex] = {}
    for k, c in entries:
        if int(k) != k:
            raise PotentialParseError(f"{name}: index {k!r} is not an integer")
        k = int(k)
        if k % 2:
            raise PotentialParseError(f"{name}: odd index {k} (only even modes allowed)")
        c = complex(c)
        if not (math.isfinite(c.real) and math.isfinite(c.imag)):
            raise PotentialParseError(f"{name}: non-finite coefficient at k={k}")
        out[k] = out.get(k, 0j) + c
    return {k: c for k, c in sorted(out.items()) if c != 0}


@dataclass(frozen=True)
class FourierPotential:
    p: Mapping[int, complex]
    q: Mapping[int, complex]

    def __post_init__(self):
        object.__setattr__(self, "p", MappingProxyType(_normalize(self.p.items(), "P")))
        object.__setattr__(self, "q", MappingProxyType(_normalize(self.q.items(), "Q")))

    def __hash__(self):
        return hash((tuple(self.p.items()), tuple(self.q.items())))

    def __eq__(self, other):
        if not isinstance(other, FourierPotential):
            return NotImplemented
        return dict(self.p) == dict(other.p) and dict(self.q) == dict(other.q)

    def pc(self, k: int) -> complex:
        return self.p.get(k, 0j)

    def qc(self, k: int) -> complex:
        return self.q.get(k, 0j)

    @property
    def support_bound(self) -> int:
        keys = list(self.p) + list(self.q)
        return max((abs(k) for k in keys), default=0)

    @property
    def is_zero(self) -> bool:
        return not self.p and not self.q

    @property
    def max_coefficient(self) -> float:
        vals = list(self.p.values()) + list(self.q.values())
        return max((abs(c) for c in vals), default=0.0)

    def scaled(self, c: complex) -> "FourierPotential":
        """The similar potential v_c: P -> cP, Q -> Q/c."""
        return FourierPotential({k: c * x for k, x in self.p.items()},
                                {k: x / c for k, x in self.q.items()})

    def scale_pq(self, t: complex, s: complex) -> "FourierPotential":
        """(P, Q) -> (tP, sQ)."""
        return FourierPotential({k: t * x for k, x in self.p.items()},
                                {k: s * x for k, x in self.q.items()})

    def adjoint(self) -> "FourierPotential":
        """v* = [[0, conj Q], [conj P, 0]] in coefficient form."""
        return FourierPotential({-k: x.conjugate() for k, x in self.q.items()},
                                {-k: x.conjugate() for k, x in self.p.items()})

    def __add__(self, other: "FourierPotential") -> "FourierPotential":
        p = dict(self.p)
        q = dict(self.q)
        for k, x in other.p.items():
            p[k] = p.get(k, 0j) + x
        for k, x in other.q.items():
            q[k] = q.get(k, 0j) + x
        return FourierPotential(p, q)

    def evaluate(self, x):
        """Return (P(x), Q(x)) for scalar or array x."""
        x = np.asarray(x, dtype=float)
        P = np.zeros(x.shape, dtype=complex)
        Q = np.zeros(x.shape, dtype=complex)
        for k, c in self.p.items():
            P = P + c * np.exp(1j * k * x)
        for k, c in self.q.items():
            Q = Q + c * np.exp(1j * k * x)
        return P, Q


def potential_from_coeffs(entries_p, entries_q) -> FourierPotential:
    """Build a potential from (k, coefficient) lists; duplicate k are summed."""
    return FourierPotential(_normalize(entries_p, "P"), _normalize(entries_q, "Q"))


def zero_potential() -> FourierPotential:
    return FourierPotential({}, {})


def example_c15(a, b, A, B) -> FourierPotential:
    """P = a e^{2ix} + b e^{-2ix},  Q = A e^{2ix} + B e^{-2ix}."""
    return potential_from_coeffs([(2, a), (-2, b)], [(2, A), (-2, B)])


def xt_potential(p_entries, t: float) -> FourierPotential:
    """The X_t potential with the given P and Q = t * conj(P)."""
    p = _normalize(p_entries, "P")
    return FourierPotential(p, {-k: t * c.conjugate() for k, c in p.items()})


def random_trig_potential(rng: np.random.Generator, max_mode: int = 4, n_terms: int = 3,
                          scale: float = 0.2) -> FourierPotential:
    """Random trigonometric polynomial with a few even modes in [-max_mode, max_mode]."""
    modes = np.arange(-max_mode, max_mode + 1, 2)

    def draw():
        ks = rng.choice(modes, size=min(n_terms, len(modes)), replace=False)
        cs = scale * (rng.standard_normal(len(ks)) + 1j * rng.standard_normal(len(ks)))
        return list(zip(ks.tolist(), cs.tolist()))

    return potential_from_coeffs(draw(), draw())


# ----------------------------------------------------------------------------
# symmetry classes

@dataclass(frozen=True)
class SymmetryClass:
    label: str                  # "general" or "X_t"
    t: float | None = None
    residual: float = 0.0
    note: str = ""

    @property
    def is_xt(self) -> bool:
        return self.label == "X_t"


def classify_symmetry(v: FourierPotential, tol: float = 1e-12) -> SymmetryClass:
    """Test q(k) = t conj(p(-k)) for one real t != 0; tol is relative to max |coef|."""
    if v.is_zero:
        return SymmetryClass("general", None, 0.0, "zero potential lies in every X_t")
    keys = sorted(set(v.q) | {-k for k in v.p})
    scale = v.max_coefficient
    # normalized first: squares of tiny coefficients would underflow
    pv = np.array([v.pc(-k).conjugate() for k in keys]) / scale
    qv = np.array([v.qc(k) for k in keys]) / scale
    denom = float(np.vdot(pv, pv).real)
    if denom == 0.0:
        return SymmetryClass("general", None, float(np.max(np.abs(qv))) * scale, "P is zero, Q is not")
    t = float(np.vdot(pv, qv).real / denom)
    residual = float(np.max(np.abs(qv - t * pv))) * scale
    if t != 0.0 and residual <= tol * scale:
        return SymmetryClass("X_t", t, residual)
    return SymmetryClass("general", None, residual)


# ----------------------------------------------------------------------------
# weights and weighted norms

WEIGHT_KINDS = ("sobolev", "gevrey", "abel", "custom-table")


@dataclass(frozen=True)
class Weight:
    kind: str
    params: tuple[float, ...] = ()
    table: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in WEIGHT_KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind == "custom-table":
            tab = {int(k): float(x) for k, x in self.table.items()}
            for k, x in tab.items():
                if -k in tab and tab[-k] != x:
                    raise ValueError(f"custom weight not symmetric at k={k}")
                if not x > 0:
                    raise ValueError(f"weight must be positive (k={k})")
            object.__setattr__(self, "table", MappingProxyType(tab))
        elif self.kind == "sobolev" and len(self.params) != 1:
            raise ValueError("sobolev weight takes one parameter a")
        elif self.kind == "gevrey":
            if len(self.params) != 2:
                raise ValueError("gevrey weight takes parameters (b, gamma)")
            b, g = self.params
            if not (b > 0 and 0 < g < 1):
                raise ValueError("gevrey weight needs b > 0 and 0 < gamma < 1")
        elif self.kind == "abel":
            if len(self.params) != 1 or not self.params[0] > 0:
                raise ValueError("abel weight takes one parameter A > 0")

    @classmethod
    def sobolev(cls, a: float) -> "Weight":
        return cls("sobolev", (float(a),))

    @classmethod
    def gevrey(cls, b: float, gamma: float) -> "Weight":
        return cls("gevrey", (float(b), float(gamma)))

    @classmethod
    def abel(cls, A: float) -> "Weight":
        return cls("abel", (float(A),))

    @classmethod
    def custom(cls, table: Mapping[int, float]) -> "Weight":
        return cls("custom-table", (), dict(table))

    @classmethod
    def parse(cls, text: str) -> "Weight":
        """``abel:1``, ``sobolev:2``, ``gevrey:1,0.5``."""
        kind, _, rest = text.partition(":")
        kind = kind.strip().lower()
        params = tuple(float(x) for x in rest.split(",") if x.strip())
        return cls(kind, params)

    def __call__(self, k: int) -> float:
        k = abs(int(k))
        if self.kind == "sobolev":
            return 1.0 if k == 0 else float(k) ** self.params[0]
        if self.kind == "gevrey":
            b, g = self.params
            return math.exp(b * k ** g)
        if self.kind == "abel":
            return math.exp(self.params[0] * k)
        if k in self.table:
            return self.table[k]
        if -k in self.table:
            return self.table[-k]
        if k == 0:
            return 1.0
        raise KeyError(f"custom weight has no value at k={k}")

    def describe(self) -> str:
        if self.kind == "custom-table":
            return "custom-table"
        return f"{self.kind}:{','.join(repr(x) for x in self.params)}"


def weighted_norm(seq: Mapping[int, complex], w: Weight) -> float:
    """(sum_k |seq_k|^2 w(k)^2)^(1/2) for a finitely supported sequence."""
    return math.sqrt(sum(abs(c) ** 2 * w(k) ** 2 for k, c in seq.items()))


def potential_norm(v: FourierPotential, w: Weight) -> float:
    """H_D(w) norm: max of the norms of P and Q indexed by half-mode k (coefficient of e^{i2kx})."""
    hp = {k // 2: c for k, c in v.p.items()}
    hq = {k // 2: c for k, c in v.q.items()}
    return max(weighted_norm(hp, w), weighted_norm(hq, w))


def check_submultiplicative(w: Weight, range_: int):
    """Exhaustive check of w(k+m) <= w(k) w(m) for |k|, |m| <= range_.

    Returns (ok, worst_ratio, worst_pair). For custom tables pairs whose sum
    falls outside the table are skipped.
    """
    if range_ < 1:
        raise ValueError("range must be >= 1")
    worst, pair = -math.inf, None
    for k in range(-range_, range_ + 1):
        for m in range(-range_, range_ + 1):
            try:
                r = w(k + m) / (w(k) * w(m))
            except KeyError:
                continue
            if r > worst:
                worst, pair = r, (k, m)
    return worst <= 1.0 + 1e-12, worst, pair


# ----------------------------------------------------------------------------
# potential-spec text format

def _parse_complex(tok: str) -> complex:
    try:
        return complex(tok[:-1] + "j" if tok.endswith("i") else tok)
    except ValueError as exc:
        raise PotentialParseError(f"cannot read number {tok!r}") from exc


PRESETS = {"zero": 0, "example-c15": 4}


def preset_potential(name: str, params) -> FourierPotential:
    if name not in PRESETS:
        raise PotentialParseError(f"unknown preset {name!r} (known: {', '.join(PRESETS)})")
    if len(params) != PRESETS[name]:
        raise PotentialParseError(f"preset {name} takes {PRESETS[name]} parameters, got {len(params)}")
    vals = [_parse_complex(str(x)) for x in params]
    if name == "zero":
        return zero_potential()
    return example_c15(*vals)


def parse_potential_text(text: str) -> FourierPotential:
    """Parse ``P k re im`` / ``Q k re im`` lines, or a single preset line.

    Blank lines and ``#`` comments are ignored.
    """
    p, q, preset = [], [], None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        head = toks[0]
        if head in ("P", "Q"):
            if preset is not None:
                raise PotentialParseError(f"line {lineno}: preset must be the only entry")
            if len(toks) != 4:
                raise PotentialParseError(f"line {lineno}: expected '{head} k re im'")
            try:
                k = int(toks[1])
                c = complex(float(toks[2]), float(toks[3]))
            except ValueError as exc:
                raise PotentialParseError(f"line {lineno}: {exc}") from exc
            if k % 2:
                raise PotentialParseError(f"line {lineno}: odd index {k} (only even modes allowed)")
            (p if head == "P" else q).append((k, c))
        elif head.removeprefix("preset:") in PRESETS:
            if preset is not None or p or q:
                raise PotentialParseError(f"line {lineno}: preset must be the only entry")
            preset = preset_potential(head.removeprefix("preset:"), toks[1:])
        else:
            raise PotentialParseError(f"line {lineno}: unrecognized entry {head!r}")
    if preset is not None:
        return preset
    return potential_from_coeffs(p, q)


def load_potential(tokens) -> FourierPotential:
    """Resolve CLI/config tokens: ``preset:NAME args...`` or a single file path."""
    tokens = [str(t) for t in tokens]
    if not tokens:
        raise PotentialParseError("no potential given")
    if tokens[0].startswith("preset:"):
        return preset_potential(tokens[0][len("preset:"):], tokens[1:])
    if len(tokens) != 1:
        raise PotentialParseError(f"expected one potential file, got {tokens}")
    path = Path(tokens[0])
    try:
        text = path.read_text()
    except OSError as exc:
        raise PotentialParseError(f"cannot read potential file {path}: {exc.strerror}") from exc
    return parse_potential_text(text)


def format_potential(v: FourierPotential) -> str:
    lines = [f"P {k} {c.real!r} {c.imag!r}" for k, c in v.p.items()]
    lines += [f"Q {k} {c.real!r} {c.imag!r}" for k, c in v.q.items()]
    return "\n".join(lines) + "\n"
