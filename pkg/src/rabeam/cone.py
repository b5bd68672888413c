"""Cone-program intermediate representation and norm-epigraph lowering.

A :class:`ConeProgram` holds real scalar variables, a linear objective to
maximize, linear equalities, nonnegativity constraints on affine
expressions, and standard second-order cone blocks ``||u||_2 <= t``.
Complex decision variables are embedded as (re, im) pairs.

The lowering helpers (:func:`lq_epigraph` and friends) only ever emit
standard SOC blocks; rotated cones ``x <= sqrt(a b)`` are written as
``||(x, (a - b)/2)|| <= (a + b)/2`` on the spot.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .linalg import ExtRational, ExtRationalLike

_owner_ids = itertools.count(1)


class ConeProgramError(ValueError):
    pass


@dataclass(frozen=True)
class VarId:
    index: int
    owner: int

    def _aff(self) -> "AffineExpr":
        return AffineExpr(self.owner, {self.index: 1.0}, 0.0)

    def __add__(self, other):
        return self._aff() + other

    __radd__ = __add__

    def __sub__(self, other):
        return self._aff() - other

    def __rsub__(self, other):
        return (-self._aff()) + other

    def __mul__(self, k):
        return self._aff() * k

    __rmul__ = __mul__

    def __neg__(self):
        return -self._aff()


@dataclass
class AffineExpr:
    """``sum(coef * x[i]) + const`` over one program's variables."""

    owner: int | None
    coefs: dict[int, float] = field(default_factory=dict)
    const: float = 0.0

    def _merge_owner(self, other: "AffineExpr") -> int | None:
        if self.owner is None:
            return other.owner
        if other.owner is not None and other.owner != self.owner:
            raise ConeProgramError("mixing variables from different programs")
        return self.owner

    def __add__(self, other):
        other = aff(other)
        coefs = dict(self.coefs)
        for i, a in other.coefs.items():
            coefs[i] = coefs.get(i, 0.0) + a
        return AffineExpr(self._merge_owner(other), coefs, self.const + other.const)

    __radd__ = __add__

    def __neg__(self):
        return AffineExpr(self.owner, {i: -a for i, a in self.coefs.items()}, -self.const)

    def __sub__(self, other):
        return self + (-aff(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, k):
        k = float(k)
        return AffineExpr(self.owner, {i: k * a for i, a in self.coefs.items()}, k * self.const)

    __rmul__ = __mul__

    def value(self, x: np.ndarray) -> float:
        return float(sum(a * x[i] for i, a in self.coefs.items()) + self.const)


Scalar = Union[VarId, AffineExpr, float, int]


def aff(x: Scalar) -> AffineExpr:
    if isinstance(x, AffineExpr):
        return x
    if isinstance(x, VarId):
        return x._aff()
    if isinstance(x, (int, float, np.floating, np.integer)):
        return AffineExpr(None, {}, float(x))
    raise TypeError(f"cannot use {type(x).__name__} as an affine expression")


def linear_sum(terms: Iterable[tuple[float, VarId]], const: float = 0.0) -> AffineExpr:
    """Build ``sum(coef * var) + const`` without repeated dict copies."""
    coefs: dict[int, float] = {}
    owner = None
    for a, v in terms:
        owner = v.owner if owner is None else owner
        if v.owner != owner:
            raise ConeProgramError("mixing variables from different programs")
        coefs[v.index] = coefs.get(v.index, 0.0) + float(a)
    return AffineExpr(owner, coefs, float(const))


@dataclass(frozen=True)
class ComplexVarRef:
    re: VarId
    im: VarId

    def __post_init__(self):
        if self.re.owner != self.im.owner:
            raise ConeProgramError("re/im parts belong to different programs")


@dataclass
class ComplexAffine:
    re: AffineExpr
    im: AffineExpr


ComplexLike = Union[ComplexVarRef, ComplexAffine]


def _caff(z: ComplexLike) -> ComplexAffine:
    if isinstance(z, ComplexAffine):
        return z
    return ComplexAffine(aff(z.re), aff(z.im))


def complex_combination(C, w: Sequence[ComplexVarRef], const=None) -> list[ComplexAffine]:
    """Rows of ``C @ w + const`` as complex affine expressions.

    With ``C = Cr + j Ci`` and ``w = wr + j wi``:
    ``Re = Cr wr - Ci wi`` and ``Im = Ci wr + Cr wi``.
    """
    C = np.atleast_2d(np.asarray(C, dtype=complex))
    if C.shape[1] != len(w):
        raise ConeProgramError(f"dimension mismatch: {C.shape} against {len(w)} variables")
    const = np.zeros(C.shape[0], dtype=complex) if const is None else np.asarray(const, complex)
    rows = []
    for k in range(C.shape[0]):
        re_terms, im_terms = [], []
        for n, z in enumerate(w):
            c = C[k, n]
            if c == 0:
                continue
            re_terms += [(c.real, z.re), (-c.imag, z.im)]
            im_terms += [(c.imag, z.re), (c.real, z.im)]
        rows.append(ComplexAffine(linear_sum(re_terms, const[k].real),
                                  linear_sum(im_terms, const[k].imag)))
    return rows


def real_inner(g, w: Sequence[ComplexVarRef]) -> AffineExpr:
    """``Re(g^H w)`` as an affine expression: Re(g).wr + Im(g).wi."""
    g = np.asarray(g, dtype=complex)
    terms = []
    for gn, z in zip(g, w):
        terms += [(gn.real, z.re), (gn.imag, z.im)]
    return linear_sum(terms)


@dataclass
class CompiledProgram:
    """Standard form: minimize c.x s.t. A x = b, G x + s = h, s in K.

    K is the nonnegative orthant of size ``l`` followed by the SOC blocks
    of ``soc_dims``. The objective constant and sign flip are kept so the
    maximization value can be reported.
    """

    c: np.ndarray
    G: np.ndarray
    h: np.ndarray
    A: np.ndarray
    b: np.ndarray
    l: int
    soc_dims: list[int]
    obj_const: float


class ConeProgram:
    def __init__(self):
        self._owner = next(_owner_ids)
        self.n = 0
        self.names: list[str | None] = []
        self.objective: AffineExpr = AffineExpr(self._owner)
        self.equalities: list[AffineExpr] = []
        self.nonnegs: list[AffineExpr] = []
        self.socs: list[tuple[AffineExpr, list[AffineExpr]]] = []
        self.frozen = False

    # construction -------------------------------------------------------
    def _mutable(self):
        if self.frozen:
            raise ConeProgramError("program is frozen")

    def var(self, name: str | None = None) -> VarId:
        self._mutable()
        self.names.append(name)
        self.n += 1
        return VarId(self.n - 1, self._owner)

    def complex_var(self, name: str | None = None) -> ComplexVarRef:
        re = self.var(None if name is None else f"{name}.re")
        im = self.var(None if name is None else f"{name}.im")
        return ComplexVarRef(re, im)

    def _check(self, e: AffineExpr) -> AffineExpr:
        if e.owner not in (None, self._owner):
            raise ConeProgramError("expression uses variables of another program")
        for i, a in e.coefs.items():
            if not 0 <= i < self.n:
                raise ConeProgramError(f"dangling variable index {i}")
            if not math.isfinite(a):
                raise ConeProgramError("non-finite coefficient")
        if not math.isfinite(e.const):
            raise ConeProgramError("non-finite constant")
        return e

    def maximize(self, e: Scalar):
        self._mutable()
        self.objective = self._check(aff(e))

    def add_eq(self, e: Scalar):
        """Constrain ``e == 0``."""
        self._mutable()
        self.equalities.append(self._check(aff(e)))

    def add_nonneg(self, e: Scalar):
        """Constrain ``e >= 0``."""
        self._mutable()
        self.nonnegs.append(self._check(aff(e)))

    def add_soc(self, t: Scalar, u: Sequence[Scalar]):
        """Constrain ``||u||_2 <= t``."""
        self._mutable()
        if len(u) < 1:
            raise ConeProgramError("SOC block needs at least one entry in u")
        self.socs.append((self._check(aff(t)), [self._check(aff(x)) for x in u]))

    def freeze(self) -> "ConeProgram":
        if self.n == 0:
            raise ConeProgramError("program has no variables")
        self.frozen = True
        return self

    def copy(self) -> "ConeProgram":
        """Unfrozen copy; existing VarIds stay valid for the copy."""
        other = ConeProgram.__new__(ConeProgram)
        other._owner = self._owner
        other.n = self.n
        other.names = list(self.names)
        other.objective = self.objective
        other.equalities = list(self.equalities)
        other.nonnegs = list(self.nonnegs)
        other.socs = list(self.socs)
        other.frozen = False
        return other

    # lowering -----------------------------------------------------------
    def compile(self) -> CompiledProgram:
        n = self.n
        if n == 0:
            raise ConeProgramError("program has no variables")

        def fill(rows: list[AffineExpr]):
            M = np.zeros((len(rows), n))
            k = np.zeros(len(rows))
            for r, e in enumerate(rows):
                for i, a in e.coefs.items():
                    M[r, i] = a
                k[r] = e.const
            return M, k

        cone_rows = list(self.nonnegs)
        dims = []
        for t, u in self.socs:
            cone_rows.append(t)
            cone_rows.extend(u)
            dims.append(1 + len(u))
        Gneg, h = fill(cone_rows)
        Aeq, beq = fill(self.equalities)
        c = np.zeros(n)
        for i, a in self.objective.coefs.items():
            c[i] = -a
        return CompiledProgram(c=c, G=-Gneg, h=h, A=Aeq, b=-beq, l=len(self.nonnegs),
                               soc_dims=dims, obj_const=self.objective.const)

    # text dump ----------------------------------------------------------
    def _fmt(self, e: AffineExpr) -> str:
        parts = [f"{a:+.17g}*x{i}" for i, a in sorted(e.coefs.items())]
        parts.append(f"{e.const:+.17g}")
        return " ".join(parts)

    def dump(self) -> str:
        """Plain-text listing, one declaration or constraint per line.

        Line kinds: ``var <i> <name>``, ``maximize <expr>``,
        ``eq <expr> == 0``, ``nonneg <expr> >= 0`` and
        ``soc <t> ; <u1> | <u2> | ...`` meaning ``||u|| <= t``.
        """
        lines = [f"# cone program: {self.n} variables, {len(self.equalities)} eq, "
                 f"{len(self.nonnegs)} nonneg, {len(self.socs)} soc"]
        lines += [f"var {i} {nm or '-'}" for i, nm in enumerate(self.names)]
        lines.append(f"maximize {self._fmt(self.objective)}")
        lines += [f"eq {self._fmt(e)} == 0" for e in self.equalities]
        lines += [f"nonneg {self._fmt(e)} >= 0" for e in self.nonnegs]
        for t, u in self.socs:
            lines.append(f"soc {self._fmt(t)} ; " + " | ".join(self._fmt(x) for x in u))
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# epigraph lowering


def modulus_epigraph(prog: ConeProgram, z: ComplexLike, xi: Scalar) -> None:
    """``|z| <= xi`` as a 3-dimensional SOC block."""
    z = _caff(z)
    prog.add_soc(xi, [z.re, z.im])


def _rotated(prog: ConeProgram, x: Scalar, a: Scalar, b: Scalar) -> None:
    # x <= sqrt(a b), a, b >= 0
    a, b = aff(a), aff(b)
    prog.add_soc((a + b) * 0.5, [x, (a - b) * 0.5])


def geo_mean_tower(prog: ConeProgram, xi: VarId, leaves: Sequence[VarId]) -> list[VarId]:
    """Enforce ``xi <= (prod leaves)^(1/len(leaves))`` with 3-dim SOC blocks.

    The leaf multiset is padded with ``xi`` up to a power of two. At each
    level identical leaves pair off for free (sqrt(a a) = a); the leftover
    singletons are paired in order of first appearance, each pair getting
    a fresh auxiliary node. Returns the auxiliary variables created.
    """
    if not leaves:
        raise ConeProgramError("geo_mean_tower needs at least one leaf")
    size = 1 << max(0, (len(leaves) - 1).bit_length())
    nodes = list(leaves) + [xi] * (size - len(leaves))
    aux: list[VarId] = []
    while len(nodes) > 2:
        counts = Counter(nodes)
        order = list(dict.fromkeys(nodes))
        paired, singles = [], []
        for v in order:
            paired += [v] * (counts[v] // 2)
            if counts[v] % 2:
                singles.append(v)
        for a, b in zip(singles[::2], singles[1::2]):
            y = prog.var("tower")
            aux.append(y)
            prog.add_nonneg(y)
            _rotated(prog, y, a, b)
            paired.append(y)
        nodes = paired
    if len(nodes) == 2:
        a, b = nodes
        if a == b:
            if a != xi:
                prog.add_nonneg(aff(a) - xi)
        else:
            _rotated(prog, xi, a, b)
    elif nodes[0] != xi:
        prog.add_nonneg(aff(nodes[0]) - xi)
    return aux


def power_epigraph(prog: ConeProgram, xi: VarId, s: VarId, v: VarId,
                   q: ExtRationalLike) -> list[VarId]:
    """``xi <= s^((q-1)/q) v^(1/q)`` for rational ``q = a/b > 1``.

    Equivalent to ``xi^a <= s^(a-b) v^b``; the tower is built over the
    leaves ``{s x (a-b), v x b}`` self-padded with ``xi``.
    """
    q = ExtRational.of(q)
    if q.is_inf or q.frac <= 1:
        raise ConeProgramError(f"power_epigraph needs finite q > 1, got {q}")
    a, b = q.numerator, q.denominator
    return geo_mean_tower(prog, xi, [s] * (a - b) + [v] * b)


def power_leaves(q: ExtRationalLike) -> list[str]:
    """Leaf multiset used by :func:`power_epigraph`, padded, as labels."""
    q = ExtRational.of(q)
    a, b = q.numerator, q.denominator
    size = 1 << (a - 1).bit_length()
    return ["s"] * (a - b) + ["v"] * b + ["xi"] * (size - a)


def lq_epigraph(prog: ConeProgram, w: Sequence[ComplexLike], s: VarId,
                q: ExtRationalLike) -> None:
    """Constrain ``||w||_q <= s`` for rational q >= 1 or q = inf."""
    q = ExtRational.of(q)
    w = [_caff(z) for z in w]
    prog.add_nonneg(s)
    if q.is_inf:
        for z in w:
            modulus_epigraph(prog, z, s)
        return
    if q == 2:
        prog.add_soc(s, [z.re for z in w] + [z.im for z in w])
        return
    xis = []
    for z in w:
        xi = prog.var("xi")
        prog.add_nonneg(xi)
        modulus_epigraph(prog, z, xi)
        xis.append(xi)
    if q == 1:
        prog.add_nonneg(aff(s) - linear_sum((1.0, xi) for xi in xis))
        return
    vs = []
    for xi in xis:
        v = prog.var("v")
        prog.add_nonneg(v)
        power_epigraph(prog, xi, s, v, q)
        vs.append(v)
    prog.add_nonneg(aff(s) - linear_sum((1.0, v) for v in vs))


def quad_constraint(prog: ConeProgram, w: Sequence[ComplexVarRef], L) -> None:
    """``w^H (L L^H) w <= 1`` as ``||L^H w||_2 <= 1``."""
    L = np.asarray(L, dtype=complex)
    if L.shape != (len(w), len(w)):
        raise ConeProgramError(f"factor shape {L.shape} does not match {len(w)} variables")
    rows = complex_combination(L.conj().T, w)
    prog.add_soc(1.0, [r.re for r in rows] + [r.im for r in rows])
