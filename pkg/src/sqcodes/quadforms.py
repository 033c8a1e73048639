"""Quadratic forms on F_q^k.

A form is stored as its upper-triangular coefficients a_ij (i <= j) in
lexicographic order, Q(x) = sum a_ij x_i x_j.  The associated bilinear
form B(x, y) = Q(x+y) - Q(x) - Q(y) is derived on demand.

Rank follows the characteristic-free convention rk Q = k - dim Rad0, where
Rad0 is the zero locus of Q on the radical of B.  Zero counts come in two
flavours: ``zero_count_brute`` enumerates F_q^k and ``zero_count_closed``
uses the rank together with an explicit orthogonal decomposition.
"""

from __future__ import annotations

import itertools
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import BudgetExceeded, DimensionMismatch, NotFullRank
from .fq import FieldCtx
from .linalg import MatFq, kernel_basis, rank, rref

ZERO_COUNT_BUDGET = 1 << 22
CENSUS_BUDGET = 1 << 20

Vec = tuple[int, ...]


def n_monomials(k: int) -> int:
    return k * (k + 1) // 2


def coeff_index(i: int, j: int, k: int) -> int:
    """Position of a_ij (i <= j) in the coefficient tuple."""
    if i > j:
        i, j = j, i
    return i * k - i * (i - 1) // 2 + (j - i)


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    ctx: FieldCtx
    k: int
    coeffs: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.coeffs) != n_monomials(self.k):
            raise DimensionMismatch(
                f"{len(self.coeffs)} coefficients for k = {self.k}; need {n_monomials(self.k)}"
            )

    @classmethod
    def zero(cls, ctx: FieldCtx, k: int) -> QuadraticForm:
        return cls(ctx, k, (0,) * n_monomials(k))

    @classmethod
    def from_terms(cls, ctx: FieldCtx, k: int, terms: dict[tuple[int, int], int]) -> QuadraticForm:
        """Build from {(i, j): a_ij}; e.g. {(0, 1): 1} is x_0 x_1."""
        c = [0] * n_monomials(k)
        for (i, j), a in terms.items():
            t = coeff_index(i, j, k)
            c[t] = ctx.add(c[t], a % ctx.q)
        return cls(ctx, k, tuple(c))

    @classmethod
    def random(cls, ctx: FieldCtx, k: int, rng: random.Random) -> QuadraticForm:
        return cls(ctx, k, tuple(rng.randrange(ctx.q) for _ in range(n_monomials(k))))

    def coeff(self, i: int, j: int) -> int:
        return self.coeffs[coeff_index(i, j, self.k)]

    def __call__(self, x: Sequence[int]) -> int:
        return qf_eval(self, x)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QuadraticForm):
            return NotImplemented
        return self.ctx.q == other.ctx.q and self.k == other.k and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash((self.ctx.q, self.k, self.coeffs))

    def __repr__(self) -> str:
        return f"QuadraticForm(q={self.ctx.q}, k={self.k}, {self.coeffs})"


def iter_forms(ctx: FieldCtx, k: int) -> Iterator[QuadraticForm]:
    for c in itertools.product(range(ctx.q), repeat=n_monomials(k)):
        yield QuadraticForm(ctx, k, c)


# --- evaluation and the bilinear form ---------------------------------------

def qf_eval(Q: QuadraticForm, x: Sequence[int]) -> int:
    k = Q.k
    if len(x) != k:
        raise DimensionMismatch(f"vector of length {len(x)} for a form on F_q^{k}")
    ctx = Q.ctx
    c = Q.coeffs
    if ctx.prime:
        s = 0
        t = 0
        for i in range(k):
            xi = x[i]
            if xi:
                s += xi * sum(c[t + d] * x[i + d] for d in range(k - i))
            t += k - i
        return s % ctx.p
    mul, add = ctx.mul, ctx.add
    s = 0
    t = 0
    for i in range(k):
        xi = x[i]
        if xi:
            inner = 0
            for d in range(k - i):
                a = c[t + d]
                if a and x[i + d]:
                    inner = add(inner, mul(a, x[i + d]))
            s = add(s, mul(xi, inner))
        t += k - i
    return s


def bilinear_matrix(Q: QuadraticForm) -> MatFq:
    """Symmetric matrix M with x^T M y = Q(x+y) - Q(x) - Q(y)."""
    ctx, k = Q.ctx, Q.k
    M = [[0] * k for _ in range(k)]
    t = 0
    for i in range(k):
        for j in range(i, k):
            a = Q.coeffs[t]
            t += 1
            if i == j:
                M[i][i] = ctx.add(a, a)
            else:
                M[i][j] = M[j][i] = a
    return MatFq(ctx, k, k, tuple(tuple(r) for r in M))


class _FormOps:
    """Q and B evaluated on explicit vectors, sharing one bilinear matrix."""

    def __init__(self, Q: QuadraticForm):
        self.Q = Q
        self.ctx = Q.ctx
        self.M = bilinear_matrix(Q).rows

    def q(self, x: Sequence[int]) -> int:
        return qf_eval(self.Q, x)

    def b(self, x: Sequence[int], y: Sequence[int]) -> int:
        ctx = self.ctx
        My = [ctx.dot(row, y) for row in self.M]
        return ctx.dot(x, My)

    def lin(self, coeffs: Sequence[int], vecs: Sequence[Sequence[int]]) -> list[int]:
        ctx = self.ctx
        out = [0] * self.Q.k
        for c, v in zip(coeffs, vecs):
            if c:
                out = ctx.vec_add(out, ctx.scale(c, v))
        return out


def pullback(Q: QuadraticForm, vectors: Sequence[Sequence[int]]) -> QuadraticForm:
    """The form y -> Q(sum y_l v_l) on F_q^h, h = len(vectors)."""
    ops = _FormOps(Q)
    h = len(vectors)
    c = []
    for l in range(h):
        for m in range(l, h):
            c.append(ops.q(vectors[l]) if l == m else ops.b(vectors[l], vectors[m]))
    return QuadraticForm(Q.ctx, h, tuple(c))


def change_basis(Q: QuadraticForm, T: MatFq) -> QuadraticForm:
    """Q o T, i.e. x -> Q(T x), by coefficient transport."""
    if T.nrows != Q.k:
        raise DimensionMismatch("T must have k rows")
    return pullback(Q, T.transpose().rows)


# --- radical and rank -------------------------------------------------------

def radical_basis(Q: QuadraticForm) -> tuple[list[Vec], list[Vec]]:
    """Bases of Rad (kernel of B) and Rad0 = {x in Rad : Q(x) = 0}."""
    ctx = Q.ctx
    rad = list(kernel_basis(bilinear_matrix(Q)).rows)
    if not ctx.char2 or not rad:
        return rad, list(rad)
    # On Rad, Q is additive and Q(cx) = c^2 Q(x); x -> sqrt(Q(x)) is linear.
    functional = [ctx.sqrt(qf_eval(Q, r)) for r in rad]
    if not any(functional):
        return rad, list(rad)
    combos = kernel_basis(MatFq(ctx, 1, len(rad), (tuple(functional),))).rows
    rad0 = []
    for w in combos:
        v = [0] * Q.k
        for c, r in zip(w, rad):
            if c:
                v = ctx.vec_add(v, ctx.scale(c, r))
        rad0.append(tuple(v))
    return rad, rad0


def qf_rank(Q: QuadraticForm) -> int:
    return Q.k - len(radical_basis(Q)[1])


# --- decomposition ----------------------------------------------------------

@dataclass
class Decomposition:
    """Orthogonal splitting V = Rad + planes + residual (all bases in F_q^k coordinates).

    Odd characteristic: every pair is hyperbolic (Q(v1) = Q(v2) = 0,
    B(v1, v2) = 1) and ``residual`` spans an anisotropic space of dim <= 2.
    Characteristic 2: every pair is symplectic (B(v1, v2) = 1), all but at
    most one are also hyperbolic, and ``residual`` is empty.
    """

    radical: list[Vec] = field(default_factory=list)
    pairs: list[tuple[Vec, Vec]] = field(default_factory=list)
    residual: list[Vec] = field(default_factory=list)

    def basis(self) -> list[Vec]:
        out = list(self.radical)
        for v1, v2 in self.pairs:
            out += [v1, v2]
        return out + list(self.residual)

    def components(self) -> list[list[Vec]]:
        comps = [[r] for r in self.radical]
        comps += [[v1, v2] for v1, v2 in self.pairs]
        if self.residual:
            comps.append(list(self.residual))
        return comps


def _ternary_zero(ctx: FieldCtx, q0: int, q1: int, q2: int, b01: int, b02: int, b12: int) -> tuple[int, int, int]:
    """A nontrivial zero of q0 y0^2 + q1 y1^2 + q2 y2^2 + b01 y0y1 + b02 y0y2 + b12 y1y2."""
    if q0 == 0:
        return (1, 0, 0)
    t = ctx.solve_quadratic(q0, b01, q1)
    if t is not None:
        return (t, 1, 0)
    mul, add = ctx.mul, ctx.add
    for s in range(ctx.q):
        lin = add(mul(b01, s), b02)
        const = add(add(mul(q1, mul(s, s)), mul(b12, s)), q2)
        t = ctx.solve_quadratic(q0, lin, const)
        if t is not None:
            return (t, s, 1)
    raise AssertionError("ternary quadratic form without a nontrivial zero")  # pragma: no cover


class _Decomposer:
    def __init__(self, Q: QuadraticForm):
        self.Q = Q
        self.ctx = Q.ctx
        self.ops = _FormOps(Q)
        k = Q.k
        self.vecs = [[int(i == j) for j in range(k)] for i in range(k)]
        self.G = [list(r) for r in self.ops.M]
        self.qv = [Q.coeff(i, i) for i in range(k)]

    # helpers on explicit vectors
    def hyperbolic_pair(self, v1: list[int], x: list[int]) -> tuple[list[int], list[int]]:
        """Given isotropic v1 and x with B(v1, x) != 0, return (v1, v2) with Q(v2) = 0, B(v1, v2) = 1."""
        ctx, ops = self.ctx, self.ops
        ainv = ctx.inv(ops.b(v1, x))
        v2 = ctx.axpy(ctx.scale(ainv, x), ctx.mul(ops.q(x), ctx.mul(ainv, ainv)), v1)
        return v1, v2

    def isotropic_in_span(self, vs: Sequence[list[int]]) -> list[int]:
        ops = self.ops
        y = _ternary_zero(
            self.ctx, ops.q(vs[0]), ops.q(vs[1]), ops.q(vs[2]),
            ops.b(vs[0], vs[1]), ops.b(vs[0], vs[2]), ops.b(vs[1], vs[2]),
        )
        return ops.lin(y, vs)

    def project_out(self, y: list[int], v1: list[int], v2: list[int]) -> list[int]:
        """Component of y orthogonal to the hyperbolic plane <v1, v2>."""
        ctx, ops = self.ctx, self.ops
        w = ctx.axpy(y, ops.b(y, v2), v1)
        return ctx.axpy(w, ops.b(y, v1), v2)

    # --- characteristic 2 ---------------------------------------------------

    def symplectic_split(self) -> tuple[list[int], list[tuple[int, int]]]:
        ctx, G, qv, vecs = self.ctx, self.G, self.qv, self.vecs
        mul, add = ctx.mul, ctx.add
        active = list(range(self.Q.k))
        radical: list[int] = []
        planes: list[tuple[int, int]] = []
        while active:
            u = active[0]
            w = next((x for x in active[1:] if G[u][x]), None)
            if w is None:
                radical.append(u)
                active.pop(0)
                continue
            s = ctx.inv(G[u][w])
            vecs[w] = ctx.scale(s, vecs[w])
            qv[w] = mul(mul(s, s), qv[w])
            for y in active:
                G[w][y] = G[y][w] = mul(s, G[w][y])
            rest = [x for x in active if x != u and x != w]
            new_rows = {}
            for x in rest:
                a, b = G[x][w], G[x][u]
                vecs[x] = ctx.axpy(ctx.axpy(vecs[x], a, vecs[u]), b, vecs[w])
                qv[x] = add(add(qv[x], mul(mul(a, a), qv[u])), add(mul(mul(b, b), qv[w]), mul(a, b)))
                new_rows[x] = [add(add(G[x][y], mul(a, G[u][y])), mul(b, G[w][y])) for y in rest]
            for x in rest:
                for y, val in zip(rest, new_rows[x]):
                    G[x][y] = val
            planes.append((u, w))
            active = rest
        return radical, planes

    def decompose_char2(self) -> Decomposition:
        ctx, ops = self.ctx, self.ops
        rad_idx, plane_idx = self.symplectic_split()
        radical = [self.vecs[i] for i in rad_idx]

        def isotropic_in_plane(a, b):
            qa, qb = ops.q(a), ops.q(b)
            if qa == 0:
                return a
            if qb == 0:
                return b
            s = ctx.solve_quadratic(qa, 1, qb)
            return None if s is None else ctx.vec_add(ctx.scale(s, a), b)

        def settle(a, b):
            v1 = isotropic_in_plane(a, b)
            if v1 is None:
                return None
            return self.hyperbolic_pair(v1, a if ops.b(v1, a) else b)

        pairs = []
        pending = None
        for iu, iw in plane_idx:
            a, b = self.vecs[iu], self.vecs[iw]
            pair = settle(a, b)
            if pair is not None:
                pairs.append(pair)
                continue
            if pending is None:
                pending = (a, b)
                continue
            # two anisotropic planes span H + H
            c, d = pending
            pending = None
            v1 = self.isotropic_in_span([a, b, c])
            x = next(y for y in (a, b, c, d) if ops.b(v1, y))
            v1, v2 = self.hyperbolic_pair(v1, x)
            pairs.append((v1, v2))
            proj = [self.project_out(y, v1, v2) for y in (a, b, c, d)]
            e = next(p for p in proj if any(p))
            f = next(p for p in proj if ops.b(e, p))
            f = ctx.scale(ctx.inv(ops.b(e, f)), f)
            pair = settle(e, f)
            if pair is not None:
                pairs.append(pair)
            else:  # pragma: no cover - excluded by the Arf invariant
                pending = (e, f)
        if pending is not None:
            a, b = pending
            r = next((r for r in radical if ops.q(r)), None)
            if r is not None:
                # <a, b, r> contains a zero outside the radical line
                v1 = self.isotropic_in_span([a, b, r])
                pairs.append(self.hyperbolic_pair(v1, a if ops.b(v1, a) else b))
            else:
                pairs.append((a, b))
        return Decomposition(
            radical=[tuple(r) for r in radical],
            pairs=[(tuple(v1), tuple(v2)) for v1, v2 in pairs],
        )

    # --- odd characteristic ---------------------------------------------------

    def diagonalize(self) -> tuple[list[int], list[int]]:
        ctx, G, vecs = self.ctx, self.G, self.vecs
        mul, add = ctx.mul, ctx.add
        active = list(range(self.Q.k))
        radical: list[int] = []
        diag: list[int] = []
        while active:
            u = next((x for x in active if G[x][x]), None)
            if u is None:
                hit = next(((x, y) for x in active for y in active if y != x and G[x][y]), None)
                if hit is None:
                    radical.extend(active)
                    break
                x, y = hit
                vecs[x] = ctx.vec_add(vecs[x], vecs[y])
                new_row = [add(G[x][z], G[y][z]) for z in active]
                for z, val in zip(active, new_row):
                    G[x][z] = G[z][x] = val
                G[x][x] = add(G[x][x], G[y][x])  # B(x+y, x+y) = row value + B(y, x+y)
                u = x
            inv_d = ctx.inv(G[u][u])
            rest = [x for x in active if x != u]
            new_rows = {}
            for x in rest:
                c = mul(G[x][u], inv_d)
                vecs[x] = ctx.axpy(vecs[x], c, vecs[u])
                new_rows[x] = ctx.axpy([G[x][y] for y in rest], c, [G[u][y] for y in rest])
            for x in rest:
                for y, val in zip(rest, new_rows[x]):
                    G[x][y] = val
            diag.append(u)
            active = rest
        return radical, diag

    def decompose_odd(self) -> Decomposition:
        ctx, ops = self.ctx, self.ops
        rad_idx, diag_idx = self.diagonalize()
        pool = [(self.vecs[i], ops.q(self.vecs[i])) for i in diag_idx]
        pairs = []
        while len(pool) >= 3:
            (u1, d1), (u2, d2), (u3, d3) = pool[:3]
            del pool[:3]
            y = _ternary_zero(ctx, d1, d2, d3, 0, 0, 0)
            v1 = ops.lin(y, [u1, u2, u3])
            x = (u1, u2, u3)[next(i for i in range(3) if y[i])]
            v1, v2 = self.hyperbolic_pair(v1, x)
            pairs.append((v1, v2))
            w = next(p for p in (self.project_out(u, v1, v2) for u in (u1, u2, u3)) if any(p))
            pool.append((w, ops.q(w)))
        if len(pool) == 2:
            (u1, d1), (u2, d2) = pool
            r = ctx.sqrt(ctx.neg(ctx.div(d2, d1)))
            if r is not None:
                v1 = ctx.vec_add(ctx.scale(r, u1), u2)
                pairs.append(self.hyperbolic_pair(v1, u1))
                pool = []
        return Decomposition(
            radical=[tuple(self.vecs[i]) for i in rad_idx],
            pairs=[(tuple(v1), tuple(v2)) for v1, v2 in pairs],
            residual=[tuple(u) for u, _ in pool],
        )


def decompose(Q: QuadraticForm) -> Decomposition:
    """Orthogonal decomposition into radical, hyperbolic/symplectic planes and residual."""
    d = _Decomposer(Q)
    return d.decompose_char2() if Q.ctx.char2 else d.decompose_odd()


def check_decomposition(Q: QuadraticForm, D: Decomposition) -> None:
    """Raise AssertionError unless D satisfies every structural invariant for Q."""
    ctx, ops = Q.ctx, _FormOps(Q)
    basis = D.basis()
    assert len(basis) == Q.k, "component sizes do not add up to k"
    if Q.k:
        assert rank(MatFq(ctx, Q.k, Q.k, tuple(basis))) == Q.k, "not a basis"
    comps = D.components()
    for a, ca in enumerate(comps):
        for cb in comps[a + 1:]:
            for x in ca:
                for y in cb:
                    assert ops.b(x, y) == 0, "components not orthogonal"
    for r in D.radical:
        assert all(ops.b(r, e) == 0 for e in basis), "radical vector pairs nontrivially"
    exceptional = 0
    for v1, v2 in D.pairs:
        assert ops.b(v1, v2) == 1, "pair not normalised"
        hyper = ops.q(v1) == 0 and ops.q(v2) == 0
        if not hyper:
            assert ctx.char2, "non-hyperbolic pair in odd characteristic"
            exceptional += 1
    assert exceptional <= 1, "more than one exceptional symplectic plane"
    if ctx.char2:
        assert not D.residual, "residual in characteristic 2"
    else:
        assert len(D.residual) <= 2, "residual of dimension > 2"
        if D.residual:
            W = pullback(Q, D.residual)
            assert zero_count_brute(W) == 1, "residual is isotropic"


def direct_sum(forms: Sequence[QuadraticForm]) -> QuadraticForm:
    """Block-diagonal form: the i-th form acts on its own block of coordinates."""
    if not forms:
        raise ValueError("direct sum of no forms")
    ctx = forms[0].ctx
    k = sum(F.k for F in forms)
    terms: dict[tuple[int, int], int] = {}
    off = 0
    for F in forms:
        for i in range(F.k):
            for j in range(i, F.k):
                a = F.coeff(i, j)
                if a:
                    terms[(off + i, off + j)] = a
        off += F.k
    return QuadraticForm.from_terms(ctx, k, terms)


def recompose(Q: QuadraticForm, D: Decomposition) -> tuple[QuadraticForm, list[Vec]]:
    """The direct sum of Q restricted to each component, with the matching basis."""
    parts = [pullback(Q, comp) for comp in D.components()]
    if not parts:
        return QuadraticForm.zero(Q.ctx, 0), []
    return direct_sum(parts), D.basis()


def qf_eval_many(Q: QuadraticForm, X: np.ndarray) -> np.ndarray:
    """Q at every row of the integer array X (shape N x k)."""
    ctx = Q.ctx
    X = np.asarray(X, dtype=np.int64)
    out = np.zeros(X.shape[0], dtype=np.int64)
    t = 0
    for i in range(Q.k):
        for j in range(i, Q.k):
            a = Q.coeffs[t]
            t += 1
            if a:
                out = ctx.vadd(out, ctx.vmul(a, ctx.vmul(X[:, i], X[:, j])))
    return out


def all_vectors(q: int, k: int) -> np.ndarray:
    """Every vector of F_q^k as rows of a (q^k) x k array, first coordinate slowest."""
    if k == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices((q,) * k).reshape(k, -1).T
    return grids.astype(np.int64)


def recomposition_holds(
    Q: QuadraticForm,
    D: Decomposition,
    exhaustive_limit: int = 4096,
    samples: int = 1000,
    rng: random.Random | None = None,
) -> bool:
    """Check Q(sum y_l b_l) == (direct sum of components)(y) on all y, or on random y if q^k is large."""
    ctx, k, q = Q.ctx, Q.k, Q.ctx.q
    g, basis = recompose(Q, D)
    if g.k != k:
        return False
    if q**k <= exhaustive_limit:
        Y = all_vectors(q, k)
    else:
        rng = rng or random.Random(0)
        Y = np.array([[rng.randrange(q) for _ in range(k)] for _ in range(samples)], dtype=np.int64)
    X = np.zeros_like(Y)
    for l, b in enumerate(basis):
        for c in range(k):
            if b[c]:
                X[:, c] = ctx.vadd(X[:, c], ctx.vmul(b[c], Y[:, l]))
    return bool(np.array_equal(qf_eval_many(Q, X), qf_eval_many(g, Y)))


# --- zero counts ------------------------------------------------------------

def qf_values_all(Q: QuadraticForm) -> np.ndarray:
    """Q at every vector of F_q^k, as an array of shape (q,)*k indexed by coordinates."""
    ctx, k, q = Q.ctx, Q.k, Q.ctx.q
    xs = np.arange(q, dtype=np.int64)
    T = np.zeros((), dtype=np.int64)
    for j in range(k):
        L = np.zeros((1,) * j, dtype=np.int64)
        for i in range(j):
            a = Q.coeff(i, j)
            if a:
                shape = [1] * j
                shape[i] = q
                L = ctx.vadd(L, ctx.vmul(a, xs).reshape(shape))
        xj = xs.reshape((1,) * j + (q,))
        step = ctx.vmul(xj, L[..., None])
        ajj = Q.coeff(j, j)
        if ajj:
            step = ctx.vadd(step, ctx.vmul(ajj, ctx.vmul(xj, xj)))
        T = ctx.vadd(T[..., None], step)
        T = np.broadcast_to(T, (q,) * (j + 1))
    return T


def zero_count_brute(Q: QuadraticForm, max_enum: int = ZERO_COUNT_BUDGET) -> int:
    """|{x in F_q^k : Q(x) = 0}| by enumerating every vector."""
    if Q.ctx.q**Q.k > max_enum:
        raise BudgetExceeded(f"q^k = {Q.ctx.q}^{Q.k} exceeds enumeration budget {max_enum}")
    return int(np.count_nonzero(qf_values_all(Q) == 0))


def zero_count_formula(q: int, k: int, r: int, sign: int = 0) -> int:
    """Closed-form zero count for rank r; even r > 0 needs sign = +1 or -1."""
    if r == 0:
        return q**k
    if r % 2:
        return q ** (k - 1)
    if sign not in (1, -1):
        raise ValueError("even rank needs sign +1 or -1")
    return q ** (k - 1) + sign * (q - 1) * q ** (k - r // 2 - 1)


def zero_count_sign(Q: QuadraticForm, D: Decomposition | None = None) -> int:
    """The +/- branch of an even-rank form, read off its last decomposition component."""
    ctx, q = Q.ctx, Q.ctx.q
    if D is None:
        D = decompose(Q)
    ops = _FormOps(Q)
    pairs = list(D.pairs)
    if D.residual:
        last = list(D.residual)
    else:
        idx = next((i for i, (v1, v2) in enumerate(pairs) if ops.q(v1) or ops.q(v2)), len(pairs) - 1)
        last = list(pairs.pop(idx))
    if len(last) != 2:
        raise ValueError("odd-rank form has no +/- branch")
    z = zero_count_brute(pullback(Q, last))
    d = 2
    for _ in pairs:
        z = q ** (d + 1) - q**d + q * z
        d += 2
    r = d
    base = q ** (r - 1)
    delta = (q - 1) * q ** (r // 2 - 1)
    if z == base + delta:
        return 1
    if z == base - delta:
        return -1
    raise ArithmeticError(f"recomposed zero count {z} matches neither branch for rank {r}")


def zero_count_closed(Q: QuadraticForm) -> int:
    """Zero count from the rank; even ranks resolve +/- on a <= q^2 residual component."""
    r = qf_rank(Q)
    if r == 0 or r % 2:
        return zero_count_formula(Q.ctx.q, Q.k, r)
    return zero_count_formula(Q.ctx.q, Q.k, r, zero_count_sign(Q))


def split_hyperbolic(Q: QuadraticForm) -> tuple[QuadraticForm, list[Vec]]:
    """A basis in which f_Q = g_Q + X_{k-1} X_k; returns (g_Q, basis).

    Needs a hyperbolic pair in the decomposition (guaranteed for rank >= 3).
    """
    D = decompose(Q)
    ops = _FormOps(Q)
    idx = next((i for i, (v1, v2) in enumerate(D.pairs) if ops.q(v1) == 0 and ops.q(v2) == 0), None)
    if idx is None:
        raise ValueError("no hyperbolic plane in the decomposition")
    v1, v2 = D.pairs[idx]
    rest = Decomposition(D.radical, D.pairs[:idx] + D.pairs[idx + 1:], D.residual).basis()
    return pullback(Q, rest), rest + [v1, v2]


# --- counting ---------------------------------------------------------------

def gbinom(n: int, k: int, q: int) -> int:
    """Gaussian binomial coefficient [n choose k]_q."""
    if not 0 <= k <= n:
        raise ValueError(f"need n >= k >= 0, got n={n}, k={k}")
    num = den = 1
    for i in range(1, k + 1):
        num *= q ** (n - k + i) - 1
        den *= q**i - 1
    return num // den


def _n_fullrank_recursive(k: int, q: int) -> int:
    n = 1
    for j in range(1, k + 1):
        n *= (q**j - 1) if j % 2 else q**j
    return n


def n_fullrank(k: int, q: int) -> int:
    """Number N(k) of full-rank quadratic forms on F_q^k."""
    if k < 0:
        raise ValueError("k must be >= 0")
    h = k // 2
    n = q ** (h * (h + 1))
    for i in range(1, (k + 1) // 2 + 1):
        n *= q ** (2 * i - 1) - 1
    if n != _n_fullrank_recursive(k, q):
        raise ArithmeticError("closed form and recursion for N(k) disagree")  # pragma: no cover
    return n


def n_rank(k: int, r: int, q: int) -> int:
    """Number of rank-r quadratic forms on F_q^k."""
    return gbinom(k, r, q) * n_fullrank(r, q)


@dataclass(frozen=True)
class RankCensus:
    k: int
    q: int
    counts: dict[int, int]


def census_brute(ctx: FieldCtx, k: int, max_enum: int = CENSUS_BUDGET) -> RankCensus:
    total = ctx.q ** n_monomials(k)
    if total > max_enum:
        raise BudgetExceeded(f"{total} forms exceed enumeration budget {max_enum}")
    tally = Counter(qf_rank(Q) for Q in iter_forms(ctx, k))
    return RankCensus(k, ctx.q, {r: tally.get(r, 0) for r in range(k + 1)})


def census_formula(k: int, q: int) -> RankCensus:
    return RankCensus(k, q, {r: n_rank(k, r, q) for r in range(k + 1)})


def complement_count(k: int, h: int, q: int) -> int:
    """Number of complements of an h-dimensional subspace of F_q^k."""
    if not 0 <= h <= k:
        raise ValueError(f"need 0 <= h <= k, got h={h}, k={k}")
    return q ** (h * (k - h))


def iter_subspaces(ctx: FieldCtx, k: int, h: int) -> Iterator[list[Vec]]:
    """Every h-dimensional subspace of F_q^k, as its RREF basis."""
    q = ctx.q
    for pivots in itertools.combinations(range(k), h):
        free = [(i, j) for i, p in enumerate(pivots) for j in range(p + 1, k) if j not in pivots]
        for vals in itertools.product(range(q), repeat=len(free)):
            rows = [[0] * k for _ in range(h)]
            for i, p in enumerate(pivots):
                rows[i][p] = 1
            for (i, j), v in zip(free, vals):
                rows[i][j] = v
            yield [tuple(r) for r in rows]


def complement_count_brute(ctx: FieldCtx, W: Sequence[Sequence[int]], k: int) -> int:
    h = len(W)
    count = 0
    for U in iter_subspaces(ctx, k, k - h):
        if rank(MatFq(ctx, k, k, tuple(tuple(v) for v in list(W) + U))) == k:
            count += 1
    return count


def r_formula(k: int, h: int, q: int) -> int:
    """Number R(k, h) of h-dim subspaces on which a full-rank form restricts to full rank.

    Only the (characteristic, parity of k, h) cases where this number does
    not depend on the form: odd q with (k odd, h=1) or (k even, h=2); even q
    with h=2.
    """
    odd = q % 2 == 1
    if odd and k % 2 == 1 and h == 1:
        return q ** (k - 1)
    if h == 2 and k >= 2 and (k % 2 == 0 or not odd):
        top = q**k - 1 if k % 2 == 0 else q**k - q
        num = q ** (k - 2) * top
        assert num % (q * q - 1) == 0
        return num // (q * q - 1)
    raise ValueError(f"R({k},{h}) depends on the form for q = {q}")


def count_nondeg_planes_brute(Q: QuadraticForm, h: int, max_enum: int = 1 << 16) -> int:
    """Count h-dim subspaces on which Q restricts to a full-rank form."""
    ctx, k = Q.ctx, Q.k
    if qf_rank(Q) != k:
        raise NotFullRank("count defined for full-rank forms only")
    if gbinom(k, h, ctx.q) > max_enum:
        raise BudgetExceeded(f"too many {h}-dim subspaces to enumerate")
    return sum(1 for S in iter_subspaces(ctx, k, h) if qf_rank(pullback(Q, S)) == h)


def random_full_rank(ctx: FieldCtx, k: int, rng: random.Random) -> QuadraticForm:
    while True:
        Q = QuadraticForm.random(ctx, k, rng)
        if qf_rank(Q) == k:
            return Q


def random_invertible(ctx: FieldCtx, k: int, rng: random.Random) -> MatFq:
    while True:
        T = MatFq(ctx, k, k, tuple(tuple(rng.randrange(ctx.q) for _ in range(k)) for _ in range(k)))
        if rref(T)[1] == k:
            return T
