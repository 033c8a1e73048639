"""Linear codes over F_q, Schur products and the square-dimension distinguisher."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BudgetExceeded,
    DimensionMismatch,
    DuplicatePoint,
    EmptyCode,
    FieldError,
    FieldMismatch,
    InvalidPosition,
    LengthMismatch,
    ParseError,
    RankDeficient,
    TooLong,
)
from .fq import FieldCtx, field_new
from .linalg import (
    MatFq,
    RowReducer,
    kernel_basis,
    pack_bits,
    rank,
    rref_bits,
    row_basis,
    unpack_bits,
)

MIN_DISTANCE_BUDGET = 1 << 24


def square_bound(n: int, k: int) -> int:
    """min(n, k(k+1)/2): the largest possible dimension of a square."""
    return min(n, k * (k + 1) // 2)


@dataclass(frozen=True, eq=False)
class LinearCode:
    """An [n, k] code; ``gen`` is always the RREF generator, so equal codes compare equal."""

    ctx: FieldCtx
    n: int
    k: int
    gen: MatFq

    @classmethod
    def from_rows(cls, ctx: FieldCtx, rows: Iterable[Sequence[int]], n: int) -> LinearCode:
        """The code spanned by ``rows`` (which may be dependent)."""
        basis = row_basis(MatFq.from_rows(ctx, rows, n))
        return cls(ctx, n, basis.nrows, basis)

    @classmethod
    def from_bits(cls, ctx: FieldCtx, bits: Iterable[int], n: int) -> LinearCode:
        red, _ = rref_bits(list(bits), n)
        return cls(ctx, n, len(red), MatFq.from_packed(ctx, red, n))

    @classmethod
    def full(cls, ctx: FieldCtx, n: int) -> LinearCode:
        return cls(ctx, n, n, MatFq.identity(ctx, n))

    @cached_property
    def bits(self) -> tuple[int, ...]:
        return self.gen.packed

    @property
    def rate(self) -> float:
        return self.k / self.n

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LinearCode):
            return NotImplemented
        return self.ctx.q == other.ctx.q and self.n == other.n and self.gen.rows == other.gen.rows

    def __hash__(self) -> int:
        return hash((self.ctx.q, self.n, self.gen.rows))

    def __repr__(self) -> str:
        return f"LinearCode(q={self.ctx.q}, n={self.n}, k={self.k})"

    def contains(self, word: Sequence[int]) -> bool:
        red = RowReducer(self.ctx, self.n)
        for r in self._native_rows():
            red.add(r)
        return red.contains(pack_bits(word) if red.bits else list(word))

    def is_subcode_of(self, other: LinearCode) -> bool:
        _check_compatible(self, other)
        red = RowReducer(other.ctx, other.n)
        for r in other._native_rows():
            red.add(r)
        return all(red.contains(r) for r in self._native_rows())

    def _native_rows(self) -> list:
        if self.ctx.q == 2:
            return list(self.bits)
        return [list(r) for r in self.gen.rows]


def _check_compatible(C: LinearCode, D: LinearCode) -> None:
    if C.ctx.q != D.ctx.q:
        raise FieldMismatch(f"F_{C.ctx.q} vs F_{D.ctx.q}")
    if C.n != D.n:
        raise LengthMismatch(f"lengths {C.n} and {D.n}")


# --- constructions ----------------------------------------------------------

def code_from_systematic(ctx: FieldCtx, A: MatFq) -> LinearCode:
    """The code generated by [I_k | A]."""
    k = A.nrows
    rows = [tuple(int(i == j) for j in range(k)) + A.rows[i] for i in range(k)]
    n = k + A.ncols
    gen = MatFq(ctx, k, n, tuple(rows))  # already in RREF
    return LinearCode(ctx, n, k, gen)


def repetition_code(ctx: FieldCtx, n: int) -> LinearCode:
    return LinearCode(ctx, n, 1, MatFq(ctx, 1, n, ((1,) * n,)))


def rs_code(ctx: FieldCtx, n: int, k: int, eval_points: Sequence[int] | None = None) -> LinearCode:
    """Reed-Solomon evaluation code: rows (x^i) over the points, i = 0..k-1."""
    if n > ctx.q:
        raise TooLong(f"RS length {n} exceeds q = {ctx.q}")
    if k > n:
        raise DimensionMismatch(f"k = {k} > n = {n}")
    points = list(range(n)) if eval_points is None else [int(x) for x in eval_points]
    if len(points) != n:
        raise DimensionMismatch(f"{len(points)} evaluation points for length {n}")
    if len(set(points)) != n:
        raise DuplicatePoint("evaluation points must be distinct")
    if any(not 0 <= x < ctx.q for x in points):
        raise FieldError("evaluation point outside the field")
    rows = [[ctx.pow(x, i) for x in points] for i in range(k)]
    return LinearCode.from_rows(ctx, rows, n)


class SamplerModel(str, enum.Enum):
    """Random code models: systematic [I|A], raw uniform matrix, uniform [n,k] code."""

    SystematicC = "systematic"
    MatrixA = "matrix"
    UniformU = "uniform"


def _random_rows(ctx: FieldCtx, nrows: int, ncols: int, rng: random.Random) -> list:
    if ctx.q == 2:
        return [rng.getrandbits(ncols) if ncols else 0 for _ in range(nrows)]
    q = ctx.q
    rand = rng.randrange
    return [[rand(q) for _ in range(ncols)] for _ in range(nrows)]


def sample_generator(ctx: FieldCtx, n: int, k: int, model: SamplerModel, rng: random.Random) -> list:
    """A random k x n generator in native row form (packed ints over F_2, lists otherwise).

    Under MatrixA the rows may be dependent.
    """
    model = SamplerModel(model)
    if not 0 <= k <= n:
        raise DimensionMismatch(f"need n >= k >= 0, got n={n}, k={k}")
    if model is SamplerModel.SystematicC:
        A = _random_rows(ctx, k, n - k, rng)
        if ctx.q == 2:
            return [(1 << i) | (a << k) for i, a in enumerate(A)]
        return [[int(i == j) for j in range(k)] + A[i] for i in range(k)]
    if model is SamplerModel.MatrixA:
        return _random_rows(ctx, k, n, rng)
    while True:
        rows = _random_rows(ctx, k, n, rng)
        if _native_rank(ctx, rows, n) == k:
            return rows


def _native_rank(ctx: FieldCtx, rows: list, n: int) -> int:
    if ctx.q == 2:
        return len(rref_bits(rows, n)[1])
    return rank(MatFq(ctx, len(rows), n, tuple(tuple(r) for r in rows)))


def code_from_native(ctx: FieldCtx, rows: list, n: int) -> LinearCode:
    if ctx.q == 2:
        return LinearCode.from_bits(ctx, rows, n)
    return LinearCode.from_rows(ctx, rows, n)


def sample_code(ctx: FieldCtx, n: int, k: int, model: SamplerModel, rng: random.Random) -> LinearCode:
    rows = sample_generator(ctx, n, k, model, rng)
    if SamplerModel(model) is SamplerModel.SystematicC:
        if ctx.q == 2:
            return LinearCode(ctx, n, k, MatFq.from_packed(ctx, rows, n))
        return LinearCode(ctx, n, k, MatFq(ctx, k, n, tuple(tuple(r) for r in rows)))
    return code_from_native(ctx, rows, n)


# --- Schur products ---------------------------------------------------------

def _product_reducer(ctx: FieldCtx, n: int, rows_c: list, rows_d: list, symmetric: bool) -> RowReducer:
    red = RowReducer(ctx, n)
    if n == 0:
        return red
    bits = ctx.q == 2
    for i, a in enumerate(rows_c):
        for b in rows_d[i:] if symmetric else rows_d:
            red.add(a & b if bits else ctx.hadamard(a, b))
            if red.full:
                return red
    return red


def schur_product(C: LinearCode, D: LinearCode) -> LinearCode:
    """Span of all componentwise products of basis rows of C and D."""
    _check_compatible(C, D)
    red = _product_reducer(C.ctx, C.n, C._native_rows(), D._native_rows(), C == D)
    gen = red.matrix()
    return LinearCode(C.ctx, C.n, gen.nrows, gen)


def square_dim_native(ctx: FieldCtx, rows: list, n: int) -> int:
    """dim of the square of the row space of ``rows`` (native form), with early exit."""
    return _product_reducer(ctx, n, rows, rows, True).rank


def square_dim(C: LinearCode) -> int:
    return square_dim_native(C.ctx, C._native_rows(), C.n)


def schur_power(C: LinearCode, d: int) -> LinearCode:
    if d < 1:
        raise ValueError("Schur power needs d >= 1")
    P = C
    for _ in range(d - 1):
        P = schur_product(C, P)
    return P


# --- duals, puncturing, distance ---------------------------------------------

def dual(C: LinearCode) -> LinearCode:
    return LinearCode.from_rows(C.ctx, kernel_basis(C.gen).rows, C.n)


def puncture(C: LinearCode, positions: Iterable[int]) -> LinearCode:
    """Delete the given coordinates."""
    pos = set(positions)
    for j in pos:
        if not isinstance(j, (int, np.integer)) or not 0 <= j < C.n:
            raise InvalidPosition(f"position {j} outside [0, {C.n})")
    if len(pos) >= C.n:
        raise InvalidPosition("cannot puncture every coordinate")
    keep = [j for j in range(C.n) if j not in pos]
    return LinearCode.from_rows(C.ctx, C.gen.columns(keep).rows, len(keep))


def random_puncture_positions(C: LinearCode, t: int, rng: random.Random, among_last: bool = True) -> list[int]:
    """t distinct positions, drawn among the last n - k coordinates by default."""
    lo = C.k if among_last else 0
    return sorted(rng.sample(range(lo, C.n), t))


def iter_codewords(C: LinearCode, chunk: int = 1 << 16):
    """Yield arrays of codewords (one per row), covering all q^k messages in order."""
    ctx, k = C.ctx, C.k
    q = ctx.q
    G = np.asarray(C.gen.rows, dtype=np.int64).reshape(k, C.n)
    total = q**k
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        msgs = np.empty((len(idx), k), dtype=np.int64)
        rest = idx
        for i in range(k):
            rest, msgs[:, i] = np.divmod(rest, q)
        if ctx.prime:
            yield (msgs @ G) % q
        else:
            acc = np.zeros((len(idx), C.n), dtype=np.int64)
            for i in range(k):
                acc = ctx.vadd(acc, ctx.vmul(msgs[:, i : i + 1], G[i][None, :]))
            yield acc


def min_distance(C: LinearCode, max_enum: int = MIN_DISTANCE_BUDGET) -> int:
    """Minimum weight over all nonzero codewords, by exhaustive enumeration."""
    if C.k == 0:
        raise EmptyCode("the zero code has no minimum distance")
    if C.ctx.q**C.k > max_enum:
        raise BudgetExceeded(f"q^k = {C.ctx.q}^{C.k} exceeds enumeration budget {max_enum}")
    best = C.n
    first = True
    for words in iter_codewords(C):
        w = np.count_nonzero(words, axis=1)
        if first:
            w = w[1:]  # message 0
            first = False
        if len(w):
            best = min(best, int(w.min()))
    return best


# --- evaluation map on quadratic forms --------------------------------------

def monomial_pairs(k: int) -> list[tuple[int, int]]:
    """Monomials x_i x_j, i <= j, in lexicographic order."""
    return [(i, j) for i in range(k) for j in range(i, k)]


def evaluation_matrix(G: MatFq) -> MatFq:
    """n x k(k+1)/2 matrix whose row l holds the monomials evaluated at column l of G."""
    ctx = G.ctx
    pairs = monomial_pairs(G.nrows)
    cols = G.transpose().rows
    rows = tuple(tuple(ctx.mul(c[i], c[j]) for i, j in pairs) for c in cols)
    return MatFq(ctx, G.ncols, len(pairs), rows)


def _ev_rank_bits(rows: list, k: int, n: int) -> int:
    m = k * (k + 1) // 2
    pairs = monomial_pairs(k)
    ev_rows = []
    for col in range(n):
        c = 0
        for i, r in enumerate(rows):
            if (r >> col) & 1:
                c |= 1 << i
        if c:
            v = 0
            for t, (i, j) in enumerate(pairs):
                if (c >> i) & 1 and (c >> j) & 1:
                    v |= 1 << t
            ev_rows.append(v)
    return len(rref_bits(ev_rows, m)[1])


def ev_kernel_dim(C: LinearCode | MatFq) -> int:
    """dim of the kernel of Q -> (Q(pi_1), ..., Q(pi_n)) on quadratic forms in k variables.

    Accepts a code (its canonical generator is used) or any generator
    matrix, including a rank-deficient one.
    """
    G = C.gen if isinstance(C, LinearCode) else C
    k, n = G.nrows, G.ncols
    m = k * (k + 1) // 2
    if G.ctx.q == 2:
        return m - _ev_rank_bits(list(G.packed), k, n)
    return m - rank(evaluation_matrix(G))


def ev_kernel_dim_native(ctx: FieldCtx, rows: list, n: int) -> int:
    k = len(rows)
    if ctx.q == 2:
        return k * (k + 1) // 2 - _ev_rank_bits(rows, k, n)
    return ev_kernel_dim(MatFq(ctx, k, n, tuple(tuple(r) for r in rows)))


def ev_kernel_forms(C: LinearCode | MatFq) -> list[tuple[int, ...]]:
    """Coefficient vectors (monomial order) of a basis of ker ev_C."""
    G = C.gen if isinstance(C, LinearCode) else C
    return [tuple(r) for r in kernel_basis(evaluation_matrix(G)).rows]


# --- distinguisher ----------------------------------------------------------

@dataclass(frozen=True)
class DistinguisherReport:
    n: int
    k: int
    dim_square: int
    expected: int
    deficiency: int
    threshold: int
    verdict: str

    def as_dict(self) -> dict:
        return {
            "n": self.n, "k": self.k, "dim_square": self.dim_square, "expected": self.expected,
            "deficiency": self.deficiency, "threshold": self.threshold, "verdict": self.verdict,
        }


def distinguish(C: LinearCode, threshold: int = 1) -> DistinguisherReport:
    """Flag C as structured when its square falls ``threshold`` or more below the generic dimension."""
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    d = square_dim(C)
    expected = square_bound(C.n, C.k)
    deficiency = expected - d
    verdict = "structured" if deficiency >= threshold else "typical"
    return DistinguisherReport(C.n, C.k, d, expected, deficiency, threshold, verdict)


# --- text file format -------------------------------------------------------

def parse_code(text: str) -> LinearCode:
    """Parse ``q n k`` followed by k rows of n integers."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError("empty code file")
    head = lines[0].split()
    if len(head) != 3:
        raise ParseError("header must be 'q n k'")
    try:
        q, n, k = (int(t) for t in head)
    except ValueError as exc:
        raise ParseError(f"non-integer header: {lines[0]!r}") from exc
    ctx = field_new(q)
    if n < 1 or not 0 <= k <= n:
        raise ParseError(f"need 0 <= k <= n and n >= 1, got n={n}, k={k}")
    if len(lines) != k + 1:
        raise ParseError(f"expected {k} generator rows, found {len(lines) - 1}")
    rows = []
    for lineno, ln in enumerate(lines[1:], start=2):
        toks = ln.split()
        if len(toks) != n:
            raise ParseError(f"line {lineno}: expected {n} entries, found {len(toks)}")
        try:
            row = [int(t) for t in toks]
        except ValueError as exc:
            raise ParseError(f"line {lineno}: non-integer entry") from exc
        for v in row:
            if not 0 <= v < q:
                raise FieldError(f"line {lineno}: entry {v} is not an element of F_{q}")
        rows.append(row)
    if rank(MatFq(ctx, k, n, tuple(tuple(r) for r in rows))) < k:
        raise RankDeficient(f"the {k} generator rows are linearly dependent")
    return LinearCode.from_rows(ctx, rows, n)


def format_code(C: LinearCode) -> str:
    lines = [f"{C.ctx.q} {C.n} {C.k}"]
    lines += [" ".join(str(v) for v in row) for row in C.gen.rows]
    return "\n".join(lines) + "\n"


__all__ = [
    "DistinguisherReport", "LinearCode", "SamplerModel", "code_from_native", "code_from_systematic",
    "distinguish", "dual", "ev_kernel_dim", "ev_kernel_dim_native", "ev_kernel_forms",
    "evaluation_matrix", "format_code", "iter_codewords", "min_distance", "monomial_pairs",
    "parse_code", "puncture", "random_puncture_positions", "repetition_code", "rs_code",
    "sample_code", "sample_generator", "schur_power", "schur_product", "square_bound",
    "square_dim", "square_dim_native", "unpack_bits",
]
