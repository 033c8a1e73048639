"""Dense matrices over F_q: row reduction, rank, kernels, products.

Matrices are immutable row-major tuples of ints.  Over F_2 a second,
bit-packed path stores each row as one Python int (bit j = column j) and
eliminates with word-wide XOR; ``rref`` picks it automatically and both
paths give identical results.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .errors import DimensionMismatch, FieldMismatch
from .fq import FieldCtx


@dataclass(frozen=True, eq=False)
class MatFq:
    ctx: FieldCtx
    nrows: int
    ncols: int
    rows: tuple[tuple[int, ...], ...]

    @classmethod
    def from_rows(cls, ctx: FieldCtx, rows: Iterable[Sequence[int]], ncols: int | None = None) -> MatFq:
        rows = tuple(tuple(int(v) for v in r) for r in rows)
        if ncols is None:
            if not rows:
                raise DimensionMismatch("column count needed for a matrix with no rows")
            ncols = len(rows[0])
        for r in rows:
            if len(r) != ncols:
                raise DimensionMismatch("ragged rows")
            for v in r:
                if not 0 <= v < ctx.q:
                    raise ValueError(f"entry {v} not in F_{ctx.q}")
        return cls(ctx, len(rows), ncols, rows)

    @classmethod
    def from_packed(cls, ctx: FieldCtx, bits: Iterable[int], ncols: int) -> MatFq:
        rows = tuple(tuple((b >> j) & 1 for j in range(ncols)) for b in bits)
        return cls(ctx, len(rows), ncols, rows)

    @classmethod
    def zeros(cls, ctx: FieldCtx, nrows: int, ncols: int) -> MatFq:
        return cls(ctx, nrows, ncols, tuple((0,) * ncols for _ in range(nrows)))

    @classmethod
    def identity(cls, ctx: FieldCtx, n: int) -> MatFq:
        return cls(ctx, n, n, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @cached_property
    def packed(self) -> tuple[int, ...]:
        """Rows as bit masks; only meaningful over F_2."""
        if self.ctx.q != 2:
            raise ValueError("packed view exists only over F_2")
        return tuple(pack_bits(r) for r in self.rows)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MatFq):
            return NotImplemented
        return (
            self.ctx.q == other.ctx.q
            and self.ncols == other.ncols
            and self.rows == other.rows
        )

    def __hash__(self) -> int:
        return hash((self.ctx.q, self.ncols, self.rows))

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.rows[i][j]

    def transpose(self) -> MatFq:
        cols = tuple(zip(*self.rows)) if self.nrows else tuple(() for _ in range(self.ncols))
        return MatFq(self.ctx, self.ncols, self.nrows, tuple(tuple(c) for c in cols))

    def columns(self, idx: Sequence[int]) -> MatFq:
        return MatFq(self.ctx, self.nrows, len(idx), tuple(tuple(r[j] for j in idx) for r in self.rows))

    def hstack(self, other: MatFq) -> MatFq:
        _same_field(self, other)
        if self.nrows != other.nrows:
            raise DimensionMismatch("row counts differ")
        return MatFq(self.ctx, self.nrows, self.ncols + other.ncols,
                     tuple(a + b for a, b in zip(self.rows, other.rows)))

    def vstack(self, other: MatFq) -> MatFq:
        _same_field(self, other)
        if self.ncols != other.ncols:
            raise DimensionMismatch("column counts differ")
        return MatFq(self.ctx, self.nrows + other.nrows, self.ncols, self.rows + other.rows)

    def __repr__(self) -> str:
        return f"MatFq(q={self.ctx.q}, {self.nrows}x{self.ncols}, {list(map(list, self.rows))})"


def pack_bits(row: Sequence[int]) -> int:
    v = 0
    for j, b in enumerate(row):
        if b:
            v |= 1 << j
    return v


def unpack_bits(v: int, n: int) -> tuple[int, ...]:
    return tuple((v >> j) & 1 for j in range(n))


def _same_field(a: MatFq, b: MatFq) -> None:
    if a.ctx.q != b.ctx.q:
        raise FieldMismatch(f"F_{a.ctx.q} vs F_{b.ctx.q}")


# --- row reduction ----------------------------------------------------------

def rref_bits(rows: Sequence[int], ncols: int) -> tuple[list[int], list[int]]:
    """Gauss-Jordan over F_2 on packed rows; returns (nonzero rows, pivots)."""
    work = [r for r in rows if r]
    pivots: list[int] = []
    rank = 0
    for col in range(ncols):
        bit = 1 << col
        for i in range(rank, len(work)):
            if work[i] & bit:
                break
        else:
            continue
        work[rank], work[i] = work[i], work[rank]
        pr = work[rank]
        for j in range(len(work)):
            if j != rank and work[j] & bit:
                work[j] ^= pr
        pivots.append(col)
        rank += 1
        if rank == len(work):
            break
    return work[:rank], pivots


def _rref_generic(ctx: FieldCtx, rows: Sequence[Sequence[int]], ncols: int) -> tuple[list[list[int]], list[int]]:
    work = [list(r) for r in rows if any(r)]
    pivots: list[int] = []
    rank = 0
    for col in range(ncols):
        for i in range(rank, len(work)):
            if work[i][col]:
                break
        else:
            continue
        work[rank], work[i] = work[i], work[rank]
        pv = work[rank][col]
        if pv != 1:
            work[rank] = ctx.scale(ctx.inv(pv), work[rank])
        pr = work[rank]
        for j in range(len(work)):
            if j != rank and work[j][col]:
                work[j] = ctx.axpy(work[j], work[j][col], pr)
        pivots.append(col)
        rank += 1
        if rank == len(work):
            break
    return work[:rank], pivots


def rref(M: MatFq, packed: bool | None = None) -> tuple[MatFq, int, list[int]]:
    """Reduced row echelon form, keeping M's shape (zero rows at the bottom).

    ``packed`` forces (True) or forbids (False) the F_2 bit-packed path;
    by default it is used whenever q == 2.
    """
    ctx = M.ctx
    use_bits = ctx.q == 2 if packed is None else packed
    if use_bits and ctx.q != 2:
        raise ValueError("packed elimination needs q == 2")
    if use_bits:
        bits, pivots = rref_bits(M.packed, M.ncols)
        red = [unpack_bits(b, M.ncols) for b in bits]
    else:
        red, pivots = _rref_generic(ctx, M.rows, M.ncols)
    rank = len(pivots)
    rows = tuple(tuple(r) for r in red) + ((0,) * M.ncols,) * (M.nrows - rank)
    return MatFq(ctx, M.nrows, M.ncols, rows), rank, pivots


def rank(M: MatFq) -> int:
    if M.ctx.q == 2:
        return len(rref_bits(M.packed, M.ncols)[1])
    return len(_rref_generic(M.ctx, M.rows, M.ncols)[1])


def row_basis(M: MatFq) -> MatFq:
    """The nonzero rows of rref(M): the canonical basis of the row space."""
    R, r, _ = rref(M)
    return MatFq(M.ctx, r, M.ncols, R.rows[:r])


def kernel_basis(M: MatFq, packed: bool | None = None) -> MatFq:
    """Basis of {x : M x^T = 0}, one row per free column (in column order)."""
    ctx = M.ctx
    R, r, pivots = rref(M, packed=packed)
    pivot_set = set(pivots)
    free = [j for j in range(M.ncols) if j not in pivot_set]
    basis = []
    for f in free:
        x = [0] * M.ncols
        x[f] = 1
        for i, pc in enumerate(pivots):
            x[pc] = ctx.neg(R.rows[i][f])
        basis.append(tuple(x))
    return MatFq(ctx, len(basis), M.ncols, tuple(basis))


def left_kernel_basis(M: MatFq) -> MatFq:
    return kernel_basis(M.transpose())


# --- products ---------------------------------------------------------------

def mat_mul(A: MatFq, B: MatFq) -> MatFq:
    _same_field(A, B)
    if A.ncols != B.nrows:
        raise DimensionMismatch(f"{A.nrows}x{A.ncols} times {B.nrows}x{B.ncols}")
    ctx = A.ctx
    cols = B.transpose().rows
    rows = tuple(tuple(ctx.dot(a, c) for c in cols) for a in A.rows)
    return MatFq(ctx, A.nrows, B.ncols, rows)


def mat_vec(A: MatFq, x: Sequence[int]) -> tuple[int, ...]:
    if len(x) != A.ncols:
        raise DimensionMismatch(f"{A.nrows}x{A.ncols} times vector of length {len(x)}")
    return tuple(A.ctx.dot(a, x) for a in A.rows)


def solve_in_span(ctx: FieldCtx, basis: Sequence[Sequence[int]], v: Sequence[int]) -> list[int] | None:
    """Coefficients c with sum c_i basis_i = v, or None if v is outside the span.

    ``basis`` must be linearly independent.
    """
    h = len(basis)
    n = len(v)
    # solve B^T c = v by reducing the augmented matrix [B^T | v]
    aug = [[basis[i][j] for i in range(h)] + [v[j]] for j in range(n)]
    red, pivots = _rref_generic(ctx, aug, h + 1)
    if pivots and pivots[-1] == h:
        return None
    c = [0] * h
    for row, pc in zip(red, pivots):
        c[pc] = row[h]
    return c


# --- incremental elimination ------------------------------------------------

class RowReducer:
    """Echelon basis that grows one row at a time.

    ``add`` reduces the new row by the stored rows (matching leading
    positions) and keeps it if anything survives.
    """

    def __init__(self, ctx: FieldCtx, ncols: int):
        self.ctx = ctx
        self.ncols = ncols
        self.bits = ctx.q == 2
        self._by_lead: dict[int, object] = {}

    @property
    def rank(self) -> int:
        return len(self._by_lead)

    @property
    def full(self) -> bool:
        return len(self._by_lead) == self.ncols

    def add(self, row) -> bool:
        """Insert a row (packed int over F_2, else a sequence); True if rank grew."""
        basis = self._by_lead
        if self.bits:
            r = row
            while r:
                lead = (r & -r).bit_length() - 1
                b = basis.get(lead)
                if b is None:
                    basis[lead] = r
                    return True
                r ^= b
            return False
        ctx = self.ctx
        r = list(row)
        lead = 0
        n = self.ncols
        while True:
            while lead < n and r[lead] == 0:
                lead += 1
            if lead == n:
                return False
            b = basis.get(lead)
            if b is None:
                if r[lead] != 1:
                    r = ctx.scale(ctx.inv(r[lead]), r)
                basis[lead] = r
                return True
            r = ctx.axpy(r, r[lead], b)

    def contains(self, row) -> bool:
        """Membership test without inserting."""
        saved = dict(self._by_lead)
        grew = self.add(row)
        self._by_lead = saved
        return not grew

    def matrix(self) -> MatFq:
        """The reduced row echelon basis of everything added so far."""
        if self.bits:
            bits, _ = rref_bits(list(self._by_lead.values()), self.ncols)
            return MatFq(self.ctx, len(bits), self.ncols, tuple(unpack_bits(b, self.ncols) for b in bits))
        red, _ = _rref_generic(self.ctx, list(self._by_lead.values()), self.ncols)
        return MatFq(self.ctx, len(red), self.ncols, tuple(tuple(r) for r in red))
