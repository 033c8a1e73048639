import itertools
import random
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from oracles import Arith, span, span_closure
from sqcodes.codes import (
    LinearCode,
    SamplerModel,
    code_from_systematic,
    distinguish,
    dual,
    ev_kernel_dim,
    ev_kernel_dim_native,
    ev_kernel_forms,
    format_code,
    iter_codewords,
    min_distance,
    parse_code,
    puncture,
    random_puncture_positions,
    repetition_code,
    rs_code,
    sample_code,
    sample_generator,
    schur_power,
    schur_product,
    square_bound,
    square_dim,
)
from sqcodes.errors import (
    BudgetExceeded,
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
from sqcodes.fq import field_new
from sqcodes.linalg import MatFq, rank
from sqcodes.quadforms import QuadraticForm, qf_eval

F2 = field_new(2)
PARITY = LinearCode.from_rows(F2, [[1, 0, 1], [0, 1, 1]], 3)


def codewords(C):
    ar = Arith(C.ctx.p, C.ctx.e, C.ctx.modulus)
    return span(ar, C.gen.rows, C.n)


def hadamard_span(C, D):
    """Oracle for C*D: span of products of all codeword pairs."""
    ctx = C.ctx
    prods = {tuple(ctx.hadamard(x, y)) for x in codewords(C) for y in codewords(D)}
    return span_closure(Arith(ctx.p, ctx.e, ctx.modulus), sorted(prods), C.n)


def test_systematic_examples():
    F3 = field_new(3)
    C = code_from_systematic(F2, MatFq.from_rows(F2, [[1], [1]]))
    assert C.gen.rows == ((1, 0, 1), (0, 1, 1)) and C == PARITY
    assert code_from_systematic(F3, MatFq.from_rows(F3, [[1, 2]])).gen.rows == ((1, 1, 2),)
    full = code_from_systematic(F2, MatFq.zeros(F2, 3, 0))
    assert full == LinearCode.full(F2, 3)


def test_canonical_equality():
    a = LinearCode.from_rows(F2, [[1, 1, 0], [0, 1, 1]], 3)
    b = LinearCode.from_rows(F2, [[1, 0, 1], [1, 1, 0], [0, 1, 1]], 3)
    assert a == b and hash(a) == hash(b)
    assert a.k == 2
    assert LinearCode.from_bits(F2, [0b011, 0b110], 3) == a


def test_schur_examples():
    F5 = field_new(5)
    rng = random.Random(1)
    D = sample_code(F5, 6, 3, SamplerModel.SystematicC, rng)
    assert schur_product(repetition_code(F5, 6), D) == D
    full = LinearCode.full(F5, 6)
    assert schur_product(full, full) == full
    assert schur_product(PARITY, PARITY) == LinearCode.full(F2, 3)
    assert schur_power(PARITY, 2) == LinearCode.full(F2, 3)
    assert schur_power(PARITY, 1) == PARITY
    rep = repetition_code(F2, 5)
    for d in (1, 2, 5):
        assert schur_power(rep, d) == rep
    with pytest.raises(ValueError):
        schur_power(PARITY, 0)
    with pytest.raises(LengthMismatch):
        schur_product(PARITY, repetition_code(F2, 4))
    with pytest.raises(FieldMismatch):
        schur_product(PARITY, repetition_code(field_new(3), 3))


@pytest.mark.parametrize("q", [2, 3, 4])
def test_schur_product_against_codeword_oracle(q):
    F = field_new(q)
    rng = random.Random(q)
    for _ in range(25):
        n = rng.randrange(2, 6)
        C = sample_code(F, n, rng.randrange(0, 3), SamplerModel.MatrixA, rng)
        D = sample_code(F, n, rng.randrange(0, 3), SamplerModel.MatrixA, rng)
        P = schur_product(C, D)
        assert codewords(P) == hadamard_span(C, D)
        assert schur_product(D, C) == P


def test_schur_monotone_and_bounded():
    rng = random.Random(3)
    for q in (2, 3, 7):
        F = field_new(q)
        for _ in range(40):
            n = rng.randrange(3, 12)
            C = sample_code(F, n, rng.randrange(1, n), SamplerModel.UniformU, rng)
            bigger = LinearCode.from_rows(F, list(C.gen.rows) + [[rng.randrange(q) for _ in range(n)]], n)
            D = sample_code(F, n, rng.randrange(1, n), SamplerModel.UniformU, rng)
            assert schur_product(C, D).is_subcode_of(schur_product(bigger, D))
            d2 = square_dim(C)
            assert d2 <= square_bound(n, C.k)
            assert ev_kernel_dim(C) + d2 == C.k * (C.k + 1) // 2


def test_dual_examples():
    F7 = field_new(7)
    assert dual(LinearCode.full(F7, 4)).k == 0
    assert dual(repetition_code(F2, 3)) == PARITY
    rng = random.Random(5)
    for q in (2, 3, 4, 7):
        F = field_new(q)
        for _ in range(30):
            n = rng.randrange(1, 10)
            C = sample_code(F, n, rng.randrange(0, n + 1), SamplerModel.MatrixA, rng)
            D = dual(C)
            assert C.k + D.k == n
            assert dual(D) == C
            for x in C.gen.rows:
                for y in D.gen.rows:
                    assert F.dot(x, y) == 0


def test_min_distance():
    assert min_distance(repetition_code(field_new(3), 5)) == 5
    assert min_distance(LinearCode.full(field_new(4), 3)) == 1
    assert min_distance(PARITY) == 2
    with pytest.raises(EmptyCode):
        min_distance(dual(LinearCode.full(F2, 3)))
    with pytest.raises(BudgetExceeded):
        min_distance(LinearCode.full(F2, 30))
    rng = random.Random(9)
    for q in (2, 3, 4):
        F = field_new(q)
        for _ in range(15):
            C = sample_code(F, 7, rng.randrange(1, 4), SamplerModel.UniformU, rng)
            words = codewords(C)
            assert min_distance(C) == min(sum(1 for v in w if v) for w in words if any(w))
            assert sum(len(c) for c in iter_codewords(C)) == q**C.k


def test_puncture():
    F3 = field_new(3)
    A = MatFq.from_rows(F3, [[1, 2, 0], [2, 2, 1]])
    C = code_from_systematic(F3, A)
    assert puncture(C, {4}) == code_from_systematic(F3, A.columns([0, 1]))
    assert puncture(repetition_code(F2, 3), {2}) == repetition_code(F2, 2)
    P = puncture(PARITY, {2})
    assert P == LinearCode.full(F2, 2) and P.k == 2
    with pytest.raises(InvalidPosition):
        puncture(PARITY, {3})
    with pytest.raises(InvalidPosition):
        puncture(PARITY, {0, 1, 2})
    rng = random.Random(2)
    for _ in range(50):
        C = sample_code(F3, 10, 4, SamplerModel.UniformU, rng)
        t = rng.randrange(0, 6)
        pos = random_puncture_positions(C, t, rng)
        assert all(p >= C.k for p in pos) and len(set(pos)) == t
        P = puncture(C, pos)
        assert C.k - t <= P.k <= C.k


def test_rs_codes():
    F17 = field_new(17)
    assert rs_code(F17, 6, 1) == repetition_code(F17, 6)
    assert rs_code(F17, 7, 7) == LinearCode.full(F17, 7)
    C = rs_code(F17, 16, 5)
    assert square_dim(C) == 9
    assert schur_product(C, C) == rs_code(F17, 16, 9)
    with pytest.raises(TooLong):
        rs_code(F17, 18, 3)
    with pytest.raises(DuplicatePoint):
        rs_code(F17, 3, 2, [1, 2, 1])
    with pytest.raises(FieldError):
        rs_code(F17, 3, 2, [1, 2, 17])


def test_distinguisher():
    F17 = field_new(17)
    rep = distinguish(LinearCode.full(F17, 5))
    assert rep.deficiency == 0 and rep.verdict == "typical"
    rep = distinguish(rs_code(F17, 16, 5))
    assert (rep.dim_square, rep.expected, rep.deficiency, rep.verdict) == (9, 15, 6, "structured")
    assert distinguish(rs_code(F17, 16, 5), threshold=7).verdict == "typical"
    with pytest.raises(ValueError):
        distinguish(PARITY, threshold=0)


def test_ev_kernel_examples():
    C = LinearCode.full(F2, 2)
    assert ev_kernel_dim(C) == 1
    (form,) = ev_kernel_forms(C)
    assert form == (0, 1, 0)  # x1 x2
    assert ev_kernel_dim(repetition_code(F2, 3)) == 0
    rng = random.Random(4)
    for _ in range(20):
        C = sample_code(F2, 12, 6, SamplerModel.SystematicC, rng)
        if square_dim(C) == 12:
            assert ev_kernel_dim(C) == 21 - 12


@pytest.mark.parametrize("q", [2, 3, 4])
def test_ev_kernel_forms_vanish_on_columns(q):
    F = field_new(q)
    rng = random.Random(q)
    for _ in range(20):
        n = rng.randrange(3, 7)
        M = MatFq.from_rows(F, [[rng.randrange(q) for _ in range(n)] for _ in range(3)])
        cols = M.transpose().rows
        forms = ev_kernel_forms(M)
        assert len(forms) == ev_kernel_dim(M)
        for f in forms:
            Q = QuadraticForm(F, 3, f)
            assert all(qf_eval(Q, c) == 0 for c in cols)


def test_ev_kernel_native_bits_agree_with_generic():
    rng = random.Random(8)
    for _ in range(200):
        k = rng.randrange(1, 7)
        n = rng.randrange(k, 20)
        G = sample_generator(F2, n, k, SamplerModel.MatrixA, rng)
        M = MatFq.from_packed(F2, G, n)
        assert ev_kernel_dim_native(F2, G, n) == k * (k + 1) // 2 - rank(
            MatFq.from_rows(F2, [F2.hadamard(M.rows[i], M.rows[j]) for i in range(k) for j in range(i, k)], n)
        )


def test_samplers():
    rng = random.Random(11)
    F3 = field_new(3)
    for _ in range(20):
        assert sample_code(F3, 4, 4, SamplerModel.SystematicC, rng) == LinearCode.full(F3, 4)
        C = sample_code(F3, 9, 4, SamplerModel.SystematicC, rng)
        assert C.k == 4 and C.gen.columns(range(4)) == MatFq.identity(F3, 4)
        assert sample_code(F3, 9, 4, SamplerModel.UniformU, rng).k == 4
    assert SamplerModel("matrix") is SamplerModel.MatrixA


def test_matrix_model_rank_deficiency_rate():
    rng = random.Random(12)
    trials = 20_000
    low = sum(1 for _ in range(trials) if sample_code(F2, 5, 2, SamplerModel.MatrixA, rng).k < 2)
    p = low / trials
    assert p <= 2**-3 + 4 * (p * (1 - p) / trials) ** 0.5


def test_uniform_model_is_uniform_over_codes():
    rng = random.Random(13)
    trials = 100_000
    tally = Counter(tuple(sample_generator(F2, 4, 2, SamplerModel.UniformU, rng)) for _ in range(trials))
    codes = Counter()
    for rows, c in tally.items():
        codes[LinearCode.from_bits(F2, rows, 4)] += c
    assert len(codes) == 35
    p = 1 / 35
    se = (p * (1 - p) / trials) ** 0.5
    for c in codes.values():
        assert abs(c / trials - p) <= 4 * se


def test_dual_of_square_distance_self_consistent():
    rng = random.Random(14)
    for _ in range(10):
        C = sample_code(F2, 10, 4, SamplerModel.SystematicC, rng)
        S = schur_product(C, C)
        if S.k == 10:
            continue
        D = dual(S)
        words = codewords(D)
        assert min_distance(D) == min(sum(w) for w in words if any(w))


def test_code_file_round_trip():
    C = parse_code("2 3 2\n1 0 1\n0 1 1\n")
    assert C == PARITY
    assert parse_code(format_code(C)) == C
    assert format_code(C) == "2 3 2\n1 0 1\n0 1 1\n"
    with pytest.raises(FieldError):
        parse_code("2 3 2\n1 0 2\n0 1 1\n")
    with pytest.raises(RankDeficient):
        parse_code("2 3 2\n1 0 1\n1 0 1\n")
    for bad in ["", "2 3\n", "2 3 2\n1 0 1\n", "2 3 1\n1 0\n", "2 x 1\n1 0 1\n", "2 3 1\n1 a 1\n"]:
        with pytest.raises(ParseError):
            parse_code(bad)


@given(st.sampled_from([2, 3, 4, 5]), st.integers(1, 8), st.data())
def test_dimension_identities(q, n, data):
    F = field_new(q)
    k = data.draw(st.integers(0, n))
    rng = random.Random(data.draw(st.integers(0, 2**32)))
    model = data.draw(st.sampled_from(list(SamplerModel)))
    C = sample_code(F, n, k, model, rng)
    assert C.k + dual(C).k == n
    assert square_dim(C) <= square_bound(n, C.k)
    assert ev_kernel_dim(C) + square_dim(C) == C.k * (C.k + 1) // 2
    assert parse_code(format_code(C)) == C if C.k else True
