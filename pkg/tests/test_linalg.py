from fractions import Fraction
import random

import pytest
from hypothesis import given, settings, strategies as st

from nhl.errors import FieldError, NotInSpanError, ShapeError
from nhl.linalg import (
    Echelon,
    Field,
    SparseMatrix,
    Subspace,
    field_arith,
    kernel_basis,
    rank,
    solve_in_span,
    subspace_ops,
)

P = 32003
GF = Field.prime(P)
QQ = Field.rational()


def dense_rank(rows, p=None):
    """Textbook row reduction on a list of lists; the independent oracle."""
    m = [[Fraction(x) if p is None else x % p for x in r] for r in rows]
    r = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c] if p is None else pow(m[r][c], -1, p)
        m[r] = [x * inv if p is None else x * inv % p for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * b if p is None else (a - f * b) % p for a, b in zip(m[i], m[r])]
        r += 1
    return r


def random_matrix(rng, rows, cols, density=0.3, lo=-3, hi=3):
    return [[rng.randint(lo, hi) if rng.random() < density else 0 for _ in range(cols)] for _ in range(rows)]


def low_rank_matrix(rng, rows, cols, r):
    a = random_matrix(rng, rows, r, 0.7)
    b = random_matrix(rng, r, cols, 0.7)
    return [[sum(a[i][k] * b[k][j] for k in range(r)) for j in range(cols)] for i in range(rows)]


# fields ---------------------------------------------------------------------


def test_field_rejects_bad_characteristic():
    for bad in (2, 4, 1, 0, 32001):
        with pytest.raises(FieldError):
            Field.prime(bad)
    assert Field.parse("prime:7") == Field.prime(7)
    assert Field.parse("rational") == QQ
    with pytest.raises(FieldError):
        Field.parse("prime:x")


def test_field_coercion_and_inverse():
    assert GF("1/2") == (P + 1) // 2
    assert QQ("3/6") == Fraction(1, 2)
    assert field_arith(GF, "mul", GF(3), field_arith(GF, "inv", GF(3))) == 1
    assert field_arith(QQ, "add", QQ(1), QQ("-1/3")) == Fraction(2, 3)
    with pytest.raises(FieldError):
        Field.prime(7)("1/7")
    with pytest.raises(FieldError):
        GF.inv(0)
    assert GF.to_str(GF(-1)) == "-1"
    assert QQ.to_str(Fraction(-2, 4)) == "-1/2"


@given(st.integers(1, P - 1), st.integers(0, P - 1))
def test_prime_field_axioms(a, b):
    assert GF.mul(a, GF.inv(a)) == 1
    assert GF.add(GF.sub(b, a), a) == b
    assert GF(GF.to_str(a)) == a


# matrices -------------------------------------------------------------------


def test_sparse_matrix_basics():
    m = SparseMatrix.from_dense(QQ, [[1, 0, 2], [0, 0, 0]])
    assert m.nnz == 2
    assert m.T.shape == (3, 2)
    assert (m @ SparseMatrix.identity(QQ, 3)) == m
    assert (m - m).is_zero()
    assert m.submatrix([0], [2, 0]).to_dense() == [[2, 1]]
    with pytest.raises(ShapeError):
        m @ m
    with pytest.raises(ShapeError):
        SparseMatrix.from_triplets(QQ, 2, 2, [(2, 0, 1)])
    t = SparseMatrix.from_triplets(GF, 2, 2, [(0, 0, 1), (0, 0, -1), (1, 1, 5)])
    assert t.triplets() == [(1, 1, 5)]


def test_kron_matches_definition():
    a = SparseMatrix.from_dense(QQ, [[1, 2], [0, 3]])
    b = SparseMatrix.from_dense(QQ, [[0, 1], [4, 0]])
    k = a.kron(b).to_dense()
    for i1 in range(2):
        for i2 in range(2):
            for j1 in range(2):
                for j2 in range(2):
                    assert k[i1 * 2 + i2][j1 * 2 + j2] == a.entry(i1, j1) * b.entry(i2, j2)


# rank -----------------------------------------------------------------------


@pytest.mark.parametrize("field", [QQ, GF])
def test_rank_against_dense_oracle(field):
    rng = random.Random(7)
    for _ in range(25):
        rows, cols = rng.randint(1, 12), rng.randint(1, 12)
        d = random_matrix(rng, rows, cols)
        assert rank(SparseMatrix.from_dense(field, d)) == dense_rank(d, field.p)


@pytest.mark.parametrize("engine", ["dict", "dense"])
def test_rank_engines_agree_on_low_rank(engine):
    rng = random.Random(11)
    for r in (0, 5, 17, 40):
        d = low_rank_matrix(rng, 70, 90, r) if r else [[0] * 90 for _ in range(70)]
        m = SparseMatrix.from_dense(GF, d)
        ech = Echelon(GF, 70, engine=engine)
        ech.insert(m.columns())
        assert ech.rank == dense_rank(d, P)


def test_rank_rational_vs_prime_can_differ():
    # det = 32003, singular only mod P
    d = [[32003, 0], [0, 1]]
    assert rank(SparseMatrix.from_dense(QQ, d)) == 2
    assert rank(SparseMatrix.from_dense(GF, d)) == 1


# kernels and spans ------------------------------------------------------------


@pytest.mark.parametrize("engine", ["dict", "dense"])
def test_kernel_multiplies_back_to_zero(engine):
    rng = random.Random(3)
    field = GF
    for _ in range(6):
        d = low_rank_matrix(rng, 60, 64, rng.randint(1, 30))
        m = SparseMatrix.from_dense(field, d)
        ech = Echelon(field, m.rows, tag_dim=m.cols, engine=engine)
        rels = ech.insert(m.columns(), [{j: 1} for j in range(m.cols)])
        ker = [r for r in rels if r is not None]
        # rank-nullity and m @ k == 0
        assert len(ker) == m.cols - dense_rank(d, P)
        for k in ker:
            assert not m.matvec(k)
        assert rank(SparseMatrix.from_columns(field, m.cols, ker)) == len(ker)


def test_kernel_basis_rational():
    m = SparseMatrix.from_dense(QQ, [[1, 2, 3], [2, 4, 6]])
    ker = kernel_basis(m)
    assert ker.dim == 2
    assert all(not m.matvec(v) for v in ker.vectors())


@pytest.mark.parametrize("engine", ["dict", "dense"])
def test_reduce_returns_combination(engine):
    rng = random.Random(5)
    field = GF
    n = 64
    vecs = [{i: rng.randint(1, P - 1) for i in rng.sample(range(n), 6)} for _ in range(30)]
    ech = Echelon(field, n, tag_dim=30, engine=engine)
    ech.insert(vecs, [{j: 1} for j in range(30)])
    target = {}
    for j in (2, 7, 29):
        for k, v in vecs[j].items():
            target[k] = (target.get(k, 0) + 3 * v) % P
    target = {k: v for k, v in target.items() if v}
    [(res, combo)] = ech.reduce([target])
    assert not res
    back = {}
    for j, c in combo.items():
        for k, v in vecs[j].items():
            back[k] = (back.get(k, 0) + c * v) % P
    assert {k: v for k, v in back.items() if v} == target


def test_solve_in_span_and_failure():
    basis = Subspace(QQ, 3, [{0: 1, 1: 1}, {2: 2}])
    c = solve_in_span(basis, {0: 2, 1: 2, 2: 4})
    assert c == {0: 2, 1: 2}
    with pytest.raises(NotInSpanError):
        solve_in_span(basis, {0: 1})


def test_subspace_dependent_basis_rejected():
    with pytest.raises(ShapeError):
        Subspace(QQ, 2, [{0: 1}, {0: 2}])


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_dimension_formula(data):
    n = data.draw(st.integers(1, 7))
    entries = st.integers(-2, 2)
    u_vecs = data.draw(st.lists(st.lists(entries, min_size=n, max_size=n), max_size=5))
    w_vecs = data.draw(st.lists(st.lists(entries, min_size=n, max_size=n), max_size=5))
    to_dict = lambda r: {i: QQ(x) for i, x in enumerate(r) if x}
    u = Subspace.span(QQ, n, [to_dict(r) for r in u_vecs])
    w = Subspace.span(QQ, n, [to_dict(r) for r in w_vecs])
    s = subspace_ops("sum", u, w)
    i = subspace_ops("intersect", u, w)
    assert s.dim + i.dim == u.dim + w.dim
    assert subspace_ops("contains", s, u) and subspace_ops("contains", u, i)
    assert subspace_ops("quotient_dim", u, w) == s.dim - w.dim
