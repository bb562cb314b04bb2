import itertools
import random
from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from nhl.algebra import abelian, corpus, random_leibniz, simple_filippov, solvable_filippov
from nhl.errors import HypothesisError, ShapeError
from nhl.induced import (
    AdaptedBasis,
    CorepPair,
    WordBasis,
    build_tensor_words,
    build_wedge_words,
    check_corep_axioms,
    corep_adjoint,
    corep_adjoint_wedge,
    corep_extended_adjoint,
    corep_quotient_actions,
    corep_tensor_over_wedge,
    extend_actions,
    gamma_basis,
    gamma_subalgebra,
    trivial_corep,
    wedge_projection,
)
from nhl.linalg import Field, SparseMatrix, kernel_basis, rank, subspace_contains

GF = Field.prime(32003)
FILIPPOV = [simple_filippov(3), solvable_filippov(), abelian(2, 3), abelian(3, 3)]


def test_word_basis_orders():
    tw = WordBasis("tensor", 3, 2)
    assert tw.words()[:4] == [(0, 0), (0, 1), (0, 2), (1, 0)]
    ww = WordBasis("wedge", 4, 2)
    assert ww.words() == list(itertools.combinations(range(4), 2))
    with pytest.raises(ShapeError):
        ww.rank((1, 0))
    with pytest.raises(ShapeError):
        tw.rank((0, 3))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4), st.integers(0, 3), st.data())
def test_word_basis_round_trip(d, length, data):
    for kind in ("tensor", "wedge"):
        wb = WordBasis(kind, d, length)
        if wb.size == 0:
            continue
        i = data.draw(st.integers(0, wb.size - 1))
        assert wb.rank(wb.unrank(i)) == i


def test_tensor_product_hand_expansion():
    s = simple_filippov(3)
    D = build_tensor_words(s)
    tw = WordBasis("tensor", 4, 2)
    # [e0⊗e1, e2⊗e3] = [e0,e2,e3]⊗e1 + e0⊗[e1,e2,e3] = e1⊗e1 + e0⊗e0
    got = D.bracket(tw.rank((0, 1)), tw.rank((2, 3)))
    assert got == {tw.rank((1, 1)): 1, tw.rank((0, 0)): 1}


def test_induced_algebras_are_leibniz():
    for name, a in corpus().items():
        if not a.is_leibniz:
            continue
        assert build_tensor_words(a).check_leibniz().passed, name
        if a.is_filippov or a.n == 2:
            assert build_wedge_words(a).check_leibniz().passed, name


def test_wedge_requires_antisymmetry():
    a = corpus()["non_filippov_3"]
    with pytest.raises(HypothesisError):
        build_wedge_words(a)


@pytest.mark.parametrize("a", FILIPPOV, ids=lambda a: a.name)
def test_projection_is_algebra_map(a):
    D, L = build_tensor_words(a), build_wedge_words(a)
    pi = wedge_projection(a)
    for x in range(D.dim):
        for y in range(D.dim):
            lhs = pi.matvec(D.bracket(x, y))
            rhs = L.bracket_vec(pi.column(x), pi.column(y))
            assert lhs == rhs


@pytest.mark.parametrize("a", FILIPPOV + [abelian(4, 3)], ids=lambda a: a.name)
def test_gamma_is_kernel_of_projection(a):
    pi = wedge_projection(a)
    assert rank(pi) == comb(a.dim, a.n - 1)
    gam = gamma_basis(a)
    generic = kernel_basis(pi)
    assert gam.dim == generic.dim == a.dim ** (a.n - 1) - comb(a.dim, a.n - 1)
    assert subspace_contains(gam, generic) and subspace_contains(generic, gam)


def test_gamma_dimensions():
    assert gamma_basis(abelian(2, 3)).dim == 3
    assert gamma_basis(simple_filippov(3)).dim == 10
    assert gamma_basis(random_leibniz(3)).dim == 0


@pytest.mark.parametrize("a", [simple_filippov(3), solvable_filippov()], ids=lambda a: a.name)
def test_adapted_basis_inverts_and_preserves_product(a):
    ab = AdaptedBasis(a)
    n = ab.dim
    assert ab.P @ ab.Pinv == SparseMatrix.identity(a.field, n)
    D = build_tensor_words(a)
    Da = D.change_basis(ab.P, ab.Pinv)
    rng = random.Random(1)
    for _ in range(30):
        x, y = rng.randrange(n), rng.randrange(n)
        direct = ab.Pinv.matvec(D.bracket_vec(ab.P.column(x), ab.P.column(y)))
        assert Da.bracket(x, y) == direct
    # projection in adapted coordinates keeps exactly the sorted block
    assert wedge_projection(a) @ ab.P == ab.projection()


def test_gamma_closed_under_product():
    for a in FILIPPOV:
        G = gamma_subalgebra(a)
        assert G.dim == gamma_basis(a).dim
        assert G.check_leibniz().passed


def _corep_suite(a):
    pairs = [
        corep_adjoint(a),
        corep_adjoint_wedge(a),
        corep_tensor_over_wedge(a),
        corep_tensor_over_wedge(a).symmetric_companion(),
        corep_extended_adjoint(a),
    ]
    pairs.extend(corep_quotient_actions(a).values())
    return pairs


@pytest.mark.parametrize("a", [simple_filippov(3), solvable_filippov()], ids=lambda a: a.name)
def test_corep_axioms_hold(a):
    for pair in _corep_suite(a):
        rep = check_corep_axioms(pair)
        assert rep.passed, (pair.name, rep.violations[:3])
        assert rep.checked == 3 * pair.algebra.dim**2


def test_corep_shapes_and_symmetry():
    s = simple_filippov(3)
    adj = corep_adjoint(s)
    assert all(l == -r for l, r in zip(adj.left, adj.right))
    tow = corep_tensor_over_wedge(s)
    assert tow.antisymmetric and not tow.is_trivial
    # the action of a wedge word only depends on its sorted representative up to sign
    D = build_tensor_words(s)
    tw = WordBasis("tensor", 4, 2)
    assert tow.left[0] == -D.right_mult[tw.rank((0, 1))]
    assert D.right_mult[tw.rank((1, 0))] == -D.right_mult[tw.rank((0, 1))]
    with pytest.raises(ShapeError):
        CorepPair("bad", D, 2, adj.left, adj.right)


def test_corep_negative_controls():
    s = simple_filippov(3)
    adj = corep_adjoint(s)
    flipped = CorepPair("flipped", adj.algebra, adj.coef_dim, list(adj.right), list(adj.right))
    assert not check_corep_axioms(flipped).passed
    literal = corep_extended_adjoint(s, right="literal")
    rep = check_corep_axioms(literal)
    assert not rep.passed
    assert {v.where[0] for v in rep.violations} == {"axiom3"}


def test_trivial_corep_passes():
    D = build_tensor_words(simple_filippov(3))
    assert check_corep_axioms(trivial_corep(D, 2)).passed


def _extended_oracle(pair, k, g, v, word):
    """Closed form (left(g, v), h) - Σ_i (v, h_1..[h_i, g]..h_k) on one basis vector."""
    F = pair.field
    h = pair.algebra
    H = h.dim
    out = {}

    def add(coef_vec, letters_list):
        for c_idx, c_val in coef_vec.items():
            for letters, val in letters_list:
                idx = c_idx
                for x in letters:
                    idx = idx * H + x
                out[idx] = F.add(out.get(idx, 0), F.mul(c_val, val))

    add(pair.left[g].column(v), [(word, F.one)])
    for i, x in enumerate(word):
        for y, c in h.bracket(x, g).items():
            add({v: F.one}, [(word[:i] + (y,) + word[i + 1:], F.neg(c))])
    return {i: c for i, c in out.items() if c}


@pytest.mark.parametrize("k", [0, 1, 2])
def test_extended_action_matches_closed_form(k):
    pair = corep_adjoint(simple_filippov(3))
    acts = extend_actions(pair, k)
    H = pair.algebra.dim
    rng = random.Random(k)
    for _ in range(25):
        g = rng.randrange(H)
        v = rng.randrange(pair.coef_dim)
        word = tuple(rng.randrange(H) for _ in range(k))
        idx = v
        for x in word:
            idx = idx * H + x
        assert acts[g].column(idx) == _extended_oracle(pair, k, g, v, word)
    if k == 0:
        assert acts == list(pair.left)


def test_binary_input_has_trivial_kernel():
    b = random_leibniz(3)
    assert b.n == 2
    ab = AdaptedBasis(b)
    assert ab.n_gamma == 0
    assert rank(wedge_projection(b)) == 3
