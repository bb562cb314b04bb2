import pytest

from nhl.algebra import abelian, corpus, random_leibniz, simple_filippov, solvable_filippov
from nhl.complexes import AlgebraContext
from nhl.errors import HypothesisError, ShapeError
from nhl.linalg import (
    SparseMatrix,
    Subspace,
    kernel_basis,
    subspace_contains,
    subspace_intersect,
    subspace_sum,
)
from nhl.spectral import (
    binary_degeneracy_check,
    build_filtration,
    graded_page_one,
    lie_vanishing_check,
    page_cell,
    page_dims,
    verify_page_formulas,
)


class GenericFiltration:
    """The same filtration built in standard coordinates from generic kernels,
    with pages computed by subspace sums, intersections and preimages."""

    def __init__(self, a, max_total):
        self.ctx = AlgebraContext(a)
        self.F = a.field
        self.max_total = max_total
        self.cx = self.ctx.complex("leibniz", max_total + 1)
        self.pi = self.ctx.word_projection
        self._cache = {}

    def filt(self, r, k):
        """F^r at total degree k inside the chains of degree k + 1."""
        if r < 0 or k < 0:
            return Subspace.zero(self.F, self.cx.dim(k + 1))
        r = min(r, k)
        key = (r, k)
        if key not in self._cache:
            s = k - r
            op = SparseMatrix.identity(self.F, self.ctx.a.dim * self.ctx.tensor.dim**s)
            for _ in range(r + 1):
                op = op.kron(self.pi)
            self._cache[key] = kernel_basis(op)
        return self._cache[key]

    def preimage(self, r, k, target):
        """{x in F^r_k : d x in target}."""
        base = self.filt(r, k).vectors()
        if not base:
            return Subspace.zero(self.F, self.cx.dim(k + 1))
        d = self.cx.boundary(k + 1)
        ech = target.echelon()
        residuals = [res for res, _ in ech.reduce([d.matvec(b) for b in base])]
        R = SparseMatrix.from_columns(self.F, d.rows, residuals)
        combos = kernel_basis(R).vectors()
        vecs = []
        for c in combos:
            v = {}
            for i, coef in c.items():
                for j, x in base[i].items():
                    v[j] = self.F.add(v.get(j, 0), self.F.mul(coef, x))
            vecs.append({j: x for j, x in v.items() if x})
        return Subspace.span(self.F, self.cx.dim(k + 1), vecs)

    def image(self, r, k):
        """d(F^r at total degree k), inside the chains of total degree k - 1."""
        d = self.cx.boundary(k + 1)
        return Subspace.span(self.F, d.rows, [d.matvec(b) for b in self.filt(r, k).vectors()])

    def page(self, a, r, s):
        k = r + s
        Fr, Fr1 = self.filt(r, k), self.filt(r - 1, k)
        if a == "inf":
            def img(p):
                if p < 0:
                    return 0
                cyc = self.preimage(p, k, Subspace.zero(self.F, self.cx.dim(k)))
                bnd = subspace_intersect(self.image(k + 1, k + 1), self.filt(p, k))
                return cyc.dim - bnd.dim
            return img(r) - img(r - 1)
        target = self.filt(r - a, k - 1) if k >= 1 else Subspace.zero(self.F, self.cx.dim(k))
        num = subspace_sum(self.preimage(r, k, target), Fr1)
        den = subspace_sum(subspace_intersect(self.image(r + a - 1, k + 1), Fr), Fr1) \
            if r + a - 1 >= 0 else Fr1
        assert subspace_contains(num, den)
        return num.dim - den.dim


@pytest.mark.parametrize("a, top", [(abelian(2, 3), 2), (solvable_filippov(), 1)], ids=["abelian", "solvable"])
def test_pages_match_generic_subquotients(a, top):
    f = build_filtration(a, top, strict_dimension=False)
    oracle = GenericFiltration(a, top)
    pages = page_dims(f)
    for k in range(top + 1):
        for r in range(k + 1):
            for p in ("0", "1", "2", "inf"):
                expected = oracle.page(p if p == "inf" else int(p), r, k - r)
                assert pages.dims[p][(r, k - r)] == expected, (p, r, k - r)


def test_filtration_dims_abelian():
    f = build_filtration(abelian(2, 3), 2, strict_dimension=False)
    assert f.check().passed
    assert f.subspace(0, 0).dim == 6
    assert f.subspace(0, 1).dim == 24 and f.subspace(1, 0).dim == 30
    assert subspace_contains(f.subspace(1, 0), f.subspace(0, 1))


def test_filtration_matches_generic_kernel():
    a = solvable_filippov()
    f = build_filtration(a, 1)
    oracle = GenericFiltration(a, 1)
    ctx = oracle.ctx
    for k in range(2):
        change = ctx.adapted_change("leibniz", k + 1) @ f.rel.inclusion(k + 1)
        for r in range(k + 1):
            adapted = f.subspace(r, k - r)
            std = Subspace.span(a.field, change.rows, [change.matvec(v) for v in adapted.vectors()])
            generic = oracle.filt(r, k)
            assert std.dim == generic.dim and subspace_contains(generic, std)


def test_abelian_pages_are_associated_graded():
    f = build_filtration(abelian(2, 3), 2, strict_dimension=False)
    pages = page_dims(f)
    for (r, s), v in pages.dims["0"].items():
        assert v == 6 * 4**s
        assert pages.dims["1"][(r, s)] == pages.dims["2"][(r, s)] == pages.dims["inf"][(r, s)] == v


def test_large_page_equals_limit():
    f = build_filtration(solvable_filippov(), 1)
    for k in range(2):
        for r in range(k + 1):
            assert page_cell(f, k + 2, r, k - r) == page_cell(f, "inf", r, k - r)


def test_graded_complex_gives_first_page():
    f = build_filtration(solvable_filippov(), 1)
    assert graded_page_one(f) == page_dims(f, pages=("1",)).dims["1"]


def test_page_monotonicity_on_corpus():
    for name in ("simple_filippov_3", "solvable_plus_abelian_1"):
        f = build_filtration(corpus()[name], 0)
        pages = page_dims(f)
        for cell in pages.dims["0"]:
            assert pages.dims["0"][cell] >= pages.dims["1"][cell] >= pages.dims["2"][cell] >= pages.dims["inf"][cell]


def test_cells_beyond_range_rejected():
    f = build_filtration(solvable_filippov(), 1)
    with pytest.raises(ShapeError):
        page_cell(f, "0", 2, 0)
    with pytest.raises(ShapeError):
        f.subspace(2, 2)


def test_worker_count_does_not_change_pages():
    a = solvable_filippov()
    one = page_dims(build_filtration(a, 1), workers=1)
    many = page_dims(build_filtration(a, 1), workers=4)
    assert one.dims == many.dims


def test_hypothesis_guards():
    with pytest.raises(HypothesisError):
        build_filtration(random_leibniz(3), 1)
    with pytest.raises(HypothesisError):
        build_filtration(corpus()["non_filippov_3"], 1)
    with pytest.raises(HypothesisError, match="dimension"):
        build_filtration(abelian(2, 3), 1)
    assert build_filtration(abelian(2, 3), 1, strict_dimension=False).warnings


def test_page_formulas_on_solvable():
    rep = verify_page_formulas(solvable_filippov(), 2)
    assert rep.passed, rep.violations[:5]
    assert rep.notes["expected"]["HD"] == [3, 3]


def test_binary_degeneracy():
    rep = binary_degeneracy_check(random_leibniz(3), 3)
    assert rep.passed and rep.checked == 8
    with pytest.raises(HypothesisError):
        binary_degeneracy_check(simple_filippov(3), 1)


def test_lie_vanishing_branches():
    ab = lie_vanishing_check(abelian(3, 3), 2)
    assert ab.passed and ab.notes["branch"].startswith("hypothesis false")
    simple = lie_vanishing_check(simple_filippov(3), 2)
    assert simple.notes["HLie"] == [0, 0, 0]
    assert simple.passed and simple.notes["branch"] == "hypothesis true"
    with pytest.raises(HypothesisError):
        lie_vanishing_check(abelian(2, 3), 1)
