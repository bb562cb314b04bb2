"""End-to-end acceptance runs over the built-in corpus.

Each test is one criterion; the terminal summary prints one PASS/FAIL line per
criterion (see conftest.py).
"""

import json
import time
from math import comb

import pytest

from nhl.algebra import (
    AlgebraSpec,
    abelian,
    check_filippov,
    check_fundamental_identity,
    corpus,
    simple_filippov,
)
from nhl.complexes import COMPLEX_NAMES, AlgebraContext, check_action_compatibility, check_d_squared, homology
from nhl.induced import check_corep_axioms
from nhl.linalg import Field
from nhl.report import RunConfig, corep_pairs, emit_report, run
from nhl.sequences import assemble_les, ladder_check, verify_exactness
from nhl.spectral import binary_degeneracy_check, build_filtration, page_dims, verify_page_formulas

CORPUS = corpus()
FILIPPOV = {name: a for name, a in CORPUS.items() if a.is_filippov}
SUBCOMPLEXES = ("relative", "gamma", "mixed_kernel")


def corrupted_simple() -> AlgebraSpec:
    s = simple_filippov(3)
    consts = dict(s.constants)
    consts[(1, 2, 3)] = {0: s.field(-1)}
    return AlgebraSpec("corrupted_simple", 3, 4, s.field, consts)


def test_criterion_01_axioms():
    start = time.perf_counter()
    for name, a in FILIPPOV.items():
        assert check_fundamental_identity(a).passed, name
        assert check_filippov(a).passed, name
    bad = corrupted_simple()
    assert not check_fundamental_identity(bad).passed
    ctx = AlgebraContext(simple_filippov(3))
    pairs = corep_pairs(ctx)
    assert {"adjoint", "tensor_over_wedge", "extended_adjoint", "quotient_mixed",
            "quotient_g_over_gamma", "quotient_gamma_over_L"} <= set(pairs)
    for name, pair in pairs.items():
        rep = check_corep_axioms(pair)
        assert rep.passed, (name, rep.violations[:3])
        assert rep.checked == 3 * pair.algebra.dim**2
    assert time.perf_counter() - start < 10


def test_criterion_02_d_squared():
    start = time.perf_counter()
    for name, a in FILIPPOV.items():
        K = 2 if a.dim >= 4 else 3
        ctx = AlgebraContext(a)
        for which in COMPLEX_NAMES:
            rep = check_d_squared(ctx.complex(which, K))
            assert rep.passed and rep.checked == K, (name, which)
        for which in SUBCOMPLEXES:
            sub = ctx.kernel_subcomplex(which, K)
            assert sub.check_closure().passed, (name, which)
            assert check_d_squared(sub.complex).passed, (name, which)
    assert time.perf_counter() - start < 120


@pytest.mark.parametrize("d", [2, 3])
def test_criterion_03_abelian_closed_forms(d):
    ctx = AlgebraContext(abelian(d, 3))
    pairs = comb(d, 2)
    top = 3
    leib = homology(ctx.complex("leibniz", top), top).betti
    lie = homology(ctx.complex("lie", top), top).betti
    rel = homology(ctx.kernel_subcomplex("relative", top + 1), top + 1).relative_betti()
    gam = homology(ctx.kernel_subcomplex("gamma", top), top).relative_betti()
    ks = range(top + 1)
    assert leib == [d * (d * d) ** k for k in ks]
    assert lie == [d * pairs**k for k in ks]
    assert rel[: top + 1] == [d * (d ** (2 * (k + 1)) - pairs ** (k + 1)) for k in ks]
    assert gam[: top + 1] == [(d * d - pairs) * pairs**k for k in ks]


def test_criterion_04_action_compatibility():
    rep = check_action_compatibility(AlgebraContext(simple_filippov(3)), 2)
    assert rep.passed, rep.violations[:5]
    # every generator of D at every degree, for the compatibility and homology items
    generators = simple_filippov(3).dim ** 2
    assert rep.checked >= 2 * 2 * generators
    assert rep.notes["recursion_sign_matches"]["(-1)^k"] == rep.notes["recursion_total"] > 0


@pytest.fixture(scope="module")
def les_tables():
    cache = {}

    def get(name, which):
        if (name, which) not in cache:
            cache[name, which] = assemble_les(which, AlgebraContext(FILIPPOV[name]), 2)
        return cache[name, which]

    return get


@pytest.mark.parametrize("which", ["relative", "gamma"])
@pytest.mark.parametrize("name", sorted(FILIPPOV))
def test_criterion_05_exactness(les_tables, name, which):
    table = les_tables(name, which)
    rep = verify_exactness(table)
    assert rep.passed, rep.violations[:3]
    assert table.extra_checks["ses"].passed


@pytest.mark.parametrize("which", ["relative", "gamma"])
@pytest.mark.parametrize("name", sorted(FILIPPOV))
def test_criterion_05_bottom_isomorphisms(les_tables, name, which):
    iso = les_tables(name, which).extra_checks["bottom_iso"]
    assert iso.passed, iso.notes


@pytest.mark.parametrize("name", sorted(FILIPPOV))
def test_criterion_06_factorization(name):
    rep = ladder_check(AlgebraContext(FILIPPOV[name]), 2)
    assert "factorization" not in {v.where[0] for v in rep.violations}


@pytest.mark.parametrize("name", sorted(FILIPPOV))
def test_criterion_06_ladder_squares(name):
    rep = ladder_check(AlgebraContext(FILIPPOV[name]), 2)
    assert rep.passed, [v.where for v in rep.violations[:5]]
    assert not rep.skipped


@pytest.mark.parametrize("name, K, strict", [
    ("simple_filippov_3", 2, True),
    ("abelian_2_3", 3, False),
    ("abelian_3_3", 3, True),
])
def test_criterion_07_page_formulas(name, K, strict):
    rep = verify_page_formulas(CORPUS[name], K, strict_dimension=strict)
    assert rep.passed, rep.violations[:5]
    assert rep.checked > 0


def test_criterion_08_binary_degeneracy():
    binary = CORPUS["leibniz_binary_3"]
    rep = binary_degeneracy_check(binary, 3)
    assert rep.passed and rep.checked == 8
    assert rep.notes["gamma_dim"] == 0


def _numbers(a: AlgebraSpec, K: int) -> dict:
    ctx = AlgebraContext(a)
    out = {}
    names = COMPLEX_NAMES if a.is_filippov else ("leibniz",)
    for which in names:
        out[which] = homology(ctx.complex(which, K), K).betti
    if a.is_filippov:
        for which in SUBCOMPLEXES:
            out[which] = homology(ctx.kernel_subcomplex(which, K), K).relative_betti()
        if a.n > 2:
            f = build_filtration(a, K - 1, ctx, strict_dimension=False)
            pages = page_dims(f)
            out["pages"] = {p: pages.table(p) for p in pages.dims}
    return out


@pytest.mark.parametrize("name", sorted(n for n, a in CORPUS.items() if a.dim <= 3))
def test_criterion_09_backend_agreement(name):
    a = CORPUS[name]
    modular = _numbers(a, 2)
    rational = _numbers(a.with_field(Field.rational()), 2)
    assert modular == rational


def test_criterion_10_determinism():
    outputs = []
    for workers in (1, 8):
        config = RunConfig("report", path=None, max_degree=2, workers=workers)
        _, doc = run(config, algebra=CORPUS["solvable_3"])
        outputs.append(emit_report(doc))
    assert outputs[0] == outputs[1]
    assert json.loads(outputs[0])["spectral"]["pages"]
