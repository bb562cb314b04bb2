import random

import pytest

from nhl.algebra import abelian, corpus, simple_filippov, solvable_filippov
from nhl.complexes import AlgebraContext, ChainComplexData, homology
from nhl.errors import ChainMapError, NotInSpanError
from nhl.linalg import Field, SparseMatrix
from nhl.sequences import (
    ChainMap,
    Lifter,
    ShortExactSequence,
    assemble_les,
    check_endpoint_iso,
    connecting_map,
    identity_map,
    induced_map_on_homology,
    ladder_check,
    ses_relative,
    verify_exactness,
)

QQ = Field.rational()


def M(rows, cols, entries):
    return SparseMatrix.from_dense(QQ, entries) if entries else SparseMatrix.zeros(QQ, rows, cols)


def toy_ses():
    """0 → A → B → C → 0 with A = k in degree 0, B: y ↦ x, C = k in degree 1."""
    A = ChainComplexData("A", QQ, [1, 0, 0], {1: M(1, 0, None), 2: M(0, 0, None)}, 1)
    B = ChainComplexData("B", QQ, [1, 1, 0], {1: M(1, 1, [[1]]), 2: M(1, 0, None)}, 1)
    C = ChainComplexData("C", QQ, [0, 1, 0], {1: M(0, 1, None), 2: M(1, 0, None)}, 1)
    incl = ChainMap("i", A, B, {0: M(1, 1, [[1]]), 1: M(1, 0, None)})
    proj = ChainMap("p", B, C, {0: M(0, 1, None), 1: M(1, 1, [[1]])})
    return ShortExactSequence("toy", A, B, C, incl, proj)


def test_toy_connecting_map_is_identity():
    ses = toy_ses()
    assert ses.check_exact(1).passed
    assert ses.incl.check().passed and ses.proj.check().passed
    hA = homology(ses.sub, 1, with_reps=True)
    hC = homology(ses.quot, 1, with_reps=True)
    assert hA.betti == [1, 0] and hC.betti == [0, 1]
    delta = connecting_map(ses, 1, hC, hA)
    assert delta.to_dense() == [[1]]


def test_chain_map_check_detects_failure():
    ctx = AlgebraContext(simple_filippov(3))
    cx = ctx.complex("leibniz", 1)
    assert identity_map(cx).check().passed
    doubled_in_one = ChainMap("bad", cx, cx, {0: SparseMatrix.identity(cx.field, cx.dim(0)),
                                              1: SparseMatrix.identity(cx.field, cx.dim(1)).scale(2)})
    assert not doubled_in_one.check([1]).passed
    table = homology(cx, 1, with_reps=True)
    with pytest.raises(ChainMapError):
        induced_map_on_homology(doubled_in_one, table, table, 0)


def test_lifter_rejects_non_preimage():
    proj = SparseMatrix.from_dense(QQ, [[1, 0], [0, 0]])
    assert Lifter(proj).lift([{0: 3}]) == [{0: 3}]
    with pytest.raises(NotInSpanError):
        Lifter(proj).lift([{1: 1}])


def test_connecting_map_independent_of_lift():
    ctx = AlgebraContext(solvable_filippov())
    ses = ses_relative(ctx, 2)
    hs = homology(ses.sub, 2, with_reps=True)
    hq = homology(ses.quot, 2, with_reps=True)
    rng = random.Random(3)
    for m in (1, 2):
        base = connecting_map(ses, m, hq, hs)
        shifts = [{rng.randrange(ses.sub.dim(m)): rng.randrange(1, 50)} for _ in hq.reps[m]]
        assert connecting_map(ses, m, hq, hs, lift_shift=shifts) == base


@pytest.mark.parametrize("name", ["solvable_3", "solvable_plus_abelian_1", "abelian_3_3"])
def test_exactness_on_nonsimple_members(name):
    ctx = AlgebraContext(corpus()[name])
    for which in ("relative", "gamma"):
        table = assemble_les(which, ctx, 2)
        rep = verify_exactness(table)
        assert rep.passed, (which, rep.violations)
        assert rep.skipped and "incoming map beyond truncation" in rep.skipped[0]
        assert table.extra_checks["ses"].passed
        assert table.extra_checks["projection_chain_map"].passed


def test_bottom_isomorphisms_values():
    ctx = AlgebraContext(abelian(2, 3))
    rel = assemble_les("relative", ctx, 1)
    assert rel.extra_checks["bottom_iso"].passed
    gam = assemble_les("gamma", ctx, 1)
    notes = gam.extra_checks["bottom_iso"].notes
    # HL_0(L;D) has the four coefficient dimensions, HL_1(L;k) only one
    assert (notes["source_dim"], notes["target_dim"]) == (4, 1)


def test_labels_and_relabeling():
    ctx = AlgebraContext(abelian(2, 3))
    rel = assemble_les("relative", ctx, 1)
    assert [nd.label for nd in rel.nodes[:3]] == ["Hrel_0", "HL_1", "HLie_1"]
    gam = assemble_les("gamma", ctx, 1)
    sub = gam.nodes[gam.node_index("sub", 1)]
    assert (sub.label, sub.alt_label) == ("HD_1", "HD_0")
    with pytest.raises(ValueError):
        assemble_les("other", ctx, 1)


def test_endpoint_iso_check_reports_ranks():
    ctx = AlgebraContext(solvable_filippov())
    table = assemble_les("relative", ctx, 1)
    rep = check_endpoint_iso(table)
    assert rep.passed and rep.notes["rank"] == rep.notes["source_dim"] == 2


def test_ladder_on_abelian_commutes():
    rep = ladder_check(AlgebraContext(abelian(2, 3)), 2)
    assert rep.passed and not rep.skipped


def test_ladder_on_nonabelian_factorization_holds_chain_maps_fail():
    rep = ladder_check(AlgebraContext(simple_filippov(3)), 1)
    kinds = {v.where[0] for v in rep.violations}
    assert "factorization" not in kinds
    assert kinds == {"to_mixed_chain_map", "proj_mixed_chain_map"}
    assert rep.skipped
