"""Binary Leibniz algebras induced by an n-ary bracket, and their co-representations.

For an algebra ``g`` of arity ``n``:

* ``D = g^{⊗(n-1)}`` with the product ``[a, b]_D = Σ_i a[slot i ← [a_i, b]]``,
* ``L = g^{∧(n-1)}`` realized on sorted words, same product re-sorted with sign,
* ``Γ = ker(D → L)`` where the projection sorts a word with its sign and kills
  words with a repeated letter.

A co-representation of a binary Leibniz algebra ``h`` on ``M`` is stored as
two lists of ``M × M`` matrices indexed by the basis of ``h``:
``left[x][:, m] = [x, m]`` and ``right[x][:, m] = [m, x]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

from .algebra import AlgebraSpec, sort_with_sign
from .checks import CheckReport
from .errors import HypothesisError, ShapeError
from .linalg import Field, SparseMatrix, SpanSolver, Subspace, vec_axpy


class WordBasis:
    """Indexing of tensor words (all of ``[0,d)^m``) or wedge words (increasing tuples)."""

    def __init__(self, kind: str, d: int, length: int):
        if kind not in ("tensor", "wedge"):
            raise ValueError(f"unknown word kind {kind!r}")
        self.kind = kind
        self.d = d
        self.length = length
        if kind == "tensor":
            self.size = d**length
            self._words = None
        else:
            self._words = list(itertools.combinations(range(d), length))
            self._index = {w: i for i, w in enumerate(self._words)}
            self.size = len(self._words)

    def rank(self, word: Sequence[int]) -> int:
        word = tuple(word)
        if len(word) != self.length:
            raise ShapeError(f"word {word} has wrong length")
        if self.kind == "wedge":
            try:
                return self._index[word]
            except KeyError:
                raise ShapeError(f"{word} is not an increasing word") from None
        r = 0
        for x in word:
            if not 0 <= x < self.d:
                raise ShapeError(f"letter {x} out of range")
            r = r * self.d + x
        return r

    def unrank(self, i: int) -> tuple:
        if not 0 <= i < self.size:
            raise ShapeError(f"rank {i} out of range")
        if self.kind == "wedge":
            return self._words[i]
        out = []
        for _ in range(self.length):
            i, x = divmod(i, self.d)
            out.append(x)
        return tuple(reversed(out))

    def words(self) -> list[tuple]:
        if self.kind == "wedge":
            return list(self._words)
        return list(itertools.product(range(self.d), repeat=self.length))

    def __len__(self):
        return self.size


class BinaryLeibnizAlgebra:
    """Structure constants ``table[(a, b)] = [e_a, e_b]`` of a binary algebra."""

    def __init__(self, name: str, field: Field, dim: int, table: dict, labels: Sequence[str] | None = None):
        self.name = name
        self.field = field
        self.dim = dim
        self.table = {k: v for k, v in table.items() if v}
        self.labels = list(labels) if labels is not None else [f"e{i}" for i in range(dim)]

    def __repr__(self):
        return f"BinaryLeibnizAlgebra({self.name!r}, dim={self.dim}, nnz={len(self.table)})"

    def bracket(self, a: int, b: int) -> dict:
        return self.table.get((a, b), {})

    def bracket_vec(self, u: dict, v: dict) -> dict:
        out: dict = {}
        F = self.field
        for a, x in u.items():
            for b, y in v.items():
                val = self.table.get((a, b))
                if val:
                    vec_axpy(F, out, F.mul(x, y), val)
        return out

    @property
    def is_abelian(self) -> bool:
        return not self.table

    @cached_property
    def right_mult(self) -> list[SparseMatrix]:
        """``right_mult[b][:, a] = [e_a, e_b]``."""
        cols: list[dict] = [{} for _ in range(self.dim)]
        for (a, b), val in self.table.items():
            cols[b][a] = val
        return [SparseMatrix(self.field, self.dim, self.dim, c) for c in cols]

    def check_leibniz(self) -> CheckReport:
        """``[[x,y],z] = [[x,z],y] + [x,[y,z]]`` on all basis triples."""
        rep = CheckReport("binary_leibniz")
        F = self.field
        rng = range(self.dim)
        for x in rng:
            for y in rng:
                xy = self.bracket(x, y)
                for z in rng:
                    rep.tick()
                    lhs = self.bracket_vec(xy, {z: F.one})
                    rhs = self.bracket_vec(self.bracket(x, z), {y: F.one})
                    vec_axpy(F, rhs, F.one, self.bracket_vec({x: F.one}, self.bracket(y, z)))
                    if lhs != rhs:
                        rep.add((x, y, z), expected=rhs, got=lhs)
        return rep

    def change_basis(self, P: SparseMatrix, Pinv: SparseMatrix, name: str | None = None) -> "BinaryLeibnizAlgebra":
        """Same algebra in the basis given by the columns of ``P``."""
        cols = P.columns()
        table = {}
        for a in range(self.dim):
            for b in range(self.dim):
                val = self.bracket_vec(cols[a], cols[b])
                if val:
                    table[(a, b)] = Pinv.matvec(val)
        return BinaryLeibnizAlgebra(name or self.name, self.field, self.dim, table)


# ---------------------------------------------------------------------------
# D_n, L_n and the projection between them


def build_tensor_words(a: AlgebraSpec) -> BinaryLeibnizAlgebra:
    a.require_leibniz()
    F = a.field
    words = WordBasis("tensor", a.dim, a.n - 1)
    table = {}
    for ia, wa in enumerate(words.words()):
        for ib, wb in enumerate(words.words()):
            out: dict = {}
            for i, x in enumerate(wa):
                for j, c in a.bracket((x,) + wb).items():
                    w = wa[:i] + (j,) + wa[i + 1:]
                    k = words.rank(w)
                    t = F.add(out.get(k, 0), c)
                    if t:
                        out[k] = t
                    else:
                        out.pop(k, None)
            if out:
                table[(ia, ib)] = out
    labels = ["⊗".join(f"e{x}" for x in w) for w in words.words()]
    return BinaryLeibnizAlgebra(f"D({a.name})", F, words.size, table, labels)


def _require_wedge_ok(a: AlgebraSpec):
    # words of length one carry no antisymmetry, so any binary algebra is allowed
    if a.n == 2:
        a.require_leibniz()
    else:
        a.require_filippov()


def build_wedge_words(a: AlgebraSpec) -> BinaryLeibnizAlgebra:
    _require_wedge_ok(a)
    F = a.field
    words = WordBasis("wedge", a.dim, a.n - 1)
    table = {}
    for ia, wa in enumerate(words.words()):
        for ib, wb in enumerate(words.words()):
            out: dict = {}
            for i, x in enumerate(wa):
                for j, c in a.bracket((x,) + wb).items():
                    w, s = sort_with_sign(wa[:i] + (j,) + wa[i + 1:])
                    if w is None:
                        continue
                    k = words.rank(w)
                    t = F.add(out.get(k, 0), s * c)
                    if t:
                        out[k] = t
                    else:
                        out.pop(k, None)
            if out:
                table[(ia, ib)] = out
    labels = ["∧".join(f"e{x}" for x in w) for w in words.words()]
    return BinaryLeibnizAlgebra(f"L({a.name})", F, words.size, table, labels)


def wedge_projection(a: AlgebraSpec) -> SparseMatrix:
    """Sorting projection ``D → L`` (zero on words with a repeated letter)."""
    tw = WordBasis("tensor", a.dim, a.n - 1)
    ww = WordBasis("wedge", a.dim, a.n - 1)
    trip = []
    for i, w in enumerate(tw.words()):
        s, sign = sort_with_sign(w)
        if s is not None:
            trip.append((ww.rank(s), i, sign))
    return SparseMatrix.from_triplets(a.field, ww.size, tw.size, trip)


class AdaptedBasis:
    """Basis of D made of the sorted words followed by the explicit Γ basis.

    In these coordinates the projection to L keeps the first ``n_sorted``
    coordinates and Γ is spanned by the remaining ones.
    """

    def __init__(self, a: AlgebraSpec):
        F = a.field
        self.field = F
        tw = WordBasis("tensor", a.dim, a.n - 1)
        ww = WordBasis("wedge", a.dim, a.n - 1)
        self.dim = tw.size
        self.n_sorted = ww.size
        self.n_gamma = tw.size - ww.size
        gamma_vecs = []
        gamma_words = []
        pinv_cols = [None] * tw.size
        for i, w in enumerate(tw.words()):
            s, sign = sort_with_sign(w)
            if s == w:
                pinv_cols[i] = {ww.rank(s): F.one}
                continue
            g = self.n_sorted + len(gamma_vecs)
            gamma_words.append(w)
            if s is None:
                gamma_vecs.append({i: F.one})
                pinv_cols[i] = {g: F.one}
            else:
                j = tw.rank(s)
                gamma_vecs.append({i: F.one, j: F(-sign)})
                pinv_cols[i] = {g: F.one, ww.rank(s): F(sign)}
        self.gamma_words = gamma_words
        sorted_cols = [{tw.rank(s): F.one} for s in ww.words()]
        self.P = SparseMatrix.from_columns(F, tw.size, sorted_cols + gamma_vecs)
        self.Pinv = SparseMatrix.from_columns(F, tw.size, pinv_cols)
        self.gamma = Subspace(F, tw.size, gamma_vecs, check=False)

    def is_gamma(self, i: int) -> bool:
        return i >= self.n_sorted

    def projection(self) -> SparseMatrix:
        """The sorting projection in adapted coordinates: keep the sorted block."""
        return SparseMatrix.from_columns(
            self.field, self.n_sorted, [{i: self.field.one} for i in range(self.n_sorted)]
        ).hstack(SparseMatrix.zeros(self.field, self.n_sorted, self.n_gamma))


def gamma_basis(a: AlgebraSpec) -> Subspace:
    """Explicit basis of ker(D → L): repeated words, and unsorted words minus signed sorted ones."""
    _require_wedge_ok(a)
    return AdaptedBasis(a).gamma


# ---------------------------------------------------------------------------
# co-representations


@dataclass
class CorepPair:
    name: str
    algebra: BinaryLeibnizAlgebra
    coef_dim: int
    left: list
    right: list

    def __post_init__(self):
        H, M = self.algebra.dim, self.coef_dim
        if len(self.left) != H or len(self.right) != H:
            raise ShapeError("one action matrix per algebra generator required")
        for m in list(self.left) + list(self.right):
            if m.shape != (M, M):
                raise ShapeError(f"action matrix has shape {m.shape}, expected {(M, M)}")

    @property
    def field(self) -> Field:
        return self.algebra.field

    @property
    def antisymmetric(self) -> bool:
        return all(m.is_zero() for m in self.right)

    @property
    def is_trivial(self) -> bool:
        return self.antisymmetric and all(m.is_zero() for m in self.left)

    def symmetric_companion(self) -> "CorepPair":
        """Same left action, right action replaced by its negative."""
        return CorepPair(f"{self.name}[right=-left]", self.algebra, self.coef_dim,
                         list(self.left), [-m for m in self.left])

    def left_of(self, vec: dict) -> SparseMatrix:
        return _combine(self.field, self.coef_dim, self.left, vec)

    def right_of(self, vec: dict) -> SparseMatrix:
        return _combine(self.field, self.coef_dim, self.right, vec)

    def transform(self, algebra: BinaryLeibnizAlgebra, P: SparseMatrix,
                  Q: SparseMatrix | None = None, Qinv: SparseMatrix | None = None) -> "CorepPair":
        """Re-express in a new algebra basis (columns of ``P``) and optionally a new
        coefficient basis (columns of ``Q``, inverse ``Qinv``)."""
        left, right = [], []
        for col in P.columns():
            lm, rm = self.left_of(col), self.right_of(col)
            if Q is not None:
                lm, rm = Qinv @ lm @ Q, Qinv @ rm @ Q
            left.append(lm)
            right.append(rm)
        return CorepPair(self.name, algebra, self.coef_dim, left, right)


def _combine(field, M, mats, vec: dict) -> SparseMatrix:
    out = SparseMatrix.zeros(field, M, M)
    for h, c in vec.items():
        out = out + mats[h].scale(c)
    return out


def trivial_corep(algebra: BinaryLeibnizAlgebra, dim: int = 1) -> CorepPair:
    z = SparseMatrix.zeros(algebra.field, dim, dim)
    return CorepPair("trivial", algebra, dim, [z] * algebra.dim, [z] * algebra.dim)


def check_corep_axioms(c: CorepPair) -> CheckReport:
    """The three co-representation axioms over all basis pairs, as matrix identities:

    ``L[x,y] = LxLy - LyLx``, ``LyRx = RxLy - R[x,y]``, ``RyRx = R[x,y] - RxLy``.
    """
    rep = CheckReport(f"corep_axioms[{c.name}]")
    h = c.algebra
    left, right = c.left, c.right
    for x in range(h.dim):
        for y in range(h.dim):
            xy = h.bracket(x, y)
            Lxy, Rxy = c.left_of(xy), c.right_of(xy)
            rep.tick(3)
            if Lxy != left[x] @ left[y] - left[y] @ left[x]:
                rep.add(("axiom1", x, y))
            if left[y] @ right[x] != right[x] @ left[y] - Rxy:
                rep.add(("axiom2", x, y))
            if right[y] @ right[x] != Rxy - right[x] @ left[y]:
                rep.add(("axiom3", x, y))
    return rep


def _g_actions(a: AlgebraSpec, words: list[tuple]) -> list[SparseMatrix]:
    """``R[w][:, x] = [x, w_1, .., w_{n-1}]`` for each word."""
    F = a.field
    out = []
    for w in words:
        cols = {x: a.bracket((x,) + tuple(w)) for x in range(a.dim)}
        out.append(SparseMatrix(F, a.dim, a.dim, {x: v for x, v in cols.items() if v}))
    return out


def corep_adjoint(a: AlgebraSpec, tensor: BinaryLeibnizAlgebra | None = None) -> CorepPair:
    """g over D: right(x, w) = [x, w], left(w, x) = -[x, w]."""
    a.require_leibniz()
    tensor = tensor or build_tensor_words(a)
    right = _g_actions(a, WordBasis("tensor", a.dim, a.n - 1).words())
    return CorepPair("adjoint", tensor, a.dim, [-m for m in right], right)


def corep_adjoint_wedge(a: AlgebraSpec, wedge: BinaryLeibnizAlgebra | None = None) -> CorepPair:
    """g over L through sorted representatives."""
    _require_wedge_ok(a)
    wedge = wedge or build_wedge_words(a)
    right = _g_actions(a, WordBasis("wedge", a.dim, a.n - 1).words())
    return CorepPair("adjoint_wedge", wedge, a.dim, [-m for m in right], right)


def corep_tensor_over_wedge(a: AlgebraSpec, tensor: BinaryLeibnizAlgebra | None = None,
                 wedge: BinaryLeibnizAlgebra | None = None) -> CorepPair:
    """D over L, anti-symmetric: left(w, b) = -[b, ŵ]_D with ŵ the sorted word."""
    _require_wedge_ok(a)
    tensor = tensor or build_tensor_words(a)
    wedge = wedge or build_wedge_words(a)
    F = a.field
    tw = WordBasis("tensor", a.dim, a.n - 1)
    # independence of the representative: [b, γ]_D = 0 for γ in Γ
    for gvec in gamma_basis(a).vectors():
        for b in range(tensor.dim):
            if tensor.bracket_vec({b: F.one}, gvec):
                raise HypothesisError("left action depends on the wedge representative")
    left = []
    for w in WordBasis("wedge", a.dim, a.n - 1).words():
        left.append(-tensor.right_mult[tw.rank(w)])
    zero = SparseMatrix.zeros(F, tensor.dim, tensor.dim)
    return CorepPair("tensor_over_wedge", wedge, tensor.dim, left, [zero] * wedge.dim)


def corep_extended_adjoint(a: AlgebraSpec, tensor: BinaryLeibnizAlgebra | None = None, right: str = "negated") -> CorepPair:
    """g⊗D over D: left(h, (x, b)) = (adj_left(h, x), b) - (x, [b, h]_D).

    ``right="negated"`` uses right = -left; ``right="literal"`` uses
    (x, [b, h]_D) - (adj_right(x, h), b), which violates the third axiom on
    non-abelian inputs.
    """
    tensor = tensor or build_tensor_words(a)
    adjoint_pair = corep_adjoint(a, tensor)
    F = a.field
    Id_g = SparseMatrix.identity(F, a.dim)
    Id_D = SparseMatrix.identity(F, tensor.dim)
    left = [adjoint_pair.left[h].kron(Id_D) - Id_g.kron(tensor.right_mult[h]) for h in range(tensor.dim)]
    if right == "negated":
        rmats = [-m for m in left]
    elif right == "literal":
        rmats = [Id_g.kron(tensor.right_mult[h]) - adjoint_pair.right[h].kron(Id_D) for h in range(tensor.dim)]
    else:
        raise ValueError(f"unknown right action variant {right!r}")
    return CorepPair(f"extended_adjoint[{right}]", tensor, a.dim * tensor.dim, left, rmats)


def gamma_subalgebra(a: AlgebraSpec, tensor: BinaryLeibnizAlgebra | None = None) -> BinaryLeibnizAlgebra:
    """Γ as a subalgebra of D, in coordinates of the explicit Γ basis.

    Raises NotInSpanError if some product of Γ elements leaves Γ.
    """
    tensor = tensor or build_tensor_words(a)
    gam = gamma_basis(a)
    solver = SpanSolver(gam)
    vecs = gam.vectors()
    table = {}
    for i, u in enumerate(vecs):
        for j, v in enumerate(vecs):
            prod = tensor.bracket_vec(u, v)
            if prod:
                table[(i, j)] = solver.solve([prod])[0]
    return BinaryLeibnizAlgebra(f"Gamma({a.name})", a.field, gam.dim, table)


def corep_quotient_actions(a: AlgebraSpec, tensor=None, wedge=None) -> dict[str, CorepPair]:
    """Co-representations attached to Γ and to g⊗D over L.

    ``mixed``: g⊗D over L with left(w, (x, b)) = (adj_left(ŵ, x), b) + (x, wedge_left(w, b))
    and right = -left.  ``g_over_gamma``: the g-over-D actions restricted to Γ.
    ``gamma_over_L``: the D-over-L actions restricted to the submodule Γ.
    """
    _require_wedge_ok(a)
    tensor = tensor or build_tensor_words(a)
    wedge = wedge or build_wedge_words(a)
    F = a.field
    adjoint_pair = corep_adjoint(a, tensor)
    wedge_pair = corep_tensor_over_wedge(a, tensor, wedge)
    tw = WordBasis("tensor", a.dim, a.n - 1)
    Id_g = SparseMatrix.identity(F, a.dim)
    Id_D = SparseMatrix.identity(F, tensor.dim)
    mixed_left = []
    for i, w in enumerate(WordBasis("wedge", a.dim, a.n - 1).words()):
        mixed_left.append(adjoint_pair.left[tw.rank(w)].kron(Id_D) + Id_g.kron(wedge_pair.left[i]))
    mixed_pair = CorepPair("mixed", wedge, a.dim * tensor.dim, mixed_left, [-m for m in mixed_left])

    gam = gamma_basis(a)
    G = gamma_subalgebra(a, tensor)
    gvecs = gam.vectors()
    g_over_gamma = CorepPair("adjoint|Gamma", G, a.dim,
                             [adjoint_pair.left_of(v) for v in gvecs], [adjoint_pair.right_of(v) for v in gvecs])

    solver = SpanSolver(gam)
    restricted = []
    for i in range(wedge.dim):
        images = [wedge_pair.left[i].matvec(v) for v in gvecs]
        cols = solver.solve(images)
        restricted.append(SparseMatrix.from_columns(F, gam.dim, cols))
    zero = SparseMatrix.zeros(F, gam.dim, gam.dim)
    gamma_over_L = CorepPair("tensor_over_wedge|Gamma", wedge, gam.dim, restricted, [zero] * wedge.dim)
    return {"mixed": mixed_pair, "g_over_gamma": g_over_gamma, "gamma_over_L": gamma_over_L}


# ---------------------------------------------------------------------------
# extensions of actions to tensor powers


def tensor_power_action(algebra: BinaryLeibnizAlgebra, s: int, h: int) -> SparseMatrix:
    """``W(u, h) = Σ_t (u_1, .., [u_t, h], .., u_s)`` on ``algebra^{⊗s}``."""
    F = algebra.field
    H = algebra.dim
    R = algebra.right_mult[h]
    out = SparseMatrix.zeros(F, H**s, H**s)
    for t in range(s):
        term = SparseMatrix.identity(F, H**t).kron(R).kron(SparseMatrix.identity(F, H ** (s - t - 1)))
        out = out + term
    return out


def extend_actions(c: CorepPair, k: int) -> list[SparseMatrix]:
    """Left action extended to ``M ⊗ h^{⊗k}``, one matrix per generator:
    ``(v, h_1..h_k) ↦ (left(g, v), h) - Σ_i (v, h_1, .., [h_i, g], .., h_k)``."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    F = c.field
    H = c.algebra.dim
    IdM = SparseMatrix.identity(F, c.coef_dim)
    IdH = SparseMatrix.identity(F, H**k)
    out = []
    for g in range(H):
        m = c.left[g].kron(IdH)
        if k:
            m = m - IdM.kron(tensor_power_action(c.algebra, k, g))
        out.append(m)
    return out
