"""Loday chain complexes, kernel subcomplexes and homology.

Chain degree ``m`` of ``CL(h, A)`` is ``A ⊗ h^{⊗m}``; the basis vector
``(v, h_1, .., h_m)`` has index ``v * H**m + rank(h_1..h_m)`` with the first
letter most significant.

Boundary (``standard`` convention)::

    d(v, h_1..h_m) = Σ_j (-1)^j θ_j ⊗ (h_1..ĥ_j..h_m)
                   + Σ_{i<j} (-1)^j (v, h_1..[h_i, h_j]..ĥ_j..h_m)

with ``θ_1 = right(v, h_1)`` and ``θ_j = -left(h_j, v)`` for ``j ≥ 2``; the
bracket replaces position ``i``.  This squares to zero for every
co-representation and gives ``d(v, h) = -right(v, h)`` in degree one.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from math import comb
from typing import Callable

from .algebra import AlgebraSpec
from .checks import CheckReport
from .errors import MemoryCapError, NotInSpanError, ShapeError, SubcomplexError
from .induced import (
    AdaptedBasis,
    BinaryLeibnizAlgebra,
    CorepPair,
    build_tensor_words,
    build_wedge_words,
    corep_extended_adjoint,
    corep_adjoint,
    corep_adjoint_wedge,
    corep_tensor_over_wedge,
    corep_quotient_actions,
    extend_actions,
    wedge_projection,
    trivial_corep,
)
from .linalg import Echelon, Field, SparseMatrix, kernel_basis, rank

CONVENTIONS = ("standard", "shifted_bracket_sign", "flipped_theta")
DEFAULT_MEMORY_CAP = 300_000
COMPLEX_NAMES = ("leibniz", "lie", "wedge_tensor", "wedge_trivial", "wedge_mixed")


def memory_cap() -> int:
    raw = os.environ.get("NHL_MEMORY_CAP_COLS")
    return int(raw) if raw else DEFAULT_MEMORY_CAP


def _signs(convention: str):
    """(sign factor for θ_j with j ≥ 2, extra exponent on bracket terms)."""
    if convention == "standard":
        return -1, 0
    if convention == "shifted_bracket_sign":
        return -1, 1
    if convention == "flipped_theta":
        return 1, 0
    raise ValueError(f"unknown boundary convention {convention!r}")


def loday_boundary(h: BinaryLeibnizAlgebra, c: CorepPair, m: int, convention: str = "standard") -> SparseMatrix:
    """Matrix of ``d: A ⊗ h^{⊗m} → A ⊗ h^{⊗(m-1)}``."""
    if m < 1:
        raise ValueError("boundary degree must be at least 1")
    if c.algebra.dim != h.dim:
        raise ShapeError("co-representation is over a different algebra")
    theta_sign, bracket_extra = _signs(convention)
    F = h.field
    p = F.p
    H, M = h.dim, c.coef_dim
    low = H ** (m - 1)
    right_cols = [[mat.column(v) for v in range(M)] for mat in c.right]
    left_cols = [[mat.column(v) for v in range(M)] for mat in c.left]
    table = h.table

    def rank_of(word):
        r = 0
        for x in word:
            r = r * H + x
        return r

    cols: dict = {}
    for wi, w in enumerate(itertools.product(range(H), repeat=m)):
        # bracket terms do not depend on the coefficient letter
        bterms: dict = {}
        for j in range(1, m):
            sign = -1 if (j + 1 + bracket_extra) % 2 else 1
            for i in range(j):
                val = table.get((w[i], w[j]))
                if not val:
                    continue
                tail = w[i + 1:j] + w[j + 1:]
                for t, cf in val.items():
                    r = rank_of(w[:i] + (t,) + tail)
                    bterms[r] = bterms.get(r, 0) + sign * cf
        thetas = []
        for j in range(m):
            rest = rank_of(w[:j] + w[j + 1:])
            if j == 0:
                thetas.append((rest, -1, right_cols[w[0]]))
            else:
                sign = (-1 if (j + 1) % 2 else 1) * theta_sign
                thetas.append((rest, sign, left_cols[w[j]]))
        for v in range(M):
            col: dict = {}
            base = v * low
            for r, cf in bterms.items():
                col[base + r] = col.get(base + r, 0) + cf
            for rest, sign, acts in thetas:
                for u, cf in acts[v].items():
                    k = u * low + rest
                    col[k] = col.get(k, 0) + sign * cf
            clean = {}
            for k, x in col.items():
                if p is not None:
                    x %= p
                if x:
                    clean[k] = x
            if clean:
                cols[v * H**m + wi] = clean
    return SparseMatrix(F, M * low, M * H**m, cols, _trusted=True)


# ---------------------------------------------------------------------------
# chain complexes


@dataclass
class ChainComplexData:
    """Boundaries ``d[m]: C_m → C_{m-1}`` for ``1 ≤ m ≤ top`` where ``top = max_degree + 1``."""

    name: str
    field: Field
    dims: list
    d: dict
    max_degree: int
    labels: Callable | None = None
    _ranks: dict = dc_field(default_factory=dict, repr=False)

    def __post_init__(self):
        for m, mat in self.d.items():
            if mat.shape != (self.dims[m - 1], self.dims[m]):
                raise ShapeError(f"{self.name}: d_{m} has shape {mat.shape}, dims are {self.dims[m-1]}, {self.dims[m]}")

    @property
    def top(self) -> int:
        return len(self.dims) - 1

    def dim(self, m: int) -> int:
        return self.dims[m] if 0 <= m <= self.top else 0

    def boundary(self, m: int) -> SparseMatrix:
        """``d_m``; zero outside the stored range."""
        if m in self.d:
            return self.d[m]
        return SparseMatrix.zeros(self.field, self.dim(m - 1), self.dim(m))

    def rank(self, m: int) -> int:
        if m not in self._ranks:
            self._ranks[m] = rank(self.boundary(m)) if self.dim(m) and self.dim(m - 1) else 0
        return self._ranks[m]

    def truncated_shift(self, shift: int, name: str | None = None) -> "ChainComplexData":
        """Complex ``Q_m = C_{m+shift}`` for ``m ≥ 0``, with ``d^Q_0 = 0``."""
        dims = self.dims[shift:]
        d = {m - shift: mat for m, mat in self.d.items() if m - shift >= 1}
        return ChainComplexData(name or f"{self.name}[+{shift}]", self.field, dims, d, self.max_degree - shift
                                if self.max_degree >= shift else 0)


def check_d_squared(c: ChainComplexData) -> CheckReport:
    rep = CheckReport(f"d_squared[{c.name}]")
    for m in range(2, c.top + 1):
        rep.tick()
        prod = c.boundary(m - 1) @ c.boundary(m)
        if not prod.is_zero():
            rep.add((m - 1, m), expected=0, got=prod.nnz)
    return rep


# ---------------------------------------------------------------------------
# per-algebra context


class AlgebraContext:
    """Lazily built structures attached to one algebra (one field).

    ``adapted=True`` variants express D in the adapted basis (sorted words then
    Γ) so that every kernel subcomplex becomes a coordinate subspace.
    """

    def __init__(self, a: AlgebraSpec, convention: str = "standard", workers: int = 1):
        a.require_leibniz()
        self.a = a
        self.field = a.field
        self.convention = convention
        self.workers = max(1, int(workers))
        self._complexes: dict = {}

    # algebras and bases
    @cached_property
    def tensor(self) -> BinaryLeibnizAlgebra:
        return build_tensor_words(self.a)

    @cached_property
    def wedge(self) -> BinaryLeibnizAlgebra:
        return build_wedge_words(self.a)

    @cached_property
    def basis(self) -> AdaptedBasis:
        return AdaptedBasis(self.a)

    @cached_property
    def tensor_adapted(self) -> BinaryLeibnizAlgebra:
        return self.tensor.change_basis(self.basis.P, self.basis.Pinv, name=f"D'({self.a.name})")

    @cached_property
    def word_projection(self) -> SparseMatrix:
        return wedge_projection(self.a)

    @property
    def has_wedge(self) -> bool:
        return self.a.n == 2 or self.a.is_filippov

    def require_wedge(self):
        if not self.has_wedge:
            self.a.require_filippov()

    # co-representations
    @cached_property
    def adjoint(self) -> CorepPair:
        return corep_adjoint(self.a, self.tensor)

    @cached_property
    def adjoint_wedge(self) -> CorepPair:
        return corep_adjoint_wedge(self.a, self.wedge)

    @cached_property
    def tensor_over_wedge(self) -> CorepPair:
        return corep_tensor_over_wedge(self.a, self.tensor, self.wedge)

    @cached_property
    def extended_adjoint(self) -> CorepPair:
        return corep_extended_adjoint(self.a, self.tensor)

    @cached_property
    def quotient_actions(self) -> dict:
        return corep_quotient_actions(self.a, self.tensor, self.wedge)

    def _setup(self, which: str, adapted: bool):
        """(algebra, co-representation) for a named complex."""
        a = self.a
        if which == "leibniz":
            if adapted:
                return self.tensor_adapted, self.adjoint.transform(self.tensor_adapted, self.basis.P)
            return self.tensor, self.adjoint
        self.require_wedge()
        if which == "lie":
            return self.wedge, self.adjoint_wedge
        if which == "wedge_trivial":
            return self.wedge, trivial_corep(self.wedge)
        I_L = SparseMatrix.identity(self.field, self.wedge.dim)
        if which == "wedge_tensor":
            c = self.tensor_over_wedge.symmetric_companion()
            if adapted:
                c = c.transform(self.wedge, I_L, self.basis.P, self.basis.Pinv)
            return self.wedge, c
        if which == "wedge_mixed":
            c = self.quotient_actions["mixed"]
            if adapted:
                I_g = SparseMatrix.identity(self.field, a.dim)
                c = c.transform(self.wedge, I_L, I_g.kron(self.basis.P), I_g.kron(self.basis.Pinv))
            return self.wedge, c
        raise ValueError(f"unknown complex {which!r}")

    def complex_dims(self, which: str, K: int) -> list[int]:
        d, n = self.a.dim, self.a.n
        Dd, Ld = d ** (n - 1), comb(d, n - 1)
        coef, H = {
            "leibniz": (d, Dd), "lie": (d, Ld), "wedge_tensor": (Dd, Ld),
            "wedge_trivial": (1, Ld), "wedge_mixed": (d * Dd, Ld),
        }[which]
        return [coef * H**m for m in range(K + 2)]

    def complex(self, which: str, K: int, adapted: bool = False, convention: str | None = None) -> ChainComplexData:
        """Complex through chain degree ``K + 1``; cached, and larger cached ones are reused."""
        convention = convention or self.convention
        if K < 0:
            raise ValueError("max degree must be nonnegative")
        for (w, ad, conv, k), cx in self._complexes.items():
            if (w, ad, conv) == (which, adapted, convention) and k >= K:
                return cx if k == K else _truncate(cx, K)
        dims = self.complex_dims(which, K)
        cap = memory_cap()
        if dims[-1] > cap:
            raise MemoryCapError(f"{which} needs {dims[-1]} columns in degree {K + 1}; cap is {cap}")
        h, c = self._setup(which, adapted)
        degrees = range(1, K + 2)
        if self.workers > 1:
            with ThreadPoolExecutor(self.workers) as pool:
                mats = list(pool.map(lambda m: loday_boundary(h, c, m, convention), degrees))
        else:
            mats = [loday_boundary(h, c, m, convention) for m in degrees]
        name = which + ("'" if adapted else "")
        cx = ChainComplexData(name, self.field, dims, dict(zip(degrees, mats)), K,
                              labels=_labeler(c.coef_dim, h.dim))
        self._complexes[(which, adapted, convention, K)] = cx
        return cx

    # projections between complexes (standard coordinates unless adapted)
    def _word_projection(self, adapted: bool) -> SparseMatrix:
        return self.basis.projection() if adapted else self.word_projection

    def proj_lie(self, m: int, adapted: bool = False) -> SparseMatrix:
        """``g ⊗ D^{⊗m} → g ⊗ L^{⊗m}``."""
        out = SparseMatrix.identity(self.field, self.a.dim)
        pi = self._word_projection(adapted)
        for _ in range(m):
            out = out.kron(pi)
        return out

    def proj_trivial(self, m: int, adapted: bool = False) -> SparseMatrix:
        """``D ⊗ L^{⊗m} → L^{⊗(m+1)}`` with the suspension sign ``(-1)^m``."""
        out = self._word_projection(adapted).kron(SparseMatrix.identity(self.field, self.wedge.dim**m))
        return out.scale(-1) if m % 2 else out

    def proj_mixed(self, m: int, adapted: bool = False) -> SparseMatrix:
        """``g ⊗ D ⊗ L^{⊗m} → g ⊗ L^{⊗(m+1)}`` with sign ``(-1)^m``."""
        I_g = SparseMatrix.identity(self.field, self.a.dim)
        out = I_g.kron(self._word_projection(adapted)).kron(SparseMatrix.identity(self.field, self.wedge.dim**m))
        return out.scale(-1) if m % 2 else out

    def to_mixed(self, m: int, adapted: bool = False) -> SparseMatrix:
        """``g ⊗ D^{⊗m} → g ⊗ D ⊗ L^{⊗(m-1)}`` for ``m ≥ 1``, signed so that
        ``proj_mixed(m-1) ∘ to_mixed(m) = proj_lie(m)``."""
        if m < 1:
            raise ValueError("to_mixed starts in degree 1")
        F = self.field
        out = SparseMatrix.identity(F, self.a.dim * self.tensor.dim)
        pi = self._word_projection(adapted)
        for _ in range(m - 1):
            out = out.kron(pi)
        return out.scale(-1) if (m - 1) % 2 else out

    def adapted_change(self, which: str, m: int) -> SparseMatrix:
        """Matrix taking adapted coordinates of a chain space to standard ones."""
        F = self.field
        P = self.basis.P
        I_g = SparseMatrix.identity(F, self.a.dim)
        if which == "leibniz":
            out = I_g
            for _ in range(m):
                out = out.kron(P)
            return out
        I_L = SparseMatrix.identity(F, self.wedge.dim**m)
        if which == "wedge_tensor":
            return P.kron(I_L)
        if which == "wedge_mixed":
            return I_g.kron(P).kron(I_L)
        return SparseMatrix.identity(F, self.complex_dims(which, m)[m])

    # kernel subcomplexes
    def kernel_subcomplex(self, which: str, K: int) -> "KernelSubcomplex":
        self.require_wedge()
        nb = self.basis.n_sorted
        Dd, Ld = self.tensor.dim, self.wedge.dim
        if which == "relative":
            parent = self.complex("leibniz", K, adapted=True)

            def include(m, i):
                # any D letter in the Γ block
                w = i % (Dd**m)
                for _ in range(m):
                    w, x = divmod(w, Dd)
                    if x >= nb:
                        return True
                return False

            shift = 1
        elif which == "gamma":
            parent = self.complex("wedge_tensor", K, adapted=True)

            def include(m, i):
                return i // (Ld**m) >= nb

            shift = 0
        elif which == "mixed_kernel":
            parent = self.complex("wedge_mixed", K, adapted=True)

            def include(m, i):
                return (i // (Ld**m)) % Dd >= nb

            shift = 0
        else:
            raise ValueError(f"unknown kernel subcomplex {which!r}")
        indices = [[i for i in range(parent.dim(m)) if include(m, i)] for m in range(parent.top + 1)]
        return KernelSubcomplex(which, parent, indices, shift)


def _truncate(cx: ChainComplexData, K: int) -> ChainComplexData:
    return ChainComplexData(cx.name, cx.field, cx.dims[:K + 2], {m: cx.d[m] for m in range(1, K + 2)}, K,
                            labels=cx.labels)


def _labeler(M: int, H: int):
    def label(m: int, i: int):
        word = []
        for _ in range(m):
            i, x = divmod(i, H)
            word.append(x)
        return (i,) + tuple(reversed(word))

    return label


def build_complex(which: str, a: AlgebraSpec, K: int, convention: str = "standard") -> ChainComplexData:
    return AlgebraContext(a, convention).complex(which, K)


# ---------------------------------------------------------------------------
# kernel subcomplexes


class KernelSubcomplex:
    """Subcomplex spanned by a set of coordinate vectors of a parent complex.

    ``shift`` converts chain degree to the relative degree used in tables:
    relative degree = chain degree - shift.
    """

    def __init__(self, name: str, parent: ChainComplexData, indices: list, shift: int = 0):
        self.name = name
        self.parent = parent
        self.indices = indices
        self.shift = shift

    def dim(self, m: int) -> int:
        return len(self.indices[m]) if 0 <= m < len(self.indices) else 0

    def inclusion(self, m: int) -> SparseMatrix:
        F = self.parent.field
        return SparseMatrix.from_columns(F, self.parent.dim(m), [{i: F.one} for i in self.indices[m]])

    def check_closure(self) -> CheckReport:
        rep = CheckReport(f"subcomplex[{self.name}]")
        for m in range(1, self.parent.top + 1):
            inside = set(self.indices[m - 1])
            d = self.parent.boundary(m)
            for i in self.indices[m]:
                rep.tick()
                bad = [r for r in d.column(i) if r not in inside]
                if bad:
                    rep.add((m, i), expected="inside", got=bad[:5])
        return rep

    @cached_property
    def complex(self) -> ChainComplexData:
        """Restricted boundaries; raises SubcomplexError if the span is not closed."""
        rep = self.check_closure()
        if not rep.passed:
            raise SubcomplexError(f"{self.name} is not closed under the boundary ({rep.violation_count} columns escape)")
        p = self.parent
        d = {m: p.boundary(m).submatrix(self.indices[m - 1], self.indices[m]) for m in range(1, p.top + 1)}
        return ChainComplexData(self.name, p.field, [len(ix) for ix in self.indices], d, p.max_degree)


# ---------------------------------------------------------------------------
# homology


@dataclass
class HomologyTable:
    name: str
    betti: list
    shift: int = 0
    reps: dict = dc_field(default_factory=dict)
    _coord: dict = dc_field(default_factory=dict, repr=False)
    _cycle_test: dict = dc_field(default_factory=dict, repr=False)

    def relative_betti(self) -> list:
        """Betti numbers indexed by relative degree (drops the first ``shift`` entries)."""
        return self.betti[self.shift:]

    def coordinates(self, m: int, vectors: list[dict]) -> list[dict]:
        """Homology coordinates of cycles; raises NotInSpanError for non-cycles."""
        if m not in self._coord:
            if m not in self._cycle_test:
                raise ShapeError(f"{self.name}: no representatives attached in degree {m}")
            # zero homology: only the cycle condition remains
            d = self._cycle_test[m]
            if any(d.matvec(v) for v in vectors):
                raise NotInSpanError(f"{self.name}: vector is not a cycle in degree {m}")
            return [{} for _ in vectors]
        ech = self._coord[m]
        out = []
        for residual, combo in ech.reduce(vectors):
            if residual:
                raise NotInSpanError(f"{self.name}: vector is not a cycle in degree {m}")
            out.append(combo)
        return out


def homology(c, upto: int | None = None, with_reps=False) -> HomologyTable:
    """Betti numbers through degree ``upto`` (default: the complex's max degree).

    ``with_reps`` may be True or an iterable of degrees; for those degrees a
    basis of cycle representatives and a coordinate map are attached.
    """
    shift = 0
    if isinstance(c, KernelSubcomplex):
        shift = c.shift
        c = c.complex
    K = c.max_degree if upto is None else upto
    if K + 1 > c.top:
        raise ShapeError(f"{c.name}: boundaries known through degree {c.top}, need {K + 1}")
    betti = [c.dim(m) - c.rank(m) - c.rank(m + 1) for m in range(K + 1)]
    table = HomologyTable(c.name, betti, shift)
    if with_reps:
        degrees = range(K + 1) if with_reps is True else with_reps
        for m in degrees:
            _attach_reps(c, m, table)
    return table


def _attach_reps(c: ChainComplexData, m: int, table: HomologyTable):
    F = c.field
    n = c.dim(m)
    table._cycle_test[m] = c.boundary(m)
    if table.betti[m] == 0:
        table.reps[m] = []
        return
    bnd = [col for _, col in c.boundary(m + 1).nonzero_columns()]
    bnd_rank = c.rank(m + 1)
    cycles = kernel_basis(c.boundary(m)).vectors() if m > 0 else [{i: F.one} for i in range(n)]
    ech = Echelon(F, n)
    ech.insert(bnd, stop_at_rank=bnd_rank)
    reps = [z for z, r in zip(cycles, ech.insert(cycles)) if r is None]
    if len(reps) != table.betti[m]:
        raise ShapeError(f"{c.name}: found {len(reps)} representatives, expected {table.betti[m]}")
    coord = Echelon(F, n, tag_dim=len(reps))
    coord.insert(bnd, None, stop_at_rank=bnd_rank)
    coord.insert(reps, [{i: F.one} for i in range(len(reps))])
    table.reps[m] = reps
    table._coord[m] = coord


# ---------------------------------------------------------------------------
# identities attached to the action of D on g ⊗ D^{⊗k}


def append_letter(ctx: AlgebraContext, k: int, g: int) -> SparseMatrix:
    """``β ↦ β ⊗ e_g`` from chain degree ``k`` to ``k + 1`` of the standard complex."""
    F = ctx.field
    H = ctx.tensor.dim
    n = ctx.a.dim * H**k
    return SparseMatrix(F, n * H, n, {i: {i * H + g: F.one} for i in range(n)}, _trusted=True)


def check_action_compatibility(ctx: AlgebraContext, K: int) -> CheckReport:
    """Compatibility of the extended D-action with the boundary of the Leibniz complex.

    Items, for every generator g of D and 1 ≤ k ≤ K (item (ii)/(iii) from k = 0):

    (i)   d ∘ act_k(g) = act_{k-1}(g) ∘ d,
    (ii)  d(β ⊗ g) = d(β) ⊗ g + s_k act_k(g, β),
    (iii) act_k(g) = s_k (d(· ⊗ g) - d(·) ⊗ g),

    where s_k is the sign making (ii) hold; the report records which of
    (-1)^k and (-1)^(k+1) it is.  A final item checks that act_k(g) sends
    every homology representative to a boundary.
    """
    rep = CheckReport("action_compatibility")
    cx = ctx.complex("leibniz", K)
    acts = {k: extend_actions(ctx.adjoint, k) for k in range(K + 1)}
    H = ctx.tensor.dim

    for k in range(1, K + 1):
        d = cx.boundary(k)
        for g in range(H):
            rep.tick()
            if d @ acts[k][g] != acts[k - 1][g] @ d:
                rep.add(("i", k, g))

    sign_hits = {"(-1)^k": 0, "(-1)^(k+1)": 0}
    total = 0
    for k in range(K + 1):
        d_hi = cx.boundary(k + 1)
        d_lo = cx.boundary(k)
        for g in range(H):
            total += 1
            app_hi = append_letter(ctx, k, g)
            app_lo = append_letter(ctx, k - 1, g) if k >= 1 else None
            lhs = d_hi @ app_hi
            base = app_lo @ d_lo if app_lo is not None else SparseMatrix.zeros(ctx.field, lhs.rows, lhs.cols)
            diff = lhs - base
            act = acts[k][g]
            s = 1 if k % 2 == 0 else -1
            if diff == act.scale(s):
                sign_hits["(-1)^k"] += 1
            if diff == act.scale(-s):
                sign_hits["(-1)^(k+1)"] += 1
    rep.notes["recursion_sign_matches"] = sign_hits
    rep.notes["recursion_total"] = total
    rep.tick(2 * total)
    if sign_hits["(-1)^k"] != total and sign_hits["(-1)^(k+1)"] != total:
        rep.add(("ii",), expected=total, got=sign_hits)
        rep.add(("iii",), expected=total, got=sign_hits)
    else:
        rep.notes["recursion_sign"] = "(-1)^k" if sign_hits["(-1)^k"] == total else "(-1)^(k+1)"

    table = homology(cx, K, with_reps=True)
    for k in range(K + 1):
        reps = table.reps.get(k, [])
        for g in range(H):
            rep.tick()
            images = [acts[k][g].matvec(z) for z in reps]
            coords = table.coordinates(k, images)
            if any(coords):
                rep.add(("homology_action", k, g), expected="zero", got=sum(1 for c in coords if c))
    return rep
