"""Spectral sequence of the filtration of the relative complex by the position
of the last Γ letter, with exact page dimensions.

In the adapted basis of D the relative complex is spanned by words
``x ⊗ h_1 ⊗ … ⊗ h_{k+1}`` containing at least one Γ letter.  Its filtration
degree is ``k + 1 - p`` where ``p`` is the (1-based) position of the last Γ
letter; ``F^r`` at total degree ``k`` is spanned by the words of filtration
degree at most ``r``, i.e. ``g ⊗ D^{⊗s} ⊗ ker(D^{⊗(r+1)} → L^{⊗(r+1)})`` with
``s = k - r``.  Every subspace involved is a coordinate subspace, so page
dimensions reduce to ranks of row/column-restricted blocks of the boundary.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

from .algebra import AlgebraSpec
from .checks import CheckReport
from .complexes import AlgebraContext, ChainComplexData, KernelSubcomplex, homology
from .errors import HypothesisError, ShapeError
from .linalg import SparseMatrix, Subspace, rank

PAGES = ("0", "1", "2", "inf")


def check_hypotheses(a: AlgebraSpec, strict_dimension: bool = True) -> list[str]:
    """Raise HypothesisError unless ``a`` is Filippov with ``n > 2``; returns warnings.

    With ``strict_dimension=False`` a dimension below the arity is reported as
    a warning instead of refused.
    """
    if a.n <= 2:
        raise HypothesisError(f"spectral sequence needs arity n > 2, got n = {a.n}")
    a.require_filippov()
    if a.dim < a.n:
        msg = f"dimension {a.dim} is below the arity {a.n} (dimension at least n is assumed)"
        if strict_dimension:
            raise HypothesisError(msg)
        return [msg]
    return []


@dataclass
class FilteredComplex:
    """Filtration degrees for the basis of the relative complex.

    Total degree ``k`` is chain degree ``k + 1`` of the relative complex.
    """

    name: str
    rel: KernelSubcomplex
    complex: ChainComplexData
    filt: list
    max_total: int
    warnings: list = dc_field(default_factory=list)
    _ranks: dict = dc_field(default_factory=dict, repr=False)

    @property
    def field(self):
        return self.complex.field

    def total_dim(self, k: int) -> int:
        return self.complex.dim(k + 1) if k >= 0 else 0

    def filtration_values(self, k: int) -> list[int]:
        return self.filt[k + 1] if 0 <= k + 1 < len(self.filt) else []

    def indices(self, k: int, r: int) -> list[int]:
        """Basis positions of ``F^r`` at total degree ``k``."""
        return [i for i, f in enumerate(self.filtration_values(k)) if f <= r]

    def subspace(self, r: int, s: int) -> Subspace:
        """``F^r_s`` as a subspace of the relative chains of total degree ``r + s``."""
        k = r + s
        if k > self.max_total + 1 or r < 0 or s < 0:
            raise ShapeError(f"cell ({r}, {s}) is beyond the built range")
        F = self.field
        return Subspace(F, self.total_dim(k), [{i: F.one} for i in self.indices(k, r)], check=False)

    def boundary(self, k: int) -> SparseMatrix:
        """Boundary from total degree ``k`` to ``k - 1``."""
        return self.complex.boundary(k + 1)

    def block_rank(self, k: int, row_above: int | None, col_upto: int | None) -> int:
        """Rank of the boundary out of total degree ``k`` restricted to columns of
        filtration ``≤ col_upto`` and rows of filtration ``> row_above``.

        ``None`` means no restriction on that side.
        """
        key = (k, row_above, col_upto)
        if key not in self._ranks:
            if k < 1 or k > self.max_total + 1:
                self._ranks[key] = 0
            else:
                rows = [i for i, f in enumerate(self.filtration_values(k - 1)) if row_above is None or f > row_above]
                cols = [i for i, f in enumerate(self.filtration_values(k)) if col_upto is None or f <= col_upto]
                if not rows or not cols:
                    self._ranks[key] = 0
                else:
                    self._ranks[key] = rank(self.boundary(k).submatrix(rows, cols))
        return self._ranks[key]

    def count(self, k: int, upto: int) -> int:
        return sum(1 for f in self.filtration_values(k) if f <= upto)

    def check(self) -> CheckReport:
        """Nesting, exhaustion and compatibility of the boundary with the filtration."""
        rep = CheckReport(f"filtration[{self.name}]")
        for k in range(self.max_total + 2):
            vals = self.filtration_values(k)
            rep.tick()
            if any(f < 0 or f > k for f in vals):
                rep.add(("range", k))
            for r in range(1, k + 1):
                rep.tick()
                if not set(self.indices(k, r - 1)) <= set(self.indices(k, r)):
                    rep.add(("nested", k, r))
            rep.tick()
            if len(self.indices(k, k)) != self.total_dim(k):
                rep.add(("exhaustive", k), expected=self.total_dim(k), got=len(self.indices(k, k)))
            if k >= 1:
                low = self.filtration_values(k - 1)
                for j, col in self.boundary(k).nonzero_columns():
                    rep.tick()
                    bad = [i for i in col if low[i] > vals[j]]
                    if bad:
                        rep.add(("boundary", k, j), expected=f"filtration <= {vals[j]}", got=bad[:5])
        return rep


def build_filtration(a: AlgebraSpec, K: int, ctx: AlgebraContext | None = None,
                     strict_dimension: bool = True) -> FilteredComplex:
    """Filtration through total degree ``K`` (chain degree ``K + 1``, boundaries one further)."""
    warnings = check_hypotheses(a, strict_dimension)
    ctx = ctx or AlgebraContext(a)
    rel = ctx.kernel_subcomplex("relative", K + 1)
    cx = rel.complex
    Dd = ctx.tensor.dim
    nb = ctx.basis.n_sorted
    filt = []
    for m in range(cx.top + 1):
        vals = []
        for i in rel.indices[m]:
            w = i % (Dd**m)
            last = 0
            for pos in range(m, 0, -1):
                w, x = divmod(w, Dd)
                if x >= nb:
                    last = pos
                    break
            vals.append(m - last)
        filt.append(vals)
    return FilteredComplex(a.name, rel, cx, filt, K, warnings)


@dataclass
class SpectralPages:
    """``dims[page][(r, s)]`` for pages ``"0"``, ``"1"``, ``"2"``, ``"inf"``."""

    name: str
    dims: dict = dc_field(default_factory=dict)
    max_total: int = 0

    def total(self, page: str, k: int) -> int:
        return sum(v for (r, s), v in self.dims[page].items() if r + s == k)

    def table(self, page: str) -> list[list[int]]:
        """Rows indexed by ``s``, columns by ``r``, cells with ``r + s ≤ max_total``."""
        K = self.max_total
        return [[self.dims[page].get((r, s), 0) for r in range(K + 1 - s)] for s in range(K + 1)]


def _finite_page(f: FilteredComplex, a: int, r: int, s: int) -> int:
    k = r + s

    def cycles(level, p):
        # dim {x in F^p : dx in F^(p - level)} at total degree k
        if p < 0:
            return 0
        return f.count(k, p) - f.block_rank(k, p - level, p)

    num = cycles(a, r) - cycles(a - 1, r - 1)
    top = r + a - 1
    den = f.block_rank(k + 1, r - 1, top) - f.block_rank(k + 1, r, top) if top >= 0 else 0
    return num - den


def _infinite_page(f: FilteredComplex, r: int, s: int) -> int:
    k = r + s

    def image(p):
        # dim of the image of H_k(F^p) in H_k of the whole complex
        if p < 0:
            return 0
        z = f.count(k, p) - f.block_rank(k, None, p)
        b = f.block_rank(k + 1, None, None) - f.block_rank(k + 1, p, None)
        return z - b

    return image(r) - image(r - 1)


def page_cell(f: FilteredComplex, page, r: int, s: int) -> int:
    """``E^page_{r,s}``; integer pages beyond 2 are allowed for internal cross-checks."""
    if r < 0 or s < 0 or r + s > f.max_total:
        raise ShapeError(f"cell ({r}, {s}) is beyond the built range (total degree ≤ {f.max_total})")
    if page in ("inf", "∞"):
        return _infinite_page(f, r, s)
    return _finite_page(f, int(page), r, s)


def page_dims(f: FilteredComplex, pages=PAGES, workers: int = 1) -> SpectralPages:
    """Dimensions of the requested pages on every cell with ``r + s ≤ max_total``."""
    cells = [(r, k - r) for k in range(f.max_total + 1) for r in range(k + 1)]
    # warm the rank cache per total degree so threads only read shared entries
    jobs = [(str(p), r, s) for p in pages for r, s in cells]

    def run(job):
        p, r, s = job
        return page_cell(f, p, r, s)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            values = list(pool.map(run, jobs))
    else:
        values = [run(j) for j in jobs]
    out = SpectralPages(f.name, {str(p): {} for p in pages}, f.max_total)
    for (p, r, s), v in zip(jobs, values):
        out.dims[p][(r, s)] = v
    return out


def graded_page_one(f: FilteredComplex) -> dict:
    """``E^1`` as the homology of the associated graded complexes ``(E^0_{r,*}, d^0)``."""
    out = {}
    for k in range(f.max_total + 1):
        for r in range(k + 1):
            here = [i for i, v in enumerate(f.filtration_values(k)) if v == r]
            below = [i for i, v in enumerate(f.filtration_values(k - 1)) if v == r] if k >= 1 else []
            above = [i for i, v in enumerate(f.filtration_values(k + 1)) if v == r]
            r_out = rank(f.boundary(k).submatrix(below, here)) if below and here else 0
            r_in = rank(f.boundary(k + 1).submatrix(here, above)) if here and above else 0
            out[(r, k - r)] = len(here) - r_out - r_in
    return out


def verify_page_formulas(a: AlgebraSpec, K: int, ctx: AlgebraContext | None = None, strict_dimension: bool = True,
                 workers: int = 1) -> CheckReport:
    """Compare the pages with the product formulas on every cell ``r + s ≤ K - 1``:

    (i)   E^0 = dim CL_s · dim DR_r,
    (ii)  E^1 = dim HL_s · dim DR_r,
    (iii) E^2 = dim HL_s · dim HD_r,
    (iv)  Σ_{r+s=k} E^∞ = dim H^rel_k,

    where CL is the Leibniz complex with coefficients in g, DR the Γ-coefficient
    subcomplex and HD its homology.  Also checks the filtration itself, page
    monotonicity, and E^1 against the associated graded complex.
    """
    ctx = ctx or AlgebraContext(a)
    rep = CheckReport("spectral_sequence")
    if K < 1:
        rep.skipped.append("no cells with r + s <= K - 1")
        return rep
    f = build_filtration(a, K - 1, ctx, strict_dimension)
    rep.notes["warnings"] = list(f.warnings)
    rep.merge(f.check(), "filtration")
    pages = page_dims(f, workers=workers)
    top = K - 1

    cl = ctx.complex("leibniz", K)
    hl = homology(cl, top).betti
    dr = ctx.kernel_subcomplex("gamma", K)
    dr_dims = [dr.dim(m) for m in range(top + 1)]
    hd = homology(dr, top).betti
    rel_h = homology(ctx.kernel_subcomplex("relative", K), top + 1).relative_betti()

    for r in range(top + 1):
        for s in range(top + 1 - r):
            cell = (r, s)
            expected = {
                "0": cl.dim(s) * dr_dims[r],
                "1": hl[s] * dr_dims[r],
                "2": hl[s] * hd[r],
            }
            for p, label in (("0", "i"), ("1", "ii"), ("2", "iii")):
                rep.tick()
                if pages.dims[p][cell] != expected[p]:
                    rep.add((label, r, s), expected=expected[p], got=pages.dims[p][cell])
    for k in range(top + 1):
        rep.tick()
        if pages.total("inf", k) != rel_h[k]:
            rep.add(("iv", k), expected=rel_h[k], got=pages.total("inf", k))

    graded = graded_page_one(f)
    for cell, v in pages.dims["1"].items():
        rep.tick()
        if graded[cell] != v:
            rep.add(("graded_E1", *cell), expected=graded[cell], got=v)
    for lo, hi in (("0", "1"), ("1", "2"), ("2", "inf")):
        for cell in pages.dims[lo]:
            rep.tick()
            if not 0 <= pages.dims[hi][cell] <= pages.dims[lo][cell]:
                rep.add(("monotone", lo, hi, *cell), expected=f"<= {pages.dims[lo][cell]}",
                        got=pages.dims[hi][cell])
    rep.notes["pages"] = {p: pages.table(p) for p in pages.dims}
    rep.notes["expected"] = {"CL_dims": [cl.dim(s) for s in range(top + 1)], "HL": hl[:top + 1],
                             "DR_dims": dr_dims, "HD": hd[:top + 1], "Hrel": rel_h[:top + 1]}
    return rep


def binary_degeneracy_check(b: AlgebraSpec, K: int, ctx: AlgebraContext | None = None) -> CheckReport:
    """For arity 2 both kernel subcomplexes vanish in every chain degree ≤ K."""
    if b.n != 2:
        raise HypothesisError(f"expected a binary algebra, got arity {b.n}")
    ctx = ctx or AlgebraContext(b)
    rep = CheckReport("binary_degeneracy")
    for which in ("relative", "gamma"):
        sub = ctx.kernel_subcomplex(which, K)
        for m in range(K + 1):
            rep.tick()
            if sub.dim(m):
                rep.add((which, m), expected=0, got=sub.dim(m))
    rep.notes["gamma_dim"] = ctx.basis.n_gamma
    return rep


def lie_vanishing_check(a: AlgebraSpec, K: int, ctx: AlgebraContext | None = None,
                      strict_dimension: bool = True) -> CheckReport:
    """If the Lie-type homology vanishes through K, the Leibniz homology vanishes through K - 1."""
    check_hypotheses(a, strict_dimension)
    ctx = ctx or AlgebraContext(a)
    rep = CheckReport("lie_vanishing_implies_leibniz_vanishing")
    lie = homology(ctx.complex("lie", K), K).betti
    leib = homology(ctx.complex("leibniz", K), K).betti
    rep.notes["HLie"] = lie
    rep.notes["HL"] = leib
    if any(lie):
        rep.notes["branch"] = "hypothesis false (vacuous)"
        return rep
    rep.notes["branch"] = "hypothesis true"
    for k in range(K):
        rep.tick()
        if leib[k]:
            rep.add(("HL", k), expected=0, got=leib[k])
    return rep
