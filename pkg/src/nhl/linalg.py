"""Exact linear algebra over Q and prime fields.

Vectors are plain ``dict`` objects mapping an index to a nonzero field
element.  Matrices are stored column-wise as dicts of such vectors.  All
elimination is exact: rationals use :class:`fractions.Fraction`, prime
fields use Python integers reduced mod p.

Large eliminations over a prime field switch to a dense engine that keeps a
reduced row echelon form in ``float64`` arrays and does its reductions with
BLAS matrix products.  For ``p < 2**25`` every intermediate integer stays
below ``2**53`` as long as the echelon rank is below ``2**53 / p**2`` (about
8.7 million for the default prime), so the float arithmetic is exact.
"""

from __future__ import annotations

import heapq
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import FieldError, NotInSpanError, ShapeError

DEFAULT_PRIME = 32003

# dense engine bounds; outside them the dict engine is used
DENSE_MIN_DIM = 48
DENSE_MAX_DIM = 8192
DENSE_BATCH = 256
_MAX_DENSE_PRIME = 2**25


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


class Field:
    """Either the rationals (``p is None``) or F_p for an odd prime p."""

    __slots__ = ("p",)

    def __init__(self, p: int | None = None):
        if p is not None:
            if not isinstance(p, int) or isinstance(p, bool):
                raise FieldError(f"characteristic must be an integer, got {p!r}")
            if p == 2:
                raise FieldError("characteristic 2 is not supported")
            if not is_prime(p):
                raise FieldError(f"{p} is not prime")
        self.p = p

    @classmethod
    def rational(cls) -> "Field":
        return cls(None)

    @classmethod
    def prime(cls, p: int = DEFAULT_PRIME) -> "Field":
        return cls(p)

    @classmethod
    def from_spec(cls, spec: dict) -> "Field":
        kind = spec.get("type")
        if kind == "rational":
            return cls.rational()
        if kind == "prime":
            return cls.prime(spec.get("p"))
        raise FieldError(f"unknown field type {kind!r}")

    @classmethod
    def parse(cls, text: str) -> "Field":
        """Parse the CLI form ``rational`` or ``prime:P``."""
        if text == "rational":
            return cls.rational()
        if text.startswith("prime:"):
            try:
                return cls.prime(int(text.split(":", 1)[1]))
            except ValueError as exc:
                raise FieldError(f"bad field {text!r}") from exc
        raise FieldError(f"bad field {text!r}")

    @property
    def is_prime(self) -> bool:
        return self.p is not None

    @property
    def kind(self) -> str:
        return "rational" if self.p is None else "prime"

    def spec(self) -> dict:
        if self.p is None:
            return {"type": "rational"}
        return {"type": "prime", "p": self.p}

    def __eq__(self, other):
        return isinstance(other, Field) and other.p == self.p

    def __hash__(self):
        return hash(("Field", self.p))

    def __repr__(self):
        return "QQ" if self.p is None else f"GF({self.p})"

    # elements -----------------------------------------------------------

    @property
    def zero(self):
        return 0 if self.p is not None else Fraction(0)

    @property
    def one(self):
        return 1 if self.p is not None else Fraction(1)

    def __call__(self, x):
        """Coerce an int, Fraction or ``"a/b"`` string into the field."""
        if isinstance(x, str):
            try:
                x = Fraction(x.strip())
            except (ValueError, ZeroDivisionError) as exc:
                raise FieldError(f"bad coefficient {x!r}") from exc
        if self.p is None:
            return Fraction(x)
        if isinstance(x, Fraction):
            den = x.denominator % self.p
            if den == 0:
                raise FieldError(f"denominator of {x} vanishes mod {self.p}")
            return x.numerator * pow(den, -1, self.p) % self.p
        return int(x) % self.p

    def norm(self, x):
        return x % self.p if self.p is not None else x

    def add(self, a, b):
        return self.norm(a + b)

    def sub(self, a, b):
        return self.norm(a - b)

    def mul(self, a, b):
        return self.norm(a * b)

    def neg(self, a):
        return self.norm(-a)

    def inv(self, a):
        if not a:
            raise FieldError("division by zero")
        if self.p is None:
            return 1 / Fraction(a)
        return pow(a, -1, self.p)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def to_str(self, x) -> str:
        """Fraction-string form; prime residues use the symmetric representative."""
        if self.p is None:
            x = Fraction(x)
            return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
        x %= self.p
        return str(x - self.p if x > self.p // 2 else x)


def field_arith(field: Field, op: str, a, b=None):
    if op == "add":
        return field.add(a, b)
    if op == "mul":
        return field.mul(a, b)
    if op == "neg":
        return field.neg(a)
    if op == "inv":
        return field.inv(a)
    raise ValueError(f"unknown op {op!r}")


# ---------------------------------------------------------------------------
# sparse vectors


def vec_axpy(field: Field, y: dict, a, x: dict) -> dict:
    """In place ``y += a*x``; returns y."""
    if not a:
        return y
    p = field.p
    for k, v in x.items():
        t = y.get(k, 0) + a * v
        if p is not None:
            t %= p
        if t:
            y[k] = t
        else:
            y.pop(k, None)
    return y


def vec_scale(field: Field, a, x: dict) -> dict:
    if not a:
        return {}
    return {k: field.norm(a * v) for k, v in x.items()}


def vec_clean(field: Field, x: dict) -> dict:
    out = {}
    for k, v in x.items():
        v = field.norm(v)
        if v:
            out[k] = v
    return out


def vec_from_dense(field: Field, values: Sequence) -> dict:
    out = {}
    for i, v in enumerate(values):
        v = field(v)
        if v:
            out[i] = v
    return out


def vec_to_dense(field: Field, x: dict, n: int) -> list:
    out = [field.zero] * n
    for k, v in x.items():
        out[k] = v
    return out


# ---------------------------------------------------------------------------
# sparse matrices


class SparseMatrix:
    """Column-major sparse matrix with no stored zeros.

    Treated as immutable once built; methods return new matrices.
    """

    __slots__ = ("field", "rows", "cols", "_c")

    def __init__(self, field: Field, rows: int, cols: int, columns: dict | None = None, *, _trusted=False):
        self.field = field
        self.rows = rows
        self.cols = cols
        if _trusted:
            self._c = columns
            return
        clean = {}
        for j, col in (columns or {}).items():
            if not 0 <= j < cols:
                raise ShapeError(f"column {j} out of range for {rows}x{cols}")
            c = {}
            for i, v in col.items():
                if not 0 <= i < rows:
                    raise ShapeError(f"row {i} out of range for {rows}x{cols}")
                v = field.norm(v)
                if v:
                    c[i] = v
            if c:
                clean[j] = c
        self._c = clean

    # construction ------------------------------------------------------

    @classmethod
    def zeros(cls, field, rows, cols):
        return cls(field, rows, cols, {}, _trusted=True)

    @classmethod
    def identity(cls, field, n):
        return cls(field, n, n, {i: {i: field.one} for i in range(n)}, _trusted=True)

    @classmethod
    def from_triplets(cls, field, rows, cols, triplets: Iterable):
        cs: dict = {}
        for i, j, v in triplets:
            if not (0 <= i < rows and 0 <= j < cols):
                raise ShapeError(f"entry ({i},{j}) out of range for {rows}x{cols}")
            col = cs.setdefault(j, {})
            col[i] = col.get(i, 0) + field(v)
        return cls(field, rows, cols, cs)

    @classmethod
    def from_dense(cls, field, data: Sequence[Sequence]):
        rows = len(data)
        cols = len(data[0]) if rows else 0
        return cls.from_triplets(
            field, rows, cols, ((i, j, v) for i, r in enumerate(data) for j, v in enumerate(r) if v)
        )

    @classmethod
    def from_columns(cls, field, rows, columns: Sequence[dict]):
        return cls(field, rows, len(columns), {j: c for j, c in enumerate(columns) if c})

    # access --------------------------------------------------------------

    @property
    def shape(self):
        return (self.rows, self.cols)

    def column(self, j: int) -> dict:
        return self._c.get(j, {})

    def columns(self) -> list[dict]:
        return [self._c.get(j, {}) for j in range(self.cols)]

    def nonzero_columns(self):
        return self._c.items()

    @property
    def nnz(self) -> int:
        return sum(len(c) for c in self._c.values())

    def entry(self, i, j):
        return self._c.get(j, {}).get(i, self.field.zero)

    def triplets(self) -> list:
        return sorted((i, j, v) for j, c in self._c.items() for i, v in c.items())

    def is_zero(self) -> bool:
        return not self._c

    def to_dense(self) -> list[list]:
        out = [[self.field.zero] * self.cols for _ in range(self.rows)]
        for j, c in self._c.items():
            for i, v in c.items():
                out[i][j] = v
        return out

    def __eq__(self, other):
        return (
            isinstance(other, SparseMatrix)
            and self.shape == other.shape
            and self.field == other.field
            and self._c == other._c
        )

    def __repr__(self):
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={self.nnz}, {self.field!r})"

    # arithmetic ----------------------------------------------------------

    def _check_same(self, other):
        if self.shape != other.shape or self.field != other.field:
            raise ShapeError(f"shape/field mismatch {self!r} vs {other!r}")

    def __add__(self, other):
        self._check_same(other)
        cs = {j: dict(c) for j, c in self._c.items()}
        for j, c in other._c.items():
            col = cs.setdefault(j, {})
            vec_axpy(self.field, col, 1, c)
            if not col:
                del cs[j]
        return SparseMatrix(self.field, self.rows, self.cols, cs, _trusted=True)

    def __neg__(self):
        return self.scale(self.field.neg(self.field.one))

    def __sub__(self, other):
        return self + (-other)

    def scale(self, a):
        a = self.field(a)
        if not a:
            return SparseMatrix.zeros(self.field, self.rows, self.cols)
        return SparseMatrix(
            self.field, self.rows, self.cols,
            {j: vec_scale(self.field, a, c) for j, c in self._c.items()}, _trusted=True,
        )

    def matvec(self, x: dict) -> dict:
        out: dict = {}
        for j, a in x.items():
            c = self._c.get(j)
            if c:
                vec_axpy(self.field, out, a, c)
        return out

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.cols != other.rows or self.field != other.field:
            raise ShapeError(f"cannot multiply {self!r} by {other!r}")
        cs = {}
        for j, c in other._c.items():
            col = self.matvec(c)
            if col:
                cs[j] = col
        return SparseMatrix(self.field, self.rows, other.cols, cs, _trusted=True)

    def transpose(self) -> "SparseMatrix":
        cs: dict = {}
        for j, c in self._c.items():
            for i, v in c.items():
                cs.setdefault(i, {})[j] = v
        return SparseMatrix(self.field, self.cols, self.rows, cs, _trusted=True)

    @property
    def T(self):
        return self.transpose()

    def submatrix(self, row_idx: Sequence[int] | None, col_idx: Sequence[int] | None) -> "SparseMatrix":
        """Restrict to the given rows/columns (``None`` keeps all), reindexed in the given order."""
        if col_idx is None:
            col_idx = range(self.cols)
        if row_idx is None:
            cs = {}
            for new, j in enumerate(col_idx):
                c = self._c.get(j)
                if c:
                    cs[new] = c
            return SparseMatrix(self.field, self.rows, len(col_idx), cs, _trusted=True)
        rmap = {r: k for k, r in enumerate(row_idx)}
        cs = {}
        for new, j in enumerate(col_idx):
            c = self._c.get(j)
            if not c:
                continue
            sub = {rmap[i]: v for i, v in c.items() if i in rmap}
            if sub:
                cs[new] = sub
        return SparseMatrix(self.field, len(row_idx), len(col_idx), cs, _trusted=True)

    def hstack(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.rows != other.rows:
            raise ShapeError("row mismatch in hstack")
        cs = dict(self._c)
        for j, c in other._c.items():
            cs[j + self.cols] = c
        return SparseMatrix(self.field, self.rows, self.cols + other.cols, cs, _trusted=True)

    def kron(self, other: "SparseMatrix") -> "SparseMatrix":
        cs = {}
        for j1, c1 in self._c.items():
            for j2, c2 in other._c.items():
                col = {}
                for i1, v1 in c1.items():
                    for i2, v2 in c2.items():
                        col[i1 * other.rows + i2] = self.field.mul(v1, v2)
                cs[j1 * other.cols + j2] = col
        return SparseMatrix(self.field, self.rows * other.rows, self.cols * other.cols, cs, _trusted=True)

    def change_field(self, field: Field) -> "SparseMatrix":
        """Reinterpret integer/rational entries in another field."""
        return SparseMatrix(
            field, self.rows, self.cols,
            {j: {i: field(v) for i, v in c.items()} for j, c in self._c.items()},
        )


# ---------------------------------------------------------------------------
# echelon engines


class _DictEngine:
    """Semi-reduced echelon basis over any field, dict vectors throughout.

    A new pivot is chosen among the residual's nonzero coordinates by the
    smallest ``weights`` value (a column-count proxy for Markowitz cost),
    ties broken by the lowest index.
    """

    def __init__(self, field, dim, weights=None):
        self.field = field
        self.dim = dim
        self.weights = weights
        self.piv: dict[int, int] = {}  # coordinate -> slot
        self.vecs: list[dict] = []
        self.tags: list[dict] = []
        self.pivcoord: list[int] = []

    @property
    def rank(self):
        return len(self.vecs)

    def _reduce(self, v: dict):
        """Reduce ``v`` in place; returns ``(v, acc)`` with acc = sum of f * tag."""
        # basis vector s vanishes on the pivots of all earlier slots, so
        # visiting slots in increasing order never revisits a pivot
        F = self.field
        heap = [self.piv[k] for k in v if k in self.piv]
        heapq.heapify(heap)
        done = set()
        acc: dict = {}
        while heap:
            s = heapq.heappop(heap)
            if s in done:
                continue
            done.add(s)
            f = v.get(self.pivcoord[s])
            if not f:
                continue
            b = self.vecs[s]
            for kk in b:
                s2 = self.piv.get(kk)
                if s2 is not None and s2 > s:
                    heapq.heappush(heap, s2)
            vec_axpy(F, v, F.neg(f), b)
            t = self.tags[s]
            if t:
                vec_axpy(F, acc, f, t)
        return v, acc

    def insert(self, v: dict, tag: dict | None):
        F = self.field
        v, acc = self._reduce(dict(v))
        tag = vec_axpy(F, dict(tag or {}), F.neg(F.one), acc)
        if not v:
            return tag
        if self.weights is None:
            k = min(v)
        else:
            w = self.weights
            k = min(v, key=lambda c: (w[c], c))
        inv = F.inv(v[k])
        v = vec_scale(F, inv, v)
        tag = vec_scale(F, inv, tag)
        self.piv[k] = len(self.vecs)
        self.pivcoord.append(k)
        self.vecs.append(v)
        self.tags.append(tag)
        return None

    def reduce(self, v: dict):
        return self._reduce(dict(v))


class _DenseEngine:
    """Fully reduced row echelon form over F_p in float64 arrays (exact, see module doc)."""

    def __init__(self, field, dim, tag_dim):
        self.field = field
        self.p = field.p
        self.dim = dim
        self.tag_dim = tag_dim
        self.E = np.zeros((0, dim))
        self.T = np.zeros((0, tag_dim))
        self.piv: list[int] = []

    @property
    def rank(self):
        return len(self.piv)

    def _dense(self, vecs, n):
        X = np.zeros((len(vecs), n))
        for r, v in enumerate(vecs):
            if v:
                X[r, list(v.keys())] = [int(x) for x in v.values()]
        return X

    @staticmethod
    def _sparse(row):
        nz = np.flatnonzero(row)
        return {int(k): int(row[k]) for k in nz}

    def insert_batch(self, vecs, tags):
        p = self.p
        X = self._dense(vecs, self.dim)
        Y = self._dense(tags, self.tag_dim) if self.tag_dim else np.zeros((len(vecs), 0))
        if self.piv:
            C = X[:, self.piv]
            X = np.mod(X - C @ self.E, p)
            if self.tag_dim:
                Y = np.mod(Y - C @ self.T, p)
        results = [None] * len(vecs)
        new_rows, new_piv = [], []
        for i in range(len(vecs)):
            nz = np.flatnonzero(X[i])
            if nz.size == 0:
                results[i] = self._sparse(Y[i]) if self.tag_dim else {}
                continue
            q = int(nz[0])
            inv = pow(int(X[i, q]), -1, p)
            X[i] = np.mod(X[i] * inv, p)
            if self.tag_dim:
                Y[i] = np.mod(Y[i] * inv, p)
            col = X[:, q].copy()
            col[i] = 0
            others = np.flatnonzero(col)
            if others.size:
                f = col[others]
                X[others] = np.mod(X[others] - np.outer(f, X[i]), p)
                if self.tag_dim:
                    Y[others] = np.mod(Y[others] - np.outer(f, Y[i]), p)
            new_rows.append(i)
            new_piv.append(q)
        if new_rows:
            N = X[new_rows]
            if self.piv:
                Fm = self.E[:, new_piv]
                self.E = np.mod(self.E - Fm @ N, p)
                if self.tag_dim:
                    self.T = np.mod(self.T - Fm @ Y[new_rows], p)
            self.E = np.vstack([self.E, N])
            if self.tag_dim:
                self.T = np.vstack([self.T, Y[new_rows]])
            self.piv.extend(new_piv)
        return results

    def reduce_batch(self, vecs):
        p = self.p
        X = self._dense(vecs, self.dim)
        if not self.piv:
            return [(self._sparse(X[i]), {}) for i in range(len(vecs))]
        C = X[:, self.piv]
        R = np.mod(X - C @ self.E, p)
        K = np.mod(C @ self.T, p) if self.tag_dim else None
        out = []
        for i in range(len(vecs)):
            out.append((self._sparse(R[i]), self._sparse(K[i]) if K is not None else {}))
        return out


class Echelon:
    """Incremental echelon basis of a subspace of ``field**dim``.

    Every inserted vector may carry a *tag* (a sparse vector in some auxiliary
    space).  Tags are propagated through elimination, so a vector that reduces
    to zero yields the linear relation that killed it, and ``reduce`` returns
    the combination of inserted tags that was subtracted.
    """

    def __init__(self, field: Field, dim: int, tag_dim: int = 0, weights=None, engine: str | None = None):
        self.field = field
        self.dim = dim
        self.tag_dim = tag_dim
        if engine is None:
            dense_ok = (
                field.is_prime
                and field.p < _MAX_DENSE_PRIME
                and DENSE_MIN_DIM <= dim <= DENSE_MAX_DIM
                and tag_dim <= 4 * DENSE_MAX_DIM
            )
            engine = "dense" if dense_ok else "dict"
        if engine == "dense" and not field.is_prime:
            raise FieldError("dense engine needs a prime field")
        self.engine = engine
        if engine == "dense":
            self._e = _DenseEngine(field, dim, tag_dim)
        else:
            self._e = _DictEngine(field, dim, weights)

    @property
    def rank(self) -> int:
        return self._e.rank

    def insert(self, vectors: Iterable[dict], tags: Iterable[dict] | None = None, stop_at_full=False,
               stop_at_rank: int | None = None) -> list:
        """Insert vectors; returns, per vector, ``None`` if it enlarged the span,
        else the tag of its zero residual (a relation among inserted tags).

        With ``stop_at_full`` (or ``stop_at_rank``) the remaining vectors are
        skipped once the rank reaches ``dim`` (or the given rank); their
        entries are ``{}``.
        """
        limit = self.dim if stop_at_full else stop_at_rank
        vectors = list(vectors)
        tags = list(tags) if tags is not None else [{}] * len(vectors)
        if len(tags) != len(vectors):
            raise ShapeError("one tag per vector required")
        out = []
        if self.engine == "dense":
            for start in range(0, len(vectors), DENSE_BATCH):
                if limit is not None and self.rank >= limit:
                    out.extend([{}] * (len(vectors) - start))
                    break
                chunk = vectors[start:start + DENSE_BATCH]
                tchunk = tags[start:start + DENSE_BATCH]
                idx = [i for i, v in enumerate(chunk) if v]
                # a zero vector is its own relation
                res = [dict(t) for t in tchunk]
                if idx:
                    sub = self._e.insert_batch([chunk[i] for i in idx], [tchunk[i] for i in idx])
                    for i, r in zip(idx, sub):
                        res[i] = r
                out.extend(res)
            return out
        for v, t in zip(vectors, tags):
            if limit is not None and self.rank >= limit:
                out.append({})
                continue
            out.append(self._e.insert(v, t))
        return out

    def reduce(self, vectors: Iterable[dict]) -> list[tuple[dict, dict]]:
        """Return ``(residual, combo)`` per vector with ``v = sum(combo-weighted
        inserted vectors) + residual`` in tag coordinates."""
        vectors = list(vectors)
        if self.engine == "dense":
            out = []
            for start in range(0, len(vectors), DENSE_BATCH):
                out.extend(self._e.reduce_batch(vectors[start:start + DENSE_BATCH]))
            return out
        return [self._e.reduce(v) for v in vectors]

    def contains(self, v: dict) -> bool:
        return not self.reduce([v])[0][0]


def _column_weights(m: SparseMatrix) -> list[int]:
    w = [0] * m.rows
    for _, c in m.nonzero_columns():
        for i in c:
            w[i] += 1
    return w


def rank(m: SparseMatrix) -> int:
    """Rank over ``m.field``; eliminates in the smaller of the two dimensions."""
    if m.is_zero():
        return 0
    if m.rows > m.cols:
        m = m.transpose()
    cols = sorted((c for _, c in m.nonzero_columns()), key=len)
    ech = Echelon(m.field, m.rows, weights=_column_weights(m))
    ech.insert(cols, stop_at_full=True)
    return ech.rank


# ---------------------------------------------------------------------------
# subspaces


class Subspace:
    """Span of linearly independent column vectors in ``field**ambient_dim``."""

    __slots__ = ("field", "ambient_dim", "basis")

    def __init__(self, field: Field, ambient_dim: int, basis: SparseMatrix | Sequence[dict], *, check=True):
        if not isinstance(basis, SparseMatrix):
            basis = SparseMatrix.from_columns(field, ambient_dim, list(basis))
        if basis.rows != ambient_dim:
            raise ShapeError("basis rows must equal ambient dimension")
        if check and rank(basis) != basis.cols:
            raise ShapeError("subspace basis is not linearly independent")
        self.field = field
        self.ambient_dim = ambient_dim
        self.basis = basis

    @classmethod
    def span(cls, field, ambient_dim, vectors: Iterable[dict]) -> "Subspace":
        """Independent subset of ``vectors`` spanning the same space (first-come order)."""
        vectors = list(vectors)
        ech = Echelon(field, ambient_dim)
        keep = [v for v, r in zip(vectors, ech.insert(vectors)) if r is None]
        return cls(field, ambient_dim, keep, check=False)

    @classmethod
    def zero(cls, field, n):
        return cls(field, n, SparseMatrix.zeros(field, n, 0), check=False)

    @classmethod
    def full(cls, field, n):
        return cls(field, n, SparseMatrix.identity(field, n), check=False)

    @property
    def dim(self) -> int:
        return self.basis.cols

    def vectors(self) -> list[dict]:
        return self.basis.columns()

    def echelon(self, tagged=False) -> Echelon:
        ech = Echelon(self.field, self.ambient_dim, tag_dim=self.dim if tagged else 0)
        vecs = self.vectors()
        tags = [{j: self.field.one} for j in range(self.dim)] if tagged else None
        ech.insert(vecs, tags)
        return ech

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim})"


def kernel_basis(m: SparseMatrix) -> Subspace:
    """Basis of the null space of ``m`` (vectors of length ``m.cols``)."""
    F = m.field
    n = m.cols
    if m.is_zero():
        return Subspace.full(F, n)
    ech = Echelon(F, m.rows, tag_dim=n, weights=_column_weights(m))
    rels = ech.insert(m.columns(), [{j: F.one} for j in range(n)])
    vecs = []
    for j, r in enumerate(rels):
        if r is not None:
            vecs.append(r)
    return Subspace(F, n, vecs, check=False)


def _same_ambient(u: Subspace, w: Subspace):
    if u.ambient_dim != w.ambient_dim or u.field != w.field:
        raise ShapeError(f"ambient mismatch: {u!r} vs {w!r}")


def subspace_sum(u: Subspace, w: Subspace) -> Subspace:
    _same_ambient(u, w)
    return Subspace.span(u.field, u.ambient_dim, u.vectors() + w.vectors())


def subspace_intersect(u: Subspace, w: Subspace) -> Subspace:
    _same_ambient(u, w)
    F = u.field
    stacked = u.basis.hstack(w.basis)
    ker = kernel_basis(stacked)
    vecs = []
    for k in ker.vectors():
        x = {j: c for j, c in k.items() if j < u.dim}
        vecs.append(u.basis.matvec(x))
    return Subspace.span(F, u.ambient_dim, vecs)


def subspace_contains(u: Subspace, w: Subspace) -> bool:
    """True iff ``w`` is contained in ``u``."""
    _same_ambient(u, w)
    ech = u.echelon()
    return all(not r for r, _ in ech.reduce(w.vectors()))


def quotient_dim(u: Subspace, w: Subspace) -> int:
    """``dim((u + w) / w)``."""
    _same_ambient(u, w)
    return rank(u.basis.hstack(w.basis)) - w.dim


def subspace_ops(kind: str, u: Subspace, w: Subspace):
    if kind == "sum":
        return subspace_sum(u, w)
    if kind == "intersect":
        return subspace_intersect(u, w)
    if kind == "contains":
        return subspace_contains(u, w)
    if kind == "quotient_dim":
        return quotient_dim(u, w)
    raise ValueError(f"unknown subspace op {kind!r}")


class SpanSolver:
    """Repeated ``solve_in_span`` against one fixed basis."""

    def __init__(self, basis: Subspace):
        self.basis = basis
        self._ech = basis.echelon(tagged=True)

    def solve(self, vectors: Iterable[dict]) -> list[dict]:
        out = []
        for residual, combo in self._ech.reduce(list(vectors)):
            if residual:
                raise NotInSpanError(f"vector not in span ({len(residual)} residual entries)")
            out.append(combo)
        return out


def solve_in_span(basis: Subspace, v: dict) -> dict:
    """Coefficients ``c`` with ``basis @ c == v``; raises NotInSpanError otherwise."""
    return SpanSolver(basis).solve([v])[0]
