"""Leibniz n-algebras given by structure constants.

An algebra of dimension ``d`` and arity ``n`` stores, for each basis tuple
``(i1, ..., in)`` with a nonzero bracket, the sparse vector
``[e_i1, ..., e_in]``.  Indices are 0-based.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import random
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Mapping, Sequence

from .checks import CheckReport
from .errors import FieldError, HypothesisError, ParseError, ShapeError
from .linalg import DEFAULT_PRIME, Field, vec_axpy, vec_clean


def perm_sign(seq: Sequence) -> int:
    """Sign of the permutation sorting ``seq`` (entries assumed distinct)."""
    s = 1
    seq = list(seq)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                s = -s
    return s


def sort_with_sign(word: Sequence[int]):
    """``(sorted_word, sign)``, or ``(None, 0)`` when an index repeats."""
    if len(set(word)) < len(word):
        return None, 0
    return tuple(sorted(word)), perm_sign(word)


@dataclass(frozen=True, eq=False)
class AlgebraSpec:
    name: str
    n: int
    dim: int
    field: Field
    constants: Mapping[tuple, dict] = dc_field(default_factory=dict)

    def __post_init__(self):
        if self.n < 2:
            raise ShapeError(f"arity must be at least 2, got {self.n}")
        if self.dim < 1:
            raise ShapeError(f"dimension must be at least 1, got {self.dim}")
        clean = {}
        for args, vec in self.constants.items():
            args = tuple(args)
            if len(args) != self.n or not all(0 <= i < self.dim for i in args):
                raise ShapeError(f"bad bracket arguments {args}")
            if any(not 0 <= j < self.dim for j in vec):
                raise ShapeError(f"bracket value of {args} out of range")
            v = vec_clean(self.field, {j: self.field(c) for j, c in vec.items()})
            if v:
                clean[args] = v
        object.__setattr__(self, "constants", clean)

    def __eq__(self, other):
        return (
            isinstance(other, AlgebraSpec)
            and (self.n, self.dim, self.field) == (other.n, other.dim, other.field)
            and self.constants == other.constants
        )

    def __hash__(self):
        return hash(self.fingerprint)

    def __repr__(self):
        return f"AlgebraSpec({self.name!r}, n={self.n}, dim={self.dim}, {self.field!r}, nnz={len(self.constants)})"

    def bracket(self, args: Sequence[int]) -> dict:
        """Bracket of basis vectors; the returned dict must not be mutated."""
        return self.constants.get(tuple(args), {})

    @property
    def is_abelian(self) -> bool:
        return not self.constants

    @cached_property
    def identity_report(self) -> CheckReport:
        return check_fundamental_identity(self)

    @cached_property
    def filippov_report(self) -> CheckReport:
        return check_filippov(self)

    @property
    def is_leibniz(self) -> bool:
        return self.identity_report.passed

    @property
    def is_filippov(self) -> bool:
        return self.is_leibniz and self.filippov_report.passed

    def require_leibniz(self):
        if not self.is_leibniz:
            raise HypothesisError(f"{self.name}: bracket violates the fundamental identity")

    def require_filippov(self):
        self.require_leibniz()
        if not self.filippov_report.passed:
            raise HypothesisError(f"{self.name}: bracket is not antisymmetric (not a Filippov algebra)")

    def with_field(self, field: Field) -> "AlgebraSpec":
        """Same constants read in another field (constants must be representable)."""
        src = self.field
        consts = {}
        for args, vec in self.constants.items():
            consts[args] = {j: field(_as_fraction(src, c)) for j, c in vec.items()}
        return AlgebraSpec(self.name, self.n, self.dim, field, consts)

    def renamed(self, name: str) -> "AlgebraSpec":
        return AlgebraSpec(name, self.n, self.dim, self.field, self.constants)

    @cached_property
    def fingerprint(self) -> str:
        return hashlib.sha256(serialize(self).encode()).hexdigest()[:16]


def _as_fraction(field: Field, c):
    """Rational value of a stored constant; prime residues use the symmetric lift."""
    from fractions import Fraction

    if field.p is None:
        return Fraction(c)
    return Fraction(field.to_str(c))


# ---------------------------------------------------------------------------
# evaluation and checks


def bracket_eval(a: AlgebraSpec, *vectors: dict) -> dict:
    """Multilinear bracket of ``n`` sparse vectors."""
    if len(vectors) != a.n:
        raise ShapeError(f"expected {a.n} arguments, got {len(vectors)}")
    for v in vectors:
        if any(not 0 <= k < a.dim for k in v):
            raise ShapeError("vector index out of range")
    F = a.field
    out: dict = {}
    for combo in itertools.product(*(sorted(v.items()) for v in vectors)):
        args = tuple(k for k, _ in combo)
        val = a.bracket(args)
        if not val:
            continue
        coef = F.one
        for _, c in combo:
            coef = F.mul(coef, c)
        vec_axpy(F, out, coef, val)
    return out


def check_fundamental_identity(a: AlgebraSpec) -> CheckReport:
    """Fundamental identity on all basis tuples (x_1..x_n; y_1..y_{n-1})."""
    F = a.field
    rep = CheckReport("fundamental_identity")
    d, n = a.dim, a.n
    if a.is_abelian:
        rep.tick(d ** (2 * n - 1))
        return rep
    # tuples whose bracket is nonzero, grouped by last n-1 arguments
    for ys in itertools.product(range(d), repeat=n - 1):
        right = {x: a.bracket((x,) + ys) for x in range(d)}
        for xs in itertools.product(range(d), repeat=n):
            rep.tick()
            lhs: dict = {}
            for j, c in a.bracket(xs).items():
                vec_axpy(F, lhs, c, right[j])
            rhs: dict = {}
            for i, x in enumerate(xs):
                for j, c in right[x].items():
                    args = xs[:i] + (j,) + xs[i + 1:]
                    vec_axpy(F, rhs, c, a.bracket(args))
            if lhs != rhs:
                rep.add(xs + ys, expected=rhs, got=lhs)
    return rep.sort()


def check_filippov(a: AlgebraSpec) -> CheckReport:
    """Antisymmetry under adjacent swaps plus vanishing on repeated arguments."""
    F = a.field
    rep = CheckReport("antisymmetry")
    for args in itertools.product(range(a.dim), repeat=a.n):
        val = a.bracket(args)
        if len(set(args)) < len(args):
            rep.tick()
            if val:
                rep.add(args, expected={}, got=val)
        for i in range(a.n - 1):
            if args[i] >= args[i + 1]:
                continue
            rep.tick()
            swapped = args[:i] + (args[i + 1], args[i]) + args[i + 2:]
            neg = {j: F.neg(c) for j, c in a.bracket(swapped).items()}
            if val != neg:
                rep.add((args, swapped), expected=neg, got=val)
    return rep.sort()


# ---------------------------------------------------------------------------
# built-in algebras


def abelian(d: int, n: int, field: Field | None = None) -> AlgebraSpec:
    return AlgebraSpec(f"abelian({d},{n})", n, d, field or Field.prime(DEFAULT_PRIME), {})


def _simple_constants(n: int, signs: Sequence[int]) -> dict:
    d = n + 1
    consts = {}
    for i in range(d):
        rest = [j for j in range(d) if j != i]
        for perm in itertools.permutations(rest):
            consts[perm] = {i: signs[i] * perm_sign(perm)}
    return consts


def simple_filippov(n: int, field: Field | None = None) -> AlgebraSpec:
    """The (n+1)-dimensional simple n-Lie algebra.

    ``[e_0, .., ê_i, .., e_n] = s_i e_i`` on increasing arguments; the sign
    vector ``s`` is the first (in lexicographic order over {+1, -1}) for
    which the fundamental identity holds.
    """
    if n < 2:
        raise ShapeError("arity must be at least 2")
    field = field or Field.prime(DEFAULT_PRIME)
    for signs in itertools.product((1, -1), repeat=n + 1):
        alg = AlgebraSpec(f"simple_filippov({n})", n, n + 1, field, _simple_constants(n, signs))
        if alg.is_filippov:
            return alg
    raise HypothesisError(f"no sign vector gives a simple {n}-Lie algebra")  # pragma: no cover


def solvable_filippov(field: Field | None = None) -> AlgebraSpec:
    """3-dimensional 3-Lie algebra with [e_0, e_1, e_2] = e_0."""
    consts = {p: {0: perm_sign(p)} for p in itertools.permutations(range(3))}
    return AlgebraSpec("solvable_filippov", 3, 3, field or Field.prime(DEFAULT_PRIME), consts)


def direct_sum(a: AlgebraSpec, b: AlgebraSpec) -> AlgebraSpec:
    if a.n != b.n or a.field != b.field:
        raise ShapeError("direct sum needs equal arity and field")
    consts = dict(a.constants)
    off = a.dim
    for args, vec in b.constants.items():
        consts[tuple(i + off for i in args)] = {j + off: c for j, c in vec.items()}
    return AlgebraSpec(f"direct_sum({a.name},{b.name})", a.n, a.dim + b.dim, a.field, consts)


def find_non_filippov(d: int = 3, n: int = 3, field: Field | None = None) -> AlgebraSpec:
    """First single-constant algebra (lexicographic search) satisfying the
    fundamental identity but not antisymmetry."""
    field = field or Field.prime(DEFAULT_PRIME)
    for args in itertools.product(range(d), repeat=n):
        for j in range(d):
            alg = AlgebraSpec(f"non_filippov({d},{n})", n, d, field, {args: {j: 1}})
            if alg.is_leibniz and not alg.filippov_report.passed:
                return alg
    raise HypothesisError("no single-constant non-Filippov algebra found")  # pragma: no cover


def random_leibniz(d: int = 3, seed: int = 0, field: Field | None = None, max_terms: int = 3) -> AlgebraSpec:
    """Seeded search for a non-antisymmetric binary Leibniz algebra with small constants."""
    field = field or Field.prime(DEFAULT_PRIME)
    rng = random.Random(seed)
    pairs = list(itertools.product(range(d), repeat=2))
    for _ in range(200000):
        consts: dict = {}
        for _ in range(rng.randint(2, max_terms)):
            args = rng.choice(pairs)
            consts.setdefault(args, {})[rng.randrange(d)] = rng.choice((1, -1, 2))
        alg = AlgebraSpec(f"random_leibniz({d},{seed})", 2, d, field, consts)
        if alg.constants and alg.is_leibniz and not alg.filippov_report.passed:
            return alg
    raise HypothesisError("random search found no Leibniz algebra")  # pragma: no cover


def builtin_algebra(kind: str, *params, field: Field | None = None) -> AlgebraSpec:
    """Dispatch by name: ``abelian(d, n)``, ``simple_filippov(n)``, ``direct_sum(a, b)``,
    ``solvable_filippov()``, ``non_filippov(d, n)``, ``random_leibniz(d, seed)``."""
    if kind == "abelian":
        return abelian(*params, field=field)
    if kind == "simple_filippov":
        return simple_filippov(*params, field=field)
    if kind == "direct_sum":
        return direct_sum(*params)
    if kind == "solvable_filippov":
        return solvable_filippov(field=field)
    if kind == "non_filippov":
        return find_non_filippov(*params, field=field)
    if kind == "random_leibniz":
        return random_leibniz(*params, field=field)
    raise ValueError(f"unknown builtin algebra {kind!r}")


def corpus(field: Field | None = None) -> dict[str, AlgebraSpec]:
    """The test corpus, keyed by file stem."""
    field = field or Field.prime(DEFAULT_PRIME)
    solv = solvable_filippov(field)
    return {
        "abelian_2_3": abelian(2, 3, field),
        "abelian_3_3": abelian(3, 3, field),
        "abelian_4_3": abelian(4, 3, field),
        "simple_filippov_3": simple_filippov(3, field),
        "abelian_1_plus_2": direct_sum(abelian(1, 3, field), abelian(2, 3, field)),
        "solvable_3": solv,
        "solvable_plus_abelian_1": direct_sum(solv, abelian(1, 3, field)),
        "non_filippov_3": find_non_filippov(3, 3, field),
        "leibniz_binary_3": random_leibniz(3, 0, field),
    }


# ---------------------------------------------------------------------------
# file format


def _fail(path, msg):
    raise ParseError(msg, path)


def _parse_int(value, path, lo=None, hi=None):
    if not isinstance(value, int) or isinstance(value, bool):
        _fail(path, f"expected an integer, got {value!r}")
    if (lo is not None and value < lo) or (hi is not None and value >= hi):
        _fail(path, f"{value} out of range")
    return value


def load_algebra(document: bytes | str) -> AlgebraSpec:
    """Parse a JSON algebra document; raises ParseError with a field path."""
    try:
        doc = json.loads(document)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        _fail("", "top level must be an object")
    for key in ("name", "n", "dim", "field", "brackets"):
        if key not in doc:
            _fail(key, "missing field")
    name = doc["name"]
    if not isinstance(name, str):
        _fail("name", "expected a string")
    n = _parse_int(doc["n"], "n", lo=2)
    d = _parse_int(doc["dim"], "dim", lo=1)
    fspec = doc["field"]
    if not isinstance(fspec, dict):
        _fail("field", "expected an object")
    try:
        field = Field.from_spec(fspec)
    except FieldError as exc:
        raise ParseError(str(exc), "field") from exc
    skew = doc.get("skew_complete", False)
    if not isinstance(skew, bool):
        _fail("skew_complete", "expected a boolean")
    brackets = doc["brackets"]
    if not isinstance(brackets, list):
        _fail("brackets", "expected a list")

    consts: dict = {}
    for k, entry in enumerate(brackets):
        path = f"brackets[{k}]"
        if not isinstance(entry, dict) or "args" not in entry or "value" not in entry:
            _fail(path, "expected an object with 'args' and 'value'")
        args = entry["args"]
        if not isinstance(args, list) or len(args) != n:
            _fail(f"{path}.args", f"expected a list of {n} indices")
        args = tuple(_parse_int(i, f"{path}.args[{t}]", 0, d) for t, i in enumerate(args))
        if skew and any(args[t] >= args[t + 1] for t in range(n - 1)):
            _fail(f"{path}.args", "skew_complete documents list strictly increasing tuples only")
        if args in consts:
            _fail(f"{path}.args", f"duplicate tuple {list(args)}")
        value = entry["value"]
        if not isinstance(value, list):
            _fail(f"{path}.value", "expected a list of [index, coefficient] pairs")
        vec: dict = {}
        for t, pair in enumerate(value):
            vpath = f"{path}.value[{t}]"
            if not isinstance(pair, list) or len(pair) != 2:
                _fail(vpath, "expected [index, coefficient]")
            j = _parse_int(pair[0], vpath, 0, d)
            if j in vec:
                _fail(vpath, f"duplicate index {j}")
            coef = pair[1]
            if not isinstance(coef, (str, int)) or isinstance(coef, bool):
                _fail(vpath, "coefficient must be a fraction string")
            try:
                vec[j] = field(coef)
            except FieldError as exc:
                raise ParseError(str(exc), vpath) from exc
        consts[args] = vec

    if skew:
        full = {}
        for args, vec in consts.items():
            for perm in itertools.permutations(range(n)):
                permuted = tuple(args[i] for i in perm)
                s = perm_sign(perm)
                full[permuted] = {j: field.mul(s, c) for j, c in vec.items()}
        consts = full
    return AlgebraSpec(name, n, d, field, consts)


def serialize(a: AlgebraSpec) -> str:
    """Canonical JSON with every nonzero tuple listed explicitly."""
    F = a.field
    doc = {
        "name": a.name,
        "n": a.n,
        "dim": a.dim,
        "field": F.spec(),
        "skew_complete": False,
        "brackets": [
            {"args": list(args), "value": [[j, F.to_str(c)] for j, c in sorted(vec.items())]}
            for args, vec in sorted(a.constants.items())
        ],
    }
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"
