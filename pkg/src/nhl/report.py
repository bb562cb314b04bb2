"""Orchestration of the command-line runs and deterministic report documents."""

from __future__ import annotations

import json
import resource
import time
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import __version__
from .algebra import AlgebraSpec, load_algebra
from .checks import CheckReport
from .complexes import COMPLEX_NAMES, CONVENTIONS, AlgebraContext, check_action_compatibility, check_d_squared, homology
from .errors import FieldError, HypothesisError, MemoryCapError, NotInSpanError, ParseError
from .induced import CorepPair, check_corep_axioms, corep_extended_adjoint, gamma_subalgebra
from .linalg import Field, rank
from .sequences import assemble_les, ladder_check, verify_exactness
from .spectral import binary_degeneracy_check, build_filtration, lie_vanishing_check, page_dims, verify_page_formulas

COMMANDS = ("check", "homology", "les", "ss", "report")
CHECK_LEVELS = ("fast", "full", "certify")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_PARSE = 2
EXIT_HYPOTHESIS = 3
EXIT_MEMORY = 4

# homology table label per complex
THEORY_LABELS = {
    "leibniz": "HL(g;g)",
    "lie": "HLie(g;g)",
    "wedge_tensor": "HL(L;D)",
    "wedge_trivial": "HL(L;k)",
    "wedge_mixed": "HL(L;g⊗D)",
}


@dataclass
class RunConfig:
    command: str
    path: str | None = None
    max_degree: int = 2
    field: str | None = None
    check_level: str = "full"
    output: str | None = None
    fmt: str = "json"
    dump_actions: bool = False
    workers: int = 1
    timings: bool = False
    allow_small_dimension: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.max_degree < 0:
            raise ValueError("max degree must be nonnegative")
        if self.check_level not in CHECK_LEVELS:
            raise ValueError(f"unknown check level {self.check_level!r}")
        if self.fmt not in ("json", "text"):
            raise ValueError(f"unknown format {self.fmt!r}")


def jsonable(obj):
    """Plain JSON value: tuples become lists, fractions become strings, keys become strings."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, Fraction):
        return str(obj) if obj.denominator != 1 else str(obj.numerator)
    if isinstance(obj, float):
        return repr(obj)
    if isinstance(obj, dict):
        return {_key(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    return str(obj)


def _key(k) -> str:
    if isinstance(k, tuple):
        return ",".join(str(x) for x in k)
    return str(k)


def check_dict(rep: CheckReport) -> dict:
    return jsonable(rep.sort().to_dict(fmt=jsonable))


def empty_report() -> dict:
    return {"tool": {"name": "nhl", "version": __version__}}


class Run:
    """State of one run: the document being assembled and the check outcomes."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.doc = empty_report()
        self.doc["config"] = {
            "command": config.command,
            "max_degree": config.max_degree,
            "field": config.field,
            "check_level": config.check_level,
            "dump_actions": config.dump_actions,
            "allow_small_dimension": config.allow_small_dimension,
        }
        self.checks: dict[str, CheckReport] = {}
        self.refused: dict[str, str] = {}
        self.timings: dict[str, float] = {}

    def record(self, name: str, rep: CheckReport):
        self.checks[name] = rep

    @contextmanager
    def timed(self, name: str):
        start = time.perf_counter()
        yield
        self.timings[name] = round(time.perf_counter() - start, 3)

    def outcome(self, exit_code: int | None = None) -> int:
        failed = sorted(name for name, rep in self.checks.items() if not rep.passed)
        if exit_code is None:
            exit_code = EXIT_CHECK_FAILED if failed else EXIT_OK
        self.doc["checks"] = {name: check_dict(rep) for name, rep in sorted(self.checks.items())}
        if self.refused:
            self.doc["refused"] = dict(sorted(self.refused.items()))
        self.doc["outcome"] = {"passed": not failed and exit_code == EXIT_OK, "failed_checks": failed,
                               "exit_code": exit_code}
        if self.config.timings:
            self.doc["timings"] = dict(sorted(self.timings.items()))
            self.doc["peak_memory_kb"] = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
        return exit_code


# ---------------------------------------------------------------------------
# sections


def _classify(a: AlgebraSpec) -> str:
    if not a.is_leibniz:
        return "not_leibniz"
    if a.n == 2:
        return "binary_leibniz"
    return "filippov" if a.is_filippov else "leibniz"


def convention_log(ctx: AlgebraContext, K: int) -> dict:
    """Which sign conventions survive the arbiter checks on this algebra."""
    log = {}
    trial = min(K, 1)
    passed = {conv: check_d_squared(ctx.complex("leibniz", trial, convention=conv)).passed for conv in CONVENTIONS}
    log["boundary"] = {"selected": ctx.convention, "d_squared_passes": passed}
    axioms = {variant: check_corep_axioms(corep_extended_adjoint(ctx.a, ctx.tensor, right=variant)).passed
              for variant in ("negated", "literal")}
    log["extended_adjoint_right_action"] = {"selected": "negated", "axioms_pass": axioms}
    log["projection_signs"] = {"lie": "+1", "trivial": "(-1)^m", "mixed": "(-1)^m", "to_mixed": "(-1)^(m-1)"}
    log["degree_labels"] = {
        "relative": "relative degree = chain degree - 1",
        "gamma": "HD_m = chain degree m; the displayed sequence index is m - 1",
    }
    return log


def corep_pairs(ctx: AlgebraContext) -> dict[str, CorepPair]:
    pairs = {"adjoint": ctx.adjoint, "extended_adjoint": ctx.extended_adjoint}
    if ctx.has_wedge:
        pairs["adjoint_wedge"] = ctx.adjoint_wedge
        pairs["tensor_over_wedge"] = ctx.tensor_over_wedge
        pairs["tensor_over_wedge_symmetric"] = ctx.tensor_over_wedge.symmetric_companion()
        for key, pair in ctx.quotient_actions.items():
            pairs[f"quotient_{key}"] = pair
    return pairs


def _gamma_closure(ctx: AlgebraContext) -> CheckReport:
    rep = CheckReport("gamma_closed_under_product")
    rep.tick()
    try:
        rep.notes["gamma_dim"] = gamma_subalgebra(ctx.a, ctx.tensor).dim
    except NotInSpanError:
        rep.add(("product",), expected="inside Γ", got="leaves Γ")
    return rep


def section_check(run: Run, a: AlgebraSpec, ctx: AlgebraContext | None):
    run.record("fundamental_identity", a.identity_report)
    if ctx is None:
        run.refused["representations"] = "bracket does not satisfy the fundamental identity"
        return
    run.record("tensor_algebra_leibniz", ctx.tensor.check_leibniz())
    if ctx.has_wedge:
        run.record("wedge_algebra_leibniz", ctx.wedge.check_leibniz())
        run.record("gamma_closed_under_product", _gamma_closure(ctx))
    else:
        run.refused["wedge_structures"] = "bracket is not antisymmetric"
    for name, pair in corep_pairs(ctx).items():
        run.record(f"corep_axioms[{name}]", check_corep_axioms(pair))


def _available_complexes(ctx: AlgebraContext) -> list[str]:
    return list(COMPLEX_NAMES) if ctx.has_wedge else ["leibniz"]


def section_homology(run: Run, ctx: AlgebraContext, K: int) -> dict:
    out = {}
    level = run.config.check_level
    for which in _available_complexes(ctx):
        cx = ctx.complex(which, K)
        run.record(f"d_squared[{which}]", check_d_squared(cx))
        out[which] = {"label": THEORY_LABELS[which], "chain_dims": cx.dims[:K + 1],
                      "betti": homology(cx, K).betti}
    if ctx.has_wedge:
        for which, label in (("relative", "Hrel"), ("gamma", "HD"), ("mixed_kernel", "H(ker)")):
            sub = ctx.kernel_subcomplex(which, K)
            run.record(f"subcomplex_closed[{which}]", sub.check_closure())
            run.record(f"d_squared[{which}]", check_d_squared(sub.complex))
            table = homology(sub, K)
            out[which] = {"label": label, "degree_shift": sub.shift,
                          "chain_dims": [sub.dim(m) for m in range(K + 1)],
                          "betti": table.relative_betti()}
    else:
        run.refused["wedge_homology"] = "bracket is not antisymmetric"
    if level != "fast":
        rep = check_action_compatibility(ctx, K)
        run.record("action_compatibility", rep)
        run.doc.setdefault("conventions", {})["recursion_sign"] = rep.notes.get("recursion_sign")
    return out


def _les_dict(table) -> dict:
    nodes = [{"label": nd.label, "alt_label": nd.alt_label, "theory": nd.theory, "chain_degree": nd.degree,
              "dim": nd.dim} for nd in table.nodes]
    maps = [{"kind": mp.kind, "source": table.nodes[mp.source].label, "target": table.nodes[mp.target].label,
             "rank": rank(mp.matrix)} for mp in table.maps]
    return {"nodes": nodes, "maps": maps, "relabeling": table.relabeling}


def section_les(run: Run, ctx: AlgebraContext, K: int) -> dict:
    ctx.a.require_leibniz()
    ctx.require_wedge()
    out = {}
    for which in ("relative", "gamma"):
        table = assemble_les(which, ctx, K)
        run.record(f"les_exact[{which}]", verify_exactness(table))
        for key, rep in table.extra_checks.items():
            run.record(f"les_{key}[{which}]", rep)
        out[which] = _les_dict(table)
    if run.config.check_level != "fast":
        run.record("ladder", ladder_check(ctx, K))
    return out


def section_ss(run: Run, ctx: AlgebraContext, K: int) -> dict:
    a = ctx.a
    strict = not run.config.allow_small_dimension
    if a.n == 2:
        rep = binary_degeneracy_check(a, K, ctx)
        run.record("binary_degeneracy", rep)
        return {"binary": True, "gamma_dim": rep.notes["gamma_dim"]}
    rep = verify_page_formulas(a, K, ctx, strict_dimension=strict, workers=run.config.workers)
    run.record("page_formulas", rep)
    cor = lie_vanishing_check(a, K, ctx, strict_dimension=strict)
    run.record("lie_vanishing", cor)
    out = {"pages": rep.notes.get("pages", {}), "expected": rep.notes.get("expected", {}),
           "lie_vanishing_branch": cor.notes["branch"]}
    if rep.notes.get("warnings"):
        out["warnings"] = rep.notes["warnings"]
    out["notation"] = "HD and HR denote the same homology (of the Γ-coefficient complex)"
    return out


def section_actions(ctx: AlgebraContext) -> dict:
    F = ctx.field
    out = {}
    for name, pair in corep_pairs(ctx).items():
        out[name] = {
            "coef_dim": pair.coef_dim,
            "algebra_dim": pair.algebra.dim,
            "left": [[[r, c, F.to_str(v)] for r, c, v in sorted(m.triplets())] for m in pair.left],
            "right": [[[r, c, F.to_str(v)] for r, c, v in sorted(m.triplets())] for m in pair.right],
        }
    return out


def _certify(run: Run, a: AlgebraSpec, K: int, numbers: dict):
    """Recompute Betti numbers and page dimensions over ℚ and compare."""
    rep = CheckReport("rational_agreement")
    if not a.field.is_prime:
        rep.skipped.append("input already rational")
        run.record("rational_agreement", rep)
        return
    q = AlgebraContext(a.with_field(Field.rational()))
    for which, entry in numbers.get("homology", {}).items():
        if which in COMPLEX_NAMES:
            got = homology(q.complex(which, K), K).betti
        else:
            got = homology(q.kernel_subcomplex(which, K), K).relative_betti()
        rep.tick()
        if got != entry["betti"]:
            rep.add(("homology", which), expected=entry["betti"], got=got)
    pages = numbers.get("spectral", {}).get("pages")
    if pages and K >= 1:
        f = build_filtration(q.a, K - 1, q, strict_dimension=False)
        got = page_dims(f)
        for p, tab in pages.items():
            rep.tick()
            if got.table(p) != tab:
                rep.add(("pages", p), expected=tab, got=got.table(p))
    run.record("rational_agreement", rep)


def run(config: RunConfig, algebra: AlgebraSpec | None = None) -> tuple[int, dict]:
    """Execute one command; returns (exit status, report document)."""
    r = Run(config)
    try:
        if algebra is None:
            if config.path is None:
                raise ParseError("no input file given", "")
            try:
                raw = Path(config.path).read_bytes()
            except OSError as exc:
                raise ParseError(f"cannot read input: {exc.strerror}", "") from exc
            algebra = load_algebra(raw)
        if config.field:
            algebra = algebra.with_field(Field.parse(config.field))
    except ParseError as exc:
        r.doc["error"] = {"kind": "parse", "message": exc.reason, "path": exc.path}
        return r.outcome(EXIT_PARSE), r.doc
    except FieldError as exc:
        r.doc["error"] = {"kind": "parse", "message": str(exc), "path": "--field"}
        return r.outcome(EXIT_PARSE), r.doc

    a = algebra
    K = config.max_degree
    ctx = AlgebraContext(a, workers=config.workers) if a.is_leibniz else None
    r.doc["algebra"] = {"name": a.name, "n": a.n, "dim": a.dim, "field": a.field.spec(),
                        "fingerprint": a.fingerprint, "class": _classify(a)}
    cmd = config.command
    everything = cmd == "report"
    try:
        if a.is_leibniz:
            with r.timed("conventions"):
                r.doc["conventions"] = convention_log(ctx, K)
        if cmd in ("check", "report"):
            with r.timed("check"):
                section_check(r, a, ctx)
        if cmd in ("homology", "report"):
            a.require_leibniz()
            with r.timed("homology"):
                r.doc["homology"] = section_homology(r, ctx, K)
        for name, section in (("les", section_les), ("ss", section_ss)):
            if cmd == name or everything:
                try:
                    a.require_leibniz()
                    with r.timed(name):
                        result = section(r, ctx, K)
                    r.doc["spectral" if name == "ss" else "les"] = result
                except HypothesisError as exc:
                    if not everything:
                        raise
                    r.refused[name] = str(exc)
        if config.check_level == "certify" and cmd in ("homology", "ss", "report"):
            with r.timed("certify"):
                _certify(r, a, K, r.doc)
        if config.dump_actions and a.is_leibniz:
            r.doc["actions"] = section_actions(ctx)
    except HypothesisError as exc:
        r.doc["error"] = {"kind": "hypothesis", "message": str(exc)}
        return r.outcome(EXIT_HYPOTHESIS), r.doc
    except MemoryCapError as exc:
        r.doc["error"] = {"kind": "memory", "message": str(exc)}
        return r.outcome(EXIT_MEMORY), r.doc
    return r.outcome(), r.doc


# ---------------------------------------------------------------------------
# output


def emit_report(doc: dict, fmt: str = "json") -> bytes:
    if fmt == "json":
        return (json.dumps(jsonable(doc), sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode()
    if fmt == "text":
        return render_text(jsonable(doc)).encode()
    raise ValueError(f"unknown format {fmt!r}")


def _table(rows: list[list[str]]) -> list[str]:
    if not rows:
        return []
    widths = [max(len(row[i]) if i < len(row) else 0 for row in rows) for i in range(max(map(len, rows)))]
    return ["  ".join(cell.ljust(widths[i]) if i == 0 else cell.rjust(widths[i]) for i, cell in enumerate(row)).rstrip()
            for row in rows]


def render_text(doc: dict) -> str:
    lines = [f"{doc['tool']['name']} {doc['tool']['version']}"]
    alg = doc.get("algebra")
    if alg:
        lines.append(f"algebra {alg['name']}  n={alg['n']} dim={alg['dim']}  class={alg['class']}  "
                     f"fingerprint={alg['fingerprint']}")
    if "error" in doc:
        lines.append(f"error ({doc['error']['kind']}): {doc['error']['message']}")
    hom = doc.get("homology")
    if hom:
        lines.append("")
        lines.append("homology (Betti numbers by degree)")
        K = max(len(v["betti"]) for v in hom.values())
        rows = [["theory"] + [str(k) for k in range(K)]]
        for name, v in hom.items():
            rows.append([v["label"]] + [str(b) for b in v["betti"]])
        lines.extend(_table(rows))
    les = doc.get("les")
    if les:
        for name, t in les.items():
            lines.append("")
            lines.append(f"long exact sequence [{name}]")
            rows = [["node", "dim", "out", "rank"]]
            outgoing = {m["source"]: m for m in t["maps"]}
            for nd in t["nodes"]:
                m = outgoing.get(nd["label"])
                rows.append([nd["label"], str(nd["dim"]), m["kind"] if m else "", str(m["rank"]) if m else ""])
            lines.extend(_table(rows))
    ss = doc.get("spectral")
    if ss and "pages" in ss:
        for page, tab in ss["pages"].items():
            lines.append("")
            lines.append(f"page E^{page} (rows s, columns r)")
            rows = [["s\\r"] + [str(r) for r in range(len(tab[0]) if tab else 0)]]
            for s, row in enumerate(tab):
                rows.append([str(s)] + [str(v) for v in row])
            lines.extend(_table(rows))
    checks = doc.get("checks")
    if checks:
        lines.append("")
        lines.append("checks")
        rows = []
        for name, c in checks.items():
            status = "pass" if c["passed"] else f"FAIL ({c['violation_count']})"
            rows.append([name, status, f"{c['checked']} checked"])
        lines.extend(_table(rows))
        for name, c in checks.items():
            for v in c["violations"][:5]:
                lines.append(f"  {name}: at {', '.join(v['where'])}: expected {v['expected']}, got {v['got']}")
    for name, reason in doc.get("refused", {}).items():
        lines.append(f"refused {name}: {reason}")
    out = doc.get("outcome")
    if out:
        lines.append("")
        lines.append(f"outcome: {'passed' if out['passed'] else 'failed'} (exit {out['exit_code']})")
    return "\n".join(lines) + "\n"
