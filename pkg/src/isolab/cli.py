"""Scenario runner.

A scenario is a JSON object::

    {
      "id": "identity_m2",
      "source_algebra": {"kind": "matrix", "n": 2},
      "target_algebra": {"kind": "matrix", "n": 2},
      "map": {"kind": "identity", ...map parameters...},
      "checks": ["validate", "self_check", "extension", ...],
      "expect": {"extension": "ExtendsAsTheorem", ...},
      "tolerances": {"extension": 1e-8, ...},
      "seed": 0
    }

Algebra kinds are ``matrix`` (``n``), ``function`` (``k``), ``dame_A``,
``dame_B`` (optional ``norm``) and ``custom`` (``dim``, flat row-major
``structure_constants``, ``unit``, optional ``norm_rule``, ``embedding``,
``connected``).  Complex numbers are ``[re, im]`` pairs.

Optional per-check inputs: ``pairs`` (explicit multiplicativity pairs, each a
pair of coordinate lists), ``segment`` (``{"f": ..., "g": ...}`` for the
midpoint check), ``comsem`` (``{"a_commutative": .., "b_semisimple": ..}``),
``classify`` (``{"samples": ..}``), ``samples`` (sample counts per check).

A check whose computation raises a verdict error records the error name as
its verdict.  Exit status is 0 iff every check matches ``expect``; checks with
no expectation must reach their passing verdict.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .algebra import (
    Element,
    associativity_residual,
    commutativity_residual,
    norm_coords,
    unit_residual,
)
from .catalog import (
    FORMS,
    ScenarioSpec,
    apply_form,
    build_algebra,
    make_map,
    random_invertible,
    self_check_map,
)
from .classify import (
    check_multiplicativity,
    classify_matrix_isometry,
    comsem_pipeline,
    group_iso_extension_pipeline,
    normalize_gauge,
)
from .engine import (
    extend_isometry,
    midpoint_check,
    numrange_step_residual,
    sample_domain,
)
from .errors import (
    AlgebraValidationError,
    FixtureSelfCheckFailed,
    IsolabError,
    ParseError,
    UnknownCheck,
    VerdictError,
)
from .radical import dickson_radical, numerical_radius_many, radical_test_spectral
from .serialize import decode_complex_array, dumps
from .spectral import principal_sampler

PASS_VERDICTS = {
    "validate": {"Valid"},
    "self_check": {"Isometric"},
    "extension": {"ExtendsAsTheorem"},
    "multiplicativity": {"Multiplicative", "AntiMultiplicative", "Both"},
    "midpoint": {"MidpointPreserved"},
    "radical": {"Agree"},
    "numrange": {"Consistent"},
    "group_iso": {"IsometricAlgebraIsomorphism"},
    "comsem": {"ConclusionsHold"},
    "classify": set(FORMS),
}
CHECKS = tuple(PASS_VERDICTS)
DEFAULT_TOL = {
    "self_check": 1e-9, "extension": 1e-8, "multiplicativity": 1e-8, "midpoint": 1e-9,
    "numrange": 1e-6, "group_iso": 1e-8, "comsem": 1e-8, "classify": 1e-8,
}
REQUIRED = ("source_algebra", "target_algebra", "map", "checks")


# ---------------------------------------------------------------------------
# parsing

def parse_scenario(text: str, source: str = "<scenario>") -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ParseError(f"{source}: top level must be an object")
    for key in REQUIRED:
        if key not in data:
            raise ParseError(f"{source}: missing key {key!r}")
    if not isinstance(data["checks"], list) or not all(isinstance(c, str) for c in data["checks"]):
        raise ParseError(f"{source}: 'checks' must be a list of names")
    if not isinstance(data["map"], dict) or "kind" not in data["map"]:
        raise ParseError(f"{source}: 'map' must be an object with a 'kind'")
    for name in data["checks"]:
        if name not in CHECKS:
            raise UnknownCheck(f"{source}: unknown check {name!r} (known: {', '.join(CHECKS)})")
    if len(set(data["checks"])) != len(data["checks"]):
        raise ParseError(f"{source}: duplicate check names")
    for key in ("expect", "tolerances"):
        if not isinstance(data.get(key, {}), dict):
            raise ParseError(f"{source}: {key!r} must be an object")
    data.setdefault("id", Path(source).stem)
    return data


def load_scenario(path) -> dict:
    path = Path(path)
    return parse_scenario(path.read_text(), str(path))


def to_spec(data: dict, seed: int | None = None) -> ScenarioSpec:
    params = {k: v for k, v in data["map"].items() if k != "kind"}
    return ScenarioSpec(
        source_algebra=data["source_algebra"], target_algebra=data["target_algebra"],
        map_kind=data["map"]["kind"], map_params=params, checks=list(data["checks"]),
        tolerances=dict(data.get("tolerances", {})),
        seed=int(data.get("seed", 0) if seed is None else seed),
        expect=dict(data.get("expect", {})), scenario_id=str(data["id"]),
        extra={k: v for k, v in data.items() if k not in REQUIRED + ("id", "expect", "tolerances", "seed")},
    )


# ---------------------------------------------------------------------------
# checks

@dataclass
class CheckRecord:
    name: str
    verdict: str
    expected: str | None
    residuals: dict = field(default_factory=dict)
    witness: dict | None = None
    message: str | None = None

    @property
    def ok(self) -> bool:
        if self.expected is not None:
            return self.verdict == self.expected
        return self.verdict in PASS_VERDICTS[self.name]

    def as_dict(self) -> dict:
        return {"name": self.name, "verdict": self.verdict, "expected": self.expected,
                "ok": self.ok, "residuals": self.residuals, "witness": self.witness,
                "message": self.message}


class _Context:
    def __init__(self, spec: ScenarioSpec):
        self.spec = spec
        try:
            self.source = build_algebra(spec.source_algebra)
            self.target = (self.source if spec.target_algebra == spec.source_algebra
                           else build_algebra(spec.target_algebra))
        except AlgebraValidationError as exc:
            raise FixtureSelfCheckFailed(f"{spec.scenario_id}: algebra rejected: "
                                         f"{type(exc).__name__}: {exc}") from exc
        self.T = make_map(spec, verify_pairs=0)
        self.audit = self_check_map(self.T, self.samples("self_check", 1000), spec.seed,
                                    tol=self.tol("self_check"))
        self._ext = None

    def tol(self, name):
        return float(self.spec.tolerances.get(name, DEFAULT_TOL.get(name, 1e-8)))

    def samples(self, name, default):
        return int(self.spec.extra.get("samples", {}).get(name, default))

    def extension(self):
        if self._ext is None:
            self._ext = extend_isometry(self.T, samples=self.samples("extension", 200),
                                        seed=self.spec.seed, tol=self.tol("extension"))
        return self._ext

    def element(self, algebra, coords):
        return Element(algebra, decode_complex_array(coords))


def _check_validate(ctx):
    res, notes = {}, []
    for side, alg in (("source", ctx.source), ("target", ctx.target)):
        res[f"{side}_associativity"] = associativity_residual(alg.structure_constants)[0]
        res[f"{side}_unit"] = unit_residual(alg.structure_constants, alg.unit_coords)
        res[f"{side}_commutativity"] = commutativity_residual(alg)
        res[f"{side}_radical_dim"] = dickson_radical(alg).dim_radical
        notes += [f"{alg.name}: {n}" for n in alg.notes]
    return "Valid", res, None, "; ".join(dict.fromkeys(notes)) or None


def _check_self(ctx):
    audit = ctx.audit
    ok = audit["isometry_defect"] <= ctx.tol("self_check") and audit["range_misses"] == 0
    w = audit["witness"]
    witness = None if w is None else {"a": w[0], "b": w[1]}
    res = {k: audit[k] for k in ("isometry_defect", "range_misses", "inverse_defect")}
    return ("Isometric" if ok else "NotIsometric"), res, witness, None


def _check_extension(ctx):
    _, rep = ctx.extension()
    res = dict(rep.residuals())
    res["complex_linear"] = rep.complex_linear
    res["conjugate_linear"] = rep.conjugate_linear
    res["u0"] = rep.u0
    return rep.verdict, res, rep.witness, rep.domain_violation


def _check_mult(ctx):
    S = ctx.source
    explicit = [(ctx.element(S, a), ctx.element(S, b)) for a, b in ctx.spec.extra.get("pairs", [])]
    rep = check_multiplicativity(ctx.T, pairs=ctx.samples("multiplicativity", 200),
                                 seed=ctx.spec.seed, tol=ctx.tol("multiplicativity"),
                                 explicit_pairs=explicit)
    witness = {}
    if rep.mult_witness:
        witness["mult"] = {"a": rep.mult_witness[0], "b": rep.mult_witness[1]}
    if rep.antimult_witness:
        witness["antimult"] = {"a": rep.antimult_witness[0], "b": rep.antimult_witness[1]}
    return rep.verdict, {"mult_residual": rep.mult_residual,
                         "antimult_residual": rep.antimult_residual,
                         "pairs": rep.pairs}, witness, None


def _check_midpoint(ctx):
    seg = ctx.spec.extra.get("segment")
    S = ctx.source
    if seg is not None:
        segments = [(ctx.element(S, seg["f"]), ctx.element(S, seg["g"]))]
    else:
        rng = np.random.default_rng(ctx.spec.seed)
        segments = []
        while len(segments) < ctx.samples("midpoint", 100):
            f = sample_domain(ctx.T.domain, S, rng)
            g = f + S.random_element(rng, 0.1)
            segments.append((f, g))
    worst, wit = 0.0, None
    for f, g in segments:
        r = midpoint_check(ctx.T, f, g)
        if wit is None or r > worst:
            worst, wit = r, {"f": f, "g": g}
    verdict = "MidpointPreserved" if worst <= ctx.tol("midpoint") else "MidpointBroken"
    return verdict, {"midpoint_residual": worst, "segments": len(segments)}, wit, None


def _check_radical(ctx):
    res = {}
    rng = np.random.default_rng(ctx.spec.seed)
    algebras = {ctx.source.name: ctx.source, ctx.target.name: ctx.target}
    for alg in algebras.values():
        rad = dickson_radical(alg)
        res[f"{alg.name}_radical_dim"] = rad.dim_radical
        sampler = principal_sampler(alg, rng)
        count = ctx.samples("radical", 10)
        for k in range(count):
            a = rad.random_element(rng) if (k % 2 == 0 and rad.dim_radical) else alg.random_element(rng)
            verdict = radical_test_spectral(a, sampler, trials=500)
            if verdict.consistent != rad.contains(a):
                return "Disagree", res, {"a": a, "b": verdict.witness}, None
    return "Agree", res, None, None


def _check_numrange(ctx):
    rng = np.random.default_rng(ctx.spec.seed)
    S = ctx.source
    X = np.array([S.random_element(rng).coords for _ in range(ctx.samples("numrange", 100))])
    ratio = float(np.max(norm_coords(S, X) / numerical_radius_many(S, X)))
    res = {"max_norm_over_numerical_radius": ratio}
    ok = ratio <= np.e + 1e-6
    cand, rep = ctx.extension()
    if rep.extends:
        step = numrange_step_residual(cand, ctx.T, samples=20, seed=ctx.spec.seed)
        res["step_sup_im"] = step
        ok = ok and step <= ctx.tol("numrange")
    return ("Consistent" if ok else "Inconsistent"), res, None, None


def _pipeline_result(rep):
    res = {k: v for k, (_, v) in rep.checks.items()}
    res.update({f"{k}_ok": ok for k, (ok, _) in rep.checks.items()})
    return rep.verdict, res, None, None


def _check_group_iso(ctx):
    return _pipeline_result(group_iso_extension_pipeline(
        ctx.T, pairs=ctx.samples("group_iso", 200), seed=ctx.spec.seed, tol=ctx.tol("group_iso")))


def _check_comsem(ctx):
    flags = ctx.spec.extra.get("comsem", {})
    return _pipeline_result(comsem_pipeline(
        ctx.T, bool(flags.get("a_commutative", True)), bool(flags.get("b_semisimple", True)),
        pairs=ctx.samples("comsem", 200), seed=ctx.spec.seed, tol=ctx.tol("comsem")))


def _check_classify(ctx):
    n = int(round(np.sqrt(ctx.source.dim)))
    opts = ctx.spec.extra.get("classify", {})
    res = classify_matrix_isometry(ctx.T, n, samples=opts.get("samples"), seed=ctx.spec.seed,
                                   tol=ctx.tol("classify"))
    out = {"residual": res.residual, **{f"residual_{k}": v for k, v in res.residuals.items()}}
    if res.U is not None:
        out["U"] = res.U
        out["condition"] = res.condition
    out["scale"] = res.scale
    return res.form, out, None, None


RUNNERS = {
    "validate": _check_validate, "self_check": _check_self, "extension": _check_extension,
    "multiplicativity": _check_mult, "midpoint": _check_midpoint, "radical": _check_radical,
    "numrange": _check_numrange, "group_iso": _check_group_iso, "comsem": _check_comsem,
    "classify": _check_classify,
}


def run_scenario(data: dict, seed: int | None = None, deterministic: bool = False) -> dict:
    """Execute the checks of a parsed scenario in order; returns the report dict."""
    start = time.perf_counter()
    spec = to_spec(data, seed)
    ctx = _Context(spec)
    records = []
    for name in spec.checks:
        expected = spec.expect.get(name)
        try:
            verdict, res, witness, message = RUNNERS[name](ctx)
        except VerdictError as exc:
            verdict, res, witness, message = type(exc).__name__, {}, exc.witness or None, str(exc)
        records.append(CheckRecord(name, verdict, expected, res, witness, message))
    wall = None if deterministic else round((time.perf_counter() - start) * 1000.0, 3)
    return {
        "scenario_id": spec.scenario_id,
        "seed": spec.seed,
        "tolerances": {name: ctx.tol(name) for name in spec.checks if name in DEFAULT_TOL},
        "checks": [r.as_dict() for r in records],
        "ok": all(r.ok for r in records),
        "wall_time_ms": wall,
    }


# ---------------------------------------------------------------------------
# selftest

def shipped_scenarios() -> list[Path]:
    root = resources.files("isolab") / "scenarios"
    return sorted(Path(str(p)) for p in root.iterdir() if p.name.endswith(".json"))


def property_suite(seed: int) -> list[dict]:
    """Quick module-level properties run alongside the shipped scenarios."""
    from .catalog import make_dame_pair, make_matrix_algebra, matrix_to_element
    from .radical import numerical_radius, sup_im_numrange

    rng = np.random.default_rng(seed)
    M2 = make_matrix_algebra(2)
    A, B = make_dame_pair()
    out = []

    def record(name, value, ok):
        out.append({"name": name, "value": value, "ok": bool(ok)})

    v = sup_im_numrange(matrix_to_element(M2, np.diag([1j, 0])))
    record("sup_im_numrange(diag(i,0)) = 1", v, abs(v - 1) <= 1e-6)
    v = numerical_radius(matrix_to_element(M2, [[0, 1], [0, 0]]))
    record("numerical_radius(E12) = 1/2", v, abs(v - 0.5) <= 1e-6)
    dims = [dickson_radical(A).dim_radical, dickson_radical(B).dim_radical]
    record("dame radical dimensions", dims, dims == [3, 3])
    worst = 0.0
    for form in FORMS:
        U = random_invertible(2, rng)
        Ui = np.linalg.inv(U)
        res = classify_matrix_isometry(lambda M: U @ apply_form(M, form) @ Ui, 2, seed=seed)
        if res.form != form:
            worst = np.inf
            break
        worst = max(worst, float(np.linalg.norm(res.U - normalize_gauge(U))))
    record("four-form round trip (n=2)", worst, worst <= 1e-6)
    return out


def selftest(seed: int | None = None, directory=None, deterministic: bool = False) -> dict:
    start = time.perf_counter()
    paths = sorted(Path(directory).glob("*.json")) if directory else shipped_scenarios()
    reports = [run_scenario(load_scenario(p), seed=seed, deterministic=deterministic) for p in paths]
    props = property_suite(0 if seed is None else seed)
    wall = None if deterministic else round((time.perf_counter() - start) * 1000.0, 3)
    return {
        "seed": seed,
        "scenarios": reports,
        "properties": props,
        "ok": all(r["ok"] for r in reports) and all(p["ok"] for p in props),
        "wall_time_ms": wall,
    }


# ---------------------------------------------------------------------------
# output

def _headline(check: dict) -> float | None:
    """The one residual shown for a check in the summary table."""
    r, name, verdict = check["residuals"], check["name"], check["verdict"]
    if not r:
        return None
    if name == "validate":
        return max(r["source_associativity"], r["target_associativity"],
                   r["source_unit"], r["target_unit"])
    if name == "self_check":
        return r["isometry_defect"]
    if name == "extension":
        return max(r["additivity"], r["homogeneity"], r["isometry"], r["agreement"])
    if name == "multiplicativity":
        if verdict == "AntiMultiplicative":
            return r["antimult_residual"]
        if verdict == "Neither":
            return min(r["mult_residual"], r["antimult_residual"])
        return r["mult_residual"]
    if name == "midpoint":
        return r["midpoint_residual"]
    if name == "numrange":
        return r.get("step_sup_im")
    if name in ("group_iso", "comsem"):
        vals = [v for k, v in r.items() if not k.endswith("_ok")]
        return max(vals) if vals else None
    if name == "classify":
        return r["residual"]
    return None


def summary_table(reports: list[dict]) -> str:
    head = f"{'scenario':<28} {'check':<17} {'verdict':<28} {'expected':<28} {'ok':<4} {'residual':>12}"
    lines = [head, "-" * len(head)]
    for rep in reports:
        for c in rep["checks"]:
            mr = _headline(c)
            mr_s = "" if mr is None else f"{mr:12.3e}"
            lines.append(f"{rep['scenario_id']:<28.28} {c['name']:<17} {c['verdict']:<28.28} "
                         f"{(c['expected'] or '-'):<28.28} {'yes' if c['ok'] else 'NO':<4} {mr_s:>12}")
    return "\n".join(lines)


def _write_report(obj, path):
    text = dumps(obj)
    if path:
        Path(path).write_text(text)
    return text


def _cmd_run(args) -> int:
    report = run_scenario(load_scenario(args.path), seed=args.seed, deterministic=args.deterministic)
    print(summary_table([report]))
    _write_report(report, args.report)
    return 0 if report["ok"] else 1


def _cmd_selftest(args) -> int:
    report = selftest(seed=args.seed, directory=args.scenarios, deterministic=args.deterministic)
    print(summary_table(report["scenarios"]))
    print()
    for p in report["properties"]:
        print(f"{'property':<28} {p['name']:<46} {'yes' if p['ok'] else 'NO'}")
    _write_report(report, args.report)
    return 0 if report["ok"] else 1


def _cmd_classify(args) -> int:
    rng = np.random.default_rng(args.seed)
    U = random_invertible(args.n, rng)
    Ui = np.linalg.inv(U)
    res = classify_matrix_isometry(lambda M: U @ apply_form(M, args.form) @ Ui, args.n,
                                   samples=args.samples, seed=args.seed)
    print(f"generated form   {args.form}")
    print(f"recovered form   {res.form}")
    for k, v in res.residuals.items():
        print(f"  residual {k:<22} {v:.3e}")
    if res.U is not None:
        err = float(np.linalg.norm(res.U - normalize_gauge(U)))
        print(f"U relative error {err:.3e}")
        print(f"U condition      {res.condition:.3e}")
    return 0 if res.form == args.form else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="isolab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one scenario file")
    p.add_argument("path")
    p.add_argument("--report", help="write the JSON report here")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--deterministic", action="store_true",
                   help="write wall_time_ms as null so reports are byte-identical")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("selftest", help="run the shipped scenarios and quick properties")
    p.add_argument("--report", help="write the JSON report here")
    p.add_argument("--seed", type=int, help="seed used for every scenario")
    p.add_argument("--scenarios", help="directory of scenario files (default: shipped set)")
    p.add_argument("--deterministic", action="store_true",
                   help="write wall_time_ms as null so reports are byte-identical")
    p.set_defaults(func=_cmd_selftest)

    p = sub.add_parser("classify", help="generate a matrix isometry and classify it")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=int)
    p.add_argument("--form", choices=FORMS, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_classify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except IsolabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
