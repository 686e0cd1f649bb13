"""Command-line entry point.

Exit status: 0 success, 1 rejected certificate (or a failing verdict under
``--strict``), 2 usage error, 3 invalid input.
"""

from __future__ import annotations

import argparse
import difflib
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Sequence, TextIO

from . import __version__
from .analyses import consistency, fto, load_portfolio, load_sensitivity_input, sensitivity
from .certificate import canonical_serialize
from .claim_graph import ClaimDag, fraction_to_decimal, load_claim, parse_json, weight_scheme
from .coverage import coverage_report
from .doe import doe_analyze, load_doe_context
from .errors import SchemaError, ValidationError
from .lattice import discretize, format_bp, to_fraction
from .scoring import MatcherConfig, load_evidence, load_score_table, score_dag
from .verifier import verify_certificate

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INVALID = 0, 1, 2, 3


@dataclass
class RunConfig:
    theta: int = 6500
    threshold_cov: Fraction = Fraction(70)
    weights: Path | None = None
    fmt: str = "text"
    emit_cert: Path | None = None
    strict: bool = False


class _Style:
    def __init__(self, stream: TextIO) -> None:
        self.on = stream.isatty() and not os.environ.get("CLAIMLATTICE_NO_COLOR")

    def bold(self, s: str) -> str:
        return f"\033[1m{s}\033[0m" if self.on else s


def _read(path: Path) -> bytes:
    try:
        return path.read_bytes()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _theta(text: str) -> int:
    try:
        value = discretize(text)
    except ValidationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    if value == 0:
        raise argparse.ArgumentTypeError("theta must be positive")
    return int(value)


def _percent(text: str) -> Fraction:
    try:
        value = to_fraction(text)
    except ValidationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    if not 0 <= value <= 100:
        raise argparse.ArgumentTypeError("threshold must lie in [0, 100]")
    return value


def _load_dag(path: Path, weights: Path | None) -> ClaimDag:
    dag = load_claim(_read(path))
    if weights is None:
        return dag
    doc = parse_json(_read(weights), str(weights))
    if not isinstance(doc, dict):
        raise SchemaError("weights file must map node types to decimal strings")
    merged = {nt.value: w for nt, w in dag.weights.items()}
    merged.update(doc)
    return ClaimDag(dag.nodes, weight_scheme(merged))


def _emit(cfg: RunConfig, obj: Any, text: Callable[[], str], out: TextIO) -> None:
    if cfg.fmt == "json":
        out.write(json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
    else:
        out.write(text())


def _write_cert(cfg: RunConfig, cert: Any, err: TextIO) -> None:
    if cfg.emit_cert is not None and cert is not None:
        cfg.emit_cert.write_bytes(canonical_serialize(cert))
        err.write(f"certificate written to {cfg.emit_cert}\n")


# --- subcommands ---------------------------------------------------------


def _scores(args: argparse.Namespace, dag: ClaimDag) -> Any:
    if args.scores is not None:
        return load_score_table(_read(args.scores), dag)
    if args.evidence is not None:
        evidence = load_evidence(_read(args.evidence))
        return score_dag(dag, evidence, MatcherConfig.for_texts(dag, evidence))
    raise SchemaError("one of --scores or --evidence is required")


def cmd_analyze(args: argparse.Namespace, cfg: RunConfig, out: TextIO, err: TextIO) -> int:
    from .certificate import generate_certificate

    dag = _load_dag(args.claim, cfg.weights)
    scores = _scores(args, dag)
    alt = load_score_table(_read(args.alt_scores), dag) if args.alt_scores else None
    report = coverage_report(dag, scores, cfg.theta, alt_scores=alt)
    report["construction_id"] = scores.construction_id
    report["scores"] = {k: int(v) for k, v in scores.scores.items()}
    style = _Style(out)

    def text() -> str:
        lines = [style.bold(f"construction {scores.construction_id}  theta {format_bp(cfg.theta)}"),
                 f"{'node':<6} {'type':<13} {'weight':>6} {'beta':>6} {'eff':>6}"]
        for n in dag.nodes:
            lines.append(f"{n.id:<6} {n.node_type.value:<13} {fraction_to_decimal(dag.weight(n.id)):>6} "
                         f"{format_bp(scores[n.id]):>6} {format_bp(report['eff'][n.id]):>6}")
        lines.append(f"weighted coverage {report['coverage']['display']}")
        lines.append(f"flat coverage     {report['flat']['display']}")
        if alt is not None:
            lines.append(style.bold(f"waterfall {scores.construction_id} -> {alt.construction_id}"))
            for row in report["waterfall"]:
                lines.append(f"  {row['node']:<6} {row['kind']:<8} {row['display_pp']:>8} pp")
            lines.append(f"  total           {report['waterfall_total']['display_pp']:>8} pp")
        return "\n".join(lines) + "\n"

    _emit(cfg, report, text, out)
    if cfg.emit_cert:
        _write_cert(cfg, generate_certificate(dag, scores, cfg.theta), err)
    return EXIT_OK


def cmd_fto(args: argparse.Namespace, cfg: RunConfig, out: TextIO, err: TextIO) -> int:
    dag = _load_dag(args.claim, cfg.weights)
    result = fto(dag, _scores(args, dag), cfg.theta)

    def text() -> str:
        if result.clear:
            return (f"Clear: {result.node} scores {format_bp(result.beta or 0)} "
                    f"< theta {format_bp(result.theta)}\n")
        lines = ["Risk: every limitation meets theta (diagnostic ranking, not certified)"]
        for g in result.gaps:
            lines.append(f"  {g.node:<6} margin {g.margin:>6} bp  path {' -> '.join(g.path)}")
        return "\n".join(lines) + "\n"

    _emit(cfg, result.to_obj(), text, out)
    _write_cert(cfg, result.certificate, err)
    return EXIT_FAIL if (cfg.strict and not result.clear) else EXIT_OK


def cmd_sensitivity(args: argparse.Namespace, cfg: RunConfig, out: TextIO, err: TextIO) -> int:
    dag = _load_dag(args.claim, cfg.weights)
    base, alts, perts = load_sensitivity_input(_read(args.input), dag, args.input.parent)
    rep = sensitivity(dag, base, alts, perts, cfg.theta, cfg.threshold_cov)

    def text() -> str:
        lines = [f"{'construction':<28} {'coverage':>8}  satisfied"]
        for o in rep.constructions:
            lines.append(f"{o.construction_id:<28} {o.coverage.display:>8}  {'yes' if o.satisfied else 'no'}")
        for term, o in sorted(rep.perturbed.items()):
            lines.append(f"{'perturb: ' + term:<28} {o.coverage.display:>8}  {'yes' if o.satisfied else 'no'}")
        lines.append("determinative terms: " + (", ".join(rep.determinative) or "none"))
        for cid, nodes in rep.breakers.items():
            lines.append(f"breakers under {cid}: {', '.join(nodes)}")
        lines.append(f"threshold construction: {rep.threshold_construction or 'none'}")
        for term, node in rep.monotonicity_flags:
            lines.append(f"monotonicity flag: {term} raises {node}")
        return "\n".join(lines) + "\n"

    _emit(cfg, rep.to_obj(), text, out)
    return EXIT_OK


def cmd_consistency(args: argparse.Namespace, cfg: RunConfig, out: TextIO, err: TextIO) -> int:
    portfolio, vocabulary = load_portfolio(_read(args.portfolio), args.portfolio.parent)
    res = consistency(portfolio, vocabulary)

    def text() -> str:
        if res.consistent:
            return f"Consistent ({len(res.checked)} pair checks)\n"
        return (f"Inconsistent on {res.term!r} between {res.patent_i} and {res.patent_j}\n"
                f"  {res.patent_i}: {res.interp_i}\n  {res.patent_j}: {res.interp_j}\n")

    _emit(cfg, res.to_obj(), text, out)
    return EXIT_FAIL if (cfg.strict and not res.consistent) else EXIT_OK


def cmd_doe(args: argparse.Namespace, cfg: RunConfig, out: TextIO, err: TextIO) -> int:
    dag = _load_dag(args.claim, cfg.weights)
    if args.scores is None or args.evidence is None:
        raise SchemaError("doe needs --scores and --evidence")
    scores = load_score_table(_read(args.scores), dag)
    evidence = load_evidence(_read(args.evidence))
    rep = doe_analyze(dag, scores, evidence, load_doe_context(_read(args.context)))

    def text() -> str:
        lines = [f"{'node':<6} {'match':<11} {'beta':>6} {'eff_doe':>8}"]
        for nid, c in rep.classifications.items():
            lines.append(f"{nid:<6} {c.tag.value:<11} {format_bp(c.beta):>6} {format_bp(c.eff_doe):>8}")
        lines.append(f"DOE coverage      {rep.w_doe.display}")
        lines.append(f"literal coverage  {rep.literal_coverage.display}")
        return "\n".join(lines) + "\n"

    _emit(cfg, rep.to_obj(), text, out)
    _write_cert(cfg, rep.certificate, err)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, cfg: RunConfig, out: TextIO, err: TextIO) -> int:
    claim = _read(args.claim) if args.claim else None
    res = verify_certificate(_read(args.certificate), claim)
    obj = {"result": "Verified" if res.verified else "Rejected", "reason": res.reason, "locus": res.locus}
    _emit(cfg, obj, lambda: str(res) + "\n", out)
    return EXIT_OK if res.verified else EXIT_FAIL


# --- case study ----------------------------------------------------------


def _case_study_outputs(root: Path) -> dict[str, Any]:
    def claim(name: str) -> ClaimDag:
        return load_claim(_read(root / name))

    def table(name: str, dag: ClaimDag) -> Any:
        return load_score_table(_read(root / name), dag)

    out: dict[str, Any] = {}
    mem = claim("memory_module.claim.json")
    i1, i2 = table("memory_i1.scores.json", mem), table("memory_i2.scores.json", mem)
    out["memory_i1"] = coverage_report(mem, i1, 6500)
    out["memory_i2"] = coverage_report(mem, i2, 6500)
    out["memory_waterfall"] = coverage_report(mem, i1, 6500, alt_scores=i2)
    run = claim("running_example.claim.json")
    out["running_example"] = coverage_report(run, table("running_example.scores.json", run), 6500)
    base, alts, perts = load_sensitivity_input(_read(root / "memory_sensitivity.json"), mem, root)
    out["memory_sensitivity"] = sensitivity(mem, base, alts, perts, 6500, 70).to_obj()
    filt = claim("filter.claim.json")
    out["filter_fto"] = fto(filt, table("filter_fto.scores.json", filt), 6500).to_obj()
    ev = load_evidence(_read(root / "filter.evidence.json"))
    for name in ("failure", "contrast"):
        ctx = load_doe_context(_read(root / f"filter_doe_{name}.doe.json"))
        out[f"filter_doe_{name}"] = doe_analyze(filt, table("filter_doe.scores.json", filt), ev, ctx).to_obj()
    chain = claim("filter_chain.claim.json")
    out["filter_doe_chain"] = doe_analyze(chain, table("filter_chain.scores.json", chain), ev,
                                          load_doe_context(_read(root / "filter_chain.doe.json"))).to_obj()
    for name in ("portfolio", "portfolio_revised"):
        pf, vocab = load_portfolio(_read(root / f"{name}.json"), root)
        out[f"consistency_{name}"] = consistency(pf, vocab).to_obj()
    return out


def fixtures_dir() -> Path:
    return Path(str(resources.files("claimlattice") / "fixtures"))


def _pretty(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def cmd_case_study(args: argparse.Namespace, cfg: RunConfig, out: TextIO, err: TextIO) -> int:
    root = args.fixtures or fixtures_dir()
    golden = root / "golden"
    outputs = _case_study_outputs(root)
    diffs = 0
    for name, obj in outputs.items():
        path = golden / f"{name}.json"
        fresh = _pretty(obj)
        if args.update:
            golden.mkdir(parents=True, exist_ok=True)
            path.write_text(fresh, encoding="utf-8")
            out.write(f"wrote {name}\n")
            continue
        old = path.read_text(encoding="utf-8") if path.exists() else ""
        if old == fresh:
            out.write(f"ok    {name}\n")
            continue
        diffs += 1
        out.write(f"DIFF  {name}\n")
        out.writelines(difflib.unified_diff(old.splitlines(True), fresh.splitlines(True),
                                            f"golden/{name}.json", f"{name} (regenerated)"))
    out.write(f"{diffs} diff(s)\n")
    return EXIT_FAIL if diffs else EXIT_OK


# --- wiring --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--theta", type=_theta, default=6500, help="threshold as a decimal in (0, 1]; default 0.65")
    common.add_argument("--threshold-cov", type=_percent, default=Fraction(70), help="coverage threshold in percent")
    common.add_argument("--weights", type=Path, help="JSON map of node type to decimal weight")
    common.add_argument("--emit-cert", type=Path, help="write a certificate (.cert.json) here")
    common.add_argument("--format", choices=("json", "text"), default="text")
    common.add_argument("--strict", action="store_true", help="exit 1 on Risk or Inconsistent verdicts")

    parser = argparse.ArgumentParser(prog="claimlattice", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"claimlattice {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, fn: Callable[..., int], help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=fn)
        return p

    def claim_inputs(p: argparse.ArgumentParser) -> None:
        p.add_argument("--claim", type=Path, required=True)
        p.add_argument("--scores", type=Path)
        p.add_argument("--evidence", type=Path)

    p = add("analyze", cmd_analyze, "weighted coverage report")
    claim_inputs(p)
    p.add_argument("--alt-scores", type=Path, help="second construction for a waterfall")
    p = add("fto", cmd_fto, "freedom-to-operate check")
    claim_inputs(p)
    p = add("sensitivity", cmd_sensitivity, "construction sensitivity")
    p.add_argument("--claim", type=Path, required=True)
    p.add_argument("--input", type=Path, required=True, help="sensitivity input JSON")
    p = add("consistency", cmd_consistency, "cross-claim interpretation consistency")
    p.add_argument("--portfolio", type=Path, required=True)
    p = add("doe", cmd_doe, "doctrine-of-equivalents coverage")
    claim_inputs(p)
    p.add_argument("--context", type=Path, required=True, help="DOE context JSON")
    p = add("verify", cmd_verify, "check a certificate")
    p.add_argument("certificate", type=Path)
    p.add_argument("--claim", type=Path, help="claim file the certificate must match")
    p = add("case-study", cmd_case_study, "regenerate the bundled fixtures and diff against golden output")
    p.add_argument("--fixtures", type=Path, help="fixture directory (defaults to the bundled one)")
    p.add_argument("--update", action="store_true", help="overwrite golden files instead of diffing")
    return parser


def run(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    cfg = RunConfig(args.theta, args.threshold_cov, args.weights, args.format, args.emit_cert, args.strict)
    try:
        return args.func(args, cfg, out, err)
    except ValidationError as exc:
        err.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
