"""``inqmc`` command line: check, classify, oracle, bench.

Exit codes: 0 the formula holds, 1 it is violated, 2 input error or
fragment refusal, 3 the automata and oracle engines disagree.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from importlib import resources
from pathlib import Path
from typing import Optional

from .automata import BudgetExceeded, Checker, FragmentError, model_check, pipeline_alphabet
from .formula import FormulaSyntaxError, classify, parse, pretty
from .kripke import KripkeStructure, Lasso, StructureError, load_structure, mp_of_paths
from .oracle import (DEFAULT_TEAM_BOUND, FiniteTeam, OracleRefusal, describe_witness,
                     eval_macro_lasso, eval_team_finite, load_team, traces_of_structure)

EXIT_HOLDS, EXIT_VIOLATED, EXIT_ERROR, EXIT_DISAGREE = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.message = message


def corpus_dir() -> Path:
    return Path(str(resources.files("inqmc") / "corpus"))


def schema_path() -> Path:
    return Path(str(resources.files("inqmc") / "schema" / "verdict.schema.json"))


def _formula_text(args) -> str:
    if args.formula is not None and args.formula_file is not None:
        raise CliError("input", "give either --formula or --formula-file, not both")
    if args.formula is not None:
        return args.formula
    if args.formula_file is not None:
        try:
            return Path(args.formula_file).read_text(encoding="utf-8")
        except OSError as exc:
            raise CliError("input", f"cannot read formula file: {exc}") from None
    raise CliError("input", "a formula is required (--formula or --formula-file)")


def _structure(path) -> KripkeStructure:
    try:
        return load_structure(path)
    except OSError as exc:
        raise CliError("structure", f"cannot read {path}: {exc}") from None
    except StructureError as exc:
        raise CliError("structure", str(exc)) from None


def _parse(text: str, ap=None):
    try:
        return parse(text, ap)
    except FormulaSyntaxError as exc:
        raise CliError("parse", str(exc)) from None


# -- engines --------------------------------------------------------------------


def run_automata(K: KripkeStructure, phi, state_budget: Optional[int]) -> dict:
    try:
        v = model_check(K, phi, state_budget=state_budget)
    except FragmentError as exc:
        raise CliError("fragment", str(exc)) from None
    except BudgetExceeded as exc:
        raise CliError("automata", str(exc)) from None
    except ValueError as exc:
        raise CliError("automata", str(exc)) from None
    return {"holds": v.holds, "seconds": round(v.seconds, 6), "sizes": v.stats}


def run_oracle(K: KripkeStructure, phi, max_lasso: Optional[int]) -> dict:
    """Macro-path oracle on rho0, plus the team oracle when L(K) is finite."""
    team = None
    try:
        team = traces_of_structure(K, cap=DEFAULT_TEAM_BOUND)
    except OracleRefusal:
        if max_lasso is None:
            raise CliError("oracle", "structure has infinitely many initial paths; "
                                     "pass --max-lasso B for a bounded (advisory) verdict") from None
    start = time.perf_counter()
    out: dict = {}
    if team is not None:
        try:
            out["team_holds"] = eval_team_finite(team, phi)
            out["team_size"] = len(team)
        except OracleRefusal as exc:
            if max_lasso is None:
                raise CliError("oracle", str(exc)) from None
    rho0 = K.initial_macro_lasso()
    mv = eval_macro_lasso(K, rho0, phi, bound=max_lasso)
    out["macro_holds"] = mv.holds
    out["exhaustive"] = mv.exhaustive
    out["sub_lassos"] = mv.sub_lassos
    if mv.witness is not None:
        out["witness"] = describe_witness(K, mv.witness)
    out["seconds"] = round(time.perf_counter() - start, 6)
    if "team_holds" in out and out["team_holds"] != mv.holds and mv.exhaustive:
        out["internal_disagreement"] = True
    out["holds"] = out.get("team_holds", mv.holds)
    return out


# -- subcommands ----------------------------------------------------------------


def cmd_check(args) -> tuple[int, dict]:
    K = _structure(args.structure)
    text = _formula_text(args)
    phi = _parse(text, K.ap)
    report = classify(phi)
    result: dict = {"command": "check", "formula": pretty(phi), "structure": str(args.structure),
                    "engine": args.engine, "fragment": report.as_dict()}
    auto = orc = None
    if args.engine in ("automata", "both"):
        auto = run_automata(K, phi, args.state_budget)
        result["automata"] = auto if args.stats else {k: v for k, v in auto.items() if k != "sizes"}
    if args.engine in ("oracle", "both"):
        unknown = phi.atoms() - set(K.ap)
        if unknown:
            raise CliError("oracle", f"formula uses undeclared propositions {sorted(unknown)}")
        orc = run_oracle(K, phi, args.max_lasso)
        result["oracle"] = orc
    if auto is not None and orc is not None:
        exact = orc["exhaustive"] or "team_holds" in orc
        result["agree"] = auto["holds"] == orc["holds"]
        if not result["agree"] and exact:
            result["holds"] = auto["holds"]
            return EXIT_DISAGREE, result
    holds = auto["holds"] if auto is not None else orc["holds"]
    result["holds"] = holds
    if orc is not None and "witness" in orc:
        result["counterexample"] = orc["witness"]
    return (EXIT_HOLDS if holds else EXIT_VIOLATED), result


def cmd_classify(args) -> tuple[int, dict]:
    ap = args.ap.split(",") if args.ap else None
    phi = _parse(_formula_text(args), ap)
    report = classify(phi)
    return EXIT_HOLDS, {"command": "classify", "formula": pretty(phi),
                        "fragment": report.as_dict(), "summary": report.describe()}


def _read_paths(K: KripkeStructure, path) -> list[Lasso]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        out = []
        for p in doc["paths"]:
            stem = tuple(K.index(s) for s in p.get("stem", []))
            period = tuple(K.index(s) for s in p["period"])
            lasso = Lasso(stem, period)
            if not K.is_path_lasso(lasso):
                raise ValueError(f"not a path of the structure: {p}")
            out.append(lasso)
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise CliError("input", f"bad paths file: {exc}") from None
    return out


def cmd_oracle(args) -> tuple[int, dict]:
    text = _formula_text(args)
    result: dict = {"command": "oracle"}
    if args.team is not None:
        try:
            team = load_team(args.team)
        except (OSError, ValueError) as exc:
            raise CliError("input", f"bad team file: {exc}") from None
        phi = _parse(text, team.ap)
        result["formula"] = pretty(phi)
        try:
            holds = eval_team_finite(team, phi, bound=max(DEFAULT_TEAM_BOUND, len(team)))
        except OracleRefusal as exc:
            raise CliError("oracle", str(exc)) from None
        singles = [eval_team_finite(FiniteTeam(team.ap, (w,)), phi) for w in team.traces]
        result.update({"team_size": len(team), "team_holds": holds,
                       "singletons_hold": all(singles), "singleton_verdicts": singles,
                       "holds": holds})
        return (EXIT_HOLDS if holds else EXIT_VIOLATED), result
    if args.structure is None:
        raise CliError("input", "oracle needs --team or --structure")
    K = _structure(args.structure)
    phi = _parse(text, K.ap)
    result["formula"] = pretty(phi)
    if args.paths is not None:
        paths = _read_paths(K, args.paths)
        team = FiniteTeam.of(K.ap, [K.trace_of(p) for p in paths])
        try:
            team_holds = eval_team_finite(team, phi, bound=max(DEFAULT_TEAM_BOUND, len(team)))
        except OracleRefusal as exc:
            raise CliError("oracle", str(exc)) from None
        mv = eval_macro_lasso(K, mp_of_paths(K, paths), phi, bound=args.max_lasso)
        result.update({"team_holds": team_holds, "macro_holds": mv.holds,
                       "exhaustive": mv.exhaustive, "positive": classify(phi).is_positive,
                       "holds": team_holds})
        result["agree"] = team_holds == mv.holds
        if not result["agree"] and result["positive"]:
            return EXIT_DISAGREE, result
        return (EXIT_HOLDS if team_holds else EXIT_VIOLATED), result
    orc = run_oracle(K, phi, args.max_lasso)
    result.update(orc)
    if "team_holds" in orc:
        result["agree"] = orc["team_holds"] == orc["macro_holds"]
        if not result["agree"] and orc["exhaustive"]:
            return EXIT_DISAGREE, result
    return (EXIT_HOLDS if orc["holds"] else EXIT_VIOLATED), result


BENCH_FIELDS = ["name", "structure", "states", "formula", "k", "status", "holds", "expected",
                "seconds", "strata", "max_stage_states", "total_states"]


def bench_rows(directory: Path, state_budget: Optional[int] = None):
    manifest = json.loads((directory / "manifest.json").read_text(encoding="utf-8"))
    for inst in manifest["instances"]:
        if inst.get("oracle_only"):
            continue
        row = {"name": inst["name"], "structure": inst["structure"],
               "expected": inst.get("expected", "")}
        try:
            K = load_structure(directory / inst["structure"])
            text = inst.get("formula")
            if text is None:
                text = (directory / inst["formula_file"]).read_text(encoding="utf-8")
            phi = parse(text, K.ap)
            row.update(states=K.n, formula=pretty(phi), k=classify(phi).implication_depth)
            budget = inst.get("state_budget", state_budget)
            v = model_check(K, phi, state_budget=budget)
            sizes = [s for key, s in v.stats.items() if key != "compiled"]
            row.update(status="ok", holds=v.holds, seconds=round(v.seconds, 4),
                       strata=v.stats["compiled"]["strata"],
                       max_stage_states=max((s["max_states"] for s in sizes), default=0),
                       total_states=sum(s["total_states"] for s in sizes))
        except BudgetExceeded as exc:
            row.update(status="state budget exceeded", holds="", seconds="")
            row["detail"] = str(exc)
        except Exception as exc:  # noqa: BLE001 - one failing instance must not stop the run
            row.update(status=f"error: {exc}", holds="", seconds="")
        yield row


def cmd_bench(args) -> tuple[int, dict]:
    directory = Path(args.corpus) if args.corpus else corpus_dir()
    if not (directory / "manifest.json").exists():
        raise CliError("input", f"no manifest.json in {directory}")
    out = open(args.output, "w", newline="", encoding="utf-8") if args.output else sys.stdout
    rows = []
    try:
        writer = csv.DictWriter(out, fieldnames=BENCH_FIELDS, extrasaction="ignore")
        writer.writeheader()
        for row in bench_rows(directory, args.state_budget):
            writer.writerow(row)
            rows.append(row)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_HOLDS, {"command": "bench", "rows": rows}


# -- output ---------------------------------------------------------------------


def _human(result: dict) -> str:
    cmd = result.get("command")
    if cmd == "classify":
        return f"{result['formula']}: {result['summary']}"
    if cmd == "oracle" and "singletons_hold" in result:
        t = "|=" if result["team_holds"] else "|/="
        s = "|=" if result["singletons_hold"] else "|/="
        return f"team {t} phi; singletons {s} phi   (phi = {result['formula']})"
    lines = []
    if cmd == "oracle":
        if "team_holds" in result:
            lines.append(f"team verdict:  {'holds' if result['team_holds'] else 'violated'}")
        if "macro_holds" in result:
            tag = "" if result.get("exhaustive", True) else " (advisory)"
            lines.append(f"macro verdict: {'holds' if result['macro_holds'] else 'violated'}{tag}")
        if "agree" in result:
            lines.append(f"agreement:     {'yes' if result['agree'] else 'NO'}")
        return "\n".join(lines)
    lines.append(f"{result['formula']}: {'holds' if result['holds'] else 'violated'}")
    frag = result["fragment"]
    kind = "positive" if frag["positive"] else "left-positive" if frag["left_positive"] else "other"
    lines.append(f"  fragment: {kind}, k={frag['implication_depth']}")
    if "automata" in result:
        a = result["automata"]
        lines.append(f"  automata: {'holds' if a['holds'] else 'violated'} in {a['seconds']:.3f}s")
        for stage, s in a.get("sizes", {}).items():
            if stage == "compiled":
                lines.append(f"    compiled: {s['strata']} strata, {s['states']} states touched")
            else:
                lines.append(f"    {stage}: {s['count']} automata, max {s['max_states']} states")
    if "oracle" in result:
        o = result["oracle"]
        tag = "exact" if o["exhaustive"] or "team_holds" in o else "advisory"
        lines.append(f"  oracle:   {'holds' if o['holds'] else 'violated'} ({tag})")
    if "counterexample" in result:
        lines.append(f"  violating sub-macro-path: {result['counterexample']}")
    if result.get("agree") is False:
        lines.append("  ENGINES DISAGREE")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="inqmc", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def formula_opts(p):
        p.add_argument("--formula", help="formula text")
        p.add_argument("--formula-file", help="file containing the formula")
        p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("check", help="model check a formula against a structure")
    p.add_argument("--structure", required=True)
    formula_opts(p)
    p.add_argument("--engine", choices=["automata", "oracle", "both"], default="automata")
    p.add_argument("--max-lasso", type=int, default=None, metavar="B",
                   help="bound on sub-macro-lasso length for the oracle")
    p.add_argument("--state-budget", type=int, default=None, metavar="N",
                   help="automaton states allowed per stage (default: $INQMC_STATE_BUDGET or 5000000)")
    p.add_argument("--stats", action="store_true", help="report automaton sizes per stage")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("classify", help="report the fragment and implication depth")
    formula_opts(p)
    p.add_argument("--ap", help="comma-separated propositions (needed for card1)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("oracle", help="brute-force team / macro-path semantics")
    p.add_argument("--structure")
    p.add_argument("--team", help="team file (finite set of trace lassos)")
    p.add_argument("--paths", help="finite path family of --structure; compares team and mp(paths)")
    formula_opts(p)
    p.add_argument("--max-lasso", type=int, default=None, metavar="B")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", help="time the automata pipeline on a corpus")
    p.add_argument("corpus", nargs="?", help="directory with manifest.json (default: bundled corpus)")
    p.add_argument("--output", help="CSV file (default: stdout)")
    p.add_argument("--state-budget", type=int, default=None, metavar="N")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code, result = args.func(args)
    except CliError as exc:
        if getattr(args, "json", False):
            print(json.dumps({"command": args.command, "error": exc.message, "stage": exc.stage}))
        else:
            print(f"error [{exc.stage}]: {exc.message}", file=sys.stderr)
        return EXIT_ERROR
    if args.command == "bench":
        return code
    if args.json:
        print(json.dumps(result, indent=2, sort_keys=True))
    else:
        print(_human(result))
    return code


if __name__ == "__main__":
    sys.exit(main())
