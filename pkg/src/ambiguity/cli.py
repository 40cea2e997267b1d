"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 invalid input, 3 negative verdict
(``verify`` mismatch, violated ``bound``, or a failed ``cycle`` precondition).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import domains as dom
from .cycle import REJECT_RULES, TOL_CONFLICT, iterate_cycle, run_cycle
from .errors import InvalidInput, VerdictFailure
from .explanations import (
    Factorization,
    check_inequivalence_condition,
    explain_all_in_measurement,
    explain_all_in_state,
    explain_sqrt,
    verify_explains,
)
from .measures import (
    EPS_EQ,
    EPS_NORM,
    induced_partition,
    marginalize,
    metdev_ppm,
    uniform_metric_ppm,
)
from .qkd import bb84_build, bb84_insecure_alternative, bb84_security_floor
from .quantum import (
    check_density,
    helstrom_error,
    helstrom_povm,
    results_bound_check,
    success_value,
    trace_distance,
    trace_rule,
)
from .sampling import random_binary_povm
from .serialization import (
    assignment_from_json,
    assignment_to_json,
    domain_from_json,
    domain_to_json,
    dumps,
    explanation_from_json,
    explanation_to_json,
    load,
    matrix_from_json,
    matrix_to_json,
    measure_from_json,
    measure_to_json,
    partition_to_json,
)

SEED_ENV = "AMBIGUITY_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    verb: str
    fmt: str
    out: str | None
    seed: int
    eps_eq: float
    eps_norm: float
    tol_conflict: float
    tol: float
    args: argparse.Namespace

    def __post_init__(self):
        for name in ("eps_eq", "eps_norm", "tol_conflict", "tol"):
            if not getattr(self, name) > 0:
                raise UsageError(f"--{name.replace('_', '-')} must be positive")


def _resolve_seed(flag: int | None) -> int:
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return 0


def parse_setting(text: str) -> dom.Assignment:
    """``name=label,name=label`` or a JSON object."""
    text = text.strip()
    if text.startswith("{"):
        try:
            return assignment_from_json(json.loads(text))
        except json.JSONDecodeError as exc:
            raise InvalidInput(f"bad setting {text!r}: {exc}") from None
    if not text:
        return dom.Assignment({})
    pairs = {}
    for part in text.split(","):
        if "=" not in part:
            raise InvalidInput(f"bad setting {text!r}: expected name=label pairs")
        name, label = part.split("=", 1)
        pairs[name.strip()] = label.strip()
    return dom.Assignment(pairs)


def _names(text: str | None) -> list[str]:
    return [n.strip() for n in text.split(",") if n.strip()] if text else []


# -- verbs -------------------------------------------------------------------


def cmd_lattice(cfg: RunConfig):
    a = domain_from_json(load(cfg.args.a))
    b = domain_from_json(load(cfg.args.b))
    op = cfg.args.op
    if type(a) is not type(b):
        raise InvalidInput("both operands must be knob domains or both detector domains")
    if op == "leq":
        return {"leq": dom.leq(a, b)}, 0
    fn = {"join": dom.join, "meet": dom.meet, "diff": dom.diff}[op]
    return domain_to_json(fn(a, b)), 0


def cmd_metdev(cfg: RunConfig):
    mu1 = measure_from_json(load(cfg.args.mu1), cfg.eps_norm)
    mu2 = measure_from_json(load(cfg.args.mu2), cfg.eps_norm)
    report = {"metdev": metdev_ppm(mu1, mu2)}
    if mu1.detector_domain == mu2.detector_domain:
        report["uniformMetric"] = uniform_metric_ppm(mu1, mu2)
    return report, 0


def cmd_topology(cfg: RunConfig):
    mu = measure_from_json(load(cfg.args.mu), cfg.eps_norm)
    fold = None
    if cfg.args.fold:
        fold = dom.KnobDomain(mu.knob_domain.factor(n) for n in _names(cfg.args.fold))
    part = induced_partition(mu, cfg.eps_eq, fold=fold)
    report = partition_to_json(part)
    report["classCount"] = len(part)
    report["injective"] = len(part) == part.domain.size
    return report, 0


def cmd_marginalize(cfg: RunConfig):
    mu = measure_from_json(load(cfg.args.mu), cfg.eps_norm)
    return measure_to_json(marginalize(mu, _names(cfg.args.drop))), 0


def cmd_explain(cfg: RunConfig):
    mu = measure_from_json(load(cfg.args.mu), cfg.eps_norm)
    method = cfg.args.method
    if method == "measurement":
        e = explain_all_in_measurement(mu)
    elif method == "sqrt":
        e = explain_sqrt(mu)
    else:
        fact = None
        if cfg.args.state_knobs:
            fact = Factorization.from_names(mu.knob_domain, _names(cfg.args.state_knobs))
        e = explain_all_in_state(mu, fact, cfg.eps_eq)
    return explanation_to_json(e), 0


def cmd_verify(cfg: RunConfig):
    e = explanation_from_json(load(cfg.args.expl))
    mu = measure_from_json(load(cfg.args.mu), cfg.eps_norm)
    rep = verify_explains(e, mu, cfg.tol)
    report = {
        "explains": rep.ok,
        "tolerance": cfg.tol,
        "deviation": rep.deviation,
        "maxEntryGap": rep.max_entry_gap,
        "argmax": {"setting": assignment_to_json(rep.setting), "atom": assignment_to_json(rep.atom)},
    }
    return report, 0 if rep.ok else 3


def cmd_check_prop47(cfg: RunConfig):
    mu = measure_from_json(load(cfg.args.mu), cfg.eps_norm)
    fact = Factorization.from_names(mu.knob_domain, _names(cfg.args.state_knobs))
    verdict = check_inequivalence_condition(mu, fact, cfg.eps_eq)
    return _verdict_json(verdict), 0


def _verdict_json(verdict) -> dict:
    return {
        "possible": verdict.possible,
        "witness": None if verdict.witness is None else [assignment_to_json(k) for k in verdict.witness],
        "witnessDistance": verdict.witness_distance,
    }


def cmd_trace_rule(cfg: RunConfig):
    e = explanation_from_json(load(cfg.args.expl))
    return measure_to_json(trace_rule(e)), 0


def cmd_helstrom(cfg: RunConfig):
    r1 = check_density(matrix_from_json(load(cfg.args.rho1)))
    r2 = check_density(matrix_from_json(load(cfg.args.rho2)))
    e_plus, e_minus = helstrom_povm(r1, r2)
    td = trace_distance(r1, r2)
    best = success_value(e_plus, e_minus, r1, r2)
    rng = np.random.default_rng(cfg.seed)
    sampled = max(
        (success_value(*random_binary_povm(r1.shape[0], rng), r1, r2) for _ in range(cfg.args.samples)),
        default=float("-inf"),
    )
    report = {
        "traceDistance": td,
        "helstromError": helstrom_error(r1, r2),
        "successValue": best,
        "Eplus": matrix_to_json(e_plus),
        "Eminus": matrix_to_json(e_minus),
        "randomCheck": {
            "seed": cfg.seed,
            "samples": cfg.args.samples,
            "bestSampledValue": sampled if cfg.args.samples else None,
            "exceeded": bool(cfg.args.samples and sampled > best + 1e-9),
        },
    }
    return report, 0


def cmd_bound(cfg: RunConfig):
    e = explanation_from_json(load(cfg.args.expl))
    if cfg.args.pair:
        pairs = [tuple(parse_setting(p) for p in cfg.args.pair)]
    else:
        elems = e.knob_domain.elements()
        pairs = [(elems[i], elems[j]) for i in range(len(elems)) for j in range(i + 1, len(elems))]
    rows = []
    for k1, k2 in pairs:
        chk = results_bound_check(e, k1, k2, cfg.args.slack)
        rows.append(
            {
                "k1": assignment_to_json(k1),
                "k2": assignment_to_json(k2),
                "lhs": chk.lhs,
                "rhs": chk.rhs,
                "holds": chk.holds,
                "method": chk.method,
            }
        )
    ok = all(r["holds"] for r in rows)
    return {"holds": ok, "slack": cfg.args.slack, "pairs": rows}, 0 if ok else 3


def _cycle_json(report) -> dict:
    def side(s):
        return {
            "traceDistance": s.distance,
            "envelopeExact": s.envelope_exact,
            "envelopeGap": s.envelope_gap,
            "helstromAtomGap": s.helstrom_atom_gap,
            "helstromEventGap": s.helstrom_event_gap,
        }

    return {
        "pair": [assignment_to_json(k) for k in report.pair],
        "D": report.D,
        "DPrime": report.D_prime,
        "gap": report.gap,
        "metdev": report.metdev,
        "conflict": report.conflict,
        "tolConflict": report.tol_conflict,
        "settings": {"base": report.extended.base.size, "extended": report.extended.full.size},
        "extendedDomain": domain_to_json(report.extended.full),
        "first": side(report.first),
        "second": side(report.second),
        "notes": report.notes,
        "muHat": measure_to_json(report.mu_hat),
        "muHatPrime": measure_to_json(report.mu_hat_prime),
    }


def cmd_cycle(cfg: RunConfig):
    a = cfg.args
    mu = measure_from_json(load(a.mu), cfg.eps_norm)
    e1 = explanation_from_json(load(a.expl)) if a.expl else explain_all_in_measurement(mu)
    e2 = explanation_from_json(load(a.expl2)) if a.expl2 else explain_all_in_state(mu, eps_eq=cfg.eps_eq)
    pair = tuple(parse_setting(p) for p in a.pair) if a.pair else None
    if a.rounds == 1:
        reports = [run_cycle(mu, e1, e2, pair, cfg.tol_conflict)]
    else:
        if pair is not None:
            raise UsageError("--pair applies to a single round only")
        reports = iterate_cycle(mu, a.reject, a.rounds, first=(e1, e2), tol_conflict=cfg.tol_conflict, eps_eq=cfg.eps_eq)
    if len(reports) == 1:
        return _cycle_json(reports[0]), 0
    return {"rounds": [_cycle_json(r) for r in reports], "reject": a.reject}, 0


def cmd_bb84(cfg: RunConfig):
    s = bb84_build()
    floor = bb84_security_floor(s)
    alt = bb84_insecure_alternative(s, cfg.tol)

    def table(rows):
        return [
            {
                "pair": [r.first, r.second],
                "traceDistance": r.trace_distance,
                "helstromError": r.helstrom_error,
                "atCeiling": r.at_ceiling,
            }
            for r in rows
        ]

    report = {
        "mu": measure_to_json(s.mu),
        "standard": {"explanation": explanation_to_json(s.standard), "errors": table(floor)},
        "alternative": {
            "explanation": explanation_to_json(alt.explanation),
            "explains": alt.verification.ok,
            "deviation": alt.verification.deviation,
            "errors": table(alt.errors),
        },
        "inequivalence": _verdict_json(alt.verdict),
        "metdevDensity": alt.metdev_density,
    }
    return report, 0


# -- text rendering ------------------------------------------------------------


def _is_assignment(v) -> bool:
    return isinstance(v, dict) and all(isinstance(x, str) for x in v.values())


def _cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    if _is_assignment(v):
        return "{" + ", ".join(f"{k}={x}" for k, x in v.items()) + "}"
    if isinstance(v, list):
        return "[" + ", ".join(_cell(x) for x in v) + "]"
    return str(v)


def _scalar(v) -> bool:
    return not isinstance(v, (list, dict))


def _flat(v) -> bool:
    if isinstance(v, list):
        return len(v) <= 4 and all(_scalar(x) or _is_assignment(x) for x in v)
    return not isinstance(v, dict) or _is_assignment(v)


MAX_TABLE_ROWS = 64


def _render(key: str, value, indent: str, lines: list[str]) -> None:
    if isinstance(value, np.ndarray):
        value = value.tolist()
    if isinstance(value, list) and not value:
        lines.append(f"{indent}{key}: none")
    elif isinstance(value, list) and all(_is_assignment(r) for r in value):
        lines.append(f"{indent}{key}: " + ", ".join(_cell(r) for r in value))
    elif isinstance(value, list) and all(isinstance(r, list) for r in value):
        # numeric matrix or list of groups, one line each
        if len(value) > MAX_TABLE_ROWS or not all(_flat(x) or all(_is_assignment(y) for y in x) for x in value):
            lines.append(f"{indent}{key}: [{len(value)} rows]")
            return
        lines.append(f"{indent}{key}:")
        for i, r in enumerate(value):
            if r and all(_is_assignment(x) for x in r):
                lines.append(f"{indent}  {i}: " + ", ".join(_cell(x) for x in r))
            else:
                lines.append(f"{indent}  " + "  ".join(_cell(x) for x in r))
    elif isinstance(value, list) and all(isinstance(r, dict) for r in value):
        cols = [c for c in value[0] if _flat(value[0][c])]
        hidden = len(cols) < len(value[0])
        if len(value) > MAX_TABLE_ROWS or not cols or (hidden and len(cols) == 1):
            lines.append(f"{indent}{key}: [{len(value)} rows]")
            return
        lines.append(f"{indent}{key}:")
        lines.append(f"{indent}  " + " | ".join(cols))
        for r in value:
            lines.append(f"{indent}  " + " | ".join(_cell(r.get(c)) for c in cols))
    elif isinstance(value, dict) and not _is_assignment(value):
        lines.append(f"{indent}{key}:")
        for k, v in value.items():
            _render(k, v, indent + "  ", lines)
    elif _flat(value):
        lines.append(f"{indent}{key}: {_cell(value)}")
    else:
        lines.append(f"{indent}{key}: [{len(value)} items]")


def render_text(verb: str, report: dict, formula: str) -> str:
    lines = [f"{verb}: {formula}"]
    for key, value in report.items():
        _render(key, value, "", lines)
    return "\n".join(lines) + "\n"


# -- parser ------------------------------------------------------------------

VERBS = {
    "lattice": (cmd_lattice, "join / meet / difference / order of knob or detector domains, computed on their factor sets"),
    "metdev": (cmd_metdev, "MetDev(mu, mu') = sup_{k1,k2} |D[mu(k1), mu(k2)] - D'[mu'(k1), mu'(k2)]|"),
    "topology": (cmd_topology, "classes of k1 ~ k2 iff mu(k1, -) = mu(k2, -), with the quotient metric D[mu(k1), mu(k2)]"),
    "marginalize": (cmd_marginalize, "mu(k, w) = mu'(k, (w, everything else)), summing out dropped detectors"),
    "explain": (cmd_explain, "one member of the inverse image of mu under mu = Tr[rho M]"),
    "verify": (cmd_verify, "checks mu = Tr[rho M] within tolerance, sup over settings and events"),
    "check-prop47": (cmd_check_prop47, "inequivalent states exist unless for all a1, a2 some b has D[mu(a1, b), mu(a2, b)] = 1"),
    "trace-rule": (cmd_trace_rule, "mu(k, w) = Tr[rho(k) M(k, w)]"),
    "helstrom": (cmd_helstrom, "E+ = projector on the positive part of rho1 - rho2; P_E = (1 - 1/2 Tr|rho1 - rho2|) / 2"),
    "bound": (cmd_bound, "D[mu(k1), mu(k2)] <= 1/2 Tr|rho(k1) - rho(k2)| + sup_events ||M(k1, ev) - M(k2, ev)||"),
    "cycle": (cmd_cycle, "extend K to K | copy(K) | {b0, b1}: b0 envelops the given explanations, b1 installs Helstrom measurements"),
    "bb84": (cmd_bb84, "BB84 error floor (1 - 2^-1/2) / 2 under the standard explanation vs 0 under an all-in-state explanation"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, default=None, help=f"random seed (default: ${SEED_ENV} or 0)")
    common.add_argument("--eps-eq", type=float, default=EPS_EQ, help="tolerance for equal outcome distributions")
    common.add_argument("--eps-norm", type=float, default=EPS_NORM, help="normalization tolerance for input measures")
    common.add_argument("--tol-conflict", type=float, default=TOL_CONFLICT)
    common.add_argument("--tol", type=float, default=1e-10, help="verification tolerance")

    parser = _Parser(prog="ambiguity", description="Statements of results and their many quantum explanations.")
    sub = parser.add_subparsers(dest="verb", metavar="VERB", parser_class=_Parser)
    sub.required = True

    def add(verb):
        _, formula = VERBS[verb]
        return sub.add_parser(verb, parents=[common], help=formula, description=formula)

    p = add("lattice")
    p.add_argument("op", choices=("join", "meet", "diff", "leq"))
    p.add_argument("a")
    p.add_argument("b")

    p = add("metdev")
    p.add_argument("mu1")
    p.add_argument("mu2")

    p = add("topology")
    p.add_argument("mu")
    p.add_argument("--fold", help="comma-separated knobs folded into each compared point")

    p = add("marginalize")
    p.add_argument("mu")
    p.add_argument("--drop", required=True, help="comma-separated detector names")

    p = add("explain")
    p.add_argument("mu")
    p.add_argument("--method", choices=("measurement", "state", "sqrt"), required=True)
    p.add_argument("--state-knobs", help="state-side knobs for --method state")

    p = add("verify")
    p.add_argument("--expl", required=True)
    p.add_argument("--mu", required=True)

    p = add("check-prop47")
    p.add_argument("mu")
    p.add_argument("--state-knobs", required=True)

    p = add("trace-rule")
    p.add_argument("expl")

    p = add("helstrom")
    p.add_argument("rho1")
    p.add_argument("rho2")
    p.add_argument("--samples", type=int, default=50, help="random binary POVMs compared against the optimum")

    p = add("bound")
    p.add_argument("expl")
    p.add_argument("--pair", nargs=2, metavar=("K1", "K2"), help="settings as name=label,... or JSON")
    p.add_argument("--slack", type=float, default=1e-9)

    p = add("cycle")
    p.add_argument("--mu", required=True)
    p.add_argument("--expl", help="first explanation (default: all-in-measurement)")
    p.add_argument("--expl2", help="second explanation (default: all-in-state)")
    p.add_argument("--pair", nargs=2, metavar=("K1", "K2"))
    p.add_argument("--rounds", type=int, default=1)
    p.add_argument("--reject", choices=REJECT_RULES, default="keep-first")

    add("bb84")
    return parser


def dispatch(cfg: RunConfig) -> int:
    fn, formula = VERBS[cfg.verb]
    try:
        report, code = fn(cfg)
    except UsageError as exc:
        print(f"ambiguity {cfg.verb}: {exc}", file=sys.stderr)
        return 1
    except InvalidInput as exc:
        print(f"ambiguity {cfg.verb}: invalid input: {exc}", file=sys.stderr)
        return 2
    except VerdictFailure as exc:
        print(f"ambiguity {cfg.verb}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except (OSError, ValueError, TypeError) as exc:
        print(f"ambiguity {cfg.verb}: invalid input: {exc}", file=sys.stderr)
        return 2
    text = dumps(report) if cfg.fmt == "json" else render_text(cfg.verb, report, formula)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(
            verb=args.verb,
            fmt=args.format,
            out=args.out,
            seed=_resolve_seed(args.seed),
            eps_eq=args.eps_eq,
            eps_norm=args.eps_norm,
            tol_conflict=args.tol_conflict,
            tol=args.tol,
            args=args,
        )
    except UsageError as exc:
        print(f"ambiguity: {exc}", file=sys.stderr)
        return 1
    return dispatch(cfg)


if __name__ == "__main__":
    raise SystemExit(main())
