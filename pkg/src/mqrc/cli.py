"""Command-line front end: ``mqrc run | verify | table``.

Exit codes are shared by every subcommand: 0 verified, 1 verification
failure, 2 usage or input error.

Config file::

    {"target": {"alpha": [0.6, 0.0], "beta": [0.8, 0.0]},
     "controllers": [[{"kind": "U1", "theta": 0.3}], [{"kind": "U0", "theta": 0.5}]],
     "forced": "0++"}

``forced`` lists outcomes in consumption order (Bob's Z bit, then one X sign per
controller); ``seed`` selects sampled outcomes instead.  The two are exclusive
and a missing pair means ``seed = 0``.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any

from . import __version__
from .oracle import (
    MAX_PARTIES,
    TABLE_1,
    TABLE_2,
    collapse_table,
    derive_table,
    oracle_state,
    sweep,
)
from .protocol import (
    ControllerScript,
    Correction,
    CorrectionKey,
    Kind,
    Measurement,
    MrB,
    MrReport,
    OperationSpec,
    ParityForward,
    ParityToBob,
    ProtocolConfig,
    RunResult,
    StateSnapshot,
    controller_name,
    correction_lookup,
    run,
)
from .statevector import (
    NORM_TOL,
    Forced,
    Pauli,
    Sampled,
    SimulationError,
    StateVector,
    overlap,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ConfigError(ValueError):
    pass


# --- config parsing ---------------------------------------------------------------


def _number(value: Any, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{what} must be a finite number, got {value!r}")
    return float(value)


def _complex(value: Any, what: str) -> complex:
    if not isinstance(value, list) or len(value) != 2:
        raise ConfigError(f"{what} must be a [re, im] pair, got {value!r}")
    return complex(_number(value[0], what), _number(value[1], what))


def parse_config(doc: Any) -> ProtocolConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    target = doc.get("target")
    if not isinstance(target, dict):
        raise ConfigError("missing 'target' object")
    alpha = _complex(target.get("alpha"), "target.alpha")
    beta = _complex(target.get("beta"), "target.beta")

    controllers = doc.get("controllers")
    if not isinstance(controllers, list) or not controllers:
        raise ConfigError("'controllers' must be a nonempty list")
    scripts = []
    for i, ops in enumerate(controllers, 1):
        if not isinstance(ops, list) or not ops:
            raise ConfigError(f"controller {i} needs a nonempty list of operations")
        specs = []
        for op in ops:
            if not isinstance(op, dict) or op.get("kind") not in ("U0", "U1"):
                raise ConfigError(f"controller {i}: bad operation {op!r}")
            specs.append(OperationSpec(Kind(op["kind"]), _number(op.get("theta"), "theta")))
        scripts.append(ControllerScript(i, tuple(specs)))

    if "seed" in doc and "forced" in doc:
        raise ConfigError("'seed' and 'forced' are mutually exclusive")
    if "forced" in doc:
        forced = doc["forced"]
        n = len(scripts)
        if (
            not isinstance(forced, str)
            or len(forced) != n + 1
            or forced[0] not in "01"
            or set(forced[1:]) - {"+", "-"}
        ):
            raise ConfigError(
                f"'forced' must be one of 0/1 followed by {n} of +/-, got {forced!r}"
            )
        outcomes = Forced.parse(forced)
    else:
        seed = doc.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
            raise ConfigError(f"'seed' must be an unsigned 64-bit integer, got {seed!r}")
        outcomes = Sampled(seed)
    try:
        return ProtocolConfig(tuple(scripts), alpha, beta, outcomes)
    except SimulationError as exc:
        raise ConfigError(str(exc)) from None


def config_to_json(config: ProtocolConfig) -> dict:
    doc: dict[str, Any] = {
        "target": {
            "alpha": [config.alpha.real, config.alpha.imag],
            "beta": [config.beta.real, config.beta.imag],
        },
        "controllers": [
            [{"kind": op.kind.value, "theta": op.theta} for op in s.ops] for s in config.scripts
        ],
    }
    if isinstance(config.outcomes, Forced):
        doc["forced"] = str(config.outcomes)
    else:
        doc["seed"] = config.outcomes.seed
    return doc


# --- transcript serialization --------------------------------------------------------


def state_to_json(state: StateVector) -> list[list[float]]:
    return [[a.real, a.imag] for a in state]


def event_to_json(event) -> dict:
    if isinstance(event, StateSnapshot):
        return {
            "type": "state",
            "step": event.step,
            "qubits": list(event.state.labels or ()),
            "amplitudes": state_to_json(event.state),
        }
    if isinstance(event, Measurement):
        return {
            "type": "measurement",
            "party": event.party,
            "qubit": event.qubit,
            "basis": event.basis.value,
            "outcome": event.outcome.value,
            "probability": event.probability,
        }
    if isinstance(event, Correction):
        return {"type": "correction", "pauli": event.pauli.value}
    if isinstance(event, MrB):
        return {"type": "message", "kind": "MrB", "from": "bob", "to": "all", "bit": event.bit}
    if isinstance(event, ParityForward):
        return {"type": "message", "kind": "ParityForward", "from": controller_name(event.src),
                "to": controller_name(event.dst), "bit": event.bit}
    if isinstance(event, MrReport):
        return {"type": "message", "kind": "MrReport", "from": controller_name(event.src),
                "to": "bob", "sign": event.sign.value}
    if isinstance(event, ParityToBob):
        return {"type": "message", "kind": "ParityToBob", "from": controller_name(event.src),
                "to": "bob", "bit": event.bit}
    raise TypeError(f"unknown event {event!r}")


def transcript_document(config: ProtocolConfig, result: RunResult) -> dict:
    expected = oracle_state(config)
    fidelity = overlap(result.final_qb.with_labels(None), expected)
    return {
        "tool": f"mqrc {__version__}",
        "config": config_to_json(config),
        "outcomes": str(result.transcript.outcomes()),
        "events": [event_to_json(e) for e in result.transcript],
        "result": {
            "final_qb": state_to_json(result.final_qb),
            "correction": result.correction.value,
            "oracle": state_to_json(expected),
            "overlap": fidelity,
            "pass": fidelity >= 1 - NORM_TOL,
        },
    }


def dumps(doc: Any) -> str:
    # float repr is the shortest string that parses back to the same double
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def events_text(doc: dict) -> str:
    return json.dumps(doc["events"], ensure_ascii=False)


def replay(doc: dict) -> dict:
    """Re-run a transcript's config under its own recorded outcomes."""
    config = replace(parse_config(doc["config"]), outcomes=Forced.parse(doc["outcomes"]))
    return transcript_document(config, run(config))


# --- subcommands -----------------------------------------------------------------


def _load_json(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None


def cmd_run(args) -> int:
    if args.replay:
        doc = _load_json(args.replay)
        if not isinstance(doc, dict) or not {"config", "outcomes", "events"} <= doc.keys():
            raise ConfigError(f"{args.replay} is not a transcript")
        again = replay(doc)
        same = events_text(again) == events_text(doc)
        print(f"replay of {args.replay} under {doc['outcomes']}: "
              f"{'identical' if same else 'DIFFERS'}")
        return EXIT_OK if same else EXIT_FAIL

    if not args.config:
        raise ConfigError("run needs a config file or --replay")
    config = parse_config(_load_json(args.config))
    doc = transcript_document(config, run(config))
    text = dumps(doc)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    res = doc["result"]
    print(f"correction {res['correction']}, overlap {res['overlap']!r}, "
          f"{'pass' if res['pass'] else 'FAIL'}", file=sys.stderr)
    return EXIT_OK if res["pass"] else EXIT_FAIL


def sabotaged_lookup(key: CorrectionKey) -> Pauli:
    """Negative control: swaps X and iY whenever the type parity is 1."""
    return correction_lookup(CorrectionKey(key.type_parity, key.minus_parity ^ key.type_parity))


def cmd_verify(args) -> int:
    k, m, d = args.max_controllers, args.max_ops, args.draws
    if k < 1 or m < 1 or d < 1:
        raise ConfigError("--max-controllers, --max-ops and --draws must be positive")
    if k + 1 > MAX_PARTIES:
        raise ConfigError(f"{k} controllers exceeds the enumeration bound of {MAX_PARTIES} parties")
    lookup = sabotaged_lookup if args.sabotage else correction_lookup
    ok = True
    total = 0
    for shape in sweep(k, m, d, args.seed, lookup):
        total += shape.branches
        print(shape.describe())
        for config, branch in shape.failures[:5]:
            ok = False
            print(f"  failing branch {branch.outcomes}: correction {branch.correction.value}, "
                  f"expected {'/'.join(p.value for p in branch.matches) or '?'}, "
                  f"overlap {branch.overlap:.6f}")
        ok = ok and shape.passed
    print(f"{total} branches checked: {'all branches pass' if ok else 'FAILURES found'}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_table(args) -> int:
    rows = derive_table()
    print("Table 1 (MR_B = 0)")
    print(f"{'U_A':<4} {'U_C':<4} {'MR_A':<5} {'MR_C':<5} U_b")
    bad = []
    for got, want in zip(rows, TABLE_1):
        flag = "" if got == want else f"   <- published {want.correction.display}"
        if flag:
            bad.append(got)
        print(f"{got.kind_a.value:<4} {got.kind_c.value:<4} |{got.mr_a.value}>   "
              f"|{got.mr_c.value}>   {got.correction.display}{flag}")
    if len(rows) != len(TABLE_1):
        bad.append(None)
    print()
    print("Table 2")
    print("C  MR  U_b")
    try:
        grouped = collapse_table(rows)
    except SimulationError as exc:
        print(f"cannot group rows: {exc}")
        return EXIT_FAIL
    for key in sorted(TABLE_2):
        got = grouped.get(key)
        flag = "" if got is TABLE_2[key] else f"   <- published {TABLE_2[key].display}"
        if flag:
            bad.append(key)
        print(f"{key[0]}  {key[1]}   {got.display if got else '-'}{flag}")
    if bad:
        print(f"\n{len(bad)} rows differ from the published tables")
        return EXIT_FAIL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mqrc", description="Multiparty quantum remote control simulator and verifier."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute one protocol run and write its transcript")
    p.add_argument("config", nargs="?", help="config JSON file")
    p.add_argument("--out", help="transcript path (default: stdout)")
    p.add_argument("--replay", metavar="TRANSCRIPT",
                   help="re-run a transcript under its recorded outcomes and compare events")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="exhaustively check random configs against the oracle")
    p.add_argument("--max-controllers", type=int, default=4)
    p.add_argument("--max-ops", type=int, default=3)
    p.add_argument("--draws", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sabotage", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("table", help="derive the correction tables and compare to the published ones")
    p.set_defaults(func=cmd_table)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, SimulationError) as exc:
        print(f"mqrc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
