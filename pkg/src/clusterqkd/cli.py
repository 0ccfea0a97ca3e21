"""Command-line front end: ``simulate``, ``keyrate``, ``detect``, ``efficiency``.

Exit codes: 0 success, 1 usage or I/O error, 2 protocol abort.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import math
import os
import sys
from importlib import metadata
from pathlib import Path
from typing import Sequence

import numpy as np

from . import attacks, keyrate, protocol, transcript
from .attacks import AttackKind, AttackModel

EXIT_OK, EXIT_USAGE, EXIT_ABORT = 0, 1, 2

DETECT_ATTACKS = ("intercept-resend", "measure-resend", "measure-resend-bell")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit 2, which we reserve for aborts
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def tool_version() -> str:
    try:
        return metadata.version("clusterqkd")
    except metadata.PackageNotFoundError:  # pragma: no cover - running from a source tree
        return "0.0.0+unknown"


def parse_attack(spec: str) -> AttackModel:
    """Parse ``name[:param[,param]]``, e.g. ``depolarizing:0.05`` or ``collective:seed=11``."""
    name, _, rest = spec.strip().partition(":")
    name = name.strip().lower()
    positional: list[str] = []
    kw: dict[str, str] = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        if "=" in item:
            k, v = item.split("=", 1)
            kw[k.strip().lower()] = v.strip()
        else:
            positional.append(item)

    def flag(key: str) -> bool:
        return kw.pop(key, "0").lower() in ("1", "true", "yes")

    try:
        if name in ("none", ""):
            model = AttackModel.none()
        elif name == "intercept-resend":
            model = AttackModel.intercept_resend()
        elif name == "measure-resend":
            model = AttackModel.measure_resend()
        elif name == "measure-resend-bell":
            model = AttackModel.measure_resend_bell()
        elif name == "depolarizing":
            q = kw.pop("q", positional.pop(0) if positional else None)
            if q is None:
                raise UsageError("depolarizing needs a parameter, e.g. depolarizing:0.05")
            model = AttackModel.depolarizing(float(q))
        elif name in ("collective", "collective-internal"):
            rng = np.random.default_rng(int(kw.pop("seed", "0")))
            params = attacks.random_internal_params(rng)
            coeffs = {k: complex(kw.pop(k)) for k in ("a", "b", "c", "d") if k in kw}
            if coeffs:
                params = dataclasses.replace(params, **coeffs)
            if flag("tie"):
                params = dataclasses.replace(params, e11=params.e00)
            if flag("undetectable"):
                params = attacks.project_zero_error(params)
            model = attacks.constrained_attack(params, label=spec)
        elif name == "collective-external":
            rng = np.random.default_rng(int(kw.pop("seed", "0")))
            params = attacks.random_external_params(rng)
            if flag("undetectable"):
                params = attacks.project_zero_error_external(params)
            model = attacks.external_attack(params, label=spec)
        else:
            raise UsageError(f"unknown attack {name!r}")
    except UsageError:
        raise
    except ValueError as exc:
        raise UsageError(f"bad attack spec {spec!r}: {exc}") from exc
    if positional or kw:
        raise UsageError(f"unused attack parameters in {spec!r}: {positional + sorted(kw)}")
    if model.kind is not AttackKind.NONE and not model.label:
        model = dataclasses.replace(model, label=spec)
    return model


def _default_seed() -> int:
    env = os.environ.get("QKD_SEED")
    return int(env) if env not in (None, "") else 0


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _manifest(command: str, config: dict, attack: str, outputs: list[Path]) -> dict:
    return {
        "command": command,
        "config": config,
        "attack": attack,
        "outputs": [p.name for p in outputs],
        "tool_version": tool_version(),
    }


def cmd_simulate(args: argparse.Namespace) -> int:
    config = protocol.ProtocolConfig(
        n=args.n,
        epsilon=args.epsilon,
        check_fraction=args.check_fraction,
        error_threshold=args.threshold,
        seed=args.seed,
    )
    attack = parse_attack(args.attack)
    records, outcome = protocol.run_protocol(config, attack)
    summary = transcript.summary_dict(config, outcome, attack.describe())
    try:
        stats = keyrate.stats_from_transcript(records)
        summary["observed_stats"] = dataclasses.asdict(stats)
    except ValueError:
        summary["observed_stats"] = None

    out = Path(args.out)
    tpath, spath, mpath = out / "transcript.jsonl", out / "summary.json", out / "manifest.json"
    buf = io.StringIO()
    transcript.write_transcript(records, buf)
    # all computation is done before anything touches the output directory
    _write(tpath, buf.getvalue())
    _write(spath, transcript.dumps(summary))
    cfg = dataclasses.asdict(config)
    _write(mpath, transcript.dumps(_manifest("simulate", cfg, attack.describe(), [tpath, spath])))
    sys.stdout.write(transcript.dumps(summary))
    return EXIT_ABORT if outcome.aborted else EXIT_OK


def cmd_keyrate(args: argparse.Namespace) -> int:
    result = keyrate.solve_threshold()
    record = dataclasses.asdict(result)
    if args.threshold_only:
        if args.out:
            out = Path(args.out)
            tpath = out / "threshold.json"
            _write(tpath, transcript.dumps(record))
            _write(out / "manifest.json", transcript.dumps(_manifest("keyrate", {"threshold_only": True}, "depolarizing", [tpath])))
        sys.stdout.write(transcript.dumps(record))
        return EXIT_OK
    try:
        curve = keyrate.key_rate_curve(args.qmin, args.qmax, args.steps)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    text = "Q,r_lower\n" + "".join(f"{q!r},{r!r}\n" for q, r in curve)
    if args.out:
        out = Path(args.out)
        cpath, tpath = out / "curve.csv", out / "threshold.json"
        _write(cpath, text)
        _write(tpath, transcript.dumps(record))
        cfg = {"qmin": args.qmin, "qmax": args.qmax, "steps": args.steps}
        _write(out / "manifest.json", transcript.dumps(_manifest("keyrate", cfg, "depolarizing", [cpath, tpath])))
        sys.stdout.write(transcript.dumps(record))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    if trials == 0:
        return (0.0, 1.0)
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return (max(0.0, centre - half), min(1.0, centre + half))


def detection_experiment(model: AttackModel, positions: int, trials: int, seed: int) -> dict:
    """Monte-Carlo: in each trial, check ``positions`` rounds; detected if any check fails."""
    detected = failed = 0
    for t in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2, t)))
        hit = False
        for j in range(positions):
            alice_op, bob_op = protocol.draw_ops(rng)
            record = protocol.run_round(alice_op, bob_op, model, rng, index=j)
            if not protocol.consistency_check(record):
                hit = True
                failed += 1
        detected += hit
    lo, hi = wilson_interval(detected, trials)
    return {
        "attack": model.describe(),
        "positions": positions,
        "trials": trials,
        "seed": seed,
        "analytic": attacks.detection_curve(model, positions),
        "exact_per_position": attacks.detection_probability(model),
        "monte_carlo": detected / trials if trials else 0.0,
        "ci95": [lo, hi],
        "per_position_failure_rate": failed / (trials * positions) if trials and positions else 0.0,
    }


def cmd_detect(args: argparse.Namespace) -> int:
    if args.attack not in DETECT_ATTACKS:
        raise UsageError(f"detect supports {', '.join(DETECT_ATTACKS)}; got {args.attack!r}")
    if args.positions < 0 or args.trials < 0:
        raise UsageError("--positions and --trials must be non-negative")
    report = detection_experiment(parse_attack(args.attack), args.positions, args.trials, args.seed)
    text = transcript.dumps(report)
    if args.out:
        _write(Path(args.out) / "detect.json", text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_efficiency(args: argparse.Namespace) -> int:
    if args.n < 1:
        raise UsageError("--n must be a positive integer")
    config = protocol.ProtocolConfig(n=args.n, seed=args.seed)
    eta = protocol.qubit_efficiency(config)
    report = {"n": args.n, "eta": float(eta), "eta_fraction": str(eta), "qubits_generated": 16 * args.n,
              "classical_qubits": 0}
    if args.empirical:
        _, outcome = protocol.run_protocol(config)
        report["seed"] = args.seed
        report["empirical_eta"] = protocol.empirical_efficiency(config, outcome)
        report["key_lengths"] = {"R_CA": len(outcome.raw_key_CA), "R_CB": len(outcome.raw_key_CB)}
    sys.stdout.write(transcript.dumps(report))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="clusterqkd", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {tool_version()}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    seed = _default_seed()

    p = sub.add_parser("simulate", help="run the protocol and write transcript + summary")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=seed, help="default: $QKD_SEED or 0")
    p.add_argument("--attack", default="none")
    p.add_argument("--check-fraction", type=float, default=0.5)
    p.add_argument("--threshold", type=float, default=0.05)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("keyrate", help="key-rate curve and noise threshold")
    p.add_argument("--qmin", type=float, default=0.0)
    p.add_argument("--qmax", type=float, default=0.12)
    p.add_argument("--steps", type=int, default=241)
    p.add_argument("--out")
    p.add_argument("--threshold-only", action="store_true")
    p.set_defaults(func=cmd_keyrate)

    p = sub.add_parser("detect", help="analytic vs Monte-Carlo detection probability")
    p.add_argument("--attack", required=True)
    p.add_argument("--positions", type=int, required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--out")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("efficiency", help="qubit efficiency c / (q + b)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--empirical", action="store_true")
    p.set_defaults(func=cmd_efficiency)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        parser = build_parser()
    except ValueError:
        sys.stderr.write("clusterqkd: QKD_SEED must be an integer\n")
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        sys.stderr.write(f"clusterqkd {args.command}: error: {exc}\n")
        return EXIT_USAGE
    except OSError as exc:
        sys.stderr.write(f"clusterqkd {args.command}: I/O error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
