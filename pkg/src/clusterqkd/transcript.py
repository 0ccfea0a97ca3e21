"""Line-delimited transcript and summary serialisation."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, TextIO

from .cases import CaseKind, LocalOp
from .protocol import Designation, ProtocolConfig, RoundRecord, SiftOutcome
from .qcore import BellOutcome

FIELDS = ("index", "alice_op", "bob_op", "case", "mr_A", "mr_B", "mr_C3", "mr_C4", "mr_C34", "designation")


def record_to_dict(r: RoundRecord) -> dict:
    return {
        "index": r.index,
        "alice_op": r.alice_op.value,
        "bob_op": r.bob_op.value,
        "case": r.case.name,
        "mr_A": r.mr_A,
        "mr_B": r.mr_B,
        "mr_C3": r.mr_C3,
        "mr_C4": r.mr_C4,
        "mr_C34": r.mr_C34.value if r.mr_C34 is not None else None,
        "designation": r.designation.value,
    }


def record_from_dict(d: dict) -> RoundRecord:
    return RoundRecord(
        index=int(d["index"]),
        alice_op=LocalOp(d["alice_op"]),
        bob_op=LocalOp(d["bob_op"]),
        case=CaseKind[d["case"]],
        mr_A=int(d["mr_A"]),
        mr_B=int(d["mr_B"]),
        mr_C3=d["mr_C3"],
        mr_C4=d["mr_C4"],
        mr_C34=BellOutcome(d["mr_C34"]) if d["mr_C34"] is not None else None,
        designation=Designation(d["designation"]),
    )


def write_transcript(records: Iterable[RoundRecord], fh: TextIO) -> None:
    for r in sorted(records, key=lambda r: r.index):
        fh.write(json.dumps(record_to_dict(r), separators=(",", ":")) + "\n")


def read_transcript(path: str | Path) -> list[RoundRecord]:
    with open(path, encoding="utf-8") as fh:
        return [record_from_dict(json.loads(line)) for line in fh if line.strip()]


def summary_dict(config: ProtocolConfig, outcome: SiftOutcome, attack: str) -> dict:
    return {
        "attack": attack,
        "n": config.n,
        "epsilon": config.epsilon,
        "rounds": config.num_rounds,
        "seed": config.seed,
        "check_fraction": config.check_fraction,
        "error_threshold": config.error_threshold,
        "counts": {c.name: outcome.counts[c] for c in CaseKind},
        "checked": {c.name: outcome.checked.get(c, 0) for c in CaseKind},
        "case_error_rates": {c.name: outcome.case_error_rates[c] for c in CaseKind},
        "key_lengths": {"R_CA": len(outcome.raw_key_CA), "R_CB": len(outcome.raw_key_CB)},
        "aborted": outcome.aborted,
    }


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
