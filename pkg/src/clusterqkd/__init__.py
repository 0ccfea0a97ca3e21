"""Simulator and key-rate toolkit for a three-party lightweight QKD protocol on four-qubit cluster states."""

from .attacks import AttackKind, AttackModel
from .cases import CaseKind, LocalOp
from .keyrate import ObservedStats, key_rate_lower, noise_threshold, stats_from_Q
from .protocol import ProtocolConfig, RoundRecord, SiftOutcome, run_protocol
from .qcore import BellOutcome

__all__ = [
    "AttackKind",
    "AttackModel",
    "BellOutcome",
    "CaseKind",
    "LocalOp",
    "ObservedStats",
    "ProtocolConfig",
    "RoundRecord",
    "SiftOutcome",
    "key_rate_lower",
    "noise_threshold",
    "run_protocol",
    "stats_from_Q",
]
