"""JSON run-configuration parsing and validation."""

from __future__ import annotations

import json
from dataclasses import dataclass

from .harness import MAIN_STATES, SessionConfig

# document key -> SessionConfig field (identity unless renamed)
_KEYS = {
    "env": "environment",
    "k": "k",
    "l": "l",
    "alpha": "alpha",
    "delta": "delta",
    "beta": "beta",
    "nu": "nu",
    "max_periods": "max_periods",
    "convergence_window": "convergence_window",
    "q_init": "q_init",
    "q_init_value": "q_init_value",
    "tie_rule": "tie_rule",
    "seed": "seed",
    "fixed_state": "fixed_state",
    "irrelevant_signals": "irrelevant_signals",
    "common_signal": "common_signal",
    "note_actions": "note_actions",
    "note_a": "note_a",
    "note_c": "note_c",
    "note_min_action": "note_min_action",
    "trace": "trace",
    "trace_dense": "trace_dense",
    "trace_stride": "trace_stride",
}
_TOP_KEYS = {"m", "sessions"} | set(_KEYS)


@dataclass(frozen=True)
class RunConfig:
    session: SessionConfig
    sessions: int


def parse_config(text: str) -> RunConfig:
    """Validated run configuration from a JSON document.

    Unknown keys are rejected; beta and nu are mutually exclusive; all
    SessionConfig invariants are enforced on construction.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValueError(f"config is not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ValueError("config document must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if "beta" in doc and "nu" in doc:
        raise ValueError("beta and nu are mutually exclusive; give one")
    if doc.get("m", len(MAIN_STATES)) != len(MAIN_STATES):
        raise ValueError(
            f"only the {len(MAIN_STATES)}-state space is supported, got m={doc['m']}"
        )
    sessions = doc.get("sessions", 1000)
    if not isinstance(sessions, int) or sessions < 1:
        raise ValueError(f"sessions must be a positive integer, got {sessions}")

    kwargs = {}
    for key, fieldname in _KEYS.items():
        if key in doc:
            val = doc[key]
            if key == "k":
                if not isinstance(val, list) or not all(
                    isinstance(x, int) for x in val
                ):
                    raise ValueError("k must be a list of integers")
                val = tuple(val)
            kwargs[fieldname] = val
    # an explicit beta or nu silences the default beta
    if "nu" in doc:
        kwargs.setdefault("beta", None)
    session = SessionConfig(**kwargs)
    return RunConfig(session=session, sessions=sessions)


def config_to_dict(cfg: RunConfig) -> dict:
    """Serialized form; parse(serialize(parse(x))) is the identity."""
    s = cfg.session
    out = {"env": s.environment, "sessions": cfg.sessions}
    for key, fieldname in _KEYS.items():
        if key == "env":
            continue
        val = getattr(s, fieldname)
        if key == "k":
            val = list(val)
        if key in ("beta", "nu") and val is None:
            continue  # beta and nu are exclusive; emit only the one in use
        out[key] = val
    return out


def parse_config_dict(doc: dict) -> RunConfig:
    return parse_config(json.dumps(doc))
