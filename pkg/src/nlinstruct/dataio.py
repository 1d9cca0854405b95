"""File formats: line-delimited datasets, gold-call sidecars, run configs.

Dataset records are one JSON object per line:

    {"id": ..., "domain": ..., "utterance": ...,
     "initial": {"entities": [{"id": ..., "type": ...}, ...],
                 "triples": [[subjectId, relation, object], ...]},
     "desired": {same shape}}

Objects are kind-tagged: {"int": 4} | {"str": "bedroom"} | {"sym": "ON"} |
{"ent": "room1"}. An optional first line {"header": {...}} carries
provenance. Gold method calls live in a separate sidecar file that only
test tooling reads; no training code path parses it.
"""

from __future__ import annotations

import json
import os
import tempfile
from typing import Iterable

from .domains.base import Example, MethodCall
from .errors import ConfigError, DataError
from .kb import Entity, IntVal, State, SymVal, TextVal, Triple, Value

DATASET_FORMAT = "nlinstruct-dataset"
DATASET_VERSION = 1


def atomic_write_text(path, text: str) -> None:
    """Write-then-rename so readers never observe partial files."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_json(path, payload) -> None:
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Values and states
# ---------------------------------------------------------------------------


def value_to_json(v: Value):
    if isinstance(v, IntVal):
        return {"int": v.value}
    if isinstance(v, TextVal):
        return {"str": v.value}
    if isinstance(v, SymVal):
        return {"sym": v.name}
    return {"ent": v.id}


def _value_from_json(obj, entities: dict[str, Entity]) -> Value:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise DataError(f"bad value object: {obj!r}")
    ((tag, payload),) = obj.items()
    if tag == "int":
        return IntVal(int(payload))
    if tag == "str":
        return TextVal(str(payload))
    if tag == "sym":
        return SymVal(str(payload))
    if tag == "ent":
        try:
            return entities[payload]
        except KeyError:
            raise DataError(f"triple references unknown entity {payload!r}") from None
    raise DataError(f"unknown value tag {tag!r}")


def state_to_json(state: State) -> dict:
    entities = sorted(state.entities, key=lambda e: e.id)
    triples = sorted(
        state.triples,
        key=lambda t: (t.subject.id, t.relation, json.dumps(value_to_json(t.object), sort_keys=True)),
    )
    return {
        "entities": [{"id": e.id, "type": e.etype} for e in entities],
        "triples": [[t.subject.id, t.relation, value_to_json(t.object)] for t in triples],
    }


def state_from_json(domain_id: str, obj: dict) -> State:
    try:
        entities = {e["id"]: Entity(e["id"], e["type"]) for e in obj["entities"]}
        triples = []
        for sid, relation, raw in obj["triples"]:
            subject = entities.get(sid)
            if subject is None:
                raise DataError(f"triple subject {sid!r} is not a declared entity")
            triples.append(Triple(subject, relation, _value_from_json(raw, entities)))
    except (KeyError, TypeError) as exc:
        raise DataError(f"malformed state object: {exc}") from None
    return State(domain_id, entities.values(), triples)


# ---------------------------------------------------------------------------
# Datasets
# ---------------------------------------------------------------------------


def example_to_json(ex: Example) -> dict:
    return {
        "id": ex.id,
        "domain": ex.domain_id,
        "utterance": ex.utterance,
        "initial": state_to_json(ex.initial),
        "desired": state_to_json(ex.desired),
    }


def example_from_json(obj: dict) -> Example:
    try:
        return Example(
            id=str(obj["id"]),
            domain_id=str(obj["domain"]),
            utterance=str(obj["utterance"]),
            initial=state_from_json(str(obj["domain"]), obj["initial"]),
            desired=state_from_json(str(obj["domain"]), obj["desired"]),
        )
    except KeyError as exc:
        raise DataError(f"dataset record missing field {exc}") from None


def write_dataset(path, examples: Iterable[Example], header: dict | None = None) -> None:
    lines = []
    meta = {"format": DATASET_FORMAT, "version": DATASET_VERSION}
    if header:
        meta.update(header)
    lines.append(json.dumps({"header": meta}, sort_keys=True))
    lines.extend(json.dumps(example_to_json(ex), sort_keys=True) for ex in examples)
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_dataset(path) -> list[Example]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: not valid JSON ({exc})") from None
            if "header" in obj:
                continue
            out.append(example_from_json(obj))
    return out


def write_gold_sidecar(path, records: Iterable[tuple[str, MethodCall, str]]) -> None:
    """(example id, gold call, printed logical form) triples; test-only input."""
    lines = []
    for ex_id, call, printed in records:
        lines.append(
            json.dumps(
                {
                    "id": ex_id,
                    "method": call.method.name,
                    "args": [
                        sorted((value_to_json(v) for v in arg), key=lambda o: json.dumps(o, sort_keys=True))
                        for arg in call.args
                    ],
                    "lf": printed,
                },
                sort_keys=True,
            )
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_gold_sidecar(path) -> list[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


# ---------------------------------------------------------------------------
# Run configuration
# ---------------------------------------------------------------------------

_TOP_KEYS = {
    "dataset": str,
    "target_domain": str,
    "algorithm": str,
    "use_new_features": bool,
    "use_logic_filter": bool,
    "in_domain": bool,
    "seed": int,
    "beam_size": int,
    "max_rule_applications": int,
    "grid": dict,
    "train": dict,
    "generation": dict,
    "bootstrap": dict,
}

_GRID_KEYS = {"l1", "step_size", "iterations", "iterations_step1", "partition_sizes", "num_orderings"}
_TRAIN_KEYS = {"l1", "step_size", "iterations", "iterations_step1", "partition_size",
               "domain_ordering", "seed", "reset_accumulators"}
_BOOTSTRAP_KEYS = {"iterations", "alpha", "seed"}

DEFAULTS = {
    "algorithm": "gmdp",
    "use_new_features": True,
    "use_logic_filter": True,
    "in_domain": False,
    "seed": 0,
    "beam_size": 200,
    "max_rule_applications": 15,
}


def load_run_config(path) -> dict:
    """Parse and validate a run configuration; unknown keys are rejected."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    for key, value in raw.items():
        if key not in _TOP_KEYS:
            raise ConfigError(f"{path}: unknown key {key!r}")
        want = _TOP_KEYS[key]
        if want is int and isinstance(value, bool):
            raise ConfigError(f"{path}: key {key!r} must be an integer")
        if not isinstance(value, want):
            raise ConfigError(f"{path}: key {key!r} must be {want.__name__}")
    for section, allowed in (("grid", _GRID_KEYS), ("train", _TRAIN_KEYS), ("bootstrap", _BOOTSTRAP_KEYS)):
        for key in raw.get(section, {}):
            if key not in allowed:
                raise ConfigError(f"{path}: unknown key {section}.{key}")
    if raw.get("algorithm") not in (None, "gmdp", "adagrad"):
        raise ConfigError(f"{path}: algorithm must be 'gmdp' or 'adagrad'")
    config = dict(DEFAULTS)
    config.update(raw)
    return config
