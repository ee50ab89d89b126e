"""Experiment configuration: one strict JSON document, schema-checked."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from importlib import resources

import jsonschema
import numpy as np

from .errors import ValidationError


def schema() -> dict:
    return json.loads(resources.files("relex").joinpath("schema/config.schema.json").read_text())


@dataclass
class ExperimentConfig:
    family: str
    n: list = field(default_factory=lambda: [2])
    lamp: str = "z2n"
    m: int = 2
    convention: str = "ordered"
    lazy: bool = False
    count_loops: bool = True
    cap: int = 1 << 21
    seed: int = 0
    trials: int = 1
    tol: float = 1e-8
    output: str = ""
    cache_dir: str = ""

    def to_dict(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        try:
            jsonschema.validate(data, schema())
        except jsonschema.ValidationError as exc:
            raise ValidationError(f"config: {exc.message}") from exc
        return cls(**data)

    @classmethod
    def loads(cls, text: str) -> "ExperimentConfig":
        def no_dupes(pairs):
            keys = [k for k, _ in pairs]
            if len(keys) != len(set(keys)):
                raise ValidationError("config: duplicate keys")
            return dict(pairs)

        def no_const(c):
            raise ValidationError(f"config: {c} is not strict JSON")

        try:
            data = json.loads(text, object_pairs_hook=no_dupes, parse_constant=no_const)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ValidationError("config must be a JSON object")
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())


def parse_range(text: str) -> list:
    """'3' -> [3]; '2..4' -> [2, 3, 4]; '1,3' -> [1, 3]."""
    out = []
    try:
        for part in str(text).split(","):
            if ".." in part:
                a, b = part.split("..")
                a, b = int(a), int(b)
                if b < a:
                    raise ValidationError(f"empty range {part!r}")
                out.extend(range(a, b + 1))
            else:
                out.append(int(part))
    except ValueError as exc:
        raise ValidationError(f"bad range {text!r}") from exc
    return out


def stream(seed: int, *counter: int) -> np.random.Generator:
    """Independent generator for (seed, counter...): a Philox stream keyed by the spawn path."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(c) for c in counter))
    return np.random.Generator(np.random.Philox(ss))


def child_seed(seed: int, *counter: int) -> int:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(c) for c in counter))
    return int(ss.generate_state(1, dtype=np.uint32)[0])
