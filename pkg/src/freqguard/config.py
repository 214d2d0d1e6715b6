"""Experiment configuration: a strict, losslessly round-tripping JSON schema.

Defaults: trials=1, seed=0, pm_mode=time_gated, noise placement
per_channel, noise seed = experiment seed, output format json,
n_bits=10000, protected=true.  Unknown fields are rejected by name.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

from .circuits import BUILTIN_CIRCUITS, Circuit, PmMode, SchemeKind
from .errors import ConfigError, FreqguardError
from .noise import NoiseSpec
from .states import InputQubit

_TOP_FIELDS = {
    "scheme",
    "input",
    "noise",
    "pm_mode",
    "trials",
    "seed",
    "n_bits",
    "protected",
    "output",
    "encoder",
    "circuits",
}
_NOISE_FIELDS = {"kind", "placement", "seed", "theta", "delta", "eta"}
NAMED_INPUTS = ("H", "V", "+x", "-x", "+y", "-y")


@dataclass(frozen=True)
class OutputSpec:
    path: str | None = None
    format: str = "json"

    def __post_init__(self):
        if self.format not in ("json", "csv"):
            raise ConfigError(f"output format must be 'json' or 'csv', got {self.format!r}")


def _parse_complex(value, where: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ConfigError(f"field {where!r} must be a number or an [re, im] pair, got {value!r}")


def _parse_input(raw) -> tuple[InputQubit, object]:
    if isinstance(raw, str):
        return InputQubit.named(raw), raw
    if isinstance(raw, dict):
        unknown = set(raw) - {"alpha", "beta"}
        if unknown:
            raise ConfigError(f"unknown input fields: {sorted(unknown)}")
        if "alpha" not in raw or "beta" not in raw:
            raise ConfigError("explicit input needs both 'alpha' and 'beta'")
        q = InputQubit(_parse_complex(raw["alpha"], "input.alpha"), _parse_complex(raw["beta"], "input.beta"))
        return q, {"alpha": [q.alpha.real, q.alpha.imag], "beta": [q.beta.real, q.beta.imag]}
    raise ConfigError(f"field 'input' must be a named state or an alpha/beta object, got {raw!r}")


def _parse_noise(raw, default_seed: int) -> NoiseSpec:
    if not isinstance(raw, dict):
        raise ConfigError(f"field 'noise' must be an object, got {raw!r}")
    unknown = set(raw) - _NOISE_FIELDS
    if unknown:
        raise ConfigError(f"unknown noise fields: {sorted(unknown)}")
    if "kind" not in raw:
        raise ConfigError("field 'noise.kind' is required")
    kwargs: dict = {
        "kind": raw["kind"],
        "placement": raw.get("placement", "per_channel"),
        "seed": int(raw.get("seed", default_seed)),
    }
    if "theta" in raw:
        kwargs["theta"] = float(raw["theta"])
    if "delta" in raw:
        kwargs["delta"] = _parse_complex(raw["delta"], "noise.delta")
    if "eta" in raw:
        kwargs["eta"] = _parse_complex(raw["eta"], "noise.eta")
    return NoiseSpec(**kwargs)


def _parse_pm_mode(raw) -> PmMode:
    if raw is None:
        return PmMode()
    if isinstance(raw, str):
        if raw == "time_gated":
            return PmMode()
        raise ConfigError("field 'pm_mode' as a string must be 'time_gated'; static needs a phase object")
    if isinstance(raw, dict):
        unknown = set(raw) - {"mode", "phase"}
        if unknown:
            raise ConfigError(f"unknown pm_mode fields: {sorted(unknown)}")
        mode = raw.get("mode")
        if mode == "time_gated":
            if "phase" in raw:
                raise ConfigError("pm_mode 'time_gated' takes no phase")
            return PmMode()
        if mode == "static":
            if "phase" not in raw:
                raise ConfigError("pm_mode 'static' needs a phase (radians)")
            return PmMode("static", float(raw["phase"]))
        raise ConfigError(f"field 'pm_mode.mode' must be 'time_gated' or 'static', got {mode!r}")
    raise ConfigError(f"field 'pm_mode' must be a string or object, got {raw!r}")


def _parse_output(raw) -> OutputSpec:
    if raw is None:
        return OutputSpec()
    if not isinstance(raw, dict):
        raise ConfigError(f"field 'output' must be an object, got {raw!r}")
    unknown = set(raw) - {"path", "format"}
    if unknown:
        raise ConfigError(f"unknown output fields: {sorted(unknown)}")
    return OutputSpec(path=raw.get("path"), format=raw.get("format", "json"))


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: SchemeKind
    input: InputQubit
    input_raw: object
    noise: NoiseSpec
    pm_mode: PmMode
    trials: int = 1
    seed: int = 0
    n_bits: int = 10000
    protected: bool = True
    output: OutputSpec = OutputSpec()
    encoder: str | None = None
    custom_circuits: tuple[Circuit, ...] = ()

    @staticmethod
    def from_dict(
        d: dict,
        seed_override: int | None = None,
        trials_override: int | None = None,
    ) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("configuration must be a JSON object")
        unknown = set(d) - _TOP_FIELDS
        if unknown:
            raise ConfigError(f"unknown configuration fields: {sorted(unknown)}")
        for required in ("scheme", "input", "noise"):
            if required not in d:
                raise ConfigError(f"field {required!r} is required")
        try:
            scheme = SchemeKind(d["scheme"])
        except ValueError:
            raise ConfigError(
                f"field 'scheme' must be one of {[s.value for s in SchemeKind]}, got {d['scheme']!r}"
            ) from None
        seed = int(d.get("seed", 0)) if seed_override is None else int(seed_override)
        if not 0 <= seed < 2**64:
            raise ConfigError(f"field 'seed' must fit in 64 unsigned bits, got {seed}")
        trials = int(d.get("trials", 1)) if trials_override is None else int(trials_override)
        if trials < 1:
            raise ConfigError(f"field 'trials' must be >= 1, got {trials}")
        n_bits = int(d.get("n_bits", 10000))
        if n_bits < 1:
            raise ConfigError(f"field 'n_bits' must be >= 1, got {n_bits}")
        protected = d.get("protected", True)
        if not isinstance(protected, bool):
            raise ConfigError(f"field 'protected' must be a boolean, got {protected!r}")
        qubit, input_raw = _parse_input(d["input"])
        circuits = tuple(Circuit.from_dict(c) for c in d.get("circuits", ()))
        names = [c.name for c in circuits]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate custom circuit names: {names}")
        encoder = d.get("encoder")
        if encoder is not None and encoder not in set(names) | set(BUILTIN_CIRCUITS):
            raise ConfigError(
                f"field 'encoder' names unknown circuit {encoder!r} "
                f"(builtins: {sorted(BUILTIN_CIRCUITS)}, custom: {sorted(names)})"
            )
        return ExperimentConfig(
            scheme=scheme,
            input=qubit,
            input_raw=input_raw,
            noise=_parse_noise(d["noise"], seed),
            pm_mode=_parse_pm_mode(d.get("pm_mode")),
            trials=trials,
            seed=seed,
            n_bits=n_bits,
            protected=protected,
            output=_parse_output(d.get("output")),
            encoder=encoder,
            custom_circuits=circuits,
        )

    def to_dict(self) -> dict:
        d: dict = {
            "scheme": self.scheme.value,
            "input": self.input_raw,
            "noise": self.noise.to_dict(),
            "pm_mode": self.pm_mode.to_dict(),
            "trials": self.trials,
            "seed": self.seed,
            "n_bits": self.n_bits,
            "protected": self.protected,
            "output": {"path": self.output.path, "format": self.output.format},
        }
        if self.encoder is not None:
            d["encoder"] = self.encoder
        if self.custom_circuits:
            d["circuits"] = [c.to_dict() for c in self.custom_circuits]
        return d

    @staticmethod
    def from_json(text: str, **overrides) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"configuration is not valid JSON: {exc}") from None
        return ExperimentConfig.from_dict(data, **overrides)

    @staticmethod
    def load(path: str | Path, **overrides) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read configuration file: {exc}") from None
        return ExperimentConfig.from_json(text, **overrides)

    def resolve_encoder(self) -> Circuit | None:
        """The circuit named by 'encoder', or None for the scheme default."""
        if self.encoder is None:
            return None
        for c in self.custom_circuits:
            if c.name == self.encoder:
                return c
        return BUILTIN_CIRCUITS[self.encoder]()

    def with_output(self, path: str | None, fmt: str | None) -> "ExperimentConfig":
        new = OutputSpec(
            path=path if path is not None else self.output.path,
            format=fmt if fmt is not None else self.output.format,
        )
        return replace(self, output=new)
