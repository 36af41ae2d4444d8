"""Run configuration: INI-style documents with sections, strict validation.

A run is described by a ``[circuit]`` section (preset plus parameters, in
GHz or dimensionless via beta/eta), a ``[task]`` section, an ``[output]``
section, and one optional task-specific section.  Unknown sections or
keys are rejected with the offending path; command-line overrides are
applied to the document before validation so precedence is flags > file
> defaults.
"""

from __future__ import annotations

import configparser
import json
from dataclasses import asdict, dataclass, field

from .circuit import CircuitSpec, fluxonium, nmon, split_transmon, transmon

__all__ = ["ConfigError", "RunConfig", "parse_config", "load_config_file"]

TASKS = (
    "spectrum",
    "sweep",
    "phase-diagram",
    "matrix-elements",
    "rabi",
    "kappa-null",
    "threshold",
)

_TASK_SECTIONS = {
    "sweep": "sweep",
    "phase-diagram": "phase_diagram",
    "rabi": "rabi",
    "threshold": "threshold",
    "matrix-elements": "matrix_elements",
}


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending key."""


@dataclass(frozen=True)
class SweepConfig:
    param: str
    start: float
    stop: float
    points: int
    endpoint: bool = True


@dataclass(frozen=True)
class DiagramConfig:
    beta_start: float
    beta_stop: float
    beta_points: int
    eta_start: float
    eta_stop: float
    eta_points: int


@dataclass(frozen=True)
class RabiConfig:
    amplitude: float
    duration: float
    frequency: float | None = None  # None: drive at the qubit frequency
    phase: float = 0.0
    envelope: str = "constant"
    ramp_ns: float = 0.0
    initial_level: int = 0
    step: float | None = None


@dataclass(frozen=True)
class ThresholdConfig:
    frequency: float | None = None
    horizon: float | None = None
    target_pop: float = 0.95


@dataclass(frozen=True)
class MatrixElementsConfig:
    normalize: bool = True


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    format: str = "csv"


@dataclass(frozen=True)
class RunConfig:
    task: str
    circuit: CircuitSpec
    levels: int = 8
    tol: float = 1e-10
    me_floor: float = 1e-6
    rescale_omega01: float | None = None
    sweep: SweepConfig | None = None
    diagram: DiagramConfig | None = None
    rabi: RabiConfig | None = None
    threshold: ThresholdConfig | None = None
    matrix_elements: MatrixElementsConfig = field(default_factory=MatrixElementsConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    resolved: dict = field(default_factory=dict, compare=False)


class _Section:
    """Typed key access with key-path error messages and use tracking."""

    def __init__(self, name: str, items: dict[str, str]):
        self.name = name
        self.items = dict(items)
        self.used: set[str] = set()

    def _raw(self, key: str):
        self.used.add(key)
        return self.items.get(key)

    def has(self, key: str) -> bool:
        return key in self.items

    def string(self, key: str, default: str | None = None, choices=None) -> str | None:
        raw = self._raw(key)
        value = default if raw is None else raw.strip()
        if value is not None and choices is not None and value not in choices:
            raise ConfigError(
                f"{self.name}.{key}: expected one of {sorted(choices)}, got {value!r}"
            )
        return value

    def floating(self, key: str, default=None, allow_auto: bool = False):
        raw = self._raw(key)
        if raw is None:
            return default
        raw = raw.strip()
        if allow_auto and raw == "auto":
            return None
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{self.name}.{key}: expected a number, got {raw!r}") from None

    def integer(self, key: str, default=None):
        raw = self._raw(key)
        if raw is None:
            return default
        try:
            return int(raw.strip())
        except ValueError:
            raise ConfigError(f"{self.name}.{key}: expected an integer, got {raw!r}") from None

    def boolean(self, key: str, default=None):
        raw = self._raw(key)
        if raw is None:
            return default
        lowered = raw.strip().lower()
        if lowered in ("true", "yes", "1", "on"):
            return True
        if lowered in ("false", "no", "0", "off"):
            return False
        raise ConfigError(f"{self.name}.{key}: expected a boolean, got {raw!r}") from None

    def require(self, key: str) -> None:
        if key not in self.items:
            raise ConfigError(f"{self.name}.{key}: required key is missing")

    def reject_unknown(self) -> None:
        unknown = set(self.items) - self.used
        if unknown:
            key = sorted(unknown)[0]
            raise ConfigError(f"unknown key {self.name}.{key}")


def _known_sections() -> set[str]:
    return {"circuit", "task", "output", *_TASK_SECTIONS.values()}


def _build_circuit(section: _Section) -> CircuitSpec:
    preset = section.string(
        "preset", default="nmon",
        choices={"nmon", "transmon", "split_transmon", "fluxonium"},
    )
    ng = section.floating("ng", default=0.0)
    phi_ext = section.floating("phi_ext", default=0.0)

    def energies_from_ratios(require_pair: bool) -> tuple[float, float, float]:
        has_ratio = section.has("beta") or section.has("eta")
        has_energy = section.has("ej_n") or section.has("ej_m")
        if has_ratio and has_energy:
            raise ConfigError(
                "circuit.beta: give either beta/eta ratios or ej_n/ej_m energies, not both"
            )
        if has_ratio:
            beta = section.floating("beta", default=0.0)
            eta = section.floating("eta", default=0.0)
            ec = section.floating("ec", default=1.0)
            return beta * ec, eta * ec, ec
        if require_pair:
            section.require("ej_n")
        section.require("ec")
        ej_n = section.floating("ej_n", default=0.0)
        ej_m = section.floating("ej_m", default=0.0)
        ec = section.floating("ec")
        return ej_n, ej_m, ec

    try:
        if preset == "transmon":
            if section.has("beta"):
                ec = section.floating("ec", default=1.0)
                ej = section.floating("beta") * ec
            else:
                section.require("ej")
                section.require("ec")
                ej = section.floating("ej")
                ec = section.floating("ec")
            spec = transmon(ej, ec, ng=ng)
        elif preset == "split_transmon":
            section.require("e_sum")
            section.require("ec")
            spec = split_transmon(
                section.floating("e_sum"),
                section.floating("d", default=0.0),
                section.floating("ec"),
                ng=ng,
                phi_ext=phi_ext,
            )
        elif preset == "fluxonium":
            ej_n, ej_m, ec = energies_from_ratios(require_pair=True)
            spec = fluxonium(ej_n, ej_m, ec, ng=ng, phi_ext=phi_ext)
        else:
            section.require("n")
            section.require("m")
            n = section.integer("n")
            m = section.integer("m")
            kappa = section.floating("kappa", default=0.5)
            ej_n, ej_m, ec = energies_from_ratios(require_pair=True)
            spec = nmon(n, m, ej_n, ej_m, ec, kappa=kappa, ng=ng, phi_ext=phi_ext)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"circuit: {exc}") from exc
    section.reject_unknown()
    return spec


def parse_config(text: str, task: str | None = None) -> RunConfig:
    """Parse and validate a configuration document.

    ``task`` (typically the CLI subcommand) must agree with the
    document's ``[task] name`` when both are present.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc

    known = _known_sections()
    for name in parser.sections():
        if name not in known:
            raise ConfigError(f"unknown section [{name}]")

    def section(name: str) -> _Section:
        return _Section(name, dict(parser.items(name)) if parser.has_section(name) else {})

    task_section = section("task")
    named = task_section.string("name", default=None, choices=set(TASKS))
    if task is None and named is None:
        raise ConfigError("task.name: no task given (set it or use a subcommand)")
    if task is not None and named is not None and task != named:
        raise ConfigError(f"task.name: config says {named!r} but the command is {task!r}")
    chosen = task or named

    if not parser.has_section("circuit"):
        raise ConfigError("circuit: required section is missing")
    circuit = _build_circuit(section("circuit"))

    levels = task_section.integer("levels", default=8)
    if levels < 2:
        raise ConfigError(f"task.levels: need at least 2 tracked levels, got {levels}")
    tol = task_section.floating("tol", default=1e-10)
    if tol <= 0:
        raise ConfigError(f"task.tol: must be positive, got {tol}")
    me_floor = task_section.floating("me_floor", default=1e-6)
    rescale = task_section.floating("rescale_omega01", default=None)
    if rescale is not None and rescale <= 0:
        raise ConfigError(f"task.rescale_omega01: must be positive, got {rescale}")
    task_section.reject_unknown()

    out_section = section("output")
    output = OutputConfig(
        directory=out_section.string("directory", default="out"),
        format=out_section.string("format", default="csv", choices={"csv", "json"}),
    )
    out_section.reject_unknown()

    sweep = diagram = rabi = threshold = None
    matrix_elements = MatrixElementsConfig()

    if chosen == "sweep":
        sec = section("sweep")
        sec.require("param")
        sec.require("start")
        sec.require("stop")
        sec.require("points")
        sweep = SweepConfig(
            param=sec.string("param", choices={"ng", "phi_ext", "kappa"}),
            start=sec.floating("start"),
            stop=sec.floating("stop"),
            points=sec.integer("points"),
            endpoint=sec.boolean("endpoint", default=True),
        )
        if sweep.points < 1:
            raise ConfigError(f"sweep.points: must be positive, got {sweep.points}")
        sec.reject_unknown()
    elif chosen == "phase-diagram":
        sec = section("phase_diagram")
        for key in ("beta_start", "beta_stop", "beta_points",
                    "eta_start", "eta_stop", "eta_points"):
            sec.require(key)
        diagram = DiagramConfig(
            beta_start=sec.floating("beta_start"),
            beta_stop=sec.floating("beta_stop"),
            beta_points=sec.integer("beta_points"),
            eta_start=sec.floating("eta_start"),
            eta_stop=sec.floating("eta_stop"),
            eta_points=sec.integer("eta_points"),
        )
        sec.reject_unknown()
    elif chosen == "rabi":
        sec = section("rabi")
        sec.require("amplitude")
        sec.require("duration")
        rabi = RabiConfig(
            amplitude=sec.floating("amplitude"),
            duration=sec.floating("duration"),
            frequency=sec.floating("frequency", default=None, allow_auto=True),
            phase=sec.floating("phase", default=0.0),
            envelope=sec.string("envelope", default="constant",
                                choices={"constant", "ramped"}),
            ramp_ns=sec.floating("ramp_ns", default=0.0),
            initial_level=sec.integer("initial_level", default=0),
            step=sec.floating("step", default=None, allow_auto=True),
        )
        sec.reject_unknown()
    elif chosen == "threshold":
        sec = section("threshold")
        threshold = ThresholdConfig(
            frequency=sec.floating("frequency", default=None, allow_auto=True),
            horizon=sec.floating("horizon", default=None, allow_auto=True),
            target_pop=sec.floating("target_pop", default=0.95),
        )
        if not 0.0 <= threshold.target_pop < 1.0:
            raise ConfigError(
                f"threshold.target_pop: must be within [0, 1), got {threshold.target_pop}"
            )
        sec.reject_unknown()
    elif chosen == "matrix-elements":
        sec = section("matrix_elements")
        matrix_elements = MatrixElementsConfig(
            normalize=sec.boolean("normalize", default=True)
        )
        sec.reject_unknown()

    resolved = {
        "task": {
            "name": chosen, "levels": levels, "tol": tol, "me_floor": me_floor,
            "rescale_omega01": rescale,
        },
        "circuit": asdict(circuit),
        "output": {"directory": output.directory, "format": output.format},
    }
    for name, cfg in (("sweep", sweep), ("phase_diagram", diagram), ("rabi", rabi),
                      ("threshold", threshold)):
        if cfg is not None:
            resolved[name] = asdict(cfg)
    if chosen == "matrix-elements":
        resolved["matrix_elements"] = asdict(matrix_elements)

    return RunConfig(
        task=chosen, circuit=circuit, levels=levels, tol=tol, me_floor=me_floor,
        rescale_omega01=rescale, sweep=sweep, diagram=diagram, rabi=rabi,
        threshold=threshold, matrix_elements=matrix_elements, output=output,
        resolved=resolved,
    )


def _overrides_to_document(parser: configparser.ConfigParser, overrides) -> None:
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        path, value = item.split("=", 1)
        if "." not in path:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        sect, key = path.split(".", 1)
        sect, key = sect.strip(), key.strip()
        if not parser.has_section(sect):
            parser.add_section(sect)
        parser.set(sect, key, value.strip())


def load_config_file(path: str, task: str | None = None, overrides=None) -> RunConfig:
    """Load a run configuration from an INI document or a run manifest.

    A ``.json`` path is treated as a manifest produced by a previous run;
    its resolved configuration reproduces that run.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    if path.endswith(".json"):
        with open(path, "r", encoding="utf-8") as handle:
            manifest = json.load(handle)
        resolved = manifest.get("config", manifest)
        mapping = {}
        for sect, values in resolved.items():
            if not isinstance(values, dict):
                raise ConfigError(f"manifest section [{sect}] is not a table")
            mapping[sect] = {
                key: ("" if value is None else str(value))
                for key, value in values.items()
                if value is not None
            }
        # a manifest stores the fully resolved circuit, not preset inputs
        circuit = mapping.get("circuit", {})
        if {"n_arm", "m_arm"} <= set(circuit):
            mapping["circuit"] = {
                "preset": "nmon",
                "n": circuit["n_arm"], "m": circuit["m_arm"],
                "ej_n": circuit["ej_n"], "ej_m": circuit["ej_m"],
                "ec": circuit["ec"], "kappa": circuit["kappa"],
                "ng": circuit["ng"], "phi_ext": circuit["phi_ext"],
            }
        parser.read_dict(mapping)
    else:
        with open(path, "r", encoding="utf-8") as handle:
            parser.read_file(handle)

    _overrides_to_document(parser, overrides)
    rendered = []
    for sect in parser.sections():
        rendered.append(f"[{sect}]")
        rendered.extend(f"{key} = {value}" for key, value in parser.items(sect))
    return parse_config("\n".join(rendered), task=task)
