"""
Experiment configuration files.

An experiment is one YAML mapping:

    kind: pn-psd
    seed: 7
    output: set_a_psd
    include: preset:set-a
    sweep:
      f_min_hz: 1.0e4
      f_max_hz: 1.0e8

`include` takes a path or a list of paths. Relative paths resolve against
the including file; `preset:NAME` names a packaged file under presets/.
Included mappings are merged in order and the including document wins.
"""

import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

from ruamel.yaml import YAML
from ruamel.yaml.error import YAMLError

from ..antenna_array import (
    AngularGrid,
    ArrayGeometry,
    ElementPattern,
    TransmitarrayConfig,
    load_mask,
    mask_from_dict,
)
from ..antenna_array.pattern import PRINCIPAL_CUTS
from ..errors import ConfigIOError, ParameterError, raise_if_violations
from ..ofdm_link import LinkExperiment, OfdmConfig, PrbAllocation, PtrsConfig
from ..pa_models import DISTORTION_FORMULAS, GmpStructure, Poly3Params
from ..phase_noise import PllPnParams, PoleZeroPnParams

PRESET_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "presets")
PRESET_PREFIX = "preset:"

EXPERIMENT_KINDS = (
    "pn-psd", "pn-synth", "pa-bussgang", "pa-gmp-fit", "array-pattern", "ta-budget", "link-bler",
)
BLOCK_KEYS = (
    "phase_noise", "pll", "sweep", "synthesis", "pa", "bussgang", "gmp", "array", "element",
    "steering", "grid", "transmitarray", "mask", "link",
)
TOP_LEVEL_KEYS = ("kind", "seed", "output", "threads", "json", "description") + BLOCK_KEYS
# Keys that do not change emitted bytes stay out of the config hash
UNHASHED_KEYS = ("threads",)

GRID_KINDS = ("sphere", "hemisphere", "cut")


def _yaml() -> YAML:
    return YAML(typ="safe", pure=True)


def preset_path(name: str) -> str:
    return os.path.join(PRESET_DIR, f"{name}.yaml")


def list_presets() -> List[Tuple[str, str, str]]:
    """
    (name, kind, description) for every packaged preset, sorted by name.

    Parameter-block presets meant for `include` have an empty kind.
    """
    presets = []
    for file_name in sorted(os.listdir(PRESET_DIR)):
        if not file_name.endswith(".yaml"):
            continue
        data = read_document(os.path.join(PRESET_DIR, file_name))
        presets.append((file_name[:-len(".yaml")], str(data.get("kind", "")),
                        str(data.get("description", ""))))
    return presets


def read_document(path: str) -> Dict[str, Any]:
    """
    Parse one YAML file without resolving includes.

    Raises:
        ConfigIOError: If the file cannot be read, is not valid YAML or is
            not a mapping
    """
    try:
        with open(path) as f:
            data = _yaml().load(f)
    except OSError as e:
        raise ConfigIOError(f"Cannot read config file {path}: {str(e)}")
    except YAMLError as e:
        raise ConfigIOError(f"Corrupt config file {path}: {str(e)}")
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigIOError(f"Config file {path} must hold a mapping, got {type(data).__name__}")
    return data


def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Recursive merge of nested mappings; values in override win."""
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _resolve_include(ref: str, base_dir: str) -> str:
    if ref.startswith(PRESET_PREFIX):
        name = ref[len(PRESET_PREFIX):]
        path = preset_path(name)
        if not os.path.isfile(path):
            raise ParameterError(f"Unknown preset {name!r}", [("include", f"no preset {name!r}")])
        return path
    return ref if os.path.isabs(ref) else os.path.join(base_dir, ref)


def load_document(path: str, _stack: Tuple[str, ...] = ()) -> Dict[str, Any]:
    """
    Parse a YAML file and merge in everything it includes.

    Raises:
        ConfigIOError: On unreadable or corrupt files
        ParameterError: On include cycles or unknown presets
    """
    real = os.path.realpath(path)
    if real in _stack:
        raise ParameterError(f"Include cycle through {path}", [("include", "cycle detected")])
    data = read_document(path)
    refs = data.pop("include", None) or []
    if isinstance(refs, str):
        refs = [refs]
    base_dir = os.path.dirname(os.path.abspath(path))
    merged: Dict[str, Any] = {}
    for ref in refs:
        logging.debug(f"Including {ref} into {path}")
        merged = deep_merge(merged, load_document(_resolve_include(str(ref), base_dir),
                                                  _stack + (real,)))
    return deep_merge(merged, data)


@dataclass
class ExperimentConfig:
    """
    One experiment: its kind, master seed, output base name and the
    kind-specific parameter blocks as plain mappings.

    Attributes:
        kind: One of EXPERIMENT_KINDS
        seed: Master seed for every random stream of the run
        output: Base file name of the artifacts (no directories)
        threads: Worker threads for Monte-Carlo kinds
        json_mirror: Also write a JSON copy of every CSV
        blocks: Kind-specific mappings keyed by block name
        description: Free text
        source_dir: Directory relative data paths resolve against
    """
    kind: str
    seed: int = 0
    output: str = "experiment"
    threads: int = 1
    json_mirror: bool = False
    blocks: Dict[str, Any] = field(default_factory=dict)
    description: str = ""
    source_dir: str = field(default=".", compare=False)

    def __post_init__(self) -> None:
        violations = []
        if self.kind not in EXPERIMENT_KINDS:
            violations.append(("kind", f"must be one of {', '.join(EXPERIMENT_KINDS)}, "
                                       f"got {self.kind!r}"))
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or not \
                0 <= self.seed < 2 ** 64:
            violations.append(("seed", "must be an unsigned 64-bit integer"))
        if not isinstance(self.threads, int) or self.threads < 1:
            violations.append(("threads", "must be a positive integer"))
        if not self.output or os.path.basename(str(self.output)) != str(self.output):
            violations.append(("output", "must be a bare file name"))
        for key, value in self.blocks.items():
            if key not in BLOCK_KEYS:
                violations.append((key, "unknown block"))
            elif not isinstance(value, dict):
                violations.append((key, "must be a mapping"))
        raise_if_violations("experiment config", violations)

    @classmethod
    def from_dict(cls, data: Dict[str, Any], source_dir: str = ".") -> "ExperimentConfig":
        unknown = sorted(str(k) for k in data if k not in TOP_LEVEL_KEYS)
        if unknown:
            raise ParameterError.from_violations("experiment config",
                                                 [(k, "unknown key") for k in unknown])
        if "kind" not in data:
            raise ParameterError.from_violations("experiment config", [("kind", "missing")])
        return cls(
            kind=data["kind"],
            seed=data.get("seed", 0),
            output=str(data.get("output", str(data["kind"]).replace("-", "_"))),
            threads=data.get("threads", 1),
            json_mirror=bool(data.get("json", False)),
            blocks={k: data[k] for k in BLOCK_KEYS if k in data},
            description=str(data.get("description", "")),
            source_dir=source_dir,
        )

    @classmethod
    def load(cls, path: str) -> "ExperimentConfig":
        return cls.from_dict(load_document(path), os.path.dirname(os.path.abspath(path)))

    def to_dict(self) -> Dict[str, Any]:
        data = {"kind": self.kind, "seed": self.seed, "output": self.output,
                "threads": self.threads, "json": self.json_mirror}
        if self.description:
            data["description"] = self.description
        data.update(self.blocks)
        return data

    def config_hash(self) -> str:
        """SHA-256 over the canonical JSON form of everything that shapes the outputs."""
        content = {k: v for k, v in self.to_dict().items() if k not in UNHASHED_KEYS}
        canonical = json.dumps(content, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def block(self, name: str) -> Dict[str, Any]:
        return dict(self.blocks.get(name) or {})

    def resolve_path(self, path: str) -> str:
        return path if os.path.isabs(path) else os.path.join(self.source_dir, path)


class _Collector:
    """Runs block decoders and gathers their violations under config-path locators."""

    def __init__(self) -> None:
        self.violations: List[Tuple[str, str]] = []

    def add(self, locator: str, message: str) -> None:
        self.violations.append((locator, message))

    def decode(self, prefix: str, decoder: Callable, *args) -> Any:
        try:
            return decoder(*args)
        except ParameterError as e:
            if e.violations:
                self.violations.extend((f"{prefix}.{loc}", msg) for loc, msg in e.violations)
            else:
                self.add(prefix, str(e))
        except KeyError as e:
            self.add(f"{prefix}.{e.args[0]}", "missing")
        except (TypeError, ValueError) as e:
            self.add(prefix, str(e))
        return None


def _pop_unknown(collector: _Collector, prefix: str, block: Dict, known: Tuple[str, ...]) -> None:
    for key in sorted(str(k) for k in block if k not in known):
        collector.add(f"{prefix}.{key}", "unknown key")


def _sweep(block: Dict) -> Dict[str, Any]:
    sweep = {
        "f_min_hz": float(block.get("f_min_hz", 1e3)),
        "f_max_hz": float(block.get("f_max_hz", 1e8)),
        "points_per_decade": int(block.get("points_per_decade", 20)),
        "carriers_ghz": [float(c) for c in block.get("carriers_ghz", [])],
    }
    violations = []
    if not 0 < sweep["f_min_hz"] < sweep["f_max_hz"]:
        violations.append(("f_min_hz", "need 0 < f_min_hz < f_max_hz"))
    if sweep["points_per_decade"] < 1:
        violations.append(("points_per_decade", "must be at least 1"))
    for i, carrier in enumerate(sweep["carriers_ghz"]):
        if not carrier > 0:
            violations.append((f"carriers_ghz[{i}]", "must be positive"))
    raise_if_violations("sweep", violations)
    return sweep


def _synthesis(block: Dict) -> Dict[str, Any]:
    synthesis = {
        "carrier_ghz": block.get("carrier_ghz"),
        "sample_rate_hz": float(block.get("sample_rate_hz", 122.88e6)),
        "n_samples": int(block.get("n_samples", 2 ** 18)),
        "sideband": str(block.get("sideband", "ssb")),
        "segment_len": int(block.get("segment_len", 4096)),
        "save_trajectory": bool(block.get("save_trajectory", False)),
    }
    violations = []
    if synthesis["carrier_ghz"] is not None and not float(synthesis["carrier_ghz"]) > 0:
        violations.append(("carrier_ghz", "must be positive"))
    if not synthesis["sample_rate_hz"] > 0:
        violations.append(("sample_rate_hz", "must be positive"))
    if synthesis["sideband"] not in ("ssb", "dsb"):
        violations.append(("sideband", "must be 'ssb' or 'dsb'"))
    if not 8 <= synthesis["segment_len"] <= synthesis["n_samples"]:
        violations.append(("segment_len", "must lie in [8, n_samples]"))
    raise_if_violations("synthesis", violations)
    return synthesis


def _pa(block: Dict) -> Poly3Params:
    if "gain_db" in block:
        return Poly3Params.gain_phase(float(block["gain_db"]), float(block.get("phase_deg", 0.0)))
    return Poly3Params.from_dict(block)


def _bussgang(block: Dict) -> Dict[str, Any]:
    powers = [float(p) for p in block["input_powers_db"]]
    formulas = [str(f) for f in block.get("formulas", DISTORTION_FORMULAS)]
    violations = []
    if not powers:
        violations.append(("input_powers_db", "at least one input power is required"))
    for i, formula in enumerate(formulas):
        if formula not in DISTORTION_FORMULAS:
            violations.append((f"formulas[{i}]", f"must be one of {DISTORTION_FORMULAS}"))
    n_samples = int(block.get("n_samples", 10 ** 6))
    if n_samples < 2:
        violations.append(("n_samples", "must be at least 2"))
    raise_if_violations("bussgang", violations)
    return {"input_powers_db": powers, "formulas": formulas, "n_samples": n_samples}


def _gmp(block: Dict, config: ExperimentConfig) -> Dict[str, Any]:
    structure = GmpStructure.from_dict(block["structure"])
    ridge = block.get("ridge")
    violations = []
    if ridge is not None and not float(ridge) >= 0:
        violations.append(("ridge", "must be non-negative"))
    data_file = block.get("data")
    synthetic = dict(block.get("synthetic") or {})
    if data_file is None and not synthetic:
        violations.append(("data", "give a CSV data file or a synthetic block"))
    if data_file is not None:
        data_file = config.resolve_path(str(data_file))
    if synthetic:
        synthetic.setdefault("n_samples", 20000)
        synthetic.setdefault("input_power_db", -10.0)
        synthetic.setdefault("memory_taps", [1.0])
        synthetic.setdefault("noise_power_db", None)
        if int(synthetic["n_samples"]) < 1:
            violations.append(("synthetic.n_samples", "must be positive"))
        if not synthetic["memory_taps"]:
            violations.append(("synthetic.memory_taps", "at least one tap is required"))
    raise_if_violations("gmp", violations)
    return {"structure": structure, "ridge": None if ridge is None else float(ridge),
            "data": data_file, "synthetic": synthetic}


def _geometry(block: Dict) -> ArrayGeometry:
    if "positions" in block:
        return ArrayGeometry.from_positions(block["positions"])
    return ArrayGeometry.periodic(int(block["rows"]), int(block["cols"]),
                                  float(block.get("spacing_x", 0.5)),
                                  block.get("spacing_y"))


def _steering(block: Dict) -> Dict[str, Any]:
    steering = {"theta_deg": float(block.get("theta_deg", 0.0)),
                "phi_deg": float(block.get("phi_deg", 0.0)),
                "phase_bits": block.get("phase_bits")}
    violations = []
    if not 0 <= steering["theta_deg"] <= 90:
        violations.append(("theta_deg", "must lie in [0, 90]"))
    if steering["phase_bits"] is not None and int(steering["phase_bits"]) < 1:
        violations.append(("phase_bits", "must be at least 1"))
    raise_if_violations("steering", violations)
    return steering


def build_grid(block: Dict, default_kind: str = "sphere") -> AngularGrid:
    kind = block.get("kind", default_kind)
    if kind not in GRID_KINDS:
        raise ParameterError.from_violations("grid", [("kind", f"must be one of {GRID_KINDS}")])
    if kind == "cut":
        cut = block.get("phi_deg", 0.0)
        phi = PRINCIPAL_CUTS[cut] if isinstance(cut, str) and cut in PRINCIPAL_CUTS else cut
        return AngularGrid.cut(float(phi), float(block.get("step_deg", 0.5)),
                               float(block.get("span_deg", 90.0)))
    step = float(block.get("step_deg", 2.0))
    if not step > 0:
        raise ParameterError.from_violations("grid", [("step_deg", "must be positive")])
    return AngularGrid.sphere(step) if kind == "sphere" else AngularGrid.hemisphere(step)


def _mask(block: Dict, config: ExperimentConfig) -> Dict[str, Any]:
    cut = block.get("principal_cut", "xz")
    if isinstance(cut, str) and cut not in PRINCIPAL_CUTS:
        raise ParameterError.from_violations(
            "mask", [("principal_cut", f"must be one of {sorted(PRINCIPAL_CUTS)} or a number")])
    if "file" in block:
        mask = load_mask(config.resolve_path(str(block["file"])))
    else:
        mask = mask_from_dict(block)
    min_angle = block.get("min_angle_deg")
    return {"mask": mask, "principal_cut": cut,
            "min_angle_deg": None if min_angle is None else float(min_angle)}


LINK_KEYS = ("n_subcarriers", "cp_len", "subcarrier_spacing_khz", "n_rx", "modulation", "n_prbs",
             "ptrs", "carrier_ghz", "pn_sides", "channel", "snr_db", "trials", "fec",
             "correct_cpe", "block_bits")


def _link(block: Dict, phase_noise: Optional[PoleZeroPnParams], threads: int) -> LinkExperiment:
    ofdm = OfdmConfig(
        n_subcarriers=int(block.get("n_subcarriers", 1024)),
        cp_len=int(block.get("cp_len", 72)),
        subcarrier_spacing_hz=float(block.get("subcarrier_spacing_khz", 120.0)) * 1e3,
        n_rx=int(block.get("n_rx", 1)),
        modulation=str(block.get("modulation", "64QAM")),
    )
    carrier = block.get("carrier_ghz")
    block_bits = block.get("block_bits")
    return LinkExperiment(
        ofdm=ofdm,
        allocation=PrbAllocation(int(block.get("n_prbs", 32))),
        ptrs=PtrsConfig.from_dict(dict(block.get("ptrs") or {})),
        phase_noise=phase_noise,
        carrier_hz=None if carrier is None else float(carrier) * 1e9,
        pn_sides=str(block.get("pn_sides", "both")),
        channel=str(block.get("channel", "flat-awgn")),
        snr_db=tuple(float(s) for s in block.get("snr_db", (10.0,))),
        trials=int(block.get("trials", 100)),
        fec=str(block.get("fec", "convolutional")),
        correct_cpe=bool(block.get("correct_cpe", True)),
        block_bits=None if block_bits is None else int(block_bits),
        threads=threads,
    )


def _require(collector: _Collector, config: ExperimentConfig, *names: str) -> bool:
    missing = [n for n in names if n not in config.blocks]
    for name in missing:
        collector.add(name, f"block required by kind {config.kind}")
    return not missing


def build_plan(config: ExperimentConfig) -> Dict[str, Any]:
    """
    Decode every block the experiment kind uses into module records.

    Returns:
        Mapping of block name to decoded record

    Raises:
        ParameterError: Listing every violation with its config-path locator
    """
    c = _Collector()
    plan: Dict[str, Any] = {}
    kind = config.kind

    if kind in ("pn-psd", "pn-synth", "link-bler") and "phase_noise" in config.blocks:
        plan["phase_noise"] = c.decode("phase_noise", PoleZeroPnParams.from_dict,
                                       config.block("phase_noise"))

    if kind == "pn-psd":
        if "pll" in config.blocks and "phase_noise" in config.blocks:
            c.add("pll", "give either a phase_noise or a pll block, not both")
        elif "pll" in config.blocks:
            plan["pll"] = c.decode("pll", PllPnParams.from_dict, config.block("pll"))
        else:
            _require(c, config, "phase_noise")
        plan["sweep"] = c.decode("sweep", _sweep, config.block("sweep"))

    elif kind == "pn-synth":
        _require(c, config, "phase_noise")
        plan["synthesis"] = c.decode("synthesis", _synthesis, config.block("synthesis"))

    elif kind == "pa-bussgang":
        if _require(c, config, "pa", "bussgang"):
            plan["pa"] = c.decode("pa", _pa, config.block("pa"))
            plan["bussgang"] = c.decode("bussgang", _bussgang, config.block("bussgang"))

    elif kind == "pa-gmp-fit":
        if _require(c, config, "gmp"):
            plan["gmp"] = c.decode("gmp", _gmp, config.block("gmp"), config)
        plan["pa"] = c.decode("pa", _pa, config.block("pa") or {"theta1": 1.0})

    elif kind == "array-pattern":
        if _require(c, config, "array"):
            array = config.block("array")
            plan["geometry"] = c.decode("array", _geometry, array)
            jitter = array.get("jitter_x")
            plan["jitter_x"] = None if jitter is None else float(jitter)
        plan["element"] = c.decode("element", ElementPattern.from_dict, config.block("element"))
        plan["steering"] = c.decode("steering", _steering, config.block("steering"))
        plan["grid"] = c.decode("grid", build_grid, config.block("grid"))

    elif kind == "ta-budget":
        if _require(c, config, "transmitarray"):
            plan["transmitarray"] = c.decode("transmitarray", TransmitarrayConfig.from_dict,
                                             config.block("transmitarray"))
        if "grid" in config.blocks:
            plan["grid"] = c.decode("grid", build_grid, config.block("grid"), "cut")
        if "mask" in config.blocks:
            plan["mask"] = c.decode("mask", _mask, config.block("mask"), config)

    elif kind == "link-bler":
        if _require(c, config, "link"):
            link = config.block("link")
            _pop_unknown(c, "link", link, LINK_KEYS)
            plan["link"] = c.decode("link", _link, link, plan.get("phase_noise"),
                                    config.threads)

    for name in BLOCK_KEYS:
        if name in config.blocks and not _uses_block(kind, name):
            logging.warning(f"Block {name!r} is not used by kind {kind}")
    raise_if_violations("experiment config", c.violations)
    return plan


KIND_BLOCKS: Dict[str, Tuple[str, ...]] = {
    "pn-psd": ("phase_noise", "pll", "sweep"),
    "pn-synth": ("phase_noise", "synthesis"),
    "pa-bussgang": ("pa", "bussgang"),
    "pa-gmp-fit": ("gmp", "pa"),
    "array-pattern": ("array", "element", "steering", "grid"),
    "ta-budget": ("transmitarray", "grid", "mask"),
    "link-bler": ("phase_noise", "link"),
}


def _uses_block(kind: str, name: str) -> bool:
    return name in KIND_BLOCKS[kind]


@dataclass
class ValidationReport:
    path: str
    violations: List[Tuple[str, str]] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations


def validate_config(path: str) -> ValidationReport:
    """
    Check a config file against every invariant of the records it describes.

    Raises:
        ConfigIOError: If the file (or an include) is unreadable or corrupt
    """
    report = ValidationReport(path)
    try:
        config = ExperimentConfig.load(path)
        build_plan(config)
    except ParameterError as e:
        report.violations = e.violations or [("config", str(e))]
    logging.info(f"Validated {path}: {len(report.violations)} violation(s)")
    return report
