"""Declarative key-value config files for scenarios and experiments.

Files hold ``key = value`` lines; '#' starts a comment and blank lines
are ignored.  Lists are comma separated.  Validation is line anchored:
every diagnostic carries the line number the key appeared on (0 for
file-level problems such as a missing required key).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from .propagation import Band, HighShfConstants, LowShfConstants, RadioParams
from .scenario import Building

__all__ = [
    "ConfigError",
    "Diagnostic",
    "ValidationReport",
    "ScenarioConfig",
    "ExperimentConfig",
    "EXPERIMENT_KINDS",
    "load_scenario",
    "load_experiment",
    "validate_scenario",
    "validate_experiment",
    "validate_config",
]

EXPERIMENT_KINDS = (
    "penetration_curve",
    "worst_case_power_curve",
    "angle_power_curve",
    "gd_sweep",
    "pso_sweep",
    "table2",
    "multi_uav_compare",
)


class ConfigError(ValueError):
    """Invalid configuration file; message carries line diagnostics."""


@dataclass(frozen=True)
class Diagnostic:
    line: int
    message: str
    severity: str = "error"  # or "warning"

    def __str__(self) -> str:
        return f"line {self.line}: {self.severity}: {self.message}"


@dataclass
class ValidationReport:
    path: str
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def error(self, line: int, message: str) -> None:
        self.diagnostics.append(Diagnostic(line, message, "error"))

    def warn(self, line: int, message: str) -> None:
        self.diagnostics.append(Diagnostic(line, message, "warning"))

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == "error"]

    @property
    def warnings(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == "warning"]

    @property
    def ok(self) -> bool:
        return not self.errors

    def __str__(self) -> str:
        lines = [f"{self.path}: {'OK' if self.ok else 'INVALID'}"]
        lines += [f"  {d}" for d in self.diagnostics]
        return "\n".join(lines)


def _parse_kv(path: Path, report: ValidationReport) -> dict[str, tuple[str, int]]:
    entries: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            report.error(lineno, f"expected 'key = value', got {raw.strip()!r}")
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            report.error(lineno, "empty key")
            continue
        if key in entries:
            report.error(lineno, f"duplicate key {key!r} (first on line {entries[key][1]})")
            continue
        entries[key] = (value, lineno)
    return entries


# ---------------------------------------------------------------------------
# field parsing helpers


def _float(raw: str) -> float:
    return float(raw)


def _int(raw: str) -> int:
    return int(raw)


def _bool(raw: str) -> bool:
    lowered = raw.lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")


def _float_list(raw: str) -> list[float]:
    items = [part.strip() for part in raw.split(",") if part.strip()]
    return [float(part) for part in items]


def _int_list(raw: str) -> list[int]:
    items = [part.strip() for part in raw.split(",") if part.strip()]
    return [int(part) for part in items]


def _str_list(raw: str) -> list[str]:
    return [part.strip() for part in raw.split(",") if part.strip()]


def _choice(options: tuple[str, ...]) -> Callable[[str], str]:
    def parse(raw: str) -> str:
        value = raw.lower()
        if value not in options:
            raise ValueError(f"expected one of {options}, got {raw!r}")
        return value

    return parse


@dataclass(frozen=True)
class _Field:
    parse: Callable[[str], object]
    default: object = None
    required: bool = False


class _Reader:
    """Pull typed values out of parsed entries, collecting diagnostics."""

    def __init__(self, entries: dict[str, tuple[str, int]], report: ValidationReport):
        self.entries = entries
        self.report = report
        self.used: set[str] = set()

    def get(self, key: str, spec: _Field):
        self.used.add(key)
        if key not in self.entries:
            if spec.required:
                self.report.error(0, f"missing required key {key!r}")
            return spec.default
        raw, line = self.entries[key]
        try:
            return spec.parse(raw)
        except ValueError as exc:
            self.report.error(line, f"{key}: {exc}")
            return spec.default

    def line_of(self, key: str) -> int:
        return self.entries[key][1] if key in self.entries else 0

    def check_unknown(self) -> None:
        for key, (_, line) in self.entries.items():
            if key not in self.used:
                self.report.error(line, f"unknown key {key!r}")


# ---------------------------------------------------------------------------
# scenario config

_CONSTANT_KEYS = {
    "low_w": "w", "low_g1": "g1", "low_g2": "g2", "low_g3": "g3", "low_g4": "g4",
    "high_alpha1": "alpha1", "high_alpha2": "alpha2", "high_alpha3": "alpha3",
    "high_beta1": "beta1", "high_beta2": "beta2", "high_beta3": "beta3",
    "high_beta4": "beta4", "high_gamma1": "gamma1",
}


@dataclass
class ScenarioConfig:
    building: Building
    distribution: str
    users_per_floor: int
    seed: int
    band: Band
    frequency_ghz: float
    level_fraction: float
    noise_dbm: float
    snr_threshold_db: float
    users_file: Optional[str] = None
    low_constants: LowShfConstants = field(default_factory=LowShfConstants)
    high_constants: HighShfConstants = field(default_factory=HighShfConstants)

    def radio_params(self) -> RadioParams:
        return RadioParams(
            frequency_ghz=self.frequency_ghz,
            band=self.band,
            low_shf=self.low_constants,
            high_shf=self.high_constants,
        )


def _read_scenario(entries: dict[str, tuple[str, int]], report: ValidationReport) -> Optional[ScenarioConfig]:
    reader = _Reader(entries, report)
    x_b = reader.get("building_x", _Field(_float, required=True))
    y_b = reader.get("building_y", _Field(_float, required=True))
    z_b = reader.get("building_z", _Field(_float, required=True))
    floor_height = reader.get("floor_height", _Field(_float, 5.0))
    distribution = reader.get(
        "distribution", _Field(_choice(("symmetric", "uniform", "file")), "uniform")
    )
    users_file = reader.get("users_file", _Field(str, None))
    users_per_floor = reader.get("users_per_floor", _Field(_int, 20))
    seed = reader.get("seed", _Field(_int, 1))
    band_name = reader.get("band", _Field(_choice(("low", "high")), "low"))
    frequency = reader.get("frequency_ghz", _Field(_float, 2.0))
    level_fraction = reader.get("level_fraction", _Field(_float, 0.5))
    noise_dbm = reader.get("noise_dbm", _Field(_float, -120.0))
    snr_db = reader.get("snr_threshold_db", _Field(_float, 10.0))
    overrides = {}
    for key, attr in _CONSTANT_KEYS.items():
        value = reader.get(key, _Field(_float, None))
        if value is not None:
            overrides[attr] = value
    reader.check_unknown()

    for name, value in (("building_x", x_b), ("building_y", y_b), ("building_z", z_b)):
        if value is not None and value <= 0:
            report.error(reader.line_of(name), f"{name} must be positive, got {value}")
    if floor_height is not None and floor_height <= 0:
        report.error(reader.line_of("floor_height"), f"floor_height must be positive, got {floor_height}")
    if users_per_floor is not None and users_per_floor < 1:
        report.error(reader.line_of("users_per_floor"), "users_per_floor must be at least 1")
    if level_fraction is not None and not 0.0 < level_fraction < 1.0:
        report.error(reader.line_of("level_fraction"), "level_fraction must lie in (0, 1)")
    if frequency is not None and frequency <= 0:
        report.error(reader.line_of("frequency_ghz"), "frequency_ghz must be positive")
    if distribution == "file" and not users_file:
        report.error(0, "distribution = file requires users_file")
    if distribution == "symmetric" and users_per_floor and users_per_floor % 4 != 0:
        report.error(
            reader.line_of("users_per_floor"),
            "symmetric rosters need users_per_floor to be a multiple of 4",
        )

    # range mismatches warn but stay valid
    if band_name == "low" and frequency and not 0.45 <= frequency <= 6.0:
        report.warn(
            reader.line_of("frequency_ghz"),
            f"low band is specified for 0.45-6 GHz, got {frequency} GHz",
        )
    if band_name == "high" and frequency and frequency <= 6.0:
        report.warn(
            reader.line_of("frequency_ghz"),
            f"high band is specified above 6 GHz, got {frequency} GHz",
        )
    if None not in (z_b, floor_height) and floor_height > 0:
        ratio = z_b / floor_height
        if abs(ratio - round(ratio)) > 1e-9:
            report.warn(
                reader.line_of("building_z"),
                f"building_z {z_b} is not a whole number of {floor_height} m floors",
            )

    if not report.ok:
        return None
    low_kwargs = {k: v for k, v in overrides.items() if k in ("w", "g1", "g2", "g3", "g4")}
    high_kwargs = {k: v for k, v in overrides.items() if k not in low_kwargs}
    import warnings as _warnings

    with _warnings.catch_warnings():
        _warnings.simplefilter("ignore")  # mismatches already reported above
        building = Building(x_b, y_b, z_b, floor_height)
        band = Band.LOW_SHF if band_name == "low" else Band.HIGH_SHF
        return ScenarioConfig(
            building=building,
            distribution=distribution,
            users_per_floor=users_per_floor,
            seed=seed,
            band=band,
            frequency_ghz=frequency,
            level_fraction=level_fraction,
            noise_dbm=noise_dbm,
            snr_threshold_db=snr_db,
            users_file=users_file,
            low_constants=LowShfConstants(**low_kwargs),
            high_constants=HighShfConstants(**high_kwargs),
        )


# ---------------------------------------------------------------------------
# experiment config


@dataclass
class ExperimentConfig:
    kind: str
    scenario: Optional[ScenarioConfig]
    scenario_path: Optional[Path]
    output_dir: Path
    seed: Optional[int]
    render_figures: bool
    params: dict

    def roster_seed(self) -> int:
        if self.seed is not None:
            return self.seed
        return self.scenario.seed if self.scenario else 1


def _read_experiment(
    entries: dict[str, tuple[str, int]],
    report: ValidationReport,
    base_dir: Path,
) -> Optional[ExperimentConfig]:
    reader = _Reader(entries, report)
    kind = reader.get("kind", _Field(_choice(EXPERIMENT_KINDS), required=True))
    scenario_raw = reader.get("scenario", _Field(str, None))
    output_dir = reader.get("output_dir", _Field(str, "out"))
    seed = reader.get("seed", _Field(_int, None))
    render_figures = reader.get("render_figures", _Field(_bool, True))

    params: dict = {}
    if kind == "penetration_curve":
        params["theta_start"] = reader.get("theta_start", _Field(_float, 0.0))
        params["theta_stop"] = reader.get("theta_stop", _Field(_float, 90.0))
        params["theta_step"] = reader.get("theta_step", _Field(_float, 0.5))
    elif kind == "worst_case_power_curve":
        params["heights"] = reader.get("heights", _Field(_float_list, required=True))
        params["x_stop"] = reader.get("x_stop", _Field(_float, 300.0))
        params["x_step"] = reader.get("x_step", _Field(_float, 0.5))
    elif kind == "angle_power_curve":
        params["theta_start"] = reader.get("theta_start", _Field(_float, 5.0))
        params["theta_stop"] = reader.get("theta_stop", _Field(_float, 89.0))
        params["theta_step"] = reader.get("theta_step", _Field(_float, 0.25))
    elif kind in ("gd_sweep", "pso_sweep"):
        params["heights"] = reader.get("heights", _Field(_float_list, None))
        params["widths"] = reader.get("widths", _Field(_float_list, None))
        if kind == "pso_sweep":
            params["population"] = reader.get("population", _Field(_int, 50))
            params["iterations"] = reader.get("iterations", _Field(_int, 200))
    elif kind == "table2":
        params["heights"] = reader.get("heights", _Field(_float_list, required=True))
        params["distributions"] = reader.get(
            "distributions", _Field(_str_list, ["symmetric", "uniform"])
        )
        params["population"] = reader.get("population", _Field(_int, 50))
        params["iterations"] = reader.get("iterations", _Field(_int, 200))
    elif kind == "multi_uav_compare":
        params["split_z"] = reader.get("split_z", _Field(_float, 75.0))
        params["users_below"] = reader.get("users_below", _Field(_int, 200))
        params["users_above"] = reader.get("users_above", _Field(_int, 200))
        params["roster_seeds"] = reader.get("roster_seeds", _Field(_int_list, [1]))
        params["max_power_w"] = reader.get("max_power_w", _Field(_float, 5.0))
        params["bandwidth_hz"] = reader.get("bandwidth_hz", _Field(_float, 50e6))
        params["rate_bps"] = reader.get("rate_bps", _Field(_float, 2.2e6))
        params["noise_dbm"] = reader.get("noise_dbm", _Field(_float, -150.0))
        params["noise_watts"] = reader.get("noise_watts", _Field(_float, None))
        params["x_min"] = reader.get("x_min", _Field(_float, 25.0))
        params["x_max"] = reader.get("x_max", _Field(_float, 1000.0))
        params["y_min"] = reader.get("y_min", _Field(_float, 0.0))
        params["y_max"] = reader.get("y_max", _Field(_float, 50.0))
        params["z_min"] = reader.get("z_min", _Field(_float, 0.0))
        params["z_max"] = reader.get("z_max", _Field(_float, 1000.0))
        params["kmeans_seed"] = reader.get("kmeans_seed", _Field(_int, 0))
        params["max_k"] = reader.get("max_k", _Field(_int, 50))
        params["pso_population"] = reader.get("pso_population", _Field(_int, 50))
        params["pso_iterations"] = reader.get("pso_iterations", _Field(_int, 200))
    reader.check_unknown()

    if kind in ("worst_case_power_curve", "table2") and params.get("heights") is not None:
        if len(params["heights"]) == 0:
            report.error(reader.line_of("heights"), "sweep list is empty")
    if kind in ("gd_sweep", "pso_sweep"):
        heights, widths = params.get("heights"), params.get("widths")
        if not heights and not widths:
            report.error(0, f"{kind} needs a non-empty 'heights' or 'widths' sweep")
        if heights and widths:
            report.error(reader.line_of("widths"), "give either heights or widths, not both")
        for key in ("heights", "widths"):
            if params.get(key) is not None and len(params[key]) == 0:
                report.error(reader.line_of(key), "sweep list is empty")
    if kind == "table2":
        for dist in params.get("distributions") or []:
            if dist not in ("symmetric", "uniform"):
                report.error(reader.line_of("distributions"), f"unknown distribution {dist!r}")

    scenario = None
    scenario_path = None
    if scenario_raw:
        scenario_path = (base_dir / scenario_raw).resolve()
        if not scenario_path.exists():
            report.error(reader.line_of("scenario"), f"scenario file not found: {scenario_path}")
        else:
            sub = validate_scenario(scenario_path)
            for diag in sub.diagnostics:
                kept = Diagnostic(diag.line, f"{scenario_path.name}: {diag.message}", diag.severity)
                report.diagnostics.append(kept)
            if sub.ok:
                scenario = _load_scenario_checked(scenario_path)
    elif kind != "penetration_curve":
        report.error(0, "missing required key 'scenario'")

    if not report.ok:
        return None
    return ExperimentConfig(
        kind=kind,
        scenario=scenario,
        scenario_path=scenario_path,
        output_dir=Path(output_dir),
        seed=seed,
        render_figures=render_figures,
        params=params,
    )


# ---------------------------------------------------------------------------
# public entry points


def validate_scenario(path: str | Path) -> ValidationReport:
    path = Path(path)
    report = ValidationReport(str(path))
    if not path.exists():
        report.error(0, "file not found")
        return report
    entries = _parse_kv(path, report)
    _read_scenario(entries, report)
    return report


def _load_scenario_checked(path: Path) -> ScenarioConfig:
    report = ValidationReport(str(path))
    entries = _parse_kv(path, report)
    config = _read_scenario(entries, report)
    if config is None:
        raise ConfigError(str(report))
    return config


def load_scenario(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"{path}: file not found")
    return _load_scenario_checked(path)


def validate_experiment(path: str | Path) -> ValidationReport:
    path = Path(path)
    report = ValidationReport(str(path))
    if not path.exists():
        report.error(0, "file not found")
        return report
    entries = _parse_kv(path, report)
    _read_experiment(entries, report, path.parent)
    return report


def load_experiment(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"{path}: file not found")
    report = ValidationReport(str(path))
    entries = _parse_kv(path, report)
    config = _read_experiment(entries, report, path.parent)
    if config is None:
        raise ConfigError(str(report))
    return config


def validate_config(path: str | Path) -> ValidationReport:
    """Validate a config file, dispatching on the presence of 'kind'."""
    path = Path(path)
    report = ValidationReport(str(path))
    if not path.exists():
        report.error(0, "file not found")
        return report
    probe = ValidationReport(str(path))
    entries = _parse_kv(path, probe)
    if "kind" in entries:
        return validate_experiment(path)
    return validate_scenario(path)
