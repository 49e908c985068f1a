"""Config parsing, grid sweeps, CSV output and analytic/Monte Carlo validation."""

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from itertools import product
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

from coopnet_energy.exceptions import (
    ConfigParseError,
    NumericalError,
    OutputWriteError,
    ValidationError,
)
from coopnet_energy.logger import get_logger, log_error
from coopnet_energy.params.network_params import Geometry, NetworkParams, get_default_params
from coopnet_energy.params.run_settings import RunSettings, get_run_settings
from coopnet_energy.utils.link_model import SUPPORTED_BITS, Modulation
from coopnet_energy.utils.monte_carlo import McConfig, simulate_scheme
from coopnet_energy.utils.schemes import SchemeKind, evaluate_scheme

logger = get_logger(__name__)

PointStatus = Literal["ok", "warning", "exceeded"]

CONFIG_SECTIONS = ("params", "sweep", "mc", "run")
SWEEP_KEYS = ("schemes", "b_values", "d_sd_values", "relay_frac_values", "preset")
DEFAULT_MC_TRIALS = 100_000

# A passing point whose relative e_bit standard error exceeds this is reported as "warning"
WIDE_SE_RTOL = 0.01

ANALYTIC_COLUMNS = ("scheme", "b", "d_sd", "relay_frac", "gamma_th", "p_success", "p_avg_w", "e_bit_j", "gain")
MC_COLUMNS = ("mc_p_success", "mc_se", "mc_e_bit", "mc_e_bit_se")
ERROR_COLUMN = "error"

_AF_SCHEMES = ("direct", "af", "af_mrc")
_DF_SCHEMES = ("direct", "df", "df_mrc")
_DISTANCES = (5.0, 25.0, 50.0, 75.0, 100.0)
_FINE_DISTANCES = tuple(float(d) for d in range(5, 105, 5))
_RELAY_POSITIONS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)

DEFAULT_GRID = {
    "schemes": tuple(kind.value for kind in SchemeKind),
    "b_values": SUPPORTED_BITS,
    "d_sd_values": _DISTANCES,
    "relay_frac_values": (0.5,),
}

PRESETS: Dict[str, Dict[str, tuple]] = {
    "af_bit_vs_b": {"schemes": _AF_SCHEMES, "b_values": SUPPORTED_BITS, "d_sd_values": _DISTANCES},
    "af_bit_vs_distance": {"schemes": _AF_SCHEMES, "b_values": SUPPORTED_BITS, "d_sd_values": _FINE_DISTANCES},
    "af_gain_vs_distance": {"schemes": ("af", "af_mrc"), "b_values": SUPPORTED_BITS, "d_sd_values": _FINE_DISTANCES},
    "af_gain_vs_location": {
        "schemes": ("af", "af_mrc"),
        "b_values": (10,),
        "d_sd_values": (25.0, 75.0, 100.0),
        "relay_frac_values": _RELAY_POSITIONS,
    },
    "df_bit_vs_b": {"schemes": _DF_SCHEMES, "b_values": SUPPORTED_BITS, "d_sd_values": _DISTANCES},
    "df_bit_vs_distance": {"schemes": _DF_SCHEMES, "b_values": SUPPORTED_BITS, "d_sd_values": _FINE_DISTANCES},
    "df_gain_vs_distance": {"schemes": ("df", "df_mrc"), "b_values": SUPPORTED_BITS, "d_sd_values": _FINE_DISTANCES},
    "df_gain_vs_location": {
        "schemes": ("df", "df_mrc"),
        "b_values": (10,),
        "d_sd_values": (25.0, 75.0, 100.0),
        "relay_frac_values": _RELAY_POSITIONS,
    },
}


@dataclass(frozen=True)
class SweepSpec:
    """A (scheme, b, d_sd, relay_frac) grid with its parameters and optional Monte Carlo run."""

    schemes: Tuple[SchemeKind, ...]
    b_values: Tuple[int, ...]
    d_sd_values: Tuple[float, ...]
    relay_frac_values: Tuple[float, ...]
    params: NetworkParams = field(default_factory=get_default_params)
    mc: Optional[McConfig] = None
    settings: RunSettings = field(default_factory=get_run_settings)
    preset: Optional[str] = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        """Normalise the grids and check every value against its type invariant."""
        for name in ("schemes", "b_values", "d_sd_values", "relay_frac_values"):
            if not getattr(self, name):
                raise ValidationError(f"sweep.{name} must not be empty", key=f"sweep.{name}")

        try:
            schemes = tuple(SchemeKind.parse(s) if not isinstance(s, SchemeKind) else s for s in self.schemes)
        except ValidationError as e:
            raise ValidationError(str(e), key="sweep.schemes") from e
        try:
            b_values = tuple(Modulation(b).b for b in self.b_values)
        except ValidationError as e:
            raise ValidationError(str(e), key="sweep.b_values") from e
        d_values = tuple(_as_float(d, "sweep.d_sd_values") for d in self.d_sd_values)
        t_values = tuple(_as_float(t, "sweep.relay_frac_values") for t in self.relay_frac_values)

        for d in d_values:
            _check_geometry(d, 0.5, "sweep.d_sd_values")
        for t in t_values:
            _check_geometry(1.0, t, "sweep.relay_frac_values")

        object.__setattr__(self, "schemes", schemes)
        object.__setattr__(self, "b_values", b_values)
        object.__setattr__(self, "d_sd_values", d_values)
        object.__setattr__(self, "relay_frac_values", t_values)

    def points(self) -> List[Tuple[SchemeKind, int, float, float]]:
        """Distinct grid points in output order: (scheme, b, d_sd, relay_frac) ascending."""
        grid = set(product(self.schemes, self.b_values, self.d_sd_values, self.relay_frac_values))
        return sorted(grid, key=lambda p: (p[0].value, p[1], p[2], p[3]))


@dataclass
class OutputRow:
    """One evaluated grid point; numeric fields are None on error rows or when no simulation ran."""

    scheme: str
    b: int
    d_sd: float
    relay_frac: float
    gamma_th: Optional[float] = None
    p_success: Optional[float] = None
    p_avg_w: Optional[float] = None
    e_bit_j: Optional[float] = None
    gain: Optional[float] = None
    mc_p_success: Optional[float] = None
    mc_se: Optional[float] = None
    mc_e_bit: Optional[float] = None
    mc_e_bit_se: Optional[float] = None
    error: str = ""

    @property
    def has_mc(self) -> bool:
        return self.mc_p_success is not None


@dataclass(frozen=True)
class PointCheck:
    """Analytic vs Monte Carlo agreement at one grid point."""

    scheme: str
    b: int
    d_sd: float
    relay_frac: float
    z_p_success: float
    z_e_bit: float
    relative_se: float
    status: PointStatus

    @property
    def label(self) -> str:
        return f"{self.scheme} b={self.b} d_sd={self.d_sd:g} relay_frac={self.relay_frac:g}"


@dataclass(frozen=True)
class ValidationReport:
    """Per-point z-scores with the pass/fail verdict."""

    checks: Tuple[PointCheck, ...]
    z_threshold: float
    pass_fraction: float
    rows: Tuple[OutputRow, ...] = ()

    @property
    def failures(self) -> List[PointCheck]:
        return [check for check in self.checks if check.status == "exceeded"]

    @property
    def warnings(self) -> List[PointCheck]:
        return [check for check in self.checks if check.status == "warning"]

    @property
    def passing_fraction(self) -> float:
        if not self.checks:
            return 1.0
        return 1 - len(self.failures) / len(self.checks)

    @property
    def passed(self) -> bool:
        return self.passing_fraction >= self.pass_fraction

    def summary(self) -> str:
        """Human-readable verdict naming the offending points."""
        verdict = "PASS" if self.passed else "FAIL"
        lines = [
            f"{verdict}: {len(self.checks) - len(self.failures)}/{len(self.checks)} points within "
            f"z <= {self.z_threshold:g} (required fraction {self.pass_fraction:g})"
        ]
        for check in self.failures:
            lines.append(
                f"  exceeded: {check.label} z_p_success={check.z_p_success:.3g} z_e_bit={check.z_e_bit:.3g}"
            )
        for check in self.warnings:
            lines.append(f"  wide standard error: {check.label} relative_se={check.relative_se:.3g}")
        return "\n".join(lines)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "passing_fraction": self.passing_fraction,
            "z_threshold": self.z_threshold,
            "pass_fraction": self.pass_fraction,
            "failures": [check.label for check in self.failures],
            "warnings": [check.label for check in self.warnings],
            "max_z": max((max(c.z_p_success, c.z_e_bit) for c in self.checks), default=0.0),
        }


# ============== CONFIG ==============

def parse_config(path: str) -> SweepSpec:
    """
    Read a sweep config file.

    UTF-8 key=value lines with dotted keys (params.eta, sweep.b_values,
    mc.trials, run.workers) and # comments. Missing keys take their defaults.

    Raises:
        ConfigParseError: On malformed lines, unknown keys or invalid values (with line and key)
        OSError: If the file cannot be read
    """
    with open(path, encoding="utf-8") as f:
        text = f.read()
    return parse_config_text(text)


def parse_config_text(text: str) -> SweepSpec:
    """Parse config text; see parse_config."""
    entries: Dict[str, Any] = {}
    lines: Dict[str, int] = {}

    for number, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(f"Expected key=value, got {raw.strip()!r}", line=number)

        key, value = (part.strip() for part in line.split("=", 1))
        section, _, name = key.partition(".")
        if section not in CONFIG_SECTIONS or not name or "." in name:
            raise ConfigParseError(
                f"Unknown key {key!r}; keys look like <section>.<name> with section in {list(CONFIG_SECTIONS)}",
                key=key,
                line=number,
            )
        if key in entries:
            raise ConfigParseError(f"Duplicate key {key!r} (first set on line {lines[key]})", key=key, line=number)

        entries[key] = _parse_value(value)
        lines[key] = number

    def section(prefix: str) -> Dict[str, Any]:
        return {k.split(".", 1)[1]: v for k, v in entries.items() if k.startswith(prefix + ".")}

    try:
        return _build_spec(section("params"), section("sweep"), section("mc"), section("run"))
    except ConfigParseError:
        raise
    except ValidationError as e:
        key = _qualified_key(e.key, entries)
        raise ConfigParseError(str(e), key=key, line=lines.get(key)) from e


# ============== SWEEP ==============

def run_sweep(spec: SweepSpec) -> List[OutputRow]:
    """
    Evaluate every grid point of a sweep.

    Points are evaluated in parallel when spec.settings.workers > 1 and
    reassembled in grid order. Numerical failures at a point produce a
    row with the error column set instead of aborting the sweep.

    Returns:
        One OutputRow per distinct grid point, sorted by (scheme, b, d_sd, relay_frac)
    """
    jobs = _point_jobs(spec, flag_errors=True)
    rows = _map_points(jobs, spec.settings.workers)

    failed = sum(1 for row in rows if row.error)
    logger.info("Sweep finished: %s points, %s flagged", len(rows), failed)
    return rows


def write_csv(rows: Sequence[OutputRow], path: str, include_mc: Optional[bool] = None) -> None:
    """
    Write rows as CSV with LF line endings and 17-significant-digit reals.

    Args:
        rows: Output rows
        path: Destination file
        include_mc: Emit the Monte Carlo columns; defaults to whether any row carries them

    Raises:
        OutputWriteError: If the file cannot be written
    """
    if include_mc is None:
        include_mc = any(row.has_mc for row in rows)
    columns = ANALYTIC_COLUMNS + (MC_COLUMNS if include_mc else ()) + (ERROR_COLUMN,)

    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_format_cell(getattr(row, column)) for column in columns])
    except OSError as e:
        raise OutputWriteError(f"Cannot write results to {path}: {e.strerror or e}", path=path) from e


def validate(spec: SweepSpec) -> ValidationReport:
    """
    Compare analytic and Monte Carlo values over the grid.

    Simulation and numerical errors at any point propagate.

    Raises:
        ValidationError: If spec.mc is not set
    """
    if spec.mc is None:
        raise ValidationError("Validation needs a Monte Carlo config (mc.trials)", key="mc")

    rows = _map_points(_point_jobs(spec, flag_errors=False), spec.settings.workers)
    report = build_report(rows, spec.mc.trials, spec.settings)
    logger.info("Validation %s", "passed" if report.passed else "failed")
    return report


def build_report(rows: Sequence[OutputRow], trials: int, settings: RunSettings) -> ValidationReport:
    """
    Score rows that carry both analytic and Monte Carlo values.

    z = |analytic - MC| / SE, with SE floored at the single-event resolution
    of the run (p^2 / trials for p_success, e_bit / trials for e_bit).
    """
    checks = []
    for row in rows:
        if row.error or not row.has_mc:
            continue

        p_floor = row.mc_p_success * row.mc_p_success / trials
        e_floor = row.mc_e_bit / trials
        z_p = abs(row.p_success - row.mc_p_success) / max(row.mc_se, p_floor)
        z_e = abs(row.e_bit_j - row.mc_e_bit) / max(row.mc_e_bit_se, e_floor)
        relative_se = row.mc_e_bit_se / row.mc_e_bit

        if max(z_p, z_e) > settings.z_threshold:
            status = "exceeded"
        elif relative_se > WIDE_SE_RTOL:
            status = "warning"
        else:
            status = "ok"

        checks.append(PointCheck(
            scheme=row.scheme,
            b=row.b,
            d_sd=row.d_sd,
            relay_frac=row.relay_frac,
            z_p_success=z_p,
            z_e_bit=z_e,
            relative_se=relative_se,
            status=status,
        ))

    return ValidationReport(
        checks=tuple(checks),
        z_threshold=settings.z_threshold,
        pass_fraction=settings.pass_fraction,
        rows=tuple(rows),
    )


# ============== INTERNAL FUNCTIONS ==============

def _build_spec(
    params: Dict[str, Any],
    sweep: Dict[str, Any],
    mc: Dict[str, Any],
    run: Dict[str, Any],
) -> SweepSpec:
    """Internal: Assemble a SweepSpec from parsed config sections."""
    unknown = sorted(set(sweep) - set(SWEEP_KEYS))
    if unknown:
        raise ValidationError(f"Unknown sweep key: {unknown[0]}", key=f"sweep.{unknown[0]}")

    preset = sweep.get("preset")
    grid = dict(DEFAULT_GRID)
    if preset is not None:
        if preset not in PRESETS:
            raise ValidationError(f"Unknown preset {preset!r}; expected one of {sorted(PRESETS)}", key="sweep.preset")
        grid.update(PRESETS[preset])
    for name in DEFAULT_GRID:
        if name in sweep:
            grid[name] = _as_list(sweep[name])

    mc_config = None
    if mc:
        unknown = sorted(set(mc) - {f.name for f in fields(McConfig)})
        if unknown:
            raise ValidationError(f"Unknown mc key: {unknown[0]}", key=f"mc.{unknown[0]}")
        mc_config = McConfig(**{"trials": DEFAULT_MC_TRIALS, **mc})

    return SweepSpec(
        schemes=tuple(grid["schemes"]),
        b_values=tuple(grid["b_values"]),
        d_sd_values=tuple(grid["d_sd_values"]),
        relay_frac_values=tuple(grid["relay_frac_values"]),
        params=_scoped(NetworkParams.from_dict, params, "params"),
        mc=mc_config,
        settings=_scoped(get_run_settings, run, "run"),
        preset=preset,
    )


def _scoped(build, values: Dict[str, Any], section: str):
    """Internal: Call a builder, prefixing the key of any ValidationError with the config section."""
    try:
        return build(values)
    except ValidationError as e:
        raise ValidationError(str(e), key=f"{section}.{e.key}" if e.key else section) from e


def _strip_comment(line: str) -> str:
    """Internal: Drop a # comment that is not inside a double-quoted string."""
    quoted = False
    for i, char in enumerate(line):
        if char == '"':
            quoted = not quoted
        elif char == "#" and not quoted:
            return line[:i]
    return line


def _parse_value(text: str) -> Any:
    """Internal: JSON literal, else a bare token or comma-separated list of tokens."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        pass
    if "," in text:
        return [_parse_value(token.strip()) for token in text.split(",") if token.strip()]
    return text


def _as_list(value: Any) -> list:
    """Internal: Wrap a scalar config value in a list."""
    return list(value) if isinstance(value, (list, tuple)) else [value]


def _as_float(value: Any, key: str) -> float:
    """Internal: Coerce a grid value to float."""
    if isinstance(value, bool):
        raise ValidationError(f"{key} entries must be numbers, got {value!r}", key=key)
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{key} entries must be numbers, got {value!r}", key=key)
    if not math.isfinite(number):
        raise ValidationError(f"{key} entries must be finite, got {value!r}", key=key)
    return number


def _check_geometry(d_sd: float, relay_frac: float, key: str) -> None:
    """Internal: Validate a grid value through Geometry, reporting the sweep key."""
    try:
        Geometry(d_sd, relay_frac)
    except ValidationError as e:
        raise ValidationError(str(e), key=key) from e


def _qualified_key(key: Optional[str], entries: Dict[str, Any]) -> Optional[str]:
    """Internal: Map an error key onto the config key that set it."""
    if key is None or key in entries:
        return key
    for section in CONFIG_SECTIONS:
        if f"{section}.{key}" in entries:
            return f"{section}.{key}"
    return key


def _point_jobs(spec: SweepSpec, flag_errors: bool) -> List[tuple]:
    """Internal: One picklable job per grid point."""
    # Points already run in parallel; simulations inside them stay serial
    settings = spec.settings.replace(workers=1) if spec.settings.workers > 1 else spec.settings
    return [
        (spec.params, kind, b, d_sd, t, spec.mc, settings, flag_errors)
        for kind, b, d_sd, t in spec.points()
    ]


def _map_points(jobs: List[tuple], workers: int) -> List[OutputRow]:
    """Internal: Evaluate jobs inline or across a process pool, keeping job order."""
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(_evaluate_point, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return [_evaluate_point(job) for job in jobs]


def _evaluate_point(job: tuple) -> OutputRow:
    """Internal: Analytic (and optionally simulated) values at one grid point."""
    params, kind, b, d_sd, t, mc, settings, flag_errors = job
    row = OutputRow(scheme=kind.value, b=b, d_sd=d_sd, relay_frac=t)
    geom = Geometry(d_sd, t)
    mod = Modulation(b)

    try:
        result = evaluate_scheme(params, geom, mod, kind, settings.mrc_outage_model, settings.quad_tol)
        row.gamma_th = result.gamma_th
        row.p_success = result.p_success
        row.p_avg_w = result.p_avg
        row.e_bit_j = result.e_bit
        row.gain = result.gain

        if mc is not None:
            estimate = simulate_scheme(params, geom, mod, kind, mc, settings)
            row.mc_p_success = estimate.p_success_hat
            row.mc_se = estimate.p_success_se
            row.mc_e_bit = estimate.e_bit_hat
            row.mc_e_bit_se = estimate.e_bit_se
    except NumericalError as e:
        if not flag_errors:
            raise
        row.error = f"{type(e).__name__}: {e}"
        log_error(f"{row.scheme} b={b} d_sd={d_sd} relay_frac={t}: {e}", "Sweep Point Error", __name__)

    return row


def _format_cell(value: Any) -> str:
    """Internal: CSV cell text; reals carry 17 significant digits."""
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)
