"""Command-line entry point.

Every subcommand reads one YAML run configuration (the bundled desk-scale
configuration when ``--config`` is omitted), writes its tables into the
output directory and finishes with ``run_summary.json``. Failures write
``error.json`` and exit with 2 (configuration or input format), 3 (solver)
or 4 (input invariant or calibration inconsistency).
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import click

from . import accreditation as acc
from .analysis import (
    RunName,
    SuiteError,
    SuiteSettings,
    calibrate,
    credit_sensitivity_sweep,
    run_suite,
    write_suite,
    write_sweep,
)
from .calibration import CalibrationError, write_calibration, write_cm_curve
from .domain import (
    HORIZON_HOURS,
    MarketDesign,
    RunMode,
    ScenarioSet,
    TechnologyCatalog,
    default_catalog,
    validate_inputs,
)
from .planner import EquilibriumError, assemble, solve_equilibrium, write_solution
from .serialization import (
    InputFormatError,
    capacity_curve_from_dict,
    catalog_from_dict,
    load_yaml,
    mix_from_dict,
    read_catalog,
    read_scenarios,
    write_catalog,
    write_scenarios,
)
from .synthetic import generate_synthetic_scenarios

logger = logging.getLogger(__name__)

ENV_OUT = "LDESCM_OUT"
ENV_THREADS = "LDESCM_THREADS"

EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_INVARIANT = 4


class ConfigError(ValueError):
    """The run configuration is missing, malformed or inconsistent."""

    def __init__(self, message: str, diagnostics: list[str] | None = None):
        super().__init__(message)
        self.diagnostics = list(diagnostics or [])


class InvariantError(ValueError):
    """Inputs parsed but violate a model invariant."""

    def __init__(self, message: str, diagnostics: list[str] | None = None):
        super().__init__(message)
        self.diagnostics = list(diagnostics or [])


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class SyntheticConfig:
    years: int = 2
    intervals_per_year: int = 336
    solar_cf: float = 0.11
    wind_cf: float = 0.29
    peak_demand: float = 100.0
    flexible_demand: float = 2.0


@dataclass(frozen=True)
class RunConfig:
    """Everything a subcommand needs.

    Input file paths in the YAML resolve against the config file's folder; the
    output directory resolves against the working directory.
    """

    scenario_file: Path | None = None
    scenario_weights: Mapping[str, float] | None = None
    horizon_hours: float = HORIZON_HOURS
    synthetic: SyntheticConfig = field(default_factory=SyntheticConfig)
    catalog_file: Path | None = None
    technologies: Mapping[str, Any] | None = None
    voll: float = 20300.0
    price_cap: float = 7549.0
    # gCO2/kWh; the cap is this intensity times expected annual demand
    emission_intensity: float | None = None
    mode: RunMode = RunMode.EOM_VOLL
    fixed_mix: Mapping[str, Any] | None = None
    capacity_demand_curve: Mapping[str, Any] | None = None
    epsilon: float = acc.DEFAULT_EPSILON
    durations: tuple[float, ...] = acc.DEFAULT_DURATIONS
    paradigm: acc.Paradigm = acc.Paradigm.UNCONSTRAINED
    diagnostic_paradigms: bool = False
    segment_count: int = 4
    reference: str = "ccgt_ccs"
    sweep_factors: tuple[float, ...] = (0.8, 1.0, 1.2)
    output_dir: Path = Path("out")
    seed: int = 0
    threads: int = 1
    tolerance: float = 1e-8

    def emission_cap(self, scenarios: ScenarioSet) -> float:
        """Expected-emission cap (tCO2/yr): intensity in t/MWh times expected demand."""
        if self.emission_intensity is None:
            return math.inf
        return self.emission_intensity * 1e-3 * scenarios.expected_demand()

    def settings(self, scenarios: ScenarioSet) -> SuiteSettings:
        return SuiteSettings(voll=self.voll, price_cap=self.price_cap, emission_cap=self.emission_cap(scenarios),
                             epsilon=self.epsilon, durations=tuple(self.durations), paradigm=self.paradigm,
                             diagnostic_paradigms=self.diagnostic_paradigms, segment_count=self.segment_count,
                             reference=self.reference, workers=self.threads, tolerance=self.tolerance)

    def load_scenarios(self) -> ScenarioSet:
        if self.scenario_file is not None:
            return read_scenarios(self.scenario_file, self.scenario_weights, self.horizon_hours)
        s = self.synthetic
        return generate_synthetic_scenarios(self.seed, s.years, s.intervals_per_year, solar_cf=s.solar_cf,
                                            wind_cf=s.wind_cf, peak_demand=s.peak_demand,
                                            flexible_demand=s.flexible_demand, horizon_hours=self.horizon_hours)

    def load_catalog(self) -> TechnologyCatalog:
        if self.technologies is not None:
            return catalog_from_dict(self.technologies)
        if self.catalog_file is not None:
            return read_catalog(self.catalog_file)
        return default_catalog()


_SECTIONS = {
    "seed", "output_dir", "threads", "tolerance", "scenarios", "catalog", "design", "accreditation", "sweep",
}


def _section(data: Mapping, key: str) -> dict:
    value = data.get(key) or {}
    if not isinstance(value, Mapping):
        raise ConfigError(f"section {key!r} must be a mapping")
    return dict(value)


def _take(section: dict, name: str, key: str, cast, default):
    if key not in section or section[key] is None:
        section.pop(key, None)
        return default
    value = section.pop(key)
    try:
        return cast(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}.{key}: {exc}") from None


def _reject_unknown(section: dict, name: str) -> None:
    if section:
        raise ConfigError(f"unknown key(s) in {name}: {', '.join(sorted(map(str, section)))}")


def parse_config(data: Mapping | None, base_dir: Path) -> RunConfig:
    """Turn a parsed YAML document into a RunConfig (strict about unknown keys)."""
    data = dict(data or {})
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping")
    unknown = set(data) - _SECTIONS
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(sorted(map(str, unknown)))}")

    def path(value):
        p = Path(str(value))
        return p if p.is_absolute() else base_dir / p

    sc = _section(data, "scenarios")
    scenario_file = _take(sc, "scenarios", "file", path, None)
    weights = _take(sc, "scenarios", "weights", lambda v: {str(k): float(x) for k, x in dict(v).items()}, None)
    horizon = _take(sc, "scenarios", "horizon_hours", float, HORIZON_HOURS)
    syn = _section(sc, "synthetic")
    sc.pop("synthetic", None)
    synthetic = SyntheticConfig(
        years=_take(syn, "scenarios.synthetic", "years", int, 2),
        intervals_per_year=_take(syn, "scenarios.synthetic", "intervals_per_year", int, 336),
        solar_cf=_take(syn, "scenarios.synthetic", "solar_cf", float, 0.11),
        wind_cf=_take(syn, "scenarios.synthetic", "wind_cf", float, 0.29),
        peak_demand=_take(syn, "scenarios.synthetic", "peak_demand", float, 100.0),
        flexible_demand=_take(syn, "scenarios.synthetic", "flexible_demand", float, 2.0),
    )
    _reject_unknown(syn, "scenarios.synthetic")
    _reject_unknown(sc, "scenarios")

    cat = _section(data, "catalog")
    catalog_file = _take(cat, "catalog", "file", path, None)
    technologies = cat.pop("technologies", None)
    if technologies is not None and not isinstance(technologies, Mapping):
        raise ConfigError("catalog.technologies must be a mapping")
    _reject_unknown(cat, "catalog")

    des = _section(data, "design")
    voll = _take(des, "design", "voll", float, 20300.0)
    price_cap = _take(des, "design", "price_cap", float, 7549.0)
    ei = _take(des, "design", "emission_intensity", float, None)
    mode = _take(des, "design", "mode", RunMode, RunMode.EOM_VOLL)
    fixed_mix = des.pop("fixed_mix", None)
    cm_curve = des.pop("capacity_demand_curve", None)
    _reject_unknown(des, "design")

    ac = _section(data, "accreditation")
    epsilon = _take(ac, "accreditation", "epsilon", float, acc.DEFAULT_EPSILON)
    durations = _take(ac, "accreditation", "durations", lambda v: tuple(float(x) for x in v), acc.DEFAULT_DURATIONS)
    paradigm = _take(ac, "accreditation", "paradigm", acc.Paradigm, acc.Paradigm.UNCONSTRAINED)
    diagnostic = _take(ac, "accreditation", "diagnostic_paradigms", bool, False)
    segments = _take(ac, "accreditation", "segment_count", int, 4)
    reference = _take(ac, "accreditation", "reference", str, "ccgt_ccs")
    _reject_unknown(ac, "accreditation")

    sw = _section(data, "sweep")
    factors = _take(sw, "sweep", "factors", lambda v: tuple(float(x) for x in v), (0.8, 1.0, 1.2))
    _reject_unknown(sw, "sweep")

    top = {k: data[k] for k in ("seed", "output_dir", "threads", "tolerance") if data.get(k) is not None}
    seed = _take(top, "config", "seed", int, 0)
    threads = _take(top, "config", "threads", int, 1)
    tolerance = _take(top, "config", "tolerance", float, 1e-8)
    config = RunConfig(
        scenario_file=scenario_file, scenario_weights=weights, horizon_hours=horizon, synthetic=synthetic,
        catalog_file=catalog_file, technologies=technologies, voll=voll, price_cap=price_cap,
        emission_intensity=ei, mode=mode, fixed_mix=fixed_mix, capacity_demand_curve=cm_curve,
        epsilon=epsilon, durations=durations, paradigm=paradigm, diagnostic_paradigms=diagnostic,
        segment_count=segments, reference=reference, sweep_factors=factors,
        output_dir=Path(str(top.get("output_dir", "out"))), seed=seed, threads=threads, tolerance=tolerance,
    )
    problems = []
    if not config.voll > 0:
        problems.append("design.voll must be positive")
    if not 0 < config.price_cap <= config.voll:
        problems.append("design.price_cap must lie in (0, voll]")
    if config.emission_intensity is not None and config.emission_intensity < 0:
        problems.append("design.emission_intensity must be nonnegative")
    if config.threads < 1:
        problems.append("threads must be at least 1")
    if not 0 < config.tolerance < 1:
        problems.append("tolerance must lie in (0, 1)")
    if not config.epsilon > 0:
        problems.append("accreditation.epsilon must be positive")
    if config.segment_count < 1:
        problems.append("accreditation.segment_count must be at least 1")
    if any(d <= 0 for d in config.durations) or list(config.durations) != sorted(set(config.durations)):
        problems.append("accreditation.durations must be positive and strictly increasing")
    if not config.sweep_factors or any(k <= 0 for k in config.sweep_factors):
        problems.append("sweep.factors must be a non-empty list of positive numbers")
    if problems:
        raise ConfigError("invalid configuration", problems)
    return config


def bundled_config_path() -> Path:
    return Path(str(resources.files("ldescm") / "data" / "desk.yaml"))


def load_config(path: str | Path | None) -> tuple[RunConfig, str]:
    """Read a config file (or the bundled desk case); returns it with its SHA-256."""
    path = Path(path) if path is not None else bundled_config_path()
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc.strerror}") from None
    try:
        data = load_yaml(path)
    except InputFormatError as exc:
        raise ConfigError(str(exc), exc.diagnostics) from None
    if data is not None and not isinstance(data, Mapping):
        raise ConfigError("configuration must be a mapping")
    return parse_config(data, path.parent), hashlib.sha256(raw).hexdigest()


# ---------------------------------------------------------------------------
# plumbing


@dataclass
class _Context:
    config: RunConfig
    config_hash: str
    command: str

    @property
    def out(self) -> Path:
        return self.config.output_dir


def _apply_overrides(config: RunConfig, out, seed, mode, threads, tolerance) -> RunConfig:
    """Flags beat environment variables, which beat the file."""
    changes: dict[str, Any] = {}
    env_out = os.environ.get(ENV_OUT)
    env_threads = os.environ.get(ENV_THREADS)
    if out is not None:
        changes["output_dir"] = Path(out)
    elif env_out:
        changes["output_dir"] = Path(env_out)
    if threads is not None:
        changes["threads"] = threads
    elif env_threads:
        try:
            changes["threads"] = int(env_threads)
        except ValueError:
            raise ConfigError(f"{ENV_THREADS} must be an integer, got {env_threads!r}") from None
    if seed is not None:
        changes["seed"] = seed
    if mode is not None:
        changes["mode"] = RunMode(mode)
    if tolerance is not None:
        changes["tolerance"] = tolerance
    config = replace(config, **changes)
    if config.threads < 1:
        raise ConfigError("threads must be at least 1")
    if not 0 < config.tolerance < 1:
        raise ConfigError("tolerance must lie in (0, 1)")
    return config


def _write_json(path: Path, payload: Mapping) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")
    return path


def _summary(ctx: _Context, files: Mapping[str, Path], extra: Mapping | None = None) -> Path:
    payload = {
        "command": ctx.command,
        "config_sha256": ctx.config_hash,
        "seed": ctx.config.seed,
        "tolerance": ctx.config.tolerance,
        "threads": ctx.config.threads,
        "files": sorted(Path(p).name for p in files.values()),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "status": "ok",
    }
    payload.update(extra or {})
    return _write_json(ctx.out / "run_summary.json", payload)


def _fail(out: Path | None, code: int, kind: str, message: str, diagnostics=()) -> None:
    payload = {"exit_code": code, "kind": kind, "message": message, "diagnostics": list(diagnostics)}
    if out is not None:
        try:
            _write_json(Path(out) / "error.json", payload)
        except OSError:
            pass
    click.echo(f"error ({kind}): {message}", err=True)
    for d in diagnostics:
        click.echo(f"  - {d}", err=True)
    sys.exit(code)


def _inputs(ctx: _Context) -> tuple[ScenarioSet, TechnologyCatalog]:
    scenarios = ctx.config.load_scenarios()
    catalog = ctx.config.load_catalog()
    report = validate_inputs(scenarios, catalog)
    if not report.ok:
        raise InvariantError("input validation failed", report.problems)
    return scenarios, catalog


def _run(ctx: _Context, body) -> None:
    """Execute ``body`` mapping failures to exit codes and error.json."""
    out = ctx.out
    try:
        files, extra = body()
    except (ConfigError, InputFormatError) as exc:
        _fail(out, EXIT_CONFIG, "config", str(exc), getattr(exc, "diagnostics", []))
    except (InvariantError, CalibrationError) as exc:
        _fail(out, EXIT_INVARIANT, "invariant", str(exc), getattr(exc, "diagnostics", []))
    except SuiteError as exc:
        if isinstance(exc.cause, (ValueError,)) and not isinstance(exc.cause, EquilibriumError):
            _fail(out, EXIT_INVARIANT, "invariant", str(exc))
        _fail(out, EXIT_SOLVER, "solver", str(exc))
    except (EquilibriumError, acc.AccreditationError) as exc:
        _fail(out, EXIT_SOLVER, "solver", str(exc))
    except OSError as exc:
        _fail(None, EXIT_CONFIG, "config", f"{exc.filename}: {exc.strerror}")
    stale = out / "error.json"
    if stale.exists():
        stale.unlink()
    _summary(ctx, files, extra)
    click.echo(f"wrote {len(files) + 1} files to {out}")


# ---------------------------------------------------------------------------
# commands


def _common(f):
    f = click.option("--tolerance", type=float, default=None, help="Interior-point convergence tolerance.")(f)
    f = click.option("--threads", type=int, default=None,
                     help=f"Worker processes for accreditation and sweeps (env {ENV_THREADS}).")(f)
    f = click.option("--mode", type=click.Choice([m.value for m in RunMode]), default=None,
                     help="Market design for `solve`.")(f)
    f = click.option("--seed", type=int, default=None, help="Seed for synthetic scenarios.")(f)
    f = click.option("--out", type=click.Path(file_okay=False), default=None,
                     help=f"Output directory (env {ENV_OUT}).")(f)
    f = click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                     help="YAML run configuration; the bundled desk case when omitted.")(f)
    return f


def _context(command, config_path, out, seed, mode, threads, tolerance) -> _Context:
    try:
        config, digest = load_config(config_path)
        config = _apply_overrides(config, out, seed, mode, threads, tolerance)
    except ConfigError as exc:
        fallback = out or os.environ.get(ENV_OUT)
        _fail(Path(fallback) if fallback else None, EXIT_CONFIG, "config", str(exc), exc.diagnostics)
    return _Context(config, digest, command)


@click.group()
@click.option("-v", "--verbose", count=True, help="Log progress (-vv for solver iterations).")
def main(verbose: int) -> None:
    """Equilibrium capacity-expansion experiments with long-duration storage and a capacity market."""
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


@main.command()
@_common
def validate(config_path, out, seed, mode, threads, tolerance):
    """Parse and check the configured inputs; writes validation.json."""
    ctx = _context("validate", config_path, out, seed, mode, threads, tolerance)

    def body():
        scenarios, catalog = _inputs(ctx)
        summary = {
            "scenarios": [sc.name for sc in scenarios],
            "intervals": [sc.n_intervals for sc in scenarios],
            "technologies": catalog.names,
            "expected_demand_mwh": scenarios.expected_demand(),
            "emission_cap_t": ctx.config.emission_cap(scenarios),
        }
        return {"validation": _write_json(ctx.out / "validation.json", {"ok": True, **summary})}, {}

    _run(ctx, body)


@main.command()
@_common
def synth(config_path, out, seed, mode, threads, tolerance):
    """Write the synthetic scenario table and the technology catalog."""
    ctx = _context("synth", config_path, out, seed, mode, threads, tolerance)

    def body():
        c = ctx.config
        s = c.synthetic
        scenarios = generate_synthetic_scenarios(c.seed, s.years, s.intervals_per_year, solar_cf=s.solar_cf,
                                                 wind_cf=s.wind_cf, peak_demand=s.peak_demand,
                                                 flexible_demand=s.flexible_demand, horizon_hours=c.horizon_hours)
        return {"scenarios": write_scenarios(scenarios, ctx.out / "scenarios.csv"),
                "catalog": write_catalog(c.load_catalog(), ctx.out / "catalog.yaml")}, {}

    _run(ctx, body)


def _design(config: RunConfig, scenarios: ScenarioSet, catalog: TechnologyCatalog) -> MarketDesign:
    settings = config.settings(scenarios)
    kwargs: dict[str, Any] = {}
    if config.mode is RunMode.E_PLUS_CM:
        if config.capacity_demand_curve is None:
            raise ConfigError("mode E_PLUS_CM needs design.capacity_demand_curve (or use `suite`)")
        kwargs["capacity_demand_curve"] = _parse(capacity_curve_from_dict, config.capacity_demand_curve,
                                                 "design.capacity_demand_curve")
    if config.mode is RunMode.DISPATCH_FIXED_MIX:
        if config.fixed_mix is None:
            raise ConfigError("mode DISPATCH_FIXED_MIX needs design.fixed_mix")
        kwargs["fixed_capacities"] = _parse(mix_from_dict, config.fixed_mix, "design.fixed_mix")
    design = settings.design(config.mode, **kwargs)
    report = validate_inputs(scenarios, catalog, design)
    if not report.ok:
        raise InvariantError("input validation failed", report.problems)
    return design


def _parse(func, data, where):
    try:
        return func(data)
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


@main.command()
@_common
def solve(config_path, out, seed, mode, threads, tolerance):
    """Solve one market design and write its capacities, prices, dispatch and duals."""
    ctx = _context("solve", config_path, out, seed, mode, threads, tolerance)

    def body():
        scenarios, catalog = _inputs(ctx)
        design = _design(ctx.config, scenarios, catalog)
        sol = solve_equilibrium(assemble(scenarios, catalog, design), tolerance=ctx.config.tolerance)
        files = write_solution(sol, ctx.out, tag=design.run_mode.value)
        return files, {"run_mode": design.run_mode.value, "objective": sol.objective}

    _run(ctx, body)


def _benchmark(ctx: _Context, scenarios, catalog):
    settings = ctx.config.settings(scenarios)
    try:
        voll = solve_equilibrium(assemble(scenarios, catalog, settings.design(RunMode.EOM_VOLL)),
                                 tolerance=settings.tolerance)
    except EquilibriumError as exc:
        raise SuiteError(RunName.EOM_VOLL.value, exc) from exc
    return settings, voll


@main.command()
@_common
def accredit(config_path, out, seed, mode, threads, tolerance):
    """Accredit the benchmark mix (or design.fixed_mix) and fit storage credit curves."""
    ctx = _context("accredit", config_path, out, seed, mode, threads, tolerance)

    def body():
        scenarios, catalog = _inputs(ctx)
        settings = ctx.config.settings(scenarios)
        if ctx.config.fixed_mix is not None:
            mix = _parse(mix_from_dict, ctx.config.fixed_mix, "design.fixed_mix")
        else:
            mix = _benchmark(ctx, scenarios, catalog)[1].fixed_mix()
        paradigms = list(acc.Paradigm) if settings.diagnostic_paradigms else [settings.paradigm]
        results = [acc.accredit(mix, scenarios, catalog, settings.design(RunMode.EOM_PC), epsilon=settings.epsilon,
                                durations=settings.durations, paradigm=p, workers=settings.workers,
                                tolerance=min(settings.tolerance, 1e-9)) for p in paradigms]
        head = results[paradigms.index(settings.paradigm)]
        fits = {}
        notes = ([head.diagnostic] if head.diagnostic else []) + list(head.warnings)
        if head.credits_defined:
            for s in catalog.storages:
                pts = head.storage_points(s.name)
                if len(pts) >= 2:
                    fits[s.name] = acc.fit_credit_curve(pts, min(settings.segment_count, len(pts) - 1))
        files = {"credits": acc.write_credits(results, ctx.out),
                 "credit_curves": acc.write_credit_curves(fits, ctx.out)}
        return files, {"eue_0": head.eue_0, "eue_ref": head.eue_ref, "notes": notes}

    _run(ctx, body)


@main.command(name="calibrate")
@_common
def calibrate_cmd(config_path, out, seed, mode, threads, tolerance):
    """Benchmark, capped re-dispatch, accreditation, net-CONE and the capacity demand curve."""
    ctx = _context("calibrate", config_path, out, seed, mode, threads, tolerance)

    def body():
        scenarios, catalog = _inputs(ctx)
        settings, voll = _benchmark(ctx, scenarios, catalog)
        capped_design = settings.design(RunMode.DISPATCH_FIXED_MIX, fixed_capacities=voll.fixed_mix(),
                                        price_capped=True)
        try:
            capped = solve_equilibrium(assemble(scenarios, catalog, capped_design), tolerance=settings.tolerance)
        except EquilibriumError as exc:
            raise SuiteError(RunName.EOM_PC_OPT_MIX.value, exc) from exc
        cal = calibrate(voll, capped, settings)
        files = {
            "credits": acc.write_credits([cal.accreditation, *cal.diagnostics.values()], ctx.out),
            "credit_curves": acc.write_credit_curves(cal.fits, ctx.out),
            "calibration": write_calibration(cal.net_cone, ctx.out),
            "cm_curve": write_cm_curve(cal.curve, ctx.out),
        }
        return files, {"capacity_target_mw": cal.capacity_target,
                       "reference_net_cone": cal.net_cone.reference_net_cone,
                       "net_cone_status": cal.net_cone.status.value, "notes": cal.notes}

    _run(ctx, body)


def _suite_extra(suite) -> dict:
    return {
        "capacity_target_mw": suite.calibration.capacity_target,
        "reference_net_cone": suite.calibration.net_cone.reference_net_cone,
        "net_cone_status": suite.calibration.net_cone.status.value,
        "notes": suite.calibration.notes,
        "runs": {name.value: {"objective": rec.solution.objective, "eue_mwh": rec.unserved.eue,
                              "welfare_loss_pct": rec.welfare.welfare_loss_pct,
                              "capacity_price": rec.solution.capacity_price}
                 for name, rec in suite.runs.items()},
    }


@main.command()
@_common
def suite(config_path, out, seed, mode, threads, tolerance):
    """Run the four market designs end to end and write every table."""
    ctx = _context("suite", config_path, out, seed, mode, threads, tolerance)

    def body():
        scenarios, catalog = _inputs(ctx)
        result = run_suite(scenarios, catalog, ctx.config.settings(scenarios))
        files = write_suite(result, ctx.out, ctx.config.emission_intensity)
        return files, _suite_extra(result)

    _run(ctx, body)


@main.command()
@_common
def sweep(config_path, out, seed, mode, threads, tolerance):
    """Scale storage credit curves by each sweep factor and re-solve the capacity-market run."""
    ctx = _context("sweep", config_path, out, seed, mode, threads, tolerance)

    def body():
        scenarios, catalog = _inputs(ctx)
        result = run_suite(scenarios, catalog, replace(ctx.config.settings(scenarios), redispatch=False))
        points = credit_sensitivity_sweep(result, ctx.config.sweep_factors)
        files = write_sweep(points, ctx.out)
        extra = _suite_extra(result)
        extra["sweep"] = {f"{p.factor:g}": {"d_eue_mwh": p.d_eue, "d_capacity_price": p.d_capacity_price,
                                            "d_mu_price": p.d_mu_price, "d_welfare": p.d_welfare}
                          for p in points}
        return files, extra

    _run(ctx, body)


if __name__ == "__main__":  # pragma: no cover
    main()
