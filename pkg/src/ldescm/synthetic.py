"""Deterministic synthetic weather years for desk-scale studies.

Each year is a chronological sequence of equal-length intervals (a day-ish
resolution at the default 336 per year). Demand peaks in winter; wind has
multi-interval synoptic swings; one low-wind, low-sun, high-demand drought
window per year sits near the winter peak so that scarcity exists.
"""

from __future__ import annotations

import numpy as np

from .domain import HORIZON_HOURS, Scenario, ScenarioSet


def _ar1(rng: np.random.Generator, n: int, rho: float, sigma: float) -> np.ndarray:
    out = np.empty(n)
    out[0] = rng.normal(0.0, sigma / np.sqrt(1.0 - rho**2))
    shocks = rng.normal(0.0, sigma, n)
    for t in range(1, n):
        out[t] = rho * out[t - 1] + shocks[t]
    return out


def _rescale_mean(series: np.ndarray, target: float, rounds: int = 50) -> np.ndarray:
    out = series.copy()
    for _ in range(rounds):
        mean = out.mean()
        if mean <= 0 or abs(mean - target) < 1e-12:
            break
        out = np.clip(out * target / mean, 0.0, 1.0)
    return out


def generate_synthetic_scenarios(
    seed: int = 0,
    years: int = 2,
    intervals_per_year: int = 336,
    solar_cf: float = 0.11,
    wind_cf: float = 0.29,
    peak_demand: float = 100.0,
    flexible_demand: float = 2.0,
    drought_fraction: float = 0.03,
    drought_depth: float = 0.1,
    peak_spike: float = 0.05,
    spike_intervals: int = 1,
    horizon_hours: float = HORIZON_HOURS,
) -> ScenarioSet:
    """Build ``years`` equally weighted scenarios.

    Mean capacity factors are matched per year by multiplicative rescaling;
    the highest fixed demand over the whole set equals ``peak_demand``.
    """
    if intervals_per_year < 24:
        raise ValueError("intervals_per_year must be at least 24")
    rng = np.random.default_rng(seed)
    n = intervals_per_year
    phase = np.arange(n) / n  # 0 = start of January
    season = np.cos(2.0 * np.pi * phase)  # +1 mid-winter, -1 mid-summer
    drought_len = max(2, int(round(drought_fraction * n)))

    raw = []
    for _ in range(years):
        demand = 0.72 + 0.18 * season + _ar1(rng, n, 0.7, 0.02)
        wind = 0.30 + 0.10 * season + _ar1(rng, n, 0.85, 0.09)
        solar = 0.11 * (1.0 - 0.75 * season) * rng.uniform(0.6, 1.3, n)

        # drought window placed in deep winter at a random offset
        start = int(rng.integers(0, max(1, n // 12))) + (n - n // 24) - drought_len // 2
        window = (start + np.arange(drought_len)) % n
        wind[window] = drought_depth * np.clip(wind[window], 0.05, None)
        solar[window] *= 0.3
        # demand climbs to a single peak interval in the middle of the window
        centre = drought_len // 2
        ramp = 1.0 - np.abs(np.arange(drought_len) - centre) / (centre + 1.0)
        demand[window] = demand.max() * (1.0 + 0.06 * ramp)
        demand[window[centre:centre + spike_intervals]] *= 1.0 + peak_spike
        demand *= 1.0 + 0.03 * rng.random()

        raw.append((demand, np.clip(wind, 0.0, 1.0), np.clip(solar, 0.0, 1.0)))

    top = max(d.max() for d, _, _ in raw)
    durations = np.full(n, horizon_hours / n)
    scenarios = []
    for y, (demand, wind, solar) in enumerate(raw):
        fixed = demand * (peak_demand / top)
        scenarios.append(Scenario(
            name=f"y{y}",
            probability=1.0 / years,
            durations=durations.copy(),
            fixed_demand=fixed,
            flexible_demand=np.full(n, flexible_demand),
            availability={"solar": _rescale_mean(solar, solar_cf), "wind": _rescale_mean(wind, wind_cf)},
        ))
    return ScenarioSet(tuple(scenarios), horizon_hours)
