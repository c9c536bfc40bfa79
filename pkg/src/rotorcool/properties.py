"""Temperature-dependent property data for the coolant oil and the shaft steel.

Both tables are evaluated by piecewise-linear interpolation and clamped to
their end rows outside the tabulated range.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

# temperature_c, density_kg_m3, kinematic_viscosity_m2_s, specific_heat_j_kgk,
# thermal_conductivity_w_mk, dynamic_viscosity_pa_s  (Fuchs FES 821-6436A ATF)
OIL_ROWS: tuple[tuple[float, float, float, float, float, float], ...] = (
    (40.0, 826.3, 0.0000179, 1980.0, 0.14, 0.01479077),
    (45.0, 823.1, 0.000015, 2000.0, 0.14, 0.0123465),
    (50.0, 820.0, 0.0000127, 2020.0, 0.14, 0.010414),
    (55.0, 816.8, 0.0000109, 2040.0, 0.14, 0.00890312),
    (60.0, 813.6, 0.0000094, 2060.0, 0.14, 0.00764784),
    (65.0, 810.4, 0.0000083, 2080.0, 0.13, 0.00672632),
    (70.0, 807.2, 0.0000073, 2090.0, 0.13, 0.00589256),
    (75.0, 804.0, 0.0000065, 2110.0, 0.13, 0.005226),
    (80.0, 800.8, 0.0000058, 2130.0, 0.13, 0.00464464),
    (85.0, 797.5, 0.0000052, 2150.0, 0.13, 0.004147),
    (90.0, 794.3, 0.0000048, 2170.0, 0.13, 0.00381264),
    (95.0, 791.1, 0.0000044, 2190.0, 0.13, 0.00348084),
    (100.0, 787.9, 0.000004, 2210.0, 0.13, 0.0031516),
    (105.0, 784.6, 0.0000037, 2220.0, 0.13, 0.00290302),
    (110.0, 781.4, 0.0000034, 2240.0, 0.13, 0.00265676),
    (115.0, 778.1, 0.0000032, 2260.0, 0.13, 0.00248992),
    (120.0, 774.9, 0.000003, 2280.0, 0.13, 0.0023247),
)

# temperature_c, density_kg_m3, thermal_conductivity_w_mk,
# thermal_diffusivity_1e-6_m2_s, specific_electrical_resistance_uohm_m,
# specific_heat_kj_kgk  (20MnCr5)
STEEL_ROWS: tuple[tuple[float, float, float, float, float, float], ...] = (
    (20.0, 7850.0, 45.9, 12.7, 0.227, 0.46),
    (100.0, 7850.0, 45.77, 12.0, 0.276, 0.47),
    (200.0, 7850.0, 45.60, 11.0, 0.346, 0.49),
)

FLUID_JSON_KEYS = (
    "temperature_c",
    "density_kg_m3",
    "kinematic_viscosity_m2_s",
    "specific_heat_j_kgk",
    "thermal_conductivity_w_mk",
    "dynamic_viscosity_pa_s",
)

VISCOSITY_CONSISTENCY_LIMIT = 0.005


class PropertyTableError(ValueError):
    """Raised when a property table violates its structural invariants."""


def _interp_row(temps: Sequence[float], rows: Sequence[Sequence[float]], T: float):
    """Return (interpolated row values, clamped flag) at temperature ``T``."""
    if T <= temps[0]:
        return tuple(rows[0]), T < temps[0]
    if T >= temps[-1]:
        return tuple(rows[-1]), T > temps[-1]
    j = bisect_right(temps, T) - 1
    lo, hi = rows[j], rows[j + 1]
    t = (T - temps[j]) / (temps[j + 1] - temps[j])
    if t == 0.0:
        return tuple(lo), False
    return tuple(a + t * (b - a) for a, b in zip(lo, hi)), False


@dataclass(frozen=True)
class FluidState:
    temperature: float
    density: float
    kinematic_viscosity: float
    specific_heat: float
    thermal_conductivity: float
    dynamic_viscosity: float
    clamped: bool = False

    @property
    def prandtl(self) -> float:
        return self.dynamic_viscosity * self.specific_heat / self.thermal_conductivity


@dataclass(frozen=True)
class ConsistencyReport:
    max_discrepancy: float
    discrepancies: tuple[float, ...]
    offending_temperatures: tuple[float, ...]
    limit: float = VISCOSITY_CONSISTENCY_LIMIT

    @property
    def passed(self) -> bool:
        return not self.offending_temperatures


@dataclass(frozen=True)
class FluidPropertyTable:
    """Oil properties indexed by temperature in degC.

    Rows are ``(T, density, kinematic viscosity, cp, conductivity, dynamic
    viscosity)`` in SI units. Construction validates ordering and positivity
    only; the mu = rho*nu cross-check lives in :func:`consistency_check` so a
    deliberately inconsistent table can still be inspected.
    """

    rows: tuple[tuple[float, float, float, float, float, float], ...] = OIL_ROWS

    def __post_init__(self) -> None:
        rows = tuple(tuple(float(v) for v in r) for r in self.rows)
        if not rows:
            raise PropertyTableError("fluid table is empty")
        for r in rows:
            if len(r) != 6:
                raise PropertyTableError(f"fluid row must have 6 columns, got {len(r)}")
            if any(v <= 0.0 for v in r):
                raise PropertyTableError(f"non-positive value in fluid row at T={r[0]}")
        temps = [r[0] for r in rows]
        if any(b <= a for a, b in zip(temps, temps[1:])):
            raise PropertyTableError("fluid table temperatures must be strictly increasing")
        for col, name in ((1, "density"), (2, "kinematic viscosity"), (5, "dynamic viscosity")):
            vals = [r[col] for r in rows]
            if any(b >= a for a, b in zip(vals, vals[1:])):
                raise PropertyTableError(f"{name} must decrease strictly with temperature")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "_temps", temps)

    @property
    def temperatures(self) -> list[float]:
        return list(self._temps)

    @property
    def t_min(self) -> float:
        return self._temps[0]

    @property
    def t_max(self) -> float:
        return self._temps[-1]

    @classmethod
    def from_json(cls, path: str | Path) -> "FluidPropertyTable":
        """Load rows from a JSON list of objects keyed by ``FLUID_JSON_KEYS``.

        A top-level object with a ``rows`` list is also accepted.
        """
        data = json.loads(Path(path).read_text())
        return cls.from_records(data["rows"] if isinstance(data, dict) else data)

    @classmethod
    def from_records(cls, records: Iterable[dict]) -> "FluidPropertyTable":
        try:
            rows = tuple(tuple(float(rec[k]) for k in FLUID_JSON_KEYS) for rec in records)
        except KeyError as exc:
            raise PropertyTableError(f"fluid property record missing key {exc}") from None
        return cls(rows)

    def to_records(self) -> list[dict]:
        return [dict(zip(FLUID_JSON_KEYS, r)) for r in self.rows]


@dataclass(frozen=True)
class SolidPropertyTable:
    """Shaft steel properties; diffusivity and resistivity are carried but unused."""

    rows: tuple[tuple[float, float, float, float, float, float], ...] = STEEL_ROWS

    def __post_init__(self) -> None:
        rows = tuple(tuple(float(v) for v in r) for r in self.rows)
        if not rows:
            raise PropertyTableError("solid table is empty")
        temps = [r[0] for r in rows]
        if any(b <= a for a, b in zip(temps, temps[1:])):
            raise PropertyTableError("solid table temperatures must be strictly increasing")
        if any(r[1] <= 0.0 or r[2] <= 0.0 or r[5] <= 0.0 for r in rows):
            raise PropertyTableError("solid density, conductivity and specific heat must be positive")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "_temps", temps)


DEFAULT_FLUID = FluidPropertyTable()
DEFAULT_SOLID = SolidPropertyTable()


def fluid_at(table: FluidPropertyTable, T: float) -> FluidState:
    """Interpolate the oil table at ``T`` degC, clamping outside the table."""
    (_, rho, nu, cp, k, mu), clamped = _interp_row(table._temps, table.rows, T)
    return FluidState(T, rho, nu, cp, k, mu, clamped)


def solid_at(table: SolidPropertyTable, T: float) -> tuple[float, float, float]:
    """Return ``(conductivity W/(m K), density kg/m3, specific heat kJ/(kg K))``."""
    (_, rho, k, _, _, cp), _ = _interp_row(table._temps, table.rows, T)
    return k, rho, cp


def consistency_check(
    table: FluidPropertyTable, limit: float = VISCOSITY_CONSISTENCY_LIMIT
) -> ConsistencyReport:
    """Compare tabulated dynamic viscosity against density * kinematic viscosity."""
    disc = tuple(abs(mu - rho * nu) / mu for _, rho, nu, _, _, mu in table.rows)
    bad = tuple(r[0] for r, d in zip(table.rows, disc) if d > limit)
    return ConsistencyReport(max(disc), disc, bad, limit)
