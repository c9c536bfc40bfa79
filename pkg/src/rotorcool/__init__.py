"""Reduced-order thermal-hydraulics of liquid-cooled rotating rotor shafts."""

from rotorcool.analysis import (
    ParetoPoint,
    SweepRow,
    SweepSpec,
    design_scan,
    improvement_ratio,
    reference_grid,
    pareto_front,
    rank_models,
    run_sweep,
)
from rotorcool.geometry import (
    ChannelNetwork,
    FlowSegment,
    ShaftSpec,
    build_network,
    calibrate_fill_fraction,
    hydraulic_diameter,
    preset,
    shaft_network,
)
from rotorcool.properties import (
    FluidPropertyTable,
    FluidState,
    SolidPropertyTable,
    consistency_check,
    fluid_at,
    solid_at,
)
from rotorcool.solver import (
    OperatingPoint,
    SolveResult,
    SolverConfig,
    centrifugal_delta_p,
    friction_factor,
    grid_convergence,
    heat_transfer_rate,
    march,
    nusselt,
    rotational_reynolds,
    tangential_velocity,
)

__version__ = "0.1.0"
