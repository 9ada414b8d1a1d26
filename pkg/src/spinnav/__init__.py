"""Adiabatic navigation of symmetric collective-spin states.

Simulates ``H(t) = xi Jz^2 - A t Jz + Omega(t) Jx`` on the N+1 symmetric
states, plans pulse schedules through the grid of diabatic crossings and maps
ion-trap and two-component BEC parameters onto the model.
"""

__version__ = "0.1.0"

from .basis import (
    SystemParams,
    basis_state,
    build_hamiltonian,
    coupling_factor,
    crossing_time,
    energies,
    energy,
    named_state,
    spin_operators,
)
from .pulses import Pulse, Rotation, Schedule, gaussian, pulse_area, validate_schedule
from .dynamics import (
    NumericalBlowup,
    PropagationError,
    SimulationResult,
    StepSizeUnderflow,
    fidelity,
    phase_optimized_fidelity,
    propagate,
    propagate_reference,
)
from .navigator import (
    RegimeError,
    RouteInfeasible,
    ScheduleConflict,
    adiabaticity_check,
    build_crossing_graph,
    effective_coupling_estimate,
    ghz_schedule,
    plan_route,
    run_ghz,
    schedule_from_route,
    wide_pulse_schedule,
)
from .analysis import BracketError, minimal_area, scan_pulse_center, scaling_curve
from .physmap import (
    BecParams,
    IonTrapParams,
    bec_effective_params,
    bec_lab_frame_check,
    design_chirp,
    ion_trap_xi,
)

__all__ = [name for name in dir() if not name.startswith("_")]
