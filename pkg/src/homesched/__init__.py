"""Day-ahead home energy scheduling with an embedded MILP solver."""

from .baseplan import base_plan_values, make_candidate_hook
from .builder import BuildResult, build_model
from .errors import (BuildError, ConfigError, HomeschedError, InputError,
                     MetricsError, ModelError, NumericalBreakdown)
from .household import (AppliancePhaseProgram, EssConfig, EvConfig, GridLimits,
                        Horizon, HouseholdSpec, HvacConfig, InflexibleLoads,
                        PhaseSpec, PriceSignal, PvConfig)
from .metrics import NetTrace, daily_cost, net_trace, par, plan_cost, sd
from .milp import (SolveOptions, Solution, check_solution, solve_lp,
                   solve_milp)
from .plan import SchedulePlan, extract_plan
from .scenarios import (SCENARIO_IDS, TARIFFS, BasePlanParams, ScenarioReport,
                        ScenarioResult, ScenarioSpec, compare, run_scenario)

__version__ = "0.1.0"
