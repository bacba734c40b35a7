"""Desk-scale electromagnetic switching-transient simulator.

Trapezoidal companion models, Bergeron lines and a dense nodal solver, with
transformer nameplate conversion, waveform analysis and ready-made cable and
line energization scenarios.
"""

from .analysis import (dominant_frequency, lattice_oracle, lc_step_oracle, natural_frequency,
                       peak_overvoltage, rl_exp_oracle, travel_metrics)
from .circuit import (BergeronLine, Capacitor, Circuit, Inductor, Resistor, SaturableInductor,
                      Switch, Transformer, VoltageSource, validate)
from .errors import ConfigError, NumericFault, ParameterError, SingularMatrixError, TimestepError
from .scenarios import default_config, parse_scenario, simulate
from .solver import WaveformSet, run
from .transformer import DDW, ZVD, TransformerNameplate, build_model, leakage_inductance

__version__ = "0.1.0"
