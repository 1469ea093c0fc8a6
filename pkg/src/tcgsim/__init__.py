"""Qudit-level simulator for transition composite gates."""
from .core import DensityMatrix, HilbertSpace, Operator, StateVector
from .composer import ComposedGate, PathSpec, PathStep, compose_short_path, compose_symmetric, cu, spcu
from .circuit import Circuit, GateInstance, depth_and_counts, schedule, simulate, truth_table
from .noise import DeviceConfig, NoiseModel, QuditNoise
from .tomography import ChiMatrix, feedback_calibrate, qpt, qst, truth_table_fidelity

__version__ = "0.1.0"
