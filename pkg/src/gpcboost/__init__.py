"""Prediction-horizon design and simulation of GPC for a DC/DC boost converter."""
from .errors import (
    ConvergenceFailure,
    CornerDominanceViolated,
    DegenerateDenominator,
    DimensionMismatch,
    GpcBoostError,
    NoStableHorizon,
    NotBoostable,
    NotMonic,
    NumericalBlowup,
    SingularNormalMatrix,
    UnsupportedPoleStructure,
    ZeroPolynomial,
)
from .gpc import (
    ControllerState,
    DiophantineTable,
    GpcConfig,
    GpcSynthesis,
    control_step,
    diophantine,
    gain,
    prediction_matrices,
    synthesize,
)
from .numerics import (
    ContinuousTf,
    DiscreteTf,
    Polynomial,
    impulse_coeffs,
    poly_mul,
    poly_roots,
    tustin,
    zoh,
)
from .plant import (
    ConverterParams,
    ConverterState,
    OperatingPoint,
    continuous_tf,
    discrete_plant,
    nonlinear_derivatives,
    operating_point,
)
from .sim import Event, Scenario, SimMetrics, SimTrace, metrics, simulate
from .stability import (
    StabilityReport,
    SweepRecord,
    assess,
    closed_loop_charpoly,
    evaluate,
    min_horizon,
    robust_horizon,
    sweep,
)

__version__ = "0.1.0"
