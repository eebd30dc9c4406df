"""Generalized comb decimation filters for sigma-delta converters."""

__version__ = "0.1.0"

from .exceptions import (
    ConvergenceError,
    DegenerateZeroError,
    DivisionRemainderError,
    ImaginaryResidueError,
    SpecError,
)
from .filters import GcfSpec, ImpulseResponse, comb_tf, gcf3_impulse, gcf3_tf_oracle, gcf_tf
from .polyphase import (
    CascadeDecimator,
    CascadeSpec,
    PolyphaseBank,
    PolyphaseDecimator,
    decimate_stream,
    factorize,
    polyphase_components,
    reference_decimate,
    split,
)
from .qn import QnModel, delta_pqn, deltapqn_sweep, pqn, qn_psd
from .quantize import Po2Expansion, QuantizedCoefficientSet, po2_expand, round_to_error
from .sensitivity import (
    FrequencyGrid,
    PerturbationConfig,
    cascade_response,
    error_function,
    freq_response,
    hn_freq_response,
    perturbed_response,
)
from .zeros import (
    ZeroSet,
    displacement_hn,
    displacement_hp,
    match_zeros,
    nominal_zeros_hn,
    nominal_zeros_hp,
    root_oracle,
)
