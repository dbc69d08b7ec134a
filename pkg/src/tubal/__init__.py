"""Low-tubal-rank tensor completion for 3D seismic volumes."""
from ._backend import get_backend, set_backend
from .altmin import FactorPair, SolveReport, SolverConfig, complete, initialize, ls_x, ls_y, solve_block_ls
from .metrics import convergence_rate, rse
from .sampling import (
    ObservationMask,
    coverage_report,
    project,
    random_element_mask,
    random_trace_mask,
)
from .synth import SynthConfig, dipping_planes_volume, make_low_tubal_rank, ricker, synthesize
from .talgebra import (
    TSvdResult,
    fft_tubes,
    ifft_tubes,
    singular_tube_cdf,
    t_identity,
    t_product,
    t_svd,
    t_transpose,
    truncate_tubes,
    tubal_rank,
)
from .tnn import TnnConfig, complete_tnn, svt_tubes

__version__ = "0.1.0"
