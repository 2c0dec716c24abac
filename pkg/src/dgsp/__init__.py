"""dgsp: signal processing on directed graphs.

Subpackages cover the pipeline end to end: graph substrate
(`dgsp.graphs`), variation measures and Fourier transforms
(`dgsp.variation`, `dgsp.gft`, `dgsp.dgft`), linear filters
(`dgsp.filters`), sampling (`dgsp.sampling`), filter-based inverse
problems (`dgsp.inverse`), stationary process models
(`dgsp.stationary`), topology inference (`dgsp.topoid`), a minimal
graph neural network (`dgsp.gnn`), synthetic data (`dgsp.generators`),
file formats (`dgsp.fileio`), and the experiment CLI (`dgsp.cli`).
"""

from .graphs import (Digraph, ShiftOperator, adjacency_shift, apply_shift,
                     as_signal, directed_cycle, shift_powers)
from .variation import (directed_variation, dv_gradient, spectral_dispersion,
                        tv_l1, tv_quadratic)
from .gft import EigenBasis, eigen_gft_basis, gft, igft
from .dgft import OrthoBasis, learn_dgft, max_dv_direction
from .filters import (apply_edge_variant, apply_node_variant,
                      apply_polynomial, apply_spectral, design_taps,
                      ideal_lowpass, polynomial_matrix)
from .sampling import (BandlimitedModel, greedy_select, reconstruct,
                       recoverability, sample)
from .inverse import (BlindResult, DeconProblem, blind_deconvolve,
                      deconvolve_sparse, identify_system, lifted_adjoint,
                      lifted_forward, localize_sources)
from .stationary import (CovarianceEstimate, StationaryModel,
                         estimate_covariance, fit_taps_from_covariance,
                         generate, model_covariance)
from .topoid import (CgpEstimate, SemEstimate, SvarmEstimate, TimeSeries,
                     infer_cgp, infer_commute, infer_sem, infer_svarm,
                     simulate_cgp, simulate_sem)
from .gnn import GnnModel, LayerSpec, forward, loss_and_gradients, train

__version__ = "0.1.0"
