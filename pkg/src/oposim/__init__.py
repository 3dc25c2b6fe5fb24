"""Classical and quantum steady state of chi2/chi3 optical parametric oscillators."""

from ._kernels import BACKEND
from .cavity import (CovarianceMatrix, NoisePoint, TransferMatrices, cavity_transfer,
                     change_basis, oscillator_noise, output_covariance, phase_matrix)
from .entanglement import (EntanglementReport, dgcz_value, entanglement_report,
                           ppt_min_symplectic, symplectic_eigenvalues,
                           variance_of_combination)
from .errors import (BracketError, ConfigError, ConvergenceError, DomainError,
                     NonSymplecticError, OPOError, SelfOscillationError,
                     UnphysicalCovarianceError)
from .fluctuations import (PropagatorMatrix, coupling_matrix, medium_propagator,
                           symplectic_defect)
from .medium import (GainMedium, MeanFieldState, MeanFieldTrajectory, mean_field_rhs,
                     propagate_mean_fields, relative_gain_chi3, single_pass_gain)
from .numerics import (ToleranceConfig, find_root, integrate_ode, matrix_exponential,
                       symmetric_eigenvalues)
from .steadystate import (CavityConfig, SteadyState, conversion_efficiency,
                          solve_dropo, solve_steady_state, solve_tropo_equal,
                          solve_tropo_general, threshold_power)

__version__ = "0.1.0"
