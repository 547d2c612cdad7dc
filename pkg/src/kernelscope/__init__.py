"""Quantum-versus-classical kernel screening toolkit.

Simulates data-embedding circuits, builds fidelity/projected/classical
kernels, computes the spectral geometry quantities that bound prediction
error (model complexity s, effective dimension d, geometric difference g),
engineers maximally separating datasets, and trains kernel ridge models.
"""

from .data import Dataset
from .engineer import EngineeredLabels, binarize, engineer_labels
from .geometry import (
    GeometryReport,
    effective_dimension,
    geometric_difference,
    model_complexity,
    screen,
    train_error_scalar,
)
from .kernels import (
    GramMatrix,
    classical_gram,
    dlog_quadratic_gram,
    fidelity_gram,
    normalize_trace,
    projected_gaussian_1rdm_gram,
    projected_linear_gram,
    shadow_gram,
)
from .learn import TrainedModel, evaluate, fit, grid_search, predict
from .linalg import EigDecomp, SymMatrix, psd_pinv, psd_sqrt, reg_solve, spectral_norm, sym_eig
from .shadows import ShadowSet, collect, qinf_estimate, qinf_exact, shadow_rdm
from .statevec import (
    EmbeddingSpec,
    QnnSpec,
    StateVector,
    embed,
    embed_e1,
    embed_e2,
    embed_e3,
    inner_product,
    pauli_expectations_1rdm,
    qnn_expectation,
    rdm,
)

__version__ = "0.1.0"
