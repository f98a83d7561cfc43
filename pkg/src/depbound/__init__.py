"""Tail bounds for functions of dependent random variables via Hellinger integrals."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .measures import (  # noqa: F401
    Dist,
    DivergenceKind,
    LogValue,
    divergence,
    hellinger_integral,
    hellinger_integral_exact,
    kl_divergence,
    log_hellinger,
    renyi_divergence,
)
from .kernels import (  # noqa: F401
    Kernel,
    apply_kernel,
    backward_channel,
    dobrushin_tv,
    dsbs_gamma_star,
    gamma_star_numeric,
    k_step,
    operator_norm,
    spectral,
    stationary_distribution,
)
from .processes import (  # noqa: F401
    SSRW,
    HomogeneousChain,
    IndependentProduct,
    InhomogeneousChain,
    NonMarkovBinary,
)
from .tensorize import (  # noqa: F401
    HolderSchedule,
    exact_joint_hellinger,
    tensor_lower_general,
    tensor_lower_markov,
    tensor_upper_general,
    tensor_upper_markov,
)
from .engine import (  # noqa: F401
    BoundParams,
    BoundReport,
    general_event_bound,
    markov_chain_bound,
    mcdiarmid_dep_bound,
    mean_gap_bound,
    median_shift,
    optimize_alpha,
    threshold_t,
)
