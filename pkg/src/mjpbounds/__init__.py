"""Concentration bounds for time averages of finite-state Markov jump processes.

The library validates a rate-matrix model, analyzes the generator's
pi-weighted spectral data, evaluates a family of exponential tail bounds for
P_nu(A_t/t >= u) where A_t integrates a centered observable along the path,
and checks every bound against exact trajectory simulation and brute-force
small-instance oracles.
"""

from .bounds import (
    FAMILIES,
    BoundCurve,
    BoundPoint,
    FSobolevFunction,
    ModelAnalysis,
    analyze,
    bound_bernstein_general,
    bound_curve,
    bound_fsobolev,
    bound_general,
    bound_perturbation,
    bound_poincare,
    bound_via_alpha,
    check_f_sobolev,
    donsker_varadhan_info,
    evaluate_family,
    iid_sum_bound,
    log_sobolev,
    lower_tail,
    two_sided,
    verify_info_representation,
)
from .combinatorics import (
    SeriesCoefficients,
    beta,
    beta_total,
    class_census,
    enumerate_classes,
    lambda0_coefficients,
    motzkin,
    motzkin_binomial,
    phi,
    phi_series,
)
from .markov import (
    MJPModel,
    Observable,
    ProbDist,
    QMatrix,
    center_observable,
    check_detailed_balance,
    flip_observable,
    invariant_distribution,
    is_irreducible,
    make_model,
    pi_expectation,
    probability_vector,
    stationary_model,
    transition_matrix,
    validate_q_matrix,
)
from .modelio import ModelFile, load_model, read_model_file, save_model
from .simulate import (
    CounterStream,
    TailEstimate,
    Trajectory,
    empirical_tail,
    empirical_variance_rate,
    sample_trajectory,
    time_average,
    time_averages,
)
from .spectral import (
    SpectralData,
    adjoint_generator,
    pi_inner,
    pi_variance,
    reduced_resolvent,
    resolvent_power,
    sigma_hat_sq,
    spectral_decomposition,
    symmetrized_generator,
)
from .tilting import (
    BernsteinParams,
    ConjugateResult,
    TiltedEval,
    bernstein_conjugate,
    bernstein_conjugate_vform,
    chi2_prefactor,
    cramer_transform_static,
    fenchel_conjugate,
    feynman_kac_norm,
    lambda0,
    lambda0_star,
    rate_function_variational,
)

__version__ = "0.1.0"
