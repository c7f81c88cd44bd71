from .calculus import differentiate, log_fkn, normalize, recommended_rescale, rescale, resolve_plan
from .ensembles import (
    check_profile_fit,
    ensemble_diagnostics,
    make_log_coeffs,
    make_profile,
    sample_polynomial,
    validate_profile,
)
from .limits import (
    closed_form_cdf,
    closed_form_density,
    closed_form_transform,
    derived_profile_u_a,
    fixed_degree_limit_poly,
    legendre_fenchel,
    limit_radial_cdf,
)
from .measures import (
    angular_discrepancy,
    annulus_fraction,
    empirical_measure,
    ks_distance,
    radial_cdf,
    scale_measure,
)
from .rootfind import companion_roots, find_roots, match_roots, root_residual

__all__ = [
    'angular_discrepancy',
    'annulus_fraction',
    'check_profile_fit',
    'closed_form_cdf',
    'closed_form_density',
    'closed_form_transform',
    'companion_roots',
    'derived_profile_u_a',
    'differentiate',
    'empirical_measure',
    'ensemble_diagnostics',
    'find_roots',
    'fixed_degree_limit_poly',
    'ks_distance',
    'legendre_fenchel',
    'limit_radial_cdf',
    'log_fkn',
    'make_log_coeffs',
    'make_profile',
    'match_roots',
    'normalize',
    'radial_cdf',
    'recommended_rescale',
    'rescale',
    'resolve_plan',
    'root_residual',
    'sample_polynomial',
    'scale_measure',
    'validate_profile',
]
