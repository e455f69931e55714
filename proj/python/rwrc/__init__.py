"""Numerical laboratory for random walks among random conductances.

The compiled core exposes lattice boxes, conductance field samplers, the
Dirichlet eigensolver, local-time Monte Carlo, the p-energy variational
solver, scale algebra and homogenisation experiments. `run(config)` executes
a full experiment described by a config dict and returns the result dict.
"""

import json as _json

from ._core import (  # noqa: F401
    ConductanceField,
    LatticeBox,
    beta_scale,
    build_box,
    classify_regime,
    constant_field,
    cube_box,
    dirichlet_form,
    estimate_c_eff,
    gamma_scale,
    nonexit_mc,
    p_energy,
    principal_eigen,
    rate_constant_K,
    run_json,
    sample_elliptic_field,
    sample_tail_field,
    semigroup_apply,
    simulate_local_times,
    solve_chi_d,
    __version__,
)


def run(config):
    """Execute one experiment config (dict) and return the result document."""
    return _json.loads(run_json(_json.dumps(config)))
