"""Averaging operators on finite metric measure spaces.

Realizes ``A_r f(x) = mu(B(x, r))^-1 * int_{B(x, r)} f dmu`` on weighted
finite point sets, together with the regularity quantities (doubling
constants, annulus and symmetric-difference moduli) that decide whether
``A_r`` is compact on L^1 and L^inf, explicit epsilon-net certificates for
the compact side and separated witness families for the non-compact side.
"""
from .space import (
    BallIndex,
    IndexSet,
    MetricMeasureSpace,
    SpaceError,
    annulus,
    ball,
    greedy_net,
    greedy_packing,
    grid_space,
    load_space,
    read_space,
    sym_diff,
)
from .operator import (
    AveragingOperator,
    apply,
    assemble,
    compose_apply,
    norm_p,
    operator_norm,
    oscillation_bound,
)
from .regularity import (
    doubling_constant,
    inverse_measure_gap,
    lemma33_forward_check,
    prop32_report,
    regularity_report,
    star_delta_for,
    star_modulus,
    symdiff_modulus,
)
from .compactness import (
    FamilySpec,
    NetCertificate,
    build_net_certificate,
    covering_number,
    equicontinuity_modulus,
    kolmogorov_riesz_check,
    lemma34_modulus,
    make_family,
    theorem41_bound_check,
    unit_ball_sample,
    verify_certificate,
)
from .counterexample import (
    WitnessFamily,
    dichotomy_sweep,
    l1_witnesses,
    linf_witnesses,
    verify_separation,
)
from .battery import verify_bounds

__version__ = "0.1.0"
