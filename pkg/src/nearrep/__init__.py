"""Toolkit for finite-dimensional approximate unitary representations:
build them, measure their defects, certify finite (E, eps) instances,
and amplify traces by doubling and tensor powers."""

__version__ = "0.1.0"

from .amplify import (
    AmplificationPlan,
    ChoiMatrix,
    LazyRep,
    StinespringDilation,
    amplify_to_tolerance,
    choi_from_kraus,
    double,
    kraus_apply,
    materialize,
    plan,
    stinespring_dilate,
)
from .groups import GroupSpec, Word, builtin_group, cyclic_group, dihedral_group, symmetric_group
from .linalg import (
    MAX_DIM,
    NormKind,
    Projection,
    UnitaryMatrix,
    direct_sum,
    matrix_from_json,
    matrix_to_json,
    norm,
    polar_unitary,
    tensor,
)
from .projections import (
    SubspaceDistance,
    WedinPairing,
    almost_commuting_fix,
    conjugating_unitary,
    disjointify,
    find_orthogonalizing_unitary,
    subspace_distances,
    wedin_pair,
)
from .reps import (
    ApproxRep,
    Certificate,
    CertifyConfig,
    certify,
    evaluate,
    hom_defect,
    rep_from_json,
    rep_to_json,
    trace_obstruction,
    zoo,
)
from .sphere import (
    ConcentrationReport,
    RngSpec,
    concentration_bound,
    concentration_check,
    haar_unitary,
    mass_transport_bound,
    mass_transport_gap,
    onb_in_set,
    sample_sphere,
    sample_sphere_many,
    sphere_trace_integral,
)
