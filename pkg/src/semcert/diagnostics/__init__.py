from .asf import AsfPlusRecord, AsfProfile, all_pairs, asf_profile, check_asf_plus
from .assumptions import (
    A1Report,
    A2Report,
    Theorem23Result,
    fit_a1_bounds,
    fit_asf_plus_envelope,
    theorem23_construction,
    verify_a1,
    verify_a2,
)
from .certificates import AffineF, AsfPlusCertificate, ConstantF, TableF, combine, f_from_dict, geometric
from .lwi import LwiRecord, check_lwi
from .providers import (
    DEFAULT_TOL,
    CouplingProvider,
    DiagonalProvider,
    ExplicitProvider,
    IndependentProvider,
    PushCache,
    Tolerances,
)
from .verdict import SeparationResult, Verdict, support_separation, uniqueness_verdict
