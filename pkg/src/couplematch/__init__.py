"""Many-to-one matching with couples under responsive preferences."""
from .dpda import hospital_choice, run_dpda, verify_dpda_rejection_property
from .errors import (
    ConstructionError,
    CoupleMatchError,
    ExtensionCapExceeded,
    InconsistentOrder,
    InsufficientDoctors,
    NotResponsive,
    SearchSpaceExceeded,
    ValidationError,
)
from .model import (
    Couple,
    Instance,
    Matching,
    PreferenceProfile,
    feasible_matchings,
    load_instance,
    validate_instance,
)
from .poset import ResponsivePoset, enumerate_extensions, sample_extension
from .prefs import (
    LAMBDA,
    CouplePref,
    DoctorPref,
    HospitalPref,
    check_diversity_aversion,
    check_extreme_altruism,
    check_hospital_responsive,
    couple_poset,
    derive_marginals,
    hospital_poset,
)
from .stability import (
    Block,
    enumerate_stable,
    find_blocks,
    hospital_prefers_set,
    is_individually_rational,
    is_stable,
)
from .theorems import (
    Budget,
    WitnessReport,
    build_altruism_counterexample,
    build_diversity_counterexample,
    build_example_1,
    build_example_2,
    verify_claim,
)

__version__ = "0.1.0"
