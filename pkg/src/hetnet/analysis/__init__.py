from .geometry import (
    GH_EDGES,
    KS_EDGES,
    RPSSL_A_EDGES,
    RPSSL_B_EDGES,
    RPSSL_EDGES,
    NetworkGeometry,
    build_network_geometry,
    default_edges,
    distance_to_network,
    pentacle_project,
)
from .indices import (
    KSRegime,
    NonPositiveInput,
    StabilityIndices,
    nu_quantities,
    predict_ks_regime,
    rho,
    rho_123,
    rho_124,
    rho_gh,
    stability_indices,
)
from .itinerary import (
    Episode,
    Itinerary,
    NoEvents,
    TooFewEpisodes,
    WrongDimension,
    classify_edges,
    cycle_signature,
    extract_itinerary,
    loop_durations,
    residence_ratios,
)
