"""Two-sender quantum multiple-access channel toolkit.

Closed-form capacity regions for coupled bosonic modes under heterodyne
and homodyne detection with thermal loss, finite-dimensional rate bounds
of the Holevo type, and the brute-force oracles that verify both.
"""

from .access_bounds import (
    JointChannelTable,
    RatePoint,
    conditional_mutual_information,
    holevo_conditional_bound,
    holevo_sum_bound,
    induce_channel,
    merge_outcomes,
    mutual_information,
    rate_region,
    table_from_json,
    table_to_json,
)
from .gaussian_mac import (
    LinearGaussianChannel,
    OptimalSqueezing,
    RateRegion,
    SourceSpec,
    TwoUserSqueezing,
    capacity_region,
    gaussian_mutual_info,
    heterodyne_channel,
    heterodyne_rates,
    homodyne_channel,
    homodyne_single_user_capacity,
    homodyne_two_user_rates,
    optimal_squeezing,
    optimize_two_user_squeezing,
    squeezing_closed_form,
)
from .mode_dynamics import (
    ChannelParams,
    GaussianModeState,
    NormalModeData,
    TransferCoefficients,
    channel_params_from_dict,
    coherent_state,
    normal_modes,
    output_mode_state,
    squeezed_state,
    thermal_occupancy,
    transfer_coefficients,
    vacuum_state,
)
from .oracles import (
    BruteForceResult,
    LangevinEstimate,
    brute_force_accessible_info,
    make_rng,
    mc_gaussian_mi,
    random_density_matrix,
    random_ensemble,
    random_kraus_channel,
    random_povm,
    simulate_langevin,
)
from .quantum_core import (
    DensityMatrix,
    KrausChannel,
    LabeledEnsemble,
    Povm,
    apply_channel,
    ensemble_from_json,
    ensemble_to_json,
    identity_channel,
    kraus_from_json,
    kraus_to_json,
    matrix_from_json,
    matrix_to_json,
    measure,
    measurement_as_channel,
    nats_to_bits,
    povm_from_json,
    povm_to_json,
    relative_entropy,
    tensor,
    validate_density,
    von_neumann_entropy,
)

__version__ = "0.1.0"
