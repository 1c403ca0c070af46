"""Blind (CSI-free) beamforming for reconfigurable reflecting surfaces.

Simulates the link model Y_u = (h_{u,0} + sum_n h_{u,n} e^{j theta_n}) X + Z_u
with discrete per-element phase shifts, and provides power-measurement-only
configuration algorithms plus the full-CSI references they are compared
against.
"""

from .model import (
    BeamformingResult,
    ChannelSet,
    DimensionMismatchError,
    LinkBudget,
    PhaseConfig,
    effective_gain,
    effective_gain_all,
    from_db,
    is_good,
    make_result,
    min_snr,
    snr_all,
    sum_rate_uniform,
    to_db,
)
from .channels import (
    Assumption1Params,
    Topology,
    default_assumption1_params,
    desk_topology,
    gen_assumption1,
    gen_pathloss_rayleigh,
    load_channels,
    save_channels,
    substream,
)
from .sampling import (
    EmptyGroupError,
    SampleGroup,
    SampleSet,
    build_groups,
    collect_samples,
    draw_configs,
    group_mean_powers,
    load_samples,
    measure_power,
    measure_powers,
    sampling_alphabet,
    save_samples,
)
from .algorithms import (
    ALGORITHMS,
    TieBreakPolicy,
    best_cpp_config,
    cpp_all_configs,
    cpp_config,
    cpp_index,
    csm,
    csm_all,
    dft_ls_estimate,
    exhaustive_oracle,
    mv_csm,
    mv_csm_pipeline,
    p_csm,
    partition_blocks,
    rms,
)
from .theory import (
    AgreementStats,
    SlopeFit,
    achievability_bound,
    agreement_stats,
    converse_bound,
    hoeffding_radius,
    p1,
    partition_over_aligned,
    scaling_fit,
    vote_match_probability,
    vote_over_aligned,
)

__version__ = "0.1.0"
