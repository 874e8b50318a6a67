//! Small-scale fading: correlated large-scale parameters, clusters and
//! rays with elevation angles, and the channel coefficient equation.
//!
//! Generation order for one link:
//!
//! 1. [`generate_lsps`] draws the correlated septet DS/ASD/ASA/ZSD/ZSA/K/SF,
//!    with the ZSD log-mean taken from the distance and height dependent
//!    [`ElevationModel`].
//! 2. [`generate_delays`] and [`generate_powers`] build the cluster
//!    power-delay profile.
//! 3. [`generate_azimuth_angles`] and [`generate_zenith_angles`] place the
//!    cluster centres; ray offsets spread each cluster.
//! 4. [`couple_subpaths`] randomly pairs AOD rays with AOA, ZOA and ZOD rays.
//! 5. [`draw_xpr`] and [`draw_phases`] complete the polarization state.
//! 6. [`channel_coefficient`] evaluates the coefficient tensor.
//!
//! [`generate_cluster_set`] runs steps 2–5 with one substream per stage.

mod angles;
mod clusters;
mod coefficient;
mod lsp;

pub use angles::{
    generate_azimuth_angles, generate_zenith_angles, los_azimuth_scaling, los_zenith_scaling,
    nlos_azimuth_scaling, nlos_zenith_scaling, AngleSpec, RAY_OFFSETS,
};
pub use clusters::{
    couple_subpaths, draw_phases, draw_xpr, generate_cluster_set, generate_delays, generate_powers,
    los_delay_scaling, Cluster, ClusterInputs, ClusterOptions, ClusterPowers, ClusterSet, LosRay,
    Ray,
};
pub use coefficient::{
    channel_coefficient, doppler_frequency, spherical_unit_vector, ChannelTensor, Endpoint,
};
pub use lsp::{
    generate_lsps, zod_offset, Condition, ElevationModel, Gaussian, LargeScaleParams, LogNormal,
    LspModel, LspTable, OffsetCurve, RelativeHeight, ZsdCurve, LSP_NAMES,
};
