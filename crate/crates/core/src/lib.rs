//! Scalar coding for open-loop MISO channels.
//!
//! The crate evaluates how much mutual information is lost when a MISO
//! channel with `M` transmit antennas and no transmitter CSI is driven by a
//! scalar code: isotropic randomized beamforming (IR-BF), Alamouti, the ABBA
//! quasi-orthogonal code with a linear MMSE front end, TROMBI, their
//! randomized-beamforming combinations, and randomly beamformed Alamouti
//! (IR-BF-A). Ergodic rates are estimated by Monte-Carlo over Haar-random
//! frames; the IR-BF-A gap to the white-input rate `log2(1 + SNR)` is also
//! evaluated by quadrature, including its high-SNR and large-`M` limits.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the `*F64`
//! aliases below are the instantiations the CLI uses.

// `!(a <= b)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod ensembles;
pub mod error;
pub mod linalg;
pub mod model;
pub mod montecarlo;
pub mod quadrature;
pub mod scalar;
pub mod schemes;
pub mod special;
pub mod stats;

pub use analysis::{
    gap_asymptotic, gap_closed_form, gap_general, gap_limit_virtual, verify_monotonicity, GapMethod, GapValue,
    MonotonicityReport,
};
pub use ensembles::{
    projection_radius_pdf, sample_haar_frame, sample_projection_radius_sq, OrthonormalFrame, RngStream,
};
pub use error::{Error, Result};
pub use model::{bits_to_db, normalize_channel, ChannelVector, MiEstimate, SchemeId, SnrPoint};
pub use montecarlo::{ergodic_mi, ndo_check, sweep_ergodic_mi, McConfig, NdoReport};
pub use quadrature::{integrate_finite, QuadResult, Quadrature};
pub use scalar::Real;
pub use schemes::{
    abba_evcm, abba_mi, alamouti_evcm, alamouti_mi, ir_instant_mi, mmse_unbiased_snr, opt_mi, ostbc_max_rate,
    trombi_effective_channel, trombi_instant_mi, Evcm, EvcmKind, SchemeDraw,
};

pub type ChannelVectorF64 = ChannelVector<f64>;
pub type ChannelVectorF32 = ChannelVector<f32>;
pub type SnrPointF64 = SnrPoint<f64>;
pub type SnrPointF32 = SnrPoint<f32>;
pub type MiEstimateF64 = MiEstimate<f64>;
pub type MiEstimateF32 = MiEstimate<f32>;
pub type OrthonormalFrameF64 = OrthonormalFrame<f64>;
pub type OrthonormalFrameF32 = OrthonormalFrame<f32>;
pub type EvcmF64 = Evcm<f64>;
pub type EvcmF32 = Evcm<f32>;
pub type SchemeDrawF64 = SchemeDraw<f64>;
pub type SchemeDrawF32 = SchemeDraw<f32>;
pub type GapValueF64 = GapValue<f64>;
pub type GapValueF32 = GapValue<f32>;
pub type McConfigF64 = McConfig<f64>;
