//! Profile decomposition of bounded sequences of wavelet coefficient fields.
//!
//! Fields are finitely supported maps from wavelet indices (generator, scale,
//! dyadic shift) to amplitudes. The crate provides exact dyadic arithmetic on
//! indices and affine frames, norms computed from coefficients, the greedy
//! profile extraction, synthetic corpora with known ground truth, and JSON
//! file formats.

pub mod commands;
pub mod dyadic;
pub mod error;
pub mod extract;
pub mod field;
pub mod io;
pub mod norms;
pub mod scalar;
pub mod synth;

mod cells;

pub use dyadic::{cube_of, orthogonality_gap, DyadicAffine, DyadicCube, DyadicVec, WaveletIndex};
pub use error::{Error, Result};
pub use extract::{
    cross_interaction, cross_interaction_fields, extract_profiles, verify, Decomposition,
    Diagnostic, ExtractConfig, Member, ProfileGroup, PruneReason, Space, StopReason,
    VerificationReport,
};
pub use field::{CoeffField, RankedOrder};
pub use norms::{
    besov_tilde, coeff_lp, critical_smoothness, embedding_chain_check, interpolation_check,
    lp_tilde, norm_report, sup_tilde, BesovParams, NormReport,
};
pub use scalar::Scalar;
pub use synth::{align_frames, generate, AlignmentReport, NoiseSpec, ParamLaw, SyntheticSpec};

pub type Field = CoeffField<f64>;
pub type Field32 = CoeffField<f32>;
pub type Config = ExtractConfig<f64>;
pub type Config32 = ExtractConfig<f32>;
pub type Decomp = Decomposition<f64>;
pub type Decomp32 = Decomposition<f32>;
pub type Besov = BesovParams<f64>;
pub type Spec = SyntheticSpec<f64>;
