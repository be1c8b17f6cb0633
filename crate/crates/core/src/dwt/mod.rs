//! Discrete wavelet transform: 1D filter banks, separable 2D levels and
//! multi-level pyramids.

mod basis;
mod columns;
pub mod dump;
mod pyramid;
mod scratch;
mod transform1d;

pub use basis::{WaveletBasis, CDF97_ALPHA, CDF97_BETA, CDF97_DELTA, CDF97_GAMMA, CDF97_ZETA};
pub use pyramid::{
    decompose, decompose_plane, dwt2d_level, idwt2d_level, max_levels, reconstruct, BandKind, DetailBands, LevelBands, Pad,
    Pyramid,
};
pub use transform1d::{dwt1d_forward, dwt1d_inverse};
