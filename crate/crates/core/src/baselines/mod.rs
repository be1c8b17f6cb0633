//! Comparison anonymizers: Gaussian blur, block downsampling and SLIC superpixels.

mod downsample;
mod gaussian;
mod slic;

pub use downsample::{downsample_anonymize, DownsampleParams};
pub use gaussian::{gaussian_blur, GaussianParams};
pub use slic::{fill_segments, slic_segment, superpixel_anonymize, Segmentation, SlicParams};
