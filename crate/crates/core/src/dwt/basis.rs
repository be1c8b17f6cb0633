use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// CDF 9/7 lifting constants (predict, update, predict, update, scale).
pub const CDF97_ALPHA: f64 = -1.586134342;
pub const CDF97_BETA: f64 = -0.052980118;
pub const CDF97_GAMMA: f64 = 0.882911076;
pub const CDF97_DELTA: f64 = 0.443506852;
pub const CDF97_ZETA: f64 = 1.149604398;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveletBasis {
    Haar,
    Db4,
    #[default]
    Cdf97,
}

impl WaveletBasis {
    pub const ALL: [WaveletBasis; 3] = [WaveletBasis::Haar, WaveletBasis::Db4, WaveletBasis::Cdf97];

    pub fn name(self) -> &'static str {
        match self {
            WaveletBasis::Haar => "haar",
            WaveletBasis::Db4 => "db4",
            WaveletBasis::Cdf97 => "cdf97",
        }
    }

    /// Numeric id used by the pyramid dump and the C API.
    pub fn id(self) -> u8 {
        match self {
            WaveletBasis::Haar => 0,
            WaveletBasis::Db4 => 1,
            WaveletBasis::Cdf97 => 2,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.id() == id)
    }

    pub fn is_orthonormal(self) -> bool {
        !matches!(self, WaveletBasis::Cdf97)
    }

    /// Analysis lowpass taps. `None` for Cdf97, which is defined by lifting steps.
    pub fn analysis_lowpass(self) -> Option<Vec<f64>> {
        match self {
            WaveletBasis::Haar => Some(vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2]),
            WaveletBasis::Db4 => {
                let s3 = 3f64.sqrt();
                let norm = 4.0 * std::f64::consts::SQRT_2;
                Some(vec![(1.0 + s3) / norm, (3.0 + s3) / norm, (3.0 - s3) / norm, (1.0 - s3) / norm])
            }
            WaveletBasis::Cdf97 => None,
        }
    }

    /// Quadrature mirror of the lowpass: `g[k] = (-1)^k h[N-1-k]`.
    pub fn analysis_highpass(self) -> Option<Vec<f64>> {
        let h = self.analysis_lowpass()?;
        let n = h.len();
        Some((0..n).map(|k| if k % 2 == 0 { h[n - 1 - k] } else { -h[n - 1 - k] }).collect())
    }

    pub fn synthesis_lowpass(self) -> Option<Vec<f64>> {
        self.analysis_lowpass().map(reversed)
    }

    pub fn synthesis_highpass(self) -> Option<Vec<f64>> {
        self.analysis_highpass().map(reversed)
    }

    /// Tap offsets (relative to the even sample `2i`) that feed or receive one
    /// coefficient pair, as an inclusive `(min, max)` range.
    pub(crate) fn tap_span(self) -> (isize, isize) {
        match self {
            WaveletBasis::Haar => (0, 1),
            WaveletBasis::Db4 => (0, 3),
            WaveletBasis::Cdf97 => (-4, 5),
        }
    }
}

fn reversed(mut v: Vec<f64>) -> Vec<f64> {
    v.reverse();
    v
}

impl fmt::Display for WaveletBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WaveletBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "haar" | "db1" => Ok(WaveletBasis::Haar),
            "db4" | "daubechies4" => Ok(WaveletBasis::Db4),
            "cdf97" | "cdf9/7" | "bior4.4" => Ok(WaveletBasis::Cdf97),
            _ => Err(Error::UnknownBasis(s.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_taps() {
        let h = WaveletBasis::Haar.analysis_lowpass().unwrap();
        let g = WaveletBasis::Haar.analysis_highpass().unwrap();
        assert_eq!(h, vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        assert_eq!(g, vec![FRAC_1_SQRT_2, -FRAC_1_SQRT_2]);
    }

    #[test]
    fn db4_is_orthonormal_filter_pair() {
        let h = WaveletBasis::Db4.analysis_lowpass().unwrap();
        let g = WaveletBasis::Db4.analysis_highpass().unwrap();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        assert!((dot(&h, &h) - 1.0).abs() < 1e-12);
        assert!((dot(&g, &g) - 1.0).abs() < 1e-12);
        assert!(dot(&h, &g).abs() < 1e-12);
        // double-shift orthogonality
        assert!((h[0] * h[2] + h[1] * h[3]).abs() < 1e-12);
        assert!((h.iter().sum::<f64>() - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!(g.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn synthesis_is_time_reversed_analysis() {
        for b in [WaveletBasis::Haar, WaveletBasis::Db4] {
            let mut h = b.analysis_lowpass().unwrap();
            h.reverse();
            assert_eq!(b.synthesis_lowpass().unwrap(), h);
        }
        assert!(WaveletBasis::Cdf97.analysis_lowpass().is_none());
    }

    #[test]
    fn parse_names() {
        for b in WaveletBasis::ALL {
            assert_eq!(b.name().parse::<WaveletBasis>().unwrap(), b);
            assert_eq!(WaveletBasis::from_id(b.id()), Some(b));
        }
        assert!("sym8".parse::<WaveletBasis>().is_err());
    }
}
