//! One-level 1D analysis and synthesis.
//!
//! Haar and Db4 run as a direct two-channel filter bank over the periodized
//! signal, which keeps the transform matrix orthogonal for any even length.
//! Cdf97 runs as four lifting steps plus scaling, with whole-sample symmetric
//! extension at both ends.

use super::basis::{CDF97_ALPHA, CDF97_BETA, CDF97_DELTA, CDF97_GAMMA, CDF97_ZETA};
use super::WaveletBasis;
use crate::error::{Error, Result};

/// Split `signal` into approximation and detail halves.
pub fn dwt1d_forward(signal: &[f64], basis: WaveletBasis) -> Result<(Vec<f64>, Vec<f64>)> {
    check_even(signal.len())?;
    let half = signal.len() / 2;
    let mut approx = vec![0.0; half];
    let mut detail = vec![0.0; half];
    forward_into(signal, &mut approx, &mut detail, basis);
    Ok((approx, detail))
}

/// Merge approximation and detail halves back into a signal.
pub fn dwt1d_inverse(approx: &[f64], detail: &[f64], basis: WaveletBasis) -> Result<Vec<f64>> {
    if approx.len() != detail.len() {
        return Err(Error::BandLengthMismatch { approx: approx.len(), detail: detail.len() });
    }
    if approx.is_empty() {
        return Err(Error::SignalTooShort(0));
    }
    let mut out = vec![0.0; approx.len() * 2];
    inverse_into(approx, detail, &mut out, basis);
    Ok(out)
}

fn check_even(n: usize) -> Result<()> {
    if !n.is_multiple_of(2) {
        Err(Error::OddLengthSignal(n))
    } else if n < 2 {
        Err(Error::SignalTooShort(n))
    } else {
        Ok(())
    }
}

/// Unchecked kernel: `signal.len()` is even and nonzero, outputs are half length.
pub(crate) fn forward_into(signal: &[f64], approx: &mut [f64], detail: &mut [f64], basis: WaveletBasis) {
    debug_assert!(signal.len() >= 2 && signal.len().is_multiple_of(2));
    debug_assert_eq!(approx.len() * 2, signal.len());
    match basis {
        WaveletBasis::Haar => haar_forward(signal, approx, detail),
        WaveletBasis::Db4 => periodic_forward(signal, approx, detail, &db4_taps()),
        WaveletBasis::Cdf97 => cdf97_forward(signal, approx, detail),
    }
}

pub(crate) fn inverse_into(approx: &[f64], detail: &[f64], out: &mut [f64], basis: WaveletBasis) {
    debug_assert_eq!(approx.len(), detail.len());
    debug_assert_eq!(out.len(), approx.len() * 2);
    match basis {
        WaveletBasis::Haar => haar_inverse(approx, detail, out),
        WaveletBasis::Db4 => periodic_inverse(approx, detail, out, &db4_taps()),
        WaveletBasis::Cdf97 => cdf97_inverse(approx, detail, out),
    }
}

pub(super) const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn haar_forward(x: &[f64], a: &mut [f64], d: &mut [f64]) {
    for (i, pair) in x.chunks_exact(2).enumerate() {
        a[i] = (pair[0] + pair[1]) * FRAC_1_SQRT_2;
        d[i] = (pair[0] - pair[1]) * FRAC_1_SQRT_2;
    }
}

fn haar_inverse(a: &[f64], d: &[f64], out: &mut [f64]) {
    for (i, pair) in out.chunks_exact_mut(2).enumerate() {
        pair[0] = (a[i] + d[i]) * FRAC_1_SQRT_2;
        pair[1] = (a[i] - d[i]) * FRAC_1_SQRT_2;
    }
}

pub(super) struct Taps {
    pub(super) low: [f64; 4],
    pub(super) high: [f64; 4],
}

pub(super) fn db4_taps() -> Taps {
    let s3 = 3f64.sqrt();
    let norm = 4.0 * std::f64::consts::SQRT_2;
    let low = [(1.0 + s3) / norm, (3.0 + s3) / norm, (3.0 - s3) / norm, (1.0 - s3) / norm];
    let high = [low[3], -low[2], low[1], -low[0]];
    Taps { low, high }
}

fn periodic_forward(x: &[f64], a: &mut [f64], d: &mut [f64], taps: &Taps) {
    let n = x.len();
    for i in 0..a.len() {
        let (mut lo, mut hi) = (0.0, 0.0);
        for k in 0..4 {
            let v = x[(2 * i + k) % n];
            lo += taps.low[k] * v;
            hi += taps.high[k] * v;
        }
        a[i] = lo;
        d[i] = hi;
    }
}

/// Transpose of [`periodic_forward`]; equals the inverse since the matrix is orthogonal.
fn periodic_inverse(a: &[f64], d: &[f64], out: &mut [f64], taps: &Taps) {
    let n = out.len();
    out.fill(0.0);
    for i in 0..a.len() {
        for k in 0..4 {
            out[(2 * i + k) % n] += taps.low[k] * a[i] + taps.high[k] * d[i];
        }
    }
}

// Lifting on split even (s) / odd (d) sequences. With whole-sample symmetric
// extension x[-1] = x[1] and x[n] = x[n-2], so s[m] mirrors to s[m-1] and
// d[-1] mirrors to d[0].

#[inline]
fn predict(s: &[f64], d: &mut [f64], c: f64) {
    let m = s.len();
    for i in 0..m {
        let right = if i + 1 < m { s[i + 1] } else { s[m - 1] };
        d[i] += c * (s[i] + right);
    }
}

#[inline]
fn update(s: &mut [f64], d: &[f64], c: f64) {
    for i in 0..s.len() {
        let left = if i > 0 { d[i - 1] } else { d[0] };
        s[i] += c * (left + d[i]);
    }
}

fn cdf97_forward(x: &[f64], s: &mut [f64], d: &mut [f64]) {
    for (i, pair) in x.chunks_exact(2).enumerate() {
        s[i] = pair[0];
        d[i] = pair[1];
    }
    predict(s, d, CDF97_ALPHA);
    update(s, d, CDF97_BETA);
    predict(s, d, CDF97_GAMMA);
    update(s, d, CDF97_DELTA);
    s.iter_mut().for_each(|v| *v *= CDF97_ZETA);
    d.iter_mut().for_each(|v| *v /= CDF97_ZETA);
}

fn cdf97_inverse(a: &[f64], detail: &[f64], out: &mut [f64]) {
    let mut s: Vec<f64> = a.iter().map(|v| v / CDF97_ZETA).collect();
    let mut d: Vec<f64> = detail.iter().map(|v| v * CDF97_ZETA).collect();
    update(&mut s, &d, -CDF97_DELTA);
    predict(&s, &mut d, -CDF97_GAMMA);
    update(&mut s, &d, -CDF97_BETA);
    predict(&s, &mut d, -CDF97_ALPHA);
    for (i, pair) in out.chunks_exact_mut(2).enumerate() {
        pair[0] = s[i];
        pair[1] = d[i];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const R2: f64 = std::f64::consts::SQRT_2;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn haar_constant_has_no_detail() {
        let (a, d) = dwt1d_forward(&[1.0; 4], WaveletBasis::Haar).unwrap();
        assert!(close(&a, &[R2, R2], 1e-12));
        assert!(close(&d, &[0.0, 0.0], 1e-12));
        let back = dwt1d_inverse(&[R2, R2], &[0.0, 0.0], WaveletBasis::Haar).unwrap();
        assert!(close(&back, &[1.0; 4], 1e-12));
    }

    #[test]
    fn haar_ramp() {
        let (a, d) = dwt1d_forward(&[1.0, 2.0, 3.0, 4.0], WaveletBasis::Haar).unwrap();
        assert!(close(&a, &[3.0 / R2, 7.0 / R2], 1e-12));
        assert!(close(&d, &[-1.0 / R2, -1.0 / R2], 1e-12));
        let back = dwt1d_inverse(&a, &d, WaveletBasis::Haar).unwrap();
        assert!(close(&back, &[1.0, 2.0, 3.0, 4.0], 1e-6));
    }

    /// Dense analysis matrix built straight from the filter taps: row i of the
    /// top half holds h shifted by 2i (mod n), bottom half holds g.
    fn dense_matrix(basis: WaveletBasis, n: usize) -> Vec<Vec<f64>> {
        let h = basis.analysis_lowpass().unwrap();
        let g = basis.analysis_highpass().unwrap();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n / 2 {
            for k in 0..h.len() {
                m[i][(2 * i + k) % n] += h[k];
                m[n / 2 + i][(2 * i + k) % n] += g[k];
            }
        }
        m
    }

    #[test]
    fn db4_matches_dense_matrix_and_preserves_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let x: Vec<f64> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let m = dense_matrix(WaveletBasis::Db4, 16);
        // orthogonality of the oracle itself
        for r in 0..16 {
            for c in 0..16 {
                let dot: f64 = (0..16).map(|k| m[r][k] * m[c][k]).sum();
                assert!((dot - if r == c { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        let y: Vec<f64> = m.iter().map(|row| row.iter().zip(&x).map(|(a, b)| a * b).sum()).collect();
        let (a, d) = dwt1d_forward(&x, WaveletBasis::Db4).unwrap();
        assert!(close(&a, &y[..8], 1e-12));
        assert!(close(&d, &y[8..], 1e-12));
        let e_in: f64 = x.iter().map(|v| v * v).sum();
        let e_out: f64 = a.iter().chain(&d).map(|v| v * v).sum();
        assert!(((e_out - e_in) / e_in).abs() < 1e-6);
    }

    #[test]
    fn db4_kills_linear_trend_away_from_wrap() {
        let x: Vec<f64> = (0..16).map(|i| 0.5 + 0.1 * i as f64).collect();
        let (_, d) = dwt1d_forward(&x, WaveletBasis::Db4).unwrap();
        // the last coefficient straddles the periodic wrap
        assert!(d[..7].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn round_trip_all_bases() {
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        for basis in WaveletBasis::ALL {
            let tol = if basis == WaveletBasis::Cdf97 { 1e-5 } else { 1e-6 };
            for n in [2usize, 4, 6, 10, 64] {
                let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
                let (a, d) = dwt1d_forward(&x, basis).unwrap();
                let back = dwt1d_inverse(&a, &d, basis).unwrap();
                assert!(close(&back, &x, tol), "{basis} n={n}");
            }
        }
    }

    #[test]
    fn cdf97_round_trip_many_signals() {
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let x: Vec<f64> = (0..64).map(|_| rng.gen::<f64>()).collect();
            let (a, d) = dwt1d_forward(&x, WaveletBasis::Cdf97).unwrap();
            let back = dwt1d_inverse(&a, &d, WaveletBasis::Cdf97).unwrap();
            worst = x.iter().zip(&back).map(|(p, q)| (p - q).abs()).fold(worst, f64::max);
        }
        assert!(worst <= 1e-5, "{worst}");
    }

    #[test]
    fn cdf97_dc_gain_and_vanishing_moments() {
        let (a, d) = dwt1d_forward(&[1.0; 32], WaveletBasis::Cdf97).unwrap();
        assert!(a.iter().all(|v| (v - R2).abs() < 1e-6));
        assert!(d.iter().all(|v| v.abs() < 1e-6));
        let ramp: Vec<f64> = (0..32).map(|i| i as f64 / 32.0).collect();
        let (_, d) = dwt1d_forward(&ramp, WaveletBasis::Cdf97).unwrap();
        // interior detail of a linear signal vanishes; mirrored ends see a kink
        assert!(d[1..14].iter().all(|v| v.abs() < 1e-6), "{d:?}");
    }

    #[test]
    fn errors() {
        assert!(matches!(dwt1d_forward(&[1.0, 2.0, 3.0], WaveletBasis::Haar), Err(Error::OddLengthSignal(3))));
        assert!(matches!(dwt1d_forward(&[], WaveletBasis::Db4), Err(Error::SignalTooShort(0))));
        assert!(matches!(
            dwt1d_inverse(&[1.0, 2.0], &[1.0], WaveletBasis::Haar),
            Err(Error::BandLengthMismatch { approx: 2, detail: 1 })
        ));
    }
}
