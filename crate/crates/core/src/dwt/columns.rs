//! Column transforms run as elementwise operations on whole rows.
//!
//! Every basis is a linear filter or lifting scheme along the column, so
//! each step combines complete rows instead of walking one strided column at
//! a time. The per-sample arithmetic is the same, in the same order, as the
//! 1D kernels in `transform1d`, so results are bit-identical.

use super::basis::{CDF97_ALPHA, CDF97_BETA, CDF97_DELTA, CDF97_GAMMA, CDF97_ZETA};
use super::scratch;
use super::transform1d::{db4_taps, FRAC_1_SQRT_2};
use super::WaveletBasis;
use crate::frame::Plane;

/// Analysis along columns: `src` has an even height `2m`, `approx` and
/// `detail` are `m` rows of the same width.
pub(crate) fn forward_columns(src: &Plane, approx: &mut Plane, detail: &mut Plane, basis: WaveletBasis) {
    let n = src.height();
    debug_assert!(n >= 2 && n.is_multiple_of(2));
    debug_assert_eq!(approx.dims(), (src.width(), n / 2));
    debug_assert_eq!(detail.dims(), approx.dims());
    match basis {
        WaveletBasis::Haar => {
            for i in 0..n / 2 {
                let (r0, r1) = (src.row(2 * i), src.row(2 * i + 1));
                for (((a, d), x0), x1) in approx.row_mut(i).iter_mut().zip(detail.row_mut(i)).zip(r0).zip(r1) {
                    *a = (x0 + x1) * FRAC_1_SQRT_2;
                    *d = (x0 - x1) * FRAC_1_SQRT_2;
                }
            }
        }
        WaveletBasis::Db4 => {
            let taps = db4_taps();
            for i in 0..n / 2 {
                let (a, d) = (approx.row_mut(i), detail.row_mut(i));
                a.fill(0.0);
                d.fill(0.0);
                for k in 0..4 {
                    let r = src.row((2 * i + k) % n);
                    for ((a, d), v) in a.iter_mut().zip(d.iter_mut()).zip(r) {
                        *a += taps.low[k] * v;
                        *d += taps.high[k] * v;
                    }
                }
            }
        }
        WaveletBasis::Cdf97 => {
            for i in 0..n / 2 {
                approx.row_mut(i).copy_from_slice(src.row(2 * i));
                detail.row_mut(i).copy_from_slice(src.row(2 * i + 1));
            }
            predict(approx, detail, CDF97_ALPHA);
            update(approx, detail, CDF97_BETA);
            predict(approx, detail, CDF97_GAMMA);
            update(approx, detail, CDF97_DELTA);
            approx.data_mut().iter_mut().for_each(|v| *v *= CDF97_ZETA);
            detail.data_mut().iter_mut().for_each(|v| *v /= CDF97_ZETA);
        }
    }
}

/// Synthesis along columns; inverse of [`forward_columns`].
pub(crate) fn inverse_columns(approx: &Plane, detail: &Plane, out: &mut Plane, basis: WaveletBasis) {
    let m = approx.height();
    debug_assert_eq!(detail.dims(), approx.dims());
    debug_assert_eq!(out.dims(), (approx.width(), 2 * m));
    match basis {
        WaveletBasis::Haar => {
            let w = out.width();
            for (i, pair) in out.data_mut().chunks_exact_mut(2 * w).enumerate() {
                let (even, odd) = pair.split_at_mut(w);
                for (((e, o), a), d) in even.iter_mut().zip(odd).zip(approx.row(i)).zip(detail.row(i)) {
                    *e = (a + d) * FRAC_1_SQRT_2;
                    *o = (a - d) * FRAC_1_SQRT_2;
                }
            }
        }
        WaveletBasis::Db4 => {
            let taps = db4_taps();
            let n = 2 * m;
            out.data_mut().fill(0.0);
            for i in 0..m {
                let (a, d) = (approx.row(i), detail.row(i));
                for k in 0..4 {
                    for ((o, a), d) in out.row_mut((2 * i + k) % n).iter_mut().zip(a).zip(d) {
                        *o += taps.low[k] * a + taps.high[k] * d;
                    }
                }
            }
        }
        WaveletBasis::Cdf97 => {
            let mut s = scratch::plane(approx.width(), m);
            let mut d = scratch::plane(approx.width(), m);
            s.data_mut().iter_mut().zip(approx.data()).for_each(|(s, a)| *s = a / CDF97_ZETA);
            d.data_mut().iter_mut().zip(detail.data()).for_each(|(d, v)| *d = v * CDF97_ZETA);
            update(&mut s, &d, -CDF97_DELTA);
            predict(&s, &mut d, -CDF97_GAMMA);
            update(&mut s, &d, -CDF97_BETA);
            predict(&s, &mut d, -CDF97_ALPHA);
            for i in 0..m {
                out.row_mut(2 * i).copy_from_slice(s.row(i));
                out.row_mut(2 * i + 1).copy_from_slice(d.row(i));
            }
            scratch::recycle(s);
            scratch::recycle(d);
        }
    }
}

// Lifting over rows with whole-sample symmetric extension: the even row past
// the end mirrors to the last even row, the odd row before the start mirrors
// to the first odd row.

fn predict(s: &Plane, d: &mut Plane, c: f64) {
    let m = s.height();
    for i in 0..m {
        let (here, right) = (s.row(i), s.row((i + 1).min(m - 1)));
        for ((d, a), b) in d.row_mut(i).iter_mut().zip(here).zip(right) {
            *d += c * (a + b);
        }
    }
}

fn update(s: &mut Plane, d: &Plane, c: f64) {
    for i in 0..s.height() {
        let (left, here) = (d.row(i.saturating_sub(1)), d.row(i));
        for ((s, a), b) in s.row_mut(i).iter_mut().zip(left).zip(here) {
            *s += c * (a + b);
        }
    }
}
