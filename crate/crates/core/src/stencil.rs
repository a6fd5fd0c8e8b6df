//! Five-point, fourth-order first-derivative stencils on uniform grids.
//!
//! Interior samples use the centered stencil. The two samples nearest each
//! edge use the shifted five-point stencils of the same order, so the
//! truncation error stays `O(h⁴)` across the whole grid.

use crate::error::{Error, Result};

pub const STENCIL_POINTS: usize = 5;

/// Numerators over `12 h`; row `p` differentiates at the `p`-th of five
/// consecutive samples.
const WEIGHTS: [[f64; STENCIL_POINTS]; STENCIL_POINTS] = [
    [-25.0, 48.0, -36.0, 16.0, -3.0],
    [-3.0, -10.0, 18.0, -6.0, 1.0],
    [1.0, -8.0, 0.0, 8.0, -1.0],
    [-1.0, 6.0, -18.0, 10.0, 3.0],
    [3.0, -16.0, 36.0, -48.0, 25.0],
];

/// Relative tolerance on step sizes when checking grid uniformity.
const UNIFORM_RTOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stencil {
    /// Index of the first sample the stencil reads.
    pub start: usize,
    /// Index of the sample being differentiated.
    pub index: usize,
    /// Weights already divided by `12 h`.
    pub weights: [f64; STENCIL_POINTS],
}

impl Stencil {
    pub fn for_index(index: usize, len: usize, h: f64) -> Result<Self> {
        if len < STENCIL_POINTS {
            return Err(Error::GridTooShort { len });
        }
        if index >= len {
            return Err(Error::IndexOutOfRange { index, len });
        }
        let start = index.saturating_sub(2).min(len - STENCIL_POINTS);
        let row = WEIGHTS[index - start];
        let scale = 1.0 / (12.0 * h);
        Ok(Self {
            start,
            index,
            weights: row.map(|w| w * scale),
        })
    }

    /// The weights sum to zero, so samples are taken relative to the
    /// differentiated one; constant data then yields exactly zero.
    pub fn apply(&self, values: &[f64]) -> f64 {
        let pivot = values[self.index];
        self.weights
            .iter()
            .zip(&values[self.start..self.start + STENCIL_POINTS])
            .map(|(w, v)| w * (v - pivot))
            .sum()
    }
}

/// Validates that `times` is a uniform grid with at least five points and
/// returns its spacing.
pub fn uniform_step(times: &[f64]) -> Result<f64> {
    if times.len() < STENCIL_POINTS {
        return Err(Error::GridTooShort { len: times.len() });
    }
    let h = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if !(h > 0.0) {
        return Err(Error::NonUniformGrid { index: 0 });
    }
    for (i, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - h).abs() > UNIFORM_RTOL * h {
            return Err(Error::NonUniformGrid { index: i });
        }
    }
    Ok(h)
}

/// Five sample times spaced by `h` that contain `t` and never go below zero,
/// together with the position of `t` among them.
pub fn local_times(t: f64, h: f64) -> ([f64; STENCIL_POINTS], usize) {
    let pos = if t >= 2.0 * h {
        2
    } else if t >= h {
        1
    } else {
        0
    };
    let mut out = [0.0; STENCIL_POINTS];
    for (j, slot) in out.iter_mut().enumerate() {
        *slot = t + (j as f64 - pos as f64) * h;
    }
    (out, pos)
}

/// First derivative of a uniformly sampled scalar series at `index`.
pub fn derivative(values: &[f64], h: f64, index: usize) -> Result<f64> {
    Ok(Stencil::for_index(index, values.len(), h)?.apply(values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_quartics_at_every_position() {
        let h = 0.1;
        let f = |x: f64| 2.0 - x + 3.0 * x * x - 0.5 * x.powi(3) + 0.25 * x.powi(4);
        let df = |x: f64| -1.0 + 6.0 * x - 1.5 * x * x + x.powi(3);
        let xs: Vec<f64> = (0..7).map(|i| 0.3 + i as f64 * h).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        for (i, &x) in xs.iter().enumerate() {
            let d = derivative(&ys, h, i).unwrap();
            assert!((d - df(x)).abs() < 1e-11, "index {i}: {d} vs {}", df(x));
        }
    }

    #[test]
    fn exponential_derivative_matches_analytic() {
        let h = 1e-3;
        let ts: Vec<f64> = (0..200).map(|i| i as f64 * h).collect();
        let ys: Vec<f64> = ts.iter().map(|t| (-t).exp()).collect();
        for (i, t) in ts.iter().enumerate() {
            let d = derivative(&ys, h, i).unwrap();
            assert!((d + (-t).exp()).abs() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let err = |h: f64| {
            let ts: Vec<f64> = (0..9).map(|i| 1.0 + (i as f64 - 4.0) * h).collect();
            let ys: Vec<f64> = ts.iter().map(|t| t.sin()).collect();
            (derivative(&ys, h, 4).unwrap() - 1f64.cos()).abs()
        };
        let ratio = err(0.04) / err(0.02);
        assert!((ratio - 16.0).abs() < 0.5, "ratio {ratio}");
    }

    #[test]
    fn constant_series_has_zero_derivative() {
        let ys = vec![3.5; 8];
        for i in 0..8 {
            assert_eq!(derivative(&ys, 0.01, i).unwrap(), 0.0);
        }
    }

    #[test]
    fn short_grids_and_bad_indices_rejected() {
        assert!(matches!(
            derivative(&[1.0, 2.0, 3.0, 4.0], 0.1, 0),
            Err(Error::GridTooShort { len: 4 })
        ));
        assert!(matches!(
            derivative(&[0.0; 5], 0.1, 5),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn uniformity_check() {
        let ts: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
        assert!((uniform_step(&ts).unwrap() - 0.1).abs() < 1e-15);
        let mut bad = ts.clone();
        bad[4] += 0.01;
        assert!(matches!(
            uniform_step(&bad),
            Err(Error::NonUniformGrid { .. })
        ));
    }

    #[test]
    fn local_times_stay_non_negative() {
        let (ts, pos) = local_times(0.0, 0.1);
        assert_eq!(pos, 0);
        assert_eq!(ts[0], 0.0);
        let (ts, pos) = local_times(0.15, 0.1);
        assert_eq!(pos, 1);
        assert!(ts[0] >= 0.0 && (ts[1] - 0.15).abs() < 1e-15);
        let (ts, pos) = local_times(1.0, 0.1);
        assert_eq!(pos, 2);
        assert!((ts[0] - 0.8).abs() < 1e-15);
    }
}
