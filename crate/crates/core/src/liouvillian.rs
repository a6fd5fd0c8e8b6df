//! Reconstruction of the time-local generator from a process-matrix
//! trajectory.
//!
//! With `D(t)` stored row-wise (see [`crate::tomography`]), the channel obeys
//! `dD/dt = D G`, where
//!
//! ```text
//! G[(j₁,j₂),(k₁,k₂)] = ⟨k₁| L(t)(|j₁⟩⟨j₂|) |k₂⟩
//! ```
//!
//! so `G = D⁻¹ dD/dt` wherever `D` is invertible. `D` may become singular at
//! isolated times; samples there are flagged rather than regularized.

use std::fmt;

use nalgebra::RowDVector;

use crate::error::{Error, Result};
use crate::quantum::{c64, ComplexMatrix, DensityMatrix, C64};
use crate::stencil::{local_times, uniform_step, Stencil, STENCIL_POINTS};
use crate::tomography::{condition_number, pair_index, pair_swap_residual, ProcessMatrix};
use crate::validation::{ConstraintCheck, ValidationReport};

/// `D` with a larger condition number yields a [`Quality::NearSingular`] generator.
pub const CONDITION_LIMIT: f64 = 1e10;
pub const GENERATOR_TOLERANCE: f64 = 1e-6;
/// Largest `|Tr ρ − 1|` tolerated during [`propagate`].
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;

pub const TRACE_PRESERVATION: &str = "trace preservation";
pub const GENERATOR_CONJUGATION: &str = "conjugation symmetry";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quality {
    Ok,
    NearSingular,
}

impl Quality {
    pub fn as_str(self) -> &'static str {
        match self {
            Quality::Ok => "ok",
            Quality::NearSingular => "near_singular",
        }
    }
}

impl fmt::Display for Quality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorMatrix {
    n: usize,
    t: f64,
    g: ComplexMatrix,
    condition_of_d: f64,
    quality: Quality,
}

impl GeneratorMatrix {
    /// Wraps a known generator, e.g. an analytic one.
    pub fn new(n: usize, t: f64, g: ComplexMatrix) -> Result<Self> {
        if g.nrows() != n * n || g.ncols() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: g.nrows(),
            });
        }
        Ok(Self {
            n,
            t,
            g,
            condition_of_d: 1.0,
            quality: Quality::Ok,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.g
    }

    pub fn matrix_mut(&mut self) -> &mut ComplexMatrix {
        &mut self.g
    }

    pub fn condition_of_d(&self) -> f64 {
        self.condition_of_d
    }

    pub fn quality(&self) -> Quality {
        self.quality
    }

    pub fn entry(&self, j1: usize, j2: usize, k1: usize, k2: usize) -> C64 {
        self.g[(pair_index(self.n, j1, j2), pair_index(self.n, k1, k2))]
    }
}

/// Entrywise derivative of `D(t)` at `index` using the five-point stencil.
pub fn differentiate_d(series: &[ProcessMatrix], index: usize) -> Result<ComplexMatrix> {
    let times: Vec<f64> = series.iter().map(ProcessMatrix::t).collect();
    let h = uniform_step(&times)?;
    let stencil = Stencil::for_index(index, series.len(), h)?;
    let n = series[index].n();
    if let Some(bad) = series.iter().find(|d| d.n() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad.n(),
        });
    }
    let pivot = series[index].matrix();
    let mut out = ComplexMatrix::zeros(n * n, n * n);
    for (w, d) in stencil
        .weights
        .iter()
        .zip(&series[stencil.start..stencil.start + STENCIL_POINTS])
    {
        out += (d.matrix() - pivot) * c64(*w, 0.0);
    }
    Ok(out)
}

/// `G = D⁻¹ Ḋ`.
pub fn reconstruct_g(d: &ProcessMatrix, d_dot: &ComplexMatrix) -> Result<GeneratorMatrix> {
    let n = d.n();
    if d_dot.nrows() != n * n || d_dot.ncols() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            found: d_dot.nrows(),
        });
    }
    let condition_of_d = condition_number(d.matrix());
    let solved = d.matrix().clone().lu().solve(d_dot);
    let (g, quality) = match solved {
        Some(g) if condition_of_d < CONDITION_LIMIT && g.iter().all(|z| z.is_finite()) => {
            (g, Quality::Ok)
        }
        Some(g) => (g, Quality::NearSingular),
        None => (
            ComplexMatrix::from_element(n * n, n * n, c64(f64::NAN, f64::NAN)),
            Quality::NearSingular,
        ),
    };
    Ok(GeneratorMatrix {
        n,
        t: d.t(),
        g,
        condition_of_d,
        quality,
    })
}

/// Differentiates and reconstructs at every sample of a uniform trajectory.
/// `Ḋ(t)` from a process-matrix function sampled at the five local stencil
/// times around `t` (never below zero). Returns `D(t)` alongside.
pub fn local_d_dot<F>(t: f64, h: f64, mut d_of_t: F) -> Result<(ProcessMatrix, ComplexMatrix)>
where
    F: FnMut(f64) -> Result<ProcessMatrix>,
{
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "derivative step must be positive, got {h}"
        )));
    }
    let (times, pos) = local_times(t, h);
    let samples = times
        .iter()
        .map(|&s| d_of_t(s))
        .collect::<Result<Vec<_>>>()?;
    let stencil = Stencil::for_index(pos, STENCIL_POINTS, h)?;
    let pivot = samples[pos].matrix();
    let mut d_dot = ComplexMatrix::zeros(pivot.nrows(), pivot.ncols());
    for (d, w) in samples.iter().zip(stencil.weights) {
        d_dot += (d.matrix() - pivot) * c64(w, 0.0);
    }
    let d = samples.into_iter().nth(pos).expect("five samples");
    Ok((d, d_dot))
}

/// `G(t)` from a process-matrix function, differentiated on a local stencil.
pub fn generator_at<F>(t: f64, h: f64, d_of_t: F) -> Result<(ProcessMatrix, GeneratorMatrix)>
where
    F: FnMut(f64) -> Result<ProcessMatrix>,
{
    let (d, d_dot) = local_d_dot(t, h, d_of_t)?;
    let g = reconstruct_g(&d, &d_dot)?;
    Ok((d, g))
}

pub fn reconstruct_series(series: &[ProcessMatrix]) -> Result<Vec<GeneratorMatrix>> {
    (0..series.len())
        .map(|k| reconstruct_g(&series[k], &differentiate_d(series, k)?))
        .collect()
}

/// `max_{(j₁,j₂)} |Σ_k G[(j₁,j₂),(k,k)]|`
pub fn trace_preservation_residual(g: &GeneratorMatrix) -> f64 {
    let n = g.n();
    (0..n * n)
        .map(|row| {
            (0..n)
                .map(|k| g.matrix()[(row, pair_index(n, k, k))])
                .sum::<C64>()
                .norm()
        })
        .fold(0.0, f64::max)
}

pub fn validate_generator(g: &GeneratorMatrix) -> ValidationReport {
    validate_generator_with_tolerance(g, GENERATOR_TOLERANCE)
}

pub fn validate_generator_with_tolerance(g: &GeneratorMatrix, tolerance: f64) -> ValidationReport {
    ValidationReport {
        checks: vec![
            ConstraintCheck::new(
                TRACE_PRESERVATION,
                trace_preservation_residual(g),
                tolerance,
            ),
            ConstraintCheck::new(
                GENERATOR_CONJUGATION,
                pair_swap_residual(g.n(), g.matrix()),
                tolerance,
            ),
        ],
    }
}

fn to_row(rho: &ComplexMatrix) -> RowDVector<C64> {
    // Row-major flattening matches pair_index.
    RowDVector::from_iterator(rho.len(), rho.transpose().iter().copied())
}

fn from_row(n: usize, v: &RowDVector<C64>) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |a, b| v[pair_index(n, a, b)])
}

/// `(dρ/dt)[k₁,k₂] = Σ ρ[j₁,j₂] G[(j₁,j₂),(k₁,k₂)]` for any operator `ρ`.
pub fn apply_generator_matrix(g: &GeneratorMatrix, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = g.n();
    if rho.nrows() != n || rho.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: rho.nrows(),
        });
    }
    Ok(from_row(n, &(to_row(rho) * g.matrix())))
}

pub fn apply_generator(g: &GeneratorMatrix, rho: &DensityMatrix) -> Result<ComplexMatrix> {
    apply_generator_matrix(g, rho.matrix())
}

/// Integrates `dρ/dt = L(t) ρ` across the generator grid with classical RK4.
/// Half-step generators come from cubic interpolation. Returns one state per grid
/// time, starting with `rho0`.
pub fn propagate(g_series: &[GeneratorMatrix], rho0: &DensityMatrix) -> Result<Vec<DensityMatrix>> {
    let Some(first) = g_series.first() else {
        return Ok(Vec::new());
    };
    let n = first.n();
    if rho0.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: rho0.dim(),
        });
    }
    for (index, g) in g_series.iter().enumerate() {
        if g.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: g.n(),
            });
        }
        if g.quality() == Quality::NearSingular {
            return Err(Error::SingularWindow { index, t: g.t() });
        }
    }
    if g_series.len() > 1 {
        let h = g_series[1].t() - g_series[0].t();
        if !(h > 0.0) {
            return Err(Error::NonUniformGrid { index: 0 });
        }
        for (i, w) in g_series.windows(2).enumerate() {
            if ((w[1].t() - w[0].t()) - h).abs() > 1e-6 * h {
                return Err(Error::NonUniformGrid { index: i });
            }
        }
    }

    let mut out = Vec::with_capacity(g_series.len());
    let mut v = to_row(rho0.matrix());
    out.push(rho0.clone());
    let half = c64(0.5, 0.0);
    for (i, w) in g_series.windows(2).enumerate() {
        let (g0, g1) = (w[0].matrix(), w[1].matrix());
        let h = w[1].t() - w[0].t();
        let mid = midpoint_generator(g_series, i);
        let hc = c64(h, 0.0);
        let k1 = &v * g0;
        let k2 = (&v + &k1 * (hc * half)) * &mid;
        let k3 = (&v + &k2 * (hc * half)) * &mid;
        let k4 = (&v + &k3 * hc) * g1;
        v += (k1 + k2 * c64(2.0, 0.0) + k3 * c64(2.0, 0.0) + k4) * (hc / 6.0);

        let rho = from_row(n, &v);
        let drift = (rho.trace() - c64(1.0, 0.0)).norm();
        if drift > TRACE_DRIFT_LIMIT {
            return Err(Error::TraceDrift { t: w[1].t(), drift });
        }
        out.push(DensityMatrix::from_matrix_unchecked(rho));
    }
    Ok(out)
}

/// `G` halfway between samples `i` and `i + 1`, by cubic interpolation
/// through four neighbouring samples (linear when fewer exist).
fn midpoint_generator(g_series: &[GeneratorMatrix], i: usize) -> ComplexMatrix {
    let len = g_series.len();
    if len < 4 {
        return (g_series[i].matrix() + g_series[i + 1].matrix()) * c64(0.5, 0.0);
    }
    let (start, weights) = if i == 0 {
        (0, [5.0, 15.0, -5.0, 1.0])
    } else if i + 2 >= len {
        (len - 4, [1.0, -5.0, 15.0, 5.0])
    } else {
        (i - 1, [-1.0, 9.0, 9.0, -1.0])
    };
    let mut mid = ComplexMatrix::zeros(g_series[i].matrix().nrows(), g_series[i].matrix().ncols());
    for (g, w) in g_series[start..start + 4].iter().zip(weights) {
        mid += g.matrix() * c64(w / 16.0, 0.0);
    }
    mid
}

/// Rates read off a two-level generator with the sparsity pattern
///
/// ```text
///            (1,1)   (1,0)   (0,1)   (0,0)
/// (1,1)  [  −γ₁      0       0      γ₁  ]
/// (1,0)  [   0     −γ₂/2     0       0  ]
/// (0,1)  [   0       0     −γ₂/2     0  ]
/// (0,0)  [  γ₃       0       0     −γ₃  ]
/// ```
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoLevelRates {
    /// Decay `|1⟩ → |0⟩`.
    pub gamma1: f64,
    /// Total coherence damping.
    pub gamma2: f64,
    /// Excitation `|0⟩ → |1⟩`.
    pub gamma3: f64,
    /// `γ₂ − γ₁ − γ₃`, the pure-dephasing excess.
    pub eta: f64,
    /// Rotation frequency of the `|1⟩⟨0|` coherence, `−Im G[(1,0),(1,0)]`.
    pub coherence_frequency: f64,
    /// Largest deviation from the pattern above.
    pub structure_residual: f64,
}

impl TwoLevelRates {
    pub fn new(gamma1: f64, gamma2: f64, gamma3: f64) -> Self {
        Self {
            gamma1,
            gamma2,
            gamma3,
            eta: gamma2 - gamma1 - gamma3,
            coherence_frequency: 0.0,
            structure_residual: 0.0,
        }
    }
}

pub fn lindblad_fit_two_level(g: &GeneratorMatrix) -> Result<TwoLevelRates> {
    if g.n() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: g.n(),
        });
    }
    let m = g.matrix();
    let e = pair_index(2, 1, 1);
    let c = pair_index(2, 1, 0);
    let cc = pair_index(2, 0, 1);
    let gr = pair_index(2, 0, 0);

    let gamma1 = -m[(e, e)].re;
    let gamma3 = -m[(gr, gr)].re;
    let gamma2 = -2.0 * m[(c, c)].re;
    let coherence_frequency = -m[(c, c)].im;

    let pattern = [(e, e), (e, gr), (gr, e), (gr, gr), (c, c), (cc, cc)];
    let mut residual = 0.0f64;
    for r in 0..4 {
        for col in 0..4 {
            if !pattern.contains(&(r, col)) {
                residual = residual.max(m[(r, col)].norm());
            }
        }
    }
    residual = residual
        .max((m[(e, gr)] - c64(gamma1, 0.0)).norm())
        .max((m[(gr, e)] - c64(gamma3, 0.0)).norm())
        .max(m[(e, e)].im.abs())
        .max(m[(gr, gr)].im.abs())
        .max((m[(cc, cc)] - m[(c, c)].conj()).norm());

    Ok(TwoLevelRates {
        gamma1,
        gamma2,
        gamma3,
        eta: gamma2 - gamma1 - gamma3,
        coherence_frequency,
        structure_residual: residual,
    })
}

/// Two-level generator with the pattern of [`TwoLevelRates`].
pub fn two_level_generator(t: f64, rates: &TwoLevelRates) -> GeneratorMatrix {
    let e = pair_index(2, 1, 1);
    let c = pair_index(2, 1, 0);
    let cc = pair_index(2, 0, 1);
    let gr = pair_index(2, 0, 0);
    let mut g = ComplexMatrix::zeros(4, 4);
    g[(e, e)] = c64(-rates.gamma1, 0.0);
    g[(e, gr)] = c64(rates.gamma1, 0.0);
    g[(gr, e)] = c64(rates.gamma3, 0.0);
    g[(gr, gr)] = c64(-rates.gamma3, 0.0);
    g[(c, c)] = c64(-rates.gamma2 / 2.0, -rates.coherence_frequency);
    g[(cc, cc)] = g[(c, c)].conj();
    GeneratorMatrix {
        n: 2,
        t,
        g,
        condition_of_d: 1.0,
        quality: Quality::Ok,
    }
}
