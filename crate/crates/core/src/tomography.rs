//! Process characterization from a fixed set of pure input states.
//!
//! A channel on an `n`-level system is stored as the `n² × n²` process matrix
//! `D` whose row `(i₁,i₂)` holds the image of `|i₁⟩⟨i₂|`:
//!
//! ```text
//! T(|i₁⟩⟨i₂|) = Σ_{j₁,j₂} D[(i₁,i₂),(j₁,j₂)] |j₁⟩⟨j₂|
//! ```
//!
//! Pairs are flattened as `a * n + b` with basis labels ascending. Two-level
//! matrices printed in the literature often list pairs as
//! `(1,1),(1,0),(0,1),(0,0)`; [`paper_order_2level`] maps between the two.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::quantum::{
    c64, hermitian_eigenvalues, hermiticity_residual, kron, max_abs, outer, partial_trace_matrix,
    ComplexMatrix, DensityMatrix, DensityTolerance, HamiltonianModel, StateVector, Subsystem, C64,
};
use crate::validation::{ConstraintCheck, ValidationReport};

/// Residual tolerance for channels produced in-process.
pub const PROCESS_TOLERANCE: f64 = 1e-8;
/// Residual tolerance for process matrices built from external tomograms.
pub const INGESTION_TOLERANCE: f64 = 1e-6;
/// Maximum `‖M̃ M − 1‖_max` accepted by [`build_m`].
pub const M_INVERSE_TOLERANCE: f64 = 1e-10;

pub const TRACE_ROWS: &str = "trace rows";
pub const CONJUGATION_SYMMETRY: &str = "conjugation symmetry";
pub const CHOI_POSITIVITY: &str = "Choi positivity";

/// Label `(k₁, k₂)` of an input state, or `(i₁, i₂)` of a matrix unit.
pub type Label = (usize, usize);

pub fn pair_index(n: usize, a: usize, b: usize) -> usize {
    a * n + b
}

pub fn pair_of_index(n: usize, index: usize) -> Label {
    (index / n, index % n)
}

/// Positions of the ascending pair indices in the order
/// `(1,1),(1,0),(0,1),(0,0)`.
pub fn paper_order_2level() -> [usize; 4] {
    [
        pair_index(2, 1, 1),
        pair_index(2, 1, 0),
        pair_index(2, 0, 1),
        pair_index(2, 0, 0),
    ]
}

/// Re-index a 4×4 pair-indexed matrix into `(1,1),(1,0),(0,1),(0,0)` order.
pub fn to_paper_order(m: &ComplexMatrix) -> ComplexMatrix {
    let p = paper_order_2level();
    ComplexMatrix::from_fn(4, 4, |r, c| m[(p[r], p[c])])
}

/// Inverse of [`to_paper_order`].
pub fn from_paper_order(m: &ComplexMatrix) -> ComplexMatrix {
    let p = paper_order_2level();
    let mut out = ComplexMatrix::zeros(4, 4);
    for r in 0..4 {
        for c in 0..4 {
            out[(p[r], p[c])] = m[(r, c)];
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct InputBasisState {
    label: Label,
    amplitudes: StateVector,
}

impl InputBasisState {
    pub fn label(&self) -> Label {
        self.label
    }

    pub fn amplitudes(&self) -> &StateVector {
        &self.amplitudes
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix::from_matrix_unchecked(outer(&self.amplitudes, &self.amplitudes))
    }
}

/// The `n²` input states, ordered by flattened label:
///
/// * `k₁ > k₂`: `(|k₁⟩ + |k₂⟩)/√2`
/// * `k₁ = k₂`: `|k₁⟩`
/// * `k₁ < k₂`: `(|k₁⟩ + i|k₂⟩)/√2`
pub fn input_basis(n: usize) -> Result<Vec<InputBasisState>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "system dimension must be at least 2, got {n}"
        )));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut states = Vec::with_capacity(n * n);
    for k1 in 0..n {
        for k2 in 0..n {
            let mut c = StateVector::zeros(n);
            if k1 == k2 {
                c[k1] = c64(1.0, 0.0);
            } else if k1 > k2 {
                c[k1] = c64(s, 0.0);
                c[k2] = c64(s, 0.0);
            } else {
                c[k1] = c64(s, 0.0);
                c[k2] = c64(0.0, s);
            }
            states.push(InputBasisState {
                label: (k1, k2),
                amplitudes: c,
            });
        }
    }
    Ok(states)
}

/// `M[(k₁,k₂),(i₁,i₂)] = c_{i₁}^{(k₁,k₂)} conj(c_{i₂}^{(k₁,k₂)})` and its inverse.
#[derive(Clone, Debug)]
pub struct MMatrix {
    n: usize,
    m: ComplexMatrix,
    m_inv: ComplexMatrix,
}

impl MMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn inverse(&self) -> &ComplexMatrix {
        &self.m_inv
    }
}

pub fn build_m(n: usize) -> Result<MMatrix> {
    let basis = input_basis(n)?;
    let dim = n * n;
    let m = ComplexMatrix::from_fn(dim, dim, |row, col| {
        let c = basis[row].amplitudes();
        let (i1, i2) = pair_of_index(n, col);
        c[i1] * c[i2].conj()
    });
    let m_inv = m
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Inversion("input-state matrix M is singular".into()))?;
    let residual = max_abs(&(&m_inv * &m - ComplexMatrix::identity(dim, dim)));
    if residual > M_INVERSE_TOLERANCE {
        return Err(Error::Inversion(format!(
            "M inverse residual {residual:e} exceeds {M_INVERSE_TOLERANCE:e}"
        )));
    }
    Ok(MMatrix { n, m, m_inv })
}

/// Matrix of a linear map on `n × n` operators in the pair basis, at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessMatrix {
    n: usize,
    t: f64,
    d: ComplexMatrix,
}

impl ProcessMatrix {
    pub fn new(n: usize, t: f64, d: ComplexMatrix) -> Result<Self> {
        if d.nrows() != n * n || d.ncols() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: d.nrows(),
            });
        }
        Ok(Self { n, t, d })
    }

    pub fn identity(n: usize, t: f64) -> Self {
        Self {
            n,
            t,
            d: ComplexMatrix::identity(n * n, n * n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.d
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.d
    }

    pub fn entry(&self, i1: usize, i2: usize, j1: usize, j2: usize) -> C64 {
        self.d[(pair_index(self.n, i1, i2), pair_index(self.n, j1, j2))]
    }

    /// `R_(i₁,i₂) = T(|i₁⟩⟨i₂|)` read from row `(i₁,i₂)`.
    pub fn image_of_unit(&self, i1: usize, i2: usize) -> ComplexMatrix {
        let row = pair_index(self.n, i1, i2);
        ComplexMatrix::from_fn(self.n, self.n, |j1, j2| {
            self.d[(row, pair_index(self.n, j1, j2))]
        })
    }

    /// `C[(i₁,j₁),(i₂,j₂)] = D[(i₁,i₂),(j₁,j₂)]`
    pub fn choi(&self) -> ComplexMatrix {
        let n = self.n;
        ComplexMatrix::from_fn(n * n, n * n, |r, c| {
            let (i1, j1) = pair_of_index(n, r);
            let (i2, j2) = pair_of_index(n, c);
            self.d[(pair_index(n, i1, i2), pair_index(n, j1, j2))]
        })
    }

    pub fn choi_eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.choi())
    }

    pub fn determinant(&self) -> C64 {
        self.d.determinant()
    }

    /// Ratio of extreme singular values; infinite when `D` is exactly singular.
    pub fn condition_number(&self) -> f64 {
        condition_number(&self.d)
    }
}

pub(crate) fn condition_number(m: &ComplexMatrix) -> f64 {
    let sv = m.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Output density matrices for every input label on a shared time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct TomogramSeries {
    n: usize,
    times: Vec<f64>,
    snapshots: BTreeMap<Label, Vec<DensityMatrix>>,
}

impl TomogramSeries {
    pub fn new(
        n: usize,
        times: Vec<f64>,
        snapshots: BTreeMap<Label, Vec<DensityMatrix>>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::MalformedTomograms(format!(
                "system dimension must be at least 2, got {n}"
            )));
        }
        if times.is_empty() {
            return Err(Error::MalformedTomograms("empty time grid".into()));
        }
        if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::MalformedTomograms(format!(
                "times not strictly increasing at index {}",
                i + 1
            )));
        }
        for k1 in 0..n {
            for k2 in 0..n {
                let list = snapshots.get(&(k1, k2)).ok_or_else(|| {
                    Error::MalformedTomograms(format!("missing label ({k1},{k2})"))
                })?;
                if list.len() != times.len() {
                    return Err(Error::MalformedTomograms(format!(
                        "label ({k1},{k2}) has {} snapshots for {} times",
                        list.len(),
                        times.len()
                    )));
                }
                if let Some(rho) = list.iter().find(|r| r.dim() != n) {
                    return Err(Error::MalformedTomograms(format!(
                        "label ({k1},{k2}) has a {}-dimensional snapshot, expected {n}",
                        rho.dim()
                    )));
                }
            }
        }
        if let Some(extra) = snapshots.keys().find(|(a, b)| *a >= n || *b >= n) {
            return Err(Error::MalformedTomograms(format!(
                "unexpected label ({},{})",
                extra.0, extra.1
            )));
        }
        Ok(Self {
            n,
            times,
            snapshots,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn snapshots(&self) -> &BTreeMap<Label, Vec<DensityMatrix>> {
        &self.snapshots
    }

    pub fn snapshot(&self, label: Label, time_index: usize) -> &DensityMatrix {
        &self.snapshots[&label][time_index]
    }
}

/// `S[(k₁,k₂),(j₁,j₂)] = ⟨j₁|ρ^{(k₁,k₂)}(t)|j₂⟩`
pub fn s_matrix(series: &TomogramSeries, time_index: usize) -> Result<ComplexMatrix> {
    if time_index >= series.len() {
        return Err(Error::IndexOutOfRange {
            index: time_index,
            len: series.len(),
        });
    }
    let n = series.n();
    Ok(ComplexMatrix::from_fn(n * n, n * n, |row, col| {
        let (j1, j2) = pair_of_index(n, col);
        series.snapshot(pair_of_index(n, row), time_index).matrix()[(j1, j2)]
    }))
}

/// `D = M̃ S`, rejected if the trace or conjugation constraints fail beyond
/// [`INGESTION_TOLERANCE`].
pub fn d_from_tomograms(
    series: &TomogramSeries,
    m: &MMatrix,
    time_index: usize,
) -> Result<ProcessMatrix> {
    if m.n() != series.n() {
        return Err(Error::DimensionMismatch {
            expected: series.n(),
            found: m.n(),
        });
    }
    let s = s_matrix(series, time_index)?;
    let d = ProcessMatrix::new(series.n(), series.times()[time_index], m.inverse() * s)?;
    let trace = trace_residual(&d);
    if trace > INGESTION_TOLERANCE {
        return Err(Error::InvalidProcess {
            constraint: TRACE_ROWS,
            residual: trace,
        });
    }
    let conj = conjugation_residual(&d);
    if conj > INGESTION_TOLERANCE {
        return Err(Error::InvalidProcess {
            constraint: CONJUGATION_SYMMETRY,
            residual: conj,
        });
    }
    Ok(d)
}

/// `D[(i₁,i₂),(j₁,j₂)] = ⟨j₁| Tr_E[U(t) (|i₁⟩⟨i₂| ⊗ ρ_E) U†(t)] |j₂⟩`.
pub fn d_from_composite(
    model: &HamiltonianModel,
    rho_e: &DensityMatrix,
    t: f64,
) -> Result<ProcessMatrix> {
    if rho_e.dim() != model.dim_e() {
        return Err(Error::DimensionMismatch {
            expected: model.dim_e(),
            found: rho_e.dim(),
        });
    }
    let n = model.dim_s();
    let de = model.dim_e();
    let u = model.propagator(t);
    // U (|i₁⟩⟨i₂| ⊗ ρ_E) U† = U_{i₁} ρ_E U_{i₂}†, with U_i the i-th column block.
    let blocks: Vec<ComplexMatrix> = (0..n).map(|i| u.columns(i * de, de).into_owned()).collect();
    let left: Vec<ComplexMatrix> = blocks.iter().map(|b| b * rho_e.matrix()).collect();
    let mut d = ComplexMatrix::zeros(n * n, n * n);
    for i1 in 0..n {
        for i2 in 0..n {
            let image = &left[i1] * blocks[i2].adjoint();
            let reduced = partial_trace_matrix(&image, n, de, Subsystem::System)?;
            let row = pair_index(n, i1, i2);
            for j1 in 0..n {
                for j2 in 0..n {
                    d[(row, pair_index(n, j1, j2))] = reduced[(j1, j2)];
                }
            }
        }
    }
    ProcessMatrix::new(n, t, d)
}

/// Reduced output states for every input label, obtained by evolving
/// `|ψ^{(k₁,k₂)}⟩⟨ψ^{(k₁,k₂)}| ⊗ ρ_E` and tracing out the environment.
pub fn simulate_tomograms(
    model: &HamiltonianModel,
    rho_e: &DensityMatrix,
    times: &[f64],
) -> Result<TomogramSeries> {
    if rho_e.dim() != model.dim_e() {
        return Err(Error::DimensionMismatch {
            expected: model.dim_e(),
            found: rho_e.dim(),
        });
    }
    let n = model.dim_s();
    let inputs: Vec<(Label, ComplexMatrix)> = input_basis(n)?
        .into_iter()
        .map(|s| (s.label(), kron(s.projector().matrix(), rho_e.matrix())))
        .collect();
    let mut snapshots: BTreeMap<Label, Vec<DensityMatrix>> = BTreeMap::new();
    for &t in times {
        let u = model.propagator(t);
        let u_adj = u.adjoint();
        for (label, joint) in &inputs {
            let out = &u * joint * &u_adj;
            let reduced = partial_trace_matrix(&out, n, model.dim_e(), Subsystem::System)?;
            snapshots
                .entry(*label)
                .or_default()
                .push(DensityMatrix::from_matrix_unchecked(reduced));
        }
    }
    TomogramSeries::new(n, times.to_vec(), snapshots)
}

/// Applies the channel to an arbitrary operator by linearity.
pub fn apply_process_matrix(d: &ProcessMatrix, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = d.n();
    if x.nrows() != n || x.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.nrows(),
        });
    }
    // Row-vector convention: vec(T(X))ᵀ = vec(X)ᵀ D.
    let vec_x = DMatrix::from_row_iterator(1, n * n, x.transpose().iter().copied());
    let out = vec_x * d.matrix();
    Ok(ComplexMatrix::from_fn(n, n, |j1, j2| {
        out[(0, pair_index(n, j1, j2))]
    }))
}

/// `ρ(t) = Σ ρ₀[i₁,i₂] R_(i₁,i₂)`.
pub fn apply_process(d: &ProcessMatrix, rho0: &DensityMatrix) -> Result<DensityMatrix> {
    apply_process_matrix(d, rho0.matrix()).map(DensityMatrix::from_matrix_unchecked)
}

/// `max_{(i₁,i₂)} |Σ_j D[(i₁,i₂),(j,j)] − δ_{i₁i₂}|`
pub fn trace_residual(d: &ProcessMatrix) -> f64 {
    let n = d.n();
    let mut worst = 0.0f64;
    for i1 in 0..n {
        for i2 in 0..n {
            let row = pair_index(n, i1, i2);
            let sum: C64 = (0..n).map(|j| d.matrix()[(row, pair_index(n, j, j))]).sum();
            let target = if i1 == i2 { 1.0 } else { 0.0 };
            worst = worst.max((sum - c64(target, 0.0)).norm());
        }
    }
    worst
}

/// `max |conj(D[(i₁,i₂),(j₁,j₂)]) − D[(i₂,i₁),(j₂,j₁)]|`
pub fn conjugation_residual(d: &ProcessMatrix) -> f64 {
    pair_swap_residual(d.n(), d.matrix())
}

pub(crate) fn pair_swap_residual(n: usize, m: &ComplexMatrix) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..n * n {
        let (a1, a2) = pair_of_index(n, r);
        for c in 0..n * n {
            let (b1, b2) = pair_of_index(n, c);
            let mirrored = m[(pair_index(n, a2, a1), pair_index(n, b2, b1))];
            worst = worst.max((m[(r, c)].conj() - mirrored).norm());
        }
    }
    worst
}

/// Negative part of the Choi spectrum, or the Choi Hermiticity defect if that
/// is larger.
pub fn choi_residual(d: &ProcessMatrix) -> f64 {
    let choi = d.choi();
    let min_eig = hermitian_eigenvalues(&choi).first().copied().unwrap_or(0.0);
    (-min_eig).max(0.0).max(hermiticity_residual(&choi))
}

pub fn validate_process(d: &ProcessMatrix) -> ValidationReport {
    validate_process_with_tolerance(d, PROCESS_TOLERANCE)
}

pub fn validate_process_with_tolerance(d: &ProcessMatrix, tolerance: f64) -> ValidationReport {
    ValidationReport {
        checks: vec![
            ConstraintCheck::new(TRACE_ROWS, trace_residual(d), tolerance),
            ConstraintCheck::new(CONJUGATION_SYMMETRY, conjugation_residual(d), tolerance),
            ConstraintCheck::new(CHOI_POSITIVITY, choi_residual(d), tolerance),
        ],
    }
}

/// Tomograms of the identity channel: every snapshot is its input projector.
pub fn identity_tomograms(n: usize, times: &[f64]) -> Result<TomogramSeries> {
    let mut snapshots = BTreeMap::new();
    for state in input_basis(n)? {
        snapshots.insert(state.label(), vec![state.projector(); times.len()]);
    }
    TomogramSeries::new(n, times.to_vec(), snapshots)
}

/// Validates every snapshot of a series at the given density tolerance.
pub fn check_snapshots(series: &TomogramSeries, tol: DensityTolerance) -> Result<()> {
    for (&(k1, k2), list) in series.snapshots() {
        for (time_index, rho) in list.iter().enumerate() {
            if let Err(Error::InvalidDensityMatrix {
                constraint,
                residual,
            }) = DensityMatrix::with_tolerance(rho.matrix().clone(), tol)
            {
                return Err(Error::InvalidSnapshot {
                    k1,
                    k2,
                    time_index,
                    constraint,
                    residual,
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::evolve;
    use proptest::prelude::*;

    fn close(a: C64, b: f64) -> bool {
        (a - c64(b, 0.0)).norm() < 1e-12
    }

    #[test]
    fn input_basis_follows_three_case_rule() {
        let basis = input_basis(2).unwrap();
        assert_eq!(basis.len(), 4);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let by_label = |l: Label| basis.iter().find(|b| b.label() == l).unwrap().amplitudes();
        assert_eq!(by_label((0, 0)).as_slice(), &[c64(1.0, 0.0), c64(0.0, 0.0)]);
        assert_eq!(by_label((1, 0)).as_slice(), &[c64(s, 0.0), c64(s, 0.0)]);
        assert_eq!(by_label((0, 1)).as_slice(), &[c64(s, 0.0), c64(0.0, s)]);
        for n in 2..6 {
            for b in input_basis(n).unwrap() {
                assert!((b.amplitudes().norm() - 1.0).abs() < 1e-12);
            }
        }
        assert!(input_basis(1).is_err());
    }

    #[test]
    fn m_matrix_rows() {
        let m = build_m(2).unwrap();
        let row = |k1, k2| m.matrix().row(pair_index(2, k1, k2)).clone_owned();
        let r00 = row(0, 0);
        for (c, expected) in [1.0, 0.0, 0.0, 0.0].iter().enumerate() {
            assert!(close(r00[c], *expected));
        }
        // Row (1,0): c = (1,1)/√2, so every c_{i₁} c*_{i₂} = ½.
        for z in row(1, 0).iter() {
            assert!(close(*z, 0.5));
        }
        for n in 2..=4 {
            let m = build_m(n).unwrap();
            let residual =
                max_abs(&(m.inverse() * m.matrix() - ComplexMatrix::identity(n * n, n * n)));
            assert!(residual < 1e-12, "n = {n}: {residual:e}");
        }
    }

    #[test]
    fn identity_channel_gives_identity_d() {
        let series = identity_tomograms(3, &[0.0, 1.0]).unwrap();
        let m = build_m(3).unwrap();
        for k in 0..2 {
            let d = d_from_tomograms(&series, &m, k).unwrap();
            assert!(max_abs(&(d.matrix() - ComplexMatrix::identity(9, 9))) < 1e-12);
        }
    }

    fn amplitude_damping_tomograms(gamma: f64, t: f64) -> TomogramSeries {
        // Independent hand construction: ρ_out = K₀ρK₀† + K₁ρK₁†.
        let p = (-gamma * t).exp();
        let k0 = ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                c64(1.0, 0.0),
                c64(0.0, 0.0),
                c64(0.0, 0.0),
                c64(p.sqrt(), 0.0),
            ],
        );
        let k1 = ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                c64(0.0, 0.0),
                c64((1.0 - p).sqrt(), 0.0),
                c64(0.0, 0.0),
                c64(0.0, 0.0),
            ],
        );
        let mut snaps = BTreeMap::new();
        for s in input_basis(2).unwrap() {
            let rho = s.projector();
            let out = &k0 * rho.matrix() * k0.adjoint() + &k1 * rho.matrix() * k1.adjoint();
            snaps.insert(s.label(), vec![DensityMatrix::new(out).unwrap()]);
        }
        TomogramSeries::new(2, vec![t], snaps).unwrap()
    }

    #[test]
    fn amplitude_damping_d_entries() {
        let (gamma, t) = (1.0, 0.8);
        let series = amplitude_damping_tomograms(gamma, t);
        let d = d_from_tomograms(&series, &build_m(2).unwrap(), 0).unwrap();
        let e = (-gamma * t).exp();
        assert!(close(d.entry(1, 1, 1, 1), e));
        assert!(close(d.entry(1, 1, 0, 0), 1.0 - e));
        assert!(close(d.entry(1, 0, 1, 0), (-gamma * t / 2.0).exp()));
        assert!(close(d.entry(0, 0, 0, 0), 1.0));
        assert!(validate_process(&d).passed());
    }

    #[test]
    fn corrupted_tomograms_rejected_by_constraint() {
        let mut series = amplitude_damping_tomograms(1.0, 0.5);
        let bad = series.snapshots[&(1, 1)][0].matrix().scale(1.1);
        series.snapshots.get_mut(&(1, 1)).unwrap()[0] = DensityMatrix::from_matrix_unchecked(bad);
        let err = d_from_tomograms(&series, &build_m(2).unwrap(), 0).unwrap_err();
        assert!(matches!(
            err,
            Error::InvalidProcess {
                constraint: TRACE_ROWS,
                ..
            }
        ));
    }

    #[test]
    fn missing_labels_rejected() {
        let mut snaps = BTreeMap::new();
        snaps.insert((0, 0), vec![DensityMatrix::basis(2, 0)]);
        assert!(matches!(
            TomogramSeries::new(2, vec![0.0], snaps),
            Err(Error::MalformedTomograms(_))
        ));
    }

    #[test]
    fn identity_process_checks_and_choi_spectrum() {
        let d = ProcessMatrix::identity(2, 0.0);
        assert!(validate_process(&d).passed());
        let eig = d.choi_eigenvalues();
        // Unnormalized maximally entangled projector: one eigenvalue n, rest 0.
        assert!((eig[3] - 2.0).abs() < 1e-12);
        assert!(eig[..3].iter().all(|v| v.abs() < 1e-12));
        let choi = d.choi();
        for (r, c, v) in [(0, 0, 1.0), (3, 3, 1.0), (0, 3, 1.0), (1, 1, 0.0)] {
            assert!(close(choi[(r, c)], v));
        }
    }

    #[test]
    fn constructed_trace_violation_reported() {
        let mut m = ComplexMatrix::identity(4, 4);
        m[(0, 0)] = c64(1.1, 0.0);
        let d = ProcessMatrix::new(2, 0.0, m).unwrap();
        let report = validate_process(&d);
        assert!(!report.check(TRACE_ROWS).unwrap().passed());
        assert!((report.residual(TRACE_ROWS).unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn identity_process_application() {
        let rho = DensityMatrix::new(ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                c64(0.25, 0.0),
                c64(0.1, 0.3),
                c64(0.1, -0.3),
                c64(0.75, 0.0),
            ],
        ))
        .unwrap();
        let out = apply_process(&ProcessMatrix::identity(2, 0.0), &rho).unwrap();
        assert!(max_abs(&(out.matrix() - rho.matrix())) < 1e-15);
    }

    #[test]
    fn paper_order_round_trip() {
        let m = ComplexMatrix::from_fn(4, 4, |r, c| c64((4 * r + c) as f64, 0.0));
        let p = to_paper_order(&m);
        // The printed order starts with the (1,1) pair, ascending index 3.
        assert_eq!(p[(0, 0)], m[(3, 3)]);
        assert_eq!(p[(0, 3)], m[(3, 0)]);
        assert_eq!(from_paper_order(&p), m);
    }

    fn random_model(dim_e: usize, raw: &[f64]) -> (HamiltonianModel, DensityMatrix) {
        let dim = 2 * dim_e;
        let mut it = raw.iter().copied().cycle();
        let mut h = ComplexMatrix::zeros(dim, dim);
        for i in 0..dim {
            h[(i, i)] = c64(it.next().unwrap(), 0.0);
            for j in (i + 1)..dim {
                let z = c64(it.next().unwrap(), it.next().unwrap());
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
            }
        }
        let a = ComplexMatrix::from_fn(dim_e, dim_e, |_, _| {
            c64(it.next().unwrap(), it.next().unwrap())
        });
        let rho = &a * a.adjoint();
        let tr = rho.trace().re;
        (
            HamiltonianModel::new(2, dim_e, h).unwrap(),
            DensityMatrix::new(rho.unscale(tr)).unwrap(),
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn composite_channels_are_valid(
            dim_e in 1usize..4,
            raw in prop::collection::vec(-1.5f64..1.5, 96),
            t in 0.0f64..5.0,
        ) {
            let (model, rho_e) = random_model(dim_e, &raw);
            let d = d_from_composite(&model, &rho_e, t).unwrap();
            let report = validate_process(&d);
            prop_assert!(report.passed(), "{}", report);
        }

        #[test]
        fn composite_matches_direct_simulation_on_inputs(
            dim_e in 1usize..4,
            raw in prop::collection::vec(-1.5f64..1.5, 96),
            t in 0.0f64..5.0,
        ) {
            let (model, rho_e) = random_model(dim_e, &raw);
            let d = d_from_composite(&model, &rho_e, t).unwrap();
            for s in input_basis(2).unwrap() {
                let via_d = apply_process(&d, &s.projector()).unwrap();
                let joint = DensityMatrix::new(kron(s.projector().matrix(), rho_e.matrix())).unwrap();
                let direct = crate::quantum::partial_trace(
                    &evolve(&model, &joint, t).unwrap(), 2, dim_e, Subsystem::System,
                ).unwrap();
                prop_assert!(max_abs(&(via_d.matrix() - direct.matrix())) < 1e-10);
            }
        }

        #[test]
        fn tomogram_route_matches_composite_route(
            dim_e in 1usize..4,
            raw in prop::collection::vec(-1.5f64..1.5, 96),
            t in 0.0f64..5.0,
        ) {
            let (model, rho_e) = random_model(dim_e, &raw);
            let series = simulate_tomograms(&model, &rho_e, &[t]).unwrap();
            let from_tomo = d_from_tomograms(&series, &build_m(2).unwrap(), 0).unwrap();
            let from_comp = d_from_composite(&model, &rho_e, t).unwrap();
            prop_assert!(max_abs(&(from_tomo.matrix() - from_comp.matrix())) < 1e-10);
        }

        #[test]
        fn apply_process_is_linear(
            raw in prop::collection::vec(-1.5f64..1.5, 96),
            alpha in 0.0f64..1.0,
            t in 0.0f64..5.0,
        ) {
            let (model, rho_e) = random_model(2, &raw);
            let d = d_from_composite(&model, &rho_e, t).unwrap();
            let r1 = input_basis(2).unwrap()[1].projector();
            let r2 = DensityMatrix::maximally_mixed(2);
            let lhs = apply_process(&d, &r1.mix(&r2, alpha).unwrap()).unwrap();
            let rhs = apply_process(&d, &r1).unwrap().mix(&apply_process(&d, &r2).unwrap(), alpha).unwrap();
            prop_assert!(max_abs(&(lhs.matrix() - rhs.matrix())) < 1e-12);
        }
    }
}
