//! Dense complex linear algebra for finite-dimensional states.
//!
//! Composite spaces are ordered with the system as the slow (leftmost) tensor
//! factor: the basis vector `|s⟩ ⊗ |e⟩` sits at index `s * dim_e + e`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type StateVector = DVector<C64>;

pub const HERMITIAN_TOLERANCE: f64 = 1e-10;
pub const TRACE_TOLERANCE: f64 = 1e-10;
pub const EIGENVALUE_FLOOR: f64 = -1e-9;

pub(crate) const I: C64 = C64::new(0.0, 1.0);

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest entry modulus.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `max |m[i,j] - conj(m[j,i])|`, or infinity for non-square input.
pub fn hermiticity_residual(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// `|u⟩⟨v|`
pub fn outer(u: &StateVector, v: &StateVector) -> ComplexMatrix {
    u * v.adjoint()
}

/// The matrix unit `|i⟩⟨j|` on a `dim`-dimensional space.
pub fn matrix_unit(dim: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim, dim);
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

pub fn basis_vector(dim: usize, i: usize) -> StateVector {
    let mut v = StateVector::zeros(dim);
    v[i] = C64::new(1.0, 0.0);
    v
}

/// Eigendecomposition `H = V Λ V†` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    values: DVector<f64>,
    vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn new(h: &ComplexMatrix) -> Result<Self> {
        let residual = hermiticity_residual(h);
        if residual > HERMITIAN_TOLERANCE {
            return Err(Error::NotHermitian { residual });
        }
        // Exact symmetrization removes roundoff-level anti-Hermitian parts.
        let sym = (h + h.adjoint()).scale(0.5);
        let eig = nalgebra::SymmetricEigen::new(sym);
        Ok(Self {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn vectors(&self) -> &ComplexMatrix {
        &self.vectors
    }

    /// `‖H V − V Λ‖_max`
    pub fn residual(&self, h: &ComplexMatrix) -> f64 {
        let mut vl = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            for x in vl.column_mut(j).iter_mut() {
                *x *= lam;
            }
        }
        max_abs(&(h * &self.vectors - vl))
    }

    /// `V f(Λ) V†`
    pub fn apply_function<F: Fn(f64) -> C64>(&self, f: F) -> ComplexMatrix {
        let mut vf = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let fj = f(lam);
            for x in vf.column_mut(j).iter_mut() {
                *x *= fj;
            }
        }
        vf * self.vectors.adjoint()
    }

    /// `exp(−i H t)`
    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        self.apply_function(|lam| (-I * lam * t).exp())
    }
}

/// Tolerances applied when a matrix is accepted as a density matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityTolerance {
    pub hermitian: f64,
    pub trace: f64,
    pub eigenvalue_floor: f64,
}

impl DensityTolerance {
    pub const STRICT: Self = Self {
        hermitian: HERMITIAN_TOLERANCE,
        trace: TRACE_TOLERANCE,
        eigenvalue_floor: EIGENVALUE_FLOOR,
    };

    /// Used for externally produced tomograms.
    pub const INGESTION: Self = Self {
        hermitian: 1e-6,
        trace: 1e-6,
        eigenvalue_floor: -1e-6,
    };
}

/// Unit-trace, Hermitian, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, DensityTolerance::STRICT)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, tol: DensityTolerance) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let herm = hermiticity_residual(&matrix);
        if herm > tol.hermitian {
            return Err(Error::InvalidDensityMatrix {
                constraint: "Hermiticity",
                residual: herm,
            });
        }
        let trace_err = (matrix.trace() - C64::new(1.0, 0.0)).norm();
        if trace_err > tol.trace {
            return Err(Error::InvalidDensityMatrix {
                constraint: "unit trace",
                residual: trace_err,
            });
        }
        let rho = Self { matrix };
        let min_eig = rho.eigenvalues()[0];
        if min_eig < tol.eigenvalue_floor {
            return Err(Error::InvalidDensityMatrix {
                constraint: "positivity",
                residual: -min_eig,
            });
        }
        Ok(rho)
    }

    /// Wraps a matrix already known to be a valid state (e.g. the output of a
    /// unitary evolution or a partial trace of a valid state).
    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    /// `|ψ⟩⟨ψ|`; `psi` must be normalized.
    pub fn from_pure(psi: &StateVector) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > TRACE_TOLERANCE {
            return Err(Error::InvalidDensityMatrix {
                constraint: "unit norm",
                residual: (norm - 1.0).abs(),
            });
        }
        Ok(Self {
            matrix: outer(psi, psi),
        })
    }

    /// `|i⟩⟨i|`
    pub fn basis(dim: usize, i: usize) -> Self {
        Self {
            matrix: matrix_unit(dim, i, i),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim, dim).scale(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// `⟨i|ρ|i⟩`
    pub fn population(&self, i: usize) -> f64 {
        self.matrix[(i, i)].re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// `½ ‖ρ − σ‖₁`
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        trace_norm_hermitian(&(&self.matrix - &other.matrix)) * 0.5
    }

    /// Convex combination `α ρ + (1 − α) σ`.
    pub fn mix(&self, other: &DensityMatrix, alpha: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self {
            matrix: self.matrix.scale(alpha) + other.matrix.scale(1.0 - alpha),
        })
    }
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let sym = (m + m.adjoint()).scale(0.5);
    let mut values: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &ComplexMatrix) -> f64 {
    hermitian_eigenvalues(m).iter().map(|v| v.abs()).sum()
}

/// Which factor of a bipartite space survives a partial trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    System,
    Environment,
}

/// Partial trace of an arbitrary (not necessarily Hermitian) operator on
/// `H_S ⊗ H_E`.
pub fn partial_trace_matrix(
    m: &ComplexMatrix,
    dim_s: usize,
    dim_e: usize,
    keep: Subsystem,
) -> Result<ComplexMatrix> {
    let dim = dim_s * dim_e;
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: m.nrows(),
        });
    }
    let out = match keep {
        Subsystem::System => ComplexMatrix::from_fn(dim_s, dim_s, |a, b| {
            (0..dim_e).map(|e| m[(a * dim_e + e, b * dim_e + e)]).sum()
        }),
        Subsystem::Environment => ComplexMatrix::from_fn(dim_e, dim_e, |e, f| {
            (0..dim_s).map(|s| m[(s * dim_e + e, s * dim_e + f)]).sum()
        }),
    };
    Ok(out)
}

pub fn partial_trace(
    rho: &DensityMatrix,
    dim_s: usize,
    dim_e: usize,
    keep: Subsystem,
) -> Result<DensityMatrix> {
    partial_trace_matrix(rho.matrix(), dim_s, dim_e, keep).map(DensityMatrix::from_matrix_unchecked)
}

/// A closed system-plus-environment Hamiltonian (ħ = 1), decomposed once on
/// construction so that propagators at many times are cheap.
#[derive(Clone, Debug)]
pub struct HamiltonianModel {
    dim_s: usize,
    dim_e: usize,
    hamiltonian: ComplexMatrix,
    eigen: HermitianEigen,
}

impl HamiltonianModel {
    pub fn new(dim_s: usize, dim_e: usize, hamiltonian: ComplexMatrix) -> Result<Self> {
        let dim = dim_s * dim_e;
        if hamiltonian.nrows() != dim || hamiltonian.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: hamiltonian.nrows(),
            });
        }
        let eigen = HermitianEigen::new(&hamiltonian)?;
        Ok(Self {
            dim_s,
            dim_e,
            hamiltonian,
            eigen,
        })
    }

    pub fn dim_s(&self) -> usize {
        self.dim_s
    }

    pub fn dim_e(&self) -> usize {
        self.dim_e
    }

    pub fn dim(&self) -> usize {
        self.dim_s * self.dim_e
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn eigen(&self) -> &HermitianEigen {
        &self.eigen
    }

    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        self.eigen.propagator(t)
    }

    /// `U(t) X U†(t)` for any operator `X` on the composite space.
    pub fn conjugate(&self, x: &ComplexMatrix, t: f64) -> ComplexMatrix {
        let u = self.propagator(t);
        &u * x * u.adjoint()
    }
}

/// `exp(−iHt) ρ₀ exp(+iHt)`.
pub fn evolve(model: &HamiltonianModel, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if rho0.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: rho0.dim(),
        });
    }
    Ok(DensityMatrix::from_matrix_unchecked(
        model.conjugate(rho0.matrix(), t),
    ))
}
