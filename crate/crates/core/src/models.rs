//! Executable versions of three open two-level systems with closed-form
//! reference results:
//!
//! * zero-temperature amplitude damping, given directly as output states;
//! * a two-level atom coupled to one resonant cavity mode prepared in a Fock
//!   state (Jaynes–Cummings);
//! * a two-level atom coupled to many modes of a one-dimensional cavity,
//!   starting excited with the field in vacuum.
//!
//! Atomic levels are `|0⟩` (ground) and `|1⟩` (excited). Atom–field composites
//! put the atom first, so `|s⟩|k⟩` sits at `s * (n_max + 1) + k`. Atomic
//! Hamiltonians are written `(ω_A/2) σ_z`, making `ω_A` the transition
//! frequency.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::liouvillian::{two_level_generator, GeneratorMatrix, TwoLevelRates};
use crate::quantum::{
    c64, kron, matrix_unit, ComplexMatrix, DensityMatrix, HamiltonianModel, HermitianEigen,
    StateVector, C64, I,
};
use crate::stencil::{uniform_step, Stencil};
use crate::tomography::{
    build_m, d_from_tomograms, pair_index, simulate_tomograms, ProcessMatrix, TomogramSeries,
};

/// Samples with `P` at or below this are flagged by [`gamma_from_p`].
pub const MIN_POPULATION: f64 = 1e-12;
/// Denominator magnitude below which [`jc_gammas_analytic`] reports a singular time.
pub const SINGULAR_DENOMINATOR: f64 = 1e-12;

fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&StateVector::from_vec(vec![c64(-1.0, 0.0), c64(1.0, 0.0)]))
}

/// `σ₊ = |1⟩⟨0|`
fn sigma_plus() -> ComplexMatrix {
    matrix_unit(2, 1, 0)
}

/// Annihilation operator truncated to `dim` Fock states.
pub fn annihilation(dim: usize) -> ComplexMatrix {
    let mut a = ComplexMatrix::zeros(dim, dim);
    for k in 1..dim {
        a[(k - 1, k)] = c64((k as f64).sqrt(), 0.0);
    }
    a
}

pub fn fock_state(dim: usize, m: usize) -> Result<DensityMatrix> {
    if m >= dim {
        return Err(Error::InvalidParameter(format!(
            "Fock state |{m}⟩ outside a {dim}-dimensional space"
        )));
    }
    Ok(DensityMatrix::basis(dim, m))
}

// ---------------------------------------------------------------------------
// Amplitude damping

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmplitudeDampingParams {
    pub gamma: f64,
}

impl AmplitudeDampingParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "decay rate must be positive, got {gamma}"
            )));
        }
        Ok(Self { gamma })
    }
}

fn damping_state(label: (usize, usize), gamma: f64, t: f64) -> ComplexMatrix {
    let e = (-gamma * t).exp();
    let s = (-gamma * t / 2.0).exp();
    let (p11, p00, coh10) = match label {
        (0, 0) => (0.0, 1.0, c64(0.0, 0.0)),
        (1, 1) => (e, 1.0 - e, c64(0.0, 0.0)),
        (0, 1) => (e / 2.0, 1.0 - e / 2.0, c64(0.0, s / 2.0)),
        (1, 0) => (e / 2.0, 1.0 - e / 2.0, c64(s / 2.0, 0.0)),
        _ => unreachable!("two-level labels only"),
    };
    // coh10 = ⟨1|ρ|0⟩
    ComplexMatrix::from_row_slice(2, 2, &[c64(p00, 0.0), coh10.conj(), coh10, c64(p11, 0.0)])
}

/// The four output trajectories of the zero-temperature decay channel.
pub fn example_a_tomograms(p: &AmplitudeDampingParams, times: &[f64]) -> Result<TomogramSeries> {
    if let Some(t) = times.iter().find(|t| !(**t >= 0.0)) {
        return Err(Error::InvalidParameter(format!("negative time {t}")));
    }
    let mut snapshots = BTreeMap::new();
    for label in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let list = times
            .iter()
            .map(|&t| DensityMatrix::new(damping_state(label, p.gamma, t)))
            .collect::<Result<Vec<_>>>()?;
        snapshots.insert(label, list);
    }
    TomogramSeries::new(2, times.to_vec(), snapshots)
}

/// Closed-form process matrix of the decay channel.
pub fn amplitude_damping_d(p: &AmplitudeDampingParams, t: f64) -> ProcessMatrix {
    let e = (-p.gamma * t).exp();
    let s = (-p.gamma * t / 2.0).exp();
    two_level_d(t, e, 0.0, c64(s, 0.0))
}

pub fn amplitude_damping_d_dot(p: &AmplitudeDampingParams, t: f64) -> ComplexMatrix {
    let g = p.gamma;
    let e = (-g * t).exp();
    let s = (-g * t / 2.0).exp();
    two_level_d_raw(-g * e, g * e, 0.0, 0.0, c64(-g * s / 2.0, 0.0))
}

pub fn amplitude_damping_generator(p: &AmplitudeDampingParams, t: f64) -> GeneratorMatrix {
    two_level_generator(t, &TwoLevelRates::new(p.gamma, p.gamma, 0.0))
}

/// Two-level `D` with excited-row populations `(p_exc, 1 − p_exc)`, ground-row
/// excited population `q_exc`, and `|1⟩⟨0|` coherence factor `coh`.
fn two_level_d(t: f64, p_exc: f64, q_exc: f64, coh: C64) -> ProcessMatrix {
    let d = two_level_d_raw(p_exc, 1.0 - p_exc, q_exc, 1.0 - q_exc, coh);
    ProcessMatrix::new(2, t, d).expect("4x4 by construction")
}

fn two_level_d_raw(e_to_e: f64, e_to_g: f64, g_to_e: f64, g_to_g: f64, coh: C64) -> ComplexMatrix {
    let e = pair_index(2, 1, 1);
    let c = pair_index(2, 1, 0);
    let cc = pair_index(2, 0, 1);
    let g = pair_index(2, 0, 0);
    let mut d = ComplexMatrix::zeros(4, 4);
    d[(e, e)] = c64(e_to_e, 0.0);
    d[(e, g)] = c64(e_to_g, 0.0);
    d[(g, e)] = c64(g_to_e, 0.0);
    d[(g, g)] = c64(g_to_g, 0.0);
    d[(c, c)] = coh;
    d[(cc, cc)] = coh.conj();
    d
}

// ---------------------------------------------------------------------------
// Jaynes–Cummings

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JaynesCummingsParams {
    pub omega_a: f64,
    pub omega: f64,
    pub lambda: f64,
    pub fock_m: usize,
    /// Highest Fock state kept; the field space has `n_max + 1` levels.
    pub n_max: usize,
}

impl JaynesCummingsParams {
    /// Resonant model in the frame co-rotating with the field (`ω_A = ω = 0`)
    /// and the smallest exact cutoff for a Fock-`M` field.
    pub fn resonant(lambda: f64, fock_m: usize) -> Self {
        Self {
            omega_a: 0.0,
            omega: 0.0,
            lambda,
            fock_m,
            n_max: fock_m + 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.omega.is_finite() && self.omega_a.is_finite()) {
            return Err(Error::InvalidParameter(
                "non-finite Jaynes–Cummings parameter".into(),
            ));
        }
        if (self.omega_a - self.omega).abs() > 1e-12 * self.omega.abs().max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "atom ({}) and field ({}) must be resonant",
                self.omega_a, self.omega
            )));
        }
        if self.n_max < self.fock_m + 1 {
            return Err(Error::InvalidParameter(format!(
                "Fock cutoff {} must be at least M + 1 = {}",
                self.n_max,
                self.fock_m + 1
            )));
        }
        Ok(())
    }

    pub fn field_dim(&self) -> usize {
        self.n_max + 1
    }

    /// `(cos²(λt√M), cos²(λt√(M+1)))`
    pub fn xi(&self, t: f64) -> (f64, f64) {
        let (a, b) = self.phases(t);
        (a.cos().powi(2), b.cos().powi(2))
    }

    fn phases(&self, t: f64) -> (f64, f64) {
        let m = self.fock_m as f64;
        (
            self.lambda * t * m.sqrt(),
            self.lambda * t * (m + 1.0).sqrt(),
        )
    }
}

/// `(ω_A/2) σ_z + ω a†a + λ (σ₊ a + σ₋ a†)` on the truncated atom–field space.
pub fn jc_model(p: &JaynesCummingsParams) -> Result<HamiltonianModel> {
    p.validate()?;
    let nf = p.field_dim();
    let a = annihilation(nf);
    let id_f = ComplexMatrix::identity(nf, nf);
    let id_a = ComplexMatrix::identity(2, 2);
    let sp = sigma_plus();
    let coupling = kron(&sp, &a);
    let h = kron(&sigma_z(), &id_f) * c64(p.omega_a / 2.0, 0.0)
        + kron(&id_a, &(a.adjoint() * &a)) * c64(p.omega, 0.0)
        + (&coupling + coupling.adjoint()) * c64(p.lambda, 0.0);
    HamiltonianModel::new(2, nf, h)
}

/// Closed-form atom–field state at time `t` for atom `c₀|0⟩ + c₁|1⟩` and field
/// amplitudes `e_k`. Terms that would leave the truncated field space are
/// dropped, so the field tail near `n_max` must be negligible.
pub fn jc_analytic_state(
    c0: C64,
    c1: C64,
    field: &[C64],
    t: f64,
    p: &JaynesCummingsParams,
) -> Result<StateVector> {
    p.validate()?;
    let atom_norm = c0.norm_sqr() + c1.norm_sqr();
    if (atom_norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!("atomic norm² {atom_norm}")));
    }
    let field_norm: f64 = field.iter().map(|z| z.norm_sqr()).sum();
    if (field_norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!("field norm² {field_norm}")));
    }
    let nf = p.field_dim();
    if field.len() > nf {
        return Err(Error::DimensionMismatch {
            expected: nf,
            found: field.len(),
        });
    }
    let idx = |s: usize, k: usize| s * nf + k;
    let tau = |k: usize| p.lambda * (k as f64).sqrt() * t;
    // Free evolution multiplies the excitation-n block by e^{−iω(n−½)t}.
    let phase = |n: usize| (-I * p.omega * (n as f64 - 0.5) * t).exp();

    let mut psi = StateVector::zeros(2 * nf);
    for (k, &e) in field.iter().enumerate() {
        // c₀ e_k [cos τ_k |0,k⟩ − i sin τ_k |1,k−1⟩]
        let ph = phase(k);
        psi[idx(0, k)] += c0 * e * tau(k).cos() * ph;
        if k >= 1 {
            psi[idx(1, k - 1)] += -I * c0 * e * tau(k).sin() * ph;
        }
        // c₁ e_k [cos τ_{k+1} |1,k⟩ − i sin τ_{k+1} |0,k+1⟩]
        let ph = phase(k + 1);
        psi[idx(1, k)] += c1 * e * tau(k + 1).cos() * ph;
        if k + 1 < nf {
            psi[idx(0, k + 1)] += -I * c1 * e * tau(k + 1).sin() * ph;
        }
    }
    Ok(psi)
}

/// Closed-form process matrix for a Fock-`M` field. The coherence entry is the
/// signed product `cos(λt√M) cos(λt√(M+1))`, rotating as `e^{−iωt}`; its
/// magnitude is `√(ξ₀ξ₁)`.
pub fn jc_d_analytic(p: &JaynesCummingsParams, t: f64) -> ProcessMatrix {
    let (a, b) = p.phases(t);
    let (xi0, xi1) = p.xi(t);
    let coh = (-I * p.omega * t).exp() * (a.cos() * b.cos());
    two_level_d(t, xi1, 1.0 - xi0, coh)
}

pub fn jc_d_dot_analytic(p: &JaynesCummingsParams, t: f64) -> ComplexMatrix {
    let m = p.fock_m as f64;
    let (sm, sm1) = (m.sqrt(), (m + 1.0).sqrt());
    let (a, b) = p.phases(t);
    let dxi0 = -p.lambda * sm * (2.0 * a).sin();
    let dxi1 = -p.lambda * sm1 * (2.0 * b).sin();
    let rot = (-I * p.omega * t).exp();
    let dc = rot
        * (-p.lambda * sm * a.sin() * b.cos()
            - p.lambda * sm1 * a.cos() * b.sin()
            - I * p.omega * a.cos() * b.cos());
    two_level_d_raw(dxi1, -dxi1, -dxi0, dxi0, dc)
}

/// `det D = ξ₀ ξ₁ (ξ₀ + ξ₁ − 1)`
pub fn jc_determinant(p: &JaynesCummingsParams, t: f64) -> f64 {
    let (xi0, xi1) = p.xi(t);
    xi0 * xi1 * (xi0 + xi1 - 1.0)
}

/// Closed-form rates of the Fock-`M` generator.
pub fn jc_gammas_analytic(p: &JaynesCummingsParams, t: f64) -> Result<TwoLevelRates> {
    let m = p.fock_m as f64;
    let (sm, sm1) = (m.sqrt(), (m + 1.0).sqrt());
    let (a, b) = p.phases(t);
    let lam = p.lambda;
    let population_den = (2.0 * a).cos() + (2.0 * b).cos();
    let coherence_den = a.cos().powi(2) * b.cos().powi(2);
    if population_den.abs() < SINGULAR_DENOMINATOR {
        return Err(Error::SingularTime {
            t,
            what: "cos(2λt√M) + cos(2λt√(M+1))",
        });
    }
    if coherence_den.abs() < SINGULAR_DENOMINATOR {
        return Err(Error::SingularTime {
            t,
            what: "cos²(λt√M) cos²(λt√(M+1))",
        });
    }
    let (s2a, s2b) = ((2.0 * a).sin(), (2.0 * b).sin());
    let gamma1 =
        2.0 * lam * (sm * s2a * b.sin().powi(2) + sm1 * s2b * a.cos().powi(2)) / population_den;
    let gamma2 = lam * (sm * s2a * b.cos().powi(2) + sm1 * s2b * a.cos().powi(2)) / coherence_den;
    let gamma3 =
        2.0 * lam * (sm * s2a * b.cos().powi(2) + sm1 * s2b * a.sin().powi(2)) / population_den;
    let mut rates = TwoLevelRates::new(gamma1, gamma2, gamma3);
    rates.coherence_frequency = p.omega;
    Ok(rates)
}

/// Simulated tomograms on the given grid, turned into process matrices.
pub fn jc_process_trajectory(
    p: &JaynesCummingsParams,
    times: &[f64],
) -> Result<Vec<ProcessMatrix>> {
    let model = jc_model(p)?;
    let rho_e = fock_state(p.field_dim(), p.fock_m)?;
    let series = simulate_tomograms(&model, &rho_e, times)?;
    let m = build_m(2)?;
    (0..series.len())
        .map(|k| d_from_tomograms(&series, &m, k))
        .collect()
}

// ---------------------------------------------------------------------------
// Multimode cavity

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeParity {
    /// Atom at the cavity center: even modes have a node there.
    OddOnly,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MultimodeCavityParams {
    pub modes_k: usize,
    pub length: f64,
    pub light_speed: f64,
    pub lambda: f64,
    pub omega_a: f64,
    pub parity: ModeParity,
}

impl MultimodeCavityParams {
    /// 400 modes, `L = 2π`, `c = 1`, `λ = 0.3`, `ω_A = 101`, odd modes only.
    pub fn centered_atom_reference() -> Self {
        Self {
            modes_k: 400,
            length: 2.0 * PI,
            light_speed: 1.0,
            lambda: 0.3,
            omega_a: 101.0,
            parity: ModeParity::OddOnly,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes_k == 0 {
            return Err(Error::InvalidParameter("at least one mode required".into()));
        }
        if !(self.length > 0.0 && self.light_speed > 0.0) {
            return Err(Error::InvalidParameter(
                "cavity length and light speed must be positive".into(),
            ));
        }
        if !(self.lambda.is_finite() && self.omega_a.is_finite()) {
            return Err(Error::InvalidParameter(
                "non-finite cavity parameter".into(),
            ));
        }
        Ok(())
    }

    /// `ω_k = kπc/L`, `k = 1..=K`.
    pub fn mode_frequency(&self, k: usize) -> f64 {
        k as f64 * PI * self.light_speed / self.length
    }

    pub fn coupling(&self, k: usize) -> f64 {
        match self.parity {
            ModeParity::All => self.lambda,
            ModeParity::OddOnly if k % 2 == 1 => self.lambda,
            ModeParity::OddOnly => 0.0,
        }
    }

    /// Mode indices with non-zero coupling.
    pub fn coupled_modes(&self) -> Vec<usize> {
        (1..=self.modes_k)
            .filter(|&k| self.coupling(k) != 0.0)
            .collect()
    }

    /// Coupled modes per unit angular frequency.
    pub fn coupled_mode_density(&self) -> f64 {
        let spacing = PI * self.light_speed / self.length;
        match self.parity {
            ModeParity::All => 1.0 / spacing,
            ModeParity::OddOnly => 1.0 / (2.0 * spacing),
        }
    }

    /// Golden-rule decay rate `2πλ² d_eff`.
    pub fn golden_rule_rate(&self) -> f64 {
        2.0 * PI * self.lambda.powi(2) * self.coupled_mode_density()
    }
}

/// Picture in which atomic coherences are reported.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    Lab,
    /// Rotating at `ω_A` with respect to `ω_A (σ_z/2 + Σ_k a_k† a_k)`, which
    /// commutes with the Hamiltonian; populations are frame independent.
    Rotating,
}

/// Dynamics of an initially excited atom with the field in vacuum, restricted
/// to the one-excitation subspace `{|1,vac⟩, |0,1_k⟩}` (coupled modes only).
#[derive(Clone, Debug)]
pub struct SingleExcitationSector {
    params: MultimodeCavityParams,
    modes: Vec<usize>,
    hamiltonian: ComplexMatrix,
    eigen: HermitianEigen,
}

impl SingleExcitationSector {
    pub fn new(params: &MultimodeCavityParams) -> Result<Self> {
        params.validate()?;
        let modes = params.coupled_modes();
        let dim = 1 + modes.len();
        let half = params.omega_a / 2.0;
        let mut h = ComplexMatrix::zeros(dim, dim);
        h[(0, 0)] = c64(half, 0.0);
        for (j, &k) in modes.iter().enumerate() {
            h[(j + 1, j + 1)] = c64(params.mode_frequency(k) - half, 0.0);
            h[(0, j + 1)] = c64(params.coupling(k), 0.0);
            h[(j + 1, 0)] = c64(params.coupling(k), 0.0);
        }
        let eigen = HermitianEigen::new(&h)?;
        Ok(Self {
            params: *params,
            modes,
            hamiltonian: h,
            eigen,
        })
    }

    pub fn params(&self) -> &MultimodeCavityParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        1 + self.modes.len()
    }

    /// Mode index `k` of each sector basis state after the first.
    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn eigen(&self) -> &HermitianEigen {
        &self.eigen
    }

    fn frame_phase(&self, t: f64, frame: Frame) -> C64 {
        match frame {
            Frame::Lab => c64(1.0, 0.0),
            Frame::Rotating => (I * self.params.omega_a * t / 2.0).exp(),
        }
    }

    /// Sector amplitudes `(⟨1,vac|ψ⟩, ⟨0,1_k|ψ⟩...)` at time `t`.
    pub fn amplitudes(&self, t: f64, frame: Frame) -> StateVector {
        let v = self.eigen.vectors();
        let coeffs = StateVector::from_iterator(
            self.dim(),
            self.eigen
                .values()
                .iter()
                .enumerate()
                .map(|(n, &e)| v[(0, n)].conj() * (-I * e * t).exp()),
        );
        v * coeffs * self.frame_phase(t, frame)
    }

    /// `⟨1,vac|ψ(t)⟩`
    pub fn excited_amplitude(&self, t: f64, frame: Frame) -> C64 {
        let v = self.eigen.vectors();
        let a: C64 = self
            .eigen
            .values()
            .iter()
            .enumerate()
            .map(|(n, &e)| v[(0, n)].norm_sqr() * (-I * e * t).exp())
            .sum();
        a * self.frame_phase(t, frame)
    }

    pub fn excited_probability(&self, t: f64) -> f64 {
        self.excited_amplitude(t, Frame::Lab).norm_sqr()
    }

    /// Phase acquired by `|0,vac⟩`, which is an eigenstate.
    fn ground_phase(&self, t: f64, frame: Frame) -> C64 {
        match frame {
            Frame::Lab => (I * self.params.omega_a * t / 2.0).exp(),
            Frame::Rotating => c64(1.0, 0.0),
        }
    }

    /// Atomic process matrix. Excitation conservation fixes
    /// `T(|1⟩⟨1|) = P|1⟩⟨1| + (1−P)|0⟩⟨0|`, `T(|0⟩⟨0|) = |0⟩⟨0|` and
    /// `T(|1⟩⟨0|) = A conj(φ_g) |1⟩⟨0|`.
    pub fn process_matrix(&self, t: f64, frame: Frame) -> ProcessMatrix {
        let a = self.excited_amplitude(t, frame);
        let p = a.norm_sqr();
        two_level_d(t, p, 0.0, a * self.ground_phase(t, frame).conj())
    }
}

/// Full atom ⊗ modes Hamiltonian with every mode truncated at `cutoff`
/// photons; only practical for a handful of modes.
pub fn multimode_full_space_model(
    params: &MultimodeCavityParams,
    cutoff: usize,
) -> Result<HamiltonianModel> {
    params.validate()?;
    let mode_dim = cutoff + 1;
    let dim_e = mode_dim
        .checked_pow(params.modes_k as u32)
        .filter(|&d| d <= 4096)
        .ok_or_else(|| {
            Error::InvalidParameter("full-space model limited to 4096 field states".into())
        })?;
    let a = annihilation(mode_dim);
    let n_op = a.adjoint() * &a;
    let id_mode = ComplexMatrix::identity(mode_dim, mode_dim);
    // Embed a single-mode operator at position k (1-based) of the field.
    let embed = |op: &ComplexMatrix, k: usize| -> ComplexMatrix {
        let mut out = ComplexMatrix::identity(1, 1);
        for j in 1..=params.modes_k {
            out = kron(&out, if j == k { op } else { &id_mode });
        }
        out
    };
    let id_e = ComplexMatrix::identity(dim_e, dim_e);
    let sp = sigma_plus();
    let id_a = ComplexMatrix::identity(2, 2);
    let mut h = kron(&sigma_z(), &id_e) * c64(params.omega_a / 2.0, 0.0);
    for k in 1..=params.modes_k {
        h += kron(&id_a, &embed(&n_op, k)) * c64(params.mode_frequency(k), 0.0);
        let g = params.coupling(k);
        if g != 0.0 {
            let coupling = kron(&sp, &embed(&a, k));
            h += (&coupling + coupling.adjoint()) * c64(g, 0.0);
        }
    }
    HamiltonianModel::new(2, dim_e, h)
}

/// Real-valued samples on an increasing time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl ScalarSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidParameter(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::NonUniformGrid { index: i });
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Indices of samples that carry NaN.
    pub fn flagged(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.values[i].is_nan())
            .collect()
    }
}

/// Excited-state population of the initially excited atom.
pub fn multimode_p_of_t(params: &MultimodeCavityParams, times: &[f64]) -> Result<ScalarSeries> {
    let sector = SingleExcitationSector::new(params)?;
    let values = times
        .iter()
        .map(|&t| sector.excited_probability(t))
        .collect();
    ScalarSeries::new(times.to_vec(), values)
}

/// `γ(t) = −(dP/dt) / P(t)` with the five-point stencil; samples with
/// `P ≤ MIN_POPULATION` become NaN.
pub fn gamma_from_p(series: &ScalarSeries) -> Result<ScalarSeries> {
    let h = uniform_step(series.times())?;
    let p = series.values();
    let values = (0..series.len())
        .map(|i| {
            if p[i] <= MIN_POPULATION {
                return Ok(f64::NAN);
            }
            let dp = Stencil::for_index(i, p.len(), h)?.apply(p);
            Ok(-dp / p[i])
        })
        .collect::<Result<Vec<_>>>()?;
    ScalarSeries::new(series.times().to_vec(), values)
}

/// Least-squares decay rate `−d ln P / dt` over samples with `t ∈ [t_lo, t_hi]`.
pub fn decay_rate_fit(series: &ScalarSeries, t_lo: f64, t_hi: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = series
        .times()
        .iter()
        .zip(series.values())
        .filter(|(t, p)| **t >= t_lo && **t <= t_hi && **p > 0.0)
        .map(|(t, p)| (*t, p.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "fewer than two positive samples in [{t_lo}, {t_hi}]"
        )));
    }
    let n = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = pts.iter().map(|(t, y)| (t - mean_t) * (y - mean_y)).sum();
    let var: f64 = pts.iter().map(|(t, _)| (t - mean_t).powi(2)).sum();
    Ok(-cov / var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{evolve, max_abs, partial_trace, Subsystem};
    use crate::tomography::{d_from_composite, input_basis, validate_process};

    #[test]
    fn damping_tomograms_start_at_inputs() {
        let p = AmplitudeDampingParams::new(1.0).unwrap();
        let series = example_a_tomograms(&p, &[0.0, 1.0]).unwrap();
        for s in input_basis(2).unwrap() {
            let rho = series.snapshot(s.label(), 0);
            assert!(max_abs(&(rho.matrix() - s.projector().matrix())) < 1e-15);
        }
        let excited = series.snapshot((1, 1), 1);
        assert!((excited.population(1) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((excited.population(0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn damping_tomograms_relax_to_ground() {
        let p = AmplitudeDampingParams::new(1.0).unwrap();
        let t = 30.0;
        let series = example_a_tomograms(&p, &[t]).unwrap();
        let ground = DensityMatrix::basis(2, 0);
        for list in series.snapshots().values() {
            assert!(max_abs(&(list[0].matrix() - ground.matrix())) <= (-t / 2.0f64).exp());
        }
    }

    #[test]
    fn damping_rejects_bad_inputs() {
        assert!(AmplitudeDampingParams::new(0.0).is_err());
        let p = AmplitudeDampingParams::new(1.0).unwrap();
        assert!(example_a_tomograms(&p, &[-0.1]).is_err());
    }

    #[test]
    fn jc_hamiltonian_structure() {
        let p = JaynesCummingsParams {
            omega_a: 1.3,
            omega: 1.3,
            lambda: 0.4,
            fock_m: 2,
            n_max: 4,
        };
        let model = jc_model(&p).unwrap();
        let h = model.hamiltonian();
        let nf = p.field_dim();
        for k in 0..p.n_max {
            let el = h[(nf + k, k + 1)]; // ⟨1,k|H|0,k+1⟩
            assert!((el - c64(0.4 * ((k + 1) as f64).sqrt(), 0.0)).norm() < 1e-15);
        }
        assert!(crate::quantum::hermiticity_residual(h) < 1e-14);
    }

    #[test]
    fn jc_without_coupling_freezes_populations() {
        let mut p = JaynesCummingsParams::resonant(0.0, 1);
        p.omega = 2.0;
        p.omega_a = 2.0;
        let model = jc_model(&p).unwrap();
        let rho0 = DensityMatrix::new(kron(
            DensityMatrix::basis(2, 1).matrix(),
            fock_state(p.field_dim(), 1).unwrap().matrix(),
        ))
        .unwrap();
        let rho = evolve(&model, &rho0, 3.7).unwrap();
        assert!(max_abs(&(rho.matrix() - rho0.matrix())) < 1e-14);
    }

    #[test]
    fn jc_rejects_detuning_and_small_cutoff() {
        let mut p = JaynesCummingsParams::resonant(1.0, 2);
        p.omega = 1.0;
        assert!(jc_model(&p).is_err());
        let mut p = JaynesCummingsParams::resonant(1.0, 2);
        p.n_max = 2;
        assert!(jc_model(&p).is_err());
    }

    #[test]
    fn vacuum_rabi_population() {
        let p = JaynesCummingsParams::resonant(0.8, 0);
        let model = jc_model(&p).unwrap();
        let rho0 = DensityMatrix::basis(2 * p.field_dim(), p.field_dim()); // |1⟩|0⟩
        for t in [0.0, 0.3, 1.1, 2.9] {
            let atom = partial_trace(
                &evolve(&model, &rho0, t).unwrap(),
                2,
                p.field_dim(),
                Subsystem::System,
            )
            .unwrap();
            assert!((atom.population(1) - (0.8 * t).cos().powi(2)).abs() < 1e-12);
        }
        let psi =
            jc_analytic_state(c64(0.0, 0.0), c64(1.0, 0.0), &[c64(1.0, 0.0)], 0.5, &p).unwrap();
        assert!((psi[p.field_dim()].norm_sqr() - (0.4f64).cos().powi(2)).abs() < 1e-15);
    }

    fn coherent_amplitudes(alpha: C64, len: usize) -> Vec<C64> {
        let mut amps = Vec::with_capacity(len);
        let mut term = c64((-alpha.norm_sqr() / 2.0).exp(), 0.0);
        for k in 0..len {
            amps.push(term);
            term = term * alpha / ((k + 1) as f64).sqrt();
        }
        amps
    }

    #[test]
    fn analytic_state_matches_numerical_evolution() {
        let p = JaynesCummingsParams {
            omega_a: 0.9,
            omega: 0.9,
            lambda: 0.6,
            fock_m: 0,
            n_max: 25,
        };
        let field = coherent_amplitudes(c64(0.8, 0.3), p.field_dim());
        let norm: f64 = field.iter().map(|z| z.norm_sqr()).sum();
        let field: Vec<C64> = field.iter().map(|z| z / norm.sqrt()).collect();
        let (c0, c1) = (c64(0.6, 0.0), c64(0.0, 0.8));
        let model = jc_model(&p).unwrap();
        let psi0 = jc_analytic_state(c0, c1, &field, 0.0, &p).unwrap();
        for t in [0.0, 0.7, 2.3, 5.0] {
            let analytic = jc_analytic_state(c0, c1, &field, t, &p).unwrap();
            assert!((analytic.norm() - 1.0).abs() < 1e-12);
            let numeric = model.propagator(t) * &psi0;
            assert!((analytic - numeric).norm() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn jc_closed_form_d_matches_composite() {
        for m in [0usize, 1, 3] {
            let p = JaynesCummingsParams::resonant(1.0, m);
            let model = jc_model(&p).unwrap();
            let rho_e = fock_state(p.field_dim(), m).unwrap();
            for t in [0.0, 0.2, 0.9, 1.7] {
                let sim = d_from_composite(&model, &rho_e, t).unwrap();
                let closed = jc_d_analytic(&p, t);
                assert!(
                    max_abs(&(sim.matrix() - closed.matrix())) < 1e-10,
                    "M={m} t={t}"
                );
                let (xi0, xi1) = p.xi(t);
                // The printed form gives the coherence as √(ξ₀ξ₁) ≥ 0.
                assert!((closed.entry(1, 0, 1, 0).norm() - (xi0 * xi1).sqrt()).abs() < 1e-12);
                let det = sim.determinant();
                assert!((det - c64(jc_determinant(&p, t), 0.0)).norm() < 1e-8);
            }
        }
        // The signed coherence changes sign at the first zero of cos(λt√(M+1)).
        let p = JaynesCummingsParams::resonant(1.0, 1);
        assert!(jc_d_analytic(&p, 0.3).entry(1, 0, 1, 0).re > 0.0);
        assert!(jc_d_analytic(&p, 1.3).entry(1, 0, 1, 0).re < 0.0);
    }

    #[test]
    fn jc_closed_form_rotates_with_field_frequency() {
        let p = JaynesCummingsParams {
            omega_a: 3.0,
            omega: 3.0,
            lambda: 0.7,
            fock_m: 2,
            n_max: 3,
        };
        let model = jc_model(&p).unwrap();
        let rho_e = fock_state(p.field_dim(), 2).unwrap();
        for t in [0.4, 1.3] {
            let sim = d_from_composite(&model, &rho_e, t).unwrap();
            assert!(max_abs(&(sim.matrix() - jc_d_analytic(&p, t).matrix())) < 1e-10);
        }
    }

    #[test]
    fn jc_derivative_matches_finite_difference() {
        let mut p = JaynesCummingsParams::resonant(1.2, 2);
        p.omega = 0.5;
        p.omega_a = 0.5;
        let (t, h) = (0.37, 1e-5);
        let fd = (jc_d_analytic(&p, t + h).matrix() - jc_d_analytic(&p, t - h).matrix())
            / c64(2.0 * h, 0.0);
        assert!(max_abs(&(fd - jc_d_dot_analytic(&p, t))) < 1e-8);
        let p = AmplitudeDampingParams::new(1.4).unwrap();
        let fd = (amplitude_damping_d(&p, t + h).matrix()
            - amplitude_damping_d(&p, t - h).matrix())
            / c64(2.0 * h, 0.0);
        assert!(max_abs(&(fd - amplitude_damping_d_dot(&p, t))) < 1e-8);
    }

    #[test]
    fn vacuum_field_rates_reduce_to_tangent() {
        let p = JaynesCummingsParams::resonant(0.9, 0);
        for t in [0.05, 0.4, 1.2] {
            let r = jc_gammas_analytic(&p, t).unwrap();
            let expected = 2.0 * 0.9 * (0.9 * t).tan();
            assert!((r.gamma1 - expected).abs() < 1e-12);
            assert!((r.gamma2 - expected).abs() < 1e-12);
            assert!(r.gamma3.abs() < 1e-15);
            assert!(r.eta.abs() < 1e-12);
        }
        // γ₁ ≈ 2λ²t near zero, so every rate vanishes as t → 0⁺.
        let r = jc_gammas_analytic(&p, 1e-9).unwrap();
        assert!(r.gamma1.abs() < 1e-8 && r.gamma2.abs() < 1e-8);
        let r = jc_gammas_analytic(&JaynesCummingsParams::resonant(1.0, 3), 1e-9).unwrap();
        assert!(r.gamma1.abs() < 1e-7 && r.gamma2.abs() < 1e-7 && r.gamma3.abs() < 1e-7);
    }

    #[test]
    fn rates_refuse_singular_times() {
        let p = JaynesCummingsParams::resonant(1.0, 0);
        assert!(matches!(
            jc_gammas_analytic(&p, PI / 2.0),
            Err(Error::SingularTime { .. })
        ));
    }

    #[test]
    fn sector_matches_full_space_for_two_modes() {
        let params = MultimodeCavityParams {
            modes_k: 2,
            length: 2.0 * PI,
            light_speed: 1.0,
            lambda: 0.3,
            omega_a: 0.8,
            parity: ModeParity::All,
        };
        let sector = SingleExcitationSector::new(&params).unwrap();
        assert_eq!(sector.dim(), 3);
        let full = multimode_full_space_model(&params, 1).unwrap();
        let vacuum = DensityMatrix::basis(full.dim_e(), 0);
        for t in [0.0, 1.0, 4.5, 10.0] {
            let d_full = d_from_composite(&full, &vacuum, t).unwrap();
            let d_sector = sector.process_matrix(t, Frame::Lab);
            assert!(
                max_abs(&(d_full.matrix() - d_sector.matrix())) < 1e-10,
                "t = {t}"
            );
        }
    }

    #[test]
    fn sector_process_is_a_channel() {
        let params = MultimodeCavityParams {
            modes_k: 40,
            ..MultimodeCavityParams::centered_atom_reference()
        };
        let sector = SingleExcitationSector::new(&params).unwrap();
        assert_eq!(sector.dim(), 21);
        for frame in [Frame::Lab, Frame::Rotating] {
            assert!(
                max_abs(
                    &(sector.process_matrix(0.0, frame).matrix() - ComplexMatrix::identity(4, 4))
                ) < 1e-12
            );
            for t in [0.3, 2.0, 6.0] {
                let report = validate_process(&sector.process_matrix(t, frame));
                assert!(report.passed(), "{report}");
                assert!((sector.amplitudes(t, frame).norm() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn golden_rule_rate_for_centered_atom() {
        let p = MultimodeCavityParams::centered_atom_reference();
        assert_eq!(p.coupled_modes().len(), 200);
        assert!((p.mode_frequency(1) - 0.5).abs() < 1e-15);
        assert!((p.coupled_mode_density() - 1.0).abs() < 1e-15);
        assert!((p.golden_rule_rate() - 2.0 * PI * 0.09).abs() < 1e-15);
    }

    #[test]
    fn gamma_of_exponential_population() {
        let times: Vec<f64> = (0..100).map(|i| i as f64 * 0.01).collect();
        let values = times.iter().map(|t| (-0.7 * t).exp()).collect();
        let series = ScalarSeries::new(times, values).unwrap();
        let gamma = gamma_from_p(&series).unwrap();
        assert!(gamma.values().iter().all(|g| (g - 0.7).abs() < 1e-9));
        assert!((decay_rate_fit(&series, 0.2, 0.8).unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn gamma_flags_empty_population() {
        let times: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let series = ScalarSeries::new(times, vec![1.0, 0.5, 0.0, 0.1, 0.2, 0.3]).unwrap();
        assert_eq!(gamma_from_p(&series).unwrap().flagged(), vec![2]);
    }
}
