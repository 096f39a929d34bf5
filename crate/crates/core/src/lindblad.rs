//! Born-Markov master equation for Gaussian temporal magnetic-field noise.
//!
//! The electron spin operator along the noise axis is decomposed into jump
//! operators S_n(Omega) grouped by Bohr frequency; each enters the dissipator
//! with weight alpha^2 exp(-f Omega^2), where f is the inverse field sweep
//! rate. The limits f -> infinity (adiabatic: only Omega = 0 survives) and
//! f -> 0 (diabatic: all jumps at full rate) bracket the physics. The
//! Hamiltonian commutator is dropped by default (interaction picture); a
//! Schroedinger-picture flag restores it. Lamb-shift corrections are omitted
//! throughout.
//!
//! Superoperators act on column-stacked density matrices in the labelled
//! eigenbasis. Everything is dense; d = 20 gives 400x400 generators, well
//! within desk scale.

use crate::fit::{fit_decay, DecayFit, DecayModel, FitError};
use crate::half::HalfInt;
use crate::linalg::{self, LinalgError};
use crate::system::{Branch, EigenLevel, SpinSystem, SystemError};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Bohr frequencies closer than this (in units of A) share one jump operator.
pub const SECULAR_GROUPING_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum LindbladError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error("at least one noise specification is required")]
    EmptyNoise,
    #[error("noise variance must be non-negative, got {0}")]
    NegativeVariance(f64),
    #[error("initial state rejected: {0}")]
    BadState(String),
    #[error("trace drifted by {0:.3e} during evolution")]
    TraceDrift(f64),
    #[error("state positivity violated: min eigenvalue {0:.3e}")]
    PositivityViolation(f64),
    #[error("population leaks outside the requested subspace by {0:.3e}")]
    Leakage(f64),
    #[error("time grid must be non-negative and strictly increasing")]
    BadTimeGrid,
    #[error("superposition class is invalid for this system: {0}")]
    InvalidClass(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseAxis {
    X,
    Y,
    Z,
}

/// Inverse sweep-rate parameter of the Gaussian field correlation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Adiabaticity {
    /// Finite f (seconds^2): weight exp(-f Omega^2).
    Finite(f64),
    /// f -> infinity: only Omega = 0 jumps survive.
    Adiabatic,
    /// f -> 0: every jump at full weight.
    Diabatic,
}

impl Adiabaticity {
    fn weight(&self, omega: f64, zero_tol: f64) -> f64 {
        match *self {
            Adiabaticity::Finite(f) => (-f * omega * omega).exp(),
            Adiabaticity::Adiabatic => {
                if omega.abs() <= zero_tol {
                    1.0
                } else {
                    0.0
                }
            }
            Adiabaticity::Diabatic => 1.0,
        }
    }
}

/// One noise channel: axis, variance alpha^2 (1/s), and adiabaticity.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub axis: NoiseAxis,
    /// alpha^2; carries dimension 1/time (integrated spectral weight).
    pub variance: f64,
    pub adiabaticity: Adiabaticity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Picture {
    /// Hamiltonian commutator dropped: decoherence only.
    Interaction,
    /// Hamiltonian commutator kept.
    Schroedinger,
}

/// One jump operator: all matrix elements of S_n at Bohr frequency omega.
#[derive(Clone, Debug)]
pub struct JumpGroup {
    /// Representative Bohr frequency (rad/s).
    pub omega: f64,
    /// d x d matrix in the labelled eigenbasis.
    pub op: DMatrix<Complex64>,
}

/// Matrix elements of the electron spin along `axis` in the labelled
/// eigenbasis, grouped by Bohr frequency Omega = E_b - E_a with absolute
/// tolerance [`SECULAR_GROUPING_TOL`] * A. The groups reassemble the full
/// operator exactly and satisfy S(-Omega) = S(Omega)^dagger.
pub fn jump_operators(
    system: &SpinSystem,
    b_tesla: f64,
    axis: NoiseAxis,
) -> Result<Vec<JumpGroup>, LindbladError> {
    let levels = system.eigensystem(b_tesla)?;
    let vmat = crate::operators::to_complex(&system.eigenvector_matrix(&levels));
    let basis = system.basis();
    let s_full = match axis {
        NoiseAxis::X => crate::operators::to_complex(&basis.s_x()),
        NoiseAxis::Y => basis.s_y(),
        NoiseAxis::Z => crate::operators::to_complex(&basis.s_z()),
    };
    let s_eig = vmat.adjoint() * s_full * &vmat;
    let d = system.dim();
    let scale = linalg::one_norm(&s_eig).max(1e-300);

    // collect nonzero elements with their Bohr frequencies
    let mut entries: Vec<(f64, usize, usize)> = Vec::new();
    for a in 0..d {
        for b in 0..d {
            if s_eig[(a, b)].norm() > 1e-14 * scale {
                entries.push((levels[b].energy - levels[a].energy, a, b));
            }
        }
    }
    entries.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());

    let tol = SECULAR_GROUPING_TOL * system.hyperfine();
    let mut groups: Vec<JumpGroup> = Vec::new();
    for (omega, a, b) in entries {
        let fresh = match groups.last() {
            Some(g) => (omega - g.omega).abs() > tol,
            None => true,
        };
        if fresh {
            groups.push(JumpGroup {
                omega,
                op: DMatrix::zeros(d, d),
            });
        }
        let g = groups.last_mut().unwrap();
        g.op[(a, b)] = s_eig[(a, b)];
    }
    Ok(groups)
}

/// Superoperator generator for a chosen noise specification.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    pub dim: usize,
    /// dim^2 x dim^2 generator over column-stacked density matrices.
    pub generator: DMatrix<Complex64>,
    /// Eigenbasis the superoperator acts in (label order).
    pub levels: Vec<EigenLevel>,
    /// (axis, weighted rate alpha^2 e^{-f Omega^2}, jump) per retained term.
    pub jumps: Vec<(NoiseAxis, f64, JumpGroup)>,
    pub picture: Picture,
}

fn dissipator_term(rate: f64, op: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    // rate * [ (S^T (x) S^dag) - 1/2 ((S^dag S)^T (x) 1 + 1 (x) S^dag S) ]
    // acting on vec(rho) with column stacking: vec(A rho B) = (B^T (x) A) vec(rho)
    let d = op.nrows();
    let sd = op.adjoint();
    let m = &sd * op; // S^dag S
    let eye = DMatrix::<Complex64>::identity(d, d);
    let mut term = op.transpose().kronecker(&sd);
    term -= (m.transpose().kronecker(&eye) + eye.kronecker(&m)) * Complex64::from(0.5);
    term * Complex64::from(rate)
}

/// Builds the master-equation generator at a field for a set of noise
/// channels.
pub fn build_generator(
    system: &SpinSystem,
    b_tesla: f64,
    noise: &[NoiseSpec],
    picture: Picture,
) -> Result<Liouvillian, LindbladError> {
    if noise.is_empty() {
        return Err(LindbladError::EmptyNoise);
    }
    for spec in noise {
        if spec.variance < 0.0 {
            return Err(LindbladError::NegativeVariance(spec.variance));
        }
    }
    let levels = system.eigensystem(b_tesla)?;
    let d = system.dim();
    let mut generator = DMatrix::<Complex64>::zeros(d * d, d * d);
    let zero_tol = SECULAR_GROUPING_TOL * system.hyperfine();

    let mut jumps = Vec::new();
    for spec in noise {
        for group in jump_operators(system, b_tesla, spec.axis)? {
            let rate = spec.variance * spec.adiabaticity.weight(group.omega, zero_tol);
            if rate == 0.0 {
                continue;
            }
            generator += dissipator_term(rate, &group.op);
            jumps.push((spec.axis, rate, group));
        }
    }

    if picture == Picture::Schroedinger {
        // -i (1 (x) H - H^T (x) 1) with H diagonal in the eigenbasis
        for r in 0..d {
            for c in 0..d {
                let idx = c * d + r;
                generator[(idx, idx)] +=
                    Complex64::new(0.0, -(levels[r].energy - levels[c].energy));
            }
        }
    }

    Ok(Liouvillian {
        dim: d,
        generator,
        levels,
        jumps,
        picture,
    })
}

/// Reduced four-level generator for Z noise in the (m, m-1) pair of blocks,
/// built directly from the closed-form block angles rather than the full
/// jump decomposition. Basis order: |+,m>, |-,m>, |+,m-1>, |-,m-1>.
pub fn reduced_z_generator(
    system: &SpinSystem,
    b_tesla: f64,
    m: HalfInt,
    alpha_sq: f64,
    adiabaticity: Adiabaticity,
    picture: Picture,
) -> Result<Liouvillian, LindbladError> {
    let one = HalfInt::from_int(1);
    let bm = system.block(m, b_tesla)?;
    let bn = system.block(m - one, b_tesla)?;
    if bm.dimensionality != 2 || bn.dimensionality != 2 {
        return Err(LindbladError::InvalidClass(format!(
            "blocks m={m} and m-1 must both be two-dimensional"
        )));
    }
    let zero_tol = SECULAR_GROUPING_TOL * system.hyperfine();
    let a = system.hyperfine();
    let mut generator = DMatrix::<Complex64>::zeros(16, 16);
    let mut jumps = Vec::new();

    // S_z(0): diagonal (cos theta_m, -cos theta_m, cos theta_n, -cos theta_n)/2
    let mut s0 = DMatrix::<Complex64>::zeros(4, 4);
    s0[(0, 0)] = Complex64::from(0.5 * bm.cos_theta());
    s0[(1, 1)] = Complex64::from(-0.5 * bm.cos_theta());
    s0[(2, 2)] = Complex64::from(0.5 * bn.cos_theta());
    s0[(3, 3)] = Complex64::from(-0.5 * bn.cos_theta());
    let w0 = alpha_sq * adiabaticity.weight(0.0, zero_tol);
    generator += dissipator_term(w0, &s0);
    jumps.push((NoiseAxis::Z, w0, JumpGroup { omega: 0.0, op: s0 }));

    // exchange elements <+-,k| S_z |-+,k> = -sin(theta_k)/2 at Omega = +- A R_k
    for (idx_up, idx_dn, block) in [(0usize, 1usize, &bm), (2, 3, &bn)] {
        let elem = Complex64::from(-0.5 * block.sin_theta());
        let omega = a * block.r;
        // lowering (Omega > 0): |dn><dn| S |up><up|
        let mut lower = DMatrix::<Complex64>::zeros(4, 4);
        lower[(idx_dn, idx_up)] = elem;
        // raising is its Hermitian pair at -Omega
        let raise = lower.adjoint();
        for (w, op) in [(omega, lower), (-omega, raise)] {
            let rate = alpha_sq * adiabaticity.weight(w, zero_tol);
            if rate == 0.0 {
                continue;
            }
            generator += dissipator_term(rate, &op);
            jumps.push((NoiseAxis::Z, rate, JumpGroup { omega: w, op }));
        }
    }

    let energies = [
        0.5 * a * bm.energy_factor(Branch::Plus).unwrap(),
        0.5 * a * bm.energy_factor(Branch::Minus).unwrap(),
        0.5 * a * bn.energy_factor(Branch::Plus).unwrap(),
        0.5 * a * bn.energy_factor(Branch::Minus).unwrap(),
    ];
    if picture == Picture::Schroedinger {
        for r in 0..4 {
            for c in 0..4 {
                let idx = c * 4 + r;
                generator[(idx, idx)] += Complex64::new(0.0, -(energies[r] - energies[c]));
            }
        }
    }

    // synthesize the four levels for bookkeeping
    let map = system.label_map()?;
    let levels_full = system.eigensystem(b_tesla)?;
    let pick = |branch, mm| levels_full[map.label_of(branch, mm).expect("2d block") - 1].clone();
    let levels = vec![
        pick(Branch::Plus, m),
        pick(Branch::Minus, m),
        pick(Branch::Plus, m - one),
        pick(Branch::Minus, m - one),
    ];

    Ok(Liouvillian {
        dim: 4,
        generator,
        levels,
        jumps,
        picture,
    })
}

/// Restriction of the full-space generator to a subspace: rows and columns
/// of the superoperator that act within the given 1-based labels, in the
/// given order.
pub fn restrict_generator(liouvillian: &Liouvillian, labels: &[usize]) -> DMatrix<Complex64> {
    let d = liouvillian.dim;
    let k = labels.len();
    let idx = |r: usize, c: usize| (labels[c] - 1) * d + (labels[r] - 1);
    DMatrix::from_fn(k * k, k * k, |row, col| {
        let (r1, c1) = (row % k, row / k);
        let (r2, c2) = (col % k, col / k);
        liouvillian.generator[(idx(r1, c1), idx(r2, c2))]
    })
}

/// Wraps the restriction as a standalone Liouvillian over the subspace.
/// Exact whenever the noise does not connect the subspace to the rest
/// (Z noise within whole m blocks).
pub fn restricted_liouvillian(liouvillian: &Liouvillian, labels: &[usize]) -> Liouvillian {
    Liouvillian {
        dim: labels.len(),
        generator: restrict_generator(liouvillian, labels),
        levels: labels
            .iter()
            .map(|&l| liouvillian.levels[l - 1].clone())
            .collect(),
        jumps: Vec::new(),
        picture: liouvillian.picture,
    }
}

/// The labels spanned by a superposition class (whole blocks, for exact
/// Z-noise restriction) and the (e, g) pair whose observables define T2/T1.
pub fn class_labels(
    system: &SpinSystem,
    class: SuperpositionClass,
) -> Result<(Vec<usize>, (usize, usize)), LindbladError> {
    let map = system.label_map()?;
    let one = HalfInt::from_int(1);
    let unc = -(system.nuclear_spin() + HalfInt::HALF);
    let get = |branch, mm: HalfInt| {
        map.label_of(branch, mm)
            .ok_or_else(|| LindbladError::InvalidClass(format!("no level ({branch},{mm})")))
    };
    match class {
        SuperpositionClass::CrossBranch { m } | SuperpositionClass::SameBranch { m } => {
            let labels = vec![
                get(Branch::Plus, m)?,
                get(Branch::Minus, m)?,
                get(Branch::Plus, m - one)?,
                get(Branch::Minus, m - one)?,
            ];
            let pair = if matches!(class, SuperpositionClass::CrossBranch { .. }) {
                (labels[0], labels[3])
            } else {
                (labels[0], labels[2])
            };
            Ok((labels, pair))
        }
        SuperpositionClass::UncoupledSameBranch { m } => {
            let u = get(Branch::Minus, unc)?;
            let labels = vec![u, get(Branch::Plus, m)?, get(Branch::Minus, m)?];
            Ok((labels.clone(), (u, labels[2])))
        }
        SuperpositionClass::UncoupledOppositeBranch { m } => {
            let u = get(Branch::Minus, unc)?;
            let labels = vec![u, get(Branch::Plus, m)?, get(Branch::Minus, m)?];
            Ok((labels.clone(), (labels[1], u)))
        }
    }
}

fn check_density_matrix(rho: &DMatrix<Complex64>) -> Result<(), LindbladError> {
    let herm_err = (rho - rho.adjoint()).norm();
    if herm_err > 1e-9 {
        return Err(LindbladError::BadState(format!(
            "not Hermitian ({herm_err:.3e})"
        )));
    }
    let trace = rho.trace();
    if (trace.re - 1.0).abs() > 1e-9 || trace.im.abs() > 1e-9 {
        return Err(LindbladError::BadState(format!("trace {} != 1", trace)));
    }
    let min_eig = linalg::min_hermitian_eigenvalue(rho);
    if min_eig < -1e-9 {
        return Err(LindbladError::BadState(format!(
            "negative eigenvalue {min_eig:.3e}"
        )));
    }
    Ok(())
}

/// Density matrix of a pure superposition over 1-based labels.
pub fn density_from_amplitudes(
    dim: usize,
    amplitudes: &[(usize, Complex64)],
) -> DMatrix<Complex64> {
    let mut psi = DVector::<Complex64>::zeros(dim);
    for &(label, amp) in amplitudes {
        psi[label - 1] = amp;
    }
    let norm = psi.norm();
    psi /= Complex64::from(norm);
    &psi * psi.adjoint()
}

/// Propagates rho(t) = exp(L t) rho0 across the time grid by successive
/// interval exponentials. Trace preservation to 1e-9 and the positivity
/// floor -1e-7 are enforced on every recorded state.
pub fn evolve_master(
    liouvillian: &Liouvillian,
    rho0: &DMatrix<Complex64>,
    t_grid: &[f64],
) -> Result<Vec<DMatrix<Complex64>>, LindbladError> {
    if t_grid.is_empty() || t_grid[0] < 0.0 || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LindbladError::BadTimeGrid);
    }
    check_density_matrix(rho0)?;
    let d = liouvillian.dim;

    let mut out = Vec::with_capacity(t_grid.len());
    let mut v = linalg::vec_of(rho0);
    let mut t_prev = 0.0;
    let mut cached: Option<(f64, DMatrix<Complex64>)> = None;
    for &t in t_grid {
        let dt = t - t_prev;
        if dt > 0.0 {
            let reuse = cached
                .as_ref()
                .is_some_and(|(dt_c, _)| (dt - dt_c).abs() <= 1e-12 * dt_c.abs());
            if !reuse {
                let e = linalg::expm(&(&liouvillian.generator * Complex64::from(dt)))?;
                cached = Some((dt, e));
            }
            v = &cached.as_ref().unwrap().1 * v;
        }
        t_prev = t;
        let rho = linalg::unvec(&v, d);
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > 1e-9 || trace.im.abs() > 1e-9 {
            return Err(LindbladError::TraceDrift(
                (trace.re - 1.0).abs().max(trace.im.abs()),
            ));
        }
        let min_eig = linalg::min_hermitian_eigenvalue(&(&rho + rho.adjoint()).scale(0.5));
        if min_eig < -1e-7 {
            return Err(LindbladError::PositivityViolation(min_eig));
        }
        out.push(rho);
    }
    Ok(out)
}

/// Coefficients n_ij of rho = 1/4 sum_ij n_ij sigma_i (x) sigma_j over a
/// four-level subspace given as labels in tensor order
/// (|00>, |01>, |10>, |11>). Index 0 is the identity.
pub fn bloch_decompose(
    rho: &DMatrix<Complex64>,
    subspace_labels: &[usize; 4],
) -> Result<[[f64; 4]; 4], LindbladError> {
    let d = rho.nrows();
    let inside: f64 = subspace_labels
        .iter()
        .map(|&l| rho[(l - 1, l - 1)].re)
        .sum();
    let leakage = (rho.trace().re - inside).abs();
    if leakage > 1e-6 {
        return Err(LindbladError::Leakage(leakage));
    }
    let mut sub = DMatrix::<Complex64>::zeros(4, 4);
    for (r, &lr) in subspace_labels.iter().enumerate() {
        for (c, &lc) in subspace_labels.iter().enumerate() {
            sub[(r, c)] = rho[(lr - 1, lc - 1)];
        }
    }
    let _ = d;
    let paulis = pauli_basis();
    let mut n = [[0.0; 4]; 4];
    for (i, pi) in paulis.iter().enumerate() {
        for (j, pj) in paulis.iter().enumerate() {
            let op = pi.kronecker(pj);
            let val = (&op * &sub).trace();
            n[i][j] = val.re;
        }
    }
    Ok(n)
}

/// Rebuilds the 4x4 block from Bloch coefficients.
pub fn bloch_reconstruct(n: &[[f64; 4]; 4]) -> DMatrix<Complex64> {
    let paulis = pauli_basis();
    let mut rho = DMatrix::<Complex64>::zeros(4, 4);
    for (i, pi) in paulis.iter().enumerate() {
        for (j, pj) in paulis.iter().enumerate() {
            rho += pi.kronecker(pj) * Complex64::from(0.25 * n[i][j]);
        }
    }
    rho
}

fn pauli_basis() -> [DMatrix<Complex64>; 4] {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    [
        DMatrix::identity(2, 2),
        DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    ]
}

/// Spectral decomposition of the generator: eigenvalues, vectorized modes,
/// and the steady-state set (kernel).
#[derive(Clone, Debug)]
pub struct LiouvillianSpectrum {
    pub eigenvalues: Vec<Complex64>,
    /// Column k is the vectorized mode of eigenvalues[k].
    pub modes: DMatrix<Complex64>,
    /// Indices of kernel modes (|lambda| below tolerance).
    pub steady_states: Vec<usize>,
    eigen: linalg::Eigen,
}

pub fn liouvillian_spectrum(
    liouvillian: &Liouvillian,
) -> Result<LiouvillianSpectrum, LindbladError> {
    let eigen = linalg::eigen_general(&liouvillian.generator)?;
    let scale = linalg::one_norm(&liouvillian.generator).max(1e-300);
    let steady_states = eigen
        .values
        .iter()
        .enumerate()
        .filter(|(_, l)| l.norm() <= 1e-10 * scale.max(1.0))
        .map(|(i, _)| i)
        .collect();
    Ok(LiouvillianSpectrum {
        eigenvalues: eigen.values.clone(),
        modes: eigen.vectors.clone(),
        steady_states,
        eigen,
    })
}

impl LiouvillianSpectrum {
    /// Expands rho0 in the modes; errors when the mode basis is defective.
    pub fn propagator(
        &self,
        rho0: &DMatrix<Complex64>,
    ) -> Result<SpectralPropagator, LindbladError> {
        let coeffs = self.eigen.coefficients(&linalg::vec_of(rho0))?;
        Ok(SpectralPropagator {
            eigenvalues: self.eigenvalues.clone(),
            modes: self.modes.clone(),
            coeffs,
            dim: (self.modes.nrows() as f64).sqrt().round() as usize,
        })
    }
}

/// rho(t) = sum_l c_l v_l exp(lambda_l t).
pub struct SpectralPropagator {
    eigenvalues: Vec<Complex64>,
    modes: DMatrix<Complex64>,
    coeffs: DVector<Complex64>,
    dim: usize,
}

impl SpectralPropagator {
    pub fn at(&self, t: f64) -> DMatrix<Complex64> {
        let weights = DVector::from_fn(self.eigenvalues.len(), |l, _| {
            self.coeffs[l] * (self.eigenvalues[l] * Complex64::from(t)).exp()
        });
        linalg::unvec(&(&self.modes * weights), self.dim)
    }
}

/// Observable 2|rho_eg| = sqrt(tr(sigma_x rho)^2 + tr(sigma_y rho)^2) on a
/// labelled pair; decays with T2.
pub fn pair_coherence(rho: &DMatrix<Complex64>, e_label: usize, g_label: usize) -> f64 {
    2.0 * rho[(e_label - 1, g_label - 1)].norm()
}

/// Observable tr(sigma_z rho) = rho_ee - rho_gg on a labelled pair; decays
/// with T1.
pub fn pair_polarization(rho: &DMatrix<Complex64>, e_label: usize, g_label: usize) -> f64 {
    rho[(e_label - 1, e_label - 1)].re - rho[(g_label - 1, g_label - 1)].re
}

/// Polarization of a superposition split across two m subspaces with
/// different depolarization rates: each component relaxes within its own
/// block, so tr(sigma_z rho) = (Pe (1 + e^{-t r_e}) - Pg (1 + e^{-t r_g}))/2.
pub fn mixed_polarization(pe: f64, pg: f64, rate_e: f64, rate_g: f64, t: f64) -> f64 {
    0.5 * pe * (1.0 + (-rate_e * t).exp()) - 0.5 * pg * (1.0 + (-rate_g * t).exp())
}

#[derive(Clone, Copy, Debug)]
pub enum PairObservable {
    Coherence,
    Polarization,
}

/// Evolves rho0 and fits the chosen pair observable: a trial window of
/// 10 / alpha_ref is refined once to five fitted lifetimes, 200 samples.
pub fn fit_pair_decay(
    liouvillian: &Liouvillian,
    rho0: &DMatrix<Complex64>,
    e_label: usize,
    g_label: usize,
    observable: PairObservable,
    model: DecayModel,
    alpha_ref: f64,
) -> Result<(DecayFit, Vec<f64>, Vec<f64>), LindbladError> {
    let n = 200;
    let observe = |rho: &DMatrix<Complex64>| match observable {
        PairObservable::Coherence => pair_coherence(rho, e_label, g_label),
        PairObservable::Polarization => pair_polarization(rho, e_label, g_label),
    };
    let run = |span: f64| -> Result<(Vec<f64>, Vec<f64>), LindbladError> {
        let ts: Vec<f64> = (0..n).map(|k| span * k as f64 / (n - 1) as f64).collect();
        let states = evolve_master(liouvillian, rho0, &ts)?;
        let ys: Vec<f64> = states.iter().map(observe).collect();
        Ok((ts, ys))
    };
    let (ts, ys) = run(10.0 / alpha_ref)?;
    let trial = fit_decay(&ts, &ys, DecayModel::SingleExponential)?;
    let span = trial
        .dominant_time()
        .map(|t| 5.0 * t)
        .unwrap_or(10.0 / alpha_ref)
        .clamp(1e-2 / alpha_ref, 1e4 / alpha_ref);
    let (ts, ys) = run(span)?;
    let fit = fit_decay(&ts, &ys, model)?;
    Ok((fit, ts, ys))
}

/// The four superposition families with closed-form Z-noise rates; m labels
/// the upper block of the pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SuperpositionClass {
    /// a|+,m> + b|-,m-1> (dipole-connected pair).
    CrossBranch { m: HalfInt },
    /// a|+-,m> + b|+-,m-1> (same branch, forbidden-connected pair).
    SameBranch { m: HalfInt },
    /// a|+-,(I+1/2) sign> + b|same branch, m>.
    UncoupledSameBranch { m: HalfInt },
    /// a|+-,(I+1/2) sign> + b|opposite branch, m>.
    UncoupledOppositeBranch { m: HalfInt },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZNoiseLimit {
    Adiabatic,
    Diabatic,
}

/// Closed-form dephasing and per-block depolarization rates for Z noise.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AnalyticRates {
    /// 1/T2 of the superposition.
    pub dephasing: f64,
    /// 1/T1 within the block of the first member (0 for uncoupled levels
    /// and in the adiabatic limit).
    pub depolarization_first: f64,
    /// 1/T1 within the block of the second member.
    pub depolarization_second: f64,
}

/// All eight closed forms: adiabatic Z gives (alpha^2/8)(cos theta_m +-
/// cos theta_{m-1})^2 for the paired classes and (alpha^2/2) sin^4 or cos^4
/// (theta_m/2) against the uncoupled level; diabatic Z gives
/// (alpha^2/4)(1 +- cos theta_m cos theta_{m-1}) and (alpha^2/4)(1 -+
/// cos theta_m), with per-block depolarization (alpha^2/2) sin^2 theta.
pub fn analytic_rates(
    system: &SpinSystem,
    b_tesla: f64,
    alpha_sq: f64,
    class: SuperpositionClass,
    limit: ZNoiseLimit,
) -> Result<AnalyticRates, LindbladError> {
    let one = HalfInt::from_int(1);
    let two_dim = |m: HalfInt| -> Result<crate::system::SubspaceBlock, LindbladError> {
        let block = system.block(m, b_tesla)?;
        if block.dimensionality != 2 {
            return Err(LindbladError::InvalidClass(format!(
                "block m={m} is not two-dimensional"
            )));
        }
        Ok(block)
    };
    let depol = |sin_theta: f64| 0.5 * alpha_sq * sin_theta * sin_theta;
    match class {
        SuperpositionClass::CrossBranch { m } | SuperpositionClass::SameBranch { m } => {
            let bm = two_dim(m)?;
            let bn = two_dim(m - one)?;
            let (cm, cn) = (bm.cos_theta(), bn.cos_theta());
            let sign = if matches!(class, SuperpositionClass::CrossBranch { .. }) {
                1.0
            } else {
                -1.0
            };
            let dephasing = match limit {
                ZNoiseLimit::Adiabatic => 0.125 * alpha_sq * (cm + sign * cn).powi(2),
                ZNoiseLimit::Diabatic => 0.25 * alpha_sq * (1.0 + sign * cm * cn),
            };
            let (d1, d2) = match limit {
                ZNoiseLimit::Adiabatic => (0.0, 0.0),
                ZNoiseLimit::Diabatic => (depol(bm.sin_theta()), depol(bn.sin_theta())),
            };
            Ok(AnalyticRates {
                dephasing,
                depolarization_first: d1,
                depolarization_second: d2,
            })
        }
        SuperpositionClass::UncoupledSameBranch { m }
        | SuperpositionClass::UncoupledOppositeBranch { m } => {
            let bm = two_dim(m)?;
            let half_theta = 0.5 * bm.theta;
            let same = matches!(class, SuperpositionClass::UncoupledSameBranch { .. });
            let dephasing = match (limit, same) {
                (ZNoiseLimit::Adiabatic, true) => 0.5 * alpha_sq * half_theta.sin().powi(4),
                (ZNoiseLimit::Adiabatic, false) => 0.5 * alpha_sq * half_theta.cos().powi(4),
                (ZNoiseLimit::Diabatic, true) => 0.25 * alpha_sq * (1.0 - bm.cos_theta()),
                (ZNoiseLimit::Diabatic, false) => 0.25 * alpha_sq * (1.0 + bm.cos_theta()),
            };
            let d2 = match limit {
                ZNoiseLimit::Adiabatic => 0.0,
                ZNoiseLimit::Diabatic => depol(bm.sin_theta()),
            };
            Ok(AnalyticRates {
                dephasing,
                depolarization_first: 0.0,
                depolarization_second: d2,
            })
        }
    }
}

/// One fitted point of a field sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepPoint {
    pub b_tesla: f64,
    pub class: SuperpositionClass,
    /// Fitted time constant (seconds).
    pub time_seconds: f64,
    pub residual_rms: f64,
}

/// Fitted T2(B) for Z noise across classes; the full-space generator is
/// built once per field and restricted per class (exact for Z noise).
/// Fields are evaluated in parallel.
pub fn z_noise_t2_sweep(
    system: &SpinSystem,
    classes: &[SuperpositionClass],
    b_grid: &[f64],
    alpha_sq: f64,
    adiabaticity: Adiabaticity,
) -> Result<Vec<SweepPoint>, LindbladError> {
    use rayon::prelude::*;
    let per_field = |&b: &f64| -> Result<Vec<SweepPoint>, LindbladError> {
        let noise = [NoiseSpec {
            axis: NoiseAxis::Z,
            variance: alpha_sq,
            adiabaticity,
        }];
        let full = build_generator(system, b, &noise, Picture::Interaction)?;
        let mut out = Vec::new();
        for &class in classes {
            let (labels, (e, g)) = class_labels(system, class)?;
            let sub = restricted_liouvillian(&full, &labels);
            let pos = |l: usize| labels.iter().position(|&x| x == l).unwrap() + 1;
            let rho0 = density_from_amplitudes(
                labels.len(),
                &[
                    (pos(e), Complex64::from(1.0)),
                    (pos(g), Complex64::from(1.0)),
                ],
            );
            let (fit, _, _) = fit_pair_decay(
                &sub,
                &rho0,
                pos(e),
                pos(g),
                PairObservable::Coherence,
                DecayModel::SingleExponential,
                alpha_sq,
            )?;
            out.push(SweepPoint {
                b_tesla: b,
                class,
                time_seconds: if fit.rates[0] > 0.0 {
                    1.0 / fit.rates[0]
                } else {
                    f64::INFINITY
                },
                residual_rms: fit.residual_rms,
            });
        }
        Ok(out)
    };
    let nested: Result<Vec<Vec<SweepPoint>>, LindbladError> =
        b_grid.par_iter().map(per_field).collect();
    Ok(nested?.into_iter().flatten().collect())
}

/// Fitted per-block T1(B) for diabatic Z noise; each block relaxes
/// independently, so the reduced pair generator is exact.
pub fn z_noise_t1_sweep(
    system: &SpinSystem,
    m_values: &[HalfInt],
    b_grid: &[f64],
    alpha_sq: f64,
) -> Result<Vec<(f64, HalfInt, f64, f64)>, LindbladError> {
    use rayon::prelude::*;
    let per_field = |&b: &f64| -> Result<Vec<(f64, HalfInt, f64, f64)>, LindbladError> {
        let noise = [NoiseSpec {
            axis: NoiseAxis::Z,
            variance: alpha_sq,
            adiabaticity: Adiabaticity::Diabatic,
        }];
        let full = build_generator(system, b, &noise, Picture::Interaction)?;
        let map = system.label_map()?;
        let mut out = Vec::new();
        for &mm in m_values {
            let block = system.block(mm, b)?;
            if block.dimensionality != 2 {
                return Err(LindbladError::InvalidClass(format!(
                    "per-block T1 needs a two-dimensional block, got m={mm}"
                )));
            }
            let e = map.label_of(Branch::Plus, mm).unwrap();
            let g = map.label_of(Branch::Minus, mm).unwrap();
            let sub = restricted_liouvillian(&full, &[e, g]);
            let rho0 = density_from_amplitudes(2, &[(1, Complex64::from(1.0))]);
            let (fit, _, _) = fit_pair_decay(
                &sub,
                &rho0,
                1,
                2,
                PairObservable::Polarization,
                DecayModel::SingleExponential,
                alpha_sq,
            )?;
            out.push((
                b,
                mm,
                if fit.rates[0] > 0.0 {
                    1.0 / fit.rates[0]
                } else {
                    f64::INFINITY
                },
                fit.residual_rms,
            ));
        }
        Ok(out)
    };
    let nested: Result<Vec<_>, LindbladError> = b_grid.par_iter().map(per_field).collect();
    Ok(nested?.into_iter().flatten().collect())
}
