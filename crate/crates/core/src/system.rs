//! Static Hamiltonian of one electron (S = 1/2) hyperfine-coupled to a
//! nuclear spin I in an external field along z:
//!
//!   H0 = omega0 S_z - omega0 delta I_z + A S.I
//!
//! Because H0 commutes with S_z + I_z it splits into one- and two-dimensional
//! blocks labelled by m = m_S + m_I. Each two-dimensional block is
//!
//!   H_m = (A/2) (Delta_m sigma_z + Omega_m sigma_x - epsilon_m 1)
//!
//! with Delta_m = m + w0t (1 + delta), Omega_m = sqrt(I(I+1) + 1/4 - m^2),
//! epsilon_m = (1 + 4 w0t m delta)/2 and w0t = omega0/A. The block angle
//! theta_m (tan theta_m = Omega_m/Delta_m) fixes the eigenvector mixing, so
//! the whole eigensystem is closed-form at any field.

use crate::half::HalfInt;
use crate::operators::ProductBasis;
use crate::units::{G_FREE_ELECTRON, MU_B_OVER_HBAR};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reference field (tesla) where integer labels are anchored to the
/// energy-ascending order; labels follow the adiabatic states at other fields.
pub const LABEL_REFERENCE_FIELD: f64 = 6.0;

/// Two energies closer than this (in units of A) count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SystemError {
    #[error("nuclear spin must be a half-integer with 2I >= 1, got {0}")]
    InvalidNuclearSpin(HalfInt),
    #[error("hyperfine coupling must be positive, got {0} GHz")]
    InvalidHyperfine(f64),
    #[error("zeeman ratio must be non-negative, got {0}")]
    InvalidZeemanRatio(f64),
    #[error("g-factor must be positive, got {0}")]
    InvalidGFactor(f64),
    #[error("magnetic field must be non-negative, got {0} T")]
    NegativeField(f64),
    #[error("m = {m} is not a valid block for I = {i}")]
    InvalidBlock { m: HalfInt, i: HalfInt },
    #[error("degenerate energies at B = {b} T between labels {labels:?}")]
    Degenerate { b: f64, labels: Vec<usize> },
}

/// Physical constants of one donor species plus unit conventions.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SpinSystem {
    nuclear_spin: HalfInt,
    /// Hyperfine coupling A as an angular frequency (rad/s).
    hyperfine: f64,
    /// Ratio of nuclear to electron Zeeman frequency, delta = omega_I/omega_0.
    zeeman_ratio: f64,
    g_factor: f64,
}

impl SpinSystem {
    /// Builds a validated system; `a_ghz` is A / 2 pi in GHz.
    pub fn new(
        nuclear_spin: HalfInt,
        a_ghz: f64,
        zeeman_ratio: f64,
        g_factor: f64,
    ) -> Result<Self, SystemError> {
        if nuclear_spin.doubled() < 1 {
            return Err(SystemError::InvalidNuclearSpin(nuclear_spin));
        }
        if !a_ghz.is_finite() || a_ghz <= 0.0 {
            return Err(SystemError::InvalidHyperfine(a_ghz));
        }
        if zeeman_ratio < 0.0 {
            return Err(SystemError::InvalidZeemanRatio(zeeman_ratio));
        }
        if !g_factor.is_finite() || g_factor <= 0.0 {
            return Err(SystemError::InvalidGFactor(g_factor));
        }
        Ok(Self {
            nuclear_spin,
            hyperfine: crate::units::ghz_to_angular(a_ghz),
            zeeman_ratio,
            g_factor,
        })
    }

    /// Si:Bi preset: I = 9/2, A/2pi = 1.4754 GHz, delta = 2.488e-4.
    pub fn si_bi() -> Self {
        Self::new(HalfInt::from_doubled(9), 1.4754, 2.488e-4, G_FREE_ELECTRON).unwrap()
    }

    /// Si:P preset: I = 1/2, A/2pi = 117.53 MHz.
    pub fn si_p() -> Self {
        Self::new(HalfInt::HALF, 0.11753, 6.16e-4, 1.9985).unwrap()
    }

    /// Same species with the nuclear Zeeman term switched off. Several
    /// resonance conditions become exact rationals in this limit.
    pub fn with_zero_zeeman_ratio(&self) -> Self {
        Self {
            zeeman_ratio: 0.0,
            ..*self
        }
    }

    pub fn with_g_factor(&self, g: f64) -> Result<Self, SystemError> {
        if !g.is_finite() || g <= 0.0 {
            return Err(SystemError::InvalidGFactor(g));
        }
        Ok(Self {
            g_factor: g,
            ..*self
        })
    }

    pub fn nuclear_spin(&self) -> HalfInt {
        self.nuclear_spin
    }

    /// A in rad/s.
    pub fn hyperfine(&self) -> f64 {
        self.hyperfine
    }

    pub fn zeeman_ratio(&self) -> f64 {
        self.zeeman_ratio
    }

    pub fn g_factor(&self) -> f64 {
        self.g_factor
    }

    /// Hilbert-space dimension d = 2(2I+1).
    pub fn dim(&self) -> usize {
        2 * (self.nuclear_spin.doubled() + 1) as usize
    }

    pub fn basis(&self) -> ProductBasis {
        ProductBasis::new(self.nuclear_spin)
    }

    /// Electron Zeeman frequency omega0 = g mu_B B / hbar (rad/s).
    pub fn field_to_omega0(&self, b_tesla: f64) -> Result<f64, SystemError> {
        if b_tesla < 0.0 {
            return Err(SystemError::NegativeField(b_tesla));
        }
        Ok(self.g_factor * MU_B_OVER_HBAR * b_tesla)
    }

    /// Inverse of [`Self::field_to_omega0`].
    pub fn omega0_to_field(&self, omega0: f64) -> f64 {
        omega0 / (self.g_factor * MU_B_OVER_HBAR)
    }

    /// Rescaled Zeeman frequency w0t = omega0 / A.
    pub fn omega0_tilde(&self, b_tesla: f64) -> Result<f64, SystemError> {
        Ok(self.field_to_omega0(b_tesla)? / self.hyperfine)
    }

    pub fn omega0_tilde_to_field(&self, omega0_tilde: f64) -> f64 {
        self.omega0_to_field(omega0_tilde * self.hyperfine)
    }

    /// All block labels m = m_S + m_I, ascending from -(I + 1/2).
    pub fn m_values(&self) -> Vec<HalfInt> {
        let top = self.nuclear_spin.doubled() + 1;
        (-top..=top).step_by(2).map(HalfInt::from_doubled).collect()
    }

    pub fn is_valid_m(&self, m: HalfInt) -> bool {
        let top = self.nuclear_spin.doubled() + 1;
        m.doubled().abs() <= top && (m.doubled() - top).rem_euclid(2) == 0
    }

    /// Block parameters at field `b_tesla`.
    pub fn block(&self, m: HalfInt, b_tesla: f64) -> Result<SubspaceBlock, SystemError> {
        let w0t = self.omega0_tilde(b_tesla)?;
        self.block_at_tilde(m, w0t)
    }

    /// Block parameters as a function of w0t = omega0/A directly.
    pub fn block_at_tilde(
        &self,
        m: HalfInt,
        omega0_tilde: f64,
    ) -> Result<SubspaceBlock, SystemError> {
        if !self.is_valid_m(m) {
            return Err(SystemError::InvalidBlock {
                m,
                i: self.nuclear_spin,
            });
        }
        Ok(SubspaceBlock::new(
            self.nuclear_spin,
            m,
            omega0_tilde,
            self.zeeman_ratio,
        ))
    }

    /// Closed-form eigensystem at field `b_tesla`, one entry per level,
    /// sorted by adiabatic label (see [`LabelMap`]).
    pub fn eigensystem(&self, b_tesla: f64) -> Result<Vec<EigenLevel>, SystemError> {
        let w0t = self.omega0_tilde(b_tesla)?;
        let map = self.label_map()?;
        let mut levels: Vec<EigenLevel> = map
            .states()
            .iter()
            .enumerate()
            .map(|(i, &(branch, m))| {
                let block = SubspaceBlock::new(self.nuclear_spin, m, w0t, self.zeeman_ratio);
                self.level_from_block(&block, branch, i + 1)
            })
            .collect();
        // labels are 1-based and already in order
        levels.sort_by_key(|l| l.label);
        Ok(levels)
    }

    fn level_from_block(&self, block: &SubspaceBlock, branch: Branch, label: usize) -> EigenLevel {
        let basis = self.basis();
        let half = HalfInt::HALF;
        let (a, b) = block.coeffs(branch).expect("branch present");
        let energy = 0.5 * self.hyperfine * block.energy_factor(branch).expect("branch present");
        // |+,m> = a |+1/2, m-1/2> + b |-1/2, m+1/2>
        // |-,m> = a |-1/2, m+1/2> + b |+1/2, m-1/2>
        let components = if block.dimensionality == 1 {
            let m_s = if block.m.doubled() > 0 { half } else { -half };
            vec![(basis.index(m_s, block.m - m_s), 1.0)]
        } else {
            match branch {
                Branch::Plus => vec![
                    (basis.index(half, block.m - half), a),
                    (basis.index(-half, block.m + half), b),
                ],
                Branch::Minus => vec![
                    (basis.index(-half, block.m + half), a),
                    (basis.index(half, block.m - half), b),
                ],
            }
        };
        EigenLevel {
            branch,
            m: block.m,
            energy,
            coeff_a: a,
            coeff_b: b,
            label,
            spin_components: components,
        }
    }

    /// Dense H0 in the product basis (real symmetric); the brute-force
    /// cross-check for the block formulas.
    pub fn full_hamiltonian(&self, b_tesla: f64) -> Result<DMatrix<f64>, SystemError> {
        let omega0 = self.field_to_omega0(b_tesla)?;
        let basis = self.basis();
        let h = basis.s_z() * omega0 - basis.i_z() * (omega0 * self.zeeman_ratio)
            + basis.s_dot_i() * self.hyperfine;
        Ok(h)
    }

    /// Rescaled Zeeman frequency at which labels are anchored. Nominally
    /// [`LABEL_REFERENCE_FIELD`], but capped below the point where the
    /// nuclear Zeeman term overtakes the hyperfine splitting (omega0 delta
    /// = A/4) so that weakly coupled species keep the conventional
    /// high-field ordering.
    fn label_reference_tilde(&self) -> f64 {
        let w0t_6t = self.omega0_tilde(LABEL_REFERENCE_FIELD).unwrap();
        if self.zeeman_ratio > 0.0 {
            w0t_6t.min(0.25 / self.zeeman_ratio)
        } else {
            w0t_6t
        }
    }

    /// Adiabatic labels: energy-ascending order at the reference field,
    /// ties broken by m ascending, carried to every other field by state
    /// identity (branch, m).
    pub fn label_map(&self) -> Result<LabelMap, SystemError> {
        let w0t_ref = self.label_reference_tilde();
        let mut entries: Vec<(Branch, HalfInt, f64)> = Vec::with_capacity(self.dim());
        let top = self.nuclear_spin.doubled() + 1;
        let mut md = -top;
        while md <= top {
            let m = HalfInt::from_doubled(md);
            let block = SubspaceBlock::new(self.nuclear_spin, m, w0t_ref, self.zeeman_ratio);
            for branch in [Branch::Plus, Branch::Minus] {
                if let Some(factor) = block.energy_factor(branch) {
                    entries.push((branch, m, factor));
                }
            }
            md += 2;
        }
        entries.sort_by(|a, b| {
            a.2.partial_cmp(&b.2)
                .unwrap()
                .then(a.1.doubled().cmp(&b.1.doubled()))
        });
        Ok(LabelMap {
            states: entries.iter().map(|&(br, m, _)| (br, m)).collect(),
        })
    }

    /// Degeneracy report at a field: groups of labels with energies closer
    /// than [`DEGENERACY_TOL`] * A.
    pub fn degenerate_groups(&self, levels: &[EigenLevel]) -> Vec<Vec<usize>> {
        let tol = DEGENERACY_TOL * self.hyperfine;
        let mut by_energy: Vec<&EigenLevel> = levels.iter().collect();
        by_energy.sort_by(|a, b| a.energy.partial_cmp(&b.energy).unwrap());
        let mut groups = Vec::new();
        let mut current = vec![by_energy[0].label];
        for pair in by_energy.windows(2) {
            if (pair[1].energy - pair[0].energy).abs() <= tol {
                current.push(pair[1].label);
            } else {
                if current.len() > 1 {
                    groups.push(std::mem::take(&mut current));
                }
                current = vec![pair[1].label];
            }
        }
        if current.len() > 1 {
            groups.push(current);
        }
        groups
    }

    /// Eigenvector matrix with column label-1 holding the level's product
    /// basis vector (real, orthonormal).
    pub fn eigenvector_matrix(&self, levels: &[EigenLevel]) -> DMatrix<f64> {
        let d = self.dim();
        let mut v = DMatrix::zeros(d, d);
        for level in levels {
            for &(idx, c) in &level.spin_components {
                v[(idx, level.label - 1)] = c;
            }
        }
        v
    }
}

/// Which of the two block eigenstates; one-dimensional blocks take the sign
/// of m.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Branch::Plus => write!(f, "+"),
            Branch::Minus => write!(f, "-"),
        }
    }
}

/// Per-m block parameters at a given field (all dimensionless except theta).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SubspaceBlock {
    pub m: HalfInt,
    pub delta: f64,
    pub omega: f64,
    pub epsilon: f64,
    pub r: f64,
    /// Inclination of (Omega_m, Delta_m); zero for one-dimensional blocks.
    pub theta: f64,
    pub dimensionality: u8,
}

impl SubspaceBlock {
    fn new(nuclear_spin: HalfInt, m: HalfInt, omega0_tilde: f64, delta_ratio: f64) -> Self {
        let i = nuclear_spin.value();
        let mv = m.value();
        let delta = mv + omega0_tilde * (1.0 + delta_ratio);
        let omega_sq = i * (i + 1.0) + 0.25 - mv * mv;
        let omega = if omega_sq > 0.0 { omega_sq.sqrt() } else { 0.0 };
        let epsilon = 0.5 * (1.0 + 4.0 * omega0_tilde * mv * delta_ratio);
        let one_dim = m.abs().doubled() == nuclear_spin.doubled() + 1;
        let (r, theta) = if one_dim {
            (delta.abs(), 0.0)
        } else {
            ((delta * delta + omega_sq).sqrt(), omega.atan2(delta))
        };
        Self {
            m,
            delta,
            omega,
            epsilon,
            r,
            theta,
            dimensionality: if one_dim { 1 } else { 2 },
        }
    }

    pub fn cos_theta(&self) -> f64 {
        if self.dimensionality == 1 {
            1.0
        } else {
            self.delta / self.r
        }
    }

    pub fn sin_theta(&self) -> f64 {
        if self.dimensionality == 1 {
            0.0
        } else {
            self.omega / self.r
        }
    }

    /// True when the block hosts this branch: one-dimensional blocks carry
    /// only the branch matching the sign of m.
    pub fn has_branch(&self, branch: Branch) -> bool {
        if self.dimensionality == 2 {
            return true;
        }
        match branch {
            Branch::Plus => self.m.doubled() > 0,
            Branch::Minus => self.m.doubled() < 0,
        }
    }

    /// Eigenvector coefficients (a, b) of the branch, None if absent.
    pub fn coeffs(&self, branch: Branch) -> Option<(f64, f64)> {
        if !self.has_branch(branch) {
            return None;
        }
        if self.dimensionality == 1 {
            return Some((1.0, 0.0));
        }
        let a = (0.5 * self.theta).cos();
        let b = (0.5 * self.theta).sin();
        Some(match branch {
            Branch::Plus => (a, b),
            Branch::Minus => (a, -b),
        })
    }

    /// Energy in units of A/2, None if the branch is absent.
    pub fn energy_factor(&self, branch: Branch) -> Option<f64> {
        if !self.has_branch(branch) {
            return None;
        }
        Some(if self.dimensionality == 1 {
            let sign = if self.m.doubled() > 0 { 1.0 } else { -1.0 };
            sign * self.delta - self.epsilon
        } else {
            match branch {
                Branch::Plus => -self.epsilon + self.r,
                Branch::Minus => -self.epsilon - self.r,
            }
        })
    }

    /// d(energy factor)/d(omega0 tilde), None if the branch is absent.
    pub fn energy_factor_slope(&self, branch: Branch, zeeman_ratio: f64) -> Option<f64> {
        if !self.has_branch(branch) {
            return None;
        }
        let depsilon = 2.0 * self.m.value() * zeeman_ratio;
        Some(if self.dimensionality == 1 {
            let sign = if self.m.doubled() > 0 { 1.0 } else { -1.0 };
            sign * (1.0 + zeeman_ratio) - depsilon
        } else {
            match branch {
                Branch::Plus => -depsilon + self.cos_theta() * (1.0 + zeeman_ratio),
                Branch::Minus => -depsilon - self.cos_theta() * (1.0 + zeeman_ratio),
            }
        })
    }
}

/// One labelled eigenstate at a field.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenLevel {
    pub branch: Branch,
    pub m: HalfInt,
    /// Energy as angular frequency (rad/s).
    pub energy: f64,
    pub coeff_a: f64,
    pub coeff_b: f64,
    /// 1-based adiabatic label.
    pub label: usize,
    /// Product-basis components (basis index, real coefficient).
    pub spin_components: Vec<(usize, f64)>,
}

impl EigenLevel {
    pub fn is_uncoupled(&self) -> bool {
        self.spin_components.len() == 1
    }

    pub fn state_vector(&self, dim: usize) -> DVector<f64> {
        let mut v = DVector::zeros(dim);
        for &(idx, c) in &self.spin_components {
            v[idx] = c;
        }
        v
    }
}

/// Bidirectional map between (branch, m) and the 1-based adiabatic label.
#[derive(Clone, Debug)]
pub struct LabelMap {
    states: Vec<(Branch, HalfInt)>,
}

impl LabelMap {
    /// (branch, m) in label order; index k holds label k+1.
    pub fn states(&self) -> &[(Branch, HalfInt)] {
        &self.states
    }

    pub fn label_of(&self, branch: Branch, m: HalfInt) -> Option<usize> {
        self.states
            .iter()
            .position(|&s| s == (branch, m))
            .map(|i| i + 1)
    }

    pub fn state_of(&self, label: usize) -> Option<(Branch, HalfInt)> {
        self.states.get(label - 1).copied()
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn si_bi_dimensions_and_presets() {
        let sys = SpinSystem::si_bi();
        assert_eq!(sys.dim(), 20);
        assert_eq!(SpinSystem::si_p().dim(), 4);
        // synthetic integer-spin system is accepted
        let synth = SpinSystem::new(HalfInt::from_int(1), 1.0, 0.0, 2.0).unwrap();
        assert_eq!(synth.dim(), 6);
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(SpinSystem::new(HalfInt::ZERO, 1.0, 0.0, 2.0).is_err());
        assert!(SpinSystem::new(HalfInt::HALF, -1.0, 0.0, 2.0).is_err());
        assert!(SpinSystem::new(HalfInt::HALF, 1.0, -0.1, 2.0).is_err());
        assert!(SpinSystem::new(HalfInt::HALF, 1.0, 0.0, 0.0).is_err());
        assert!(SpinSystem::si_bi().field_to_omega0(-0.1).is_err());
    }

    #[test]
    fn field_omega0_round_trip() {
        let sys = SpinSystem::si_bi();
        for b in [1e-6, 0.1, 0.21, 6.0] {
            let w = sys.field_to_omega0(b).unwrap();
            assert!((sys.omega0_to_field(w) - b).abs() <= 1e-12 * b);
        }
        assert_eq!(sys.field_to_omega0(0.0).unwrap(), 0.0);
    }

    #[test]
    fn known_working_point_fields() {
        let sys = SpinSystem::si_bi();
        // w0t = 4 corresponds to B close to 0.21 T
        let b4 = sys.omega0_tilde_to_field(4.0);
        assert!((b4 - 0.21).abs() < 0.003, "b4 = {b4}");
        // w0t = 25/7 corresponds to B close to 0.188 T
        let bmin = sys.omega0_tilde_to_field(25.0 / 7.0);
        assert!((bmin - 0.188).abs() < 0.002, "bmin = {bmin}");
    }

    #[test]
    fn block_params_match_closed_forms() {
        let sys = SpinSystem::si_bi();
        // m = -4 at w0t = 4/(1+delta): Delta = 0, theta = pi/2, Omega = 3
        let w0t = 4.0 / (1.0 + sys.zeeman_ratio());
        let block = sys.block_at_tilde(HalfInt::from_int(-4), w0t).unwrap();
        assert!(block.delta.abs() < 1e-12);
        assert!((block.theta - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!((block.omega - 3.0).abs() < 1e-12);

        // delta = 0 checks at w0t = 7 and w0t = 25/7
        let sys0 = sys.with_zero_zeeman_ratio();
        let b3 = sys0.block_at_tilde(HalfInt::from_int(-3), 7.0).unwrap();
        let b4 = sys0.block_at_tilde(HalfInt::from_int(-4), 7.0).unwrap();
        assert!((b3.theta - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!((b4.theta - std::f64::consts::FRAC_PI_4).abs() < 1e-12);

        let c3 = sys0
            .block_at_tilde(HalfInt::from_int(-3), 25.0 / 7.0)
            .unwrap()
            .cos_theta();
        let c4 = sys0
            .block_at_tilde(HalfInt::from_int(-4), 25.0 / 7.0)
            .unwrap()
            .cos_theta();
        assert!((c3 - 1.0 / 50.0_f64.sqrt()).abs() < 1e-12);
        assert!((c4 + 1.0 / 50.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn invalid_block_rejected() {
        let sys = SpinSystem::si_bi();
        assert!(sys.block(HalfInt::from_int(5), 0.1).is_ok());
        assert!(sys.block(HalfInt::from_int(6), 0.1).is_err()); // out of range
        assert!(sys.block(HalfInt::from_doubled(9), 0.1).is_err()); // wrong parity
    }

    #[test]
    fn zero_field_spectrum_is_two_valued() {
        let sys = SpinSystem::si_bi();
        let a = sys.hyperfine();
        let levels = sys.eigensystem(0.0).unwrap();
        for level in &levels {
            let e = level.energy / a;
            assert!(
                (e - 2.25).abs() < 1e-12 || (e + 2.75).abs() < 1e-12,
                "unexpected zero-field energy {e} A"
            );
        }
        // splitting 5A corresponds to 2 pi x 7.377 GHz
        let split_ghz = crate::units::angular_to_ghz(5.0 * a);
        assert!((split_ghz - 7.377).abs() < 0.001);
    }

    #[test]
    fn high_field_labels_match_known_table() {
        let sys = SpinSystem::si_bi();
        let map = sys.label_map().unwrap();
        let m = |v: i32| HalfInt::from_int(v);
        assert_eq!(map.label_of(Branch::Minus, m(-4)), Some(9));
        assert_eq!(map.label_of(Branch::Minus, m(-5)), Some(10));
        assert_eq!(map.label_of(Branch::Plus, m(-4)), Some(11));
        assert_eq!(map.label_of(Branch::Plus, m(-3)), Some(12));
        assert_eq!(map.label_of(Branch::Plus, m(5)), Some(20));
        assert_eq!(map.label_of(Branch::Minus, m(5)), None);
        // labels are a permutation of 1..d
        let mut labels: Vec<usize> = (1..=map.dim()).collect();
        labels.retain(|&l| map.state_of(l).is_none());
        assert!(labels.is_empty());
    }

    #[test]
    fn si_p_labels() {
        let sys = SpinSystem::si_p();
        let map = sys.label_map().unwrap();
        assert_eq!(map.label_of(Branch::Minus, HalfInt::from_int(0)), Some(1));
        assert_eq!(map.label_of(Branch::Minus, HalfInt::from_int(-1)), Some(2));
        assert_eq!(map.label_of(Branch::Plus, HalfInt::from_int(0)), Some(3));
        assert_eq!(map.label_of(Branch::Plus, HalfInt::from_int(1)), Some(4));
    }

    #[test]
    fn eigenvectors_are_orthonormal() {
        let sys = SpinSystem::si_bi();
        for b in [0.05, 0.188, 0.37, 2.0] {
            let levels = sys.eigensystem(b).unwrap();
            let v = sys.eigenvector_matrix(&levels);
            let gram = v.transpose() * &v;
            let eye = DMatrix::<f64>::identity(20, 20);
            assert!((gram - eye).norm() < 1e-12);
        }
    }

    #[test]
    fn uncoupled_energy_is_linear_in_field() {
        let sys = SpinSystem::si_bi();
        let map = sys.label_map().unwrap();
        let label10 = map.label_of(Branch::Minus, HalfInt::from_int(-5)).unwrap();
        let e = |b: f64| sys.eigensystem(b).unwrap()[label10 - 1].energy;
        let (b0, db) = (0.5, 0.25);
        let second_diff = e(b0 + db) - 2.0 * e(b0) + e(b0 - db);
        assert!(second_diff.abs() < 1e-12 * e(b0).abs());
    }

    #[test]
    fn degeneracy_detection_at_zero_field() {
        let sys = SpinSystem::si_bi();
        let levels = sys.eigensystem(0.0).unwrap();
        let groups = sys.degenerate_groups(&levels);
        // two degenerate manifolds of 11 and 9 states at B = 0
        let mut sizes: Vec<usize> = groups.iter().map(|g| g.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![9, 11]);
        assert!(sys
            .degenerate_groups(&sys.eigensystem(6.0).unwrap())
            .is_empty());
    }
}
