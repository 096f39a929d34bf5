//! Transition enumeration, CW spectrum synthesis, and the resonance
//! structure: avoided crossings, the one-dimensional cancellation, equal-angle
//! points, two-photon coincidences, and df/dB = 0 working points.
//!
//! A transition is identified by its kind and the upper block label m of the
//! (m, m-1) pair; that identity is stable in field, so line positions are
//! found by root-finding on each line's closed-form frequency curve.

use crate::half::HalfInt;
use crate::roots::{bisect, sign_changes};
use crate::system::{Branch, EigenLevel, SpinSystem, SubspaceBlock, SystemError};
use crate::units::{angular_to_ghz, ghz_to_angular};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("field grid must be non-empty and strictly increasing")]
    BadGrid,
    #[error("linewidth must be positive, got {0} mT")]
    BadLinewidth(f64),
    #[error("microwave frequency must be positive, got {0} GHz")]
    BadMicrowaveFrequency(f64),
    #[error("transition {0} does not exist for this system")]
    MissingTransition(TransitionClass),
    #[error("df/dB extrema are defined for pairs with m <= 0, got m = {0}")]
    ExtremumClassM(HalfInt),
}

/// Selection character of a line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TransitionKind {
    /// |+,m> <-> |-,m-1>, dipole-allowed at all fields.
    DipoleAllowed,
    /// |+,m> <-> |+,m-1>, EPR-forbidden at high field.
    PlusForbidden,
    /// |-,m> <-> |-,m-1>, EPR-forbidden at high field; eta < 0.
    MinusForbidden,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Handedness {
    Right,
    Left,
}

/// Field-independent identity of a spectral line: the kind plus the upper
/// block label m of the (m, m-1) pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TransitionClass {
    pub kind: TransitionKind,
    pub m: HalfInt,
}

impl std::fmt::Display for TransitionClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self.kind {
            TransitionKind::DipoleAllowed => "dipole",
            TransitionKind::PlusForbidden => "plus-forbidden",
            TransitionKind::MinusForbidden => "minus-forbidden",
        };
        write!(f, "{}(m={})", tag, self.m)
    }
}

impl TransitionClass {
    pub fn new(kind: TransitionKind, m: HalfInt) -> Self {
        Self { kind, m }
    }

    fn branches(&self) -> (Branch, Branch) {
        match self.kind {
            TransitionKind::DipoleAllowed => (Branch::Plus, Branch::Minus),
            TransitionKind::PlusForbidden => (Branch::Plus, Branch::Plus),
            TransitionKind::MinusForbidden => (Branch::Minus, Branch::Minus),
        }
    }

    /// (branch, m) of the upper and lower level. The block-m member is the
    /// energetically upper level except on minus-branch pairs, where
    /// |-,m-1> sits above |-,m>.
    pub fn upper_lower(&self) -> ((Branch, HalfInt), (Branch, HalfInt)) {
        let (bm, bn) = self.branches();
        let one = HalfInt::from_int(1);
        match self.kind {
            TransitionKind::MinusForbidden => ((bn, self.m - one), (bm, self.m)),
            _ => ((bm, self.m), (bn, self.m - one)),
        }
    }

    pub fn exists(&self, system: &SpinSystem) -> bool {
        let one = HalfInt::from_int(1);
        if !system.is_valid_m(self.m) || !system.is_valid_m(self.m - one) {
            return false;
        }
        let (bm, bn) = self.branches();
        let block_m = system.block_at_tilde(self.m, 1.0).unwrap();
        let block_n = system.block_at_tilde(self.m - one, 1.0).unwrap();
        block_m.has_branch(bm) && block_n.has_branch(bn)
    }

    fn blocks(&self, system: &SpinSystem, w0t: f64) -> (SubspaceBlock, SubspaceBlock) {
        let one = HalfInt::from_int(1);
        (
            system.block_at_tilde(self.m, w0t).unwrap(),
            system.block_at_tilde(self.m - one, w0t).unwrap(),
        )
    }

    /// Signed mixing factor from the eigenvector coefficient products.
    pub fn eta_at_tilde(&self, system: &SpinSystem, w0t: f64) -> f64 {
        let (block_m, block_n) = self.blocks(system, w0t);
        let (bm, bn) = self.branches();
        let (am, bmc) = block_m.coeffs(bm).expect("transition exists");
        let (an, bnc) = block_n.coeffs(bn).expect("transition exists");
        match self.kind {
            TransitionKind::DipoleAllowed => am * an,
            TransitionKind::PlusForbidden => am * bnc,
            TransitionKind::MinusForbidden => bmc * an,
        }
    }

    pub fn eta(&self, system: &SpinSystem, b_tesla: f64) -> Result<f64, SpectraError> {
        Ok(self.eta_at_tilde(system, system.omega0_tilde(b_tesla)?))
    }

    /// Transition angular frequency (rad/s) as a function of w0t.
    pub fn frequency_at_tilde(&self, system: &SpinSystem, w0t: f64) -> f64 {
        let (block_m, block_n) = self.blocks(system, w0t);
        let (bm, bn) = self.branches();
        let em = block_m.energy_factor(bm).expect("transition exists");
        let en = block_n.energy_factor(bn).expect("transition exists");
        let diff = match self.kind {
            TransitionKind::MinusForbidden => en - em,
            _ => em - en,
        };
        0.5 * system.hyperfine() * diff
    }

    pub fn frequency(&self, system: &SpinSystem, b_tesla: f64) -> Result<f64, SpectraError> {
        Ok(self.frequency_at_tilde(system, system.omega0_tilde(b_tesla)?))
    }

    /// d(frequency)/d(w0t), in rad/s per unit of w0t.
    pub fn frequency_slope_at_tilde(&self, system: &SpinSystem, w0t: f64) -> f64 {
        let (block_m, block_n) = self.blocks(system, w0t);
        let (bm, bn) = self.branches();
        let dm = block_m
            .energy_factor_slope(bm, system.zeeman_ratio())
            .expect("transition exists");
        let dn = block_n
            .energy_factor_slope(bn, system.zeeman_ratio())
            .expect("transition exists");
        let diff = match self.kind {
            TransitionKind::MinusForbidden => dn - dm,
            _ => dm - dn,
        };
        0.5 * system.hyperfine() * diff
    }

    /// Materializes the full transition record at a field.
    pub fn at_field(
        &self,
        system: &SpinSystem,
        levels: &[EigenLevel],
        b_tesla: f64,
    ) -> Result<Transition, SpectraError> {
        if !self.exists(system) {
            return Err(SpectraError::MissingTransition(*self));
        }
        let map = system.label_map()?;
        let ((bu, mu), (bl, ml)) = self.upper_lower();
        let upper = levels[map.label_of(bu, mu).unwrap() - 1].clone();
        let lower = levels[map.label_of(bl, ml).unwrap() - 1].clone();
        let eta = self.eta(system, b_tesla)?;
        Ok(Transition {
            upper,
            lower,
            frequency: self.frequency(system, b_tesla)?,
            intensity: eta * eta,
            eta,
            kind: self.kind,
            handedness: if eta < 0.0 {
                Handedness::Left
            } else {
                Handedness::Right
            },
            class: *self,
        })
    }
}

/// An ordered eigenstate pair with frequency, intensity and mixing factor.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Transition {
    pub upper: EigenLevel,
    pub lower: EigenLevel,
    /// Angular frequency (rad/s), non-negative.
    pub frequency: f64,
    /// Relative weight, eta^2.
    pub intensity: f64,
    /// Signed mixing factor.
    pub eta: f64,
    pub kind: TransitionKind,
    pub handedness: Handedness,
    pub class: TransitionClass,
}

/// Every transition class of the system (28 for I = 9/2).
pub fn transition_classes(system: &SpinSystem) -> Vec<TransitionClass> {
    let mut out = Vec::new();
    for m in system.m_values() {
        for kind in [
            TransitionKind::DipoleAllowed,
            TransitionKind::PlusForbidden,
            TransitionKind::MinusForbidden,
        ] {
            let class = TransitionClass::new(kind, m);
            if class.exists(system) {
                out.push(class);
            }
        }
    }
    out
}

/// All |Delta m| = 1 transitions at a field, optionally filtered by kind.
pub fn transition_table(
    system: &SpinSystem,
    b_tesla: f64,
    kinds: Option<&[TransitionKind]>,
) -> Result<Vec<Transition>, SpectraError> {
    let levels = system.eigensystem(b_tesla)?;
    transition_classes(system)
        .into_iter()
        .filter(|c| kinds.is_none_or(|ks| ks.contains(&c.kind)))
        .map(|c| c.at_field(system, &levels, b_tesla))
        .collect()
}

/// A line position found by root-finding at fixed microwave frequency.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResonanceHit {
    pub class: TransitionClass,
    pub b_tesla: f64,
    /// Line weight eta^2 evaluated at the root.
    pub intensity: f64,
}

/// Result of scanning every line against one microwave frequency.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumRoots {
    pub mw_frequency_ghz: f64,
    pub hits: Vec<ResonanceHit>,
    /// Lines whose frequency curve never crosses the target in range.
    pub no_crossing: Vec<TransitionClass>,
}

/// Fields where each transition frequency equals the microwave frequency.
/// Frequency curves may be non-monotonic, so each curve is segmented at its
/// slope sign changes before bracketed bisection.
pub fn resonance_fields(
    system: &SpinSystem,
    mw_frequency_ghz: f64,
    b_range: (f64, f64),
    kinds: Option<&[TransitionKind]>,
) -> Result<SpectrumRoots, SpectraError> {
    if !mw_frequency_ghz.is_finite() || mw_frequency_ghz <= 0.0 {
        return Err(SpectraError::BadMicrowaveFrequency(mw_frequency_ghz));
    }
    let (b_lo, b_hi) = b_range;
    if b_hi <= b_lo || b_lo < 0.0 || !b_hi.is_finite() {
        return Err(SpectraError::BadGrid);
    }
    let target = ghz_to_angular(mw_frequency_ghz);
    let w_lo = system.omega0_tilde(b_lo)?;
    let w_hi = system.omega0_tilde(b_hi)?;

    let mut hits = Vec::new();
    let mut no_crossing = Vec::new();
    for class in transition_classes(system) {
        if let Some(ks) = kinds {
            if !ks.contains(&class.kind) {
                continue;
            }
        }
        // segment the curve at its extrema
        let slope = |w: f64| class.frequency_slope_at_tilde(system, w);
        let mut breaks = vec![w_lo];
        for (a, b) in sign_changes(slope, w_lo, w_hi, 2000) {
            if let Some(w) = bisect(slope, a, b, 1e-12) {
                breaks.push(w);
            }
        }
        breaks.push(w_hi);
        let mut found = false;
        let g = |w: f64| class.frequency_at_tilde(system, w) - target;
        for pair in breaks.windows(2) {
            if let Some(w_root) = bisect(g, pair[0], pair[1], 1e-13) {
                let b_root = system.omega0_tilde_to_field(w_root);
                hits.push(ResonanceHit {
                    class,
                    b_tesla: b_root,
                    intensity: class.eta_at_tilde(system, w_root).powi(2),
                });
                found = true;
            }
        }
        if !found {
            no_crossing.push(class);
        }
    }
    hits.sort_by(|a, b| a.b_tesla.partial_cmp(&b.b_tesla).unwrap());
    Ok(SpectrumRoots {
        mw_frequency_ghz,
        hits,
        no_crossing,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LineShape {
    /// Sum of intensity-weighted normalized Gaussians.
    Absorption,
    /// First derivative with respect to field, as CW EPR spectrometers plot.
    Derivative,
}

/// A synthesized field-swept spectrum.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumTrace {
    pub field_grid: Vec<f64>,
    pub amplitude: Vec<f64>,
    pub mw_frequency_ghz: f64,
    pub linewidth_mt: f64,
    pub shape: LineShape,
}

/// Sum of intensity-weighted Gaussian lines of width `linewidth_mt`
/// (standard deviation, in mT) at every resonance field.
pub fn cw_spectrum(
    system: &SpinSystem,
    mw_frequency_ghz: f64,
    b_grid: &[f64],
    linewidth_mt: f64,
    shape: LineShape,
) -> Result<SpectrumTrace, SpectraError> {
    if b_grid.is_empty() || b_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SpectraError::BadGrid);
    }
    if !linewidth_mt.is_finite() || linewidth_mt <= 0.0 {
        return Err(SpectraError::BadLinewidth(linewidth_mt));
    }
    let span = (b_grid[0], *b_grid.last().unwrap());
    // widen the root search so lines just outside the grid still contribute
    let margin = 0.05 * (span.1 - span.0);
    let roots = resonance_fields(
        system,
        mw_frequency_ghz,
        ((span.0 - margin).max(0.0), span.1 + margin),
        None,
    )?;
    let sigma = linewidth_mt * 1.0e-3;
    let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    let amplitude = b_grid
        .iter()
        .map(|&b| {
            roots
                .hits
                .iter()
                .map(|hit| {
                    let x = (b - hit.b_tesla) / sigma;
                    let gauss = norm * (-0.5 * x * x).exp();
                    match shape {
                        LineShape::Absorption => hit.intensity * gauss,
                        LineShape::Derivative => -hit.intensity * gauss * x / sigma,
                    }
                })
                .sum()
        })
        .collect();
    Ok(SpectrumTrace {
        field_grid: b_grid.to_vec(),
        amplitude,
        mw_frequency_ghz,
        linewidth_mt,
        shape,
    })
}

/// Kinds of structural resonance in the field dependence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResonanceKind {
    /// Delta_m = 0: Landau-Zener avoided crossing of a two-dimensional block.
    AvoidedCrossing,
    /// Delta_m = 0 in the one-dimensional block m = -(I + 1/2).
    OneDimensionalCancellation,
    /// theta_m = theta_{m-1}; the block Hamiltonians become proportional.
    EqualTheta,
    /// Adjacent transition frequencies around the uncoupled level coincide.
    TwoPhoton,
    /// df/dB = 0 minimum of a dipole-allowed line.
    FrequencyMinimum,
    /// df/dB = 0 maximum of a forbidden line.
    FrequencyMaximum,
}

/// A resonance location, with the defining condition satisfied at `b_tesla`
/// to solver tolerance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResonancePoint {
    pub kind: ResonanceKind,
    pub m: HalfInt,
    pub partner_m: Option<HalfInt>,
    pub b_tesla: f64,
    pub omega0_tilde: f64,
    pub transition: Option<TransitionClass>,
}

/// df/dB = 0 working points of one line class; minima for dipole lines,
/// maxima for forbidden lines. Solved on w0t in (0, 20] by bisection of the
/// closed-form slope, tolerance 1e-12 in w0t.
pub fn df_db_extrema(
    system: &SpinSystem,
    class: TransitionClass,
) -> Result<Vec<ResonancePoint>, SpectraError> {
    if !class.exists(system) {
        return Err(SpectraError::MissingTransition(class));
    }
    if class.m.doubled() > 0 {
        return Err(SpectraError::ExtremumClassM(class.m));
    }
    let slope = |w: f64| class.frequency_slope_at_tilde(system, w);
    let mut out = Vec::new();
    for (a, b) in sign_changes(slope, 1e-9, 20.0, 200_000) {
        let w = match bisect(slope, a, b, 1e-12) {
            Some(w) => w,
            None => continue,
        };
        // classify by the sign of the slope change
        let rising = slope(w + 1e-6) > slope(w - 1e-6);
        let kind = if rising {
            ResonanceKind::FrequencyMinimum
        } else {
            ResonanceKind::FrequencyMaximum
        };
        out.push(ResonancePoint {
            kind,
            m: class.m,
            partner_m: Some(class.m - HalfInt::from_int(1)),
            b_tesla: system.omega0_tilde_to_field(w),
            omega0_tilde: w,
            transition: Some(class),
        });
    }
    Ok(out)
}

/// All cancellation resonances of the system: avoided crossings
/// (m + w0t (1+delta) = 0 for -I+1/2 <= m <= 0), the one-dimensional
/// cancellation at m = -(I+1/2), equal-theta points of adjacent pairs, and
/// the two-photon coincidence around the uncoupled level.
pub fn cancellation_points(system: &SpinSystem) -> Vec<ResonancePoint> {
    let delta = system.zeeman_ratio();
    let i_plus_half = system.nuclear_spin() + HalfInt::HALF;
    let mut out = Vec::new();

    for m in system.m_values() {
        if m.doubled() > 0 || m.doubled() <= -i_plus_half.doubled() {
            continue;
        }
        let w0t = (-m.value() + 0.0) / (1.0 + delta); // +0.0 normalizes -0.0
        out.push(ResonancePoint {
            kind: ResonanceKind::AvoidedCrossing,
            m,
            partner_m: None,
            b_tesla: system.omega0_tilde_to_field(w0t),
            omega0_tilde: w0t,
            transition: None,
        });
    }

    let w_1d = i_plus_half.value() / (1.0 + delta);
    out.push(ResonancePoint {
        kind: ResonanceKind::OneDimensionalCancellation,
        m: -i_plus_half,
        partner_m: None,
        b_tesla: system.omega0_tilde_to_field(w_1d),
        omega0_tilde: w_1d,
        transition: None,
    });

    // equal-theta points: Omega_{m-1} Delta_m = Omega_m Delta_{m-1} with both
    // Delta of one sign; closed-form in x = w0t (1 + delta).
    let one = HalfInt::from_int(1);
    for m in system.m_values() {
        if m.doubled() > 0 {
            continue;
        }
        let n = m - one;
        let bm = match system.block_at_tilde(m, 1.0) {
            Ok(b) if b.dimensionality == 2 => b,
            _ => continue,
        };
        let bn = match system.block_at_tilde(n, 1.0) {
            Ok(b) if b.dimensionality == 2 => b,
            _ => continue,
        };
        let (om, on) = (bm.omega, bn.omega);
        if (on - om).abs() < 1e-12 {
            continue;
        }
        let x = (om * n.value() - on * m.value()) / (on - om);
        if x <= 0.0 {
            continue;
        }
        let w0t = x / (1.0 + delta);
        let block_m = system.block_at_tilde(m, w0t).unwrap();
        let block_n = system.block_at_tilde(n, w0t).unwrap();
        if (block_m.cos_theta() - block_n.cos_theta()).abs() > 1e-9 {
            continue;
        }
        out.push(ResonancePoint {
            kind: ResonanceKind::EqualTheta,
            m,
            partner_m: Some(n),
            b_tesla: system.omega0_tilde_to_field(w0t),
            omega0_tilde: w0t,
            transition: Some(TransitionClass::new(TransitionKind::PlusForbidden, m)),
        });
    }

    if delta < 1.0 {
        // E of the uncoupled level midway between the |+-, -(I-1/2)> pair
        let w_2p = i_plus_half.value() / (1.0 - delta);
        out.push(ResonancePoint {
            kind: ResonanceKind::TwoPhoton,
            m: -i_plus_half,
            partner_m: Some(-i_plus_half + one),
            b_tesla: system.omega0_tilde_to_field(w_2p),
            omega0_tilde: w_2p,
            transition: Some(TransitionClass::new(
                TransitionKind::DipoleAllowed,
                -i_plus_half + one,
            )),
        });
    }

    out.sort_by(|a, b| a.b_tesla.partial_cmp(&b.b_tesla).unwrap());
    out
}

/// Convenience: transition frequency in GHz.
pub fn frequency_ghz(
    system: &SpinSystem,
    class: TransitionClass,
    b: f64,
) -> Result<f64, SpectraError> {
    Ok(angular_to_ghz(class.frequency(system, b)?))
}
