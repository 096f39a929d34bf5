//! Two-qubit logic on the four-state subspace: the logical state map,
//! compilation of conditional rotations into resonant pulses, and exact
//! unitary algebra for gate sequences (controlled-Z constructions from
//! exchange or Ising steps, Hadamard and sigma-z pulse identities).
//!
//! Sequence verification multiplies closed-form factor matrices and compares
//! against the target modulo a fitted global phase.

use crate::drive::{DriveAxis, Polarization, PulseSpec};
use crate::half::HalfInt;
use crate::spectra::{transition_classes, SpectraError, TransitionClass};
use crate::system::{Branch, SpinSystem, SystemError};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GateError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error("logical levels are degenerate at B = {b} T: labels {labels:?}")]
    DegenerateLogicalLevels { b: f64, labels: Vec<usize> },
    #[error("z-axis rotations are not directly drivable; compile them from x and y pulses")]
    ZAxisNotDrivable,
    #[error("no single transition connects labels {0} and {1}")]
    NoTransition(usize, usize),
    #[error("circular polarization does not couple to this line (eta = {eta:.4})")]
    PolarizationMismatch { eta: f64 },
}

/// Which physical qubit of the coupled pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Qubit {
    Electron,
    Nucleus,
}

/// Map from the four logical basis states to adiabatic labels at a field.
///
/// The fiducial |0e0n> state is the level with both spins fully anti-aligned
/// with the field (label 10 for I = 9/2) rather than the ground state.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LogicalMap {
    pub b_tesla: f64,
    /// Label of |0e 0n>.
    pub zero_zero: usize,
    /// Label of |0e 1n>.
    pub zero_one: usize,
    /// Label of |1e 0n>.
    pub one_zero: usize,
    /// Label of |1e 1n>.
    pub one_one: usize,
}

impl LogicalMap {
    pub fn label(&self, electron: bool, nucleus: bool) -> usize {
        match (electron, nucleus) {
            (false, false) => self.zero_zero,
            (false, true) => self.zero_one,
            (true, false) => self.one_zero,
            (true, true) => self.one_one,
        }
    }

    pub fn labels(&self) -> [usize; 4] {
        [self.zero_zero, self.zero_one, self.one_zero, self.one_one]
    }
}

/// Builds the logical map at a field, failing when any two of the four
/// levels are degenerate there.
pub fn logical_map(system: &SpinSystem, b_tesla: f64) -> Result<LogicalMap, GateError> {
    let map = system.label_map()?;
    let i = system.nuclear_spin();
    let one = HalfInt::from_int(1);
    let m_low = -(i + HalfInt::HALF); // both spins anti-aligned
    let m_mid = m_low + one;
    let lookup = |branch, m| map.label_of(branch, m).expect("logical states exist");
    let lm = LogicalMap {
        b_tesla,
        zero_zero: lookup(Branch::Minus, m_low),
        zero_one: lookup(Branch::Minus, m_mid),
        one_zero: lookup(Branch::Plus, m_mid),
        one_one: lookup(Branch::Plus, m_mid + one),
    };
    let levels = system.eigensystem(b_tesla)?;
    for group in system.degenerate_groups(&levels) {
        let hits: Vec<usize> = group
            .iter()
            .copied()
            .filter(|l| lm.labels().contains(l))
            .collect();
        if hits.len() > 1 {
            return Err(GateError::DegenerateLogicalLevels {
                b: b_tesla,
                labels: hits,
            });
        }
    }
    Ok(lm)
}

/// The transition class connecting two labels, if one exists.
pub fn class_between(
    system: &SpinSystem,
    label_a: usize,
    label_b: usize,
) -> Result<TransitionClass, GateError> {
    let map = system.label_map()?;
    for class in transition_classes(system) {
        let ((bu, mu), (bl, ml)) = class.upper_lower();
        let u = map.label_of(bu, mu).unwrap();
        let l = map.label_of(bl, ml).unwrap();
        if (u, l) == (label_a, label_b) || (u, l) == (label_b, label_a) {
            return Ok(class);
        }
    }
    Err(GateError::NoTransition(label_a, label_b))
}

/// Compiles one conditional single-qubit rotation into a resonant pulse on
/// the transition selected by (control, control_value):
/// electron rotations conditioned on the nucleus drive the |1e0n>-|0e0n> or
/// |1e1n>-|0e1n> lines, nuclear rotations conditioned on the electron drive
/// the |0e1n>-|0e0n> or |1e1n>-|1e0n> lines.
///
/// A linear pulse rotates at omega1 |eta| / 2, so the duration for angle
/// theta is 2 theta / (omega1 |eta|). Circularly polarized pulses rotate
/// twice as fast and must match the handedness of the line; they also keep
/// nearly coincident lines of the opposite handedness untouched, which
/// matters for faithful spectator behaviour at intermediate fields.
#[allow(clippy::too_many_arguments)]
pub fn conditional_rotation_pulse(
    system: &SpinSystem,
    map: &LogicalMap,
    control: Qubit,
    control_value: bool,
    axis: DriveAxis,
    polarization: Polarization,
    theta: f64,
    omega1: f64,
) -> Result<(PulseSpec, TransitionClass), GateError> {
    // target qubit is the other one; the four cases pick the four lines
    let (hi, lo) = match (control, control_value) {
        (Qubit::Nucleus, false) => (map.one_zero, map.zero_zero),
        (Qubit::Nucleus, true) => (map.one_one, map.zero_one),
        (Qubit::Electron, false) => (map.zero_one, map.zero_zero),
        (Qubit::Electron, true) => (map.one_one, map.one_zero),
    };
    let class = class_between(system, hi, lo)?;
    let carrier = class.frequency(system, map.b_tesla)?;
    let eta = class.eta(system, map.b_tesla)?;
    let co_rotating = match polarization {
        Polarization::Linear => 0.5,
        Polarization::RightHanded if eta > 0.0 => 1.0,
        Polarization::LeftHanded if eta < 0.0 => 1.0,
        _ => return Err(GateError::PolarizationMismatch { eta }),
    };
    let duration = theta / (omega1 * eta.abs() * co_rotating);
    Ok((
        PulseSpec {
            amplitude: omega1,
            carrier,
            axis,
            polarization,
            duration,
            phase: 0.0,
        },
        class,
    ))
}

/// The circular polarization that co-rotates with a given mixing factor.
pub fn matched_polarization(eta: f64) -> Polarization {
    if eta >= 0.0 {
        Polarization::RightHanded
    } else {
        Polarization::LeftHanded
    }
}

/// Rejects the undrivable axis at the type level for pulse compilation.
pub fn validate_pulse_axis(axis: PauliAxis) -> Result<DriveAxis, GateError> {
    match axis {
        PauliAxis::X => Ok(DriveAxis::X),
        PauliAxis::Y => Ok(DriveAxis::Y),
        PauliAxis::Z => Err(GateError::ZAxisNotDrivable),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

/// One factor of a gate sequence; all factors are exactly unitary.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub enum GateFactor {
    /// exp(i phi) * identity.
    GlobalPhase(f64),
    /// exp(i coeff sigma_axis) on one qubit (0 = left tensor slot).
    PauliRotation {
        qubit: u8,
        axis: PauliAxis,
        coeff: f64,
    },
    /// Square root of SWAP, from a half-period exchange interaction.
    SqrtSwap,
    /// exp(-i angle S_z (x) S_z) with spin-1/2 S_z.
    IsingZz { angle: f64 },
}

fn pauli(axis: PauliAxis) -> DMatrix<Complex64> {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match axis {
        PauliAxis::X => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        PauliAxis::Y => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        PauliAxis::Z => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

fn eye(n: usize) -> DMatrix<Complex64> {
    DMatrix::identity(n, n)
}

impl GateFactor {
    /// Closed-form matrix of the factor on `qubits` qubits.
    pub fn matrix(&self, qubits: usize) -> DMatrix<Complex64> {
        let dim = 1 << qubits;
        match *self {
            GateFactor::GlobalPhase(phi) => eye(dim) * Complex64::new(0.0, phi).exp(),
            GateFactor::PauliRotation { qubit, axis, coeff } => {
                // exp(i c sigma) = cos c + i sin c sigma
                let rot = eye(2) * Complex64::from(coeff.cos())
                    + pauli(axis) * Complex64::new(0.0, coeff.sin());
                match (qubits, qubit) {
                    (1, 0) => rot,
                    (2, 0) => rot.kronecker(&eye(2)),
                    (2, 1) => eye(2).kronecker(&rot),
                    _ => panic!("qubit index {qubit} out of range for {qubits} qubits"),
                }
            }
            GateFactor::SqrtSwap => {
                let z = Complex64::new(0.0, 0.0);
                let o = Complex64::new(1.0, 0.0);
                let p = Complex64::new(0.5, 0.5);
                let q = Complex64::new(0.5, -0.5);
                DMatrix::from_row_slice(4, 4, &[o, z, z, z, z, p, q, z, z, q, p, z, z, z, z, o])
            }
            GateFactor::IsingZz { angle } => {
                // S_z (x) S_z is diagonal with entries +-1/4
                let same = Complex64::new(0.0, -angle / 4.0).exp();
                let diff = Complex64::new(0.0, angle / 4.0).exp();
                DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![same, diff, diff, same]))
            }
        }
    }
}

/// An ordered product of primitive factors with its intended target.
#[derive(Clone, Debug)]
pub struct GateSequence {
    pub name: String,
    /// Factors in product order: the full unitary is factors[0] * factors[1] * ...
    pub factors: Vec<GateFactor>,
    pub qubits: usize,
    pub target: DMatrix<Complex64>,
}

impl GateSequence {
    pub fn product(&self) -> DMatrix<Complex64> {
        let dim = 1 << self.qubits;
        self.factors
            .iter()
            .fold(eye(dim), |acc, f| acc * f.matrix(self.qubits))
    }
}

/// Comparison of a sequence product against its target, modulo global phase.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Verification {
    /// |tr(T^dag U)| / dim.
    pub fidelity: f64,
    /// Entrywise max |U e^{-i phase} - T|.
    pub max_norm_error: f64,
    /// Fitted global phase.
    pub global_phase: f64,
    /// ||U^dag U - 1||.
    pub unitarity_error: f64,
}

/// Distance modulo global phase: zero exactly when U = e^{i phi} T.
pub fn verify_sequence(seq: &GateSequence) -> Verification {
    let u = seq.product();
    let dim = u.nrows();
    let overlap: Complex64 = (seq.target.adjoint() * &u).trace();
    let fidelity = overlap.norm() / dim as f64;
    let phase = overlap.arg();
    let aligned = &u * Complex64::new(0.0, -phase).exp();
    let max_norm_error = (&aligned - &seq.target)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let unitarity_error = (u.adjoint() * &u - eye(dim)).norm();
    Verification {
        fidelity,
        max_norm_error,
        global_phase: phase,
        unitarity_error,
    }
}

fn sigma_z_target() -> DMatrix<Complex64> {
    pauli(PauliAxis::Z)
}

fn hadamard_target() -> DMatrix<Complex64> {
    (pauli(PauliAxis::X) + pauli(PauliAxis::Z)) * Complex64::from(0.5_f64.sqrt())
}

fn cz_target() -> DMatrix<Complex64> {
    let o = Complex64::new(1.0, 0.0);
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![o, o, o, -o]))
}

fn cnot_target() -> DMatrix<Complex64> {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    DMatrix::from_row_slice(4, 4, &[o, z, z, z, z, o, z, z, z, z, z, o, z, z, o, z])
}

/// sigma_z from two pi/2 pulses plus a phase.
pub fn sigma_z_sequence() -> GateSequence {
    GateSequence {
        name: "sigma-z".into(),
        factors: vec![
            GateFactor::GlobalPhase(3.0 * FRAC_PI_2),
            GateFactor::PauliRotation {
                qubit: 0,
                axis: PauliAxis::Y,
                coeff: FRAC_PI_2,
            },
            GateFactor::PauliRotation {
                qubit: 0,
                axis: PauliAxis::X,
                coeff: FRAC_PI_2,
            },
        ],
        qubits: 1,
        target: sigma_z_target(),
    }
}

/// Hadamard from three pulses plus a phase.
pub fn hadamard_sequence() -> GateSequence {
    GateSequence {
        name: "hadamard".into(),
        factors: vec![
            GateFactor::GlobalPhase(3.0 * FRAC_PI_2),
            GateFactor::PauliRotation {
                qubit: 0,
                axis: PauliAxis::X,
                coeff: FRAC_PI_2,
            },
            GateFactor::PauliRotation {
                qubit: 0,
                axis: PauliAxis::Y,
                coeff: 3.0 * FRAC_PI_4,
            },
            GateFactor::PauliRotation {
                qubit: 0,
                axis: PauliAxis::X,
                coeff: PI,
            },
        ],
        qubits: 1,
        target: hadamard_target(),
    }
}

/// Controlled-Z from two exchange (sqrt-SWAP) steps and z rotations.
pub fn cz_heisenberg_sequence() -> GateSequence {
    GateSequence {
        name: "cz-heisenberg".into(),
        factors: vec![
            GateFactor::GlobalPhase(FRAC_PI_2),
            GateFactor::PauliRotation {
                qubit: 0,
                axis: PauliAxis::Z,
                coeff: -FRAC_PI_4,
            },
            GateFactor::PauliRotation {
                qubit: 1,
                axis: PauliAxis::Z,
                coeff: FRAC_PI_4,
            },
            GateFactor::SqrtSwap,
            GateFactor::PauliRotation {
                qubit: 0,
                axis: PauliAxis::Z,
                coeff: -FRAC_PI_2,
            },
            GateFactor::SqrtSwap,
        ],
        qubits: 2,
        target: cz_target(),
    }
}

/// Controlled-Z from a single Ising step and z rotations.
pub fn cz_ising_sequence() -> GateSequence {
    GateSequence {
        name: "cz-ising".into(),
        factors: vec![
            GateFactor::GlobalPhase(-FRAC_PI_4),
            GateFactor::PauliRotation {
                qubit: 0,
                axis: PauliAxis::Z,
                coeff: FRAC_PI_4,
            },
            GateFactor::PauliRotation {
                qubit: 1,
                axis: PauliAxis::Z,
                coeff: FRAC_PI_4,
            },
            GateFactor::IsingZz { angle: PI },
        ],
        qubits: 2,
        target: cz_target(),
    }
}

/// Both controlled-Z constructions (exchange route, Ising route).
pub fn cz_constructions() -> (GateSequence, GateSequence) {
    (cz_heisenberg_sequence(), cz_ising_sequence())
}

/// CNOT by conjugating a controlled-Z with Hadamards on the target qubit.
pub fn cnot_sequence() -> GateSequence {
    let mut factors = vec![GateFactor::GlobalPhase(0.0)];
    let h = hadamard_sequence();
    let on_target = |f: &GateFactor| match *f {
        GateFactor::PauliRotation { axis, coeff, .. } => GateFactor::PauliRotation {
            qubit: 1,
            axis,
            coeff,
        },
        other => other,
    };
    factors.extend(h.factors.iter().map(&on_target));
    factors.extend(cz_ising_sequence().factors);
    factors.extend(h.factors.iter().map(&on_target));
    GateSequence {
        name: "cnot".into(),
        factors,
        qubits: 2,
        target: cnot_target(),
    }
}

/// The z rotation exp(-i sigma_z pi/4) built from x and y pulses only.
pub fn z_rotation_decomposition() -> GateSequence {
    let target = eye(2) * Complex64::from(FRAC_PI_4.cos())
        - pauli(PauliAxis::Z) * Complex64::new(0.0, FRAC_PI_4.sin());
    GateSequence {
        name: "z-rotation-from-xy".into(),
        factors: vec![
            GateFactor::GlobalPhase(PI),
            GateFactor::PauliRotation {
                qubit: 0,
                axis: PauliAxis::Y,
                coeff: -3.0 * FRAC_PI_4,
            },
            GateFactor::PauliRotation {
                qubit: 0,
                axis: PauliAxis::X,
                coeff: -FRAC_PI_4,
            },
            GateFactor::PauliRotation {
                qubit: 0,
                axis: PauliAxis::Y,
                coeff: -FRAC_PI_4,
            },
        ],
        qubits: 1,
        target,
    }
}

/// The standard verification suite: pulse identities, both controlled-Z
/// routes, the z-rotation decomposition, and CNOT.
pub fn standard_sequences() -> Vec<GateSequence> {
    vec![
        sigma_z_sequence(),
        hadamard_sequence(),
        cz_heisenberg_sequence(),
        cz_ising_sequence(),
        z_rotation_decomposition(),
        cnot_sequence(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_standard_sequences_hit_their_targets() {
        for seq in standard_sequences() {
            let v = verify_sequence(&seq);
            assert!(
                v.max_norm_error < 1e-12,
                "{}: error {:.3e}",
                seq.name,
                v.max_norm_error
            );
            assert!(v.unitarity_error < 1e-13, "{}: unitarity", seq.name);
            assert!((v.fidelity - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn every_factor_is_unitary() {
        for seq in standard_sequences() {
            for f in &seq.factors {
                let m = f.matrix(seq.qubits);
                let err = (m.adjoint() * &m - eye(m.nrows())).norm();
                assert!(err < 1e-14, "{:?}", f);
            }
        }
    }

    #[test]
    fn identity_sequence_has_unit_fidelity() {
        let seq = GateSequence {
            name: "identity".into(),
            factors: vec![],
            qubits: 1,
            target: eye(2),
        };
        let v = verify_sequence(&seq);
        assert_eq!(v.max_norm_error, 0.0);
        assert_eq!(v.fidelity, 1.0);
    }

    #[test]
    fn phase_modded_comparison_is_a_metric() {
        // d(U, V) = 0 iff U = e^{i phi} V
        let target = hadamard_target();
        let phase = Complex64::new(0.0, 1.234).exp();
        let seq = GateSequence {
            name: "phased".into(),
            factors: vec![
                GateFactor::GlobalPhase(1.234),
                GateFactor::GlobalPhase(3.0 * FRAC_PI_2),
                GateFactor::PauliRotation {
                    qubit: 0,
                    axis: PauliAxis::X,
                    coeff: FRAC_PI_2,
                },
                GateFactor::PauliRotation {
                    qubit: 0,
                    axis: PauliAxis::Y,
                    coeff: 3.0 * FRAC_PI_4,
                },
                GateFactor::PauliRotation {
                    qubit: 0,
                    axis: PauliAxis::X,
                    coeff: PI,
                },
            ],
            qubits: 1,
            target: target.clone(),
        };
        let v = verify_sequence(&seq);
        assert!(v.max_norm_error < 1e-12);
        assert!((v.global_phase - 1.234).abs() < 1e-12);
        // a genuinely different unitary keeps a nonzero distance
        let off = GateSequence {
            name: "off".into(),
            factors: vec![GateFactor::PauliRotation {
                qubit: 0,
                axis: PauliAxis::X,
                coeff: 0.3,
            }],
            qubits: 1,
            target: target.clone(),
        };
        assert!(verify_sequence(&off).max_norm_error > 0.1);
        let _ = phase;
    }

    #[test]
    fn logical_map_matches_high_field_tables() {
        let sys = SpinSystem::si_bi();
        let lm = logical_map(&sys, 6.0).unwrap();
        assert_eq!(lm.zero_zero, 10);
        assert_eq!(lm.zero_one, 9);
        assert_eq!(lm.one_zero, 11);
        assert_eq!(lm.one_one, 12);

        let sip = SpinSystem::si_p();
        let lm_p = logical_map(&sip, 0.3).unwrap();
        assert_eq!(lm_p.zero_zero, 2);
        assert_eq!(lm_p.zero_one, 1);
        assert_eq!(lm_p.one_zero, 3);
        assert_eq!(lm_p.one_one, 4);
    }

    #[test]
    fn logical_map_rejects_degenerate_field() {
        let sys = SpinSystem::si_bi();
        assert!(matches!(
            logical_map(&sys, 0.0),
            Err(GateError::DegenerateLogicalLevels { .. })
        ));
    }

    #[test]
    fn conditional_pulse_carriers_follow_the_four_lines() {
        let sys = SpinSystem::si_bi();
        let lm = logical_map(&sys, 0.21).unwrap();
        let w1 = crate::units::mhz_to_angular(30.0);
        let cases = [
            (Qubit::Nucleus, false, (11, 10)),
            (Qubit::Nucleus, true, (12, 9)),
            (Qubit::Electron, false, (10, 9)),
            (Qubit::Electron, true, (12, 11)),
        ];
        for (control, value, (hi, lo)) in cases {
            let (pulse, class) = conditional_rotation_pulse(
                &sys,
                &lm,
                control,
                value,
                DriveAxis::X,
                Polarization::Linear,
                PI,
                w1,
            )
            .unwrap();
            let expected = class_between(&sys, hi, lo).unwrap();
            assert_eq!(class, expected);
            let f = expected.frequency(&sys, 0.21).unwrap();
            assert!((pulse.carrier - f).abs() < 1e-6);
            // linear pi rotation lasts 2 pi / (omega1 |eta|)
            let eta = expected.eta(&sys, 0.21).unwrap().abs();
            let expect_t = std::f64::consts::TAU / (w1 * eta);
            assert!((pulse.duration - expect_t).abs() < 1e-12 * expect_t);
        }
        // zero angle means zero duration
        let (p0, _) = conditional_rotation_pulse(
            &sys,
            &lm,
            Qubit::Electron,
            true,
            DriveAxis::Y,
            Polarization::Linear,
            0.0,
            w1,
        )
        .unwrap();
        assert_eq!(p0.duration, 0.0);
        // z axis is rejected for direct drive
        assert!(matches!(
            validate_pulse_axis(PauliAxis::Z),
            Err(GateError::ZAxisNotDrivable)
        ));
        // wrong handedness is rejected: the 12-11 line has eta > 0
        assert!(matches!(
            conditional_rotation_pulse(
                &sys,
                &lm,
                Qubit::Electron,
                true,
                DriveAxis::X,
                Polarization::LeftHanded,
                PI,
                w1,
            ),
            Err(GateError::PolarizationMismatch { .. })
        ));
    }
}
