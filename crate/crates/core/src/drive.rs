//! Time-domain propagation under explicit cosine microwave drives (no
//! rotating-wave approximation), rotating-frame two-level reductions, and
//! selective pulse design.
//!
//! The Schroedinger equation is integrated in the full product space with a
//! fixed-step fourth-order Runge-Kutta scheme; the step is tied to the
//! fastest frequency present, and a sampled two-half-steps comparison tracks
//! the worst local error so step-size failures surface as errors instead of
//! silent drift. States and populations are reported in the labelled
//! adiabatic eigenbasis at the static field.

use crate::linalg;
use crate::spectra::{SpectraError, TransitionClass};
use crate::system::{EigenLevel, SpinSystem, SystemError};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DriveError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error("initial state must be a normalized d-vector (norm deviates by {0:.3e})")]
    BadInitialState(f64),
    #[error("time grid must be non-negative and strictly increasing")]
    BadTimeGrid,
    #[error("pulse amplitude and duration must be non-negative")]
    BadPulse,
    #[error("step-size failure: worst sampled local error {worst:.3e} exceeds {tol:.3e}")]
    StepSizeFailure { worst: f64, tol: f64 },
    #[error("norm drifted by {0:.3e} over the trajectory")]
    NormDrift(f64),
    #[error("transition is degenerate (splitting {0:.3e} rad/s)")]
    DegenerateTransition(f64),
    #[error("rotation ratio must be odd:even to separate the lines")]
    RatioParity,
    #[error("requested ratio {requested} is too far from the mixing ratio {actual:.6}")]
    RatioMismatch { requested: f64, actual: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DriveAxis {
    X,
    Y,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarization {
    /// omega1 cos(wt) along the axis; splits into the two circular halves.
    Linear,
    /// Co-rotating for eta > 0 transitions.
    RightHanded,
    /// Co-rotating for eta < 0 transitions.
    LeftHanded,
}

/// One microwave pulse: amplitude and carrier are angular frequencies.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PulseSpec {
    pub amplitude: f64,
    pub carrier: f64,
    pub axis: DriveAxis,
    pub polarization: Polarization,
    pub duration: f64,
    pub phase: f64,
}

impl PulseSpec {
    pub fn linear_x(amplitude: f64, carrier: f64, duration: f64) -> Self {
        Self {
            amplitude,
            carrier,
            axis: DriveAxis::X,
            polarization: Polarization::Linear,
            duration,
            phase: 0.0,
        }
    }

    /// Scalar envelopes (a, b) such that V(t) = a(t) S_x + b(t) S_y.
    pub fn envelopes(&self, t: f64) -> (f64, f64) {
        if t >= self.duration || self.amplitude == 0.0 {
            return (0.0, 0.0);
        }
        let arg = self.carrier * t + self.phase;
        let (c, s) = (arg.cos(), arg.sin());
        let w1 = self.amplitude;
        match (self.axis, self.polarization) {
            (DriveAxis::X, Polarization::Linear) => (w1 * c, 0.0),
            (DriveAxis::Y, Polarization::Linear) => (0.0, w1 * c),
            (DriveAxis::X, Polarization::RightHanded) => (w1 * c, w1 * s),
            (DriveAxis::Y, Polarization::RightHanded) => (w1 * s, w1 * c),
            (DriveAxis::X, Polarization::LeftHanded) => (w1 * c, -w1 * s),
            (DriveAxis::Y, Polarization::LeftHanded) => (-w1 * s, w1 * c),
        }
    }
}

/// The explicit drive operator V(t) in the product basis.
pub fn drive_operator(system: &SpinSystem, pulse: &PulseSpec, t: f64) -> DMatrix<Complex64> {
    let basis = system.basis();
    let (a, b) = pulse.envelopes(t);
    crate::operators::to_complex(&basis.s_x()) * Complex64::from(a)
        + basis.s_y() * Complex64::from(b)
}

/// Recorded time evolution in the labelled eigenbasis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// State vector per record time, components ordered by label.
    pub states: Vec<Vec<Complex64>>,
    /// Populations per record time, one entry per label.
    pub populations: Vec<Vec<f64>>,
    /// Worst sampled local integration error.
    pub worst_local_error: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> DVector<Complex64> {
        DVector::from_vec(self.states.last().expect("non-empty").clone())
    }

    /// Population of a 1-based label over time.
    pub fn population_of(&self, label: usize) -> Vec<f64> {
        self.populations.iter().map(|p| p[label - 1]).collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PropagateOptions {
    /// Integration steps per period of the fastest frequency present.
    pub steps_per_period: f64,
    /// Bound on the sampled per-step local error.
    pub local_error_tol: f64,
    /// A step is re-done with two half steps every this many steps to
    /// estimate the local error.
    pub error_check_stride: usize,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        Self {
            steps_per_period: 768.0,
            local_error_tol: 1e-9,
            error_check_stride: 64,
        }
    }
}

struct Rk4Workspace {
    k1: DVector<Complex64>,
    k2: DVector<Complex64>,
    k3: DVector<Complex64>,
    k4: DVector<Complex64>,
    stage: DVector<Complex64>,
    scratch: DVector<Complex64>,
}

impl Rk4Workspace {
    fn new(d: usize) -> Self {
        Self {
            k1: DVector::zeros(d),
            k2: DVector::zeros(d),
            k3: DVector::zeros(d),
            k4: DVector::zeros(d),
            stage: DVector::zeros(d),
            scratch: DVector::zeros(d),
        }
    }
}

/// Integrates the driven Schroedinger equation. `initial` is expressed in
/// the labelled eigenbasis and must be normalized; record times in `t_grid`
/// must be non-negative and strictly increasing.
pub fn propagate(
    system: &SpinSystem,
    b_tesla: f64,
    pulse: &PulseSpec,
    initial: &DVector<Complex64>,
    t_grid: &[f64],
) -> Result<Trajectory, DriveError> {
    propagate_with(
        system,
        b_tesla,
        pulse,
        initial,
        t_grid,
        &PropagateOptions::default(),
    )
}

pub fn propagate_with(
    system: &SpinSystem,
    b_tesla: f64,
    pulse: &PulseSpec,
    initial: &DVector<Complex64>,
    t_grid: &[f64],
    opts: &PropagateOptions,
) -> Result<Trajectory, DriveError> {
    if pulse.amplitude < 0.0 || pulse.duration < 0.0 {
        return Err(DriveError::BadPulse);
    }
    if t_grid.is_empty() || t_grid[0] < 0.0 || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DriveError::BadTimeGrid);
    }
    let d = system.dim();
    if initial.len() != d {
        return Err(DriveError::BadInitialState(f64::INFINITY));
    }
    let norm0 = initial.norm();
    if (norm0 - 1.0).abs() > 1e-9 {
        return Err(DriveError::BadInitialState((norm0 - 1.0).abs()));
    }

    let levels = system.eigensystem(b_tesla)?;
    let vmat = crate::operators::to_complex(&system.eigenvector_matrix(&levels));
    let h0 = crate::operators::to_complex(&system.full_hamiltonian(b_tesla)?);
    let basis = system.basis();
    let sx = crate::operators::to_complex(&basis.s_x());
    let sy = basis.s_y();

    // fastest angular frequency governs the step
    let e_max = levels.iter().map(|l| l.energy.abs()).fold(0.0, f64::max);
    let omega_max = e_max.max(pulse.carrier.abs()) + pulse.amplitude;
    let t_end = *t_grid.last().unwrap();
    let h_max = if omega_max > 0.0 {
        std::f64::consts::TAU / omega_max / opts.steps_per_period
    } else {
        t_end.max(1e-12)
    };

    let one = Complex64::from(1.0);
    let zero = Complex64::from(0.0);
    let minus_i = Complex64::new(0.0, -1.0);
    let derivative = |t: f64,
                      state: &DVector<Complex64>,
                      out: &mut DVector<Complex64>,
                      work: &mut DVector<Complex64>| {
        let (a, b) = pulse.envelopes(t);
        out.gemv(one, &h0, state, zero);
        if a != 0.0 {
            work.gemv(one, &sx, state, zero);
            out.axpy(Complex64::from(a), work, one);
        }
        if b != 0.0 {
            work.gemv(one, &sy, state, zero);
            out.axpy(Complex64::from(b), work, one);
        }
        *out *= minus_i;
    };
    let rk4_step = |t: f64, h: f64, state: &DVector<Complex64>, ws: &mut Rk4Workspace| {
        derivative(t, state, &mut ws.k1, &mut ws.scratch);
        ws.stage.copy_from(state);
        ws.stage.axpy(Complex64::from(0.5 * h), &ws.k1, one);
        derivative(t + 0.5 * h, &ws.stage, &mut ws.k2, &mut ws.scratch);
        ws.stage.copy_from(state);
        ws.stage.axpy(Complex64::from(0.5 * h), &ws.k2, one);
        derivative(t + 0.5 * h, &ws.stage, &mut ws.k3, &mut ws.scratch);
        ws.stage.copy_from(state);
        ws.stage.axpy(Complex64::from(h), &ws.k3, one);
        derivative(t + h, &ws.stage, &mut ws.k4, &mut ws.scratch);
        let mut next = state.clone();
        next.axpy(Complex64::from(h / 6.0), &ws.k1, one);
        next.axpy(Complex64::from(h / 3.0), &ws.k2, one);
        next.axpy(Complex64::from(h / 3.0), &ws.k3, one);
        next.axpy(Complex64::from(h / 6.0), &ws.k4, one);
        next
    };

    // event times: record points plus the drive cutoff, so no step
    // integrates across the envelope discontinuity
    let mut events: Vec<f64> = t_grid.to_vec();
    if pulse.duration > 0.0 && pulse.duration < t_end {
        events.push(pulse.duration);
        events.sort_by(|a, b| a.partial_cmp(b).unwrap());
        events.dedup();
    }

    let mut psi: DVector<Complex64> = &vmat * initial;
    let mut ws = Rk4Workspace::new(d);
    let mut times = Vec::with_capacity(t_grid.len());
    let mut states = Vec::with_capacity(t_grid.len());
    let mut populations = Vec::with_capacity(t_grid.len());
    let mut worst_local_error: f64 = 0.0;
    let mut step_counter: usize = 0;

    let record = |t: f64,
                  psi: &DVector<Complex64>,
                  times: &mut Vec<f64>,
                  states: &mut Vec<Vec<Complex64>>,
                  populations: &mut Vec<Vec<f64>>| {
        let psi_eig = vmat.adjoint() * psi;
        populations.push(psi_eig.iter().map(|z| z.norm_sqr()).collect());
        states.push(psi_eig.iter().cloned().collect());
        times.push(t);
    };

    let mut t_now = 0.0;
    let mut grid_idx = 0;
    while grid_idx < t_grid.len() && t_grid[grid_idx] == 0.0 {
        record(0.0, &psi, &mut times, &mut states, &mut populations);
        grid_idx += 1;
    }

    for &t_event in &events {
        if t_event <= t_now {
            continue;
        }
        let span = t_event - t_now;
        let n_steps = (span / h_max).ceil().max(1.0) as usize;
        let h = span / n_steps as f64;
        for k in 0..n_steps {
            let t_step = t_now + h * k as f64;
            let check =
                opts.error_check_stride > 0 && step_counter.is_multiple_of(opts.error_check_stride);
            let next = rk4_step(t_step, h, &psi, &mut ws);
            if check {
                let mid = rk4_step(t_step, 0.5 * h, &psi, &mut ws);
                let fine = rk4_step(t_step + 0.5 * h, 0.5 * h, &mid, &mut ws);
                let err = (&next - &fine).norm();
                worst_local_error = worst_local_error.max(err);
                if err > opts.local_error_tol {
                    return Err(DriveError::StepSizeFailure {
                        worst: worst_local_error,
                        tol: opts.local_error_tol,
                    });
                }
                psi = fine;
            } else {
                psi = next;
            }
            step_counter += 1;
        }
        t_now = t_event;
        while grid_idx < t_grid.len() && t_grid[grid_idx] <= t_now {
            record(
                t_grid[grid_idx],
                &psi,
                &mut times,
                &mut states,
                &mut populations,
            );
            grid_idx += 1;
        }
    }

    let drift = (psi.norm() - 1.0).abs();
    if drift > 1e-8 {
        return Err(DriveError::NormDrift(drift));
    }

    Ok(Trajectory {
        times,
        states,
        populations,
        worst_local_error,
    })
}

/// Signed mixing factor eta = 2 <upper| S_x |lower>, computed from the
/// assembled eigenvectors and the product-basis S_x matrix. This route is
/// independent of the block coefficient products used by the spectra module.
pub fn mixing_factor(
    system: &SpinSystem,
    b_tesla: f64,
    class: TransitionClass,
) -> Result<f64, DriveError> {
    let levels = system.eigensystem(b_tesla)?;
    let map = system.label_map()?;
    let ((bu, mu), (bl, ml)) = class.upper_lower();
    let upper = &levels[map
        .label_of(bu, mu)
        .ok_or(SpectraError::MissingTransition(class))?
        - 1];
    let lower = &levels[map
        .label_of(bl, ml)
        .ok_or(SpectraError::MissingTransition(class))?
        - 1];
    let d = system.dim();
    let sx = system.basis().s_x();
    let vu = upper.state_vector(d);
    let vl = lower.state_vector(d);
    Ok(2.0 * (vu.transpose() * sx * vl)[(0, 0)])
}

/// Effective two-level generator of one near-resonant transition in the
/// rotating frame.
#[derive(Clone, Copy, Debug)]
pub struct TwoLevelModel {
    /// Energy splitting of the pair (rad/s).
    pub omega0: f64,
    /// Signed mixing factor of the transition.
    pub eta: f64,
    /// Population-oscillation angular frequency at resonance.
    pub rabi_rate: f64,
    /// carrier - omega0.
    pub detuning: f64,
    /// Duration of a resonant pi rotation; 2 pi / (omega1 |eta|) for a
    /// linear drive.
    pub pi_time: f64,
    /// Set when omega1 exceeds a tenth of the splitting and the
    /// rotating-wave reduction becomes unreliable.
    pub rwa_warning: bool,
    axis: DriveAxis,
}

impl TwoLevelModel {
    /// Rotating-frame 2x2 propagator over time t, basis (|e>, |g>).
    pub fn unitary(&self, t: f64) -> DMatrix<Complex64> {
        let g = self.rabi_rate;
        let delta = self.detuning;
        // H = -(delta/2) sigma_z + (g/2) sigma_{x|y}
        let mut h = DMatrix::<Complex64>::zeros(2, 2);
        h[(0, 0)] = Complex64::from(-0.5 * delta);
        h[(1, 1)] = Complex64::from(0.5 * delta);
        match self.axis {
            DriveAxis::X => {
                h[(0, 1)] = Complex64::from(0.5 * g);
                h[(1, 0)] = Complex64::from(0.5 * g);
            }
            DriveAxis::Y => {
                h[(0, 1)] = Complex64::new(0.0, -0.5 * g);
                h[(1, 0)] = Complex64::new(0.0, 0.5 * g);
            }
        }
        linalg::expm(&(h * Complex64::new(0.0, -t))).expect("2x2 exponential")
    }

    /// Population transferred from |g> to |e> after time t.
    pub fn population_transfer(&self, t: f64) -> f64 {
        let g2 = self.rabi_rate * self.rabi_rate;
        let omega_gen_sq = g2 + self.detuning * self.detuning;
        if omega_gen_sq == 0.0 {
            return 0.0;
        }
        (g2 / omega_gen_sq) * (0.5 * omega_gen_sq.sqrt() * t).sin().powi(2)
    }
}

/// Reduces one transition driven by `pulse` to its rotating-frame two-level
/// model. Degenerate pairs are refused.
pub fn reduce_two_level(
    system: &SpinSystem,
    b_tesla: f64,
    class: TransitionClass,
    pulse: &PulseSpec,
) -> Result<TwoLevelModel, DriveError> {
    let omega0 = class.frequency(system, b_tesla)?;
    if omega0.abs() < 1e-9 * system.hyperfine() {
        return Err(DriveError::DegenerateTransition(omega0));
    }
    let eta = mixing_factor(system, b_tesla, class)?;
    let co_rotating = match pulse.polarization {
        Polarization::Linear => 0.5,
        Polarization::RightHanded => {
            if eta > 0.0 {
                1.0
            } else {
                0.0
            }
        }
        Polarization::LeftHanded => {
            if eta < 0.0 {
                1.0
            } else {
                0.0
            }
        }
    };
    let rabi_rate = pulse.amplitude * eta.abs() * co_rotating;
    Ok(TwoLevelModel {
        omega0,
        eta,
        rabi_rate,
        detuning: pulse.carrier - omega0,
        pi_time: if rabi_rate > 0.0 {
            std::f64::consts::PI / rabi_rate
        } else {
            f64::INFINITY
        },
        rwa_warning: pulse.amplitude > omega0 / 10.0,
        axis: pulse.axis,
    })
}

/// A pulse engineered so one line of a near-degenerate pair accumulates an
/// odd multiple of pi while the other returns to its start.
#[derive(Clone, Debug)]
pub struct EqualizedPulse {
    pub pulse: PulseSpec,
    /// Rotation angle accumulated by the wanted line.
    pub wanted_angle: f64,
    /// Rotation angle accumulated by the unwanted line.
    pub unwanted_angle: f64,
    pub eta_ratio: f64,
}

/// Designs the equalized pulse: carrier midway between the two transition
/// frequencies, duration such that the wanted line rotates by p*pi (p odd)
/// while the unwanted line rotates by close to q*pi (q even). The requested
/// p/q must match the actual |eta| ratio to 5%.
pub fn design_equalized_pulse(
    system: &SpinSystem,
    b_tesla: f64,
    wanted: TransitionClass,
    unwanted: TransitionClass,
    rotation_ratio: (u32, u32),
    omega1: f64,
) -> Result<EqualizedPulse, DriveError> {
    let (p, q) = rotation_ratio;
    if p.is_multiple_of(2) || !q.is_multiple_of(2) || q == 0 {
        return Err(DriveError::RatioParity);
    }
    let eta_w = mixing_factor(system, b_tesla, wanted)?;
    let eta_u = mixing_factor(system, b_tesla, unwanted)?;
    let actual = (eta_w / eta_u).abs();
    let requested = f64::from(p) / f64::from(q);
    if (actual - requested).abs() > 0.05 * requested {
        return Err(DriveError::RatioMismatch { requested, actual });
    }
    let f_w = wanted.frequency(system, b_tesla)?;
    let f_u = unwanted.frequency(system, b_tesla)?;
    let carrier = 0.5 * (f_w + f_u);
    // linear drive: the rotation angle accumulates at omega1 |eta| / 2
    let duration = f64::from(p) * std::f64::consts::TAU / (omega1 * eta_w.abs());
    Ok(EqualizedPulse {
        pulse: PulseSpec {
            amplitude: omega1,
            carrier,
            axis: DriveAxis::X,
            polarization: Polarization::Linear,
            duration,
            phase: 0.0,
        },
        wanted_angle: f64::from(p) * std::f64::consts::PI,
        unwanted_angle: f64::from(p) * std::f64::consts::PI / actual,
        eta_ratio: actual,
    })
}

/// Removes the free phases exp(-i E_k t) from an eigenbasis state vector.
pub fn to_interaction_picture(
    levels: &[EigenLevel],
    t: f64,
    psi_eigenbasis: &DVector<Complex64>,
) -> DVector<Complex64> {
    DVector::from_fn(psi_eigenbasis.len(), |k, _| {
        Complex64::new(0.0, levels[k].energy * t).exp() * psi_eigenbasis[k]
    })
}

/// Pure-state fidelity |<a|b>| / (|a| |b|).
pub fn fidelity(a: &DVector<Complex64>, b: &DVector<Complex64>) -> f64 {
    let overlap: Complex64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    overlap.norm() / (a.norm() * b.norm()).max(f64::MIN_POSITIVE)
}

/// Unit vector on the given 1-based label.
pub fn basis_state(dim: usize, label: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(dim);
    v[label - 1] = Complex64::from(1.0);
    v
}
