//! One command per figure family: level diagrams, field-swept spectra,
//! resonance structure, pulse dynamics, decoherence runs/sweeps, and gate
//! verification. Every output is deterministic: identical config and
//! version give identical bytes.

use crate::config::{parse_state, parse_transition, Config};
use anyhow::{anyhow, bail, Context, Result};
use donorspin_core::drive::{self, DriveAxis, Polarization, PulseSpec};
use donorspin_core::gates;
use donorspin_core::io;
use donorspin_core::lindblad::{
    self, Adiabaticity, NoiseAxis, NoiseSpec, PairObservable, Picture, SuperpositionClass,
};
use donorspin_core::spectra::{self, LineShape, TransitionKind};
use donorspin_core::units::{angular_to_ghz, mhz_to_angular};
use donorspin_core::{HalfInt, SpinSystem};
use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;
use std::path::{Path, PathBuf};

fn out_path(base: &Path, name: &str) -> PathBuf {
    let p = PathBuf::from(name);
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    io::atomic_write(path, text.as_bytes())
        .with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_csv(path: &Path, header: &[&str], rows: Vec<Vec<f64>>) -> Result<()> {
    io::write_csv(path, header, rows).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Energy levels E(B) for all labels, in GHz, plus the avoided-crossing
/// report (field and minimum gap per block).
pub fn cmd_levels(cfg: &Config, out_dir: &Path) -> Result<()> {
    let sys = cfg.system()?;
    let grid = cfg.field_grid("levels")?;
    let csv = cfg.require_str("levels", "output_csv")?;
    let report = cfg.get_str("levels", "crossing_report_json");
    cfg.finish(&["system", "levels"])?;

    let d = sys.dim();
    let mut rows = Vec::with_capacity(grid.len());
    for &b in &grid {
        let levels = sys.eigensystem(b)?;
        let mut row = Vec::with_capacity(d + 1);
        row.push(b);
        row.extend(levels.iter().map(|l| angular_to_ghz(l.energy)));
        rows.push(row);
    }
    let mut header: Vec<String> = vec!["B_tesla".into()];
    header.extend((1..=d).map(|k| format!("E_{k}_ghz")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(&out_path(out_dir, &csv), &header_refs, rows)?;

    if let Some(name) = report {
        #[derive(Serialize)]
        struct Crossing {
            m: HalfInt,
            b_tesla: f64,
            min_gap_ghz: f64,
        }
        let crossings: Vec<Crossing> = spectra::cancellation_points(&sys)
            .into_iter()
            .filter(|p| p.kind == spectra::ResonanceKind::AvoidedCrossing)
            .map(|p| {
                let block = sys.block(p.m, p.b_tesla).expect("valid crossing");
                Crossing {
                    m: p.m,
                    b_tesla: p.b_tesla,
                    min_gap_ghz: angular_to_ghz(sys.hyperfine() * block.omega),
                }
            })
            .collect();
        write_json(&out_path(out_dir, &name), &crossings)?;
    }
    Ok(())
}

/// Field-swept CW spectrum at fixed microwave frequency.
pub fn cmd_spectrum(cfg: &Config, out_dir: &Path) -> Result<()> {
    let sys = cfg.system()?;
    let f_mw = cfg.require_f64("spectrum", "mw_frequency_ghz")?;
    let grid = cfg.field_grid("spectrum")?;
    let linewidth = cfg.require_f64("spectrum", "linewidth_mt")?;
    let shape = match cfg
        .get_str("spectrum", "shape")
        .unwrap_or_else(|| "absorption".into())
        .as_str()
    {
        "absorption" => LineShape::Absorption,
        "derivative" => LineShape::Derivative,
        other => bail!("[spectrum] shape `{other}`"),
    };
    let csv = cfg.require_str("spectrum", "output_csv")?;
    let json = cfg.get_str("spectrum", "output_json");
    cfg.finish(&["system", "spectrum"])?;

    let trace = spectra::cw_spectrum(&sys, f_mw, &grid, linewidth, shape)?;
    let rows = trace
        .field_grid
        .iter()
        .zip(&trace.amplitude)
        .map(|(&b, &a)| vec![b, a])
        .collect();
    write_csv(&out_path(out_dir, &csv), &["B_tesla", "amplitude"], rows)?;
    if let Some(name) = json {
        write_json(&out_path(out_dir, &name), &trace)?;
    }
    Ok(())
}

/// Cancellation resonances, df/dB working points, and (optionally) the line
/// positions at one microwave frequency.
pub fn cmd_resonances(cfg: &Config, out_dir: &Path) -> Result<()> {
    let sys = cfg.system()?;
    let json = cfg.require_str("resonances", "output_json")?;
    let mw = cfg.get_f64("resonances", "mw_frequency_ghz")?;
    let line_positions = match mw {
        Some(f) => {
            let start = cfg.require_f64("resonances", "field_start_tesla")?;
            let stop = cfg.require_f64("resonances", "field_stop_tesla")?;
            Some(spectra::resonance_fields(&sys, f, (start, stop), None)?)
        }
        None => None,
    };
    cfg.finish(&["system", "resonances"])?;

    let cancellations = spectra::cancellation_points(&sys);
    let mut extrema = Vec::new();
    for class in spectra::transition_classes(&sys) {
        if class.m.doubled() > 0 {
            continue;
        }
        extrema.extend(spectra::df_db_extrema(&sys, class)?);
    }

    #[derive(Serialize)]
    struct Report {
        cancellations: Vec<spectra::ResonancePoint>,
        extrema: Vec<spectra::ResonancePoint>,
        #[serde(skip_serializing_if = "Option::is_none")]
        line_positions: Option<spectra::SpectrumRoots>,
    }
    write_json(
        &out_path(out_dir, &json),
        &Report {
            cancellations,
            extrema,
            line_positions,
        },
    )
}

fn parse_axis(text: &str) -> Result<DriveAxis> {
    match text {
        "x" => Ok(DriveAxis::X),
        "y" => Ok(DriveAxis::Y),
        other => bail!("axis `{other}` (expected x or y)"),
    }
}

fn parse_polarization(text: &str) -> Result<Polarization> {
    match text {
        "linear" => Ok(Polarization::Linear),
        "rh" => Ok(Polarization::RightHanded),
        "lh" => Ok(Polarization::LeftHanded),
        other => bail!("polarization `{other}` (expected linear, rh, or lh)"),
    }
}

/// Time-domain pulse propagation; emits populations per label.
pub fn cmd_rabi(cfg: &Config, out_dir: &Path) -> Result<()> {
    let sys = cfg.system()?;
    let section = "rabi";
    let b = cfg.field(section, &sys)?;
    let amplitude = mhz_to_angular(cfg.require_f64(section, "amplitude_mhz")?);

    // carrier: explicit GHz, one resonant line, or midway between two lines
    let carrier_ghz = cfg.get_f64(section, "carrier_ghz")?;
    let carrier_line = cfg.get_str(section, "carrier_transition");
    let carrier_midway = cfg.get_str(section, "carrier_midway");
    let carrier = match (carrier_ghz, carrier_line, carrier_midway) {
        (Some(f), None, None) => donorspin_core::units::ghz_to_angular(f),
        (None, Some(spec), None) => parse_transition(&spec, &sys)?.frequency(&sys, b)?,
        (None, None, Some(pair)) => {
            let (a, c) = pair
                .split_once(',')
                .ok_or_else(|| anyhow!("carrier_midway needs two transitions"))?;
            let fa = parse_transition(a.trim(), &sys)?.frequency(&sys, b)?;
            let fc = parse_transition(c.trim(), &sys)?.frequency(&sys, b)?;
            0.5 * (fa + fc)
        }
        _ => bail!("[rabi]: give exactly one of carrier_ghz / carrier_transition / carrier_midway"),
    };

    let axis = parse_axis(&cfg.get_str(section, "axis").unwrap_or_else(|| "x".into()))?;
    let polarization = parse_polarization(
        &cfg.get_str(section, "polarization")
            .unwrap_or_else(|| "linear".into()),
    )?;
    let duration = cfg.require_f64(section, "duration_ns")? * 1e-9;
    let phase = cfg.get_f64(section, "phase_rad")?.unwrap_or(0.0);
    let points = cfg.require_usize(section, "time_points")?;
    if points < 2 {
        bail!("[rabi] time_points must be at least 2");
    }
    let state_spec = cfg.require_str(section, "initial_state")?;
    let csv = cfg.require_str(section, "output_csv")?;
    let json = cfg.get_str(section, "output_json");
    cfg.finish(&["system", section])?;

    let comps = parse_state(&state_spec, sys.dim())?;
    let mut init = DVector::<Complex64>::zeros(sys.dim());
    for (label, amp) in comps {
        init[label - 1] = Complex64::from(amp);
    }
    let norm = init.norm();
    if norm == 0.0 {
        bail!("[rabi] initial state has zero norm");
    }
    init /= Complex64::from(norm);

    let pulse = PulseSpec {
        amplitude,
        carrier,
        axis,
        polarization,
        duration,
        phase,
    };
    let grid: Vec<f64> = (0..points)
        .map(|k| duration * k as f64 / (points - 1) as f64)
        .collect();
    let traj = drive::propagate(&sys, b, &pulse, &init, &grid)?;

    let d = sys.dim();
    let rows: Vec<Vec<f64>> = traj
        .times
        .iter()
        .zip(&traj.populations)
        .map(|(&t, pops)| {
            let mut row = Vec::with_capacity(d + 1);
            row.push(t);
            row.extend(pops.iter().copied());
            row
        })
        .collect();
    let mut header: Vec<String> = vec!["t_seconds".into()];
    header.extend((1..=d).map(|k| format!("p_{k}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(&out_path(out_dir, &csv), &header_refs, rows)?;
    if let Some(name) = json {
        write_json(&out_path(out_dir, &name), &traj)?;
    }
    Ok(())
}

fn parse_superposition_class(text: &str) -> Result<SuperpositionClass> {
    let (kind, m) = text
        .split_once(':')
        .ok_or_else(|| anyhow!("class `{text}` is not kind:m"))?;
    let m = HalfInt::parse(m.trim()).ok_or_else(|| anyhow!("bad m in `{text}`"))?;
    Ok(match kind.trim() {
        "cross" => SuperpositionClass::CrossBranch { m },
        "same" => SuperpositionClass::SameBranch { m },
        "uncoupled-same" => SuperpositionClass::UncoupledSameBranch { m },
        "uncoupled-opposite" => SuperpositionClass::UncoupledOppositeBranch { m },
        other => bail!("unknown superposition class `{other}`"),
    })
}

fn noise_from_config(cfg: &Config, section: &str) -> Result<(NoiseSpec, f64)> {
    let axis = match cfg
        .get_str(section, "noise_axis")
        .unwrap_or_else(|| "z".into())
        .as_str()
    {
        "x" => NoiseAxis::X,
        "y" => NoiseAxis::Y,
        "z" => NoiseAxis::Z,
        other => bail!("[{section}] noise_axis `{other}`"),
    };
    // alpha^2 as a rate: either directly per millisecond, or through the
    // (2 pi MHz)^2 tag (value x (2 pi 1e6)^2 x 1 s, documented in the README)
    let per_ms = cfg.get_f64(section, "alpha_sq_per_ms")?;
    let mhz2 = cfg.get_f64(section, "alpha_sq_mhz2")?;
    let variance = match (per_ms, mhz2) {
        (Some(v), None) => v * 1e3,
        (None, Some(v)) => v * (std::f64::consts::TAU * 1e6).powi(2),
        (None, None) => bail!("[{section}]: needs alpha_sq_per_ms or alpha_sq_mhz2"),
        _ => bail!("[{section}]: give only one alpha_sq unit"),
    };
    let adiabaticity = match cfg
        .get_str(section, "adiabaticity")
        .unwrap_or_else(|| "diabatic".into())
        .as_str()
    {
        "diabatic" => Adiabaticity::Diabatic,
        "adiabatic" => Adiabaticity::Adiabatic,
        "finite" => Adiabaticity::Finite(cfg.require_f64(section, "f_s2")?),
        other => bail!("[{section}] adiabaticity `{other}`"),
    };
    Ok((
        NoiseSpec {
            axis,
            variance,
            adiabaticity,
        },
        variance,
    ))
}

/// Decoherence runs and sweeps.
pub fn cmd_lindblad(cfg: &Config, out_dir: &Path) -> Result<()> {
    let sys = cfg.system()?;
    let section = "lindblad";
    let mode = cfg.require_str(section, "mode")?;
    match mode.as_str() {
        "evolve" => lindblad_evolve(cfg, &sys, out_dir),
        "t2-sweep" => lindblad_t2_sweep(cfg, &sys, out_dir),
        "t1-sweep" => lindblad_t1_sweep(cfg, &sys, out_dir),
        "rates" => lindblad_rates(cfg, &sys, out_dir),
        other => bail!("[lindblad] mode `{other}`"),
    }
}

fn lindblad_evolve(cfg: &Config, sys: &SpinSystem, out_dir: &Path) -> Result<()> {
    let section = "lindblad";
    let b = cfg.field(section, sys)?;
    let (noise, alpha_sq) = noise_from_config(cfg, section)?;
    let picture = match cfg
        .get_str(section, "picture")
        .unwrap_or_else(|| "interaction".into())
        .as_str()
    {
        "interaction" => Picture::Interaction,
        "schroedinger" => Picture::Schroedinger,
        other => bail!("[lindblad] picture `{other}`"),
    };
    let state_spec = cfg.require_str(section, "initial_state")?;
    let span = cfg.require_f64(section, "duration_inv_alpha_sq")? / alpha_sq;
    let points = cfg.require_usize(section, "time_points")?.max(2);
    let pops_csv = cfg.require_str(section, "populations_csv")?;
    let pair = cfg.get_str(section, "observable_pair");
    let observable_csv = cfg.get_str(section, "observable_csv");
    let fit_json = cfg.get_str(section, "fit_json");
    let fit_model = cfg.get_str(section, "fit_model");
    let spectrum_json = cfg.get_str(section, "spectrum_json");
    cfg.finish(&["system", section])?;

    let li = lindblad::build_generator(sys, b, &[noise], picture)?;
    let comps: Vec<(usize, Complex64)> = parse_state(&state_spec, sys.dim())?
        .into_iter()
        .map(|(l, a)| (l, Complex64::from(a)))
        .collect();
    let rho0 = lindblad::density_from_amplitudes(sys.dim(), &comps);
    let grid: Vec<f64> = (0..points)
        .map(|k| span * k as f64 / (points - 1) as f64)
        .collect();
    let states = lindblad::evolve_master(&li, &rho0, &grid)?;

    let d = sys.dim();
    let rows: Vec<Vec<f64>> = grid
        .iter()
        .zip(&states)
        .map(|(&t, rho)| {
            let mut row = Vec::with_capacity(d + 1);
            row.push(t);
            row.extend((0..d).map(|k| rho[(k, k)].re));
            row
        })
        .collect();
    let mut header: Vec<String> = vec!["t_seconds".into()];
    header.extend((1..=d).map(|k| format!("p_{k}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(&out_path(out_dir, &pops_csv), &header_refs, rows)?;

    if let Some(pair_spec) = pair {
        let (e, g) = pair_spec
            .split_once(',')
            .ok_or_else(|| anyhow!("observable_pair needs two labels"))?;
        let e: usize = e.trim().parse().context("observable label")?;
        let g: usize = g.trim().parse().context("observable label")?;
        let rows: Vec<Vec<f64>> = grid
            .iter()
            .zip(&states)
            .map(|(&t, rho)| {
                vec![
                    t,
                    lindblad::pair_coherence(rho, e, g),
                    lindblad::pair_polarization(rho, e, g),
                ]
            })
            .collect();
        if let Some(name) = &observable_csv {
            write_csv(
                &out_path(out_dir, name),
                &["t_seconds", "coherence", "polarization"],
                rows,
            )?;
        }
        if let Some(name) = fit_json {
            let model = match fit_model.as_deref() {
                Some("double") => donorspin_core::fit::DecayModel::DoubleExponential,
                _ => donorspin_core::fit::DecayModel::SingleExponential,
            };
            let (coh_fit, _, _) = lindblad::fit_pair_decay(
                &li,
                &rho0,
                e,
                g,
                PairObservable::Coherence,
                model,
                alpha_sq,
            )?;
            let (pol_fit, _, _) = lindblad::fit_pair_decay(
                &li,
                &rho0,
                e,
                g,
                PairObservable::Polarization,
                model,
                alpha_sq,
            )?;
            #[derive(Serialize)]
            struct FitReport {
                pair: (usize, usize),
                coherence: donorspin_core::fit::DecayFit,
                polarization: donorspin_core::fit::DecayFit,
            }
            write_json(
                &out_path(out_dir, &name),
                &FitReport {
                    pair: (e, g),
                    coherence: coh_fit,
                    polarization: pol_fit,
                },
            )?;
        }
    } else if observable_csv.is_some() || fit_json.is_some() {
        bail!("[lindblad] observable outputs need observable_pair");
    }

    if let Some(name) = spectrum_json {
        let spectrum = lindblad::liouvillian_spectrum(&li)?;
        #[derive(Serialize)]
        struct SpectrumReport {
            eigenvalues: Vec<(f64, f64)>,
            steady_states: Vec<usize>,
        }
        write_json(
            &out_path(out_dir, &name),
            &SpectrumReport {
                eigenvalues: spectrum.eigenvalues.iter().map(|l| (l.re, l.im)).collect(),
                steady_states: spectrum.steady_states.clone(),
            },
        )?;
    }
    Ok(())
}

fn sweep_class_of(class_text: &str, sys: &SpinSystem) -> Result<SuperpositionClass> {
    // a transition spec maps onto the matching superposition family
    if let Ok(t) = parse_transition(class_text, sys) {
        return Ok(match t.kind {
            TransitionKind::DipoleAllowed => SuperpositionClass::CrossBranch { m: t.m },
            TransitionKind::PlusForbidden | TransitionKind::MinusForbidden => {
                SuperpositionClass::SameBranch { m: t.m }
            }
        });
    }
    parse_superposition_class(class_text)
}

fn lindblad_t2_sweep(cfg: &Config, sys: &SpinSystem, out_dir: &Path) -> Result<()> {
    let section = "lindblad";
    let grid = cfg.field_grid(section)?;
    let (noise, alpha_sq) = noise_from_config(cfg, section)?;
    if noise.axis != NoiseAxis::Z {
        bail!("[lindblad] t2-sweep covers Z noise (X noise is not block-confined)");
    }
    let classes_text = cfg.require_str(section, "classes")?;
    let csv = cfg.require_str(section, "sweep_csv")?;
    cfg.finish(&["system", section])?;

    let classes: Vec<SuperpositionClass> = classes_text
        .split(';')
        .map(|t| sweep_class_of(t.trim(), sys))
        .collect::<Result<_>>()?;
    let points = lindblad::z_noise_t2_sweep(sys, &classes, &grid, alpha_sq, noise.adiabaticity)?;
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| {
            vec![
                io::fmt_f64(p.b_tesla),
                format!("{:?}", p.class).replace(' ', ""),
                io::fmt_f64(p.time_seconds),
                io::fmt_f64(p.time_seconds * alpha_sq / 2.0),
            ]
        })
        .collect();
    io::write_csv_records(
        &out_path(out_dir, &csv),
        &[
            "B_tesla",
            "transition",
            "T2_seconds",
            "T2_in_units_2_over_alpha_sq",
        ],
        &rows,
    )?;
    println!("wrote {}", out_path(out_dir, &csv).display());
    Ok(())
}

fn lindblad_t1_sweep(cfg: &Config, sys: &SpinSystem, out_dir: &Path) -> Result<()> {
    let section = "lindblad";
    let grid = cfg.field_grid(section)?;
    let (noise, alpha_sq) = noise_from_config(cfg, section)?;
    if noise.axis != NoiseAxis::Z || noise.adiabaticity != Adiabaticity::Diabatic {
        bail!("[lindblad] t1-sweep is defined for diabatic Z noise");
    }
    let m_text = cfg.require_str(section, "m_values")?;
    let csv = cfg.require_str(section, "sweep_csv")?;
    cfg.finish(&["system", section])?;

    let m_values: Vec<HalfInt> = m_text
        .split(',')
        .map(|t| HalfInt::parse(t.trim()).ok_or_else(|| anyhow!("bad m `{t}`")))
        .collect::<Result<_>>()?;
    let points = lindblad::z_noise_t1_sweep(sys, &m_values, &grid, alpha_sq)?;
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|(b, m, t1, _res)| {
            vec![
                io::fmt_f64(*b),
                format!("{m}"),
                io::fmt_f64(*t1),
                io::fmt_f64(*t1 * alpha_sq / 2.0),
            ]
        })
        .collect();
    io::write_csv_records(
        &out_path(out_dir, &csv),
        &["B_tesla", "m", "T1_seconds", "T1_in_units_2_over_alpha_sq"],
        &rows,
    )?;
    println!("wrote {}", out_path(out_dir, &csv).display());
    Ok(())
}

fn lindblad_rates(cfg: &Config, sys: &SpinSystem, out_dir: &Path) -> Result<()> {
    let section = "lindblad";
    let grid = cfg.field_grid(section)?;
    let (noise, alpha_sq) = noise_from_config(cfg, section)?;
    let limit = match noise.adiabaticity {
        Adiabaticity::Diabatic => lindblad::ZNoiseLimit::Diabatic,
        Adiabaticity::Adiabatic => lindblad::ZNoiseLimit::Adiabatic,
        Adiabaticity::Finite(_) => {
            bail!("[lindblad] rates mode covers the adiabatic and diabatic limits")
        }
    };
    let class = parse_superposition_class(&cfg.require_str(section, "class")?)?;
    let csv = cfg.require_str(section, "rates_csv")?;
    cfg.finish(&["system", section])?;

    let mut rows = Vec::with_capacity(grid.len());
    for &b in &grid {
        let rates = lindblad::analytic_rates(sys, b, alpha_sq, class, limit)?;
        rows.push(vec![
            b,
            rates.dephasing,
            rates.depolarization_first,
            rates.depolarization_second,
        ]);
    }
    write_csv(
        &out_path(out_dir, &csv),
        &[
            "B_tesla",
            "dephasing_rate",
            "depol_rate_first",
            "depol_rate_second",
        ],
        rows,
    )
}

/// Exact verification of the gate-sequence identities.
pub fn cmd_gates(cfg: &Config, out_dir: &Path) -> Result<()> {
    let json = cfg.require_str("gates", "output_json")?;
    // the [system] section is optional here: sequence algebra is
    // system-independent
    if cfg.has_section("system") {
        cfg.system()?;
    }
    cfg.finish(&["system", "gates"])?;

    #[derive(Serialize)]
    struct SequenceReport {
        name: String,
        factors: Vec<gates::GateFactor>,
        qubits: usize,
        fidelity: f64,
        max_norm_error: f64,
        global_phase: f64,
        unitarity_error: f64,
        pass: bool,
    }
    let reports: Vec<SequenceReport> = gates::standard_sequences()
        .into_iter()
        .map(|seq| {
            let v = gates::verify_sequence(&seq);
            SequenceReport {
                name: seq.name.clone(),
                factors: seq.factors.clone(),
                qubits: seq.qubits,
                fidelity: v.fidelity,
                max_norm_error: v.max_norm_error,
                global_phase: v.global_phase,
                unitarity_error: v.unitarity_error,
                pass: v.max_norm_error < 1e-12,
            }
        })
        .collect();
    let all_pass = reports.iter().all(|r| r.pass);
    write_json(&out_path(out_dir, &json), &reports)?;
    for r in &reports {
        println!(
            "{}: {} (max-norm error {:.3e})",
            r.name,
            if r.pass { "pass" } else { "FAIL" },
            r.max_norm_error
        );
    }
    if !all_pass {
        bail!("gate verification failed");
    }
    Ok(())
}
