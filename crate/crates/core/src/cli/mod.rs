//! Experiment orchestration: parse a config file, run the experiment, write
//! CSV/SVG outputs, and return a one-line summary.

pub mod config;
pub mod csv;
pub mod svg;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::analysis::{detect_crossing, find_peak, fit_power_law};
use crate::circuit::{run_ensemble, CircuitConfig};
use crate::error::{Error, Result};
use crate::gates::RngStream;
use crate::hamiltonian::{
    late_time_value, quench_series, HamiltonianParams, QuenchSetup, SpectralDecomposition,
};
use crate::qstate::{InitialStatePattern, SubsystemMask};
use crate::series::{Observable, TimeSeries};
use config::{ExperimentConfig, ExperimentKind, Overrides, Theta};
use svg::SvgSeries;

/// Run the experiment described by the config file. Returns the summary line
/// for stdout.
pub fn run_config_file(path: &Path, overrides: &Overrides) -> Result<String> {
    let text = std::fs::read_to_string(path)?;
    run_config_text(&text, overrides)
}

pub fn run_config_text(text: &str, overrides: &Overrides) -> Result<String> {
    let cfg = config::parse_config(text, overrides)?;
    match cfg.experiment {
        ExperimentKind::CircuitEa | ExperimentKind::CircuitCv => run_circuit(&cfg),
        ExperimentKind::HamQuench | ExperimentKind::ChargeDist => run_quench(&cfg),
        ExperimentKind::PeakFit => run_peak_fit(&cfg),
        ExperimentKind::Crossing => run_crossing(&cfg),
        ExperimentKind::LateTime => run_latetime(&cfg),
    }
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect()
}

fn pattern_of(cfg: &ExperimentConfig, theta: &Theta) -> Result<InitialStatePattern> {
    InitialStatePattern::new(cfg.pattern, theta.radians)
}

fn subsystem_of(cfg: &ExperimentConfig) -> Result<SubsystemMask> {
    SubsystemMask::new(cfg.subsystem_start, cfg.subsystem_length)
}

fn circuit_config_of(cfg: &ExperimentConfig) -> Result<CircuitConfig> {
    Ok(CircuitConfig {
        num_sites: cfg.num_sites,
        p_haar: cfg.p_haar,
        steps: cfg.steps,
        realizations: cfg.realizations,
        seed: cfg.seed,
        subsystem: subsystem_of(cfg)?,
        renyi_n: cfg.renyi_n,
        doping: cfg.doping,
        u1_phases: cfg.u1_phases,
    })
}

fn ham_params_of(cfg: &ExperimentConfig) -> HamiltonianParams {
    HamiltonianParams {
        gamma: cfg.gamma,
        delta: cfg.delta,
        j2: cfg.j2,
        delta2: cfg.delta2,
        num_sites: cfg.num_sites,
        boundary: cfg.boundary,
    }
}

/// The observable whose per-theta curves drive the summary line.
fn summary_key(cfg: &ExperimentConfig) -> String {
    let preferred = match cfg.experiment {
        ExperimentKind::CircuitCv => Observable::ChargeVariance,
        _ => Observable::EaU1,
    };
    if cfg.observables.contains(&preferred) {
        match preferred {
            Observable::ChargeVariance => "cv".into(),
            _ => "ea_u1".into(),
        }
    } else if cfg.observables.contains(&Observable::ChargeVariance) {
        "cv".into()
    } else {
        "ea_u1".into()
    }
}

fn crossing_summary(
    name: &str,
    by_theta: &[(Theta, BTreeMap<String, TimeSeries>)],
    key: &str,
    persistence: usize,
) -> String {
    if by_theta.len() < 2 {
        let (theta, series) = &by_theta[0];
        return match find_peak(&series[key]) {
            Ok((t, v)) => {
                format!("{name} {key} theta {}: peak t={t} value={v:.6}", theta.label)
            }
            Err(e) => format!("{name} {key}: {e}"),
        };
    }
    // order the extreme-theta pair by initial value
    let first = &by_theta[0];
    let last = &by_theta[by_theta.len() - 1];
    let (s1, s2, l1, l2) = if first.1[key].mean[0] >= last.1[key].mean[0] {
        (&first.1[key], &last.1[key], &first.0.label, &last.0.label)
    } else {
        (&last.1[key], &first.1[key], &last.0.label, &first.0.label)
    };
    match detect_crossing(s1, s2, persistence) {
        Ok(report) => format!(
            "{name} {key}: crossed={} t_qme={} significance={:.3} flips={} (theta {l1} vs {l2})",
            report.crossed,
            report.t_qme.map_or("none".into(), |t| format!("{t}")),
            report.significance,
            report.flip_count,
        ),
        Err(e) => format!("{name} {key}: crossing n/a ({e})"),
    }
}

fn emit_series_files(
    cfg: &ExperimentConfig,
    by_theta: &[(Theta, BTreeMap<String, TimeSeries>)],
) -> Result<()> {
    for (theta, series) in by_theta {
        for (key, ts) in series {
            let file = cfg
                .output_dir
                .join(format!("{key}_theta{}.csv", sanitize(&theta.label)));
            csv::emit_csv(ts, &file)?;
        }
    }
    Ok(())
}

fn emit_overlay_svg(
    cfg: &ExperimentConfig,
    by_theta: &[(Theta, BTreeMap<String, TimeSeries>)],
    key: &str,
) -> Result<()> {
    if !cfg.emit_svg {
        return Ok(());
    }
    let series: Vec<SvgSeries> = by_theta
        .iter()
        .map(|(theta, map)| SvgSeries {
            label: format!("theta = {}", theta.label),
            times: map[key].times.clone(),
            values: map[key].mean.clone(),
        })
        .collect();
    let path = cfg.output_dir.join(format!("{}.svg", cfg.experiment.name()));
    svg::emit_svg(&series, &path)
}

fn run_circuit(cfg: &ExperimentConfig) -> Result<String> {
    let circuit = circuit_config_of(cfg)?;
    let mut by_theta = Vec::new();
    for (idx, theta) in cfg.thetas.iter().enumerate() {
        eprintln!(
            "circuit ensemble theta={} [{}/{}], {} realizations",
            theta.label,
            idx + 1,
            cfg.thetas.len(),
            cfg.realizations
        );
        let pattern = pattern_of(cfg, theta)?;
        let series = run_ensemble(&circuit, &pattern, &cfg.observables)?;
        by_theta.push((theta.clone(), series));
    }
    emit_series_files(cfg, &by_theta)?;
    let key = summary_key(cfg);
    emit_overlay_svg(cfg, &by_theta, &key)?;
    Ok(crossing_summary(
        cfg.experiment.name(),
        &by_theta,
        &key,
        cfg.persistence,
    ))
}

fn time_grid(cfg: &ExperimentConfig) -> Vec<f64> {
    let n = (cfg.t_max / cfg.dt).round() as usize;
    (0..=n).map(|k| k as f64 * cfg.dt).collect()
}

fn run_quench(cfg: &ExperimentConfig) -> Result<String> {
    let params = ham_params_of(cfg);
    eprintln!(
        "diagonalizing {} sites (gamma={}, delta={}, j2={})",
        params.num_sites, params.gamma, params.delta, params.j2
    );
    let spectral = SpectralDecomposition::new(&params)?;
    let times = time_grid(cfg);
    let mut by_theta = Vec::new();
    for (idx, theta) in cfg.thetas.iter().enumerate() {
        eprintln!("quench theta={} [{}/{}]", theta.label, idx + 1, cfg.thetas.len());
        let setup = QuenchSetup {
            pattern: pattern_of(cfg, theta)?,
            subsystem: subsystem_of(cfg)?,
            renyi_n: cfg.renyi_n,
        };
        let series = quench_series(&spectral, &setup, &times, &cfg.observables)?;
        by_theta.push((theta.clone(), series));
    }
    emit_series_files(cfg, &by_theta)?;

    if cfg.experiment == ExperimentKind::ChargeDist {
        // summarize the final-time charge spread per theta
        let l = cfg.num_sites as i64;
        let mut parts = Vec::new();
        for (theta, series) in &by_theta {
            let mut m1 = 0.0;
            let mut m2 = 0.0;
            for k in 0..=l {
                let q = (2 * k - l) as f64;
                if let Some(ts) = series.get(&format!("pq{}", 2 * k - l)) {
                    let p = *ts.mean.last().unwrap();
                    m1 += q * p;
                    m2 += q * q * p;
                }
            }
            parts.push(format!("theta {}: cv(t_max)={:.6}", theta.label, m2 - m1 * m1));
        }
        if cfg.emit_svg {
            // final-time distribution over Q, one curve per theta
            let series: Vec<SvgSeries> = by_theta
                .iter()
                .map(|(theta, map)| {
                    let mut qs = Vec::new();
                    let mut ps = Vec::new();
                    for k in 0..=l {
                        let q = 2 * k - l;
                        if let Some(ts) = map.get(&format!("pq{q}")) {
                            qs.push(q as f64);
                            ps.push(*ts.mean.last().unwrap());
                        }
                    }
                    SvgSeries {
                        label: format!("theta = {}", theta.label),
                        times: qs,
                        values: ps,
                    }
                })
                .collect();
            svg::emit_svg(&series, &cfg.output_dir.join("charge_dist.svg"))?;
        }
        return Ok(format!("charge_dist: {}", parts.join("; ")));
    }

    let key = summary_key(cfg);
    emit_overlay_svg(cfg, &by_theta, &key)?;
    Ok(crossing_summary(
        cfg.experiment.name(),
        &by_theta,
        &key,
        cfg.persistence,
    ))
}

fn run_peak_fit(cfg: &ExperimentConfig) -> Result<String> {
    let theta = &cfg.thetas[0];
    let pattern = pattern_of(cfg, theta)?;
    let obs = std::collections::BTreeSet::from([Observable::EaU1]);
    let mut points = Vec::new();
    let mut peak_stderr = Vec::new();
    for (idx, &p) in cfg.p_haar_grid.iter().enumerate() {
        eprintln!(
            "peak scan p_haar={p} [{}/{}], {} realizations",
            idx + 1,
            cfg.p_haar_grid.len(),
            cfg.realizations
        );
        let mut circuit = circuit_config_of(cfg)?;
        circuit.p_haar = p;
        let series = run_ensemble(&circuit, &pattern, &obs)?;
        let ea = &series["ea_u1"];
        let (t_peak, v_peak) = find_peak(ea)?;
        let k = ea.times.iter().position(|&t| t == t_peak).unwrap();
        points.push((p, v_peak));
        peak_stderr.push(ea.stderr[k]);
    }
    let ts = TimeSeries {
        times: points.iter().map(|p| p.0).collect(),
        mean: points.iter().map(|p| p.1).collect(),
        stderr: peak_stderr,
        n_realizations: cfg.realizations,
    };
    csv::emit_csv(&ts, &cfg.output_dir.join("ea_peaks.csv"))?;
    if cfg.emit_svg {
        svg::emit_svg(
            &[SvgSeries {
                label: format!("EA peak, {}", cfg.pattern.name()),
                times: ts.times.clone(),
                values: ts.mean.clone(),
            }],
            &cfg.output_dir.join("peak_fit.svg"),
        )?;
    }
    let fit = fit_power_law(&points)?;
    Ok(format!(
        "peak_fit ea_u1 pattern={}: a={:.4} b={:.4} r_squared={:.4}",
        cfg.pattern.name(),
        fit.a,
        fit.b,
        fit.r_squared
    ))
}

fn run_crossing(cfg: &ExperimentConfig) -> Result<String> {
    let (p1, p2) = match (&cfg.csv1, &cfg.csv2) {
        (Some(a), Some(b)) => (a.clone(), b.clone()),
        _ => {
            return Err(Error::InvalidArgument(
                "crossing needs csv1 and csv2 paths".into(),
            ))
        }
    };
    let s1 = csv::read_csv(&p1)?;
    let s2 = csv::read_csv(&p2)?;
    // order by initial value for the caller
    let (a, b, swapped) = if s1.mean.first() >= s2.mean.first() {
        (&s1, &s2, false)
    } else {
        (&s2, &s1, true)
    };
    let report = detect_crossing(a, b, cfg.persistence)?;
    if cfg.emit_svg {
        let name = |p: &PathBuf| -> String {
            p.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned())
        };
        svg::emit_svg(
            &[
                SvgSeries { label: name(&p1), times: s1.times.clone(), values: s1.mean.clone() },
                SvgSeries { label: name(&p2), times: s2.times.clone(), values: s2.mean.clone() },
            ],
            &cfg.output_dir.join("crossing.svg"),
        )?;
    }
    let significant = report.crossed && report.significance >= cfg.min_significance;
    Ok(format!(
        "crossing: crossed={} t_qme={} significance={:.3} flips={} significant={}{}",
        report.crossed,
        report.t_qme.map_or("none".into(), |t| format!("{t}")),
        report.significance,
        report.flip_count,
        significant,
        if swapped { " (inputs reordered by initial value)" } else { "" },
    ))
}

fn run_latetime(cfg: &ExperimentConfig) -> Result<String> {
    let params = ham_params_of(cfg);
    eprintln!(
        "diagonalizing {} sites (gamma={}, delta={}, j2={})",
        params.num_sites, params.gamma, params.delta, params.j2
    );
    let spectral = SpectralDecomposition::new(&params)?;
    let mut values = Vec::new();
    for (idx, theta) in cfg.thetas.iter().enumerate() {
        eprintln!(
            "late-time average theta={} [{}/{}], {} samples",
            theta.label,
            idx + 1,
            cfg.thetas.len(),
            cfg.samples
        );
        let setup = QuenchSetup {
            pattern: pattern_of(cfg, theta)?,
            subsystem: subsystem_of(cfg)?,
            renyi_n: cfg.renyi_n,
        };
        let mut rng = RngStream::new(cfg.seed, idx as u64);
        let v = late_time_value(
            &spectral,
            &setup,
            cfg.observable,
            cfg.t1,
            cfg.t2,
            cfg.samples,
            &mut rng,
        )?;
        values.push(v);
    }
    let obs_name = match cfg.observable {
        Observable::EaU1 => "ea_u1",
        Observable::EaZ2 => "ea_z2",
        Observable::ChargeVariance => "cv",
        _ => "observable",
    };
    let ts = TimeSeries {
        times: cfg.thetas.iter().map(|t| t.radians).collect(),
        mean: values.clone(),
        stderr: vec![0.0; values.len()],
        n_realizations: 1,
    };
    csv::emit_csv(&ts, &cfg.output_dir.join(format!("latetime_{obs_name}.csv")))?;
    if cfg.emit_svg {
        svg::emit_svg(
            &[SvgSeries {
                label: format!("late-time {obs_name}"),
                times: ts.times.clone(),
                values: ts.mean.clone(),
            }],
            &cfg.output_dir.join("latetime.svg"),
        )?;
    }
    let trend = if values.windows(2).all(|w| w[1] > w[0]) {
        "strictly_increasing"
    } else if values.windows(2).all(|w| w[1] < w[0]) {
        "strictly_decreasing"
    } else {
        "non_monotonic"
    };
    let listing: Vec<String> = cfg
        .thetas
        .iter()
        .zip(&values)
        .map(|(t, v)| format!("{}={v:.6}", t.label))
        .collect();
    Ok(format!(
        "latetime {obs_name} gamma={}: trend={trend} {}",
        cfg.gamma,
        listing.join(" ")
    ))
}
