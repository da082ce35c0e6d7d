//! Flat `key = value` experiment configuration.
//!
//! One assignment per line, `#` starts a comment, unknown keys are rejected
//! with their line number. Angles accept a `pi` suffix (`0.2pi`) or plain
//! radians.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use crate::circuit::DopingMode;
use crate::error::{Error, Result};
use crate::gates::U1BlockPhases;
use crate::hamiltonian::Boundary;
use crate::qstate::PatternKind;
use crate::series::Observable;

/// Which experiment the config drives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    CircuitEa,
    CircuitCv,
    HamQuench,
    ChargeDist,
    PeakFit,
    Crossing,
    LateTime,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "circuit_ea" => Some(Self::CircuitEa),
            "circuit_cv" => Some(Self::CircuitCv),
            "ham_quench" => Some(Self::HamQuench),
            "charge_dist" => Some(Self::ChargeDist),
            "peak_fit" => Some(Self::PeakFit),
            "crossing" => Some(Self::Crossing),
            "latetime" => Some(Self::LateTime),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::CircuitEa => "circuit_ea",
            Self::CircuitCv => "circuit_cv",
            Self::HamQuench => "ham_quench",
            Self::ChargeDist => "charge_dist",
            Self::PeakFit => "peak_fit",
            Self::Crossing => "crossing",
            Self::LateTime => "latetime",
        }
    }
}

/// A tilt angle with the literal config token kept as a file-name label.
#[derive(Clone, Debug, PartialEq)]
pub struct Theta {
    pub radians: f64,
    pub label: String,
}

/// Fully resolved experiment configuration.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub output_dir: PathBuf,
    pub emit_svg: bool,

    pub num_sites: usize,
    pub seed: u64,
    pub realizations: usize,
    pub steps: usize,
    pub p_haar: f64,
    pub subsystem_start: usize,
    pub subsystem_length: usize,
    pub renyi_n: f64,
    pub doping: DopingMode,
    pub u1_phases: U1BlockPhases,
    pub observables: BTreeSet<Observable>,

    pub pattern: PatternKind,
    pub thetas: Vec<Theta>,

    pub gamma: f64,
    pub delta: f64,
    pub j2: f64,
    pub delta2: f64,
    pub boundary: Boundary,
    pub t_max: f64,
    pub dt: f64,

    pub t1: f64,
    pub t2: f64,
    pub samples: usize,
    pub observable: Observable,

    pub p_haar_grid: Vec<f64>,

    pub persistence: usize,
    pub min_significance: f64,
    pub csv1: Option<PathBuf>,
    pub csv2: Option<PathBuf>,
}

/// CLI flag overrides applied on top of the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub realizations: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

struct Reader {
    entries: BTreeMap<String, (String, usize)>,
    consumed: BTreeSet<String>,
}

fn config_err(line: usize, key: &str, msg: impl std::fmt::Display) -> Error {
    Error::InvalidArgument(format!("line {line}: key '{key}': {msg}"))
}

impl Reader {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "line {line_no}: expected 'key = value', got '{line}'"
                ))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(Error::InvalidArgument(format!("line {line_no}: empty key")));
            }
            if let Some((_, first)) = entries.get(&key) {
                return Err(Error::InvalidArgument(format!(
                    "line {line_no}: key '{key}' already set on line {first}"
                )));
            }
            entries.insert(key, (value, line_no));
        }
        Ok(Self { entries, consumed: BTreeSet::new() })
    }

    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.consumed.insert(key.to_string());
        self.entries.get(key).cloned()
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.take(key) {
            None => Ok(default),
            Some((v, line)) => v
                .parse()
                .map_err(|_| config_err(line, key, format!("'{v}' is not a number"))),
        }
    }

    fn usize_or(&mut self, key: &str, default: usize) -> Result<usize> {
        match self.take(key) {
            None => Ok(default),
            Some((v, line)) => v
                .parse()
                .map_err(|_| config_err(line, key, format!("'{v}' is not a nonnegative integer"))),
        }
    }

    fn u64_or(&mut self, key: &str, default: u64) -> Result<u64> {
        match self.take(key) {
            None => Ok(default),
            Some((v, line)) => v
                .parse()
                .map_err(|_| config_err(line, key, format!("'{v}' is not an integer"))),
        }
    }

    fn bool_or(&mut self, key: &str, default: bool) -> Result<bool> {
        match self.take(key) {
            None => Ok(default),
            Some((v, line)) => match v.as_str() {
                "true" => Ok(true),
                "false" => Ok(false),
                other => Err(config_err(line, key, format!("'{other}' is not true/false"))),
            },
        }
    }

    fn path(&mut self, key: &str) -> Option<PathBuf> {
        self.take(key).map(|(v, _)| PathBuf::from(v))
    }

    fn finish(&self, experiment: ExperimentKind) -> Result<()> {
        for (key, (_, line)) in &self.entries {
            if !self.consumed.contains(key) {
                return Err(Error::InvalidArgument(format!(
                    "line {line}: unknown key '{key}' for experiment '{}'",
                    experiment.name()
                )));
            }
        }
        Ok(())
    }
}

fn parse_angle_token(token: &str, key: &str, line: usize) -> Result<f64> {
    let t = token.trim();
    let (num, scale) = match t.strip_suffix("pi") {
        Some(rest) => (rest.trim(), std::f64::consts::PI),
        None => (t, 1.0),
    };
    let base: f64 = if num.is_empty() {
        1.0
    } else {
        num.parse()
            .map_err(|_| config_err(line, key, format!("'{token}' is not an angle")))?
    };
    Ok(base * scale)
}

fn parse_theta_list(reader: &mut Reader, default: &str) -> Result<Vec<Theta>> {
    let (value, line) = reader
        .take("theta")
        .unwrap_or_else(|| (default.to_string(), 0));
    let mut out = Vec::new();
    for token in value.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        out.push(Theta {
            radians: parse_angle_token(token, "theta", line)?,
            label: token.to_string(),
        });
    }
    if out.is_empty() {
        return Err(config_err(line, "theta", "needs at least one angle"));
    }
    Ok(out)
}

fn parse_float_list(reader: &mut Reader, key: &str, default: &str) -> Result<Vec<f64>> {
    let (value, line) = reader.take(key).unwrap_or_else(|| (default.to_string(), 0));
    let mut out = Vec::new();
    for token in value.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        out.push(
            token
                .parse()
                .map_err(|_| config_err(line, key, format!("'{token}' is not a number")))?,
        );
    }
    Ok(out)
}

fn parse_observable_set(reader: &mut Reader, default: &str) -> Result<BTreeSet<Observable>> {
    let (value, line) = reader
        .take("observables")
        .unwrap_or_else(|| (default.to_string(), 0));
    let mut out = BTreeSet::new();
    for token in value.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        out.insert(
            Observable::parse(token).map_err(|e| config_err(line, "observables", e))?,
        );
    }
    if out.is_empty() {
        return Err(config_err(line, "observables", "needs at least one observable"));
    }
    Ok(out)
}

/// Parse config text and apply CLI overrides. Validation beyond syntax (even
/// L, subsystem bounds) happens when the experiment runs.
pub fn parse_config(text: &str, overrides: &Overrides) -> Result<ExperimentConfig> {
    let mut r = Reader::parse(text)?;

    let experiment = match r.take("experiment") {
        None => {
            return Err(Error::InvalidArgument(
                "missing required key 'experiment'".into(),
            ))
        }
        Some((v, line)) => ExperimentKind::parse(&v).ok_or_else(|| {
            config_err(
                line,
                "experiment",
                format!(
                    "'{v}' is not one of circuit_ea, circuit_cv, ham_quench, charge_dist, \
                     peak_fit, crossing, latetime"
                ),
            )
        })?,
    };

    let num_sites = r.usize_or("L", 12)?;
    let default_sub_len = (num_sites / 4).max(1);

    let pattern = {
        let (v, line) = r
            .take("pattern")
            .unwrap_or_else(|| ("ferromagnetic".into(), 0));
        match v.as_str() {
            "ferromagnetic" => PatternKind::Ferromagnetic,
            "antiferromagnetic" => PatternKind::Antiferromagnetic,
            "domain_wall" => PatternKind::DomainWall,
            other => {
                return Err(config_err(
                    line,
                    "pattern",
                    format!(
                        "'{other}' is not one of ferromagnetic, antiferromagnetic, domain_wall"
                    ),
                ))
            }
        }
    };

    let doping = {
        let (v, line) = r.take("doping_mode").unwrap_or_else(|| ("per_gate".into(), 0));
        match v.as_str() {
            "per_gate" => DopingMode::PerGate,
            "fixed_positions" => DopingMode::FixedPositions,
            other => {
                return Err(config_err(
                    line,
                    "doping_mode",
                    format!("'{other}' is not per_gate or fixed_positions"),
                ))
            }
        }
    };

    let u1_phases = {
        let (v, line) = r.take("u1_phases").unwrap_or_else(|| ("random".into(), 0));
        match v.as_str() {
            "random" => U1BlockPhases::Random,
            "unit" => U1BlockPhases::Unit,
            other => {
                return Err(config_err(
                    line,
                    "u1_phases",
                    format!("'{other}' is not random or unit"),
                ))
            }
        }
    };

    let boundary = {
        let (v, line) = r.take("boundary").unwrap_or_else(|| ("periodic".into(), 0));
        match v.as_str() {
            "periodic" => Boundary::Periodic,
            "open" => Boundary::Open,
            other => {
                return Err(config_err(
                    line,
                    "boundary",
                    format!("'{other}' is not periodic or open"),
                ))
            }
        }
    };

    let default_obs = match experiment {
        ExperimentKind::CircuitEa => "ea_u1",
        ExperimentKind::CircuitCv => "cv",
        ExperimentKind::HamQuench => "ea_u1, cv",
        ExperimentKind::ChargeDist => "sector_probabilities",
        _ => "ea_u1",
    };
    let observables = parse_observable_set(&mut r, default_obs)?;

    let observable = {
        let (v, line) = r.take("observable").unwrap_or_else(|| ("ea_u1".into(), 0));
        Observable::parse(&v).map_err(|e| config_err(line, "observable", e))?
    };

    let config_output_dir = r.path("output_dir");
    let cfg = ExperimentConfig {
        experiment,
        output_dir: overrides
            .output_dir
            .clone()
            .or(config_output_dir)
            .unwrap_or_else(|| PathBuf::from("out")),
        emit_svg: r.bool_or("emit_svg", false)?,
        num_sites,
        seed: overrides.seed.unwrap_or(r.u64_or("seed", 12345)?),
        realizations: overrides
            .realizations
            .unwrap_or(r.usize_or("realizations", 100)?),
        steps: r.usize_or("steps", 30)?,
        p_haar: r.f64_or("p_haar", 0.0)?,
        subsystem_start: r.usize_or("subsystem_start", 0)?,
        subsystem_length: r.usize_or("subsystem_length", default_sub_len)?,
        renyi_n: r.f64_or("renyi_n", 1.0)?,
        doping,
        u1_phases,
        observables,
        pattern,
        thetas: parse_theta_list(&mut r, "0")?,
        gamma: r.f64_or("gamma", 1.0)?,
        delta: r.f64_or("delta", 0.4)?,
        j2: r.f64_or("j2", 0.0)?,
        delta2: r.f64_or("delta2", 0.0)?,
        boundary,
        t_max: r.f64_or("t_max", 20.0)?,
        dt: r.f64_or("dt", 0.05)?,
        t1: r.f64_or("t1", 2000.0)?,
        t2: r.f64_or("t2", 40000.0)?,
        samples: r.usize_or("samples", 2000)?,
        observable,
        p_haar_grid: parse_float_list(
            &mut r,
            "p_haar_grid",
            "0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10",
        )?,
        persistence: r.usize_or(
            "persistence",
            match experiment {
                ExperimentKind::HamQuench | ExperimentKind::ChargeDist => 3,
                _ => 2,
            },
        )?,
        min_significance: r.f64_or("min_significance", 2.0)?,
        csv1: r.path("csv1"),
        csv2: r.path("csv2"),
    };

    r.finish(experiment)?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_minimal_circuit_config() {
        let text = "\
# crossing demo
experiment = circuit_ea
L = 12
theta = 0.2pi, 0.5pi   # two tilts
realizations = 50
";
        let cfg = parse_config(text, &Overrides::default()).unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::CircuitEa);
        assert_eq!(cfg.num_sites, 12);
        assert_eq!(cfg.realizations, 50);
        assert_eq!(cfg.subsystem_length, 3);
        assert_eq!(cfg.thetas.len(), 2);
        assert!((cfg.thetas[0].radians - 0.2 * std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(cfg.thetas[1].label, "0.5pi");
        assert!(cfg.observables.contains(&Observable::EaU1));
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        let err = parse_config(
            "experiment = circuit_ea\nwavelength = 7\n",
            &Overrides::default(),
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("unknown key 'wavelength'"), "{msg}");
        assert!(msg.contains("line 2"), "{msg}");

        let err = parse_config(
            "experiment = circuit_ea\nL = 8\nL = 10\n",
            &Overrides::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("already set"), "{err}");
    }

    #[test]
    fn rejects_malformed_lines_and_values() {
        assert!(parse_config("experiment circuit_ea\n", &Overrides::default()).is_err());
        let err = parse_config(
            "experiment = circuit_ea\np_haar = lots\n",
            &Overrides::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("p_haar"), "{err}");
        assert!(parse_config("theta = 0.2pi\n", &Overrides::default()).is_err());
    }

    #[test]
    fn angle_tokens() {
        assert!((parse_angle_token("0.5pi", "theta", 1).unwrap()
            - std::f64::consts::FRAC_PI_2)
            .abs()
            < 1e-15);
        assert!((parse_angle_token("pi", "theta", 1).unwrap() - std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(parse_angle_token("0.7", "theta", 1).unwrap(), 0.7);
        assert!(parse_angle_token("2pie", "theta", 1).is_err());
    }

    #[test]
    fn overrides_beat_config_values() {
        let text = "experiment = latetime\nseed = 1\nrealizations = 5\noutput_dir = a\n";
        let over = Overrides {
            seed: Some(99),
            realizations: Some(7),
            output_dir: Some(PathBuf::from("b")),
        };
        let cfg = parse_config(text, &over).unwrap();
        assert_eq!(cfg.seed, 99);
        assert_eq!(cfg.realizations, 7);
        assert_eq!(cfg.output_dir, PathBuf::from("b"));
    }
}
