//! Sampled observable series and the shared observable evaluator used by
//! both circuit and Hamiltonian runs.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::metrics;
use crate::metrics::{ChargeProbe, ProbeKind, SectorDecomposition};
use crate::qstate::{StateVector, SubsystemMask};

/// Observable values sampled on a common grid, with ensemble mean and
/// standard error.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_realizations: usize,
}

impl TimeSeries {
    /// Deterministic single-trajectory series: stderr is identically zero.
    pub fn from_single(times: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(times.len(), values.len());
        let stderr = vec![0.0; values.len()];
        Self { times, mean: values, stderr, n_realizations: 1 }
    }

    /// Ensemble series reduced in fixed realization order: `rows[r][k]` is
    /// realization r at grid point k. Standard error is the sample standard
    /// deviation over realizations divided by sqrt(n).
    pub fn from_realizations(times: Vec<f64>, rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        assert!(n >= 1);
        let len = times.len();
        let mut mean = vec![0.0; len];
        let mut stderr = vec![0.0; len];
        for row in rows {
            assert_eq!(row.len(), len);
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        if n > 1 {
            for row in rows {
                for k in 0..len {
                    let d = row[k] - mean[k];
                    stderr[k] += d * d;
                }
            }
            for s in &mut stderr {
                *s = (*s / (n as f64 - 1.0)).sqrt() / (n as f64).sqrt();
            }
        }
        Self { times, mean, stderr, n_realizations: n }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Observables that can be recorded along a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Observable {
    /// Entanglement asymmetry of the configured subsystem, U(1) probe.
    EaU1,
    /// Entanglement asymmetry, Z2 (parity) probe.
    EaZ2,
    /// Charge variance of the full state.
    ChargeVariance,
    /// Tr(P_q rho_A) for every U(1) charge sector of the subsystem.
    SectorWeights,
    /// Full-state charge distribution P_Q for every total-charge sector.
    SectorProbabilities,
}

impl Observable {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ea_u1" => Ok(Observable::EaU1),
            "ea_z2" => Ok(Observable::EaZ2),
            "cv" => Ok(Observable::ChargeVariance),
            "sector_weights" => Ok(Observable::SectorWeights),
            "sector_probabilities" => Ok(Observable::SectorProbabilities),
            other => Err(Error::InvalidArgument(format!(
                "unknown observable '{other}' (expected ea_u1, ea_z2, cv, \
                 sector_weights, or sector_probabilities)"
            ))),
        }
    }

    /// True when the observable is a single scalar per state (as opposed to
    /// one value per charge sector).
    pub fn is_scalar(&self) -> bool {
        matches!(
            self,
            Observable::EaU1 | Observable::EaZ2 | Observable::ChargeVariance
        )
    }
}

/// Series keys produced by an observable set, in emission order.
pub fn series_keys(
    set: &BTreeSet<Observable>,
    num_sites: usize,
    subsystem: &SubsystemMask,
) -> Vec<String> {
    let mut keys = Vec::new();
    for obs in set {
        match obs {
            Observable::EaU1 => keys.push("ea_u1".into()),
            Observable::EaZ2 => keys.push("ea_z2".into()),
            Observable::ChargeVariance => keys.push("cv".into()),
            Observable::SectorWeights => {
                let decomp = SectorDecomposition::new(ProbeKind::U1, subsystem.length());
                for (q, _) in decomp.sectors() {
                    keys.push(format!("weight_q{q}"));
                }
            }
            Observable::SectorProbabilities => {
                let l = num_sites as i64;
                for k in 0..=l {
                    keys.push(format!("pq{}", 2 * k - l));
                }
            }
        }
    }
    keys
}

/// Evaluate the requested observables on one state, pushing one value onto
/// each keyed record. The key set matches `series_keys`.
pub(crate) fn record_observables(
    state: &StateVector,
    subsystem: &SubsystemMask,
    renyi_n: f64,
    set: &BTreeSet<Observable>,
    out: &mut BTreeMap<String, Vec<f64>>,
) -> Result<()> {
    let needs_rho = set.iter().any(|o| {
        matches!(
            o,
            Observable::EaU1 | Observable::EaZ2 | Observable::SectorWeights
        )
    });
    let rho = if needs_rho {
        Some(state.partial_trace(subsystem)?)
    } else {
        None
    };
    for obs in set {
        match obs {
            Observable::EaU1 => {
                let v = metrics::ea_from_rho(rho.as_ref().unwrap(), ProbeKind::U1, renyi_n)?;
                out.entry("ea_u1".into()).or_default().push(v);
            }
            Observable::EaZ2 => {
                let v = metrics::ea_from_rho(rho.as_ref().unwrap(), ProbeKind::Z2, renyi_n)?;
                out.entry("ea_z2".into()).or_default().push(v);
            }
            Observable::ChargeVariance => {
                out.entry("cv".into())
                    .or_default()
                    .push(metrics::charge_variance(state));
            }
            Observable::SectorWeights => {
                let probe = ChargeProbe::u1(*subsystem);
                for (q, w) in metrics::sector_weights(rho.as_ref().unwrap(), &probe) {
                    out.entry(format!("weight_q{q}")).or_default().push(w);
                }
            }
            Observable::SectorProbabilities => {
                for (q, p) in metrics::sector_probabilities(state) {
                    out.entry(format!("pq{q}")).or_default().push(p);
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ensemble_reduction_mean_and_stderr() {
        let rows = vec![vec![1.0, 4.0], vec![3.0, 4.0]];
        let ts = TimeSeries::from_realizations(vec![0.0, 1.0], &rows);
        assert_eq!(ts.mean, vec![2.0, 4.0]);
        // sample sd of {1, 3} is sqrt(2); stderr = sqrt(2)/sqrt(2) = 1
        assert!((ts.stderr[0] - 1.0).abs() < 1e-15);
        assert_eq!(ts.stderr[1], 0.0);
        assert_eq!(ts.n_realizations, 2);

        let single = TimeSeries::from_realizations(vec![0.0], &[vec![7.0]]);
        assert_eq!(single.mean, vec![7.0]);
        assert_eq!(single.stderr, vec![0.0]);
    }

    #[test]
    fn observable_parsing() {
        assert_eq!(Observable::parse("cv").unwrap(), Observable::ChargeVariance);
        assert!(Observable::parse("entropy").is_err());
        assert!(Observable::EaU1.is_scalar());
        assert!(!Observable::SectorWeights.is_scalar());
    }

    #[test]
    fn keys_cover_all_sectors() {
        let mask = SubsystemMask::new(0, 2).unwrap();
        let mut set = BTreeSet::new();
        set.insert(Observable::SectorWeights);
        set.insert(Observable::ChargeVariance);
        let keys = series_keys(&set, 4, &mask);
        assert_eq!(keys, vec!["cv", "weight_q-2", "weight_q0", "weight_q2"]);
    }

    #[test]
    fn declared_keys_match_recorded_keys() {
        let state = crate::qstate::StateVector::basis_state(4, &[0, 1, 1, 0]).unwrap();
        let mask = SubsystemMask::new(1, 2).unwrap();
        let set: BTreeSet<Observable> = [
            Observable::EaU1,
            Observable::EaZ2,
            Observable::ChargeVariance,
            Observable::SectorWeights,
            Observable::SectorProbabilities,
        ]
        .into();
        let mut records = BTreeMap::new();
        record_observables(&state, &mask, 1.0, &set, &mut records).unwrap();
        let mut declared = series_keys(&set, 4, &mask);
        declared.sort();
        let recorded: Vec<String> = records.keys().cloned().collect();
        assert_eq!(declared, recorded);
    }
}
