//! Brick-wall random circuits with Haar doping and seeded ensemble
//! averaging.
//!
//! One time step applies two layers of two-qubit gates: layer 1 on bonds
//! (0,1), (2,3), ..., (L-2, L-1) and layer 2 on bonds (1,2), (3,4), ...,
//! (L-1, 0), the last wrapping periodically. Each gate is Haar-random with
//! probability `p_haar` and U(1)-symmetric otherwise.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gates::{sample_haar, sample_u1_gate_with, GateKind, RngStream, U1BlockPhases};
use crate::qstate::{tilted_product_state, InitialStatePattern, StateVector, SubsystemMask};
use crate::series::{record_observables, Observable, TimeSeries};

/// When doping positions are redrawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DopingMode {
    /// Every gate application is an independent Bernoulli(p_haar) choice,
    /// redrawn each layer, step, and realization.
    #[default]
    PerGate,
    /// Doping positions are drawn once per realization (per bond and layer)
    /// and reused every step; the gates themselves stay random.
    FixedPositions,
}

/// Parameters of a circuit ensemble run.
#[derive(Clone, Copy, Debug)]
pub struct CircuitConfig {
    pub num_sites: usize,
    pub p_haar: f64,
    pub steps: usize,
    pub realizations: usize,
    pub seed: u64,
    pub subsystem: SubsystemMask,
    pub renyi_n: f64,
    pub doping: DopingMode,
    pub u1_phases: U1BlockPhases,
}

impl CircuitConfig {
    pub fn validate(&self) -> Result<()> {
        let l = self.num_sites;
        if l < 4 || !l.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "brick-wall circuits need an even number of sites >= 4, got {l}"
            )));
        }
        if l > crate::qstate::MAX_SITES {
            return Err(Error::ResourceLimit(format!(
                "{l} sites exceeds the dense cap of {}",
                crate::qstate::MAX_SITES
            )));
        }
        if !(0.0..=1.0).contains(&self.p_haar) {
            return Err(Error::InvalidArgument(format!(
                "p_haar = {} outside [0, 1]",
                self.p_haar
            )));
        }
        if self.realizations == 0 {
            return Err(Error::InvalidArgument("need at least one realization".into()));
        }
        self.subsystem.check_for(l)?;
        if self.subsystem.length() > l / 2 {
            return Err(Error::InvalidArgument(format!(
                "subsystem length {} exceeds half the system size {l}",
                self.subsystem.length()
            )));
        }
        if self.renyi_n < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "Renyi index {} must be >= 1",
                self.renyi_n
            )));
        }
        Ok(())
    }

    /// Bonds of the two layers, first layer then second.
    fn layers(&self) -> [Vec<(usize, usize)>; 2] {
        let l = self.num_sites;
        let layer1 = (0..l).step_by(2).map(|a| (a, a + 1)).collect();
        let layer2 = (1..l).step_by(2).map(|a| (a, (a + 1) % l)).collect();
        [layer1, layer2]
    }
}

fn apply_doped_gate(
    state: &mut StateVector,
    rng: &mut RngStream,
    kind: GateKind,
    phases: U1BlockPhases,
    bond: (usize, usize),
) -> Result<()> {
    let gate = match kind {
        GateKind::Haar => sample_haar(rng),
        GateKind::U1Symmetric => sample_u1_gate_with(rng, phases),
    };
    state.apply_two_qubit(&gate, bond.0, bond.1)
}

fn draw_kind(rng: &mut RngStream, p_haar: f64) -> GateKind {
    if rng.gen::<f64>() < p_haar {
        GateKind::Haar
    } else {
        GateKind::U1Symmetric
    }
}

/// One brick-wall step with per-gate doping. Gates are drawn bond by bond in
/// layer order, so a fixed `(seed, stream)` reproduces the circuit exactly.
pub fn step(state: &mut StateVector, rng: &mut RngStream, cfg: &CircuitConfig) -> Result<()> {
    if state.num_sites() != cfg.num_sites {
        return Err(Error::InvalidArgument(format!(
            "state has {} sites, config has {}",
            state.num_sites(),
            cfg.num_sites
        )));
    }
    for layer in cfg.layers() {
        for bond in layer {
            let kind = draw_kind(rng, cfg.p_haar);
            apply_doped_gate(state, rng, kind, cfg.u1_phases, bond)?;
        }
    }
    Ok(())
}

fn step_with_plan(
    state: &mut StateVector,
    rng: &mut RngStream,
    cfg: &CircuitConfig,
    plan: &[Vec<GateKind>; 2],
) -> Result<()> {
    for (layer, kinds) in cfg.layers().iter().zip(plan) {
        for (bond, &kind) in layer.iter().zip(kinds) {
            apply_doped_gate(state, rng, kind, cfg.u1_phases, *bond)?;
        }
    }
    Ok(())
}

/// Evolve one realization and record the requested observables after every
/// step, starting with the untouched initial state.
pub fn run_realization(
    cfg: &CircuitConfig,
    pattern: &InitialStatePattern,
    stream_id: u64,
    observables: &BTreeSet<Observable>,
) -> Result<BTreeMap<String, Vec<f64>>> {
    cfg.validate()?;
    let mut rng = RngStream::new(cfg.seed, stream_id);
    let mut state = tilted_product_state(cfg.num_sites, pattern)?;
    let plan = match cfg.doping {
        DopingMode::PerGate => None,
        DopingMode::FixedPositions => {
            let kinds = cfg
                .layers()
                .map(|layer| layer.iter().map(|_| draw_kind(&mut rng, cfg.p_haar)).collect());
            Some(kinds)
        }
    };
    let mut records: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    record_observables(&state, &cfg.subsystem, cfg.renyi_n, observables, &mut records)?;
    for _ in 0..cfg.steps {
        match &plan {
            None => step(&mut state, &mut rng, cfg)?,
            Some(plan) => step_with_plan(&mut state, &mut rng, cfg, plan)?,
        }
        record_observables(&state, &cfg.subsystem, cfg.renyi_n, observables, &mut records)?;
    }
    Ok(records)
}

/// Run `cfg.realizations` independent realizations (stream ids 0..n) in
/// parallel and average. The reduction runs in fixed stream order, so the
/// result does not depend on thread scheduling.
pub fn run_ensemble(
    cfg: &CircuitConfig,
    pattern: &InitialStatePattern,
    observables: &BTreeSet<Observable>,
) -> Result<BTreeMap<String, TimeSeries>> {
    cfg.validate()?;
    let per_real: Vec<BTreeMap<String, Vec<f64>>> = (0..cfg.realizations as u64)
        .into_par_iter()
        .map(|stream_id| run_realization(cfg, pattern, stream_id, observables))
        .collect::<Result<_>>()?;

    let times: Vec<f64> = (0..=cfg.steps).map(|s| s as f64).collect();
    let keys: Vec<String> = per_real[0].keys().cloned().collect();
    let mut out = BTreeMap::new();
    for key in keys {
        let rows: Vec<Vec<f64>> = per_real.iter().map(|r| r[&key].clone()).collect();
        out.insert(key.clone(), TimeSeries::from_realizations(times.clone(), &rows));
    }
    Ok(out)
}
