//! Symmetry diagnostics: charge-sector projection, Renyi entropies,
//! entanglement asymmetry, charge variance, sector probabilities and weights,
//! and density-matrix distance measures. Entropies are in nats.

use std::collections::BTreeMap;

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qstate::{DensityMatrix, StateVector, SubsystemMask};

/// Eigenvalues below this floor are dropped from entropy sums.
pub const EIGENVALUE_FLOOR: f64 = 1e-12;

/// Which subsystem charge the projection uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ProbeKind {
    /// Q_A = sum of sigma^z over the masked sites; the charge of a basis
    /// index is (#zeros - #ones), in {-m, -m+2, ..., m}.
    U1,
    /// Q_A = product of sigma^z, the parity (-1)^(#ones), in {-1, +1}.
    Z2,
}

/// A charge observable restricted to a subsystem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChargeProbe {
    pub kind: ProbeKind,
    pub mask: SubsystemMask,
}

impl ChargeProbe {
    pub fn u1(mask: SubsystemMask) -> Self {
        Self { kind: ProbeKind::U1, mask }
    }

    pub fn z2(mask: SubsystemMask) -> Self {
        Self { kind: ProbeKind::Z2, mask }
    }

    /// Charge of a subsystem basis index.
    pub fn charge_of(&self, index: usize) -> i64 {
        let ones = index.count_ones() as i64;
        match self.kind {
            ProbeKind::U1 => self.mask.length() as i64 - 2 * ones,
            ProbeKind::Z2 => 1 - 2 * (ones % 2),
        }
    }
}

/// Partition of the subsystem basis into charge sectors.
#[derive(Clone, Debug)]
pub struct SectorDecomposition {
    sectors: Vec<(i64, Vec<usize>)>,
}

impl SectorDecomposition {
    pub fn new(kind: ProbeKind, num_sites: usize) -> Self {
        let mask = SubsystemMask::new(0, num_sites).expect("length >= 1");
        let probe = ChargeProbe { kind, mask };
        let mut by_charge: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for b in 0..(1usize << num_sites) {
            by_charge.entry(probe.charge_of(b)).or_default().push(b);
        }
        Self {
            sectors: by_charge.into_iter().collect(),
        }
    }

    /// Sectors in increasing charge order; the index lists partition
    /// {0, ..., 2^m - 1}.
    pub fn sectors(&self) -> &[(i64, Vec<usize>)] {
        &self.sectors
    }
}

/// Zero every matrix element between different charge sectors:
/// rho -> sum_q P_q rho P_q.
pub fn project_to_sectors(rho: &DensityMatrix, probe: &ChargeProbe) -> DensityMatrix {
    let dim = rho.dim();
    debug_assert_eq!(dim, probe.mask.dim());
    let mut out = Mat::<Complex64>::zeros(dim, dim);
    for a in 0..dim {
        for b in 0..dim {
            if probe.charge_of(a) == probe.charge_of(b) {
                out[(a, b)] = rho.entry(a, b);
            }
        }
    }
    DensityMatrix::new(out)
}

fn renyi_from_spectrum(evals: &[f64], n: f64) -> f64 {
    if (n - 1.0).abs() < 1e-12 {
        -evals
            .iter()
            .filter(|&&v| v > EIGENVALUE_FLOOR)
            .map(|&v| v * v.ln())
            .sum::<f64>()
    } else {
        // clip guards fractional powers of tiny negative eigenvalues
        let s: f64 = evals.iter().map(|&v| v.max(1e-300).powf(n)).sum();
        s.ln() / (1.0 - n)
    }
}

/// n-th Renyi entropy S^n = log(Tr rho^n) / (1 - n) in nats, with the n -> 1
/// limit handled as the von Neumann entropy.
pub fn renyi_entropy(rho: &DensityMatrix, n: f64) -> Result<f64> {
    if n < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "Renyi index {n} must be >= 1"
        )));
    }
    Ok(renyi_from_spectrum(&rho.eigenvalues(), n))
}

fn block_spectrum(rho: &DensityMatrix, probe: &ChargeProbe) -> Vec<f64> {
    let decomp = SectorDecomposition::new(probe.kind, probe.mask.length());
    let mut evals = Vec::with_capacity(rho.dim());
    for (_, idxs) in decomp.sectors() {
        if idxs.len() == 1 {
            evals.push(rho.entry(idxs[0], idxs[0]).re);
            continue;
        }
        let block = Mat::<Complex64>::from_fn(idxs.len(), idxs.len(), |a, b| {
            rho.entry(idxs[a], idxs[b])
        });
        evals.extend(
            block
                .self_adjoint_eigenvalues(faer::Side::Lower)
                .expect("hermitian eigendecomposition failed"),
        );
    }
    evals
}

pub(crate) fn ea_from_rho(rho: &DensityMatrix, kind: ProbeKind, n: f64) -> Result<f64> {
    if n < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "Renyi index {n} must be >= 1"
        )));
    }
    let m = rho.dim().trailing_zeros() as usize;
    let mask = SubsystemMask::new(0, m)?;
    let probe = ChargeProbe { kind, mask };
    // spectra of rho and of each charge block of the projected matrix;
    // the projected spectrum is the union of the block spectra
    let s_proj = renyi_from_spectrum(&block_spectrum(rho, &probe), n);
    let s_full = renyi_from_spectrum(&rho.eigenvalues(), n);
    Ok(s_proj - s_full)
}

/// Entanglement asymmetry dS^n = S^n(projected rho_A) - S^n(rho_A) of the
/// probe's subsystem. Nonnegative; zero iff rho_A commutes with the probe
/// charge.
pub fn entanglement_asymmetry(state: &StateVector, probe: &ChargeProbe, n: f64) -> Result<f64> {
    let rho = state.partial_trace(&probe.mask)?;
    ea_from_rho(&rho, probe.kind, n)
}

/// First two moments (<Q>, <Q^2>) of the total charge Q = sum_i sigma_i^z,
/// evaluated diagonally from the basis probabilities.
pub fn charge_moments(state: &StateVector) -> (f64, f64) {
    let l = state.num_sites() as i64;
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for (b, a) in state.amplitudes().iter().enumerate() {
        let p = a.norm_sqr();
        let q = (l - 2 * b.count_ones() as i64) as f64;
        m1 += p * q;
        m2 += p * q * q;
    }
    (m1, m2)
}

/// Charge variance <Q^2> - <Q>^2 of the full state.
pub fn charge_variance(state: &StateVector) -> f64 {
    let (m1, m2) = charge_moments(state);
    m2 - m1 * m1
}

/// Probability of each total-charge sector, P_Q = sum over basis states with
/// charge Q of |psi_b|^2. Every Q in {-L, -L+2, ..., L} is present.
pub fn sector_probabilities(state: &StateVector) -> BTreeMap<i64, f64> {
    let l = state.num_sites() as i64;
    let mut out: BTreeMap<i64, f64> = (0..=l).map(|k| (l - 2 * k, 0.0)).collect();
    for (b, a) in state.amplitudes().iter().enumerate() {
        let q = l - 2 * b.count_ones() as i64;
        *out.get_mut(&q).unwrap() += a.norm_sqr();
    }
    out
}

/// Weight Tr(P_q rho) of each probe charge sector.
pub fn sector_weights(rho: &DensityMatrix, probe: &ChargeProbe) -> BTreeMap<i64, f64> {
    let decomp = SectorDecomposition::new(probe.kind, probe.mask.length());
    decomp
        .sectors()
        .iter()
        .map(|(q, idxs)| (*q, idxs.iter().map(|&i| rho.entry(i, i).re).sum()))
        .collect()
}

fn check_same_dim(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<()> {
    if r1.dim() != r2.dim() {
        return Err(Error::InvalidArgument(format!(
            "dimension mismatch: {} vs {}",
            r1.dim(),
            r2.dim()
        )));
    }
    Ok(())
}

/// Trace distance (1/2) * sum of singular values of r1 - r2. The difference
/// is Hermitian, so the singular values are the absolute eigenvalues.
pub fn trace_distance(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<f64> {
    check_same_dim(r1, r2)?;
    let dim = r1.dim();
    let diff = Mat::<Complex64>::from_fn(dim, dim, |a, b| r1.entry(a, b) - r2.entry(a, b));
    let evals = diff
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .expect("hermitian eigendecomposition failed");
    Ok(0.5 * evals.iter().map(|e| e.abs()).sum::<f64>())
}

/// Frobenius distance sqrt(Tr (r1 - r2)^dagger (r1 - r2)).
pub fn frobenius_distance(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<f64> {
    check_same_dim(r1, r2)?;
    let dim = r1.dim();
    let mut s = 0.0;
    for a in 0..dim {
        for b in 0..dim {
            s += (r1.entry(a, b) - r2.entry(a, b)).norm_sqr();
        }
    }
    Ok(s.sqrt())
}

/// Quantum relative entropy S(r1 || r2) = Tr r1 (log r1 - log r2), extended
/// to +infinity when the support of r1 is not contained in that of r2.
pub fn relative_entropy(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<f64> {
    check_same_dim(r1, r2)?;
    let e1 = r1
        .mat()
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("hermitian eigendecomposition failed");
    let e2 = r2
        .mat()
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("hermitian eigendecomposition failed");
    let dim = r1.dim();
    let lam: Vec<f64> = (0..dim).map(|i| e1.S().column_vector()[i].re).collect();
    let mu: Vec<f64> = (0..dim).map(|j| e2.S().column_vector()[j].re).collect();
    // overlap(i, j) = |<u_i | v_j>|^2
    let overlap = e1.U().adjoint() * e2.U();
    let mut s = 0.0;
    for (i, &li) in lam.iter().enumerate() {
        if li <= EIGENVALUE_FLOOR {
            continue;
        }
        s += li * li.ln();
        for (j, &mj) in mu.iter().enumerate() {
            let w = li * overlap[(i, j)].norm_sqr();
            if mj <= EIGENVALUE_FLOOR {
                // mass on the null space of r2
                if w > 1e-10 {
                    return Ok(f64::INFINITY);
                }
            } else {
                s -= w * mj.ln();
            }
        }
    }
    Ok(s)
}
