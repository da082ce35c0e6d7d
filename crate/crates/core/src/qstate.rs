//! Dense statevector representation, gate application, partial trace, and
//! tilted product-state construction.
//!
//! Index convention: amplitude index `b` encodes the computational basis with
//! site 0 as the least-significant bit. Bit value 0 is the sigma^z = +1 state
//! (charge +1), bit value 1 is sigma^z = -1.

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gates::TwoQubitGate;

/// Hard cap on the dense representation.
pub const MAX_SITES: usize = 20;

/// Tolerance for state-norm and density-matrix invariants.
pub const NORM_TOL: f64 = 1e-10;

/// Pure state of `num_sites` qubits as 2^L complex amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_sites: usize,
    amps: Vec<Complex64>,
}

fn check_num_sites(num_sites: usize) -> Result<()> {
    if num_sites < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 sites, got {num_sites}"
        )));
    }
    if num_sites > MAX_SITES {
        return Err(Error::ResourceLimit(format!(
            "{num_sites} sites exceeds the dense cap of {MAX_SITES}"
        )));
    }
    Ok(())
}

impl StateVector {
    /// Computational basis state. `bits[i]` is the state of site `i`.
    pub fn basis_state(num_sites: usize, bits: &[u8]) -> Result<Self> {
        check_num_sites(num_sites)?;
        if bits.len() != num_sites {
            return Err(Error::InvalidArgument(format!(
                "expected {num_sites} bits, got {}",
                bits.len()
            )));
        }
        let mut index = 0usize;
        for (site, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => index |= 1 << site,
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "bit {b} at site {site} is not 0 or 1"
                    )))
                }
            }
        }
        let mut amps = vec![Complex64::ZERO; 1 << num_sites];
        amps[index] = Complex64::ONE;
        Ok(Self { num_sites, amps })
    }

    /// Wrap raw amplitudes. The length must be 2^L for L in [2, MAX_SITES]
    /// and the vector must be normalized within `NORM_TOL`.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if !dim.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude count {dim} is not a power of two"
            )));
        }
        let num_sites = dim.trailing_zeros() as usize;
        check_num_sites(num_sites)?;
        let state = Self { num_sites, amps };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!(
                "state norm {norm} is not 1 within {NORM_TOL:.0e}"
            )));
        }
        Ok(state)
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probability(&self, basis_index: usize) -> f64 {
        self.amps[basis_index].norm_sqr()
    }

    /// Apply a two-qubit gate to sites `i` (first basis label) and `j`
    /// (second label). Only amplitudes differing on bits `i`, `j` mix.
    pub fn apply_two_qubit(&mut self, gate: &TwoQubitGate, i: usize, j: usize) -> Result<()> {
        let l = self.num_sites;
        if i == j || i >= l || j >= l {
            return Err(Error::InvalidArgument(format!(
                "sites ({i}, {j}) invalid for {l} sites"
            )));
        }
        gate.check_unitary()?;
        let u = gate.entries();
        let (mi, mj) = (1usize << i, 1usize << j);
        let lo = i.min(j);
        let hi = i.max(j);
        for k in 0..(self.amps.len() >> 2) {
            let b = insert_zero_bit(insert_zero_bit(k, lo), hi);
            let i00 = b;
            let i01 = b | mj;
            let i10 = b | mi;
            let i11 = b | mi | mj;
            let v = [self.amps[i00], self.amps[i01], self.amps[i10], self.amps[i11]];
            self.amps[i00] = u[0][0] * v[0] + u[0][1] * v[1] + u[0][2] * v[2] + u[0][3] * v[3];
            self.amps[i01] = u[1][0] * v[0] + u[1][1] * v[1] + u[1][2] * v[2] + u[1][3] * v[3];
            self.amps[i10] = u[2][0] * v[0] + u[2][1] * v[1] + u[2][2] * v[2] + u[2][3] * v[3];
            self.amps[i11] = u[3][0] * v[0] + u[3][1] * v[1] + u[3][2] * v[2] + u[3][3] * v[3];
        }
        Ok(())
    }

    /// Reduced density matrix of the contiguous subsystem `mask`, obtained by
    /// tracing out the complement.
    pub fn partial_trace(&self, mask: &SubsystemMask) -> Result<DensityMatrix> {
        mask.check_for(self.num_sites)?;
        let start = mask.start();
        let m = mask.length();
        let dim = 1usize << m;
        let low = 1usize << start;
        let high = 1usize << (self.num_sites - start - m);
        let mut rho = Mat::<Complex64>::zeros(dim, dim);
        for h in 0..high {
            let base = h << (start + m);
            for a in 0..dim {
                let ia = base | (a << start);
                for b in 0..=a {
                    let ib = base | (b << start);
                    let mut s = Complex64::ZERO;
                    for lo_bits in 0..low {
                        s += self.amps[ia | lo_bits] * self.amps[ib | lo_bits].conj();
                    }
                    rho[(a, b)] += s;
                }
            }
        }
        // fill the upper triangle from hermiticity
        for a in 0..dim {
            for b in 0..a {
                rho[(b, a)] = rho[(a, b)].conj();
            }
        }
        Ok(DensityMatrix::new(rho))
    }
}

fn insert_zero_bit(x: usize, pos: usize) -> usize {
    ((x >> pos) << (pos + 1)) | (x & ((1 << pos) - 1))
}

/// Contiguous range of sites, `start..start + length`, no wraparound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SubsystemMask {
    start: usize,
    length: usize,
}

impl SubsystemMask {
    pub fn new(start: usize, length: usize) -> Result<Self> {
        if length == 0 {
            return Err(Error::InvalidArgument("subsystem length must be >= 1".into()));
        }
        Ok(Self { start, length })
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn dim(&self) -> usize {
        1 << self.length
    }

    pub fn check_for(&self, num_sites: usize) -> Result<()> {
        if self.start + self.length > num_sites {
            return Err(Error::InvalidArgument(format!(
                "subsystem [{}, {}) does not fit in {num_sites} sites",
                self.start,
                self.start + self.length
            )));
        }
        Ok(())
    }
}

/// Dense density matrix of a subsystem.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    data: Mat<Complex64>,
}

impl DensityMatrix {
    pub fn new(data: Mat<Complex64>) -> Self {
        assert_eq!(data.nrows(), data.ncols(), "density matrix must be square");
        Self { data }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn entry(&self, a: usize, b: usize) -> Complex64 {
        self.data[(a, b)]
    }

    pub fn mat(&self) -> faer::MatRef<'_, Complex64> {
        self.data.as_ref()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.data[(i, i)]).sum()
    }

    /// Tr(rho^2), computed as the squared Frobenius norm (rho is Hermitian).
    pub fn purity(&self) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                s += self.data[(a, b)].norm_sqr();
            }
        }
        s
    }

    /// Eigenvalues in nondecreasing order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.data
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .expect("hermitian eigendecomposition failed")
    }

    /// Max-norm deviation from hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                worst = worst.max((self.data[(a, b)] - self.data[(b, a)].conj()).norm());
            }
        }
        worst
    }
}

/// Reference bit pattern of the pre-tilt product state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatternKind {
    Ferromagnetic,
    Antiferromagnetic,
    DomainWall,
}

impl PatternKind {
    pub fn name(&self) -> &'static str {
        match self {
            PatternKind::Ferromagnetic => "ferromagnetic",
            PatternKind::Antiferromagnetic => "antiferromagnetic",
            PatternKind::DomainWall => "domain_wall",
        }
    }
}

/// A reference pattern together with a global y-rotation angle `tilt` that
/// controls how strongly the product state breaks the U(1) symmetry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialStatePattern {
    kind: PatternKind,
    tilt: f64,
}

impl InitialStatePattern {
    pub fn new(kind: PatternKind, tilt: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&tilt) {
            return Err(Error::InvalidArgument(format!(
                "tilt angle {tilt} outside [0, pi/2]"
            )));
        }
        Ok(Self { kind, tilt })
    }

    pub fn kind(&self) -> PatternKind {
        self.kind
    }

    pub fn tilt(&self) -> f64 {
        self.tilt
    }

    /// Reference bits per site. The domain wall sits at floor(L/2) with
    /// zeros on the left.
    pub fn base_bits(&self, num_sites: usize) -> Vec<u8> {
        (0..num_sites)
            .map(|i| match self.kind {
                PatternKind::Ferromagnetic => 0,
                PatternKind::Antiferromagnetic => (i % 2) as u8,
                PatternKind::DomainWall => u8::from(i >= num_sites / 2),
            })
            .collect()
    }
}

/// Product state with every site rotated about y by the pattern's tilt:
/// a site in state 0 becomes cos(t/2)|0> + sin(t/2)|1>, a site in state 1
/// becomes -sin(t/2)|0> + cos(t/2)|1>.
pub fn tilted_product_state(num_sites: usize, pattern: &InitialStatePattern) -> Result<StateVector> {
    check_num_sites(num_sites)?;
    let (s, c) = (pattern.tilt() / 2.0).sin_cos();
    let bits = pattern.base_bits(num_sites);
    let mut amps = vec![Complex64::ONE];
    // build site L-1 outward so that site 0 lands on the least-significant bit
    for site in (0..num_sites).rev() {
        let (f0, f1) = if bits[site] == 0 { (c, s) } else { (-s, c) };
        let mut next = Vec::with_capacity(amps.len() * 2);
        for &a in &amps {
            next.push(a * f0);
            next.push(a * f1);
        }
        amps = next;
    }
    Ok(StateVector { num_sites, amps })
}
