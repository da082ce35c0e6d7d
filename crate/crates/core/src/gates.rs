//! Two-qubit gate sampling: Haar-random gates, U(1)-symmetric block gates,
//! single-qubit tilt rotations, and gate-symmetry checks.
//!
//! Gate matrices are written in the basis |00>, |01>, |10>, |11>, where the
//! first label is the first site the gate is applied to.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Maximum accepted deviation from unitarity when applying a gate.
pub const UNITARITY_TOL: f64 = 1e-8;

/// Seeded, stream-addressable random source. Identical `(seed, stream_id)`
/// pairs reproduce identical draw sequences, independent of thread
/// scheduling, so ensembles are reproducible realization by realization.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// Which family a sampled circuit gate belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateKind {
    U1Symmetric,
    Haar,
}

/// Phase convention for the two 1-dimensional charge blocks of a
/// U(1)-symmetric gate. `Random` draws each block Haar on U(1) (a uniform
/// phase); `Unit` pins both blocks to 1 so only the central 2x2 block is
/// random.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum U1BlockPhases {
    #[default]
    Random,
    Unit,
}

/// A 4x4 two-qubit gate in the |00>, |01>, |10>, |11> basis.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoQubitGate {
    entries: [[Complex64; 4]; 4],
}

impl TwoQubitGate {
    pub fn new(entries: [[Complex64; 4]; 4]) -> Self {
        Self { entries }
    }

    pub fn identity() -> Self {
        let mut entries = [[Complex64::ZERO; 4]; 4];
        for (i, row) in entries.iter_mut().enumerate() {
            row[i] = Complex64::ONE;
        }
        Self { entries }
    }

    pub fn swap() -> Self {
        let mut entries = [[Complex64::ZERO; 4]; 4];
        entries[0][0] = Complex64::ONE;
        entries[1][2] = Complex64::ONE;
        entries[2][1] = Complex64::ONE;
        entries[3][3] = Complex64::ONE;
        Self { entries }
    }

    pub fn entries(&self) -> &[[Complex64; 4]; 4] {
        &self.entries
    }

    /// Max-norm deviation of U†U from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let u = &self.entries;
        let mut worst = 0.0f64;
        for a in 0..4 {
            for b in 0..4 {
                let mut s: Complex64 = u.iter().map(|row| row[a].conj() * row[b]).sum();
                if a == b {
                    s -= Complex64::ONE;
                }
                worst = worst.max(s.norm());
            }
        }
        worst
    }

    pub(crate) fn check_unitary(&self) -> Result<()> {
        let defect = self.unitarity_defect();
        if defect > UNITARITY_TOL {
            return Err(Error::InvalidGate(format!(
                "gate deviates from unitarity by {defect:.3e} (tolerance {UNITARITY_TOL:.0e})"
            )));
        }
        Ok(())
    }
}

fn complex_gaussian(rng: &mut RngStream) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

fn uniform_phase(rng: &mut RngStream) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * rng.gen::<f64>())
}

/// Gram-Schmidt QR of a complex Ginibre matrix. Orthonormalizing column by
/// column keeps the R diagonal real and positive, which is exactly the
/// phase-corrected QR construction for an exact Haar sample.
fn haar_columns<const N: usize>(rng: &mut RngStream) -> [[Complex64; N]; N] {
    // a[i][j]: row i, column j
    let mut a = [[Complex64::ZERO; N]; N];
    for row in a.iter_mut() {
        for x in row.iter_mut() {
            *x = complex_gaussian(rng);
        }
    }
    for j in 0..N {
        for k in 0..j {
            let proj: Complex64 = a.iter().map(|row| row[k].conj() * row[j]).sum();
            for row in a.iter_mut() {
                let t = row[k];
                row[j] -= proj * t;
            }
        }
        let norm = a.iter().map(|row| row[j].norm_sqr()).sum::<f64>().sqrt();
        for row in a.iter_mut() {
            row[j] /= norm;
        }
    }
    a
}

/// Draw a Haar-random 4x4 unitary.
pub fn sample_haar(rng: &mut RngStream) -> TwoQubitGate {
    TwoQubitGate::new(haar_columns::<4>(rng))
}

/// Draw a U(1)-symmetric gate: independent unit-modulus phases on the
/// 1-dimensional charge blocks |00> and |11>, a Haar-random 2x2 unitary on
/// the {|01>, |10>} block, and exact zeros everywhere else.
///
/// Draw order: |00> phase, central block, |11> phase.
pub fn sample_u1_gate(rng: &mut RngStream) -> TwoQubitGate {
    sample_u1_gate_with(rng, U1BlockPhases::Random)
}

/// `sample_u1_gate` with an explicit phase convention for the 1-dimensional
/// blocks. `U1BlockPhases::Unit` draws no phases at all.
pub fn sample_u1_gate_with(rng: &mut RngStream, phases: U1BlockPhases) -> TwoQubitGate {
    let mut entries = [[Complex64::ZERO; 4]; 4];
    entries[0][0] = match phases {
        U1BlockPhases::Random => uniform_phase(rng),
        U1BlockPhases::Unit => Complex64::ONE,
    };
    let block = haar_columns::<2>(rng);
    entries[1][1] = block[0][0];
    entries[1][2] = block[0][1];
    entries[2][1] = block[1][0];
    entries[2][2] = block[1][1];
    entries[3][3] = match phases {
        U1BlockPhases::Random => uniform_phase(rng),
        U1BlockPhases::Unit => Complex64::ONE,
    };
    TwoQubitGate::new(entries)
}

/// Single-site y-rotation factor of the tilt: [[cos(t/2), -sin(t/2)],
/// [sin(t/2), cos(t/2)]].
pub fn tilt_rotation(theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = (theta / 2.0).sin_cos();
    [[c, -s], [s, c]]
}

/// True iff the gate commutes with the two-site charge
/// Q2 = sigma^z (x) I + I (x) sigma^z within `tol` (max norm).
pub fn is_u1_symmetric(gate: &TwoQubitGate, tol: f64) -> bool {
    // Q2 is diagonal (2, 0, 0, -2) in the gate basis, so the commutator
    // entry (a, b) is U_ab (q_b - q_a).
    const Q2: [f64; 4] = [2.0, 0.0, 0.0, -2.0];
    let u = gate.entries();
    let mut worst = 0.0f64;
    for a in 0..4 {
        for b in 0..4 {
            worst = worst.max((u[a][b] * (Q2[b] - Q2[a])).norm());
        }
    }
    worst <= tol
}
