//! Exact small-system quantum arithmetic: states, dichotomic observables,
//! tensor products and expectation values. Everything is dense complex
//! double precision and capped at four qubits, which covers every quantity
//! the rest of the crate needs.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{IcError, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

pub const MAX_QUBITS: usize = 4;
const HERMITICITY_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const POSITIVITY_TOL: f64 = 1e-9;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

/// Kronecker product, block layout `(i1*dimB+i2, j1*dimB+j2) = a[i1,j1]*b[i2,j2]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Kronecker product of a list, left to right.
pub fn kron_all(mats: &[ComplexMatrix]) -> ComplexMatrix {
    let mut out = ComplexMatrix::identity(1, 1);
    for m in mats {
        out = kron(&out, m);
    }
    out
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    max_abs_diff(m, &m.adjoint()) <= tol
}

/// Real eigenvalues of a Hermitian matrix, unordered.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    m.clone().symmetric_eigen().eigenvalues.iter().copied().collect()
}

/// A density matrix on `num_qubits` qubits, validated on construction.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    num_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(num_qubits: usize, matrix: ComplexMatrix) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(IcError::InvalidArgument(format!(
                "num_qubits must be in 1..={MAX_QUBITS}, got {num_qubits}"
            )));
        }
        let dim = 1usize << num_qubits;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(IcError::DimensionMismatch(format!(
                "expected {dim}x{dim} matrix for {num_qubits} qubits"
            )));
        }
        if !is_hermitian(&matrix, HERMITICITY_TOL) {
            return Err(IcError::Invariant("density matrix not Hermitian".into()));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(IcError::Invariant(format!("trace {tr} != 1")));
        }
        let min_eig = hermitian_eigenvalues(&matrix)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -POSITIVITY_TOL {
            return Err(IcError::Invariant(format!(
                "negative eigenvalue {min_eig}"
            )));
        }
        Ok(Self { num_qubits, matrix })
    }

    /// Pure state from an (unnormalized) amplitude vector.
    pub fn from_state_vector(amplitudes: &[Complex64]) -> Result<Self> {
        let dim = amplitudes.len();
        let num_qubits = dim.trailing_zeros() as usize;
        if dim == 0 || dim != 1 << num_qubits {
            return Err(IcError::InvalidArgument(format!(
                "amplitude count {dim} is not a power of two"
            )));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(IcError::InvalidArgument("zero state vector".into()));
        }
        let dimn = dim;
        let mut m = ComplexMatrix::zeros(dimn, dimn);
        for i in 0..dimn {
            for j in 0..dimn {
                m[(i, j)] = amplitudes[i] * amplitudes[j].conj() / (norm * norm);
            }
        }
        Self::new(num_qubits, m)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Equal-weight mixture of two states on the same qubit count.
    pub fn mix(a: &DensityMatrix, b: &DensityMatrix, w: f64) -> Result<Self> {
        if a.num_qubits != b.num_qubits {
            return Err(IcError::DimensionMismatch("mixing different sizes".into()));
        }
        let m = &a.matrix * c(w, 0.0) + &b.matrix * c(1.0 - w, 0.0);
        Self::new(a.num_qubits, m)
    }
}

/// A dichotomic observable (Hermitian, square equal to identity) acting on
/// `arity` qubits.
#[derive(Debug, Clone)]
pub struct Observable {
    arity: usize,
    matrix: ComplexMatrix,
}

impl Observable {
    pub fn new(arity: usize, matrix: ComplexMatrix) -> Result<Self> {
        let dim = 1usize << arity;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(IcError::DimensionMismatch(format!(
                "expected {dim}x{dim} observable for arity {arity}"
            )));
        }
        if !is_hermitian(&matrix, HERMITICITY_TOL) {
            return Err(IcError::Invariant("observable not Hermitian".into()));
        }
        let sq = &matrix * &matrix;
        if max_abs_diff(&sq, &identity(dim)) > 1e-9 {
            return Err(IcError::Invariant("observable is not dichotomic".into()));
        }
        Ok(Self { arity, matrix })
    }

    pub fn identity(arity: usize) -> Self {
        Self {
            arity,
            matrix: identity(1 << arity),
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Projector onto the outcome-`o` eigenspace with 0 mapped to +1, 1 to -1.
    pub fn projector(&self, outcome: u8) -> ComplexMatrix {
        let sign = if outcome == 0 { 1.0 } else { -1.0 };
        (identity(1 << self.arity) + &self.matrix * c(sign, 0.0)) * c(0.5, 0.0)
    }
}

/// `sin(theta)cos(phi) sx + sin(theta)sin(phi) sy + cos(theta) sz`.
pub fn bloch_observable(theta: f64, phi: f64) -> Observable {
    let m = sigma_x() * c(theta.sin() * phi.cos(), 0.0)
        + sigma_y() * c(theta.sin() * phi.sin(), 0.0)
        + sigma_z() * c(theta.cos(), 0.0);
    // Unit Bloch vector, so the dichotomic invariant holds by construction.
    Observable::new(1, m).expect("bloch observable is always dichotomic")
}

/// `Tr(rho * O1 x O2 x ...)`; the imaginary part must vanish.
pub fn expectation(rho: &DensityMatrix, per_site: &[Observable]) -> Result<f64> {
    let total: usize = per_site.iter().map(|o| o.arity()).sum();
    if total != rho.num_qubits() {
        return Err(IcError::DimensionMismatch(format!(
            "observable arities sum to {total}, state has {} qubits",
            rho.num_qubits()
        )));
    }
    let mats: Vec<ComplexMatrix> = per_site.iter().map(|o| o.matrix().clone()).collect();
    let op = kron_all(&mats);
    let val = (rho.matrix() * op).trace();
    debug_assert!(val.im.abs() < 1e-9, "imaginary expectation {}", val.im);
    Ok(val.re)
}

/// Named reference states used as fixtures throughout the crate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NamedState {
    Singlet,
    Ghz(usize),
    W(usize),
    Product(String),
    Plus(usize),
}

impl NamedState {
    /// Parse specs like `singlet`, `ghz3`, `w4`, `plus2`, `product:01`.
    pub fn parse(s: &str) -> Result<Self> {
        if s == "singlet" {
            return Ok(Self::Singlet);
        }
        if let Some(rest) = s.strip_prefix("product:") {
            return Ok(Self::Product(rest.to_string()));
        }
        for (prefix, f) in [
            ("ghz", NamedState::Ghz as fn(usize) -> NamedState),
            ("w", NamedState::W),
            ("plus", NamedState::Plus),
        ] {
            if let Some(num) = s.strip_prefix(prefix) {
                if let Ok(n) = num.parse::<usize>() {
                    return Ok(f(n));
                }
            }
        }
        Err(IcError::UnknownName(s.to_string()))
    }
}

pub fn named_state(name: &NamedState) -> Result<DensityMatrix> {
    let zero = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    match name {
        NamedState::Singlet => {
            // (|01> - |10>)/sqrt(2)
            DensityMatrix::from_state_vector(&[zero, one, -one, zero])
        }
        NamedState::Ghz(n) => {
            check_n(*n)?;
            let dim = 1 << n;
            let mut amps = vec![zero; dim];
            amps[0] = one;
            amps[dim - 1] = one;
            DensityMatrix::from_state_vector(&amps)
        }
        NamedState::W(n) => {
            check_n(*n)?;
            let dim = 1 << n;
            let mut amps = vec![zero; dim];
            for i in 0..*n {
                amps[1 << (n - 1 - i)] = one;
            }
            DensityMatrix::from_state_vector(&amps)
        }
        NamedState::Product(bits) => {
            let n = bits.len();
            check_n(n)?;
            let mut index = 0usize;
            for ch in bits.chars() {
                index <<= 1;
                match ch {
                    '0' => {}
                    '1' => index |= 1,
                    _ => {
                        return Err(IcError::UnknownName(format!(
                            "bad bitstring {bits:?}"
                        )))
                    }
                }
            }
            let mut amps = vec![zero; 1 << n];
            amps[index] = one;
            DensityMatrix::from_state_vector(&amps)
        }
        NamedState::Plus(n) => {
            check_n(*n)?;
            let amps = vec![one; 1 << n];
            DensityMatrix::from_state_vector(&amps)
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(IcError::InvalidArgument(format!(
            "qubit count {n} out of range 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

/// Haar-random pure state: i.i.d. complex Gaussian amplitudes, normalized.
pub fn random_pure_state(num_qubits: usize, seed: u64) -> Result<DensityMatrix> {
    check_n(num_qubits)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 1 << num_qubits;
    let mut amps = Vec::with_capacity(dim);
    for _ in 0..dim {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        amps.push(c(re, im));
    }
    DensityMatrix::from_state_vector(&amps)
}

/// Pure two-qubit Bell state (|00> + |11>)/sqrt(2), optionally padded with
/// extra |0> qubits on the right.
pub fn bell_pair_padded(extra_zeros: usize) -> Result<DensityMatrix> {
    let bell = named_state(&NamedState::Ghz(2))?;
    if extra_zeros == 0 {
        return Ok(bell);
    }
    let pad = named_state(&NamedState::Product("0".repeat(extra_zeros)))?;
    let m = kron(bell.matrix(), pad.matrix());
    DensityMatrix::new(2 + extra_zeros, m)
}
