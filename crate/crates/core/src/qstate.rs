//! Reduced state of the three central qubits and entanglement measures.
//!
//! Three-qubit matrices are indexed in the central-spin ordering of
//! [`BasisIndex`] (|+++⟩, |−−−⟩, |++−⟩, …). Matrices on one or two qubits,
//! as produced by [`partial_trace`], use the product ordering of the kept
//! qubits with `+` before `−` (e.g. |++⟩, |+−⟩, |−+⟩, |−−⟩).

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::coherence::PairSelector;
use crate::coherence::PairSpectrum;
use crate::error::{Error, Result};
use crate::spectrum::{BasisIndex, ChainParams};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Eigenvalues above `-EIGEN_FLOOR` are treated as zero.
pub const EIGEN_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Qubit {
    A,
    B,
    C,
}

impl Qubit {
    pub const ALL: [Qubit; 3] = [Qubit::A, Qubit::B, Qubit::C];

    #[cfg(test)]
    fn position(self) -> usize {
        self as usize
    }
}

impl std::str::FromStr for Qubit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Qubit::A),
            "B" | "b" => Ok(Qubit::B),
            "C" | "c" => Ok(Qubit::C),
            other => Err(Error::InvalidPartition(format!("unknown qubit `{other}`"))),
        }
    }
}

/// Parses a qubit set such as `"A"`, `"BC"` or `"A,C"`.
pub fn parse_qubits(spec: &str) -> Result<Vec<Qubit>> {
    spec.chars().filter(|c| !matches!(c, ',' | ' ')).map(|c| c.to_string().parse()).collect()
}

/// Amplitudes `c_j = ⟨j|φ⟩` over the central-spin basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralState {
    amplitudes: [Complex64; 8],
}

impl CentralState {
    /// Accepts amplitudes whose squared norm is within 1e-9 of one and
    /// renormalises them.
    pub fn new(amplitudes: [Complex64; 8]) -> Result<Self> {
        let norm_sqr: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(norm_sqr));
        }
        let scale = norm_sqr.sqrt().recip();
        Ok(Self { amplitudes: amplitudes.map(|c| c * scale) })
    }

    pub fn basis(j: BasisIndex) -> Self {
        let mut amplitudes = [ZERO; 8];
        amplitudes[j.offset()] = Complex64::from(1.0);
        Self { amplitudes }
    }

    /// `(|+++⟩ + |−−−⟩)/√2`.
    pub fn ghz() -> Self {
        let a = Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
        let mut amplitudes = [ZERO; 8];
        amplitudes[0] = a;
        amplitudes[1] = a;
        Self { amplitudes }
    }

    /// `(|++−⟩ + |+−+⟩ + |−++⟩)/√3`.
    pub fn w() -> Self {
        let a = Complex64::from(1.0 / 3f64.sqrt());
        let mut amplitudes = [ZERO; 8];
        amplitudes[2..5].fill(a);
        Self { amplitudes }
    }

    pub fn amplitudes(&self) -> &[Complex64; 8] {
        &self.amplitudes
    }

    pub fn density_matrix(&self) -> DensityMatrix {
        let c = DVector::from_row_slice(&self.amplitudes);
        DensityMatrix::unchecked(&c * c.adjoint(), Qubit::ALL.to_vec())
    }
}

/// Symmetric 8×8 matrix of coherence factors `f_{jj′}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherenceMatrix {
    values: [[f64; 8]; 8],
}

impl CoherenceMatrix {
    pub fn ones() -> Self {
        Self { values: [[1.0; 8]; 8] }
    }

    /// Only the `(|1⟩, |2⟩)` coherence set to `f`; every other entry is 1.
    pub fn ghz_only(f: f64) -> Self {
        let mut m = Self::ones();
        m.values[0][1] = f;
        m.values[1][0] = f;
        m
    }

    pub fn get(&self, j: BasisIndex, j_prime: BasisIndex) -> f64 {
        self.values[j.offset()][j_prime.offset()]
    }

    pub fn values(&self) -> &[[f64; 8]; 8] {
        &self.values
    }
}

/// `f_{jj′} = |F(t)|` for every basis pair. The dressed field only depends on
/// the total magnetisation, so at most six distinct off-diagonal values are
/// evaluated.
pub fn coherence_matrix(params: &ChainParams, t: f64) -> Result<CoherenceMatrix> {
    if !t.is_finite() {
        return Err(Error::InvalidTimes(format!("non-finite time {t}")));
    }
    let mut cache: HashMap<(i8, i8), f64> = HashMap::new();
    let mut representative: HashMap<i8, BasisIndex> = HashMap::new();
    for j in BasisIndex::all() {
        representative.entry(j.magnetization()).or_insert(j);
    }
    let mut values = [[1.0; 8]; 8];
    for j in BasisIndex::all() {
        for jp in BasisIndex::all().filter(|jp| *jp > j) {
            let (ma, mb) = (j.magnetization(), jp.magnetization());
            if ma == mb {
                continue;
            }
            let (ra, rb) = (representative[&ma], representative[&mb]);
            let key = if ra < rb { (ma, mb) } else { (mb, ma) };
            let f = match cache.get(&key) {
                Some(&f) => f,
                None => {
                    let (a, b) = if ra < rb { (ra, rb) } else { (rb, ra) };
                    let f = PairSpectrum::new(params, PairSelector { j: a, j_prime: b })?.at(t);
                    cache.insert(key, f);
                    f
                }
            };
            values[j.offset()][jp.offset()] = f;
            values[jp.offset()][j.offset()] = f;
        }
    }
    Ok(CoherenceMatrix { values })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<Complex64>,
    qubits: Vec<Qubit>,
}

/// Bit (0 = `+`, 1 = `−`) of every qubit of `qubits` for basis `index`.
fn index_bits(index: usize, qubits: &[Qubit]) -> Vec<u8> {
    if qubits.len() == 3 {
        BasisIndex::new(index + 1).unwrap().spins().iter().map(|&s| u8::from(s < 0)).collect()
    } else {
        let n = qubits.len();
        (0..n).map(|i| ((index >> (n - 1 - i)) & 1) as u8).collect()
    }
}

fn bits_index(bits: &[u8]) -> usize {
    if bits.len() == 3 {
        BasisIndex::all().position(|j| j.spins().iter().zip(bits).all(|(&s, &b)| u8::from(s < 0) == b)).unwrap()
    } else {
        bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }
}

fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let sym = (m + m.adjoint()) * Complex64::from(0.5);
    let mut values: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

fn trace(m: &DMatrix<Complex64>) -> Complex64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

impl DensityMatrix {
    /// Validates Hermiticity and unit trace (1e-12) and positivity (−1e-10).
    pub fn new(matrix: DMatrix<Complex64>, mut qubits: Vec<Qubit>) -> Result<Self> {
        qubits.sort();
        qubits.dedup();
        if qubits.is_empty() || matrix.nrows() != 1 << qubits.len() || !matrix.is_square() {
            return Err(Error::InvalidDensityMatrix(format!(
                "{}×{} matrix for {} qubits",
                matrix.nrows(),
                matrix.ncols(),
                qubits.len()
            )));
        }
        let herm = (&matrix - matrix.adjoint()).iter().fold(0.0f64, |a, z| a.max(z.norm()));
        if herm > 1e-12 {
            return Err(Error::InvalidDensityMatrix(format!("not Hermitian (deviation {herm})")));
        }
        let tr = trace(&matrix);
        if (tr - Complex64::from(1.0)).norm() > 1e-12 {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr}")));
        }
        let rho = Self { matrix, qubits };
        let min = rho.min_eigenvalue();
        if min < -EIGEN_FLOOR {
            return Err(Error::NegativeEigenvalue(min));
        }
        Ok(rho)
    }

    fn unchecked(matrix: DMatrix<Complex64>, qubits: Vec<Qubit>) -> Self {
        Self { matrix, qubits }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn qubits(&self) -> &[Qubit] {
        &self.qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        trace(&self.matrix)
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Row-major `[re, im]` pairs.
    pub fn to_rows(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| [self.matrix[(i, j)].re, self.matrix[(i, j)].im]).collect())
            .collect()
    }

    fn check_subset(&self, set: &[Qubit]) -> Result<Vec<Qubit>> {
        let mut set = set.to_vec();
        set.sort();
        let before = set.len();
        set.dedup();
        if set.len() != before {
            return Err(Error::InvalidPartition(format!("repeated qubit in {set:?}")));
        }
        if let Some(q) = set.iter().find(|q| !self.qubits.contains(q)) {
            return Err(Error::InvalidPartition(format!("qubit {q:?} is not part of {:?}", self.qubits)));
        }
        Ok(set)
    }
}

/// Negative spectrum of `ρ` beyond the floor, reported by [`evolve_reduced`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsdWarning {
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    pub rho: DensityMatrix,
    pub psd_warning: Option<PsdWarning>,
}

/// `ρ_{jj′} = c_j c_{j′}^* f_{jj′}`.
///
/// The construction keeps Hermiticity and the diagonal. Positivity holds for
/// states whose coherences involve a single pair of dressed fields (GHZ-like);
/// otherwise a negative eigenvalue is reported rather than hidden.
pub fn evolve_reduced(state: &CentralState, f: &CoherenceMatrix) -> ReducedState {
    let c = state.amplitudes();
    let matrix = DMatrix::from_fn(8, 8, |i, j| c[i] * c[j].conj() * f.values[i][j]);
    let rho = DensityMatrix::unchecked(matrix, Qubit::ALL.to_vec());
    let min = rho.min_eigenvalue();
    let psd_warning = (min < -EIGEN_FLOOR).then(|| {
        log::warn!("reduced density matrix is not positive: smallest eigenvalue {min}");
        PsdWarning { min_eigenvalue: min }
    });
    ReducedState { rho, psd_warning }
}

pub fn partial_trace(rho: &DensityMatrix, keep: &[Qubit]) -> Result<DensityMatrix> {
    let keep = rho.check_subset(keep)?;
    if keep.is_empty() {
        return Err(Error::InvalidPartition("nothing to keep".into()));
    }
    if keep.len() == rho.qubits.len() {
        return Ok(rho.clone());
    }
    let kept_pos: Vec<usize> = keep.iter().map(|q| rho.qubits.iter().position(|p| p == q).unwrap()).collect();
    let traced_pos: Vec<usize> = (0..rho.qubits.len()).filter(|i| !kept_pos.contains(i)).collect();
    let dim = 1 << keep.len();
    let mut out = DMatrix::from_element(dim, dim, ZERO);
    for i in 0..rho.dim() {
        let bi = index_bits(i, &rho.qubits);
        for j in 0..rho.dim() {
            let bj = index_bits(j, &rho.qubits);
            if traced_pos.iter().all(|&p| bi[p] == bj[p]) {
                let ki = bits_index(&kept_pos.iter().map(|&p| bi[p]).collect::<Vec<_>>());
                let kj = bits_index(&kept_pos.iter().map(|&p| bj[p]).collect::<Vec<_>>());
                out[(ki, kj)] += rho.matrix[(i, j)];
            }
        }
    }
    Ok(DensityMatrix::unchecked(out, keep))
}

/// Partial transpose over the qubits in `transposed`.
pub fn partial_transpose(rho: &DensityMatrix, transposed: &[Qubit]) -> Result<DMatrix<Complex64>> {
    let set = rho.check_subset(transposed)?;
    if set.is_empty() || set.len() == rho.qubits.len() {
        return Err(Error::InvalidPartition(format!(
            "transposed set {set:?} must be a non-empty proper subset of {:?}",
            rho.qubits
        )));
    }
    let pos: Vec<usize> = set.iter().map(|q| rho.qubits.iter().position(|p| p == q).unwrap()).collect();
    Ok(DMatrix::from_fn(rho.dim(), rho.dim(), |i, j| {
        let mut bi = index_bits(i, &rho.qubits);
        let mut bj = index_bits(j, &rho.qubits);
        for &p in &pos {
            std::mem::swap(&mut bi[p], &mut bj[p]);
        }
        rho.matrix[(bits_index(&bi), bits_index(&bj))]
    }))
}

/// `E = −2 Σ μ⁻` over the negative eigenvalues of the partial transpose.
pub fn npt_negativity(rho: &DensityMatrix, transposed: &[Qubit]) -> Result<f64> {
    let pt = partial_transpose(rho, transposed)?;
    let negative: f64 = hermitian_eigenvalues(&pt).into_iter().filter(|&m| m < -EIGEN_FLOOR).sum();
    Ok(-2.0 * negative)
}

/// `sqrt(⟨φ|ρ|φ⟩)` for a three-qubit `ρ`.
pub fn fidelity_with_pure(rho: &DensityMatrix, phi: &CentralState) -> Result<f64> {
    if rho.qubits.len() != 3 {
        return Err(Error::InvalidDensityMatrix("fidelity needs the three-qubit state".into()));
    }
    let v = DVector::from_row_slice(phi.amplitudes());
    let overlap = v.dotc(&(&rho.matrix * &v)).re;
    Ok(overlap.max(0.0).sqrt().min(1.0))
}

/// `−Tr ρ log₂ ρ` in bits, for a square matrix of any dimension.
pub fn von_neumann_entropy(rho: &DMatrix<Complex64>) -> Result<f64> {
    let mut s = 0.0;
    for p in hermitian_eigenvalues(rho) {
        if p < -EIGEN_FLOOR {
            return Err(Error::NegativeEigenvalue(p));
        }
        if p > 0.0 {
            s -= p * p.log2();
        }
    }
    Ok(s.max(0.0))
}

fn sqrt_psd(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let sym = (m + m.adjoint()) * Complex64::from(0.5);
    let eig = SymmetricEigen::new(sym);
    if let Some(&min) = eig.eigenvalues.iter().find(|&&e| e < -EIGEN_FLOOR) {
        return Err(Error::NegativeEigenvalue(min));
    }
    let roots = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| Complex64::from(e.max(0.0).sqrt())));
    Ok(&eig.eigenvectors * roots * eig.eigenvectors.adjoint())
}

/// Wootters concurrence `max(0, λ₁ − λ₂ − λ₃ − λ₄)`, where `λᵢ²` are the
/// eigenvalues of `ρ ρ̃`, `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`. The spectrum is taken
/// from the Hermitian `√ρ ρ̃ √ρ`, which shares it.
pub fn concurrence(rho2: &DensityMatrix) -> Result<f64> {
    if rho2.qubits.len() != 2 {
        return Err(Error::InvalidDensityMatrix("concurrence needs a two-qubit state".into()));
    }
    let c = Complex64::from;
    // σ_y ⊗ σ_y in the |++⟩, |+−⟩, |−+⟩, |−−⟩ ordering
    #[rustfmt::skip]
    let yy = DMatrix::from_row_slice(
        4,
        4,
        &[
            ZERO, ZERO, ZERO, c(-1.0),
            ZERO, ZERO, c(1.0), ZERO,
            ZERO, c(1.0), ZERO, ZERO,
            c(-1.0), ZERO, ZERO, ZERO,
        ],
    );
    let tilde = &yy * rho2.matrix.conjugate() * &yy;
    let root = sqrt_psd(&rho2.matrix)?;
    let r = &root * tilde * &root;
    let mut lambdas: Vec<f64> = hermitian_eigenvalues(&r).into_iter().map(|m| m.max(0.0).sqrt()).collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}
