//! Brute-force reference for the coherence factor.
//!
//! Every momentum pair `(k, −k)` of the fermionised chain spans a
//! four-dimensional Fock space `{|00⟩, |11⟩, |10⟩, |01⟩}`. Fourier
//! transforming the quadratic fermion Hamiltonian gives, per pair,
//!
//! ```text
//! h_k = 2(λ − cos φ_k)(n_k + n_−k) − 2iγ sin φ_k (d_k d_−k + d_k† d_−k†)
//! ```
//!
//! which is built here as a dense matrix, diagonalised numerically and
//! exponentiated through its eigenbasis. Nothing in this module uses the
//! dispersion or the Bogoliubov angles from [`crate::spectrum`].

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::coherence::{product_of_factors, PairSelector};
use crate::error::{Error, Result};
use crate::spectrum::{ChainParams, InitialChainState};

pub type ComplexAmplitude = Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Index of `|00⟩` and `|11⟩` in the pair basis.
const EMPTY: usize = 0;
const PAIRED: usize = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ModePairHamiltonian {
    pub k: usize,
    /// Basis order `|00⟩, |11⟩, |10⟩, |01⟩`.
    pub matrix: Matrix4<Complex64>,
}

pub fn build_mode_hamiltonian(params: &ChainParams, lambda_eff: f64, k: usize) -> Result<ModePairHamiltonian> {
    if k == 0 || k > (params.n_sites() - 1) / 2 {
        return Err(Error::ModeOutOfGrid { k, max: (params.n_sites() - 1) / 2, n_sites: params.n_sites() });
    }
    if !lambda_eff.is_finite() {
        return Err(Error::NonFinite { name: "lambda_eff", value: lambda_eff });
    }
    let phi = std::f64::consts::TAU * (k as f64) / (params.n_sites() as f64);
    let hopping = -2.0 * phi.cos();
    let field = 2.0 * lambda_eff;
    // single occupation of either momentum costs `field + hopping`
    let single = field + hopping;
    let pairing = Complex64::new(0.0, 2.0 * params.gamma() * phi.sin());

    let mut m = Matrix4::from_element(ZERO);
    m[(PAIRED, PAIRED)] = Complex64::from(2.0 * single);
    m[(2, 2)] = Complex64::from(single);
    m[(3, 3)] = Complex64::from(single);
    m[(EMPTY, PAIRED)] = pairing;
    m[(PAIRED, EMPTY)] = pairing.conj();
    Ok(ModePairHamiltonian { k, matrix: m })
}

impl ModePairHamiltonian {
    pub fn is_hermitian(&self, tol: f64) -> bool {
        (self.matrix - self.matrix.adjoint()).iter().all(|z| z.norm() <= tol)
    }

    /// Amplitude `⟨00|h|11⟩`.
    pub fn pairing(&self) -> Complex64 {
        self.matrix[(EMPTY, PAIRED)]
    }

    /// Same Hamiltonian with the pairing term negated.
    pub fn with_flipped_pairing(&self) -> Self {
        let mut matrix = self.matrix;
        matrix[(EMPTY, PAIRED)] = -matrix[(EMPTY, PAIRED)];
        matrix[(PAIRED, EMPTY)] = -matrix[(PAIRED, EMPTY)];
        Self { k: self.k, matrix }
    }

    /// Same Hamiltonian shifted by `offset · 1`.
    pub fn shifted(&self, offset: f64) -> Self {
        Self { k: self.k, matrix: self.matrix + Matrix4::identity() * Complex64::from(offset) }
    }

    pub fn even_block(&self) -> Matrix2<Complex64> {
        self.matrix.fixed_view::<2, 2>(0, 0).into_owned()
    }

    /// Difference of the two eigenvalues of the parity-even block.
    pub fn even_sector_gap(&self) -> f64 {
        let eig = SymmetricEigen::new(self.even_block());
        (eig.eigenvalues[0] - eig.eigenvalues[1]).abs()
    }

    fn eigen(&self) -> Eigensystem {
        Eigensystem::new(&self.matrix)
    }
}

/// Eigenpairs sorted by ascending energy.
#[derive(Debug, Clone)]
struct Eigensystem {
    values: [f64; 4],
    vectors: Matrix4<Complex64>,
}

impl Eigensystem {
    fn new(m: &Matrix4<Complex64>) -> Self {
        let eig = SymmetricEigen::new(*m);
        let mut order = [0usize, 1, 2, 3];
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let mut values = [0.0; 4];
        let mut vectors = Matrix4::from_element(ZERO);
        for (dst, &src) in order.iter().enumerate() {
            values[dst] = eig.eigenvalues[src];
            vectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        Self { values, vectors }
    }

    /// `exp(−i h t)`.
    fn propagator(&self, t: f64) -> Matrix4<Complex64> {
        let phases = Matrix4::from_diagonal(&Vector4::from_iterator(
            self.values.iter().map(|&e| Complex64::from_polar(1.0, -e * t)),
        ));
        self.vectors * phases * self.vectors.adjoint()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub vector: Vector4<Complex64>,
    pub energy: f64,
    /// Weight on `{|00⟩, |11⟩}`.
    pub even_weight: f64,
}

impl GroundState {
    /// `|⟨11|G⟩| / |⟨00|G⟩|`, undefined when the empty amplitude vanishes.
    pub fn pair_amplitude_ratio(&self) -> Option<f64> {
        let u = self.vector[EMPTY].norm();
        (u > 1e-300).then(|| self.vector[PAIRED].norm() / u)
    }
}

/// Rotate so the first non-negligible component is real and positive.
fn fix_phase(mut v: Vector4<Complex64>) -> Vector4<Complex64> {
    if let Some(first) = v.iter().find(|z| z.norm() > 1e-12).copied() {
        let phase = first.conj() / first.norm();
        v *= phase;
    }
    v
}

/// Lowest eigenvector. A degenerate ground level is resolved by projecting
/// the basis vectors, in basis order, onto the degenerate eigenspace and
/// keeping the first non-vanishing projection.
pub fn ground_state(h: &ModePairHamiltonian) -> GroundState {
    let eig = h.eigen();
    let energy = eig.values[0];
    let scale = 1.0 + eig.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let degenerate: Vec<usize> = (0..4).filter(|&i| eig.values[i] - energy <= 1e-12 * scale).collect();

    let vector = if degenerate.len() == 1 {
        eig.vectors.column(0).into_owned()
    } else {
        let mut projector = Matrix4::from_element(ZERO);
        for &i in &degenerate {
            let c = eig.vectors.column(i);
            projector += c * c.adjoint();
        }
        (0..4)
            .map(|i| projector.column(i).into_owned())
            .find(|c| c.norm() > 1e-6)
            .map(|c| c.normalize())
            .unwrap_or_else(|| eig.vectors.column(0).into_owned())
    };
    let vector = fix_phase(vector);
    let even_weight = vector[EMPTY].norm_sqr() + vector[PAIRED].norm_sqr();
    if even_weight < 1.0 - 1e-12 {
        log::warn!("mode k={} has ground state outside the even sector (weight {even_weight})", h.k);
    }
    GroundState { vector, energy, even_weight }
}

fn initial_vector(params: &ChainParams, k: usize) -> Result<Vector4<Complex64>> {
    Ok(match params.initial_state() {
        InitialChainState::Ground => ground_state(&build_mode_hamiltonian(params, params.lambda(), k)?).vector,
        InitialChainState::Polarized => Vector4::new(Complex64::from(1.0), ZERO, ZERO, ZERO),
    })
}

/// `z_k = ⟨ψ_k| e^{+i h_k(λ₂) t} e^{−i h_k(λ₁) t} |ψ_k⟩` for the initial
/// pair state `ψ_k` selected by `params.initial_state()`.
pub fn mode_overlap(params: &ChainParams, lambda1: f64, lambda2: f64, k: usize, t: f64) -> Result<ComplexAmplitude> {
    let mode = ModeEcho::new(params, lambda1, lambda2, k)?;
    Ok(mode.overlap(t))
}

#[derive(Debug, Clone)]
struct ModeEcho {
    initial: Vector4<Complex64>,
    forward: Eigensystem,
    backward: Eigensystem,
}

impl ModeEcho {
    fn new(params: &ChainParams, lambda1: f64, lambda2: f64, k: usize) -> Result<Self> {
        Ok(Self {
            initial: initial_vector(params, k)?,
            forward: build_mode_hamiltonian(params, lambda1, k)?.eigen(),
            backward: build_mode_hamiltonian(params, lambda2, k)?.eigen(),
        })
    }

    fn overlap(&self, t: f64) -> Complex64 {
        // both propagators are the identity
        if t == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        let evolved = self.backward.propagator(t).adjoint() * (self.forward.propagator(t) * self.initial);
        self.initial.dotc(&evolved)
    }
}

/// Precomputed per-mode eigensystems for one `(params, pair)`.
#[derive(Debug, Clone)]
pub struct OracleEcho {
    modes: Vec<ModeEcho>,
}

impl OracleEcho {
    pub fn new(params: &ChainParams, pair: PairSelector) -> Result<Self> {
        let (lambda1, lambda2) = pair.dressed_fields(params);
        let modes = (1..=(params.n_sites() - 1) / 2)
            .into_par_iter()
            .map(|k| ModeEcho::new(params, lambda1, lambda2, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { modes })
    }

    pub fn overlaps(&self, t: f64) -> Vec<ComplexAmplitude> {
        self.modes.iter().map(|m| m.overlap(t)).collect()
    }

    pub fn at(&self, t: f64) -> f64 {
        product_of_factors(self.modes.iter().map(|m| m.overlap(t).norm().min(1.0)))
    }
}

pub fn oracle_coherence(params: &ChainParams, pair: PairSelector, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::InvalidTimes(format!("non-finite time {t}")));
    }
    Ok(OracleEcho::new(params, pair)?.at(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherence::{coherence_factor, mode_factor_relative};
    use crate::spectrum::{mode_data, shifted_lambda, BasisIndex};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn params(n: usize, gamma: f64, lambda: f64, g: f64) -> ChainParams {
        ChainParams::new(n, gamma, lambda, g).unwrap()
    }

    #[test]
    fn hamiltonian_structure() {
        let p = params(101, 0.0, 1.0, 0.0);
        let h = build_mode_hamiltonian(&p, 1.2, 5).unwrap();
        assert!(h.is_hermitian(1e-14));
        assert_eq!(h.pairing(), ZERO);
        let p = params(101, 0.7, 1.0, 0.0);
        let h = build_mode_hamiltonian(&p, 1.2, 5).unwrap();
        assert!(h.is_hermitian(1e-14));
        for (i, j) in [(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
            assert_eq!(h.matrix[(i, j)], ZERO);
        }
        let phi = std::f64::consts::TAU * 5.0 / 101.0;
        assert_abs_diff_eq!(h.pairing().norm(), 2.0 * 0.7 * phi.sin(), epsilon = 1e-15);
        let eps = 1.2 - phi.cos();
        assert_abs_diff_eq!((h.matrix[(1, 1)] - h.matrix[(0, 0)]).re, 4.0 * eps, epsilon = 1e-14);
    }

    #[test]
    fn largest_pairing_at_largest_sine() {
        let p = params(101, 1.0, 1.0, 0.0);
        let amps: Vec<f64> = (1..=50).map(|k| build_mode_hamiltonian(&p, 1.0, k).unwrap().pairing().norm()).collect();
        let kmax = (1..=50).max_by(|&a, &b| amps[a - 1].total_cmp(&amps[b - 1])).unwrap();
        // sin(2πk/101) peaks at k = 25
        assert_eq!(kmax, 25);
    }

    #[test]
    fn gap_matches_dispersion() {
        let p = params(101, 1.0, 1.0, 0.0);
        let h = build_mode_hamiltonian(&p, 1.15, 7).unwrap();
        let m = mode_data(&p, 1.15, 7).unwrap();
        assert_abs_diff_eq!(h.even_sector_gap(), 2.0 * m.omega, epsilon = 1e-10);
    }

    #[test]
    fn rejects_bad_mode() {
        let p = params(5, 1.0, 1.0, 0.0);
        assert!(build_mode_hamiltonian(&p, 1.0, 0).is_err());
        assert!(build_mode_hamiltonian(&p, 1.0, 3).is_err());
    }

    #[test]
    fn ground_state_limits() {
        let p = params(11, 0.0, 1.0, 0.0);
        // ε_k = λ − cos φ_k > 0
        let gs = ground_state(&build_mode_hamiltonian(&p, 1.5, 2).unwrap());
        assert_abs_diff_eq!(gs.vector[0].re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(gs.vector.norm(), 1.0, epsilon = 1e-14);
        // ε_k < 0
        let gs = ground_state(&build_mode_hamiltonian(&p, -1.5, 2).unwrap());
        assert_abs_diff_eq!(gs.vector[1].norm(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(gs.vector[1].im, 0.0, epsilon = 1e-14);

        let p = params(11, 1.0, 1.0, 0.0);
        let lam = (std::f64::consts::TAU * 3.0 / 11.0).cos();
        let gs = ground_state(&build_mode_hamiltonian(&p, lam, 3).unwrap());
        assert_abs_diff_eq!(gs.vector[0].norm_sqr(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(gs.vector[1].norm_sqr(), 0.5, epsilon = 1e-12);
        assert!(gs.vector[0].im.abs() < 1e-15 && gs.vector[0].re > 0.0);
    }

    #[test]
    fn degenerate_ground_level_is_deterministic() {
        let p = params(7, 0.0, 1.0, 0.0);
        let lam = (std::f64::consts::TAU * 2.0 / 7.0).cos();
        let h = build_mode_hamiltonian(&p, lam, 2).unwrap();
        let a = ground_state(&h);
        let b = ground_state(&h);
        assert_eq!(a, b);
        assert_abs_diff_eq!(a.vector.norm(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a.vector[0].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn overlap_trivial_cases() {
        let p = params(11, 1.0, 1.0, 0.0);
        assert_abs_diff_eq!(mode_overlap(&p, 1.1, 0.9, 3, 0.0).unwrap().norm(), 1.0, epsilon = 1e-14);
        for t in [0.3, 2.0, 50.0] {
            assert_abs_diff_eq!(mode_overlap(&p, 1.1, 1.1, 3, t).unwrap().norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn overlap_matches_closed_form_mode() {
        let p = params(5, 1.0, 1.0, 0.05);
        let j1 = BasisIndex::new(1).unwrap();
        let j2 = BasisIndex::new(2).unwrap();
        let (l1, l2) = (shifted_lambda(1.0, 0.05, j1), shifted_lambda(1.0, 0.05, j2));
        let z = mode_overlap(&p, l1, l2, 1, 10.0).unwrap();
        let reference = mode_data(&p, 1.0, 1).unwrap().theta;
        let closed =
            mode_factor_relative(&mode_data(&p, l1, 1).unwrap(), &mode_data(&p, l2, 1).unwrap(), reference, 10.0)
                .unwrap();
        assert_abs_diff_eq!(z.norm(), closed, epsilon = 1e-9);
    }

    #[test]
    fn oracle_trivial_cases() {
        let pair = PairSelector::default();
        let p = params(21, 1.0, 1.0, 0.05);
        assert_abs_diff_eq!(oracle_coherence(&p, pair, 0.0).unwrap(), 1.0, epsilon = 1e-13);
        let xx = params(21, 0.0, 1.0, 0.05);
        for t in [1.0, 10.0, 60.0] {
            assert_abs_diff_eq!(oracle_coherence(&xx, pair, t).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn oracle_tracks_closed_form_on_curve() {
        let pair = PairSelector::default();
        for initial in [InitialChainState::Ground, InitialChainState::Polarized] {
            let p = params(11, 1.0, 1.0, 0.05).with_initial_state(initial);
            let oracle = OracleEcho::new(&p, pair).unwrap();
            for i in 0..=100 {
                let t = i as f64;
                let closed = coherence_factor(&p, pair, t).unwrap();
                assert_abs_diff_eq!(oracle.at(t), closed, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn ground_and_polarized_echoes_differ() {
        let pair = PairSelector::default();
        let p = params(5, 1.0, 1.0, 0.05);
        let ground = oracle_coherence(&p, pair, 10.0).unwrap();
        let pol = oracle_coherence(&p.with_initial_state(InitialChainState::Polarized), pair, 10.0).unwrap();
        assert!((ground - pol).abs() > 0.1);
    }

    proptest! {
        #[test]
        fn convention_invariance(
            half in 1usize..40,
            kfrac in 0.0f64..1.0,
            gamma in -2.0f64..2.0,
            lam in -3.0f64..3.0,
            dl in -0.3f64..0.3,
            offset in -5.0f64..5.0,
            t in 0.0f64..50.0,
        ) {
            let p = params(2 * half + 1, gamma, lam, 0.0);
            let k = 1 + ((kfrac * p.n_modes() as f64) as usize).min(p.n_modes() - 1);
            let psi = initial_vector(&p, k).unwrap();
            let z = |h1: &ModePairHamiltonian, h2: &ModePairHamiltonian| {
                let e = h2.eigen().propagator(t).adjoint() * (h1.eigen().propagator(t) * psi);
                psi.dotc(&e).norm()
            };
            let h1 = build_mode_hamiltonian(&p, lam + dl, k).unwrap();
            let h2 = build_mode_hamiltonian(&p, lam - dl, k).unwrap();
            let base = z(&h1, &h2);
            prop_assert!(base <= 1.0 + 1e-12);
            prop_assert!((z(&h1.shifted(offset), &h2.shifted(offset)) - base).abs() < 1e-9);
            // flipping the pairing sign maps the ground state by a parity phase
            let f1 = h1.with_flipped_pairing();
            let f2 = h2.with_flipped_pairing();
            let g0 = build_mode_hamiltonian(&p, lam, k).unwrap().with_flipped_pairing();
            let phi = ground_state(&g0).vector;
            let e = f2.eigen().propagator(t).adjoint() * (f1.eigen().propagator(t) * phi);
            let flipped = phi.dotc(&e).norm();
            if p.initial_state() == InitialChainState::Ground {
                prop_assert!((flipped - base).abs() < 1e-9);
            }
        }
    }
}
