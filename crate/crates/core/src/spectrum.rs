//! Kinematics of the fermionised XY chain.
//!
//! For an odd chain of `N` sites the positive momenta are `k = 1..=(N-1)/2`
//! with phase `φ_k = 2πk/N`. A dressed field `λ_eff` gives
//!
//! ```text
//! ε_k = λ_eff − cos φ_k
//! Ω_k = 2·sqrt(ε_k² + γ²·sin² φ_k)
//! cos θ_k = 2·ε_k / Ω_k
//! ```

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// State of the chain at `t = 0`.
///
/// `Ground` is the ground state of the undressed chain `H_E(λ)`.
/// `Polarized` is the fully polarised state (all spins along `+z`), i.e. the
/// vacuum of every momentum-pair fermion; the per-mode closed form with
/// absolute Bogoliubov angles describes exactly this state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialChainState {
    #[default]
    Ground,
    Polarized,
}

impl std::str::FromStr for InitialChainState {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "ground" => Ok(Self::Ground),
            "polarized" | "polarised" => Ok(Self::Polarized),
            other => Err(format!("unknown initial chain state `{other}` (expected ground|polarized)")),
        }
    }
}

/// Physical parameters of the chain and its coupling to the central qubits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    n_sites: usize,
    gamma: f64,
    lambda: f64,
    g: f64,
    #[serde(default)]
    initial_state: InitialChainState,
}

fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { name, value })
    }
}

fn check_sites(n_sites: usize) -> Result<usize> {
    if n_sites >= 3 && n_sites % 2 == 1 {
        Ok(n_sites)
    } else {
        Err(Error::InvalidChainLength(n_sites))
    }
}

impl ChainParams {
    pub fn new(n_sites: usize, gamma: f64, lambda: f64, g: f64) -> Result<Self> {
        Ok(Self {
            n_sites: check_sites(n_sites)?,
            gamma: finite("gamma", gamma)?,
            lambda: finite("lambda", lambda)?,
            g: finite("g", g)?,
            initial_state: InitialChainState::Ground,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn initial_state(&self) -> InitialChainState {
        self.initial_state
    }

    /// Number of positive momenta, `(N-1)/2`.
    pub fn n_modes(&self) -> usize {
        (self.n_sites - 1) / 2
    }

    pub fn with_n_sites(self, n_sites: usize) -> Result<Self> {
        Ok(Self { n_sites: check_sites(n_sites)?, ..self })
    }

    pub fn with_gamma(self, gamma: f64) -> Result<Self> {
        Ok(Self { gamma: finite("gamma", gamma)?, ..self })
    }

    pub fn with_lambda(self, lambda: f64) -> Result<Self> {
        Ok(Self { lambda: finite("lambda", lambda)?, ..self })
    }

    pub fn with_g(self, g: f64) -> Result<Self> {
        Ok(Self { g: finite("g", g)?, ..self })
    }

    pub fn with_initial_state(self, initial_state: InitialChainState) -> Self {
        Self { initial_state, ..self }
    }

    /// Momentum phase `2πk/N`.
    pub fn phase(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.n_sites as f64
    }

    pub(crate) fn check_mode(&self, k: usize) -> Result<()> {
        if (1..=self.n_modes()).contains(&k) {
            Ok(())
        } else {
            Err(Error::ModeOutOfGrid { k, max: self.n_modes(), n_sites: self.n_sites })
        }
    }
}

/// One of the eight product eigenstates of `σ_A^z + σ_B^z + σ_C^z`.
///
/// Ordering: |+++⟩, |−−−⟩, |++−⟩, |+−+⟩, |−++⟩, |+−−⟩, |−+−⟩, |−−+⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct BasisIndex(u8);

/// `σ^z` eigenvalues of qubits A, B, C for each basis state.
const SPINS: [[i8; 3]; 8] =
    [[1, 1, 1], [-1, -1, -1], [1, 1, -1], [1, -1, 1], [-1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]];

impl BasisIndex {
    pub fn new(j: usize) -> Result<Self> {
        if (1..=8).contains(&j) {
            Ok(Self(j as u8))
        } else {
            Err(Error::BasisIndexOutOfRange(j))
        }
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    /// Zero-based position in the eight-state ordering.
    pub fn offset(self) -> usize {
        self.0 as usize - 1
    }

    pub fn all() -> impl Iterator<Item = BasisIndex> {
        (1..=8u8).map(BasisIndex)
    }

    /// `σ^z` eigenvalues (±1) of qubits A, B, C.
    pub fn spins(self) -> [i8; 3] {
        SPINS[self.offset()]
    }

    /// Eigenvalue of `σ_A^z + σ_B^z + σ_C^z`: one of 3, 1, −1, −3.
    pub fn magnetization(self) -> i8 {
        self.spins().iter().sum()
    }
}

impl TryFrom<usize> for BasisIndex {
    type Error = Error;

    fn try_from(j: usize) -> Result<Self> {
        Self::new(j)
    }
}

impl From<BasisIndex> for usize {
    fn from(j: BasisIndex) -> usize {
        j.get()
    }
}

impl std::fmt::Display for BasisIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Positive momentum indices `1..=(N-1)/2`.
pub fn momentum_grid(params: &ChainParams) -> Vec<usize> {
    (1..=params.n_modes()).collect()
}

/// Transverse field seen by the chain when the qubits are in `|j⟩`:
/// `λ + (g/2)·(σ_A^z + σ_B^z + σ_C^z)`.
pub fn shifted_lambda(lambda: f64, g: f64, j: BasisIndex) -> f64 {
    lambda + 0.5 * g * f64::from(j.magnetization())
}

/// Per-mode quantities for one dressed field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeData {
    pub k: usize,
    pub epsilon: f64,
    pub omega: f64,
    /// Bogoliubov angle in `[0, π]`; 0 when `omega == 0`.
    pub theta: f64,
}

pub fn mode_data(params: &ChainParams, lambda_eff: f64, k: usize) -> Result<ModeData> {
    params.check_mode(k)?;
    finite("lambda_eff", lambda_eff)?;
    let phase = params.phase(k);
    let epsilon = lambda_eff - phase.cos();
    let pairing = params.gamma() * phase.sin();
    let omega = 2.0 * (epsilon * epsilon + pairing * pairing).sqrt();
    let theta = if omega == 0.0 { 0.0 } else { (2.0 * epsilon / omega).clamp(-1.0, 1.0).acos() };
    Ok(ModeData { k, epsilon, omega, theta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn bi(j: usize) -> BasisIndex {
        BasisIndex::new(j).unwrap()
    }

    #[test]
    fn grid_small_chains() {
        let p = ChainParams::new(5, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(momentum_grid(&p), vec![1, 2]);
        let p = p.with_n_sites(3).unwrap();
        assert_eq!(momentum_grid(&p), vec![1]);
        let p = p.with_n_sites(101).unwrap();
        let grid = momentum_grid(&p);
        assert_eq!(grid.len(), 50);
        assert_eq!(grid, (1..=50).collect::<Vec<_>>());
    }

    #[test]
    fn rejects_bad_chain_lengths() {
        for n in [0, 1, 2, 4, 100] {
            assert_eq!(ChainParams::new(n, 1.0, 1.0, 0.1), Err(Error::InvalidChainLength(n)));
        }
        assert!(matches!(ChainParams::new(5, f64::NAN, 1.0, 0.1), Err(Error::NonFinite { name: "gamma", .. })));
        assert!(ChainParams::new(5, 1.0, f64::INFINITY, 0.1).is_err());
        assert!(ChainParams::new(5, 1.0, 1.0, f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn basis_index_bounds() {
        assert!(BasisIndex::new(0).is_err());
        assert!(BasisIndex::new(9).is_err());
        assert_eq!(BasisIndex::all().count(), 8);
        assert_eq!(bi(1).spins(), [1, 1, 1]);
        assert_eq!(bi(2).spins(), [-1, -1, -1]);
        let mags: Vec<i8> = BasisIndex::all().map(BasisIndex::magnetization).collect();
        assert_eq!(mags, vec![3, -3, 1, 1, 1, -1, -1, -1]);
    }

    #[test]
    fn dressed_fields() {
        assert_abs_diff_eq!(shifted_lambda(1.0, 0.1, bi(1)), 1.15, epsilon = 1e-15);
        assert_abs_diff_eq!(shifted_lambda(1.0, 0.1, bi(7)), 0.95, epsilon = 1e-15);
        assert_abs_diff_eq!(shifted_lambda(1.0, 0.1, bi(2)), 0.85, epsilon = 1e-15);
        for j in BasisIndex::all() {
            assert_eq!(shifted_lambda(1.0, 0.0, j), 1.0);
        }
        assert_eq!(shifted_lambda(0.3, 0.2, bi(3)), shifted_lambda(0.3, 0.2, bi(4)));
        assert_eq!(shifted_lambda(0.3, 0.2, bi(4)), shifted_lambda(0.3, 0.2, bi(5)));
        assert_eq!(shifted_lambda(0.3, 0.2, bi(6)), shifted_lambda(0.3, 0.2, bi(8)));
    }

    #[test]
    fn mode_at_symmetry_point() {
        let p = ChainParams::new(11, 0.7, 1.0, 0.0).unwrap();
        let k = 3;
        let lam = p.phase(k).cos();
        let m = mode_data(&p, lam, k).unwrap();
        assert_eq!(m.epsilon, 0.0);
        assert_abs_diff_eq!(m.omega, 2.0 * (0.7 * p.phase(k).sin()).abs(), epsilon = 1e-15);
        assert_abs_diff_eq!(m.theta, std::f64::consts::FRAC_PI_2, epsilon = 1e-15);
    }

    #[test]
    fn mode_xx_point() {
        let p = ChainParams::new(21, 0.0, 1.0, 0.0).unwrap();
        for k in momentum_grid(&p) {
            let m = mode_data(&p, 1.4, k).unwrap();
            assert_abs_diff_eq!(m.omega, 2.0 * m.epsilon, epsilon = 1e-15);
            assert_eq!(m.theta, 0.0);
        }
    }

    #[test]
    fn mode_reference_values() {
        // Evaluated independently at 40 significant digits.
        let p = ChainParams::new(101, 1.0, 1.0, 0.0).unwrap();
        let m = mode_data(&p, 1.15, 1).unwrap();
        assert_abs_diff_eq!(m.epsilon, 0.151_934_402_866_405_65, epsilon = 1e-14);
        assert_abs_diff_eq!(m.omega, 0.328_323_782_828_676_6, epsilon = 1e-14);
        assert_abs_diff_eq!(m.theta, 0.388_401_340_106_601_8, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_mode_has_zero_angle() {
        let p = ChainParams::new(7, 0.0, 1.0, 0.0).unwrap();
        let lam = p.phase(2).cos();
        let m = mode_data(&p, lam, 2).unwrap();
        assert_eq!(m.omega, 0.0);
        assert_eq!(m.theta, 0.0);
    }

    #[test]
    fn mode_outside_grid() {
        let p = ChainParams::new(5, 1.0, 1.0, 0.0).unwrap();
        assert!(matches!(mode_data(&p, 1.0, 0), Err(Error::ModeOutOfGrid { .. })));
        assert!(matches!(mode_data(&p, 1.0, 3), Err(Error::ModeOutOfGrid { k: 3, max: 2, n_sites: 5 })));
    }

    proptest! {
        #[test]
        fn grid_length(half in 1usize..1000) {
            let n = 2 * half + 1;
            let p = ChainParams::new(n, 1.0, 1.0, 0.0).unwrap();
            prop_assert_eq!(momentum_grid(&p).len(), (n - 1) / 2);
        }

        #[test]
        fn dispersion_bounds(
            half in 1usize..200,
            kfrac in 0.0f64..1.0,
            gamma in -3.0f64..3.0,
            lam in -4.0f64..4.0,
        ) {
            let n = 2 * half + 1;
            let p = ChainParams::new(n, gamma, 0.0, 0.0).unwrap();
            let k = 1 + ((kfrac * p.n_modes() as f64) as usize).min(p.n_modes() - 1);
            let m = mode_data(&p, lam, k).unwrap();
            let tol = 1e-12 * (1.0 + m.omega);
            prop_assert!(m.omega + tol >= 2.0 * (gamma * p.phase(k).sin()).abs());
            prop_assert!(m.omega + tol >= 2.0 * m.epsilon.abs());
            prop_assert!((0.0..=std::f64::consts::PI).contains(&m.theta));
            if m.theta == 0.0 {
                prop_assert!((m.epsilon - m.omega / 2.0).abs() < 1e-12);
            }
            if m.theta == std::f64::consts::PI {
                prop_assert!((m.epsilon + m.omega / 2.0).abs() < 1e-12);
            }
            if m.omega > 0.0 {
                prop_assert!((m.theta.cos() - 2.0 * m.epsilon / m.omega).abs() < 1e-12);
            }
        }

        #[test]
        fn dressed_field_splittings(lam in -5.0f64..5.0, g in -2.0f64..2.0) {
            let tol = 1e-12 * (1.0 + lam.abs() + g.abs());
            prop_assert!((shifted_lambda(lam, g, bi(1)) - shifted_lambda(lam, g, bi(2)) - 3.0 * g).abs() <= tol);
            prop_assert!((shifted_lambda(lam, g, bi(3)) - shifted_lambda(lam, g, bi(6)) - g).abs() <= tol);
        }
    }
}
