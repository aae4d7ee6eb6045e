//! Closed-form coherence factor `|F(t)|` and the sweeps built on it.
//!
//! Each positive momentum `k` contributes an independent factor. For two
//! dressed fields with dispersions `Ω₁, Ω₂` and Bogoliubov angles `θ₁, θ₂`
//! (measured relative to the angle of the initial chain state)
//!
//! ```text
//! A = cos²(Δθ/2)·cos((Ω₁−Ω₂)t) + sin²(Δθ/2)·cos((Ω₁+Ω₂)t)
//! B = cos(Σθ/2)·cos(Δθ/2)·sin((Ω₁−Ω₂)t) − sin(Σθ/2)·sin(Δθ/2)·sin((Ω₁+Ω₂)t)
//! |F_k(t)| = sqrt(A² + B²)
//! ```
//!
//! and `|F(t)| = ∏_k |F_k(t)|`. `Δθ` does not depend on the reference
//! angle; `Σθ` does. With a zero reference the expression is the echo of
//! the fully polarised chain, with the undressed angle `θ_k(λ)` as reference
//! it is the echo of the chain ground state.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{mode_data, momentum_grid, shifted_lambda, BasisIndex, ChainParams, InitialChainState, ModeData};

/// Field value at the Ising critical point.
pub const CRITICAL_FIELD: f64 = 1.0;

/// Ordered pair `(j, j′)` of central-qubit basis states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairSelector {
    pub j: BasisIndex,
    pub j_prime: BasisIndex,
}

impl PairSelector {
    pub fn new(j: usize, j_prime: usize) -> Result<Self> {
        Ok(Self { j: BasisIndex::new(j)?, j_prime: BasisIndex::new(j_prime)? })
    }

    pub fn swapped(self) -> Self {
        Self { j: self.j_prime, j_prime: self.j }
    }

    /// Dressed fields `(λ_j, λ_j′)`.
    pub fn dressed_fields(&self, params: &ChainParams) -> (f64, f64) {
        (shifted_lambda(params.lambda(), params.g(), self.j), shifted_lambda(params.lambda(), params.g(), self.j_prime))
    }
}

impl Default for PairSelector {
    fn default() -> Self {
        Self { j: BasisIndex::new(1).unwrap(), j_prime: BasisIndex::new(2).unwrap() }
    }
}

impl std::fmt::Display for PairSelector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{}", self.j, self.j_prime)
    }
}

/// Single-mode factor with absolute Bogoliubov angles (polarised chain).
pub fn mode_factor(mode1: &ModeData, mode2: &ModeData, t: f64) -> Result<f64> {
    mode_factor_relative(mode1, mode2, 0.0, t)
}

/// Single-mode factor with both angles measured from `reference_theta`.
pub fn mode_factor_relative(mode1: &ModeData, mode2: &ModeData, reference_theta: f64, t: f64) -> Result<f64> {
    if mode1.k != mode2.k {
        return Err(Error::ModeMismatch(mode1.k, mode2.k));
    }
    Ok(factor_unchecked(mode1, mode2, reference_theta, t))
}

fn factor_unchecked(mode1: &ModeData, mode2: &ModeData, reference_theta: f64, t: f64) -> f64 {
    // identity at t = 0; a gapless mode only occurs at γ = 0, where every factor is 1
    if t == 0.0 || mode1.omega == 0.0 || mode2.omega == 0.0 {
        return 1.0;
    }
    let th1 = mode1.theta - reference_theta;
    let th2 = mode2.theta - reference_theta;
    let (sd, cd) = (0.5 * (th1 - th2)).sin_cos();
    let (ss, cs) = (0.5 * (th1 + th2)).sin_cos();
    let (s_minus, c_minus) = ((mode1.omega - mode2.omega) * t).sin_cos();
    let (s_plus, c_plus) = ((mode1.omega + mode2.omega) * t).sin_cos();
    let a = cd * cd * c_minus + sd * sd * c_plus;
    let b = cs * cd * s_minus - ss * sd * s_plus;
    (a * a + b * b).sqrt().clamp(0.0, 1.0)
}

/// Log-space product of factors in `[0, 1]`; any exact zero gives zero.
pub(crate) fn product_of_factors(factors: impl Iterator<Item = f64>) -> f64 {
    let mut log_sum = 0.0;
    for f in factors {
        if f == 0.0 {
            return 0.0;
        }
        log_sum += f.ln();
    }
    log_sum.exp().clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy)]
struct ModeTriple {
    first: ModeData,
    second: ModeData,
    reference_theta: f64,
}

/// Mode data for one `(params, pair)` combination, reusable across times.
#[derive(Debug, Clone)]
pub struct PairSpectrum {
    params: ChainParams,
    pair: PairSelector,
    modes: Vec<ModeTriple>,
    trivial: bool,
}

impl PairSpectrum {
    pub fn new(params: &ChainParams, pair: PairSelector) -> Result<Self> {
        let (lambda1, lambda2) = pair.dressed_fields(params);
        // without pairing the initial chain state is an eigenstate of both Hamiltonians
        let trivial = lambda1 == lambda2 || params.gamma() == 0.0;
        let mut modes = Vec::with_capacity(params.n_modes());
        if !trivial {
            for k in momentum_grid(params) {
                let reference_theta = match params.initial_state() {
                    InitialChainState::Ground => mode_data(params, params.lambda(), k)?.theta,
                    InitialChainState::Polarized => 0.0,
                };
                modes.push(ModeTriple {
                    first: mode_data(params, lambda1, k)?,
                    second: mode_data(params, lambda2, k)?,
                    reference_theta,
                });
            }
        }
        Ok(Self { params: *params, pair, modes, trivial })
    }

    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    pub fn pair(&self) -> PairSelector {
        self.pair
    }

    /// `|F(t)|`.
    pub fn at(&self, t: f64) -> f64 {
        if self.trivial || t == 0.0 {
            return 1.0;
        }
        product_of_factors(self.modes.iter().map(|m| factor_unchecked(&m.first, &m.second, m.reference_theta, t)))
    }

    /// Per-mode factors at time `t`, ordered by `k`.
    pub fn mode_factors(&self, t: f64) -> Vec<f64> {
        if self.trivial {
            return vec![1.0; self.params.n_modes()];
        }
        self.modes.iter().map(|m| factor_unchecked(&m.first, &m.second, m.reference_theta, t)).collect()
    }
}

fn check_time(t: f64) -> Result<f64> {
    if t.is_finite() {
        Ok(t)
    } else {
        Err(Error::InvalidTimes(format!("non-finite time {t}")))
    }
}

pub fn coherence_factor(params: &ChainParams, pair: PairSelector, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(PairSpectrum::new(params, pair)?.at(t))
}

/// `|F(t)|` sampled on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherenceSeries {
    pub params: ChainParams,
    pub pair: PairSelector,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl CoherenceSeries {
    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `(t, |F|)` at the first minimum.
    pub fn argmin(&self) -> Option<(f64, f64)> {
        self.times.iter().zip(&self.values).fold(None, |best: Option<(f64, f64)>, (&t, &v)| match best {
            Some((_, bv)) if bv <= v => best,
            _ => Some((t, v)),
        })
    }
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    for (i, &t) in times.iter().enumerate() {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidTimes(format!("time {t} at index {i} is not a nonnegative number")));
        }
        if i > 0 && t < times[i - 1] {
            return Err(Error::InvalidTimes(format!("times not sorted at index {i}")));
        }
    }
    Ok(())
}

pub fn coherence_series(params: &ChainParams, pair: PairSelector, times: &[f64]) -> Result<CoherenceSeries> {
    check_times(times)?;
    let spectrum = PairSpectrum::new(params, pair)?;
    Ok(CoherenceSeries {
        params: *params,
        pair,
        times: times.to_vec(),
        values: times.iter().map(|&t| spectrum.at(t)).collect(),
    })
}

/// Uniform grid `start, start+step, …` up to `stop` (inclusive within rounding).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl LinearRange {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return Err(Error::InvalidRange(format!("non-finite bound in {start}:{stop}:{step}")));
        }
        if step <= 0.0 {
            return Err(Error::InvalidRange(format!("step must be positive, got {step}")));
        }
        if start > stop {
            return Err(Error::InvalidRange(format!("start {start} exceeds stop {stop}")));
        }
        Ok(Self { start, stop, step })
    }

    /// Single point `value`.
    pub fn point(value: f64) -> Result<Self> {
        Self::new(value, value, 1.0)
    }

    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Samples `start + i·step`; computed by multiplication so that a grid
    /// with half the step reproduces every point of the coarser one.
    pub fn samples(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.start + i as f64 * self.step).collect()
    }
}

impl std::fmt::Display for LinearRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Lambda,
    Gamma,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Lambda => "lambda",
            SweepAxis::Gamma => "gamma",
        }
    }

    fn apply(self, params: &ChainParams, value: f64) -> Result<ChainParams> {
        match self {
            SweepAxis::Lambda => params.with_lambda(value),
            SweepAxis::Gamma => params.with_gamma(value),
        }
    }
}

/// `|F|` over (field or anisotropy) × time, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepGrid {
    pub axis: SweepAxis,
    pub axis_values: Vec<f64>,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl SweepGrid {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.times.len() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let n = self.times.len();
        &self.values[row * n..(row + 1) * n]
    }

    pub fn row_min(&self, row: usize) -> f64 {
        self.row(row).iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn sweep(
    params: &ChainParams,
    pair: PairSelector,
    axis: SweepAxis,
    axis_values: &[f64],
    times: &[f64],
) -> Result<SweepGrid> {
    if axis_values.is_empty() || times.is_empty() {
        return Err(Error::InvalidRange("sweep needs at least one axis value and one time".into()));
    }
    check_times(times)?;
    let rows = axis_values
        .par_iter()
        .map(|&v| {
            let spectrum = PairSpectrum::new(&axis.apply(params, v)?, pair)?;
            Ok(times.iter().map(|&t| spectrum.at(t)).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepGrid { axis, axis_values: axis_values.to_vec(), times: times.to_vec(), values: rows.concat() })
}

/// One series per chain length, all other parameters fixed.
pub fn size_scan(
    params: &ChainParams,
    pair: PairSelector,
    sizes: &[usize],
    times: &[f64],
) -> Result<Vec<CoherenceSeries>> {
    let variants = sizes.iter().map(|&n| params.with_n_sites(n)).collect::<Result<Vec<_>>>()?;
    check_times(times)?;
    variants.par_iter().map(|p| coherence_series(p, pair, times)).collect()
}

/// How the `γ/N → γ/(mN)` part of the scaling rule is realised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingMode {
    /// Keep γ, grow the chain to the odd length nearest `m·N`.
    #[default]
    ScaleN,
    /// Keep N, shrink the anisotropy to `γ/m`.
    ScaleGamma,
}

impl std::str::FromStr for ScalingMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "scale-n" | "n" => Ok(Self::ScaleN),
            "scale-gamma" | "gamma" => Ok(Self::ScaleGamma),
            other => Err(format!("unknown scaling mode `{other}` (expected scale-n|scale-gamma)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRule {
    m: f64,
    mode: ScalingMode,
}

impl ScalingRule {
    pub fn new(m: f64, mode: ScalingMode) -> Result<Self> {
        if m.is_finite() && m > 0.0 {
            Ok(Self { m, mode })
        } else {
            Err(Error::InvalidScale(m))
        }
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn mode(&self) -> ScalingMode {
        self.mode
    }
}

/// Odd integer nearest `x` (ties go up), at least 3.
pub fn nearest_odd(x: f64) -> usize {
    let r = x.round();
    let n = if (r as i64).rem_euclid(2) == 1 {
        r
    } else if x >= r {
        r + 1.0
    } else {
        r - 1.0
    };
    (n.max(3.0)) as usize
}

/// Maps `(params, t)` to `(params′, m·t)` with `δ → δ/m`, `g → g/m` and
/// either `N → ≈m·N` or `γ → γ/m`, where `δ = λ_c − λ`.
pub fn apply_scaling(params: &ChainParams, t: f64, rule: ScalingRule) -> Result<(ChainParams, f64)> {
    let m = rule.m;
    if m == 1.0 {
        return Ok((*params, t));
    }
    let delta = CRITICAL_FIELD - params.lambda();
    let scaled = params.with_lambda(CRITICAL_FIELD - delta / m)?.with_g(params.g() / m)?;
    let scaled = match rule.mode {
        ScalingMode::ScaleN => scaled.with_n_sites(nearest_odd(m * params.n_sites() as f64))?,
        ScalingMode::ScaleGamma => scaled.with_gamma(params.gamma() / m)?,
    };
    Ok((scaled, m * t))
}

/// Original and rescaled curves side by side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingComparison {
    pub rule: ScalingRule,
    pub base_params: ChainParams,
    pub scaled_params: ChainParams,
    pub times: Vec<f64>,
    pub scaled_times: Vec<f64>,
    pub base: Vec<f64>,
    pub scaled: Vec<f64>,
    /// `max_i |base_i − scaled_i|`.
    pub residual: f64,
    /// Time at which the residual is attained.
    pub residual_at: f64,
}

pub fn scaling_comparison(
    params: &ChainParams,
    pair: PairSelector,
    rule: ScalingRule,
    times: &[f64],
) -> Result<ScalingComparison> {
    check_times(times)?;
    let (scaled_params, _) = apply_scaling(params, 0.0, rule)?;
    let scaled_times =
        times.iter().map(|&t| apply_scaling(params, t, rule).map(|(_, ts)| ts)).collect::<Result<Vec<_>>>()?;
    let base = coherence_series(params, pair, times)?.values;
    let scaled = coherence_series(&scaled_params, pair, &scaled_times)?.values;
    let (residual, residual_at) = base
        .iter()
        .zip(&scaled)
        .zip(times)
        .map(|((a, b), &t)| ((a - b).abs(), t))
        .fold((0.0, times.first().copied().unwrap_or(0.0)), |acc, x| if x.0 > acc.0 { x } else { acc });
    Ok(ScalingComparison {
        rule,
        base_params: *params,
        scaled_params,
        times: times.to_vec(),
        scaled_times,
        base,
        scaled,
        residual,
        residual_at,
    })
}

pub fn scaling_residual(params: &ChainParams, pair: PairSelector, rule: ScalingRule, times: &[f64]) -> Result<f64> {
    Ok(scaling_comparison(params, pair, rule, times)?.residual)
}

/// Upper bound on `Ω₁ + Ω₂` over all modes and basis pairs.
pub fn max_mode_frequency(params: &ChainParams) -> f64 {
    let field = params.lambda().abs() + 1.5 * params.g().abs() + 1.0;
    4.0 * (field * field + params.gamma() * params.gamma()).sqrt()
}

/// Largest time step that samples the fastest mode frequency at least
/// `points_per_period` times per period.
pub fn max_time_step(params: &ChainParams, points_per_period: usize) -> f64 {
    2.0 * std::f64::consts::PI / (max_mode_frequency(params) * points_per_period as f64)
}
