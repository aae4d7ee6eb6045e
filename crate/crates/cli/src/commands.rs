//! One function per subcommand. Each writes its data files, then the manifest.

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context};
use num_complex::Complex64;
use serde::Serialize;
use spinchain_echo::qstate::{
    coherence_matrix, concurrence, evolve_reduced, fidelity_with_pure, npt_negativity, partial_trace,
    von_neumann_entropy, CentralState, Qubit,
};
use spinchain_echo::{
    coherence_series, scaling_comparison, size_scan, sweep, ChainParams, OracleEcho, PairSelector, ScalingComparison,
    ScalingMode, ScalingRule, SweepAxis, SweepGrid,
};

use crate::args::{Cli, CoherenceArgs, Command, FigureArgs, Format, OracleArgs, ScalingArgs, StateArgs};
use crate::config::{Layers, ParamDefaults, RunConfig};
use crate::export::{Manifest, OutputDir, Table};
use crate::plot;

/// Largest chain the matrix oracle is run on.
pub const ORACLE_MAX_SITES: usize = 201;
/// Agreement required between closed form and oracle.
pub const ORACLE_TOLERANCE: f64 = 1e-9;

#[derive(Debug)]
pub struct Outcome {
    pub manifest: Manifest,
    pub out_dir: PathBuf,
    /// `false` only when a check command found a failure.
    pub passed: bool,
}

pub fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let layers = Layers::new(cli.global)?;
    match cli.command {
        Command::Coherence(args) => cmd_coherence(&layers, &args),
        Command::Figure(args) => cmd_figure(&layers, &args),
        Command::OracleCheck(args) => cmd_oracle_check(&layers, &args),
        Command::ScalingCheck(args) => cmd_scaling_check(&layers, &args),
        Command::State(args) => cmd_state(&layers, &args),
    }
}

fn write_table(out: &mut OutputDir, stem: &str, table: &Table, format: Format) -> anyhow::Result<String> {
    match format {
        Format::Csv => {
            let name = format!("{stem}.csv");
            out.write(&name, table.to_csv().as_bytes())?;
            Ok(name)
        }
        Format::Json => {
            let name = format!("{stem}.json");
            out.write(&name, table.to_json()?.as_bytes())?;
            Ok(name)
        }
    }
}

fn finish(out: OutputDir, command: &str, config: &RunConfig, passed: bool) -> anyhow::Result<Outcome> {
    let out_dir = out.root().to_path_buf();
    let manifest = out.finish(command, config)?;
    Ok(Outcome { manifest, out_dir, passed })
}

pub fn cmd_coherence(layers: &Layers, args: &CoherenceArgs) -> anyhow::Result<Outcome> {
    let params = layers.params(ParamDefaults::default())?;
    let mut config = RunConfig::base(layers, params)?;
    let t = layers.range(args.t.as_deref(), layers.file.t.as_deref(), "0:30:0.1", "t")?;
    config.t = Some(t);

    let series = coherence_series(&params, config.pair, &t.samples())?;
    let mut table = Table::new(&["t", "F"]);
    for (&t, &f) in series.times.iter().zip(&series.values) {
        table.push(vec![t, f]);
    }
    let mut out = OutputDir::create(&config.out)?;
    write_table(&mut out, "coherence", &table, config.format)?;
    finish(out, "coherence", &config, true)
}

/// Figure data sets with their built-in parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    LambdaSweep,
    SizeScan,
    GammaSweep,
    Scaling,
}

impl FromStr for Figure {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "3.1" | "lambda-sweep" => Figure::LambdaSweep,
            "3.2" | "size-scan" => Figure::SizeScan,
            "3.3" | "gamma-sweep" => Figure::GammaSweep,
            "3.4-3.5" | "3.4" | "3.5" | "scaling" => Figure::Scaling,
            other => bail!("unknown figure {other:?}; expected 3.1, 3.2, 3.3 or 3.4-3.5"),
        })
    }
}

impl Figure {
    pub fn id(self) -> &'static str {
        match self {
            Figure::LambdaSweep => "3.1",
            Figure::SizeScan => "3.2",
            Figure::GammaSweep => "3.3",
            Figure::Scaling => "3.4-3.5",
        }
    }

    pub fn defaults(self) -> ParamDefaults {
        match self {
            Figure::LambdaSweep => ParamDefaults { n: 101, gamma: 1.0, lambda: 1.0, g: 0.1 },
            Figure::SizeScan | Figure::GammaSweep => ParamDefaults { n: 101, gamma: 1.0, lambda: 1.0, g: 0.05 },
            Figure::Scaling => ParamDefaults { n: 101, gamma: 1.0, lambda: 0.95, g: 0.02 },
        }
    }

    pub fn default_times(self) -> &'static str {
        match self {
            Figure::LambdaSweep | Figure::GammaSweep => "0:30:0.025",
            Figure::SizeScan => "0:100:0.05",
            Figure::Scaling => "0:25:0.01",
        }
    }
}

pub const DEFAULT_SIZES: [usize; 5] = [5, 11, 21, 41, 101];

fn grid_table(grid: &SweepGrid) -> Table {
    let mut table = Table::new(&[grid.axis.name(), "t", "F"]);
    for (i, &v) in grid.axis_values.iter().enumerate() {
        for (j, &t) in grid.times.iter().enumerate() {
            table.push(vec![v, t, grid.get(i, j)]);
        }
    }
    table
}

fn comparison_table(cmp: &ScalingComparison) -> Table {
    let mut table = Table::new(&["t", "F_base", "t_scaled", "F_scaled"]);
    for i in 0..cmp.times.len() {
        table.push(vec![cmp.times[i], cmp.base[i], cmp.scaled_times[i], cmp.scaled[i]]);
    }
    table
}

pub fn cmd_figure(layers: &Layers, args: &FigureArgs) -> anyhow::Result<Outcome> {
    let figure = Figure::from_str(&args.id)?;
    let params = layers.params(figure.defaults())?;
    let mut config = RunConfig::base(layers, params)?;
    config.figure = Some(figure.id().to_string());
    let t = layers.range(args.t.as_deref(), layers.file.t.as_deref(), figure.default_times(), "t")?;
    config.t = Some(t);
    let times = t.samples();
    let pair = config.pair;

    // Tables for the plot script are always CSV; JSON copies are added on request.
    let mut tables: Vec<(String, Table)> = Vec::new();
    let script = match figure {
        Figure::LambdaSweep | Figure::GammaSweep => {
            let (axis, stem, range) = if figure == Figure::LambdaSweep {
                let r = layers.range(
                    args.lambda_range.as_deref(),
                    layers.file.lambda_range.as_deref(),
                    "0:4:0.02",
                    "lambda-range",
                )?;
                config.lambda_range = Some(r);
                (SweepAxis::Lambda, "lambda_sweep", r)
            } else {
                let r = layers.range(
                    args.gamma_range.as_deref(),
                    layers.file.gamma_range.as_deref(),
                    "0:1:0.01",
                    "gamma-range",
                )?;
                config.gamma_range = Some(r);
                (SweepAxis::Gamma, "gamma_sweep", r)
            };
            let grid = sweep(&params, pair, axis, &range.samples(), &times)?;
            tables.push((stem.to_string(), grid_table(&grid)));
            let label = if axis == SweepAxis::Lambda { "lambda" } else { "gamma" };
            let title = match axis {
                SweepAxis::Lambda => format!("N={}, g={}, gamma={}", params.n_sites(), params.g(), params.gamma()),
                SweepAxis::Gamma => format!("N={}, g={}, lambda={}", params.n_sites(), params.g(), params.lambda()),
            };
            plot::heatmap(&format!("{stem}.csv"), &format!("{stem}.png"), label, &title)
        }
        Figure::SizeScan => {
            let sizes = layers.sizes(args.sizes.as_deref(), &DEFAULT_SIZES)?;
            config.sizes = Some(sizes.clone());
            let scans = size_scan(&params, pair, &sizes, &times)?;
            let mut lines = Vec::new();
            for series in &scans {
                let mut table = Table::new(&["t", "F"]);
                for (&t, &f) in series.times.iter().zip(&series.values) {
                    table.push(vec![t, f]);
                }
                let stem = format!("size_scan_N{}", series.params.n_sites());
                lines.push((format!("{stem}.csv"), format!("N={}", series.params.n_sites())));
                tables.push((stem, table));
            }
            let refs: Vec<_> = lines.iter().map(|(f, l)| (f.as_str(), 1, 2, l.clone())).collect();
            let title = format!("g={}, lambda={}, gamma={}", params.g(), params.lambda(), params.gamma());
            plot::curves(&refs, "size_scan.png", &title)
        }
        Figure::Scaling => {
            let m = layers.m(args.m, 4.0);
            let mode = layers.mode(args.mode.as_deref())?;
            config.m = Some(m);
            config.mode = Some(mode);
            let cmp = scaling_comparison(&params, pair, ScalingRule::new(m, mode)?, &times)?;
            tables.push(("scaling".to_string(), comparison_table(&cmp)));
            let s = &cmp.scaled_params;
            plot::curves(
                &[
                    (
                        "scaling.csv",
                        1,
                        2,
                        format!("N={}, lambda={}, g={}", params.n_sites(), params.lambda(), params.g()),
                    ),
                    ("scaling.csv", 1, 4, format!("N={}, lambda={}, g={}, t*{m}", s.n_sites(), s.lambda(), s.g())),
                ],
                "scaling.png",
                &format!("m={m}, {}", mode_name(mode)),
            )
        }
    };

    let mut out = OutputDir::create(&config.out)?;
    for (stem, table) in &tables {
        out.write(&format!("{stem}.csv"), table.to_csv().as_bytes())?;
        if config.format == Format::Json {
            out.write(&format!("{stem}.json"), table.to_json()?.as_bytes())?;
        }
    }
    let script_name = format!("figure_{}.gp", figure.id().replace('.', "_"));
    out.write(&script_name, script.as_bytes())?;
    finish(out, "figure", &config, true)
}

fn mode_name(mode: ScalingMode) -> &'static str {
    match mode {
        ScalingMode::ScaleN => "scale-n",
        ScalingMode::ScaleGamma => "scale-gamma",
    }
}

/// Largest disagreement found by [`oracle_report_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleArgmax {
    pub n_sites: usize,
    pub t: f64,
    pub analytic: f64,
    pub oracle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub tolerance: f64,
    pub sizes: Vec<usize>,
    pub points: usize,
    pub max_abs_diff: f64,
    pub argmax: Option<OracleArgmax>,
    pub pass: bool,
}

/// Closed-form `|F|` on a time grid, as compared against the oracle.
pub fn analytic_series(params: &ChainParams, pair: PairSelector, times: &[f64]) -> anyhow::Result<Vec<f64>> {
    Ok(coherence_series(params, pair, times)?.values)
}

pub fn oracle_report(
    params: &ChainParams,
    pair: PairSelector,
    sizes: &[usize],
    times: &[f64],
) -> anyhow::Result<OracleReport> {
    oracle_report_with(params, pair, sizes, times, analytic_series)
}

/// Same as [`oracle_report`] with the analytic side supplied by the caller,
/// so that a deliberately wrong implementation can be shown to fail.
pub fn oracle_report_with<F>(
    params: &ChainParams,
    pair: PairSelector,
    sizes: &[usize],
    times: &[f64],
    analytic: F,
) -> anyhow::Result<OracleReport>
where
    F: Fn(&ChainParams, PairSelector, &[f64]) -> anyhow::Result<Vec<f64>>,
{
    if let Some(&n) = sizes.iter().find(|&&n| n > ORACLE_MAX_SITES) {
        bail!("oracle check limited to N <= {ORACLE_MAX_SITES}, got N = {n}");
    }
    let mut max_abs_diff = 0.0;
    let mut argmax = None;
    for &n in sizes {
        let p = params.with_n_sites(n)?;
        let closed = analytic(&p, pair, times)?;
        anyhow::ensure!(closed.len() == times.len(), "analytic series has wrong length");
        let echo = OracleEcho::new(&p, pair)?;
        for (&t, &a) in times.iter().zip(&closed) {
            let o = echo.at(t);
            let d = (a - o).abs();
            if argmax.is_none() || d > max_abs_diff || d.is_nan() {
                max_abs_diff = if d.is_nan() { f64::INFINITY } else { d };
                argmax = Some(OracleArgmax { n_sites: n, t, analytic: a, oracle: o });
            }
        }
    }
    Ok(OracleReport {
        tolerance: ORACLE_TOLERANCE,
        sizes: sizes.to_vec(),
        points: sizes.len() * times.len(),
        max_abs_diff,
        argmax,
        pass: max_abs_diff < ORACLE_TOLERANCE,
    })
}

pub fn cmd_oracle_check(layers: &Layers, args: &OracleArgs) -> anyhow::Result<Outcome> {
    let params = layers.params(ParamDefaults::default())?;
    let mut config = RunConfig::base(layers, params)?;
    let t = layers.range(args.t.as_deref(), layers.file.t.as_deref(), "0:100:0.5", "t")?;
    let sizes = layers.sizes(args.sizes.as_deref(), &[params.n_sites()])?;
    config.t = Some(t);
    config.sizes = Some(sizes.clone());

    let report = oracle_report(&params, config.pair, &sizes, &t.samples())?;
    if !report.pass {
        log::error!("closed form and oracle disagree by {}", report.max_abs_diff);
    }
    let mut out = OutputDir::create(&config.out)?;
    out.write_json("oracle_check.json", &report)?;
    finish(out, "oracle-check", &config, report.pass)
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingModeReport {
    pub mode: ScalingMode,
    pub scaled_params: ChainParams,
    pub residual: f64,
    pub residual_at: f64,
    pub curves: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub m: f64,
    pub delta: f64,
    pub base_params: ChainParams,
    pub modes: Vec<ScalingModeReport>,
}

pub fn cmd_scaling_check(layers: &Layers, args: &ScalingArgs) -> anyhow::Result<Outcome> {
    let params = layers.params(Figure::Scaling.defaults())?;
    let mut config = RunConfig::base(layers, params)?;
    let t = layers.range(args.t.as_deref(), layers.file.t.as_deref(), "0:25:0.01", "t")?;
    let m = layers.m(args.m, 4.0);
    config.t = Some(t);
    config.m = Some(m);
    let times = t.samples();

    let mut out = OutputDir::create(&config.out)?;
    let mut modes = Vec::new();
    for mode in [ScalingMode::ScaleN, ScalingMode::ScaleGamma] {
        let cmp = scaling_comparison(&params, config.pair, ScalingRule::new(m, mode)?, &times)?;
        let stem = format!("scaling_{}", mode_name(mode));
        let curves = write_table(&mut out, &stem, &comparison_table(&cmp), config.format)?;
        modes.push(ScalingModeReport {
            mode,
            scaled_params: cmp.scaled_params,
            residual: cmp.residual,
            residual_at: cmp.residual_at,
            curves,
        });
    }
    let report = ScalingReport { m, delta: 1.0 - params.lambda(), base_params: params, modes };
    out.write_json("scaling_check.json", &report)?;
    finish(out, "scaling-check", &config, true)
}

/// `ghz`, `w`, or sixteen numbers `re,im` for the eight basis amplitudes
/// (pairs may be separated by `;`).
pub fn parse_state(s: &str) -> anyhow::Result<CentralState> {
    match s.trim().to_ascii_lowercase().as_str() {
        "ghz" => return Ok(CentralState::ghz()),
        "w" => return Ok(CentralState::w()),
        _ => {}
    }
    let numbers: Vec<f64> = s
        .split([',', ';'])
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<f64>().with_context(|| format!("bad amplitude component {p:?}")))
        .collect::<anyhow::Result<_>>()?;
    anyhow::ensure!(numbers.len() == 16, "expected 8 re,im pairs, got {} numbers", numbers.len());
    let mut amps = [Complex64::new(0.0, 0.0); 8];
    for (a, pair) in amps.iter_mut().zip(numbers.chunks(2)) {
        *a = Complex64::new(pair[0], pair[1]);
    }
    Ok(CentralState::new(amps)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct Partition {
    pub transposed: String,
    pub negativity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairConcurrence {
    pub qubits: String,
    pub concurrence: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StateReport {
    pub t: f64,
    pub params: ChainParams,
    pub amplitudes: Vec<[f64; 2]>,
    pub coherence_matrix: [[f64; 8]; 8],
    pub rho: Vec<Vec<[f64; 2]>>,
    pub negativity: Vec<Partition>,
    pub fidelity: f64,
    pub entropy: Option<f64>,
    pub concurrence: Vec<PairConcurrence>,
    pub warnings: Vec<String>,
}

pub fn state_report(params: &ChainParams, state: &CentralState, t: f64) -> anyhow::Result<StateReport> {
    let f = coherence_matrix(params, t)?;
    let reduced = evolve_reduced(state, &f);
    let rho = &reduced.rho;
    let mut warnings = Vec::new();
    if let Some(w) = reduced.psd_warning {
        warnings.push(format!("density matrix has negative eigenvalue {}", w.min_eigenvalue));
    }
    let negativity = Qubit::ALL
        .iter()
        .map(|&q| Ok(Partition { transposed: format!("{q:?}"), negativity: npt_negativity(rho, &[q])? }))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let entropy = match von_neumann_entropy(rho.matrix()) {
        Ok(s) => Some(s),
        Err(e) => {
            warnings.push(format!("entropy: {e}"));
            None
        }
    };
    let mut pairs = Vec::new();
    for keep in [[Qubit::A, Qubit::B], [Qubit::A, Qubit::C], [Qubit::B, Qubit::C]] {
        let label = format!("{:?}{:?}", keep[0], keep[1]);
        let c = match partial_trace(rho, &keep).and_then(|r| concurrence(&r)) {
            Ok(c) => Some(c),
            Err(e) => {
                warnings.push(format!("concurrence {label}: {e}"));
                None
            }
        };
        pairs.push(PairConcurrence { qubits: label, concurrence: c });
    }
    Ok(StateReport {
        t,
        params: *params,
        amplitudes: state.amplitudes().iter().map(|a| [a.re, a.im]).collect(),
        coherence_matrix: *f.values(),
        rho: rho.to_rows(),
        negativity,
        fidelity: fidelity_with_pure(rho, state)?,
        entropy,
        concurrence: pairs,
        warnings,
    })
}

pub fn cmd_state(layers: &Layers, args: &StateArgs) -> anyhow::Result<Outcome> {
    let params = layers.params(ParamDefaults::default())?;
    let mut config = RunConfig::base(layers, params)?;
    let spec = args.state.clone().or_else(|| layers.file.state.clone()).unwrap_or_else(|| "ghz".into());
    let state = parse_state(&spec)?;
    let t = args.t.unwrap_or(0.0);
    anyhow::ensure!(t.is_finite() && t >= 0.0, "--t must be a nonnegative time, got {t}");
    config.state = Some(spec);
    config.time = Some(t);

    let report = state_report(&params, &state, t)?;
    let mut out = OutputDir::create(&config.out)?;
    out.write_json("state.json", &report)?;
    finish(out, "state", &config, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_ids_and_aliases() {
        assert_eq!(Figure::from_str("3.2").unwrap(), Figure::SizeScan);
        assert_eq!(Figure::from_str("scaling").unwrap(), Figure::Scaling);
        assert_eq!(Figure::from_str("3.5").unwrap(), Figure::Scaling);
        assert!(Figure::from_str("3.6").is_err());
    }

    #[test]
    fn amplitudes_parse() {
        let s = parse_state("1,0; 0,0; 0,0; 0,0; 0,0; 0,0; 0,0; 0,0").unwrap();
        assert_eq!(s.amplitudes()[0], Complex64::new(1.0, 0.0));
        assert!(parse_state("1,0,0,0").is_err());
        assert!(parse_state("1,0,1,0,0,0,0,0,0,0,0,0,0,0,0,0").is_err());
    }

    #[test]
    fn single_time_oracle_is_exact() {
        let p = ChainParams::new(5, 1.0, 1.0, 0.05).unwrap();
        let r = oracle_report(&p, PairSelector::default(), &[5], &[0.0]).unwrap();
        assert_eq!(r.max_abs_diff, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn oracle_size_cap() {
        let p = ChainParams::new(5, 1.0, 1.0, 0.05).unwrap();
        assert!(oracle_report(&p, PairSelector::default(), &[203], &[0.0]).is_err());
    }
}
