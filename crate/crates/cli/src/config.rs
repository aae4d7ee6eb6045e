//! Flag/file merging and the fully resolved run configuration.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use spinchain_echo::{ChainParams, InitialChainState, LinearRange, PairSelector, ScalingMode};

use crate::args::{Format, GlobalArgs};

/// Keys accepted in a `--config` file. Every key mirrors a flag.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<usize>,
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    pub g: Option<f64>,
    pub pair: Option<String>,
    pub initial: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub t: Option<String>,
    pub lambda_range: Option<String>,
    pub gamma_range: Option<String>,
    pub sizes: Option<String>,
    pub m: Option<f64>,
    pub mode: Option<String>,
    pub state: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Built-in defaults for the chain parameters of one command.
#[derive(Debug, Clone, Copy)]
pub struct ParamDefaults {
    pub n: usize,
    pub gamma: f64,
    pub lambda: f64,
    pub g: f64,
}

impl Default for ParamDefaults {
    fn default() -> Self {
        Self { n: 101, gamma: 1.0, lambda: 1.0, g: 0.05 }
    }
}

/// Flags, then file, then built-in default.
#[derive(Debug, Clone, Default)]
pub struct Layers {
    pub flags: GlobalArgs,
    pub file: FileConfig,
}

impl Layers {
    pub fn new(flags: GlobalArgs) -> anyhow::Result<Self> {
        let file = match &flags.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        Ok(Self { flags, file })
    }

    pub fn params(&self, defaults: ParamDefaults) -> anyhow::Result<ChainParams> {
        let f = &self.flags;
        let c = &self.file;
        let n = f.n.or(c.n).unwrap_or(defaults.n);
        let gamma = f.gamma.or(c.gamma).unwrap_or(defaults.gamma);
        let lambda = f.lambda.or(c.lambda).unwrap_or(defaults.lambda);
        let g = f.g.or(c.g).unwrap_or(defaults.g);
        let initial = match f.initial.as_ref().or(c.initial.as_ref()) {
            Some(s) => InitialChainState::from_str(s).map_err(anyhow::Error::msg)?,
            None => InitialChainState::default(),
        };
        Ok(ChainParams::new(n, gamma, lambda, g)?.with_initial_state(initial))
    }

    pub fn pair(&self) -> anyhow::Result<PairSelector> {
        match self.flags.pair.as_ref().or(self.file.pair.as_ref()) {
            Some(s) => parse_pair(s),
            None => Ok(PairSelector::default()),
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.flags.out.clone().or_else(|| self.file.out.clone()).unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn format(&self) -> Format {
        self.flags.format.or(self.file.format).unwrap_or(Format::Csv)
    }

    pub fn range(
        &self,
        flag: Option<&str>,
        file: Option<&str>,
        default: &str,
        name: &str,
    ) -> anyhow::Result<LinearRange> {
        let s = flag.or(file).unwrap_or(default);
        parse_range(s).with_context(|| format!("--{name} {s:?}"))
    }

    pub fn sizes(&self, flag: Option<&str>, default: &[usize]) -> anyhow::Result<Vec<usize>> {
        match flag.or(self.file.sizes.as_deref()) {
            Some(s) => parse_sizes(s),
            None => Ok(default.to_vec()),
        }
    }

    pub fn m(&self, flag: Option<f64>, default: f64) -> f64 {
        flag.or(self.file.m).unwrap_or(default)
    }

    pub fn mode(&self, flag: Option<&str>) -> anyhow::Result<ScalingMode> {
        match flag.or(self.file.mode.as_deref()) {
            Some(s) => ScalingMode::from_str(s).map_err(anyhow::Error::msg),
            None => Ok(ScalingMode::default()),
        }
    }
}

/// `start:stop:step`, or a single value.
pub fn parse_range(s: &str) -> anyhow::Result<LinearRange> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad number {p:?}")))
        .collect::<anyhow::Result<_>>()?;
    match parts[..] {
        [v] => Ok(LinearRange::point(v)?),
        [a, b, c] => Ok(LinearRange::new(a, b, c)?),
        _ => bail!("expected start:stop:step"),
    }
}

pub fn parse_pair(s: &str) -> anyhow::Result<PairSelector> {
    let Some((a, b)) = s.split_once(',') else { bail!("pair must be `j,j'`, got {s:?}") };
    let j = a.trim().parse().with_context(|| format!("bad index {a:?}"))?;
    let jp = b.trim().parse().with_context(|| format!("bad index {b:?}"))?;
    Ok(PairSelector::new(j, jp)?)
}

pub fn parse_sizes(s: &str) -> anyhow::Result<Vec<usize>> {
    let sizes: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().with_context(|| format!("bad size {p:?}")))
        .collect::<anyhow::Result<_>>()?;
    if sizes.is_empty() {
        bail!("empty size list");
    }
    Ok(sizes)
}

/// Everything a run depends on, as recorded in the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub params: ChainParams,
    pub pair: PairSelector,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<LinearRange>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_range: Option<LinearRange>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_range: Option<LinearRange>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<ScalingMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub figure: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    pub out: PathBuf,
    pub format: Format,
}

impl RunConfig {
    pub fn base(layers: &Layers, params: ChainParams) -> anyhow::Result<Self> {
        Ok(Self {
            params,
            pair: layers.pair()?,
            t: None,
            lambda_range: None,
            gamma_range: None,
            sizes: None,
            m: None,
            mode: None,
            figure: None,
            state: None,
            time: None,
            out: layers.out_dir(),
            format: layers.format(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        let r = parse_range("0:30:0.1").unwrap();
        assert_eq!(r.len(), 301);
        assert_eq!(parse_range("2.5").unwrap().samples(), vec![2.5]);
        assert!(parse_range("0:1").is_err());
        assert!(parse_range("1:0:0.1").is_err());
        assert!(parse_range("0:1:0").is_err());
        assert!(parse_range("a:b:c").is_err());
    }

    #[test]
    fn pairs_and_sizes() {
        let p = parse_pair("3, 5").unwrap();
        assert_eq!((p.j.get(), p.j_prime.get()), (3, 5));
        assert!(parse_pair("0,1").is_err());
        assert!(parse_pair("12").is_err());
        assert_eq!(parse_sizes("5,11,21").unwrap(), vec![5, 11, 21]);
        assert!(parse_sizes("5,x").is_err());
    }

    #[test]
    fn flags_beat_file_beat_defaults() {
        let file: FileConfig = toml::from_str("n = 21\ngamma = 0.5\npair = \"2,3\"\n").unwrap();
        let flags = GlobalArgs { gamma: Some(0.25), ..Default::default() };
        let layers = Layers { flags, file };
        let p = layers.params(ParamDefaults::default()).unwrap();
        assert_eq!(p.n_sites(), 21);
        assert_eq!(p.gamma(), 0.25);
        assert_eq!(p.lambda(), 1.0);
        assert_eq!(layers.pair().unwrap().j.get(), 2);
    }

    #[test]
    fn unknown_file_keys_rejected() {
        assert!(toml::from_str::<FileConfig>("lamda = 1.0").is_err());
    }
}
