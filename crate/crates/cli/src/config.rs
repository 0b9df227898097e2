//! Parameter resolution: command-line flags win over the optional key-value file.

use std::collections::BTreeMap;
use std::path::Path;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Flags shared by every subcommand, each optional so the config file can fill gaps.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct Flags {
    /// Odd prime p.
    #[arg(long, global = true)]
    pub p: Option<u64>,
    /// Exponent s of the modulus p^s.
    #[arg(long, global = true)]
    pub s: Option<u32>,
    /// Genus g; the number of branch points is n = 2g + 1.
    #[arg(long, global = true)]
    pub g: Option<usize>,
    /// Comma-separated point z_1,...,z_n.
    #[arg(long, global = true, visible_alias = "at")]
    pub point: Option<String>,
    /// Number of sampled ordinary points.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Truncation degree N for local series.
    #[arg(long, global = true)]
    pub degree: Option<u32>,
    /// Seed for point sampling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Key-value file (`key = value` per line) supplying defaults for the flags above.
    #[arg(long, global = true)]
    pub config: Option<std::path::PathBuf>,
    /// Include wall-clock timings in the manifest.
    #[arg(long, global = true)]
    pub timings: bool,
}

#[derive(Clone, Debug)]
pub struct Params {
    pub p: u64,
    pub s: u32,
    pub g: usize,
    pub point: Option<Vec<u64>>,
    pub samples: Option<usize>,
    pub degree: Option<u32>,
    pub seed: u64,
    pub format: Format,
    pub timings: bool,
}

impl Params {
    pub fn n(&self) -> usize {
        2 * self.g + 1
    }
}

const KEYS: [&str; 9] = ["p", "s", "g", "point", "samples", "degree", "seed", "format", "timings"];

pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .or_else(|| line.split_once(':'))
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", lineno + 1)))?;
        let k = k.trim().trim_start_matches("--").replace('_', "-");
        let k = if k == "at" { "point".to_string() } else { k };
        if !KEYS.contains(&k.as_str()) {
            return Err(CliError::Usage(format!("config line {}: unknown key `{k}`", lineno + 1)));
        }
        map.insert(k, v.trim().to_string());
    }
    Ok(map)
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse()
        .map_err(|_| CliError::Usage(format!("invalid value `{v}` for {key}")))
}

pub fn parse_point(v: &str) -> Result<Vec<u64>, CliError> {
    v.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("invalid coordinate `{x}` in --point (expected non-negative integers)")))
        })
        .collect()
}

impl Flags {
    pub fn resolve(&self) -> Result<Params, CliError> {
        let file = match &self.config {
            Some(path) => read_config(path)?,
            None => BTreeMap::new(),
        };
        let get = |k: &str| file.get(k).map(String::as_str);
        let p = match self.p {
            Some(p) => p,
            None => parse("p", get("p").ok_or_else(|| CliError::Usage("missing --p".into()))?)?,
        };
        let s = match (self.s, get("s")) {
            (Some(s), _) => s,
            (None, Some(v)) => parse("s", v)?,
            (None, None) => 1,
        };
        let g = match (self.g, get("g")) {
            (Some(g), _) => g,
            (None, Some(v)) => parse("g", v)?,
            (None, None) => 1,
        };
        if g == 0 {
            return Err(CliError::Usage("--g must be at least 1".into()));
        }
        let point = match (&self.point, get("point")) {
            (Some(v), _) => Some(parse_point(v)?),
            (None, Some(v)) => Some(parse_point(v)?),
            (None, None) => None,
        };
        let samples = match (self.samples, get("samples")) {
            (Some(k), _) => Some(k),
            (None, Some(v)) => Some(parse("samples", v)?),
            (None, None) => None,
        };
        let degree = match (self.degree, get("degree")) {
            (Some(d), _) => Some(d),
            (None, Some(v)) => Some(parse("degree", v)?),
            (None, None) => None,
        };
        let seed = match (self.seed, get("seed")) {
            (Some(d), _) => d,
            (None, Some(v)) => parse("seed", v)?,
            (None, None) => 1,
        };
        let format = match (self.format, get("format")) {
            (Some(f), _) => f,
            (None, Some("json")) => Format::Json,
            (None, Some("csv")) => Format::Csv,
            (None, Some(v)) => return Err(CliError::Usage(format!("invalid format `{v}`"))),
            (None, None) => Format::Json,
        };
        let timings = self.timings || get("timings").is_some_and(|v| v == "true");
        Ok(Params {
            p,
            s,
            g,
            point,
            samples,
            degree,
            seed,
            format,
            timings,
        })
    }
}
