//! Run configuration: a flat `key = value` text format with documented
//! defaults, strict unknown-key rejection, and a stable content hash for
//! output provenance.

use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::str::FromStr;

use crate::bogoliubov::{ShotNoise, ZeroModeFrame};
use crate::error::{Error, Result};
use crate::estimator::Discretization;
use crate::model::ModelKind;

/// Output serialization format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown format '{other}' (expected csv | json)"))),
        }
    }
}

impl std::fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

/// Which gain function the simulation and signal-to-noise paths use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GainKind {
    /// Optimal for independent Poisson counts: (dnbar/dq)/nbar.
    #[default]
    Optimal,
    /// The hand-tuned dip-weighting profile.
    TunedDip,
    /// C^-1 dnbar/dq for the selected count model.
    MatchedFilter,
}

impl FromStr for GainKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimal" => Ok(GainKind::Optimal),
            "tuned-dip" => Ok(GainKind::TunedDip),
            "matched-filter" => Ok(GainKind::MatchedFilter),
            other => Err(Error::Config(format!(
                "unknown gain '{other}' (expected optimal | tuned-dip | matched-filter)"
            ))),
        }
    }
}

impl std::fmt::Display for GainKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GainKind::Optimal => "optimal",
            GainKind::TunedDip => "tuned-dip",
            GainKind::MatchedFilter => "matched-filter",
        })
    }
}

/// Complete run configuration. Every field has a default; see the key
/// table in [`RunConfig::parse`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Dimensionless densities n * xi for density sweeps (first entry is
    /// used by single-density commands).
    pub n_xi: Vec<f64>,
    /// Box length in healing lengths.
    pub box_length_xi: f64,
    /// Pixel widths in healing lengths for pixel sweeps (first entry used
    /// by single-grid commands).
    pub dx_xi: Vec<f64>,
    /// Number of pixels.
    pub m_px: usize,
    /// Shift of the grid relative to the soliton dip, in pixel widths;
    /// 0 puts the dip on a pixel border.
    pub dip_offset: f64,
    /// Soliton positions (in healing lengths) simulated by `simulate`.
    pub q_xi: Vec<f64>,
    /// Phonon-mode cutoff in units of the inverse soliton width.
    pub k_max_over_kappa: f64,
    /// Gauss-Legendre order for pixel kernel integrals.
    pub pixel_quad_order: usize,
    /// Gauss-Legendre order for mode-normalization integrals.
    pub norm_quad_order: usize,
    /// Shot-noise convention: explicit | folded.
    pub shot_noise: ShotNoise,
    /// Zero-mode frame: soliton | box.
    pub frame: ZeroModeFrame,
    /// Finite-difference step for position derivatives, in healing lengths.
    pub fd_step_xi: f64,
    /// Count model for `simulate`: poisson | gaussian-diagonal | bogoliubov.
    pub model: ModelKind,
    /// Gain for `simulate`: optimal | tuned-dip | matched-filter.
    pub gain: GainKind,
    /// Gain discretization: pixel-average | midpoint.
    pub discretization: Discretization,
    /// Monte-Carlo trial count.
    pub trials: usize,
    /// Random seed.
    pub seed: u64,
    /// Output format: csv | json.
    pub format: OutputFormat,
    /// Worker threads (0 = one per logical CPU).
    pub threads: usize,
    /// Enable slow brute-force validation columns where supported.
    pub oracle: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n_xi: vec![10.0, 20.0, 50.0, 100.0],
            box_length_xi: 50.0,
            dx_xi: vec![0.5],
            m_px: 64,
            dip_offset: 0.0,
            q_xi: vec![0.0],
            k_max_over_kappa: 20.0,
            pixel_quad_order: 16,
            norm_quad_order: 8,
            shot_noise: ShotNoise::Explicit,
            frame: ZeroModeFrame::Soliton,
            fd_step_xi: 1e-3,
            model: ModelKind::Poisson,
            gain: GainKind::Optimal,
            discretization: Discretization::PixelAverage,
            trials: 10_000,
            seed: 0,
            format: OutputFormat::Csv,
            threads: 0,
            oracle: false,
        }
    }
}

fn parse_list(v: &str) -> Result<Vec<f64>> {
    let out: std::result::Result<Vec<f64>, _> =
        v.split(',').map(|t| t.trim().parse::<f64>()).collect();
    out.map_err(|e| Error::Config(format!("bad number list '{v}': {e}")))
}

fn parse_num<T: FromStr>(v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| Error::Config(format!("bad value '{v}': {e}")))
}

const KNOWN_KEYS: &[&str] = &[
    "n_xi",
    "box_length_xi",
    "dx_xi",
    "m_px",
    "dip_offset",
    "q_xi",
    "k_max_over_kappa",
    "pixel_quad_order",
    "norm_quad_order",
    "shot_noise",
    "frame",
    "fd_step_xi",
    "model",
    "gain",
    "discretization",
    "trials",
    "seed",
    "format",
    "threads",
    "oracle",
];

impl RunConfig {
    /// Parse a flat `key = value` configuration. Blank lines and lines
    /// starting with `#` are ignored; unknown keys are rejected with the
    /// offending line number.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let at = |msg: String| Error::Config(format!("line {}: {msg}", lineno + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at(format!("expected 'key = value', got '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            let set = |e: Error| match e {
                Error::Config(m) => at(format!("{key}: {m}")),
                other => other,
            };
            match key {
                "n_xi" => cfg.n_xi = parse_list(value).map_err(set)?,
                "box_length_xi" => cfg.box_length_xi = parse_num(value).map_err(set)?,
                "dx_xi" => cfg.dx_xi = parse_list(value).map_err(set)?,
                "m_px" => cfg.m_px = parse_num(value).map_err(set)?,
                "dip_offset" => cfg.dip_offset = parse_num(value).map_err(set)?,
                "q_xi" => cfg.q_xi = parse_list(value).map_err(set)?,
                "k_max_over_kappa" => cfg.k_max_over_kappa = parse_num(value).map_err(set)?,
                "pixel_quad_order" => cfg.pixel_quad_order = parse_num(value).map_err(set)?,
                "norm_quad_order" => cfg.norm_quad_order = parse_num(value).map_err(set)?,
                "shot_noise" => {
                    cfg.shot_noise = match value {
                        "explicit" => ShotNoise::Explicit,
                        "folded" => ShotNoise::Folded,
                        other => {
                            return Err(at(format!(
                                "unknown shot_noise '{other}' (expected explicit | folded)"
                            )))
                        }
                    }
                }
                "frame" => {
                    cfg.frame = match value {
                        "soliton" => ZeroModeFrame::Soliton,
                        "box" => ZeroModeFrame::Box,
                        other => {
                            return Err(at(format!(
                                "unknown frame '{other}' (expected soliton | box)"
                            )))
                        }
                    }
                }
                "fd_step_xi" => cfg.fd_step_xi = parse_num(value).map_err(set)?,
                "model" => cfg.model = value.parse().map_err(set)?,
                "gain" => cfg.gain = value.parse().map_err(set)?,
                "discretization" => {
                    cfg.discretization = match value {
                        "pixel-average" => Discretization::PixelAverage,
                        "midpoint" => Discretization::Midpoint,
                        other => {
                            return Err(at(format!(
                                "unknown discretization '{other}' \
                                 (expected pixel-average | midpoint)"
                            )))
                        }
                    }
                }
                "trials" => cfg.trials = parse_num(value).map_err(set)?,
                "seed" => cfg.seed = parse_num(value).map_err(set)?,
                "format" => cfg.format = value.parse().map_err(set)?,
                "threads" => cfg.threads = parse_num(value).map_err(set)?,
                "oracle" => cfg.oracle = parse_num(value).map_err(set)?,
                other => {
                    return Err(at(format!(
                        "unknown key '{other}'; known keys: {}",
                        KNOWN_KEYS.join(", ")
                    )))
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        RunConfig::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.n_xi.is_empty() || self.dx_xi.is_empty() || self.q_xi.is_empty() {
            return Err(Error::Config("n_xi, dx_xi and q_xi must be non-empty".into()));
        }
        if self.n_xi.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::Config("n_xi entries must be positive".into()));
        }
        if self.dx_xi.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::Config("dx_xi entries must be positive".into()));
        }
        if self.m_px < 2 {
            return Err(Error::Config("m_px must be at least 2".into()));
        }
        if self.trials < 2 {
            return Err(Error::Config("trials must be at least 2".into()));
        }
        Ok(())
    }

    /// Canonical text form: every key on one line, sorted, defaults
    /// included. Parsing it back yields an equal config; its hash is the
    /// provenance identifier carried by all output files.
    pub fn canonical_string(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        let mut s = String::new();
        let _ = writeln!(s, "box_length_xi = {:?}", self.box_length_xi);
        let _ = writeln!(
            s,
            "discretization = {}",
            match self.discretization {
                Discretization::PixelAverage => "pixel-average",
                Discretization::Midpoint => "midpoint",
            }
        );
        let _ = writeln!(s, "dip_offset = {:?}", self.dip_offset);
        let _ = writeln!(s, "dx_xi = {}", list(&self.dx_xi));
        let _ = writeln!(s, "fd_step_xi = {:?}", self.fd_step_xi);
        let _ = writeln!(s, "format = {}", self.format);
        let _ = writeln!(
            s,
            "frame = {}",
            match self.frame {
                ZeroModeFrame::Soliton => "soliton",
                ZeroModeFrame::Box => "box",
            }
        );
        let _ = writeln!(s, "gain = {}", self.gain);
        let _ = writeln!(s, "k_max_over_kappa = {:?}", self.k_max_over_kappa);
        let _ = writeln!(s, "m_px = {}", self.m_px);
        let _ = writeln!(s, "model = {}", self.model);
        let _ = writeln!(s, "n_xi = {}", list(&self.n_xi));
        let _ = writeln!(s, "norm_quad_order = {}", self.norm_quad_order);
        let _ = writeln!(s, "oracle = {}", self.oracle);
        let _ = writeln!(s, "pixel_quad_order = {}", self.pixel_quad_order);
        let _ = writeln!(s, "q_xi = {}", list(&self.q_xi));
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(
            s,
            "shot_noise = {}",
            match self.shot_noise {
                ShotNoise::Explicit => "explicit",
                ShotNoise::Folded => "folded",
            }
        );
        let _ = writeln!(s, "threads = {}", self.threads);
        let _ = writeln!(s, "trials = {}", self.trials);
        s
    }

    /// Hex SHA-256 of the canonical text form, identifying the computation.
    /// Execution-only fields (the worker thread count) are normalized out
    /// so that runs differing only in parallelism share a hash, matching
    /// their byte-identical outputs.
    pub fn hash(&self) -> String {
        let mut normalized = self.clone();
        normalized.threads = 0;
        let digest = Sha256::digest(normalized.canonical_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
