//! Sweep and simulation commands behind the CLI, and their tabular
//! output. Each command maps a [`RunConfig`] to a [`Table`]; the binary
//! only does argument plumbing and serialization to disk.

use rayon::prelude::*;

use crate::bogoliubov::{bogoliubov_model, fd_spectrum, BdgOptions, ModeSet};
use crate::config::{GainKind, OutputFormat, RunConfig};
use crate::error::Result;
use crate::estimator::{snr_analysis, Gain};
use crate::fisher::{
    fisher_bogoliubov, fisher_gaussian_diag, fisher_poisson_pixelated, FisherResult,
};
use crate::model::{CountModel, ModelKind};
use crate::montecarlo::{run_trials, TrialConfig};
use crate::physics::{PhysicalParams, PixelGrid, SolitonModel};

/// A rectangular numeric result with ordered metadata. Values may be NaN
/// where a column does not apply to a row.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: Vec<(String, String)>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: Vec<S>) -> Table {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            metadata: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn push_meta(&mut self, key: &str, value: impl std::fmt::Display) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    /// Standard provenance block carried by every output.
    fn push_provenance(&mut self, cfg: &RunConfig) {
        self.push_meta("version", env!("CARGO_PKG_VERSION"));
        self.push_meta("config_sha256", cfg.hash());
        self.push_meta("seed", cfg.seed);
    }

    /// CSV with `#`-prefixed metadata lines, a header row, and 17
    /// significant digits so doubles round-trip losslessly.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let meta: serde_json::Map<String, serde_json::Value> = self
            .metadata
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect();
        let value = serde_json::json!({
            "metadata": meta,
            "columns": self.columns,
            "rows": self.rows,
        });
        let mut s = serde_json::to_string_pretty(&value).expect("tables are serializable");
        s.push('\n');
        s
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}

fn bdg_options(cfg: &RunConfig) -> BdgOptions {
    BdgOptions {
        k_max_over_kappa: cfg.k_max_over_kappa,
        norm_quad_order: cfg.norm_quad_order,
        pixel_quad_order: cfg.pixel_quad_order,
        shot_noise: cfg.shot_noise,
        frame: cfg.frame,
    }
}

fn grid_for(cfg: &RunConfig, params: &PhysicalParams, dx_xi: f64) -> Result<PixelGrid> {
    PixelGrid::centered(0.0, dx_xi * params.scales().xi, cfg.m_px, cfg.dip_offset)
}

/// Fisher information vs pixel size at fixed density (first `n_xi`
/// entry): columns dx_over_xi, f_xi2_poisson, f_xi2_gauss_diag.
pub fn cmd_fisher_pixel_sweep(cfg: &RunConfig) -> Result<Table> {
    let nu = cfg.n_xi[0];
    let params = PhysicalParams::from_density_xi(nu, cfg.box_length_xi)?;
    let xi2 = params.scales().xi.powi(2);
    let model = SolitonModel::new(params, 0.0)?;

    let rows: Vec<Vec<f64>> = cfg
        .dx_xi
        .par_iter()
        .map(|&dx_xi| -> Result<Vec<f64>> {
            let grid = grid_for(cfg, &params, dx_xi)?;
            let fp = fisher_poisson_pixelated(&model, &grid)?;
            let fg = fisher_gaussian_diag(&model, &grid)?;
            Ok(vec![dx_xi, fp.fisher * xi2, fg.fisher * xi2])
        })
        .collect::<Result<_>>()?;

    let mut t = Table::new(vec!["dx_over_xi", "f_xi2_poisson", "f_xi2_gauss_diag"]);
    t.push_provenance(cfg);
    t.push_meta("n_xi", nu);
    t.push_meta("m_px", cfg.m_px);
    t.push_meta(
        "units",
        "Fisher information rescaled by the healing length squared (dimensionless)",
    );
    for row in rows {
        t.push_row(row);
    }
    Ok(t)
}

/// Least-squares slope of y vs x through the origin.
fn slope_through_origin(xs: &[f64], ys: &[f64]) -> f64 {
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    sxy / sxx
}

/// Fisher information vs density at fixed pixel size (first `dx_xi`
/// entry): columns n_xi, f_xi2_poisson, f_xi2_bogoliubov,
/// snr_info_tuned_gain (effective information of the hand-tuned
/// dip-weighting estimator, same units).
pub fn cmd_fisher_density_sweep(cfg: &RunConfig) -> Result<Table> {
    let dx_xi = cfg.dx_xi[0];
    let opts = bdg_options(cfg);

    let rows: Vec<Vec<f64>> = cfg
        .n_xi
        .par_iter()
        .map(|&nu| -> Result<Vec<f64>> {
            let params = PhysicalParams::from_density_xi(nu, cfg.box_length_xi)?;
            let xi = params.scales().xi;
            let model = SolitonModel::new(params, 0.0)?;
            let grid = grid_for(cfg, &params, dx_xi)?;
            let fp = fisher_poisson_pixelated(&model, &grid)?;
            let fb = fisher_bogoliubov(&params, 0.0, &grid, &opts, Some(cfg.fd_step_xi * xi))?;
            let cm = bogoliubov_model(&model, &grid, &opts)?;
            let gain = Gain::tuned_dip(&model, &grid, cfg.discretization)?;
            let snr = snr_analysis(&gain, &cm)?;
            Ok(vec![
                nu,
                fp.fisher * xi * xi,
                fb.fisher * xi * xi,
                snr.information * xi * xi,
            ])
        })
        .collect::<Result<_>>()?;

    let mut t = Table::new(vec![
        "n_xi",
        "f_xi2_poisson",
        "f_xi2_bogoliubov",
        "snr_info_tuned_gain",
    ]);
    t.push_provenance(cfg);
    t.push_meta("dx_over_xi", dx_xi);
    t.push_meta("m_px", cfg.m_px);
    let nus: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let fps: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let fbs: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    t.push_meta("slope_poisson", format!("{:.16e}", slope_through_origin(&nus, &fps)));
    t.push_meta("slope_bogoliubov", format!("{:.16e}", slope_through_origin(&nus, &fbs)));
    t.push_meta(
        "units",
        "Fisher information rescaled by the healing length squared (dimensionless)",
    );
    for row in rows {
        t.push_row(row);
    }
    Ok(t)
}

/// Build the configured count model at soliton position `q`.
fn count_model_at(
    cfg: &RunConfig,
    params: &PhysicalParams,
    grid: &PixelGrid,
    q: f64,
) -> Result<CountModel> {
    let model = SolitonModel::new(*params, q)?;
    match cfg.model {
        ModelKind::Poisson => CountModel::poisson(&model, grid),
        ModelKind::GaussianDiagonal => CountModel::gaussian_diag(&model, grid),
        ModelKind::Bogoliubov => bogoliubov_model(&model, grid, &bdg_options(cfg)),
    }
}

/// Fisher information of the configured model (for bound comparisons).
fn fisher_at(
    cfg: &RunConfig,
    params: &PhysicalParams,
    grid: &PixelGrid,
    q: f64,
) -> Result<FisherResult> {
    let model = SolitonModel::new(*params, q)?;
    match cfg.model {
        ModelKind::Poisson => fisher_poisson_pixelated(&model, grid),
        ModelKind::GaussianDiagonal => fisher_gaussian_diag(&model, grid),
        ModelKind::Bogoliubov => fisher_bogoliubov(
            params,
            q,
            grid,
            &bdg_options(cfg),
            Some(cfg.fd_step_xi * params.scales().xi),
        ),
    }
}

/// Monte-Carlo estimator benchmark over the configured soliton positions:
/// columns q_over_xi, mean_over_xi, bias_over_xi, bias_over_stderr,
/// variance, variance_std_error, crlb, var_times_fisher, trials.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Table> {
    let nu = cfg.n_xi[0];
    let params = PhysicalParams::from_density_xi(nu, cfg.box_length_xi)?;
    let xi = params.scales().xi;
    let grid = grid_for(cfg, &params, cfg.dx_xi[0])?;

    let rows: Vec<Vec<f64>> = cfg
        .q_xi
        .par_iter()
        .enumerate()
        .map(|(i, &q_xi)| -> Result<Vec<f64>> {
            let q = q_xi * xi;
            let reference = SolitonModel::new(params, q)?;
            let cm = count_model_at(cfg, &params, &grid, q)?;
            let gain = match cfg.gain {
                GainKind::Optimal => Gain::poisson_optimal(&reference, &grid)?,
                GainKind::TunedDip => Gain::tuned_dip(&reference, &grid, cfg.discretization)?,
                GainKind::MatchedFilter => Gain::matched_filter(&cm, &reference)?,
            };
            // decorrelate rows of the position sweep without touching the
            // per-trial keying
            let seed = cfg.seed.wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let trial_cfg = TrialConfig { seed, trials: cfg.trials };
            let rep = run_trials(&cm, q, &gain, &reference, &trial_cfg)?;
            let fisher = fisher_at(cfg, &params, &grid, q)?;
            Ok(vec![
                q_xi,
                rep.mean / xi,
                rep.bias / xi,
                rep.bias / rep.mean_std_error,
                rep.variance,
                rep.variance_std_error,
                fisher.crlb,
                rep.variance * fisher.fisher,
                rep.trials as f64,
            ])
        })
        .collect::<Result<_>>()?;

    let mut t = Table::new(vec![
        "q_over_xi",
        "mean_over_xi",
        "bias_over_xi",
        "bias_over_stderr",
        "variance",
        "variance_std_error",
        "crlb",
        "var_times_fisher",
        "trials",
    ]);
    t.push_provenance(cfg);
    t.push_meta("n_xi", nu);
    t.push_meta("dx_over_xi", cfg.dx_xi[0]);
    t.push_meta("m_px", cfg.m_px);
    t.push_meta("model", cfg.model);
    t.push_meta("gain", cfg.gain);
    t.push_meta("units", "variance and crlb in length^2 of the underlying units");
    for row in rows {
        t.push_row(row);
    }
    Ok(t)
}

/// Diagnostic dump of the excitation modes: columns k, k_over_kappa,
/// energy, energy_over_mu, norm_residual, and (with `oracle = true`)
/// energy_fd from dense diagonalization for the lowest modes.
pub fn cmd_modes(cfg: &RunConfig) -> Result<Table> {
    let nu = cfg.n_xi[0];
    let params = PhysicalParams::from_density_xi(nu, cfg.box_length_xi)?;
    let s = params.scales();
    let model = SolitonModel::new(params, 0.0)?;
    let ms = ModeSet::new(model, &bdg_options(cfg))?;

    let fd = if cfg.oracle {
        // drop the near-zero Goldstone modes (anything below half the
        // lowest phonon energy), then deduplicate the +-k pairs by
        // averaging consecutive eigenvalues
        let eps = fd_spectrum(&model, s.xi / 20.0)?;
        let floor = 0.5 * ms.modes().first().map(|m| m.energy).unwrap_or(0.0);
        let positive: Vec<f64> = eps.into_iter().filter(|&e| e > floor).collect();
        Some(positive.chunks(2).map(|c| 0.5 * (c[0] + c[c.len() - 1])).collect::<Vec<f64>>())
    } else {
        None
    };

    let mut t = Table::new(vec![
        "k",
        "k_over_kappa",
        "energy",
        "energy_over_mu",
        "norm_residual",
        "energy_fd",
    ]);
    t.push_provenance(cfg);
    t.push_meta("n_xi", nu);
    t.push_meta("box_length_xi", cfg.box_length_xi);
    t.push_meta("oracle", cfg.oracle);
    for (i, m) in ms.modes().iter().enumerate() {
        let fd_val = fd
            .as_ref()
            .and_then(|v| v.get(i))
            .copied()
            .unwrap_or(f64::NAN);
        t.push_row(vec![
            m.k,
            m.k / s.kappa,
            m.energy,
            m.energy / s.mu,
            ms.normalization_residual(i),
            fd_val,
        ]);
    }
    Ok(t)
}
