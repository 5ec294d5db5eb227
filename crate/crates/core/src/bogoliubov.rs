//! Quantized excitations on top of the dark-soliton background: phonon
//! modes in a periodic box, the zero-mode (position and phase) sector, and
//! the resulting pixel-count covariance model.
//!
//! Conventions: the conjugate pairs (position, momentum) and (phase,
//! number) of the zero-mode sector are normalized so their commutators are
//! i (second-quantized convention); factors of hbar enter only through the
//! healing length and mode energies.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{CountModel, ModelKind};
use crate::physics::{PhysicalParams, PixelGrid, SolitonModel};
use crate::quad::GaussLegendre;

/// How the local shot noise enters the pixel covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShotNoise {
    /// Remove the delta-function content of the mode sum analytically and
    /// place the exact mean-count diagonal on the covariance. Converged in
    /// the mode cutoff and positive definite; the default.
    #[default]
    Explicit,
    /// Keep the literal truncated mode sum, which smears the delta
    /// function over the pixel. Kept as a switch for comparison; the
    /// covariance then depends on the cutoff and double-counts the
    /// number fluctuations of the box.
    Folded,
}

/// Reference frame for the adjoint phase mode, whose secular `x` factor is
/// not translation invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroModeFrame {
    /// Measure the secular coordinate from the soliton position. Keeps the
    /// covariance translation covariant; the default.
    #[default]
    Soliton,
    /// Measure it from the box center. Coincides with `Soliton` when the
    /// soliton sits at the box center.
    Box,
}

/// Numerical knobs for the excitation sector.
#[derive(Debug, Clone, Copy)]
pub struct BdgOptions {
    /// Phonon modes are kept up to k = `k_max_over_kappa` / soliton width.
    pub k_max_over_kappa: f64,
    /// Gauss-Legendre order for the mode-normalization integrals
    /// (composite, panel width xi/2 over the box).
    pub norm_quad_order: usize,
    /// Gauss-Legendre order for integrating kernels over one pixel.
    pub pixel_quad_order: usize,
    pub shot_noise: ShotNoise,
    pub frame: ZeroModeFrame,
}

impl Default for BdgOptions {
    fn default() -> Self {
        BdgOptions {
            k_max_over_kappa: 20.0,
            norm_quad_order: 8,
            pixel_quad_order: 16,
            shot_noise: ShotNoise::Explicit,
            frame: ZeroModeFrame::Soliton,
        }
    }
}

impl BdgOptions {
    fn validate(&self) -> Result<()> {
        if !(self.k_max_over_kappa > 0.0) || !self.k_max_over_kappa.is_finite() {
            return Err(Error::Domain(format!(
                "mode cutoff must be positive, got {}",
                self.k_max_over_kappa
            )));
        }
        if self.norm_quad_order < 2 || self.pixel_quad_order < 2 {
            return Err(Error::Domain("quadrature orders must be at least 2".into()));
        }
        Ok(())
    }
}

/// Bogoliubov dispersion eps(k) = sqrt(E_k (E_k + 2 g n)), E_k = hbar^2 k^2 / 2m.
pub fn dispersion(params: &PhysicalParams, k: f64) -> f64 {
    let ek = params.hbar * params.hbar * k * k / (2.0 * params.mass);
    (ek * (ek + 2.0 * params.interaction * params.density)).sqrt()
}

/// One scattering (phonon) mode of the soliton background at wave number
/// `k > 0`; the partner at `-k` is fixed by reflection.
#[derive(Debug, Clone, Copy)]
pub struct PhononMode {
    pub k: f64,
    pub energy: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
    /// Normalization amplitude fixed by int (|u|^2 - |v|^2) dx = 1.
    pub norm: f64,
}

/// The discrete set of phonon modes on a soliton background in a box.
///
/// The box quantization condition includes the phase shift a phonon picks
/// up crossing the soliton: k L + 2 arctan(2 kappa / k) = 2 pi j.
#[derive(Debug, Clone)]
pub struct ModeSet {
    model: SolitonModel,
    modes: Vec<PhononMode>,
    opts: BdgOptions,
}

impl ModeSet {
    pub fn new(model: SolitonModel, opts: &BdgOptions) -> Result<Self> {
        opts.validate()?;
        let p = model.params;
        let s = model.scales();
        let (kappa, l) = (s.kappa, p.box_length);
        let k_max = opts.k_max_over_kappa * kappa;

        let mut modes = Vec::new();
        let mut j = 1u32;
        loop {
            let k = solve_quantization(kappa, l, j)?;
            if k > k_max {
                break;
            }
            let energy = dispersion(&p, k);
            let two_eps_mu = 2.0 * energy / s.mu;
            let kk = (k / kappa).powi(2);
            modes.push(PhononMode {
                k,
                energy,
                beta_plus: kk + two_eps_mu,
                beta_minus: kk - two_eps_mu,
                norm: 1.0,
            });
            j += 1;
        }
        if modes.is_empty() {
            return Err(Error::Domain(format!(
                "mode cutoff {} kappa leaves no phonon mode in a box of {} healing lengths",
                opts.k_max_over_kappa,
                l / s.xi
            )));
        }

        let mut set = ModeSet { model, modes, opts: *opts };
        set.normalize()?;
        Ok(set)
    }

    /// Fix each `norm` so that int over the box of (|u|^2 - |v|^2) = 1.
    fn normalize(&mut self) -> Result<()> {
        let gl = GaussLegendre::new(self.opts.norm_quad_order);
        let s = self.model.scales();
        let half = self.model.params.half_box();
        // panel width ~ xi/2 resolves both the soliton core and the mode
        let panels = (4.0 * half / s.xi).ceil() as usize;
        for i in 0..self.modes.len() {
            let m = self.modes[i];
            let integral = gl.integrate_composite(
                |x| {
                    let (u, v) = self.envelopes_unnormalized(&m, x);
                    u.norm_sqr() - v.norm_sqr()
                },
                -half,
                half,
                panels,
            );
            if !(integral > 0.0) || !integral.is_finite() {
                return Err(Error::NumericalPrecision(format!(
                    "mode normalization integral at k = {} is {integral}",
                    m.k
                )));
            }
            self.modes[i].norm = 1.0 / integral.sqrt();
        }
        Ok(())
    }

    pub fn model(&self) -> &SolitonModel {
        &self.model
    }

    pub fn options(&self) -> &BdgOptions {
        &self.opts
    }

    pub fn modes(&self) -> &[PhononMode] {
        &self.modes
    }

    /// Mode functions before normalization, without the plane-wave phase.
    fn envelopes_unnormalized(&self, m: &PhononMode, x: f64) -> (Complex64, Complex64) {
        let s = self.model.scales();
        let arg = s.kappa * (x - self.model.q);
        let sech2 = 1.0 / arg.cosh().powi(2);
        let th = arg.tanh();
        let u = Complex64::new(m.k * sech2 + m.beta_plus * m.k / 2.0, m.beta_plus * s.kappa * th);
        let v = Complex64::new(m.k * sech2 + m.beta_minus * m.k / 2.0, m.beta_minus * s.kappa * th);
        (u / s.kappa, v / s.kappa)
    }

    /// Normalized mode functions (u, v) of mode `idx` at position `x`.
    pub fn mode_functions(&self, idx: usize, x: f64) -> (Complex64, Complex64) {
        let m = &self.modes[idx];
        let (u, v) = self.envelopes_unnormalized(m, x);
        let phase = Complex64::from_polar(m.norm, m.k * x);
        (u * phase, v * phase)
    }

    /// |1 - int (|u|^2 - |v|^2)| recomputed with a finer rule, as a
    /// self-check of the normalization quadrature.
    pub fn normalization_residual(&self, idx: usize) -> f64 {
        let gl = GaussLegendre::new(self.opts.norm_quad_order + 4);
        let s = self.model.scales();
        let half = self.model.params.half_box();
        let panels = (8.0 * half / s.xi).ceil() as usize;
        let integral = gl.integrate_composite(
            |x| {
                let (u, v) = self.mode_functions(idx, x);
                u.norm_sqr() - v.norm_sqr()
            },
            -half,
            half,
            panels,
        );
        (integral - 1.0).abs()
    }

    /// Quantum depletion density sum over +-k of |v_k(x)|^2.
    pub fn depletion_density(&self, x: f64) -> f64 {
        self.modes
            .iter()
            .map(|m| {
                let (_, v) = self.envelopes_unnormalized(m, x);
                2.0 * (m.norm * m.norm) * v.norm_sqr()
            })
            .sum()
    }
}

/// Bisect k L + 2 arctan(2 kappa / k) = 2 pi j for the j-th positive root.
fn solve_quantization(kappa: f64, l: f64, j: u32) -> Result<f64> {
    let target = 2.0 * std::f64::consts::PI * j as f64;
    let f = |k: f64| k * l + 2.0 * (2.0 * kappa).atan2(k) - target;
    let mut lo = 1e-12 * kappa;
    let mut hi = target / l + 10.0 * kappa;
    if f(lo) >= 0.0 || f(hi) <= 0.0 {
        return Err(Error::NumericalPrecision(format!(
            "quantization root bracket failed for mode index {j}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) < 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Second moments of the zero-mode (soliton position / condensate phase)
/// sector in a Gaussian state.
#[derive(Debug, Clone, Copy)]
pub struct ZeroModeSector {
    /// <P_q^2>, momentum conjugate to the soliton position.
    pub p_q_sq: f64,
    /// <x_q^2>, spread of the soliton-position quadrature.
    pub x_q_sq: f64,
    /// <P_theta^2>, number fluctuation conjugate to the condensate phase.
    pub p_theta_sq: f64,
    /// Mean condensate atom number entering the adjoint phase mode.
    pub condensate_number: f64,
    pub frame: ZeroModeFrame,
}

impl ZeroModeSector {
    /// The Gaussian state that minimizes the density noise at the soliton
    /// dip: <P_q^2> = 2 n kappa and <x_q^2> = 1/(8 n kappa), a minimum
    /// uncertainty pair, with Poissonian number fluctuations
    /// <P_theta^2> = N_0.
    pub fn minimizing(model: &SolitonModel, frame: ZeroModeFrame) -> Self {
        let s = model.scales();
        let n = model.params.density;
        let n0 = model.condensate_number();
        ZeroModeSector {
            p_q_sq: 2.0 * n * s.kappa,
            x_q_sq: 1.0 / (8.0 * n * s.kappa),
            p_theta_sq: n0,
            condensate_number: n0,
            frame,
        }
    }

    /// All second moments set to zero; isolates the phonon contribution in
    /// reduction tests.
    pub fn quiet(model: &SolitonModel, frame: ZeroModeFrame) -> Self {
        ZeroModeSector {
            p_q_sq: 0.0,
            x_q_sq: 0.0,
            p_theta_sq: 0.0,
            condensate_number: model.condensate_number(),
            frame,
        }
    }

    fn secular_coordinate(&self, model: &SolitonModel, x: f64) -> f64 {
        match self.frame {
            ZeroModeFrame::Soliton => x - model.q,
            ZeroModeFrame::Box => x,
        }
    }
}

/// Zero-mode and adjoint mode functions at one point.
#[derive(Debug, Clone, Copy)]
pub struct ZeroModeValues {
    /// Position zero mode u_q = -i kappa sqrt(n) sech^2.
    pub u_q: Complex64,
    /// Phase zero mode u_theta = Phi.
    pub u_theta: Complex64,
    /// Adjoint of the position mode, u_q^ad = -i / (4 sqrt(n)).
    pub u_q_ad: Complex64,
    /// Adjoint of the phase mode, (Phi + x_sec kappa sqrt(n) sech^2) /
    /// (2 (N_0 + n/kappa)).
    pub u_theta_ad: Complex64,
}

impl ZeroModeSector {
    pub fn mode_values(&self, model: &SolitonModel, x: f64) -> ZeroModeValues {
        let s = model.scales();
        let n = model.params.density;
        let arg = s.kappa * (x - model.q);
        let sech2 = 1.0 / arg.cosh().powi(2);
        let phi = n.sqrt() * arg.tanh();
        let xs = self.secular_coordinate(model, x);
        ZeroModeValues {
            u_q: Complex64::new(0.0, -s.kappa * n.sqrt() * sech2),
            u_theta: Complex64::new(phi, 0.0),
            u_q_ad: Complex64::new(0.0, -1.0 / (4.0 * n.sqrt())),
            u_theta_ad: Complex64::new(
                (phi + xs * s.kappa * n.sqrt() * sech2)
                    / (2.0 * (self.condensate_number + n / s.kappa)),
                0.0,
            ),
        }
    }
}

/// Zero-mode contribution to the mean density at `x`, including the
/// operator-ordering correction from completeness of the mode basis.
pub fn zero_mode_density(modeset: &ModeSet, sector: &ZeroModeSector, x: f64) -> f64 {
    let model = modeset.model();
    let s = model.scales();
    let n = model.params.density;
    let arg = s.kappa * (x - model.q);
    let sech2 = 1.0 / arg.cosh().powi(2);
    let phi = n.sqrt() * arg.tanh();
    let zv = sector.mode_values(model, x);
    let utad = zv.u_theta_ad.re;
    let uq_mod = s.kappa * n.sqrt() * sech2;
    sector.p_theta_sq * utad * utad
        + sector.p_q_sq / (16.0 * n)
        + sector.x_q_sq * uq_mod * uq_mod
        - s.kappa * sech2 / 4.0
        - phi * utad
}

/// Mean atom density with quantum corrections: mean-field profile plus
/// phonon depletion plus the zero-mode contribution.
pub fn mean_density(modeset: &ModeSet, sector: &ZeroModeSector, x: f64) -> f64 {
    modeset.model().density(x) + modeset.depletion_density(x) + zero_mode_density(modeset, sector, x)
}

/// Smooth (non-delta) part of the density-density correlation
/// <dn(x) dn(y)> between two distinct points, explicit-shot-noise
/// convention.
pub fn density_correlation(modeset: &ModeSet, sector: &ZeroModeSector, x: f64, y: f64) -> f64 {
    let model = modeset.model();
    let s = model.scales();
    let n = model.params.density;
    let point = |x: f64| {
        let arg = s.kappa * (x - model.q);
        (n.sqrt() * arg.tanh(), 1.0 / arg.cosh().powi(2))
    };
    let (phi_x, s2_x) = point(x);
    let (phi_y, s2_y) = point(y);

    // phonon kernel R = sum over +-k of 2 Re[2 v v'* + u v'* + v u'*]
    let mut r = 0.0;
    for (idx, _) in modeset.modes.iter().enumerate() {
        let (ux, vx) = modeset.mode_functions(idx, x);
        let (uy, vy) = modeset.mode_functions(idx, y);
        r += 2.0 * (2.0 * (vx * vy.conj()).re + (ux * vy.conj()).re + (vx * uy.conj()).re);
    }

    let zx = sector.mode_values(model, x);
    let zy = sector.mode_values(model, y);
    let (utx, uty) = (zx.u_theta_ad.re, zy.u_theta_ad.re);
    let uqx = s.kappa * n.sqrt() * s2_x;
    let uqy = s.kappa * n.sqrt() * s2_y;
    let kg = 4.0 * (sector.p_theta_sq * utx * uty + sector.x_q_sq * uqx * uqy);
    // completeness kernel of the zero-mode sector (cancels against the
    // delta content removed from the phonon sum)
    let zc = 0.25 * s.kappa * (s2_x + s2_y) + phi_x * uty + utx * phi_y;

    phi_x * phi_y * (r + kg - zc)
}

/// Pixel-count covariance model for the quantum (Bogoliubov) measurement
/// model: exact mean counts with quantum corrections and the full
/// pixel-pixel covariance.
pub fn covariance_model(
    modeset: &ModeSet,
    sector: &ZeroModeSector,
    grid: &PixelGrid,
) -> Result<CountModel> {
    let model = modeset.model();
    let opts = modeset.options();
    grid.check_inside(&model.params)?;

    let s = model.scales();
    let n = model.params.density;
    let nk = modeset.modes.len();
    let m_px = grid.m_px;
    let gl = GaussLegendre::new(opts.pixel_quad_order);

    // Pixel-aggregated mode matrices: G[p, k] = sum over nodes in pixel p
    // of w * Phi * (mode function). Re/Im parts kept separately so every
    // kernel contraction is a real matrix product.
    let mut g_ur = DMatrix::<f64>::zeros(m_px, nk);
    let mut g_ui = DMatrix::<f64>::zeros(m_px, nk);
    let mut g_vr = DMatrix::<f64>::zeros(m_px, nk);
    let mut g_vi = DMatrix::<f64>::zeros(m_px, nk);
    // Pixel-aggregated vectors for the factorized zero-mode kernels.
    let mut a_one = DVector::<f64>::zeros(m_px); // sum w Phi
    let mut a_phi = DVector::<f64>::zeros(m_px); // sum w Phi^2
    let mut a_s2 = DVector::<f64>::zeros(m_px); // sum w Phi sech^2
    let mut a_ut = DVector::<f64>::zeros(m_px); // sum w Phi u_theta_ad
    let mut a_uq = DVector::<f64>::zeros(m_px); // sum w Phi |u_q|
    let mut mean = DVector::<f64>::zeros(m_px);

    let density_floor = -1e-6 * n;
    for p in 0..m_px {
        for (x, w) in gl.mapped(grid.left(p), grid.right(p)) {
            let arg = s.kappa * (x - model.q);
            let sech2 = 1.0 / arg.cosh().powi(2);
            let th = arg.tanh();
            let phi = n.sqrt() * th;

            let dens = mean_density(modeset, sector, x);
            if dens < density_floor {
                return Err(Error::ModelValidity(format!(
                    "mean density {dens} at x = {x} is negative beyond tolerance"
                )));
            }
            mean[p] += w * dens;

            let wphi = w * phi;
            a_one[p] += wphi;
            a_phi[p] += wphi * phi;
            a_s2[p] += wphi * sech2;
            let zv = sector.mode_values(model, x);
            a_ut[p] += wphi * zv.u_theta_ad.re;
            a_uq[p] += wphi * s.kappa * n.sqrt() * sech2;

            for (i, m) in modeset.modes.iter().enumerate() {
                let env_u = Complex64::new(
                    m.k * sech2 + m.beta_plus * m.k / 2.0,
                    m.beta_plus * s.kappa * th,
                ) / s.kappa;
                let env_v = Complex64::new(
                    m.k * sech2 + m.beta_minus * m.k / 2.0,
                    m.beta_minus * s.kappa * th,
                ) / s.kappa;
                let phase = Complex64::from_polar(m.norm, m.k * x);
                let u = env_u * phase;
                let v = env_v * phase;
                g_ur[(p, i)] += wphi * u.re;
                g_ui[(p, i)] += wphi * u.im;
                g_vr[(p, i)] += wphi * v.re;
                g_vi[(p, i)] += wphi * v.im;
            }
        }
    }

    // Goldstone (zero-mode) kernel, common to both conventions:
    // 4 [<P_theta^2> ut ut' + <x_q^2> |u_q| |u_q|'].
    let kg = 4.0
        * (sector.p_theta_sq * &a_ut * a_ut.transpose()
            + sector.x_q_sq * &a_uq * a_uq.transpose());

    let (cov, shot_diag, phonon_part, goldstone_part) = match opts.shot_noise {
        ShotNoise::Explicit => {
            // R = sum +-k of 2 Re[2 v v'* + u v'* + v u'*]; real parts only.
            let p_vv = &g_vr * g_vr.transpose() + &g_vi * g_vi.transpose();
            let p_uv = &g_ur * g_vr.transpose() + &g_ui * g_vi.transpose();
            let c_ph = 2.0 * (2.0 * p_vv + &p_uv + p_uv.transpose());
            // Zero-mode completeness kernel, subtracted because the delta
            // content of the phonon sum was removed into the diagonal.
            let zc = 0.25
                * s.kappa
                * (&a_s2 * a_one.transpose() + &a_one * a_s2.transpose())
                + (&a_phi * a_ut.transpose() + &a_ut * a_phi.transpose());
            let c_g = kg - zc;
            let cov = DMatrix::from_diagonal(&mean) + &c_ph + &c_g;
            (cov, mean.clone(), c_ph, c_g)
        }
        ShotNoise::Folded => {
            // Literal truncated sum over +-k of 2 Re[(u+v)(u+v)'*].
            let g_wr = &g_ur + &g_vr;
            let g_wi = &g_ui + &g_vi;
            let c_ph = 2.0 * (&g_wr * g_wr.transpose() + &g_wi * g_wi.transpose());
            let cov = &c_ph + &kg;
            (cov, DVector::zeros(m_px), c_ph, kg)
        }
    };

    Ok(CountModel {
        tag: ModelKind::Bogoliubov,
        grid: *grid,
        mean,
        cov,
        shot_diag,
        phonon_part: Some(phonon_part),
        goldstone_part: Some(goldstone_part),
    })
}

/// Brute-force validation of the analytic spectrum: dense symmetric
/// finite-difference diagonalization of the linearized excitation problem
/// (A - B)(A + B) s = eps^2 s with A -+ B = -hbar^2/(2m) d2/dx2 +
/// (1 or 3) g rho - mu on a periodic grid of spacing `step`.
///
/// Returns all excitation energies sorted ascending, including the two
/// near-zero Goldstone modes; callers drop those before comparing with
/// the analytic phonon energies (which come in +-k pairs).
pub fn fd_spectrum(model: &SolitonModel, step: f64) -> Result<Vec<f64>> {
    let p = model.params;
    let s = model.scales();
    if !(step > 0.0) || step > s.xi {
        return Err(Error::Domain(format!(
            "finite-difference step {step} must be positive and resolve the healing length {}",
            s.xi
        )));
    }
    let n = (p.box_length / step).round() as usize;
    if n < 16 {
        return Err(Error::Domain("finite-difference grid is too small".into()));
    }
    let t = p.hbar * p.hbar / (2.0 * p.mass * step * step);
    let mut a_minus_b = DMatrix::<f64>::zeros(n, n);
    let mut a_plus_b = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let x = -p.half_box() + (i as f64 + 0.5) * step;
        let rho = model.density(x);
        a_minus_b[(i, i)] = 2.0 * t + p.interaction * rho - s.mu;
        a_plus_b[(i, i)] = 2.0 * t + 3.0 * p.interaction * rho - s.mu;
        let j = (i + 1) % n;
        a_minus_b[(i, j)] = -t;
        a_minus_b[(j, i)] = -t;
        a_plus_b[(i, j)] = -t;
        a_plus_b[(j, i)] = -t;
    }
    // symmetrize the product via the square root of (A + B):
    // (A+B)^(1/2) (A-B) (A+B)^(1/2) shares its spectrum with (A-B)(A+B)
    let eig = nalgebra::SymmetricEigen::new(a_plus_b);
    let sqrt_vals = DVector::from_iterator(
        n,
        eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()),
    );
    let half = &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * eig.eigenvectors.transpose();
    let mut m = &half * a_minus_b * &half;
    // enforce exact symmetry before the symmetric eigensolver
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let eig2 = nalgebra::SymmetricEigen::new(m);
    let mut eps: Vec<f64> = eig2.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    eps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(eps)
}

/// Convenience: build mode set, minimizing zero-mode state, and covariance
/// model in one call.
pub fn bogoliubov_model(
    model: &SolitonModel,
    grid: &PixelGrid,
    opts: &BdgOptions,
) -> Result<CountModel> {
    let ms = ModeSet::new(*model, opts)?;
    let zs = ZeroModeSector::minimizing(model, opts.frame);
    covariance_model(&ms, &zs, grid)
}
