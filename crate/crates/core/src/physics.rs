//! Physical parameters, the mean-field dark-soliton profile, and detector
//! pixel geometry with closed-form pixel-integrated densities.
//!
//! Everything downstream derives from [`PhysicalParams`]. Internal
//! computations are unit-agnostic; the convenience constructors work in
//! "soliton units" (hbar = m = 1) where the dimensionless density
//! nu = n * xi fixes the whole problem.

use crate::error::{Error, Result};

/// Minimum box size in healing lengths. Boundary corrections to the
/// soliton profile are neglected; this keeps them below quadrature
/// tolerance.
pub const MIN_BOX_OVER_XI: f64 = 50.0;

/// Condensate constants: action scale, atomic mass, 1D interaction
/// strength, asymptotic linear density, and quantization box length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub hbar: f64,
    pub mass: f64,
    pub interaction: f64,
    pub density: f64,
    pub box_length: f64,
}

/// Scales derived from [`PhysicalParams`]: healing length xi, inverse
/// soliton width kappa = 1/(sqrt(2) xi), chemical potential mu = g n,
/// and sound speed c = sqrt(g n / m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scales {
    pub xi: f64,
    pub kappa: f64,
    pub mu: f64,
    pub sound_speed: f64,
}

impl PhysicalParams {
    pub fn new(hbar: f64, mass: f64, interaction: f64, density: f64, box_length: f64) -> Result<Self> {
        let p = PhysicalParams { hbar, mass, interaction, density, box_length };
        p.validate()?;
        Ok(p)
    }

    /// Soliton units (hbar = m = 1) with explicit g, n and box length.
    pub fn soliton_units(interaction: f64, density: f64, box_length: f64) -> Result<Self> {
        Self::new(1.0, 1.0, interaction, density, box_length)
    }

    /// Soliton units fixed by the dimensionless density nu = n * xi, with
    /// the box length given in units of xi. Uses g = 1, so n = 2 nu^2.
    pub fn from_density_xi(n_xi: f64, box_length_xi: f64) -> Result<Self> {
        if !(n_xi > 0.0) {
            return Err(Error::Domain(format!("n*xi must be positive, got {n_xi}")));
        }
        let n = 2.0 * n_xi * n_xi;
        let xi = 1.0 / (2.0 * n_xi); // hbar/sqrt(2 m g n) with hbar=m=g=1
        Self::new(1.0, 1.0, 1.0, n, box_length_xi * xi)
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("hbar", self.hbar),
            ("mass", self.mass),
            ("interaction", self.interaction),
            ("density", self.density),
            ("box_length", self.box_length),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        let xi = self.hbar / (2.0 * self.mass * self.interaction * self.density).sqrt();
        if self.box_length < MIN_BOX_OVER_XI * xi * (1.0 - 1e-12) {
            return Err(Error::Domain(format!(
                "box_length = {} is below {MIN_BOX_OVER_XI} healing lengths ({})",
                self.box_length,
                MIN_BOX_OVER_XI * xi
            )));
        }
        Ok(())
    }

    /// Derived scales (xi, kappa, mu, c). kappa * xi = 1/sqrt(2) exactly.
    pub fn scales(&self) -> Scales {
        let xi = self.hbar / (2.0 * self.mass * self.interaction * self.density).sqrt();
        Scales {
            xi,
            kappa: 1.0 / (std::f64::consts::SQRT_2 * xi),
            mu: self.interaction * self.density,
            sound_speed: (self.interaction * self.density / self.mass).sqrt(),
        }
    }

    pub fn half_box(&self) -> f64 {
        0.5 * self.box_length
    }
}

/// Stationary dark soliton at position `q`.
#[derive(Debug, Clone, Copy)]
pub struct SolitonModel {
    pub params: PhysicalParams,
    pub q: f64,
    scales: Scales,
}

impl SolitonModel {
    pub fn new(params: PhysicalParams, q: f64) -> Result<Self> {
        if !q.is_finite() || q.abs() >= params.box_length / 4.0 {
            return Err(Error::Domain(format!(
                "soliton position q = {q} must satisfy |q| < L/4 = {}",
                params.box_length / 4.0
            )));
        }
        let scales = params.scales();
        Ok(SolitonModel { params, q, scales })
    }

    pub fn scales(&self) -> Scales {
        self.scales
    }

    /// Order parameter sqrt(n) tanh(kappa (x - q)).
    pub fn order_parameter(&self, x: f64) -> f64 {
        self.params.density.sqrt() * (self.scales.kappa * (x - self.q)).tanh()
    }

    /// Linear density n tanh^2(kappa (x - q)).
    pub fn density(&self, x: f64) -> f64 {
        let t = (self.scales.kappa * (x - self.q)).tanh();
        self.params.density * t * t
    }

    /// Residual of the stationary GPE at `x`, using the analytic second
    /// derivative of the profile. Vanishes identically up to rounding.
    pub fn gpe_residual(&self, x: f64) -> f64 {
        let p = &self.params;
        let s = &self.scales;
        let u = s.kappa * (x - self.q);
        let phi = p.density.sqrt() * u.tanh();
        let sech2 = 1.0 / u.cosh().powi(2);
        // d2/dx2 [sqrt(n) tanh(kappa x)] = -2 kappa^2 sqrt(n) sech^2 tanh
        let phi_xx = -2.0 * s.kappa * s.kappa * p.density.sqrt() * sech2 * u.tanh();
        -p.hbar * p.hbar / (2.0 * p.mass) * phi_xx + p.interaction * phi.powi(3) - s.mu * phi
    }

    /// Antiderivative of the density: n [x - tanh(kappa(x-q)) / kappa].
    fn density_antiderivative(&self, x: f64) -> f64 {
        let s = &self.scales;
        self.params.density * (x - (s.kappa * (x - self.q)).tanh() / s.kappa)
    }

    /// Expected atom number in one pixel [a, b].
    pub fn pixel_mean(&self, a: f64, b: f64) -> f64 {
        self.density_antiderivative(b) - self.density_antiderivative(a)
    }

    /// d/dq of the pixel mean, from the closed form:
    /// n [sech^2(kappa(b-q)) - sech^2(kappa(a-q))].
    pub fn pixel_mean_deriv(&self, a: f64, b: f64) -> f64 {
        let s = &self.scales;
        let sech2 = |x: f64| 1.0 / (s.kappa * (x - self.q)).cosh().powi(2);
        self.params.density * (sech2(b) - sech2(a))
    }

    /// Expected counts on every pixel of `grid`.
    pub fn pixel_means(&self, grid: &PixelGrid) -> Result<Vec<f64>> {
        grid.check_inside(&self.params)?;
        Ok((0..grid.m_px)
            .map(|s| self.pixel_mean(grid.left(s), grid.right(s)))
            .collect())
    }

    /// d/dq of the expected counts on every pixel of `grid`.
    pub fn pixel_mean_derivs(&self, grid: &PixelGrid) -> Result<Vec<f64>> {
        grid.check_inside(&self.params)?;
        Ok((0..grid.m_px)
            .map(|s| self.pixel_mean_deriv(grid.left(s), grid.right(s)))
            .collect())
    }

    /// Mean atom number in the box: n (L - 2 tanh(kappa L / 2) / kappa).
    ///
    /// The box is centered on the origin; for |q| < L/4 the boundary
    /// asymmetry is below double precision.
    pub fn condensate_number(&self) -> f64 {
        let s = &self.scales;
        let l = self.params.box_length;
        self.params.density * (l - 2.0 * (s.kappa * l / 2.0).tanh() / s.kappa)
    }
}

/// Detector geometry: `m_px` contiguous pixels of width `dx` starting at
/// `x0`. Pixel `s` covers [x0 + s dx, x0 + (s+1) dx).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelGrid {
    pub x0: f64,
    pub dx: f64,
    pub m_px: usize,
}

impl PixelGrid {
    pub fn new(x0: f64, dx: f64, m_px: usize) -> Result<Self> {
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::Domain(format!("pixel width must be positive, got {dx}")));
        }
        if m_px < 2 {
            return Err(Error::Domain(format!("need at least 2 pixels, got {m_px}")));
        }
        Ok(PixelGrid { x0, dx, m_px })
    }

    /// Grid of even pixel count centered on `center`, so `center` falls on
    /// the border between the two middle pixels; `offset` shifts the grid
    /// by a fraction of a pixel.
    pub fn centered(center: f64, dx: f64, m_px: usize, offset: f64) -> Result<Self> {
        Self::new(center - 0.5 * m_px as f64 * dx + offset * dx, dx, m_px)
    }

    pub fn left(&self, s: usize) -> f64 {
        self.x0 + s as f64 * self.dx
    }

    pub fn right(&self, s: usize) -> f64 {
        self.x0 + (s + 1) as f64 * self.dx
    }

    pub fn span(&self) -> f64 {
        self.m_px as f64 * self.dx
    }

    /// Split every pixel in two.
    pub fn refined(&self) -> PixelGrid {
        PixelGrid { x0: self.x0, dx: 0.5 * self.dx, m_px: 2 * self.m_px }
    }

    pub fn check_inside(&self, params: &PhysicalParams) -> Result<()> {
        let tol = 1e-9 * self.dx;
        if self.x0 < -params.half_box() - tol || self.x0 + self.span() > params.half_box() + tol {
            return Err(Error::Domain(format!(
                "grid [{}, {}] extends outside the box [{}, {}]",
                self.x0,
                self.x0 + self.span(),
                -params.half_box(),
                params.half_box()
            )));
        }
        if self.span() > params.box_length + tol {
            return Err(Error::Domain("grid span exceeds box length".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::GaussLegendre;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn unit_params() -> PhysicalParams {
        // hbar = m = g = n = 1, kappa = 1, xi = 1/sqrt(2)
        PhysicalParams::soliton_units(1.0, 1.0, 100.0).unwrap()
    }

    #[test]
    fn derived_scales_match_direct_substitution() {
        let s = unit_params().scales();
        assert_relative_eq!(s.xi, 0.7071068, max_relative = 1e-6);
        assert_relative_eq!(s.kappa, 1.0, max_relative = 1e-12);
        assert_relative_eq!(s.sound_speed, 1.0, max_relative = 1e-12);
        assert_relative_eq!(s.mu, 1.0, max_relative = 1e-12);
        assert_relative_eq!(s.kappa * s.xi, std::f64::consts::FRAC_1_SQRT_2, max_relative = 1e-14);
    }

    #[test]
    fn healing_length_halves_when_density_quadruples() {
        let p = PhysicalParams::soliton_units(1.0, 4.0, 100.0).unwrap();
        assert_relative_eq!(p.scales().xi, 0.3535534, max_relative = 1e-6);
    }

    #[test]
    fn rejects_nonpositive_parameters_and_small_boxes() {
        assert!(PhysicalParams::new(1.0, 1.0, -1.0, 1.0, 100.0).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, 1.0, 0.0, 100.0).is_err());
        // 50 xi = 35.36 here; a box of 30 is too small
        assert!(PhysicalParams::soliton_units(1.0, 1.0, 30.0).is_err());
    }

    #[test]
    fn order_parameter_examples() {
        let m = SolitonModel::new(unit_params(), 0.0).unwrap();
        assert_abs_diff_eq!(m.order_parameter(0.0), 0.0);
        assert_relative_eq!(m.order_parameter(1.0), 0.7615942, max_relative = 1e-6);
        assert_relative_eq!(m.order_parameter(-1.0), -m.order_parameter(1.0), max_relative = 1e-14);
    }

    #[test]
    fn density_examples() {
        let m = SolitonModel::new(unit_params(), 0.0).unwrap();
        assert_abs_diff_eq!(m.density(0.0), 0.0);
        let xi = m.scales().xi;
        assert_abs_diff_eq!(m.density(10.0 * xi), 1.0, epsilon = 1e-5);
        assert_relative_eq!(m.density(1.0), 0.5800256, max_relative = 1e-6);
    }

    #[test]
    fn gpe_residual_vanishes_at_sampled_points() {
        let m = SolitonModel::new(unit_params(), 3.0).unwrap();
        let scale = m.scales().mu * m.params.density.sqrt();
        for i in 0..1000 {
            let x = -20.0 + 40.0 * i as f64 / 999.0;
            assert!(m.gpe_residual(x).abs() / scale < 1e-10, "residual at x = {x}");
        }
    }

    #[test]
    fn pixel_mean_matches_quadrature() {
        let m = SolitonModel::new(unit_params(), 0.0).unwrap();
        // pixel [0, 1]: 1 - tanh(1)
        let closed = m.pixel_mean(0.0, 1.0);
        assert_relative_eq!(closed, 0.2384058, max_relative = 1e-6);
        let gl = GaussLegendre::new(16);
        let quad = gl.integrate_composite(|x| m.density(x), 0.0, 1.0, 8);
        assert_relative_eq!(closed, quad, max_relative = 1e-12);
    }

    #[test]
    fn pixel_far_from_dip_is_flat_background() {
        let m = SolitonModel::new(unit_params(), 0.0).unwrap();
        let dx = 0.37;
        let v = m.pixel_mean(15.0, 15.0 + dx);
        assert_abs_diff_eq!(v, m.params.density * dx, epsilon = 1e-8);
    }

    #[test]
    fn symmetric_pixel_halves_are_equal() {
        let m = SolitonModel::new(unit_params(), 0.0).unwrap();
        let a = 0.8;
        let whole = m.pixel_mean(-a, a);
        assert_relative_eq!(whole, 2.0 * (a - a.tanh()), max_relative = 1e-12);
        assert_relative_eq!(m.pixel_mean(-a, 0.0), m.pixel_mean(0.0, a), max_relative = 1e-12);
    }

    #[test]
    fn pixel_mean_deriv_matches_finite_difference() {
        let p = unit_params();
        let h = 1e-6;
        let at = |q: f64| SolitonModel::new(p, q).unwrap().pixel_mean(0.3, 1.1);
        let fd = (at(h) - at(-h)) / (2.0 * h);
        let m = SolitonModel::new(p, 0.0).unwrap();
        assert_relative_eq!(m.pixel_mean_deriv(0.3, 1.1), fd, max_relative = 1e-8);
    }

    #[test]
    fn condensate_number_examples() {
        let m = SolitonModel::new(unit_params(), 0.0).unwrap();
        assert_relative_eq!(m.condensate_number(), 98.0, max_relative = 1e-6);
        let gl = GaussLegendre::new(8);
        let quad = gl.integrate_composite(|x| m.density(x), -50.0, 50.0, 400);
        assert_relative_eq!(m.condensate_number(), quad, max_relative = 1e-10);
        // deficit -> -2 n / kappa
        assert_relative_eq!(m.condensate_number() - 100.0, -2.0, max_relative = 1e-8);
    }

    #[test]
    fn grid_outside_box_is_rejected() {
        let p = unit_params();
        let m = SolitonModel::new(p, 0.0).unwrap();
        let g = PixelGrid::new(40.0, 1.0, 20).unwrap(); // extends to 60 > 50
        assert!(m.pixel_means(&g).is_err());
    }

    #[test]
    fn refined_grid_sums_back_exactly() {
        let p = unit_params();
        let m = SolitonModel::new(p, 0.1).unwrap();
        let g = PixelGrid::centered(0.0, 0.5, 32, 0.0).unwrap();
        let coarse = m.pixel_means(&g).unwrap();
        let fine = m.pixel_means(&g.refined()).unwrap();
        for s in 0..g.m_px {
            // same antiderivative telescopes; only the final rounding differs
            assert_relative_eq!(coarse[s], fine[2 * s] + fine[2 * s + 1], max_relative = 1e-15);
        }
    }
}
