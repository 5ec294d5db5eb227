//! Property tests for the structural invariants of the library:
//! translation covariance, data-processing monotonicity, model ordering,
//! configuration round-trips, and reproducible sampling.

use proptest::prelude::*;
use soliton_metrology::bogoliubov::dispersion;
use soliton_metrology::config::RunConfig;
use soliton_metrology::estimator::Gain;
use soliton_metrology::fisher::{
    fisher_gaussian_diag, fisher_poisson_closed, fisher_poisson_pixelated,
};
use soliton_metrology::montecarlo::{pairwise_sum, CounterRng};
use soliton_metrology::{PhysicalParams, PixelGrid, SolitonModel};

fn model_at(nu: f64, q_xi: f64) -> SolitonModel {
    let params = PhysicalParams::from_density_xi(nu, 50.0).unwrap();
    SolitonModel::new(params, q_xi * params.scales().xi).unwrap()
}

/// Poisson information of an explicit pixel list, with the library's
/// empty-pixel mask.
fn poisson_info_pixels(model: &SolitonModel, pixels: &[(f64, f64)]) -> f64 {
    pixels
        .iter()
        .map(|&(a, b)| {
            let m = model.pixel_mean(a, b);
            let d = model.pixel_mean_deriv(a, b);
            if m > 1e-12 * model.params.density * (b - a) {
                d * d / m
            } else {
                0.0
            }
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    /// Shifting the soliton and the camera together changes nothing.
    #[test]
    fn poisson_information_is_translation_covariant(
        nu in 5.0f64..60.0,
        dx_xi in 0.1f64..0.5,
        m_px in 8usize..32,
        shift_xi in -2.0f64..2.0,
    ) {
        let centered = model_at(nu, 0.0);
        let s = centered.scales();
        let grid0 = PixelGrid::centered(0.0, dx_xi * s.xi, m_px, 0.0).unwrap();
        let f0 = fisher_poisson_pixelated(&centered, &grid0).unwrap().fisher;

        let moved = model_at(nu, shift_xi);
        let grid1 = PixelGrid::centered(moved.q, dx_xi * s.xi, m_px, 0.0).unwrap();
        let f1 = fisher_poisson_pixelated(&moved, &grid1).unwrap().fisher;
        prop_assert!((f0 - f1).abs() <= 1e-9 * f0);
    }

    /// Pixelation can only lose information relative to ideal resolution.
    #[test]
    fn pixelation_never_beats_ideal_resolution(
        nu in 5.0f64..60.0,
        dx_xi in 0.05f64..1.5,
        m_px in 8usize..32,
        offset in 0.0f64..1.0,
    ) {
        let model = model_at(nu, 0.0);
        let s = model.scales();
        let grid = PixelGrid::centered(0.0, dx_xi * s.xi, m_px, offset).unwrap();
        let f_pix = fisher_poisson_pixelated(&model, &grid).unwrap().fisher;
        let f_ideal = fisher_poisson_closed(&model.params);
        prop_assert!(f_pix <= f_ideal * (1.0 + 1e-9));
    }

    /// The variance term of the Gaussian-diagonal model only adds
    /// information on top of the Poisson term.
    #[test]
    fn gaussian_diagonal_dominates_poisson(
        nu in 5.0f64..60.0,
        dx_xi in 0.05f64..1.5,
        m_px in 8usize..32,
        offset in 0.0f64..1.0,
    ) {
        let model = model_at(nu, 0.0);
        let s = model.scales();
        let grid = PixelGrid::centered(0.0, dx_xi * s.xi, m_px, offset).unwrap();
        let f_p = fisher_poisson_pixelated(&model, &grid).unwrap().fisher;
        let f_g = fisher_gaussian_diag(&model, &grid).unwrap().fisher;
        prop_assert!(f_g >= f_p);
    }

    /// Merging any adjacent pixel pair never raises the information
    /// (data processing).
    #[test]
    fn merging_adjacent_pixels_never_helps(
        nu in 5.0f64..60.0,
        dx_xi in 0.05f64..1.5,
        m_px in 4usize..24,
        merge_at in 0usize..23,
        offset in 0.0f64..1.0,
    ) {
        let merge_at = merge_at % (m_px - 1);
        let model = model_at(nu, 0.0);
        let s = model.scales();
        let grid = PixelGrid::centered(0.0, dx_xi * s.xi, m_px, offset).unwrap();
        let edges: Vec<(f64, f64)> =
            (0..m_px).map(|p| (grid.left(p), grid.right(p))).collect();
        let base = poisson_info_pixels(&model, &edges);
        let mut merged_pixels = Vec::new();
        for (p, &e) in edges.iter().enumerate() {
            if p == merge_at {
                merged_pixels.push((e.0, edges[p + 1].1));
            } else if p != merge_at + 1 {
                merged_pixels.push(e);
            }
        }
        let merged = poisson_info_pixels(&model, &merged_pixels);
        prop_assert!(merged <= base * (1.0 + 1e-12) + 1e-300);
    }

    /// Normalized gains carry unit first-order position signal.
    #[test]
    fn gains_are_normalized(
        nu in 5.0f64..60.0,
        dx_xi in 0.2f64..1.5,
        m_px in 8usize..32,
    ) {
        let model = model_at(nu, 0.0);
        let s = model.scales();
        let grid = PixelGrid::centered(0.0, dx_xi * s.xi, m_px, 0.0).unwrap();
        let gain = Gain::poisson_optimal(&model, &grid).unwrap();
        let derivs = model.pixel_mean_derivs(&grid).unwrap();
        let norm: f64 = gain.values.iter().zip(&derivs).map(|(g, d)| g * d).sum();
        prop_assert!((norm - 1.0).abs() < 1e-9);
    }

    /// The excitation dispersion lies above both the sound line and the
    /// free-particle branch.
    #[test]
    fn dispersion_bounded_below(
        nu in 5.0f64..60.0,
        k_over_kappa in 1e-3f64..30.0,
    ) {
        let params = PhysicalParams::from_density_xi(nu, 50.0).unwrap();
        let s = params.scales();
        let k = k_over_kappa * s.kappa;
        let eps = dispersion(&params, k);
        let sound = params.hbar * s.sound_speed * k;
        let free = params.hbar * params.hbar * k * k / (2.0 * params.mass);
        prop_assert!(eps >= sound * (1.0 - 1e-12));
        prop_assert!(eps >= free * (1.0 - 1e-12));
    }

    /// The canonical configuration text parses back to an equal config.
    #[test]
    fn config_canonical_round_trip(
        nu in 1.0f64..200.0,
        box_xi in 50.0f64..200.0,
        dx_xi in 0.01f64..5.0,
        m_px in 2usize..512,
        trials in 2usize..100_000,
        seed in any::<u64>(),
        threads in 0usize..16,
        oracle in any::<bool>(),
    ) {
        let mut cfg = RunConfig::default();
        cfg.n_xi = vec![nu, 2.0 * nu];
        cfg.box_length_xi = box_xi;
        cfg.dx_xi = vec![dx_xi];
        cfg.m_px = m_px;
        cfg.trials = trials;
        cfg.seed = seed;
        cfg.threads = threads;
        cfg.oracle = oracle;
        let round = RunConfig::parse(&cfg.canonical_string()).unwrap();
        prop_assert_eq!(&round, &cfg);
        prop_assert_eq!(round.hash(), cfg.hash());
    }

    /// Counter-based streams: same key reproduces, different keys differ.
    #[test]
    fn counter_rng_streams(seed in any::<u64>(), trial in any::<u64>(), pixel in any::<u64>()) {
        use rand::RngCore;
        let a: Vec<u64> =
            (0..4).scan(CounterRng::stream(seed, trial, pixel), |r, _| Some(r.next_u64())).collect();
        let b: Vec<u64> =
            (0..4).scan(CounterRng::stream(seed, trial, pixel), |r, _| Some(r.next_u64())).collect();
        prop_assert_eq!(&a, &b);
        let mut other = CounterRng::stream(seed, trial, pixel.wrapping_add(1));
        let c: Vec<u64> = (0..4).map(|_| other.next_u64()).collect();
        prop_assert_ne!(&a, &c);
    }

    /// Pairwise summation agrees with plain summation to rounding.
    #[test]
    fn pairwise_sum_matches_naive(v in proptest::collection::vec(-1e3f64..1e3, 0..300)) {
        let pair = pairwise_sum(&v);
        let naive: f64 = v.iter().sum();
        let scale: f64 = v.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
        prop_assert!((pair - naive).abs() <= 1e-10 * scale);
    }
}
