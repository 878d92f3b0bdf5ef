//! Monte-Carlo validation of the first-order position covariance at a few
//! operating points. The full 20-point, 1e5-trial sweep lives in the
//! acceptance suite; this keeps a fast guard in the core crate.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ppc_shape::modal::{solve_modal, SensorPlacement};
use ppc_shape::ppc::{position_order1, ArcCoordinate, ModalConfig};
use ppc_shape::uncertainty::{position_covariance, QuatNoise};

#[test]
fn covariance_matches_monte_carlo_within_ten_percent() {
    let placement = SensorPlacement::new(vec![0.5, 1.0]).unwrap();
    let length = 0.48;
    let s = ArcCoordinate::END;
    let sigma_w = 1e-3;
    let trials = 30_000;
    let mut rng = ChaCha8Rng::seed_from_u64(99);

    for theta_truth in [vec![1.0, 2.0], vec![2.2, -0.8], vec![0.9, 0.6]] {
        let theta = ModalConfig::new(theta_truth).unwrap();
        let w: Vec<f64> = placement
            .locations()
            .iter()
            .map(|&sk| (theta.orientation_at(ArcCoordinate::new(sk).unwrap()) / 2.0).cos())
            .collect();
        let analytic = position_covariance(
            &placement,
            &w,
            &theta,
            s,
            length,
            &QuatNoise::uniform(sigma_w, 2).unwrap(),
        )
        .unwrap();

        // Perturb w, re-solve, re-integrate through the closed form.
        let mut mean = [0.0f64; 2];
        let mut moments = [[0.0f64; 2]; 2];
        let mut samples = Vec::with_capacity(trials);
        for _ in 0..trials {
            let alphas: Vec<f64> = w
                .iter()
                .map(|&wk| {
                    let noisy = (wk + sigma_w * normal(&mut rng)).clamp(-1.0, 1.0);
                    2.0 * noisy.acos()
                })
                .collect();
            let solved = solve_modal(&placement, &alphas).unwrap();
            let p = position_order1(solved.coeffs()[0], solved.coeffs()[1], s, length);
            mean[0] += p.x;
            mean[1] += p.y;
            samples.push([p.x, p.y]);
        }
        mean[0] /= trials as f64;
        mean[1] /= trials as f64;
        for p in &samples {
            let d = [p[0] - mean[0], p[1] - mean[1]];
            for i in 0..2 {
                for j in 0..2 {
                    moments[i][j] += d[i] * d[j];
                }
            }
        }
        for row in moments.iter_mut() {
            for v in row.iter_mut() {
                *v /= (trials - 1) as f64;
            }
        }

        let scale = analytic.entry(0, 0).max(analytic.entry(1, 1));
        for i in 0..2 {
            for j in 0..2 {
                let a = analytic.entry(i, j);
                let m = moments[i][j];
                let tol = 0.10 * a.abs().max(0.02 * scale);
                assert!(
                    (a - m).abs() <= tol,
                    "entry ({i},{j}): analytic {a:.3e} vs MC {m:.3e}"
                );
            }
        }
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box–Muller; the test only needs a handful of digits of Gaussianity.
    let u1: f64 = rng.random_range(1e-12..1.0);
    let u2: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    (-2.0 * u1.ln()).sqrt() * u2.cos()
}
