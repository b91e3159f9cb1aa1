//! Statistical invariants of the Euler–Maruyama simulator.

use fbsde_core::estimators::local_time_hat;
use fbsde_core::sim::{replication_seed, simulate_path, simulate_with_noise};
use fbsde_core::{KernelSpec, ModelSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[test]
fn gbm_weak_error_matches_exponential_growth() {
    let model = ModelSpec::example2();
    let (span, n, paths) = (1.0, 100, 10_000u64);
    let finals: Vec<f64> = (0..paths)
        .map(|l| {
            *simulate_path(&model, span, n, replication_seed(11, l))
                .unwrap()
                .x
                .last()
                .unwrap()
        })
        .collect();
    let (mean, sd) = mean_sd(&finals);
    let exact = model.x0 * (0.02f64 * span).exp();
    let se = sd / (paths as f64).sqrt();
    assert!((mean - exact).abs() <= 3.0 * se, "mean {mean} vs {exact} (se {se})");
}

#[test]
fn one_step_moments_match_the_generator_and_z_squared() {
    let mut model = ModelSpec::example1();
    model.set_param("x0", 0.5).unwrap();
    let delta = 1e-3;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let count = 4_000_000;
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..count {
        let z: f64 = StandardNormal.sample(&mut rng);
        // only the first increment is used; it starts exactly at x0
        let p = simulate_with_noise(&model, 2.0 * delta, 2, |_| z).unwrap();
        let dy = p.y[1] - p.y[0];
        s1 += dy / delta;
        s2 += dy * dy / delta;
    }
    let f_hat = s1 / count as f64;
    let z2_hat = s2 / count as f64;
    assert!(
        (f_hat - model.true_f(0.5)).abs() < 0.05,
        "f {f_hat} vs {}",
        model.true_f(0.5)
    );
    assert!(
        (z2_hat - model.true_z2(0.5)).abs() < 0.05,
        "z2 {z2_hat} vs {}",
        model.true_z2(0.5)
    );
}

#[test]
fn local_time_grows_along_nested_paths() {
    let model = ModelSpec::example1();
    let k = KernelSpec::EPANECHNIKOV;
    let (span, n, h) = (10.0, 5000, 0.2);
    let mut ratios = Vec::new();
    for l in 0..100 {
        let long = simulate_path(&model, 2.0 * span, 2 * n, replication_seed(3, l)).unwrap();
        let mut short = long.clone();
        short.x.truncate(n + 1);
        short.y.truncate(n + 1);
        short.span = span;
        let a = local_time_hat(&short, model.x0, h, &k);
        let b = local_time_hat(&long, model.x0, h, &k);
        assert!(b >= a);
        ratios.push(b / a);
    }
    ratios.sort_by(f64::total_cmp);
    assert!(ratios[50] > 1.0, "median ratio {}", ratios[50]);
}

#[test]
fn local_time_integrates_to_the_time_span() {
    let model = ModelSpec::example1();
    let path = simulate_path(&model, 10.0, 5000, 9).unwrap();
    let k = KernelSpec::EPANECHNIKOV;
    let h = 0.15;
    let (lo, hi) = path.state_range();
    let (a, b) = (lo - 2.0 * h, hi + 2.0 * h);
    // midpoint rule on a fine grid; the integrand is piecewise smooth
    let cells = 40_000;
    let dx = (b - a) / cells as f64;
    let total: f64 = (0..cells)
        .map(|j| local_time_hat(&path, a + (j as f64 + 0.5) * dx, h, &k) * dx)
        .sum();
    assert!((total - path.span).abs() < 1e-3 * path.span, "integral {total}");
}
