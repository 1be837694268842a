use nnapprox::approximators::AnalyticTarget;
use nnapprox::regression::*;
use nnapprox::{ActivationKind, Matrix, Network};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_net(rng: &mut ChaCha8Rng, widths: &[usize]) -> Network {
    let weights = widths
        .windows(2)
        .map(|w| {
            let data = (0..w[0] * w[1])
                .map(|_| {
                    let v: f64 = rng.random_range(0.1..1.0);
                    if rng.random::<bool>() {
                        v
                    } else {
                        -v
                    }
                })
                .collect();
            Matrix::new(w[1], w[0], data).unwrap()
        })
        .collect();
    Network::new(ActivationKind::Abs, weights).unwrap()
}

fn perturbed(net: &Network, layer: usize, r: usize, c: usize, h: f64) -> Network {
    let mut ws = net.weights().to_vec();
    let v = ws[layer].get(r, c);
    ws[layer].set(r, c, v + h);
    net.with_weights(ws).unwrap()
}

fn min_abs_preactivation(net: &Network, x: &[f64]) -> f64 {
    let ws = net.weights();
    let mut h = ws[0].mul_vec(x);
    let mut m = f64::INFINITY;
    for w in &ws[1..] {
        m = h.iter().fold(m, |a, v| a.min(v.abs()));
        h.iter_mut().for_each(|v| *v = v.abs());
        h = w.mul_vec(&h);
    }
    m
}

fn assert_gradients_match<F>(net: &Network, analytic: &[Matrix], f: F)
where
    F: Fn(&Network) -> f64,
{
    let h = 1e-6;
    let scale = analytic.iter().map(|g| g.max_abs()).fold(0.0, f64::max).max(1e-300);
    for (l, g) in analytic.iter().enumerate() {
        for r in 0..g.rows() {
            for c in 0..g.cols() {
                let fd = (f(&perturbed(net, l, r, c, h)) - f(&perturbed(net, l, r, c, -h))) / (2.0 * h);
                let a = g.get(r, c);
                let tol = 1e-4 * a.abs().max(fd.abs()).max(1e-3 * scale);
                assert!((a - fd).abs() <= tol, "layer {l} ({r},{c}): analytic {a} vs fd {fd}");
            }
        }
    }
}

#[test]
fn path_norm_gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let shapes: [&[usize]; 4] = [&[2, 3, 1], &[3, 4, 2, 1], &[2, 1], &[2, 5, 3, 2, 1]];
    for i in 0..100 {
        let net = random_net(&mut rng, shapes[i % shapes.len()]);
        assert_gradients_match(&net, &path_norm_gradient(&net), |n| n.path_norm());
    }
}

#[test]
fn risk_gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut config = RegressionConfig::new(AnalyticTarget::builtin("square", 1).unwrap(), 16, vec![4, 3]);
    config.noise_sd = 0.1;
    let data = generate_data(&config, 3).unwrap();
    let mut checked = 0;
    while checked < 100 {
        let net = random_net(&mut rng, &config.widths());
        let safe = data
            .x
            .iter()
            .all(|x| min_abs_preactivation(&net, &[1.0, x[0]]) > 1e-3);
        if !safe {
            continue;
        }
        let (risk, grad) = risk_gradient(&net, &data);
        assert_eq!(risk, empirical_risk(&net, &data));
        assert_gradients_match(&net, &grad, |n| empirical_risk(n, &data));
        checked += 1;
    }
}

#[test]
fn objective_trace_is_monotone() {
    let mut config = RegressionConfig::new(AnalyticTarget::builtin("exp", 1).unwrap(), 128, vec![6, 6]);
    config.noise_sd = 0.2;
    config.lambda = Lambda::Fixed(1e-3);
    config.optimizer.max_epochs = 300;
    let data = generate_data(&config, 4).unwrap();
    let (_, rep) = fit(&config, &data).unwrap();
    assert!(rep.objective_trace.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(rep.objective, rep.empirical_risk + rep.penalty);
    assert_eq!(rep.objective, *rep.objective_trace.last().unwrap());
}

#[test]
fn path_norm_shrinks_along_the_lambda_path() {
    let mut config = RegressionConfig::new(AnalyticTarget::builtin("square", 1).unwrap(), 256, vec![6, 6]);
    config.optimizer.max_epochs = 1000;
    let data = generate_data(&config, 0).unwrap();
    let start = init_network(&config).unwrap();
    let mut last = f64::INFINITY;
    for lam in [0.0, 1e-3, 1e-2, 1e-1, 1.0] {
        config.lambda = Lambda::Fixed(lam);
        let (_, rep) = fit_from(&config, &data, &start).unwrap();
        assert!(rep.path_norm <= last, "lambda {lam}: {} > {last}", rep.path_norm);
        last = rep.path_norm;
    }
}

#[test]
fn huge_lambda_collapses_the_path_norm() {
    let mut config = RegressionConfig::new(AnalyticTarget::builtin("square", 1).unwrap(), 256, vec![6, 6]);
    config.lambda = Lambda::Fixed(1e6);
    let data = generate_data(&config, 0).unwrap();
    let (_, rep) = fit(&config, &data).unwrap();
    assert!(rep.path_norm < 1e-3, "{}", rep.path_norm);
}

#[test]
fn square_target_beats_the_constant_predictor() {
    let mut config = RegressionConfig::new(AnalyticTarget::builtin("square", 1).unwrap(), 512, vec![8, 8, 8]);
    config.lambda = Lambda::Auto { c: 1e-3 };
    let data = generate_data(&config, 0).unwrap();
    let (_, rep) = fit(&config, &data).unwrap();
    assert!(
        rep.heldout_mse < rep.constant_predictor_mse,
        "{} vs {}",
        rep.heldout_mse,
        rep.constant_predictor_mse
    );
}

#[test]
fn fits_replay_bit_exactly() {
    let mut config = RegressionConfig::new(AnalyticTarget::builtin("runge", 1).unwrap(), 64, vec![4]);
    config.noise_sd = 0.05;
    config.optimizer.max_epochs = 100;
    let data = generate_data(&config, 9).unwrap();
    let (a, ra) = fit(&config, &data).unwrap();
    let (b, rb) = fit(&config, &data).unwrap();
    assert_eq!(ra, rb);
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}
