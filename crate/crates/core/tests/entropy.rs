use nnapprox::entropy::*;
use nnapprox::ActivationKind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn depth_zero_bound_is_the_linear_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..100 {
        let d = rng.random_range(1..=50);
        let spec = EntropyBoundSpec {
            eps: rng.random_range(0.01..2.0),
            depth: 0,
            widths: vec![d, 1],
            b_cap: rng.random_range(0.01..10.0),
            r: rng.random_range(0.01..10.0),
            n: rng.random_range(1..=1000),
        };
        assert_eq!(network_bound(&spec).unwrap(), linear_bound(spec.b_cap, spec.r, spec.eps, d));
    }
}

#[test]
fn greedy_covers_stay_below_the_bound_for_every_activation() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for (i, act) in [ActivationKind::Abs, ActivationKind::Relu, ActivationKind::Identity]
        .into_iter()
        .cycle()
        .take(9)
        .enumerate()
    {
        let depth = rng.random_range(0..=2);
        let mut widths: Vec<usize> = (0..depth + 1).map(|_| rng.random_range(1..=3)).collect();
        widths.push(1);
        let spec = EntropyBoundSpec {
            eps: rng.random_range(0.05..0.5),
            depth,
            widths,
            b_cap: rng.random_range(0.5..2.0),
            r: 1.0,
            n: rng.random_range(2..=32),
        };
        let pts = sample_points(spec.n, spec.input_dim(), spec.r, i as u64);
        let sampler = UniformCappedSampler::for_spec(act, &spec).unwrap();
        let cover = empirical_covering(&sampler, &pts, spec.eps, 2000, i as u64).unwrap();
        assert!(cover.log2_size <= network_bound(&spec).unwrap(), "{spec:?} {cover:?}");
    }
}

#[test]
fn greedy_cover_shrinks_as_eps_grows() {
    let spec = EntropyBoundSpec {
        eps: 0.1,
        depth: 1,
        widths: vec![1, 2, 1],
        b_cap: 1.0,
        r: 1.0,
        n: 8,
    };
    let pts = sample_points(spec.n, 1, 1.0, 0);
    let sampler = UniformCappedSampler::for_spec(ActivationKind::Abs, &spec).unwrap();
    let vectors = sample_evaluations(&sampler, &pts, 3000, 5).unwrap();
    let sizes: Vec<usize> = [0.01, 0.02, 0.05, 0.1, 0.2, 0.5]
        .iter()
        .map(|&e| greedy_cover(&vectors, e))
        .collect();
    assert!(sizes.windows(2).all(|w| w[1] <= w[0]), "{sizes:?}");
}

#[test]
fn tiny_abs_example_respects_the_bound() {
    let spec = EntropyBoundSpec {
        eps: 0.25,
        depth: 1,
        widths: vec![1, 2, 1],
        b_cap: 1.0,
        r: 1.0,
        n: 8,
    };
    let pts = sample_points(8, 1, 1.0, 0);
    let sampler = UniformCappedSampler::for_spec(ActivationKind::Abs, &spec).unwrap();
    let cover = empirical_covering(&sampler, &pts, spec.eps, 5000, 0).unwrap();
    assert!(cover.log2_size <= network_bound(&spec).unwrap());
}
