//! Randomized invariants: waveform evaluation against its literal sum,
//! exact piecewise extraction against direct network evaluation, crossing
//! counts against the depth-dependent cap, and serialization round trips.

use fourier2relu::piecewise::{
    crossing_number, from_network_1d, telgarsky_bound, PiecewiseLinear,
};
use fourier2relu::relu_net::{LayerSpec, ReluNetwork};
use fourier2relu::waveform::{waveform_eval, waveform_eval_literal, TriangleParams};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Small random one-input networks; a seed keeps the strategy simple and the
// failures reproducible.
fn net_from_seed(seed: u64, depth: u32) -> ReluNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layers = Vec::new();
    let mut prev = 1usize;
    for _ in 0..depth {
        let units = rng.gen_range(1..=5usize);
        let weights: Vec<Vec<f64>> = (0..units)
            .map(|_| (0..prev).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let thresholds: Vec<f64> = (0..units).map(|_| rng.gen_range(-1.5..1.5)).collect();
        layers.push(LayerSpec::new(weights, thresholds).unwrap());
        prev = units;
    }
    let readout: Vec<f64> = (0..prev).map(|_| rng.gen_range(-1.5..1.5)).collect();
    ReluNetwork::new(1, layers, readout).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn waveform_matches_literal_sum(
        alpha in 0.05f64..2.0,
        beta in 0.05f64..2.0,
        k in 1u32..=8,
        t in -40.0f64..40.0,
    ) {
        let params = TriangleParams::new(alpha, beta, k).unwrap();
        let fast = waveform_eval(t, &params);
        let slow = waveform_eval_literal(t, &params);
        prop_assert!(
            (fast - slow).abs() <= 1e-9 * (1.0 + params.height()),
            "fast {fast} vs literal {slow}"
        );
    }

    #[test]
    fn waveform_is_even(
        alpha in 0.05f64..2.0,
        beta in 0.05f64..2.0,
        k in 1u32..=8,
        t in 0.0f64..40.0,
    ) {
        let params = TriangleParams::new(alpha, beta, k).unwrap();
        let plus = waveform_eval(t, &params);
        let minus = waveform_eval(-t, &params);
        prop_assert!(
            (plus - minus).abs() <= 1e-12 * (1.0 + params.height()),
            "T({t}) = {plus} but T(-{t}) = {minus}"
        );
    }

    #[test]
    fn pwl_agrees_with_network_evaluation(
        seed in any::<u64>(),
        depth in 1u32..=3,
        xs in prop::collection::vec(-3.0f64..3.0, 1..8),
    ) {
        let net = net_from_seed(seed, depth);
        let pwl = from_network_1d(&net).unwrap();
        for &x in &xs {
            let want = net.evaluate(&[x]).unwrap();
            prop_assert!(
                (pwl.eval(x) - want).abs() <= 1e-9 * (1.0 + want.abs()),
                "pwl {} vs network {want} at x = {x}",
                pwl.eval(x)
            );
        }
    }

    #[test]
    fn crossing_count_respects_depth_cap(
        seed in any::<u64>(),
        depth in 1u32..=3,
        level in -1.0f64..1.0,
    ) {
        let net = net_from_seed(seed, depth);
        let pwl = from_network_1d(&net).unwrap();
        let crossings = crossing_number(&pwl, level) as f64;
        let cap = telgarsky_bound(net.unit_count(), net.depth());
        prop_assert!(crossings <= cap, "crossings {crossings} over cap {cap}");
    }

    #[test]
    fn linear_combination_is_pointwise(
        seed_a in any::<u64>(),
        seed_b in any::<u64>(),
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
        offset in -1.0f64..1.0,
        xs in prop::collection::vec(-3.0f64..3.0, 1..8),
    ) {
        let f = from_network_1d(&net_from_seed(seed_a, 2)).unwrap();
        let g = from_network_1d(&net_from_seed(seed_b, 1)).unwrap();
        let combo = PiecewiseLinear::linear_combine(&[(a, &f), (b, &g)], offset);
        for &x in &xs {
            let want = a * f.eval(x) + b * g.eval(x) + offset;
            prop_assert!(
                (combo.eval(x) - want).abs() <= 1e-9 * (1.0 + want.abs()),
                "combo {} vs {want} at x = {x}",
                combo.eval(x)
            );
        }
    }

    #[test]
    fn relu_clamps_pointwise_and_stays_canonical(
        seed in any::<u64>(),
        xs in prop::collection::vec(-3.0f64..3.0, 1..8),
    ) {
        let f = from_network_1d(&net_from_seed(seed, 2)).unwrap();
        let r = f.relu();
        prop_assert!(r.is_canonical());
        for &x in &xs {
            let want = f.eval(x).max(0.0);
            prop_assert!(
                (r.eval(x) - want).abs() <= 1e-12 * (1.0 + want.abs()),
                "relu {} vs {want} at x = {x}",
                r.eval(x)
            );
        }
    }

    #[test]
    fn canonicalization_preserves_evaluation(
        seed in any::<u64>(),
        depth in 1u32..=3,
        xs in prop::collection::vec(-3.0f64..3.0, 1..8),
    ) {
        let pwl = from_network_1d(&net_from_seed(seed, depth)).unwrap();
        let canon = pwl.canonicalized(1e-12);
        prop_assert!(canon.is_canonical());
        for &x in &xs {
            let want = pwl.eval(x);
            prop_assert!(
                (canon.eval(x) - want).abs() <= 1e-9 * (1.0 + want.abs()),
                "canonical {} vs {want} at x = {x}",
                canon.eval(x)
            );
        }
    }

    #[test]
    fn network_json_round_trip_is_bit_exact(seed in any::<u64>(), depth in 1u32..=3) {
        let net = net_from_seed(seed, depth);
        let text = net.to_json();
        let back = ReluNetwork::from_json(&text).unwrap();
        prop_assert_eq!(back.to_json(), text);
    }
}
