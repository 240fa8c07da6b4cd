use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ddf_dmt::sim::{
    label_cvma, run_range, run_trial, run_trials, sample_channel, ChannelConfig, ChannelDraw,
    ProtocolConfig, Sampling, SimConfig, SimScenario,
};

fn draws(scenario: SimScenario, snr_db: f64, n: usize, seed: u64) -> Vec<(ChannelDraw, f64)> {
    let chan = ChannelConfig::new(scenario, snr_db, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| sample_channel(&chan, &Sampling::Plain, &mut rng)).collect()
}

fn powers(d: &ChannelDraw) -> Vec<f64> {
    match *d {
        ChannelDraw::Relay { g_sd, g_sr, g_rd } => vec![g_sd, g_sr, g_rd],
        ChannelDraw::Mar { g1, g2, gr, h1, h2 } => vec![g1, g2, gr, h1, h2],
        ChannelDraw::Cvma { g, h } => vec![g[0][0], g[0][1], g[1][0], g[1][1], h],
    }
    .into_iter()
    .map(|z| z.norm_sqr())
    .collect()
}

#[test]
fn gains_are_unit_mean_exponential_and_uncorrelated() {
    let n = 1_000_000;
    let sample = draws(SimScenario::Cvma, 10.0, n, 1);
    let cols: Vec<Vec<f64>> = (0..5).map(|k| sample.iter().map(|(d, _)| powers(d)[k]).collect()).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    for c in &cols {
        let m = mean(c);
        assert!((m - 1.0).abs() < 0.01, "mean {m}");
        let tail = c.iter().filter(|&&x| x > 1.0).count() as f64 / n as f64;
        assert!((tail - (-1.0f64).exp()).abs() < 0.003, "tail {tail}");
    }
    for a in 0..5 {
        for b in a + 1..5 {
            let (ma, mb) = (mean(&cols[a]), mean(&cols[b]));
            let cov: f64 = cols[a].iter().zip(&cols[b]).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / n as f64;
            assert!(cov.abs() < 0.01, "links {a},{b} covariance {cov}");
        }
    }
    assert!(sample.iter().all(|(_, w)| *w == 1.0));
}

#[test]
fn importance_weights_are_unbiased() {
    let chan = ChannelConfig::new(SimScenario::Relay, 30.0, 1.0).unwrap();
    let s = Sampling::Importance { alpha: 0.5, gamma: 1.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 400_000;
    let x = 0.01;
    let mut acc = 0.0;
    for _ in 0..n {
        let (d, w) = sample_channel(&chan, &s, &mut rng);
        if powers(&d)[0] < x {
            acc += w;
        }
    }
    let est = acc / n as f64;
    let truth = 1.0 - (-x).exp();
    assert!((est / truth - 1.0).abs() < 0.05, "{est} vs {truth}");
}

#[test]
fn swapping_users_swaps_outcomes() {
    for scenario in [SimScenario::Mar, SimScenario::Cvma] {
        let chan = ChannelConfig::new(scenario, 12.0, 1.0).unwrap();
        let proto = ProtocolConfig::new(scenario, 3, 0.7, 100).unwrap();
        for (d, _) in draws(scenario, 12.0, 20_000, 3) {
            let a = run_trial(&d, &proto, &chan);
            let b = run_trial(&d.swapped_users(), &proto, &chan);
            assert_eq!(a.error, b.error, "{scenario:?}");
            assert_eq!(a.rounds_used, b.rounds_used, "{scenario:?}");
            assert_eq!(a.user_errors, [b.user_errors[1], b.user_errors[0]], "{scenario:?}");
        }
    }
}

#[test]
fn extra_rounds_never_add_errors_on_a_fixed_channel() {
    for scenario in [SimScenario::Relay, SimScenario::Mar] {
        let chan = ChannelConfig::new(scenario, 10.0, 1.0).unwrap();
        for (d, _) in draws(scenario, 10.0, 20_000, 4) {
            let mut prev = true;
            for l in 1..=4 {
                let proto = ProtocolConfig::new(scenario, l, 0.8, 100).unwrap();
                let e = run_trial(&d, &proto, &chan).error;
                assert!(prev || !e, "{scenario:?} L={l}");
                prev = e;
            }
        }
    }
}

#[test]
fn error_rate_falls_with_snr_and_rounds() {
    for scenario in [SimScenario::Relay, SimScenario::Mar, SimScenario::Cvma] {
        let mut by_l = Vec::new();
        for l in [1u32, 2] {
            let cfg = SimConfig {
                scenario,
                l,
                r1: 0.5,
                snr_db_list: vec![5.0, 10.0, 15.0],
                c: 1.0,
                t: 100,
                n_trials: 100_000,
                max_trials: None,
                min_events: 50,
                seed: 5,
                sampling: Sampling::Plain,
            };
            let pts = run_trials(&cfg).unwrap();
            for w in pts.windows(2) {
                assert!(w[1].pe < w[0].pe, "{scenario:?} L={l}: {} !< {}", w[1].pe, w[0].pe);
            }
            by_l.push(pts);
        }
        for (a, b) in by_l[0].iter().zip(&by_l[1]) {
            let sigma = (a.pe_std.powi(2) + b.pe_std.powi(2)).sqrt();
            assert!(b.pe <= a.pe + 3.0 * sigma, "{scenario:?} at {} dB", a.snr_db);
        }
        // same first-round rate: a second round only removes errors
        let proto1 = ProtocolConfig::new(scenario, 1, 0.9, 100).unwrap();
        let proto2 = ProtocolConfig::new(scenario, 2, 0.9, 100).unwrap();
        let chan = ChannelConfig::new(scenario, 10.0, 1.0).unwrap();
        let a = run_range(9, 0, 50_000, &proto1, &chan, &Sampling::Plain);
        let b = run_range(9, 0, 50_000, &proto2, &chan, &Sampling::Plain);
        assert!(b.errors < a.errors, "{scenario:?}");
    }
}

#[test]
fn labeling_assertion_holds_on_random_channels() {
    for (d, _) in draws(SimScenario::Cvma, 20.0, 50_000, 6) {
        let ChannelDraw::Cvma { g, .. } = d else { unreachable!() };
        let lab = label_cvma(&g, 100.0);
        assert!(lab.holds(100.0));
    }
    let g = [
        [Complex64::new(2.0, 0.0), Complex64::new(0.1, 0.0)],
        [Complex64::new(0.3, 0.0), Complex64::new(0.2, 0.0)],
    ];
    let lab = label_cvma(&g, 10.0);
    assert_eq!((lab.superior, lab.antenna), (0, 0));
}
