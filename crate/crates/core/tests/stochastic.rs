//! Fixed-seed Monte Carlo checks of the closed forms and generators.

use coincount::generators::{bernoulli, binned_poisson, binning_loss, geometric_ar1, CommonShock, GeometricAr1};
use coincount::montecarlo::{ks_normality, ks_test, ks_two_sample, mean, sample_std, simulate_counts, z_profile};
use coincount::screening::{screen, Recording, ScreenConfig};
use coincount::seeding::{rng_from_seed, run_trials};
use coincount::{count_coincidences, expected_marks, sigma_delta_sq, EventSequence, RatePair};
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Exact variance of the count for independent Bernoulli sequences on a
/// finite horizon, by summing over band rows and columns.
fn exact_variance(p: f64, q: f64, t: u64, delta: u64) -> f64 {
    let len = |i: u64| (i.saturating_sub(delta).max(1)..=(i + delta).min(t)).count() as f64;
    let (mut area, mut pairs) = (0.0, 0.0);
    for i in 1..=t {
        let r = len(i);
        area += r;
        pairs += r * (r - 1.0);
    }
    // rows and columns have the same length profile
    area * p * q * (1.0 - p * q) + p * q * q * (1.0 - p) * pairs + p * p * q * (1.0 - q) * pairs
}

fn bernoulli_counts(p: f64, q: f64, t: u64, delta: u64, trials: usize, seed: u64) -> Vec<f64> {
    run_trials(seed, 0, trials, 0, |_, rng| {
        Ok(count_coincidences(&bernoulli(p, t, rng)?, &bernoulli(q, t, rng)?, delta)? as f64)
    })
    .unwrap()
}

fn chi_square_p(observed: &[f64], expected: &[f64]) -> f64 {
    let stat: f64 = observed.iter().zip(expected).map(|(o, e)| (o - e).powi(2) / e).sum();
    1.0 - ChiSquared::new((observed.len() - 1) as f64).unwrap().cdf(stat)
}

#[test]
fn exact_variance_matches_asymptotic_form_for_long_horizons() {
    let r = RatePair { p_x: 0.3, p_y: 0.6 };
    for delta in [0, 3, 10] {
        let t = 200_000;
        let ratio = exact_variance(r.p_x, r.p_y, t, delta) / (t as f64 * sigma_delta_sq(r, delta));
        assert!((ratio - 1.0).abs() < 1e-3, "delta {delta}: {ratio}");
    }
}

#[test]
fn mean_count_matches_expectation() {
    for (p, q, delta) in [(0.05, 0.05, 0), (0.2, 0.6, 4), (0.5, 0.1, 12)] {
        let t = 300;
        let c = bernoulli_counts(p, q, t, delta, 100_000, 17);
        let se = sample_std(&c).unwrap() / (c.len() as f64).sqrt();
        let e = expected_marks(RatePair { p_x: p, p_y: q }, t, delta);
        assert!((mean(&c) - e).abs() < 3.0 * se, "({p},{q},{delta}): {} vs {e}", mean(&c));
    }
}

#[test]
fn count_variance_matches_finite_and_asymptotic_forms() {
    let (p, t, delta) = (0.05, 1000, 5);
    let c = bernoulli_counts(p, p, t, delta, 100_000, 23);
    let var = sample_std(&c).unwrap().powi(2);
    let exact = exact_variance(p, p, t, delta);
    assert!((var / exact - 1.0).abs() < 0.02, "{var} vs exact {exact}");
    let sd_scaled = var.sqrt() / (t as f64).sqrt();
    let sigma = sigma_delta_sq(RatePair { p_x: p, p_y: p }, delta).sqrt();
    assert!((sd_scaled / sigma - 1.0).abs() < 0.05, "{sd_scaled} vs {sigma}");
}

#[test]
fn bernoulli_counts_are_binomial_and_first_event_geometric() {
    let (p, t) = (0.07, 2000u64);
    let seqs = run_trials(5, 0, 4000, 0, |_, rng| bernoulli(p, t, rng)).unwrap();
    let n: Vec<f64> = seqs.iter().map(|s| s.len() as f64).collect();
    let se = (t as f64 * p * (1.0 - p) / n.len() as f64).sqrt();
    assert!((mean(&n) - t as f64 * p).abs() < 3.0 * se);
    let var = sample_std(&n).unwrap().powi(2);
    assert!((var / (t as f64 * p * (1.0 - p)) - 1.0).abs() < 0.1);

    // the first event position is geometric; gaps between later events are
    // biased by the finite window and not used here
    let first: Vec<u64> = seqs.iter().filter_map(|s| s.events().first().copied()).collect();
    let cells = 15;
    let mut observed = vec![0.0; cells];
    for g in &first {
        observed[((*g - 1) as usize).min(cells - 1)] += 1.0;
    }
    let total = first.len() as f64;
    let expected: Vec<f64> = (0..cells)
        .map(|k| if k < cells - 1 { p * (1.0 - p).powi(k as i32) } else { (1.0 - p).powi(k as i32) } * total)
        .collect();
    assert!(chi_square_p(&observed, &expected) > 0.001);
}

#[test]
fn binned_poisson_occupancy_and_loss() {
    let (lambda, bin, duration) = (0.4, 1.0, 5000.0);
    let runs = run_trials(9, 0, 400, 0, |_, rng| binned_poisson(lambda, bin, duration, rng)).unwrap();
    let rate: Vec<f64> = runs.iter().map(|(s, _)| s.rate()).collect();
    let p = 1.0 - (-lambda * bin).exp();
    let se = sample_std(&rate).unwrap() / (rate.len() as f64).sqrt();
    assert!((mean(&rate) - p).abs() < 3.0 * se, "{} vs {p}", mean(&rate));
    let lost: Vec<f64> = runs.iter().map(|(s, r)| r.lost(s) as f64).collect();
    let expected = binning_loss(lambda, bin, duration).unwrap();
    let se = sample_std(&lost).unwrap() / (lost.len() as f64).sqrt();
    assert!((mean(&lost) - expected).abs() < 3.0 * se, "{} vs {expected}", mean(&lost));
}

#[test]
fn geometric_ar1_marginal_and_autocorrelation() {
    let (p, alpha) = (0.2, 0.6);
    let mut rng = rng_from_seed(31);
    let mut chain = GeometricAr1::new(p, alpha).unwrap();
    let xs: Vec<f64> = (0..400_000).map(|_| chain.next_state(&mut rng) as f64).collect();

    let m = mean(&xs);
    assert!((m - (1.0 - p) / p).abs() < 0.05, "mean {m}");
    let var = sample_std(&xs).unwrap().powi(2);
    for k in 1..=3 {
        let cov = xs.iter().zip(&xs[k..]).map(|(a, b)| (a - m) * (b - m)).sum::<f64>() / (xs.len() - k) as f64;
        let rho = cov / var;
        assert!((rho - alpha.powi(k as i32)).abs() < 0.02, "lag {k}: {rho}");
    }

    let cells = 20;
    let mut observed = vec![0.0; cells];
    // every 25th value: far enough apart to be close to independent
    let thinned: Vec<f64> = xs.iter().step_by(25).copied().collect();
    for &x in &thinned {
        observed[(x as usize).min(cells - 1)] += 1.0;
    }
    let total = thinned.len() as f64;
    let expected: Vec<f64> = (0..cells)
        .map(|k| if k < cells - 1 { p * (1.0 - p).powi(k as i32) } else { (1.0 - p).powi(k as i32) } * total)
        .collect();
    assert!(chi_square_p(&observed, &expected) > 0.001);

    // the sequence realizes the target rate
    let seqs = run_trials(3, 0, 200, 0, |_, rng| geometric_ar1(0.05, 0.3, 20_000, rng)).unwrap();
    let rate = mean(&seqs.iter().map(|s| s.rate()).collect::<Vec<_>>());
    assert!((rate - 0.05).abs() < 0.002, "{rate}");
}

#[test]
fn shock_without_common_component_looks_independent() {
    let shock = CommonShock {
        lambda_y1: 0.02,
        lambda_y2: 0.02,
        lambda_z: 0.0,
        mu_delay: 30.0,
        sigma_delay: 5.0,
        horizon: 4000,
    };
    let lags = [5u64];
    let joint = simulate_counts(|rng| shock.sample(rng), &lags, 3000, 41, 0, 0).unwrap();
    let p = 1.0 - (-0.02f64).exp();
    let indep =
        simulate_counts(|rng| Ok((bernoulli(p, 4000, rng)?, bernoulli(p, 4000, rng)?)), &lags, 3000, 41, 1, 0).unwrap();
    let ks = ks_two_sample(&joint.column(0), &indep.column(0)).unwrap();
    assert!(ks.p_value > 0.01, "{ks:?}");
}

#[test]
fn ks_normality_has_nominal_size() {
    let p_values = run_trials(77, 0, 8000, 0, |_, rng| {
        let xs: Vec<f64> = (0..300).map(|_| StandardNormal.sample(rng)).collect();
        Ok(ks_normality(&xs)?.p_value)
    })
    .unwrap();
    let below = |level: f64| p_values.iter().filter(|&&v| v < level).count() as f64 / p_values.len() as f64;
    // asymptotic p-values are slightly conservative at this sample size
    assert!((0.035..=0.057).contains(&below(0.05)), "{}", below(0.05));
    assert!((0.004..=0.013).contains(&below(0.01)), "{}", below(0.01));
    assert!((mean(&p_values) - 0.5).abs() < 0.03);

    let shifted = run_trials(78, 0, 400, 0, |_, rng| {
        let xs: Vec<f64> = (0..300)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                0.3 + z
            })
            .collect();
        Ok(ks_normality(&xs)?.p_value)
    })
    .unwrap();
    assert!(shifted.iter().filter(|&&v| v < 0.05).count() > 350);
    let uniform = ks_test(&[0.1, 0.4, 0.45, 0.8, 0.9, 0.2, 0.6, 0.7, 0.3], |u| u.clamp(0.0, 1.0)).unwrap();
    assert!(uniform.p_value > 0.5);
}

#[test]
fn null_z_profile_is_centred() {
    let lags: Vec<u64> = (0..=20).collect();
    let zs = run_trials(101, 0, 2000, 0, |_, rng| {
        let p = z_profile(&bernoulli(0.05, 2000, rng)?, &bernoulli(0.05, 2000, rng)?, &lags)?;
        Ok(p.z.into_iter().map(|z| z.unwrap()).collect::<Vec<f64>>())
    })
    .unwrap();
    let all: Vec<f64> = zs.into_iter().flatten().collect();
    assert!(mean(&all).abs() < 0.05, "{}", mean(&all));
}

#[test]
fn null_screening_false_edge_rate() {
    let n = 40;
    let channels: Vec<EventSequence> = run_trials(55, 0, n, 0, |_, rng| bernoulli(0.05, 5000, rng)).unwrap();
    let labels = (0..n).map(|k| format!("n{k:02}")).collect();
    let rec = Recording::new(channels, labels).unwrap();
    let out = screen(&rec, &ScreenConfig { lags: vec![0], threshold: 1.96, two_sided: true, workers: 0 }).unwrap();
    let rate = out.edges.len() as f64 / out.pair_count as f64;
    assert_eq!(out.pair_count, n * (n - 1) / 2);
    assert!((0.025..=0.08).contains(&rate), "false-edge rate {rate}");
}

#[test]
fn shared_shock_pair_dominates_distractors() {
    let horizon = 50_000;
    let shock =
        CommonShock { lambda_y1: 0.01, lambda_y2: 0.01, lambda_z: 0.01, mu_delay: 20.0, sigma_delay: 2.0, horizon };
    let mut rng = rng_from_seed(8);
    let (a, b) = shock.sample(&mut rng).unwrap();
    let mut channels = vec![a, b];
    let mut labels = vec!["a".to_string(), "b".to_string()];
    for k in 0..4 {
        channels.push(bernoulli(0.02, horizon, &mut rng).unwrap());
        labels.push(format!("d{k}"));
    }
    let rec = Recording::new(channels, labels).unwrap();
    let lags: Vec<u64> = (20..=60).collect();
    let out = screen(&rec, &ScreenConfig { lags: lags.clone(), threshold: 1e-9, two_sided: true, workers: 0 }).unwrap();
    for &lag in &lags {
        let at: Vec<_> = out.edges.iter().filter(|e| e.lag == lag).collect();
        let shared = at.iter().find(|e| e.label_a == "a" && e.label_b == "b").expect("shared pair flagged").z;
        let rival =
            at.iter().filter(|e| !(e.label_a == "a" && e.label_b == "b")).map(|e| e.z.abs()).fold(0.0, f64::max);
        assert!(shared > rival, "lag {lag}: {shared} vs {rival}");
    }
}
