use coincount::generators::{subsample, GeneratorSpec, Model};
use coincount::io::{self, Format};
use coincount::montecarlo::z_profile;
use coincount::screening::{screen, Recording, ScreenConfig};
use coincount::{
    band_area, count_coincidences, count_profile, expected_marks, sigma_delta_sq, truncated_count, z_score,
    EventSequence, RatePair,
};
use proptest::prelude::*;

fn seq(bins: &[bool]) -> EventSequence {
    EventSequence::from_occupancy(bins).unwrap()
}

fn lattice_count(x: &[bool], y: &[bool], delta: u64) -> u64 {
    let mut n = 0;
    for (i, &a) in x.iter().enumerate() {
        for (j, &b) in y.iter().enumerate() {
            if a && b && (i as i64 - j as i64).unsigned_abs() <= delta {
                n += 1;
            }
        }
    }
    n
}

/// Two occupancy vectors of a shared horizon in 1..=64.
fn pair() -> impl Strategy<Value = (Vec<bool>, Vec<bool>)> {
    (1usize..=64).prop_flat_map(|t| (prop::collection::vec(any::<bool>(), t), prop::collection::vec(any::<bool>(), t)))
}

fn rates() -> impl Strategy<Value = RatePair> {
    (0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(p_x, p_y)| RatePair { p_x, p_y })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn count_matches_lattice_enumeration((x, y) in pair(), delta in 0u64..70) {
        prop_assert_eq!(count_coincidences(&seq(&x), &seq(&y), delta).unwrap(), lattice_count(&x, &y, delta));
    }

    #[test]
    fn count_is_symmetric((x, y) in pair(), delta in 0u64..70) {
        let (a, b) = (seq(&x), seq(&y));
        prop_assert_eq!(count_coincidences(&a, &b, delta).unwrap(), count_coincidences(&b, &a, delta).unwrap());
    }

    #[test]
    fn count_is_monotone_in_lag((x, y) in pair(), delta in 0u64..70) {
        let (a, b) = (seq(&x), seq(&y));
        prop_assert!(count_coincidences(&a, &b, delta).unwrap() <= count_coincidences(&a, &b, delta + 1).unwrap());
    }

    #[test]
    fn truncated_count_brackets_the_count((x, y) in pair(), delta in 0u64..40) {
        let t = x.len() as u64;
        prop_assume!(2 * delta + 2 < t);
        let (a, b) = (seq(&x), seq(&y));
        let s = count_coincidences(&a, &b, delta).unwrap();
        let l = truncated_count(&a, &b, delta).unwrap();
        let left_out = (1..=t)
            .filter(|&i| i <= delta || i >= t - delta)
            .map(|i| (1..=t).filter(|&j| i.abs_diff(j) <= delta).count() as u64)
            .sum::<u64>();
        prop_assert!(l <= s);
        prop_assert!(s <= l + left_out);
    }

    #[test]
    fn band_area_matches_enumeration(t in 1u64..=80, delta in 0u64..=90) {
        let brute = (1..=t).flat_map(|i| (1..=t).map(move |j| (i, j))).filter(|&(i, j)| i.abs_diff(j) <= delta).count();
        prop_assert_eq!(band_area(t, delta), brute as u64);
    }

    #[test]
    fn profile_matches_single_lags((x, y) in pair(), mut lags in prop::collection::vec(0u64..80, 1..12)) {
        lags.sort_unstable();
        lags.dedup();
        let (a, b) = (seq(&x), seq(&y));
        let profile = count_profile(&a, &b, &lags).unwrap();
        for (k, &d) in lags.iter().enumerate() {
            prop_assert_eq!(profile[k], count_coincidences(&a, &b, d).unwrap());
        }
    }

    #[test]
    fn moments_are_symmetric_and_monotone(r in rates(), t in 1u64..5000, delta in 0u64..200) {
        let e = expected_marks(r, t, delta);
        prop_assert_eq!(e, expected_marks(r.swapped(), t, delta));
        prop_assert!(e <= expected_marks(r, t, delta + 1));
        let s = sigma_delta_sq(r, delta);
        prop_assert!((s - sigma_delta_sq(r.swapped(), delta)).abs() <= 1e-12 * s.max(1.0));
        prop_assert!(s >= 0.0);
    }

    #[test]
    fn z_undefined_exactly_when_sigma_vanishes((x, y) in pair(), delta in 0u64..70) {
        let (a, b) = (seq(&x), seq(&y));
        let t = a.horizon() as usize;
        let degenerate = a.is_empty() || b.is_empty() || (a.len() == t && b.len() == t);
        let stat = z_score(&a, &b, delta).unwrap();
        prop_assert_eq!(stat.z.is_none(), degenerate);
        prop_assert_eq!(stat.sigma == 0.0, degenerate);
    }

    #[test]
    fn dz_telescopes((x, y) in pair(), mut lags in prop::collection::vec(0u64..80, 2..12)) {
        lags.sort_unstable();
        lags.dedup();
        prop_assume!(lags.len() >= 2);
        let p = z_profile(&seq(&x), &seq(&y), &lags).unwrap();
        if let (Some(first), Some(last)) = (p.z[0], p.z[lags.len() - 1]) {
            let total: f64 = p.dz.iter().map(|d| d.unwrap()).sum();
            prop_assert!((total - (last - first)).abs() <= 1e-9 * (1.0 + first.abs() + last.abs()));
        } else {
            prop_assert!(p.dz.iter().all(Option::is_none));
        }
    }

    #[test]
    fn subsample_ors_blocks(x in prop::collection::vec(any::<bool>(), 1..200), factor in 1u64..12) {
        let (out, eff) = subsample(&seq(&x), factor).unwrap();
        let expected: Vec<bool> = x.chunks(factor as usize).map(|c| c.iter().any(|&b| b)).collect();
        prop_assert_eq!(out.horizon(), (x.len() as u64).div_ceil(factor));
        prop_assert_eq!(out.occupancy(), expected);
        let p = x.iter().filter(|&&b| b).count() as f64 / x.len() as f64;
        prop_assert!((eff - (1.0 - (1.0 - p).powi(factor as i32))).abs() < 1e-12);
    }

    #[test]
    fn text_formats_round_trip(channels in (1usize..=40).prop_flat_map(|t| prop::collection::vec(prop::collection::vec(any::<bool>(), t), 1..5))) {
        let labels: Vec<String> = (0..channels.len()).map(|k| format!("c{k}")).collect();
        let rec = Recording::new(channels.iter().map(|c| seq(c)).collect(), labels).unwrap();
        let ts = io::parse_events(&io::format_timestamps_recording(&rec), Format::Timestamps, None).unwrap();
        let dense = io::parse_events(&io::format_dense_recording(&rec), Format::Dense, None).unwrap();
        // channels without events vanish from the timestamps format
        for (label, ch) in rec.labels().iter().zip(rec.channels()) {
            if !ch.is_empty() {
                prop_assert_eq!(ts.recording.channel(label), Some(ch));
            }
        }
        prop_assert_eq!(dense.recording, rec.clone());
        let single = io::parse_events(&io::format_timestamps(&rec.channels()[0]), Format::Timestamps, None).unwrap();
        prop_assert_eq!(&single.into_single().unwrap(), &rec.channels()[0]);
    }

    #[test]
    fn screening_is_permutation_equivariant(
        channels in (30usize..=60).prop_flat_map(|t| prop::collection::vec(prop::collection::vec(any::<bool>(), t), 2..6)),
        seed in any::<u64>(),
    ) {
        let n = channels.len();
        let labels: Vec<String> = (0..n).map(|k| format!("ch{k}")).collect();
        let mut order: Vec<usize> = (0..n).collect();
        // deterministic shuffle from the seed
        for i in (1..n).rev() {
            order.swap(i, (seed.rotate_left(i as u32) % (i as u64 + 1)) as usize);
        }
        let rec = Recording::new(channels.iter().map(|c| seq(c)).collect(), labels.clone()).unwrap();
        let shuffled = Recording::new(
            order.iter().map(|&k| seq(&channels[k])).collect(),
            order.iter().map(|&k| labels[k].clone()).collect(),
        ).unwrap();
        let cfg = ScreenConfig { lags: vec![0, 1, 3], threshold: 0.5, two_sided: true, workers: 1 };
        prop_assert_eq!(screen(&rec, &cfg).unwrap(), screen(&shuffled, &cfg).unwrap());
    }

    #[test]
    fn event_sequence_json_round_trip(x in prop::collection::vec(any::<bool>(), 1..100)) {
        let s = seq(&x);
        let text = serde_json::to_string(&s).unwrap();
        prop_assert_eq!(serde_json::from_str::<EventSequence>(&text).unwrap(), s);
    }
}

#[test]
fn worked_examples() {
    assert_eq!(band_area(5, 1), 13);
    let full = EventSequence::full(10).unwrap();
    assert_eq!(count_coincidences(&full, &full, 1).unwrap(), band_area(10, 1));
    // interior rows 2..=8 each hold 2*delta+1 = 3 marks
    assert_eq!(truncated_count(&full, &full, 1).unwrap(), 21);
}

#[test]
fn generator_spec_parses_from_toml() {
    let text = "model = \"common_shock\"\nlambda_y1 = 0.01\nlambda_y2 = 0.01\nlambda_z = 0.01\n\
                mu_delay = 50.0\nsigma_delay = 10.0\nhorizon = 10000\nseed = 7\n";
    let spec: GeneratorSpec = toml::from_str(text).unwrap();
    assert_eq!(spec.seed, 7);
    assert!(matches!(spec.model, Model::CommonShock { horizon: 10000, .. }));
    let back: GeneratorSpec = toml::from_str(&toml::to_string(&spec).unwrap()).unwrap();
    assert_eq!(back, spec);
    assert!(
        toml::from_str::<GeneratorSpec>("model = \"bernoulli\"\np = 0.1\nhorizon = 5\nseed = 1\nextra = 2\n").is_err()
    );
    assert_eq!(spec.generate().unwrap(), spec.generate().unwrap());
}
