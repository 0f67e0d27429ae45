//! Pairwise screening of a multi-channel recording.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::events::EventSequence;
use crate::montecarlo::z_profile;

/// Channels sharing one horizon, each with a unique label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Recording {
    channels: Vec<EventSequence>,
    labels: Vec<String>,
}

impl Recording {
    pub fn new(channels: Vec<EventSequence>, labels: Vec<String>) -> Result<Self> {
        if channels.len() != labels.len() {
            return Err(Error::domain(format!("{} channels but {} labels", channels.len(), labels.len())));
        }
        if let Some(first) = channels.first() {
            if let Some(bad) = channels.iter().find(|c| c.horizon() != first.horizon()) {
                return Err(Error::domain(format!(
                    "channel horizons differ ({} vs {})",
                    first.horizon(),
                    bad.horizon()
                )));
            }
        }
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() || label.contains(|c: char| c == ',' || c.is_whitespace()) {
                return Err(Error::domain(format!("label {label:?} must be non-empty without commas or whitespace")));
            }
            if labels[..i].contains(label) {
                return Err(Error::domain(format!("duplicate channel label {label:?}")));
            }
        }
        Ok(Recording { channels, labels })
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn horizon(&self) -> Option<u64> {
        self.channels.first().map(EventSequence::horizon)
    }

    pub fn channels(&self) -> &[EventSequence] {
        &self.channels
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn channel(&self, label: &str) -> Option<&EventSequence> {
        self.labels.iter().position(|l| l == label).map(|i| &self.channels[i])
    }

    pub fn into_parts(self) -> (Vec<EventSequence>, Vec<String>) {
        (self.channels, self.labels)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Edge {
    pub label_a: String,
    pub label_b: String,
    pub lag: u64,
    pub z: f64,
    pub observed: u64,
    pub expected: f64,
}

/// A pair whose Z-score is undefined at every lag (a channel is empty, or
/// both are fully occupied).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UndefinedPair {
    pub label_a: String,
    pub label_b: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeList {
    pub threshold: f64,
    pub two_sided: bool,
    pub lags: Vec<u64>,
    /// Unordered channel pairs examined.
    pub pair_count: usize,
    /// Individual tests run, `pair_count * lags.len()`; no correction applied.
    pub test_count: usize,
    /// Sorted by `(label_a, label_b, lag)` with `label_a < label_b`.
    pub edges: Vec<Edge>,
    pub undefined: Vec<UndefinedPair>,
}

#[derive(Debug, Clone)]
pub struct ScreenConfig {
    pub lags: Vec<u64>,
    pub threshold: f64,
    /// Also flag `z <= -threshold`.
    pub two_sided: bool,
    pub workers: usize,
}

/// Computes the Z profile of every unordered channel pair and keeps each
/// (pair, lag) whose defined Z reaches the threshold. All passing lags of a
/// pair are reported; none is singled out.
pub fn screen(recording: &Recording, cfg: &ScreenConfig) -> Result<EdgeList> {
    if recording.len() < 2 {
        return Err(Error::domain("screening needs at least two channels"));
    }
    if !(cfg.threshold > 0.0) {
        return Err(Error::domain(format!("threshold {} must be positive", cfg.threshold)));
    }
    let mut lags = cfg.lags.clone();
    lags.sort_unstable();
    lags.dedup();
    if lags.is_empty() {
        return Err(Error::domain("lag grid is empty"));
    }

    let n = recording.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .map(|(a, b)| if recording.labels[a] <= recording.labels[b] { (a, b) } else { (b, a) })
        .collect();

    let work = || {
        pairs
            .par_iter()
            .map(|&(a, b)| {
                let profile = z_profile(&recording.channels[a], &recording.channels[b], &lags)?;
                Ok((a, b, profile))
            })
            .collect::<Result<Vec<_>>>()
    };
    let profiles = if cfg.workers == 0 {
        work()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?
            .install(work)?
    };

    let mut edges = Vec::new();
    let mut undefined = Vec::new();
    for (a, b, profile) in profiles {
        let (la, lb) = (&recording.labels[a], &recording.labels[b]);
        if profile.z.iter().all(Option::is_none) {
            undefined.push(UndefinedPair { label_a: la.clone(), label_b: lb.clone() });
            continue;
        }
        for stat in &profile.stats {
            let Some(z) = stat.z else { continue };
            let hit = z >= cfg.threshold || (cfg.two_sided && z <= -cfg.threshold);
            if hit {
                edges.push(Edge {
                    label_a: la.clone(),
                    label_b: lb.clone(),
                    lag: stat.lag,
                    z,
                    observed: stat.observed,
                    expected: stat.expected,
                });
            }
        }
    }
    edges.sort_by(|x, y| (&x.label_a, &x.label_b, x.lag).cmp(&(&y.label_a, &y.label_b, y.lag)));
    undefined.sort_by(|x, y| (&x.label_a, &x.label_b).cmp(&(&y.label_a, &y.label_b)));
    Ok(EdgeList {
        threshold: cfg.threshold,
        two_sided: cfg.two_sided,
        pair_count: pairs.len(),
        test_count: pairs.len() * lags.len(),
        lags,
        edges,
        undefined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(t: u64, ev: &[u64]) -> EventSequence {
        EventSequence::new(t, ev.to_vec()).unwrap()
    }

    #[test]
    fn recording_validation() {
        let a = seq(10, &[1]);
        let b = seq(11, &[1]);
        assert!(Recording::new(vec![a.clone(), b], vec!["a".into(), "b".into()]).is_err());
        assert!(Recording::new(vec![a.clone(), a.clone()], vec!["a".into(), "a".into()]).is_err());
        assert!(Recording::new(vec![a.clone()], vec!["a b".into()]).is_err());
        assert!(Recording::new(vec![a.clone()], vec![]).is_err());
        let r = Recording::new(vec![a.clone()], vec!["a".into()]).unwrap();
        let cfg = ScreenConfig { lags: vec![0], threshold: 1.96, two_sided: false, workers: 0 };
        assert!(screen(&r, &cfg).is_err());
    }

    #[test]
    fn empty_channel_goes_to_undefined() {
        let t = 200;
        let x = seq(t, &[10, 50, 90, 130]);
        let y = seq(t, &[10, 50, 90, 130, 170]);
        let e = EventSequence::empty(t).unwrap();
        let r = Recording::new(vec![x, e, y], vec!["x".into(), "e".into(), "y".into()]).unwrap();
        let cfg = ScreenConfig { lags: vec![2, 0, 1], threshold: 1.96, two_sided: false, workers: 2 };
        let out = screen(&r, &cfg).unwrap();
        assert_eq!(out.pair_count, 3);
        assert_eq!(out.lags, vec![0, 1, 2]);
        assert_eq!(out.test_count, 9);
        assert_eq!(
            out.undefined,
            vec![
                UndefinedPair { label_a: "e".into(), label_b: "x".into() },
                UndefinedPair { label_a: "e".into(), label_b: "y".into() },
            ]
        );
        assert!(out.edges.iter().all(|e| e.label_a == "x" && e.label_b == "y"));
        assert_eq!(out.edges.len(), 3);
        assert!(cfg.threshold > 0.0);
    }

    #[test]
    fn rejects_non_positive_threshold() {
        let x = seq(20, &[1]);
        let r = Recording::new(vec![x.clone(), x], vec!["a".into(), "b".into()]).unwrap();
        let cfg = ScreenConfig { lags: vec![0], threshold: 0.0, two_sided: false, workers: 0 };
        assert!(screen(&r, &cfg).is_err());
    }
}
