//! Text formats for event data and result tables.
//!
//! **timestamps**: an optional run of `#` comments, then a header `T=<horizon>`,
//! then one event per line. A line is either a bare 1-based index (single
//! channel) or `<label>,<index>` / `<label> <index>` (multi-channel; channels
//! are ordered by first appearance). Duplicate indices within a channel are
//! collapsed and counted.
//!
//! **dense**: one line of `0`/`1` characters per channel, the horizon being the
//! line length. Lines may be prefixed by `<label>,` or `<label> `.
//!
//! With a bin size `b`, timestamp values are real times in `[0, T)`; time `t`
//! falls into bin `floor(t / b) + 1` and the horizon is `floor(T / b)`. Times
//! in a trailing partial bin are discarded and counted.
//!
//! Tables are CSV with a header row. Reals use the shortest decimal form that
//! parses back to the same `f64`; undefined values are written as `null`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::EventSequence;
use crate::montecarlo::{LagProfile, MonteCarloReport, NormalityScan, ProfileSummary};
use crate::screening::{EdgeList, Recording};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Timestamps,
    Dense,
}

/// Parsed event data plus ingestion diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub recording: Recording,
    /// Events collapsed because they shared a bin with another event.
    pub duplicates: usize,
    /// Real-valued times dropped in the trailing partial bin.
    pub truncated: usize,
}

impl Ingested {
    /// The only channel, or an error if there are several.
    pub fn into_single(self) -> Result<EventSequence> {
        let (mut channels, _) = self.recording.into_parts();
        if channels.len() != 1 {
            return Err(Error::domain(format!("expected one channel, found {}", channels.len())));
        }
        Ok(channels.remove(0))
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn split_label(line: &str) -> (Option<&str>, &str) {
    match line.split_once(|c: char| c == ',' || c.is_whitespace()) {
        Some((label, rest)) => (Some(label.trim()), rest.trim()),
        None => (None, line),
    }
}

pub fn read_events(path: &Path, format: Format, bin_size: Option<f64>) -> Result<Ingested> {
    let text = fs::read_to_string(path)?;
    parse_events(&text, format, bin_size)
}

pub fn parse_events(text: &str, format: Format, bin_size: Option<f64>) -> Result<Ingested> {
    match format {
        Format::Timestamps => parse_timestamps(text, bin_size),
        Format::Dense => {
            if bin_size.is_some() {
                return Err(Error::Config("--bin-size applies to the timestamps format only".into()));
            }
            parse_dense(text)
        }
    }
}

pub fn parse_timestamps(text: &str, bin_size: Option<f64>) -> Result<Ingested> {
    let mut lines = content_lines(text);
    let Some((header_line, header)) = lines.next() else {
        return Err(Error::domain("event file is empty"));
    };
    let Some(value) = header.strip_prefix("T=") else {
        return Err(Error::parse(header_line, "missing `T=<horizon>` header"));
    };
    let value = value.trim();
    let (horizon, bin) = match bin_size {
        None => {
            let t: u64 = value
                .parse()
                .map_err(|_| Error::parse(header_line, format!("horizon {value:?} is not a positive integer")))?;
            (t, None)
        }
        Some(b) => {
            if !(b > 0.0) || !b.is_finite() {
                return Err(Error::Config(format!("bin size {b} must be positive")));
            }
            let duration: f64 =
                value.parse().map_err(|_| Error::parse(header_line, format!("duration {value:?} is not a number")))?;
            if !(duration >= b) || !duration.is_finite() {
                return Err(Error::parse(header_line, format!("duration {duration} is shorter than one bin")));
            }
            ((duration / b).floor() as u64, Some((b, duration)))
        }
    };
    if horizon == 0 {
        return Err(Error::parse(header_line, "horizon must be at least 1"));
    }

    let mut labels: Vec<String> = Vec::new();
    let mut events: Vec<Vec<u64>> = Vec::new();
    let mut labelled: Option<bool> = None;
    let mut truncated = 0usize;
    for (ln, line) in lines {
        let (label, value) = split_label(line);
        match (labelled, label.is_some()) {
            (None, l) => labelled = Some(l),
            (Some(a), b) if a != b => {
                return Err(Error::parse(ln, "mixes labelled and unlabelled event lines"));
            }
            _ => {}
        }
        let label = label.unwrap_or("0");
        let index = match bin {
            None => {
                let idx: u64 =
                    value.parse().map_err(|_| Error::parse(ln, format!("{value:?} is not an event index")))?;
                if idx < 1 || idx > horizon {
                    return Err(Error::parse(ln, format!("index {idx} outside 1..={horizon}")));
                }
                idx
            }
            Some((b, duration)) => {
                let t: f64 = value.parse().map_err(|_| Error::parse(ln, format!("{value:?} is not a time")))?;
                if !(0.0..duration).contains(&t) {
                    return Err(Error::parse(ln, format!("time {t} outside [0, {duration})")));
                }
                let idx = (t / b).floor() as u64 + 1;
                if idx > horizon {
                    truncated += 1;
                    continue;
                }
                idx
            }
        };
        let slot = match labels.iter().position(|l| l == label) {
            Some(i) => i,
            None => {
                labels.push(label.to_string());
                events.push(Vec::new());
                labels.len() - 1
            }
        };
        events[slot].push(index);
    }
    if labels.is_empty() {
        // header only: a single channel without events
        labels.push("0".into());
        events.push(Vec::new());
    }

    let mut duplicates = 0;
    let mut channels = Vec::with_capacity(events.len());
    for ev in events {
        let (seq, dropped) = EventSequence::from_unsorted(horizon, ev)?;
        duplicates += dropped;
        channels.push(seq);
    }
    Ok(Ingested { recording: Recording::new(channels, labels)?, duplicates, truncated })
}

pub fn parse_dense(text: &str) -> Result<Ingested> {
    let mut channels = Vec::new();
    let mut labels = Vec::new();
    let mut horizon: Option<usize> = None;
    for (ln, line) in content_lines(text) {
        let (label, bits) = if line.chars().all(|c| c == '0' || c == '1') { (None, line) } else { split_label(line) };
        let mut bins = Vec::with_capacity(bits.len());
        for (k, c) in bits.chars().enumerate() {
            match c {
                '0' => bins.push(false),
                '1' => bins.push(true),
                other => {
                    return Err(Error::parse(ln, format!("unexpected character {other:?} at column {}", k + 1)));
                }
            }
        }
        if bins.is_empty() {
            return Err(Error::parse(ln, "empty occupancy line"));
        }
        if let Some(h) = horizon {
            if h != bins.len() {
                return Err(Error::parse(ln, format!("line has {} bins, expected {h}", bins.len())));
            }
        }
        horizon = Some(bins.len());
        labels.push(label.map(str::to_string).unwrap_or_else(|| channels.len().to_string()));
        channels.push(EventSequence::from_occupancy(&bins)?);
    }
    if channels.is_empty() {
        return Err(Error::domain("event file is empty"));
    }
    Ok(Ingested { recording: Recording::new(channels, labels)?, duplicates: 0, truncated: 0 })
}

/// Single channel in the timestamps format.
pub fn format_timestamps(seq: &EventSequence) -> String {
    let mut out = format!("T={}\n", seq.horizon());
    for e in seq.events() {
        let _ = writeln!(out, "{e}");
    }
    out
}

/// Labelled multi-channel timestamps, channel by channel.
pub fn format_timestamps_recording(rec: &Recording) -> String {
    let mut out = format!("T={}\n", rec.horizon().unwrap_or(0));
    for (label, seq) in rec.labels().iter().zip(rec.channels()) {
        for e in seq.events() {
            let _ = writeln!(out, "{label},{e}");
        }
    }
    out
}

pub fn format_dense(seq: &EventSequence) -> String {
    let mut line: String = seq.occupancy().iter().map(|&b| if b { '1' } else { '0' }).collect();
    line.push('\n');
    line
}

pub fn format_dense_recording(rec: &Recording) -> String {
    let mut out = String::new();
    for (label, seq) in rec.labels().iter().zip(rec.channels()) {
        out.push_str(label);
        out.push(',');
        out.push_str(&format_dense(seq));
    }
    out
}

fn real(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        "null".into()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(real).unwrap_or_else(|| "null".into())
}

fn preamble(out: &mut String, seed: Option<u64>) {
    match seed {
        Some(s) => {
            let _ = writeln!(out, "# coincount {} seed={s}", crate::VERSION);
        }
        None => {
            let _ = writeln!(out, "# coincount {}", crate::VERSION);
        }
    }
}

/// Per-lag table: `lag,observed,expected,sigma_sqrtT,z,dz`, where `dz` on
/// row `k` is `z[k+1] - z[k]` (null on the last row).
pub fn profile_csv(profile: &LagProfile) -> String {
    let mut out = String::from("lag,observed,expected,sigma_sqrtT,z,dz\n");
    for (k, s) in profile.stats.iter().enumerate() {
        let dz = profile.dz.get(k).copied().flatten();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            s.lag,
            s.observed,
            real(s.expected),
            real(s.sd(profile.horizon)),
            opt(s.z),
            opt(dz)
        );
    }
    out
}

/// `label_a,label_b,lag,z,observed,expected`.
pub fn edges_csv(list: &EdgeList) -> String {
    let mut out = String::from("label_a,label_b,lag,z,observed,expected\n");
    for e in &list.edges {
        let _ =
            writeln!(out, "{},{},{},{},{},{}", e.label_a, e.label_b, e.lag, real(e.z), e.observed, real(e.expected));
    }
    out
}

/// `label_a,label_b` for pairs whose Z is undefined.
pub fn undefined_pairs_csv(list: &EdgeList) -> String {
    let mut out = String::from("label_a,label_b\n");
    for p in &list.undefined {
        let _ = writeln!(out, "{},{}", p.label_a, p.label_b);
    }
    out
}

pub fn agreement_csv(report: &MonteCarloReport) -> String {
    let mut out = String::new();
    preamble(&mut out, Some(report.seed));
    out.push_str(
        "horizon,lag,trials,empirical_mean,empirical_std,se_mean,analytical_mean,analytical_sd,\
         nrmse_mean,nrmse_std,set_mean_spread,mean_set_std,set_std_spread\n",
    );
    for l in &report.lags {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            report.horizon,
            l.lag,
            report.trials,
            real(l.empirical_mean),
            real(l.empirical_std),
            real(l.se_mean),
            real(l.analytical_mean),
            real(l.analytical_sd),
            opt(l.nrmse_mean),
            opt(l.nrmse_std),
            opt(l.set_mean_spread),
            real(l.mean_set_std),
            opt(l.set_std_spread)
        );
    }
    out
}

/// One row per evaluated `(rate, lag, horizon)` point.
pub fn scan_csv(scan: &NormalityScan) -> String {
    let mut out = String::new();
    preamble(&mut out, Some(scan.seed));
    out.push_str("rate,lag_rule,horizon,lag,estimates,ks_statistic,p_value,normal\n");
    for p in &scan.trace {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            real(p.rate),
            p.lag_rule,
            p.horizon,
            p.lag,
            scan.estimates_per_cell,
            real(p.statistic),
            real(p.p_value),
            p.p_value > crate::montecarlo::NORMALITY_LEVEL
        );
    }
    out
}

pub fn profile_summary_csv(summary: &ProfileSummary) -> String {
    let mut out = String::new();
    preamble(&mut out, Some(summary.seed));
    out.push_str("horizon,lag,trials,defined,mean_z,std_z,dz_of_mean\n");
    for (k, lag) in summary.lags.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            summary.horizon,
            lag,
            summary.trials,
            summary.defined[k],
            opt(summary.mean_z[k]),
            opt(summary.std_z[k]),
            opt(summary.dz_of_mean.get(k).copied().flatten())
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timestamps_examples() {
        let got = parse_timestamps("T=5\n2\n4\n", None).unwrap().into_single().unwrap();
        assert_eq!(got, EventSequence::new(5, vec![2, 4]).unwrap());
        let dense = parse_dense("01010").unwrap().into_single().unwrap();
        assert_eq!(dense, got);
    }

    #[test]
    fn out_of_range_names_the_line() {
        let err = parse_timestamps("T=5\n7\n", None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_timestamps("# comment\nT=5\n\n1\n0\n", None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 5, .. }), "{err}");
    }

    #[test]
    fn header_and_empty_errors() {
        assert!(matches!(parse_timestamps("2\n4\n", None), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_timestamps("", None), Err(Error::Domain(_))));
        assert!(matches!(parse_timestamps("# only\n\n", None), Err(Error::Domain(_))));
        assert!(matches!(parse_dense(""), Err(Error::Domain(_))));
        assert!(matches!(parse_timestamps("T=0\n", None), Err(Error::Parse { .. })));
        assert!(matches!(parse_timestamps("T=abc\n", None), Err(Error::Parse { .. })));
    }

    #[test]
    fn duplicates_counted() {
        let got = parse_timestamps("T=5\n4\n2\n4\n", None).unwrap();
        assert_eq!(got.duplicates, 1);
        assert_eq!(got.into_single().unwrap().events(), &[2, 4]);
    }

    #[test]
    fn labelled_channels() {
        let text = "T=10\na,3\nb 5\na,1\nb,5\n";
        let got = parse_timestamps(text, None).unwrap();
        assert_eq!(got.duplicates, 1);
        assert_eq!(got.recording.labels(), &["a".to_string(), "b".to_string()]);
        assert_eq!(got.recording.channel("a").unwrap().events(), &[1, 3]);
        assert_eq!(got.recording.channel("b").unwrap().events(), &[5]);
        assert!(parse_timestamps("T=10\na,3\n4\n", None).is_err());
        let rendered = format_timestamps_recording(&got.recording);
        assert_eq!(parse_timestamps(&rendered, None).unwrap().recording, got.recording);
    }

    #[test]
    fn dense_multi_line() {
        let got = parse_dense("x,0110\ny,1000\n").unwrap();
        assert_eq!(got.recording.channel("y").unwrap().events(), &[1]);
        assert!(parse_dense("0110\n10\n").is_err());
        assert!(parse_dense("01a0\n").is_err());
        let unlabelled = parse_dense("0110\n1000\n").unwrap();
        assert_eq!(unlabelled.recording.labels(), &["0".to_string(), "1".to_string()]);
        let rendered = format_dense_recording(&got.recording);
        assert_eq!(parse_dense(&rendered).unwrap().recording, got.recording);
    }

    #[test]
    fn binned_times() {
        // bins of width 0.5 over [0, 3.2): horizon 6, 3.1 falls in the partial bin
        let got = parse_timestamps("T=3.2\n0.0\n0.4\n1.2\n2.99\n3.1\n", Some(0.5)).unwrap();
        assert_eq!(got.truncated, 1);
        assert_eq!(got.duplicates, 1);
        let seq = got.into_single().unwrap();
        assert_eq!(seq.horizon(), 6);
        assert_eq!(seq.events(), &[1, 3, 6]);
        assert!(parse_timestamps("T=3\n3.0\n", Some(1.0)).is_err());
        assert!(parse_dense("01").is_ok());
        assert!(parse_events("01", Format::Dense, Some(1.0)).is_err());
    }

    #[test]
    fn header_only_is_an_empty_channel() {
        let seq = parse_timestamps("T=4\n", None).unwrap().into_single().unwrap();
        assert!(seq.is_empty());
        assert_eq!(format_timestamps(&seq), "T=4\n");
    }

    #[test]
    fn reals_round_trip() {
        for v in [0.1, 1.0 / 3.0, 2.5e-17, 123456.789, -0.0] {
            assert_eq!(real(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(real(f64::NAN), "null");
        assert_eq!(opt(None), "null");
    }
}
