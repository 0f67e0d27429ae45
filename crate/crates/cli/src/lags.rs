use coincount::Error;

/// Parses `0,2,5..8` into a sorted, de-duplicated lag list. Ranges `a..b`
/// include both ends.
pub fn parse_lags(text: &str) -> Result<Vec<u64>, Error> {
    let mut lags = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || Error::Config(format!("bad lag item {item:?}; use integers or a..b ranges"));
        match item.split_once("..") {
            Some((a, b)) => {
                let a: u64 = a.trim().parse().map_err(|_| bad())?;
                let b: u64 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
                if a > b {
                    return Err(bad());
                }
                if b - a > 10_000_000 {
                    return Err(Error::Config(format!("lag range {item} is too long")));
                }
                lags.extend(a..=b);
            }
            None => lags.push(item.parse().map_err(|_| bad())?),
        }
    }
    lags.sort_unstable();
    lags.dedup();
    if lags.is_empty() {
        return Err(Error::Config("lag list is empty".into()));
    }
    Ok(lags)
}

pub fn resolve(lags: Option<&str>, max_lag: Option<u64>) -> Result<Vec<u64>, Error> {
    match (lags, max_lag) {
        (Some(_), Some(_)) => Err(Error::Config("give either --lags or --max-lag, not both".into())),
        (Some(text), None) => parse_lags(text),
        (None, Some(m)) => Ok((0..=m).collect()),
        (None, None) => Err(Error::Config("one of --lags or --max-lag is required".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_lags("3,0..2,2").unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(parse_lags("5..=6").unwrap(), vec![5, 6]);
        assert!(parse_lags("").is_err());
        assert!(parse_lags("4..2").is_err());
        assert!(parse_lags("x").is_err());
        assert_eq!(resolve(None, Some(2)).unwrap(), vec![0, 1, 2]);
        assert!(resolve(Some("1"), Some(2)).is_err());
        assert!(resolve(None, None).is_err());
    }
}
