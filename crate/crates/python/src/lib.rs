//! Python bindings for `coincount`.

use coincount::generators::{self, CommonShock};
use coincount::montecarlo;
use coincount::screening::{self, Recording, ScreenConfig};
use coincount::validation::{self, SuiteOptions};
use coincount::{Error, RatePair};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyOSError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn rates(p_x: f64, p_y: f64) -> PyResult<RatePair> {
    RatePair::new(p_x, p_y).map_err(err)
}

/// Binary events on `1..=horizon`, stored as sorted 1-based indices.
#[pyclass(name = "EventSequence", module = "coincount", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyEventSequence {
    inner: coincount::EventSequence,
}

impl From<coincount::EventSequence> for PyEventSequence {
    fn from(inner: coincount::EventSequence) -> Self {
        PyEventSequence { inner }
    }
}

#[pymethods]
impl PyEventSequence {
    #[new]
    fn new(horizon: u64, events: Vec<u64>) -> PyResult<Self> {
        coincount::EventSequence::new(horizon, events).map(Into::into).map_err(err)
    }

    #[staticmethod]
    fn from_occupancy(bins: Vec<bool>) -> PyResult<Self> {
        coincount::EventSequence::from_occupancy(&bins).map(Into::into).map_err(err)
    }

    #[getter]
    fn horizon(&self) -> u64 {
        self.inner.horizon()
    }

    #[getter]
    fn events(&self) -> Vec<u64> {
        self.inner.events().to_vec()
    }

    fn rate(&self) -> f64 {
        self.inner.rate()
    }

    fn occupancy(&self) -> Vec<bool> {
        self.inner.occupancy()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __eq__(&self, other: PyRef<'_, Self>) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("EventSequence(horizon={}, events={})", self.inner.horizon(), self.inner.len())
    }
}

#[pyfunction]
fn band_area(horizon: u64, delta: u64) -> u64 {
    coincount::band_area(horizon, delta)
}

#[pyfunction]
fn count_coincidences(x: PyRef<'_, PyEventSequence>, y: PyRef<'_, PyEventSequence>, delta: u64) -> PyResult<u64> {
    coincount::count_coincidences(&x.inner, &y.inner, delta).map_err(err)
}

#[pyfunction]
fn truncated_count(x: PyRef<'_, PyEventSequence>, y: PyRef<'_, PyEventSequence>, delta: u64) -> PyResult<u64> {
    coincount::truncated_count(&x.inner, &y.inner, delta).map_err(err)
}

#[pyfunction]
fn expected_marks(p_x: f64, p_y: f64, horizon: u64, delta: u64) -> PyResult<f64> {
    Ok(coincount::expected_marks(rates(p_x, p_y)?, horizon, delta))
}

#[pyfunction]
fn sigma_delta_sq(p_x: f64, p_y: f64, delta: u64) -> PyResult<f64> {
    Ok(coincount::sigma_delta_sq(rates(p_x, p_y)?, delta))
}

/// `{lag, observed, expected, sigma, z}`; `z` is None when undefined.
#[pyfunction]
fn z_score<'py>(
    py: Python<'py>,
    x: PyRef<'_, PyEventSequence>,
    y: PyRef<'_, PyEventSequence>,
    delta: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let s = coincount::z_score(&x.inner, &y.inner, delta).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("lag", s.lag)?;
    d.set_item("observed", s.observed)?;
    d.set_item("expected", s.expected)?;
    d.set_item("sigma", s.sigma)?;
    d.set_item("z", s.z)?;
    Ok(d)
}

/// Column lists `lag, observed, expected, sigma_sqrtT, z, dz` (dz one shorter).
#[pyfunction]
fn z_profile<'py>(
    py: Python<'py>,
    x: PyRef<'_, PyEventSequence>,
    y: PyRef<'_, PyEventSequence>,
    lags: Vec<u64>,
) -> PyResult<Bound<'py, PyDict>> {
    let p = montecarlo::z_profile(&x.inner, &y.inner, &lags).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("lag", &p.lags)?;
    d.set_item("observed", p.stats.iter().map(|s| s.observed).collect::<Vec<_>>())?;
    d.set_item("expected", p.stats.iter().map(|s| s.expected).collect::<Vec<_>>())?;
    d.set_item("sigma_sqrtT", p.stats.iter().map(|s| s.sd(p.horizon)).collect::<Vec<_>>())?;
    d.set_item("z", &p.z)?;
    d.set_item("dz", &p.dz)?;
    Ok(d)
}

/// Screens every channel pair. Returns `(edges, undefined, pair_count)`, where
/// each edge is `(label_a, label_b, lag, z, observed, expected)`.
#[pyfunction]
#[pyo3(signature = (channels, labels, lags, threshold, two_sided = false, workers = 0))]
#[allow(clippy::type_complexity)]
fn screen(
    py: Python<'_>,
    channels: Vec<PyRef<'_, PyEventSequence>>,
    labels: Vec<String>,
    lags: Vec<u64>,
    threshold: f64,
    two_sided: bool,
    workers: usize,
) -> PyResult<(Vec<(String, String, u64, f64, u64, f64)>, Vec<(String, String)>, usize)> {
    let rec = Recording::new(channels.iter().map(|c| c.inner.clone()).collect(), labels).map_err(err)?;
    let cfg = ScreenConfig { lags, threshold, two_sided, workers };
    let out = py.detach(|| screening::screen(&rec, &cfg)).map_err(err)?;
    Ok((
        out.edges.into_iter().map(|e| (e.label_a, e.label_b, e.lag, e.z, e.observed, e.expected)).collect(),
        out.undefined.into_iter().map(|u| (u.label_a, u.label_b)).collect(),
        out.pair_count,
    ))
}

#[pyfunction]
fn bernoulli(p: f64, horizon: u64, seed: u64) -> PyResult<PyEventSequence> {
    generators::gen_bernoulli(p, horizon, seed).map(Into::into).map_err(err)
}

/// `(sequence, arrivals)`: the binarized sequence and the raw arrival count.
#[pyfunction]
fn binned_poisson(lambda_: f64, bin: f64, duration: f64, seed: u64) -> PyResult<(PyEventSequence, u64)> {
    let (seq, report) = generators::gen_binned_poisson(lambda_, bin, duration, seed).map_err(err)?;
    Ok((seq.into(), report.arrivals))
}

#[pyfunction]
fn geometric_ar1(p: f64, alpha: f64, horizon: u64, seed: u64) -> PyResult<PyEventSequence> {
    generators::gen_geometric_ar1(p, alpha, horizon, seed).map(Into::into).map_err(err)
}

#[pyfunction]
#[allow(clippy::too_many_arguments)]
fn common_shock(
    lambda_y1: f64,
    lambda_y2: f64,
    lambda_z: f64,
    mu_delay: f64,
    sigma_delay: f64,
    horizon: u64,
    seed: u64,
) -> PyResult<(PyEventSequence, PyEventSequence)> {
    let model = CommonShock { lambda_y1, lambda_y2, lambda_z, mu_delay, sigma_delay, horizon };
    let (a, b) = generators::gen_common_shock(&model, seed).map_err(err)?;
    Ok((a.into(), b.into()))
}

/// `(coarse_sequence, effective_rate)`.
#[pyfunction]
fn subsample(x: PyRef<'_, PyEventSequence>, factor: u64) -> PyResult<(PyEventSequence, f64)> {
    let (seq, eff) = generators::subsample(&x.inner, factor).map_err(err)?;
    Ok((seq.into(), eff))
}

#[pyfunction]
fn poisson_to_bernoulli(lambda_: f64, bin: f64) -> f64 {
    generators::poisson_to_bernoulli(lambda_, bin)
}

#[pyfunction]
fn binning_loss(lambda_: f64, bin: f64, duration: f64) -> PyResult<f64> {
    generators::binning_loss(lambda_, bin, duration).map_err(err)
}

/// `(statistic, p_value)` of a one-sample KS test against N(0, 1).
#[pyfunction]
fn ks_normality(samples: Vec<f64>) -> PyResult<(f64, f64)> {
    let r = montecarlo::ks_normality(&samples).map_err(err)?;
    Ok((r.statistic, r.p_value))
}

#[pyfunction]
fn ks_two_sample(a: Vec<f64>, b: Vec<f64>) -> PyResult<(f64, f64)> {
    let r = montecarlo::ks_two_sample(&a, &b).map_err(err)?;
    Ok((r.statistic, r.p_value))
}

#[pyfunction]
fn nrmse(empirical: Vec<f64>, analytical: Vec<f64>) -> PyResult<Option<f64>> {
    montecarlo::nrmse(&empirical, &analytical).map_err(err)
}

/// Parses event text. Returns `(channels, labels, duplicates)`.
#[pyfunction]
#[pyo3(signature = (text, format = "timestamps", bin_size = None))]
fn parse_events(
    text: &str,
    format: &str,
    bin_size: Option<f64>,
) -> PyResult<(Vec<PyEventSequence>, Vec<String>, usize)> {
    let format = match format {
        "timestamps" => coincount::io::Format::Timestamps,
        "dense" => coincount::io::Format::Dense,
        other => return Err(PyValueError::new_err(format!("unknown format {other:?}"))),
    };
    let ingested = coincount::io::parse_events(text, format, bin_size).map_err(err)?;
    let (channels, labels) = ingested.recording.into_parts();
    Ok((channels.into_iter().map(Into::into).collect(), labels, ingested.duplicates))
}

#[pyfunction]
fn format_timestamps(x: PyRef<'_, PyEventSequence>) -> String {
    coincount::io::format_timestamps(&x.inner)
}

/// Runs one acceptance criterion; returns `(passed, summary, digest)`.
#[pyfunction]
#[pyo3(signature = (criterion, seed = 20_240_601, workers = 0))]
fn run_criterion(py: Python<'_>, criterion: u8, seed: u64, workers: usize) -> PyResult<(bool, String, String)> {
    let out = py.detach(|| validation::run_criterion(criterion, &SuiteOptions { seed, workers })).map_err(err)?;
    let mut summary = out.summary();
    for c in &out.checks {
        summary.push_str(&format!("\n    {c}"));
    }
    Ok((out.passed(), summary, out.digest))
}

#[pymodule]
fn _coincount(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", coincount::VERSION)?;
    m.add_class::<PyEventSequence>()?;
    m.add_function(wrap_pyfunction!(band_area, m)?)?;
    m.add_function(wrap_pyfunction!(count_coincidences, m)?)?;
    m.add_function(wrap_pyfunction!(truncated_count, m)?)?;
    m.add_function(wrap_pyfunction!(expected_marks, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_delta_sq, m)?)?;
    m.add_function(wrap_pyfunction!(z_score, m)?)?;
    m.add_function(wrap_pyfunction!(z_profile, m)?)?;
    m.add_function(wrap_pyfunction!(screen, m)?)?;
    m.add_function(wrap_pyfunction!(bernoulli, m)?)?;
    m.add_function(wrap_pyfunction!(binned_poisson, m)?)?;
    m.add_function(wrap_pyfunction!(geometric_ar1, m)?)?;
    m.add_function(wrap_pyfunction!(common_shock, m)?)?;
    m.add_function(wrap_pyfunction!(subsample, m)?)?;
    m.add_function(wrap_pyfunction!(poisson_to_bernoulli, m)?)?;
    m.add_function(wrap_pyfunction!(binning_loss, m)?)?;
    m.add_function(wrap_pyfunction!(ks_normality, m)?)?;
    m.add_function(wrap_pyfunction!(ks_two_sample, m)?)?;
    m.add_function(wrap_pyfunction!(nrmse, m)?)?;
    m.add_function(wrap_pyfunction!(parse_events, m)?)?;
    m.add_function(wrap_pyfunction!(format_timestamps, m)?)?;
    m.add_function(wrap_pyfunction!(run_criterion, m)?)?;
    Ok(())
}
