//! Loss matrices and tensors: the sole interface between an upstream model
//! and the calibration toolkit.
//!
//! A [`LossMatrix`] stores per-example, per-parameter losses; a
//! [`LossTensor`] stacks one matrix per controlled risk. The CSV layout is
//! a comment-style header `# n=<n> N=<N> m=<m> bounded=<0|1>` followed by
//! `n * m` rows of `N` comma-separated decimals, risk-major.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::ParameterGrid;

/// Per-example, per-parameter losses for a single risk.
#[derive(Debug, Clone, PartialEq)]
pub struct LossMatrix {
    n_examples: usize,
    n_params: usize,
    /// Row-major: entry `(i, j)` at `i * n_params + j`.
    data: Vec<f64>,
    bounded_unit: bool,
}

impl LossMatrix {
    pub fn new(n_examples: usize, n_params: usize, data: Vec<f64>, bounded_unit: bool) -> Result<Self> {
        if n_examples == 0 || n_params == 0 {
            return Err(Error::invalid("loss matrix must have n >= 1 and N >= 1"));
        }
        if data.len() != n_examples * n_params {
            return Err(Error::invalid(format!(
                "loss matrix data length {} does not match {}x{}",
                data.len(),
                n_examples,
                n_params
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("loss entries must be finite"));
        }
        if bounded_unit && data.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::invalid("entry out of unit interval"));
        }
        Ok(LossMatrix {
            n_examples,
            n_params,
            data,
            bounded_unit,
        })
    }

    pub fn n_examples(&self) -> usize {
        self.n_examples
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn bounded_unit(&self) -> bool {
        self.bounded_unit
    }

    pub fn get(&self, example: usize, param: usize) -> f64 {
        self.data[example * self.n_params + param]
    }

    pub fn row(&self, example: usize) -> &[f64] {
        let start = example * self.n_params;
        &self.data[start..start + self.n_params]
    }

    /// Column mean and sample standard deviation (divisor `n - 1`; zero when
    /// `n == 1`) for every parameter.
    pub fn column_stats(&self) -> ColumnStats {
        let n = self.n_examples;
        let mut mean = vec![0.0; self.n_params];
        for i in 0..n {
            for (j, m) in mean.iter_mut().enumerate() {
                *m += self.get(i, j);
            }
        }
        for m in mean.iter_mut() {
            *m /= n as f64;
        }
        let mut sd = vec![0.0; self.n_params];
        if n > 1 {
            for i in 0..n {
                for (j, s) in sd.iter_mut().enumerate() {
                    let d = self.get(i, j) - mean[j];
                    *s += d * d;
                }
            }
            for s in sd.iter_mut() {
                *s = (*s / (n - 1) as f64).sqrt();
            }
        }
        ColumnStats { mean, sd }
    }

    /// Splits the examples into `[0, at)` and `[at, n)` halves.
    pub fn split_rows(&self, at: usize) -> Result<(LossMatrix, LossMatrix)> {
        if at == 0 || at >= self.n_examples {
            return Err(Error::invalid("split point must leave both halves nonempty"));
        }
        let cut = at * self.n_params;
        let first = LossMatrix::new(at, self.n_params, self.data[..cut].to_vec(), self.bounded_unit)?;
        let second = LossMatrix::new(
            self.n_examples - at,
            self.n_params,
            self.data[cut..].to_vec(),
            self.bounded_unit,
        )?;
        Ok((first, second))
    }
}

/// Empirical risk and sample standard deviation per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnStats {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

/// One [`LossMatrix`] per controlled risk, sharing `(n, N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossTensor {
    slices: Vec<LossMatrix>,
}

impl LossTensor {
    pub fn new(slices: Vec<LossMatrix>) -> Result<Self> {
        if slices.is_empty() {
            return Err(Error::invalid("loss tensor must have m >= 1 risks"));
        }
        let (n, p) = (slices[0].n_examples, slices[0].n_params);
        if slices.iter().any(|s| s.n_examples != n || s.n_params != p) {
            return Err(Error::invalid("all risk slices must share (n, N)"));
        }
        Ok(LossTensor { slices })
    }

    pub fn from_matrix(matrix: LossMatrix) -> Self {
        LossTensor { slices: vec![matrix] }
    }

    pub fn n_examples(&self) -> usize {
        self.slices[0].n_examples
    }

    pub fn n_params(&self) -> usize {
        self.slices[0].n_params
    }

    pub fn n_risks(&self) -> usize {
        self.slices.len()
    }

    pub fn slice(&self, risk: usize) -> &LossMatrix {
        &self.slices[risk]
    }

    pub fn slices(&self) -> &[LossMatrix] {
        &self.slices
    }

    /// Empirical risk and standard deviation for every `(param, risk)` cell.
    pub fn empirical_risk(&self) -> Vec<ColumnStats> {
        self.slices.iter().map(|s| s.column_stats()).collect()
    }

    /// Checks that a supplied grid matches the tensor's parameter count.
    /// Splits every risk slice's examples into `[0, at)` and `[at, n)`.
    pub fn split_rows(&self, at: usize) -> Result<(LossTensor, LossTensor)> {
        let mut firsts = Vec::with_capacity(self.slices.len());
        let mut seconds = Vec::with_capacity(self.slices.len());
        for slice in &self.slices {
            let (a, b) = slice.split_rows(at)?;
            firsts.push(a);
            seconds.push(b);
        }
        Ok((LossTensor::new(firsts)?, LossTensor::new(seconds)?))
    }

    pub fn check_grid(&self, grid: &ParameterGrid) -> Result<()> {
        if grid.len() != self.n_params() {
            return Err(Error::invalid(format!(
                "grid has {} points but losses cover {}",
                grid.len(),
                self.n_params()
            )));
        }
        Ok(())
    }

    /// Serializes to the risk-major CSV layout. Decimals use the shortest
    /// representation that round-trips to the same 64-bit float.
    pub fn to_csv(&self) -> String {
        let bounded = self.slices.iter().all(|s| s.bounded_unit);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# n={} N={} m={} bounded={}",
            self.n_examples(),
            self.n_params(),
            self.n_risks(),
            if bounded { 1 } else { 0 }
        );
        for slice in &self.slices {
            for i in 0..slice.n_examples {
                let row = slice.row(i);
                for (j, v) in row.iter().enumerate() {
                    if j > 0 {
                        out.push(',');
                    }
                    let _ = write!(out, "{v}");
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty loss file".into()))?;
        let (n, big_n, m, bounded) = parse_header(header)?;
        let mut data = Vec::with_capacity(n * big_n * m);
        let mut rows = 0usize;
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            rows += 1;
            let mut cells = 0usize;
            for cell in line.split(',') {
                let v: f64 = cell
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("non-numeric cell '{}'", cell.trim())))?;
                data.push(v);
                cells += 1;
            }
            if cells != big_n {
                return Err(Error::Parse(format!(
                    "row {rows} has {cells} cells, expected {big_n}"
                )));
            }
        }
        if rows != n * m {
            return Err(Error::Parse(format!(
                "expected {} rows ({}x{} risk-major), found {rows}",
                n * m,
                m,
                n
            )));
        }
        let mut slices = Vec::with_capacity(m);
        for l in 0..m {
            let start = l * n * big_n;
            let slice_data = data[start..start + n * big_n].to_vec();
            slices.push(LossMatrix::new(n, big_n, slice_data, bounded)?);
        }
        LossTensor::new(slices)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        LossTensor::from_csv(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

fn parse_header(header: &str) -> Result<(usize, usize, usize, bool)> {
    let body = header
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse("header must start with '#'".into()))?;
    let mut n = None;
    let mut big_n = None;
    let mut m = None;
    let mut bounded = None;
    for field in body.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("malformed header field '{field}'")))?;
        let parsed: usize = value
            .parse()
            .map_err(|_| Error::Parse(format!("malformed header value '{value}'")))?;
        match key {
            "n" => n = Some(parsed),
            "N" => big_n = Some(parsed),
            "m" => m = Some(parsed),
            "bounded" => {
                bounded = Some(match parsed {
                    0 => false,
                    1 => true,
                    _ => return Err(Error::Parse("bounded flag must be 0 or 1".into())),
                })
            }
            other => return Err(Error::Parse(format!("unknown header key '{other}'"))),
        }
    }
    match (n, big_n, m, bounded) {
        (Some(n), Some(big_n), Some(m), Some(b)) if n > 0 && big_n > 0 && m > 0 => {
            Ok((n, big_n, m, b))
        }
        _ => Err(Error::Parse(
            "header must declare n, N, m and bounded, all positive".into(),
        )),
    }
}

/// Target risk levels `alpha_l` and the certification confidence `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskSpec {
    pub alphas: Vec<f64>,
    pub delta: f64,
}

impl RiskSpec {
    pub fn new(alphas: Vec<f64>, delta: f64) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::invalid("at least one alpha level is required"));
        }
        if alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
            return Err(Error::invalid("every alpha must lie in (0, 1)"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid("delta must lie in (0, 1)"));
        }
        Ok(RiskSpec { alphas, delta })
    }

    pub fn single(alpha: f64, delta: f64) -> Result<Self> {
        RiskSpec::new(vec![alpha], delta)
    }
}

/// Reformulates positive-FDR control as an unconditional bounded risk.
///
/// Given a numerator loss `v` (false-discovery mass, zero on abstentions) and
/// a nonempty-prediction indicator `r`, returns `L' = v - alpha * r + alpha`.
/// The empirical mean of `L'` is at most `alpha` exactly when the empirical
/// pFDR ratio is, and `L'` always lands in the unit interval.
pub fn pfdr_transform(
    numerator_loss: &LossMatrix,
    nonempty_indicator: &LossMatrix,
    alpha: f64,
) -> Result<LossMatrix> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha must lie in (0, 1)"));
    }
    let (n, p) = (numerator_loss.n_examples, numerator_loss.n_params);
    if nonempty_indicator.n_examples != n || nonempty_indicator.n_params != p {
        return Err(Error::invalid("numerator and indicator must share (n, N)"));
    }
    let mut data = Vec::with_capacity(n * p);
    for (v, r) in numerator_loss.data.iter().zip(&nonempty_indicator.data) {
        if *r != 0.0 && *r != 1.0 {
            return Err(Error::invalid("indicator entry not in {0, 1}"));
        }
        if *v < 0.0 || *v > *r {
            // Covers the 0/0 convention: abstentions must carry zero numerator.
            return Err(Error::invalid(
                "numerator entry must lie in [0, r] elementwise",
            ));
        }
        data.push(v - alpha * r + alpha);
    }
    LossMatrix::new(n, p, data, true)
}
