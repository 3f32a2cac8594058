//! Synthetic loss generation and Monte Carlo harnesses.
//!
//! Losses follow a first-order autoregressive Gaussian model whose column
//! means are calibrated so the true risk at every grid point is known
//! exactly; that makes true null sets computable and lets the harnesses
//! check family-wise error rates against analytic ground truth.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fwer::{
    bonferroni, cascaded_2d_fixed_sequence, fixed_sequence, holm, sgt, split_fixed_sequence,
    RejectionSet, TestGraph,
};
use crate::loss::LossMatrix;
use crate::math::{std_normal_cdf, std_normal_quantile, substream};
use crate::pvalues::{HbContext, PValueMatrix, PValueMethod, PValueVector};
use crate::uniform::{Growth, UniformBoundConfig, UniformCertifier};

/// True-risk profile across the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RiskCurve {
    /// Linear V: `r_end` at both grid extremes, `r_min` at the center.
    VShape { r_end: f64, r_min: f64 },
    /// Explicit per-grid-point risks.
    Explicit(Vec<f64>),
}

/// Autoregressive loss-generation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ARConfig {
    pub n_examples: usize,
    pub n_grid: usize,
    pub corr: f64,
    pub risk_curve: RiskCurve,
    pub seed: u64,
}

impl ARConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_examples == 0 || self.n_grid == 0 {
            return Err(Error::invalid("n_examples and n_grid must be positive"));
        }
        if !(0.0..1.0).contains(&self.corr) {
            return Err(Error::invalid("corr must lie in [0, 1)"));
        }
        match &self.risk_curve {
            RiskCurve::VShape { r_end, r_min } => {
                if self.n_grid < 2 {
                    return Err(Error::invalid("V-shape curves need at least two grid points"));
                }
                for r in [r_end, r_min] {
                    if !(*r > 0.0 && *r < 1.0) {
                        return Err(Error::invalid("target risks must lie in (0, 1)"));
                    }
                }
            }
            RiskCurve::Explicit(risks) => {
                if risks.len() != self.n_grid {
                    return Err(Error::invalid("explicit risk curve length must match n_grid"));
                }
                if risks.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
                    return Err(Error::invalid("target risks must lie in (0, 1)"));
                }
            }
        }
        Ok(())
    }
}

/// True risk at every grid point implied by the config.
pub fn target_risks(config: &ARConfig) -> Result<Vec<f64>> {
    config.validate()?;
    Ok(match &config.risk_curve {
        RiskCurve::VShape { r_end, r_min } => {
            let center = (config.n_grid - 1) as f64 / 2.0;
            (0..config.n_grid)
                .map(|j| r_min + (r_end - r_min) * (j as f64 - center).abs() / center)
                .collect()
        }
        RiskCurve::Explicit(risks) => risks.clone(),
    })
}

/// Grid indices whose true risk strictly exceeds `alpha` (the true nulls).
pub fn true_null_set(risks: &[f64], alpha: f64) -> Vec<usize> {
    risks
        .iter()
        .enumerate()
        .filter(|(_, r)| **r > alpha)
        .map(|(j, _)| j)
        .collect()
}

/// One independent loss matrix for trial `trial`.
///
/// Per example: a stationary unit-variance AR(1) chain `u_j`, and losses
/// `L_ij = Phi(u_j + mu_j)` with `mu_j = sqrt(2) * Phi^-1(R_target_j)`, so
/// `E[L_ij] = Phi(mu_j / sqrt(2)) = R_target_j` exactly.
pub fn simulate_ar_trial(config: &ARConfig, trial: u64) -> Result<LossMatrix> {
    let risks = target_risks(config)?;
    let mu: Vec<f64> = risks
        .iter()
        .map(|&r| std::f64::consts::SQRT_2 * std_normal_quantile(r))
        .collect();
    let n = config.n_examples;
    let cols = config.n_grid;
    let noise_scale = (1.0 - config.corr * config.corr).sqrt();
    let mut data = vec![0.0; n * cols];
    for i in 0..n {
        let mut rng = substream(config.seed, trial, i as u64);
        let mut u = standard_normal(&mut rng);
        data[i * cols] = std_normal_cdf(u + mu[0]);
        for j in 1..cols {
            u = config.corr * u + noise_scale * standard_normal(&mut rng);
            data[i * cols + j] = std_normal_cdf(u + mu[j]);
        }
    }
    LossMatrix::new(n, cols, data, true)
}

/// Loss matrix for the configured seed (trial zero).
pub fn simulate_ar(config: &ARConfig) -> Result<LossMatrix> {
    simulate_ar_trial(config, 0)
}

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    // Inverse-CDF sampling keeps the draw count per example fixed.
    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    std_normal_quantile(u)
}

/// Which FWER procedure a Monte Carlo harness drives.
#[derive(Debug, Clone)]
pub enum ProcedureSpec {
    Bonferroni,
    Holm,
    FixedSequence { starts: Vec<usize> },
    Sgt(TestGraph),
    Cascade2d { shape: (usize, usize) },
    /// Splits the sample in half: the first half learns the ordering, the
    /// second half is tested.
    SplitFixedSequence { d_steps: usize },
}

impl ProcedureSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProcedureSpec::Bonferroni => "bonferroni",
            ProcedureSpec::Holm => "holm",
            ProcedureSpec::FixedSequence { .. } => "fixed-sequence",
            ProcedureSpec::Sgt(_) => "sgt",
            ProcedureSpec::Cascade2d { .. } => "cascade-2d",
            ProcedureSpec::SplitFixedSequence { .. } => "split-fixed-sequence",
        }
    }
}

fn hb_vector(r_hat: &[f64], n: usize, alpha: f64) -> Result<PValueVector> {
    HbContext::new(n, alpha)?.vector(r_hat)
}

/// Runs one procedure on one simulated loss matrix with HB p-values.
pub fn apply_procedure(
    spec: &ProcedureSpec,
    loss: &LossMatrix,
    alpha: f64,
    delta: f64,
) -> Result<RejectionSet> {
    match spec {
        ProcedureSpec::SplitFixedSequence { d_steps } => {
            let n = loss.n_examples();
            if n < 4 {
                return Err(Error::invalid("split testing needs at least four examples"));
            }
            let half = n / 2;
            let (first, second) = loss.split_rows(half)?;
            let p_graph = hb_vector(&first.column_stats().mean, first.n_examples(), alpha)?;
            let p_graph = PValueMatrix::new(
                loss.n_params(),
                1,
                p_graph.values,
                PValueMethod::Hb,
            )?;
            let p_test = hb_vector(&second.column_stats().mean, second.n_examples(), alpha)?;
            let (_, set) = split_fixed_sequence(&p_graph, &p_test, *d_steps, delta)?;
            Ok(set)
        }
        _ => {
            let p = hb_vector(&loss.column_stats().mean, loss.n_examples(), alpha)?;
            match spec {
                ProcedureSpec::Bonferroni => bonferroni(&p, delta),
                ProcedureSpec::Holm => holm(&p, delta),
                ProcedureSpec::FixedSequence { starts } => fixed_sequence(&p, delta, starts),
                ProcedureSpec::Sgt(graph) => sgt(&p, graph),
                ProcedureSpec::Cascade2d { shape } => {
                    cascaded_2d_fixed_sequence(&p, *shape, delta)
                }
                ProcedureSpec::SplitFixedSequence { .. } => unreachable!(),
            }
        }
    }
}

/// Simulation setting with a declared true null set.
#[derive(Debug, Clone)]
pub struct NullConfig {
    pub ar: ARConfig,
    pub alpha: f64,
}

/// A Monte Carlo frequency with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FwerEstimate {
    pub estimate: f64,
    pub se: f64,
    pub trials: usize,
}

impl FwerEstimate {
    pub fn from_count(count: usize, trials: usize) -> Self {
        let estimate = count as f64 / trials as f64;
        let se = (estimate * (1.0 - estimate) / trials as f64).sqrt();
        FwerEstimate {
            estimate,
            se,
            trials,
        }
    }
}

/// Empirical family-wise error rate of a procedure under a known null set.
pub fn fwer_monte_carlo(
    spec: &ProcedureSpec,
    null: &NullConfig,
    trials: usize,
    delta: f64,
) -> Result<FwerEstimate> {
    if trials < 100 {
        return Err(Error::invalid(
            "fewer than 100 trials gives a meaningless standard error",
        ));
    }
    let risks = target_risks(&null.ar)?;
    let nulls = true_null_set(&risks, null.alpha);
    let flags: Result<Vec<bool>> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let loss = simulate_ar_trial(&null.ar, trial)?;
            let set = apply_procedure(spec, &loss, null.alpha, delta)?;
            Ok(nulls.iter().any(|&j| set.contains(j)))
        })
        .collect();
    let flags = flags?;
    let count = flags.iter().filter(|&&f| f).count();
    Ok(FwerEstimate::from_count(count, trials))
}

/// Calibration strategies compared by the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchMethod {
    /// Largest grid value with empirical risk below alpha; an upper
    /// envelope with no statistical guarantee.
    EmpiricalBaseline,
    /// Single-start fixed sequence from the rightmost grid point walking
    /// left at level delta.
    FixedSequence,
    Bonferroni,
    /// Uniform-concentration certification walked from the right.
    Uniform,
}

impl BenchMethod {
    pub fn parse(tag: &str) -> Result<Self> {
        match tag {
            "empirical-baseline" => Ok(BenchMethod::EmpiricalBaseline),
            "fixed-sequence" => Ok(BenchMethod::FixedSequence),
            "bonferroni" => Ok(BenchMethod::Bonferroni),
            "uniform" => Ok(BenchMethod::Uniform),
            other => Err(Error::invalid(format!("unknown benchmark method '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BenchMethod::EmpiricalBaseline => "empirical-baseline",
            BenchMethod::FixedSequence => "fixed-sequence",
            BenchMethod::Bonferroni => "bonferroni",
            BenchMethod::Uniform => "uniform",
        }
    }
}

/// Per-method, per-alpha rightmost certified grid values for one benchmark
/// run; `None` marks an empty certified set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub version: String,
    pub seed: u64,
    pub n_examples: usize,
    pub n_grid: usize,
    pub corr: f64,
    pub delta: f64,
    pub alphas: Vec<f64>,
    pub methods: Vec<String>,
    /// `endpoints[method][alpha]`.
    pub endpoints: Vec<Vec<Option<f64>>>,
    /// Empirical FWER per (method, alpha) when the run estimates them;
    /// empty for single-trial reports.
    pub fwer: Vec<MethodFwer>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodFwer {
    pub method: String,
    pub alpha: f64,
    pub fwer: FwerEstimate,
}

/// One benchmark method's result on one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    /// Rightmost certified grid value, `None` when nothing is certified.
    pub endpoint: Option<f64>,
    /// Whether any certified grid point has true risk above alpha.
    pub false_certification: bool,
}

/// Everything data-independent a benchmark run needs: the grid values, the
/// analytic true risks, and one precomputed uniform certifier per alpha.
pub struct BenchmarkContext {
    pub alphas: Vec<f64>,
    pub delta: f64,
    pub methods: Vec<BenchMethod>,
    pub grid: Vec<f64>,
    pub risks: Vec<f64>,
    certifiers: Vec<Option<UniformCertifier>>,
}

impl BenchmarkContext {
    pub fn new(
        config: &ARConfig,
        alphas: &[f64],
        delta: f64,
        methods: &[BenchMethod],
    ) -> Result<Self> {
        config.validate()?;
        if alphas.is_empty() || alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
            return Err(Error::invalid("alpha levels must lie in (0, 1)"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid("delta must lie in (0, 1)"));
        }
        if methods.is_empty() {
            return Err(Error::invalid("at least one benchmark method is required"));
        }
        let grid: Vec<f64> = (0..config.n_grid)
            .map(|j| j as f64 / (config.n_grid - 1).max(1) as f64)
            .collect();
        let risks = target_risks(config)?;
        let mut certifiers = Vec::with_capacity(alphas.len());
        if methods.contains(&BenchMethod::Uniform) {
            let cfg = UniformBoundConfig::new(0.0, Growth::Linear { m: 1 })?;
            for &alpha in alphas {
                certifiers.push(UniformCertifier::prepare(
                    alpha,
                    delta,
                    config.n_examples as u64,
                    &cfg,
                )?);
            }
        } else {
            certifiers.resize(alphas.len(), None);
        }
        Ok(BenchmarkContext {
            alphas: alphas.to_vec(),
            delta,
            methods: methods.to_vec(),
            grid,
            risks,
            certifiers,
        })
    }

    fn suffix_has_null(&self, from: usize, alpha: f64) -> bool {
        self.risks[from..].iter().any(|&r| r > alpha)
    }

    /// Per-method, per-alpha outcomes (`out[method][alpha]`) for one
    /// simulated trial.
    pub fn trial(&self, config: &ARConfig, trial: u64) -> Result<Vec<Vec<TrialOutcome>>> {
        let loss = simulate_ar_trial(config, trial)?;
        let r_hat = loss.column_stats().mean;
        let n = loss.n_examples();
        let last = r_hat.len() - 1;
        let mut out = Vec::with_capacity(self.methods.len());
        for method in &self.methods {
            let mut per_alpha = Vec::with_capacity(self.alphas.len());
            for (a_idx, &alpha) in self.alphas.iter().enumerate() {
                let outcome = match method {
                    BenchMethod::EmpiricalBaseline => {
                        let endpoint = (0..r_hat.len()).rev().find(|&j| r_hat[j] < alpha);
                        let false_cert = (0..r_hat.len())
                            .any(|j| r_hat[j] < alpha && self.risks[j] > alpha);
                        TrialOutcome {
                            endpoint: endpoint.map(|j| self.grid[j]),
                            false_certification: false_cert,
                        }
                    }
                    BenchMethod::FixedSequence => {
                        // Single-start walk from the rightmost point going
                        // left: the certified set is a suffix of the grid.
                        let p = hb_vector(&r_hat, n, alpha)?;
                        let mut smallest = None;
                        for j in (0..p.len()).rev() {
                            if p.values[j] <= self.delta {
                                smallest = Some(j);
                            } else {
                                break;
                            }
                        }
                        TrialOutcome {
                            endpoint: smallest.map(|_| self.grid[last]),
                            false_certification: smallest
                                .is_some_and(|j| self.suffix_has_null(j, alpha)),
                        }
                    }
                    BenchMethod::Bonferroni => {
                        let p = hb_vector(&r_hat, n, alpha)?;
                        let set = bonferroni(&p, self.delta)?;
                        TrialOutcome {
                            endpoint: set.rejected.last().map(|&j| self.grid[j]),
                            false_certification: set
                                .rejected
                                .iter()
                                .any(|&j| self.risks[j] > alpha),
                        }
                    }
                    BenchMethod::Uniform => {
                        let smallest = self.certifiers[a_idx]
                            .as_ref()
                            .and_then(|c| c.certify_descending(&r_hat));
                        TrialOutcome {
                            // A nonempty certified set is a suffix reaching
                            // the grid end.
                            endpoint: smallest.map(|_| self.grid[last]),
                            false_certification: smallest
                                .is_some_and(|j| self.suffix_has_null(j, alpha)),
                        }
                    }
                };
                per_alpha.push(outcome);
            }
            out.push(per_alpha);
        }
        Ok(out)
    }
}

/// Benchmark report: endpoints from the first trial, plus Monte Carlo
/// false-certification rates when `trials > 1`.
pub fn run_benchmark_trials(
    config: &ARConfig,
    alphas: &[f64],
    delta: f64,
    methods: &[BenchMethod],
    trials: usize,
) -> Result<BenchmarkReport> {
    if trials == 0 {
        return Err(Error::invalid("at least one trial is required"));
    }
    let ctx = BenchmarkContext::new(config, alphas, delta, methods)?;
    let outcomes: Result<Vec<Vec<Vec<TrialOutcome>>>> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| ctx.trial(config, trial))
        .collect();
    let outcomes = outcomes?;
    let endpoints = outcomes[0]
        .iter()
        .map(|row| row.iter().map(|o| o.endpoint).collect())
        .collect();
    let mut fwer = Vec::new();
    if trials > 1 {
        for (m_idx, method) in methods.iter().enumerate() {
            for (a_idx, &alpha) in alphas.iter().enumerate() {
                let count = outcomes
                    .iter()
                    .filter(|t| t[m_idx][a_idx].false_certification)
                    .count();
                fwer.push(MethodFwer {
                    method: method.name().to_string(),
                    alpha,
                    fwer: FwerEstimate::from_count(count, trials),
                });
            }
        }
    }
    Ok(BenchmarkReport {
        version: crate::VERSION.to_string(),
        seed: config.seed,
        n_examples: config.n_examples,
        n_grid: config.n_grid,
        corr: config.corr,
        delta,
        alphas: alphas.to_vec(),
        methods: methods.iter().map(|m| m.name().to_string()).collect(),
        endpoints,
        fwer,
    })
}

/// Single-trial benchmark at the configured seed.
pub fn run_benchmark(
    config: &ARConfig,
    alphas: &[f64],
    delta: f64,
    methods: &[BenchMethod],
) -> Result<BenchmarkReport> {
    run_benchmark_trials(config, alphas, delta, methods, 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_config(n: usize, grid: usize, risk: f64, seed: u64) -> ARConfig {
        ARConfig {
            n_examples: n,
            n_grid: grid,
            corr: 0.0,
            risk_curve: RiskCurve::Explicit(vec![risk; grid]),
            seed,
        }
    }

    #[test]
    fn v_shape_targets_hit_ends_and_center() {
        let config = ARConfig {
            n_examples: 10,
            n_grid: 5,
            corr: 0.5,
            risk_curve: RiskCurve::VShape {
                r_end: 0.25,
                r_min: 0.05,
            },
            seed: 1,
        };
        let risks = target_risks(&config).unwrap();
        assert_eq!(risks[0], 0.25);
        assert_eq!(risks[4], 0.25);
        assert_eq!(risks[2], 0.05);
        assert!((risks[1] - 0.15).abs() < 1e-15);
    }

    #[test]
    fn true_nulls_are_strictly_above_alpha() {
        assert_eq!(true_null_set(&[0.1, 0.2, 0.3], 0.2), vec![2]);
        assert!(true_null_set(&[0.1, 0.2], 0.5).is_empty());
    }

    #[test]
    fn simulate_is_deterministic() {
        let config = flat_config(50, 4, 0.3, 9);
        let a = simulate_ar(&config).unwrap();
        let b = simulate_ar(&config).unwrap();
        assert_eq!(a, b);
        let c = simulate_ar_trial(&config, 1).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn column_means_match_target_risk() {
        // E[Phi(Z + mu)] = Phi(mu / sqrt(2)) for unit-variance Z, so the
        // empirical column mean must sit near the calibrated target.
        let config = flat_config(100_000, 2, 0.3, 11);
        let loss = simulate_ar(&config).unwrap();
        let stats = loss.column_stats();
        for mean in &stats.mean {
            assert!((mean - 0.3).abs() < 0.005, "mean = {mean}");
        }
    }

    #[test]
    fn zero_shift_gives_mean_half() {
        let config = flat_config(100_000, 2, 0.5, 13);
        let loss = simulate_ar(&config).unwrap();
        for mean in &loss.column_stats().mean {
            assert!((mean - 0.5).abs() < 0.005, "mean = {mean}");
        }
    }

    #[test]
    fn correlated_chain_keeps_unit_variance_margins() {
        // Stationarity check: every column of Phi(u_j) alone has mean 1/2
        // when the target risk is 1/2, whatever j.
        let config = ARConfig {
            n_examples: 100_000,
            n_grid: 6,
            corr: 0.9,
            risk_curve: RiskCurve::Explicit(vec![0.5; 6]),
            seed: 17,
        };
        let loss = simulate_ar(&config).unwrap();
        for mean in &loss.column_stats().mean {
            assert!((mean - 0.5).abs() < 0.01, "mean = {mean}");
        }
    }

    #[test]
    fn fwer_mc_no_nulls_is_exactly_zero() {
        let null = NullConfig {
            ar: flat_config(40, 3, 0.2, 21),
            alpha: 0.5,
        };
        let est = fwer_monte_carlo(&ProcedureSpec::Bonferroni, &null, 100, 0.1).unwrap();
        assert_eq!(est.estimate, 0.0);
    }

    #[test]
    fn fwer_mc_rejects_tiny_trial_counts() {
        let null = NullConfig {
            ar: flat_config(40, 3, 0.2, 21),
            alpha: 0.5,
        };
        assert!(fwer_monte_carlo(&ProcedureSpec::Bonferroni, &null, 99, 0.1).is_err());
    }

    #[test]
    fn benchmark_alpha_above_all_risk_certifies_full_grid() {
        let config = ARConfig {
            n_examples: 500,
            n_grid: 10,
            corr: 0.0,
            risk_curve: RiskCurve::Explicit(vec![0.05; 10]),
            seed: 31,
        };
        let report = run_benchmark(
            &config,
            &[0.5],
            0.1,
            &[
                BenchMethod::EmpiricalBaseline,
                BenchMethod::FixedSequence,
                BenchMethod::Bonferroni,
            ],
        )
        .unwrap();
        for row in &report.endpoints {
            assert_eq!(row[0], Some(1.0));
        }
    }

    #[test]
    fn benchmark_report_round_trips_through_json() {
        let config = flat_config(200, 5, 0.2, 41);
        let report =
            run_benchmark(&config, &[0.3], 0.1, &[BenchMethod::Bonferroni]).unwrap();
        let text = serde_json::to_string(&report).unwrap();
        let back: BenchmarkReport = serde_json::from_str(&text).unwrap();
        assert_eq!(report, back);
    }
}
