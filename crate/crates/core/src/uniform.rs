//! Uniform empirical-process confidence bounds and the calibration baseline
//! built on them.
//!
//! The tail bound combines a two-sample symmetrization inequality with a
//! Rademacher refinement; both bound the probability that the true risk
//! exceeds its empirical estimate by `t` standard-deviation-like units
//! simultaneously over the whole grid. Solving `bound(t) = delta` yields a
//! critical value `t*` and the uniform upper confidence bound
//! `R+ = r_hat + t* sqrt(r_hat + eta + t*^2/4) + t*^2/2`.

use crate::error::{Error, Result};
use crate::loss::LossMatrix;
use crate::math::{golden_section_min, std_normal_sf};

/// Growth function `Delta(x)`: the number of distinct loss-vector patterns
/// achievable by `x` sample points.
#[derive(Debug, Clone, PartialEq)]
pub enum Growth {
    /// `Delta(x) = x * m + 1`, the closed form for losses that change value
    /// only at finitely many (`m` per example) grid crossings.
    Linear { m: u64 },
    /// Explicit `(argument, value)` tabulation, sorted by argument. Lookups
    /// round up to the next tabulated argument.
    Table(Vec<(u64, f64)>),
}

impl Growth {
    pub fn eval(&self, x: u64) -> Result<f64> {
        match self {
            Growth::Linear { m } => Ok(x as f64 * *m as f64 + 1.0),
            Growth::Table(rows) => rows
                .iter()
                .find(|(arg, _)| *arg >= x)
                .map(|(_, v)| *v)
                .ok_or_else(|| {
                    Error::invalid(format!("growth table has no entry covering argument {x}"))
                }),
        }
    }
}

/// Search grids and tolerances for evaluating the uniform tail bound.
#[derive(Debug, Clone)]
pub struct UniformBoundConfig {
    pub eta: f64,
    pub growth: Growth,
    /// Grid for the split parameter `gamma`, inside the open unit interval.
    pub gamma_grid: Vec<f64>,
    /// Ghost-sample sizes to scan; `None` derives
    /// `{ceil(n/8), ceil(n/4), ceil(n/2), n, 2n, 4n, 8n}` from `n`.
    pub n_prime_grid: Option<Vec<u64>>,
    /// Tolerance on the bound value when solving for `t`.
    pub t_tol: f64,
}

impl UniformBoundConfig {
    pub fn new(eta: f64, growth: Growth) -> Result<Self> {
        let config = UniformBoundConfig {
            eta,
            growth,
            gamma_grid: (1..100).map(|i| i as f64 / 100.0).collect(),
            n_prime_grid: None,
            t_tol: 1e-6,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0) {
            return Err(Error::invalid("eta must be nonnegative"));
        }
        if self.gamma_grid.is_empty()
            || self.gamma_grid.iter().any(|g| !(*g > 0.0 && *g < 1.0))
        {
            return Err(Error::invalid("gamma grid must lie inside (0, 1)"));
        }
        if let Some(grid) = &self.n_prime_grid {
            if grid.is_empty() || grid.contains(&0) {
                return Err(Error::invalid("n' grid must hold positive integers"));
            }
        }
        if !(self.t_tol > 0.0) {
            return Err(Error::invalid("bisection tolerance must be positive"));
        }
        Ok(())
    }

    fn n_primes(&self, n: u64) -> Vec<u64> {
        match &self.n_prime_grid {
            Some(grid) => grid.clone(),
            None => {
                let mut out = vec![
                    n.div_ceil(8),
                    n.div_ceil(4),
                    n.div_ceil(2),
                    n,
                    2 * n,
                    4 * n,
                    8 * n,
                ];
                out.retain(|&v| v >= 1);
                out.dedup();
                out
            }
        }
    }
}

/// `g1(t; n', gamma, kappa)`: the concentration exponent of the ghost
/// sample, the larger of a Bernstein-style rate and a coarse logarithmic
/// rate.
fn g1(t: f64, n_prime: u64, gamma: f64, kappa: f64) -> f64 {
    let np = n_prime as f64;
    let bernstein = if kappa == 0.0 {
        0.0
    } else {
        (np * t * t / 2.0) * gamma * gamma / (1.0 + gamma * gamma * t * t / (36.0 * kappa))
    };
    let denom = ((1.0 + kappa).sqrt() - kappa.sqrt()).powi(2);
    let coarse = (np * t * t * gamma * gamma / denom).ln();
    bernstein.max(coarse)
}

/// `g2(t; n, n', gamma, kappa)`: the main-sample exponent.
fn g2(t: f64, n: u64, n_prime: u64, gamma: f64, kappa: f64) -> f64 {
    let n = n as f64;
    let np = n_prime as f64;
    let ratio = np / (n + np);
    let one_minus = 1.0 - gamma;
    (n * t * t / 2.0) * ratio * ratio * one_minus * one_minus
        / (1.0 + one_minus * one_minus * t * t / (36.0 * kappa))
}

/// Gaussian-tail envelope used by the Rademacher refinement.
fn g_tilde(x: f64) -> f64 {
    let sf = std_normal_sf(x);
    let c1 = 0.25 / std_normal_sf(std::f64::consts::SQRT_2);
    let c2 = 5.0 * std::f64::consts::E.sqrt() * (2.0 * (1.0 - std_normal_sf(1.0)) - 1.0);
    let half_sq = (-x * x / 2.0).exp();
    let g1 = c1 * sf;
    let g2 = sf + c2 / (9.0 + x * x) * half_sq;
    g1.min(g2).min(half_sq)
}

fn tail_bound_with_eta(t: f64, n: u64, eta: f64, config: &UniformBoundConfig) -> Result<f64> {
    if !(t > 0.0) || n == 0 {
        return Err(Error::invalid("tail bound needs t > 0 and n >= 1"));
    }
    let mut best = f64::INFINITY;
    let kappa_plus = eta + t * t / 2.0 + t * (t * t / 4.0 + eta).sqrt();
    for &gamma in &config.gamma_grid {
        // Two-sample term, scanned over ghost-sample sizes.
        for &n_prime in &config.n_primes(n) {
            let exponent = g1(t, n_prime, gamma, eta);
            let denom = 1.0 - (-exponent).exp();
            if denom <= 0.0 {
                continue;
            }
            let nf = n as f64;
            let npf = n_prime as f64;
            let kappa_minus = eta + (nf + gamma * npf) / (nf + npf) * kappa_plus.sqrt();
            let numerator =
                config.growth.eval(n + n_prime)? * (-g2(t, n, n_prime, gamma, kappa_minus)).exp();
            best = best.min(numerator / denom);
        }
        // Rademacher refinement.
        let exponent = g1(t, n, gamma, eta);
        let denom = 1.0 - (-exponent).exp();
        if denom > 0.0 {
            let x = (n as f64 * (1.0 + eta) / 2.0).sqrt() * (1.0 - gamma) * t;
            let numerator = config.growth.eval(2 * n)? * g_tilde(x);
            best = best.min(numerator / denom);
        }
    }
    if !best.is_finite() {
        return Err(Error::VacuousBound);
    }
    Ok(best.clamp(0.0, 1.0))
}

/// Uniform upper-tail bound `P(sup (R - R_hat)/sqrt(R + eta) >= t)` at the
/// configured `eta`.
pub fn tail_bound_upper(t: f64, n: u64, config: &UniformBoundConfig) -> Result<f64> {
    tail_bound_with_eta(t, n, config.eta, config)
}

// For unit-bounded risks any t with t^2/2 > 1 already pushes the upper
// confidence bound past every attainable level, so roots beyond this cap
// certify nothing and signal an undersized sample instead.
const T_HI_CAP: f64 = 2.0;

/// Solves `tail_bound(t) = delta` for `t` by doubling then bisection,
/// rounding toward the conservative (larger `t`) side.
pub fn solve_t(eta: f64, delta: f64, n: u64, config: &UniformBoundConfig) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("delta must lie in (0, 1)"));
    }
    let bound = |t: f64| tail_bound_with_eta(t, n, eta, config);
    let mut hi = 0.5;
    loop {
        match bound(hi) {
            Ok(b) if b < delta => break,
            Ok(_) | Err(Error::VacuousBound) => {
                hi *= 2.0;
                if hi > T_HI_CAP {
                    return Err(Error::SampleTooSmall);
                }
            }
            Err(e) => return Err(e),
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let b = match bound(mid) {
            Ok(b) => b,
            Err(Error::VacuousBound) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        if b < delta {
            hi = mid;
            if (delta - b) <= config.t_tol {
                break;
            }
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `R+ = r_hat + t sqrt(r_hat + eta + t^2/4) + t^2/2`, the uniform upper
/// confidence bound on the true risk.
pub fn upper_confidence_bound(r_hat: f64, t_star: f64, eta: f64) -> f64 {
    r_hat + t_star * (r_hat + eta + t_star * t_star / 4.0).sqrt() + t_star * t_star / 2.0
}

const ETA_GRID_POINTS: usize = 25;
const ETA_LOG_LO: f64 = -4.0;
const ETA_LOG_HI: f64 = 0.0;

/// Optimizes `eta` for certification at level `(alpha, delta)`.
///
/// Minimizes `x(eta; delta) = alpha - t(eta; delta) sqrt(alpha + eta)`, the
/// empirical-risk threshold below which the uniform bound certifies level
/// `alpha`, over a logarithmic grid refined by golden-section search.
/// Returns the minimizing `eta` and the achieved threshold.
pub fn optimal_eta(
    alpha: f64,
    delta: f64,
    n: u64,
    config: &UniformBoundConfig,
) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("alpha and delta must lie in (0, 1)"));
    }
    let x_of = |eta: f64| -> Result<f64> {
        let t = solve_t(eta, delta, n, config)?;
        Ok(alpha - t * (alpha + eta).sqrt())
    };
    let mut grid_best: Option<(usize, f64, f64)> = None;
    let mut etas = Vec::with_capacity(ETA_GRID_POINTS);
    for i in 0..ETA_GRID_POINTS {
        let exponent =
            ETA_LOG_LO + (ETA_LOG_HI - ETA_LOG_LO) * i as f64 / (ETA_GRID_POINTS - 1) as f64;
        etas.push(10f64.powf(exponent));
    }
    for (i, &eta) in etas.iter().enumerate() {
        match x_of(eta) {
            Ok(x) => {
                if grid_best.map_or(true, |(_, _, best_x)| x < best_x) {
                    grid_best = Some((i, eta, x));
                }
            }
            Err(Error::SampleTooSmall) => continue,
            Err(e) => return Err(e),
        }
    }
    let Some((idx, mut eta_star, mut x_star)) = grid_best else {
        return Err(Error::SampleTooSmall);
    };
    let lo = etas[idx.saturating_sub(1)];
    let hi = etas[(idx + 1).min(etas.len() - 1)];
    if hi > lo {
        let (eta_ref, x_ref) = golden_section_min(
            |eta| x_of(eta).unwrap_or(f64::INFINITY),
            lo,
            hi,
            20,
        );
        if x_ref < x_star {
            eta_star = eta_ref;
            x_star = x_ref;
        }
    }
    if x_star < 0.0 {
        return Err(Error::UnreachableAlpha);
    }
    Ok((eta_star, x_star))
}

/// Precomputed uniform certification rule: data-independent, so one
/// instance serves every Monte Carlo trial at fixed `(alpha, delta, n)`.
#[derive(Debug, Clone)]
pub struct UniformCertifier {
    pub alpha: f64,
    pub eta: f64,
    pub t_star: f64,
    /// Empirical-risk threshold: certification holds while `r_hat <= x`.
    pub x: f64,
}

impl UniformCertifier {
    pub fn prepare(
        alpha: f64,
        delta: f64,
        n: u64,
        config: &UniformBoundConfig,
    ) -> Result<Option<Self>> {
        let (eta, x) = match optimal_eta(alpha, delta, n, config) {
            Ok(pair) => pair,
            Err(Error::UnreachableAlpha) => return Ok(None),
            Err(e) => return Err(e),
        };
        let t_star = solve_t(eta, delta, n, config)?;
        Ok(Some(UniformCertifier {
            alpha,
            eta,
            t_star,
            x,
        }))
    }

    /// Walks the grid from its last index downward while the uniform upper
    /// confidence bound stays within `alpha`; returns the smallest index
    /// reached, or `None` if the first point already fails.
    pub fn certify_descending(&self, r_hat: &[f64]) -> Option<usize> {
        let mut selected = None;
        for j in (0..r_hat.len()).rev() {
            if upper_confidence_bound(r_hat[j], self.t_star, self.eta) <= self.alpha {
                selected = Some(j);
            } else {
                break;
            }
        }
        selected
    }
}

/// Calibration baseline: certify a single deployable grid index with the
/// uniform bound, or abstain.
pub fn calibrate_uniform(
    loss: &LossMatrix,
    alpha: f64,
    delta: f64,
    config: &UniformBoundConfig,
) -> Result<Option<usize>> {
    if !loss.bounded_unit() {
        return Err(Error::invalid(
            "uniform calibration requires bounded_unit losses",
        ));
    }
    let Some(certifier) = UniformCertifier::prepare(alpha, delta, loss.n_examples() as u64, config)?
    else {
        return Ok(None);
    };
    let stats = loss.column_stats();
    Ok(certifier.certify_descending(&stats.mean))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(eta: f64) -> UniformBoundConfig {
        UniformBoundConfig::new(eta, Growth::Linear { m: 1 }).unwrap()
    }

    #[test]
    fn constants_match_closed_forms() {
        let c1 = 0.25 / std_normal_sf(std::f64::consts::SQRT_2);
        let c2 = 5.0 * std::f64::consts::E.sqrt() * (2.0 * (1.0 - std_normal_sf(1.0)) - 1.0);
        assert!((c1 - 3.178655565887).abs() < 1e-10, "c1 = {c1}");
        assert!((c2 - 5.627823434849).abs() < 1e-10, "c2 = {c2}");
    }

    #[test]
    fn bound_decays_for_large_t() {
        let b = tail_bound_upper(10.0, 10_000, &config(0.01)).unwrap();
        assert!(b < 1e-6, "bound = {b}");
    }

    #[test]
    fn bound_nonincreasing_in_t() {
        let cfg = config(0.01);
        let mut prev = f64::INFINITY;
        for step in 1..=40 {
            let t = 0.01 + (5.0 - 0.01) * step as f64 / 40.0;
            let b = tail_bound_upper(t, 2000, &cfg).unwrap();
            assert!(b <= prev + 1e-12, "increase at t = {t}");
            prev = b;
        }
    }

    #[test]
    fn bound_nondecreasing_in_growth() {
        let small = UniformBoundConfig::new(0.01, Growth::Linear { m: 1 }).unwrap();
        let large = UniformBoundConfig::new(0.01, Growth::Linear { m: 50 }).unwrap();
        let t = 0.2;
        let b_small = tail_bound_upper(t, 2000, &small).unwrap();
        let b_large = tail_bound_upper(t, 2000, &large).unwrap();
        assert!(b_large >= b_small);
    }

    #[test]
    fn solve_t_self_consistent() {
        let cfg = config(0.01);
        let t = solve_t(0.01, 0.1, 5000, &cfg).unwrap();
        let b = tail_bound_upper(t, 5000, &cfg).unwrap();
        assert!((b - 0.1).abs() <= 1e-6, "bound(t*) = {b}");
    }

    #[test]
    fn solve_t_weakly_decreasing_in_delta() {
        let cfg = config(0.01);
        for &delta in &[0.01, 0.05, 0.1, 0.2] {
            let t1 = solve_t(0.01, delta, 3000, &cfg).unwrap();
            let t2 = solve_t(0.01, 2.0 * delta, 3000, &cfg).unwrap();
            assert!(t2 <= t1 + 1e-9, "delta = {delta}");
        }
    }

    #[test]
    fn solve_t_tiny_sample_errors() {
        let cfg = config(0.01);
        assert!(matches!(
            solve_t(0.01, 0.1, 5, &cfg),
            Err(Error::SampleTooSmall)
        ));
    }

    #[test]
    fn ucb_identity_and_plugin() {
        assert_eq!(upper_confidence_bound(0.3, 0.0, 0.5), 0.3);
        let v = upper_confidence_bound(0.0, 0.1, 0.0);
        assert!((v - 0.01).abs() < 1e-15, "v = {v}");
    }

    #[test]
    fn ucb_dominates_r_hat() {
        for step in 0..=10 {
            let r = step as f64 / 10.0;
            assert!(upper_confidence_bound(r, 0.2, 0.01) >= r);
        }
    }

    #[test]
    fn optimal_eta_beats_grid_and_stays_below_alpha() {
        let cfg = config(0.0);
        let (eta_star, x_star) = optimal_eta(0.2, 0.1, 20_000, &cfg).unwrap();
        assert!(eta_star > 0.0);
        assert!(x_star < 0.2);
        for &eta in &[1e-4, 1e-3, 1e-2, 1e-1, 1.0] {
            let t = solve_t(eta, 0.1, 20_000, &cfg).unwrap();
            let x = 0.2 - t * (0.2 + eta).sqrt();
            assert!(x_star <= x + 1e-9, "eta = {eta}");
        }
    }

    #[test]
    fn calibrate_all_zero_reaches_grid_minimum() {
        let loss = LossMatrix::new(20_000, 5, vec![0.0; 100_000], true).unwrap();
        let cfg = config(0.0);
        let sel = calibrate_uniform(&loss, 0.2, 0.1, &cfg).unwrap();
        assert_eq!(sel, Some(0));
    }

    #[test]
    fn calibrate_all_one_abstains() {
        let loss = LossMatrix::new(20_000, 5, vec![1.0; 100_000], true).unwrap();
        let cfg = config(0.0);
        let sel = calibrate_uniform(&loss, 0.2, 0.1, &cfg).unwrap();
        assert_eq!(sel, None);
    }
}
