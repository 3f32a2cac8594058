//! Per-hypothesis p-values for "parameter j does not control the risk".
//!
//! Two scalar constructions are provided: the hybridized Hoeffding-Bentkus
//! bound for bounded losses (finite-sample valid) and a CLT-based p-value
//! for the unbounded case (asymptotically valid). Multi-risk hypotheses are
//! combined by taking the maximum p-value across risks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::{LossTensor, RiskSpec};
use crate::math::{h1, log_binom_cdf, log_binom_cdf_table, std_normal_sf};

/// Which scalar p-value backs a vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PValueMethod {
    Hb,
    Clt,
    CombinedMax,
}

/// One p-value per grid point, after any multi-risk combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PValueVector {
    pub values: Vec<f64>,
    pub method: PValueMethod,
}

impl PValueVector {
    pub fn new(values: Vec<f64>, method: PValueMethod) -> Result<Self> {
        if values.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid("p-values must lie in [0, 1]"));
        }
        Ok(PValueVector { values, method })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Per-`(param, risk)` p-values before combination, row-major in the
/// parameter index.
#[derive(Debug, Clone, PartialEq)]
pub struct PValueMatrix {
    n_params: usize,
    n_risks: usize,
    values: Vec<f64>,
    pub method: PValueMethod,
}

impl PValueMatrix {
    pub fn new(n_params: usize, n_risks: usize, values: Vec<f64>, method: PValueMethod) -> Result<Self> {
        if values.len() != n_params * n_risks {
            return Err(Error::invalid("p-value matrix has wrong length"));
        }
        if values.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid("p-values must lie in [0, 1]"));
        }
        Ok(PValueMatrix {
            n_params,
            n_risks,
            values,
            method,
        })
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn n_risks(&self) -> usize {
        self.n_risks
    }

    pub fn get(&self, param: usize, risk: usize) -> f64 {
        self.values[param * self.n_risks + risk]
    }

    pub fn row(&self, param: usize) -> &[f64] {
        let start = param * self.n_risks;
        &self.values[start..start + self.n_risks]
    }
}

/// Hoeffding-Bentkus p-value for `H: R > alpha` from an empirical mean of
/// `n` bounded losses.
///
/// Returns the smaller of the Hoeffding branch
/// `exp(-n h1(min(r_hat, alpha), alpha))` and the Bentkus branch
/// `e * P(Bin(n, alpha) <= ceil(n r_hat))`, clamped to `[0, 1]`.
pub fn hb_pvalue(r_hat: f64, n: usize, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r_hat) {
        return Err(Error::invalid(
            "hb_pvalue requires r_hat in [0, 1]; use CLT p-values for unbounded losses",
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha must lie in (0, 1)"));
    }
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let hoeffding = (-(n as f64) * h1(r_hat.min(alpha), alpha)).exp();
    let k = (n as f64 * r_hat).ceil() as u64;
    let bentkus = (1.0 + log_binom_cdf(k, n as u64, alpha)).exp();
    Ok(hoeffding.min(bentkus).clamp(0.0, 1.0))
}

/// Precomputed state for evaluating many HB p-values at one `(n, alpha)`:
/// the binomial CDF table is built once, making each p-value O(1).
pub struct HbContext {
    n: usize,
    alpha: f64,
    log_cdf: Vec<f64>,
}

impl HbContext {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n must be at least 1"));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid("alpha must lie in (0, 1)"));
        }
        Ok(HbContext {
            n,
            alpha,
            log_cdf: log_binom_cdf_table(n as u64, alpha),
        })
    }

    /// Same value as [`hb_pvalue`] at the context's `(n, alpha)`.
    pub fn pvalue(&self, r_hat: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&r_hat) {
            return Err(Error::invalid(
                "hb_pvalue requires r_hat in [0, 1]; use CLT p-values for unbounded losses",
            ));
        }
        let hoeffding = (-(self.n as f64) * h1(r_hat.min(self.alpha), self.alpha)).exp();
        let k = ((self.n as f64 * r_hat).ceil() as usize).min(self.n);
        let bentkus = (1.0 + self.log_cdf[k]).exp();
        Ok(hoeffding.min(bentkus).clamp(0.0, 1.0))
    }

    pub fn vector(&self, r_hat: &[f64]) -> Result<PValueVector> {
        let values = r_hat
            .iter()
            .map(|&r| self.pvalue(r))
            .collect::<Result<Vec<f64>>>()?;
        PValueVector::new(values, PValueMethod::Hb)
    }
}

/// CLT p-value `1 - Phi(sqrt(n) (alpha - r_hat) / sigma_hat)`.
///
/// When the sample standard deviation vanishes, returns the degenerate
/// limit: 0 below `alpha`, 1 above, one half at the boundary.
pub fn clt_pvalue(r_hat: f64, sigma_hat: f64, n: usize, alpha: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid("clt_pvalue requires n >= 2"));
    }
    if sigma_hat < 0.0 {
        return Err(Error::invalid("sigma_hat must be nonnegative"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha must lie in (0, 1)"));
    }
    if sigma_hat == 0.0 {
        return Ok(if r_hat < alpha {
            0.0
        } else if r_hat > alpha {
            1.0
        } else {
            0.5
        });
    }
    let z = (n as f64).sqrt() * (alpha - r_hat) / sigma_hat;
    Ok(std_normal_sf(z).clamp(0.0, 1.0))
}

/// Applies the chosen scalar p-value to every `(param, risk)` cell of a
/// loss tensor.
pub fn pvalues_from_tensor(
    loss: &LossTensor,
    spec: &RiskSpec,
    method: PValueMethod,
) -> Result<PValueMatrix> {
    if spec.alphas.len() != loss.n_risks() {
        return Err(Error::invalid(format!(
            "{} alpha levels supplied for {} risks",
            spec.alphas.len(),
            loss.n_risks()
        )));
    }
    let n = loss.n_examples();
    let stats = loss.empirical_risk();
    let n_params = loss.n_params();
    let n_risks = loss.n_risks();
    let mut values = vec![0.0; n_params * n_risks];
    for (l, (slice, stat)) in loss.slices().iter().zip(&stats).enumerate() {
        let alpha = spec.alphas[l];
        if method == PValueMethod::Hb && !slice.bounded_unit() {
            return Err(Error::invalid(
                "HB p-values require bounded_unit losses on every risk slice",
            ));
        }
        for j in 0..n_params {
            let p = match method {
                PValueMethod::Hb => hb_pvalue(stat.mean[j], n, alpha)?,
                PValueMethod::Clt => clt_pvalue(stat.mean[j], stat.sd[j], n, alpha)?,
                PValueMethod::CombinedMax => {
                    return Err(Error::invalid(
                        "combined-max is produced by combine_max, not per cell",
                    ))
                }
            };
            values[j * n_risks + l] = p;
        }
    }
    PValueMatrix::new(n_params, n_risks, values, method)
}

/// Collapses a per-risk p-value matrix into one p-value per grid point by
/// taking the maximum across risks.
pub fn combine_max(p: &PValueMatrix) -> PValueVector {
    let values = (0..p.n_params())
        .map(|j| p.row(j).iter().cloned().fold(0.0f64, f64::max))
        .collect();
    PValueVector {
        values,
        method: PValueMethod::CombinedMax,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::LossMatrix;

    #[test]
    fn hb_zero_risk_closed_form() {
        // h1(0, 1/2) = log 2, so the Hoeffding branch is 2^-10 while the
        // Bentkus branch carries the extra factor e.
        let p = hb_pvalue(0.0, 10, 0.5).unwrap();
        assert!((p - 2f64.powi(-10)).abs() < 1e-15);
    }

    #[test]
    fn hb_no_evidence_case() {
        assert_eq!(hb_pvalue(1.0, 10, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn hb_frozen_oracle_value() {
        // Oracle computed before the implementation from the closed forms:
        // exp branch exp(-100 h1(0.05, 0.1)) = exp(-1.6706501...) = 0.1881247...
        // Bentkus branch e * P(Bin(100, 0.1) <= 5) = e * 0.0575768...
        //   = 0.1565102...
        let p = hb_pvalue(0.05, 100, 0.1).unwrap();
        assert!((p - 0.15651020427695356).abs() < 1e-10, "p = {p}");
    }

    #[test]
    fn hb_rejects_bad_inputs() {
        assert!(hb_pvalue(1.2, 10, 0.5).is_err());
        assert!(hb_pvalue(0.5, 10, 0.0).is_err());
        assert!(hb_pvalue(0.5, 10, 1.0).is_err());
    }

    #[test]
    fn hb_monotone_in_r_hat_and_alpha() {
        let mut prev = 0.0;
        for step in 0..=20 {
            let r = step as f64 / 20.0;
            let p = hb_pvalue(r, 50, 0.4).unwrap();
            assert!(p >= prev - 1e-12, "not nondecreasing at r={r}");
            prev = p;
        }
        let mut prev = 1.0;
        for step in 1..20 {
            let a = step as f64 / 20.0;
            let p = hb_pvalue(0.3, 50, a).unwrap();
            assert!(p <= prev + 1e-12, "not nonincreasing at alpha={a}");
            prev = p;
        }
    }

    #[test]
    fn hb_context_matches_scalar_function() {
        let ctx = HbContext::new(137, 0.17).unwrap();
        for step in 0..=137 {
            let r = step as f64 / 137.0;
            let a = ctx.pvalue(r).unwrap();
            let b = hb_pvalue(r, 137, 0.17).unwrap();
            assert!((a - b).abs() < 1e-12, "r = {r}: {a} vs {b}");
        }
    }

    #[test]
    fn clt_boundary_is_one_half() {
        assert!((clt_pvalue(0.2, 0.1, 50, 0.2).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn clt_frozen_oracle_value() {
        // z = 10 * 0.1 / 0.3 = 3.333..., 1 - Phi(z) = 4.29060e-4.
        let p = clt_pvalue(0.1, 0.3, 100, 0.2).unwrap();
        assert!((p - 4.2906e-4).abs() < 1e-7, "p = {p}");
    }

    #[test]
    fn clt_degenerate_sigma() {
        assert_eq!(clt_pvalue(0.1, 0.0, 10, 0.2).unwrap(), 0.0);
        assert_eq!(clt_pvalue(0.3, 0.0, 10, 0.2).unwrap(), 1.0);
        assert_eq!(clt_pvalue(0.2, 0.0, 10, 0.2).unwrap(), 0.5);
    }

    #[test]
    fn clt_refuses_single_example() {
        assert!(clt_pvalue(0.1, 0.1, 1, 0.2).is_err());
    }

    #[test]
    fn tensor_all_zero_losses() {
        let t = LossTensor::from_matrix(LossMatrix::new(10, 3, vec![0.0; 30], true).unwrap());
        let spec = RiskSpec::single(0.5, 0.1).unwrap();
        let p = pvalues_from_tensor(&t, &spec, PValueMethod::Hb).unwrap();
        for j in 0..3 {
            assert!((p.get(j, 0) - 2f64.powi(-10)).abs() < 1e-15);
        }
    }

    #[test]
    fn tensor_boundary_means_give_half_under_clt() {
        // Indicator losses whose column means hit alpha exactly.
        let data = vec![1.0, 0.0, 0.0, 1.0]; // two examples, two params
        let t = LossTensor::from_matrix(LossMatrix::new(2, 2, data, true).unwrap());
        let spec = RiskSpec::single(0.5, 0.1).unwrap();
        let p = pvalues_from_tensor(&t, &spec, PValueMethod::Clt).unwrap();
        assert!((p.get(0, 0) - 0.5).abs() < 1e-12);
        assert!((p.get(1, 0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn hb_requires_bounded_slice() {
        let t = LossTensor::from_matrix(LossMatrix::new(2, 1, vec![0.0, 2.0], false).unwrap());
        let spec = RiskSpec::single(0.5, 0.1).unwrap();
        assert!(pvalues_from_tensor(&t, &spec, PValueMethod::Hb).is_err());
    }

    #[test]
    fn combine_max_dominates_slices() {
        let m = PValueMatrix::new(2, 2, vec![0.02, 0.07, 0.5, 0.1], PValueMethod::Hb).unwrap();
        let c = combine_max(&m);
        assert_eq!(c.values, vec![0.07, 0.5]);
        for j in 0..2 {
            for l in 0..2 {
                assert!(c.values[j] >= m.get(j, l));
            }
        }
    }

    #[test]
    fn combine_max_single_risk_is_identity() {
        let m = PValueMatrix::new(3, 1, vec![0.1, 0.2, 0.3], PValueMethod::Hb).unwrap();
        assert_eq!(combine_max(&m).values, vec![0.1, 0.2, 0.3]);
    }
}
