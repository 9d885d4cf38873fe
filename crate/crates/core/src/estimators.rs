//! Prior estimators, bias bounds, the extended joint measure and posterior
//! recalibration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{lambda_of, posterior0, BinnedConditionals, TargetDistribution};
use crate::solver::{self, LambdaSample, OddsEstimate};

/// Largest debiasing factor `I` for which the debiased estimator is defined.
const OVERLAP_LIMIT: f64 = 1.0 - 1e-12;
/// Allowed drift of the joint table's prior mass from the requested prior.
const NORMALIZATION_TOL: f64 = 1e-8;

/// Bounds on the bias of the total-probability estimator under prior shift
/// from `p0` to `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasBounds {
    /// `sum_k min(f_A[k], f_Ac[k])`.
    pub overlap: f64,
    /// `sum_k f_A f_Ac / (p0 f_A + (1 - p0) f_Ac)`.
    pub i_factor: f64,
    pub lower: f64,
    pub upper: f64,
    /// Exact bias `(p0 - q) I` of total probability on the mixture target.
    pub predicted_gap: f64,
}

/// Joint table of class and bin under the extended target measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedMeasure {
    pub p1: f64,
    pub c: f64,
    #[serde(rename = "joint_A")]
    pub joint_a: Vec<f64>,
    #[serde(rename = "joint_Ac")]
    pub joint_ac: Vec<f64>,
    pub posterior1: Vec<f64>,
    #[serde(rename = "cond_A")]
    pub cond_a: Vec<f64>,
    #[serde(rename = "cond_Ac")]
    pub cond_ac: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub c: f64,
    pub posterior1: Vec<f64>,
    pub achieved_mean: f64,
}

/// Training posteriors rescaled by `p1_target / total_probability`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaivePosterior {
    pub scale: f64,
    pub posterior: Vec<f64>,
    /// `false` where the rescaled value exceeds 1.
    pub valid: Vec<bool>,
}

impl NaivePosterior {
    pub fn all_valid(&self) -> bool {
        self.valid.iter().all(|&v| v)
    }
}

/// Target prior by averaging training posteriors over the target bins.
pub fn total_probability(model: &BinnedConditionals, target: &TargetDistribution) -> Result<f64> {
    target.check_bins(model)?;
    Ok(target
        .weights()
        .iter()
        .zip(posterior0(model))
        .map(|(w, p)| w * p)
        .sum())
}

pub fn lambda_sample(model: &BinnedConditionals, target: &TargetDistribution) -> Result<LambdaSample> {
    target.check_bins(model)?;
    LambdaSample::new(lambda_of(model), target.weights().to_vec())
}

/// Target prior as the root of the total-odds equation.
pub fn total_odds(
    model: &BinnedConditionals,
    target: &TargetDistribution,
    tol: f64,
) -> Result<OddsEstimate> {
    let s = lambda_sample(model, target)?;
    solver::solve_total_odds(&s, tol, solver::DEFAULT_MAX_ITER)
}

pub fn bias_bounds(model: &BinnedConditionals, q: f64) -> BiasBounds {
    let p0 = model.p0();
    let (overlap, i_factor) = model
        .f_a()
        .iter()
        .zip(model.f_ac())
        .fold((0.0, 0.0), |(ov, i), (&a, &c)| {
            (ov + a.min(c), i + a * c / (p0 * a + (1.0 - p0) * c))
        });
    let shift = (q - p0).abs();
    BiasBounds {
        overlap,
        i_factor,
        lower: shift * overlap,
        upper: shift,
        predicted_gap: (p0 - q) * i_factor,
    }
}

/// Total probability corrected for its known bias on mixture targets:
/// `(TP - p0 I) / (1 - I)`. Not clamped to `[0, 1]`.
pub fn debiased_total_probability(
    model: &BinnedConditionals,
    target: &TargetDistribution,
) -> Result<f64> {
    let tp = total_probability(model, target)?;
    let i = bias_bounds(model, model.p0()).i_factor;
    if i >= OVERLAP_LIMIT {
        return Err(Error::DegenerateOverlap);
    }
    Ok((tp - model.p0() * i) / (1.0 - i))
}

/// Builds the joint class/bin table of the target population with prior `p1`
/// and likelihood ratio `c lambda`.
///
/// `p1` must be consistent with the target (the total-odds root for `c = 1`,
/// or the prior `c` was solved for); otherwise the class-conditional bin
/// distributions would not be normalised and `NotNormalized` is returned.
pub fn extend_measure(
    model: &BinnedConditionals,
    target: &TargetDistribution,
    p1: f64,
    c: f64,
) -> Result<ExtendedMeasure> {
    target.check_bins(model)?;
    if !(p1 > 0.0 && p1 < 1.0) {
        return Err(Error::invalid(format!("prior {p1} outside (0,1)")));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::invalid(format!("scale {c} must be positive")));
    }
    let posterior1: Vec<f64> = lambda_of(model)
        .into_iter()
        .map(|l| p1 / (p1 + (1.0 - p1) * c * l))
        .collect();
    let joint_a: Vec<f64> = target
        .weights()
        .iter()
        .zip(&posterior1)
        .map(|(w, p)| w * p)
        .collect();
    let joint_ac: Vec<f64> = target
        .weights()
        .iter()
        .zip(&posterior1)
        .map(|(w, p)| w * (1.0 - p))
        .collect();
    let mass_a: f64 = joint_a.iter().sum();
    if (mass_a - p1).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized {
            expected: p1,
            found: mass_a,
        });
    }
    let cond_a = joint_a.iter().map(|j| j / p1).collect();
    let cond_ac = joint_ac.iter().map(|j| j / (1.0 - p1)).collect();
    Ok(ExtendedMeasure {
        p1,
        c,
        joint_a,
        joint_ac,
        posterior1,
        cond_a,
        cond_ac,
    })
}

/// Posteriors for an externally given target prior, via the scaled
/// likelihood ratio `c lambda`.
pub fn recalibrate_posteriors(
    model: &BinnedConditionals,
    target: &TargetDistribution,
    p1_target: f64,
    tol: f64,
) -> Result<CalibrationResult> {
    let s = lambda_sample(model, target)?;
    let c = solver::solve_scale(&s, p1_target, tol, solver::DEFAULT_MAX_ITER)?;
    let posterior1: Vec<f64> = s
        .lambdas()
        .iter()
        .map(|l| p1_target / (p1_target + (1.0 - p1_target) * c * l))
        .collect();
    let achieved_mean = target
        .weights()
        .iter()
        .zip(&posterior1)
        .map(|(w, p)| w * p)
        .sum();
    Ok(CalibrationResult {
        c,
        posterior1,
        achieved_mean,
    })
}

/// Rescales training posteriors so their target average is `p1_target`.
/// Values above 1 are kept and flagged.
pub fn naive_scaled_posterior(
    model: &BinnedConditionals,
    target: &TargetDistribution,
    p1_target: f64,
) -> Result<NaivePosterior> {
    let tp = total_probability(model, target)?;
    let scale = p1_target / tp;
    let posterior: Vec<f64> = posterior0(model).into_iter().map(|p| p * scale).collect();
    let valid = posterior.iter().map(|&p| p <= 1.0).collect();
    Ok(NaivePosterior {
        scale,
        posterior,
        valid,
    })
}

/// `q`-dependent part of the mixture log-likelihood,
/// `sum_k counts[k] ln(q + (1 - q) lambda_k)`, for each `q` in the grid.
pub fn log_likelihood_profile(q_grid: &[f64], lambdas: &[f64], counts: &[u64]) -> Result<Vec<f64>> {
    if lambdas.len() != counts.len() {
        return Err(Error::DimensionMismatch {
            expected: lambdas.len(),
            found: counts.len(),
        });
    }
    if counts.iter().all(|&c| c == 0) {
        return Err(Error::invalid("all counts are zero"));
    }
    Ok(q_grid
        .iter()
        .map(|&q| {
            lambdas
                .iter()
                .zip(counts)
                .filter(|(_, &n)| n > 0)
                .map(|(&l, &n)| n as f64 * (q + (1.0 - q) * l).ln())
                .sum()
        })
        .collect())
}
