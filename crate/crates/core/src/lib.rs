//! Estimating the positive-class prior of an unlabeled population from
//! classifier scores.
//!
//! The training model is a finite score partition with class-conditional bin
//! probabilities ([`model`]). The target prior is estimated either by
//! averaging training posteriors over the target (total probability, biased
//! toward the training prior) or as the unique root of the total-odds
//! equation `E1[1 / (p + (1 - p) lambda)] = 1` ([`solver`]), which is
//! unbiased under prior shift. [`estimators`] also covers the bias bounds,
//! a debiased total-probability estimator, the extended joint measure and
//! posterior recalibration to an externally given prior. [`sim`] runs Monte
//! Carlo comparisons.

pub mod error;
pub mod estimators;
pub mod io;
pub mod model;
pub mod sim;
pub mod solver;

pub use error::{Error, Result};
pub use estimators::{
    bias_bounds, debiased_total_probability, extend_measure, log_likelihood_profile,
    naive_scaled_posterior, recalibrate_posteriors, total_odds, total_probability, BiasBounds,
    CalibrationResult, ExtendedMeasure, NaivePosterior,
};
pub use model::{
    fit_binned, lambda_of, mixture_target, posterior0, target_weights, BinEdges,
    BinnedConditionals, Class, Record, ScoredDataset, TargetDistribution,
};
pub use solver::{
    diagnose, f_eval, solve_scale, solve_total_odds, ExistenceDiagnostics, LambdaSample,
    OddsEstimate, SolutionCase,
};
