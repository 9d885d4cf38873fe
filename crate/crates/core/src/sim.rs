//! Synthetic shift scenarios and Monte Carlo comparison of the estimators.
//!
//! Every replication draws from its own ChaCha stream derived from the
//! scenario seed, so results do not depend on execution order and the
//! replications run in parallel.

use std::io::Write;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand::distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal as NormalCdf};

use crate::error::{Error, Result};
use crate::estimators::{self, BiasBounds};
use crate::model::{
    self, BinEdges, BinnedConditionals, Class, Record, ScoredDataset, TargetDistribution,
};
use crate::solver::{self, OddsEstimate, SolutionCase};

/// Class-conditional score distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreModel {
    Gaussian { mu_a: f64, mu_ac: f64, sigma: f64 },
    /// Scores are bin indices `k + 0.5` drawn with probabilities `f_a` / `f_ac`.
    Discrete { f_a: Vec<f64>, f_ac: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shift {
    /// Target is the class mixture with prior `q`.
    PriorShift { q: f64 },
    /// Target bin distribution is given directly; its prior is whatever the
    /// total-odds equation implies under the true likelihood ratio.
    OddsPreservingShift { target_weights: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(flatten)]
    pub shift: Shift,
    pub score_model: ScoreModel,
    pub p0: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub n_reps: usize,
    pub seed: u64,
    /// Use the true class-conditional bin probabilities instead of fitting.
    #[serde(default)]
    pub exact_model: bool,
    /// Use the exact target bin distribution instead of sampling it.
    #[serde(default)]
    pub exact_target: bool,
}

/// How replication bins are chosen for continuous score models.
#[derive(Debug, Clone, PartialEq)]
pub enum Binning {
    Fixed(BinEdges),
    /// Equal-frequency bins on each replication's training sample.
    EqualFrequency(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub mean: f64,
    pub std: f64,
    pub mae: f64,
    pub n_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub truth: f64,
    pub n_reps: usize,
    pub total_probability: MethodSummary,
    pub total_odds: MethodSummary,
    pub debiased: MethodSummary,
    /// Replications where total odds returned a boundary or degenerate status.
    pub non_interior_count: usize,
    /// Replications that failed outright (e.g. a class missing from training).
    pub error_count: usize,
    /// Bias bounds at the true prior, averaged over fitted models.
    pub mean_bias_bounds: Option<BiasBounds>,
}

impl MonteCarloSummary {
    pub fn methods(&self) -> [&MethodSummary; 3] {
        [&self.total_probability, &self.total_odds, &self.debiased]
    }

    /// One row per method: `method,mean,std,mae,n_used`.
    pub fn write_methods_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for m in self.methods() {
            w.serialize(m)?;
        }
        w.flush()?;
        Ok(())
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.p0 > 0.0 && self.p0 < 1.0) {
            return Err(Error::invalid("p0 must lie in (0,1)"));
        }
        if self.n_train == 0 || self.n_test == 0 || self.n_reps == 0 {
            return Err(Error::invalid("n_train, n_test and n_reps must be >= 1"));
        }
        match &self.score_model {
            ScoreModel::Gaussian { sigma, mu_a, mu_ac } => {
                if !(*sigma > 0.0) || !mu_a.is_finite() || !mu_ac.is_finite() {
                    return Err(Error::invalid("gaussian model needs finite means and sigma > 0"));
                }
            }
            ScoreModel::Discrete { f_a, f_ac } => {
                BinnedConditionals::from_densities(f_a.clone(), f_ac.clone(), self.p0)?;
            }
        }
        match &self.shift {
            Shift::PriorShift { q } if !(*q > 0.0 && *q < 1.0) => {
                Err(Error::invalid("q must lie in (0,1)"))
            }
            Shift::OddsPreservingShift { target_weights } => {
                TargetDistribution::new(target_weights.clone(), None).map(|_| ())
            }
            _ => Ok(()),
        }
    }
}

/// Draws `n` labeled records: class `A` with probability `prior`, score from
/// the matching class-conditional distribution.
pub fn sample_labeled<R: Rng + ?Sized>(
    score_model: &ScoreModel,
    prior: f64,
    n: usize,
    rng: &mut R,
) -> Result<ScoredDataset> {
    if !(0.0..=1.0).contains(&prior) {
        return Err(Error::invalid(format!("prior {prior} outside [0,1]")));
    }
    let mut records = Vec::with_capacity(n);
    match score_model {
        ScoreModel::Gaussian { mu_a, mu_ac, sigma } => {
            let bad = |_| Error::invalid("invalid gaussian parameters");
            let dist_a = Normal::new(*mu_a, *sigma).map_err(bad)?;
            let dist_ac = Normal::new(*mu_ac, *sigma).map_err(bad)?;
            for _ in 0..n {
                let class = draw_class(prior, rng);
                let score = match class {
                    Class::A => dist_a.sample(rng),
                    Class::Ac => dist_ac.sample(rng),
                };
                records.push(Record {
                    score,
                    label: Some(class),
                });
            }
        }
        ScoreModel::Discrete { f_a, f_ac } => {
            let bad = |_| Error::invalid("invalid discrete probabilities");
            let dist_a = WeightedIndex::new(f_a).map_err(bad)?;
            let dist_ac = WeightedIndex::new(f_ac).map_err(bad)?;
            for _ in 0..n {
                let class = draw_class(prior, rng);
                let k = match class {
                    Class::A => dist_a.sample(rng),
                    Class::Ac => dist_ac.sample(rng),
                };
                records.push(Record {
                    score: k as f64 + 0.5,
                    label: Some(class),
                });
            }
        }
    }
    ScoredDataset::new("sample", records)
}

fn draw_class<R: Rng + ?Sized>(prior: f64, rng: &mut R) -> Class {
    if rng.random::<f64>() < prior {
        Class::A
    } else {
        Class::Ac
    }
}

/// The target bin distribution together with the prior it implies when the
/// training likelihood ratio is kept.
pub fn odds_preserving_target(
    model: &BinnedConditionals,
    weights: &TargetDistribution,
) -> Result<(TargetDistribution, OddsEstimate)> {
    let est = estimators::total_odds(model, weights, solver::DEFAULT_TOL)?;
    Ok((weights.clone(), est))
}

/// Exact class-conditional bin probabilities of the score model on `edges`,
/// with end bins absorbing the tails.
pub fn true_model(score_model: &ScoreModel, p0: f64, edges: &BinEdges) -> Result<BinnedConditionals> {
    match score_model {
        ScoreModel::Gaussian { mu_a, mu_ac, sigma } => {
            let masses = |mu: f64| -> Result<Vec<f64>> {
                let dist = NormalCdf::new(mu, *sigma)
                    .map_err(|e| Error::invalid(format!("gaussian: {e}")))?;
                let cuts = &edges.as_slice()[1..edges.bins()];
                let mut cdf: Vec<f64> = vec![0.0];
                cdf.extend(cuts.iter().map(|&x| dist.cdf(x)));
                cdf.push(1.0);
                let raw: Vec<f64> = cdf.windows(2).map(|w| w[1] - w[0]).collect();
                let total: f64 = raw.iter().sum();
                Ok(raw.into_iter().map(|m| m / total).collect())
            };
            BinnedConditionals::new(edges.clone(), masses(*mu_a)?, masses(*mu_ac)?, p0)
        }
        ScoreModel::Discrete { f_a, f_ac } => {
            BinnedConditionals::from_densities(f_a.clone(), f_ac.clone(), p0)
        }
    }
}

/// `p`-quantile of the two-component gaussian mixture.
fn mixture_quantile(mu_a: f64, mu_ac: f64, sigma: f64, weight_a: f64, p: f64) -> f64 {
    let da = NormalCdf::new(mu_a, sigma).expect("validated sigma");
    let dc = NormalCdf::new(mu_ac, sigma).expect("validated sigma");
    let cdf = |x: f64| weight_a * da.cdf(x) + (1.0 - weight_a) * dc.cdf(x);
    let mut lo = mu_a.min(mu_ac) - 40.0 * sigma;
    let mut hi = mu_a.max(mu_ac) + 40.0 * sigma;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Edges used when the model is not fitted from a sample.
fn reference_edges(sc: &Scenario, binning: &Binning) -> Result<BinEdges> {
    match (&sc.score_model, binning) {
        (ScoreModel::Discrete { f_a, .. }, _) => integer_edges(f_a.len()),
        (_, Binning::Fixed(edges)) => Ok(edges.clone()),
        (ScoreModel::Gaussian { mu_a, mu_ac, sigma }, Binning::EqualFrequency(k)) => {
            let k = *k;
            if k < 2 {
                return Err(Error::invalid("need at least 2 bins"));
            }
            let mut edges: Vec<f64> = (0..=k)
                .map(|i| {
                    let p = (i as f64 / k as f64).clamp(1e-6, 1.0 - 1e-6);
                    mixture_quantile(*mu_a, *mu_ac, *sigma, sc.p0, p)
                })
                .collect();
            edges.dedup();
            BinEdges::new(edges)
        }
    }
}

fn integer_edges(k: usize) -> Result<BinEdges> {
    BinEdges::new((0..=k).map(|x| x as f64).collect())
}

/// Prior of the target population under the true model.
pub fn scenario_truth(sc: &Scenario, binning: &Binning) -> Result<f64> {
    match &sc.shift {
        Shift::PriorShift { q } => Ok(*q),
        Shift::OddsPreservingShift { target_weights } => {
            let edges = odds_preserving_edges(sc, binning)?;
            let model = true_model(&sc.score_model, sc.p0, &edges)?;
            let weights = TargetDistribution::new(target_weights.clone(), None)?;
            let (_, est) = odds_preserving_target(&model, &weights)?;
            if est.status == SolutionCase::Degenerate {
                return Err(Error::DegenerateLambda);
            }
            Ok(est.p1)
        }
    }
}

fn odds_preserving_edges(sc: &Scenario, binning: &Binning) -> Result<BinEdges> {
    match (&sc.score_model, binning) {
        (ScoreModel::Discrete { f_a, .. }, _) => integer_edges(f_a.len()),
        (_, Binning::Fixed(edges)) => Ok(edges.clone()),
        _ => Err(Error::invalid(
            "odds-preserving shift with a gaussian model needs fixed bin edges",
        )),
    }
}

struct RepOutcome {
    total_probability: f64,
    total_odds: OddsEstimate,
    debiased: Option<f64>,
    bounds: BiasBounds,
}

fn run_replication(
    sc: &Scenario,
    binning: &Binning,
    pseudo_count: f64,
    truth: f64,
    rep: usize,
) -> Result<RepOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    rng.set_stream(rep as u64);

    let (model, true_m) = if sc.exact_model {
        let edges = match sc.shift {
            Shift::OddsPreservingShift { .. } => odds_preserving_edges(sc, binning)?,
            Shift::PriorShift { .. } => reference_edges(sc, binning)?,
        };
        let m = true_model(&sc.score_model, sc.p0, &edges)?;
        (m.clone(), m)
    } else {
        let train = sample_labeled(&sc.score_model, sc.p0, sc.n_train, &mut rng)?;
        let edges = match (&sc.score_model, &sc.shift, binning) {
            (ScoreModel::Discrete { .. }, _, _) | (_, Shift::OddsPreservingShift { .. }, _) => {
                odds_preserving_edges(sc, binning)?
            }
            (_, _, Binning::Fixed(e)) => e.clone(),
            (_, _, Binning::EqualFrequency(k)) => {
                let scores: Vec<f64> = train.scores().collect();
                BinEdges::equal_frequency(&scores, *k)?
            }
        };
        let fitted = model::fit_binned(&train, &edges, pseudo_count)?;
        let true_m = true_model(&sc.score_model, sc.p0, &edges)?;
        (fitted, true_m)
    };

    let target = match (&sc.shift, sc.exact_target) {
        (Shift::PriorShift { q }, true) => model::mixture_target(&true_m, *q)?,
        (Shift::PriorShift { q }, false) => {
            let test = sample_labeled(&sc.score_model, *q, sc.n_test, &mut rng)?;
            model::target_weights(&test, model.edges())?
        }
        (Shift::OddsPreservingShift { target_weights }, true) => {
            TargetDistribution::new(target_weights.clone(), None)?
        }
        (Shift::OddsPreservingShift { target_weights }, false) => {
            let dist = WeightedIndex::new(target_weights)
                .map_err(|_| Error::invalid("invalid target weights"))?;
            let mut counts = vec![0usize; target_weights.len()];
            for _ in 0..sc.n_test {
                counts[dist.sample(&mut rng)] += 1;
            }
            model::weights_from_counts(&counts)?
        }
    };

    let total_probability = estimators::total_probability(&model, &target)?;
    let total_odds = estimators::total_odds(&model, &target, solver::DEFAULT_TOL)?;
    let debiased = match estimators::debiased_total_probability(&model, &target) {
        Ok(v) => Some(v),
        Err(Error::DegenerateOverlap) => None,
        Err(e) => return Err(e),
    };
    Ok(RepOutcome {
        total_probability,
        total_odds,
        debiased,
        bounds: estimators::bias_bounds(&model, truth),
    })
}

fn summarize(method: &str, values: &[f64], truth: f64) -> MethodSummary {
    let n = values.len();
    if n == 0 {
        return MethodSummary {
            method: method.to_string(),
            mean: f64::NAN,
            std: f64::NAN,
            mae: f64::NAN,
            n_used: 0,
        };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    let mae = values.iter().map(|v| (v - truth).abs()).sum::<f64>() / n as f64;
    MethodSummary {
        method: method.to_string(),
        mean,
        std: var.sqrt(),
        mae,
        n_used: n,
    }
}

/// Runs all replications of `sc` and aggregates the three estimators.
///
/// Failed replications are counted, not fatal. Total-odds statistics use
/// interior solutions only.
pub fn run_monte_carlo(
    sc: &Scenario,
    binning: &Binning,
    pseudo_count: f64,
) -> Result<MonteCarloSummary> {
    sc.validate()?;
    let truth = scenario_truth(sc, binning)?;
    let outcomes: Vec<Result<RepOutcome>> = (0..sc.n_reps)
        .into_par_iter()
        .map(|rep| run_replication(sc, binning, pseudo_count, truth, rep))
        .collect();

    let mut tp = Vec::with_capacity(sc.n_reps);
    let mut to = Vec::with_capacity(sc.n_reps);
    let mut deb = Vec::with_capacity(sc.n_reps);
    let mut bounds = Vec::with_capacity(sc.n_reps);
    let mut non_interior_count = 0;
    let mut error_count = 0;
    for outcome in &outcomes {
        match outcome {
            Ok(o) => {
                tp.push(o.total_probability);
                if o.total_odds.status == SolutionCase::Interior {
                    to.push(o.total_odds.p1);
                } else {
                    non_interior_count += 1;
                }
                if let Some(d) = o.debiased {
                    deb.push(d);
                }
                bounds.push(o.bounds);
            }
            Err(_) => error_count += 1,
        }
    }

    let mean_bias_bounds = (!bounds.is_empty()).then(|| {
        let n = bounds.len() as f64;
        let avg = |f: fn(&BiasBounds) -> f64| bounds.iter().map(f).sum::<f64>() / n;
        BiasBounds {
            overlap: avg(|b| b.overlap),
            i_factor: avg(|b| b.i_factor),
            lower: avg(|b| b.lower),
            upper: avg(|b| b.upper),
            predicted_gap: avg(|b| b.predicted_gap),
        }
    });

    Ok(MonteCarloSummary {
        truth,
        n_reps: sc.n_reps,
        total_probability: summarize("total_probability", &tp, truth),
        total_odds: summarize("total_odds", &to, truth),
        debiased: summarize("debiased", &deb, truth),
        non_interior_count,
        error_count,
        mean_bias_bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_bin_scenario(exact: bool) -> Scenario {
        Scenario {
            shift: Shift::PriorShift { q: 0.3 },
            score_model: ScoreModel::Discrete {
                f_a: vec![0.8, 0.2],
                f_ac: vec![0.2, 0.8],
            },
            p0: 0.5,
            n_train: 2000,
            n_test: 2000,
            n_reps: 20,
            seed: 7,
            exact_model: exact,
            exact_target: exact,
        }
    }

    #[test]
    fn sample_extreme_priors() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let model = ScoreModel::Gaussian {
            mu_a: 1.0,
            mu_ac: -1.0,
            sigma: 1.0,
        };
        let all_a = sample_labeled(&model, 1.0, 500, &mut rng).unwrap();
        assert!(all_a.records().iter().all(|r| r.label == Some(Class::A)));
        let all_ac = sample_labeled(&model, 0.0, 500, &mut rng).unwrap();
        assert!(all_ac.records().iter().all(|r| r.label == Some(Class::Ac)));
    }

    #[test]
    fn sample_class_a_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let model = ScoreModel::Gaussian {
            mu_a: 1.0,
            mu_ac: -1.0,
            sigma: 1.0,
        };
        let d = sample_labeled(&model, 0.5, 100_000, &mut rng).unwrap();
        let a: Vec<f64> = d
            .records()
            .iter()
            .filter(|r| r.label == Some(Class::A))
            .map(|r| r.score)
            .collect();
        let mean = a.iter().sum::<f64>() / a.len() as f64;
        assert!((mean - 1.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn analytic_two_bin_has_zero_variance() {
        let s = run_monte_carlo(&two_bin_scenario(true), &Binning::EqualFrequency(20), 0.5).unwrap();
        assert_abs_diff_eq!(s.total_odds.mean, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(s.total_probability.mean, 0.428, epsilon = 1e-12);
        assert_abs_diff_eq!(s.debiased.mean, 0.3, epsilon = 1e-12);
        for m in s.methods() {
            assert!(m.std < 1e-12, "{m:?}");
        }
        assert_eq!(s.non_interior_count, 0);
    }

    #[test]
    fn no_shift_is_unbiased() {
        let mut sc = two_bin_scenario(false);
        sc.shift = Shift::PriorShift { q: 0.5 };
        sc.n_train = 20_000;
        sc.n_test = 20_000;
        let s = run_monte_carlo(&sc, &Binning::EqualFrequency(20), 0.5).unwrap();
        for m in s.methods() {
            assert!((m.mean - 0.5).abs() < 0.01, "{m:?}");
            assert!(m.mae < 0.02, "{m:?}");
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let sc = two_bin_scenario(false);
        let a = run_monte_carlo(&sc, &Binning::EqualFrequency(20), 0.5).unwrap();
        let b = run_monte_carlo(&sc, &Binning::EqualFrequency(20), 0.5).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let mut other = sc.clone();
        other.seed = 8;
        let c = run_monte_carlo(&other, &Binning::EqualFrequency(20), 0.5).unwrap();
        assert_ne!(a.total_odds.mean, c.total_odds.mean);
    }

    #[test]
    fn zero_reps_rejected() {
        let mut sc = two_bin_scenario(false);
        sc.n_reps = 0;
        assert!(run_monte_carlo(&sc, &Binning::EqualFrequency(20), 0.5).is_err());
    }

    #[test]
    fn odds_preserving_examples() {
        let m = BinnedConditionals::from_densities(vec![0.8, 0.2], vec![0.2, 0.8], 0.5).unwrap();
        let mix = model::mixture_target(&m, 0.3).unwrap();
        let (_, est) = odds_preserving_target(&m, &mix).unwrap();
        assert_abs_diff_eq!(est.p1, 0.3, epsilon = 1e-12);

        // (0.5, 0.5) is the q = 0.5 mixture of this model; scipy brentq gives 0.5
        let half = TargetDistribution::new(vec![0.5, 0.5], None).unwrap();
        let (_, est) = odds_preserving_target(&m, &half).unwrap();
        assert_abs_diff_eq!(est.p1, 0.5, epsilon = 1e-12);

        let low = TargetDistribution::new(vec![0.95, 0.05], None).unwrap();
        let (_, est) = odds_preserving_target(&m, &low).unwrap();
        assert_eq!(est.status, SolutionCase::BoundaryOne);
    }

    #[test]
    fn odds_preserving_non_mixture_target() {
        // three bins, target (0.2, 0.5, 0.3) is not q f_A + (1-q) f_Ac for any q;
        // scipy brentq on the total-odds equation: 0.45 (0.2/0.56 + 0.5 + 0.3/2.1 = 1)
        let m = BinnedConditionals::from_densities(vec![0.5, 0.3, 0.2], vec![0.1, 0.3, 0.6], 0.4)
            .unwrap();
        let t = TargetDistribution::new(vec![0.2, 0.5, 0.3], None).unwrap();
        let (_, est) = odds_preserving_target(&m, &t).unwrap();
        assert_eq!(est.status, SolutionCase::Interior);
        assert_abs_diff_eq!(est.p1, ODDS_PRESERVING_ORACLE, epsilon = 1e-9);

        let sc = Scenario {
            shift: Shift::OddsPreservingShift {
                target_weights: vec![0.2, 0.5, 0.3],
            },
            score_model: ScoreModel::Discrete {
                f_a: vec![0.5, 0.3, 0.2],
                f_ac: vec![0.1, 0.3, 0.6],
            },
            p0: 0.4,
            n_train: 5000,
            n_test: 5000,
            n_reps: 50,
            seed: 3,
            exact_model: false,
            exact_target: false,
        };
        let s = run_monte_carlo(&sc, &Binning::EqualFrequency(20), 0.5).unwrap();
        assert_abs_diff_eq!(s.truth, ODDS_PRESERVING_ORACLE, epsilon = 1e-9);
        assert!((s.total_odds.mean - s.truth).abs() < 0.01, "{:?}", s.total_odds);
    }

    const ODDS_PRESERVING_ORACLE: f64 = 0.45;

    #[test]
    fn scenario_json_shape() {
        let json = r#"{
            "kind": "prior_shift", "q": 0.2,
            "score_model": {"gaussian": {"mu_a": 1, "mu_ac": -1, "sigma": 1}},
            "p0": 0.5, "n_train": 100, "n_test": 100, "n_reps": 3, "seed": 1
        }"#;
        let sc: Scenario = serde_json::from_str(json).unwrap();
        assert_eq!(sc.shift, Shift::PriorShift { q: 0.2 });
        assert!(!sc.exact_model && !sc.exact_target);
        let back: Scenario = serde_json::from_str(&serde_json::to_string(&sc).unwrap()).unwrap();
        assert_eq!(back, sc);
    }

    #[test]
    fn methods_csv_layout() {
        let s = run_monte_carlo(&two_bin_scenario(true), &Binning::EqualFrequency(20), 0.5).unwrap();
        let mut buf = Vec::new();
        s.write_methods_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "method,mean,std,mae,n_used");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("total_probability,"));
    }
}
