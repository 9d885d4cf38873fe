//! Training-side probabilistic model on a finite score partition.
//!
//! Scores are one-dimensional. A [`BinEdges`] partition turns them into `K`
//! cells; [`fit_binned`] estimates the class-conditional cell probabilities
//! `f_A`, `f_Ac` and the training prior `p0`. Everything downstream works with
//! the likelihood ratio `lambda_k = f_Ac[k] / f_A[k]`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for "sums to one" checks on probability vectors.
pub const SUM_TOL: f64 = 1e-12;

/// Class tag of a labeled record: the event `A` or its complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Class {
    A,
    Ac,
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Class::A => f.write_str("A"),
            Class::Ac => f.write_str("Ac"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub score: f64,
    pub label: Option<Class>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredDataset {
    pub name: String,
    records: Vec<Record>,
}

impl ScoredDataset {
    pub fn new(name: impl Into<String>, records: Vec<Record>) -> Result<Self> {
        if let Some(r) = records.iter().find(|r| !r.score.is_finite()) {
            return Err(Error::invalid(format!("non-finite score {}", r.score)));
        }
        Ok(Self {
            name: name.into(),
            records,
        })
    }

    /// Unlabeled dataset from raw scores.
    pub fn from_scores(name: impl Into<String>, scores: &[f64]) -> Result<Self> {
        let records = scores
            .iter()
            .map(|&score| Record { score, label: None })
            .collect();
        Self::new(name, records)
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn scores(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.score)
    }
}

/// Strictly increasing cut points `e_0 < e_1 < ... < e_K` defining `K >= 2`
/// contiguous bins. Bin `k` is `[e_k, e_{k+1})`; scores outside the range are
/// clamped into the first or last bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct BinEdges {
    edges: Vec<f64>,
}

impl BinEdges {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 3 {
            return Err(Error::invalid(format!(
                "need at least 3 edges (2 bins), got {}",
                edges.len()
            )));
        }
        if edges.iter().any(|e| !e.is_finite()) {
            return Err(Error::invalid("bin edges must be finite"));
        }
        if edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("bin edges must be strictly increasing"));
        }
        Ok(Self { edges })
    }

    /// Equal-frequency edges at the empirical quantiles of `scores`.
    ///
    /// Tied quantiles are merged, so the result can have fewer than `bins`
    /// bins; fewer than two distinct cells is an error.
    pub fn equal_frequency(scores: &[f64], bins: usize) -> Result<Self> {
        if bins < 2 {
            return Err(Error::invalid("bin count must be at least 2"));
        }
        if scores.is_empty() {
            return Err(Error::EmptyDataset("binning sample".into()));
        }
        let mut sorted = scores.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let mut edges = Vec::with_capacity(bins + 1);
        edges.push(sorted[0]);
        for k in 1..bins {
            // first index of the k-th block of n/K points
            let idx = (k * n) / bins;
            let cut = sorted[idx.min(n - 1)];
            if cut > *edges.last().unwrap() {
                edges.push(cut);
            }
        }
        let top = sorted[n - 1];
        if top > *edges.last().unwrap() {
            edges.push(top);
        } else if edges.len() >= 2 {
            // last cut coincides with the maximum; widen the final bin
            let last = edges.len() - 1;
            let width = edges[last] - edges[last - 1];
            edges.push(edges[last] + width.max(1.0));
        }
        Self::new(edges)
    }

    /// `bins` equal-width bins on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins < 2 || !(lo < hi) {
            return Err(Error::invalid("uniform binning needs lo < hi and >= 2 bins"));
        }
        let step = (hi - lo) / bins as f64;
        let mut edges: Vec<f64> = (0..bins).map(|k| lo + step * k as f64).collect();
        edges.push(hi);
        Self::new(edges)
    }

    pub fn bins(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.edges
    }

    /// Bin index of `score`, clamping out-of-range values to the end bins.
    pub fn locate(&self, score: f64) -> usize {
        let k = self.bins();
        let interior = &self.edges[1..k];
        interior.partition_point(|&e| e <= score)
    }

    /// Representative score inside bin `k` (its midpoint).
    pub fn midpoint(&self, k: usize) -> f64 {
        0.5 * (self.edges[k] + self.edges[k + 1])
    }
}

impl TryFrom<Vec<f64>> for BinEdges {
    type Error = Error;

    fn try_from(edges: Vec<f64>) -> Result<Self> {
        Self::new(edges)
    }
}

impl From<BinEdges> for Vec<f64> {
    fn from(edges: BinEdges) -> Self {
        edges.edges
    }
}

/// Class-conditional bin probabilities and training prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedConditionals {
    edges: BinEdges,
    f_a: Vec<f64>,
    f_ac: Vec<f64>,
    p0: f64,
}

impl BinnedConditionals {
    pub fn new(edges: BinEdges, f_a: Vec<f64>, f_ac: Vec<f64>, p0: f64) -> Result<Self> {
        let k = edges.bins();
        for (v, name) in [(&f_a, "f_A"), (&f_ac, "f_Ac")] {
            if v.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    found: v.len(),
                });
            }
            if v.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
                return Err(Error::invalid(format!("{name} must be strictly positive")));
            }
            let total: f64 = v.iter().sum();
            if (total - 1.0).abs() > SUM_TOL {
                return Err(Error::invalid(format!("{name} sums to {total}, not 1")));
            }
        }
        if !(p0 > 0.0 && p0 < 1.0) {
            return Err(Error::invalid(format!("training prior {p0} outside (0,1)")));
        }
        Ok(Self {
            edges,
            f_a,
            f_ac,
            p0,
        })
    }

    /// Model on integer edges `0, 1, ..., K`, for densities given directly.
    pub fn from_densities(f_a: Vec<f64>, f_ac: Vec<f64>, p0: f64) -> Result<Self> {
        let edges = BinEdges::new((0..=f_a.len()).map(|k| k as f64).collect())?;
        Self::new(edges, f_a, f_ac, p0)
    }

    pub fn edges(&self) -> &BinEdges {
        &self.edges
    }

    pub fn f_a(&self) -> &[f64] {
        &self.f_a
    }

    pub fn f_ac(&self) -> &[f64] {
        &self.f_ac
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn bins(&self) -> usize {
        self.f_a.len()
    }

    /// Training marginal `p0 f_A + (1 - p0) f_Ac` over the bins.
    pub fn marginal(&self) -> Vec<f64> {
        self.f_a
            .iter()
            .zip(&self.f_ac)
            .map(|(a, c)| self.p0 * a + (1.0 - self.p0) * c)
            .collect()
    }
}

/// Bin probabilities of the target population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetDistribution {
    weights: Vec<f64>,
    n_effective: Option<usize>,
}

impl TargetDistribution {
    pub fn new(weights: Vec<f64>, n_effective: Option<usize>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("target weights are empty"));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid("target weights must be nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::invalid(format!("target weights sum to {total}, not 1")));
        }
        Ok(Self {
            weights,
            n_effective,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn n_effective(&self) -> Option<usize> {
        self.n_effective
    }

    pub fn bins(&self) -> usize {
        self.weights.len()
    }

    pub(crate) fn check_bins(&self, model: &BinnedConditionals) -> Result<()> {
        if self.bins() != model.bins() {
            return Err(Error::DimensionMismatch {
                expected: model.bins(),
                found: self.bins(),
            });
        }
        Ok(())
    }
}

/// Estimates class-conditional bin probabilities from labeled scores, with
/// additive smoothing of `pseudo_count` per bin.
pub fn fit_binned(
    train: &ScoredDataset,
    edges: &BinEdges,
    pseudo_count: f64,
) -> Result<BinnedConditionals> {
    if !(pseudo_count >= 0.0) || !pseudo_count.is_finite() {
        return Err(Error::invalid(format!("pseudo count {pseudo_count} must be >= 0")));
    }
    let k = edges.bins();
    let mut counts_a = vec![0usize; k];
    let mut counts_ac = vec![0usize; k];
    for r in train.records() {
        let bin = edges.locate(r.score);
        match r.label {
            Some(Class::A) => counts_a[bin] += 1,
            Some(Class::Ac) => counts_ac[bin] += 1,
            None => {
                return Err(Error::invalid(format!(
                    "training set `{}` has an unlabeled record",
                    train.name
                )))
            }
        }
    }
    let n_a: usize = counts_a.iter().sum();
    let n_ac: usize = counts_ac.iter().sum();
    if n_a == 0 {
        return Err(Error::EmptyClass(Class::A));
    }
    if n_ac == 0 {
        return Err(Error::EmptyClass(Class::Ac));
    }
    if pseudo_count == 0.0 {
        for bin in 0..k {
            if counts_a[bin] == 0 {
                return Err(Error::ZeroBin { bin, class: Class::A });
            }
            if counts_ac[bin] == 0 {
                return Err(Error::ZeroBin { bin, class: Class::Ac });
            }
        }
    }
    let smooth = |counts: &[usize], total: usize| -> Vec<f64> {
        let denom = total as f64 + k as f64 * pseudo_count;
        counts
            .iter()
            .map(|&c| (c as f64 + pseudo_count) / denom)
            .collect()
    };
    let p0 = n_a as f64 / (n_a + n_ac) as f64;
    BinnedConditionals::new(
        edges.clone(),
        smooth(&counts_a, n_a),
        smooth(&counts_ac, n_ac),
        p0,
    )
}

/// Likelihood ratio `f_Ac[k] / f_A[k]` per bin.
pub fn lambda_of(model: &BinnedConditionals) -> Vec<f64> {
    model
        .f_a()
        .iter()
        .zip(model.f_ac())
        .map(|(a, c)| c / a)
        .collect()
}

/// Training posterior `P0[A | bin k] = p0 / (p0 + (1 - p0) lambda_k)`.
pub fn posterior0(model: &BinnedConditionals) -> Vec<f64> {
    let p0 = model.p0();
    lambda_of(model)
        .into_iter()
        .map(|l| p0 / (p0 + (1.0 - p0) * l))
        .collect()
}

/// Empirical bin distribution of the (unlabeled) target scores.
pub fn target_weights(test: &ScoredDataset, edges: &BinEdges) -> Result<TargetDistribution> {
    if test.is_empty() {
        return Err(Error::EmptyDataset(test.name.clone()));
    }
    let mut counts = vec![0usize; edges.bins()];
    for s in test.scores() {
        counts[edges.locate(s)] += 1;
    }
    weights_from_counts(&counts)
}

/// Normalises bin counts into a target distribution.
pub fn weights_from_counts(counts: &[usize]) -> Result<TargetDistribution> {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return Err(Error::EmptyDataset("bin counts".into()));
    }
    let weights = counts.iter().map(|&c| c as f64 / n as f64).collect();
    TargetDistribution::new(weights, Some(n))
}

/// Mixture `q f_A + (1 - q) f_Ac`: the target under pure prior shift to `q`.
pub fn mixture_target(model: &BinnedConditionals, q: f64) -> Result<TargetDistribution> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::invalid(format!("mixture weight {q} outside [0,1]")));
    }
    let weights = model
        .f_a()
        .iter()
        .zip(model.f_ac())
        .map(|(a, c)| q * a + (1.0 - q) * c)
        .collect();
    TargetDistribution::new(weights, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn two_bin() -> BinnedConditionals {
        BinnedConditionals::from_densities(vec![0.8, 0.2], vec![0.2, 0.8], 0.5).unwrap()
    }

    fn labeled(groups: &[(f64, Class, usize)]) -> ScoredDataset {
        let mut records = Vec::new();
        for &(score, class, n) in groups {
            records.extend((0..n).map(|_| Record {
                score,
                label: Some(class),
            }));
        }
        ScoredDataset::new("train", records).unwrap()
    }

    fn integer_edges(k: usize) -> BinEdges {
        BinEdges::new((0..=k).map(|x| x as f64).collect()).unwrap()
    }

    #[test]
    fn fit_counts_without_smoothing() {
        let train = labeled(&[
            (0.5, Class::A, 10),
            (1.5, Class::A, 90),
            (0.5, Class::Ac, 90),
            (1.5, Class::Ac, 10),
        ]);
        let m = fit_binned(&train, &integer_edges(2), 0.0).unwrap();
        assert_abs_diff_eq!(m.f_a()[0], 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(m.f_a()[1], 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(m.f_ac()[0], 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(m.f_ac()[1], 0.1, epsilon = 1e-15);
        assert_eq!(m.p0(), 0.5);
    }

    #[test]
    fn fit_with_half_pseudo_count() {
        let train = labeled(&[
            (0.5, Class::A, 10),
            (1.5, Class::A, 90),
            (0.5, Class::Ac, 90),
            (1.5, Class::Ac, 10),
        ]);
        let m = fit_binned(&train, &integer_edges(2), 0.5).unwrap();
        assert_abs_diff_eq!(m.f_a()[0], 10.5 / 101.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.f_a()[1], 90.5 / 101.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.f_ac()[0], 90.5 / 101.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.f_ac()[1], 10.5 / 101.0, epsilon = 1e-15);
    }

    #[test]
    fn fit_zero_bin_and_empty_class() {
        let train = labeled(&[(1.5, Class::A, 10), (0.5, Class::Ac, 5), (1.5, Class::Ac, 5)]);
        assert!(matches!(
            fit_binned(&train, &integer_edges(2), 0.0),
            Err(Error::ZeroBin { bin: 0, class: Class::A })
        ));
        assert!(fit_binned(&train, &integer_edges(2), 0.5).is_ok());

        let only_a = labeled(&[(0.5, Class::A, 3), (1.5, Class::A, 3)]);
        assert!(matches!(
            fit_binned(&only_a, &integer_edges(2), 0.5),
            Err(Error::EmptyClass(Class::Ac))
        ));
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_of(&two_bin()), vec![0.25, 4.0]);
        let m = BinnedConditionals::from_densities(vec![0.5, 0.3, 0.2], vec![0.1, 0.3, 0.6], 0.4)
            .unwrap();
        let l = lambda_of(&m);
        assert_abs_diff_eq!(l[0], 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(l[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(l[2], 3.0, epsilon = 1e-15);
        let same = BinnedConditionals::from_densities(vec![0.3, 0.7], vec![0.3, 0.7], 0.3).unwrap();
        assert_eq!(lambda_of(&same), vec![1.0, 1.0]);
    }

    #[test]
    fn posterior_examples() {
        let post = posterior0(&two_bin());
        assert_abs_diff_eq!(post[0], 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(post[1], 0.2, epsilon = 1e-15);
        let same = BinnedConditionals::from_densities(vec![0.3, 0.7], vec![0.3, 0.7], 0.3).unwrap();
        for p in posterior0(&same) {
            assert_abs_diff_eq!(p, 0.3, epsilon = 1e-15);
        }
    }

    #[test]
    fn target_weight_counting() {
        let edges = integer_edges(2);
        let mut scores = vec![0.5; 38];
        scores.extend(vec![1.5; 62]);
        let t = target_weights(&ScoredDataset::from_scores("t", &scores).unwrap(), &edges).unwrap();
        assert_abs_diff_eq!(t.weights()[0], 0.38, epsilon = 1e-15);
        assert_abs_diff_eq!(t.weights()[1], 0.62, epsilon = 1e-15);
        assert_eq!(t.n_effective(), Some(100));

        let point = ScoredDataset::from_scores("t", &[0.1, 0.2, -7.0]).unwrap();
        assert_eq!(target_weights(&point, &edges).unwrap().weights(), &[1.0, 0.0]);

        let empty = ScoredDataset::from_scores("empty", &[]).unwrap();
        assert!(matches!(target_weights(&empty, &edges), Err(Error::EmptyDataset(_))));
    }

    #[test]
    fn mixture_examples() {
        let m = two_bin();
        let t = mixture_target(&m, 0.3).unwrap();
        assert_abs_diff_eq!(t.weights()[0], 0.38, epsilon = 1e-15);
        assert_abs_diff_eq!(t.weights()[1], 0.62, epsilon = 1e-15);
        assert_eq!(mixture_target(&m, 1.0).unwrap().weights(), m.f_a());
        assert_eq!(mixture_target(&m, m.p0()).unwrap().weights(), m.marginal().as_slice());
        assert!(mixture_target(&m, 1.5).is_err());
    }

    #[test]
    fn edges_locate_and_clamp() {
        let e = BinEdges::new(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(e.locate(-5.0), 0);
        assert_eq!(e.locate(0.0), 0);
        assert_eq!(e.locate(1.0), 1);
        assert_eq!(e.locate(2.999), 2);
        assert_eq!(e.locate(3.0), 2);
        assert_eq!(e.locate(99.0), 2);
        assert!(BinEdges::new(vec![0.0, 1.0]).is_err());
        assert!(BinEdges::new(vec![0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn edges_json_roundtrip() {
        let e: BinEdges = serde_json::from_str("[0, 0.5, 1.25]").unwrap();
        assert_eq!(e.bins(), 2);
        assert_eq!(serde_json::to_string(&e).unwrap(), "[0.0,0.5,1.25]");
        assert!(serde_json::from_str::<BinEdges>("[1, 0, 2]").is_err());
    }

    #[test]
    fn equal_frequency_balances_counts() {
        let scores: Vec<f64> = (0..1000).map(|i| (i as f64).sqrt()).collect();
        let e = BinEdges::equal_frequency(&scores, 20).unwrap();
        assert_eq!(e.bins(), 20);
        let mut counts = vec![0; 20];
        for &s in &scores {
            counts[e.locate(s)] += 1;
        }
        assert!(counts.iter().all(|&c| c == 50), "{counts:?}");

        // heavy ties collapse bins
        let tied = vec![1.0; 50].into_iter().chain(vec![2.0; 50]).collect::<Vec<_>>();
        let e = BinEdges::equal_frequency(&tied, 10).unwrap();
        assert_eq!(e.bins(), 2);
        assert!(BinEdges::equal_frequency(&[3.0; 10], 5).is_err());
    }

    fn prob_vec(k: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.01f64..1.0, k).prop_map(|v| {
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect()
        })
    }

    fn model_strategy() -> impl Strategy<Value = BinnedConditionals> {
        (2usize..30).prop_flat_map(|k| {
            (prob_vec(k), prob_vec(k), 0.01f64..0.99).prop_map(|(a, c, p0)| {
                BinnedConditionals::from_densities(a, c, p0).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn odds_identity_per_bin(m in model_strategy()) {
            let p0 = m.p0();
            for (post, lam) in posterior0(&m).iter().zip(lambda_of(&m)) {
                let implied = (1.0 - post) / post * p0 / (1.0 - p0);
                prop_assert!((implied - lam).abs() <= 1e-12 * lam.max(1.0));
            }
        }

        #[test]
        fn training_marginal_is_probability(m in model_strategy()) {
            let total: f64 = m.marginal().iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn mixture_is_affine(m in model_strategy(), q in 0.0f64..=1.0) {
            let wq = mixture_target(&m, q).unwrap();
            let w1 = mixture_target(&m, 1.0).unwrap();
            let w0 = mixture_target(&m, 0.0).unwrap();
            for k in 0..m.bins() {
                let affine = q * w1.weights()[k] + (1.0 - q) * w0.weights()[k];
                prop_assert!((wq.weights()[k] - affine).abs() <= 1e-15);
            }
        }

        #[test]
        fn smoothing_keeps_densities_positive(
            counts in prop::collection::vec((0usize..5, 0usize..5), 2..12),
            pseudo in 0.01f64..2.0,
        ) {
            let mut records = Vec::new();
            for (k, &(na, nc)) in counts.iter().enumerate() {
                let s = k as f64 + 0.5;
                records.extend((0..na).map(|_| Record { score: s, label: Some(Class::A) }));
                records.extend((0..nc).map(|_| Record { score: s, label: Some(Class::Ac) }));
            }
            records.push(Record { score: 0.5, label: Some(Class::A) });
            records.push(Record { score: 0.5, label: Some(Class::Ac) });
            let train = ScoredDataset::new("p", records).unwrap();
            let m = fit_binned(&train, &integer_edges(counts.len()), pseudo).unwrap();
            prop_assert!(m.f_a().iter().chain(m.f_ac()).all(|&x| x > 0.0));
        }
    }
}
