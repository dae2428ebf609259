//! Monte-Carlo experiments: statistic samples over replicas, survival
//! curves, and total-variation lower bounds between two seeds.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, GrowthError, Result};
use crate::growth::GrowthState;
use crate::limit::{
    moment_seed_vertex, sample_joint_limit_degrees, sample_subset_sum_limit, LimitLawSpec,
};
use crate::rng::{family, stream};
use crate::special::ln_gamma;
use crate::tail::{tail_asymptotic_max, MaxTailQuery};
use crate::tree::{parse_tree_spec, Tree};
use crate::umax::{umax_dp, UMaxQuery};

/// Number of pooled-quantile thresholds in the automatic grid.
pub const AUTO_GRID_SIZE: usize = 64;
pub const DEFAULT_BOOTSTRAP_ROUNDS: usize = 1000;

/// Scalar statistic of a grown tree, divided by `sqrt(n)`. Vertex labels
/// refer to the canonical seed labeling (degrees non-increasing, 0-based).
#[derive(Debug, Clone, PartialEq)]
pub enum Statistic {
    MaxDegreeScaled,
    VertexDegreeScaled(usize),
    SubsetSumScaled(Vec<usize>),
    /// A pattern without an embedding scores 0.
    UMaxScaled { pattern: Tree, label: String },
}

impl Statistic {
    /// Parses `max_degree_scaled`, `vertex_degree_scaled:i`,
    /// `subset_sum_scaled:i,j,...` (1-based) or `umax_scaled:<tree spec>`.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with(text, |spec| Ok(parse_tree_spec(spec)?))
    }

    /// As [`Statistic::parse`] with a custom resolver for pattern trees.
    pub fn parse_with(text: &str, resolve: impl Fn(&str) -> Result<Tree>) -> Result<Self> {
        let text = text.trim();
        let bad = || Error::Config(format!("unknown statistic `{text}`"));
        let label = |s: &str| -> Result<usize> {
            match s.trim().parse::<usize>() {
                Ok(i) if i >= 1 => Ok(i - 1),
                _ => Err(Error::Config(format!("bad vertex label `{s}` in `{text}`"))),
            }
        };
        match text.split_once(':') {
            None if text == "max_degree_scaled" => Ok(Statistic::MaxDegreeScaled),
            Some(("vertex_degree_scaled", i)) => Ok(Statistic::VertexDegreeScaled(label(i)?)),
            Some(("subset_sum_scaled", list)) => {
                let mut set = list.split(',').map(label).collect::<Result<Vec<_>>>()?;
                set.sort_unstable();
                set.dedup();
                Ok(Statistic::SubsetSumScaled(set))
            }
            Some(("umax_scaled", spec)) => Ok(Statistic::UMaxScaled {
                pattern: resolve(spec.trim())?,
                label: spec.trim().to_string(),
            }),
            _ => Err(bad()),
        }
    }

    /// Checks vertex references against a seed.
    pub fn validate_for(&self, seed: &Tree) -> Result<()> {
        let n = seed.vertex_count();
        let check = |i: usize| {
            if i < n {
                Ok(())
            } else {
                Err(Error::Config(format!("statistic refers to vertex {} of a {n}-vertex seed", i + 1)))
            }
        };
        match self {
            Statistic::VertexDegreeScaled(i) => check(*i),
            Statistic::SubsetSumScaled(set) => {
                if set.is_empty() {
                    return Err(Error::Config("empty vertex subset".into()));
                }
                set.iter().try_for_each(|&i| check(i))
            }
            _ => Ok(()),
        }
    }

    /// Value on a state grown from a canonically labeled seed.
    pub fn evaluate(&self, state: &GrowthState) -> f64 {
        let scale = (state.size() as f64).sqrt();
        let raw = match self {
            Statistic::MaxDegreeScaled => f64::from(state.max_degree()),
            Statistic::VertexDegreeScaled(i) => f64::from(state.degree(*i)),
            Statistic::SubsetSumScaled(set) => set.iter().map(|&i| f64::from(state.degree(i))).sum(),
            Statistic::UMaxScaled { pattern, .. } => {
                let host = state.to_tree();
                umax_dp(UMaxQuery::new(pattern, &host)).value().unwrap_or(0) as f64
            }
        };
        raw / scale
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statistic::MaxDegreeScaled => f.write_str("max_degree_scaled"),
            Statistic::VertexDegreeScaled(i) => write!(f, "vertex_degree_scaled:{}", i + 1),
            Statistic::SubsetSumScaled(set) => {
                let labels: Vec<String> = set.iter().map(|i| (i + 1).to_string()).collect();
                write!(f, "subset_sum_scaled:{}", labels.join(","))
            }
            Statistic::UMaxScaled { label, .. } => write!(f, "umax_scaled:{label}"),
        }
    }
}

/// Threshold grid for survival differences.
#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdGrid {
    /// [`AUTO_GRID_SIZE`] quantiles of the pooled samples.
    Auto,
    Values(Vec<f64>),
}

/// Provenance of a statistic sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub seed: String,
    pub n: usize,
    pub replicas: usize,
    pub master_seed: u64,
    pub stream_family: u64,
}

/// Statistic values in replica-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct StatisticSample {
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

impl StatisticSample {
    /// Fraction of values strictly above `t`.
    pub fn survival(&self, t: f64) -> f64 {
        survival(&self.values, t)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `(mean of x^r, standard error)`.
    pub fn raw_moment(&self, r: f64) -> (f64, f64) {
        mean_and_se(self.values.iter().map(|x| x.powf(r)))
    }
}

fn survival(values: &[f64], t: f64) -> f64 {
    values.iter().filter(|&&x| x > t).count() as f64 / values.len() as f64
}

fn mean_and_se(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = xs.collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// Grows `replicas` independent copies of `PA(n, seed)` in parallel and
/// evaluates `statistic` on each. Replica `i` uses stream `(family, i)`, so
/// the result does not depend on the thread count.
pub fn sample_statistic(
    seed: &Tree,
    n: usize,
    statistic: &Statistic,
    replicas: usize,
    master_seed: u64,
    stream_family: u64,
) -> Result<StatisticSample> {
    let canonical = seed.canonical_relabel();
    statistic.validate_for(&canonical)?;
    // surface growth errors once, before the parallel section
    let probe = GrowthState::new(&canonical)?;
    if n < probe.size() {
        return Err(GrowthError::TargetBelowCurrent {
            target: n,
            current: probe.size(),
        }
        .into());
    }
    let values: Vec<f64> = (0..replicas as u64)
        .into_par_iter()
        .map_init(
            || probe.clone(),
            |state, replica| {
                state.reset();
                let mut rng = stream(master_seed, stream_family, replica);
                state.grow_to(n, &mut rng).expect("target checked above");
                statistic.evaluate(state)
            },
        )
        .collect();
    Ok(StatisticSample {
        values,
        provenance: Provenance {
            seed: canonical.to_edge_list().trim_end().replace('\n', ";"),
            n,
            replicas,
            master_seed,
            stream_family,
        },
    })
}

/// Survival function of the statistic sample on a grid of thresholds.
pub fn survival_curve(sample: &StatisticSample, grid: &[f64]) -> Vec<(f64, f64)> {
    grid.iter().map(|&t| (t, sample.survival(t))).collect()
}

/// Full description of a two-seed lower-bound experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub seed_trees: Vec<Tree>,
    pub n: usize,
    pub replicas: usize,
    pub statistic: Statistic,
    pub threshold_grid: ThresholdGrid,
    pub master_seed: u64,
    pub bootstrap_rounds: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.seed_trees.len() != 2 {
            return Err(Error::Config(format!("need exactly two seed trees, got {}", self.seed_trees.len())));
        }
        if self.replicas < 4 {
            return Err(Error::Config(format!("need at least 4 replicas per seed, got {}", self.replicas)));
        }
        let largest = self.seed_trees.iter().map(Tree::vertex_count).max().unwrap_or(0);
        if self.n < largest {
            return Err(Error::Config(format!("n = {} is below the seed size {largest}", self.n)));
        }
        if self.bootstrap_rounds < 2 {
            return Err(Error::Config("need at least 2 bootstrap rounds".into()));
        }
        if let ThresholdGrid::Values(v) = &self.threshold_grid {
            if v.is_empty() || v.iter().any(|t| !t.is_finite()) {
                return Err(Error::Config("threshold grid must be a non-empty list of finite values".into()));
            }
        }
        Ok(())
    }
}

/// Survival functions of both seeds at one threshold, on the full samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdRow {
    pub t: f64,
    pub survival_first: f64,
    pub survival_second: f64,
}

impl ThresholdRow {
    pub fn difference(&self) -> f64 {
        self.survival_first - self.survival_second
    }
}

/// Which survival function is taken as the larger one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ordering {
    FirstAbove,
    SecondAbove,
}

impl Ordering {
    fn sign(self) -> f64 {
        match self {
            Ordering::FirstAbove => 1.0,
            Ordering::SecondAbove => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TvLowerBoundResult {
    pub best_t: f64,
    pub ordering: Ordering,
    /// Signed survival difference on the evaluation halves, in `[-1, 1]`.
    pub estimate: f64,
    pub clamped: f64,
    pub bootstrap_se: f64,
    pub bootstrap_ci: (f64, f64),
    /// Empirical TV of the evaluation halves binned at the grid thresholds;
    /// never below `estimate`.
    pub binned_tv: f64,
    pub table: Vec<ThresholdRow>,
    pub diagnostics: Vec<String>,
    pub first: StatisticSample,
    pub second: StatisticSample,
}

/// Lower bound on the total variation between `PA(n, S)` and `PA(n, T)`
/// through one statistic.
///
/// Even-indexed replicas choose the threshold and the ordering that
/// maximize the survival difference; the odd-indexed replicas then
/// evaluate that single difference, so the selection step does not bias
/// the estimate upward. The bootstrap resamples the evaluation halves.
pub fn estimate_tv_lower_bound(cfg: &ExperimentConfig) -> Result<TvLowerBoundResult> {
    cfg.validate()?;
    let first = sample_statistic(
        &cfg.seed_trees[0],
        cfg.n,
        &cfg.statistic,
        cfg.replicas,
        cfg.master_seed,
        family::GROWTH_FIRST,
    )?;
    let second = sample_statistic(
        &cfg.seed_trees[1],
        cfg.n,
        &cfg.statistic,
        cfg.replicas,
        cfg.master_seed,
        family::GROWTH_SECOND,
    )?;
    let mut rng = stream(cfg.master_seed, family::BOOTSTRAP, 0);
    Ok(tv_lower_bound_from_samples(first, second, &cfg.threshold_grid, cfg.bootstrap_rounds, &mut rng))
}

/// The estimator of [`estimate_tv_lower_bound`] on given samples.
pub fn tv_lower_bound_from_samples<R: Rng + ?Sized>(
    first: StatisticSample,
    second: StatisticSample,
    grid: &ThresholdGrid,
    bootstrap_rounds: usize,
    rng: &mut R,
) -> TvLowerBoundResult {
    let mut diagnostics = Vec::new();
    let thresholds = match grid {
        ThresholdGrid::Values(v) => {
            let mut v = v.clone();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        }
        ThresholdGrid::Auto => pooled_quantiles(&first.values, &second.values, AUTO_GRID_SIZE),
    };
    let table: Vec<ThresholdRow> = thresholds
        .iter()
        .map(|&t| ThresholdRow {
            t,
            survival_first: first.survival(t),
            survival_second: second.survival(t),
        })
        .collect();

    let pooled_min = first.values.iter().chain(&second.values).copied().fold(f64::INFINITY, f64::min);
    let pooled_max = first.values.iter().chain(&second.values).copied().fold(f64::NEG_INFINITY, f64::max);
    if pooled_min == pooled_max {
        diagnostics.push(format!("degenerate samples: every value equals {pooled_min}"));
        return TvLowerBoundResult {
            best_t: thresholds.first().copied().unwrap_or(pooled_min),
            ordering: Ordering::FirstAbove,
            estimate: 0.0,
            clamped: 0.0,
            bootstrap_se: 0.0,
            bootstrap_ci: (0.0, 0.0),
            binned_tv: 0.0,
            table,
            diagnostics,
            first,
            second,
        };
    }

    let half = |v: &[f64], parity: usize| -> Vec<f64> { v.iter().skip(parity).step_by(2).copied().collect() };
    let (select_a, eval_a) = (half(&first.values, 0), half(&first.values, 1));
    let (select_b, eval_b) = (half(&second.values, 0), half(&second.values, 1));

    let mut best = (f64::NEG_INFINITY, thresholds[0], Ordering::FirstAbove);
    for &t in &thresholds {
        let d = survival(&select_a, t) - survival(&select_b, t);
        let ordering = if d >= 0.0 { Ordering::FirstAbove } else { Ordering::SecondAbove };
        if d.abs() > best.0 {
            best = (d.abs(), t, ordering);
        }
    }
    let (_, best_t, ordering) = best;
    let sign = ordering.sign();
    let estimate = sign * (survival(&eval_a, best_t) - survival(&eval_b, best_t));

    // Bootstrap only needs the exceedance indicators at the chosen threshold.
    let above_a: Vec<bool> = eval_a.iter().map(|&x| x > best_t).collect();
    let above_b: Vec<bool> = eval_b.iter().map(|&x| x > best_t).collect();
    let resampled_fraction = |above: &[bool], rng: &mut R| -> f64 {
        let n = above.len();
        (0..n).filter(|_| above[rng.random_range(0..n)]).count() as f64 / n as f64
    };
    let mut boot: Vec<f64> = (0..bootstrap_rounds)
        .map(|_| sign * (resampled_fraction(&above_a, rng) - resampled_fraction(&above_b, rng)))
        .collect();
    let (boot_mean, _) = mean_and_se(boot.iter().copied());
    let bootstrap_se =
        (boot.iter().map(|x| (x - boot_mean).powi(2)).sum::<f64>() / (boot.len() as f64 - 1.0)).sqrt();
    boot.sort_by(f64::total_cmp);
    let bootstrap_ci = (percentile(&boot, 0.025), percentile(&boot, 0.975));
    if bootstrap_se == 0.0 {
        diagnostics.push(format!("bootstrap has no spread at t = {best_t}"));
    }

    TvLowerBoundResult {
        best_t,
        ordering,
        estimate,
        clamped: estimate.clamp(0.0, 1.0),
        bootstrap_se,
        bootstrap_ci,
        binned_tv: binned_tv(&eval_a, &eval_b, &thresholds),
        table,
        diagnostics,
        first,
        second,
    }
}

/// Linear-interpolation percentile of sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// `count` distinct quantiles of the pooled samples at levels `k/(count+1)`.
pub fn pooled_quantiles(a: &[f64], b: &[f64], count: usize) -> Vec<f64> {
    let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    pooled.sort_by(f64::total_cmp);
    let mut grid: Vec<f64> = (1..=count)
        .map(|k| {
            let idx = (k as f64 / (count + 1) as f64 * (pooled.len() - 1) as f64).round() as usize;
            pooled[idx]
        })
        .collect();
    grid.dedup();
    grid
}

/// Empirical TV between two samples binned by the cells `(-∞, t_1]`,
/// `(t_1, t_2]`, ..., `(t_k, ∞)`.
pub fn binned_tv(a: &[f64], b: &[f64], sorted_thresholds: &[f64]) -> f64 {
    let bins = |v: &[f64]| -> Vec<f64> {
        let mut counts = vec![0.0; sorted_thresholds.len() + 1];
        for &x in v {
            counts[sorted_thresholds.partition_point(|&t| t < x)] += 1.0;
        }
        counts.iter().map(|c| c / v.len() as f64).collect()
    };
    let (pa, pb) = (bins(a), bins(b));
    0.5 * pa.iter().zip(&pb).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / x.len() as f64 - j as f64 / y.len() as f64).abs());
    }
    d
}

/// One row of a moment comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentRow {
    pub r: f64,
    pub empirical: f64,
    pub standard_error: f64,
    pub limit: f64,
}

/// Empirical tail against the asymptotic maximum-degree formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailRow {
    pub t: f64,
    pub empirical: f64,
    pub asymptotic: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitComparison {
    pub sample: StatisticSample,
    /// KS distance to a limit-law sample; absent for the maximum degree,
    /// whose law is known only through its tail.
    pub ks_distance: Option<f64>,
    pub moments: Vec<MomentRow>,
    pub tail: Vec<TailRow>,
}

/// Compares finite-`n` replicas of a statistic with its limiting law.
pub fn compare_to_limit_law(
    seed: &Tree,
    n: usize,
    statistic: &Statistic,
    replicas: usize,
    limit_samples: usize,
    master_seed: u64,
) -> Result<LimitComparison> {
    let sample = sample_statistic(seed, n, statistic, replicas, master_seed, family::GROWTH_FIRST)?;
    let canonical = seed.canonical_relabel();
    let spec = LimitLawSpec::from_tree(&canonical)?;
    let size = canonical.vertex_count();
    let orders = [1.0, 2.0, 3.0];
    let limit_draws = |draw: &(dyn Fn(&mut crate::rng::StreamRng) -> Result<f64> + Sync)| -> Result<Vec<f64>> {
        (0..limit_samples as u64)
            .into_par_iter()
            .map(|i| draw(&mut stream(master_seed, family::LIMIT_LAW, i)))
            .collect()
    };
    let row = |r: f64, limit: f64| {
        let (empirical, standard_error) = sample.raw_moment(r);
        MomentRow {
            r,
            empirical,
            standard_error,
            limit,
        }
    };
    let (limit_values, moments) = match statistic {
        Statistic::VertexDegreeScaled(i) => {
            let i = *i;
            let draws = limit_draws(&|rng| Ok(sample_joint_limit_degrees(&spec, rng)[i]))?;
            let rows = orders
                .iter()
                .map(|&r| Ok(row(r, moment_seed_vertex(size, canonical.degree(i), r)?)))
                .collect::<Result<Vec<_>>>()?;
            (Some(draws), rows)
        }
        Statistic::SubsetSumScaled(set) => {
            let d: u32 = set.iter().map(|&i| canonical.degree(i)).sum();
            let draws = limit_draws(&|rng| Ok(sample_subset_sum_limit(size, d, rng)?))?;
            let rows = orders.iter().map(|&r| row(r, subset_sum_moment(size, d, r))).collect();
            (Some(draws), rows)
        }
        Statistic::MaxDegreeScaled => (None, Vec::new()),
        Statistic::UMaxScaled { .. } => {
            return Err(Error::Config("no limit law is implemented for umax_scaled".into()));
        }
    };
    let tail = if *statistic == Statistic::MaxDegreeScaled {
        [2.0, 2.5, 3.0, 3.5, 4.0]
            .iter()
            .map(|&t| {
                Ok(TailRow {
                    t,
                    empirical: sample.survival(t),
                    asymptotic: tail_asymptotic_max(&MaxTailQuery::from_tree(&canonical, t)?)?,
                })
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    Ok(LimitComparison {
        ks_distance: limit_values.map(|v| ks_distance(&sample.values, &v)),
        sample,
        moments,
        tail,
    })
}

/// `E V^r` for `V = 2BZ`, `B ~ Beta(d, 2|T|-2-d)`, `Z ~ GGa(2|T|-1, 2)`.
pub fn subset_sum_moment(tree_size: usize, d: u32, r: f64) -> f64 {
    let a = f64::from(d);
    let total = 2.0 * (tree_size as f64 - 1.0);
    let shape = 2.0 * tree_size as f64 - 1.0;
    let ln_beta = if a == total {
        0.0
    } else {
        ln_gamma(a + r) + ln_gamma(total) - ln_gamma(a) - ln_gamma(total + r)
    };
    let ln_z = ln_gamma((shape + r) / 2.0) - ln_gamma(shape / 2.0);
    (r * std::f64::consts::LN_2 + ln_beta + ln_z).exp()
}

/// Exact rational `numerator / denominator` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub numerator: u64,
    pub denominator: u64,
}

impl Ratio {
    pub fn new(numerator: u64, denominator: u64) -> Self {
        assert!(denominator > 0, "zero denominator");
        let g = gcd(numerator, denominator);
        Ratio {
            numerator: numerator / g,
            denominator: denominator / g,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

/// Probability that the first vertex added to `seed` attaches to a leaf.
pub fn leaf_attachment_probability(seed: &Tree) -> Result<Ratio> {
    if seed.vertex_count() < 2 || !seed.is_loop_free() {
        return Err(GrowthError::SeedTooSmall(seed.vertex_count()).into());
    }
    Ok(Ratio::new(seed.leaf_count() as u64, seed.degree_sum() as u64))
}
