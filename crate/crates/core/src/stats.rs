//! Rank-sum testing and box-plot summaries of result tables.

use std::collections::BTreeMap;

use crate::acquisition::std_normal_cdf;
use crate::error::{Error, Result};
use crate::results::ResultRow;

/// Largest combined sample size for which the exact null distribution is enumerated.
pub const EXACT_MAX_TOTAL: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Alternative {
    TwoSided,
    /// First sample tends to be larger.
    Greater,
    /// First sample tends to be smaller.
    Less,
}

impl Alternative {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "two-sided" => Ok(Self::TwoSided),
            "greater" => Ok(Self::Greater),
            "less" => Ok(Self::Less),
            _ => Err(Error::usage(format!(
                "unknown alternative {s:?} (two-sided, greater, less)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::TwoSided => "two-sided",
            Self::Greater => "greater",
            Self::Less => "less",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TestMethod {
    Exact,
    NormalApproximation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodChoice {
    /// Exact when the samples are small and tie-free, otherwise normal.
    Auto,
    Exact,
    Normal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankTestResult {
    /// U of the first sample: pairs where it is larger, ties counting one half.
    pub u_statistic: f64,
    pub p_value: f64,
    pub method: TestMethod,
    pub n1: usize,
    pub n2: usize,
}

/// Average ranks (1-based) of the pooled sample, and the tie-group sizes.
fn midranks(pooled: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&a, &b| pooled[a].total_cmp(&pooled[b]));
    let mut ranks = vec![0.0; pooled.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && pooled[order[j]] == pooled[order[i]] {
            j += 1;
        }
        let r = 0.5 * ((i + 1) + j) as f64;
        for &k in &order[i..j] {
            ranks[k] = r;
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    (ranks, ties)
}

/// Number of orderings giving each U value, for sample sizes `m`, `n`, no ties.
fn exact_counts(m: usize, n: usize) -> Vec<f64> {
    // table[i][j][u]: arrangements of i first-sample and j second-sample items.
    let max_u = m * n;
    let mut table = vec![vec![Vec::<f64>::new(); n + 1]; m + 1];
    for i in 0..=m {
        for j in 0..=n {
            let mut row = vec![0.0; i * j + 1];
            if i == 0 || j == 0 {
                row[0] = 1.0;
            } else {
                // largest item from the first sample beats all j others
                for (u, c) in table[i - 1][j].iter().enumerate() {
                    row[u + j] += c;
                }
                for (u, c) in table[i][j - 1].iter().enumerate() {
                    row[u] += c;
                }
            }
            table[i][j] = row;
        }
    }
    let out = std::mem::take(&mut table[m][n]);
    debug_assert_eq!(out.len(), max_u + 1);
    out
}

pub fn mann_whitney_u(a: &[f64], b: &[f64], alternative: Alternative) -> Result<RankTestResult> {
    mann_whitney_u_with(a, b, alternative, MethodChoice::Auto)
}

pub fn mann_whitney_u_with(
    a: &[f64],
    b: &[f64],
    alternative: Alternative,
    method: MethodChoice,
) -> Result<RankTestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::usage("both samples need at least one value"));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::usage("samples must be finite"));
    }
    let (n1, n2) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let r1: f64 = ranks[..n1].iter().sum();
    let u = r1 - (n1 * (n1 + 1)) as f64 / 2.0;

    let exact_ok = ties.is_empty() && n1 + n2 <= EXACT_MAX_TOTAL;
    let use_exact = match method {
        MethodChoice::Auto => exact_ok,
        MethodChoice::Exact if !ties.is_empty() => {
            return Err(Error::usage("exact test requires tie-free samples"));
        }
        MethodChoice::Exact => true,
        MethodChoice::Normal => false,
    };

    let (p, m) = if use_exact {
        let counts = exact_counts(n1, n2);
        let total: f64 = counts.iter().sum();
        let k = u.round() as usize;
        let lower: f64 = counts[..=k].iter().sum::<f64>() / total;
        let upper: f64 = counts[k..].iter().sum::<f64>() / total;
        let p = match alternative {
            Alternative::Less => lower,
            Alternative::Greater => upper,
            Alternative::TwoSided => (2.0 * lower.min(upper)).min(1.0),
        };
        (p, TestMethod::Exact)
    } else {
        let n = (n1 + n2) as f64;
        let mean = (n1 * n2) as f64 / 2.0;
        let tie_term: f64 =
            ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (n * (n - 1.0));
        let var = (n1 * n2) as f64 / 12.0 * ((n + 1.0) - tie_term);
        let p = if var <= 0.0 {
            1.0
        } else {
            let sd = var.sqrt();
            match alternative {
                Alternative::Greater => std_normal_cdf(-(u - mean - 0.5) / sd),
                Alternative::Less => std_normal_cdf((u - mean + 0.5) / sd),
                Alternative::TwoSided => {
                    let z = ((u - mean).abs() - 0.5).max(0.0) / sd;
                    2.0 * std_normal_cdf(-z)
                }
            }
        };
        (p, TestMethod::NormalApproximation)
    };
    Ok(RankTestResult {
        u_statistic: u,
        p_value: p.clamp(0.0, 1.0),
        method: m,
        n1,
        n2,
    })
}

/// Significance stars: below 0.0001, 0.001, 0.01 and 0.05 give 4 to 1 stars.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.0001 {
        "****"
    } else if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        "ns"
    }
}

/// Linear interpolation between order statistics (Hyndman–Fan type 7).
/// `sorted` must be ascending and non-empty.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    BestSoFar,
    Reward,
    Distance,
    /// `-best_so_far`: closest approach so far.
    BestDistance,
}

impl Metric {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "best_so_far" => Ok(Self::BestSoFar),
            "reward" => Ok(Self::Reward),
            "distance" => Ok(Self::Distance),
            "best_distance" => Ok(Self::BestDistance),
            _ => Err(Error::usage(format!(
                "unknown metric {s:?} (best_so_far, reward, distance, best_distance)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::BestSoFar => "best_so_far",
            Self::Reward => "reward",
            Self::Distance => "distance",
            Self::BestDistance => "best_distance",
        }
    }

    pub fn of(self, r: &ResultRow) -> f64 {
        match self {
            Self::BestSoFar => r.best_so_far,
            Self::Reward => r.reward,
            Self::Distance => r.distance,
            Self::BestDistance => -r.best_so_far,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeSummary {
    pub variant: String,
    pub episode: usize,
    pub count: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
}

/// `variant -> replicate -> episode -> value`, checking every replicate of a
/// variant covers the same episodes.
fn tabulate(
    rows: &[ResultRow],
    metric: Metric,
) -> Result<BTreeMap<String, BTreeMap<usize, BTreeMap<usize, f64>>>> {
    let mut t: BTreeMap<String, BTreeMap<usize, BTreeMap<usize, f64>>> = BTreeMap::new();
    for r in rows {
        let prev = t
            .entry(r.variant.clone())
            .or_default()
            .entry(r.replicate)
            .or_default()
            .insert(r.episode, metric.of(r));
        if prev.is_some() {
            return Err(Error::usage(format!(
                "duplicate row for variant {} replicate {} episode {}",
                r.variant, r.replicate, r.episode
            )));
        }
    }
    for (v, reps) in &t {
        let mut it = reps
            .values()
            .map(|eps| eps.keys().copied().collect::<Vec<_>>());
        let first = it.next().unwrap_or_default();
        if it.any(|e| e != first) {
            return Err(Error::usage(format!(
                "variant {v}: replicates have inconsistent episode counts"
            )));
        }
    }
    Ok(t)
}

/// Per variant and episode: median, quartiles (type 7), min and max across replicates.
pub fn summarize(rows: &[ResultRow], metric: Metric) -> Result<Vec<EpisodeSummary>> {
    if rows.is_empty() {
        return Err(Error::usage("no rows to summarize"));
    }
    let t = tabulate(rows, metric)?;
    let mut out = Vec::new();
    for (variant, reps) in &t {
        let episodes: Vec<usize> = reps
            .values()
            .next()
            .map(|e| e.keys().copied().collect())
            .unwrap_or_default();
        for ep in episodes {
            let mut vals: Vec<f64> = reps.values().map(|e| e[&ep]).collect();
            vals.sort_by(f64::total_cmp);
            out.push(EpisodeSummary {
                variant: variant.clone(),
                episode: ep,
                count: vals.len(),
                median: quantile_sorted(&vals, 0.5),
                q1: quantile_sorted(&vals, 0.25),
                q3: quantile_sorted(&vals, 0.75),
                min: vals[0],
                max: vals[vals.len() - 1],
            });
        }
    }
    Ok(out)
}

/// Values of one variant at one episode, one per replicate in replicate order.
pub fn values_at(
    rows: &[ResultRow],
    variant: &str,
    episode: usize,
    metric: Metric,
) -> Result<Vec<f64>> {
    let t = tabulate(rows, metric)?;
    let reps = t
        .get(variant)
        .ok_or_else(|| Error::usage(format!("variant {variant:?} not in the table")))?;
    reps.iter()
        .map(|(rep, eps)| {
            eps.get(&episode).copied().ok_or_else(|| {
                Error::usage(format!(
                    "variant {variant} replicate {rep} has no episode {episode}"
                ))
            })
        })
        .collect()
}

/// Last episode recorded for `variant`.
pub fn final_episode(rows: &[ResultRow], variant: &str) -> Option<usize> {
    rows.iter()
        .filter(|r| r.variant == variant)
        .map(|r| r.episode)
        .max()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identical_samples_with_ties() {
        let a = [1.0, 2.0, 2.0, 3.0, 5.0];
        let r = mann_whitney_u(&a, &a, Alternative::TwoSided).unwrap();
        assert_eq!(r.u_statistic, 12.5);
        assert!(r.p_value >= 0.99);
        assert_eq!(r.method, TestMethod::NormalApproximation);
    }

    #[test]
    fn complete_separation_exact() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], Alternative::Less).unwrap();
        assert_eq!(r.u_statistic, 0.0);
        assert_eq!(r.method, TestMethod::Exact);
        assert_relative_eq!(r.p_value, 0.05, max_relative = 1e-14);
        let g = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], Alternative::Greater).unwrap();
        assert_relative_eq!(g.p_value, 1.0, max_relative = 1e-14);
        let t = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], Alternative::TwoSided).unwrap();
        assert_relative_eq!(t.p_value, 0.1, max_relative = 1e-14);
    }

    #[test]
    fn empty_sample_rejected() {
        assert!(mann_whitney_u(&[], &[1.0], Alternative::TwoSided).is_err());
        assert!(mann_whitney_u_with(
            &[1.0, 1.0],
            &[1.0],
            Alternative::TwoSided,
            MethodChoice::Exact
        )
        .is_err());
    }

    #[test]
    fn exact_counts_sum_to_binomial() {
        let c = exact_counts(5, 7);
        assert_eq!(c.iter().sum::<f64>(), 792.0);
        assert_eq!(c.len(), 36);
        // symmetric null distribution
        for u in 0..c.len() {
            assert_eq!(c[u], c[c.len() - 1 - u]);
        }
    }

    #[test]
    fn star_boundaries() {
        assert_eq!(significance_stars(0.00009), "****");
        assert_eq!(significance_stars(0.0001), "***");
        assert_eq!(significance_stars(0.001), "**");
        assert_eq!(significance_stars(0.01), "*");
        assert_eq!(significance_stars(0.05), "ns");
        assert_eq!(significance_stars(0.049), "*");
    }

    #[test]
    fn type7_quartiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.5), 2.5);
        assert_eq!(quantile_sorted(&v, 0.25), 1.75);
        assert_eq!(quantile_sorted(&v, 0.75), 3.25);
        assert_eq!(quantile_sorted(&[7.0], 0.25), 7.0);
    }

    fn row(variant: &str, rep: usize, ep: usize, best: f64) -> ResultRow {
        ResultRow {
            variant: variant.into(),
            replicate: rep,
            episode: ep,
            selected_prior: None,
            reward: best,
            best_so_far: best,
            distance: -best,
        }
    }

    #[test]
    fn summary_of_single_replicate_is_the_value() {
        let rows = vec![row("a", 0, 1, -3.0), row("a", 0, 2, -1.0)];
        let s = summarize(&rows, Metric::BestSoFar).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[1].median, -1.0);
        assert_eq!(s[1].q1, -1.0);
        assert_eq!(s[1].max, -1.0);
    }

    #[test]
    fn inconsistent_episode_counts_rejected() {
        let rows = vec![
            row("a", 0, 1, -3.0),
            row("a", 0, 2, -1.0),
            row("a", 1, 1, -2.0),
        ];
        assert!(matches!(
            summarize(&rows, Metric::BestSoFar),
            Err(Error::Usage(_))
        ));
        assert!(summarize(&[], Metric::BestSoFar).is_err());
    }

    #[test]
    fn values_at_episode() {
        let rows = vec![
            row("a", 0, 1, -3.0),
            row("a", 1, 1, -2.0),
            row("b", 0, 1, -9.0),
        ];
        assert_eq!(
            values_at(&rows, "a", 1, Metric::BestDistance).unwrap(),
            vec![3.0, 2.0]
        );
        assert!(values_at(&rows, "c", 1, Metric::BestSoFar).is_err());
        assert!(values_at(&rows, "a", 2, Metric::BestSoFar).is_err());
        assert_eq!(final_episode(&rows, "a"), Some(1));
    }
}
