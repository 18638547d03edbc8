//! L1 two-sample statistic with a permutation null and a bootstrap z-score.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intensity::IntensityGrid;
use crate::rng::RngSeed;

/// Outcome of [`permutation_test`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    #[serde(rename = "T1")]
    pub statistic: f64,
    #[serde(rename = "p")]
    pub p_value: f64,
    #[serde(rename = "B")]
    pub permutations: usize,
    pub seed: RngSeed,
    pub n1: usize,
    pub n2: usize,
}

impl TestResult {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value <= alpha
    }
}

fn check_groups(a: &[IntensityGrid], b: &[IntensityGrid]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("both groups need at least one intensity".into()));
    }
    let spec = a[0].spec;
    if let Some(k) = a.iter().chain(b).position(|g| g.spec != spec) {
        return Err(Error::InvalidInput(format!(
            "intensity {k} of the pooled sample is on a different grid"
        )));
    }
    Ok(())
}

/// Mean of `grids[i]` over `idx` (in the given order), matching the
/// accumulation order of `average_intensity`.
fn mean_of(grids: &[IntensityGrid], idx: &[usize], out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for &i in idx {
        for (v, x) in out.iter_mut().zip(&grids[i].values) {
            *v += x;
        }
    }
    let n = idx.len() as f64;
    out.iter_mut().for_each(|v| *v /= n);
}

fn l1(a: &[f64], b: &[f64], cell: f64) -> f64 {
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
    sum * cell
}

/// `T1 = ∫ |κ̄₁ − κ̄₂|` between the group means.
pub fn two_sample_statistic(group1: &[IntensityGrid], group2: &[IntensityGrid]) -> Result<f64> {
    check_groups(group1, group2)?;
    let mut pooled: Vec<IntensityGrid> = group1.to_vec();
    pooled.extend_from_slice(group2);
    let n1 = group1.len();
    let idx: Vec<usize> = (0..pooled.len()).collect();
    Ok(Splitter::new(&pooled).statistic(&idx[..n1], &idx[n1..]))
}

struct Splitter<'a> {
    pooled: &'a [IntensityGrid],
    a: Vec<f64>,
    b: Vec<f64>,
    cell: f64,
}

impl<'a> Splitter<'a> {
    fn new(pooled: &'a [IntensityGrid]) -> Self {
        let len = pooled[0].values.len();
        Splitter { pooled, a: vec![0.0; len], b: vec![0.0; len], cell: pooled[0].spec.cell_area() }
    }

    fn statistic(&mut self, first: &[usize], second: &[usize]) -> f64 {
        mean_of(self.pooled, first, &mut self.a);
        mean_of(self.pooled, second, &mut self.b);
        l1(&self.a, &self.b, self.cell)
    }
}

fn cmp_groups(a: &[IntensityGrid], b: &[IntensityGrid]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        let xs = a.iter().flat_map(|g| &g.values);
        let ys = b.iter().flat_map(|g| &g.values);
        for (x, y) in xs.zip(ys) {
            match x.total_cmp(y) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    })
}

/// Orders the two groups canonically so the relabelling draws, and hence the
/// p-value, do not depend on which group is called first.
fn canonical<'a>(a: &'a [IntensityGrid], b: &'a [IntensityGrid]) -> (&'a [IntensityGrid], &'a [IntensityGrid]) {
    if cmp_groups(a, b) == Ordering::Greater {
        (b, a)
    } else {
        (a, b)
    }
}

/// Relative slack when comparing permuted statistics with the observed one,
/// so relabellings that reproduce the observed split count despite rounding.
const TIE_SLACK: f64 = 1e-12;

/// Permutation test of equal mean intensities with `B` seeded relabellings.
pub fn permutation_test(
    group1: &[IntensityGrid],
    group2: &[IntensityGrid],
    permutations: usize,
    seed: RngSeed,
) -> Result<TestResult> {
    check_groups(group1, group2)?;
    if permutations == 0 {
        return Err(Error::param("B", "need at least one permutation"));
    }
    let (a, b) = canonical(group1, group2);
    let pooled: Vec<IntensityGrid> = a.iter().chain(b).cloned().collect();
    let (n1, n) = (a.len(), pooled.len());
    let mut split = Splitter::new(&pooled);
    let all: Vec<usize> = (0..n).collect();
    let observed = split.statistic(&all[..n1], &all[n1..]);

    let mut rng = seed.stream();
    let mut perm = all.clone();
    let threshold = observed * (1.0 - TIE_SLACK);
    let mut exceed = 0usize;
    for _ in 0..permutations {
        perm.copy_from_slice(&all);
        rng.shuffle(&mut perm);
        let (x, y) = perm.split_at_mut(n1);
        x.sort_unstable();
        y.sort_unstable();
        if split.statistic(x, y) >= threshold {
            exceed += 1;
        }
    }
    Ok(TestResult {
        statistic: observed,
        p_value: (1 + exceed) as f64 / (permutations + 1) as f64,
        permutations,
        seed,
        n1: group1.len(),
        n2: group2.len(),
    })
}

/// `T1` divided by the bootstrap standard deviation of `T1`, each group
/// resampled with replacement `B` times.
pub fn bootstrap_zscore(group1: &[IntensityGrid], group2: &[IntensityGrid], resamples: usize, seed: RngSeed) -> Result<f64> {
    check_groups(group1, group2)?;
    if resamples < 2 {
        return Err(Error::param("B", "bootstrap needs at least two resamples"));
    }
    let (a, b) = canonical(group1, group2);
    let pooled: Vec<IntensityGrid> = a.iter().chain(b).cloned().collect();
    let (n1, n) = (a.len(), pooled.len());
    let mut split = Splitter::new(&pooled);
    let all: Vec<usize> = (0..n).collect();
    let observed = split.statistic(&all[..n1], &all[n1..]);

    let mut rng = seed.stream();
    let mut x = vec![0; n1];
    let mut y = vec![0; n - n1];
    let stats: Vec<f64> = (0..resamples)
        .map(|_| {
            x.iter_mut().for_each(|v| *v = rng.index(n1));
            y.iter_mut().for_each(|v| *v = n1 + rng.index(n - n1));
            split.statistic(&x, &y)
        })
        .collect();
    let mean = stats.iter().sum::<f64>() / resamples as f64;
    let var = stats.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (resamples - 1) as f64;
    let sd = var.sqrt();
    if !(sd > 1e-12 * mean.abs()) || !sd.is_finite() {
        return Err(Error::DegenerateStatistic(format!("bootstrap standard deviation of T1 is {sd}")));
    }
    Ok(observed / sd)
}
