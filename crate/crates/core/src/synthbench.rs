//! Synthetic clustered pools with planted outliers, and a coverage benchmark
//! comparing selection strategies on them.
//!
//! Each cluster is a direction on the unit sphere. A sequence in a cluster
//! gets its own direction jittered around the cluster's, and every frame is
//! that direction plus small per-frame noise, except frame 0 which carries
//! much stronger noise. Fusing several frames therefore recovers the
//! sequence direction better than frame 0 alone. Outliers are sequences
//! placed far from every cluster.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use statrs::distribution::{Binomial, DiscreteCDF};

use crate::distance::{distance_matrix, l2_norm, nn_stats};
use crate::error::{Error, Result};
use crate::fusion::multi_frame_reps;
use crate::rng::SeededRng;
use crate::selection::run_selection;
use crate::types::{
    EmbeddingSet, Metric, SelectionConfig, Strategy, DEFAULT_FRAMES_PER_SEQUENCE, DEFAULT_INTERVAL,
};

const PACKING_ATTEMPTS: usize = 10_000;
const REGENERATE_ATTEMPTS: u64 = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub clusters: usize,
    pub samples_per_cluster: usize,
    pub dim: usize,
    pub frames_per_sequence: usize,
    /// Angular std (radians) of sequence directions around their cluster.
    pub cluster_spread: f64,
    pub outliers: usize,
    pub seed: u64,
    /// Angular std of frame 0 around its sequence direction.
    pub first_frame_noise: f64,
    /// Angular std of every other frame.
    pub frame_noise: f64,
    /// Fusion settings used when checking that outliers are isolated.
    pub interval: usize,
    pub fused_frames: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            clusters: 10,
            samples_per_cluster: 40,
            dim: 16,
            frames_per_sequence: 41,
            cluster_spread: 0.15,
            outliers: 2,
            seed: 0,
            first_frame_noise: 1.2,
            frame_noise: 0.05,
            interval: DEFAULT_INTERVAL,
            fused_frames: DEFAULT_FRAMES_PER_SEQUENCE,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.clusters < 2 {
            return bad("at least two clusters are required");
        }
        if self.dim < 2 {
            return bad("dimension must be at least 2");
        }
        if !(self.cluster_spread > 0.0 && self.cluster_spread.is_finite()) {
            return bad("cluster spread must be positive");
        }
        if self.samples_per_cluster == 0 || self.frames_per_sequence == 0 {
            return bad("samples per cluster and frames per sequence must be positive");
        }
        if self.interval == 0 || self.fused_frames == 0 {
            return bad("interval and fused frame count must be positive");
        }
        if !(self.first_frame_noise >= 0.0 && self.frame_noise >= 0.0) {
            return bad("frame noise must be non-negative");
        }
        Ok(())
    }

    pub fn pool_size(&self) -> usize {
        self.clusters * self.samples_per_cluster + self.outliers
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Cluster(usize),
    Outlier,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthPool {
    pub pool: EmbeddingSet,
    pub labels: Vec<Label>,
    pub centers: Vec<Vec<f64>>,
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let n = l2_norm(&v);
    for x in &mut v {
        *x /= n;
    }
    v
}

fn random_unit(rng: &mut SeededRng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.standard_normal()).collect();
        if l2_norm(&v) > 1e-6 {
            return normalize(v);
        }
    }
}

/// `dir` plus isotropic noise scaled so the expected angular deviation is
/// roughly `angle_std`.
fn jitter(rng: &mut SeededRng, dir: &[f64], angle_std: f64) -> Vec<f64> {
    let sigma = angle_std / ((dir.len() - 1) as f64).sqrt();
    let v: Vec<f64> = dir
        .iter()
        .map(|x| x + sigma * rng.standard_normal())
        .collect();
    if l2_norm(&v) < 1e-9 {
        return dir.to_vec();
    }
    normalize(v)
}

fn angle(u: &[f64], v: &[f64]) -> f64 {
    let c: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    c.clamp(-1.0, 1.0).acos()
}

/// Rejection-samples `count` unit directions, each at least `min_angle` from
/// `existing` and from each other.
fn pack_directions(
    rng: &mut SeededRng,
    dim: usize,
    count: usize,
    min_angle: f64,
    existing: &[Vec<f64>],
) -> Option<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(count);
    for _ in 0..count {
        let mut placed = false;
        for _ in 0..PACKING_ATTEMPTS {
            let cand = random_unit(rng, dim);
            if existing
                .iter()
                .chain(&out)
                .all(|d| angle(d, &cand) >= min_angle)
            {
                out.push(cand);
                placed = true;
                break;
            }
        }
        if !placed {
            return None;
        }
    }
    Some(out)
}

fn generate_once(config: &SynthConfig, rng: &mut SeededRng) -> Result<SynthPool> {
    let spread = config.cluster_spread;
    let packing_failed = || Error::ClusterPackingFailed {
        clusters: config.clusters,
        dim: config.dim,
        attempts: PACKING_ATTEMPTS,
    };
    let centers = pack_directions(rng, config.dim, config.clusters, 2.0 * spread, &[])
        .ok_or_else(packing_failed)?;
    let outlier_dirs = pack_directions(rng, config.dim, config.outliers, 4.0 * spread, &centers)
        .ok_or_else(packing_failed)?;

    let mut entries = Vec::with_capacity(config.pool_size());
    let mut labels = Vec::with_capacity(config.pool_size());
    let frames_for = |rng: &mut SeededRng, dir: &[f64]| -> Vec<Vec<f64>> {
        (0..config.frames_per_sequence)
            .map(|f| {
                let noise = if f == 0 {
                    config.first_frame_noise
                } else {
                    config.frame_noise
                };
                jitter(rng, dir, noise)
            })
            .collect()
    };
    for (c, center) in centers.iter().enumerate() {
        for s in 0..config.samples_per_cluster {
            let dir = jitter(rng, center, spread);
            entries.push((format!("c{c:03}_s{s:04}"), frames_for(rng, &dir)));
            labels.push(Label::Cluster(c));
        }
    }
    for (o, dir) in outlier_dirs.iter().enumerate() {
        entries.push((format!("outlier_{o:03}"), frames_for(rng, dir)));
        labels.push(Label::Outlier);
    }
    let pool = EmbeddingSet::new(config.dim, entries)?;
    Ok(SynthPool {
        pool,
        labels,
        centers,
    })
}

/// True when every outlier's nearest-neighbor distance on fused cosine
/// representatives exceeds the pool average.
pub fn outliers_isolated(synth: &SynthPool, interval: usize, fused_frames: usize) -> Result<bool> {
    if synth.pool.len() < 2 {
        return Ok(true);
    }
    let reps = multi_frame_reps(&synth.pool, interval, fused_frames)?;
    let m = distance_matrix(&reps.reps, Metric::Cosine)?;
    let stats = nn_stats(&m)?;
    Ok(synth
        .labels
        .iter()
        .enumerate()
        .filter(|(_, l)| **l == Label::Outlier)
        .all(|(i, _)| stats.d[i] > stats.ave_d))
}

/// Generates a pool and its labels. If a planted outlier is not isolated
/// (`d_i <= ave_d`), the pool is regenerated from the next sub-stream.
pub fn generate_pool(config: &SynthConfig) -> Result<SynthPool> {
    config.validate()?;
    for attempt in 0..REGENERATE_ATTEMPTS {
        let mut rng = SeededRng::with_stream(config.seed, attempt);
        let synth = generate_once(config, &mut rng)?;
        if config.outliers == 0 || outliers_isolated(&synth, config.interval, config.fused_frames)?
        {
            return Ok(synth);
        }
    }
    Err(Error::InvalidConfig(format!(
        "could not plant isolated outliers in {REGENERATE_ATTEMPTS} attempts"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchCell {
    pub strategy: Strategy,
    pub budget: usize,
    pub seed: u64,
    pub clusters_covered: usize,
    pub outliers_selected: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategySummary {
    pub strategy: Strategy,
    pub budget: usize,
    pub seeds_run: usize,
    pub mean_clusters_covered: f64,
    pub coverage_rate: f64,
    pub mean_outliers_selected: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub config: SynthConfig,
    pub cells: Vec<BenchCell>,
    pub summaries: Vec<StrategySummary>,
}

/// Distinct clusters and number of outliers among `selected`.
pub fn coverage(labels: &[Label], selected: &[usize]) -> (usize, usize) {
    let mut clusters = BTreeSet::new();
    let mut outliers = 0;
    for &i in selected {
        match labels[i] {
            Label::Cluster(c) => {
                clusters.insert(c);
            }
            Label::Outlier => outliers += 1,
        }
    }
    (clusters.len(), outliers)
}

/// Pool seed used for benchmark seed `seed`.
pub fn pool_seed(base: u64, seed: u64) -> u64 {
    SeededRng::with_stream(base, seed).next_u64()
}

fn bench_seed(
    config: &SynthConfig,
    budgets: &[usize],
    strategies: &[Strategy],
    seed: u64,
) -> Result<Vec<BenchCell>> {
    let synth = generate_pool(&SynthConfig {
        seed: pool_seed(config.seed, seed),
        ..config.clone()
    })?;
    let mut cells = Vec::with_capacity(budgets.len() * strategies.len());
    for &strategy in strategies {
        for &budget in budgets {
            let sel = SelectionConfig::new(strategy, budget, seed)
                .with_interval(config.interval)
                .with_frames(config.fused_frames);
            let result = run_selection(&synth.pool, &sel)?;
            let (clusters_covered, outliers_selected) = coverage(&synth.labels, &result.selected);
            cells.push(BenchCell {
                strategy,
                budget,
                seed,
                clusters_covered,
                outliers_selected,
            });
        }
    }
    Ok(cells)
}

/// Runs every (strategy, budget) pair on a freshly generated pool per seed.
pub fn run_bench(
    config: &SynthConfig,
    budgets: &[usize],
    strategies: &[Strategy],
    seeds: &[u64],
) -> Result<BenchReport> {
    config.validate()?;
    let n = config.pool_size();
    if let Some(&b) = budgets.iter().find(|&&b| b > n) {
        return Err(Error::BudgetExceedsPool { budget: b, n });
    }

    #[cfg(feature = "parallel")]
    let per_seed: Vec<Result<Vec<BenchCell>>> = {
        use rayon::prelude::*;
        seeds
            .par_iter()
            .map(|&s| bench_seed(config, budgets, strategies, s))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let per_seed: Vec<Result<Vec<BenchCell>>> = seeds
        .iter()
        .map(|&s| bench_seed(config, budgets, strategies, s))
        .collect();

    let mut cells = Vec::with_capacity(seeds.len() * budgets.len() * strategies.len());
    for r in per_seed {
        cells.extend(r?);
    }
    cells.sort_by_key(|c| {
        let s = strategies.iter().position(|&x| x == c.strategy).unwrap();
        let b = budgets.iter().position(|&x| x == c.budget).unwrap();
        let k = seeds.iter().position(|&x| x == c.seed).unwrap();
        (s, b, k)
    });

    let mut summaries = Vec::new();
    for &strategy in strategies {
        for &budget in budgets {
            let group: Vec<&BenchCell> = cells
                .iter()
                .filter(|c| c.strategy == strategy && c.budget == budget)
                .collect();
            let runs = group.len();
            let covered: usize = group.iter().map(|c| c.clusters_covered).sum();
            let outliers: usize = group.iter().map(|c| c.outliers_selected).sum();
            let mean = |total: usize| {
                if runs == 0 {
                    0.0
                } else {
                    total as f64 / runs as f64
                }
            };
            summaries.push(StrategySummary {
                strategy,
                budget,
                seeds_run: runs,
                mean_clusters_covered: mean(covered),
                coverage_rate: mean(covered) / config.clusters as f64,
                mean_outliers_selected: mean(outliers),
            });
        }
    }

    Ok(BenchReport {
        config: config.clone(),
        cells,
        summaries,
    })
}

/// One-sided paired sign test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignTest {
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    /// P(wins or more out of wins + losses) under a fair coin.
    pub p_value: f64,
}

impl SignTest {
    pub fn significant(&self, level: f64) -> bool {
        self.p_value < level
    }
}

pub fn sign_test(a: &[usize], b: &[usize]) -> SignTest {
    assert_eq!(a.len(), b.len());
    let wins = a.iter().zip(b).filter(|(x, y)| x > y).count();
    let losses = a.iter().zip(b).filter(|(x, y)| x < y).count();
    let ties = a.len() - wins - losses;
    let trials = wins + losses;
    let p_value = if trials == 0 || wins == 0 {
        1.0
    } else {
        let dist = Binomial::new(0.5, trials as u64).expect("valid binomial");
        1.0 - dist.cdf(wins as u64 - 1)
    };
    SignTest {
        wins,
        losses,
        ties,
        p_value,
    }
}

impl BenchReport {
    pub fn summary(&self, strategy: Strategy, budget: usize) -> Option<&StrategySummary> {
        self.summaries
            .iter()
            .find(|s| s.strategy == strategy && s.budget == budget)
    }

    /// Clusters covered per seed, in seed order.
    pub fn coverage_by_seed(&self, strategy: Strategy, budget: usize) -> Vec<usize> {
        self.cells
            .iter()
            .filter(|c| c.strategy == strategy && c.budget == budget)
            .map(|c| c.clusters_covered)
            .collect()
    }

    /// Tests whether `better` covers more clusters than `worse`, paired by seed.
    pub fn compare(&self, better: Strategy, worse: Strategy, budget: usize) -> SignTest {
        sign_test(
            &self.coverage_by_seed(better, budget),
            &self.coverage_by_seed(worse, budget),
        )
    }

    /// Line-oriented, tab-separated report. Field order:
    ///
    /// ```text
    /// config  key=value ...
    /// cell    strategy  budget  seed  clusters_covered  outliers_selected
    /// summary strategy  budget  seeds_run  mean_clusters_covered  coverage_rate  mean_outliers_selected
    /// ```
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        out.push_str("# activesel bench report v1\n");
        let _ = writeln!(
            out,
            "config\tclusters={}\tsamples_per_cluster={}\tdim={}\tframes_per_sequence={}\tcluster_spread={}\toutliers={}\tseed={}\tfirst_frame_noise={}\tframe_noise={}\tinterval={}\tfused_frames={}",
            c.clusters,
            c.samples_per_cluster,
            c.dim,
            c.frames_per_sequence,
            c.cluster_spread,
            c.outliers,
            c.seed,
            c.first_frame_noise,
            c.frame_noise,
            c.interval,
            c.fused_frames
        );
        out.push_str("# cell\tstrategy\tbudget\tseed\tclusters_covered\toutliers_selected\n");
        for cell in &self.cells {
            let _ = writeln!(
                out,
                "cell\t{}\t{}\t{}\t{}\t{}",
                cell.strategy,
                cell.budget,
                cell.seed,
                cell.clusters_covered,
                cell.outliers_selected
            );
        }
        out.push_str(
            "# summary\tstrategy\tbudget\tseeds_run\tmean_clusters_covered\tcoverage_rate\tmean_outliers_selected\n",
        );
        for s in &self.summaries {
            let _ = writeln!(
                out,
                "summary\t{}\t{}\t{}\t{}\t{}\t{}",
                s.strategy,
                s.budget,
                s.seeds_run,
                s.mean_clusters_covered,
                s.coverage_rate,
                s.mean_outliers_selected
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthConfig {
        SynthConfig {
            clusters: 3,
            samples_per_cluster: 8,
            dim: 6,
            frames_per_sequence: 12,
            outliers: 1,
            seed: 5,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn two_clusters_in_two_dims() {
        let cfg = SynthConfig {
            clusters: 2,
            samples_per_cluster: 5,
            dim: 2,
            frames_per_sequence: 3,
            cluster_spread: 0.05,
            outliers: 0,
            ..SynthConfig::default()
        };
        let s = generate_pool(&cfg).unwrap();
        assert_eq!(s.pool.len(), 10);
        assert!(angle(&s.centers[0], &s.centers[1]) >= 0.1);
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            generate_pool(&small()).unwrap(),
            generate_pool(&small()).unwrap()
        );
    }

    #[test]
    fn counts() {
        let cfg = SynthConfig {
            clusters: 10,
            samples_per_cluster: 40,
            dim: 16,
            frames_per_sequence: 41,
            outliers: 5,
            ..SynthConfig::default()
        };
        let s = generate_pool(&cfg).unwrap();
        assert_eq!(s.pool.len(), 405);
        assert_eq!(s.labels.len(), 405);
        assert_eq!(s.labels.iter().filter(|l| **l == Label::Outlier).count(), 5);
        assert!(outliers_isolated(&s, 10, 5).unwrap());
    }

    #[test]
    fn packing_failure_is_reported() {
        let cfg = SynthConfig {
            clusters: 8,
            dim: 2,
            cluster_spread: 0.6,
            outliers: 0,
            ..small()
        };
        assert!(matches!(
            generate_pool(&cfg),
            Err(Error::ClusterPackingFailed { .. })
        ));
    }

    #[test]
    fn config_validation() {
        assert!(generate_pool(&SynthConfig {
            clusters: 1,
            ..small()
        })
        .is_err());
        assert!(generate_pool(&SynthConfig { dim: 1, ..small() }).is_err());
        assert!(generate_pool(&SynthConfig {
            cluster_spread: 0.0,
            ..small()
        })
        .is_err());
    }

    #[test]
    fn full_budget_random_covers_everything() {
        let cfg = small();
        let n = cfg.pool_size();
        let r = run_bench(&cfg, &[n], &[Strategy::Random], &[0, 1, 2]).unwrap();
        assert_eq!(r.summary(Strategy::Random, n).unwrap().coverage_rate, 1.0);
    }

    #[test]
    fn kmal_skips_outliers() {
        let r = run_bench(&small(), &[3, 6], &[Strategy::Kmal], &[0, 1, 2, 3]).unwrap();
        assert!(r.cells.iter().all(|c| c.outliers_selected == 0));
    }

    #[test]
    fn sign_test_values() {
        // 8 wins, 0 losses: p = 2^-8
        let t = sign_test(&[2; 8], &[1; 8]);
        assert_eq!((t.wins, t.losses), (8, 0));
        assert!((t.p_value - 1.0 / 256.0).abs() < 1e-12);
        let t = sign_test(&[1, 1], &[1, 1]);
        assert_eq!(t.p_value, 1.0);
        // 6 of 10: P(X >= 6) = 386/1024
        let a = [1, 1, 1, 1, 1, 1, 0, 0, 0, 0];
        let b = [0, 0, 0, 0, 0, 0, 1, 1, 1, 1];
        assert!((sign_test(&a, &b).p_value - 386.0 / 1024.0).abs() < 1e-12);
    }

    #[test]
    fn report_text_is_stable() {
        let r = run_bench(&small(), &[3], &[Strategy::Random, Strategy::Sal], &[0, 1]).unwrap();
        let again = run_bench(&small(), &[3], &[Strategy::Random, Strategy::Sal], &[0, 1]).unwrap();
        assert_eq!(r.to_text(), again.to_text());
        let t = r.to_text();
        assert_eq!(t.lines().filter(|l| l.starts_with("cell\t")).count(), 4);
        assert_eq!(t.lines().filter(|l| l.starts_with("summary\t")).count(), 2);
    }
}
