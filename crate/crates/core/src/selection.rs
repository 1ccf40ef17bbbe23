//! Budgeted subset selection: seeded random draws, farthest-point sampling,
//! and farthest-point sampling with nearest-neighbor validation.

use crate::distance::{distance_matrix, nn_stats, DistanceMatrix, NNStats};
use crate::error::{Error, Result};
use crate::fusion::{first_frame_reps, multi_frame_reps};
use crate::rng::SeededRng;
use crate::types::{
    AuditRecord, EmbeddingSet, RejectionReason, SelectionConfig, SelectionResult, Strategy,
};

fn check_budget(budget: usize, n: usize) -> Result<()> {
    if budget == 0 {
        return Err(Error::InvalidConfig("budget must be positive".into()));
    }
    if budget > n {
        return Err(Error::BudgetExceedsPool { budget, n });
    }
    Ok(())
}

/// Greedy max-min state: the selected set and, for every sample, its
/// distance to the closest selected sample.
#[derive(Debug, Clone)]
pub struct FpsState {
    selected: Vec<usize>,
    in_set: Vec<bool>,
    min_dist: Vec<f64>,
}

impl FpsState {
    pub fn new(m: &DistanceMatrix, start: usize) -> Self {
        let mut in_set = vec![false; m.n()];
        in_set[start] = true;
        Self {
            selected: vec![start],
            in_set,
            min_dist: m.row(start).to_vec(),
        }
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn contains(&self, i: usize) -> bool {
        self.in_set[i]
    }

    pub fn min_dist(&self, i: usize) -> f64 {
        self.min_dist[i]
    }

    /// Unselected sample farthest from the selected set among those passing
    /// `eligible`; ties go to the smallest index.
    pub fn farthest(&self, eligible: impl Fn(usize) -> bool) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, &d) in self.min_dist.iter().enumerate() {
            if self.in_set[i] || !eligible(i) {
                continue;
            }
            match best {
                Some(b) if d <= self.min_dist[b] => {}
                _ => best = Some(i),
            }
        }
        best
    }

    pub fn add(&mut self, m: &DistanceMatrix, i: usize) {
        debug_assert!(!self.in_set[i]);
        self.in_set[i] = true;
        self.selected.push(i);
        for (md, &d) in self.min_dist.iter_mut().zip(m.row(i)) {
            if d < *md {
                *md = d;
            }
        }
    }
}

fn seed_record(candidate: usize) -> AuditRecord {
    AuditRecord {
        step: 0,
        candidate,
        min_distance_to_selected: None,
        accepted: true,
        rejection: None,
    }
}

/// `budget` distinct indices drawn uniformly without replacement.
pub fn select_random(n: usize, budget: usize, seed: u64) -> Result<SelectionResult> {
    check_budget(budget, n)?;
    let selected = SeededRng::new(seed).sample_distinct(n, budget);
    let audit = selected
        .iter()
        .enumerate()
        .map(|(step, &candidate)| AuditRecord {
            step,
            candidate,
            min_distance_to_selected: None,
            accepted: true,
            rejection: None,
        })
        .collect();
    Ok(SelectionResult {
        selected,
        audit,
        exhausted: false,
    })
}

/// Farthest-point sampling from `start`.
pub fn select_fps(m: &DistanceMatrix, budget: usize, start: usize) -> Result<SelectionResult> {
    let n = m.n();
    check_budget(budget, n)?;
    if start >= n {
        return Err(Error::StartOutOfRange { start, n });
    }
    let mut state = FpsState::new(m, start);
    let mut audit = vec![seed_record(start)];
    for step in 1..budget {
        let next = state
            .farthest(|_| true)
            .expect("budget <= n leaves an unselected sample");
        audit.push(AuditRecord {
            step,
            candidate: next,
            min_distance_to_selected: Some(state.min_dist(next)),
            accepted: true,
            rejection: None,
        });
        state.add(m, next);
    }
    Ok(SelectionResult {
        selected: state.selected,
        audit,
        exhausted: false,
    })
}

/// Farthest-point sampling with nearest-neighbor validation.
///
/// The first sample is drawn uniformly among samples with `d_i <= ave_d`.
/// Each later FPS candidate is accepted only if its nearest neighbor is not
/// yet selected and `d_i <= ave_d`; a rejected candidate is never offered
/// again. Candidates are drawn from samples that are neither selected nor
/// rejected. If they run out first, the partial subset is returned with
/// `exhausted` set.
pub fn select_kmal(
    m: &DistanceMatrix,
    stats: &NNStats,
    budget: usize,
    seed: u64,
) -> Result<SelectionResult> {
    let n = m.n();
    if n < 2 {
        return Err(Error::PoolTooSmall { n });
    }
    check_budget(budget, n)?;
    if stats.nn.len() != n || stats.d.len() != n {
        return Err(Error::InvalidConfig(
            "nearest-neighbor statistics do not match the distance matrix".into(),
        ));
    }

    let seeds: Vec<usize> = (0..n).filter(|&i| stats.is_representative(i)).collect();
    if seeds.is_empty() {
        return Err(Error::NoEligibleSeed);
    }
    let start = seeds[SeededRng::new(seed).below(seeds.len())];

    let mut state = FpsState::new(m, start);
    let mut rejected = vec![false; n];
    let mut audit = vec![seed_record(start)];
    let mut exhausted = false;

    while state.selected().len() < budget {
        let Some(candidate) = state.farthest(|i| !rejected[i]) else {
            exhausted = true;
            break;
        };
        let rejection = if state.contains(stats.nn[candidate]) {
            Some(RejectionReason::NeighborAlreadySelected)
        } else if !stats.is_representative(candidate) {
            Some(RejectionReason::ExceedsAverageNN)
        } else {
            None
        };
        audit.push(AuditRecord {
            step: audit.len(),
            candidate,
            min_distance_to_selected: Some(state.min_dist(candidate)),
            accepted: rejection.is_none(),
            rejection,
        });
        match rejection {
            None => state.add(m, candidate),
            Some(_) => rejected[candidate] = true,
        }
    }

    Ok(SelectionResult {
        selected: state.selected,
        audit,
        exhausted,
    })
}

/// Runs the configured strategy end to end on a pool.
pub fn run_selection(pool: &EmbeddingSet, config: &SelectionConfig) -> Result<SelectionResult> {
    let n = pool.len();
    config.validate(n)?;
    match config.strategy {
        Strategy::Random => select_random(n, config.budget, config.seed),
        Strategy::Sal | Strategy::Mal => {
            let reps = if config.strategy == Strategy::Sal {
                first_frame_reps(pool)
            } else {
                multi_frame_reps(pool, config.interval, config.frames_per_sequence)?
            };
            let m = distance_matrix(&reps.reps, config.metric)?;
            let start = SeededRng::new(config.seed).below(n);
            select_fps(&m, config.budget, start)
        }
        Strategy::Kmal => {
            let reps = multi_frame_reps(pool, config.interval, config.frames_per_sequence)?;
            let m = distance_matrix(&reps.reps, config.metric)?;
            let stats = nn_stats(&m)?;
            select_kmal(&m, &stats, config.budget, config.seed)
        }
    }
}
