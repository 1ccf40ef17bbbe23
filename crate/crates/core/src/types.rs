//! Shared data model: embedding pools, selection configuration and results,
//! boxes and loss parameters.
//!
//! Every type here is immutable once built and can only be obtained through a
//! validating constructor.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Frames of one video sequence, one embedding per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceEmbedding {
    frames: Vec<Vec<f64>>,
}

impl SequenceEmbedding {
    pub fn frames(&self) -> &[Vec<f64>] {
        &self.frames
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn frame(&self, index: usize) -> &[f64] {
        &self.frames[index]
    }
}

/// The unlabeled pool: a list of sequences with stable string ids.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    dim: usize,
    ids: Vec<String>,
    sequences: Vec<SequenceEmbedding>,
}

/// Checks every pool invariant on raw `(id, frames)` entries.
pub fn validate_pool(dim: usize, entries: &[(String, Vec<Vec<f64>>)]) -> Result<()> {
    if entries.is_empty() {
        return Err(Error::EmptyPool);
    }
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    let mut seen = HashSet::with_capacity(entries.len());
    for (id, frames) in entries {
        if !seen.insert(id.as_str()) {
            return Err(Error::DuplicateId(id.clone()));
        }
        if frames.is_empty() {
            return Err(Error::EmptySequence(id.clone()));
        }
        for (f, frame) in frames.iter().enumerate() {
            if frame.len() != dim {
                return Err(Error::DimensionMismatch {
                    id: id.clone(),
                    frame: f,
                    expected: dim,
                    found: frame.len(),
                });
            }
            if let Some(c) = frame.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteValue {
                    id: id.clone(),
                    frame: f,
                    component: c,
                });
            }
        }
    }
    Ok(())
}

impl EmbeddingSet {
    pub fn new(dim: usize, entries: Vec<(String, Vec<Vec<f64>>)>) -> Result<Self> {
        validate_pool(dim, &entries)?;
        let (ids, sequences) = entries
            .into_iter()
            .map(|(id, frames)| (id, SequenceEmbedding { frames }))
            .unzip();
        Ok(Self {
            dim,
            ids,
            sequences,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    /// Always false for a constructed pool; present for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn sequences(&self) -> &[SequenceEmbedding] {
        &self.sequences
    }

    pub fn sequence(&self, index: usize) -> &SequenceEmbedding {
        &self.sequences[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &SequenceEmbedding)> {
        self.ids.iter().map(String::as_str).zip(&self.sequences)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Random,
    /// Farthest-point sampling on first-frame representatives.
    Sal,
    /// Farthest-point sampling on multi-frame fused representatives.
    Mal,
    /// Farthest-point sampling on fused representatives with nearest-neighbor
    /// validation.
    Kmal,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Random,
        Strategy::Sal,
        Strategy::Mal,
        Strategy::Kmal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Random => "random",
            Strategy::Sal => "sal",
            Strategy::Mal => "mal",
            Strategy::Kmal => "kmal",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(Strategy::Random),
            "sal" => Ok(Strategy::Sal),
            "mal" => Ok(Strategy::Mal),
            "kmal" => Ok(Strategy::Kmal),
            other => Err(Error::InvalidConfig(format!("unknown strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Metric {
    #[default]
    Cosine,
    Euclidean,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Cosine => "cosine",
            Metric::Euclidean => "euclidean",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cosine" => Ok(Metric::Cosine),
            "euclidean" => Ok(Metric::Euclidean),
            other => Err(Error::InvalidConfig(format!("unknown metric `{other}`"))),
        }
    }
}

pub const DEFAULT_INTERVAL: usize = 10;
pub const DEFAULT_FRAMES_PER_SEQUENCE: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelectionConfig {
    pub strategy: Strategy,
    pub budget: usize,
    /// Frame stride used when fusing several frames of one sequence.
    pub interval: usize,
    /// Number of frames fused per sequence.
    pub frames_per_sequence: usize,
    pub seed: u64,
    pub metric: Metric,
}

impl SelectionConfig {
    pub fn new(strategy: Strategy, budget: usize, seed: u64) -> Self {
        Self {
            strategy,
            budget,
            interval: DEFAULT_INTERVAL,
            frames_per_sequence: DEFAULT_FRAMES_PER_SEQUENCE,
            seed,
            metric: Metric::Cosine,
        }
    }

    pub fn with_interval(mut self, interval: usize) -> Self {
        self.interval = interval;
        self
    }

    pub fn with_frames(mut self, frames_per_sequence: usize) -> Self {
        self.frames_per_sequence = frames_per_sequence;
        self
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }

    /// Checks the configuration against a pool of `n` sequences.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::InvalidConfig("budget must be positive".into()));
        }
        if self.interval == 0 {
            return Err(Error::InvalidConfig("interval must be positive".into()));
        }
        if self.frames_per_sequence == 0 {
            return Err(Error::InvalidConfig(
                "frames per sequence must be positive".into(),
            ));
        }
        if self.budget > n {
            return Err(Error::BudgetExceedsPool {
                budget: self.budget,
                n,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RejectionReason {
    /// The candidate's nearest neighbor is already in the subset.
    NeighborAlreadySelected,
    /// The candidate's nearest-neighbor distance exceeds the pool average.
    ExceedsAverageNN,
}

impl RejectionReason {
    pub fn token(self) -> &'static str {
        match self {
            RejectionReason::NeighborAlreadySelected => "NEIGHBOR_SELECTED",
            RejectionReason::ExceedsAverageNN => "EXCEEDS_AVE_NN",
        }
    }
}

/// One step of a selection run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditRecord {
    pub step: usize,
    pub candidate: usize,
    /// Distance from the candidate to the closest already-selected sample.
    /// `None` for picks made before anything was selected and for random draws.
    pub min_distance_to_selected: Option<f64>,
    pub accepted: bool,
    pub rejection: Option<RejectionReason>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub selected: Vec<usize>,
    pub audit: Vec<AuditRecord>,
    /// Eligible candidates ran out before the budget was reached.
    pub exhausted: bool,
}

/// Axis-aligned box in pixel coordinates. Zero-area boxes are allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    x1: f64,
    y1: f64,
    x2: f64,
    y2: f64,
}

impl BBox {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self> {
        let finite = [x1, y1, x2, y2].iter().all(|v| v.is_finite());
        if !finite || x2 < x1 || y2 < y1 {
            return Err(Error::InvalidBox { x1, y1, x2, y2 });
        }
        Ok(Self { x1, y1, x2, y2 })
    }

    pub fn from_array(c: [f64; 4]) -> Result<Self> {
        Self::new(c[0], c[1], c[2], c[3])
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }

    pub fn y1(&self) -> f64 {
        self.y1
    }

    pub fn x2(&self) -> f64 {
        self.x2
    }

    pub fn y2(&self) -> f64 {
        self.y2
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x1, self.y1, self.x2, self.y2]
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Result<Self> {
        Self::new(self.x1 + dx, self.y1 + dy, self.x2 + dx, self.y2 + dy)
    }
}

pub const DEFAULT_ALPHA: f64 = 0.4;
pub const DEFAULT_BETA: f64 = 0.6;
pub const DEFAULT_ETA: f64 = 100.0;

/// Tversky weights and the classification-loss weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParams {
    alpha: f64,
    beta: f64,
    eta: f64,
}

impl Default for LossParams {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            eta: DEFAULT_ETA,
        }
    }
}

impl LossParams {
    pub fn new(alpha: f64, beta: f64, eta: f64) -> Result<Self> {
        for (name, value) in [("alpha", alpha), ("beta", beta), ("eta", eta)] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidLossParam { name, value });
            }
        }
        Ok(Self { alpha, beta, eta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}
