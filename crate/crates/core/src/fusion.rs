//! One representative vector per sequence.
//!
//! First-frame mode uses frame 0 as-is. Multi-frame mode samples frames
//! `0, a, 2a, ..., (m-1)a`, clamps indices past the end to the last frame,
//! drops the resulting duplicates, averages the chosen frames and
//! L2-normalizes the mean.

use crate::distance::{l2_norm, ZERO_NORM_EPS};
use crate::error::{Error, Result};
use crate::types::EmbeddingSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepresentativeMode {
    FirstFrame,
    MultiFrame,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepresentativeSet {
    pub reps: Vec<Vec<f64>>,
    pub mode: RepresentativeMode,
    /// Frame stride; 0 in first-frame mode.
    pub interval: usize,
    pub frames_used: Vec<Vec<usize>>,
}

pub fn first_frame_reps(pool: &EmbeddingSet) -> RepresentativeSet {
    let reps = pool
        .sequences()
        .iter()
        .map(|s| s.frame(0).to_vec())
        .collect();
    RepresentativeSet {
        reps,
        mode: RepresentativeMode::FirstFrame,
        interval: 0,
        frames_used: vec![vec![0]; pool.len()],
    }
}

/// Sampled frame indices for a sequence of `frame_count` frames, clamped and
/// de-duplicated, in ascending order.
pub fn sampled_frame_indices(frame_count: usize, interval: usize, count: usize) -> Vec<usize> {
    let last = frame_count.saturating_sub(1);
    let mut out: Vec<usize> = Vec::with_capacity(count);
    for k in 0..count {
        let idx = k.saturating_mul(interval).min(last);
        if out.last() != Some(&idx) {
            out.push(idx);
        }
    }
    out
}

fn fuse(frames: &[Vec<f64>], indices: &[usize], dim: usize) -> Option<Vec<f64>> {
    let mut mean = vec![0.0; dim];
    for &i in indices {
        for (m, v) in mean.iter_mut().zip(&frames[i]) {
            *m += v;
        }
    }
    let k = indices.len() as f64;
    for m in &mut mean {
        *m /= k;
    }
    let norm = l2_norm(&mean);
    if norm < ZERO_NORM_EPS {
        return None;
    }
    for m in &mut mean {
        *m /= norm;
    }
    Some(mean)
}

pub fn multi_frame_reps(
    pool: &EmbeddingSet,
    interval: usize,
    count: usize,
) -> Result<RepresentativeSet> {
    if interval == 0 || count == 0 {
        return Err(Error::InvalidConfig(
            "interval and frame count must be positive".into(),
        ));
    }
    let dim = pool.dim();
    let frames_used: Vec<Vec<usize>> = pool
        .sequences()
        .iter()
        .map(|s| sampled_frame_indices(s.frame_count(), interval, count))
        .collect();

    #[cfg(feature = "parallel")]
    let fused: Vec<Option<Vec<f64>>> = {
        use rayon::prelude::*;
        pool.sequences()
            .par_iter()
            .zip(&frames_used)
            .map(|(s, idx)| fuse(s.frames(), idx, dim))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let fused: Vec<Option<Vec<f64>>> = pool
        .sequences()
        .iter()
        .zip(&frames_used)
        .map(|(s, idx)| fuse(s.frames(), idx, dim))
        .collect();

    let reps = fused
        .into_iter()
        .enumerate()
        .map(|(index, r)| r.ok_or(Error::ZeroNormVector { index }))
        .collect::<Result<Vec<_>>>()?;

    Ok(RepresentativeSet {
        reps,
        mode: RepresentativeMode::MultiFrame,
        interval,
        frames_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn pool(seqs: Vec<Vec<Vec<f64>>>) -> EmbeddingSet {
        let dim = seqs[0][0].len();
        EmbeddingSet::new(
            dim,
            seqs.into_iter()
                .enumerate()
                .map(|(i, f)| (format!("s{i}"), f))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn first_frame_examples() {
        let p = pool(vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]]);
        assert_eq!(first_frame_reps(&p).reps, vec![vec![1.0, 0.0]]);

        let p = pool(vec![
            vec![vec![1.0, 2.0]],
            vec![vec![3.0, 4.0], vec![9.0, 9.0]],
            vec![vec![5.0, 6.0]],
        ]);
        let r = first_frame_reps(&p);
        assert_eq!(r.mode, RepresentativeMode::FirstFrame);
        assert_eq!(r.reps, vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]);
    }

    #[test]
    fn multi_frame_mean_then_normalize() {
        let p = pool(vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]]);
        let r = multi_frame_reps(&p, 1, 2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(r.reps[0][0], h, epsilon = 1e-15);
        assert_abs_diff_eq!(r.reps[0][1], h, epsilon = 1e-15);
        assert_eq!(r.frames_used[0], vec![0, 1]);
    }

    #[test]
    fn single_frame_clamps() {
        let p = pool(vec![vec![vec![3.0, 4.0]]]);
        let r = multi_frame_reps(&p, 10, 5).unwrap();
        assert_eq!(r.frames_used[0], vec![0]);
        assert_abs_diff_eq!(r.reps[0][0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(r.reps[0][1], 0.8, epsilon = 1e-15);
    }

    #[test]
    fn clamp_and_dedup_indices() {
        assert_eq!(sampled_frame_indices(25, 10, 5), vec![0, 10, 20, 24]);
        assert_eq!(sampled_frame_indices(41, 10, 5), vec![0, 10, 20, 30, 40]);
        assert_eq!(sampled_frame_indices(1, 10, 5), vec![0]);
        assert_eq!(sampled_frame_indices(3, 1, 1), vec![0]);
    }

    #[test]
    fn cancelling_frames_are_zero_norm() {
        let p = pool(vec![
            vec![vec![1.0, 0.0]],
            vec![vec![1.0, 0.0], vec![-1.0, 0.0]],
        ]);
        assert!(matches!(
            multi_frame_reps(&p, 1, 2),
            Err(Error::ZeroNormVector { index: 1 })
        ));
    }

    #[test]
    fn rejects_zero_parameters() {
        let p = pool(vec![vec![vec![1.0, 0.0]]]);
        assert!(multi_frame_reps(&p, 0, 5).is_err());
        assert!(multi_frame_reps(&p, 10, 0).is_err());
    }

    fn frames_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(0.1f64..5.0, 3), 1..40)
    }

    proptest! {
        #[test]
        fn first_frame_is_single_frame_fusion_up_to_scale(frames in frames_strategy(), a in 1usize..12) {
            let p = pool(vec![frames]);
            let ff = first_frame_reps(&p);
            let mf = multi_frame_reps(&p, a, 1).unwrap();
            let n = l2_norm(&ff.reps[0]);
            for (x, y) in ff.reps[0].iter().zip(&mf.reps[0]) {
                prop_assert!((x / n - y).abs() < 1e-12);
            }
        }

        #[test]
        fn reps_are_unit_norm(frames in frames_strategy(), a in 1usize..12, m in 1usize..7) {
            let p = pool(vec![frames]);
            let r = multi_frame_reps(&p, a, m).unwrap();
            prop_assert!((l2_norm(&r.reps[0]) - 1.0).abs() < 1e-9);
        }

        #[test]
        fn unsampled_frames_do_not_matter(
            frames in frames_strategy(),
            a in 1usize..12,
            m in 1usize..7,
            noise in prop::collection::vec(prop::collection::vec(-9.0f64..9.0, 3), 40),
        ) {
            let p = pool(vec![frames.clone()]);
            let used = sampled_frame_indices(frames.len(), a, m);
            let mut changed = frames;
            for (i, f) in changed.iter_mut().enumerate() {
                if !used.contains(&i) {
                    *f = noise[i].clone();
                }
            }
            let q = pool(vec![changed]);
            prop_assert_eq!(
                multi_frame_reps(&p, a, m).unwrap().reps,
                multi_frame_reps(&q, a, m).unwrap().reps
            );
        }
    }
}
