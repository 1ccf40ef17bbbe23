//! Plain-Rust halves of the browser exports, kept free of `JsValue` so they
//! can be tested natively.

use activesel::{
    distance_matrix, iou_loss, nn_stats, select_fps, select_kmal, select_random, tversky_loss,
    BBox, LossParams, Metric, Result, SeededRng, Strategy,
};

fn unit(rng: &mut SeededRng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Gaussian blobs on the unit square plus a few far-away points, as a flat
/// `[x0, y0, x1, y1, ...]` buffer. Outliers come last.
pub fn point_cloud(
    clusters: usize,
    per_cluster: usize,
    outliers: usize,
    spread: f64,
    seed: u64,
) -> Vec<f64> {
    let mut rng = SeededRng::new(seed);
    let mut xy = Vec::with_capacity(2 * (clusters * per_cluster + outliers));
    for _ in 0..clusters {
        let cx = 0.15 + 0.7 * unit(&mut rng);
        let cy = 0.15 + 0.7 * unit(&mut rng);
        for _ in 0..per_cluster {
            xy.push(cx + spread * rng.standard_normal());
            xy.push(cy + spread * rng.standard_normal());
        }
    }
    for _ in 0..outliers {
        // on a ring well outside the clusters
        let t = std::f64::consts::TAU * unit(&mut rng);
        let r = 0.9 + 0.1 * unit(&mut rng);
        xy.push(0.5 + r * t.cos());
        xy.push(0.5 + r * t.sin());
    }
    xy
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointSelection {
    /// Selected point indices in pick order.
    pub order: Vec<usize>,
    /// Candidates turned down by the neighbor filter, in audit order.
    pub rejected: Vec<usize>,
    pub exhausted: bool,
    /// Mean nearest-neighbor distance, or NaN when not computed.
    pub ave_d: f64,
}

fn points(xy: &[f64]) -> Vec<Vec<f64>> {
    xy.chunks_exact(2).map(|p| p.to_vec()).collect()
}

/// Runs one strategy on 2-D points with Euclidean distance. `sal` and `mal`
/// coincide here since each point is its own single frame.
pub fn select_points(
    xy: &[f64],
    strategy: Strategy,
    budget: usize,
    seed: u64,
) -> Result<PointSelection> {
    let pts = points(xy);
    let n = pts.len();
    if strategy == Strategy::Random {
        let r = select_random(n, budget, seed)?;
        return Ok(PointSelection {
            order: r.selected,
            rejected: Vec::new(),
            exhausted: false,
            ave_d: f64::NAN,
        });
    }
    let m = distance_matrix(&pts, Metric::Euclidean)?;
    if strategy == Strategy::Kmal {
        let stats = nn_stats(&m)?;
        let r = select_kmal(&m, &stats, budget, seed)?;
        return Ok(PointSelection {
            rejected: r
                .audit
                .iter()
                .filter(|a| !a.accepted)
                .map(|a| a.candidate)
                .collect(),
            order: r.selected,
            exhausted: r.exhausted,
            ave_d: stats.ave_d,
        });
    }
    let start = if n == 0 {
        0
    } else {
        SeededRng::new(seed).below(n)
    };
    let r = select_fps(&m, budget, start)?;
    Ok(PointSelection {
        order: r.selected,
        rejected: Vec::new(),
        exhausted: r.exhausted,
        ave_d: f64::NAN,
    })
}

/// `[tversky, iou, dice, dT/dx1, dT/dy1, dT/dx2, dT/dy2]` where the values are
/// losses (one minus the index) and the gradient is of the Tversky loss.
pub fn box_losses(pred: [f64; 4], gt: [f64; 4], alpha: f64, beta: f64) -> Result<[f64; 7]> {
    let b = BBox::from_array(pred)?;
    let g = BBox::from_array(gt)?;
    let params = LossParams::new(alpha, beta, 0.0)?;
    let t = tversky_loss(&b, &g, &params, true)?;
    let dice = tversky_loss(&b, &g, &LossParams::new(0.5, 0.5, 0.0)?, false)?;
    let iou = iou_loss(&b, &g)?;
    let [gx1, gy1, gx2, gy2] = t.grad.unwrap_or([0.0; 4]);
    Ok([t.value, iou.value, dice.value, gx1, gy1, gx2, gy2])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cloud_shape_and_determinism() {
        let a = point_cloud(3, 5, 2, 0.03, 9);
        assert_eq!(a.len(), 2 * 17);
        assert_eq!(a, point_cloud(3, 5, 2, 0.03, 9));
        assert_ne!(a, point_cloud(3, 5, 2, 0.03, 10));
    }

    #[test]
    fn kmal_skips_ring_outliers() {
        let xy = point_cloud(5, 30, 4, 0.02, 1);
        let outliers = 150..154;
        let r = select_points(&xy, Strategy::Kmal, 10, 3).unwrap();
        assert!(r.order.iter().all(|i| !outliers.contains(i)));
        assert!(r.ave_d.is_finite());
        let fps = select_points(&xy, Strategy::Mal, 10, 3).unwrap();
        assert!(fps.order.iter().any(|i| outliers.contains(i)));
    }

    #[test]
    fn selection_lengths() {
        let xy = point_cloud(2, 10, 0, 0.05, 4);
        for s in [Strategy::Random, Strategy::Sal, Strategy::Mal] {
            assert_eq!(select_points(&xy, s, 7, 0).unwrap().order.len(), 7, "{s}");
        }
        // the neighbor filter runs dry on a pool this small
        let k = select_points(&xy, Strategy::Kmal, 7, 0).unwrap();
        assert!(k.exhausted);
        assert!(k.order.len() < 7);
        assert!(!k.rejected.is_empty());
        assert!(select_points(&xy, Strategy::Sal, 21, 0).is_err());
    }

    #[test]
    fn losses_for_offset_squares() {
        let v = box_losses([0.0, 0.0, 2.0, 2.0], [1.0, 1.0, 3.0, 3.0], 0.4, 0.6).unwrap();
        assert!((v[0] - 0.75).abs() < 1e-12);
        assert!((v[1] - 6.0 / 7.0).abs() < 1e-12);
        assert!((v[2] - 0.75).abs() < 1e-12);
        assert!(box_losses([2.0, 0.0, 1.0, 1.0], [0.0, 0.0, 1.0, 1.0], 0.4, 0.6).is_err());
        assert!(box_losses([0.0, 0.0, 1.0, 1.0], [0.0, 0.0, 1.0, 1.0], -1.0, 0.6).is_err());
    }
}
