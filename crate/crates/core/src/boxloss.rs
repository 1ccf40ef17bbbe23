//! IoU and Tversky losses for axis-aligned boxes, with analytic gradients
//! with respect to the predicted box corners `(x1, y1, x2, y2)`.
//!
//! The Tversky coefficient is
//!
//! ```text
//! T = |B n G| / (|B n G| + alpha |B - G| + beta |G - B|)
//! ```
//!
//! where `B` is the prediction and `G` the ground truth. `alpha = beta = 0.5`
//! gives the Dice coefficient and `alpha = beta = 1` the Jaccard index (IoU).
//!
//! The areas are piecewise bilinear in the corners. Where an intersection
//! edge is shared by both boxes, or the overlap width or height is exactly
//! zero, the gradient is the one-sided derivative taken from the side where
//! the predicted edge bounds a non-empty overlap. For identical boxes that is
//! the shrinking direction, so the gradient there is non-zero whenever
//! `beta > 0`.

use crate::error::{Error, Result};
use crate::types::{BBox, LossParams};

/// The four areas the losses are built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxDecomposition {
    pub inter: f64,
    /// Predicted area outside the ground truth (background taken as target).
    pub b_minus_gt: f64,
    /// Ground-truth area the prediction misses (target taken as background).
    pub gt_minus_b: f64,
    pub union: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossValue {
    pub value: f64,
    /// d(loss)/d(x1, y1, x2, y2) of the predicted box.
    pub grad: Option<[f64; 4]>,
}

fn overlap_extent(b: &BBox, gt: &BBox) -> (f64, f64) {
    let w = b.x2().min(gt.x2()) - b.x1().max(gt.x1());
    let h = b.y2().min(gt.y2()) - b.y1().max(gt.y1());
    (w, h)
}

pub fn decompose(b: &BBox, gt: &BBox) -> BoxDecomposition {
    let (w, h) = overlap_extent(b, gt);
    let inter = w.max(0.0) * h.max(0.0);
    let b_minus_gt = b.area() - inter;
    let gt_minus_b = gt.area() - inter;
    BoxDecomposition {
        inter,
        b_minus_gt,
        gt_minus_b,
        union: inter + (b_minus_gt + gt_minus_b),
    }
}

pub fn iou_loss(b: &BBox, gt: &BBox) -> Result<LossValue> {
    let parts = decompose(b, gt);
    if parts.union == 0.0 {
        return Err(Error::DegeneratePair);
    }
    Ok(LossValue {
        value: 1.0 - parts.inter / parts.union,
        grad: None,
    })
}

fn tversky_denominator(parts: &BoxDecomposition, alpha: f64, beta: f64) -> f64 {
    // alpha*X + beta*Y is grouped first so that swapping the boxes together
    // with (alpha, beta) reproduces the same value bit for bit.
    parts.inter + (alpha * parts.b_minus_gt + beta * parts.gt_minus_b)
}

pub fn tversky(b: &BBox, gt: &BBox, alpha: f64, beta: f64) -> Result<f64> {
    let parts = decompose(b, gt);
    let den = tversky_denominator(&parts, alpha, beta);
    if den == 0.0 {
        return Err(Error::DegeneratePair);
    }
    Ok(parts.inter / den)
}

pub fn dice(b: &BBox, gt: &BBox) -> Result<f64> {
    tversky(b, gt, 0.5, 0.5)
}

pub fn jaccard(b: &BBox, gt: &BBox) -> Result<f64> {
    tversky(b, gt, 1.0, 1.0)
}

/// d(inter)/d(x1, y1, x2, y2) of the predicted box, one-sided at kinks.
fn intersection_grad(b: &BBox, gt: &BBox) -> [f64; 4] {
    let (w, h) = overlap_extent(b, gt);
    let (w_pos, h_pos) = (w.max(0.0), h.max(0.0));
    let x_live = w >= 0.0;
    let y_live = h >= 0.0;
    let dw_dx1 = if x_live && b.x1() >= gt.x1() {
        -1.0
    } else {
        0.0
    };
    let dw_dx2 = if x_live && b.x2() <= gt.x2() {
        1.0
    } else {
        0.0
    };
    let dh_dy1 = if y_live && b.y1() >= gt.y1() {
        -1.0
    } else {
        0.0
    };
    let dh_dy2 = if y_live && b.y2() <= gt.y2() {
        1.0
    } else {
        0.0
    };
    [
        dw_dx1 * h_pos,
        dh_dy1 * w_pos,
        dw_dx2 * h_pos,
        dh_dy2 * w_pos,
    ]
}

fn tversky_loss_raw(
    b: &BBox,
    gt: &BBox,
    alpha: f64,
    beta: f64,
    with_grad: bool,
) -> Result<LossValue> {
    let parts = decompose(b, gt);
    let den = tversky_denominator(&parts, alpha, beta);
    if den == 0.0 {
        return Err(Error::DegeneratePair);
    }
    let t = parts.inter / den;
    let grad = with_grad.then(|| {
        let d_inter = intersection_grad(b, gt);
        let d_area = [-b.height(), -b.width(), b.height(), b.width()];
        let mut g = [0.0; 4];
        for k in 0..4 {
            // den = (1 - alpha - beta) inter + alpha area(B) + beta area(G)
            let d_den = (1.0 - alpha - beta) * d_inter[k] + alpha * d_area[k];
            g[k] = -(d_inter[k] * den - parts.inter * d_den) / (den * den);
        }
        g
    });
    Ok(LossValue {
        value: 1.0 - t,
        grad,
    })
}

/// `1 - T(b, gt)` with the weights from `params`.
pub fn tversky_loss(
    b: &BBox,
    gt: &BBox,
    params: &LossParams,
    with_grad: bool,
) -> Result<LossValue> {
    tversky_loss_raw(b, gt, params.alpha(), params.beta(), with_grad)
}

/// IoU loss with its gradient (the Tversky loss at `alpha = beta = 1`).
pub fn iou_loss_with_grad(b: &BBox, gt: &BBox) -> Result<LossValue> {
    let mut v = tversky_loss_raw(b, gt, 1.0, 1.0, true)?;
    v.value = iou_loss(b, gt)?.value;
    Ok(v)
}

/// Box loss plus the weighted classification loss.
pub fn combine_total_loss(l_tbb: f64, l_cl: f64, eta: f64) -> f64 {
    l_tbb + eta * l_cl
}
