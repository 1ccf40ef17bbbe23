//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Point buffers cross the boundary as flat `Float64Array`s of `x, y` pairs.

pub mod demo;

use activesel::Strategy;
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = pointCloud)]
pub fn point_cloud(
    clusters: u32,
    per_cluster: u32,
    outliers: u32,
    spread: f64,
    seed: u32,
) -> Vec<f64> {
    demo::point_cloud(
        clusters as usize,
        per_cluster as usize,
        outliers as usize,
        spread,
        seed as u64,
    )
}

#[wasm_bindgen]
pub struct Selection {
    inner: demo::PointSelection,
}

#[wasm_bindgen]
impl Selection {
    pub fn order(&self) -> Vec<u32> {
        self.inner.order.iter().map(|&i| i as u32).collect()
    }

    pub fn rejected(&self) -> Vec<u32> {
        self.inner.rejected.iter().map(|&i| i as u32).collect()
    }

    #[wasm_bindgen(getter)]
    pub fn exhausted(&self) -> bool {
        self.inner.exhausted
    }

    #[wasm_bindgen(getter, js_name = aveD)]
    pub fn ave_d(&self) -> f64 {
        self.inner.ave_d
    }
}

#[wasm_bindgen(js_name = selectPoints)]
pub fn select_points(
    xy: &[f64],
    strategy: &str,
    budget: u32,
    seed: u32,
) -> Result<Selection, JsError> {
    let strategy: Strategy = strategy.parse().map_err(js_err)?;
    demo::select_points(xy, strategy, budget as usize, seed as u64)
        .map(|inner| Selection { inner })
        .map_err(js_err)
}

#[wasm_bindgen(js_name = boxLosses)]
pub fn box_losses(pred: &[f64], gt: &[f64], alpha: f64, beta: f64) -> Result<Vec<f64>, JsError> {
    let four = |s: &[f64]| -> Result<[f64; 4], JsError> {
        s.try_into()
            .map_err(|_| JsError::new("a box needs exactly four coordinates"))
    };
    demo::box_losses(four(pred)?, four(gt)?, alpha, beta)
        .map(|v| v.to_vec())
        .map_err(js_err)
}
