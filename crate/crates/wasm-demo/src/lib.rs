//! WebAssembly bindings for a single-page demo.
//!
//! Three operations, each returning a flat `Float64Array`:
//!
//! * [`densities`]: the limit density `p_∞` on a grid next to a histogram
//!   of the first coordinate under the `n`-particle stationary law.
//! * [`laplace_convergence`]: `|L2n(s,t) - L_∞(s) L_∞(t)|` along a
//!   log-spaced ladder of `n`.
//! * [`wasserstein_ladder`]: `W_1` between exact finite-`n` marginal draws
//!   and the limit quantile function.
//!
//! The drift is passed as a flat node list `[u_0, b_0, u_1, b_1, ...]`.
//! The computations live in [`demo`] so they can be tested natively.

use wasm_bindgen::prelude::*;

pub mod demo;

fn js(e: String) -> JsError {
    JsError::new(&e)
}

/// Layout: `[x_0..x_{m-1}, limit_0..limit_{m-1}, hist_0..hist_{m-1}]`.
#[wasm_bindgen]
pub fn densities(nodes: &[f64], sigma2: f64, n: usize, draws: usize, bins: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    demo::densities(nodes, sigma2, n, draws, bins, seed).map(|d| d.flatten()).map_err(js)
}

/// Layout: `[n_0, err_0, n_1, err_1, ...]`; infeasible `n` are skipped.
#[wasm_bindgen]
pub fn laplace_convergence(nodes: &[f64], sigma2: f64, s: f64, t: f64, n_max: usize) -> Result<Vec<f64>, JsError> {
    demo::laplace_convergence(nodes, sigma2, s, t, n_max).map(flatten_pairs).map_err(js)
}

/// Layout: `[n_0, w_0, n_1, w_1, ...]`.
#[wasm_bindgen]
pub fn wasserstein_ladder(nodes: &[f64], sigma2: f64, count: usize, n_max: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    demo::wasserstein_ladder(nodes, sigma2, count, n_max, seed).map(flatten_pairs).map_err(js)
}

/// `[lower, upper]` of the Laplace domain `V`, or an error for an invalid
/// drift.
#[wasm_bindgen]
pub fn laplace_domain(nodes: &[f64], sigma2: f64) -> Result<Vec<f64>, JsError> {
    let v = demo::domain(nodes, sigma2).map_err(js)?;
    Ok(vec![v.lower, v.upper])
}

fn flatten_pairs(pairs: Vec<(f64, f64)>) -> Vec<f64> {
    pairs.into_iter().flat_map(|(a, b)| [a, b]).collect()
}
