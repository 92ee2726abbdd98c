//! WebAssembly bindings for the browser demo in `www/`.

pub mod ops;

use wasm_bindgen::prelude::*;

fn js(e: bfamily_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Block norms of a Gaussian wave packet, indexed from `j = -1`.
#[wasm_bindgen]
pub fn block_norms(amplitude: f64, width: f64, wavenumber: f64) -> Result<Vec<f64>, JsError> {
    Ok(ops::packet_block_norms(amplitude, width, wavenumber).map_err(js)?.into_iter().map(|(_, v)| v).collect())
}

/// Comparison curve sampled on `[0, t_end]`, `NaN` after blow-up.
#[wasm_bindgen]
pub fn riccati_curve(b: f64, ln_n: f64, v0: f64, t_end: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    let curve = ops::riccati_curve(b, ln_n, v0, t_end, samples).map_err(js)?;
    Ok(curve.into_iter().map(|(_, v)| v.unwrap_or(f64::NAN)).collect())
}

/// Blow-up time of the comparison solution, `NaN` when it stays bounded.
#[wasm_bindgen]
pub fn riccati_blowup(b: f64, ln_n: f64, v0: f64) -> Result<f64, JsError> {
    Ok(ops::riccati_blowup(b, ln_n, v0).map_err(js)?.unwrap_or(f64::NAN))
}

#[wasm_bindgen]
pub struct BreakingDemo(ops::Breaking);

#[wasm_bindgen]
impl BreakingDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(b: f64, left: f64, right: f64, num_points: usize) -> Result<BreakingDemo, JsError> {
        Ok(Self(ops::Breaking::new(b, left, right, num_points).map_err(js)?))
    }

    /// Advances to `t`; returns the verdict once the run has concluded, else `""`.
    pub fn advance_to(&mut self, t: f64) -> Result<String, JsError> {
        Ok(self.0.advance_to(t).map_err(js)?.map_or("", |v| v.as_str()).to_string())
    }

    pub fn time(&self) -> f64 {
        self.0.time()
    }

    pub fn points(&self) -> Vec<f64> {
        self.0.points()
    }

    pub fn velocity(&self) -> Vec<f64> {
        self.0.velocity()
    }

    pub fn max_slope(&self) -> f64 {
        self.0.max_slope()
    }
}
