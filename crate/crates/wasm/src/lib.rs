//! Browser bindings. Each export returns a result object whose arrays
//! are read through getters.

pub mod demo;

use wasm_bindgen::prelude::*;

#[wasm_bindgen]
pub struct RabiTrace(demo::RabiTrace);

#[wasm_bindgen]
impl RabiTrace {
    #[wasm_bindgen(getter)]
    pub fn times(&self) -> Vec<f64> {
        self.0.times.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn excited(&self) -> Vec<f64> {
        self.0.excited.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn frequency_mhz(&self) -> f64 {
        self.0.frequency_mhz
    }
    #[wasm_bindgen(getter)]
    pub fn expected_mhz(&self) -> f64 {
        self.0.expected_mhz
    }
}

/// Vacuum Rabi oscillation for memory displacement `abar_m`.
#[wasm_bindgen]
pub fn vacuum_rabi_trace(abar_m: f64, points: usize) -> Result<RabiTrace, JsError> {
    demo::rabi_trace(abar_m, points).map(RabiTrace).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub struct CoolingCurve(demo::CoolingCurve);

#[wasm_bindgen]
impl CoolingCurve {
    #[wasm_bindgen(getter)]
    pub fn holds(&self) -> Vec<f64> {
        self.0.holds.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn estimated(&self) -> Vec<f64> {
        self.0.estimated.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn exact(&self) -> Vec<f64> {
        self.0.exact.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn free_decay(&self) -> Vec<f64> {
        self.0.free_decay.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn max_rate(&self) -> f64 {
        self.0.max_rate
    }
    #[wasm_bindgen(getter)]
    pub fn kappa(&self) -> f64 {
        self.0.kappa
    }
}

/// Thermal reset; couplings in units of the readout linewidth, times in us.
#[wasm_bindgen]
pub fn cooling_curve(
    nbar: f64,
    memory_fraction: f64,
    readout_fraction: f64,
    hold: f64,
    step: f64,
    seed: u32,
) -> Result<CoolingCurve, JsError> {
    demo::cooling_curve(nbar, memory_fraction, readout_fraction, hold, step, seed.into())
        .map(CoolingCurve)
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub struct Profile(demo::Profile);

#[wasm_bindgen]
impl Profile {
    #[wasm_bindgen(getter)]
    pub fn radii(&self) -> Vec<f64> {
        self.0.radii.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn values(&self) -> Vec<f64> {
        self.0.values.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn nbar(&self) -> f64 {
        self.0.nbar
    }
    #[wasm_bindgen(getter)]
    pub fn exact(&self) -> f64 {
        self.0.exact
    }
}

#[wasm_bindgen]
pub fn characteristic_profile(n: f64, fock: bool, max_alpha: f64, points: usize) -> Result<Profile, JsError> {
    demo::characteristic_profile(n, fock, max_alpha, points).map(Profile).map_err(|e| JsError::new(&e))
}
