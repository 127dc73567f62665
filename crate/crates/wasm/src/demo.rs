//! Plain-Rust versions of the exported operations, callable from host tests.

use rdr_core::protocols::{run_thermal_reset, run_vacuum_rabi, ThermalPrep, ThermalResetConfig, VacuumRabiConfig};
use rdr_core::tomography::{characteristic_from_populations, extract_nbar, sample_axes_with, DEFAULT_THRESHOLD};
use rdr_core::C64;

/// Excited-state population of the effective qubit against time.
#[derive(Clone, Debug)]
pub struct RabiTrace {
    pub times: Vec<f64>,
    pub excited: Vec<f64>,
    /// Fitted oscillation frequency (MHz), NaN for a flat trace.
    pub frequency_mhz: f64,
    pub expected_mhz: f64,
}

pub fn rabi_trace(abar_m: f64, points: usize) -> Result<RabiTrace, String> {
    let mut cfg = VacuumRabiConfig::device(abar_m);
    cfg.points = points.max(2);
    let r = run_vacuum_rabi(&cfg).map_err(|e| e.to_string())?;
    let mhz = |w: f64| w / std::f64::consts::TAU;
    Ok(RabiTrace {
        frequency_mhz: r.frequency().map_or(f64::NAN, mhz),
        expected_mhz: mhz(r.expected_frequency),
        times: r.times,
        excited: r.excited,
    })
}

#[derive(Clone, Debug)]
pub struct CoolingCurve {
    pub holds: Vec<f64>,
    /// Photon number from tomography.
    pub estimated: Vec<f64>,
    /// `<a^dag a>` of the same states.
    pub exact: Vec<f64>,
    /// Intrinsic decay of the memory alone.
    pub free_decay: Vec<f64>,
    /// Peak cooling rate from the piecewise fit, photons/us; NaN if the fit failed.
    pub max_rate: f64,
    pub kappa: f64,
}

/// Thermal reset with couplings given as fractions of `kappa_r`.
pub fn cooling_curve(
    nbar: f64,
    memory_fraction: f64,
    readout_fraction: f64,
    hold: f64,
    step: f64,
    seed: u64,
) -> Result<CoolingCurve, String> {
    if !(step > 0.0) {
        return Err(format!("step must be positive, got {step}"));
    }
    let mut cfg = ThermalResetConfig::device(ThermalPrep::new(nbar, 300, seed));
    let kappa = cfg.params.kappa_r;
    cfg.coupling_m = memory_fraction * kappa;
    cfg.coupling_r = readout_fraction * kappa;
    cfg.hold = hold;
    cfg.readout_dim = 3;
    let n = (hold / step).floor() as usize;
    cfg.tomography_holds = (0..=n).map(|k| k as f64 * step).collect();
    let r = run_thermal_reset(&cfg).map_err(|e| e.to_string())?;
    Ok(CoolingCurve {
        holds: r.tomography.iter().map(|p| p.hold).collect(),
        estimated: r.tomography.iter().map(|p| p.estimate.nbar).collect(),
        exact: r.tomography.iter().map(|p| p.exact_nbar).collect(),
        free_decay: r.free_decay.iter().map(|p| p.1).collect(),
        max_rate: r.fit.as_ref().map_or(f64::NAN, |f| f.max_rate()),
        kappa,
    })
}

#[derive(Clone, Debug)]
pub struct Profile {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// Photon number recovered from the curvature at the origin.
    pub nbar: f64,
    pub exact: f64,
}

/// Radial characteristic function of a thermal (`fock = false`) or Fock
/// state, with the photon number read back from it.
pub fn characteristic_profile(n: f64, fock: bool, max_alpha: f64, points: usize) -> Result<Profile, String> {
    if !(n >= 0.0 && n.is_finite()) {
        return Err(format!("photon number must be non-negative, got {n}"));
    }
    if !(max_alpha > 0.0) {
        return Err(format!("max_alpha must be positive, got {max_alpha}"));
    }
    let pops: Vec<f64> = if fock {
        let k = n.round() as usize;
        (0..=k + 1).map(|j| if j == k { 1.0 } else { 0.0 }).collect()
    } else {
        let dim = (20.0 * (n + 1.0)).ceil() as usize + 20;
        (0..dim).map(|j| (n / (n + 1.0)).powi(j as i32) / (n + 1.0)).collect()
    };
    let exact = pops.iter().enumerate().map(|(j, p)| j as f64 * p).sum();
    let points = points.max(3);
    let radii: Vec<f64> = (0..points).map(|k| max_alpha * k as f64 / (points - 1) as f64).collect();
    let values = radii.iter().map(|&r| characteristic_from_populations(&pops, C64::new(r, 0.0))).collect();
    let samples = sample_axes_with(|a| Ok(C64::new(characteristic_from_populations(&pops, a), 0.0)), max_alpha, 41)
        .map_err(|e| e.to_string())?;
    let nbar = extract_nbar(&samples, DEFAULT_THRESHOLD).map_or(f64::NAN, |e| e.nbar);
    Ok(Profile { radii, values, nbar, exact })
}
