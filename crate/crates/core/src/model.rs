//! System Hamiltonians in the rotating, displaced and effective
//! Jaynes-Cummings frames, and the transformations between them.
//!
//! Frames:
//!
//! * [`FrameTag::RotatingLab`]: each mode and the qubit in a frame rotating
//!   at its bare frequency; the drives appear explicitly.
//! * [`FrameTag::DisplacedRotating`]: additionally displaced by the classical
//!   sideband response `alpha_i(t)`, so only fluctuations around the driven
//!   coherent amplitude remain in the mode.
//! * [`FrameTag::EffectiveJc`]: additionally in the interaction picture of the
//!   Rabi drive, expressed in the dressed basis, with terms rotating at the
//!   Rabi frequency or faster dropped. In this frame the qubit slot holds the
//!   dressed states: level 0 is `|-> = (|g> - |e>)/sqrt 2` and level 1 is
//!   `|+> = (|g> + |e>)/sqrt 2`.
//!
//! Sideband phase convention: the drive on mode `i` is
//! `eps_i a_i^dag e^{-i s Delta t} + h.c.` with `s = -1` for a red sideband
//! (below the mode) and `s = +1` for a blue one. The classical response is
//! `alpha_i(t) = abar_i e^{-i s Delta t}`, so a red sideband reproduces the
//! displaced frame `U(t) = D(-abar e^{i Omega_R t})`.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::hilbert::{
    annihilation, displacement, embed, number, pauli, DensityMatrix, Operator, Pauli,
    SpaceLayout, MEMORY, QUBIT, READOUT,
};
use crate::{hz_to_angular, Error, Result};

/// Ratio of Rabi frequency to each dispersive scale above which the
/// effective Jaynes-Cummings description is flagged valid.
pub const VALIDITY_RATIO: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameTag {
    RotatingLab,
    DisplacedRotating,
    EffectiveJc,
}

impl std::fmt::Display for FrameTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FrameTag::RotatingLab => "rotating-lab",
            FrameTag::DisplacedRotating => "displaced-rotating",
            FrameTag::EffectiveJc => "effective-jc",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Memory,
    Readout,
}

impl Mode {
    pub const BOTH: [Mode; 2] = [Mode::Memory, Mode::Readout];

    pub fn slot(self) -> usize {
        match self {
            Mode::Memory => MEMORY,
            Mode::Readout => READOUT,
        }
    }
}

/// Physical rates of the device. Angular rates in rad/us, times in us.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Half the memory dispersive shift.
    pub chi_m: f64,
    /// Half the readout dispersive shift.
    pub chi_r: f64,
    /// Memory energy decay rate (1/us).
    pub kappa_m: f64,
    /// Readout linewidth.
    pub kappa_r: f64,
    pub t1_q: f64,
    pub t2_echo_q: f64,
    pub omega_rabi: f64,
    /// Transmon anharmonicity; only enters the validity flags.
    pub anharmonicity: Option<f64>,
    /// Thermal occupation of the memory bath.
    pub bath_nbar_m: f64,
    /// Thermal occupation of the readout bath.
    pub bath_nbar_r: f64,
    pub layout: SpaceLayout,
}

impl SystemParams {
    /// Flute-cavity device: 2chi_m/2pi = 57 kHz, 2chi_r/2pi = 0.635 MHz,
    /// 1/kappa_m = 170 us, kappa_r/2pi = 0.382 MHz, T1 = 25 us,
    /// T2echo = 20 us, Omega_R/2pi = 9 MHz, E_C/2pi = 265 MHz.
    pub fn device() -> Self {
        SystemParams {
            chi_m: hz_to_angular(57e3) / 2.0,
            chi_r: hz_to_angular(0.635e6) / 2.0,
            kappa_m: 1.0 / 170.0,
            kappa_r: hz_to_angular(0.382e6),
            t1_q: 25.0,
            t2_echo_q: 20.0,
            omega_rabi: hz_to_angular(9e6),
            anharmonicity: Some(hz_to_angular(265e6)),
            bath_nbar_m: 0.0,
            bath_nbar_r: 0.0,
            layout: SpaceLayout::default(),
        }
    }

    pub fn with_layout(mut self, layout: SpaceLayout) -> Self {
        self.layout = layout;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("chi_m", self.chi_m),
            ("chi_r", self.chi_r),
            ("kappa_m", self.kappa_m),
            ("kappa_r", self.kappa_r),
            ("t1_q", self.t1_q),
            ("t2_echo_q", self.t2_echo_q),
            ("omega_rabi", self.omega_rabi),
        ];
        for (name, v) in rates {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.t2_echo_q > 2.0 * self.t1_q {
            return Err(Error::InvalidParams(format!(
                "T2 = {} us exceeds 2 T1 = {} us",
                self.t2_echo_q,
                2.0 * self.t1_q
            )));
        }
        if self.bath_nbar_m < 0.0 || self.bath_nbar_r < 0.0 {
            return Err(Error::InvalidParams("bath occupations must be >= 0".into()));
        }
        if self.layout.len() != 3 || self.layout.dims()[QUBIT] != 2 {
            return Err(Error::InvalidParams(
                "layout must be (qubit[2], memory, readout)".into(),
            ));
        }
        Ok(())
    }

    pub fn chi(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Memory => self.chi_m,
            Mode::Readout => self.chi_r,
        }
    }

    pub fn kappa(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Memory => self.kappa_m,
            Mode::Readout => self.kappa_r,
        }
    }

    pub fn bath_nbar(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Memory => self.bath_nbar_m,
            Mode::Readout => self.bath_nbar_r,
        }
    }

    /// Pure dephasing rate `1/T2 - 1/(2 T1)`.
    pub fn dephasing_rate(&self) -> f64 {
        (1.0 / self.t2_echo_q - 0.5 / self.t1_q).max(0.0)
    }

    /// Amplitude `|abar|` giving the coupling `chi |abar| = g` on `mode`.
    pub fn amplitude_for_coupling(&self, mode: Mode, coupling: f64) -> f64 {
        coupling / self.chi(mode)
    }

    pub fn validity(&self, drives: Option<&DriveParams>) -> Validity {
        let couplings = drives.map(|d| {
            Mode::BOTH.map(|m| self.chi(m) * d.steady_amplitude(self, m).norm())
        });
        let mut scales = vec![self.chi_m, self.chi_r];
        if let Some(c) = couplings {
            scales.extend(c);
        }
        let min_ratio = scales
            .iter()
            .filter(|&&s| s > 0.0)
            .map(|&s| self.omega_rabi / s)
            .fold(f64::INFINITY, f64::min);
        Validity {
            rabi_over_chi_m: self.omega_rabi / self.chi_m,
            rabi_over_chi_r: self.omega_rabi / self.chi_r,
            couplings,
            effective_model_valid: min_ratio >= VALIDITY_RATIO,
            below_anharmonicity: self.anharmonicity.map(|a| self.omega_rabi * VALIDITY_RATIO <= a),
        }
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        Self::device()
    }
}

/// Regime indicators for the effective Jaynes-Cummings description.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Validity {
    pub rabi_over_chi_m: f64,
    pub rabi_over_chi_r: f64,
    /// `chi_i |abar_i|` for (memory, readout) when drives are known.
    pub couplings: Option<[f64; 2]>,
    /// Rabi frequency at least [`VALIDITY_RATIO`] times every dispersive scale.
    pub effective_model_valid: bool,
    /// Rabi frequency at least [`VALIDITY_RATIO`] times below the anharmonicity.
    pub below_anharmonicity: Option<bool>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SidebandSign {
    /// Drive at `omega_i - Delta`.
    #[default]
    Red,
    /// Drive at `omega_i + Delta`.
    Blue,
}

impl SidebandSign {
    /// The `s` in `e^{-i s Delta t}`.
    pub fn exponent(self) -> f64 {
        match self {
            SidebandSign::Red => -1.0,
            SidebandSign::Blue => 1.0,
        }
    }
}

/// Sideband drive amplitudes (rad/us) and detuning.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    pub eps_m: C64,
    pub eps_r: C64,
    pub sign_m: SidebandSign,
    pub sign_r: SidebandSign,
    /// Detuning of both sidebands from their modes; equals the Rabi
    /// frequency for the reset protocol.
    pub detuning: f64,
}

impl DriveParams {
    pub fn off(params: &SystemParams) -> Self {
        DriveParams {
            eps_m: C64::new(0.0, 0.0),
            eps_r: C64::new(0.0, 0.0),
            sign_m: SidebandSign::Red,
            sign_r: SidebandSign::Red,
            detuning: params.omega_rabi,
        }
    }

    /// Red sidebands at the Rabi detuning whose steady-state responses are
    /// the given amplitudes.
    pub fn from_amplitudes(params: &SystemParams, abar_m: C64, abar_r: C64) -> Self {
        let mut d = Self::off(params);
        d.set_amplitude(params, Mode::Memory, abar_m);
        d.set_amplitude(params, Mode::Readout, abar_r);
        d
    }

    /// Red sidebands with real amplitudes giving couplings `chi_i abar_i = g_i`.
    pub fn from_couplings(params: &SystemParams, g_m: f64, g_r: f64) -> Self {
        Self::from_amplitudes(
            params,
            C64::new(params.amplitude_for_coupling(Mode::Memory, g_m), 0.0),
            C64::new(params.amplitude_for_coupling(Mode::Readout, g_r), 0.0),
        )
    }

    pub fn eps(&self, mode: Mode) -> C64 {
        match mode {
            Mode::Memory => self.eps_m,
            Mode::Readout => self.eps_r,
        }
    }

    pub fn sign(&self, mode: Mode) -> SidebandSign {
        match mode {
            Mode::Memory => self.sign_m,
            Mode::Readout => self.sign_r,
        }
    }

    pub fn set_amplitude(&mut self, params: &SystemParams, mode: Mode, abar: C64) {
        let eps = eps_for_amplitude(abar, self.sign(mode), self.detuning, params.kappa(mode));
        match mode {
            Mode::Memory => self.eps_m = eps,
            Mode::Readout => self.eps_r = eps,
        }
    }

    /// Steady-state classical amplitude induced on `mode`.
    pub fn steady_amplitude(&self, params: &SystemParams, mode: Mode) -> C64 {
        steady_state_amplitude(self.eps(mode), self.sign(mode), self.detuning, params.kappa(mode))
    }

    /// Classical mode amplitude `abar e^{-i s Delta t}` at full drive.
    pub fn classical_amplitude(&self, params: &SystemParams, mode: Mode, t: f64) -> C64 {
        let phase = C64::new(0.0, -self.sign(mode).exponent() * self.detuning * t).exp();
        self.steady_amplitude(params, mode) * phase
    }
}

/// Steady response of a damped mode to `eps a^dag e^{-i s Delta t} + h.c.`:
/// `abar = -i eps / (kappa/2 - i s Delta)`.
pub fn steady_state_amplitude(eps: C64, sign: SidebandSign, detuning: f64, kappa: f64) -> C64 {
    let denom = C64::new(0.5 * kappa, -sign.exponent() * detuning);
    C64::new(0.0, -1.0) * eps / denom
}

/// Inverse of [`steady_state_amplitude`].
pub fn eps_for_amplitude(abar: C64, sign: SidebandSign, detuning: f64, kappa: f64) -> C64 {
    C64::new(0.0, 1.0) * abar * C64::new(0.5 * kappa, -sign.exponent() * detuning)
}

/// Sideband-induced coherent amplitude `eps / (i Omega_R - kappa/2)` and its
/// large-detuning approximation `eps / (i Omega_R)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SidebandAmplitude {
    pub exact: C64,
    pub approx: C64,
    /// `|exact - approx| / |exact|`, equal to `kappa / (2 Omega_R)`.
    pub relative_difference: f64,
}

pub fn sideband_amplitude(eps: C64, omega_rabi: f64, kappa: f64) -> SidebandAmplitude {
    let exact = eps / C64::new(-0.5 * kappa, omega_rabi);
    let approx = eps / C64::new(0.0, omega_rabi);
    let relative_difference = if exact.norm() > 0.0 {
        (exact - approx).norm() / exact.norm()
    } else {
        0.0
    };
    SidebandAmplitude { exact, approx, relative_difference }
}

fn mode_ops(layout: &SpaceLayout, mode: Mode) -> Result<(Operator, Operator)> {
    let dim = layout.dim(mode.slot())?;
    let a = embed(&annihilation(dim)?, layout, mode.slot())?;
    let n = embed(&number(dim)?, layout, mode.slot())?;
    Ok((a, n))
}

pub(crate) fn qubit_op(layout: &SpaceLayout, which: Pauli) -> Result<Operator> {
    embed(&pauli(which), layout, QUBIT)
}

/// `sum_i chi_i a_i^dag a_i sigma_z`.
pub fn dispersive_hamiltonian(params: &SystemParams) -> Result<Operator> {
    let layout = &params.layout;
    let sz = qubit_op(layout, Pauli::Z)?;
    let mut h = Operator::zeros(layout);
    for mode in Mode::BOTH {
        let (_, n) = mode_ops(layout, mode)?;
        h = &h + &(&n * &sz).scale(params.chi(mode));
    }
    Ok(h)
}

/// `(Omega_R/2) sigma_x + sum_i (eps_i a_i^dag e^{-i s_i Delta t} + h.c.)`.
pub fn drive_hamiltonian(t: f64, params: &SystemParams, drives: &DriveParams) -> Result<Operator> {
    let layout = &params.layout;
    let mut h = qubit_op(layout, Pauli::X)?.scale(0.5 * params.omega_rabi);
    for mode in Mode::BOTH {
        let (a, _) = mode_ops(layout, mode)?;
        let phase = C64::new(0.0, -drives.sign(mode).exponent() * drives.detuning * t).exp();
        let c = drives.eps(mode) * phase;
        let term = &a.adjoint().scale(c) + &a.scale(c.conj());
        h = &h + &term;
    }
    Ok(h)
}

/// `sum_i chi_i (abar_i sigma_+ a_i + abar_i^* sigma_- a_i^dag)` with the
/// qubit operators acting on the dressed basis.
pub fn effective_jc_hamiltonian(params: &SystemParams, abar_m: C64, abar_r: C64) -> Result<Operator> {
    let layout = &params.layout;
    let sp = qubit_op(layout, Pauli::Plus)?;
    let mut h = Operator::zeros(layout);
    for (mode, abar) in [(Mode::Memory, abar_m), (Mode::Readout, abar_r)] {
        let (a, _) = mode_ops(layout, mode)?;
        let jc = (&sp * &a).scale(params.chi(mode) * abar);
        h = &h + &(&jc + &jc.adjoint());
    }
    Ok(h)
}

/// Resonant part of the sideband-induced term `chi (alpha a^dag + h.c.) sigma_z`
/// in the dressed interaction picture, for frame amplitude `abar` of a
/// sideband with the given sign.
///
/// Red sidebands give the Jaynes-Cummings exchange
/// `-chi (abar^* sigma_+ a + h.c.)`; blue sidebands the anti-Jaynes-Cummings
/// term `-chi (abar sigma_+ a^dag + h.c.)`.
pub fn effective_sideband_term(
    params: &SystemParams,
    mode: Mode,
    abar: C64,
    sign: SidebandSign,
) -> Result<Operator> {
    let layout = &params.layout;
    let sp = qubit_op(layout, Pauli::Plus)?;
    let (a, _) = mode_ops(layout, mode)?;
    let chi = params.chi(mode);
    let raising = match sign {
        SidebandSign::Red => (&sp * &a).scale(-chi * abar.conj()),
        SidebandSign::Blue => (&sp * &a.adjoint()).scale(-chi * abar),
    };
    Ok(&raising + &raising.adjoint())
}

/// Effective Jaynes-Cummings amplitude equivalent to a red-sideband frame
/// amplitude: [`effective_jc_hamiltonian`] with this value equals
/// [`effective_sideband_term`] for [`SidebandSign::Red`].
pub fn effective_amplitude(frame_abar: C64) -> C64 {
    -frame_abar.conj()
}

/// Constant `sum_i chi_i |abar_i|^2`; the qubit's Stark shift is twice this.
pub fn stark_coefficient(params: &SystemParams, drives: &DriveParams) -> f64 {
    Mode::BOTH
        .iter()
        .map(|&m| params.chi(m) * drives.steady_amplitude(params, m).norm_sqr())
        .sum()
}

/// Columns are the dressed states `|->`, `|+>` in the bare (g, e) basis.
pub fn dressed_basis() -> DMatrix<C64> {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    DMatrix::from_row_slice(2, 2, &[s, s, -s, s])
}

/// The perfectly calibrated pi/2 pulse mapping `|->` to `|g>` and `|+>` to `|e>`.
pub fn unmapping_pulse() -> DMatrix<C64> {
    dressed_basis().adjoint()
}

/// Qubit unitary `B^dag exp(+i Omega sigma_x t / 2)` taking a displaced-frame
/// state into effective-frame coordinates.
pub fn dressed_frame_unitary(omega_rabi: f64, t: f64) -> DMatrix<C64> {
    let x = pauli(Pauli::X).to_dense();
    let rot = (x * C64::new(0.0, 0.5 * omega_rabi * t)).exp();
    dressed_basis().adjoint() * rot
}

/// Displacement of the two modes by `(-alpha_m, -alpha_r)` on the full layout.
fn frame_displacement(layout: &SpaceLayout, alpha_m: C64, alpha_r: C64) -> Result<DMatrix<C64>> {
    let dm = displacement(-alpha_m, layout.dim(MEMORY)?)?;
    let dr = displacement(-alpha_r, layout.dim(READOUT)?)?;
    let u = embed(&dm, layout, MEMORY)?.try_mul(&embed(&dr, layout, READOUT)?)?;
    Ok(u.to_dense())
}

fn check_layout(state: &DensityMatrix) -> Result<()> {
    if state.layout().len() != 3 || state.layout().dims()[QUBIT] != 2 {
        return Err(Error::InvalidParams("frame maps need a (qubit, memory, readout) state".into()));
    }
    Ok(())
}

/// `U(t) rho U^dag(t)` with `U(t) = D_m(-abar_m e^{i Omega t}) D_r(-abar_r e^{i Omega t})`.
pub fn displaced_frame_map(
    state: &DensityMatrix,
    abar_m: C64,
    abar_r: C64,
    omega_rabi: f64,
    t: f64,
) -> Result<DensityMatrix> {
    check_layout(state)?;
    let phase = C64::new(0.0, omega_rabi * t).exp();
    let u = frame_displacement(state.layout(), abar_m * phase, abar_r * phase)?;
    state.transform(&u)
}

/// Inverse of [`displaced_frame_map`].
pub fn displaced_frame_unmap(
    state: &DensityMatrix,
    abar_m: C64,
    abar_r: C64,
    omega_rabi: f64,
    t: f64,
) -> Result<DensityMatrix> {
    displaced_frame_map(state, -abar_m, -abar_r, omega_rabi, t)
}

/// Unitary taking rotating-lab coordinates to effective-frame coordinates
/// at time `t`: displacement by the classical amplitudes, then the Rabi
/// interaction picture in the dressed basis.
pub fn lab_to_effective_unitary(
    layout: &SpaceLayout,
    params: &SystemParams,
    drives: &DriveParams,
    t: f64,
) -> Result<DMatrix<C64>> {
    let am = drives.classical_amplitude(params, Mode::Memory, t);
    let ar = drives.classical_amplitude(params, Mode::Readout, t);
    let u = frame_displacement(layout, am, ar)?;
    let v = qubit_unitary(layout, &dressed_frame_unitary(drives.detuning, t))?;
    Ok(v * u)
}

/// Maps a rotating-lab state to effective-frame coordinates.
pub fn lab_to_effective(
    state: &DensityMatrix,
    params: &SystemParams,
    drives: &DriveParams,
    t: f64,
) -> Result<DensityMatrix> {
    check_layout(state)?;
    state.transform(&lab_to_effective_unitary(state.layout(), params, drives, t)?)
}

/// Inverse of [`lab_to_effective`].
pub fn effective_to_lab(
    state: &DensityMatrix,
    params: &SystemParams,
    drives: &DriveParams,
    t: f64,
) -> Result<DensityMatrix> {
    check_layout(state)?;
    state.transform(&lab_to_effective_unitary(state.layout(), params, drives, t)?.adjoint())
}

/// A 2x2 qubit unitary embedded on the full layout, as a dense matrix.
pub fn qubit_unitary(layout: &SpaceLayout, u: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let q = Operator::from_dense(SpaceLayout::single(2, "qubit")?, u)?;
    Ok(embed(&q, layout, QUBIT)?.to_dense())
}

/// The unmapping gate as it acts on effective-frame coordinates at time `t`:
/// the pi/2 pulse composed with the return from the Rabi interaction
/// picture. Diagonal, so it only rephases dressed-state coherences.
pub fn effective_gate(detuning: f64, t: f64) -> DMatrix<C64> {
    let full = unmapping_pulse() * dressed_frame_unitary(detuning, t).adjoint();
    // Off-diagonal rounding noise would break charge conservation.
    DMatrix::from_diagonal(&full.diagonal())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::DensityMatrix;
    use nalgebra::DVector;

    fn small_params(memory: usize, readout: usize) -> SystemParams {
        SystemParams::device().with_layout(SpaceLayout::qubit_memory_readout(memory, readout).unwrap())
    }

    fn basis_expectation(h: &Operator, layout: &SpaceLayout, levels: &[usize]) -> f64 {
        let i = layout.compose(levels);
        h.matrix().get(i, i).re
    }

    #[test]
    fn device_values() {
        let p = SystemParams::device();
        p.validate().unwrap();
        assert!((2.0 * p.chi_m / crate::HZ_TO_RAD_PER_US - 57e3).abs() < 1e-6);
        assert!((p.kappa_m - 5.88e-3).abs() < 1e-5);
        assert!((p.dephasing_rate() - 0.03).abs() < 1e-12);
    }

    #[test]
    fn t2_above_twice_t1_is_rejected() {
        let mut p = SystemParams::device();
        p.t2_echo_q = 60.0;
        assert!(matches!(p.validate(), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn dispersive_eigenstructure() {
        let p = small_params(4, 3);
        let h = dispersive_hamiltonian(&p).unwrap();
        assert!(h.is_hermitian());
        assert_eq!(basis_expectation(&h, &p.layout, &[1, 0, 0]), 0.0);
        assert_eq!(basis_expectation(&h, &p.layout, &[0, 0, 0]), 0.0);
        assert!((basis_expectation(&h, &p.layout, &[1, 1, 0]) - p.chi_m).abs() < 1e-15);
        assert!((basis_expectation(&h, &p.layout, &[0, 1, 0]) + p.chi_m).abs() < 1e-15);
        // qubit-conditioned memory frequencies differ by 2 chi_m = 2 pi 57 kHz
        let split = basis_expectation(&h, &p.layout, &[1, 1, 0]) - basis_expectation(&h, &p.layout, &[0, 1, 0]);
        assert!((split / crate::HZ_TO_RAD_PER_US - 57e3).abs() < 1e-6);
    }

    #[test]
    fn drive_hamiltonian_limits() {
        let mut p = small_params(3, 3);
        p.omega_rabi = 0.0;
        let off = DriveParams { detuning: 1.0, ..DriveParams::off(&p) };
        assert_eq!(drive_hamiltonian(0.3, &p, &off).unwrap().matrix().nnz(), 0);

        let p = small_params(3, 3);
        let rabi_only = DriveParams::off(&p);
        let h = drive_hamiltonian(0.0, &p, &rabi_only).unwrap();
        let ev = h.hermitian_eigenvalues();
        assert!((ev[0] + 0.5 * p.omega_rabi).abs() < 1e-9);
        assert!((ev[ev.len() - 1] - 0.5 * p.omega_rabi).abs() < 1e-9);
        // dressed splitting equals the 9 MHz sideband resonance condition
        assert!(((ev[ev.len() - 1] - ev[0]) / crate::HZ_TO_RAD_PER_US - 9e6).abs() < 1e-3);

        let drives = DriveParams::from_amplitudes(&p, C64::new(0.7, 0.2), C64::new(0.3, 0.0));
        for t in [0.0, 0.013, 0.4] {
            assert!(drive_hamiltonian(t, &p, &drives).unwrap().hermiticity_error() < 1e-12);
        }
    }

    #[test]
    fn sideband_amplitude_examples() {
        let zero = sideband_amplitude(C64::new(0.0, 0.0), 10.0, 1.0);
        assert_eq!(zero.exact, C64::new(0.0, 0.0));
        let unit = sideband_amplitude(C64::new(5.0, 0.0), 5.0, 0.0);
        assert!((unit.exact.norm() - 1.0).abs() < 1e-15);
        assert!((unit.exact.arg() + std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let p = SystemParams::device();
        let abar = p.kappa_r / (2.0 * p.chi_m);
        assert!((abar - 6.70).abs() < 0.01, "abar = {abar}");
        let eps = abar * p.omega_rabi;
        assert!((eps / crate::HZ_TO_RAD_PER_US / 1e6 - 60.3).abs() < 0.1);
    }

    #[test]
    fn sideband_relative_difference_identity() {
        for (omega, kappa) in [(50.0, 2.4), (10.0, 3.0), (1.0, 0.1)] {
            let s = sideband_amplitude(C64::new(1.3, -0.4), omega, kappa);
            assert!((s.relative_difference - kappa / (2.0 * omega)).abs() < 1e-14);
        }
    }

    #[test]
    fn steady_amplitude_round_trip_and_magnitude() {
        let abar = C64::new(1.2, -0.3);
        for sign in [SidebandSign::Red, SidebandSign::Blue] {
            let eps = eps_for_amplitude(abar, sign, 56.0, 2.4);
            assert!((steady_state_amplitude(eps, sign, 56.0, 2.4) - abar).norm() < 1e-14);
            // agrees in magnitude with the textbook expression
            assert!((sideband_amplitude(eps, 56.0, 2.4).exact.norm() - abar.norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn effective_jc_structure() {
        let p = small_params(4, 3);
        let zero = effective_jc_hamiltonian(&p, C64::new(0.0, 0.0), C64::new(0.0, 0.0)).unwrap();
        assert_eq!(zero.matrix().nnz(), 0);
        let abar = C64::new(1.5, 0.0);
        let h = effective_jc_hamiltonian(&p, abar, C64::new(0.0, 0.0)).unwrap();
        assert!(h.is_hermitian());
        let lo = p.layout.compose(&[0, 1, 0]);
        let hi = p.layout.compose(&[1, 0, 0]);
        let g = h.matrix().get(hi, lo);
        assert!((g.re - p.chi_m * 1.5).abs() < 1e-15);
        let block = nalgebra::DMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), g, g.conj(), C64::new(0.0, 0.0)]);
        let ev = block.symmetric_eigenvalues();
        let mut ev: Vec<f64> = ev.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[1] - p.chi_m * 1.5).abs() < 1e-14 && (ev[0] + p.chi_m * 1.5).abs() < 1e-14);
    }

    #[test]
    fn half_kappa_coupling_swap_time() {
        let p = SystemParams::device();
        let g = p.kappa_r / 2.0;
        assert!((g / crate::HZ_TO_RAD_PER_US / 1e6 - 0.191).abs() < 1e-9);
        let swap = std::f64::consts::PI / (2.0 * g);
        assert!((swap - 1.31).abs() < 0.005, "swap = {swap}");
    }

    #[test]
    fn red_sideband_term_matches_effective_jc() {
        let p = small_params(4, 3);
        let abar = C64::new(0.8, 0.6);
        let from_frame = effective_sideband_term(&p, Mode::Memory, abar, SidebandSign::Red).unwrap();
        let jc = effective_jc_hamiltonian(&p, effective_amplitude(abar), C64::new(0.0, 0.0)).unwrap();
        assert!((from_frame.to_dense() - jc.to_dense()).norm() < 1e-15);
    }

    #[test]
    fn displaced_frame_identity_and_round_trip() {
        let layout = SpaceLayout::qubit_memory_readout(30, 3).unwrap();
        let q = DensityMatrix::diagonal(SpaceLayout::single(2, "qubit").unwrap(), &[0.6, 0.4]).unwrap();
        let m = DensityMatrix::thermal_state(0.3, 30).unwrap();
        let r = DensityMatrix::fock_state(0, 3).unwrap();
        let rho = DensityMatrix::product(layout, &[&q, &m, &r]).unwrap();
        let same = displaced_frame_map(&rho, C64::new(0.0, 0.0), C64::new(0.0, 0.0), 5.0, 0.2).unwrap();
        assert!((same.matrix() - rho.matrix()).norm() < 1e-14);
        let abar = C64::new(2.0, 0.0);
        let mapped = displaced_frame_map(&rho, abar, C64::new(0.0, 0.0), 5.0, 0.37).unwrap();
        let back = displaced_frame_unmap(&mapped, abar, C64::new(0.0, 0.0), 5.0, 0.37).unwrap();
        assert!((back.matrix() - rho.matrix()).norm() < 1e-8);
    }

    #[test]
    fn rotating_coherent_state_maps_to_vacuum() {
        let layout = SpaceLayout::qubit_memory_readout(30, 2).unwrap();
        let (omega, t, abar) = (3.0, 0.41, C64::new(1.5, 0.5));
        let alpha = abar * C64::new(0.0, omega * t).exp();
        let q = DensityMatrix::fock_state(0, 2).unwrap();
        let m = DensityMatrix::coherent_state(alpha, 30).unwrap();
        let r = DensityMatrix::fock_state(0, 2).unwrap();
        let rho = DensityMatrix::product(layout, &[&q, &m, &r]).unwrap();
        let mapped = displaced_frame_map(&rho, abar, C64::new(0.0, 0.0), omega, t).unwrap();
        let vac = mapped.partial_trace(MEMORY).unwrap().populations()[0];
        assert!((vac - 1.0).abs() < 1e-9, "vacuum population {vac}");
    }

    #[test]
    fn unmapping_pulse_takes_dressed_ground_to_bare_ground() {
        let minus = dressed_basis().column(0).into_owned();
        let out = unmapping_pulse() * minus;
        assert!((out - DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)])).norm() < 1e-15);
    }

    #[test]
    fn validity_flags() {
        let p = SystemParams::device();
        let v = p.validity(None);
        assert!(v.effective_model_valid);
        assert!(v.rabi_over_chi_m > 300.0);
        assert_eq!(v.below_anharmonicity, Some(true));
        let mut slow = p.clone();
        slow.omega_rabi = 5.0 * p.chi_r;
        assert!(!slow.validity(None).effective_model_valid);
    }
}
