//! Lindblad master equation on dense density matrices with sparse operators.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::integrator::{Dopri5, OdeSystem, Tolerances};
use super::trajectory::{ObservableSet, Trajectory};
use crate::hilbert::{embed, pauli, DensityMatrix, Operator, Pauli, SpaceLayout, SparseMatrix, QUBIT};
use crate::model::{FrameTag, Mode, SystemParams};
use crate::{Error, Result};

/// Time-dependent scalar multiplying a Hamiltonian term.
pub type Coefficient = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

#[derive(Clone)]
pub struct HamiltonianTerm {
    pub op: Operator,
    /// `None` for a constant term.
    pub coeff: Option<Coefficient>,
}

impl HamiltonianTerm {
    pub fn coefficient(&self, t: f64) -> C64 {
        self.coeff.as_ref().map_or(C64::new(1.0, 0.0), |c| c(t))
    }
}

/// `H(t) = sum_k c_k(t) H_k`, tagged with the frame it is written in.
#[derive(Clone)]
pub struct Hamiltonian {
    frame: FrameTag,
    layout: SpaceLayout,
    terms: Vec<HamiltonianTerm>,
}

impl fmt::Debug for Hamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Hamiltonian")
            .field("frame", &self.frame)
            .field("dims", &self.layout.dims())
            .field("terms", &self.terms.len())
            .finish()
    }
}

impl Hamiltonian {
    pub fn new(frame: FrameTag, layout: SpaceLayout) -> Self {
        Hamiltonian { frame, layout, terms: Vec::new() }
    }

    pub fn constant(frame: FrameTag, op: Operator) -> Self {
        let mut h = Self::new(frame, op.layout().clone());
        h.terms.push(HamiltonianTerm { op, coeff: None });
        h
    }

    pub fn frame(&self) -> FrameTag {
        self.frame
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn terms(&self) -> &[HamiltonianTerm] {
        &self.terms
    }

    fn check(&self, op: &Operator) -> Result<()> {
        if op.layout() != &self.layout {
            return Err(Error::DimensionMismatch { expected: self.layout.total_dim(), found: op.dim() });
        }
        Ok(())
    }

    pub fn add_constant(&mut self, op: Operator) -> Result<()> {
        self.check(&op)?;
        if op.matrix().nnz() > 0 {
            self.terms.push(HamiltonianTerm { op, coeff: None });
        }
        Ok(())
    }

    pub fn add_term(&mut self, op: Operator, coeff: impl Fn(f64) -> C64 + Send + Sync + 'static) -> Result<()> {
        self.check(&op)?;
        if op.matrix().nnz() > 0 {
            self.terms.push(HamiltonianTerm { op, coeff: Some(Arc::new(coeff)) });
        }
        Ok(())
    }

    /// Adds `c(t) op + conj(c(t)) op^dag`, Hermitian by construction.
    pub fn add_hermitian_pair(
        &mut self,
        op: Operator,
        coeff: impl Fn(f64) -> C64 + Send + Sync + 'static,
    ) -> Result<()> {
        let c: Coefficient = Arc::new(coeff);
        let c2 = c.clone();
        let dag = op.adjoint();
        self.add_term(op, move |t| c(t))?;
        self.add_term(dag, move |t| c2(t).conj())
    }

    /// Sum of two Hamiltonians written in the same frame.
    pub fn try_add(&self, other: &Hamiltonian) -> Result<Hamiltonian> {
        if self.frame != other.frame {
            return Err(Error::FrameMismatch { left: self.frame.to_string(), right: other.frame.to_string() });
        }
        if self.layout != other.layout {
            return Err(Error::DimensionMismatch {
                expected: self.layout.total_dim(),
                found: other.layout.total_dim(),
            });
        }
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        Ok(out)
    }

    /// The operator at time `t`.
    pub fn at(&self, t: f64) -> Operator {
        let mut acc = Operator::zeros(&self.layout);
        for term in &self.terms {
            acc = &acc + &term.op.scale(term.coefficient(t));
        }
        acc
    }
}

/// Jump operators with their rates.
#[derive(Clone, Debug, Default)]
pub struct CollapseSet {
    entries: Vec<(String, Operator, f64)>,
}

impl CollapseSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: &str, op: Operator, rate: f64) -> Result<()> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::InvalidParams(format!("collapse rate for {name} must be >= 0, got {rate}")));
        }
        self.entries.push((name.to_string(), op, rate));
        Ok(())
    }

    pub fn with(mut self, name: &str, op: Operator, rate: f64) -> Result<Self> {
        self.push(name, op, rate)?;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &Operator, f64)> {
        self.entries.iter().map(|(n, o, r)| (n.as_str(), o, *r))
    }

    pub fn rate(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.0 == name).map(|e| e.2)
    }

    /// `sqrt(rate) L` for every entry with a nonzero rate.
    pub fn scaled_operators(&self) -> Vec<Operator> {
        self.entries
            .iter()
            .filter(|e| e.2 > 0.0)
            .map(|(_, op, rate)| op.scale(rate.sqrt()))
            .collect()
    }
}

fn add_mode_dissipators(set: &mut CollapseSet, params: &SystemParams) -> Result<()> {
    let layout = &params.layout;
    for mode in Mode::BOTH {
        let dim = layout.dim(mode.slot())?;
        let a = embed(&crate::hilbert::annihilation(dim)?, layout, mode.slot())?;
        let (kappa, nth) = (params.kappa(mode), params.bath_nbar(mode));
        let name = match mode {
            Mode::Memory => "memory",
            Mode::Readout => "readout",
        };
        set.push(&format!("{name}-decay"), a.clone(), kappa * (nth + 1.0))?;
        if nth > 0.0 {
            set.push(&format!("{name}-excitation"), a.adjoint(), kappa * nth)?;
        }
    }
    Ok(())
}

fn check_coherence_times(params: &SystemParams) -> Result<()> {
    if params.t2_echo_q > 2.0 * params.t1_q {
        return Err(Error::InvalidParams(format!(
            "T2 = {} us exceeds 2 T1 = {} us",
            params.t2_echo_q,
            2.0 * params.t1_q
        )));
    }
    if !(params.t1_q > 0.0) || !(params.t2_echo_q > 0.0) {
        return Err(Error::InvalidParams("T1 and T2 must be positive".into()));
    }
    Ok(())
}

/// Mode decay (with optional thermal baths), qubit relaxation and pure
/// dephasing in the bare qubit basis.
pub fn collapse_operators(params: &SystemParams) -> Result<CollapseSet> {
    check_coherence_times(params)?;
    let mut set = CollapseSet::new();
    add_mode_dissipators(&mut set, params)?;
    let layout = &params.layout;
    set.push("qubit-relaxation", embed(&pauli(Pauli::Minus), layout, QUBIT)?, 1.0 / params.t1_q)?;
    set.push("qubit-dephasing", embed(&pauli(Pauli::Z), layout, QUBIT)?, params.dephasing_rate() / 2.0)?;
    Ok(set)
}

/// Qubit noise seen by the dressed qubit in the effective frame, keeping only
/// secular terms: relaxation and dephasing each split into dressed lowering,
/// raising and dephasing channels.
pub fn dressed_collapse_operators(params: &SystemParams) -> Result<CollapseSet> {
    check_coherence_times(params)?;
    let mut set = CollapseSet::new();
    add_mode_dissipators(&mut set, params)?;
    let layout = &params.layout;
    let (g1, gphi) = (1.0 / params.t1_q, params.dephasing_rate());
    let flip = 0.25 * g1 + 0.5 * gphi;
    set.push("dressed-lowering", embed(&pauli(Pauli::Minus), layout, QUBIT)?, flip)?;
    set.push("dressed-raising", embed(&pauli(Pauli::Plus), layout, QUBIT)?, flip)?;
    set.push("dressed-dephasing", embed(&pauli(Pauli::Z), layout, QUBIT)?, 0.25 * g1)?;
    Ok(set)
}

/// Values of `m` laid out on the sparsity `pattern` (which must contain it).
fn aligned_values(pattern: &SparseMatrix, m: &SparseMatrix) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); pattern.nnz()];
    for (i, j, v) in m.iter() {
        let (lo, hi) = (pattern.indptr[i], pattern.indptr[i + 1]);
        let k = lo + pattern.indices[lo..hi].binary_search(&j).expect("pattern covers operator");
        out[k] += v;
    }
    out
}

/// `out[:, c] = A y[:, c]` for column-major `n x n` `y`.
fn sparse_times_dense(indptr: &[usize], indices: &[usize], values: &[C64], n: usize, y: &[C64], out: &mut [C64]) {
    for c in 0..n {
        let col = &y[c * n..(c + 1) * n];
        let dst = &mut out[c * n..(c + 1) * n];
        for i in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for p in indptr[i]..indptr[i + 1] {
                acc += values[p] * col[indices[p]];
            }
            dst[i] = acc;
        }
    }
}

/// Master-equation right-hand side for a dense density matrix.
pub struct DenseLindblad {
    n: usize,
    pattern: SparseMatrix,
    /// `-i H_k` on the pattern.
    term_values: Vec<Vec<C64>>,
    coeffs: Vec<Option<Coefficient>>,
    /// `-1/2 sum L^dag L` on the pattern.
    anti: Vec<C64>,
    jumps: Vec<SparseMatrix>,
    scratch: RefCell<(Vec<C64>, Vec<C64>, Vec<C64>, Vec<C64>)>,
}

impl DenseLindblad {
    pub fn new(h: &Hamiltonian, collapse: &CollapseSet) -> Result<Self> {
        let n = h.layout().total_dim();
        let jumps: Vec<SparseMatrix> = collapse.scaled_operators().iter().map(|o| o.matrix().clone()).collect();
        for j in &jumps {
            if j.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: j.dim() });
            }
        }
        let mut anti = SparseMatrix::zeros(n);
        for j in &jumps {
            anti = anti.add(&j.adjoint().mul(j));
        }
        let anti = anti.scale(C64::new(-0.5, 0.0));
        let mut entries = BTreeSet::new();
        for term in h.terms() {
            entries.extend(term.op.matrix().iter().map(|(i, j, _)| (i, j)));
        }
        entries.extend(anti.iter().map(|(i, j, _)| (i, j)));
        let pattern = SparseMatrix::from_triplets(
            n,
            entries.into_iter().map(|(i, j)| (i, j, C64::new(1.0, 0.0))).collect(),
        );
        let minus_i = C64::new(0.0, -1.0);
        let term_values = h
            .terms()
            .iter()
            .map(|t| aligned_values(&pattern, &t.op.matrix().scale(minus_i)))
            .collect();
        let coeffs = h.terms().iter().map(|t| t.coeff.clone()).collect();
        let anti = aligned_values(&pattern, &anti);
        let nnz = pattern.nnz();
        Ok(DenseLindblad {
            n,
            pattern,
            term_values,
            coeffs,
            anti,
            jumps,
            scratch: RefCell::new((
                vec![C64::new(0.0, 0.0); nnz],
                vec![C64::new(0.0, 0.0); n * n],
                vec![C64::new(0.0, 0.0); n * n],
                vec![C64::new(0.0, 0.0); n * n],
            )),
        })
    }
}

impl OdeSystem for DenseLindblad {
    fn len(&self) -> usize {
        self.n * self.n
    }

    /// Acts on the Hermitian part of `y`, for which `x + x^dag` is exact;
    /// the anti-Hermitian rounding residue would otherwise grow.
    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) {
        let n = self.n;
        let mut guard = self.scratch.borrow_mut();
        let (g, x, w, herm) = &mut *guard;
        for c in 0..n {
            for i in 0..n {
                herm[i + c * n] = 0.5 * (y[i + c * n] + y[c + i * n].conj());
            }
        }
        let y = &herm[..];
        g.copy_from_slice(&self.anti);
        for (vals, c) in self.term_values.iter().zip(&self.coeffs) {
            let c = c.as_ref().map_or(C64::new(1.0, 0.0), |f| f(t));
            for (gv, v) in g.iter_mut().zip(vals) {
                *gv += c * v;
            }
        }
        sparse_times_dense(&self.pattern.indptr, &self.pattern.indices, g, n, y, x);
        for c in 0..n {
            for i in 0..n {
                dy[i + c * n] = x[i + c * n] + x[c + i * n].conj();
            }
        }
        for l in &self.jumps {
            // L rho L^dag = L (L rho)^dag for Hermitian rho
            sparse_times_dense(&l.indptr, &l.indices, &l.data, n, y, x);
            for c in 0..n {
                for j in 0..n {
                    w[j + c * n] = x[c + j * n].conj();
                }
            }
            for c in 0..n {
                let col = &w[c * n..(c + 1) * n];
                for i in 0..n {
                    let mut acc = C64::new(0.0, 0.0);
                    for p in l.indptr[i]..l.indptr[i + 1] {
                        acc += l.data[p] * col[l.indices[p]];
                    }
                    dy[i + c * n] += acc;
                }
            }
        }
    }
}

/// Named intervals the integration is split into, so that steps never cross
/// an envelope kink.
#[derive(Clone, Debug, PartialEq)]
pub struct Segmentation {
    /// `(start, name)`, sorted by start.
    pub boundaries: Vec<(f64, String)>,
}

impl Segmentation {
    pub fn single(name: &str) -> Self {
        Segmentation { boundaries: vec![(f64::NEG_INFINITY, name.to_string())] }
    }

    pub(crate) fn pieces(&self, t0: f64, t1: f64) -> Vec<(f64, f64, String)> {
        let mut out = Vec::new();
        for (k, (start, name)) in self.boundaries.iter().enumerate() {
            let end = self.boundaries.get(k + 1).map_or(f64::INFINITY, |b| b.0);
            let (a, b) = (start.max(t0), end.min(t1));
            if b > a {
                out.push((a, b, name.clone()));
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct EvolveOptions {
    pub tol: Tolerances,
    pub store_states: bool,
    pub segmentation: Segmentation,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions { tol: Tolerances::default(), store_states: false, segmentation: Segmentation::single("evolve") }
    }
}

impl EvolveOptions {
    pub fn with_tol(tol: Tolerances) -> Self {
        EvolveOptions { tol, ..Default::default() }
    }

    pub fn storing_states(mut self) -> Self {
        self.store_states = true;
        self
    }
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidParams("at least one sample time is required".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParams("sample times must be strictly increasing".into()));
    }
    Ok(())
}

/// Integrates the master equation from `times[0]`, recording observables
/// (and optionally states) at every entry of `times`.
pub fn evolve(
    rho0: &DensityMatrix,
    h: &Hamiltonian,
    collapse: &CollapseSet,
    times: &[f64],
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    check_times(times)?;
    if rho0.layout() != h.layout() {
        return Err(Error::DimensionMismatch { expected: h.layout().total_dim(), found: rho0.dim() });
    }
    let sys = DenseLindblad::new(h, collapse)?;
    let layout = rho0.layout().clone();
    let observables = ObservableSet::standard(&layout)?;
    let mut traj = Trajectory::new(h.frame(), observables.columns());
    let n = rho0.dim();
    let mut y: Vec<C64> = rho0.matrix().as_slice().to_vec();
    let record = |t: f64, y: &[C64], traj: &mut Trajectory| -> Result<()> {
        let m = DMatrix::from_column_slice(n, n, y);
        let values = observables.evaluate(&m);
        let state = if opts.store_states {
            Some(DensityMatrix::from_matrix_unchecked(layout.clone(), m)?)
        } else {
            None
        };
        traj.push(t, values, state)
    };
    record(times[0], &y, &mut traj)?;
    let mut stepper = Dopri5::new(y.len(), opts.tol);
    for (a, b, name) in opts.segmentation.pieces(times[0], *times.last().unwrap()) {
        stepper.integrate(&sys, a, b, &mut y, times, &name, |t, y| record(t, y, &mut traj))?;
    }
    traj.stats = stepper.stats();
    traj.final_state = Some(DensityMatrix::from_matrix_unchecked(layout.clone(), DMatrix::from_column_slice(n, n, &y))?);
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{annihilation, number};

    fn mode_layout(dim: usize) -> SpaceLayout {
        SpaceLayout::single(dim, "mode").unwrap()
    }

    #[test]
    fn coherent_decay_matches_closed_form() {
        let dim = 25;
        let layout = mode_layout(dim);
        let kappa = 0.7;
        let alpha = C64::new(1.5, 0.8);
        let rho0 = DensityMatrix::coherent_state(alpha, dim).unwrap();
        let h = Hamiltonian::new(FrameTag::RotatingLab, layout.clone());
        let c = CollapseSet::new().with("decay", annihilation(dim).unwrap(), kappa).unwrap();
        let times: Vec<f64> = (0..=10).map(|i| 0.3 * i as f64).collect();
        let traj = evolve(&rho0, &h, &c, &times, &EvolveOptions::default()).unwrap();
        let n0 = rho0.expectation(&number(dim).unwrap()).unwrap().re;
        for (t, nbar) in traj.times.iter().zip(traj.column("nbar_mode").unwrap()) {
            assert!((nbar - n0 * (-kappa * t).exp()).abs() < 1e-7, "t = {t}");
        }
        assert!(traj.max_trace_drift < 1e-8);
        let purity = traj.column("purity").unwrap();
        assert!(purity.iter().all(|&p| p <= purity[0] + 1e-9));
    }

    #[test]
    fn qubit_relaxation_closed_form() {
        let mut p = SystemParams::device().with_layout(SpaceLayout::qubit_memory_readout(2, 2).unwrap());
        p.t2_echo_q = 2.0 * p.t1_q;
        let all = collapse_operators(&p).unwrap();
        assert_eq!(all.rate("qubit-dephasing"), Some(0.0));
        let relax = all.entries().find(|e| e.0 == "qubit-relaxation").unwrap().1.clone();
        let c = CollapseSet::new().with("relax", relax, 1.0 / p.t1_q).unwrap();
        let e = DensityMatrix::fock_state(1, 2).unwrap();
        let v = DensityMatrix::fock_state(0, 2).unwrap();
        let rho0 = DensityMatrix::product(p.layout.clone(), &[&e, &v, &v]).unwrap();
        let h = Hamiltonian::new(FrameTag::RotatingLab, p.layout.clone());
        let times: Vec<f64> = (0..=8).map(|i| 5.0 * i as f64).collect();
        let traj = evolve(&rho0, &h, &c, &times, &EvolveOptions::default()).unwrap();
        for (t, sz) in traj.times.iter().zip(traj.column("sigma_z").unwrap()) {
            assert!((sz - (2.0 * (-t / p.t1_q).exp() - 1.0)).abs() < 1e-8);
        }
    }

    #[test]
    fn closed_system_keeps_purity() {
        let p = SystemParams::device().with_layout(SpaceLayout::qubit_memory_readout(6, 2).unwrap());
        let h = crate::model::effective_jc_hamiltonian(&p, C64::new(3.0, 1.0), C64::new(0.5, 0.0)).unwrap();
        let h = Hamiltonian::constant(FrameTag::EffectiveJc, h);
        let q = DensityMatrix::fock_state(1, 2).unwrap();
        let m = DensityMatrix::fock_state(2, 6).unwrap();
        let r = DensityMatrix::fock_state(0, 2).unwrap();
        let rho0 = DensityMatrix::product(p.layout.clone(), &[&q, &m, &r]).unwrap();
        let times: Vec<f64> = (0..=20).map(|i| 0.5 * i as f64).collect();
        let opts = EvolveOptions { tol: Tolerances::with_rtol(1e-11), ..Default::default() };
        let traj = evolve(&rho0, &h, &CollapseSet::new(), &times, &opts).unwrap();
        for purity in traj.column("purity").unwrap() {
            assert!((purity - 1.0).abs() < 1e-8, "purity {purity}");
        }
    }

    #[test]
    fn collapse_rates_from_device() {
        let p = SystemParams::device().with_layout(SpaceLayout::qubit_memory_readout(3, 3).unwrap());
        let c = collapse_operators(&p).unwrap();
        assert!((c.rate("qubit-dephasing").unwrap() - 0.015).abs() < 1e-12);
        assert!((c.rate("memory-decay").unwrap() - 1.0 / 170.0).abs() < 1e-15);
        let mut bad = p.clone();
        bad.t2_echo_q = 51.0;
        assert!(matches!(collapse_operators(&bad), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn mixing_frames_is_an_error() {
        let layout = mode_layout(3);
        let a = Hamiltonian::new(FrameTag::RotatingLab, layout.clone());
        let b = Hamiltonian::new(FrameTag::EffectiveJc, layout);
        assert!(matches!(a.try_add(&b), Err(Error::FrameMismatch { .. })));
    }

    #[test]
    fn hermitian_pair_is_hermitian_at_all_times() {
        let layout = mode_layout(4);
        let mut h = Hamiltonian::new(FrameTag::RotatingLab, layout);
        h.add_hermitian_pair(annihilation(4).unwrap(), |t| C64::new(0.0, 2.0 * t).exp() * 0.7).unwrap();
        for t in [0.0, 0.3, 1.7] {
            assert!(h.at(t).hermiticity_error() < 1e-12);
        }
    }
}
