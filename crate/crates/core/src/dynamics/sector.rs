//! Master-equation solver for U(1)-covariant models.
//!
//! When every Hamiltonian term conserves a weighted excitation number
//! `N = sum_s w_s n_s` and every jump operator changes it by a definite
//! amount, the block-diagonal part of the density matrix (in `N`) evolves on
//! its own and fully determines every phase-insensitive observable. Storing
//! only those blocks turns an `O(D^2)` state into a sum of small blocks,
//! which is what makes memory truncations of several hundred photons
//! affordable.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::integrator::{Dopri5, OdeSystem};
use super::lindblad::{check_times, CollapseSet, Coefficient, EvolveOptions, Hamiltonian};
use super::trajectory::{ObservableSet, Trajectory};
use crate::hilbert::{DensityMatrix, SpaceLayout, SparseMatrix};
use crate::model::SidebandSign;
use crate::{Error, Result};

/// Basis indices grouped by charge.
#[derive(Clone, Debug)]
pub struct SectorLayout {
    layout: SpaceLayout,
    weights: Vec<i64>,
    charges: Vec<i64>,
    /// Members of every block, in increasing basis index.
    blocks: Vec<Vec<usize>>,
    /// `(block, position)` of every basis index.
    index: Vec<(usize, usize)>,
    /// Start of every block in the flat state.
    offsets: Vec<usize>,
    len: usize,
}

impl SectorLayout {
    pub fn new(layout: SpaceLayout, weights: Vec<i64>) -> Result<Self> {
        if weights.len() != layout.len() {
            return Err(Error::DimensionMismatch { expected: layout.len(), found: weights.len() });
        }
        let n = layout.total_dim();
        let charges: Vec<i64> = (0..n)
            .map(|i| layout.decompose(i).iter().zip(&weights).map(|(&l, &w)| l as i64 * w).sum())
            .collect();
        let mut by_charge: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for (i, &c) in charges.iter().enumerate() {
            by_charge.entry(c).or_default().push(i);
        }
        let mut index = vec![(0, 0); n];
        let mut offsets = Vec::new();
        let mut len = 0;
        let mut blocks = Vec::new();
        for (b, (_, members)) in by_charge.into_iter().enumerate() {
            for (p, &i) in members.iter().enumerate() {
                index[i] = (b, p);
            }
            offsets.push(len);
            len += members.len() * members.len();
            blocks.push(members);
        }
        Ok(SectorLayout { layout, weights, charges, blocks, index, offsets, len })
    }

    /// Weights for the (qubit, memory, readout) layout under which the
    /// effective sideband couplings of the given signs conserve charge.
    pub fn for_sidebands(layout: SpaceLayout, sign_m: SidebandSign, sign_r: SidebandSign) -> Result<Self> {
        let w = |s: SidebandSign| match s {
            SidebandSign::Red => 1,
            SidebandSign::Blue => -1,
        };
        Self::new(layout, vec![1, w(sign_m), w(sign_r)])
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn largest_block(&self) -> usize {
        self.blocks.iter().map(|b| b.len()).max().unwrap_or(0)
    }

    /// Number of stored complex entries.
    pub fn stored_len(&self) -> usize {
        self.len
    }

    /// The single charge shift of `op`, or [`Error::NotCovariant`].
    pub fn shift_of(&self, op: &SparseMatrix) -> Result<Option<i64>> {
        let mut shifts: Vec<i64> = op.iter().map(|(i, j, _)| self.charges[i] - self.charges[j]).collect();
        shifts.sort_unstable();
        shifts.dedup();
        match shifts.len() {
            0 => Ok(None),
            1 => Ok(Some(shifts[0])),
            _ => Err(Error::NotCovariant(shifts)),
        }
    }

    /// Dense pieces `(src, dst, matrix)` of a covariant operator, row-major
    /// `dst_size x src_size`.
    fn pieces(&self, op: &SparseMatrix) -> Result<Vec<(usize, usize, Vec<C64>)>> {
        self.shift_of(op)?;
        let mut map: BTreeMap<(usize, usize), Vec<C64>> = BTreeMap::new();
        for (i, j, v) in op.iter() {
            let (bi, pi) = self.index[i];
            let (bj, pj) = self.index[j];
            let cols = self.blocks[bj].len();
            let rows = self.blocks[bi].len();
            let m = map.entry((bj, bi)).or_insert_with(|| vec![C64::new(0.0, 0.0); rows * cols]);
            m[pi * cols + pj] += v;
        }
        Ok(map.into_iter().map(|((s, d), m)| (s, d, m)).collect())
    }
}

/// Block-diagonal density matrix over a [`SectorLayout`]. Each block is
/// stored row-major.
#[derive(Clone, Debug)]
pub struct SectorState {
    sectors: Arc<SectorLayout>,
    data: Vec<C64>,
}

impl SectorState {
    pub fn zeros(sectors: Arc<SectorLayout>) -> Self {
        let data = vec![C64::new(0.0, 0.0); sectors.len];
        SectorState { sectors, data }
    }

    /// Keeps the block-diagonal part of a dense state.
    pub fn from_dense(sectors: Arc<SectorLayout>, rho: &DensityMatrix) -> Result<Self> {
        if rho.layout() != sectors.layout() {
            return Err(Error::DimensionMismatch { expected: sectors.layout().total_dim(), found: rho.dim() });
        }
        let mut s = Self::zeros(sectors);
        let sec = s.sectors.clone();
        for (b, members) in sec.blocks.iter().enumerate() {
            let k = members.len();
            for (p, &i) in members.iter().enumerate() {
                for (q, &j) in members.iter().enumerate() {
                    s.data[sec.offsets[b] + p * k + q] = rho.matrix()[(i, j)];
                }
            }
        }
        Ok(s)
    }

    /// Product of diagonal single-slot states given by their populations.
    pub fn from_populations(sectors: Arc<SectorLayout>, populations: &[Vec<f64>]) -> Result<Self> {
        let layout = sectors.layout().clone();
        if populations.len() != layout.len() {
            return Err(Error::DimensionMismatch { expected: layout.len(), found: populations.len() });
        }
        for (p, &d) in populations.iter().zip(layout.dims()) {
            if p.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: p.len() });
            }
        }
        let mut s = Self::zeros(sectors.clone());
        for i in 0..layout.total_dim() {
            let w: f64 = layout.decompose(i).iter().enumerate().map(|(slot, &l)| populations[slot][l]).product();
            let (b, p) = sectors.index[i];
            let k = sectors.blocks[b].len();
            s.data[sectors.offsets[b] + p * k + p] = C64::new(w, 0.0);
        }
        Ok(s)
    }

    pub fn sectors(&self) -> &Arc<SectorLayout> {
        &self.sectors
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    fn block(&self, b: usize) -> &[C64] {
        let k = self.sectors.blocks[b].len();
        &self.data[self.sectors.offsets[b]..self.sectors.offsets[b] + k * k]
    }

    pub fn to_dense(&self) -> Result<DensityMatrix> {
        let sec = &self.sectors;
        let n = sec.layout.total_dim();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for (b, members) in sec.blocks.iter().enumerate() {
            let blk = self.block(b);
            let k = members.len();
            for (p, &i) in members.iter().enumerate() {
                for (q, &j) in members.iter().enumerate() {
                    m[(i, j)] = blk[p * k + q];
                }
            }
        }
        DensityMatrix::from_matrix_unchecked(sec.layout.clone(), m)
    }

    pub fn trace(&self) -> f64 {
        (0..self.sectors.blocks.len())
            .map(|b| {
                let k = self.sectors.blocks[b].len();
                let blk = self.block(b);
                (0..k).map(|p| blk[p * k + p].re).sum::<f64>()
            })
            .sum()
    }

    pub fn purity(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `Tr[O rho]`; entries of `O` between different blocks do not contribute.
    pub fn expectation(&self, op: &SparseMatrix) -> C64 {
        let sec = &self.sectors;
        let mut acc = C64::new(0.0, 0.0);
        for (i, j, v) in op.iter() {
            let (bi, pi) = sec.index[i];
            let (bj, pj) = sec.index[j];
            if bi == bj {
                let k = sec.blocks[bi].len();
                acc += v * self.data[sec.offsets[bi] + pj * k + pi];
            }
        }
        acc
    }

    /// Diagonal of the reduced state of one slot. With nonzero weights the
    /// reduced state of any single slot is diagonal.
    pub fn reduced_populations(&self, slot: usize) -> Result<Vec<f64>> {
        let sec = &self.sectors;
        let dim = sec.layout.dim(slot)?;
        let mut out = vec![0.0; dim];
        for (b, members) in sec.blocks.iter().enumerate() {
            let blk = self.block(b);
            let k = members.len();
            for (p, &i) in members.iter().enumerate() {
                out[sec.layout.decompose(i)[slot]] += blk[p * k + p].re;
            }
        }
        Ok(out)
    }

    /// `U rho U^dag` for a charge-conserving `U`.
    pub fn transform(&self, u: &SparseMatrix) -> Result<SectorState> {
        let sec = self.sectors.clone();
        if sec.shift_of(u)?.unwrap_or(0) != 0 {
            return Err(Error::NotCovariant(vec![sec.shift_of(u)?.unwrap_or(0)]));
        }
        let mut out = Self::zeros(sec.clone());
        for (src, dst, m) in sec.pieces(u)? {
            debug_assert_eq!(src, dst);
            let k = sec.blocks[src].len();
            let rho = self.block(src);
            let mut tmp = vec![C64::new(0.0, 0.0); k * k];
            matmul(&m, rho, &mut tmp, k, k, k);
            let o = &mut out.data[sec.offsets[dst]..sec.offsets[dst] + k * k];
            for i in 0..k {
                for j in 0..k {
                    let mut acc = C64::new(0.0, 0.0);
                    for l in 0..k {
                        acc += tmp[i * k + l] * m[j * k + l].conj();
                    }
                    o[i * k + j] = acc;
                }
            }
        }
        Ok(out)
    }
}

/// `c = a b` with row-major `a: r x m`, `b: m x c`.
fn matmul(a: &[C64], b: &[C64], out: &mut [C64], r: usize, m: usize, c: usize) {
    for i in 0..r {
        for j in 0..c {
            let mut acc = C64::new(0.0, 0.0);
            for l in 0..m {
                acc += a[i * m + l] * b[l * c + j];
            }
            out[i * c + j] = acc;
        }
    }
}

/// Nonzero `(row, col, value)` of an operator restricted to one block pair.
type Entries = Vec<(usize, usize, C64)>;

struct JumpPiece {
    src: usize,
    dst: usize,
    entries: Entries,
}

pub struct SectorLindblad {
    sectors: Arc<SectorLayout>,
    /// Per term, per block: nonzeros of `-i H_k`.
    terms: Vec<Vec<Entries>>,
    coeffs: Vec<Option<Coefficient>>,
    /// Per block: nonzeros of `-1/2 sum L^dag L`.
    anti: Vec<Entries>,
    jumps: Vec<JumpPiece>,
    scratch: RefCell<(Vec<C64>, Vec<C64>)>,
    /// Hermitian part of the state.
    herm: RefCell<Vec<C64>>,
}

fn nonzeros(m: &[C64], cols: usize) -> Entries {
    m.iter()
        .enumerate()
        .filter(|(_, v)| v.norm_sqr() > 0.0)
        .map(|(k, &v)| (k / cols, k % cols, v))
        .collect()
}

/// `x[i, :] += c v rho[l, :]` for every entry; `rho` has `k` columns.
fn left_multiply(entries: &Entries, c: C64, rho: &[C64], x: &mut [C64], k: usize) {
    for &(i, l, v) in entries {
        let cv = c * v;
        let src = &rho[l * k..l * k + k];
        for (xv, r) in x[i * k..i * k + k].iter_mut().zip(src) {
            *xv += cv * r;
        }
    }
}

impl SectorLindblad {
    pub fn new(sectors: Arc<SectorLayout>, h: &Hamiltonian, collapse: &CollapseSet) -> Result<Self> {
        if h.layout() != sectors.layout() {
            return Err(Error::DimensionMismatch { expected: sectors.layout().total_dim(), found: h.layout().total_dim() });
        }
        let sizes: Vec<usize> = sectors.blocks.iter().map(|m| m.len()).collect();
        let minus_i = C64::new(0.0, -1.0);
        let mut terms = Vec::new();
        for term in h.terms() {
            if sectors.shift_of(term.op.matrix())?.unwrap_or(0) != 0 {
                return Err(Error::NotCovariant(vec![sectors.shift_of(term.op.matrix())?.unwrap_or(0)]));
            }
            let mut blocks = vec![Entries::new(); sizes.len()];
            for (src, _, m) in sectors.pieces(term.op.matrix())? {
                let m: Vec<C64> = m.into_iter().map(|v| v * minus_i).collect();
                blocks[src] = nonzeros(&m, sizes[src]);
            }
            terms.push(blocks);
        }
        let coeffs = h.terms().iter().map(|t| t.coeff.clone()).collect();
        let mut anti_dense: Vec<Vec<C64>> = sizes.iter().map(|&k| vec![C64::new(0.0, 0.0); k * k]).collect();
        let mut jumps = Vec::new();
        for l in collapse.scaled_operators() {
            let ldl = l.matrix().adjoint().mul(l.matrix());
            for (src, _, m) in sectors.pieces(&ldl)? {
                for (a, v) in anti_dense[src].iter_mut().zip(m) {
                    *a += v * -0.5;
                }
            }
            for (src, dst, matrix) in sectors.pieces(l.matrix())? {
                let entries = nonzeros(&matrix, sizes[src]);
                if !entries.is_empty() {
                    jumps.push(JumpPiece { src, dst, entries });
                }
            }
        }
        let anti = anti_dense.iter().zip(&sizes).map(|(m, &k)| nonzeros(m, k)).collect();
        let big = sectors.largest_block();
        let sectors_len = sectors.len;
        Ok(SectorLindblad {
            sectors,
            terms,
            coeffs,
            anti,
            jumps,
            scratch: RefCell::new((vec![C64::new(0.0, 0.0); big * big], vec![C64::new(0.0, 0.0); big * big])),
            herm: RefCell::new(vec![C64::new(0.0, 0.0); sectors_len]),
        })
    }
}

impl OdeSystem for SectorLindblad {
    fn len(&self) -> usize {
        self.sectors.len
    }

    /// Acts on the Hermitian part of `y`. The update `x + x^dag` below is
    /// only right for Hermitian input; without the projection, rounding
    /// noise in the anti-Hermitian part is amplified by the jump terms and
    /// grows exponentially over long runs.
    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) {
        let sec = &self.sectors;
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let c: Vec<C64> = self.coeffs.iter().map(|c| c.as_ref().map_or(one, |f| f(t))).collect();
        let mut herm = self.herm.borrow_mut();
        for (b, members) in sec.blocks.iter().enumerate() {
            let k = members.len();
            let off = sec.offsets[b];
            for i in 0..k {
                for j in 0..k {
                    herm[off + i * k + j] = 0.5 * (y[off + i * k + j] + y[off + j * k + i].conj());
                }
            }
        }
        let y = &herm[..];
        let mut guard = self.scratch.borrow_mut();
        let (x, tmp) = &mut *guard;
        for (b, members) in sec.blocks.iter().enumerate() {
            let k = members.len();
            let off = sec.offsets[b];
            let rho = &y[off..off + k * k];
            let x = &mut x[..k * k];
            x.fill(zero);
            left_multiply(&self.anti[b], one, rho, x, k);
            for (term, &ck) in self.terms.iter().zip(&c) {
                if ck != zero {
                    left_multiply(&term[b], ck, rho, x, k);
                }
            }
            let d = &mut dy[off..off + k * k];
            for i in 0..k {
                for j in 0..k {
                    d[i * k + j] = x[i * k + j] + x[j * k + i].conj();
                }
            }
        }
        for piece in &self.jumps {
            let (ks, kd) = (sec.blocks[piece.src].len(), sec.blocks[piece.dst].len());
            let rho = &y[sec.offsets[piece.src]..sec.offsets[piece.src] + ks * ks];
            // tmp = L rho, kd x ks
            let tmp = &mut tmp[..kd * ks];
            tmp.fill(zero);
            left_multiply(&piece.entries, one, rho, tmp, ks);
            // d += tmp L^dag
            let d = &mut dy[sec.offsets[piece.dst]..sec.offsets[piece.dst] + kd * kd];
            for &(j, l, w) in &piece.entries {
                let wc = w.conj();
                for a in 0..kd {
                    d[a * kd + j] += tmp[a * ks + l] * wc;
                }
            }
        }
    }
}

/// Output of [`evolve_sectors`].
#[derive(Clone, Debug)]
pub struct SectorRun {
    pub trajectory: Trajectory,
    /// States at the sample times, when requested.
    pub states: Vec<SectorState>,
    pub final_state: SectorState,
}

/// Sector-resolved counterpart of [`super::evolve`].
pub fn evolve_sectors(
    state0: &SectorState,
    h: &Hamiltonian,
    collapse: &CollapseSet,
    times: &[f64],
    opts: &EvolveOptions,
) -> Result<SectorRun> {
    check_times(times)?;
    let sectors = state0.sectors.clone();
    let sys = SectorLindblad::new(sectors.clone(), h, collapse)?;
    let observables = ObservableSet::standard(sectors.layout())?;
    let mut traj = Trajectory::new(h.frame(), observables.columns());
    let mut states = Vec::new();
    let mut y = state0.data.clone();
    let record = |t: f64, y: &[C64], traj: &mut Trajectory, states: &mut Vec<SectorState>| -> Result<()> {
        let s = SectorState { sectors: sectors.clone(), data: y.to_vec() };
        let mut values: Vec<f64> = observables.operators().iter().map(|o| s.expectation(o.matrix()).re).collect();
        values.push(s.purity());
        values.push(s.trace());
        if opts.store_states {
            states.push(s);
        }
        traj.push(t, values, None)
    };
    record(times[0], &y, &mut traj, &mut states)?;
    let mut stepper = Dopri5::new(y.len(), opts.tol);
    for (a, b, name) in opts.segmentation.pieces(times[0], *times.last().unwrap()) {
        stepper.integrate(&sys, a, b, &mut y, times, &name, |t, y| record(t, y, &mut traj, &mut states))?;
    }
    traj.stats = stepper.stats();
    Ok(SectorRun { trajectory: traj, states, final_state: SectorState { sectors, data: y } })
}
