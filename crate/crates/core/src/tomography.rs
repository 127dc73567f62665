//! Wigner characteristic function sampling, photon-number extraction from
//! its curvature at the origin, and least-squares state reconstruction.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hilbert::fock::{displacement_diagonal, projected_displacement};
use crate::hilbert::{DensityMatrix, SpaceLayout};
use crate::{Error, Result};

/// Default threshold on `C` for the curvature fit.
pub const DEFAULT_THRESHOLD: f64 = 0.8;
/// Threshold band whose endpoints set the reported uncertainty.
pub const THRESHOLD_BAND: (f64, f64) = (0.7, 0.85);
pub const DEFAULT_MAX_ALPHA: f64 = 1.0;
pub const DEFAULT_POINTS: usize = 41;
/// Fewest points above threshold accepted by [`extract_nbar`].
pub const MIN_FIT_POINTS: usize = 5;
const RIDGE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Real,
    Imaginary,
    Custom,
}

impl Axis {
    fn classify(alpha: C64) -> Axis {
        if alpha.im == 0.0 {
            Axis::Real
        } else if alpha.re == 0.0 {
            Axis::Imaginary
        } else {
            Axis::Custom
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CharPoint {
    pub alpha: C64,
    pub value: C64,
    pub axis: Axis,
}

/// How the real- and imaginary-axis cuts are combined into one profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisReducer {
    #[default]
    RealPart,
    Modulus,
}

impl AxisReducer {
    fn apply(self, z: C64) -> f64 {
        match self {
            AxisReducer::RealPart => z.re,
            AxisReducer::Modulus => z.norm(),
        }
    }
}

/// Sampled values of the characteristic function.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CharSamples {
    points: Vec<CharPoint>,
}

impl CharSamples {
    /// Builds samples from `(alpha, C(alpha))` pairs; the axis of each point is
    /// inferred (the origin counts as real-axis).
    pub fn from_pairs(pairs: impl IntoIterator<Item = (C64, C64)>) -> Result<Self> {
        let points: Vec<CharPoint> =
            pairs.into_iter().map(|(alpha, value)| CharPoint { alpha, value, axis: Axis::classify(alpha) }).collect();
        let s = CharSamples { points };
        s.check_origin()?;
        Ok(s)
    }

    fn check_origin(&self) -> Result<()> {
        for p in &self.points {
            if p.alpha == C64::new(0.0, 0.0) && (p.value - 1.0).norm() > 1e-9 {
                return Err(Error::InvalidState(format!("C(0) = {} instead of 1", p.value)));
            }
        }
        Ok(())
    }

    pub fn points(&self) -> &[CharPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn axes(&self) -> Vec<Axis> {
        let mut out = Vec::new();
        for p in &self.points {
            if !out.contains(&p.axis) {
                out.push(p.axis);
            }
        }
        out
    }

    pub fn value_at_origin(&self) -> Option<C64> {
        self.points.iter().find(|p| p.alpha == C64::new(0.0, 0.0)).map(|p| p.value)
    }

    /// Largest sampled `|alpha|`.
    pub fn max_radius(&self) -> f64 {
        self.points.iter().map(|p| p.alpha.norm()).fold(0.0, f64::max)
    }

    /// Profile along the axes: for every signed coordinate `r`, the reduced
    /// value averaged over the real-axis point `r` and the imaginary-axis point
    /// `i r` (whichever are present). Sorted by `r`.
    pub fn axis_profile(&self, reducer: AxisReducer) -> Vec<(f64, f64)> {
        let mut acc: Vec<(f64, f64, usize)> = Vec::new();
        for p in &self.points {
            let r = match p.axis {
                Axis::Real => p.alpha.re,
                Axis::Imaginary => p.alpha.im,
                Axis::Custom => continue,
            };
            let v = reducer.apply(p.value);
            match acc.iter_mut().find(|(x, _, _)| (x - r).abs() < 1e-12) {
                Some(e) => {
                    e.1 += v;
                    e.2 += 1;
                }
                None => acc.push((r, v, 1)),
            }
        }
        acc.sort_by(|a, b| a.0.total_cmp(&b.0));
        acc.into_iter().map(|(r, s, n)| (r, s / n as f64)).collect()
    }

    /// CSV with columns `re_alpha, im_alpha, re_C, im_C`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["re_alpha", "im_alpha", "re_C", "im_C"])?;
        for p in &self.points {
            wr.write_record(&[
                p.alpha.re.to_string(),
                p.alpha.im.to_string(),
                p.value.re.to_string(),
                p.value.im.to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            re_alpha: f64,
            im_alpha: f64,
            #[serde(rename = "re_C")]
            re_c: f64,
            #[serde(rename = "im_C")]
            im_c: f64,
        }
        let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let mut pairs = Vec::new();
        for row in rd.deserialize() {
            let row: Row = row?;
            pairs.push((C64::new(row.re_alpha, row.im_alpha), C64::new(row.re_c, row.im_c)));
        }
        Self::from_pairs(pairs)
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

fn require_single_mode(rho: &DensityMatrix) -> Result<usize> {
    if rho.layout().len() != 1 {
        return Err(Error::InvalidState(format!(
            "expected a single-mode state, got {} subsystems; take a partial trace first",
            rho.layout().len()
        )));
    }
    Ok(rho.dim())
}

fn warn_truncation(alpha: C64, dim: usize) {
    if alpha.norm_sqr() > 0.5 * dim as f64 {
        log::warn!("|alpha|^2 = {:.3} approaches the truncation dimension {dim}", alpha.norm_sqr());
    }
}

/// `C(alpha) = Tr[rho D(alpha)]` for a single-mode state.
///
/// Uses the matrix elements of the untruncated displacement operator, so the
/// value is exact for any state supported on the truncated space.
pub fn characteristic_function(rho: &DensityMatrix, alpha: C64) -> Result<C64> {
    let dim = require_single_mode(rho)?;
    warn_truncation(alpha, dim);
    let d = projected_displacement(alpha, dim);
    let m = rho.matrix();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..dim {
        for j in 0..dim {
            acc += m[(j, i)] * d[i * dim + j];
        }
    }
    Ok(acc)
}

/// `C(alpha)` of a state diagonal in the Fock basis with populations `pops`.
/// Real and depends on `|alpha|` only.
pub fn characteristic_from_populations(pops: &[f64], alpha: C64) -> f64 {
    displacement_diagonal(alpha, pops.len()).iter().zip(pops).map(|(d, p)| d * p).sum()
}

/// Closed form for a thermal state: `exp(-(nbar + 1/2) |alpha|^2)`.
pub fn thermal_characteristic(nbar: f64, alpha: C64) -> f64 {
    (-(nbar + 0.5) * alpha.norm_sqr()).exp()
}

/// `d^2 C / d alpha d alpha*` at the origin, computed from the operator
/// identity `-Tr[rho (a^dag a + 1/2)]`.
pub fn origin_curvature(rho: &DensityMatrix) -> Result<f64> {
    require_single_mode(rho)?;
    Ok(-rho.populations().iter().enumerate().map(|(n, p)| p * (n as f64 + 0.5)).sum::<f64>())
}

/// Mean photon number from the mixed second derivative of `C` at the origin.
pub fn nbar_from_curvature(curvature: f64) -> f64 {
    -curvature - 0.5
}

/// `n_points` values from `-max` to `max`; forced odd so zero is included.
fn symmetric_grid(max_alpha: f64, n_points: usize) -> Vec<f64> {
    let n = n_points | 1;
    let half = (n / 2) as f64;
    (0..n).map(|k| max_alpha * (k as f64 - half) / half).collect()
}

fn axis_points(max_alpha: f64, n_points: usize) -> Result<Vec<(C64, Axis)>> {
    if n_points < 5 {
        return Err(Error::InvalidParams(format!("need at least 5 points per axis, got {n_points}")));
    }
    if !(max_alpha > 0.0) || !max_alpha.is_finite() {
        return Err(Error::InvalidParams(format!("max_alpha must be positive, got {max_alpha}")));
    }
    let grid = symmetric_grid(max_alpha, n_points);
    let mut out: Vec<(C64, Axis)> = grid.iter().map(|&r| (C64::new(r, 0.0), Axis::Real)).collect();
    out.extend(grid.iter().map(|&r| (C64::new(0.0, r), Axis::Imaginary)));
    Ok(out)
}

/// Samples `C` on symmetric grids along the real and imaginary axes, both
/// including the origin. An even `n_points` is rounded up to the next odd
/// number.
pub fn sample_axes(rho: &DensityMatrix, max_alpha: f64, n_points: usize) -> Result<CharSamples> {
    require_single_mode(rho)?;
    sample_axes_with(|a| characteristic_function(rho, a), max_alpha, n_points)
}

/// As [`sample_axes`] for an arbitrary characteristic function.
pub fn sample_axes_with<F>(f: F, max_alpha: f64, n_points: usize) -> Result<CharSamples>
where
    F: Fn(C64) -> Result<C64> + Sync,
{
    let grid = axis_points(max_alpha, n_points)?;
    let points = grid
        .into_par_iter()
        .map(|(alpha, axis)| Ok(CharPoint { alpha, value: f(alpha)?, axis }))
        .collect::<Result<Vec<_>>>()?;
    let s = CharSamples { points };
    s.check_origin()?;
    Ok(s)
}

/// Samples `C` on a square `n_points x n_points` grid over
/// `[-max_alpha, max_alpha]^2`. Axis-only samples cannot separate the Fock
/// diagonal from coherences `rho_{n, n+4k}`, so reconstruction wants a grid.
pub fn sample_grid(rho: &DensityMatrix, max_alpha: f64, n_points: usize) -> Result<CharSamples> {
    require_single_mode(rho)?;
    let axis = axis_points(max_alpha, n_points)?;
    let grid: Vec<f64> = axis.iter().filter(|p| p.1 == Axis::Real).map(|p| p.0.re).collect();
    let alphas: Vec<C64> = grid.iter().flat_map(|&x| grid.iter().map(move |&y| C64::new(x, y))).collect();
    let points = alphas
        .into_par_iter()
        .map(|alpha| Ok(CharPoint { alpha, value: characteristic_function(rho, alpha)?, axis: Axis::classify(alpha) }))
        .collect::<Result<Vec<_>>>()?;
    let s = CharSamples { points };
    s.check_origin()?;
    Ok(s)
}

/// Radius at which a monotonically decaying radial profile `f` first drops
/// to `level`, found by bisection on `[0, r_max]`.
pub fn radius_at_level<F: Fn(f64) -> f64>(f: F, level: f64, r_max: f64) -> f64 {
    // Profiles of truncated states oscillate far out, so bracket the first
    // crossing by stepping outward before bisecting.
    let (mut lo, mut hi) = (0.0, 1e-3_f64.min(r_max));
    while f(hi) > level {
        if hi >= r_max {
            return r_max;
        }
        lo = hi;
        hi = (hi * 1.1).min(r_max);
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Grid half-width giving several points inside the fit band: twice the
/// radius where the radial profile first drops to the lower band edge,
/// capped at [`DEFAULT_MAX_ALPHA`]. Partly cooled states plateau well above
/// zero, so a lower level would over-widen the grid.
pub fn suggested_max_alpha<F: Fn(f64) -> f64>(radial: F) -> f64 {
    (2.0 * radius_at_level(radial, THRESHOLD_BAND.0, 10.0)).min(DEFAULT_MAX_ALPHA)
}

/// Photon number estimate from the curvature of `C` near the origin.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NbarEstimate {
    pub nbar: f64,
    /// Half the spread of the estimates at the two band thresholds.
    pub uncertainty: f64,
    pub threshold: f64,
    pub points_used: usize,
    /// Fitted value of `C` at the origin (1 for clean data).
    pub intercept: f64,
}

/// Fits `C` against `x = |alpha|^2` on the points with `Re C > threshold`.
///
/// The fit is a cubic in `x` with a free intercept; `nbar = -(c1 / c0 + 1/2)`.
/// A straight line through `C = 1` is biased by several percent at these
/// thresholds, because `C` already bends visibly before it drops to 0.7.
fn fit_curvature(samples: &CharSamples, threshold: f64) -> Result<(f64, usize, f64)> {
    let kept: Vec<(f64, f64)> = samples
        .points()
        .iter()
        .filter(|p| p.value.re > threshold)
        .map(|p| (p.alpha.norm_sqr(), p.value.re))
        .collect();
    let mut distinct: Vec<f64> = kept.iter().map(|k| k.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    if kept.len() < MIN_FIT_POINTS || distinct.len() < 3 {
        return Err(insufficient(samples, threshold, kept.len()));
    }
    let degree = (distinct.len() - 1).min(3);
    let c = polyfit(&kept, degree)?;
    if c[0] <= 0.0 {
        return Err(Error::FitFailure(format!("non-positive intercept {}", c[0])));
    }
    Ok((-(c[1] / c[0] + 0.5), kept.len(), c[0]))
}

fn insufficient(samples: &CharSamples, threshold: f64, found: usize) -> Error {
    // Estimate the decay from the innermost non-origin sample to suggest a grid.
    let inner = samples
        .points()
        .iter()
        .filter(|p| p.alpha.norm() > 0.0 && p.value.re > 0.0 && p.value.re < 1.0)
        .min_by(|a, b| a.alpha.norm().total_cmp(&b.alpha.norm()));
    let per_axis = samples.points().iter().filter(|p| p.axis == Axis::Real).count().max(5);
    let hint = match inner {
        Some(p) => {
            let k = -p.value.re.ln() / p.alpha.norm_sqr();
            let r_th = ((1.0 / threshold).ln() / k).sqrt();
            // Three points per half axis inside the threshold radius.
            format!("; use max_alpha <= {:.4} with {per_axis} points per axis", r_th / 3.0 * ((per_axis / 2) as f64))
        }
        None => String::from("; reduce max_alpha"),
    };
    Error::InsufficientData(format!(
        "{found} points above threshold {threshold}, need at least {MIN_FIT_POINTS}{hint}"
    ))
}

/// Least-squares polynomial `sum c_k x^k` of the given degree.
fn polyfit(data: &[(f64, f64)], degree: usize) -> Result<Vec<f64>> {
    let scale = data.iter().map(|d| d.0.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let a = DMatrix::from_fn(data.len(), degree + 1, |i, k| (data[i].0 / scale).powi(k as i32));
    let b = DVector::from_iterator(data.len(), data.iter().map(|d| d.1));
    let svd = a.svd(true, true);
    let c = svd.solve(&b, 1e-12).map_err(|e| Error::FitFailure(e.to_string()))?;
    Ok(c.iter().enumerate().map(|(k, v)| v / scale.powi(k as i32)).collect())
}

/// Extracts the mean photon number from samples near the origin.
///
/// The estimate uses `threshold`; the uncertainty is half the spread between
/// the estimates at the [`THRESHOLD_BAND`] endpoints (when those have enough
/// points).
pub fn extract_nbar(samples: &CharSamples, threshold: f64) -> Result<NbarEstimate> {
    if !(0.0..1.0).contains(&threshold) {
        return Err(Error::InvalidParams(format!("threshold {threshold} outside [0, 1)")));
    }
    let (nbar, points_used, intercept) = fit_curvature(samples, threshold)?;
    let mut band = vec![nbar];
    for t in [THRESHOLD_BAND.0, THRESHOLD_BAND.1] {
        if let Ok((n, _, _)) = fit_curvature(samples, t) {
            band.push(n);
        }
    }
    let lo = band.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = band.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(NbarEstimate { nbar, uncertainty: 0.5 * (hi - lo), threshold, points_used, intercept })
}

/// `<0|rho|0>` of a single-mode state.
pub fn vacuum_probability(rho: &DensityMatrix) -> Result<f64> {
    require_single_mode(rho)?;
    Ok(rho.matrix()[(0, 0)].re)
}

#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub state: DensityMatrix,
    /// RMS of `|C_model - C_sample|` over the samples, after projection.
    pub residual: f64,
    /// Fewer independent equations than unknowns.
    pub underdetermined: bool,
    pub rank: usize,
}

/// Real parameters of a Hermitian `dim x dim` matrix: the diagonal, then
/// `(re, im)` of every upper off-diagonal element.
fn hermitian_from_params(p: &[f64], dim: usize) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(dim, dim);
    for n in 0..dim {
        m[(n, n)] = C64::new(p[n], 0.0);
    }
    let mut k = dim;
    for i in 0..dim {
        for j in i + 1..dim {
            let z = C64::new(p[k], p[k + 1]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    m
}

/// Least-squares estimate of a single-mode state from characteristic samples.
///
/// Solves the ridge-regularized normal equations over a Hermitian
/// parametrization of the truncated density matrix, then projects onto the
/// physical states by clipping negative eigenvalues and renormalizing.
pub fn reconstruct_state(samples: &CharSamples, dim: usize) -> Result<Reconstruction> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim });
    }
    if samples.is_empty() {
        return Err(Error::InsufficientData("no samples".into()));
    }
    let np = dim * dim;
    let rows = 2 * samples.len();
    let mut a = DMatrix::<f64>::zeros(rows, np);
    let mut b = DVector::<f64>::zeros(rows);
    for (s, p) in samples.points().iter().enumerate() {
        let d = projected_displacement(p.alpha, dim);
        // C = sum_{ij} rho_ij D_ji.
        let mut row = vec![C64::new(0.0, 0.0); np];
        for n in 0..dim {
            row[n] = d[n * dim + n];
        }
        let mut k = dim;
        for i in 0..dim {
            for j in i + 1..dim {
                // rho_ij = x + iy, rho_ji = x - iy.
                row[k] = d[j * dim + i] + d[i * dim + j];
                row[k + 1] = C64::new(0.0, 1.0) * (d[j * dim + i] - d[i * dim + j]);
                k += 2;
            }
        }
        for (c, z) in row.iter().enumerate() {
            a[(2 * s, c)] = z.re;
            a[(2 * s + 1, c)] = z.im;
        }
        b[2 * s] = p.value.re;
        b[2 * s + 1] = p.value.im;
    }
    let sv = a.clone().svd(false, false).singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let rank = sv.iter().filter(|&&s| s > 1e-8 * smax).count();
    let underdetermined = rank < np;
    if underdetermined {
        log::warn!("reconstruction is under-determined: rank {rank} of {np} parameters");
    }
    let mut normal = a.transpose() * &a;
    for i in 0..np {
        normal[(i, i)] += RIDGE;
    }
    let rhs = a.transpose() * &b;
    let chol = normal.cholesky().ok_or_else(|| Error::FitFailure("normal equations not positive definite".into()))?;
    let params = chol.solve(&rhs);
    let raw = hermitian_from_params(params.as_slice(), dim);
    let layout = SpaceLayout::single(dim, "mode")?;
    let state = DensityMatrix::project_physical(layout, &raw)?;
    let mut sq = 0.0;
    for p in samples.points() {
        sq += (characteristic_function(&state, p.alpha)? - p.value).norm_sqr();
    }
    let residual = (sq / samples.len() as f64).sqrt();
    Ok(Reconstruction { state, residual, underdetermined, rank })
}
