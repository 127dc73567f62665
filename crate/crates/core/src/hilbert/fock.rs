//! Closed-form Fock-basis quantities: coherent-state amplitudes, Poisson and
//! geometric photon distributions, and matrix elements of the (untruncated)
//! displacement operator.

use num_complex::Complex64 as C64;

/// `ln(n!)` for `n = 0..len`.
pub fn ln_factorials(len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut acc = 0.0;
    for n in 0..len {
        if n > 1 {
            acc += (n as f64).ln();
        }
        out.push(acc);
    }
    out
}

/// Fock amplitudes `e^{-|a|^2/2} a^n / sqrt(n!)` of the coherent state `|a>`
/// for `n < dim`. Not renormalized.
pub fn coherent_amplitudes(alpha: C64, dim: usize) -> Vec<C64> {
    let lnf = ln_factorials(dim);
    let r = alpha.norm();
    let phase = if r > 0.0 { alpha / r } else { C64::new(1.0, 0.0) };
    (0..dim)
        .map(|n| {
            if r == 0.0 {
                return if n == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            }
            let ln_mag = -0.5 * r * r + n as f64 * r.ln() - 0.5 * lnf[n];
            phase.powu(n as u32) * ln_mag.exp()
        })
        .collect()
}

/// Poisson probabilities with the given mean for `n < dim`.
pub fn poisson_weights(mean: f64, dim: usize) -> Vec<f64> {
    if mean <= 0.0 {
        let mut w = vec![0.0; dim];
        if dim > 0 {
            w[0] = 1.0;
        }
        return w;
    }
    let lnf = ln_factorials(dim);
    (0..dim).map(|n| (-mean + n as f64 * mean.ln() - lnf[n]).exp()).collect()
}

/// Probability mass of a coherent state that lies above the truncation.
pub fn coherent_truncation_error(alpha: C64, dim: usize) -> f64 {
    let kept: f64 = poisson_weights(alpha.norm_sqr(), dim).iter().sum();
    (1.0 - kept).max(0.0)
}

/// Generalized Laguerre polynomials `L_n^{(k)}(x)` for `n = 0..count`.
fn laguerre_sequence(k: usize, x: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(1.0);
    if count == 1 {
        return out;
    }
    let kf = k as f64;
    out.push(1.0 + kf - x);
    for j in 1..count - 1 {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + kf - x) * out[j] - (jf + kf) * out[j - 1]) / (jf + 1.0);
        out.push(next);
    }
    out
}

/// Matrix `<m|D(alpha)|n>` for `m, n < dim` of the infinite-dimensional
/// displacement operator, i.e. its projection onto the truncated space
/// (as opposed to the exponential of the truncated generator).
///
/// Row-major, `out[m * dim + n]`.
pub fn projected_displacement(alpha: C64, dim: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); dim * dim];
    let x = alpha.norm_sqr();
    let r = alpha.norm();
    let lnf = ln_factorials(dim);
    let gauss = -0.5 * x;
    for k in 0..dim {
        let lag = laguerre_sequence(k, x, dim - k);
        // Unit-modulus phases of alpha^k and (-alpha*)^k.
        let (up, down) = if r > 0.0 {
            let u = alpha / r;
            (u.powu(k as u32), (-u.conj()).powu(k as u32))
        } else {
            (C64::new(1.0, 0.0), C64::new(1.0, 0.0))
        };
        for (n, &l) in lag.iter().enumerate() {
            let m = n + k;
            let value = if k == 0 {
                gauss.exp() * l
            } else if r == 0.0 || l == 0.0 {
                0.0
            } else {
                let ln_mag = 0.5 * (lnf[n] - lnf[m]) + k as f64 * r.ln() + gauss + l.abs().ln();
                l.signum() * ln_mag.exp()
            };
            out[m * dim + n] = up * value;
            if k > 0 {
                out[n * dim + m] = down * value;
            }
        }
    }
    out
}

/// `<n|D(alpha)|n>` for `n < dim`, i.e. `e^{-|a|^2/2} L_n(|a|^2)`.
pub fn displacement_diagonal(alpha: C64, dim: usize) -> Vec<f64> {
    let x = alpha.norm_sqr();
    laguerre_sequence(0, x, dim).into_iter().map(|l| (-0.5 * x).exp() * l).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coherent_amplitudes_normalize() {
        let amps = coherent_amplitudes(C64::new(1.2, -0.7), 40);
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projected_displacement_vacuum_column_is_coherent_state() {
        let alpha = C64::new(0.4, 0.9);
        let dim = 30;
        let d = projected_displacement(alpha, dim);
        let amps = coherent_amplitudes(alpha, dim);
        for m in 0..dim {
            assert!((d[m * dim] - amps[m]).norm() < 1e-13);
        }
    }

    #[test]
    fn projected_displacement_is_antihermitian_in_alpha() {
        // D(alpha)^dag = D(-alpha)
        let alpha = C64::new(-0.3, 0.5);
        let dim = 12;
        let d = projected_displacement(alpha, dim);
        let dm = projected_displacement(-alpha, dim);
        for m in 0..dim {
            for n in 0..dim {
                assert!((d[m * dim + n].conj() - dm[n * dim + m]).norm() < 1e-13);
            }
        }
    }
}
