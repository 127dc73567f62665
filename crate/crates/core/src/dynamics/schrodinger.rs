//! Closed-system propagation of state vectors.

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use super::integrator::{Dopri5, OdeSystem, StepStats, Tolerances};
use super::lindblad::{check_times, Hamiltonian};
use crate::{Error, Result};

struct Schrodinger<'a> {
    h: &'a Hamiltonian,
}

impl OdeSystem for Schrodinger<'_> {
    fn len(&self) -> usize {
        self.h.layout().total_dim()
    }

    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) {
        dy.fill(C64::new(0.0, 0.0));
        for term in self.h.terms() {
            let c = term.coefficient(t) * C64::new(0.0, -1.0);
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            for (i, j, v) in term.op.matrix().iter() {
                dy[i] += c * v * y[j];
            }
        }
    }
}

/// States `psi(t)` at every entry of `times`, starting from `psi0` at `times[0]`.
pub fn evolve_pure(
    psi0: &DVector<C64>,
    h: &Hamiltonian,
    times: &[f64],
    tol: Tolerances,
) -> Result<(Vec<DVector<C64>>, StepStats)> {
    check_times(times)?;
    if psi0.len() != h.layout().total_dim() {
        return Err(Error::DimensionMismatch { expected: h.layout().total_dim(), found: psi0.len() });
    }
    let sys = Schrodinger { h };
    let mut y: Vec<C64> = psi0.iter().copied().collect();
    let mut out = vec![psi0.clone()];
    let mut stepper = Dopri5::new(y.len(), tol);
    stepper.integrate(&sys, times[0], *times.last().unwrap(), &mut y, times, "evolve", |_, y| {
        out.push(DVector::from_column_slice(y));
        Ok(())
    })?;
    Ok((out, stepper.stats()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve, CollapseSet, EvolveOptions};
    use crate::hilbert::{annihilation, DensityMatrix, SpaceLayout};
    use crate::model::FrameTag;

    #[test]
    fn matches_density_matrix_evolution() {
        let layout = SpaceLayout::single(6, "mode").unwrap();
        let a = annihilation(6).unwrap();
        let mut h = Hamiltonian::new(FrameTag::RotatingLab, layout.clone());
        h.add_hermitian_pair(a.adjoint(), |t| C64::new(0.7 * t.cos(), 0.2)).unwrap();
        let mut psi0 = DVector::zeros(6);
        psi0[1] = C64::new(1.0, 0.0);
        let times = [0.0, 0.5, 1.0, 2.0];
        let tol = Tolerances::with_rtol(1e-10);
        let (states, _) = evolve_pure(&psi0, &h, &times, tol).unwrap();
        let rho0 = DensityMatrix::pure(layout.clone(), &psi0).unwrap();
        let traj = evolve(&rho0, &h, &CollapseSet::new(), &times, &EvolveOptions::with_tol(tol).storing_states()).unwrap();
        for (psi, rho) in states.iter().zip(&traj.states) {
            let pure = DensityMatrix::pure(layout.clone(), psi).unwrap();
            assert!(pure.fidelity(rho).unwrap() > 1.0 - 1e-9);
            assert!((psi.norm() - 1.0).abs() < 1e-9);
        }
    }
}
