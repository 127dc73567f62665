//! Truncated-Fock-space operator algebra.
//!
//! Composite spaces are ordered (qubit, memory, readout). The qubit basis is
//! (ground, excited); Fock bases run from the vacuum upwards. A basis index
//! of the composite space is the row-major combination of the subsystem
//! indices, with the qubit as the slowest index.

pub mod fock;
mod operator;
mod sparse;
mod state;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use operator::{
    annihilation, creation, displacement, embed, identity, number, pauli, Operator, Pauli,
};
pub use sparse::SparseMatrix;
pub use state::{hermitian_sqrt, DensityMatrix};

/// Slot of the qubit in the standard three-component layout.
pub const QUBIT: usize = 0;
/// Slot of the memory mode in the standard three-component layout.
pub const MEMORY: usize = 1;
/// Slot of the readout mode in the standard three-component layout.
pub const READOUT: usize = 2;

/// Default memory truncation for displaced-frame simulations.
pub const DEFAULT_MEMORY_DIM: usize = 30;
/// Default readout truncation for displaced-frame simulations.
pub const DEFAULT_READOUT_DIM: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceLayout {
    dims: Vec<usize>,
    labels: Vec<String>,
}

impl SpaceLayout {
    pub fn new(dims: Vec<usize>, labels: Vec<String>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidParams("a layout needs at least one subsystem".into()));
        }
        if dims.len() != labels.len() {
            return Err(Error::DimensionMismatch { expected: dims.len(), found: labels.len() });
        }
        if let Some(&dim) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidDimension { dim });
        }
        Ok(SpaceLayout { dims, labels })
    }

    pub fn single(dim: usize, label: &str) -> Result<Self> {
        Self::new(vec![dim], vec![label.to_string()])
    }

    /// The standard (qubit, memory, readout) layout with a two-level qubit.
    pub fn qubit_memory_readout(memory: usize, readout: usize) -> Result<Self> {
        Self::new(
            vec![2, memory, readout],
            vec!["qubit".into(), "memory".into(), "readout".into()],
        )
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn dim(&self, slot: usize) -> Result<usize> {
        self.dims.get(slot).copied().ok_or(Error::InvalidSlot { slot, len: self.len() })
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn slot(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Subsystem indices of a composite basis index.
    pub fn decompose(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.len()];
        for (slot, &d) in self.dims.iter().enumerate().rev() {
            out[slot] = index % d;
            index /= d;
        }
        out
    }

    pub fn compose(&self, levels: &[usize]) -> usize {
        levels.iter().zip(&self.dims).fold(0, |acc, (&l, &d)| acc * d + l)
    }
}

impl Default for SpaceLayout {
    fn default() -> Self {
        Self::qubit_memory_readout(DEFAULT_MEMORY_DIM, DEFAULT_READOUT_DIM)
            .expect("default dimensions are valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_one_level_subsystems() {
        assert!(matches!(
            SpaceLayout::qubit_memory_readout(1, 4),
            Err(Error::InvalidDimension { dim: 1 })
        ));
    }

    #[test]
    fn basis_order_is_qubit_memory_readout() {
        let layout = SpaceLayout::qubit_memory_readout(3, 4).unwrap();
        assert_eq!(layout.total_dim(), 24);
        assert_eq!(layout.labels()[QUBIT], "qubit");
        assert_eq!(layout.labels()[READOUT], "readout");
        // excited qubit, 2 memory photons, 1 readout photon
        let idx = layout.compose(&[1, 2, 1]);
        assert_eq!(idx, 12 + 2 * 4 + 1);
        assert_eq!(layout.decompose(idx), vec![1, 2, 1]);
    }
}
