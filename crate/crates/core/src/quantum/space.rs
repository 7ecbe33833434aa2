//! Factorized basis of two three-level atoms with optional motional ladders.
//!
//! Basis ordering is mixed-radix with the internal level of atom 0 as the
//! most significant digit, then atom 1, then each motional ladder in the
//! order it was declared. Internal levels are ordered `|0>, |1>, |r>`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const N_ATOMS: usize = 2;
pub const N_LEVELS: usize = 3;
pub const INTERNAL_DIM: usize = N_LEVELS * N_LEVELS;

/// Internal level of a single atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    Zero = 0,
    One = 1,
    Rydberg = 2,
}

impl Level {
    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

/// One truncated harmonic-oscillator ladder attached to an atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MotionalAxis {
    pub axis: Axis,
    pub atom: usize,
    pub fock_dim: usize,
}

impl MotionalAxis {
    pub fn new(axis: Axis, atom: usize, fock_dim: usize) -> Self {
        Self {
            axis,
            atom,
            fock_dim,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HilbertSpace {
    axes: Vec<MotionalAxis>,
    dims: Vec<usize>,
    strides: Vec<usize>,
    total_dim: usize,
}

impl HilbertSpace {
    /// Internal-only 9-dimensional space.
    pub fn internal() -> Self {
        Self::build(&[]).expect("empty axis list is always valid")
    }

    /// Same ladder (axis, fock_dim) on both atoms.
    pub fn symmetric(axis: Axis, fock_dim: usize) -> Result<Self> {
        Self::build(&[
            MotionalAxis::new(axis, 0, fock_dim),
            MotionalAxis::new(axis, 1, fock_dim),
        ])
    }

    pub fn build(axes: &[MotionalAxis]) -> Result<Self> {
        for (i, ax) in axes.iter().enumerate() {
            if ax.fock_dim == 0 {
                return Err(Error::InvalidSpace(format!(
                    "fock_dim must be >= 1 on atom {} axis {}",
                    ax.atom,
                    ax.axis.name()
                )));
            }
            if ax.atom >= N_ATOMS {
                return Err(Error::InvalidSpace(format!(
                    "atom index {} out of range",
                    ax.atom
                )));
            }
            if axes[..i]
                .iter()
                .any(|o| o.atom == ax.atom && o.axis == ax.axis)
            {
                return Err(Error::InvalidSpace(format!(
                    "duplicate ladder for atom {} axis {}",
                    ax.atom,
                    ax.axis.name()
                )));
            }
        }
        let mut dims = vec![N_LEVELS, N_LEVELS];
        dims.extend(axes.iter().map(|a| a.fock_dim));
        let mut strides = vec![1; dims.len()];
        for k in (0..dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        let total_dim = dims.iter().product();
        Ok(Self {
            axes: axes.to_vec(),
            dims,
            strides,
            total_dim,
        })
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn axes(&self) -> &[MotionalAxis] {
        &self.axes
    }

    /// Dimension of every tensor factor, internal factors first.
    pub fn factor_dims(&self) -> &[usize] {
        &self.dims
    }

    /// Product of all motional ladder dimensions.
    pub fn motional_dim(&self) -> usize {
        self.total_dim / INTERNAL_DIM
    }

    /// Position of the ladder for `(atom, axis)` among the tensor factors.
    pub fn factor_of(&self, atom: usize, axis: Axis) -> Option<usize> {
        self.axes
            .iter()
            .position(|a| a.atom == atom && a.axis == axis)
            .map(|p| p + N_ATOMS)
    }

    pub fn has_axis_on_all_atoms(&self, axis: Axis) -> bool {
        (0..N_ATOMS).all(|atom| self.factor_of(atom, axis).is_some())
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.dims.len());
        digits.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }

    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        debug_assert!(index < self.total_dim);
        self.strides
            .iter()
            .map(|s| {
                let d = index / s;
                index %= s;
                d
            })
            .collect()
    }

    /// Index of `|a b> (x) |motional_index>` where the motional index is the
    /// flattened multi-index over all ladders.
    pub fn compose(&self, a: Level, b: Level, motional_index: usize) -> usize {
        (a.index() * N_LEVELS + b.index()) * self.motional_dim() + motional_index
    }

    /// Splits a basis index into its internal (0..9) and motional parts.
    pub fn split(&self, index: usize) -> (usize, usize) {
        let m = self.motional_dim();
        (index / m, index % m)
    }

    /// Number of atoms in `|r>` for a basis index.
    pub fn rydberg_count(&self, index: usize) -> usize {
        let (internal, _) = self.split(index);
        let a = internal / N_LEVELS;
        let b = internal % N_LEVELS;
        usize::from(a == Level::Rydberg.index()) + usize::from(b == Level::Rydberg.index())
    }

    /// Flattened motional index for per-ladder Fock occupations.
    pub fn motional_index(&self, occupations: &[usize]) -> usize {
        debug_assert_eq!(occupations.len(), self.axes.len());
        occupations
            .iter()
            .zip(&self.strides[N_ATOMS..])
            .map(|(n, s)| n * s)
            .sum()
    }
}

/// The four computational two-qubit states `|00>, |01>, |10>, |11>`.
pub const COMPUTATIONAL: [(Level, Level); 4] = [
    (Level::Zero, Level::Zero),
    (Level::Zero, Level::One),
    (Level::One, Level::Zero),
    (Level::One, Level::One),
];

pub const COMPUTATIONAL_LABELS: [&str; 4] = ["00", "01", "10", "11"];
