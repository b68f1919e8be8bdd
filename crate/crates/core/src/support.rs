//! Support sets and the gather/scatter maps between ℝᴺ and ℝ^|S|.
//!
//! Indices are zero-based.

use nalgebra::DVector;

use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SupportSet {
    indices: Vec<usize>,
    ambient_dim: usize,
}

impl SupportSet {
    pub fn new(mut indices: Vec<usize>, ambient_dim: usize) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if let Some(&last) = indices.last() {
            if last >= ambient_dim {
                return Err(Error::param(format!(
                    "support index {last} out of range for dimension {ambient_dim}"
                )));
            }
        }
        Ok(Self {
            indices,
            ambient_dim,
        })
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self {
            indices: (0..ambient_dim).collect(),
            ambient_dim,
        }
    }

    pub fn empty(ambient_dim: usize) -> Self {
        Self {
            indices: Vec::new(),
            ambient_dim,
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.binary_search(&j).is_ok()
    }

    pub fn is_subset_of(&self, other: &SupportSet) -> bool {
        self.ambient_dim == other.ambient_dim && self.indices.iter().all(|&j| other.contains(j))
    }

    /// Complement J \ S.
    pub fn complement(&self) -> SupportSet {
        let indices = (0..self.ambient_dim).filter(|&j| !self.contains(j)).collect();
        SupportSet {
            indices,
            ambient_dim: self.ambient_dim,
        }
    }

    /// x_S.
    pub fn gather(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_len("gather", self.ambient_dim, x.len())?;
        Ok(DVector::from_iterator(
            self.len(),
            self.indices.iter().map(|&j| x[j]),
        ))
    }

    /// Embeds z ∈ ℝ^|S| into ℝᴺ with exact zeros off S.
    pub fn scatter(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        check_len("scatter", self.len(), z.len())?;
        let mut x = DVector::zeros(self.ambient_dim);
        for (k, &j) in self.indices.iter().enumerate() {
            x[j] = z[k];
        }
        Ok(x)
    }
}

/// Indices j with |x_j| > tol.
pub fn support_of(x: &DVector<f64>, tol: f64) -> SupportSet {
    let indices = x
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > tol)
        .map(|(j, _)| j)
        .collect();
    SupportSet {
        indices,
        ambient_dim: x.len(),
    }
}
