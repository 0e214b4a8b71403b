//! Uniform cell-centered meshes.

use crate::error::{Error, Result};
use crate::spectral::{DomainKind, DomainSpec};
use serde::Serialize;

/// Uniform finite-volume mesh with `n` cells per side and centers at
/// `(i + 1/2) h`. Zero-flux boundary faces make the Neumann closure exact
/// (equivalently: reflected ghost cells).
#[derive(Debug, Clone, Serialize)]
pub struct Mesh {
    pub domain: DomainSpec,
    /// Cells per side.
    pub n: usize,
    /// Cell width `L / n`.
    pub h: f64,
}

impl Mesh {
    pub fn new(domain: DomainSpec, n: usize) -> Result<Self> {
        if n < 8 {
            return Err(Error::InvalidParameter(format!(
                "mesh needs at least 8 cells per side, got {n}"
            )));
        }
        Ok(Self { domain, n, h: domain.length / n as f64 })
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn num_cells(&self) -> usize {
        match self.domain.kind {
            DomainKind::Interval => self.n,
            DomainKind::Square => self.n * self.n,
        }
    }

    /// Cell volume (length in 1D, area in 2D).
    pub fn cell_volume(&self) -> f64 {
        match self.domain.kind {
            DomainKind::Interval => self.h,
            DomainKind::Square => self.h * self.h,
        }
    }

    /// Axis coordinates of cell centers.
    pub fn axis_centers(&self) -> Vec<f64> {
        (0..self.n).map(|i| (i as f64 + 0.5) * self.h).collect()
    }

    /// Center of the flat-indexed cell as `(x, y)`; `y = 0` on intervals.
    pub fn center(&self, idx: usize) -> (f64, f64) {
        match self.domain.kind {
            DomainKind::Interval => ((idx as f64 + 0.5) * self.h, 0.0),
            DomainKind::Square => {
                let i = idx % self.n;
                let j = idx / self.n;
                ((i as f64 + 0.5) * self.h, (j as f64 + 0.5) * self.h)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centers_are_offset_half() {
        let mesh = Mesh::new(DomainSpec::interval(2.0), 8).unwrap();
        let xs = mesh.axis_centers();
        assert_eq!(xs.len(), 8);
        assert!((xs[0] - 0.125).abs() < 1e-15);
        assert!((xs[7] - 1.875).abs() < 1e-15);
    }

    #[test]
    fn rejects_tiny_grids() {
        assert!(Mesh::new(DomainSpec::interval(1.0), 4).is_err());
    }

    #[test]
    fn square_indexing_row_major() {
        let mesh = Mesh::new(DomainSpec::square(1.0), 8).unwrap();
        assert_eq!(mesh.num_cells(), 64);
        let (x, y) = mesh.center(8 + 2); // j = 1, i = 2
        assert!((x - 2.5 * mesh.h).abs() < 1e-15);
        assert!((y - 1.5 * mesh.h).abs() < 1e-15);
    }
}
