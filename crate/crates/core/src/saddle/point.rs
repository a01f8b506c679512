use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// A point `z = [x; y]` of `R^{m+n}` that remembers its block split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPoint {
    m: usize,
    n: usize,
    coords: Vec<f64>,
}

impl JointPoint {
    pub fn new(m: usize, n: usize, coords: Vec<f64>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidArgument(format!(
                "block dimensions must be positive (m={m}, n={n})"
            )));
        }
        check_dim(m + n, coords.len(), "JointPoint coords")?;
        Ok(Self { m, n, coords })
    }

    pub fn from_blocks(x: &[f64], y: &[f64]) -> Result<Self> {
        let mut coords = Vec::with_capacity(x.len() + y.len());
        coords.extend_from_slice(x);
        coords.extend_from_slice(y);
        Self::new(x.len(), y.len(), coords)
    }

    pub fn zeros(m: usize, n: usize) -> Result<Self> {
        Self::new(m, n, vec![0.0; m + n])
    }

    pub fn x(&self) -> &[f64] {
        &self.coords[..self.m]
    }

    pub fn y(&self) -> &[f64] {
        &self.coords[self.m..]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    /// `(m, n)`
    pub fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        crate::numerics::distance(&self.coords, &other.coords)
    }

    /// Largest of the blockwise distances `‖x − x'‖`, `‖y − y'‖`.
    pub fn max_block_distance(&self, other: &Self) -> f64 {
        let dx = crate::numerics::distance(self.x(), other.x());
        let dy = crate::numerics::distance(self.y(), other.y());
        dx.max(dy)
    }

    pub(crate) fn with_coords(&self, coords: Vec<f64>) -> Self {
        debug_assert_eq!(coords.len(), self.coords.len());
        Self {
            m: self.m,
            n: self.n,
            coords,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_reassemble() {
        let z = JointPoint::new(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(z.x(), &[1.0, 2.0]);
        assert_eq!(z.y(), &[3.0, 4.0, 5.0]);
        assert_eq!([z.x(), z.y()].concat(), z.coords());
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(JointPoint::new(0, 1, vec![1.0]).is_err());
        assert!(JointPoint::new(1, 1, vec![1.0]).is_err());
    }
}
