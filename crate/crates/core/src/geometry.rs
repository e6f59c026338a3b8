//! The three product geometries the bilinear form lives on.
//!
//! - `FullSpace`: f and g both on R^n.
//! - `HalfSpace`: f on R^(n-1) identified with the boundary of the upper half
//!   space, g on R^n_+ = {y_n > 0}; the cross-distance is
//!   `sqrt(|x - y'|^2 + y_n^2)`.
//! - `CodimK`: f on R^(n-k), g on R^n with y = (y', y''), y'' the last k
//!   coordinates; the cross-distance is `sqrt(|x - y'|^2 + |y''|^2)`.
//!
//! HalfSpace is kept distinct from CodimK with k = 1 because the y-side
//! domains differ (R^n_+ vs all of R^n) even though the parameter conditions
//! coincide; the test suite asserts that coincidence.

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryKind {
    FullSpace,
    HalfSpace,
    CodimK,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Geometry {
    pub kind: GeometryKind,
    /// Ambient dimension of the y-side.
    pub n: u32,
    /// Codimension: 0 for FullSpace, 1 for HalfSpace, 1 <= k < n for CodimK.
    pub k: u32,
}

impl Geometry {
    pub fn full_space(n: u32) -> Result<Self, Error> {
        if n < 1 {
            return Err(Error::Domain("full space requires n >= 1".into()));
        }
        Ok(Geometry {
            kind: GeometryKind::FullSpace,
            n,
            k: 0,
        })
    }

    pub fn half_space(n: u32) -> Result<Self, Error> {
        if n < 2 {
            return Err(Error::Domain("half space requires n >= 2".into()));
        }
        Ok(Geometry {
            kind: GeometryKind::HalfSpace,
            n,
            k: 1,
        })
    }

    /// Codimension-k pairing. `k = 0` normalizes to `FullSpace`.
    pub fn codim(n: u32, k: u32) -> Result<Self, Error> {
        if k == 0 {
            return Self::full_space(n);
        }
        if n <= k {
            return Err(Error::Domain(format!(
                "codim-k geometry requires n > k >= 1, got n = {n}, k = {k}"
            )));
        }
        Ok(Geometry {
            kind: GeometryKind::CodimK,
            n,
            k,
        })
    }

    /// Dimension of the f-side domain.
    pub fn dim_x(&self) -> u32 {
        self.n - self.k
    }

    /// Dimension of the g-side domain (always the ambient n).
    pub fn dim_y(&self) -> u32 {
        self.n
    }

    /// Whether the y-side domain is restricted to {y_n > 0}.
    pub fn y_restricted_to_half(&self) -> bool {
        self.kind == GeometryKind::HalfSpace
    }

    /// Cross-distance between an x-side point and a y-side point.
    ///
    /// For FullSpace both live in R^n. Otherwise x pairs with the first
    /// n - k coordinates of y and the last k coordinates of y contribute
    /// directly: |x - y|^2 = |x - y'|^2 + |y''|^2.
    pub fn cross_distance(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim_x() as usize);
        debug_assert_eq!(y.len(), self.dim_y() as usize);
        let base = self.dim_x() as usize;
        let mut d2 = 0.0;
        for i in 0..base {
            let t = x[i] - y[i];
            d2 += t * t;
        }
        for &yi in &y[base..] {
            d2 += yi * yi;
        }
        d2.sqrt()
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            GeometryKind::FullSpace => "full",
            GeometryKind::HalfSpace => "half",
            GeometryKind::CodimK => "codim",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_rules() {
        assert!(Geometry::full_space(1).is_ok());
        assert!(Geometry::half_space(1).is_err());
        assert!(Geometry::half_space(2).is_ok());
        assert!(Geometry::codim(3, 3).is_err());
        assert!(Geometry::codim(3, 2).is_ok());
        // k = 0 normalizes to full space
        let g = Geometry::codim(3, 0).unwrap();
        assert_eq!(g.kind, GeometryKind::FullSpace);
    }

    #[test]
    fn dims() {
        let g = Geometry::codim(5, 2).unwrap();
        assert_eq!(g.dim_x(), 3);
        assert_eq!(g.dim_y(), 5);
        let h = Geometry::half_space(3).unwrap();
        assert_eq!(h.dim_x(), 2);
        assert_eq!(h.dim_y(), 3);
    }

    #[test]
    fn cross_distance_half_space() {
        let g = Geometry::half_space(2).unwrap();
        // x on the boundary line, y = (y_1, y_2) with y_2 > 0
        let d = g.cross_distance(&[1.0], &[1.0, 2.0]);
        assert!((d - 2.0).abs() < 1e-15);
        let d = g.cross_distance(&[0.0], &[3.0, 4.0]);
        assert!((d - 5.0).abs() < 1e-15);
    }

    #[test]
    fn cross_distance_full() {
        let g = Geometry::full_space(2).unwrap();
        let d = g.cross_distance(&[0.0, 0.0], &[3.0, 4.0]);
        assert!((d - 5.0).abs() < 1e-15);
    }
}
