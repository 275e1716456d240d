//! The goods cone `R^n_+` and its normal cones.
//!
//! The price cone (the dual of the goods cone) is again the nonnegative
//! orthant, so a single [`OrthantCone`] type serves both roles.

use crate::vecops::{check_dim, dot};
use crate::{Error, Result};

/// The nonnegative orthant of dimension `dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrthantCone {
    dim: usize,
}

impl OrthantCone {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("cone dimension must be at least 1".into()));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Active-set description of the normal cone `N(x̄; R^n_+)`.
///
/// A covector `z` belongs to the cone iff `z_i <= 0` on every active
/// coordinate (`x̄_i` treated as zero) and `z_i = 0` on every inactive one.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalConeDescriptor {
    base_point: Vec<f64>,
    active: Vec<bool>,
    active_tol: f64,
}

impl NormalConeDescriptor {
    pub fn base_point(&self) -> &[f64] {
        &self.base_point
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn dim(&self) -> usize {
        self.active.len()
    }

    /// Tolerance the active set was built with.
    pub fn active_tol(&self) -> f64 {
        self.active_tol
    }

    /// Indices of the active coordinates.
    pub fn active_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.active.iter().enumerate().filter(|(_, a)| **a).map(|(i, _)| i)
    }

    /// True when the base point is interior, so the cone is `{0}`.
    pub fn is_trivial(&self) -> bool {
        self.active.iter().all(|a| !a)
    }

    /// Polar pairing `<z, x - x̄>`.
    pub fn pairing(&self, z: &[f64], x: &[f64]) -> f64 {
        z.iter()
            .zip(x.iter().zip(&self.base_point))
            .map(|(zi, (xi, bi))| zi * (xi - bi))
            .sum()
    }
}

pub fn cone_contains(cone: &OrthantCone, x: &[f64], tol: f64) -> Result<bool> {
    check_dim(cone.dim, x)?;
    Ok(x.iter().all(|&xi| xi >= -tol))
}

pub fn normal_cone_at(cone: &OrthantCone, base: &[f64], active_tol: f64) -> Result<NormalConeDescriptor> {
    check_dim(cone.dim, base)?;
    if let Some((index, &value)) = base.iter().enumerate().find(|(_, &v)| v < -active_tol || !v.is_finite()) {
        return Err(Error::OutsideCone { index, value });
    }
    Ok(NormalConeDescriptor {
        base_point: base.to_vec(),
        active: base.iter().map(|&v| v <= active_tol).collect(),
        active_tol,
    })
}

pub fn normal_cone_contains(d: &NormalConeDescriptor, z: &[f64], tol: f64) -> Result<bool> {
    check_dim(d.dim(), z)?;
    Ok(z.iter().zip(&d.active).all(|(&zi, &active)| if active { zi <= tol } else { zi.abs() <= tol }))
}

/// `<z, x̄>`, which vanishes for every `z` in the normal cone.
pub fn normal_pairing_with_base(d: &NormalConeDescriptor, z: &[f64]) -> f64 {
    dot(z, &d.base_point)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cone(n: usize) -> OrthantCone {
        OrthantCone::new(n).unwrap()
    }

    #[test]
    fn membership() {
        assert!(cone_contains(&cone(2), &[0.0, 0.0], 0.0).unwrap());
        assert!(!cone_contains(&cone(2), &[1.0, -1e-3], 0.0).unwrap());
        assert!(cone_contains(&cone(3), &[1.0, 2.0, 3.0], 0.0).unwrap());
        assert!(cone_contains(&cone(2), &[1.0, -1e-3], 1e-2).unwrap());
    }

    #[test]
    fn dimension_errors() {
        assert_eq!(
            cone_contains(&cone(2), &[1.0], 0.0),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        );
        let d = normal_cone_at(&cone(2), &[1.0, 0.0], 1e-12).unwrap();
        assert!(normal_cone_contains(&d, &[0.0, 0.0, 0.0], 0.0).is_err());
        assert!(OrthantCone::new(0).is_err());
    }

    #[test]
    fn normal_cone_at_corner() {
        let d = normal_cone_at(&cone(2), &[1.0, 0.0], 1e-12).unwrap();
        assert_eq!(d.active(), &[false, true]);
        assert!(normal_cone_contains(&d, &[0.0, -5.0], 0.0).unwrap());
        assert!(!normal_cone_contains(&d, &[1.0, 0.0], 0.0).unwrap());
        assert!(!normal_cone_contains(&d, &[0.0, 1.0], 0.0).unwrap());
        assert!(normal_cone_contains(&d, &[0.0, -1.0], 0.0).unwrap());
        assert!(!normal_cone_contains(&d, &[-0.1, 0.0], 0.0).unwrap());
    }

    #[test]
    fn normal_cone_interior_and_origin() {
        let d = normal_cone_at(&cone(2), &[0.5, 0.5], 1e-12).unwrap();
        assert!(d.is_trivial());
        assert!(normal_cone_contains(&d, &[0.0, 0.0], 0.0).unwrap());
        assert!(!normal_cone_contains(&d, &[-1e-3, 0.0], 0.0).unwrap());

        let d = normal_cone_at(&cone(1), &[0.0], 1e-12).unwrap();
        assert_eq!(d.active(), &[true]);
        assert!(normal_cone_contains(&d, &[-3.0], 0.0).unwrap());
        assert!(!normal_cone_contains(&d, &[3.0], 0.0).unwrap());

        let d = normal_cone_at(&cone(2), &[0.0, 0.0], 1e-12).unwrap();
        assert!(normal_cone_contains(&d, &[-1.0, -1.0], 0.0).unwrap());
    }

    #[test]
    fn rejects_point_outside_cone() {
        assert_eq!(
            normal_cone_at(&cone(2), &[1.0, -0.5], 1e-9),
            Err(Error::OutsideCone { index: 1, value: -0.5 })
        );
        // inside the tolerance band counts as active
        let d = normal_cone_at(&cone(2), &[1.0, -1e-10], 1e-9).unwrap();
        assert_eq!(d.active(), &[false, true]);
    }
}
