use std::fmt;

use crate::error::{Error, Result};

use super::point::Point;
use super::tensor::Tensor1;

/// Tolerance for the sum-to-one check on interpolation weights.
pub const WEIGHT_SUM_TOL: f64 = 1e-10;
/// Below this norm a weighted direction average counts as degenerate.
pub const DIRECTION_TOL: f64 = 1e-10;

/// Tag attaching a geometry description to a mesh entity.
///
/// Every cell and face carries exactly one id. `FLAT` is the default and
/// stands for straight-sided geometry even when no manifold is registered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ManifoldId(pub u32);

impl ManifoldId {
    pub const FLAT: ManifoldId = ManifoldId(u32::MAX);
}

impl Default for ManifoldId {
    fn default() -> Self {
        ManifoldId::FLAT
    }
}

impl fmt::Display for ManifoldId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == ManifoldId::FLAT {
            write!(f, "flat")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Geometry oracle: places a new point as a weighted combination of existing
/// points, respecting the underlying (possibly curved) chart.
///
/// Implementations must return the input point exactly when called with a
/// single point of weight one.
pub trait Manifold<const D: usize>: Send + Sync + fmt::Debug {
    fn new_point(&self, points: &[Point<D>], weights: &[f64]) -> Result<Point<D>>;
}

/// Checks the common preconditions on `new_point` inputs.
///
/// Returns `Ok(true)` for the trivial single-point case, which callers must
/// answer with the input point verbatim.
pub fn validate_weights<const D: usize>(points: &[Point<D>], weights: &[f64]) -> Result<bool> {
    if points.is_empty() || points.len() != weights.len() {
        return Err(Error::WeightError(format!(
            "{} points with {} weights",
            points.len(),
            weights.len()
        )));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::WeightError(format!("weights sum to {sum}, not 1")));
    }
    Ok(points.len() == 1)
}

/// Straight-sided geometry: new points are affine averages.
#[derive(Clone, Copy, Debug, Default)]
pub struct FlatManifold;

impl<const D: usize> Manifold<D> for FlatManifold {
    fn new_point(&self, points: &[Point<D>], weights: &[f64]) -> Result<Point<D>> {
        if validate_weights(points, weights)? {
            return Ok(points[0]);
        }
        let mut out = Point::origin();
        for (p, &w) in points.iter().zip(weights) {
            for i in 0..D {
                out[i] += w * p[i];
            }
        }
        Ok(out)
    }
}

/// Polar (2d) or spherical (3d) geometry about a fixed center.
///
/// Averages are taken radius-first: the result lies at the weighted mean
/// radius, in the direction of the normalized weighted mean of the unit
/// directions. Points on a common circle therefore stay on that circle.
#[derive(Clone, Copy, Debug)]
pub struct PolarManifold<const D: usize> {
    pub center: Point<D>,
}

impl<const D: usize> PolarManifold<D> {
    pub fn new(center: Point<D>) -> Self {
        PolarManifold { center }
    }
}

impl<const D: usize> Manifold<D> for PolarManifold<D> {
    fn new_point(&self, points: &[Point<D>], weights: &[f64]) -> Result<Point<D>> {
        if validate_weights(points, weights)? {
            return Ok(points[0]);
        }
        let mut radius = 0.0;
        let mut direction = Tensor1::<D>::zero();
        for (p, &w) in points.iter().zip(weights) {
            let offset = *p - self.center;
            let r = offset.norm();
            if r < 1e-14 {
                return Err(Error::DegenerateDirection(0.0));
            }
            radius += w * r;
            direction += offset * (w / r);
        }
        let norm = direction.norm();
        if norm < DIRECTION_TOL {
            return Err(Error::DegenerateDirection(norm));
        }
        Ok(self.center + direction * (radius / norm))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_midpoint_and_identity() {
        let m = FlatManifold;
        let p = m
            .new_point(&[Point::new([0.0, 0.0]), Point::new([1.0, 0.0])], &[0.5, 0.5])
            .unwrap();
        assert_eq!(p.0, [0.5, 0.0]);

        let single = Point::new([0.3, 0.7]);
        assert_eq!(m.new_point(&[single], &[1.0]).unwrap(), single);
    }

    #[test]
    fn flat_four_corner_symmetry() {
        let m = FlatManifold;
        let pts = [
            Point::new([0.0, 0.0]),
            Point::new([2.0, 0.0]),
            Point::new([0.0, 2.0]),
            Point::new([2.0, 2.0]),
        ];
        let p = m.new_point(&pts, &[0.25; 4]).unwrap();
        assert_eq!(p.0, [1.0, 1.0]);
    }

    #[test]
    fn flat_rejects_bad_weights() {
        let m = FlatManifold;
        let pts = [Point::new([0.0, 0.0]), Point::new([1.0, 0.0])];
        assert!(matches!(
            m.new_point(&pts, &[0.5, 0.6]),
            Err(Error::WeightError(_))
        ));
        assert!(matches!(
            m.new_point(&pts, &[1.0]),
            Err(Error::WeightError(_))
        ));
    }

    #[test]
    fn polar_arc_midpoint() {
        let m = PolarManifold::new(Point::new([0.0, 0.0]));
        let p = m
            .new_point(&[Point::new([1.0, 0.0]), Point::new([0.0, 1.0])], &[0.5, 0.5])
            .unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((p[0] - s).abs() < 1e-15);
        assert!((p[1] - s).abs() < 1e-15);

        let q = m
            .new_point(&[Point::new([2.0, 0.0]), Point::new([0.0, 2.0])], &[0.5, 0.5])
            .unwrap();
        let r2 = std::f64::consts::SQRT_2;
        assert!((q[0] - r2).abs() < 1e-14);
        assert!((q[1] - r2).abs() < 1e-14);
    }

    #[test]
    fn polar_antipodal_is_degenerate() {
        let m = PolarManifold::new(Point::new([0.0, 0.0]));
        let res = m.new_point(&[Point::new([1.0, 0.0]), Point::new([-1.0, 0.0])], &[0.5, 0.5]);
        assert!(matches!(res, Err(Error::DegenerateDirection(_))));
    }

    #[test]
    fn polar_single_point_is_exact() {
        let m = PolarManifold::new(Point::new([0.5, 0.5]));
        let p = Point::new([1.3, 2.7]);
        assert_eq!(m.new_point(&[p], &[1.0]).unwrap(), p);
    }

    #[test]
    fn polar_weighted_radius() {
        let m = PolarManifold::new(Point::new([0.0, 0.0]));
        let p = m
            .new_point(&[Point::new([1.0, 0.0]), Point::new([0.0, 3.0])], &[0.25, 0.75])
            .unwrap();
        let r = (p - Point::origin()).norm();
        assert!((r - 2.5).abs() < 1e-12);
    }

    #[test]
    fn spherical_midpoint() {
        let m = PolarManifold::new(Point::new([0.0, 0.0, 0.0]));
        let p = m
            .new_point(
                &[Point::new([1.0, 0.0, 0.0]), Point::new([0.0, 0.0, 1.0])],
                &[0.5, 0.5],
            )
            .unwrap();
        assert!(((p - Point::origin()).norm() - 1.0).abs() < 1e-14);
        assert!((p[0] - p[2]).abs() < 1e-15);
    }
}
