use crate::error::{Error, Result};

use super::manifold::{Manifold, PolarManifold};
use super::point::Point;

/// Coordinate slack accepted before a chart coordinate counts as outside.
pub const CHART_TOL: f64 = 1e-10;

/// One boundary curve of a transfinite chart, parameterized over `[0, 1]`.
#[derive(Clone, Debug)]
pub enum EdgeCurve {
    /// Straight segment from `a` to `b`.
    Line { a: Point<2>, b: Point<2> },
    /// Circular arc from `a` to `b` about `center`, traced through the
    /// polar average of the endpoints.
    PolarArc {
        center: Point<2>,
        a: Point<2>,
        b: Point<2>,
    },
}

impl EdgeCurve {
    pub fn eval(&self, t: f64) -> Result<Point<2>> {
        match self {
            EdgeCurve::Line { a, b } => Ok(a.lerp(b, t)),
            EdgeCurve::PolarArc { center, a, b } => {
                PolarManifold::new(*center).new_point(&[*a, *b], &[1.0 - t, t])
            }
        }
    }

    pub fn start(&self) -> Point<2> {
        match self {
            EdgeCurve::Line { a, .. } | EdgeCurve::PolarArc { a, .. } => *a,
        }
    }

    pub fn end(&self) -> Point<2> {
        match self {
            EdgeCurve::Line { b, .. } | EdgeCurve::PolarArc { b, .. } => *b,
        }
    }
}

/// Transfinite interpolation chart for one coarse quadrilateral.
///
/// The four edge curves are blended into the interior, so every boundary
/// curve is reproduced exactly while interior points vary smoothly. Corner
/// order is lexicographic: `corners[0] = S(0,0)`, `corners[1] = S(1,0)`,
/// `corners[2] = S(0,1)`, `corners[3] = S(1,1)`.
#[derive(Clone, Debug)]
pub struct TransfiniteChart {
    pub south: EdgeCurve,
    pub north: EdgeCurve,
    pub west: EdgeCurve,
    pub east: EdgeCurve,
    pub corners: [Point<2>; 4],
}

impl TransfiniteChart {
    pub fn new(
        south: EdgeCurve,
        north: EdgeCurve,
        west: EdgeCurve,
        east: EdgeCurve,
        corners: [Point<2>; 4],
    ) -> Result<Self> {
        let scale = corners[0].distance(&corners[3]).max(1.0);
        let checks = [
            (south.start(), corners[0]),
            (south.end(), corners[1]),
            (north.start(), corners[2]),
            (north.end(), corners[3]),
            (west.start(), corners[0]),
            (west.end(), corners[2]),
            (east.start(), corners[1]),
            (east.end(), corners[3]),
        ];
        for (got, want) in checks {
            if got.distance(&want) > 1e-10 * scale {
                return Err(Error::InvalidInput(format!(
                    "edge curve endpoint {got:?} does not meet corner {want:?}"
                )));
            }
        }
        Ok(TransfiniteChart {
            south,
            north,
            west,
            east,
            corners,
        })
    }

    /// Gordon-Hall blend of the four edge curves at chart coordinates `uv`.
    pub fn eval(&self, uv: Point<2>) -> Result<Point<2>> {
        let (u, v) = (uv[0], uv[1]);
        if !(-CHART_TOL..=1.0 + CHART_TOL).contains(&u) || !(-CHART_TOL..=1.0 + CHART_TOL).contains(&v)
        {
            return Err(Error::ChartError { coord: [u, v] });
        }
        let u = u.clamp(0.0, 1.0);
        let v = v.clamp(0.0, 1.0);

        let cs = self.south.eval(u)?;
        let cn = self.north.eval(u)?;
        let cw = self.west.eval(v)?;
        let ce = self.east.eval(v)?;
        let [p00, p10, p01, p11] = self.corners;

        let mut out = Point::origin();
        for i in 0..2 {
            out[i] = (1.0 - v) * cs[i] + v * cn[i] + (1.0 - u) * cw[i] + u * ce[i]
                - ((1.0 - u) * (1.0 - v) * p00[i]
                    + u * (1.0 - v) * p10[i]
                    + (1.0 - u) * v * p01[i]
                    + u * v * p11[i]);
        }
        Ok(out)
    }
}

/// Flat chart over the given corner points, useful as a fallback.
pub fn bilinear_chart(corners: [Point<2>; 4]) -> TransfiniteChart {
    let [p00, p10, p01, p11] = corners;
    TransfiniteChart {
        south: EdgeCurve::Line { a: p00, b: p10 },
        north: EdgeCurve::Line { a: p01, b: p11 },
        west: EdgeCurve::Line { a: p00, b: p01 },
        east: EdgeCurve::Line { a: p10, b: p11 },
        corners,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square_chart() -> TransfiniteChart {
        bilinear_chart([
            Point::new([0.0, 0.0]),
            Point::new([1.0, 0.0]),
            Point::new([0.0, 1.0]),
            Point::new([1.0, 1.0]),
        ])
    }

    /// Quarter annulus in the first quadrant: west edge on the inner circle
    /// (radius `r0`), east edge on the outer circle (radius `r1`).
    fn quarter_annulus_chart(r0: f64, r1: f64) -> TransfiniteChart {
        let center = Point::new([0.0, 0.0]);
        let p00 = Point::new([r0, 0.0]);
        let p10 = Point::new([r1, 0.0]);
        let p01 = Point::new([0.0, r0]);
        let p11 = Point::new([0.0, r1]);
        TransfiniteChart::new(
            EdgeCurve::Line { a: p00, b: p10 },
            EdgeCurve::Line { a: p01, b: p11 },
            EdgeCurve::PolarArc { center, a: p00, b: p01 },
            EdgeCurve::PolarArc { center, a: p10, b: p11 },
            [p00, p10, p01, p11],
        )
        .unwrap()
    }

    #[test]
    fn flat_chart_is_bilinear() {
        let chart = unit_square_chart();
        let p = chart.eval(Point::new([0.5, 0.5])).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15);
        assert!((p[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn corners_are_interpolated() {
        let chart = quarter_annulus_chart(1.0, 2.0);
        let p = chart.eval(Point::new([0.0, 0.0])).unwrap();
        assert_eq!(p.coords(), &[1.0, 0.0]);
        let p = chart.eval(Point::new([1.0, 1.0])).unwrap();
        assert!(p.distance(&Point::new([0.0, 2.0])) < 1e-15);
    }

    #[test]
    fn inner_arc_midpoint_stays_on_circle() {
        let chart = quarter_annulus_chart(1.0, 2.0);
        // u = 0 is the inner-circle edge; its midpoint must sit at radius 1.
        let p = chart.eval(Point::new([0.0, 0.5])).unwrap();
        let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
        assert!((r - 1.0).abs() < 1e-12);
        assert!((p[0] - p[1]).abs() < 1e-12);
    }

    #[test]
    fn all_four_edges_interpolated() {
        let chart = quarter_annulus_chart(0.5, 1.5);
        for k in 0..=20 {
            let t = k as f64 / 20.0;
            let pairs = [
                (chart.eval(Point::new([t, 0.0])).unwrap(), chart.south.eval(t).unwrap()),
                (chart.eval(Point::new([t, 1.0])).unwrap(), chart.north.eval(t).unwrap()),
                (chart.eval(Point::new([0.0, t])).unwrap(), chart.west.eval(t).unwrap()),
                (chart.eval(Point::new([1.0, t])).unwrap(), chart.east.eval(t).unwrap()),
            ];
            for (got, want) in pairs {
                assert!(got.distance(&want) < 1e-13);
            }
        }
    }

    #[test]
    fn outside_coordinates_rejected() {
        let chart = unit_square_chart();
        assert!(matches!(
            chart.eval(Point::new([1.1, 0.5])),
            Err(Error::ChartError { .. })
        ));
        // Within tolerance is fine.
        assert!(chart.eval(Point::new([1.0 + 1e-12, 0.5])).is_ok());
    }

    #[test]
    fn mismatched_corner_rejected() {
        let p00 = Point::new([0.0, 0.0]);
        let p10 = Point::new([1.0, 0.0]);
        let p01 = Point::new([0.0, 1.0]);
        let p11 = Point::new([1.0, 1.0]);
        let res = TransfiniteChart::new(
            EdgeCurve::Line { a: p00, b: p10 },
            EdgeCurve::Line { a: p01, b: p11 },
            EdgeCurve::Line { a: p00, b: p01 },
            // East edge starts at the wrong corner.
            EdgeCurve::Line { a: p00, b: p11 },
            [p00, p10, p01, p11],
        );
        assert!(res.is_err());
    }
}
