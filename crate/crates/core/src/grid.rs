//! Rectangular grids in a conformal chart.
//!
//! Two chart kinds: a plain rectangle in the `z`-plane, and a log-polar
//! band `z = center + exp(s + i theta)` which is periodic in `theta` and
//! resolves a puncture (or infinity) with geometric spacing.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::meromorphic::ChartPoint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Chart {
    Rect {
        x: [f64; 2],
        y: [f64; 2],
        nx: usize,
        ny: usize,
    },
    LogPolar {
        center: [f64; 2],
        /// Range of `s = ln|z - center|`.
        s: [f64; 2],
        ns: usize,
        ntheta: usize,
        #[serde(default = "default_theta0")]
        theta0: f64,
    },
}

fn default_theta0() -> f64 {
    -std::f64::consts::PI
}

/// Node indexing is row-major: `index = j * n_first + i`, with `i` along
/// `x` (or `s`) and `j` along `y` (or `theta`).
#[derive(Debug, Clone, PartialEq)]
pub struct ChartGrid {
    chart: Chart,
}

impl ChartGrid {
    pub fn new(chart: Chart) -> crate::Result<Self> {
        let ok = match &chart {
            Chart::Rect { x, y, nx, ny } => *nx >= 2 && *ny >= 2 && x[1] > x[0] && y[1] > y[0],
            Chart::LogPolar { s, ns, ntheta, .. } => *ns >= 2 && *ntheta >= 3 && s[1] > s[0],
        };
        if !ok {
            return Err(crate::Error::InvalidArgument(format!("degenerate chart {chart:?}")));
        }
        Ok(ChartGrid { chart })
    }

    pub fn rect(x: [f64; 2], y: [f64; 2], nx: usize, ny: usize) -> crate::Result<Self> {
        Self::new(Chart::Rect { x, y, nx, ny })
    }

    pub fn log_polar(center: Complex64, s: [f64; 2], ns: usize, ntheta: usize) -> crate::Result<Self> {
        Self::new(Chart::LogPolar {
            center: [center.re, center.im],
            s,
            ns,
            ntheta,
            theta0: default_theta0(),
        })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dims(&self) -> (usize, usize) {
        match self.chart {
            Chart::Rect { nx, ny, .. } => (nx, ny),
            Chart::LogPolar { ns, ntheta, .. } => (ns, ntheta),
        }
    }

    pub fn len(&self) -> usize {
        let (n, m) = self.dims();
        n * m
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.dims().0 + i
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        let n = self.dims().0;
        (idx % n, idx / n)
    }

    /// Second axis wraps around (log-polar charts).
    pub fn is_periodic(&self) -> bool {
        matches!(self.chart, Chart::LogPolar { .. })
    }

    pub fn spacing(&self) -> (f64, f64) {
        match self.chart {
            Chart::Rect { x, y, nx, ny } => ((x[1] - x[0]) / (nx - 1) as f64, (y[1] - y[0]) / (ny - 1) as f64),
            Chart::LogPolar { s, ns, ntheta, .. } => ((s[1] - s[0]) / (ns - 1) as f64, TAU / ntheta as f64),
        }
    }

    pub fn center(&self) -> Option<Complex64> {
        match self.chart {
            Chart::Rect { .. } => None,
            Chart::LogPolar { center, .. } => Some(Complex64::new(center[0], center[1])),
        }
    }

    /// Chart coordinate `w` of a node.
    pub fn node_w(&self, i: usize, j: usize) -> Complex64 {
        let (h1, h2) = self.spacing();
        match self.chart {
            Chart::Rect { x, y, .. } => Complex64::new(x[0] + i as f64 * h1, y[0] + j as f64 * h2),
            Chart::LogPolar { s, theta0, .. } => Complex64::new(s[0] + i as f64 * h1, theta0 + j as f64 * h2),
        }
    }

    /// Map from the chart coordinate to `z`.
    pub fn z_of_w(&self, w: Complex64) -> Complex64 {
        match self.chart {
            Chart::Rect { .. } => w,
            Chart::LogPolar { center, .. } => Complex64::new(center[0], center[1]) + w.exp(),
        }
    }

    /// `dz/dw`.
    pub fn dz_dw(&self, w: Complex64) -> Complex64 {
        match self.chart {
            Chart::Rect { .. } => Complex64::new(1.0, 0.0),
            Chart::LogPolar { .. } => w.exp(),
        }
    }

    /// Evaluation point for data at chart coordinate `w`. Log-polar charts
    /// about the origin carry the continuous logarithm `w` itself.
    pub fn point_of_w(&self, w: Complex64) -> ChartPoint {
        match self.chart {
            Chart::LogPolar { center: [0.0, 0.0], .. } => ChartPoint::from_log(w),
            _ => ChartPoint::principal(self.z_of_w(w)),
        }
    }

    pub fn node_point(&self, i: usize, j: usize) -> ChartPoint {
        self.point_of_w(self.node_w(i, j))
    }

    pub fn node_z(&self, i: usize, j: usize) -> Complex64 {
        self.z_of_w(self.node_w(i, j))
    }

    /// Chart-coordinate cell area `h1 * h2`.
    pub fn cell_area(&self) -> f64 {
        let (h1, h2) = self.spacing();
        h1 * h2
    }

    /// Neighbor of `(i, j)` displaced by `(di, dj)`, respecting periodicity.
    pub fn offset(&self, i: usize, j: usize, di: isize, dj: isize) -> Option<(usize, usize)> {
        let (n, m) = self.dims();
        let ii = i as isize + di;
        if ii < 0 || ii >= n as isize {
            return None;
        }
        let jj = j as isize + dj;
        let jj = if self.is_periodic() {
            jj.rem_euclid(m as isize)
        } else if jj < 0 || jj >= m as isize {
            return None;
        } else {
            jj
        };
        Some((ii as usize, jj as usize))
    }

    /// Cells as lower-left corner indices; periodic charts include the
    /// wrap-around column of cells.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (n, m) = self.dims();
        let mj = if self.is_periodic() { m } else { m - 1 };
        (0..mj).flat_map(move |j| (0..n - 1).map(move |i| (i, j)))
    }

    /// Corner nodes of cell `(i, j)` in counter-clockwise order.
    pub fn cell_corners(&self, i: usize, j: usize) -> [(usize, usize); 4] {
        let m = self.dims().1;
        let j1 = (j + 1) % m;
        [(i, j), (i + 1, j), (i + 1, j1), (i, j1)]
    }

    /// Nodes within `layers` cells of a non-periodic boundary edge.
    pub fn is_near_boundary(&self, i: usize, j: usize, layers: usize) -> bool {
        let (n, m) = self.dims();
        let near_i = i < layers || i + layers >= n;
        let near_j = !self.is_periodic() && (j < layers || j + layers >= m);
        near_i || near_j
    }

    /// Whether the closed chart region contains `z` (rect charts only; a
    /// log-polar band contains the points whose modulus is in range).
    pub fn contains(&self, z: Complex64) -> bool {
        match self.chart {
            Chart::Rect { x, y, .. } => z.re >= x[0] && z.re <= x[1] && z.im >= y[0] && z.im <= y[1],
            Chart::LogPolar { center, s, .. } => {
                let r = (z - Complex64::new(center[0], center[1])).norm();
                r > 0.0 && r.ln() >= s[0] && r.ln() <= s[1]
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rect_nodes_and_spacing() {
        let g = ChartGrid::rect([-1.0, 1.0], [0.0, 2.0], 3, 5).unwrap();
        assert_eq!(g.len(), 15);
        assert_eq!(g.spacing(), (1.0, 0.5));
        assert_eq!(g.node_z(2, 4), Complex64::new(1.0, 2.0));
        assert_eq!(g.coords(g.index(1, 3)), (1, 3));
        assert_eq!(g.cells().count(), 2 * 4);
    }

    #[test]
    fn log_polar_wraps() {
        let g = ChartGrid::log_polar(Complex64::new(0.0, 0.0), [0.0, 1.0], 4, 8).unwrap();
        assert_eq!(g.offset(0, 7, 0, 1), Some((0, 0)));
        assert_eq!(g.offset(0, 0, -1, 0), None);
        assert_eq!(g.cells().count(), 3 * 8);
        let z = g.node_z(3, 2);
        assert!((z.norm() - 1f64.exp()).abs() < 1e-12);
        // continuous logarithm is carried through
        let p = g.node_point(3, 2);
        assert!((p.log_z - g.node_w(3, 2)).norm() < 1e-15);
    }
}
