//! Immersions built from the lift: `FF*` into hyperbolic space and
//! `F e3 F*` into de Sitter space, both inside the Hermitian 2x2 matrices
//! identified with Minkowski space.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;

use crate::bryant_data::{BryantData, Target};
use crate::error::{Error, Result};
use crate::grid::ChartGrid;
use crate::meromorphic::{ChartPoint, ExtComplex};
use crate::null_lift::SL2Field;
use crate::sl2::Mat2;

const DET_TOL: f64 = 1e-8;

/// Default half-width of the excluded band `||g|^2 - 1| < band` around the
/// singular set of a de Sitter face in the pullback check. Relative
/// difference errors grow like `band^-2` as the density vanishes.
pub const DESITTER_BAND: f64 = 0.3;

/// `[[h11, h12], [conj h12, h22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HermPoint {
    pub h11: f64,
    pub h22: f64,
    pub h12: Complex64,
}

impl HermPoint {
    /// Hermitian part of a matrix that is Hermitian up to rounding.
    pub fn from_matrix(m: &Mat2) -> Self {
        HermPoint {
            h11: m.a.re,
            h22: m.d.re,
            h12: 0.5 * (m.b + m.c.conj()),
        }
    }

    pub fn det(&self) -> f64 {
        self.h11 * self.h22 - self.h12.norm_sqr()
    }

    pub fn to_matrix(&self) -> Mat2 {
        Mat2::new(
            Complex64::new(self.h11, 0.0),
            self.h12,
            self.h12.conj(),
            Complex64::new(self.h22, 0.0),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LorentzVector {
    pub x0: f64,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl LorentzVector {
    pub fn new(x0: f64, x1: f64, x2: f64, x3: f64) -> Self {
        LorentzVector { x0, x1, x2, x3 }
    }

    /// `-x0 y0 + x1 y1 + x2 y2 + x3 y3`.
    pub fn dot(&self, o: &LorentzVector) -> f64 {
        -self.x0 * o.x0 + self.x1 * o.x1 + self.x2 * o.x2 + self.x3 * o.x3
    }

    pub fn sub(&self, o: &LorentzVector) -> LorentzVector {
        LorentzVector::new(self.x0 - o.x0, self.x1 - o.x1, self.x2 - o.x2, self.x3 - o.x3)
    }

    pub fn scale(&self, s: f64) -> LorentzVector {
        LorentzVector::new(self.x0 * s, self.x1 * s, self.x2 * s, self.x3 * s)
    }
}

fn check_det(f: &Mat2) -> Result<()> {
    let drift = (f.det() - Complex64::new(1.0, 0.0)).norm();
    if drift > DET_TOL {
        return Err(Error::DeterminantDrift(drift));
    }
    Ok(())
}

/// `phi = F F*`.
pub fn to_hyperbolic(f: &Mat2) -> Result<HermPoint> {
    check_det(f)?;
    Ok(HermPoint::from_matrix(&(*f * f.adjoint())))
}

/// `F e3 F*`.
pub fn to_desitter(f: &Mat2) -> Result<HermPoint> {
    check_det(f)?;
    Ok(HermPoint::from_matrix(&(*f * Mat2::e3() * f.adjoint())))
}

pub fn immerse(f: &Mat2, target: Target) -> Result<HermPoint> {
    match target {
        Target::HyperbolicSpace => to_hyperbolic(f),
        Target::DeSitterSpace => to_desitter(f),
    }
}

/// `x0 = (h11 + h22)/2`, `x3 = (h11 - h22)/2`, `x1 + i x2 = h12`, so that
/// `<X, X> = -det X`.
pub fn herm_to_lorentz(x: &HermPoint) -> LorentzVector {
    LorentzVector::new(0.5 * (x.h11 + x.h22), x.h12.re, x.h12.im, 0.5 * (x.h11 - x.h22))
}

pub fn lorentz_to_herm(x: &LorentzVector) -> HermPoint {
    HermPoint {
        h11: x.x0 + x.x3,
        h22: x.x0 - x.x3,
        h12: Complex64::new(x.x1, x.x2),
    }
}

/// `(x1, x2, x3) / (1 + x0)`.
pub fn to_poincare_ball(x: &LorentzVector) -> Result<[f64; 3]> {
    if x.x0 <= 0.0 || (x.dot(x) + 1.0).abs() > 1e-6 * (1.0 + x.x0 * x.x0) {
        return Err(Error::NotHyperbolic);
    }
    let s = 1.0 / (1.0 + x.x0);
    Ok([x.x1 * s, x.x2 * s, x.x3 * s])
}

/// Evaluation point of a grid node, on a branch continuous over the chart.
pub fn node_point(grid: &ChartGrid, i: usize, j: usize) -> ChartPoint {
    match grid.chart() {
        crate::grid::Chart::Rect { x, y, .. } => {
            let mid = Complex64::new(0.5 * (x[0] + x[1]), 0.5 * (y[0] + y[1]));
            ChartPoint::with_cut(grid.node_z(i, j), mid.arg() + std::f64::consts::PI)
        }
        crate::grid::Chart::LogPolar { .. } => grid.node_point(i, j),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PullbackReport {
    pub max_rel_residual: f64,
    pub checked_nodes: usize,
    /// Nodes dropped near the singular set `|g| = 1` of a de Sitter face.
    pub excluded_nodes: usize,
}

/// Compare the first fundamental form of the immersed grid, by second-order
/// central differences, with the closed-form metric density. Nodes with
/// `||g|^2 - 1| < band` are excluded for de Sitter data.
pub fn pullback_metric_check(field: &SL2Field, data: &BryantData, band: f64) -> Result<PullbackReport> {
    let grid = &field.grid;
    let (n, m) = grid.dims();
    let (h1, h2) = grid.spacing();
    let pts: Vec<LorentzVector> = field
        .values
        .par_iter()
        .map(|f| immerse(f, data.target()).map(|p| herm_to_lorentz(&p)))
        .collect::<Result<_>>()?;
    let seam_ok = field.seam_jump.is_none_or(|s| s < 1e-8);
    let results: Vec<Option<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (i, j) = grid.coords(idx);
            if i == 0 || i + 1 >= n {
                return None;
            }
            let (jm, jp) = if grid.is_periodic() {
                if !seam_ok && (j == 0 || j + 1 == m) {
                    return None;
                }
                ((j + m - 1) % m, (j + 1) % m)
            } else {
                if j == 0 || j + 1 >= m {
                    return None;
                }
                (j - 1, j + 1)
            };
            let p = node_point(grid, i, j);
            if data.target() == Target::DeSitterSpace {
                match data.g().eval_at(p) {
                    ExtComplex::Finite(g) if (g.norm_sqr() - 1.0).abs() >= band => {}
                    _ => return Some(f64::NAN),
                }
            }
            let xu = pts[grid.index(i + 1, j)].sub(&pts[grid.index(i - 1, j)]).scale(0.5 / h1);
            let xv = pts[grid.index(i, jp)].sub(&pts[grid.index(i, jm)]).scale(0.5 / h2);
            let expected = data.metric_density(p) * grid.dz_dw(grid.node_w(i, j)).norm_sqr();
            let r = ((xu.dot(&xu) - expected).abs())
                .max((xv.dot(&xv) - expected).abs())
                .max(xu.dot(&xv).abs())
                / expected;
            Some(r)
        })
        .collect();
    let excluded_nodes = results.iter().flatten().filter(|r| r.is_nan()).count();
    let valid: Vec<f64> = results.into_iter().flatten().filter(|r| !r.is_nan()).collect();
    if valid.is_empty() {
        return Err(Error::Empty("pullback check has no interior nodes"));
    }
    Ok(PullbackReport {
        max_rel_residual: valid.iter().cloned().fold(0.0, f64::max),
        checked_nodes: valid.len(),
        excluded_nodes,
    })
}

/// Grid mesh with per-vertex scalars, ready for PLY export.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshSurface {
    pub target: Target,
    pub vertices: Vec<[f64; 3]>,
    /// Timelike coordinate, de Sitter meshes only.
    pub x0: Option<Vec<f64>>,
    pub kappa: Vec<f64>,
    pub lambda2: Vec<f64>,
    pub absg: Vec<f64>,
    pub singular: Vec<bool>,
    pub faces: Vec<[usize; 4]>,
}

/// Immerse every node of a lifted grid. Hyperbolic meshes are in the
/// Poincare ball; de Sitter meshes keep raw `x1, x2, x3`.
pub fn build_mesh(field: &SL2Field, data: &BryantData) -> Result<MeshSurface> {
    let grid = &field.grid;
    let target = data.target();
    let singular_cells = match target {
        Target::DeSitterSpace => data.singular_locus(grid)?,
        Target::HyperbolicSpace => Vec::new(),
    };
    let mut singular = vec![false; grid.len()];
    for &(i, j) in &singular_cells {
        for (a, b) in grid.cell_corners(i, j) {
            singular[grid.index(a, b)] = true;
        }
    }
    let per_node: Vec<(LorentzVector, f64, f64, f64)> = (0..grid.len())
        .into_par_iter()
        .map(|idx| -> Result<_> {
            let (i, j) = grid.coords(idx);
            let p = node_point(grid, i, j);
            let x = herm_to_lorentz(&immerse(&field.values[idx], target)?);
            let kappa = match target {
                Target::HyperbolicSpace => data.gauss_curvature(p),
                Target::DeSitterSpace => data.desitter_intrinsic_curvature(p),
            }
            .ok()
            .filter(|k| k.is_finite())
            .unwrap_or(0.0);
            let absg = data.g().eval_at(p).finite().map_or(f64::INFINITY, |g| g.norm());
            Ok((x, kappa, data.metric_density(p), absg))
        })
        .collect::<Result<_>>()?;
    let mut vertices = Vec::with_capacity(grid.len());
    let mut x0 = Vec::with_capacity(grid.len());
    for (x, _, _, _) in &per_node {
        match target {
            Target::HyperbolicSpace => vertices.push(to_poincare_ball(x)?),
            Target::DeSitterSpace => {
                vertices.push([x.x1, x.x2, x.x3]);
                x0.push(x.x0);
            }
        }
    }
    let faces = grid
        .cells()
        .map(|(i, j)| grid.cell_corners(i, j).map(|(a, b)| grid.index(a, b)))
        .collect();
    Ok(MeshSurface {
        target,
        vertices,
        x0: (target == Target::DeSitterSpace).then_some(x0),
        kappa: per_node.iter().map(|t| t.1).collect(),
        lambda2: per_node.iter().map(|t| t.2).collect(),
        absg: per_node.iter().map(|t| t.3).collect(),
        singular,
        faces,
    })
}

impl MeshSurface {
    /// ASCII PLY with fixed-precision numbers, so output is byte-stable.
    pub fn to_ply(&self) -> String {
        let mut s = String::new();
        s.push_str("ply\nformat ascii 1.0\n");
        let _ = writeln!(s, "element vertex {}", self.vertices.len());
        for name in ["x", "y", "z", "kappa", "lambda2", "absg", "singular"] {
            let _ = writeln!(s, "property float {name}");
        }
        if self.x0.is_some() {
            s.push_str("property float x0\n");
        }
        let _ = writeln!(s, "element face {}", self.faces.len());
        s.push_str("property list uchar int vertex_indices\nend_header\n");
        let num = |v: f64| if v.is_finite() { format!("{v:.12e}") } else { format!("{:.12e}", f64::MAX) };
        for k in 0..self.vertices.len() {
            let v = self.vertices[k];
            let mut fields = vec![
                num(v[0]),
                num(v[1]),
                num(v[2]),
                num(self.kappa[k]),
                num(self.lambda2[k]),
                num(self.absg[k]),
                num(if self.singular[k] { 1.0 } else { 0.0 }),
            ];
            if let Some(x0) = &self.x0 {
                fields.push(num(x0[k]));
            }
            s.push_str(&fields.join(" "));
            s.push('\n');
        }
        for f in &self.faces {
            let _ = writeln!(s, "4 {} {} {} {}", f[0], f[1], f[2], f[3]);
        }
        s
    }
}
