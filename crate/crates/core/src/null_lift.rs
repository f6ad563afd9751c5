//! The null lift `dF = F A dz`, `A = f [[g, -g^2], [1, -g]]`.
//!
//! Integration uses an embedded Dormand-Prince 4(5) pair in a real path
//! parameter, with `F <- F / sqrt(det F)` after every accepted step.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bryant_data::BryantData;
use crate::error::{Error, Result};
use crate::grid::{Chart, ChartGrid};
use crate::meromorphic::{ChartPoint, ExtComplex, PowerRational};
use crate::sl2::Mat2;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Step-size control for the integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rel: 1e-10, abs: 1e-12 }
    }
}

/// Polyline in the `z`-plane.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec {
    pub vertices: Vec<Complex64>,
    pub closed: bool,
}

impl PathSpec {
    pub fn open(vertices: Vec<Complex64>) -> Self {
        PathSpec { vertices, closed: false }
    }

    pub fn segment(a: Complex64, b: Complex64) -> Self {
        Self::open(vec![a, b])
    }

    /// Closed regular polygon with `n` vertices, starting at angle 0.
    pub fn circle(center: Complex64, radius: f64, n: usize) -> Self {
        let vertices = (0..n)
            .map(|k| center + Complex64::from_polar(radius, std::f64::consts::TAU * k as f64 / n as f64))
            .collect();
        PathSpec { vertices, closed: true }
    }

    /// Vertices with the start repeated at the end for closed paths.
    fn walk(&self) -> Vec<Complex64> {
        let mut v = self.vertices.clone();
        if self.closed {
            if let Some(&first) = v.first() {
                v.push(first);
            }
        }
        v
    }

    fn check(&self, data: &BryantData) -> Result<()> {
        if self.vertices.len() < 2 {
            return Err(Error::InvalidPath("fewer than two vertices".into()));
        }
        let walk = self.walk();
        if walk.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidPath("repeated consecutive vertex".into()));
        }
        if let Some(z) = walk.iter().find(|&&z| data.is_puncture(ExtComplex::Finite(z), 0.0)) {
            return Err(Error::InvalidPath(format!("vertex {z} is an end")));
        }
        Ok(())
    }
}

/// Entries of `A / dz` as single-valued functions: `A = [[gf, -g^2 f], [f, -gf]]`.
/// Writing the entries this way keeps them finite at poles of `g`.
#[derive(Debug, Clone)]
pub struct LiftField {
    f: PowerRational,
    gf: PowerRational,
    g2f: PowerRational,
    g: PowerRational,
}

impl LiftField {
    pub fn new(data: &BryantData) -> Self {
        let gf = data.g().mul(data.f());
        let g2f = gf.mul(data.g());
        LiftField {
            f: data.f().clone(),
            gf,
            g2f,
            g: data.g().clone(),
        }
    }

    /// `A(z)` per unit `dz`, or `None` at a pole.
    pub fn matrix(&self, p: ChartPoint) -> Option<Mat2> {
        let f = self.f.eval_at(p).finite()?;
        let gf = self.gf.eval_at(p).finite()?;
        let g2f = self.g2f.eval_at(p).finite()?;
        Some(Mat2::new(gf, -g2f, f, -gf))
    }

    pub fn g_at(&self, p: ChartPoint) -> ExtComplex {
        self.g.eval_at(p)
    }

    /// Finite points where some entry of `A` blows up.
    pub fn finite_singularities(&self) -> Vec<Complex64> {
        let mut out = Vec::new();
        for m in [&self.f, &self.gf, &self.g2f] {
            if m.is_zero() {
                continue;
            }
            if let Ok(poles) = m.finite_poles() {
                out.extend(poles.into_iter().map(|(z, _)| z));
            }
            if m.alpha() < 0.0 {
                out.push(ZERO);
            }
        }
        out
    }
}

/// A straight segment in a chart coordinate `w`; `map` sends `w` to the
/// evaluation point and `dz/dw`.
struct Segment<'a> {
    w0: Complex64,
    w1: Complex64,
    map: &'a (dyn Fn(Complex64) -> (ChartPoint, Complex64) + Sync),
    index: usize,
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn combo(y: Mat2, h: f64, ks: &[Mat2], coeffs: &[f64]) -> Mat2 {
    let mut acc = Mat2::zero();
    for (k, &c) in ks.iter().zip(coeffs) {
        if c != 0.0 {
            acc = acc + k.scale(Complex64::new(c, 0.0));
        }
    }
    y + acc.scale(Complex64::new(h, 0.0))
}

fn integrate_segment(field: &LiftField, seg: &Segment<'_>, f0: Mat2, tol: Tolerances) -> Result<Mat2> {
    let dw = seg.w1 - seg.w0;
    let rhs = |t: f64, y: Mat2| -> Option<Mat2> {
        let w = seg.w0 + dw * t;
        let (p, dzdw) = (seg.map)(w);
        let a = field.matrix(p)?;
        let k = y * a.scale(dzdw * dw);
        k.entries().iter().all(|e| e.re.is_finite() && e.im.is_finite()).then_some(k)
    };
    let underflow = |t: f64| Error::StepUnderflow {
        segment: seg.index,
        near: format!("{}", (seg.map)(seg.w0 + dw * t).0.z),
    };

    let mut t = 0.0;
    let mut y = f0;
    let mut h: f64 = 0.25;
    let mut k1 = rhs(0.0, y).ok_or_else(|| underflow(0.0))?;
    let mut steps = 0usize;
    while t < 1.0 {
        steps += 1;
        if h < 1e-13 || steps > 2_000_000 {
            return Err(underflow(t));
        }
        let h_try = h.min(1.0 - t);
        let attempt = (|| {
            let k2 = rhs(t + C[1] * h_try, combo(y, h_try, &[k1], &A2))?;
            let k3 = rhs(t + C[2] * h_try, combo(y, h_try, &[k1, k2], &A3))?;
            let k4 = rhs(t + C[3] * h_try, combo(y, h_try, &[k1, k2, k3], &A4))?;
            let k5 = rhs(t + C[4] * h_try, combo(y, h_try, &[k1, k2, k3, k4], &A5))?;
            let k6 = rhs(t + C[5] * h_try, combo(y, h_try, &[k1, k2, k3, k4, k5], &A6))?;
            let y5 = combo(y, h_try, &[k1, k2, k3, k4, k5, k6], &B5[..6]);
            let k7 = rhs(t + h_try, y5)?;
            let ks = [k1, k2, k3, k4, k5, k6, k7];
            let y4 = combo(y, h_try, &ks, &B4);
            Some((y5, y4))
        })();
        let Some((y5, y4)) = attempt else {
            h = h_try * 0.25;
            continue;
        };
        let err = {
            let (a, b, c) = (y.entries(), y5.entries(), y4.entries());
            let mut s = 0.0;
            for i in 0..4 {
                let scale = tol.abs + tol.rel * a[i].norm().max(b[i].norm());
                s += ((b[i] - c[i]).norm() / scale).powi(2);
            }
            (s / 4.0).sqrt()
        };
        if err <= 1.0 {
            t += h_try;
            y = y5.renormalized();
            if t < 1.0 {
                k1 = rhs(t, y).ok_or_else(|| underflow(t))?;
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = h_try * factor;
    }
    Ok(y)
}

/// Integrate along the polyline, continuing `log z` so that data with
/// non-integer exponents is carried along its analytic continuation.
pub fn integrate_path(data: &BryantData, path: &PathSpec, f0: Mat2) -> Result<Mat2> {
    integrate_path_with(data, path, f0, Tolerances::default())
}

pub fn integrate_path_with(data: &BryantData, path: &PathSpec, f0: Mat2, tol: Tolerances) -> Result<Mat2> {
    path.check(data)?;
    let field = LiftField::new(data);
    let walk = path.walk();
    let mut log = ChartPoint::principal(walk[0]).log_z;
    let mut f = f0;
    for (index, pair) in walk.windows(2).enumerate() {
        let (z0, z1) = (pair[0], pair[1]);
        // the segment misses the origin so ln(z / z0) stays on one branch
        if crosses_origin(z0, z1) {
            return Err(Error::InvalidPath(format!("segment {index} passes through the origin")));
        }
        let base = log;
        let map = move |w: Complex64| {
            let lz = if z0 == ZERO { w.ln() } else { base + (w / z0).ln() };
            (ChartPoint { z: w, log_z: lz }, ONE)
        };
        let seg = Segment {
            w0: z0,
            w1: z1,
            map: &map,
            index,
        };
        f = integrate_segment(&field, &seg, f, tol)?;
        log = map(z1).0.log_z;
    }
    Ok(f)
}

fn crosses_origin(a: Complex64, b: Complex64) -> bool {
    let d = b - a;
    let t = -(a.conj() * d).re / d.norm_sqr();
    t > 0.0 && t < 1.0 && (a + d * t).norm() <= 1e-14 * (a.norm() + b.norm())
}

/// The lift at every node of a chart grid.
#[derive(Debug, Clone)]
pub struct SL2Field {
    pub grid: ChartGrid,
    pub values: Vec<Mat2>,
    /// Largest relative mismatch over non-tree edges.
    pub closure_residual: f64,
    /// Largest relative jump across the seam of a periodic chart: nonzero
    /// exactly when the chart encircles an end with nontrivial monodromy.
    pub seam_jump: Option<f64>,
    pub base_node: (usize, usize),
}

impl SL2Field {
    pub fn at(&self, i: usize, j: usize) -> Mat2 {
        self.values[self.grid.index(i, j)]
    }

    pub fn max_det_defect(&self) -> f64 {
        self.values.iter().map(|m| (m.det() - ONE).norm()).fold(0.0, f64::max)
    }

    /// One line per node: index followed by the 8 real components.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, m) in self.values.iter().enumerate() {
            s.push_str(&k.to_string());
            for e in m.entries() {
                s.push_str(&format!(" {:.12e} {:.12e}", e.re, e.im));
            }
            s.push('\n');
        }
        s
    }
}

/// Evaluation map of a chart, choosing a branch of `log z` that is
/// continuous on the whole chart.
fn chart_map(grid: &ChartGrid) -> Box<dyn Fn(Complex64) -> (ChartPoint, Complex64) + Sync + '_> {
    match grid.chart() {
        Chart::Rect { x, y, .. } => {
            let mid = Complex64::new(0.5 * (x[0] + x[1]), 0.5 * (y[0] + y[1]));
            let cut = mid.arg() + std::f64::consts::PI;
            Box::new(move |w| (ChartPoint::with_cut(w, cut), ONE))
        }
        Chart::LogPolar { .. } => Box::new(move |w| (grid.point_of_w(w), grid.dz_dw(w))),
    }
}

fn check_simply_connected(data: &BryantData, field: &LiftField, grid: &ChartGrid) -> Result<()> {
    let mut bad: Vec<Complex64> = field.finite_singularities();
    bad.extend(data.punctures().iter().filter_map(|p| p.finite()));
    match grid.chart() {
        Chart::Rect { x, y, .. } => {
            // a chart through the origin has no continuous branch of log z
            let branch = (!data.g().is_rational() || !data.f().is_rational())
                && x[0] <= 0.0
                && x[1] >= 0.0
                && y[0] <= 0.0
                && y[1] >= 0.0;
            if let Some(z) = bad.iter().find(|&&z| grid.contains(z)) {
                return Err(Error::NotSimplyConnected(format!("singular point {z} inside the rectangle")));
            }
            if branch {
                return Err(Error::NotSimplyConnected("branch point inside the rectangle".into()));
            }
        }
        Chart::LogPolar { center, .. } => {
            let c = Complex64::new(center[0], center[1]);
            if let Some(z) = bad.iter().find(|&&z| z != c && grid.contains(z)) {
                return Err(Error::NotSimplyConnected(format!("singular point {z} inside the annulus")));
            }
            if c != ZERO && (!data.g().is_rational() || !data.f().is_rational()) {
                return Err(Error::NotSimplyConnected("branched data needs an annulus about the origin".into()));
            }
        }
    }
    Ok(())
}

/// Propagate the lift over the grid along a comb-shaped spanning tree:
/// first along the row through the base node, then up and down each column.
/// On periodic charts the seam `theta0` acts as the cut.
pub fn lift_on_grid(data: &BryantData, grid: &ChartGrid, base: Complex64, f0: Mat2) -> Result<SL2Field> {
    lift_on_grid_with(data, grid, base, f0, Tolerances::default())
}

pub fn lift_on_grid_with(
    data: &BryantData,
    grid: &ChartGrid,
    base: Complex64,
    f0: Mat2,
    tol: Tolerances,
) -> Result<SL2Field> {
    let field = LiftField::new(data);
    check_simply_connected(data, &field, grid)?;
    let map = chart_map(grid);
    let (n, m) = grid.dims();

    // base node nearest to `base`, reached along a straight chart segment
    let base_w = match grid.chart() {
        Chart::Rect { .. } => base,
        Chart::LogPolar { center, theta0, .. } => {
            let d = base - Complex64::new(center[0], center[1]);
            let mut w = d.ln();
            while w.im < *theta0 {
                w.im += std::f64::consts::TAU;
            }
            while w.im >= theta0 + std::f64::consts::TAU {
                w.im -= std::f64::consts::TAU;
            }
            w
        }
    };
    let (h1, h2) = grid.spacing();
    let w00 = grid.node_w(0, 0);
    let i0 = (((base_w.re - w00.re) / h1).round().max(0.0) as usize).min(n - 1);
    let j0 = (((base_w.im - w00.im) / h2).round().max(0.0) as usize).min(m - 1);
    let edge = |w0: Complex64, w1: Complex64, f: Mat2, index: usize| -> Result<Mat2> {
        if w0 == w1 {
            return Ok(f);
        }
        let seg = Segment {
            w0,
            w1,
            map: map.as_ref(),
            index,
        };
        integrate_segment(&field, &seg, f, tol)
    };
    let f_base = edge(base_w, grid.node_w(i0, j0), f0, 0)?;

    // the row through the base node
    let mut row = vec![Mat2::identity(); n];
    row[i0] = f_base;
    for i in i0 + 1..n {
        row[i] = edge(grid.node_w(i - 1, j0), grid.node_w(i, j0), row[i - 1], i)?;
    }
    for i in (0..i0).rev() {
        row[i] = edge(grid.node_w(i + 1, j0), grid.node_w(i, j0), row[i + 1], i)?;
    }

    // columns; on periodic charts the tree runs up from the seam so that
    // no tree edge crosses it
    let columns: Vec<Vec<Mat2>> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<Vec<Mat2>> {
            let mut col = vec![Mat2::identity(); m];
            col[j0] = row[i];
            for j in j0 + 1..m {
                col[j] = edge(grid.node_w(i, j - 1), grid.node_w(i, j), col[j - 1], i)?;
            }
            for j in (0..j0).rev() {
                col[j] = edge(grid.node_w(i, j + 1), grid.node_w(i, j), col[j + 1], i)?;
            }
            Ok(col)
        })
        .collect::<Result<_>>()?;
    let mut values = vec![Mat2::identity(); n * m];
    for (i, col) in columns.iter().enumerate() {
        for (j, v) in col.iter().enumerate() {
            values[grid.index(i, j)] = *v;
        }
    }

    let rel = |a: Mat2, b: Mat2| (a - b).norm() / b.norm().max(1.0);
    // horizontal edges off the base row close plaquettes
    let closure_residual = (0..m)
        .into_par_iter()
        .filter(|&j| j != j0)
        .map(|j| -> Result<f64> {
            let mut worst = 0.0f64;
            for i in 0..n - 1 {
                let a = values[grid.index(i, j)];
                let b = values[grid.index(i + 1, j)];
                let moved = edge(grid.node_w(i, j), grid.node_w(i + 1, j), a, i)?;
                worst = worst.max(rel(moved, b));
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let seam_jump = if grid.is_periodic() {
        let jumps = (0..n)
            .into_par_iter()
            .map(|i| -> Result<f64> {
                let top = grid.node_w(i, m - 1);
                let wrapped = grid.node_w(i, 0) + Complex64::new(0.0, std::f64::consts::TAU);
                let moved = edge(top, wrapped, values[grid.index(i, m - 1)], i)?;
                Ok(rel(moved, values[grid.index(i, 0)]))
            })
            .collect::<Result<Vec<f64>>>()?;
        Some(jumps.into_iter().fold(0.0, f64::max))
    } else {
        None
    };

    Ok(SL2Field {
        grid: grid.clone(),
        values,
        closure_residual,
        seam_jump,
        base_node: (i0, j0),
    })
}

/// `G = (a g + b) / (c g + d)`, the Mobius action of `F` on `g`.
pub fn hyperbolic_gauss(f: &Mat2, g: ExtComplex) -> ExtComplex {
    g.mobius(f.as_mobius())
}

/// Hyperbolic Gauss map at every node of a lifted grid.
pub fn gauss_map_on_grid(field: &SL2Field, data: &BryantData) -> Vec<ExtComplex> {
    let grid = &field.grid;
    let map = chart_map(grid);
    (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (i, j) = grid.coords(idx);
            let p = map(grid.node_w(i, j)).0;
            hyperbolic_gauss(&field.values[idx], data.g().eval_at(p))
        })
        .collect()
}

/// Fourth-order central difference of a node quantity along the first
/// chart axis, divided by `dz/dw`; `None` within two nodes of an edge.
pub fn d_dz(grid: &ChartGrid, values: &[Complex64], i: usize, j: usize) -> Option<Complex64> {
    let (n, _) = grid.dims();
    if i < 2 || i + 2 >= n {
        return None;
    }
    let (h, _) = grid.spacing();
    let v = |di: isize| values[grid.index((i as isize + di) as usize, j)];
    let d = (v(-2) - v(-1) * 8.0 + v(1) * 8.0 - v(2)) / (12.0 * h);
    Some(d / grid.dz_dw(grid.node_w(i, j)))
}

/// Largest `|-dB/dA - g|` over interior nodes, derivatives taken by finite
/// differences of the lifted field. Nodes where `dA` (nearly) vanishes or
/// `g` is infinite are skipped.
pub fn secondary_gauss_check(field: &SL2Field, data: &BryantData) -> f64 {
    let grid = &field.grid;
    let a: Vec<Complex64> = field.values.iter().map(|m| m.a).collect();
    let b: Vec<Complex64> = field.values.iter().map(|m| m.b).collect();
    let map = chart_map(grid);
    let derivs: Vec<Option<(Complex64, Complex64, ExtComplex)>> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (i, j) = grid.coords(idx);
            if grid.is_near_boundary(i, j, 2) {
                return None;
            }
            let da = d_dz(grid, &a, i, j)?;
            let db = d_dz(grid, &b, i, j)?;
            Some((da, db, data.g().eval_at(map(grid.node_w(i, j)).0)))
        })
        .collect();
    let scale = derivs.iter().flatten().map(|(da, _, _)| da.norm()).fold(0.0, f64::max);
    derivs
        .iter()
        .flatten()
        .filter_map(|&(da, db, g)| {
            let g = g.finite()?;
            (da.norm() > 1e-6 * scale && g.norm() < 1e8).then(|| (-db / da - g).norm())
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MonodromyKind {
    Trivial,
    Elliptic,
    Hyperbolic,
    Parabolic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonodromyClass {
    pub matrix: Mat2,
    pub class: MonodromyKind,
    pub trace: Complex64,
    /// Trace is measurably non-real: the loop's monodromy is not conjugate
    /// into SU(2) or SU(1,1).
    pub non_real_trace: bool,
}

/// Classify `Phi` by its trace with tolerance `1e-6 (1 + |tr|)`.
pub fn classify(phi: Mat2) -> MonodromyClass {
    let tr = phi.trace();
    let tol = 1e-6 * (1.0 + tr.norm());
    let id = Mat2::identity();
    let class = if (phi - id).norm() <= tol || (phi + id).norm() <= tol {
        MonodromyKind::Trivial
    } else {
        let t = tr.re.abs();
        if (t - 2.0).abs() <= tol {
            MonodromyKind::Parabolic
        } else if t < 2.0 {
            MonodromyKind::Elliptic
        } else {
            MonodromyKind::Hyperbolic
        }
    };
    MonodromyClass {
        matrix: phi,
        class,
        trace: tr,
        non_real_trace: tr.im.abs() > tol,
    }
}

/// `Phi = F0^-1 F_end` for one trip around a closed path.
pub fn monodromy(data: &BryantData, path: &PathSpec, f0: Mat2) -> Result<MonodromyClass> {
    if !path.closed {
        return Err(Error::InvalidPath("monodromy needs a closed loop".into()));
    }
    let end = integrate_path(data, path, f0)?;
    let inv = f0.inverse().ok_or(Error::DeterminantDrift(0.0))?;
    Ok(classify(inv * end))
}

/// The hyperbolic Gauss map obtained by transporting the lift from a base
/// point along straight segments.
#[derive(Debug, Clone)]
pub struct TransportedGauss {
    data: BryantData,
    base: Complex64,
    f0: Mat2,
    radius: f64,
    nodes: usize,
}

impl TransportedGauss {
    pub fn new(data: &BryantData, base: Complex64, f0: Mat2) -> Self {
        TransportedGauss {
            data: data.clone(),
            base,
            f0,
            radius: 0.05,
            nodes: 32,
        }
    }

    pub fn with_stencil(mut self, radius: f64, nodes: usize) -> Self {
        self.radius = radius;
        self.nodes = nodes;
        self
    }

    pub fn lift_at(&self, z: Complex64) -> Result<Mat2> {
        if z == self.base {
            return Ok(self.f0);
        }
        integrate_path(&self.data, &PathSpec::segment(self.base, z), self.f0)
    }

    pub fn value(&self, z: Complex64) -> Result<ExtComplex> {
        let f = self.lift_at(z)?;
        Ok(hyperbolic_gauss(&f, self.data.g().eval(z)))
    }

    /// `S(G)` at `z` from the Taylor coefficients of `G` on a small circle,
    /// read off with a discrete Fourier transform (Cauchy integral).
    pub fn schwarzian(&self, z: Complex64) -> Result<Complex64> {
        let fz = self.lift_at(z)?;
        let g0 = hyperbolic_gauss(&fz, self.data.g().eval(z));
        // rotate so that G(z) = 0; the Schwarzian is Mobius invariant
        let rot = match g0 {
            ExtComplex::Finite(v) => [ONE, -v, v.conj(), ONE],
            ExtComplex::Infinity => [ZERO, ONE, -ONE, ZERO],
        };
        let n = self.nodes;
        let samples: Vec<Complex64> = (0..n)
            .into_par_iter()
            .map(|k| -> Result<Complex64> {
                let zk = z + Complex64::from_polar(self.radius, std::f64::consts::TAU * k as f64 / n as f64);
                let fk = integrate_path(&self.data, &PathSpec::segment(z, zk), fz)?;
                hyperbolic_gauss(&fk, self.data.g().eval(zk))
                    .mobius(rot)
                    .finite()
                    .ok_or_else(|| Error::CriticalPoint(format!("Gauss map pole near {zk}")))
            })
            .collect::<Result<_>>()?;
        let coeff = |m: usize| -> Complex64 {
            let s: Complex64 = samples
                .iter()
                .enumerate()
                .map(|(k, v)| v * Complex64::from_polar(1.0, -std::f64::consts::TAU * (m * k) as f64 / n as f64))
                .sum();
            s / (n as f64 * self.radius.powi(m as i32))
        };
        let (d1, d2, d3) = (coeff(1), coeff(2) * 2.0, coeff(3) * 6.0);
        if d1.norm() == 0.0 {
            return Err(Error::CriticalPoint(format!("{z}")));
        }
        let r = d2 / d1;
        Ok(d3 / d1 - 1.5 * r * r)
    }
}
