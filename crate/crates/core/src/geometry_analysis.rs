//! Intrinsic analysis of a conformal metric `ds = Lambda |dw|` sampled on a
//! chart grid: distance fields, ball volumes, total curvature, curvature
//! decay along ends, and the parabolicity integral.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::bryant_data::BryantData;
use crate::duality::aitken;
use crate::error::{Error, Result};
use crate::grid::{Chart, ChartGrid};
use crate::immersion::node_point;
use crate::meromorphic::{ChartPoint, EndExpansion};

/// Length density per node in the chart coordinate (so `|dz/dw|` is
/// already folded in for log-polar charts), with a validity mask and the
/// set of nodes whose entry into a ball means the ball hit the chart edge.
#[derive(Debug, Clone)]
pub struct MetricGrid {
    pub grid: ChartGrid,
    pub density: Vec<f64>,
    pub mask: Vec<bool>,
    pub guard: Vec<bool>,
}

impl MetricGrid {
    /// Sample `lambda2(p)`, the squared length density in `z`, at every node.
    pub fn from_fn(grid: &ChartGrid, lambda2: impl Fn(ChartPoint) -> f64 + Sync) -> Self {
        let density: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let (i, j) = grid.coords(idx);
                let l2 = lambda2(node_point(grid, i, j));
                l2.sqrt() * grid.dz_dw(grid.node_w(i, j)).norm()
            })
            .collect();
        let mask = density.iter().map(|l| l.is_finite() && *l > 0.0).collect();
        let guard = (0..grid.len())
            .map(|idx| {
                let (i, j) = grid.coords(idx);
                grid.is_near_boundary(i, j, 2)
            })
            .collect();
        MetricGrid {
            grid: grid.clone(),
            density,
            mask,
            guard,
        }
    }

    /// Induced metric of the data.
    pub fn from_data(grid: &ChartGrid, data: &BryantData) -> Self {
        Self::from_fn(grid, |p| data.metric_density(p))
    }

    /// Only the outer radial edge (largest `s` or `x`) guards balls: use for
    /// charts whose inner edge surrounds the distance source.
    pub fn guard_outer_only(mut self) -> Self {
        let n = self.grid.dims().0;
        for idx in 0..self.grid.len() {
            let (i, _) = self.grid.coords(idx);
            self.guard[idx] = i + 3 > n;
        }
        self
    }

    pub fn cell_area(&self) -> f64 {
        self.grid.cell_area()
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Primitive moves `(a, b)` with `max(|a|, |b|) <= 3`: 32 directions.
fn stencil() -> Vec<(isize, isize)> {
    fn gcd(a: isize, b: isize) -> isize {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    let mut out = Vec::new();
    for a in -3isize..=3 {
        for b in -3isize..=3 {
            if (a, b) != (0, 0) && gcd(a, b) == 1 {
                out.push((a, b));
            }
        }
    }
    out
}

/// Shortest-path distance from the sources (node index, starting offset)
/// over the 32-direction stencil graph. Edge weight: mean endpoint density
/// times chart length. Unreachable or masked nodes get infinity.
pub fn geodesic_distance(mg: &MetricGrid, sources: &[(usize, f64)]) -> Result<Vec<f64>> {
    if sources.is_empty() {
        return Err(Error::Empty("geodesic sources"));
    }
    let grid = &mg.grid;
    let (h1, h2) = grid.spacing();
    let moves: Vec<(isize, isize, f64)> = stencil()
        .into_iter()
        .map(|(a, b)| (a, b, ((a as f64 * h1).powi(2) + (b as f64 * h2).powi(2)).sqrt()))
        .collect();
    let mut dist = vec![f64::INFINITY; grid.len()];
    let mut heap = BinaryHeap::new();
    for &(s, d0) in sources {
        if !mg.mask[s] {
            return Err(Error::InvalidArgument(format!("source node {s} is masked")));
        }
        if d0 < dist[s] {
            dist[s] = d0;
            heap.push(Item(d0, s));
        }
    }
    while let Some(Item(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        let (i, j) = grid.coords(u);
        for &(a, b, len) in &moves {
            let Some((ii, jj)) = grid.offset(i, j, a, b) else { continue };
            let v = grid.index(ii, jj);
            if !mg.mask[v] {
                continue;
            }
            let nd = d + 0.5 * (mg.density[u] + mg.density[v]) * len;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Item(nd, v));
            }
        }
    }
    Ok(dist)
}

/// Least-squares line `y = slope x + intercept`, with RMS residual.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum::<f64>() / n as f64).sqrt();
    Some((slope, intercept, rms))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolumeGrowth {
    /// `(r, vol(B_r))` for the trusted radii.
    pub samples: Vec<(f64, f64)>,
    /// Radii dropped because the ball reached the guard band.
    pub excluded: Vec<f64>,
    /// Slope of `log vol` against `log r` over the top decade.
    pub exponent: f64,
    /// `c` in `vol ~ pi c r^2` over the top decade (geometric mean).
    pub c_fit: f64,
}

/// `vol(B_r) = sum Lambda^2 * cellArea` over valid nodes with `rho <= r`.
pub fn volume_growth(mg: &MetricGrid, rho: &[f64], radii: &[f64]) -> Result<VolumeGrowth> {
    let guard_radius = rho
        .iter()
        .zip(&mg.guard)
        .zip(&mg.mask)
        .filter(|((_, g), m)| **g && **m)
        .map(|((r, _), _)| *r)
        .fold(f64::INFINITY, f64::min);
    let mut order: Vec<usize> = (0..rho.len()).filter(|&k| mg.mask[k] && rho[k].is_finite()).collect();
    order.sort_by(|&a, &b| rho[a].total_cmp(&rho[b]));
    let area = mg.cell_area();
    let mut sorted_r = Vec::with_capacity(order.len());
    let mut cumulative = Vec::with_capacity(order.len());
    let mut acc = 0.0;
    for &k in &order {
        acc += mg.density[k].powi(2) * area;
        sorted_r.push(rho[k]);
        cumulative.push(acc);
    }
    let mut samples = Vec::new();
    let mut excluded = Vec::new();
    for &r in radii {
        if r >= guard_radius {
            excluded.push(r);
            continue;
        }
        let count = sorted_r.partition_point(|&x| x <= r);
        let vol = if count == 0 { 0.0 } else { cumulative[count - 1] };
        samples.push((r, vol));
    }
    let r_top = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    let top: Vec<&(f64, f64)> = samples.iter().filter(|s| s.0 >= r_top / 10.0 && s.1 > 0.0).collect();
    if top.len() < 2 {
        return Err(Error::Empty("fewer than two trusted radii in the top decade"));
    }
    let x: Vec<f64> = top.iter().map(|s| s.0.ln()).collect();
    let y: Vec<f64> = top.iter().map(|s| s.1.ln()).collect();
    let (exponent, _, _) = linear_fit(&x, &y).ok_or(Error::Empty("degenerate radii"))?;
    let log_c = top.iter().map(|s| (s.1 / (std::f64::consts::PI * s.0 * s.0)).ln()).sum::<f64>() / top.len() as f64;
    Ok(VolumeGrowth {
        samples,
        excluded,
        exponent,
        c_fit: log_c.exp(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCurvature {
    pub estimates: Vec<(f64, f64)>,
    pub limit: f64,
    pub divergent: bool,
}

/// `int (-kappa) Lambda^2 dA` over `|z - center| <= R` for each radius, with
/// trapezoid weights in the chart and an Aitken limit over the last three.
/// On a log-polar chart the radial cut is interpolated between node rows.
pub fn total_curvature(mg: &MetricGrid, neg_kappa: &[f64], radii: &[f64]) -> Result<GridCurvature> {
    if radii.len() < 3 {
        return Err(Error::InvalidArgument("need at least three exhaustion radii".into()));
    }
    let grid = &mg.grid;
    let (n, m) = grid.dims();
    let (h1, h2) = grid.spacing();
    let integrand = |idx: usize| -> f64 {
        if !mg.mask[idx] {
            return 0.0;
        }
        let v = neg_kappa[idx] * mg.density[idx].powi(2);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let estimates: Vec<(f64, f64)> = match grid.chart() {
        Chart::LogPolar { s, .. } => {
            // row sums: periodic trapezoid in theta
            let rows: Vec<f64> = (0..n).map(|i| (0..m).map(|j| integrand(grid.index(i, j))).sum::<f64>() * h2).collect();
            radii
                .iter()
                .map(|&r| {
                    let t = ((r.ln() - s[0]) / h1).clamp(0.0, (n - 1) as f64);
                    let k = t.floor() as usize;
                    let mut acc = 0.0;
                    for i in 0..k {
                        acc += 0.5 * h1 * (rows[i] + rows[i + 1]);
                    }
                    if k + 1 < n {
                        let frac = t - k as f64;
                        let edge = rows[k] + frac * (rows[k + 1] - rows[k]);
                        acc += 0.5 * frac * h1 * (rows[k] + edge);
                    }
                    (r, acc)
                })
                .collect()
        }
        Chart::Rect { .. } => radii
            .iter()
            .map(|&r| {
                let acc: f64 = (0..grid.len())
                    .filter(|&idx| {
                        let (i, j) = grid.coords(idx);
                        grid.node_z(i, j).norm() <= r
                    })
                    .map(|idx| {
                        let (i, j) = grid.coords(idx);
                        let wi = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
                        let wj = if j == 0 || j + 1 == m { 0.5 } else { 1.0 };
                        wi * wj * integrand(idx)
                    })
                    .sum::<f64>()
                    * h1
                    * h2;
                (r, acc)
            })
            .collect(),
    };
    let k = estimates.len();
    let (a, b, c) = (estimates[k - 3].1, estimates[k - 2].1, estimates[k - 1].1);
    let limit = aitken(a, b, c);
    Ok(GridCurvature {
        estimates,
        limit: limit.unwrap_or(f64::INFINITY),
        divergent: limit.is_none(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    /// Slope of `log(-kappa)` against `log rho` on the tail.
    pub slope: f64,
    /// Envelope constant: `-kappa <= c / rho^(2 + epsilon)` on the tail.
    pub c: f64,
    /// `-slope - 2`; infinite for a flat tail.
    pub epsilon: f64,
    pub r0: f64,
    pub residual: f64,
    /// `2 + 2(1 + beta) / I` from the end expansion.
    pub predicted_exponent: f64,
    pub samples: usize,
}

impl DecayFit {
    pub fn relative_error(&self) -> f64 {
        (-self.slope - self.predicted_exponent).abs() / self.predicted_exponent
    }

    pub fn envelope_holds(&self, kappa: &[f64], rho: &[f64]) -> bool {
        kappa.iter().zip(rho).filter(|(_, &r)| r >= self.r0).all(|(&k, &r)| {
            k <= 0.0 && (self.c == 0.0 && k == 0.0 || -k <= self.c * r.powf(-(2.0 + self.epsilon)) * (1.0 + 1e-12))
        })
    }
}

/// Fit `log(-kappa)` against `log rho` for samples with `rho >= r0`.
pub fn curvature_decay_fit(kappa: &[f64], rho: &[f64], r0: f64, end: &EndExpansion) -> Result<DecayFit> {
    let predicted_exponent = end.predicted_decay_exponent();
    let tail: Vec<(f64, f64)> = kappa
        .iter()
        .zip(rho)
        .filter(|(k, r)| **r >= r0 && r.is_finite() && k.is_finite())
        .map(|(&k, &r)| (k, r))
        .collect();
    if tail.is_empty() {
        return Err(Error::Empty("no curvature samples beyond r0"));
    }
    if tail.iter().all(|(k, _)| *k == 0.0) {
        return Ok(DecayFit {
            slope: f64::NEG_INFINITY,
            c: 0.0,
            epsilon: f64::INFINITY,
            r0,
            residual: 0.0,
            predicted_exponent,
            samples: tail.len(),
        });
    }
    if tail.iter().any(|(k, _)| *k > 0.0) {
        return Err(Error::InvalidArgument("positive curvature sample on the tail".into()));
    }
    let pts: Vec<(f64, f64)> = tail.iter().filter(|(k, _)| *k < 0.0).map(|&(k, r)| (r.ln(), (-k).ln())).collect();
    let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (slope, _, residual) = linear_fit(&x, &y).ok_or(Error::Empty("degenerate tail"))?;
    let epsilon = -slope - 2.0;
    let c = tail.iter().map(|&(k, r)| -k * r.powf(2.0 + epsilon)).fold(0.0, f64::max);
    Ok(DecayFit {
        slope,
        c,
        epsilon,
        r0,
        residual,
        predicted_exponent,
        samples: tail.len(),
    })
}

/// `kappa0 r0^2 / 2 + c / (epsilon r0^epsilon)`: the integral of `s k(s)`
/// for the envelope `k = kappa0` on `[0, r0]`, `c s^-(2+epsilon)` beyond.
pub fn integrability_check(c: f64, epsilon: f64, r0: f64, kappa0: f64) -> Result<f64> {
    if c == 0.0 {
        return Ok(kappa0 * r0 * r0 / 2.0);
    }
    if epsilon <= 0.0 || !epsilon.is_finite() && epsilon.is_nan() {
        return Err(Error::InvalidArgument(format!("envelope exponent epsilon = {epsilon} gives a divergent integral")));
    }
    let tail = if epsilon.is_infinite() { 0.0 } else { c / (epsilon * r0.powf(epsilon)) };
    let v = kappa0 * r0 * r0 / 2.0 + tail;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidArgument("integral is not finite".into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParabolicityVerdict {
    Divergent,
    NonDivergent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Parabolicity {
    /// `(R, int_{r0}^R r dr / vol(B_r))`.
    pub integral: Vec<(f64, f64)>,
    pub slope: f64,
    pub head_slope: f64,
    pub tail_slope: f64,
    pub verdict: ParabolicityVerdict,
}

/// Trapezoid values of `int r dr / vol(B_r)` and their slope against
/// `ln(R / r0)`. Growth that keeps pace in the upper half of the range
/// (tail slope at least half the head slope) is read as divergence.
pub fn parabolicity_integral(samples: &[(f64, f64)]) -> Result<Parabolicity> {
    let pts: Vec<(f64, f64)> = samples.iter().copied().filter(|s| s.1 > 0.0 && s.0 > 0.0).collect();
    if pts.len() < 4 {
        return Err(Error::Empty("need at least four positive volume samples"));
    }
    if pts.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidArgument("radii must increase".into()));
    }
    let r0 = pts[0].0;
    let mut integral = vec![(r0, 0.0)];
    let mut acc = 0.0;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        acc += 0.5 * (b.0 - a.0) * (a.0 / a.1 + b.0 / b.1);
        integral.push((b.0, acc));
    }
    let x: Vec<f64> = integral.iter().map(|p| (p.0 / r0).ln()).collect();
    let y: Vec<f64> = integral.iter().map(|p| p.1).collect();
    let (slope, _, _) = linear_fit(&x, &y).ok_or(Error::Empty("degenerate radii"))?;
    let mid = x.last().unwrap() / 2.0;
    let split = x.partition_point(|&v| v < mid).clamp(2, x.len() - 2);
    let (head_slope, _, _) = linear_fit(&x[..=split], &y[..=split]).ok_or(Error::Empty("degenerate radii"))?;
    let (tail_slope, _, _) = linear_fit(&x[split..], &y[split..]).ok_or(Error::Empty("degenerate radii"))?;
    let verdict = if head_slope > 0.0 && tail_slope >= 0.5 * head_slope {
        ParabolicityVerdict::Divergent
    } else {
        ParabolicityVerdict::NonDivergent
    };
    Ok(Parabolicity {
        integral,
        slope,
        head_slope,
        tail_slope,
        verdict,
    })
}

/// Geometric sequence of `count` radii from `lo` to `hi`.
pub fn geometric_radii(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| lo * (hi / lo).powf(k as f64 / (count - 1).max(1) as f64))
        .collect()
}

/// Sources on the innermost ring of a log-polar chart about `center`, with
/// the radial distance from the center as starting offset.
pub fn inner_ring_sources(mg: &MetricGrid, offset: f64) -> Vec<(usize, f64)> {
    let (_, m) = mg.grid.dims();
    (0..m).map(|j| (mg.grid.index(0, j), offset)).collect()
}

/// Sources on the node column `i` (a circle in a log-polar chart).
pub fn ring_sources(mg: &MetricGrid, i: usize) -> Vec<(usize, f64)> {
    let (_, m) = mg.grid.dims();
    (0..m).map(|j| (mg.grid.index(i, j), 0.0)).collect()
}

/// Node nearest to `z` on a rectangular chart.
pub fn nearest_node(grid: &ChartGrid, z: Complex64) -> usize {
    let (n, m) = grid.dims();
    let (h1, h2) = grid.spacing();
    let w0 = grid.node_w(0, 0);
    let i = (((z.re - w0.re) / h1).round().max(0.0) as usize).min(n - 1);
    let j = (((z.im - w0.im) / h2).round().max(0.0) as usize).min(m - 1);
    grid.index(i, j)
}
