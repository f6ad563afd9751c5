//! Omitted values of the hyperbolic Gauss map: exact for rational maps on
//! punctured spheres, rasterized on an icosphere otherwise.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::ser::Serializer;
use serde::Serialize;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::meromorphic::{roots, ExtComplex, PowerRational};

/// Chordal tolerance for matching a preimage against a declared puncture.
pub const PUNCTURE_TOL: f64 = 1e-7;

/// Sample dispersion below which a sampled map is treated as constant.
pub const CONSTANT_DISPERSION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverageMode {
    ConstantMap,
    ExactRational,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmittedCount {
    Count(usize),
    Constant,
}

impl Serialize for OmittedCount {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            OmittedCount::Count(n) => s.serialize_u64(*n as u64),
            OmittedCount::Constant => s.serialize_str("constant"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub mode: CoverageMode,
    /// Exact mode: the omitted values. Sampled mode: one representative
    /// (cluster centroid) per uncovered cluster. Constant mode: empty, the
    /// whole sphere but `constant_value` being omitted.
    pub omitted: Vec<ExtComplex>,
    pub omitted_count: OmittedCount,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant_value: Option<ExtComplex>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cells_total: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cells_uncovered: Option<usize>,
}

impl CoverageReport {
    fn constant(value: ExtComplex) -> Self {
        CoverageReport {
            mode: CoverageMode::ConstantMap,
            omitted: Vec::new(),
            omitted_count: OmittedCount::Constant,
            constant_value: Some(value),
            cells_total: None,
            cells_uncovered: None,
        }
    }

    /// A report with the given omitted set, as produced by the exact path.
    /// Exposed so callers can feed synthetic reports to the verdict.
    pub fn exact(omitted: Vec<ExtComplex>) -> Self {
        CoverageReport {
            mode: CoverageMode::ExactRational,
            omitted_count: OmittedCount::Count(omitted.len()),
            omitted,
            constant_value: None,
            cells_total: None,
            cells_uncovered: None,
        }
    }
}

fn near_any(p: ExtComplex, set: &[ExtComplex]) -> bool {
    set.iter().any(|q| p.chordal_distance(*q) <= PUNCTURE_TOL)
}

/// All preimages of `w` under a reduced rational map, with multiplicity.
fn preimages(g: &PowerRational, w: ExtComplex) -> Result<Vec<ExtComplex>> {
    let dp = g.numer().degree().unwrap_or(0);
    let dq = g.denom().degree().unwrap_or(0);
    let mut out: Vec<ExtComplex> = Vec::new();
    let finite_eq_degree;
    match w {
        ExtComplex::Infinity => {
            let poles = crate::meromorphic::poly_roots(g.denom())?;
            finite_eq_degree = poles.len();
            out.extend(poles.into_iter().map(ExtComplex::Finite));
        }
        ExtComplex::Finite(v) => {
            let rs = roots(g, v)?;
            finite_eq_degree = rs.roots.len();
            out.extend(rs.roots.into_iter().map(ExtComplex::Finite));
        }
    }
    // the rest of the degree sits at infinity
    let deg = dp.max(dq);
    for _ in finite_eq_degree..deg {
        out.push(ExtComplex::Infinity);
    }
    Ok(out)
}

/// Exact omitted set of a rational `G` on the sphere minus `punctures`.
/// Only the values `G(p)` at punctures can be omitted; each is kept iff all
/// of its preimages are punctures.
pub fn omitted_values_exact(g: &PowerRational, punctures: &[ExtComplex]) -> Result<CoverageReport> {
    if !g.is_rational() {
        return Err(Error::NotRational(g.alpha()));
    }
    let g = g.reduced()?;
    if g.is_constant() {
        return Ok(CoverageReport::constant(g.value_at_infinity()));
    }
    let mut candidates: Vec<ExtComplex> = Vec::new();
    for p in punctures {
        let v = match p {
            ExtComplex::Infinity => g.value_at_infinity(),
            ExtComplex::Finite(z) => g.eval(*z),
        };
        if !near_any(v, &candidates) {
            candidates.push(v);
        }
    }
    let checked: Vec<Result<Option<ExtComplex>>> = candidates
        .par_iter()
        .map(|&w| {
            let pre = preimages(&g, w)?;
            Ok((!pre.is_empty() && pre.iter().all(|q| near_any(*q, punctures))).then_some(w))
        })
        .collect();
    let mut omitted = Vec::new();
    for c in checked {
        if let Some(w) = c? {
            omitted.push(w);
        }
    }
    Ok(CoverageReport::exact(omitted))
}

/// Spherical triangulation from repeated midpoint subdivision of the
/// icosahedron. Level 1 is the icosahedron itself (20 cells); each level
/// quadruples the count, so level 4 has 1280 cells. Subdivision vertices
/// are then relaxed toward equal cell areas.
#[derive(Debug, Clone)]
pub struct Icosphere {
    pub level: u32,
    pub vertices: Vec<[f64; 3]>,
    /// Leaf triangles, ordered so that the children of a level-k triangle
    /// `t` are `4t .. 4t + 4` at level k + 1.
    pub cells: Vec<[usize; 3]>,
    levels: Vec<Vec<[usize; 3]>>,
    /// Unrelaxed positions, on which the subdivision hierarchy is exact.
    raw: Vec<[f64; 3]>,
    across: Vec<[usize; 3]>,
}

fn tri_area(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    let num = dot(a, cross(b, c)).abs();
    let den = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
    2.0 * num.atan2(den)
}

/// Gauss-Seidel descent on the squared deviation of cell areas from the
/// mean, moving only vertices created by subdivision.
fn relax(vertices: &mut [[f64; 3]], cells: &[[usize; 3]], fixed: usize, sweeps: usize) {
    let mean = 4.0 * std::f64::consts::PI / cells.len() as f64;
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); vertices.len()];
    for (k, tri) in cells.iter().enumerate() {
        for &v in tri {
            incident[v].push(k);
        }
    }
    let energy = |verts: &[[f64; 3]], v: usize| -> f64 {
        incident[v]
            .iter()
            .map(|&k| {
                let [a, b, c] = cells[k].map(|i| verts[i]);
                (tri_area(a, b, c) / mean - 1.0).powi(2)
            })
            .sum()
    };
    let step = 0.05 * (mean).sqrt();
    for sweep in 0..sweeps {
        let h = step / (1.0 + sweep as f64 / 10.0);
        for v in fixed..vertices.len() {
            let p = vertices[v];
            // tangent frame at p
            let helper = if p[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
            let t1 = normalize(cross(p, helper));
            let t2 = cross(p, t1);
            let mut best = (energy(vertices, v), p);
            for (dx, dy) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (0.7, 0.7), (-0.7, 0.7), (0.7, -0.7), (-0.7, -0.7)] {
                let q = normalize([
                    p[0] + h * (dx * t1[0] + dy * t2[0]),
                    p[1] + h * (dx * t1[1] + dy * t2[1]),
                    p[2] + h * (dx * t1[2] + dy * t2[2]),
                ]);
                vertices[v] = q;
                let e = energy(vertices, v);
                if e < best.0 {
                    best = (e, q);
                }
            }
            vertices[v] = best.1;
        }
    }
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl Icosphere {
    pub fn new(level: u32) -> Result<Self> {
        if !(1..=7).contains(&level) {
            return Err(Error::InvalidArgument(format!("icosphere level {level} outside 1..=7")));
        }
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let mut vertices: Vec<[f64; 3]> = [
            [-1.0, t, 0.0],
            [1.0, t, 0.0],
            [-1.0, -t, 0.0],
            [1.0, -t, 0.0],
            [0.0, -1.0, t],
            [0.0, 1.0, t],
            [0.0, -1.0, -t],
            [0.0, 1.0, -t],
            [t, 0.0, -1.0],
            [t, 0.0, 1.0],
            [-t, 0.0, -1.0],
            [-t, 0.0, 1.0],
        ]
        .into_iter()
        .map(normalize)
        .collect();
        let base: Vec<[usize; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        let mut levels = vec![base];
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        for _ in 1..level {
            let prev = levels.last().unwrap();
            let mut next = Vec::with_capacity(prev.len() * 4);
            for &[a, b, c] in prev {
                let mut mid = |x: usize, y: usize| -> usize {
                    let key = (x.min(y), x.max(y));
                    *midpoint.entry(key).or_insert_with(|| {
                        let p = vertices[x];
                        let q = vertices[y];
                        vertices.push(normalize([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                        vertices.len() - 1
                    })
                };
                let ab = mid(a, b);
                let bc = mid(b, c);
                let ca = mid(c, a);
                next.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
            }
            levels.push(next);
        }
        let cells = levels.last().unwrap().clone();
        let raw = vertices.clone();
        relax(&mut vertices, &cells, 12, 40);
        let mut edge_cells: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (k, &[a, b, c]) in cells.iter().enumerate() {
            for (x, y) in [(a, b), (b, c), (c, a)] {
                edge_cells.entry((x.min(y), x.max(y))).or_default().push(k);
            }
        }
        let across = cells
            .iter()
            .enumerate()
            .map(|(k, &[a, b, c])| {
                [(a, b), (b, c), (c, a)].map(|(x, y)| {
                    let both = &edge_cells[&(x.min(y), x.max(y))];
                    if both[0] == k {
                        both[1]
                    } else {
                        both[0]
                    }
                })
            })
            .collect();
        Ok(Icosphere {
            level,
            vertices,
            cells,
            levels,
            raw,
            across,
        })
    }

    fn edge_tests(verts: &[[f64; 3]], tri: [usize; 3], p: [f64; 3]) -> [f64; 3] {
        let [a, b, c] = tri.map(|k| verts[k]);
        [dot(cross(a, b), p), dot(cross(b, c), p), dot(cross(c, a), p)]
    }

    fn contains(verts: &[[f64; 3]], tri: [usize; 3], p: [f64; 3]) -> f64 {
        let t = Self::edge_tests(verts, tri, p);
        t[0].min(t[1]).min(t[2])
    }

    /// Leaf cell containing the unit vector `p`: descent through the
    /// unrelaxed subdivision levels, then a walk across edges on the relaxed
    /// mesh. Points on shared edges go to the first match.
    pub fn locate(&self, p: [f64; 3]) -> usize {
        let pick = |range: std::ops::Range<usize>, tris: &[[usize; 3]]| -> usize {
            let mut best = range.start;
            let mut best_v = f64::NEG_INFINITY;
            for t in range {
                let v = Self::contains(&self.raw, tris[t], p);
                if v >= 0.0 {
                    return t;
                }
                if v > best_v {
                    best_v = v;
                    best = t;
                }
            }
            best
        };
        let mut t = pick(0..20, &self.levels[0]);
        for tris in &self.levels[1..] {
            t = pick(4 * t..4 * t + 4, tris);
        }
        for _ in 0..self.cells.len() {
            let tests = Self::edge_tests(&self.vertices, self.cells[t], p);
            let (worst, v) = tests
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (e, &v)| if v < acc.1 { (e, v) } else { acc });
            if v >= 0.0 {
                return t;
            }
            t = self.across[t][worst];
        }
        (0..self.cells.len())
            .max_by(|&a, &b| Self::contains(&self.vertices, self.cells[a], p).total_cmp(&Self::contains(&self.vertices, self.cells[b], p)))
            .unwrap()
    }

    /// Spherical area of each leaf cell (Van Oosterom and Strackee).
    pub fn cell_areas(&self) -> Vec<f64> {
        self.cells
            .iter()
            .map(|tri| {
                let [a, b, c] = tri.map(|k| self.vertices[k]);
                tri_area(a, b, c)
            })
            .collect()
    }

    pub fn centroid(&self, cell: usize) -> [f64; 3] {
        let [a, b, c] = self.cells[cell].map(|k| self.vertices[k]);
        normalize([a[0] + b[0] + c[0], a[1] + b[1] + c[1], a[2] + b[2] + c[2]])
    }

    /// Cells sharing at least one vertex.
    fn vertex_adjacency(&self) -> Vec<Vec<usize>> {
        let mut by_vertex: Vec<Vec<usize>> = vec![Vec::new(); self.vertices.len()];
        for (k, tri) in self.cells.iter().enumerate() {
            for &v in tri {
                by_vertex[v].push(k);
            }
        }
        let mut adj = vec![Vec::new(); self.cells.len()];
        for (k, tri) in self.cells.iter().enumerate() {
            for &v in tri {
                for &o in &by_vertex[v] {
                    if o != k && !adj[k].contains(&o) {
                        adj[k].push(o);
                    }
                }
            }
        }
        adj
    }
}

/// A proper rotation of the sphere, row-major.
pub type Rotation = [[f64; 3]; 3];

fn apply_transpose(r: &Rotation, p: [f64; 3]) -> [f64; 3] {
    [
        r[0][0] * p[0] + r[1][0] * p[1] + r[2][0] * p[2],
        r[0][1] * p[0] + r[1][1] * p[1] + r[2][1] * p[2],
        r[0][2] * p[0] + r[1][2] * p[1] + r[2][2] * p[2],
    ]
}

fn apply(r: &Rotation, p: [f64; 3]) -> [f64; 3] {
    [dot(r[0], p), dot(r[1], p), dot(r[2], p)]
}

/// Rasterize the sample values on an icosphere whose frame is `frame`
/// (the icosphere is carried by the rotation), and report the clusters of
/// uncovered cells under vertex adjacency.
pub fn coverage_sampled(samples: &[ExtComplex], level: u32, frame: Option<&Rotation>) -> Result<CoverageReport> {
    let pts: Vec<[f64; 3]> = samples
        .iter()
        .filter(|s| match s {
            ExtComplex::Finite(z) => z.re.is_finite() && z.im.is_finite(),
            ExtComplex::Infinity => true,
        })
        .map(|s| s.to_sphere())
        .collect();
    if pts.is_empty() {
        return Err(Error::Empty("coverage samples"));
    }
    let first = pts[0];
    let dispersion = pts
        .par_iter()
        .map(|p| ((p[0] - first[0]).powi(2) + (p[1] - first[1]).powi(2) + (p[2] - first[2]).powi(2)).sqrt())
        .reduce(|| 0.0, f64::max);
    if dispersion < CONSTANT_DISPERSION {
        return Ok(CoverageReport::constant(ExtComplex::from_sphere(first)));
    }
    let sphere = Icosphere::new(level)?;
    let hit: Vec<usize> = pts
        .par_iter()
        .map(|&p| {
            let local = match frame {
                Some(r) => apply_transpose(r, p),
                None => p,
            };
            sphere.locate(local)
        })
        .collect();
    let mut covered = vec![false; sphere.cells.len()];
    for k in hit {
        covered[k] = true;
    }
    let adj = sphere.vertex_adjacency();
    let mut seen = vec![false; covered.len()];
    let mut omitted = Vec::new();
    for start in 0..covered.len() {
        if covered[start] || seen[start] {
            continue;
        }
        let mut stack = vec![start];
        seen[start] = true;
        let mut sum = [0.0; 3];
        while let Some(k) = stack.pop() {
            let c = sphere.centroid(k);
            for a in 0..3 {
                sum[a] += c[a];
            }
            for &o in &adj[k] {
                if !covered[o] && !seen[o] {
                    seen[o] = true;
                    stack.push(o);
                }
            }
        }
        let mut centre = normalize(sum);
        if let Some(r) = frame {
            centre = apply(r, centre);
        }
        omitted.push(ExtComplex::from_sphere(centre));
    }
    let uncovered = covered.iter().filter(|c| !**c).count();
    Ok(CoverageReport {
        mode: CoverageMode::Sampled,
        omitted_count: OmittedCount::Count(omitted.len()),
        omitted,
        constant_value: None,
        cells_total: Some(sphere.cells.len()),
        cells_uncovered: Some(uncovered),
    })
}

/// Index of the uncovered cluster containing `value` in a sampled report
/// recomputed at the same level, if any.
pub fn in_uncovered_cluster(samples: &[ExtComplex], level: u32, value: ExtComplex) -> Result<bool> {
    let sphere = Icosphere::new(level)?;
    let cell = sphere.locate(value.to_sphere());
    let covered = samples.iter().any(|s| sphere.locate(s.to_sphere()) == cell);
    Ok(!covered)
}

/// Sphere rotation induced by the unitary Mobius map `(a w + b) / (-conj(b) w + conj(a))`
/// with `|a|^2 + |b|^2 = 1`.
pub fn su2_rotation(a: Complex64, b: Complex64) -> Rotation {
    let e = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let m = [a, b, -b.conj(), a.conj()];
    let image = |v: [f64; 3]| ExtComplex::from_sphere(v).mobius(m).to_sphere();
    let cols = [image(e[0]), image(e[1]), image(e[2])];
    [
        [cols[0][0], cols[1][0], cols[2][0]],
        [cols[0][1], cols[1][1], cols[2][1]],
        [cols[0][2], cols[1][2], cols[2][2]],
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Pass,
    Fail,
    ResolutionBounded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PicardVerdict {
    pub status: VerdictStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub annotation: Option<String>,
}

pub const HOROSPHERE_NOTE: &str = "constant hyperbolic Gauss map: M is a horosphere";

/// At most two omitted values, or a constant map.
pub fn picard_verdict(report: &CoverageReport) -> PicardVerdict {
    match (report.mode, report.omitted_count) {
        (CoverageMode::ConstantMap, _) | (_, OmittedCount::Constant) => PicardVerdict {
            status: VerdictStatus::Pass,
            annotation: Some(HOROSPHERE_NOTE.to_string()),
        },
        (CoverageMode::Sampled, _) => PicardVerdict {
            status: VerdictStatus::ResolutionBounded,
            annotation: None,
        },
        (CoverageMode::ExactRational, OmittedCount::Count(n)) => PicardVerdict {
            status: if n <= 2 { VerdictStatus::Pass } else { VerdictStatus::Fail },
            annotation: None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meromorphic::Poly;

    const ONE: Complex64 = Complex64::new(1.0, 0.0);

    #[test]
    fn icosphere_counts() {
        assert_eq!(Icosphere::new(1).unwrap().cells.len(), 20);
        assert_eq!(Icosphere::new(4).unwrap().cells.len(), 1280);
        let areas = Icosphere::new(4).unwrap().cell_areas();
        let total: f64 = areas.iter().sum();
        assert!((total - 4.0 * std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn locate_finds_containing_cell() {
        let s = Icosphere::new(3).unwrap();
        for k in 0..s.cells.len() {
            assert_eq!(s.locate(s.centroid(k)), k);
        }
    }

    #[test]
    fn exact_examples() {
        let e = [ExtComplex::new(0.0, 0.0), ExtComplex::Infinity];
        let r = omitted_values_exact(&PowerRational::identity(), &e).unwrap();
        assert_eq!(r.omitted_count, OmittedCount::Count(2));
        let sq = PowerRational::monomial(2.0, ONE);
        let r = omitted_values_exact(&sq, &[ExtComplex::new(1.0, 0.0)]).unwrap();
        assert_eq!(r.omitted_count, OmittedCount::Count(0));
        let r = omitted_values_exact(&sq, &e).unwrap();
        assert_eq!(r.omitted_count, OmittedCount::Count(2));
        let r = omitted_values_exact(&PowerRational::constant(ONE), &e).unwrap();
        assert_eq!(r.mode, CoverageMode::ConstantMap);
    }

    #[test]
    fn pole_preimages() {
        // G = 1 / (z (z - 1)): infinity has preimages {0, 1}
        let g = PowerRational::rational(Poly::from_real(&[1.0]), Poly::from_real(&[0.0, -1.0, 1.0])).unwrap();
        let r = omitted_values_exact(&g, &[ExtComplex::new(0.0, 0.0), ExtComplex::new(1.0, 0.0)]).unwrap();
        assert_eq!(r.omitted, vec![ExtComplex::Infinity]);
        let r = omitted_values_exact(&g, &[ExtComplex::new(0.0, 0.0)]).unwrap();
        assert!(r.omitted.is_empty());
    }

    #[test]
    fn verdicts() {
        let two = CoverageReport::exact(vec![ExtComplex::Infinity, ExtComplex::new(0.0, 0.0)]);
        assert_eq!(picard_verdict(&two).status, VerdictStatus::Pass);
        let three = CoverageReport::exact(vec![ExtComplex::Infinity, ExtComplex::new(0.0, 0.0), ExtComplex::new(1.0, 0.0)]);
        assert_eq!(picard_verdict(&three).status, VerdictStatus::Fail);
        let c = CoverageReport::constant(ExtComplex::new(2.0, 0.0));
        let v = picard_verdict(&c);
        assert_eq!(v.status, VerdictStatus::Pass);
        assert!(v.annotation.unwrap().contains("horosphere"));
    }

    #[test]
    fn serializes_symbolic_count() {
        let c = CoverageReport::constant(ExtComplex::Infinity);
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("\"omitted_count\":\"constant\""), "{s}");
    }
}
