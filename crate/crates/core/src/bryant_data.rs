//! Representation data `(g, omega = f dz)` on a punctured sphere.
//!
//! The target tag selects the hyperbolic-space metric
//! `(1 + |g|^2)^2 |f|^2 |dz|^2` or the de Sitter metric
//! `(1 - |g|^2)^2 |f|^2 |dz|^2`, which degenerates on `|g| = 1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ChartGrid;
use crate::meromorphic::{ChartPoint, ExtComplex, PowerRational};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    #[serde(rename = "h3")]
    HyperbolicSpace,
    #[serde(rename = "desitter")]
    DeSitterSpace,
}

/// Element `[[p, q], [conj q, conj p]]` of SU(1,1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SU11Element {
    p: Complex64,
    q: Complex64,
}

impl SU11Element {
    pub fn new(p: Complex64, q: Complex64) -> Result<Self> {
        let defect = p.norm_sqr() - q.norm_sqr() - 1.0;
        if defect.abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "|p|^2 - |q|^2 = 1 violated by {defect:e}"
            )));
        }
        Ok(SU11Element { p, q })
    }

    pub fn identity() -> Self {
        SU11Element { p: ONE, q: ZERO }
    }

    /// `p = e^{i a} cosh t`, `q = e^{i b} sinh t`.
    pub fn from_parameters(t: f64, a: f64, b: f64) -> Self {
        SU11Element {
            p: Complex64::from_polar(t.cosh(), a),
            q: Complex64::from_polar(t.sinh(), b),
        }
    }

    pub fn p(&self) -> Complex64 {
        self.p
    }

    pub fn q(&self) -> Complex64 {
        self.q
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurfaceTopology {
    pub n_ends: usize,
    pub euler: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    PoleZeroMismatch,
    MetricDegeneracy,
    NonHolomorphicForm,
    PunctureBookkeeping,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub location: Option<ExtComplex>,
    pub message: String,
}

/// Data `(g, f)` on the sphere minus the end set, with a target space.
#[derive(Debug, Clone)]
pub struct BryantData {
    g: PowerRational,
    f: PowerRational,
    punctures: Vec<ExtComplex>,
    target: Target,
    g_prime: PowerRational,
    g2f: PowerRational,
    /// `(-1/g, g^2 f, (-1/g)')`: the same metric written near poles of `g`.
    rotated: Option<(PowerRational, PowerRational, PowerRational)>,
}

impl BryantData {
    pub fn new(g: PowerRational, f: PowerRational, punctures: Vec<ExtComplex>, target: Target) -> Self {
        let g_prime = g.derivative();
        let g2f = g.mul(&g).mul(&f);
        let rotated = PowerRational::constant(-ONE).div(&g).ok().map(|gr| {
            let grp = gr.derivative();
            (gr, g2f.clone(), grp)
        });
        BryantData {
            g,
            f,
            punctures,
            target,
            g_prime,
            g2f,
            rotated,
        }
    }

    pub fn g(&self) -> &PowerRational {
        &self.g
    }

    pub fn f(&self) -> &PowerRational {
        &self.f
    }

    pub fn g_prime(&self) -> &PowerRational {
        &self.g_prime
    }

    pub fn punctures(&self) -> &[ExtComplex] {
        &self.punctures
    }

    pub fn target(&self) -> Target {
        self.target
    }

    pub fn with_target(&self, target: Target) -> Self {
        BryantData::new(self.g.clone(), self.f.clone(), self.punctures.clone(), target)
    }

    pub fn genus(&self) -> usize {
        0
    }

    pub fn topology(&self) -> SurfaceTopology {
        let n = self.punctures.len();
        SurfaceTopology {
            n_ends: n,
            euler: 2 - n as i64,
        }
    }

    pub fn is_puncture(&self, p: ExtComplex, tol: f64) -> bool {
        self.punctures.iter().any(|&e| match (e, p) {
            (ExtComplex::Infinity, ExtComplex::Infinity) => true,
            (ExtComplex::Finite(a), ExtComplex::Finite(b)) => (a - b).norm() <= tol,
            _ => false,
        })
    }

    /// Well-formedness diagnostics; an empty list means the data is clean.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut push = |kind, location, message: String| {
            out.push(Diagnostic {
                kind,
                location,
                message,
            })
        };

        if self.punctures.is_empty() {
            push(
                DiagnosticKind::PunctureBookkeeping,
                None,
                "no ends declared: a compact genus-0 domain carries no such immersion".into(),
            );
        }
        for (i, a) in self.punctures.iter().enumerate() {
            if self.punctures[..i].iter().any(|b| a.chordal_distance(*b) < 1e-12) {
                push(DiagnosticKind::PunctureBookkeeping, Some(*a), format!("duplicate puncture {a}"));
            }
        }
        if self.f.is_zero() {
            push(DiagnosticKind::NonHolomorphicForm, None, "f is identically zero".into());
            return out;
        }
        for (name, m) in [("g", &self.g), ("f", &self.f)] {
            if !m.is_rational() {
                for p in [ExtComplex::new(0.0, 0.0), ExtComplex::Infinity] {
                    if !self.is_puncture(p, 1e-12) {
                        push(
                            DiagnosticKind::PunctureBookkeeping,
                            Some(p),
                            format!("branch point of {name} = z^{} ... at {p} must be an end", m.alpha()),
                        );
                    }
                }
            }
        }

        // candidate special points in the finite plane
        let mut points: Vec<Complex64> = Vec::new();
        let mut add = |z: Complex64| {
            if !points.iter().any(|p| (p - z).norm() <= 1e-7 * (1.0 + z.norm())) {
                points.push(z);
            }
        };
        if !self.g.is_zero() {
            if let Ok(poles) = self.g.finite_poles() {
                poles.into_iter().for_each(|(z, _)| add(z));
            }
        }
        if let Ok(zs) = self.f.finite_zeros() {
            zs.into_iter().for_each(|(z, _)| add(z));
        }
        if let Ok(ps) = self.f.finite_poles() {
            ps.into_iter().for_each(|(z, _)| add(z));
        }
        if !self.g.is_rational() && self.g.alpha() < 0.0 {
            add(ZERO);
        }

        for z in points {
            let loc = ExtComplex::Finite(z);
            let g_ord = if self.g.is_zero() { 0.0 } else { self.g.order_at(loc).unwrap_or(0.0) };
            let f_ord = self.f.order_at(loc).unwrap_or(0.0);
            self.check_point(loc, g_ord, f_ord, &mut out);
        }
        if !self.is_puncture(ExtComplex::Infinity, 0.0) {
            let loc = ExtComplex::Infinity;
            let g_ord = if self.g.is_zero() { 0.0 } else { self.g.order_at(loc).unwrap_or(0.0) };
            // dz = -w^-2 dw in the coordinate w = 1/z
            let f_ord = self.f.order_at(loc).unwrap_or(0.0) - 2.0;
            self.check_point(loc, g_ord, f_ord, &mut out);
        }
        out
    }

    // The pole/zero matching rule is applied at every finite point,
    // punctures included; at infinity only when infinity is not an end.
    fn check_point(&self, loc: ExtComplex, g_ord: f64, f_ord: f64, out: &mut Vec<Diagnostic>) {
        let end = self.is_puncture(loc, 1e-7);
        if g_ord < 0.0 {
            let k = -g_ord;
            if f_ord < 2.0 * k - 1e-9 {
                out.push(Diagnostic {
                    kind: DiagnosticKind::PoleZeroMismatch,
                    location: Some(loc),
                    message: format!(
                        "pole of order {k} of g at {loc} needs a zero of order {} of f, found order {f_ord}",
                        2.0 * k
                    ),
                });
            } else if f_ord > 2.0 * k + 1e-9 && !end {
                out.push(Diagnostic {
                    kind: DiagnosticKind::MetricDegeneracy,
                    location: Some(loc),
                    message: format!("metric vanishes at {loc}: f has order {f_ord} at a pole of order {k} of g"),
                });
            }
            return;
        }
        if end {
            return;
        }
        if f_ord < 0.0 {
            out.push(Diagnostic {
                kind: DiagnosticKind::NonHolomorphicForm,
                location: Some(loc),
                message: format!("f has a pole of order {} at {loc}, which is not an end", -f_ord),
            });
        } else if f_ord > 0.0 {
            out.push(Diagnostic {
                kind: DiagnosticKind::MetricDegeneracy,
                location: Some(loc),
                message: format!("metric vanishes at {loc}: f has a zero of order {f_ord}"),
            });
        }
    }

    /// `(|f| +- |g^2 f|)^2 = (1 +- |g|^2)^2 |f|^2`, infinite at
    /// non-removable singularities.
    pub fn metric_density(&self, p: impl Into<ChartPoint>) -> f64 {
        let p = p.into();
        let (Some(f), Some(g2f)) = (self.f.eval_at(p).finite(), self.g2f.eval_at(p).finite()) else {
            return f64::INFINITY;
        };
        let lam = match self.target {
            Target::HyperbolicSpace => f.norm() + g2f.norm(),
            Target::DeSitterSpace => f.norm() - g2f.norm(),
        };
        lam * lam
    }

    /// Values `(g, g', f)` in a frame where `|g| <= 1`: for `|g| > 1` the
    /// rotated data `(-1/g, (-1/g)', g^2 f)` is used instead. Both metrics
    /// and curvatures are invariant under this rotation.
    fn local_values(&self, p: ChartPoint) -> Option<(Complex64, Complex64, Complex64)> {
        let g = self.g.eval_at(p);
        let small = matches!(g, ExtComplex::Finite(v) if v.norm() <= 1.0);
        if small || self.rotated.is_none() {
            let g = g.finite()?;
            Some((g, self.g_prime.eval_at(p).finite()?, self.f.eval_at(p).finite()?))
        } else {
            let (gr, fr, grp) = self.rotated.as_ref()?;
            Some((gr.eval_at(p).finite()?, grp.eval_at(p).finite()?, fr.eval_at(p).finite()?))
        }
    }

    /// `-4 |g'|^2 / (|f|^2 (1 + |g|^2)^4)` for the hyperbolic-space metric.
    pub fn gauss_curvature(&self, p: impl Into<ChartPoint>) -> Result<f64> {
        if self.target != Target::HyperbolicSpace {
            return Err(Error::WrongTarget("gauss_curvature needs the hyperbolic-space target"));
        }
        let p = p.into();
        let degenerate = || Error::DegenerateMetric(format!("{}", ExtComplex::Finite(p.z)));
        let (g, gp, f) = self.local_values(p).ok_or_else(degenerate)?;
        let lam = (1.0 + g.norm_sqr()) * f.norm();
        if lam == 0.0 || !lam.is_finite() {
            return Err(degenerate());
        }
        Ok(-4.0 * gp.norm_sqr() / (lam * lam * (1.0 + g.norm_sqr()).powi(2)))
    }

    /// Intrinsic curvature `4 |g'|^2 / (|f|^2 (1 - |g|^2)^4)` of the
    /// de Sitter induced metric, away from the singular set.
    pub fn desitter_intrinsic_curvature(&self, p: impl Into<ChartPoint>) -> Result<f64> {
        if self.target != Target::DeSitterSpace {
            return Err(Error::WrongTarget("de Sitter curvature needs the de Sitter target"));
        }
        let p = p.into();
        let degenerate = || Error::DegenerateMetric(format!("{}", ExtComplex::Finite(p.z)));
        let (g, gp, f) = self.local_values(p).ok_or_else(degenerate)?;
        let s = 1.0 - g.norm_sqr();
        let lam = s * f.norm();
        if lam == 0.0 || !lam.is_finite() {
            return Err(degenerate());
        }
        Ok(4.0 * gp.norm_sqr() / (lam * lam * s * s))
    }

    /// Density `q = f g'` of the Hopf differential `Q = q dz^2`.
    pub fn hopf_density(&self, p: impl Into<ChartPoint>) -> ExtComplex {
        let p = p.into();
        match self.local_values(p) {
            Some((_, gp, f)) => ExtComplex::from(f * gp),
            None => ExtComplex::Infinity,
        }
    }

    /// The SU(1,1)-equivalent data
    /// `(p g + q) / (conj(q) g + conj(p))`, `(conj(q) g + conj(p))^2 f`.
    pub fn su11_action(&self, b: &SU11Element) -> Result<BryantData> {
        if self.target != Target::DeSitterSpace {
            return Err(Error::WrongTarget("SU(1,1) action applies to de Sitter data"));
        }
        let (p, q) = (b.p, b.q);
        let (g_new, factor) = if q == ZERO {
            (self.g.scale(p / p.conj()), PowerRational::constant(p.conj()))
        } else {
            let g_new = self.g.mobius_compose([p, q, q.conj(), p.conj()])?;
            let factor = self.g.mobius_compose([q.conj(), p.conj(), ZERO, ONE])?;
            (g_new, factor)
        };
        let f_new = factor.mul(&factor).mul(&self.f);
        Ok(BryantData::new(g_new, f_new, self.punctures.clone(), self.target))
    }

    /// Isometric SU(2) change of frame `g -> (p g + q) / (-conj(q) g + conj(p))`,
    /// `f -> (-conj(q) g + conj(p))^2 f`, with `|p|^2 + |q|^2 = 1`.
    pub fn su2_action(&self, p: Complex64, q: Complex64) -> Result<BryantData> {
        let n = (p.norm_sqr() + q.norm_sqr()).sqrt();
        let (p, q) = (p / n, q / n);
        if q == ZERO {
            let factor = PowerRational::constant(p.conj());
            return Ok(BryantData::new(
                self.g.scale(p / p.conj()),
                factor.mul(&factor).mul(&self.f),
                self.punctures.clone(),
                self.target,
            ));
        }
        let g_new = self.g.mobius_compose([p, q, -q.conj(), p.conj()])?;
        let factor = self.g.mobius_compose([-q.conj(), p.conj(), ZERO, ONE])?;
        let f_new = factor.mul(&factor).mul(&self.f);
        Ok(BryantData::new(g_new, f_new, self.punctures.clone(), self.target))
    }

    /// Rotate the frame so that `g` vanishes at the end `p`. The metric and
    /// curvature are unchanged; the end expansion of the result exposes the
    /// decay rate of the curvature.
    pub fn normalized_at_end(&self, end: ExtComplex) -> Result<BryantData> {
        if self.g.is_zero() {
            return Ok(self.clone());
        }
        let order = self.g.order_at(end)?;
        if order > 0.0 {
            return Ok(self.clone());
        }
        if order < 0.0 {
            return self.su2_action(ZERO, ONE);
        }
        let a = match end {
            ExtComplex::Infinity => self.g.value_at_infinity(),
            ExtComplex::Finite(z) => self.g.eval(z),
        }
        .finite()
        .ok_or_else(|| Error::BadExpansionPoint(format!("{end}"), "g has no finite value".into()))?;
        self.su2_action(ONE, -a)
    }

    /// Cells of a chart grid across which `|g|^2 - 1` changes sign: the
    /// singular set of a de Sitter face.
    pub fn singular_locus(&self, grid: &ChartGrid) -> Result<Vec<(usize, usize)>> {
        if self.target != Target::DeSitterSpace {
            return Err(Error::WrongTarget("singular locus applies to de Sitter data"));
        }
        let (n, m) = grid.dims();
        let sign: Vec<i8> = (0..n * m)
            .map(|idx| {
                let (i, j) = grid.coords(idx);
                match self.g.eval_at(grid.node_point(i, j)) {
                    ExtComplex::Infinity => 1,
                    ExtComplex::Finite(v) => {
                        let s = v.norm_sqr() - 1.0;
                        if s > 0.0 {
                            1
                        } else if s < 0.0 {
                            -1
                        } else {
                            0
                        }
                    }
                }
            })
            .collect();
        let mut cells: Vec<(usize, usize)> = grid
            .cells()
            .filter(|&(i, j)| {
                let corners = grid.cell_corners(i, j).map(|(a, b)| sign[grid.index(a, b)]);
                let min = *corners.iter().min().unwrap();
                let max = *corners.iter().max().unwrap();
                min < max || corners.contains(&0)
            })
            .collect();
        cells.sort_by_key(|&(i, j)| (j, i));
        Ok(cells)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meromorphic::Poly;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn data(g: PowerRational, f: PowerRational, e: Vec<ExtComplex>, t: Target) -> BryantData {
        BryantData::new(g, f, e, t)
    }

    fn inv() -> PowerRational {
        PowerRational::monomial(-1.0, ONE)
    }

    #[test]
    fn validate_examples() {
        let d = data(PowerRational::identity(), PowerRational::constant(ONE), vec![ExtComplex::Infinity], Target::HyperbolicSpace);
        assert!(d.validate().is_empty(), "{:?}", d.validate());

        let ends = vec![ExtComplex::new(0.0, 0.0), ExtComplex::Infinity];
        let d = data(inv(), PowerRational::constant(ONE), ends.clone(), Target::HyperbolicSpace);
        let diags = d.validate();
        assert_eq!(diags.len(), 1, "{diags:?}");
        assert_eq!(diags[0].kind, DiagnosticKind::PoleZeroMismatch);
        assert_eq!(diags[0].location, Some(ExtComplex::new(0.0, 0.0)));

        let d = data(inv(), PowerRational::monomial(2.0, ONE), ends, Target::HyperbolicSpace);
        assert!(d.validate().is_empty(), "{:?}", d.validate());
    }

    #[test]
    fn validate_flags_interior_zero_and_pole_of_f() {
        let f = PowerRational::rational(Poly::from_real(&[-1.0, 1.0]), Poly::from_real(&[2.0, 1.0])).unwrap();
        let d = data(PowerRational::zero(), f, vec![ExtComplex::Infinity], Target::HyperbolicSpace);
        let kinds: Vec<_> = d.validate().into_iter().map(|x| x.kind).collect();
        assert!(kinds.contains(&DiagnosticKind::MetricDegeneracy));
        assert!(kinds.contains(&DiagnosticKind::NonHolomorphicForm));
    }

    #[test]
    fn validate_bookkeeping() {
        let d = data(PowerRational::identity(), PowerRational::constant(ONE), vec![], Target::HyperbolicSpace);
        assert!(d.validate().iter().any(|x| x.kind == DiagnosticKind::PunctureBookkeeping));
        let d = data(
            PowerRational::monomial(0.5, ONE),
            PowerRational::monomial(-1.5, ONE),
            vec![ExtComplex::Infinity],
            Target::HyperbolicSpace,
        );
        assert!(d.validate().iter().any(|x| x.kind == DiagnosticKind::PunctureBookkeeping));
    }

    #[test]
    fn catenoid_cousin_is_clean() {
        let f = PowerRational::monomial(-3.0, c(-3.0 / 8.0, 0.0));
        let ends = vec![ExtComplex::new(0.0, 0.0), ExtComplex::Infinity];
        let d = data(PowerRational::monomial(2.0, ONE), f, ends, Target::HyperbolicSpace);
        assert!(d.validate().is_empty(), "{:?}", d.validate());
    }

    #[test]
    fn metric_density_examples() {
        let horo = data(PowerRational::zero(), PowerRational::constant(ONE), vec![ExtComplex::Infinity], Target::HyperbolicSpace);
        assert_eq!(horo.metric_density(c(0.3, 0.7)), 1.0);
        let enn = data(PowerRational::identity(), PowerRational::constant(ONE), vec![ExtComplex::Infinity], Target::HyperbolicSpace);
        assert_eq!(enn.metric_density(c(1.0, 0.0)), 4.0);
        let ds = enn.with_target(Target::DeSitterSpace);
        assert!(ds.metric_density(Complex64::from_polar(1.0, 0.4)).abs() < 1e-30);
        // removable: g = 1/z, f = z^2 at the origin
        let r = data(inv(), PowerRational::monomial(2.0, ONE), vec![ExtComplex::Infinity], Target::HyperbolicSpace);
        assert!((r.metric_density(c(0.0, 0.0)) - 1.0).abs() < 1e-15);
        // non-removable
        let bad = data(inv(), PowerRational::constant(ONE), vec![ExtComplex::Infinity], Target::HyperbolicSpace);
        assert!(bad.metric_density(c(0.0, 0.0)).is_infinite());
    }

    #[test]
    fn curvature_examples() {
        let cst = data(PowerRational::constant(c(2.0, 1.0)), PowerRational::constant(ONE), vec![ExtComplex::Infinity], Target::HyperbolicSpace);
        assert_eq!(cst.gauss_curvature(c(0.4, 0.1)).unwrap(), 0.0);
        let enn = data(PowerRational::identity(), PowerRational::constant(ONE), vec![ExtComplex::Infinity], Target::HyperbolicSpace);
        assert_eq!(enn.gauss_curvature(c(0.0, 0.0)).unwrap(), -4.0);
        assert!((enn.gauss_curvature(c(1.0, 0.0)).unwrap() + 0.25).abs() < 1e-15);
        // -4 / (1 + |z|^2)^4 far out: the rotated frame avoids overflow
        let k = enn.gauss_curvature(c(1e10, 0.0)).unwrap();
        assert!((k / -4e-80 - 1.0).abs() < 1e-12, "{k}");
        assert!(enn.with_target(Target::DeSitterSpace).gauss_curvature(c(0.0, 0.0)).is_err());
    }

    #[test]
    fn hopf_examples() {
        let enn = data(PowerRational::identity(), PowerRational::constant(ONE), vec![ExtComplex::Infinity], Target::HyperbolicSpace);
        let q = enn.hopf_density(c(2.0, 5.0)).finite().unwrap();
        assert!((q - ONE).norm() < 1e-15);
        let sq = data(PowerRational::monomial(2.0, ONE), PowerRational::constant(ONE), vec![ExtComplex::Infinity], Target::HyperbolicSpace);
        let q = sq.hopf_density(c(3.0, 0.0)).finite().unwrap();
        assert!((q - c(6.0, 0.0)).norm() < 1e-14);
        let r = data(inv(), PowerRational::monomial(2.0, ONE), vec![ExtComplex::Infinity], Target::HyperbolicSpace);
        let q = r.hopf_density(c(2.0, 0.0)).finite().unwrap();
        assert!((q + ONE).norm() < 1e-15);
    }

    #[test]
    fn su11_examples() {
        let d = data(PowerRational::zero(), PowerRational::constant(ONE), vec![ExtComplex::Infinity], Target::DeSitterSpace);
        let same = d.su11_action(&SU11Element::identity()).unwrap();
        assert_eq!(same.g(), d.g());
        assert_eq!(same.f(), d.f());

        let b = SU11Element::from_parameters(1.0, 0.0, 0.0);
        let moved = d.su11_action(&b).unwrap();
        let g = moved.g().eval(c(0.5, 0.5)).finite().unwrap();
        let f = moved.f().eval(c(0.5, 0.5)).finite().unwrap();
        assert!((g - c(1f64.tanh(), 0.0)).norm() < 1e-15);
        assert!((f - c(1f64.cosh().powi(2), 0.0)).norm() < 1e-14);
        assert!(d.with_target(Target::HyperbolicSpace).su11_action(&b).is_err());
    }

    #[test]
    fn singular_locus_examples() {
        let grid = ChartGrid::rect([-2.0, 2.0], [-2.0, 2.0], 41, 41).unwrap();
        let ends = vec![ExtComplex::Infinity];
        let d = data(PowerRational::identity(), PowerRational::constant(ONE), ends.clone(), Target::DeSitterSpace);
        let cells = d.singular_locus(&grid).unwrap();
        assert!(!cells.is_empty());
        let (h, _) = grid.spacing();
        for &(i, j) in &cells {
            let z = grid.node_z(i, j) + c(h / 2.0, h / 2.0);
            assert!((z.norm() - 1.0).abs() <= h * 1.5, "cell at {z}");
        }
        let flat = data(PowerRational::constant(c(2.0, 0.0)), PowerRational::constant(ONE), ends.clone(), Target::DeSitterSpace);
        assert!(flat.singular_locus(&grid).unwrap().is_empty());
        let sq = data(PowerRational::monomial(2.0, ONE), PowerRational::constant(ONE), ends, Target::DeSitterSpace);
        assert_eq!(sq.singular_locus(&grid).unwrap(), cells);
    }

    #[test]
    fn end_normalization_preserves_metric() {
        let enn = data(PowerRational::identity(), PowerRational::constant(ONE), vec![ExtComplex::Infinity], Target::HyperbolicSpace);
        let n = enn.normalized_at_end(ExtComplex::Infinity).unwrap();
        assert!(n.g().order_at(ExtComplex::Infinity).unwrap() > 0.0);
        let shifted = data(
            PowerRational::rational(Poly::from_real(&[1.0, 0.0, 1.0]), Poly::from_real(&[0.0, 0.0, 1.0])).unwrap(),
            PowerRational::constant(ONE),
            vec![ExtComplex::Infinity],
            Target::HyperbolicSpace,
        );
        let m = shifted.normalized_at_end(ExtComplex::Infinity).unwrap();
        assert!(m.g().order_at(ExtComplex::Infinity).unwrap() > 0.0);
        for z in [c(0.3, 0.2), c(-2.0, 1.0), c(5.0, -4.0)] {
            for (a, b) in [(&enn, &n), (&shifted, &m)] {
                let (x, y) = (a.metric_density(z), b.metric_density(z));
                assert!((x - y).abs() <= 1e-12 * x, "{x} vs {y}");
                let (k1, k2) = (a.gauss_curvature(z).unwrap(), b.gauss_curvature(z).unwrap());
                assert!((k1 - k2).abs() <= 1e-12 * k1.abs());
            }
        }
    }
}
