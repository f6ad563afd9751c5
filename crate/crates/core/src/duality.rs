//! The dual surface: `g# = G`, `G# = g`, `omega# = -Q / dG`, together with
//! the lift metric `(1 + |G|^2)^2 |Q/dG|^2` and its total curvature.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bryant_data::{BryantData, SurfaceTopology, Target};
use crate::error::{Error, Result};
use crate::meromorphic::{ChartPoint, ExtComplex, PowerRational, SchwarzianEvaluator};
use crate::null_lift::TransportedGauss;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `(g#, f#) = (G, -f g' / G')`.
#[derive(Debug, Clone)]
pub struct DualData {
    pub g_sharp: PowerRational,
    pub f_sharp: PowerRational,
    pub source: BryantData,
}

impl DualData {
    /// The dual as hyperbolic-space data on the same punctured sphere.
    pub fn to_data(&self) -> BryantData {
        BryantData::new(
            self.g_sharp.clone(),
            self.f_sharp.clone(),
            self.source.punctures().to_vec(),
            Target::HyperbolicSpace,
        )
    }
}

pub fn dual_data(data: &BryantData, big_g: &PowerRational) -> Result<DualData> {
    if big_g.is_zero() || big_g.is_constant() {
        return Err(Error::ConstantGaussMap);
    }
    let gp = big_g.derivative();
    if gp.is_zero() {
        return Err(Error::ConstantGaussMap);
    }
    let q = data.f().mul(data.g_prime());
    let f_sharp = q.neg().div(&gp)?;
    Ok(DualData {
        g_sharp: big_g.clone(),
        f_sharp,
        source: data.clone(),
    })
}

/// `(1 + |G|^2)^2 |q / G'|^2`; infinite at critical points of `G`.
pub fn dual_metric_density(big_g: &PowerRational, q: Complex64, z: impl Into<ChartPoint>) -> f64 {
    let p = z.into();
    let (Some(g), Some(gp)) = (big_g.eval_at(p).finite(), big_g.derivative().eval_at(p).finite()) else {
        return f64::INFINITY;
    };
    if gp.norm() == 0.0 {
        return f64::INFINITY;
    }
    (1.0 + g.norm_sqr()).powi(2) * (q / gp).norm_sqr()
}

/// Pullback `4 |G'|^2 / (1 + |G|^2)^2` of the Fubini-Study area form,
/// evaluated through `1/G` where `|G| > 1` so poles of `G` are harmless.
#[derive(Debug, Clone)]
pub struct FubiniStudyDensity {
    g: PowerRational,
    gp: PowerRational,
    inv: Option<(PowerRational, PowerRational)>,
}

impl FubiniStudyDensity {
    pub fn new(big_g: &PowerRational) -> Self {
        let inv = PowerRational::constant(ONE).div(big_g).ok().map(|h| {
            let hp = h.derivative();
            (h, hp)
        });
        FubiniStudyDensity {
            g: big_g.clone(),
            gp: big_g.derivative(),
            inv,
        }
    }

    pub fn eval(&self, p: ChartPoint) -> f64 {
        let value = |g: Complex64, gp: Complex64| 4.0 * gp.norm_sqr() / (1.0 + g.norm_sqr()).powi(2);
        if let ExtComplex::Finite(g) = self.g.eval_at(p) {
            if g.norm() <= 1.0 {
                if let Some(gp) = self.gp.eval_at(p).finite() {
                    return value(g, gp);
                }
            }
        }
        match &self.inv {
            Some((h, hp)) => match (h.eval_at(p).finite(), hp.eval_at(p).finite()) {
                (Some(h), Some(hp)) => value(h, hp),
                _ => f64::INFINITY,
            },
            None => 0.0,
        }
    }
}

pub fn lift_curvature_density(big_g: &PowerRational, z: impl Into<ChartPoint>) -> f64 {
    FubiniStudyDensity::new(big_g).eval(z.into())
}

/// Anything whose Schwarzian derivative can be evaluated: closed-form
/// candidates and numerically transported Gauss maps.
pub trait GaussCandidate: Sync {
    fn schwarzian_at(&self, z: Complex64) -> Result<Complex64>;
}

impl GaussCandidate for PowerRational {
    fn schwarzian_at(&self, z: Complex64) -> Result<Complex64> {
        self.schwarzian(z)
    }
}

impl GaussCandidate for TransportedGauss {
    fn schwarzian_at(&self, z: Complex64) -> Result<Complex64> {
        self.schwarzian(z)
    }
}

/// `max |S(g) - S(G) - 2 f g'|` over the samples.
pub fn schwarzian_identity_residual(data: &BryantData, big_g: &dyn GaussCandidate, samples: &[Complex64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty("schwarzian samples"));
    }
    let sg = SchwarzianEvaluator::new(data.g());
    let fg = data.f().mul(data.g_prime());
    let residuals: Vec<f64> = samples
        .par_iter()
        .map(|&z| -> Result<f64> {
            let s_small = sg.eval(ChartPoint::principal(z))?;
            let s_big = big_g.schwarzian_at(z)?;
            let q = fg
                .eval(z)
                .finite()
                .ok_or_else(|| Error::CriticalPoint(format!("Hopf differential has a pole at {z}")))?;
            Ok((s_small - s_big - 2.0 * q).norm())
        })
        .collect::<Result<_>>()?;
    Ok(residuals.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TotalCurvature {
    /// `(R, integral over |z| <= R)` for each exhaustion radius.
    pub estimates: Vec<(f64, f64)>,
    /// Aitken-accelerated limit of the last three estimates.
    pub limit: f64,
    pub divergent: bool,
}

/// Polar quadrature of a density over `|z - center| <= r_max`: Gauss-Legendre
/// in `r` on the inner disk and in `s = ln r` on panels outside, trapezoid in
/// the angle.
pub fn polar_integral(density: &(dyn Fn(ChartPoint) -> f64 + Sync), center: Complex64, r_max: f64) -> f64 {
    const R_IN: f64 = 0.05;
    const N_THETA: usize = 256;
    let (nodes, weights) = gauss_legendre_8();
    let ring = |r: f64| -> f64 {
        let h = std::f64::consts::TAU / N_THETA as f64;
        let mut acc = 0.0;
        for k in 0..N_THETA {
            let theta = -std::f64::consts::PI + (k as f64 + 0.5) * h;
            let z = center + Complex64::from_polar(r, theta);
            let p = if center == Complex64::new(0.0, 0.0) {
                ChartPoint::from_log(Complex64::new(r.ln(), theta))
            } else {
                ChartPoint::principal(z)
            };
            acc += density(p);
        }
        acc * h
    };
    let r_in = R_IN.min(r_max);
    // inner disk, in r
    let inner: f64 = (0..8)
        .map(|k| {
            let r = 0.5 * r_in * (nodes[k] + 1.0);
            0.5 * r_in * weights[k] * r * ring(r)
        })
        .sum();
    if r_max <= r_in {
        return inner;
    }
    let (s0, s1) = (r_in.ln(), r_max.ln());
    let panels = ((s1 - s0) / 0.25).ceil() as usize;
    let ds = (s1 - s0) / panels as f64;
    let outer: Vec<f64> = (0..panels)
        .into_par_iter()
        .map(|p| {
            let a = s0 + p as f64 * ds;
            (0..8)
                .map(|k| {
                    let s = a + 0.5 * ds * (nodes[k] + 1.0);
                    let r = s.exp();
                    0.5 * ds * weights[k] * r * r * ring(r)
                })
                .sum::<f64>()
        })
        .collect();
    // fixed-order pairwise-free summation keeps results deterministic
    inner + outer.iter().sum::<f64>()
}

fn gauss_legendre_8() -> ([f64; 8], [f64; 8]) {
    let x = [
        -0.960_289_856_497_536_3,
        -0.796_666_477_413_626_7,
        -0.525_532_409_916_329,
        -0.183_434_642_495_649_8,
        0.183_434_642_495_649_8,
        0.525_532_409_916_329,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_3,
    ];
    let w = [
        0.101_228_536_290_376_26,
        0.222_381_034_453_374_47,
        0.313_706_645_877_887_3,
        0.362_683_783_378_362,
        0.362_683_783_378_362,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_47,
        0.101_228_536_290_376_26,
    ];
    (x, w)
}

/// Aitken's delta-squared limit of three terms of a sequence whose error
/// decays geometrically. Returns `None` if the differences do not contract.
/// Differences at roundoff level mean the sequence has already converged.
pub fn aitken(a: f64, b: f64, c: f64) -> Option<f64> {
    let (d1, d2) = (b - a, c - b);
    let noise = 1e-12 * a.abs().max(b.abs()).max(c.abs());
    if d2.abs() <= noise {
        return Some(c);
    }
    let ratio = d2 / d1;
    if !ratio.is_finite() || ratio.abs() >= 0.9 {
        return None;
    }
    Some(c - d2 * d2 / (d2 - d1))
}

/// Total curvature of the lift metric, `int 4|G'|^2 / (1 + |G|^2)^2 dA`,
/// over the disks `|z| <= R` for each exhaustion radius, extrapolated.
pub fn dual_total_curvature(big_g: &PowerRational, radii: &[f64]) -> Result<TotalCurvature> {
    if radii.len() < 3 {
        return Err(Error::InvalidArgument("need at least three exhaustion radii".into()));
    }
    if big_g.is_zero() || big_g.is_constant() {
        return Ok(TotalCurvature {
            estimates: radii.iter().map(|&r| (r, 0.0)).collect(),
            limit: 0.0,
            divergent: false,
        });
    }
    let density = FubiniStudyDensity::new(big_g);
    let f = |p: ChartPoint| density.eval(p);
    let estimates: Vec<(f64, f64)> = radii.iter().map(|&r| (r, polar_integral(&f, Complex64::new(0.0, 0.0), r))).collect();
    let k = estimates.len();
    let (a, b, c) = (estimates[k - 3].1, estimates[k - 2].1, estimates[k - 1].1);
    let limit = aitken(a, b, c);
    Ok(TotalCurvature {
        estimates,
        limit: limit.unwrap_or(f64::INFINITY),
        divergent: limit.is_none() || !c.is_finite(),
    })
}

/// Default exhaustion radii.
pub const DEFAULT_RADII: [f64; 3] = [10.0, 20.0, 40.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    pub margin: f64,
    pub applicable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityPair {
    /// `(1/2pi) int K dA <= chi - n`.
    pub osserman: InequalityReport,
    /// `(1/2pi) int K dA < chi`.
    pub cohn_vossen: InequalityReport,
}

/// `lhs = -K_T / (2 pi)` against `chi - n` and `chi`. A constant Gauss map
/// leaves the first check inapplicable; the strict bound for zero curvature
/// is only meaningful with fewer than two ends.
pub fn inequality_checks(total: f64, topology: SurfaceTopology, constant_gauss: bool) -> InequalityPair {
    let lhs = -total / (2.0 * std::f64::consts::PI);
    let chi = topology.euler as f64;
    let n = topology.n_ends as f64;
    let osserman = InequalityReport {
        lhs,
        rhs: chi - n,
        satisfied: constant_gauss || lhs <= chi - n + 1e-9,
        margin: (chi - n) - lhs,
        applicable: !constant_gauss,
    };
    let cv_applicable = !(constant_gauss && topology.n_ends >= 2);
    let cohn_vossen = InequalityReport {
        lhs,
        rhs: chi,
        satisfied: !cv_applicable || lhs < chi,
        margin: chi - lhs,
        applicable: cv_applicable,
    };
    InequalityPair { osserman, cohn_vossen }
}

/// Heuristic completeness toward an end: the length of a radial ray in the
/// metric `density`, per decade of distance to the puncture. Diverging
/// lengths show as last-decade increments that do not shrink.
pub fn radial_length_diverges(density: &dyn Fn(Complex64) -> f64, end: ExtComplex, anchor: Complex64) -> bool {
    // points z(t) approaching the end geometrically as t grows
    let point = |t: f64| match end {
        ExtComplex::Infinity => anchor * t.exp(),
        ExtComplex::Finite(p) => p + (anchor - p) * (-t).exp(),
    };
    let decade = |k: usize| -> f64 {
        let (a, b) = (k as f64 * 10f64.ln(), (k + 1) as f64 * 10f64.ln());
        let n = 200;
        let h = (b - a) / n as f64;
        (0..n)
            .map(|i| {
                let t = a + (i as f64 + 0.5) * h;
                let z0 = point(t - 0.5 * h);
                let z1 = point(t + 0.5 * h);
                density(point(t)).sqrt() * (z1 - z0).norm()
            })
            .sum()
    };
    let (prev, last) = (decade(3), decade(4));
    last.is_finite() && (last.is_infinite() || last >= 0.5 * prev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn dual_examples() {
        let d = BryantData::new(PowerRational::identity(), PowerRational::constant(ONE), vec![ExtComplex::Infinity], Target::HyperbolicSpace);
        let dual = dual_data(&d, &PowerRational::identity()).unwrap();
        assert_eq!(dual.f_sharp.eval(c(0.3, 0.4)), ExtComplex::Finite(-ONE));
        assert!(matches!(dual_data(&d, &PowerRational::constant(ONE)), Err(Error::ConstantGaussMap)));
    }

    #[test]
    fn density_examples() {
        let id = PowerRational::identity();
        assert_eq!(dual_metric_density(&id, ONE, c(0.0, 0.0)), 1.0);
        assert_eq!(dual_metric_density(&id, ONE, c(1.0, 0.0)), 4.0);
        let sq = PowerRational::monomial(2.0, ONE);
        assert!((dual_metric_density(&sq, ONE, c(1.0, 0.0)) - 1.0).abs() < 1e-15);
        assert!(dual_metric_density(&sq, ONE, c(0.0, 0.0)).is_infinite());
        assert_eq!(lift_curvature_density(&PowerRational::constant(c(2.0, 0.0)), c(1.0, 1.0)), 0.0);
        assert_eq!(lift_curvature_density(&id, c(0.0, 0.0)), 4.0);
        // through a pole of G
        let inv = PowerRational::monomial(-1.0, ONE);
        assert!((lift_curvature_density(&inv, c(0.0, 0.0)) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn polar_integral_of_fs_density() {
        let f = |p: ChartPoint| 4.0 / (1.0 + p.z.norm_sqr()).powi(2);
        let r: f64 = 3.0;
        let exact = 4.0 * PI * r * r / (1.0 + r * r);
        assert!((polar_integral(&f, c(0.0, 0.0), r) - exact).abs() < 1e-10);
    }

    #[test]
    fn aitken_on_geometric_sequence() {
        let s = |k: i32| 5.0 - 0.25f64.powi(k);
        assert!((aitken(s(1), s(2), s(3)).unwrap() - 5.0).abs() < 1e-12);
        assert!(aitken(1.0, 2.0, 3.0).is_none());
        assert_eq!(aitken(2.0, 3.0 + 4e-16, 3.0 + 8e-16), Some(3.0 + 8e-16));
    }

    #[test]
    fn inequality_examples() {
        let two_ends = SurfaceTopology { n_ends: 2, euler: 0 };
        let r = inequality_checks(4.0 * PI, two_ends, false);
        assert!((r.osserman.lhs + 2.0).abs() < 1e-12 && r.osserman.satisfied && r.osserman.margin.abs() < 1e-12);
        assert!(r.cohn_vossen.satisfied);
        let r = inequality_checks(8.0 * PI, two_ends, false);
        assert!(r.osserman.satisfied && (r.osserman.lhs + 4.0).abs() < 1e-12);
        let horo = inequality_checks(0.0, two_ends, true);
        assert!(!horo.osserman.applicable && !horo.cohn_vossen.applicable);
        let horo1 = inequality_checks(0.0, SurfaceTopology { n_ends: 1, euler: 1 }, true);
        assert!(horo1.cohn_vossen.applicable && horo1.cohn_vossen.satisfied);
    }

    #[test]
    fn radial_length_heuristic() {
        // flat plane: complete toward infinity, incomplete toward a regular point
        let flat = |_: Complex64| 1.0;
        assert!(radial_length_diverges(&flat, ExtComplex::Infinity, ONE));
        assert!(!radial_length_diverges(&flat, ExtComplex::new(0.0, 0.0), ONE));
        // |z|^-2: logarithmic divergence at the origin
        let cyl = |z: Complex64| 1.0 / z.norm_sqr();
        assert!(radial_length_diverges(&cyl, ExtComplex::new(0.0, 0.0), ONE));
    }
}
