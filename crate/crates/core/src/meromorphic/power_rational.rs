use num_complex::Complex64;

use super::ext::ExtComplex;
use super::poly::Poly;
use super::roots::poly_roots;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tolerance for treating a real exponent as an integer.
const INTEGER_EXPONENT_TOL: f64 = 1e-12;
/// Relative tolerance for numeric common-root cancellation.
const COMMON_ROOT_TOL: f64 = 1e-9;

/// A complex point together with a chosen logarithm, fixing the branch of
/// `z^alpha` for non-integer exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub z: Complex64,
    pub log_z: Complex64,
}

impl ChartPoint {
    /// Principal branch: argument in (-pi, pi].
    pub fn principal(z: Complex64) -> Self {
        ChartPoint { z, log_z: z.ln() }
    }

    /// Branch with the cut along the ray at angle `cut`: argument in
    /// `(cut - 2 pi, cut]`.
    pub fn with_cut(z: Complex64, cut: f64) -> Self {
        let tau = std::f64::consts::TAU;
        let mut arg = z.arg();
        while arg > cut {
            arg -= tau;
        }
        while arg <= cut - tau {
            arg += tau;
        }
        ChartPoint {
            z,
            log_z: Complex64::new(z.norm().ln(), arg),
        }
    }

    /// Point given by its logarithm, `z = exp(log_z)`.
    pub fn from_log(log_z: Complex64) -> Self {
        ChartPoint {
            z: log_z.exp(),
            log_z,
        }
    }
}

impl From<Complex64> for ChartPoint {
    fn from(z: Complex64) -> Self {
        ChartPoint::principal(z)
    }
}

/// The function `z^alpha P(z) / Q(z)`.
///
/// Kept in a canonical form: integer exponents are folded into the
/// polynomials (so `alpha == 0` for every rational map), non-integer
/// exponents absorb all powers of `z` from `P` and `Q`, exact common powers
/// of `z` cancel, and `Q` is monic.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerRational {
    alpha: f64,
    numer: Poly,
    denom: Poly,
}

impl PowerRational {
    pub fn new(alpha: f64, numer: Poly, denom: Poly) -> Result<Self> {
        if denom.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidArgument(format!("exponent {alpha}")));
        }
        Ok(Self::canonical(alpha, numer, denom))
    }

    pub fn rational(numer: Poly, denom: Poly) -> Result<Self> {
        Self::new(0.0, numer, denom)
    }

    pub fn polynomial(numer: Poly) -> Self {
        Self::canonical(0.0, numer, Poly::constant(ONE))
    }

    pub fn constant(c: Complex64) -> Self {
        Self::polynomial(Poly::constant(c))
    }

    pub fn zero() -> Self {
        Self::polynomial(Poly::zero())
    }

    /// The identity map `z`.
    pub fn identity() -> Self {
        Self::monomial(1.0, ONE)
    }

    /// `c z^alpha` for any real exponent.
    pub fn monomial(alpha: f64, c: Complex64) -> Self {
        Self::canonical(alpha, Poly::constant(c), Poly::constant(ONE))
    }

    fn canonical(alpha: f64, numer: Poly, denom: Poly) -> Self {
        if numer.is_zero() {
            return PowerRational {
                alpha: 0.0,
                numer: Poly::zero(),
                denom: Poly::constant(ONE),
            };
        }
        let mut alpha = alpha;
        let mut numer = numer;
        let mut denom = denom;

        let k = alpha.round();
        if (alpha - k).abs() <= INTEGER_EXPONENT_TOL {
            if k > 0.0 {
                numer = numer.shift_up(k as usize);
            } else if k < 0.0 {
                denom = denom.shift_up((-k) as usize);
            }
            alpha = 0.0;
            let zn = numer.low_order().unwrap_or(0);
            let zd = denom.low_order().unwrap_or(0);
            let common = zn.min(zd);
            numer = numer.shift_down(common);
            denom = denom.shift_down(common);
        } else {
            let zn = numer.low_order().unwrap_or(0);
            let zd = denom.low_order().unwrap_or(0);
            numer = numer.shift_down(zn);
            denom = denom.shift_down(zd);
            alpha += zn as f64 - zd as f64;
        }

        let lead = denom.leading();
        if lead != ONE {
            let inv = ONE / lead;
            numer = numer.scale(inv);
            denom = denom.scale(inv);
        }
        PowerRational {
            alpha,
            numer,
            denom,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn numer(&self) -> &Poly {
        &self.numer
    }

    pub fn denom(&self) -> &Poly {
        &self.denom
    }

    pub fn is_rational(&self) -> bool {
        self.alpha == 0.0
    }

    pub fn is_zero(&self) -> bool {
        self.numer.is_zero()
    }

    /// True when the map is constant (including identically zero).
    pub fn is_constant(&self) -> bool {
        self.is_rational()
            && self.numer.degree().unwrap_or(0) == 0
            && self.denom.degree() == Some(0)
    }

    /// Degree of a rational map as a branched covering of the sphere.
    pub fn degree(&self) -> Result<usize> {
        if !self.is_rational() {
            return Err(Error::NotRational(self.alpha));
        }
        Ok(self
            .numer
            .degree()
            .unwrap_or(0)
            .max(self.denom.degree().unwrap_or(0)))
    }

    /// Value on the principal branch.
    pub fn eval(&self, z: Complex64) -> ExtComplex {
        self.eval_at(ChartPoint::principal(z))
    }

    /// Value with the branch cut of `z^alpha` along the ray at angle `cut`.
    pub fn eval_branch(&self, z: Complex64, cut: f64) -> ExtComplex {
        self.eval_at(ChartPoint::with_cut(z, cut))
    }

    pub fn eval_at(&self, p: ChartPoint) -> ExtComplex {
        let z = p.z;
        let q = self.denom.eval(z);
        let n = self.numer.eval(z);
        if self.alpha != 0.0 && z == ZERO {
            if self.numer.is_zero() {
                return ExtComplex::Finite(ZERO);
            }
            return if self.alpha > 0.0 {
                ExtComplex::Finite(ZERO)
            } else {
                ExtComplex::Infinity
            };
        }
        if q == ZERO {
            return if n == ZERO {
                // unreduced common root: fall back to the reduced form
                match self.reduced() {
                    Ok(r) if r.denom.eval(z) != ZERO => r.eval_at(p),
                    _ => ExtComplex::Infinity,
                }
            } else {
                ExtComplex::Infinity
            };
        }
        let base = n / q;
        let v = if self.alpha == 0.0 {
            base
        } else {
            base * (p.log_z * self.alpha).exp()
        };
        ExtComplex::from(v)
    }

    /// Finite value or `None` at a pole; principal branch.
    pub fn value(&self, z: Complex64) -> Option<Complex64> {
        self.eval(z).finite()
    }

    /// Limit at infinity.
    pub fn value_at_infinity(&self) -> ExtComplex {
        if self.numer.is_zero() {
            return ExtComplex::Finite(ZERO);
        }
        let n = self.numer.degree().unwrap_or(0) as f64;
        let m = self.denom.degree().unwrap_or(0) as f64;
        let growth = self.alpha + n - m;
        if growth < 0.0 {
            ExtComplex::Finite(ZERO)
        } else if growth > 0.0 {
            ExtComplex::Infinity
        } else {
            ExtComplex::Finite(self.numer.leading() / self.denom.leading())
        }
    }

    /// Closed-form derivative: `(z^a R)' = z^(a-1) (a R + z R')`.
    pub fn derivative(&self) -> PowerRational {
        let p = &self.numer;
        let q = &self.denom;
        let wronsk = &(&p.derivative() * q) - &(p * &q.derivative());
        let denom = q * q;
        let out = if self.alpha == 0.0 {
            Self::canonical(0.0, wronsk, denom)
        } else {
            let numer = &(p * q).scale(Complex64::new(self.alpha, 0.0)) + &wronsk.shift_up(1);
            Self::canonical(self.alpha - 1.0, numer, denom)
        };
        out.reduced().unwrap_or(out)
    }

    /// Cancel numerically common roots of `P` and `Q`.
    pub fn reduced(&self) -> Result<PowerRational> {
        let mut numer = self.numer.clone();
        let mut denom = self.denom.clone();
        'outer: loop {
            let dn = numer.degree().unwrap_or(0);
            let dd = denom.degree().unwrap_or(0);
            if dn == 0 || dd == 0 {
                break;
            }
            let (small, big) = if dn <= dd {
                (&numer, &denom)
            } else {
                (&denom, &numer)
            };
            let candidates = poly_roots(small)?;
            for r in candidates {
                let (m_big, _) = big.root_multiplicity(r, COMMON_ROOT_TOL);
                if m_big > 0 {
                    let (m_small, _) = small.root_multiplicity(r, COMMON_ROOT_TOL);
                    if m_small == 0 {
                        continue;
                    }
                    numer = numer.deflate(r).0;
                    denom = denom.deflate(r).0;
                    continue 'outer;
                }
            }
            break;
        }
        Ok(Self::canonical(self.alpha, numer, denom))
    }

    pub fn mul(&self, rhs: &PowerRational) -> PowerRational {
        let out = Self::canonical(
            self.alpha + rhs.alpha,
            &self.numer * &rhs.numer,
            &self.denom * &rhs.denom,
        );
        out.reduced().unwrap_or(out)
    }

    pub fn div(&self, rhs: &PowerRational) -> Result<PowerRational> {
        if rhs.is_zero() {
            return Err(Error::IdenticallyZero);
        }
        let out = Self::canonical(
            self.alpha - rhs.alpha,
            &self.numer * &rhs.denom,
            &self.denom * &rhs.numer,
        );
        Ok(out.reduced().unwrap_or(out))
    }

    pub fn scale(&self, s: Complex64) -> PowerRational {
        Self::canonical(self.alpha, self.numer.scale(s), self.denom.clone())
    }

    pub fn neg(&self) -> PowerRational {
        self.scale(-ONE)
    }

    /// Sum of two functions whose exponents differ by an integer.
    pub fn add(&self, rhs: &PowerRational) -> Result<PowerRational> {
        if self.is_zero() {
            return Ok(rhs.clone());
        }
        if rhs.is_zero() {
            return Ok(self.clone());
        }
        let diff = self.alpha - rhs.alpha;
        let k = diff.round();
        if (diff - k).abs() > INTEGER_EXPONENT_TOL {
            return Err(Error::InvalidArgument(format!(
                "exponents {} and {} differ by a non-integer",
                self.alpha, rhs.alpha
            )));
        }
        let (lo, hi, shift) = if k >= 0.0 {
            (rhs, self, k as usize)
        } else {
            (self, rhs, (-k) as usize)
        };
        let numer = &(&hi.numer * &lo.denom).shift_up(shift) + &(&lo.numer * &hi.denom);
        let out = Self::canonical(lo.alpha, numer, &hi.denom * &lo.denom);
        Ok(out.reduced().unwrap_or(out))
    }

    /// Composition `M o self` with the Mobius map `(a w + b) / (c w + d)`.
    pub fn mobius_compose(&self, m: [Complex64; 4]) -> Result<PowerRational> {
        if !self.is_rational() {
            return Err(Error::NotRational(self.alpha));
        }
        let [a, b, c, d] = m;
        let numer = &self.numer.scale(a) + &self.denom.scale(b);
        let denom = &self.numer.scale(c) + &self.denom.scale(d);
        let out = PowerRational::rational(numer, denom)?;
        Ok(out.reduced().unwrap_or(out))
    }

    /// Order of the function at a point of the sphere: positive for zeros,
    /// negative for poles. For non-integer exponents only `0` and infinity
    /// are admissible branch points; elsewhere the exponent is a unit.
    pub fn order_at(&self, point: ExtComplex) -> Result<f64> {
        if self.is_zero() {
            return Err(Error::IdenticallyZero);
        }
        match point {
            ExtComplex::Infinity => {
                let n = self.numer.degree().unwrap_or(0) as f64;
                let m = self.denom.degree().unwrap_or(0) as f64;
                Ok(m - n - self.alpha)
            }
            ExtComplex::Finite(p) => {
                let (mp, _) = self.numer.root_multiplicity(p, COMMON_ROOT_TOL);
                let (mq, _) = self.denom.root_multiplicity(p, COMMON_ROOT_TOL);
                let base = mp as f64 - mq as f64;
                Ok(if p == ZERO { base + self.alpha } else { base })
            }
        }
    }

    /// Finite poles with their orders (for rational maps, plus the origin
    /// for negative non-integer exponents).
    pub fn finite_poles(&self) -> Result<Vec<(Complex64, usize)>> {
        let mut out = Vec::new();
        for r in cluster_roots(&poly_roots(&self.denom)?) {
            let (m, _) = self.denom.root_multiplicity(r, 1e-7);
            out.push((r, m.max(1)));
        }
        Ok(out)
    }

    /// Finite zeros with their orders.
    pub fn finite_zeros(&self) -> Result<Vec<(Complex64, usize)>> {
        if self.is_zero() {
            return Err(Error::IdenticallyZero);
        }
        let mut out = Vec::new();
        for r in cluster_roots(&poly_roots(&self.numer)?) {
            let (m, _) = self.numer.root_multiplicity(r, 1e-7);
            out.push((r, m.max(1)));
        }
        Ok(out)
    }

    /// Promote an integer exponent into the polynomials; errors for
    /// genuinely multivalued functions.
    pub fn to_rational(&self) -> Result<PowerRational> {
        if self.is_rational() {
            Ok(self.clone())
        } else {
            Err(Error::NotRational(self.alpha))
        }
    }

    /// `S(m) = (m''/m')' - (m''/m')^2 / 2` at `z`.
    pub fn schwarzian(&self, z: Complex64) -> Result<Complex64> {
        SchwarzianEvaluator::new(self).eval(ChartPoint::principal(z))
    }
}

/// Cached first three derivatives for repeated Schwarzian evaluation.
#[derive(Debug, Clone)]
pub struct SchwarzianEvaluator {
    d1: PowerRational,
    d2: PowerRational,
    d3: PowerRational,
}

impl SchwarzianEvaluator {
    pub fn new(m: &PowerRational) -> Self {
        let d1 = m.derivative();
        let d2 = d1.derivative();
        let d3 = d2.derivative();
        SchwarzianEvaluator { d1, d2, d3 }
    }

    pub fn eval(&self, p: ChartPoint) -> Result<Complex64> {
        let critical = || Error::CriticalPoint(format!("{}", ExtComplex::Finite(p.z)));
        let g1 = self.d1.eval_at(p).finite().ok_or_else(critical)?;
        if g1 == ZERO {
            return Err(critical());
        }
        let g2 = self.d2.eval_at(p).finite().ok_or_else(critical)?;
        let g3 = self.d3.eval_at(p).finite().ok_or_else(critical)?;
        let r = g2 / g1;
        // (g''/g')' = g'''/g' - (g''/g')^2
        Ok(g3 / g1 - 1.5 * r * r)
    }
}

/// Merge numerically coincident roots (multiple roots come back from the
/// eigenvalue solver as tight clusters).
fn cluster_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut reps: Vec<(Complex64, usize)> = Vec::new();
    for &r in roots {
        match reps
            .iter_mut()
            .find(|(c, _)| (*c - r).norm() <= 1e-5 * (1.0 + r.norm()))
        {
            Some((c, n)) => {
                *c = (*c * *n as f64 + r) / (*n as f64 + 1.0);
                *n += 1;
            }
            None => reps.push((r, 1)),
        }
    }
    reps.into_iter().map(|(c, _)| c).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fin(v: ExtComplex) -> Complex64 {
        v.finite().expect("finite value")
    }

    #[test]
    fn eval_identity_and_square() {
        let id = PowerRational::identity();
        assert_eq!(fin(id.eval(c(2.0, 0.0))), c(2.0, 0.0));
        let sq = PowerRational::monomial(2.0, ONE);
        assert!((fin(sq.eval(c(0.0, 1.0))) - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn eval_half_power_principal_branch() {
        let m = PowerRational::monomial(0.5, ONE);
        let v = fin(m.eval(c(-1.0, 0.0)));
        let oracle = (c(0.0, 0.5 * PI)).exp();
        assert!((v - oracle).norm() < 1e-15);
        assert!((v * v - c(-1.0, 0.0)).norm() < 1e-15);
        // the other side of the cut
        let v2 = fin(m.eval_branch(c(-1.0, 0.0), 0.0));
        assert!((v2 - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn eval_poles_and_zero_power() {
        let inv = PowerRational::rational(Poly::from_real(&[1.0]), Poly::from_real(&[0.0, 1.0]))
            .unwrap();
        assert!(inv.eval(c(0.0, 0.0)).is_infinite());
        let neg = PowerRational::monomial(-0.5, ONE);
        assert!(neg.eval(c(0.0, 0.0)).is_infinite());
        let pos = PowerRational::monomial(0.5, ONE);
        assert_eq!(pos.eval(c(0.0, 0.0)), ExtComplex::Finite(ZERO));
    }

    #[test]
    fn integer_exponent_is_folded() {
        let m = PowerRational::monomial(-3.0, ONE);
        assert!(m.is_rational());
        assert_eq!(m.denom(), &Poly::monomial(3, ONE));
    }

    #[test]
    fn derivative_examples() {
        let sq = PowerRational::monomial(2.0, ONE);
        assert_eq!(sq.derivative(), PowerRational::monomial(1.0, c(2.0, 0.0)));
        let inv = PowerRational::monomial(-1.0, ONE);
        assert_eq!(inv.derivative(), PowerRational::monomial(-2.0, c(-1.0, 0.0)));
        let h = PowerRational::monomial(1.5, ONE).derivative();
        assert_eq!(h.alpha(), 0.5);
        assert!((fin(h.eval(c(4.0, 0.0))) - c(3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn schwarzian_examples() {
        let id = PowerRational::identity();
        assert!(id.schwarzian(c(0.3, -0.2)).unwrap().norm() < 1e-15);
        let mob = PowerRational::rational(Poly::from_real(&[1.0, 2.0]), Poly::from_real(&[1.0, 1.0]))
            .unwrap();
        assert!(mob.schwarzian(c(0.0, 0.0)).unwrap().norm() < 1e-12);
        let sq = PowerRational::monomial(2.0, ONE);
        assert!((sq.schwarzian(c(1.0, 0.0)).unwrap() - c(-1.5, 0.0)).norm() < 1e-14);
        assert!(matches!(sq.schwarzian(ZERO), Err(Error::CriticalPoint(_))));
    }

    #[test]
    fn reduction_cancels_common_roots() {
        // (z^2 - 1) / (z - 1) == z + 1
        let m = PowerRational::rational(Poly::from_real(&[-1.0, 0.0, 1.0]), Poly::from_real(&[-1.0, 1.0]))
            .unwrap()
            .reduced()
            .unwrap();
        assert_eq!(m.denom().degree(), Some(0));
        assert!((fin(m.eval(c(1.0, 0.0))) - c(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn orders_at_points() {
        let g = PowerRational::rational(Poly::from_real(&[0.0, 0.0, 1.0]), Poly::from_real(&[1.0, 1.0]))
            .unwrap();
        assert_eq!(g.order_at(ExtComplex::Finite(ZERO)).unwrap(), 2.0);
        assert_eq!(g.order_at(ExtComplex::new(-1.0, 0.0)).unwrap(), -1.0);
        assert_eq!(g.order_at(ExtComplex::Infinity).unwrap(), -1.0);
        let h = PowerRational::monomial(1.5, ONE);
        assert_eq!(h.order_at(ExtComplex::Finite(ZERO)).unwrap(), 1.5);
        assert_eq!(h.order_at(ExtComplex::Infinity).unwrap(), -1.5);
    }

    #[test]
    fn degree_and_constant() {
        assert!(PowerRational::constant(c(2.0, 0.0)).is_constant());
        assert!(PowerRational::zero().is_constant());
        assert!(!PowerRational::identity().is_constant());
        let m = PowerRational::rational(Poly::from_real(&[1.0, 0.0, 1.0]), Poly::from_real(&[0.0, 1.0]))
            .unwrap();
        assert_eq!(m.degree().unwrap(), 2);
    }
}
