use num_complex::Complex64;
use serde::Serialize;

use super::ext::ExtComplex;
use super::poly::Poly;
use super::power_rational::{ChartPoint, PowerRational};
use crate::error::{Error, Result};

/// Local form of the data at an end, in a coordinate `w` vanishing at the
/// puncture (`w = z - p`, or `w = 1/z` at infinity):
///
/// `g = w^(1 + beta) g_hat(w)`, `f dz = w^(-(1 + I)) f_hat(w) dw`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndExpansion {
    pub puncture: ExtComplex,
    pub beta: f64,
    pub big_i: f64,
    pub g_hat0: Complex64,
    pub f_hat0: Complex64,
    #[serde(skip)]
    pub g_hat: PowerRational,
    #[serde(skip)]
    pub f_hat: PowerRational,
}

impl EndExpansion {
    /// Decay exponent `2 + 2(1 + beta) / I` of the curvature bound in terms
    /// of intrinsic distance. Only meaningful for `I > 0`.
    pub fn predicted_decay_exponent(&self) -> f64 {
        2.0 + 2.0 * (1.0 + self.beta) / self.big_i
    }

    /// Local coordinate of `z`.
    pub fn local_coordinate(&self, z: Complex64) -> Complex64 {
        match self.puncture {
            ExtComplex::Infinity => Complex64::new(1.0, 0.0) / z,
            ExtComplex::Finite(p) => z - p,
        }
    }

    /// `w^(1+beta) g_hat(w)` evaluated on the principal branch of `w`.
    pub fn reconstruct_g(&self, w: Complex64) -> ExtComplex {
        let lead = (ChartPoint::principal(w).log_z * (1.0 + self.beta)).exp();
        match self.g_hat.eval(w) {
            ExtComplex::Finite(v) => ExtComplex::Finite(lead * v),
            ExtComplex::Infinity => ExtComplex::Infinity,
        }
    }

    /// `w^(-(1+I)) f_hat(w)`: density of the one-form in the local
    /// coordinate.
    pub fn reconstruct_f(&self, w: Complex64) -> ExtComplex {
        let lead = (ChartPoint::principal(w).log_z * -(1.0 + self.big_i)).exp();
        match self.f_hat.eval(w) {
            ExtComplex::Finite(v) => ExtComplex::Finite(lead * v),
            ExtComplex::Infinity => ExtComplex::Infinity,
        }
    }
}

/// Unit-leading local factor of `m` in the coordinate `w` at `point`.
/// Returns `(order_in_w, hat)` with `m = w^order * hat(w)`, `hat(0) != 0`,
/// before accounting for the `dz -> dw` change of a one-form.
fn local_factor(m: &PowerRational, point: ExtComplex) -> Result<(f64, PowerRational)> {
    if m.is_zero() {
        return Err(Error::IdenticallyZero);
    }
    match point {
        ExtComplex::Infinity => {
            let n = m.numer().degree().unwrap_or(0) as f64;
            let d = m.denom().degree().unwrap_or(0) as f64;
            let order = d - n - m.alpha();
            let hat = PowerRational::rational(m.numer().reversed(), m.denom().reversed())?;
            Ok((order, hat))
        }
        ExtComplex::Finite(p) if p == Complex64::new(0.0, 0.0) => {
            let zn = m.numer().low_order().unwrap_or(0);
            let zd = m.denom().low_order().unwrap_or(0);
            let order = m.alpha() + zn as f64 - zd as f64;
            let hat = PowerRational::rational(m.numer().shift_down(zn), m.denom().shift_down(zd))?;
            Ok((order, hat))
        }
        ExtComplex::Finite(p) => {
            if !m.is_rational() {
                return Err(Error::BadExpansionPoint(
                    format!("{point}"),
                    "non-integer exponents branch only at 0 and infinity".into(),
                ));
            }
            let (mp, _) = m.numer().root_multiplicity(p, 1e-9);
            let (mq, _) = m.denom().root_multiplicity(p, 1e-9);
            let shifted = |poly: &Poly, k: usize| -> Poly {
                let s = poly.taylor_shift(p);
                let mut coeffs = s.coeffs().to_vec();
                for c in coeffs.iter_mut().take(k) {
                    *c = Complex64::new(0.0, 0.0);
                }
                Poly::new(coeffs).shift_down(k)
            };
            let hat = PowerRational::rational(shifted(m.numer(), mp), shifted(m.denom(), mq))?;
            Ok((mp as f64 - mq as f64, hat))
        }
    }
}

/// Read off `beta`, `I` and the leading coefficients of the data at an end.
pub fn end_expansion(g: &PowerRational, f: &PowerRational, puncture: ExtComplex) -> Result<EndExpansion> {
    if g.is_zero() || f.is_zero() {
        return Err(Error::IdenticallyZero);
    }
    let (g_order, g_hat) = local_factor(g, puncture)?;
    let (mut f_order, mut f_hat) = local_factor(f, puncture)?;
    if puncture.is_infinite() {
        // dz = -w^-2 dw
        f_order -= 2.0;
        f_hat = f_hat.neg();
    }
    let at0 = |m: &PowerRational| -> Result<Complex64> {
        m.eval(Complex64::new(0.0, 0.0))
            .finite()
            .filter(|v| v.norm() > 0.0)
            .ok_or_else(|| {
                Error::BadExpansionPoint(format!("{puncture}"), "leading coefficient vanishes".into())
            })
    };
    Ok(EndExpansion {
        puncture,
        beta: g_order - 1.0,
        big_i: -f_order - 1.0,
        g_hat0: at0(&g_hat)?,
        f_hat0: at0(&f_hat)?,
        g_hat,
        f_hat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn origin() -> ExtComplex {
        ExtComplex::new(0.0, 0.0)
    }

    #[test]
    fn integer_orders() {
        let g = PowerRational::monomial(2.0, c(1.0, 0.0));
        let f = PowerRational::monomial(-3.0, c(1.0, 0.0));
        let e = end_expansion(&g, &f, origin()).unwrap();
        assert_eq!((e.beta, e.big_i), (1.0, 2.0));

        let g = PowerRational::monomial(-1.0, c(1.0, 0.0));
        let f = PowerRational::identity();
        let e = end_expansion(&g, &f, origin()).unwrap();
        assert_eq!((e.beta, e.big_i), (-2.0, -2.0));
    }

    #[test]
    fn fractional_orders_match_numerical_order_oracle() {
        let g = PowerRational::monomial(1.5, c(1.0, 0.0));
        let f = PowerRational::monomial(-2.5, c(1.0, 0.0));
        let e = end_expansion(&g, &f, origin()).unwrap();
        assert!((e.beta - 0.5).abs() < 1e-12);
        assert!((e.big_i - 1.5).abs() < 1e-12);

        // oracle: d log|m| / d log|z| between the circles |z| = 1e-3 and 2e-3
        let slope = |m: &PowerRational| {
            let a = m.eval(c(1e-3, 0.0)).finite().unwrap().norm().ln();
            let b = m.eval(c(2e-3, 0.0)).finite().unwrap().norm().ln();
            (b - a) / 2f64.ln()
        };
        assert!((slope(&g) - (1.0 + e.beta)).abs() < 1e-9);
        assert!((slope(&f) + (1.0 + e.big_i)).abs() < 1e-9);
    }

    #[test]
    fn expansion_at_infinity() {
        // enneper cousin: g = z, f = 1
        let g = PowerRational::identity();
        let f = PowerRational::constant(c(1.0, 0.0));
        let e = end_expansion(&g, &f, ExtComplex::Infinity).unwrap();
        assert_eq!((e.beta, e.big_i), (-2.0, 1.0));
        assert_eq!(e.f_hat0, c(-1.0, 0.0));
    }

    #[test]
    fn reconstruction_on_small_circle() {
        let g = PowerRational::rational(
            Poly::new(vec![c(0.0, 0.0), c(0.0, 0.0), c(2.0, 1.0), c(1.0, 0.0)]),
            Poly::new(vec![c(1.0, 0.0), c(0.5, -0.5)]),
        )
        .unwrap();
        let f = PowerRational::rational(Poly::from_real(&[1.0, 1.0]), Poly::from_real(&[0.0, 0.0, 0.0, 1.0]))
            .unwrap();
        for p in [origin(), ExtComplex::new(-2.0, 0.0), ExtComplex::Infinity] {
            let e = end_expansion(&g, &f, p).unwrap();
            let mut worst = 0.0f64;
            for k in 0..64 {
                let w = Complex64::from_polar(1e-3, std::f64::consts::TAU * k as f64 / 64.0 + 0.1);
                let z = match p {
                    ExtComplex::Infinity => Complex64::new(1.0, 0.0) / w,
                    ExtComplex::Finite(p) => p + w,
                };
                let direct = g.eval(z).finite().unwrap();
                let rebuilt = e.reconstruct_g(w).finite().unwrap();
                worst = worst.max((direct - rebuilt).norm() / (1.0 + direct.norm()));
            }
            assert!(worst <= 1e-8, "puncture {p}: {worst}");
        }
    }

    #[test]
    fn zero_data_is_rejected() {
        let g = PowerRational::zero();
        let f = PowerRational::constant(c(1.0, 0.0));
        assert_eq!(end_expansion(&g, &f, ExtComplex::Infinity), Err(Error::IdenticallyZero));
    }
}
