use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

/// Dense complex polynomial, coefficients lowest degree first.
///
/// Trailing zeros are always trimmed, so the zero polynomial is the empty
/// coefficient list and `degree()` is `None` for it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

impl Poly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Poly::new(vec![c])
    }

    /// The monomial `c z^k`.
    pub fn monomial(k: usize, c: Complex64) -> Self {
        let mut coeffs = vec![ZERO; k + 1];
        coeffs[k] = c;
        Poly::new(coeffs)
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Poly::new(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| *c == ZERO) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or(ZERO)
    }

    /// Sum of coefficient moduli; the scale used for relative tolerances.
    pub fn norm1(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Number of exactly vanishing low-order coefficients (the order of the
    /// zero at the origin). `None` for the zero polynomial.
    pub fn low_order(&self) -> Option<usize> {
        if self.is_zero() {
            return None;
        }
        self.coeffs.iter().position(|c| *c != ZERO)
    }

    /// Divide by `z^k`, dropping the `k` lowest coefficients.
    pub fn shift_down(&self, k: usize) -> Poly {
        Poly::new(self.coeffs.iter().skip(k).copied().collect())
    }

    /// Multiply by `z^k`.
    pub fn shift_up(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![ZERO; k];
        coeffs.extend_from_slice(&self.coeffs);
        Poly::new(coeffs)
    }

    /// Synthetic division by `(z - r)`; returns quotient and remainder.
    pub fn deflate(&self, r: Complex64) -> (Poly, Complex64) {
        let n = self.coeffs.len();
        if n == 0 {
            return (Poly::zero(), ZERO);
        }
        let mut q = vec![ZERO; n - 1];
        let mut acc = ZERO;
        for k in (0..n).rev() {
            acc = acc * r + self.coeffs[k];
            if k > 0 {
                q[k - 1] = acc;
            }
        }
        (Poly::new(q), acc)
    }

    /// Multiplicity of `r` as a root, using a remainder tolerance relative to
    /// the coefficient scale. Returns the multiplicity and the deflated
    /// cofactor.
    pub fn root_multiplicity(&self, r: Complex64, rel_tol: f64) -> (usize, Poly) {
        let mut current = self.clone();
        let mut mult = 0;
        if r == ZERO {
            let k = current.low_order().unwrap_or(0);
            return (k, current.shift_down(k));
        }
        while current.degree().is_some_and(|d| d > 0) {
            let scale = current
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c.norm() * r.norm().powi(k as i32))
                .sum::<f64>()
                .max(f64::MIN_POSITIVE);
            let (q, rem) = current.deflate(r);
            if rem.norm() > rel_tol * scale {
                break;
            }
            mult += 1;
            current = q;
        }
        (mult, current)
    }

    /// Coefficients of `p(w + shift)` as a polynomial in `w`.
    pub fn taylor_shift(&self, shift: Complex64) -> Poly {
        let n = self.coeffs.len();
        let mut out = self.coeffs.clone();
        for i in 0..n {
            for k in (i..n.saturating_sub(1)).rev() {
                let add = out[k + 1] * shift;
                out[k] += add;
            }
        }
        Poly::new(out)
    }

    /// `z^n p(1/z)` for `n = deg p`: the coefficient list reversed.
    pub fn reversed(&self) -> Poly {
        Poly::new(self.coeffs.iter().rev().copied().collect())
    }

    /// Zero coefficients whose modulus is below `rel_tol * norm1`, then trim.
    pub fn chop(&self, rel_tol: f64) -> Poly {
        let cut = rel_tol * self.norm1();
        Poly::new(
            self.coeffs
                .iter()
                .map(|&c| if c.norm() <= cut { ZERO } else { c })
                .collect(),
        )
    }

    pub fn pow(&self, k: u32) -> Poly {
        (0..k).fold(Poly::constant(Complex64::new(1.0, 0.0)), |acc, _| &acc * self)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(ZERO)
                        + rhs.coeffs.get(k).copied().unwrap_or(ZERO)
                })
                .collect(),
        )
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| -c).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn horner_and_derivative() {
        let p = Poly::from_real(&[1.0, 0.0, 3.0]);
        assert_eq!(p.eval(c(2.0, 0.0)), c(13.0, 0.0));
        assert_eq!(p.derivative(), Poly::from_real(&[0.0, 6.0]));
    }

    #[test]
    fn trimmed_zero() {
        let p = Poly::new(vec![ZERO, ZERO]);
        assert!(p.is_zero());
        assert_eq!(p.degree(), None);
    }

    #[test]
    fn deflation_and_multiplicity() {
        // (z - 1)^2 (z + 2)
        let p = &(&Poly::from_real(&[-1.0, 1.0]) * &Poly::from_real(&[-1.0, 1.0]))
            * &Poly::from_real(&[2.0, 1.0]);
        let (m, rest) = p.root_multiplicity(c(1.0, 0.0), 1e-12);
        assert_eq!(m, 2);
        assert_eq!(rest, Poly::from_real(&[2.0, 1.0]));
        let (m0, _) = Poly::from_real(&[0.0, 0.0, 5.0]).root_multiplicity(ZERO, 1e-12);
        assert_eq!(m0, 2);
    }

    #[test]
    fn taylor_shift_matches_eval() {
        let p = Poly::new(vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 1.0), c(2.0, 0.0)]);
        let s = c(0.7, -1.1);
        let q = p.taylor_shift(s);
        for w in [c(0.0, 0.0), c(0.3, 0.2), c(-1.0, 2.0)] {
            assert!((q.eval(w) - p.eval(w + s)).norm() < 1e-12);
        }
    }
}
