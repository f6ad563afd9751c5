use num_complex::Complex64;
use serde::Serialize;
use std::ops::{Add, Mul, Sub};

/// A 2x2 complex matrix `[[a, b], [c, d]]`.
///
/// Used for lifts into SL(2, C) and their monodromy; the determinant is not
/// enforced by the type, integrators renormalize it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mat2 {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

pub type SL2Matrix = Mat2;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

impl Mat2 {
    pub const fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub const fn identity() -> Self {
        Mat2::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn zero() -> Self {
        Mat2::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub fn diag(p: Complex64, q: Complex64) -> Self {
        Mat2::new(p, ZERO, ZERO, q)
    }

    /// `e_3 = diag(1, -1)`.
    pub fn e3() -> Self {
        Mat2::diag(ONE, -ONE)
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Mat2::new(self.a.conj(), self.c.conj(), self.b.conj(), self.d.conj())
    }

    /// Adjugate `[[d, -b], [-c, a]]`; the inverse for unit determinant.
    pub fn adjugate(&self) -> Self {
        Mat2::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det == ZERO {
            return None;
        }
        Some(self.adjugate().scale(ONE / det))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        (self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr()).sqrt()
    }

    /// Largest componentwise modulus.
    pub fn max_abs(&self) -> f64 {
        self.a.norm().max(self.b.norm()).max(self.c.norm()).max(self.d.norm())
    }

    /// Divide by a square root of the determinant, choosing the root that
    /// keeps the result closest to the input.
    pub fn renormalized(&self) -> Self {
        let det = self.det();
        if det == ZERO {
            return *self;
        }
        let s = det.sqrt();
        let s = if (s - ONE).norm() <= (s + ONE).norm() { s } else { -s };
        self.scale(ONE / s)
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Mobius action `(a w + b) / (c w + d)` as coefficient quadruple.
    pub fn as_mobius(&self) -> [Complex64; 4] {
        self.entries()
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, r: Mat2) -> Mat2 {
        Mat2::new(
            self.a * r.a + self.b * r.c,
            self.a * r.b + self.b * r.d,
            self.c * r.a + self.d * r.c,
            self.c * r.b + self.d * r.d,
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, r: Mat2) -> Mat2 {
        Mat2::new(self.a + r.a, self.b + r.b, self.c + r.c, self.d + r.d)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, r: Mat2) -> Mat2 {
        Mat2::new(self.a - r.a, self.b - r.b, self.c - r.c, self.d - r.d)
    }
}
