use num_complex::Complex64;
use serde::de::{self, Deserializer};
use serde::ser::{SerializeTuple, Serializer};
use serde::{Deserialize, Serialize};
use std::fmt;

/// A point of the Riemann sphere: a finite complex number or the point at
/// infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtComplex {
    Finite(Complex64),
    Infinity,
}

impl ExtComplex {
    pub fn new(re: f64, im: f64) -> Self {
        ExtComplex::Finite(Complex64::new(re, im))
    }

    pub fn finite(self) -> Option<Complex64> {
        match self {
            ExtComplex::Finite(z) => Some(z),
            ExtComplex::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtComplex::Infinity)
    }

    /// Unit vector on S^2 under inverse stereographic projection from the
    /// north pole; infinity maps to (0, 0, 1).
    pub fn to_sphere(self) -> [f64; 3] {
        match self {
            ExtComplex::Infinity => [0.0, 0.0, 1.0],
            ExtComplex::Finite(w) => {
                let r2 = w.norm_sqr();
                if !r2.is_finite() {
                    return [0.0, 0.0, 1.0];
                }
                let d = 1.0 + r2;
                [2.0 * w.re / d, 2.0 * w.im / d, (r2 - 1.0) / d]
            }
        }
    }

    pub fn from_sphere(v: [f64; 3]) -> Self {
        let denom = 1.0 - v[2];
        if denom <= 1e-300 {
            ExtComplex::Infinity
        } else {
            ExtComplex::new(v[0] / denom, v[1] / denom)
        }
    }

    /// Chordal distance on the unit sphere, in [0, 2].
    pub fn chordal_distance(self, other: ExtComplex) -> f64 {
        let a = self.to_sphere();
        let b = other.to_sphere();
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    }

    /// Image under the Mobius map `(a w + b) / (c w + d)`.
    pub fn mobius(self, m: [Complex64; 4]) -> ExtComplex {
        let [a, b, c, d] = m;
        match self {
            ExtComplex::Infinity => {
                if c == Complex64::new(0.0, 0.0) {
                    ExtComplex::Infinity
                } else {
                    ExtComplex::Finite(a / c)
                }
            }
            ExtComplex::Finite(w) => {
                let den = c * w + d;
                if den == Complex64::new(0.0, 0.0) {
                    ExtComplex::Infinity
                } else {
                    ExtComplex::Finite((a * w + b) / den)
                }
            }
        }
    }
}

impl From<Complex64> for ExtComplex {
    fn from(z: Complex64) -> Self {
        if z.re.is_finite() && z.im.is_finite() {
            ExtComplex::Finite(z)
        } else {
            ExtComplex::Infinity
        }
    }
}

impl fmt::Display for ExtComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtComplex::Infinity => write!(f, "inf"),
            ExtComplex::Finite(z) => write!(f, "{}{:+}i", z.re, z.im),
        }
    }
}

// Wire format: `[re, im]` or the string "inf".
impl Serialize for ExtComplex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtComplex::Infinity => s.serialize_str("inf"),
            ExtComplex::Finite(z) => {
                let mut t = s.serialize_tuple(2)?;
                t.serialize_element(&z.re)?;
                t.serialize_element(&z.im)?;
                t.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for ExtComplex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Pair([f64; 2]),
            Tag(String),
        }
        match Repr::deserialize(d)? {
            Repr::Pair([re, im]) => Ok(ExtComplex::new(re, im)),
            Repr::Tag(t) if t == "inf" || t == "infinity" => Ok(ExtComplex::Infinity),
            Repr::Tag(t) => Err(de::Error::custom(format!(
                "expected [re, im] or \"inf\", got {t:?}"
            ))),
        }
    }
}
