//! Polynomial and rational-equation root finding.
//!
//! Roots are eigenvalues of the companion matrix of the monic polynomial,
//! each followed by a single guarded Newton polish step.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::Serialize;

use super::power_rational::PowerRational;
use super::poly::Poly;
use crate::error::{Error, Result};

/// Coefficients below this fraction of the coefficient scale are treated as
/// zero when deciding the effective degree.
const LEADING_CHOP_TOL: f64 = 1e-14;
/// Roots closer than this (relative) are reported as an ill-conditioned
/// cluster.
const CLUSTER_TOL: f64 = 1e-6;

/// All finite roots of a polynomial, with multiplicity, unsorted.
pub fn poly_roots(p: &Poly) -> Result<Vec<Complex64>> {
    let p = chop_leading(p);
    let n = match p.degree() {
        None | Some(0) => return Ok(Vec::new()),
        Some(n) => n,
    };
    let zeros_at_origin = p.low_order().unwrap_or(0);
    let core = p.shift_down(zeros_at_origin);
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros_at_origin];
    let m = n - zeros_at_origin;
    if m == 0 {
        return Ok(roots);
    }
    let c = core.coeffs();
    let lead = c[m];
    if m == 1 {
        roots.push(-c[0] / lead);
        return Ok(roots);
    }
    let mut comp = DMatrix::<Complex64>::zeros(m, m);
    for i in 1..m {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..m {
        comp[(i, m - 1)] = -c[i] / lead;
    }
    // The complex QR iteration can stall on symmetric root patterns such
    // as (z^2 + 1)^2; Aberth iteration takes over in that case.
    let eig: Vec<Complex64> = match Schur::try_new(comp, f64::EPSILON, 2000).and_then(|s| s.eigenvalues()) {
        Some(e) => e.iter().copied().collect(),
        None => aberth(&core).ok_or(Error::EigenSolver(m))?,
    };
    let dp = core.derivative();
    for z in eig {
        roots.push(newton_polish(&core, &dp, z));
    }
    Ok(roots)
}

/// Simultaneous Aberth-Ehrlich iteration from points on a circle of the
/// Cauchy-bound radius.
fn aberth(p: &Poly) -> Option<Vec<Complex64>> {
    let n = p.degree()?;
    let c = p.coeffs();
    let lead = c[n].norm();
    let radius = 1.0 + c[..n].iter().map(|x| x.norm() / lead).fold(0.0, f64::max);
    let dp = p.derivative();
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(0.5 * radius, std::f64::consts::TAU * (k as f64 + 0.25) / n as f64))
        .collect();
    for _ in 0..500 {
        let mut biggest = 0.0f64;
        for k in 0..n {
            let ratio = p.eval(z[k]) / dp.eval(z[k]);
            if !ratio.norm().is_finite() {
                continue;
            }
            let repulsion: Complex64 = (0..n).filter(|&j| j != k).map(|j| 1.0 / (z[k] - z[j])).sum();
            let step = ratio / (1.0 - ratio * repulsion);
            if step.norm().is_finite() {
                z[k] -= step;
                biggest = biggest.max(step.norm() / (1.0 + z[k].norm()));
            }
        }
        if biggest < 1e-15 {
            break;
        }
    }
    z.iter().all(|x| x.norm().is_finite()).then_some(z)
}

fn chop_leading(p: &Poly) -> Poly {
    let scale = p.norm1();
    let mut coeffs = p.coeffs().to_vec();
    while coeffs
        .last()
        .is_some_and(|c| c.norm() <= LEADING_CHOP_TOL * scale)
    {
        coeffs.pop();
    }
    Poly::new(coeffs)
}

fn newton_polish(p: &Poly, dp: &Poly, z: Complex64) -> Complex64 {
    let f = p.eval(z);
    let d = dp.eval(z);
    if d.norm() == 0.0 || !d.norm().is_finite() {
        return z;
    }
    let cand = z - f / d;
    if cand.re.is_finite() && cand.im.is_finite() && p.eval(cand).norm() < f.norm() {
        cand
    } else {
        z
    }
}

/// Finite solutions of `m(z) = w` with multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootSet {
    /// Sorted lexicographically by (re, im).
    pub roots: Vec<Complex64>,
    /// Set when some roots form a cluster tighter than the solver can
    /// resolve reliably (multiple or near-multiple roots).
    pub ill_conditioned: bool,
}

/// Solve `P(z) - w Q(z) = 0` for a rational map `m = P / Q`.
pub fn roots(m: &PowerRational, w: Complex64) -> Result<RootSet> {
    if !m.is_rational() {
        return Err(Error::NotRational(m.alpha()));
    }
    let eq = m.numer() - &m.denom().scale(w);
    let eq = chop_leading(&eq);
    if eq.is_zero() {
        return Err(Error::DegenerateEquation);
    }
    let mut found = poly_roots(&eq)?;
    found.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let ill_conditioned = found.iter().enumerate().any(|(i, a)| {
        found[i + 1..]
            .iter()
            .any(|b| (a - b).norm() <= CLUSTER_TOL * (1.0 + a.norm()))
    });
    Ok(RootSet {
        roots: found,
        ill_conditioned,
    })
}
