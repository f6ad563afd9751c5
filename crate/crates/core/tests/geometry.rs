use bryant_forge::bryant_data::{BryantData, Target};
use bryant_forge::geometry_analysis::{
    curvature_decay_fit, geodesic_distance, geometric_radii, inner_ring_sources, integrability_check, nearest_node,
    parabolicity_integral, ring_sources, total_curvature, volume_growth, MetricGrid, ParabolicityVerdict,
};
use bryant_forge::grid::ChartGrid;
use bryant_forge::meromorphic::{end_expansion, ExtComplex, PowerRational};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn enneper() -> BryantData {
    BryantData::new(PowerRational::identity(), PowerRational::constant(ONE), vec![ExtComplex::Infinity], Target::HyperbolicSpace)
}

fn catenoid_cousin() -> BryantData {
    BryantData::new(
        PowerRational::monomial(2.0, ONE),
        PowerRational::monomial(-3.0, Complex64::new(-3.0 / 8.0, 0.0)),
        vec![ExtComplex::new(0.0, 0.0), ExtComplex::Infinity],
        Target::HyperbolicSpace,
    )
}

fn kappa_field(data: &BryantData, grid: &ChartGrid) -> Vec<f64> {
    (0..grid.len())
        .map(|idx| {
            let (i, j) = grid.coords(idx);
            data.gauss_curvature(grid.node_point(i, j)).unwrap_or(f64::NAN)
        })
        .collect()
}

#[test]
fn flat_balls_have_euclidean_area() {
    let grid = ChartGrid::rect([-10.0, 10.0], [-10.0, 10.0], 201, 201).unwrap();
    let mg = MetricGrid::from_fn(&grid, |_| 1.0);
    let rho = geodesic_distance(&mg, &[(nearest_node(&grid, Complex64::new(0.0, 0.0)), 0.0)]).unwrap();
    let radii = geometric_radii(1.0, 12.0, 24);
    let vg = volume_growth(&mg, &rho, &radii).unwrap();
    assert!(!vg.excluded.is_empty(), "radii past the guard band must be dropped");
    for &(r, vol) in vg.samples.iter().filter(|s| s.0 >= 2.0) {
        assert!((vol / (PI * r * r) - 1.0).abs() <= 0.03, "r={r} vol={vol}");
    }
    assert!((vg.exponent - 2.0).abs() <= 0.1, "{}", vg.exponent);
    assert!((vg.c_fit - 1.0).abs() < 0.03);

    let par = parabolicity_integral(&vg.samples).unwrap();
    assert!(par.slope > 0.0);
    assert!((par.slope * PI * vg.c_fit - 1.0).abs() <= 0.25, "{}", par.slope);
    assert_eq!(par.verdict, ParabolicityVerdict::Divergent);
}

#[test]
fn enneper_cousin_radial_distance() {
    // along a ray from 0 the metric is (1 + r^2)|dz|, so rho(1) = 4/3
    let grid = ChartGrid::log_polar(Complex64::new(0.0, 0.0), [(1e-3f64).ln(), 30f64.ln()], 421, 256).unwrap();
    let mg = MetricGrid::from_data(&grid, &enneper()).guard_outer_only();
    let rho = geodesic_distance(&mg, &inner_ring_sources(&mg, 1e-3)).unwrap();
    let (h1, _) = grid.spacing();
    let i1 = ((0.0 - (1e-3f64).ln()) / h1).round() as usize;
    let r1 = grid.node_z(i1, 0).norm();
    let exact = r1 + r1.powi(3) / 3.0;
    for j in [0, 37, 128] {
        let v = rho[grid.index(i1, j)];
        assert!((v / exact - 1.0).abs() < 5e-3, "{v} vs {exact}");
    }
}

#[test]
fn grid_total_curvature_counts_degree() {
    for (data, expected) in [
        (enneper(), 4.0 * PI),
        (
            BryantData::new(PowerRational::monomial(2.0, ONE), PowerRational::constant(ONE), vec![ExtComplex::Infinity], Target::HyperbolicSpace),
            8.0 * PI,
        ),
    ] {
        let grid = ChartGrid::log_polar(Complex64::new(0.0, 0.0), [(1e-3f64).ln(), 40f64.ln()], 441, 256).unwrap();
        let mg = MetricGrid::from_data(&grid, &data);
        let neg: Vec<f64> = kappa_field(&data, &grid).iter().map(|k| -k).collect();
        let tc = total_curvature(&mg, &neg, &[10.0, 20.0, 40.0]).unwrap();
        assert!(!tc.divergent);
        assert!((tc.limit / expected - 1.0).abs() <= 0.02, "{} vs {expected}", tc.limit);
    }
}

#[test]
fn enneper_cousin_volume_growth_is_quadratic() {
    let grid = ChartGrid::log_polar(Complex64::new(0.0, 0.0), [(1e-3f64).ln(), 20f64.ln()], 401, 256).unwrap();
    let mg = MetricGrid::from_data(&grid, &enneper()).guard_outer_only();
    let rho = geodesic_distance(&mg, &inner_ring_sources(&mg, 1e-3)).unwrap();
    let vg = volume_growth(&mg, &rho, &geometric_radii(1.0, 3000.0, 40)).unwrap();
    assert!((1.8..=2.2).contains(&vg.exponent), "{}", vg.exponent);
    // a planar end of order I = 3 has area ~ 3 pi r^2
    assert!((vg.c_fit / 3.0 - 1.0).abs() < 0.1, "{}", vg.c_fit);
    let par = parabolicity_integral(&vg.samples).unwrap();
    assert_eq!(par.verdict, ParabolicityVerdict::Divergent);
}

#[test]
fn curvature_decay_matches_end_order() {
    // Enneper cousin: end of order I = 3 at infinity, exponent 8/3
    let data = enneper();
    let grid = ChartGrid::log_polar(Complex64::new(0.0, 0.0), [(1e-3f64).ln(), 100f64.ln()], 481, 256).unwrap();
    let mg = MetricGrid::from_data(&grid, &data).guard_outer_only();
    let rho = geodesic_distance(&mg, &inner_ring_sources(&mg, 1e-3)).unwrap();
    let kappa = kappa_field(&data, &grid);
    let norm = data.normalized_at_end(ExtComplex::Infinity).unwrap();
    let end = end_expansion(norm.g(), norm.f(), ExtComplex::Infinity).unwrap();
    assert!((end.predicted_decay_exponent() - 8.0 / 3.0).abs() < 1e-12);
    let fit = curvature_decay_fit(&kappa, &rho, 1e3, &end).unwrap();
    assert!(fit.slope <= -2.0);
    assert!(fit.relative_error() <= 0.15, "{} vs {}", fit.slope, end.predicted_decay_exponent());
    assert!(fit.envelope_holds(&kappa, &rho));
    let kappa0 = kappa.iter().map(|k| k.abs()).fold(0.0, f64::max);
    assert!(integrability_check(fit.c, fit.epsilon, fit.r0, kappa0).unwrap().is_finite());

    // catenoid cousin: both ends have beta = 1, I = 2, exponent 4
    let data = catenoid_cousin();
    let grid = ChartGrid::log_polar(Complex64::new(0.0, 0.0), [-(1e3f64).ln(), 1e3f64.ln()], 561, 256).unwrap();
    let mg = MetricGrid::from_data(&grid, &data);
    let mid = (grid.dims().0 - 1) / 2;
    let rho = geodesic_distance(&mg, &ring_sources(&mg, mid)).unwrap();
    let kappa = kappa_field(&data, &grid);
    for (end_pt, lower) in [(ExtComplex::new(0.0, 0.0), true), (ExtComplex::Infinity, false)] {
        let norm = data.normalized_at_end(end_pt).unwrap();
        let end = end_expansion(norm.g(), norm.f(), end_pt).unwrap();
        assert!((end.predicted_decay_exponent() - 4.0).abs() < 1e-12);
        let (k_half, r_half): (Vec<f64>, Vec<f64>) = (0..grid.len())
            .filter(|&idx| (grid.coords(idx).0 < mid) == lower)
            .map(|idx| (kappa[idx], rho[idx]))
            .unzip();
        let fit = curvature_decay_fit(&k_half, &r_half, 100.0, &end).unwrap();
        assert!(fit.relative_error() <= 0.15, "{end_pt:?}: {}", fit.slope);
        assert!(fit.envelope_holds(&k_half, &r_half));
    }
}

#[test]
fn cubic_growth_is_not_parabolic() {
    let radii = geometric_radii(1.0, 1e4, 50);
    let samples: Vec<(f64, f64)> = radii.iter().map(|&r| (r, r * r * r)).collect();
    let p = parabolicity_integral(&samples).unwrap();
    assert_eq!(p.verdict, ParabolicityVerdict::NonDivergent);
    assert!(p.tail_slope < 0.1 * p.head_slope);
}

proptest! {
    #[test]
    fn smaller_volume_gives_larger_integral(
        c in 0.2f64..5.0,
        factors in proptest::collection::vec(0.05f64..1.0, 12),
    ) {
        let radii = geometric_radii(1.0, 500.0, factors.len());
        let bound: Vec<(f64, f64)> = radii.iter().map(|&r| (r, PI * c * r * r)).collect();
        let below: Vec<(f64, f64)> = radii.iter().zip(&factors).map(|(&r, f)| (r, f * PI * c * r * r)).collect();
        let a = parabolicity_integral(&below).unwrap();
        let b = parabolicity_integral(&bound).unwrap();
        for (x, y) in a.integral.iter().zip(&b.integral) {
            prop_assert!(x.1 >= y.1 - 1e-12);
        }
    }

    #[test]
    fn distances_obey_triangle_inequality(seed in 0usize..400, other in 0usize..400) {
        let grid = ChartGrid::rect([-1.0, 1.0], [-1.0, 1.0], 20, 20).unwrap();
        let mg = MetricGrid::from_fn(&grid, |p| {
            let z: Complex64 = p.z;
            (1.0f64 + z.norm_sqr()).powi(2)
        });
        let d0 = geodesic_distance(&mg, &[(seed, 0.0)]).unwrap();
        let d1 = geodesic_distance(&mg, &[(other, 0.0)]).unwrap();
        prop_assert!((d0[other] - d1[seed]).abs() < 1e-12);
        for k in 0..grid.len() {
            prop_assert!(d0[k] <= d0[other] + d1[k] + 1e-12);
        }
    }
}
