use bryant_forge::bryant_data::{BryantData, Target};
use bryant_forge::grid::ChartGrid;
use bryant_forge::immersion::{build_mesh, DESITTER_BAND, herm_to_lorentz, immerse, pullback_metric_check};
use bryant_forge::meromorphic::{ExtComplex, PowerRational};
use bryant_forge::null_lift::lift_on_grid;
use bryant_forge::sl2::Mat2;
use num_complex::Complex64;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn enneper(target: Target) -> BryantData {
    BryantData::new(PowerRational::identity(), PowerRational::constant(ONE), vec![ExtComplex::Infinity], target)
}

fn residual(data: &BryantData, n: usize, band: f64) -> (f64, usize) {
    let grid = ChartGrid::rect([-1.0, 1.0], [-1.0, 1.0], n, n).unwrap();
    let field = lift_on_grid(data, &grid, Complex64::new(0.0, 0.0), Mat2::identity()).unwrap();
    assert!(field.max_det_defect() <= 1e-9);
    let r = pullback_metric_check(&field, data, band).unwrap();
    (r.max_rel_residual, r.excluded_nodes)
}

#[test]
fn horosphere_pullback_is_exact() {
    let d = BryantData::new(PowerRational::zero(), PowerRational::constant(ONE), vec![ExtComplex::Infinity], Target::HyperbolicSpace);
    let (r, _) = residual(&d, 33, 0.0);
    assert!(r <= 1e-10, "{r}");
}

#[test]
fn enneper_cousin_pullback_converges_at_second_order() {
    let d = enneper(Target::HyperbolicSpace);
    let (coarse, _) = residual(&d, 128, 0.0);
    let (fine, _) = residual(&d, 256, 0.0);
    let ratio = coarse / fine;
    eprintln!("coarse {coarse:e} fine {fine:e} ratio {ratio}");
    assert!(fine <= 1e-3, "{fine}");
    assert!((3.5..=4.5).contains(&ratio), "{ratio}");
}

#[test]
fn desitter_pullback_away_from_singular_ring() {
    let d = enneper(Target::DeSitterSpace);
    let (r, excluded) = residual(&d, 256, DESITTER_BAND);
    eprintln!("ds {r:e} excluded {excluded}");
    assert!(r <= 1e-3, "{r}");
    assert!(excluded > 0);
}

#[test]
fn isometry_equivariance() {
    let d = enneper(Target::HyperbolicSpace);
    let grid = ChartGrid::rect([-1.0, 1.0], [-1.0, 1.0], 64, 64).unwrap();
    let y = Mat2::new(Complex64::new(1.2, 0.3), Complex64::new(-0.4, 0.1), Complex64::new(0.2, 0.5), Complex64::new(0.0, 0.0)).renormalized();
    let plain = lift_on_grid(&d, &grid, Complex64::new(0.0, 0.0), Mat2::identity()).unwrap();
    let moved = lift_on_grid(&d, &grid, Complex64::new(0.0, 0.0), y).unwrap();
    for k in [0, 100, 2000, 4095] {
        let a = immerse(&plain.values[k], Target::HyperbolicSpace).unwrap().to_matrix();
        let b = immerse(&moved.values[k], Target::HyperbolicSpace).unwrap().to_matrix();
        let expect = y * a * y.adjoint();
        assert!((b - expect).norm() <= 1e-9 * (1.0 + b.norm()));
    }
    let r1 = pullback_metric_check(&plain, &d, 0.0).unwrap().max_rel_residual;
    let r2 = pullback_metric_check(&moved, &d, 0.0).unwrap().max_rel_residual;
    assert!((r1 - r2).abs() <= 1e-10 + 1e-6 * r1, "{r1} {r2}");
}

#[test]
fn hyperboloid_constraints_on_exported_vertices() {
    for target in [Target::HyperbolicSpace, Target::DeSitterSpace] {
        let d = enneper(target);
        let grid = ChartGrid::rect([-1.5, 1.5], [-1.5, 1.5], 31, 31).unwrap();
        let field = lift_on_grid(&d, &grid, Complex64::new(0.0, 0.0), Mat2::identity()).unwrap();
        let sign = if target == Target::HyperbolicSpace { -1.0 } else { 1.0 };
        for f in &field.values {
            let x = herm_to_lorentz(&immerse(f, target).unwrap());
            assert!((x.dot(&x) - sign).abs() <= 1e-7);
        }
        let mesh = build_mesh(&field, &d).unwrap();
        if target == Target::HyperbolicSpace {
            assert!(mesh.vertices.iter().all(|v| v[0] * v[0] + v[1] * v[1] + v[2] * v[2] < 1.0));
        } else {
            assert!(mesh.singular.iter().any(|&s| s));
        }
        assert_eq!(mesh.to_ply(), build_mesh(&field, &d).unwrap().to_ply());
    }
}
