//! validate -> lift -> immerse -> dual -> analyze -> coverage.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use bryant_forge::bryant_data::{BryantData, Target};
use bryant_forge::coverage::{
    coverage_sampled, omitted_values_exact, picard_verdict, CoverageMode, CoverageReport, OmittedCount, PicardVerdict,
    VerdictStatus,
};
use bryant_forge::duality::{dual_data, dual_total_curvature, inequality_checks, schwarzian_identity_residual, DEFAULT_RADII};
use bryant_forge::geometry_analysis::{
    curvature_decay_fit, geodesic_distance, geometric_radii, inner_ring_sources, integrability_check, nearest_node,
    parabolicity_integral, ring_sources, total_curvature, volume_growth, MetricGrid, ParabolicityVerdict,
};
use bryant_forge::grid::{Chart, ChartGrid};
use bryant_forge::immersion::{build_mesh, pullback_metric_check, DESITTER_BAND};
use bryant_forge::meromorphic::{end_expansion, ExtComplex, PowerRational};
use bryant_forge::null_lift::{gauss_map_on_grid, lift_on_grid, monodromy, PathSpec, SL2Field, TransportedGauss};
use bryant_forge::sl2::Mat2;
use serde_json::json;

use crate::config::{c, ChartSpec, ConfigError, GeometrySpec, Side, SourceSpec, SurfaceSpec};
use crate::report::{float, Report};

/// Why a command could not produce its result.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numeric(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

fn numeric(context: &str) -> impl Fn(bryant_forge::Error) -> Failure + '_ {
    move |e| Failure::Numeric(format!("{context}: {e}"))
}

#[derive(Debug, Clone)]
pub struct Options {
    pub chart: Option<String>,
    pub tolerance_scale: f64,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            chart: None,
            tolerance_scale: 1.0,
        }
    }
}

/// Charts to lift: the one named on the command line, or every chart not
/// marked geometry-only.
fn selected_charts<'a>(spec: &'a SurfaceSpec, opts: &Options) -> Result<Vec<&'a ChartSpec>, Failure> {
    match &opts.chart {
        Some(name) => Ok(vec![spec.chart(name)?]),
        None => Ok(spec.charts.iter().filter(|c| c.lift()).collect()),
    }
}

fn lift(spec: &SurfaceSpec, data: &BryantData, chart: &ChartSpec) -> Result<(ChartGrid, SL2Field), Failure> {
    let grid = chart.grid().map_err(|e| Failure::Config(format!("chart {}: {e}", chart.name())))?;
    let context = format!("chart {}", chart.name());
    let field = lift_on_grid(data, &grid, spec.base(), Mat2::identity()).map_err(numeric(&context))?;
    Ok((grid, field))
}

pub fn validate(spec: &SurfaceSpec) -> Result<Report, Failure> {
    let data = spec.data()?;
    let diags = data.validate();
    let mut r = Report::default();
    r.push("bryant_data", "diagnostics", diags.len(), Some(0.0), Some(diags.is_empty()));
    r.section("diagnostics", &diags);
    let topo = data.topology();
    r.section("topology", json!({"n_ends": topo.n_ends, "euler": topo.euler}));
    Ok(r)
}

pub fn synth(spec: &SurfaceSpec, opts: &Options, out: &Path) -> Result<Report, Failure> {
    let data = spec.data()?;
    let charts = selected_charts(spec, opts)?;
    let mut r = Report::default();
    let mut files = Vec::new();
    for chart in &charts {
        let (grid, field) = lift(spec, &data, chart)?;
        let context = format!("chart {}", chart.name());
        let mesh = build_mesh(&field, &data).map_err(numeric(&context))?;
        let path = if charts.len() == 1 { out.to_path_buf() } else { chart_path(out, chart.name()) };
        std::fs::write(&path, mesh.to_ply()).map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?;
        files.push(path.display().to_string());
        let name = chart.name();
        r.push("immersion", format!("{name}: vertices"), mesh.vertices.len(), None, None);
        if data.target() == Target::HyperbolicSpace {
            let max_norm = mesh.vertices.iter().map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()).fold(0.0, f64::max);
            r.push("immersion", format!("{name}: max ball norm"), float(max_norm), Some(1.0), Some(max_norm < 1.0));
        } else {
            let count = mesh.singular.iter().filter(|s| **s).count();
            r.push("immersion", format!("{name}: singular vertices"), count, None, None);
            if grid.is_periodic() && count > 0 {
                let (n, m) = grid.dims();
                let closed = (0..m).all(|j| (0..n).any(|i| mesh.singular[grid.index(i, j)]));
                r.push("immersion", format!("{name}: singular ring closed"), closed, None, Some(closed));
            }
        }
        if chart.pullback() {
            let pb = pullback_metric_check(&field, &data, DESITTER_BAND).map_err(numeric(&context))?;
            let tol = 1e-3 * opts.tolerance_scale;
            r.push("immersion", format!("{name}: pullback residual"), float(pb.max_rel_residual), Some(tol), Some(pb.max_rel_residual <= tol));
        }
    }
    r.section("meshes", files);
    Ok(r)
}

fn chart_path(out: &Path, chart: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "mesh".into());
    out.with_file_name(format!("{stem}-{chart}.ply"))
}

/// Coverage report for the declared rational Gauss map, or for samples of
/// the transported one over the coverage chart.
pub fn coverage(spec: &SurfaceSpec, fields: &BTreeMap<String, SL2Field>) -> Result<(CoverageReport, PicardVerdict), Failure> {
    let data = spec.data()?;
    let report = match spec.gauss_map()? {
        Some(g) => {
            let mut rep = omitted_values_exact(&g, &spec.punctures).map_err(numeric("coverage"))?;
            if let Some(hooks) = &spec.test_hooks {
                if rep.mode == CoverageMode::ExactRational && !hooks.inject_omitted.is_empty() {
                    rep.omitted.extend(hooks.inject_omitted.iter().copied());
                    rep.omitted_count = OmittedCount::Count(rep.omitted.len());
                }
            }
            rep
        }
        None => {
            let name = spec.analysis.coverage.chart.as_deref().ok_or_else(|| {
                Failure::Config("Gauss map is not declared and coverage.chart names no sampling chart".into())
            })?;
            let chart = spec.chart(name)?;
            let owned;
            let field = match fields.get(name) {
                Some(f) => f,
                None => {
                    owned = lift(spec, &data, chart)?.1;
                    &owned
                }
            };
            let samples = gauss_map_on_grid(field, &data);
            coverage_sampled(&samples, spec.analysis.coverage.level, None).map_err(numeric("coverage"))?
        }
    };
    let verdict = picard_verdict(&report);
    Ok((report, verdict))
}

fn push_coverage(r: &mut Report, spec: &SurfaceSpec, rep: &CoverageReport, verdict: &PicardVerdict) {
    let count = match rep.omitted_count {
        OmittedCount::Count(n) => json!(n),
        OmittedCount::Constant => json!("constant"),
    };
    let expected = spec.analysis.expect.omitted_count;
    let count_ok = match (expected, rep.omitted_count) {
        (Some(e), OmittedCount::Count(n)) => Some(n == e),
        (Some(_), OmittedCount::Constant) => Some(false),
        (None, _) => None,
    };
    r.push("coverage", "omitted_count", count, expected.map(|e| e as f64), count_ok);
    let pass = match verdict.status {
        VerdictStatus::Pass => Some(true),
        VerdictStatus::Fail => Some(false),
        VerdictStatus::ResolutionBounded => None,
    };
    r.push("coverage", "picard_verdict", verdict, None, pass);
    r.section("coverage", json!({"report": rep, "verdict": verdict}));
}

pub fn run_coverage(spec: &SurfaceSpec) -> Result<Report, Failure> {
    let (rep, verdict) = coverage(spec, &BTreeMap::new())?;
    let mut r = Report::default();
    push_coverage(&mut r, spec, &rep, &verdict);
    Ok(r)
}

pub fn analyze(spec: &SurfaceSpec, opts: &Options) -> Result<Report, Failure> {
    let data = spec.data()?;
    let scale = opts.tolerance_scale;
    let topo = data.topology();
    let mut r = validate(spec)?;

    // lift every chart
    let mut fields = BTreeMap::new();
    for chart in selected_charts(spec, opts)? {
        let (_, field) = lift(spec, &data, chart)?;
        let name = chart.name();
        let tol = 1e-7 * scale;
        r.push("null_lift", format!("{name}: closure residual"), float(field.closure_residual), Some(tol), Some(field.closure_residual <= tol));
        let det = field.max_det_defect();
        r.push("null_lift", format!("{name}: det defect"), float(det), Some(1e-9 * scale), Some(det <= 1e-9 * scale));
        if let Some(jump) = field.seam_jump {
            r.push("null_lift", format!("{name}: seam jump"), float(jump), None, None);
        }
        if chart.pullback() {
            let pb = pullback_metric_check(&field, &data, DESITTER_BAND).map_err(numeric(name))?;
            let tol = 1e-3 * scale;
            r.push("immersion", format!("{name}: pullback residual"), float(pb.max_rel_residual), Some(tol), Some(pb.max_rel_residual <= tol));
        }
        fields.insert(name.to_string(), field);
    }

    for (k, lp) in spec.analysis.monodromy.iter().enumerate() {
        let path = PathSpec::circle(c(lp.center), lp.radius, lp.nodes);
        let m = monodromy(&data, &path, Mat2::identity()).map_err(numeric("monodromy"))?;
        let class = format!("{:?}", m.class).to_lowercase();
        let ok = lp.expect.as_ref().map(|e| e.to_lowercase() == class);
        r.push("null_lift", format!("loop {k}: monodromy class"), &class, None, ok);
        r.push("null_lift", format!("loop {k}: trace"), [float(m.trace.re), float(m.trace.im)], None, None);
    }

    // Gauss maps and the Schwarzian identity
    let declared = spec.gauss_map()?;
    let samples: Vec<_> = spec.analysis.schwarzian_samples.iter().map(|p| c(*p)).collect();
    if !samples.is_empty() {
        let tg = TransportedGauss::new(&data, spec.base(), Mat2::identity());
        let res = schwarzian_identity_residual(&data, &tg, &samples).map_err(numeric("transported Gauss map"))?;
        let tol = 1e-5 * scale;
        r.push("duality", "schwarzian residual (transported G)", float(res), Some(tol), Some(res <= tol));
        if let Some(g) = &declared {
            let res = schwarzian_identity_residual(&data, g, &samples).map_err(numeric("declared Gauss map"))?;
            r.push("duality", "schwarzian residual (declared G)", float(res), Some(tol), Some(res <= tol));
        }
    }

    let constant_gauss = declared.as_ref().map(|g| g.is_constant()).unwrap_or(false);
    if let Some(g) = declared.as_ref().filter(|g| !g.is_constant()) {
        let tc = dual_total_curvature(g, &DEFAULT_RADII).map_err(numeric("dual total curvature"))?;
        let deg = g.degree().map_err(numeric("dual total curvature"))? as f64;
        let expected = 4.0 * PI * deg;
        let rel = (tc.limit - expected).abs() / expected;
        r.push("duality", "dual total curvature", float(tc.limit), Some(0.01 * scale), Some(!tc.divergent && rel <= 0.01 * scale));
        let ineq = inequality_checks(tc.limit, topo, false);
        r.push("duality", "osserman margin", float(ineq.osserman.margin), None, Some(ineq.osserman.satisfied));
        if spec.analysis.expect.osserman_equality {
            let tol = 0.05 * scale;
            r.push("duality", "osserman equality", float(ineq.osserman.margin), Some(tol), Some(ineq.osserman.margin.abs() <= tol));
        }
        let dual = dual_data(&data, g).map_err(numeric("dual data"))?;
        let back = dual_data(&dual.to_data(), &data.g().clone()).map_err(numeric("dual data"))?;
        let probe = spec.base() + num_complex::Complex64::new(0.1, 0.05);
        let f0 = data.f().eval(probe);
        let f2 = back.f_sharp.eval(probe);
        let inv = match (f0, f2) {
            (ExtComplex::Finite(a), ExtComplex::Finite(b)) => (a - b).norm() / a.norm().max(1e-300),
            _ => f64::NAN,
        };
        r.push("duality", "involution residual", float(inv), Some(1e-8 * scale), Some(inv <= 1e-8 * scale));
    } else if constant_gauss {
        r.push("duality", "constant Gauss map", true, None, None);
    }

    if let Some(geo) = &spec.analysis.geometry {
        geometry(&mut r, spec, &data, declared.as_ref(), geo, scale, constant_gauss)?;
    }

    let (rep, verdict) = coverage(spec, &fields)?;
    push_coverage(&mut r, spec, &rep, &verdict);
    Ok(r)
}

fn geometry(
    r: &mut Report,
    spec: &SurfaceSpec,
    data: &BryantData,
    declared: Option<&PowerRational>,
    geo: &GeometrySpec,
    scale: f64,
    constant_gauss: bool,
) -> Result<(), Failure> {
    // de Sitter faces are measured in their lift metric, the H3 metric of the dual data
    let metric_data = match data.target() {
        Target::HyperbolicSpace => data.clone(),
        Target::DeSitterSpace => {
            let g = declared.ok_or_else(|| Failure::Config("de Sitter geometry needs a declared Gauss map".into()))?;
            dual_data(data, g).map_err(numeric("lift metric"))?.to_data()
        }
    };
    let chart = spec.chart(&geo.chart)?;
    let grid = chart.grid().map_err(|e| Failure::Config(e.to_string()))?;
    let mut mg = MetricGrid::from_data(&grid, &metric_data);
    let (sources, source_row) = match &geo.source {
        SourceSpec::Point { at } => {
            if !matches!(grid.chart(), Chart::Rect { .. }) {
                return Err(Failure::Config("point sources need a rect chart".into()));
            }
            (vec![(nearest_node(&grid, c(*at)), 0.0)], None)
        }
        SourceSpec::InnerRing { offset } => {
            mg = mg.guard_outer_only();
            (inner_ring_sources(&mg, *offset), Some(0))
        }
        SourceSpec::Ring { radius } => {
            let Chart::LogPolar { s, .. } = grid.chart() else {
                return Err(Failure::Config("ring sources need a log-polar chart".into()));
            };
            let (h, _) = grid.spacing();
            let n = grid.dims().0;
            let i = (((radius.ln() - s[0]) / h).round().max(0.0) as usize).min(n - 1);
            (ring_sources(&mg, i), Some(i))
        }
    };
    let rho = geodesic_distance(&mg, &sources).map_err(numeric("geodesic distance"))?;
    let kappa: Vec<f64> = (0..grid.len())
        .map(|idx| {
            let (i, j) = grid.coords(idx);
            metric_data.gauss_curvature(grid.node_point(i, j)).unwrap_or(f64::NAN)
        })
        .collect();
    let topo = data.topology();

    if let Some(radii) = &geo.exhaustion {
        let neg: Vec<f64> = kappa.iter().map(|k| if k.is_finite() { -k } else { 0.0 }).collect();
        let tc = total_curvature(&mg, &neg, radii).map_err(numeric("total curvature"))?;
        match spec.analysis.expect.total_curvature {
            Some(e) => {
                let rel = if e == 0.0 { tc.limit.abs() } else { (tc.limit - e).abs() / e.abs() };
                r.push("geometry_analysis", "total curvature", float(tc.limit), Some(0.02 * scale), Some(!tc.divergent && rel <= 0.02 * scale));
            }
            None => r.push("geometry_analysis", "total curvature", float(tc.limit), None, None),
        }
        r.section("total_curvature", &tc);
        let cv = inequality_checks(tc.limit, topo, constant_gauss).cohn_vossen;
        r.push("duality", "cohn-vossen margin", float(cv.margin), None, Some(cv.satisfied));
    }

    let vg = volume_growth(&mg, &rho, &geometric_radii(geo.radii[0], geo.radii[1], geo.radii[2] as usize))
        .map_err(numeric("volume growth"))?;
    let band = 0.2 * scale;
    r.push("geometry_analysis", "volume exponent", float(vg.exponent), Some(band), Some((vg.exponent - 2.0).abs() <= band));
    r.push("geometry_analysis", "volume c_fit", float(vg.c_fit), None, None);
    let par = parabolicity_integral(&vg.samples).map_err(numeric("parabolicity"))?;
    r.push("geometry_analysis", "parabolicity slope", float(par.slope), None, Some(par.slope > 0.0));
    r.push(
        "geometry_analysis",
        "parabolicity verdict",
        par.verdict,
        None,
        Some(par.verdict == ParabolicityVerdict::Divergent),
    );

    for fit_spec in &geo.ends {
        let label = match fit_spec.puncture {
            ExtComplex::Infinity => "inf".to_string(),
            ExtComplex::Finite(p) => format!("{}{:+}i", p.re, p.im),
        };
        let (k_side, r_side): (Vec<f64>, Vec<f64>) = (0..grid.len())
            .filter(|&idx| {
                let i = grid.coords(idx).0;
                match (source_row, fit_spec.side) {
                    (None, _) => true,
                    (Some(s), Side::Inner) => i < s,
                    (Some(s), Side::Outer) => i > s,
                }
            })
            .filter(|&idx| kappa[idx].is_finite())
            .map(|idx| (kappa[idx], rho[idx]))
            .unzip();
        let norm = metric_data.normalized_at_end(fit_spec.puncture).map_err(numeric("end normalization"))?;
        let end = end_expansion(norm.g(), norm.f(), fit_spec.puncture).map_err(numeric("end expansion"))?;
        let fit = curvature_decay_fit(&k_side, &r_side, fit_spec.r0, &end).map_err(numeric("decay fit"))?;
        let tol = 0.15 * scale;
        let ok = fit.slope <= -2.0 && fit.relative_error() <= tol;
        r.push("geometry_analysis", format!("end {label}: decay slope"), float(fit.slope), Some(tol), Some(ok));
        r.push("geometry_analysis", format!("end {label}: predicted exponent"), float(fit.predicted_exponent), None, None);
        let env = fit.envelope_holds(&k_side, &r_side);
        r.push("geometry_analysis", format!("end {label}: envelope"), env, None, Some(env));
        let kappa0 = k_side
            .iter()
            .zip(&r_side)
            .filter(|(_, rr)| **rr < fit.r0)
            .map(|(k, _)| k.abs())
            .fold(0.0, f64::max);
        let integral = integrability_check(fit.c, fit.epsilon, fit.r0, kappa0);
        let ok = integral.as_ref().map(|v| v.is_finite()).unwrap_or(false);
        r.push("geometry_analysis", format!("end {label}: curvature integral"), float(*integral.as_ref().unwrap_or(&f64::INFINITY)), None, Some(ok));
    }
    Ok(())
}
