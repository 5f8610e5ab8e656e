use anyhow::{bail, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use offcenter::bargmann::{bargmann_eval, kernel_spec, reproduce, reproduce_uniform, BargmannFunction};
use offcenter::quadrature::truncation_radius;
use offcenter::resolution::{
    circle_norm_convergence, circle_spec, fock_from_circle, identity_matrix_elements_ordered,
    scaling_spec, squeezed_norm_via_identity, OffCenterMap, Ordering,
};
use offcenter::semiclassics::{
    detect_caustics, dividing_step, propagate_row, BoundaryProblem, CausticScan, ScanRow, SystemModel,
};
use offcenter::{FockVector, OscillatorFrame, QuadratureSpec, Scheme, SqueezedLabel};

use crate::config::{
    non_empty, parse_complex, positive, CircleArgs, IdentityArgs, KernelArgs, MapKind, OrderingKind,
    PropagateArgs, SqueezedArgs, SystemKind,
};
use crate::output::{num, opt_num, Report, Table, SCHEMA_VERSION};

const MAX_NMAX: usize = 60;

fn check_nmax(n: usize) -> Result<usize> {
    if n > MAX_NMAX {
        bail!("--nmax must be at most {MAX_NMAX}, got {n}");
    }
    Ok(n)
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn verify_identity(args: IdentityArgs) -> Result<Report> {
    let map_kind = args.map.unwrap_or(MapKind::Scaling);
    let n_max = check_nmax(args.nmax.unwrap_or(10))?;
    let tol = positive("tol", args.tol.unwrap_or(1e-6))?;
    let gamma_tol = positive("gamma-tol", args.gamma_tol.unwrap_or(1e-10))?;
    if gamma_tol >= 1.0 {
        bail!("--gamma-tol must be < 1, got {gamma_tol}");
    }
    let radius = args.radius.map(|r| positive("radius", r)).transpose()?;
    let ordering = match args.ordering.unwrap_or(OrderingKind::Ket) {
        OrderingKind::Ket => Ordering::KetMapped,
        OrderingKind::Bra => Ordering::BraMapped,
    };
    let mut jobs: Vec<(Option<f64>, OffCenterMap, QuadratureSpec)> = vec![];
    match map_kind {
        MapKind::Scaling => {
            for lambda in non_empty("lambda", args.lambda.unwrap_or_else(|| vec![0.5, 1.0, 2.0, 5.0]))? {
                let map = OffCenterMap::scaling(positive("lambda", lambda)?)?;
                let mut spec = scaling_spec(lambda, n_max, gamma_tol)?;
                if let Some(r) = radius {
                    spec = spec.with_radius(r)?;
                }
                jobs.push((Some(lambda), map, spec));
            }
        }
        MapKind::Circle => {
            // P(n+1, R) on the disk of radius R: the Gaussian radius at λ = 1, squared
            let r = match radius {
                Some(r) => r,
                None => truncation_radius(1.0, n_max, gamma_tol)?.powi(2),
            };
            jobs.push((None, OffCenterMap::circle(), circle_spec(r, n_max)?));
        }
    }
    let reports = jobs
        .iter()
        .map(|(lambda, map, spec)| {
            let r = identity_matrix_elements_ordered(map, n_max, spec, ordering)?;
            Ok((*lambda, r))
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = reports.iter().map(|(_, r)| r.max_deviation).fold(0.0, f64::max);
    let pass = worst <= tol;
    let results: Vec<_> = reports
        .iter()
        .map(|(lambda, r)| json!({ "lambda": lambda, "report": r }))
        .collect();
    let rows = reports
        .iter()
        .map(|(lambda, r)| {
            vec![
                lambda.map(num).unwrap_or_else(|| "circle".into()),
                num(r.spec.radius),
                num(r.max_deviation),
                num(r.truncation_bound),
                num(r.quadrature_deviation),
            ]
        })
        .collect();
    Ok(Report {
        pass,
        summary: format!("verify-identity: {} (max deviation {worst:e}, tol {tol:e})", verdict(pass)),
        json: json!({
            "schema_version": SCHEMA_VERSION,
            "command": "verify-identity",
            "n_max": n_max,
            "tol": tol,
            "pass": pass,
            "max_deviation": worst,
            "results": results,
        }),
        table: Some(Table {
            header: vec!["lambda", "radius", "max_deviation", "truncation_bound", "quadrature_deviation"],
            rows,
        }),
    })
}

pub fn verify_kernels(args: KernelArgs) -> Result<Report> {
    let ladder = non_empty("N", args.ladder.unwrap_or_else(|| vec![0, 1, 2, 3]))?;
    let lambdas = non_empty("lambda", args.lambda.unwrap_or_else(|| vec![0.5, 1.0, 2.0]))?;
    for &l in &lambdas {
        positive("lambda", l)?;
    }
    let kmax = args.kmax.unwrap_or(8);
    if kmax > 40 {
        bail!("--kmax must be at most 40, got {kmax}");
    }
    if let Some(&n) = ladder.iter().find(|&&n| n > 10) {
        bail!("--N must be at most 10, got {n}");
    }
    let tol = positive("tol", args.tol.unwrap_or(1e-6))?;
    let zstar = parse_complex(args.zstar.as_deref().unwrap_or("0.6-0.4i"))?;
    let mut cases = vec![];
    for &n in &ladder {
        for &lambda in &lambdas {
            let spec = kernel_spec(lambda, kmax + 2 * n, zstar)?;
            for k in 0..=kmax {
                cases.push((n, lambda, k, spec));
            }
        }
    }
    let rows = cases
        .par_iter()
        .map(|&(n, lambda, k, spec)| {
            let psi = BargmannFunction::monomial(k);
            let exact = bargmann_eval(&psi, zstar);
            let scale = exact.norm().max(f64::MIN_POSITIVE);
            let coarse = reproduce(&psi, zstar, lambda, n, &spec)?;
            let fine = reproduce(&psi, zstar, lambda, n, &spec.refined())?;
            let uniform = reproduce_uniform(&psi, zstar, lambda, n, &spec)?;
            Ok(KernelRow {
                n,
                lambda,
                k,
                value: coarse,
                exact,
                residual: (coarse - exact).norm() / scale,
                residual_refined: (fine - exact).norm() / scale,
                ladder_difference: (coarse - uniform).norm(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    let pass = worst <= tol;
    let json_rows: Vec<_> = rows
        .iter()
        .map(|r| {
            json!({
                "N": r.n, "lambda": r.lambda, "k": r.k,
                "value": r.value, "exact": r.exact,
                "residual": r.residual, "residual_refined": r.residual_refined,
                "ladder_difference": r.ladder_difference,
            })
        })
        .collect();
    let table = rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                num(r.lambda),
                r.k.to_string(),
                num(r.residual),
                num(r.residual_refined),
                num(r.ladder_difference),
            ]
        })
        .collect();
    Ok(Report {
        pass,
        summary: format!("verify-kernels: {} (worst relative residual {worst:e}, tol {tol:e})", verdict(pass)),
        json: json!({
            "schema_version": SCHEMA_VERSION,
            "command": "verify-kernels",
            "zstar": zstar,
            "tol": tol,
            "pass": pass,
            "max_residual": worst,
            "rows": json_rows,
        }),
        table: Some(Table {
            header: vec!["N", "lambda", "k", "residual", "residual_refined", "ladder_difference"],
            rows: table,
        }),
    })
}

struct KernelRow {
    n: usize,
    lambda: f64,
    k: usize,
    value: Complex64,
    exact: Complex64,
    residual: f64,
    residual_refined: f64,
    ladder_difference: f64,
}

pub fn propagate(args: PropagateArgs) -> Result<Report> {
    let mass = positive("mass", args.mass.unwrap_or(1.0))?;
    let frame = OscillatorFrame::new(
        positive("hbar", args.hbar.unwrap_or(1.0))?,
        mass,
        positive("b", args.b.unwrap_or(1.0))?,
    )?;
    let system = match args.system.unwrap_or(SystemKind::Free) {
        SystemKind::Free => SystemModel::free(mass)?,
        SystemKind::Harmonic => SystemModel::harmonic(mass, args.omega.unwrap_or(1.0))?,
        SystemKind::Quartic => SystemModel::quartic(mass, args.omega.unwrap_or(1.0), args.a4.unwrap_or(0.01))?,
    };
    let x_initial = args.xi.unwrap_or(0.0);
    let xf = non_empty("xf", args.xf.unwrap_or_else(|| vec![1.0]))?;
    let max_dt = positive("dt", args.dt.unwrap_or(0.002))?;
    let tol = positive("tol", args.tol.unwrap_or(1e-6))?;
    if args.scan_caustics {
        let lambdas = non_empty("lambda", args.lambda.unwrap_or_else(|| vec![1.0, 1.5, 2.0]))?;
        let times = match args.t {
            Some(t) => non_empty("t", t)?,
            None => {
                let t_min = positive("t-min", args.t_min.unwrap_or(0.05))?;
                let t_max = positive("t-max", args.t_max.unwrap_or(6.5))?;
                let step = positive("t-step", args.t_step.unwrap_or(0.01))?;
                if t_max <= t_min {
                    bail!("--t-max must exceed --t-min");
                }
                let n = ((t_max - t_min) / step).round() as usize;
                (0..=n).map(|k| t_min + k as f64 * step).collect()
            }
        };
        let template = BoundaryProblem::new(x_initial, xf[0], times[0], lambdas[0], frame, system)?;
        for &l in &lambdas {
            template.with_lambda(l).validate()?;
        }
        let scans = lambdas
            .par_iter()
            .map(|&l| Ok(detect_caustics(&template, &times, l, max_dt)?))
            .collect::<Result<Vec<CausticScan>>>()?;
        return Ok(caustic_report(&scans, x_initial, xf[0]));
    }
    let times = non_empty("t", args.t.unwrap_or_else(|| vec![1.0]))?;
    let lambdas = non_empty("lambda", args.lambda.unwrap_or_else(|| vec![1.0]))?;
    let mut problems = vec![];
    for &x_final in &xf {
        for &t in &times {
            for &lambda in &lambdas {
                problems.push(BoundaryProblem::new(x_initial, x_final, t, lambda, frame, system)?);
            }
        }
    }
    let rows: Vec<ScanRow> = problems
        .par_iter()
        .map(|p| propagate_row(p, dividing_step(p.t, max_dt)))
        .collect();
    let mut compared = 0;
    let mut failures = 0;
    let mut worst = 0.0f64;
    for r in &rows {
        if r.exact.is_none() || r.caustic {
            continue;
        }
        compared += 1;
        match r.abs_error {
            Some(e) if e <= tol => worst = worst.max(e),
            Some(e) => {
                worst = worst.max(e);
                failures += 1;
            }
            None => failures += 1,
        }
    }
    let pass = failures == 0;
    let caustics = rows.iter().filter(|r| r.caustic).count();
    let table = rows.iter().map(scan_cells).collect();
    Ok(Report {
        pass,
        summary: format!(
            "propagate: {} ({compared} rows compared, worst error {worst:e}, {failures} over tol {tol:e}, {caustics} caustic rows)",
            verdict(pass)
        ),
        json: json!({
            "schema_version": SCHEMA_VERSION,
            "command": "propagate",
            "system": system,
            "frame": frame,
            "tol": tol,
            "pass": pass,
            "rows": rows,
        }),
        table: Some(Table {
            header: vec![
                "x_initial", "x_final", "t", "lambda", "q0_re", "q0_im", "p0_re", "p0_im", "action_re",
                "action_im", "m_qp_re", "m_qp_im", "value_re", "value_im", "exact_re", "exact_im",
                "abs_error", "caustic", "caustic_crossings", "error",
            ],
            rows: table,
        }),
    })
}

fn complex_cells(z: Option<Complex64>) -> [String; 2] {
    [opt_num(z.map(|z| z.re)), opt_num(z.map(|z| z.im))]
}

fn scan_cells(r: &ScanRow) -> Vec<String> {
    let mut cells = vec![num(r.x_initial), num(r.x_final), num(r.t), num(r.lambda)];
    for z in [r.q0, r.p0, r.action, r.m_qp, r.value, r.exact] {
        cells.extend(complex_cells(z));
    }
    cells.push(opt_num(r.abs_error));
    cells.push(r.caustic.to_string());
    cells.push(r.caustic_crossings.to_string());
    cells.push(r.error.clone().unwrap_or_default());
    cells
}

fn caustic_report(scans: &[CausticScan], x_initial: f64, x_final: f64) -> Report {
    let mut rows = vec![];
    for s in scans {
        for &t in &s.caustic_times {
            rows.push(vec![num(s.lambda), "sign-change".into(), num(t), String::new()]);
        }
        for &(t, depth) in &s.near_caustics {
            rows.push(vec![num(s.lambda), "minimum".into(), num(t), num(depth)]);
        }
    }
    let failed: usize = scans
        .iter()
        .map(|s| s.samples.iter().filter(|x| x.error.is_some()).count())
        .sum();
    let found: Vec<String> = scans
        .iter()
        .map(|s| format!("λ={}: {:?}", s.lambda, s.caustic_times))
        .collect();
    Report {
        pass: true,
        summary: format!(
            "propagate --scan-caustics: {} ({failed} unsolved samples)",
            found.join("; ")
        ),
        json: json!({
            "schema_version": SCHEMA_VERSION,
            "command": "propagate-scan-caustics",
            "x_initial": x_initial,
            "x_final": x_final,
            "scans": scans,
        }),
        table: Some(Table {
            header: vec!["lambda", "kind", "t", "abs_m_qp"],
            rows,
        }),
    }
}

pub fn circle_rep(args: CircleArgs) -> Result<Report> {
    let n_max = check_nmax(args.nmax.unwrap_or(10))?;
    let tol = positive("tol", args.tol.unwrap_or(1e-10))?;
    if let Some(na) = args.n_angular {
        if na <= 2 * n_max + 2 {
            bail!("--n-angular must exceed 2 nmax + 2 = {}, got {na}", 2 * n_max + 2);
        }
    }
    let radii = non_empty("radii", args.radii.unwrap_or_else(|| vec![2.0, 4.0, 6.0, 8.0, 10.0]))?;
    for &r in &radii {
        positive("radii", r)?;
    }
    let center = parse_complex(args.w.as_deref().unwrap_or("0"))?;
    let widths = args.width.unwrap_or_default();
    let labels = widths
        .iter()
        .map(|&b| Ok(SqueezedLabel::new(center, positive("width", b)?)?))
        .collect::<Result<Vec<_>>>()?;
    let max_radius = radii.iter().copied().fold(0.0, f64::max);
    let grid = QuadratureSpec::new(
        max_radius,
        args.grid_radial.unwrap_or(200),
        args.grid_angular.unwrap_or(256),
        Scheme::PolarGaussLinear,
    )?;

    let mut reconstruction = vec![];
    let mut worst = 0.0f64;
    for n in 0..=n_max {
        let v = fock_from_circle(n, args.n_angular.unwrap_or(4 * n + 8))?;
        let e = FockVector::basis(n);
        let distance = (0..=v.n_max().max(n))
            .map(|m| (v.coefficient(m) - e.coefficient(m)).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(distance);
        reconstruction.push((n, distance));
    }
    let frame = OscillatorFrame::DIMENSIONLESS;
    let sequences = labels
        .iter()
        .map(|w| Ok(circle_norm_convergence(w, &radii, &grid, &frame)?))
        .collect::<Result<Vec<_>>>()?;
    let pass = worst <= tol;
    let mut rows: Vec<Vec<String>> = reconstruction
        .iter()
        .map(|&(n, d)| vec!["fock".into(), n.to_string(), String::new(), num(d), String::new(), String::new()])
        .collect();
    for (b, s) in widths.iter().zip(&sequences) {
        for (k, r) in s.radii.iter().enumerate() {
            rows.push(vec![
                "norm".into(),
                num(*b),
                num(*r),
                num(s.values[k].re),
                num(s.fock_series[k]),
                format!("{:?}", s.status).to_lowercase(),
            ]);
        }
    }
    Ok(Report {
        pass,
        summary: format!("circle-rep: {} (worst reconstruction distance {worst:e}, tol {tol:e})", verdict(pass)),
        json: json!({
            "schema_version": SCHEMA_VERSION,
            "command": "circle-rep",
            "tol": tol,
            "pass": pass,
            "reconstruction": reconstruction.iter().map(|&(n, d)| json!({"n": n, "distance": d})).collect::<Vec<_>>(),
            "norm_sequences": widths.iter().zip(&sequences).map(|(b, s)| json!({"width": b, "w": center, "sequence": s})).collect::<Vec<_>>(),
        }),
        table: Some(Table {
            header: vec!["kind", "n_or_width", "radius", "value", "fock_series", "status"],
            rows,
        }),
    })
}

pub fn squeezed_norm(args: SqueezedArgs) -> Result<Report> {
    let widths = non_empty("width", args.width.unwrap_or_else(|| vec![0.5, 1.0, 2.0]))?;
    let center = parse_complex(args.w.as_deref().unwrap_or("0"))?;
    let lambdas = non_empty(
        "lambda",
        args.lambda.unwrap_or_else(|| vec!["1".into(), "1+0.5i".into()]),
    )?
    .iter()
    .map(|s| {
        let l = parse_complex(s)?;
        if l.re <= 0.0 {
            bail!("--lambda needs Re λ > 0, got {l}");
        }
        Ok(l)
    })
    .collect::<Result<Vec<_>>>()?;
    let frame = OscillatorFrame::new(1.0, 1.0, positive("b", args.b.unwrap_or(1.0))?)?;
    let spec = QuadratureSpec::polar(
        positive("radius", args.radius.unwrap_or(10.0))?,
        args.n_radial.unwrap_or(160),
        args.n_angular.unwrap_or(96),
    )?;
    let tol = positive("tol", args.tol.unwrap_or(1e-6))?;
    let labels = widths
        .iter()
        .map(|&b| Ok(SqueezedLabel::new(center, positive("width", b)?)?))
        .collect::<Result<Vec<_>>>()?;
    let mut results = vec![];
    for (b, w) in widths.iter().zip(&labels) {
        for &l in &lambdas {
            let v = squeezed_norm_via_identity(w, l, &spec, &frame)?;
            results.push((*b, l, v, (v - 1.0).norm()));
        }
    }
    let worst = results.iter().map(|r| r.3).fold(0.0, f64::max);
    let pass = worst <= tol;
    Ok(Report {
        pass,
        summary: format!("squeezed-norm: {} (worst |⟨w|w⟩ − 1| {worst:e}, tol {tol:e})", verdict(pass)),
        json: json!({
            "schema_version": SCHEMA_VERSION,
            "command": "squeezed-norm",
            "w": center,
            "spec": spec,
            "tol": tol,
            "pass": pass,
            "rows": results.iter().map(|(b, l, v, e)| json!({"width": b, "lambda": l, "norm": v, "deviation": e})).collect::<Vec<_>>(),
        }),
        table: Some(Table {
            header: vec!["width", "lambda_re", "lambda_im", "norm_re", "norm_im", "deviation"],
            rows: results
                .iter()
                .map(|(b, l, v, e)| vec![num(*b), num(l.re), num(l.im), num(v.re), num(v.im), num(*e)])
                .collect(),
        }),
    })
}
