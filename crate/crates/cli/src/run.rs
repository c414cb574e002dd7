//! Command drivers.

use dicke_core::classical::{
    analytic_fixed_points, bifurcation_scan, classical_energy, classify_stability, shell_trajectories, FixedPoint,
    FixedPointKind, PhasePoint, Stability,
};
use dicke_core::entanglement::{entropy_scan, linear_entropy, reduced_atomic_dm, ScanOptions};
use dicke_core::spectra::{converge_at, solve_ground_state, ConvergedGroundState, TRUNCATION_CAP};
use dicke_core::wigner::{evaluate_wigner_plane, multipole_decompose, WignerGrid, PEAK_FRACTION};
use dicke_core::{Exec, ModelParams};
use serde_json::{json, Value};

use crate::config::{Command, Format, RunConfig};
use crate::output::{json, num, Csv, OutputDir};
use crate::svg::{diverging, Plot};
use crate::CliError;

/// Energy tolerance of the truncation search for single-point commands.
const TRUNCATION_TOL: f64 = 1e-10;
/// Energy-drift gate for trajectories.
const DRIFT_TOL: f64 = 1e-9;
/// Heat maps are drawn on at most this many cells per axis.
const HEATMAP_CELLS: usize = 128;

fn numeric(command: Command) -> impl Fn(dicke_core::Error) -> CliError {
    move |source| CliError::Numerical { command: command.as_str(), source }
}

/// Runs `cfg`, returning the paths written in order.
pub fn run(cfg: &RunConfig) -> Result<Vec<std::path::PathBuf>, CliError> {
    let mut out = OutputDir::create(&cfg.out)?;
    out.write("config.json", &json(&serde_json::to_value(cfg.to_file_config()).expect("plain data")))?;
    match cfg.command {
        Command::ScanEntropy => {
            scan_entropy(cfg, &mut out)?;
        }
        Command::FixedPoints => {
            fixed_points(cfg, &mut out)?;
        }
        Command::Bifurcation => {
            bifurcation(cfg, &mut out)?;
        }
        Command::Wigner => {
            wigner(cfg, &mut out)?;
        }
        Command::Trajectory => {
            trajectory(cfg, &mut out)?;
        }
        Command::Report => {
            let mut report = serde_json::Map::new();
            report.insert("entropy".into(), scan_entropy(cfg, &mut out)?);
            report.insert("fixed_points".into(), fixed_points(cfg, &mut out)?);
            report.insert("bifurcation".into(), bifurcation(cfg, &mut out)?);
            report.insert("wigner".into(), wigner(cfg, &mut out)?);
            if cfg.energy.is_some() {
                report.insert("trajectory".into(), trajectory(cfg, &mut out)?);
            }
            out.write("report.json", &json(&Value::Object(report)))?;
        }
    }
    Ok(out.into_written())
}

fn params_json(p: &ModelParams) -> Value {
    json!({
        "omega": p.omega, "epsilon": p.epsilon, "g": p.g, "g_prime": p.g_prime, "j": p.j, "hbar": p.hbar,
        "lambda": p.lambda(), "lambda_plus": p.lambda_plus(),
    })
}

fn point_json(pt: &PhasePoint) -> Value {
    json!({"q1": pt.q1, "p1": pt.p1, "q2": pt.q2, "p2": pt.p2})
}

fn scan_entropy(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let cmd = Command::ScanEntropy;
    let grid = cfg.lambda.grid();
    let opts = ScanOptions { n_max: cfg.n_max, exec: Exec::Parallel, ..ScanOptions::default() };
    let scan = entropy_scan(&cfg.params, &grid, cfg.coupling_mode(), &opts).map_err(numeric(cmd))?;

    if cfg.wants(Format::Csv) {
        let mut csv =
            Csv::new(&["lambda", "lambda_plus", "energy", "entropy", "participation", "degenerate", "entropy_right"]);
        for r in &scan.rows {
            csv.row(&[
                num(r.lambda),
                num(r.lambda_plus),
                num(r.energy),
                num(r.entropy),
                r.participation.to_string(),
                r.degenerate.to_string(),
                num(r.entropy_right),
            ]);
        }
        out.write("entropy.csv", &csv.finish())?;
    }
    let summary = json!({
        "n_max": scan.n_max,
        "points": scan.rows.len(),
        "max_entropy": scan.rows.iter().map(|r| r.entropy).fold(0.0, f64::max),
    });
    if cfg.wants(Format::Json) {
        let doc = json!({
            "mode": cfg.mode,
            "n_max": scan.n_max,
            "params": params_json(&cfg.params),
            "rows": serde_json::to_value(&scan.rows).expect("plain data"),
        });
        out.write("entropy.json", &json(&doc))?;
    }
    if cfg.wants(Format::Svg) {
        let pts: Vec<(f64, f64)> = scan.rows.iter().map(|r| (r.lambda_plus, r.entropy)).collect();
        let xmax = pts.last().map_or(1.0, |p| p.0);
        let ymax = pts.iter().map(|p| p.1).fold(0.0, f64::max).max(0.5) * 1.1;
        let mut plot = Plot::new(
            &format!("Linear entropy, J = {}, {:?} coupling", cfg.params.j, cfg.mode),
            "λ₊ = (G + G′)/ε",
            "S = 1 − Tr ρ_A²",
            (pts.first().map_or(0.0, |p| p.0), xmax),
            (0.0, ymax),
        );
        plot.vline(1.0, "gray", "λc");
        plot.polyline(&pts, "black", 1.5, None);
        out.write("entropy.svg", &plot.finish())?;
    }
    Ok(summary)
}

fn fixed_point_json(fp: &FixedPoint, params: &ModelParams) -> Value {
    let report = classify_stability(&fp.representative, params).ok();
    json!({
        "kind": fp.kind.as_str(),
        "stability": fp.stability.as_str(),
        "representative": point_json(&fp.representative),
        "energy": fp.energy,
        "radii_sq": fp.radii_sq.map(|(a, b)| vec![a, b]),
        "phase_lock": fp.phase_lock,
        "eigenvalues": report.as_ref().map(|r| r.eigenvalues.iter().map(|z| vec![z.re, z.im]).collect::<Vec<_>>()),
        "hessian_min": report.as_ref().map(|r| r.hessian_min),
    })
}

fn fixed_points(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let p = &cfg.params;
    let set = analytic_fixed_points(p);
    let points: Vec<Value> = set.points.iter().map(|fp| fixed_point_json(fp, p)).collect();
    let doc = json!({"params": params_json(p), "points": points});
    if cfg.wants(Format::Json) {
        out.write("fixed_points.json", &json(&doc))?;
    }
    if cfg.wants(Format::Csv) {
        let mut csv = Csv::new(&["kind", "stability", "q1", "p1", "q2", "p2", "energy", "r1_sq", "r2_sq"]);
        for fp in &set.points {
            let (a, b) = fp.radii_sq.unwrap_or((fp.representative.r1_sq(), fp.representative.r2_sq()));
            let r = fp.representative;
            csv.row(&[
                fp.kind.as_str().into(),
                fp.stability.as_str().into(),
                num(r.q1),
                num(r.p1),
                num(r.q2),
                num(r.p2),
                num(fp.energy),
                num(a),
                num(b),
            ]);
        }
        out.write("fixed_points.csv", &csv.finish())?;
    }
    if cfg.wants(Format::Svg) {
        let scale = (4.0 * p.j).sqrt();
        let mut plot = Plot::new(
            &format!("Classical equilibria, G = {}, G′ = {}, J = {}", p.g, p.g_prime, p.j),
            "q₁/√(4J)",
            "p₁/√(4J)",
            (-1.05, 1.05),
            (-1.05, 1.05),
        )
        .square();
        plot.circle(0.0, 0.0, 1.0, "gray", None);
        for fp in &set.points {
            let color = stability_color(fp.stability);
            match fp.radii_sq {
                Some((r1, _)) => plot.circle(0.0, 0.0, (r1 / (4.0 * p.j)).sqrt(), color, Some("6 3")),
                None => plot.marker(fp.representative.q1 / scale, fp.representative.p1 / scale, 4.0, color),
            }
        }
        plot.legend(&[("black", "stable-center"), ("#d62728", "unstable"), ("#7f7f7f", "marginal")]);
        out.write("fixed_points.svg", &plot.finish())?;
    }
    Ok(json!({"count": set.points.len(), "kinds": set.points.iter().map(|f| f.kind.as_str()).collect::<Vec<_>>()}))
}

fn stability_color(s: Stability) -> &'static str {
    match s {
        Stability::StableCenter => "black",
        Stability::Unstable => "#d62728",
        Stability::Marginal => "#7f7f7f",
    }
}

fn bifurcation(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let cmd = Command::Bifurcation;
    let grid = cfg.lambda.grid();
    let scan = bifurcation_scan(&cfg.params, &grid, cfg.coupling_mode(), Exec::Parallel).map_err(numeric(cmd))?;
    let births: Vec<Value> = scan
        .births
        .iter()
        .map(|b| json!({"kind": b.kind.as_str(), "lambda_first": b.lambda_first, "lambda_critical": b.lambda_critical}))
        .collect();
    if cfg.wants(Format::Csv) {
        let mut csv = Csv::new(&[
            "lambda",
            "lambda_plus",
            "kind",
            "stability",
            "q1",
            "p1",
            "q2",
            "p2",
            "r1_sq",
            "r2_sq",
            "energy",
        ]);
        for r in &scan.rows {
            csv.row(&[
                num(r.lambda),
                num(r.lambda_plus),
                r.kind.as_str().into(),
                r.stability.as_str().into(),
                num(r.point.q1),
                num(r.point.p1),
                num(r.point.q2),
                num(r.point.p2),
                num(r.r1_sq),
                num(r.r2_sq),
                num(r.energy),
            ]);
        }
        out.write("bifurcation.csv", &csv.finish())?;
    }
    if cfg.wants(Format::Json) {
        let rows: Vec<Value> = scan
            .rows
            .iter()
            .map(|r| {
                json!({
                    "lambda": r.lambda, "lambda_plus": r.lambda_plus, "kind": r.kind.as_str(),
                    "stability": r.stability.as_str(), "point": point_json(&r.point),
                    "r1_sq": r.r1_sq, "r2_sq": r.r2_sq, "energy": r.energy,
                })
            })
            .collect();
        out.write("bifurcation.json", &json(&json!({"mode": cfg.mode, "births": births, "rows": rows})))?;
    }
    if cfg.wants(Format::Svg) {
        let xs: Vec<f64> = scan.rows.iter().map(|r| r.lambda_plus).collect();
        let x0 = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let x1 = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ymax = scan.rows.iter().map(|r| r.r1_sq.sqrt()).fold(0.0, f64::max).max(1.0) * 1.1;
        let mut plot = Plot::new(
            &format!("Classical branches, J = {}, {:?} coupling", cfg.params.j, cfg.mode),
            "λ₊ = (G + G′)/ε",
            "R₁ = √(q₁² + p₁²)",
            (x0, x1),
            (0.0, ymax),
        );
        plot.vline(1.0, "gray", "λc");
        for r in &scan.rows {
            plot.marker(r.lambda_plus, r.r1_sq.sqrt(), 1.6, stability_color(r.stability));
        }
        plot.legend(&[("black", "stable-center"), ("#d62728", "unstable"), ("#7f7f7f", "marginal")]);
        out.write("bifurcation.svg", &plot.finish())?;
    }
    Ok(json!({"births": births, "rows": scan.rows.len()}))
}

/// Ground state at the configured truncation, or a converged one.
fn ground_state(cfg: &RunConfig, cmd: Command) -> Result<ConvergedGroundState, CliError> {
    match cfg.n_max {
        Some(n_max) => {
            let (basis, state) = solve_ground_state(&cfg.params, n_max).map_err(numeric(cmd))?;
            Ok(ConvergedGroundState { n_max, basis, state })
        }
        None => converge_at(&cfg.params, TRUNCATION_TOL, TRUNCATION_CAP).map_err(numeric(cmd)),
    }
}

/// Marching squares for one level over the grid cell centres.
fn contour(grid: &WignerGrid, level: f64) -> Vec<[(f64, f64); 2]> {
    let n = grid.len();
    let ax = grid.axis();
    let mut segs = Vec::new();
    for iy in 0..n - 1 {
        for ix in 0..n - 1 {
            let (Some(a), Some(b), Some(c), Some(d)) =
                (grid.value(ix, iy), grid.value(ix + 1, iy), grid.value(ix + 1, iy + 1), grid.value(ix, iy + 1))
            else {
                continue;
            };
            let (x0, x1, y0, y1) = (ax[ix], ax[ix + 1], ax[iy], ax[iy + 1]);
            let cross = |u: f64, v: f64| (level - u) / (v - u);
            // edges: 0 bottom a→b, 1 right b→c, 2 top d→c, 3 left a→d
            let mut e: [Option<(f64, f64)>; 4] = [None; 4];
            if (a >= level) != (b >= level) {
                e[0] = Some((x0 + cross(a, b) * (x1 - x0), y0));
            }
            if (b >= level) != (c >= level) {
                e[1] = Some((x1, y0 + cross(b, c) * (y1 - y0)));
            }
            if (d >= level) != (c >= level) {
                e[2] = Some((x0 + cross(d, c) * (x1 - x0), y1));
            }
            if (a >= level) != (d >= level) {
                e[3] = Some((x0, y0 + cross(a, d) * (y1 - y0)));
            }
            let hits: Vec<(f64, f64)> = e.iter().flatten().copied().collect();
            match hits.len() {
                2 => segs.push([hits[0], hits[1]]),
                4 => {
                    let centre = 0.25 * (a + b + c + d) >= level;
                    let (p, q, r, s) = (e[0].unwrap(), e[1].unwrap(), e[2].unwrap(), e[3].unwrap());
                    if (a >= level) != centre {
                        segs.push([s, p]);
                        segs.push([q, r]);
                    } else {
                        segs.push([p, q]);
                        segs.push([r, s]);
                    }
                }
                _ => {}
            }
        }
    }
    segs
}

fn wigner(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let cmd = Command::Wigner;
    let p = &cfg.params;
    let gs = ground_state(cfg, cmd)?;
    let rho = reduced_atomic_dm(&gs.state, &gs.basis).map_err(numeric(cmd))?;
    let purity = linear_entropy(&rho);
    let decomp = multipole_decompose(&rho);
    let grid = evaluate_wigner_plane(&decomp, cfg.grid, Exec::Parallel).map_err(numeric(cmd))?;

    let area = grid.half_height_area(p.hbar).map_err(numeric(cmd))?;
    let neg = grid.negativity();
    let ridge = grid.ridge_radius().ok();
    let peaks = grid.local_maxima(PEAK_FRACTION);
    let set = analytic_fixed_points(p);
    let scale = (4.0 * p.j).sqrt();
    let classical_radius =
        set.of_kind(FixedPointKind::HopfCircle).next().and_then(|h| h.radii_sq).map(|(r1, _)| r1.sqrt() / scale);
    let classical_points: Vec<Value> = set
        .points
        .iter()
        .filter(|f| matches!(f.kind, FixedPointKind::PitchforkI | FixedPointKind::PitchforkII))
        .map(|f| json!({"kind": f.kind.as_str(), "x": f.representative.q1 / scale, "y": f.representative.p1 / scale}))
        .collect();

    let summary = json!({
        "params": params_json(p),
        "n_max": gs.n_max,
        "energy": gs.state.energy,
        "purity": purity.purity,
        "entropy": purity.entropy,
        "grid_points": cfg.grid.points,
        "grid_radius": cfg.grid.radius,
        "integral": grid.integral(),
        "integral_sq": grid.integral_sq(),
        "max": grid.max().map(|m| json!({"x": m.x, "y": m.y, "value": m.value})),
        "half_height": serde_json::to_value(area).expect("plain data"),
        "negativity": serde_json::to_value(neg).expect("plain data"),
        "ridge": ridge.map(|r| serde_json::to_value(r).expect("plain data")),
        "classical_radius": classical_radius,
        "classical_points": classical_points,
        "peaks": peaks.iter().map(|m| json!({"x": m.x, "y": m.y, "value": m.value})).collect::<Vec<_>>(),
        "mirror_defect": grid.mirror_defect(),
    });

    if cfg.wants(Format::Csv) {
        let mut csv = Csv::new(&["x", "y", "w"]);
        for (x, y, w) in grid.cells() {
            csv.row(&[num(x), num(y), num(w)]);
        }
        out.write("wigner.csv", &csv.finish())?;
    }
    if cfg.wants(Format::Json) {
        out.write("wigner.json", &json(&summary))?;
    }
    if cfg.wants(Format::Svg) {
        out.write(
            "wigner.svg",
            &wigner_svg(cfg, &grid, area.level, ridge.map(|r| r.radius), classical_radius, &set.points),
        )?;
    }
    Ok(summary)
}

fn wigner_svg(
    cfg: &RunConfig,
    grid: &WignerGrid,
    level: f64,
    ridge: Option<f64>,
    classical_radius: Option<f64>,
    points: &[FixedPoint],
) -> String {
    let p = &cfg.params;
    let r = cfg.grid.radius;
    let mut plot = Plot::new(
        &format!("Atomic Wigner function, G = {}, G′ = {}, J = {}", p.g, p.g_prime, p.j),
        "q₁/√(4J)",
        "p₁/√(4J)",
        (-1.02, 1.02),
        (-1.02, 1.02),
    )
    .square();
    let wmax = grid.max().map_or(1.0, |m| m.value);
    let wmin = grid.min_value().unwrap_or(0.0).min(0.0);
    // block-average onto a coarser heat map
    let n = grid.len();
    let stride = n.div_ceil(HEATMAP_CELLS);
    let h = cfg.grid.spacing();
    let ax = grid.axis();
    for by in (0..n).step_by(stride) {
        for bx in (0..n).step_by(stride) {
            let (mut sum, mut count) = (0.0, 0usize);
            for iy in by..(by + stride).min(n) {
                for ix in bx..(bx + stride).min(n) {
                    if let Some(w) = grid.value(ix, iy) {
                        sum += w;
                        count += 1;
                    }
                }
            }
            if count == 0 {
                continue;
            }
            let w = sum / count as f64;
            let t = if w >= 0.0 {
                w / wmax
            } else if wmin < 0.0 {
                -w / wmin
            } else {
                0.0
            };
            let x0 = ax[bx] - 0.5 * h;
            let y0 = ax[by] - 0.5 * h;
            let x1 = ax[(bx + stride).min(n) - 1] + 0.5 * h;
            let y1 = ax[(by + stride).min(n) - 1] + 0.5 * h;
            plot.rect(x0, y0, x1, y1, &diverging(t));
        }
    }
    plot.circle(0.0, 0.0, r, "#7f7f7f", None);
    plot.segments(&contour(grid, level), "black", 1.2);
    if let Some(rc) = classical_radius {
        plot.circle(0.0, 0.0, rc, "#555555", Some("6 3"));
    }
    if let Some(rr) = ridge.filter(|&rr| rr > 0.0) {
        plot.circle(0.0, 0.0, rr, "black", Some("2 2"));
    }
    let scale = (4.0 * p.j).sqrt();
    for fp in points.iter().filter(|f| matches!(f.kind, FixedPointKind::PitchforkI | FixedPointKind::PitchforkII)) {
        plot.marker(fp.representative.q1 / scale, fp.representative.p1 / scale, 3.5, "#555555");
    }
    plot.legend(&[
        ("black", "50% level of W"),
        ("#555555", "classical equilibrium"),
        ("#ff0000", "W > 0"),
        ("#0000ff", "W < 0 (own scale)"),
    ]);
    plot.finish()
}

fn trajectory(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let cmd = Command::Trajectory;
    let p = &cfg.params;
    let energy = cfg.energy.ok_or_else(|| CliError::Config("missing required field `energy` for trajectory".into()))?;
    let runs = shell_trajectories(p, energy, cfg.t_final, DRIFT_TOL, Exec::Parallel).map_err(numeric(cmd))?;
    let scale = (4.0 * p.j).sqrt();

    let mut summaries = Vec::new();
    for (i, (fp, tr)) in runs.iter().enumerate() {
        let range = |f: fn(&PhasePoint) -> f64| {
            let v: Vec<f64> = tr.samples.iter().map(f).collect();
            vec![v.iter().copied().fold(f64::INFINITY, f64::min), v.iter().copied().fold(f64::NEG_INFINITY, f64::max)]
        };
        summaries.push(json!({
            "index": i,
            "center_kind": fp.kind.as_str(),
            "center": point_json(&fp.representative),
            "seed": point_json(&tr.samples[0]),
            "energy_drift": tr.energy_drift,
            "steps": tr.steps,
            "q1_range": range(|s| s.q1),
            "p1_range": range(|s| s.p1),
        }));
    }
    if cfg.wants(Format::Csv) {
        let mut csv = Csv::new(&["trajectory", "center_kind", "t", "q1", "p1", "q2", "p2", "energy"]);
        for (i, (fp, tr)) in runs.iter().enumerate() {
            for (t, s) in tr.times.iter().zip(&tr.samples) {
                let e = classical_energy(s, p).unwrap_or(f64::NAN);
                csv.row(&[
                    i.to_string(),
                    fp.kind.as_str().into(),
                    num(*t),
                    num(s.q1),
                    num(s.p1),
                    num(s.q2),
                    num(s.p2),
                    num(e),
                ]);
            }
        }
        out.write("trajectory.csv", &csv.finish())?;
    }
    let doc = json!({"params": params_json(p), "energy": energy, "t_final": cfg.t_final, "trajectories": summaries});
    if cfg.wants(Format::Json) {
        out.write("trajectory.json", &json(&doc))?;
    }
    if cfg.wants(Format::Svg) {
        let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
        let mut plot = Plot::new(
            &format!("Trajectories on E = {energy}, G = {}, G′ = {}, J = {}", p.g, p.g_prime, p.j),
            "q₁/√(4J)",
            "p₁/√(4J)",
            (-1.05, 1.05),
            (-1.05, 1.05),
        )
        .square();
        plot.circle(0.0, 0.0, 1.0, "gray", None);
        for (i, (fp, tr)) in runs.iter().enumerate() {
            let pts: Vec<(f64, f64)> = tr.samples.iter().map(|s| (s.q1 / scale, s.p1 / scale)).collect();
            plot.polyline(&pts, colors[i % colors.len()], 0.8, None);
            plot.marker(fp.representative.q1 / scale, fp.representative.p1 / scale, 3.5, "black");
        }
        out.write("trajectory.svg", &plot.finish())?;
    }
    Ok(doc)
}
