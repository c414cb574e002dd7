//! Mean-field (spin- and field-coherent-state) limit of the Dicke Hamiltonian
//!
//! ```text
//! H(q1,p1,q2,p2) = ω/2 (p2² + q2²) + ε/2 (p1² + q1²) − εJ
//!                + √(4J − q1² − p1²)/√(4J) · (G₊ p1 p2 + G₋ q1 q2)
//! ```
//!
//! with canonical flow q̇ = ∂H/∂p, ṗ = −∂H/∂q. The atomic plane is the disk
//! q1² + p1² < 4J.

use nalgebra::{Complex, Matrix4, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hilbert::{CouplingMode, ModelParams};

/// Residual below which a point is accepted as a fixed point.
pub const FIXED_POINT_TOL: f64 = 1e-8;

/// Threshold on eigenvalue real parts (and Hessian eigenvalues) separating
/// zero from nonzero.
pub const STABILITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhasePoint {
    pub q1: f64,
    pub p1: f64,
    pub q2: f64,
    pub p2: f64,
}

impl PhasePoint {
    pub const ORIGIN: PhasePoint = PhasePoint { q1: 0.0, p1: 0.0, q2: 0.0, p2: 0.0 };

    pub fn new(q1: f64, p1: f64, q2: f64, p2: f64) -> Self {
        PhasePoint { q1, p1, q2, p2 }
    }

    pub fn from_array(x: [f64; 4]) -> Self {
        PhasePoint { q1: x[0], p1: x[1], q2: x[2], p2: x[3] }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.q1, self.p1, self.q2, self.p2]
    }

    /// q1² + p1²
    pub fn r1_sq(&self) -> f64 {
        self.q1 * self.q1 + self.p1 * self.p1
    }

    /// q2² + p2²
    pub fn r2_sq(&self) -> f64 {
        self.q2 * self.q2 + self.p2 * self.p2
    }

    /// H₁ = (q1² + p1²)/2
    pub fn h1(&self) -> f64 {
        0.5 * self.r1_sq()
    }

    /// Rotates both planes by the same angle, the U(1) symmetry of the
    /// integrable model.
    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        PhasePoint {
            q1: c * self.q1 - s * self.p1,
            p1: s * self.q1 + c * self.p1,
            q2: c * self.q2 - s * self.p2,
            p2: s * self.q2 + c * self.p2,
        }
    }
}

/// 4J − q1² − p1², checked positive (or non-negative on the boundary when
/// `closed`).
fn domain_gap(pt: &PhasePoint, params: &ModelParams, closed: bool) -> Result<f64> {
    let limit = 4.0 * params.j;
    let s = limit - pt.r1_sq();
    if s > 0.0 || (closed && s == 0.0) {
        Ok(s)
    } else {
        Err(Error::OutsideDomain { r2: pt.r1_sq(), limit })
    }
}

pub fn classical_energy(pt: &PhasePoint, params: &ModelParams) -> Result<f64> {
    let s = domain_gap(pt, params, true)?;
    let f = (s / (4.0 * params.j)).sqrt();
    Ok(0.5 * params.omega * pt.r2_sq() + 0.5 * params.epsilon * pt.r1_sq() - params.epsilon * params.j
        + f * (params.g_plus() * pt.p1 * pt.p2 + params.g_minus() * pt.q1 * pt.q2))
}

/// ∂H/∂(q1, p1, q2, p2).
pub fn gradient(pt: &PhasePoint, params: &ModelParams) -> Result<[f64; 4]> {
    let s = domain_gap(pt, params, false)?;
    let k = 1.0 / (4.0 * params.j).sqrt();
    let root = s.sqrt();
    let f = k * root;
    let (gp, gm) = (params.g_plus(), params.g_minus());
    let c = gp * pt.p1 * pt.p2 + gm * pt.q1 * pt.q2;
    let PhasePoint { q1, p1, q2, p2 } = *pt;
    Ok([
        params.epsilon * q1 + f * gm * q2 - k * q1 * c / root,
        params.epsilon * p1 + f * gp * p2 - k * p1 * c / root,
        params.omega * q2 + f * gm * q1,
        params.omega * p2 + f * gp * p1,
    ])
}

/// (q̇1, ṗ1, q̇2, ṗ2) = (∂H/∂p1, −∂H/∂q1, ∂H/∂p2, −∂H/∂q2).
pub fn eom_rhs(pt: &PhasePoint, params: &ModelParams) -> Result<[f64; 4]> {
    let g = gradient(pt, params)?;
    Ok([g[1], -g[0], g[3], -g[2]])
}

pub fn norm4(v: &[f64; 4]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Second derivatives of H in the order (q1, p1, q2, p2).
pub fn hessian(pt: &PhasePoint, params: &ModelParams) -> Result<Matrix4<f64>> {
    let s = domain_gap(pt, params, false)?;
    let k = 1.0 / (4.0 * params.j).sqrt();
    let root = s.sqrt();
    let u = 1.0 / root;
    let u3 = u * u * u;
    let (gp, gm) = (params.g_plus(), params.g_minus());
    let PhasePoint { q1, p1, q2, p2 } = *pt;
    let c = gp * p1 * p2 + gm * q1 * q2;
    let eps = params.epsilon;

    let h_q1q1 = eps - 2.0 * k * u * gm * q1 * q2 - k * c * (u + q1 * q1 * u3);
    let h_p1p1 = eps - 2.0 * k * u * gp * p1 * p2 - k * c * (u + p1 * p1 * u3);
    let h_q1p1 = -k * u * (gm * p1 * q2 + gp * q1 * p2) - k * q1 * p1 * u3 * c;
    let h_q1q2 = k * gm * (root - q1 * q1 * u);
    let h_q1p2 = -k * u * gp * q1 * p1;
    let h_p1q2 = -k * u * gm * q1 * p1;
    let h_p1p2 = k * gp * (root - p1 * p1 * u);
    let w = params.omega;
    Ok(Matrix4::new(
        h_q1q1, h_q1p1, h_q1q2, h_q1p2, //
        h_q1p1, h_p1p1, h_p1q2, h_p1p2, //
        h_q1q2, h_p1q2, w, 0.0, //
        h_q1p2, h_p1p2, 0.0, w,
    ))
}

/// Linearization of [`eom_rhs`]: Ω · Hess H.
pub fn jacobian(pt: &PhasePoint, params: &ModelParams) -> Result<Matrix4<f64>> {
    let h = hessian(pt, params)?;
    let mut jac = Matrix4::zeros();
    for c in 0..4 {
        jac[(0, c)] = h[(1, c)];
        jac[(1, c)] = -h[(0, c)];
        jac[(2, c)] = h[(3, c)];
        jac[(3, c)] = -h[(2, c)];
    }
    Ok(jac)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointKind {
    Trivial,
    HopfCircle,
    PitchforkI,
    PitchforkII,
}

impl FixedPointKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FixedPointKind::Trivial => "trivial",
            FixedPointKind::HopfCircle => "hopf_circle",
            FixedPointKind::PitchforkI => "pitchfork_I",
            FixedPointKind::PitchforkII => "pitchfork_II",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    StableCenter,
    Unstable,
    Marginal,
}

impl Stability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stability::StableCenter => "stable-center",
            Stability::Unstable => "unstable",
            Stability::Marginal => "marginal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub kind: FixedPointKind,
    pub representative: PhasePoint,
    /// (R1², R2²) of the circle, `hopf_circle` only.
    pub radii_sq: Option<(f64, f64)>,
    /// c in (q2, p2) = −c (q1, p1), `hopf_circle` only.
    pub phase_lock: Option<f64>,
    pub energy: f64,
    pub stability: Stability,
}

impl FixedPoint {
    /// Point of the circle at atomic-plane angle `angle`, with
    /// (q1, p1) = R1 (cos, sin). Other kinds return the representative.
    pub fn sample(&self, angle: f64) -> PhasePoint {
        match (self.radii_sq, self.phase_lock) {
            (Some((r1_sq, _)), Some(c)) => {
                let r1 = r1_sq.sqrt();
                let (s, co) = angle.sin_cos();
                PhasePoint::new(r1 * co, r1 * s, -c * r1 * co, -c * r1 * s)
            }
            _ => self.representative,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointSet {
    pub points: Vec<FixedPoint>,
}

impl FixedPointSet {
    pub fn of_kind(&self, kind: FixedPointKind) -> impl Iterator<Item = &FixedPoint> + '_ {
        self.points.iter().filter(move |p| p.kind == kind)
    }

    pub fn has(&self, kind: FixedPointKind) -> bool {
        self.of_kind(kind).next().is_some()
    }
}

/// Coupling at which the origin bifurcates: G² = εω.
fn critical_coupling(params: &ModelParams) -> f64 {
    (params.epsilon * params.omega).sqrt()
}

fn make_point(kind: FixedPointKind, pt: PhasePoint, params: &ModelParams) -> FixedPoint {
    let stability = classify_stability(&pt, params).map(|r| r.label).unwrap_or(Stability::Marginal);
    FixedPoint {
        kind,
        representative: pt,
        radii_sq: None,
        phase_lock: None,
        energy: classical_energy(&pt, params).unwrap_or(f64::NAN),
        stability,
    }
}

/// Closed-form equilibria: the origin; the circle R1² = 2J(1 − εω/G²),
/// R2² = J(G⁴ − ε²ω²)/(G²ω²) when G′ = 0 and G² > εω; otherwise the
/// pitchfork pairs on the p axes (G₊² > εω) and on the q axes (G₋² > εω).
/// Labels come from [`classify_stability`]; the q-axis pair is a saddle.
pub fn analytic_fixed_points(params: &ModelParams) -> FixedPointSet {
    let (eps, w, j) = (params.epsilon, params.omega, params.j);
    let gc = critical_coupling(params);
    let mut points = vec![make_point(FixedPointKind::Trivial, PhasePoint::ORIGIN, params)];

    if params.is_integrable() {
        let g = params.g;
        if g > gc {
            let r1_sq = 2.0 * j * (1.0 - eps * w / (g * g));
            let r2_sq = j * (g.powi(4) - eps * eps * w * w) / (g * g * w * w);
            let c = g / (w * (2.0 * j).sqrt()) * (2.0 * j - 0.5 * r1_sq).sqrt();
            let rep = PhasePoint::new(r1_sq.sqrt(), 0.0, -c * r1_sq.sqrt(), 0.0);
            let mut fp = make_point(FixedPointKind::HopfCircle, rep, params);
            fp.radii_sq = Some((r1_sq, r2_sq));
            fp.phase_lock = Some(c);
            points.push(fp);
        }
        return FixedPointSet { points };
    }

    let branch = |gx: f64| {
        let a = (2.0 * j * (gx * gx - eps * w) / (gx * gx)).sqrt();
        let b = (j * (gx.powi(4) - eps * eps * w * w) / (w * w * gx * gx)).sqrt();
        (a, b)
    };
    let (gp, gm) = (params.g_plus(), params.g_minus().abs());
    if gp > gc {
        let (a, b) = branch(gp);
        for sign in [1.0, -1.0] {
            points.push(make_point(FixedPointKind::PitchforkI, PhasePoint::new(0.0, sign * a, 0.0, -sign * b), params));
        }
    }
    if gm > gc {
        let (a, b) = branch(params.g_minus());
        for sign in [1.0, -1.0] {
            points.push(make_point(
                FixedPointKind::PitchforkII,
                PhasePoint::new(sign * a, 0.0, -sign * b, 0.0),
                params,
            ));
        }
    }
    FixedPointSet { points }
}

/// Eigenvalues ±μ₁, ±μ₂ of a 4×4 Hamiltonian matrix Ω·S: μ² are the roots
/// of x² − (tr A²/2) x + det A.
pub fn hamiltonian_eigenvalues(a: &Matrix4<f64>) -> Vec<Complex<f64>> {
    let half_tr_sq = 0.5 * (a * a).trace();
    let det = a.determinant();
    let disc = Complex::new(half_tr_sq * half_tr_sq - 4.0 * det, 0.0).sqrt();
    let mut out = Vec::with_capacity(4);
    for x in [(Complex::new(half_tr_sq, 0.0) + disc) * 0.5, (Complex::new(half_tr_sq, 0.0) - disc) * 0.5] {
        let mu = x.sqrt();
        out.push(mu);
        out.push(-mu);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub jacobian: Matrix4<f64>,
    pub eigenvalues: Vec<Complex<f64>>,
    /// Smallest eigenvalue of the Hessian of H.
    pub hessian_min: f64,
    pub label: Stability,
}

/// Linearizes the flow at a fixed point and labels it.
///
/// * `stable-center`: an energy minimum, either strict or degenerate only
///   along the joint rotation of both planes (the neutral direction of a
///   circle of equilibria). The Jacobian spectrum is then imaginary.
/// * `unstable`: an eigenvalue of the Jacobian has Re > tol, or the point is
///   an energy saddle (Hessian eigenvalue < −tol).
/// * `marginal`: anything else, e.g. the origin exactly at the bifurcation.
pub fn classify_stability(pt: &PhasePoint, params: &ModelParams) -> Result<StabilityReport> {
    let residual = norm4(&eom_rhs(pt, params)?);
    if residual > FIXED_POINT_TOL {
        return Err(Error::NotFixedPoint(residual));
    }
    let jac = jacobian(pt, params)?;
    let hess = hessian(pt, params)?;
    let eigenvalues = hamiltonian_eigenvalues(&jac);
    let max_re = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let heig = SymmetricEigen::new(hess);
    let (imin, hessian_min) = heig.eigenvalues.iter().copied().enumerate().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    let null_count = heig.eigenvalues.iter().filter(|e| e.abs() <= STABILITY_TOL).count();

    let neutral_rotation = || {
        // rotation generator (−p1, q1, −p2, q2)
        let t = [-pt.p1, pt.q1, -pt.p2, pt.q2];
        let tn = norm4(&t);
        let v = heig.eigenvectors.column(imin);
        tn > 0.0 && params.g_plus() == params.g_minus() && {
            let cos = (0..4).map(|i| t[i] * v[i]).sum::<f64>().abs() / tn;
            cos > 1.0 - 1e-6
        }
    };
    // An energy minimum is Lyapunov stable whatever the (possibly defective)
    // zero modes of the Jacobian look like numerically, so the Hessian is
    // consulted first.
    let label =
        if hessian_min > STABILITY_TOL || (hessian_min >= -STABILITY_TOL && null_count == 1 && neutral_rotation()) {
            Stability::StableCenter
        } else if max_re > STABILITY_TOL || hessian_min < -STABILITY_TOL {
            Stability::Unstable
        } else {
            Stability::Marginal
        };
    Ok(StabilityReport { jacobian: jac, eigenvalues, hessian_min, label })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub samples: Vec<PhasePoint>,
    /// max |H(t) − H(0)| over accepted steps.
    pub energy_drift: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    /// Number of uniform output intervals on [0, t_final].
    pub output_intervals: usize,
    /// Local error tolerance as a fraction of the energy-drift tolerance.
    pub local_factor: f64,
    pub max_steps: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions { output_intervals: 1000, local_factor: 1e-2, max_steps: 10_000_000 }
    }
}

// Dormand–Prince 5(4) tableau (autonomous system, nodes not needed).
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// One DOPRI5 step; returns (y_new, error norm scaled by `atol`).
fn dopri_step(y: &[f64; 4], h: f64, params: &ModelParams, atol: f64) -> Result<([f64; 4], f64)> {
    let mut k = [[0.0; 4]; 7];
    for s in 0..7 {
        let mut ys = *y;
        for (r, a) in A[s].iter().enumerate().take(s) {
            for i in 0..4 {
                ys[i] += h * a * k[r][i];
            }
        }
        k[s] = eom_rhs(&PhasePoint::from_array(ys), params)?;
    }
    let mut y5 = *y;
    let mut err: f64 = 0.0;
    for i in 0..4 {
        let mut d5 = 0.0;
        let mut d4 = 0.0;
        for s in 0..7 {
            d5 += B5[s] * k[s][i];
            d4 += B4[s] * k[s][i];
        }
        y5[i] += h * d5;
        let scale = atol * (1.0 + y[i].abs().max(y5[i].abs()));
        err = err.max((h * (d5 - d4)).abs() / scale);
    }
    Ok((y5, err))
}

/// Adaptive Dormand–Prince integration with an energy-drift gate.
pub fn integrate_trajectory(p0: &PhasePoint, params: &ModelParams, t_final: f64, tol: f64) -> Result<Trajectory> {
    integrate_trajectory_with(p0, params, t_final, tol, &IntegrateOptions::default())
}

pub fn integrate_trajectory_with(
    p0: &PhasePoint,
    params: &ModelParams,
    t_final: f64,
    tol: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    if !(t_final > 0.0) || !(tol > 0.0) || opts.output_intervals == 0 {
        return Err(Error::InvalidParameter { name: "t_final/tol", reason: "must be positive".into() });
    }
    let e0 = classical_energy(p0, params)?;
    eom_rhs(p0, params)?;
    let atol = tol * opts.local_factor;
    let dt_out = t_final / opts.output_intervals as f64;

    let mut y = p0.to_array();
    let mut t = 0.0;
    let mut h = dt_out.min(0.01);
    let mut times = vec![0.0];
    let mut samples = vec![*p0];
    let mut drift: f64 = 0.0;
    let mut steps = 0;
    for out in 1..=opts.output_intervals {
        let t_next = if out == opts.output_intervals { t_final } else { out as f64 * dt_out };
        while t < t_next {
            // stretch by up to 10% rather than leave a sliver before t_next
            let last = t + 1.1 * h >= t_next;
            let h_try = if last { t_next - t } else { h };
            if h_try < 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t, state: y });
            }
            let (y_new, err) = match dopri_step(&y, h_try, params, atol) {
                Ok(r) => r,
                Err(Error::OutsideDomain { .. }) => {
                    h = 0.25 * h_try;
                    continue;
                }
                Err(e) => return Err(e),
            };
            if err <= 1.0 {
                t = if last { t_next } else { t + h_try };
                y = y_new;
                steps += 1;
                if steps > opts.max_steps {
                    return Err(Error::StepUnderflow { t, state: y });
                }
                let e = classical_energy(&PhasePoint::from_array(y), params)?;
                drift = drift.max((e - e0).abs());
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if !(err <= 1.0 && last) {
                h = h_try * factor;
            }
        }
        times.push(t);
        samples.push(PhasePoint::from_array(y));
    }
    if drift > tol {
        return Err(Error::EnergyDrift { drift, tol });
    }
    Ok(Trajectory { times, samples, energy_drift: drift, steps })
}

/// Point `center + s·direction` with H = `energy`, found by bisection on
/// s > 0. Requires H(center) < energy.
pub fn seed_on_energy_shell(
    center: &PhasePoint,
    direction: [f64; 4],
    energy: f64,
    params: &ModelParams,
) -> Result<PhasePoint> {
    let at = |s: f64| {
        let c = center.to_array();
        PhasePoint::from_array([
            c[0] + s * direction[0],
            c[1] + s * direction[1],
            c[2] + s * direction[2],
            c[3] + s * direction[3],
        ])
    };
    let h = |s: f64| classical_energy(&at(s), params).map(|e| e - energy);
    if h(0.0)? >= 0.0 {
        return Err(Error::InvalidParameter { name: "energy", reason: "must lie above the seed center energy".into() });
    }
    let mut hi = 1e-3;
    loop {
        match h(hi) {
            Ok(v) if v > 0.0 => break,
            Ok(_) if hi < 1e6 => hi *= 2.0,
            _ => {
                return Err(Error::InvalidParameter {
                    name: "energy",
                    reason: "shell not reached along direction".into(),
                })
            }
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(at(0.5 * (lo + hi)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchRow {
    pub lambda: f64,
    pub lambda_plus: f64,
    pub kind: FixedPointKind,
    pub point: PhasePoint,
    pub r1_sq: f64,
    pub r2_sq: f64,
    pub energy: f64,
    pub stability: Stability,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchBirth {
    pub kind: FixedPointKind,
    /// First grid λ at which the branch is present.
    pub lambda_first: f64,
    /// Analytic birth coupling λ = G/ε.
    pub lambda_critical: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationScan {
    pub rows: Vec<BranchRow>,
    pub births: Vec<BranchBirth>,
}

/// λ at which `kind` is born when the couplings follow `mode`.
fn birth_lambda(kind: FixedPointKind, template: &ModelParams, mode: CouplingMode) -> f64 {
    let gc = critical_coupling(template);
    let r = mode.ratio();
    let g = match kind {
        FixedPointKind::Trivial => 0.0,
        FixedPointKind::HopfCircle | FixedPointKind::PitchforkI => gc / (1.0 + r),
        FixedPointKind::PitchforkII => gc / (1.0 - r).abs(),
    };
    g / template.epsilon
}

/// Every analytic branch at each λ of an increasing grid.
pub fn bifurcation_scan(
    template: &ModelParams,
    lambda_grid: &[f64],
    mode: CouplingMode,
    exec: Exec,
) -> Result<BifurcationScan> {
    if lambda_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter { name: "lambda_grid", reason: "must be strictly increasing".into() });
    }
    let per_point = exec
        .map(lambda_grid, |&l| -> Result<Vec<BranchRow>> {
            let p = mode.at_lambda(template, l)?;
            Ok(analytic_fixed_points(&p)
                .points
                .into_iter()
                .map(|fp| {
                    let (r1_sq, r2_sq) = fp.radii_sq.unwrap_or((fp.representative.r1_sq(), fp.representative.r2_sq()));
                    BranchRow {
                        lambda: l,
                        lambda_plus: p.lambda_plus(),
                        kind: fp.kind,
                        point: fp.representative,
                        r1_sq,
                        r2_sq,
                        energy: fp.energy,
                        stability: fp.stability,
                    }
                })
                .collect())
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut births: Vec<BranchBirth> = Vec::new();
    let mut previous: Vec<FixedPointKind> = Vec::new();
    for rows in &per_point {
        let kinds: Vec<FixedPointKind> = rows.iter().map(|r| r.kind).collect();
        for r in rows {
            if r.kind != FixedPointKind::Trivial
                && !previous.contains(&r.kind)
                && !births.iter().any(|b| b.kind == r.kind)
            {
                births.push(BranchBirth {
                    kind: r.kind,
                    lambda_first: r.lambda,
                    lambda_critical: birth_lambda(r.kind, template, mode),
                });
            }
        }
        previous = kinds;
    }
    Ok(BifurcationScan { rows: per_point.into_iter().flatten().collect(), births })
}

/// Seeds on the energy shell next to every stable non-trivial fixed point
/// (or the origin when there is none), integrated in parallel.
pub fn shell_trajectories(
    params: &ModelParams,
    energy: f64,
    t_final: f64,
    tol: f64,
    exec: Exec,
) -> Result<Vec<(FixedPoint, Trajectory)>> {
    let set = analytic_fixed_points(params);
    let stable: Vec<FixedPoint> = set
        .points
        .iter()
        .filter(|p| p.kind != FixedPointKind::Trivial && p.stability == Stability::StableCenter)
        .copied()
        .collect();
    let centers = if stable.is_empty() { vec![set.points[0]] } else { stable };
    exec.map(&centers, |fp| {
        // displace along the field plane, which keeps the seed inside the atomic disk
        let seed = seed_on_energy_shell(&fp.representative, [0.0, 0.0, 0.6, 0.8], energy, params)?;
        Ok((*fp, integrate_trajectory(&seed, params, t_final, tol)?))
    })
    .into_iter()
    .collect()
}
