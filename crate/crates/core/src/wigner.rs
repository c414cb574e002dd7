//! Spin-J Wigner function of the atomic reduced state, on the planar disk.
//!
//! W(Θ, φ) = √(4π/(2J+1)) Σ_KQ ρ_KQ Y_KQ(Θ, φ), with multipoles taken against
//! the orthonormal tensor operators
//! (T_KQ)_{m′m} = √((2K+1)/(2J+1)) ⟨J m; K Q | J m′⟩.
//! With the measure dμ = (2J+1)/(4π) dΩ this gives ∫W dμ = Tr ρ and
//! ∫W² dμ = Tr ρ².
//!
//! The sphere is flattened onto the disk x² + y² < 1, x = q₁/√(4J),
//! y = p₁/√(4J), through the coherent-state label
//! w = (p₁ + i q₁)/√(4J − q₁² − p₁²) = tan(Θ′/2) e^{i arg w}, Θ′ measured
//! from |J, −J⟩. In standard polar angles this is cos Θ = 2ρ² − 1 and
//! φ = −arg w. The map is area preserving up to a constant, so
//! dμ = (2J+1)/π dx dy.

use std::f64::consts::PI;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::cg::cg_twice;
use crate::entanglement::{DensityMatrix, C64};
use crate::error::{Error, Result};
use crate::exec::Exec;

/// Largest |ρ_KQ| with Q ≠ 0 still treated as azimuthally symmetric.
pub const AZIMUTHAL_TOL: f64 = 1e-10;

/// Local maxima below this fraction of the global maximum are ripples.
pub const PEAK_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct MultipoleDecomposition {
    twice_j: usize,
    /// components[K][Q + K]
    components: Vec<Vec<C64>>,
}

impl MultipoleDecomposition {
    pub fn twice_j(&self) -> usize {
        self.twice_j
    }

    pub fn j(&self) -> f64 {
        self.twice_j as f64 / 2.0
    }

    /// Highest rank, 2J.
    pub fn max_rank(&self) -> usize {
        self.twice_j
    }

    /// ρ_KQ; zero outside |Q| ≤ K ≤ 2J.
    pub fn get(&self, k: usize, q: i64) -> C64 {
        if k > self.twice_j || q.unsigned_abs() as usize > k {
            return C64::new(0.0, 0.0);
        }
        self.components[k][(q + k as i64) as usize]
    }

    /// Σ |ρ_KQ|², equal to Tr ρ².
    pub fn norm_sq(&self) -> f64 {
        self.components.iter().flatten().map(|c| c.norm_sqr()).sum()
    }

    /// max |ρ_KQ| over Q ≠ 0.
    pub fn max_off_axis(&self) -> f64 {
        let mut m = 0.0f64;
        for (k, row) in self.components.iter().enumerate() {
            for (i, c) in row.iter().enumerate() {
                if i != k {
                    m = m.max(c.norm());
                }
            }
        }
        m
    }

    /// Largest violation of ρ_{K,−Q} = (−1)^Q conj ρ_KQ.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut d = 0.0f64;
        for k in 0..=self.twice_j {
            for q in 1..=k as i64 {
                let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
                d = d.max((self.get(k, -q) - self.get(k, q).conj() * sign).norm());
            }
        }
        d
    }

    /// W at a sphere point given by (cos Θ, sin Θ, φ).
    pub fn eval_sphere(&self, cos_t: f64, sin_t: f64, phi: f64) -> f64 {
        let kmax = self.twice_j;
        let p = legendre_table(kmax, cos_t, sin_t);
        let mut sum = 0.0;
        for k in 0..=kmax {
            sum += self.components[k][k].re * p[idx(k, 0)];
        }
        for q in 1..=kmax {
            let (s, c) = (q as f64 * phi).sin_cos();
            let mut part = 0.0;
            for k in q..=kmax {
                let r = self.components[k][q + k];
                part += (r.re * c - r.im * s) * p[idx(k, q)];
            }
            sum += 2.0 * part;
        }
        (4.0 * PI / (self.twice_j as f64 + 1.0)).sqrt() * sum
    }

    /// (∫W dμ, ∫W² dμ) over the cap cos Θ ≥ z0, with Gauss–Legendre in
    /// cos Θ and a uniform φ rule; exact since W² has degree ≤ 4J.
    pub fn cap_moments(&self, z0: f64) -> (f64, f64) {
        let tj = self.twice_j;
        let nphi = 2 * tj + 4;
        let gl = GaussLegendre::new(tj + 2).expect("degree ≥ 2");
        let phis: Vec<(f64, f64)> =
            (0..nphi).map(|k| (2.0 * PI * k as f64 / nphi as f64, 2.0 * PI / nphi as f64)).collect();
        let scale = (tj as f64 + 1.0) / (4.0 * PI);
        let w1 = gl.integrate(z0, 1.0, |z| {
            let s = (1.0 - z * z).max(0.0).sqrt();
            phis.iter().map(|&(phi, dw)| self.eval_sphere(z, s, phi) * dw).sum()
        });
        let w2 = gl.integrate(z0, 1.0, |z| {
            let s = (1.0 - z * z).max(0.0).sqrt();
            phis.iter().map(|&(phi, dw)| self.eval_sphere(z, s, phi).powi(2) * dw).sum()
        });
        (scale * w1, scale * w2)
    }

    /// W at a point of the open unit disk.
    pub fn eval_plane(&self, x: f64, y: f64) -> Result<f64> {
        let (c, s, phi) = plane_to_sphere(x, y)?;
        Ok(self.eval_sphere(c, s, phi))
    }
}

fn idx(k: usize, q: usize) -> usize {
    k * (k + 1) / 2 + q
}

/// Orthonormal associated Legendre functions with the Condon–Shortley phase,
/// Y_KQ = p[idx(K, Q)] e^{iQφ} for 0 ≤ Q ≤ K ≤ kmax.
fn legendre_table(kmax: usize, x: f64, s: f64) -> Vec<f64> {
    let mut p = vec![0.0; idx(kmax, kmax) + 1];
    p[0] = 1.0 / (4.0 * PI).sqrt();
    for q in 1..=kmax {
        let qf = q as f64;
        p[idx(q, q)] = -((2.0 * qf + 1.0) / (2.0 * qf)).sqrt() * s * p[idx(q - 1, q - 1)];
    }
    for q in 0..kmax {
        let qf = q as f64;
        p[idx(q + 1, q)] = (2.0 * qf + 3.0).sqrt() * x * p[idx(q, q)];
        for k in q + 2..=kmax {
            let (kf, km) = (k as f64, (k - 1) as f64);
            let a = ((4.0 * kf * kf - 1.0) / (kf * kf - qf * qf)).sqrt();
            let b = ((km * km - qf * qf) / (4.0 * km * km - 1.0)).sqrt();
            p[idx(k, q)] = a * (x * p[idx(k - 1, q)] - b * p[idx(k - 2, q)]);
        }
    }
    p
}

/// (cos Θ, sin Θ, φ) for a point of the open unit disk.
pub fn plane_to_sphere(x: f64, y: f64) -> Result<(f64, f64, f64)> {
    let r2 = x * x + y * y;
    if !(r2 < 1.0) {
        return Err(Error::OutsideDomain { r2, limit: 1.0 });
    }
    let cos_t = 2.0 * r2 - 1.0;
    let sin_t = 2.0 * (r2 * (1.0 - r2)).sqrt();
    let phi = -x.atan2(y);
    Ok((cos_t, sin_t, phi))
}

/// ρ_KQ = Tr(ρ T†_KQ) for K = 0..2J.
pub fn multipole_decompose(rho: &DensityMatrix) -> MultipoleDecomposition {
    let tj = rho.twice_j();
    let dim = tj + 1;
    let tji = tj as i64;
    let mut components = Vec::with_capacity(dim);
    for k in 0..=tj {
        let norm = ((2 * k + 1) as f64 / dim as f64).sqrt();
        let mut row = Vec::with_capacity(2 * k + 1);
        for q in -(k as i64)..=k as i64 {
            let mut acc = C64::new(0.0, 0.0);
            for b in 0..dim {
                let a = b as i64 + q;
                if a < 0 || a >= dim as i64 {
                    continue;
                }
                let tm = 2 * b as i64 - tji;
                let c = cg_twice(tji, tm, 2 * k as i64, 2 * q, tji, tm + 2 * q);
                if c != 0.0 {
                    acc += rho.get(a as usize, b) * (norm * c);
                }
            }
            row.push(acc);
        }
        components.push(row);
    }
    MultipoleDecomposition { twice_j: tj, components }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Cells per axis.
    pub points: usize,
    /// Half-width of the square; only cells with centre inside this radius
    /// are evaluated.
    pub radius: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { points: 512, radius: 0.999 }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.points < 3 {
            return Err(Error::DegenerateGrid(format!("{} points per axis", self.points)));
        }
        if !(self.radius > 0.0 && self.radius < 1.0) {
            return Err(Error::OutsideDomain { r2: self.radius * self.radius, limit: 1.0 });
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.radius / self.points as f64
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.radius + (i as f64 + 0.5) * self.spacing()
    }
}

/// W on a cell-centred square grid; cells outside the disk hold NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    spec: GridSpec,
    axis: Vec<f64>,
    /// values[iy * n + ix]
    values: Vec<f64>,
    decomposition: MultipoleDecomposition,
}

/// Evaluates W over the grid, one row per task.
pub fn evaluate_wigner_plane(decomp: &MultipoleDecomposition, spec: GridSpec, exec: Exec) -> Result<WignerGrid> {
    spec.validate()?;
    let n = spec.points;
    let axis: Vec<f64> = (0..n).map(|i| spec.coordinate(i)).collect();
    let r2max = spec.radius * spec.radius;
    let rows = exec.map_range(n, |iy| {
        let y = axis[iy];
        axis.iter()
            .map(|&x| if x * x + y * y <= r2max { decomp.eval_plane(x, y).unwrap_or(f64::NAN) } else { f64::NAN })
            .collect::<Vec<f64>>()
    });
    Ok(WignerGrid { spec, axis, values: rows.concat(), decomposition: decomp.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfHeightArea {
    /// 50% level, 0.5·max W.
    pub level: f64,
    /// Area of {W ≥ level} in the scaled (x, y) plane.
    pub scaled_area: f64,
    /// Same area in (q₁, p₁) units divided by ħ.
    pub area: f64,
    /// area / N.
    pub per_atom: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Negativity {
    /// ∫ max(0, −W) dμ.
    pub volume: f64,
    pub min_value: f64,
    /// Scaled-plane area of {W < 0}.
    pub area: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ridge {
    /// Scaled radius of the maximal circle.
    pub radius: f64,
    pub height: f64,
    /// max − min of W around the circle.
    pub variation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

impl WignerGrid {
    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.spec.points
    }

    pub fn is_empty(&self) -> bool {
        self.spec.points == 0
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn decomposition(&self) -> &MultipoleDecomposition {
        &self.decomposition
    }

    pub fn j(&self) -> f64 {
        self.decomposition.j()
    }

    /// W at cell (ix, iy), None outside the disk.
    pub fn value(&self, ix: usize, iy: usize) -> Option<f64> {
        let v = self.values[iy * self.spec.points + ix];
        v.is_finite().then_some(v)
    }

    /// (x, y, W) for every evaluated cell, rows of increasing y.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let n = self.spec.points;
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .map(move |(i, &v)| (self.axis[i % n], self.axis[i / n], v))
    }

    /// dμ of one cell.
    fn cell_measure(&self) -> f64 {
        let h = self.spec.spacing();
        h * h * (self.decomposition.twice_j() as f64 + 1.0) / PI
    }

    /// The rim beyond the grid radius, where the whole neighbourhood of
    /// |J, J⟩ is squeezed, as a polar cap.
    fn rim(&self) -> (f64, f64) {
        let r = self.spec.radius;
        self.decomposition.cap_moments(2.0 * r * r - 1.0)
    }

    /// ∫ W dμ: midpoint rule on the grid plus the exact rim cap.
    pub fn integral(&self) -> f64 {
        self.cells().map(|c| c.2).sum::<f64>() * self.cell_measure() + self.rim().0
    }

    /// ∫ W² dμ, same quadrature as [`Self::integral`].
    pub fn integral_sq(&self) -> f64 {
        self.cells().map(|c| c.2 * c.2).sum::<f64>() * self.cell_measure() + self.rim().1
    }

    pub fn max(&self) -> Option<Peak> {
        self.cells().map(|(x, y, value)| Peak { x, y, value }).max_by(|a, b| a.value.total_cmp(&b.value))
    }

    pub fn min_value(&self) -> Option<f64> {
        self.cells().map(|c| c.2).min_by(f64::total_cmp)
    }

    /// Area of {W ≥ max/2}, in units of ħ, and that area divided by the
    /// atomic dimension 2J+1. Each square of four neighbouring cell centres is
    /// split into two triangles and W is interpolated linearly on each.
    pub fn half_height_area(&self, hbar: f64) -> Result<HalfHeightArea> {
        let peak = self.max().ok_or(Error::Empty("wigner grid"))?;
        let lo = self.min_value().unwrap_or(peak.value);
        if !(peak.value > 0.0) || peak.value - lo <= f64::EPSILON * peak.value.abs() {
            return Err(Error::DegenerateGrid(format!("max W = {:e}, min W = {lo:e}", peak.value)));
        }
        let level = 0.5 * peak.value;
        let n = self.spec.points;
        let h = self.spec.spacing();
        let mut frac = 0.0;
        for iy in 0..n - 1 {
            for ix in 0..n - 1 {
                let (Some(a), Some(b), Some(c), Some(d)) =
                    (self.value(ix, iy), self.value(ix + 1, iy), self.value(ix + 1, iy + 1), self.value(ix, iy + 1))
                else {
                    continue;
                };
                frac += triangle_fraction(a - level, b - level, c - level);
                frac += triangle_fraction(a - level, c - level, d - level);
            }
        }
        let scaled_area = 0.5 * frac * h * h;
        let area = 4.0 * self.j() * scaled_area / hbar;
        Ok(HalfHeightArea { level, scaled_area, area, per_atom: area / (2.0 * self.j() + 1.0) })
    }

    pub fn negativity(&self) -> Negativity {
        let h = self.spec.spacing();
        let mut volume = 0.0;
        let mut count = 0usize;
        for (_, _, w) in self.cells() {
            if w < 0.0 {
                volume -= w;
                count += 1;
            }
        }
        Negativity {
            volume: volume * self.cell_measure(),
            min_value: self.min_value().unwrap_or(f64::NAN),
            area: count as f64 * h * h,
        }
    }

    /// Radius of the circle of maximal W, for states with no Q ≠ 0
    /// multipoles. The radial profile is scanned on the grid spacing and
    /// refined by golden section.
    pub fn ridge_radius(&self) -> Result<Ridge> {
        let off = self.decomposition.max_off_axis();
        if off > AZIMUTHAL_TOL {
            return Err(Error::NotAzimuthal(off));
        }
        let d = &self.decomposition;
        let profile = |r: f64| d.eval_plane(0.0, r).unwrap_or(f64::NEG_INFINITY);
        let rmax = self.spec.radius;
        let steps = self.spec.points;
        let mut best = (0.0, profile(0.0));
        for i in 1..=steps {
            let r = rmax * i as f64 / steps as f64;
            let v = profile(r);
            if v > best.1 {
                best = (r, v);
            }
        }
        let dr = rmax / steps as f64;
        let (mut a, mut b) = ((best.0 - dr).max(0.0), (best.0 + dr).min(rmax));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut c, mut e) = (b - g * (b - a), a + g * (b - a));
        let (mut fc, mut fe) = (profile(c), profile(e));
        while b - a > 1e-12 {
            if fc > fe {
                b = e;
                e = c;
                fe = fc;
                c = b - g * (b - a);
                fc = profile(c);
            } else {
                a = c;
                c = e;
                fc = fe;
                e = a + g * (b - a);
                fe = profile(e);
            }
        }
        let r = 0.5 * (a + b);
        let (radius, height) = if profile(r) >= best.1 { (r, profile(r)) } else { best };
        let ring: Vec<f64> = (0..720)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / 720.0;
                d.eval_plane(radius * t.sin(), radius * t.cos()).unwrap_or(f64::NAN)
            })
            .collect();
        let hi = ring.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = ring.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Ridge { radius, height, variation: hi - lo })
    }

    /// Cells at least as high as their eight neighbours, and strictly higher
    /// than the ones earlier in raster order (so an exact tie counts once),
    /// with W ≥ min_fraction·max W.
    pub fn local_maxima(&self, min_fraction: f64) -> Vec<Peak> {
        let n = self.spec.points;
        let floor = self.max().map_or(f64::INFINITY, |p| min_fraction * p.value);
        let mut out = Vec::new();
        for iy in 1..n - 1 {
            'cell: for ix in 1..n - 1 {
                let Some(v) = self.value(ix, iy) else { continue };
                if v < floor {
                    continue;
                }
                for (k, (dx, dy)) in
                    [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)].into_iter().enumerate()
                {
                    let nb = self.value((ix as i64 + dx) as usize, (iy as i64 + dy) as usize);
                    let earlier = k < 4;
                    if nb.is_none_or(|w| w > v || (earlier && w == v)) {
                        continue 'cell;
                    }
                }
                out.push(Peak { x: self.axis[ix], y: self.axis[iy], value: v });
            }
        }
        out
    }

    /// max |W(x, y) − W(x, −y)| over the grid.
    pub fn mirror_defect(&self) -> f64 {
        let n = self.spec.points;
        let mut d = 0.0f64;
        for iy in 0..n / 2 {
            for ix in 0..n {
                if let (Some(a), Some(b)) = (self.value(ix, iy), self.value(ix, n - 1 - iy)) {
                    d = d.max((a - b).abs());
                }
            }
        }
        d
    }
}

/// Fraction of a triangle where the linear interpolant of the vertex values
/// is ≥ 0.
fn triangle_fraction(d0: f64, d1: f64, d2: f64) -> f64 {
    let single = |p: f64, a: f64, b: f64| p * p / ((p - a) * (p - b));
    match (d0 >= 0.0, d1 >= 0.0, d2 >= 0.0) {
        (true, true, true) => 1.0,
        (false, false, false) => 0.0,
        (true, false, false) => single(d0, d1, d2),
        (false, true, false) => single(d1, d0, d2),
        (false, false, true) => single(d2, d0, d1),
        (false, true, true) => 1.0 - single(d0, d1, d2),
        (true, false, true) => 1.0 - single(d1, d0, d2),
        (true, true, false) => 1.0 - single(d2, d0, d1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_rho(tj: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
        let d = tj + 1;
        let a = DMatrix::from_fn(d, d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let m = &a * a.adjoint();
        let tr = m.trace();
        DensityMatrix::new(tj, m / tr).unwrap()
    }

    fn coherent(tj: usize, w: C64) -> DensityMatrix {
        // |w⟩ ∝ Σ_m √C(2J, J+m) w^{J+m} |m⟩
        let mut psi = Vec::with_capacity(tj + 1);
        let mut binom = 1.0f64;
        for k in 0..=tj {
            psi.push(w.powu(k as u32) * binom.sqrt());
            binom = binom * (tj - k) as f64 / (k + 1) as f64;
        }
        let n = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        psi.iter_mut().for_each(|c| *c /= n);
        DensityMatrix::pure(tj, &psi).unwrap()
    }

    #[test]
    fn legendre_low_orders() {
        let (x, s) = (0.3f64, (1.0 - 0.09f64).sqrt());
        let p = legendre_table(2, x, s);
        let f = |c: f64| c / (4.0 * PI).sqrt();
        assert!((p[idx(1, 0)] - f(3f64.sqrt() * x)).abs() < 1e-15);
        assert!((p[idx(1, 1)] + f((1.5f64).sqrt() * s)).abs() < 1e-15);
        assert!((p[idx(2, 0)] - f(5f64.sqrt() * 0.5 * (3.0 * x * x - 1.0))).abs() < 1e-15);
        assert!((p[idx(2, 1)] + f((7.5f64).sqrt() * x * s)).abs() < 1e-15);
        assert!((p[idx(2, 2)] - f((7.5f64).sqrt() * 0.5 * s * s)).abs() < 1e-15);
    }

    #[test]
    fn parseval_and_hermiticity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for i in 0..20 {
            let tj = 1 + i % 9;
            let rho = random_rho(tj, &mut rng);
            let d = multipole_decompose(&rho);
            let purity = (rho.entries() * rho.entries()).trace().re;
            assert!((d.norm_sq() - purity).abs() < 1e-10);
            assert!(d.hermiticity_defect() < 1e-12);
        }
    }

    #[test]
    fn maximally_mixed_is_scalar() {
        let d = multipole_decompose(&DensityMatrix::maximally_mixed(9));
        assert!((d.get(0, 0).re - 1.0 / 10f64.sqrt()).abs() < 1e-14);
        for k in 1..=9 {
            for q in -(k as i64)..=k as i64 {
                assert!(d.get(k, q).norm() < 1e-14);
            }
        }
        assert!((d.eval_plane(0.3, -0.4).unwrap() - 0.1).abs() < 1e-14);
    }

    #[test]
    fn diagonal_state_has_only_q_zero() {
        let mut m = DMatrix::<f64>::zeros(10, 10);
        m[(0, 0)] = 0.5;
        m[(1, 1)] = 0.5;
        let d = multipole_decompose(&DensityMatrix::from_real(9, &m).unwrap());
        assert!(d.max_off_axis() < 1e-15);
        assert!(d.get(3, 0).norm() > 1e-3);
    }

    #[test]
    fn sphere_quadrature_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for tj in [1, 5, 9, 21] {
            let rho = random_rho(tj, &mut rng);
            let d = multipole_decompose(&rho);
            let (w1, w2) = d.cap_moments(-1.0);
            assert!((w1 - 1.0).abs() < 1e-12);
            assert!((w2 - d.norm_sq()).abs() < 1e-12);
        }
    }

    #[test]
    fn south_pole_state_peaks_at_origin() {
        let mut psi = vec![C64::new(0.0, 0.0); 10];
        psi[0] = C64::new(1.0, 0.0);
        let d = multipole_decompose(&DensityMatrix::pure(9, &psi).unwrap());
        let g = evaluate_wigner_plane(&d, GridSpec { points: 101, radius: 0.999 }, Exec::Sequential).unwrap();
        let p = g.max().unwrap();
        assert!(p.x.abs() < 1e-12 && p.y.abs() < 1e-12);
        assert!(g.ridge_radius().unwrap().radius < 1e-9);
    }

    #[test]
    fn coherent_state_peaks_at_its_label() {
        // w = (y + i x)/√(1 − x² − y²) in scaled coordinates
        for (x, y) in [(0.3, 0.0), (0.0, 0.4), (-0.25, 0.35)] {
            let w = C64::new(y, x) / (1.0f64 - x * x - y * y).sqrt();
            let d = multipole_decompose(&coherent(7, w));
            let f = |u: f64, v: f64| d.eval_plane(u, v).unwrap();
            let c = f(x, y);
            for t in 0..16 {
                let a = t as f64 * PI / 8.0;
                assert!(f(x + 0.02 * a.cos(), y + 0.02 * a.sin()) < c);
            }
        }
    }

    #[test]
    fn grid_identities_for_coherent_state() {
        let d = multipole_decompose(&coherent(9, C64::new(0.2, -0.1)));
        let g = evaluate_wigner_plane(&d, GridSpec::default(), Exec::Parallel).unwrap();
        assert!((g.integral() - 1.0).abs() < 1e-6, "{}", g.integral());
        assert!((g.integral_sq() - 1.0).abs() < 1e-6, "{}", g.integral_sq());
        assert!(matches!(g.ridge_radius(), Err(Error::NotAzimuthal(_))));
    }

    #[test]
    fn policies_agree() {
        let d = multipole_decompose(&coherent(5, C64::new(0.5, 0.5)));
        let spec = GridSpec { points: 64, radius: 0.999 };
        let a = evaluate_wigner_plane(&d, spec, Exec::Sequential).unwrap();
        let b = evaluate_wigner_plane(&d, spec, Exec::Parallel).unwrap();
        let bits = |g: &WignerGrid| g.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn triangle_fractions() {
        assert_eq!(triangle_fraction(1.0, 1.0, 1.0), 1.0);
        assert_eq!(triangle_fraction(-1.0, -1.0, -1.0), 0.0);
        // level crosses each edge from the positive vertex at its midpoint
        assert!((triangle_fraction(1.0, -1.0, -1.0) - 0.25).abs() < 1e-15);
        assert!((triangle_fraction(-1.0, 1.0, 1.0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn rejects_points_off_the_disk() {
        assert!(plane_to_sphere(0.8, 0.6).is_err());
        assert!(GridSpec { points: 10, radius: 1.0 }.validate().is_err());
        assert!(GridSpec { points: 2, radius: 0.5 }.validate().is_err());
    }
}
