//! Reduced atomic state and linear entropy S = 1 − Tr ρ_A².

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hilbert::{CouplingMode, HilbertBasis, ModelParams};
use crate::spectra::{block_minima, converge_truncation, ground_state, pick_block_minimum, EigenResult};

pub type C64 = Complex<f64>;

/// Default probability cutoff for [`participation_count`].
pub const PARTICIPATION_THRESHOLD: f64 = 1e-6;

/// Spin-J density matrix in the |J, m⟩ basis, m ascending from −J.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    twice_j: usize,
    entries: DMatrix<C64>,
}

impl DensityMatrix {
    /// Checks hermiticity, unit trace and positivity to 1e−10.
    pub fn new(twice_j: usize, entries: DMatrix<C64>) -> Result<Self> {
        let d = twice_j + 1;
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: entries.nrows() });
        }
        let herm = (&entries - entries.adjoint()).norm();
        let trace = entries.trace();
        if herm > 1e-10 || (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
            return Err(Error::InvalidParameter {
                name: "rho",
                reason: format!("not a unit-trace hermitian matrix (|ρ−ρ†| = {herm:e}, tr = {trace})"),
            });
        }
        let min_eig = entries.clone().symmetric_eigenvalues().min();
        if min_eig < -1e-10 {
            return Err(Error::InvalidParameter { name: "rho", reason: format!("negative eigenvalue {min_eig:e}") });
        }
        Ok(DensityMatrix { twice_j, entries })
    }

    pub fn from_real(twice_j: usize, entries: &DMatrix<f64>) -> Result<Self> {
        Self::new(twice_j, entries.map(|x| C64::new(x, 0.0)))
    }

    /// |ψ⟩⟨ψ| for a spin state given over m = −J..=J.
    pub fn pure(twice_j: usize, psi: &[C64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        let n = v.norm();
        let v = v / C64::new(n, 0.0);
        Self::new(twice_j, &v * v.adjoint())
    }

    /// (2J+1)⁻¹ · 1
    pub fn maximally_mixed(twice_j: usize) -> Self {
        let d = twice_j + 1;
        DensityMatrix { twice_j, entries: DMatrix::identity(d, d) / C64::new(d as f64, 0.0) }
    }

    pub fn twice_j(&self) -> usize {
        self.twice_j
    }

    pub fn j(&self) -> f64 {
        self.twice_j as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.twice_j + 1
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    /// ⟨J, m_a| ρ |J, m_b⟩ with row/column index a = m + J.
    pub fn get(&self, a: usize, b: usize) -> C64 {
        self.entries[(a, b)]
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let d = self.dim();
        (0..d)
            .flat_map(|a| (0..d).filter(move |&b| b != a).map(move |b| (a, b)))
            .map(|(a, b)| self.entries[(a, b)].norm())
            .fold(0.0, f64::max)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|a| self.entries[(a, a)].re).collect()
    }
}

/// Partial trace over the boson: (ρ_A)_{m m′} = Σ_n c_{n,m} c_{n,m′}.
pub fn reduced_atomic_dm(state: &EigenResult, basis: &HilbertBasis) -> Result<DensityMatrix> {
    if state.vector.len() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), got: state.vector.len() });
    }
    let d = basis.spin_dim();
    let mut rho = DMatrix::<f64>::zeros(d, d);
    for chunk in state.vector.chunks_exact(d) {
        for a in 0..d {
            if chunk[a] == 0.0 {
                continue;
            }
            for b in 0..d {
                rho[(a, b)] += chunk[a] * chunk[b];
            }
        }
    }
    DensityMatrix::from_real(basis.twice_j(), &rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Purity {
    /// Tr ρ²
    pub purity: f64,
    /// 1 − Tr ρ²
    pub entropy: f64,
}

pub fn linear_entropy(rho: &DensityMatrix) -> Purity {
    // Tr ρ² = Σ |ρ_ab|² for hermitian ρ
    let purity: f64 = rho.entries.iter().map(|z| z.norm_sqr()).sum();
    Purity { purity, entropy: 1.0 - purity }
}

/// Number of basis states with |c|² > `threshold`.
pub fn participation_count(state: &EigenResult, threshold: f64) -> Result<usize> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidParameter {
            name: "threshold",
            reason: format!("must lie in (0, 1), got {threshold}"),
        });
    }
    Ok(state.vector.iter().filter(|&&c| c * c > threshold).count())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyScanRow {
    pub lambda: f64,
    pub lambda_plus: f64,
    pub energy: f64,
    /// Linear entropy of the reported ground state; at an exact level
    /// crossing, the lower-N_exc state (left limit).
    pub entropy: f64,
    /// Entropy of the competing state at an exact crossing (right limit);
    /// equal to `entropy` elsewhere.
    pub entropy_right: f64,
    pub participation: usize,
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Fixed truncation; chosen by [`converge_truncation`] at the grid
    /// maximum when `None`.
    pub n_max: Option<usize>,
    /// Energy tolerance handed to the truncation search.
    pub tol: f64,
    pub threshold: f64,
    pub exec: Exec,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { n_max: None, tol: 1e-10, threshold: PARTICIPATION_THRESHOLD, exec: Exec::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyScan {
    pub n_max: usize,
    pub rows: Vec<EntropyScanRow>,
}

fn scan_point(
    template: &ModelParams,
    mode: CouplingMode,
    lambda: f64,
    n_max: usize,
    threshold: f64,
) -> Result<EntropyScanRow> {
    let params = mode.at_lambda(template, lambda)?;
    let basis = crate::hilbert::build_basis(params.j, n_max)?;
    let entropy_of = |s: &EigenResult| -> Result<f64> { Ok(linear_entropy(&reduced_atomic_dm(s, &basis)?).entropy) };
    let (gs, entropy_right) = if params.is_integrable() {
        let (_, minima) = block_minima(&params, n_max)?;
        let (win, other) = pick_block_minimum(&minima, params.epsilon);
        let gs = EigenResult {
            energy: win.energy,
            vector: win.vector.clone(),
            block_label: crate::spectra::BlockLabel::Excitation(win.n_exc),
            degenerate: other.is_some(),
        };
        let right = match other {
            Some(o) => Some(entropy_of(&EigenResult { vector: o.vector.clone(), ..gs.clone() })?),
            None => None,
        };
        (gs, right)
    } else {
        let basis = std::sync::Arc::new(basis.clone());
        let h = crate::hilbert::assemble_hamiltonian(&params, &basis)?;
        (ground_state(&h)?, None)
    };
    let entropy = entropy_of(&gs)?;
    Ok(EntropyScanRow {
        lambda,
        lambda_plus: params.lambda_plus(),
        energy: gs.energy,
        entropy,
        entropy_right: entropy_right.unwrap_or(entropy),
        participation: participation_count(&gs, threshold)?,
        degenerate: gs.degenerate,
    })
}

/// Ground-state linear entropy along a strictly increasing λ = G/ε grid.
pub fn entropy_scan(
    template: &ModelParams,
    lambda_grid: &[f64],
    mode: CouplingMode,
    opts: &ScanOptions,
) -> Result<EntropyScan> {
    let last = *lambda_grid.last().ok_or(Error::Empty("lambda grid"))?;
    if lambda_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter { name: "lambda_grid", reason: "must be strictly increasing".into() });
    }
    let n_max = match opts.n_max {
        Some(n) => n,
        None => converge_truncation(template, mode, last, opts.tol)
            .map_err(|e| Error::AtLambda { lambda: last, source: Box::new(e) })?,
    };
    let rows = opts
        .exec
        .map(lambda_grid, |&l| {
            scan_point(template, mode, l, n_max, opts.threshold)
                .map_err(|e| Error::AtLambda { lambda: l, source: Box::new(e) })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(EntropyScan { n_max, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{build_basis, BasisState};
    use crate::spectra::{ground_state_blockwise, BlockLabel};

    fn state(vector: Vec<f64>) -> EigenResult {
        EigenResult { energy: 0.0, vector, block_label: BlockLabel::Parity(1), degenerate: false }
    }

    #[test]
    fn product_state_is_pure() {
        let b = build_basis(2.5, 3).unwrap();
        let mut v = vec![0.0; b.dim()];
        v[0] = 1.0;
        let rho = reduced_atomic_dm(&state(v), &b).unwrap();
        assert_eq!(rho.get(0, 0).re, 1.0);
        assert_eq!(linear_entropy(&rho).entropy, 0.0);
    }

    #[test]
    fn first_jump_state() {
        let j = 4.5;
        let b = build_basis(j, 5).unwrap();
        let mut v = vec![0.0; b.dim()];
        let r = std::f64::consts::FRAC_1_SQRT_2;
        v[b.index_of(BasisState { n: 1, twice_m: -9 }).unwrap()] = r;
        v[b.index_of(BasisState { n: 0, twice_m: -7 }).unwrap()] = r;
        let rho = reduced_atomic_dm(&state(v), &b).unwrap();
        assert!((rho.get(0, 0).re - 0.5).abs() < 1e-15);
        assert!((rho.get(1, 1).re - 0.5).abs() < 1e-15);
        assert_eq!(rho.max_off_diagonal(), 0.0);
        assert!((linear_entropy(&rho).entropy - 0.5).abs() < 1e-15);
    }

    #[test]
    fn entropy_bounds() {
        for tj in 1..8 {
            let s = linear_entropy(&DensityMatrix::maximally_mixed(tj)).entropy;
            assert!((s - (1.0 - 1.0 / (tj + 1) as f64)).abs() < 1e-14);
        }
        let psi: Vec<C64> = (0..4).map(|k| C64::new(k as f64, 1.0 - k as f64)).collect();
        assert!(linear_entropy(&DensityMatrix::pure(3, &psi).unwrap()).entropy.abs() < 1e-14);
    }

    #[test]
    fn dimension_mismatch() {
        let b = build_basis(1.5, 3).unwrap();
        assert!(matches!(reduced_atomic_dm(&state(vec![1.0; 3]), &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rejects_invalid_density_matrix() {
        let mut m = DMatrix::<f64>::identity(2, 2);
        assert!(DensityMatrix::from_real(1, &m).is_err());
        m[(0, 0)] = 1.5;
        m[(1, 1)] = -0.5;
        assert!(DensityMatrix::from_real(1, &m).is_err());
    }

    #[test]
    fn integrable_reduced_state_is_diagonal() {
        let p = ModelParams::resonant(1.5, 0.0, 4.5).unwrap();
        let gs = ground_state_blockwise(&p, 80).unwrap();
        let rho = reduced_atomic_dm(&gs, &build_basis(4.5, 80).unwrap()).unwrap();
        assert!(rho.max_off_diagonal() < 1e-14);
    }

    #[test]
    fn participation() {
        let p = ModelParams::resonant(0.5, 0.0, 4.5).unwrap();
        assert_eq!(participation_count(&ground_state_blockwise(&p, 20).unwrap(), 1e-6).unwrap(), 1);
        let p = ModelParams::resonant(1.001, 0.0, 4.5).unwrap();
        assert_eq!(participation_count(&ground_state_blockwise(&p, 20).unwrap(), 1e-6).unwrap(), 2);
        let v = vec![0.6, 0.8];
        assert!(participation_count(&state(v.clone()), 0.9).unwrap() <= 1);
        assert!(participation_count(&state(v), 1.0).is_err());
    }

    #[test]
    fn scan_small_grid() {
        let t = ModelParams::resonant(0.0, 0.0, 4.5).unwrap();
        let grid = [0.5, 0.9, 0.99, 1.001];
        let scan = entropy_scan(&t, &grid, CouplingMode::Integrable, &ScanOptions::default()).unwrap();
        for row in &scan.rows[..3] {
            assert_eq!(row.entropy, 0.0);
        }
        assert!((scan.rows[3].entropy - 0.5).abs() < 1e-6);
        let seq = entropy_scan(
            &t,
            &grid,
            CouplingMode::Integrable,
            &ScanOptions { exec: Exec::Sequential, ..ScanOptions::default() },
        )
        .unwrap();
        assert_eq!(seq, scan);
    }

    #[test]
    fn scan_reports_both_limits_at_crossing() {
        let t = ModelParams::resonant(0.0, 0.0, 1.5).unwrap();
        let opts = ScanOptions { n_max: Some(20), ..ScanOptions::default() };
        let scan = entropy_scan(&t, &[1.0], CouplingMode::Integrable, &opts).unwrap();
        let row = scan.rows[0];
        assert!(row.degenerate);
        assert_eq!(row.entropy, 0.0);
        assert!((row.entropy_right - 0.5).abs() < 1e-12);
    }

    #[test]
    fn scan_rejects_bad_grid() {
        let t = ModelParams::resonant(0.0, 0.0, 1.5).unwrap();
        let opts = ScanOptions { n_max: Some(5), ..ScanOptions::default() };
        assert!(entropy_scan(&t, &[], CouplingMode::Integrable, &opts).is_err());
        assert!(entropy_scan(&t, &[0.5, 0.5], CouplingMode::Integrable, &opts).is_err());
    }
}
