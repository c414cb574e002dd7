//! Ground states and low spectra.
//!
//! Every solve splits the matrix by the conserved parity (−1)^N_exc first;
//! the integrable case can go further and diagonalize each excitation block
//! on its own.

use std::sync::Arc;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::entanglement::{linear_entropy, reduced_atomic_dm};
use crate::error::{Error, Result};
use crate::hilbert::{assemble_hamiltonian, build_basis, CouplingMode, HamiltonianMatrix, HilbertBasis, ModelParams};
use crate::lanczos::{lowest_eigenpair, LanczosOptions};

/// Above this dimension the ground state is found by Lanczos.
pub const DENSE_LIMIT: usize = 4000;

/// Two block minima closer than `TIE_TOL · ε` are reported as degenerate.
pub const TIE_TOL: f64 = 1e-10;

/// Hard cap on the boson truncation searched by [`converge_truncation`].
pub const TRUNCATION_CAP: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockLabel {
    /// Excitation number N_exc (integrable case).
    Excitation(usize),
    /// (−1)^N_exc
    Parity(i8),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub energy: f64,
    /// Unit norm, over the full basis, first nonzero amplitude positive.
    pub vector: Vec<f64>,
    pub block_label: BlockLabel,
    /// Another block's minimum lies within the tie tolerance.
    pub degenerate: bool,
}

impl EigenResult {
    pub fn residual(&self, h: &HamiltonianMatrix) -> f64 {
        let mut hv = vec![0.0; h.dim()];
        h.matvec(&self.vector, &mut hv);
        hv.iter().zip(&self.vector).map(|(a, b)| (a - self.energy * b).powi(2)).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    /// Dense up to [`DENSE_LIMIT`], Lanczos above.
    #[default]
    Auto,
    Dense,
    Lanczos,
}

fn apply_sign_convention(v: &mut [f64]) {
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-10) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn embed(dim: usize, indices: &[usize], local: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    for (&i, &c) in indices.iter().zip(local) {
        v[i] = c;
    }
    v
}

/// Lowest eigenpair restricted to `indices`, as a local vector.
fn block_lowest(h: &HamiltonianMatrix, indices: &[usize], solver: Solver) -> Result<(f64, Vec<f64>)> {
    let dense = match solver {
        Solver::Auto => h.dim() <= DENSE_LIMIT,
        Solver::Dense => true,
        Solver::Lanczos => false,
    };
    if dense || indices.len() <= 2 {
        let eig = SymmetricEigen::new(h.submatrix(indices));
        let (k, e) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or(Error::Empty("empty block"))?;
        return Ok((e, eig.eigenvectors.column(k).iter().copied().collect()));
    }
    let mut local = vec![usize::MAX; h.dim()];
    for (a, &i) in indices.iter().enumerate() {
        local[i] = a;
    }
    let apply = |x: &[f64], y: &mut [f64]| {
        for (a, &i) in indices.iter().enumerate() {
            y[a] = h
                .row(i)
                .iter()
                .filter_map(|&(k, v)| {
                    let b = local[k];
                    (b != usize::MAX).then(|| v * x[b])
                })
                .sum();
        }
    };
    let opts = LanczosOptions { tol: 1e-11 * h.norm_inf().max(1.0), ..LanczosOptions::default() };
    let (e, v, _) = lowest_eigenpair(indices.len(), apply, &opts)?;
    Ok((e, v))
}

pub fn ground_state(h: &HamiltonianMatrix) -> Result<EigenResult> {
    ground_state_with(h, Solver::Auto)
}

/// Ground state with an explicit choice of eigensolver.
pub fn ground_state_with(h: &HamiltonianMatrix, solver: Solver) -> Result<EigenResult> {
    let blocks = h.basis().parity_blocks();
    let tie = TIE_TOL * h.params().epsilon;
    let mut best: Option<(f64, i8, Vec<f64>)> = None;
    let mut degenerate = false;
    for parity in [1i8, -1] {
        let idx = blocks.get(parity);
        if idx.is_empty() {
            continue;
        }
        let (e, v) = block_lowest(h, idx, solver)?;
        match &best {
            Some((eb, _, _)) if (e - eb).abs() < tie => degenerate = true,
            Some((eb, _, _)) if e > *eb => {}
            _ => best = Some((e, parity, embed(h.dim(), idx, &v))),
        }
    }
    let (energy, parity, mut vector) = best.ok_or(Error::Empty("empty basis"))?;
    apply_sign_convention(&mut vector);
    Ok(EigenResult { energy, vector, block_label: BlockLabel::Parity(parity), degenerate })
}

/// Lowest state of one excitation block of the integrable Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMinimum {
    pub n_exc: usize,
    pub energy: f64,
    /// Full-basis vector with the sign convention applied.
    pub vector: Vec<f64>,
}

/// The integrable Hamiltonian together with the minimum of every excitation
/// block, ascending in N_exc.
pub fn block_minima(params: &ModelParams, n_max: usize) -> Result<(HamiltonianMatrix, Vec<BlockMinimum>)> {
    if !params.is_integrable() {
        return Err(Error::NotIntegrable(params.g_prime));
    }
    let basis = Arc::new(build_basis(params.j, n_max)?);
    let h = assemble_hamiltonian(params, &basis)?;
    let mut out = Vec::new();
    for block in basis.excitation_blocks() {
        let (energy, local) = block_lowest(&h, &block.indices, Solver::Dense)?;
        let mut vector = embed(h.dim(), &block.indices, &local);
        apply_sign_convention(&mut vector);
        out.push(BlockMinimum { n_exc: block.n_exc, energy, vector });
    }
    Ok((h, out))
}

/// Splits block minima into the winner (lowest N_exc among ties) and the
/// highest-N_exc tied competitor, if any.
pub(crate) fn pick_block_minimum(minima: &[BlockMinimum], epsilon: f64) -> (&BlockMinimum, Option<&BlockMinimum>) {
    let tie = TIE_TOL * epsilon;
    let lowest = minima.iter().map(|b| b.energy).fold(f64::INFINITY, f64::min);
    let tied: Vec<&BlockMinimum> = minima.iter().filter(|b| b.energy - lowest < tie).collect();
    let first = tied[0];
    let last = *tied.last().unwrap();
    (first, (tied.len() > 1).then_some(last))
}

/// Integrable ground state by independent diagonalization of each
/// excitation block. At an exact level crossing the lower-N_exc block wins
/// and `degenerate` is set.
pub fn ground_state_blockwise(params: &ModelParams, n_max: usize) -> Result<EigenResult> {
    let (_, minima) = block_minima(params, n_max)?;
    let (win, other) = pick_block_minimum(&minima, params.epsilon);
    Ok(EigenResult {
        energy: win.energy,
        vector: win.vector.clone(),
        block_label: BlockLabel::Excitation(win.n_exc),
        degenerate: other.is_some(),
    })
}

/// Ground state for arbitrary couplings: blockwise when G′ = 0, parity
/// split otherwise.
pub fn solve_ground_state(params: &ModelParams, n_max: usize) -> Result<(Arc<HilbertBasis>, EigenResult)> {
    if params.is_integrable() {
        let gs = ground_state_blockwise(params, n_max)?;
        Ok((Arc::new(build_basis(params.j, n_max)?), gs))
    } else {
        let basis = Arc::new(build_basis(params.j, n_max)?);
        let h = assemble_hamiltonian(params, &basis)?;
        Ok((basis, ground_state(&h)?))
    }
}

/// Smallest n_max (multiple of 10) at which both the ground energy and the
/// atomic linear entropy at λ_max are stable against adding ten more boson
/// levels.
pub fn converge_truncation(template: &ModelParams, mode: CouplingMode, lambda_max: f64, tol: f64) -> Result<usize> {
    converge_truncation_capped(template, mode, lambda_max, tol, TRUNCATION_CAP)
}

pub fn converge_truncation_capped(
    template: &ModelParams,
    mode: CouplingMode,
    lambda_max: f64,
    tol: f64,
    cap: usize,
) -> Result<usize> {
    let params = mode.at_lambda(template, lambda_max)?;
    converge_at(&params, tol, cap).map(|c| c.n_max)
}

/// Ground state at a converged truncation.
#[derive(Debug, Clone)]
pub struct ConvergedGroundState {
    pub n_max: usize,
    pub basis: Arc<HilbertBasis>,
    pub state: EigenResult,
}

/// [`converge_truncation`] for one fixed parameter set, keeping the state.
pub fn converge_at(params: &ModelParams, tol: f64, cap: usize) -> Result<ConvergedGroundState> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter { name: "tol", reason: format!("must be > 0, got {tol}") });
    }
    let eval = |n_max: usize| -> Result<(f64, f64, Arc<HilbertBasis>, EigenResult)> {
        let (basis, gs) = solve_ground_state(params, n_max)?;
        let s = linear_entropy(&reduced_atomic_dm(&gs, &basis)?).entropy;
        Ok((gs.energy, s, basis, gs))
    };
    let mut n = 0;
    let mut prev = eval(n)?;
    let mut delta = f64::INFINITY;
    while n + 10 <= cap {
        let next = eval(n + 10)?;
        delta = (prev.0 - next.0).abs();
        if delta < tol && (prev.1 - next.1).abs() < 10.0 * tol {
            return Ok(ConvergedGroundState { n_max: n, basis: prev.2, state: prev.3 });
        }
        n += 10;
        prev = next;
    }
    Err(Error::TruncationNotConverged { cap, delta })
}

/// The `k` lowest eigenvalues, ascending, from dense diagonalization of
/// both parity blocks.
pub fn low_spectrum(h: &HamiltonianMatrix, k: usize) -> Result<Vec<f64>> {
    if k == 0 || k > h.dim() {
        return Err(Error::InvalidParameter { name: "k", reason: format!("need 1 <= k <= {}, got {k}", h.dim()) });
    }
    let blocks = h.basis().parity_blocks();
    let mut all = Vec::with_capacity(h.dim());
    for idx in [&blocks.even, &blocks.odd] {
        if !idx.is_empty() {
            all.extend(SymmetricEigen::new(h.submatrix(idx)).eigenvalues.iter().copied());
        }
    }
    all.sort_by(f64::total_cmp);
    all.truncate(k);
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::BasisState;

    fn setup(g: f64, gp: f64, j: f64, n_max: usize) -> HamiltonianMatrix {
        let p = ModelParams::resonant(g, gp, j).unwrap();
        assemble_hamiltonian(&p, &Arc::new(build_basis(j, n_max).unwrap())).unwrap()
    }

    #[test]
    fn uncoupled_ground_state() {
        for &j in &[0.5, 2.0, 4.5] {
            let h = setup(0.0, 0.0, j, 5);
            let gs = ground_state(&h).unwrap();
            assert!((gs.energy + j).abs() < 1e-12);
            let i0 = h.basis().index_of(BasisState { n: 0, twice_m: -(2.0 * j) as i32 }).unwrap();
            assert!((gs.vector[i0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn first_excitation_block_oracle() {
        // 2x2 block {|1,−J⟩, |0,−J+1⟩}: diag 1−J, off-diagonal G
        let (j, g) = (4.5, 1.05);
        let oracle: f64 = {
            let (a, b): (f64, f64) = (1.0 - j, g);
            a - b
        };
        assert!((oracle + 4.55).abs() < 1e-12);
        let h = setup(g, 0.0, j, 40);
        let full = ground_state(&h).unwrap();
        let blk = ground_state_blockwise(h.params(), 40).unwrap();
        assert!((full.energy - oracle).abs() < 1e-10);
        assert!((blk.energy - oracle).abs() < 1e-12);
        assert_eq!(blk.block_label, BlockLabel::Excitation(1));
        let b = h.basis();
        let i = b.index_of(BasisState { n: 0, twice_m: -7 }).unwrap();
        let k = b.index_of(BasisState { n: 1, twice_m: -9 }).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((blk.vector[i] - r).abs() < 1e-12 && (blk.vector[k] + r).abs() < 1e-12);
    }

    #[test]
    fn below_threshold_isolated_state() {
        let p = ModelParams::resonant(0.7, 0.0, 4.5).unwrap();
        let gs = ground_state_blockwise(&p, 20).unwrap();
        assert_eq!(gs.block_label, BlockLabel::Excitation(0));
        assert_eq!(gs.vector[0], 1.0);
        assert!(gs.vector[1..].iter().all(|&x| x == 0.0));
        assert!(!gs.degenerate);
    }

    #[test]
    fn exact_crossing_is_flagged() {
        let p = ModelParams::resonant(1.0, 0.0, 4.5).unwrap();
        let gs = ground_state_blockwise(&p, 20).unwrap();
        assert!(gs.degenerate);
        assert_eq!(gs.block_label, BlockLabel::Excitation(0));
        assert!((gs.energy + 4.5).abs() < 1e-12);
    }

    #[test]
    fn blockwise_rejects_counter_rotating() {
        let p = ModelParams::resonant(1.0, 0.1, 4.5).unwrap();
        assert_eq!(ground_state_blockwise(&p, 10), Err(Error::NotIntegrable(0.1)));
    }

    #[test]
    fn full_and_blockwise_agree() {
        for &g in &[0.3, 1.2, 1.9, 3.0] {
            let h = setup(g, 0.0, 2.5, 60);
            let full = ground_state(&h).unwrap();
            let blk = ground_state_blockwise(h.params(), 60).unwrap();
            assert!((full.energy - blk.energy).abs() < 1e-10);
            for (a, b) in full.vector.iter().zip(&blk.vector) {
                assert!((a.abs() - b.abs()).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn residual_and_norm() {
        let h = setup(0.8, 0.8, 3.5, 40);
        let gs = ground_state(&h).unwrap();
        let norm: f64 = gs.vector.iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(gs.residual(&h) <= 1e-9 * h.norm_inf());
        assert!(gs.vector.iter().find(|x| x.abs() > 1e-10).unwrap() > &0.0);
    }

    #[test]
    fn lanczos_path_matches_dense() {
        let h = setup(0.9, 0.9, 4.5, 50);
        let d = ground_state_with(&h, Solver::Dense).unwrap();
        let l = ground_state_with(&h, Solver::Lanczos).unwrap();
        assert!((d.energy - l.energy).abs() < 1e-10);
        assert!(l.residual(&h) <= 1e-9 * h.norm_inf());
        let overlap: f64 = d.vector.iter().zip(&l.vector).map(|(a, b)| a * b).sum();
        assert!((overlap - 1.0).abs() < 1e-8);
    }

    #[test]
    fn low_spectrum_cases() {
        let h = setup(0.0, 0.0, 1.5, 3);
        let lo = low_spectrum(&h, 3).unwrap();
        assert!((lo[0] + 1.5).abs() < 1e-12);
        assert!((lo[1] + 0.5).abs() < 1e-12 && (lo[2] + 0.5).abs() < 1e-12);

        let h = setup(1.4, 0.6, 1.5, 6);
        let all = low_spectrum(&h, h.dim()).unwrap();
        assert!((all.iter().sum::<f64>() - h.trace()).abs() < 1e-9);
        assert!(all.windows(2).all(|w| w[0] <= w[1]));
        assert!(low_spectrum(&h, 0).is_err());
        assert!(low_spectrum(&h, h.dim() + 1).is_err());
    }

    #[test]
    fn low_spectrum_matches_block_union() {
        let (j, n_max) = (1.5, 12);
        let h = setup(1.3, 0.0, j, n_max);
        let mut union = Vec::new();
        for blk in h.basis().excitation_blocks() {
            union.extend(SymmetricEigen::new(h.submatrix(&blk.indices)).eigenvalues.iter().copied());
        }
        union.sort_by(f64::total_cmp);
        let full = low_spectrum(&h, h.dim()).unwrap();
        for (a, b) in union.iter().zip(&full) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn level_crossing_slopes() {
        // block minima 0 and 1 cross linearly at G = ε, slope difference 1
        let e = |g: f64, n: usize| {
            let p = ModelParams::resonant(g, 0.0, 4.5).unwrap();
            block_minima(&p, 20).unwrap().1[n].energy
        };
        let d = 1e-3;
        let slope0 = (e(1.0 + d, 0) - e(1.0 - d, 0)) / (2.0 * d);
        let slope1 = (e(1.0 + d, 1) - e(1.0 - d, 1)) / (2.0 * d);
        assert!((slope0 - slope1 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn variational_in_truncation() {
        let p = ModelParams::resonant(0.7, 0.7, 2.5).unwrap();
        let mut last = f64::INFINITY;
        for n_max in [2, 5, 10, 20, 30] {
            let (_, gs) = solve_ground_state(&p, n_max).unwrap();
            assert!(gs.energy <= last + 1e-12);
            last = gs.energy;
        }
    }

    #[test]
    fn truncation_search() {
        let t = ModelParams::resonant(0.0, 0.0, 4.5).unwrap();
        assert_eq!(converge_truncation(&t, CouplingMode::Integrable, 0.0, 1e-10).unwrap(), 0);
        let a = converge_truncation(&t, CouplingMode::Integrable, 1.5, 1e-10).unwrap();
        let b = converge_truncation(&t, CouplingMode::Integrable, 3.0, 1e-10).unwrap();
        assert!(a > 0 && b >= a);
        let s1 = converge_truncation(&t, CouplingMode::Symmetric, 0.4, 1e-10).unwrap();
        let s2 = converge_truncation(&t, CouplingMode::Symmetric, 0.8, 1e-10).unwrap();
        assert!(s2 >= s1);
        assert!(converge_truncation_capped(&t, CouplingMode::Integrable, 3.0, 1e-10, 20).is_err());
        assert!(converge_truncation(&t, CouplingMode::Integrable, 1.0, 0.0).is_err());
    }
}
