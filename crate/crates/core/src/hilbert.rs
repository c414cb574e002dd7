//! Truncated boson ⊗ collective-spin basis and the Dicke Hamiltonian
//!
//! H = ħω a†a + ħε J_z + G/√(2J) (a J₊ + a† J₋) + G′/√(2J) (a† J₊ + a J₋)
//!
//! in the product basis |n, m⟩, n = 0..=n_max, m = −J..=J.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants of one Dicke Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub omega: f64,
    pub epsilon: f64,
    pub g: f64,
    pub g_prime: f64,
    pub j: f64,
    pub hbar: f64,
}

impl ModelParams {
    pub fn new(omega: f64, epsilon: f64, g: f64, g_prime: f64, j: f64) -> Result<Self> {
        let p = ModelParams { omega, epsilon, g, g_prime, j, hbar: 1.0 };
        p.validate()?;
        Ok(p)
    }

    /// ω = ε = ħ = 1.
    pub fn resonant(g: f64, g_prime: f64, j: f64) -> Result<Self> {
        Self::new(1.0, 1.0, g, g_prime, j)
    }

    pub fn with_hbar(mut self, hbar: f64) -> Result<Self> {
        self.hbar = hbar;
        self.validate()?;
        Ok(self)
    }

    pub fn with_couplings(mut self, g: f64, g_prime: f64) -> Result<Self> {
        self.g = g;
        self.g_prime = g_prime;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, reason: format!("must be > 0, got {v}") })
            }
        };
        let non_negative = |name, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, reason: format!("must be >= 0, got {v}") })
            }
        };
        positive("omega", self.omega)?;
        positive("epsilon", self.epsilon)?;
        positive("hbar", self.hbar)?;
        non_negative("g", self.g)?;
        non_negative("g_prime", self.g_prime)?;
        twice_spin(self.j)?;
        Ok(())
    }

    /// 2J as an integer.
    pub fn twice_j(&self) -> usize {
        (2.0 * self.j).round() as usize
    }

    /// Number of atoms N = 2J.
    pub fn n_atoms(&self) -> usize {
        self.twice_j()
    }

    pub fn g_plus(&self) -> f64 {
        self.g + self.g_prime
    }

    pub fn g_minus(&self) -> f64 {
        self.g - self.g_prime
    }

    /// λ = G/ε.
    pub fn lambda(&self) -> f64 {
        self.g / self.epsilon
    }

    pub fn lambda_plus(&self) -> f64 {
        self.g_plus() / self.epsilon
    }

    pub fn lambda_minus(&self) -> f64 {
        self.g_minus() / self.epsilon
    }

    pub fn is_integrable(&self) -> bool {
        self.g_prime == 0.0
    }
}

/// Validates a spin value and returns 2J.
pub fn twice_spin(j: f64) -> Result<usize> {
    let t = 2.0 * j;
    if !j.is_finite() || j <= 0.0 || (t - t.round()).abs() > 1e-9 {
        return Err(Error::InvalidParameter {
            name: "j",
            reason: format!("2J must be a positive integer, got J = {j}"),
        });
    }
    Ok(t.round() as usize)
}

/// How the two couplings follow a scanned λ = G/ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingMode {
    /// G′ = 0.
    Integrable,
    /// G′ = G, the usual Dicke Hamiltonian.
    Symmetric,
    /// G′ = ratio · G.
    Custom { ratio: f64 },
}

impl CouplingMode {
    pub fn ratio(&self) -> f64 {
        match *self {
            CouplingMode::Integrable => 0.0,
            CouplingMode::Symmetric => 1.0,
            CouplingMode::Custom { ratio } => ratio,
        }
    }

    /// Parameters at coupling λ = G/ε, everything else taken from `template`.
    pub fn at_lambda(&self, template: &ModelParams, lambda: f64) -> Result<ModelParams> {
        let g = lambda * template.epsilon;
        template.with_couplings(g, self.ratio() * g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState {
    pub n: usize,
    /// 2m, so half-integer spins stay exact.
    pub twice_m: i32,
}

impl BasisState {
    pub fn m(&self) -> f64 {
        self.twice_m as f64 / 2.0
    }

    /// N_exc = n + m + J.
    pub fn excitation(&self, twice_j: usize) -> usize {
        self.n + ((self.twice_m + twice_j as i32) / 2) as usize
    }

    /// (−1)^N_exc.
    pub fn parity(&self, twice_j: usize) -> i8 {
        if self.excitation(twice_j).is_multiple_of(2) {
            1
        } else {
            -1
        }
    }
}

/// Product basis ordered lexicographically in (n, m): position
/// `n·(2J+1) + (m+J)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HilbertBasis {
    twice_j: usize,
    n_max: usize,
    states: Vec<BasisState>,
}

pub fn build_basis(j: f64, n_max: usize) -> Result<HilbertBasis> {
    let twice_j = twice_spin(j)?;
    let states = (0..=n_max)
        .flat_map(|n| (0..=twice_j).map(move |k| BasisState { n, twice_m: 2 * k as i32 - twice_j as i32 }))
        .collect();
    Ok(HilbertBasis { twice_j, n_max, states })
}

impl HilbertBasis {
    pub fn j(&self) -> f64 {
        self.twice_j as f64 / 2.0
    }

    pub fn twice_j(&self) -> usize {
        self.twice_j
    }

    /// 2J + 1.
    pub fn spin_dim(&self) -> usize {
        self.twice_j + 1
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> BasisState {
        self.states[i]
    }

    pub fn index_of(&self, s: BasisState) -> Option<usize> {
        let k = s.twice_m + self.twice_j as i32;
        if s.n > self.n_max || k < 0 || k > 2 * self.twice_j as i32 || k % 2 != 0 {
            return None;
        }
        Some(s.n * self.spin_dim() + (k / 2) as usize)
    }

    pub fn excitation(&self, i: usize) -> usize {
        self.states[i].excitation(self.twice_j)
    }

    /// Partition by excitation number, ascending in N_exc; indices within a
    /// block are in basis order.
    pub fn excitation_blocks(&self) -> Vec<ExcitationBlock> {
        let n_blocks = self.n_max + self.twice_j + 1;
        let mut blocks: Vec<ExcitationBlock> =
            (0..n_blocks).map(|n_exc| ExcitationBlock { n_exc, indices: Vec::new() }).collect();
        for i in 0..self.dim() {
            blocks[self.excitation(i)].indices.push(i);
        }
        blocks
    }

    pub fn parity_blocks(&self) -> ParityBlocks {
        let (even, odd) = (0..self.dim()).partition(|&i| self.excitation(i).is_multiple_of(2));
        ParityBlocks { even, odd }
    }
}

pub fn excitation_blocks(basis: &HilbertBasis) -> Vec<ExcitationBlock> {
    basis.excitation_blocks()
}

pub fn parity_blocks(basis: &HilbertBasis) -> ParityBlocks {
    basis.parity_blocks()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExcitationBlock {
    pub n_exc: usize,
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityBlocks {
    /// (−1)^N_exc = +1
    pub even: Vec<usize>,
    /// (−1)^N_exc = −1
    pub odd: Vec<usize>,
}

impl ParityBlocks {
    pub fn get(&self, parity: i8) -> &[usize] {
        if parity >= 0 {
            &self.even
        } else {
            &self.odd
        }
    }
}

/// Real symmetric sparse matrix, one sorted row of `(column, value)` per
/// basis state.
#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    params: ModelParams,
    basis: Arc<HilbertBasis>,
    rows: Vec<Vec<(usize, f64)>>,
}

/// √((J−m)(J+m+1)) from doubled quantum numbers.
fn raise_factor(twice_j: usize, twice_m: i32) -> f64 {
    let a = (twice_j as i32 - twice_m) as f64;
    let b = (twice_j as i32 + twice_m + 2) as f64;
    (a * b).sqrt() / 2.0
}

pub fn assemble_hamiltonian(params: &ModelParams, basis: &Arc<HilbertBasis>) -> Result<HamiltonianMatrix> {
    params.validate()?;
    if params.twice_j() != basis.twice_j() {
        return Err(Error::InvalidParameter {
            name: "j",
            reason: format!("basis built for J = {}, params have J = {}", basis.j(), params.j),
        });
    }
    let dim = basis.dim();
    let hbar = params.hbar;
    let scale = 1.0 / (2.0 * params.j).sqrt();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::with_capacity(5); dim];
    let mut couplings: Vec<(usize, usize, f64)> = Vec::with_capacity(2 * dim);
    for (i, s) in basis.states().iter().enumerate() {
        let diag = hbar * (params.omega * s.n as f64 + params.epsilon * s.m());
        if diag != 0.0 {
            rows[i].push((i, diag));
        }
        if s.twice_m >= basis.twice_j() as i32 {
            continue;
        }
        let spin = raise_factor(basis.twice_j(), s.twice_m);
        // a J₊ : |n,m⟩ → |n−1,m+1⟩
        if s.n > 0 {
            let k = basis.index_of(BasisState { n: s.n - 1, twice_m: s.twice_m + 2 }).unwrap();
            couplings.push((i, k, hbar * params.g * scale * (s.n as f64).sqrt() * spin));
        }
        // a† J₊ : |n,m⟩ → |n+1,m+1⟩
        if s.n < basis.n_max() {
            let k = basis.index_of(BasisState { n: s.n + 1, twice_m: s.twice_m + 2 }).unwrap();
            couplings.push((i, k, hbar * params.g_prime * scale * ((s.n + 1) as f64).sqrt() * spin));
        }
    }
    for (i, k, v) in couplings.into_iter().filter(|c| c.2 != 0.0) {
        rows[i].push((k, v));
        rows[k].push((i, v));
    }
    for row in &mut rows {
        row.sort_by_key(|&(k, _)| k);
    }
    Ok(HamiltonianMatrix { params: *params, basis: Arc::clone(basis), rows })
}

impl HamiltonianMatrix {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn basis(&self) -> &Arc<HilbertBasis> {
        &self.basis
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.rows[i].binary_search_by_key(&k, |&(c, _)| c).map(|p| self.rows[i][p].1).unwrap_or(0.0)
    }

    /// All stored `(row, column, value)` triplets.
    pub fn nonzeros(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows.iter().enumerate().flat_map(|(i, r)| r.iter().map(move |&(k, v)| (i, k, v)))
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (yi, row) in y.iter_mut().zip(&self.rows) {
            *yi = row.iter().map(|&(k, v)| v * x[k]).sum();
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// Max absolute row sum, an upper bound on the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        self.rows.iter().map(|r| r.iter().map(|&(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.submatrix(&(0..self.dim()).collect::<Vec<_>>())
    }

    /// Dense restriction to the given (sorted) basis indices.
    pub fn submatrix(&self, indices: &[usize]) -> DMatrix<f64> {
        let mut local = vec![usize::MAX; self.dim()];
        for (a, &i) in indices.iter().enumerate() {
            local[i] = a;
        }
        let mut m = DMatrix::zeros(indices.len(), indices.len());
        for (a, &i) in indices.iter().enumerate() {
            for &(k, v) in &self.rows[i] {
                let b = local[k];
                if b != usize::MAX {
                    m[(a, b)] = v;
                }
            }
        }
        m
    }
}
