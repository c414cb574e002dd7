use std::sync::Arc;

use approx::assert_abs_diff_eq;
use dicke_core::classical::{classical_energy, PhasePoint};
use dicke_core::entanglement::{linear_entropy, reduced_atomic_dm};
use dicke_core::hilbert::{assemble_hamiltonian, build_basis};
use dicke_core::spectra::{converge_at, ground_state_with, solve_ground_state, Solver, TRUNCATION_CAP};
use dicke_core::wigner::{evaluate_wigner_plane, multipole_decompose, GridSpec};
use dicke_core::{Exec, ModelParams};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = (ModelParams, usize)> {
    (0usize..8, 0.0..2.5f64, 0.0..2.5f64, any::<bool>(), 1usize..12).prop_map(|(tj, g, gp, integrable, n_max)| {
        let j = tj as f64 + 0.5;
        let gp = if integrable { 0.0 } else { gp };
        (ModelParams::resonant(g, gp, j).unwrap(), n_max)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hamiltonian_is_symmetric_and_respects_symmetries((p, n_max) in params()) {
        let basis = Arc::new(build_basis(p.j, n_max).unwrap());
        let h = assemble_hamiltonian(&p, &basis).unwrap();
        let tj = basis.twice_j();
        for (i, k, v) in h.nonzeros() {
            prop_assert_eq!(h.get(k, i), v);
            let (a, b) = (basis.state(i), basis.state(k));
            prop_assert_eq!(a.parity(tj), b.parity(tj));
            if p.is_integrable() {
                prop_assert_eq!(a.excitation(tj), b.excitation(tj));
            }
        }
    }

    #[test]
    fn entropy_is_bounded((p, n_max) in params()) {
        let (basis, gs) = solve_ground_state(&p, n_max).unwrap();
        let s = linear_entropy(&reduced_atomic_dm(&gs, &basis).unwrap()).entropy;
        prop_assert!(s >= -1e-12);
        prop_assert!(s <= 1.0 - 1.0 / (2.0 * p.j + 1.0) + 1e-12);
    }
}

#[test]
fn lanczos_matches_dense() {
    for (g, gp, j, n_max) in [(0.4, 0.1, 2.5, 20), (1.3, 0.9, 4.5, 25), (2.0, 0.0, 3.5, 30)] {
        let p = ModelParams::resonant(g, gp, j).unwrap();
        let basis = Arc::new(build_basis(j, n_max).unwrap());
        let h = assemble_hamiltonian(&p, &basis).unwrap();
        let dense = ground_state_with(&h, Solver::Dense).unwrap();
        let lanczos = ground_state_with(&h, Solver::Lanczos).unwrap();
        assert_abs_diff_eq!(dense.energy, lanczos.energy, epsilon = 1e-9);
        let overlap: f64 = dense.vector.iter().zip(&lanczos.vector).map(|(a, b)| a * b).sum();
        assert_abs_diff_eq!(overlap.abs(), 1.0, epsilon = 1e-8);
        assert!(lanczos.residual(&h) < 1e-8);
    }
}

#[test]
fn classical_energy_is_rotation_invariant_when_integrable() {
    let p = ModelParams::resonant(1.3, 0.0, 4.5).unwrap();
    for k in 0..10 {
        let t = k as f64;
        let pt = PhasePoint::new(0.3 * t.sin(), 2.0 * (0.7 * t).cos(), 1.5 * (1.3 * t).sin(), -t / 5.0);
        let e = classical_energy(&pt, &p).unwrap();
        for a in 0..10 {
            let r = classical_energy(&pt.rotated(0.61 * a as f64), &p).unwrap();
            assert_abs_diff_eq!(e, r, epsilon = 1e-12);
        }
    }
}

#[test]
fn quantum_ground_energy_lies_below_mean_field() {
    let p = ModelParams::resonant(1.5, 0.0, 4.5).unwrap();
    let gs = converge_at(&p, 1e-10, TRUNCATION_CAP).unwrap();
    assert!(gs.state.energy <= -6.0625, "E0 = {}", gs.state.energy);
}

#[test]
fn ground_state_wigner_is_normalized() {
    let p = ModelParams::resonant(0.75, 0.75, 4.5).unwrap();
    let gs = converge_at(&p, 1e-10, TRUNCATION_CAP).unwrap();
    let rho = reduced_atomic_dm(&gs.state, &gs.basis).unwrap();
    let purity = linear_entropy(&rho).purity;
    let grid = evaluate_wigner_plane(
        &multipole_decompose(&rho),
        GridSpec { points: 256, ..GridSpec::default() },
        Exec::Parallel,
    )
    .unwrap();
    assert_abs_diff_eq!(grid.integral(), 1.0, epsilon = 1e-5);
    assert_abs_diff_eq!(grid.integral_sq(), purity, epsilon = 1e-5);
}
