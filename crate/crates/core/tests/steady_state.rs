mod common;

use common::*;
use mscheme::cli::parse_config;
use mscheme::cli::presets::all_presets;
use mscheme::lindblad::{vec_index, DensityMatrix};
use mscheme::solver::{evolve, generator, steady_state, steady_state_replacing_row, HALVING_TOLERANCE};
use mscheme::sweep::run_sweep;
use proptest::prelude::*;

#[test]
fn matches_reference_on_baseline_grid() {
    for d3 in [-40.0, -20.0, -5.0, 0.0, 0.5, 5.0, 20.0, 40.0] {
        for p in [baseline(d3), mirror(d3)] {
            let ours = steady_state(&generator(&p).unwrap()).unwrap();
            let reference = reference_steady_state(&p);
            let d = max_abs_diff(ours.state.matrix(), &reference.rho);
            assert!(d < 1e-9, "δ3={d3}: {d:e}");
            assert!((ours.gap - reference.gap).abs() < 1e-9);
        }
    }
}

#[test]
fn replaced_row_does_not_matter() {
    let l = generator(&baseline(20.0)).unwrap();
    let a = steady_state(&l).unwrap();
    let b = steady_state_replacing_row(&l, vec_index(lv(3), lv(3))).unwrap();
    assert!(max_abs_diff(a.state.matrix(), b.state.matrix()) < 1e-10);
}

#[test]
fn every_preset_sweep_point_is_a_valid_state() {
    for preset in all_presets() {
        let spec = parse_config(&format!(r#"{{"preset": "{}"}}"#, preset.name)).unwrap();
        let table = run_sweep(&spec.params, spec.axis.as_ref().unwrap(), spec.channel).unwrap();
        for row in &table.rows {
            let p = spec
                .axis
                .as_ref()
                .unwrap()
                .parameter
                .apply(&spec.params, row.axis_value);
            let ss = steady_state(&generator(&p).unwrap()).unwrap();
            assert!(
                ss.residual < 1e-10,
                "{} at {}: residual {:e}",
                preset.name,
                row.axis_value,
                ss.residual
            );
            let min_eig = ss.state.matrix().symmetric_eigenvalues().min();
            assert!(
                min_eig > -1e-10,
                "{} at {}: eigenvalue {min_eig:e}",
                preset.name,
                row.axis_value
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(5))]

    /// Fast-relaxing parameters, so a modest horizon suffices.
    #[test]
    fn random_initial_states_relax(raw in prop::collection::vec(-1.0f64..1.0, 50)) {
        let p = audit_params();
        let ss = steady_state(&generator(&p).unwrap()).unwrap();
        let rho0 = DensityMatrix::new(density_from(&raw)).unwrap();
        let traj = evolve(&rho0, &p, 400.0, 5).unwrap();
        prop_assert!(traj.report.halving_error < HALVING_TOLERANCE);
        let end = traj.final_state().unwrap();
        prop_assert!(max_abs_diff(end.matrix(), ss.state.matrix()) < 1e-8);
    }
}

#[test]
fn steady_state_is_stationary() {
    let p = baseline(20.0);
    let ss = steady_state(&generator(&p).unwrap()).unwrap();
    let traj = evolve(&ss.state, &p, 1000.0, 11).unwrap();
    for s in &traj.states {
        assert!(max_abs_diff(s.matrix(), ss.state.matrix()) < 1e-9);
    }
}
