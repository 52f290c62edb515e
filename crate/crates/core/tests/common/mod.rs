//! Shared fixtures and an independent reference solver for integration tests.
//!
//! The reference builds the master equation entry by entry from the raw
//! parameter values and takes the steady state from the right singular vector
//! of the smallest singular value. It shares no code with the library solver.

#![allow(dead_code)]

use mscheme::lindblad::{vec_index, Superop};
use mscheme::model::{variant_topology, DecayRates, Level, Matrix5c, SystemParams};
use mscheme::solver::generator;
use nalgebra::DMatrix;
use num_complex::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn lv(v: u8) -> Level {
    Level::new(v).unwrap()
}

/// Baseline parameter set with δ3 = δ4 = `d3`.
pub fn baseline(d3: f64) -> SystemParams {
    let mut p = SystemParams::zeroed();
    p.rabi = [c(0.75, 0.0), c(1.5, 0.0), c(0.01, 0.0), c(0.1, 0.0)];
    p.detunings = [20.0, 0.0, d3, d3];
    p.decay = DecayRates {
        gamma12: 1.0,
        gamma23: 1.0,
        gamma25: 0.25,
        gamma14: 0.25,
        gamma34: 1.0,
        gamma45: 1.0,
    };
    p.dephasing = 0.01;
    p
}

/// Detunings δ1, δ2 exchanged.
pub fn mirror(d3: f64) -> SystemParams {
    let mut p = baseline(d3);
    p.detunings[0] = 0.0;
    p.detunings[1] = 20.0;
    p
}

pub fn variant(d3: f64, gamma14: f64) -> SystemParams {
    let mut p = baseline(d3);
    p.topology = variant_topology();
    p.decay.gamma14 = gamma14;
    p
}

/// (field, ground, excited) wiring, 0-based levels.
fn wiring(p: &SystemParams) -> [(usize, usize, usize); 4] {
    if p.topology.is_variant() {
        [(0, 0, 1), (1, 4, 1), (2, 2, 3), (3, 4, 3)]
    } else {
        [(0, 0, 1), (1, 2, 1), (2, 2, 3), (3, 4, 3)]
    }
}

/// Level energies by repeated relaxation over the edges until all are fixed.
pub fn reference_energies(p: &SystemParams) -> [f64; 5] {
    let mut theta = [f64::NAN; 5];
    theta[0] = 0.0;
    for _ in 0..5 {
        for (k, g, e) in wiring(p) {
            let d = p.detunings[k];
            if theta[e].is_nan() && !theta[g].is_nan() {
                theta[e] = theta[g] + d;
            }
            if theta[g].is_nan() && !theta[e].is_nan() {
                theta[g] = theta[e] - d;
            }
        }
    }
    theta
}

pub fn reference_hamiltonian(p: &SystemParams) -> DMatrix<Complex64> {
    let theta = reference_energies(p);
    let mut h = DMatrix::from_fn(5, 5, |r, col| if r == col { c(theta[r], 0.0) } else { c(0.0, 0.0) });
    for (k, g, e) in wiring(p) {
        h[(e, g)] = p.rabi[k];
        h[(g, e)] = p.rabi[k].conj();
    }
    h
}

/// dρ/dt written out with explicit index loops.
pub fn reference_rhs(p: &SystemParams, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let h = reference_hamiltonian(p);
    let i = c(0.0, 1.0);
    let mut out = (&h * rho - rho * &h) * (-i);
    let d = &p.decay;
    let channels = [
        (1, 0, d.gamma12),
        (1, 2, d.gamma23),
        (1, 4, d.gamma25),
        (3, 0, d.gamma14),
        (3, 2, d.gamma34),
        (3, 4, d.gamma45),
    ];
    for (e, g, rate) in channels {
        // γ (|g⟩⟨e| ρ |e⟩⟨g| − ½{|e⟩⟨e|, ρ})
        out[(g, g)] += rho[(e, e)] * rate;
        for k in 0..5 {
            out[(e, k)] -= rho[(e, k)] * (0.5 * rate);
            out[(k, e)] -= rho[(k, e)] * (0.5 * rate);
        }
    }
    // Dephasing on every level damps each coherence at rate γ_d.
    for r in 0..5 {
        for col in 0..5 {
            if r != col {
                out[(r, col)] -= rho[(r, col)] * p.dephasing;
            }
        }
    }
    out
}

/// 25×25 generator assembled column by column from basis matrices.
pub fn reference_generator(p: &SystemParams) -> DMatrix<Complex64> {
    let mut l = DMatrix::zeros(25, 25);
    for col in 0..25 {
        let mut e = DMatrix::zeros(5, 5);
        e[(col % 5, col / 5)] = c(1.0, 0.0);
        let image = reference_rhs(p, &e);
        for row in 0..25 {
            l[(row, col)] = image[(row % 5, row / 5)];
        }
    }
    l
}

pub struct ReferenceSteadyState {
    pub rho: Matrix5c,
    /// Second-smallest singular value.
    pub gap: f64,
}

pub fn reference_steady_state(p: &SystemParams) -> ReferenceSteadyState {
    let l = reference_generator(p);
    let svd = l.svd(false, true);
    let v_t = svd.v_t.unwrap();
    let mut order: Vec<usize> = (0..25).collect();
    order.sort_by(|a, b| svd.singular_values[*a].total_cmp(&svd.singular_values[*b]));
    let null = v_t.row(order[0]).adjoint();
    let mut rho = Matrix5c::from_fn(|r, col| null[col * 5 + r]);
    let tr = rho.trace();
    rho /= tr;
    rho = (rho + rho.adjoint()) * c(0.5, 0.0);
    ReferenceSteadyState {
        rho,
        gap: svd.singular_values[order[1]],
    }
}

pub fn reference_populations(p: &SystemParams) -> [f64; 5] {
    let r = reference_steady_state(p).rho;
    std::array::from_fn(|k| r[(k, k)].re)
}

pub fn max_abs_diff(a: &Matrix5c, b: &Matrix5c) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Random density matrix ρ = A A† / tr(A A†) from a flat list of 50 reals.
pub fn density_from(raw: &[f64]) -> Matrix5c {
    let a = Matrix5c::from_fn(|r, col| c(raw[2 * (5 * r + col)], raw[2 * (5 * r + col) + 1]));
    let m = a * a.adjoint();
    let tr = m.trace();
    m / tr
}

pub fn l_entry(l: &Superop, out: (u8, u8), input: (u8, u8)) -> Complex64 {
    l[(vec_index(lv(out.0), lv(out.1)), vec_index(lv(input.0), lv(input.1)))]
}

/// Complex Rabi frequencies with every rate distinct, so that a swapped
/// coefficient in the audit cannot cancel.
pub fn audit_params() -> SystemParams {
    let mut p = baseline(3.0);
    p.rabi = [c(0.7, 0.2), c(1.3, -0.4), c(0.3, 0.5), c(0.9, 0.1)];
    p.detunings = [2.0, -1.5, 3.0, 0.7];
    p.decay.gamma12 = 1.1;
    p.decay.gamma23 = 0.9;
    p.decay.gamma25 = 0.3;
    p.decay.gamma14 = 0.2;
    p.decay.gamma34 = 0.8;
    p.decay.gamma45 = 1.2;
    p.dephasing = 0.05;
    p
}

/// Hand-written population equations in the transposed index convention
/// (ρ_ij there is ⟨j|ρ|i⟩ here), with the γ14 gain term in dρ11/dt as γ14ρ44.
pub fn population_audit_deviation(p: &SystemParams) -> f64 {
    let l = generator(p).unwrap().matrix;
    let mut worst: f64 = 0.0;
    let [o1, o2, o3, o4] = p.rabi;
    let d = p.decay;
    let i = c(0.0, 1.0);
    let re = |x: f64| c(x, 0.0);
    // Entries below are keyed by our (row, col).
    type Terms = Vec<((u8, u8), Complex64)>;
    let expected: [(u8, Terms); 5] = [
        (
            1,
            vec![
                ((2, 2), re(d.gamma12)),
                ((4, 4), re(d.gamma14)),
                ((1, 2), i * o1),
                ((2, 1), -i * o1.conj()),
            ],
        ),
        (
            2,
            vec![
                ((2, 2), re(-(d.gamma12 + d.gamma23 + d.gamma25))),
                ((1, 2), -i * o1),
                ((2, 1), i * o1.conj()),
                ((3, 2), -i * o2),
                ((2, 3), i * o2.conj()),
            ],
        ),
        (
            3,
            vec![
                ((2, 2), re(d.gamma23)),
                ((4, 4), re(d.gamma34)),
                ((3, 2), i * o2),
                ((2, 3), -i * o2.conj()),
                ((3, 4), i * o3),
                ((4, 3), -i * o3.conj()),
            ],
        ),
        (
            4,
            vec![
                ((4, 4), re(-(d.gamma14 + d.gamma34 + d.gamma45))),
                ((3, 4), -i * o3),
                ((4, 3), i * o3.conj()),
                ((5, 4), -i * o4),
                ((4, 5), i * o4.conj()),
            ],
        ),
        (
            5,
            vec![
                ((2, 2), re(d.gamma25)),
                ((4, 4), re(d.gamma45)),
                ((5, 4), i * o4),
                ((4, 5), -i * o4.conj()),
            ],
        ),
    ];
    for (k, terms) in expected {
        for r in Level::ALL {
            for col in Level::ALL {
                let input = (r.get(), col.get());
                let want = terms
                    .iter()
                    .find(|(idx, _)| *idx == input)
                    .map(|(_, v)| *v)
                    .unwrap_or(c(0.0, 0.0));
                let got = l_entry(&l, (k, k), input);
                worst = worst.max((got - want).norm());
            }
        }
    }
    worst
}

/// Real part of each coherence's self-coupling equals minus the expected
/// damping constant.
pub fn damping_audit_deviation(p: &SystemParams) -> f64 {
    let l = generator(p).unwrap().matrix;
    let mut worst: f64 = 0.0;
    let d = p.decay;
    let gd = p.dephasing;
    let g2 = (d.gamma12 + d.gamma23 + d.gamma25) / 2.0;
    let g4 = (d.gamma14 + d.gamma34 + d.gamma45) / 2.0;
    let expected = [
        ((1, 2), gd + g2),
        ((1, 3), gd),
        ((1, 4), gd + g4),
        ((1, 5), gd),
        ((2, 3), gd + g2),
        ((2, 4), gd + g2 + g4),
        ((2, 5), gd + g2),
        ((3, 4), gd + g4),
        ((3, 5), gd),
        ((4, 5), gd + g4),
    ];
    for ((a, b), damping) in expected {
        for idx in [(a, b), (b, a)] {
            let self_coupling = l_entry(&l, idx, idx);
            worst = worst.max((self_coupling.re + damping).abs());
        }
    }
    worst
}
