//! Steady states, time evolution and adiabatic detuning ramps.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lindblad::{
    collapse_operators, hermitian_part, hermiticity_deviation, liouvillian, max_abs, unvectorize, vec_index, vectorize,
    DensityMatrix, Liouvillian, StateVec, Superop, DIM,
};
use crate::model::{build_hamiltonian, Level, SystemParams};

/// Second-smallest singular value of L below which the nullspace is treated
/// as more than one-dimensional (units of γ).
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;

/// Step-halving agreement required of every integration.
pub const HALVING_TOLERANCE: f64 = 1e-8;

/// Maximum trace and Hermiticity drift tolerated over an integration.
pub const DRIFT_TOLERANCE: f64 = 1e-9;

/// Refinement stops once a sample interval would be split into more pieces
/// than this.
pub const MAX_SUBSTEPS: usize = 1 << 14;

#[derive(Clone, Debug)]
pub struct SteadyStateResult {
    pub state: DensityMatrix,
    /// Max-entry norm of `L·vec(ρ)` on the unmodified generator.
    pub residual: f64,
    /// Second-smallest singular value of L.
    pub gap: f64,
}

pub fn generator(params: &SystemParams) -> Result<Liouvillian> {
    let h = build_hamiltonian(params)?;
    Ok(liouvillian(&h, &collapse_operators(params)))
}

/// Ascending singular values of the generator.
pub fn singular_values(l: &Liouvillian) -> Vec<f64> {
    let mut s: Vec<f64> = l.matrix.singular_values().iter().copied().collect();
    s.sort_by(f64::total_cmp);
    s
}

/// Unique trace-one null vector of L, found by replacing the `ρ11` row with
/// the trace functional.
pub fn steady_state(l: &Liouvillian) -> Result<SteadyStateResult> {
    let one = Level::ALL[0];
    steady_state_replacing_row(l, vec_index(one, one))
}

/// As [`steady_state`], with an explicit choice of the replaced row. Any row
/// gives the same answer when the nullspace is one-dimensional.
pub fn steady_state_replacing_row(l: &Liouvillian, row: usize) -> Result<SteadyStateResult> {
    assert!(row < DIM, "row {row} out of range");
    let gap = singular_values(l)[1];
    if gap.is_nan() || gap <= DEGENERACY_THRESHOLD {
        return Err(Error::DegenerateSteadyState { gap, ramp_time: None });
    }

    let mut a: Superop = l.matrix;
    for j in 0..DIM {
        a[(row, j)] = Complex64::new(0.0, 0.0);
    }
    for k in Level::ALL {
        a[(row, vec_index(k, k))] = Complex64::new(1.0, 0.0);
    }
    let mut b = StateVec::zeros();
    b[row] = Complex64::new(1.0, 0.0);

    let x = a.lu().solve(&b).ok_or(Error::SingularSolve)?;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::SingularSolve);
    }
    let rho = hermitian_part(&unvectorize(&x));
    let residual = max_abs((l.matrix * vectorize(&rho)).iter());
    Ok(SteadyStateResult {
        state: DensityMatrix::new(rho)?,
        residual,
        gap,
    })
}

pub fn steady_state_for(params: &SystemParams) -> Result<SteadyStateResult> {
    steady_state(&generator(params)?)
}

/// Accuracy bookkeeping attached to every trajectory.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct IntegrationReport {
    /// Max-entry difference to the run with every step halved.
    pub halving_error: f64,
    pub trace_drift: f64,
    pub hermiticity_drift: f64,
    /// Propagation steps per sample interval in the accepted run.
    pub substeps: usize,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// Distance to the instantaneous steady state; present for ramps only.
    pub tracking_error: Option<Vec<f64>>,
    pub report: IntegrationReport,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn population_series(&self, level: Level) -> Vec<f64> {
        self.states.iter().map(|s| s.population(level)).collect()
    }

    pub fn coherence_abs_series(&self, row: Level, col: Level) -> Vec<f64> {
        self.states.iter().map(|s| s.element(row, col).norm()).collect()
    }

    /// Named observable columns: populations, then the |ρ12| and |ρ13|
    /// coherence magnitudes.
    pub fn observables(&self) -> Vec<(String, Vec<f64>)> {
        let mut cols: Vec<(String, Vec<f64>)> = Level::ALL
            .iter()
            .map(|&l| (format!("rho{0}{0}", l.get()), self.population_series(l)))
            .collect();
        let [one, two, three, ..] = Level::ALL;
        cols.push(("coh12_abs".into(), self.coherence_abs_series(one, two)));
        cols.push(("coh13_abs".into(), self.coherence_abs_series(one, three)));
        cols
    }

    pub fn final_state(&self) -> Option<&DensityMatrix> {
        self.states.last()
    }
}

fn check_grid(t_end: f64, n_samples: usize) -> Result<()> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::validation("t_end", "must be finite and > 0"));
    }
    if n_samples < 2 {
        return Err(Error::validation("samples", "need at least 2 samples"));
    }
    Ok(())
}

fn uniform_times(t_end: f64, n_samples: usize) -> Vec<f64> {
    let n = (n_samples - 1) as f64;
    (0..n_samples).map(|k| t_end * k as f64 / n).collect()
}

fn drift(states: &[StateVec]) -> (f64, f64) {
    states.iter().fold((0.0, 0.0), |(tr, he), v| {
        let m = unvectorize(v);
        (
            tr.max((m.trace() - Complex64::new(1.0, 0.0)).norm()),
            he.max(hermiticity_deviation(&m)),
        )
    })
}

fn max_sample_difference(a: &[StateVec], b: &[StateVec]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| max_abs((x - y).iter()))
        .fold(0.0, f64::max)
}

/// Runs `propagate(substeps)` with successively doubled step counts until two
/// consecutive runs agree to [`HALVING_TOLERANCE`], then checks drift.
fn integrate_with_halving<F>(mut substeps: usize, mut propagate: F) -> Result<(Vec<StateVec>, IntegrationReport)>
where
    F: FnMut(usize) -> Vec<StateVec>,
{
    let mut coarse = propagate(substeps);
    loop {
        if substeps * 2 > MAX_SUBSTEPS {
            return Err(Error::StepFailure(format!(
                "step-halving did not converge below {HALVING_TOLERANCE:e} with {substeps} steps per sample"
            )));
        }
        let fine = propagate(substeps * 2);
        let halving_error = max_sample_difference(&coarse, &fine);
        if halving_error < HALVING_TOLERANCE {
            let (trace_drift, hermiticity_drift) = drift(&fine);
            if trace_drift > DRIFT_TOLERANCE || hermiticity_drift > DRIFT_TOLERANCE {
                return Err(Error::StepFailure(format!(
                    "drift exceeds {DRIFT_TOLERANCE:e}: trace {trace_drift:.3e}, hermiticity {hermiticity_drift:.3e}"
                )));
            }
            return Ok((
                fine,
                IntegrationReport {
                    halving_error,
                    trace_drift,
                    hermiticity_drift,
                    substeps: substeps * 2,
                },
            ));
        }
        coarse = fine;
        substeps *= 2;
    }
}

fn to_trajectory(times: Vec<f64>, states: Vec<StateVec>, report: IntegrationReport) -> Trajectory {
    Trajectory {
        times,
        states: states.iter().map(|v| DensityMatrix::from_raw(unvectorize(v))).collect(),
        tracking_error: None,
        report,
    }
}

/// Relaxation under fixed parameters, sampled at `n_samples` uniform times
/// on `[0, t_end]`.
pub fn evolve(rho0: &DensityMatrix, params: &SystemParams, t_end: f64, n_samples: usize) -> Result<Trajectory> {
    evolve_generator(rho0, &generator(params)?, t_end, n_samples)
}

/// Exact propagation `exp(L·h)` between samples; the halving check then only
/// sees rounding in the exponential.
pub fn evolve_generator(rho0: &DensityMatrix, l: &Liouvillian, t_end: f64, n_samples: usize) -> Result<Trajectory> {
    check_grid(t_end, n_samples)?;
    let times = uniform_times(t_end, n_samples);
    let interval = t_end / (n_samples - 1) as f64;
    let v0 = vectorize(rho0.matrix());

    let (states, report) = integrate_with_halving(1, |m| {
        let step = (l.matrix * Complex64::new(interval / m as f64, 0.0)).exp();
        let mut v = v0;
        let mut out = Vec::with_capacity(n_samples);
        out.push(v);
        for _ in 1..n_samples {
            for _ in 0..m {
                v = step * v;
            }
            out.push(v);
        }
        out
    })?;
    Ok(to_trajectory(times, states, report))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RampTarget {
    /// δ3 alone.
    Delta3,
    /// δ3 with δ4 locked to the same value.
    Delta3Locked,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RampShape {
    Linear,
    Smoothstep,
}

impl RampShape {
    fn progress(self, s: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        match self {
            RampShape::Linear => s,
            RampShape::Smoothstep => s * s * (3.0 - 2.0 * s),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RampSpec {
    pub target: RampTarget,
    pub start: f64,
    pub end: f64,
    pub duration: f64,
    pub shape: RampShape,
}

impl RampSpec {
    pub fn new(target: RampTarget, start: f64, end: f64, duration: f64, shape: RampShape) -> Result<Self> {
        let spec = RampSpec {
            target,
            start,
            end,
            duration,
            shape,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.end.is_finite()) {
            return Err(Error::validation("ramp", "start and end must be finite"));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::validation("ramp.duration", "must be finite and > 0"));
        }
        Ok(())
    }

    pub fn value_at(&self, t: f64) -> f64 {
        self.start + (self.end - self.start) * self.shape.progress(t / self.duration)
    }

    pub fn params_at(&self, base: &SystemParams, t: f64) -> SystemParams {
        self.params_with_value(base, self.value_at(t))
    }

    fn params_with_value(&self, base: &SystemParams, v: f64) -> SystemParams {
        let mut p = base.clone();
        p.detunings[2] = v;
        if self.target == RampTarget::Delta3Locked {
            p.detunings[3] = v;
        }
        p
    }
}

// Fourth-order commutator-free Magnus scheme (two exponentials per step,
// generators sampled at the Gauss–Legendre nodes).
const CF4_NODE_OFFSET: f64 = 0.288_675_134_594_812_9; // √3/6
const CF4_A: f64 = (3.0 - 2.0 * 1.732_050_807_568_877_2) / 12.0;
const CF4_B: f64 = (3.0 + 2.0 * 1.732_050_807_568_877_2) / 12.0;

/// Norm allowed per Taylor piece; larger values lose digits to cancellation.
const TAYLOR_MAX_NORM: f64 = 4.0;

/// Largest CF4 step tried first; halving refines from here.
const RAMP_INITIAL_STEP: f64 = 0.25;

/// `exp(m)·v` by a scaled Taylor series on the vector. Cheaper than forming
/// the matrix exponential when it is applied once.
fn exp_action(m: &Superop, v: &StateVec) -> StateVec {
    let norm1 = m
        .column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let pieces = (norm1 / TAYLOR_MAX_NORM).ceil().max(1.0) as usize;
    let scale = 1.0 / pieces as f64;
    let mut out = *v;
    for _ in 0..pieces {
        let mut term = out;
        let mut acc = out;
        for k in 1..=60 {
            term = (m * term) * Complex64::new(scale / k as f64, 0.0);
            acc += term;
            if term.norm() <= 1e-18 * acc.norm() {
                break;
            }
        }
        out = acc;
    }
    out
}

/// Integrates the time-dependent generator along `ramp` and records, at every
/// sample, the max-entry distance to the instantaneous steady state.
pub fn adiabatic_ramp(
    rho0: &DensityMatrix,
    params: &SystemParams,
    ramp: &RampSpec,
    n_samples: usize,
) -> Result<Trajectory> {
    ramp.validate()?;
    check_grid(ramp.duration, n_samples)?;
    params.validate()?;
    let times = uniform_times(ramp.duration, n_samples);
    let interval = ramp.duration / (n_samples - 1) as f64;
    let v0 = vectorize(rho0.matrix());

    // The generator is affine in the ramped detuning: L(v) = L0 + v·B.
    let l0 = generator(&ramp.params_with_value(params, 0.0))?.matrix;
    let slope = generator(&ramp.params_with_value(params, 1.0))?.matrix - l0;
    let generator_at = |t: f64| l0 + slope * Complex64::new(ramp.value_at(t), 0.0);

    let initial = (interval / RAMP_INITIAL_STEP).ceil().max(1.0) as usize;
    let (states, report) = integrate_with_halving(initial, |m| {
        let h = interval / m as f64;
        let mut v = v0;
        let mut out = Vec::with_capacity(n_samples);
        out.push(v);
        for k in 1..n_samples {
            let t0 = times[k - 1];
            for j in 0..m {
                let t = t0 + j as f64 * h;
                let l1 = generator_at(t + (0.5 - CF4_NODE_OFFSET) * h);
                let l2 = generator_at(t + (0.5 + CF4_NODE_OFFSET) * h);
                let first = l1 * Complex64::new(CF4_B * h, 0.0) + l2 * Complex64::new(CF4_A * h, 0.0);
                let second = l1 * Complex64::new(CF4_A * h, 0.0) + l2 * Complex64::new(CF4_B * h, 0.0);
                v = exp_action(&second, &exp_action(&first, &v));
            }
            out.push(v);
        }
        out
    })?;

    let mut traj = to_trajectory(times, states, report);
    let mut tracking = Vec::with_capacity(n_samples);
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let ss = steady_state(&generator(&ramp.params_at(params, *t))?).map_err(|e| match e {
            Error::DegenerateSteadyState { gap, .. } => Error::DegenerateSteadyState {
                gap,
                ramp_time: Some(*t),
            },
            other => other,
        })?;
        tracking.push(max_abs((state.matrix() - ss.state.matrix()).iter()));
    }
    traj.tracking_error = Some(tracking);
    Ok(traj)
}
