//! One-dimensional parameter scans: steady state and dressed analysis at
//! every grid point, assembled into a table.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::dressed::{
    decay_expansion, diagonalize, dominant_terms, dressed_populations, track_bases, DominantTerm, DressedBasis,
};
use crate::error::{Error, Result};
use crate::lindblad::{collapse_operators, liouvillian};
use crate::model::{build_hamiltonian, Level, SystemParams, N_LEVELS};
use crate::solver::{steady_state, SteadyStateResult};

/// Relative threshold used for the `dominant_pair` column.
pub const DOMINANT_THRESHOLD: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParameter {
    /// δ3 with δ4 set to the same value at every point.
    Delta3Locked,
    /// δ_k for k in 1..=4.
    Delta(usize),
    Gamma25,
    Gamma14,
    /// |Ω_k| for k in 1..=4, phase preserved.
    RabiMagnitude(usize),
}

impl SweepParameter {
    pub fn apply(self, base: &SystemParams, value: f64) -> SystemParams {
        let mut p = base.clone();
        match self {
            SweepParameter::Delta3Locked => {
                p.detunings[2] = value;
                p.detunings[3] = value;
            }
            SweepParameter::Delta(k) => p.detunings[k - 1] = value,
            SweepParameter::Gamma25 => p.decay.gamma25 = value,
            SweepParameter::Gamma14 => p.decay.gamma14 = value,
            SweepParameter::RabiMagnitude(k) => {
                let om = p.rabi[k - 1];
                let phase = if om.norm() > 0.0 { om.arg() } else { 0.0 };
                p.rabi[k - 1] = num_complex::Complex64::from_polar(value, phase);
            }
        }
        p
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepParameter::Delta3Locked => write!(f, "delta3_locked"),
            SweepParameter::Delta(k) => write!(f, "delta{k}"),
            SweepParameter::Gamma25 => write!(f, "gamma25"),
            SweepParameter::Gamma14 => write!(f, "gamma14"),
            SweepParameter::RabiMagnitude(k) => write!(f, "omega{k}"),
        }
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let indexed = |prefix: &str| {
            s.strip_prefix(prefix)
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|k| (1..=4).contains(k))
        };
        match s {
            "delta3_locked" => Ok(SweepParameter::Delta3Locked),
            "gamma25" => Ok(SweepParameter::Gamma25),
            "gamma14" => Ok(SweepParameter::Gamma14),
            _ => {
                if let Some(k) = indexed("delta") {
                    Ok(SweepParameter::Delta(k))
                } else if let Some(k) = indexed("omega") {
                    Ok(SweepParameter::RabiMagnitude(k))
                } else {
                    Err(Error::validation(
                        "axis.parameter",
                        format!("unknown sweep parameter `{s}`"),
                    ))
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepAxis {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

impl SweepAxis {
    pub fn new(parameter: SweepParameter, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::validation("axis.values", "axis must contain at least one value"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("axis.values", "values must be finite"));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::validation("axis.values", "values must be strictly increasing"));
        }
        Ok(SweepAxis { parameter, values })
    }

    /// `points` evenly spaced values over `[start, end]`.
    pub fn uniform(parameter: SweepParameter, start: f64, end: f64, points: usize) -> Result<Self> {
        let values = match points {
            0 => Vec::new(),
            1 => vec![start],
            n => (0..n)
                .map(|i| start + (end - start) * i as f64 / (n - 1) as f64)
                .collect(),
        };
        SweepAxis::new(parameter, values)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PointStatus {
    Ok,
    /// Steady state not unique at this point; steady-state columns are NaN.
    Degenerate {
        gap: f64,
    },
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub axis_value: f64,
    pub populations: [f64; N_LEVELS],
    pub dressed_populations: [f64; N_LEVELS],
    pub eigenvalues: [f64; N_LEVELS],
    pub residual: f64,
    pub gap: f64,
    pub dominant: DominantTerm,
    pub status: PointStatus,
    pub basis: DressedBasis,
}

#[derive(Clone, Debug)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub channel: (Level, Level),
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn population(&self, level: Level) -> Vec<f64> {
        self.rows.iter().map(|r| r.populations[level.idx()]).collect()
    }

    pub fn dressed_population(&self, label: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.dressed_populations[label]).collect()
    }

    pub fn eigenvalue(&self, label: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.eigenvalues[label]).collect()
    }

    /// Index of the grid point closest to `value`.
    pub fn nearest(&self, value: f64) -> usize {
        self.axis
            .values
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - value).abs().total_cmp(&(b.1 - value).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }
}

struct PointResult {
    steady: Result<SteadyStateResult>,
    basis: DressedBasis,
}

fn solve_point(params: &SystemParams) -> Result<PointResult> {
    let h = build_hamiltonian(params)?;
    let l = liouvillian(&h, &collapse_operators(params));
    let steady = match steady_state(&l) {
        Err(e @ Error::DegenerateSteadyState { .. }) => Err(e),
        other => Ok(other?),
    };
    Ok(PointResult {
        steady,
        basis: diagonalize(&h),
    })
}

/// Per-point solves run in parallel; branch tracking is a sequential pass
/// afterwards, so the table does not depend on scheduling.
pub fn run_sweep(base: &SystemParams, axis: &SweepAxis, channel: (Level, Level)) -> Result<SweepTable> {
    base.validate()?;
    let points: Vec<PointResult> = axis
        .values
        .par_iter()
        .map(|&v| solve_point(&axis.parameter.apply(base, v)))
        .collect::<Result<_>>()?;

    let (steadies, bases): (Vec<_>, Vec<_>) = points.into_iter().map(|p| (p.steady, p.basis)).unzip();
    let tracked = track_bases(bases)?;

    let mut rows = Vec::with_capacity(tracked.len());
    for ((&axis_value, steady), basis) in axis.values.iter().zip(steadies).zip(tracked) {
        let expansion = decay_expansion(&basis, channel.0, channel.1)?;
        let dominant = dominant_terms(&expansion, DOMINANT_THRESHOLD)?[0];
        let row = match steady {
            Ok(ss) => SweepRow {
                axis_value,
                populations: ss.state.populations(),
                dressed_populations: dressed_populations(&ss.state, &basis),
                eigenvalues: basis.eigenvalues,
                residual: ss.residual,
                gap: ss.gap,
                dominant,
                status: PointStatus::Ok,
                basis,
            },
            Err(Error::DegenerateSteadyState { gap, .. }) => SweepRow {
                axis_value,
                populations: [f64::NAN; N_LEVELS],
                dressed_populations: [f64::NAN; N_LEVELS],
                eigenvalues: basis.eigenvalues,
                residual: f64::NAN,
                gap,
                dominant,
                status: PointStatus::Degenerate { gap },
                basis,
            },
            Err(e) => return Err(e),
        };
        rows.push(row);
    }
    Ok(SweepTable {
        axis: axis.clone(),
        channel,
        rows,
    })
}
