//! Collapse operators and the 25×25 Liouvillian.
//!
//! The master equation is
//!
//! ```text
//! dρ/dt = −i[H, ρ] + Σ_C ( C ρ C† − ½{C†C, ρ} )
//! ```
//!
//! Density matrices are vectorized by column stacking,
//! `vec(ρ)[(c−1)·5 + (r−1)] = ρ_rc`, so that `vec(AXB) = (Bᵀ ⊗ A) vec(X)`.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{Hamiltonian, Level, Matrix5c, SystemParams, N_LEVELS};

pub const DIM: usize = N_LEVELS * N_LEVELS;

pub type Superop = SMatrix<Complex64, DIM, DIM>;
pub type StateVec = SVector<Complex64, DIM>;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const NEGATIVITY_TOL: f64 = 1e-10;

pub fn vec_index(row: Level, col: Level) -> usize {
    col.idx() * N_LEVELS + row.idx()
}

pub fn unvec_index(index: usize) -> (Level, Level) {
    assert!(index < DIM, "vectorized index {index} out of range");
    (Level::ALL[index % N_LEVELS], Level::ALL[index / N_LEVELS])
}

pub fn vectorize(m: &Matrix5c) -> StateVec {
    // nalgebra storage is column-major, which is exactly column stacking.
    StateVec::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &StateVec) -> Matrix5c {
    Matrix5c::from_column_slice(v.as_slice())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollapseOperator {
    pub matrix: Matrix5c,
    pub label: String,
}

/// Six radiative decays `√γ |ground⟩⟨excited|` followed by five dephasers
/// `√γ_d |k⟩⟨k|`. Zero-rate operators are left out.
pub fn collapse_operators(params: &SystemParams) -> Vec<CollapseOperator> {
    let mut ops = Vec::with_capacity(11);
    for (key, source, target, rate) in params.decay.channels() {
        if rate > 0.0 {
            let mut m = Matrix5c::zeros();
            m[(target.idx(), source.idx())] = Complex64::new(rate.sqrt(), 0.0);
            ops.push(CollapseOperator {
                matrix: m,
                label: key.replace("gamma", "gamma_"),
            });
        }
    }
    if params.dephasing > 0.0 {
        let amp = Complex64::new(params.dephasing.sqrt(), 0.0);
        for level in Level::ALL {
            let mut m = Matrix5c::zeros();
            m[(level.idx(), level.idx())] = amp;
            ops.push(CollapseOperator {
                matrix: m,
                label: format!("dephase_{}", level.get()),
            });
        }
    }
    ops
}

/// 5×5 complex matrix that is Hermitian, unit-trace and positive
/// semidefinite to within fixed tolerances.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(Matrix5c);

impl DensityMatrix {
    pub fn new(matrix: Matrix5c) -> Result<Self> {
        let herm = hermiticity_deviation(&matrix);
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (max deviation {herm:.3e})")));
        }
        let tr = matrix.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min_eig = hermitian_part(&matrix).symmetric_eigenvalues().min();
        if min_eig < -NEGATIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(DensityMatrix(matrix))
    }

    /// Wraps an integrator output without re-checking; drift is reported
    /// separately by the caller.
    pub(crate) fn from_raw(matrix: Matrix5c) -> Self {
        DensityMatrix(matrix)
    }

    pub fn pure(level: Level) -> Self {
        let mut m = Matrix5c::zeros();
        m[(level.idx(), level.idx())] = Complex64::new(1.0, 0.0);
        DensityMatrix(m)
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(Matrix5c::identity() / Complex64::new(N_LEVELS as f64, 0.0))
    }

    pub fn matrix(&self) -> &Matrix5c {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix5c {
        self.0
    }

    pub fn population(&self, level: Level) -> f64 {
        self.0[(level.idx(), level.idx())].re
    }

    pub fn populations(&self) -> [f64; N_LEVELS] {
        std::array::from_fn(|i| self.0[(i, i)].re)
    }

    pub fn element(&self, row: Level, col: Level) -> Complex64 {
        self.0[(row.idx(), col.idx())]
    }
}

pub(crate) fn hermitian_part(m: &Matrix5c) -> Matrix5c {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

pub(crate) fn hermiticity_deviation(m: &Matrix5c) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn max_abs<'a>(it: impl IntoIterator<Item = &'a Complex64>) -> f64 {
    it.into_iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Liouvillian {
    pub matrix: Superop,
}

impl Liouvillian {
    pub fn apply(&self, rho: &Matrix5c) -> Matrix5c {
        unvectorize(&(self.matrix * vectorize(rho)))
    }
}

/// Assembles the generator from the vectorization identities
/// `vec(Aρ) = (I⊗A)vec(ρ)` and `vec(ρB) = (Bᵀ⊗I)vec(ρ)`.
pub fn liouvillian(h: &Hamiltonian, collapses: &[CollapseOperator]) -> Liouvillian {
    let id = Matrix5c::identity();
    let minus_i = Complex64::new(0.0, -1.0);
    let half = Complex64::new(0.5, 0.0);

    let mut l: Superop = (id.kronecker(&h.matrix) - h.matrix.transpose().kronecker(&id)) * minus_i;
    for c in collapses {
        let cdc = c.matrix.adjoint() * c.matrix;
        l += c.matrix.conjugate().kronecker(&c.matrix)
            - id.kronecker(&cdc) * half
            - cdc.transpose().kronecker(&id) * half;
    }
    Liouvillian { matrix: l }
}

/// dρ/dt evaluated directly on the 5×5 matrix, without the superoperator.
pub fn rhs(rho: &Matrix5c, h: &Hamiltonian, collapses: &[CollapseOperator]) -> Matrix5c {
    let minus_i = Complex64::new(0.0, -1.0);
    let half = Complex64::new(0.5, 0.0);
    let mut out = (h.matrix * rho - rho * h.matrix) * minus_i;
    for c in collapses {
        let cd = c.matrix.adjoint();
        let cdc = cd * c.matrix;
        out += c.matrix * rho * cd - (cdc * rho + rho * cdc) * half;
    }
    out
}
