//! Dressed states: eigenbasis of the rotating-frame Hamiltonian, branch
//! tracking across sweeps, and decay operators expanded in that basis.
//!
//! Row convention: `|e_i⟩ = Σ_j U_ij |j⟩`, so row `i` of `U` holds the bare
//! components of dressed state `i`, and rows are kept in branch-label order.

use std::cmp::Ordering;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lindblad::DensityMatrix;
use crate::model::{Hamiltonian, Level, Matrix5c, N_LEVELS};

/// Below this overlap two branches are closer to swapped than matched.
pub const MIN_TRACKING_OVERLAP: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Clone, Debug, PartialEq)]
pub struct DressedBasis {
    /// ε for each branch label.
    pub eigenvalues: [f64; N_LEVELS],
    /// Rows are dressed states in branch-label order.
    pub vectors: Matrix5c,
}

impl DressedBasis {
    /// Bare amplitude `U_{label, level}`.
    pub fn amplitude(&self, label: usize, level: Level) -> Complex64 {
        self.vectors[(label, level.idx())]
    }

    /// Bare level with the largest weight in dressed state `label`.
    pub fn dominant_level(&self, label: usize) -> Level {
        let row = self.vectors.row(label);
        let idx = (0..N_LEVELS)
            .max_by(|&a, &b| row[a].norm_sqr().total_cmp(&row[b].norm_sqr()))
            .unwrap_or(0);
        Level::ALL[idx]
    }

    /// Branch label whose dressed state has the largest weight on `level`.
    pub fn label_of_level(&self, level: Level) -> usize {
        (0..N_LEVELS)
            .max_by(|&a, &b| {
                self.amplitude(a, level)
                    .norm_sqr()
                    .total_cmp(&self.amplitude(b, level).norm_sqr())
            })
            .unwrap_or(0)
    }

    fn permuted(&self, order: &[usize; N_LEVELS]) -> DressedBasis {
        DressedBasis {
            eigenvalues: order.map(|i| self.eigenvalues[i]),
            vectors: Matrix5c::from_fn(|r, c| self.vectors[(order[r], c)]),
        }
    }
}

/// Eigendecomposition with the default labeling: ε0 is the eigenvalue of
/// smallest magnitude, the remaining four follow in ascending order. Each
/// eigenvector's largest-magnitude component is made real and positive.
pub fn diagonalize(h: &Hamiltonian) -> DressedBasis {
    let eig = h.matrix.symmetric_eigen();
    let mut vectors = eig.eigenvectors.transpose();
    for i in 0..N_LEVELS {
        let mut row = vectors.row_mut(i);
        let pivot = (0..N_LEVELS)
            .max_by(|&a, &b| {
                row[a]
                    .norm()
                    .total_cmp(&row[b].norm())
                    // first index wins ties
                    .then(b.cmp(&a))
            })
            .unwrap_or(0);
        let z = row[pivot];
        if z.norm() > 0.0 {
            let phase = z.conj() / z.norm();
            row *= phase;
        }
    }
    let raw = DressedBasis {
        eigenvalues: std::array::from_fn(|i| eig.eigenvalues[i]),
        vectors,
    };
    raw.permuted(&default_order(&raw.eigenvalues))
}

fn default_order(eps: &[f64; N_LEVELS]) -> [usize; N_LEVELS] {
    let dark = (0..N_LEVELS)
        .min_by(|&a, &b| eps[a].abs().total_cmp(&eps[b].abs()).then(a.cmp(&b)))
        .unwrap_or(0);
    let mut rest: Vec<usize> = (0..N_LEVELS).filter(|&i| i != dark).collect();
    rest.sort_by(|&a, &b| eps[a].total_cmp(&eps[b]).then(a.cmp(&b)));
    [dark, rest[0], rest[1], rest[2], rest[3]]
}

/// `|⟨e_a(prev)|e_b(next)⟩|` for every pair of branches.
pub fn overlap_matrix(prev: &DressedBasis, next: &DressedBasis) -> [[f64; N_LEVELS]; N_LEVELS] {
    let ov = prev.vectors.conjugate() * next.vectors.transpose();
    std::array::from_fn(|a| std::array::from_fn(|b| ov[(a, b)].norm()))
}

/// Relabels `next` so that each branch continues the branch of `prev` it
/// overlaps most, by greedy matching on descending overlap.
pub fn match_branches(prev: &DressedBasis, next: &DressedBasis, point: usize) -> Result<DressedBasis> {
    let ov = overlap_matrix(prev, next);
    let mut pairs: Vec<(f64, usize, usize)> = (0..N_LEVELS)
        .flat_map(|a| (0..N_LEVELS).map(move |b| (a, b)))
        .map(|(a, b)| (ov[a][b], a, b))
        .collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));

    let mut order = [usize::MAX; N_LEVELS];
    let mut taken = [false; N_LEVELS];
    for (o, a, b) in pairs {
        if order[a] != usize::MAX || taken[b] {
            continue;
        }
        if o < MIN_TRACKING_OVERLAP {
            return Err(Error::AmbiguousTracking { point, overlap: o });
        }
        order[a] = b;
        taken[b] = true;
    }
    Ok(next.permuted(&order))
}

/// Diagonalizes every Hamiltonian and carries branch labels along the
/// sequence. The first point is labeled as in [`diagonalize`].
pub fn track_branches(hamiltonians: &[Hamiltonian]) -> Result<Vec<DressedBasis>> {
    track_bases(hamiltonians.iter().map(diagonalize).collect())
}

/// Branch tracking over bases that were already diagonalized (possibly in
/// parallel). Runs sequentially.
pub fn track_bases(bases: Vec<DressedBasis>) -> Result<Vec<DressedBasis>> {
    let mut out: Vec<DressedBasis> = Vec::with_capacity(bases.len());
    for (i, b) in bases.into_iter().enumerate() {
        let labeled = match out.last() {
            None => b,
            Some(prev) => match_branches(prev, &b, i)?,
        };
        out.push(labeled);
    }
    Ok(out)
}

/// `p_i = ⟨e_i|ρ|e_i⟩` in branch-label order.
pub fn dressed_populations(rho: &DensityMatrix, basis: &DressedBasis) -> [f64; N_LEVELS] {
    let u = &basis.vectors;
    // (U* ρ Uᵀ)_ii
    let m = u.conjugate() * rho.matrix() * u.transpose();
    std::array::from_fn(|i| m[(i, i)].re)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayExpansion {
    /// `M_ab = U*_{a,source} U_{b,target}`: coefficient of `|e_a⟩⟨e_b|` in
    /// `|source⟩⟨target|`.
    pub coefficients: Matrix5c,
    pub source: Level,
    pub target: Level,
}

impl DecayExpansion {
    pub fn channel_label(&self) -> String {
        format!("{}{}", self.source.get(), self.target.get())
    }
}

pub fn decay_expansion(basis: &DressedBasis, source: Level, target: Level) -> Result<DecayExpansion> {
    if !source.is_excited() || !target.is_ground() {
        return Err(Error::InvalidChannel {
            source_level: source.get(),
            target: target.get(),
        });
    }
    let coefficients = Matrix5c::from_fn(|a, b| basis.amplitude(a, source).conj() * basis.amplitude(b, target));
    Ok(DecayExpansion {
        coefficients,
        source,
        target,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DominantTerm {
    /// Branch labels `(a, b)` of `|e_a⟩⟨e_b|`.
    pub pair: (usize, usize),
    pub magnitude: f64,
}

impl DominantTerm {
    /// Text form used in tables, e.g. `e0e3`.
    pub fn label(&self) -> String {
        format!("e{}e{}", self.pair.0, self.pair.1)
    }
}

/// Entries with `|M_ab| ≥ threshold · max|M|`, largest first, ties broken by
/// `(a, b)`.
pub fn dominant_terms(expansion: &DecayExpansion, threshold: f64) -> Result<Vec<DominantTerm>> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::validation("threshold", "must lie in (0, 1]"));
    }
    let mags: Vec<DominantTerm> = (0..N_LEVELS)
        .flat_map(|a| (0..N_LEVELS).map(move |b| (a, b)))
        .map(|(a, b)| DominantTerm {
            pair: (a, b),
            magnitude: expansion.coefficients[(a, b)].norm(),
        })
        .collect();
    let max = mags.iter().map(|t| t.magnitude).fold(0.0, f64::max);
    let mut terms: Vec<DominantTerm> = mags.into_iter().filter(|t| t.magnitude >= threshold * max).collect();
    terms.sort_by(|x, y| match y.magnitude.total_cmp(&x.magnitude) {
        Ordering::Equal => x.pair.cmp(&y.pair),
        o => o,
    });
    Ok(terms)
}
