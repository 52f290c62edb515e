//! System parameters, coupling topology and the rotating-frame Hamiltonian.
//!
//! Units: ħ = 1 and every rate or frequency is expressed in units of a
//! reference decay rate γ.
//!
//! The Hamiltonian is
//!
//! ```text
//! H = Σ_l θ_l |l⟩⟨l| + Σ_k ( Ω_k |u_k⟩⟨l_k| + h.c. )
//! ```
//!
//! where field `k` couples ground level `l_k` to excited level `u_k` and the
//! frame energies satisfy `θ_u − θ_l = δ_k` along every edge, with `θ_1 = 0`.
//! For the M-scheme this gives `θ = (0, δ1, δ1−δ2, δ1−δ2+δ3, δ1−δ2+δ3−δ4)`.

use std::collections::VecDeque;
use std::fmt;

use nalgebra::SMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const N_LEVELS: usize = 5;
pub const N_FIELDS: usize = 4;

pub type Matrix5c = SMatrix<Complex64, N_LEVELS, N_LEVELS>;

/// Bare atomic level `|1⟩..|5⟩`. Odd levels are ground sublevels, even levels
/// are excited.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Level(u8);

impl Level {
    pub const ALL: [Level; N_LEVELS] = [Level(1), Level(2), Level(3), Level(4), Level(5)];

    pub fn new(value: u8) -> Result<Self> {
        if (1..=N_LEVELS as u8).contains(&value) {
            Ok(Level(value))
        } else {
            Err(Error::InvalidLevel(value))
        }
    }

    /// One-based label as used in the physics notation.
    pub fn get(self) -> u8 {
        self.0
    }

    /// Zero-based matrix index.
    pub fn idx(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_idx(idx: usize) -> Result<Self> {
        Level::new(idx as u8 + 1)
    }

    pub fn is_ground(self) -> bool {
        self.0 % 2 == 1
    }

    pub fn is_excited(self) -> bool {
        !self.is_ground()
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}⟩", self.0)
    }
}

/// One driven transition: field `field` (1..=4) couples `lower` (ground) to
/// `upper` (excited).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CouplingEdge {
    pub field: usize,
    pub lower: Level,
    pub upper: Level,
}

impl CouplingEdge {
    pub fn new(field: usize, lower: u8, upper: u8) -> Result<Self> {
        Ok(CouplingEdge {
            field,
            lower: Level::new(lower)?,
            upper: Level::new(upper)?,
        })
    }
}

/// Four driven transitions forming a forest over the five levels.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingMap {
    edges: [CouplingEdge; N_FIELDS],
}

impl CouplingMap {
    pub fn new(edges: [CouplingEdge; N_FIELDS]) -> Result<Self> {
        let mut seen_fields = [false; N_FIELDS];
        for (i, e) in edges.iter().enumerate() {
            if !(1..=N_FIELDS).contains(&e.field) {
                return Err(Error::InvalidTopology(format!("field index {} outside 1..=4", e.field)));
            }
            if std::mem::replace(&mut seen_fields[e.field - 1], true) {
                return Err(Error::InvalidTopology(format!(
                    "field {} assigned to more than one transition",
                    e.field
                )));
            }
            if !e.lower.is_ground() || !e.upper.is_excited() {
                return Err(Error::InvalidTopology(format!(
                    "field {} must join a ground level (lower) to an excited level (upper), got {} -> {}",
                    e.field, e.lower, e.upper
                )));
            }
            if edges[..i].iter().any(|o| o.lower == e.lower && o.upper == e.upper) {
                return Err(Error::InvalidTopology(format!(
                    "duplicate transition {} <-> {}",
                    e.lower, e.upper
                )));
            }
        }
        if has_cycle(&edges) {
            return Err(Error::CyclicTopology);
        }
        Ok(CouplingMap { edges })
    }

    pub fn edges(&self) -> &[CouplingEdge; N_FIELDS] {
        &self.edges
    }

    pub fn edge_for_field(&self, field: usize) -> Option<&CouplingEdge> {
        self.edges.iter().find(|e| e.field == field)
    }

    pub fn is_m_scheme(&self) -> bool {
        same_edge_set(self, &m_scheme_topology())
    }

    pub fn is_variant(&self) -> bool {
        same_edge_set(self, &variant_topology())
    }
}

fn same_edge_set(a: &CouplingMap, b: &CouplingMap) -> bool {
    a.edges.iter().all(|e| b.edges.contains(e))
}

// Union-find over the five levels.
fn has_cycle(edges: &[CouplingEdge]) -> bool {
    let mut parent: [usize; N_LEVELS] = [0, 1, 2, 3, 4];
    fn root(parent: &mut [usize; N_LEVELS], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for e in edges {
        let a = root(&mut parent, e.lower.idx());
        let b = root(&mut parent, e.upper.idx());
        if a == b {
            return true;
        }
        parent[a] = b;
    }
    false
}

/// The M-scheme chain |1⟩–|2⟩–|3⟩–|4⟩–|5⟩.
pub fn m_scheme_topology() -> CouplingMap {
    CouplingMap {
        edges: [
            CouplingEdge {
                field: 1,
                lower: Level(1),
                upper: Level(2),
            },
            CouplingEdge {
                field: 2,
                lower: Level(3),
                upper: Level(2),
            },
            CouplingEdge {
                field: 3,
                lower: Level(3),
                upper: Level(4),
            },
            CouplingEdge {
                field: 4,
                lower: Level(5),
                upper: Level(4),
            },
        ],
    }
}

/// Field 2 re-wired onto |2⟩ ↔ |5⟩, leaving |2⟩ ↔ |3⟩ undriven: the chain
/// becomes |1⟩–|2⟩–|5⟩–|4⟩–|3⟩.
pub fn variant_topology() -> CouplingMap {
    CouplingMap {
        edges: [
            CouplingEdge {
                field: 1,
                lower: Level(1),
                upper: Level(2),
            },
            CouplingEdge {
                field: 2,
                lower: Level(5),
                upper: Level(2),
            },
            CouplingEdge {
                field: 3,
                lower: Level(3),
                upper: Level(4),
            },
            CouplingEdge {
                field: 4,
                lower: Level(5),
                upper: Level(4),
            },
        ],
    }
}

/// Rotating-frame level energies, resolved by breadth-first traversal from
/// level 1 with `θ_upper − θ_lower = δ_field` on every edge.
pub fn frame_energies(topology: &CouplingMap, detunings: &[f64; N_FIELDS]) -> [f64; N_LEVELS] {
    let mut theta = [0.0; N_LEVELS];
    let mut visited = [false; N_LEVELS];
    let mut queue = VecDeque::from([Level(1)]);
    visited[0] = true;
    while let Some(level) = queue.pop_front() {
        for e in topology.edges() {
            let delta = detunings[e.field - 1];
            let next = if e.lower == level {
                Some((e.upper, theta[level.idx()] + delta))
            } else if e.upper == level {
                Some((e.lower, theta[level.idx()] - delta))
            } else {
                None
            };
            if let Some((n, value)) = next {
                if !visited[n.idx()] {
                    visited[n.idx()] = true;
                    theta[n.idx()] = value;
                    queue.push_back(n);
                }
            }
        }
    }
    // A validated map is a spanning tree, so every level is reached.
    debug_assert!(visited.iter().all(|&v| v));
    theta
}

/// The six spontaneous-emission rates, named by the (ground, excited) pair
/// they connect. Every channel decays excited → ground.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct DecayRates {
    pub gamma12: f64,
    pub gamma23: f64,
    pub gamma25: f64,
    pub gamma14: f64,
    pub gamma34: f64,
    pub gamma45: f64,
}

impl DecayRates {
    /// `(config key, excited source, ground target, rate)` in canonical order.
    pub fn channels(&self) -> [(&'static str, Level, Level, f64); 6] {
        [
            ("gamma12", Level(2), Level(1), self.gamma12),
            ("gamma23", Level(2), Level(3), self.gamma23),
            ("gamma25", Level(2), Level(5), self.gamma25),
            ("gamma14", Level(4), Level(1), self.gamma14),
            ("gamma34", Level(4), Level(3), self.gamma34),
            ("gamma45", Level(4), Level(5), self.gamma45),
        ]
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.channels().iter().find(|c| c.0 == key).map(|c| c.3)
    }

    pub fn get_mut(&mut self, key: &str) -> Option<&mut f64> {
        match key {
            "gamma12" => Some(&mut self.gamma12),
            "gamma23" => Some(&mut self.gamma23),
            "gamma25" => Some(&mut self.gamma25),
            "gamma14" => Some(&mut self.gamma14),
            "gamma34" => Some(&mut self.gamma34),
            "gamma45" => Some(&mut self.gamma45),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemParams {
    /// Ω1..Ω4.
    pub rabi: [Complex64; N_FIELDS],
    /// δ1..δ4.
    pub detunings: [f64; N_FIELDS],
    pub decay: DecayRates,
    /// Ground-state dephasing rate γ_d, applied to every level.
    pub dephasing: f64,
    pub topology: CouplingMap,
}

impl SystemParams {
    /// All fields off, no decay, M-scheme wiring.
    pub fn zeroed() -> Self {
        SystemParams {
            rabi: [Complex64::new(0.0, 0.0); N_FIELDS],
            detunings: [0.0; N_FIELDS],
            decay: DecayRates::default(),
            dephasing: 0.0,
            topology: m_scheme_topology(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (k, om) in self.rabi.iter().enumerate() {
            if !om.re.is_finite() || !om.im.is_finite() {
                return Err(Error::validation(format!("omega{}", k + 1), "must be finite"));
            }
        }
        for (k, d) in self.detunings.iter().enumerate() {
            if !d.is_finite() {
                return Err(Error::validation(format!("delta{}", k + 1), "must be finite"));
            }
        }
        for (key, _, _, rate) in self.decay.channels() {
            check_rate(key, rate)?;
        }
        check_rate("gamma_d", self.dephasing)
    }

    pub fn frame_energies(&self) -> [f64; N_LEVELS] {
        frame_energies(&self.topology, &self.detunings)
    }
}

fn check_rate(key: &str, rate: f64) -> Result<()> {
    if !rate.is_finite() {
        Err(Error::validation(key, "must be finite"))
    } else if rate < 0.0 {
        Err(Error::validation(key, format!("rate must be nonnegative, got {rate}")))
    } else {
        Ok(())
    }
}

impl fmt::Display for SystemParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let topo = if self.topology.is_m_scheme() {
            "m_scheme"
        } else if self.topology.is_variant() {
            "variant"
        } else {
            "custom"
        };
        writeln!(f, "topology = {topo}")?;
        for (k, om) in self.rabi.iter().enumerate() {
            if om.im == 0.0 {
                writeln!(f, "omega{} = {}", k + 1, om.re)?;
            } else {
                writeln!(f, "omega{} = [{}, {}]", k + 1, om.re, om.im)?;
            }
        }
        for (k, d) in self.detunings.iter().enumerate() {
            writeln!(f, "delta{} = {}", k + 1, d)?;
        }
        for (key, _, _, rate) in self.decay.channels() {
            writeln!(f, "{key} = {rate}")?;
        }
        write!(f, "gamma_d = {}", self.dephasing)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hamiltonian {
    pub matrix: Matrix5c,
    pub frame_energies: [f64; N_LEVELS],
}

pub fn build_hamiltonian(params: &SystemParams) -> Result<Hamiltonian> {
    params.validate()?;
    let theta = params.frame_energies();
    let mut matrix = Matrix5c::zeros();
    for (i, t) in theta.iter().enumerate() {
        matrix[(i, i)] = Complex64::new(*t, 0.0);
    }
    for e in params.topology.edges() {
        let om = params.rabi[e.field - 1];
        matrix[(e.upper.idx(), e.lower.idx())] = om;
        matrix[(e.lower.idx(), e.upper.idx())] = om.conj();
    }
    Ok(Hamiltonian {
        matrix,
        frame_energies: theta,
    })
}
