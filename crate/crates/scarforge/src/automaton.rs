//! Two-layer brickwork circuits `U_F = e^{-iA} e^{-iB}`, their orbits, and
//! the exact Floquet eigenstates built on each orbit.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::basis::{self, BasisState};
use crate::dense;
use crate::gate::PermutationGate;
use crate::{Error, Result, C64};

/// Gate placement pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Geometry {
    /// A gates at sites `4j-3`, B gates at `4j-1` (1-based); disjoint supports
    /// within a layer.
    Stride4,
    /// A gates at odd sites, B gates at even sites; gates inside a layer
    /// overlap but must commute.
    Stride2,
}

impl Geometry {
    pub fn stride(self) -> usize {
        match self {
            Geometry::Stride4 => 4,
            Geometry::Stride2 => 2,
        }
    }

    /// Distance between an A gate and the nearest B gate.
    pub fn offset(self) -> usize {
        self.stride() / 2
    }
}

#[derive(Debug, Clone)]
pub struct FloquetCircuit {
    gate: PermutationGate,
    len: usize,
    geometry: Geometry,
}

impl FloquetCircuit {
    pub fn new(gate: PermutationGate, len: usize, geometry: Geometry) -> Result<Self> {
        BasisState::new(0, len)?;
        let stride = geometry.stride();
        if len % stride != 0 || len < gate.width() {
            return Err(Error::Circuit(format!("L = {len} does not fit the stride-{stride} layout")));
        }
        if geometry == Geometry::Stride4 && gate.width() > 4 {
            return Err(Error::Circuit("stride-4 layers need gates of width at most 4".into()));
        }
        if geometry == Geometry::Stride2 && !neighbours_commute(&gate) {
            return Err(Error::Circuit("gates two sites apart do not commute".into()));
        }
        Ok(Self { gate, len, geometry })
    }

    pub fn gate(&self) -> &PermutationGate {
        &self.gate
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    /// 0-based sites of the A layer.
    pub fn a_sites(&self) -> Vec<usize> {
        (0..self.len).step_by(self.geometry.stride()).collect()
    }

    /// 0-based sites of the B layer.
    pub fn b_sites(&self) -> Vec<usize> {
        (self.geometry.offset()..self.len).step_by(self.geometry.stride()).collect()
    }

    fn apply_layer(&self, sites: &[usize], index: u64) -> (u64, C64) {
        let mut idx = index;
        let mut ph = C64::new(1.0, 0.0);
        for &j in sites {
            let (i2, p) = self.gate.apply_index(idx, self.len, j);
            idx = i2;
            ph *= p;
        }
        (idx, ph)
    }

    /// One period: B layer first, then A.
    pub fn apply_index(&self, index: u64) -> (u64, C64) {
        let (i1, p1) = self.apply_layer(&self.b_sites(), index);
        let (i2, p2) = self.apply_layer(&self.a_sites(), i1);
        (i2, p1 * p2)
    }

    pub fn apply_floquet(&self, state: BasisState) -> basis::PhasedState {
        let (idx, phase) = self.apply_index(state.index());
        basis::PhasedState { state: BasisState::new(idx, self.len).expect("same chain"), phase }
    }

    pub fn orbit_of(&self, seed: BasisState, l_max: usize) -> Result<OrbitCycle> {
        if seed.len() != self.len {
            return Err(Error::Dimension(format!("seed has L = {}, circuit L = {}", seed.len(), self.len)));
        }
        let mut states = vec![seed.index()];
        let mut phases = vec![C64::new(1.0, 0.0)];
        let (mut idx, mut acc) = (seed.index(), C64::new(1.0, 0.0));
        for _ in 0..l_max {
            let (next, p) = self.apply_index(idx);
            acc *= p;
            if next == seed.index() {
                let phi = dense::principal_angle(acc.arg());
                return Ok(OrbitCycle { len: self.len, states, phases, total_phase: acc, phi });
            }
            states.push(next);
            phases.push(acc);
            idx = next;
        }
        Err(Error::OrbitTooLong { seed: seed.bits(), l_max })
    }

    /// Every cycle of `U_F` on the full space, ordered by smallest member.
    pub fn cycle_decomposition(&self) -> Result<Vec<OrbitCycle>> {
        if self.len > 24 {
            return Err(Error::Guard(format!("cycle decomposition at L = {}", self.len), 24));
        }
        let dim = 1usize << self.len;
        let mut seen = vec![false; dim];
        let mut out = Vec::new();
        for start in 0..dim {
            if seen[start] {
                continue;
            }
            let orbit = self.orbit_of(BasisState::new(start as u64, self.len)?, dim)?;
            for &s in &orbit.states {
                seen[s as usize] = true;
            }
            out.push(orbit);
        }
        Ok(out)
    }
}

/// Whether `U_j` and `U_{j+2}` commute, checked on a chain of width + 2 sites.
fn neighbours_commute(g: &PermutationGate) -> bool {
    let len = g.width() + 2;
    (0..1u64 << len).all(|idx| {
        let (a, pa) = g.apply_index(idx, len, 0);
        let (a, pb) = g.apply_index(a, len, 2);
        let (b, qa) = g.apply_index(idx, len, 2);
        let (b, qb) = g.apply_index(b, len, 0);
        a == b && (pa * pb - qa * qb).norm() < 1e-12
    })
}

/// A cycle `q, σ(q), …` of `U_F` with `U_F^k |q⟩ = phases[k] |states[k]⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitCycle {
    pub len: usize,
    pub states: Vec<u64>,
    pub phases: Vec<C64>,
    /// `⟨q|U_F^l|q⟩`, a product of table phases.
    pub total_phase: C64,
    /// Principal argument of `total_phase`.
    pub phi: f64,
}

impl OrbitCycle {
    pub fn length(&self) -> usize {
        self.states.len()
    }

    /// Eigenphases `β_m = (Φ + 2πm)/l`.
    pub fn eigenphases(&self) -> Vec<f64> {
        let l = self.length() as f64;
        (0..self.length()).map(|m| (self.phi + TAU * m as f64) / l).collect()
    }

    pub fn eigenstates(&self) -> Vec<FloquetEigenstate> {
        let l = self.length();
        let norm = 1.0 / (l as f64).sqrt();
        self.eigenphases()
            .into_iter()
            .enumerate()
            .map(|(m, beta)| FloquetEigenstate {
                m,
                beta,
                support: self.states.clone(),
                amplitudes: (0..l).map(|k| C64::from_polar(norm, -(k as f64) * beta) * self.phases[k]).collect(),
            })
            .collect()
    }

    pub fn report(&self) -> OrbitReport {
        OrbitReport {
            seed: basis::bits_string(self.states[0], self.len),
            cycle: self.states.iter().map(|&s| basis::bits_string(s, self.len)).collect(),
            length: self.length(),
            phi: self.phi,
            eigenphases: self.eigenphases(),
        }
    }
}

/// `|m, q⟩ = l^{-1/2} Σ_k e^{-ikβ} U_F^k |q⟩`, stored on the cycle's states.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetEigenstate {
    pub m: usize,
    pub beta: f64,
    pub support: Vec<u64>,
    pub amplitudes: Vec<C64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitReport {
    pub seed: String,
    pub cycle: Vec<String>,
    pub length: usize,
    #[serde(rename = "Phi")]
    pub phi: f64,
    pub eigenphases: Vec<f64>,
}
