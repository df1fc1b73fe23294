//! Exhaustive search over phase-free gates that act trivially on the last
//! qubit of their window.

use rayon::prelude::*;
use serde::Serialize;

use super::{check_type1_with, enumerate_rules, gate_powers, rule_sites, RuleKind};
use crate::automaton::{FloquetCircuit, Geometry};
use crate::gate::PermutationGate;
use crate::{Error, Result, C64};

const FACTORIALS: [usize; 9] = [1, 1, 2, 6, 24, 120, 720, 5040, 40320];
const CHUNK: usize = 720;

#[derive(Debug, Clone)]
pub struct SearchConstraints {
    /// States whose rules are counted.
    pub orbit: Vec<u64>,
    pub len: usize,
    /// Gates must satisfy `U₀^order = 𝟙`; rule powers run below `order`.
    pub order: usize,
    /// Only 3-qubit permutations lifted to width 4 are supported.
    pub trivial_last_qubit: bool,
    /// Also require `U_F` to map the orbit set onto itself.
    pub require_orbit: bool,
}

impl SearchConstraints {
    pub fn neel(len: usize, order: usize) -> Result<Self> {
        Ok(Self {
            orbit: vec![
                crate::basis::BasisState::neel(len, 1)?.index(),
                crate::basis::BasisState::neel(len, 0)?.index(),
            ],
            len,
            order,
            trivial_last_qubit: true,
            require_orbit: false,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchHit {
    /// Image of each 3-qubit value.
    pub perm: [u8; 8],
    pub permutation_cycles: Vec<Vec<usize>>,
    pub satisfied: usize,
    pub total: usize,
}

/// The `k`-th permutation of `0..8` in lexicographic order.
fn nth_permutation(mut k: usize) -> [u8; 8] {
    let mut pool: Vec<u8> = (0..8).collect();
    let mut out = [0u8; 8];
    for (i, slot) in out.iter_mut().enumerate() {
        let f = FACTORIALS[7 - i];
        *slot = pool.remove(k / f);
        k %= f;
    }
    out
}

fn next_permutation(p: &mut [u8; 8]) -> bool {
    let Some(i) = (0..7).rev().find(|&i| p[i] < p[i + 1]) else {
        return false;
    };
    let j = (i + 1..8).rev().find(|&j| p[j] > p[i]).expect("exists");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

/// Lifts a 3-qubit permutation to width 4 with the last qubit untouched.
pub fn lift(perm: &[u8; 8]) -> PermutationGate {
    let table = (0..16).map(|v| 2 * perm[v >> 1] as usize + (v & 1)).collect();
    PermutationGate::from_permutation(4, table, vec![C64::new(1.0, 0.0); 16]).expect("lifted bijection")
}

fn evaluate(perm: &[u8; 8], c: &SearchConstraints, rules: &[super::RuleInstance], probe: &FloquetCircuit) -> Option<SearchHit> {
    let gate = lift(perm);
    let ord = gate.order(c.order);
    if !ord.found || c.order % ord.n != 0 {
        return None;
    }
    let circuit = FloquetCircuit::new(gate, c.len, Geometry::Stride4).ok()?;
    if c.require_orbit {
        let maps_onto = c.orbit.iter().all(|&s| {
            let (t, ph) = circuit.apply_index(s);
            c.orbit.contains(&t) && (ph - C64::new(1.0, 0.0)).norm() < 1e-10
        });
        if !maps_onto {
            return None;
        }
    }
    let powers = gate_powers(circuit.gate(), c.order);
    let satisfied = rules
        .iter()
        .filter(|r| check_type1_with(&powers, c.len, c.orbit[r.orbit_index], rule_sites(probe, r.site), r.powers))
        .count();
    Some(SearchHit { perm: *perm, permutation_cycles: circuit.gate().cycles(), satisfied, total: rules.len() })
}

/// Ranks every admissible gate by the number of satisfied type I rules.
/// Output order is (satisfied desc, permutation asc) regardless of threads.
pub fn search_models(c: &SearchConstraints) -> Result<Vec<SearchHit>> {
    if !c.trivial_last_qubit {
        return Err(Error::Input("only gates trivial on the last qubit can be enumerated".into()));
    }
    if c.order == 0 {
        return Err(Error::Input("order must be positive".into()));
    }
    let probe = FloquetCircuit::new(PermutationGate::identity(4), c.len, Geometry::Stride4)?;
    let rules = enumerate_rules(&probe, &c.orbit, RuleKind::I, c.order);
    let total = FACTORIALS[8];
    let mut hits: Vec<SearchHit> = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .flat_map_iter(|chunk| {
            let mut p = nth_permutation(chunk * CHUNK);
            let count = CHUNK.min(total - chunk * CHUNK);
            let mut out = Vec::new();
            for k in 0..count {
                if k > 0 {
                    next_permutation(&mut p);
                }
                if let Some(hit) = evaluate(&p, c, &rules, &probe) {
                    out.push(hit);
                }
            }
            out
        })
        .collect();
    hits.sort_by(|a, b| b.satisfied.cmp(&a.satisfied).then(a.perm.cmp(&b.perm)));
    Ok(hits)
}
