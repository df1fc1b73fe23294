//! Local commutation rules on orbit states.
//!
//! A rule compares `U_j^{s₁} U_{j+2d}^{s₃} U_{j+d}^{s₂}|ψ⟩` with
//! `U_{j+d}^{s₂} U_j^{s₁} U_{j+2d}^{s₃}|ψ⟩`, where `d` is the distance between
//! neighbouring A and B gates (2 for stride-4 circuits, 1 for stride-2).
//! Type I rules use powers of the gate, type II rules powers of `h₀`.

mod search;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use search::{lift, search_models, SearchConstraints, SearchHit};

use crate::automaton::FloquetCircuit;
use crate::basis;
use crate::gate::{PermutationGate, PHASE_TOL};
use crate::logmap::LocalHamiltonian;
use crate::{Result, C64};

/// Default type II threshold on the residual 2-norm.
pub const TYPE2_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RuleKind {
    I,
    II,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RuleInstance {
    pub kind: RuleKind,
    /// 0-based site of the first gate.
    pub site: usize,
    pub powers: [usize; 3],
    /// Position of the state in the orbit.
    pub orbit_index: usize,
}

impl RuleInstance {
    pub fn is_nontrivial(&self) -> bool {
        self.powers[1] != 0 && (self.powers[0] != 0 || self.powers[2] != 0)
    }
}

fn rule_sites(circuit: &FloquetCircuit, site: usize) -> [usize; 3] {
    let d = circuit.geometry().offset();
    let len = circuit.len();
    [site % len, (site + d) % len, (site + 2 * d) % len]
}

/// Gate powers `U₀^s` for `s < n`.
pub fn gate_powers(g: &PermutationGate, n: usize) -> Vec<PermutationGate> {
    (0..n).map(|s| g.power(s)).collect()
}

fn apply_power(p: &PermutationGate, state: (u64, C64), len: usize, site: usize) -> (u64, C64) {
    let (idx, ph) = p.apply_index(state.0, len, site);
    (idx, state.1 * ph)
}

/// Type I check with precomputed gate powers.
pub fn check_type1_with(powers: &[PermutationGate], len: usize, state: u64, sites: [usize; 3], s: [usize; 3]) -> bool {
    let one = (state, C64::new(1.0, 0.0));
    let l = apply_power(&powers[s[1]], one, len, sites[1]);
    let l = apply_power(&powers[s[2]], l, len, sites[2]);
    let l = apply_power(&powers[s[0]], l, len, sites[0]);
    let r = apply_power(&powers[s[2]], one, len, sites[2]);
    let r = apply_power(&powers[s[0]], r, len, sites[0]);
    let r = apply_power(&powers[s[1]], r, len, sites[1]);
    l.0 == r.0 && (l.1 - r.1).norm() < PHASE_TOL
}

pub fn check_type1(circuit: &FloquetCircuit, state: u64, rule: &RuleInstance) -> bool {
    let n = rule.powers.iter().max().copied().unwrap_or(0) + 1;
    let powers = gate_powers(circuit.gate(), n);
    check_type1_with(&powers, circuit.len(), state, rule_sites(circuit, rule.site), rule.powers)
}

type SparseVec = BTreeMap<u64, C64>;

fn apply_local(h: &[Vec<(usize, C64)>], v: &SparseVec, len: usize, width: usize, site: usize, times: usize) -> SparseVec {
    let mut cur = v.clone();
    for _ in 0..times {
        let mut next = SparseVec::new();
        for (&x, &a) in &cur {
            let q = basis::window(x, len, site, width);
            for &(r, hv) in &h[q] {
                *next.entry(basis::set_window(x, len, site, width, r)).or_default() += hv * a;
            }
        }
        cur = next;
    }
    cur
}

/// `‖LHS − RHS‖₂` of a type II rule.
pub fn check_type2(circuit: &FloquetCircuit, h: &LocalHamiltonian, state: u64, rule: &RuleInstance) -> f64 {
    let cols = h.columns();
    let len = circuit.len();
    let w = circuit.gate().width();
    let sites = rule_sites(circuit, rule.site);
    let s = rule.powers;
    let start = SparseVec::from([(state, C64::new(1.0, 0.0))]);
    let l = apply_local(&cols, &start, len, w, sites[1], s[1]);
    let l = apply_local(&cols, &l, len, w, sites[2], s[2]);
    let l = apply_local(&cols, &l, len, w, sites[0], s[0]);
    let r = apply_local(&cols, &start, len, w, sites[2], s[2]);
    let r = apply_local(&cols, &r, len, w, sites[0], s[0]);
    let r = apply_local(&cols, &r, len, w, sites[1], s[1]);
    let mut diff = l;
    for (k, v) in r {
        *diff.entry(k).or_default() -= v;
    }
    diff.values().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// `l (n-1)(n²-1)`, multiplied by `L/2` when the orbit states are not
/// invariant under translation by two sites.
pub fn count_relevant_rules(l: usize, n: usize, translation_invariant: bool, len: usize) -> usize {
    if n == 0 {
        return 0;
    }
    let base = l * (n - 1) * (n * n - 1);
    if translation_invariant {
        base
    } else {
        base * len / 2
    }
}

/// Orbit states with the rule positions assigned to each. A state related to
/// an earlier one by a translation that is a multiple of the gate offset is
/// skipped; each kept state contributes one position per offset step of its
/// translation period.
pub fn rule_positions(circuit: &FloquetCircuit, orbit: &[u64]) -> Vec<(usize, Vec<usize>)> {
    let len = circuit.len();
    let d = circuit.geometry().offset();
    let mut kept: Vec<u64> = Vec::new();
    let mut out = Vec::new();
    for (k, &s) in orbit.iter().enumerate() {
        let equivalent = kept.iter().any(|&t| (0..len / d).any(|m| basis::translate(t, len, m * d) == s));
        if equivalent {
            continue;
        }
        kept.push(s);
        let period = (1..=len / d).find(|&m| basis::translate(s, len, m * d) == s).unwrap_or(len / d);
        out.push((k, (0..period).map(|m| m * d).collect()));
    }
    out
}

/// Every nontrivial instance over the orbit with powers below `n`.
pub fn enumerate_rules(circuit: &FloquetCircuit, orbit: &[u64], kind: RuleKind, n: usize) -> Vec<RuleInstance> {
    let mut out = Vec::new();
    for (k, sites) in rule_positions(circuit, orbit) {
        for site in sites {
            for s1 in 0..n {
                for s2 in 1..n {
                    for s3 in 0..n {
                        if s1 == 0 && s3 == 0 {
                            continue;
                        }
                        out.push(RuleInstance { kind, site, powers: [s1, s2, s3], orbit_index: k });
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct RuleOutcome {
    pub rule: RuleInstance,
    pub residual: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RuleReport {
    pub kind: RuleKind,
    pub satisfied: usize,
    pub total: usize,
    pub outcomes: Vec<RuleOutcome>,
}

/// Type I rules use powers below the gate order; type II rules use powers
/// below the closing power of `h₀`.
pub fn rule_report(
    circuit: &FloquetCircuit,
    orbit: &[u64],
    kind: RuleKind,
    n: usize,
    h: Option<&LocalHamiltonian>,
    tol: f64,
) -> Result<RuleReport> {
    let rules = enumerate_rules(circuit, orbit, kind, n);
    let powers = gate_powers(circuit.gate(), n);
    let owned;
    let h = match (kind, h) {
        (RuleKind::II, None) => {
            owned = crate::logmap::principal_log(circuit.gate())?;
            Some(&owned)
        }
        (_, h) => h,
    };
    let outcomes: Vec<RuleOutcome> = rules
        .into_iter()
        .map(|rule| {
            let state = orbit[rule.orbit_index];
            match kind {
                RuleKind::I => {
                    let ok = check_type1_with(&powers, circuit.len(), state, rule_sites(circuit, rule.site), rule.powers);
                    RuleOutcome { rule, residual: if ok { 0.0 } else { 1.0 }, satisfied: ok }
                }
                RuleKind::II => {
                    let r = check_type2(circuit, h.expect("set above"), state, &rule);
                    RuleOutcome { rule, residual: r, satisfied: r < tol }
                }
            }
        })
        .collect();
    Ok(RuleReport {
        kind,
        satisfied: outcomes.iter().filter(|o| o.satisfied).count(),
        total: outcomes.len(),
        outcomes,
    })
}
