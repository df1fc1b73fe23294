//! Local permutation-with-phase gates `U₀|q⟩ = ph_q |σ(q)⟩`.
//!
//! Labels follow the 1-based convention (`label = window value + 1`); the
//! in-memory tables are indexed by window value.

use serde::{Deserialize, Serialize};

use crate::basis::{self, BasisState, PhasedState};
use crate::dense::DMat;
use crate::{Error, Result, C64};

/// Tolerance for "this phase equals one".
pub const PHASE_TOL: f64 = 1e-10;
const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PermutationGate {
    width: usize,
    perm: Vec<usize>,
    phases: Vec<C64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GateOrder {
    pub n: usize,
    pub found: bool,
}

impl PermutationGate {
    pub fn identity(width: usize) -> Self {
        let d = 1 << width;
        Self { width, perm: (0..d).collect(), phases: vec![C64::new(1.0, 0.0); d] }
    }

    /// Builds a gate from cycles of 1-based labels and a phase per label.
    pub fn from_cycles(width: usize, cycles: &[Vec<usize>], phases: Vec<C64>) -> Result<Self> {
        if !(1..=8).contains(&width) {
            return Err(Error::Gate(format!("unsupported width {width}")));
        }
        let d = 1 << width;
        if phases.len() != d {
            return Err(Error::Gate(format!("expected {d} phases, got {}", phases.len())));
        }
        if let Some((q, p)) = phases.iter().enumerate().find(|(_, p)| (p.norm() - 1.0).abs() > UNIT_TOL) {
            return Err(Error::Gate(format!("phase {p} of label {} is not unit modulus", q + 1)));
        }
        let mut perm: Vec<usize> = (0..d).collect();
        let mut seen = vec![false; d];
        for cycle in cycles {
            for &label in cycle {
                if label == 0 || label > d {
                    return Err(Error::Gate(format!("label {label} out of range 1..={d}")));
                }
                if std::mem::replace(&mut seen[label - 1], true) {
                    return Err(Error::Gate(format!("label {label} appears twice")));
                }
            }
            for (k, &label) in cycle.iter().enumerate() {
                let next = cycle[(k + 1) % cycle.len()];
                perm[label - 1] = next - 1;
            }
        }
        Ok(Self { width, perm, phases })
    }

    /// Builds a gate from an explicit value permutation (0-based).
    pub fn from_permutation(width: usize, perm: Vec<usize>, phases: Vec<C64>) -> Result<Self> {
        let d = 1 << width;
        if perm.len() != d || phases.len() != d {
            return Err(Error::Gate("table length does not match width".into()));
        }
        let mut seen = vec![false; d];
        for &p in &perm {
            if p >= d || std::mem::replace(&mut seen[p], true) {
                return Err(Error::Gate("not a bijection".into()));
            }
        }
        Ok(Self { width, perm, phases })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dim(&self) -> usize {
        1 << self.width
    }

    /// `σ` as window values.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn phases(&self) -> &[C64] {
        &self.phases
    }

    /// `(σ(q), ph_q)` for a window value `q`.
    #[inline]
    pub fn act(&self, q: usize) -> (usize, C64) {
        (self.perm[q], self.phases[q])
    }

    /// All cycles as window values, fixed points included, each starting at
    /// its smallest member, ordered by that member.
    pub fn value_cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.dim()];
        let mut out = Vec::new();
        for start in 0..self.dim() {
            if seen[start] {
                continue;
            }
            let mut cyc = vec![start];
            seen[start] = true;
            let mut q = self.perm[start];
            while q != start {
                seen[q] = true;
                cyc.push(q);
                q = self.perm[q];
            }
            out.push(cyc);
        }
        out
    }

    /// Nontrivial cycles in 1-based label notation.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        self.value_cycles()
            .into_iter()
            .filter(|c| c.len() > 1)
            .map(|c| c.into_iter().map(basis::label_of).collect())
            .collect()
    }

    /// `U₀^s`.
    pub fn power(&self, s: usize) -> Self {
        let mut out = Self::identity(self.width);
        for q in 0..self.dim() {
            let (mut r, mut ph) = (q, C64::new(1.0, 0.0));
            for _ in 0..s {
                let (r2, p) = self.act(r);
                ph *= p;
                r = r2;
            }
            out.perm[q] = r;
            out.phases[q] = ph;
        }
        out
    }

    /// Smallest `n ≤ n_max` with `U₀ⁿ = 𝟙`.
    pub fn order(&self, n_max: usize) -> GateOrder {
        let one = C64::new(1.0, 0.0);
        let mut state: Vec<(usize, C64)> = (0..self.dim()).map(|q| (q, one)).collect();
        for n in 1..=n_max {
            for (q, ph) in state.iter_mut() {
                let (r, p) = self.act(*q);
                *q = r;
                *ph *= p;
            }
            if state.iter().enumerate().all(|(q, (r, ph))| *r == q && (ph - one).norm() < PHASE_TOL) {
                return GateOrder { n, found: true };
            }
        }
        GateOrder { n: n_max, found: false }
    }

    /// Applies the gate to the window starting at 0-based `site`.
    #[inline]
    pub fn apply_index(&self, index: u64, len: usize, site: usize) -> (u64, C64) {
        let q = basis::window(index, len, site, self.width);
        let (r, ph) = self.act(q);
        (basis::set_window(index, len, site, self.width, r), ph)
    }

    pub fn apply(&self, state: BasisState, site: usize) -> PhasedState {
        let (idx, phase) = self.apply_index(state.index(), state.len(), site);
        PhasedState { state: BasisState::new(idx, state.len()).expect("same chain"), phase }
    }

    /// Dense matrix with entry `ph_q` at `(σ(q), q)`.
    pub fn matrix(&self) -> DMat {
        let mut m = crate::dense::zeros(self.dim(), self.dim());
        for q in 0..self.dim() {
            m[(self.perm[q], q)] = self.phases[q];
        }
        m
    }

    /// Whether every phase is one.
    pub fn is_phase_free(&self) -> bool {
        self.phases.iter().all(|p| (p - C64::new(1.0, 0.0)).norm() < PHASE_TOL)
    }

    pub fn to_spec(&self) -> GateSpec {
        GateSpec {
            width: self.width,
            cycles: self.cycles(),
            phases: self.phases.iter().map(|p| [p.re, p.im]).collect(),
        }
    }
}

/// On-disk gate definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    pub width: usize,
    pub cycles: Vec<Vec<usize>>,
    pub phases: Vec<[f64; 2]>,
}

impl GateSpec {
    pub fn build(&self) -> Result<PermutationGate> {
        let phases = self.phases.iter().map(|p| C64::new(p[0], p[1])).collect();
        PermutationGate::from_cycles(self.width, &self.cycles, phases)
    }
}

/// Parses cycle notation such as `((1,3,8),(2,4))`; `()` is the empty list.
pub fn parse_cycles(text: &str) -> Result<Vec<Vec<usize>>> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let inner = s
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| Error::Gate(format!("cycle list must be parenthesized: {text}")))?;
    let mut out = Vec::new();
    let mut rest = inner;
    while !rest.is_empty() {
        let body = rest
            .strip_prefix('(')
            .ok_or_else(|| Error::Gate(format!("expected '(' in {text}")))?;
        let end = body.find(')').ok_or_else(|| Error::Gate(format!("unclosed cycle in {text}")))?;
        let cycle = body[..end]
            .split(',')
            .map(|t| t.parse::<usize>().map_err(|_| Error::Gate(format!("bad label '{t}'"))))
            .collect::<Result<Vec<_>>>()?;
        out.push(cycle);
        rest = &body[end + 1..];
        rest = rest.strip_prefix(',').unwrap_or(rest);
    }
    Ok(out)
}

/// Parses cycle notation and builds the gate.
pub fn parse_gate(width: usize, cycles: &str, phases: Vec<C64>) -> Result<PermutationGate> {
    PermutationGate::from_cycles(width, &parse_cycles(cycles)?, phases)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(d: usize) -> Vec<C64> {
        vec![C64::new(1.0, 0.0); d]
    }

    fn pxp_phases() -> Vec<C64> {
        let i = C64::new(0.0, 1.0);
        let mut p = ones(16);
        for label in [11, 12, 15, 16] {
            p[label - 1] = i;
        }
        p
    }

    #[test]
    fn parses_example_cycles() {
        let g = parse_gate(4, "((1,3,8),(2,4))", ones(16)).unwrap();
        let lab = |l: usize| g.act(l - 1).0 + 1;
        assert_eq!((lab(1), lab(3), lab(8), lab(2), lab(4), lab(5)), (3, 8, 1, 4, 2, 5));
        assert_eq!(g.cycles(), vec![vec![1, 3, 8], vec![2, 4]]);
    }

    #[test]
    fn empty_cycles_is_identity() {
        let g = parse_gate(4, "()", ones(16)).unwrap();
        assert_eq!(g, PermutationGate::identity(4));
        assert_eq!(g.order(64), GateOrder { n: 1, found: true });
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_gate(4, "((1,2),(2,3))", ones(16)).is_err());
        assert!(parse_gate(4, "((1,17))", ones(16)).is_err());
        assert!(parse_gate(4, "((1,2))", ones(15)).is_err());
        let mut p = ones(16);
        p[3] = C64::new(1.1, 0.0);
        assert!(parse_gate(4, "((1,2))", p).is_err());
        assert!(parse_cycles("(1,2)").is_err());
    }

    #[test]
    fn pxp_gate_actions() {
        let g = parse_gate(4, "((11,15),(12,16))", pxp_phases()).unwrap();
        // |1010⟩ = label 11 -> i |1110⟩
        let (r, ph) = g.act(0b1010);
        assert_eq!(r, 0b1110);
        assert!((ph - C64::new(0.0, 1.0)).norm() < 1e-15);
        let (r, ph) = g.act(0b1011);
        assert_eq!(basis::label_of(r), 16);
        assert!((ph - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(g.order(64), GateOrder { n: 4, found: true });
        let m4 = crate::dense::power(&g.matrix(), 4);
        assert!(crate::dense::max_abs_diff(&m4, &crate::dense::identity(16)) < 1e-14);
    }

    #[test]
    fn qmbs_a_apply_on_chain() {
        let g = parse_gate(4, "((3,13,11,7,9,5),(4,14,12,8,10,6))", ones(16)).unwrap();
        assert_eq!(g.order(64), GateOrder { n: 6, found: true });
        let s = BasisState::from_bits("00100000").unwrap();
        let out = g.apply(s, 0);
        assert_eq!(basis::label_of(basis::window(out.state.index(), 8, 0, 4)), 13);
        assert_eq!(out.state.bits(), "11000000");
        assert_eq!(out.phase, C64::new(1.0, 0.0));
    }

    #[test]
    fn no_finite_order_is_a_value() {
        let mut p = ones(16);
        p[0] = C64::from_polar(1.0, 1.0);
        let g = PermutationGate::from_cycles(4, &[], p).unwrap();
        assert!(!g.order(64).found);
    }

    #[test]
    fn spec_round_trip() {
        let g = parse_gate(4, "((11,15),(12,16))", pxp_phases()).unwrap();
        let json = serde_json::to_string(&g.to_spec()).unwrap();
        let back: GateSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back.build().unwrap(), g);
    }
}
