//! Built-in model registry, spin-operator forms of the local Hamiltonians,
//! and model-specific checks.
//!
//! Model files use the gate JSON schema plus `geometry`, `orbit_seeds` (bit
//! patterns tiled along the chain) and optional `expected` reference data.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::automaton::{FloquetCircuit, Geometry, OrbitCycle};
use crate::basis::{self, BasisState};
use crate::dense::{self, DMat};
use crate::gate::{GateSpec, PermutationGate};
use crate::hamiltonian::build_hamiltonian;
use crate::logmap::principal_log;
use crate::rules::RuleKind;
use crate::sparse::{SparseOperator, DROP_TOL};
use crate::{Error, Result, C64};

const REGISTRY: [(&str, &str); 5] = [
    ("qmbs-a", include_str!("../models/qmbs-a.json")),
    ("qmbs-b", include_str!("../models/qmbs-b.json")),
    ("qmbs-c", include_str!("../models/qmbs-c.json")),
    ("pxp", include_str!("../models/pxp.json")),
    ("pxp-nophase", include_str!("../models/pxp-nophase.json")),
];

const SGA_GUARD: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expected {
    pub rule_type: RuleKind,
    /// Satisfied and total rule counts on the protected orbit.
    pub rule_ratio: [usize; 2],
    /// Gate order.
    pub n: usize,
    /// Number of powers entering the rules (the gate order for type I, the
    /// closing power of `h₀` for type II).
    pub rule_powers: usize,
    /// `c_k` of `h₀ = Σ c_k U₀^k`.
    pub coefficients: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDefinition {
    pub name: String,
    #[serde(flatten)]
    pub gate: GateSpec,
    pub geometry: Geometry,
    pub orbit_seeds: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<Expected>,
}

pub fn registry_names() -> Vec<&'static str> {
    REGISTRY.iter().map(|(n, _)| *n).collect()
}

pub fn load_model(name: &str) -> Result<ModelDefinition> {
    let (_, text) = REGISTRY
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::UnknownModel(name.to_string()))?;
    let m: ModelDefinition = serde_json::from_str(text)?;
    m.gate.build()?;
    Ok(m)
}

pub fn from_file(path: &Path) -> Result<ModelDefinition> {
    let m: ModelDefinition = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    m.gate.build()?;
    if m.orbit_seeds.is_empty() {
        return Err(Error::Input(format!("{}: no orbit seeds", path.display())));
    }
    Ok(m)
}

/// A registry name, or else a path to a model file.
pub fn resolve(spec: &str) -> Result<ModelDefinition> {
    if REGISTRY.iter().any(|(n, _)| *n == spec) {
        return load_model(spec);
    }
    let path = Path::new(spec);
    if path.is_file() {
        return from_file(path);
    }
    Err(Error::UnknownModel(spec.to_string()))
}

/// Repeats a bit pattern to length `len`.
pub fn tile(pattern: &str, len: usize) -> Result<BasisState> {
    if pattern.is_empty() || !pattern.chars().all(|c| c == '0' || c == '1') {
        return Err(Error::Input(format!("bad seed pattern '{pattern}'")));
    }
    let bits: String = pattern.chars().cycle().take(len).collect();
    BasisState::from_bits(&bits)
}

impl ModelDefinition {
    pub fn build_gate(&self) -> Result<PermutationGate> {
        self.gate.build()
    }

    pub fn circuit(&self, len: usize) -> Result<FloquetCircuit> {
        FloquetCircuit::new(self.build_gate()?, len, self.geometry)
    }

    pub fn seed(&self, len: usize) -> Result<BasisState> {
        let first = self.orbit_seeds.first().ok_or_else(|| Error::Input("model has no orbit seeds".into()))?;
        tile(first, len)
    }

    /// Orbit of the first seed under `U_F`.
    pub fn orbit(&self, len: usize) -> Result<OrbitCycle> {
        let l_max = 1usize << len.min(20);
        self.circuit(len)?.orbit_of(self.seed(len)?, l_max)
    }

    /// Néel state `|1010…⟩` at this length.
    pub fn neel(&self, len: usize) -> Result<BasisState> {
        BasisState::neel(len, 1)
    }

    pub fn expected_coefficients(&self) -> Option<Vec<C64>> {
        self.expected.as_ref().map(|e| e.coefficients.iter().map(|c| C64::new(c[0], c[1])).collect())
    }
}

/// Closed-form Krylov dimension from the Néel state for the registry models.
pub fn neff_formula(name: &str, len: usize) -> Option<u64> {
    match name {
        "pxp" | "pxp-nophase" => Some(lucas(len)),
        "qmbs-a" => Some(1u64 << len),
        "qmbs-b" => Some(
            (0..=len)
                .filter(|&k| (len / 2).abs_diff(k) % 3 == 0)
                .map(|k| binomial(len as u64, k as u64))
                .sum(),
        ),
        "qmbs-c" => Some(1u64 << (len / 2)),
        _ => None,
    }
}

/// `F_{L+1} + F_{L-1}`.
fn lucas(len: usize) -> u64 {
    let (mut a, mut b) = (2u64, 1u64);
    for _ in 0..len {
        (a, b) = (b, a + b);
    }
    a
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

type M2 = [[f64; 2]; 2];
const I2: M2 = [[1.0, 0.0], [0.0, 1.0]];
const X: M2 = [[0.0, 1.0], [1.0, 0.0]];
const Z: M2 = [[1.0, 0.0], [0.0, -1.0]];
/// `S⁺|0⟩ = |1⟩`.
const SP: M2 = [[0.0, 0.0], [1.0, 0.0]];
const SM: M2 = [[0.0, 1.0], [0.0, 0.0]];
/// `|1⟩⟨1|`.
const P1: M2 = [[0.0, 0.0], [0.0, 1.0]];
const P0: M2 = [[1.0, 0.0], [0.0, 0.0]];

/// Product of single-qubit operators on a 4-qubit window; qubit 0 is the
/// most significant.
fn local(ops: &[(usize, M2)]) -> DMat {
    let mut out = dense::identity(1);
    for q in 0..4 {
        let m = ops.iter().find(|(k, _)| *k == q).map_or(I2, |(_, m)| *m);
        let m = DMat::from_fn(2, 2, |r, c| C64::new(m[r][c], 0.0));
        out = dense::kron(&out, &m);
    }
    out
}

fn real(a: &DMat, s: f64) -> DMat {
    dense::scale(a, C64::new(s, 0.0))
}

/// Operator whose match with the automaton data is checked.
#[derive(Debug, Clone)]
pub enum SpinForm {
    /// Compared with the principal logarithm `h₀`.
    Hamiltonian(DMat),
    /// Compared with the gate matrix `U₀`.
    Unitary(DMat),
}

fn pxp_form() -> DMat {
    real(&local(&[(0, P1), (1, X), (2, P1)]), -PI / 2.0)
}

fn triple_flip() -> DMat {
    &local(&[(0, SP), (1, SP), (2, SP)]) + &local(&[(0, SM), (1, SM), (2, SM)])
}

fn qmbs_b_form() -> DMat {
    let sss = triple_flip();
    let ends = &sss * &sss;
    let hop = &(&local(&[(0, SM), (1, SP)]) + &local(&[(1, SM), (2, SP)])) + &local(&[(2, SM), (0, SP)]);
    let amp = C64::new(0.0, 4.0 * PI / (6.0 * 3f64.sqrt()));
    let t = &(&real(&sss, PI / 4.0) + &dense::scale(&hop, amp)) - &real(&ends, PI / 4.0);
    &t + &dense::adjoint(&t)
}

fn qmbs_c_form() -> DMat {
    let id = dense::identity(16);
    let zz = &local(&[(1, Z)]) * &local(&[(2, Z)]);
    let p = real(&(&id - &zz), 0.5);
    let q = &id - &p;
    let k = |site: usize| real(&(&id + &local(&[(site, Z)])), 0.5);
    let (k0, k1) = (k(0), k(1));
    let x12 = local(&[(1, X), (2, X)]);
    let left = &k1 + &(&(&id - &k1) * &local(&[(0, X)]));
    let right = &k0 + &(&(&id - &k0) * &x12);
    let half = &dense::scale(&(&left * &right), C64::new(0.0, 4.0 * PI / (6.0 * 3f64.sqrt()))) + &real(&id, PI / 4.0);
    let ext = &half + &dense::adjoint(&half);
    let embedded = real(&(&(&p * &x12) * &p), PI / 2.0);
    &(&embedded + &(&(&q * &ext) * &q)) - &real(&id, PI / 2.0)
}

fn qmbs_a_unitary() -> DMat {
    let sss = triple_flip();
    let terms = [
        local(&[(0, SP), (1, SP), (2, SM)]),
        local(&[(0, SP), (1, SM), (2, SM)]),
        local(&[(0, P1), (1, SM), (2, SP)]),
        local(&[(0, SM), (1, SP), (2, P1)]),
        local(&[(0, SM), (1, SP), (2, P0)]),
        local(&[(0, P0), (1, SM), (2, SP)]),
        &sss * &sss,
    ];
    terms.iter().fold(dense::zeros(16, 16), |acc, t| &acc + t)
}

/// Spin-operator form for models that have one.
pub fn spin_representation(name: &str) -> Option<SpinForm> {
    match name {
        "pxp" => Some(SpinForm::Hamiltonian(pxp_form())),
        "qmbs-a" => Some(SpinForm::Unitary(qmbs_a_unitary())),
        "qmbs-b" => Some(SpinForm::Hamiltonian(qmbs_b_form())),
        "qmbs-c" => Some(SpinForm::Hamiltonian(qmbs_c_form())),
        "identity" => Some(SpinForm::Hamiltonian(dense::zeros(16, 16))),
        _ => None,
    }
}

/// Largest elementwise deviation between the spin form and the automaton.
pub fn verify_spin_representation(m: &ModelDefinition) -> Result<f64> {
    let form = spin_representation(&m.name)
        .ok_or_else(|| Error::Input(format!("model '{}' has no spin representation", m.name)))?;
    let gate = m.build_gate()?;
    if gate.width() != 4 {
        return Err(Error::Dimension("spin forms are defined on 4-qubit windows".into()));
    }
    Ok(match form {
        SpinForm::Hamiltonian(h) => dense::max_abs_diff(&principal_log(&gate)?.matrix, &h),
        SpinForm::Unitary(u) => dense::max_abs_diff(&gate.matrix(), &u),
    })
}

/// 0-based site pairs `(2j-1, 2j)` (periodic) on which the embedded block
/// acts as `X X`.
pub fn sga_pairs(len: usize) -> Vec<(usize, usize)> {
    (1..=len / 2).map(|j| (2 * j - 1, (2 * j) % len)).collect()
}

/// States with opposite bits on every pair of `sga_pairs`.
pub fn w_states(len: usize) -> Vec<u64> {
    let pairs = sga_pairs(len);
    (0..1u64 << len)
        .filter(|&x| pairs.iter().all(|&(a, b)| basis::bit(x, len, a) != basis::bit(x, len, b)))
        .collect()
}

fn pair_mask(len: usize, a: usize, b: usize) -> u64 {
    (1u64 << (len - 1 - a)) | (1u64 << (len - 1 - b))
}

/// `Q† = Σ_j Z_a (I - X_a X_b)` over `sga_pairs`.
pub fn raising_operator(len: usize) -> SparseOperator {
    let dim = 1usize << len;
    let z = |x: u64, a: usize| if basis::bit(x, len, a) == 0 { 1.0 } else { -1.0 };
    let mut t = Vec::new();
    for x in 0..dim as u64 {
        for &(a, b) in &sga_pairs(len) {
            let y = x ^ pair_mask(len, a, b);
            t.push((x as usize, x as usize, C64::new(z(x, a), 0.0)));
            t.push((y as usize, x as usize, C64::new(-z(y, a), 0.0)));
        }
    }
    SparseOperator::from_triplets(dim, dim, t, DROP_TOL)
}

fn qmbs_c_hamiltonian(len: usize) -> Result<SparseOperator> {
    if len > SGA_GUARD {
        return Err(Error::Guard(format!("full-space QMBS-C operator at L = {len}"), SGA_GUARD));
    }
    let circuit = load_model("qmbs-c")?.circuit(len)?;
    Ok(build_hamiltonian(&circuit, &basis::BasisSubset::full(len)?)?.h)
}

/// `max_w ‖([H, Q†] - ε Q†)|w⟩‖` over the W states of QMBS-C.
pub fn sga_residual(len: usize, eps: f64) -> Result<f64> {
    let h = qmbs_c_hamiltonian(len)?;
    let q = raising_operator(len);
    let m = h.matmul(&q, 0.0)?.sub(&q.matmul(&h, 0.0)?)?.sub(&q.scale(C64::new(eps, 0.0)))?;
    let cols = m.adjoint();
    Ok(w_states(len)
        .into_iter()
        .map(|w| cols.row(w as usize).1.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max))
}

/// Largest deviation of `H` on the W states from `Σ (π/2 X_a X_b - π/2)`.
pub fn embedded_block_deviation(len: usize) -> Result<f64> {
    let h = qmbs_c_hamiltonian(len)?;
    let w = w_states(len);
    let pos: Vec<usize> = w.iter().map(|&x| x as usize).collect();
    let block = h.block(&pos, &pos).to_dense();
    let pairs = sga_pairs(len);
    let target = DMat::from_fn(w.len(), w.len(), |r, c| {
        let mut v = 0.0;
        if r == c {
            v -= PI / 2.0 * pairs.len() as f64;
        }
        if pairs.iter().any(|&(a, b)| w[c] ^ pair_mask(len, a, b) == w[r]) {
            v += PI / 2.0;
        }
        C64::new(v, 0.0)
    });
    Ok(dense::max_abs_diff(&block, &target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::krylov_subspace;
    use crate::logmap::power_decomposition;

    #[test]
    fn registry_loads() {
        for name in registry_names() {
            let m = load_model(name).unwrap();
            assert_eq!(m.name, name);
        }
        assert!(matches!(load_model("qmbs-d"), Err(Error::UnknownModel(_))));
        assert!(matches!(resolve("/no/such/model.json"), Err(Error::UnknownModel(_))));
    }

    #[test]
    fn json_round_trip_preserves_gate() {
        for name in registry_names() {
            let m = load_model(name).unwrap();
            let back: ModelDefinition = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
            assert_eq!(back, m);
            assert_eq!(back.build_gate().unwrap().to_spec(), m.gate);
        }
    }

    #[test]
    fn pxp_variants_share_permutation() {
        let a = load_model("pxp").unwrap().build_gate().unwrap();
        let b = load_model("pxp-nophase").unwrap().build_gate().unwrap();
        assert_eq!(a.permutation(), b.permutation());
        assert!(b.is_phase_free() && !a.is_phase_free());
        assert_eq!(load_model("pxp").unwrap().orbit(12).unwrap().length(), 3);
    }

    #[test]
    fn seeds_tile() {
        assert_eq!(tile("10", 6).unwrap().bits(), "101010");
        assert_eq!(tile("1", 4).unwrap().bits(), "1111");
        assert!(tile("12", 4).is_err());
    }

    #[test]
    fn spin_forms_match() {
        for name in ["pxp", "qmbs-a", "qmbs-b", "qmbs-c"] {
            let d = verify_spin_representation(&load_model(name).unwrap()).unwrap();
            assert!(d < 1e-12, "{name}: {d}");
        }
        let mut id = load_model("qmbs-a").unwrap();
        id.name = "identity".into();
        id.gate = PermutationGate::identity(4).to_spec();
        assert_eq!(verify_spin_representation(&id).unwrap(), 0.0);
        assert!(verify_spin_representation(&load_model("pxp-nophase").unwrap()).is_err());
    }

    #[test]
    fn stored_coefficients_match_decomposition() {
        for name in registry_names() {
            let m = load_model(name).unwrap();
            let Some(expected) = m.expected_coefficients() else { continue };
            let d = power_decomposition(&m.build_gate().unwrap()).unwrap();
            assert_eq!(d.n, m.expected.as_ref().unwrap().n);
            for (a, b) in d.coefficients.iter().zip(&expected) {
                assert!((a - b).norm() < 1e-12, "{name}");
            }
        }
    }

    #[test]
    fn neff_closed_forms() {
        let pxp = load_model("pxp").unwrap();
        let k = krylov_subspace(&pxp.circuit(10).unwrap(), pxp.neel(10).unwrap().index()).unwrap();
        assert_eq!(k.dim() as u64, neff_formula("pxp", 10).unwrap());
        assert_eq!(neff_formula("pxp", 16), Some(2207));
        assert_eq!(neff_formula("qmbs-b", 12), Some(1366));
        assert_eq!(neff_formula("qmbs-c", 12), Some(64));
        for len in [8, 12] {
            for name in ["pxp", "qmbs-b", "qmbs-c"] {
                let m = load_model(name).unwrap();
                let k = krylov_subspace(&m.circuit(len).unwrap(), m.neel(len).unwrap().index()).unwrap();
                assert_eq!(k.dim() as u64, neff_formula(name, len).unwrap(), "{name} L={len}");
            }
        }
    }

    #[test]
    fn sga_holds_only_at_pi() {
        assert_eq!(w_states(8).len(), 16);
        assert!(sga_residual(8, PI).unwrap() < 1e-10);
        assert!(sga_residual(8, 3.0).unwrap() > 0.1);
        assert!(embedded_block_deviation(8).unwrap() < 1e-12);
    }
}
