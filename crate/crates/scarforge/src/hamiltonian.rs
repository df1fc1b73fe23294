//! Assembly of `A`, `B` and `H = A + B` over basis subsets, Krylov closure,
//! and projection onto `S²`/`U_SM` symmetry sectors.

use std::collections::{HashMap, HashSet, VecDeque};

use rayon::prelude::*;
use serde::Serialize;

use crate::automaton::FloquetCircuit;
use crate::basis::{self, BasisSubset};
use crate::gate::PermutationGate;
use crate::logmap::{principal_log, LocalHamiltonian};
use crate::sparse::{SparseOperator, DROP_TOL};
use crate::{Error, Result, C64};

/// Largest dimension that is diagonalized densely.
pub const DENSE_GUARD: usize = 6000;
const SYMMETRY_TOL: f64 = 1e-9;

/// Rows of `h₀` as `(column, value)` lists, indexed by window value.
fn local_rows(h: &LocalHamiltonian) -> Vec<Vec<(usize, C64)>> {
    (0..h.dim())
        .map(|q| {
            (0..h.dim())
                .filter_map(|r| {
                    let v = h.matrix[(q, r)];
                    (v.norm() > DROP_TOL).then_some((r, v))
                })
                .collect()
        })
        .collect()
}

/// `Σ_{j ∈ sites} h₀,j` restricted to `subset`.
pub fn layer_operator(
    circuit: &FloquetCircuit,
    h: &LocalHamiltonian,
    sites: &[usize],
    subset: &BasisSubset,
) -> Result<SparseOperator> {
    window_sum(h, circuit.len(), sites, subset)
}

/// `Σ_{j ∈ sites} h₀,j` on a chain of length `len`, with no layer structure
/// implied. Used for chain lengths that admit the local terms but not the
/// two-layer circuit.
pub fn window_sum(h: &LocalHamiltonian, len: usize, sites: &[usize], subset: &BasisSubset) -> Result<SparseOperator> {
    if subset.chain_len() != len {
        return Err(Error::Dimension("subset has a different L".into()));
    }
    let w = h.gate.width();
    let rows_h = local_rows(h);
    let rows: Vec<Vec<(usize, C64)>> = subset
        .states()
        .par_iter()
        .map(|&x| {
            let mut row = Vec::new();
            for &j in sites {
                let q = basis::window(x, len, j, w);
                for &(r, v) in &rows_h[q] {
                    let y = basis::set_window(x, len, j, w, r);
                    let c = subset.position(y).ok_or_else(|| Error::NotClosed(basis::bits_string(y, len)))?;
                    row.push((c, v));
                }
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(SparseOperator::from_rows(subset.dim(), subset.dim(), rows, DROP_TOL))
}

#[derive(Debug, Clone)]
pub struct ChainHamiltonian {
    pub a: SparseOperator,
    pub b: SparseOperator,
    pub h: SparseOperator,
    pub subset: BasisSubset,
}

pub fn build_hamiltonian(circuit: &FloquetCircuit, subset: &BasisSubset) -> Result<ChainHamiltonian> {
    if subset.chain_len() != circuit.len() {
        return Err(Error::Dimension("subset and circuit have different L".into()));
    }
    let h0 = principal_log(circuit.gate())?;
    let a = layer_operator(circuit, &h0, &circuit.a_sites(), subset)?;
    let b = layer_operator(circuit, &h0, &circuit.b_sites(), subset)?;
    let h = a.add(&b)?;
    Ok(ChainHamiltonian { a, b, h, subset: subset.clone() })
}

/// Basis states connected to `seed` through nonzero matrix elements of any
/// single `h₀` window (both layers).
pub fn krylov_subspace(circuit: &FloquetCircuit, seed: u64) -> Result<BasisSubset> {
    let h0 = principal_log(circuit.gate())?;
    let mut sites = circuit.a_sites();
    sites.extend(circuit.b_sites());
    window_krylov(&h0, circuit.len(), &sites, seed)
}

/// Krylov closure of `seed` under the windows `h₀,j`, `j ∈ sites`.
pub fn window_krylov(h0: &LocalHamiltonian, len: usize, sites: &[usize], seed: u64) -> Result<BasisSubset> {
    let w = h0.gate.width();
    let cols = h0.columns();
    let mut seen = HashSet::new();
    let mut queue = VecDeque::from([seed]);
    seen.insert(seed);
    while let Some(x) = queue.pop_front() {
        for &j in sites {
            let q = basis::window(x, len, j, w);
            for &(r, _) in &cols[q] {
                if r != q {
                    let y = basis::set_window(x, len, j, w, r);
                    if seen.insert(y) {
                        queue.push_back(y);
                    }
                }
            }
        }
    }
    BasisSubset::from_states(len, seen.into_iter().collect())
}

/// Krylov subspace and `Σ_j h₀,j` over every `stride/2`-th window of a chain
/// whose length need only be even. On lengths that fit the circuit this is
/// `A + B`.
pub fn uniform_hamiltonian(gate: &PermutationGate, len: usize, step: usize, seed: u64) -> Result<(BasisSubset, SparseOperator)> {
    if step == 0 || len % step != 0 || len < gate.width() {
        return Err(Error::Circuit(format!("L = {len} does not fit windows every {step} sites")));
    }
    let h0 = principal_log(gate)?;
    let sites: Vec<usize> = (0..len).step_by(step).collect();
    let subset = window_krylov(&h0, len, &sites, seed)?;
    let h = window_sum(&h0, len, &sites, &subset)?;
    Ok((subset, h))
}

/// Generators of the sector symmetries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SectorOp {
    /// Translation by two sites.
    Shift2,
    /// `(∏ X) S M`: mirror, shift by one, flip every spin.
    FlipShiftMirror,
}

impl SectorOp {
    pub fn apply(self, index: u64, len: usize) -> u64 {
        match self {
            SectorOp::Shift2 => basis::translate(index, len, 2),
            SectorOp::FlipShiftMirror => {
                basis::flip(basis::translate(basis::mirror(index, len), len, 1), len)
            }
        }
    }

    pub fn parse(text: &str) -> Result<(Self, i8)> {
        let (name, sign) = if let Some(n) = text.strip_suffix("+1") {
            (n, 1)
        } else if let Some(n) = text.strip_suffix("-1") {
            (n, -1)
        } else {
            return Err(Error::Input(format!("sector entry '{text}' needs a +1 or -1 suffix")));
        };
        let op = match name {
            "s2" => SectorOp::Shift2,
            "usm" => SectorOp::FlipShiftMirror,
            _ => return Err(Error::Input(format!("unknown symmetry '{name}'"))),
        };
        Ok((op, sign))
    }
}

/// A joint eigenspace of the listed symmetries.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrySector {
    pub ops: Vec<(SectorOp, i8)>,
}

impl SymmetrySector {
    pub fn new(ops: Vec<(SectorOp, i8)>) -> Self {
        Self { ops }
    }

    /// `s2+1,usm+1` style list.
    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self { ops: text.split(',').map(|t| SectorOp::parse(t.trim())).collect::<Result<_>>()? })
    }

    fn eigenvalue(&self, op: SectorOp) -> Option<f64> {
        self.ops.iter().find(|(o, _)| *o == op).map(|&(_, s)| s as f64)
    }

    /// Group elements `T^a U^b` as (image, character) for one state.
    fn images(&self, x: u64, len: usize) -> Vec<(u64, f64)> {
        let shift = self.eigenvalue(SectorOp::Shift2);
        let usm = self.eigenvalue(SectorOp::FlipShiftMirror);
        let na = if shift.is_some() { len / 2 } else { 1 };
        let nb = if usm.is_some() { 2 } else { 1 };
        let mut out = Vec::with_capacity(na * nb);
        for b in 0..nb {
            let mut y = if b == 1 { SectorOp::FlipShiftMirror.apply(x, len) } else { x };
            let chi_b = if b == 1 { usm.unwrap() } else { 1.0 };
            for a in 0..na {
                let chi = chi_b * shift.map_or(1.0, |s| s.powi(a as i32));
                out.push((y, chi));
                y = SectorOp::Shift2.apply(y, len);
            }
        }
        out
    }
}

/// Symmetry-adapted orthonormal basis: one vector per orbit with nonzero
/// projection, keyed by its smallest member.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    pub len: usize,
    pub representatives: Vec<u64>,
    pub vectors: Vec<Vec<(u64, f64)>>,
    lookup: HashMap<u64, (usize, f64)>,
}

impl SectorBasis {
    pub fn build(subset: &BasisSubset, sector: &SymmetrySector) -> Result<Self> {
        let len = subset.chain_len();
        let mut done = HashSet::new();
        let mut representatives = Vec::new();
        let mut vectors = Vec::new();
        let mut lookup = HashMap::new();
        for &x in subset.states() {
            if done.contains(&x) {
                continue;
            }
            let mut coef: Vec<(u64, f64)> = Vec::new();
            for (y, chi) in sector.images(x, len) {
                if !subset.contains(y) {
                    return Err(Error::NotClosed(basis::bits_string(y, len)));
                }
                match coef.iter_mut().find(|(s, _)| *s == y) {
                    Some(e) => e.1 += chi,
                    None => coef.push((y, chi)),
                }
            }
            for &(y, _) in &coef {
                done.insert(y);
            }
            coef.retain(|(_, c)| c.abs() > 1e-12);
            if coef.is_empty() {
                continue;
            }
            coef.sort_by_key(|e| e.0);
            let norm = coef.iter().map(|(_, c)| c * c).sum::<f64>().sqrt();
            for e in &mut coef {
                e.1 /= norm;
            }
            let k = representatives.len();
            for &(y, c) in &coef {
                lookup.insert(y, (k, c));
            }
            representatives.push(coef[0].0);
            vectors.push(coef);
        }
        Ok(Self { len, representatives, vectors, lookup })
    }

    pub fn dim(&self) -> usize {
        self.representatives.len()
    }

    /// Sector index and coefficient of a basis state.
    pub fn component(&self, index: u64) -> Option<(usize, f64)> {
        self.lookup.get(&index).copied()
    }
}

/// Largest `|H[g x, g y] - H[x, y]|` over the subset.
pub fn symmetry_deviation(h: &SparseOperator, subset: &BasisSubset, op: SectorOp) -> Result<f64> {
    let len = subset.chain_len();
    let image: Vec<usize> = subset
        .states()
        .iter()
        .map(|&x| {
            let y = op.apply(x, len);
            subset.position(y).ok_or_else(|| Error::NotClosed(basis::bits_string(y, len)))
        })
        .collect::<Result<_>>()?;
    Ok(h.iter().map(|(i, j, v)| (h.get(image[i], image[j]) - v).norm()).fold(0.0, f64::max))
}

/// Largest `|conj(H[g x, g y]) - H[x, y]|` with `g = S M`, the unitary part of
/// the anti-unitary `R S M`; zero means `H` is real in a suitable basis.
pub fn antiunitary_deviation(h: &SparseOperator, subset: &BasisSubset) -> Result<f64> {
    let len = subset.chain_len();
    let image: Vec<usize> = subset
        .states()
        .iter()
        .map(|&x| {
            let y = basis::translate(basis::mirror(x, len), len, 1);
            subset.position(y).ok_or_else(|| Error::NotClosed(basis::bits_string(y, len)))
        })
        .collect::<Result<_>>()?;
    Ok(h.iter().map(|(i, j, v)| (h.get(image[i], image[j]).conj() - v).norm()).fold(0.0, f64::max))
}

/// `H` in the sector basis. Fails if a listed symmetry does not commute.
pub fn project_sector(
    h: &SparseOperator,
    subset: &BasisSubset,
    sector: &SymmetrySector,
) -> Result<(SparseOperator, SectorBasis)> {
    for &(op, _) in &sector.ops {
        let dev = symmetry_deviation(h, subset, op)?;
        if dev > SYMMETRY_TOL {
            return Err(Error::Symmetry(dev));
        }
    }
    let sb = SectorBasis::build(subset, sector)?;
    let rows: Vec<Vec<(usize, C64)>> = sb
        .vectors
        .par_iter()
        .map(|va| {
            let mut row = Vec::new();
            for &(x, ca) in va {
                let i = subset.position(x).expect("sector states lie in the subset");
                let (cols, vals) = h.row(i);
                for (&c, &v) in cols.iter().zip(vals) {
                    if let Some((b, cb)) = sb.component(subset.state(c)) {
                        row.push((b, v * (ca * cb)));
                    }
                }
            }
            row
        })
        .collect();
    let dim = sb.dim();
    Ok((SparseOperator::from_rows(dim, dim, rows, 1e-12), sb))
}

/// Triplet dump of an operator.
#[derive(Debug, Clone, Serialize)]
pub struct OperatorDump {
    pub model: String,
    #[serde(rename = "L")]
    pub len: usize,
    pub subset_hash: String,
    pub dim: usize,
    pub entries: Vec<(usize, usize, f64, f64)>,
}

impl OperatorDump {
    pub fn new(model: &str, op: &SparseOperator, subset: &BasisSubset) -> Self {
        Self {
            model: model.to_string(),
            len: subset.chain_len(),
            subset_hash: subset.hash(),
            dim: op.nrows(),
            entries: op.iter().map(|(i, j, v)| (i, j, v.re, v.im)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::Geometry;
    use crate::basis::BasisState;
    use crate::dense;
    use crate::gate::{parse_gate, PermutationGate};

    fn ones() -> Vec<C64> {
        vec![C64::new(1.0, 0.0); 16]
    }

    fn qmbs(cycles: &str, len: usize) -> FloquetCircuit {
        FloquetCircuit::new(parse_gate(4, cycles, ones()).unwrap(), len, Geometry::Stride4).unwrap()
    }

    const QA: &str = "((3,13,11,7,9,5),(4,14,12,8,10,6))";
    const QC: &str = "((3,5),(4,6),(7,15,9),(8,16,10),(11,13),(12,14))";

    #[test]
    fn identity_gives_zero() {
        let c = FloquetCircuit::new(PermutationGate::identity(4), 8, Geometry::Stride4).unwrap();
        let h = build_hamiltonian(&c, &BasisSubset::full(8).unwrap()).unwrap();
        assert_eq!(h.h.nnz(), 0);
    }

    #[test]
    fn layers_reproduce_floquet_map() {
        let c = qmbs(QA, 8);
        let full = BasisSubset::full(8).unwrap();
        let h = build_hamiltonian(&c, &full).unwrap();
        assert!(h.a.hermiticity_error() < 1e-10 && h.b.hermiticity_error() < 1e-10);
        let ua = dense::expm_hermitian(&h.a.to_dense(), 1.0).unwrap();
        let ub = dense::expm_hermitian(&h.b.to_dense(), 1.0).unwrap();
        let uf = &ua * &ub;
        for x in 0..256u64 {
            let (y, ph) = c.apply_index(x);
            for r in 0..256 {
                let want = if r as u64 == y { ph } else { C64::new(0.0, 0.0) };
                assert!((uf[(r, x as usize)] - want).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn closure_is_enforced() {
        let c = qmbs(QA, 8);
        let sub = BasisSubset::from_states(8, vec![BasisState::neel(8, 1).unwrap().index()]).unwrap();
        assert!(matches!(build_hamiltonian(&c, &sub), Err(Error::NotClosed(_))));
    }

    #[test]
    fn qmbs_c_krylov_is_small() {
        for len in [8, 12] {
            let c = qmbs(QC, len);
            let k = krylov_subspace(&c, BasisState::neel(len, 1).unwrap().index()).unwrap();
            assert_eq!(k.dim(), 1 << (len / 2));
        }
    }

    #[test]
    fn uniform_sum_matches_layers() {
        let c = qmbs(QC, 12);
        let neel = BasisState::neel(12, 1).unwrap().index();
        let k = krylov_subspace(&c, neel).unwrap();
        let want = build_hamiltonian(&c, &k).unwrap().h;
        let (sub, h) = uniform_hamiltonian(c.gate(), 12, 2, neel).unwrap();
        assert_eq!(sub.states(), k.states());
        assert!(h.sub(&want).unwrap().max_abs() < 1e-14);
        // no two-layer circuit at L = 10, but the window sum exists
        let (sub, h) = uniform_hamiltonian(c.gate(), 10, 2, BasisState::neel(10, 1).unwrap().index()).unwrap();
        assert_eq!(sub.dim(), 32);
        assert!(h.hermiticity_error() < 1e-12);
        assert!(uniform_hamiltonian(c.gate(), 9, 2, 0).is_err());
    }

    #[test]
    fn sector_contains_neel_sum() {
        let c = qmbs(QA, 8);
        let full = BasisSubset::full(8).unwrap();
        let h = build_hamiltonian(&c, &full).unwrap();
        let sector = SymmetrySector::parse("s2+1,usm+1").unwrap();
        let (hs, sb) = project_sector(&h.h, &full, &sector).unwrap();
        let n1 = BasisState::neel(8, 1).unwrap().index();
        let n0 = BasisState::neel(8, 0).unwrap().index();
        let (k1, c1) = sb.component(n1).unwrap();
        let (k0, c0) = sb.component(n0).unwrap();
        assert_eq!(k0, k1);
        assert!((c0 - c1).abs() < 1e-15 && (c0 - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(hs.hermiticity_error() < 1e-12);
        // sector eigenvalues are a subset of the full spectrum
        let full_e = dense::hermitian_eigenvalues(&h.h.to_dense()).unwrap();
        for e in dense::hermitian_eigenvalues(&hs.to_dense()).unwrap() {
            assert!(full_e.iter().any(|f| (f - e).abs() < 1e-9));
        }
    }

    #[test]
    fn sector_ops() {
        let x = BasisState::from_bits("110000").unwrap().index();
        assert_eq!(basis::bits_string(SectorOp::Shift2.apply(x, 6), 6), "001100");
        // M: 000011, S: 100001, flip: 011110
        assert_eq!(basis::bits_string(SectorOp::FlipShiftMirror.apply(x, 6), 6), "011110");
        assert!(SymmetrySector::parse("s2+1,usm").is_err());
    }
}
