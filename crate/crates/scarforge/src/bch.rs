//! Nested-commutator terms of `i log(e^{-iA} e^{-iB})`.
//!
//! With `X = -iA`, `Y = -iB` and `Z = log(e^X e^Y) = Σ_k Z_k` split by degree,
//! the homogeneous parts obey
//!
//! ```text
//! (n+1) Z_{n+1} = ½[X - Y, Z_n] + Σ_{p≥1, 2p≤n} B_{2p}/(2p)! · T_{2p}(n)
//! T_1(m) = [Z_m, X + Y],  T_p(m) = Σ_{k=1}^{m-p+1} [Z_k, T_{p-1}(m-k)]
//! ```
//!
//! and `C_n = i Z_{n+1}`, so `C_0 = A + B` and `C_1 = -(i/2)[A, B]`.

use std::collections::HashMap;

use num_rational::Ratio;
use serde::Serialize;

use crate::sparse::SparseOperator;
use crate::{Error, Result, C64};

/// Highest order accepted by [`bch_terms`].
pub const MAX_ORDER: usize = 12;
/// Relative drop threshold applied after every commutator.
pub const REL_DROP: f64 = 1e-13;

type Q = Ratio<i128>;

/// Bernoulli numbers `B_0 … B_m` with `B_1 = -1/2`.
pub fn bernoulli(m: usize) -> Vec<Q> {
    let mut b: Vec<Q> = vec![Q::from_integer(1)];
    for n in 1..=m {
        let mut acc = Q::from_integer(0);
        let mut binom: i128 = 1;
        for (k, bk) in b.iter().enumerate() {
            acc += *bk * Q::from_integer(binom);
            binom = binom * (n as i128 + 1 - k as i128) / (k as i128 + 1);
        }
        b.push(-acc / Q::from_integer(n as i128 + 1));
    }
    b
}

fn factorial(n: usize) -> i128 {
    (1..=n as i128).product()
}

/// `B_{2p}/(2p)!` for `p = 1..=pmax`, exact.
pub fn recursion_coefficients(pmax: usize) -> Vec<Q> {
    let b = bernoulli(2 * pmax);
    (1..=pmax).map(|p| b[2 * p] / Q::from_integer(factorial(2 * p))).collect()
}

fn to_c64(q: Q) -> C64 {
    C64::new(*q.numer() as f64 / *q.denom() as f64, 0.0)
}

#[derive(Debug, Clone)]
pub struct BchSeries {
    /// `C_0 … C_N`.
    pub terms: Vec<SparseOperator>,
}

impl BchSeries {
    pub fn max_order(&self) -> usize {
        self.terms.len() - 1
    }
}

pub fn bch_terms(a: &SparseOperator, b: &SparseOperator, order: usize) -> Result<BchSeries> {
    if order > MAX_ORDER {
        return Err(Error::Guard(format!("BCH order {order}"), MAX_ORDER));
    }
    if (a.nrows(), a.ncols()) != (b.nrows(), b.ncols()) || a.nrows() != a.ncols() {
        return Err(Error::Dimension("A and B must be square and of equal size".into()));
    }
    let mi = C64::new(0.0, -1.0);
    let x = a.scale(mi);
    let y = b.scale(mi);
    let sum = x.add(&y)?;
    let diff = x.sub(&y)?;
    let coeffs = recursion_coefficients(order / 2 + 1);

    let mut z: Vec<SparseOperator> = vec![SparseOperator::zeros(a.nrows(), a.ncols()), sum.clone()];
    let mut t: HashMap<(usize, usize), SparseOperator> = HashMap::new();
    for n in 1..=order {
        t.insert((1, n), z[n].commutator(&sum, REL_DROP)?);
        for p in 2..=n {
            let mut acc = SparseOperator::zeros(a.nrows(), a.ncols());
            for k in 1..=(n + 1 - p) {
                if let Some(prev) = t.get(&(p - 1, n - k)) {
                    acc = acc.add(&z[k].commutator(prev, REL_DROP)?)?;
                }
            }
            t.insert((p, n), acc);
        }
        let mut next = diff.commutator(&z[n], REL_DROP)?.scale(C64::new(0.5, 0.0));
        for p in 1..=n / 2 {
            let c = to_c64(coeffs[p - 1]);
            next = next.axpby(C64::new(1.0, 0.0), &t[&(2 * p, n)], c, 0.0)?;
        }
        let next = next.scale(C64::new(1.0 / (n + 1) as f64, 0.0));
        let cut = REL_DROP * next.max_abs();
        z.push(next.filtered(cut));
    }
    let i = C64::new(0.0, 1.0);
    let terms = z.into_iter().skip(1).map(|zk| zk.scale(i)).collect();
    Ok(BchSeries { terms })
}

/// `Σ_{n ≤ order} C_n`.
pub fn augmented_hamiltonian(series: &BchSeries, order: usize) -> Result<SparseOperator> {
    if order > series.max_order() {
        return Err(Error::Input(format!("order {order} exceeds computed {}", series.max_order())));
    }
    let mut h = series.terms[0].clone();
    for term in &series.terms[1..=order] {
        h = h.add(term)?;
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormRow {
    pub n: usize,
    pub orbit_norm: f64,
    pub leakage_norm: f64,
    pub generic_norm: f64,
}

/// Normalized Frobenius norms of each term split by the orbit projector.
///
/// `orbit` holds subset positions; `n_eff` defaults to the subset dimension.
pub fn norm_profile(series: &BchSeries, orbit: &[usize], n_eff: Option<usize>) -> Vec<NormRow> {
    let dim = series.terms[0].nrows();
    let n_eff = n_eff.unwrap_or(dim) as f64;
    let l = orbit.len() as f64;
    let mut in_orbit = vec![false; dim];
    for &p in orbit {
        in_orbit[p] = true;
    }
    let outside: Vec<bool> = in_orbit.iter().map(|b| !b).collect();
    series
        .terms
        .iter()
        .enumerate()
        .map(|(n, c)| NormRow {
            n,
            orbit_norm: c.masked_norm_sqr(&in_orbit, &in_orbit).sqrt() / l,
            leakage_norm: c.masked_norm_sqr(&outside, &in_orbit).sqrt() / (l * n_eff).sqrt(),
            generic_norm: c.masked_norm_sqr(&outside, &outside).sqrt() / n_eff,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayEstimate {
    pub rate: f64,
    /// `‖(1-P₀) C₂ P₀‖²_F`.
    pub leakage_sq: f64,
    pub n_eff: usize,
    pub orbit_len: usize,
    pub len: usize,
    pub bandwidth: f64,
}

/// Golden-rule decay rate `2π (2N/(LΔ)) ‖(1-P₀)C₂P₀‖² / (N l)`.
pub fn fgr_rate(series: &BchSeries, orbit: &[usize], len: usize, bandwidth: f64) -> Result<DecayEstimate> {
    let c2 = series.terms.get(2).ok_or_else(|| Error::Input("C_2 not computed".into()))?;
    let dim = c2.nrows();
    let mut in_orbit = vec![false; dim];
    for &p in orbit {
        in_orbit[p] = true;
    }
    let outside: Vec<bool> = in_orbit.iter().map(|b| !b).collect();
    let leakage_sq = c2.masked_norm_sqr(&outside, &in_orbit);
    let n = dim as f64;
    let l = orbit.len() as f64;
    let rate = std::f64::consts::TAU * (2.0 * n / (len as f64 * bandwidth)) * leakage_sq / (n * l);
    Ok(DecayEstimate { rate, leakage_sq, n_eff: dim, orbit_len: orbit.len(), len, bandwidth })
}

/// Behaviour of an operator under a symmetry: even, odd, or neither.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

fn parity_from(dev_even: f64, dev_odd: f64, scale: f64) -> Parity {
    let tol = 1e-9 * scale.max(1.0);
    if dev_even < tol {
        Parity::Even
    } else if dev_odd < tol {
        Parity::Odd
    } else {
        Parity::Mixed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TermSymmetries {
    /// Under the mirror `M`.
    pub inversion: Parity,
    /// Under complex conjugation in the computational basis.
    pub time_reversal: Parity,
    /// Under `∏ Z`; `Odd` means the term anticommutes with it.
    pub spin_parity: Parity,
}

/// Numerically classifies a term. The subset must be closed under `M`.
pub fn classify_term(op: &SparseOperator, subset: &crate::basis::BasisSubset) -> Result<TermSymmetries> {
    let len = subset.chain_len();
    let mirror: Vec<usize> = subset
        .states()
        .iter()
        .map(|&x| {
            let y = crate::basis::mirror(x, len);
            subset.position(y).ok_or_else(|| Error::NotClosed(crate::basis::bits_string(y, len)))
        })
        .collect::<Result<_>>()?;
    let scale = op.max_abs();
    let (mut inv_e, mut inv_o, mut tr_e, mut tr_o, mut sp_e, mut sp_o) = (0f64, 0f64, 0f64, 0f64, 0f64, 0f64);
    for (i, j, v) in op.iter() {
        let m = op.get(mirror[i], mirror[j]);
        inv_e = inv_e.max((m - v).norm());
        inv_o = inv_o.max((m + v).norm());
        tr_e = tr_e.max(v.im.abs());
        tr_o = tr_o.max(v.re.abs());
        let same = subset.state(i).count_ones() % 2 == subset.state(j).count_ones() % 2;
        if same {
            sp_o = sp_o.max(v.norm());
        } else {
            sp_e = sp_e.max(v.norm());
        }
    }
    Ok(TermSymmetries {
        inversion: parity_from(inv_e, inv_o, scale),
        time_reversal: parity_from(tr_e, tr_o, scale),
        spin_parity: parity_from(sp_e, sp_o, scale),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense;
    use crate::sparse::DROP_TOL;

    fn q(n: i128, d: i128) -> Q {
        Q::new(n, d)
    }

    #[test]
    fn bernoulli_values() {
        let b = bernoulli(12);
        assert_eq!(b[1], q(-1, 2));
        assert_eq!(b[2], q(1, 6));
        assert_eq!(b[3], q(0, 1));
        assert_eq!(b[4], q(-1, 30));
        assert_eq!(b[6], q(1, 42));
        assert_eq!(b[12], q(-691, 2730));
        let c = recursion_coefficients(2);
        assert_eq!(c, vec![q(1, 12), q(-1, 720)]);
    }

    fn random_hermitian(n: usize, seed: u64) -> SparseOperator {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut m = dense::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(next(), 0.0);
            for j in 0..i {
                let v = C64::new(next(), next());
                m[(i, j)] = v;
                m[(j, i)] = v.conj();
            }
        }
        SparseOperator::from_dense(&m, DROP_TOL)
    }

    #[test]
    fn low_orders_and_dense_log() {
        let eps = 0.1;
        let a = random_hermitian(6, 1).scale(C64::new(eps, 0.0));
        let b = random_hermitian(6, 2).scale(C64::new(eps, 0.0));
        let s = bch_terms(&a, &b, 8).unwrap();
        assert!(dense::max_abs_diff(&s.terms[0].to_dense(), &a.add(&b).unwrap().to_dense()) < 1e-15);
        let c1 = dense::scale(&dense::commutator(&a.to_dense(), &b.to_dense()), C64::new(0.0, -0.5));
        assert!(dense::max_abs_diff(&s.terms[1].to_dense(), &c1) < 1e-14);
        for t in &s.terms {
            assert!(t.hermiticity_error() < 1e-12);
        }
        let ua = dense::expm_hermitian(&a.to_dense(), 1.0).unwrap();
        let ub = dense::expm_hermitian(&b.to_dense(), 1.0).unwrap();
        let hf = dense::unitary_log(&(&ua * &ub)).unwrap();
        let total = augmented_hamiltonian(&s, 8).unwrap().to_dense();
        assert!(dense::max_abs_diff(&total, &hf) < 1e-9);
    }

    #[test]
    fn commuting_terms_vanish() {
        let a = random_hermitian(5, 3);
        let b = a.scale(C64::new(0.7, 0.0));
        let s = bch_terms(&a, &b, 5).unwrap();
        for t in &s.terms[1..] {
            assert!(t.max_abs() < 1e-12);
        }
    }

    #[test]
    fn homogeneous_degree() {
        let a = random_hermitian(5, 4);
        let b = random_hermitian(5, 5);
        let (sa, sb, lam) = (0.7, 1.3, 0.6);
        let sc = |x: &SparseOperator, f: f64| x.scale(C64::new(f, 0.0));
        let one = bch_terms(&sc(&a, sa), &sc(&b, sb), 5).unwrap();
        let two = bch_terms(&sc(&a, lam * sa), &sc(&b, lam * sb), 5).unwrap();
        for n in 0..=5 {
            let want = sc(&one.terms[n], lam.powi(n as i32 + 1));
            assert!(dense::max_abs_diff(&two.terms[n].to_dense(), &want.to_dense()) < 1e-10);
        }
    }

    #[test]
    fn zero_operator_norms() {
        let z = SparseOperator::zeros(4, 4);
        let s = bch_terms(&z, &z, 3).unwrap();
        for row in norm_profile(&s, &[0, 2], None) {
            assert_eq!((row.orbit_norm, row.leakage_norm, row.generic_norm), (0.0, 0.0, 0.0));
        }
        assert_eq!(fgr_rate(&s, &[0], 4, 1.0).unwrap().rate, 0.0);
    }
}
