//! Exact gate logarithm `h₀ = i log U₀`, its expansion in powers of `U₀`, and
//! the polynomial relation closing the powers of `h₀`.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::dense::{self, DMat};
use crate::gate::PermutationGate;
use crate::{Error, Result, C64};

/// Default bound for the gate-order search.
pub const ORDER_MAX: usize = 64;
const ZERO_COEFF: f64 = 1e-12;
const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct LocalHamiltonian {
    pub matrix: DMat,
    pub gate: PermutationGate,
    pub order: usize,
}

impl LocalHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Nonzero entries of column `q` as `(row, value)`.
    pub fn column(&self, q: usize) -> Vec<(usize, C64)> {
        (0..self.dim())
            .filter_map(|r| {
                let v = self.matrix[(r, q)];
                (v.norm() > 1e-13).then_some((r, v))
            })
            .collect()
    }

    /// All nonzero columns, indexed by window value.
    pub fn columns(&self) -> Vec<Vec<(usize, C64)>> {
        (0..self.dim()).map(|q| self.column(q)).collect()
    }
}

/// A cycle of the gate's permutation with the accumulated phase of each step:
/// `U₀^k |q₀⟩ = phases[k] |states[k]⟩`.
struct GateCycle {
    states: Vec<usize>,
    phases: Vec<C64>,
    phi: f64,
}

fn gate_cycles(g: &PermutationGate) -> Vec<GateCycle> {
    g.value_cycles()
        .into_iter()
        .map(|states| {
            let mut phases = Vec::with_capacity(states.len());
            let mut acc = C64::new(1.0, 0.0);
            for &q in &states {
                phases.push(acc);
                acc *= g.act(q).1;
            }
            let phi = dense::principal_angle(acc.arg());
            GateCycle { states, phases, phi }
        })
        .collect()
}

/// `h₀ = -Σ β̃ |β⟩⟨β|` built from the gate's cycle eigenbasis.
pub fn principal_log(g: &PermutationGate) -> Result<LocalHamiltonian> {
    let order = g.order(ORDER_MAX);
    if !order.found {
        return Err(Error::NoFiniteOrder(ORDER_MAX));
    }
    let d = g.dim();
    let mut h = dense::zeros(d, d);
    for cyc in gate_cycles(g) {
        let l = cyc.states.len();
        let norm = 1.0 / (l as f64).sqrt();
        for m in 0..l {
            let beta = (cyc.phi + TAU * m as f64) / l as f64;
            let bt = dense::principal_angle(beta);
            let v: Vec<C64> = (0..l)
                .map(|k| C64::from_polar(norm, -(k as f64) * beta) * cyc.phases[k])
                .collect();
            for (a, &ra) in cyc.states.iter().enumerate() {
                for (b, &rb) in cyc.states.iter().enumerate() {
                    h[(ra, rb)] -= v[a] * v[b].conj() * bt;
                }
            }
        }
    }
    Ok(LocalHamiltonian { matrix: h, gate: g.clone(), order: order.n })
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerDecomposition {
    pub n: usize,
    /// `c_k` for `k = 0..n`, so that `h₀ = Σ c_k U₀^k`.
    pub coefficients: Vec<C64>,
    pub structural_zeros: Vec<bool>,
    pub reconstruction_error: f64,
}

/// The matrix `Γ_{s,k} = e^{ikγ_s}` with `γ_s = 2πs/n` repeated per cycle.
pub fn gamma_matrix(n: usize, n_cycles: usize) -> DMat {
    DMat::from_fn(n * n_cycles, n, |s, k| C64::from_polar(1.0, (k * (s % n)) as f64 * TAU / n as f64))
}

/// Coefficients `c_k` of `h₀ = Σ_k c_k U₀^k`, which depend only on the order.
pub fn power_decomposition(g: &PermutationGate) -> Result<PowerDecomposition> {
    let h = principal_log(g)?;
    let n = h.order;
    let n_cycles = g.value_cycles().len();
    let gamma = gamma_matrix(n, n_cycles);
    let rows = n * n_cycles;
    let tilde: Vec<f64> = (0..rows).map(|s| dense::principal_angle(TAU * (s % n) as f64 / n as f64)).collect();
    let scale = 1.0 / rows as f64;
    let coefficients: Vec<C64> = (0..n)
        .map(|k| -(0..rows).map(|s| gamma[(s, k)].conj() * tilde[s]).sum::<C64>() * scale)
        .collect();
    let u = g.matrix();
    let mut rec = dense::zeros(g.dim(), g.dim());
    let mut uk = dense::identity(g.dim());
    for c in &coefficients {
        rec = &rec + &dense::scale(&uk, *c);
        uk = &uk * &u;
    }
    let reconstruction_error = dense::frobenius(&dense::sub(&rec, &h.matrix));
    let structural_zeros = coefficients.iter().map(|c| c.norm() < ZERO_COEFF).collect();
    Ok(PowerDecomposition { n, coefficients, structural_zeros, reconstruction_error })
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosingRelation {
    /// Smallest power expressible through lower ones.
    pub m: usize,
    /// `h^m = Σ_k alpha[k] h^k`.
    pub alpha: Vec<C64>,
}

/// Finds the minimal `m ≤ n` with `h^m` in the span of `I, h, …, h^{m-1}`.
pub fn closing_relation(h: &LocalHamiltonian) -> Result<ClosingRelation> {
    let d = h.dim();
    let mut powers = vec![dense::identity(d)];
    for m in 1..=h.order.max(1) {
        let next = &powers[m - 1] * &h.matrix;
        powers.push(next);
        let k = DMat::from_fn(d * d, m + 1, |i, j| powers[j][(i % d, i / d)]);
        let sv = dense::singular_values(&k)?;
        let (largest, smallest) = (sv[0], *sv.last().unwrap());
        if smallest <= RANK_TOL * largest.max(f64::MIN_POSITIVE) {
            let alpha = least_squares(&powers[..m], &powers[m]);
            return Ok(ClosingRelation { m, alpha });
        }
    }
    Err(Error::Input("powers of h0 never became dependent".into()))
}

/// Solves `Σ a_k basis_k ≈ target` through the normal equations.
fn least_squares(basis: &[DMat], target: &DMat) -> Vec<C64> {
    let m = basis.len();
    let dot = |a: &DMat, b: &DMat| -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for j in 0..a.ncols() {
            for i in 0..a.nrows() {
                s += a[(i, j)].conj() * b[(i, j)];
            }
        }
        s
    };
    let mut g = vec![vec![C64::new(0.0, 0.0); m + 1]; m];
    for i in 0..m {
        for j in 0..m {
            g[i][j] = dot(&basis[i], &basis[j]);
        }
        g[i][m] = dot(&basis[i], target);
    }
    solve_augmented(g)
}

/// Gaussian elimination with partial pivoting on an `m × (m+1)` system.
pub(crate) fn solve_augmented(mut a: Vec<Vec<C64>>) -> Vec<C64> {
    let m = a.len();
    for col in 0..m {
        let piv = (col..m).max_by(|&x, &y| a[x][col].norm().total_cmp(&a[y][col].norm())).unwrap();
        a.swap(col, piv);
        let p = a[col][col];
        if p.norm() == 0.0 {
            continue;
        }
        for row in 0..m {
            if row != col {
                let f = a[row][col] / p;
                for k in col..=m {
                    let v = a[col][k];
                    a[row][k] -= f * v;
                }
            }
        }
    }
    (0..m)
        .map(|i| if a[i][i].norm() == 0.0 { C64::new(0.0, 0.0) } else { a[i][m] / a[i][i] })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::parse_gate;
    use std::f64::consts::PI;

    fn ones() -> Vec<C64> {
        vec![C64::new(1.0, 0.0); 16]
    }

    fn pxp() -> PermutationGate {
        let mut p = ones();
        for l in [11, 12, 15, 16] {
            p[l - 1] = C64::new(0.0, 1.0);
        }
        parse_gate(4, "((11,15),(12,16))", p).unwrap()
    }

    #[test]
    fn identity_has_zero_log() {
        let h = principal_log(&PermutationGate::identity(4)).unwrap();
        assert!(dense::frobenius(&h.matrix) < 1e-15);
        let c = closing_relation(&h).unwrap();
        assert_eq!(c.m, 1);
        assert!(c.alpha[0].norm() < 1e-15);
    }

    #[test]
    fn pxp_log_round_trip_and_closing() {
        let g = pxp();
        let h = principal_log(&g).unwrap();
        assert!(dense::hermiticity_error(&h.matrix) < 1e-12);
        let u = dense::expm_hermitian(&h.matrix, 1.0).unwrap();
        assert!(dense::max_abs_diff(&u, &g.matrix()) < 1e-10);
        let c = closing_relation(&h).unwrap();
        assert_eq!(c.m, 3);
        assert!(c.alpha[0].norm() < 1e-9 && c.alpha[2].norm() < 1e-9);
        assert!((c.alpha[1] - C64::new(PI * PI / 4.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn eigenvalues_in_principal_interval() {
        let g = parse_gate(4, "((3,13,11,7,9,5),(4,14,12,8,10,6))", ones()).unwrap();
        let h = principal_log(&g).unwrap();
        let e = dense::hermitian_eigenvalues(&h.matrix).unwrap();
        assert!(e.iter().all(|&x| x > -PI - 1e-12 && x <= PI + 1e-12));
        // the -1 eigenvalue of a 6-cycle sits on the branch cut: β̃ = +π, h eigenvalue -π
        assert!(e.iter().any(|&x| (x + PI).abs() < 1e-12));
        assert!(!e.iter().any(|&x| (x - PI).abs() < 1e-12));
    }

    #[test]
    fn gamma_is_unitary_up_to_scale() {
        for (n, nc) in [(4, 14), (6, 10), (1, 16), (5, 3)] {
            let g = gamma_matrix(n, nc);
            let p = dense::scale(&(g.adjoint() * &g), C64::new(1.0 / (n * nc) as f64, 0.0));
            assert!(dense::max_abs_diff(&p, &dense::identity(n)) < 1e-12);
        }
    }

    #[test]
    fn pxp_decomposition() {
        let d = power_decomposition(&pxp()).unwrap();
        let q = PI / 4.0;
        let want = [C64::new(-q, 0.0), C64::new(q, q), C64::new(-q, 0.0), C64::new(q, -q)];
        for (c, w) in d.coefficients.iter().zip(want) {
            assert!((c - w).norm() < 1e-12, "{c} vs {w}");
        }
        assert!(d.reconstruction_error < 1e-9);
    }

    #[test]
    fn least_squares_solver() {
        let a = vec![
            vec![C64::new(2.0, 0.0), C64::new(1.0, 0.0), C64::new(3.0, 0.0)],
            vec![C64::new(1.0, 0.0), C64::new(3.0, 0.0), C64::new(5.0, 0.0)],
        ];
        let x = solve_augmented(a);
        assert!((x[0] - C64::new(0.8, 0.0)).norm() < 1e-12);
        assert!((x[1] - C64::new(1.4, 0.0)).norm() < 1e-12);
    }
}
