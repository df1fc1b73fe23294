//! Time evolution and revival diagnostics.

use serde::Serialize;

use crate::basis::{self, BasisSubset, StateVector};
use crate::dense::DMat;
use crate::sparse::SparseOperator;
use crate::spectral::Eigensystem;
use crate::{Error, Result, C64};

const DRIFT_TOL: f64 = 1e-6;
const TIME_BLOCK: usize = 128;

/// Uniform grid `0, dt, 2dt, …` up to `t_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    pub dt: f64,
    pub t_max: f64,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self { dt: 0.05, t_max: 300.0 }
    }
}

impl TimeGrid {
    pub fn new(dt: f64, t_max: f64) -> Result<Self> {
        if !(dt > 0.0) || !(t_max >= 0.0) || !dt.is_finite() || !t_max.is_finite() {
            return Err(Error::Input(format!("bad time grid dt = {dt}, t_max = {t_max}")));
        }
        Ok(Self { dt, t_max })
    }

    pub fn times(&self) -> Vec<f64> {
        let n = (self.t_max / self.dt + 1e-9).floor() as usize;
        (0..=n).map(|k| k as f64 * self.dt).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Propagate through a dense eigendecomposition.
    Dense,
    /// Taylor steps on the sparse operator with step-doubling error control.
    Taylor { tol: f64 },
}

pub struct EvolutionJob<'a> {
    pub hamiltonian: &'a SparseOperator,
    pub initial: StateVector,
    pub grid: TimeGrid,
    pub method: Method,
}

fn check_norm(psi: &[C64]) -> Result<()> {
    let n = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if (n - 1.0).abs() > DRIFT_TOL {
        return Err(Error::NormDrift((n - 1.0).abs()));
    }
    Ok(())
}

/// Streams `(t, ψ(t))` for every grid point without storing the trajectory.
/// A precomputed eigensystem is reused for the dense method.
pub fn evolve_with<F>(job: &EvolutionJob<'_>, eig: Option<&Eigensystem>, mut f: F) -> Result<()>
where
    F: FnMut(f64, &[C64]),
{
    if job.initial.dim() != job.hamiltonian.nrows() {
        return Err(Error::Dimension("initial state and Hamiltonian differ in size".into()));
    }
    let times = job.grid.times();
    match job.method {
        Method::Dense => {
            let owned;
            let eig = match eig {
                Some(e) => e,
                None => {
                    owned = Eigensystem::dense(job.hamiltonian)?;
                    &owned
                }
            };
            let v = &eig.vectors;
            let n = eig.dim();
            let coeffs: Vec<C64> =
                (0..n).map(|k| (0..n).map(|i| v[(i, k)].conj() * job.initial.amplitudes[i]).sum()).collect();
            let mut col = vec![C64::new(0.0, 0.0); n];
            for block in times.chunks(TIME_BLOCK) {
                let phases = DMat::from_fn(n, block.len(), |k, b| coeffs[k] * C64::from_polar(1.0, -eig.energies[k] * block[b]));
                let psi = v * &phases;
                for (b, &t) in block.iter().enumerate() {
                    for (i, c) in col.iter_mut().enumerate() {
                        *c = psi[(i, b)];
                    }
                    check_norm(&col)?;
                    f(t, &col);
                }
            }
        }
        Method::Taylor { tol } => {
            let mut psi = job.initial.amplitudes.clone();
            let mut t_prev = 0.0;
            for &t in &times {
                if t > t_prev {
                    psi = taylor_advance(job.hamiltonian, &psi, t - t_prev, tol);
                    t_prev = t;
                }
                check_norm(&psi)?;
                f(t, &psi);
            }
        }
    }
    Ok(())
}

pub fn evolve(job: &EvolutionJob<'_>) -> Result<Vec<StateVector>> {
    let mut out = Vec::new();
    evolve_with(job, None, |_, psi| out.push(StateVector { amplitudes: psi.to_vec() }))?;
    Ok(out)
}

/// One Taylor step `e^{-iHh}ψ`, summed until terms fall below 1e-16.
fn taylor_step(h: &SparseOperator, psi: &[C64], step: f64) -> Vec<C64> {
    let mut out = psi.to_vec();
    let mut term = psi.to_vec();
    for k in 1..60 {
        let hv = h.matvec(&term);
        let f = C64::new(0.0, -step / k as f64);
        term = hv.into_iter().map(|x| x * f).collect();
        let mut size = 0.0;
        for (o, t) in out.iter_mut().zip(&term) {
            *o += t;
            size += t.norm_sqr();
        }
        if size.sqrt() < 1e-16 {
            break;
        }
    }
    out
}

/// Advances by `dt`, halving the substep until one step and two half steps
/// agree within `tol`.
pub fn taylor_advance(h: &SparseOperator, psi: &[C64], dt: f64, tol: f64) -> Vec<C64> {
    let mut substeps = 1usize;
    loop {
        let step = dt / substeps as f64;
        let full = taylor_step(h, psi, step);
        let half = taylor_step(h, &taylor_step(h, psi, step / 2.0), step / 2.0);
        let err = full.iter().zip(&half).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        if err < tol || substeps >= 1 << 20 {
            let mut cur = psi.to_vec();
            for _ in 0..substeps {
                cur = taylor_step(h, &cur, step);
            }
            return cur;
        }
        substeps *= 2;
    }
}

/// `Σ_q |⟨q|ψ⟩|⁴`.
pub fn participation_ratio(psi: &[C64]) -> f64 {
    psi.iter().map(|a| a.norm_sqr().powi(2)).sum()
}

/// `|⟨ref|ψ⟩|²`.
pub fn fidelity(psi: &[C64], reference: &[C64]) -> f64 {
    reference.iter().zip(psi).map(|(r, p)| r.conj() * p).sum::<C64>().norm_sqr()
}

/// `⟨Z_site⟩` with `Z|0⟩ = |0⟩`, `Z|1⟩ = -|1⟩`.
pub fn local_z(psi: &[C64], subset: &BasisSubset, site: usize) -> f64 {
    let len = subset.chain_len();
    psi.iter()
        .zip(subset.states())
        .map(|(a, &x)| if basis::bit(x, len, site) == 0 { a.norm_sqr() } else { -a.norm_sqr() })
        .sum()
}

#[derive(Debug, Clone, Serialize)]
pub struct RevivalTrace {
    pub times: Vec<f64>,
    pub pr: Vec<f64>,
    pub fidelity: Vec<f64>,
    /// One series per requested site.
    pub local_z: Vec<Vec<f64>>,
    pub z_sites: Vec<usize>,
}

impl RevivalTrace {
    /// Extremes of the PR over `t_lo < t < t_hi`.
    pub fn pr_range(&self, t_lo: f64, t_hi: f64) -> (f64, f64) {
        let vals = self.times.iter().zip(&self.pr).filter(|(&t, _)| t > t_lo && t < t_hi).map(|(_, &p)| p);
        vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p), hi.max(p)))
    }
}

/// PR, fidelity with the initial state and optional `⟨Z_i⟩` along the grid.
pub fn revival_trace(
    job: &EvolutionJob<'_>,
    eig: Option<&Eigensystem>,
    subset: &BasisSubset,
    z_sites: &[usize],
) -> Result<RevivalTrace> {
    let reference = job.initial.amplitudes.clone();
    let mut tr = RevivalTrace {
        times: Vec::new(),
        pr: Vec::new(),
        fidelity: Vec::new(),
        local_z: vec![Vec::new(); z_sites.len()],
        z_sites: z_sites.to_vec(),
    };
    evolve_with(job, eig, |t, psi| {
        tr.times.push(t);
        tr.pr.push(participation_ratio(psi));
        tr.fidelity.push(fidelity(psi, &reference));
        for (k, &s) in z_sites.iter().enumerate() {
            tr.local_z[k].push(local_z(psi, subset, s));
        }
    })?;
    Ok(tr)
}

/// Largest value in `[period/2, 3·period/2]`.
pub fn first_revival_peak(times: &[f64], values: &[f64], period: f64) -> f64 {
    times
        .iter()
        .zip(values)
        .filter(|(&t, _)| t >= 0.5 * period && t <= 1.5 * period)
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Smallest subset state outside the orbit.
pub fn generic_state(subset: &BasisSubset, orbit: &[u64]) -> Option<u64> {
    subset.states().iter().copied().find(|s| !orbit.contains(s))
}

/// Microcanonical `⟨Z_site⟩` over eigenstates with `|E - energy| ≤ width/2`.
pub fn microcanonical_z(eig: &Eigensystem, subset: &BasisSubset, site: usize, energy: f64, width: f64) -> Result<f64> {
    let n = eig.dim();
    let mut acc = 0.0;
    let mut count = 0usize;
    let mut col = vec![C64::new(0.0, 0.0); n];
    for k in 0..n {
        if (eig.energies[k] - energy).abs() <= width / 2.0 {
            for (i, c) in col.iter_mut().enumerate() {
                *c = eig.vectors[(i, k)];
            }
            acc += local_z(&col, subset, site);
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::Input(format!("no eigenstates within {width} of E = {energy}")));
    }
    Ok(acc / count as f64)
}

/// `⟨ψ|H|ψ⟩`.
pub fn energy(h: &SparseOperator, psi: &[C64]) -> f64 {
    psi.iter().zip(h.matvec(psi)).map(|(a, b)| a.conj() * b).sum::<C64>().re
}

#[derive(Debug, Clone, Serialize)]
pub struct PrethermalTrace {
    pub times: Vec<f64>,
    pub z: Vec<f64>,
    pub pr: Vec<f64>,
    pub microcanonical: f64,
    /// `|⟨Z_i(t)⟩ - ⟨Z_i⟩_mc|²`.
    pub deviation_sq: Vec<f64>,
}

/// Local `Z` relaxation against its microcanonical value in a window of
/// width `delta_e` around the state's mean energy.
pub fn local_z_trace(
    job: &EvolutionJob<'_>,
    eig: &Eigensystem,
    subset: &BasisSubset,
    site: usize,
    delta_e: f64,
) -> Result<PrethermalTrace> {
    let e0 = energy(job.hamiltonian, &job.initial.amplitudes);
    let mc = microcanonical_z(eig, subset, site, e0, delta_e)?;
    let tr = revival_trace(job, Some(eig), subset, &[site])?;
    let z = tr.local_z.into_iter().next().unwrap_or_default();
    let deviation_sq = z.iter().map(|v| (v - mc).powi(2)).collect();
    Ok(PrethermalTrace { times: tr.times, z, pr: tr.pr, microcanonical: mc, deviation_sq })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::DROP_TOL;

    fn chain_h() -> (SparseOperator, BasisSubset) {
        // two-site XX + field model on the full 4-dim space
        let sub = BasisSubset::full(2).unwrap();
        let mut t = vec![];
        for x in 0..4usize {
            t.push((x ^ 3, x, C64::new(1.0, 0.0)));
            t.push((x, x, C64::new(0.3 * (x.count_ones() as f64), 0.0)));
        }
        (SparseOperator::from_triplets(4, 4, t, DROP_TOL), sub)
    }

    #[test]
    fn grid_points() {
        let g = TimeGrid::new(0.05, 1.0).unwrap();
        assert_eq!(g.times().len(), 21);
        assert!(TimeGrid::new(0.0, 1.0).is_err());
    }

    #[test]
    fn methods_agree_and_conserve() {
        let (h, sub) = chain_h();
        let init = StateVector::basis(&sub, 1).unwrap();
        let grid = TimeGrid::new(0.1, 3.0).unwrap();
        let d = evolve(&EvolutionJob { hamiltonian: &h, initial: init.clone(), grid, method: Method::Dense }).unwrap();
        let t = evolve(&EvolutionJob { hamiltonian: &h, initial: init.clone(), grid, method: Method::Taylor { tol: 1e-12 } }).unwrap();
        assert!(d[0].amplitudes.iter().zip(&init.amplitudes).all(|(a, b)| (a - b).norm() < 1e-14));
        let e0 = energy(&h, &init.amplitudes);
        for (a, b) in d.iter().zip(&t) {
            let diff: f64 = a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(diff < 1e-9);
            assert!((energy(&h, &a.amplitudes) - e0).abs() < 1e-8);
        }
    }

    #[test]
    fn eigenstate_only_gains_phase() {
        let (h, sub) = chain_h();
        let eig = Eigensystem::dense(&h).unwrap();
        let v: Vec<C64> = (0..4).map(|i| eig.vectors[(i, 2)]).collect();
        let job = EvolutionJob { hamiltonian: &h, initial: StateVector { amplitudes: v }, grid: TimeGrid::new(0.5, 5.0).unwrap(), method: Method::Dense };
        let tr = revival_trace(&job, Some(&eig), &sub, &[0]).unwrap();
        for k in 0..tr.times.len() {
            assert!((tr.pr[k] - tr.pr[0]).abs() < 1e-12);
            assert!((tr.fidelity[k] - 1.0).abs() < 1e-12);
            assert!((tr.local_z[0][k] - tr.local_z[0][0]).abs() < 1e-12);
        }
    }

    #[test]
    fn pr_and_fidelity_basics() {
        let e = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        assert_eq!(participation_ratio(&e), 1.0);
        let u: Vec<C64> = (0..8).map(|_| C64::new(8f64.sqrt().recip(), 0.0)).collect();
        assert!((participation_ratio(&u) - 0.125).abs() < 1e-15);
        let f = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        assert_eq!(fidelity(&e, &e), 1.0);
        assert_eq!(fidelity(&e, &f), 0.0);
    }

    #[test]
    fn full_window_microcanonical_is_trace_average() {
        let (h, sub) = chain_h();
        let eig = Eigensystem::dense(&h).unwrap();
        let mc = microcanonical_z(&eig, &sub, 0, 0.0, 1e6).unwrap();
        // trace of Z_0 over the full space vanishes
        assert!(mc.abs() < 1e-12);
        assert!(microcanonical_z(&eig, &sub, 0, 100.0, 0.1).is_err());
    }
}
