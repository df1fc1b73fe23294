//! Eigen-analysis: IPR against energy, scar-tower flagging and gap-ratio
//! statistics.

use serde::Serialize;

use crate::dense::{self, DMat};
use crate::hamiltonian::DENSE_GUARD;
use crate::sparse::SparseOperator;
use crate::{Error, Result};

/// Default overlap-amplitude threshold for flagging scar candidates.
pub const FLAG_THRESHOLD: f64 = 0.02;
/// Levels closer than this are merged before computing gap ratios.
pub const DEGENERACY_TOL: f64 = 1e-12;
pub const HISTOGRAM_BINS: usize = 50;

#[derive(Debug, Clone)]
pub struct Eigensystem {
    /// Ascending.
    pub energies: Vec<f64>,
    /// Column `k` is the eigenvector of `energies[k]`.
    pub vectors: DMat,
}

impl Eigensystem {
    pub fn dense(h: &SparseOperator) -> Result<Self> {
        guard(h.nrows())?;
        let (energies, vectors) = dense::hermitian_eigen(&h.to_dense())?;
        Ok(Self { energies, vectors })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }
}

fn guard(dim: usize) -> Result<()> {
    if dim > DENSE_GUARD {
        return Err(Error::Guard(
            format!("dense diagonalization of dimension {dim} (project onto a symmetry sector)"),
            DENSE_GUARD,
        ));
    }
    Ok(())
}

pub fn eigenvalues(h: &SparseOperator) -> Result<Vec<f64>> {
    guard(h.nrows())?;
    dense::hermitian_eigenvalues(&h.to_dense())
}

#[derive(Debug, Clone)]
pub struct SpectrumAnalysis {
    pub eigensystem: Eigensystem,
    pub ipr: Vec<f64>,
    /// `|⟨ref|E_k⟩|` for each reference position, per eigenstate.
    pub overlaps: Vec<Vec<f64>>,
    pub flagged: Vec<bool>,
}

/// Full eigensystem with IPRs and overlap amplitudes against the basis states
/// at `references` (subset positions, typically the two Néel states).
pub fn analyze_spectrum(h: &SparseOperator, references: &[usize], threshold: f64) -> Result<SpectrumAnalysis> {
    let eig = Eigensystem::dense(h)?;
    let n = eig.dim();
    let v = &eig.vectors;
    let ipr = (0..n)
        .map(|k| 1.0 / (0..n).map(|i| v[(i, k)].norm_sqr().powi(2)).sum::<f64>())
        .collect();
    let overlaps: Vec<Vec<f64>> = (0..n).map(|k| references.iter().map(|&r| v[(r, k)].norm()).collect()).collect();
    let flagged = overlaps.iter().map(|o| o.iter().any(|&x| x > threshold)).collect();
    Ok(SpectrumAnalysis { eigensystem: eig, ipr, overlaps, flagged })
}

impl SpectrumAnalysis {
    /// Energies of flagged states with levels closer than `tol` merged.
    pub fn flagged_levels(&self, tol: f64) -> Vec<f64> {
        let e: Vec<f64> = self
            .eigensystem
            .energies
            .iter()
            .zip(&self.flagged)
            .filter(|(_, &f)| f)
            .map(|(&e, _)| e)
            .collect();
        merge_levels(&e, tol)
    }
}

/// Collapses runs of sorted levels closer than `tol` to their first member.
pub fn merge_levels(sorted: &[f64], tol: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(sorted.len());
    for &e in sorted {
        match out.last() {
            Some(&last) if e - last < tol => {}
            _ => out.push(e),
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct RStatReport {
    pub r_values: Vec<f64>,
    /// Normalized density on uniform bins over `[0, 1]`.
    pub histogram: Vec<f64>,
    pub mean: f64,
}

/// Gap ratios `r_n = min(δ_{n+1}/δ_n, δ_n/δ_{n+1})` of a sorted spectrum.
pub fn r_statistic(sorted: &[f64]) -> Result<RStatReport> {
    let levels = merge_levels(sorted, DEGENERACY_TOL);
    if levels.len() < 3 {
        return Err(Error::Input(format!("need at least 3 distinct levels, got {}", levels.len())));
    }
    let gaps: Vec<f64> = levels.windows(2).map(|w| w[1] - w[0]).collect();
    let r_values: Vec<f64> = gaps.windows(2).map(|g| (g[1] / g[0]).min(g[0] / g[1])).collect();
    let mean = r_values.iter().sum::<f64>() / r_values.len() as f64;
    let mut histogram = vec![0.0; HISTOGRAM_BINS];
    for &r in &r_values {
        let b = ((r * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1);
        histogram[b] += 1.0;
    }
    let norm = r_values.len() as f64 / HISTOGRAM_BINS as f64;
    for h in &mut histogram {
        *h /= norm;
    }
    Ok(RStatReport { r_values, histogram, mean })
}
