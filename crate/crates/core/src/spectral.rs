//! Hermitian eigendecomposition and phase-continuous eigenvector tracking
//! along a time grid.
//!
//! The eigensolver is a cyclic Jacobi iteration on the complex Hermitian
//! matrix; adequate and dependency-free for the small dimensions this crate
//! targets. Eigenvectors carry a deterministic phase: the largest-magnitude
//! component is made real positive.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // needed for no_std builds; shadowed when std is in the crate graph
use num_traits::Float;

use crate::grid::Grid;
use crate::matrix::{C64, CMatrix, StateVector};

/// Spectra closer than this are treated as degenerate.
pub const GAP_TOL: f64 = 1e-8;

/// Minimum |overlap| for unambiguous branch tracking between grid samples.
pub const MIN_OVERLAP: f64 = 0.9;

const MAX_SWEEPS: usize = 100;
/// Convergence threshold on the off-diagonal Frobenius norm, relative to
/// the matrix Frobenius norm.
const OFFDIAG_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub enum SpectralError {
    NonHermitian { error: f64 },
    NoConvergence { off_norm: f64 },
    NearDegeneracy { t: f64, gap: f64 },
    AmbiguousTracking { t: f64, branch: usize, overlap: f64 },
    BranchOutOfRange { branch: usize, dim: usize },
}

impl fmt::Display for SpectralError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonHermitian { error } => {
                write!(f, "matrix is not Hermitian (deviation {error:.3e})")
            }
            Self::NoConvergence { off_norm } => write!(
                f,
                "Jacobi iteration did not converge (off-diagonal norm {off_norm:.3e})"
            ),
            Self::NearDegeneracy { t, gap } => {
                write!(f, "near-degenerate spectrum at t={t} (gap {gap:.3e})")
            }
            Self::AmbiguousTracking { t, branch, overlap } => write!(
                f,
                "branch {branch} tracking ambiguous at t={t} (best overlap {overlap:.3})"
            ),
            Self::BranchOutOfRange { branch, dim } => {
                write!(f, "branch {branch} outside 0..{dim}")
            }
        }
    }
}

impl core::error::Error for SpectralError {}

/// Eigenvalues (ascending for a fresh decomposition) and orthonormal
/// eigenvector columns of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    values: Vec<f64>,
    vectors: CMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// Eigenvector column `k`.
    pub fn vector(&self, k: usize) -> StateVector {
        let n = self.dim();
        StateVector::new((0..n).map(|i| self.vectors[(i, k)]).collect())
    }

    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    /// `sum_n E_n |n><n|`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.dim();
        CMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| self.vectors[(i, k)] * self.vectors[(j, k)].conj() * self.values[k])
                .sum()
        })
    }

    /// Smallest gap between adjacent eigenvalues (sorted internally).
    pub fn min_gap(&self) -> f64 {
        let mut sorted = self.values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sorted
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::infinity(), f64::min)
    }
}

/// Canonical eigenvector phase: the largest-magnitude component is made real
/// positive. Idempotent.
pub fn canonicalize_phase(v: &StateVector) -> StateVector {
    let mut best = 0usize;
    let mut best_mag = 0.0f64;
    for i in 0..v.dim() {
        let m = v[i].norm();
        if m > best_mag {
            best_mag = m;
            best = i;
        }
    }
    if best_mag == 0.0 {
        return v.clone();
    }
    let phase = v[best].conj() / C64::new(best_mag, 0.0);
    v.scaled(phase)
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Eigenvalues come out ascending; each eigenvector carries the canonical
/// phase (largest component real positive).
pub fn eigh(h: &CMatrix) -> Result<EigenSystem, SpectralError> {
    let herm = h.hermiticity_error();
    if herm > 1e-13 * f64::max(1.0, h.max_abs()) {
        return Err(SpectralError::NonHermitian { error: herm });
    }
    let n = h.dim();
    let mut a = h.clone();
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_norm();
    if scale > 0.0 {
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            if offdiag_norm(&a) <= OFFDIAG_TOL * scale {
                converged = true;
                break;
            }
            for p in 0..n - 1 {
                for q in (p + 1)..n {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
        if !converged && offdiag_norm(&a) > OFFDIAG_TOL * scale {
            return Err(SpectralError::NoConvergence { off_norm: offdiag_norm(&a) });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let values: Vec<f64> = order.iter().map(|&k| a[(k, k)].re).collect();
    let mut vectors = CMatrix::zeros(n);
    for (col, &k) in order.iter().enumerate() {
        let raw = StateVector::new((0..n).map(|i| v[(i, k)]).collect());
        let fixed = canonicalize_phase(&raw);
        for i in 0..n {
            vectors[(i, col)] = fixed[i];
        }
    }
    Ok(EigenSystem { values, vectors })
}

fn offdiag_norm(a: &CMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One complex Jacobi rotation annihilating `a[(p, q)]`, accumulated into `v`.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let phase = apq / C64::new(mag, 0.0);
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let n = a.dim();
    // A <- U^dag A (rows p, q); U_pp = c, U_pq = s*phase, U_qp = -s*conj(phase).
    for r in 0..n {
        let arp = a[(p, r)];
        let arq = a[(q, r)];
        a[(p, r)] = arp * c - arq * s * phase;
        a[(q, r)] = arp * s * phase.conj() + arq * c;
    }
    // A <- A U (columns p, q).
    for r in 0..n {
        let apr = a[(r, p)];
        let aqr = a[(r, q)];
        a[(r, p)] = apr * c - aqr * s * phase.conj();
        a[(r, q)] = apr * s * phase + aqr * c;
    }
    // V <- V U.
    for r in 0..n {
        let vp = v[(r, p)];
        let vq = v[(r, q)];
        v[(r, p)] = vp * c - vq * s * phase.conj();
        v[(r, q)] = vp * s * phase + vq * c;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
}

/// Tolerances for [`track_eigenpath_with`].
#[derive(Debug, Clone, Copy)]
pub struct TrackingOptions {
    pub gap_tol: f64,
    pub min_overlap: f64,
}

impl Default for TrackingOptions {
    fn default() -> Self {
        Self { gap_tol: GAP_TOL, min_overlap: MIN_OVERLAP }
    }
}

/// Eigen-decompositions along a time grid with continuous branch labels and
/// phases: branch `n` at `t_{k+1}` maximizes |overlap| with branch `n` at
/// `t_k` and is phase-aligned so the overlap is real positive.
#[derive(Debug, Clone)]
pub struct EigenPath {
    times: Vec<f64>,
    systems: Vec<EigenSystem>,
}

impl EigenPath {
    pub fn len(&self) -> usize {
        self.systems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.systems.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.systems[0].dim()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.times[k]
    }

    pub fn system(&self, k: usize) -> &EigenSystem {
        &self.systems[k]
    }

    /// Branch-`n` eigenstate at sample `k`.
    pub fn state(&self, k: usize, branch: usize) -> StateVector {
        self.systems[k].vector(branch)
    }

    pub fn value(&self, k: usize, branch: usize) -> f64 {
        self.systems[k].value(branch)
    }

    /// Keeps every `stride`-th sample (the first sample always included).
    pub fn decimated(&self, stride: usize) -> EigenPath {
        assert!(stride > 0);
        EigenPath {
            times: self.times.iter().copied().step_by(stride).collect(),
            systems: self.systems.iter().cloned().step_by(stride).collect(),
        }
    }
}

/// Tracks eigenbranches of `h_at` along `grid` with default tolerances.
pub fn track_eigenpath(
    h_at: impl Fn(f64) -> CMatrix,
    grid: &Grid,
) -> Result<EigenPath, SpectralError> {
    track_eigenpath_with(h_at, grid, TrackingOptions::default())
}

pub fn track_eigenpath_with(
    h_at: impl Fn(f64) -> CMatrix,
    grid: &Grid,
    opts: TrackingOptions,
) -> Result<EigenPath, SpectralError> {
    let mut times = Vec::with_capacity(grid.len());
    let mut systems: Vec<EigenSystem> = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let t = grid.time(k);
        let sys = eigh(&h_at(t))?;
        let gap = sys.min_gap();
        if gap < opts.gap_tol {
            return Err(SpectralError::NearDegeneracy { t, gap });
        }
        let aligned = match systems.last() {
            None => sys,
            Some(prev) => align_to(prev, sys, t, opts.min_overlap)?,
        };
        times.push(t);
        systems.push(aligned);
    }
    Ok(EigenPath { times, systems })
}

/// Permutes and re-phases `sys` so each branch continues the corresponding
/// branch of `prev`.
fn align_to(
    prev: &EigenSystem,
    sys: EigenSystem,
    t: f64,
    min_overlap: f64,
) -> Result<EigenSystem, SpectralError> {
    let n = sys.dim();
    let mut used = vec![false; n];
    let mut values = vec![0.0; n];
    let mut vectors = CMatrix::zeros(n);
    for branch in 0..n {
        let prev_vec = prev.vector(branch);
        let mut best_col = usize::MAX;
        let mut best_ov = C64::new(0.0, 0.0);
        for (col, &taken) in used.iter().enumerate() {
            if taken {
                continue;
            }
            let ov = prev_vec.inner(&sys.vector(col));
            if ov.norm() > best_ov.norm() {
                best_ov = ov;
                best_col = col;
            }
        }
        if best_col == usize::MAX || best_ov.norm() < min_overlap {
            return Err(SpectralError::AmbiguousTracking {
                t,
                branch,
                overlap: best_ov.norm(),
            });
        }
        used[best_col] = true;
        let phase = best_ov.conj() / C64::new(best_ov.norm(), 0.0);
        let aligned = sys.vector(best_col).scaled(phase);
        values[branch] = sys.value(best_col);
        for i in 0..n {
            vectors[(i, branch)] = aligned[i];
        }
    }
    Ok(EigenSystem { values, vectors })
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    /// Assembles a path from raw (values, branch states) parts, bypassing
    /// tracking. For gauge experiments in tests only.
    pub(crate) fn path_from_parts(
        times: Vec<f64>,
        parts: Vec<(Vec<f64>, Vec<StateVector>)>,
    ) -> EigenPath {
        let systems = parts
            .into_iter()
            .map(|(values, states)| {
                let n = values.len();
                let mut vectors = CMatrix::zeros(n);
                for (col, s) in states.iter().enumerate() {
                    for i in 0..n {
                        vectors[(i, col)] = s[i];
                    }
                }
                EigenSystem { values, vectors }
            })
            .collect();
        EigenPath { times, systems }
    }
}
