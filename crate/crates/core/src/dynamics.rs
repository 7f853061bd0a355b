//! Time-dependent Schrödinger propagation and state observables.
//!
//! The propagator is an exponential midpoint rule,
//! `psi(t+dt) = exp(-i dt H(t+dt/2)) psi(t)`, with the exponential evaluated
//! through the eigendecomposition of the (Hermitian) midpoint Hamiltonian.
//! Each step is exactly unitary up to eigensolver roundoff, which matters for
//! the invariant-spectrum checks elsewhere in the crate.

use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // needed for no_std builds; shadowed when std is in the crate graph
use num_traits::Float;

use crate::grid::Grid;
use crate::matrix::{C64, CMatrix, StateVector};
use crate::spectral::{self, SpectralError};

#[derive(Debug, Clone, PartialEq)]
pub enum DynamicsError {
    NonHermitian { t: f64, error: f64 },
    NotNormalized { norm: f64 },
    Spectral(SpectralError),
    NoSuchEigenvalue { requested: f64, closest: f64 },
    DegenerateEigenvalue { eigenvalue: f64 },
}

impl fmt::Display for DynamicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonHermitian { t, error } => {
                write!(f, "Hamiltonian not Hermitian at t={t} (deviation {error:.3e})")
            }
            Self::NotNormalized { norm } => {
                write!(f, "state norm {norm} is not 1 within tolerance")
            }
            Self::Spectral(e) => write!(f, "eigensolver failure: {e}"),
            Self::NoSuchEigenvalue { requested, closest } => write!(
                f,
                "no eigenvalue within 1e-8 of {requested} (closest {closest})"
            ),
            Self::DegenerateEigenvalue { eigenvalue } => {
                write!(f, "eigenvalue {eigenvalue} is degenerate")
            }
        }
    }
}

impl core::error::Error for DynamicsError {}

impl From<SpectralError> for DynamicsError {
    fn from(e: SpectralError) -> Self {
        Self::Spectral(e)
    }
}

/// States sampled along a propagation grid.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub grid: Grid,
    pub states: Vec<StateVector>,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, k: usize) -> &StateVector {
        &self.states[k]
    }

    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("record has at least one state")
    }

    /// Largest deviation of any recorded state norm from 1.
    pub fn max_norm_drift(&self) -> f64 {
        self.states
            .iter()
            .map(|s| (s.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Propagates `psi0` under the time-dependent Hamiltonian `h_at` over `grid`.
pub fn propagate(
    h_at: impl Fn(f64) -> CMatrix,
    psi0: &StateVector,
    grid: &Grid,
) -> Result<TrajectoryRecord, DynamicsError> {
    let norm = psi0.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(DynamicsError::NotNormalized { norm });
    }
    let dt = grid.step();
    let mut states = Vec::with_capacity(grid.len());
    states.push(psi0.clone());
    let mut psi = psi0.clone();
    for k in 0..grid.steps() {
        let tm = grid.time(k) + 0.5 * dt;
        let h = h_at(tm);
        let herm = h.hermiticity_error();
        if herm > 1e-13 * f64::max(1.0, h.max_abs()) {
            return Err(DynamicsError::NonHermitian { t: tm, error: herm });
        }
        psi = step_exponential(&h, dt, &psi)?;
        states.push(psi.clone());
    }
    Ok(TrajectoryRecord { grid: grid.clone(), states })
}

/// `exp(-i dt H) psi` via eigendecomposition.
pub fn step_exponential(
    h: &CMatrix,
    dt: f64,
    psi: &StateVector,
) -> Result<StateVector, DynamicsError> {
    let sys = spectral::eigh(h)?;
    let n = h.dim();
    // coefficients in the eigenbasis
    let mut coeffs = Vec::with_capacity(n);
    for k in 0..n {
        coeffs.push(sys.vector(k).inner(psi));
    }
    let mut out = alloc::vec![C64::new(0.0, 0.0); n];
    for (k, c) in coeffs.iter().enumerate() {
        let phase = C64::new(0.0, -dt * sys.value(k)).exp();
        let v = sys.vector(k);
        for i in 0..n {
            out[i] += v[i] * c * phase;
        }
    }
    Ok(StateVector::new(out))
}

/// Unitary `exp(-i dt H)` as a matrix.
pub fn exponential(h: &CMatrix, dt: f64) -> Result<CMatrix, DynamicsError> {
    let sys = spectral::eigh(h)?;
    let n = h.dim();
    Ok(CMatrix::from_fn(n, |i, j| {
        (0..n)
            .map(|k| {
                let phase = C64::new(0.0, -dt * sys.value(k)).exp();
                sys.vectors()[(i, k)] * sys.vectors()[(j, k)].conj() * phase
            })
            .sum()
    }))
}

/// `|<a|b>|^2`; symmetric and global-phase invariant.
pub fn fidelity(a: &StateVector, b: &StateVector) -> f64 {
    a.inner(b).norm_sqr()
}

/// Probability of observing the (nondegenerate) eigenstate of `a` with the
/// given eigenvalue in state `psi`.
pub fn eigen_probability(
    psi: &StateVector,
    a: &CMatrix,
    eigenvalue: f64,
) -> Result<f64, DynamicsError> {
    let sys = spectral::eigh(a)?;
    let mut matches = Vec::new();
    let mut closest = f64::infinity();
    let mut closest_val = f64::nan();
    for k in 0..sys.dim() {
        let dist = (sys.value(k) - eigenvalue).abs();
        if dist < 1e-8 {
            matches.push(k);
        }
        if dist < closest {
            closest = dist;
            closest_val = sys.value(k);
        }
    }
    match matches.len() {
        0 => Err(DynamicsError::NoSuchEigenvalue { requested: eigenvalue, closest: closest_val }),
        1 => Ok(sys.vector(matches[0]).inner(psi).norm_sqr()),
        _ => Err(DynamicsError::DegenerateEigenvalue { eigenvalue }),
    }
}

/// `<psi|H^2|psi> - <psi|H|psi>^2`, clamped to zero within `-1e-12`.
pub fn energy_variance(psi: &StateVector, h: &CMatrix) -> f64 {
    let hpsi = h.apply(psi);
    let mean = psi.inner(&hpsi).re;
    let second = hpsi.inner(&hpsi).re;
    let var = second - mean * mean;
    if var < 0.0 {
        debug_assert!(var > -1e-12, "variance {var} below roundoff tolerance");
        0.0
    } else {
        var
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_hamiltonian_is_static() {
        let psi0 = StateVector::from_real(&[0.6, 0.8]);
        let grid = Grid::span(0.0, 1.0, 100);
        let rec = propagate(|_| CMatrix::zeros(2), &psi0, &grid).unwrap();
        assert!(rec.final_state().max_abs_diff(&psi0) < 1e-14);
    }

    #[test]
    fn eigenstate_picks_up_phase_only() {
        let h = CMatrix::real_diag(&[0.7, -0.3]);
        let psi0 = StateVector::basis_state(2, 0);
        let grid = Grid::span(0.0, 2.0, 200);
        let rec = propagate(|_| h.clone(), &psi0, &grid).unwrap();
        let expect = psi0.scaled(C64::new(0.0, -0.7 * 2.0).exp());
        assert!(rec.final_state().max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn rejects_unnormalized_input() {
        let psi0 = StateVector::from_real(&[1.0, 1.0]);
        let grid = Grid::span(0.0, 1.0, 10);
        assert!(matches!(
            propagate(|_| CMatrix::zeros(2), &psi0, &grid),
            Err(DynamicsError::NotNormalized { .. })
        ));
    }

    #[test]
    fn rejects_non_hermitian_hamiltonian() {
        let mut h = CMatrix::zeros(2);
        h[(0, 1)] = C64::new(1.0, 0.0);
        let psi0 = StateVector::basis_state(2, 0);
        let grid = Grid::span(0.0, 1.0, 4);
        assert!(matches!(
            propagate(|_| h.clone(), &psi0, &grid),
            Err(DynamicsError::NonHermitian { .. })
        ));
    }

    #[test]
    fn fidelity_extremes() {
        let a = StateVector::basis_state(3, 0);
        let b = StateVector::basis_state(3, 1);
        assert_eq!(fidelity(&a, &a), 1.0);
        assert_eq!(fidelity(&a, &b), 0.0);
    }

    #[test]
    fn eigen_probability_cases() {
        let h = CMatrix::real_diag(&[1.0, 2.0, 3.0]);
        let psi = StateVector::basis_state(3, 1);
        assert!((eigen_probability(&psi, &h, 2.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(
            eigen_probability(&psi, &h, 2.5),
            Err(DynamicsError::NoSuchEigenvalue { .. })
        ));
        let deg = CMatrix::real_diag(&[1.0, 1.0, 3.0]);
        assert!(matches!(
            eigen_probability(&psi, &deg, 1.0),
            Err(DynamicsError::DegenerateEigenvalue { .. })
        ));
    }

    #[test]
    fn probabilities_sum_to_one() {
        let h = CMatrix::from_slice(
            3,
            &[
                C64::new(0.2, 0.0),
                C64::new(0.5, -0.1),
                C64::new(0.0, 0.3),
                C64::new(0.5, 0.1),
                C64::new(-0.4, 0.0),
                C64::new(0.7, 0.0),
                C64::new(0.0, -0.3),
                C64::new(0.7, 0.0),
                C64::new(1.0, 0.0),
            ],
        );
        let psi = StateVector::new(alloc::vec![
            C64::new(0.3, 0.2),
            C64::new(-0.1, 0.6),
            C64::new(0.5, 0.1),
        ])
        .normalized()
        .unwrap();
        let sys = spectral::eigh(&h).unwrap();
        let total: f64 = (0..3)
            .map(|k| eigen_probability(&psi, &h, sys.value(k)).unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn variance_zero_iff_eigenstate() {
        let h = CMatrix::real_diag(&[1.0, -1.0]);
        assert_eq!(energy_variance(&StateVector::basis_state(2, 0), &h), 0.0);
        let sup = StateVector::from_real(&[core::f64::consts::FRAC_1_SQRT_2; 2]);
        // equal superposition of +/-E eigenstates: variance E^2
        assert!((energy_variance(&sup, &h) - 1.0).abs() < 1e-14);
    }
}
