//! Second-order stability of the driven passage under operator
//! perturbations `H -> H + dH`.
//!
//! The quadratic form of the action around the extremal trajectory is
//!
//! `I(t) = -(<dH^2> - <dH>^2) / (2 dE^2)
//!         + (3/8) (<H dH + dH H> - 2 <dH><H>)^2 / dE^4`
//!
//! with `<.>` the expectation in the evolving state and `dE` its energy
//! variance; `I(t) > 0` is the stability condition. On an eigenstate of the
//! adiabatic part with an off-diagonal counter term `H_1`, `dE^2 = <H_1^2>`
//! and the form reduces to the specialization implemented by
//! [`instability_cd`]. Perturbations proportional to `H_1` give `I = c^2`;
//! perturbations anticommuting with `H_1` (and centered) give `I < 0`.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // needed for no_std builds; shadowed when std is in the crate graph
use num_traits::Float;

use crate::driving::{self, DrivingError, Protocol};
use crate::grid::Grid;
use crate::matrix::{CMatrix, StateVector};
use crate::spectral::{self, SpectralError};

#[derive(Debug, Clone, PartialEq)]
pub enum StabilityError {
    /// Energy variance vanishes; the quadratic form is undefined.
    ZeroVariance,
    /// The state is not an eigenstate of the adiabatic part: the counter
    /// term has a diagonal matrix element.
    NonVanishingDiagonal { value: f64 },
    /// `<H_1^2>` numerically zero.
    ZeroCounterTerm,
    Driving(DrivingError),
    Spectral(SpectralError),
}

impl fmt::Display for StabilityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ZeroVariance => write!(f, "energy variance vanishes"),
            Self::NonVanishingDiagonal { value } => write!(
                f,
                "counter term has diagonal element {value:.3e} in the supplied state"
            ),
            Self::ZeroCounterTerm => write!(f, "<H_1^2> vanishes"),
            Self::Driving(e) => write!(f, "{e}"),
            Self::Spectral(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for StabilityError {}

impl From<DrivingError> for StabilityError {
    fn from(e: DrivingError) -> Self {
        Self::Driving(e)
    }
}

impl From<SpectralError> for StabilityError {
    fn from(e: SpectralError) -> Self {
        Self::Spectral(e)
    }
}

/// A labeled time-dependent perturbation `dH(t) = dh(t) * D(t)`.
pub struct Perturbation {
    label: String,
    amplitude: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    direction: Box<dyn Fn(f64) -> CMatrix + Send + Sync>,
}

impl fmt::Debug for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perturbation({})", self.label)
    }
}

impl Perturbation {
    pub fn new(
        label: impl Into<String>,
        amplitude: impl Fn(f64) -> f64 + Send + Sync + 'static,
        direction: impl Fn(f64) -> CMatrix + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            amplitude: Box::new(amplitude),
            direction: Box::new(direction),
        }
    }

    /// Constant amplitude times a fixed operator.
    pub fn constant(label: impl Into<String>, delta_h: f64, op: CMatrix) -> Self {
        Self::new(label, move |_| delta_h, move |_| op.clone())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn amplitude_at(&self, t: f64) -> f64 {
        (self.amplitude)(t)
    }

    pub fn direction_at(&self, t: f64) -> CMatrix {
        (self.direction)(t)
    }

    /// `dH(t)`.
    pub fn operator_at(&self, t: f64) -> CMatrix {
        self.direction_at(t).scaled_re(self.amplitude_at(t))
    }
}

fn mean(psi: &StateVector, a: &CMatrix) -> f64 {
    a.expectation(psi).re
}

fn second_moment(psi: &StateVector, a: &CMatrix) -> f64 {
    let apsi = a.apply(psi);
    apsi.inner(&apsi).re
}

/// Quadratic form of the action for a general extremal trajectory.
pub fn instability_general(
    psi: &StateVector,
    h: &CMatrix,
    dh: &CMatrix,
) -> Result<f64, StabilityError> {
    let de2 = second_moment(psi, h) - mean(psi, h).powi(2);
    if de2 <= 1e-20 {
        return Err(StabilityError::ZeroVariance);
    }
    let var = second_moment(psi, dh) - mean(psi, dh).powi(2);
    let sym = mean(psi, &CMatrix::anticommutator(h, dh)) - 2.0 * mean(psi, dh) * mean(psi, h);
    Ok(-var / (2.0 * de2) + 0.375 * sym * sym / (de2 * de2))
}

/// Quadratic form specialized to counter-diabatic driving: `psi` must be an
/// eigenstate of the adiabatic part (so `<psi|H_1|psi> = 0`).
pub fn instability_cd(
    psi: &StateVector,
    h1: &CMatrix,
    dh: &CMatrix,
) -> Result<f64, StabilityError> {
    let diag = h1.expectation(psi).norm();
    if diag >= 1e-10 {
        return Err(StabilityError::NonVanishingDiagonal { value: diag });
    }
    let h1sq = second_moment(psi, h1);
    if h1sq <= 1e-12 {
        return Err(StabilityError::ZeroCounterTerm);
    }
    let var = second_moment(psi, dh) - mean(psi, dh).powi(2);
    let sym = mean(psi, &CMatrix::anticommutator(h1, dh));
    Ok(-var / (2.0 * h1sq) + 0.375 * sym * sym / (h1sq * h1sq))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    /// `I(t) > 0` everywhere.
    Stable,
    /// `I(t) < 0` somewhere.
    Unstable,
    /// Neither strictly positive everywhere nor negative anywhere.
    Marginal,
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub classification: Stability,
}

/// Evaluates `I(t)` for `perturbation` along the branch-`branch` adiabatic
/// trajectory of the protocol and classifies the passage.
///
/// The form is evaluated on the unperturbed trajectory; the counter term is
/// the protocol completion when present, else the spectral construction.
pub fn stability_report(
    protocol: &Protocol,
    branch: usize,
    perturbation: &Perturbation,
    grid: &Grid,
) -> Result<StabilityReport, StabilityError> {
    let path = spectral::track_eigenpath(|t| protocol.h0_matrix(t), grid)?;
    let mut values = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let t = grid.time(k);
        let psi = path.state(k, branch);
        let h1 = match protocol.h1_matrix(t) {
            Some(m) => m,
            None => driving::counter_diabatic(protocol, t)?,
        };
        let dh = perturbation.operator_at(t);
        values.push(instability_cd(&psi, &h1, &dh)?);
    }
    let tol = 1e-12;
    let classification = if values.iter().any(|&v| v < -tol) {
        Stability::Unstable
    } else if values.iter().all(|&v| v > tol) {
        Stability::Stable
    } else {
        Stability::Marginal
    };
    Ok(StabilityReport { grid: grid.clone(), values, classification })
}
