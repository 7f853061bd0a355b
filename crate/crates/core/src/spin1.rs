//! The spin-1 rotating-field benchmark: operators, the driving protocol,
//! the closed-form adiabatic state, and the standard perturbation set.
//!
//! The adiabatic part is `H_0(t) = h_0 (cos(wt) S_1 + sin(wt) S_2)`; its
//! counter-diabatic completion is `w S_3`. Driving starts from the `S_1`
//! eigenstate with eigenvalue +1 and the benchmark observable is the
//! probability of the `S_2` eigenstate with eigenvalue +1.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // needed for no_std builds; shadowed when std is in the crate graph
use num_traits::Float;

use crate::algebra::{CoeffVector, GeneratorBasis};
use crate::driving::{self, Protocol};
use crate::matrix::{C64, CMatrix, StateVector};
use crate::stability::Perturbation;

/// Spin-1 operator `S_1`.
pub fn s1() -> CMatrix {
    let r = core::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_real(3, &[0.0, r, 0.0, r, 0.0, r, 0.0, r, 0.0])
}

/// Spin-1 operator `S_2`.
pub fn s2() -> CMatrix {
    let r = core::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_slice(
        3,
        &[
            C64::new(0.0, 0.0),
            C64::new(0.0, -r),
            C64::new(0.0, 0.0),
            C64::new(0.0, r),
            C64::new(0.0, 0.0),
            C64::new(0.0, -r),
            C64::new(0.0, 0.0),
            C64::new(0.0, r),
            C64::new(0.0, 0.0),
        ],
    )
}

/// Spin-1 operator `S_3 = diag(1, 0, -1)`.
pub fn s3() -> CMatrix {
    CMatrix::real_diag(&[1.0, 0.0, -1.0])
}

fn lambda4() -> CMatrix {
    CMatrix::from_real(3, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0])
}

fn lambda5() -> CMatrix {
    CMatrix::from_slice(
        3,
        &[
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, -1.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
        ],
    )
}

fn lambda8() -> CMatrix {
    let r = 1.0 / 3.0f64.sqrt();
    CMatrix::real_diag(&[r, r, -2.0 * r])
}

/// The four benchmark perturbation directions, with prefactors chosen so the
/// instability magnitudes match in time average.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinPerturbation {
    S3,
    Lambda4,
    Lambda5,
    Lambda8,
}

impl SpinPerturbation {
    pub const ALL: [Self; 4] = [Self::S3, Self::Lambda4, Self::Lambda5, Self::Lambda8];

    pub fn label(&self) -> &'static str {
        match self {
            Self::S3 => "s3",
            Self::Lambda4 => "l4",
            Self::Lambda5 => "l5",
            Self::Lambda8 => "l8",
        }
    }

    /// The prefactored operator `D` with `dH = dh(t) D`.
    pub fn direction(&self) -> CMatrix {
        match self {
            Self::S3 => s3(),
            Self::Lambda4 => lambda4().scaled_re(2.0 * (2.0f64 / 3.0).sqrt()),
            Self::Lambda5 => lambda5().scaled_re(2.0 * (2.0f64 / 3.0).sqrt()),
            Self::Lambda8 => lambda8().scaled_re(4.0 / 3.0),
        }
    }
}

impl core::str::FromStr for SpinPerturbation {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "s3" => Ok(Self::S3),
            "l4" => Ok(Self::Lambda4),
            "l5" => Ok(Self::Lambda5),
            "l8" => Ok(Self::Lambda8),
            _ => Err(()),
        }
    }
}

/// One benchmark perturbation with constant amplitude `delta_h`.
pub fn perturbation(kind: SpinPerturbation, delta_h: f64) -> Perturbation {
    Perturbation::constant(kind.label(), delta_h, kind.direction())
}

/// All four benchmark perturbations.
pub fn perturbation_set(delta_h: f64) -> Vec<Perturbation> {
    SpinPerturbation::ALL
        .iter()
        .map(|&k| perturbation(k, delta_h))
        .collect()
}

/// Rotating-field protocol `H_0(t) = h_0 (cos(wt) S_1 + sin(wt) S_2)` on the
/// Gell-Mann basis (constraint labels {1, 2, 6, 7}), with analytic
/// derivative.
pub fn rotating_protocol(h0: f64, omega: f64) -> Protocol {
    let basis = GeneratorBasis::gell_mann(3).expect("N=3 basis");
    // S_1 = (X_1 + X_6)/sqrt(3), S_2 = (X_2 + X_7)/sqrt(3)
    let amp = h0 / 3.0f64.sqrt();
    Protocol::new(basis, vec![1, 2, 6, 7], move |t| {
        let c = amp * (omega * t).cos();
        let s = amp * (omega * t).sin();
        CoeffVector::from_components(8, &[(1, c), (6, c), (2, s), (7, s)])
    })
    .expect("valid constraint labels")
    .with_derivative(move |t| {
        let c = -amp * omega * (omega * t).sin();
        let s = amp * omega * (omega * t).cos();
        CoeffVector::from_components(8, &[(1, c), (6, c), (2, s), (7, s)])
    })
}

/// Rotating-field protocol with its counter-diabatic completion attached
/// (computed spectrally at each sample time).
pub fn rotating_protocol_with_cd(h0: f64, omega: f64) -> Protocol {
    let inner = rotating_protocol(h0, omega);
    rotating_protocol(h0, omega).with_completion(move |t| {
        let h1 = driving::counter_diabatic(&inner, t)
            .expect("rotating-field spectrum is nondegenerate");
        inner
            .basis()
            .to_coeffs(&h1)
            .expect("counter term is Hermitian")
    })
}

/// Closed-form adiabatic state `(1/2) (exp(-iwt), sqrt(2), exp(iwt))`:
/// the instantaneous `+h_0` eigenstate of the rotating field in a smooth
/// gauge.
pub fn adiabatic_reference(omega: f64, t: f64) -> StateVector {
    let p = omega * t;
    StateVector::new(vec![
        C64::new(0.0, -p).exp() * 0.5,
        C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0),
        C64::new(0.0, p).exp() * 0.5,
    ])
}

/// `S_1` eigenstate with eigenvalue +1, the driving's initial condition.
pub fn initial_state() -> StateVector {
    adiabatic_reference(0.0, 0.0)
}
