//! Transitionless driving: splitting a protocol into `H = H_0 + H_1`,
//! the spectral counter-diabatic construction, invariant phases, and the
//! exact adiabatic solution.
//!
//! A [`Protocol`] carries the externally fixed components `h^(0)_a(t)` of the
//! Hamiltonian on a generator basis (the constraint part, which defines the
//! adiabatic frame) and optionally a solved completion `h^(1)_p(t)`. The
//! counter-diabatic term is built gauge-safely from
//! `<m|dH_0/dt|n> / (E_n - E_m)` rather than from eigenvector derivatives.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // needed for no_std builds; shadowed when std is in the crate graph
use num_traits::Float;

use crate::algebra::{AlgebraError, CoeffVector, GeneratorBasis};
use crate::dynamics::{self, DynamicsError};
use crate::grid::Grid;
use crate::matrix::{C64, CMatrix, StateVector};
use crate::spectral::{self, EigenPath, SpectralError, GAP_TOL};

/// Phase integration is refined (grid doubling) until the endpoint phase
/// moves less than this.
pub const PHASE_TOL: f64 = 1e-8;

const MAX_REFINEMENTS: usize = 6;

type TimeFn = Box<dyn Fn(f64) -> CoeffVector + Send + Sync>;

#[derive(Debug, Clone, PartialEq)]
pub enum DrivingError {
    Algebra(AlgebraError),
    Spectral(SpectralError),
    Dynamics(DynamicsError),
    EmptyConstraint,
    InvalidLabel { label: usize, dim: usize },
    /// `h^(0)` (or a non-overlapping `h^(1)`) has weight off its index set.
    OffSupport { label: usize, t: f64, value: f64 },
    WeightNormalization { sum: f64 },
    EqualBranches { branch: usize },
    /// Endpoint phase still moving after the refinement cap.
    PhaseRefinementStalled { change: f64 },
}

impl fmt::Display for DrivingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Algebra(e) => write!(f, "{e}"),
            Self::Spectral(e) => write!(f, "{e}"),
            Self::Dynamics(e) => write!(f, "{e}"),
            Self::EmptyConstraint => write!(f, "constraint index set is empty"),
            Self::InvalidLabel { label, dim } => {
                write!(f, "generator label {label} outside 1..={dim}")
            }
            Self::OffSupport { label, t, value } => write!(
                f,
                "component {value:.3e} on generator {label} at t={t} lies off the declared support"
            ),
            Self::WeightNormalization { sum } => {
                write!(f, "branch weights have squared sum {sum}, expected 1")
            }
            Self::EqualBranches { branch } => {
                write!(f, "off-diagonal coupling needs two distinct branches, got {branch} twice")
            }
            Self::PhaseRefinementStalled { change } => write!(
                f,
                "phase integration not converged after {MAX_REFINEMENTS} refinements (last change {change:.3e})"
            ),
        }
    }
}

impl core::error::Error for DrivingError {}

impl From<AlgebraError> for DrivingError {
    fn from(e: AlgebraError) -> Self {
        Self::Algebra(e)
    }
}

impl From<SpectralError> for DrivingError {
    fn from(e: SpectralError) -> Self {
        Self::Spectral(e)
    }
}

impl From<DynamicsError> for DrivingError {
    fn from(e: DynamicsError) -> Self {
        Self::Dynamics(e)
    }
}

/// A time-parametrized Hamiltonian on a generator basis: closed-form
/// constraint components plus an optional solved completion.
pub struct Protocol {
    basis: GeneratorBasis,
    constraint: Vec<usize>,
    complement: Vec<usize>,
    h0_fn: TimeFn,
    dh0_fn: Option<TimeFn>,
    h1_fn: Option<TimeFn>,
    overlapping: bool,
    fd_step: f64,
}

impl fmt::Debug for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Protocol")
            .field("n", &self.basis.n())
            .field("constraint", &self.constraint)
            .field("has_derivative", &self.dh0_fn.is_some())
            .field("has_completion", &self.h1_fn.is_some())
            .field("overlapping", &self.overlapping)
            .finish()
    }
}

impl Protocol {
    /// Protocol with constraint components sampled by `h0_fn` on the given
    /// 1-based generator labels. The sampler must vanish off those labels.
    pub fn new(
        basis: GeneratorBasis,
        constraint: Vec<usize>,
        h0_fn: impl Fn(f64) -> CoeffVector + Send + Sync + 'static,
    ) -> Result<Self, DrivingError> {
        if constraint.is_empty() {
            return Err(DrivingError::EmptyConstraint);
        }
        let d = basis.d();
        let mut sorted = constraint;
        sorted.sort_unstable();
        sorted.dedup();
        for &a in &sorted {
            if a == 0 || a > d {
                return Err(DrivingError::InvalidLabel { label: a, dim: d });
            }
        }
        let complement = (1..=d).filter(|a| !sorted.contains(a)).collect();
        Ok(Self {
            basis,
            constraint: sorted,
            complement,
            h0_fn: Box::new(h0_fn),
            dh0_fn: None,
            h1_fn: None,
            overlapping: false,
            fd_step: 1e-6,
        })
    }

    /// Attaches an analytic time derivative of the constraint components.
    pub fn with_derivative(
        mut self,
        dh0_fn: impl Fn(f64) -> CoeffVector + Send + Sync + 'static,
    ) -> Self {
        self.dh0_fn = Some(Box::new(dh0_fn));
        self
    }

    /// Step for the central-difference fallback derivative.
    pub fn with_fd_step(mut self, step: f64) -> Self {
        assert!(step > 0.0 && step.is_finite());
        self.fd_step = step;
        self
    }

    /// Attaches solved completion components supported on the complement of
    /// the constraint set.
    pub fn with_completion(
        mut self,
        h1_fn: impl Fn(f64) -> CoeffVector + Send + Sync + 'static,
    ) -> Self {
        self.h1_fn = Some(Box::new(h1_fn));
        self.overlapping = false;
        self
    }

    /// Like [`Self::with_completion`] but the completion may share components
    /// with the constraint set (the case where the counter-diabatic term
    /// inevitably overlaps the constrained directions).
    pub fn with_overlapping_completion(
        mut self,
        h1_fn: impl Fn(f64) -> CoeffVector + Send + Sync + 'static,
    ) -> Self {
        self.h1_fn = Some(Box::new(h1_fn));
        self.overlapping = true;
        self
    }

    pub fn basis(&self) -> &GeneratorBasis {
        &self.basis
    }

    pub fn n(&self) -> usize {
        self.basis.n()
    }

    pub fn d(&self) -> usize {
        self.basis.d()
    }

    /// Constrained generator labels (1-based, sorted).
    pub fn constraint(&self) -> &[usize] {
        &self.constraint
    }

    /// Unconstrained generator labels (1-based, sorted).
    pub fn complement(&self) -> &[usize] {
        &self.complement
    }

    pub fn has_completion(&self) -> bool {
        self.h1_fn.is_some()
    }

    pub fn h0_at(&self, t: f64) -> CoeffVector {
        (self.h0_fn)(t)
    }

    /// Analytic derivative when attached, else central differences.
    pub fn dh0_at(&self, t: f64) -> CoeffVector {
        match &self.dh0_fn {
            Some(f) => f(t),
            None => {
                let h = self.fd_step;
                self.h0_at(t + h).sub(&self.h0_at(t - h)).scaled(0.5 / h)
            }
        }
    }

    pub fn h1_at(&self, t: f64) -> Option<CoeffVector> {
        self.h1_fn.as_ref().map(|f| f(t))
    }

    pub fn h0_matrix(&self, t: f64) -> CMatrix {
        self.basis.to_matrix(&self.h0_at(t))
    }

    pub fn h1_matrix(&self, t: f64) -> Option<CMatrix> {
        self.h1_at(t).map(|c| self.basis.to_matrix(&c))
    }

    /// Full Hamiltonian `H_0 + H_1` (just `H_0` when no completion is set).
    pub fn h_matrix(&self, t: f64) -> CMatrix {
        let h0 = self.h0_matrix(t);
        match self.h1_matrix(t) {
            Some(h1) => &h0 + &h1,
            None => h0,
        }
    }

    /// Checks the support invariants on every grid sample: `h^(0)` vanishes
    /// off the constraint set, and a non-overlapping `h^(1)` vanishes on it.
    pub fn validate_support(&self, grid: &Grid) -> Result<(), DrivingError> {
        for t in grid.times() {
            let h0 = self.h0_at(t);
            let tol = 1e-12 * f64::max(1.0, h0.vec_norm());
            for &a in &self.complement {
                let v = h0.component(a);
                if v.abs() > tol {
                    return Err(DrivingError::OffSupport { label: a, t, value: v });
                }
            }
            if let Some(h1) = self.h1_at(t) {
                if !self.overlapping {
                    let tol1 = 1e-12 * f64::max(1.0, h1.vec_norm());
                    for &a in &self.constraint {
                        let v = h1.component(a);
                        if v.abs() > tol1 {
                            return Err(DrivingError::OffSupport { label: a, t, value: v });
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Counter-diabatic term `H_1(t) = i sum_{m != n} |m><m| dn/dt ><n|` for the
/// constraint Hamiltonian of `protocol`, built from
/// `<m|dH_0/dt|n>/(E_n - E_m)` in the instantaneous eigenbasis.
///
/// The result is Hermitian with vanishing diagonal in that eigenbasis.
pub fn counter_diabatic(protocol: &Protocol, t: f64) -> Result<CMatrix, DrivingError> {
    let h0 = protocol.h0_matrix(t);
    let sys = spectral::eigh(&h0)?;
    let gap = sys.min_gap();
    if gap < GAP_TOL {
        return Err(SpectralError::NearDegeneracy { t, gap }.into());
    }
    let dh = protocol.basis().to_matrix(&protocol.dh0_at(t));
    let n = protocol.n();
    let v = sys.vectors();
    // W = V^dag dH V
    let w = &(&v.adjoint() * &dh) * v;
    let mut b = CMatrix::zeros(n);
    for m in 0..n {
        for nn in 0..n {
            if m != nn {
                b[(m, nn)] = C64::new(0.0, 1.0) * w[(m, nn)] / (sys.value(nn) - sys.value(m));
            }
        }
    }
    Ok(&(v * &b) * &v.adjoint())
}

/// `<m|dn/dt>` at grid index `k`, from the protocol derivative over the gap.
pub fn offdiag_coupling(
    protocol: &Protocol,
    path: &EigenPath,
    m: usize,
    n: usize,
    k: usize,
) -> Result<C64, DrivingError> {
    if m == n {
        return Err(DrivingError::EqualBranches { branch: m });
    }
    let dim = path.dim();
    if m >= dim || n >= dim {
        return Err(SpectralError::BranchOutOfRange { branch: m.max(n), dim }.into());
    }
    let t = path.time(k);
    let sys = path.system(k);
    let gap = sys.value(n) - sys.value(m);
    if gap.abs() < GAP_TOL {
        return Err(SpectralError::NearDegeneracy { t, gap: gap.abs() }.into());
    }
    let dh = protocol.basis().to_matrix(&protocol.dh0_at(t));
    let vm = sys.vector(m);
    let vn = sys.vector(n);
    Ok(vm.inner(&dh.apply(&vn)) / C64::new(gap, 0.0))
}

/// `<m|dn/dt>` by central finite differences on the phase-aligned path.
pub fn offdiag_coupling_fd(
    path: &EigenPath,
    m: usize,
    n: usize,
    k: usize,
) -> Result<C64, DrivingError> {
    if m == n {
        return Err(DrivingError::EqualBranches { branch: m });
    }
    let dim = path.dim();
    if m >= dim || n >= dim {
        return Err(SpectralError::BranchOutOfRange { branch: m.max(n), dim }.into());
    }
    let dn = branch_derivative(path, n, k);
    Ok(path.state(k, m).inner(&dn))
}

/// d|n>/dt at sample `k` from the aligned path (central inside, one-sided at
/// the ends).
fn branch_derivative(path: &EigenPath, branch: usize, k: usize) -> StateVector {
    let last = path.len() - 1;
    let (lo, hi) = if k == 0 {
        (0, 1)
    } else if k == last {
        (last - 1, last)
    } else {
        (k - 1, k + 1)
    };
    let dt = path.time(hi) - path.time(lo);
    path.state(hi, branch)
        .sub(&path.state(lo, branch))
        .scaled(C64::new(1.0 / dt, 0.0))
}

/// Invariant phases and the aligned eigenpath of `H_0`, refined until the
/// endpoint phases settle. Returned quantities are restricted to `grid`.
pub fn lr_phases(protocol: &Protocol, grid: &Grid) -> Result<(EigenPath, Vec<Vec<f64>>), DrivingError> {
    let mut prev: Option<(EigenPath, Vec<Vec<f64>>, usize)> = None;
    let mut last_change = f64::infinity();
    for r in 0..=MAX_REFINEMENTS {
        let factor = 1usize << r;
        let fine = grid.refined(factor);
        let path = spectral::track_eigenpath(|t| protocol.h0_matrix(t), &fine)?;
        let phases = integrate_phases(protocol, &path);
        if let Some((_, prev_phases, _)) = &prev {
            last_change = phases
                .iter()
                .zip(prev_phases.iter())
                .map(|(a, b)| (a.last().unwrap() - b.last().unwrap()).abs())
                .fold(0.0, f64::max);
            if last_change < PHASE_TOL {
                let restricted: Vec<Vec<f64>> = phases
                    .iter()
                    .map(|p| p.iter().copied().step_by(factor).collect())
                    .collect();
                return Ok((path.decimated(factor), restricted));
            }
        }
        prev = Some((path, phases, factor));
    }
    Err(DrivingError::PhaseRefinementStalled { change: last_change })
}

/// Lewis-Riesenfeld phase `alpha_n(t)` on the grid, `alpha_n(0) = 0`.
pub fn lr_phase(protocol: &Protocol, branch: usize, grid: &Grid) -> Result<Vec<f64>, DrivingError> {
    let n = protocol.n();
    if branch >= n {
        return Err(SpectralError::BranchOutOfRange { branch, dim: n }.into());
    }
    let (_, phases) = lr_phases(protocol, grid)?;
    Ok(phases.into_iter().nth(branch).unwrap())
}

/// Trapezoid integration of `<n|(i d/dt - H)|n>` on an aligned path.
///
/// Exposed for gauge experiments: the integrand is evaluated on the path as
/// given, so re-phased paths show the pure gauge shift of the phase.
pub fn lr_phase_on_path(
    path: &EigenPath,
    h_at: impl Fn(f64) -> CMatrix,
    branch: usize,
) -> Vec<f64> {
    let len = path.len();
    let mut integrand = Vec::with_capacity(len);
    for k in 0..len {
        let h = h_at(path.time(k));
        let state = path.state(k, branch);
        let energy = state.inner(&h.apply(&state)).re;
        let geometric = (C64::new(0.0, 1.0) * state.inner(&branch_derivative(path, branch, k))).re;
        integrand.push(geometric - energy);
    }
    let mut alpha = Vec::with_capacity(len);
    alpha.push(0.0);
    for k in 0..len - 1 {
        let dt = path.time(k + 1) - path.time(k);
        let next = alpha[k] + 0.5 * dt * (integrand[k] + integrand[k + 1]);
        alpha.push(next);
    }
    alpha
}

fn integrate_phases(protocol: &Protocol, path: &EigenPath) -> Vec<Vec<f64>> {
    (0..protocol.n())
        .map(|branch| lr_phase_on_path(path, |t| protocol.h_matrix(t), branch))
        .collect()
}

/// Exact solution assembled from invariant eigenstates:
/// `|psi(t)> = sum_n c_n exp(i alpha_n(t)) |n(t)>`.
#[derive(Debug, Clone)]
pub struct AdiabaticSolution {
    pub weights: Vec<f64>,
    /// `phases[branch][k]`.
    pub phases: Vec<Vec<f64>>,
    pub states: Vec<StateVector>,
    pub grid: Grid,
}

impl AdiabaticSolution {
    pub fn state(&self, k: usize) -> &StateVector {
        &self.states[k]
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.states
            .iter()
            .map(|s| (s.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Assembles the adiabatic solution for real branch weights `c_n`
/// (`sum c_n^2 = 1`).
#[allow(clippy::needless_range_loop)] // k indexes the grid, the path, and the phases
pub fn adiabatic_state(
    protocol: &Protocol,
    weights: &[f64],
    grid: &Grid,
) -> Result<AdiabaticSolution, DrivingError> {
    let n = protocol.n();
    assert_eq!(weights.len(), n, "one weight per branch");
    let sum: f64 = weights.iter().map(|c| c * c).sum();
    if (sum - 1.0).abs() > 1e-10 {
        return Err(DrivingError::WeightNormalization { sum });
    }
    let (path, phases) = lr_phases(protocol, grid)?;
    let mut states = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let mut acc = StateVector::new(vec![C64::new(0.0, 0.0); n]);
        for (branch, &c) in weights.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let phase = C64::new(0.0, phases[branch][k]).exp() * c;
            acc = acc.add(&path.state(k, branch).scaled(phase));
        }
        states.push(acc);
    }
    Ok(AdiabaticSolution { weights: weights.to_vec(), phases, states, grid: grid.clone() })
}

/// Result of propagating an invariant candidate along a protocol.
#[derive(Debug, Clone)]
pub struct InvariantReport {
    /// `max_t || spec(F(t)) - spec(F(0)) ||_inf` (F normalized to unit
    /// Hilbert-Schmidt norm).
    pub max_eigenvalue_drift: f64,
    /// `max_t || [F(t), H_0(t)] ||_max`.
    pub max_h0_commutator: f64,
    /// `|| (1 - P(0)) F(0) (1 - P(0)) ||_max` when a state was supplied.
    pub initial_condition_residual: Option<f64>,
    /// Largest change of that residual along the evolution (it is conserved
    /// by unitarity, so this should sit at roundoff).
    pub max_condition_drift: Option<f64>,
}

/// Propagates `F(t) = U(t) F(0) U(t)^dag` under the protocol's full
/// Hamiltonian and reports how well it behaves as a dynamical invariant.
///
/// `F(0)` is normalized internally to unit Hilbert-Schmidt norm, so all
/// reported quantities are scale-invariant. When `psi0` is supplied, the
/// projector condition `(1-P)F(1-P) = 0` is evaluated at `t = 0` and its
/// conservation is monitored along the trajectory.
pub fn invariant_drift(
    f0: &CMatrix,
    protocol: &Protocol,
    grid: &Grid,
    psi0: Option<&StateVector>,
) -> Result<InvariantReport, DrivingError> {
    let scale = f0.frobenius_norm();
    let mut f = if scale > 0.0 { f0.scaled_re(1.0 / scale) } else { f0.clone() };
    let spec0 = spectral::eigh(&f)?.values().to_vec();
    let mut p = psi0.map(|s| s.projector());
    let r0 = p.as_ref().map(|p| qb2_residual(&f, p));
    let mut max_drift = 0.0f64;
    let mut max_comm = commutator_size(&f, &protocol.h0_matrix(grid.time(0)));
    let mut max_res_drift = r0.map(|_| 0.0f64);
    let dt = grid.step();
    for k in 0..grid.steps() {
        let u = dynamics::exponential(&protocol.h_matrix(grid.time(k) + 0.5 * dt), dt)?;
        let udag = u.adjoint();
        f = &(&u * &f) * &udag;
        if let Some(pp) = p.as_mut() {
            *pp = &(&u * &*pp) * &udag;
        }
        let t_next = grid.time(k + 1);
        let spec_t = spectral::eigh(&f)?;
        for (a, b) in spec_t.values().iter().zip(spec0.iter()) {
            max_drift = max_drift.max((a - b).abs());
        }
        max_comm = max_comm.max(commutator_size(&f, &protocol.h0_matrix(t_next)));
        if let (Some(pp), Some(r0), Some(md)) = (p.as_ref(), r0, max_res_drift.as_mut()) {
            let r = qb2_residual(&f, pp);
            *md = md.max((r - r0).abs());
        }
    }
    Ok(InvariantReport {
        max_eigenvalue_drift: max_drift,
        max_h0_commutator: max_comm,
        initial_condition_residual: r0,
        max_condition_drift: max_res_drift,
    })
}

fn qb2_residual(f: &CMatrix, p: &CMatrix) -> f64 {
    let q = &CMatrix::identity(p.dim()) - p;
    (&(&q * f) * &q).max_abs()
}

fn commutator_size(a: &CMatrix, b: &CMatrix) -> f64 {
    CMatrix::commutator(a, b).max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn pauli_rotating(h0: f64, omega: f64) -> Protocol {
        // H = (1/2) h . sigma with h = h0 (cos wt, sin wt, 0): orthonormal
        // coefficients are h/2 on X_1, X_2.
        let basis = GeneratorBasis::gell_mann(2).unwrap();
        Protocol::new(basis, vec![1, 2], move |t| {
            CoeffVector::from_components(
                3,
                &[
                    (1, 0.5 * h0 * (omega * t).cos()),
                    (2, 0.5 * h0 * (omega * t).sin()),
                ],
            )
        })
        .unwrap()
        .with_derivative(move |t| {
            CoeffVector::from_components(
                3,
                &[
                    (1, -0.5 * h0 * omega * (omega * t).sin()),
                    (2, 0.5 * h0 * omega * (omega * t).cos()),
                ],
            )
        })
    }

    #[test]
    fn static_protocol_has_zero_counter_term() {
        let basis = GeneratorBasis::gell_mann(2).unwrap();
        let p = Protocol::new(basis, vec![1, 3], |_| {
            CoeffVector::from_components(3, &[(1, 0.4), (3, 1.0)])
        })
        .unwrap();
        let h1 = counter_diabatic(&p, 0.3).unwrap();
        assert!(h1.max_abs() < 1e-12);
    }

    #[test]
    fn pauli_rotation_counter_term() {
        // h^(1) = (0, 0, omega) in the 1/2-convention, i.e. H_1 = (omega/2) sigma_3.
        let omega = 0.37;
        let p = pauli_rotating(1.3, omega);
        for &t in &[0.0, 0.9, 4.2] {
            let h1 = counter_diabatic(&p, t).unwrap();
            let want = CMatrix::real_diag(&[0.5 * omega, -0.5 * omega]);
            assert!(h1.max_abs_diff(&want) < 1e-12, "t={t}");
        }
    }

    #[test]
    fn counter_term_diagonal_vanishes() {
        let p = pauli_rotating(0.8, 0.5);
        let t = 1.7;
        let h1 = counter_diabatic(&p, t).unwrap();
        let sys = spectral::eigh(&p.h0_matrix(t)).unwrap();
        for k in 0..2 {
            let v = sys.vector(k);
            assert!(h1.expectation(&v).norm() < 1e-10);
        }
        assert!(h1.hermiticity_error() < 1e-13);
    }

    #[test]
    fn coupling_antisymmetry_and_fd_agreement() {
        let p = pauli_rotating(1.0, 0.43);
        let grid = Grid::span(0.0, 2.0, 400);
        let path = spectral::track_eigenpath(|t| p.h0_matrix(t), &grid).unwrap();
        let k = 200;
        let z01 = offdiag_coupling(&p, &path, 0, 1, k).unwrap();
        let z10 = offdiag_coupling(&p, &path, 1, 0, k).unwrap();
        assert!((z01 + z10.conj()).norm() < 1e-12);
        let fd = offdiag_coupling_fd(&path, 0, 1, k).unwrap();
        assert!((z01 - fd).norm() < 1e-6);
    }

    #[test]
    fn equal_branches_rejected() {
        let p = pauli_rotating(1.0, 0.2);
        let grid = Grid::span(0.0, 1.0, 10);
        let path = spectral::track_eigenpath(|t| p.h0_matrix(t), &grid).unwrap();
        assert!(matches!(
            offdiag_coupling(&p, &path, 1, 1, 0),
            Err(DrivingError::EqualBranches { .. })
        ));
    }

    #[test]
    fn constant_hamiltonian_phase_is_dynamical() {
        let basis = GeneratorBasis::gell_mann(2).unwrap();
        let p = Protocol::new(basis, vec![3], |_| {
            CoeffVector::from_components(3, &[(3, 0.7)])
        })
        .unwrap();
        // branch 0 has eigenvalue -0.7, branch 1 has +0.7
        let grid = Grid::span(0.0, 2.0, 100);
        let alpha = lr_phase(&p, 1, &grid).unwrap();
        assert_eq!(alpha[0], 0.0);
        let expect = -0.7 * grid.end();
        assert!((alpha.last().unwrap() - expect).abs() < 1e-9);
    }

    #[test]
    fn gauge_shift_moves_phase_not_state() {
        let p = pauli_rotating(1.0, 2.0 * PI / 10.0);
        let grid = Grid::span(0.0, 3.0, 600);
        let path = spectral::track_eigenpath(|t| p.h0_matrix(t), &grid).unwrap();
        let alpha = lr_phase_on_path(&path, |t| p.h_matrix(t), 1);

        // re-phase branch 1 by chi(t) = 0.3 sin t
        let chi = |t: f64| 0.3 * t.sin();
        let twisted = twist_branch(&path, 1, chi);
        let alpha_twisted = lr_phase_on_path(&twisted, |t| p.h_matrix(t), 1);
        for k in (0..grid.len()).step_by(60) {
            let t = grid.time(k);
            let shift = alpha_twisted[k] - alpha[k];
            let want = chi(t) - chi(0.0);
            assert!((shift - want).abs() < 1e-4, "k={k}: {shift} vs {want}");
            // assembled state is gauge-invariant
            let a = path
                .state(k, 1)
                .scaled(C64::new(0.0, alpha[k]).exp());
            let b = twisted
                .state(k, 1)
                .scaled(C64::new(0.0, alpha_twisted[k]).exp());
            assert!(dynamics::fidelity(&a, &b) > 1.0 - 1e-7);
        }
    }

    /// Copy of `path` with one branch re-phased by `exp(-i chi(t))`.
    fn twist_branch(path: &EigenPath, branch: usize, chi: impl Fn(f64) -> f64) -> EigenPath {
        let parts = (0..path.len())
            .map(|k| {
                let values: Vec<f64> = (0..path.dim()).map(|b| path.value(k, b)).collect();
                let states: Vec<StateVector> = (0..path.dim())
                    .map(|b| {
                        let s = path.state(k, b);
                        if b == branch {
                            s.scaled(C64::new(0.0, -chi(path.time(k))).exp())
                        } else {
                            s
                        }
                    })
                    .collect();
                (values, states)
            })
            .collect();
        spectral::test_support::path_from_parts(
            (0..path.len()).map(|k| path.time(k)).collect(),
            parts,
        )
    }

    #[test]
    fn weight_normalization_enforced() {
        let p = pauli_rotating(1.0, 0.3);
        let grid = Grid::span(0.0, 1.0, 50);
        assert!(matches!(
            adiabatic_state(&p, &[0.9, 0.9], &grid),
            Err(DrivingError::WeightNormalization { .. })
        ));
    }

    #[test]
    fn identity_invariant_never_drifts() {
        let p = pauli_rotating(1.0, 0.5);
        let grid = Grid::span(0.0, 2.0, 200);
        let report = invariant_drift(&CMatrix::identity(2), &p, &grid, None).unwrap();
        assert!(report.max_eigenvalue_drift < 1e-13);
    }
}
