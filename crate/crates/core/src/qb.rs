//! Quantum-brachistochrone solvers.
//!
//! Given constraint components `h^(0)_a(t)` of the Hamiltonian, the
//! completion equation
//!
//! `dh0/dt - (d|h0|/dt / |h0|) h0 = h1 x h0`
//!
//! determines the unconstrained components `h^(1)_p` whenever the constraint
//! part can define the adiabatic frame. [`solve_completion`] solves it by
//! minimal-norm least squares, exposing the commutant nullspace (directions
//! commuting with the constraint part). When the constraint set has internal
//! structure constants the completion fails and [`solve_trajectory`]
//! integrates the invariant direction `l(t)` directly, solving at each step
//! the algebraic system that keeps `l` inside the constraint subspace.
//!
//! Least squares uses a one-sided Jacobi SVD with a relative singular-value
//! cutoff; nullspace vectors are the right singular vectors below the
//! cutoff and the particular solution is orthogonal to them.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // needed for no_std builds; shadowed when std is in the crate graph
use num_traits::Float;

use crate::algebra::{AlgebraError, CoeffVector, GeneratorBasis};
use crate::driving::Protocol;
use crate::dynamics::TrajectoryRecord;
use crate::grid::Grid;
use crate::matrix::{CMatrix, StateVector};

/// Completion residuals above this (relative to `||dh0/dt||`) mean the
/// constraint part cannot define the adiabatic frame.
pub const COMPLETION_RESIDUAL_TOL: f64 = 1e-8;

/// Relative singular-value cutoff separating the solved space from the
/// nullspace.
pub const SV_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum QbError {
    Algebra(AlgebraError),
    /// `|h^(0)|` numerically zero.
    ZeroField,
    /// The completion equation has no solution; the constraint part does not
    /// generate the adiabatic frame.
    NoCompletion { residual: f64 },
    /// The per-step algebraic system of the trajectory solver is
    /// inconsistent.
    NoSolution { t: f64, residual: f64 },
    /// `(1 - P(0)) F(0) (1 - P(0)) = 0` violated by the supplied state.
    InitialConditionViolated { residual: f64 },
    NotNormalized { norm: f64 },
    /// Input vector has weight off the constraint set.
    OffSupport { label: usize, value: f64 },
    /// Stationary segment: energy variance vanishes, the time functional is
    /// undefined there.
    DegenerateSegment { t: f64 },
    DimensionMismatch { expected: usize, got: usize },
}

impl fmt::Display for QbError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Algebra(e) => write!(f, "{e}"),
            Self::ZeroField => write!(f, "constraint field has zero norm"),
            Self::NoCompletion { residual } => write!(
                f,
                "completion equation unsolvable (residual {residual:.3e}); H_0 != H_C implied"
            ),
            Self::NoSolution { t, residual } => write!(
                f,
                "trajectory system inconsistent at t={t} (residual {residual:.3e})"
            ),
            Self::InitialConditionViolated { residual } => write!(
                f,
                "(1-P)F(1-P) = 0 violated at t=0 (residual {residual:.3e})"
            ),
            Self::NotNormalized { norm } => write!(f, "vector norm {norm} is not 1"),
            Self::OffSupport { label, value } => write!(
                f,
                "component {value:.3e} on generator {label} lies off the constraint set"
            ),
            Self::DegenerateSegment { t } => {
                write!(f, "energy variance vanishes at t={t}; passage time undefined")
            }
            Self::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
        }
    }
}

impl core::error::Error for QbError {}

impl From<AlgebraError> for QbError {
    fn from(e: AlgebraError) -> Self {
        Self::Algebra(e)
    }
}

// ---------------------------------------------------------------------------
// dense real least squares (one-sided Jacobi SVD)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct RMat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RMat {
    fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    fn col_dot(&self, p: usize, q: usize) -> f64 {
        (0..self.rows).map(|i| self.get(i, p) * self.get(i, q)).sum()
    }

    fn rotate_cols(&mut self, p: usize, q: usize, c: f64, s: f64) {
        for i in 0..self.rows {
            let xp = self.get(i, p);
            let xq = self.get(i, q);
            self.set(i, p, c * xp - s * xq);
            self.set(i, q, s * xp + c * xq);
        }
    }

    fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }
}

#[derive(Debug, Clone)]
struct Lstsq {
    x: Vec<f64>,
    nullspace: Vec<Vec<f64>>,
    residual: f64,
}

/// Minimal-norm least squares with nullspace extraction.
fn lstsq(a: &RMat, b: &[f64]) -> Lstsq {
    assert_eq!(a.rows, b.len());
    let n = a.cols;
    if n == 0 {
        let residual = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        return Lstsq { x: Vec::new(), nullspace: Vec::new(), residual };
    }
    let mut w = a.clone();
    let mut v = RMat::identity(n);
    for _ in 0..60 {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let app = w.col_dot(p, p);
                let aqq = w.col_dot(q, q);
                let apq = w.col_dot(p, q);
                if apq == 0.0 || apq.abs() <= 1e-15 * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (aqq - app) / (2.0 * apq);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                w.rotate_cols(p, q, c, s);
                v.rotate_cols(p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let sigma: Vec<f64> = (0..n).map(|j| w.col_dot(j, j).sqrt()).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap());
    let sigma_max = sigma[order[0]];
    let cutoff = SV_CUTOFF * sigma_max;
    let mut x = vec![0.0; n];
    let mut nullspace = Vec::new();
    for &j in &order {
        let col_v: Vec<f64> = (0..n).map(|i| v.get(i, j)).collect();
        if sigma[j] > cutoff && sigma[j] > 0.0 {
            // u_j . b / sigma_j, with u_j = w_j / sigma_j
            let ub: f64 = (0..a.rows).map(|i| w.get(i, j) * b[i]).sum();
            let coeff = ub / (sigma[j] * sigma[j]);
            for i in 0..n {
                x[i] += coeff * col_v[i];
            }
        } else {
            nullspace.push(col_v);
        }
    }
    let ax = a.matvec(&x);
    let residual = ax
        .iter()
        .zip(b.iter())
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt();
    Lstsq { x, nullspace, residual }
}

// ---------------------------------------------------------------------------
// completion
// ---------------------------------------------------------------------------

/// Solution of the completion equation: minimal-norm particular components
/// plus the commutant freedom.
#[derive(Debug, Clone)]
pub struct QBCompletion {
    /// `h^(1)` supported on the complement of the constraint set; orthogonal
    /// to every nullspace direction.
    pub particular: CoeffVector,
    /// Unit vectors spanning the directions that commute with the constraint
    /// part (additive freedom of the solved Hamiltonian).
    pub nullspace: Vec<CoeffVector>,
    /// Least-squares residual of the solve.
    pub residual: f64,
}

fn check_support(v: &CoeffVector, labels: &[usize]) -> Result<(), QbError> {
    let tol = 1e-12 * f64::max(1.0, v.vec_norm());
    for a in 1..=v.dim() {
        if !labels.contains(&a) {
            let val = v.component(a);
            if val.abs() > tol {
                return Err(QbError::OffSupport { label: a, value: val });
            }
        }
    }
    Ok(())
}

fn sorted_labels(dim: usize, labels: &[usize]) -> Result<(Vec<usize>, Vec<usize>), QbError> {
    let mut cons = labels.to_vec();
    cons.sort_unstable();
    cons.dedup();
    for &a in &cons {
        if a == 0 || a > dim {
            return Err(QbError::DimensionMismatch { expected: dim, got: a });
        }
    }
    let comp = (1..=dim).filter(|a| !cons.contains(a)).collect();
    Ok((cons, comp))
}

/// Matrix of the map `x -> (x cross fixed)` restricted to `x` supported on
/// `unknown` labels; rows run over all `d` components.
fn cross_matrix(basis: &GeneratorBasis, unknown: &[usize], fixed: &CoeffVector) -> RMat {
    let d = basis.d();
    let f = basis.structure();
    let mut m = RMat::zeros(d, unknown.len());
    for a in 1..=d {
        for (j, &q) in unknown.iter().enumerate() {
            let mut acc = 0.0;
            for c in 1..=d {
                let lc = fixed.component(c);
                if lc != 0.0 {
                    acc += f.get(a, q, c) * lc;
                }
            }
            m.set(a - 1, j, acc);
        }
    }
    m
}

fn embed(dim: usize, labels: &[usize], x: &[f64]) -> CoeffVector {
    let mut out = CoeffVector::zeros(dim);
    for (j, &a) in labels.iter().enumerate() {
        out.set_component(a, x[j]);
    }
    out
}

/// Right-hand side of the completion equation,
/// `dh0 - (<h0, dh0>/|h0|^2) h0`.
fn completion_rhs(h0: &CoeffVector, dh0: &CoeffVector) -> CoeffVector {
    let n2 = h0.dot(h0);
    dh0.sub(&h0.scaled(h0.dot(dh0) / n2))
}

/// Solves the completion equation for the unconstrained components by
/// minimal-norm least squares.
///
/// Returns [`QbError::NoCompletion`] when the residual exceeds
/// [`COMPLETION_RESIDUAL_TOL`] relative to `||dh0||`; in that case the
/// constraint part cannot equal the adiabatic-frame Hamiltonian.
pub fn solve_completion(
    h0: &CoeffVector,
    dh0: &CoeffVector,
    constraint: &[usize],
    basis: &GeneratorBasis,
) -> Result<QBCompletion, QbError> {
    let d = basis.d();
    if h0.dim() != d || dh0.dim() != d {
        return Err(QbError::DimensionMismatch { expected: d, got: h0.dim().max(dh0.dim()) });
    }
    if h0.vec_norm() < 1e-12 {
        return Err(QbError::ZeroField);
    }
    let (cons, comp) = sorted_labels(d, constraint)?;
    check_support(h0, &cons)?;
    check_support(dh0, &cons)?;
    let m = cross_matrix(basis, &comp, h0);
    let b = completion_rhs(h0, dh0);
    let sol = lstsq(&m, &b.vec);
    if sol.residual > COMPLETION_RESIDUAL_TOL * dh0.vec_norm() {
        return Err(QbError::NoCompletion { residual: sol.residual });
    }
    Ok(QBCompletion {
        particular: embed(d, &comp, &sol.x),
        nullspace: sol.nullspace.iter().map(|v| embed(d, &comp, v)).collect(),
        residual: sol.residual,
    })
}

/// Closed-form N = 2 completion in the `H = (1/2) h . sigma` convention:
/// `h^(1) = h^(0) x dh^(0)/dt / |h^(0)|^2` with the ordinary epsilon-tensor
/// cross product.
///
/// Note the convention: coefficients here multiply `sigma/2`, which is twice
/// the orthonormal-basis coefficients used elsewhere. The map is
/// scale-invariant in `h^(0)`, so `solve_completion` on the Pauli basis
/// returns exactly half these values.
pub fn solve_h1_n2(h0: [f64; 3], dh0: [f64; 3]) -> Result<[f64; 3], QbError> {
    let n2 = h0.iter().map(|x| x * x).sum::<f64>();
    if n2.sqrt() < 1e-12 {
        return Err(QbError::ZeroField);
    }
    Ok([
        (h0[1] * dh0[2] - h0[2] * dh0[1]) / n2,
        (h0[2] * dh0[0] - h0[0] * dh0[2]) / n2,
        (h0[0] * dh0[1] - h0[1] * dh0[0]) / n2,
    ])
}

/// Outcome of the commutation test `[H_C, F] = 0`, i.e.
/// `h^(0) x l = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutationCheck {
    pub holds: bool,
    pub residual: f64,
}

/// Tests whether the invariant direction `l` commutes with the constraint
/// field: `holds` iff `||h x l|| <= 1e-10 ||h|| ||l||`.
pub fn commutation_condition(
    h_c: &CoeffVector,
    l: &CoeffVector,
    basis: &GeneratorBasis,
) -> Result<CommutationCheck, QbError> {
    let cross = basis.cross(h_c, l)?;
    let residual = cross.vec_norm();
    Ok(CommutationCheck {
        holds: residual <= 1e-10 * h_c.vec_norm() * l.vec_norm(),
        residual,
    })
}

// ---------------------------------------------------------------------------
// constrained trajectory solver
// ---------------------------------------------------------------------------

/// Invariant direction and solved completion along a grid.
#[derive(Debug, Clone)]
pub struct QBTrajectory {
    pub grid: Grid,
    /// Unit invariant direction per sample, supported on the constraint set.
    pub l_path: Vec<CoeffVector>,
    /// Solved completion components per sample.
    pub h1_path: Vec<CoeffVector>,
    /// Human-readable description of undetermined directions (defaulted to
    /// zero), from the first solve.
    pub free_params: Vec<String>,
    /// Largest norm of `(h x l)` off the constraint set seen at any sample.
    pub max_offc_residual: f64,
}

struct StageSolve {
    h1: CoeffVector,
    nullspace: Vec<Vec<f64>>,
    offc_residual: f64,
}

/// Solves, at fixed time, for the completion components that keep `l` inside
/// the constraint subspace. Rows of the system are the off-constraint
/// components of `h x l`; rows with no dependence on the unknowns are
/// algebraic constraints on `l` itself and are replaced by their time
/// derivative (which re-introduces the unknowns through `dl/dt = h x l`).
///
/// `enforce_residual` applies the strict per-sample bound on the
/// off-constraint components; intermediate integrator stages sit slightly
/// off the constraint manifold (O(dt^2)) and skip it.
fn solve_stage(
    protocol: &Protocol,
    cons: &[usize],
    comp: &[usize],
    l: &CoeffVector,
    t: f64,
    enforce_residual: bool,
) -> Result<StageSolve, QbError> {
    let basis = protocol.basis();
    let d = basis.d();
    let h0 = protocol.h0_at(t);
    let f_scale = basis.structure().max_abs();
    let row_tol = 1e-10 * f_scale * f64::max(l.vec_norm(), 1e-300);
    // genuine inconsistency of a constraint row is O(|h0|); stage drift is
    // orders below this
    let consistency_tol = 1e-3 * f_scale * f64::max(1.0, h0.vec_norm()) * l.vec_norm();

    // A h1 = b on the complement rows with actual h1 dependence
    let full = cross_matrix(basis, comp, l);
    let h0xl = basis.cross(&h0, l)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut degenerate: Vec<usize> = Vec::new();
    for &p in comp {
        let row: Vec<f64> = (0..comp.len()).map(|j| full.get(p - 1, j)).collect();
        let row_norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        let b = -h0xl.component(p);
        if row_norm <= row_tol {
            // no control over this component: it must already vanish
            if b.abs() > consistency_tol {
                return Err(QbError::NoSolution { t, residual: b.abs() });
            }
            degenerate.push(p);
        } else {
            rows.push(row);
            rhs.push(b);
        }
    }

    // Hidden constraints: (h0 x l)_p = 0 rows without unknowns must be
    // preserved; d/dt of such a row is linear in the unknowns again.
    let dh0 = protocol.dh0_at(t);
    let dh0xl = basis.cross(&dh0, l)?;
    let h0xh0xl = basis.cross(&h0, &h0xl)?;
    for &p in &degenerate {
        let mut row = Vec::with_capacity(comp.len());
        for &q in comp {
            let eq = CoeffVector::unit(d, q);
            let eqxl = basis.cross(&eq, l)?;
            let h0x = basis.cross(&h0, &eqxl)?;
            row.push(h0x.component(p));
        }
        rows.push(row);
        rhs.push(-(dh0xl.component(p) + h0xh0xl.component(p)));
    }

    let mut a = RMat::zeros(rows.len(), comp.len());
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            a.set(i, j, v);
        }
    }
    let sol = lstsq(&a, &rhs);
    let rhs_norm = rhs.iter().map(|x| x * x).sum::<f64>().sqrt();
    if sol.residual > 1e-8 * f64::max(1.0, rhs_norm) {
        return Err(QbError::NoSolution { t, residual: sol.residual });
    }
    let h1 = embed(d, comp, &sol.x);
    let h_full = h0.add(&h1);
    let offc = basis.cross(&h_full, l)?;
    let offc_residual = cons
        .iter()
        .fold(offc.clone(), |mut acc, &aa| {
            acc.set_component(aa, 0.0);
            acc
        })
        .vec_norm();
    if enforce_residual && offc_residual > 1e-7 {
        return Err(QbError::NoSolution { t, residual: offc_residual });
    }
    Ok(StageSolve { h1, nullspace: sol.nullspace, offc_residual })
}

fn describe_nullspace(comp: &[usize], nullspace: &[Vec<f64>]) -> Vec<String> {
    nullspace
        .iter()
        .map(|v| {
            let max = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
            let labels: Vec<String> = v
                .iter()
                .enumerate()
                .filter(|(_, x)| x.abs() > 0.3 * max)
                .map(|(j, _)| format!("{}", comp[j]))
                .collect();
            format!(
                "undetermined combination on generators {{{}}} (set to zero)",
                labels.join(", ")
            )
        })
        .collect()
}

/// Integrates `dl/dt = h x l` on the constraint subspace, solving the
/// completion components at every stage (RK4; `|l|` renormalized per step).
///
/// `l0` must be a unit vector supported on the constraint set. When `psi0`
/// is supplied, the initial condition `(1 - P(0)) F(0) (1 - P(0)) = 0` is
/// checked for `F(0)` built from `l0` (including the scalar term fixed by
/// the parametrization of `F`), and violation is an error.
pub fn solve_trajectory(
    protocol: &Protocol,
    l0: &CoeffVector,
    grid: &Grid,
    psi0: Option<&StateVector>,
) -> Result<QBTrajectory, QbError> {
    let basis = protocol.basis();
    let d = basis.d();
    if l0.dim() != d {
        return Err(QbError::DimensionMismatch { expected: d, got: l0.dim() });
    }
    let (cons, comp) = sorted_labels(d, protocol.constraint())?;
    check_support(l0, &cons)?;
    let norm = l0.vec_norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(QbError::NotNormalized { norm });
    }
    if let Some(psi) = psi0 {
        let e0 = basis.projector_coeffs(psi)?;
        let scalar = l0.dot(&e0) / ((basis.n() as f64 - 1.0).sqrt());
        let f0 = basis.to_matrix(&CoeffVector::new(scalar, l0.vec.clone()));
        let p = psi.normalized().ok_or(QbError::Algebra(AlgebraError::ZeroNorm))?.projector();
        let one_minus_p = &CMatrix::identity(basis.n()) - &p;
        let residual = (&(&one_minus_p * &f0) * &one_minus_p).max_abs();
        if residual > 1e-10 {
            return Err(QbError::InitialConditionViolated { residual });
        }
    }

    let dt = grid.step();
    let mut l = l0.scaled(1.0 / norm);
    let mut l_path = Vec::with_capacity(grid.len());
    let mut h1_path = Vec::with_capacity(grid.len());
    let mut free_params = Vec::new();
    let mut max_offc = 0.0f64;

    let rhs = |t: f64, l: &CoeffVector, enforce: bool| -> Result<(CoeffVector, StageSolve), QbError> {
        let stage = solve_stage(protocol, &cons, &comp, l, t, enforce)?;
        let h_full = protocol.h0_at(t).add(&stage.h1);
        let ldot = basis.cross(&h_full, l)?.restricted(&cons);
        Ok((ldot, stage))
    };

    for k in 0..grid.len() {
        let t = grid.time(k);
        let (k1, stage) = rhs(t, &l, true)?;
        if k == 0 {
            free_params = describe_nullspace(&comp, &stage.nullspace);
        }
        max_offc = max_offc.max(stage.offc_residual);
        l_path.push(l.clone());
        h1_path.push(stage.h1.clone());
        if k == grid.len() - 1 {
            break;
        }
        let (k2, _) = rhs(t + 0.5 * dt, &l.add(&k1.scaled(0.5 * dt)), false)?;
        let (k3, _) = rhs(t + 0.5 * dt, &l.add(&k2.scaled(0.5 * dt)), false)?;
        let (k4, _) = rhs(t + dt, &l.add(&k3.scaled(dt)), false)?;
        let incr = k1
            .add(&k2.scaled(2.0))
            .add(&k3.scaled(2.0))
            .add(&k4)
            .scaled(dt / 6.0);
        l = l.add(&incr).restricted(&cons);
        let n = l.vec_norm();
        if n < 1e-12 {
            return Err(QbError::ZeroField);
        }
        l = l.scaled(1.0 / n);
    }
    Ok(QBTrajectory { grid: grid.clone(), l_path, h1_path, free_params, max_offc_residual: max_offc })
}

// ---------------------------------------------------------------------------
// passage time
// ---------------------------------------------------------------------------

/// Integrated time functional along a recorded trajectory:
/// trapezoid integral of `sqrt(<dpsi|(1-P)|dpsi>) / DeltaE` with
/// `dpsi/dt = -i H psi`. On an exact Schrödinger trajectory the integrand is
/// identically 1 and the result equals the elapsed time.
pub fn passage_time(
    record: &TrajectoryRecord,
    h_at: impl Fn(f64) -> CMatrix,
) -> Result<f64, QbError> {
    let grid = &record.grid;
    let mut integrand = Vec::with_capacity(record.len());
    for k in 0..record.len() {
        let t = grid.time(k);
        let psi = record.state(k);
        let h = h_at(t);
        let hpsi = h.apply(psi);
        // <dpsi|(1-P)|dpsi> with dpsi = -i H psi
        let num = (hpsi.inner(&hpsi).re - psi.inner(&hpsi).norm_sqr()).max(0.0);
        let mean = psi.inner(&hpsi).re;
        let de2 = (hpsi.inner(&hpsi).re - mean * mean).max(0.0);
        let de = de2.sqrt();
        if de < 1e-12 {
            return Err(QbError::DegenerateSegment { t });
        }
        integrand.push(num.sqrt() / de);
    }
    let dt = grid.step();
    let mut total = 0.0;
    for k in 0..record.len() - 1 {
        total += 0.5 * dt * (integrand[k] + integrand[k + 1]);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gm3() -> GeneratorBasis {
        GeneratorBasis::gell_mann(3).unwrap()
    }

    #[test]
    fn lstsq_exact_square_system() {
        // [[2, 0], [0, 3]] x = [4, 9]
        let mut a = RMat::zeros(2, 2);
        a.set(0, 0, 2.0);
        a.set(1, 1, 3.0);
        let sol = lstsq(&a, &[4.0, 9.0]);
        assert!((sol.x[0] - 2.0).abs() < 1e-14);
        assert!((sol.x[1] - 3.0).abs() < 1e-14);
        assert!(sol.nullspace.is_empty());
        assert!(sol.residual < 1e-14);
    }

    #[test]
    fn lstsq_nullspace_and_min_norm() {
        // rank-1 system on two unknowns: x + y = 2 (twice)
        let mut a = RMat::zeros(2, 2);
        a.set(0, 0, 1.0);
        a.set(0, 1, 1.0);
        a.set(1, 0, 1.0);
        a.set(1, 1, 1.0);
        let sol = lstsq(&a, &[2.0, 2.0]);
        assert_eq!(sol.nullspace.len(), 1);
        // minimal-norm solution is (1, 1)
        assert!((sol.x[0] - 1.0).abs() < 1e-12);
        assert!((sol.x[1] - 1.0).abs() < 1e-12);
        // particular orthogonal to nullspace
        let dot = sol.x[0] * sol.nullspace[0][0] + sol.x[1] * sol.nullspace[0][1];
        assert!(dot.abs() < 1e-12);
    }

    #[test]
    fn zero_field_rejected() {
        let basis = gm3();
        let z = CoeffVector::zeros(8);
        assert!(matches!(
            solve_completion(&z, &z, &[1, 2], &basis),
            Err(QbError::ZeroField)
        ));
        assert!(matches!(solve_h1_n2([0.0; 3], [1.0, 0.0, 0.0]), Err(QbError::ZeroField)));
    }

    #[test]
    fn constant_field_needs_no_completion() {
        let basis = gm3();
        let h0 = CoeffVector::from_components(8, &[(1, 1.1), (2, -0.4)]);
        let sol = solve_completion(&h0, &CoeffVector::zeros(8), &[1, 2], &basis).unwrap();
        assert!(sol.particular.vec_norm() < 1e-14);
        assert!(sol.residual < 1e-14);
    }

    #[test]
    fn rotating_field_closed_form() {
        // h = h0 (cos wt, sin wt, 0) -> h1 = (0, 0, w)
        let (h0, w, t) = (1.7, 0.31, 2.2);
        let h = [h0 * (w * t).cos(), h0 * (w * t).sin(), 0.0];
        let dh = [-h0 * w * (w * t).sin(), h0 * w * (w * t).cos(), 0.0];
        let h1 = solve_h1_n2(h, dh).unwrap();
        assert!(h1[0].abs() < 1e-15);
        assert!(h1[1].abs() < 1e-15);
        assert!((h1[2] - w).abs() < 1e-14);
    }

    #[test]
    fn pure_norm_change_gives_zero_closed_form() {
        let h = [0.4, -0.7, 1.1];
        let dh = [0.8, -1.4, 2.2]; // parallel to h
        let h1 = solve_h1_n2(h, dh).unwrap();
        assert!(h1.iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn commutation_examples() {
        let basis = gm3();
        let h = CoeffVector::from_components(8, &[(4, 0.8), (5, -0.3)]);
        let parallel = h.scaled(2.5);
        let check = commutation_condition(&h, &parallel, &basis).unwrap();
        assert!(check.holds);
        assert!(check.residual < 1e-12);

        let pauli = GeneratorBasis::gell_mann(2).unwrap();
        let e1 = CoeffVector::unit(3, 1);
        let e2 = CoeffVector::unit(3, 2);
        let check = commutation_condition(&e1, &e2, &pauli).unwrap();
        assert!(!check.holds);
        assert!((check.residual - 2.0).abs() < 1e-14);
    }

    #[test]
    fn trajectory_requires_unit_l0() {
        let basis = gm3();
        let p = Protocol::new(basis, vec![1, 2], |_| {
            CoeffVector::from_components(8, &[(1, 1.0), (2, 0.5)])
        })
        .unwrap();
        let l0 = CoeffVector::from_components(8, &[(1, 2.0)]);
        let grid = Grid::span(0.0, 1.0, 10);
        assert!(matches!(
            solve_trajectory(&p, &l0, &grid, None),
            Err(QbError::NotNormalized { .. })
        ));
    }

    #[test]
    fn trajectory_constant_field_is_static() {
        let basis = gm3();
        let p = Protocol::new(basis, vec![1, 2], |_| {
            CoeffVector::from_components(8, &[(1, 0.6), (2, 0.8)])
        })
        .unwrap();
        let l0 = CoeffVector::from_components(8, &[(1, 0.6), (2, 0.8)]);
        let grid = Grid::span(0.0, 2.0, 40);
        let traj = solve_trajectory(&p, &l0, &grid, None).unwrap();
        for k in 0..grid.len() {
            assert!(traj.l_path[k].sub(&l0).vec_norm() < 1e-12);
            assert!(traj.h1_path[k].vec_norm() < 1e-12);
        }
    }

    #[test]
    fn passage_time_errors_on_eigenstate() {
        let h = CMatrix::real_diag(&[1.0, -1.0]);
        let grid = Grid::span(0.0, 1.0, 10);
        let record = crate::dynamics::propagate(|_| h.clone(), &StateVector::basis_state(2, 0), &grid)
            .unwrap();
        assert!(matches!(
            passage_time(&record, |_| h.clone()),
            Err(QbError::DegenerateSegment { .. })
        ));
    }
}
