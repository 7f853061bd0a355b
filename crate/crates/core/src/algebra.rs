//! Orthonormal su(N) generator bases, their structure constants, and the
//! coefficient-vector representation of Hermitian operators.
//!
//! Basis operators `X_1 .. X_{N^2-1}` are normalized so that
//! `(1/N) Tr(X_a X_b) = delta_ab`, with the identity playing the role of the
//! implicit `X_0`. An operator `H = h_0 + h . X` is carried as a
//! [`CoeffVector`] holding the scalar part `h_0` and the real vector `h`.
//! Generator labels are 1-based throughout, matching the conventional
//! numbering of the Gell-Mann matrices.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // needed for no_std builds; shadowed when std is in the crate graph
use num_traits::Float;

use crate::matrix::{C64, CMatrix, StateVector};

/// Absolute tolerance (relative to entry scale) for Hermiticity checks.
pub const HERMITICITY_TOL: f64 = 1e-13;

/// Hard failure threshold on the imaginary residue of a structure constant.
pub const CLOSURE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum AlgebraError {
    /// Bases need N >= 2.
    DimensionTooSmall(usize),
    DimensionMismatch { expected: usize, got: usize },
    NonHermitian { error: f64 },
    NotTraceless { label: usize, trace: f64 },
    NotOrthonormal { a: usize, b: usize, error: f64 },
    /// `Tr([X_a, X_b] X_c)` had an imaginary residue above [`CLOSURE_TOL`];
    /// the generators do not close under commutation.
    NonClosedBasis { residual: f64 },
    ZeroNorm,
    InvalidLabel { label: usize, dim: usize },
}

impl fmt::Display for AlgebraError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DimensionTooSmall(n) => write!(f, "basis dimension N={n} is below 2"),
            Self::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Self::NonHermitian { error } => {
                write!(f, "operator is not Hermitian (deviation {error:.3e})")
            }
            Self::NotTraceless { label, trace } => {
                write!(f, "generator X_{label} has trace {trace:.3e}")
            }
            Self::NotOrthonormal { a, b, error } => write!(
                f,
                "generators X_{a}, X_{b} violate orthonormality by {error:.3e}"
            ),
            Self::NonClosedBasis { residual } => write!(
                f,
                "commutators leave the generator span (imaginary residue {residual:.3e})"
            ),
            Self::ZeroNorm => write!(f, "state has zero norm"),
            Self::InvalidLabel { label, dim } => {
                write!(f, "generator label {label} outside 1..={dim}")
            }
        }
    }
}

impl core::error::Error for AlgebraError {}

/// Real coefficients of an operator in a generator basis: scalar part on the
/// identity plus one component per generator (1-based labels).
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVector {
    pub scalar: f64,
    pub vec: Vec<f64>,
}

impl CoeffVector {
    pub fn new(scalar: f64, vec: Vec<f64>) -> Self {
        Self { scalar, vec }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            scalar: 0.0,
            vec: vec![0.0; dim],
        }
    }

    /// Unit vector along generator `a` (1-based).
    pub fn unit(dim: usize, a: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.set_component(a, 1.0);
        v
    }

    /// Vector supported on the given 1-based labels with the given values.
    pub fn from_components(dim: usize, parts: &[(usize, f64)]) -> Self {
        let mut v = Self::zeros(dim);
        for &(a, x) in parts {
            v.set_component(a, x);
        }
        v
    }

    /// Number of generator components (excludes the scalar part).
    pub fn dim(&self) -> usize {
        self.vec.len()
    }

    /// Component on generator `a` (1-based).
    pub fn component(&self, a: usize) -> f64 {
        self.vec[a - 1]
    }

    pub fn set_component(&mut self, a: usize, value: f64) {
        self.vec[a - 1] = value;
    }

    /// Euclidean norm of the generator part (scalar excluded).
    pub fn vec_norm(&self) -> f64 {
        self.vec.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Dot product of the generator parts.
    pub fn dot(&self, other: &Self) -> f64 {
        self.vec
            .iter()
            .zip(other.vec.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            scalar: self.scalar + other.scalar,
            vec: self
                .vec
                .iter()
                .zip(other.vec.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(-1.0))
    }

    pub fn scaled(&self, x: f64) -> Self {
        Self {
            scalar: self.scalar * x,
            vec: self.vec.iter().map(|v| v * x).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.scalar.is_finite() && self.vec.iter().all(|x| x.is_finite())
    }

    /// Largest |component| outside the 1-based label set.
    pub fn max_abs_off(&self, labels: &[usize]) -> f64 {
        self.vec
            .iter()
            .enumerate()
            .filter(|(i, _)| !labels.contains(&(i + 1)))
            .map(|(_, x)| x.abs())
            .fold(0.0, f64::max)
    }

    /// Copy with everything outside the 1-based label set zeroed.
    pub fn restricted(&self, labels: &[usize]) -> Self {
        let mut out = Self::zeros(self.dim());
        for &a in labels {
            out.set_component(a, self.component(a));
        }
        out
    }
}

/// Totally antisymmetric structure constants `f_abc` of a generator basis,
/// stored dense; labels are 1-based.
#[derive(Clone)]
pub struct StructureConstants {
    dim: usize,
    data: Vec<f64>,
    max_abs: f64,
}

impl StructureConstants {
    /// Number of generators indexed by each slot.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `f_abc` with 1-based labels.
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        let d = self.dim;
        self.data[(a - 1) * d * d + (b - 1) * d + (c - 1)]
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs
    }

    /// All `(a, b, c)` with `a < b < c` and `f_abc` nonzero above `tol`.
    pub fn nonzero_triples(&self, tol: f64) -> Vec<(usize, usize, usize, f64)> {
        let mut out = Vec::new();
        for a in 1..=self.dim {
            for b in (a + 1)..=self.dim {
                for c in (b + 1)..=self.dim {
                    let v = self.get(a, b, c);
                    if v.abs() > tol {
                        out.push((a, b, c, v));
                    }
                }
            }
        }
        out
    }
}

impl fmt::Debug for StructureConstants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "StructureConstants(dim={}, {} independent nonzero entries)",
            self.dim,
            self.nonzero_triples(1e-12).len()
        )
    }
}

/// Computes `f_abc = Tr([X_a, X_b] X_c) / (i N)` for orthonormal generators.
///
/// Fails with [`AlgebraError::NonClosedBasis`] if any imaginary residue
/// exceeds [`CLOSURE_TOL`]; residues below that are discarded.
pub fn structure_constants(generators: &[CMatrix]) -> Result<StructureConstants, AlgebraError> {
    let d = generators.len();
    assert!(d > 0);
    let n = generators[0].dim();
    let mut data = vec![0.0; d * d * d];
    let mut max_abs = 0.0f64;
    for a in 0..d {
        for b in 0..d {
            if a == b {
                continue; // commutator vanishes
            }
            let comm = CMatrix::commutator(&generators[a], &generators[b]);
            for c in 0..d {
                let mut tr = C64::new(0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        tr += comm[(i, j)] * generators[c][(j, i)];
                    }
                }
                let z = tr / C64::new(0.0, n as f64);
                if z.im.abs() > CLOSURE_TOL {
                    return Err(AlgebraError::NonClosedBasis { residual: z.im.abs() });
                }
                data[a * d * d + b * d + c] = z.re;
                max_abs = max_abs.max(z.re.abs());
            }
        }
    }
    Ok(StructureConstants { dim: d, data, max_abs })
}

/// An orthonormal traceless Hermitian generator basis for su(N), together
/// with its structure constants.
#[derive(Debug, Clone)]
pub struct GeneratorBasis {
    n: usize,
    generators: Vec<CMatrix>,
    f: StructureConstants,
}

impl GeneratorBasis {
    /// Generalized Gell-Mann basis scaled by `sqrt(N/2)` so that
    /// `(1/N) Tr(X_a X_b) = delta_ab`.
    ///
    /// For N = 2 this is the Pauli basis; for N = 3 the conventional
    /// lambda_1..lambda_8 ordering is used. Other dimensions order the
    /// generators as symmetric pairs (row-major), then antisymmetric pairs,
    /// then diagonal operators.
    pub fn gell_mann(n: usize) -> Result<Self, AlgebraError> {
        if n < 2 {
            return Err(AlgebraError::DimensionTooSmall(n));
        }
        Self::from_generators(gell_mann_generators(n))
    }

    /// Validates an explicit generator set and computes its structure
    /// constants. The set must consist of `N^2 - 1` Hermitian traceless
    /// matrices orthonormal under `(1/N) Tr`.
    pub fn from_generators(generators: Vec<CMatrix>) -> Result<Self, AlgebraError> {
        if generators.is_empty() {
            return Err(AlgebraError::DimensionTooSmall(0));
        }
        let n = generators[0].dim();
        if n < 2 {
            return Err(AlgebraError::DimensionTooSmall(n));
        }
        if generators.len() != n * n - 1 {
            return Err(AlgebraError::DimensionMismatch {
                expected: n * n - 1,
                got: generators.len(),
            });
        }
        for (idx, g) in generators.iter().enumerate() {
            if g.dim() != n {
                return Err(AlgebraError::DimensionMismatch { expected: n, got: g.dim() });
            }
            let herm = g.hermiticity_error();
            if herm > 1e-14 * f64::max(1.0, g.max_abs()) {
                return Err(AlgebraError::NonHermitian { error: herm });
            }
            let tr = g.trace();
            if tr.norm() > 1e-14 * f64::max(1.0, g.max_abs()) {
                return Err(AlgebraError::NotTraceless { label: idx + 1, trace: tr.re });
            }
        }
        for a in 0..generators.len() {
            for b in a..generators.len() {
                let mut tr = C64::new(0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        tr += generators[a][(i, j)] * generators[b][(j, i)];
                    }
                }
                let want = if a == b { 1.0 } else { 0.0 };
                let err = (tr / n as f64 - want).norm();
                if err > 1e-12 {
                    return Err(AlgebraError::NotOrthonormal { a: a + 1, b: b + 1, error: err });
                }
            }
        }
        let f = structure_constants(&generators)?;
        Ok(Self { n, generators, f })
    }

    /// Hilbert-space dimension N.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of generators, `N^2 - 1`.
    pub fn d(&self) -> usize {
        self.generators.len()
    }

    /// Generator `X_a` (1-based label).
    pub fn generator(&self, a: usize) -> &CMatrix {
        &self.generators[a - 1]
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn structure(&self) -> &StructureConstants {
        &self.f
    }

    fn check_dim(&self, c: &CoeffVector) -> Result<(), AlgebraError> {
        if c.dim() != self.d() {
            return Err(AlgebraError::DimensionMismatch {
                expected: self.d(),
                got: c.dim(),
            });
        }
        Ok(())
    }

    /// Generalized cross product `(h x l)_a = sum_bc f_abc h_b l_c`.
    ///
    /// The scalar parts of the inputs do not contribute; the result has
    /// scalar part zero.
    pub fn cross(&self, h: &CoeffVector, l: &CoeffVector) -> Result<CoeffVector, AlgebraError> {
        self.check_dim(h)?;
        self.check_dim(l)?;
        let d = self.d();
        let mut out = CoeffVector::zeros(d);
        for b in 0..d {
            let hb = h.vec[b];
            if hb == 0.0 {
                continue;
            }
            for c in 0..d {
                let lc = l.vec[c];
                if lc == 0.0 {
                    continue;
                }
                let base = b * d + c;
                for a in 0..d {
                    out.vec[a] += self.f.data[a * d * d + base] * hb * lc;
                }
            }
        }
        Ok(out)
    }

    /// `H = h_0 * 1 + sum_a h_a X_a`.
    pub fn to_matrix(&self, c: &CoeffVector) -> CMatrix {
        assert_eq!(c.dim(), self.d(), "coefficient vector has wrong dimension");
        let mut h = CMatrix::identity(self.n).scaled_re(c.scalar);
        for (a, &x) in c.vec.iter().enumerate() {
            if x != 0.0 {
                h = &h + &self.generators[a].scaled_re(x);
            }
        }
        h
    }

    /// Inverse of [`Self::to_matrix`]: `h_a = (1/N) Tr(H X_a)`,
    /// `h_0 = (1/N) Tr H`. Rejects non-Hermitian input.
    pub fn to_coeffs(&self, h: &CMatrix) -> Result<CoeffVector, AlgebraError> {
        if h.dim() != self.n {
            return Err(AlgebraError::DimensionMismatch { expected: self.n, got: h.dim() });
        }
        let herm = h.hermiticity_error();
        if herm > HERMITICITY_TOL * f64::max(1.0, h.max_abs()) {
            return Err(AlgebraError::NonHermitian { error: herm });
        }
        let n = self.n;
        let mut out = CoeffVector::zeros(self.d());
        out.scalar = h.trace().re / n as f64;
        for a in 0..self.d() {
            let g = &self.generators[a];
            let mut tr = C64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    tr += h[(i, j)] * g[(j, i)];
                }
            }
            out.vec[a] = tr.re / n as f64;
        }
        Ok(out)
    }

    /// Unit vector `e` with `|psi><psi| = 1/N + (sqrt(N-1)/N) e . X`.
    ///
    /// The input is normalized internally; a numerically zero state is
    /// rejected.
    pub fn projector_coeffs(&self, psi: &StateVector) -> Result<CoeffVector, AlgebraError> {
        if psi.dim() != self.n {
            return Err(AlgebraError::DimensionMismatch { expected: self.n, got: psi.dim() });
        }
        if psi.norm() < 1e-12 {
            return Err(AlgebraError::ZeroNorm);
        }
        let unit = psi.normalized().ok_or(AlgebraError::ZeroNorm)?;
        let p = unit.projector();
        let c = self.to_coeffs(&p)?;
        let scale = self.n as f64 / ((self.n as f64 - 1.0).sqrt());
        let mut e = CoeffVector::zeros(self.d());
        for a in 0..self.d() {
            e.vec[a] = c.vec[a] * scale;
        }
        Ok(e)
    }
}

fn elem(n: usize, i: usize, j: usize, v: C64) -> CMatrix {
    let mut m = CMatrix::zeros(n);
    m[(i, j)] = v;
    m
}

/// Symmetric pair generator `E_jk + E_kj` (unnormalized).
fn sym_pair(n: usize, j: usize, k: usize) -> CMatrix {
    &elem(n, j, k, C64::new(1.0, 0.0)) + &elem(n, k, j, C64::new(1.0, 0.0))
}

/// Antisymmetric pair generator `-i(E_jk - E_kj)` (unnormalized).
fn asym_pair(n: usize, j: usize, k: usize) -> CMatrix {
    &elem(n, j, k, C64::new(0.0, -1.0)) + &elem(n, k, j, C64::new(0.0, 1.0))
}

/// Diagonal generator `sqrt(2/(l(l+1))) diag(1,..,1,-l,0,..)` (unnormalized).
fn diag_gen(n: usize, l: usize) -> CMatrix {
    let mut diag = vec![0.0; n];
    let norm = (2.0 / (l as f64 * (l as f64 + 1.0))).sqrt();
    for item in diag.iter_mut().take(l) {
        *item = norm;
    }
    diag[l] = -(l as f64) * norm;
    CMatrix::real_diag(&diag)
}

fn gell_mann_generators(n: usize) -> Vec<CMatrix> {
    let mut unnormalized = Vec::with_capacity(n * n - 1);
    if n == 3 {
        // Conventional lambda ordering so structure-constant labels match
        // the standard su(3) tables.
        unnormalized.push(sym_pair(3, 0, 1));
        unnormalized.push(asym_pair(3, 0, 1));
        unnormalized.push(diag_gen(3, 1));
        unnormalized.push(sym_pair(3, 0, 2));
        unnormalized.push(asym_pair(3, 0, 2));
        unnormalized.push(sym_pair(3, 1, 2));
        unnormalized.push(asym_pair(3, 1, 2));
        unnormalized.push(diag_gen(3, 2));
    } else {
        for j in 0..n {
            for k in (j + 1)..n {
                unnormalized.push(sym_pair(n, j, k));
            }
        }
        for j in 0..n {
            for k in (j + 1)..n {
                unnormalized.push(asym_pair(n, j, k));
            }
        }
        for l in 1..n {
            unnormalized.push(diag_gen(n, l));
        }
    }
    let scale = (n as f64 / 2.0).sqrt();
    unnormalized.into_iter().map(|g| g.scaled_re(scale)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_dimension() {
        assert!(matches!(
            GeneratorBasis::gell_mann(1),
            Err(AlgebraError::DimensionTooSmall(1))
        ));
        assert!(matches!(
            GeneratorBasis::gell_mann(0),
            Err(AlgebraError::DimensionTooSmall(0))
        ));
    }

    #[test]
    fn pauli_basis_for_n2() {
        let basis = GeneratorBasis::gell_mann(2).unwrap();
        assert_eq!(basis.d(), 3);
        // X_3 = diag(1, -1)
        let x3 = basis.generator(3);
        assert!((x3[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((x3[(1, 1)] - C64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!(x3[(0, 1)].norm() < 1e-15);
        // f_abc = 2 eps_abc
        assert!((basis.structure().get(1, 2, 3) - 2.0).abs() < 1e-14);
        assert!((basis.structure().get(2, 1, 3) + 2.0).abs() < 1e-14);
        assert!(basis.structure().get(1, 1, 3).abs() < 1e-14);
    }

    #[test]
    fn gell_mann_x4_entries() {
        let basis = GeneratorBasis::gell_mann(3).unwrap();
        let x4 = basis.generator(4);
        let want = (6.0f64).sqrt() / 2.0;
        assert!((x4[(0, 2)] - C64::new(want, 0.0)).norm() < 1e-15);
        assert!((x4[(2, 0)] - C64::new(want, 0.0)).norm() < 1e-15);
        let mut checked = 0;
        for i in 0..3 {
            for j in 0..3 {
                if (i, j) != (0, 2) && (j, i) != (0, 2) {
                    assert!(x4[(i, j)].norm() < 1e-15);
                    checked += 1;
                }
            }
        }
        assert_eq!(checked, 7);
    }

    #[test]
    fn n4_basis_passes_invariants() {
        let basis = GeneratorBasis::gell_mann(4).unwrap();
        assert_eq!(basis.d(), 15);
        // from_generators already enforced hermiticity/tracelessness/orthonormality
        for g in basis.generators() {
            assert!(g.hermiticity_error() < 1e-14);
            assert!(g.trace().norm() < 1e-14);
        }
    }

    #[test]
    fn cross_self_vanishes() {
        let basis = GeneratorBasis::gell_mann(3).unwrap();
        let h = CoeffVector::from_components(8, &[(1, 0.7), (4, -1.2), (8, 0.3)]);
        let c = basis.cross(&h, &h).unwrap();
        assert!(c.vec_norm() < 1e-14);
    }

    #[test]
    fn cross_pauli_example() {
        let basis = GeneratorBasis::gell_mann(2).unwrap();
        let h = CoeffVector::unit(3, 1);
        let l = CoeffVector::unit(3, 2);
        let c = basis.cross(&h, &l).unwrap();
        assert!((c.component(3) - 2.0).abs() < 1e-14);
        assert!(c.component(1).abs() < 1e-15);
        assert!(c.component(2).abs() < 1e-15);
        assert_eq!(c.scalar, 0.0);
    }

    #[test]
    fn cross_dimension_mismatch() {
        let basis = GeneratorBasis::gell_mann(2).unwrap();
        let h = CoeffVector::zeros(8);
        assert!(matches!(
            basis.cross(&h, &h),
            Err(AlgebraError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn identity_coeffs() {
        let basis = GeneratorBasis::gell_mann(3).unwrap();
        let c = basis.to_coeffs(&CMatrix::identity(3)).unwrap();
        assert!((c.scalar - 1.0).abs() < 1e-15);
        assert!(c.vec_norm() < 1e-15);
    }

    #[test]
    fn to_coeffs_rejects_non_hermitian() {
        let basis = GeneratorBasis::gell_mann(2).unwrap();
        let mut m = CMatrix::zeros(2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(
            basis.to_coeffs(&m),
            Err(AlgebraError::NonHermitian { .. })
        ));
    }

    #[test]
    fn spin_up_projector_coeffs() {
        let basis = GeneratorBasis::gell_mann(2).unwrap();
        let e = basis
            .projector_coeffs(&StateVector::basis_state(2, 0))
            .unwrap();
        assert!((e.component(3) - 1.0).abs() < 1e-14);
        assert!(e.component(1).abs() < 1e-15);
        assert!(e.component(2).abs() < 1e-15);
    }

    #[test]
    fn projector_coeffs_rejects_zero() {
        let basis = GeneratorBasis::gell_mann(2).unwrap();
        let zero = StateVector::new(vec![C64::new(0.0, 0.0); 2]);
        assert!(matches!(
            basis.projector_coeffs(&zero),
            Err(AlgebraError::ZeroNorm)
        ));
    }

    #[test]
    fn non_orthonormal_set_rejected() {
        // Pauli matrices scaled by 1/2 break the (1/N) Tr normalization.
        let pauli = gell_mann_generators(2);
        let halved: Vec<_> = pauli.iter().map(|g| g.scaled_re(0.5)).collect();
        assert!(matches!(
            GeneratorBasis::from_generators(halved),
            Err(AlgebraError::NotOrthonormal { .. })
        ));
    }
}
