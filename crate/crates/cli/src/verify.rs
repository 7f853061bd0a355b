//! Runtime self-check suites behind `qbdrive verify <suite>`.
//!
//! Each check re-derives an independently known result (structure-constant
//! tables, closed forms, route equivalences) and compares against the
//! library output at a fixed tolerance. Randomized checks are seeded and
//! deterministic.

use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qbdrive_core::algebra::{CoeffVector, GeneratorBasis};
use qbdrive_core::driving::{self, Protocol};
use qbdrive_core::dynamics;
use qbdrive_core::grid::Grid;
use qbdrive_core::matrix::{C64, CMatrix, StateVector};
use qbdrive_core::qb::{self, QbError};
use qbdrive_core::spectral;
use qbdrive_core::spin1::{self, SpinPerturbation};
use qbdrive_core::stability;

use crate::CliError;

const SQRT6: f64 = 2.449489742783178;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Algebra,
    Qb,
    Driving,
    Stability,
    All,
}

impl FromStr for Suite {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "algebra" => Ok(Self::Algebra),
            "qb" => Ok(Self::Qb),
            "driving" => Ok(Self::Driving),
            "stability" => Ok(Self::Stability),
            "all" => Ok(Self::All),
            other => Err(CliError::Validation(format!(
                "unknown suite '{other}' (expected algebra|qb|driving|stability|all)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name: name.to_string(), passed, detail }
}

/// Runs the requested suite(s); the seed feeds the randomized checks.
pub fn run_suite(suite: Suite, seed: u64) -> Vec<CheckResult> {
    let mut results = Vec::new();
    if matches!(suite, Suite::Algebra | Suite::All) {
        algebra_suite(&mut results, seed);
    }
    if matches!(suite, Suite::Qb | Suite::All) {
        qb_suite(&mut results, seed);
    }
    if matches!(suite, Suite::Driving | Suite::All) {
        driving_suite(&mut results);
    }
    if matches!(suite, Suite::Stability | Suite::All) {
        stability_suite(&mut results, seed);
    }
    results
}

// ---------------------------------------------------------------------------
// algebra
// ---------------------------------------------------------------------------

/// The nine independent nonzero su(3) structure constants.
pub fn su3_reference_table() -> [(usize, usize, usize, f64); 9] {
    [
        (1, 2, 3, SQRT6),
        (1, 4, 7, 0.5 * SQRT6),
        (1, 5, 6, -0.5 * SQRT6),
        (2, 4, 6, 0.5 * SQRT6),
        (2, 5, 7, 0.5 * SQRT6),
        (3, 4, 5, 0.5 * SQRT6),
        (3, 6, 7, -0.5 * SQRT6),
        (4, 5, 8, 3.0f64.sqrt() / 2.0 * SQRT6),
        (6, 7, 8, 3.0f64.sqrt() / 2.0 * SQRT6),
    ]
}

fn algebra_suite(results: &mut Vec<CheckResult>, seed: u64) {
    let basis = GeneratorBasis::gell_mann(3).expect("N=3 basis");
    let f = basis.structure();

    let mut worst = 0.0f64;
    let table = su3_reference_table();
    for a in 1..=8 {
        for b in 1..=8 {
            for c in 1..=8 {
                let mut key = [a, b, c];
                key.sort_unstable();
                let want = table
                    .iter()
                    .find(|&&(x, y, z, _)| [x, y, z] == key)
                    .map(|&(_, _, _, v)| v * perm_sign(a, b, c))
                    .unwrap_or(0.0);
                worst = worst.max((f.get(a, b, c) - want).abs());
            }
        }
    }
    results.push(check(
        "structure constants reproduce the su(3) table",
        worst < 1e-12 && f.nonzero_triples(1e-12).len() == 9,
        format!("max deviation {worst:.2e}, 9 independent nonzero entries"),
    ));

    let mut worst = 0.0f64;
    for n in [2usize, 3, 4] {
        let b = GeneratorBasis::gell_mann(n).expect("basis");
        for i in 1..=b.d() {
            for j in 1..=b.d() {
                let mut tr = C64::new(0.0, 0.0);
                for r in 0..n {
                    for s in 0..n {
                        tr += b.generator(i)[(r, s)] * b.generator(j)[(s, r)];
                    }
                }
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((tr / n as f64 - C64::new(want, 0.0)).norm());
            }
        }
    }
    results.push(check(
        "generator orthonormality (N = 2..4)",
        worst < 1e-12,
        format!("max deviation {worst:.2e}"),
    ));

    let mut worst = 0.0f64;
    for a in 1..=8usize {
        for b in 1..=8usize {
            for c in 1..=8usize {
                for d in 1..=8usize {
                    let mut acc = 0.0;
                    for e in 1..=8usize {
                        acc += f.get(a, b, e) * f.get(e, c, d)
                            + f.get(c, b, e) * f.get(a, e, d)
                            + f.get(d, b, e) * f.get(a, c, e);
                    }
                    worst = worst.max(acc.abs());
                }
            }
        }
    }
    results.push(check(
        "Jacobi identity (N = 3, exhaustive)",
        worst < 1e-10,
        format!("max deviation {worst:.2e}"),
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let n = 2 + case % 3;
        let b = GeneratorBasis::gell_mann(n).expect("basis");
        let h = random_coeffs(&mut rng, b.d());
        let l = random_coeffs(&mut rng, b.d());
        let tensor_route = b.cross(&h, &l).expect("dims");
        let comm = CMatrix::commutator(&b.to_matrix(&h), &b.to_matrix(&l))
            .scaled(C64::new(0.0, -1.0));
        let matrix_route = b.to_coeffs(&comm).expect("hermitian");
        worst = worst.max(tensor_route.sub(&matrix_route).vec_norm());
    }
    results.push(check(
        "cross product agrees with the commutator route",
        worst < 1e-11,
        format!("50 seeded cases, max deviation {worst:.2e}"),
    ));

    let mut worst = 0.0f64;
    for case in 0..100 {
        let n = 2 + case % 3;
        let b = GeneratorBasis::gell_mann(n).expect("basis");
        let h = random_hermitian(&mut rng, n);
        let back = b.to_matrix(&b.to_coeffs(&h).expect("hermitian"));
        worst = worst.max(back.max_abs_diff(&h));
    }
    results.push(check(
        "operator round trip through coefficients",
        worst < 1e-12,
        format!("100 seeded cases, max deviation {worst:.2e}"),
    ));
}

// ---------------------------------------------------------------------------
// qb
// ---------------------------------------------------------------------------

fn qb_suite(results: &mut Vec<CheckResult>, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let pauli = GeneratorBasis::gell_mann(2).expect("basis");
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (a1, b1, w1, p1) = wave(&mut rng);
        let (a2, b2, w2, p2) = wave(&mut rng);
        let t = rng.random_range(0.0..10.0);
        let h = [a1 + b1 * (w1 * t + p1).sin(), a2 + b2 * (w2 * t + p2).sin(), 0.0];
        let dh = [b1 * w1 * (w1 * t + p1).cos(), b2 * w2 * (w2 * t + p2).cos(), 0.0];
        let closed = qb::solve_h1_n2(h, dh).expect("nonzero field");
        let h0 = CoeffVector::from_components(3, &[(1, h[0] / 2.0), (2, h[1] / 2.0)]);
        let dh0 = CoeffVector::from_components(3, &[(1, dh[0] / 2.0), (2, dh[1] / 2.0)]);
        let sol = qb::solve_completion(&h0, &dh0, &[1, 2], &pauli).expect("solvable");
        let protocol = Protocol::new(pauli.clone(), vec![1, 2], move |s| {
            CoeffVector::from_components(
                3,
                &[
                    (1, (a1 + b1 * (w1 * s + p1).sin()) / 2.0),
                    (2, (a2 + b2 * (w2 * s + p2).sin()) / 2.0),
                ],
            )
        })
        .expect("protocol")
        .with_derivative(move |s| {
            CoeffVector::from_components(
                3,
                &[
                    (1, b1 * w1 * (w1 * s + p1).cos() / 2.0),
                    (2, b2 * w2 * (w2 * s + p2).cos() / 2.0),
                ],
            )
        });
        let spectral_route = pauli
            .to_coeffs(&driving::counter_diabatic(&protocol, t).expect("nondegenerate"))
            .expect("hermitian");
        for a in 1..=3 {
            worst = worst.max((closed[a - 1] - 2.0 * sol.particular.component(a)).abs());
            worst = worst.max((closed[a - 1] - 2.0 * spectral_route.component(a)).abs());
        }
    }
    results.push(check(
        "two-level closed form matches completion and spectral routes",
        worst < 1e-9,
        format!("100 seeded protocols, max deviation {worst:.2e}"),
    ));

    let basis = GeneratorBasis::gell_mann(3).expect("basis");
    let h124 = |t: f64| {
        CoeffVector::from_components(
            8,
            &[
                (1, 1.3 + 0.4 * (0.9 * t).sin() + 0.2 * (1.7 * t).cos()),
                (2, 0.8 + 0.5 * (1.1 * t).cos()),
                (4, 1.1 + 0.3 * (1.3 * t + 0.5).sin()),
            ],
        )
    };
    let dh124 = |t: f64| {
        CoeffVector::from_components(
            8,
            &[
                (1, 0.36 * (0.9 * t).cos() - 0.34 * (1.7 * t).sin()),
                (2, -0.55 * (1.1 * t).sin()),
                (4, 0.39 * (1.3 * t + 0.5).cos()),
            ],
        )
    };
    let mut worst = 0.0f64;
    for &t in &[0.3, 2.2, 5.9, 11.4] {
        let h = h124(t);
        let dh = dh124(t);
        let sol = qb::solve_completion(&h, &dh, &[1, 2, 4], &basis).expect("solvable");
        let printed = printed_completion_124(&h, &dh);
        let mut diff = printed.sub(&sol.particular);
        for null in &sol.nullspace {
            diff = diff.sub(&null.scaled(diff.dot(null)));
        }
        worst = worst.max(diff.vec_norm());
    }
    results.push(check(
        "{1,2,4} completion matches explicit formulas modulo commutant",
        worst < 1e-9,
        format!("max residual {worst:.2e}"),
    ));

    let h345 = |t: f64| {
        CoeffVector::from_components(
            8,
            &[
                (3, 0.9 + 0.2 * (0.7 * t).sin()),
                (4, 1.2 + 0.4 * (1.3 * t).cos()),
                (5, 0.7 + 0.3 * (1.9 * t + 1.0).sin()),
            ],
        )
    };
    let dh345 = |t: f64| {
        CoeffVector::from_components(
            8,
            &[
                (3, 0.14 * (0.7 * t).cos()),
                (4, -0.52 * (1.3 * t).sin()),
                (5, 0.57 * (1.9 * t + 1.0).cos()),
            ],
        )
    };
    let no_completion = matches!(
        qb::solve_completion(&h345(1.0), &dh345(1.0), &[3, 4, 5], &basis),
        Err(QbError::NoCompletion { .. })
    );
    results.push(check(
        "{3,4,5} completion correctly reports no solution",
        no_completion,
        "constraint set with internal structure constants".to_string(),
    ));

    let protocol = Protocol::new(basis.clone(), vec![3, 4, 5], h345)
        .expect("protocol")
        .with_derivative(dh345);
    let theta = 0.4f64;
    let h0 = h345(0.0);
    let rho = (h0.component(4).powi(2) + h0.component(5).powi(2)).sqrt();
    let l0 = CoeffVector::from_components(
        8,
        &[
            (3, theta.sin()),
            (4, h0.component(4) / rho * theta.cos()),
            (5, h0.component(5) / rho * theta.cos()),
        ],
    );
    let grid = Grid::span(0.0, 2.0, 4000);
    let f345 = basis.structure().get(3, 4, 5);
    let f458 = basis.structure().get(4, 5, 8);
    let outcome = match qb::solve_trajectory(&protocol, &l0, &grid, None) {
        Err(e) => (false, format!("solver failed: {e}")),
        Ok(traj) => {
            let mut worst = 0.0f64;
            let mut worst_zero = 0.0f64;
            for k in 0..grid.len() {
                let t = grid.time(k);
                let h = h345(t);
                let dh = dh345(t);
                let rho2 = h.component(4).powi(2) + h.component(5).powi(2);
                let want = (f345 / f458)
                    * ((h.component(4) * dh.component(5) - h.component(5) * dh.component(4))
                        / (f345 * rho2)
                        - h.component(3)
                        + rho2.sqrt() * theta.tan());
                worst = worst.max((traj.h1_path[k].component(8) - want).abs());
                for a in [1usize, 2, 6, 7] {
                    worst_zero = worst_zero.max(traj.h1_path[k].component(a).abs());
                }
            }
            (
                worst < 1e-8 && worst_zero < 1e-10,
                format!("max h8 deviation {worst:.2e}, other components {worst_zero:.2e}"),
            )
        }
    };
    results.push(check("{3,4,5} trajectory reproduces the closed form", outcome.0, outcome.1));
}

// ---------------------------------------------------------------------------
// driving
// ---------------------------------------------------------------------------

fn driving_suite(results: &mut Vec<CheckResult>) {
    let omega = std::f64::consts::PI / 20.0;
    let protocol = spin1::rotating_protocol(1.0, omega);
    let mut worst = 0.0f64;
    for k in 0..100 {
        let t = 40.0 * k as f64 / 99.0;
        let h1 = driving::counter_diabatic(&protocol, t).expect("nondegenerate");
        worst = worst.max(h1.max_abs_diff(&spin1::s3().scaled_re(omega)));
    }
    results.push(check(
        "rotating-field counter term equals omega * S_3",
        worst < 1e-10,
        format!("100 sample times, max entry deviation {worst:.2e}"),
    ));

    let full = spin1::rotating_protocol_with_cd(1.0, omega);
    let grid = Grid::from_step(0.0, 1e-3, 40_000);
    let record = dynamics::propagate(|t| full.h_matrix(t), &spin1::initial_state(), &grid)
        .expect("propagation");
    let mut min_fidelity = 1.0f64;
    for k in 0..grid.len() {
        let f = dynamics::fidelity(
            &spin1::adiabatic_reference(omega, grid.time(k)),
            record.state(k),
        );
        min_fidelity = min_fidelity.min(f);
    }
    results.push(check(
        "transitionless transport tracks the closed-form state",
        min_fidelity >= 1.0 - 1e-6,
        format!("min fidelity 1 - {:.2e} over one period", 1.0 - min_fidelity),
    ));

    let report = driving::invariant_drift(&spin1::s1(), &full, &grid, Some(&spin1::initial_state()))
        .expect("drift");
    results.push(check(
        "invariant spectrum constant along the passage",
        report.max_eigenvalue_drift < 1e-8
            && report.max_condition_drift.unwrap_or(f64::INFINITY) < 1e-9,
        format!(
            "eigenvalue drift {:.2e}, projector-condition drift {:.2e}",
            report.max_eigenvalue_drift,
            report.max_condition_drift.unwrap_or(f64::NAN)
        ),
    ));

    let period = 2.0 * std::f64::consts::PI / omega;
    let lt = qb::passage_time(&record, |t| full.h_matrix(t)).expect("nondegenerate segments");
    results.push(check(
        "time functional equals elapsed time on the exact trajectory",
        (lt - period).abs() < 1e-4 * period,
        format!("L_T = {lt:.8}, elapsed {period:.8}"),
    ));
}

// ---------------------------------------------------------------------------
// stability
// ---------------------------------------------------------------------------

fn stability_suite(results: &mut Vec<CheckResult>, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x51ed_270b);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let (psi, h1) = random_eigenstate_pair(&mut rng, 3);
        let c = rng.random_range(-2.0..2.0);
        let i = stability::instability_cd(&psi, &h1, &h1.scaled_re(c)).expect("preconditions");
        worst = worst.max((i - c * c).abs());
    }
    results.push(check(
        "scaled counter-term perturbations give I = c^2",
        worst < 1e-10,
        format!("200 seeded cases, max deviation {worst:.2e}"),
    ));

    let mut worst = 0.0f64;
    for _ in 0..200 {
        let (psi, h1) = random_eigenstate_pair(&mut rng, 3);
        let dh = random_hermitian(&mut rng, 3);
        // stab. form on the full Hamiltonian vs the counter-term reduction;
        // psi is an H_0 eigenstate by construction
        let h0 = random_diag_in_state_basis(&mut rng, &psi);
        let general =
            stability::instability_general(&psi, &(&h0 + &h1), &dh).expect("variance");
        let reduced = stability::instability_cd(&psi, &h1, &dh).expect("preconditions");
        worst = worst.max((general - reduced).abs());
    }
    results.push(check(
        "general and counter-diabatic quadratic forms agree",
        worst < 1e-10,
        format!("200 seeded cases, max deviation {worst:.2e}"),
    ));

    // closed forms along the benchmark trajectory
    let omega = std::f64::consts::PI / 20.0;
    let delta_h = 0.5;
    let period = 2.0 * std::f64::consts::PI / omega;
    let h1 = spin1::s3().scaled_re(omega);
    let scale = (delta_h / omega).powi(2);
    for kind in SpinPerturbation::ALL {
        let closed: Box<dyn Fn(f64) -> f64> = match kind {
            SpinPerturbation::S3 => Box::new(move |_| scale),
            SpinPerturbation::Lambda4 => {
                Box::new(move |t| -scale * 2.0 / 3.0 * (1.0 + (2.0 * omega * t).sin().powi(2)))
            }
            SpinPerturbation::Lambda5 => {
                Box::new(move |t| -scale * 2.0 / 3.0 * (1.0 + (2.0 * omega * t).cos().powi(2)))
            }
            SpinPerturbation::Lambda8 => Box::new(move |_| -scale),
        };
        let dh = kind.direction().scaled_re(delta_h);
        let mut worst = 0.0f64;
        for k in 0..=400 {
            let t = period * k as f64 / 400.0;
            let psi = spin1::adiabatic_reference(omega, t);
            let i = stability::instability_cd(&psi, &h1, &dh).expect("preconditions");
            worst = worst.max((i - closed(t)).abs());
        }
        results.push(check(
            &format!("closed-form instability for the {} perturbation", kind.label()),
            worst < 1e-8,
            format!("max deviation {worst:.2e} over one period"),
        ));
    }
}

// ---------------------------------------------------------------------------
// helpers
// ---------------------------------------------------------------------------

fn perm_sign(a: usize, b: usize, c: usize) -> f64 {
    let mut inv = 0;
    for (x, y) in [(a, b), (a, c), (b, c)] {
        if x > y {
            inv += 1;
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn wave(rng: &mut ChaCha8Rng) -> (f64, f64, f64, f64) {
    (
        rng.random_range(1.0..2.0),
        rng.random_range(-0.5..0.5),
        rng.random_range(0.3..1.5),
        rng.random_range(0.0..std::f64::consts::TAU),
    )
}

fn random_coeffs(rng: &mut ChaCha8Rng, d: usize) -> CoeffVector {
    CoeffVector::new(
        rng.random_range(-1.0..1.0),
        (0..d).map(|_| rng.random_range(-2.0..2.0)).collect(),
    )
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let m = CMatrix::from_fn(n, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    (&m + &m.adjoint()).scaled_re(0.5)
}

/// A random state together with a Hermitian operator that is purely
/// off-diagonal in an eigenbasis containing that state.
fn random_eigenstate_pair(rng: &mut ChaCha8Rng, n: usize) -> (StateVector, CMatrix) {
    let sys = spectral::eigh(&random_hermitian(rng, n)).expect("hermitian");
    let branch = rng.random_range(0..n);
    let psi = sys.vector(branch);
    // off-diagonal in the eigenbasis of the sampled operator
    let mut b = CMatrix::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            b[(i, j)] = z;
            b[(j, i)] = z.conj();
        }
    }
    let v = sys.vectors();
    let h1 = &(v * &b) * &v.adjoint();
    (psi, h1)
}

/// A Hermitian operator diagonal in an eigenbasis containing `psi`, i.e.
/// one that has `psi` as an eigenstate.
fn random_diag_in_state_basis(rng: &mut ChaCha8Rng, psi: &StateVector) -> CMatrix {
    let n = psi.dim();
    // complete psi to an orthonormal basis by Gram-Schmidt over basis states
    let mut cols: Vec<StateVector> = vec![psi.clone()];
    for k in 0..n {
        if cols.len() == n {
            break;
        }
        let mut cand = StateVector::basis_state(n, k);
        for c in &cols {
            let ov = c.inner(&cand);
            cand = cand.sub(&c.scaled(ov));
        }
        if cand.norm() > 1e-6 {
            cols.push(cand.normalized().expect("nonzero"));
        }
    }
    let mut h = CMatrix::zeros(n);
    for c in &cols {
        let e = rng.random_range(-2.0..2.0);
        h = &h + &c.projector().scaled_re(e);
    }
    h
}

fn printed_completion_124(h: &CoeffVector, dh: &CoeffVector) -> CoeffVector {
    let (h1, h2, h4) = (h.component(1), h.component(2), h.component(4));
    let (d1, d2, d4) = (dh.component(1), dh.component(2), dh.component(4));
    let n2 = h1 * h1 + h2 * h2 + h4 * h4;
    let w12 = h1 * d2 - h2 * d1;
    CoeffVector::from_components(
        8,
        &[
            (3, (1.0 / SQRT6) * (1.0 + 1.5 * h4 * h4 / n2) * w12 / n2),
            (
                6,
                (1.5f64).sqrt() * h4 * h1 / n2 * w12 / n2
                    + (2.0f64 / 3.0).sqrt() * (h2 * d4 - h4 * d2) / n2,
            ),
            (
                7,
                -(1.5f64).sqrt() * h4 * h2 / n2 * w12 / n2
                    - (2.0f64 / 3.0).sqrt() * (h4 * d1 - h1 * d4) / n2,
            ),
            (8, -(3.0 * 2.0f64.sqrt() / 4.0) * h4 * h4 / n2 * w12 / n2),
        ],
    )
}
