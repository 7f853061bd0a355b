//! Completion and trajectory solvers against the closed-form su(2) and su(3)
//! benchmark cases.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qbdrive_core::algebra::{CoeffVector, GeneratorBasis};
use qbdrive_core::driving::{self, Protocol};
use qbdrive_core::dynamics;
use qbdrive_core::grid::Grid;
use qbdrive_core::matrix::CMatrix;
use qbdrive_core::qb::{self, QbError};
use qbdrive_core::spectral;
use qbdrive_core::spin1;

const SQRT6: f64 = 2.449489742783178;

/// Smooth bounded-away-from-zero component sampler.
#[derive(Clone, Copy)]
struct Wave {
    base: f64,
    amp: f64,
    freq: f64,
    phase: f64,
}

impl Wave {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        Self {
            base: rng.random_range(1.0..2.0),
            amp: rng.random_range(-0.5..0.5),
            freq: rng.random_range(0.3..1.5),
            phase: rng.random_range(0.0..core::f64::consts::TAU),
        }
    }

    fn at(&self, t: f64) -> f64 {
        self.base + self.amp * (self.freq * t + self.phase).sin()
    }

    fn deriv(&self, t: f64) -> f64 {
        self.amp * self.freq * (self.freq * t + self.phase).cos()
    }
}

// ---------------------------------------------------------------------------
// N = 2
// ---------------------------------------------------------------------------

/// Closed form, minimal-norm completion, and spectral counter-diabatic term
/// all agree on random smooth two-component fields.
#[test]
fn n2_three_routes_agree() {
    let basis = GeneratorBasis::gell_mann(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let w1 = Wave::random(&mut rng);
        let w2 = Wave::random(&mut rng);
        let t = rng.random_range(0.0..10.0);
        // paper-convention field (coefficients of sigma/2)
        let h = [w1.at(t), w2.at(t), 0.0];
        let dh = [w1.deriv(t), w2.deriv(t), 0.0];
        let closed = qb::solve_h1_n2(h, dh).unwrap();

        // orthonormal-basis coefficients are half the sigma/2-convention ones
        let h0 = CoeffVector::from_components(3, &[(1, h[0] / 2.0), (2, h[1] / 2.0)]);
        let dh0 = CoeffVector::from_components(3, &[(1, dh[0] / 2.0), (2, dh[1] / 2.0)]);
        let completion = qb::solve_completion(&h0, &dh0, &[1, 2], &basis).unwrap();

        let protocol = Protocol::new(basis.clone(), vec![1, 2], move |s| {
            CoeffVector::from_components(3, &[(1, w1.at(s) / 2.0), (2, w2.at(s) / 2.0)])
        })
        .unwrap()
        .with_derivative(move |s| {
            CoeffVector::from_components(3, &[(1, w1.deriv(s) / 2.0), (2, w2.deriv(s) / 2.0)])
        });
        let spectral_h1 = basis
            .to_coeffs(&driving::counter_diabatic(&protocol, t).unwrap())
            .unwrap();

        for a in 1..=3 {
            let c = 2.0 * completion.particular.component(a);
            let s = 2.0 * spectral_h1.component(a);
            worst = worst.max((closed[a - 1] - c).abs());
            worst = worst.max((closed[a - 1] - s).abs());
        }
    }
    assert!(worst < 1e-9, "max deviation {worst}");
}

// ---------------------------------------------------------------------------
// N = 3, two constrained components
// ---------------------------------------------------------------------------

#[test]
fn constraints_12_closed_form_and_nullspace() {
    let basis = GeneratorBasis::gell_mann(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let w1 = Wave::random(&mut rng);
        let w2 = Wave::random(&mut rng);
        let t = rng.random_range(0.0..8.0);
        let h0 = CoeffVector::from_components(8, &[(1, w1.at(t)), (2, w2.at(t))]);
        let dh0 = CoeffVector::from_components(8, &[(1, w1.deriv(t)), (2, w2.deriv(t))]);
        let sol = qb::solve_completion(&h0, &dh0, &[1, 2], &basis).unwrap();

        let n2 = h0.dot(&h0);
        let want3 = (w1.at(t) * w2.deriv(t) - w2.at(t) * w1.deriv(t)) / (SQRT6 * n2);
        assert!((sol.particular.component(3) - want3).abs() < 1e-12);
        for a in [4usize, 5, 6, 7, 8] {
            assert!(sol.particular.component(a).abs() < 1e-12, "component {a}");
        }
        // the undetermined direction is X_8 alone
        assert_eq!(sol.nullspace.len(), 1);
        assert!((sol.nullspace[0].component(8).abs() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn constraints_45_closed_form_and_commutant() {
    let basis = GeneratorBasis::gell_mann(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let f345 = basis.structure().get(3, 4, 5);
    let f458 = basis.structure().get(4, 5, 8);
    for _ in 0..20 {
        let w4 = Wave::random(&mut rng);
        let w5 = Wave::random(&mut rng);
        let t = rng.random_range(0.0..8.0);
        let h0 = CoeffVector::from_components(8, &[(4, w4.at(t)), (5, w5.at(t))]);
        let dh0 = CoeffVector::from_components(8, &[(4, w4.deriv(t)), (5, w5.deriv(t))]);
        let sol = qb::solve_completion(&h0, &dh0, &[4, 5], &basis).unwrap();

        // minimal-norm solution distributes the source over (X_3, X_8)
        // proportionally to (f_345, f_458)
        let wsrc = (w4.at(t) * w5.deriv(t) - w5.at(t) * w4.deriv(t)) / h0.dot(&h0);
        let denom = f345 * f345 + f458 * f458;
        assert!((sol.particular.component(3) - f345 * wsrc / denom).abs() < 1e-12);
        assert!((sol.particular.component(8) - f458 * wsrc / denom).abs() < 1e-12);
        // equivalently the two printed prefactors 1/(2 sqrt 6) and sqrt(3)/(2 sqrt 6)
        assert!((f345 / denom - 1.0 / (2.0 * SQRT6)).abs() < 1e-15);
        assert!((f458 / denom - 3.0f64.sqrt() / (2.0 * SQRT6)).abs() < 1e-15);

        // commutant freedom: sqrt(3) X_3 - X_8 direction
        assert_eq!(sol.nullspace.len(), 1);
        let null = &sol.nullspace[0];
        let c3 = null.component(3);
        let c8 = null.component(8);
        assert!((c3.abs() - 3.0f64.sqrt() / 2.0).abs() < 1e-12);
        assert!((c8.abs() - 0.5).abs() < 1e-12);
        assert!((c3 * c8) < 0.0, "opposite signs");
        let commutes = CMatrix::commutator(&basis.to_matrix(null), &basis.to_matrix(&h0));
        assert!(commutes.max_abs() < 1e-10);
    }
}

// ---------------------------------------------------------------------------
// N = 3, three constrained components
// ---------------------------------------------------------------------------

fn field_124(t: f64) -> CoeffVector {
    CoeffVector::from_components(
        8,
        &[
            (1, 1.3 + 0.4 * (0.9 * t).sin() + 0.2 * (1.7 * t).cos()),
            (2, 0.8 + 0.5 * (1.1 * t).cos()),
            (4, 1.1 + 0.3 * (1.3 * t + 0.5).sin()),
        ],
    )
}

fn dfield_124(t: f64) -> CoeffVector {
    CoeffVector::from_components(
        8,
        &[
            (1, 0.4 * 0.9 * (0.9 * t).cos() - 0.2 * 1.7 * (1.7 * t).sin()),
            (2, -0.5 * 1.1 * (1.1 * t).sin()),
            (4, 0.3 * 1.3 * (1.3 * t + 0.5).cos()),
        ],
    )
}

/// The four explicit completion components for constraints {1, 2, 4}.
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

#[test]
fn constraints_124_match_printed_formulas_modulo_nullspace() {
    let basis = GeneratorBasis::gell_mann(3).unwrap();
    for &t in &[0.3, 2.2, 5.9, 11.4] {
        let h0 = field_124(t);
        let dh0 = dfield_124(t);
        let sol = qb::solve_completion(&h0, &dh0, &[1, 2, 4], &basis).unwrap();
        assert!(sol.residual < 1e-12, "solve residual {}", sol.residual);
        assert_eq!(sol.nullspace.len(), 1, "one undetermined direction");

        let printed = printed_completion_124(&h0, &dh0);
        // the printed solution solves the same equation ...
        let lhs = basis.cross(&printed, &h0).unwrap();
        let nrm = h0.vec_norm();
        let rhs = dh0.sub(&h0.scaled(h0.dot(&dh0) / (nrm * nrm)));
        assert!(lhs.sub(&rhs).vec_norm() < 1e-9, "printed formulas solve the equation");

        // ... and differs from the minimal-norm one only along the nullspace
        let mut diff = printed.sub(&sol.particular);
        for null in &sol.nullspace {
            diff = diff.sub(&null.scaled(diff.dot(null)));
        }
        assert!(diff.vec_norm() < 1e-9, "t={t}: residual {}", diff.vec_norm());
    }
}

fn field_345(t: f64) -> CoeffVector {
    CoeffVector::from_components(
        8,
        &[
            (3, 0.9 + 0.2 * (0.7 * t).sin()),
            (4, 1.2 + 0.4 * (1.3 * t).cos()),
            (5, 0.7 + 0.3 * (1.9 * t + 1.0).sin()),
        ],
    )
}

fn dfield_345(t: f64) -> CoeffVector {
    CoeffVector::from_components(
        8,
        &[
            (3, 0.2 * 0.7 * (0.7 * t).cos()),
            (4, -0.4 * 1.3 * (1.3 * t).sin()),
            (5, 0.3 * 1.9 * (1.9 * t + 1.0).cos()),
        ],
    )
}

#[test]
fn constraints_345_completion_fails() {
    let basis = GeneratorBasis::gell_mann(3).unwrap();
    let t = 1.0;
    match qb::solve_completion(&field_345(t), &dfield_345(t), &[3, 4, 5], &basis) {
        Err(QbError::NoCompletion { residual }) => {
            assert!(residual > 0.1, "residual should be O(1), got {residual}")
        }
        other => panic!("expected NoCompletion, got {other:?}"),
    }
}

/// Printed closed form for the one nonzero completion component in the
/// {3, 4, 5} trajectory case.
fn h8_closed_form(t: f64, theta: f64, basis: &GeneratorBasis) -> f64 {
    let h = field_345(t);
    let dh = dfield_345(t);
    let f345 = basis.structure().get(3, 4, 5);
    let f458 = basis.structure().get(4, 5, 8);
    let rho2 = h.component(4).powi(2) + h.component(5).powi(2);
    (f345 / f458)
        * ((1.0 / f345) * (h.component(4) * dh.component(5) - h.component(5) * dh.component(4))
            / rho2
            - h.component(3)
            + rho2.sqrt() * theta.tan())
}

#[test]
fn constraints_345_trajectory_reproduces_closed_form() {
    let basis = GeneratorBasis::gell_mann(3).unwrap();
    let protocol = Protocol::new(basis.clone(), vec![3, 4, 5], field_345)
        .unwrap()
        .with_derivative(dfield_345);
    let theta = 0.4f64;
    let h0 = field_345(0.0);
    let rho = (h0.component(4).powi(2) + h0.component(5).powi(2)).sqrt();
    let l0 = CoeffVector::from_components(
        8,
        &[
            (3, theta.sin()),
            (4, h0.component(4) / rho * theta.cos()),
            (5, h0.component(5) / rho * theta.cos()),
        ],
    );
    let grid = Grid::span(0.0, 4.0, 8000);
    let traj = qb::solve_trajectory(&protocol, &l0, &grid, None).unwrap();

    assert!(traj.max_offc_residual < 1e-9);
    assert!(traj.free_params.is_empty(), "system is uniquely determined");
    let mut worst_h8 = 0.0f64;
    for k in 0..grid.len() {
        let t = grid.time(k);
        let h1 = &traj.h1_path[k];
        worst_h8 = worst_h8.max((h1.component(8) - h8_closed_form(t, theta, &basis)).abs());
        for a in [1usize, 2, 6, 7] {
            assert!(h1.component(a).abs() < 1e-10, "t={t} component {a}");
        }
        assert!((traj.l_path[k].vec_norm() - 1.0).abs() < 1e-9);
    }
    assert!(worst_h8 < 1e-8, "h8 deviation {worst_h8}");

    // l satisfies its equation of motion (finite-difference check)
    let dt = grid.step();
    for k in 1..grid.len() - 1 {
        let ldot_fd = traj.l_path[k + 1].sub(&traj.l_path[k - 1]).scaled(0.5 / dt);
        let h_full = field_345(grid.time(k)).add(&traj.h1_path[k]);
        let ldot = basis.cross(&h_full, &traj.l_path[k]).unwrap();
        assert!(ldot_fd.sub(&ldot).vec_norm() < 1e-5, "k={k}");
    }

    // the spectrum of F(t) = l(t) . X is conserved along the trajectory
    let spec0 = spectral::eigh(&basis.to_matrix(&traj.l_path[0]))
        .unwrap()
        .values()
        .to_vec();
    for k in (0..grid.len()).step_by(200) {
        let spec = spectral::eigh(&basis.to_matrix(&traj.l_path[k])).unwrap();
        for (a, b) in spec.values().iter().zip(spec0.iter()) {
            assert!((a - b).abs() < 1e-8, "k={k}");
        }
    }
}

#[test]
fn trajectory_equals_completion_when_invariant_is_parallel() {
    let basis = GeneratorBasis::gell_mann(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let w1 = Wave::random(&mut rng);
    let w2 = Wave::random(&mut rng);
    let h0_fn = move |t: f64| CoeffVector::from_components(8, &[(1, w1.at(t)), (2, w2.at(t))]);
    let dh0_fn = move |t: f64| {
        CoeffVector::from_components(8, &[(1, w1.deriv(t)), (2, w2.deriv(t))])
    };
    let protocol = Protocol::new(basis.clone(), vec![1, 2], h0_fn)
        .unwrap()
        .with_derivative(dh0_fn);
    let h00 = h0_fn_start(&protocol);
    let l0 = h00.scaled(1.0 / h00.vec_norm());
    let grid = Grid::span(0.0, 3.0, 1500);
    let traj = qb::solve_trajectory(&protocol, &l0, &grid, None).unwrap();
    for k in (0..grid.len()).step_by(100) {
        let t = grid.time(k);
        let h0 = protocol.h0_at(t);
        let dh0 = protocol.dh0_at(t);
        let completion = qb::solve_completion(&h0, &dh0, &[1, 2], &basis).unwrap();
        let diff = traj.h1_path[k].sub(&completion.particular).vec_norm();
        assert!(diff < 1e-8, "k={k}: {diff}");
        // l stays parallel to the field
        let unit = h0.scaled(1.0 / h0.vec_norm());
        assert!(traj.l_path[k].sub(&unit).vec_norm() < 1e-7, "k={k}");
    }
}

fn h0_fn_start(p: &Protocol) -> CoeffVector {
    p.h0_at(0.0)
}

/// The same equivalence for a four-component constraint set whose internal
/// structure constants vanish (the rotating-field benchmark).
#[test]
fn trajectory_matches_spectral_route_for_closed_constraint_set() {
    let omega = std::f64::consts::PI / 20.0;
    let protocol = spin1::rotating_protocol(1.0, omega);
    let basis = protocol.basis().clone();
    // no internal structure constants on {1, 2, 6, 7}
    for &a in protocol.constraint() {
        for &b in protocol.constraint() {
            for &c in protocol.constraint() {
                assert!(basis.structure().get(a, b, c).abs() < 1e-14);
            }
        }
    }
    let h00 = protocol.h0_at(0.0);
    let l0 = h00.scaled(1.0 / h00.vec_norm());
    let grid = Grid::span(0.0, 10.0, 2000);
    let traj = qb::solve_trajectory(&protocol, &l0, &grid, None).unwrap();
    for k in (0..grid.len()).step_by(100) {
        let t = grid.time(k);
        let cd = basis
            .to_coeffs(&driving::counter_diabatic(&protocol, t).unwrap())
            .unwrap();
        // the spectral counter term restricted to the complement
        let cd_complement = cd.restricted(protocol.complement());
        assert!(traj.h1_path[k].sub(&cd_complement).vec_norm() < 1e-8, "k={k}");
    }
}

#[test]
fn initial_condition_check_accepts_projector_direction() {
    let basis = GeneratorBasis::gell_mann(3).unwrap();
    let protocol = Protocol::new(basis.clone(), (1..=8).collect(), |_| {
        CoeffVector::from_components(8, &[(1, 0.4), (3, 1.0)])
    })
    .unwrap();
    // l0 = projector direction of psi0 makes F(0) proportional to P(0)
    let psi = qbdrive_core::matrix::StateVector::basis_state(3, 0);
    let e0 = basis.projector_coeffs(&psi).unwrap();
    let grid = Grid::span(0.0, 0.1, 4);
    let ok = qb::solve_trajectory(&protocol, &e0, &grid, Some(&psi));
    assert!(ok.is_ok(), "{ok:?}");

    // X_6 lives entirely in the complement subspace of |0><0|, so the
    // projector condition fails for l0 along it
    let l0 = CoeffVector::unit(8, 6);
    match qb::solve_trajectory(&protocol, &l0, &grid, Some(&psi)) {
        Err(QbError::InitialConditionViolated { residual }) => assert!(residual > 1e-3),
        other => panic!("expected InitialConditionViolated, got {other:?}"),
    }
}

// ---------------------------------------------------------------------------
// commutation condition
// ---------------------------------------------------------------------------

#[test]
fn commutation_condition_45_mix() {
    let basis = GeneratorBasis::gell_mann(3).unwrap();
    let (a, b) = (0.8, -0.3);
    let h = CoeffVector::from_components(8, &[(4, a), (5, b)]);

    // hand contraction of the table: (h x l)_4 = (f_345 l3 + f_458 l8) h5,
    // (h x l)_5 = -(f_345 l3 + f_458 l8) h4
    let generic = CoeffVector::from_components(8, &[(3, 0.6), (8, 0.2)]);
    let check = qb::commutation_condition(&h, &generic, &basis).unwrap();
    let s = 0.5 * SQRT6 * 0.6 + (3.0f64.sqrt() / 2.0) * SQRT6 * 0.2;
    let expected = (s * s * (a * a + b * b)).sqrt();
    assert!(!check.holds);
    assert!((check.residual - expected).abs() < 1e-12);

    // the combination sqrt(3) X_3 - X_8 commutes with anything on {4, 5}
    let commutant = CoeffVector::from_components(8, &[(3, 3.0f64.sqrt()), (8, -1.0)]);
    let check = qb::commutation_condition(&h, &commutant, &basis).unwrap();
    assert!(check.holds, "residual {}", check.residual);
}

// ---------------------------------------------------------------------------
// passage time
// ---------------------------------------------------------------------------

#[test]
fn passage_time_equals_elapsed_time_on_shell() {
    let omega = std::f64::consts::PI / 20.0;
    let protocol = spin1::rotating_protocol_with_cd(1.0, omega);
    let period = 2.0 * std::f64::consts::PI / omega;
    let grid = Grid::span(0.0, period, 8000);
    let record =
        dynamics::propagate(|t| protocol.h_matrix(t), &spin1::initial_state(), &grid).unwrap();
    let lt = qb::passage_time(&record, |t| protocol.h_matrix(t)).unwrap();
    assert!(
        (lt - period).abs() < 1e-4 * period,
        "L_T = {lt}, period = {period}"
    );
}
