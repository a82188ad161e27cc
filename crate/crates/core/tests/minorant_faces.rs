//! Block forms, minorants and faces on randomly generated maps.

use posmap::blockform::{self, check_component_inequalities, decompose_at, default_directions, default_probes, orthocomplement_basis, recompose};
use posmap::faces::{self, in_f, in_g};
use posmap::linalg::{self, outer, ComplexMatrix, Ket, ToleranceConfig, C64};
use posmap::mapcore::{self, choi_example, from_cokraus, from_kraus, scale_add, LinearMap};
use posmap::minorant::{self, domination_margin, DominationMethod, FalsifierVerdict, MinorantKind, MinorantSeed, SearchBudget};
use posmap::random::{self, SeededRng};
use proptest::prelude::*;
use rand::Rng;

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

/// Sum of Kraus terms `B` adjusted so that `B xi` is a multiple of `x`,
/// which puts the map in `G_{xi,x}`.
fn cp_in_face(r: &mut SeededRng, k: usize, h: usize, terms: usize) -> (LinearMap, MinorantSeed) {
    let xi = random::unit_ket(r, k);
    let x = random::unit_ket(r, h);
    let mut phi = mapcore::zero_map(k, h);
    for _ in 0..terms {
        let mut b = random::gaussian_matrix(r, h, k);
        let c = random::complex_gaussian(r);
        let fix = x.scale(c).axpy(C64::new(-1.0, 0.0), &b.mul_ket(&xi));
        b = &b + &outer(&fix, &xi);
        phi = scale_add(1.0, &phi, 1.0, &from_kraus(&b)).unwrap();
    }
    let lambda = phi.apply_outer(&xi, &xi).sandwich(&x, &x).re;
    (phi, MinorantSeed { xi, x, lambda })
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn block_form_round_trip(seed in any::<u64>(), h in 1usize..6) {
        let mut r = random::rng_from_seed(seed);
        let y = random::gaussian_matrix(&mut r, h, h);
        let x = random::unit_ket(&mut r, h);
        let f = decompose_at(&y, &x, &tol()).unwrap();
        prop_assert!(recompose(&f, &x).unwrap().max_diff(&y) <= 1e-12 * y.max_abs().max(1.0));
        let basis = orthocomplement_basis(&x);
        for (i, b) in basis.iter().enumerate() {
            prop_assert!(b.dot(&x).norm() <= 1e-12);
            for c in &basis[i + 1..] {
                prop_assert!(b.dot(c).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn components_of_face_members_satisfy_inequalities(seed in any::<u64>(), k in 2usize..4, h in 2usize..4) {
        let mut r = random::rng_from_seed(seed);
        let t = tol();
        let (phi, s) = cp_in_face(&mut r, k, h, 2);
        let probes = default_probes(h - 1, 20, seed);
        let dirs = default_directions(h - 1, 20, seed);
        for _ in 0..4 {
            let eta = random::gaussian_ket(&mut r, k);
            let c = blockform::extract_components(&phi, &s.xi, &s.x, &eta, &t).unwrap();
            let rep = check_component_inequalities(&c, s.lambda, &t, &probes, &dirs);
            prop_assert!(rep.passed(), "{:?}", rep.violations);
            prop_assert_eq!(rep.checked, 1 + 20 + 40);
            prop_assert_eq!(blockform::check_wu(&c, s.lambda, &t).0, true);
        }
    }

    #[test]
    fn components_require_face_membership(seed in any::<u64>()) {
        let mut r = random::rng_from_seed(seed);
        let phi = from_kraus(&random::gaussian_matrix(&mut r, 3, 3));
        let xi = random::unit_ket(&mut r, 3);
        let x = random::unit_ket(&mut r, 3);
        let res = blockform::extract_components(&phi, &xi, &x, &xi, &tol());
        prop_assert!(matches!(res, Err(posmap::Error::NotInFace(_))));
    }

    #[test]
    fn single_kraus_maps_are_their_own_minorant(seed in any::<u64>(), k in 1usize..4, h in 1usize..4) {
        let mut r = random::rng_from_seed(seed);
        let t = tol();
        let b = random::gaussian_matrix(&mut r, h, k);
        let phi = from_kraus(&b);
        // Every seed gives the same psi: the minorant does not depend on it.
        for s in minorant::basis_seeds(&phi, &t).unwrap() {
            let psi = minorant::build_psi(&phi, &s, &t).unwrap();
            prop_assert!(psi.max_diff(&phi) <= 1e-9 * phi.norm().max(1.0));
        }
        let co = from_cokraus(&b);
        for s in minorant::basis_seeds(&co, &t).unwrap() {
            let chi = minorant::build_chi(&co, &s, &t).unwrap();
            prop_assert!(chi.max_diff(&co) <= 1e-9 * co.norm().max(1.0));
        }
    }

    #[test]
    fn reported_domination_is_sound(seed in any::<u64>(), k in 2usize..4, h in 2usize..4) {
        let mut r = random::rng_from_seed(seed);
        let t = tol();
        let (phi, s) = cp_in_face(&mut r, k, h, 2);
        let budget = SearchBudget { restarts: 10, samples: 50, seed };
        for kind in [MinorantKind::Psi, MinorantKind::Chi] {
            let rho = minorant::build_minorant(&phi, &s, kind, &t).unwrap();
            let rep = minorant::dominates(&phi, &rho, &DominationMethod::MapDifferenceSeesaw, &t, &budget).unwrap();
            if rep.holds {
                for _ in 0..50 {
                    let eta = random::unit_ket(&mut r, k);
                    let y = random::unit_ket(&mut r, h);
                    prop_assert!(domination_margin(&phi, &rho, &eta, &y) >= -1e-8 * phi.norm().max(1.0));
                }
            } else {
                let (eta, y) = rep.witness.unwrap();
                prop_assert!(domination_margin(&phi, &rho, &eta, &y) < 0.0);
            }
        }
    }

    #[test]
    fn falsifier_spares_single_generator_maps(seed in any::<u64>(), k in 2usize..4, h in 2usize..4) {
        let mut r = random::rng_from_seed(seed);
        let budget = SearchBudget { restarts: 5, samples: 50, seed };
        let b = random::gaussian_matrix(&mut r, h, k);
        for phi in [from_kraus(&b), from_cokraus(&b)] {
            prop_assert_eq!(minorant::extremality_falsifier(&phi, &tol(), &budget).unwrap(), FalsifierVerdict::NotFalsified);
        }
    }

    #[test]
    fn faces_are_convex_cones(seed in any::<u64>(), k in 2usize..4, h in 2usize..4) {
        let mut r = random::rng_from_seed(seed);
        let t = tol();
        let xi = random::unit_ket(&mut r, k);
        let x = random::unit_ket(&mut r, h);
        let y = orthocomplement_basis(&x)[0].clone();
        let mut members = Vec::new();
        for _ in 0..2 {
            // B xi parallel to x, so phi(xi xi*) y = 0.
            let mut b = random::gaussian_matrix(&mut r, h, k);
            let fix = x.scale(random::complex_gaussian(&mut r)).axpy(C64::new(-1.0, 0.0), &b.mul_ket(&xi));
            b = &b + &outer(&fix, &xi);
            members.push(from_kraus(&b));
        }
        for phi in &members {
            prop_assert!(in_g(phi, &xi, &x, &t).unwrap().0);
            prop_assert!(in_f(phi, &xi, &y, &t).unwrap());
        }
        let (a, c) = (r.random_range(0.1..3.0), r.random_range(0.1..3.0));
        let mix = scale_add(a, &members[0], c, &members[1]).unwrap();
        prop_assert!(in_g(&mix, &xi, &x, &t).unwrap().0);
        prop_assert!(in_f(&mix, &xi, &y, &t).unwrap());
    }

    #[test]
    fn g_face_is_intersection_of_f_faces(seed in any::<u64>(), k in 2usize..4, h in 2usize..4) {
        let mut r = random::rng_from_seed(seed);
        let t = tol();
        let (phi, s) = cp_in_face(&mut r, k, h, 2);
        let perp = orthocomplement_basis(&s.x);
        prop_assert!(perp.iter().all(|y| in_f(&phi, &s.xi, y, &t).unwrap()));
        // A generic CP map lies in none of these faces.
        let generic = from_kraus(&random::gaussian_matrix(&mut r, h, k));
        prop_assert!(!in_g(&generic, &s.xi, &s.x, &t).unwrap().0);
        prop_assert!(!perp.iter().all(|y| in_f(&generic, &s.xi, y, &t).unwrap()));
    }

    #[test]
    fn g_and_f_meet_where_the_projection_is_killed(seed in any::<u64>(), k in 2usize..4, h in 2usize..4) {
        let mut r = random::rng_from_seed(seed);
        let t = tol();
        let (phi, s) = cp_in_face(&mut r, k, h, 1);
        prop_assert!(s.lambda > 0.0);
        prop_assert!(!in_f(&phi, &s.xi, &s.x, &t).unwrap());
        // Kill xi: B xi = 0 puts the map in G_{xi,x} and F_{xi,x} at once.
        let mut b = random::gaussian_matrix(&mut r, h, k);
        let bxi = b.mul_ket(&s.xi);
        b = &b - &outer(&bxi, &s.xi);
        let killed = from_kraus(&b);
        prop_assert!(killed.apply_outer(&s.xi, &s.xi).max_abs() <= 1e-12);
        prop_assert!(in_g(&killed, &s.xi, &s.x, &t).unwrap().0);
        prop_assert!(in_f(&killed, &s.xi, &s.x, &t).unwrap());
    }
}

#[test]
fn example_map_phase_family_has_rank_two_images() {
    let t = tol();
    let phi = choi_example();
    let mut r = random::rng_from_seed(5);
    for _ in 0..200 {
        let xi = Ket::new((0..3).map(|_| C64::from_polar(1.0 / 3f64.sqrt(), r.random_range(0.0..std::f64::consts::TAU))).collect()).unwrap();
        let img = phi.apply_outer(&xi, &xi);
        let want = &ComplexMatrix::identity(3) - &outer(&xi, &xi);
        assert!(img.max_diff(&want) <= 1e-12);
        assert_eq!(linalg::numerical_rank(&img, &t), 2);
    }
    for e in faces::choi_exceptional_projections(&t) {
        assert_eq!(e.rank, 2);
        assert!(e.value.max_diff(&phi.apply(&e.projection).unwrap()) <= 1e-14);
    }
}

#[test]
fn example_map_is_in_no_g_face() {
    let rep = faces::find_g_membership(&choi_example(), &tol(), 50, 3).unwrap();
    assert!(rep.found.is_none());
    assert!(rep.best_second_eigenvalue > 0.3);
}
