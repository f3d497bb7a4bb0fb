use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use proptest::prelude::*;

use nonconical::hyperbolic::{
    boundary_gromov_product, cosh_distance, gromov_product, hyp_distance, visual_angle, BoundaryPoint, Circle, Extended, HPoint,
};
use nonconical::limit::{limit_point, PathKind, WordPath};
use nonconical::scalar::{Ball, Exact};
use nonconical::schottky::{beardon_check, word_disk, GeneratorSchedule, ReducedWord};

const BITS: usize = 256;

fn rational(range: i64) -> impl Strategy<Value = BigRational> {
    (-range..=range, 1i64..=997).prop_map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
}

fn positive(range: i64) -> impl Strategy<Value = BigRational> {
    (1..=range, 1i64..=997).prop_map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
}

fn circle() -> impl Strategy<Value = (BigRational, BigRational)> {
    (rational(50_000), positive(5_000))
}

fn boundary() -> impl Strategy<Value = BoundaryPoint<Exact>> {
    prop_oneof![9 => rational(50_000).prop_map(BoundaryPoint::Finite), 1 => Just(BoundaryPoint::Infinity)]
}

fn point() -> impl Strategy<Value = HPoint<Exact>> {
    (rational(50_000), positive(50_000)).prop_map(|(x, y)| HPoint::new(x, y).unwrap())
}

fn same_boundary(a: &BoundaryPoint<Exact>, b: &BoundaryPoint<Exact>) -> bool {
    match (a, b) {
        (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => true,
        (BoundaryPoint::Finite(x), BoundaryPoint::Finite(y)) => x == y,
        _ => false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn inversion_is_an_involution((c, r) in circle(), x in boundary(), z in point()) {
        let circ = Circle::<Exact>::new(c, r).unwrap();
        prop_assert!(same_boundary(&circ.invert_boundary(&circ.invert_boundary(&x)), &x));
        let back = circ.invert_point(&circ.invert_point(&z));
        prop_assert_eq!(back.x(), z.x());
        prop_assert_eq!(back.y(), z.y());
    }

    #[test]
    fn inversion_preserves_distance((c, r) in circle(), p in point(), q in point()) {
        let circ = Circle::<Exact>::new(c, r).unwrap();
        prop_assert_eq!(cosh_distance(&circ.invert_point(&p), &circ.invert_point(&q)), cosh_distance(&p, &q));
    }

    #[test]
    fn balls_enclose_exact_values((c, r) in circle(), z in point(), q in point()) {
        let exact = Circle::<Exact>::new(c.clone(), r.clone()).unwrap();
        let ball = Circle::<Ball>::from_rationals(&c, &r, BITS).unwrap();
        let ze = exact.invert_point(&z);
        let zb = ball.invert_point(&z.to_ball(BITS));
        prop_assert!(zb.x().contains(ze.x()) && zb.y().contains(ze.y()));
        let ce = cosh_distance(&ze, &q);
        prop_assert!(cosh_distance(&zb, &q.to_ball(BITS)).contains(&ce));
    }

    #[test]
    fn gromov_product_bounds(x in point(), y in point(), w in point()) {
        let g = gromov_product(&x, &y, &w).to_f64();
        let dx = hyp_distance(&x, &w).to_f64();
        let dy = hyp_distance(&y, &w).to_f64();
        prop_assert!(g >= -1e-12);
        prop_assert!(g <= dx.min(dy) + 1e-12);
    }

    #[test]
    fn boundary_product_matches_visual_angle(a in boundary(), b in boundary(), o in point()) {
        prop_assume!(!same_boundary(&a, &b));
        let Extended::Finite(g) = boundary_gromov_product(&a, &b, &o).unwrap() else {
            return Err(TestCaseError::fail("finite product expected"));
        };
        let theta = visual_angle(&a, &b, &o);
        let half = Ball::from_rational(&BigRational::new(1.into(), 2.into()), BITS);
        let lhs = (-g).exp().to_f64();
        let rhs = (theta * half).sin().to_f64();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1e-300) + 1e-300);
    }

    #[test]
    fn radius_recursion_holds_for_random_words(letters in proptest::collection::vec(1usize..=6, 2..6)) {
        prop_assume!(letters.windows(2).all(|w| w[0] != w[1]));
        let s = GeneratorSchedule::standard(6);
        let report = beardon_check(&s, &ReducedWord::new(letters).unwrap()).unwrap();
        prop_assert!(report.holds && report.mu_holds);
    }

    #[test]
    fn word_disks_nest(letters in proptest::collection::vec(1usize..=5, 2..6)) {
        prop_assume!(letters.windows(2).all(|w| w[0] != w[1]));
        let s = GeneratorSchedule::standard(5);
        let w = ReducedWord::new(letters).unwrap();
        let inner = word_disk::<Exact>(&s, &w, BITS).unwrap();
        let outer = word_disk::<Exact>(&s, &w.prefix().unwrap(), BITS).unwrap();
        prop_assert_eq!(outer.strictly_contains(&inner), Some(true));
    }
}

#[test]
fn limit_point_estimates_form_a_cauchy_sequence() {
    let s = GeneratorSchedule::standard(12);
    for path in [
        WordPath::new(vec![2, 1], PathKind::Periodic).unwrap(),
        WordPath::new(vec![1, 3, 2], PathKind::Periodic).unwrap(),
        WordPath::new(vec![1], PathKind::Escalating).unwrap(),
    ] {
        let est: Vec<_> = (1..=8).map(|n| limit_point::<Exact>(&s, &path, n, BITS).unwrap()).collect();
        let last = est.last().unwrap();
        for e in &est {
            let gap = Signed::abs(&(&e.center - &last.center));
            assert!(gap + &last.radius <= e.radius, "final disk leaves a prefix disk");
        }
    }
}
