mod common;

use common::*;
use dynspec_core::lattice::local::{hilbert, legendre, relevant_places, Place};
use dynspec_core::linalg::ZMatrix;
use dynspec_core::{Error, GlueMap, Lattice};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn zm(m: &Mat) -> ZMatrix {
    ZMatrix::from_rows(m.clone()).unwrap()
}

fn rows(m: &ZMatrix) -> Mat {
    m.to_rows()
}

fn arb_matrix(n: usize) -> impl Strategy<Value = Mat> {
    prop::collection::vec(prop::collection::vec(-6i64..=6, n), n).prop_map(|r| {
        r.into_iter()
            .map(|row| row.into_iter().map(BigInt::from).collect())
            .collect()
    })
}

fn arb_symmetric(n: usize) -> impl Strategy<Value = Mat> {
    arb_matrix(n).prop_map(move |m| {
        let mut s = m.clone();
        for i in 0..n {
            for j in 0..n {
                s[i][j] = if i <= j { m[i][j].clone() } else { m[j][i].clone() };
            }
            s[i][i] = &s[i][i] * 2;
        }
        s
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn snf_matches_determinantal_divisors(m in (2usize..5).prop_flat_map(arb_matrix)) {
        let snf = zm(&m).snf();
        let expected = invariant_factors(&m);
        let got: Vec<BigInt> = snf.diag.iter().map(|d| d.abs()).collect();
        prop_assert_eq!(&got, &expected.iter().map(|d| d.abs()).collect::<Vec<_>>());
        // divisibility chain
        for w in got.windows(2) {
            prop_assert!(w[1].is_zero() || (!w[0].is_zero() && (&w[1] % &w[0]).is_zero()));
        }
        // u a v = diag, with u, v unimodular
        let prod = &(&snf.u * &zm(&m)) * &snf.v;
        for i in 0..m.len() {
            for j in 0..m.len() {
                let want = if i == j { snf.diag[i].clone() } else { BigInt::zero() };
                prop_assert_eq!(&prod[(i, j)], &want);
            }
        }
        prop_assert!(det(&rows(&snf.u)).abs().is_one());
        prop_assert!(det(&rows(&snf.v)).abs().is_one());
    }

    #[test]
    fn det_matches_bareiss(m in (1usize..6).prop_flat_map(arb_matrix)) {
        prop_assert_eq!(zm(&m).det(), det(&m));
    }

    #[test]
    fn hnf_is_row_equivalent(m in (2usize..5).prop_flat_map(arb_matrix)) {
        let h = zm(&m).hnf_with_transform();
        prop_assert_eq!(&(&h.u * &zm(&m)), &h.h);
        prop_assert!(det(&rows(&h.u)).abs().is_one());
        prop_assert_eq!(h.rank, zm(&m).to_rational().rank());
    }

    #[test]
    fn discriminant_group_matches_oracle(g in (2usize..5).prop_flat_map(arb_symmetric)) {
        prop_assume!(!det(&g).is_zero());
        let l = Lattice::new(zm(&g)).unwrap();
        let form = l.discriminant_form().unwrap();
        let mut got: Vec<BigInt> = form.orders().to_vec();
        got.sort();
        let mut want = discriminant_group(&g);
        want.sort();
        prop_assert_eq!(got, want);
        prop_assert_eq!(form.order(), det(&g).abs());
    }
}

#[test]
fn named_lattices_are_even_and_have_expected_determinants() {
    for (name, rank, d, sig) in [
        ("U", 2, -1, (1, 1)),
        ("E8", 8, 1, (0, 8)),
        ("E7", 7, -2, (0, 7)),
        ("E6", 6, 3, (0, 6)),
        ("A2", 2, 3, (0, 2)),
        ("A5", 5, -6, (0, 5)),
        ("D4", 4, 4, (0, 4)),
        ("D6", 6, 4, (0, 6)),
        ("3U", 6, -1, (3, 3)),
        ("U+E8", 10, -1, (1, 9)),
        ("3U+2E8", 22, -1, (3, 19)),
        ("A2(-1)", 2, 3, (2, 0)),
        ("U(7)", 2, -49, (1, 1)),
    ] {
        let l = Lattice::named(name).unwrap();
        let g = rows(l.gram());
        assert_eq!(l.rank(), rank, "{name}");
        assert_eq!(det(&g), BigInt::from(d), "{name}");
        assert!(is_even(&g), "{name}");
        assert_eq!(l.signature(), sig, "{name}");
    }
    assert!(Lattice::named("E9").is_err());
}

#[test]
fn root_counts() {
    for (name, count) in [("E8", 240), ("E7", 126), ("E6", 72), ("D4", 24), ("A2", 6), ("A4", 20)] {
        let l = Lattice::named(name).unwrap();
        let roots = l.roots().unwrap();
        assert_eq!(roots.len(), count, "{name}");
        for r in &roots {
            assert_eq!(bilinear(&rows(l.gram()), r, r), BigInt::from(-2));
        }
    }
    assert!(matches!(Lattice::named("U").unwrap().roots(), Err(Error::Indefinite)));
}

#[test]
fn glue_rank_one_lattices_gives_u() {
    let m = Lattice::from_i64(&[&[-2]]).unwrap();
    let n = Lattice::from_i64(&[&[2]]).unwrap();
    let phi = GlueMap::find(&m.discriminant_form().unwrap(), &n.discriminant_form().unwrap())
        .unwrap()
        .expect("anti-isometric");
    let l = Lattice::glue(&m, &n, &phi).unwrap();
    let g = rows(l.gram());
    assert_eq!(l.rank(), 2);
    assert_eq!(det(&g), BigInt::from(-1));
    assert!(is_even(&g));
    // no anti-isometry between <-2> and <-2>: q values 3/2 and 3/2
    let m2 = Lattice::from_i64(&[&[-2]]).unwrap();
    assert!(
        GlueMap::find(&m.discriminant_form().unwrap(), &m2.discriminant_form().unwrap())
            .unwrap()
            .is_none()
    );
}

#[test]
fn glue_e6_with_a2() {
    let e6 = Lattice::named("E6").unwrap();
    let a2 = Lattice::named("A2").unwrap();
    let phi = GlueMap::find(&e6.discriminant_form().unwrap(), &a2.discriminant_form().unwrap())
        .unwrap()
        .unwrap();
    let l = Lattice::glue(&e6, &a2, &phi).unwrap();
    assert!(l.is_even() && l.is_unimodular());
    assert_eq!(l.signature(), (0, 8));
    assert_eq!(l.roots().unwrap().len(), 240);
    // E6 and the positive A2 have equal, not opposite, forms
    let a2p = Lattice::named("A2(-1)").unwrap();
    assert!(
        GlueMap::find(&e6.discriminant_form().unwrap(), &a2p.discriminant_form().unwrap())
            .unwrap()
            .is_none()
    );
}

#[test]
fn overlattice_isotropy() {
    let l = Lattice::diagonal(&[2, 2]).unwrap();
    let h = dynspec_core::linalg::QMatrix::from_rows(vec![vec![
        BigRational::new(1.into(), 2.into()),
        BigRational::new(1.into(), 2.into()),
    ]])
    .unwrap();
    assert!(matches!(
        l.overlattice_from_isotropic(&h),
        Err(Error::NotIsotropic(_)) | Err(Error::NotEven)
    ));
    // diag(-2,-2,-2,-2) glued along (1/2,1/2,1/2,1/2) is D4
    let l = Lattice::diagonal(&[-2, -2, -2, -2]).unwrap();
    let half = BigRational::new(1.into(), 2.into());
    let h = dynspec_core::linalg::QMatrix::from_rows(vec![vec![half.clone(); 4]]).unwrap();
    let ov = l.overlattice_from_isotropic(&h).unwrap();
    assert_eq!(det(&rows(ov.lattice.gram())), BigInt::from(4));
    assert_eq!(ov.lattice.roots().unwrap().len(), 24);
    // not in the dual
    let third = BigRational::new(1.into(), 3.into());
    let h = dynspec_core::linalg::QMatrix::from_rows(vec![vec![third; 4]]).unwrap();
    assert!(matches!(l.overlattice_from_isotropic(&h), Err(Error::NotInDual)));
}

fn complement_cases() -> Vec<(&'static str, Vec<Vec<i64>>)> {
    let z = |v: &[i64], n: usize| {
        let mut r = v.to_vec();
        r.resize(n, 0);
        r
    };
    vec![
        ("3U", vec![z(&[1, 1], 6)]),
        ("3U", vec![z(&[1, -3], 6)]),
        ("3U", vec![z(&[1, 1], 6), z(&[0, 0, 1, 2], 6)]),
        ("3U", vec![z(&[1, 2, 1, -1, 0, 0], 6), z(&[0, 0, 0, 0, 1, 1], 6)]),
        ("U+E8", vec![z(&[1, 2], 10)]),
        ("U+E8", vec![z(&[0, 0, 1], 10)]),
        ("U+E8", vec![z(&[0, 0, 1], 10), z(&[0, 0, 0, 1], 10)]),
        ("U+E8", vec![z(&[1, 2, 1], 10), z(&[0, 0, 0, 0, 1], 10)]),
    ]
}

#[test]
fn complement_forms_are_negatives() {
    let mut checked = 0;
    for (amb, basis) in complement_cases() {
        let l = Lattice::named(amb).unwrap();
        let b: Mat = basis.iter().map(|r| r.iter().map(|&x| big(x)).collect()).collect();
        let m = l.sublattice(&zm(&b)).unwrap_or_else(|e| panic!("{amb} {basis:?}: {e}"));
        let c = l.orthogonal_complement(&zm(&b)).unwrap();
        let (gm, gc) = (rows(m.gram()), rows(c.lattice.gram()));
        assert_eq!(det(&gm).abs(), det(&gc).abs(), "{amb} {basis:?}");
        let mut om = discriminant_group(&gm);
        let mut oc = discriminant_group(&gc);
        om.sort();
        oc.sort();
        assert_eq!(om, oc);
        // complement basis is orthogonal to the sublattice
        let g = rows(l.gram());
        for x in &b {
            for y in rows(&c.basis) {
                assert!(bilinear(&g, x, &y).is_zero());
            }
        }
        let qm = m.discriminant_form().unwrap();
        let qc = c.lattice.discriminant_form().unwrap();
        assert!(qm.is_isometric(&qc, -1).unwrap(), "{amb} {basis:?}");
        // gluing back gives an even unimodular lattice of the ambient signature
        let phi = GlueMap::find(&qm, &qc).unwrap().unwrap();
        let back = Lattice::glue(&m, &c.lattice, &phi).unwrap();
        assert!(back.is_even() && back.is_unimodular());
        assert_eq!(back.signature(), l.signature());
        checked += 1;
    }
    assert!(checked >= 5);
}

#[test]
fn non_primitive_sublattice_is_rejected() {
    let l = Lattice::named("3U").unwrap();
    let b = zm(&mat(&[&[2, 2, 0, 0, 0, 0]]));
    assert!(matches!(l.orthogonal_complement(&b), Err(Error::NotPrimitive { .. })));
}

fn random_rational(rng: &mut ChaCha8Rng) -> BigRational {
    loop {
        let n: i64 = rng.gen_range(-400..=400);
        let d: i64 = rng.gen_range(1..=60);
        if n != 0 {
            return BigRational::new(n.into(), d.into());
        }
    }
}

#[test]
fn hilbert_product_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let (a, b) = (random_rational(&mut rng), random_rational(&mut rng));
        let mut places = vec![Place::Infinite, Place::Finite(big(2))];
        for n in [a.numer(), a.denom(), b.numer(), b.denom()] {
            places.extend(prime_factors(n).into_iter().map(Place::Finite));
        }
        places.sort_by_key(|p| p.to_string());
        places.dedup();
        let lib_places = relevant_places(&a, &b);
        for p in &places {
            assert!(lib_places.contains(p) || matches!(p, Place::Finite(_)));
        }
        let prod: i32 = places.iter().map(|v| hilbert(&a, &b, v).unwrap()).product();
        assert_eq!(prod, 1, "({a}, {b})");
        // real place
        let inf = if a.is_negative() && b.is_negative() { -1 } else { 1 };
        assert_eq!(hilbert(&a, &b, &Place::Infinite).unwrap(), inf);
        // symmetry
        for v in &places {
            assert_eq!(hilbert(&a, &b, v).unwrap(), hilbert(&b, &a, v).unwrap());
        }
    }
}

#[test]
fn hilbert_at_odd_primes_matches_legendre_formula() {
    // (p u, v)_p = (v / p) for units u, v
    for p in [3i64, 5, 7, 11, 13] {
        for u in 1..p {
            for v in 1..p {
                let a = BigRational::from_integer(big(p * u));
                let b = BigRational::from_integer(big(v));
                let want = euler_criterion(&big(v), &big(p));
                assert_eq!(hilbert(&a, &b, &Place::Finite(big(p))).unwrap(), want);
            }
        }
    }
}

#[test]
fn legendre_matches_euler_criterion() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let primes: Vec<u64> = (3..2000).filter(|&n| is_prime_trial(n)).collect();
    for _ in 0..1000 {
        let p = big(primes[rng.gen_range(0..primes.len())] as i64);
        let a = BigInt::from(rng.gen_range(-1_000_000i64..=1_000_000));
        assert_eq!(legendre(&a, &p).unwrap(), euler_criterion(&a, &p), "({a}/{p})");
    }
    assert!(matches!(legendre(&big(3), &big(9)), Err(Error::NotPrime(_))));
    assert!(matches!(legendre(&big(3), &big(2)), Err(Error::NotOddPrime(_))));
}
