//! Acceptance runner: one PASS/FAIL line per criterion.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::fixtures::*;
use common::*;
use dynspec_core::isometry::{companion, invariant_symmetric_forms, power_to_integral, twist_split_certificate};
use dynspec_core::json::parse_int_rows;
use dynspec_core::lattice::local::{hilbert, legendre, Place};
use dynspec_core::linalg::{QMatrix, ZMatrix};
use dynspec_core::polyarith::{discriminant, is_salem, SalemRejection};
use dynspec_core::positivity::{is_positive, obstructing_root_search_with, PositivityOptions, Status};
use dynspec_core::realize::{
    build_k3_certificate, curated_seed, find_norm_element, find_split_prime, stable_realizable, verify_certificate,
    BuildOptions,
};
use dynspec_core::{GlueMap, IntPolynomial, Isometry, Lattice, SurfaceClass};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (usize, u64, fn() -> Check);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn criterion_1() -> Check {
    for c in [S4, LEHMER] {
        is_salem(&poly(c)).map_err(|r| format!("{} rejected: {r}", poly(c)))?;
        ensure(salem_shape_oracle(c), "numeric oracle disagrees")?;
    }
    let cases: [(&[i64], &str); 3] = [
        (&[1, 1, 1, 1, 1], "wrong_root_pattern"),
        (&[1, 0, -1, 0, 1], "wrong_root_pattern"),
        (&[-2, 0, 1], "not_reciprocal"),
    ];
    for (c, code) in cases {
        match is_salem(&poly(c)) {
            Ok(_) => return Err(format!("{} accepted", poly(c))),
            Err(r) => ensure(r.code() == code, format!("{}: {r}", poly(c)))?,
        }
    }
    ensure(
        matches!(
            is_salem(&poly(&[1, 1, 1, 1, 1])),
            Err(SalemRejection::WrongRootPattern(_))
        ),
        "phi5",
    )?;
    Ok("Lehmer and s4 accepted; Phi5, Phi12, x^2-2 rejected".into())
}

fn criterion_2() -> Check {
    let mut instances: Vec<(Isometry, dynspec_core::TwistElement, BigInt)> = Vec::new();
    for k in [3i64, 4, 5] {
        let f = rank_two(k, 1);
        let s = poly(&[1, -k, 1]);
        let sp = find_split_prime(&s, &BigInt::one(), 2, 10_000).map_err(|e| e.to_string())?;
        let ne = find_norm_element(&s, &sp, 1, 10).map_err(|e| e.to_string())?;
        instances.push((f, ne.t, BigInt::from(sp.prime)));
    }
    for lower in [2u64, 100] {
        let sp = find_split_prime(&poly(S4), &BigInt::one(), lower, 100_000).map_err(|e| e.to_string())?;
        let ne = find_norm_element(&poly(S4), &sp, 1, 30).map_err(|e| e.to_string())?;
        instances.push((s4_seed(), ne.t, BigInt::from(sp.prime)));
    }
    let mut n_checked = 0;
    for (f, t, p) in &instances {
        for n in [1u32, 2] {
            let rep = twist_split_certificate(f, t, n, p).map_err(|e| e.to_string())?;
            let g = rep.twisted.gram().to_rows();
            ensure(rep.passed, format!("p = {p}, n = {n}: certificate failed"))?;
            ensure(valuation(&det(&g), p) == 2 * n, format!("p = {p}: valuation"))?;
            ensure(p_part_hyperbolic_oracle(&g, p, n), format!("p = {p}, n = {n}: oracle"))?;
            n_checked += 1;
        }
    }
    Ok(format!(
        "{n_checked} twisted instances, hyperbolic p-parts confirmed by SNF oracle"
    ))
}

fn conjugated_companion(rng: &mut ChaCha8Rng, c: &[i64]) -> Result<Isometry, String> {
    let n = c.len() - 1;
    let comp = companion(&poly(c)).map_err(|e| e.to_string())?;
    let forms = invariant_symmetric_forms(&comp.to_rational());
    let gc = (0..1000)
        .find_map(|_| {
            let mut g = ZMatrix::zeros(n, n);
            for b in &forms {
                let k = BigInt::from(rng.gen_range(-3i64..=3));
                g = &g + &b.map(|x| x * &k);
            }
            (!g.det().is_zero()).then(|| g.to_rows())
        })
        .ok_or("no invariant form")?;
    let p = loop {
        let m: Mat = (0..n)
            .map(|_| (0..n).map(|_| BigInt::from(rng.gen_range(-2i64..=2))).collect())
            .collect();
        let d = det(&m).abs();
        if d > BigInt::one() && d <= BigInt::from(6) {
            break to_q(&m);
        }
    };
    let pinv = qinverse(&p).ok_or("singular")?;
    let f = qmul(&qmul(&p, &to_q(&comp.to_rows())), &pinv);
    let gf = qmul(&qmul(&transpose(&pinv), &to_q(&gc)), &pinv);
    let den = gf.iter().flatten().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let scale = BigRational::from_integer(den * 2);
    let g: Mat = gf
        .iter()
        .map(|r| r.iter().map(|x| (x * &scale).to_integer()).collect())
        .collect();
    let l = Lattice::new(ZMatrix::from_rows(g).unwrap()).map_err(|e| e.to_string())?;
    Isometry::new(l, QMatrix::from_rows(f).unwrap()).map_err(|e| e.to_string())
}

fn criterion_3() -> Check {
    let polys: [&[i64]; 8] = [
        &[1, -3, 1],
        &[1, -1, 1],
        &[-1, 4, -4, 1],
        &[1, 1, 1, 1],
        S4,
        &[1, -3, 2, -3, 1],
        &[1, 0, -1, -1, -1, 0, 1],
        &[1, -1, 1, -1, 1, -1, 1],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut count = 0;
    for c in polys.iter().cycle().take(24) {
        let f = conjugated_companion(&mut rng, c)?;
        let (n, _) = power_to_integral(&f).map_err(|e| e.to_string())?;
        let fm = f.matrix().to_rows();
        let fnn = qpow_naive(&fm, n);
        ensure(is_integral(&fnn), format!("{c:?}: f^{n} not integral"))?;
        for m in [2u64, 3] {
            ensure(
                is_integral(&qpow_naive(&fnn, m)),
                format!("{c:?}: f^({n}*{m}) not integral"),
            )?;
        }
        count += 1;
    }
    Ok(format!(
        "{count} conjugated companions (ranks 2-6), integrality checked by direct powering"
    ))
}

fn criterion_4() -> Check {
    let opts = PositivityOptions {
        always_search: true,
        ..PositivityOptions::default()
    };
    let mut bounded = 0;
    let corpus = positivity_corpus();
    for (name, f) in &corpus {
        let s = f.charpoly().map_err(|e| e.to_string())?;
        let d = det(&f.lattice().gram().to_rows()).abs();
        if d > discriminant(&s).map_err(|e| e.to_string())?.abs() * 4 {
            let rep = obstructing_root_search_with(f, &opts).map_err(|e| e.to_string())?;
            ensure(
                rep.witnesses.is_empty() && rep.status == Status::Positive,
                format!("{name}: witnesses found"),
            )?;
            bounded += 1;
        }
    }
    let f = rank_two(3, 1);
    let rep = is_positive(&f).map_err(|e| e.to_string())?;
    ensure(
        rep.status == Status::NotPositive,
        "[[2,3],[3,2]] not reported not_positive",
    )?;
    let g = f.lattice().gram().to_rows();
    ensure(
        !rep.witnesses.is_empty() && rep.witnesses.iter().all(|w| bilinear(&g, &w.root, &w.root) == big(-2)),
        "witness is not a root",
    )?;
    Ok(format!(
        "{bounded} of {} instances above the bound have no obstructing roots; [[2,3],[3,2]] not positive",
        corpus.len()
    ))
}

fn criterion_5() -> Check {
    let m = Lattice::from_i64(&[&[-2]]).unwrap();
    let n = Lattice::from_i64(&[&[2]]).unwrap();
    let phi = GlueMap::find(&m.discriminant_form().unwrap(), &n.discriminant_form().unwrap())
        .map_err(|e| e.to_string())?
        .ok_or("no glue map")?;
    let u = Lattice::glue(&m, &n, &phi).map_err(|e| e.to_string())?;
    let g = u.gram().to_rows();
    ensure(
        u.rank() == 2 && det(&g) == big(-1) && is_even(&g),
        "glue([[-2]], [[2]]) is not U",
    )?;
    let z = |v: &[i64], k: usize| {
        let mut r: Vec<BigInt> = v.iter().map(|&x| big(x)).collect();
        r.resize(k, BigInt::zero());
        r
    };
    let cases: Vec<(&str, Vec<Vec<BigInt>>)> = vec![
        ("3U", vec![z(&[1, 1], 6)]),
        ("3U", vec![z(&[1, -3], 6)]),
        ("3U", vec![z(&[1, 1], 6), z(&[0, 0, 1, 2], 6)]),
        ("U+E8", vec![z(&[1, 2], 10)]),
        ("U+E8", vec![z(&[0, 0, 1], 10), z(&[0, 0, 0, 1], 10)]),
        ("U+E8", vec![z(&[1, 2, 1], 10), z(&[0, 0, 0, 0, 1], 10)]),
    ];
    for (amb, b) in &cases {
        let l = Lattice::named(amb).unwrap();
        let bm = ZMatrix::from_rows(b.clone()).unwrap();
        let sub = l.sublattice(&bm).map_err(|e| e.to_string())?;
        let comp = l.orthogonal_complement(&bm).map_err(|e| e.to_string())?;
        let qm = sub.discriminant_form().map_err(|e| e.to_string())?;
        let qc = comp.lattice.discriminant_form().map_err(|e| e.to_string())?;
        ensure(
            qm.is_isometric(&qc, -1).map_err(|e| e.to_string())?,
            format!("{amb}: q_M-perp != -q_M"),
        )?;
        let (mut a, mut c) = (
            discriminant_group(&sub.gram().to_rows()),
            discriminant_group(&comp.lattice.gram().to_rows()),
        );
        a.sort();
        c.sort();
        ensure(a == c, format!("{amb}: groups differ (oracle)"))?;
    }
    Ok(format!(
        "glue gives U; q_M-perp = -q_M on {} primitive sublattices",
        cases.len()
    ))
}

fn criterion_6() -> Check {
    let corpus = salem_corpus();
    let classes = [SurfaceClass::Torus, SurfaceClass::K3, SurfaceClass::Enriques];
    for (name, c) in &corpus {
        let d = c.len() - 1;
        for class in classes {
            for projective in [false, true] {
                let dec = stable_realizable(&poly(c), class, projective).map_err(|e| e.to_string())?;
                let stable = d < class.b2() || (d == class.b2() && square_class_oracle(c));
                let want = stable && (!projective || d <= class.h11());
                ensure(
                    dec.realizable == want,
                    format!("{name} {class} projective={projective}"),
                )?;
            }
        }
    }
    let lehmer = poly(LEHMER);
    let dec = stable_realizable(&lehmer, SurfaceClass::Enriques, false).unwrap();
    ensure(
        dec.realizable && dec.reason == "clause (2): d = b2, square class",
        "Lehmer/Enriques",
    )?;
    ensure(
        stable_realizable(&lehmer, SurfaceClass::K3, true).unwrap().realizable,
        "Lehmer/K3",
    )?;
    let s22 = &corpus.iter().find(|(n, _)| *n == "s22").unwrap().1;
    ensure(
        !stable_realizable(&poly(s22), SurfaceClass::K3, false)
            .unwrap()
            .realizable,
        "degree 22 non-square",
    )?;
    Ok(format!(
        "{} polynomials of degrees 4-22 x 3 classes x projective",
        corpus.len()
    ))
}

fn criterion_7() -> Check {
    let s = poly(S4);
    let seed = curated_seed(&s, SurfaceClass::K3).ok_or("no curated seed")?;
    let c = build_k3_certificate(&s, &seed, &BuildOptions::default()).map_err(|e| e.to_string())?;
    let report = verify_certificate(&c);
    ensure(report.verified, "verify_certificate = false")?;
    let f = to_q(&parse_int_rows(&c.isometry, 22).map_err(|e| e.to_string())?.to_rows());
    let cp = IntPolynomial::new(charpoly_oracle(&f));
    ensure(
        cp == &c.power_salem * &poly(&[-1, 1]).pow(18),
        "charpoly is not s_n(x)(x-1)^18",
    )?;
    let g = c.lattice.gram().to_rows();
    let kb = parse_int_rows(&c.kernel.basis, 22)
        .map_err(|e| e.to_string())?
        .to_rows();
    let kg: Mat = (0..kb.len())
        .map(|i| (0..kb.len()).map(|j| bilinear(&g, &kb[i], &kb[j])).collect())
        .collect();
    ensure(signature_oracle(&kg) == (1, 3), "kernel signature")?;
    let pos = c.positivity.as_ref().ok_or("no positivity evidence")?;
    ensure(pos.report.status == Status::Positive, "positivity evidence")?;
    let sp = c
        .glue
        .as_ref()
        .and_then(|g| g.split_prime.as_ref())
        .ok_or("no split prime")?;
    Ok(format!("p = {}, n = {}, kernel (1, 3), verified", sp.prime, c.power))
}

fn criterion_8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let rand_q = |rng: &mut ChaCha8Rng| loop {
        let n: i64 = rng.gen_range(-500..=500);
        if n != 0 {
            return BigRational::new(n.into(), rng.gen_range(1i64..=50).into());
        }
    };
    for _ in 0..100 {
        let (a, b) = (rand_q(&mut rng), rand_q(&mut rng));
        let mut places = vec![Place::Infinite, Place::Finite(big(2))];
        for x in [a.numer(), a.denom(), b.numer(), b.denom()] {
            places.extend(prime_factors(x).into_iter().map(Place::Finite));
        }
        places.sort_by_key(|p| p.to_string());
        places.dedup();
        let mut prod = 1;
        for v in &places {
            prod *= hilbert(&a, &b, v).map_err(|e| e.to_string())?;
        }
        ensure(prod == 1, format!("product formula fails for ({a}, {b})"))?;
    }
    let primes: Vec<i64> = (3..5000).filter(|&n| is_prime_trial(n as u64)).collect();
    for _ in 0..1000 {
        let p = big(primes[rng.gen_range(0..primes.len())]);
        let a = big(rng.gen_range(-10_000_000i64..=10_000_000));
        ensure(
            legendre(&a, &p).map_err(|e| e.to_string())? == euler_criterion(&a, &p),
            format!("({a}/{p})"),
        )?;
    }
    Ok("Hilbert product formula on 100 pairs; Legendre = Euler on 1000 pairs".into())
}

fn run(n: usize, limit: Duration, f: fn() -> Check) -> bool {
    let start = Instant::now();
    let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(format!("panicked: {msg}"))
    });
    let t = start.elapsed();
    let (ok, detail) = match out {
        Ok(d) if t <= limit => (true, d),
        Ok(d) => (false, format!("{d}; took {t:.2?}, limit {limit:?}")),
        Err(e) => (false, e),
    };
    println!("{} criterion {n}: {detail} [{t:.2?}]", if ok { "PASS" } else { "FAIL" });
    ok
}

fn main() {
    std::panic::set_hook(Box::new(|_| {}));
    let criteria: [Criterion; 8] = [
        (1, 1, criterion_1),
        (2, 10, criterion_2),
        (3, 30, criterion_3),
        (4, 120, criterion_4),
        (5, 10, criterion_5),
        (6, 1, criterion_6),
        (7, 600, criterion_7),
        (8, 5, criterion_8),
    ];
    let mut all = true;
    for (n, secs, f) in criteria {
        all &= run(n, Duration::from_secs(secs), f);
    }
    if !all {
        std::process::exit(1);
    }
}
