//! Factorization in `Z[x]`: squarefree decomposition, factorization modulo
//! a well-chosen prime, quadratic Hensel lifting and subset recombination
//! under the Mignotte bound.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::modp::{self, Fp};
use super::IntPolynomial;
use crate::arith::{ceil_sqrt, is_prime_u64};

/// Irreducible factors (primitive, positive leading coefficient) of the
/// primitive part of `f`, with multiplicities, sorted by degree and then
/// coefficients. Constants yield an empty list.
pub fn factor(f: &IntPolynomial) -> Vec<(IntPolynomial, u32)> {
    let mut out = Vec::new();
    for (g, e) in f.squarefree_decomposition() {
        for h in factor_squarefree(&g) {
            out.push((h, e));
        }
    }
    out.sort_by(|a, b| poly_order(&a.0, &b.0));
    out
}

pub fn is_irreducible(f: &IntPolynomial) -> bool {
    let fs = factor(f);
    fs.len() == 1 && fs[0].1 == 1
}

pub(crate) fn poly_order(a: &IntPolynomial, b: &IntPolynomial) -> std::cmp::Ordering {
    a.degree()
        .cmp(&b.degree())
        .then_with(|| a.coeffs().iter().rev().cmp(b.coeffs().iter().rev()))
}

fn lift_to_poly(a: &Fp) -> IntPolynomial {
    IntPolynomial::new(a.iter().map(|&c| BigInt::from(c)).collect())
}

fn mod_poly(f: &IntPolynomial, m: &BigInt) -> IntPolynomial {
    IntPolynomial::new(f.coeffs().iter().map(|c| c.mod_floor(m)).collect())
}

fn symmetric(f: &IntPolynomial, m: &BigInt) -> IntPolynomial {
    let half: BigInt = m >> 1;
    IntPolynomial::new(
        f.coeffs()
            .iter()
            .map(|c| {
                let r = c.mod_floor(m);
                if r > half {
                    r - m
                } else {
                    r
                }
            })
            .collect(),
    )
}

/// Number of irreducible factors modulo `p` of a squarefree reduction.
fn factor_count(f: &Fp, p: u64) -> usize {
    modp::distinct_degree(&modp::monic(f, p), p)
        .iter()
        .map(|(g, d)| modp::degree(g) / d)
        .sum()
}

/// Factors a primitive squarefree polynomial of positive degree.
fn factor_squarefree(f: &IntPolynomial) -> Vec<IntPolynomial> {
    let f = f.primitive_part();
    if f.degree() <= 1 {
        return vec![f];
    }
    let lc = f.lc();
    // choose among the first few admissible primes the one with fewest factors
    let mut best: Option<(usize, u64)> = None;
    let mut tried = 0;
    let mut p = 3u64;
    while tried < 8 {
        if is_prime_u64(p) && !(&lc % BigInt::from(p)).is_zero() {
            let fp = modp::reduce(&f, p);
            if modp::degree(&fp) == f.degree() && modp::is_squarefree(&fp, p) {
                tried += 1;
                let c = factor_count(&fp, p);
                if best.is_none_or(|(bc, _)| c < bc) {
                    best = Some((c, p));
                }
                if c == 1 {
                    break;
                }
            }
        }
        p += 2;
    }
    let (count, p) = best.expect("some prime is admissible");
    if count == 1 {
        return vec![f];
    }
    let local: Vec<Fp> = modp::factor_squarefree(&modp::reduce(&f, p), p);

    // coefficient bound for lc * (monic factor mod M)
    let norm2: BigInt = f.coeffs().iter().map(|c| c * c).sum();
    let bound = (BigInt::one() << f.degree()) * (ceil_sqrt(&norm2) + 1u32) * lc.abs();
    let target = bound * 2u32 + 1u32;
    let pb = BigInt::from(p);
    let mut m = pb.clone();
    while m <= target {
        m = &m * &m;
    }
    let lifted = hensel_lift(&f, &local, p, &m);
    recombine(f, lifted, &m)
}

/// Lifts `f = lc(f) * prod(factors) mod p` to monic factors modulo `m`,
/// where `m` is a power of `p` obtained by repeated squaring.
fn hensel_lift(f: &IntPolynomial, factors: &[Fp], p: u64, m: &BigInt) -> Vec<IntPolynomial> {
    if factors.len() == 1 {
        // lc is a unit modulo m
        let e = f.lc().extended_gcd(m);
        let linv = e.x.mod_floor(m);
        return vec![mod_poly(&f.scale(&linv), m)];
    }
    let k = factors.len() / 2;
    let a = factors[..k].iter().fold(vec![1u64], |acc, g| modp::mul(&acc, g, p));
    let b = factors[k..].iter().fold(vec![1u64], |acc, g| modp::mul(&acc, g, p));
    let lcp = f.lc().mod_floor(&BigInt::from(p)).to_u64().unwrap();
    let g0 = modp::scale(&a, lcp, p);
    let (_, s0, t0) = modp::ext_gcd(&g0, &b, p);
    let (g, h) = hensel_step_all(f, &g0, &b, &s0, &t0, p, m);
    let mut out = hensel_lift(&g, &factors[..k], p, m);
    out.extend(hensel_lift(&h, &factors[k..], p, m));
    out
}

/// Quadratic Hensel lifting of `f = g h` with `h` monic, from modulus `p`
/// to `m` (a power of `p` reached by squaring).
fn hensel_step_all(
    f: &IntPolynomial,
    g0: &Fp,
    h0: &Fp,
    s0: &Fp,
    t0: &Fp,
    p: u64,
    m: &BigInt,
) -> (IntPolynomial, IntPolynomial) {
    let mut g = lift_to_poly(g0);
    let mut h = lift_to_poly(h0);
    let mut s = lift_to_poly(s0);
    let mut t = lift_to_poly(t0);
    let mut cur = BigInt::from(p);
    while &cur < m {
        let nm = &cur * &cur;
        let e = mod_poly(&(f - &(&g * &h)), &nm);
        let (q, r) = mod_poly(&(&s * &e), &nm).div_rem_monic(&h);
        let g1 = mod_poly(&(&(&g + &(&t * &e)) + &(&q * &g)), &nm);
        let h1 = mod_poly(&(&h + &r), &nm);
        let b = mod_poly(&(&(&(&s * &g1) + &(&t * &h1)) - &IntPolynomial::one()), &nm);
        let (c, d) = mod_poly(&(&s * &b), &nm).div_rem_monic(&h1);
        let s1 = mod_poly(&(&s - &d), &nm);
        let t1 = mod_poly(&(&(&t - &(&t * &b)) - &(&c * &g1)), &nm);
        g = g1;
        h = h1;
        s = s1;
        t = t1;
        cur = nm;
    }
    (g, h)
}

fn recombine(f: IntPolynomial, lifted: Vec<IntPolynomial>, m: &BigInt) -> Vec<IntPolynomial> {
    let mut f = f;
    let mut rest = lifted;
    let mut out = Vec::new();
    let mut size = 1;
    'outer: while 2 * size <= rest.len() {
        let n = rest.len();
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let lc = f.lc();
            let mut cand = IntPolynomial::constant(lc.clone());
            for &i in &idx {
                cand = mod_poly(&(&cand * &rest[i]), m);
            }
            let cand = symmetric(&cand, m).primitive_part();
            let c0 = cand.coeff(0);
            let plausible = !c0.is_zero() && (f.coeff(0) % &c0).is_zero() || f.coeff(0).is_zero();
            if plausible {
                if let Some(q) = f.div_exact(&cand) {
                    out.push(cand);
                    f = q.primitive_part();
                    let keep: Vec<IntPolynomial> = rest
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| !idx.contains(i))
                        .map(|(_, g)| g.clone())
                        .collect();
                    rest = keep;
                    continue 'outer;
                }
            }
            // next combination in lexicographic order
            let mut i = size;
            loop {
                if i == 0 {
                    size += 1;
                    continue 'outer;
                }
                i -= 1;
                if idx[i] < n - size + i {
                    idx[i] += 1;
                    for j in i + 1..size {
                        idx[j] = idx[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }
    if f.degree() > 0 {
        out.push(f.primitive_part());
    }
    out
}
