#![allow(clippy::needless_range_loop)]

//! Independent oracles and corpora shared by the integration tests and the
//! acceptance runner. Only `fixtures` calls into the library, to build inputs.
#![allow(dead_code)]

pub mod fixtures;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Mat = Vec<Vec<BigInt>>;
pub type QMat = Vec<Vec<BigRational>>;

pub const S4: &[i64] = &[1, -1, -1, -1, 1];
pub const LEHMER: &[i64] = &[1, 1, 0, -1, -1, -1, -1, -1, 0, 1, 1];

/// Salem polynomials (ascending coefficients) of degrees 4 to 22.
pub fn salem_corpus() -> Vec<(&'static str, Vec<i64>)> {
    vec![
        ("s4", S4.to_vec()),
        ("s6", vec![1, 0, -1, -1, -1, 0, 1]),
        ("s8", vec![1, 0, 0, -1, -1, -1, 0, 0, 1]),
        ("lehmer", LEHMER.to_vec()),
        ("s10b", vec![1, 0, 0, 0, -1, -1, -1, 0, 0, 0, 1]),
        ("s12", vec![1, -1, 1, -1, 0, 0, -1, 0, 0, -1, 1, -1, 1]),
        ("s14", vec![1, 0, -1, 0, 0, 0, 0, -1, 0, 0, 0, 0, -1, 0, 1]),
        ("s14n", vec![1, 0, -1, 0, 0, -1, -1, -1, -1, -1, 0, 0, -1, 0, 1]),
        ("s16", vec![1, -1, -1, -1, 0, -1, 0, 1, 1, 1, 0, -1, 0, -1, -1, -1, 1]),
        ("s18", vec![1, -1, -1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, -1, -1, 1]),
        (
            "s20",
            vec![1, -1, -1, -1, -1, -1, 1, 0, 1, 1, 1, 1, 1, 0, 1, -1, -1, -1, -1, -1, 1],
        ),
        (
            "s22sq",
            vec![
                1, -1, -1, 0, -1, 1, 1, 0, 1, -1, -1, 1, -1, -1, 1, 0, 1, 1, -1, 0, -1, -1, 1,
            ],
        ),
        (
            "s22",
            vec![
                1, -1, -1, 0, -1, -1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, -1, -1, 0, -1, -1, 1,
            ],
        ),
    ]
}

pub fn big(x: i64) -> BigInt {
    BigInt::from(x)
}

pub fn q(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

pub fn mat(rows: &[&[i64]]) -> Mat {
    rows.iter().map(|r| r.iter().map(|&x| big(x)).collect()).collect()
}

// ---------------------------------------------------------------------------
// Integer linear algebra
// ---------------------------------------------------------------------------

/// Bareiss fraction-free determinant.
pub fn det(m: &Mat) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut c: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(c.clone());
        let mut i = k;
        while i > 0 && c[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        c[i - 1] += 1;
        for j in i..k {
            c[j] = c[j - 1] + 1;
        }
    }
}

/// gcd of all `k x k` minors.
pub fn minors_gcd(m: &Mat, k: usize) -> BigInt {
    let (r, c) = (m.len(), m[0].len());
    let mut g = BigInt::zero();
    for rows in combinations(r, k) {
        for cols in combinations(c, k) {
            let sub: Mat = rows
                .iter()
                .map(|&i| cols.iter().map(|&j| m[i][j].clone()).collect())
                .collect();
            g = g.gcd(&det(&sub));
            if g.is_one() {
                break;
            }
        }
    }
    g
}

/// Invariant factors of a square matrix from its determinantal divisors.
pub fn invariant_factors(m: &Mat) -> Vec<BigInt> {
    let mut prev = BigInt::one();
    let mut out = Vec::new();
    for k in 1..=m.len() {
        let dk = minors_gcd(m, k);
        if dk.is_zero() {
            out.push(BigInt::zero());
            continue;
        }
        out.push(&dk / &prev);
        prev = dk;
    }
    out
}

/// Orders of the nontrivial cyclic factors of `Z^n / G Z^n`.
pub fn discriminant_group(gram: &Mat) -> Vec<BigInt> {
    invariant_factors(gram)
        .into_iter()
        .map(|d| d.abs())
        .filter(|d| !d.is_one())
        .collect()
}

pub fn valuation(n: &BigInt, p: &BigInt) -> u32 {
    let mut n = n.abs();
    let mut v = 0;
    while !n.is_zero() && (&n % p).is_zero() {
        n /= p;
        v += 1;
    }
    v
}

pub fn bilinear(g: &Mat, x: &[BigInt], y: &[BigInt]) -> BigInt {
    let mut s = BigInt::zero();
    for i in 0..x.len() {
        for j in 0..y.len() {
            s += &x[i] * &g[i][j] * &y[j];
        }
    }
    s
}

pub fn is_even(g: &Mat) -> bool {
    (0..g.len()).all(|i| g[i][i].is_even()) && (0..g.len()).all(|i| (0..g.len()).all(|j| g[i][j] == g[j][i]))
}

// ---------------------------------------------------------------------------
// Rational matrices
// ---------------------------------------------------------------------------

pub fn to_q(m: &Mat) -> QMat {
    m.iter()
        .map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect())
        .collect()
}

pub fn qmul(a: &QMat, b: &QMat) -> QMat {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut s = BigRational::zero();
                    for t in 0..k {
                        s += &a[i][t] * &b[t][j];
                    }
                    s
                })
                .collect()
        })
        .collect()
}

pub fn qidentity(n: usize) -> QMat {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { q(1) } else { q(0) }).collect())
        .collect()
}

/// Naive repeated multiplication.
pub fn qpow_naive(a: &QMat, e: u64) -> QMat {
    let mut r = qidentity(a.len());
    for _ in 0..e {
        r = qmul(&r, a);
    }
    r
}

pub fn is_integral(a: &QMat) -> bool {
    a.iter().all(|r| r.iter().all(|x| x.is_integer()))
}

/// Gauss-Jordan inverse.
pub fn qinverse(a: &QMat) -> Option<QMat> {
    let n = a.len();
    let mut m: QMat = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut r = r.clone();
            r.extend((0..n).map(|j| if i == j { q(1) } else { q(0) }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !m[i][c].is_zero())?;
        m.swap(p, c);
        let inv = m[c][c].recip();
        for x in m[c].iter_mut() {
            *x *= &inv;
        }
        for i in 0..n {
            if i != c && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..2 * n {
                    let t = &m[c][j] * &f;
                    m[i][j] -= t;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn transpose<T: Clone>(a: &[Vec<T>]) -> Vec<Vec<T>> {
    (0..a[0].len())
        .map(|j| a.iter().map(|r| r[j].clone()).collect())
        .collect()
}

// ---------------------------------------------------------------------------
// Number theory
// ---------------------------------------------------------------------------

pub fn euler_criterion(a: &BigInt, p: &BigInt) -> i32 {
    let r = a.mod_floor(p);
    if r.is_zero() {
        return 0;
    }
    let e = (p - 1u32) / 2u32;
    if r.modpow(&e, p).is_one() {
        1
    } else {
        -1
    }
}

pub fn is_prime_trial(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

pub fn prime_factors(n: &BigInt) -> Vec<BigInt> {
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut d = BigInt::from(2);
    while &d * &d <= n {
        if (&n % &d).is_zero() {
            out.push(d.clone());
            while (&n % &d).is_zero() {
                n /= &d;
            }
        }
        d += 1;
    }
    if n > BigInt::one() {
        out.push(n);
    }
    out
}

pub fn isqrt_exact(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

pub fn eval_i64(c: &[i64], x: i64) -> BigInt {
    c.iter().rev().fold(BigInt::zero(), |acc, &a| acc * x + a)
}

/// `-s(1) s(-1)` is a nonzero square.
pub fn square_class_oracle(c: &[i64]) -> bool {
    let v = -(eval_i64(c, 1) * eval_i64(c, -1));
    !v.is_zero() && isqrt_exact(&v).is_some()
}

/// Roots of `x^2 - a x + 1` modulo a prime, by brute force.
pub fn roots_mod(c: &[i64], p: u64) -> Vec<u64> {
    (0..p)
        .filter(|&x| {
            let v = c
                .iter()
                .rev()
                .fold(0i128, |acc, &a| (acc * x as i128 + a as i128).rem_euclid(p as i128));
            v == 0
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Numerical roots
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct C(pub f64, pub f64);

impl C {
    fn add(self, o: C) -> C {
        C(self.0 + o.0, self.1 + o.1)
    }
    fn sub(self, o: C) -> C {
        C(self.0 - o.0, self.1 - o.1)
    }
    fn mul(self, o: C) -> C {
        C(self.0 * o.0 - self.1 * o.1, self.0 * o.1 + self.1 * o.0)
    }
    fn div(self, o: C) -> C {
        let d = o.0 * o.0 + o.1 * o.1;
        C((self.0 * o.0 + self.1 * o.1) / d, (self.1 * o.0 - self.0 * o.1) / d)
    }
    pub fn abs(self) -> f64 {
        self.0.hypot(self.1)
    }
}

/// Durand-Kerner iteration for a monic polynomial.
pub fn numeric_roots(c: &[i64]) -> Vec<C> {
    let d = c.len() - 1;
    let eval = |z: C| {
        c.iter()
            .rev()
            .fold(C(0.0, 0.0), |acc, &a| acc.mul(z).add(C(a as f64, 0.0)))
    };
    let mut z: Vec<C> = (0..d)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / d as f64 + 0.4;
            C(1.1 * t.cos(), 1.1 * t.sin())
        })
        .collect();
    for _ in 0..2000 {
        for i in 0..d {
            let mut den = C(1.0, 0.0);
            for j in 0..d {
                if i != j {
                    den = den.mul(z[i].sub(z[j]));
                }
            }
            z[i] = z[i].sub(eval(z[i]).div(den));
        }
    }
    z
}

/// Numerically: exactly one root outside the unit circle, real and positive,
/// one inside, the rest on it.
pub fn salem_shape_oracle(c: &[i64]) -> bool {
    let z = numeric_roots(c);
    let out: Vec<&C> = z.iter().filter(|r| r.abs() > 1.0 + 1e-6).collect();
    let inn = z.iter().filter(|r| r.abs() < 1.0 - 1e-6).count();
    out.len() == 1 && out[0].1.abs() < 1e-6 && out[0].0 > 1.0 && inn == 1
}

pub fn largest_root(c: &[i64]) -> f64 {
    numeric_roots(c).iter().map(|r| r.abs()).fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Discriminant forms
// ---------------------------------------------------------------------------

/// Independent test that the p-part of the discriminant form of `gram` is
/// the hyperbolic form of scale `1/p^n` (p odd): the p-part of the group is
/// `(Z/p^n)^2` by determinantal divisors, and `p^n b` reduced modulo `p` on
/// the generators `m G^{-1} e_i` (m the prime-to-p part of det) has rank 2
/// with `-det` a square.
pub fn p_part_hyperbolic_oracle(gram: &Mat, p: &BigInt, n: u32) -> bool {
    let pn = p.pow(n);
    let group: Vec<BigInt> = discriminant_group(gram)
        .into_iter()
        .filter(|d| (d % p).is_zero())
        .collect();
    let ppart: Vec<BigInt> = group.iter().map(|d| p.pow(valuation(d, p))).collect();
    if ppart != vec![pn.clone(), pn.clone()] {
        return false;
    }
    let d = det(gram);
    let m = &d / p.pow(valuation(&d, p));
    let inv = match qinverse(&to_q(gram)) {
        Some(i) => i,
        None => return false,
    };
    let scale = BigRational::from_integer(&m * &m * &pn);
    let k = gram.len();
    let b: Vec<Vec<BigInt>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let x = &inv[i][j] * &scale;
                    // p-adically integral: reduce numer * denom^{-1} mod p
                    let den_inv = x.denom().modpow(&(p - 2u32), p);
                    (x.numer() * den_inv).mod_floor(p)
                })
                .collect()
        })
        .collect();
    let mut best = None;
    for i in 0..k {
        for j in i + 1..k {
            let minor = (&b[i][i] * &b[j][j] - &b[i][j] * &b[j][i]).mod_floor(p);
            if !minor.is_zero() {
                best = Some(minor);
            }
        }
    }
    match best {
        Some(minor) => euler_criterion(&(-minor), p) == 1,
        None => false,
    }
}

/// Characteristic polynomial (ascending coefficients) by Faddeev-LeVerrier.
pub fn charpoly_oracle(a: &QMat) -> Vec<BigInt> {
    let n = a.len();
    let mut c = vec![BigRational::zero(); n + 1];
    c[n] = q(1);
    let mut m = vec![vec![BigRational::zero(); n]; n];
    for k in 1..=n {
        for i in 0..n {
            m[i][i] += &c[n - k + 1];
        }
        m = qmul(a, &m);
        let tr: BigRational = (0..n).map(|i| m[i][i].clone()).sum();
        c[n - k] = -tr / q(k as i64);
    }
    c.into_iter().map(|x| x.to_integer()).collect()
}

pub fn companion_oracle(c: &[i64]) -> Mat {
    let d = c.len() - 1;
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    if j == d - 1 {
                        big(-c[i])
                    } else if i == j + 1 {
                        big(1)
                    } else {
                        big(0)
                    }
                })
                .collect()
        })
        .collect()
}

pub fn to_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().expect("finite")
}

/// Signature of a symmetric integer matrix by rational congruence
/// diagonalization.
pub fn signature_oracle(g: &Mat) -> (usize, usize) {
    let mut a = to_q(g);
    let n = a.len();
    let (mut pos, mut neg) = (0, 0);
    let mut alive: Vec<usize> = (0..n).collect();
    while !alive.is_empty() {
        let piv = alive.iter().copied().find(|&i| !a[i][i].is_zero());
        let i = match piv {
            Some(i) => i,
            None => {
                let pair = alive
                    .iter()
                    .flat_map(|&i| alive.iter().map(move |&j| (i, j)))
                    .find(|&(i, j)| i != j && !a[i][j].is_zero());
                let Some((i, j)) = pair else { break };
                // e_i <- e_i + e_j
                for k in 0..n {
                    let t = a[j][k].clone();
                    a[i][k] += t;
                }
                for k in 0..n {
                    let t = a[k][j].clone();
                    a[k][i] += t;
                }
                i
            }
        };
        let d = a[i][i].clone();
        if d.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        alive.retain(|&k| k != i);
        for &r in &alive {
            let f = &a[r][i] / &d;
            for &c in &alive {
                let t = &f * &a[i][c];
                a[r][c] -= t;
            }
        }
        for &r in &alive {
            a[r][i] = BigRational::zero();
            a[i][r] = BigRational::zero();
        }
    }
    (pos, neg)
}
