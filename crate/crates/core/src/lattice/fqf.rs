//! Finite quadratic forms (discriminant forms) and glue maps.
//!
//! A form is presented on generators `g_1, ..., g_k` of orders `d_i`
//! (a direct sum of cyclic groups) by `q(g_i)` in `Q/2Z` and the Gram matrix
//! `b(g_i, g_j)` in `Q/Z`. Elements are integer coordinate vectors.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::local::legendre;
use super::{reduce_mod, DualCoordinates};
use crate::arith::{inv_mod, prime_divisors, sqrt_mod_prime_power, valuation};
use crate::error::{Error, Result};
use crate::json::{format_rational, parse_int, parse_rational};
use crate::linalg::{QMatrix, ZMatrix};

/// Largest p-primary part (number of elements) searched exhaustively.
pub const SEARCH_LIMIT: u64 = 20_000_000;

#[derive(Clone, Debug)]
pub struct FiniteQuadraticForm {
    orders: Vec<BigInt>,
    q: Vec<BigRational>,
    b: Vec<Vec<BigRational>>,
    lifts: Option<QMatrix>,
    coords: Option<DualCoordinates>,
}

impl PartialEq for FiniteQuadraticForm {
    fn eq(&self, o: &Self) -> bool {
        self.same_presentation(o)
    }
}

impl Eq for FiniteQuadraticForm {}

impl FiniteQuadraticForm {
    /// Builds a form from generator orders, `q` values and the `b` matrix.
    /// Values are reduced into `[0, 2)` and `[0, 1)`.
    pub fn new(orders: Vec<BigInt>, q: Vec<BigRational>, b: Vec<Vec<BigRational>>) -> Result<Self> {
        let k = orders.len();
        if q.len() != k || b.len() != k || b.iter().any(|r| r.len() != k) {
            return Err(Error::Dimension("form data sizes disagree".into()));
        }
        for (i, d) in orders.iter().enumerate() {
            if d < &BigInt::from(2) {
                return Err(Error::Precondition(format!("generator {i} has order {d} < 2")));
            }
            let dr = BigRational::from_integer(d.clone());
            let dq = &dr * &dr * &q[i];
            if !(dq.is_integer() && dq.to_integer().is_even()) {
                return Err(Error::Precondition(format!(
                    "q(g{i}) = {} is not compatible with order {d}",
                    format_rational(&q[i])
                )));
            }
            for j in 0..k {
                if b[i][j] != b[j][i] {
                    return Err(Error::NotSymmetric);
                }
                if !(&dr * &b[i][j]).is_integer() {
                    return Err(Error::Precondition(format!(
                        "b(g{i}, g{j}) is not compatible with order {d}"
                    )));
                }
            }
            if reduce_mod(&q[i], 1) != reduce_mod(&b[i][i], 1) {
                return Err(Error::Precondition(format!("b(g{i}, g{i}) != q(g{i}) mod 1")));
            }
        }
        let q = q.iter().map(|x| reduce_mod(x, 2)).collect();
        let b = b.iter().map(|r| r.iter().map(|x| reduce_mod(x, 1)).collect()).collect();
        Ok(FiniteQuadraticForm {
            orders,
            q,
            b,
            lifts: None,
            coords: None,
        })
    }

    pub(crate) fn with_lifts(
        orders: Vec<BigInt>,
        q: Vec<BigRational>,
        b: Vec<Vec<BigRational>>,
        lifts: QMatrix,
        coords: Option<DualCoordinates>,
    ) -> Result<Self> {
        let mut f = Self::new(orders, q, b)?;
        f.lifts = Some(lifts);
        f.coords = coords;
        Ok(f)
    }

    pub fn trivial() -> Self {
        FiniteQuadraticForm {
            orders: Vec::new(),
            q: Vec::new(),
            b: Vec::new(),
            lifts: None,
            coords: None,
        }
    }

    /// Hyperbolic form of scale `1/m` on `(Z/m)^2`: `q = 0` on both
    /// generators and `b(e, f) = 1/m`.
    pub fn hyperbolic(m: &BigInt) -> Result<Self> {
        let z = BigRational::zero();
        let s = BigRational::new(BigInt::one(), m.clone());
        Self::new(
            vec![m.clone(), m.clone()],
            vec![z.clone(), z.clone()],
            vec![vec![z.clone(), s.clone()], vec![s, z]],
        )
    }

    /// Cyclic form `Z/d` with `q(g) = v`.
    pub fn cyclic(d: &BigInt, v: BigRational) -> Result<Self> {
        Self::new(vec![d.clone()], vec![v.clone()], vec![vec![v]])
    }

    pub fn orders(&self) -> &[BigInt] {
        &self.orders
    }

    pub fn q_values(&self) -> &[BigRational] {
        &self.q
    }

    pub fn b_matrix(&self) -> &[Vec<BigRational>] {
        &self.b
    }

    pub fn num_generators(&self) -> usize {
        self.orders.len()
    }

    /// Group order.
    pub fn order(&self) -> BigInt {
        self.orders.iter().product()
    }

    pub fn exponent(&self) -> BigInt {
        self.orders.iter().fold(BigInt::one(), |a, d| a.lcm(d))
    }

    pub fn is_trivial(&self) -> bool {
        self.orders.is_empty()
    }

    pub fn same_presentation(&self, o: &Self) -> bool {
        self.orders == o.orders && self.q == o.q && self.b == o.b
    }

    /// Lift of generator `i` in ambient (`L ⊗ Q`) coordinates, when the form
    /// was computed from a lattice.
    pub fn lift(&self, i: usize) -> &[BigRational] {
        self.lifts.as_ref().expect("form has no lifts").row(i)
    }

    pub fn lifts(&self) -> Option<&QMatrix> {
        self.lifts.as_ref()
    }

    /// Ambient lift of the element with coordinates `x`.
    pub fn lift_of(&self, x: &[BigInt]) -> Vec<BigRational> {
        let l = self.lifts.as_ref().expect("form has no lifts");
        let mut v = vec![BigRational::zero(); l.ncols()];
        for (i, c) in x.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let cr = BigRational::from_integer(c.clone());
            for (j, vj) in v.iter_mut().enumerate() {
                *vj += &cr * &l[(i, j)];
            }
        }
        v
    }

    /// Coordinates of a dual vector (ambient coordinates) in the discriminant
    /// group.
    pub fn coordinates_of(&self, v: &[BigRational]) -> Result<Vec<BigInt>> {
        let c = self
            .coords
            .as_ref()
            .ok_or_else(|| Error::Unsupported("form has no coordinate map".into()))?;
        let y = c.vinv.mul_vec(v);
        let mut out = Vec::new();
        for (i, yi) in y.iter().enumerate() {
            let d = &c.diag[i];
            let t = yi * BigRational::from_integer(d.clone());
            if !t.is_integer() {
                return Err(Error::NotInDual);
            }
            if d > &BigInt::one() {
                out.push(t.to_integer().mod_floor(d));
            }
        }
        Ok(out)
    }

    /// Reduces coordinates into `[0, d_i)`.
    pub fn normalize(&self, x: &[BigInt]) -> Vec<BigInt> {
        x.iter().zip(&self.orders).map(|(c, d)| c.mod_floor(d)).collect()
    }

    pub fn q_of(&self, x: &[BigInt]) -> BigRational {
        let mut acc = BigRational::zero();
        let k = self.orders.len();
        for i in 0..k {
            if x[i].is_zero() {
                continue;
            }
            let xi = BigRational::from_integer(x[i].clone());
            acc += &xi * &xi * &self.q[i];
            for j in i + 1..k {
                if !x[j].is_zero() {
                    let xj = BigRational::from_integer(x[j].clone());
                    acc += BigRational::from_integer(2.into()) * &xi * xj * &self.b[i][j];
                }
            }
        }
        reduce_mod(&acc, 2)
    }

    pub fn b_of(&self, x: &[BigInt], y: &[BigInt]) -> BigRational {
        let mut acc = BigRational::zero();
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if !yj.is_zero() {
                    acc += BigRational::from_integer(xi * yj) * &self.b[i][j];
                }
            }
        }
        reduce_mod(&acc, 1)
    }

    pub fn negate(&self) -> Self {
        FiniteQuadraticForm {
            orders: self.orders.clone(),
            q: self.q.iter().map(|x| reduce_mod(&-x, 2)).collect(),
            b: self
                .b
                .iter()
                .map(|r| r.iter().map(|x| reduce_mod(&-x, 1)).collect())
                .collect(),
            lifts: None,
            coords: None,
        }
    }

    pub fn direct_sum(&self, o: &Self) -> Self {
        let k = self.orders.len();
        let n = k + o.orders.len();
        let mut b = vec![vec![BigRational::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                if i < k && j < k {
                    b[i][j] = self.b[i][j].clone();
                } else if i >= k && j >= k {
                    b[i][j] = o.b[i - k][j - k].clone();
                }
            }
        }
        let mut orders = self.orders.clone();
        orders.extend(o.orders.iter().cloned());
        let mut q = self.q.clone();
        q.extend(o.q.iter().cloned());
        FiniteQuadraticForm {
            orders,
            q,
            b,
            lifts: None,
            coords: None,
        }
    }

    /// Primes dividing the group order.
    pub fn primes(&self) -> Vec<BigInt> {
        if self.is_trivial() {
            return Vec::new();
        }
        prime_divisors(&self.order())
    }

    /// The p-primary part and, for each of its generators, the index of the
    /// originating generator and the multiplier `m` with new generator `m g`.
    pub fn p_part_with_map(&self, p: &BigInt) -> (Self, Vec<(usize, BigInt)>) {
        let mut orders = Vec::new();
        let mut map = Vec::new();
        for (i, d) in self.orders.iter().enumerate() {
            let mut pp = BigInt::one();
            let mut rest = d.clone();
            while (&rest % p).is_zero() {
                rest /= p;
                pp *= p;
            }
            if pp > BigInt::one() {
                orders.push(pp);
                map.push((i, rest));
            }
        }
        let k = orders.len();
        let q = (0..k)
            .map(|a| {
                let (i, m) = &map[a];
                let mr = BigRational::from_integer(m.clone());
                reduce_mod(&(&mr * &mr * &self.q[*i]), 2)
            })
            .collect();
        let b = (0..k)
            .map(|a| {
                (0..k)
                    .map(|c| {
                        let (i, m) = &map[a];
                        let (j, n) = &map[c];
                        reduce_mod(&(BigRational::from_integer(m * n) * &self.b[*i][*j]), 1)
                    })
                    .collect()
            })
            .collect();
        let lifts = self.lifts.as_ref().map(|l| {
            QMatrix::from_fn(k, l.ncols(), |a, j| {
                let (i, m) = &map[a];
                BigRational::from_integer(m.clone()) * &l[(*i, j)]
            })
        });
        (
            FiniteQuadraticForm {
                orders,
                q,
                b,
                lifts,
                coords: None,
            },
            map,
        )
    }

    pub fn p_primary_part(&self, p: &BigInt) -> Self {
        self.p_part_with_map(p).0
    }

    /// Multiset of `q` values over all elements, sorted (small groups only).
    pub fn value_multiset(&self) -> Result<Vec<(BigRational, u64)>> {
        let t = Table::new(self)?;
        let mut counts: HashMap<i128, u64> = HashMap::new();
        for e in 0..t.size {
            *counts.entry(t.q[e as usize]).or_default() += 1;
        }
        let mut v: Vec<(BigRational, u64)> = counts
            .into_iter()
            .map(|(k, c)| (BigRational::new(BigInt::from(k), BigInt::from(t.n)), c))
            .collect();
        v.sort();
        Ok(v)
    }

    /// Searches a group isomorphism `phi: self -> other` with
    /// `q_other(phi x) = sign * q_self(x)`. Returns the images of the
    /// generators of `self` in the coordinates of `other`.
    pub fn find_isometry(&self, other: &Self, sign: i32) -> Result<Option<Vec<Vec<BigInt>>>> {
        if self.order() != other.order() {
            return Ok(None);
        }
        let k = self.orders.len();
        let mut images = vec![vec![BigInt::zero(); other.orders.len()]; k];
        for p in self.primes() {
            let (ap, amap) = self.p_part_with_map(&p);
            let (bp, bmap) = other.p_part_with_map(&p);
            let mut oa = ap.orders.clone();
            let mut ob = bp.orders.clone();
            oa.sort();
            ob.sort();
            if oa != ob {
                return Ok(None);
            }
            let local = if p == BigInt::from(2) {
                search_p_isometry(&ap, &bp, sign)?
            } else {
                odd_p_isometry(&ap, &bp, &p, sign)?
            };
            let Some(local) = local else {
                return Ok(None);
            };
            // the p-component of g_i is x (m g_i) where x m + y p^a = 1
            for (a, (i, m)) in amap.iter().enumerate() {
                let pp = &self.orders[*i] / m;
                let e = m.extended_gcd(&pp);
                for (bidx, (j, mj)) in bmap.iter().enumerate() {
                    let v = &local[a][bidx] * mj * &e.x;
                    images[*i][*j] += v;
                }
            }
        }
        for img in images.iter_mut() {
            *img = other.normalize(img);
        }
        Ok(Some(images))
    }

    /// Whether two forms are isometric (`sign = 1`) or anti-isometric.
    pub fn is_isometric(&self, other: &Self, sign: i32) -> Result<bool> {
        Ok(self.find_isometry(other, sign)?.is_some())
    }

    /// Whether the images of the generators of `self` define a bijective
    /// homomorphism onto `other`.
    pub fn is_bijection(&self, other: &Self, images: &[Vec<BigInt>]) -> bool {
        if self.order() != other.order() || images.len() != self.orders.len() {
            return false;
        }
        for (img, d) in images.iter().zip(&self.orders) {
            if img.len() != other.orders.len() {
                return false;
            }
            let scaled: Vec<BigInt> = img.iter().map(|c| c * d).collect();
            if other.normalize(&scaled).iter().any(|c| !c.is_zero()) {
                return false;
            }
        }
        generates(other, images)
    }
}

impl FiniteQuadraticForm {
    /// Whether generator images define a bijection `phi` with
    /// `q_other(phi x) = sign * q_self(x)`.
    pub fn is_isometry_map(&self, other: &Self, images: &[Vec<BigInt>], sign: i32) -> bool {
        if !self.is_bijection(other, images) {
            return false;
        }
        let sg = BigRational::from_integer(sign.into());
        let k = self.orders.len();
        for i in 0..k {
            if other.q_of(&images[i]) != reduce_mod(&(&sg * &self.q[i]), 2) {
                return false;
            }
            for j in 0..i {
                if other.b_of(&images[i], &images[j]) != reduce_mod(&(&sg * &self.b[i][j]), 1) {
                    return false;
                }
            }
        }
        true
    }
}

/// Whether the given elements generate the group.
fn generates(f: &FiniteQuadraticForm, elems: &[Vec<BigInt>]) -> bool {
    let n = f.orders.len();
    if n == 0 {
        return true;
    }
    let mut rows: Vec<Vec<BigInt>> = elems.to_vec();
    for (i, d) in f.orders.iter().enumerate() {
        let mut r = vec![BigInt::zero(); n];
        r[i] = d.clone();
        rows.push(r);
    }
    let m = ZMatrix::from_rows_with_cols(rows, n).unwrap();
    let h = m.hnf();
    h.nrows() == n && (0..n).all(|i| h[(i, i)].is_one())
}

/// Integer tables for a form: exponent `n`, `q` numerators mod `2n`,
/// `b` numerators mod `n`, and all elements in mixed radix.
struct Table {
    orders: Vec<i64>,
    n: i64,
    qg: Vec<i128>,
    bg: Vec<Vec<i128>>,
    size: u64,
    q: Vec<i128>,
    ord: Vec<i64>,
}

impl Table {
    fn new(f: &FiniteQuadraticForm) -> Result<Self> {
        Self::with_exponent(f, &f.exponent())
    }

    fn with_exponent(f: &FiniteQuadraticForm, n: &BigInt) -> Result<Self> {
        let size = f.order();
        let size = size
            .to_u64()
            .filter(|&s| s <= SEARCH_LIMIT)
            .ok_or_else(|| Error::SearchExhausted(format!("finite form of order {} too large", f.order())))?;
        let nn = n.to_i64().unwrap();
        let nr = BigRational::from_integer(n.clone());
        let orders: Vec<i64> = f.orders.iter().map(|d| d.to_i64().unwrap()).collect();
        let qg: Vec<i128> = f.q.iter().map(|v| (v * &nr).to_integer().to_i128().unwrap()).collect();
        let bg: Vec<Vec<i128>> =
            f.b.iter()
                .map(|r| r.iter().map(|v| (v * &nr).to_integer().to_i128().unwrap()).collect())
                .collect();
        let mut t = Table {
            orders,
            n: nn,
            qg,
            bg,
            size,
            q: Vec::with_capacity(size as usize),
            ord: Vec::with_capacity(size as usize),
        };
        for e in 0..size {
            let x = t.coords(e);
            t.q.push(t.q_num(&x));
            t.ord.push(t.elem_order(&x));
        }
        Ok(t)
    }

    fn coords(&self, mut e: u64) -> Vec<i64> {
        self.orders
            .iter()
            .map(|&d| {
                let c = (e % d as u64) as i64;
                e /= d as u64;
                c
            })
            .collect()
    }

    fn q_num(&self, x: &[i64]) -> i128 {
        let m = 2 * self.n as i128;
        let k = x.len();
        let mut acc: i128 = 0;
        for i in 0..k {
            if x[i] == 0 {
                continue;
            }
            let xi = x[i] as i128;
            acc = (acc + xi * xi % m * self.qg[i]) % m;
            for j in i + 1..k {
                if x[j] != 0 {
                    acc = (acc + 2 * (xi * x[j] as i128 % m) * self.bg[i][j]) % m;
                }
            }
        }
        acc.rem_euclid(m)
    }

    fn b_num(&self, x: &[i64], y: &[i64]) -> i128 {
        let m = self.n as i128;
        let mut acc: i128 = 0;
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            for (j, &yj) in y.iter().enumerate() {
                if yj != 0 {
                    acc = (acc + (xi as i128 * yj as i128 % m) * self.bg[i][j]) % m;
                }
            }
        }
        acc.rem_euclid(m)
    }

    fn elem_order(&self, x: &[i64]) -> i64 {
        x.iter()
            .zip(&self.orders)
            .fold(1i64, |acc, (&c, &d)| acc.lcm(&(d / c.gcd(&d))))
    }
}

/// An orthogonal basis of a p-primary form (odd p) with
/// `b(x_k, x_k) = units_k / p^exps_k`.
struct Diagonal {
    basis: Vec<Vec<BigInt>>,
    exps: Vec<u32>,
    units: Vec<BigInt>,
}

fn diagonalize_odd(f: &FiniteQuadraticForm, p: &BigInt) -> Result<Diagonal> {
    let k = f.orders.len();
    let mut basis: Vec<Vec<BigInt>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect();
    let mut ords = f.orders.clone();
    let mut out = Diagonal {
        basis: Vec::new(),
        exps: Vec::new(),
        units: Vec::new(),
    };
    let unit_numerator = |x: &[BigInt], a: &BigInt| -> Option<BigInt> {
        let v = f.b_of(x, x) * BigRational::from_integer(a.clone());
        let n = v.to_integer();
        (!(&n % p).is_zero()).then_some(n)
    };
    while !basis.is_empty() {
        let a = ords.iter().max().unwrap().clone();
        let tops: Vec<usize> = (0..basis.len()).filter(|&i| ords[i] == a).collect();
        let mut pick = None;
        for &i in &tops {
            if let Some(u) = unit_numerator(&basis[i], &a) {
                pick = Some((i, basis[i].clone(), u));
                break;
            }
        }
        if pick.is_none() {
            'outer: for &i in &tops {
                for j in 0..basis.len() {
                    if j == i {
                        continue;
                    }
                    let x: Vec<BigInt> = basis[i].iter().zip(&basis[j]).map(|(s, t)| s + t).collect();
                    let x = f.normalize(&x);
                    if let Some(u) = unit_numerator(&x, &a) {
                        pick = Some((i, x, u));
                        break 'outer;
                    }
                }
            }
        }
        let (i, x, u) = pick.ok_or(Error::Degenerate)?;
        basis.remove(i);
        ords.remove(i);
        let uinv = inv_mod(&u, &a).ok_or(Error::Degenerate)?;
        let ar = BigRational::from_integer(a.clone());
        for y in basis.iter_mut() {
            let c = ((f.b_of(y, &x) * &ar).to_integer() * &uinv).mod_floor(&a);
            let z: Vec<BigInt> = y.iter().zip(&x).map(|(s, t)| s - &c * t).collect();
            *y = f.normalize(&z);
        }
        out.exps.push(valuation(&a, p));
        out.units.push(u.mod_floor(&a));
        out.basis.push(x);
    }
    Ok(out)
}

/// Brings one Jordan component (diagonal units modulo `m = p^e`) to the
/// shape `(1, ..., 1, delta)` by changes of basis on adjacent pairs.
fn normalize_component(
    f: &FiniteQuadraticForm,
    p: &BigInt,
    e: u32,
    xs: &mut [Vec<BigInt>],
    us: &mut [BigInt],
) -> Result<()> {
    let m = p.pow(e);
    let combine = |a: &BigInt, x: &[BigInt], b: &BigInt, y: &[BigInt]| -> Vec<BigInt> {
        let z: Vec<BigInt> = x.iter().zip(y).map(|(s, t)| a * s + b * t).collect();
        f.normalize(&z)
    };
    let zero = vec![BigInt::zero(); xs.first().map_or(0, |x| x.len())];
    for i in 0..us.len().saturating_sub(1) {
        if us[i].is_one() {
            continue;
        }
        if legendre(&us[i], p)? == 1 {
            let s = sqrt_mod_prime_power(&inv_mod(&us[i], &m).unwrap(), p, e)
                .ok_or_else(|| Error::Unsupported(format!("square root modulo {p}")))?;
            xs[i] = combine(&s, &xs[i], &BigInt::zero(), &zero);
            us[i] = BigInt::one();
            continue;
        }
        let (u, v) = (us[i].clone(), us[i + 1].clone());
        let vinv = inv_mod(&v, &m).unwrap();
        let mut found = None;
        let mut alpha = BigInt::zero();
        while &alpha < p {
            let w = ((BigInt::one() - &u * &alpha * &alpha) * &vinv).mod_floor(&m);
            if legendre(&w, p)? == 1 {
                if let Some(beta) = sqrt_mod_prime_power(&w, p, e) {
                    found = Some((alpha.clone(), beta));
                    break;
                }
            }
            alpha += 1;
        }
        let (alpha, beta) = found.ok_or_else(|| Error::Unsupported(format!("no representation of 1 modulo {p}")))?;
        let nx = combine(&alpha, &xs[i], &beta, &xs[i + 1]);
        let ny = combine(&(-&beta * &v), &xs[i], &(&alpha * &u), &xs[i + 1]);
        xs[i] = nx;
        xs[i + 1] = ny;
        us[i] = BigInt::one();
        us[i + 1] = (&u * &v).mod_floor(&m);
    }
    Ok(())
}

/// Constructive isometry (times `sign`) between p-primary forms for odd
/// `p`, via orthogonal diagonalization and normalization of each Jordan
/// component.
fn odd_p_isometry(
    a: &FiniteQuadraticForm,
    b: &FiniteQuadraticForm,
    p: &BigInt,
    sign: i32,
) -> Result<Option<Vec<Vec<BigInt>>>> {
    let da = diagonalize_odd(a, p)?;
    let mut db = diagonalize_odd(b, p)?;
    for u in db.units.iter_mut() {
        *u *= sign;
    }
    let mut scales: Vec<u32> = da.exps.clone();
    scales.sort();
    scales.dedup();
    let mut xa: Vec<Vec<BigInt>> = Vec::new();
    let mut xb: Vec<Vec<BigInt>> = Vec::new();
    let mut exps = Vec::new();
    let mut units = Vec::new();
    for &e in &scales {
        let m = p.pow(e);
        let ia: Vec<usize> = (0..da.exps.len()).filter(|&i| da.exps[i] == e).collect();
        let ib: Vec<usize> = (0..db.exps.len()).filter(|&i| db.exps[i] == e).collect();
        if ia.len() != ib.len() {
            return Ok(None);
        }
        let mut ax: Vec<Vec<BigInt>> = ia.iter().map(|&i| da.basis[i].clone()).collect();
        let mut au: Vec<BigInt> = ia.iter().map(|&i| da.units[i].mod_floor(&m)).collect();
        let mut bx: Vec<Vec<BigInt>> = ib.iter().map(|&i| db.basis[i].clone()).collect();
        let mut bu: Vec<BigInt> = ib.iter().map(|&i| db.units[i].mod_floor(&m)).collect();
        normalize_component(a, p, e, &mut ax, &mut au)?;
        normalize_component(b, p, e, &mut bx, &mut bu)?;
        let last = au.len() - 1;
        let ratio = (&bu[last] * inv_mod(&au[last], &m).unwrap()).mod_floor(&m);
        if legendre(&ratio, p)? != 1 {
            return Ok(None);
        }
        let s = sqrt_mod_prime_power(&ratio, p, e).unwrap();
        let scaled: Vec<BigInt> = ax[last].iter().map(|c| c * &s).collect();
        ax[last] = a.normalize(&scaled);
        au[last] = bu[last].clone();
        for i in 0..ax.len() {
            exps.push(e);
            units.push(au[i].clone());
        }
        xa.extend(ax);
        xb.extend(bx);
    }
    // g_i = sum_k b(g_i, x_k) / b(x_k, x_k) x_k in the orthogonal basis xa
    let k = a.orders.len();
    let mut images = vec![vec![BigInt::zero(); b.orders.len()]; k];
    for i in 0..k {
        let mut g = vec![BigInt::zero(); k];
        g[i] = BigInt::one();
        for (kk, x) in xa.iter().enumerate() {
            let m = p.pow(exps[kk]);
            let num = (a.b_of(&g, x) * BigRational::from_integer(m.clone())).to_integer();
            let c = (num * inv_mod(&units[kk], &m).unwrap()).mod_floor(&m);
            for (o, y) in images[i].iter_mut().zip(&xb[kk]) {
                *o += &c * y;
            }
        }
        images[i] = b.normalize(&images[i]);
    }
    if !a.is_isometry_map(b, &images, sign) {
        return Err(Error::Unsupported(
            "odd-prime normal form produced a non-isometry".into(),
        ));
    }
    Ok(Some(images))
}

/// Backtracking search for an isometry (times `sign`) between p-primary
/// forms with equal invariants.
fn search_p_isometry(a: &FiniteQuadraticForm, b: &FiniteQuadraticForm, sign: i32) -> Result<Option<Vec<Vec<BigInt>>>> {
    let n = a.exponent().lcm(&b.exponent());
    let ta_gens = {
        let nr = BigRational::from_integer(n.clone());
        let qg: Vec<i128> = a.q.iter().map(|v| (v * &nr).to_integer().to_i128().unwrap()).collect();
        let bg: Vec<Vec<i128>> =
            a.b.iter()
                .map(|r| r.iter().map(|v| (v * &nr).to_integer().to_i128().unwrap()).collect())
                .collect();
        (qg, bg)
    };
    let tb = Table::with_exponent(b, &n)?;
    let nn = tb.n as i128;
    let k = a.orders.len();
    let a_orders: Vec<i64> = a.orders.iter().map(|d| d.to_i64().unwrap()).collect();
    let s = sign as i128;
    // candidates per generator
    let mut index: HashMap<(i64, i128), Vec<u64>> = HashMap::new();
    for e in 0..tb.size {
        index.entry((tb.ord[e as usize], tb.q[e as usize])).or_default().push(e);
    }
    let cands: Vec<&[u64]> = (0..k)
        .map(|i| {
            let target = (s * ta_gens.0[i]).rem_euclid(2 * nn);
            index.get(&(a_orders[i], target)).map(|v| v.as_slice()).unwrap_or(&[])
        })
        .collect();
    if cands.iter().any(|c| c.is_empty()) {
        return Ok(None);
    }
    let mut chosen: Vec<Vec<i64>> = Vec::with_capacity(k);
    let mut result = None;
    backtrack(&tb, &ta_gens.1, s, &cands, &mut chosen, b, &mut result);
    Ok(result)
}

fn backtrack(
    tb: &Table,
    a_b: &[Vec<i128>],
    s: i128,
    cands: &[&[u64]],
    chosen: &mut Vec<Vec<i64>>,
    bform: &FiniteQuadraticForm,
    result: &mut Option<Vec<Vec<BigInt>>>,
) -> bool {
    let i = chosen.len();
    let nn = tb.n as i128;
    if i == cands.len() {
        let imgs: Vec<Vec<BigInt>> = chosen
            .iter()
            .map(|v| v.iter().map(|&c| BigInt::from(c)).collect())
            .collect();
        if generates(bform, &imgs) {
            *result = Some(imgs);
            return true;
        }
        return false;
    }
    for &e in cands[i] {
        let y = tb.coords(e);
        let ok = (0..i).all(|j| tb.b_num(&y, &chosen[j]) == (s * a_b[i][j]).rem_euclid(nn));
        if !ok {
            continue;
        }
        chosen.push(y);
        if backtrack(tb, a_b, s, cands, chosen, bform, result) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// An anti-isometry between two finite quadratic forms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlueMap {
    source: FiniteQuadraticForm,
    target: FiniteQuadraticForm,
    images: Vec<Vec<BigInt>>,
}

impl GlueMap {
    /// Builds and validates a glue map from generator images.
    pub fn new(source: FiniteQuadraticForm, target: FiniteQuadraticForm, images: Vec<Vec<BigInt>>) -> Result<Self> {
        let images = images.iter().map(|v| target.normalize(v)).collect();
        let g = GlueMap { source, target, images };
        g.validate()?;
        Ok(g)
    }

    /// Searches an anti-isometry `source -> target`.
    pub fn find(source: &FiniteQuadraticForm, target: &FiniteQuadraticForm) -> Result<Option<Self>> {
        Ok(source.find_isometry(target, -1)?.map(|images| GlueMap {
            source: source.clone(),
            target: target.clone(),
            images,
        }))
    }

    pub fn source(&self) -> &FiniteQuadraticForm {
        &self.source
    }

    pub fn target(&self) -> &FiniteQuadraticForm {
        &self.target
    }

    pub fn images(&self) -> &[Vec<BigInt>] {
        &self.images
    }

    pub fn apply(&self, x: &[BigInt]) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.target.num_generators()];
        for (xi, img) in x.iter().zip(&self.images) {
            for (o, c) in out.iter_mut().zip(img) {
                *o += xi * c;
            }
        }
        self.target.normalize(&out)
    }

    /// Checks bijectivity and `q_target(phi x) = -q_source(x)` on generators
    /// and generator pairs (which determines it on the whole group).
    pub fn validate(&self) -> Result<()> {
        let k = self.source.num_generators();
        if self.images.len() != k {
            return Err(Error::InvalidGlueMap(format!(
                "{} images for {} generators",
                self.images.len(),
                k
            )));
        }
        if !self.source.is_bijection(&self.target, &self.images) {
            return Err(Error::InvalidGlueMap("not a group isomorphism".into()));
        }
        for i in 0..k {
            let qi = self.target.q_of(&self.images[i]);
            if qi != reduce_mod(&-&self.source.q[i], 2) {
                return Err(Error::InvalidGlueMap(format!(
                    "q(phi(g{i})) = {} but -q(g{i}) = {}",
                    format_rational(&qi),
                    format_rational(&reduce_mod(&-&self.source.q[i], 2))
                )));
            }
            for j in 0..i {
                let bij = self.target.b_of(&self.images[i], &self.images[j]);
                if bij != reduce_mod(&-&self.source.b[i][j], 1) {
                    return Err(Error::InvalidGlueMap(format!(
                        "b(phi(g{i}), phi(g{j})) does not match -b(g{i}, g{j})"
                    )));
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FormDoc {
    orders: Vec<String>,
    q: Vec<String>,
    b: Vec<Vec<String>>,
}

impl Serialize for FiniteQuadraticForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FormDoc {
            orders: self.orders.iter().map(|d| d.to_string()).collect(),
            q: self.q.iter().map(format_rational).collect(),
            b: self.b.iter().map(|r| r.iter().map(format_rational).collect()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiniteQuadraticForm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let doc = FormDoc::deserialize(d)?;
        let orders = doc
            .orders
            .iter()
            .map(|s| parse_int(s))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        let q = doc
            .q
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        let b = doc
            .b
            .iter()
            .map(|r| r.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        FiniteQuadraticForm::new(orders, q, b).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GlueDoc {
    source: FiniteQuadraticForm,
    target: FiniteQuadraticForm,
    images: Vec<Vec<String>>,
}

impl Serialize for GlueMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GlueDoc {
            source: self.source.clone(),
            target: self.target.clone(),
            images: self
                .images
                .iter()
                .map(|r| r.iter().map(|c| c.to_string()).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GlueMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let doc = GlueDoc::deserialize(d)?;
        let images = doc
            .images
            .iter()
            .map(|r| r.iter().map(|s| parse_int(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        GlueMap::new(doc.source, doc.target, images).map_err(D::Error::custom)
    }
}
