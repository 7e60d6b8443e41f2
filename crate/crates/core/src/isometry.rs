//! Isometries of lattices: validation, kernels, twists, integrality powers
//! and invariant forms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{is_prime, trial_factor, valuation};
use crate::error::{Error, Result};
use crate::json::{parse_rational_rows, rational_rows};
use crate::lattice::fqf::FiniteQuadraticForm;
use crate::lattice::{Embedded, Lattice};
use crate::linalg::{order_mod, rational_span_basis, QMatrix, ZMatrix};
use crate::polyarith::{discriminant, is_salem, resultant, trace_polynomial, IntPolynomial};

/// A rational isometry of a lattice: `M^T G M = G`, acting on column
/// coordinate vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isometry {
    lattice: Lattice,
    matrix: QMatrix,
}

/// Exact check `M^T G M = G`.
pub fn is_isometry(l: &Lattice, m: &QMatrix) -> bool {
    if m.nrows() != l.rank() || m.ncols() != l.rank() {
        return false;
    }
    let g = l.gram().to_rational();
    &(&m.transpose() * &g) * m == g
}

impl Isometry {
    pub fn new(lattice: Lattice, matrix: QMatrix) -> Result<Self> {
        if matrix.nrows() != lattice.rank() || matrix.ncols() != lattice.rank() {
            return Err(Error::Dimension(format!(
                "{}x{} matrix on a rank {} lattice",
                matrix.nrows(),
                matrix.ncols(),
                lattice.rank()
            )));
        }
        if !is_isometry(&lattice, &matrix) {
            return Err(Error::NotIsometry);
        }
        Ok(Isometry { lattice, matrix })
    }

    pub fn from_integer(lattice: Lattice, matrix: ZMatrix) -> Result<Self> {
        Self::new(lattice, matrix.to_rational())
    }

    pub fn identity(lattice: Lattice) -> Self {
        let n = lattice.rank();
        Isometry {
            lattice,
            matrix: QMatrix::identity(n),
        }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn matrix(&self) -> &QMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.lattice.rank()
    }

    pub fn is_integral(&self) -> bool {
        self.matrix.is_integral()
    }

    pub fn integer_matrix(&self) -> Option<ZMatrix> {
        self.matrix.to_integer()
    }

    /// Characteristic polynomial `det(x - M)`; must be integral.
    pub fn charpoly(&self) -> Result<IntPolynomial> {
        let cp = self.matrix.charpoly();
        if cp.iter().any(|c| !c.is_integer()) {
            return Err(Error::NonIntegralCharPoly);
        }
        Ok(IntPolynomial::new(cp.into_iter().map(|c| c.to_integer()).collect()))
    }

    pub fn pow(&self, n: u64) -> Isometry {
        Isometry {
            lattice: self.lattice.clone(),
            matrix: self.matrix.pow(n),
        }
    }

    /// `M^{-1} = G^{-1} M^T G`.
    pub fn inverse(&self) -> Isometry {
        Isometry {
            lattice: self.lattice.clone(),
            matrix: self.matrix.inverse().expect("isometries are invertible"),
        }
    }

    pub fn compose(&self, other: &Isometry) -> Result<Isometry> {
        if self.lattice != other.lattice {
            return Err(Error::Dimension("isometries of different lattices".into()));
        }
        Ok(Isometry {
            lattice: self.lattice.clone(),
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn direct_sum(&self, other: &Isometry) -> Isometry {
        Isometry {
            lattice: self.lattice.direct_sum(&other.lattice),
            matrix: self.matrix.block_diag(&other.matrix),
        }
    }

    pub fn apply(&self, v: &[BigRational]) -> Vec<BigRational> {
        self.matrix.mul_vec(v)
    }

    pub fn apply_int(&self, v: &[BigInt]) -> Vec<BigRational> {
        let q: Vec<BigRational> = v.iter().map(|c| BigRational::from_integer(c.clone())).collect();
        self.matrix.mul_vec(&q)
    }

    /// `M + M^{-1}`.
    pub fn trace_element(&self) -> QMatrix {
        &self.matrix + &self.inverse().matrix
    }

    /// Transports the isometry to the lattice with the given basis (rows,
    /// rational, in current coordinates); the basis must span an
    /// `M`-invariant module.
    pub fn in_basis(&self, lattice: Lattice, basis: &QMatrix) -> Result<Isometry> {
        // M B^T = B^T C
        let bt = basis.transpose();
        let rhs = &self.matrix * &bt;
        let c = bt
            .solve(&rhs)
            .ok_or_else(|| Error::Precondition("basis does not span an invariant module".into()))?;
        Isometry::new(lattice, c)
    }
}

/// Saturated sublattice `ker p(f)` with the restricted isometry.
pub fn kernel_sublattice(f: &Isometry, p: &IntPolynomial) -> Result<(Embedded, Isometry)> {
    let cp = f.charpoly()?;
    if p.is_zero() || cp.div_exact(p).is_none() {
        return Err(Error::NotADivisor);
    }
    let pf = p.eval_qmatrix(f.matrix());
    let (num, _) = pf.clear_denominators();
    let k = num.integer_kernel();
    if k.nrows() == 0 {
        return Err(Error::Degenerate);
    }
    let lattice = f.lattice.sublattice(&k)?;
    let restricted = f.in_basis(lattice.clone(), &k.to_rational())?;
    Ok((Embedded { lattice, basis: k }, restricted))
}

/// Smallest `n >= 1` with `f^n(L) = L`, together with `f^n`.
///
/// With `Z[f]L` the module generated by `L, fL, ..., f^(d-1)L` and `k` the
/// exponent of `Z[f]L / L`, `f^n` preserves `L` as soon as `f^n = 1` on
/// `Z[f]L / k Z[f]L`; the order there is then refined over its prime
/// divisors with an exact modular test.
pub fn power_to_integral(f: &Isometry) -> Result<(u64, Isometry)> {
    f.charpoly()?;
    if f.is_integral() {
        return Ok((1, f.clone()));
    }
    let n = f.rank();
    let m = f.matrix();
    let mut gens: Vec<Vec<BigRational>> = Vec::with_capacity(n * n);
    let mut power = QMatrix::identity(n);
    for _ in 0..n {
        for j in 0..n {
            gens.push(power.col(j));
        }
        power = m * &power;
    }
    let b = rational_span_basis(&QMatrix::from_rows_with_cols(gens, n)?);
    let k = b.denominator();
    let bt = b.transpose();
    let bt_inv = bt.inverse().ok_or(Error::Degenerate)?;
    // f in the basis of Z[f]L
    let a = (&(&bt_inv * m) * &bt)
        .to_integer()
        .ok_or_else(|| Error::Precondition("Z[f]L is not f-stable".into()))?;
    let y = bt_inv
        .to_integer()
        .ok_or_else(|| Error::Precondition("L is not contained in Z[f]L".into()))?;
    let kr = BigRational::from_integer(k.clone());
    let kbt = bt
        .map(|x| x * &kr)
        .to_integer()
        .expect("k clears the denominators of the basis");
    let preserves = |e: &BigInt| -> bool {
        let ae = mat_pow_mod(&a, e, &k);
        let p = &(&kbt * &ae) * &y;
        p.reduce_mod(&k).is_zero()
    };
    let mut order = order_mod(&a, &k)?;
    let (factors, rest) = trial_factor(&order, 1_000_000);
    let mut primes: Vec<BigInt> = factors.into_iter().map(|(p, _)| p).collect();
    if rest > BigInt::one() && is_prime(&rest) {
        primes.push(rest);
    }
    for q in primes {
        while (&order % &q).is_zero() && preserves(&(&order / &q)) {
            order /= &q;
        }
    }
    let e = order
        .to_u64()
        .ok_or_else(|| Error::Unsupported(format!("integrality exponent {order} too large")))?;
    let fe = f.pow(e);
    if !fe.is_integral() {
        return Err(Error::Precondition("power is not integral".into()));
    }
    Ok((e, fe))
}

fn mat_pow_mod(a: &ZMatrix, e: &BigInt, k: &BigInt) -> ZMatrix {
    let n = a.nrows();
    let mut result = ZMatrix::identity(n);
    let mut base = a.reduce_mod(k);
    let mut e = e.clone();
    while e.is_positive() {
        if e.is_odd() {
            result = (&result * &base).reduce_mod(k);
        }
        base = (&base * &base).reduce_mod(k);
        e >>= 1;
    }
    result
}

/// An element `a(f + f^{-1})` of `Z[f + f^{-1}]`, given by a polynomial in
/// `w = f + f^{-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TwistElement {
    poly: IntPolynomial,
}

impl TwistElement {
    pub fn new(poly: IntPolynomial) -> Self {
        TwistElement { poly }
    }

    pub fn scalar(c: impl Into<BigInt>) -> Self {
        TwistElement {
            poly: IntPolynomial::constant(c.into()),
        }
    }

    /// `w = f + f^{-1}`.
    pub fn w() -> Self {
        TwistElement {
            poly: IntPolynomial::x(),
        }
    }

    pub fn poly(&self) -> &IntPolynomial {
        &self.poly
    }

    pub fn pow(&self, n: u32) -> Self {
        TwistElement { poly: self.poly.pow(n) }
    }

    pub fn mul(&self, o: &Self) -> Self {
        TwistElement {
            poly: &self.poly * &o.poly,
        }
    }

    pub fn matrix(&self, f: &Isometry) -> QMatrix {
        self.poly.eval_qmatrix(&f.trace_element())
    }

    /// Absolute norm from `k = Q(w)`: `|Res(r, t)|` with `r` the trace
    /// polynomial of `s`.
    pub fn norm(&self, s: &IntPolynomial) -> Result<BigInt> {
        let r = trace_polynomial(s)?;
        Ok(resultant(&r, &self.poly)?.abs())
    }
}

/// The twist `<x, y>_a = <a x, y>`; `f` stays an isometry.
pub fn twist(f: &Isometry, a: &TwistElement) -> Result<(Lattice, Isometry)> {
    let am = a.matrix(f);
    let g = f.lattice.gram().to_rational();
    let gt = &am.transpose() * &g;
    let gi = gt.to_integer().ok_or(Error::NonIntegralTwist)?;
    if !gi.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let l = Lattice::new(gi)?;
    let f2 = Isometry::new(l.clone(), f.matrix.clone())?;
    Ok((l, f2))
}

/// Outcome of checking that the twist by `t^n` has a hyperbolic p-part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistSplitReport {
    pub prime: BigInt,
    pub exponent: u32,
    pub twisted: Lattice,
    pub determinant: BigInt,
    pub p_valuation: u32,
    pub global_determinant_ok: bool,
    pub p_primary_form: FiniteQuadraticForm,
    pub hyperbolic: bool,
    pub passed: bool,
}

/// Twists by `t^n`, where `t` has norm `±p`, and checks that the p-part of
/// the determinant is `p^(2n)` and the p-primary discriminant form is the
/// hyperbolic form of scale `1/p^n`.
pub fn twist_split_certificate(f: &Isometry, t: &TwistElement, n: u32, p: &BigInt) -> Result<TwistSplitReport> {
    if n == 0 {
        return Err(Error::ZeroExponent);
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p.to_string()));
    }
    let s = f.charpoly()?;
    is_salem(&s).map_err(|r| Error::NotSalem(r.to_string()))?;
    let det = f.lattice.determinant();
    let disc = discriminant(&s)?;
    let excluded = BigInt::from(2) * &det * &disc;
    if (&excluded % p).is_zero() {
        return Err(Error::Precondition(format!(
            "p = {p} divides 2 * det L * disc s = {excluded}"
        )));
    }
    let norm = t.norm(&s)?;
    if &norm != p {
        return Err(Error::Precondition(format!("norm of t is {norm}, not {p}")));
    }
    let (twisted, _) = twist(f, &t.pow(n))?;
    let d = twisted.determinant();
    let v = valuation(&d, p);
    let global = d.abs() == det.abs() * p.pow(2 * n);
    let form = twisted.discriminant_form()?.p_primary_part(p);
    let hyp = FiniteQuadraticForm::hyperbolic(&p.pow(n))?;
    let hyperbolic = form.is_isometric(&hyp, 1)?;
    Ok(TwistSplitReport {
        prime: p.clone(),
        exponent: n,
        twisted,
        determinant: d,
        p_valuation: v,
        global_determinant_ok: global,
        p_primary_form: form,
        hyperbolic,
        passed: v == 2 * n && global && hyperbolic,
    })
}

/// Basis of the symmetric matrices `G` with `f^T G f = G`, each scaled to a
/// primitive integer matrix.
pub fn invariant_symmetric_forms(f: &QMatrix) -> Vec<ZMatrix> {
    let n = f.nrows();
    let idx: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let m = idx.len();
    let mut sys = QMatrix::zeros(m, m);
    for (u, &(i, j)) in idx.iter().enumerate() {
        let g = QMatrix::from_fn(n, n, |a, b| {
            if (a, b) == (i, j) || (a, b) == (j, i) {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        });
        let e = &(&(&f.transpose() * &g) * f) - &g;
        for (r, &(a, b)) in idx.iter().enumerate() {
            sys[(r, u)] = e[(a, b)].clone();
        }
    }
    sys.nullspace()
        .into_iter()
        .map(|v| {
            let g = QMatrix::from_fn(n, n, |a, b| {
                let u = idx.iter().position(|&p| p == (a.min(b), a.max(b))).unwrap();
                v[u].clone()
            });
            primitive_integral(&g)
        })
        .collect()
}

fn primitive_integral(g: &QMatrix) -> ZMatrix {
    let (num, _) = g.clear_denominators();
    let c = num.to_rows().iter().flatten().fold(BigInt::zero(), |a, x| a.gcd(x));
    if c.is_zero() {
        return num;
    }
    num.map(|x| x / &c)
}

/// First non-degenerate integral combination of the invariant forms of `f`
/// (searched over growing boxes up to `radius`) with the given signature,
/// even if requested.
pub fn find_invariant_lattice(f: &QMatrix, signature: (usize, usize), even: bool, radius: i64) -> Result<Lattice> {
    let basis = invariant_symmetric_forms(f);
    let k = basis.len();
    if k == 0 {
        return Err(Error::SearchExhausted("no invariant symmetric forms".into()));
    }
    for r in 1..=radius {
        let mut c = vec![-r; k];
        loop {
            if c.iter().any(|x| x.abs() == r) {
                let mut g = ZMatrix::zeros(f.nrows(), f.nrows());
                for (ci, b) in c.iter().zip(&basis) {
                    g = &g + &b.map(|x| x * ci);
                }
                if let Ok(l) = Lattice::new(g) {
                    if (!even || l.is_even()) && l.signature() == signature {
                        return Ok(l);
                    }
                }
            }
            let mut i = 0;
            while i < k && c[i] == r {
                c[i] = -r;
                i += 1;
            }
            if i == k {
                break;
            }
            c[i] += 1;
        }
    }
    Err(Error::SearchExhausted(format!(
        "no invariant form of signature {signature:?} within radius {radius}"
    )))
}

/// Companion matrix of a monic polynomial (acting on column vectors).
pub fn companion(p: &IntPolynomial) -> Result<ZMatrix> {
    if !p.is_monic() || p.degree() == 0 {
        return Err(Error::NotMonic);
    }
    let d = p.degree();
    Ok(ZMatrix::from_fn(d, d, |i, j| {
        if j == d - 1 {
            -p.coeff(i)
        } else if i == j + 1 {
            BigInt::one()
        } else {
            BigInt::zero()
        }
    }))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IsometryDoc {
    lattice: Lattice,
    matrix: Vec<Vec<String>>,
}

impl Serialize for Isometry {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        IsometryDoc {
            lattice: self.lattice.clone(),
            matrix: rational_rows(&self.matrix),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Isometry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let doc = IsometryDoc::deserialize(d)?;
        let m = parse_rational_rows(&doc.matrix, doc.lattice.rank()).map_err(D::Error::custom)?;
        Isometry::new(doc.lattice, m).map_err(D::Error::custom)
    }
}
