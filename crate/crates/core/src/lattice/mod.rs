//! Integral lattices given by Gram matrices.
//!
//! Vectors are written in lattice coordinates; sublattices are described by
//! basis matrices whose rows are coordinate vectors. Rational vectors (for
//! the dual and for overlattices) use the same coordinates in `L ⊗ Q`.

pub mod fqf;
pub mod local;

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{rational_span_basis, QMatrix, ZMatrix};
use fqf::{FiniteQuadraticForm, GlueMap};

/// A non-degenerate integral lattice.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Lattice {
    gram: ZMatrix,
}

/// A sublattice together with its basis in the coordinates of the ambient
/// lattice (rows).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedded {
    pub lattice: Lattice,
    pub basis: ZMatrix,
}

/// An overlattice together with its basis in the coordinates of the
/// original lattice (rational rows).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Overlattice {
    pub lattice: Lattice,
    pub basis: QMatrix,
}

impl std::fmt::Debug for Lattice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Lattice({:?})", self.gram)
    }
}

fn dynkin(n: usize, edges: &[(usize, usize)]) -> Lattice {
    let mut g = ZMatrix::zeros(n, n);
    for i in 0..n {
        g[(i, i)] = BigInt::from(-2);
    }
    for &(a, b) in edges {
        g[(a, b)] = BigInt::one();
        g[(b, a)] = BigInt::one();
    }
    Lattice::new(g).expect("root lattices are non-degenerate")
}

fn chain(n: usize) -> Vec<(usize, usize)> {
    (1..n).map(|i| (i - 1, i)).collect()
}

impl Lattice {
    pub fn new(gram: ZMatrix) -> Result<Self> {
        if !gram.is_square() {
            return Err(Error::Dimension("Gram matrix must be square".into()));
        }
        if !gram.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        if gram.det().is_zero() {
            return Err(Error::Degenerate);
        }
        Ok(Lattice { gram })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Result<Self> {
        Self::new(crate::linalg::zmat(rows))
    }

    pub fn diagonal(entries: &[i64]) -> Result<Self> {
        let v: Vec<BigInt> = entries.iter().map(|&x| x.into()).collect();
        Self::new(ZMatrix::diagonal(&v))
    }

    /// The hyperbolic plane `U`.
    pub fn u() -> Self {
        Self::from_i64(&[&[0, 1], &[1, 0]]).unwrap()
    }

    /// `U(k)`: the hyperbolic plane scaled by `k`.
    pub fn u_scaled(k: &BigInt) -> Self {
        Self::u().scaled(k).expect("nonzero scale")
    }

    /// Negative definite `E8`.
    pub fn e8() -> Self {
        let mut e = chain(7);
        e.push((4, 7));
        dynkin(8, &e)
    }

    /// Negative definite `E7`.
    pub fn e7() -> Self {
        let mut e = chain(6);
        e.push((3, 6));
        dynkin(7, &e)
    }

    /// Negative definite `E6`.
    pub fn e6() -> Self {
        let mut e = chain(5);
        e.push((2, 5));
        dynkin(6, &e)
    }

    /// Negative definite `A_n`.
    pub fn a(n: usize) -> Self {
        dynkin(n, &chain(n))
    }

    /// Negative definite `D_n`, `n >= 4`.
    pub fn d(n: usize) -> Self {
        assert!(n >= 4);
        let mut e = chain(n - 1);
        e.push((n - 3, n - 1));
        dynkin(n, &e)
    }

    /// Named lattices: `U`, `E6`, `E7`, `E8`, `An`, `Dn`, the sums `3U`,
    /// `U+E8`, `3U+2E8`, and any of these followed by a scale `(k)`, as in
    /// `U(5)` or `A2(-1)`.
    pub fn named(name: &str) -> Result<Self> {
        let name = name.replace(' ', "");
        let unknown = || Error::Unsupported(format!("unknown lattice name `{name}`"));
        if let Some(open) = name.find('(') {
            let inner = name[open..]
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(unknown)?;
            let k = crate::json::parse_int(inner)?;
            return Self::named(&name[..open])?.scaled(&k);
        }
        let u = Self::u();
        let e8 = Self::e8();
        let index = |prefix: &str, min: usize| -> Option<usize> {
            name.strip_prefix(prefix)
                .and_then(|n| n.parse::<usize>().ok())
                .filter(|&n| n >= min)
        };
        match name.as_str() {
            "U" => Ok(u),
            "E6" => Ok(Self::e6()),
            "E7" => Ok(Self::e7()),
            "E8" => Ok(e8),
            "3U" => Ok(u.direct_sum(&u).direct_sum(&u)),
            "U+E8" => Ok(u.direct_sum(&e8)),
            "3U+2E8" => Ok(u.direct_sum(&u).direct_sum(&u).direct_sum(&e8).direct_sum(&e8)),
            _ => {
                if let Some(n) = index("A", 1) {
                    Ok(Self::a(n))
                } else if let Some(n) = index("D", 4) {
                    Ok(Self::d(n))
                } else {
                    Err(unknown())
                }
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &ZMatrix {
        &self.gram
    }

    pub fn direct_sum(&self, other: &Lattice) -> Lattice {
        Lattice {
            gram: self.gram.block_diag(&other.gram),
        }
    }

    /// `L(k)`: the form multiplied by `k`.
    pub fn scaled(&self, k: &BigInt) -> Result<Lattice> {
        Lattice::new(self.gram.scale(k))
    }

    pub fn determinant(&self) -> BigInt {
        self.gram.det()
    }

    pub fn is_unimodular(&self) -> bool {
        self.determinant().abs().is_one()
    }

    pub fn is_even(&self) -> bool {
        (0..self.rank()).all(|i| self.gram[(i, i)].is_even())
    }

    /// `(s+, s-)`, from sign changes of the characteristic polynomial of the
    /// Gram matrix (all its roots are real).
    pub fn signature(&self) -> (usize, usize) {
        signature_of(&self.gram)
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.signature().0 == 1
    }

    pub fn is_negative_definite(&self) -> bool {
        self.signature().0 == 0
    }

    pub fn is_positive_definite(&self) -> bool {
        self.signature().1 == 0
    }

    pub fn inner(&self, x: &[BigInt], y: &[BigInt]) -> BigInt {
        self.gram.bilinear(x, y)
    }

    pub fn norm(&self, x: &[BigInt]) -> BigInt {
        self.gram.bilinear(x, x)
    }

    pub fn inner_q(&self, x: &[BigRational], y: &[BigRational]) -> BigRational {
        self.gram.to_rational().bilinear(x, y)
    }

    /// Rows generate the dual lattice (in `L ⊗ Q` coordinates); this is the
    /// inverse Gram matrix.
    pub fn dual_basis(&self) -> QMatrix {
        self.gram.to_rational().inverse().expect("non-degenerate")
    }

    /// Whether a rational vector lies in the dual lattice.
    pub fn in_dual(&self, x: &[BigRational]) -> bool {
        self.gram.to_rational().mul_vec(x).iter().all(|c| c.is_integer())
    }

    /// The lattice spanned by the rows of `basis` (which must be independent).
    pub fn sublattice(&self, basis: &ZMatrix) -> Result<Lattice> {
        let g = &(basis * &self.gram) * &basis.transpose();
        Lattice::new(g)
    }

    /// Gram matrix `B G B^T` of rational rows.
    pub fn gram_of_rational(&self, basis: &QMatrix) -> QMatrix {
        &(basis * &self.gram.to_rational()) * &basis.transpose()
    }

    /// The discriminant form `(L^v / L, q_L)` of an even lattice.
    pub fn discriminant_form(&self) -> Result<FiniteQuadraticForm> {
        if !self.is_even() {
            return Err(Error::NotEven);
        }
        let snf = self.gram.snf();
        let n = self.rank();
        let mut orders = Vec::new();
        let mut lifts = Vec::new();
        for i in 0..n {
            let d = &snf.diag[i];
            if d.abs() > BigInt::one() {
                let col = snf.v.col(i);
                lifts.push(
                    col.iter()
                        .map(|c| BigRational::new(c.clone(), d.clone()))
                        .collect::<Vec<_>>(),
                );
                orders.push(d.abs());
            }
        }
        let lifts = QMatrix::from_rows_with_cols(lifts, n)?;
        let gq = self.gram.to_rational();
        let k = orders.len();
        let q: Vec<BigRational> = (0..k).map(|i| gq.bilinear(lifts.row(i), lifts.row(i))).collect();
        let b: Vec<Vec<BigRational>> = (0..k)
            .map(|i| (0..k).map(|j| gq.bilinear(lifts.row(i), lifts.row(j))).collect())
            .collect();
        let vinv = snf.v.to_rational().inverse().expect("unimodular");
        FiniteQuadraticForm::with_lifts(
            orders,
            q,
            b,
            lifts,
            Some(DualCoordinates {
                vinv,
                diag: snf.diag.iter().map(|d| d.abs()).collect(),
            }),
        )
    }

    /// The overlattice generated by `L` and the rows of `h` (elements of the
    /// dual lattice spanning an isotropic subgroup).
    pub fn overlattice_from_isotropic(&self, h: &QMatrix) -> Result<Overlattice> {
        if !self.is_even() {
            return Err(Error::NotEven);
        }
        let gq = self.gram.to_rational();
        for i in 0..h.nrows() {
            if !self.in_dual(h.row(i)) {
                return Err(Error::NotInDual);
            }
            let qv = gq.bilinear(h.row(i), h.row(i));
            if !(qv.is_integer() && qv.to_integer().is_even()) {
                return Err(Error::NotIsotropic(format!(
                    "generator {i} has q = {} mod 2",
                    crate::json::format_rational(&reduce_mod(&qv, 2))
                )));
            }
            for j in 0..i {
                let bv = gq.bilinear(h.row(i), h.row(j));
                if !bv.is_integer() {
                    return Err(Error::NotIsotropic(format!(
                        "b(h{j}, h{i}) = {} mod 1",
                        crate::json::format_rational(&reduce_mod(&bv, 1))
                    )));
                }
            }
        }
        let gens = ZMatrix::identity(self.rank()).to_rational().stack(h)?;
        let basis = rational_span_basis(&gens);
        let g = self.gram_of_rational(&basis);
        let g = g.to_integer().ok_or(Error::NonIntegralOverlattice)?;
        Ok(Overlattice {
            lattice: Lattice::new(g)?,
            basis,
        })
    }

    /// Overlattice of `M ⊕ N` defined by the graph of a glue map. Coordinates
    /// of the result's basis are those of `M ⊕ N`.
    pub fn glue_with_basis(m: &Lattice, n: &Lattice, phi: &GlueMap) -> Result<Overlattice> {
        let qm = m.discriminant_form()?;
        let qn = n.discriminant_form()?;
        if !phi.source().same_presentation(&qm) || !phi.target().same_presentation(&qn) {
            return Err(Error::InvalidGlueMap(
                "glue map is not between the discriminant forms of the given lattices".into(),
            ));
        }
        phi.validate()?;
        let (mr, nr) = (m.rank(), n.rank());
        let mut glue_rows = Vec::new();
        for (i, img) in phi.images().iter().enumerate() {
            let mut v = qm.lift(i).to_vec();
            let w = qn.lift_of(img);
            v.extend(w);
            glue_rows.push(v);
        }
        let sum = m.direct_sum(n);
        let glue = QMatrix::from_rows_with_cols(glue_rows, mr + nr)?;
        let ov = sum.overlattice_from_isotropic(&glue).map_err(|e| match e {
            Error::NotIsotropic(s) => Error::InvalidGlueMap(format!("graph not isotropic: {s}")),
            other => other,
        })?;
        Ok(ov)
    }

    pub fn glue(m: &Lattice, n: &Lattice, phi: &GlueMap) -> Result<Lattice> {
        Ok(Self::glue_with_basis(m, n, phi)?.lattice)
    }

    /// Orthogonal complement of a primitive non-degenerate sublattice given by
    /// basis rows.
    pub fn orthogonal_complement(&self, s: &ZMatrix) -> Result<Embedded> {
        if s.ncols() != self.rank() {
            return Err(Error::Dimension("sublattice basis has wrong width".into()));
        }
        if s.to_rational().rank() != s.nrows() {
            return Err(Error::Dimension("sublattice basis is not independent".into()));
        }
        if let Some(sat) = non_primitive_saturation(s) {
            return Err(Error::NotPrimitive {
                saturation: sat
                    .to_rows()
                    .iter()
                    .map(|r| r.iter().map(|c| c.to_string()).collect())
                    .collect(),
            });
        }
        let gs = &(s * &self.gram) * &s.transpose();
        if gs.det().is_zero() {
            return Err(Error::Degenerate);
        }
        let c = (s * &self.gram).integer_kernel();
        let g = &(&c * &self.gram) * &c.transpose();
        Ok(Embedded {
            lattice: Lattice::new(g)?,
            basis: c,
        })
    }

    /// All vectors `x` with `x^2 = m` in a definite lattice, sorted.
    pub fn enumerate_vectors_of_norm(&self, m: &BigInt) -> Result<Vec<Vec<BigInt>>> {
        let (sp, sn) = self.signature();
        let (g, target) = if sn == 0 {
            (self.gram.clone(), m.clone())
        } else if sp == 0 {
            (-&self.gram, -m)
        } else {
            return Err(Error::Indefinite);
        };
        let mut out = Vec::new();
        if target.is_negative() {
            return Ok(out);
        }
        fincke_pohst(&g, &BigRational::from_integer(target.clone()), |x, norm| {
            if norm == &BigRational::from_integer(target.clone()) {
                out.push(x.to_vec());
            }
        });
        out.sort();
        Ok(out)
    }

    /// Roots: vectors of square `-2`.
    pub fn roots(&self) -> Result<Vec<Vec<BigInt>>> {
        self.enumerate_vectors_of_norm(&BigInt::from(-2))
    }
}

/// Coordinates in the Smith basis of the dual: used to express dual vectors
/// in discriminant-group coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualCoordinates {
    pub vinv: QMatrix,
    pub diag: Vec<BigInt>,
}

/// Sign changes in a coefficient sequence (zeros skipped).
fn sign_changes<'a>(c: impl Iterator<Item = &'a BigInt>) -> usize {
    let mut last = 0;
    let mut n = 0;
    for x in c {
        let s = crate::arith::sign_of(x);
        if s == 0 {
            continue;
        }
        if last != 0 && s != last {
            n += 1;
        }
        last = s;
    }
    n
}

/// Signature of a symmetric integer matrix (Descartes' rule is exact for
/// real-rooted polynomials). Zero eigenvalues are not counted.
pub fn signature_of(g: &ZMatrix) -> (usize, usize) {
    let cp = g.charpoly();
    // strip the factor x^k
    let k = cp.iter().take_while(|c| c.is_zero()).count();
    let cp = &cp[k..];
    let pos = sign_changes(cp.iter());
    let neg_coeffs: Vec<BigInt> = cp
        .iter()
        .enumerate()
        .map(|(i, c)| if i % 2 == 1 { -c } else { c.clone() })
        .collect();
    let neg = sign_changes(neg_coeffs.iter());
    (pos, neg)
}

/// `x mod m` for rationals, in `[0, m)`.
pub fn reduce_mod(x: &BigRational, m: i64) -> BigRational {
    let mr = BigRational::from_integer(m.into());
    let k = (x / &mr).floor();
    x - k * mr
}

/// `None` if the row span is primitive (saturated) in `Z^n`, otherwise the
/// saturation basis.
pub fn non_primitive_saturation(s: &ZMatrix) -> Option<ZMatrix> {
    let snf = s.snf();
    if snf.diag.iter().all(|d| d.is_one()) {
        return None;
    }
    let t = s.integer_kernel();
    Some(t.integer_kernel())
}

/// Fincke-Pohst enumeration of all `x != 0` with `x^T G x <= bound` for a
/// positive definite integer matrix, in exact rational arithmetic. The
/// callback receives each vector and its norm.
pub fn fincke_pohst(g: &ZMatrix, bound: &BigRational, f: impl FnMut(&[BigInt], &BigRational)) {
    fincke_pohst_rational(&g.to_rational(), bound, f)
}

/// [`fincke_pohst`] for a positive definite rational matrix.
pub fn fincke_pohst_rational(g: &QMatrix, bound: &BigRational, mut f: impl FnMut(&[BigInt], &BigRational)) {
    let n = g.nrows();
    if n == 0 {
        return;
    }
    // q[i][i] and q[i][j] (j > i) with Q(x) = sum q_ii (x_i + sum_j q_ij x_j)^2
    let mut a = g.clone();
    for i in 0..n {
        for j in i + 1..n {
            let v = &a[(i, j)] / &a[(i, i)];
            a[(j, i)] = a[(i, j)].clone();
            a[(i, j)] = v;
        }
        for k in i + 1..n {
            for l in k..n {
                let v = &a[(k, i)] * &a[(i, l)];
                a[(k, l)] -= v;
            }
        }
    }
    let mut x = vec![BigInt::zero(); n];
    fp_rec(&a, n, n - 1, bound, &BigRational::zero(), &mut x, &mut f);
}

fn fp_rec(
    a: &QMatrix,
    n: usize,
    i: usize,
    remaining: &BigRational,
    acc: &BigRational,
    x: &mut Vec<BigInt>,
    f: &mut impl FnMut(&[BigInt], &BigRational),
) {
    // c = sum_{j>i} q_ij x_j; need q_ii (x_i + c)^2 <= remaining
    let mut c = BigRational::zero();
    for j in i + 1..n {
        if !x[j].is_zero() {
            c += &a[(i, j)] * BigRational::from_integer(x[j].clone());
        }
    }
    let qii = &a[(i, i)];
    let fits = |xi: &BigInt| -> Option<BigRational> {
        let t = BigRational::from_integer(xi.clone()) + &c;
        let v = qii * &t * &t;
        if &v <= remaining {
            Some(v)
        } else {
            None
        }
    };
    let center = (-c.clone()).round().to_integer();
    // walk outward from the center in both directions
    for dir in [1i32, -1] {
        let mut xi = if dir == 1 { center.clone() } else { &center - 1 };
        while let Some(v) = fits(&xi) {
            x[i] = xi.clone();
            let rem = remaining - &v;
            let tot = acc + &v;
            if i == 0 {
                if x.iter().any(|c| !c.is_zero()) {
                    f(x, &tot);
                }
            } else {
                fp_rec(a, n, i - 1, &rem, &tot, x, f);
            }
            xi += dir;
        }
    }
    x[i] = BigInt::zero();
}

/// Exact positive definiteness test by symmetric Gaussian elimination.
pub fn is_positive_definite_rational(g: &QMatrix) -> bool {
    let n = g.nrows();
    let mut a = g.clone();
    for i in 0..n {
        if !a[(i, i)].is_positive() {
            return false;
        }
        for k in i + 1..n {
            let m = &a[(k, i)] / &a[(i, i)];
            for l in i..n {
                let v = &m * &a[(i, l)];
                a[(k, l)] -= v;
            }
        }
    }
    true
}

/// Canonical lexicographic order on integer vectors.
pub fn lex_cmp(a: &[BigInt], b: &[BigInt]) -> Ordering {
    a.cmp(b)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LatticeDoc {
    rank: usize,
    gram: Vec<Vec<String>>,
}

impl Serialize for Lattice {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LatticeDoc {
            rank: self.rank(),
            gram: self
                .gram
                .to_rows()
                .iter()
                .map(|r| r.iter().map(|c| c.to_string()).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Lattice {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let doc = LatticeDoc::deserialize(d)?;
        if doc.gram.len() != doc.rank {
            return Err(D::Error::custom(format!(
                "gram has {} rows but rank is {}",
                doc.gram.len(),
                doc.rank
            )));
        }
        let rows = doc
            .gram
            .iter()
            .map(|r| r.iter().map(|c| crate::json::parse_int(c)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        let m = ZMatrix::from_rows_with_cols(rows, doc.rank).map_err(D::Error::custom)?;
        Lattice::new(m).map_err(D::Error::custom)
    }
}
