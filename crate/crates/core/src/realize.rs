//! Realizability of Salem numbers as dynamical degrees: the decision
//! procedure, the rational-isometry criterion, the Torelli-side checks and
//! the certificate pipeline (split prime, twist, glue, power, certify).

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime_u64, sqrt_mod};
use crate::error::{Error, Result};
use crate::isometry::{power_to_integral, twist, Isometry, TwistElement};
use crate::json::{int_rows, parse_int_rows};
use crate::lattice::fqf::GlueMap;
use crate::lattice::local::legendre;
use crate::lattice::{non_primitive_saturation, Lattice};
use crate::linalg::{order_mod, QMatrix, ZMatrix};
use crate::polyarith::{
    discriminant, is_salem, modp, power_min_poly, resultant, square_class_test, trace_polynomial, IntPolynomial,
};
use crate::positivity::{is_positive, ObstructionReport, Status};

pub const CERTIFICATE_VERSION: u32 = 1;
pub const SEED_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceClass {
    Torus,
    K3,
    Enriques,
}

impl SurfaceClass {
    pub const ALL: [SurfaceClass; 3] = [SurfaceClass::Torus, SurfaceClass::K3, SurfaceClass::Enriques];

    pub fn b2(self) -> usize {
        match self {
            SurfaceClass::Torus => 6,
            SurfaceClass::K3 => 22,
            SurfaceClass::Enriques => 10,
        }
    }

    pub fn h11(self) -> usize {
        match self {
            SurfaceClass::Torus => 4,
            SurfaceClass::K3 => 20,
            SurfaceClass::Enriques => 10,
        }
    }

    pub fn lattice_name(self) -> &'static str {
        match self {
            SurfaceClass::Torus => "3U",
            SurfaceClass::K3 => "3U+2E8",
            SurfaceClass::Enriques => "U+E8",
        }
    }

    pub fn lattice(self) -> Lattice {
        Lattice::named(self.lattice_name()).expect("built-in lattice")
    }

    pub fn signature(self) -> (usize, usize) {
        match self {
            SurfaceClass::Torus => (3, 3),
            SurfaceClass::K3 => (3, 19),
            SurfaceClass::Enriques => (1, 9),
        }
    }

    /// Classes whose lattice is even unimodular of the given signature.
    pub fn from_signature(sig: (usize, usize)) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.signature() == sig)
    }
}

impl fmt::Display for SurfaceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SurfaceClass::Torus => "torus",
            SurfaceClass::K3 => "k3",
            SurfaceClass::Enriques => "enriques",
        })
    }
}

impl FromStr for SurfaceClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "torus" => Ok(SurfaceClass::Torus),
            "k3" => Ok(SurfaceClass::K3),
            "enriques" => Ok(SurfaceClass::Enriques),
            other => Err(Error::Parse(format!("unknown surface class `{other}`"))),
        }
    }
}

// ---------------------------------------------------------------------------
// Decisions
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    /// `d < b2`.
    DegreeBelow,
    /// `d = b2` and `-s(1)s(-1)` is a square.
    SquareClass,
    /// `d = b2` and `-s(1)s(-1)` is not a square.
    NonSquareClass,
    /// `d > b2`.
    DegreeAbove,
    /// Projective realization needs `d <= h11`.
    AboveH11,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Decision {
    pub realizable: bool,
    pub clause: Clause,
    pub degree: usize,
    pub class: SurfaceClass,
    pub projective: bool,
    pub reason: String,
}

fn check_salem(s: &IntPolynomial) -> Result<()> {
    is_salem(s).map(|_| ()).map_err(|r| Error::NotSalem(r.to_string()))
}

/// Whether the Salem number of `s` is the dynamical degree of an automorphism
/// of some surface of the class (projective if asked).
pub fn stable_realizable(s: &IntPolynomial, class: SurfaceClass, projective: bool) -> Result<Decision> {
    check_salem(s)?;
    let d = s.degree();
    let (b2, h11) = (class.b2(), class.h11());
    let (mut ok, mut clause, mut reason) = if d < b2 {
        (true, Clause::DegreeBelow, format!("clause (1): d = {d} < b2 = {b2}"))
    } else if d == b2 {
        if square_class_test(s)? {
            (
                true,
                Clause::SquareClass,
                "clause (2): d = b2, square class".to_string(),
            )
        } else {
            (
                false,
                Clause::NonSquareClass,
                "d = b2 but -s(1)s(-1) is not a square".to_string(),
            )
        }
    } else {
        (false, Clause::DegreeAbove, format!("d = {d} > b2 = {b2}"))
    };
    if ok && projective && d > h11 {
        ok = false;
        clause = Clause::AboveH11;
        reason = format!("projective realization needs d <= h11 = {h11}, but d = {d}");
    } else if ok && projective {
        reason = format!("{reason}; projective since d <= h11 = {h11}");
    }
    Ok(Decision {
        realizable: ok,
        clause,
        degree: d,
        class,
        projective,
        reason,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RationalIsometryDecision {
    pub exists: bool,
    /// 1 or 2 for the clause that applied, `None` when neither does.
    pub clause: Option<u8>,
    /// Clause (1) also provides an isometry whose `ker s(f)` is hyperbolic.
    pub hyperbolic_kernel: bool,
    pub reason: String,
}

/// Existence of a rational isometry of `L ⊗ Q` with characteristic polynomial
/// `s(x) (x - 1)^(rk L - d)`, for `L` one of `3U`, `U+E8`, `3U+2E8`.
pub fn rational_isometry_criterion(s: &IntPolynomial, l: &Lattice) -> Result<RationalIsometryDecision> {
    if !(l.is_even() && l.is_unimodular() && SurfaceClass::from_signature(l.signature()).is_some()) {
        return Err(Error::Unsupported(
            "lattice must be even unimodular of signature (3,3), (1,9) or (3,19)".into(),
        ));
    }
    check_salem(s)?;
    let (d, n) = (s.degree(), l.rank());
    Ok(if d + 2 <= n {
        RationalIsometryDecision {
            exists: true,
            clause: Some(1),
            hyperbolic_kernel: true,
            reason: format!("clause (1): d = {d} <= rk L - 2 = {}", n - 2),
        }
    } else if d == n {
        let sq = square_class_test(s)?;
        RationalIsometryDecision {
            exists: sq,
            clause: Some(2),
            hyperbolic_kernel: false,
            reason: if sq {
                "clause (2): d = rk L, -s(1)s(-1) is a square".into()
            } else {
                "d = rk L, -s(1)s(-1) is not a square".into()
            },
        }
    } else {
        RationalIsometryDecision {
            exists: false,
            clause: None,
            hyperbolic_kernel: false,
            reason: format!("d = {d} exceeds rk L = {n}"),
        }
    })
}

/// `f ≡ id (mod 2)`. Non-integral matrices are never trivial.
pub fn mod2_trivial(f: &Isometry) -> bool {
    match f.integer_matrix() {
        Some(m) => is_identity_mod2(&m),
        None => false,
    }
}

fn is_identity_mod2(m: &ZMatrix) -> bool {
    (0..m.nrows()).all(|i| {
        (0..m.ncols()).all(|j| {
            let c = if i == j { &m[(i, j)] - 1 } else { m[(i, j)].clone() };
            c.is_even()
        })
    })
}

// ---------------------------------------------------------------------------
// Primes and norm elements
// ---------------------------------------------------------------------------

/// A prime `p ≡ 1 (mod 8 |det R|)` with a degree-one prime of the trace field
/// `(p, w - root)` that splits in `Q(lambda)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitPrime {
    pub prime: u64,
    /// Simple root of the trace polynomial modulo `p`.
    pub root: u64,
    /// A square root of `root^2 - 4` modulo `p`.
    pub sqrt: u64,
}

impl SplitPrime {
    /// Re-checks every condition from scratch.
    pub fn check(&self, s: &IntPolynomial, det_r: &BigInt) -> Result<()> {
        let p = self.prime;
        let fail = |m: String| Err(Error::Precondition(format!("split prime {p}: {m}")));
        if !is_prime_u64(p) {
            return fail("not prime".into());
        }
        let m = BigInt::from(8) * det_r.abs();
        if !(BigInt::from(p) - 1u32).is_multiple_of(&m) {
            return fail(format!("not 1 mod {m}"));
        }
        if (BigInt::from(2) * discriminant(s)?).is_multiple_of(&BigInt::from(p)) {
            return fail("divides 2 disc s".into());
        }
        let r = modp::reduce(&trace_polynomial(s)?, p);
        if self.root >= p || modp::root_multiplicity(&r, self.root, p) != 1 {
            return fail("root is not a simple root of the trace polynomial".into());
        }
        let a = self.root as u128;
        let w = ((a * a + p as u128 * 4 - 4) % p as u128) as u64;
        if w == 0 || (self.sqrt as u128 * self.sqrt as u128 % p as u128) as u64 != w {
            return fail("root^2 - 4 is not a nonzero square".into());
        }
        Ok(())
    }
}

/// Smallest prime `p > lower_bound` (and `p <= cap`) with `p ≡ 1 mod 8|det R|`,
/// `p ∤ 2 disc s`, a simple root `a` of the trace polynomial modulo `p` and
/// `(a^2 - 4 / p) = 1`.
pub fn find_split_prime(s: &IntPolynomial, det_r: &BigInt, lower_bound: u64, cap: u64) -> Result<SplitPrime> {
    check_salem(s)?;
    if det_r.is_zero() {
        return Err(Error::Precondition("det R must be nonzero".into()));
    }
    let m = (BigInt::from(8) * det_r.abs())
        .to_u64()
        .ok_or_else(|| Error::ModulusTooLarge(det_r.to_string()))?;
    let r = trace_polynomial(s)?;
    let bad = BigInt::from(2) * discriminant(s)?;
    let mut p = lower_bound - lower_bound % m + 1;
    if p <= lower_bound {
        p += m;
    }
    while p <= cap {
        if is_prime_u64(p) && !bad.is_multiple_of(&BigInt::from(p)) {
            let rp = modp::reduce(&r, p);
            for a in modp::roots(&rp, p) {
                if modp::root_multiplicity(&rp, a, p) != 1 {
                    continue;
                }
                let w = BigInt::from(a) * a - 4;
                if legendre(&w, &BigInt::from(p))? == 1 {
                    let w = w.mod_floor(&BigInt::from(p)).to_u64().unwrap();
                    let sqrt = sqrt_mod(w, p).expect("quadratic residue");
                    return Ok(SplitPrime {
                        prime: p,
                        root: a,
                        sqrt,
                    });
                }
            }
        }
        p = match p.checked_add(m) {
            Some(q) => q,
            None => break,
        };
    }
    Err(Error::SearchExhausted(format!(
        "no split prime in ({lower_bound}, {cap}]"
    )))
}

/// `t` in the trace order with `t O = p^l` for the prime `p = (p, w - root)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormElement {
    pub t: TwistElement,
    pub exponent: u32,
}

impl NormElement {
    pub fn check(&self, s: &IntPolynomial, sp: &SplitPrime) -> Result<()> {
        let r = trace_polynomial(s)?;
        let fail = |m: &str| Err(Error::Precondition(format!("norm element: {m}")));
        let n = resultant(&r, self.t.poly())?.abs();
        if self.exponent == 0 || n != BigInt::from(sp.prime).pow(self.exponent) {
            return fail("norm is not p^l");
        }
        if !generates_prime_power(&r, self.t.poly(), sp) {
            return fail("does not generate a power of the chosen prime");
        }
        Ok(())
    }
}

/// `t(root) ≡ 0` and `t` prime to the other factors of `r` modulo `p`.
fn generates_prime_power(r: &IntPolynomial, t: &IntPolynomial, sp: &SplitPrime) -> bool {
    let p = sp.prime;
    let tp = modp::reduce(t, p);
    if tp.is_empty() {
        return r.degree() == 1;
    }
    if modp::eval(&tp, sp.root, p) != 0 {
        return false;
    }
    let rp = modp::reduce(r, p);
    let lin: modp::Fp = vec![(p - sp.root) % p, 1];
    let (rest, rem) = modp::div_rem(&rp, &lin, p);
    debug_assert!(rem.is_empty());
    modp::degree(&modp::gcd(&rest, &tp, p)) == 0
}

/// Bounded search for a generator of a power of the chosen degree-one prime:
/// polynomials in `w` of degree `< deg r` with coefficients in `[-box, box]`,
/// by increasing height, preferring the smallest exponent `l <= l_max`.
pub fn find_norm_element(s: &IntPolynomial, sp: &SplitPrime, l_max: u32, box_radius: u64) -> Result<NormElement> {
    Ok(find_norm_elements(s, sp, l_max, box_radius, 1)?.remove(0))
}

/// Like [`find_norm_element`] but returns up to `limit` generators, sorted by
/// exponent and then by search order. The search stops after the first height
/// at which `limit` generators of the smallest exponent have been seen.
pub fn find_norm_elements(
    s: &IntPolynomial,
    sp: &SplitPrime,
    l_max: u32,
    box_radius: u64,
    limit: usize,
) -> Result<Vec<NormElement>> {
    check_salem(s)?;
    let r = trace_polynomial(s)?;
    let p = BigInt::from(sp.prime);
    if r.degree() == 1 {
        return Ok(vec![NormElement {
            t: TwistElement::scalar(p),
            exponent: 1,
        }]);
    }
    let k = r.degree();
    let mut found: Vec<NormElement> = Vec::new();
    for h in 1..=box_radius as i64 {
        let mut coeffs = vec![-h; k];
        loop {
            if coeffs.iter().any(|c| c.abs() == h) {
                let t = IntPolynomial::from_i64(&coeffs);
                if let Some(l) = prime_power_exponent(&resultant(&r, &t)?.abs(), &p, l_max) {
                    if generates_prime_power(&r, &t, sp) {
                        found.push(NormElement {
                            t: TwistElement::new(t),
                            exponent: l,
                        });
                    }
                }
            }
            if !odometer(&mut coeffs, h) {
                break;
            }
        }
        if found.iter().filter(|n| n.exponent == 1).count() >= limit {
            break;
        }
    }
    if found.is_empty() {
        return Err(Error::SearchExhausted(format!(
            "no element of norm p^l (p = {p}, l <= {l_max}) with coefficients in [-{box_radius}, {box_radius}]"
        )));
    }
    found.sort_by_key(|n| n.exponent);
    found.truncate(limit.max(1));
    Ok(found)
}

fn odometer(c: &mut [i64], h: i64) -> bool {
    for x in c.iter_mut() {
        if *x < h {
            *x += 1;
            return true;
        }
        *x = -h;
    }
    false
}

fn prime_power_exponent(n: &BigInt, p: &BigInt, l_max: u32) -> Option<u32> {
    let mut n = n.clone();
    let mut l = 0;
    while l <= l_max && !n.is_zero() && n.is_multiple_of(p) {
        n /= p;
        l += 1;
    }
    (n.is_one() && l >= 1 && l <= l_max).then_some(l)
}

// ---------------------------------------------------------------------------
// Seeds
// ---------------------------------------------------------------------------

/// A block of the complement `R`: a named lattice or an explicit Gram matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Block {
    Named(String),
    Gram(Lattice),
}

impl Block {
    pub fn lattice(&self) -> Result<Lattice> {
        match self {
            Block::Named(n) => Lattice::named(n),
            Block::Gram(l) => Ok(l.clone()),
        }
    }
}

/// An `s`-lattice `(S, f)` together with a complement `R` such that
/// `q_S ≅ -q_R` and `S ⊕ R` glues to the lattice of the class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seed {
    pub version: u32,
    pub class: SurfaceClass,
    pub salem: IntPolynomial,
    pub lattice: Lattice,
    pub isometry: Vec<Vec<String>>,
    pub complement: Vec<Block>,
}

impl Seed {
    pub fn from_json(s: &str) -> Result<Self> {
        let seed: Seed = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if seed.version != SEED_VERSION {
            return Err(Error::Parse(format!("unsupported seed version {}", seed.version)));
        }
        Ok(seed)
    }

    pub fn isometry(&self) -> Result<Isometry> {
        let m = parse_int_rows(&self.isometry, self.lattice.rank())?;
        Isometry::from_integer(self.lattice.clone(), m)
    }

    pub fn complement_lattice(&self) -> Result<Lattice> {
        let mut blocks = self.complement.iter();
        let first = blocks
            .next()
            .ok_or_else(|| Error::Precondition("empty complement".into()))?
            .lattice()?;
        blocks.try_fold(first, |acc, b| Ok(acc.direct_sum(&b.lattice()?)))
    }

    /// Checks the seed's internal consistency.
    pub fn validate(&self) -> Result<()> {
        let f = self.isometry()?;
        if f.charpoly()? != self.salem {
            return Err(Error::Precondition(
                "characteristic polynomial of the seed isometry is not the seed's Salem polynomial".into(),
            ));
        }
        check_salem(&self.salem)?;
        let r = self.complement_lattice()?;
        if !self.lattice.is_even() || !r.is_even() {
            return Err(Error::NotEven);
        }
        let (a, b) = self.lattice.signature();
        let (c, d) = r.signature();
        if (a + c, b + d) != self.class.signature() {
            return Err(Error::WrongSignature(
                a + c,
                b + d,
                format!("{:?} for S ⊕ R", self.class.signature()),
            ));
        }
        Ok(())
    }
}

const CURATED_SEEDS: [&str; 3] = [
    include_str!("../data/seeds/s4_k3.json"),
    include_str!("../data/seeds/s4_torus.json"),
    include_str!("../data/seeds/s4_enriques.json"),
];

/// The curated seeds shipped with the library.
pub fn curated_seeds() -> Vec<Seed> {
    CURATED_SEEDS
        .iter()
        .map(|s| Seed::from_json(s).expect("curated seed parses"))
        .collect()
}

pub fn curated_seed(s: &IntPolynomial, class: SurfaceClass) -> Option<Seed> {
    curated_seeds().into_iter().find(|x| &x.salem == s && x.class == class)
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Factor {
    pub poly: IntPolynomial,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelData {
    /// Basis rows of `ker s_n(f)` in the coordinates of the lattice.
    pub basis: Vec<Vec<String>>,
    pub signature: (usize, usize),
}

/// Positivity of `f|S` follows from that of a base isometry `g` of the same
/// lattice with `f|S = g^power`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PositivityEvidence {
    pub lattice: Lattice,
    pub isometry: Vec<Vec<String>>,
    pub power: u64,
    pub report: ObstructionReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlueEvidence {
    pub seed_lattice: Lattice,
    pub seed_isometry: Vec<Vec<String>>,
    pub seed_complement: Lattice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split_prime: Option<SplitPrime>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_element: Option<NormElement>,
    /// `e` with `S` twisted by `t^e`, `e` in `{1, 2}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twist_power: Option<u32>,
    /// `S(t^e)` and `R` with its first `U` scaled by `p^(e l)`.
    pub lattice: Lattice,
    pub complement: Lattice,
    pub glue_map: GlueMap,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealizationCertificate {
    pub version: u32,
    pub class: SurfaceClass,
    pub projective: bool,
    pub salem: IntPolynomial,
    pub power: u64,
    pub power_salem: IntPolynomial,
    pub lattice: Lattice,
    pub isometry: Vec<Vec<String>>,
    pub charpoly: Vec<Factor>,
    pub kernel: KernelData,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positivity: Option<PositivityEvidence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mod2_trivial: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub glue: Option<GlueEvidence>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckItem {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationReport {
    pub verified: bool,
    pub items: Vec<CheckItem>,
}

impl VerificationReport {
    pub fn item(&self, name: &str) -> Option<&CheckItem> {
        self.items.iter().find(|i| i.name == name)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BuildOptions {
    /// Primes are searched in `(prime_lower_bound, prime_cap]`; `None` uses
    /// the smallest bound making the determinant bound hold after twisting.
    pub prime_lower_bound: Option<u64>,
    pub prime_cap: u64,
    pub box_radius: u64,
    pub max_exponent: u32,
    /// Only twist by `t^2`. Otherwise generators `t` themselves are tried
    /// first, which keeps the integrality power small.
    pub square_twist: bool,
    /// Number of generators `t` tried before giving up.
    pub twist_candidates: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            prime_lower_bound: None,
            prime_cap: 1_000_000,
            box_radius: 50,
            max_exponent: 4,
            square_twist: false,
            twist_candidates: 16,
        }
    }
}

fn stage<T>(stage: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Pipeline { .. } => e,
        other => Error::Pipeline {
            stage,
            reason: other.to_string(),
        },
    })
}

fn stage_fail<T>(stage: &'static str, reason: impl Into<String>) -> Result<T> {
    Err(Error::Pipeline {
        stage,
        reason: reason.into(),
    })
}

fn x_minus_one_pow(k: usize) -> IntPolynomial {
    IntPolynomial::from_i64(&[-1, 1]).pow(k as u32)
}

/// Expected signature of `ker s_n(f)`.
fn kernel_signature(d: usize, projective: bool) -> (usize, usize) {
    if projective {
        (1, d - 1)
    } else {
        (3, d - 3)
    }
}

/// Glues `S ⊕ R` along an anti-isometry of discriminant forms and extends
/// `f ⊕ id` to the overlattice. Returns the overlattice, the extension and
/// the basis rows of `S` in overlattice coordinates.
fn glue_and_extend(f: &Isometry, r: &Lattice) -> Result<(Lattice, GlueMap, Isometry, ZMatrix)> {
    let s = f.lattice();
    let qs = stage("glue", s.discriminant_form())?;
    let qr = stage("glue", r.discriminant_form())?;
    let phi = match stage("glue", GlueMap::find(&qs, &qr))? {
        Some(phi) => phi,
        None => return stage_fail("glue", "discriminant forms are not anti-isometric"),
    };
    let ov = stage("glue", Lattice::glue_with_basis(s, r, &phi))?;
    let ext = f.direct_sum(&Isometry::identity(r.clone()));
    let g = stage("glue", ext.in_basis(ov.lattice.clone(), &ov.basis))?;
    let binv = ov.basis.inverse().ok_or_else(|| Error::Pipeline {
        stage: "glue",
        reason: "degenerate overlattice basis".into(),
    })?;
    let d = s.rank();
    let n = ov.lattice.rank();
    let sel = QMatrix::from_fn(d, n, |i, j| {
        if i == j {
            BigRational::one()
        } else {
            BigRational::zero()
        }
    });
    let sb = (&sel * &binv).to_integer().ok_or_else(|| Error::Pipeline {
        stage: "glue",
        reason: "S is not contained in the overlattice".into(),
    })?;
    Ok((ov.lattice, phi, g, sb))
}

/// Runs the pipeline on a seed: for projective K3 surfaces the twisting
/// construction, otherwise a direct glue followed by powering (and, for tori
/// and Enriques surfaces, powering into the level-2 congruence subgroup).
pub fn build_certificate(
    s: &IntPolynomial,
    seed: &Seed,
    projective: bool,
    opts: &BuildOptions,
) -> Result<RealizationCertificate> {
    stage("seed", check_salem(s))?;
    if &seed.salem != s {
        return stage_fail("seed", "seed is for a different polynomial");
    }
    stage("seed", seed.validate())?;
    let f = stage("seed", seed.isometry())?;
    let class = seed.class;
    let d = s.degree();
    if !f.lattice().is_hyperbolic() {
        let (a, b) = f.lattice().signature();
        return stage_fail("seed", format!("S has signature ({a}, {b}), expected (1, {})", d - 1));
    }
    let decision = stage("seed", stable_realizable(s, class, projective))?;
    if !decision.realizable {
        return stage_fail("seed", decision.reason);
    }
    if projective && class == SurfaceClass::K3 {
        return build_k3_from_seed(s, seed, &f, opts);
    }
    if !projective && class != SurfaceClass::K3 {
        return stage_fail(
            "seed",
            "a hyperbolic S gives a projective certificate; use --projective",
        );
    }
    let r = stage("seed", seed.complement_lattice())?;
    let (l, phi, g, sb) = glue_and_extend(&f, &r)?;
    let (mut n, mut fp) = stage("power", power_to_integral(&g))?;
    if class != SurfaceClass::K3 {
        let m = fp.integer_matrix().expect("integral power");
        let k = stage("power", order_mod(&m, &BigInt::from(2)))?;
        let k = k.to_u64().expect("order mod 2 fits");
        n *= k;
        fp = fp.pow(k);
    }
    let glue = GlueEvidence {
        seed_lattice: f.lattice().clone(),
        seed_isometry: int_rows(&f.integer_matrix().expect("integral seed")),
        seed_complement: r.clone(),
        split_prime: None,
        norm_element: None,
        twist_power: None,
        lattice: f.lattice().clone(),
        complement: r,
        glue_map: phi,
    };
    assemble(class, projective, s, &l, &fp, n, &sb, None, Some(glue))
}

/// The certificate for a projective K3 surface from a seed.
pub fn build_k3_certificate(s: &IntPolynomial, seed: &Seed, opts: &BuildOptions) -> Result<RealizationCertificate> {
    if seed.class != SurfaceClass::K3 {
        return stage_fail("seed", format!("seed is for class {}", seed.class));
    }
    build_certificate(s, seed, true, opts)
}

fn build_k3_from_seed(
    s: &IntPolynomial,
    seed: &Seed,
    f: &Isometry,
    opts: &BuildOptions,
) -> Result<RealizationCertificate> {
    let r = stage("seed", seed.complement_lattice())?;
    if r.rank() < 2
        || r.gram()[(0, 0)] != BigInt::zero()
        || r.gram()[(0, 1)] != BigInt::one()
        || r.gram()[(1, 1)] != BigInt::zero()
    {
        return stage_fail("seed", "complement must start with a hyperbolic plane U");
    }
    let det_s = f.lattice().determinant().abs();
    let threshold = BigInt::from(4) * stage("prime", discriminant(s))?.abs();
    let powers: &[u32] = if opts.square_twist { &[2] } else { &[1, 2] };
    let lower = match opts.prime_lower_bound {
        Some(b) => b,
        None => {
            // smallest p with |det S| p^(2e) > 4 |disc s|
            let e = powers[0];
            let mut p = 1u64;
            while &det_s * BigInt::from(p).pow(2 * e) <= threshold {
                p += 1;
            }
            p - 1
        }
    };
    let sp = stage("prime", find_split_prime(s, &r.determinant(), lower, opts.prime_cap))?;
    let candidates = stage(
        "norm",
        find_norm_elements(s, &sp, opts.max_exponent, opts.box_radius, opts.twist_candidates),
    )?;
    let p = BigInt::from(sp.prime);
    let mut last = String::new();
    for &e in powers {
        for ne in &candidates {
            let l = ne.exponent;
            let (s2, f2) = stage("twist", twist(f, &ne.t.pow(e)))?;
            if s2.signature() != f.lattice().signature() {
                last = format!("S(t^{e}) has signature {:?} for t = {}", s2.signature(), ne.t.poly());
                continue;
            }
            let expected = &det_s * p.pow(2 * e * l);
            if s2.determinant().abs() != expected {
                return stage_fail(
                    "twist",
                    format!(
                        "|det S(t^{e})| = {} but |det S| p^({}l) = {expected}",
                        s2.determinant().abs(),
                        2 * e
                    ),
                );
            }
            let r2 = scale_first_plane(&r, &p.pow(e * l));
            let (lat, phi, g, sb) = match glue_and_extend(&f2, &r2) {
                Ok(x) => x,
                Err(err) => {
                    last = format!("t = {}, e = {e}: {err}", ne.t.poly());
                    continue;
                }
            };
            if !(lat.is_even() && lat.is_unimodular() && lat.signature() == SurfaceClass::K3.signature()) {
                return stage_fail("glue", "overlattice is not even unimodular of signature (3, 19)");
            }
            let report = stage("positivity", is_positive(&f2))?;
            if report.status != Status::Positive {
                return stage_fail("positivity", format!("twisted isometry is {:?}", report.status));
            }
            let (n, fp) = stage("power", power_to_integral(&g))?;
            let evidence = PositivityEvidence {
                lattice: s2.clone(),
                isometry: int_rows(&f2.integer_matrix().expect("integral")),
                power: n,
                report,
            };
            let glue = GlueEvidence {
                seed_lattice: f.lattice().clone(),
                seed_isometry: int_rows(&f.integer_matrix().expect("integral seed")),
                seed_complement: r,
                split_prime: Some(sp),
                norm_element: Some(ne.clone()),
                twist_power: Some(e),
                lattice: s2,
                complement: r2,
                glue_map: phi,
            };
            return assemble(SurfaceClass::K3, true, s, &lat, &fp, n, &sb, Some(evidence), Some(glue));
        }
    }
    stage_fail(
        "twist",
        format!("no twist of S glues to the scaled complement (last: {last})"),
    )
}

fn scale_first_plane(r: &Lattice, k: &BigInt) -> Lattice {
    let mut g = r.gram().clone();
    g[(0, 1)] = k.clone();
    g[(1, 0)] = k.clone();
    Lattice::new(g).expect("non-degenerate")
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    class: SurfaceClass,
    projective: bool,
    s: &IntPolynomial,
    l: &Lattice,
    fp: &Isometry,
    n: u64,
    kernel_basis: &ZMatrix,
    positivity: Option<PositivityEvidence>,
    glue: Option<GlueEvidence>,
) -> Result<RealizationCertificate> {
    let m = fp.integer_matrix().ok_or_else(|| Error::Pipeline {
        stage: "power",
        reason: "power is not integral".into(),
    })?;
    let sn = stage("certify", power_min_poly(s, n))?;
    let d = s.degree();
    let kg = l.sublattice(kernel_basis).map_err(|e| Error::Pipeline {
        stage: "certify",
        reason: e.to_string(),
    })?;
    let cert = RealizationCertificate {
        version: CERTIFICATE_VERSION,
        class,
        projective,
        salem: s.clone(),
        power: n,
        power_salem: sn.clone(),
        lattice: l.clone(),
        isometry: int_rows(&m),
        charpoly: vec![
            Factor {
                poly: sn,
                multiplicity: 1,
            },
            Factor {
                poly: IntPolynomial::from_i64(&[-1, 1]),
                multiplicity: class.b2() - d,
            },
        ],
        kernel: KernelData {
            basis: int_rows(kernel_basis),
            signature: kg.signature(),
        },
        positivity,
        mod2_trivial: (class != SurfaceClass::K3).then(|| is_identity_mod2(&m)),
        glue,
    };
    let report = verify_certificate(&cert);
    if !report.verified {
        let failed: Vec<String> = report
            .items
            .iter()
            .filter(|i| !i.passed)
            .map(|i| format!("{}: {}", i.name, i.detail))
            .collect();
        return stage_fail("certify", failed.join("; "));
    }
    Ok(cert)
}

impl RealizationCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn isometry(&self) -> Result<Isometry> {
        let m = parse_int_rows(&self.isometry, self.lattice.rank())?;
        Isometry::from_integer(self.lattice.clone(), m)
    }

    /// The certificate for `f^m`, realizing `lambda^m`.
    pub fn power(&self, m: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::ZeroExponent);
        }
        let f = self.isometry()?;
        let fm = f.integer_matrix().expect("integral").pow(m);
        let n = self.power * m;
        let sn = power_min_poly(&self.salem, n)?;
        let mut c = self.clone();
        c.power = n;
        c.power_salem = sn.clone();
        c.isometry = int_rows(&fm);
        c.charpoly[0].poly = sn;
        if let Some(p) = c.positivity.as_mut() {
            p.power = n;
        }
        if c.mod2_trivial.is_some() {
            c.mod2_trivial = Some(is_identity_mod2(&fm));
        }
        Ok(c)
    }
}

struct Checks {
    items: Vec<CheckItem>,
}

impl Checks {
    fn push(&mut self, name: &str, r: std::result::Result<String, String>) -> bool {
        let passed = r.is_ok();
        let detail = match r {
            Ok(s) | Err(s) => s,
        };
        self.items.push(CheckItem {
            name: name.into(),
            passed,
            detail,
        });
        passed
    }
}

fn err<T: fmt::Display>(e: T) -> String {
    e.to_string()
}

/// Re-runs every check on a certificate.
pub fn verify_certificate(c: &RealizationCertificate) -> VerificationReport {
    let mut ch = Checks { items: Vec::new() };
    let b2 = c.class.b2();
    let d = c.salem.degree();

    ch.push(
        "format",
        if c.version == CERTIFICATE_VERSION {
            Ok(format!("version {}", c.version))
        } else {
            Err(format!("unsupported version {}", c.version))
        },
    );

    let salem_ok = ch.push("salem", check_salem_item(c));

    let l = &c.lattice;
    ch.push(
        "ambient",
        if l.rank() != b2 {
            Err(format!("rank {} but b2 = {b2}", l.rank()))
        } else if !l.is_even() {
            Err("lattice is not even".into())
        } else if !l.is_unimodular() {
            Err(format!("determinant {}", l.determinant()))
        } else if l.signature() != c.class.signature() {
            Err(format!(
                "signature {:?}, expected {:?}",
                l.signature(),
                c.class.signature()
            ))
        } else {
            Ok(format!("even unimodular of signature {:?}", l.signature()))
        },
    );

    let m = parse_int_rows(&c.isometry, l.rank())
        .ok()
        .filter(|m| m.nrows() == l.rank() && m.ncols() == l.rank());
    let iso_ok = ch.push(
        "isometry",
        match &m {
            None => Err("isometry is not a square integer matrix of the lattice's rank".into()),
            Some(m) => {
                let g = l.gram();
                if &(&m.transpose() * g) * m == *g {
                    Ok("f^T G f = G".into())
                } else {
                    Err("f^T G f != G".into())
                }
            }
        },
    );

    let charpoly_ok = ch.push(
        "charpoly",
        match (&m, salem_ok) {
            (Some(m), true) if d <= b2 => {
                let expected = &c.power_salem * &x_minus_one_pow(b2 - d);
                let recorded = c
                    .charpoly
                    .iter()
                    .fold(IntPolynomial::one(), |acc, f| &acc * &f.poly.pow(f.multiplicity as u32));
                let actual = IntPolynomial::new(m.charpoly());
                if actual != expected {
                    Err(format!(
                        "characteristic polynomial is {actual}, expected s_n(x)(x-1)^{}",
                        b2 - d
                    ))
                } else if recorded != expected {
                    Err("recorded factorization does not match".into())
                } else {
                    Ok(format!("s_n(x)(x-1)^{}", b2 - d))
                }
            }
            _ => Err("skipped: isometry or polynomial invalid".into()),
        },
    );

    let kb = parse_int_rows(&c.kernel.basis, l.rank()).ok();
    let kernel_ok = ch.push(
        "kernel",
        match (&m, &kb, charpoly_ok) {
            (Some(m), Some(kb), true) => check_kernel(c, m, kb),
            _ => Err("skipped: earlier checks failed".into()),
        },
    );

    if c.class == SurfaceClass::K3 && c.projective {
        ch.push(
            "positivity",
            match (&m, &kb, kernel_ok && iso_ok) {
                (Some(m), Some(kb), true) => check_positivity(c, m, kb),
                _ => Err("skipped: earlier checks failed".into()),
            },
        );
    }
    if c.class != SurfaceClass::K3 {
        ch.push(
            "mod2",
            match &m {
                Some(m) if is_identity_mod2(m) => {
                    if c.mod2_trivial == Some(true) {
                        Ok("f ≡ id mod 2".into())
                    } else {
                        Err("recorded flag does not match".into())
                    }
                }
                Some(_) => Err("f is not the identity modulo 2".into()),
                None => Err("skipped: isometry invalid".into()),
            },
        );
    }
    if let Some(g) = &c.glue {
        ch.push(
            "glue",
            match &m {
                Some(m) => check_glue(c, g, m),
                None => Err("skipped: isometry invalid".into()),
            },
        );
    }

    let verified = ch.items.iter().all(|i| i.passed);
    VerificationReport {
        verified,
        items: ch.items,
    }
}

fn check_salem_item(c: &RealizationCertificate) -> std::result::Result<String, String> {
    check_salem(&c.salem).map_err(err)?;
    if c.power == 0 {
        return Err("power must be positive".into());
    }
    let sn = power_min_poly(&c.salem, c.power).map_err(err)?;
    if sn != c.power_salem {
        return Err(format!("minimal polynomial of lambda^{} is {sn}", c.power));
    }
    let dec = stable_realizable(&c.salem, c.class, c.projective).map_err(err)?;
    if !dec.realizable {
        return Err(dec.reason);
    }
    Ok(format!("Salem of degree {}, power {}", c.salem.degree(), c.power))
}

fn check_kernel(c: &RealizationCertificate, m: &ZMatrix, kb: &ZMatrix) -> std::result::Result<String, String> {
    let d = c.salem.degree();
    if kb.nrows() != d {
        return Err(format!("{} basis vectors, expected {d}", kb.nrows()));
    }
    let snf = c.power_salem.eval_matrix(m);
    if !(&snf * &kb.transpose()).is_zero() {
        return Err("basis vectors are not killed by s_n(f)".into());
    }
    if non_primitive_saturation(kb).is_some() {
        return Err("kernel basis is not primitive".into());
    }
    let sub = c.lattice.sublattice(kb).map_err(err)?;
    let sig = sub.signature();
    let expected = kernel_signature(d, c.projective);
    if sig != expected || c.kernel.signature != sig {
        return Err(format!(
            "signature {sig:?} (recorded {:?}), expected {expected:?}",
            c.kernel.signature
        ));
    }
    Ok(format!("primitive, signature {sig:?}"))
}

/// Matrix of `f` on the span of the rows of `kb`, acting on column vectors.
fn restrict(m: &ZMatrix, kb: &ZMatrix) -> Option<ZMatrix> {
    let bt = kb.transpose().to_rational();
    let rhs = &m.to_rational() * &bt;
    bt.solve(&rhs)?.to_integer()
}

fn check_positivity(c: &RealizationCertificate, m: &ZMatrix, kb: &ZMatrix) -> std::result::Result<String, String> {
    let ev = c.positivity.as_ref().ok_or("no positivity evidence")?;
    let s = &ev.lattice;
    if ev.power != c.power {
        return Err(format!("evidence power {} differs from {}", ev.power, c.power));
    }
    let sub = c.lattice.sublattice(kb).map_err(err)?;
    if sub.gram() != s.gram() {
        return Err("kernel Gram matrix differs from the evidence lattice".into());
    }
    let g = parse_int_rows(&ev.isometry, s.rank()).map_err(err)?;
    let base = Isometry::from_integer(s.clone(), g.clone()).map_err(err)?;
    if base.charpoly().map_err(err)? != c.salem {
        return Err("base isometry does not have characteristic polynomial s".into());
    }
    let restricted = restrict(m, kb).ok_or("f does not preserve the kernel")?;
    if restricted != g.pow(ev.power) {
        return Err("f on the kernel is not the recorded power of the base isometry".into());
    }
    let report = is_positive(&base).map_err(err)?;
    if report.status != Status::Positive {
        return Err(format!("base isometry is {:?}", report.status));
    }
    if report.status != ev.report.status || report.method != ev.report.method {
        return Err("recorded report differs from the recomputed one".into());
    }
    Ok(format!(
        "base isometry positive ({:?}), so is its power {}",
        report.method, ev.power
    ))
}

fn check_glue(c: &RealizationCertificate, g: &GlueEvidence, m: &ZMatrix) -> std::result::Result<String, String> {
    let seed_f = parse_int_rows(&g.seed_isometry, g.seed_lattice.rank()).map_err(err)?;
    let seed_f = Isometry::from_integer(g.seed_lattice.clone(), seed_f).map_err(err)?;
    if seed_f.charpoly().map_err(err)? != c.salem {
        return Err("seed isometry does not have characteristic polynomial s".into());
    }
    let mut detail = String::from("glued lattice and isometry reproduced");
    let f = match (&g.split_prime, &g.norm_element) {
        (Some(sp), Some(ne)) => {
            sp.check(&c.salem, &g.seed_complement.determinant()).map_err(err)?;
            ne.check(&c.salem, sp).map_err(err)?;
            let e = match g.twist_power {
                Some(e @ (1 | 2)) => e,
                _ => return Err("twist power must be 1 or 2".into()),
            };
            let (s2, f2) = twist(&seed_f, &ne.t.pow(e)).map_err(err)?;
            if s2 != g.lattice {
                return Err("twisted lattice differs".into());
            }
            let p = BigInt::from(sp.prime);
            let expected = g.seed_lattice.determinant().abs() * p.pow(2 * e * ne.exponent);
            if s2.determinant().abs() != expected {
                return Err(format!("|det S(t^{e})| != |det S| p^({}l)", 2 * e));
            }
            if scale_first_plane(&g.seed_complement, &p.pow(e * ne.exponent)) != g.complement {
                return Err("scaled complement differs".into());
            }
            detail = format!("p = {}, l = {}, e = {e}; {detail}", sp.prime, ne.exponent);
            f2
        }
        (None, None) => {
            if g.twist_power.is_some() {
                return Err("twist power without a twist".into());
            }
            if g.lattice != g.seed_lattice || g.complement != g.seed_complement {
                return Err("untwisted evidence must repeat the seed".into());
            }
            seed_f
        }
        _ => return Err("split prime and norm element must both be present".into()),
    };
    let ov = Lattice::glue_with_basis(&g.lattice, &g.complement, &g.glue_map).map_err(err)?;
    if ov.lattice != c.lattice {
        return Err("glued lattice differs from the certificate lattice".into());
    }
    let ext = f.direct_sum(&Isometry::identity(g.complement.clone()));
    let h = ext.in_basis(ov.lattice.clone(), &ov.basis).map_err(err)?;
    let hn = h.matrix().pow(c.power);
    if hn.to_integer().as_ref() != Some(m) {
        return Err("f is not the recorded power of the glued isometry".into());
    }
    Ok(detail)
}
