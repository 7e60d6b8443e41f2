//! Documents read and written by the CLI that are not library types.

use dynspec_core::isometry::TwistSplitReport;
use dynspec_core::json::bigint_str;
use dynspec_core::realize::{NormElement, SplitPrime};
use dynspec_core::{
    BigInt, FiniteQuadraticForm, GlueMap, IntPolynomial, Isometry, Lattice, SalemCertificate, TwistElement,
};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyDoc {
    pub coefficients: IntPolynomial,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rejection {
    pub code: String,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SalemReport {
    pub salem: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<SalemCertificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rejection: Option<Rejection>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwistDoc {
    pub element: TwistElement,
    pub power: u32,
    #[serde(with = "bigint_str")]
    pub determinant: BigInt,
    pub isometry: Isometry,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerDoc {
    pub power: u64,
    pub isometry: Isometry,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwistSplitDoc {
    pub passed: bool,
    #[serde(with = "bigint_str")]
    pub prime: BigInt,
    pub exponent: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split_prime: Option<SplitPrime>,
    pub element: NormElement,
    #[serde(with = "bigint_str")]
    pub determinant: BigInt,
    pub p_valuation: u32,
    pub global_determinant_ok: bool,
    pub hyperbolic: bool,
    pub p_primary_form: FiniteQuadraticForm,
    pub twisted: Lattice,
}

impl TwistSplitDoc {
    pub fn new(r: TwistSplitReport, split_prime: Option<SplitPrime>, element: NormElement) -> Self {
        TwistSplitDoc {
            passed: r.passed,
            prime: r.prime,
            exponent: r.exponent,
            split_prime,
            element,
            determinant: r.determinant,
            p_valuation: r.p_valuation,
            global_determinant_ok: r.global_determinant_ok,
            hyperbolic: r.hyperbolic,
            p_primary_form: r.p_primary_form,
            twisted: r.twisted,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeInfo {
    pub lattice: Lattice,
    #[serde(with = "bigint_str")]
    pub determinant: BigInt,
    pub signature: (usize, usize),
    pub even: bool,
    pub unimodular: bool,
    /// Only for even lattices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discriminant_form: Option<FiniteQuadraticForm>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlueDoc {
    pub glued: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub glue_map: Option<GlueMap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlattice: Option<Lattice>,
    /// Overlattice basis in the coordinates of the direct sum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<String>>>,
}
