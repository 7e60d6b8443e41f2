//! Python bindings: `import dynspec`.
//!
//! Polynomials are ascending coefficient lists, Gram matrices are lists of
//! integer rows and rational matrices accept ints, `fractions.Fraction` or
//! `"num/den"` strings. Reports are returned as plain dicts mirroring the
//! JSON formats of the CLI.

use dynspec_core::isometry::{companion, power_to_integral, twist, twist_split_certificate};
use dynspec_core::json::parse_rational;
use dynspec_core::lattice::local::{hilbert, legendre, Place};
use dynspec_core::linalg::{QMatrix, ZMatrix};
use dynspec_core::polyarith::{discriminant, is_salem, power_min_poly, resultant, square_class_test, trace_polynomial};
use dynspec_core::positivity::{is_positive_with, PositivityOptions};
use dynspec_core::realize::{
    build_certificate, curated_seed, find_split_prime, mod2_trivial, rational_isometry_criterion, stable_realizable,
    verify_certificate, BuildOptions, Seed,
};
use dynspec_core::{
    BigInt, BigRational, GlueMap, IntPolynomial, Isometry, Lattice, RealizationCertificate, SurfaceClass, TwistElement,
};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList, PyTuple};
use pyo3::IntoPyObjectExt;
use serde::Serialize;
use serde_json::Value;

create_exception!(
    dynspec,
    DynspecError,
    PyValueError,
    "Raised when a dynspec operation fails."
);

fn err(e: dynspec_core::Error) -> PyErr {
    DynspecError::new_err(e.to_string())
}

fn value_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_bound_py_any(py)?,
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_bound_py_any(py)?,
            None => n.as_f64().into_bound_py_any(py)?,
        },
        Value::String(s) => s.into_bound_py_any(py)?,
        Value::Array(a) => {
            let items = a.iter().map(|x| value_to_py(py, x)).collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, items)?.into_any()
        }
        Value::Object(m) => {
            let d = PyDict::new(py);
            for (k, x) in m {
                d.set_item(k, value_to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

fn to_py<'py, T: Serialize>(py: Python<'py>, x: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(x).map_err(|e| DynspecError::new_err(e.to_string()))?;
    value_to_py(py, &v)
}

fn from_json<T: serde::de::DeserializeOwned>(s: &str) -> PyResult<T> {
    serde_json::from_str(s).map_err(|e| DynspecError::new_err(e.to_string()))
}

fn to_json<T: Serialize>(x: &T) -> String {
    serde_json::to_string_pretty(x).expect("serializes")
}

fn rational(obj: &Bound<'_, PyAny>) -> PyResult<BigRational> {
    if let Ok(i) = obj.extract::<BigInt>() {
        return Ok(BigRational::from_integer(i));
    }
    if let Ok(s) = obj.extract::<String>() {
        return parse_rational(&s).map_err(err);
    }
    let n: BigInt = obj.getattr("numerator")?.extract()?;
    let d: BigInt = obj.getattr("denominator")?.extract()?;
    if d == BigInt::from(0) {
        return Err(DynspecError::new_err("zero denominator"));
    }
    Ok(BigRational::new(n, d))
}

fn fraction<'py>(py: Python<'py>, x: &BigRational) -> PyResult<Bound<'py, PyAny>> {
    let frac = py.import("fractions")?.getattr("Fraction")?;
    frac.call1((x.numer().clone(), x.denom().clone()))
}

fn rational_matrix(obj: &Bound<'_, PyAny>) -> PyResult<QMatrix> {
    let rows: Vec<Vec<Bound<'_, PyAny>>> = obj.extract()?;
    let rows = rows
        .iter()
        .map(|r| r.iter().map(rational).collect::<PyResult<Vec<_>>>())
        .collect::<PyResult<Vec<_>>>()?;
    QMatrix::from_rows(rows).map_err(err)
}

fn integer_matrix(rows: Vec<Vec<BigInt>>) -> PyResult<ZMatrix> {
    ZMatrix::from_rows(rows).map_err(err)
}

fn poly_arg(obj: &Bound<'_, PyAny>) -> PyResult<IntPolynomial> {
    if let Ok(p) = obj.cast::<Polynomial>() {
        return Ok(p.get().inner.clone());
    }
    let c: Vec<BigInt> = obj.extract()?;
    Ok(IntPolynomial::new(c))
}

fn lattice_arg(obj: &Bound<'_, PyAny>) -> PyResult<Lattice> {
    if let Ok(l) = obj.cast::<PyLattice>() {
        return Ok(l.get().inner.clone());
    }
    if let Ok(name) = obj.extract::<String>() {
        return Lattice::named(&name).map_err(err);
    }
    let rows: Vec<Vec<BigInt>> = obj.extract()?;
    Lattice::new(integer_matrix(rows)?).map_err(err)
}

fn class_arg(s: &str) -> PyResult<SurfaceClass> {
    s.parse().map_err(err)
}

/// An integer polynomial, from ascending coefficients.
#[pyclass(name = "Polynomial", module = "dynspec", frozen, eq)]
#[derive(PartialEq)]
pub struct Polynomial {
    inner: IntPolynomial,
}

#[pymethods]
impl Polynomial {
    #[new]
    fn new(coefficients: Vec<BigInt>) -> Self {
        Polynomial {
            inner: IntPolynomial::new(coefficients),
        }
    }

    #[getter]
    fn coefficients(&self) -> Vec<BigInt> {
        self.inner.coeffs().to_vec()
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Polynomial({:?})", self.inner.to_strings())
    }

    /// `{"salem": True, "certificate": {...}}` or `{"salem": False, "code", "reason"}`.
    fn is_salem<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        salem_report(py, &self.inner)
    }

    fn trace_polynomial(&self) -> PyResult<Polynomial> {
        Ok(Polynomial {
            inner: trace_polynomial(&self.inner).map_err(err)?,
        })
    }

    fn discriminant(&self) -> PyResult<BigInt> {
        discriminant(&self.inner).map_err(err)
    }

    fn resultant(&self, other: &Bound<'_, PyAny>) -> PyResult<BigInt> {
        resultant(&self.inner, &poly_arg(other)?).map_err(err)
    }

    /// Minimal polynomial of `lambda^n`.
    fn power_min_poly(&self, n: u64) -> PyResult<Polynomial> {
        Ok(Polynomial {
            inner: power_min_poly(&self.inner, n).map_err(err)?,
        })
    }

    /// Whether `-s(1)s(-1)` is a rational square.
    fn square_class(&self) -> PyResult<bool> {
        square_class_test(&self.inner).map_err(err)
    }
}

fn salem_report<'py>(py: Python<'py>, s: &IntPolynomial) -> PyResult<Bound<'py, PyAny>> {
    let d = PyDict::new(py);
    match is_salem(s) {
        Ok(c) => {
            d.set_item("salem", true)?;
            d.set_item("certificate", to_py(py, &c)?)?;
        }
        Err(r) => {
            d.set_item("salem", false)?;
            d.set_item("code", r.code())?;
            d.set_item("reason", r.to_string())?;
        }
    }
    Ok(d.into_any())
}

/// A lattice given by an integer Gram matrix.
#[pyclass(name = "Lattice", module = "dynspec", frozen, eq)]
#[derive(PartialEq)]
pub struct PyLattice {
    inner: Lattice,
}

#[pymethods]
impl PyLattice {
    #[new]
    fn new(gram: Vec<Vec<BigInt>>) -> PyResult<Self> {
        Ok(PyLattice {
            inner: Lattice::new(integer_matrix(gram)?).map_err(err)?,
        })
    }

    /// Built-in lattices: `U`, `E8`, `3U+2E8`, `A2(-1)`, `U(5)`, ...
    #[staticmethod]
    fn named(name: &str) -> PyResult<Self> {
        Ok(PyLattice {
            inner: Lattice::named(name).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(PyLattice { inner: from_json(s)? })
    }

    fn to_json(&self) -> String {
        to_json(&self.inner)
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    #[getter]
    fn gram(&self) -> Vec<Vec<BigInt>> {
        self.inner.gram().to_rows()
    }

    #[getter]
    fn determinant(&self) -> BigInt {
        self.inner.determinant()
    }

    #[getter]
    fn signature(&self) -> (usize, usize) {
        self.inner.signature()
    }

    fn is_even(&self) -> bool {
        self.inner.is_even()
    }

    fn is_unimodular(&self) -> bool {
        self.inner.is_unimodular()
    }

    /// `{"orders": [...], "q": [...], "b": [[...]]}` for an even lattice.
    fn discriminant_form<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.discriminant_form().map_err(err)?)
    }

    /// Vectors of norm -2 (definite lattices only).
    fn roots(&self) -> PyResult<Vec<Vec<BigInt>>> {
        self.inner.roots().map_err(err)
    }

    fn direct_sum(&self, other: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(PyLattice {
            inner: self.inner.direct_sum(&lattice_arg(other)?),
        })
    }

    /// Overlattice of `self ⊕ other` along an anti-isometry of discriminant
    /// forms, or `None` if the forms are not anti-isometric.
    fn glue(&self, other: &Bound<'_, PyAny>) -> PyResult<Option<Self>> {
        let n = lattice_arg(other)?;
        let qm = self.inner.discriminant_form().map_err(err)?;
        let qn = n.discriminant_form().map_err(err)?;
        match GlueMap::find(&qm, &qn).map_err(err)? {
            None => Ok(None),
            Some(phi) => Ok(Some(PyLattice {
                inner: Lattice::glue(&self.inner, &n, &phi).map_err(err)?,
            })),
        }
    }

    /// The sublattice spanned by the given rows.
    fn sublattice(&self, basis: Vec<Vec<BigInt>>) -> PyResult<Self> {
        Ok(PyLattice {
            inner: self.inner.sublattice(&integer_matrix(basis)?).map_err(err)?,
        })
    }

    /// Orthogonal complement of the primitive sublattice spanned by the rows.
    fn orthogonal_complement(&self, basis: Vec<Vec<BigInt>>) -> PyResult<Self> {
        Ok(PyLattice {
            inner: self
                .inner
                .orthogonal_complement(&integer_matrix(basis)?)
                .map_err(err)?
                .lattice,
        })
    }

    fn __repr__(&self) -> String {
        format!("Lattice(rank={}, det={})", self.inner.rank(), self.inner.determinant())
    }
}

/// A rational matrix `M` with `M^T G M = G`.
#[pyclass(name = "Isometry", module = "dynspec", frozen, eq)]
#[derive(PartialEq)]
pub struct PyIsometry {
    inner: Isometry,
}

#[pymethods]
impl PyIsometry {
    #[new]
    fn new(lattice: &Bound<'_, PyAny>, matrix: &Bound<'_, PyAny>) -> PyResult<Self> {
        let l = lattice_arg(lattice)?;
        Ok(PyIsometry {
            inner: Isometry::new(l, rational_matrix(matrix)?).map_err(err)?,
        })
    }

    /// The companion matrix of `poly` acting on the lattice.
    #[staticmethod]
    fn companion(poly: &Bound<'_, PyAny>, lattice: &Bound<'_, PyAny>) -> PyResult<Self> {
        let c = companion(&poly_arg(poly)?).map_err(err)?;
        Ok(PyIsometry {
            inner: Isometry::from_integer(lattice_arg(lattice)?, c).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(PyIsometry { inner: from_json(s)? })
    }

    fn to_json(&self) -> String {
        to_json(&self.inner)
    }

    #[getter]
    fn lattice(&self) -> PyLattice {
        PyLattice {
            inner: self.inner.lattice().clone(),
        }
    }

    /// Entries as `fractions.Fraction`.
    #[getter]
    fn matrix<'py>(&self, py: Python<'py>) -> PyResult<Vec<Vec<Bound<'py, PyAny>>>> {
        self.inner
            .matrix()
            .to_rows()
            .iter()
            .map(|r| r.iter().map(|x| fraction(py, x)).collect())
            .collect()
    }

    fn is_integral(&self) -> bool {
        self.inner.is_integral()
    }

    fn charpoly(&self) -> PyResult<Polynomial> {
        Ok(Polynomial {
            inner: self.inner.charpoly().map_err(err)?,
        })
    }

    fn pow(&self, n: u64) -> Self {
        PyIsometry {
            inner: self.inner.pow(n),
        }
    }

    fn __pow__(&self, n: u64, _modulo: Option<Bound<'_, PyAny>>) -> Self {
        self.pow(n)
    }

    /// `(n, f^n)` with `n` minimal such that `f^n` is integral.
    fn power_to_integral(&self) -> PyResult<(u64, Self)> {
        let (n, g) = power_to_integral(&self.inner).map_err(err)?;
        Ok((n, PyIsometry { inner: g }))
    }

    /// Twist the form by `a(f + f^-1)^power`, `a` given by ascending
    /// coefficients in `w`.
    #[pyo3(signature = (element, power = 1))]
    fn twist(&self, element: &Bound<'_, PyAny>, power: u32) -> PyResult<Self> {
        let t = TwistElement::new(poly_arg(element)?).pow(power);
        let (_, g) = twist(&self.inner, &t).map_err(err)?;
        Ok(PyIsometry { inner: g })
    }

    /// Positivity report (status, method, witnesses, ...).
    #[pyo3(signature = (search = false, orbit_bound = 1000))]
    fn is_positive<'py>(&self, py: Python<'py>, search: bool, orbit_bound: usize) -> PyResult<Bound<'py, PyAny>> {
        let opts = PositivityOptions {
            orbit_bound,
            always_search: search,
            ..PositivityOptions::default()
        };
        to_py(py, &is_positive_with(&self.inner, &opts).map_err(err)?)
    }

    /// Twist by `t^n` with `N(t) = p` and check the p-part of the
    /// discriminant form.
    fn twist_split_check<'py>(
        &self,
        py: Python<'py>,
        element: &Bound<'_, PyAny>,
        n: u32,
        p: BigInt,
    ) -> PyResult<Bound<'py, PyAny>> {
        let t = TwistElement::new(poly_arg(element)?);
        let r = twist_split_certificate(&self.inner, &t, n, &p).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("passed", r.passed)?;
        d.set_item("determinant", r.determinant)?;
        d.set_item("p_valuation", r.p_valuation)?;
        d.set_item("hyperbolic", r.hyperbolic)?;
        d.set_item("p_primary_form", to_py(py, &r.p_primary_form)?)?;
        d.set_item("twisted", PyLattice { inner: r.twisted })?;
        Ok(d.into_any())
    }

    fn mod2_trivial(&self) -> bool {
        mod2_trivial(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "Isometry(rank={}, integral={})",
            self.inner.rank(),
            self.inner.is_integral()
        )
    }
}

/// A realization certificate.
#[pyclass(name = "Certificate", module = "dynspec", frozen)]
pub struct PyCertificate {
    inner: RealizationCertificate,
}

#[pymethods]
impl PyCertificate {
    /// Runs the certificate pipeline from a seed (JSON text) or, without
    /// one, from the curated seed for the class.
    #[staticmethod]
    #[pyo3(signature = (poly, cls = "k3", seed = None, prime_lower_bound = None, square_twist = false))]
    fn build(
        py: Python<'_>,
        poly: &Bound<'_, PyAny>,
        cls: &str,
        seed: Option<&str>,
        prime_lower_bound: Option<u64>,
        square_twist: bool,
    ) -> PyResult<Self> {
        let s = poly_arg(poly)?;
        let seed = match seed {
            Some(text) => Seed::from_json(text).map_err(err)?,
            None => curated_seed(&s, class_arg(cls)?)
                .ok_or_else(|| DynspecError::new_err(format!("no curated {cls} seed for {s}")))?,
        };
        let opts = BuildOptions {
            prime_lower_bound,
            square_twist,
            ..BuildOptions::default()
        };
        let c = py.detach(|| build_certificate(&s, &seed, true, &opts)).map_err(err)?;
        Ok(PyCertificate { inner: c })
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(PyCertificate {
            inner: RealizationCertificate::from_json(s).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    /// `{"verified": bool, "items": [{"name", "passed", "detail"}, ...]}`.
    fn verify<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let r = py.detach(|| verify_certificate(&self.inner));
        to_py(py, &r)
    }

    /// The certificate for `f^m`.
    fn power_by(&self, m: u64) -> PyResult<Self> {
        Ok(PyCertificate {
            inner: self.inner.power(m).map_err(err)?,
        })
    }

    #[getter]
    fn power(&self) -> u64 {
        self.inner.power
    }

    #[getter]
    fn surface_class(&self) -> String {
        self.inner.class.to_string()
    }

    #[getter]
    fn projective(&self) -> bool {
        self.inner.projective
    }

    #[getter]
    fn salem(&self) -> Polynomial {
        Polynomial {
            inner: self.inner.salem.clone(),
        }
    }

    #[getter]
    fn power_salem(&self) -> Polynomial {
        Polynomial {
            inner: self.inner.power_salem.clone(),
        }
    }

    #[getter]
    fn kernel_signature(&self) -> (usize, usize) {
        self.inner.kernel.signature
    }

    #[getter]
    fn lattice(&self) -> PyLattice {
        PyLattice {
            inner: self.inner.lattice.clone(),
        }
    }

    #[getter]
    fn isometry(&self) -> PyResult<PyIsometry> {
        Ok(PyIsometry {
            inner: self.inner.isometry().map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Certificate(class={}, salem={}, power={})",
            self.inner.class, self.inner.salem, self.inner.power
        )
    }
}

/// Salem test for a polynomial or coefficient list.
#[pyfunction(name = "is_salem")]
fn py_is_salem<'py>(py: Python<'py>, poly: &Bound<'_, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    salem_report(py, &poly_arg(poly)?)
}

#[pyfunction(name = "stable_realizable")]
#[pyo3(signature = (poly, cls, projective = false))]
fn py_stable_realizable<'py>(
    py: Python<'py>,
    poly: &Bound<'_, PyAny>,
    cls: &str,
    projective: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let d = stable_realizable(&poly_arg(poly)?, class_arg(cls)?, projective).map_err(err)?;
    to_py(py, &d)
}

#[pyfunction(name = "rational_isometry_criterion")]
fn py_rational_isometry_criterion<'py>(
    py: Python<'py>,
    poly: &Bound<'_, PyAny>,
    lattice: &Bound<'_, PyAny>,
) -> PyResult<Bound<'py, PyAny>> {
    let d = rational_isometry_criterion(&poly_arg(poly)?, &lattice_arg(lattice)?).map_err(err)?;
    to_py(py, &d)
}

#[pyfunction(name = "find_split_prime")]
#[pyo3(signature = (poly, det_r = 1, lower_bound = 2, cap = 1_000_000))]
fn py_find_split_prime<'py>(
    py: Python<'py>,
    poly: &Bound<'_, PyAny>,
    det_r: i64,
    lower_bound: u64,
    cap: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let sp = find_split_prime(&poly_arg(poly)?, &BigInt::from(det_r), lower_bound, cap).map_err(err)?;
    to_py(py, &sp)
}

/// Hilbert symbol `(a, b)_p`; `p = None` is the real place.
#[pyfunction(name = "hilbert_symbol")]
#[pyo3(signature = (a, b, p = None))]
fn py_hilbert_symbol(a: &Bound<'_, PyAny>, b: &Bound<'_, PyAny>, p: Option<BigInt>) -> PyResult<i32> {
    let place = match p {
        Some(p) => Place::Finite(p),
        None => Place::Infinite,
    };
    hilbert(&rational(a)?, &rational(b)?, &place).map_err(err)
}

#[pyfunction(name = "legendre")]
fn py_legendre(a: BigInt, p: BigInt) -> PyResult<i32> {
    legendre(&a, &p).map_err(err)
}

#[pymodule]
pub fn dynspec(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DynspecError", m.py().get_type::<DynspecError>())?;
    m.add_class::<Polynomial>()?;
    m.add_class::<PyLattice>()?;
    m.add_class::<PyIsometry>()?;
    m.add_class::<PyCertificate>()?;
    m.add_function(wrap_pyfunction!(py_is_salem, m)?)?;
    m.add_function(wrap_pyfunction!(py_stable_realizable, m)?)?;
    m.add_function(wrap_pyfunction!(py_rational_isometry_criterion, m)?)?;
    m.add_function(wrap_pyfunction!(py_find_split_prime, m)?)?;
    m.add_function(wrap_pyfunction!(py_hilbert_symbol, m)?)?;
    m.add_function(wrap_pyfunction!(py_legendre, m)?)?;
    m.add("SURFACE_CLASSES", PyTuple::new(m.py(), ["torus", "k3", "enriques"])?)?;
    Ok(())
}
