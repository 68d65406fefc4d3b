//! Python bindings: expressions, chains, forms and the verification checks.

use ::hopfcycle as core;
use core::cli::{main_with_args, run, Cli, RunConfig};
use core::expr::{self, Index, RuleSet};
use core::form_lie::{self, Direction};
use core::hochschild::{self, CycleMode};
use core::numeric::{self, NumericOptions, PointKind};
use core::{QMatrix, VerificationReport};
use pyo3::create_exception;
use pyo3::exceptions::{PyTypeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyAny, PyList};

use clap::Parser as _;

create_exception!(hopfcycle, HopfcycleError, PyValueError);

fn err(e: core::Error) -> PyErr {
    HopfcycleError::new_err(e.to_string())
}

fn to_py_json<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn report<'py>(py: Python<'py>, r: &VerificationReport) -> PyResult<Bound<'py, PyAny>> {
    to_py_json(py, r)
}

/// An index is an int (a fixed basis value, 1-based) or a one-letter name (free).
fn index(obj: &Bound<'_, PyAny>) -> PyResult<Index> {
    if let Ok(v) = obj.extract::<u32>() {
        if v == 0 {
            return Err(PyValueError::new_err("basis values are 1-based"));
        }
        return Ok(Index::Value(v));
    }
    let s: String = obj.extract()?;
    let mut chars = s.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) if c.is_ascii_lowercase() => Ok(Index::named(c)),
        _ => Err(PyValueError::new_err(format!(
            "index must be an int or a lowercase letter, got {s:?}"
        ))),
    }
}

fn rule_set(name: &str, eps: Option<i8>, colin: bool) -> PyResult<RuleSet> {
    let mut rules = match name {
        "contract" => RuleSet::CONTRACT,
        "subst" => RuleSet::SUBST,
        "subst-sym" => RuleSet::SUBST_SYM,
        other => return Err(PyValueError::new_err(format!("unknown rule set {other:?}"))),
    };
    if let Some(s) = eps {
        rules = rules.with_eps(s);
    }
    if colin {
        rules = rules.with_colin();
    }
    rules.validate().map_err(err)?;
    Ok(rules)
}

#[pyclass(name = "Matrix", module = "hopfcycle", from_py_object)]
#[derive(Clone)]
struct PyMatrix(QMatrix);

#[pymethods]
impl PyMatrix {
    /// Rows of ints or "p/q" strings.
    #[new]
    fn new(rows: &Bound<'_, PyAny>) -> PyResult<Self> {
        let text: String = rows.py().import("json")?.call_method1("dumps", (rows,))?.extract()?;
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        QMatrix::from_json(&value).map(PyMatrix).map_err(err)
    }

    #[staticmethod]
    fn identity(n: usize) -> Self {
        PyMatrix(QMatrix::identity(n))
    }

    #[staticmethod]
    fn symplectic(n: usize) -> PyResult<Self> {
        QMatrix::symplectic(n).map(PyMatrix).map_err(err)
    }

    /// Entries as "p/q" strings.
    fn to_list(&self) -> Vec<Vec<String>> {
        (0..self.0.rows())
            .map(|i| {
                (0..self.0.cols())
                    .map(|j| core::coeff::format_rational(&self.0[(i, j)]))
                    .collect()
            })
            .collect()
    }

    fn trace(&self) -> String {
        core::coeff::format_rational(&self.0.trace())
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.rows(), self.0.cols())
    }

    fn __mul__(&self, other: &PyMatrix) -> PyResult<Self> {
        if self.0.cols() != other.0.rows() {
            return Err(PyValueError::new_err("shape mismatch"));
        }
        Ok(PyMatrix(&self.0 * &other.0))
    }

    fn __eq__(&self, other: &PyMatrix) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!("Matrix({})", self.0)
    }
}

#[pyclass(name = "Expr", module = "hopfcycle", from_py_object)]
#[derive(Clone)]
struct PyExpr(expr::Expr);

#[pymethods]
impl PyExpr {
    #[staticmethod]
    fn v(i: &Bound<'_, PyAny>, j: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(PyExpr(expr::Expr::v(index(i)?, index(j)?)))
    }

    #[staticmethod]
    fn u(i: &Bound<'_, PyAny>, j: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(PyExpr(expr::Expr::u(index(i)?, index(j)?)))
    }

    #[staticmethod]
    fn one() -> Self {
        PyExpr(expr::Expr::one())
    }

    #[staticmethod]
    fn zero() -> Self {
        PyExpr(expr::Expr::zero())
    }

    /// A scalar atom: kind is "delta", "E", "Einv", "F1", "F2" or "F3".
    #[staticmethod]
    fn scalar(kind: &str, i: &Bound<'_, PyAny>, j: &Bound<'_, PyAny>) -> PyResult<Self> {
        let k = match kind {
            "delta" => expr::ScalarKind::Delta,
            "E" => expr::ScalarKind::FormE,
            "Einv" => expr::ScalarKind::FormEInv,
            "F1" => expr::ScalarKind::DerMat(1),
            "F2" => expr::ScalarKind::DerMat(2),
            "F3" => expr::ScalarKind::DerMat(3),
            other => return Err(PyValueError::new_err(format!("unknown scalar kind {other:?}"))),
        };
        Ok(PyExpr(expr::Expr::scalar(k, index(i)?, index(j)?)))
    }

    fn __add__(&self, other: &PyExpr) -> Self {
        PyExpr(self.0.add(&other.0))
    }

    fn __sub__(&self, other: &PyExpr) -> Self {
        PyExpr(self.0.sub(&other.0))
    }

    fn __neg__(&self) -> Self {
        PyExpr(self.0.scale(&core::Coeff::from_int(-1)))
    }

    /// Algebra product; repeated free indices are summed.
    fn __mul__(&self, other: &PyExpr) -> PyResult<Self> {
        expr::multiply(&self.0, &other.0).map(PyExpr).map_err(err)
    }

    /// Sums over the free index `name`.
    fn sum_over(&self, name: &Bound<'_, PyAny>) -> PyResult<Self> {
        self.0.sum_over(index(name)?).map(PyExpr).map_err(err)
    }

    #[pyo3(signature = (rules = "contract", eps = None, colin = false))]
    fn normalize(&self, rules: &str, eps: Option<i8>, colin: bool) -> PyResult<Self> {
        expr::normalize(&self.0, &rule_set(rules, eps, colin)?)
            .map(PyExpr)
            .map_err(err)
    }

    fn counit(&self) -> PyResult<Self> {
        expr::counit(&self.0).map(PyExpr).map_err(err)
    }

    /// Applies the derivation whose matrix is the symbolic `F{slot}`.
    fn derive(&self, slot: u8) -> PyResult<Self> {
        hochschild::derivation_apply(slot, &self.0).map(PyExpr).map_err(err)
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __eq__(&self, other: &PyExpr) -> bool {
        self.0 == other.0
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Expr({:?})", self.0.to_string())
    }
}

#[pyclass(name = "Chain", module = "hopfcycle", from_py_object)]
#[derive(Clone)]
struct PyChain(expr::Chain);

#[pymethods]
impl PyChain {
    /// `x0 ⊗ x1 ⊗ …`, summing indices shared between factors.
    #[staticmethod]
    fn tensor(factors: Vec<PyExpr>) -> PyResult<Self> {
        let xs: Vec<expr::Expr> = factors.into_iter().map(|f| f.0).collect();
        expr::Chain::tensor(&xs).map(PyChain).map_err(err)
    }

    #[staticmethod]
    fn zero(degree: usize) -> Self {
        PyChain(expr::Chain::zero(degree))
    }

    /// The 3-chain `c_V`.
    #[staticmethod]
    fn cv() -> Self {
        PyChain(hochschild::build_cv())
    }

    #[getter]
    fn degree(&self) -> usize {
        self.0.degree()
    }

    fn boundary(&self) -> PyResult<Self> {
        hochschild::boundary(&self.0).map(PyChain).map_err(err)
    }

    /// Cap product with the cup of three symbolic derivations.
    fn cap(&self) -> PyResult<PyExpr> {
        hochschild::cap(&self.0).map(PyExpr).map_err(err)
    }

    #[pyo3(signature = (rules = "contract", eps = None, colin = false))]
    fn normalize(&self, rules: &str, eps: Option<i8>, colin: bool) -> PyResult<Self> {
        expr::normalize_chain(&self.0, &rule_set(rules, eps, colin)?)
            .map(PyChain)
            .map_err(err)
    }

    /// Drops terms with a unit in a tensor slot other than the first.
    fn drop_degenerate(&self) -> Self {
        PyChain(self.0.drop_degenerate())
    }

    fn concrete_summand_count(&self, n: u32) -> u64 {
        self.0.concrete_summand_count(n)
    }

    fn __add__(&self, other: &PyChain) -> PyResult<Self> {
        self.0.add(&other.0).map(PyChain).map_err(err)
    }

    fn __sub__(&self, other: &PyChain) -> PyResult<Self> {
        self.0.sub(&other.0).map(PyChain).map_err(err)
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __eq__(&self, other: &PyChain) -> bool {
        self.0 == other.0
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }
}

/// `mode` is "+1", "-1", "generic" or "none".
#[pyfunction]
#[pyo3(signature = (mode = "generic"))]
fn verify_cycle<'py>(py: Python<'py>, mode: &str) -> PyResult<Bound<'py, PyAny>> {
    let m = match mode {
        "+1" | "1" => CycleMode::Sign(1),
        "-1" => CycleMode::Sign(-1),
        "generic" => CycleMode::GenericSign,
        "none" => CycleMode::GenericForm,
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    report(py, &hochschild::verify_cycle(m).map_err(err)?)
}

/// Exact pairing of `c_V` with the cup of `f1, f2, f3`, as "p/q".
#[pyfunction]
fn pairing(f1: &PyMatrix, f2: &PyMatrix, f3: &PyMatrix, e: &PyMatrix) -> PyResult<String> {
    hochschild::pairing_symbolic([&f1.0, &f2.0, &f3.0], &e.0)
        .map(|v| core::coeff::format_rational(&v))
        .map_err(err)
}

#[pyfunction]
fn so_e_basis(e: &PyMatrix) -> PyResult<Vec<PyMatrix>> {
    Ok(form_lie::so_e_basis(&e.0)
        .map_err(err)?
        .elements()
        .iter()
        .cloned()
        .map(PyMatrix)
        .collect())
}

#[pyfunction]
fn casimir(e: &PyMatrix) -> PyResult<PyMatrix> {
    form_lie::so_e_basis(&e.0)
        .and_then(|b| b.casimir_on_v())
        .map(PyMatrix)
        .map_err(err)
}

#[pyfunction]
fn total_pairing<'py>(py: Python<'py>, e: &PyMatrix) -> PyResult<Bound<'py, PyAny>> {
    let (tp, r) = form_lie::total_pairing(&e.0).map_err(err)?;
    let out = report(py, &r)?;
    out.set_item("symbolic", core::coeff::format_rational(&tp.symbolic))?;
    out.set_item("expected", core::coeff::format_rational(&tp.expected))?;
    out.set_item("lie_dim", tp.lie_dim)?;
    Ok(out)
}

/// `direction` is "forward", "backward" or "identity".
#[pyfunction]
fn selfdual<'py>(py: Python<'py>, direction: &str) -> PyResult<Bound<'py, PyAny>> {
    let r = match direction {
        "forward" => form_lie::verify_selfdual_equivalence(Direction::Forward),
        "backward" => form_lie::verify_selfdual_equivalence(Direction::Backward),
        "identity" => form_lie::identity_specialization(),
        other => return Err(PyValueError::new_err(format!("unknown direction {other:?}"))),
    };
    report(py, &r.map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (samples = 100, n = 3, seed = 0))]
fn hh0<'py>(py: Python<'py>, samples: usize, n: u32, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    report(py, &hochschild::hh0_commutator_check(samples, n, seed).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (chain, e, samples = 100, tol = 1e-9, seed = 0, points = "auto", expect_zero = true))]
#[allow(clippy::too_many_arguments)]
fn numeric_check<'py>(
    py: Python<'py>,
    chain: &PyChain,
    e: &PyMatrix,
    samples: usize,
    tol: f64,
    seed: u64,
    points: &str,
    expect_zero: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let points = match points {
        "auto" => PointKind::Auto,
        "classical" => PointKind::Classical,
        "cyclic" => PointKind::Cyclic,
        other => return Err(PyValueError::new_err(format!("unknown point kind {other:?}"))),
    };
    let opts = NumericOptions {
        samples,
        tol,
        seed,
        points,
        derivations: None,
        expect_zero,
    };
    report(py, &numeric::numeric_zero_check(&chain.0, &e.0, &opts).map_err(err)?)
}

/// Runs the command line with `args` (without the program name) and returns
/// `(exit_code, document)`.
#[pyfunction]
fn run_cli<'py>(py: Python<'py>, args: &Bound<'py, PyList>) -> PyResult<(i32, Bound<'py, PyAny>)> {
    let mut argv = vec!["hopfcycle".to_string()];
    for a in args.iter() {
        argv.push(a.extract()?);
    }
    let cli = Cli::try_parse_from(&argv).map_err(|e| PyTypeError::new_err(e.to_string()))?;
    let outcome = run(&RunConfig::from(cli));
    Ok((outcome.exit_code, to_py_json(py, &outcome.document)?))
}

/// Runs the command line as the executable would, printing the report.
#[pyfunction]
fn main(args: Vec<String>) -> i32 {
    main_with_args(std::iter::once("hopfcycle".to_string()).chain(args))
}

#[pymodule]
#[pyo3(name = "hopfcycle")]
fn hopfcycle_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("HopfcycleError", m.py().get_type::<HopfcycleError>())?;
    m.add_class::<PyMatrix>()?;
    m.add_class::<PyExpr>()?;
    m.add_class::<PyChain>()?;
    m.add_function(wrap_pyfunction!(verify_cycle, m)?)?;
    m.add_function(wrap_pyfunction!(pairing, m)?)?;
    m.add_function(wrap_pyfunction!(so_e_basis, m)?)?;
    m.add_function(wrap_pyfunction!(casimir, m)?)?;
    m.add_function(wrap_pyfunction!(total_pairing, m)?)?;
    m.add_function(wrap_pyfunction!(selfdual, m)?)?;
    m.add_function(wrap_pyfunction!(hh0, m)?)?;
    m.add_function(wrap_pyfunction!(numeric_check, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    m.add_function(wrap_pyfunction!(main, m)?)?;
    Ok(())
}
