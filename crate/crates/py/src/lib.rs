//! Python bindings: presentations, exact backends and the main operations.
//! Structured results come back as plain dicts and lists.

use std::sync::Arc;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use serde::Serialize;

use relhyp::backends::{backend_for, GroupBackend};
use relhyp::bounds::{compute_k, element_order, order_bound, BoundExpression, OrderResult, DEFAULT_CAP};
use relhyp::filling::{self, Budget};
use relhyp::hyperbolicity::estimate_delta;
use relhyp::presentation::extract_omega;
use relhyp::reducedness::{is_doubly_lambda_reduced, is_lambda_reduced, shorten_to_terminal};
use relhyp::suites::{self, SuiteOptions};
use relhyp::words::{self, Word};
use relhyp::{bundled, Error};

create_exception!(relhyp, RelhypError, PyException);

fn err(e: Error) -> PyErr {
    RelhypError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| RelhypError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// `(word, u, w1)` per step, then the terminal word.
type ShorteningTrace = (Vec<(String, String, String)>, String);

/// A relative presentation with its exact backend.
#[pyclass(frozen, module = "relhyp")]
struct Group {
    backend: Arc<dyn GroupBackend>,
}

impl Group {
    fn word(&self, text: &str) -> PyResult<Word> {
        self.backend.presentation().parse_word(text).map_err(err)
    }

    fn fmt(&self, w: &Word) -> String {
        if w.is_empty() {
            String::new()
        } else {
            self.backend.presentation().format_word(w)
        }
    }

    fn constants_cd(&self) -> (u64, u64) {
        self.backend.presentation().constants().map_or((1, 1), |c| (c.c, c.delta))
    }
}

#[pymethods]
impl Group {
    /// Loads a presentation document; a relative `model` path resolves
    /// against the document's directory.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let p = relhyp::load_presentation(path).map_err(err)?;
        Ok(Group {
            backend: backend_for(Arc::new(p)).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(document: &str) -> PyResult<Self> {
        let p = relhyp::parse_presentation(document).map_err(err)?;
        Ok(Group {
            backend: backend_for(Arc::new(p)).map_err(err)?,
        })
    }

    /// One of the bundled models: s3, s3z2, d4, s4cox, dinf, z2z3.
    #[staticmethod]
    fn bundled(name: &str) -> PyResult<Self> {
        if !bundled::NAMES.contains(&name) {
            return Err(RelhypError::new_err(format!("unknown bundled model `{name}`")));
        }
        Ok(Group {
            backend: bundled::backend(name),
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.backend.presentation().name.clone()
    }

    #[getter]
    fn generators(&self) -> Vec<String> {
        self.backend.presentation().x_names().to_vec()
    }

    #[getter]
    fn peripherals(&self) -> Vec<String> {
        self.backend.presentation().peripherals().iter().map(|p| p.name.clone()).collect()
    }

    #[getter]
    fn relators(&self) -> Vec<String> {
        self.backend.presentation().relators().iter().map(|r| self.fmt(r)).collect()
    }

    fn reduce(&self, word: &str) -> PyResult<String> {
        let w = words::reduce(&self.word(word)?, self.backend.presentation()).map_err(err)?;
        Ok(self.fmt(&w))
    }

    fn inverse(&self, word: &str) -> PyResult<String> {
        let w = words::inverse(&self.word(word)?, self.backend.presentation()).map_err(err)?;
        Ok(self.fmt(&w))
    }

    fn is_trivial(&self, word: &str) -> PyResult<bool> {
        self.backend.is_trivial(&self.word(word)?).map_err(err)
    }

    fn equal(&self, a: &str, b: &str) -> PyResult<bool> {
        let x = self.backend.evaluate(&self.word(a)?).map_err(err)?;
        let y = self.backend.evaluate(&self.word(b)?).map_err(err)?;
        Ok(x == y)
    }

    fn relative_length(&self, word: &str) -> PyResult<usize> {
        let g = self.backend.evaluate(&self.word(word)?).map_err(err)?;
        Ok(self.backend.relative_length(&g).map_err(err)?.value)
    }

    fn geodesic(&self, word: &str) -> PyResult<String> {
        let g = self.backend.evaluate(&self.word(word)?).map_err(err)?;
        Ok(self.fmt(&self.backend.geodesic_word(&g).map_err(err)?))
    }

    fn is_geodesic(&self, word: &str) -> PyResult<bool> {
        self.backend.is_geodesic(&self.word(word)?).map_err(err)
    }

    fn is_lambda_reduced(&self, word: &str) -> PyResult<bool> {
        is_lambda_reduced(&self.word(word)?, self.backend.as_ref()).map_err(err)
    }

    fn is_doubly_lambda_reduced(&self, word: &str) -> PyResult<bool> {
        is_doubly_lambda_reduced(&self.word(word)?, self.backend.as_ref()).map_err(err)
    }

    /// Repeated shortening: a list of `(word, u, w1)` steps and the terminal word.
    fn shorten(&self, word: &str) -> PyResult<ShorteningTrace> {
        let run = shorten_to_terminal(&self.word(word)?, self.backend.as_ref()).map_err(err)?;
        let steps = run
            .steps
            .iter()
            .map(|s| (self.fmt(&s.word), self.fmt(&s.result.u), self.fmt(&s.result.w1)))
            .collect();
        Ok((steps, self.fmt(&run.terminal)))
    }

    /// Order of the element, or None when the cap is reached first.
    #[pyo3(signature = (word, cap = DEFAULT_CAP, torsion_free = false))]
    fn order(&self, py: Python<'_>, word: &str, cap: u64, torsion_free: bool) -> PyResult<Option<u64>> {
        let w = self.word(word)?;
        let p = self.backend.presentation();
        let (c, delta) = self.constants_cd();
        let bound = match order_bound(p, &extract_omega(p), c, delta, torsion_free) {
            Ok(ob) => ob.bound,
            Err(Error::NoFiniteNonparabolic) => BoundExpression::power(u64::MAX, u64::MAX),
            Err(e) => return Err(err(e)),
        };
        let b = self.backend.clone();
        match py.detach(move || element_order(&w, b.as_ref(), &bound, cap)).map_err(err)? {
            OrderResult::Order(n) => Ok(Some(n)),
            _ => Ok(None),
        }
    }

    /// Omega, M, K and the order bound as a dict.
    #[pyo3(signature = (delta = None, torsion_free = false))]
    fn constants<'py>(&self, py: Python<'py>, delta: Option<u64>, torsion_free: bool) -> PyResult<Bound<'py, PyAny>> {
        let p = self.backend.presentation();
        let om = extract_omega(p);
        let (c, certified_delta) = self.constants_cd();
        let k = compute_k(p, &om, c).map_err(err)?;
        let ob = order_bound(p, &om, c, delta.unwrap_or(certified_delta), torsion_free).map_err(err)?;
        to_py(
            py,
            &serde_json::json!({ "m": om.m, "omega_size": om.size(), "k": k.k, "order_bound": ob }),
        )
    }

    /// Bounded filling: dict with area, rel_area, exact and the move script.
    #[pyo3(signature = (word, budget = 64, max_length = None))]
    fn fill<'py>(
        &self,
        py: Python<'py>,
        word: &str,
        budget: usize,
        max_length: Option<usize>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let w = self.word(word)?;
        let b = self.backend.clone();
        let budget = Budget {
            max_area: budget,
            max_length,
            ..Budget::default()
        };
        let f = py.detach(move || filling::fill(&w, b.as_ref(), budget)).map_err(err)?;
        let script = filling::render_script(&f.script, self.backend.presentation());
        to_py(
            py,
            &serde_json::json!({
                "area": f.area,
                "rel_area": f.rel_area,
                "exact": f.exact,
                "script": script.lines().collect::<Vec<_>>(),
            }),
        )
    }

    /// Least δ making every triangle of the ball δ-slim.
    fn delta(&self, py: Python<'_>, radius: usize) -> PyResult<usize> {
        let b = self.backend.clone();
        Ok(py.detach(move || estimate_delta(b.as_ref(), radius)).map_err(err)?.delta_ball)
    }

    /// Geodesic words of the ball, one per element, in increasing length.
    fn ball(&self, radius: usize) -> PyResult<Vec<String>> {
        Ok(self.backend.ball(radius).map_err(err)?.iter().map(|(_, w)| self.fmt(w)).collect())
    }

    /// Runs a verification suite and returns its rows.
    #[pyo3(signature = (suite = "all", max_len = 6, max_set = 4, radius = 4))]
    fn verify<'py>(
        &self,
        py: Python<'py>,
        suite: &str,
        max_len: usize,
        max_set: usize,
        radius: usize,
    ) -> PyResult<Bound<'py, PyAny>> {
        let b = self.backend.clone();
        let suite = suite.to_string();
        let opts = SuiteOptions {
            max_len,
            max_set,
            radius,
        };
        let rows = py.detach(move || suites::run(&suite, b.as_ref(), opts)).map_err(err)?;
        to_py(py, &rows)
    }

    fn __repr__(&self) -> String {
        format!("Group({:?})", self.backend.presentation().name)
    }
}

/// Runs the command-line interface in-process: returns the exit code and the
/// report text.
#[pyfunction]
fn run_cli(py: Python<'_>, args: Vec<String>) -> (i32, String) {
    let mut out = Vec::new();
    let code = py.detach(|| relhyp::cli::main_with(std::iter::once("relhyp".to_string()).chain(args), &mut out));
    (code, String::from_utf8_lossy(&out).into_owned())
}

#[pymodule(name = "relhyp")]
fn relhyp_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("RelhypError", m.py().get_type::<RelhypError>())?;
    m.add_class::<Group>()?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    m.add("BUNDLED", bundled::NAMES.to_vec())?;
    Ok(())
}
