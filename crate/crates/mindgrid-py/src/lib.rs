//! Python bindings for the mindgrid engine.
//!
//! The surface mirrors how the engine is meant to be driven from analysis
//! code: load a scenario file, run inverse planning over it, then score
//! typed belief statements against the resulting posterior. Sentence
//! translation and the threshold table are exposed as module functions so a
//! notebook can chain English -> formula -> score without touching Rust.
//!
//! Build with `cargo build -p mindgrid-py --release --features
//! extension-module`; the resulting `libmindgrid_py.so` imports as
//! `mindgrid_py` once renamed or symlinked to `mindgrid_py.so`.

use std::fmt::Write as _;
use std::sync::OnceLock;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use mindgrid::btom::{run_inference, AgentVariant, InferenceConfig};
use mindgrid::cli::{parse_scenario, Scenario as ScenarioData};
use mindgrid::elot::{
    lower, parse_epistemic, print_epistemic, DomainSignature, LoweredFormula, ThresholdTable,
};
use mindgrid::evaluator::{score_statement, PriorMode, Tense};
use mindgrid::gridworld::enumerate_initial_states;
use mindgrid::translator::{translate as run_backend, FixtureBackend};

fn domain() -> &'static DomainSignature {
    static DOMAIN: OnceLock<DomainSignature> = OnceLock::new();
    DOMAIN.get_or_init(DomainSignature::doors_keys_gems)
}

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Parses and lowers one statement in concrete formula syntax.
fn compile_statement(text: &str) -> PyResult<LoweredFormula> {
    let formula = parse_epistemic(text, domain()).map_err(value_err)?;
    lower(&formula, domain()).map_err(value_err)
}

/// Builds a threshold table from optional `{name: value}` overrides. The
/// ten operator words and `alpha_most` are the valid keys.
fn table_from(overrides: Option<&Bound<'_, PyDict>>) -> PyResult<ThresholdTable> {
    let mut table = ThresholdTable::default();
    let Some(dict) = overrides else {
        return Ok(table);
    };
    let mut lines = String::new();
    for (key, value) in dict.iter() {
        let name: String = key.extract()?;
        let value: f64 = value.extract()?;
        let _ = writeln!(lines, "{name} {value}");
    }
    table.apply_overrides(&lines).map_err(value_err)?;
    Ok(table)
}

/// A parsed, replay-validated scenario file.
#[pyclass(frozen)]
struct Scenario {
    inner: ScenarioData,
}

#[pymethods]
impl Scenario {
    /// Parses scenario text (the same format the CLI reads).
    #[staticmethod]
    #[pyo3(signature = (text, name = "<memory>"))]
    fn from_text(text: &str, name: &str) -> PyResult<Scenario> {
        let inner = parse_scenario(text, name).map_err(value_err)?;
        Ok(Scenario { inner })
    }

    /// Reads and parses a scenario file.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Scenario> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PyValueError::new_err(format!("read {path}: {e}")))?;
        let inner = parse_scenario(&text, path).map_err(value_err)?;
        Ok(Scenario { inner })
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn n_actions(&self) -> usize {
        self.inner.actions.len()
    }

    /// Gem names in goal-index order, labeling `Posterior.goal_posterior`.
    #[getter]
    fn gems(&self) -> Vec<&'static str> {
        self.inner.map.gems.iter().map(|&(k, _)| k.as_str()).collect()
    }

    /// Named judgment points as `{name: actions_taken}`.
    #[getter]
    fn judgment_points(&self) -> std::collections::BTreeMap<String, usize> {
        self.inner.points.iter().cloned().collect()
    }

    /// Runs inverse planning over the scenario's action sequence.
    ///
    /// `beta` is the Boltzmann inverse temperature, `particles` the agent
    /// belief resolution, `variant` one of `full`, `true_belief`, or
    /// `non_planning`. Omitted settings keep the engine defaults.
    #[pyo3(signature = (beta = None, particles = None, variant = "full"))]
    fn run(&self, beta: Option<f64>, particles: Option<u8>, variant: &str) -> PyResult<Posterior> {
        let mut config = InferenceConfig::default();
        if let Some(beta) = beta {
            config.beta = beta;
        }
        if let Some(particles) = particles {
            config.particles = particles;
        }
        config.variant = AgentVariant::parse(variant)
            .ok_or_else(|| PyValueError::new_err(format!("unknown agent variant `{variant}`")))?;
        let candidates = enumerate_initial_states(&self.inner.map, &self.inner.rules);
        let true_initial = self.inner.map.initial_state(&self.inner.contents);
        let inner = run_inference(
            &self.inner.map,
            &candidates,
            &true_initial,
            &self.inner.actions,
            &config,
        )
        .map_err(value_err)?;
        Ok(Posterior { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(name={:?}, actions={}, gems={})",
            self.inner.name,
            self.inner.actions.len(),
            self.inner.map.gems.len()
        )
    }
}

/// Inverse-planning output: per-hypothesis weights after every action
/// prefix, plus statement scoring against them.
#[pyclass(frozen)]
struct Posterior {
    inner: mindgrid::btom::Posterior,
}

impl Posterior {
    fn check_t(&self, t: usize) -> PyResult<()> {
        let horizon = self.inner.horizon();
        if t > horizon {
            return Err(PyValueError::new_err(format!(
                "time {t} out of range (horizon {horizon})"
            )));
        }
        Ok(())
    }
}

#[pymethods]
impl Posterior {
    /// Number of observed actions; valid times are `0..=horizon`.
    #[getter]
    fn horizon(&self) -> usize {
        self.inner.horizon()
    }

    #[getter]
    fn n_hypotheses(&self) -> usize {
        self.inner.n_hypotheses()
    }

    /// Normalized hypothesis weights after `t` actions, or None when every
    /// hypothesis is ruled out.
    fn weights_at(&self, t: usize) -> PyResult<Option<Vec<f64>>> {
        self.check_t(t)?;
        Ok(self.inner.weights_at(t))
    }

    /// Posterior over goal gems after `t` actions (see `Scenario.gems`
    /// for the labels), or None when every hypothesis is ruled out.
    fn goal_posterior(&self, t: usize) -> PyResult<Option<Vec<f64>>> {
        self.check_t(t)?;
        Ok(self.inner.goal_posterior(t))
    }

    /// Scores one statement after `judgment_t` actions.
    ///
    /// `statement` uses concrete formula syntax, e.g.
    /// `believes(player, formula(inside(K, box1)))`. `tense` is `initial`
    /// or `current`; `prior_mode` is `statement` (normalize against the
    /// pre-behavior prior) or `worlds` (report raw posterior mass);
    /// `thresholds` optionally overrides operator thresholds by name.
    /// Returns `{"raw", "prior", "score"}`, or None when every hypothesis
    /// is ruled out.
    #[pyo3(signature = (statement, judgment_t, tense = "current", prior_mode = "statement", thresholds = None))]
    fn score(
        &self,
        statement: &str,
        judgment_t: usize,
        tense: &str,
        prior_mode: &str,
        thresholds: Option<&Bound<'_, PyDict>>,
    ) -> PyResult<Option<std::collections::BTreeMap<&'static str, f64>>> {
        self.check_t(judgment_t)?;
        let formula = compile_statement(statement)?;
        let tense = Tense::parse(tense)
            .ok_or_else(|| PyValueError::new_err(format!("unknown tense `{tense}`")))?;
        let mode = PriorMode::parse(prior_mode)
            .ok_or_else(|| PyValueError::new_err(format!("unknown prior mode `{prior_mode}`")))?;
        let table = table_from(thresholds)?;
        let scored = score_statement(&self.inner, judgment_t, tense, &formula, &table, mode);
        Ok(scored.map(|s| {
            [("raw", s.raw), ("prior", s.prior), ("score", s.score)]
                .into_iter()
                .collect()
        }))
    }

    fn __repr__(&self) -> String {
        format!(
            "Posterior(hypotheses={}, horizon={})",
            self.inner.n_hypotheses(),
            self.inner.horizon()
        )
    }
}

/// Parses a statement and returns its canonical printed form, or raises
/// ValueError with the parse or type error.
#[pyfunction]
fn canonical(statement: &str) -> PyResult<String> {
    let formula = parse_epistemic(statement, domain()).map_err(value_err)?;
    Ok(print_epistemic(&formula))
}

/// Translates an English sentence with the built-in reference backend.
/// Returns `(formula, weight)` candidates, best first, weights summing
/// to one.
#[pyfunction]
#[pyo3(signature = (sentence, n = 5))]
fn translate(sentence: &str, n: usize) -> PyResult<Vec<(String, f64)>> {
    let mut backend = FixtureBackend::gold();
    let translation = run_backend(&mut backend, sentence, domain(), n).map_err(value_err)?;
    Ok(translation
        .candidates
        .iter()
        .map(|(f, w)| (print_epistemic(f), *w))
        .collect())
}

/// The calibrated default thresholds, `{name: value}` plus `alpha_most`.
#[pyfunction]
fn default_thresholds() -> std::collections::BTreeMap<&'static str, f64> {
    ThresholdTable::default().entries()
}

#[pymodule]
fn mindgrid_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Scenario>()?;
    m.add_class::<Posterior>()?;
    m.add_function(wrap_pyfunction!(canonical, m)?)?;
    m.add_function(wrap_pyfunction!(translate, m)?)?;
    m.add_function(wrap_pyfunction!(default_thresholds, m)?)?;
    Ok(())
}
