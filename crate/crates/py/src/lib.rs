//! Python bindings. Rationals cross the boundary as `"n/d"` strings (or
//! Python ints on input); atom indices are 0-based.

use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use lrspace::experiments;
use lrspace::filtration::{self, Decision};
use lrspace::partition::{self as part, ProbeSequence};
use lrspace::process;
use lrspace::rational::{self, Rational};
use lrspace::{io, Error};

fn py_err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Accepts `int`, `str` (`"n/d"`) or anything whose `str()` is a fraction,
/// such as `fractions.Fraction`.
fn to_rational(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    let text = match obj.extract::<String>() {
        Ok(s) => s,
        Err(_) => obj.str()?.to_string(),
    };
    rational::parse(text.trim()).map_err(py_err)
}

fn to_rationals(objs: &[Bound<'_, PyAny>]) -> PyResult<Vec<Rational>> {
    objs.iter().map(to_rational).collect()
}

fn fmt_all(qs: &[Rational]) -> Vec<String> {
    qs.iter().map(rational::fmt_exact).collect()
}

#[pyclass(name = "ProbSpace", module = "lrspace_py", frozen, from_py_object)]
#[derive(Clone)]
struct PySpace(Arc<lrspace::ProbSpace>);

#[pymethods]
impl PySpace {
    #[new]
    #[pyo3(signature = (atoms, continuum = None))]
    fn new(atoms: Vec<Bound<'_, PyAny>>, continuum: Option<Bound<'_, PyAny>>) -> PyResult<Self> {
        let m0 = continuum.as_ref().map(to_rational).transpose()?.unwrap_or_else(rational::zero);
        Ok(PySpace(Arc::new(lrspace::ProbSpace::new(to_rationals(&atoms)?, m0).map_err(py_err)?)))
    }

    #[staticmethod]
    fn uniform(n: usize) -> Self {
        PySpace(Arc::new(lrspace::ProbSpace::uniform(n)))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let v = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PySpace(Arc::new(io::space_from_json(&v).map_err(py_err)?)))
    }

    fn to_json(&self) -> String {
        io::render(&io::space_to_json(&self.0))
    }

    fn atoms(&self) -> Vec<String> {
        fmt_all(self.0.atoms())
    }

    fn continuum(&self) -> String {
        rational::fmt_exact(self.0.continuum())
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    /// `(m0, [m1, m2, ...])` with atoms in descending order.
    fn rokhlin_invariant(&self) -> (String, Vec<String>) {
        let inv = self.0.rokhlin_invariant().to_space();
        (rational::fmt_exact(inv.continuum()), fmt_all(inv.atoms()))
    }

    fn is_isomorphic(&self, other: &PySpace) -> bool {
        self.0.is_isomorphic(&other.0)
    }

    fn materialize(&self, resolution: u32) -> Self {
        PySpace(Arc::new(self.0.materialize(resolution)))
    }

    fn __repr__(&self) -> String {
        format!("ProbSpace(atoms={:?}, continuum={:?})", self.atoms(), self.continuum())
    }
}

#[pyclass(name = "Partition", module = "lrspace_py", frozen, from_py_object, eq, hash)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyPartition(lrspace::Partition);

#[pymethods]
impl PyPartition {
    #[new]
    fn new(space: &PySpace, blocks: Vec<Vec<usize>>) -> PyResult<Self> {
        Ok(PyPartition(lrspace::Partition::from_blocks(space.0.clone(), blocks).map_err(py_err)?))
    }

    #[staticmethod]
    fn from_labels(space: &PySpace, labels: Vec<i64>) -> PyResult<Self> {
        if labels.len() != space.0.len() {
            return Err(py_err(Error::LengthMismatch { expected: space.0.len(), got: labels.len() }));
        }
        Ok(PyPartition(lrspace::Partition::from_labels(space.0.clone(), &labels)))
    }

    #[staticmethod]
    fn trivial(space: &PySpace) -> Self {
        PyPartition(lrspace::Partition::trivial(space.0.clone()))
    }

    #[staticmethod]
    fn discrete(space: &PySpace) -> Self {
        PyPartition(lrspace::Partition::discrete(space.0.clone()))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let v = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyPartition(io::partition_from_json(&v, None, None).map_err(py_err)?))
    }

    fn to_json(&self) -> String {
        io::render(&io::partition_to_json(&self.0))
    }

    fn space(&self) -> PySpace {
        PySpace(self.0.ambient().clone())
    }

    fn blocks(&self) -> Vec<Vec<usize>> {
        self.0.blocks().to_vec()
    }

    fn block_masses(&self) -> Vec<String> {
        fmt_all(&self.0.block_masses())
    }

    fn is_coarser_than(&self, finer: &PyPartition) -> bool {
        self.0.is_coarser_than(&finer.0)
    }

    fn join(&self, other: &PyPartition) -> PyResult<Self> {
        self.0.join(&other.0).map(PyPartition).map_err(py_err)
    }

    fn meet(&self, other: &PyPartition) -> PyResult<Self> {
        self.0.meet(&other.0).map(PyPartition).map_err(py_err)
    }

    fn independent(&self, other: &PyPartition) -> PyResult<bool> {
        self.0.independent(&other.0).map_err(py_err)
    }

    fn product(&self, other: &PyPartition) -> PyResult<Self> {
        self.0.product(&other.0).map(PyPartition).map_err(py_err)
    }

    fn cond_exp(&self, f: Vec<Bound<'_, PyAny>>) -> PyResult<Vec<String>> {
        Ok(fmt_all(&self.0.cond_exp(&to_rationals(&f)?).map_err(py_err)?))
    }

    fn operator(&self) -> Vec<Vec<String>> {
        self.0.operator().matrix().iter().map(|r| fmt_all(r)).collect()
    }

    /// Probe metric with the canonical probe sequence of the ambient.
    fn sigma_metric(&self, other: &PyPartition) -> PyResult<String> {
        let probes = ProbeSequence::canonical(self.0.ambient().clone()).map_err(py_err)?;
        Ok(rational::fmt_exact(&part::sigma_metric(&self.0, &other.0, &probes).map_err(py_err)?))
    }

    /// `ψ(finer | self)`.
    fn psi(&self, finer: &PyPartition) -> PyResult<String> {
        Ok(rational::fmt_exact(&part::psi_conditional_atomicity(&self.0, &finer.0).map_err(py_err)?))
    }

    fn conditionally_uniform(&self, finer: &PyPartition) -> PyResult<bool> {
        part::conditionally_uniform(&self.0, &finer.0).map_err(py_err)
    }

    fn orbit_equivalent(&self, other: &PyPartition) -> PyResult<bool> {
        experiments::orbit_equivalent(&self.0, &other.0).map_err(py_err)
    }

    fn permuted(&self, perm: Vec<usize>) -> PyResult<Self> {
        let g = experiments::Automorphism::new(self.0.ambient().clone(), perm).map_err(py_err)?;
        g.act(&self.0).map(PyPartition).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("Partition({:?})", self.0.blocks())
    }
}

#[pyclass(name = "Morphism", module = "lrspace_py", frozen)]
struct PyMorphism(lrspace::Morphism);

#[pymethods]
impl PyMorphism {
    #[new]
    fn new(source: &PySpace, target: &PySpace, map: Vec<usize>) -> PyResult<Self> {
        lrspace::Morphism::new(source.0.clone(), target.0.clone(), map).map(PyMorphism).map_err(py_err)
    }

    fn kernel(&self) -> PyPartition {
        PyPartition(self.0.kernel())
    }

    fn is_isomorphic(&self, other: &PyMorphism) -> bool {
        self.0.is_isomorphic(&other.0)
    }

    fn is_conditionally_uniform(&self) -> bool {
        self.0.is_conditionally_uniform()
    }

    fn to_json(&self) -> String {
        io::render(&io::morphism_to_json(&self.0))
    }
}

#[pyclass(name = "Filtration", module = "lrspace_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyFiltration(lrspace::Filtration);

#[pymethods]
impl PyFiltration {
    #[new]
    fn new(stages: Vec<PyPartition>) -> PyResult<Self> {
        lrspace::Filtration::from_stages(stages.into_iter().map(|p| p.0).collect()).map(PyFiltration).map_err(py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let v = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyFiltration(io::filtration_from_json(&v, None).map_err(py_err)?))
    }

    fn to_json(&self) -> String {
        io::render(&io::filtration_to_json(&self.0))
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn stages(&self) -> Vec<PyPartition> {
        self.0.stages().iter().cloned().map(PyPartition).collect()
    }

    fn is_isomorphic(&self, other: &PyFiltration) -> PyResult<bool> {
        self.0.is_isomorphic(&other.0).map_err(py_err)
    }

    /// `(immersed, first failing (s, t) or None)`.
    fn is_immersed_into(&self, other: &PyFiltration) -> PyResult<(bool, Option<(usize, usize)>)> {
        let r = filtration::is_immersed(&self.0, &other.0).map_err(py_err)?;
        Ok((r.immersed, r.witness))
    }

    /// `"true"`, `"false"` or `"undecided"`.
    fn exists_immersion_into(&self, other: &PyFiltration) -> PyResult<&'static str> {
        let d: Decision = filtration::exists_immersion_morphism(&other.0, &self.0).map_err(py_err)?;
        Ok(d.as_str())
    }

    /// First `(s, t)` where the martingale property fails, or `None`.
    fn martingale_violation(&self, values: Vec<Vec<Bound<'_, PyAny>>>) -> PyResult<Option<(usize, usize)>> {
        let values = values.iter().map(|r| to_rationals(r)).collect::<PyResult<Vec<_>>>()?;
        self.0.martingale_violation(&values).map_err(py_err)
    }

    fn distance(&self, other: &PyFiltration) -> PyResult<String> {
        let probes = ProbeSequence::canonical(self.0.ambient().clone()).map_err(py_err)?;
        Ok(rational::fmt_exact(&filtration::filtration_metric(&self.0, &other.0, &probes).map_err(py_err)?))
    }
}

#[pyclass(name = "ProcessTree", module = "lrspace_py", frozen)]
struct PyProcessTree(lrspace::ProcessTree);

#[pymethods]
impl PyProcessTree {
    fn space(&self) -> PySpace {
        PySpace(self.0.path_space().clone())
    }

    fn values(&self) -> Vec<Vec<String>> {
        self.0.values().iter().map(|r| fmt_all(r)).collect()
    }

    /// `[(value, mass)]` at time `t`, sorted by value.
    fn marginal(&self, t: usize) -> PyResult<Vec<(String, String)>> {
        if t > self.0.steps() {
            return Err(py_err(Error::OutOfRange(format!("time {t}"))));
        }
        Ok(self.0.marginal(t).iter().map(|(v, m)| (rational::fmt_exact(v), rational::fmt_exact(m))).collect())
    }

    fn natural_filtration(&self) -> PyFiltration {
        PyFiltration(self.0.natural_filtration())
    }
}

#[pyfunction]
fn random_walk(steps: usize) -> PyResult<PyProcessTree> {
    process::random_walk(steps).map(PyProcessTree).map_err(py_err)
}

#[pyfunction]
fn bernoulli_counting(steps: usize, p: Bound<'_, PyAny>) -> PyResult<PyProcessTree> {
    process::bernoulli_counting(steps, &to_rational(&p)?).map(PyProcessTree).map_err(py_err)
}

#[pyfunction]
fn slowed_down(f: &PyFiltration) -> PyFiltration {
    PyFiltration(process::slowed_down(&f.0))
}

/// Example suite report as JSON text.
#[pyfunction]
fn paper_example_suite() -> String {
    io::render(&process::paper_example_suite().to_json())
}

#[pyfunction]
fn independent_copies_experiment(m: u32) -> PyResult<String> {
    experiments::independent_copies_experiment(m).map(|r| r.to_csv()).map_err(py_err)
}

#[pyfunction]
fn psi_refinement_experiment(seed: &PyPartition, depth: u32) -> PyResult<String> {
    experiments::psi_refinement_experiment(&seed.0, depth).map(|r| r.to_csv()).map_err(py_err)
}

#[pyfunction]
fn orbit_density_experiment(e: &PyPartition, trials: u64, rng_seed: u64) -> PyResult<String> {
    experiments::orbit_density_experiment(&e.0, trials, rng_seed).map(|r| r.to_csv()).map_err(py_err)
}

/// Runs the command-line tool in-process: `(exit code, stdout, stderr)`.
#[pyfunction]
fn cli_run(args: Vec<String>) -> (i32, String, String) {
    let out = lrspace::cli::run(std::iter::once("lrspace".to_string()).chain(args));
    (out.code, out.stdout, out.stderr)
}

#[pymodule]
fn lrspace_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpace>()?;
    m.add_class::<PyPartition>()?;
    m.add_class::<PyMorphism>()?;
    m.add_class::<PyFiltration>()?;
    m.add_class::<PyProcessTree>()?;
    m.add_function(wrap_pyfunction!(random_walk, m)?)?;
    m.add_function(wrap_pyfunction!(bernoulli_counting, m)?)?;
    m.add_function(wrap_pyfunction!(slowed_down, m)?)?;
    m.add_function(wrap_pyfunction!(paper_example_suite, m)?)?;
    m.add_function(wrap_pyfunction!(independent_copies_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(psi_refinement_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(orbit_density_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(cli_run, m)?)?;
    Ok(())
}
