//! Python bindings.

use isoising::fisher::FisherGraph;
use isoising::gibbs::GibbsCorrelator;
use isoising::ising;
use isoising::isoradial::{load_graph, LatticeKind, PeriodicIsoradialGraph};
use isoising::kasteleyn::{boltzmann_probability, orient, partition_function, KasteleynOrientation};
use isoising::laplacian::{identity_report, Identity};
use isoising::oracle::{enumerate_matchings, EnumerationBudget};
use isoising::spectral::{characteristic_polynomial, free_energy, TorusSymbol};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(isoising, IsoisingError, PyException);

fn err(e: isoising::Error) -> PyErr {
    IsoisingError::new_err(e.to_string())
}

type Edges = Vec<(usize, [i32; 2])>;

/// A periodic isoradial graph.
#[pyclass(name = "Lattice", module = "isoising", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyLattice {
    inner: PeriodicIsoradialGraph,
}

#[pymethods]
impl PyLattice {
    /// `"square"`, `"triangular"` or `"honeycomb"`.
    #[staticmethod]
    fn standard(kind: &str) -> PyResult<Self> {
        let kind: LatticeKind = kind.parse().map_err(err)?;
        Ok(Self { inner: PeriodicIsoradialGraph::standard_lattice(kind) })
    }

    #[staticmethod]
    fn generic() -> Self {
        Self { inner: PeriodicIsoradialGraph::generic_hexagonal() }
    }

    #[staticmethod]
    fn triangular(angles: [f64; 3]) -> PyResult<Self> {
        Ok(Self { inner: PeriodicIsoradialGraph::triangular_from_angles(angles).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(document: &str) -> PyResult<Self> {
        Ok(Self { inner: load_graph(document).map_err(err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner.to_spec()).map_err(|e| err(e.into()))
    }

    fn dual(&self) -> PyResult<Self> {
        Ok(Self { inner: self.inner.dual().map_err(err)? })
    }

    #[getter]
    fn vertex_count(&self) -> usize {
        self.inner.vertex_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    #[getter]
    fn face_count(&self) -> usize {
        self.inner.face_count()
    }

    fn thetas(&self) -> Vec<f64> {
        self.inner.thetas()
    }

    /// Critical couplings, one per edge.
    #[pyo3(signature = (k = 0.0))]
    fn couplings(&self, k: f64) -> PyResult<Vec<f64>> {
        Ok(ising::CouplingAssignment::new(&self.inner, k).map_err(err)?.couplings)
    }

    fn __repr__(&self) -> String {
        format!(
            "Lattice(vertices={}, edges={}, faces={})",
            self.inner.vertex_count(),
            self.inner.edge_count(),
            self.inner.face_count()
        )
    }
}

/// The critical dimer model on the Fisher graph of a lattice.
#[pyclass(name = "Model", module = "isoising", frozen)]
struct PyModel {
    graph: PeriodicIsoradialGraph,
    fisher: FisherGraph,
    orientation: KasteleynOrientation,
    gibbs: GibbsCorrelator,
}

#[pymethods]
impl PyModel {
    #[new]
    fn new(py: Python<'_>, lattice: &PyLattice) -> PyResult<Self> {
        let graph = lattice.inner.clone();
        py.detach(|| {
            let fisher = FisherGraph::new(&graph);
            let orientation = orient(&fisher, &EnumerationBudget::default())?;
            let gibbs = GibbsCorrelator::new(fisher.clone(), orientation.clone());
            Ok(Self { graph, fisher, orientation, gibbs })
        })
        .map_err(err)
    }

    #[getter]
    fn vertex_count(&self) -> usize {
        self.fisher.vertex_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.fisher.edge_count()
    }

    /// Index of the Fisher edge carrying lattice edge `j`.
    fn long_edge(&self, j: usize) -> usize {
        self.fisher.long_edge(j)
    }

    fn weights(&self) -> Vec<f64> {
        self.fisher.weights().to_vec()
    }

    /// Exact partition function of the `n × n` torus.
    fn partition<'py>(&self, py: Python<'py>, n: usize) -> PyResult<Bound<'py, PyDict>> {
        let r = py
            .detach(|| {
                let tg = self.fisher.quotient(n)?;
                partition_function(&self.fisher, &self.orientation, &tg)
            })
            .map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("n", r.n)?;
        d.set_item("z", r.z)?;
        d.set_item("log_z", r.log_z)?;
        d.set_item("pfaffians", r.pfaffians.to_vec())?;
        d.set_item("sign_pattern", r.sign_pattern.to_vec())?;
        Ok(d)
    }

    /// Weighted matching count of the `n × n` torus by enumeration.
    fn oracle_partition(&self, py: Python<'_>, n: usize) -> PyResult<f64> {
        py.detach(|| {
            let tg = self.fisher.quotient(n)?;
            let e: Vec<_> = tg.edges().iter().map(|e| (e.u, e.v, self.fisher.weights()[e.base])).collect();
            Ok(enumerate_matchings(tg.vertex_count(), &e, &EnumerationBudget::default())?.weighted_sum)
        })
        .map_err(err)
    }

    /// Boltzmann probability on the `n × n` torus that all `(edge, (x, y))`
    /// occur.
    fn probability(&self, py: Python<'_>, n: usize, edges: Edges) -> PyResult<f64> {
        py.detach(|| {
            let tg = self.fisher.quotient(n)?;
            boltzmann_probability(&self.fisher, &self.orientation, &tg, &edges)
        })
        .map_err(err)
    }

    /// Same probability under the infinite-volume Gibbs measure.
    fn gibbs_probability(&self, py: Python<'_>, edges: Edges) -> PyResult<f64> {
        py.detach(|| self.gibbs.edge_probability(&edges)).map_err(err)
    }

    /// Coefficients of `det K̂(z,w)` as `(x, y, re, im)` tuples.
    fn characteristic_polynomial(&self, py: Python<'_>) -> PyResult<Vec<(i32, i32, f64, f64)>> {
        let p = py
            .detach(|| characteristic_polynomial(&TorusSymbol::kasteleyn(&self.fisher, &self.orientation)))
            .map_err(err)?;
        let mut out: Vec<_> = p.terms().map(|(e, c)| (e[0], e[1], c.re, c.im)).collect();
        out.sort_by_key(|t| (t.0, t.1));
        Ok(out)
    }

    /// Free energy per fundamental domain and its error estimate.
    fn free_energy(&self, py: Python<'_>) -> PyResult<(f64, f64)> {
        py.detach(|| {
            let p = characteristic_polynomial(&TorusSymbol::kasteleyn(&self.fisher, &self.orientation))?;
            let f = free_energy(&p)?;
            Ok((f.value, f.error_estimate))
        })
        .map_err(err)
    }

    /// Residuals of the Laplacian identities, keyed by label.
    #[pyo3(signature = (suite = None, samples = 100, seed = 1))]
    fn verify<'py>(
        &self,
        py: Python<'py>,
        suite: Option<Vec<String>>,
        samples: usize,
        seed: u64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let which: Vec<Identity> = match suite {
            None => Identity::ALL.to_vec(),
            Some(s) => s.iter().map(|x| x.parse()).collect::<Result<_, _>>().map_err(err)?,
        };
        let r = py.detach(|| identity_report(&self.graph, &which, samples, seed)).map_err(err)?;
        let d = PyDict::new(py);
        for item in &r.items {
            d.set_item(item.which.label(), item.residual)?;
        }
        Ok(d)
    }
}

/// Critical coupling `J(θ | k)`.
#[pyfunction]
#[pyo3(signature = (theta, k = 0.0))]
fn coupling(theta: f64, k: f64) -> PyResult<f64> {
    ising::coupling(theta, k).map_err(err)
}

#[pymodule]
#[pyo3(name = "isoising")]
fn isoising_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLattice>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(coupling, m)?)?;
    m.add("IsoisingError", m.py().get_type::<IsoisingError>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
