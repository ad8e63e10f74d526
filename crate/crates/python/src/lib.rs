//! Python bindings for `photonweak`.

use num_complex::Complex64;
use photonweak::cli::gate_infidelity;
use photonweak::counting::RunPlan;
use photonweak::weak::PostselectState;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: photonweak::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn post_state(post: &str) -> PyResult<PostselectState> {
    match post {
        "A" | "a" => Ok(PostselectState::A),
        "D" | "d" => Ok(PostselectState::D),
        other => Err(PyValueError::new_err(format!("postselection must be 'A' or 'D', got {other:?}"))),
    }
}

/// Single-photon polarization `alpha|H> + beta|V>`.
#[pyclass(name = "Polarization", module = "photonweak_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPolarization {
    inner: photonweak::Polarization,
}

#[pymethods]
impl PyPolarization {
    #[new]
    fn new(alpha: Complex64, beta: Complex64) -> PyResult<Self> {
        photonweak::Polarization::new(alpha, beta)
            .map(|inner| Self { inner })
            .map_err(err)
    }

    /// `cos(theta)|H> + sin(theta)|V>`, theta in degrees.
    #[staticmethod]
    fn from_angle(theta_deg: f64) -> Self {
        Self {
            inner: photonweak::Polarization::from_angle_deg(theta_deg),
        }
    }

    #[getter]
    fn alpha(&self) -> Complex64 {
        self.inner.alpha()
    }

    #[getter]
    fn beta(&self) -> Complex64 {
        self.inner.beta()
    }

    /// `|alpha|^2 - |beta|^2`
    fn s1(&self) -> f64 {
        photonweak::expectation_s1(&self.inner)
    }

    fn __repr__(&self) -> String {
        let (a, b) = (self.inner.alpha(), self.inner.beta());
        format!("Polarization(alpha={a}, beta={b})")
    }
}

/// Meter preparation `gamma|H> + gammabar|V>` with strength `K = 2 gamma^2 - 1`.
#[pyclass(name = "MeterSetting", module = "photonweak_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMeterSetting {
    inner: photonweak::MeterSetting,
}

#[pymethods]
impl PyMeterSetting {
    #[new]
    fn new(gamma: f64) -> PyResult<Self> {
        photonweak::MeterSetting::new(gamma)
            .map(|inner| Self { inner })
            .map_err(err)
    }

    #[staticmethod]
    fn from_strength(k: f64) -> PyResult<Self> {
        photonweak::MeterSetting::from_strength(k)
            .map(|inner| Self { inner })
            .map_err(err)
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma()
    }

    #[getter]
    fn gammabar(&self) -> f64 {
        self.inner.gammabar()
    }

    #[getter]
    fn strength(&self) -> f64 {
        self.inner.strength()
    }

    fn __repr__(&self) -> String {
        format!("MeterSetting(gamma={}, K={})", self.inner.gamma(), self.inner.strength())
    }
}

/// Mode-matching visibility and depolarizing weight of the device.
#[pyclass(name = "ImperfectionParams", module = "photonweak_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyImperfectionParams {
    inner: photonweak::ImperfectionParams,
}

#[pymethods]
impl PyImperfectionParams {
    #[new]
    #[pyo3(signature = (visibility=1.0, depol=0.0))]
    fn new(visibility: f64, depol: f64) -> PyResult<Self> {
        photonweak::ImperfectionParams::new(visibility, depol)
            .map(|inner| Self { inner })
            .map_err(err)
    }

    #[getter]
    fn visibility(&self) -> f64 {
        self.inner.visibility()
    }

    #[getter]
    fn depol(&self) -> f64 {
        self.inner.depol()
    }

    fn __repr__(&self) -> String {
        format!(
            "ImperfectionParams(visibility={}, depol={})",
            self.inner.visibility(),
            self.inner.depol()
        )
    }
}

fn params_or_ideal(params: Option<PyRef<'_, PyImperfectionParams>>) -> photonweak::ImperfectionParams {
    params.map(|p| p.inner).unwrap_or_default()
}

/// Runs the ideal device. Returns the coincidence amplitudes in the order
/// HH, HV, VH, VV (signal, meter) and the success probability.
#[pyfunction]
fn run_device(signal: &PyPolarization, meter: &PyMeterSetting) -> PyResult<(Vec<Complex64>, f64)> {
    let out = photonweak::run_device(&signal.inner, &meter.inner, &photonweak::DeviceConfig::default())
        .map_err(err)?;
    Ok((out.amplitudes().to_vec(), out.success_prob()))
}

/// `(1 - F, success probability)` of the device against the ideal gate.
#[pyfunction]
fn gate_check(signal: &PyPolarization, meter: &PyMeterSetting) -> PyResult<(f64, f64)> {
    gate_infidelity(&signal.inner, &meter.inner).map_err(err)
}

/// Diagonals of the two POVM elements, `([H_H, H_V], [V_H, V_V])`.
#[pyfunction]
fn povm(meter: &PyMeterSetting) -> ([f64; 2], [f64; 2]) {
    let e = photonweak::povm_elements(&meter.inner);
    (
        [e.pi_h[(0, 0)].re, e.pi_h[(1, 1)].re],
        [e.pi_v[(0, 0)].re, e.pi_v[(1, 1)].re],
    )
}

#[pyfunction]
#[pyo3(signature = (signal, meter, post="A"))]
fn weak_value(signal: &PyPolarization, meter: &PyMeterSetting, post: &str) -> PyResult<f64> {
    photonweak::weak_value_analytic(&signal.inner, &meter.inner, &post_state(post)?).map_err(err)
}

/// `(P(H|post), P(V|post), P(post))` for the ideal device.
#[pyfunction]
#[pyo3(signature = (signal, meter, post="A"))]
fn postselected_probs(signal: &PyPolarization, meter: &PyMeterSetting, post: &str) -> PyResult<(f64, f64, f64)> {
    let p = photonweak::postselected_probs(&signal.inner, &meter.inner, &post_state(post)?).map_err(err)?;
    Ok((p.meter_h, p.meter_v, p.post))
}

/// `(A-term, D-term)` of `<S1> = A<S>P(A) + D<S>P(D)`.
#[pyfunction]
fn expectation_decomposition(signal: &PyPolarization, meter: &PyMeterSetting) -> PyResult<(f64, f64)> {
    let d = photonweak::expectation_decomposition(&signal.inner, &meter.inner).map_err(err)?;
    Ok((d.term_a, d.term_d))
}

#[pyfunction]
fn fit_visibility(target_p_a: f64, signal: &PyPolarization, meter: &PyMeterSetting) -> PyResult<PyImperfectionParams> {
    photonweak::fit_visibility(target_p_a, &signal.inner, &meter.inner)
        .map(|inner| PyImperfectionParams { inner })
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (target_p_a, signal, meter, visibility=1.0))]
fn fit_depolarization(
    target_p_a: f64,
    signal: &PyPolarization,
    meter: &PyMeterSetting,
    visibility: f64,
) -> PyResult<PyImperfectionParams> {
    photonweak::fit_depolarization(target_p_a, visibility, &signal.inner, &meter.inner)
        .map(|inner| PyImperfectionParams { inner })
        .map_err(err)
}

/// Model weak value on a strength grid, as `(K, value)` pairs.
#[pyfunction]
#[pyo3(signature = (signal, strengths, params=None))]
fn model_weak_value_curve(
    signal: &PyPolarization,
    strengths: Vec<f64>,
    params: Option<PyRef<'_, PyImperfectionParams>>,
) -> PyResult<Vec<(f64, f64)>> {
    photonweak::model_weak_value_curve(&params_or_ideal(params), &signal.inner, &strengths).map_err(err)
}

/// Model postselection probability `P(A)`.
#[pyfunction]
#[pyo3(signature = (signal, meter, params=None))]
fn postselection_probability(
    signal: &PyPolarization,
    meter: &PyMeterSetting,
    params: Option<PyRef<'_, PyImperfectionParams>>,
) -> PyResult<f64> {
    photonweak::DeviceModel::new(&photonweak::DeviceConfig::default())
        .and_then(|m| m.postselection_probability(&params_or_ideal(params), &signal.inner, &meter.inner))
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (weak_value, p_a, meter, params=None))]
fn invert_s1(
    weak_value: f64,
    p_a: f64,
    meter: &PyMeterSetting,
    params: Option<PyRef<'_, PyImperfectionParams>>,
) -> PyResult<f64> {
    photonweak::invert_s1(weak_value, p_a, &params_or_ideal(params), &meter.inner).map_err(err)
}

/// Chi matrix of the device process as 16 rows of 16 complex numbers,
/// Pauli index `4a + b` (signal first).
#[pyfunction]
#[pyo3(signature = (params=None))]
fn process_tomography(params: Option<PyRef<'_, PyImperfectionParams>>) -> PyResult<Vec<Vec<Complex64>>> {
    let channel = photonweak::imperfect_channel(&params_or_ideal(params), &photonweak::DeviceConfig::default())
        .map_err(err)?;
    let chi = photonweak::process_tomography(&channel).map_err(err)?;
    Ok((0..16).map(|m| (0..16).map(|n| chi.entry(m, n)).collect()).collect())
}

/// Simulated strength sweep. Returns `(csv, metadata_json)`.
#[pyfunction]
#[pyo3(signature = (signal, strengths, seed=0, params=None))]
fn run_fig2(
    py: Python<'_>,
    signal: &PyPolarization,
    strengths: Vec<f64>,
    seed: u64,
    params: Option<PyRef<'_, PyImperfectionParams>>,
) -> PyResult<(String, String)> {
    let plan = RunPlan {
        seed,
        ..RunPlan::default()
    };
    let params = params_or_ideal(params);
    let psi = signal.inner;
    let table = py
        .detach(|| photonweak::run_fig2(&plan, &psi, &params, &strengths))
        .map_err(err)?;
    Ok((table.to_csv_string(), table.metadata_json()))
}

#[pymodule]
fn photonweak_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPolarization>()?;
    m.add_class::<PyMeterSetting>()?;
    m.add_class::<PyImperfectionParams>()?;
    m.add_function(wrap_pyfunction!(run_device, m)?)?;
    m.add_function(wrap_pyfunction!(gate_check, m)?)?;
    m.add_function(wrap_pyfunction!(povm, m)?)?;
    m.add_function(wrap_pyfunction!(weak_value, m)?)?;
    m.add_function(wrap_pyfunction!(postselected_probs, m)?)?;
    m.add_function(wrap_pyfunction!(expectation_decomposition, m)?)?;
    m.add_function(wrap_pyfunction!(fit_visibility, m)?)?;
    m.add_function(wrap_pyfunction!(fit_depolarization, m)?)?;
    m.add_function(wrap_pyfunction!(model_weak_value_curve, m)?)?;
    m.add_function(wrap_pyfunction!(postselection_probability, m)?)?;
    m.add_function(wrap_pyfunction!(invert_s1, m)?)?;
    m.add_function(wrap_pyfunction!(process_tomography, m)?)?;
    m.add_function(wrap_pyfunction!(run_fig2, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
