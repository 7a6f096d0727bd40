//! Python bindings for the msched solver.
//!
//! Everything crosses the boundary as strings: instances and schedules as
//! their JSON documents, rationals as exact `num/den` text. Keeping the
//! surface stringly avoids exposing the bignum types and matches the CLI's
//! file formats, so material prepared for one front end works in the other.

use msched::instances::{gen_gap_restricted, gen_gap_uniform, gen_gap_unrelated, threshold_grid};
use msched::model::{
    instance_from_json, instance_to_json, schedule_from_json, schedule_to_json, verify_schedule,
    Instance,
};
use msched::oracle::{brute_force_makespan, OracleBudget};
use msched::rational::{dec12, fmt_rat, Rat};
use msched::search::{min_feasible_target, minimize_makespan, Precision, Scheme};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn parse_instance(text: &str) -> PyResult<Instance> {
    instance_from_json(text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn parse_scheme(name: &str) -> PyResult<Scheme> {
    Scheme::parse(name).ok_or_else(|| {
        PyValueError::new_err(format!(
            "unknown scheme {name}; pick simple, filtered, beta, restricted, uniform or pnorm"
        ))
    })
}

fn parse_eps(eps: f64) -> PyResult<Precision> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(PyValueError::new_err("eps must be a positive number"));
    }
    let r = Rat::from_float(eps).expect("finite float");
    Ok(Precision::Relative(r))
}

/// Parses an instance document and returns its normalized form.
#[pyfunction]
fn normalize_instance(text: &str) -> PyResult<String> {
    Ok(instance_to_json(&parse_instance(text)?))
}

/// Known-gap family instance as a JSON document.
#[pyfunction]
fn gap_instance(family: &str, k: usize) -> PyResult<String> {
    let inst = match family {
        "restricted" => gen_gap_restricted(k),
        "uniform" => gen_gap_uniform(k),
        "unrelated" => gen_gap_unrelated(k),
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown family {other}; pick restricted, uniform or unrelated"
            )))
        }
    };
    Ok(instance_to_json(&inst))
}

/// Exact relaxation threshold of a gap-family instance, as `num/den`.
#[pyfunction]
fn gap_threshold(family: &str, k: usize) -> PyResult<String> {
    let (inst, scheme) = match family {
        "restricted" => (gen_gap_restricted(k), Scheme::Restricted),
        "uniform" => (gen_gap_uniform(k), Scheme::Uniform),
        "unrelated" => (gen_gap_unrelated(k), Scheme::Simple),
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown family {other}; pick restricted, uniform or unrelated"
            )))
        }
    };
    let precision = Precision::Exact(threshold_grid(k));
    let (c, _) = min_feasible_target(&inst, scheme, &precision)
        .ok_or_else(|| PyRuntimeError::new_err("no grid candidate is feasible"))?;
    Ok(fmt_rat(&c))
}

/// Smallest feasible relaxation target, bisected to relative width `eps`.
#[pyfunction]
#[pyo3(signature = (text, scheme, eps=1e-6))]
fn min_feasible(text: &str, scheme: &str, eps: f64) -> PyResult<String> {
    let inst = parse_instance(text)?;
    let scheme = parse_scheme(scheme)?;
    let precision = parse_eps(eps)?;
    let (c, _) = min_feasible_target(&inst, scheme, &precision)
        .ok_or_else(|| PyRuntimeError::new_err("no feasible target"))?;
    Ok(fmt_rat(&c))
}

/// Runs the full pipeline and returns a dict with the schedule document,
/// the makespan, the relaxation target, and the scheme's proven factor.
#[pyfunction]
#[pyo3(signature = (text, scheme, eps=1e-6))]
fn solve(py: Python<'_>, text: &str, scheme: &str, eps: f64) -> PyResult<Py<PyDict>> {
    let inst = parse_instance(text)?;
    let scheme = parse_scheme(scheme)?;
    let precision = parse_eps(eps)?;
    let sol = minimize_makespan(&inst, scheme, &precision)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let d = PyDict::new_bound(py);
    d.set_item("schedule", schedule_to_json(&sol.schedule))?;
    d.set_item("makespan", fmt_rat(&sol.schedule.makespan))?;
    d.set_item("makespan_dec", dec12(&sol.schedule.makespan))?;
    d.set_item("target", fmt_rat(&sol.target))?;
    d.set_item("factor", fmt_rat(&sol.factor))?;
    d.set_item("scheme", sol.scheme.to_string())?;
    Ok(d.into())
}

/// Checks a schedule document against an instance; returns the violations,
/// empty when the schedule is valid.
#[pyfunction]
fn verify(instance_text: &str, schedule_text: &str) -> PyResult<Vec<String>> {
    let inst = parse_instance(instance_text)?;
    let sched = schedule_from_json(&inst, schedule_text)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(verify_schedule(&inst, &sched)
        .iter()
        .map(|v| v.to_string())
        .collect())
}

/// Exhaustive minimum makespan for small instances. Raises RuntimeError
/// with the refusal reason when the instance exceeds the search budget.
#[pyfunction]
fn oracle_makespan(text: &str) -> PyResult<(String, String)> {
    let inst = parse_instance(text)?;
    let r = brute_force_makespan(&inst, &OracleBudget::default())
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok((fmt_rat(&r.objective), schedule_to_json(&r.schedule)))
}

#[pymodule]
fn msched_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(normalize_instance, m)?)?;
    m.add_function(wrap_pyfunction!(gap_instance, m)?)?;
    m.add_function(wrap_pyfunction!(gap_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(min_feasible, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_makespan, m)?)?;
    Ok(())
}
