//! Command implementations. Each returns the process exit code:
//! 0 pass, 1 check failed, 2 input error, 3 resource cap (the last two
//! surface as `CliError`s in `main`).

use std::path::Path;

use serde::Serialize;
use serde_json::json;

use qcw_core::optimizer;
use qcw_core::reductions::cgscon::from_two_layer;
use qcw_core::reductions::clock::circuit_to_clock_hamiltonian;
use qcw_core::reductions::layering::reduce_to_two_layers;
use qcw_core::spectra;
use qcw_core::traversal::{self, Retention};

use crate::files::*;
use crate::CliError;

/// Load the Hamiltonian from either a hamiltonian file or a connectivity
/// instance file (dispatching on the "kind" header).
fn load_any_hamiltonian(path: &Path) -> Result<qcw_core::LayeredHamiltonian, CliError> {
    let value: serde_json::Value = read_json(path)?;
    match value.get("kind").and_then(|k| k.as_str()) {
        Some("hamiltonian") => read_json::<HamiltonianFile>(path)?.to_hamiltonian(),
        Some("cgscon") => Ok(read_json::<InstanceFile>(path)?.to_instance()?.hamiltonian),
        other => Err(CliError::schema(&format!(
            "expected a hamiltonian or cgscon file, found kind {other:?}"
        ))),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::io(&format!("serialization failed: {e}")))?;
    println!("{text}");
    Ok(())
}

pub fn build_c2h(circuit_path: &Path, witness_arg: &str, out: &Path) -> Result<i32, CliError> {
    let file: CircuitFile = read_json(circuit_path)?;
    let circuit = file.to_circuit()?;
    let output_logical = file.output_qubit.ok_or(qcw_core::Error::NoOutputQubit)?;
    let witness_logical = parse_qubit_list(witness_arg)?;

    let (normalized, relabel) = circuit.swap_normalize();
    let output_physical = *relabel
        .get(output_logical)
        .ok_or_else(|| CliError::schema("output qubit outside the circuit register"))?;
    // Witness qubits keep their initial (logical) positions at clock time 0.
    let clock = circuit_to_clock_hamiltonian(&normalized, output_physical, &witness_logical)?;

    let registers = RegistersSchema {
        data_qubits: clock.data_qubits(),
        gate_count: clock.gate_count(),
        output_qubit: clock.output_qubit(),
        witness_qubits: clock.witness_qubits().iter().copied().collect(),
        clock_qubits: (1..=clock.gate_count()).map(|t| clock.clock_qubit(t)).collect(),
    };
    let provenance = Provenance::new(
        "qcw build c2h",
        json!({
            "circuit": circuit_path.display().to_string(),
            "circuit_sha256": hash_file(circuit_path)?,
            "witness_qubits": registers.witness_qubits,
            "original_gate_count": circuit.len(),
            "normalized_gate_count": normalized.len(),
            "relabeling": relabel,
            "term_rescale": clock.rescale(),
        }),
    );
    let out_file =
        HamiltonianFile::from_hamiltonian(clock.hamiltonian(), Some(registers), None, provenance);
    write_json(out, &out_file)?;
    println!(
        "clock hamiltonian: {} qubits ({} data + {} clock), {} terms",
        clock.num_qubits(),
        clock.data_qubits(),
        clock.gate_count(),
        clock.hamiltonian().term_count()
    );
    Ok(0)
}

pub fn build_layer(
    ham_path: &Path,
    b: f64,
    c: Option<f64>,
    s: Option<f64>,
    out: &Path,
) -> Result<i32, CliError> {
    let file: HamiltonianFile = read_json(ham_path)?;
    let h = file.to_hamiltonian()?;
    let (c, s) = match (c, s, file.thresholds) {
        (Some(c), Some(s), _) => (c, s),
        (None, None, Some(t)) => (t.c, t.s),
        (None, None, None) => (0.0, 1.0),
        _ => return Err(CliError::schema("pass both --c and --s or neither")),
    };
    let red = reduce_to_two_layers(&h, b, c, s)?;
    let provenance = Provenance::new(
        "qcw build layer",
        json!({
            "hamiltonian": ham_path.display().to_string(),
            "hamiltonian_sha256": hash_file(ham_path)?,
            "b": b, "c": c, "s": s,
            "kappa": red.kappa,
            "rate": red.rate,
            "degree": red.degree,
            "locality": red.locality,
            "scale": red.scale,
            "thresholds_valid": red.thresholds_valid,
            "gap_ok": red.gap_ok,
        }),
    );
    let body = TwoLayerFile {
        format_version: FORMAT_VERSION,
        kind: "two_layer".into(),
        num_qubits: red.num_qubits(),
        a_terms: red.a().layers()[0].iter().map(term_to_schema).collect(),
        b_terms: red.b().layers()[0].iter().map(term_to_schema).collect(),
        alpha: red.alpha,
        beta: red.beta,
        provenance,
    };
    write_json(out, &body)?;
    println!("kappa = {}, r = {}, l = {}", red.kappa, red.rate, red.degree);
    if !red.thresholds_valid {
        println!(
            "warning: implied thresholds collapse at this scale (alpha = {:.3e}, beta = {:.3e})",
            red.alpha, red.beta
        );
    }
    Ok(0)
}

pub fn build_cgscon(two_layer_path: &Path, m_max: usize, out: &Path) -> Result<i32, CliError> {
    let file: TwoLayerFile = read_json(two_layer_path)?;
    let t = file.to_instance()?;
    let inst = from_two_layer(&t, m_max)?;
    let provenance = Provenance::new(
        "qcw build cgscon",
        json!({
            "two_layer": two_layer_path.display().to_string(),
            "two_layer_sha256": hash_file(two_layer_path)?,
            "m_max": m_max,
        }),
    );
    let out_file = InstanceFile::from_instance(&inst, provenance);
    write_json(out, &out_file)?;
    println!("c = {:e}, s = {:e}", inst.c, inst.s);
    Ok(0)
}

pub fn check_commute(ham_path: &Path) -> Result<i32, CliError> {
    let h = load_any_hamiltonian(ham_path)?;
    let report = h.check_layered()?;
    print_json(&report)?;
    Ok(if report.ok { 0 } else { 1 })
}

pub fn check_psd(ham_path: &Path) -> Result<i32, CliError> {
    let h = load_any_hamiltonian(ham_path)?;
    match h.validate_terms() {
        Ok(certs) => {
            let norms: Vec<f64> = certs.iter().map(|c| c.norm).collect();
            print_json(&json!({"ok": true, "terms": certs.len(), "norms": norms}))?;
            Ok(0)
        }
        Err(
            e @ (qcw_core::Error::NotPsd(_)
            | qcw_core::Error::NormExceeded(_)
            | qcw_core::Error::NotHermitian(_)),
        ) => {
            print_json(&json!({"ok": false, "code": e.code(), "message": e.to_string()}))?;
            Ok(1)
        }
        Err(e) => Err(e.into()),
    }
}

pub fn check_degree(ham_path: &Path) -> Result<i32, CliError> {
    let h = load_any_hamiltonian(ham_path)?;
    print_json(&h.degree_profile())?;
    Ok(0)
}

pub fn ground(
    ham_path: &Path,
    method: &str,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<i32, CliError> {
    let h = load_any_hamiltonian(ham_path)?;
    let result = match method {
        "dense" => spectra::ground_energy_dense(&h)?,
        "lanczos" => spectra::ground_energy_iterative(&h, tol, max_iter, seed)?,
        other => return Err(CliError::schema(&format!("unknown method '{other}'"))),
    };
    print_json(&result)?;
    Ok(0)
}

pub fn path_completeness(
    instance_path: &Path,
    prep_path: &Path,
    out: &Path,
) -> Result<i32, CliError> {
    let inst = read_json::<InstanceFile>(instance_path)?.to_instance()?;
    let prep = read_json::<CircuitFile>(prep_path)?.to_circuit()?;
    let path = qcw_core::reductions::cgscon::completeness_path(&inst, &prep)?;
    let provenance = Provenance::new(
        "qcw path completeness",
        json!({
            "instance": instance_path.display().to_string(),
            "instance_sha256": hash_file(instance_path)?,
            "prep": prep_path.display().to_string(),
            "prep_sha256": hash_file(prep_path)?,
        }),
    );
    write_json(out, &PathFile::from_path(&path, provenance))?;
    println!("path length {}", path.len());
    Ok(0)
}

pub fn path_eval(instance_path: &Path, path_path: &Path, report: &Path) -> Result<i32, CliError> {
    let inst = read_json::<InstanceFile>(instance_path)?.to_instance()?;
    let path = read_json::<PathFile>(path_path)?.to_path()?;
    let eval = traversal::evaluate_path(&inst, &path, Retention::Auto)?;
    let inputs = input_hashes(&[instance_path, path_path])?;
    let file = ReportFile::new("path eval", inputs, None, &eval.trace);
    write_json(report, &file)?;
    println!(
        "m = {}, max_energy = {:e}, epsilon = {:e}, delta = {:e}, verdict = {}",
        eval.trace.m, eval.trace.max_energy, eval.trace.epsilon, eval.trace.delta,
        eval.trace.verdict
    );
    Ok(0)
}

#[derive(Serialize)]
struct OptimizePayload {
    exact_score: f64,
    best_restart: usize,
    trace: qcw_core::PathTrace,
    best_path: PathFile,
    logs: Vec<optimizer::RestartLog>,
}

pub fn path_optimize(
    instance_path: &Path,
    config_path: &Path,
    report: &Path,
    env_seed: u64,
) -> Result<i32, CliError> {
    let inst = read_json::<InstanceFile>(instance_path)?.to_instance()?;
    let cfg = read_json::<OptimizerConfigFile>(config_path)?.to_config(env_seed)?;
    let outcome = optimizer::optimize(&inst, &cfg, None)?;
    let best = optimizer::materialize(&outcome.best)?;
    let inputs = input_hashes(&[instance_path, config_path])?;
    let payload = OptimizePayload {
        exact_score: outcome.exact_score,
        best_restart: outcome.best_restart,
        trace: outcome.trace.clone(),
        best_path: PathFile::from_path(
            &best,
            Provenance::new("qcw path optimize", json!({"seed": cfg.seed})),
        ),
        logs: outcome.logs,
    };
    let file = ReportFile::new("path optimize", inputs, Some(cfg.seed), payload);
    write_json(report, &file)?;
    println!(
        "best restart {} with exact score {:e}",
        outcome.best_restart, outcome.exact_score
    );
    Ok(0)
}

pub fn verify_lemmas(
    instance_path: &Path,
    path_path: &Path,
    report: &Path,
) -> Result<i32, CliError> {
    let inst = read_json::<InstanceFile>(instance_path)?.to_instance()?;
    let path = read_json::<PathFile>(path_path)?.to_path()?;
    let suite = traversal::verify_lemmas(&inst, &path)?;
    let inputs = input_hashes(&[instance_path, path_path])?;
    let ok = suite.ok;
    let file = ReportFile::new("verify lemmas", inputs, None, &suite);
    write_json(report, &file)?;
    println!(
        "small_projection = {}, traversal_bound = {}, cross_term = {}, soundness = {}",
        suite.small_projection.ok,
        suite
            .traversal_bound
            .as_ref()
            .map(|r| r.ok.to_string())
            .unwrap_or_else(|| "n/a".into()),
        suite.cross_term.ok,
        suite
            .soundness
            .as_ref()
            .map(|r| r.ok.to_string())
            .unwrap_or_else(|| "n/a".into()),
    );
    Ok(if ok { 0 } else { 1 })
}
