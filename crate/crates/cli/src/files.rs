//! JSON file formats: circuits, Hamiltonians, two-layer instances,
//! connectivity instances, paths, optimizer configs, and reports.
//!
//! Complex numbers are [re, im] pairs, matrices are row-major, qubit indices
//! are 0-based with qubit 0 the least-significant amplitude bit. Every file
//! carries a format version and provenance; readers validate schemas
//! strictly.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use qcw_core::circuit::{Circuit, Gate, GateKind};
use qcw_core::hamiltonian::{LayeredHamiltonian, LocalTerm, TwoLayerInstance};
use qcw_core::linalg::CMat;
use qcw_core::reductions::cgscon::{CgsconInstance, SplitRegisters, TraversalPath};
use qcw_core::state::OperatorFactor;

use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;

pub type ComplexPair = [f64; 2];
pub type MatrixSchema = Vec<Vec<ComplexPair>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub producer: String,
    #[serde(default)]
    pub parameters: serde_json::Value,
}

impl Provenance {
    pub fn new(producer: &str, parameters: serde_json::Value) -> Self {
        Provenance { producer: producer.to_string(), parameters }
    }
}

pub fn matrix_to_schema(m: &CMat) -> MatrixSchema {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_schema(rows: &MatrixSchema) -> Result<CMat, CliError> {
    let dim = rows.len();
    if dim == 0 || rows.iter().any(|r| r.len() != dim) {
        return Err(CliError::schema("matrix must be square and nonempty"));
    }
    let mut m = CMat::zeros(dim, dim);
    for (i, row) in rows.iter().enumerate() {
        for (j, &[re, im]) in row.iter().enumerate() {
            m[(i, j)] = Complex64::new(re, im);
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSchema {
    pub name: String,
    pub qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixSchema>,
}

pub fn gate_to_schema(g: &Gate) -> GateSchema {
    let name = match g.kind() {
        GateKind::X => "x",
        GateKind::H => "h",
        GateKind::Z => "z",
        GateKind::T => "t",
        GateKind::Cnot => "cnot",
        GateKind::Swap => "swap",
        GateKind::Raw => "raw",
    };
    GateSchema {
        name: name.into(),
        qubits: g.qubits().to_vec(),
        matrix: (g.kind() == GateKind::Raw).then(|| matrix_to_schema(g.matrix())),
    }
}

pub fn gate_from_schema(s: &GateSchema) -> Result<Gate, CliError> {
    let one = |q: &[usize]| -> Result<usize, CliError> {
        match q {
            [a] => Ok(*a),
            _ => Err(CliError::schema("gate expects exactly one qubit")),
        }
    };
    let two = |q: &[usize]| -> Result<(usize, usize), CliError> {
        match q {
            [a, b] => Ok((*a, *b)),
            _ => Err(CliError::schema("gate expects exactly two qubits")),
        }
    };
    match s.name.as_str() {
        "x" => Ok(Gate::x(one(&s.qubits)?)),
        "h" => Ok(Gate::h(one(&s.qubits)?)),
        "z" => Ok(Gate::z(one(&s.qubits)?)),
        "t" => Ok(Gate::t(one(&s.qubits)?)),
        "cnot" => {
            let (c, t) = two(&s.qubits)?;
            Ok(Gate::cnot(c, t))
        }
        "swap" => {
            let (a, b) = two(&s.qubits)?;
            Ok(Gate::swap(a, b))
        }
        "raw" => {
            let m = s
                .matrix
                .as_ref()
                .ok_or_else(|| CliError::schema("raw gate requires a matrix"))?;
            Ok(Gate::raw(s.qubits.clone(), matrix_from_schema(m)?)?)
        }
        other => Err(CliError::schema(&format!("unknown gate name '{other}'"))),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitFile {
    pub format_version: u32,
    pub kind: String,
    pub num_qubits: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_qubit: Option<usize>,
    pub gates: Vec<GateSchema>,
    pub provenance: Provenance,
}

impl CircuitFile {
    pub fn to_circuit(&self) -> Result<Circuit, CliError> {
        check_header(self.format_version, &self.kind, "circuit")?;
        let gates = self
            .gates
            .iter()
            .map(gate_from_schema)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Circuit::from_gates(self.num_qubits, gates)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSchema {
    pub support: Vec<usize>,
    pub matrix: MatrixSchema,
}

pub fn factor_to_schema(f: &OperatorFactor) -> FactorSchema {
    FactorSchema { support: f.support().to_vec(), matrix: matrix_to_schema(f.matrix()) }
}

pub fn factor_from_schema(s: &FactorSchema) -> Result<OperatorFactor, CliError> {
    Ok(OperatorFactor::new(s.support.clone(), matrix_from_schema(&s.matrix)?)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSchema {
    pub coefficient: f64,
    pub factors: Vec<FactorSchema>,
}

pub fn term_to_schema(t: &LocalTerm) -> TermSchema {
    TermSchema {
        coefficient: t.coefficient(),
        factors: t.factors().iter().map(factor_to_schema).collect(),
    }
}

pub fn term_from_schema(s: &TermSchema) -> Result<LocalTerm, CliError> {
    let factors = s
        .factors
        .iter()
        .map(factor_from_schema)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LocalTerm::new(s.coefficient, factors)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegistersSchema {
    pub data_qubits: usize,
    pub gate_count: usize,
    pub output_qubit: usize,
    pub witness_qubits: Vec<usize>,
    pub clock_qubits: Vec<usize>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdsSchema {
    pub c: f64,
    pub s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianFile {
    pub format_version: u32,
    pub kind: String,
    pub num_qubits: usize,
    pub layers: Vec<Vec<TermSchema>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub registers: Option<RegistersSchema>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<ThresholdsSchema>,
    pub provenance: Provenance,
}

impl HamiltonianFile {
    pub fn from_hamiltonian(
        h: &LayeredHamiltonian,
        registers: Option<RegistersSchema>,
        thresholds: Option<ThresholdsSchema>,
        provenance: Provenance,
    ) -> Self {
        HamiltonianFile {
            format_version: FORMAT_VERSION,
            kind: "hamiltonian".into(),
            num_qubits: h.num_qubits(),
            layers: h
                .layers()
                .iter()
                .map(|l| l.iter().map(term_to_schema).collect())
                .collect(),
            registers,
            thresholds,
            provenance,
        }
    }

    pub fn to_hamiltonian(&self) -> Result<LayeredHamiltonian, CliError> {
        check_header(self.format_version, &self.kind, "hamiltonian")?;
        let layers = self
            .layers
            .iter()
            .map(|l| l.iter().map(term_from_schema).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(LayeredHamiltonian::new(self.num_qubits, layers)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoLayerFile {
    pub format_version: u32,
    pub kind: String,
    pub num_qubits: usize,
    pub a_terms: Vec<TermSchema>,
    pub b_terms: Vec<TermSchema>,
    pub alpha: f64,
    pub beta: f64,
    pub provenance: Provenance,
}

impl TwoLayerFile {
    pub fn to_instance(&self) -> Result<TwoLayerInstance, CliError> {
        check_header(self.format_version, &self.kind, "two_layer")?;
        let a_terms = self
            .a_terms
            .iter()
            .map(term_from_schema)
            .collect::<Result<Vec<_>, _>>()?;
        let b_terms = self
            .b_terms
            .iter()
            .map(term_from_schema)
            .collect::<Result<Vec<_>, _>>()?;
        let a = LayeredHamiltonian::commuting(self.num_qubits, a_terms)?;
        let b = LayeredHamiltonian::commuting(self.num_qubits, b_terms)?;
        Ok(TwoLayerInstance::new(a, b, self.alpha, self.beta)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitRegistersSchema {
    pub data_qubits: usize,
    pub marker: [usize; 3],
    pub guard: [usize; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoLayerBody {
    pub a_terms: Vec<TermSchema>,
    pub b_terms: Vec<TermSchema>,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub format_version: u32,
    pub kind: String,
    pub num_qubits: usize,
    /// Single commuting layer.
    pub terms: Vec<TermSchema>,
    pub prep_start: Vec<GateSchema>,
    pub prep_target: Vec<GateSchema>,
    pub c: f64,
    pub s: f64,
    pub m_max: usize,
    pub k_unitaries: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty: Option<FactorSchema>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub registers: Option<SplitRegistersSchema>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<TwoLayerBody>,
    pub provenance: Provenance,
}

impl InstanceFile {
    pub fn from_instance(inst: &CgsconInstance, provenance: Provenance) -> Self {
        InstanceFile {
            format_version: FORMAT_VERSION,
            kind: "cgscon".into(),
            num_qubits: inst.num_qubits(),
            terms: inst.hamiltonian.layers()[0].iter().map(term_to_schema).collect(),
            prep_start: inst.prep_start.gates().iter().map(gate_to_schema).collect(),
            prep_target: inst.prep_target.gates().iter().map(gate_to_schema).collect(),
            c: inst.c,
            s: inst.s,
            m_max: inst.m_max,
            k_unitaries: inst.k_unitaries,
            penalty: inst.penalty.as_ref().map(factor_to_schema),
            registers: inst.registers.map(|r| SplitRegistersSchema {
                data_qubits: r.data_qubits,
                marker: r.marker,
                guard: r.guard,
            }),
            source: inst.source.as_ref().map(|t| TwoLayerBody {
                a_terms: t.a().layers()[0].iter().map(term_to_schema).collect(),
                b_terms: t.b().layers()[0].iter().map(term_to_schema).collect(),
                alpha: t.alpha(),
                beta: t.beta(),
            }),
            provenance,
        }
    }

    pub fn to_instance(&self) -> Result<CgsconInstance, CliError> {
        check_header(self.format_version, &self.kind, "cgscon")?;
        let terms = self
            .terms
            .iter()
            .map(term_from_schema)
            .collect::<Result<Vec<_>, _>>()?;
        let hamiltonian = LayeredHamiltonian::commuting(self.num_qubits, terms)?;
        let prep_start = Circuit::from_gates(
            self.num_qubits,
            self.prep_start
                .iter()
                .map(gate_from_schema)
                .collect::<Result<Vec<_>, _>>()?,
        )?;
        let prep_target = Circuit::from_gates(
            self.num_qubits,
            self.prep_target
                .iter()
                .map(gate_from_schema)
                .collect::<Result<Vec<_>, _>>()?,
        )?;
        let source = match &self.source {
            None => None,
            Some(body) => {
                let data_qubits = self
                    .registers
                    .as_ref()
                    .map(|r| r.data_qubits)
                    .unwrap_or(self.num_qubits);
                let a = LayeredHamiltonian::commuting(
                    data_qubits,
                    body.a_terms
                        .iter()
                        .map(term_from_schema)
                        .collect::<Result<Vec<_>, _>>()?,
                )?;
                let b = LayeredHamiltonian::commuting(
                    a.num_qubits(),
                    body.b_terms
                        .iter()
                        .map(term_from_schema)
                        .collect::<Result<Vec<_>, _>>()?,
                )?;
                Some(TwoLayerInstance::new(a, b, body.alpha, body.beta)?)
            }
        };
        let inst = CgsconInstance {
            hamiltonian,
            prep_start,
            prep_target,
            c: self.c,
            s: self.s,
            m_max: self.m_max,
            k_unitaries: self.k_unitaries,
            penalty: self
                .penalty
                .as_ref()
                .map(factor_from_schema)
                .transpose()?,
            registers: self.registers.as_ref().map(|r| SplitRegisters {
                data_qubits: r.data_qubits,
                marker: r.marker,
                guard: r.guard,
            }),
            source,
        };
        inst.validate()?;
        Ok(inst)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathFile {
    pub format_version: u32,
    pub kind: String,
    pub num_qubits: usize,
    pub gates: Vec<GateSchema>,
    pub provenance: Provenance,
}

impl PathFile {
    pub fn from_path(p: &TraversalPath, provenance: Provenance) -> Self {
        PathFile {
            format_version: FORMAT_VERSION,
            kind: "path".into(),
            num_qubits: p.num_qubits(),
            gates: p.gates().iter().map(gate_to_schema).collect(),
            provenance,
        }
    }

    pub fn to_path(&self) -> Result<TraversalPath, CliError> {
        check_header(self.format_version, &self.kind, "path")?;
        let gates = self
            .gates
            .iter()
            .map(gate_from_schema)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TraversalPath::new(self.num_qubits, gates)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearningRateSchema {
    pub initial: f64,
    pub growth: f64,
    pub shrink: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum GradientSchema {
    Analytic,
    FiniteDifference { h: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfigFile {
    pub format_version: u32,
    pub kind: String,
    pub restarts: usize,
    pub max_steps: usize,
    pub learning_rate: LearningRateSchema,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub gradient: GradientSchema,
    pub path_length: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supports: Option<Vec<[usize; 2]>>,
    #[serde(default = "default_init_scale")]
    pub init_scale: f64,
}

fn default_init_scale() -> f64 {
    0.3
}

impl OptimizerConfigFile {
    pub fn to_config(&self, fallback_seed: u64) -> Result<qcw_core::optimizer::OptimizerConfig, CliError> {
        check_header(self.format_version, &self.kind, "optimizer_config")?;
        Ok(qcw_core::optimizer::OptimizerConfig {
            restarts: self.restarts,
            max_steps: self.max_steps,
            learning_rate: qcw_core::optimizer::LearningRate {
                initial: self.learning_rate.initial,
                growth: self.learning_rate.growth,
                shrink: self.learning_rate.shrink,
                min: self.learning_rate.min,
                max: self.learning_rate.max,
            },
            tau: self.tau,
            lambda: self.lambda,
            seed: self.seed.unwrap_or(fallback_seed),
            gradient: match self.gradient {
                GradientSchema::Analytic => qcw_core::optimizer::GradientMode::Analytic,
                GradientSchema::FiniteDifference { h } => {
                    qcw_core::optimizer::GradientMode::FiniteDifference { h }
                }
            },
            init_scale: self.init_scale,
            path_length: self.path_length,
            supports: self.supports.as_ref().map(|s| s.iter().map(|&[a, b]| (a, b)).collect()),
        })
    }
}

/// Envelope shared by all report files.
#[derive(Debug, Clone, Serialize)]
pub struct ReportFile<T: Serialize> {
    pub format_version: u32,
    pub kind: String,
    pub command: String,
    pub tool_version: String,
    /// sha256 of every input file, keyed by path as given.
    pub inputs: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub payload: T,
}

impl<T: Serialize> ReportFile<T> {
    pub fn new(
        command: &str,
        inputs: BTreeMap<String, String>,
        seed: Option<u64>,
        payload: T,
    ) -> Self {
        ReportFile {
            format_version: FORMAT_VERSION,
            kind: "report".into(),
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            inputs,
            seed,
            payload,
        }
    }
}

fn check_header(version: u32, kind: &str, expected: &str) -> Result<(), CliError> {
    if version != FORMAT_VERSION {
        return Err(CliError::schema(&format!(
            "unsupported format_version {version}, expected {FORMAT_VERSION}"
        )));
    }
    if kind != expected {
        return Err(CliError::schema(&format!("kind '{kind}' where '{expected}' expected")));
    }
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::io(&format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_slice(&bytes)
        .map_err(|e| CliError::schema(&format!("{}: {e}", path.display())))
}

/// Serialize fully, then write in one shot: a failed serialization leaves no
/// partial output behind.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::io(&format!("serialization failed: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| CliError::io(&format!("cannot write {}: {e}", path.display())))
}

pub fn hash_file(path: &Path) -> Result<String, CliError> {
    use sha2::{Digest, Sha256};
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::io(&format!("cannot read {}: {e}", path.display())))?;
    Ok(format!("sha256:{}", hex::encode(Sha256::digest(&bytes))))
}

/// Collect `{path: hash}` for the report envelope.
pub fn input_hashes(paths: &[&Path]) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for p in paths {
        map.insert(p.display().to_string(), hash_file(p)?);
    }
    Ok(map)
}

/// Parse a comma-separated qubit list.
pub fn parse_qubit_list(text: &str) -> Result<BTreeSet<usize>, CliError> {
    let mut set = BTreeSet::new();
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Ok(set);
    }
    for part in trimmed.split(',') {
        let q: usize = part
            .trim()
            .parse()
            .map_err(|_| CliError::schema(&format!("bad qubit index '{part}'")))?;
        set.insert(q);
    }
    Ok(set)
}
