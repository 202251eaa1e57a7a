//! Adversarial search over sequences of parameterized 2-qubit unitaries.
//!
//! Each path gate is U = exp(i Σₐ θₐ Bₐ) over the 16 two-qubit Pauli
//! products. The objective is a smoothed worst-case score
//! λ·ε² + τ·log Σᵢ exp(Eᵢ/τ); gradients come either from central finite
//! differences or analytically by differentiating through the 4×4
//! exponential's eigensystem and back-propagating along the path.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::reductions::cgscon::{CgsconInstance, TraversalPath};
use crate::rng;
use crate::state::{partial_trace_outer, StateVector};
use crate::traversal::{evaluate_path, PathTrace, Retention};

/// Number of Pauli-product basis elements for a 2-qubit generator.
pub const PARAMS_PER_GATE: usize = 16;

/// One parameterized gate: a support pair and the 16 generator coefficients.
#[derive(Debug, Clone, Serialize)]
pub struct ParamGate {
    pub support: (usize, usize),
    pub theta: [f64; PARAMS_PER_GATE],
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamPath {
    pub num_qubits: usize,
    pub gates: Vec<ParamGate>,
}

impl ParamPath {
    /// Zero-initialized path on the given support schedule.
    pub fn identity(num_qubits: usize, supports: &[(usize, usize)]) -> Self {
        ParamPath {
            num_qubits,
            gates: supports
                .iter()
                .map(|&support| ParamGate { support, theta: [0.0; PARAMS_PER_GATE] })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    fn flat_theta(&self) -> Vec<f64> {
        self.gates.iter().flat_map(|g| g.theta.iter().copied()).collect()
    }

    fn with_flat_theta(&self, theta: &[f64]) -> Self {
        let mut out = self.clone();
        for (g, chunk) in out.gates.iter_mut().zip(theta.chunks(PARAMS_PER_GATE)) {
            g.theta.copy_from_slice(chunk);
        }
        out
    }
}

/// The 16 two-qubit Pauli products; index a = 4·hi + lo acts with σ_lo on
/// the first support qubit (the low matrix bit).
fn pauli_basis() -> Vec<CMat> {
    fn sigma(i: usize) -> CMat {
        let o = Complex64::ZERO;
        let l = Complex64::ONE;
        let im = Complex64::new(0.0, 1.0);
        match i {
            0 => CMat::from_row_slice(2, 2, &[l, o, o, l]),
            1 => CMat::from_row_slice(2, 2, &[o, l, l, o]),
            2 => CMat::from_row_slice(2, 2, &[o, -im, im, o]),
            _ => CMat::from_row_slice(2, 2, &[l, o, o, -l]),
        }
    }
    let mut basis = Vec::with_capacity(PARAMS_PER_GATE);
    for a in 0..PARAMS_PER_GATE {
        basis.push(linalg::kron(&sigma(a / 4), &sigma(a % 4)));
    }
    basis
}

fn generator(theta: &[f64; PARAMS_PER_GATE], basis: &[CMat]) -> CMat {
    let mut h = CMat::zeros(4, 4);
    for (t, b) in theta.iter().zip(basis) {
        if *t != 0.0 {
            h += b * Complex64::new(*t, 0.0);
        }
    }
    h
}

/// Materialized gate with the eigensystem cached for differentiation.
struct MaterializedGate {
    support: (usize, usize),
    unitary: CMat,
    eigenvalues: Vec<f64>,
    eigenvectors: CMat,
}

fn materialize_gate(g: &ParamGate, basis: &[CMat]) -> MaterializedGate {
    let h = generator(&g.theta, basis);
    let (values, vectors) = linalg::hermitian_eigen(&h);
    let mut phases = CMat::zeros(4, 4);
    for (i, lam) in values.iter().enumerate() {
        phases[(i, i)] = Complex64::new(lam.cos(), lam.sin());
    }
    let unitary = &vectors * phases * vectors.adjoint();
    MaterializedGate { support: g.support, unitary, eigenvalues: values, eigenvectors: vectors }
}

/// Materialize every gate by exponentiating its Hermitian generator.
pub fn materialize(p: &ParamPath) -> Result<TraversalPath> {
    let basis = pauli_basis();
    let mut gates = Vec::with_capacity(p.gates.len());
    for g in &p.gates {
        let m = materialize_gate(g, &basis);
        gates.push(crate::circuit::Gate::raw2(m.support.0, m.support.1, m.unitary)?);
    }
    TraversalPath::new(p.num_qubits, gates)
}

/// Recover generator coefficients from a concrete path (the matrix logarithm
/// route). 1-qubit gates are widened onto a deterministic partner qubit.
pub fn path_to_param(path: &TraversalPath) -> Result<ParamPath> {
    let basis = pauli_basis();
    let n = path.num_qubits();
    if n < 2 {
        return Err(Error::RegisterSize { got: n, cap: 2 });
    }
    let mut gates = Vec::with_capacity(path.len());
    for g in path.gates() {
        let (support, matrix) = match g.qubits() {
            [q] => (((*q), (*q + 1) % n), linalg::kron(&linalg::identity(2), g.matrix())),
            [a, b] => ((*a, *b), g.matrix().clone()),
            _ => unreachable!("gates are 1- or 2-local"),
        };
        let h = linalg::log_unitary(&matrix)?;
        let mut theta = [0.0; PARAMS_PER_GATE];
        for (a, b) in basis.iter().enumerate() {
            theta[a] = (b * &h).trace().re / 4.0;
        }
        gates.push(ParamGate { support, theta });
    }
    Ok(ParamPath { num_qubits: n, gates })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum GradientMode {
    Analytic,
    FiniteDifference { h: f64 },
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LearningRate {
    pub initial: f64,
    pub growth: f64,
    pub shrink: f64,
    pub min: f64,
    pub max: f64,
}

impl Default for LearningRate {
    fn default() -> Self {
        LearningRate { initial: 0.1, growth: 1.5, shrink: 0.5, min: 1e-7, max: 2.0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_steps: usize,
    pub learning_rate: LearningRate,
    /// Soft-max temperature; defaults to 0.01·β of the source two-layer
    /// instance when available, else 0.01.
    pub tau: Option<f64>,
    /// Endpoint weight λ.
    pub lambda: f64,
    pub seed: u64,
    pub gradient: GradientMode,
    /// Scale of the random initial angles.
    pub init_scale: f64,
    /// Path length; the support schedule defaults to brickwork.
    pub path_length: usize,
    pub supports: Option<Vec<(usize, usize)>>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 4,
            max_steps: 200,
            learning_rate: LearningRate::default(),
            tau: None,
            lambda: 10.0,
            seed: 0,
            gradient: GradientMode::Analytic,
            init_scale: 0.3,
            path_length: 8,
            supports: None,
        }
    }
}

impl OptimizerConfig {
    fn validate(&self, inst: &CgsconInstance) -> Result<()> {
        if self.path_length > inst.m_max {
            return Err(Error::BudgetExceeded { len: self.path_length, m_max: inst.m_max });
        }
        if let GradientMode::FiniteDifference { h } = self.gradient {
            if !(1e-7..=1e-3).contains(&h) {
                return Err(Error::ParamRange(format!(
                    "finite-difference step {h} outside [1e-7, 1e-3]"
                )));
            }
        }
        let lambda_positive = self.lambda > 0.0;
        if !lambda_positive {
            return Err(Error::ParamRange("endpoint weight λ must be positive".into()));
        }
        if let Some(tau) = self.tau {
            let tau_positive = tau > 0.0;
            if !tau_positive {
                return Err(Error::ParamRange("temperature τ must be positive".into()));
            }
        }
        if let Some(supports) = &self.supports {
            if supports.len() != self.path_length {
                return Err(Error::SizeMismatch {
                    expected: self.path_length,
                    got: supports.len(),
                });
            }
            for &(a, b) in supports {
                if a == b || a >= inst.num_qubits() || b >= inst.num_qubits() {
                    return Err(Error::InvalidSupport(format!(
                        "bad support pair ({a}, {b})"
                    )));
                }
            }
        }
        Ok(())
    }

    fn resolved_tau(&self, inst: &CgsconInstance) -> f64 {
        self.tau.unwrap_or_else(|| {
            0.01 * inst.source.as_ref().map(|t| t.beta()).unwrap_or(1.0)
        })
    }

    fn schedule(&self, inst: &CgsconInstance) -> Vec<(usize, usize)> {
        if let Some(s) = &self.supports {
            return s.clone();
        }
        brickwork_schedule(inst.num_qubits(), self.path_length)
    }
}

/// Round-robin brickwork pairing over the full register.
pub fn brickwork_schedule(num_qubits: usize, length: usize) -> Vec<(usize, usize)> {
    let mut rows: Vec<Vec<(usize, usize)>> = Vec::new();
    for parity in 0..2 {
        let mut row = Vec::new();
        let mut q = parity;
        while q + 1 < num_qubits {
            row.push((q, q + 1));
            q += 2;
        }
        if !row.is_empty() {
            rows.push(row);
        }
    }
    if rows.is_empty() {
        rows.push(vec![(0, 1.min(num_qubits.saturating_sub(1)))]);
    }
    let flat: Vec<(usize, usize)> = rows.into_iter().flatten().collect();
    (0..length).map(|i| flat[i % flat.len()]).collect()
}

/// Everything fixed during one optimization run.
struct Workspace<'a> {
    inst: &'a CgsconInstance,
    start: StateVector,
    target: StateVector,
    basis: Vec<CMat>,
    tau: f64,
    lambda: f64,
}

impl<'a> Workspace<'a> {
    fn new(inst: &'a CgsconInstance, cfg: &OptimizerConfig) -> Result<Self> {
        Ok(Workspace {
            inst,
            start: inst.start_state()?,
            target: inst.target_state()?,
            basis: pauli_basis(),
            tau: cfg.resolved_tau(inst),
            lambda: cfg.lambda,
        })
    }

    fn forward(&self, p: &ParamPath) -> Result<(Vec<MaterializedGate>, Vec<StateVector>, Vec<f64>)> {
        let mats: Vec<MaterializedGate> =
            p.gates.iter().map(|g| materialize_gate(g, &self.basis)).collect();
        let mut states = Vec::with_capacity(p.len() + 1);
        states.push(self.start.clone());
        let mut energies = Vec::with_capacity(p.len());
        for m in &mats {
            let prev = states.last().unwrap();
            let next = StateVector::from_amplitudes(
                p.num_qubits,
                crate::state::apply_matrix_on(
                    prev.amplitudes(),
                    p.num_qubits,
                    &[m.support.0, m.support.1],
                    &m.unitary,
                ),
            )?;
            energies.push(self.inst.hamiltonian.energy(&next)?);
            states.push(next);
        }
        Ok((mats, states, energies))
    }

    fn objective_parts(&self, states: &[StateVector], energies: &[f64]) -> Result<(f64, f64, f64)> {
        let eps = self.target.distance(states.last().unwrap())?;
        let soft = if energies.is_empty() {
            0.0
        } else {
            let e_max = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = energies.iter().map(|e| ((e - e_max) / self.tau).exp()).sum();
            e_max + self.tau * sum.ln()
        };
        Ok((self.lambda * eps * eps + soft, eps, soft))
    }

    fn objective(&self, p: &ParamPath) -> Result<f64> {
        let (_, states, energies) = self.forward(p)?;
        Ok(self.objective_parts(&states, &energies)?.0)
    }

    /// Analytic gradient by reverse accumulation through the path.
    fn gradient_analytic(&self, p: &ParamPath) -> Result<(f64, Vec<f64>)> {
        let (mats, states, energies) = self.forward(p)?;
        let (obj, _, _) = self.objective_parts(&states, &energies)?;
        let m = p.len();
        let mut grad = vec![0.0; m * PARAMS_PER_GATE];
        if m == 0 {
            return Ok((obj, grad));
        }

        // Soft-max weights.
        let e_max = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let wsum: f64 = energies.iter().map(|e| ((e - e_max) / self.tau).exp()).sum();
        let weights: Vec<f64> =
            energies.iter().map(|e| ((e - e_max) / self.tau).exp() / wsum).collect();

        // z_m = 2 w_m H ψ_m + 2λ(ψ_m − target); going down,
        // z_{t} = U_{t+1}† z_{t+1} + 2 w_t H ψ_t.
        let mut z = self.inst.hamiltonian.matvec(&states[m])?;
        z.scale(Complex64::new(2.0 * weights[m - 1], 0.0));
        z.axpy(Complex64::new(2.0 * self.lambda, 0.0), &states[m]);
        z.axpy(Complex64::new(-2.0 * self.lambda, 0.0), &self.target);

        for t in (1..=m).rev() {
            let mat = &mats[t - 1];
            let support = [mat.support.0, mat.support.1];
            // K = Tr_rest |ψ_{t−1}⟩⟨z_t| in the gate's own bit order.
            let k_mat = partial_trace_outer(&z, &states[t - 1], &support)?;
            let derivs = gate_derivatives(mat, &self.basis);
            for (a, d) in derivs.iter().enumerate() {
                let mut acc = Complex64::ZERO;
                for pp in 0..4 {
                    for q in 0..4 {
                        acc += d[(pp, q)] * k_mat[(q, pp)];
                    }
                }
                grad[(t - 1) * PARAMS_PER_GATE + a] = acc.re;
            }
            if t > 1 {
                // z_{t-1} = U_t† z_t + 2 w_{t-1} H ψ_{t-1}.
                let u_dag = mat.unitary.adjoint();
                let mut prev = StateVector::from_amplitudes(
                    p.num_qubits,
                    crate::state::apply_matrix_on(z.amplitudes(), p.num_qubits, &support, &u_dag),
                )?;
                let mut hpsi = self.inst.hamiltonian.matvec(&states[t - 1])?;
                hpsi.scale(Complex64::new(2.0 * weights[t - 2], 0.0));
                prev.axpy(Complex64::ONE, &hpsi);
                z = prev;
            }
        }
        Ok((obj, grad))
    }

    fn gradient_fd(&self, p: &ParamPath, h: f64) -> Result<(f64, Vec<f64>)> {
        let obj = self.objective(p)?;
        let theta = p.flat_theta();
        let mut grad = vec![0.0; theta.len()];
        for i in 0..theta.len() {
            let mut plus = theta.clone();
            plus[i] += h;
            let mut minus = theta.clone();
            minus[i] -= h;
            let f_plus = self.objective(&p.with_flat_theta(&plus))?;
            let f_minus = self.objective(&p.with_flat_theta(&minus))?;
            grad[i] = (f_plus - f_minus) / (2.0 * h);
        }
        Ok((obj, grad))
    }

    fn gradient(&self, p: &ParamPath, mode: GradientMode) -> Result<(f64, Vec<f64>)> {
        match mode {
            GradientMode::Analytic => self.gradient_analytic(p),
            GradientMode::FiniteDifference { h } => self.gradient_fd(p, h),
        }
    }
}

/// ∂U/∂θₐ for all 16 basis directions via the eigensystem of the generator.
fn gate_derivatives(mat: &MaterializedGate, basis: &[CMat]) -> Vec<CMat> {
    let v = &mat.eigenvectors;
    let lam = &mat.eigenvalues;
    // Loewner-type matrix for f(x) = e^{ix}.
    let mut phi = CMat::zeros(4, 4);
    for p in 0..4 {
        for q in 0..4 {
            let d = lam[p] - lam[q];
            phi[(p, q)] = if d.abs() < 1e-9 {
                let mid = 0.5 * (lam[p] + lam[q]);
                Complex64::new(-mid.sin(), mid.cos())
            } else {
                (Complex64::new(lam[p].cos(), lam[p].sin())
                    - Complex64::new(lam[q].cos(), lam[q].sin()))
                    / Complex64::new(d, 0.0)
            };
        }
    }
    basis
        .iter()
        .map(|b| {
            let w = v.adjoint() * b * v;
            let hadamard = CMat::from_fn(4, 4, |p, q| phi[(p, q)] * w[(p, q)]);
            v * hadamard * v.adjoint()
        })
        .collect()
}

/// Smoothed objective λ·ε² + τ·log Σ exp(Eᵢ/τ) of a parameterized path.
pub fn objective(inst: &CgsconInstance, p: &ParamPath, cfg: &OptimizerConfig) -> Result<f64> {
    let ws = Workspace::new(inst, cfg)?;
    ws.objective(p)
}

/// Objective and its gradient in the configured mode, flattened gate-major.
pub fn objective_and_gradient(
    inst: &CgsconInstance,
    p: &ParamPath,
    cfg: &OptimizerConfig,
) -> Result<(f64, Vec<f64>)> {
    let ws = Workspace::new(inst, cfg)?;
    ws.gradient(p, cfg.gradient)
}

#[derive(Debug, Clone, Serialize)]
pub struct RestartLog {
    pub restart: usize,
    /// Objective after each accepted step, starting with the initial value.
    pub objectives: Vec<f64>,
    pub accepted_steps: usize,
    pub converged: bool,
    /// Exact score max{ε, max_energy} of the materialized final path.
    pub exact_score: f64,
}

#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    pub best: ParamPath,
    pub trace: PathTrace,
    pub exact_score: f64,
    pub best_restart: usize,
    pub logs: Vec<RestartLog>,
}

/// Gradient descent with backtracking line search and seeded restarts.
/// Returns the best run by exact score; deterministic for a fixed seed.
pub fn optimize(
    inst: &CgsconInstance,
    cfg: &OptimizerConfig,
    init: Option<&ParamPath>,
) -> Result<OptimizeOutcome> {
    cfg.validate(inst)?;
    let schedule = cfg.schedule(inst);

    struct RestartOutcome {
        path: ParamPath,
        log: RestartLog,
    }

    let outcomes: Vec<Result<RestartOutcome>> = (0..cfg.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let ws = Workspace::new(inst, cfg)?;
            let mut path = match (r, init) {
                (0, Some(p)) => p.clone(),
                _ => {
                    let mut rng = rng::stream(cfg.seed, "optimizer-restart", r as u64);
                    let mut p = ParamPath::identity(inst.num_qubits(), &schedule);
                    for g in &mut p.gates {
                        for t in g.theta.iter_mut() {
                            *t = cfg.init_scale * rng::complex_gaussian(&mut rng).re;
                        }
                    }
                    p
                }
            };
            let mut obj = ws.objective(&path)?;
            let mut objectives = vec![obj];
            let mut lr = cfg.learning_rate.initial;
            let mut accepted = 0usize;
            let mut converged = false;
            for _ in 0..cfg.max_steps {
                let (_, grad) = ws.gradient(&path, cfg.gradient)?;
                let gnorm_sq: f64 = grad.iter().map(|g| g * g).sum();
                if gnorm_sq.sqrt() < 1e-8 {
                    converged = true;
                    break;
                }
                let theta = path.flat_theta();
                let mut step = lr;
                let mut accepted_step = None;
                while step >= cfg.learning_rate.min {
                    let cand: Vec<f64> =
                        theta.iter().zip(&grad).map(|(t, g)| t - step * g).collect();
                    let cand_path = path.with_flat_theta(&cand);
                    let cand_obj = ws.objective(&cand_path)?;
                    if cand_obj <= obj - 1e-4 * step * gnorm_sq {
                        accepted_step = Some((cand_path, cand_obj, step));
                        break;
                    }
                    step *= cfg.learning_rate.shrink;
                }
                match accepted_step {
                    Some((p, o, s)) => {
                        path = p;
                        obj = o;
                        objectives.push(o);
                        accepted += 1;
                        lr = (s * cfg.learning_rate.growth).min(cfg.learning_rate.max);
                    }
                    None => {
                        converged = true;
                        break;
                    }
                }
            }
            let eval = evaluate_path(inst, &materialize(&path)?, Retention::Discard)?;
            let exact_score = eval.trace.epsilon.max(eval.trace.max_energy);
            Ok(RestartOutcome {
                path,
                log: RestartLog {
                    restart: r,
                    objectives,
                    accepted_steps: accepted,
                    converged,
                    exact_score,
                },
            })
        })
        .collect();

    let mut logs = Vec::with_capacity(outcomes.len());
    let mut best: Option<(usize, f64, ParamPath)> = None;
    for outcome in outcomes {
        let RestartOutcome { path, log } = outcome?;
        let score = log.exact_score;
        let r = log.restart;
        logs.push(log);
        let better = match &best {
            None => true,
            Some((_, s, _)) => score < *s,
        };
        if better {
            best = Some((r, score, path));
        }
    }
    let (best_restart, exact_score, best) = best.expect("at least one restart");
    let eval = evaluate_path(inst, &materialize(&best)?, Retention::Discard)?;
    Ok(OptimizeOutcome { best, trace: eval.trace, exact_score, best_restart, logs })
}
