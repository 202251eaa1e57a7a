//! Path evaluation against a connectivity instance and numerical
//! certification of the traversal inequalities: the small-projection bounds,
//! the traversal overlap bound, the cross-term bound, and the final
//! soundness max-expression.

use std::sync::Mutex;

use itertools::Itertools;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::LayeredHamiltonian;
use crate::linalg::{self, CMat};
use crate::reductions::cgscon::{
    projector_000, projector_111, projector_outside_span, CgsconInstance, SplitRegisters,
    TraversalPath,
};
use crate::rng;
use crate::state::{self, partial_trace_outer, OperatorFactor, StateVector};

/// Slack applied to every inequality assertion (unit-norm data).
pub const SLACK: f64 = 1e-9;
/// Partial contractions below this are treated as exactly zero.
pub const ORTHO_TOL: f64 = 1e-10;
/// Random k-local unitaries drawn when certifying subspace orthogonality.
pub const ORTHO_SAMPLES: usize = 200;
/// Registers up to this size retain full per-step states by default.
pub const RETAIN_QUBIT_CAP: usize = 14;

/// A projector embedded with identities: the product of orthogonal-projector
/// factors on pairwise-disjoint supports.
#[derive(Debug, Clone)]
pub struct EmbeddedProjector {
    num_qubits: usize,
    factors: Vec<OperatorFactor>,
}

impl EmbeddedProjector {
    pub fn new(num_qubits: usize, factors: Vec<OperatorFactor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidSupport("projector needs at least one factor".into()));
        }
        let mut seen: Vec<usize> = Vec::new();
        for f in &factors {
            f.validate_in_register(num_qubits)?;
            let err = linalg::projector_error(f.matrix());
            if err > 1e-12 {
                return Err(Error::NotProjector(err));
            }
            for &q in f.support() {
                if seen.contains(&q) {
                    return Err(Error::InvalidSupport(format!(
                        "projector factors overlap on qubit {q}"
                    )));
                }
                seen.push(q);
            }
        }
        Ok(EmbeddedProjector { num_qubits, factors })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn factors(&self) -> &[OperatorFactor] {
        &self.factors
    }

    /// Sorted union of factor supports.
    pub fn region(&self) -> Vec<usize> {
        let mut r: Vec<usize> = self.factors.iter().flat_map(|f| f.support().iter().copied()).collect();
        r.sort_unstable();
        r
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        let mut cur = psi.clone();
        for f in &self.factors {
            cur = cur.apply_factor(f)?;
        }
        Ok(cur)
    }

    /// ‖P|ψ⟩‖.
    pub fn overlap(&self, psi: &StateVector) -> Result<f64> {
        Ok(self.apply(psi)?.norm())
    }

    /// If every factor is rank one, the region and the product vector.
    fn rank1_region_vector(&self) -> Option<(Vec<usize>, Vec<Complex64>)> {
        let mut pieces: Vec<(&[usize], Vec<Complex64>)> = Vec::new();
        for f in &self.factors {
            let (values, vectors) = linalg::hermitian_eigen(f.matrix());
            let rank = values.iter().filter(|&&v| v > 0.5).count();
            if rank != 1 {
                return None;
            }
            let idx = values.iter().position(|&v| v > 0.5).unwrap();
            pieces.push((f.support(), vectors.column(idx).iter().copied().collect()));
        }
        let region = self.region();
        let dim = 1usize << region.len();
        let mut v = vec![Complex64::ONE; dim];
        for (l, slot) in v.iter_mut().enumerate() {
            for (support, vec) in &pieces {
                let mut local = 0usize;
                for (t, &q) in support.iter().enumerate() {
                    let pos = region.iter().position(|&r| r == q).unwrap();
                    local |= ((l >> pos) & 1) << t;
                }
                *slot *= vec[local];
            }
        }
        Some((region, v))
    }

    /// Densify on a covering region (for invariant checks).
    fn dense_on(&self, region: &[usize]) -> Result<CMat> {
        let mut ops: Vec<(&[usize], &CMat)> = Vec::new();
        for f in &self.factors {
            ops.push((f.support(), f.matrix()));
        }
        // Qubits of the region not covered by any factor act as identity.
        state::dense_on_region(region, &ops)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrthoMethod {
    ExactAndSampled,
    SampledOnly,
}

/// Result of certifying that two projector ranges are k-orthogonal.
#[derive(Debug, Clone, Serialize)]
pub struct OrthoCert {
    pub k: usize,
    pub ok: bool,
    pub method: OrthoMethod,
    /// Worst contraction / sampled cross-norm observed.
    pub worst: f64,
}

/// A pair of mutually orthogonal embedded projectors with a cached
/// k-orthogonality certificate for their ranges.
#[derive(Debug)]
pub struct ProjectorPair {
    pub a: EmbeddedProjector,
    pub b: EmbeddedProjector,
    cert: Mutex<Option<(usize, OrthoCert)>>,
}

impl Clone for ProjectorPair {
    fn clone(&self) -> Self {
        ProjectorPair {
            a: self.a.clone(),
            b: self.b.clone(),
            cert: Mutex::new(self.cert.lock().unwrap().clone()),
        }
    }
}

impl ProjectorPair {
    pub fn new(a: EmbeddedProjector, b: EmbeddedProjector) -> Result<Self> {
        if a.num_qubits() != b.num_qubits() {
            return Err(Error::SizeMismatch { expected: a.num_qubits(), got: b.num_qubits() });
        }
        // P_a P_b = 0 on the union region.
        let mut region = a.region();
        region.extend(b.region());
        region.sort_unstable();
        region.dedup();
        let da = a.dense_on(&region)?;
        let db = b.dense_on(&region)?;
        let prod = (&da * &db).norm();
        if prod > 1e-12 {
            return Err(Error::InvalidSupport(format!(
                "projector ranges are not orthogonal (‖P_a P_b‖_F = {prod:.3e})"
            )));
        }
        Ok(ProjectorPair { a, b, cert: Mutex::new(None) })
    }

    /// Certify that the two ranges are k-orthogonal: the exact subset
    /// criterion when both projectors are rank one on the same region, and a
    /// seeded sample of random k-local unitaries U testing ‖P_b U P_a‖.
    pub fn certify(&self, k: usize) -> Result<OrthoCert> {
        if let Some((ck, cert)) = self.cert.lock().unwrap().clone() {
            if ck == k {
                return Ok(cert);
            }
        }
        let cert = self.certify_uncached(k)?;
        *self.cert.lock().unwrap() = Some((k, cert.clone()));
        Ok(cert)
    }

    fn certify_uncached(&self, k: usize) -> Result<OrthoCert> {
        let mut worst = 0.0f64;
        let mut exact_available = false;
        let mut ok = true;

        if let (Some((ra, va)), Some((rb, vb))) =
            (self.a.rank1_region_vector(), self.b.rank1_region_vector())
        {
            if ra == rb && ra.len() <= 12 {
                exact_available = true;
                let na = ra.len();
                let sa = StateVector::from_amplitudes(na.max(1), va)?;
                let sb = StateVector::from_amplitudes(na.max(1), vb)?;
                // Restricted to the shared region the ranges are spanned by
                // single states; k-orthogonality reduces to the state-level
                // subset criterion there.
                let eff_k = k.min(na);
                let report = check_k_orthogonal(&sa, &sb, eff_k)?;
                worst = worst.max(report.worst_norm);
                ok &= report.orthogonal;
            }
        }

        // Sampled certificate on the full register.
        let mut rng = rng::stream(0x51ab5, "subspace-ortho", k as u64);
        let n = self.a.num_qubits();
        for _ in 0..ORTHO_SAMPLES {
            let mut qubits: Vec<usize> = Vec::new();
            while qubits.len() < k.min(n) {
                let q = rand::Rng::random_range(&mut rng, 0..n);
                if !qubits.contains(&q) {
                    qubits.push(q);
                }
            }
            let u = rng::haar_unitary(1usize << qubits.len(), &mut rng);
            let norm = self.cross_norm(&qubits, &u, &mut rng)?;
            worst = worst.max(norm);
            ok &= norm <= ORTHO_TOL;
        }

        Ok(OrthoCert {
            k,
            ok,
            method: if exact_available {
                OrthoMethod::ExactAndSampled
            } else {
                OrthoMethod::SampledOnly
            },
            worst,
        })
    }

    /// ‖P_b U P_a‖ via power iteration on P_a U† P_b U P_a.
    fn cross_norm(
        &self,
        qubits: &[usize],
        u: &CMat,
        rng: &mut impl rand::Rng,
    ) -> Result<f64> {
        let n = self.a.num_qubits();
        let dim = 1usize << n;
        let start: Vec<Complex64> = (0..dim).map(|_| rng::complex_gaussian(rng)).collect();
        let mut v = StateVector::from_amplitudes(n, start)?.normalize()?;
        let u_dag = u.adjoint();
        let mut lambda = 0.0f64;
        for _ in 0..60 {
            let pa = self.a.apply(&v)?;
            let stepped = StateVector::from_amplitudes(
                n,
                state::apply_matrix_on(pa.amplitudes(), n, qubits, u),
            )?;
            let pb = self.b.apply(&stepped)?;
            let back = StateVector::from_amplitudes(
                n,
                state::apply_matrix_on(pb.amplitudes(), n, qubits, &u_dag),
            )?;
            let m_v = self.a.apply(&back)?;
            let norm = m_v.norm();
            if norm < 1e-18 {
                return Ok(0.0);
            }
            let new_lambda = v.inner(&m_v)?.re;
            let rel = (new_lambda - lambda).abs() / new_lambda.abs().max(1e-300);
            lambda = new_lambda;
            v = m_v.normalize()?;
            if rel < 1e-6 {
                break;
            }
        }
        Ok(lambda.max(0.0).sqrt())
    }
}

/// The four projectors of the traversal setup: S ⟂ T inside U, and V with
/// U ⟂ V. Π = I − P_U − P_V is the penalized complement.
#[derive(Debug, Clone)]
pub struct SubspaceQuad {
    pub st: ProjectorPair,
    pub uv: ProjectorPair,
}

impl SubspaceQuad {
    pub fn new(st: ProjectorPair, uv: ProjectorPair) -> Result<Self> {
        // S ∪ T ⊆ U as projector algebra: P_U P_S = P_S and P_U P_T = P_T.
        let mut region = st.a.region();
        region.extend(st.b.region());
        region.extend(uv.a.region());
        region.extend(uv.b.region());
        region.sort_unstable();
        region.dedup();
        if region.len() > 12 {
            return Err(Error::CapExceeded {
                what: "quad validation region",
                got: region.len(),
                cap: 12,
            });
        }
        let pu = uv.a.dense_on(&region)?;
        for inner in [&st.a, &st.b] {
            let p = inner.dense_on(&region)?;
            let diff = (&pu * &p - &p).norm();
            if diff > 1e-12 {
                return Err(Error::InvalidSupport(format!(
                    "S/T ranges not contained in U (deviation {diff:.3e})"
                )));
            }
        }
        Ok(SubspaceQuad { st, uv })
    }

    /// The quad used by compiled instances: S/T pin the marker block to
    /// 000/111 with the guard at 000, U/V pin the guard to 000/111.
    pub fn for_split_registers(regs: &SplitRegisters, num_qubits: usize) -> Result<Self> {
        let p_s = EmbeddedProjector::new(
            num_qubits,
            vec![projector_000(regs.marker), projector_000(regs.guard)],
        )?;
        let p_t = EmbeddedProjector::new(
            num_qubits,
            vec![projector_111(regs.marker), projector_000(regs.guard)],
        )?;
        let p_u = EmbeddedProjector::new(num_qubits, vec![projector_000(regs.guard)])?;
        let p_v = EmbeddedProjector::new(num_qubits, vec![projector_111(regs.guard)])?;
        SubspaceQuad::new(ProjectorPair::new(p_s, p_t)?, ProjectorPair::new(p_u, p_v)?)
    }

    /// ‖(P_U − P_S − P_T)|ψ⟩‖².
    pub fn middle_overlap_sq(&self, psi: &StateVector) -> Result<f64> {
        let mut v = self.uv.a.apply(psi)?;
        v.axpy(-Complex64::ONE, &self.st.a.apply(psi)?);
        v.axpy(-Complex64::ONE, &self.st.b.apply(psi)?);
        Ok(v.norm().powi(2))
    }

    /// ‖(I − P_U − P_V)|ψ⟩‖ — the penalized complement overlap.
    pub fn penalty_overlap(&self, psi: &StateVector) -> Result<f64> {
        let mut v = psi.clone();
        v.axpy(-Complex64::ONE, &self.uv.a.apply(psi)?);
        v.axpy(-Complex64::ONE, &self.uv.b.apply(psi)?);
        Ok(v.norm())
    }
}

/// Summary statistics of a traversal.
#[derive(Debug, Clone, Serialize)]
pub struct PathTrace {
    /// Path length m.
    pub m: usize,
    /// ⟨ψᵢ|H|ψᵢ⟩ after each gate, i = 1..m.
    pub energies: Vec<f64>,
    /// Energy of the prepared start state.
    pub start_energy: f64,
    /// ‖U_target|0…0⟩ − ψ_m‖.
    pub epsilon: f64,
    /// max over i = 1..m of the designated penalty overlap ‖Π|ψᵢ⟩‖
    /// (0 when the instance has no designated penalty or the path is empty).
    pub delta: f64,
    /// Max recorded energy; equals the start energy for an empty path.
    pub max_energy: f64,
    /// YES-witness verdict: max{ε, energies} ≤ c.
    pub verdict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Retention {
    /// Retain states on registers up to `RETAIN_QUBIT_CAP`, else stream.
    Auto,
    /// Always retain (required by the per-state inequality checks).
    Retain,
    /// Never retain.
    Discard,
}

#[derive(Debug, Clone)]
pub struct PathEvaluation {
    pub trace: PathTrace,
    /// ψ₀..ψ_m when retained.
    pub states: Option<Vec<StateVector>>,
    pub final_state: StateVector,
}

/// Simulate the path from the prepared start state, recording the energy
/// after every gate, the endpoint distance ε, and the penalty overlap δ.
pub fn evaluate_path(
    inst: &CgsconInstance,
    path: &TraversalPath,
    retention: Retention,
) -> Result<PathEvaluation> {
    if path.num_qubits() != inst.num_qubits() {
        return Err(Error::SizeMismatch { expected: inst.num_qubits(), got: path.num_qubits() });
    }
    if path.len() > inst.m_max {
        return Err(Error::BudgetExceeded { len: path.len(), m_max: inst.m_max });
    }
    let retain = match retention {
        Retention::Auto => inst.num_qubits() <= RETAIN_QUBIT_CAP,
        Retention::Retain => true,
        Retention::Discard => false,
    };

    let start = inst.start_state()?;
    let target = inst.target_state()?;
    let start_energy = inst.hamiltonian.energy(&start)?;

    let mut states: Vec<StateVector> = Vec::new();
    if retain {
        states.push(start.clone());
    }
    let mut cur = start;
    let mut energies = Vec::with_capacity(path.len());
    let mut delta = 0.0f64;
    for gate in path.gates() {
        cur = gate.apply(&cur)?;
        energies.push(inst.hamiltonian.energy(&cur)?);
        if let Some(pen) = &inst.penalty {
            delta = delta.max(cur.apply_factor(pen)?.norm());
        }
        if retain {
            states.push(cur.clone());
        }
    }
    let epsilon = target.distance(&cur)?;
    let max_energy = energies.iter().copied().fold(f64::NAN, f64::max);
    let max_energy = if energies.is_empty() { start_energy } else { max_energy };
    let verdict = epsilon.max(max_energy) <= inst.c;
    Ok(PathEvaluation {
        trace: PathTrace {
            m: path.len(),
            energies,
            start_energy,
            epsilon,
            delta,
            max_energy,
            verdict,
        },
        states: if retain { Some(states) } else { None },
        final_state: cur,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct KOrthReport {
    pub orthogonal: bool,
    /// First subset whose partial contraction exceeds the tolerance.
    pub violating_subset: Option<Vec<usize>>,
    pub worst_norm: f64,
}

/// Exhaustive k-orthogonality criterion for a pair of states: every k-subset
/// partial contraction of |φ⟩⟨ψ| must vanish.
pub fn check_k_orthogonal(psi: &StateVector, phi: &StateVector, k: usize) -> Result<KOrthReport> {
    if psi.num_qubits() != phi.num_qubits() {
        return Err(Error::SizeMismatch { expected: psi.num_qubits(), got: phi.num_qubits() });
    }
    let n = psi.num_qubits();
    if k == 0 || k > state::FACTOR_SUPPORT_CAP {
        return Err(Error::CapExceeded { what: "orthogonality order k", got: k, cap: state::FACTOR_SUPPORT_CAP });
    }
    if k > n {
        return Err(Error::CapExceeded { what: "orthogonality order k", got: k, cap: n });
    }
    if n > 20 {
        return Err(Error::CapExceeded { what: "subset enumeration register", got: n, cap: 20 });
    }
    let mut worst = 0.0f64;
    let mut violating = None;
    for subset in (0..n).combinations(k) {
        let m = partial_trace_outer(psi, phi, &subset)?;
        let norm = linalg::op_norm(&m);
        if norm > worst {
            worst = norm;
        }
        if norm > ORTHO_TOL && violating.is_none() {
            violating = Some(subset);
        }
    }
    Ok(KOrthReport { orthogonal: violating.is_none(), violating_subset: violating, worst_norm: worst })
}

/// Max |⟨ψ|U|φ⟩| over seeded random k-local unitaries: the sampling
/// counterpart of `check_k_orthogonal`.
pub fn sampled_state_orthogonality(
    psi: &StateVector,
    phi: &StateVector,
    k: usize,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if psi.num_qubits() != phi.num_qubits() {
        return Err(Error::SizeMismatch { expected: psi.num_qubits(), got: phi.num_qubits() });
    }
    let n = psi.num_qubits();
    let mut rng = rng::stream(seed, "state-ortho-sample", k as u64);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let mut qubits: Vec<usize> = Vec::new();
        while qubits.len() < k.min(n) {
            let q = rand::Rng::random_range(&mut rng, 0..n);
            if !qubits.contains(&q) {
                qubits.push(q);
            }
        }
        let u = rng::haar_unitary(1usize << qubits.len(), &mut rng);
        let moved = StateVector::from_amplitudes(
            n,
            state::apply_matrix_on(phi.amplitudes(), n, &qubits, &u),
        )?;
        worst = worst.max(psi.inner(&moved)?.norm());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct StepBounds {
    pub t_overlap: f64,
    pub t_bound: f64,
    pub s_overlap: f64,
    pub s_bound: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SmallProjectionReport {
    pub ortho: OrthoCert,
    pub start_in_subspace: bool,
    pub pre_ok: bool,
    pub zeta: f64,
    pub steps: Vec<StepBounds>,
    pub first_violation: Option<usize>,
    pub ok: bool,
}

/// Check the growth bounds ‖P_T ψᵢ‖ ≤ i·ζ and ‖P_S ψᵢ‖ ≥ 1 − (i+1)·ζ along
/// a state sequence whose leakage out of S ⊕ T is at most ζ per step.
///
/// `k` is the claimed locality of the gates that produced the states; the
/// pair's ranges are certified k-orthogonal as a precondition.
pub fn check_small_projection(
    pair: &ProjectorPair,
    states: &[StateVector],
    zeta: f64,
    k: usize,
) -> Result<SmallProjectionReport> {
    if states.is_empty() {
        return Err(Error::ParamRange("state sequence is empty".into()));
    }
    let ortho = pair.certify(k)?;
    let start_in_subspace = pair.a.overlap(&states[0])? >= 1.0 - 1e-10;
    let pre_ok = ortho.ok && start_in_subspace;

    let mut steps = Vec::with_capacity(states.len());
    let mut first_violation = None;
    for (i, psi) in states.iter().enumerate() {
        let t_overlap = pair.b.overlap(psi)?;
        let s_overlap = pair.a.overlap(psi)?;
        let t_bound = i as f64 * zeta;
        let s_bound = 1.0 - (i as f64 + 1.0) * zeta;
        let ok = t_overlap <= t_bound + SLACK && s_overlap >= s_bound - SLACK;
        if !ok && first_violation.is_none() {
            first_violation = Some(i);
        }
        steps.push(StepBounds { t_overlap, t_bound, s_overlap, s_bound, ok });
    }
    let ok = pre_ok && first_violation.is_none();
    Ok(SmallProjectionReport {
        ortho,
        start_in_subspace,
        pre_ok,
        zeta,
        steps,
        first_violation,
        ok,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TraversalBoundReport {
    pub pre_ok: bool,
    pub epsilon_ok: bool,
    pub start_in_s: bool,
    pub target_in_t: bool,
    pub st_cert: OrthoCert,
    pub uv_cert: OrthoCert,
    /// max_i ‖(P_U − P_S − P_T)ψᵢ‖² over i = 1..m.
    pub lhs: f64,
    /// ((1−ε)/m)² − 2(m+1)δ.
    pub rhs: f64,
    /// 1-based index attaining the max.
    pub witness_index: usize,
    pub per_step: Vec<f64>,
    pub ok: bool,
}

/// Check that some intermediate state has overlap at least
/// ((1−ε)/m)² − 2(m+1)δ with the complement of S ⊕ T inside U.
pub fn check_modified_traversal(
    quad: &SubspaceQuad,
    states: &[StateVector],
    target: &StateVector,
    epsilon: f64,
    delta: f64,
    k: usize,
) -> Result<TraversalBoundReport> {
    if states.len() < 2 {
        return Err(Error::ParamRange("need at least one step (m ≥ 1)".into()));
    }
    let m = states.len() - 1;
    let st_cert = quad.st.certify(k)?;
    let uv_cert = quad.uv.certify(k)?;
    let start_in_s = quad.st.a.overlap(&states[0])? >= 1.0 - 1e-10;
    let target_in_t = quad.st.b.overlap(target)? >= 1.0 - 1e-10;
    let measured_eps = target.distance(&states[m])?;
    let epsilon_ok = epsilon <= 1.0 && measured_eps <= epsilon + 1e-12;
    let pre_ok = st_cert.ok && uv_cert.ok && start_in_s && target_in_t && epsilon_ok;

    let mut per_step = Vec::with_capacity(m);
    for psi in &states[1..] {
        per_step.push(quad.middle_overlap_sq(psi)?);
    }
    let (witness_index, lhs) = per_step
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .map(|(i, v)| (i + 1, v))
        .unwrap();
    let m_f = m as f64;
    let rhs = ((1.0 - epsilon) / m_f).powi(2) - 2.0 * (m_f + 1.0) * delta;
    let ok = pre_ok && lhs >= rhs - SLACK;
    Ok(TraversalBoundReport {
        pre_ok,
        epsilon_ok,
        start_in_s,
        target_in_t,
        st_cert,
        uv_cert,
        lhs,
        rhs,
        witness_index,
        per_step,
        ok,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossTermReport {
    /// E value at each step i = 1..m.
    pub per_step: Vec<f64>,
    pub max_abs: f64,
    /// 2·m·δ.
    pub bound: f64,
    pub ok: bool,
}

/// Check the cross-term bound |E| ≤ 2mδ at every step, where E collects the
/// guard-register coherences between the A- and B-dressed terms.
pub fn e_term_bound_check(
    states: &[StateVector],
    a: &LayeredHamiltonian,
    b: &LayeredHamiltonian,
    regs: &SplitRegisters,
    delta: f64,
) -> Result<CrossTermReport> {
    if states.len() < 2 {
        return Err(Error::ParamRange("need at least one step (m ≥ 1)".into()));
    }
    let m = states.len() - 1;
    let num_qubits = states[0].num_qubits();
    if num_qubits != regs.total_qubits() {
        return Err(Error::LayoutMismatch(format!(
            "states on {num_qubits} qubits, layout wants {}",
            regs.total_qubits()
        )));
    }
    // |000⟩⟨111| + |111⟩⟨000| on the guard block.
    let mut cross = CMat::zeros(8, 8);
    cross[(0, 7)] = Complex64::ONE;
    cross[(7, 0)] = Complex64::ONE;
    let cross = OperatorFactor::new(regs.guard.to_vec(), cross)?;
    let p1_guard = projector_111(regs.guard);
    let pi_marker = projector_outside_span(regs.marker);

    let mut per_step = Vec::with_capacity(m);
    for psi in &states[1..] {
        let w1 = psi.apply_factor(&cross)?.apply_factor(&pi_marker)?;
        let w2 = psi.apply_factor(&p1_guard)?.apply_factor(&pi_marker)?;
        let a_w1 = psi.inner(&a.matvec_embedded(&w1)?)?;
        let b_w1 = psi.inner(&b.matvec_embedded(&w1)?)?;
        let a_w2 = psi.inner(&a.matvec_embedded(&w2)?)?;
        let b_w2 = psi.inner(&b.matvec_embedded(&w2)?)?;
        let e = 0.5 * ((a_w1 - b_w1).re + (a_w2 + b_w2).re);
        per_step.push(e);
    }
    let max_abs = per_step.iter().map(|e| e.abs()).fold(0.0, f64::max);
    let bound = 2.0 * m as f64 * delta;
    Ok(CrossTermReport { per_step, max_abs, bound, ok: max_abs <= bound + SLACK })
}

/// The soundness max-expression max{δ², (β/2)(((1−ε)/m)² − 2(m+1)δ) − 2mδ},
/// clamped below at zero.
pub fn soundness_bound(beta: f64, m: usize, epsilon: f64, delta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 2.0) {
        return Err(Error::ParamRange(format!("beta must lie in (0, 2], got {beta}")));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::ParamRange(format!("epsilon must lie in [0, 1], got {epsilon}")));
    }
    if m == 0 {
        return Err(Error::ParamRange("path length m must be positive".into()));
    }
    if delta < 0.0 {
        return Err(Error::ParamRange(format!("delta must be nonnegative, got {delta}")));
    }
    let m_f = m as f64;
    let branch = (beta / 2.0) * (((1.0 - epsilon) / m_f).powi(2) - 2.0 * (m_f + 1.0) * delta)
        - 2.0 * m_f * delta;
    Ok((delta * delta).max(branch).max(0.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct SoundnessReport {
    pub beta: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub m: usize,
    pub bound: f64,
    pub max_energy: f64,
    /// The bound only applies to paths with ε ≤ 1.
    pub applicable: bool,
    pub ok: bool,
}

/// Assert max_energy ≥ soundness_bound(β, m, ε, δ) − slack for a measured
/// trace against a certified lower bound A + B ⪰ βI.
pub fn check_soundness(trace: &PathTrace, beta: f64) -> Result<SoundnessReport> {
    let applicable = trace.m >= 1 && trace.epsilon <= 1.0;
    let (bound, ok) = if applicable {
        let bound = soundness_bound(beta, trace.m, trace.epsilon, trace.delta)?;
        (bound, trace.max_energy >= bound - SLACK)
    } else {
        (0.0, true)
    };
    Ok(SoundnessReport {
        beta,
        epsilon: trace.epsilon,
        delta: trace.delta,
        m: trace.m,
        bound,
        max_energy: trace.max_energy,
        applicable,
        ok,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaSuite {
    pub trace: PathTrace,
    pub small_projection: SmallProjectionReport,
    pub traversal_bound: Option<TraversalBoundReport>,
    pub cross_term: CrossTermReport,
    /// Dense λ_min(A+B) when certifiable at desk scale.
    pub beta_certificate: Option<f64>,
    pub soundness: Option<SoundnessReport>,
    pub ok: bool,
}

/// Run every inequality check along one path of a compiled instance.
pub fn verify_lemmas(inst: &CgsconInstance, path: &TraversalPath) -> Result<LemmaSuite> {
    let regs = inst.registers.ok_or_else(|| {
        Error::LayoutMismatch("instance lacks the marker/guard register layout".into())
    })?;
    let source = inst.source.as_ref().ok_or_else(|| {
        Error::LayoutMismatch("instance lacks its two-layer source".into())
    })?;
    let eval = evaluate_path(inst, path, Retention::Retain)?;
    let states = eval.states.as_ref().expect("retention forced");
    let quad = SubspaceQuad::for_split_registers(&regs, inst.num_qubits())?;
    let k = inst.k_unitaries;

    // Leakage bound over the whole sequence (including the start state).
    let mut zeta = 0.0f64;
    for psi in states {
        zeta = zeta.max(quad.penalty_overlap(psi)?);
    }
    let small_projection = check_small_projection(&quad.uv, states, zeta, k)?;

    let traversal_bound = if states.len() >= 2 {
        Some(check_modified_traversal(
            &quad,
            states,
            &inst.target_state()?,
            eval.trace.epsilon,
            eval.trace.delta,
            k,
        )?)
    } else {
        None
    };

    let cross_term = e_term_bound_check(states, source.a(), source.b(), &regs, eval.trace.delta)?;

    let beta_certificate = if source.num_qubits() <= crate::spectra::DENSE_QUBIT_CAP {
        let mut terms: Vec<_> = source.a().terms().cloned().collect();
        terms.extend(source.b().terms().cloned());
        let sum = LayeredHamiltonian::singleton_layers(source.num_qubits(), terms)?;
        Some(crate::spectra::ground_energy_dense(&sum)?.value)
    } else {
        None
    };
    let soundness = match beta_certificate {
        Some(beta) if beta > 0.0 && beta <= 2.0 && eval.trace.m >= 1 => {
            Some(check_soundness(&eval.trace, beta)?)
        }
        _ => None,
    };

    let ok = small_projection.ok
        && traversal_bound.as_ref().is_none_or(|r| r.ok || !r.pre_ok)
        && cross_term.ok
        && soundness.as_ref().is_none_or(|r| r.ok);
    Ok(LemmaSuite {
        trace: eval.trace,
        small_projection,
        traversal_bound,
        cross_term,
        beta_certificate,
        soundness,
        ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Circuit, Gate};
    use crate::probe;
    use crate::reductions::cgscon::{completeness_path, from_two_layer};
    use crate::rng::stream;
    use rand::Rng;

    fn yes_instance(
        n: usize,
        rng: &mut impl Rng,
    ) -> (CgsconInstance, Circuit) {
        let (t, prep) = probe::shared_ground_two_layer(n, 3, 1e-14, 1.0, rng).unwrap();
        (from_two_layer(&t, 32).unwrap(), prep)
    }

    #[test]
    fn k_orthogonality_of_repeated_basis_states() {
        let z = StateVector::basis(3, 0).unwrap();
        let o = StateVector::basis(3, 7).unwrap();
        let r2 = check_k_orthogonal(&z, &o, 2).unwrap();
        assert!(r2.orthogonal);
        assert!(r2.worst_norm < 1e-15);
        let r3 = check_k_orthogonal(&z, &o, 3).unwrap();
        assert!(!r3.orthogonal);
        assert_eq!(r3.violating_subset, Some(vec![0, 1, 2]));
        // ψ = φ is never k-orthogonal (identity unitary has overlap 1).
        let mut rng = stream(91, "traversal-test", 0);
        let psi = probe::random_state(3, &mut rng);
        let r = check_k_orthogonal(&psi, &psi, 2).unwrap();
        assert!(!r.orthogonal);
    }

    #[test]
    fn sampled_orthogonality_agrees_with_exhaustive() {
        let z = StateVector::basis(3, 0).unwrap();
        let o = StateVector::basis(3, 7).unwrap();
        let worst = sampled_state_orthogonality(&z, &o, 2, 500, 5).unwrap();
        assert!(worst < 1e-15);
        let mut rng = stream(92, "traversal-test", 1);
        let a = probe::random_state(3, &mut rng);
        let b = probe::random_state(3, &mut rng);
        let exhaustive = check_k_orthogonal(&a, &b, 2).unwrap();
        let sampled = sampled_state_orthogonality(&a, &b, 2, 500, 6).unwrap();
        assert!(!exhaustive.orthogonal);
        assert!(sampled > ORTHO_TOL);
    }

    #[test]
    fn evaluate_completeness_path_on_yes_instance() {
        let mut rng = stream(93, "traversal-test", 2);
        let (inst, prep) = yes_instance(3, &mut rng);
        let path = completeness_path(&inst, &prep).unwrap();
        let eval = evaluate_path(&inst, &path, Retention::Auto).unwrap();
        assert!(eval.trace.epsilon <= 1e-10);
        let alpha = inst.source.as_ref().unwrap().alpha();
        assert!(eval.trace.max_energy <= alpha / 2.0 + 1e-10);
        assert!(eval.trace.verdict, "completeness path must be a YES witness");
        assert!(eval.states.is_some());
    }

    #[test]
    fn empty_path_uses_start_energy() {
        let mut rng = stream(94, "traversal-test", 3);
        let (mut inst, _) = yes_instance(2, &mut rng);
        inst.prep_target = inst.prep_start.clone();
        let path = TraversalPath::new(inst.num_qubits(), vec![]).unwrap();
        let eval = evaluate_path(&inst, &path, Retention::Auto).unwrap();
        assert_eq!(eval.trace.epsilon, 0.0);
        assert_eq!(eval.trace.max_energy, eval.trace.start_energy);
    }

    #[test]
    fn random_paths_pay_at_least_delta_squared() {
        let mut rng = stream(95, "traversal-test", 4);
        let (inst, _) = yes_instance(2, &mut rng);
        for _ in 0..50 {
            let path = probe::random_path(inst.num_qubits(), 10, &mut rng).unwrap();
            let eval = evaluate_path(&inst, &path, Retention::Discard).unwrap();
            assert!(
                eval.trace.max_energy >= eval.trace.delta.powi(2) - SLACK,
                "max {} < δ² {}",
                eval.trace.max_energy,
                eval.trace.delta.powi(2)
            );
        }
    }

    #[test]
    fn budget_is_enforced() {
        let mut rng = stream(96, "traversal-test", 5);
        let (mut inst, _) = yes_instance(2, &mut rng);
        inst.m_max = 3;
        let path = probe::random_path(inst.num_qubits(), 4, &mut rng).unwrap();
        assert!(matches!(
            evaluate_path(&inst, &path, Retention::Auto),
            Err(Error::BudgetExceeded { len: 4, m_max: 3 })
        ));
    }

    #[test]
    fn small_projection_with_exact_subspace_preservation() {
        // Gates acting only on the data register keep the guard at |000⟩:
        // ζ = 0 and ‖P_V ψᵢ‖ stays exactly 0.
        let mut rng = stream(97, "traversal-test", 6);
        let (inst, _) = yes_instance(2, &mut rng);
        let regs = inst.registers.unwrap();
        let quad = SubspaceQuad::for_split_registers(&regs, inst.num_qubits()).unwrap();
        let mut gates = Vec::new();
        for _ in 0..4 {
            gates.push(Gate::raw2(0, 1, crate::rng::haar_unitary(4, &mut rng)).unwrap());
        }
        let path = TraversalPath::new(inst.num_qubits(), gates).unwrap();
        let eval = evaluate_path(&inst, &path, Retention::Retain).unwrap();
        let states = eval.states.unwrap();
        let report = check_small_projection(&quad.uv, &states, 0.0, 2).unwrap();
        assert!(report.ok, "first violation {:?}", report.first_violation);
        for step in &report.steps {
            assert!(step.t_overlap <= SLACK);
        }
    }

    #[test]
    fn small_projection_flags_gate_locality_above_certified_k() {
        // A 3-local move breaks the 2-orthogonality hypothesis; certifying
        // at k = 3 must fail for the 000/111 pair.
        let mut rng = stream(98, "traversal-test", 7);
        let (inst, _) = yes_instance(2, &mut rng);
        let regs = inst.registers.unwrap();
        let quad = SubspaceQuad::for_split_registers(&regs, inst.num_qubits()).unwrap();
        let start = inst.start_state().unwrap();
        let report = check_small_projection(&quad.uv, &[start], 0.0, 3).unwrap();
        assert!(!report.ortho.ok, "3-local certification must fail");
        assert!(!report.ok);
        assert!(report.ortho.worst > ORTHO_TOL);
    }

    #[test]
    fn small_projection_holds_with_measured_zeta() {
        let mut rng = stream(99, "traversal-test", 8);
        let (inst, prep) = yes_instance(2, &mut rng);
        let regs = inst.registers.unwrap();
        let quad = SubspaceQuad::for_split_registers(&regs, inst.num_qubits()).unwrap();
        for trial in 0..25 {
            let path = if trial % 2 == 0 {
                probe::random_path(inst.num_qubits(), 8, &mut rng).unwrap()
            } else {
                probe::perturbed_completeness_path(&inst, &prep, 0.05, &mut rng).unwrap()
            };
            let eval = evaluate_path(&inst, &path, Retention::Retain).unwrap();
            let states = eval.states.unwrap();
            let mut zeta = 0.0f64;
            for s in &states {
                zeta = zeta.max(quad.penalty_overlap(s).unwrap());
            }
            let report = check_small_projection(&quad.uv, &states, zeta, 2).unwrap();
            assert!(report.ok, "trial {trial}: violation {:?}", report.first_violation);
        }
    }

    #[test]
    fn traversal_bound_on_completeness_path() {
        let mut rng = stream(100, "traversal-test", 9);
        let (inst, prep) = yes_instance(2, &mut rng);
        let regs = inst.registers.unwrap();
        let quad = SubspaceQuad::for_split_registers(&regs, inst.num_qubits()).unwrap();
        let path = completeness_path(&inst, &prep).unwrap();
        let eval = evaluate_path(&inst, &path, Retention::Retain).unwrap();
        let states = eval.states.unwrap();
        let report = check_modified_traversal(
            &quad,
            &states,
            &inst.target_state().unwrap(),
            eval.trace.epsilon,
            eval.trace.delta,
            2,
        )
        .unwrap();
        assert!(report.pre_ok);
        assert!(report.ok, "lhs {} rhs {}", report.lhs, report.rhs);
        // The witness sits in the marker-flipping stretch of the path.
        let flips = prep.len() + 1..=prep.len() + 3;
        assert!(
            flips.contains(&report.witness_index),
            "witness index {} outside the flip stretch",
            report.witness_index
        );
    }

    #[test]
    fn traversal_bound_single_step_numbers() {
        // One X⊗X gate from |000⟩ toward |111⟩ on a bare 3-qubit register:
        // with U the whole space and V empty, rhs = (1−ε)² and the measured
        // ε is √2 (the states are 2-orthogonal), flagged by the ε ≤ 1
        // precondition while the raw numbers are still reported.
        let n = 3;
        let p_s = EmbeddedProjector::new(n, vec![OperatorFactor::basis_projector(vec![0, 1, 2], 0).unwrap()]).unwrap();
        let p_t = EmbeddedProjector::new(n, vec![OperatorFactor::basis_projector(vec![0, 1, 2], 7).unwrap()]).unwrap();
        let p_u = EmbeddedProjector::new(n, vec![OperatorFactor::identity(vec![0]).unwrap()]).unwrap();
        let zero = CMat::zeros(2, 2);
        let p_v = EmbeddedProjector::new(n, vec![OperatorFactor::new(vec![0], zero).unwrap()]).unwrap();
        let quad = SubspaceQuad::new(
            ProjectorPair::new(p_s, p_t).unwrap(),
            ProjectorPair::new(p_u, p_v).unwrap(),
        )
        .unwrap();
        let start = StateVector::basis(3, 0).unwrap();
        let target = StateVector::basis(3, 7).unwrap();
        let xx = Gate::raw2(
            0,
            1,
            crate::linalg::kron(&Gate::x(0).matrix().clone(), &Gate::x(0).matrix().clone()),
        )
        .unwrap();
        let stepped = xx.apply(&start).unwrap();
        let eps = target.distance(&stepped).unwrap();
        assert!((eps - 2.0f64.sqrt()).abs() < 1e-12);
        let states = vec![start, stepped];
        let report = check_modified_traversal(&quad, &states, &target, eps, 0.0, 2).unwrap();
        assert!(!report.epsilon_ok, "ε = √2 exceeds the valid range");
        assert!((report.rhs - (1.0 - eps).powi(2)).abs() < 1e-12);
        assert!((report.lhs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn traversal_bound_vacuous_at_epsilon_one() {
        let mut rng = stream(101, "traversal-test", 10);
        let (inst, _) = yes_instance(2, &mut rng);
        let regs = inst.registers.unwrap();
        let quad = SubspaceQuad::for_split_registers(&regs, inst.num_qubits()).unwrap();
        let path = probe::random_path(inst.num_qubits(), 3, &mut rng).unwrap();
        let eval = evaluate_path(&inst, &path, Retention::Retain).unwrap();
        let states = eval.states.unwrap();
        // ε = 1 claimed: rhs = −2(m+1)δ ≤ 0 ≤ lhs. Only run when the real
        // distance is within the claim.
        if eval.trace.epsilon <= 1.0 {
            let report = check_modified_traversal(
                &quad,
                &states,
                &inst.target_state().unwrap(),
                1.0,
                eval.trace.delta,
                2,
            )
            .unwrap();
            assert!(report.rhs <= 0.0);
            assert!(report.lhs >= report.rhs - SLACK);
        }
    }

    #[test]
    fn cross_term_vanishes_without_guard_excitation() {
        // States with the guard pinned to |000⟩ have no P₁/P₀₁ overlap.
        let mut rng = stream(102, "traversal-test", 11);
        let (inst, prep) = yes_instance(2, &mut rng);
        let regs = inst.registers.unwrap();
        let source = inst.source.as_ref().unwrap();
        let path = completeness_path(&inst, &prep).unwrap();
        let eval = evaluate_path(&inst, &path, Retention::Retain).unwrap();
        let states = eval.states.unwrap();
        let report =
            e_term_bound_check(&states, source.a(), source.b(), &regs, eval.trace.delta).unwrap();
        assert!(report.max_abs < 1e-12);
        assert!(report.ok);
    }

    #[test]
    fn cross_term_bound_on_random_paths() {
        let mut rng = stream(103, "traversal-test", 12);
        let (inst, _) = yes_instance(2, &mut rng);
        let regs = inst.registers.unwrap();
        let source = inst.source.as_ref().unwrap();
        for _ in 0..50 {
            let path = probe::random_path(inst.num_qubits(), 6, &mut rng).unwrap();
            let eval = evaluate_path(&inst, &path, Retention::Retain).unwrap();
            let states = eval.states.unwrap();
            let report =
                e_term_bound_check(&states, source.a(), source.b(), &regs, eval.trace.delta)
                    .unwrap();
            assert!(report.ok, "max |E| {} > bound {}", report.max_abs, report.bound);
        }
    }

    #[test]
    fn soundness_bound_formula_examples() {
        // δ = 0 selects the second branch.
        let b = soundness_bound(1.0, 2, 0.25, 0.0).unwrap();
        assert!((b - 0.5 * (0.75f64 / 2.0).powi(2)).abs() < 1e-15);
        // β = 2, m = 1, ε = ½, δ = 0 → 0.25.
        let b = soundness_bound(2.0, 1, 0.5, 0.0).unwrap();
        assert!((b - 0.25).abs() < 1e-15);
        // Parameter validation.
        assert!(soundness_bound(0.0, 1, 0.0, 0.0).is_err());
        assert!(soundness_bound(1.0, 0, 0.0, 0.0).is_err());
        assert!(soundness_bound(1.0, 1, 1.5, 0.0).is_err());
    }

    #[test]
    fn soundness_holds_on_certified_no_instance() {
        let mut rng = stream(104, "traversal-test", 13);
        let t = probe::certified_no_two_layer(1, 1.0, false).unwrap();
        let inst = from_two_layer(&t, 64).unwrap();
        // β certified by direct densification.
        let mut terms: Vec<_> = t.a().terms().cloned().collect();
        terms.extend(t.b().terms().cloned());
        let sum = LayeredHamiltonian::singleton_layers(1, terms).unwrap();
        let beta = crate::spectra::ground_energy_dense(&sum).unwrap().value;
        assert!((beta - 1.0).abs() < 1e-12);
        let prep = Circuit::new(1).unwrap();
        for trial in 0..60 {
            let path = if trial % 2 == 0 {
                probe::perturbed_completeness_path(&inst, &prep, 0.08, &mut rng).unwrap()
            } else {
                probe::random_path(inst.num_qubits(), 8, &mut rng).unwrap()
            };
            let eval = evaluate_path(&inst, &path, Retention::Discard).unwrap();
            let report = check_soundness(&eval.trace, beta).unwrap();
            assert!(
                report.ok,
                "trial {trial}: max_energy {} below bound {}",
                report.max_energy, report.bound
            );
        }
    }

    #[test]
    fn lemma_suite_end_to_end() {
        let mut rng = stream(105, "traversal-test", 14);
        let (inst, prep) = yes_instance(2, &mut rng);
        let path = completeness_path(&inst, &prep).unwrap();
        let suite = verify_lemmas(&inst, &path).unwrap();
        assert!(suite.ok);
        assert!(suite.small_projection.ok);
        assert!(suite.traversal_bound.as_ref().unwrap().ok);
        assert!(suite.cross_term.ok);
        // YES instance: λ_min(A+B) = 0, no soundness certificate applies.
        assert!(suite.beta_certificate.unwrap().abs() < 1e-9);
        assert!(suite.soundness.is_none());
    }
}
