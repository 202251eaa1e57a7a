//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with the measured quantities (run with `--nocapture` to see them).

use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::Rng;

use qcw_core::circuit::{Circuit, Gate};
use qcw_core::hamiltonian::{LayeredHamiltonian, LocalTerm, TwoLayerInstance};
use qcw_core::linalg::CMat;
use qcw_core::optimizer::{
    brickwork_schedule, objective_and_gradient, optimize, GradientMode, OptimizerConfig,
    ParamPath,
};
use qcw_core::probe;
use qcw_core::reductions::cgscon::{completeness_path, from_two_layer};
use qcw_core::reductions::clock::{circuit_to_clock_hamiltonian, history_state};
use qcw_core::reductions::layering::reduce_to_two_layers;
use qcw_core::rng::{haar_unitary, stream};
use qcw_core::spectra::{ground_energy_dense, ground_energy_iterative};
use qcw_core::state::{OperatorFactor, StateVector};
use qcw_core::traversal::{
    check_k_orthogonal, check_modified_traversal, check_small_projection, check_soundness,
    evaluate_path, sampled_state_orthogonality, Retention, SubspaceQuad,
};

struct Outcome {
    name: &'static str,
    detail: String,
}

impl Outcome {
    fn pass(self) {
        println!("[PASS] {}: {}", self.name, self.detail);
    }
}

macro_rules! criterion_assert {
    ($name:expr, $cond:expr, $($arg:tt)*) => {
        let holds: bool = $cond;
        if !holds {
            println!("[FAIL] {}: {}", $name, format!($($arg)*));
            panic!("criterion failed: {}", $name);
        }
    };
}

/// Random commuting layer in one of the two generator styles.
fn random_commuting_layer(
    n: usize,
    terms: usize,
    rng: &mut impl Rng,
) -> Vec<LocalTerm> {
    if rng.random::<bool>() {
        let dressing = probe::tensor_dressing(n, rng);
        probe::dressed_diagonal_layer(n, terms, 3, &dressing, rng).unwrap()
    } else {
        probe::pauli_projector_layer(n, terms, 3, rng).unwrap()
    }
}

#[test]
fn criterion_01_commutativity_of_the_construction() {
    let name = "criterion 1 (commutativity of compiled instances)";
    let mut rng = stream(2024, "acceptance-commute", 0);
    let mut worst = 0.0f64;
    for trial in 0..50 {
        let n = rng.random_range(2..=6usize);
        let a = LayeredHamiltonian::commuting(n, random_commuting_layer(n, 3, &mut rng)).unwrap();
        let b = LayeredHamiltonian::commuting(n, random_commuting_layer(n, 3, &mut rng)).unwrap();
        let t = TwoLayerInstance::new(a, b, 0.0, 1.0).unwrap();
        let inst = from_two_layer(&t, 64).unwrap();
        let report = inst.hamiltonian.check_layered().unwrap();
        let w = report.worst.map(|w| w.norm).unwrap_or(0.0);
        worst = worst.max(w);
        criterion_assert!(
            name,
            report.ok,
            "trial {trial}: worst commutator norm {w:.3e} above 1e-12"
        );
    }
    Outcome { name, detail: format!("50 instances, worst pair commutator {worst:.3e} ≤ 1e-12") }
        .pass();
}

#[test]
fn criterion_02_zero_energy_endpoints() {
    let name = "criterion 2 (zero-energy endpoint states)";
    let mut rng = stream(2024, "acceptance-endpoints", 0);
    let mut worst = 0.0f64;
    let mut count = 0usize;
    for _ in 0..20 {
        let n = rng.random_range(2..=6usize);
        let t = if rng.random::<bool>() {
            let a =
                LayeredHamiltonian::commuting(n, random_commuting_layer(n, 3, &mut rng)).unwrap();
            let b =
                LayeredHamiltonian::commuting(n, random_commuting_layer(n, 3, &mut rng)).unwrap();
            TwoLayerInstance::new(a, b, 0.0, 1.0).unwrap()
        } else {
            probe::shared_ground_two_layer(n, 3, 1e-14, 1.0, &mut rng).unwrap().0
        };
        let inst = from_two_layer(&t, 64).unwrap();
        for state in [inst.start_state().unwrap(), inst.target_state().unwrap()] {
            let e = inst.hamiltonian.energy(&state).unwrap().abs();
            worst = worst.max(e);
            count += 1;
            criterion_assert!(name, e <= 1e-10, "endpoint energy {e:.3e} above 1e-10");
        }
    }
    Outcome { name, detail: format!("{count} endpoint states, worst |energy| {worst:.3e} ≤ 1e-10") }
        .pass();
}

#[test]
fn criterion_03_completeness_path() {
    let name = "criterion 3 (completeness path)";
    let mut rng = stream(2024, "acceptance-completeness", 0);
    let mut worst_eps = 0.0f64;
    let mut worst_gap = f64::NEG_INFINITY;
    for trial in 0..20 {
        let n = rng.random_range(2..=6usize);
        let (t, prep) = probe::shared_ground_two_layer(n, 3, 1e-12, 1.0, &mut rng).unwrap();
        let inst = from_two_layer(&t, 4 * n + 16).unwrap();
        let path = completeness_path(&inst, &prep).unwrap();
        criterion_assert!(
            name,
            path.len() == 2 * prep.len() + 3,
            "trial {trial}: path length {} ≠ 2m'+3 = {}",
            path.len(),
            2 * prep.len() + 3
        );
        let psi = prep.prepare().unwrap();
        let half_sum = 0.5 * (t.a().energy(&psi).unwrap() + t.b().energy(&psi).unwrap());
        let eval = evaluate_path(&inst, &path, Retention::Discard).unwrap();
        worst_eps = worst_eps.max(eval.trace.epsilon);
        worst_gap = worst_gap.max(eval.trace.max_energy - half_sum);
        criterion_assert!(
            name,
            eval.trace.epsilon <= 1e-10,
            "trial {trial}: ε = {:.3e}",
            eval.trace.epsilon
        );
        criterion_assert!(
            name,
            eval.trace.max_energy <= half_sum + 1e-10,
            "trial {trial}: max energy {:.3e} above ½(⟨A⟩+⟨B⟩) = {half_sum:.3e}",
            eval.trace.max_energy
        );
        criterion_assert!(
            name,
            eval.trace.max_energy <= t.alpha() / 2.0 + 1e-10,
            "trial {trial}: max energy {:.3e} above α/2",
            eval.trace.max_energy
        );
    }
    // Split-ground variant with a genuinely nonzero measured energy: the
    // per-path bound ½(⟨A⟩+⟨B⟩) is tight during the marker flips.
    for _ in 0..5 {
        let n = rng.random_range(2..=4usize);
        let (t, prep, achieved) = probe::split_ground_two_layer(n, 3, &mut rng).unwrap();
        let tiny = TwoLayerInstance::new(t.a().clone(), t.b().clone(), 1e-14, 1.0).unwrap();
        let inst = from_two_layer(&tiny, 4 * n + 16).unwrap();
        let path = completeness_path(&inst, &prep).unwrap();
        let eval = evaluate_path(&inst, &path, Retention::Discard).unwrap();
        criterion_assert!(
            name,
            eval.trace.epsilon <= 1e-10,
            "split variant: ε = {:.3e}",
            eval.trace.epsilon
        );
        criterion_assert!(
            name,
            eval.trace.max_energy <= achieved / 2.0 + 1e-10,
            "split variant: max energy {:.3e} above ½⟨A+B⟩ = {:.3e}",
            eval.trace.max_energy,
            achieved / 2.0
        );
    }
    Outcome {
        name,
        detail: format!(
            "25 paths, worst ε {worst_eps:.3e} ≤ 1e-10, worst excess over ½(⟨A⟩+⟨B⟩) {worst_gap:.3e} ≤ 1e-10"
        ),
    }
    .pass();
}

/// Four 5-local PSD terms on 5 qubits: k = 5, l = 4, κ = 2¹⁰.
fn five_local_degree_four(rng: &mut impl Rng) -> LayeredHamiltonian {
    let dim = 32;
    let mut terms = Vec::new();
    for _ in 0..4 {
        let u = haar_unitary(dim, rng);
        let mut d = CMat::zeros(dim, dim);
        for i in 0..dim {
            d[(i, i)] = Complex64::new(rng.random::<f64>(), 0.0);
        }
        let m = &u * d * u.adjoint();
        terms.push(
            LocalTerm::new(1.0, vec![OperatorFactor::new(vec![0, 1, 2, 3, 4], m).unwrap()])
                .unwrap(),
        );
    }
    LayeredHamiltonian::singleton_layers(5, terms).unwrap()
}

#[test]
fn criterion_04_layering_completeness_identity() {
    let name = "criterion 4 (layering completeness identity, κ = 2^10)";
    let mut rng = stream(2024, "acceptance-layering", 0);
    let h = five_local_degree_four(&mut rng);
    let red = reduce_to_two_layers(&h, 1.0, 0.0, 1.0).unwrap();
    criterion_assert!(name, red.degree == 4, "l = {} ≠ 4", red.degree);
    criterion_assert!(name, red.kappa == 1024.0, "κ = {} ≠ 2^10", red.kappa);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let psi = probe::random_state(5, &mut rng);
        let ext = red.extend(&psi).unwrap();
        let lhs = red.g_plus_r_energy(&ext).unwrap();
        let rhs = h.energy(&psi).unwrap() / red.kappa;
        let err = (lhs - rhs).abs();
        worst = worst.max(err);
        criterion_assert!(name, err <= 1e-10, "identity error {err:.3e} above 1e-10");
    }
    Outcome { name, detail: format!("100 states, worst |⟨G+R⟩ − ⟨H⟩/κ| = {worst:.3e} ≤ 1e-10") }
        .pass();
}

#[test]
fn criterion_05_layering_soundness_bound() {
    let name = "criterion 5 (layering soundness bound)";
    // Two hand-built Hamiltonians with certified λ_min = s > 0.
    let mut cases: Vec<(LayeredHamiltonian, f64)> = Vec::new();
    // 1 qubit, 4 terms: H = 2I.
    let mut terms = Vec::new();
    for i in 0..4 {
        terms.push(
            LocalTerm::new(1.0, vec![OperatorFactor::basis_projector(vec![0], i % 2).unwrap()])
                .unwrap(),
        );
    }
    cases.push((LayeredHamiltonian::singleton_layers(1, terms).unwrap(), 2.0));
    // 2 qubits, 4 terms: H = I⊗I + |Φ⟩⟨Φ|-style PSD sum with λ_min
    // certified densely below.
    let mut terms = Vec::new();
    for q in 0..2usize {
        for b in 0..2usize {
            terms.push(
                LocalTerm::new(
                    1.0,
                    vec![OperatorFactor::basis_projector(vec![q], b).unwrap()],
                )
                .unwrap(),
            );
        }
    }
    cases.push((LayeredHamiltonian::singleton_layers(2, terms).unwrap(), 2.0));

    let mut details = Vec::new();
    for (idx, (h, _)) in cases.iter().enumerate() {
        let s = ground_energy_dense(h).unwrap().value;
        let b = 2.0;
        let m = h.term_count() as f64;
        let red = reduce_to_two_layers(h, b, (s - m.powf(-b)).max(0.0), s).unwrap();
        let mut sum_terms: Vec<LocalTerm> = red.a().terms().cloned().collect();
        sum_terms.extend(red.b().terms().cloned());
        let total = LayeredHamiltonian::singleton_layers(red.num_qubits(), sum_terms).unwrap();
        let lam = ground_energy_dense(&total).unwrap().value;
        let ground = red.scale * lam;
        let bound = s / red.kappa - m.powf(-(b + 1.0));
        criterion_assert!(
            name,
            ground >= bound - 1e-9,
            "case {idx}: λ_min(G+R) = {ground:.6e} below s/κ − 1/m^(b+1) = {bound:.6e}"
        );
        criterion_assert!(name, bound > 0.0, "case {idx}: vacuous bound {bound:.3e}");
        details.push(format!("case {idx}: λ_min(G+R) = {ground:.4e} ≥ {bound:.4e}"));
    }
    Outcome { name, detail: details.join("; ") }.pass();
}

#[test]
fn criterion_06_clock_hamiltonian_interface() {
    let name = "criterion 6 (clock construction accept/reject energies)";
    let mut rng = stream(2024, "acceptance-clock", 0);

    // Always-accepting circuits (m ≤ 4), with and without witnesses.
    let mut worst_accept = 0.0f64;
    {
        let circ = Circuit::from_gates(1, vec![Gate::x(0)]).unwrap();
        let h = circuit_to_clock_hamiltonian(&circ, 0, &BTreeSet::new()).unwrap();
        let hist = history_state(&circ, &StateVector::zero(1).unwrap()).unwrap();
        let e = h.hamiltonian().energy(&hist).unwrap().abs();
        worst_accept = worst_accept.max(e);
        criterion_assert!(name, e <= 1e-10, "1-gate accept history energy {e:.3e}");
    }
    {
        // Witness-driven acceptance: CNOT from witness to output then a
        // random diagonal-phase gate; witness |1⟩ accepts with probability 1.
        let u = haar_unitary(2, &mut rng);
        let circ =
            Circuit::from_gates(2, vec![Gate::cnot(1, 0), Gate::raw1(1, u).unwrap()]).unwrap();
        let witness: BTreeSet<usize> = [1].into_iter().collect();
        let h = circuit_to_clock_hamiltonian(&circ, 0, &witness).unwrap();
        let input = h.embed_witness(&StateVector::basis(1, 1).unwrap()).unwrap();
        let hist = history_state(&circ, &input).unwrap();
        let e = h.hamiltonian().energy(&hist).unwrap().abs();
        worst_accept = worst_accept.max(e);
        criterion_assert!(name, e <= 1e-10, "witnessed accept history energy {e:.3e}");
        let ground = ground_energy_dense(h.hamiltonian()).unwrap().value;
        criterion_assert!(name, ground.abs() <= 1e-10, "accepting ground energy {ground:.3e}");
    }
    {
        // Four-gate always-accepting circuit.
        let circ = Circuit::from_gates(
            2,
            vec![Gate::h(1), Gate::x(0), Gate::h(1), Gate::cnot(0, 1)],
        )
        .unwrap();
        let h = circuit_to_clock_hamiltonian(&circ, 0, &BTreeSet::new()).unwrap();
        let hist = history_state(&circ, &StateVector::zero(2).unwrap()).unwrap();
        let e = h.hamiltonian().energy(&hist).unwrap().abs();
        worst_accept = worst_accept.max(e);
        criterion_assert!(name, e <= 1e-10, "4-gate accept history energy {e:.3e}");
    }

    // Always-rejecting circuits: output pinned to |0⟩.
    let mut reject_values = Vec::new();
    for gates in [
        vec![Gate::raw1(0, qcw_core::linalg::identity(2)).unwrap()],
        vec![Gate::z(0), Gate::z(0)],
    ] {
        let circ = Circuit::from_gates(1, gates).unwrap();
        let h = circuit_to_clock_hamiltonian(&circ, 0, &BTreeSet::new()).unwrap();
        let ground = ground_energy_dense(h.hamiltonian()).unwrap().value;
        criterion_assert!(name, ground >= 1e-3, "rejecting ground energy {ground:.3e} below 1e-3");
        reject_values.push(format!("{ground:.4e}"));
    }
    Outcome {
        name,
        detail: format!(
            "accepting energies ≤ {worst_accept:.3e} (≤ 1e-10); rejecting ground energies {} (≥ 1e-3)",
            reject_values.join(", ")
        ),
    }
    .pass();
}

#[test]
fn criterion_07_lemma_inequality_suites() {
    let name = "criterion 7 (small-projection and traversal inequality suites)";
    let mut rng = stream(2024, "acceptance-lemmas", 0);
    let (t, prep) = probe::shared_ground_two_layer(2, 3, 1e-14, 1.0, &mut rng).unwrap();
    let inst = from_two_layer(&t, 64).unwrap();
    let regs = inst.registers.unwrap();
    let quad = SubspaceQuad::for_split_registers(&regs, inst.num_qubits()).unwrap();
    let target = inst.target_state().unwrap();

    // Small-projection suite: any state sequence qualifies once ζ is
    // measured, so mix fully random and near-witness paths.
    let mut small_checked = 0usize;
    for trial in 0..500 {
        let path = if trial % 2 == 0 {
            probe::random_path(inst.num_qubits(), 3 + trial % 8, &mut rng).unwrap()
        } else {
            probe::perturbed_completeness_path(&inst, &prep, 0.02 + 0.01 * (trial % 5) as f64, &mut rng)
                .unwrap()
        };
        let eval = evaluate_path(&inst, &path, Retention::Retain).unwrap();
        let states = eval.states.unwrap();
        let mut zeta = 0.0f64;
        for s in &states {
            zeta = zeta.max(quad.penalty_overlap(s).unwrap());
        }
        let report = check_small_projection(&quad.uv, &states, zeta, 2).unwrap();
        criterion_assert!(
            name,
            report.ok,
            "small-projection trial {trial}: violation at step {:?}",
            report.first_violation
        );
        small_checked += 1;
    }

    // Traversal-bound suite: perturbed witness paths keep ε ≤ 1 so the
    // preconditions hold.
    let mut traversal_checked = 0usize;
    let mut trial = 0usize;
    while traversal_checked < 500 {
        trial += 1;
        let noise = 0.01 + 0.01 * (trial % 6) as f64;
        let path = probe::perturbed_completeness_path(&inst, &prep, noise, &mut rng).unwrap();
        let eval = evaluate_path(&inst, &path, Retention::Retain).unwrap();
        if eval.trace.epsilon > 1.0 {
            continue;
        }
        let states = eval.states.unwrap();
        let report = check_modified_traversal(
            &quad,
            &states,
            &target,
            eval.trace.epsilon,
            eval.trace.delta,
            2,
        )
        .unwrap();
        criterion_assert!(
            name,
            report.pre_ok,
            "traversal trial {trial}: preconditions unexpectedly failed"
        );
        criterion_assert!(
            name,
            report.ok,
            "traversal trial {trial}: lhs {:.6e} below rhs {:.6e}",
            report.lhs,
            report.rhs
        );
        traversal_checked += 1;
    }
    Outcome {
        name,
        detail: format!(
            "{small_checked} small-projection and {traversal_checked} traversal-bound checks, zero violations"
        ),
    }
    .pass();
}

#[test]
fn criterion_08_soundness_falsification_probe() {
    let name = "criterion 8 (soundness-bound falsification probe)";
    let mut rng = stream(2024, "acceptance-soundness", 0);

    let instances = vec![
        (probe::certified_no_two_layer(1, 1.0, false).unwrap(), Circuit::new(1).unwrap()),
        (probe::certified_no_two_layer(2, 0.8, true).unwrap(), Circuit::new(2).unwrap()),
    ];

    let mut paths_checked = 0usize;
    let mut qualifying = 0usize;
    let mut optimizer_runs = 0usize;
    let mut worst_margin = f64::INFINITY;

    for (t, prep) in &instances {
        let inst = from_two_layer(t, 64).unwrap();
        // Certify A + B ⪰ βI densely.
        let mut terms: Vec<LocalTerm> = t.a().terms().cloned().collect();
        terms.extend(t.b().terms().cloned());
        let sum = LayeredHamiltonian::singleton_layers(t.num_qubits(), terms).unwrap();
        let beta = ground_energy_dense(&sum).unwrap().value;
        criterion_assert!(name, beta > 0.0, "certificate failed: λ_min(A+B) = {beta:.3e}");

        // Random paths biased toward the target so ε ≤ ½ occurs often.
        for trial in 0..260 {
            let path = match trial % 3 {
                0 => probe::perturbed_completeness_path(&inst, prep, 0.02 + 0.01 * (trial % 4) as f64, &mut rng)
                    .unwrap(),
                1 => probe::perturbed_completeness_path(&inst, prep, 0.08, &mut rng).unwrap(),
                _ => probe::random_path(inst.num_qubits(), 4 + trial % 6, &mut rng).unwrap(),
            };
            let eval = evaluate_path(&inst, &path, Retention::Discard).unwrap();
            paths_checked += 1;
            if eval.trace.epsilon <= 0.5 {
                qualifying += 1;
                let report = check_soundness(&eval.trace, beta).unwrap();
                worst_margin = worst_margin.min(report.max_energy - report.bound);
                criterion_assert!(
                    name,
                    report.ok,
                    "path trial {trial}: max_energy {:.6e} below bound {:.6e}",
                    report.max_energy,
                    report.bound
                );
            }
        }

        // Optimizer-produced paths.
        for seed in 0..10u64 {
            let cfg = OptimizerConfig {
                restarts: 2,
                max_steps: 60,
                path_length: 5 + (seed as usize % 3),
                seed,
                ..Default::default()
            };
            let out = optimize(&inst, &cfg, None).unwrap();
            optimizer_runs += 1;
            if out.trace.epsilon <= 0.5 {
                qualifying += 1;
                let report = check_soundness(&out.trace, beta).unwrap();
                worst_margin = worst_margin.min(report.max_energy - report.bound);
                criterion_assert!(
                    name,
                    report.ok,
                    "optimizer seed {seed}: max_energy {:.6e} below bound {:.6e}",
                    report.max_energy,
                    report.bound
                );
            }
        }
    }
    criterion_assert!(name, paths_checked >= 500, "only {paths_checked} paths probed");
    criterion_assert!(name, optimizer_runs >= 20, "only {optimizer_runs} optimizer runs");
    criterion_assert!(
        name,
        qualifying >= 250,
        "only {qualifying} probes met the ε ≤ ½ hypothesis"
    );
    Outcome {
        name,
        detail: format!(
            "{paths_checked} paths + {optimizer_runs} optimizer runs, {qualifying} with ε ≤ ½, \
             min margin over bound {worst_margin:.3e} ≥ −1e-9"
        ),
    }
    .pass();
}

#[test]
fn criterion_09_k_orthogonality_oracle() {
    let name = "criterion 9 (k-orthogonality oracle vs sampling)";
    let z = StateVector::basis(3, 0).unwrap();
    let o = StateVector::basis(3, 7).unwrap();
    let r2 = check_k_orthogonal(&z, &o, 2).unwrap();
    let r3 = check_k_orthogonal(&z, &o, 3).unwrap();
    criterion_assert!(name, r2.orthogonal, "|000⟩/|111⟩ must be 2-orthogonal");
    criterion_assert!(name, !r3.orthogonal, "|000⟩/|111⟩ must not be 3-orthogonal");

    let mut rng = stream(2024, "acceptance-ortho", 0);
    let mut agreements = 0usize;
    for pair_idx in 0..100 {
        let n = rng.random_range(3..=4usize);
        // Mix generic pairs with embedded 2-orthogonal pairs.
        let (a, b) = if pair_idx % 5 == 0 {
            (
                StateVector::basis(n, 0).unwrap(),
                StateVector::basis(n, 7).unwrap(),
            )
        } else {
            (probe::random_state(n, &mut rng), probe::random_state(n, &mut rng))
        };
        let exhaustive = check_k_orthogonal(&a, &b, 2).unwrap();
        let sampled = sampled_state_orthogonality(&a, &b, 2, 10_000, 77 + pair_idx as u64).unwrap();
        let sampled_verdict = sampled <= 1e-10;
        criterion_assert!(
            name,
            exhaustive.orthogonal == sampled_verdict,
            "pair {pair_idx}: exhaustive {} vs sampled {} (max overlap {sampled:.3e})",
            exhaustive.orthogonal,
            sampled_verdict
        );
        agreements += 1;
    }
    Outcome {
        name,
        detail: format!(
            "basis-pair verdicts exact; exhaustive and 10^4-sample criteria agree on {agreements}/100 pairs"
        ),
    }
    .pass();
}

#[test]
fn criterion_10_eigensolver_oracle_equivalence() {
    let name = "criterion 10 (iterative vs dense ground energies)";
    let mut rng = stream(2024, "acceptance-eigen", 0);
    let mut worst = 0.0f64;
    for trial in 0..50 {
        // Mostly small registers with a few at the cap.
        let n = match trial {
            0..=29 => rng.random_range(3..=7usize),
            30..=44 => rng.random_range(8..=9usize),
            _ => 10,
        };
        let terms = rng.random_range(2..=5usize);
        let h = probe::random_psd_hamiltonian(n, terms, 3, &mut rng).unwrap();
        let dense = ground_energy_dense(&h).unwrap();
        let iter = ground_energy_iterative(&h, 1e-10, 500, 9000 + trial as u64).unwrap();
        let diff = (dense.value - iter.value).abs();
        worst = worst.max(diff);
        criterion_assert!(
            name,
            iter.converged,
            "trial {trial} (n = {n}): Lanczos unconverged after {} iterations",
            iter.iterations
        );
        criterion_assert!(
            name,
            diff <= 1e-7,
            "trial {trial} (n = {n}): dense {:.9e} vs iterative {:.9e}",
            dense.value,
            iter.value
        );
    }
    Outcome { name, detail: format!("50 instances ≤ 10 qubits, worst disagreement {worst:.3e} ≤ 1e-7") }
        .pass();
}

#[test]
fn criterion_11_gradient_check() {
    let name = "criterion 11 (analytic vs finite-difference gradients)";
    let mut rng = stream(2024, "acceptance-grad", 0);
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let inst = if trial % 2 == 0 {
            let (t, _) = probe::shared_ground_two_layer(2, 2, 1e-14, 1.0, &mut rng).unwrap();
            from_two_layer(&t, 32).unwrap()
        } else {
            let t = probe::certified_no_two_layer(1, 1.0, false).unwrap();
            from_two_layer(&t, 32).unwrap()
        };
        let m = 2 + trial % 3;
        let schedule = brickwork_schedule(inst.num_qubits(), m);
        let mut p = ParamPath::identity(inst.num_qubits(), &schedule);
        for g in &mut p.gates {
            for t in g.theta.iter_mut() {
                *t = 0.5 * qcw_core::rng::complex_gaussian(&mut rng).re;
            }
        }
        let base = OptimizerConfig { path_length: m, ..Default::default() };
        let analytic_cfg =
            OptimizerConfig { gradient: GradientMode::Analytic, ..base.clone() };
        let fd_cfg = OptimizerConfig {
            gradient: GradientMode::FiniteDifference { h: 1e-5 },
            ..base
        };
        let (_, ga) = objective_and_gradient(&inst, &p, &analytic_cfg).unwrap();
        let (_, gf) = objective_and_gradient(&inst, &p, &fd_cfg).unwrap();
        let diff: f64 =
            ga.iter().zip(&gf).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let scale: f64 = ga
            .iter()
            .map(|a| a * a)
            .sum::<f64>()
            .sqrt()
            .max(gf.iter().map(|a| a * a).sum::<f64>().sqrt())
            .max(1e-8);
        let rel = diff / scale;
        worst = worst.max(rel);
        criterion_assert!(name, rel <= 1e-4, "trial {trial}: relative error {rel:.3e}");
    }
    Outcome { name, detail: format!("100 configurations, worst relative error {worst:.3e} ≤ 1e-4") }
        .pass();
}
