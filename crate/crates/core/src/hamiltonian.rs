//! Local Hamiltonians as layered sums of tensor-product terms, with the
//! static checks the constructions rely on: positive semidefiniteness, unit
//! term norm, locality, per-qubit degree, and pairwise commutation.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::state::{self, OperatorFactor, StateVector};

/// Intra-layer commutator norms above this fail `check_layered`.
pub const COMMUTE_TOL: f64 = 1e-12;
/// Smallest eigenvalue below -PSD_TOL fails the PSD certificate.
pub const PSD_TOL: f64 = 1e-10;
/// Slack on the unit-norm bound for term operator norms.
pub const NORM_TOL: f64 = 1e-9;
/// Default cap on the dense region used by commutator evaluation.
pub const COMMUTATOR_REGION_CAP: usize = 12;
/// Factors within this Frobenius distance of the identity are degree-neutral.
pub const IDENTITY_TOL: f64 = 1e-12;

/// One positive-semidefinite term: a coefficient times a product of dense
/// factors on pairwise-disjoint qubit supports.
#[derive(Debug, Clone)]
pub struct LocalTerm {
    coefficient: f64,
    factors: Vec<OperatorFactor>,
}

/// How a term's PSD certificate was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsdRoute {
    /// Every factor is individually PSD.
    PerFactor,
    /// Certified by densifying the term on its full support.
    FullSupport,
}

#[derive(Debug, Clone)]
pub struct TermCertificate {
    pub psd: PsdRoute,
    pub norm: f64,
}

impl LocalTerm {
    pub fn new(coefficient: f64, factors: Vec<OperatorFactor>) -> Result<Self> {
        if !coefficient.is_finite() || coefficient < 0.0 {
            return Err(Error::ParamRange(format!(
                "term coefficient must be a nonnegative real, got {coefficient}"
            )));
        }
        if factors.is_empty() {
            return Err(Error::InvalidSupport("term needs at least one factor".into()));
        }
        let mut seen: Vec<usize> = Vec::new();
        for f in &factors {
            for &q in f.support() {
                if seen.contains(&q) {
                    return Err(Error::InvalidSupport(format!(
                        "factor supports overlap on qubit {q}"
                    )));
                }
                seen.push(q);
            }
        }
        Ok(LocalTerm { coefficient, factors })
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn factors(&self) -> &[OperatorFactor] {
        &self.factors
    }

    /// Union of factor supports, sorted.
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.factors.iter().flat_map(|f| f.support().iter().copied()).collect();
        s.sort_unstable();
        s
    }

    /// Support excluding factors that are the identity within `IDENTITY_TOL`.
    pub fn nontrivial_support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self
            .factors
            .iter()
            .filter(|f| !f.is_identity(IDENTITY_TOL))
            .flat_map(|f| f.support().iter().copied())
            .collect();
        s.sort_unstable();
        s
    }

    pub fn locality(&self) -> usize {
        self.support().len()
    }

    /// coefficient × Π ‖factor‖ — exact for tensor products.
    pub fn op_norm(&self) -> f64 {
        self.coefficient * self.factors.iter().map(|f| f.op_norm()).product::<f64>()
    }

    /// T|ψ⟩ including the coefficient.
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        let mut cur = psi.clone();
        for f in &self.factors {
            cur = cur.apply_factor(f)?;
        }
        cur.scale(Complex64::new(self.coefficient, 0.0));
        Ok(cur)
    }

    /// ⟨ψ|T|ψ⟩ (real part; the term is Hermitian by contract).
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        Ok(psi.inner(&self.apply(psi)?)?.re)
    }

    /// Verify Hermiticity of every factor, the PSD certificate, and the
    /// unit-norm bound. Returns how PSD was established plus the norm.
    pub fn validate(&self) -> Result<TermCertificate> {
        for f in &self.factors {
            if !f.is_hermitian() {
                return Err(Error::NotHermitian(linalg::hermiticity_error(f.matrix())));
            }
        }
        let norm = self.op_norm();
        if norm > 1.0 + NORM_TOL {
            return Err(Error::NormExceeded(norm));
        }
        let per_factor_psd = self
            .factors
            .iter()
            .all(|f| f.min_eigenvalue() >= -PSD_TOL);
        let psd = if per_factor_psd {
            PsdRoute::PerFactor
        } else {
            let support = self.support();
            if support.len() > COMMUTATOR_REGION_CAP {
                return Err(Error::CapExceeded {
                    what: "PSD certificate region",
                    got: support.len(),
                    cap: COMMUTATOR_REGION_CAP,
                });
            }
            let ops: Vec<(&[usize], &CMat)> =
                self.factors.iter().map(|f| (f.support(), f.matrix())).collect();
            let dense = state::dense_on_region(&support, &ops)?;
            let min = linalg::min_eig_hermitian(&dense);
            if min < -PSD_TOL {
                return Err(Error::NotPsd(min));
            }
            PsdRoute::FullSupport
        };
        Ok(TermCertificate { psd, norm })
    }
}

/// A sum of local terms grouped into layers. The layer structure is a claim
/// checked by `check_layered`, not an enforced construction invariant; the
/// trivial one-term-per-layer grouping is always valid.
#[derive(Debug, Clone)]
pub struct LayeredHamiltonian {
    num_qubits: usize,
    layers: Vec<Vec<LocalTerm>>,
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct WorstPair {
    pub layer: usize,
    pub first: usize,
    pub second: usize,
    pub norm: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CommutationReport {
    pub ok: bool,
    pub pairs_checked: usize,
    pub worst: Option<WorstPair>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct DegreeProfile {
    /// Number of terms acting nontrivially on each qubit.
    pub per_qubit: Vec<usize>,
    /// Max nontrivial term locality (k).
    pub max_locality: usize,
    /// Max per-qubit degree (l).
    pub max_degree: usize,
}

impl LayeredHamiltonian {
    pub fn new(num_qubits: usize, layers: Vec<Vec<LocalTerm>>) -> Result<Self> {
        if num_qubits == 0 || num_qubits > state::QUBIT_CAP {
            return Err(Error::RegisterSize { got: num_qubits, cap: state::QUBIT_CAP });
        }
        for layer in &layers {
            for t in layer {
                for f in t.factors() {
                    f.validate_in_register(num_qubits)?;
                }
            }
        }
        Ok(LayeredHamiltonian { num_qubits, layers })
    }

    /// Single commuting layer (the claim is checked by `check_layered`).
    pub fn commuting(num_qubits: usize, terms: Vec<LocalTerm>) -> Result<Self> {
        Self::new(num_qubits, vec![terms])
    }

    /// One layer per term: the trivial, always-valid layering for a general
    /// (possibly non-commuting) Hamiltonian.
    pub fn singleton_layers(num_qubits: usize, terms: Vec<LocalTerm>) -> Result<Self> {
        Self::new(num_qubits, terms.into_iter().map(|t| vec![t]).collect())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn layers(&self) -> &[Vec<LocalTerm>] {
        &self.layers
    }

    pub fn terms(&self) -> impl Iterator<Item = &LocalTerm> {
        self.layers.iter().flatten()
    }

    pub fn term_count(&self) -> usize {
        self.layers.iter().map(|l| l.len()).sum()
    }

    /// Regroup the same terms into different layers (values are unaffected;
    /// only commutation checks see the difference).
    pub fn regrouped(&self, layers: Vec<Vec<LocalTerm>>) -> Result<Self> {
        Self::new(self.num_qubits, layers)
    }

    /// Σ coefficient × ⟨ψ|T|ψ⟩, accumulated in fixed term order.
    pub fn energy(&self, psi: &StateVector) -> Result<f64> {
        if psi.num_qubits() != self.num_qubits {
            return Err(Error::SizeMismatch { expected: self.num_qubits, got: psi.num_qubits() });
        }
        self.energy_embedded(psi)
    }

    /// Like `energy` but permits a larger register containing the support.
    pub fn energy_embedded(&self, psi: &StateVector) -> Result<f64> {
        if psi.num_qubits() < self.num_qubits {
            return Err(Error::SizeMismatch { expected: self.num_qubits, got: psi.num_qubits() });
        }
        let mut acc = 0.0;
        for t in self.terms() {
            acc += t.expectation(psi)?;
        }
        Ok(acc)
    }

    /// H|ψ⟩ as a sum of term applications.
    pub fn matvec(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.num_qubits() != self.num_qubits {
            return Err(Error::SizeMismatch { expected: self.num_qubits, got: psi.num_qubits() });
        }
        self.matvec_embedded(psi)
    }

    /// Like `matvec` but permits a larger register containing the support.
    pub fn matvec_embedded(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.num_qubits() < self.num_qubits {
            return Err(Error::SizeMismatch { expected: self.num_qubits, got: psi.num_qubits() });
        }
        let mut acc = psi.zero_like();
        for t in self.terms() {
            acc.axpy(Complex64::ONE, &t.apply(psi)?);
        }
        Ok(acc)
    }

    /// Validate PSD + norm certificates for every term.
    pub fn validate_terms(&self) -> Result<Vec<TermCertificate>> {
        self.terms().map(|t| t.validate()).collect()
    }

    /// Check that every layer is internally commuting: all intra-layer pairs
    /// with intersecting supports have commutator norm ≤ `COMMUTE_TOL`.
    pub fn check_layered(&self) -> Result<CommutationReport> {
        let mut pairs: Vec<(usize, usize, usize)> = Vec::new();
        for (li, layer) in self.layers.iter().enumerate() {
            for i in 0..layer.len() {
                for j in (i + 1)..layer.len() {
                    pairs.push((li, i, j));
                }
            }
        }
        let norms: Vec<Result<f64>> = pairs
            .par_iter()
            .map(|&(li, i, j)| commutator_norm(&self.layers[li][i], &self.layers[li][j]))
            .collect();
        let mut worst: Option<WorstPair> = None;
        for (&(li, i, j), norm) in pairs.iter().zip(norms) {
            let norm = norm?;
            if worst.as_ref().is_none_or(|w| norm > w.norm) {
                worst = Some(WorstPair { layer: li, first: i, second: j, norm });
            }
        }
        let ok = worst.as_ref().is_none_or(|w| w.norm <= COMMUTE_TOL);
        Ok(CommutationReport { ok, pairs_checked: pairs.len(), worst })
    }

    /// Per-qubit nontrivial term counts plus the (k, l) summary.
    pub fn degree_profile(&self) -> DegreeProfile {
        let mut per_qubit = vec![0usize; self.num_qubits];
        let mut max_locality = 0usize;
        for t in self.terms() {
            let sup = t.nontrivial_support();
            max_locality = max_locality.max(sup.len());
            for q in sup {
                per_qubit[q] += 1;
            }
        }
        let max_degree = per_qubit.iter().copied().max().unwrap_or(0);
        DegreeProfile { per_qubit, max_locality, max_degree }
    }

    /// Densify on the full register (small registers only).
    pub fn dense(&self) -> Result<CMat> {
        if self.num_qubits > COMMUTATOR_REGION_CAP {
            return Err(Error::CapExceeded {
                what: "dense Hamiltonian",
                got: self.num_qubits,
                cap: COMMUTATOR_REGION_CAP,
            });
        }
        let dim = 1usize << self.num_qubits;
        let mut out = CMat::zeros(dim, dim);
        for j in 0..dim {
            let basis = StateVector::basis(self.num_qubits, j)?;
            let col = self.matvec(&basis)?;
            for (i, a) in col.amplitudes().iter().enumerate() {
                out[(i, j)] = *a;
            }
        }
        Ok(out)
    }
}

/// Operator norm of [T1, T2], computed without densifying the full union
/// support: factors outside the overlap peel off multiplicatively, connected
/// overlap components whose two products agree bit-for-bit factor out, and
/// only the irreducible remainder is densified (capped at
/// `COMMUTATOR_REGION_CAP` qubits).
pub fn commutator_norm(t1: &LocalTerm, t2: &LocalTerm) -> Result<f64> {
    commutator_norm_with_cap(t1, t2, COMMUTATOR_REGION_CAP)
}

pub fn commutator_norm_with_cap(t1: &LocalTerm, t2: &LocalTerm, cap: usize) -> Result<f64> {
    let s1 = t1.support();
    let s2 = t2.support();
    if s1.iter().all(|q| !s2.contains(q)) {
        return Ok(0.0);
    }

    // Factor interaction graph across both terms.
    struct Node<'a> {
        owner: usize,
        factor: &'a OperatorFactor,
    }
    let nodes: Vec<Node> = t1
        .factors()
        .iter()
        .map(|f| Node { owner: 0, factor: f })
        .chain(t2.factors().iter().map(|f| Node { owner: 1, factor: f }))
        .collect();
    let overlaps = |a: &OperatorFactor, b: &OperatorFactor| {
        a.support().iter().any(|q| b.support().contains(q))
    };
    let mut component = vec![usize::MAX; nodes.len()];
    let mut n_components = 0usize;
    for start in 0..nodes.len() {
        if component[start] != usize::MAX {
            continue;
        }
        let id = n_components;
        n_components += 1;
        let mut stack = vec![start];
        component[start] = id;
        while let Some(i) = stack.pop() {
            for j in 0..nodes.len() {
                if component[j] == usize::MAX && overlaps(nodes[i].factor, nodes[j].factor) {
                    component[j] = id;
                    stack.push(j);
                }
            }
        }
    }

    let mut passive_scale = t1.coefficient() * t2.coefficient();
    let mut factored_scale = 1.0f64;
    // Residual components that neither peel off nor factor out.
    let mut residual_region: Vec<usize> = Vec::new();
    let mut residual_fwd: Vec<(Vec<usize>, CMat)> = Vec::new();
    let mut residual_rev: Vec<(Vec<usize>, CMat)> = Vec::new();

    for c in 0..n_components {
        let members: Vec<&Node> = nodes
            .iter()
            .zip(&component)
            .filter(|(_, &cc)| cc == c)
            .map(|(n, _)| n)
            .collect();
        let single_owner = members.iter().all(|m| m.owner == members[0].owner);
        if single_owner {
            // Disjoint from the other term entirely: contributes its norm.
            for m in &members {
                passive_scale *= m.factor.op_norm();
            }
            continue;
        }
        let mut region: Vec<usize> = members
            .iter()
            .flat_map(|m| m.factor.support().iter().copied())
            .collect();
        region.sort_unstable();
        region.dedup();
        // T1·T2 applies T2's factors first.
        let fwd_ops: Vec<(&[usize], &CMat)> = members
            .iter()
            .filter(|m| m.owner == 1)
            .chain(members.iter().filter(|m| m.owner == 0))
            .map(|m| (m.factor.support(), m.factor.matrix()))
            .collect();
        let rev_ops: Vec<(&[usize], &CMat)> = members
            .iter()
            .filter(|m| m.owner == 0)
            .chain(members.iter().filter(|m| m.owner == 1))
            .map(|m| (m.factor.support(), m.factor.matrix()))
            .collect();
        if region.len() > cap {
            return Err(Error::CapExceeded {
                what: "commutator dense region",
                got: region.len(),
                cap,
            });
        }
        let fwd = state::dense_on_region(&region, &fwd_ops)?;
        let rev = state::dense_on_region(&region, &rev_ops)?;
        if fwd == rev {
            // Exactly equal products (e.g. identical float pipelines or an
            // exact annihilation): the component splits off multiplicatively.
            factored_scale *= linalg::op_norm(&fwd);
            continue;
        }
        residual_region.extend_from_slice(&region);
        residual_fwd.push((region.clone(), fwd));
        residual_rev.push((region, rev));
    }

    // An annihilated component (both products exactly zero) kills the whole
    // commutator; with no residual every component factored out and the
    // commutator is exactly zero.
    if factored_scale == 0.0 || residual_fwd.is_empty() {
        return Ok(0.0);
    }

    residual_region.sort_unstable();
    residual_region.dedup();
    if residual_region.len() > cap {
        return Err(Error::CapExceeded {
            what: "commutator dense region",
            got: residual_region.len(),
            cap,
        });
    }
    let fwd_ops: Vec<(&[usize], &CMat)> = residual_fwd
        .iter()
        .map(|(r, m)| (r.as_slice(), m))
        .collect();
    let rev_ops: Vec<(&[usize], &CMat)> = residual_rev
        .iter()
        .map(|(r, m)| (r.as_slice(), m))
        .collect();
    let fwd = state::dense_on_region(&residual_region, &fwd_ops)?;
    let rev = state::dense_on_region(&residual_region, &rev_ops)?;
    Ok(passive_scale * factored_scale * linalg::op_norm(&(fwd - rev)))
}

/// The two-layer shape: commuting layers A and B with thresholds α < β.
#[derive(Debug, Clone)]
pub struct TwoLayerInstance {
    a: LayeredHamiltonian,
    b: LayeredHamiltonian,
    alpha: f64,
    beta: f64,
}

impl TwoLayerInstance {
    pub fn new(
        a: LayeredHamiltonian,
        b: LayeredHamiltonian,
        alpha: f64,
        beta: f64,
    ) -> Result<Self> {
        if a.num_qubits() != b.num_qubits() {
            return Err(Error::SizeMismatch { expected: a.num_qubits(), got: b.num_qubits() });
        }
        if a.layers().len() != 1 || b.layers().len() != 1 {
            return Err(Error::InvalidSupport(
                "two-layer instance requires exactly one layer per side".into(),
            ));
        }
        if !(alpha >= 0.0 && alpha < beta) {
            return Err(Error::ThresholdOrder { c: alpha, s: beta });
        }
        Ok(TwoLayerInstance { a, b, alpha, beta })
    }

    pub fn a(&self) -> &LayeredHamiltonian {
        &self.a
    }

    pub fn b(&self) -> &LayeredHamiltonian {
        &self.b
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn num_qubits(&self) -> usize {
        self.a.num_qubits()
    }

    /// Check 0 ⪯ A, B ⪯ I: PSD per term certificates, operator bound via the
    /// triangle inequality when cheap, else dense spectra at desk scale.
    pub fn validate_bounded(&self) -> Result<()> {
        for side in [&self.a, &self.b] {
            side.validate_terms()?;
            let norm_bound: f64 = side.terms().map(|t| t.op_norm()).sum();
            if norm_bound <= 1.0 + NORM_TOL {
                continue;
            }
            let max = linalg::max_eig_hermitian(&side.dense()?);
            if max > 1.0 + NORM_TOL {
                return Err(Error::NormExceeded(max));
            }
        }
        Ok(())
    }

    /// Check both layers are internally commuting.
    pub fn validate_commuting(&self) -> Result<()> {
        for (name, side) in [(0usize, &self.a), (1usize, &self.b)] {
            let report = side.check_layered()?;
            if !report.ok {
                let w = report.worst.unwrap();
                return Err(Error::NotCommuting {
                    layer: name,
                    first: w.first,
                    second: w.second,
                    norm: w.norm,
                });
            }
        }
        Ok(())
    }
}
