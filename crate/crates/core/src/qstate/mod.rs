//! Sparse labelled tensor-product states.
//!
//! A [`PureState`] lives on an ordered list of named subsystems (photon
//! polarization, photon path, or ensemble qubit) and stores only its nonzero
//! amplitudes, keyed by basis-index tuples. The map is a `BTreeMap` so that
//! iteration, and therefore floating-point summation order, is deterministic
//! across runs. States are allowed to be sub-normalized: heralded losses show
//! up as missing norm rather than as an explicit outcome, until a measurement
//! accounts for them.
//!
//! [`MixedEnsemble`] is the small convex-mixture type the purification
//! protocol works with: a weighted list of normalized pure states. No density
//! matrices are formed anywhere; every quantity of interest here is a weighted
//! sum over pure-state branches.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64 as C64;
use thiserror::Error;

mod linop;
pub use linop::LinearOp;

/// Tolerance on internally maintained invariants (norms, weight sums).
pub const NORM_EPS: f64 = 1e-12;
/// Tolerance when validating caller-supplied states and measurement bases.
pub const INPUT_EPS: f64 = 1e-9;

/// Errors from state construction, composition, and measurement.
#[derive(Debug, Error)]
pub enum StateError {
    #[error("duplicate subsystem name `{0}`")]
    DuplicateSubsystem(String),
    #[error("no subsystem named `{0}`")]
    UnknownSubsystem(String),
    #[error("subsystem `{name}`: basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange {
        name: String,
        index: usize,
        dim: usize,
    },
    #[error("basis tuple has {found} indices but the state has {expected} subsystems")]
    TupleLength { expected: usize, found: usize },
    #[error("subsystem `{0}` differs between operands (kind or dimension)")]
    LabelMismatch(String),
    #[error("states are defined on different subsystem sets")]
    SubsystemSetMismatch,
    #[error("squared norm {0} exceeds 1")]
    NormExceeded(f64),
    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("cannot normalize a zero state")]
    ZeroState,
    #[error("measurement basis for `{name}` must have {dim} orthonormal vectors of length {dim}")]
    BadBasis { name: String, dim: usize },
    #[error("mixture weights must be nonnegative and sum to 1 (sum = {0})")]
    BadWeights(f64),
    #[error("subsystem `{0}` is not in a definite basis state")]
    NotDefinite(String),
    #[error("operator is defined on subsystems the state does not have: `{0}`")]
    OperatorMismatch(String),
}

/// Physical role of a subsystem; dimensions are fixed per kind except paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SubsystemKind {
    /// Photon polarization, always two-dimensional (index 0 = h, 1 = v).
    PhotonPolarization,
    /// Photon spatial rail; dimension = number of rails being tracked.
    PhotonPath,
    /// Atomic-ensemble memory qubit (index 0 = ground, 1 = symmetric Dicke).
    EnsembleQubit,
}

impl fmt::Display for SubsystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SubsystemKind::PhotonPolarization => "photon-polarization",
            SubsystemKind::PhotonPath => "photon-path",
            SubsystemKind::EnsembleQubit => "ensemble-qubit",
        };
        f.write_str(s)
    }
}

/// A named subsystem: identity is the name, physics is the kind and dimension.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SubsystemLabel {
    pub name: String,
    pub kind: SubsystemKind,
    pub dim: usize,
}

impl SubsystemLabel {
    /// Two-dimensional polarization subsystem.
    pub fn polarization(name: impl Into<String>) -> Self {
        SubsystemLabel {
            name: name.into(),
            kind: SubsystemKind::PhotonPolarization,
            dim: 2,
        }
    }

    /// Spatial-rail subsystem with `rails` rails.
    pub fn path(name: impl Into<String>, rails: usize) -> Self {
        SubsystemLabel {
            name: name.into(),
            kind: SubsystemKind::PhotonPath,
            dim: rails,
        }
    }

    /// Two-level ensemble memory qubit.
    pub fn ensemble(name: impl Into<String>) -> Self {
        SubsystemLabel {
            name: name.into(),
            kind: SubsystemKind::EnsembleQubit,
            dim: 2,
        }
    }

    /// Same kind and dimension; names may differ.
    pub fn compatible(&self, other: &SubsystemLabel) -> bool {
        self.kind == other.kind && self.dim == other.dim
    }
}

/// One outcome of a projective measurement on a single subsystem.
///
/// The measured subsystem is removed from `post`; `post` is renormalized
/// whenever the outcome probability is nonzero.
#[derive(Debug, Clone)]
pub struct MeasurementBranch {
    pub outcome: usize,
    pub probability: f64,
    pub post: PureState,
}

/// A sparse pure state over an ordered list of labelled subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    subsystems: Vec<SubsystemLabel>,
    amps: BTreeMap<Vec<usize>, C64>,
}

impl PureState {
    /// Builds a state from explicit (index-tuple, amplitude) pairs.
    ///
    /// Duplicate tuples are summed, exact zeros are dropped, and the squared
    /// norm must not exceed 1 beyond [`NORM_EPS`]: sub-normalized states are
    /// legal (they carry heralded loss), super-normalized ones are a bug.
    pub fn new(
        subsystems: Vec<SubsystemLabel>,
        amplitudes: impl IntoIterator<Item = (Vec<usize>, C64)>,
    ) -> Result<Self, StateError> {
        let mut seen = BTreeSet::new();
        for label in &subsystems {
            if !seen.insert(label.name.clone()) {
                return Err(StateError::DuplicateSubsystem(label.name.clone()));
            }
        }
        let mut amps: BTreeMap<Vec<usize>, C64> = BTreeMap::new();
        for (tuple, amp) in amplitudes {
            if tuple.len() != subsystems.len() {
                return Err(StateError::TupleLength {
                    expected: subsystems.len(),
                    found: tuple.len(),
                });
            }
            for (label, &index) in subsystems.iter().zip(&tuple) {
                if index >= label.dim {
                    return Err(StateError::IndexOutOfRange {
                        name: label.name.clone(),
                        index,
                        dim: label.dim,
                    });
                }
            }
            *amps.entry(tuple).or_insert(C64::ZERO) += amp;
        }
        amps.retain(|_, a| *a != C64::ZERO);
        let state = PureState { subsystems, amps };
        let n2 = state.norm_sq();
        if n2 > 1.0 + NORM_EPS {
            return Err(StateError::NormExceeded(n2));
        }
        Ok(state)
    }

    /// The basis state |indices⟩ with amplitude 1.
    pub fn basis_state(
        subsystems: Vec<SubsystemLabel>,
        indices: &[usize],
    ) -> Result<Self, StateError> {
        PureState::new(subsystems, [(indices.to_vec(), C64::ONE)])
    }

    pub fn subsystems(&self) -> &[SubsystemLabel] {
        &self.subsystems
    }

    /// Position of the named subsystem in the index tuples.
    pub fn position(&self, name: &str) -> Result<usize, StateError> {
        self.subsystems
            .iter()
            .position(|l| l.name == name)
            .ok_or_else(|| StateError::UnknownSubsystem(name.to_string()))
    }

    pub fn label(&self, name: &str) -> Result<&SubsystemLabel, StateError> {
        Ok(&self.subsystems[self.position(name)?])
    }

    /// Nonzero amplitudes in deterministic (lexicographic tuple) order.
    pub fn amplitudes(&self) -> impl Iterator<Item = (&Vec<usize>, &C64)> {
        self.amps.iter()
    }

    /// Amplitude of one basis tuple (zero if absent).
    pub fn amplitude(&self, indices: &[usize]) -> C64 {
        self.amps.get(indices).copied().unwrap_or(C64::ZERO)
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    /// Unit-norm copy; errors on the zero state.
    pub fn normalized(&self) -> Result<Self, StateError> {
        let n2 = self.norm_sq();
        if n2 <= 0.0 {
            return Err(StateError::ZeroState);
        }
        Ok(self.scaled(C64::new(1.0 / n2.sqrt(), 0.0)))
    }

    /// Every amplitude multiplied by `factor` (no norm check: scaling down
    /// below 1 is how heralded loss is represented).
    pub fn scaled(&self, factor: C64) -> Self {
        let amps = self
            .amps
            .iter()
            .map(|(t, a)| (t.clone(), a * factor))
            .filter(|(_, a)| *a != C64::ZERO)
            .collect();
        PureState {
            subsystems: self.subsystems.clone(),
            amps,
        }
    }

    /// Tensor product; subsystem names must not collide.
    pub fn tensor(&self, other: &PureState) -> Result<Self, StateError> {
        for l in &other.subsystems {
            if self.subsystems.iter().any(|s| s.name == l.name) {
                return Err(StateError::DuplicateSubsystem(l.name.clone()));
            }
        }
        let mut subsystems = self.subsystems.clone();
        subsystems.extend(other.subsystems.iter().cloned());
        let mut amps = BTreeMap::new();
        for (t1, a1) in &self.amps {
            for (t2, a2) in &other.amps {
                let product = a1 * a2;
                if product == C64::ZERO {
                    continue;
                }
                let mut tuple = t1.clone();
                tuple.extend_from_slice(t2);
                amps.insert(tuple, product);
            }
        }
        Ok(PureState { subsystems, amps })
    }

    /// Applies a linear operator that acts on a subset of the subsystems,
    /// matched by name.
    pub fn apply(&self, op: &LinearOp) -> Result<Self, StateError> {
        op.apply_to(self)
    }

    /// Renames one subsystem; kind and dimension are preserved.
    pub fn renamed(&self, old: &str, new: &str) -> Result<Self, StateError> {
        let p = self.position(old)?;
        if new != old && self.subsystems.iter().any(|l| l.name == new) {
            return Err(StateError::DuplicateSubsystem(new.to_string()));
        }
        let mut subsystems = self.subsystems.clone();
        subsystems[p].name = new.to_string();
        Ok(PureState {
            subsystems,
            amps: self.amps.clone(),
        })
    }

    /// ⟨self|other⟩ with `other`'s subsystems reordered to match by name.
    pub fn overlap(&self, other: &PureState) -> Result<C64, StateError> {
        let perm = reorder_permutation(&self.subsystems, &other.subsystems)?;
        let mut acc = C64::ZERO;
        for (tuple, amp) in &other.amps {
            let key: Vec<usize> = perm.iter().map(|&p| tuple[p]).collect();
            if let Some(a) = self.amps.get(&key) {
                acc += a.conj() * amp;
            }
        }
        Ok(acc)
    }

    /// |⟨target|self⟩|² against a normalized target state.
    pub fn fidelity(&self, target: &PureState) -> Result<f64, StateError> {
        let t2 = target.norm_sq();
        if (t2 - 1.0).abs() > INPUT_EPS {
            return Err(StateError::NotNormalized(t2));
        }
        Ok(target.overlap(self)?.norm_sqr())
    }

    /// True when the two states differ only by a global phase, amplitude by
    /// amplitude within `tol`. Both states should be normalized for the
    /// comparison to mean anything.
    pub fn approx_eq_up_to_phase(&self, other: &PureState, tol: f64) -> bool {
        let perm = match reorder_permutation(&self.subsystems, &other.subsystems) {
            Ok(p) => p,
            Err(_) => return false,
        };
        let mut other_amps: BTreeMap<Vec<usize>, C64> = BTreeMap::new();
        for (tuple, amp) in &other.amps {
            let key: Vec<usize> = perm.iter().map(|&p| tuple[p]).collect();
            other_amps.insert(key, *amp);
        }
        // Align phases on the largest amplitude of self.
        let anchor = self
            .amps
            .iter()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()));
        let phase = match anchor {
            Some((key, a_self)) => {
                let a_other = match other_amps.get(key) {
                    Some(a) if a.norm() > tol => *a,
                    _ => return false,
                };
                (a_self / a_other) / (a_self / a_other).norm()
            }
            None => C64::ONE,
        };
        let keys: BTreeSet<&Vec<usize>> = self.amps.keys().chain(other_amps.keys()).collect();
        let matched = keys.iter().all(|k| {
            let a = self.amps.get(*k).copied().unwrap_or(C64::ZERO);
            let b = other_amps.get(*k).copied().unwrap_or(C64::ZERO);
            (a - phase * b).norm() <= tol
        });
        matched
    }

    /// Projective measurement of one subsystem in the given orthonormal
    /// basis. Returns every outcome in basis order; outcome probabilities sum
    /// to the input squared norm (any deficit from 1 is heralded loss). The
    /// measured subsystem is removed from each post-state.
    pub fn measure(
        &self,
        name: &str,
        basis: &[Vec<C64>],
    ) -> Result<Vec<MeasurementBranch>, StateError> {
        let p = self.position(name)?;
        let dim = self.subsystems[p].dim;
        validate_basis(name, dim, basis)?;
        let mut remaining = self.subsystems.clone();
        remaining.remove(p);
        let mut branches = Vec::with_capacity(dim);
        for (outcome, vector) in basis.iter().enumerate() {
            let mut amps: BTreeMap<Vec<usize>, C64> = BTreeMap::new();
            for (tuple, amp) in &self.amps {
                let coeff = vector[tuple[p]].conj() * amp;
                if coeff == C64::ZERO {
                    continue;
                }
                let mut key = tuple.clone();
                key.remove(p);
                *amps.entry(key).or_insert(C64::ZERO) += coeff;
            }
            amps.retain(|_, a| *a != C64::ZERO);
            let probability: f64 = amps.values().map(|a| a.norm_sqr()).sum();
            let mut post = PureState {
                subsystems: remaining.clone(),
                amps,
            };
            if probability > 0.0 {
                let scale = C64::new(1.0 / probability.sqrt(), 0.0);
                post = post.scaled(scale);
            }
            branches.push(MeasurementBranch {
                outcome,
                probability,
                post,
            });
        }
        Ok(branches)
    }

    /// Removes a subsystem that every nonzero amplitude agrees on, i.e. one
    /// that has already collapsed. Errors if the subsystem is still in
    /// superposition.
    pub fn discard_definite(&self, name: &str) -> Result<Self, StateError> {
        let p = self.position(name)?;
        let mut value = None;
        for tuple in self.amps.keys() {
            match value {
                None => value = Some(tuple[p]),
                Some(v) if v != tuple[p] => {
                    return Err(StateError::NotDefinite(name.to_string()))
                }
                _ => {}
            }
        }
        let mut subsystems = self.subsystems.clone();
        subsystems.remove(p);
        let amps = self
            .amps
            .iter()
            .map(|(t, a)| {
                let mut key = t.clone();
                key.remove(p);
                (key, *a)
            })
            .collect();
        Ok(PureState { subsystems, amps })
    }
}

/// Permutation `perm` such that `other.subsystems[perm[i]]` matches
/// `reference[i]` by name, kind, and dimension.
fn reorder_permutation(
    reference: &[SubsystemLabel],
    other: &[SubsystemLabel],
) -> Result<Vec<usize>, StateError> {
    if reference.len() != other.len() {
        return Err(StateError::SubsystemSetMismatch);
    }
    reference
        .iter()
        .map(|label| {
            let p = other
                .iter()
                .position(|l| l.name == label.name)
                .ok_or(StateError::SubsystemSetMismatch)?;
            if !other[p].compatible(label) {
                return Err(StateError::LabelMismatch(label.name.clone()));
            }
            Ok(p)
        })
        .collect()
}

fn validate_basis(name: &str, dim: usize, basis: &[Vec<C64>]) -> Result<(), StateError> {
    let bad = || StateError::BadBasis {
        name: name.to_string(),
        dim,
    };
    if basis.len() != dim || basis.iter().any(|v| v.len() != dim) {
        return Err(bad());
    }
    for (i, u) in basis.iter().enumerate() {
        for (j, w) in basis.iter().enumerate() {
            let dot: C64 = u.iter().zip(w).map(|(a, b)| a.conj() * b).sum();
            let expected = if i == j { C64::ONE } else { C64::ZERO };
            if (dot - expected).norm() > INPUT_EPS {
                return Err(bad());
            }
        }
    }
    Ok(())
}

/// The computational basis {|0⟩, …, |dim−1⟩} as measurement vectors.
pub fn computational_basis(dim: usize) -> Vec<Vec<C64>> {
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| if i == j { C64::ONE } else { C64::ZERO })
                .collect()
        })
        .collect()
}

/// The conjugate qubit basis {(|0⟩ + |1⟩)/√2, (|0⟩ − |1⟩)/√2}.
pub fn plus_minus_basis() -> Vec<Vec<C64>> {
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    vec![vec![s, s], vec![s, -s]]
}

/// A convex mixture of normalized pure states.
#[derive(Debug, Clone)]
pub struct MixedEnsemble {
    terms: Vec<(f64, PureState)>,
}

impl MixedEnsemble {
    /// Weights must be nonnegative and sum to 1 within [`NORM_EPS`]; every
    /// state must be normalized within [`INPUT_EPS`]. Zero-weight terms are
    /// dropped.
    pub fn new(terms: Vec<(f64, PureState)>) -> Result<Self, StateError> {
        let sum: f64 = terms.iter().map(|(w, _)| w).sum();
        if terms.iter().any(|(w, _)| *w < -NORM_EPS) || (sum - 1.0).abs() > NORM_EPS {
            return Err(StateError::BadWeights(sum));
        }
        for (_, state) in &terms {
            let n2 = state.norm_sq();
            if (n2 - 1.0).abs() > INPUT_EPS {
                return Err(StateError::NotNormalized(n2));
            }
        }
        let terms = terms.into_iter().filter(|(w, _)| *w > 0.0).collect();
        Ok(MixedEnsemble { terms })
    }

    pub fn terms(&self) -> &[(f64, PureState)] {
        &self.terms
    }

    /// Weighted fidelity Σ w·|⟨target|term⟩|².
    pub fn fidelity(&self, target: &PureState) -> Result<f64, StateError> {
        let mut acc = 0.0;
        for (w, state) in &self.terms {
            acc += w * state.fidelity(target)?;
        }
        Ok(acc)
    }

    /// Applies an operator to every term. The operator must preserve norms
    /// for the result to stay a valid mixture; unitaries do.
    pub fn apply(&self, op: &LinearOp) -> Result<Self, StateError> {
        let terms = self
            .terms
            .iter()
            .map(|(w, s)| Ok((*w, s.apply(op)?)))
            .collect::<Result<Vec<_>, StateError>>()?;
        MixedEnsemble::new(terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn qubit_pair() -> Vec<SubsystemLabel> {
        vec![SubsystemLabel::ensemble("a"), SubsystemLabel::ensemble("b")]
    }

    #[test]
    fn construction_validates_indices_and_norm() {
        let labels = qubit_pair();
        assert!(matches!(
            PureState::new(labels.clone(), [(vec![0, 2], C64::ONE)]),
            Err(StateError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            PureState::new(labels.clone(), [(vec![0], C64::ONE)]),
            Err(StateError::TupleLength { .. })
        ));
        assert!(matches!(
            PureState::new(
                labels.clone(),
                [(vec![0, 0], C64::ONE), (vec![1, 1], C64::ONE)]
            ),
            Err(StateError::NormExceeded(_))
        ));
        // Duplicate tuples are summed before the norm check.
        let s = PureState::new(
            labels,
            [(vec![0, 1], c(0.5, 0.0)), (vec![0, 1], c(0.5, 0.0))],
        )
        .unwrap();
        assert!((s.amplitude(&[0, 1]) - C64::ONE).norm() < 1e-15);
    }

    #[test]
    fn duplicate_subsystem_names_are_rejected() {
        let labels = vec![SubsystemLabel::ensemble("a"), SubsystemLabel::ensemble("a")];
        assert!(matches!(
            PureState::basis_state(labels, &[0, 0]),
            Err(StateError::DuplicateSubsystem(_))
        ));
    }

    #[test]
    fn tensor_and_overlap_match_by_name_not_position() {
        let a = PureState::basis_state(vec![SubsystemLabel::ensemble("a")], &[0]).unwrap();
        let b = PureState::basis_state(vec![SubsystemLabel::ensemble("b")], &[1]).unwrap();
        let ab = a.tensor(&b).unwrap();
        let ba = b.tensor(&a).unwrap();
        // Same state, different subsystem order: overlap must be 1.
        let ov = ab.overlap(&ba).unwrap();
        assert!((ov - C64::ONE).norm() < 1e-15);
    }

    #[test]
    fn measurement_branches_conserve_probability() {
        let labels = qubit_pair();
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let bell = PureState::new(labels, [(vec![0, 1], s), (vec![1, 0], s)]).unwrap();
        let branches = bell.measure("a", &computational_basis(2)).unwrap();
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        assert!((total - 1.0).abs() < 1e-14);
        for branch in &branches {
            assert!((branch.probability - 0.5).abs() < 1e-14);
            assert!((branch.post.norm_sq() - 1.0).abs() < 1e-14);
            assert_eq!(branch.post.subsystems().len(), 1);
            assert_eq!(branch.post.subsystems()[0].name, "b");
        }
        // a = 0 forces b = 1.
        assert!((branches[0].post.amplitude(&[1]) - C64::ONE).norm() < 1e-14);
    }

    #[test]
    fn measurement_in_conjugate_basis() {
        let labels = vec![SubsystemLabel::ensemble("a")];
        let plus = PureState::new(
            labels,
            [
                (vec![0], c(std::f64::consts::FRAC_1_SQRT_2, 0.0)),
                (vec![1], c(std::f64::consts::FRAC_1_SQRT_2, 0.0)),
            ],
        )
        .unwrap();
        let branches = plus.measure("a", &plus_minus_basis()).unwrap();
        assert!((branches[0].probability - 1.0).abs() < 1e-14);
        assert!(branches[1].probability < 1e-14);
    }

    #[test]
    fn non_orthonormal_basis_is_rejected() {
        let labels = vec![SubsystemLabel::ensemble("a")];
        let s = PureState::basis_state(labels, &[0]).unwrap();
        let skewed = vec![vec![C64::ONE, C64::ZERO], vec![C64::ONE, C64::ONE]];
        assert!(matches!(
            s.measure("a", &skewed),
            Err(StateError::BadBasis { .. })
        ));
    }

    #[test]
    fn subnormalized_measurement_reports_the_deficit() {
        let labels = vec![SubsystemLabel::ensemble("a")];
        let s = PureState::new(labels, [(vec![0], c(0.6, 0.0))]).unwrap();
        let branches = s.measure("a", &computational_basis(2)).unwrap();
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        assert!((total - 0.36).abs() < 1e-14);
        // The surviving branch is still renormalized.
        assert!((branches[0].post.norm_sq() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn phase_insensitive_equality() {
        let labels = qubit_pair();
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let psi = PureState::new(labels.clone(), [(vec![0, 1], s), (vec![1, 0], s)]).unwrap();
        let rotated = psi.scaled(C64::from_polar(1.0, 1.234));
        assert!(psi.approx_eq_up_to_phase(&rotated, 1e-12));
        let other = PureState::new(labels, [(vec![0, 1], s), (vec![1, 0], -s)]).unwrap();
        assert!(!psi.approx_eq_up_to_phase(&other, 1e-12));
    }

    #[test]
    fn discard_definite_requires_collapse() {
        let labels = qubit_pair();
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let collapsed =
            PureState::new(labels.clone(), [(vec![0, 0], s), (vec![0, 1], s)]).unwrap();
        let reduced = collapsed.discard_definite("a").unwrap();
        assert_eq!(reduced.subsystems().len(), 1);
        assert!((reduced.norm_sq() - 1.0).abs() < 1e-14);
        let spread = PureState::new(labels, [(vec![0, 0], s), (vec![1, 1], s)]).unwrap();
        assert!(matches!(
            spread.discard_definite("a"),
            Err(StateError::NotDefinite(_))
        ));
    }

    #[test]
    fn mixed_ensemble_validates_weights_and_norms() {
        let labels = qubit_pair();
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let psi = PureState::new(labels.clone(), [(vec![0, 1], s), (vec![1, 0], s)]).unwrap();
        let phi = PureState::new(labels, [(vec![0, 0], s), (vec![1, 1], s)]).unwrap();
        assert!(MixedEnsemble::new(vec![(0.7, psi.clone()), (0.2, phi.clone())]).is_err());
        let mix = MixedEnsemble::new(vec![(0.7, psi.clone()), (0.3, phi)]).unwrap();
        let f = mix.fidelity(&psi).unwrap();
        assert!((f - 0.7).abs() < 1e-14);
    }

    #[test]
    fn renamed_preserves_amplitudes() {
        let labels = qubit_pair();
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let psi = PureState::new(labels, [(vec![0, 1], s), (vec![1, 0], s)]).unwrap();
        let renamed = psi.renamed("a", "left").unwrap();
        assert_eq!(renamed.subsystems()[0].name, "left");
        assert!((renamed.amplitude(&[0, 1]) - s).norm() < 1e-15);
        assert!(psi.renamed("a", "b").is_err());
    }
}
