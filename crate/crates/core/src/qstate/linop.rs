//! Sparse linear operators on labelled subsystems.
//!
//! An operator stores (output-tuple, input-tuple) → coefficient entries over
//! its own ordered list of subsystems, and is applied to a state by matching
//! subsystem names. Absent entries are zero, so non-square actions (heralded
//! filtering) are representable, but every constructor in the physics modules
//! builds a unitary and [`LinearOp::is_unitary`] checks it directly.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64 as C64;

use super::{PureState, StateError, SubsystemLabel};

/// A sparse operator over an ordered list of labelled subsystems.
#[derive(Debug, Clone)]
pub struct LinearOp {
    subsystems: Vec<SubsystemLabel>,
    /// (output tuple, input tuple) → coefficient.
    entries: BTreeMap<(Vec<usize>, Vec<usize>), C64>,
}

impl LinearOp {
    /// Builds an operator from explicit entries; duplicate (out, in) pairs
    /// are summed and exact zeros dropped.
    pub fn from_entries(
        subsystems: Vec<SubsystemLabel>,
        entries: impl IntoIterator<Item = ((Vec<usize>, Vec<usize>), C64)>,
    ) -> Result<Self, StateError> {
        let mut seen = BTreeSet::new();
        for label in &subsystems {
            if !seen.insert(label.name.clone()) {
                return Err(StateError::DuplicateSubsystem(label.name.clone()));
            }
        }
        let mut map: BTreeMap<(Vec<usize>, Vec<usize>), C64> = BTreeMap::new();
        for ((out, input), coeff) in entries {
            for tuple in [&out, &input] {
                if tuple.len() != subsystems.len() {
                    return Err(StateError::TupleLength {
                        expected: subsystems.len(),
                        found: tuple.len(),
                    });
                }
                for (label, &index) in subsystems.iter().zip(tuple.iter()) {
                    if index >= label.dim {
                        return Err(StateError::IndexOutOfRange {
                            name: label.name.clone(),
                            index,
                            dim: label.dim,
                        });
                    }
                }
            }
            *map.entry((out, input)).or_insert(C64::ZERO) += coeff;
        }
        map.retain(|_, c| *c != C64::ZERO);
        Ok(LinearOp {
            subsystems,
            entries: map,
        })
    }

    /// A single-qubit operator from a dense 2×2 matrix (row = output index).
    pub fn single(label: &SubsystemLabel, matrix: &[[C64; 2]; 2]) -> Result<Self, StateError> {
        if label.dim != 2 {
            return Err(StateError::LabelMismatch(label.name.clone()));
        }
        let mut entries = Vec::new();
        for (out, row) in matrix.iter().enumerate() {
            for (input, &coeff) in row.iter().enumerate() {
                entries.push(((vec![out], vec![input]), coeff));
            }
        }
        LinearOp::from_entries(vec![label.clone()], entries)
    }

    /// The identity on the given subsystems.
    pub fn identity(subsystems: Vec<SubsystemLabel>) -> Result<Self, StateError> {
        let dims: Vec<usize> = subsystems.iter().map(|l| l.dim).collect();
        let entries = tuples(&dims)
            .into_iter()
            .map(|t| ((t.clone(), t), C64::ONE));
        LinearOp::from_entries(subsystems, entries)
    }

    /// Extends `inner` to act only when `control` is in basis state `arm`,
    /// and as the identity on the inner subsystems otherwise. This is how a
    /// path-dependent element (a wave plate sitting in one interferometer
    /// arm) is expressed.
    pub fn controlled(
        control: &SubsystemLabel,
        arm: usize,
        inner: &LinearOp,
    ) -> Result<Self, StateError> {
        if arm >= control.dim {
            return Err(StateError::IndexOutOfRange {
                name: control.name.clone(),
                index: arm,
                dim: control.dim,
            });
        }
        if inner.subsystems.iter().any(|l| l.name == control.name) {
            return Err(StateError::DuplicateSubsystem(control.name.clone()));
        }
        let mut subsystems = vec![control.clone()];
        subsystems.extend(inner.subsystems.iter().cloned());
        let mut entries = Vec::new();
        for ((out, input), coeff) in &inner.entries {
            let mut o = vec![arm];
            o.extend_from_slice(out);
            let mut i = vec![arm];
            i.extend_from_slice(input);
            entries.push(((o, i), *coeff));
        }
        let inner_dims: Vec<usize> = inner.subsystems.iter().map(|l| l.dim).collect();
        for other in (0..control.dim).filter(|&c| c != arm) {
            for t in tuples(&inner_dims) {
                let mut full = vec![other];
                full.extend_from_slice(&t);
                entries.push(((full.clone(), full), C64::ONE));
            }
        }
        LinearOp::from_entries(subsystems, entries)
    }

    pub fn subsystems(&self) -> &[SubsystemLabel] {
        &self.subsystems
    }

    /// Checks U†U = I entrywise within `tol` by densifying; operators here
    /// act on at most a few small subsystems so this stays cheap.
    pub fn is_unitary(&self, tol: f64) -> bool {
        let dims: Vec<usize> = self.subsystems.iter().map(|l| l.dim).collect();
        let basis = tuples(&dims);
        let index: BTreeMap<&Vec<usize>, usize> =
            basis.iter().enumerate().map(|(i, t)| (t, i)).collect();
        let n = basis.len();
        let mut dense = vec![vec![C64::ZERO; n]; n];
        for ((out, input), coeff) in &self.entries {
            dense[index[out]][index[input]] += coeff;
        }
        for col_a in 0..n {
            for col_b in 0..n {
                let dot = dense
                    .iter()
                    .fold(C64::ZERO, |acc, row| acc + row[col_a].conj() * row[col_b]);
                let expected = if col_a == col_b { C64::ONE } else { C64::ZERO };
                if (dot - expected).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Applies the operator to `state`, matching subsystems by name. Every
    /// operator subsystem must exist in the state with the same kind and
    /// dimension; state subsystems the operator does not mention are
    /// untouched.
    pub(super) fn apply_to(&self, state: &PureState) -> Result<PureState, StateError> {
        let positions: Vec<usize> = self
            .subsystems
            .iter()
            .map(|label| {
                let p = state
                    .position(&label.name)
                    .map_err(|_| StateError::OperatorMismatch(label.name.clone()))?;
                if !state.subsystems()[p].compatible(label) {
                    return Err(StateError::LabelMismatch(label.name.clone()));
                }
                Ok(p)
            })
            .collect::<Result<Vec<_>, StateError>>()?;
        // Group entries by input tuple for one lookup per state amplitude.
        let mut by_input: BTreeMap<&Vec<usize>, Vec<(&Vec<usize>, C64)>> = BTreeMap::new();
        for ((out, input), coeff) in &self.entries {
            by_input.entry(input).or_default().push((out, *coeff));
        }
        let mut amps: BTreeMap<Vec<usize>, C64> = BTreeMap::new();
        for (tuple, amp) in state.amplitudes() {
            let local: Vec<usize> = positions.iter().map(|&p| tuple[p]).collect();
            let Some(actions) = by_input.get(&local) else {
                continue; // zero column: amplitude is annihilated
            };
            for (out, coeff) in actions {
                let mut key = tuple.clone();
                for (&p, &value) in positions.iter().zip(out.iter()) {
                    key[p] = value;
                }
                *amps.entry(key).or_insert(C64::ZERO) += coeff * amp;
            }
        }
        amps.retain(|_, a| *a != C64::ZERO);
        PureState::new(state.subsystems().to_vec(), amps)
    }
}

/// All index tuples over the given dimensions, lexicographically.
fn tuples(dims: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &dim in dims {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..dim).map(move |i| {
                    let mut t = prefix.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}
