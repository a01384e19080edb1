use num_complex::Complex64;
use serde::ser::{Serialize, SerializeStruct, Serializer};

use super::{matrix, QuantumError};
use crate::syntax::Gate;

/// Outcomes with probability below this are treated as impossible.
pub const ZERO_PROB: f64 = 1e-12;

pub type DensityMatrix = Vec<Vec<Complex64>>;

/// Named register; `qubits[0]` is the most significant bit of an amplitude index.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    qubits: Vec<String>,
    amps: Vec<Complex64>,
}

impl Default for QuantumState {
    fn default() -> Self {
        Self::new()
    }
}

impl QuantumState {
    /// The empty register, with the single amplitude 1.
    pub fn new() -> Self {
        QuantumState {
            qubits: Vec::new(),
            amps: vec![Complex64::new(1.0, 0.0)],
        }
    }

    /// Builds a state from explicit amplitudes, normalising them.
    pub fn from_amplitudes(qubits: Vec<String>, amps: Vec<Complex64>) -> Result<Self, QuantumError> {
        assert_eq!(amps.len(), 1 << qubits.len(), "amplitude count must be 2^n");
        for (i, q) in qubits.iter().enumerate() {
            if qubits[..i].contains(q) {
                return Err(QuantumError::DuplicateQubit(q.clone()));
            }
        }
        let mut s = QuantumState { qubits, amps };
        let n = s.norm();
        if n <= ZERO_PROB {
            return Err(QuantumError::ZeroVector);
        }
        s.amps.iter_mut().for_each(|a| *a /= n);
        Ok(s)
    }

    pub fn qubits(&self) -> &[String] {
        &self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn len(&self) -> usize {
        self.qubits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qubits.is_empty()
    }

    pub fn contains(&self, q: &str) -> bool {
        self.qubits.iter().any(|x| x == q)
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn shift(&self, q: &str) -> Result<usize, QuantumError> {
        let pos = self
            .qubits
            .iter()
            .position(|x| x == q)
            .ok_or_else(|| QuantumError::UnknownQubit(q.to_string()))?;
        Ok(self.qubits.len() - 1 - pos)
    }

    fn shifts(&self, targets: &[&str]) -> Result<Vec<usize>, QuantumError> {
        let mut out = Vec::with_capacity(targets.len());
        for (i, t) in targets.iter().enumerate() {
            if targets[..i].contains(t) {
                return Err(QuantumError::RepeatedTarget(t.to_string()));
            }
            out.push(self.shift(t)?);
        }
        Ok(out)
    }

    /// Appends a fresh `|0>` qubit as the least significant bit.
    pub fn alloc(&mut self, name: &str) -> Result<(), QuantumError> {
        if self.contains(name) {
            return Err(QuantumError::DuplicateQubit(name.to_string()));
        }
        let zero = Complex64::new(0.0, 0.0);
        self.amps = self.amps.iter().flat_map(|&a| [a, zero]).collect();
        self.qubits.push(name.to_string());
        Ok(())
    }

    pub fn apply(&mut self, gate: Gate, targets: &[&str]) -> Result<(), QuantumError> {
        if targets.len() != gate.arity() {
            return Err(QuantumError::ArityMismatch {
                gate: gate.name().to_string(),
                expected: gate.arity(),
                got: targets.len(),
            });
        }
        let shifts = self.shifts(targets)?;
        self.apply_matrix(&matrix(gate), &shifts);
        Ok(())
    }

    /// Applies an arbitrary `2^k` square matrix to `k` targets, first
    /// target most significant. The matrix is not checked for unitarity.
    pub fn apply_operator(&mut self, m: &[Vec<Complex64>], targets: &[&str]) -> Result<(), QuantumError> {
        if m.len() != 1 << targets.len() || m.iter().any(|row| row.len() != m.len()) {
            return Err(QuantumError::ArityMismatch {
                gate: "matrix".to_string(),
                expected: m.len().trailing_zeros() as usize,
                got: targets.len(),
            });
        }
        let shifts = self.shifts(targets)?;
        self.apply_matrix(m, &shifts);
        Ok(())
    }

    fn apply_matrix(&mut self, m: &[Vec<Complex64>], shifts: &[usize]) {
        let k = shifts.len();
        let mask: usize = shifts.iter().map(|s| 1 << s).sum();
        let offset = |a: usize| -> usize {
            (0..k)
                .filter(|j| a >> (k - 1 - j) & 1 == 1)
                .map(|j| 1 << shifts[j])
                .sum()
        };
        let offsets: Vec<usize> = (0..1 << k).map(offset).collect();
        let mut sub = vec![Complex64::new(0.0, 0.0); 1 << k];
        for base in 0..self.amps.len() {
            if base & mask != 0 {
                continue;
            }
            for (a, o) in offsets.iter().enumerate() {
                sub[a] = self.amps[base | o];
            }
            for (a, o) in offsets.iter().enumerate() {
                self.amps[base | o] = m[a].iter().zip(&sub).map(|(x, y)| x * y).sum();
            }
        }
    }

    fn matches(idx: usize, shifts: &[usize], outcome: &[u8]) -> bool {
        shifts
            .iter()
            .zip(outcome)
            .all(|(s, &b)| (idx >> s & 1) as u8 == b)
    }

    fn check_outcome(targets: &[&str], outcome: &[u8]) -> Result<(), QuantumError> {
        if targets.len() != outcome.len() {
            return Err(QuantumError::OutcomeWidth {
                expected: targets.len(),
                got: outcome.len(),
            });
        }
        Ok(())
    }

    /// Probability that measuring `targets` yields `outcome`.
    pub fn prob(&self, targets: &[&str], outcome: &[u8]) -> Result<f64, QuantumError> {
        Self::check_outcome(targets, outcome)?;
        let shifts = self.shifts(targets)?;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| Self::matches(*i, &shifts, outcome))
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Collapses onto `outcome` and removes the measured qubits.
    pub fn project_measure(
        &self,
        targets: &[&str],
        outcome: &[u8],
    ) -> Result<(f64, QuantumState), QuantumError> {
        let p = self.prob(targets, outcome)?;
        if p < ZERO_PROB {
            return Err(QuantumError::ZeroProbabilityBranch);
        }
        let shifts = self.shifts(targets)?;
        let keep: Vec<usize> = (0..self.qubits.len())
            .filter(|&pos| !targets.contains(&self.qubits[pos].as_str()))
            .collect();
        let n = self.qubits.len();
        let scale = p.sqrt();
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << keep.len()];
        for (i, a) in self.amps.iter().enumerate() {
            if !Self::matches(i, &shifts, outcome) {
                continue;
            }
            let mut j = 0;
            for &pos in &keep {
                j = j << 1 | (i >> (n - 1 - pos) & 1);
            }
            amps[j] = a / scale;
        }
        let qubits = keep.iter().map(|&pos| self.qubits[pos].clone()).collect();
        Ok((p, QuantumState { qubits, amps }))
    }

    /// Every outcome with non-zero probability, in ascending binary order.
    pub fn measure_branches(
        &self,
        targets: &[&str],
    ) -> Result<Vec<(Vec<u8>, f64, QuantumState)>, QuantumError> {
        self.shifts(targets)?;
        let k = targets.len();
        let mut out = Vec::new();
        for v in 0..1usize << k {
            let bits: Vec<u8> = (0..k).map(|j| (v >> (k - 1 - j) & 1) as u8).collect();
            match self.project_measure(targets, &bits) {
                Ok((p, s)) => out.push((bits, p, s)),
                Err(QuantumError::ZeroProbabilityBranch) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    }

    /// Same state with the register listed in `order`.
    pub fn reordered(&self, order: &[&str]) -> Result<QuantumState, QuantumError> {
        if order.len() != self.qubits.len() {
            return Err(QuantumError::OutcomeWidth {
                expected: self.qubits.len(),
                got: order.len(),
            });
        }
        let shifts = self.shifts(order)?;
        let n = order.len();
        let mut amps = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let mut j = 0;
            for s in &shifts {
                j = j << 1 | (i >> s & 1);
            }
            amps[j] = *a;
        }
        debug_assert_eq!(amps.len(), 1 << n);
        Ok(QuantumState {
            qubits: order.iter().map(|s| s.to_string()).collect(),
            amps,
        })
    }

    /// Reduced density matrix on `targets`, in that order.
    pub fn reduced_density(&self, targets: &[&str]) -> Result<DensityMatrix, QuantumError> {
        let shifts = self.shifts(targets)?;
        let k = targets.len();
        let mask: usize = shifts.iter().map(|s| 1 << s).sum();
        let sub = |i: usize| -> usize {
            shifts.iter().fold(0, |acc, s| acc << 1 | (i >> s & 1))
        };
        let mut rho = vec![vec![Complex64::new(0.0, 0.0); 1 << k]; 1 << k];
        for (i, a) in self.amps.iter().enumerate() {
            for (j, b) in self.amps.iter().enumerate() {
                if i & !mask == j & !mask {
                    rho[sub(i)][sub(j)] += a * b.conj();
                }
            }
        }
        Ok(rho)
    }

    /// Renames a qubit in place.
    pub fn rename(&mut self, from: &str, to: &str) -> Result<(), QuantumError> {
        if self.contains(to) {
            return Err(QuantumError::DuplicateQubit(to.to_string()));
        }
        let pos = self.qubits.len() - 1 - self.shift(from)?;
        self.qubits[pos] = to.to_string();
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("state serialises")
    }
}

impl Serialize for QuantumState {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("QuantumState", 2)?;
        st.serialize_field("qubits", &self.qubits)?;
        let amps: Vec<[f64; 2]> = self.amps.iter().map(|a| [a.re, a.im]).collect();
        st.serialize_field("amps", &amps)?;
        st.end()
    }
}

/// `<psi|rho|psi>` for a normalised pure `psi`.
pub fn fidelity_pure(rho: &DensityMatrix, psi: &[Complex64]) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, row) in rho.iter().enumerate() {
        for (j, r) in row.iter().enumerate() {
            acc += psi[i].conj() * r * psi[j];
        }
    }
    acc.re
}
