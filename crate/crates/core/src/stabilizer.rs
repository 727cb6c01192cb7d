//! Membership tests for groups generated by commuting Pauli operators.

use crate::error::{Error, Result};
use crate::pauli::PauliOperator;

/// Abelian group generated by a list of Hermitian, pairwise commuting Paulis.
#[derive(Clone, Debug)]
pub struct StabilizerGroup {
    qubits: usize,
    generators: Vec<PauliOperator>,
}

impl StabilizerGroup {
    pub fn new(qubits: usize, generators: Vec<PauliOperator>) -> Result<Self> {
        for (i, g) in generators.iter().enumerate() {
            if g.qubits() != qubits {
                return Err(Error::validation(
                    "generators",
                    format!("generator {i} acts on {} qubits", g.qubits()),
                ));
            }
            if !g.is_hermitian() {
                return Err(Error::ImaginaryPhase);
            }
            for (j, h) in generators[..i].iter().enumerate() {
                if !g.commutes_with(h) {
                    return Err(Error::validation(
                        "generators",
                        format!("generators {j} and {i} anticommute"),
                    ));
                }
            }
        }
        Ok(StabilizerGroup { qubits, generators })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    /// Whether `op` (with its sign) is an element of the group.
    pub fn contains(&self, op: &PauliOperator) -> bool {
        contains_modulo(self, &[], op)
            .map(|w| w.is_some())
            .unwrap_or(false)
    }

    /// Whether `-I` is in the group, i.e. the generators are inconsistent.
    pub fn contains_minus_identity(&self) -> bool {
        self.contains(&PauliOperator::identity(self.qubits).negated())
    }
}

/// Row of the elimination: operator bits plus the set of generators combined.
#[derive(Clone)]
struct Row {
    bits: Vec<u64>,
    combo: Vec<u64>,
}

fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

fn lowest_bit(bits: &[u64]) -> Option<usize> {
    bits.iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

fn test_bit(bits: &[u64], i: usize) -> bool {
    bits[i / 64] >> (i % 64) & 1 == 1
}

fn op_bits(op: &PauliOperator) -> Vec<u64> {
    op.x_words().iter().chain(op.z_words()).copied().collect()
}

/// Ordered product of the selected operators, without Hermiticity checks.
fn product(qubits: usize, ops: &[&PauliOperator], combo: &[u64], offset: usize) -> PauliOperator {
    let mut acc = PauliOperator::identity(qubits);
    for (i, op) in ops.iter().enumerate() {
        if test_bit(combo, offset + i) {
            acc = acc.mul_unchecked(op);
        }
    }
    acc
}

/// Searches for `s` in the group generated by `extra` such that `op * s`
/// lies in `group`. Returns that element `s` when it exists.
///
/// `extra` must commute internally but need not commute with `group`.
/// Passing an empty `extra` reduces this to plain membership of `op`.
pub fn contains_modulo(
    group: &StabilizerGroup,
    extra: &[PauliOperator],
    op: &PauliOperator,
) -> Result<Option<PauliOperator>> {
    let qubits = group.qubits;
    if op.qubits() != qubits || extra.iter().any(|e| e.qubits() != qubits) {
        return Err(Error::validation(
            "qubits",
            "operator size does not match the group",
        ));
    }
    if !op.is_hermitian() {
        return Err(Error::ImaginaryPhase);
    }
    StabilizerGroup::new(qubits, extra.to_vec())?;

    let m_ops: Vec<&PauliOperator> = group.generators.iter().collect();
    let s_ops: Vec<&PauliOperator> = extra.iter().collect();
    let total = m_ops.len() + s_ops.len();
    let combo_words = total.div_ceil(64).max(1);

    // Gaussian elimination, keeping pivots keyed by their lowest set bit.
    let mut pivots: Vec<(usize, Row)> = Vec::new();
    let mut kernel: Vec<Vec<u64>> = Vec::new();
    for (idx, g) in m_ops.iter().chain(&s_ops).enumerate() {
        let mut row = Row {
            bits: op_bits(g),
            combo: vec![0; combo_words],
        };
        row.combo[idx / 64] |= 1 << (idx % 64);
        reduce(&mut row, &pivots);
        match lowest_bit(&row.bits) {
            Some(p) => pivots.push((p, row)),
            None => kernel.push(row.combo),
        }
    }

    let mut target = Row {
        bits: op_bits(op),
        combo: vec![0; combo_words],
    };
    reduce(&mut target, &pivots);
    if lowest_bit(&target.bits).is_some() {
        return Ok(None);
    }

    let split = |combo: &[u64]| {
        (
            product(qubits, &m_ops, combo, 0),
            product(qubits, &s_ops, combo, m_ops.len()),
        )
    };

    // op * s0 and m0 carry the same bits, so they differ by a scalar. Moving
    // along a kernel element (m_k, s_k) multiplies that scalar by the sign
    // relating s_k to m_k; nothing else can change it.
    let (m0, s0) = split(&target.combo);
    let lhs = op.mul_unchecked(&s0);
    match lhs.phase_relative_to(&m0) {
        0 => Ok(Some(s0)),
        2 => {
            for combo in &kernel {
                let (mk, sk) = split(combo);
                if sk.phase_relative_to(&mk) == 2 {
                    return Ok(Some(s0.mul_unchecked(&sk)));
                }
            }
            Ok(None)
        }
        _ => Ok(None),
    }
}

fn reduce(row: &mut Row, pivots: &[(usize, Row)]) {
    // Later pivot rows never carry an earlier pivot bit, so the second pass
    // only confirms the row is fully reduced.
    loop {
        let mut changed = false;
        for (p, pr) in pivots {
            if test_bit(&row.bits, *p) {
                xor_into(&mut row.bits, &pr.bits);
                xor_into(&mut row.combo, &pr.combo);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}
