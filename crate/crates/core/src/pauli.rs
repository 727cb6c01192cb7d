//! Binary-symplectic Pauli operators with sign tracking.
//!
//! An operator is stored as `i^r X^x Z^z`. The Hermitian Pauli with bits
//! `(x, z)` is `i^(x.z) X^x Z^z` (so `Y = iXZ`); its sign is read off the
//! difference between `r` and `x.z`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    qubits: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    /// Exponent of `i` in the `X^x Z^z` form, mod 4.
    phase: u8,
}

fn words(qubits: usize) -> usize {
    qubits.div_ceil(64)
}

fn popcount_and(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(p, q)| (p & q).count_ones()).sum()
}

impl PauliOperator {
    pub fn identity(qubits: usize) -> Self {
        PauliOperator {
            qubits,
            x: vec![0; words(qubits)],
            z: vec![0; words(qubits)],
            phase: 0,
        }
    }

    /// Builds `sign * P_{q1} P_{q2} ...` from `(qubit, 'X' | 'Y' | 'Z')` pairs.
    /// Repeated qubits are multiplied left to right.
    pub fn from_sparse(qubits: usize, negative: bool, factors: &[(usize, char)]) -> Result<Self> {
        let mut op = PauliOperator::identity(qubits);
        for &(q, c) in factors {
            if q >= qubits {
                return Err(Error::validation(
                    "qubit",
                    format!("index {q} out of range for {qubits} qubits"),
                ));
            }
            let single = PauliOperator::single(qubits, q, c)?;
            op = op.mul_unchecked(&single);
        }
        if negative {
            op.phase = (op.phase + 2) % 4;
        }
        if !op.is_hermitian() {
            return Err(Error::ImaginaryPhase);
        }
        Ok(op)
    }

    fn single(qubits: usize, q: usize, c: char) -> Result<Self> {
        let mut op = PauliOperator::identity(qubits);
        let (w, b) = (q / 64, 1u64 << (q % 64));
        match c.to_ascii_uppercase() {
            'I' => {}
            'X' => op.x[w] |= b,
            'Z' => op.z[w] |= b,
            'Y' => {
                op.x[w] |= b;
                op.z[w] |= b;
                op.phase = 1;
            }
            other => {
                return Err(Error::validation(
                    "pauli",
                    format!("unknown Pauli letter {other:?}"),
                ))
            }
        }
        Ok(op)
    }

    /// Parses a dense label such as `"-XZIY"` (qubit 0 first).
    pub fn parse(label: &str) -> Result<Self> {
        let (negative, body) = match label.as_bytes().first() {
            Some(b'-') => (true, &label[1..]),
            Some(b'+') => (false, &label[1..]),
            _ => (false, label),
        };
        let factors: Vec<(usize, char)> = body.chars().enumerate().collect();
        PauliOperator::from_sparse(factors.len(), negative, &factors)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn x_bit(&self, q: usize) -> bool {
        self.x[q / 64] >> (q % 64) & 1 == 1
    }

    pub fn z_bit(&self, q: usize) -> bool {
        self.z[q / 64] >> (q % 64) & 1 == 1
    }

    pub(crate) fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub(crate) fn z_words(&self) -> &[u64] {
        &self.z
    }

    fn xz_overlap(&self) -> u32 {
        popcount_and(&self.x, &self.z)
    }

    pub fn is_hermitian(&self) -> bool {
        (self.phase as u32 + 4 - self.xz_overlap() % 4).is_multiple_of(2)
    }

    /// `+1` or `-1`; `None` for operators with an imaginary phase.
    pub fn sign(&self) -> Option<i8> {
        match (self.phase as u32 + 4 - self.xz_overlap() % 4) % 4 {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        out.phase = (out.phase + 2) % 4;
        out
    }

    pub fn is_identity_up_to_sign(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    pub fn commutes_with(&self, other: &PauliOperator) -> bool {
        (popcount_and(&self.x, &other.z) + popcount_and(&self.z, &other.x)).is_multiple_of(2)
    }

    /// Same Pauli bits, ignoring phase.
    pub fn same_support(&self, other: &PauliOperator) -> bool {
        self.x == other.x && self.z == other.z
    }

    /// Product `self * other` without the Hermiticity check.
    pub(crate) fn mul_unchecked(&self, other: &PauliOperator) -> PauliOperator {
        debug_assert_eq!(self.qubits, other.qubits);
        // Z^z1 X^x2 = (-1)^(z1.x2) X^x2 Z^z1
        let swap = popcount_and(&self.z, &other.x);
        let phase = ((self.phase as u32 + other.phase as u32 + 2 * swap) % 4) as u8;
        PauliOperator {
            qubits: self.qubits,
            x: self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect(),
            z: self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect(),
            phase,
        }
    }

    /// Product of two Hermitian Paulis. Fails if they anticommute, which
    /// would leave a phase of `±i`.
    pub fn multiply(&self, other: &PauliOperator) -> Result<PauliOperator> {
        if self.qubits != other.qubits {
            return Err(Error::validation(
                "qubits",
                format!("operator sizes differ: {} vs {}", self.qubits, other.qubits),
            ));
        }
        let out = self.mul_unchecked(other);
        if out.is_hermitian() {
            Ok(out)
        } else {
            Err(Error::ImaginaryPhase)
        }
    }

    /// Scalar `s` with `self = s * other` for operators with identical bits,
    /// as a power of `i`.
    pub(crate) fn phase_relative_to(&self, other: &PauliOperator) -> u8 {
        debug_assert!(self.same_support(other));
        (self.phase + 4 - other.phase) % 4
    }

    pub fn letter(&self, q: usize) -> char {
        match (self.x_bit(q), self.z_bit(q)) {
            (false, false) => 'I',
            (true, false) => 'X',
            (false, true) => 'Z',
            (true, true) => 'Y',
        }
    }

    pub fn to_dense_string(&self) -> String {
        let mut out = String::with_capacity(self.qubits + 1);
        out.push(match self.sign() {
            Some(-1) => '-',
            Some(_) => '+',
            None => 'i',
        });
        out.extend((0..self.qubits).map(|q| self.letter(q)));
        out
    }
}

/// Sparse form, e.g. `-X0 Y3 Z17`.
impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.sign() {
            Some(-1) => "-",
            Some(_) => "+",
            None => "?",
        };
        f.write_str(sign)?;
        let mut first = true;
        for q in 0..self.qubits {
            let c = self.letter(q);
            if c != 'I' {
                if !first {
                    f.write_str(" ")?;
                }
                write!(f, "{c}{q}")?;
                first = false;
            }
        }
        if first {
            f.write_str("I")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliOperator({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(label: &str) -> PauliOperator {
        PauliOperator::parse(label).unwrap()
    }

    /// 2x2 complex matrices for the single-qubit oracle.
    type C = (f64, f64);
    type M2 = [[C; 2]; 2];

    fn cmul(a: C, b: C) -> C {
        (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
    }

    fn matrix(c: char) -> M2 {
        let (o, z, i) = ((1.0, 0.0), (0.0, 0.0), (0.0, 1.0));
        match c {
            'I' => [[o, z], [z, o]],
            'X' => [[z, o], [o, z]],
            'Y' => [[z, (0.0, -1.0)], [i, z]],
            'Z' => [[o, z], [z, (-1.0, 0.0)]],
            _ => unreachable!(),
        }
    }

    fn mat_mul(a: &M2, b: &M2) -> M2 {
        let mut out = [[(0.0, 0.0); 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                for k in 0..2 {
                    let t = cmul(a[r][k], b[k][c]);
                    out[r][c].0 += t.0;
                    out[r][c].1 += t.1;
                }
            }
        }
        out
    }

    fn kron(a: &[Vec<C>], b: &M2) -> Vec<Vec<C>> {
        let n = a.len();
        let mut out = vec![vec![(0.0, 0.0); 2 * n]; 2 * n];
        for r in 0..n {
            for c in 0..n {
                for rr in 0..2 {
                    for cc in 0..2 {
                        out[2 * r + rr][2 * c + cc] = cmul(a[r][c], b[rr][cc]);
                    }
                }
            }
        }
        out
    }

    fn dense(op: &PauliOperator) -> Vec<Vec<C>> {
        let mut m = vec![vec![(1.0, 0.0)]];
        for q in 0..op.qubits() {
            m = kron(&m, &matrix(op.letter(q)));
        }
        let s = f64::from(op.sign().unwrap());
        m.iter()
            .map(|row| row.iter().map(|&(re, im)| (s * re, s * im)).collect())
            .collect()
    }

    fn dense_mul(a: &[Vec<C>], b: &[Vec<C>]) -> Vec<Vec<C>> {
        let n = a.len();
        let mut out = vec![vec![(0.0, 0.0); n]; n];
        for r in 0..n {
            for c in 0..n {
                for k in 0..n {
                    let t = cmul(a[r][k], b[k][c]);
                    out[r][c].0 += t.0;
                    out[r][c].1 += t.1;
                }
            }
        }
        out
    }

    fn all_labels(qubits: usize) -> Vec<String> {
        let mut out = vec![String::new()];
        for _ in 0..qubits {
            out = out
                .iter()
                .flat_map(|s| "IXYZ".chars().map(move |c| format!("{s}{c}")))
                .collect();
        }
        out.into_iter()
            .flat_map(|s| [format!("+{s}"), format!("-{s}")])
            .collect()
    }

    #[test]
    fn examples() {
        assert_eq!(p("X").multiply(&p("X")).unwrap(), p("I"));
        assert_eq!(p("XX").multiply(&p("ZZ")).unwrap(), p("-YY"));
        for label in ["X", "-Y", "Z", "+I"] {
            assert_eq!(p("I").multiply(&p(label)).unwrap(), p(label));
        }
        assert!(matches!(
            p("X").multiply(&p("Z")),
            Err(Error::ImaginaryPhase)
        ));
        assert!(p("X").multiply(&p("XX")).is_err());
    }

    #[test]
    fn matches_matrix_products_on_small_registers() {
        for qubits in 1..=2 {
            let labels = all_labels(qubits);
            for a in &labels {
                for b in &labels {
                    let (pa, pb) = (p(a), p(b));
                    let want = dense_mul(&dense(&pa), &dense(&pb));
                    match pa.multiply(&pb) {
                        Ok(prod) => {
                            assert!(pa.commutes_with(&pb));
                            let got = dense(&prod);
                            for (r1, r2) in got.iter().zip(&want) {
                                for (x, y) in r1.iter().zip(r2) {
                                    assert!(
                                        (x.0 - y.0).abs() < 1e-12 && (x.1 - y.1).abs() < 1e-12,
                                        "{a}*{b}"
                                    );
                                }
                            }
                        }
                        Err(_) => assert!(!pa.commutes_with(&pb), "{a}*{b}"),
                    }
                }
            }
        }
    }

    #[test]
    fn single_qubit_matrix_table() {
        // X Z = -iY, checked through the unchecked product.
        let prod = p("X").mul_unchecked(&p("Z"));
        let m = mat_mul(&matrix('X'), &matrix('Z'));
        assert_eq!(prod.sign(), None);
        assert_eq!(m[0][1], (-1.0, 0.0));
    }

    #[test]
    fn associativity_exhaustive_two_qubits() {
        let labels = all_labels(2);
        let ops: Vec<_> = labels.iter().map(|l| p(l)).collect();
        for a in &ops {
            for b in ops.iter().step_by(3) {
                for c in ops.iter().step_by(5) {
                    let left = a.mul_unchecked(b).mul_unchecked(c);
                    let right = a.mul_unchecked(&b.mul_unchecked(c));
                    assert_eq!(left, right);
                }
            }
        }
    }

    #[test]
    fn display_is_sparse() {
        assert_eq!(p("-XIZY").to_string(), "-X0 Z2 Y3");
        assert_eq!(p("II").to_string(), "+I");
        assert_eq!(p("-XIZY").to_dense_string(), "-XIZY");
    }

    #[test]
    fn wide_registers_cross_word_boundaries() {
        let a = PauliOperator::from_sparse(130, false, &[(0, 'X'), (64, 'Z'), (129, 'Y')]).unwrap();
        let b = PauliOperator::from_sparse(130, true, &[(64, 'X'), (129, 'Y')]).unwrap();
        assert!(!a.commutes_with(&b));
        let c = PauliOperator::from_sparse(130, false, &[(129, 'Z')]).unwrap();
        assert!(!a.commutes_with(&c));
        assert_eq!(a.weight(), 3);
    }
}
