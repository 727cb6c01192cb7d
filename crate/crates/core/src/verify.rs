//! Stabilizer-level checks that GSM outcomes recover the intended logical
//! operators, on a single GSM and on one cell of the fusion network.
//!
//! Encoded qubits use the two-qubit repetition code: logical `X = X_a X_b`,
//! logical `Z = Z_a`, stabilizer `Z_a Z_b`. Every measurement outcome is
//! taken to be `+1`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::Result;
use crate::gsm::Architecture;
use crate::pauli::PauliOperator;
use crate::stabilizer::{contains_modulo, StabilizerGroup};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Operator that failed, in sparse form, when the check did not pass.
    pub counterexample: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub subject: String,
    pub architecture: Architecture,
    pub qubits: usize,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl VerificationReport {
    fn new(
        subject: String,
        architecture: Architecture,
        qubits: usize,
        checks: Vec<CheckResult>,
    ) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        VerificationReport {
            subject,
            architecture,
            qubits,
            checks,
            passed,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} ({} architecture, {} physical qubits): {}\n",
            self.subject,
            self.architecture,
            self.qubits,
            if self.passed { "PASS" } else { "FAIL" }
        );
        for c in &self.checks {
            let _ = write!(
                out,
                "  [{}] {}",
                if c.passed { "ok" } else { "FAIL" },
                c.name
            );
            if let Some(op) = &c.counterexample {
                let _ = write!(out, " (counterexample {op})");
            }
            out.push('\n');
        }
        out
    }
}

/// Physical qubits of one logical qubit.
#[derive(Debug, Clone, Copy)]
struct LogicalQubit {
    a: usize,
    /// Second repetition qubit; `None` for an unencoded qubit.
    b: Option<usize>,
}

impl LogicalQubit {
    fn tail(self) -> usize {
        self.b.unwrap_or(self.a)
    }
}

#[derive(Default)]
struct Register {
    qubits: usize,
}

impl Register {
    fn alloc(&mut self, encoded: bool) -> LogicalQubit {
        let a = self.qubits;
        self.qubits += 1;
        let b = encoded.then(|| {
            self.qubits += 1;
            a + 1
        });
        LogicalQubit { a, b }
    }
}

/// Sparse factor list builder.
struct Factors(Vec<(usize, char)>);

impl Factors {
    fn new() -> Self {
        Factors(Vec::new())
    }

    fn logical_x(mut self, q: LogicalQubit) -> Self {
        self.0.push((q.a, 'X'));
        if let Some(b) = q.b {
            self.0.push((b, 'X'));
        }
        self
    }

    fn logical_z(mut self, q: LogicalQubit) -> Self {
        self.0.push((q.a, 'Z'));
        self
    }

    fn phys(mut self, q: usize, c: char) -> Self {
        self.0.push((q, c));
        self
    }

    fn build(&self, qubits: usize, negative: bool) -> PauliOperator {
        PauliOperator::from_sparse(qubits, negative, &self.0)
            .expect("factors are single-qubit Paulis")
    }
}

fn repetition_factors(q: LogicalQubit) -> Option<Factors> {
    q.b.map(|b| Factors::new().phys(q.a, 'Z').phys(b, 'Z'))
}

/// `XX` and `ZZ` outcomes of BSMs between consecutive qubits of a chain.
fn chain_outcomes(chain: &[LogicalQubit], closed: bool) -> Vec<Factors> {
    let k = chain.len();
    let pairs = if closed { k } else { k - 1 };
    let mut out = Vec::new();
    for i in 0..pairs {
        let (left, right) = (chain[i].tail(), chain[(i + 1) % k].a);
        out.push(Factors::new().phys(left, 'X').phys(right, 'X'));
        out.push(Factors::new().phys(left, 'Z').phys(right, 'Z'));
    }
    out
}

fn check(name: impl Into<String>, op: &PauliOperator, passed: bool) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed,
        counterexample: (!passed).then(|| op.to_string()),
    }
}

/// Checks that one GSM on `arity` qubits yields `prod X` and every
/// neighbouring `Z_i Z_{i+1}` (plus the wrap-around pair for cyclic GSMs),
/// up to repetition-code stabilizers.
pub fn verify_gsm_reconstruction(
    architecture: Architecture,
    arity: u32,
) -> Result<VerificationReport> {
    if arity < 2 {
        return Err(crate::Error::validation(
            "k",
            "GSM arity must be at least 2",
        ));
    }
    let k = arity as usize;
    let mut reg = Register::default();
    let chain: Vec<LogicalQubit> = (0..k)
        .map(|i| {
            let encoded = match architecture {
                Architecture::Minimal => i != 0 && i != k - 1,
                Architecture::Cyclic => true,
            };
            reg.alloc(encoded)
        })
        .collect();
    let n = reg.qubits;

    let closed = architecture == Architecture::Cyclic;
    let outcomes: Vec<PauliOperator> = chain_outcomes(&chain, closed)
        .iter()
        .map(|f| f.build(n, false))
        .collect();
    let measured = StabilizerGroup::new(n, outcomes)?;
    let repetition: Vec<PauliOperator> = chain
        .iter()
        .filter_map(|&q| repetition_factors(q))
        .map(|f| f.build(n, false))
        .collect();

    let mut checks = Vec::new();
    let all_x = chain
        .iter()
        .fold(Factors::new(), |f, &q| f.logical_x(q))
        .build(n, false);
    let ok = contains_modulo(&measured, &repetition, &all_x)?.is_some();
    checks.push(check("prod X", &all_x, ok));

    let zz_pairs = if closed { k } else { k - 1 };
    for i in 0..zz_pairs {
        let j = (i + 1) % k;
        let zz = Factors::new()
            .logical_z(chain[i])
            .logical_z(chain[j])
            .build(n, false);
        let ok = contains_modulo(&measured, &repetition, &zz)?.is_some();
        checks.push(check(format!("Z{} Z{}", i + 1, j + 1), &zz, ok));
    }

    Ok(VerificationReport::new(
        format!("{k}-qubit GSM"),
        architecture,
        n,
        checks,
    ))
}

/// Deliberate defect used to confirm the checker can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Corruption {
    /// Flip the sign of one resource-state stabilizer `X_face Z_edge`.
    FlipResourceStabilizer,
}

type Site = [i32; 3];

/// Axis along which a site is special: the even coordinate of a face, the
/// odd coordinate of an edge.
fn special_axis(s: Site) -> usize {
    let odd: Vec<usize> = (0..3).filter(|&i| s[i].rem_euclid(2) == 1).collect();
    match odd.len() {
        1 => odd[0],
        2 => (0..3).find(|i| !odd.contains(i)).expect("one even axis"),
        _ => unreachable!("not a qubit site: {s:?}"),
    }
}

fn is_face(s: Site) -> bool {
    s.iter().filter(|c| c.rem_euclid(2) == 1).count() == 2
}

/// Neighbours of a site in cyclic order `+a, +b, -a, -b`.
fn ring(s: Site) -> [Site; 4] {
    let sp = special_axis(s);
    let others: Vec<usize> = (0..3).filter(|&i| i != sp).collect();
    let step = |axis: usize, delta: i32| {
        let mut t = s;
        t[axis] += delta;
        t
    };
    [
        step(others[0], 1),
        step(others[1], 1),
        step(others[0], -1),
        step(others[1], -1),
    ]
}

fn in_cell(s: Site) -> bool {
    s.iter().all(|&c| (0..=2).contains(&c))
}

/// Resource state between a face site and an edge site.
struct ResourceState {
    face: Site,
    edge: Site,
    face_end: LogicalQubit,
    edge_end: LogicalQubit,
    internal: bool,
}

/// Encoded ends at a site are an adjacent pair (minimal) or all four.
fn valid_minimal_pattern(encoded: [bool; 4]) -> bool {
    encoded.iter().filter(|&&e| e).count() == 2
        && (0..4).any(|p| encoded[p] && encoded[(p + 1) % 4])
}

struct CellInstance {
    qubits: usize,
    resource_states: Vec<ResourceState>,
    /// GSM chain per measured site.
    chains: BTreeMap<Site, Vec<LogicalQubit>>,
}

fn build_cell(architecture: Architecture) -> CellInstance {
    let mut sites = Vec::new();
    for x in 0..=2 {
        for y in 0..=2 {
            for t in 0..=2 {
                let s = [x, y, t];
                let odd = s.iter().filter(|c| *c % 2 == 1).count();
                if odd == 1 || odd == 2 {
                    sites.push(s);
                }
            }
        }
    }
    let edges: Vec<Site> = sites.iter().copied().filter(|&s| !is_face(s)).collect();

    // Which end of each resource state is encoded, keyed by (face, edge).
    let mut face_encoded: BTreeMap<(Site, Site), bool> = BTreeMap::new();
    for &e in &edges {
        let nbrs = ring(e);
        match architecture {
            Architecture::Cyclic => {
                for f in nbrs {
                    face_encoded.insert((f, e), true);
                }
            }
            Architecture::Minimal => {
                // An internal face encodes its own end towards the +a, +b
                // neighbours; external resource states are then oriented so
                // the edge sees an adjacent encoded pair.
                let fixed: Vec<Option<bool>> = nbrs
                    .iter()
                    .map(|&f| {
                        in_cell(f).then(|| {
                            let r = ring(f);
                            e != r[0] && e != r[1]
                        })
                    })
                    .collect();
                let free: Vec<usize> = (0..4).filter(|&p| fixed[p].is_none()).collect();
                let choice = (0u32..1 << free.len())
                    .map(|mask| {
                        let mut pattern = [false; 4];
                        for p in 0..4 {
                            pattern[p] = fixed[p].unwrap_or(false);
                        }
                        for (i, &p) in free.iter().enumerate() {
                            pattern[p] = mask >> i & 1 == 1;
                        }
                        pattern
                    })
                    .find(|&pattern| valid_minimal_pattern(pattern))
                    .expect("an adjacent encoded pair is always reachable");
                for (p, &f) in nbrs.iter().enumerate() {
                    face_encoded.insert((f, e), !choice[p]);
                }
            }
        }
    }

    let mut reg = Register::default();
    let mut resource_states = Vec::new();
    for (&(face, edge), &fe) in &face_encoded {
        let cyclic = architecture == Architecture::Cyclic;
        let face_end = reg.alloc(cyclic || fe);
        let edge_end = reg.alloc(cyclic || !fe);
        resource_states.push(ResourceState {
            face,
            edge,
            face_end,
            edge_end,
            internal: in_cell(face),
        });
    }

    let mut chains = BTreeMap::new();
    for &s in &sites {
        let ends: Vec<LogicalQubit> = ring(s)
            .iter()
            .map(|&nb| {
                let rs = resource_states
                    .iter()
                    .find(|r| (r.face, r.edge) == (s, nb) || (r.face, r.edge) == (nb, s))
                    .expect("every neighbour of a cell site carries a resource state");
                if rs.face == s {
                    rs.face_end
                } else {
                    rs.edge_end
                }
            })
            .collect();
        let chain = match architecture {
            Architecture::Cyclic => ends,
            Architecture::Minimal => {
                let encoded: Vec<bool> = ends.iter().map(|q| q.b.is_some()).collect();
                // Unencoded pair at positions (u, u+1); the chain starts at u+1.
                let u = (0..4)
                    .find(|&p| !encoded[p] && !encoded[(p + 1) % 4])
                    .expect("adjacent unencoded pair");
                (1..=4).map(|i| ends[(u + i) % 4]).collect()
            }
        };
        chains.insert(s, chain);
    }

    CellInstance {
        qubits: reg.qubits,
        resource_states,
        chains,
    }
}

/// Checks that the GSM outcomes on one cell contain the cell's check
/// operator, and for cyclic GSMs the per-edge redundancy operators.
pub fn verify_check_operator(
    architecture: Architecture,
    corruption: Option<Corruption>,
) -> Result<VerificationReport> {
    let cell = build_cell(architecture);
    let n = cell.qubits;

    let mut resource = Vec::new();
    let mut repetition = Vec::new();
    let mut corrupted = false;
    for rs in &cell.resource_states {
        let flip =
            corruption == Some(Corruption::FlipResourceStabilizer) && rs.internal && !corrupted;
        corrupted |= flip;
        resource.push(
            Factors::new()
                .logical_x(rs.face_end)
                .logical_z(rs.edge_end)
                .build(n, flip),
        );
        resource.push(
            Factors::new()
                .logical_z(rs.face_end)
                .logical_x(rs.edge_end)
                .build(n, false),
        );
        for q in [rs.face_end, rs.edge_end] {
            if let Some(f) = repetition_factors(q) {
                repetition.push(f.build(n, false));
            }
        }
    }
    let resource_group = StabilizerGroup::new(n, [resource, repetition.clone()].concat())?;

    let closed = architecture == Architecture::Cyclic;
    let outcomes: Vec<PauliOperator> = cell
        .chains
        .values()
        .flat_map(|chain| chain_outcomes(chain, closed))
        .map(|f| f.build(n, false))
        .collect();
    let measured = StabilizerGroup::new(n, outcomes)?;

    let check_op = cell
        .resource_states
        .iter()
        .filter(|rs| rs.internal)
        .fold(Factors::new(), |f, rs| {
            f.logical_x(rs.face_end).logical_z(rs.edge_end)
        })
        .build(n, false);

    let mut checks = vec![check(
        "cell check operator in resource group",
        &check_op,
        resource_group.contains(&check_op),
    )];
    let representative = contains_modulo(&measured, &repetition, &check_op)?;
    checks.push(check(
        "cell check operator in outcome group up to repetition stabilizers",
        &check_op,
        representative.is_some(),
    ));

    if closed {
        let mut edge_ops = Vec::new();
        for (&site, chain) in &cell.chains {
            if is_face(site) {
                continue;
            }
            let op = chain
                .iter()
                .fold(Factors::new(), |f, &q| {
                    f.phys(q.a, 'Z')
                        .phys(q.b.expect("cyclic ends are encoded"), 'Z')
                })
                .build(n, false);
            edge_ops.push((site, op));
        }
        let all_in_r = edge_ops.iter().find(|(_, op)| !resource_group.contains(op));
        let all_in_m = edge_ops.iter().find(|(_, op)| !measured.contains(op));
        let fallback = &edge_ops[0].1;
        checks.push(check(
            "edge redundancy operators in resource group",
            all_in_r.map_or(fallback, |(_, op)| op),
            all_in_r.is_none(),
        ));
        checks.push(check(
            "edge redundancy operators in outcome group",
            all_in_m.map_or(fallback, |(_, op)| op),
            all_in_m.is_none(),
        ));
        let span = StabilizerGroup::new(n, vec![check_op.clone()])?;
        let dependent = edge_ops
            .iter()
            .find(|(_, op)| span.contains(op) || span.contains(&op.negated()));
        checks.push(check(
            "edge redundancy operators independent of the cell check",
            dependent.map_or(fallback, |(_, op)| op),
            dependent.is_none(),
        ));
    }

    let subject = match corruption {
        Some(_) => "unit cell with a corrupted resource state".to_string(),
        None => "unit cell".to_string(),
    };
    Ok(VerificationReport::new(subject, architecture, n, checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gsm_reconstruction_small_arities() {
        for arch in [Architecture::Minimal, Architecture::Cyclic] {
            for k in 2..=6 {
                let report = verify_gsm_reconstruction(arch, k).unwrap();
                assert!(report.passed, "{}", report.to_text());
                let expected = 1 + if arch == Architecture::Cyclic {
                    k
                } else {
                    k - 1
                } as usize;
                assert_eq!(report.checks.len(), expected);
            }
        }
        assert!(verify_gsm_reconstruction(Architecture::Minimal, 1).is_err());
    }

    #[test]
    fn cell_layout() {
        for arch in [Architecture::Minimal, Architecture::Cyclic] {
            let cell = build_cell(arch);
            assert_eq!(cell.resource_states.len(), 48);
            assert_eq!(
                cell.resource_states.iter().filter(|r| r.internal).count(),
                24
            );
            assert_eq!(cell.chains.len(), 18);
            for rs in &cell.resource_states {
                let encoded = [rs.face_end.b.is_some(), rs.edge_end.b.is_some()];
                match arch {
                    Architecture::Minimal => assert_eq!(encoded.iter().filter(|e| **e).count(), 1),
                    Architecture::Cyclic => assert_eq!(encoded, [true, true]),
                }
            }
            if arch == Architecture::Minimal {
                for chain in cell.chains.values() {
                    let pattern: Vec<bool> = chain.iter().map(|q| q.b.is_some()).collect();
                    assert_eq!(pattern, [false, true, true, false]);
                }
            }
        }
    }

    #[test]
    fn cell_check_operator_passes() {
        for arch in [Architecture::Minimal, Architecture::Cyclic] {
            let report = verify_check_operator(arch, None).unwrap();
            assert!(report.passed, "{}", report.to_text());
        }
        assert_eq!(
            verify_check_operator(Architecture::Cyclic, None)
                .unwrap()
                .checks
                .len(),
            5
        );
    }

    #[test]
    fn corruption_is_detected() {
        for arch in [Architecture::Minimal, Architecture::Cyclic] {
            let report =
                verify_check_operator(arch, Some(Corruption::FlipResourceStabilizer)).unwrap();
            assert!(!report.passed);
            let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed).collect();
            assert_eq!(failed.len(), 1);
            assert!(failed[0].counterexample.is_some());
            assert!(report.to_text().contains("FAIL"));
        }
    }
}
