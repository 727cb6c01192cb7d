//! Erasure probabilities and efficiencies of encoded GHZ-state measurements
//! (GSMs) assembled from encoded BSMs.
//!
//! A minimal GSM on `k` qubits chains `k - 1` BSMs; a cyclic GSM closes the
//! chain with a `k`-th BSM. The `prod X` outcome is the product of every
//! BSM's `XX`, and each `ZZ` outcome is read off a single BSM.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bsm::{qpc_probs, BsmModel, BsmOutcomeProbs, Convention, Protocol};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Minimal,
    Cyclic,
}

impl Architecture {
    /// Number of BSMs in a GSM of the given arity.
    pub fn bsm_count(self, arity: u32) -> u32 {
        match self {
            Architecture::Minimal => arity - 1,
            Architecture::Cyclic => arity,
        }
    }

    /// Convention giving the higher threshold for this architecture.
    pub fn default_convention(self) -> Convention {
        match self {
            Architecture::Minimal => Convention::Hadamard,
            Architecture::Cyclic => Convention::Shor,
        }
    }

    /// Dual-rail photons in one encoded two-qubit resource state.
    pub fn photons_per_resource_state(self, n: u32, m: u32) -> u32 {
        match self {
            Architecture::Minimal => 3 * n * m,
            Architecture::Cyclic => 4 * n * m,
        }
    }
}

impl std::fmt::Display for Architecture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Architecture::Minimal => "minimal",
            Architecture::Cyclic => "cyclic",
        })
    }
}

impl std::str::FromStr for Architecture {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "minimal" => Ok(Architecture::Minimal),
            "cyclic" => Ok(Architecture::Cyclic),
            _ => Err(Error::validation(
                "architecture",
                format!("unknown architecture {s:?}"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GsmSpec {
    pub architecture: Architecture,
    pub arity: u32,
    pub bsm: BsmModel,
}

impl GsmSpec {
    pub fn new(architecture: Architecture, arity: u32, bsm: BsmModel) -> Result<Self> {
        let spec = GsmSpec {
            architecture,
            arity,
            bsm,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.arity < 2 {
            return Err(Error::validation(
                "k",
                format!("GSM arity must be at least 2, got {}", self.arity),
            ));
        }
        self.bsm.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GsmErasureProbs {
    /// Erasure probability of the `prod X` outcome.
    pub p_erase_x: f64,
    /// Erasure probability of any single `ZZ` outcome.
    pub p_erase_zz: f64,
}

pub fn gsm_erasure_probs(spec: &GsmSpec) -> Result<GsmErasureProbs> {
    spec.validate()?;
    let p = qpc_probs(&spec.bsm)?;
    Ok(erasure_from_bsm(spec.architecture, spec.arity, &p))
}

pub(crate) fn erasure_from_bsm(
    architecture: Architecture,
    arity: u32,
    p: &BsmOutcomeProbs,
) -> GsmErasureProbs {
    let bsms = architecture.bsm_count(arity) as i32;
    GsmErasureProbs {
        p_erase_x: (1.0 - p.p_xx.powi(bsms)).clamp(0.0, 1.0),
        p_erase_zz: (1.0 - p.p_zz).clamp(0.0, 1.0),
    }
}

/// Probability that every outcome of the GSM is recovered.
pub fn gsm_efficiency(spec: &GsmSpec) -> Result<f64> {
    spec.validate()?;
    let p = qpc_probs(&spec.bsm)?;
    let k = spec.arity as i32;
    let joint = p.p_joint;
    let value = match spec.architecture {
        Architecture::Minimal => joint.powi(k - 1),
        // All k BSMs must give XX; at most one may miss its ZZ.
        Architecture::Cyclic => {
            joint.powi(k) + f64::from(spec.arity) * joint.powi(k - 1) * (p.p_xx - joint).max(0.0)
        }
    };
    Ok(value.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// Full GSM efficiency.
    Efficiency,
    /// Probability of recovering the `prod X` outcome.
    XRecovery,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizedJ {
    pub j: u32,
    pub value: f64,
}

/// Exhaustive scan over the feed-forward depth `j in 0..m`. Ties go to the
/// smallest `j`. The `j` stored in `spec.bsm` is ignored.
pub fn optimize_j(spec: &GsmSpec, objective: Objective) -> Result<OptimizedJ> {
    if spec.bsm.protocol != Protocol::Active {
        return Err(Error::validation(
            "protocol",
            "feed-forward optimisation needs the active protocol",
        ));
    }
    let mut best: Option<OptimizedJ> = None;
    for j in 0..spec.bsm.m {
        let mut candidate = *spec;
        candidate.bsm.j = j;
        let value = match objective {
            Objective::Efficiency => gsm_efficiency(&candidate)?,
            Objective::XRecovery => 1.0 - gsm_erasure_probs(&candidate)?.p_erase_x,
        };
        if best.is_none_or(|b| value > b.value) {
            best = Some(OptimizedJ { j, value });
        }
    }
    best.ok_or_else(|| Error::validation("m", "must be at least 1"))
}

/// Loss rates used as table columns.
pub const TABLE_ETAS: [f64; 9] = [0.0, 0.001, 0.01, 0.02, 0.03, 0.04, 0.05, 0.08, 0.1];

/// Default cut below which table entries are left blank.
pub const DEFAULT_TABLE_FLOOR: f64 = 0.70;

/// The four published 4-qubit GSM efficiency tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableId {
    /// Static, cyclic.
    I,
    /// Static, minimal.
    II,
    /// Active, cyclic.
    III,
    /// Active, minimal.
    IV,
}

impl std::str::FromStr for TableId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(TableId::I),
            "II" | "2" => Ok(TableId::II),
            "III" | "3" => Ok(TableId::III),
            "IV" | "4" => Ok(TableId::IV),
            _ => Err(Error::validation(
                "table",
                format!("unknown table {s:?}; expected I, II, III or IV"),
            )),
        }
    }
}

impl std::fmt::Display for TableId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TableId::I => "I",
            TableId::II => "II",
            TableId::III => "III",
            TableId::IV => "IV",
        })
    }
}

fn block_rows(
    ns: std::ops::RangeInclusive<u32>,
    ms: std::ops::RangeInclusive<u32>,
) -> Vec<(u32, u32)> {
    ns.flat_map(|n| ms.clone().map(move |m| (n, m))).collect()
}

impl TableId {
    pub fn architecture(self) -> Architecture {
        match self {
            TableId::I | TableId::III => Architecture::Cyclic,
            TableId::II | TableId::IV => Architecture::Minimal,
        }
    }

    pub fn protocol(self) -> Protocol {
        match self {
            TableId::I | TableId::II => Protocol::Static,
            TableId::III | TableId::IV => Protocol::Active,
        }
    }

    /// QPC sizes `(n, m)` listed in the table, in print order.
    pub fn rows(self) -> Vec<(u32, u32)> {
        match self {
            TableId::I => {
                let mut rows = vec![(2, 2), (2, 3)];
                rows.extend(block_rows(3..=7, 1..=4));
                rows
            }
            TableId::II => block_rows(4..=7, 1..=4),
            TableId::III => {
                let mut rows = vec![(1, 3), (1, 4), (1, 5), (2, 2), (2, 3), (2, 4), (2, 5)];
                rows.extend(block_rows(3..=4, 1..=4));
                rows.extend(block_rows(5..=6, 1..=5));
                rows.extend(block_rows(7..=7, 1..=4));
                rows
            }
            TableId::IV => {
                let mut rows = vec![(1, 4), (2, 2), (2, 3), (3, 2), (3, 3), (3, 4)];
                rows.extend(block_rows(4..=7, 1..=4));
                rows
            }
        }
    }

    pub fn request(self, floor: f64) -> TableRequest {
        TableRequest {
            architecture: self.architecture(),
            protocol: self.protocol(),
            convention: Convention::Shor,
            arity: 4,
            rows: self.rows(),
            etas: TABLE_ETAS.to_vec(),
            floor,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRequest {
    pub architecture: Architecture,
    pub protocol: Protocol,
    pub convention: Convention,
    pub arity: u32,
    pub rows: Vec<(u32, u32)>,
    pub etas: Vec<f64>,
    /// Entries below this efficiency are blanked.
    pub floor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableCell {
    pub eta: f64,
    /// Optimal feed-forward depth; `None` for the static protocol.
    pub j: Option<u32>,
    /// Unrounded efficiency.
    pub efficiency: f64,
    /// False when the entry falls below the floor.
    pub shown: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub n: u32,
    pub m: u32,
    pub cells: Vec<TableCell>,
}

/// Computes a GSM efficiency table. Active-protocol cells optimise `j`
/// independently for every `(n, m, eta)`.
pub fn emit_efficiency_table(request: &TableRequest) -> Result<Vec<TableRow>> {
    if request.etas.is_empty() {
        return Ok(Vec::new());
    }
    request
        .rows
        .iter()
        .map(|&(n, m)| {
            let cells = request
                .etas
                .iter()
                .map(|&eta| {
                    let bsm = BsmModel::new(request.protocol, n, m, 0, request.convention, eta)?;
                    let spec = GsmSpec::new(request.architecture, request.arity, bsm)?;
                    let (j, efficiency) = match request.protocol {
                        Protocol::Static => (None, gsm_efficiency(&spec)?),
                        Protocol::Active => {
                            let best = optimize_j(&spec, Objective::Efficiency)?;
                            (Some(best.j), best.value)
                        }
                    };
                    Ok(TableCell {
                        eta,
                        j,
                        efficiency,
                        shown: efficiency >= request.floor,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(TableRow { n, m, cells })
        })
        .collect()
}

/// Long-format CSV: one line per shown cell.
pub fn table_to_csv(rows: &[TableRow], with_j: bool) -> String {
    let mut out = String::from(if with_j {
        "n,m,j,eta,efficiency\n"
    } else {
        "n,m,eta,efficiency\n"
    });
    for row in rows {
        for cell in row.cells.iter().filter(|c| c.shown) {
            if with_j {
                let j = cell.j.map(|j| j.to_string()).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{:.4}",
                    row.n, row.m, j, cell.eta, cell.efficiency
                );
            } else {
                let _ = writeln!(
                    out,
                    "{},{},{},{:.4}",
                    row.n, row.m, cell.eta, cell.efficiency
                );
            }
        }
    }
    out
}

/// Aligned text table in the published layout.
pub fn table_to_text(rows: &[TableRow], etas: &[f64]) -> String {
    let mut out = format!("{:<8}", "(n,m)");
    for eta in etas {
        let _ = write!(out, " {:>7}", eta);
    }
    out.push('\n');
    for row in rows {
        let _ = write!(out, "{:<8}", format!("({},{})", row.n, row.m));
        for cell in &row.cells {
            if cell.shown {
                let _ = write!(out, " {:>7.4}", cell.efficiency);
            } else {
                let _ = write!(out, " {:>7}", "");
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(arch: Architecture, k: u32, bsm: BsmModel) -> GsmSpec {
        GsmSpec::new(arch, k, bsm).unwrap()
    }

    #[test]
    fn erasure_examples() {
        let bsm = BsmModel::static_(1, 1, Convention::Hadamard, 0.0).unwrap();
        let e = gsm_erasure_probs(&spec(Architecture::Minimal, 4, bsm)).unwrap();
        assert_eq!(e.p_erase_x, 0.875);
        assert_eq!(e.p_erase_zz, 0.0);

        for arch in [Architecture::Minimal, Architecture::Cyclic] {
            let bsm = BsmModel::active(3, 3, 1, Convention::Shor, 1.0).unwrap();
            let e = gsm_erasure_probs(&spec(arch, 3, bsm)).unwrap();
            assert_eq!((e.p_erase_x, e.p_erase_zz), (1.0, 1.0));
        }

        let p = BsmOutcomeProbs {
            p_xx: 0.9,
            p_zz: 0.5,
            p_joint: 0.45,
        };
        let e = erasure_from_bsm(Architecture::Cyclic, 2, &p);
        assert!((e.p_erase_x - 0.19).abs() < 1e-15);
    }

    #[test]
    fn efficiency_anchors() {
        let cyc = |bsm| gsm_efficiency(&spec(Architecture::Cyclic, 4, bsm)).unwrap();
        let min = |bsm| gsm_efficiency(&spec(Architecture::Minimal, 4, bsm)).unwrap();
        assert!(
            (cyc(BsmModel::static_(3, 1, Convention::Shor, 0.0).unwrap()) - 0.9211).abs() < 5e-5
        );
        assert!(
            (cyc(BsmModel::static_(3, 2, Convention::Shor, 0.05).unwrap()) - 0.7247).abs() < 5e-5
        );
        let v = min(BsmModel::static_(4, 1, Convention::Shor, 0.0).unwrap());
        assert!((v - (15.0f64 / 16.0).powi(3)).abs() < 1e-12);
        assert!((v - 0.8240).abs() < 5e-5);
    }

    #[test]
    fn optimize_j_examples() {
        let s = spec(
            Architecture::Cyclic,
            4,
            BsmModel::active(2, 2, 0, Convention::Shor, 0.0).unwrap(),
        );
        let best = optimize_j(&s, Objective::Efficiency).unwrap();
        assert_eq!(best.j, 1);
        assert!((best.value - 0.9785).abs() < 5e-5);

        let s = spec(
            Architecture::Minimal,
            4,
            BsmModel::active(4, 1, 0, Convention::Shor, 0.0).unwrap(),
        );
        let best = optimize_j(&s, Objective::Efficiency).unwrap();
        let stat = gsm_efficiency(&spec(
            Architecture::Minimal,
            4,
            BsmModel::static_(4, 1, Convention::Shor, 0.0).unwrap(),
        ))
        .unwrap();
        assert_eq!(best.j, 0);
        assert_eq!(best.value, stat);

        let s = spec(
            Architecture::Cyclic,
            4,
            BsmModel::active(3, 4, 0, Convention::Shor, 1.0).unwrap(),
        );
        for objective in [Objective::Efficiency, Objective::XRecovery] {
            let best = optimize_j(&s, objective).unwrap();
            assert_eq!((best.j, best.value), (0, 0.0));
        }

        let s = spec(
            Architecture::Cyclic,
            4,
            BsmModel::static_(2, 2, Convention::Shor, 0.0).unwrap(),
        );
        assert!(optimize_j(&s, Objective::Efficiency).is_err());
    }

    #[test]
    fn table_layout() {
        let mut request = TableId::I.request(DEFAULT_TABLE_FLOOR);
        request.etas.clear();
        assert!(emit_efficiency_table(&request).unwrap().is_empty());

        let rows = emit_efficiency_table(&TableId::III.request(0.0)).unwrap();
        assert_eq!(rows.len(), TableId::III.rows().len());
        assert!(rows
            .iter()
            .all(|r| r.cells.iter().all(|c| c.j.is_some_and(|j| j < r.m))));

        let csv = table_to_csv(&rows[..1], true);
        assert!(csv.starts_with("n,m,j,eta,efficiency\n1,3,"));
        assert_eq!(csv.lines().count(), 1 + TABLE_ETAS.len());
    }

    #[test]
    fn arity_validation() {
        let bsm = BsmModel::static_(1, 1, Convention::Shor, 0.0).unwrap();
        assert!(GsmSpec::new(Architecture::Minimal, 1, bsm).is_err());
    }
}
