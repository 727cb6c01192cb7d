//! Reference parameter sets with their published threshold values.

use serde::{Deserialize, Serialize};

use crate::bsm::Protocol;
use crate::error::{Error, Result};
use crate::gsm::Architecture;
use crate::threshold::params_key;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceThreshold {
    pub architecture: Architecture,
    pub protocol: Protocol,
    pub n: u32,
    pub m: u32,
    pub j: u32,
    pub eta_c: f64,
}

impl ReferenceThreshold {
    pub fn key(&self) -> String {
        params_key(self.protocol, self.n, self.m, self.j)
    }
}

const fn r(
    architecture: Architecture,
    protocol: Protocol,
    n: u32,
    m: u32,
    j: u32,
    eta_c: f64,
) -> ReferenceThreshold {
    ReferenceThreshold {
        architecture,
        protocol,
        n,
        m,
        j,
        eta_c,
    }
}

use Architecture::{Cyclic as C, Minimal as M};
use Protocol::{Active as A, Static as S};

pub const REFERENCE_THRESHOLDS: &[ReferenceThreshold] = &[
    r(C, S, 3, 1, 0, 0.0076),
    r(C, S, 3, 2, 0, 0.0381),
    r(C, S, 4, 2, 0, 0.0546),
    r(C, S, 4, 3, 0, 0.0675),
    r(C, S, 5, 3, 0, 0.0856),
    r(C, S, 6, 3, 0, 0.0962),
    r(C, S, 7, 3, 0, 0.1016),
    r(C, S, 7, 4, 0, 0.105),
    r(C, S, 8, 4, 0, 0.1143),
    r(C, S, 9, 4, 0, 0.1216),
    r(C, A, 2, 2, 1, 0.0261),
    r(C, A, 2, 3, 1, 0.0495),
    r(C, A, 2, 4, 2, 0.0572),
    r(C, A, 3, 3, 1, 0.0753),
    r(C, A, 4, 3, 1, 0.083),
    r(C, A, 4, 4, 2, 0.097),
    r(C, A, 5, 4, 1, 0.1087),
    r(C, A, 6, 4, 1, 0.1172),
    r(C, A, 7, 4, 1, 0.1217),
    r(M, S, 4, 2, 0, 0.02),
    r(M, S, 5, 2, 0, 0.038),
    r(M, S, 5, 3, 0, 0.0425),
    r(M, S, 6, 3, 0, 0.0610),
    r(M, S, 7, 3, 0, 0.074),
    r(M, S, 8, 3, 0, 0.0818),
    r(M, S, 11, 3, 0, 0.0925),
    r(M, S, 10, 4, 0, 0.096),
    r(M, S, 11, 4, 0, 0.1025),
    r(M, S, 12, 4, 0, 0.1082),
    r(M, S, 13, 4, 0, 0.113),
    r(M, S, 14, 4, 0, 0.1168),
    r(M, S, 15, 4, 0, 0.12),
    r(M, A, 2, 3, 2, 0.026),
    r(M, A, 2, 4, 3, 0.0318),
    r(M, A, 3, 3, 1, 0.044),
    r(M, A, 4, 3, 1, 0.0618),
    r(M, A, 4, 4, 2, 0.071),
    r(M, A, 6, 4, 2, 0.089),
    r(M, A, 7, 4, 1, 0.098),
    r(M, A, 8, 4, 1, 0.1043),
    r(M, A, 9, 4, 1, 0.1083),
    r(M, A, 10, 4, 1, 0.111),
    r(M, A, 10, 5, 2, 0.1183),
    r(M, A, 11, 5, 2, 0.1225),
];

/// One (architecture, protocol) family of reference parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    CyclicStatic,
    CyclicActive,
    MinimalStatic,
    MinimalActive,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::CyclicStatic,
        Preset::CyclicActive,
        Preset::MinimalStatic,
        Preset::MinimalActive,
    ];

    pub fn architecture(self) -> Architecture {
        match self {
            Preset::CyclicStatic | Preset::CyclicActive => Architecture::Cyclic,
            Preset::MinimalStatic | Preset::MinimalActive => Architecture::Minimal,
        }
    }

    pub fn protocol(self) -> Protocol {
        match self {
            Preset::CyclicStatic | Preset::MinimalStatic => Protocol::Static,
            Preset::CyclicActive | Preset::MinimalActive => Protocol::Active,
        }
    }

    pub fn entries(self) -> Vec<ReferenceThreshold> {
        REFERENCE_THRESHOLDS
            .iter()
            .filter(|r| r.architecture == self.architecture() && r.protocol == self.protocol())
            .copied()
            .collect()
    }
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}-{}", self.architecture(), self.protocol())
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.to_string() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::validation("preset", format!("unknown preset {s:?}")))
    }
}

/// Reference value for a parameter set, if it is one of the presets.
pub fn reference_threshold(
    architecture: Architecture,
    protocol: Protocol,
    n: u32,
    m: u32,
    j: u32,
) -> Option<f64> {
    REFERENCE_THRESHOLDS
        .iter()
        .find(|r| {
            r.architecture == architecture
                && r.protocol == protocol
                && (r.n, r.m) == (n, m)
                && (protocol == Protocol::Static || r.j == j)
        })
        .map(|r| r.eta_c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bsm::BsmModel;

    #[test]
    fn family_sizes() {
        let sizes: Vec<usize> = Preset::ALL.iter().map(|p| p.entries().len()).collect();
        assert_eq!(sizes, vec![10, 9, 13, 12]);
    }

    #[test]
    fn presets_are_valid_models() {
        for r in REFERENCE_THRESHOLDS {
            let conv = r.architecture.default_convention();
            BsmModel::new(r.protocol, r.n, r.m, r.j, conv, 0.01).unwrap();
        }
    }

    #[test]
    fn parse_and_lookup() {
        assert_eq!(
            "cyclic-static".parse::<Preset>().unwrap(),
            Preset::CyclicStatic
        );
        assert!("cyclic".parse::<Preset>().is_err());
        assert_eq!(reference_threshold(C, S, 3, 2, 0), Some(0.0381));
        assert_eq!(reference_threshold(C, A, 2, 2, 1), Some(0.0261));
        assert_eq!(reference_threshold(C, A, 2, 2, 0), None);
    }
}
