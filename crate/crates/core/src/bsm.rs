//! Closed-form success probabilities of Bell-state measurements encoded in a
//! quantum parity code (QPC) under single-photon loss.
//!
//! A QPC with parameters `(n, m)` is `n` blocks of an `m`-qubit repetition
//! code. An encoded BSM is carried out block by block with `m` dual-rail
//! BSMs per block. Two block-level schemes are modelled:
//!
//! * [`Protocol::Static`]: every dual-rail BSM in a block uses the same
//!   static linear-optical circuit.
//! * [`Protocol::Active`]: the first up to `j` dual-rail BSMs of a block
//!   try for the `XX` eigenvalue and feed forward the basis choice for the
//!   rest of the block.
//!
//! Every dual-rail BSM is corrupted (returns nothing) with probability
//! `gamma = 1 - (1 - eta)^2`, where `eta` is the loss rate per photon.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Static,
    Active,
}

/// Which logical Bell operator the outer repetition protects.
///
/// Under the Hadamard-style convention `ZZ` needs every block while `XX`
/// needs any one block; the Shor-style convention swaps the two roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Hadamard,
    Shor,
}

impl std::fmt::Display for Protocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Protocol::Static => "static",
            Protocol::Active => "active",
        })
    }
}

impl std::fmt::Display for Convention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Convention::Hadamard => "hadamard",
            Convention::Shor => "shor",
        })
    }
}

impl std::str::FromStr for Protocol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "static" => Ok(Protocol::Static),
            "active" => Ok(Protocol::Active),
            _ => Err(Error::validation(
                "protocol",
                format!("unknown protocol {s:?}"),
            )),
        }
    }
}

impl std::str::FromStr for Convention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hadamard" => Ok(Convention::Hadamard),
            "shor" => Ok(Convention::Shor),
            _ => Err(Error::validation(
                "convention",
                format!("unknown convention {s:?}"),
            )),
        }
    }
}

/// Full description of one encoded BSM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BsmModel {
    pub protocol: Protocol,
    /// Number of blocks (outer repetition size).
    pub n: u32,
    /// Qubits per block (inner repetition size).
    pub m: u32,
    /// Feed-forward depth; only meaningful for [`Protocol::Active`].
    pub j: u32,
    pub convention: Convention,
    /// Single-photon loss rate.
    pub eta: f64,
}

impl BsmModel {
    pub fn new(
        protocol: Protocol,
        n: u32,
        m: u32,
        j: u32,
        convention: Convention,
        eta: f64,
    ) -> Result<Self> {
        let model = BsmModel {
            protocol,
            n,
            m,
            j,
            convention,
            eta,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn static_(n: u32, m: u32, convention: Convention, eta: f64) -> Result<Self> {
        Self::new(Protocol::Static, n, m, 0, convention, eta)
    }

    pub fn active(n: u32, m: u32, j: u32, convention: Convention, eta: f64) -> Result<Self> {
        Self::new(Protocol::Active, n, m, j, convention, eta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::validation("n", "must be at least 1"));
        }
        if self.m == 0 {
            return Err(Error::validation("m", "must be at least 1"));
        }
        check_probability("eta", self.eta)?;
        match self.protocol {
            Protocol::Static if self.j != 0 => Err(Error::validation(
                "j",
                format!(
                    "static protocol takes no feed-forward depth, got j = {}",
                    self.j
                ),
            )),
            Protocol::Active if self.j >= self.m => Err(Error::validation(
                "j",
                format!(
                    "feed-forward depth must satisfy j < m, got j = {} with m = {}",
                    self.j, self.m
                ),
            )),
            _ => Ok(()),
        }
    }

    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        let mut next = *self;
        next.eta = eta;
        next.validate()?;
        Ok(next)
    }

    pub fn gamma(&self) -> f64 {
        1.0 - (1.0 - self.eta) * (1.0 - self.eta)
    }

    pub fn block_probs(&self) -> BlockProbs {
        let gamma = self.gamma();
        match self.protocol {
            Protocol::Static => static_block(self.m, gamma),
            Protocol::Active => active_block(self.m, self.j, gamma),
        }
    }
}

pub(crate) fn check_probability(key: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::validation(
            key,
            format!("must lie in [0, 1], got {p}"),
        ))
    }
}

/// Outcome rates of one block-level (repetition-code) BSM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockProbs {
    /// Probability the block yields its `ZZ` eigenvalue.
    pub p_zz_block: f64,
    /// Probability the block yields both `XX` and `ZZ`.
    pub p_joint_block: f64,
    /// Probability the block yields nothing.
    pub p_none_block: f64,
}

/// Outcome rates of a QPC-encoded BSM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsmOutcomeProbs {
    pub p_xx: f64,
    pub p_zz: f64,
    pub p_joint: f64,
}

/// The four exclusive outcomes of one encoded BSM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointDistribution {
    pub both: f64,
    pub zz_only: f64,
    pub xx_only: f64,
    pub neither: f64,
}

impl JointDistribution {
    pub fn as_array(&self) -> [f64; 4] {
        [self.both, self.zz_only, self.xx_only, self.neither]
    }
}

/// Probability that a dual-rail BSM is corrupted when each of its two photons
/// is lost independently with probability `eta`.
pub fn gamma_from_loss(eta: f64) -> Result<f64> {
    check_probability("eta", eta)?;
    Ok(1.0 - (1.0 - eta) * (1.0 - eta))
}

pub fn static_block_probs(m: u32, gamma: f64) -> Result<BlockProbs> {
    if m == 0 {
        return Err(Error::validation("m", "must be at least 1"));
    }
    check_probability("gamma", gamma)?;
    Ok(static_block(m, gamma))
}

pub fn active_block_probs(m: u32, j: u32, gamma: f64) -> Result<BlockProbs> {
    if m == 0 {
        return Err(Error::validation("m", "must be at least 1"));
    }
    if j >= m {
        return Err(Error::validation(
            "j",
            format!("feed-forward depth must satisfy j < m, got j = {j} with m = {m}"),
        ));
    }
    check_probability("gamma", gamma)?;
    Ok(active_block(m, j, gamma))
}

fn static_block(m: u32, gamma: f64) -> BlockProbs {
    let none = gamma.powi(m as i32);
    BlockProbs {
        p_zz_block: 1.0 - none,
        p_joint_block: 0.5 * (1.0 - gamma).powi(m as i32),
        p_none_block: none,
    }
}

fn active_block(m: u32, j: u32, gamma: f64) -> BlockProbs {
    // l leading XX attempts fail without loss, then all remaining m - l
    // dual-rail BSMs are corrupted.
    let fail = 0.5 * (1.0 - gamma);
    let none: f64 = (0..=j)
        .map(|l| fail.powi(l as i32) * gamma.powi((m - l) as i32))
        .sum();
    BlockProbs {
        p_zz_block: 1.0 - none,
        p_joint_block: (1.0 - 0.5f64.powi(j as i32 + 1)) * (1.0 - gamma).powi(m as i32),
        p_none_block: none,
    }
}

/// Marginal and joint recovery probabilities of the logical `XX` and `ZZ`.
pub fn qpc_probs(model: &BsmModel) -> Result<BsmOutcomeProbs> {
    model.validate()?;
    Ok(qpc_from_block(
        model.n,
        &model.block_probs(),
        model.convention,
    ))
}

pub(crate) fn qpc_from_block(
    n: u32,
    block: &BlockProbs,
    convention: Convention,
) -> BsmOutcomeProbs {
    let n = n as i32;
    let zz = block.p_zz_block;
    let joint = block.p_joint_block;
    // ZZ needs every block; XX needs one block that resolved both.
    let all_zz = zz.powi(n);
    let any_xx = 1.0 - (1.0 - joint).powi(n);
    let p_joint = all_zz - (zz - joint).powi(n);
    let (p_xx, p_zz) = match convention {
        Convention::Hadamard => (any_xx, all_zz),
        Convention::Shor => (all_zz, any_xx),
    };
    let p_xx = clamp_unit(p_xx);
    let p_zz = clamp_unit(p_zz);
    // Joint recovery can't exceed either marginal.
    let p_joint = clamp_unit(p_joint).min(p_xx).min(p_zz);
    BsmOutcomeProbs {
        p_xx,
        p_zz,
        p_joint,
    }
}

fn clamp_unit(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

const JOINT_TOLERANCE: f64 = 1e-12;

/// Splits marginal recovery probabilities into the four exclusive outcomes.
pub fn joint_distribution(p: &BsmOutcomeProbs) -> Result<JointDistribution> {
    for (key, value) in [("p_xx", p.p_xx), ("p_zz", p.p_zz), ("p_joint", p.p_joint)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Inconsistent(format!(
                "{key} = {value} outside [0, 1]"
            )));
        }
    }
    let lower = (p.p_xx + p.p_zz - 1.0).max(0.0);
    let upper = p.p_xx.min(p.p_zz);
    if p.p_joint < lower - JOINT_TOLERANCE || p.p_joint > upper + JOINT_TOLERANCE {
        return Err(Error::Inconsistent(format!(
            "p_joint = {} outside [{lower}, {upper}]",
            p.p_joint
        )));
    }
    let both = p.p_joint.clamp(lower, upper);
    let zz_only = (p.p_zz - both).max(0.0);
    let xx_only = (p.p_xx - both).max(0.0);
    let neither = (1.0 - both - zz_only - xx_only).max(0.0);
    Ok(JointDistribution {
        both,
        zz_only,
        xx_only,
        neither,
    })
}
