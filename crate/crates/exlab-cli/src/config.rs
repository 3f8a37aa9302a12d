//! Experiment configuration schema. A config names one command plus its
//! parameters; the same JSON can be produced from subcommand flags or
//! loaded whole via `--config`. Every random choice is driven by an
//! explicit seed field; there is no ambient randomness anywhere.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

/// How a boolean or multi-bit function is supplied on the command line or
/// in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FnSpec {
    /// XOR over input positions of the AND across parties.
    Gip,
    /// Bit-packed single-output-bit truth table, entry x at bit x%8 of
    /// hex byte x/8.
    TableHex { hex: String },
    /// A serialized function table (arbitrary output width).
    File { path: PathBuf },
    /// The composed map described by a parameter file.
    Params { path: PathBuf },
}

impl FnSpec {
    /// `gip`, `hex:<bytes>`, `params:<path>`, or a bare path.
    pub fn parse(s: &str) -> FnSpec {
        if s == "gip" {
            FnSpec::Gip
        } else if let Some(h) = s.strip_prefix("hex:") {
            FnSpec::TableHex { hex: h.to_string() }
        } else if let Some(p) = s.strip_prefix("params:") {
            FnSpec::Params { path: p.into() }
        } else {
            FnSpec::File { path: s.into() }
        }
    }
}

/// One protocol for `nof leak`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProtocolSpec {
    File { path: PathBuf },
    Seeded { mu: u32, seed: u64, adaptive: bool },
}

/// A batch of protocols for `verify reduction`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProtocolSource {
    /// Every non-adaptive protocol of the given length.
    Enumerate { mu: u32 },
    /// One seeded protocol per listed seed.
    Seeded { mu: u32, seeds: Vec<u64>, adaptive: bool },
    Files { paths: Vec<PathBuf> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum ExperimentConfig {
    FieldMul {
        width: u32,
        a: String,
        b: String,
    },
    FieldTable {
        width: u32,
    },
    DistSd {
        p: PathBuf,
        q: PathBuf,
    },
    DistHmin {
        p: PathBuf,
    },
    DistClose {
        p: PathBuf,
        k: u32,
    },
    NofCube {
        f: FnSpec,
        parties: usize,
        input_bits: u32,
    },
    NofLeak {
        f: FnSpec,
        parties: usize,
        input_bits: u32,
        protocol: ProtocolSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        family: Option<PathBuf>,
    },
    NofMissingEntropy {
        f: FnSpec,
        parties: usize,
        input_bits: u32,
        mu: u32,
        k: u32,
    },
    ExtractNme {
        params: PathBuf,
        inputs: Vec<String>,
    },
    ExtractAdversarial {
        params: PathBuf,
        inputs: Vec<String>,
    },
    VerifyNme {
        params: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        family: Option<PathBuf>,
        /// Explicit bound as "num/den"; defaults to the 1 - 2^-m gap.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bound: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mc_samples: Option<u64>,
        #[serde(default)]
        seed: u64,
    },
    VerifyReduction {
        params: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        family: Option<PathBuf>,
        protocols: ProtocolSource,
    },
    VerifyCondenser {
        /// Either a params file (its condenser stage is checked) ...
        #[serde(default, skip_serializing_if = "Option::is_none")]
        params: Option<PathBuf>,
        /// ... or an inline field-product condenser n -> r.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        input_bits: Option<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cond_bits: Option<u32>,
        k: u32,
        l: u32,
        /// Error threshold "num/den" for the profile and the strongness
        /// check; defaults to the measured profile maximum.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eps: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k_prime: Option<u32>,
        /// Sample this many pairs instead of enumerating all of them.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sample_pairs: Option<u64>,
        #[serde(default)]
        seed: u64,
    },
    VerifyAdversarial {
        params: PathBuf,
        n_total: usize,
        good: Vec<usize>,
        bad_values: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        family: Option<PathBuf>,
    },
    FixturesRegen {
        path: PathBuf,
    },
    FixturesCheck {
        path: PathBuf,
    },
}
