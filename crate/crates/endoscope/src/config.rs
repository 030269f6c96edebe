//! Job configuration: one JSON document per run.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use endoscope_core::endotest::CensusMode;
use endoscope_core::exactfield::is_prime;
use endoscope_core::rootdata::{is_valid_type, parse_label, RootType};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Hypothesis,
    Nullcone,
    Weyl,
    Census,
    Jordan,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Hypothesis => "hypothesis",
            Command::Nullcone => "nullcone",
            Command::Weyl => "weyl",
            Command::Census => "census",
            Command::Jordan => "jordan",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    /// Must match the subcommand when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    /// Root-system labels such as `"B2"`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub types: Vec<String>,
    /// Adds every valid simple type with rank in this inclusive range.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_range: Option<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub primes: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<u32>,
    /// Extension degrees for point enumeration.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub e: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_max: Option<u64>,
    /// Algebra selector for `census` and `jordan`: `"E2"` (elementary
    /// abelian of rank 2), `"Dist2"` (divided powers, r = 2) or a root label.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebra: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<CensusMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Syzygy degrees `m` of the modules `Ω^m(k)` examined by `jordan`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub degrees: Vec<i64>,
    /// Include the lift sweep for algebras with at most six generators.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lift_sweep: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlgebraSpec {
    ElementaryAbelian(usize),
    DividedPower(u32),
    Root(RootType, usize),
}

pub fn parse_algebra(s: &str) -> Result<AlgebraSpec> {
    if let Some(rest) = s.strip_prefix("Dist") {
        let r: u32 = rest.parse().with_context(|| format!("bad divided-power selector {s:?}"))?;
        if r == 0 {
            bail!("Dist needs r >= 1");
        }
        return Ok(AlgebraSpec::DividedPower(r));
    }
    if let Some(rest) = s.strip_prefix('E') {
        if let Ok(n) = rest.parse::<usize>() {
            // E6, E7, E8 are root systems; other E<n> are elementary abelian
            if !(6..=8).contains(&n) {
                if n == 0 {
                    bail!("elementary abelian rank must be positive");
                }
                return Ok(AlgebraSpec::ElementaryAbelian(n));
            }
        }
    }
    let (kind, rank) = parse_label(s).map_err(|e| anyhow::anyhow!("UnknownType: {s}: {e}"))?;
    Ok(AlgebraSpec::Root(kind, rank))
}

impl JobConfig {
    pub fn from_json(text: &str) -> Result<JobConfig> {
        serde_json::from_str(text).context("parsing job config")
    }

    /// Root systems selected by `types` and `rank_range`, deduplicated in order.
    pub fn root_types(&self) -> Result<Vec<(RootType, usize)>> {
        let mut out = Vec::new();
        for t in &self.types {
            let (kind, rank) = parse_label(t).map_err(|e| anyhow::anyhow!("UnknownType: {t}: {e}"))?;
            if !is_valid_type(kind, rank) {
                bail!("UnknownType: {t}");
            }
            if !out.contains(&(kind, rank)) {
                out.push((kind, rank));
            }
        }
        if let Some((lo, hi)) = self.rank_range {
            for rank in lo..=hi {
                for kind in [RootType::A, RootType::B, RootType::C, RootType::D, RootType::E, RootType::F, RootType::G] {
                    if is_valid_type(kind, rank) && !out.contains(&(kind, rank)) {
                        out.push((kind, rank));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn validate(&self, cmd: Command) -> Result<()> {
        if let Some(c) = self.command {
            if c != cmd {
                bail!("config is for `{}` but `{}` was invoked", c.name(), cmd.name());
            }
        }
        for &p in &self.primes {
            if !is_prime(p) {
                bail!("{p} is not prime");
            }
        }
        if self.e.iter().any(|&e| e == 0 || e > 10) {
            bail!("extension degrees must lie in 1..=10");
        }
        let types = self.root_types()?;
        match cmd {
            Command::Hypothesis | Command::Nullcone => {
                if types.is_empty() {
                    bail!("`types` or `rank_range` required");
                }
                if self.primes.is_empty() {
                    bail!("`primes` required");
                }
            }
            Command::Weyl => {
                if self.primes.is_empty() || self.lambda_max.is_none() {
                    bail!("`primes` and `lambda_max` required");
                }
            }
            Command::Census | Command::Jordan => {
                let Some(a) = &self.algebra else { bail!("`algebra` required") };
                let spec = parse_algebra(a)?;
                if let AlgebraSpec::Root(kind, rank) = spec {
                    if !is_valid_type(kind, rank) {
                        bail!("UnknownType: {a}");
                    }
                }
                if self.primes.len() != 1 {
                    bail!("exactly one prime required");
                }
                if cmd == Command::Census {
                    if self.dims.is_empty() {
                        bail!("`dims` required");
                    }
                    if self.mode == Some(CensusMode::Random) && (self.seed.is_none() || self.budget.is_none()) {
                        bail!("random census needs `seed` and `budget`");
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selectors() {
        assert_eq!(parse_algebra("E2").unwrap(), AlgebraSpec::ElementaryAbelian(2));
        assert_eq!(parse_algebra("E6").unwrap(), AlgebraSpec::Root(RootType::E, 6));
        assert_eq!(parse_algebra("Dist3").unwrap(), AlgebraSpec::DividedPower(3));
        assert_eq!(parse_algebra("B2").unwrap(), AlgebraSpec::Root(RootType::B, 2));
        assert!(parse_algebra("Q7").is_err());
    }

    #[test]
    fn validation() {
        let c = JobConfig::from_json(r#"{"types":["A2"],"primes":[4]}"#).unwrap();
        assert!(c.validate(Command::Hypothesis).is_err());
        let c = JobConfig::from_json(r#"{"algebra":"E2","primes":[2],"dims":[3],"mode":"random"}"#).unwrap();
        assert!(c.validate(Command::Census).is_err());
        let c = JobConfig::from_json(r#"{"rank_range":[1,2],"primes":[2]}"#).unwrap();
        assert_eq!(c.root_types().unwrap().len(), 4);
        assert!(JobConfig::from_json(r#"{"bogus":1}"#).is_err());
        let c = JobConfig::from_json(r#"{"command":"weyl","primes":[3],"lambda_max":4}"#).unwrap();
        assert!(c.validate(Command::Nullcone).is_err());
        assert!(c.validate(Command::Weyl).is_ok());
    }
}
