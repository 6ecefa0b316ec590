//! TOML run configuration, overridable from the command line.

use std::path::Path;

use relaxsim_core::sched::{AdversaryStrategy, SchedulerConfig, SchedulerKind};
use serde::Deserialize;

use crate::error::{HarnessError, Result};

/// `[scheduler]` table; every field optional.
#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SchedulerSection {
    pub kind: Option<SchedulerKind>,
    pub k: Option<u32>,
    pub q: Option<u32>,
    pub strategy: Option<AdversaryStrategy>,
    pub seed: Option<u64>,
    pub seeds: Option<u64>,
}

/// `[txsim]` table.
#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct TxSection {
    pub c: Option<u32>,
    pub workers: Option<u32>,
    pub duration: Option<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    #[serde(default)]
    pub scheduler: SchedulerSection,
    #[serde(default)]
    pub txsim: TxSection,
}

impl FileConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| HarnessError::Input(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text, path)
    }
}

impl SchedulerSection {
    /// Fields of `over` win.
    pub fn overlay(&self, over: &SchedulerSection) -> SchedulerSection {
        SchedulerSection {
            kind: over.kind.or(self.kind),
            k: over.k.or(self.k),
            q: over.q.or(self.q),
            strategy: over.strategy.or(self.strategy),
            seed: over.seed.or(self.seed),
            seeds: over.seeds.or(self.seeds),
        }
    }

    /// Defaults: exact scheduler, `k = 4` for adversarial, `q = 8`, max-rank, seed 0.
    /// Fields that do not apply to the chosen kind keep the constructor's values.
    pub fn resolve(&self) -> Result<SchedulerConfig> {
        let seed = self.seed.unwrap_or(0);
        let cfg = match self.kind.unwrap_or(SchedulerKind::Exact) {
            SchedulerKind::Exact => SchedulerConfig {
                k: self.k.unwrap_or(1),
                ..SchedulerConfig::exact().with_seed(seed)
            },
            SchedulerKind::Adversarial => {
                SchedulerConfig::adversarial(self.k.unwrap_or(4), self.strategy.unwrap_or_default(), seed)
            }
            SchedulerKind::Multiqueue => SchedulerConfig {
                k: self.k.unwrap_or(1),
                ..SchedulerConfig::multiqueue(self.q.unwrap_or(8), seed)
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn seed_count(&self) -> u64 {
        self.seeds.unwrap_or(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let text = "[scheduler]\nkind = \"adversarial\"\nk = 8\nstrategy = \"delay-top\"\n[txsim]\nc = 16\n";
        let file = FileConfig::parse(text, Path::new("x.toml")).unwrap();
        assert_eq!(file.txsim.c, Some(16));
        let flags = SchedulerSection {
            k: Some(2),
            ..Default::default()
        };
        let cfg = file.scheduler.overlay(&flags).resolve().unwrap();
        assert_eq!(cfg, SchedulerConfig::adversarial(2, AdversaryStrategy::DelayTop, 0));
    }

    #[test]
    fn exact_with_k_is_rejected() {
        let s = SchedulerSection {
            kind: Some(SchedulerKind::Exact),
            k: Some(3),
            ..Default::default()
        };
        assert!(s.resolve().is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(FileConfig::parse("[scheduler]\nkk = 1\n", Path::new("x")).is_err());
    }
}
