//! Batch verification over a catalog of rings.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use unitgroup::{structure_report, CheckId, CheckParams, Error, GroupSpec, RingSpec, Verifier};

use crate::report::{RingReport, SuiteReport};

/// Large enough to enumerate `V(Z/125 C_5)`, which has `5^12` elements.
pub const SUITE_BUDGET: u64 = 1 << 28;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub p: u64,
    pub lambda: Vec<u32>,
    pub e: u32,
    /// `false` marks a formula-only instance: only checks that do not walk `V` run.
    #[serde(default = "yes")]
    pub oracle: bool,
}

fn yes() -> bool {
    true
}

impl Instance {
    pub fn new(p: u64, lambda: &[u32], e: u32) -> Self {
        Self {
            p,
            lambda: lambda.to_vec(),
            e,
            oracle: true,
        }
    }

    pub fn ring_spec(&self) -> Result<RingSpec, Error> {
        RingSpec::new(GroupSpec::new(self.p, self.lambda.clone())?, self.e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub instances: Vec<Instance>,
    /// Checks to attempt on every instance; `None` runs the default selection.
    pub checks: Option<Vec<CheckId>>,
    pub budget: u64,
    pub workers: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            instances: default_catalog(),
            checks: None,
            budget: SUITE_BUDGET,
            workers: 1,
            seed: 0,
            output: None,
        }
    }
}

/// The reference catalog:
/// p=2 with small λ and every `e` with `e(|G|-1) <= 20`,
/// p=3 with `e(|G|-1) <= 13`, and `Z/5^e C_5` for `e <= 3`.
pub fn default_catalog() -> Vec<Instance> {
    let mut out = Vec::new();
    let mut family = |p: u64, lambdas: &[&[u32]], max_exp: u64| {
        for &lambda in lambdas {
            let order = p.pow(lambda.iter().sum());
            let mut e = 1;
            while e as u64 * (order - 1) <= max_exp {
                out.push(Instance::new(p, lambda, e));
                e += 1;
            }
        }
    };
    family(
        2,
        &[&[1], &[2], &[3], &[1, 1], &[1, 2], &[1, 1, 1], &[2, 2]],
        20,
    );
    family(3, &[&[1], &[2], &[1, 1]], 13);
    family(5, &[&[1]], 12);
    out
}

impl SuiteConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Every oracle instance must fit the budget.
    pub fn validate(&self) -> Result<Vec<RingSpec>, Error> {
        self.instances
            .iter()
            .map(|inst| {
                let rs = inst.ring_spec()?;
                if inst.oracle {
                    unitgroup::oracle::enumeration_size(&rs, self.budget)?;
                }
                Ok(rs)
            })
            .collect()
    }

    fn selected(&self, rs: &RingSpec, oracle: bool) -> Vec<CheckId> {
        let wanted = |c: &CheckId| oracle || !c.enumerates();
        match &self.checks {
            None => CheckId::ALL
                .into_iter()
                .filter(|c| c.in_default_suite(rs) && wanted(c))
                .collect(),
            Some(list) => list
                .iter()
                .copied()
                .filter(|c| c.applies_to(rs) && wanted(c))
                .collect(),
        }
    }

    pub fn run(&self) -> Result<SuiteReport, Error> {
        let specs = self.validate()?;
        let params = CheckParams {
            seed: self.seed,
            budget: self.budget,
            workers: self.workers,
            ..CheckParams::default()
        };
        let mut reports = Vec::with_capacity(specs.len());
        for (inst, rs) in self.instances.iter().zip(&specs) {
            let verifier = Verifier::new(rs, params.clone())?;
            let checks = self
                .selected(rs, inst.oracle)
                .into_iter()
                .map(|c| verifier.run(c))
                .collect::<Result<Vec<_>, _>>()?;
            let structure = structure_report(rs.group(), rs.e())?;
            reports.push(RingReport::new(&structure, &checks));
        }
        Ok(SuiteReport::new(self.seed, self.budget, reports))
    }
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
