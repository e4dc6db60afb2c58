//! JSON and text renderings of structure reports and check results.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use unitgroup::{
    AbelianInvariants, CheckId, GroupSpec, PPower, StructureReport, Verdict, VerificationReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

/// One check outcome as it appears in JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: CheckId,
    pub verdict: Verdict,
    pub predicted: Value,
    pub observed: Value,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<Value>,
}

impl From<&VerificationReport> for CheckRecord {
    fn from(r: &VerificationReport) -> Self {
        Self {
            id: r.check,
            verdict: r.verdict,
            predicted: r.predicted.clone(),
            observed: r.observed.clone(),
            seed: r.seed,
            notes: r.notes.clone(),
        }
    }
}

/// The closed-form parameters behind the invariants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Structure {
    pub s: Vec<u64>,
    pub l: u64,
    pub p_torsion_exp: u64,
    pub p_rank: u64,
}

/// Everything known about one ring `Z/p^e [G]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingReport {
    pub group: GroupSpec,
    pub e: u32,
    pub v_order: PPower,
    pub invariants: AbelianInvariants,
    pub structure: Structure,
    pub checks: Vec<CheckRecord>,
}

impl RingReport {
    pub fn new(report: &StructureReport, checks: &[VerificationReport]) -> Self {
        Self {
            group: report.group.clone(),
            e: report.e,
            v_order: report.v_order(),
            invariants: report.v_invariants.clone(),
            structure: Structure {
                s: report.s.clone(),
                l: report.l,
                p_torsion_exp: report.v_p_torsion_exp,
                p_rank: report.p_rank,
            },
            checks: checks.iter().map(CheckRecord::from).collect(),
        }
    }

    pub fn failures(&self) -> usize {
        self.checks
            .iter()
            .filter(|c| c.verdict == Verdict::Fail)
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub instances: usize,
    pub checks: usize,
    pub passed: usize,
    pub failed: usize,
}

/// Output of `suite`. Worker count and timings are left out so that the
/// JSON depends only on the instances, checks, budget and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub budget: u64,
    pub instances: Vec<RingReport>,
    pub summary: Summary,
}

impl SuiteReport {
    pub fn new(seed: u64, budget: u64, instances: Vec<RingReport>) -> Self {
        let checks = instances.iter().map(|r| r.checks.len()).sum();
        let failed = instances.iter().map(RingReport::failures).sum();
        let summary = Summary {
            instances: instances.len(),
            checks,
            passed: checks - failed,
            failed,
        };
        Self {
            seed,
            budget,
            instances,
            summary,
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
    }
}

/// Text rendering:
///
/// ```text
/// group p=2;lambda=1 e=3
/// V ≅ C_2 × C_4
/// |V| = 2^3, s = [0], l = 1, |V[p]| = 2^2, p-rank = 2
/// theorem2 pass
///   predicted [{"multiplicity":1,"order_exp":1},...]
///   observed  [{"multiplicity":1,"order_exp":1},...]
/// ```
pub fn render_text(r: &RingReport) -> String {
    let p = r.group.p();
    let mut out = String::new();
    let _ = writeln!(out, "group {} e={}", r.group, r.e);
    let _ = writeln!(out, "V ≅ {}", r.invariants.render(p));
    let _ = writeln!(
        out,
        "|V| = {}, s = {:?}, l = {}, |V[p]| = {}, p-rank = {}",
        r.v_order,
        r.structure.s,
        r.structure.l,
        PPower::new(p, r.structure.p_torsion_exp),
        r.structure.p_rank
    );
    for c in &r.checks {
        let _ = writeln!(out, "{} {}", c.id, verdict_str(c.verdict));
        let _ = writeln!(out, "  predicted {}", c.predicted);
        let _ = writeln!(out, "  observed  {}", c.observed);
    }
    out
}

pub fn render_suite_text(s: &SuiteReport) -> String {
    let mut out = String::new();
    for r in &s.instances {
        let line = r
            .checks
            .iter()
            .map(|c| format!("{}:{}", c.id, verdict_str(c.verdict)))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(out, "{} e={}  {}", r.group, r.e, line);
    }
    let m = &s.summary;
    let _ = writeln!(
        out,
        "{} instances, {} checks, {} passed, {} failed",
        m.instances, m.checks, m.passed, m.failed
    );
    out
}
