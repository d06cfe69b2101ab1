//! Where a table sits in groupoid → quasigroup → medial → AG-group →
//! abelian group.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::identity::{self, Assignment, Preset, Verdict};
use crate::table::{CayleyTable, ElementId};

/// Every structural flag of a table, each with a witness when it fails.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureReport {
    pub order: usize,
    pub left_identity: Option<ElementId>,
    pub is_quasigroup: Verdict,
    pub has_left_identity: Verdict,
    pub has_right_identity: Verdict,
    pub has_inverses: Verdict,
    pub is_left_invertive: Verdict,
    pub is_medial: Verdict,
    pub is_paramedial: Verdict,
    pub is_commutative: Verdict,
    pub is_associative: Verdict,
    pub is_idempotent: Verdict,
    pub is_ag_groupoid: Verdict,
    pub is_ag_group: Verdict,
    pub is_abelian_group: Verdict,
}

fn flag(holds: bool, counterexample: Option<Assignment>) -> Verdict {
    Verdict {
        holds,
        counterexample: if holds { None } else { counterexample },
    }
}

fn preset_verdict(table: &CayleyTable, name: &str) -> Verdict {
    identity::preset(name)
        .and_then(|p| p.check(table))
        .expect("structural presets use neither e nor inverses")
}

/// First cell that breaks the Latin-square property, if any.
fn latin_defect(table: &CayleyTable) -> Option<Assignment> {
    let n = table.order();
    let mut seen = vec![false; n];
    for a in 0..n {
        seen.iter_mut().for_each(|s| *s = false);
        table.row(a).iter().for_each(|&v| seen[v as usize] = true);
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Some(Assignment::from_pairs([("row", a), ("missing", missing)]));
        }
    }
    for b in 0..n {
        seen.iter_mut().for_each(|s| *s = false);
        (0..n).for_each(|a| seen[table.op(a, b)] = true);
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Some(Assignment::from_pairs([
                ("column", b),
                ("missing", missing),
            ]));
        }
    }
    None
}

pub fn is_quasigroup(table: &CayleyTable) -> bool {
    latin_defect(table).is_none()
}

/// Elements lacking a two-sided inverse with respect to `e`.
fn inverse_defect(table: &CayleyTable, e: ElementId) -> Option<Assignment> {
    table
        .elements()
        .find(|&a| {
            !table
                .elements()
                .any(|x| table.op(a, x) == e && table.op(x, a) == e)
        })
        .map(|a| Assignment::from_pairs([("a", a)]))
}

pub fn classify(table: &CayleyTable) -> StructureReport {
    let left_identity = table.left_identity();
    let right_identity = table.right_identity();

    let is_quasigroup = match latin_defect(table) {
        None => Verdict::pass(),
        Some(ce) => Verdict::fail(ce),
    };
    let has_left_identity = flag(left_identity.is_some(), None);
    let has_right_identity = flag(right_identity.is_some(), None);
    let has_inverses = match left_identity {
        None => flag(false, None),
        Some(e) => match inverse_defect(table, e) {
            None => Verdict::pass(),
            Some(ce) => Verdict::fail(ce),
        },
    };

    let is_left_invertive = preset_verdict(table, "left-invertive");
    let is_medial = preset_verdict(table, "medial");
    let is_paramedial = preset_verdict(table, "paramedial");
    let is_commutative = preset_verdict(table, "commutative");
    let is_associative = preset_verdict(table, "associative");
    let is_idempotent = preset_verdict(table, "idempotent");

    let first_failure = |parts: &[&Verdict]| -> Verdict {
        match parts.iter().find(|v| !v.holds) {
            None => Verdict::pass(),
            Some(v) => flag(false, v.counterexample.clone()),
        }
    };
    let is_ag_groupoid = is_left_invertive.clone();
    let is_ag_group = first_failure(&[&has_left_identity, &has_inverses, &is_left_invertive]);
    let is_abelian_group = first_failure(&[
        &has_left_identity,
        &has_inverses,
        &is_associative,
        &is_commutative,
    ]);

    StructureReport {
        order: table.order(),
        left_identity,
        is_quasigroup,
        has_left_identity,
        has_right_identity,
        has_inverses,
        is_left_invertive,
        is_medial,
        is_paramedial,
        is_commutative,
        is_associative,
        is_idempotent,
        is_ag_groupoid,
        is_ag_group,
        is_abelian_group,
    }
}

impl StructureReport {
    /// `(name, verdict)` for every flag, in report order.
    pub fn flags(&self) -> [(&'static str, &Verdict); 13] {
        [
            ("is_quasigroup", &self.is_quasigroup),
            ("has_left_identity", &self.has_left_identity),
            ("has_right_identity", &self.has_right_identity),
            ("has_inverses", &self.has_inverses),
            ("is_left_invertive", &self.is_left_invertive),
            ("is_medial", &self.is_medial),
            ("is_paramedial", &self.is_paramedial),
            ("is_commutative", &self.is_commutative),
            ("is_associative", &self.is_associative),
            ("is_idempotent", &self.is_idempotent),
            ("is_ag_groupoid", &self.is_ag_groupoid),
            ("is_ag_group", &self.is_ag_group),
            ("is_abelian_group", &self.is_abelian_group),
        ]
    }

    /// Implications every report must satisfy. An idempotent AG-group of
    /// order above 1 is reported here rather than hidden.
    pub fn hierarchy_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let ag = self.is_ag_group.holds;
        let mut require = |cond: bool, what: &str| {
            if !cond {
                out.push(what.to_string());
            }
        };
        if ag {
            require(self.is_quasigroup.holds, "AG-group but not a quasigroup");
            require(
                self.has_left_identity.holds,
                "AG-group without left identity",
            );
            require(self.has_inverses.holds, "AG-group without inverses");
            require(self.is_left_invertive.holds, "AG-group not left invertive");
            require(self.is_medial.holds, "AG-group not medial");
            require(self.is_paramedial.holds, "AG-group not paramedial");
            if self.is_commutative.holds || self.is_associative.holds {
                require(
                    self.is_abelian_group.holds,
                    "commutative or associative AG-group that is not an abelian group",
                );
            }
            if self.is_idempotent.holds {
                require(self.order == 1, "idempotent AG-group of order > 1");
            }
        }
        out
    }
}

/// One standard identity and how it fared; evaluation errors (missing identity or
/// inverses) are reported per item.
#[derive(Clone, Debug)]
pub struct SuiteEntry {
    pub item: &'static str,
    pub outcome: Result<Verdict>,
}

pub fn pre_l1_suite(table: &CayleyTable) -> Vec<SuiteEntry> {
    identity::pre_l1_presets()
        .into_iter()
        .map(|p: Preset| SuiteEntry {
            item: p.name,
            outcome: p.check(table),
        })
        .collect()
}
