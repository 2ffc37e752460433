//! Re-execution of recorded traces.

use crate::engine::{Algorithm, AmoebotId, Enabled, System};
use crate::scheduler::{candidate_structure_violation, RoundAccountant, RoundEvent, TraceEvent, TraceSummary};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReplayMode {
    /// Every recorded action must be the one enabled at its commit point and
    /// must reproduce its operation log.
    #[serde(rename = "check-guards")]
    CheckGuards,
    /// As `CheckGuards`, plus connectivity and contractibility of the
    /// candidate structure after every erosion.
    #[serde(rename = "check-topology-each-erode")]
    CheckTopology,
}

impl FromStr for ReplayMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "check-guards" => Ok(ReplayMode::CheckGuards),
            "check-topology-each-erode" | "check-topology" => Ok(ReplayMode::CheckTopology),
            _ => Err(format!("unknown replay mode '{s}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Divergence {
    /// Index into the event list; equals the event count for end-of-trace
    /// checks.
    pub index: usize,
    pub step: Option<u64>,
    pub reason: String,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.step {
            Some(s) => write!(f, "event {} (step {s}): {}", self.index, self.reason),
            None => write!(f, "after event {}: {}", self.index, self.reason),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub mode: ReplayMode,
    pub events_checked: usize,
    pub topology_checks: usize,
    pub divergence: Option<Divergence>,
    pub leaders: Vec<AmoebotId>,
}

impl ReplayReport {
    pub fn passed(&self) -> bool {
        self.divergence.is_none()
    }

    /// True when every event replayed cleanly, ignoring the end-of-trace
    /// leader count.
    pub fn events_legal(&self) -> bool {
        self.divergence.as_ref().is_none_or(|d| d.step.is_none() && d.index == self.events_checked)
    }
}

/// Re-execute `events` in order from `initial`. When `check_rounds` is set
/// the round indices are recomputed under sequential semantics and
/// compared. Stops at the first divergence; returns the final system.
pub fn replay<A: Algorithm + ?Sized>(
    alg: &A,
    initial: System,
    events: &[TraceEvent],
    mode: ReplayMode,
    check_rounds: bool,
) -> (ReplayReport, System) {
    let mut sys = initial;
    let mut report =
        ReplayReport { mode, events_checked: 0, topology_checks: 0, divergence: None, leaders: Vec::new() };
    let mut acct = RoundAccountant::new(sys.ids().filter(|&i| sys.guard(alg, i).is_some()).collect::<Vec<_>>());
    let mut last_step = None;
    for (index, ev) in events.iter().enumerate() {
        let diverge = |reason: String| Some(Divergence { index, step: Some(ev.step), reason });
        if ev.amoebot.index() >= sys.len() {
            report.divergence = diverge(format!("unknown amoebot {}", ev.amoebot));
            break;
        }
        if last_step.is_some_and(|s| ev.step <= s) {
            report.divergence = diverge("step indices not increasing".into());
            break;
        }
        last_step = Some(ev.step);
        let expected = Enabled { kind: ev.action, rule: ev.rule };
        match sys.guard(alg, ev.amoebot) {
            Some(e) if e == expected => {}
            other => {
                report.divergence = diverge(format!(
                    "recorded {} (rule {:?}) but guard gives {:?}",
                    ev.action,
                    ev.rule.map(|r| r.number()),
                    other.map(|e| (e.kind, e.rule.map(|r| r.number())))
                ));
                break;
            }
        }
        if check_rounds && ev.round != acct.round_index() {
            report.divergence =
                diverge(format!("recorded round {} but recomputed round {}", ev.round, acct.round_index()));
            break;
        }
        match sys.execute(alg, ev.amoebot, expected) {
            Ok(ops) if ops == ev.ops => {}
            Ok(_) => {
                report.divergence = diverge("operation log differs".into());
                break;
            }
            Err(e) => {
                report.divergence = diverge(e.to_string());
                break;
            }
        }
        report.events_checked += 1;
        if check_rounds {
            let enabled: Vec<bool> = sys.ids().map(|i| sys.guard(alg, i).is_some()).collect();
            acct.advance(
                RoundEvent::Committed(ev.amoebot),
                |m| enabled[m.index()],
                || sys.ids().filter(|m| enabled[m.index()]).collect(),
            );
        }
        if mode == ReplayMode::CheckTopology && ev.action == crate::engine::ActionKind::Erode {
            report.topology_checks += 1;
            if let Some(v) = candidate_structure_violation(&sys, index) {
                report.divergence = diverge(v.to_string());
                break;
            }
        }
    }
    report.leaders = sys.leaders();
    if report.divergence.is_none() && report.leaders.len() != 1 {
        report.divergence = Some(Divergence {
            index: events.len(),
            step: None,
            reason: format!("{} leader(s) at end of trace", report.leaders.len()),
        });
    }
    (report, sys)
}

/// Compare a replay against the trace summary: leader, erosion count and
/// (for sequential traces) the round total.
pub fn check_summary(
    report: &ReplayReport,
    events: &[TraceEvent],
    summary: &TraceSummary,
    rounds: Option<u64>,
) -> Option<Divergence> {
    let end = |reason: String| Some(Divergence { index: events.len(), step: None, reason });
    if report.leaders.first().copied() != summary.leader {
        return end(format!("summary leader {:?} but replay gives {:?}", summary.leader, report.leaders));
    }
    let erosions = events.iter().filter(|e| e.action == crate::engine::ActionKind::Erode).count() as u64;
    if erosions != summary.erosions {
        return end(format!("summary reports {} erosions, trace has {erosions}", summary.erosions));
    }
    if let Some(r) = rounds {
        if r != summary.rounds {
            return end(format!("summary reports {} rounds, replay gives {r}", summary.rounds));
        }
    }
    None
}

/// Sequential round total of a trace, recomputed from its events.
pub fn recompute_rounds<A: Algorithm + ?Sized>(alg: &A, initial: System, events: &[TraceEvent]) -> u64 {
    let mut sys = initial;
    let mut acct = RoundAccountant::new(sys.ids().filter(|&i| sys.guard(alg, i).is_some()).collect::<Vec<_>>());
    for ev in events {
        if sys.execute(alg, ev.amoebot, Enabled { kind: ev.action, rule: ev.rule }).is_err() {
            break;
        }
        let enabled: Vec<bool> = sys.ids().map(|i| sys.guard(alg, i).is_some()).collect();
        acct.advance(
            RoundEvent::Committed(ev.amoebot),
            |m| enabled[m.index()],
            || sys.ids().filter(|m| enabled[m.index()]).collect(),
        );
    }
    acct.round_index()
}
