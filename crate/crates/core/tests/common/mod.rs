//! Exhaustive enumeration of sequential schedules for tiny systems. Rounds
//! are recomputed here from the state sequence, independently of the
//! scheduler's accountant.

use amoebot::engine::{AmoebotId, System};
use std::collections::BTreeSet;

pub struct Outcome {
    pub schedule: Vec<AmoebotId>,
    pub rounds: u64,
    pub erosions: usize,
    pub leaders: usize,
}

fn enabled(sys: &System) -> BTreeSet<AmoebotId> {
    sys.ids().filter(|&i| !sys.enabled_actions(i).is_empty()).collect()
}

/// Completed rounds for a run given the activation sequence and the
/// enabled set after each step (`en[0]` is the initial one).
pub fn count_rounds(schedule: &[AmoebotId], en: &[BTreeSet<AmoebotId>]) -> u64 {
    let mut rounds = 0;
    let mut start = 0;
    while start < schedule.len() {
        let snapshot = &en[start];
        let mut end = None;
        for t in start + 1..=schedule.len() {
            let done = snapshot.iter().all(|a| {
                (start + 1..=t).any(|s| schedule[s - 1] == *a || !en[s].contains(a))
            });
            if done {
                end = Some(t);
                break;
            }
        }
        match end {
            Some(t) => {
                rounds += 1;
                start = t;
            }
            None => break,
        }
    }
    rounds
}

fn explore(sys: &System, schedule: &mut Vec<AmoebotId>, en: &mut Vec<BTreeSet<AmoebotId>>, out: &mut Vec<Outcome>) {
    if !sys.leaders().is_empty() {
        let erosions = schedule.len() - sys.len() - 1;
        out.push(Outcome {
            schedule: schedule.clone(),
            rounds: count_rounds(schedule, en),
            erosions,
            leaders: sys.leaders().len(),
        });
        return;
    }
    let now = en.last().expect("nonempty").clone();
    assert!(!now.is_empty(), "stuck before a leader exists");
    for a in now {
        let mut next = sys.clone();
        let kind = next.enabled_actions(a)[0];
        next.exec(a, kind).unwrap();
        schedule.push(a);
        en.push(enabled(&next));
        explore(&next, schedule, en, out);
        schedule.pop();
        en.pop();
    }
}

pub fn all_schedules(sys: &System) -> Vec<Outcome> {
    let mut out = Vec::new();
    explore(sys, &mut Vec::new(), &mut vec![enabled(sys)], &mut out);
    out
}
