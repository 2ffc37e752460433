//! Unfair adversaries, round accounting, and the lock-based asynchronous
//! interleaver.

use crate::engine::{
    ActionKind, AmoebotId, Algorithm, Cursor, Enabled, EngineError, Erosion, Op, Rule, StepStatus, System,
};
use crate::geometry::{Dim, Port};
use crate::replay::{self, ReplayMode};
use crate::topology::{self, BettiNumbers, TopologyError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SchedulerError {
    #[error("initial configuration is not connected")]
    Disconnected,
    #[error("initial configuration is not contractible (betti {0:?})")]
    NotContractible(BettiNumbers),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("script names amoebot {0} at step {1}, but it is not enabled")]
    ScriptNotEnabled(AmoebotId, u64),
    #[error("script ran out after {0} steps")]
    ScriptExhausted(u64),
    #[error("step limit {0} reached before termination")]
    StepLimit(u64),
    #[error("lock attempt budget {0} exhausted")]
    LockBudget(u64),
    #[error("unknown {what} '{value}'")]
    Parse { what: &'static str, value: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Sequential,
    Async,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Sequential => "sequential",
            Mode::Async => "async",
        })
    }
}

impl FromStr for Mode {
    type Err = SchedulerError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sequential" => Ok(Mode::Sequential),
            "async" => Ok(Mode::Async),
            _ => Err(SchedulerError::Parse { what: "mode", value: s.into() }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    UniformRandom,
    FixedPriority,
    RoundStretcher,
    Scripted,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] =
        [PolicyKind::UniformRandom, PolicyKind::FixedPriority, PolicyKind::RoundStretcher, PolicyKind::Scripted];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::UniformRandom => "uniform-random",
            PolicyKind::FixedPriority => "fixed-priority",
            PolicyKind::RoundStretcher => "round-stretcher",
            PolicyKind::Scripted => "scripted",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = SchedulerError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| SchedulerError::Parse { what: "policy", value: s.into() })
    }
}

/// Who the adversary activates. Any enabled amoebot may be picked.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversaryPolicy {
    pub kind: PolicyKind,
    pub seed: u64,
    /// Activation order for `scripted`; ignored otherwise.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub script: Vec<AmoebotId>,
}

impl AdversaryPolicy {
    pub fn new(kind: PolicyKind, seed: u64) -> Self {
        Self { kind, seed, script: Vec::new() }
    }

    pub fn scripted(script: Vec<AmoebotId>) -> Self {
        Self { kind: PolicyKind::Scripted, seed: 0, script }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    /// Scheduler steps (actions in sequential mode, operations and lock
    /// attempts in async mode).
    pub max_steps: u64,
    /// Failed lock attempts tolerated in async mode.
    pub lock_budget: u64,
    /// Check connectivity and contractibility of the candidate structure
    /// after every erosion.
    pub check_safety: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Self { max_steps: 10_000_000, lock_budget: 1_000_000, check_safety: true }
    }
}

impl FromStr for Limits {
    type Err = SchedulerError;

    /// `key=value` pairs separated by commas, e.g. `max_steps=1000,safety=off`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut l = Limits::default();
        let bad = |v: &str| SchedulerError::Parse { what: "limit", value: v.to_string() };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| bad(part))?;
            match k.trim() {
                "max_steps" => l.max_steps = v.trim().parse().map_err(|_| bad(part))?,
                "lock_budget" => l.lock_budget = v.trim().parse().map_err(|_| bad(part))?,
                "safety" => {
                    l.check_safety = match v.trim() {
                        "on" | "true" => true,
                        "off" | "false" => false,
                        _ => return Err(bad(part)),
                    }
                }
                _ => return Err(bad(part)),
            }
        }
        Ok(l)
    }
}

/// Round bookkeeping: the current round index and the members of the
/// round's start snapshot that have neither acted nor become disabled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundAccountant {
    round_index: u64,
    pending: BTreeSet<AmoebotId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundEvent {
    /// An action by this amoebot committed.
    Committed(AmoebotId),
    /// Memory changed; re-check who is still enabled or executing.
    Reevaluate,
}

impl RoundAccountant {
    pub fn new(active: impl IntoIterator<Item = AmoebotId>) -> Self {
        Self { round_index: 0, pending: active.into_iter().collect() }
    }

    pub fn round_index(&self) -> u64 {
        self.round_index
    }

    pub fn pending(&self) -> &BTreeSet<AmoebotId> {
        &self.pending
    }

    /// Apply `event`. `active(m)` tells whether `m` is currently enabled or
    /// executing; `snapshot` lists every such amoebot and is consulted only
    /// when a round ends.
    pub fn advance(
        &mut self,
        event: RoundEvent,
        active: impl Fn(AmoebotId) -> bool,
        snapshot: impl FnOnce() -> Vec<AmoebotId>,
    ) {
        if self.pending.is_empty() {
            return;
        }
        if let RoundEvent::Committed(id) = event {
            self.pending.remove(&id);
        }
        self.pending.retain(|&m| active(m));
        if self.pending.is_empty() {
            self.round_index += 1;
            self.pending = snapshot().into_iter().collect();
        }
    }
}

/// One committed action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    /// Scheduler step at commit; strictly increasing.
    pub step: u64,
    pub amoebot: AmoebotId,
    pub action: ActionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<Rule>,
    /// Round in which the action committed.
    pub round: u64,
    pub ops: Vec<Op>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// Candidate structure disconnected or not contractible after an erosion.
    Safety { event: usize, components: usize, betti: Option<BettiNumbers> },
    /// Nothing enabled although no leader exists.
    NoEnabled { event: usize },
    MultipleLeaders { event: usize, leaders: Vec<AmoebotId> },
    /// A `nbrcand` flag disagrees with the neighbour's candidacy while no
    /// action is in progress.
    NbrcandMismatch { event: usize, amoebot: AmoebotId, port: Port },
    FailedOperation { event: usize, amoebot: AmoebotId, action: ActionKind, detail: String },
    RoundBound { rounds: u64, n: usize },
    ErosionCount { erosions: u64, n: usize },
    NotSerializable { detail: String },
}

impl Violation {
    /// Index of the last trace event at the time the violation was seen.
    pub fn event(&self) -> Option<usize> {
        match self {
            Violation::Safety { event, .. }
            | Violation::NoEnabled { event }
            | Violation::MultipleLeaders { event, .. }
            | Violation::NbrcandMismatch { event, .. }
            | Violation::FailedOperation { event, .. } => Some(*event),
            _ => None,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Safety { event, components, betti } => {
                write!(f, "event {event}: candidate structure has {components} component(s), betti {betti:?}")
            }
            Violation::NoEnabled { event } => write!(f, "event {event}: no amoebot enabled and no leader"),
            Violation::MultipleLeaders { event, leaders } => write!(f, "event {event}: several leaders {leaders:?}"),
            Violation::NbrcandMismatch { event, amoebot, port } => {
                write!(f, "event {event}: nbrcand of {amoebot} on port {port} is stale")
            }
            Violation::FailedOperation { event, amoebot, action, detail } => {
                write!(f, "event {event}: {action} of {amoebot} failed: {detail}")
            }
            Violation::RoundBound { rounds, n } => write!(f, "{rounds} rounds exceeds n + 1 = {}", n + 1),
            Violation::ErosionCount { erosions, n } => write!(f, "{erosions} erosions, expected {}", n.saturating_sub(1)),
            Violation::NotSerializable { detail } => write!(f, "commit order is not a legal sequential run: {detail}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub format: String,
    pub version: u32,
    pub dim: Dim,
    pub mode: Mode,
    pub policy: PolicyKind,
    pub seed: u64,
    pub n: usize,
}

pub const TRACE_FORMAT: &str = "amoebot-trace";
pub const TRACE_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub leader: Option<AmoebotId>,
    pub rounds: u64,
    pub erosions: u64,
    pub actions: u64,
    pub steps: u64,
    /// Erosions justified by Rule 1, 2 and 3.
    pub rule_counts: [u64; 3],
    #[serde(default)]
    pub lock_failures: u64,
    /// Lock acquisitions whose guard no longer held under the lock.
    #[serde(default)]
    pub aborted: u64,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub header: TraceHeader,
    pub events: Vec<TraceEvent>,
    pub summary: TraceSummary,
}

impl Trace {
    /// Exactly one leader and no invariant violations.
    pub fn succeeded(&self) -> bool {
        self.summary.leader.is_some() && self.summary.violations.is_empty()
    }

    pub fn rule_count(&self, rule: Rule) -> u64 {
        self.summary.rule_counts[rule.number() as usize - 1]
    }
}

/// Refuse disconnected or non-contractible starting configurations.
pub fn check_initial(sys: &System) -> Result<(), SchedulerError> {
    let pos = sys.positions();
    if !topology::is_connected(sys.dim(), &pos) {
        return Err(SchedulerError::Disconnected);
    }
    let b = topology::euler_betti(sys.dim(), &pos)?;
    if !b.is_contractible() {
        return Err(SchedulerError::NotContractible(b));
    }
    Ok(())
}

/// Safety check of the candidate structure; `None` when it holds.
pub fn candidate_structure_violation(sys: &System, event: usize) -> Option<Violation> {
    let pos = sys.candidate_structure();
    if pos.is_empty() {
        return Some(Violation::Safety { event, components: 0, betti: None });
    }
    let components = topology::component_count(sys.dim(), &pos);
    if components != 1 {
        return Some(Violation::Safety { event, components, betti: None });
    }
    match topology::euler_betti(sys.dim(), &pos) {
        Ok(b) if b.is_contractible() => None,
        Ok(b) => Some(Violation::Safety { event, components, betti: Some(b) }),
        Err(_) => Some(Violation::Safety { event, components, betti: None }),
    }
}

struct Chooser {
    policy: AdversaryPolicy,
    rng: ChaCha8Rng,
    script_pos: usize,
}

impl Chooser {
    fn new(policy: &AdversaryPolicy) -> Self {
        Self { policy: policy.clone(), rng: ChaCha8Rng::seed_from_u64(policy.seed), script_pos: 0 }
    }

    fn uniform<T: Copy>(&mut self, items: &[T]) -> T {
        items[self.rng.gen_range(0..items.len())]
    }

    fn next_scripted(&mut self, step: u64) -> Result<AmoebotId, SchedulerError> {
        let id = *self.policy.script.get(self.script_pos).ok_or(SchedulerError::ScriptExhausted(step))?;
        self.script_pos += 1;
        Ok(id)
    }
}

/// Shared state of one run.
struct Run<'a, A: Algorithm + ?Sized> {
    alg: &'a A,
    sys: System,
    /// Guard result per amoebot on the current memory.
    enabled: Vec<Option<Enabled>>,
    acct: RoundAccountant,
    events: Vec<TraceEvent>,
    summary: TraceSummary,
    limits: Limits,
}

impl<'a, A: Algorithm + ?Sized> Run<'a, A> {
    fn new(alg: &'a A, sys: System, limits: Limits) -> Self {
        let enabled: Vec<_> = sys.ids().map(|i| sys.guard(alg, i)).collect();
        let acct = RoundAccountant::new(sys.ids().filter(|i| enabled[i.index()].is_some()));
        Self { alg, sys, enabled, acct, events: Vec::new(), summary: TraceSummary::default(), limits }
    }

    fn refresh(&mut self, ids: &[AmoebotId]) {
        for &i in ids {
            self.enabled[i.index()] = self.sys.guard(self.alg, i);
        }
    }

    fn enabled_ids(&self) -> Vec<AmoebotId> {
        self.sys.ids().filter(|i| self.enabled[i.index()].is_some()).collect()
    }

    fn last_event(&self) -> usize {
        self.events.len().saturating_sub(1)
    }

    fn violation(&mut self, v: Violation) {
        self.summary.violations.push(v);
    }

    /// Bookkeeping after an action commits. Returns false when the run
    /// must stop because of a violation.
    fn commit(&mut self, step: u64, id: AmoebotId, action: Enabled, ops: Vec<Op>, in_flight: &dyn Fn(AmoebotId) -> bool) -> bool {
        self.events.push(TraceEvent {
            step,
            amoebot: id,
            action: action.kind,
            rule: action.rule,
            round: self.acct.round_index(),
            ops,
        });
        self.summary.actions += 1;
        if action.kind == ActionKind::Erode {
            self.summary.erosions += 1;
            if let Some(r) = action.rule {
                self.summary.rule_counts[r.number() as usize - 1] += 1;
            }
        }
        let ball = self.sys.ball2(id);
        self.refresh(&ball);
        let enabled = &self.enabled;
        let ids: Vec<AmoebotId> = self.sys.ids().collect();
        self.acct.advance(
            RoundEvent::Committed(id),
            |m| enabled[m.index()].is_some() || in_flight(m),
            || ids.into_iter().filter(|m| enabled[m.index()].is_some() || in_flight(*m)).collect(),
        );
        let leaders = self.sys.leaders();
        if leaders.len() > 1 {
            let event = self.last_event();
            self.violation(Violation::MultipleLeaders { event, leaders });
            return false;
        }
        if action.kind == ActionKind::Erode && self.limits.check_safety {
            if let Some(v) = candidate_structure_violation(&self.sys, self.last_event()) {
                self.violation(v);
                return false;
            }
        }
        true
    }

    fn finish(mut self, header: TraceHeader, sequential: bool) -> (Trace, System) {
        let n = self.sys.len();
        self.summary.leader = self.sys.leaders().first().copied();
        self.summary.rounds = self.acct.round_index();
        if self.summary.violations.is_empty() {
            if self.summary.erosions != n as u64 - 1 {
                self.summary.violations.push(Violation::ErosionCount { erosions: self.summary.erosions, n });
            }
            if sequential && self.summary.rounds > n as u64 + 1 {
                self.summary.violations.push(Violation::RoundBound { rounds: self.summary.rounds, n });
            }
        }
        (Trace { header, events: self.events, summary: self.summary }, self.sys)
    }
}

fn header(sys: &System, mode: Mode, policy: &AdversaryPolicy) -> TraceHeader {
    TraceHeader {
        format: TRACE_FORMAT.into(),
        version: TRACE_VERSION,
        dim: sys.dim(),
        mode,
        policy: policy.kind,
        seed: policy.seed,
        n: sys.len(),
    }
}

/// Run Algorithm 1 under an unfair sequential adversary.
pub fn run_sequential(sys: System, policy: &AdversaryPolicy, limits: Limits) -> Result<Trace, SchedulerError> {
    run_sequential_with(&Erosion, sys, policy, limits).map(|(t, _)| t)
}

/// Sequential run of any algorithm; also returns the final system.
pub fn run_sequential_with<A: Algorithm + ?Sized>(
    alg: &A,
    sys: System,
    policy: &AdversaryPolicy,
    limits: Limits,
) -> Result<(Trace, System), SchedulerError> {
    check_initial(&sys)?;
    let header = header(&sys, Mode::Sequential, policy);
    let mut run = Run::new(alg, sys, limits);
    let mut chooser = Chooser::new(policy);
    let none = |_: AmoebotId| false;
    let mut step = 0u64;
    while run.sys.leaders().is_empty() {
        if step >= limits.max_steps {
            return Err(SchedulerError::StepLimit(limits.max_steps));
        }
        let enabled = run.enabled_ids();
        if enabled.is_empty() {
            let event = run.last_event();
            run.violation(Violation::NoEnabled { event });
            break;
        }
        let pick = match policy.kind {
            PolicyKind::UniformRandom => chooser.uniform(&enabled),
            PolicyKind::FixedPriority => enabled[0],
            PolicyKind::RoundStretcher => stretch_pick(&mut run, &mut chooser, &enabled),
            PolicyKind::Scripted => {
                let id = chooser.next_scripted(step)?;
                if run.enabled.get(id.index()).copied().flatten().is_none() {
                    return Err(SchedulerError::ScriptNotEnabled(id, step));
                }
                id
            }
        };
        let action = run.enabled[pick.index()].expect("picked amoebot is enabled");
        let ops = match run.sys.execute(alg, pick, action) {
            Ok(ops) => ops,
            Err(e) => {
                let event = run.events.len();
                run.violation(Violation::FailedOperation {
                    event,
                    amoebot: pick,
                    action: action.kind,
                    detail: e.to_string(),
                });
                break;
            }
        };
        if !run.commit(step, pick, action, ops, &none) {
            break;
        }
        step += 1;
        if let Some((amoebot, port)) = run.sys.nbrcand_mismatch() {
            let event = run.last_event();
            run.violation(Violation::NbrcandMismatch { event, amoebot, port });
            break;
        }
    }
    run.summary.steps = step;
    Ok(run.finish(header, true))
}

/// Activate a pending member of the current round, preferring the action
/// that satisfies the most other pending members by disabling them.
fn stretch_pick<A: Algorithm + ?Sized>(run: &mut Run<'_, A>, chooser: &mut Chooser, enabled: &[AmoebotId]) -> AmoebotId {
    let pending = run.acct.pending().clone();
    let mut candidates: Vec<AmoebotId> = enabled.iter().copied().filter(|i| pending.contains(i)).collect();
    if candidates.is_empty() {
        candidates = enabled.to_vec();
    }
    let mut best = Vec::new();
    let mut best_score = -1i64;
    for &c in &candidates {
        let action = run.enabled[c.index()].expect("enabled");
        let score = if action.kind == ActionKind::Setup {
            0
        } else {
            let ball = run.sys.ball2(c);
            let saved = run.sys.save(&ball);
            let _ = run.sys.execute(run.alg, c, action);
            let disabled = ball
                .iter()
                .filter(|&&m| m != c && pending.contains(&m) && run.sys.guard(run.alg, m).is_none())
                .count() as i64;
            run.sys.restore(&ball, saved);
            disabled
        };
        if score > best_score {
            best_score = score;
            best.clear();
        }
        if score == best_score {
            best.push(c);
        }
    }
    chooser.uniform(&best)
}

#[derive(Debug, Clone)]
enum Flight {
    /// Lock held; guard not yet re-evaluated.
    Locked(Vec<AmoebotId>),
    Running { locks: Vec<AmoebotId>, action: Enabled, cursor: Cursor, ops: Vec<Op> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Move {
    Lock(AmoebotId),
    Advance(AmoebotId),
}

impl Move {
    fn amoebot(self) -> AmoebotId {
        match self {
            Move::Lock(a) | Move::Advance(a) => a,
        }
    }
}

/// Run Algorithm 1 under an unfair asynchronous adversary. Each action
/// body runs under an atomically acquired lock on the amoebot and its
/// neighbours; the interleaver schedules lock attempts and single
/// operations. The commit order is replayed sequentially at the end.
pub fn run_async(sys: System, policy: &AdversaryPolicy, limits: Limits) -> Result<Trace, SchedulerError> {
    run_async_with(&Erosion, sys, policy, limits).map(|(t, _)| t)
}

pub fn run_async_with<A: Algorithm + ?Sized>(
    alg: &A,
    sys: System,
    policy: &AdversaryPolicy,
    limits: Limits,
) -> Result<(Trace, System), SchedulerError> {
    check_initial(&sys)?;
    let initial = sys.clone();
    let header = header(&sys, Mode::Async, policy);
    let n = sys.len();
    let mut run = Run::new(alg, sys, limits);
    let mut chooser = Chooser::new(policy);
    let mut holder: Vec<Option<AmoebotId>> = vec![None; n];
    let mut flights: Vec<Option<Flight>> = vec![None; n];
    let mut blocked = vec![false; n];
    let mut step = 0u64;

    loop {
        let leader_known = !run.sys.leaders().is_empty();
        let mut moves = Vec::new();
        for id in run.sys.ids() {
            if flights[id.index()].is_some() {
                moves.push(Move::Advance(id));
            } else if !leader_known && !blocked[id.index()] && run.enabled[id.index()].is_some() {
                moves.push(Move::Lock(id));
            }
        }
        if moves.is_empty() {
            if !leader_known {
                let event = run.last_event();
                run.violation(Violation::NoEnabled { event });
            }
            break;
        }
        if step >= limits.max_steps {
            return Err(SchedulerError::StepLimit(limits.max_steps));
        }
        let mv = match policy.kind {
            PolicyKind::UniformRandom => chooser.uniform(&moves),
            PolicyKind::FixedPriority => moves[0],
            PolicyKind::RoundStretcher => {
                let pending = run.acct.pending();
                let preferred: Vec<Move> = moves.iter().copied().filter(|m| pending.contains(&m.amoebot())).collect();
                chooser.uniform(if preferred.is_empty() { &moves } else { &preferred })
            }
            PolicyKind::Scripted => {
                let id = chooser.next_scripted(step)?;
                *moves.iter().find(|m| m.amoebot() == id).ok_or(SchedulerError::ScriptNotEnabled(id, step))?
            }
        };
        step += 1;
        let mut stop = false;
        match mv {
            Move::Lock(a) => {
                let mut locks = vec![a];
                locks.extend(run.sys.neighbors(a).map(|(_, m)| m));
                if locks.iter().all(|m| holder[m.index()].is_none()) {
                    for m in &locks {
                        holder[m.index()] = Some(a);
                    }
                    flights[a.index()] = Some(Flight::Locked(locks));
                } else {
                    blocked[a.index()] = true;
                    run.summary.lock_failures += 1;
                    if run.summary.lock_failures > limits.lock_budget {
                        return Err(SchedulerError::LockBudget(limits.lock_budget));
                    }
                }
            }
            Move::Advance(a) => {
                let flight = flights[a.index()].take().expect("advance of an in-flight amoebot");
                let release = |holder: &mut Vec<Option<AmoebotId>>, blocked: &mut Vec<bool>, locks: &[AmoebotId]| {
                    for m in locks {
                        holder[m.index()] = None;
                    }
                    blocked.iter_mut().for_each(|b| *b = false);
                };
                match flight {
                    Flight::Locked(locks) => match run.sys.guard(alg, a) {
                        Some(action) => {
                            flights[a.index()] =
                                Some(Flight::Running { locks, action, cursor: Cursor::default(), ops: Vec::new() })
                        }
                        None => {
                            run.summary.aborted += 1;
                            release(&mut holder, &mut blocked, &locks);
                        }
                    },
                    Flight::Running { locks, action, mut cursor, mut ops } => {
                        match run.sys.step(alg, a, action, &mut cursor, &mut ops) {
                            Ok(StepStatus::Continue) => {
                                let ball = run.sys.ball2(a);
                                run.refresh(&ball);
                                flights[a.index()] = Some(Flight::Running { locks, action, cursor, ops });
                            }
                            Ok(StepStatus::Done) => {
                                release(&mut holder, &mut blocked, &locks);
                                let in_flight = |m: AmoebotId| flights[m.index()].is_some();
                                stop = !run.commit(step, a, action, ops, &in_flight);
                            }
                            Err(e) => {
                                let event = run.events.len();
                                run.violation(Violation::FailedOperation {
                                    event,
                                    amoebot: a,
                                    action: action.kind,
                                    detail: e.to_string(),
                                });
                                stop = true;
                            }
                        }
                    }
                }
            }
        }
        if stop {
            break;
        }
        let enabled = &run.enabled;
        let flights_ref = &flights;
        let ids: Vec<AmoebotId> = run.sys.ids().collect();
        let active = |m: AmoebotId| enabled[m.index()].is_some() || flights_ref[m.index()].is_some();
        run.acct.advance(RoundEvent::Reevaluate, active, || ids.into_iter().filter(|&m| active(m)).collect());
    }
    run.summary.steps = step;
    if run.summary.violations.is_empty() {
        if let Some(mismatch) = run.sys.nbrcand_mismatch() {
            let event = run.last_event();
            run.violation(Violation::NbrcandMismatch { event, amoebot: mismatch.0, port: mismatch.1 });
        }
        let (report, replayed) = replay::replay(alg, initial, &run.events, ReplayMode::CheckGuards, false);
        if let Some(d) = report.divergence {
            run.violation(Violation::NotSerializable { detail: d.to_string() });
        } else if replayed.states() != run.sys.states() {
            run.violation(Violation::NotSerializable { detail: "final states differ".into() });
        }
    }
    Ok(run.finish(header, false))
}

/// Run in the requested mode.
pub fn run(sys: System, mode: Mode, policy: &AdversaryPolicy, limits: Limits) -> Result<Trace, SchedulerError> {
    match mode {
        Mode::Sequential => run_sequential(sys, policy, limits),
        Mode::Async => run_async(sys, policy, limits),
    }
}

/// Outcome of one framework-convention check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Holds for every stationary algorithm.
    Trivial,
}

impl Verdict {
    pub fn ok(self) -> bool {
        self != Verdict::Fail
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConventionReport {
    pub algorithm: String,
    /// Every enabled action, run in isolation, finished without a failed
    /// operation, and no guard issued a write or move.
    pub validity: Verdict,
    /// Action logs contain only Connected/Read/Write operations.
    pub phase_structure: Verdict,
    pub monotonicity: Verdict,
    pub actions_checked: u64,
    pub guards_checked: u64,
    pub notes: Vec<String>,
}

impl ConventionReport {
    pub fn passed(&self) -> bool {
        self.validity.ok() && self.phase_structure.ok() && self.monotonicity.ok()
    }
}

/// Mechanically check the framework conventions over operation logs. Each
/// instance is driven by a seeded random sequential adversary; at every
/// step every amoebot's guard is logged and every enabled action is also
/// executed in isolation on a copy.
pub fn check_conventions<A: Algorithm + ?Sized>(alg: &A, instances: &[System], seed: u64) -> ConventionReport {
    let mut report = ConventionReport {
        algorithm: alg.name().into(),
        validity: Verdict::Pass,
        phase_structure: Verdict::Pass,
        monotonicity: if alg.is_stationary() { Verdict::Trivial } else { Verdict::Fail },
        actions_checked: 0,
        guards_checked: 0,
        notes: Vec::new(),
    };
    if !alg.is_stationary() {
        report.notes.push("algorithm declares movement; monotonicity is not established".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let note = |report: &mut ConventionReport, s: String| {
        if report.notes.len() < 20 {
            report.notes.push(s);
        }
    };
    for (k, inst) in instances.iter().enumerate() {
        let mut sys = inst.clone();
        for _ in 0..(4 * sys.len() + 4) {
            if !sys.leaders().is_empty() {
                break;
            }
            let mut enabled = Vec::new();
            for id in sys.ids() {
                let mut log = Vec::new();
                let g = sys.guard_logged(alg, id, &mut log);
                report.guards_checked += 1;
                if log.iter().any(|o| o.is_write() || o.is_move()) {
                    report.validity = Verdict::Fail;
                    note(&mut report, format!("instance {k}: guard of {id} issued a write or move"));
                }
                if let Some(e) = g {
                    enabled.push((id, e));
                }
            }
            if enabled.is_empty() {
                note(&mut report, format!("instance {k}: no amoebot enabled before termination"));
                report.validity = Verdict::Fail;
                break;
            }
            let mut runnable = Vec::new();
            for &(id, e) in &enabled {
                let mut copy = sys.clone();
                let mut log = Vec::new();
                let mut cursor = Cursor::default();
                let outcome = loop {
                    match copy.step(alg, id, e, &mut cursor, &mut log) {
                        Ok(StepStatus::Continue) => {}
                        Ok(StepStatus::Done) => break Ok(()),
                        Err(f) => break Err(f),
                    }
                };
                report.actions_checked += 1;
                if log.iter().any(Op::is_move) {
                    report.phase_structure = Verdict::Fail;
                    note(&mut report, format!("instance {k}: {} of {id} contains a move", e.kind));
                }
                match outcome {
                    Ok(()) if !log.iter().any(Op::failed) => runnable.push((id, copy)),
                    Ok(()) => {
                        report.validity = Verdict::Fail;
                        note(&mut report, format!("instance {k}: {} of {id} had a failed operation", e.kind));
                    }
                    Err(f) => {
                        report.validity = Verdict::Fail;
                        note(&mut report, format!("instance {k}: {} of {id} failed: {f}", e.kind));
                    }
                }
            }
            if runnable.is_empty() {
                break;
            }
            let i = rng.gen_range(0..runnable.len());
            sys = runnable.swap_remove(i).1;
        }
    }
    report
}

/// Deliberately broken variants of Algorithm 1 used as negative controls.
pub mod mutants {
    use super::*;
    use crate::engine::{Memory, OpFailure, Var};

    /// Erosion whose `Erode` body starts by moving.
    #[derive(Debug, Clone, Copy, Default)]
    pub struct MovingErode;

    impl Algorithm for MovingErode {
        fn name(&self) -> &'static str {
            "erosion-with-move"
        }

        fn guard(&self, mem: &mut dyn Memory) -> Option<Enabled> {
            Erosion.guard(mem)
        }

        fn step(&self, mem: &mut dyn Memory, action: Enabled, cursor: &mut Cursor) -> Result<StepStatus, OpFailure> {
            if action.kind == ActionKind::Erode && cursor.0 == 0 {
                mem.move_along(Port(0))?;
            }
            Erosion.step(mem, action, cursor)
        }

        fn is_stationary(&self) -> bool {
            false
        }
    }

    /// Erosion whose guard writes its own `leader` flag.
    #[derive(Debug, Clone, Copy, Default)]
    pub struct WritingGuard;

    impl Algorithm for WritingGuard {
        fn name(&self) -> &'static str {
            "erosion-with-writing-guard"
        }

        fn guard(&self, mem: &mut dyn Memory) -> Option<Enabled> {
            let _ = mem.write(None, Var::Leader, Some(false));
            Erosion.guard(mem)
        }

        fn step(&self, mem: &mut dyn Memory, action: Enabled, cursor: &mut Cursor) -> Result<StepStatus, OpFailure> {
            Erosion.step(mem, action, cursor)
        }

        fn is_stationary(&self) -> bool {
            true
        }
    }
}
