//! Amoebot state and the erosion leader-election algorithm.
//!
//! Every amoebot exposes a public memory (`candidate`, `leader`, and one
//! `nbrcand` flag per port). Algorithms reach that memory only through the
//! [`Memory`] operations `Connected`, `Read` and `Write`, each of which is
//! recorded in an operation log. Actions are executed one operation at a
//! time through [`Algorithm::step`], so the same code serves the sequential
//! scheduler (steps run back to back) and the asynchronous interleaver.

use crate::geometry::{reverse_port, translate_port, Dim, NodePos, Orientation, Port, OFFSETS};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

/// Simulator-side label of an amoebot. Never visible to the algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AmoebotId(pub u32);

impl AmoebotId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for AmoebotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Tri-state candidacy; `None` is the initial null state.
pub type Candidacy = Option<bool>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmoebotState {
    pub pos: NodePos,
    pub orientation: Orientation,
    pub candidate: Candidacy,
    pub leader: bool,
    pub nbrcand: [bool; 12],
}

impl AmoebotState {
    pub fn new(pos: NodePos, orientation: Orientation) -> Self {
        Self { pos, orientation, candidate: None, leader: false, nbrcand: [false; 12] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Setup,
    Erode,
    DeclareLeader,
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ActionKind::Setup => "setup",
            ActionKind::Erode => "erode",
            ActionKind::DeclareLeader => "declare_leader",
        })
    }
}

/// Which erosion rule justified an `Erode`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    One,
    Two,
    Three,
}

impl Rule {
    pub fn number(self) -> u8 {
        match self {
            Rule::One => 1,
            Rule::Two => 2,
            Rule::Three => 3,
        }
    }

    pub fn from_number(n: u8) -> Option<Rule> {
        match n {
            1 => Some(Rule::One),
            2 => Some(Rule::Two),
            3 => Some(Rule::Three),
            _ => None,
        }
    }
}

impl Serialize for Rule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.number())
    }
}

impl<'de> Deserialize<'de> for Rule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let n = u8::deserialize(d)?;
        Rule::from_number(n).ok_or_else(|| serde::de::Error::custom(format!("no erosion rule {n}")))
    }
}

/// An enabled action together with the rule that enabled it (for `Erode`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Enabled {
    pub kind: ActionKind,
    pub rule: Option<Rule>,
}

impl Enabled {
    pub fn new(kind: ActionKind) -> Self {
        Self { kind, rule: None }
    }
}

/// A public-memory variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Var {
    Candidate,
    Leader,
    Nbrcand(Port),
}

/// One entry of an operation log. `port: None` addresses the caller's own
/// memory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Op {
    Connected { port: Port, result: bool },
    Read { port: Option<Port>, var: Var, value: Option<bool>, ok: bool },
    Write { port: Option<Port>, var: Var, value: Option<bool>, ok: bool },
    Move { port: Port, ok: bool },
}

impl Op {
    pub fn failed(&self) -> bool {
        match self {
            Op::Connected { .. } => false,
            Op::Read { ok, .. } | Op::Write { ok, .. } | Op::Move { ok, .. } => !ok,
        }
    }

    pub fn is_write(&self) -> bool {
        matches!(self, Op::Write { .. })
    }

    pub fn is_move(&self) -> bool {
        matches!(self, Op::Move { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum OpFailure {
    #[error("no neighbour on port {0}")]
    NoNeighbor(Port),
    #[error("port {0} does not exist")]
    BadPort(Port),
    #[error("writes are not permitted in this context")]
    ReadOnly,
    #[error("movement is not supported: the system is stationary")]
    Stationary,
    #[error("variable does not accept this value")]
    BadValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("duplicate node {0}")]
    DuplicateNode(NodePos),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
    #[error("orientation {index} is not available in {dim}")]
    OrientationNotInDim { index: usize, dim: Dim },
    #[error("amoebot {0} does not exist")]
    UnknownAmoebot(AmoebotId),
    #[error("{action} is not enabled for amoebot {id}")]
    NotEnabled { id: AmoebotId, action: ActionKind },
    #[error("operation failed during {action} of {id}: {failure}")]
    OperationFailed { id: AmoebotId, action: ActionKind, failure: OpFailure },
}

/// The communication interface an algorithm sees for one amoebot.
pub trait Memory {
    fn dim(&self) -> Dim;
    fn orientation(&self) -> Orientation;
    /// Orientation of the neighbour on `port`; neighbours know one another's
    /// orientations.
    fn neighbor_orientation(&self, port: Port) -> Option<Orientation>;
    fn connected(&mut self, port: Port) -> bool;
    fn read(&mut self, port: Option<Port>, var: Var) -> Result<Option<bool>, OpFailure>;
    fn write(&mut self, port: Option<Port>, var: Var, value: Option<bool>) -> Result<(), OpFailure>;
    fn move_along(&mut self, port: Port) -> Result<(), OpFailure>;
}

/// Cursor into an in-progress action body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Cursor(pub u16);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepStatus {
    Continue,
    Done,
}

/// An amoebot algorithm: guarded actions whose bodies execute one
/// operation per call to [`Algorithm::step`].
pub trait Algorithm {
    fn name(&self) -> &'static str;
    /// Evaluate the guards; at most one action may be enabled.
    fn guard(&self, mem: &mut dyn Memory) -> Option<Enabled>;
    /// Perform the next operation of `action`.
    fn step(&self, mem: &mut dyn Memory, action: Enabled, cursor: &mut Cursor) -> Result<StepStatus, OpFailure>;
    /// True when no action body ever moves.
    fn is_stationary(&self) -> bool;
}

/// Runtime state of a whole amoebot system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct System {
    dim: Dim,
    amoebots: Vec<AmoebotState>,
    /// `links[id][port]`: neighbour reached through the amoebot's own port.
    links: Vec<[Option<AmoebotId>; 12]>,
}

impl System {
    pub fn new(dim: Dim, nodes: &[(NodePos, Orientation)]) -> Result<Self, EngineError> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, &(pos, o)) in nodes.iter().enumerate() {
            dim.validate(pos)?;
            if o.index() >= dim.orientation_count() {
                return Err(EngineError::OrientationNotInDim { index: o.index(), dim });
            }
            if index.insert(pos, AmoebotId(i as u32)).is_some() {
                return Err(EngineError::DuplicateNode(pos));
            }
        }
        let links = nodes
            .iter()
            .map(|&(pos, o)| {
                let mut l = [None; 12];
                for port in dim.ports() {
                    let target = pos + o.apply(OFFSETS[port.index()]);
                    l[port.index()] = index.get(&target).copied();
                }
                l
            })
            .collect();
        let amoebots = nodes.iter().map(|&(pos, o)| AmoebotState::new(pos, o)).collect();
        Ok(Self { dim, amoebots, links })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.amoebots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amoebots.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = AmoebotId> {
        (0..self.amoebots.len() as u32).map(AmoebotId)
    }

    pub fn state(&self, id: AmoebotId) -> &AmoebotState {
        &self.amoebots[id.index()]
    }

    pub fn states(&self) -> &[AmoebotState] {
        &self.amoebots
    }

    pub fn positions(&self) -> Vec<NodePos> {
        self.amoebots.iter().map(|a| a.pos).collect()
    }

    pub fn neighbor(&self, id: AmoebotId, port: Port) -> Option<AmoebotId> {
        self.links[id.index()].get(port.index()).copied().flatten()
    }

    /// Occupied neighbours with the connecting local port.
    pub fn neighbors(&self, id: AmoebotId) -> impl Iterator<Item = (Port, AmoebotId)> + '_ {
        self.dim.ports().filter_map(move |p| self.neighbor(id, p).map(|n| (p, n)))
    }

    /// `Connected(port)` for amoebot `id`.
    pub fn connected(&self, id: AmoebotId, port: Port) -> bool {
        self.neighbor(id, port).is_some()
    }

    pub fn leaders(&self) -> Vec<AmoebotId> {
        self.ids().filter(|&i| self.state(i).leader).collect()
    }

    pub fn candidates(&self) -> Vec<AmoebotId> {
        self.ids().filter(|&i| self.state(i).candidate == Some(true)).collect()
    }

    /// Positions of amoebots whose candidacy is null or true.
    pub fn candidate_structure(&self) -> Vec<NodePos> {
        self.amoebots.iter().filter(|a| a.candidate != Some(false)).map(|a| a.pos).collect()
    }

    /// Place every amoebot in the state reached after all `Setup` actions:
    /// all candidates, every `nbrcand` flag set for occupied ports.
    pub fn set_all_candidates(&mut self) {
        for i in 0..self.amoebots.len() {
            self.amoebots[i].candidate = Some(true);
            for p in 0..12 {
                self.amoebots[i].nbrcand[p] = self.links[i][p].is_some();
            }
        }
    }

    /// Overwrite the public memory of one amoebot (test and oracle setup).
    pub fn set_candidate(&mut self, id: AmoebotId, value: Candidacy) {
        self.amoebots[id.index()].candidate = value;
    }

    /// Recompute every `nbrcand` flag from the neighbours' candidacy.
    pub fn sync_nbrcand(&mut self) {
        for i in 0..self.amoebots.len() {
            for p in 0..12 {
                self.amoebots[i].nbrcand[p] =
                    self.links[i][p].is_some_and(|n| self.amoebots[n.index()].candidate == Some(true));
            }
        }
    }

    /// Quiescent consistency: `nbrcand[p]` mirrors the candidacy of the
    /// neighbour on `p`. Returns the first mismatch.
    pub fn nbrcand_mismatch(&self) -> Option<(AmoebotId, Port)> {
        for id in self.ids() {
            for port in self.dim.ports() {
                let want = self.neighbor(id, port).is_some_and(|n| self.state(n).candidate == Some(true));
                if self.state(id).nbrcand[port.index()] != want {
                    return Some((id, port));
                }
            }
        }
        None
    }

    /// Amoebots within two hops of `id`, including `id`: everything whose
    /// guard can change when `id` runs an action.
    pub fn ball2(&self, id: AmoebotId) -> Vec<AmoebotId> {
        let mut out = vec![id];
        for (_, n) in self.neighbors(id) {
            out.push(n);
            out.extend(self.neighbors(n).map(|(_, m)| m));
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    pub(crate) fn save(&self, ids: &[AmoebotId]) -> Vec<AmoebotState> {
        ids.iter().map(|&i| self.amoebots[i.index()].clone()).collect()
    }

    pub(crate) fn restore(&mut self, ids: &[AmoebotId], saved: Vec<AmoebotState>) {
        for (&i, s) in ids.iter().zip(saved) {
            self.amoebots[i.index()] = s;
        }
    }

    fn check_id(&self, id: AmoebotId) -> Result<(), EngineError> {
        if id.index() < self.amoebots.len() {
            Ok(())
        } else {
            Err(EngineError::UnknownAmoebot(id))
        }
    }

    /// Evaluate `alg`'s guards for `id` without logging.
    pub fn guard<A: Algorithm + ?Sized>(&self, alg: &A, id: AmoebotId) -> Option<Enabled> {
        alg.guard(&mut ReadOnly::new(self, id, None))
    }

    /// Evaluate guards, recording every operation issued into `log`.
    pub fn guard_logged<A: Algorithm + ?Sized>(&self, alg: &A, id: AmoebotId, log: &mut Vec<Op>) -> Option<Enabled> {
        alg.guard(&mut ReadOnly::new(self, id, Some(log)))
    }

    /// Run one operation of an action body on behalf of `id`.
    pub fn step<A: Algorithm + ?Sized>(
        &mut self,
        alg: &A,
        id: AmoebotId,
        action: Enabled,
        cursor: &mut Cursor,
        log: &mut Vec<Op>,
    ) -> Result<StepStatus, OpFailure> {
        let mut ctx = Ctx { sys: self, me: id, log };
        alg.step(&mut ctx, action, cursor)
    }

    /// Run an action body to completion in isolation.
    pub fn execute<A: Algorithm + ?Sized>(&mut self, alg: &A, id: AmoebotId, action: Enabled) -> Result<Vec<Op>, EngineError> {
        self.check_id(id)?;
        let mut log = Vec::new();
        let mut cursor = Cursor::default();
        loop {
            match self.step(alg, id, action, &mut cursor, &mut log) {
                Ok(StepStatus::Continue) => {}
                Ok(StepStatus::Done) => return Ok(log),
                Err(failure) => return Err(EngineError::OperationFailed { id, action: action.kind, failure }),
            }
        }
    }

    /// Execute `kind` for `id` after checking that its guard holds.
    pub fn exec(&mut self, id: AmoebotId, kind: ActionKind) -> Result<(Enabled, Vec<Op>), EngineError> {
        self.check_id(id)?;
        match self.guard(&Erosion, id) {
            Some(e) if e.kind == kind => Ok((e, self.execute(&Erosion, id, e)?)),
            _ => Err(EngineError::NotEnabled { id, action: kind }),
        }
    }

    pub fn exec_setup(&mut self, id: AmoebotId) -> Result<Vec<Op>, EngineError> {
        self.exec(id, ActionKind::Setup).map(|(_, ops)| ops)
    }

    pub fn exec_erode(&mut self, id: AmoebotId) -> Result<(Rule, Vec<Op>), EngineError> {
        self.exec(id, ActionKind::Erode).map(|(e, ops)| (e.rule.expect("erode carries a rule"), ops))
    }

    pub fn exec_declare(&mut self, id: AmoebotId) -> Result<Vec<Op>, EngineError> {
        self.exec(id, ActionKind::DeclareLeader).map(|(_, ops)| ops)
    }

    pub fn guard_setup(&self, id: AmoebotId) -> bool {
        self.state(id).candidate.is_none()
    }

    pub fn guard_declare(&self, id: AmoebotId) -> bool {
        self.guard(&Erosion, id).is_some_and(|e| e.kind == ActionKind::DeclareLeader)
    }

    /// The erosion rule `id` satisfies, judged on its candidate neighbours.
    /// Only meaningful once `id` is a candidate.
    pub fn can_erode(&self, id: AmoebotId) -> Option<Rule> {
        let mut mem = ReadOnly::new(self, id, None);
        let ports = candidate_ports(&mut mem).ports;
        erosion_rule(&mut mem, &ports)
    }

    /// Enabled actions of `id` under Algorithm 1 (at most one).
    pub fn enabled_actions(&self, id: AmoebotId) -> Vec<ActionKind> {
        self.guard(&Erosion, id).map(|e| e.kind).into_iter().collect()
    }
}

/// Mutable access for action bodies.
struct Ctx<'a> {
    sys: &'a mut System,
    me: AmoebotId,
    log: &'a mut Vec<Op>,
}

/// Guard-time access: reads go straight to memory, writes and moves are
/// refused but still logged.
pub struct ReadOnly<'a> {
    sys: &'a System,
    me: AmoebotId,
    log: Option<&'a mut Vec<Op>>,
}

impl<'a> ReadOnly<'a> {
    pub fn new(sys: &'a System, me: AmoebotId, log: Option<&'a mut Vec<Op>>) -> Self {
        Self { sys, me, log }
    }

    fn record(&mut self, op: Op) {
        if let Some(log) = self.log.as_mut() {
            log.push(op);
        }
    }
}

fn resolve(sys: &System, me: AmoebotId, port: Option<Port>) -> Result<AmoebotId, OpFailure> {
    match port {
        None => Ok(me),
        Some(p) if p.0 >= sys.dim.port_count() => Err(OpFailure::BadPort(p)),
        Some(p) => sys.neighbor(me, p).ok_or(OpFailure::NoNeighbor(p)),
    }
}

fn load(sys: &System, target: AmoebotId, var: Var) -> Result<Option<bool>, OpFailure> {
    let s = sys.state(target);
    Ok(match var {
        Var::Candidate => s.candidate,
        Var::Leader => Some(s.leader),
        Var::Nbrcand(p) => Some(*s.nbrcand.get(p.index()).ok_or(OpFailure::BadPort(p))?),
    })
}

macro_rules! memory_common {
    () => {
        fn dim(&self) -> Dim {
            self.sys.dim
        }

        fn orientation(&self) -> Orientation {
            self.sys.state(self.me).orientation
        }

        fn neighbor_orientation(&self, port: Port) -> Option<Orientation> {
            self.sys.neighbor(self.me, port).map(|n| self.sys.state(n).orientation)
        }

        fn connected(&mut self, port: Port) -> bool {
            let result = self.sys.connected(self.me, port);
            self.record(Op::Connected { port, result });
            result
        }

        fn read(&mut self, port: Option<Port>, var: Var) -> Result<Option<bool>, OpFailure> {
            let got = resolve(self.sys, self.me, port).and_then(|t| load(self.sys, t, var));
            let (value, ok) = match got {
                Ok(v) => (v, true),
                Err(_) => (None, false),
            };
            self.record(Op::Read { port, var, value, ok });
            got
        }
    };
}

impl Memory for ReadOnly<'_> {
    memory_common!();

    fn write(&mut self, port: Option<Port>, var: Var, value: Option<bool>) -> Result<(), OpFailure> {
        self.record(Op::Write { port, var, value, ok: false });
        Err(OpFailure::ReadOnly)
    }

    fn move_along(&mut self, port: Port) -> Result<(), OpFailure> {
        self.record(Op::Move { port, ok: false });
        Err(OpFailure::ReadOnly)
    }
}

impl Ctx<'_> {
    fn record(&mut self, op: Op) {
        self.log.push(op);
    }
}

impl Memory for Ctx<'_> {
    memory_common!();

    fn write(&mut self, port: Option<Port>, var: Var, value: Option<bool>) -> Result<(), OpFailure> {
        let res = resolve(self.sys, self.me, port).and_then(|t| {
            let s = &mut self.sys.amoebots[t.index()];
            match (var, value) {
                (Var::Candidate, v) => s.candidate = v,
                (Var::Leader, Some(v)) => s.leader = v,
                (Var::Nbrcand(p), Some(v)) if p.index() < 12 => s.nbrcand[p.index()] = v,
                _ => return Err(OpFailure::BadValue),
            }
            Ok(())
        });
        self.record(Op::Write { port, var, value, ok: res.is_ok() });
        res
    }

    fn move_along(&mut self, port: Port) -> Result<(), OpFailure> {
        self.record(Op::Move { port, ok: false });
        Err(OpFailure::Stationary)
    }
}

/// Candidate neighbours as seen through `Read(p, candidate)`.
struct NeighborScan {
    ports: Vec<Port>,
    any_null: bool,
}

fn candidate_ports(mem: &mut dyn Memory) -> NeighborScan {
    let mut scan = NeighborScan { ports: Vec::with_capacity(12), any_null: false };
    for port in mem.dim().ports() {
        if !mem.connected(port) {
            continue;
        }
        match mem.read(Some(port), Var::Candidate) {
            Ok(Some(true)) => scan.ports.push(port),
            Ok(None) => scan.any_null = true,
            _ => {}
        }
    }
    scan
}

/// Rules 1–3 evaluated in precedence order on local port labels.
fn erosion_rule(mem: &mut dyn Memory, ports: &[Port]) -> Option<Rule> {
    // Port k of any amoebot points along its own copy of OFFSETS[k], and a
    // rotation preserves dot products, so offset adjacency is label-local.
    let local = |p: Port| OFFSETS[p.index()];
    match ports.len() {
        1 => return Some(Rule::One),
        2..=5 => {
            let mut reached = 1u16;
            let mut frontier = vec![0usize];
            while let Some(i) = frontier.pop() {
                for j in 0..ports.len() {
                    if reached & (1 << j) == 0 && local(ports[i]).dot(local(ports[j])) == 1 {
                        reached |= 1 << j;
                        frontier.push(j);
                    }
                }
            }
            if reached.count_ones() as usize == ports.len() {
                return Some(Rule::Two);
            }
        }
        _ => return None,
    }
    if ports.len() != 2 || local(ports[0]).dot(local(ports[1])) != 0 {
        return None;
    }
    // Square pair B (lower port), D: the catty-corner node is B + d(D) and
    // D + d(B). Ask B, then D, whether it has a candidate there.
    let mine = mem.orientation();
    for (via, toward) in [(ports[0], ports[1]), (ports[1], ports[0])] {
        let Some(theirs) = mem.neighbor_orientation(via) else { continue };
        let slot = translate_port(mine, theirs, toward);
        if let Ok(Some(true)) = mem.read(Some(via), Var::Nbrcand(slot)) {
            return Some(Rule::Three);
        }
    }
    None
}

/// Leader election by erosion.
#[derive(Debug, Clone, Copy, Default)]
pub struct Erosion;

impl Erosion {
    fn announce(mem: &mut dyn Memory, value: bool, cursor: &mut Cursor) -> Result<StepStatus, OpFailure> {
        let ports = mem.dim().port_count() as u16;
        if cursor.0 == 0 {
            mem.write(None, Var::Candidate, Some(value))?;
            cursor.0 = 1;
            return Ok(if ports == 0 { StepStatus::Done } else { StepStatus::Continue });
        }
        let port = Port(((cursor.0 - 1) / 2) as u8);
        if (cursor.0 - 1) % 2 == 0 {
            cursor.0 += if mem.connected(port) { 1 } else { 2 };
        } else {
            let theirs = mem.neighbor_orientation(port).ok_or(OpFailure::NoNeighbor(port))?;
            let back = reverse_port(mem.orientation(), theirs, port);
            mem.write(Some(port), Var::Nbrcand(back), Some(value))?;
            cursor.0 += 1;
        }
        Ok(if cursor.0 > 2 * ports { StepStatus::Done } else { StepStatus::Continue })
    }
}

impl Algorithm for Erosion {
    fn name(&self) -> &'static str {
        "erosion"
    }

    fn guard(&self, mem: &mut dyn Memory) -> Option<Enabled> {
        match mem.read(None, Var::Candidate).ok()? {
            None => Some(Enabled::new(ActionKind::Setup)),
            Some(false) => None,
            Some(true) => {
                let scan = candidate_ports(mem);
                if scan.any_null {
                    return None;
                }
                if scan.ports.is_empty() {
                    return Some(Enabled::new(ActionKind::DeclareLeader));
                }
                erosion_rule(mem, &scan.ports).map(|r| Enabled { kind: ActionKind::Erode, rule: Some(r) })
            }
        }
    }

    fn step(&self, mem: &mut dyn Memory, action: Enabled, cursor: &mut Cursor) -> Result<StepStatus, OpFailure> {
        match action.kind {
            ActionKind::Setup => Self::announce(mem, true, cursor),
            ActionKind::Erode => Self::announce(mem, false, cursor),
            ActionKind::DeclareLeader => {
                mem.write(None, Var::Leader, Some(true))?;
                Ok(StepStatus::Done)
            }
        }
    }

    fn is_stationary(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::NeighborOffset;

    fn p(x: i32, y: i32, z: i32) -> NodePos {
        NodePos::new(x, y, z)
    }

    fn sys(dim: Dim, nodes: &[NodePos]) -> System {
        let v: Vec<_> = nodes.iter().map(|&n| (n, Orientation::IDENTITY)).collect();
        System::new(dim, &v).unwrap()
    }

    fn id(i: u32) -> AmoebotId {
        AmoebotId(i)
    }

    fn port_toward(s: &System, from: AmoebotId, to: AmoebotId) -> Port {
        s.neighbors(from).find(|&(_, n)| n == to).unwrap().0
    }

    #[test]
    fn connected_examples() {
        let single = sys(Dim::Three, &[NodePos::ORIGIN]);
        assert!(Dim::Three.ports().all(|q| !single.connected(id(0), q)));
        let pair = sys(Dim::Three, &[NodePos::ORIGIN, p(1, 1, 0)]);
        let on: Vec<_> = Dim::Three.ports().filter(|&q| pair.connected(id(0), q)).collect();
        assert_eq!(on.len(), 1);
        assert_eq!(Orientation::IDENTITY.offset_of(on[0]).delta(), p(1, 1, 0));
        let mut full = vec![NodePos::ORIGIN];
        full.extend(NeighborOffset::all().map(|d| d.delta()));
        let full = sys(Dim::Three, &full);
        assert!(Dim::Three.ports().all(|q| full.connected(id(0), q)));
    }

    #[test]
    fn setup_informs_neighbors() {
        let mut s = sys(Dim::Three, &[NodePos::ORIGIN, p(1, 1, 0)]);
        assert!(s.guard_setup(id(0)));
        let ops = s.exec_setup(id(0)).unwrap();
        assert_eq!(s.state(id(0)).candidate, Some(true));
        assert_eq!(s.state(id(1)).candidate, None);
        let back = port_toward(&s, id(1), id(0));
        assert!(s.state(id(1)).nbrcand[back.index()]);
        assert_eq!(s.state(id(1)).nbrcand.iter().filter(|&&b| b).count(), 1);
        assert!(!s.guard_setup(id(0)));
        assert_eq!(ops.iter().filter(|o| o.is_write()).count(), 2);

        let mut single = sys(Dim::Three, &[NodePos::ORIGIN]);
        let ops = single.exec_setup(id(0)).unwrap();
        assert_eq!(ops.iter().filter(|o| o.is_write()).count(), 1);
    }

    #[test]
    fn setup_with_full_neighborhood_issues_twelve_remote_writes() {
        let mut nodes = vec![NodePos::ORIGIN];
        nodes.extend(NeighborOffset::all().map(|d| d.delta()));
        let mut s = sys(Dim::Three, &nodes);
        let ops = s.exec_setup(id(0)).unwrap();
        let remote = ops.iter().filter(|o| matches!(o, Op::Write { port: Some(_), .. })).count();
        assert_eq!(remote, 12);
        assert_eq!(ops.iter().filter(|o| matches!(o, Op::Connected { .. })).count(), 12);
    }

    #[test]
    fn rules_one_two_and_bounds() {
        // Rule 1.
        let mut s = sys(Dim::Three, &[NodePos::ORIGIN, p(1, 1, 0)]);
        s.set_all_candidates();
        assert_eq!(s.can_erode(id(0)), Some(Rule::One));
        // Rule 2: adjacent offsets (1,1,0) and (0,1,1).
        let mut s = sys(Dim::Three, &[NodePos::ORIGIN, p(1, 1, 0), p(0, 1, 1)]);
        s.set_all_candidates();
        assert_eq!(s.can_erode(id(0)), Some(Rule::Two));
        // Six connected candidates: the in-plane ring plus nothing else.
        let mut nodes = vec![NodePos::ORIGIN];
        nodes.extend(OFFSETS[6..9].iter().copied());
        nodes.extend(OFFSETS[0..3].iter().copied());
        let mut s = sys(Dim::Three, &nodes);
        s.set_all_candidates();
        assert_eq!(s.can_erode(id(0)), None);
        // Opposite neighbours: disconnected, no rule.
        let mut s = sys(Dim::Three, &[NodePos::ORIGIN, p(1, 1, 0), p(-1, -1, 0)]);
        s.set_all_candidates();
        assert_eq!(s.can_erode(id(0)), None);
    }

    #[test]
    fn rule_three_requires_the_catty_corner_candidate() {
        let square = [NodePos::ORIGIN, p(1, 1, 0), p(1, -1, 0), p(2, 0, 0)];
        let mut s = sys(Dim::Three, &square);
        s.set_all_candidates();
        assert_eq!(s.can_erode(id(0)), Some(Rule::Three));
        for i in 0..4 {
            assert_eq!(s.can_erode(id(i)), Some(Rule::Three));
        }
        s.set_candidate(id(3), Some(false));
        s.sync_nbrcand();
        assert_eq!(s.can_erode(id(0)), None);
        let mut open = sys(Dim::Three, &square[..3]);
        open.set_all_candidates();
        assert_eq!(open.can_erode(id(0)), None);
    }

    #[test]
    fn rule_three_holds_under_every_orientation_pair() {
        let square = [NodePos::ORIGIN, p(1, 1, 0), p(1, -1, 0), p(2, 0, 0)];
        for ob in Orientation::ALL {
            for oa in [Orientation::ALL[0], Orientation::ALL[7], Orientation::ALL[23]] {
                let nodes = [(square[0], oa), (square[1], ob), (square[2], ob.inverse()), (square[3], oa)];
                let mut s = System::new(Dim::Three, &nodes).unwrap();
                s.set_all_candidates();
                assert_eq!(s.can_erode(id(0)), Some(Rule::Three));
            }
        }
    }

    #[test]
    fn two_amoebot_run() {
        let mut s = sys(Dim::Three, &[NodePos::ORIGIN, p(1, 1, 0)]);
        assert_eq!(s.enabled_actions(id(0)), vec![ActionKind::Setup]);
        s.exec_setup(id(0)).unwrap();
        // Erosion waits while a neighbour is still null.
        assert!(s.enabled_actions(id(0)).is_empty());
        assert!(s.exec_erode(id(0)).is_err());
        s.exec_setup(id(1)).unwrap();
        assert_eq!(s.nbrcand_mismatch(), None);
        let (rule, _) = s.exec_erode(id(0)).unwrap();
        assert_eq!(rule, Rule::One);
        assert_eq!(s.state(id(0)).candidate, Some(false));
        assert!(s.state(id(1)).nbrcand.iter().all(|&b| !b));
        assert!(s.enabled_actions(id(0)).is_empty());
        assert_eq!(s.enabled_actions(id(1)), vec![ActionKind::DeclareLeader]);
        assert!(s.guard_declare(id(1)));
        s.exec_declare(id(1)).unwrap();
        assert_eq!(s.leaders(), vec![id(1)]);
        // The declare guard does not look at `leader`; re-running it is idempotent.
        s.exec_declare(id(1)).unwrap();
        assert_eq!(s.leaders(), vec![id(1)]);
        assert!(s.enabled_actions(id(0)).is_empty());
    }

    #[test]
    fn singleton_declares() {
        let mut s = sys(Dim::Two, &[NodePos::ORIGIN]);
        s.exec_setup(id(0)).unwrap();
        assert!(s.guard_declare(id(0)));
        s.exec_declare(id(0)).unwrap();
        assert!(s.state(id(0)).leader);
    }

    #[test]
    fn candidate_with_candidate_neighbor_cannot_declare() {
        let mut s = sys(Dim::Three, &[NodePos::ORIGIN, p(1, 1, 0)]);
        s.set_all_candidates();
        assert!(!s.guard_declare(id(0)));
    }

    #[test]
    fn guards_issue_no_writes() {
        let square = [NodePos::ORIGIN, p(1, 1, 0), p(1, -1, 0), p(2, 0, 0)];
        let mut s = sys(Dim::Three, &square);
        s.set_all_candidates();
        let mut log = Vec::new();
        assert!(s.guard_logged(&Erosion, id(0), &mut log).is_some());
        assert!(!log.is_empty());
        assert!(log.iter().all(|o| !o.is_write() && !o.is_move()));
        assert!(log.iter().any(|o| matches!(o, Op::Read { var: Var::Nbrcand(_), .. })));
    }

    #[test]
    fn system_rejects_bad_input() {
        let dup = [(NodePos::ORIGIN, Orientation::IDENTITY); 2];
        assert!(matches!(System::new(Dim::Three, &dup), Err(EngineError::DuplicateNode(_))));
        let off_plane = [(p(1, 1, 0), Orientation::IDENTITY)];
        assert!(System::new(Dim::Two, &off_plane).is_err());
        let bad_o = [(NodePos::ORIGIN, Orientation::ALL[12])];
        assert!(matches!(
            System::new(Dim::Two, &bad_o),
            Err(EngineError::OrientationNotInDim { .. })
        ));
    }

    #[test]
    fn op_log_serializes() {
        let op = Op::Write { port: Some(Port(3)), var: Var::Nbrcand(Port(5)), value: Some(true), ok: true };
        let s = serde_json::to_string(&op).unwrap();
        assert_eq!(s, r#"{"op":"write","port":3,"var":{"nbrcand":5},"value":true,"ok":true}"#);
        assert_eq!(serde_json::from_str::<Op>(&s).unwrap(), op);
    }
}
