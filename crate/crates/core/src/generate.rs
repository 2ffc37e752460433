//! Random connected, contractible starting configurations.

use crate::files::{Configuration, Orientations};
use crate::geometry::{Dim, NodePos, OFFSETS};
use crate::topology;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenerateError {
    #[error("size must be at least 1")]
    ZeroSize,
    #[error("{0} is only available in 3D")]
    NeedsThreeD(Shape),
    #[error("no valid {shape} of size {size} after {attempts} attempts")]
    Exhausted { shape: Shape, size: usize, attempts: u32 },
    #[error("unknown shape '{0}'")]
    UnknownShape(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    /// Grown by inverse erosion: each new node satisfies an erosion rule
    /// with respect to the nodes already placed.
    Blob,
    Line,
    PlaneDisk,
    SphereIsh,
    SquareGadget,
    /// Random growth accepting any node whose attachment keeps the union
    /// contractible, including nodes with six or more occupied neighbours.
    Accretion,
}

impl Shape {
    pub const ALL: [Shape; 6] =
        [Shape::Blob, Shape::Line, Shape::PlaneDisk, Shape::SphereIsh, Shape::SquareGadget, Shape::Accretion];

    pub fn name(self) -> &'static str {
        match self {
            Shape::Blob => "blob",
            Shape::Line => "line",
            Shape::PlaneDisk => "plane-disk",
            Shape::SphereIsh => "sphere-ish",
            Shape::SquareGadget => "square-gadget",
            Shape::Accretion => "accretion",
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Shape {
    type Err = GenerateError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Shape::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| GenerateError::UnknownShape(s.into()))
    }
}

const ATTEMPTS: u32 = 32;

/// Generate a connected, contractible configuration with `size` nodes.
/// Orientations are randomized from `seed`.
pub fn generate(shape: Shape, size: usize, seed: u64, dim: Dim) -> Result<Configuration, GenerateError> {
    if size == 0 {
        return Err(GenerateError::ZeroSize);
    }
    if shape == Shape::SquareGadget && dim == Dim::Two {
        return Err(GenerateError::NeedsThreeD(shape));
    }
    for attempt in 0..ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(u64::from(attempt).wrapping_mul(0x9e37_79b9)));
        let nodes = match shape {
            Shape::Blob => grow(dim, size, &mut rng, |set, q, dim| satisfies_rule(dim, set, q)),
            Shape::Accretion => grow(dim, size, &mut rng, attach_keeps_contractible),
            Shape::Line => (0..size as i32).map(|i| NodePos::new(i, -i, 0)).collect(),
            Shape::PlaneDisk => nearest(Dim::Two, size, &mut rng, |p| p.to_array().iter().map(|c| c.abs()).sum()),
            Shape::SphereIsh => nearest(dim, size, &mut rng, |p| p.dot(p)),
            Shape::SquareGadget => square_gadget(size),
        };
        if nodes.len() == size
            && topology::is_connected(dim, &nodes)
            && topology::is_contractible(dim, &nodes) == Ok(true)
        {
            return Ok(Configuration::new(dim, nodes, Orientations::Randomize { seed }));
        }
    }
    Err(GenerateError::Exhausted { shape, size, attempts: ATTEMPTS })
}

fn lattice_steps(dim: Dim) -> &'static [NodePos] {
    match dim {
        Dim::Two => &OFFSETS[..6],
        Dim::Three => &OFFSETS[..],
    }
}

/// Random growth from the origin; `accept` decides whether a frontier node
/// may join.
fn grow(
    dim: Dim,
    size: usize,
    rng: &mut ChaCha8Rng,
    accept: impl Fn(&HashSet<NodePos>, NodePos, Dim) -> bool,
) -> Vec<NodePos> {
    let mut order = vec![NodePos::ORIGIN];
    let mut set: HashSet<NodePos> = order.iter().copied().collect();
    let mut frontier: BTreeSet<NodePos> = lattice_steps(dim).iter().copied().collect();
    while order.len() < size {
        let mut pool: Vec<NodePos> = frontier.iter().copied().collect();
        pool.shuffle(rng);
        let Some(q) = pool.into_iter().find(|&q| accept(&set, q, dim)) else { break };
        set.insert(q);
        order.push(q);
        frontier.remove(&q);
        for &d in lattice_steps(dim) {
            if !set.contains(&(q + d)) {
                frontier.insert(q + d);
            }
        }
    }
    order
}

/// The first `size` nodes by `key`, ties broken at random.
fn nearest(dim: Dim, size: usize, rng: &mut ChaCha8Rng, key: impl Fn(NodePos) -> i32) -> Vec<NodePos> {
    let in_box = |r: i32| {
        let mut pts = Vec::new();
        for x in -r..=r {
            for y in -r..=r {
                for z in -r..=r {
                    let p = NodePos::new(x, y, z);
                    if dim.validate(p).is_ok() {
                        pts.push(p);
                    }
                }
            }
        }
        pts
    };
    let mut r = 1;
    loop {
        // Nodes keyed below everything outside the box are complete.
        let limit = in_box(r + 1)
            .into_iter()
            .filter(|p| p.to_array().iter().any(|c| c.abs() > r))
            .map(&key)
            .min()
            .expect("shell is nonempty");
        let mut pts: Vec<(i32, u32, NodePos)> = in_box(r).into_iter().map(|p| (key(p), rng.gen(), p)).collect();
        pts.sort_unstable();
        if pts.iter().filter(|t| t.0 < limit).count() >= size {
            return pts.into_iter().take(size).map(|t| t.2).collect();
        }
        r += 1;
    }
}

/// A chordless square with its four corners occupied, then a tail.
fn square_gadget(size: usize) -> Vec<NodePos> {
    let mut v = vec![NodePos::new(0, 0, 0), NodePos::new(1, 1, 0), NodePos::new(2, 0, 0), NodePos::new(1, -1, 0)];
    v.truncate(size);
    let c = NodePos::new(2, 0, 0);
    let mut k = 1;
    while v.len() < size {
        v.push(c + NodePos::new(k, 0, k));
        k += 1;
    }
    v
}

/// Whether `q` satisfies an erosion rule with respect to `set`.
pub fn satisfies_rule(dim: Dim, set: &HashSet<NodePos>, q: NodePos) -> bool {
    let nbrs: Vec<NodePos> = lattice_steps(dim).iter().copied().filter(|&d| set.contains(&(q + d))).collect();
    match nbrs.len() {
        1 => true,
        2..=5 => {
            let mut reached = vec![nbrs[0]];
            let mut i = 0;
            while i < reached.len() {
                let a = reached[i];
                for &b in &nbrs {
                    if !reached.contains(&b) && a.dot(b) == 1 {
                        reached.push(b);
                    }
                }
                i += 1;
            }
            reached.len() == nbrs.len()
                || (nbrs.len() == 2 && nbrs[0].dot(nbrs[1]) == 0 && set.contains(&(q + nbrs[0] + nbrs[1])))
        }
        _ => false,
    }
}

/// Whether joining `q` to a contractible `set` keeps it contractible: the
/// patch of `q`'s cell boundary shared with occupied neighbours must be
/// acyclic, and `q` must not merge a vertex currently split between two
/// catty-corner cells.
pub fn attach_keeps_contractible(set: &HashSet<NodePos>, q: NodePos, dim: Dim) -> bool {
    let shared: Vec<NodePos> = lattice_steps(dim).iter().copied().filter(|&d| set.contains(&(q + d))).collect();
    if shared.is_empty() || shared.len() == lattice_steps(dim).len() {
        return false;
    }
    match dim {
        Dim::Two => {
            // Shared edges of the hexagon must form one arc.
            let ring = &OFFSETS[..6];
            let on: Vec<bool> = ring.iter().map(|&d| set.contains(&(q + d))).collect();
            (0..6).filter(|&k| on[k] && !on[(k + 5) % 6]).count() == 1
        }
        Dim::Three => !merges_split_vertex(set, q) && face_patch_acyclic(&shared),
    }
}

fn merges_split_vertex(set: &HashSet<NodePos>, q: NodePos) -> bool {
    let unit = |i: usize, s: i32| {
        let mut a = [0; 3];
        a[i] = s;
        NodePos::from(a)
    };
    for j in 0..3 {
        for s in [-1, 1] {
            let u = q + unit(j, s);
            for i in (0..3).filter(|&i| i != j) {
                let (a, b) = (u + unit(i, -1), u + unit(i, 1));
                if !set.contains(&a) || !set.contains(&b) {
                    continue;
                }
                let k = 3 - i - j;
                let others = [u + unit(j, s), u + unit(k, 1), u + unit(k, -1)];
                if !others.iter().any(|m| set.contains(m)) {
                    return true;
                }
            }
        }
    }
    false
}

/// Reduced homology of a union of closed rhombic faces of one cell is zero.
fn face_patch_acyclic(offsets: &[NodePos]) -> bool {
    let mut verts: Vec<[i32; 3]> = Vec::new();
    let mut edges: BTreeSet<([i32; 3], [i32; 3])> = BTreeSet::new();
    let mut face_verts: Vec<Vec<usize>> = Vec::new();
    for &d in offsets {
        let a = d.to_array();
        let nz: Vec<usize> = (0..3).filter(|&k| a[k] != 0).collect();
        let k = (0..3).find(|&k| a[k] == 0).expect("offset has a zero coordinate");
        let mut o1 = [0; 3];
        o1[nz[0]] = 2 * a[nz[0]];
        let mut o2 = [0; 3];
        o2[nz[1]] = 2 * a[nz[1]];
        let mut tp = a;
        tp[k] = 1;
        let mut tm = a;
        tm[k] = -1;
        let mut mine = Vec::new();
        for v in [o1, o2, tp, tm] {
            let idx = verts.iter().position(|&w| w == v).unwrap_or_else(|| {
                verts.push(v);
                verts.len() - 1
            });
            mine.push(idx);
        }
        for (x, y) in [(o1, tp), (o1, tm), (o2, tp), (o2, tm)] {
            edges.insert((x.min(y), x.max(y)));
        }
        face_verts.push(mine);
    }
    let mut uf = topology::UnionFind::new(verts.len());
    for f in &face_verts {
        for &v in &f[1..] {
            uf.union(f[0], v);
        }
    }
    let b0 = (0..verts.len()).filter(|&v| uf.find(v) == v).count() as i64;
    let chi = verts.len() as i64 - edges.len() as i64 + offsets.len() as i64;
    // No closed surface: the patch is a proper subset of the sphere.
    b0 == 1 && chi == 1
}
