//! Face-centred cubic lattice geometry.
//!
//! Nodes are integer triples `(x, y, z)` with `x + y + z` even. The twelve
//! neighbour offsets are the signed permutations of `(1, 1, 0)`. The 2D
//! triangular lattice is the home plane `x + y + z = 0` of the same system.
//!
//! Every amoebot labels its ports through an [`Orientation`], one of the 24
//! proper rotations of the cubic axes. Port `k` of an amoebot points along
//! `orientation.apply(OFFSETS[k])`, so the label of a global offset `d` is the
//! reference index of `orientation⁻¹ · d`.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Neg, Sub};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("node {0} violates the FCC parity constraint (x + y + z must be even)")]
    Parity(NodePos),
    #[error("node {0} is outside the 2D home plane x + y + z = 0")]
    OutOfPlane(NodePos),
    #[error("offset {0:?} is not a lattice neighbour offset")]
    NotAnOffset([i32; 3]),
    #[error("orientation index {0} out of range")]
    OrientationIndex(usize),
    #[error("port label {0} out of range")]
    PortLabel(u8),
}

/// Which lattice the system lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum Dim {
    #[serde(rename = "2d")]
    Two,
    #[serde(rename = "3d")]
    Three,
}

impl Dim {
    /// Number of ports of a contracted amoebot.
    pub fn port_count(self) -> u8 {
        match self {
            Dim::Two => 6,
            Dim::Three => 12,
        }
    }

    pub fn ports(self) -> impl Iterator<Item = Port> {
        (0..self.port_count()).map(Port)
    }

    /// Orientations an amoebot may hold. In 2D all amoebots share the home
    /// lattice, so only the six rotations preserving the plane are allowed.
    pub fn orientations(self) -> impl Iterator<Item = Orientation> {
        let count = match self {
            Dim::Two => 6,
            Dim::Three => 24,
        };
        (0..count).map(|i| Orientation::ALL[i])
    }

    pub fn orientation_count(self) -> usize {
        match self {
            Dim::Two => 6,
            Dim::Three => 24,
        }
    }

    pub fn validate(self, p: NodePos) -> Result<(), GeometryError> {
        p.validate()?;
        if self == Dim::Two && p.x + p.y + p.z != 0 {
            return Err(GeometryError::OutOfPlane(p));
        }
        Ok(())
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dim::Two => "2d",
            Dim::Three => "3d",
        })
    }
}

/// A lattice node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i32; 3]", into = "[i32; 3]")]
pub struct NodePos {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl NodePos {
    pub const ORIGIN: NodePos = NodePos { x: 0, y: 0, z: 0 };

    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        Self { x, y, z }
    }

    pub fn validate(self) -> Result<(), GeometryError> {
        if (self.x + self.y + self.z).rem_euclid(2) != 0 {
            return Err(GeometryError::Parity(self));
        }
        Ok(())
    }

    pub fn to_array(self) -> [i32; 3] {
        [self.x, self.y, self.z]
    }

    pub fn offset(self, d: NeighborOffset) -> NodePos {
        self + d.delta()
    }

    pub fn dot(self, o: NodePos) -> i32 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn scale(self, k: i32) -> NodePos {
        NodePos::new(self.x * k, self.y * k, self.z * k)
    }

    /// The offset from `self` to `other`, if they are lattice neighbours.
    pub fn offset_to(self, other: NodePos) -> Option<NeighborOffset> {
        NeighborOffset::from_delta(other - self)
    }

    pub fn is_adjacent(self, other: NodePos) -> bool {
        self.offset_to(other).is_some()
    }
}

impl From<[i32; 3]> for NodePos {
    fn from(a: [i32; 3]) -> Self {
        NodePos::new(a[0], a[1], a[2])
    }
}

impl From<NodePos> for [i32; 3] {
    fn from(p: NodePos) -> Self {
        p.to_array()
    }
}

impl Add for NodePos {
    type Output = NodePos;
    fn add(self, o: NodePos) -> NodePos {
        NodePos::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for NodePos {
    type Output = NodePos;
    fn sub(self, o: NodePos) -> NodePos {
        NodePos::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for NodePos {
    type Output = NodePos;
    fn neg(self) -> NodePos {
        NodePos::new(-self.x, -self.y, -self.z)
    }
}

impl fmt::Display for NodePos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

const fn p(x: i32, y: i32, z: i32) -> NodePos {
    NodePos::new(x, y, z)
}

/// Reference ordering of the twelve offsets: the six home-plane offsets of
/// the `(1,1,1)` view clockwise as seen from `+(1,1,1)`, then the three top
/// offsets, then the three bottom offsets, each clockwise.
pub const OFFSETS: [NodePos; 12] = [
    p(1, -1, 0),
    p(0, -1, 1),
    p(-1, 0, 1),
    p(-1, 1, 0),
    p(0, 1, -1),
    p(1, 0, -1),
    p(1, 1, 0),
    p(1, 0, 1),
    p(0, 1, 1),
    p(-1, -1, 0),
    p(-1, 0, -1),
    p(0, -1, -1),
];

/// One of the twelve neighbour directions, by reference index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NeighborOffset(u8);

impl NeighborOffset {
    pub fn all() -> impl Iterator<Item = NeighborOffset> {
        (0..12).map(NeighborOffset)
    }

    /// The six offsets in the home plane `x + y + z = 0`.
    pub fn planar() -> impl Iterator<Item = NeighborOffset> {
        (0..6).map(NeighborOffset)
    }

    pub fn new(index: u8) -> Option<Self> {
        (index < 12).then_some(NeighborOffset(index))
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn delta(self) -> NodePos {
        OFFSETS[self.0 as usize]
    }

    pub fn from_delta(d: NodePos) -> Option<Self> {
        // Cheap rejection before the table scan.
        if d.x.abs() + d.y.abs() + d.z.abs() != 2 || d.x.abs().max(d.y.abs()).max(d.z.abs()) != 1 {
            return None;
        }
        OFFSETS.iter().position(|&o| o == d).map(|i| NeighborOffset(i as u8))
    }

    pub fn opposite(self) -> NeighborOffset {
        NeighborOffset::from_delta(-self.delta()).expect("offsets are closed under negation")
    }

    /// Two offsets are adjacent when their difference is itself an offset;
    /// equivalently their dot product is 1. This is the cuboctahedron graph.
    pub fn is_adjacent(self, other: NeighborOffset) -> bool {
        self.delta().dot(other.delta()) == 1
    }

    /// Perpendicular offsets span a chordless square through the origin.
    pub fn is_square_pair(self, other: NeighborOffset) -> bool {
        self.delta().dot(other.delta()) == 0
    }

    pub fn mask(self) -> u16 {
        1 << self.0
    }
}

/// All 12 neighbours of `p`.
pub fn neighbors(p: NodePos) -> Result<[NodePos; 12], GeometryError> {
    p.validate()?;
    Ok(OFFSETS.map(|d| p + d))
}

/// Neighbours of `p` that exist in the given lattice (6 in the home plane).
pub fn neighbors_in(dim: Dim, p: NodePos) -> Result<Vec<NodePos>, GeometryError> {
    dim.validate(p)?;
    let offsets = match dim {
        Dim::Two => &OFFSETS[..6],
        Dim::Three => &OFFSETS[..],
    };
    Ok(offsets.iter().map(|&d| p + d).collect())
}

/// A chordless square through a node: `p`, `p + a`, `catty`, `p + b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Square {
    pub a: NeighborOffset,
    pub b: NeighborOffset,
    pub catty: NodePos,
}

/// Number of chordless squares through any node of the FCC lattice.
pub const SQUARES_PER_NODE: usize = 12;

/// All chordless squares having `p` as a corner, as unordered offset pairs
/// `{a, b}` with `a · b = 0` (reported with `a < b`).
pub fn squares_through(p: NodePos) -> Vec<Square> {
    let mut out = Vec::with_capacity(SQUARES_PER_NODE);
    for a in NeighborOffset::all() {
        for b in NeighborOffset::all().filter(|b| *b > a) {
            if a.is_square_pair(b) {
                let sum = a.delta() + b.delta();
                debug_assert!(NeighborOffset::from_delta(sum).is_none());
                out.push(Square { a, b, catty: p + sum });
            }
        }
    }
    out
}

/// A port label local to one amoebot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Port(pub u8);

impl Port {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A proper rotation of the cubic axes: `(R v)[i] = sign[i] * v[axis[i]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Orientation {
    axis: [u8; 3],
    sign: [i8; 3],
}

/// The view/spin/rotation decomposition of an orientation.
///
/// `view` selects one of the four `{1,1,1}` plane families, `spin` which of
/// the two normals of that family points to the amoebot's top side, and
/// `rotation` which of the three top-side offsets the amoebot's reference
/// top offset `(1,1,0)` is mapped to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ViewSpinRotation {
    pub view: u8,
    pub spin: u8,
    pub rotation: u8,
}

const VIEW_NORMALS: [NodePos; 4] = [p(1, 1, 1), p(-1, 1, 1), p(1, -1, 1), p(1, 1, -1)];

fn top_offsets(s: NodePos) -> [NodePos; 3] {
    [p(s.x, s.y, 0), p(s.x, 0, s.z), p(0, s.y, s.z)]
}

impl Orientation {
    pub const IDENTITY: Orientation = Orientation { axis: [0, 1, 2], sign: [1, 1, 1] };

    /// All 24 orientations, indexed by `view * 6 + spin * 3 + rotation`.
    pub const ALL: [Orientation; 24] = build_all();

    pub fn from_index(i: usize) -> Result<Self, GeometryError> {
        Self::ALL.get(i).copied().ok_or(GeometryError::OrientationIndex(i))
    }

    pub fn index(self) -> usize {
        let v = self.to_view_spin_rotation();
        v.view as usize * 6 + v.spin as usize * 3 + v.rotation as usize
    }

    pub fn apply(self, v: NodePos) -> NodePos {
        let a = v.to_array();
        let c = |i: usize| self.sign[i] as i32 * a[self.axis[i] as usize];
        p(c(0), c(1), c(2))
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(self, other: Orientation) -> Orientation {
        let mut axis = [0u8; 3];
        let mut sign = [0i8; 3];
        for i in 0..3 {
            let j = self.axis[i] as usize;
            axis[i] = other.axis[j];
            sign[i] = self.sign[i] * other.sign[j];
        }
        Orientation { axis, sign }
    }

    pub fn inverse(self) -> Orientation {
        let mut axis = [0u8; 3];
        let mut sign = [0i8; 3];
        for i in 0..3 {
            let j = self.axis[i] as usize;
            axis[j] = i as u8;
            sign[j] = self.sign[i];
        }
        Orientation { axis, sign }
    }

    pub fn determinant(self) -> i32 {
        let parity = match self.axis {
            [0, 1, 2] | [1, 2, 0] | [2, 0, 1] => 1,
            _ => -1,
        };
        parity * self.sign.iter().map(|&s| s as i32).product::<i32>()
    }

    pub fn to_view_spin_rotation(self) -> ViewSpinRotation {
        let s = self.apply(p(1, 1, 1));
        let (view, spin) = VIEW_NORMALS
            .iter()
            .enumerate()
            .find_map(|(i, &n)| {
                if n == s {
                    Some((i as u8, 0))
                } else if -n == s {
                    Some((i as u8, 1))
                } else {
                    None
                }
            })
            .expect("rotations map (1,1,1) to a cube diagonal");
        let t = self.apply(p(1, 1, 0));
        let rotation = top_offsets(s)
            .iter()
            .position(|&o| o == t)
            .expect("rotations preserve the top side") as u8;
        ViewSpinRotation { view, spin, rotation }
    }

    pub fn from_view_spin_rotation(v: ViewSpinRotation) -> Result<Self, GeometryError> {
        if v.view >= 4 || v.spin >= 2 || v.rotation >= 3 {
            return Err(GeometryError::OrientationIndex(
                v.view as usize * 6 + v.spin as usize * 3 + v.rotation as usize,
            ));
        }
        Ok(Self::ALL[v.view as usize * 6 + v.spin as usize * 3 + v.rotation as usize])
    }

    /// The label this orientation gives to global offset `d`.
    pub fn port_of(self, d: NeighborOffset) -> Port {
        let local = NeighborOffset::from_delta(self.inverse().apply(d.delta()))
            .expect("rotations permute the offsets");
        Port(local.0)
    }

    /// The global offset behind local port `port`.
    pub fn offset_of(self, port: Port) -> NeighborOffset {
        let d = self.apply(OFFSETS[port.index()]);
        NeighborOffset::from_delta(d).expect("rotations permute the offsets")
    }
}

const fn signed_perm(axis: [u8; 3], sign: [i8; 3]) -> Orientation {
    Orientation { axis, sign }
}

const fn apply_const(o: Orientation, v: [i32; 3]) -> [i32; 3] {
    [
        o.sign[0] as i32 * v[o.axis[0] as usize],
        o.sign[1] as i32 * v[o.axis[1] as usize],
        o.sign[2] as i32 * v[o.axis[2] as usize],
    ]
}

const fn eq3(a: [i32; 3], b: [i32; 3]) -> bool {
    a[0] == b[0] && a[1] == b[1] && a[2] == b[2]
}

// Lookup of the unique proper rotation taking (1,1,1) to `s` and (1,1,0) to `t`.
const fn build_all() -> [Orientation; 24] {
    const PERMS: [[u8; 3]; 6] = [[0, 1, 2], [1, 2, 0], [2, 0, 1], [0, 2, 1], [2, 1, 0], [1, 0, 2]];
    const NORMALS: [[i32; 3]; 4] = [[1, 1, 1], [-1, 1, 1], [1, -1, 1], [1, 1, -1]];
    let mut out = [Orientation::IDENTITY; 24];
    let mut view = 0;
    while view < 4 {
        let mut spin = 0;
        while spin < 2 {
            let n = NORMALS[view];
            let k = if spin == 0 { 1 } else { -1 };
            let s = [n[0] * k, n[1] * k, n[2] * k];
            let tops = [[s[0], s[1], 0], [s[0], 0, s[2]], [0, s[1], s[2]]];
            let mut rot = 0;
            while rot < 3 {
                let t = tops[rot];
                let mut found = false;
                let mut pi = 0;
                while pi < 6 && !found {
                    let mut bits = 0;
                    while bits < 8 && !found {
                        let sign = [
                            if bits & 1 == 0 { 1 } else { -1 },
                            if bits & 2 == 0 { 1 } else { -1 },
                            if bits & 4 == 0 { 1 } else { -1 },
                        ];
                        let o = signed_perm(PERMS[pi], sign);
                        let parity = if pi < 3 { 1 } else { -1 };
                        let det = parity * sign[0] as i32 * sign[1] as i32 * sign[2] as i32;
                        if det == 1
                            && eq3(apply_const(o, [1, 1, 1]), s)
                            && eq3(apply_const(o, [1, 1, 0]), t)
                        {
                            out[view * 6 + spin * 3 + rot] = o;
                            found = true;
                        }
                        bits += 1;
                    }
                    pi += 1;
                }
                assert!(found);
                rot += 1;
            }
            spin += 1;
        }
        view += 1;
    }
    out
}

/// Port on the `neighbor` side naming the same global direction that `port`
/// names on `mine`.
pub fn translate_port(mine: Orientation, neighbor: Orientation, port: Port) -> Port {
    neighbor.port_of(mine.offset_of(port))
}

/// The port on which a neighbour reached through `port` sees us.
pub fn reverse_port(mine: Orientation, neighbor: Orientation, port: Port) -> Port {
    neighbor.port_of(mine.offset_of(port).opposite())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn cross(a: NodePos, b: NodePos) -> NodePos {
        p(a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x)
    }

    #[test]
    fn offsets_are_distinct_and_closed_under_negation() {
        let set: HashSet<_> = OFFSETS.iter().copied().collect();
        assert_eq!(set.len(), 12);
        for d in OFFSETS {
            assert!(set.contains(&-d));
            assert_eq!(d.dot(d), 2);
        }
    }

    #[test]
    fn reference_order_is_clockwise_about_the_111_normal() {
        let n = p(1, 1, 1);
        for ring in [&OFFSETS[0..6], &OFFSETS[6..9], &OFFSETS[9..12]] {
            for i in 0..ring.len() {
                let (a, b) = (ring[i], ring[(i + 1) % ring.len()]);
                assert!(cross(a, b).dot(n) < 0, "{a} -> {b}");
            }
        }
        assert!(OFFSETS[..6].iter().all(|d| d.x + d.y + d.z == 0));
        assert!(OFFSETS[6..9].iter().all(|d| d.x + d.y + d.z == 2));
        assert!(OFFSETS[9..].iter().all(|d| d.x + d.y + d.z == -2));
    }

    #[test]
    fn neighbors_of_origin() {
        let ns = neighbors(NodePos::ORIGIN).unwrap();
        for q in [p(1, 1, 0), p(1, -1, 0), p(0, 1, 1)] {
            assert!(ns.contains(&q));
        }
        let planar = neighbors_in(Dim::Two, NodePos::ORIGIN).unwrap();
        assert_eq!(planar.len(), 6);
        assert!(planar.contains(&p(1, -1, 0)) && planar.contains(&p(0, 1, -1)));
        assert!(planar.iter().all(|q| q.x + q.y + q.z == 0));
        assert!(matches!(neighbors(p(1, 0, 0)), Err(GeometryError::Parity(_))));
        assert!(matches!(
            neighbors_in(Dim::Two, p(1, 1, 0)),
            Err(GeometryError::OutOfPlane(_))
        ));
    }

    #[test]
    fn offset_graph_is_the_cuboctahedron() {
        // Brute force over all pairs: an edge iff the difference is an offset.
        let mut edges = 0;
        let mut degree = [0; 12];
        for i in 0..12 {
            for j in (i + 1)..12 {
                if NeighborOffset::from_delta(OFFSETS[i] - OFFSETS[j]).is_some() {
                    edges += 1;
                    degree[i] += 1;
                    degree[j] += 1;
                    assert!(NeighborOffset(i as u8).is_adjacent(NeighborOffset(j as u8)));
                }
            }
        }
        assert_eq!(edges, 24);
        assert!(degree.iter().all(|&d| d == 4));
    }

    #[test]
    fn planar_offsets_of_each_view_form_a_hexagon() {
        for n in VIEW_NORMALS {
            let ring: Vec<_> = NeighborOffset::all().filter(|d| d.delta().dot(n) == 0).collect();
            assert_eq!(ring.len(), 6);
            for a in &ring {
                let deg = ring.iter().filter(|b| a.is_adjacent(**b)).count();
                assert_eq!(deg, 2);
            }
            // 6 vertices of degree 2 and connected: a single 6-cycle.
            let mut seen = vec![ring[0]];
            let mut frontier = vec![ring[0]];
            while let Some(a) = frontier.pop() {
                for b in &ring {
                    if a.is_adjacent(*b) && !seen.contains(b) {
                        seen.push(*b);
                        frontier.push(*b);
                    }
                }
            }
            assert_eq!(seen.len(), 6);
        }
    }

    #[test]
    fn squares_enumerated_by_brute_force() {
        // Independent enumeration: every pair of distinct offsets whose
        // endpoints are non-adjacent, whose sum is not an offset and which is
        // not antipodal closes a chordless 4-cycle.
        let mut brute = 0;
        for i in 0..12 {
            for j in (i + 1)..12 {
                let (a, b) = (OFFSETS[i], OFFSETS[j]);
                let sum = a + b;
                let chord_ab = NeighborOffset::from_delta(a - b).is_some();
                let chord_diag = sum == NodePos::ORIGIN || NeighborOffset::from_delta(sum).is_some();
                if !chord_ab && !chord_diag {
                    brute += 1;
                }
            }
        }
        assert_eq!(brute, 12);
        let sq = squares_through(p(2, 0, 0));
        assert_eq!(sq.len(), SQUARES_PER_NODE);
        let example = squares_through(NodePos::ORIGIN)
            .into_iter()
            .find(|s| {
                let pair = (s.a.delta(), s.b.delta());
                pair == (p(1, -1, 0), p(1, 1, 0)) || pair == (p(1, 1, 0), p(1, -1, 0))
            })
            .unwrap();
        assert_eq!(example.catty, p(2, 0, 0));
        let a = NeighborOffset::from_delta(p(1, 1, 0)).unwrap();
        let b = NeighborOffset::from_delta(p(0, 1, 1)).unwrap();
        assert!(!a.is_square_pair(b));
    }

    #[test]
    fn squares_are_chordless_four_cycles() {
        let origin = p(0, 2, 0);
        for s in squares_through(origin) {
            let (pa, pb) = (origin.offset(s.a), origin.offset(s.b));
            assert!(origin.is_adjacent(pa) && pa.is_adjacent(s.catty));
            assert!(s.catty.is_adjacent(pb) && pb.is_adjacent(origin));
            assert!(!origin.is_adjacent(s.catty));
            assert!(!pa.is_adjacent(pb));
        }
    }

    #[test]
    fn exactly_24_proper_rotations() {
        let set: HashSet<_> = Orientation::ALL.iter().copied().collect();
        assert_eq!(set.len(), 24);
        assert!(Orientation::ALL.iter().all(|o| o.determinant() == 1));
        assert_eq!(Orientation::ALL[0], Orientation::IDENTITY);
        for (i, o) in Orientation::ALL.iter().enumerate() {
            assert_eq!(o.index(), i);
        }
    }

    #[test]
    fn orientation_group_is_closed() {
        let set: HashSet<_> = Orientation::ALL.iter().copied().collect();
        for a in Orientation::ALL {
            assert_eq!(a.compose(a.inverse()), Orientation::IDENTITY);
            for b in Orientation::ALL {
                assert!(set.contains(&a.compose(b)));
                let v = p(3, -5, 7);
                assert_eq!(a.compose(b).apply(v), a.apply(b.apply(v)));
            }
        }
    }

    #[test]
    fn view_spin_rotation_round_trips() {
        let mut seen = HashSet::new();
        for o in Orientation::ALL {
            let vsr = o.to_view_spin_rotation();
            assert!(vsr.view < 4 && vsr.spin < 2 && vsr.rotation < 3);
            assert!(seen.insert((vsr.view, vsr.spin, vsr.rotation)));
            assert_eq!(Orientation::from_view_spin_rotation(vsr).unwrap(), o);
        }
        assert_eq!(seen.len(), 24);
    }

    #[test]
    fn planar_orientations_preserve_the_home_plane() {
        for o in Dim::Two.orientations() {
            for d in NeighborOffset::planar() {
                assert!(o.port_of(d).0 < 6);
                let g = o.apply(d.delta());
                assert_eq!(g.x + g.y + g.z, 0);
            }
        }
    }

    #[test]
    fn port_labels_are_bijective_and_identify_the_orientation() {
        assert!(NeighborOffset::all().all(|d| Orientation::IDENTITY.port_of(d).0 == d.index()));
        let mut labelings = HashSet::new();
        for o in Orientation::ALL {
            let labels: Vec<u8> = NeighborOffset::all().map(|d| o.port_of(d).0).collect();
            let distinct: HashSet<_> = labels.iter().copied().collect();
            assert_eq!(distinct.len(), 12);
            for d in NeighborOffset::all() {
                assert_eq!(o.offset_of(o.port_of(d)), d);
            }
            labelings.insert(labels);
        }
        // 24 x 24 pairs: distinct orientations never share a labeling.
        assert_eq!(labelings.len(), 24);
    }

    #[test]
    fn translate_port_exhaustive() {
        for mine in Orientation::ALL {
            for nbr in Orientation::ALL {
                for k in 0..12 {
                    let port = Port(k);
                    let d = mine.offset_of(port);
                    let theirs = translate_port(mine, nbr, port);
                    assert_eq!(theirs, nbr.port_of(d));
                    assert_eq!(translate_port(nbr, mine, theirs), port);
                    assert_eq!(nbr.offset_of(reverse_port(mine, nbr, port)), d.opposite());
                }
            }
        }
        let same = translate_port(Orientation::IDENTITY, Orientation::IDENTITY, Port(7));
        assert_eq!(same, Port(7));
    }
}
