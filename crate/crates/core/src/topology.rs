//! Connectivity and contractibility of amoebot configurations.
//!
//! A configuration is represented by its lattice dual: the union of the
//! rhombic dodecahedra (3D) or hexagons (2D) of the occupied nodes. Cells are
//! glued along shared faces. Two 3D cells that meet only in a single
//! octahedral vertex (a catty-corner pair with none of the four nodes between
//! them occupied) keep separate copies of that vertex; whenever a face chain
//! joins them around the vertex, as in a full square, the copies coincide.
//!
//! All dual coordinates are doubled (3D) or tripled (2D hexagon corners) so
//! every key is an integer triple.

use crate::geometry::{Dim, GeometryError, NeighborOffset, NodePos, OFFSETS};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("configuration is empty")]
    Empty,
    #[error("configuration is not connected; connectivity must be checked first")]
    Disconnected,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("boundary surface is not a closed 2-manifold at edge {0}")]
    NonManifold(usize),
    #[error("boundary genus is only defined for 3D complexes")]
    Planar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BettiNumbers {
    pub b0: usize,
    pub b1: usize,
    pub b2: usize,
}

impl BettiNumbers {
    pub fn is_contractible(&self) -> bool {
        *self == BettiNumbers { b0: 1, b1: 0, b2: 0 }
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.b0 as i64 - self.b1 as i64 + self.b2 as i64
    }
}

/// Key of a dual vertex: scaled coordinates plus a copy tag, nonzero only
/// for a split catty-corner vertex.
type VertexKey = ([i32; 3], u8);

/// Cell complex of the dual union.
///
/// `boundary[k][i]` lists the indices of the `(k-1)`-cells on the boundary
/// of the `i`-th `k`-cell. Level 0 holds no boundary lists.
#[derive(Debug, Clone)]
pub struct DualComplex {
    dim: Dim,
    cells: Vec<NodePos>,
    counts: Vec<usize>,
    boundary: Vec<Vec<Vec<u32>>>,
    /// For each codimension-1 cell, how many occupied top cells contain it.
    incidence: Vec<u8>,
}

impl DualComplex {
    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn cells(&self) -> &[NodePos] {
        &self.cells
    }

    /// Number of `k`-cells.
    pub fn count(&self, k: usize) -> usize {
        self.counts[k]
    }

    pub fn top_dimension(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn boundary_of(&self, k: usize, i: usize) -> &[u32] {
        &self.boundary[k][i]
    }

    /// `Σ (-1)^k · #k-cells`.
    pub fn euler_characteristic(&self) -> i64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(k, &c)| if k % 2 == 0 { c as i64 } else { -(c as i64) })
            .sum()
    }

    /// Codimension-1 cells lying on exactly one occupied cell.
    pub fn boundary_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.incidence.iter().enumerate().filter(|(_, &n)| n == 1).map(|(i, _)| i)
    }
}

struct Interner<K> {
    map: HashMap<K, u32>,
}

impl<K: std::hash::Hash + Eq> Interner<K> {
    fn new() -> Self {
        Self { map: HashMap::new() }
    }

    fn get(&mut self, k: K) -> (u32, bool) {
        let next = self.map.len() as u32;
        match self.map.entry(k) {
            std::collections::hash_map::Entry::Occupied(e) => (*e.get(), false),
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(next);
                (next, true)
            }
        }
    }

    fn len(&self) -> usize {
        self.map.len()
    }
}

fn normalize(dim: Dim, occupied: &[NodePos]) -> Result<Vec<NodePos>, TopologyError> {
    let mut cells = occupied.to_vec();
    cells.sort_unstable();
    cells.dedup();
    for &c in &cells {
        dim.validate(c)?;
    }
    Ok(cells)
}

fn lattice_offsets(dim: Dim) -> &'static [NodePos] {
    match dim {
        Dim::Two => &OFFSETS[..6],
        Dim::Three => &OFFSETS[..],
    }
}

/// Number of connected components of the induced lattice subgraph.
pub fn component_count(dim: Dim, occupied: &[NodePos]) -> usize {
    let set: HashSet<NodePos> = occupied.iter().copied().collect();
    let mut seen: HashSet<NodePos> = HashSet::with_capacity(set.len());
    let mut comps = 0;
    let mut queue = VecDeque::new();
    let mut starts: Vec<NodePos> = set.iter().copied().collect();
    starts.sort_unstable();
    for s in starts {
        if !seen.insert(s) {
            continue;
        }
        comps += 1;
        queue.push_back(s);
        while let Some(q) = queue.pop_front() {
            for &d in lattice_offsets(dim) {
                let r = q + d;
                if set.contains(&r) && seen.insert(r) {
                    queue.push_back(r);
                }
            }
        }
    }
    comps
}

/// True iff the occupied nodes induce exactly one connected component.
pub fn is_connected(dim: Dim, occupied: &[NodePos]) -> bool {
    component_count(dim, occupied) == 1
}

/// Builds the face-glued dual complex of the occupied nodes.
pub fn build_dual_complex(dim: Dim, occupied: &[NodePos]) -> Result<DualComplex, TopologyError> {
    let cells = normalize(dim, occupied)?;
    if cells.is_empty() {
        return Err(TopologyError::Empty);
    }
    Ok(match dim {
        Dim::Three => build_3d(cells),
        Dim::Two => build_2d(cells),
    })
}

fn axis_unit(i: usize, s: i32) -> NodePos {
    let mut a = [0; 3];
    a[i] = s;
    NodePos::from(a)
}

fn build_3d(cells: Vec<NodePos>) -> DualComplex {
    let set: HashSet<NodePos> = cells.iter().copied().collect();
    let mut verts: Interner<VertexKey> = Interner::new();
    let mut edges: Interner<(u32, u32)> = Interner::new();
    let mut faces: Interner<[i32; 3]> = Interner::new();
    let mut edge_bd: Vec<Vec<u32>> = Vec::new();
    let mut face_bd: Vec<Vec<u32>> = Vec::new();
    let mut face_inc: Vec<u8> = Vec::new();
    let mut cell_bd: Vec<Vec<u32>> = Vec::with_capacity(cells.len());

    for &c in &cells {
        // Octahedral vertex c + s·e_i. Its copy is split only when the
        // catty-corner cell across it is the sole other occupied cell there.
        let octa = |i: usize, s: i32| -> VertexKey {
            let u = c + axis_unit(i, s);
            let key = u.scale(2).to_array();
            let catty = c + axis_unit(i, 2 * s);
            if !set.contains(&catty) {
                return (key, 0);
            }
            let middle = (0..3)
                .filter(|&j| j != i)
                .flat_map(|j| [u + axis_unit(j, 1), u + axis_unit(j, -1)])
                .any(|m| set.contains(&m));
            if middle {
                (key, 0)
            } else {
                (key, if s < 0 { 1 } else { 2 })
            }
        };
        let mut my_faces = Vec::with_capacity(12);
        for d in OFFSETS {
            let key = (c.scale(2) + d).to_array();
            let (fi, fresh) = faces.get(key);
            my_faces.push(fi);
            if !fresh {
                face_inc[fi as usize] += 1;
                continue;
            }
            face_inc.push(1);
            let a = d.to_array();
            let nz: Vec<usize> = (0..3).filter(|&k| a[k] != 0).collect();
            let k = (0..3).find(|&k| a[k] == 0).unwrap();
            let (i, j) = (nz[0], nz[1]);
            let o1 = verts.get(octa(i, a[i])).0;
            let o2 = verts.get(octa(j, a[j])).0;
            let tetra = |t: i32| {
                let mut w = c.scale(2).to_array();
                w[i] += a[i];
                w[j] += a[j];
                w[k] += t;
                (w, 0u8)
            };
            let tp = verts.get(tetra(1)).0;
            let tm = verts.get(tetra(-1)).0;
            let mut fb = Vec::with_capacity(4);
            for (x, y) in [(o1, tp), (o1, tm), (o2, tp), (o2, tm)] {
                let (ei, efresh) = edges.get((x.min(y), x.max(y)));
                if efresh {
                    edge_bd.push(vec![x.min(y), x.max(y)]);
                }
                fb.push(ei);
            }
            fb.sort_unstable();
            face_bd.push(fb);
        }
        my_faces.sort_unstable();
        cell_bd.push(my_faces);
    }
    DualComplex {
        dim: Dim::Three,
        counts: vec![verts.len(), edges.len(), faces.len(), cells.len()],
        boundary: vec![Vec::new(), edge_bd, face_bd, cell_bd],
        incidence: face_inc,
        cells,
    }
}

fn build_2d(cells: Vec<NodePos>) -> DualComplex {
    let mut verts: Interner<[i32; 3]> = Interner::new();
    let mut edges: Interner<[i32; 3]> = Interner::new();
    let mut edge_bd: Vec<Vec<u32>> = Vec::new();
    let mut edge_inc: Vec<u8> = Vec::new();
    let mut cell_bd = Vec::with_capacity(cells.len());
    let ring = &OFFSETS[..6];
    for &c in &cells {
        // Corner between ring[k] and ring[k+1]: tripled triangle centroid.
        let corner = |k: usize| (c.scale(3) + ring[k % 6] + ring[(k + 1) % 6]).to_array();
        let mut mine = Vec::with_capacity(6);
        for k in 0..6 {
            let (ei, fresh) = edges.get((c.scale(2) + ring[k]).to_array());
            mine.push(ei);
            if !fresh {
                edge_inc[ei as usize] += 1;
                continue;
            }
            edge_inc.push(1);
            let a = verts.get(corner(k + 5)).0;
            let b = verts.get(corner(k)).0;
            edge_bd.push(vec![a.min(b), a.max(b)]);
        }
        mine.sort_unstable();
        cell_bd.push(mine);
    }
    DualComplex {
        dim: Dim::Two,
        counts: vec![verts.len(), edges.len(), cells.len()],
        boundary: vec![Vec::new(), edge_bd, cell_bd],
        incidence: edge_inc,
        cells,
    }
}

/// Rank over the two-element field of a matrix given as sparse columns
/// (each a sorted list of row indices), by standard column reduction.
pub fn rank_gf2(columns: &[Vec<u32>]) -> usize {
    let mut pivots: HashMap<u32, Vec<u32>> = HashMap::with_capacity(columns.len());
    let mut scratch = Vec::new();
    for col in columns {
        let mut cur = col.clone();
        while let Some(&low) = cur.last() {
            match pivots.get(&low) {
                Some(p) => {
                    symmetric_difference(&cur, p, &mut scratch);
                    std::mem::swap(&mut cur, &mut scratch);
                }
                None => break,
            }
        }
        if let Some(&low) = cur.last() {
            pivots.insert(low, cur);
        }
    }
    pivots.len()
}

fn symmetric_difference(a: &[u32], b: &[u32], out: &mut Vec<u32>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

/// Betti numbers from boundary-map ranks over the two-element field.
pub fn betti(complex: &DualComplex) -> BettiNumbers {
    let top = complex.top_dimension();
    let ranks: Vec<usize> = (0..=top)
        .map(|k| if k == 0 { 0 } else { rank_gf2(&complex.boundary[k]) })
        .collect();
    let b = |k: usize| -> usize {
        if k > top {
            return 0;
        }
        let next = if k < top { ranks[k + 1] } else { 0 };
        complex.counts[k] - ranks[k] - next
    };
    BettiNumbers { b0: b(0), b1: b(1), b2: b(2) }
}

/// Betti numbers by a second route: `b0` from lattice components, the top
/// reduced Betti number from bounded complement components (duality in the
/// ambient space), and the remaining one from the Euler characteristic.
pub fn euler_betti(dim: Dim, occupied: &[NodePos]) -> Result<BettiNumbers, TopologyError> {
    let complex = build_dual_complex(dim, occupied)?;
    let cells = complex.cells();
    let b0 = component_count(dim, cells);
    let voids = complement_components(dim, cells) - 1;
    let chi = complex.euler_characteristic();
    Ok(match dim {
        Dim::Three => {
            let b1 = b0 as i64 + voids as i64 - chi;
            BettiNumbers { b0, b1: b1 as usize, b2: voids }
        }
        Dim::Two => BettiNumbers { b0, b1: voids, b2: 0 },
    })
}

/// Components of the unoccupied lattice nodes inside a padded bounding box;
/// the padding shell is always part of a single outer component.
fn complement_components(dim: Dim, cells: &[NodePos]) -> usize {
    let set: HashSet<NodePos> = cells.iter().copied().collect();
    let mut lo = cells[0].to_array();
    let mut hi = lo;
    for c in cells {
        let a = c.to_array();
        for k in 0..3 {
            lo[k] = lo[k].min(a[k] - 2);
            hi[k] = hi[k].max(a[k] + 2);
        }
    }
    let inside = |q: NodePos| {
        let a = q.to_array();
        (0..3).all(|k| a[k] >= lo[k] && a[k] <= hi[k])
    };
    let mut seen: HashSet<NodePos> = HashSet::new();
    let mut comps = 0;
    let mut queue = VecDeque::new();
    // Seed from every empty neighbour of an occupied cell; anything else in
    // the box is reachable from the outer shell through those.
    let mut seeds: Vec<NodePos> = cells
        .iter()
        .flat_map(|&c| lattice_offsets(dim).iter().map(move |&d| c + d))
        .filter(|q| !set.contains(q))
        .collect();
    seeds.sort_unstable();
    seeds.dedup();
    let mut outer_found = false;
    for s in seeds {
        if seen.contains(&s) {
            continue;
        }
        seen.insert(s);
        queue.push_back(s);
        let mut touches_box = false;
        while let Some(q) = queue.pop_front() {
            for &d in lattice_offsets(dim) {
                let r = q + d;
                if set.contains(&r) || seen.contains(&r) {
                    continue;
                }
                if !inside(r) {
                    touches_box = true;
                    continue;
                }
                seen.insert(r);
                queue.push_back(r);
            }
        }
        if touches_box {
            if !outer_found {
                outer_found = true;
                comps += 1;
            }
        } else {
            comps += 1;
        }
    }
    comps.max(1)
}

/// Contractible means trivial reduced homology: `(b0, b1, b2) = (1, 0, 0)`.
/// The caller must supply a connected, nonempty configuration.
pub fn is_contractible(dim: Dim, occupied: &[NodePos]) -> Result<bool, TopologyError> {
    if occupied.is_empty() {
        return Err(TopologyError::Empty);
    }
    if !is_connected(dim, occupied) {
        return Err(TopologyError::Disconnected);
    }
    let complex = build_dual_complex(dim, occupied)?;
    Ok(betti(&complex).is_contractible())
}

/// Genus of every connected component of the boundary surface of a 3D
/// complex. Surface vertices where several fans of boundary faces meet are
/// split, one copy per fan.
pub fn boundary_genus(complex: &DualComplex) -> Result<Vec<u32>, TopologyError> {
    if complex.dim != Dim::Three {
        return Err(TopologyError::Planar);
    }
    let faces: Vec<usize> = complex.boundary_cells().collect();
    if faces.is_empty() {
        return Ok(Vec::new());
    }
    // Boundary edges with their incident boundary faces.
    let mut edge_faces: HashMap<u32, Vec<usize>> = HashMap::new();
    for (slot, &f) in faces.iter().enumerate() {
        for &e in &complex.boundary[2][f] {
            edge_faces.entry(e).or_default().push(slot);
        }
    }
    // Corners (vertex, face slot) glued across each boundary edge.
    let mut corner_ids: HashMap<(u32, usize), usize> = HashMap::new();
    for (slot, &f) in faces.iter().enumerate() {
        for &e in &complex.boundary[2][f] {
            for &v in &complex.boundary[1][e as usize] {
                let next = corner_ids.len();
                corner_ids.entry((v, slot)).or_insert(next);
            }
        }
    }
    let mut corners = UnionFind::new(corner_ids.len());
    let mut surface = UnionFind::new(faces.len());
    let mut sorted_edges: Vec<_> = edge_faces.iter().collect();
    sorted_edges.sort_unstable_by_key(|(e, _)| **e);
    for (&e, fs) in &sorted_edges {
        if fs.len() != 2 {
            return Err(TopologyError::NonManifold(e as usize));
        }
        surface.union(fs[0], fs[1]);
        for &v in &complex.boundary[1][e as usize] {
            corners.union(corner_ids[&(v, fs[0])], corner_ids[&(v, fs[1])]);
        }
    }
    // χ per surface component, keyed by the component's smallest face slot.
    let mut chi: HashMap<usize, i64> = HashMap::new();
    let mut rep_min: HashMap<usize, usize> = HashMap::new();
    for slot in 0..faces.len() {
        let r = surface.find(slot);
        *chi.entry(r).or_default() += 1;
        let m = rep_min.entry(r).or_insert(slot);
        *m = (*m).min(slot);
    }
    for (_, fs) in &sorted_edges {
        *chi.entry(surface.find(fs[0])).or_default() -= 1;
    }
    let mut counted = HashSet::new();
    for (&(_, slot), &id) in &corner_ids {
        if counted.insert(corners.find(id)) {
            *chi.entry(surface.find(slot)).or_default() += 1;
        }
    }
    let mut comps: Vec<(usize, i64)> = chi.into_iter().map(|(r, x)| (rep_min[&r], x)).collect();
    comps.sort_unstable();
    comps
        .into_iter()
        .map(|(_, x)| {
            if x > 2 || (2 - x) % 2 != 0 {
                Err(TopologyError::NonManifold(0))
            } else {
                Ok(((2 - x) / 2) as u32)
            }
        })
        .collect()
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Positions of the neighbours selected by a 12-bit mask around `center`.
pub fn neighbor_cells(center: NodePos, mask: u16) -> Vec<NodePos> {
    NeighborOffset::all()
        .filter(|d| mask & d.mask() != 0)
        .map(|d| center.offset(d))
        .collect()
}
