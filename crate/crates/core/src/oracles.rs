//! Exhaustive checks over neighbourhood subsets and a sampler for the
//! existence of an erodable amoebot.

use crate::engine::{Rule, System};
use crate::generate::{generate, Shape};
use crate::geometry::{Dim, NeighborOffset, NodePos};
use crate::topology::{betti, boundary_genus, build_dual_complex, neighbor_cells, BettiNumbers};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::ops::RangeInclusive;

/// A set of neighbour offsets of a fixed centre, as a 12-bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NeighborSubset(pub u16);

impl NeighborSubset {
    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn offsets(self) -> impl Iterator<Item = NeighborOffset> {
        NeighborOffset::all().filter(move |d| self.0 & d.mask() != 0)
    }

    /// Every subset of the given size, in increasing mask order.
    pub fn of_size(k: u32) -> impl Iterator<Item = NeighborSubset> {
        (0u16..1 << 12).filter(move |m| m.count_ones() == k).map(NeighborSubset)
    }

    /// Adjacent pairs inside the subset: triangles at the centre.
    pub fn adjacent_pairs(self) -> u32 {
        let v: Vec<NeighborOffset> = self.offsets().collect();
        let mut t = 0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                t += u32::from(v[i].is_adjacent(v[j]));
            }
        }
        t
    }

    fn degrees(self) -> Vec<u32> {
        let v: Vec<NeighborOffset> = self.offsets().collect();
        v.iter().map(|&a| v.iter().filter(|&&b| a.is_adjacent(b)).count() as u32).collect()
    }
}

/// Subsets enumerated and a checksum over their masks.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Enumeration {
    /// `(size, count)` pairs.
    pub counts: Vec<(u32, usize)>,
    /// Sum of all visited masks.
    pub mask_sum: u64,
    /// XOR of all visited masks.
    pub mask_xor: u16,
}

impl Enumeration {
    fn visit(&mut self, s: NeighborSubset) {
        let k = s.len();
        match self.counts.iter_mut().find(|(size, _)| *size == k) {
            Some(c) => c.1 += 1,
            None => self.counts.push((k, 1)),
        }
        self.mask_sum += u64::from(s.0);
        self.mask_xor ^= s.0;
    }

    pub fn total(&self) -> usize {
        self.counts.iter().map(|c| c.1).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoleCase {
    pub subset: NeighborSubset,
    pub betti: BettiNumbers,
    pub genus: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoleFreeReport {
    pub enumeration: Enumeration,
    /// Subsets whose union has `b1 > 0`, `b2 > 0` or a positive-genus
    /// boundary component.
    pub violators: Vec<HoleCase>,
    /// Subsets where "every boundary component has genus 0" and
    /// "b1 = b2 = 0" disagree.
    pub inconsistent: Vec<HoleCase>,
    /// The six-neighbour ring in one lattice plane around the empty centre.
    pub negative_control: HoleCase,
    /// Six-element subsets whose union has `b1 > 0`.
    pub size_six_with_holes: usize,
}

impl HoleFreeReport {
    pub fn passed(&self) -> bool {
        self.violators.is_empty()
            && self.inconsistent.is_empty()
            && self.negative_control.betti.b1 > 0
            && self.enumeration.counts == vec![(1, 12), (2, 66), (3, 220), (4, 495), (5, 792)]
    }
}

fn hole_case(subset: NeighborSubset) -> HoleCase {
    let cells = neighbor_cells(NodePos::ORIGIN, subset.0);
    let complex = build_dual_complex(Dim::Three, &cells).expect("neighbour cells are valid lattice nodes");
    let genus = boundary_genus(&complex).expect("3D complex");
    HoleCase { subset, betti: betti(&complex), genus }
}

/// Union of the neighbour cells only, for every subset of one to five
/// neighbours: no tunnel, no cavity, every boundary surface a sphere.
pub fn verify_small_neighborhoods_hole_free() -> HoleFreeReport {
    let mut enumeration = Enumeration::default();
    let mut violators = Vec::new();
    let mut inconsistent = Vec::new();
    for k in 1..=5 {
        for s in NeighborSubset::of_size(k) {
            enumeration.visit(s);
            let case = hole_case(s);
            let genus_zero = case.genus.iter().all(|&g| g == 0);
            let acyclic = case.betti.b1 == 0 && case.betti.b2 == 0;
            if genus_zero != acyclic {
                inconsistent.push(case.clone());
            }
            if !genus_zero || !acyclic {
                violators.push(case);
            }
        }
    }
    let ring = NeighborSubset(NeighborOffset::planar().map(|d| d.mask()).fold(0, |a, b| a | b));
    let size_six_with_holes = NeighborSubset::of_size(6).filter(|&s| hole_case(s).betti.b1 > 0).count();
    HoleFreeReport { enumeration, violators, inconsistent, negative_control: hole_case(ring), size_six_with_holes }
}

/// Angle record for one subset. The external angle at the centre is
/// `2π − triangles·π/3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AngleReport {
    pub subset: NeighborSubset,
    pub surface_triangle_count_at_v: u32,
    pub vertex_classified: bool,
}

impl AngleReport {
    /// External angle in units of π/3.
    pub fn external_angle_sixths_of_turn(&self) -> i64 {
        6 - i64::from(self.surface_triangle_count_at_v)
    }

    pub fn external_angle_positive(&self) -> bool {
        self.surface_triangle_count_at_v <= 5
    }

    pub fn external_angle_radians(&self) -> f64 {
        self.external_angle_sixths_of_turn() as f64 * std::f64::consts::PI / 3.0
    }
}

/// Polyhedron-vertex filter: at least one triangle at the centre, and every
/// edge from the centre to an occupied neighbour bounds at least two of
/// them, so the triangle fan closes up.
pub fn is_polyhedron_vertex(s: NeighborSubset) -> bool {
    s.adjacent_pairs() >= 1 && s.degrees().iter().all(|&d| d >= 2)
}

pub fn angle_report(s: NeighborSubset) -> AngleReport {
    AngleReport { subset: s, surface_triangle_count_at_v: s.adjacent_pairs(), vertex_classified: is_polyhedron_vertex(s) }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AngleOracleReport {
    pub enumeration: Enumeration,
    pub classified: usize,
    /// Subsets rejected by the vertex filter, for audit.
    pub excluded: Vec<NeighborSubset>,
    /// Classified subsets with positive external angle.
    pub violators: Vec<AngleReport>,
    /// Largest triangle count seen per size among classified subsets, and
    /// the smallest.
    pub triangle_range: Vec<(u32, u32, u32)>,
}

impl AngleOracleReport {
    pub fn passed(&self) -> bool {
        self.violators.is_empty()
            && self.enumeration.counts == vec![(6, 924), (7, 792), (8, 495), (9, 220), (10, 66), (11, 12)]
    }
}

/// Every subset of six to eleven neighbours that passes the vertex filter
/// has nonpositive external angle at the centre.
pub fn verify_vertex_angles() -> AngleOracleReport {
    let mut enumeration = Enumeration::default();
    let mut excluded = Vec::new();
    let mut violators = Vec::new();
    let mut classified = 0;
    let mut triangle_range = Vec::new();
    for k in 6..=11 {
        let mut lo = u32::MAX;
        let mut hi = 0;
        for s in NeighborSubset::of_size(k) {
            enumeration.visit(s);
            let r = angle_report(s);
            if !r.vertex_classified {
                excluded.push(s);
                continue;
            }
            classified += 1;
            lo = lo.min(r.surface_triangle_count_at_v);
            hi = hi.max(r.surface_triangle_count_at_v);
            if r.external_angle_positive() {
                violators.push(r);
            }
        }
        triangle_range.push((k, lo, hi));
    }
    AngleOracleReport { enumeration, classified, excluded, violators, triangle_range }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgressCase {
    pub dim: Dim,
    pub shape: Shape,
    pub size: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgressReport {
    pub sampled: usize,
    pub by_dim: Vec<(Dim, usize)>,
    pub by_shape: Vec<(Shape, usize)>,
    /// Configurations in which no amoebot satisfies any rule.
    pub counterexamples: Vec<ProgressCase>,
    /// Generator failures; these are reported, not counted as samples.
    pub skipped: Vec<ProgressCase>,
    /// How many amoebots satisfied Rule 1, 2 and 3 over all samples.
    pub rule_hits: [u64; 3],
}

impl ProgressReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Shapes drawn by the sampler. Inverse-erosion blobs make the check
/// trivially true (the last node added can be removed), so most samples
/// come from growth processes that ignore the rules.
const PROGRESS_SHAPES: [Shape; 8] = [
    Shape::Accretion,
    Shape::Accretion,
    Shape::Accretion,
    Shape::SphereIsh,
    Shape::PlaneDisk,
    Shape::Blob,
    Shape::Line,
    Shape::SquareGadget,
];

/// Whether some amoebot of `sys` satisfies an erosion rule once every
/// amoebot is a candidate; also tallies which rules fired.
pub fn has_erodable(sys: &mut System, hits: &mut [u64; 3]) -> bool {
    sys.set_all_candidates();
    let mut any = false;
    for id in sys.ids().collect::<Vec<_>>() {
        if let Some(r) = sys.can_erode(id) {
            hits[r.number() as usize - 1] += 1;
            any = true;
        }
    }
    any
}

/// Sample `count` random contractible configurations with sizes drawn from
/// `sizes`, alternating dimensions.
pub fn sample_progress_lemma(count: usize, sizes: RangeInclusive<usize>, seed: u64, dims: &[Dim]) -> ProgressReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ProgressReport {
        sampled: 0,
        by_dim: dims.iter().map(|&d| (d, 0)).collect(),
        by_shape: Vec::new(),
        counterexamples: Vec::new(),
        skipped: Vec::new(),
        rule_hits: [0; 3],
    };
    for i in 0..count {
        let dim = dims[i % dims.len()];
        let mut shape = PROGRESS_SHAPES[rng.gen_range(0..PROGRESS_SHAPES.len())];
        if shape == Shape::SquareGadget && dim == Dim::Two {
            shape = Shape::Accretion;
        }
        let size = rng.gen_range(sizes.clone());
        let case = ProgressCase { dim, shape, size, seed: rng.gen() };
        let Ok(mut sys) = generate(shape, size, case.seed, dim).map(|c| c.to_system().expect("generated config is valid"))
        else {
            report.skipped.push(case);
            continue;
        };
        report.sampled += 1;
        report.by_dim.iter_mut().find(|(d, _)| *d == dim).expect("dim listed").1 += 1;
        match report.by_shape.iter_mut().find(|(s, _)| *s == shape) {
            Some(e) => e.1 += 1,
            None => report.by_shape.push((shape, 1)),
        }
        if !has_erodable(&mut sys, &mut report.rule_hits) {
            report.counterexamples.push(case);
        }
    }
    report
}

/// Rule satisfied by a given amoebot when all are candidates.
pub fn rule_when_all_candidates(sys: &mut System, id: crate::engine::AmoebotId) -> Option<Rule> {
    sys.set_all_candidates();
    sys.can_erode(id)
}
