//! Foliated surface-code fusion network.
//!
//! Sites live on a doubled integer grid `(x, y, t)`. A site with two odd
//! coordinates is a face of the primal cubic lattice; a site with one odd
//! coordinate is a primal edge. Primal cells sit at all-odd points and dual
//! cells at all-even points. Each site hosts one GSM whose arity is the
//! number of neighbouring sites, and each neighbouring pair shares one
//! two-qubit resource state.
//!
//! For distance `d` the site ranges are `x in [0, 2d-2]`, `y in [1, 2d-1]`
//! and `t in [0, 2d]`, giving `2d + 1` time slices. The primal lattice is
//! rough along `x` and the dual lattice is rough along `y`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gsm::Architecture;

pub type Coord = [i32; 3];

pub const AXIS_X: usize = 0;
pub const AXIS_Y: usize = 1;
pub const AXIS_T: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SiteKind {
    /// Primal face; its `prod X` outcome joins two primal cells.
    Face,
    /// Primal edge; its `prod X` outcome joins two dual cells.
    Edge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub coord: Coord,
    pub kind: SiteKind,
    /// Neighbouring sites in cyclic order `+a, +b, -a, -b`, where `a < b`
    /// are the two axes transverse to the site. `None` marks a missing
    /// neighbour outside the block.
    pub ring: [Option<Coord>; 4],
    pub degree: u32,
    /// Vertices in the first and last time slice are never erased.
    pub erasable: bool,
}

#[derive(Debug, Clone)]
pub struct FusionNetwork {
    pub distance: u32,
    pub architecture: Architecture,
    pub vertices: Vec<Vertex>,
}

/// Inclusive coordinate bounds of qubit sites for distance `d`.
pub fn site_bounds(d: u32) -> [(i32, i32); 3] {
    let d = d as i32;
    [(0, 2 * d - 2), (1, 2 * d - 1), (0, 2 * d)]
}

fn odd_count(c: Coord) -> usize {
    c.iter().filter(|v| v.rem_euclid(2) == 1).count()
}

pub fn is_site(c: Coord, d: u32) -> bool {
    let bounds = site_bounds(d);
    let inside = c
        .iter()
        .zip(bounds)
        .all(|(&v, (lo, hi))| (lo..=hi).contains(&v));
    inside && matches!(odd_count(c), 1 | 2)
}

/// Axis normal to a face (its even coordinate) or along an edge (its odd
/// coordinate).
pub fn special_axis(c: Coord) -> usize {
    let odd: Vec<usize> = (0..3).filter(|&i| c[i].rem_euclid(2) == 1).collect();
    match odd.len() {
        1 => odd[0],
        2 => (0..3).find(|i| !odd.contains(i)).expect("one even axis"),
        n => panic!("{c:?} has {n} odd coordinates and is not a qubit site"),
    }
}

/// The two axes transverse to a site, in increasing order.
pub fn transverse_axes(c: Coord) -> [usize; 2] {
    let s = special_axis(c);
    let v: Vec<usize> = (0..3).filter(|&i| i != s).collect();
    [v[0], v[1]]
}

/// Offsets of the ring positions, in the order `+a, +b, -a, -b`.
pub fn ring_offsets(c: Coord) -> [Coord; 4] {
    let [a, b] = transverse_axes(c);
    let unit = |axis: usize, sign: i32| {
        let mut o = [0; 3];
        o[axis] = sign;
        o
    };
    [unit(a, 1), unit(b, 1), unit(a, -1), unit(b, -1)]
}

pub fn add(c: Coord, o: Coord) -> Coord {
    [c[0] + o[0], c[1] + o[1], c[2] + o[2]]
}

/// Cell sitting in the corner between ring positions `p` and `p + 1`.
pub fn corner(c: Coord, p: usize) -> Coord {
    let offs = ring_offsets(c);
    add(add(c, offs[p % 4]), offs[(p + 1) % 4])
}

pub fn build_network(d: u32, architecture: Architecture) -> Result<FusionNetwork> {
    if d < 3 || d.is_multiple_of(2) {
        return Err(Error::validation(
            "d",
            format!("distance must be odd and at least 3, got {d}"),
        ));
    }
    let bounds = site_bounds(d);
    let mut vertices = Vec::new();
    for x in bounds[AXIS_X].0..=bounds[AXIS_X].1 {
        for y in bounds[AXIS_Y].0..=bounds[AXIS_Y].1 {
            for t in bounds[AXIS_T].0..=bounds[AXIS_T].1 {
                let coord = [x, y, t];
                if !is_site(coord, d) {
                    continue;
                }
                let kind = if odd_count(coord) == 2 {
                    SiteKind::Face
                } else {
                    SiteKind::Edge
                };
                let offs = ring_offsets(coord);
                let ring = offs.map(|o| {
                    let n = add(coord, o);
                    is_site(n, d).then_some(n)
                });
                let degree = ring.iter().flatten().count() as u32;
                vertices.push(Vertex {
                    coord,
                    kind,
                    ring,
                    degree,
                    erasable: t != bounds[AXIS_T].0 && t != bounds[AXIS_T].1,
                });
            }
        }
    }
    Ok(FusionNetwork {
        distance: d,
        architecture,
        vertices,
    })
}

impl FusionNetwork {
    /// Vertex count keyed by degree.
    pub fn degree_census(&self) -> BTreeMap<u32, usize> {
        let mut out = BTreeMap::new();
        for v in &self.vertices {
            *out.entry(v.degree).or_insert(0) += 1;
        }
        out
    }

    /// Number of two-qubit resource states, one per neighbouring site pair.
    pub fn resource_state_count(&self) -> usize {
        self.vertices
            .iter()
            .map(|v| v.degree as usize)
            .sum::<usize>()
            / 2
    }

    pub fn gsm_count(&self) -> usize {
        self.vertices.len()
    }

    /// Whether a vertex lies strictly inside the block in every direction
    /// that its neighbours span.
    pub fn is_bulk(&self, v: &Vertex) -> bool {
        let bounds = site_bounds(self.distance);
        transverse_axes(v.coord)
            .iter()
            .all(|&a| v.coord[a] > bounds[a].0 && v.coord[a] < bounds[a].1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn rejects_bad_distance() {
        for d in [0, 1, 2, 4, 10] {
            assert!(build_network(d, Architecture::Cyclic).is_err(), "d={d}");
        }
    }

    #[test]
    fn bulk_and_boundary_degrees() {
        let net = build_network(3, Architecture::Minimal).unwrap();
        for v in &net.vertices {
            if net.is_bulk(v) {
                assert_eq!(v.degree, 4, "{:?}", v.coord);
            } else {
                assert!(matches!(v.degree, 2 | 3), "{:?}", v.coord);
            }
        }
        let census = net.degree_census();
        assert_eq!(census.keys().copied().collect::<Vec<_>>(), vec![2, 3, 4]);
        assert_eq!(census.values().sum::<usize>(), net.gsm_count());
    }

    #[test]
    fn degree_two_only_in_time_boundary_slices() {
        let net = build_network(5, Architecture::Cyclic).unwrap();
        for v in net.vertices.iter().filter(|v| v.degree == 2) {
            assert!(!v.erasable, "{:?}", v.coord);
        }
    }

    #[test]
    fn census_matches_brute_force_recount() {
        // Count neighbours by scanning every pair of sites at distance one.
        let d = 5;
        let net = build_network(d, Architecture::Minimal).unwrap();
        let sites: HashSet<Coord> = net.vertices.iter().map(|v| v.coord).collect();
        let mut degree: BTreeMap<Coord, u32> = BTreeMap::new();
        let all: Vec<Coord> = sites.iter().copied().collect();
        for &a in &all {
            for &b in &all {
                let dist: i32 = (0..3).map(|i| (a[i] - b[i]).abs()).sum();
                // Neighbours differ by one step and have different kinds.
                if dist == 1 && odd_count(a) != odd_count(b) {
                    *degree.entry(a).or_insert(0) += 1;
                }
            }
        }
        let mut census: BTreeMap<u32, usize> = BTreeMap::new();
        for &a in &all {
            *census
                .entry(degree.get(&a).copied().unwrap_or(0))
                .or_insert(0) += 1;
        }
        assert_eq!(census, net.degree_census());
        let pairs: u32 = degree.values().sum::<u32>() / 2;
        assert_eq!(pairs as usize, net.resource_state_count());
    }

    #[test]
    fn corners_exist_iff_flanks_exist() {
        // Corners of faces are dual cells, corners of edges are primal cells.
        let d = 5;
        let net = build_network(d, Architecture::Minimal).unwrap();
        let di = d as i32;
        let cell_exists = |c: Coord| {
            let ranges = if c.iter().all(|v| v.rem_euclid(2) == 1) {
                [(1, 2 * di - 3), (1, 2 * di - 1), (1, 2 * di - 1)]
            } else {
                [(0, 2 * di - 2), (2, 2 * di - 2), (0, 2 * di)]
            };
            c.iter()
                .zip(ranges)
                .all(|(&v, (lo, hi))| (lo..=hi).contains(&v))
        };
        for v in &net.vertices {
            for p in 0..4 {
                let flanks = v.ring[p].is_some() && v.ring[(p + 1) % 4].is_some();
                assert_eq!(
                    flanks,
                    cell_exists(corner(v.coord, p)),
                    "{:?} corner {p}",
                    v.coord
                );
            }
        }
    }

    #[test]
    fn deterministic() {
        let a = build_network(5, Architecture::Cyclic).unwrap();
        let b = build_network(5, Architecture::Cyclic).unwrap();
        assert_eq!(a.vertices, b.vertices);
    }
}
