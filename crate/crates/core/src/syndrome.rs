//! Primal and dual syndrome graphs of a fusion network.
//!
//! Nodes are parity checks and edges are GSM outcomes: erasing an outcome
//! merges the two checks it belongs to. Every outcome has a global id, laid
//! out GSM by GSM: first the `prod X` outcome, then one `ZZ` outcome per
//! constituent BSM in chain order.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::error::Result;
use crate::gsm::Architecture;
use crate::network::{corner, Coord, FusionNetwork, SiteKind, AXIS_T, AXIS_X, AXIS_Y};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeKind {
    Primal,
    Dual,
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LatticeKind::Primal => "primal",
            LatticeKind::Dual => "dual",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum NodeKind {
    /// Cell parity check at the given doubled coordinates.
    Cell(Coord),
    /// Redundancy check of one cyclic GSM, keyed by its vertex index.
    EdgeCheck(u32),
    /// Virtual node collecting the checks beyond one rough boundary.
    Boundary(Side),
    /// Sink for outcomes that leave the block through a time boundary.
    /// Those outcomes are never erased, so the sink never joins a cluster.
    TimeBoundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum OutcomeType {
    #[serde(rename = "XX")]
    Xx,
    #[serde(rename = "XXX")]
    Xxx,
    #[serde(rename = "XXXX")]
    Xxxx,
    #[serde(rename = "ZZ")]
    Zz,
}

impl OutcomeType {
    pub const ALL: [OutcomeType; 4] = [
        OutcomeType::Xx,
        OutcomeType::Xxx,
        OutcomeType::Xxxx,
        OutcomeType::Zz,
    ];

    pub fn product_x(arity: u32) -> OutcomeType {
        match arity {
            2 => OutcomeType::Xx,
            3 => OutcomeType::Xxx,
            4 => OutcomeType::Xxxx,
            k => panic!("GSM arity {k} does not occur in the fusion network"),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for OutcomeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutcomeType::Xx => "XX",
            OutcomeType::Xxx => "XXX",
            OutcomeType::Xxxx => "XXXX",
            OutcomeType::Zz => "ZZ",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyndromeEdge {
    pub a: u32,
    pub b: u32,
    pub outcome: u32,
    pub kind: OutcomeType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyndromeGraph {
    pub lattice: LatticeKind,
    /// Axis along which the two boundary nodes sit.
    pub percolation_axis: usize,
    pub nodes: Vec<NodeKind>,
    pub edges: Vec<SyndromeEdge>,
    pub low: u32,
    pub high: u32,
}

/// One GSM outcome and where it lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outcome {
    pub vertex: u32,
    pub kind: OutcomeType,
    /// `None` for the `prod X` outcome, else the BSM index in the chain.
    pub bsm: Option<u32>,
    pub lattice: LatticeKind,
    /// Index of the edge inside its graph.
    pub edge: u32,
    pub erasable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GsmRecord {
    pub vertex: u32,
    pub arity: u32,
    pub bsms: u32,
    /// Id of the `prod X` outcome; `ZZ` outcomes follow contiguously.
    pub first_outcome: u32,
    pub erasable: bool,
}

#[derive(Debug, Clone)]
pub struct SyndromeGraphs {
    pub architecture: Architecture,
    pub distance: u32,
    pub primal: SyndromeGraph,
    pub dual: SyndromeGraph,
    pub outcomes: Vec<Outcome>,
    pub gsms: Vec<GsmRecord>,
}

/// Choice of the hub cell for bulk minimal GSMs: the surrounding cell with
/// rank `rotation mod 4` in lexicographic `(x, y, t)` order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct HubRule {
    pub rotation: u8,
}

/// Cell layout of one lattice: origin, size and boundary axes.
struct CellGrid {
    origin: Coord,
    dims: [i32; 3],
    percolation_axis: usize,
}

enum CellRef {
    Node(u32),
    Boundary(Side),
    Time,
}

impl CellGrid {
    fn for_lattice(lattice: LatticeKind, d: u32) -> Self {
        let d = d as i32;
        match lattice {
            LatticeKind::Primal => CellGrid {
                origin: [1, 1, 1],
                dims: [d - 1, d, d],
                percolation_axis: AXIS_X,
            },
            LatticeKind::Dual => CellGrid {
                origin: [0, 2, 0],
                dims: [d, d - 1, d + 1],
                percolation_axis: AXIS_Y,
            },
        }
    }

    fn cell_count(&self) -> u32 {
        (self.dims[0] * self.dims[1] * self.dims[2]) as u32
    }

    fn coord_of(&self, index: u32) -> Coord {
        let i = index as i32;
        let t = i % self.dims[2];
        let y = (i / self.dims[2]) % self.dims[1];
        let x = i / (self.dims[2] * self.dims[1]);
        [
            self.origin[0] + 2 * x,
            self.origin[1] + 2 * y,
            self.origin[2] + 2 * t,
        ]
    }

    fn locate(&self, c: Coord) -> CellRef {
        let mut idx = [0i32; 3];
        let mut outside = [None; 3];
        for axis in 0..3 {
            let rel = c[axis] - self.origin[axis];
            debug_assert_eq!(rel.rem_euclid(2), 0, "{c:?} is not a cell of this lattice");
            let i = rel.div_euclid(2);
            idx[axis] = i;
            if i < 0 {
                outside[axis] = Some(Side::Low);
            } else if i >= self.dims[axis] {
                outside[axis] = Some(Side::High);
            }
        }
        if let Some(side) = outside[self.percolation_axis] {
            return CellRef::Boundary(side);
        }
        if outside[AXIS_T].is_some() {
            return CellRef::Time;
        }
        assert!(
            outside.iter().all(Option::is_none),
            "cell {c:?} leaves the block through a smooth boundary"
        );
        CellRef::Node(((idx[0] * self.dims[1] + idx[1]) * self.dims[2] + idx[2]) as u32)
    }
}

struct GraphBuilder {
    grid: CellGrid,
    graph: SyndromeGraph,
    time: u32,
}

impl GraphBuilder {
    fn new(lattice: LatticeKind, d: u32) -> Self {
        let grid = CellGrid::for_lattice(lattice, d);
        let cells = grid.cell_count();
        let mut nodes: Vec<NodeKind> = (0..cells)
            .map(|i| NodeKind::Cell(grid.coord_of(i)))
            .collect();
        nodes.push(NodeKind::Boundary(Side::Low));
        nodes.push(NodeKind::Boundary(Side::High));
        nodes.push(NodeKind::TimeBoundary);
        let graph = SyndromeGraph {
            lattice,
            percolation_axis: grid.percolation_axis,
            nodes,
            edges: Vec::new(),
            low: cells,
            high: cells + 1,
        };
        GraphBuilder {
            grid,
            graph,
            time: cells + 2,
        }
    }

    fn node(&self, c: Coord) -> u32 {
        match self.grid.locate(c) {
            CellRef::Node(i) => i,
            CellRef::Boundary(Side::Low) => self.graph.low,
            CellRef::Boundary(Side::High) => self.graph.high,
            CellRef::Time => self.time,
        }
    }

    fn add_node(&mut self, kind: NodeKind) -> u32 {
        self.graph.nodes.push(kind);
        (self.graph.nodes.len() - 1) as u32
    }

    fn add_edge(&mut self, a: u32, b: u32, outcome: u32, kind: OutcomeType) -> u32 {
        self.graph.edges.push(SyndromeEdge {
            a,
            b,
            outcome,
            kind,
        });
        (self.graph.edges.len() - 1) as u32
    }
}

/// Existing ring positions in path order. Without a gap the path starts at
/// position 0; otherwise it starts just after the (first) gap.
fn path_positions(ring: &[Option<Coord>; 4]) -> (Vec<usize>, bool) {
    let present = |p: usize| ring[p % 4].is_some();
    match (0..4).find(|&p| !present(p)) {
        None => ((0..4).collect(), false),
        Some(_) => {
            let start = (0..4)
                .find(|&p| present(p) && !present(p + 3))
                .expect("a vertex has at least one neighbour");
            let mut out = Vec::new();
            let mut p = start;
            while present(p) && out.len() < 4 {
                out.push(p % 4);
                p += 1;
            }
            (out, true)
        }
    }
}

pub fn build_syndrome_graphs(network: &FusionNetwork, hub: HubRule) -> Result<SyndromeGraphs> {
    let d = network.distance;
    let arch = network.architecture;
    let mut primal = GraphBuilder::new(LatticeKind::Primal, d);
    let mut dual = GraphBuilder::new(LatticeKind::Dual, d);
    let mut outcomes = Vec::new();
    let mut gsms = Vec::new();

    for (vi, v) in network.vertices.iter().enumerate() {
        let vi = vi as u32;
        let (x_lattice, z_lattice) = match v.kind {
            SiteKind::Face => (LatticeKind::Primal, LatticeKind::Dual),
            SiteKind::Edge => (LatticeKind::Dual, LatticeKind::Primal),
        };
        let first_outcome = outcomes.len() as u32;
        let bsms = arch.bsm_count(v.degree);
        gsms.push(GsmRecord {
            vertex: vi,
            arity: v.degree,
            bsms,
            first_outcome,
            erasable: v.erasable,
        });

        // prod X joins the two cells on either side of the site.
        {
            let b = if x_lattice == LatticeKind::Primal {
                &mut primal
            } else {
                &mut dual
            };
            let axis = crate::network::special_axis(v.coord);
            let mut lo = v.coord;
            let mut hi = v.coord;
            lo[axis] -= 1;
            hi[axis] += 1;
            let kind = OutcomeType::product_x(v.degree);
            let (na, nb) = (b.node(lo), b.node(hi));
            let edge = b.add_edge(na, nb, first_outcome, kind);
            outcomes.push(Outcome {
                vertex: vi,
                kind,
                bsm: None,
                lattice: x_lattice,
                edge,
                erasable: v.erasable,
            });
        }

        // ZZ outcomes between consecutive qubits of the GSM chain.
        let b = if z_lattice == LatticeKind::Primal {
            &mut primal
        } else {
            &mut dual
        };
        let (path, gapped) = path_positions(&v.ring);
        // Region across the gap, seen from the corner just before the path.
        let across_gap = gapped.then(|| b.node(corner(v.coord, path[0] + 3)));
        let pair_corners: Vec<u32> = path
            .windows(2)
            .map(|w| b.node(corner(v.coord, w[0])))
            .collect();

        let mut push_zz = |b: &mut GraphBuilder, na: u32, nb: u32, bsm: u32| {
            let outcome = outcomes.len() as u32;
            let edge = b.add_edge(na, nb, outcome, OutcomeType::Zz);
            outcomes.push(Outcome {
                vertex: vi,
                kind: OutcomeType::Zz,
                bsm: Some(bsm),
                lattice: z_lattice,
                edge,
                erasable: v.erasable,
            });
        };

        match (arch, across_gap) {
            (Architecture::Minimal, Some(boundary)) => {
                for (i, &c) in pair_corners.iter().enumerate() {
                    push_zz(b, c, boundary, i as u32);
                }
            }
            (Architecture::Minimal, None) => {
                // Chain starts after the hub corner so that the hub's ZZ is
                // the product of the three measured ones.
                let mut corners: Vec<(Coord, usize)> =
                    (0..4).map(|p| (corner(v.coord, p), p)).collect();
                corners.sort();
                let hub_pos = corners[hub.rotation as usize % 4].1;
                let hub_node = b.node(corner(v.coord, hub_pos));
                for i in 0..3 {
                    let p = (hub_pos + 1 + i) % 4;
                    let c = b.node(corner(v.coord, p));
                    push_zz(b, c, hub_node, i as u32);
                }
            }
            (Architecture::Cyclic, gap) => {
                let check = b.add_node(NodeKind::EdgeCheck(vi));
                let mut bsm = 0;
                let ring_pairs: Vec<u32> = match gap {
                    None => (0..4).map(|p| b.node(corner(v.coord, p))).collect(),
                    Some(_) => pair_corners.clone(),
                };
                for c in ring_pairs {
                    push_zz(b, check, c, bsm);
                    bsm += 1;
                }
                if let Some(boundary) = gap {
                    push_zz(b, check, boundary, bsm);
                }
            }
        }
        debug_assert_eq!(outcomes.len() as u32 - first_outcome, 1 + bsms);
    }

    Ok(SyndromeGraphs {
        architecture: arch,
        distance: d,
        primal: primal.graph,
        dual: dual.graph,
        outcomes,
        gsms,
    })
}

impl SyndromeGraphs {
    pub fn graph(&self, lattice: LatticeKind) -> &SyndromeGraph {
        match lattice {
            LatticeKind::Primal => &self.primal,
            LatticeKind::Dual => &self.dual,
        }
    }

    pub fn edge_count(&self) -> usize {
        self.primal.edges.len() + self.dual.edges.len()
    }

    /// Edge count per outcome type, per lattice.
    pub fn outcome_census(&self) -> BTreeMap<(LatticeKind, OutcomeType), usize> {
        let mut out = BTreeMap::new();
        for g in [&self.primal, &self.dual] {
            for t in OutcomeType::ALL {
                out.insert((g.lattice, t), 0);
            }
            for e in &g.edges {
                *out.entry((g.lattice, e.kind)).or_insert(0) += 1;
            }
        }
        out
    }

    /// Plain-text edge list: one `node` line per node, one `edge` line per
    /// edge.
    ///
    /// ```text
    /// graph <lattice> nodes <N> edges <E> low <id> high <id>
    /// node <id> cell <x> <y> <t> | edge-check <vertex> | boundary low|high | time-boundary
    /// edge <id> <outcome id> <type> <a> <b> <erasable 0|1>
    /// ```
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for g in [&self.primal, &self.dual] {
            let _ = writeln!(
                out,
                "graph {} nodes {} edges {} low {} high {}",
                g.lattice,
                g.nodes.len(),
                g.edges.len(),
                g.low,
                g.high
            );
            for (i, n) in g.nodes.iter().enumerate() {
                let _ = match n {
                    NodeKind::Cell(c) => writeln!(out, "node {i} cell {} {} {}", c[0], c[1], c[2]),
                    NodeKind::EdgeCheck(v) => writeln!(out, "node {i} edge-check {v}"),
                    NodeKind::Boundary(Side::Low) => writeln!(out, "node {i} boundary low"),
                    NodeKind::Boundary(Side::High) => writeln!(out, "node {i} boundary high"),
                    NodeKind::TimeBoundary => writeln!(out, "node {i} time-boundary"),
                };
            }
            for (i, e) in g.edges.iter().enumerate() {
                let erasable = self.outcomes[e.outcome as usize].erasable as u8;
                let _ = writeln!(
                    out,
                    "edge {i} {} {} {} {} {erasable}",
                    e.outcome, e.kind, e.a, e.b
                );
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::build_network;

    fn graphs(d: u32, arch: Architecture) -> (FusionNetwork, SyndromeGraphs) {
        let net = build_network(d, arch).unwrap();
        let g = build_syndrome_graphs(&net, HubRule::default()).unwrap();
        (net, g)
    }

    fn degrees(g: &SyndromeGraph) -> Vec<usize> {
        let mut deg = vec![0; g.nodes.len()];
        for e in &g.edges {
            deg[e.a as usize] += 1;
            deg[e.b as usize] += 1;
        }
        deg
    }

    #[test]
    fn outcomes_per_gsm() {
        for arch in [Architecture::Minimal, Architecture::Cyclic] {
            let (net, g) = graphs(3, arch);
            assert_eq!(g.gsms.len(), net.gsm_count());
            for (gsm, v) in g.gsms.iter().zip(&net.vertices) {
                let next = g
                    .gsms
                    .get(gsm.vertex as usize + 1)
                    .map_or(g.outcomes.len() as u32, |n| n.first_outcome);
                let count = next - gsm.first_outcome;
                let expected = match arch {
                    Architecture::Minimal => v.degree,
                    Architecture::Cyclic => v.degree + 1,
                };
                assert_eq!(count, expected);
            }
            let census = g.outcome_census();
            assert_eq!(census.values().sum::<usize>(), g.edge_count());
            assert_eq!(g.edge_count(), g.outcomes.len());
        }
    }

    #[test]
    fn each_outcome_on_exactly_one_edge() {
        for arch in [Architecture::Minimal, Architecture::Cyclic] {
            let (_, g) = graphs(5, arch);
            let mut seen = vec![0; g.outcomes.len()];
            for graph in [&g.primal, &g.dual] {
                for (i, e) in graph.edges.iter().enumerate() {
                    seen[e.outcome as usize] += 1;
                    let o = g.outcomes[e.outcome as usize];
                    assert_eq!(
                        (o.lattice, o.edge as usize, o.kind),
                        (graph.lattice, i, e.kind)
                    );
                }
            }
            assert!(seen.iter().all(|&s| s == 1));
        }
    }

    #[test]
    fn bulk_examples() {
        for arch in [Architecture::Minimal, Architecture::Cyclic] {
            let (net, g) = graphs(5, arch);
            let face = net
                .vertices
                .iter()
                .position(|v| v.coord == [3, 5, 4])
                .expect("bulk face");
            let edge = net
                .vertices
                .iter()
                .position(|v| v.coord == [3, 4, 4])
                .expect("bulk edge");
            let fo = g.gsms[face].first_outcome as usize;
            let x = g.outcomes[fo];
            assert_eq!(
                (x.kind, x.lattice),
                (OutcomeType::Xxxx, LatticeKind::Primal)
            );
            let e = g.primal.edges[x.edge as usize];
            assert_eq!(g.primal.nodes[e.a as usize], NodeKind::Cell([3, 5, 3]));
            assert_eq!(g.primal.nodes[e.b as usize], NodeKind::Cell([3, 5, 5]));

            let eo = g.gsms[edge].first_outcome as usize;
            let zz: Vec<SyndromeEdge> = (1..=g.gsms[edge].bsms as usize)
                .map(|i| g.primal.edges[g.outcomes[eo + i].edge as usize])
                .collect();
            match arch {
                Architecture::Minimal => {
                    assert_eq!(zz.len(), 3);
                    // A star: one shared endpoint, the lexicographically
                    // smallest surrounding cell.
                    let hub = zz[0].b;
                    assert!(zz.iter().all(|e| e.b == hub));
                    assert_eq!(g.primal.nodes[hub as usize], NodeKind::Cell([3, 3, 3]));
                    let mut leaves: Vec<_> =
                        zz.iter().map(|e| g.primal.nodes[e.a as usize]).collect();
                    leaves.sort_by_key(|n| format!("{n:?}"));
                    assert_eq!(
                        leaves,
                        vec![
                            NodeKind::Cell([3, 3, 5]),
                            NodeKind::Cell([3, 5, 3]),
                            NodeKind::Cell([3, 5, 5])
                        ]
                    );
                }
                Architecture::Cyclic => {
                    assert_eq!(zz.len(), 4);
                    let check = zz[0].a;
                    assert_eq!(
                        g.primal.nodes[check as usize],
                        NodeKind::EdgeCheck(edge as u32)
                    );
                    assert!(zz.iter().all(|e| e.a == check));
                }
            }
        }
    }

    #[test]
    fn hub_rotation_moves_the_star_centre() {
        let net = build_network(5, Architecture::Minimal).unwrap();
        let a = build_syndrome_graphs(&net, HubRule { rotation: 0 }).unwrap();
        let b = build_syndrome_graphs(&net, HubRule { rotation: 1 }).unwrap();
        assert_ne!(a.primal.edges, b.primal.edges);
        assert_eq!(a.primal.edges.len(), b.primal.edges.len());
    }

    #[test]
    fn node_degrees() {
        for arch in [Architecture::Minimal, Architecture::Cyclic] {
            let (net, g) = graphs(5, arch);
            for graph in [&g.primal, &g.dual] {
                let deg = degrees(graph);
                for (i, n) in graph.nodes.iter().enumerate() {
                    match n {
                        NodeKind::Cell(_) => assert!(deg[i] >= 1, "{n:?}"),
                        NodeKind::EdgeCheck(v) => {
                            assert_eq!(deg[i] as u32, net.vertices[*v as usize].degree)
                        }
                        NodeKind::Boundary(_) => assert!(deg[i] > 0),
                        NodeKind::TimeBoundary => {}
                    }
                }
            }
            // Only primal outcomes reach the time boundary, and never erasable ones.
            let time_dual = g
                .dual
                .nodes
                .iter()
                .position(|n| *n == NodeKind::TimeBoundary)
                .unwrap();
            assert_eq!(degrees(&g.dual)[time_dual], 0);
            for graph in [&g.primal, &g.dual] {
                for e in &graph.edges {
                    let touches_time = [e.a, e.b]
                        .iter()
                        .any(|&n| graph.nodes[n as usize] == NodeKind::TimeBoundary);
                    if touches_time {
                        assert!(!g.outcomes[e.outcome as usize].erasable);
                    }
                }
            }
        }
    }

    #[test]
    fn primal_and_dual_have_matching_shape() {
        // The dual block is the primal one with x and y exchanged and one
        // extra time layer, so bulk edge counts per type agree closely.
        let (_, g) = graphs(7, Architecture::Cyclic);
        let census = g.outcome_census();
        let p = census[&(LatticeKind::Primal, OutcomeType::Xxxx)];
        let d = census[&(LatticeKind::Dual, OutcomeType::Xxxx)];
        assert!(p > 0 && d > 0);
        assert_eq!(g.primal.percolation_axis, AXIS_X);
        assert_eq!(g.dual.percolation_axis, AXIS_Y);
    }

    #[test]
    fn deterministic_and_exportable() {
        let (_, a) = graphs(3, Architecture::Minimal);
        let (_, b) = graphs(3, Architecture::Minimal);
        assert_eq!(a.primal, b.primal);
        let text = a.to_edge_list();
        assert_eq!(text, b.to_edge_list());
        assert!(text.starts_with("graph primal nodes"));
        let edge_lines = text.lines().filter(|l| l.starts_with("edge ")).count();
        assert_eq!(edge_lines, a.edge_count());
    }
}
