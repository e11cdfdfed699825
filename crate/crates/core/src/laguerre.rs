//! Power distance, Laguerre cells and diagrams in the plane.
//!
//! Each cell `L(x, γ) = ⋂_{y≠x} P(x, y)` is built literally as an
//! intersection of half-planes, by clipping a bounding box. Clipping is done
//! in coordinates centred at the cell's nucleus and every polygon vertex is
//! recomputed as the intersection of its two supporting lines, which keeps
//! vertices accurate even for very large boxes.
//!
//! A finite generator set always has unbounded cells. A cell is reported
//! `complete` when no vertex of the unclipped cell lies outside the box;
//! energies are only defined on diagrams whose cells are all complete.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::config::{Configuration, Mark};
use crate::predicates::{lifted_orient, orient2d};
use crate::rng::CounterRng;
use crate::vec::{cross2, dot2, norm2, sub2};
use crate::window::Window;

/// Relative tolerance for vertex merging and on-line tests.
pub const REL_TOLERANCE: f64 = 1e-10;
/// Growth factor of the box used to tell empty cells from cells lying
/// entirely outside the bounding box.
const FAR_FACTOR: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Generator {
    pub nucleus: [f64; 2],
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum LaguerreError {
    #[error("configuration must be planar with weight marks")]
    NotLaguerre,
    #[error("generators {0} and {1} share a nucleus")]
    CoincidentNuclei(usize, usize),
    #[error("bounding box must be a planar box containing every nucleus")]
    BadBbox,
    #[error("cell {0} is empty")]
    EmptyCell(usize),
    #[error("cell {0} is clipped by the bounding box")]
    ClippedCell(usize),
    #[error("bounding box too small: cell {0} has vertices outside it")]
    BboxTooSmall(usize),
    #[error("index {0} out of range")]
    Index(usize),
    #[error("configuration is not in general position")]
    NotGeneralPosition,
    #[error("boundary configuration has an empty cell")]
    BoundaryEmptyCell,
    #[error("inner configuration must lie in the window and the boundary outside it")]
    Placement,
    #[error("window must be contained in every cube of the schedule")]
    Schedule,
}

pub fn generators_of(gamma: &Configuration) -> Result<Vec<Generator>, LaguerreError> {
    if gamma.dim() != 2 {
        return Err(LaguerreError::NotLaguerre);
    }
    gamma
        .iter()
        .map(|p| match p.mark {
            Mark::Weight(w) => Ok(Generator { nucleus: [p.loc[0], p.loc[1]], weight: w }),
            Mark::Facet { .. } => Err(LaguerreError::NotLaguerre),
        })
        .collect()
}

/// `ρ(z, (x, u)) = |x - z|^2 - u^2`.
pub fn power_distance(z: [f64; 2], g: &Generator) -> f64 {
    let d = sub2(g.nucleus, z);
    dot2(d, d) - g.weight * g.weight
}

/// `{z : <c, z> <= β}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfPlane {
    pub c: [f64; 2],
    pub beta: f64,
}

impl HalfPlane {
    pub fn contains(&self, z: [f64; 2]) -> bool {
        dot2(self.c, z) <= self.beta
    }
}

/// Points at least as close to `g1` as to `g2` in power distance:
/// `c = 2(y - x)`, `β = |y|^2 - |x|^2 + u^2 - v^2`.
pub fn half_plane(g1: &Generator, g2: &Generator) -> Result<HalfPlane, LaguerreError> {
    let (x, y) = (g1.nucleus, g2.nucleus);
    if x == y {
        return Err(LaguerreError::CoincidentNuclei(0, 1));
    }
    Ok(HalfPlane {
        c: [2.0 * (y[0] - x[0]), 2.0 * (y[1] - x[1])],
        // grouped so that swapping the generators negates β exactly
        beta: (dot2(y, y) - dot2(x, x)) + (g1.weight * g1.weight - g2.weight * g2.weight),
    })
}

/// What supports an edge of a cell polygon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum EdgeSupport {
    /// Radical axis with generator `j`.
    Neighbor(usize),
    /// Side of the bounding box: 0 right, 1 top, 2 left, 3 bottom.
    Bbox(u8),
}

/// A convex cell polygon, counter-clockwise. Edge `k` joins vertex `k` to
/// vertex `k + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellPolygon {
    pub vertices: Vec<[f64; 2]>,
    pub edges: Vec<EdgeSupport>,
    /// No vertex of the unclipped cell lies outside the bounding box.
    pub complete: bool,
}

impl CellPolygon {
    pub fn clipped(&self) -> bool {
        self.edges.iter().any(|e| matches!(e, EdgeSupport::Bbox(_)))
    }

    /// Indices of vertices of the unclipped cell (both incident edges are
    /// radical axes).
    pub fn real_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        let n = self.edges.len();
        (0..n).filter(move |&k| {
            matches!(self.edges[k], EdgeSupport::Neighbor(_))
                && matches!(self.edges[(k + n - 1) % n], EdgeSupport::Neighbor(_))
        })
    }

    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        (0..n).map(|k| cross2(self.vertices[k], self.vertices[(k + 1) % n])).sum::<f64>() / 2.0
    }

    /// Point strictly inside a convex polygon, at least `margin` from every edge.
    pub fn contains_with_margin(&self, z: [f64; 2], margin: f64) -> bool {
        let n = self.vertices.len();
        (0..n).all(|k| {
            let a = self.vertices[k];
            let b = self.vertices[(k + 1) % n];
            let e = sub2(b, a);
            let len = norm2(e);
            len > 0.0 && cross2(e, sub2(z, a)) / len >= margin
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Empty,
    /// Nonempty, but disjoint from the bounding box.
    OutsideBbox,
    Polygon(CellPolygon),
}

impl Cell {
    pub fn polygon(&self) -> Option<&CellPolygon> {
        match self {
            Cell::Polygon(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagramVertex {
    pub point: [f64; 2],
    /// Sorted indices of incident cells.
    pub cells: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagramEdge {
    /// Incident cells `(i, j)` with `i < j`.
    pub cells: (usize, usize),
    pub endpoints: [[f64; 2]; 2],
    /// Both endpoints are diagram vertices (not clip points).
    pub bounded: bool,
    /// Number of incident cells whose polygon carries this edge (2 when consistent).
    pub seen_from: u8,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LaguerreDiagram {
    pub generators: Vec<Generator>,
    pub bbox: ([f64; 2], [f64; 2]),
    pub cells: Vec<Cell>,
    pub neighbors: Vec<Vec<usize>>,
    pub vertices: Vec<DiagramVertex>,
    pub edges: Vec<DiagramEdge>,
    /// Absolute length tolerance used for merging.
    pub tolerance: f64,
}

impl LaguerreDiagram {
    pub fn empty_cells(&self) -> Vec<usize> {
        (0..self.cells.len()).filter(|&i| matches!(self.cells[i], Cell::Empty)).collect()
    }

    /// First cell that makes the diagram depend on the box: lying outside
    /// it, or having vertices outside it.
    pub fn contaminated_cell(&self) -> Option<usize> {
        self.cells.iter().position(|c| match c {
            Cell::OutsideBbox => true,
            Cell::Polygon(p) => !p.complete,
            Cell::Empty => false,
        })
    }

    /// Number of real vertices of cell `i`, also for unbounded cells.
    pub fn cell_vertex_count(&self, i: usize) -> Option<usize> {
        self.cells.get(i)?.polygon().map(|p| p.real_vertices().count())
    }

    /// Generator index minimising the power distance (ties to the lower index).
    pub fn argmin(&self, z: [f64; 2]) -> usize {
        argmin_power(&self.generators, z)
    }
}

pub fn argmin_power(gens: &[Generator], z: [f64; 2]) -> usize {
    let mut best = 0;
    let mut bd = f64::INFINITY;
    for (i, g) in gens.iter().enumerate() {
        let d = power_distance(z, g);
        if d < bd {
            bd = d;
            best = i;
        }
    }
    best
}

// A line `<c, z> <= beta` in cell-local coordinates.
#[derive(Clone, Copy)]
struct Line {
    c: [f64; 2],
    beta: f64,
    support: EdgeSupport,
}

impl Line {
    fn signed_dist(&self, z: [f64; 2]) -> f64 {
        (dot2(self.c, z) - self.beta) / norm2(self.c)
    }
}

fn intersect(a: &Line, b: &Line) -> Option<[f64; 2]> {
    let det = cross2(a.c, b.c);
    if det == 0.0 {
        return None;
    }
    Some([(a.beta * b.c[1] - b.beta * a.c[1]) / det, (a.c[0] * b.beta - b.c[0] * a.beta) / det])
}

fn box_lines(lo: [f64; 2], hi: [f64; 2]) -> [Line; 4] {
    [
        Line { c: [1.0, 0.0], beta: hi[0], support: EdgeSupport::Bbox(0) },
        Line { c: [0.0, 1.0], beta: hi[1], support: EdgeSupport::Bbox(1) },
        Line { c: [-1.0, 0.0], beta: -lo[0], support: EdgeSupport::Bbox(2) },
        Line { c: [0.0, -1.0], beta: -lo[1], support: EdgeSupport::Bbox(3) },
    ]
}

// Polygon under construction: vertex k starts edge k, which lies on line k.
struct Poly {
    pts: Vec<[f64; 2]>,
    lines: Vec<Line>,
}

impl Poly {
    fn from_box(lo: [f64; 2], hi: [f64; 2]) -> Poly {
        let lines = box_lines(lo, hi);
        // vertex k = start of edge k: right edge starts at bottom-right, …
        let pts = vec![[hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]], [lo[0], lo[1]]];
        Poly { pts, lines: lines.to_vec() }
    }

    fn clip(&mut self, h: &Line, eps: f64) {
        let n = self.pts.len();
        if n == 0 {
            return;
        }
        let s: Vec<f64> = self.pts.iter().map(|&p| h.signed_dist(p)).collect();
        if s.iter().all(|&v| v <= eps) {
            return;
        }
        if s.iter().all(|&v| v > -eps) {
            self.pts.clear();
            self.lines.clear();
            return;
        }
        let mut pts = Vec::with_capacity(n + 1);
        let mut lines = Vec::with_capacity(n + 1);
        for k in 0..n {
            let k1 = (k + 1) % n;
            let (a_in, b_in) = (s[k] <= eps, s[k1] <= eps);
            match (a_in, b_in) {
                (true, true) => {
                    pts.push(self.pts[k]);
                    lines.push(self.lines[k]);
                }
                (true, false) => {
                    if s[k] < -eps {
                        pts.push(self.pts[k]);
                        lines.push(self.lines[k]);
                        pts.push(intersect(&self.lines[k], h).unwrap_or(self.pts[k]));
                    } else {
                        pts.push(self.pts[k]);
                    }
                    lines.push(*h);
                }
                (false, true) => {
                    if s[k1] < -eps {
                        pts.push(intersect(&self.lines[k], h).unwrap_or(self.pts[k1]));
                        lines.push(self.lines[k]);
                    }
                }
                (false, false) => {}
            }
        }
        self.pts = pts;
        self.lines = lines;
        self.dedup(eps);
    }

    fn dedup(&mut self, eps: f64) {
        let mut k = 0;
        while self.pts.len() > 1 && k < self.pts.len() {
            let k1 = (k + 1) % self.pts.len();
            let d = sub2(self.pts[k1], self.pts[k]);
            if norm2(d) <= eps {
                // edge k is degenerate: vertex k now starts edge k1
                self.lines[k] = self.lines[k1];
                self.pts.remove(k1);
                self.lines.remove(k1);
                if k1 == 0 {
                    // the removed vertex was the first one; keep order
                    k = 0;
                }
            } else {
                k += 1;
            }
        }
        if self.pts.len() < 3 {
            self.pts.clear();
            self.lines.clear();
        }
    }
}

fn local_constraints(gens: &[Generator], i: usize) -> Vec<Line> {
    let x = gens[i].nucleus;
    let u2 = gens[i].weight * gens[i].weight;
    let mut out: Vec<(f64, Line)> = gens
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(j, g)| {
            let d = sub2(g.nucleus, x);
            let dd = dot2(d, d);
            // 2<y-x, z-x> <= |y-x|^2 + u^2 - v^2
            (dd, Line { c: [2.0 * d[0], 2.0 * d[1]], beta: dd + (u2 - g.weight * g.weight), support: EdgeSupport::Neighbor(j) })
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out.into_iter().map(|x| x.1).collect()
}

fn clip_cell(gens: &[Generator], i: usize, constraints: &[Line], lo: [f64; 2], hi: [f64; 2], eps: f64) -> Poly {
    let x = gens[i].nucleus;
    let mut poly = Poly::from_box([lo[0] - x[0], lo[1] - x[1]], [hi[0] - x[0], hi[1] - x[1]]);
    let u2 = gens[i].weight * gens[i].weight;
    let w_max = gens.iter().map(|g| g.weight).fold(0.0, f64::max);
    let mut reach = f64::INFINITY;
    for (idx, h) in constraints.iter().enumerate() {
        if poly.pts.is_empty() {
            break;
        }
        // Constraints are sorted by nucleus distance d = |c|/2. Once
        // (d - R)^2 - w_max^2 exceeds max ρ_i over the polygon, no later
        // generator can cut it.
        if idx % 8 == 0 {
            reach = poly.pts.iter().map(|p| norm2(*p)).fold(0.0, f64::max);
        }
        let d = norm2(h.c) / 2.0;
        if d > reach && (d - reach) * (d - reach) - reach * reach > (w_max * w_max - u2) + eps {
            break;
        }
        poly.clip(h, eps);
    }
    poly
}

/// Whether the cell's edges leaving the box extend to infinity without
/// meeting another constraint.
fn rays_escape(poly: &Poly, constraints: &[Line]) -> bool {
    let n = poly.pts.len();
    for k in 0..n {
        let prev = (k + n - 1) % n;
        let (lp, lk) = (&poly.lines[prev], &poly.lines[k]);
        let dir = match (lp.support, lk.support) {
            (EdgeSupport::Neighbor(_), EdgeSupport::Bbox(_)) => sub2(poly.pts[k], poly.pts[prev]),
            (EdgeSupport::Bbox(_), EdgeSupport::Neighbor(_)) => sub2(poly.pts[k], poly.pts[(k + 1) % n]),
            _ => continue,
        };
        let own = if matches!(lp.support, EdgeSupport::Neighbor(_)) { lp } else { lk };
        // exact direction of the supporting line, oriented like `dir`
        let mut t = [-own.c[1], own.c[0]];
        if dot2(t, dir) < 0.0 {
            t = [-t[0], -t[1]];
        }
        let tn = norm2(t);
        for h in constraints {
            if h.support == own.support {
                continue;
            }
            if dot2(h.c, t) > 1e-12 * norm2(h.c) * tn {
                return false;
            }
        }
    }
    true
}

fn build_cell(gens: &[Generator], i: usize, lo: [f64; 2], hi: [f64; 2], eps: f64) -> (Cell, bool) {
    let constraints = local_constraints(gens, i);
    let poly = clip_cell(gens, i, &constraints, lo, hi, eps);
    let x = gens[i].nucleus;
    if poly.pts.is_empty() {
        let c = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
        let r = FAR_FACTOR * ((hi[0] - lo[0]).max(hi[1] - lo[1]) + norm2(sub2(c, x)));
        let far = clip_cell(gens, i, &constraints, [c[0] - r, c[1] - r], [c[0] + r, c[1] + r], eps);
        return (if far.pts.is_empty() { Cell::Empty } else { Cell::OutsideBbox }, false);
    }
    let all_box = poly.lines.iter().all(|l| matches!(l.support, EdgeSupport::Bbox(_)));
    let complete = !all_box && rays_escape(&poly, &constraints);
    let vertices = poly.pts.iter().map(|p| [p[0] + x[0], p[1] + x[1]]).collect();
    let edges = poly.lines.iter().map(|l| l.support).collect();
    (Cell::Polygon(CellPolygon { vertices, edges, complete }), all_box)
}

/// Length scale of a generator set inside a box.
fn scale_of(gens: &[Generator], lo: [f64; 2], hi: [f64; 2]) -> f64 {
    let mut s = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    for g in gens {
        s = s.max(g.weight).max(g.nucleus[0].abs()).max(g.nucleus[1].abs());
    }
    s.max(1e-300)
}

/// Build the Laguerre diagram of `gamma` clipped to `bbox`.
pub fn build_diagram(gamma: &Configuration, bbox: &Window) -> Result<LaguerreDiagram, LaguerreError> {
    let gens = generators_of(gamma)?;
    build_from_generators(gens, bbox)
}

pub fn build_from_generators(gens: Vec<Generator>, bbox: &Window) -> Result<LaguerreDiagram, LaguerreError> {
    let (lo3, hi3) = match bbox {
        Window::Box { dim: 2, lower, upper } if lower[0] < upper[0] && lower[1] < upper[1] => (*lower, *upper),
        _ => return Err(LaguerreError::BadBbox),
    };
    let (lo, hi) = ([lo3[0], lo3[1]], [hi3[0], hi3[1]]);
    if gens.iter().any(|g| g.nucleus[0] < lo[0] || g.nucleus[0] > hi[0] || g.nucleus[1] < lo[1] || g.nucleus[1] > hi[1])
    {
        return Err(LaguerreError::BadBbox);
    }
    for i in 1..gens.len() {
        for j in 0..i {
            if gens[i].nucleus == gens[j].nucleus {
                return Err(LaguerreError::CoincidentNuclei(j, i));
            }
        }
    }
    let eps = REL_TOLERANCE * scale_of(&gens, lo, hi);
    let built: Vec<(Cell, bool)> = (0..gens.len()).map(|i| build_cell(&gens, i, lo, hi, eps)).collect();
    let others_empty = |i: usize| built.iter().enumerate().all(|(j, c)| j == i || matches!(c.0, Cell::Empty));
    let mut cells = Vec::with_capacity(gens.len());
    for (i, (cell, all_box)) in built.iter().enumerate() {
        let mut cell = cell.clone();
        if *all_box {
            // the box lies inside this cell; it has no vertex iff it is the only nonempty cell
            if let Cell::Polygon(p) = &mut cell {
                p.complete = others_empty(i);
            }
        }
        cells.push(cell);
    }
    Ok(assemble(gens, (lo, hi), cells, eps))
}

fn assemble(gens: Vec<Generator>, bbox: ([f64; 2], [f64; 2]), cells: Vec<Cell>, eps: f64) -> LaguerreDiagram {
    let n = gens.len();
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut raw: Vec<([f64; 2], [usize; 3])> = Vec::new();
    let mut edge_map: BTreeMap<(usize, usize), DiagramEdge> = BTreeMap::new();
    for (i, cell) in cells.iter().enumerate() {
        let Some(p) = cell.polygon() else { continue };
        let m = p.edges.len();
        for k in 0..m {
            let prev = (k + m - 1) % m;
            if let (EdgeSupport::Neighbor(a), EdgeSupport::Neighbor(b)) = (p.edges[prev], p.edges[k]) {
                raw.push((p.vertices[k], [i, a, b]));
            }
            if let EdgeSupport::Neighbor(j) = p.edges[k] {
                neighbors[i].push(j);
                neighbors[j].push(i);
                let bounded = matches!(p.edges[prev], EdgeSupport::Neighbor(_))
                    && matches!(p.edges[(k + 1) % m], EdgeSupport::Neighbor(_));
                let key = (i.min(j), i.max(j));
                let e = edge_map.entry(key).or_insert(DiagramEdge {
                    cells: key,
                    endpoints: [p.vertices[k], p.vertices[(k + 1) % m]],
                    bounded,
                    seen_from: 0,
                });
                e.seen_from += 1;
                e.bounded &= bounded;
            }
        }
    }
    for nb in &mut neighbors {
        nb.sort_unstable();
        nb.dedup();
    }
    let vertices = cluster_vertices(raw, eps);
    LaguerreDiagram {
        generators: gens,
        bbox,
        cells,
        neighbors,
        vertices,
        edges: edge_map.into_values().collect(),
        tolerance: eps,
    }
}

fn cluster_vertices(mut raw: Vec<([f64; 2], [usize; 3])>, eps: f64) -> Vec<DiagramVertex> {
    raw.sort_by(|a, b| a.0[0].total_cmp(&b.0[0]).then(a.0[1].total_cmp(&b.0[1])));
    let n = raw.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let tol = 8.0 * eps;
    for i in 0..n {
        let mut j = i + 1;
        while j < n && raw[j].0[0] - raw[i].0[0] <= tol {
            if (raw[j].0[1] - raw[i].0[1]).abs() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b] = a;
                }
            }
            j += 1;
        }
    }
    let mut groups: BTreeMap<usize, (Vec<[f64; 2]>, Vec<usize>)> = BTreeMap::new();
    for (i, (v, cells)) in raw.iter().enumerate() {
        let r = find(&mut parent, i);
        let g = groups.entry(r).or_default();
        g.0.push(*v);
        g.1.extend_from_slice(cells);
    }
    groups
        .into_values()
        .map(|(pts, mut cells)| {
            cells.sort_unstable();
            cells.dedup();
            let k = pts.len() as f64;
            let point = [pts.iter().map(|p| p[0]).sum::<f64>() / k, pts.iter().map(|p| p[1]).sum::<f64>() / k];
            DiagramVertex { point, cells }
        })
        .collect()
}

/// General position: (GP1) no three collinear nuclei, (GP2) no four
/// generators with a common power-equidistant point.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralPosition {
    pub gp1: bool,
    pub gp2: bool,
    /// Up to [`MAX_WITNESSES`] failing triples / quadruples.
    pub gp1_witnesses: Vec<[usize; 3]>,
    pub gp2_witnesses: Vec<[usize; 4]>,
}

pub const MAX_WITNESSES: usize = 16;

pub fn check_general_position_gens(g: &[Generator]) -> GeneralPosition {
    let n = g.len();
    let mut w1 = Vec::new();
    let mut w2 = Vec::new();
    let (mut gp1, mut gp2) = (true, true);
    let col = |a: usize, b: usize, c: usize| orient2d(g[a].nucleus, g[b].nucleus, g[c].nucleus) == Ordering::Equal;
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if col(a, b, c) {
                    gp1 = false;
                    if w1.len() < MAX_WITNESSES {
                        w1.push([a, b, c]);
                    }
                }
                for d in c + 1..n {
                    let lift = |i: usize| [g[i].nucleus[0], g[i].nucleus[1], g[i].weight];
                    if lifted_orient([lift(a), lift(b), lift(c), lift(d)]) == Ordering::Equal
                        && !(col(a, b, c) && col(a, b, d))
                    {
                        gp2 = false;
                        if w2.len() < MAX_WITNESSES {
                            w2.push([a, b, c, d]);
                        }
                    }
                }
            }
        }
    }
    GeneralPosition { gp1, gp2, gp1_witnesses: w1, gp2_witnesses: w2 }
}

pub fn check_general_position(gamma: &Configuration) -> Result<GeneralPosition, LaguerreError> {
    Ok(check_general_position_gens(&generators_of(gamma)?))
}

/// Convex hull of points (counter-clockwise, collinear points dropped).
pub fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut p: Vec<[f64; 2]> = points.to_vec();
    p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: alloc::boxed::Box<dyn Iterator<Item = &[f64; 2]>> =
            if pass == 0 { alloc::boxed::Box::new(p.iter()) } else { alloc::boxed::Box::new(p.iter().rev()) };
        for &q in iter {
            while hull.len() >= start + 2 && orient2d(hull[hull.len() - 2], hull[hull.len() - 1], q) != Ordering::Greater
            {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    hull
}

/// Window-relative (R2): whether the convex hull of the nuclei contains
/// `region`. With `region = None` (the whole plane) a finite set never does.
pub fn check_r2(gamma: &Configuration, region: Option<&Window>) -> bool {
    let Some(region) = region else { return false };
    let pts: Vec<[f64; 2]> = gamma.iter().map(|p| [p.loc[0], p.loc[1]]).collect();
    let hull = convex_hull(&pts);
    if hull.len() < 3 {
        return false;
    }
    let inside_margin = |z: [f64; 2], r: f64| {
        (0..hull.len()).all(|k| {
            let a = hull[k];
            let b = hull[(k + 1) % hull.len()];
            let e = sub2(b, a);
            cross2(e, sub2(z, a)) / norm2(e) >= r
        })
    };
    match region {
        Window::Box { lower, upper, .. } => {
            [[lower[0], lower[1]], [upper[0], lower[1]], [upper[0], upper[1]], [lower[0], upper[1]]]
                .iter()
                .all(|&c| inside_margin(c, 0.0))
        }
        Window::Ball { center, radius, .. } => inside_margin([center[0], center[1]], *radius),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalityReport {
    pub normal: bool,
    /// Number of incident cells → number of vertices.
    pub vertex_degree_histogram: BTreeMap<usize, usize>,
    /// Edges carried by only one of their two cells.
    pub inconsistent_edges: usize,
}

/// Every vertex lies on exactly three cells and every edge on exactly two.
pub fn is_normal(dia: &LaguerreDiagram) -> NormalityReport {
    let mut hist = BTreeMap::new();
    for v in &dia.vertices {
        *hist.entry(v.cells.len()).or_insert(0) += 1;
    }
    let inconsistent = dia.edges.iter().filter(|e| e.seen_from != 2).count();
    let normal = hist.keys().all(|&k| k == 3) && inconsistent == 0;
    NormalityReport { normal, vertex_degree_histogram: hist, inconsistent_edges: inconsistent }
}

/// `|Δ_0(x_i, γ)|` for a bounded cell inside the box.
pub fn vertex_count(dia: &LaguerreDiagram, i: usize) -> Result<usize, LaguerreError> {
    match dia.cells.get(i) {
        None => Err(LaguerreError::Index(i)),
        Some(Cell::Empty) | Some(Cell::OutsideBbox) => Err(LaguerreError::EmptyCell(i)),
        Some(Cell::Polygon(p)) if p.clipped() => Err(LaguerreError::ClippedCell(i)),
        Some(Cell::Polygon(p)) => Ok(p.vertices.len()),
    }
}

/// `ρ(z, (y, |y| - l)) - l^2`, positive when `|z| < l/2` and `|y| > 2l + 1`.
pub fn far_power_margin(l: f64, z: [f64; 2], y: [f64; 2]) -> f64 {
    let g = Generator { nucleus: y, weight: norm2(y) - l };
    power_distance(z, &g) - l * l
}

/// Randomised check: for `z ∈ U(0, l/2)` and `|y| > 2l + 1`,
/// `ρ(z, (y, |y| - l)) > l^2 >= (l/2 + |z|)^2`. Includes the boundary probe
/// `z = 0`, `|y| = 2l + 1 + 1e-9`, where the margin must be at least `l`.
pub fn verify_far_power_bound(l: u64, trials: usize, seed: u64) -> bool {
    assert!(l >= 1);
    let lf = l as f64;
    let probe = far_power_margin(lf, [0.0, 0.0], [2.0 * lf + 1.0 + 1e-9, 0.0]);
    if !(probe >= lf) {
        return false;
    }
    let mut rng = CounterRng::new(seed, 0);
    for _ in 0..trials {
        let r = lf / 2.0 * libm::sqrt(rng.uniform());
        let a = 2.0 * core::f64::consts::PI * rng.uniform();
        let z = [r * libm::cos(a), r * libm::sin(a)];
        let ry = rng.uniform_in(2.0 * lf + 1.0, 10.0 * lf);
        let b = 2.0 * core::f64::consts::PI * rng.uniform();
        let y = [ry * libm::cos(b), ry * libm::sin(b)];
        let sup = (lf / 2.0 + norm2(z)) * (lf / 2.0 + norm2(z));
        if !(far_power_margin(lf, z, y) > 0.0 && lf * lf >= sup) {
            return false;
        }
    }
    true
}
