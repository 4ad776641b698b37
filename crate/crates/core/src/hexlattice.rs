//! Honeycomb lattice on a k×k torus and on finite windows.
//!
//! Faces are indexed by `(n, m)`, the face being centered at `n + m·ω` with
//! `ω = e^{iπ/3}`. Each unit cell carries one white and one black vertex:
//!
//! | vertex   | position                    |
//! |----------|-----------------------------|
//! | W(n, m)  | center(n, m) + e^{iπ/6}/√3  |
//! | B(n, m)  | center(n, m) + i/√3         |
//!
//! Edges are named by the cell of their white endpoint:
//!
//! | edge     | black endpoint | w − b            |
//! |----------|----------------|------------------|
//! | A(n, m)  | B(n+1, m−1)    | i/√3             |
//! | B(n, m)  | B(n+1, m)      | e^{7iπ/6}/√3     |
//! | C(n, m)  | B(n, m)        | e^{−iπ/6}/√3     |
//!
//! The boundary of face f is listed counter-clockwise starting from the edge
//! between its 30° and 90° corners:
//! `[C(f), B(f−(1,0)), A(f−(1,0)), C(f−(0,1)), B(f−(0,1)), A(f)]`.
//! Slot `i` separates f from `f + FACE_STEPS[i]`.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = Complex64;

pub const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Face offsets across boundary slots 0..6.
pub const FACE_STEPS: [(i32, i32); 6] = [(0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1), (1, 0)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FaceCoord {
    pub n: i32,
    pub m: i32,
}

impl FaceCoord {
    pub const fn new(n: i32, m: i32) -> Self {
        FaceCoord { n, m }
    }

    pub fn offset(self, dn: i32, dm: i32) -> Self {
        FaceCoord::new(self.n + dn, self.m + dm)
    }

    pub fn step(self, slot: usize) -> Self {
        let (dn, dm) = FACE_STEPS[slot];
        self.offset(dn, dm)
    }

    pub fn center(self) -> Point {
        cell_point(self.n as f64, self.m as f64)
    }

    pub fn reduce(self, k: usize) -> Self {
        let k = k as i32;
        FaceCoord::new(self.n.rem_euclid(k), self.m.rem_euclid(k))
    }

    pub fn boundary(self) -> [EdgeId; 6] {
        let (n, m) = (self.n, self.m);
        [
            EdgeId::new(n, m, EdgeType::C),
            EdgeId::new(n - 1, m, EdgeType::B),
            EdgeId::new(n - 1, m, EdgeType::A),
            EdgeId::new(n, m - 1, EdgeType::C),
            EdgeId::new(n, m - 1, EdgeType::B),
            EdgeId::new(n, m, EdgeType::A),
        ]
    }

    /// Corners counter-clockwise from 30°; slot `i` joins corners `i` and `i+1`.
    pub fn corners(self) -> [VertexId; 6] {
        let (n, m) = (self.n, self.m);
        [
            VertexId::white(n, m),
            VertexId::black(n, m),
            VertexId::white(n - 1, m),
            VertexId::black(n, m - 1),
            VertexId::white(n, m - 1),
            VertexId::black(n + 1, m - 1),
        ]
    }
}

impl fmt::Display for FaceCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.n, self.m)
    }
}

/// Plane point `n + m·ω`.
pub fn cell_point(n: f64, m: f64) -> Point {
    Point::new(n + 0.5 * m, m * SQRT3 / 2.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    White,
    Black,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId {
    pub cell: FaceCoord,
    pub color: Color,
}

impl VertexId {
    pub const fn white(n: i32, m: i32) -> Self {
        VertexId { cell: FaceCoord::new(n, m), color: Color::White }
    }

    pub const fn black(n: i32, m: i32) -> Self {
        VertexId { cell: FaceCoord::new(n, m), color: Color::Black }
    }

    pub fn position(self) -> Point {
        let c = self.cell.center();
        match self.color {
            Color::White => c + Point::new(0.5, SQRT3 / 6.0),
            Color::Black => c + Point::new(0.0, 1.0 / SQRT3),
        }
    }

    /// The three incident edges, in etype order A, B, C.
    pub fn edges(self) -> [EdgeId; 3] {
        let (n, m) = (self.cell.n, self.cell.m);
        match self.color {
            Color::White => [
                EdgeId::new(n, m, EdgeType::A),
                EdgeId::new(n, m, EdgeType::B),
                EdgeId::new(n, m, EdgeType::C),
            ],
            Color::Black => [
                EdgeId::new(n - 1, m + 1, EdgeType::A),
                EdgeId::new(n - 1, m, EdgeType::B),
                EdgeId::new(n, m, EdgeType::C),
            ],
        }
    }

    pub fn reduce(self, k: usize) -> Self {
        VertexId { cell: self.cell.reduce(k), color: self.color }
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = if self.color == Color::White { 'W' } else { 'B' };
        write!(f, "{}{}", c, self.cell)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeType {
    A,
    B,
    C,
}

impl EdgeType {
    pub const ALL: [EdgeType; 3] = [EdgeType::A, EdgeType::B, EdgeType::C];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> EdgeType {
        EdgeType::ALL[i]
    }

    /// Cell offset from the white endpoint to the black endpoint.
    pub fn black_offset(self) -> (i32, i32) {
        match self {
            EdgeType::A => (1, -1),
            EdgeType::B => (1, 0),
            EdgeType::C => (0, 0),
        }
    }

    /// Vector from the white endpoint to the black endpoint.
    pub fn vector(self) -> Point {
        match self {
            EdgeType::A => Point::new(0.0, -1.0 / SQRT3),
            EdgeType::B => Point::new(0.5, SQRT3 / 6.0),
            EdgeType::C => Point::new(-0.5, SQRT3 / 6.0),
        }
    }
}

impl fmt::Display for EdgeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EdgeType::A => "A",
            EdgeType::B => "B",
            EdgeType::C => "C",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId {
    pub cell: FaceCoord,
    pub etype: EdgeType,
}

impl EdgeId {
    pub const fn new(n: i32, m: i32, etype: EdgeType) -> Self {
        EdgeId { cell: FaceCoord::new(n, m), etype }
    }

    pub fn white(self) -> VertexId {
        VertexId { cell: self.cell, color: Color::White }
    }

    pub fn black(self) -> VertexId {
        let (dn, dm) = self.etype.black_offset();
        VertexId { cell: self.cell.offset(dn, dm), color: Color::Black }
    }

    /// The two faces separated by this edge.
    pub fn faces(self) -> [FaceCoord; 2] {
        let c = self.cell;
        match self.etype {
            EdgeType::A => [c, c.offset(1, 0)],
            EdgeType::B => [c.offset(1, 0), c.offset(0, 1)],
            EdgeType::C => [c, c.offset(0, 1)],
        }
    }

    pub fn reduce(self, k: usize) -> Self {
        EdgeId { cell: self.cell.reduce(k), etype: self.etype }
    }

    pub fn midpoint(self) -> Point {
        self.white().position() + self.etype.vector() * 0.5
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.etype, self.cell)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Torus { k: usize },
    Window,
}

/// Incidence tables for a torus or a window.
///
/// On a window, `faces` holds the window faces followed by the ring of
/// exterior faces that share an edge with them; only window faces are
/// flippable. `vertices` likewise holds the window vertices followed by the
/// outer endpoints of boundary edges.
#[derive(Clone, Debug)]
pub struct Lattice {
    shape: Shape,
    vertices: Vec<VertexId>,
    vertex_interior: Vec<bool>,
    vertex_edges: Vec<Vec<usize>>,
    edges: Vec<EdgeId>,
    edge_ends: Vec<[usize; 2]>,
    edge_faces: Vec<[Option<usize>; 2]>,
    faces: Vec<FaceCoord>,
    face_interior: Vec<bool>,
    face_edges: Vec<[Option<usize>; 6]>,
    face_adj: Vec<[Option<usize>; 6]>,
    boundary: Vec<usize>,
    n_interior_faces: usize,
    face_lookup: HashMap<FaceCoord, usize>,
    edge_lookup: HashMap<EdgeId, usize>,
    vertex_lookup: HashMap<VertexId, usize>,
}

impl Lattice {
    pub fn torus(k: usize) -> Result<Lattice> {
        if k == 0 {
            return Err(Error::InvalidParameter("torus size k must be at least 1".into()));
        }
        if k > 4096 {
            return Err(Error::InvalidParameter(format!("torus size k = {k} is too large")));
        }
        let ki = k as i32;
        let cells = k * k;
        let cell_of = |c: FaceCoord| -> usize {
            let r = c.reduce(k);
            (r.m as usize) * k + r.n as usize
        };
        let mut faces = Vec::with_capacity(cells);
        let mut vertices = Vec::with_capacity(2 * cells);
        let mut edges = Vec::with_capacity(3 * cells);
        for m in 0..ki {
            for n in 0..ki {
                faces.push(FaceCoord::new(n, m));
                vertices.push(VertexId::white(n, m));
                vertices.push(VertexId::black(n, m));
                for t in EdgeType::ALL {
                    edges.push(EdgeId::new(n, m, t));
                }
            }
        }
        let vidx = |v: VertexId| 2 * cell_of(v.cell) + (v.color == Color::Black) as usize;
        let eidx = |e: EdgeId| 3 * cell_of(e.cell) + e.etype.index();
        let edge_ends = edges.iter().map(|e| [vidx(e.white()), vidx(e.black())]).collect();
        let edge_faces = edges
            .iter()
            .map(|e| {
                let [f, g] = e.faces();
                [Some(cell_of(f)), Some(cell_of(g))]
            })
            .collect();
        let vertex_edges = vertices.iter().map(|v| v.edges().iter().map(|&e| eidx(e)).collect()).collect();
        let face_edges = faces.iter().map(|f| f.boundary().map(|e| Some(eidx(e)))).collect();
        let face_adj = faces
            .iter()
            .map(|f| {
                let mut a = [None; 6];
                for (s, slot) in a.iter_mut().enumerate() {
                    *slot = Some(cell_of(f.step(s)));
                }
                a
            })
            .collect();
        Ok(Lattice {
            shape: Shape::Torus { k },
            vertex_interior: vec![true; vertices.len()],
            vertices,
            vertex_edges,
            edges,
            edge_ends,
            edge_faces,
            face_interior: vec![true; faces.len()],
            faces,
            face_edges,
            face_adj,
            boundary: Vec::new(),
            n_interior_faces: cells,
            face_lookup: HashMap::new(),
            edge_lookup: HashMap::new(),
            vertex_lookup: HashMap::new(),
        })
    }

    /// Window spanned by a dual-connected face set.
    pub fn window(face_set: &[FaceCoord]) -> Result<Lattice> {
        let fw: BTreeSet<FaceCoord> = face_set.iter().copied().collect();
        if fw.is_empty() {
            return Err(Error::InvalidParameter("window face set is empty".into()));
        }
        let first = *fw.iter().next().unwrap();
        let mut seen = BTreeSet::from([first]);
        let mut queue = VecDeque::from([first]);
        while let Some(f) = queue.pop_front() {
            for s in 0..6 {
                let g = f.step(s);
                if fw.contains(&g) && seen.insert(g) {
                    queue.push_back(g);
                }
            }
        }
        if seen.len() != fw.len() {
            return Err(Error::InvalidParameter("window faces are not dual-connected".into()));
        }

        let inner_vertices: BTreeSet<VertexId> = fw.iter().flat_map(|f| f.corners()).collect();
        let mut inner_edges = BTreeSet::new();
        let mut boundary_edges = BTreeSet::new();
        let mut outer_vertices = BTreeSet::new();
        for v in &inner_vertices {
            for e in v.edges() {
                let (a, b) = (inner_vertices.contains(&e.white()), inner_vertices.contains(&e.black()));
                if a && b {
                    inner_edges.insert(e);
                } else {
                    boundary_edges.insert(e);
                    outer_vertices.insert(if a { e.black() } else { e.white() });
                }
            }
        }
        let mut ring = BTreeSet::new();
        for e in inner_edges.iter().chain(boundary_edges.iter()) {
            for f in e.faces() {
                if !fw.contains(&f) {
                    ring.insert(f);
                }
            }
        }

        let faces: Vec<FaceCoord> = fw.iter().chain(ring.iter()).copied().collect();
        let vertices: Vec<VertexId> = inner_vertices.iter().chain(outer_vertices.iter()).copied().collect();
        let edges: Vec<EdgeId> = inner_edges.iter().chain(boundary_edges.iter()).copied().collect();
        let face_lookup: HashMap<FaceCoord, usize> = faces.iter().enumerate().map(|(i, &f)| (f, i)).collect();
        let vertex_lookup: HashMap<VertexId, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let edge_lookup: HashMap<EdgeId, usize> = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();

        let edge_ends = edges.iter().map(|e| [vertex_lookup[&e.white()], vertex_lookup[&e.black()]]).collect();
        let edge_faces = edges.iter().map(|e| e.faces().map(|f| face_lookup.get(&f).copied())).collect();
        let vertex_edges = vertices
            .iter()
            .map(|v| v.edges().iter().filter_map(|e| edge_lookup.get(e).copied()).collect())
            .collect();
        let face_edges = faces.iter().map(|f| f.boundary().map(|e| edge_lookup.get(&e).copied())).collect();
        let face_adj = faces
            .iter()
            .map(|f| {
                let mut a = [None; 6];
                for (s, slot) in a.iter_mut().enumerate() {
                    *slot = face_lookup.get(&f.step(s)).copied();
                }
                a
            })
            .collect();
        let n_in = fw.len();
        let n_vin = inner_vertices.len();
        let n_ein = inner_edges.len();
        Ok(Lattice {
            shape: Shape::Window,
            vertex_interior: (0..vertices.len()).map(|i| i < n_vin).collect(),
            vertices,
            vertex_edges,
            edges,
            edge_ends,
            edge_faces,
            face_interior: (0..faces.len()).map(|i| i < n_in).collect(),
            faces,
            face_edges,
            face_adj,
            boundary: (n_ein..n_ein + boundary_edges.len()).collect(),
            n_interior_faces: n_in,
            face_lookup,
            edge_lookup,
            vertex_lookup,
        })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// Torus size, `None` on a window.
    pub fn k(&self) -> Option<usize> {
        match self.shape {
            Shape::Torus { k } => Some(k),
            Shape::Window => None,
        }
    }

    pub fn is_torus(&self) -> bool {
        matches!(self.shape, Shape::Torus { .. })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    /// Window faces (all faces on a torus); these come first in face order.
    pub fn num_interior_faces(&self) -> usize {
        self.n_interior_faces
    }

    pub fn vertex(&self, v: usize) -> VertexId {
        self.vertices[v]
    }

    pub fn vertex_is_interior(&self, v: usize) -> bool {
        self.vertex_interior[v]
    }

    pub fn vertex_edges(&self, v: usize) -> &[usize] {
        &self.vertex_edges[v]
    }

    pub fn edge(&self, e: usize) -> EdgeId {
        self.edges[e]
    }

    /// `[white, black]` vertex indices.
    pub fn edge_ends(&self, e: usize) -> [usize; 2] {
        self.edge_ends[e]
    }

    pub fn edge_faces(&self, e: usize) -> [Option<usize>; 2] {
        self.edge_faces[e]
    }

    pub fn face(&self, f: usize) -> FaceCoord {
        self.faces[f]
    }

    pub fn face_is_interior(&self, f: usize) -> bool {
        self.face_interior[f]
    }

    pub fn face_edges(&self, f: usize) -> [Option<usize>; 6] {
        self.face_edges[f]
    }

    pub fn face_adj(&self, f: usize) -> [Option<usize>; 6] {
        self.face_adj[f]
    }

    /// Boundary edges of a window (one endpoint outside the window).
    pub fn boundary_edges(&self) -> &[usize] {
        &self.boundary
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        let [w, b] = self.edge_ends[e];
        self.vertex_interior[w] != self.vertex_interior[b]
    }

    pub fn face_index(&self, f: FaceCoord) -> Option<usize> {
        match self.shape {
            Shape::Torus { k } => {
                let r = f.reduce(k);
                Some(r.m as usize * k + r.n as usize)
            }
            Shape::Window => self.face_lookup.get(&f).copied(),
        }
    }

    pub fn edge_index(&self, e: EdgeId) -> Option<usize> {
        match self.shape {
            Shape::Torus { k } => {
                let r = e.cell.reduce(k);
                Some(3 * (r.m as usize * k + r.n as usize) + e.etype.index())
            }
            Shape::Window => self.edge_lookup.get(&e).copied(),
        }
    }

    pub fn vertex_index(&self, v: VertexId) -> Option<usize> {
        match self.shape {
            Shape::Torus { k } => {
                let r = v.cell.reduce(k);
                Some(2 * (r.m as usize * k + r.n as usize) + (v.color == Color::Black) as usize)
            }
            Shape::Window => self.vertex_lookup.get(&v).copied(),
        }
    }

    /// The two faces whose boundaries contain `e`.
    pub fn dual_edge(&self, e: usize) -> (FaceCoord, FaceCoord) {
        let [f, g] = self.edges[e].faces();
        match self.shape {
            Shape::Torus { k } => (f.reduce(k), g.reduce(k)),
            Shape::Window => (f, g),
        }
    }

    /// The face across slot `s` of `f`, together with the edge crossed.
    pub fn neighbor(&self, f: usize, s: usize) -> Option<(usize, usize)> {
        Some((self.face_adj[f][s]?, self.face_edges[f][s]?))
    }

    /// Displacement `to − from`, taken as the minimal image on a torus.
    pub fn displacement(&self, from: Point, to: Point) -> Point {
        let d = to - from;
        match self.shape {
            Shape::Window => d,
            Shape::Torus { k } => min_image(d, k),
        }
    }

    pub fn distance(&self, a: Point, b: Point) -> f64 {
        self.displacement(a, b).norm()
    }

    /// Face indices in `B(center, r)`: faces whose open hexagon meets the disc.
    pub fn faces_in_ball(&self, center: Point, r: f64) -> Vec<usize> {
        (0..self.num_faces())
            .filter(|&f| hexagon_distance(self.displacement(self.faces[f].center(), center)) < r)
            .collect()
    }

    /// Distance from `p` to the closed segment of edge `e`.
    pub fn edge_distance(&self, p: Point, e: usize) -> f64 {
        let id = self.edges[e];
        let w = p + self.displacement(p, id.white().position());
        segment_distance(p, w, w + id.etype.vector())
    }
}

/// Minimal-image reduction of a displacement on the k×k torus.
pub fn min_image(d: Point, k: usize) -> Point {
    let kf = k as f64;
    let m = d.im / (SQRT3 / 2.0);
    let n = d.re - 0.5 * m;
    let base = d - cell_point((n / kf).round() * kf, (m / kf).round() * kf);
    let mut best = base;
    for a in -1..=1 {
        for b in -1..=1 {
            let c = base - cell_point(a as f64 * kf, b as f64 * kf);
            if c.norm_sqr() < best.norm_sqr() - 1e-12 {
                best = c;
            }
        }
    }
    best
}

pub fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let t = ((p - a).re * ab.re + (p - a).im * ab.im) / ab.norm_sqr();
    let t = t.clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Distance from the origin to a unit hexagon centered at `c` (0 inside).
pub fn hexagon_distance(c: Point) -> f64 {
    let corner = |i: usize| {
        let a = std::f64::consts::PI / 6.0 + i as f64 * std::f64::consts::PI / 3.0;
        c + Point::from_polar(1.0 / SQRT3, a)
    };
    let origin = Point::new(0.0, 0.0);
    let inside = (0..6).all(|i| {
        let (a, b) = (corner(i), corner((i + 1) % 6));
        let cross = (b - a).re * (origin - a).im - (b - a).im * (origin - a).re;
        cross > 0.0
    });
    if inside {
        return 0.0;
    }
    (0..6).map(|i| segment_distance(origin, corner(i), corner((i + 1) % 6))).fold(f64::INFINITY, f64::min)
}
