//! Crossing paths on windows: dual paths, path swapping and ungluing.

use std::collections::{BTreeSet, VecDeque};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hexlattice::{Color, FaceCoord, Lattice, Point, SQRT3};
use crate::matching::{EdgeConfig, EdgeSet, LoopConfig};
use crate::topology::{event_l, event_p, strands_of, LoopSet, Strand};

/// Faces of the √3 × √3 sublattice whose boundaries form the all-hexagon
/// loop configuration.
pub fn is_h0(f: FaceCoord) -> bool {
    (f.n - f.m).rem_euclid(3) == 0
}

/// The unique face of the sublattice among the three faces at each corner of `f`.
fn h0_faces_at_corners(f: FaceCoord) -> Vec<FaceCoord> {
    let mut out = Vec::new();
    for s in 0..6 {
        // corner i is shared by f, f.step(i-1) and f.step(i)
        for g in [f, f.step(s), f.step((s + 5) % 6)] {
            if is_h0(g) && !out.contains(&g) {
                out.push(g);
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct CrossingConfig {
    w: LoopConfig,
    center: FaceCoord,
    paths: Vec<Strand>,
    loops: Vec<Strand>,
}

impl CrossingConfig {
    pub fn new(w: LoopConfig, center: FaceCoord) -> Result<Self> {
        let lat = w.lattice().clone();
        if lat.is_torus() {
            return Err(Error::InvalidParameter("crossing configurations live on windows".into()));
        }
        w.validate()?;
        let fi = lat.face_index(center).ok_or_else(|| Error::InvalidParameter(format!("center {center} outside window")))?;
        if !lat.face_is_interior(fi) {
            return Err(Error::InvalidParameter(format!("center {center} is not a window face")));
        }
        let set = strands_of(&lat, w.edges());
        let (paths, loops): (Vec<Strand>, Vec<Strand>) = set.strands.into_iter().partition(|s| !s.closed);
        Ok(CrossingConfig { w, center, paths, loops })
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        self.w.lattice()
    }

    pub fn loop_config(&self) -> &LoopConfig {
        &self.w
    }

    pub fn edges(&self) -> &EdgeSet {
        self.w.edges()
    }

    pub fn center(&self) -> FaceCoord {
        self.center
    }

    pub fn center_point(&self) -> Point {
        self.center.center()
    }

    pub fn paths(&self) -> &[Strand] {
        &self.paths
    }

    pub fn loops(&self) -> &[Strand] {
        &self.loops
    }

    pub fn loop_set(&self) -> LoopSet {
        LoopSet { strands: self.paths.iter().chain(self.loops.iter()).cloned().collect() }
    }

    /// Boundary edges at the two ends of path `i`, smaller index first.
    pub fn endpoints(&self, i: usize) -> (usize, usize) {
        endpoints_of(&self.paths[i])
    }

    pub fn endpoint_pairs(&self) -> BTreeSet<(usize, usize)> {
        self.paths.iter().map(endpoints_of).collect()
    }

    pub fn path_with_endpoints(&self, ends: (usize, usize)) -> Option<usize> {
        self.paths.iter().position(|p| endpoints_of(p) == ends)
    }

    pub fn with_edges(&self, edges: EdgeSet) -> Result<Self> {
        CrossingConfig::new(LoopConfig::new(self.lattice().clone(), edges)?, self.center)
    }

    pub fn flip(&self, f: usize) -> Result<Self> {
        CrossingConfig::new(self.w.flip(f), self.center)
    }

    pub fn with_center(&self, center: FaceCoord) -> Result<Self> {
        CrossingConfig::new(self.w.clone(), center)
    }

    /// The flippable window face closest to the current center.
    pub fn nearest_flippable(&self) -> Option<FaceCoord> {
        let lat = self.lattice();
        let p = self.center_point();
        (0..lat.num_interior_faces())
            .filter(|&f| self.w.is_flippable(f))
            .map(|f| lat.face(f))
            .min_by(|a, b| (a.center() - p).norm().total_cmp(&(b.center() - p).norm()).then(a.cmp(b)))
    }
}

fn endpoints_of(s: &Strand) -> (usize, usize) {
    let (a, b) = (s.edges[0], *s.edges.last().unwrap());
    (a.min(b), a.max(b))
}

#[derive(Clone, Debug, Serialize)]
pub struct WindowSpec {
    /// Horizontal extent in face widths.
    pub width: usize,
    /// Number of face rows.
    pub height: usize,
    pub n_paths: usize,
    /// Attempted random flips per window face after seeding.
    pub flips_per_face: f64,
    /// Rings `[a, b]` of face-center distance from the center face where no
    /// flips are made; a ring of width above 3.6 keeps loops from crossing it.
    pub frozen: Vec<(f64, f64)>,
    pub seed: u64,
}

impl WindowSpec {
    pub fn new(width: usize, height: usize, n_paths: usize, seed: u64) -> Self {
        WindowSpec { width, height, n_paths, flips_per_face: 0.0, frozen: Vec::new(), seed }
    }
}

/// Rectangular window, closed up so that the all-hexagon configuration uses
/// no boundary edge.
pub fn rectangle_window(width: usize, height: usize) -> Result<Arc<Lattice>> {
    if width < 4 || height < 4 {
        return Err(Error::InvalidParameter("window must be at least 4 × 4".into()));
    }
    let mut faces = BTreeSet::new();
    for m in 0..height as i32 {
        let lo = -(m / 2) - 1;
        for n in lo..lo + width as i32 + 2 {
            let x = FaceCoord::new(n, m).center().re;
            if (0.0..width as f64).contains(&x) {
                faces.insert(FaceCoord::new(n, m));
            }
        }
    }
    let closure: Vec<FaceCoord> = faces.iter().flat_map(|&f| h0_faces_at_corners(f)).collect();
    faces.extend(closure);
    Ok(Arc::new(Lattice::window(&faces.into_iter().collect::<Vec<_>>())?))
}

/// The all-hexagon loop configuration on a closed-up window.
pub fn hexagon_loops(lat: &Arc<Lattice>) -> Result<LoopConfig> {
    let mut w = EdgeSet::new(lat.num_edges());
    for f in 0..lat.num_interior_faces() {
        if is_h0(lat.face(f)) {
            for e in lat.face_edges(f).into_iter().flatten() {
                w.insert(e);
            }
        }
    }
    LoopConfig::new(lat.clone(), w)
}

fn non_member_edge(lat: &Lattice, w: &EdgeSet, v: usize) -> usize {
    *lat.vertex_edges(v).iter().find(|&&e| !w.contains(e)).unwrap()
}

fn other_end(lat: &Lattice, e: usize, v: usize) -> usize {
    let [a, b] = lat.edge_ends(e);
    if a == v {
        b
    } else {
        a
    }
}

/// Alternating path from the bottom boundary vertex `start` up to height
/// `top`. It enters through `start`'s free boundary edge, then alternates
/// one member edge inside a sublattice hexagon with one free edge to the next
/// hexagon. Hexagons are visited at most once and `used` ones are avoided,
/// so the path XORs into a single chain. Such chains cannot turn, so the walk
/// only succeeds from starts whose chain runs vertically.
fn vertical_chain(lat: &Lattice, w: &EdgeSet, hex_of: &[usize], used: &[bool], start: usize, top: f64) -> Option<Vec<usize>> {
    let b0 = non_member_edge(lat, w, start);
    if !lat.is_boundary_edge(b0) || used[hex_of[start]] {
        return None;
    }
    let mut visited = BTreeSet::from([hex_of[start]]);
    let mut edges = vec![b0];
    let mut x = start;
    loop {
        let mut best: Option<(f64, usize, usize, usize)> = None;
        for &e in lat.vertex_edges(x) {
            if !w.contains(e) {
                continue;
            }
            let u = other_end(lat, e, x);
            let f = non_member_edge(lat, w, u);
            if lat.is_boundary_edge(f) {
                if lat.vertex(u).position().im > top {
                    edges.extend([e, f]);
                    return Some(edges);
                }
                continue;
            }
            let y = other_end(lat, f, u);
            let h = hex_of[y];
            if used[h] || visited.contains(&h) {
                continue;
            }
            let height = lat.face(h).center().im;
            if best.is_none_or(|b| height > b.0) {
                best = Some((height, e, f, y));
            }
        }
        let (_, e, f, y) = best?;
        edges.extend([e, f]);
        visited.insert(hex_of[y]);
        x = y;
    }
}

/// Window with exactly `n_paths` bottom-to-top crossing paths: alternating
/// paths are XORed into the all-hexagon configuration and the result is
/// randomized by interior flips.
pub fn generate_crossing_window(spec: &WindowSpec) -> Result<CrossingConfig> {
    let lat = rectangle_window(spec.width, spec.height)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut w = hexagon_loops(&lat)?.into_edges();
    let pos: Vec<Point> = (0..lat.num_vertices()).map(|v| lat.vertex(v).position()).collect();
    let (ymin, ymax) = pos.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.im), a.1.max(p.im)));
    let cy = spec.height as f64 * SQRT3 / 4.0;
    let cx = spec.width as f64 / 2.0;
    let center = (0..lat.num_interior_faces())
        .map(|f| lat.face(f))
        .min_by(|a, b| (a.center() - Point::new(cx, cy)).norm().total_cmp(&(b.center() - Point::new(cx, cy)).norm()))
        .unwrap();

    let n = spec.n_paths;
    let gaps: Vec<f64> = (1..n.max(1)).map(|_| rng.gen_range(3..=6) as f64).collect();
    let total: f64 = gaps.iter().sum();
    let mut targets = vec![cx - total / 2.0];
    for g in &gaps {
        targets.push(targets.last().unwrap() + g);
    }
    if n > 0 && (targets[0] < 3.0 || targets[n - 1] > 2.0 * cx - 3.0) {
        return Err(Error::Precondition(format!("{n} crossings do not fit in width {}", spec.width)));
    }
    let nf = lat.num_interior_faces();
    let mut hex_of = vec![usize::MAX; lat.num_vertices()];
    for f in (0..nf).filter(|&f| is_h0(lat.face(f))) {
        for e in lat.face_edges(f).into_iter().flatten() {
            for v in lat.edge_ends(e) {
                hex_of[v] = f;
            }
        }
    }
    let mut used = vec![false; nf];
    for &x in targets.iter().take(n) {
        let mut starts: Vec<usize> = (0..lat.num_vertices())
            .filter(|&v| {
                pos[v].im < ymin + 2.5 && lat.vertex_is_interior(v) && lat.is_boundary_edge(non_member_edge(&lat, &w, v))
            })
            .collect();
        starts.sort_by(|&a, &b| (pos[a].re - x).abs().total_cmp(&(pos[b].re - x).abs()).then(a.cmp(&b)));
        let chain = starts.iter().take(12).find_map(|&s| vertical_chain(&lat, &w, &hex_of, &used, s, ymax - 2.5));
        let Some(chain) = chain else {
            return Err(Error::Precondition(format!("no vertical crossing near x = {x:.1}")));
        };
        for e in chain {
            for v in lat.edge_ends(e) {
                if lat.vertex_is_interior(v) {
                    used[hex_of[v]] = true;
                }
            }
            w.toggle(e);
        }
    }
    let mut cfg = LoopConfig::new(lat.clone(), w)?;
    let attempts = (spec.flips_per_face * nf as f64).round() as usize;
    let p0 = center.center();
    let free: Vec<usize> = (0..nf)
        .filter(|&f| {
            let d = (lat.face(f).center() - p0).norm();
            !spec.frozen.iter().any(|&(a, b)| a <= d && d <= b)
        })
        .collect();
    let ends: BTreeSet<(usize, usize)> = strands_of(&lat, cfg.edges()).paths().map(endpoints_of).collect();
    let mut on_path = EdgeSet::new(lat.num_edges());
    for p in strands_of(&lat, cfg.edges()).paths() {
        p.edges.iter().for_each(|&e| on_path.insert(e));
    }
    if !free.is_empty() {
        for _ in 0..attempts {
            let f = free[rng.gen_range(0..free.len())];
            if !cfg.is_flippable(f) {
                continue;
            }
            let sides: Vec<usize> = lat.face_edges(f).into_iter().flatten().collect();
            let touches = sides.iter().any(|&e| on_path.contains(e));
            cfg.flip_mut(f);
            if !touches {
                continue;
            }
            // paths may absorb loops but must not shed them or rewire
            let traced: Vec<(bool, Vec<usize>)> =
                sides.iter().filter(|&&e| cfg.contains(e)).map(|&e| trace_strand(&lat, cfg.edges(), e)).collect();
            let ok = traced.iter().all(|(closed, es)| {
                !closed && ends.contains(&(es[0].min(*es.last().unwrap()), es[0].max(*es.last().unwrap())))
            });
            if !ok {
                cfg.flip_mut(f);
                continue;
            }
            sides.iter().for_each(|&e| on_path.remove(e));
            for (_, es) in &traced {
                es.iter().for_each(|&e| on_path.insert(e));
            }
        }
    }
    let out = CrossingConfig::new(cfg, center)?;
    if out.paths.len() != n {
        return Err(Error::Invariant(format!("expected {n} crossings, found {}", out.paths.len())));
    }
    Ok(out)
}

/// The strand of `w` through edge `e`: whether it is closed, and its edges
/// in order (boundary edge first and last for an open strand).
fn trace_strand(lat: &Lattice, w: &EdgeSet, e: usize) -> (bool, Vec<usize>) {
    let walk = |from: usize, first: usize, out: &mut Vec<usize>| -> bool {
        let (mut v, mut cur) = (from, first);
        loop {
            if !lat.vertex_is_interior(v) {
                return false;
            }
            let next = *lat.vertex_edges(v).iter().find(|&&x| x != cur && w.contains(x)).unwrap();
            if next == e {
                return true;
            }
            out.push(next);
            v = other_end(lat, next, v);
            cur = next;
        }
    };
    let [a, b] = lat.edge_ends(e);
    let mut fwd = Vec::new();
    if walk(b, e, &mut fwd) {
        let mut all = vec![e];
        all.extend(fwd);
        return (true, all);
    }
    let mut back = Vec::new();
    walk(a, e, &mut back);
    let mut all: Vec<usize> = back.into_iter().rev().collect();
    all.push(e);
    all.extend(fwd);
    (false, all)
}

/// Closed curve made of a crossing path, radial rays from its ends and a far
/// arc, used to decide sides of the path.
struct SideCurve {
    poly: Vec<Point>,
}

impl SideCurve {
    fn new(s: &Strand, anchor: Point, far: f64) -> Self {
        let mut poly = s.lifted.clone();
        let start = poly[0];
        let end = *poly.last().unwrap();
        let ray = |p: Point| anchor + (p - anchor) * (far / (p - anchor).norm());
        let (pe, ps) = (ray(end), ray(start));
        poly.push(pe);
        let a0 = (pe - anchor).arg();
        let mut a1 = (ps - anchor).arg();
        while a1 <= a0 {
            a1 += 2.0 * std::f64::consts::PI;
        }
        let steps = 256;
        for i in 1..steps {
            let a = a0 + (a1 - a0) * i as f64 / steps as f64;
            poly.push(anchor + Point::from_polar(far, a));
        }
        poly.push(ps);
        SideCurve { poly }
    }

    fn contains(&self, p: Point) -> bool {
        let n = self.poly.len();
        let mut total = 0.0;
        for i in 0..n {
            let a = self.poly[i] - p;
            let b = self.poly[(i + 1) % n] - p;
            total += (b / a).arg();
        }
        (total / (2.0 * std::f64::consts::PI)).round() as i32 != 0
    }
}

/// Side of every window face with respect to one crossing path.
struct Sides {
    curve: SideCurve,
    face_side: Vec<Option<bool>>,
}

impl Sides {
    fn new(cfg: &CrossingConfig, s: &Strand) -> Self {
        let lat = cfg.lattice();
        let nf = lat.num_interior_faces();
        let centers: Vec<Point> = (0..nf).map(|f| lat.face(f).center()).collect();
        let anchor = centers.iter().sum::<Point>() / nf as f64;
        let radius = (0..lat.num_vertices()).map(|v| (lat.vertex(v).position() - anchor).norm()).fold(0.0, f64::max);
        let curve = SideCurve::new(s, anchor, 4.0 * radius + 10.0);
        let blocked = s.edge_set(lat.num_edges());
        let mut face_side = vec![None; lat.num_faces()];
        for start in 0..nf {
            if face_side[start].is_some() {
                continue;
            }
            let side = curve.contains(centers[start]);
            face_side[start] = Some(side);
            let mut queue = VecDeque::from([start]);
            while let Some(f) = queue.pop_front() {
                for d in 0..6 {
                    let (Some(g), Some(e)) = (lat.face_adj(f)[d], lat.face_edges(f)[d]) else { continue };
                    if g < nf && !blocked.contains(e) && face_side[g].is_none() {
                        face_side[g] = Some(side);
                        queue.push_back(g);
                    }
                }
            }
        }
        Sides { curve, face_side }
    }
}

/// Window faces between two crossing paths.
pub struct Area {
    pub faces: Vec<bool>,
    side1: Sides,
    side2: Sides,
    in1: bool,
    in2: bool,
}

impl Area {
    pub fn new(cfg: &CrossingConfig, i1: usize, i2: usize) -> Result<Self> {
        check_pair(cfg, i1, i2)?;
        let (g1, g2) = (&cfg.paths[i1], &cfg.paths[i2]);
        let side1 = Sides::new(cfg, g1);
        let side2 = Sides::new(cfg, g2);
        let in1 = side1.curve.contains(probe_point(g2));
        let in2 = side2.curve.contains(probe_point(g1));
        let faces = (0..cfg.lattice().num_faces())
            .map(|f| side1.face_side[f] == Some(in1) && side2.face_side[f] == Some(in2))
            .collect();
        Ok(Area { faces, side1, side2, in1, in2 })
    }

    pub fn contains_point(&self, p: Point) -> bool {
        self.side1.curve.contains(p) == self.in1 && self.side2.curve.contains(p) == self.in2
    }

    pub fn contains_face(&self, f: usize) -> bool {
        self.faces[f]
    }
}

/// A point on the strand away from other paths: the midpoint of an edge.
fn probe_point(s: &Strand) -> Point {
    let i = s.len() / 2;
    (s.lifted[i] + s.lifted[i + 1]) / 2.0
}

fn check_pair(cfg: &CrossingConfig, i1: usize, i2: usize) -> Result<()> {
    let n = cfg.paths.len();
    if i1 >= n || i2 >= n || i1 == i2 {
        return Err(Error::InvalidParameter(format!("need two distinct paths among {n}, got {i1} and {i2}")));
    }
    Ok(())
}

fn borders(lat: &Lattice, f: usize, edges: &EdgeSet) -> bool {
    lat.face_edges(f).iter().flatten().any(|&e| edges.contains(e))
}

fn in_ball(lat: &Lattice, f: usize, p: Point, r: f64) -> bool {
    lat.face_is_interior(f) && (lat.face(f).center() - p).norm() < r
}

/// No other crossing path enters the area between `i1` and `i2`.
pub fn are_parallel(cfg: &CrossingConfig, i1: usize, i2: usize) -> Result<bool> {
    let area = Area::new(cfg, i1, i2)?;
    Ok(cfg
        .paths
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i1 && j != i2)
        .all(|(_, p)| !area.contains_point(probe_point(p))))
}

/// Indices of other paths inside the area between `i1` and `i2`.
pub fn paths_inside_area(cfg: &CrossingConfig, i1: usize, i2: usize) -> Result<Vec<usize>> {
    let area = Area::new(cfg, i1, i2)?;
    Ok((0..cfg.paths.len())
        .filter(|&j| j != i1 && j != i2 && area.contains_point(probe_point(&cfg.paths[j])))
        .collect())
}

/// Every area face in `B(p, r)` borders both paths.
pub fn are_glued(cfg: &CrossingConfig, i1: usize, i2: usize, p: Point, r: f64) -> Result<bool> {
    let area = Area::new(cfg, i1, i2)?;
    let lat = cfg.lattice();
    let (e1, e2) = (cfg.paths[i1].edge_set(lat.num_edges()), cfg.paths[i2].edge_set(lat.num_edges()));
    Ok((0..lat.num_interior_faces())
        .filter(|&f| area.faces[f] && in_ball(lat, f, p, r))
        .all(|f| borders(lat, f, &e1) && borders(lat, f, &e2)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualPath {
    /// Face indices `f_1, …, f_{k+1}`.
    pub faces: Vec<usize>,
}

impl DualPath {
    /// Number of dual steps `k`.
    pub fn length(&self) -> usize {
        self.faces.len() - 1
    }

    pub fn coords(&self, lat: &Lattice) -> Vec<FaceCoord> {
        self.faces.iter().map(|&f| lat.face(f)).collect()
    }
}

/// Shortest dual path from path `i1` to path `i2` whose inner faces lie in
/// `B(p, r)`, by breadth-first search in face order.
pub fn find_min_dual_path(cfg: &CrossingConfig, i1: usize, i2: usize, p: Point, r: f64) -> Result<DualPath> {
    check_pair(cfg, i1, i2)?;
    let lat = cfg.lattice();
    let w = cfg.edges();
    let e1 = cfg.paths[i1].edge_set(lat.num_edges());
    let e2 = cfg.paths[i2].edge_set(lat.num_edges());
    let mut region: Vec<usize> = (0..lat.num_interior_faces()).filter(|&f| in_ball(lat, f, p, r)).collect();
    region.sort_by_key(|&f| (lat.face(f).m, lat.face(f).n));
    let nf = lat.num_faces();
    let mut prev: Vec<Option<usize>> = vec![None; nf];
    let mut seen = vec![false; nf];
    let mut first: Vec<Option<usize>> = vec![None; nf];
    let mut queue = VecDeque::new();
    for &f in &region {
        for s in 0..6 {
            if let (Some(e), Some(g)) = (lat.face_edges(f)[s], lat.face_adj(f)[s]) {
                if e1.contains(e) && !seen[f] {
                    seen[f] = true;
                    first[f] = Some(g);
                    queue.push_back(f);
                }
            }
        }
    }
    while let Some(f) = queue.pop_front() {
        for s in 0..6 {
            let (Some(e), Some(g)) = (lat.face_edges(f)[s], lat.face_adj(f)[s]) else { continue };
            if e2.contains(e) {
                let mut faces = vec![g, f];
                let mut x = f;
                while let Some(q) = prev[x] {
                    faces.push(q);
                    x = q;
                }
                faces.push(first[x].unwrap());
                faces.reverse();
                return Ok(DualPath { faces });
            }
        }
        for s in 0..6 {
            let (Some(e), Some(g)) = (lat.face_edges(f)[s], lat.face_adj(f)[s]) else { continue };
            if !w.contains(e) && !seen[g] && in_ball(lat, g, p, r) {
                seen[g] = true;
                prev[g] = Some(f);
                queue.push_back(g);
            }
        }
    }
    Err(Error::NotConnected(format!("no dual path between paths {i1} and {i2} inside B({r})")))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SwapRadii {
    pub r0: f64,
    pub r1: f64,
    pub big_r: f64,
}

impl SwapRadii {
    pub fn validate(&self) -> Result<()> {
        let edge = 1.0 / SQRT3;
        if !(self.r0 > 0.0 && self.r1 / 2.0 - self.r0 > edge && self.big_r / 2.0 - self.r1 > edge) {
            return Err(Error::InvalidParameter(format!(
                "radii need 0 < r0 < r1/2 < R/4 with room for one edge, got {self:?}"
            )));
        }
        Ok(())
    }

    /// Rings just outside `r0` and `r1` kept free of random flips, so that
    /// generated windows keep their branch structure in the annuli.
    pub fn frozen_rings(&self) -> Vec<(f64, f64)> {
        vec![(self.r0 + 0.5, self.r0 + 4.5), (self.r1 + 0.5, self.r1 + 5.5)]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    Base,
    Induction,
}

#[derive(Clone, Debug, Serialize)]
pub struct SwapStep {
    pub kind: StepKind,
    pub face: FaceCoord,
    /// Minimal dual-path length before the flip.
    pub dual_length: usize,
}

#[derive(Clone, Debug)]
pub struct SwapOutcome {
    pub config: CrossingConfig,
    pub steps: Vec<SwapStep>,
    pub bound: usize,
    pub old_pairs: [(usize, usize); 2],
    pub new_pairs: [(usize, usize); 2],
}

impl SwapOutcome {
    pub fn flips(&self) -> Vec<FaceCoord> {
        self.steps.iter().map(|s| s.face).collect()
    }
}

fn loops_of(cfg: &CrossingConfig) -> LoopSet {
    cfg.loop_set()
}

/// Checks the hypotheses of the swap construction for paths `i1`, `i2`.
pub fn swap_preconditions(cfg: &CrossingConfig, i1: usize, i2: usize, radii: SwapRadii) -> Result<()> {
    radii.validate()?;
    check_pair(cfg, i1, i2)?;
    let lat = cfg.lattice();
    let p = cfg.center_point();
    let reach = radii.big_r + 1.0;
    let span = reach.ceil() as i32 + 2;
    for dn in -2 * span..=2 * span {
        for dm in -span..=span {
            let g = cfg.center.offset(dn, dm);
            if (g.center() - p).norm() < reach && !lat.face_index(g).is_some_and(|i| lat.face_is_interior(i)) {
                return Err(Error::Precondition(format!("B({}, R) is not inside the window", cfg.center)));
            }
        }
    }
    let ls = loops_of(cfg);
    if !event_l(lat, &ls, p, radii.r0, radii.r1)? {
        return Err(Error::Precondition("a loop has a branch in B(r1/2) minus B(r0)".into()));
    }
    if !event_l(lat, &ls, p, radii.r1, radii.big_r)? {
        return Err(Error::Precondition("a loop has a branch in B(R/2) minus B(r1)".into()));
    }
    if !event_p(lat, &ls, p, radii.r1, radii.big_r)? {
        return Err(Error::Precondition("a path has more than two branches in B(R/2) minus B(r1)".into()));
    }
    for i in [i1, i2] {
        if !cfg.paths[i].meets_ball(lat, p, radii.r0) {
            return Err(Error::Precondition(format!("path {i} misses B(r0)")));
        }
    }
    if !are_parallel(cfg, i1, i2)? {
        return Err(Error::Precondition("paths are not parallel".into()));
    }
    if are_glued(cfg, i1, i2, p, radii.r1)? {
        return Err(Error::Precondition("paths are glued in B(r1)".into()));
    }
    Ok(())
}

/// Pairs of distinct paths satisfying the swap hypotheses, in index order.
pub fn eligible_swap_pairs(cfg: &CrossingConfig, radii: SwapRadii) -> Vec<(usize, usize)> {
    let n = cfg.paths.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if swap_preconditions(cfg, i, j, radii).is_ok() {
                out.push((i, j));
            }
        }
    }
    out
}

fn invariant(msg: impl Into<String>) -> Error {
    Error::Invariant(msg.into())
}

/// Faces bordering `path` on the side selected by `side`, in order along the
/// edges at positions `from..=to` (either direction).
fn bordering_faces(lat: &Lattice, path: &Strand, side: &[Option<bool>], want: bool, from: usize, to: usize) -> Vec<usize> {
    let idx: Vec<usize> = if from <= to { (from..=to).collect() } else { (to..=from).rev().collect() };
    let mut out: Vec<usize> = Vec::new();
    for i in idx {
        let e = path.edges[i];
        for f in lat.edge_faces(e).into_iter().flatten() {
            if side[f] == Some(want) && out.last() != Some(&f) {
                out.push(f);
            }
        }
    }
    out
}

/// The face flipped in the base case, following the walk along the path
/// bordering a face that fails to border the other one.
fn base_face(cfg: &CrossingConfig, i1: usize, i2: usize, dp: &DualPath, p: Point, r1: f64) -> Result<usize> {
    let lat = cfg.lattice();
    let ne = lat.num_edges();
    let area = Area::new(cfg, i1, i2)?;
    let e1 = cfg.paths[i1].edge_set(ne);
    let e2 = cfg.paths[i2].edge_set(ne);
    let mut cands: Vec<usize> = (0..lat.num_interior_faces())
        .filter(|&f| area.faces[f] && borders(lat, f, &e1) != borders(lat, f, &e2))
        .collect();
    cands.sort_by_key(|&f| (!in_ball(lat, f, p, r1), lat.face(f).m, lat.face(f).n));
    let &fp = cands.first().ok_or_else(|| invariant("not glued, yet every area face borders both or neither path"))?;
    let mid = dp.faces[1];
    // orient roles so that f' borders path a
    let (a, ea, eb, shared) = if borders(lat, fp, &e1) {
        (i1, &e1, &e2, edge_between(lat, dp.faces[0], mid)?)
    } else {
        (i2, &e2, &e1, edge_between(lat, dp.faces[2], mid)?)
    };
    let path = &cfg.paths[a];
    let pos = |e: usize| path.edges.iter().position(|&x| x == e);
    let i = pos(shared).ok_or_else(|| invariant("shared edge is not on the path"))?;
    let j = lat
        .face_edges(fp)
        .iter()
        .flatten()
        .filter(|&&e| ea.contains(e))
        .filter_map(|&e| pos(e))
        .min_by_key(|&x| x.abs_diff(i))
        .unwrap();
    let side = if a == i1 { &area.side1 } else { &area.side2 };
    let want = if a == i1 { area.in1 } else { area.in2 };
    let seq = bordering_faces(lat, path, &side.face_side, want, i, j);
    let last = seq
        .iter()
        .rposition(|&f| borders(lat, f, eb))
        .ok_or_else(|| invariant("no face along the segment borders the other path"))?;
    if last + 1 >= seq.len() {
        return Err(invariant("last face bordering the other path has no successor"));
    }
    Ok(seq[last])
}

fn edge_between(lat: &Lattice, f: usize, g: usize) -> Result<usize> {
    (0..6)
        .find_map(|s| (lat.face_adj(f)[s] == Some(g)).then(|| lat.face_edges(f)[s]).flatten())
        .ok_or_else(|| invariant("dual path faces are not adjacent"))
}

fn slot_of(lat: &Lattice, f: usize, e: usize) -> Option<usize> {
    (0..6).find(|&s| lat.face_edges(f)[s] == Some(e))
}

fn loop_containing(cfg: &CrossingConfig, e: usize) -> Option<usize> {
    cfg.loops.iter().position(|l| l.edges.contains(&e))
}

/// Rewires the far branches of two parallel, non-glued crossing paths by
/// flips inside `B(R)`.
pub fn swap_paths(cfg: &CrossingConfig, i1: usize, i2: usize, radii: SwapRadii) -> Result<SwapOutcome> {
    swap_preconditions(cfg, i1, i2, radii)?;
    let lat = cfg.lattice().clone();
    let p = cfg.center_point();
    let bound = (0..lat.num_interior_faces()).filter(|&f| in_ball(&lat, f, p, radii.r1)).count() + 1;
    let ends1 = cfg.endpoints(i1);
    let ends2 = cfg.endpoints(i2);
    let mut cur = cfg.clone();
    let mut steps: Vec<SwapStep> = Vec::new();
    let mut last_len = usize::MAX;
    loop {
        if steps.len() >= bound {
            return Err(invariant(format!("flip count exceeds the bound {bound}")));
        }
        let a = cur.path_with_endpoints(ends1).ok_or_else(|| invariant("first path lost its endpoints"))?;
        let b = cur.path_with_endpoints(ends2).ok_or_else(|| invariant("second path lost its endpoints"))?;
        let dp = find_min_dual_path(&cur, a, b, p, radii.r1)?;
        let k = dp.length();
        if k >= last_len {
            return Err(invariant(format!("dual path length did not decrease ({last_len} -> {k})")));
        }
        last_len = k;
        if k == 2 {
            if are_glued(&cur, a, b, p, radii.r1)? {
                return Err(invariant("paths became glued in B(r1)"));
            }
            let g = base_face(&cur, a, b, &dp, p, radii.r1)?;
            if !in_ball(&lat, g, p, radii.big_r) {
                return Err(invariant("base flip face lies outside B(R)"));
            }
            if !cur.loop_config().is_flippable(g) {
                return Err(invariant(format!("base face {} is not flippable", lat.face(g))));
            }
            let next = cur.flip(g)?;
            steps.push(SwapStep { kind: StepKind::Base, face: lat.face(g), dual_length: k });
            let (old_pairs, new_pairs) = check_rewiring(cfg, &next, ends1, ends2)?;
            check_locality(cfg, &next, p, radii.big_r)?;
            if next.paths.len() >= 3 {
                let a = next.path_with_endpoints(new_pairs[0]).unwrap();
                let b = next.path_with_endpoints(new_pairs[1]).unwrap();
                if paths_inside_area(&next, a, b)?.is_empty() {
                    return Err(invariant("swapped paths are still parallel"));
                }
            }
            return Ok(SwapOutcome { config: next, steps, bound, old_pairs, new_pairs });
        }
        let f2 = dp.faces[1];
        let e0 = edge_between(&lat, dp.faces[0], f2)?;
        let e3 = edge_between(&lat, f2, dp.faces[2])?;
        let s0 = slot_of(&lat, f2, e0).unwrap();
        if slot_of(&lat, f2, e3) != Some((s0 + 3) % 6) {
            return Err(invariant(format!("dual path leaves {} through a side not opposite its entry", lat.face(f2))));
        }
        if !cur.loop_config().is_flippable(f2) {
            return Err(invariant(format!("{} is not flippable", lat.face(f2))));
        }
        let fe = lat.face_edges(f2);
        let (x2, x4) = (fe[(s0 + 2) % 6].unwrap(), fe[(s0 + 4) % 6].unwrap());
        let l1 = loop_containing(&cur, x2).ok_or_else(|| invariant("side e2 is not on a loop"))?;
        let l2 = loop_containing(&cur, x4).ok_or_else(|| invariant("side e4 is not on a loop"))?;
        if l1 == l2 {
            return Err(invariant("sides e2 and e4 lie on the same loop"));
        }
        let n_loops = cur.loops.len();
        let next = cur.flip(f2)?;
        if next.loops.len() + 2 != n_loops {
            return Err(invariant("flip did not absorb exactly two loops"));
        }
        if next.endpoint_pairs() != cur.endpoint_pairs() {
            return Err(invariant("induction flip changed the endpoint pairing"));
        }
        steps.push(SwapStep { kind: StepKind::Induction, face: lat.face(f2), dual_length: k });
        cur = next;
    }
}

fn check_rewiring(
    before: &CrossingConfig,
    after: &CrossingConfig,
    ends1: (usize, usize),
    ends2: (usize, usize),
) -> Result<([(usize, usize); 2], [(usize, usize); 2])> {
    let old = before.endpoint_pairs();
    let new = after.endpoint_pairs();
    let kept: BTreeSet<_> = old.iter().filter(|&&x| x != ends1 && x != ends2).copied().collect();
    let added: Vec<_> = new.difference(&kept).copied().collect();
    if !kept.is_subset(&new) || added.len() != 2 {
        return Err(invariant("flips disturbed paths other than the swapped pair"));
    }
    let four: BTreeSet<usize> = [ends1.0, ends1.1, ends2.0, ends2.1].into();
    let got: BTreeSet<usize> = added.iter().flat_map(|&(a, b)| [a, b]).collect();
    if got != four || added.contains(&ends1) || added.contains(&ends2) {
        return Err(invariant("far branches were not exchanged"));
    }
    Ok(([ends1, ends2], [added[0], added[1]]))
}

fn check_locality(before: &CrossingConfig, after: &CrossingConfig, p: Point, big_r: f64) -> Result<()> {
    let lat = before.lattice();
    for e in before.edges().xor(after.edges()).iter() {
        if lat.edge_distance(p, e) >= big_r {
            return Err(invariant(format!("edge {} outside B(R) changed", lat.edge(e))));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnglueCase {
    /// The probe face lies between two paths bounding a common cluster.
    Between,
    /// One path separates the probe face from all others; a flip is made.
    Flipped,
}

#[derive(Clone, Debug)]
pub struct UnglueOutcome {
    pub config: CrossingConfig,
    pub flip: Option<FaceCoord>,
    pub case: UnglueCase,
    /// Endpoints of the two paths witnessing the result.
    pub pair: [(usize, usize); 2],
}

/// Cluster labels of window faces (dual connectivity across absent edges).
fn window_clusters(cfg: &CrossingConfig) -> Vec<usize> {
    let lat = cfg.lattice();
    let nf = lat.num_interior_faces();
    let w = cfg.edges();
    let mut label = vec![usize::MAX; nf];
    let mut next = 0;
    for s in 0..nf {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = next;
        let mut queue = VecDeque::from([s]);
        while let Some(f) = queue.pop_front() {
            for d in 0..6 {
                let (Some(g), Some(e)) = (lat.face_adj(f)[d], lat.face_edges(f)[d]) else { continue };
                if g < nf && !w.contains(e) && label[g] == usize::MAX {
                    label[g] = next;
                    queue.push_back(g);
                }
            }
        }
        next += 1;
    }
    label
}

fn bordering_clusters(cfg: &CrossingConfig, labels: &[usize], i: usize) -> BTreeSet<usize> {
    let lat = cfg.lattice();
    let mut out = BTreeSet::new();
    for &e in &cfg.paths[i].edges {
        for f in lat.edge_faces(e).into_iter().flatten() {
            if f < labels.len() {
                out.insert(labels[f]);
            }
        }
    }
    out
}

/// Two paths bound a common cluster of window faces.
pub fn bound_common_cluster(cfg: &CrossingConfig, i1: usize, i2: usize) -> bool {
    let labels = window_clusters(cfg);
    !bordering_clusters(cfg, &labels, i1).is_disjoint(&bordering_clusters(cfg, &labels, i2))
}

/// Finite analogue of having two non-glued paths that bound a common cluster.
pub fn in_unglued_class(cfg: &CrossingConfig, i1: usize, i2: usize) -> Result<bool> {
    Ok(bound_common_cluster(cfg, i1, i2) && !are_glued(cfg, i1, i2, Point::new(0.0, 0.0), f64::INFINITY)?)
}

pub fn unglue_preconditions(cfg: &CrossingConfig, r: f64, big_r: f64) -> Result<()> {
    let lat = cfg.lattice();
    let p = cfg.center_point();
    if cfg.paths.len() < 2 {
        return Err(Error::Precondition("need at least two crossing paths".into()));
    }
    if !event_l(lat, &cfg.loop_set(), p, r, big_r)? {
        return Err(Error::Precondition("a loop has a branch in B(R/2) minus B(r)".into()));
    }
    let f0 = lat.face_index(cfg.center).unwrap();
    if !cfg.loop_config().is_flippable(f0) {
        return Err(Error::Precondition(format!("probe face {} is not flippable", cfg.center)));
    }
    if !cfg.paths.iter().any(|s| s.meets_ball(lat, p, r)) {
        return Err(Error::Precondition("no path meets B(r)".into()));
    }
    Ok(())
}

/// Returns a configuration with two non-glued paths bounding a common
/// cluster, unchanged or after one flip inside `B(R)`.
pub fn unglue(cfg: &CrossingConfig, r: f64, big_r: f64) -> Result<UnglueOutcome> {
    unglue_preconditions(cfg, r, big_r)?;
    let lat = cfg.lattice().clone();
    let p = cfg.center_point();
    let f0 = lat.face_index(cfg.center).unwrap();
    let n = cfg.paths.len();
    let labels = window_clusters(cfg);
    let bc: Vec<BTreeSet<usize>> = (0..n).map(|i| bordering_clusters(cfg, &labels, i)).collect();

    for i in 0..n {
        for j in i + 1..n {
            if bc[i].is_disjoint(&bc[j]) {
                continue;
            }
            if Area::new(cfg, i, j)?.contains_face(f0) {
                if are_glued(cfg, i, j, p, f64::INFINITY)? {
                    return Err(invariant("paths around the probe face are glued"));
                }
                return Ok(UnglueOutcome {
                    config: cfg.clone(),
                    flip: None,
                    case: UnglueCase::Between,
                    pair: [cfg.endpoints(i), cfg.endpoints(j)],
                });
            }
        }
    }

    // the path separating the probe face from every other path
    let mut sep = None;
    for i in 0..n {
        let sides = Sides::new(cfg, &cfg.paths[i]);
        let here = sides.face_side[f0].unwrap();
        if (0..n).filter(|&j| j != i).all(|j| sides.curve.contains(probe_point(&cfg.paths[j])) != here) {
            sep = Some((i, sides, here));
            break;
        }
    }
    let (g1, sides, left) = sep.ok_or_else(|| invariant("no path separates the probe face from the others"))?;
    let g2 = (0..n)
        .find(|&j| j != g1 && !bc[g1].is_disjoint(&bc[j]))
        .ok_or_else(|| Error::Precondition("no second path bounds a cluster shared with the first".into()))?;
    let path = &cfg.paths[g1];
    let pe = path.edge_set(lat.num_edges());
    let lf = bordering_faces(&lat, path, &sides.face_side, left, 0, path.len() - 1);

    let g = if borders(&lat, f0, &pe) {
        f0
    } else {
        let loop_sets: Vec<EdgeSet> = cfg.loops.iter().map(|l| l.edge_set(lat.num_edges())).collect();
        let (start, ell) = lf
            .iter()
            .enumerate()
            .filter(|&(_, &f)| in_ball(&lat, f, p, r))
            .find_map(|(pos, &f)| loop_sets.iter().position(|ls| borders(&lat, f, ls)).map(|l| (pos, l)))
            .ok_or_else(|| invariant("no face near the probe borders both the path and a loop"))?;
        let last = (start..lf.len())
            .rev()
            .find(|&q| borders(&lat, lf[q], &loop_sets[ell]))
            .unwrap();
        if last + 1 >= lf.len() {
            return Err(invariant("loop-bordering face has no successor along the path"));
        }
        lf[last]
    };
    if !in_ball(&lat, g, p, big_r) {
        return Err(invariant("unglue flip lies outside B(R)"));
    }
    if !cfg.loop_config().is_flippable(g) {
        return Err(invariant(format!("face {} bordering the path is not flippable", lat.face(g))));
    }
    let next = cfg.flip(g)?;
    let ends1 = cfg.endpoints(g1);
    let ends2 = cfg.endpoints(g2);
    let a = next.path_with_endpoints(ends1).ok_or_else(|| invariant("flip rewired the separating path"))?;
    let b = next.path_with_endpoints(ends2).ok_or_else(|| invariant("flip rewired the second path"))?;
    if !in_unglued_class(&next, a, b)? {
        return Err(invariant("flipped configuration still has the pair glued"));
    }
    Ok(UnglueOutcome { config: next, flip: Some(lat.face(g)), case: UnglueCase::Flipped, pair: [ends1, ends2] })
}

/// Color of the first interior vertex of a path, exposed for rendering.
pub fn path_start_color(cfg: &CrossingConfig, i: usize) -> Color {
    cfg.lattice().vertex(cfg.paths[i].vertices[1]).color
}
