//! Loops, crossing paths, dual clusters, branches and trifurcations.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hexlattice::{hexagon_distance, Color, FaceCoord, Lattice, Point, SQRT3};
use crate::matching::{EdgeConfig, EdgeSet, LoopConfig};

/// A cycle, or on a window a boundary-to-boundary path.
#[derive(Clone, Debug, PartialEq)]
pub struct Strand {
    /// Visited vertices; for a cycle the first vertex is not repeated.
    pub vertices: Vec<usize>,
    /// `edges[i]` joins `vertices[i]` and `vertices[i+1]` (cyclically).
    pub edges: Vec<usize>,
    pub closed: bool,
    /// Lifted vertex positions along the strand (one more than vertices for
    /// a cycle: the endpoint of the last edge).
    pub lifted: Vec<Point>,
    /// Homology class on a torus; (0,0) on a window.
    pub homology: (i32, i32),
}

impl Strand {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn is_contractible_loop(&self) -> bool {
        self.closed && self.homology == (0, 0)
    }

    /// Euclidean diameter of the lifted vertex set.
    pub fn diameter(&self) -> f64 {
        let hull = convex_hull(&self.lifted);
        let mut d: f64 = 0.0;
        for i in 0..hull.len() {
            for j in i + 1..hull.len() {
                d = d.max((hull[i] - hull[j]).norm());
            }
        }
        d
    }

    /// Twice the signed area of a closed lifted polygon (positive when ccw).
    pub fn signed_area2(&self) -> f64 {
        let p = &self.lifted;
        let n = self.vertices.len();
        (0..n).map(|i| p[i].re * p[i + 1].im - p[i + 1].re * p[i].im).sum()
    }

    /// Winding number of a closed strand around `q`, with `q` placed at its
    /// minimal image relative to the first vertex.
    pub fn winding_number(&self, lat: &Lattice, q: Point) -> i32 {
        if !self.closed {
            return 0;
        }
        let q = self.lifted[0] + lat.displacement(self.lifted[0], q);
        let n = self.vertices.len();
        let mut total = 0.0;
        for i in 0..n {
            let a = self.lifted[i] - q;
            let b = self.lifted[i + 1] - q;
            total += (b / a).arg();
        }
        (total / (2.0 * std::f64::consts::PI)).round() as i32
    }

    /// Whether some edge of the strand meets the open disc `B(p, r)`.
    pub fn meets_ball(&self, lat: &Lattice, p: Point, r: f64) -> bool {
        self.edges.iter().any(|&e| lat.edge_distance(p, e) < r)
    }

    pub fn edge_set(&self, n_edges: usize) -> EdgeSet {
        EdgeSet::from_indices(n_edges, self.edges.iter().copied())
    }
}

/// Monotone-chain convex hull.
fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut p: Vec<Point> = points.to_vec();
    p.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    p.dedup_by(|a, b| (*a - *b).norm() < 1e-12);
    if p.len() < 3 {
        return p;
    }
    let cross = |o: Point, a: Point, b: Point| (a - o).re * (b - o).im - (a - o).im * (b - o).re;
    let mut hull: Vec<Point> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    hull
}

#[derive(Clone, Debug)]
pub struct LoopSet {
    pub strands: Vec<Strand>,
}

impl LoopSet {
    pub fn loops(&self) -> impl Iterator<Item = &Strand> {
        self.strands.iter().filter(|s| s.is_contractible_loop())
    }

    /// Winding cycles on a torus, crossing paths on a window.
    pub fn paths(&self) -> impl Iterator<Item = &Strand> {
        self.strands.iter().filter(|s| !s.is_contractible_loop())
    }

    pub fn total_length(&self) -> usize {
        self.strands.iter().map(Strand::len).sum()
    }
}

/// Direction vector of `e` traversed starting from vertex `from`.
fn traverse(lat: &Lattice, e: usize, from: usize) -> (usize, Point, (i32, i32)) {
    let [w, b] = lat.edge_ends(e);
    let t = lat.edge(e).etype;
    let (dn, dm) = t.black_offset();
    if from == w && lat.vertex(from).color == Color::White {
        (b, t.vector(), (dn, dm))
    } else {
        (w, -t.vector(), (-dn, -dm))
    }
}

/// Decomposes a loop configuration into cycles and crossing paths.
pub fn extract_loops(w: &LoopConfig) -> Result<LoopSet> {
    w.validate()?;
    Ok(strands_of(w.lattice(), w.edges()))
}

/// Strands of any subgraph whose interior vertices have degree 0 or 2.
pub fn strands_of(lat: &Lattice, edges: &EdgeSet) -> LoopSet {
    let mut used = vec![false; lat.num_edges()];
    let mut strands = Vec::new();
    let member = |v: usize| -> Vec<usize> { lat.vertex_edges(v).iter().copied().filter(|&e| edges.contains(e)).collect() };

    let walk = |start_v: usize, start_e: usize, closed_hint: bool, used: &mut Vec<bool>| -> Strand {
        let mut vertices = vec![start_v];
        let mut es = Vec::new();
        let mut lifted = vec![lat.vertex(start_v).position()];
        let mut hom = (0, 0);
        let mut v = start_v;
        let mut e = start_e;
        loop {
            used[e] = true;
            es.push(e);
            let (next, dv, (dn, dm)) = traverse(lat, e, v);
            hom = (hom.0 + dn, hom.1 + dm);
            lifted.push(*lifted.last().unwrap() + dv);
            v = next;
            if closed_hint && v == start_v && member(v).iter().all(|&x| used[x]) {
                break;
            }
            if !lat.vertex_is_interior(v) {
                vertices.push(v);
                break;
            }
            match member(v).into_iter().find(|&x| !used[x]) {
                Some(x) => {
                    vertices.push(v);
                    e = x;
                }
                None => break,
            }
        }
        let closed = closed_hint && v == start_v;
        let homology = match lat.k() {
            Some(k) if closed => (hom.0 / k as i32, hom.1 / k as i32),
            _ => (0, 0),
        };
        Strand { vertices, edges: es, closed, lifted, homology }
    };

    // paths first, from boundary edges in index order
    for &e in lat.boundary_edges() {
        if !edges.contains(e) || used[e] {
            continue;
        }
        let [a, b] = lat.edge_ends(e);
        let outer = if lat.vertex_is_interior(a) { b } else { a };
        strands.push(walk(outer, e, false, &mut used));
    }
    for v in 0..lat.num_vertices() {
        if !lat.vertex_is_interior(v) {
            continue;
        }
        let es = member(v);
        if let Some(&e) = es.iter().find(|&&e| !used[e]) {
            strands.push(walk(v, e, true, &mut used));
        }
    }
    LoopSet { strands }
}

/// The faces left and right of edge `e` traversed from vertex `from`.
pub fn edge_sides(lat: &Lattice, e: usize, from: usize) -> (Option<usize>, Option<usize>) {
    let id = lat.edge(e);
    let [f0, f1] = id.faces();
    let base = id.white().position();
    let (_, dv, _) = traverse(lat, e, from);
    let origin = if from == lat.edge_ends(e)[0] { base } else { base + id.etype.vector() };
    let side = |f: FaceCoord| {
        let c = f.center() - origin;
        dv.re * c.im - dv.im * c.re > 0.0
    };
    let idx = |f: FaceCoord| lat.face_index(f);
    if side(f0) {
        (idx(f0), idx(f1))
    } else {
        (idx(f1), idx(f0))
    }
}

/// Dual-connectivity step from `f` across slot `s`, if the crossed edge is
/// not in `blocked`.
pub(crate) fn dual_step(lat: &Lattice, blocked: &EdgeSet, f: usize, s: usize) -> Option<usize> {
    let g = lat.face_adj(f)[s]?;
    match lat.face_edges(f)[s] {
        Some(e) if blocked.contains(e) => None,
        _ => Some(g),
    }
}

/// Faces enclosed by a contractible loop.
pub fn enclosed_faces(lat: &Lattice, s: &Strand) -> Vec<usize> {
    if !s.is_contractible_loop() {
        return Vec::new();
    }
    let blocked = s.edge_set(lat.num_edges());
    let ccw = s.signed_area2() > 0.0;
    let mut seen = vec![false; lat.num_faces()];
    let mut queue = VecDeque::new();
    for (i, &e) in s.edges.iter().enumerate() {
        let (l, r) = edge_sides(lat, e, s.vertices[i]);
        if let Some(f) = if ccw { l } else { r } {
            if !seen[f] {
                seen[f] = true;
                queue.push_back(f);
            }
        }
    }
    while let Some(f) = queue.pop_front() {
        for d in 0..6 {
            if let Some(g) = dual_step(lat, &blocked, f, d) {
                if !seen[g] {
                    seen[g] = true;
                    queue.push_back(g);
                }
            }
        }
    }
    (0..lat.num_faces()).filter(|&f| seen[f]).collect()
}

#[derive(Clone, Debug)]
pub struct DualClusterSet {
    /// Cluster label per face.
    pub labels: Vec<usize>,
    pub sizes: Vec<usize>,
    pub adjacency: Vec<BTreeSet<usize>>,
}

impl DualClusterSet {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    pub fn members(&self, c: usize) -> Vec<usize> {
        (0..self.labels.len()).filter(|&f| self.labels[f] == c).collect()
    }
}

/// Components of faces joined across edges absent from `w`. Labels are
/// assigned in row-major face order (by `m`, then `n`).
pub fn dual_clusters(w: &LoopConfig) -> DualClusterSet {
    clusters_of(w.lattice(), w.edges())
}

pub fn clusters_of(lat: &Lattice, blocked: &EdgeSet) -> DualClusterSet {
    let nf = lat.num_faces();
    let mut order: Vec<usize> = (0..nf).collect();
    order.sort_by_key(|&f| {
        let c = lat.face(f);
        (c.m, c.n)
    });
    let mut labels = vec![usize::MAX; nf];
    let mut sizes = Vec::new();
    for &start in &order {
        if labels[start] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        labels[start] = id;
        let mut size = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(f) = queue.pop_front() {
            size += 1;
            for s in 0..6 {
                if let Some(g) = dual_step(lat, blocked, f, s) {
                    if labels[g] == usize::MAX {
                        labels[g] = id;
                        queue.push_back(g);
                    }
                }
            }
        }
        sizes.push(size);
    }
    let mut adjacency = vec![BTreeSet::new(); sizes.len()];
    for e in blocked.iter() {
        if let [Some(f), Some(g)] = lat.edge_faces(e) {
            let (a, b) = (labels[f], labels[g]);
            if a != b {
                adjacency[a].insert(b);
                adjacency[b].insert(a);
            }
        }
    }
    DualClusterSet { labels, sizes, adjacency }
}

fn check_radii(lat: &Lattice, r: f64, outer: f64) -> Result<()> {
    if !(r >= 0.0) || !(outer > r + 1.0 / SQRT3) {
        return Err(Error::InvalidParameter(format!(
            "radii must satisfy 0 ≤ r and R − r > edge length, got r = {r}, R = {outer}"
        )));
    }
    if let Some(k) = lat.k() {
        if outer >= k as f64 / 2.0 {
            return Err(Error::InvalidParameter(format!("outer radius {outer} must be below k/2 = {}", k as f64 / 2.0)));
        }
    }
    Ok(())
}

/// Branches of a strand in the annulus `B(p, outer) ∖ B(p, r)`: maximal
/// stretches that run from an edge meeting `B(p, r)` to an edge leaving
/// `B(p, outer)`, in either direction.
pub fn branch_count(lat: &Lattice, s: &Strand, p: Point, r: f64, outer: f64) -> Result<usize> {
    check_radii(lat, r, outer)?;
    Ok(branch_count_unchecked(lat, s, p, r, outer))
}

fn branch_count_unchecked(lat: &Lattice, s: &Strand, p: Point, r: f64, outer: f64) -> usize {
    let mut states = Vec::new();
    for &e in &s.edges {
        let [a, b] = lat.edge_ends(e);
        let dmin = lat.edge_distance(p, e);
        let dmax = lat.distance(p, lat.vertex(a).position()).max(lat.distance(p, lat.vertex(b).position()));
        let st = if dmin < r {
            Some(false)
        } else if dmax >= outer {
            Some(true)
        } else {
            None
        };
        if let Some(x) = st {
            if states.last() != Some(&x) {
                states.push(x);
            }
        }
    }
    if states.len() < 2 {
        return 0;
    }
    let mut changes = states.len() - 1;
    if s.closed && states[0] != states[states.len() - 1] {
        changes += 1;
    }
    changes
}

/// No loop meeting `B(R)` has a branch in `B(R/2) ∖ B(r)`.
pub fn event_l(lat: &Lattice, loops: &LoopSet, p: Point, r: f64, big_r: f64) -> Result<bool> {
    check_radii(lat, r, big_r / 2.0)?;
    Ok(loops
        .loops()
        .filter(|s| s.meets_ball(lat, p, big_r))
        .all(|s| branch_count_unchecked(lat, s, p, r, big_r / 2.0) == 0))
}

/// No path meeting `B(R)` has more than two branches in `B(R/2) ∖ B(r)`.
pub fn event_p(lat: &Lattice, loops: &LoopSet, p: Point, r: f64, big_r: f64) -> Result<bool> {
    check_radii(lat, r, big_r / 2.0)?;
    Ok(loops
        .paths()
        .filter(|s| s.meets_ball(lat, p, big_r))
        .all(|s| branch_count_unchecked(lat, s, p, r, big_r / 2.0) <= 2))
}

/// Whether `f` is an r-coarse trifurcation: removing the part of its dual
/// cluster reachable from `f` inside `B(f, r)` leaves at least three
/// components reaching distance `far` from `f`.
pub fn detect_trifurcation(lat: &Lattice, blocked: &EdgeSet, clusters: &DualClusterSet, f: usize, r: f64, far: f64) -> Result<bool> {
    Ok(far_components(lat, blocked, clusters, f, r, far)? >= 3)
}

/// Trifurcation test on a torus loop configuration, with "far" meaning
/// distance k/2.
pub fn trifurcation_at(w: &LoopConfig, clusters: &DualClusterSet, f: usize, r: f64) -> Result<bool> {
    let k = w.lattice().k().ok_or_else(|| Error::Precondition("far threshold needed on a window".into()))?;
    detect_trifurcation(w.lattice(), w.edges(), clusters, f, r, k as f64 / 2.0)
}

/// Number of far-reaching components of `C*(f) ∖ C*_r(f)`.
pub fn far_components(lat: &Lattice, blocked: &EdgeSet, clusters: &DualClusterSet, f: usize, r: f64, far: f64) -> Result<usize> {
    if let Some(k) = lat.k() {
        if !(r < k as f64 / 4.0) {
            return Err(Error::InvalidParameter(format!("r = {r} must be below k/4")));
        }
    }
    let label = clusters.labels[f];
    let c = lat.face(f).center();
    let in_ball = |g: usize| lat.distance(c, lat.face(g).center()) < r;
    let nf = lat.num_faces();
    let mut core = vec![false; nf];
    core[f] = true;
    let mut queue = VecDeque::from([f]);
    while let Some(g) = queue.pop_front() {
        for s in 0..6 {
            if let Some(h) = dual_step(lat, blocked, g, s) {
                if !core[h] && in_ball(h) {
                    core[h] = true;
                    queue.push_back(h);
                }
            }
        }
    }
    let mut seen = core.clone();
    let mut count = 0;
    for start in 0..nf {
        if seen[start] || clusters.labels[start] != label {
            continue;
        }
        seen[start] = true;
        let mut reaches = false;
        let mut queue = VecDeque::from([start]);
        while let Some(g) = queue.pop_front() {
            if lat.distance(c, lat.face(g).center()) >= far - 1e-9 {
                reaches = true;
            }
            for s in 0..6 {
                if let Some(h) = dual_step(lat, blocked, g, s) {
                    if !seen[h] {
                        seen[h] = true;
                        queue.push_back(h);
                    }
                }
            }
        }
        count += reaches as usize;
    }
    Ok(count)
}

/// Probe faces centered at `2r(a + bω)` inside `B(center, radius)`.
pub fn probe_grid(lat: &Lattice, center: FaceCoord, r: usize, radius: f64) -> Vec<usize> {
    let step = 2 * r as i32;
    let span = (radius / step as f64).ceil() as i32 + 2;
    let mut out = BTreeSet::new();
    for a in -span..=span {
        for b in -span..=span {
            let g = center.offset(step * a, step * b);
            if (g.center() - center.center()).norm() < radius {
                if let Some(i) = lat.face_index(g) {
                    out.insert(i);
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Planar faces whose closed hexagon meets the circle `|z − center| = radius`.
fn sphere_coords(center: Point, radius: f64) -> Vec<FaceCoord> {
    let span = (radius / 0.8).ceil() as i32 + 2;
    let (cn, cm) = ((center.re - center.im / SQRT3).round() as i32, (2.0 * center.im / SQRT3).round() as i32);
    let mut out = Vec::new();
    for n in cn - span - (span / 2)..=cn + span + span / 2 {
        for m in cm - span..=cm + span {
            let g = FaceCoord::new(n, m);
            let fc = g.center() - center;
            let near = hexagon_distance(fc);
            let farthest = (0..6)
                .map(|i| (fc + Point::from_polar(1.0 / SQRT3, (30.0 + 60.0 * i as f64).to_radians())).norm())
                .fold(0.0, f64::max);
            if near <= radius && farthest >= radius {
                out.push(g);
            }
        }
    }
    out
}

/// Faces whose closed hexagon meets the circle `|z − center| = radius`.
pub fn sphere_face_count(center: Point, radius: f64) -> usize {
    sphere_coords(center, radius).len()
}

/// Face indices meeting the circle; on a torus the radius must stay below
/// k/2 so that distinct planar faces stay distinct.
pub fn sphere_faces(lat: &Lattice, center: Point, radius: f64) -> Result<Vec<usize>> {
    if let Some(k) = lat.k() {
        if !(radius + 1.0 < k as f64 / 2.0) {
            return Err(Error::InvalidParameter(format!("sphere radius {radius} too large for k = {k}")));
        }
    }
    let set: BTreeSet<usize> = sphere_coords(center, radius)
        .into_iter()
        .filter_map(|g| lat.face_index(lat.k().map_or(g, |k| g.reduce(k))))
        .collect();
    Ok(set.into_iter().collect())
}

/// Per cluster: whether it wraps around the torus or has diameter at least
/// k/2, the finite-volume stand-in for an infinite cluster.
pub fn infinite_clusters(lat: &Lattice, blocked: &EdgeSet, clusters: &DualClusterSet) -> Result<Vec<bool>> {
    let k = lat.k().ok_or_else(|| Error::Precondition("infinite clusters are defined on a torus".into()))?;
    let half = k as f64 / 2.0;
    let mut out = vec![false; clusters.count()];
    let mut lift: Vec<Option<FaceCoord>> = vec![None; lat.num_faces()];
    for c in 0..clusters.count() {
        let members = clusters.members(c);
        let start = members[0];
        lift[start] = Some(lat.face(start));
        let mut queue = VecDeque::from([start]);
        let mut wraps = false;
        let mut lifted = Vec::with_capacity(members.len());
        while let Some(g) = queue.pop_front() {
            let lg = lift[g].unwrap();
            lifted.push(lg.center());
            for s in 0..6 {
                if let Some(h) = dual_step(lat, blocked, g, s) {
                    let lh = lg.step(s);
                    match lift[h] {
                        None => {
                            lift[h] = Some(lh);
                            queue.push_back(h);
                        }
                        Some(x) if x != lh => wraps = true,
                        _ => {}
                    }
                }
            }
        }
        out[c] = wraps || {
            let (mut lo, mut hi) = (lifted[0], lifted[0]);
            for p in &lifted {
                lo = Point::new(lo.re.min(p.re), lo.im.min(p.im));
                hi = Point::new(hi.re.max(p.re), hi.im.max(p.im));
            }
            if (hi.re - lo.re).max(hi.im - lo.im) >= half {
                true
            } else if (hi - lo).norm() < half {
                false
            } else {
                lifted.iter().any(|a| lifted.iter().any(|b| (a - b).norm() >= half))
            }
        };
    }
    Ok(out)
}

/// Both sides of the deterministic bound: r-coarse trifurcations among the
/// probe grid in `B(R)`, and faces of infinite clusters meeting `∂B(R + r)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TrifurcationBound {
    pub trifurcations: usize,
    pub probes: usize,
    pub sphere_faces: usize,
}

impl TrifurcationBound {
    pub fn holds(&self) -> bool {
        self.trifurcations <= self.sphere_faces
    }
}

/// Evaluates the bound around `center`; needs `2R + r < k/2` so that far
/// components from any probe cross the sphere.
pub fn trifurcation_bound(w: &LoopConfig, clusters: &DualClusterSet, center: FaceCoord, r: usize, big_r: f64) -> Result<TrifurcationBound> {
    let lat = w.lattice();
    let k = lat.k().ok_or_else(|| Error::Precondition("the bound is evaluated on a torus".into()))?;
    if !(2.0 * big_r + r as f64 + 1.0 < k as f64 / 2.0) || r == 0 {
        return Err(Error::InvalidParameter(format!("need r ≥ 1 and 2R + r < k/2, got r = {r}, R = {big_r}, k = {k}")));
    }
    let probes = probe_grid(lat, center, r, big_r);
    let mut trifurcations = 0;
    for &f in &probes {
        trifurcations += trifurcation_at(w, clusters, f, r as f64)? as usize;
    }
    let infinite = infinite_clusters(lat, w.edges(), clusters)?;
    let sphere = sphere_faces(lat, center.center(), big_r + r as f64)?;
    let sphere_faces = sphere.iter().filter(|&&f| infinite[clusters.labels[f]]).count();
    Ok(TrifurcationBound { trifurcations, probes: probes.len(), sphere_faces })
}

#[derive(Clone, Debug, Serialize)]
pub struct TopologyReport {
    pub sample: usize,
    pub cycles: usize,
    pub winding: usize,
    pub max_cycle_length: usize,
    pub clusters: usize,
    pub trifurcations: usize,
    pub probes: usize,
    /// One character per probed face: `1` for a trifurcation.
    pub flags: String,
}

impl TopologyReport {
    /// Summary of a torus loop configuration, with trifurcations probed at
    /// `probes` for radius `r`.
    pub fn new(sample: usize, w: &LoopConfig, probes: &[usize], r: f64) -> Result<Self> {
        let loops = extract_loops(w)?;
        let clusters = dual_clusters(w);
        let mut flags = String::with_capacity(probes.len());
        for &f in probes {
            flags.push(if trifurcation_at(w, &clusters, f, r)? { '1' } else { '0' });
        }
        Ok(TopologyReport {
            sample,
            cycles: loops.strands.len(),
            winding: loops.strands.iter().filter(|s| s.homology != (0, 0)).count(),
            max_cycle_length: loops.strands.iter().map(Strand::len).max().unwrap_or(0),
            clusters: clusters.count(),
            trifurcations: flags.bytes().filter(|&b| b == b'1').count(),
            probes: probes.len(),
            flags,
        })
    }
}

/// Set of 3 disjoint non-empty blocks of a ground set, as bitmasks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ThreePartition {
    parts: [u32; 3],
}

impl ThreePartition {
    pub fn new(a: u32, b: u32, c: u32) -> Result<Self> {
        if a == 0 || b == 0 || c == 0 || a & b != 0 || a & c != 0 || b & c != 0 {
            return Err(Error::InvalidParameter("blocks must be non-empty and disjoint".into()));
        }
        let mut parts = [a, b, c];
        parts.sort_unstable();
        Ok(ThreePartition { parts })
    }

    pub fn parts(&self) -> [u32; 3] {
        self.parts
    }

    pub fn ground(&self) -> u32 {
        self.parts[0] | self.parts[1] | self.parts[2]
    }
}

/// Some block of `q` has its two complementary blocks inside a block of `p`.
pub fn partitions_compatible(p: &ThreePartition, q: &ThreePartition) -> Result<bool> {
    if p.ground() != q.ground() {
        return Err(Error::InvalidParameter("partitions of different ground sets".into()));
    }
    let s = q.ground();
    Ok(q.parts.iter().any(|&qj| p.parts.iter().any(|&pi| (s & !qj) & !pi == 0)))
}

/// All 3-partitions of `{0, …, n−1}`.
pub fn all_three_partitions(n: usize) -> Vec<ThreePartition> {
    let mut out = BTreeSet::new();
    let mut labels = vec![0u8; n];
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        for l in labels.iter_mut() {
            *l = (c % 3) as u8;
            c /= 3;
        }
        let mut parts = [0u32; 3];
        for (i, &l) in labels.iter().enumerate() {
            parts[l as usize] |= 1 << i;
        }
        if let Ok(p) = ThreePartition::new(parts[0], parts[1], parts[2]) {
            out.insert(p);
        }
    }
    out.into_iter().collect()
}

/// Largest pairwise-compatible family of distinct 3-partitions of an
/// `n`-element set, with a witness family.
pub fn max_compatible_family(n: usize) -> Result<(usize, Vec<ThreePartition>)> {
    if !(3..=7).contains(&n) {
        return Err(Error::InvalidParameter(format!("|S| = {n} outside 3..=7")));
    }
    let parts = all_three_partitions(n);
    let m = parts.len();
    let adj: Vec<Vec<bool>> = (0..m)
        .map(|i| (0..m).map(|j| i != j && partitions_compatible(&parts[i], &parts[j]).unwrap()).collect())
        .collect();
    let mut best = Vec::new();
    let mut current = Vec::new();
    let cand: Vec<usize> = (0..m).collect();
    clique(&adj, &mut current, cand, &mut best);
    let family = best.iter().map(|&i| parts[i]).collect();
    Ok((best.len(), family))
}

fn clique(adj: &[Vec<bool>], current: &mut Vec<usize>, cand: Vec<usize>, best: &mut Vec<usize>) {
    if current.len() > best.len() {
        *best = current.clone();
    }
    if current.len() + cand.len() <= best.len() {
        return;
    }
    for (idx, &v) in cand.iter().enumerate() {
        if current.len() + (cand.len() - idx) <= best.len() {
            return;
        }
        let next: Vec<usize> = cand[idx + 1..].iter().copied().filter(|&u| adj[v][u]).collect();
        current.push(v);
        clique(adj, current, next, best);
        current.pop();
    }
}
