#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use hexloop::hexlattice::Point;
use hexloop::matching::EdgeSet;
use hexloop::swapper::{
    eligible_swap_pairs, generate_crossing_window, in_unglued_class, paths_inside_area, swap_paths, swap_preconditions,
    unglue, unglue_preconditions, CrossingConfig, StepKind, SwapRadii, UnglueCase, WindowSpec,
};
use hexloop::{EdgeConfig, Lattice};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct SwapFixture {
    pub cfg: CrossingConfig,
    pub pair: (usize, usize),
}

/// Window with 2 to 4 crossings and a random flip density in `[0, max_flips)`;
/// `None` when no pair of paths is eligible.
pub fn swap_fixture(width: usize, height: usize, radii: SwapRadii, max_flips: f64, seed: u64) -> Option<SwapFixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = WindowSpec {
        width,
        height,
        n_paths: rng.gen_range(2..=4),
        flips_per_face: max_flips * rng.gen::<f64>(),
        frozen: radii.frozen_rings(),
        seed: rng.gen(),
    };
    let cfg = generate_crossing_window(&spec).ok()?;
    let pairs = eligible_swap_pairs(&cfg, radii);
    let pair = *pairs.get(rng.gen_range(0..pairs.len().max(1)))?;
    Some(SwapFixture { cfg, pair })
}

/// Window with 2 to 4 crossings, re-centered at the flippable face nearest
/// the middle; `None` when the unglue hypotheses fail.
pub fn unglue_fixture(width: usize, height: usize, r: f64, big_r: f64, max_flips: f64, seed: u64) -> Option<CrossingConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = WindowSpec::new(width, height, rng.gen_range(2..=4), rng.gen());
    spec.flips_per_face = max_flips * rng.gen::<f64>();
    let base = generate_crossing_window(&spec).ok()?;
    let cfg = base.with_center(base.nearest_flippable()?).ok()?;
    unglue_preconditions(&cfg, r, big_r).ok()?;
    Some(cfg)
}

fn in_face_ball(lat: &Lattice, f: usize, p: Point, r: f64) -> bool {
    lat.face_is_interior(f) && (lat.face(f).center() - p).norm() < r
}

fn borders(lat: &Lattice, f: usize, edges: &EdgeSet) -> bool {
    lat.face_edges(f).iter().flatten().any(|&e| edges.contains(e))
}

/// Shortest face sequence from a face bordering path `a` to one bordering
/// path `b` inside `B(p, r)`, crossing only absent edges; counted in steps.
pub fn dual_distance(cfg: &CrossingConfig, a: usize, b: usize, p: Point, r: f64) -> Option<usize> {
    let lat = cfg.lattice();
    let ea = cfg.paths()[a].edge_set(lat.num_edges());
    let eb = cfg.paths()[b].edge_set(lat.num_edges());
    let mut dist = vec![usize::MAX; lat.num_faces()];
    let mut queue = VecDeque::new();
    for f in (0..lat.num_faces()).filter(|&f| in_face_ball(lat, f, p, r) && borders(lat, f, &ea)) {
        dist[f] = 1;
        queue.push_back(f);
    }
    while let Some(f) = queue.pop_front() {
        if borders(lat, f, &eb) {
            return Some(dist[f] + 1);
        }
        for s in 0..6 {
            let (Some(e), Some(g)) = (lat.face_edges(f)[s], lat.face_adj(f)[s]) else { continue };
            if in_face_ball(lat, g, p, r) && !cfg.edges().contains(e) && dist[g] == usize::MAX {
                dist[g] = dist[f] + 1;
                queue.push_back(g);
            }
        }
    }
    None
}

fn edge_distance(lat: &Lattice, p: Point, e: usize) -> f64 {
    let [a, b] = lat.edge_ends(e);
    let (a, b) = (lat.vertex(a).position(), lat.vertex(b).position());
    let ab = b - a;
    let t = (((p - a).re * ab.re + (p - a).im * ab.im) / ab.norm_sqr()).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn bottom(lat: &Lattice, e: usize, mid: f64) -> bool {
    lat.edge(e).midpoint().im < mid
}

/// Every property of one swap: success, flip bound, locality, replayed
/// flips, pairing, shrinking dual paths and the non-parallel witness.
pub fn check_swap(fx: &SwapFixture, radii: SwapRadii) -> Result<usize, String> {
    let cfg = &fx.cfg;
    let (i1, i2) = fx.pair;
    let lat = cfg.lattice();
    let p = cfg.center_point();
    let out = swap_paths(cfg, i1, i2, radii).map_err(|e| format!("swap failed: {e}"))?;

    let bound = (0..lat.num_faces()).filter(|&f| in_face_ball(lat, f, p, radii.r1)).count() + 1;
    if out.steps.len() > bound {
        return Err(format!("{} flips exceed {bound}", out.steps.len()));
    }

    let mut w = cfg.loop_config().clone();
    let mut replay = cfg.clone();
    for (i, s) in out.steps.iter().enumerate() {
        let f = lat.face_index(s.face).ok_or("flip outside the window")?;
        if !w.is_flippable(f) {
            return Err(format!("step {i} at {} is not a legal flip", s.face));
        }
        let a = replay.path_with_endpoints(cfg.endpoints(i1)).ok_or("first path lost before the last flip")?;
        let b = replay.path_with_endpoints(cfg.endpoints(i2)).ok_or("second path lost before the last flip")?;
        let d = dual_distance(&replay, a, b, p, radii.r1).ok_or("no dual path in B(r1)")?;
        if d != s.dual_length {
            return Err(format!("step {i}: recorded dual length {} but oracle says {d}", s.dual_length));
        }
        w = w.flip(f);
        if i + 1 < out.steps.len() {
            replay = CrossingConfig::new(w.clone(), cfg.center()).map_err(|e| e.to_string())?;
        }
    }
    if w.edges() != out.config.edges() {
        return Err("replayed flips do not give the output".into());
    }
    if !out.steps.windows(2).all(|s| s[1].dual_length < s[0].dual_length) {
        return Err("dual length did not strictly decrease".into());
    }
    let last = out.steps.last().ok_or("no flips")?;
    if last.kind != StepKind::Base || last.dual_length != 2 {
        return Err("construction did not end with a base flip".into());
    }

    for e in cfg.edges().xor(out.config.edges()).iter() {
        if edge_distance(lat, p, e) >= radii.big_r {
            return Err(format!("edge {} outside B(R) changed", lat.edge(e)));
        }
    }

    let old = cfg.endpoint_pairs();
    let new = out.config.endpoint_pairs();
    let (a, b) = (cfg.endpoints(i1), cfg.endpoints(i2));
    let kept: BTreeSet<_> = old.iter().copied().filter(|&x| x != a && x != b).collect();
    let added: Vec<_> = new.difference(&kept).copied().collect();
    if !kept.is_subset(&new) || added.len() != 2 {
        return Err("other paths were disturbed".into());
    }
    let mid = p.im;
    for &(x, y) in &added {
        let from_a = [x, y].iter().filter(|&&e| e == a.0 || e == a.1).count();
        let from_b = [x, y].iter().filter(|&&e| e == b.0 || e == b.1).count();
        if from_a != 1 || from_b != 1 || bottom(lat, x, mid) != bottom(lat, y, mid) {
            return Err(format!("pair {x}-{y} does not join the two lower or the two upper branches"));
        }
    }

    if cfg.paths().len() >= 3 {
        let ga = out.config.path_with_endpoints(added[0]).unwrap();
        let gb = out.config.path_with_endpoints(added[1]).unwrap();
        if paths_inside_area(&out.config, ga, gb).map_err(|e| e.to_string())?.is_empty() {
            return Err("swapped paths still parallel".into());
        }
    }

    // swapping back restores the pairing whenever it is allowed again
    let ga = out.config.path_with_endpoints(added[0]).unwrap();
    let gb = out.config.path_with_endpoints(added[1]).unwrap();
    if swap_preconditions(&out.config, ga, gb, radii).is_ok() {
        let back = swap_paths(&out.config, ga, gb, radii).map_err(|e| format!("swap back failed: {e}"))?;
        if back.config.endpoint_pairs() != old {
            return Err("swapping back did not restore the pairing".into());
        }
    }
    Ok(out.steps.len())
}

/// Faces of the window joined through absent edges, from `start`.
fn cluster_of(cfg: &CrossingConfig, start: usize) -> Vec<bool> {
    let lat = cfg.lattice();
    let nf = lat.num_interior_faces();
    let mut seen = vec![false; nf];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(f) = queue.pop_front() {
        for s in 0..6 {
            let (Some(g), Some(e)) = (lat.face_adj(f)[s], lat.face_edges(f)[s]) else { continue };
            if g < nf && !cfg.edges().contains(e) && !seen[g] {
                seen[g] = true;
                queue.push_back(g);
            }
        }
    }
    seen
}

fn share_cluster(cfg: &CrossingConfig, a: usize, b: usize) -> bool {
    let lat = cfg.lattice();
    let nf = lat.num_interior_faces();
    let faces = |i: usize| -> BTreeSet<usize> {
        cfg.paths()[i].edges.iter().flat_map(|&e| lat.edge_faces(e)).flatten().filter(|&f| f < nf).collect()
    };
    let fb = faces(b);
    faces(a).into_iter().any(|f| {
        let c = cluster_of(cfg, f);
        fb.iter().any(|&g| c[g])
    })
}

/// Unglue returns a pair bounding a common cluster and not glued, after at
/// most one flip inside `B(R)`.
pub fn check_unglue(cfg: &CrossingConfig, r: f64, big_r: f64) -> Result<UnglueCase, String> {
    let out = unglue(cfg, r, big_r).map_err(|e| format!("unglue failed: {e}"))?;
    let lat = cfg.lattice();
    let diff = cfg.edges().xor(out.config.edges());
    match out.flip {
        None => {
            if diff.count() != 0 {
                return Err("no flip reported but edges changed".into());
            }
        }
        Some(face) => {
            let f = lat.face_index(face).ok_or("flip outside the window")?;
            let sides: EdgeSet = EdgeSet::from_indices(lat.num_edges(), lat.face_edges(f).iter().flatten().copied());
            if diff != sides || !cfg.loop_config().is_flippable(f) {
                return Err(format!("change at {face} is not one flip"));
            }
            if (face.center() - cfg.center_point()).norm() >= big_r {
                return Err(format!("flip {face} outside B(R)"));
            }
        }
    }
    let a = out.config.path_with_endpoints(out.pair[0]).ok_or("first path missing")?;
    let b = out.config.path_with_endpoints(out.pair[1]).ok_or("second path missing")?;
    if !share_cluster(&out.config, a, b) {
        return Err("pair does not bound a common cluster".into());
    }
    if !in_unglued_class(&out.config, a, b).map_err(|e| e.to_string())? {
        return Err("pair is glued".into());
    }
    Ok(out.case)
}
