//! Superpositions of two matchings and their alternated cycles.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::height::{heights_from_edges, increment, increment_cap};
use crate::hexlattice::{FaceCoord, Lattice, Point};
use crate::matching::{DimerConfig, EdgeConfig, EdgeSet};
use crate::swapper::{generate_crossing_window, WindowSpec};
use crate::topology::{enclosed_faces, strands_of, Strand};

#[derive(Clone, Debug)]
pub struct DoubleDimerConfig {
    m: DimerConfig,
    m2: DimerConfig,
    doubled: EdgeSet,
    cycles: Vec<Strand>,
}

impl DoubleDimerConfig {
    pub fn lattice(&self) -> &Arc<Lattice> {
        self.m.lattice()
    }

    pub fn first(&self) -> &DimerConfig {
        &self.m
    }

    pub fn second(&self) -> &DimerConfig {
        &self.m2
    }

    pub fn doubled(&self) -> &EdgeSet {
        &self.doubled
    }

    pub fn cycles(&self) -> &[Strand] {
        &self.cycles
    }

    /// The two alternating halves of cycle `i`: edges from the first and
    /// from the second matching.
    pub fn halves(&self, i: usize) -> (Vec<usize>, Vec<usize>) {
        self.cycles[i].edges.iter().partition(|&&e| self.m.contains(e))
    }

    /// Contractible cycles of diameter below k/2 (all contractible cycles on
    /// a window).
    pub fn small_cycles(&self) -> impl Iterator<Item = &Strand> {
        let limit = self.lattice().k().map_or(f64::INFINITY, |k| k as f64 / 2.0);
        self.cycles.iter().filter(move |c| c.is_contractible_loop() && c.diameter() < limit)
    }

    /// Homology class counts of the cycles.
    pub fn homology_histogram(&self) -> BTreeMap<(i32, i32), usize> {
        let mut h = BTreeMap::new();
        for c in &self.cycles {
            *h.entry(c.homology).or_insert(0) += 1;
        }
        h
    }
}

fn same_lattice(a: &Arc<Lattice>, b: &Arc<Lattice>) -> bool {
    Arc::ptr_eq(a, b)
        || (a.shape() == b.shape()
            && a.num_faces() == b.num_faces()
            && (0..a.num_faces()).all(|f| a.face(f) == b.face(f)))
}

pub fn union_decompose(m: &DimerConfig, m2: &DimerConfig) -> Result<DoubleDimerConfig> {
    if !same_lattice(m.lattice(), m2.lattice()) {
        return Err(Error::InvalidParameter("matchings live on different lattices".into()));
    }
    m.validate()?;
    m2.validate()?;
    let lat = m.lattice();
    let doubled = m.edges().and(m2.edges());
    let diff = m.edges().xor(m2.edges());
    let cycles = strands_of(lat, &diff).strands;
    for c in &cycles {
        if !c.closed || c.len() % 2 != 0 {
            return Err(Error::Invariant("symmetric difference is not a union of even cycles".into()));
        }
    }
    Ok(DoubleDimerConfig { m: m.clone(), m2: m2.clone(), doubled, cycles })
}

fn assemble(d: &DoubleDimerConfig, choice: impl Fn(usize) -> bool) -> Result<(DimerConfig, DimerConfig)> {
    let lat = d.lattice().clone();
    let mut a = d.doubled.clone();
    let mut b = d.doubled.clone();
    for i in 0..d.cycles.len() {
        let (h1, h2) = d.halves(i);
        let (x, y) = if choice(i) { (h1, h2) } else { (h2, h1) };
        x.into_iter().for_each(|e| a.insert(e));
        y.into_iter().for_each(|e| b.insert(e));
    }
    Ok((DimerConfig::new(lat.clone(), a)?, DimerConfig::new(lat, b)?))
}

/// Splits every cycle between the two outputs by an independent fair coin.
pub fn resample_xor<R: RngCore + ?Sized>(rng: &mut R, d: &DoubleDimerConfig) -> Result<(DimerConfig, DimerConfig)> {
    let coins: Vec<bool> = (0..d.cycles.len()).map(|_| rng.gen()).collect();
    assemble(d, |i| coins[i])
}

/// All `2^c` equally likely outcomes of [`resample_xor`].
pub fn resample_outcomes(d: &DoubleDimerConfig) -> Result<Vec<(DimerConfig, DimerConfig)>> {
    let c = d.cycles.len();
    if c > 20 {
        return Err(Error::TooLarge(format!("{c} cycles")));
    }
    (0..1u32 << c).map(|bits| assemble(d, |i| bits >> i & 1 == 1)).collect()
}

/// Small contractible cycles whose winding number around `f` is non-zero.
pub fn count_surrounding_cycles(d: &DoubleDimerConfig, f: FaceCoord) -> usize {
    let p = f.center();
    d.small_cycles().filter(|c| c.winding_number(d.lattice(), p) != 0).count()
}

/// Per-face number of small contractible cycles enclosing the face.
pub fn surrounding_counts(d: &DoubleDimerConfig) -> Vec<u32> {
    let lat = d.lattice();
    let mut counts = vec![0u32; lat.num_faces()];
    for c in d.small_cycles() {
        for f in enclosed_faces(lat, c) {
            counts[f] += 1;
        }
    }
    counts
}

/// The surrounding cycle with the fewest enclosed faces, ties by the least
/// enclosed face coordinate.
pub fn innermost_surrounding(d: &DoubleDimerConfig, f: FaceCoord) -> Option<&Strand> {
    let lat = d.lattice();
    let p = f.center();
    d.small_cycles()
        .filter(|c| c.winding_number(lat, p) != 0)
        .map(|c| {
            let inside = enclosed_faces(lat, c);
            let least = inside.iter().map(|&g| lat.face(g)).map(|g| (g.m, g.n)).min();
            ((inside.len(), least), c)
        })
        .min_by(|a, b| a.0.cmp(&b.0))
        .map(|(_, c)| c)
}

#[derive(Clone, Debug, Serialize)]
pub struct DoubleDimerReport {
    pub sample: usize,
    pub doubled: usize,
    pub cycles: usize,
    pub homology: String,
    pub surrounding: usize,
}

impl DoubleDimerReport {
    pub fn new(sample: usize, d: &DoubleDimerConfig, probe: FaceCoord) -> Self {
        let homology = d
            .homology_histogram()
            .iter()
            .map(|(&(p, q), n)| format!("({p};{q})x{n}"))
            .collect::<Vec<_>>()
            .join(" ");
        DoubleDimerReport {
            sample,
            doubled: d.doubled.count(),
            cycles: d.cycles.len(),
            homology,
            surrounding: count_surrounding_cycles(d, probe),
        }
    }
}

fn check_cycle_collection(lat: &Lattice, w: &EdgeSet, what: &str) -> Result<()> {
    for v in 0..lat.num_vertices() {
        let deg = lat.vertex_edges(v).iter().filter(|&&e| w.contains(e)).count();
        if deg != 0 && deg != 2 {
            return Err(Error::InvalidConfig(format!("{what}: vertex {} has degree {deg}", lat.vertex(v))));
        }
    }
    if w.iter().any(|e| lat.is_boundary_edge(e)) {
        return Err(Error::InvalidConfig(format!("{what} uses a boundary edge")));
    }
    Ok(())
}

/// `w ⊕ Γ` for a cycle collection `w` and a simple circuit `Γ`.
pub fn xor_circuit(lat: &Lattice, w: &EdgeSet, gamma: &EdgeSet) -> Result<EdgeSet> {
    check_cycle_collection(lat, w, "w")?;
    check_cycle_collection(lat, gamma, "circuit")?;
    let pieces = strands_of(lat, gamma).strands;
    if pieces.len() != 1 {
        return Err(Error::InvalidConfig(format!("circuit has {} components", pieces.len())));
    }
    let out = w.xor(gamma);
    check_cycle_collection(lat, &out, "w ⊕ circuit")?;
    Ok(out)
}

/// Whether some cycle of `w` has diameter at least `r` and surrounds `p`.
pub fn has_long_surrounding_loop(lat: &Lattice, w: &EdgeSet, p: Point, r: f64) -> bool {
    strands_of(lat, w)
        .strands
        .iter()
        .any(|c| c.closed && c.diameter() >= r && c.winding_number(lat, p) != 0)
}

/// Checks that either `w` or `w ⊕ Γ` has a loop of diameter at least `r`
/// surrounding the face `f0`, for a circuit surrounding `B(f0, r)`.
pub fn xor_trick_holds(lat: &Lattice, w: &EdgeSet, gamma: &EdgeSet, f0: FaceCoord, r: f64) -> Result<bool> {
    let x = xor_circuit(lat, w, gamma)?;
    let circuit = &strands_of(lat, gamma).strands[0];
    let inside = enclosed_faces(lat, circuit);
    let p = f0.center();
    let ball = lat.faces_in_ball(p, r);
    if !ball.iter().all(|f| inside.contains(f)) {
        return Err(Error::Precondition(format!("circuit does not surround B({f0}, {r})")));
    }
    Ok(has_long_surrounding_loop(lat, w, p, r) || has_long_surrounding_loop(lat, &x, p, r))
}

/// A cycle collection `w` on a window with a circuit `gamma` surrounding
/// `B(f0, r)`, where `gamma` alternates with respect to the dimer complement
/// of `w` so that `w ⊕ gamma` is again fully packed.
#[derive(Clone, Debug)]
pub struct XorFixture {
    pub lattice: Arc<Lattice>,
    pub w: EdgeSet,
    pub gamma: EdgeSet,
    pub f0: FaceCoord,
    pub r: f64,
    /// Pairs of windows drawn before one had a cycle around `f0`.
    pub attempts: usize,
}

impl XorFixture {
    pub fn holds(&self) -> Result<bool> {
        xor_trick_holds(&self.lattice, &self.w, &self.gamma, self.f0, self.r)
    }
}

/// Dimer set of `max(h, a − D(·, f0))`, where `D(f, f0)` is the largest
/// height gain from `f` to `f0` and `h` the height of `m`. `None` if the
/// raised region reaches a face next to the window boundary.
fn raise_cone(lat: &Arc<Lattice>, m: &EdgeSet, f0: usize, lift: i64) -> Result<Option<EdgeSet>> {
    let h = heights_from_edges(lat, m, lat.face(f0))?;
    let nf = lat.num_faces();
    let mut dist = vec![i64::MAX; nf];
    dist[f0] = 0;
    let mut heap = BinaryHeap::from([Reverse((0i64, f0))]);
    while let Some(Reverse((d, g))) = heap.pop() {
        if d > dist[g] {
            continue;
        }
        for s in 0..6 {
            let Some(f) = lat.face_adj(g)[s] else { continue };
            if !lat.face_is_interior(f) {
                continue;
            }
            // step f -> g crosses slot s + 3 of f
            let nd = d + increment_cap((s + 3) % 6);
            if nd < dist[f] {
                dist[f] = nd;
                heap.push(Reverse((nd, f)));
            }
        }
    }
    let a = h.value(f0) + lift;
    let mut raised = vec![false; nf];
    let mut hp = vec![i64::MIN; nf];
    for f in (0..nf).filter(|&f| lat.face_is_interior(f)) {
        let cone = a - dist[f];
        raised[f] = cone > h.value(f);
        hp[f] = h.value(f).max(cone);
    }
    let mut out = m.clone();
    for f in (0..nf).filter(|&f| raised[f]) {
        for s in 0..6 {
            let (Some(g), Some(e)) = (lat.face_adj(f)[s], lat.face_edges(f)[s]) else { return Ok(None) };
            if !lat.face_is_interior(g) || lat.is_boundary_edge(e) {
                return Ok(None);
            }
            out.set(e, hp[g] - hp[f] == increment(s, true));
        }
    }
    Ok(Some(out))
}

/// Draws a flip-randomized loop window without crossings, raises the
/// height of its dimer complement under a cone at a face near the center,
/// and takes a random level line around that face as the circuit, with a
/// random radius inside it.
pub fn random_xor_fixture(size: usize, seed: u64) -> Result<XorFixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempts in 1..=64 {
        let mut spec = WindowSpec::new(size, size, 0, rng.gen());
        spec.flips_per_face = rng.gen_range(0.0..8.0);
        let cfg = generate_crossing_window(&spec)?;
        let lat = cfg.lattice().clone();
        let w = cfg.edges().clone();
        let m = w.complement();
        let c = cfg.center();
        let f0 = FaceCoord::new(c.n + rng.gen_range(-2..=2), c.m + rng.gen_range(-2..=2));
        let Some(fi) = lat.face_index(f0) else { continue };
        let Some(m2) = raise_cone(&lat, &m, fi, 3 * rng.gen_range(1..=5))? else { continue };
        DimerConfig::new(lat.clone(), m2.clone())
            .map_err(|e| Error::Invariant(format!("raised cone is not a matching: {e}")))?;
        let p = f0.center();
        let around: Vec<Strand> =
            strands_of(&lat, &m.xor(&m2)).strands.into_iter().filter(|s| s.closed && s.winding_number(&lat, p) != 0).collect();
        if around.is_empty() {
            continue;
        }
        let gamma_strand = &around[rng.gen_range(0..around.len())];
        let clearance = gamma_strand.edges.iter().map(|&e| lat.edge_distance(p, e)).fold(f64::INFINITY, f64::min);
        if clearance < 2.0 {
            continue;
        }
        let r = rng.gen_range(1.0..clearance - 0.5);
        let gamma = gamma_strand.edge_set(lat.num_edges());
        return Ok(XorFixture { lattice: lat, w, gamma, f0, r, attempts });
    }
    Err(Error::Precondition("no level line around the center in 64 draws".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
use crate::hexlattice::EdgeType;

    #[test]
    fn identical_matchings() {
        let lat = Arc::new(Lattice::torus(4).unwrap());
        let m = DimerConfig::all_of_type(lat, EdgeType::A);
        let d = union_decompose(&m, &m).unwrap();
        assert_eq!(d.cycles().len(), 0);
        assert_eq!(d.doubled().count(), 16);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (a, b) = resample_xor(&mut rng, &d).unwrap();
        assert_eq!(a.edges(), m.edges());
        assert_eq!(b.edges(), m.edges());
        assert_eq!(count_surrounding_cycles(&d, FaceCoord::new(0, 0)), 0);
    }

    #[test]
    fn frozen_pair_on_k2() {
        let lat = Arc::new(Lattice::torus(2).unwrap());
        let a = DimerConfig::all_of_type(lat.clone(), EdgeType::A);
        let b = DimerConfig::all_of_type(lat, EdgeType::B);
        let d = union_decompose(&a, &b).unwrap();
        assert!(!d.cycles().is_empty());
        for c in d.cycles() {
            assert_eq!(c.len() % 2, 0);
            assert_ne!(c.homology, (0, 0));
        }
        assert_eq!(resample_outcomes(&d).unwrap().len(), 1 << d.cycles().len());
    }

    #[test]
    fn hexagon_cycle_surrounds() {
        let lat = Arc::new(Lattice::torus(6).unwrap());
        let m = crate::glauber::initial_config(&lat, (0, 0)).unwrap();
        let fi = (0..lat.num_faces()).find(|&g| m.is_flippable(g) && lat.face(g) != FaceCoord::new(0, 0)).unwrap();
        let f = lat.face(fi);
        let m2 = m.flip(fi);
        let d = union_decompose(&m, &m2).unwrap();
        assert_eq!(d.cycles().len(), 1);
        assert_eq!(count_surrounding_cycles(&d, f), 1);
        assert_eq!(count_surrounding_cycles(&d, FaceCoord::new(0, 0)), 0);
        let counts = surrounding_counts(&d);
        assert_eq!(counts.iter().sum::<u32>(), 1);
        assert_eq!(counts[lat.face_index(f).unwrap()], 1);
        assert!(innermost_surrounding(&d, f).is_some());
        let outs = resample_outcomes(&d).unwrap();
        assert_eq!(outs.len(), 2);
    }

    #[test]
    fn xor_fixtures_hold() {
        for seed in 0..5 {
            let fx = random_xor_fixture(24, seed).unwrap();
            assert!(fx.holds().unwrap());
            assert_eq!(xor_circuit(&fx.lattice, &fx.w, &fx.w).unwrap_err().to_string().contains("circuit"), true);
        }
    }
}
