//! Flip dynamics on the torus within a height-change sector.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::height::{increment, increment_cap};
use crate::hexlattice::Lattice;
use crate::kasteleyn::{edge_probabilities, WeightTriple};
use crate::matching::{DimerConfig, EdgeConfig, EdgeSet};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SectorChoice {
    /// Height change `(h¹, h²)`.
    Fixed(i64, i64),
    /// The admissible sector closest to the slope selected by the weights.
    FreeStart,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub k: usize,
    pub weights: [f64; 3],
    pub sector: SectorChoice,
    pub seed: u64,
    pub sweeps: usize,
    pub burn_in: usize,
    pub thinning: usize,
    #[serde(default)]
    pub lazy: bool,
}

impl SamplerSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidParameter("sampling needs k ≥ 2".into()));
        }
        WeightTriple::new(self.weights[0], self.weights[1], self.weights[2])?;
        Ok(())
    }

    pub fn resolve_sector(&self) -> Result<(i64, i64)> {
        match self.sector {
            SectorChoice::Fixed(i, j) => Ok((i, j)),
            SectorChoice::FreeStart => {
                let w = WeightTriple::new(self.weights[0], self.weights[1], self.weights[2])?;
                let p = edge_probabilities(&w)?;
                Ok(nearest_sector(self.k, [p.0, p.1, p.2]))
            }
        }
    }
}

/// Height change of the sector with `a` A-dimers and `c` C-dimers per row.
pub fn sector_from_counts(k: usize, a: usize, c: usize) -> (i64, i64) {
    (3 * a as i64 - k as i64, 3 * c as i64 - k as i64)
}

/// Per-row dimer counts `(a, b, c)` of a sector, if admissible.
pub fn sector_counts(k: usize, sector: (i64, i64)) -> Option<(usize, usize, usize)> {
    let k = k as i64;
    let (i, j) = sector;
    if (i + k).rem_euclid(3) != 0 || (j + k).rem_euclid(3) != 0 {
        return None;
    }
    let (a, c) = ((i + k) / 3, (j + k) / 3);
    let b = k - a - c;
    (a >= 0 && c >= 0 && b >= 0).then_some((a as usize, b as usize, c as usize))
}

/// Sector whose per-type densities are closest to `p`.
pub fn nearest_sector(k: usize, p: [f64; 3]) -> (i64, i64) {
    let mut best = (f64::INFINITY, (0, 0));
    for a in 0..=k {
        for c in 0..=k - a {
            let b = k - a - c;
            let kf = k as f64;
            let d = (a as f64 / kf - p[0]).powi(2) + (b as f64 / kf - p[1]).powi(2) + (c as f64 / kf - p[2]).powi(2);
            if d < best.0 - 1e-15 {
                best = (d, sector_from_counts(k, a, c));
            }
        }
    }
    best.1
}

/// The configuration of maximal height in a sector, via shortest paths on
/// the torus faces with the seam twisted by the height change.
pub fn initial_config(lat: &Arc<Lattice>, sector: (i64, i64)) -> Result<DimerConfig> {
    let k = lat.k().ok_or_else(|| Error::InvalidParameter("initial configurations need a torus".into()))?;
    if sector_counts(k, sector).is_none() {
        return Err(Error::EmptySector(sector.0, sector.1));
    }
    let (h1, h2) = sector;
    let ki = k as i32;
    let nf = lat.num_faces();
    // arcs (target, weight) per face
    let arcs: Vec<[(usize, i64); 6]> = (0..nf)
        .map(|fi| {
            let f = lat.face(fi);
            let mut out = [(0, 0); 6];
            for (s, slot) in out.iter_mut().enumerate() {
                let g = f.step(s);
                let r = g.reduce(k);
                let a = ((g.n - r.n) / ki) as i64;
                let b = ((g.m - r.m) / ki) as i64;
                *slot = (lat.face_index(r).unwrap(), increment_cap(s) + a * h1 - b * h2);
            }
            out
        })
        .collect();
    let mut dist = vec![i64::MAX; nf];
    let mut relaxations = vec![0usize; nf];
    let mut in_queue = vec![false; nf];
    dist[0] = 0;
    let mut queue = VecDeque::from([0usize]);
    in_queue[0] = true;
    while let Some(f) = queue.pop_front() {
        in_queue[f] = false;
        for &(g, w) in &arcs[f] {
            let nd = dist[f] + w;
            if nd < dist[g] {
                dist[g] = nd;
                relaxations[g] += 1;
                if relaxations[g] > nf {
                    return Err(Error::EmptySector(h1, h2));
                }
                if !in_queue[g] {
                    in_queue[g] = true;
                    queue.push_back(g);
                }
            }
        }
    }
    let mut edges = EdgeSet::new(lat.num_edges());
    for (fi, fa) in arcs.iter().enumerate() {
        for s in [0, 2, 4] {
            let (g, w) = fa[s];
            let delta = dist[g] - dist[fi] - (w - increment_cap(s));
            if delta == increment(s, true) {
                edges.insert(lat.face_edges(fi)[s].unwrap());
            } else if delta != increment(s, false) {
                return Err(Error::Invariant(format!("illegal increment {delta} in sector {sector:?}")));
            }
        }
    }
    let m = DimerConfig::new(lat.clone(), edges)?;
    if m.height_change()? != sector {
        return Err(Error::Invariant(format!("initial configuration misses sector {sector:?}")));
    }
    Ok(m)
}

/// One Metropolis update at a uniformly chosen face.
pub fn glauber_step<R: Rng>(rng: &mut R, m: &mut DimerConfig, weights: [f64; 3], lazy: bool) -> bool {
    let lat = m.lattice().clone();
    let f = rng.gen_range(0..lat.num_interior_faces());
    let coin = lazy && rng.gen::<bool>();
    if !m.is_flippable(f) || coin {
        return false;
    }
    let ratio = flip_ratio(&lat, m.edges(), f, weights);
    if ratio >= 1.0 || rng.gen::<f64>() < ratio {
        m.flip_mut(f)
    } else {
        false
    }
}

/// `W(flip_f(m)) / W(m)` restricted to the boundary of `f`.
pub fn flip_ratio(lat: &Lattice, edges: &EdgeSet, f: usize, weights: [f64; 3]) -> f64 {
    let mut r = 1.0;
    for e in lat.face_edges(f).iter().flatten() {
        let w = weights[lat.edge(*e).etype.index()];
        if edges.contains(*e) {
            r /= w;
        } else {
            r *= w;
        }
    }
    r
}

/// A single chain; the hot loop avoids the generic configuration API.
pub struct Chain {
    m: DimerConfig,
    boundary: Vec<[u32; 6]>,
    ratio_types: Vec<[u8; 6]>,
    weights: [f64; 3],
    rng: ChaCha8Rng,
    lazy: bool,
    sweeps_done: usize,
}

impl Chain {
    pub fn new(m: DimerConfig, weights: [f64; 3], seed: u64, lazy: bool) -> Result<Chain> {
        let lat = m.lattice().clone();
        if lat.k().unwrap_or(0) < 2 {
            return Err(Error::InvalidParameter("chains run on tori with k ≥ 2".into()));
        }
        let boundary = (0..lat.num_faces()).map(|f| lat.face_edges(f).map(|e| e.unwrap() as u32)).collect();
        let ratio_types = (0..lat.num_faces())
            .map(|f| lat.face_edges(f).map(|e| lat.edge(e.unwrap()).etype.index() as u8))
            .collect();
        Ok(Chain { m, boundary, ratio_types, weights, rng: ChaCha8Rng::seed_from_u64(seed), lazy, sweeps_done: 0 })
    }

    pub fn config(&self) -> &DimerConfig {
        &self.m
    }

    pub fn sweeps_done(&self) -> usize {
        self.sweeps_done
    }

    /// One attempted update; returns whether a flip happened.
    #[inline]
    pub fn step(&mut self) -> bool {
        let f = self.rng.gen_range(0..self.boundary.len());
        let b = self.boundary[f];
        let edges = self.m.edges_mut();
        let present = b.map(|e| edges.contains(e as usize));
        let count = present.iter().filter(|&&p| p).count();
        if count != 3 {
            return false;
        }
        if self.lazy && self.rng.gen::<bool>() {
            return false;
        }
        let types = self.ratio_types[f];
        let mut ratio = 1.0;
        for s in 0..6 {
            let w = self.weights[types[s] as usize];
            if present[s] {
                ratio /= w;
            } else {
                ratio *= w;
            }
        }
        if ratio < 1.0 && self.rng.gen::<f64>() >= ratio {
            return false;
        }
        for e in b {
            edges.toggle(e as usize);
        }
        true
    }

    /// k² attempted updates; returns the number of accepted flips.
    pub fn sweep(&mut self) -> usize {
        let n = self.boundary.len();
        let mut acc = 0;
        for _ in 0..n {
            acc += self.step() as usize;
        }
        self.sweeps_done += 1;
        acc
    }

    /// Number of faces currently flippable.
    pub fn flippable_count(&self) -> usize {
        let edges = self.m.edges();
        self.boundary.iter().filter(|b| b.iter().filter(|&&e| edges.contains(e as usize)).count() == 3).count()
    }
}

/// Log line for one emitted sample.
#[derive(Clone, Debug, Serialize)]
pub struct SweepLog {
    pub sweep: usize,
    pub acceptance: f64,
    pub count_a: usize,
    pub count_b: usize,
    pub count_c: usize,
}

/// Thinned post-burn-in sample stream.
pub struct Sampler {
    chain: Chain,
    thinning: usize,
    remaining: usize,
    sector: (i64, i64),
    last_log: Option<SweepLog>,
}

impl Sampler {
    pub fn new(spec: &SamplerSpec) -> Result<Sampler> {
        spec.validate()?;
        let lat = Arc::new(Lattice::torus(spec.k)?);
        let sector = spec.resolve_sector()?;
        let m = initial_config(&lat, sector)?;
        let mut chain = Chain::new(m, spec.weights, spec.seed, spec.lazy)?;
        for _ in 0..spec.burn_in {
            chain.sweep();
        }
        Ok(Sampler { chain, thinning: spec.thinning.max(1), remaining: spec.sweeps, sector, last_log: None })
    }

    pub fn sector(&self) -> (i64, i64) {
        self.sector
    }

    pub fn chain(&self) -> &Chain {
        &self.chain
    }

    pub fn last_log(&self) -> Option<&SweepLog> {
        self.last_log.as_ref()
    }
}

impl Iterator for Sampler {
    type Item = DimerConfig;

    fn next(&mut self) -> Option<DimerConfig> {
        if self.remaining < self.thinning {
            return None;
        }
        let mut acc = 0;
        for _ in 0..self.thinning {
            acc += self.chain.sweep();
        }
        self.remaining -= self.thinning;
        let m = self.chain.config().clone();
        let c = m.type_counts();
        let attempts = self.thinning * m.lattice().num_faces();
        self.last_log = Some(SweepLog {
            sweep: self.chain.sweeps_done(),
            acceptance: acc as f64 / attempts as f64,
            count_a: c[0],
            count_b: c[1],
            count_c: c[2],
        });
        Some(m)
    }
}
