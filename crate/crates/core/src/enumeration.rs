//! Exhaustive enumeration of perfect matchings on small tori.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hexlattice::{Color, Lattice};
use crate::matching::{DimerConfig, EdgeConfig, EdgeSet};

/// Largest k enumerated without an explicit override.
pub const DEFAULT_MAX_K: usize = 4;

/// Free energy per face of uniform honeycomb dimers, used for size estimates.
const ENTROPY_PER_FACE: f64 = 0.323_065_947;

/// Vertex elimination order for the backtracking search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    /// Whites in increasing cell order, edges tried A, B, C.
    WhiteForward,
    /// Blacks in decreasing cell order, edges tried C, B, A.
    BlackReverse,
}

#[derive(Clone, Debug)]
pub struct SectorTable {
    lat: Arc<Lattice>,
    sectors: BTreeMap<(i64, i64), Vec<DimerConfig>>,
    total: usize,
}

impl SectorTable {
    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lat
    }

    pub fn k(&self) -> usize {
        self.lat.k().unwrap()
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn sectors(&self) -> &BTreeMap<(i64, i64), Vec<DimerConfig>> {
        &self.sectors
    }

    pub fn sector(&self, s: (i64, i64)) -> &[DimerConfig] {
        self.sectors.get(&s).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn configs(&self) -> impl Iterator<Item = &DimerConfig> {
        self.sectors.values().flatten()
    }

    pub fn summary(&self) -> Vec<SectorCount> {
        self.sectors.iter().map(|(&(i, j), v)| SectorCount { i, j, count: v.len() }).collect()
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct SectorCount {
    pub i: i64,
    pub j: i64,
    pub count: usize,
}

/// Rough number of matchings of the k×k torus.
pub fn estimated_count(k: usize) -> f64 {
    (ENTROPY_PER_FACE * (k * k) as f64).exp()
}

fn guard(k: usize, allow_large: bool) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if k > DEFAULT_MAX_K && !allow_large {
        return Err(Error::TooLarge(format!(
            "k = {k} has roughly {:.2e} matchings; pass the override to enumerate anyway",
            estimated_count(k)
        )));
    }
    Ok(())
}

/// All matchings of the k×k torus, classified by height change.
pub fn enumerate_all(k: usize, allow_large: bool) -> Result<SectorTable> {
    guard(k, allow_large)?;
    let lat = Arc::new(Lattice::torus(k)?);
    let all = enumerate_matchings(&lat, Order::WhiteForward);
    let mut sectors: BTreeMap<(i64, i64), Vec<DimerConfig>> = BTreeMap::new();
    let total = all.len();
    for edges in all {
        let m = DimerConfig::new(lat.clone(), edges)?;
        let hc = m.height_change()?;
        sectors.entry(hc).or_default().push(m);
    }
    Ok(SectorTable { lat, sectors, total })
}

/// Backtracking over vertices in the given order; returns membership sets in
/// discovery order.
pub fn enumerate_matchings(lat: &Lattice, order: Order) -> Vec<EdgeSet> {
    let (color, reverse) = match order {
        Order::WhiteForward => (Color::White, false),
        Order::BlackReverse => (Color::Black, true),
    };
    let mut pivots: Vec<usize> = (0..lat.num_vertices()).filter(|&v| lat.vertex(v).color == color).collect();
    if reverse {
        pivots.reverse();
    }
    let choices: Vec<Vec<(usize, usize)>> = pivots
        .iter()
        .map(|&v| {
            let mut es: Vec<(usize, usize)> = lat
                .vertex_edges(v)
                .iter()
                .map(|&e| {
                    let [w, b] = lat.edge_ends(e);
                    (e, if w == v { b } else { w })
                })
                .collect();
            if reverse {
                es.reverse();
            }
            es
        })
        .collect();
    let mut used = vec![false; lat.num_vertices()];
    let mut current = EdgeSet::new(lat.num_edges());
    let mut out = Vec::new();
    search(0, &choices, &mut used, &mut current, &mut out);
    out
}

fn search(
    depth: usize,
    choices: &[Vec<(usize, usize)>],
    used: &mut [bool],
    current: &mut EdgeSet,
    out: &mut Vec<EdgeSet>,
) {
    if depth == choices.len() {
        out.push(current.clone());
        return;
    }
    for &(e, other) in &choices[depth] {
        if used[other] {
            continue;
        }
        used[other] = true;
        current.insert(e);
        search(depth + 1, choices, used, current, out);
        current.remove(e);
        used[other] = false;
    }
}

/// Count of matchings for both orders, and whether the two sets agree.
pub fn cross_check_orders(k: usize) -> Result<(usize, usize, bool)> {
    guard(k, false)?;
    let lat = Lattice::torus(k)?;
    let a = enumerate_matchings(&lat, Order::WhiteForward);
    let b = enumerate_matchings(&lat, Order::BlackReverse);
    let sa: HashSet<&EdgeSet> = a.iter().collect();
    let sb: HashSet<&EdgeSet> = b.iter().collect();
    Ok((a.len(), b.len(), sa.len() == a.len() && sa == sb))
}

/// Exact `P(event | sector)` under the uniform measure; `sector = None` is the
/// uniform measure on all matchings.
pub fn exact_event_probability<F>(table: &SectorTable, sector: Option<(i64, i64)>, event: F) -> Result<BigRational>
where
    F: Fn(&DimerConfig) -> bool,
{
    let pool: Vec<&DimerConfig> = match sector {
        Some(s) => table.sector(s).iter().collect(),
        None => table.configs().collect(),
    };
    if pool.is_empty() {
        let (i, j) = sector.unwrap_or((0, 0));
        return Err(Error::EmptySector(i, j));
    }
    let hits = pool.iter().filter(|m| event(m)).count();
    Ok(BigRational::new(BigInt::from(hits), BigInt::from(pool.len())))
}

/// `P(event)` under the (A,B,C)-weighted measure, in floating point.
pub fn weighted_event_probability<F>(
    table: &SectorTable,
    sector: Option<(i64, i64)>,
    weights: [f64; 3],
    event: F,
) -> Result<f64>
where
    F: Fn(&DimerConfig) -> bool,
{
    let pool: Vec<&DimerConfig> = match sector {
        Some(s) => table.sector(s).iter().collect(),
        None => table.configs().collect(),
    };
    if pool.is_empty() {
        let (i, j) = sector.unwrap_or((0, 0));
        return Err(Error::EmptySector(i, j));
    }
    // weights relative to the heaviest configuration to avoid overflow
    let logw: Vec<f64> = pool
        .iter()
        .map(|m| {
            let c = m.type_counts();
            (0..3).map(|t| c[t] as f64 * weights[t].ln()).sum()
        })
        .collect();
    let top = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (mut z, mut hit) = (0.0, 0.0);
    for (m, lw) in pool.iter().zip(&logw) {
        let w = (lw - top).exp();
        z += w;
        if event(m) {
            hit += w;
        }
    }
    Ok(hit / z)
}

#[derive(Clone, Debug, Serialize)]
pub struct FlipReport {
    pub face: (i32, i32),
    pub sectors_checked: usize,
    pub configs_checked: usize,
    pub mismatches: Vec<String>,
}

impl FlipReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Checks that flipping at `f` permutes every sector's configuration set.
pub fn pushforward_under_flip(table: &SectorTable, f: usize) -> FlipReport {
    let face = table.lat.face(f);
    let mut mismatches = Vec::new();
    let mut configs_checked = 0;
    for (&s, configs) in &table.sectors {
        let set: HashSet<&EdgeSet> = configs.iter().map(|m| m.edges()).collect();
        let mut image = HashSet::new();
        for m in configs {
            configs_checked += 1;
            let g = m.flip(f);
            if !set.contains(g.edges()) {
                mismatches.push(format!("sector {s:?}: image of a configuration leaves the sector"));
            }
            image.insert(g.edges().clone());
        }
        if image.len() != configs.len() {
            mismatches.push(format!("sector {s:?}: flip is not injective"));
        }
    }
    FlipReport { face: (face.n, face.m), sectors_checked: table.sectors.len(), configs_checked, mismatches }
}
