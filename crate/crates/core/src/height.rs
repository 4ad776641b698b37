//! Height functions on faces.
//!
//! Crossing slot `s` of a face, the right-hand endpoint of the shared edge is
//! white for even slots and black for odd slots, giving increments
//! `−1 + 3·[e ∈ m]` and `1 − 3·[e ∈ m]` respectively.

use std::collections::VecDeque;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hexlattice::{FaceCoord, Lattice};
use crate::matching::{height_change_along, DimerConfig, EdgeConfig, EdgeSet};

/// Height increment across boundary slot `slot` of the current face.
#[inline]
pub fn increment(slot: usize, present: bool) -> i64 {
    let x = present as i64;
    if slot % 2 == 0 {
        -1 + 3 * x
    } else {
        1 - 3 * x
    }
}

/// Largest increment allowed across `slot`.
pub fn increment_cap(slot: usize) -> i64 {
    if slot % 2 == 0 {
        2
    } else {
        1
    }
}

#[derive(Clone, Debug)]
pub struct HeightField {
    lat: Arc<Lattice>,
    base: FaceCoord,
    values: Vec<i64>,
    change: Option<(i64, i64)>,
}

impl HeightField {
    pub fn base(&self) -> FaceCoord {
        self.base
    }

    /// `(h¹, h²)` on a torus.
    pub fn change(&self) -> Option<(i64, i64)> {
        self.change
    }

    /// Height of the face with index `f`; on a torus this is the lift inside
    /// the fundamental domain `[0,k)²`.
    pub fn value(&self, f: usize) -> i64 {
        self.values[f]
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    /// Height at a lifted face coordinate.
    pub fn at(&self, f: FaceCoord) -> Option<i64> {
        match (self.lat.k(), self.change) {
            (Some(k), Some((h1, h2))) => {
                let r = f.reduce(k);
                let ki = k as i32;
                let a = ((f.n - r.n) / ki) as i64;
                let b = ((f.m - r.m) / ki) as i64;
                Some(self.values[self.lat.face_index(r)?] - a * h1 + b * h2)
            }
            _ => {
                let i = self.lat.face_index(f)?;
                self.lat.face_is_interior(i).then(|| self.values[i])
            }
        }
    }

    /// Slope `(h¹/k, h²/k)`.
    pub fn slope(&self) -> Option<(f64, f64)> {
        let k = self.lat.k()? as f64;
        self.change.map(|(a, b)| (a as f64 / k, b as f64 / k))
    }
}

/// Heights of `m`, normalized so that `base` has height 0.
pub fn compute_height(m: &DimerConfig, base: FaceCoord) -> Result<HeightField> {
    heights_from_edges(m.lattice(), m.edges(), base)
}

pub(crate) fn heights_from_edges(lat: &Arc<Lattice>, edges: &EdgeSet, base: FaceCoord) -> Result<HeightField> {
    let nf = lat.num_faces();
    let mut values = vec![i64::MIN; nf];
    let in_domain = |f: FaceCoord| match lat.k() {
        Some(k) => f == f.reduce(k),
        None => lat.face_index(f).is_some_and(|i| lat.face_is_interior(i)),
    };
    let start = match lat.k() {
        Some(k) => base.reduce(k),
        None => base,
    };
    let si = lat
        .face_index(start)
        .filter(|&i| lat.face_is_interior(i))
        .ok_or_else(|| Error::InvalidParameter(format!("base face {base} is not in the lattice")))?;
    values[si] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(f) = queue.pop_front() {
        let fi = lat.face_index(f).unwrap();
        for s in 0..6 {
            let g = f.step(s);
            if !in_domain(g) {
                continue;
            }
            let gi = lat.face_index(g).unwrap();
            if values[gi] != i64::MIN {
                continue;
            }
            let e = lat.face_edges(fi)[s].unwrap();
            values[gi] = values[fi] + increment(s, edges.contains(e));
            queue.push_back(g);
        }
    }

    let change = match lat.k() {
        Some(k) => Some(height_change_along(lat, edges, k as i32, 0, 0)),
        None => None,
    };
    let field = HeightField { lat: lat.clone(), base, values, change };

    // path independence on every dual edge, seams included
    for fi in 0..nf {
        if !lat.face_is_interior(fi) {
            continue;
        }
        let f = lat.face(fi);
        let hf = field.values[fi];
        if hf == i64::MIN {
            return Err(Error::Invariant(format!("face {f} not reached by the spanning tree")));
        }
        for s in 0..6 {
            let Some(e) = lat.face_edges(fi)[s] else { continue };
            let g = f.step(s);
            let Some(hg) = field.at(g) else { continue };
            if hg - hf != increment(s, edges.contains(e)) {
                return Err(Error::Invariant(format!("height inconsistent across {f}->{g}")));
            }
        }
    }
    Ok(field)
}

/// True iff the loop complement is exactly the set of edges whose two faces
/// have heights of different parity.
pub fn parity_loops_check(m: &DimerConfig) -> Result<bool> {
    let lat = m.lattice();
    let h = compute_height(m, lat.face(0))?;
    let w = m.complement();
    for fi in 0..lat.num_interior_faces() {
        let f = lat.face(fi);
        for s in 0..6 {
            let Some(e) = lat.face_edges(fi)[s] else { continue };
            let Some(hg) = h.at(f.step(s)) else { continue };
            let odd = (hg - h.value(fi)).rem_euclid(2) == 1;
            if odd != w.contains(e) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, Serialize)]
pub struct VarianceRow {
    pub d: usize,
    pub mean: f64,
    pub variance: f64,
    pub count: usize,
}

/// Mean and variance of `h(f + d·u) − h(f)` over all faces, samples and the
/// three lattice directions `u ∈ {(1,0), (0,1), (−1,1)}`.
pub fn height_variance_profile(samples: &[DimerConfig], distances: &[usize]) -> Result<Vec<VarianceRow>> {
    if samples.len() < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let k = samples[0].lattice().k().ok_or_else(|| Error::InvalidParameter("variance profile needs a torus".into()))?;
    if let Some(&d) = distances.iter().find(|&&d| 2 * d >= k.max(1) && d > 0) {
        return Err(Error::InvalidParameter(format!("distance {d} is not below k/2")));
    }
    let fields: Vec<HeightField> =
        samples.iter().map(|m| compute_height(m, FaceCoord::new(0, 0))).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &d in distances {
        // per direction separately, since the mean depends on direction
        let mut var_sum = 0.0;
        let mut mean_sum = 0.0;
        let mut count = 0;
        for (dn, dm) in [(1, 0), (0, 1), (-1, 1)] {
            let mut xs = Vec::with_capacity(fields.len() * k * k);
            for h in &fields {
                for m in 0..k as i32 {
                    for n in 0..k as i32 {
                        let f = FaceCoord::new(n, m);
                        let g = f.offset(dn * d as i32, dm * d as i32);
                        xs.push((h.at(g).unwrap() - h.at(f).unwrap()) as f64);
                    }
                }
            }
            let mu = xs.iter().sum::<f64>() / xs.len() as f64;
            let var = xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / xs.len() as f64;
            var_sum += var;
            mean_sum += mu;
            count += xs.len();
        }
        rows.push(VarianceRow { d, mean: mean_sum / 3.0, variance: var_sum / 3.0, count });
    }
    Ok(rows)
}
