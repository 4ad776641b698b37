//! Weighted dimer statistics from the inverse Kasteleyn matrix.
//!
//! Edge weights are `A`, `B`, `C` by type and the inverse Kasteleyn entry
//! depends only on the cell displacement `d = cell(b) − cell(w)`:
//!
//! `K⁻¹(b, w) = (2πi)⁻² ∮∮ z₁^{d₁} z₂^{d₂} / (A z₁/z₂ + B z₁ + C) dz₁/z₁ dz₂/z₂`
//!
//! The z₁ integral is done by residues. Writing `α = A/z₂ + B`, the pole sits
//! inside the unit circle iff `|α| > C`, which on `|z₂| = 1` happens on the
//! arc `|arg z₂| < π − θ_C`. The z₂ integral is Gauss–Legendre on the two arcs.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hexlattice::{Color, EdgeType, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightTriple {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl WeightTriple {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if [a, b, c].iter().any(|x| !x.is_finite() || *x <= 0.0) {
            return Err(Error::InvalidParameter(format!("weights must be positive, got ({a}, {b}, {c})")));
        }
        Ok(WeightTriple { a, b, c })
    }

    pub fn of(&self, t: EdgeType) -> f64 {
        match t {
            EdgeType::A => self.a,
            EdgeType::B => self.b,
            EdgeType::C => self.c,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TriangleAngles {
    pub theta_a: f64,
    pub theta_b: f64,
    pub theta_c: f64,
}

impl TriangleAngles {
    pub fn of(&self, t: EdgeType) -> f64 {
        match t {
            EdgeType::A => self.theta_a,
            EdgeType::B => self.theta_b,
            EdgeType::C => self.theta_c,
        }
    }
}

/// The side violating the strict triangle inequality, if any.
pub fn frozen_side(wt: &WeightTriple) -> Option<EdgeType> {
    let [a, b, c] = wt.as_array();
    if a >= b + c {
        Some(EdgeType::A)
    } else if b >= a + c {
        Some(EdgeType::B)
    } else if c >= a + b {
        Some(EdgeType::C)
    } else {
        None
    }
}

/// Angles of the triangle with side lengths A, B, C.
pub fn angles(wt: &WeightTriple) -> Result<TriangleAngles> {
    if let Some(t) = frozen_side(wt) {
        return Err(Error::Frozen(format!(
            "side {t} = {} is at least the sum of the other two in ({}, {}, {})",
            wt.of(t),
            wt.a,
            wt.b,
            wt.c
        )));
    }
    let [a, b, c] = wt.as_array();
    let ang = |x: f64, y: f64, z: f64| ((y * y + z * z - x * x) / (2.0 * y * z)).clamp(-1.0, 1.0).acos();
    let theta_a = ang(a, b, c);
    let theta_b = ang(b, a, c);
    let theta_c = PI - theta_a - theta_b;
    Ok(TriangleAngles { theta_a, theta_b, theta_c })
}

/// `(θ_A, θ_B, θ_C)/π`.
pub fn edge_probabilities(wt: &WeightTriple) -> Result<(f64, f64, f64)> {
    let t = angles(wt)?;
    Ok((t.theta_a / PI, t.theta_b / PI, t.theta_c / PI))
}

/// Expected height increments `(E h(−1,0), E h(0,1))`.
pub fn slope_from_weights(wt: &WeightTriple) -> Result<(f64, f64)> {
    let (pa, _, pc) = edge_probabilities(wt)?;
    Ok((3.0 * pa - 1.0, 3.0 * pc - 1.0))
}

/// Cell displacement `cell(b) − cell(w)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeDisplacement {
    pub dn: i32,
    pub dm: i32,
}

impl EdgeDisplacement {
    pub fn new(dn: i32, dm: i32) -> Self {
        EdgeDisplacement { dn, dm }
    }

    pub fn between(black: VertexId, white: VertexId) -> Self {
        EdgeDisplacement::new(black.cell.n - white.cell.n, black.cell.m - white.cell.m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KinvValue {
    pub value: f64,
    pub error_estimate: f64,
    pub imaginary: f64,
    pub nodes: usize,
}

const MIN_NODES: usize = 16;
const MAX_NODES: usize = 1 << 14;

/// z₁-residue of the integrand at fixed `z₂ = e^{iφ}`, times `z₂^{d₂}`.
fn reduced_integrand(wt: &WeightTriple, d: EdgeDisplacement, phi: f64) -> Complex64 {
    let z2 = Complex64::from_polar(1.0, phi);
    let alpha = wt.a / z2 + wt.b;
    let x = d.dn;
    let inner = if alpha.norm() > wt.c {
        if x >= 1 {
            (-wt.c).powi(x - 1) * alpha.powi(-x)
        } else {
            Complex64::new(0.0, 0.0)
        }
    } else if x <= 0 {
        (-alpha).powi(-x) / wt.c.powi(1 - x)
    } else {
        Complex64::new(0.0, 0.0)
    };
    inner * Complex64::from_polar(1.0, d.dm as f64 * phi)
}

fn integrate(wt: &WeightTriple, d: EdgeDisplacement, theta_c: f64, n: usize) -> Complex64 {
    let rule = GaussLegendre::new(NonZeroUsize::new(n).unwrap());
    let cut = PI - theta_c;
    let mut total = Complex64::new(0.0, 0.0);
    for (lo, hi) in [(-cut, cut), (cut, cut + 2.0 * theta_c)] {
        let re = rule.integrate(lo, hi, |p| reduced_integrand(wt, d, p).re);
        let im = rule.integrate(lo, hi, |p| reduced_integrand(wt, d, p).im);
        total += Complex64::new(re, im);
    }
    total / (2.0 * PI)
}

/// `K⁻¹(b, w)` for `cell(b) − cell(w) = d`, to absolute accuracy `tol`.
pub fn kinv_entry(wt: &WeightTriple, d: EdgeDisplacement, tol: f64) -> Result<KinvValue> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let theta = angles(wt)?;
    let mut n = MIN_NODES;
    let mut prev = integrate(wt, d, theta.theta_c, n);
    while n < MAX_NODES {
        n *= 2;
        let cur = integrate(wt, d, theta.theta_c, n);
        let err = (cur - prev).norm();
        if err < tol / 2.0 {
            if cur.im.abs() >= tol {
                return Err(Error::Precision(format!("imaginary part {} exceeds tolerance", cur.im)));
            }
            return Ok(KinvValue { value: cur.re, error_estimate: err, imaginary: cur.im, nodes: n });
        }
        prev = cur;
    }
    Err(Error::Precision(format!("no convergence to {tol} with {MAX_NODES} nodes for displacement {d:?}")))
}

/// Kasteleyn entry `K(w, b)`: the edge weight if `w ~ b`, else 0.
pub fn kasteleyn_weight(wt: &WeightTriple, white: VertexId, black: VertexId) -> f64 {
    if white.color != Color::White || black.color != Color::Black {
        return 0.0;
    }
    let d = (black.cell.n - white.cell.n, black.cell.m - white.cell.m);
    EdgeType::ALL.into_iter().find(|t| t.black_offset() == d).map_or(0.0, |t| wt.of(t))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LocalStat {
    pub raw: f64,
    pub value: f64,
}

/// Probability that all listed (white, black) pairs are dimers.
pub fn local_stats(wt: &WeightTriple, pairs: &[(VertexId, VertexId)], tol: f64) -> Result<LocalStat> {
    angles(wt)?;
    let n = pairs.len();
    let prod: f64 = pairs.iter().map(|&(w, b)| kasteleyn_weight(wt, w, b)).product();
    let raw = if prod == 0.0 {
        0.0
    } else {
        let entry_tol = tol / (4.0 * n.max(1) as f64);
        let mut mat = vec![vec![0.0; n]; n];
        for (i, row) in mat.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = kinv_entry(wt, EdgeDisplacement::between(pairs[i].1, pairs[j].0), entry_tol)?.value;
            }
        }
        prod * determinant(mat)
    };
    if raw < -10.0 * tol || raw > 1.0 + 10.0 * tol {
        return Err(Error::Precision(format!("probability {raw} outside [0, 1]")));
    }
    Ok(LocalStat { raw, value: raw.clamp(0.0, 1.0) })
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        if a[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}

/// Variants of the 3×3 determinant for three alternating hexagon edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HexagonFormula {
    /// Diagonal (−sin θ_A, −sin θ_C, −sin θ_C), off-diagonal θ_B, θ_C, θ_A.
    Literal,
    /// Diagonal (−sin θ_A, −sin θ_B, −sin θ_C), same off-diagonal.
    Symmetrized,
    /// Diagonal (−sin θ_X); the entry pairing the rows of Y and Z is
    /// θ_X·√(YZ)/X for {X, Y, Z} = {A, B, C}.
    Gauged,
}

impl HexagonFormula {
    pub const ALL: [HexagonFormula; 3] = [HexagonFormula::Literal, HexagonFormula::Symmetrized, HexagonFormula::Gauged];
}

/// Probability that a given hexagon carries a given alternating triple.
pub fn hexagon_triple_probability(wt: &WeightTriple) -> Result<f64> {
    hexagon_triple_probability_with(wt, HexagonFormula::Gauged)
}

pub fn hexagon_triple_probability_with(wt: &WeightTriple, formula: HexagonFormula) -> Result<f64> {
    let t = angles(wt)?;
    let (ta, tb, tc) = (t.theta_a, t.theta_b, t.theta_c);
    let (sa, sb, sc) = (ta.sin(), tb.sin(), tc.sin());
    let m = match formula {
        HexagonFormula::Literal => vec![vec![-sa, tb, tc], vec![tb, -sc, ta], vec![tc, ta, -sc]],
        HexagonFormula::Symmetrized => vec![vec![-sa, tb, tc], vec![tb, -sb, ta], vec![tc, ta, -sc]],
        HexagonFormula::Gauged => {
            let [a, b, c] = wt.as_array();
            let ab = tc * (a * b).sqrt() / c;
            let ac = tb * (a * c).sqrt() / b;
            let bc = ta * (b * c).sqrt() / a;
            vec![vec![-sa, ab, ac], vec![ab, -sb, bc], vec![ac, bc, -sc]]
        }
    };
    Ok(determinant(m) / PI.powi(3))
}

/// The alternating triple of face (0,0) starting at its first boundary slot,
/// as (white, black) pairs.
pub fn hexagon_triple_pairs() -> Vec<(VertexId, VertexId)> {
    let f = crate::hexlattice::FaceCoord::new(0, 0);
    [0, 2, 4].iter().map(|&s| f.boundary()[s]).map(|e| (e.white(), e.black())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wt(a: f64, b: f64, c: f64) -> WeightTriple {
        WeightTriple::new(a, b, c).unwrap()
    }

    #[test]
    fn angles_examples() {
        let t = angles(&wt(1.0, 1.0, 1.0)).unwrap();
        for x in [t.theta_a, t.theta_b, t.theta_c] {
            assert!((x - PI / 3.0).abs() < 1e-12);
        }
        let t = angles(&wt(3.0, 4.0, 5.0)).unwrap();
        assert!((t.theta_c - PI / 2.0).abs() < 1e-12);
        match angles(&wt(1.0, 1.0, 3.0)) {
            Err(Error::Frozen(msg)) => assert!(msg.contains("side C")),
            other => panic!("{other:?}"),
        }
        assert!(angles(&wt(1.0, 1.0, 2.0)).is_err());
        assert!(WeightTriple::new(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn probabilities_sum_to_one() {
        for w in [wt(1.0, 1.0, 1.0), wt(3.0, 4.0, 5.0), wt(2.0, 2.0, 3.0), wt(0.3, 0.5, 0.7)] {
            let (a, b, c) = edge_probabilities(&w).unwrap();
            assert!((a + b + c - 1.0).abs() < 1e-12);
        }
        let (_, _, pc) = edge_probabilities(&wt(3.0, 4.0, 5.0)).unwrap();
        assert!((pc - 0.5).abs() < 1e-12);
    }

    #[test]
    fn slope_at_symmetric_point() {
        let (s, t) = slope_from_weights(&wt(1.0, 1.0, 1.0)).unwrap();
        assert!(s.abs() < 1e-12 && t.abs() < 1e-12);
    }

    #[test]
    fn single_edge_equilateral() {
        let v = kinv_entry(&wt(1.0, 1.0, 1.0), EdgeDisplacement::new(1, -1), 1e-12).unwrap();
        assert!((v.value - 1.0 / 3.0).abs() < 1e-10, "{v:?}");
    }

    #[test]
    fn formulas_agree_when_symmetric() {
        let w = wt(1.0, 1.0, 1.0);
        let a = -(PI / 3.0).sin();
        let b = PI / 3.0;
        let want = (a + 2.0 * b) * (a - b) * (a - b) / PI.powi(3);
        for f in HexagonFormula::ALL {
            assert!((hexagon_triple_probability_with(&w, f).unwrap() - want).abs() < 1e-14);
        }
    }

    #[test]
    fn determinant_small() {
        assert_eq!(determinant(vec![vec![2.0, 1.0], vec![1.0, 3.0]]), 5.0);
        assert_eq!(determinant(vec![vec![1.0, 2.0], vec![2.0, 4.0]]), 0.0);
    }

    #[test]
    fn kasteleyn_weights() {
        let w = wt(2.0, 3.0, 5.0);
        let white = VertexId::white(0, 0);
        assert_eq!(kasteleyn_weight(&w, white, VertexId::black(1, -1)), 2.0);
        assert_eq!(kasteleyn_weight(&w, white, VertexId::black(1, 0)), 3.0);
        assert_eq!(kasteleyn_weight(&w, white, VertexId::black(0, 0)), 5.0);
        assert_eq!(kasteleyn_weight(&w, white, VertexId::black(2, 0)), 0.0);
    }
}
