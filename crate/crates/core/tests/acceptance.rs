//! Acceptance run: one PASS/FAIL line per criterion. Exits 0 unless
//! `HEXLOOP_STRICT` is set and some criterion failed.

mod common;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use hexloop::doubledimer::{random_xor_fixture, resample_outcomes, surrounding_counts, union_decompose};
use hexloop::enumeration::{cross_check_orders, enumerate_all, pushforward_under_flip, weighted_event_probability};
use hexloop::glauber::{sector_counts, Sampler, SamplerSpec, SectorChoice};
use hexloop::height::{compute_height, increment, parity_loops_check};
use hexloop::kasteleyn::{
    frozen_side, hexagon_triple_pairs, hexagon_triple_probability, hexagon_triple_probability_with, kinv_entry, local_stats,
    EdgeDisplacement, HexagonFormula, WeightTriple,
};
use hexloop::swapper::{SwapRadii, UnglueCase};
use hexloop::topology::{dual_clusters, max_compatible_family, trifurcation_bound, ThreePartition};
use hexloop::{DimerConfig, EdgeConfig, EdgeType, FaceCoord};
use num_rational::BigRational;
use num_traits::Zero;

type Outcome = Result<String, String>;

fn wt(w: [f64; 3]) -> WeightTriple {
    WeightTriple::new(w[0], w[1], w[2]).unwrap()
}

/// Mean and standard error from 20 batch means.
fn batch_mean(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let b = xs.len() / 20;
    let means: Vec<f64> = xs.chunks_exact(b).take(20).map(|c| c.iter().sum::<f64>() / b as f64).collect();
    let mu = means.iter().sum::<f64>() / 20.0;
    let var = means.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / 19.0;
    (mean, (var / 20.0).sqrt())
}

fn z(mean: f64, sigma: f64, target: f64) -> f64 {
    if sigma > 0.0 {
        (mean - target) / sigma
    } else if (mean - target).abs() < 1e-12 {
        0.0
    } else {
        f64::INFINITY.copysign(mean - target)
    }
}

fn triple_at(m: &DimerConfig, f: usize) -> bool {
    let e = m.lattice().face_edges(f);
    [0, 2, 4].iter().all(|&s| m.contains(e[s].unwrap()))
}

fn spec(k: usize, weights: [f64; 3], seed: u64, sweeps: usize, burn_in: usize, thinning: usize) -> SamplerSpec {
    SamplerSpec { k, weights, sector: SectorChoice::FreeStart, seed, sweeps, burn_in, thinning, lazy: false }
}

fn c1() -> Outcome {
    let mut parts = Vec::new();
    for k in 1..=3 {
        let (a, b, same) = cross_check_orders(k).map_err(|e| e.to_string())?;
        if a != b || !same {
            return Err(format!("k={k}: {a} vs {b}"));
        }
        parts.push(format!("k={k}: {a}"));
    }
    if !parts[0].ends_with(": 3") {
        return Err(format!("k=1 count is not 3 ({})", parts[0]));
    }
    Ok(parts.join(", "))
}

fn c2() -> Outcome {
    let mut faces = 0;
    for k in 2..=3 {
        let table = enumerate_all(k, false).map_err(|e| e.to_string())?;
        for f in 0..k * k {
            let rep = pushforward_under_flip(&table, f);
            if !rep.ok() {
                return Err(format!("k={k} face {:?}: {}", rep.face, rep.mismatches.join("; ")));
            }
            faces += 1;
        }
    }
    Ok(format!("{faces} faces, every sector permuted"))
}

struct Chain345 {
    k: usize,
    c_freq: Vec<f64>,
    triples: Vec<f64>,
    counts: (usize, usize, usize),
}

const SWEEPS: usize = 100_000;

fn chain_345() -> Chain345 {
    let k = 48;
    let s = spec(k, [3.0, 4.0, 5.0], 1, SWEEPS, 20_000, 4);
    let sampler = Sampler::new(&s).unwrap();
    let counts = sector_counts(k, sampler.sector()).unwrap();
    let (mut c_freq, mut triples) = (Vec::new(), Vec::new());
    for m in sampler {
        let faces = m.lattice().num_faces();
        c_freq.push(m.type_counts()[2] as f64 / faces as f64);
        triples.push((0..faces).filter(|&f| triple_at(&m, f)).count() as f64 / faces as f64);
    }
    Chain345 { k, c_freq, triples, counts }
}

fn c3(ch: &Chain345) -> Outcome {
    let k = 32;
    let s = spec(k, [1.0; 3], 1, SWEEPS, 2_000, 10);
    let mut freq: [Vec<f64>; 3] = Default::default();
    for m in Sampler::new(&s).map_err(|e| e.to_string())? {
        let c = m.type_counts();
        for t in 0..3 {
            freq[t].push(c[t] as f64 / (k * k) as f64);
        }
    }
    let mut parts = Vec::new();
    let mut ok = true;
    for (t, xs) in freq.iter().enumerate() {
        let (mean, sigma) = batch_mean(xs);
        let zt = z(mean, sigma, 1.0 / 3.0);
        ok &= zt.abs() <= 3.0;
        parts.push(format!("{}={mean:.5} σ={sigma:.1e} z={zt:.2}", ["A", "B", "C"][t]));
    }
    let (mean, sigma) = batch_mean(&ch.c_freq);
    let zc = z(mean, sigma, 0.5);
    ok &= zc.abs() <= 3.0;
    let msg = format!(
        "(1,1,1) k=32 {} samples: {}; (3,4,5) k={} C={mean:.5} σ={sigma:.1e} z={zc:.2}",
        freq[0].len(),
        parts.join(", "),
        ch.k
    );
    if ok {
        Ok(msg)
    } else {
        Err(format!("{msg}; type counts are fixed within a sector and no sector of k=32 has density 1/3"))
    }
}

fn row_convolution(w: &WeightTriple, d: (i32, i32)) -> Result<f64, String> {
    let mut s = 0.0;
    for t in EdgeType::ALL {
        let (on, om) = t.black_offset();
        s += w.of(t) * kinv_entry(w, EdgeDisplacement::new(on - d.0, om - d.1), 1e-12).map_err(|e| e.to_string())?.value;
    }
    Ok(s)
}

fn c4() -> Outcome {
    let displacements = [(0, 0), (1, 0), (0, 1), (-1, 0), (0, -1), (1, -1), (-1, 1), (2, -1), (-2, 3), (3, 1), (-3, -2), (4, -4)];
    let mut worst: f64 = 0.0;
    for w in [[1.0, 1.0, 1.0], [3.0, 4.0, 5.0], [2.0, 2.0, 3.0]] {
        for d in displacements {
            let want = if d == (0, 0) { 1.0 } else { 0.0 };
            worst = worst.max((row_convolution(&wt(w), d)? - want).abs());
        }
    }
    let msg = format!("{} displacements × 3 triples, max error {worst:.1e}", displacements.len());
    if worst < 1e-8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c5(ch: &Chain345) -> Outcome {
    let mut fails = Vec::new();
    let mut parts = Vec::new();

    let mut worst: f64 = 0.0;
    for w in [[1.0, 1.0, 1.0], [3.0, 4.0, 5.0], [2.0, 2.0, 3.0]] {
        let det = local_stats(&wt(w), &hexagon_triple_pairs(), 1e-11).map_err(|e| e.to_string())?.value;
        worst = worst.max((det - hexagon_triple_probability(&wt(w)).map_err(|e| e.to_string())?).abs());
    }
    parts.push(format!("determinant vs formula {worst:.1e}"));
    if worst >= 1e-8 {
        fails.push("determinant route disagrees");
    }

    // exact torus values approach the chosen variant from below, which is the nearest variant at k=4
    let tables: Vec<_> = (2..=4).map(|k| enumerate_all(k, false).unwrap()).collect();
    for w in [[3.0, 4.0, 5.0], [2.0, 2.0, 3.0]] {
        let exact: Vec<f64> = tables
            .iter()
            .map(|t| weighted_event_probability(t, None, w, |m| triple_at(m, 0)).unwrap())
            .collect();
        let target = hexagon_triple_probability(&wt(w)).unwrap();
        let gaps: Vec<f64> = exact.iter().map(|v| target - v).collect();
        let trend = gaps.iter().all(|&g| g > 0.0) && gaps.windows(2).all(|g| g[1] < g[0]);
        let nearest = HexagonFormula::ALL
            .iter()
            .min_by(|a, b| {
                let d = |f: HexagonFormula| (hexagon_triple_probability_with(&wt(w), f).unwrap() - exact[2]).abs();
                d(**a).total_cmp(&d(**b))
            })
            .copied();
        parts.push(format!(
            "{w:?} exact k=2..4 {:.4}/{:.4}/{:.4} → {target:.4}",
            exact[0], exact[1], exact[2]
        ));
        if !trend || nearest != Some(HexagonFormula::Gauged) {
            fails.push("enumeration trend");
        }
    }

    // the torus sector fixes the slope; compare at the weights whose slope it realizes
    let (a, b, c) = ch.counts;
    let s = |x: usize| (PI * x as f64 / ch.k as f64).sin();
    let matched = hexagon_triple_probability(&WeightTriple::new(s(a), s(b), s(c)).unwrap()).unwrap();
    let raw = hexagon_triple_probability(&wt([3.0, 4.0, 5.0])).unwrap();
    let (mean, sigma) = batch_mean(&ch.triples);
    let (zm, zr) = (z(mean, sigma, matched), z(mean, sigma, raw));
    let others: Vec<String> = [HexagonFormula::Literal, HexagonFormula::Symmetrized]
        .iter()
        .map(|&f| {
            let v = hexagon_triple_probability_with(&WeightTriple::new(s(a), s(b), s(c)).unwrap(), f).unwrap();
            format!("{f:?} z={:.0}", z(mean, sigma, v))
        })
        .collect();
    parts.push(format!(
        "k={} MCMC {mean:.5} σ={sigma:.1e} vs sector-slope value {matched:.5} z={zm:.2} (raw weights z={zr:.1}; {})",
        ch.k,
        others.join(", ")
    ));
    if zm.abs() > 3.0 {
        fails.push("k=48 MCMC beyond 3σ");
    }

    let mut positive = 0;
    for a in 1..=8 {
        for b in 1..=8 {
            for c in 1..=8 {
                let w = [a as f64, b as f64, c as f64];
                if frozen_side(&wt(w)).is_some() {
                    continue;
                }
                if hexagon_triple_probability(&wt(w)).map_err(|e| e.to_string())? <= 0.0 {
                    fails.push("non-positive value");
                }
                positive += 1;
            }
        }
    }
    parts.push(format!("positive at {positive} triples"));
    let msg = parts.join("; ");
    if fails.is_empty() {
        Ok(msg)
    } else {
        Err(format!("{msg}; failed: {}", fails.join(", ")))
    }
}

fn slot_towards(f: FaceCoord, g: FaceCoord) -> usize {
    (0..6).find(|&s| f.step(s) == g).unwrap()
}

fn c6() -> Outcome {
    let mut n = 0;
    for k in 1..=3usize {
        let table = enumerate_all(k, false).map_err(|e| e.to_string())?;
        for m in table.configs() {
            let lat = m.lattice();
            if !parity_loops_check(m).map_err(|e| e.to_string())? {
                return Err(format!("k={k}: parity disagrees with the loops"));
            }
            for fi in 0..k * k {
                let f = lat.face(fi);
                for s in 0..6 {
                    let tri = [f, f.step(s), f.step((s + 1) % 6)];
                    let sum: i64 = (0..3)
                        .map(|i| {
                            let (a, b) = (tri[i], tri[(i + 1) % 3]);
                            let t = slot_towards(a, b);
                            let e = lat.face_edges(lat.face_index(a.reduce(k)).unwrap())[t].unwrap();
                            increment(t, m.contains(e))
                        })
                        .sum();
                    if sum != 0 {
                        return Err(format!("k={k}: triangle sum {sum} at {f}"));
                    }
                }
            }
            if k >= 2 {
                let h = compute_height(m, FaceCoord::new(0, 0)).map_err(|e| e.to_string())?;
                for fi in (1..k * k).filter(|&f| m.is_flippable(f)) {
                    let g = compute_height(&m.flip(fi), FaceCoord::new(0, 0)).map_err(|e| e.to_string())?;
                    for x in 0..k * k {
                        let d = g.value(x) - h.value(x);
                        if (x == fi && d.abs() != 3) || (x != fi && d != 0) {
                            return Err(format!("k={k}: flip at face {fi} moved face {x} by {d}"));
                        }
                    }
                }
            }
            n += 1;
        }
    }
    Ok(format!("{n} configurations"))
}

fn c7() -> Outcome {
    let table = enumerate_all(2, false).map_err(|e| e.to_string())?;
    let configs: Vec<&DimerConfig> = table.configs().collect();
    let n = configs.len();
    let key = |m: &DimerConfig| m.edges().iter().collect::<Vec<usize>>();
    let index: BTreeMap<Vec<usize>, usize> = configs.iter().enumerate().map(|(i, m)| (key(m), i)).collect();
    let mass = BigRational::new(1.into(), (n * n).into());
    let mut out: BTreeMap<(usize, usize), BigRational> = BTreeMap::new();
    for a in &configs {
        for b in &configs {
            let d = union_decompose(a, b).map_err(|e| e.to_string())?;
            let outcomes = resample_outcomes(&d).map_err(|e| e.to_string())?;
            let share = &mass / BigRational::from_integer(outcomes.len().into());
            for (x, y) in outcomes {
                *out.entry((index[&key(&x)], index[&key(&y)])).or_insert_with(BigRational::zero) += &share;
            }
        }
    }
    if out.len() == n * n && out.values().all(|p| *p == mass) {
        Ok(format!("{} pairs, each with mass exactly 1/{}", n * n, n * n))
    } else {
        Err(format!("{} of {} pairs reached, masses differ", out.len(), n * n))
    }
}

fn c8() -> Outcome {
    let samples = 400;
    let mut rows = Vec::new();
    for k in [16usize, 32, 64] {
        let s1 = spec(k, [1.0; 3], 11, samples * k, 4 * k * k, k);
        let s2 = SamplerSpec { seed: 12, ..s1.clone() };
        let mut xs = Vec::new();
        for (a, b) in Sampler::new(&s1).unwrap().zip(Sampler::new(&s2).unwrap()) {
            let d = union_decompose(&a, &b).map_err(|e| e.to_string())?;
            let c = surrounding_counts(&d);
            xs.push(c.iter().map(|&x| x as f64).sum::<f64>() / c.len() as f64);
        }
        let (mean, sigma) = batch_mean(&xs);
        rows.push((k, mean, sigma));
    }
    let msg: Vec<String> =
        rows.iter().map(|(k, m, s)| format!("k={k}: {m:.4} ± {:.4}", 1.96 * s)).collect();
    let msg = format!("{samples} samples each, {}", msg.join(", "));
    let increasing = rows.windows(2).all(|r| r[1].1 > r[0].1);
    let apart = rows[0].1 + 1.96 * rows[0].2 < rows[2].1 - 1.96 * rows[2].2;
    if increasing && apart {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c9() -> Outcome {
    let mut attempts = 0;
    for seed in 0..1000 {
        let fx = random_xor_fixture(40, seed).map_err(|e| format!("seed {seed}: {e}"))?;
        attempts += fx.attempts;
        if !fx.holds().map_err(|e| e.to_string())? {
            return Err(format!("seed {seed}: neither w nor w⊕Γ has a long surrounding loop"));
        }
    }
    Ok(format!("1000 fixtures on a 40×40 window ({attempts} draws)"))
}

fn compatible(p: &ThreePartition, q: &ThreePartition) -> bool {
    let inside = |x: &ThreePartition, y: &ThreePartition| {
        let xs = x.parts();
        (0..3).any(|i| (0..3).any(|j| i != j && y.parts().iter().any(|&b| (xs[i] | xs[j]) & !b == 0)))
    };
    inside(p, q) || inside(q, p)
}

fn c10() -> Outcome {
    let mut sizes = Vec::new();
    for n in 3..=7 {
        let (size, family) = max_compatible_family(n).map_err(|e| e.to_string())?;
        let pairwise = family.iter().enumerate().all(|(i, p)| family[i + 1..].iter().all(|q| compatible(p, q)));
        if size > n - 2 || family.len() != size || !pairwise {
            return Err(format!("|S|={n}: family of {size}"));
        }
        sizes.push(format!("{n}:{size}"));
    }
    if !sizes[0].ends_with(":1") {
        return Err("no equality at |S|=3".into());
    }
    Ok(format!("max family sizes {}", sizes.join(" ")))
}

fn c11() -> Outcome {
    let radii = SwapRadii { r0: 11.0, r1: 32.0, big_r: 76.0 };
    let (mut done, mut seed, mut flips) = (0, 0u64, 0);
    while done < 500 {
        if let Some(fx) = common::swap_fixture(160, 180, radii, 0.6, seed) {
            flips += common::check_swap(&fx, radii).map_err(|e| format!("seed {seed}: {e}"))?;
            done += 1;
        }
        seed += 1;
    }
    Ok(format!("500 eligible of {seed} draws, {flips} flips in total"))
}

fn c12() -> Outcome {
    let (mut done, mut seed) = (0, 0u64);
    let mut cases = [0usize; 2];
    while done < 500 {
        if let Some(cfg) = common::unglue_fixture(60, 68, 6.0, 24.0, 0.6, seed) {
            let case = common::check_unglue(&cfg, 6.0, 24.0).map_err(|e| format!("seed {seed}: {e}"))?;
            cases[(case == UnglueCase::Flipped) as usize] += 1;
            done += 1;
        }
        seed += 1;
    }
    Ok(format!("500 eligible of {seed} draws ({} between, {} flipped)", cases[0], cases[1]))
}

fn c13() -> Outcome {
    let k = 64;
    let n = 1000;
    let s = spec(k, [1.0; 3], 21, n * k, 4 * k * k, k);
    let (mut tri, mut probes, mut samples) = (0, 0, 0);
    for m in Sampler::new(&s).unwrap() {
        let w = m.complement();
        let cl = dual_clusters(&w);
        let b = trifurcation_bound(&w, &cl, FaceCoord::new(0, 0), 4, 12.0).map_err(|e| e.to_string())?;
        if !b.holds() {
            return Err(format!("sample {samples}: {} trifurcations but {} sphere faces", b.trifurcations, b.sphere_faces));
        }
        tri += b.trifurcations;
        probes += b.probes;
        samples += 1;
    }
    let freq = tri as f64 / probes as f64;
    let msg = format!("{samples} samples, {tri} of {probes} probes ({:.3}%), bound held in every sample", 100.0 * freq);
    if samples >= 1000 && freq < 0.01 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn report(id: usize, budget: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let out = f();
    let el = t.elapsed();
    let late = budget.is_some_and(|b| el > b);
    let pass = out.is_ok() && !late;
    let detail = match out {
        Ok(s) | Err(s) => s,
    };
    let limit = if late { " (over time budget)" } else { "" };
    println!("criterion {id:>2} {}: {detail} [{:.1} s{limit}]", if pass { "PASS" } else { "FAIL" }, el.as_secs_f64());
    pass
}

fn main() {
    let minute = Some(Duration::from_secs(60));
    let t = Instant::now();
    let ch = chain_345();
    println!("(3,4,5) k=48 chain: {} samples in {:.1} s", ch.triples.len(), t.elapsed().as_secs_f64());
    let results = [
        report(1, minute, c1),
        report(2, minute, c2),
        report(3, None, || c3(&ch)),
        report(4, minute, c4),
        report(5, None, || c5(&ch)),
        report(6, minute, c6),
        report(7, minute, c7),
        report(8, None, c8),
        report(9, None, c9),
        report(10, None, c10),
        report(11, None, c11),
        report(12, None, c12),
        report(13, None, c13),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed < results.len() && std::env::var_os("HEXLOOP_STRICT").is_some() {
        std::process::exit(1);
    }
}
