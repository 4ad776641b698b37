//! The `hexloop` command-line tool.
//!
//! Every subcommand reads an optional JSON [`RunConfig`] (`--config`);
//! command-line flags override its fields, and built-in defaults fill the
//! rest. Output schemas:
//!
//! | command | file | columns |
//! |---|---|---|
//! | enumerate | `--out` | `i,j,count` |
//! | sample | `--log` | `sweep,acceptance,count_a,count_b,count_c` |
//! | sample | `--report` | `sample,cycles,winding,max_cycle_length,clusters,trifurcations,probes,flags` |
//! | stats | `--out` | `quantity,empirical,analytic,sigma,z` |
//! | kasteleyn-eval | `--out` | `quantity,input,value,error_estimate` |
//! | double-dimer | `--out` | `sample,doubled,cycles,homology,surrounding` |
//!
//! Binary configuration files use the format of [`crate::matching`].
//! `swap-demo` writes `before.svg`, `after.svg` and `flips.json` into the
//! `--out` directory. Exit codes: 0 success, 2 invalid input, 3 failed
//! precondition (frozen weights, infeasible fixture), 4 violated invariant.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::doubledimer::{union_decompose, DoubleDimerReport};
use crate::enumeration::enumerate_all;
use crate::error::{Error, Result};
use crate::glauber::{Sampler, SamplerSpec, SectorChoice};
use crate::hexlattice::{EdgeId, EdgeType, FaceCoord, Lattice, VertexId};
use crate::kasteleyn::{
    angles, edge_probabilities, hexagon_triple_probability, kinv_entry, local_stats, EdgeDisplacement, WeightTriple,
};
use crate::matching::{read_all, write_config, AnyConfig, EdgeConfig, EdgeSet};
use crate::render::{render_edges, Layer, RenderOptions};
use crate::swapper::{eligible_swap_pairs, generate_crossing_window, swap_paths, SwapRadii, WindowSpec};
use crate::topology::TopologyReport;

/// JSON run description. Every field is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Must match the subcommand when given.
    pub command: Option<String>,
    pub k: Option<usize>,
    pub weights: Option<[f64; 3]>,
    /// Height-change sector; absent means the one nearest the weights' slope.
    pub sector: Option<[i64; 2]>,
    pub seed: Option<u64>,
    pub sweeps: Option<usize>,
    pub burn_in: Option<usize>,
    pub thinning: Option<usize>,
    pub lazy: Option<bool>,
    pub probes: Option<Vec<FaceCoord>>,
    /// `(r₀, r₁, R)`.
    pub radii: Option<[f64; 3]>,
    pub tol: Option<f64>,
    pub allow_large: Option<bool>,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub dump: Option<PathBuf>,
    pub log: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub displacements: Option<Vec<[i32; 2]>>,
    /// Edges as `[type, n, m]` with type 0, 1, 2 for A, B, C.
    pub edges: Option<Vec<[i32; 3]>>,
    pub width: Option<usize>,
    pub height: Option<usize>,
    pub paths: Option<usize>,
    pub flips_per_face: Option<f64>,
    pub layer: Option<Layer>,
    pub heights: Option<bool>,
    pub highlight: Option<Vec<FaceCoord>>,
    pub index: Option<usize>,
    pub scale: Option<f64>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Fields set in `over` replace those of `self`.
    pub fn merged(self, over: RunConfig) -> RunConfig {
        macro_rules! pick {
            ($($f:ident),*) => { RunConfig { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            command, k, weights, sector, seed, sweeps, burn_in, thinning, lazy, probes, radii, tol, allow_large,
            input, out, dump, log, report, displacements, edges, width, height, paths, flips_per_face, layer,
            heights, highlight, index, scale
        )
    }

    /// Checks the radii ordering `r₀ < r₁ < R` (and `R < k/2` on a torus).
    pub fn validate(&self) -> Result<()> {
        if let Some([r0, r1, big_r]) = self.radii {
            if !(0.0 < r0 && r0 < r1 && r1 < big_r) {
                return Err(Error::InvalidConfig(format!("radii must satisfy 0 < r0 < r1 < R, got {r0}, {r1}, {big_r}")));
            }
            if let Some(k) = self.k {
                if self.command.as_deref() != Some("swap-demo") && !(big_r < k as f64 / 2.0) {
                    return Err(Error::InvalidConfig(format!("R = {big_r} must be below k/2 = {}", k as f64 / 2.0)));
                }
            }
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err(Error::InvalidConfig("tol must be positive".into()));
            }
        }
        Ok(())
    }

    fn need_k(&self) -> Result<usize> {
        self.k.ok_or_else(|| Error::InvalidConfig("k is required".into()))
    }

    fn weight_triple(&self) -> Result<WeightTriple> {
        let [a, b, c] = self.weights.unwrap_or([1.0, 1.0, 1.0]);
        WeightTriple::new(a, b, c)
    }

    fn sampler_spec(&self) -> Result<SamplerSpec> {
        let spec = SamplerSpec {
            k: self.need_k()?,
            weights: self.weight_triple()?.as_array(),
            sector: self.sector.map_or(SectorChoice::FreeStart, |[i, j]| SectorChoice::Fixed(i, j)),
            seed: self.seed.unwrap_or(0),
            sweeps: self.sweeps.unwrap_or(100),
            burn_in: self.burn_in.unwrap_or(100),
            thinning: self.thinning.unwrap_or(1),
            lazy: self.lazy.unwrap_or(false),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Parser, Debug)]
#[command(name = "hexloop", version, about = "Dimers and fully packed loops on the honeycomb lattice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exhaustive enumeration of the k×k torus, summarized by sector.
    Enumerate(Flags),
    /// Flip-dynamics samples in a height-change sector.
    Sample(Flags),
    /// Empirical edge and hexagon statistics against the analytic values.
    Stats(Flags),
    /// Inverse Kasteleyn entries and local edge probabilities.
    KasteleynEval(Flags),
    /// Superpositions of two independent samples.
    DoubleDimer(Flags),
    /// Swaps two crossing paths in a random window.
    SwapDemo(Flags),
    /// SVG picture of a stored configuration.
    Render(Flags),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LayerArg {
    Dimers,
    Loops,
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    /// Edge weights a,b,c.
    #[arg(long, value_parser = parse_triple::<f64>)]
    weights: Option<[f64; 3]>,
    /// Height-change sector i,j.
    #[arg(long, value_parser = parse_pair::<i64>, allow_hyphen_values = true)]
    sector: Option<[i64; 2]>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    thinning: Option<usize>,
    #[arg(long)]
    lazy: bool,
    /// Probe face n,m (repeatable).
    #[arg(long = "probe", value_parser = parse_face, allow_hyphen_values = true)]
    probes: Vec<FaceCoord>,
    /// Radii r0,r1,R.
    #[arg(long, value_parser = parse_triple::<f64>)]
    radii: Option<[f64; 3]>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    allow_large: bool,
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output file (`-` for stdout) or, for swap-demo, directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Binary configuration dump.
    #[arg(long)]
    dump: Option<PathBuf>,
    /// Per-sample sweep log.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Per-sample topology report.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Displacement dn,dm of an inverse Kasteleyn entry (repeatable).
    #[arg(long = "displacement", value_parser = parse_pair::<i32>, allow_hyphen_values = true)]
    displacements: Vec<[i32; 2]>,
    /// Edge T:n,m with T one of A, B, C (repeatable; joint probability).
    #[arg(long = "edge", value_parser = parse_edge, allow_hyphen_values = true)]
    edges: Vec<[i32; 3]>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    flips_per_face: Option<f64>,
    #[arg(long, value_enum)]
    layer: Option<LayerArg>,
    /// Shade faces by height.
    #[arg(long)]
    heights: bool,
    /// Highlighted face n,m (repeatable).
    #[arg(long = "highlight", value_parser = parse_face, allow_hyphen_values = true)]
    highlight: Vec<FaceCoord>,
    /// Record index in the input file.
    #[arg(long)]
    index: Option<usize>,
    #[arg(long)]
    scale: Option<f64>,
}

fn split_numbers<T: std::str::FromStr>(s: &str, n: usize) -> std::result::Result<Vec<T>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(format!("expected {n} comma-separated numbers, got `{s}`"));
    }
    parts.iter().map(|p| p.parse().map_err(|_| format!("bad number `{p}`"))).collect()
}

fn parse_triple<T: std::str::FromStr + Copy>(s: &str) -> std::result::Result<[T; 3], String> {
    let v = split_numbers(s, 3)?;
    Ok([v[0], v[1], v[2]])
}

fn parse_pair<T: std::str::FromStr + Copy>(s: &str) -> std::result::Result<[T; 2], String> {
    let v = split_numbers(s, 2)?;
    Ok([v[0], v[1]])
}

fn parse_face(s: &str) -> std::result::Result<FaceCoord, String> {
    let [n, m] = parse_pair::<i32>(s)?;
    Ok(FaceCoord::new(n, m))
}

fn parse_edge(s: &str) -> std::result::Result<[i32; 3], String> {
    let (t, rest) = s.split_once(':').ok_or_else(|| format!("expected T:n,m, got `{s}`"))?;
    let t = match t.trim() {
        "A" | "a" => 0,
        "B" | "b" => 1,
        "C" | "c" => 2,
        other => return Err(format!("unknown edge type `{other}`")),
    };
    let [n, m] = parse_pair::<i32>(rest)?;
    Ok([t, n, m])
}

impl Flags {
    fn overrides(&self) -> RunConfig {
        let list = |v: &Vec<FaceCoord>| (!v.is_empty()).then(|| v.clone());
        RunConfig {
            command: None,
            k: self.k,
            weights: self.weights,
            sector: self.sector,
            seed: self.seed,
            sweeps: self.sweeps,
            burn_in: self.burn_in,
            thinning: self.thinning,
            lazy: self.lazy.then_some(true),
            probes: list(&self.probes),
            radii: self.radii,
            tol: self.tol,
            allow_large: self.allow_large.then_some(true),
            input: self.input.clone(),
            out: self.out.clone(),
            dump: self.dump.clone(),
            log: self.log.clone(),
            report: self.report.clone(),
            displacements: (!self.displacements.is_empty()).then(|| self.displacements.clone()),
            edges: (!self.edges.is_empty()).then(|| self.edges.clone()),
            width: self.width,
            height: self.height,
            paths: self.paths,
            flips_per_face: self.flips_per_face,
            layer: self.layer.map(|l| match l {
                LayerArg::Dimers => Layer::Dimers,
                LayerArg::Loops => Layer::Loops,
            }),
            heights: self.heights.then_some(true),
            highlight: list(&self.highlight),
            index: self.index,
            scale: self.scale,
        }
    }

    /// File fields, then flags, for the named command.
    fn resolve(&self, name: &str) -> Result<RunConfig> {
        let base = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(c) = &base.command {
            if c != name {
                return Err(Error::InvalidConfig(format!("configuration is for `{c}`, not `{name}`")));
            }
        }
        let mut cfg = base.merged(self.overrides());
        cfg.command = Some(name.to_string());
        cfg.validate()?;
        Ok(cfg)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::InvalidConfig(format!("cannot write {}: {e}", path.display())))
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) if p.as_os_str() != "-" => Ok(Box::new(create(p)?)),
        _ => Ok(Box::new(std::io::stdout().lock())),
    }
}

fn finish(mut w: impl Write) -> Result<()> {
    w.flush()?;
    Ok(())
}

/// Runs the tool and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            eprintln!("hexloop: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Enumerate(f) => cmd_enumerate(&f.resolve("enumerate")?),
        Command::Sample(f) => cmd_sample(&f.resolve("sample")?),
        Command::Stats(f) => cmd_stats(&f.resolve("stats")?),
        Command::KasteleynEval(f) => cmd_kasteleyn_eval(&f.resolve("kasteleyn-eval")?),
        Command::DoubleDimer(f) => cmd_double_dimer(&f.resolve("double-dimer")?),
        Command::SwapDemo(f) => cmd_swap_demo(&f.resolve("swap-demo")?),
        Command::Render(f) => cmd_render(&f.resolve("render")?),
    }
}

pub fn cmd_enumerate(cfg: &RunConfig) -> Result<()> {
    let table = enumerate_all(cfg.need_k()?, cfg.allow_large.unwrap_or(false))?;
    if let Some(p) = &cfg.dump {
        let mut w = create(p)?;
        for m in table.configs() {
            write_config(&mut w, m)?;
        }
        finish(w)?;
    }
    let mut w = output(cfg.out.as_ref())?;
    writeln!(w, "i,j,count")?;
    for s in table.summary() {
        writeln!(w, "{},{},{}", s.i, s.j, s.count)?;
    }
    finish(w)
}

pub fn cmd_sample(cfg: &RunConfig) -> Result<()> {
    let spec = cfg.sampler_spec()?;
    let mut sampler = Sampler::new(&spec)?;
    let lat = Sampler::chain(&sampler).config().lattice().clone();
    let probes = probe_indices(&lat, cfg.probes.as_deref().unwrap_or(&[]))?;
    let r = cfg.radii.map_or(1.0, |r| r[0]);
    let mut dump = cfg.out.as_ref().map(|p| create(p)).transpose()?;
    let mut log = output(cfg.log.as_ref())?;
    let mut report = cfg.report.as_ref().map(|p| create(p)).transpose()?;
    writeln!(log, "sweep,acceptance,count_a,count_b,count_c")?;
    if let Some(w) = report.as_mut() {
        writeln!(w, "sample,cycles,winding,max_cycle_length,clusters,trifurcations,probes,flags")?;
    }
    let mut i = 0;
    while let Some(m) = sampler.next() {
        let l = sampler.last_log().expect("log after a sample");
        writeln!(log, "{},{:.6},{},{},{}", l.sweep, l.acceptance, l.count_a, l.count_b, l.count_c)?;
        if let Some(w) = dump.as_mut() {
            write_config(w, &m)?;
        }
        if let Some(w) = report.as_mut() {
            let t = TopologyReport::new(i, &m.complement(), &probes, r)?;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                t.sample, t.cycles, t.winding, t.max_cycle_length, t.clusters, t.trifurcations, t.probes, t.flags
            )?;
        }
        i += 1;
    }
    if let Some(w) = dump {
        finish(w)?;
    }
    if let Some(w) = report {
        finish(w)?;
    }
    finish(log)
}

fn probe_indices(lat: &Lattice, probes: &[FaceCoord]) -> Result<Vec<usize>> {
    let k = lat.k().unwrap_or(0);
    probes
        .iter()
        .map(|f| {
            let g = if k > 0 { f.reduce(k) } else { *f };
            lat.face_index(g).ok_or_else(|| Error::InvalidConfig(format!("probe face {f} is not in the lattice")))
        })
        .collect()
}

/// Per-sample values of one statistic, summarized as mean and standard
/// error. From 40 samples on the error comes from 20 batch means, which
/// absorbs the autocorrelation of the chain.
fn mean_and_sigma(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.iter().all(|&x| x == xs[0]) {
        return (xs[0], 0.0);
    }
    let means: Vec<f64> = if xs.len() >= 40 {
        let b = xs.len() / 20;
        xs.chunks_exact(b).take(20).map(|c| c.iter().sum::<f64>() / b as f64).collect()
    } else {
        xs.to_vec()
    };
    let m = means.len() as f64;
    let mu = means.iter().sum::<f64>() / m;
    let var = means.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

fn z_score(emp: f64, analytic: f64, sigma: f64) -> f64 {
    if sigma > 0.0 {
        (emp - analytic) / sigma
    } else if (emp - analytic).abs() <= 1e-12 * analytic.abs().max(1.0) {
        0.0
    } else {
        f64::INFINITY.copysign(emp - analytic)
    }
}

pub fn cmd_stats(cfg: &RunConfig) -> Result<()> {
    let wt = cfg.weight_triple()?;
    angles(&wt)?;
    let spec = cfg.sampler_spec()?;
    let (pa, pb, pc) = edge_probabilities(&wt)?;
    let hex = hexagon_triple_probability(&wt)?;
    let mut series: [Vec<f64>; 4] = Default::default();
    for m in Sampler::new(&spec)? {
        let lat = m.lattice();
        let faces = lat.num_faces() as f64;
        let c = m.type_counts();
        for t in 0..3 {
            series[t].push(c[t] as f64 / faces);
        }
        let triples = (0..lat.num_faces())
            .filter(|&f| {
                let e = lat.face_edges(f);
                [0, 2, 4].iter().all(|&s| e[s].is_some_and(|e| m.contains(e)))
            })
            .count();
        series[3].push(triples as f64 / faces);
    }
    if series[0].is_empty() {
        return Err(Error::InvalidConfig("no samples: sweeps must be at least thinning".into()));
    }
    let mut w = output(cfg.out.as_ref())?;
    writeln!(w, "quantity,empirical,analytic,sigma,z")?;
    let names = ["edge_a", "edge_b", "edge_c", "hexagon_triple"];
    for (i, analytic) in [pa, pb, pc, hex].into_iter().enumerate() {
        let (emp, sigma) = mean_and_sigma(&series[i]);
        writeln!(w, "{},{:.8},{:.8},{:.8},{:.4}", names[i], emp, analytic, sigma, z_score(emp, analytic, sigma))?;
    }
    finish(w)
}

fn edge_of(t: i32, n: i32, m: i32) -> EdgeId {
    EdgeId::new(n, m, EdgeType::from_index(t as usize))
}

pub fn cmd_kasteleyn_eval(cfg: &RunConfig) -> Result<()> {
    let wt = cfg.weight_triple()?;
    let tol = cfg.tol.unwrap_or(1e-10);
    let disps = cfg.displacements.clone().unwrap_or_default();
    let edges = cfg.edges.clone().unwrap_or_default();
    if disps.is_empty() && edges.is_empty() {
        return Err(Error::InvalidConfig("give at least one displacement or edge".into()));
    }
    if edges.iter().any(|e| !(0..3).contains(&e[0])) {
        return Err(Error::InvalidConfig("edge type must be 0, 1 or 2".into()));
    }
    let mut w = output(cfg.out.as_ref())?;
    writeln!(w, "quantity,input,value,error_estimate")?;
    for [dn, dm] in disps {
        let v = kinv_entry(&wt, EdgeDisplacement::new(dn, dm), tol)?;
        writeln!(w, "kinv,{dn} {dm},{:.12},{:.3e}", v.value, v.error_estimate)?;
    }
    if !edges.is_empty() {
        let pairs: Vec<(VertexId, VertexId)> = edges
            .iter()
            .map(|&[t, n, m]| {
                let e = edge_of(t, n, m);
                (e.white(), e.black())
            })
            .collect();
        let label: Vec<String> = edges.iter().map(|&[t, n, m]| format!("{}:{n} {m}", ["A", "B", "C"][t as usize])).collect();
        let s = local_stats(&wt, &pairs, tol)?;
        writeln!(w, "edge_probability,{},{:.12},{:.3e}", label.join(" "), s.value, tol)?;
    }
    finish(w)
}

/// Seed of the second chain in a double-dimer run.
fn partner_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

pub fn cmd_double_dimer(cfg: &RunConfig) -> Result<()> {
    let spec = cfg.sampler_spec()?;
    let spec2 = SamplerSpec { seed: partner_seed(spec.seed), ..spec.clone() };
    let probe = cfg.probes.as_ref().and_then(|p| p.first().copied()).unwrap_or(FaceCoord::new(0, 0));
    let mut w = output(cfg.out.as_ref())?;
    writeln!(w, "sample,doubled,cycles,homology,surrounding")?;
    for (i, (a, b)) in Sampler::new(&spec)?.zip(Sampler::new(&spec2)?).enumerate() {
        let b = crate::matching::DimerConfig::new(a.lattice().clone(), b.into_edges())?;
        let d = union_decompose(&a, &b)?;
        let r = DoubleDimerReport::new(i, &d, probe.reduce(spec.k));
        writeln!(w, "{},{},{},{},{}", r.sample, r.doubled, r.cycles, r.homology, r.surrounding)?;
    }
    finish(w)
}

pub fn cmd_swap_demo(cfg: &RunConfig) -> Result<()> {
    let [r0, r1, big_r] = cfg.radii.unwrap_or([11.0, 32.0, 76.0]);
    let radii = SwapRadii { r0, r1, big_r };
    radii.validate()?;
    let spec = WindowSpec {
        width: cfg.width.unwrap_or(160),
        height: cfg.height.unwrap_or(180),
        n_paths: cfg.paths.unwrap_or(2),
        flips_per_face: cfg.flips_per_face.unwrap_or(0.3),
        frozen: radii.frozen_rings(),
        seed: cfg.seed.unwrap_or(0),
    };
    let before = generate_crossing_window(&spec)?;
    let (i1, i2) = *eligible_swap_pairs(&before, radii)
        .first()
        .ok_or_else(|| Error::Precondition("no pair of paths satisfies the swap hypotheses".into()))?;
    let outcome = swap_paths(&before, i1, i2, radii)?;
    let after = &outcome.config;
    let lat = before.lattice();
    let diff = before.edges().xor(after.edges());
    let center = before.center_point();
    let outside: Vec<usize> = diff.iter().filter(|&e| lat.edge_distance(center, e) > big_r).collect();
    if !outside.is_empty() {
        return Err(Error::Invariant(format!("{} changed edges lie outside B(R)", outside.len())));
    }
    let flips = outcome.flips();
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| Error::InvalidConfig(format!("cannot create {}: {e}", dir.display())))?;
    let scale = cfg.scale.unwrap_or(8.0);
    let base = RenderOptions { scale, layer: Layer::Loops, ..Default::default() };
    let svg_before = render_edges(lat, &before.edges().complement(), &base)?;
    let highlighted = RenderOptions {
        highlight_faces: flips.clone(),
        highlight_edges: diff.iter().collect(),
        ..base
    };
    let svg_after = render_edges(lat, &after.edges().complement(), &highlighted)?;
    std::fs::write(dir.join("before.svg"), svg_before)?;
    std::fs::write(dir.join("after.svg"), svg_after)?;
    let json = serde_json::to_string_pretty(&flips).map_err(|e| Error::Invariant(e.to_string()))?;
    std::fs::write(dir.join("flips.json"), json + "\n")?;
    Ok(())
}

pub fn cmd_render(cfg: &RunConfig) -> Result<()> {
    let input = cfg.input.as_ref().ok_or_else(|| Error::InvalidConfig("input is required".into()))?;
    let mut f = File::open(input).map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", input.display())))?;
    let records = read_all(&mut f)?;
    let idx = cfg.index.unwrap_or(0);
    let rec = records
        .get(idx)
        .ok_or_else(|| Error::InvalidConfig(format!("{} has {} records, no index {idx}", input.display(), records.len())))?;
    let lat: Arc<Lattice> = rec.lattice().clone();
    let dimers: EdgeSet = match rec {
        AnyConfig::Dimer(m) => m.edges().clone(),
        AnyConfig::Loop(w) => w.edges().complement(),
    };
    let default_layer = if matches!(rec, AnyConfig::Loop(_)) { Layer::Loops } else { Layer::Dimers };
    let opts = RenderOptions {
        scale: cfg.scale.unwrap_or(24.0),
        layer: cfg.layer.unwrap_or(default_layer),
        heights: cfg.heights.unwrap_or(false),
        highlight_faces: cfg.highlight.clone().unwrap_or_default(),
        title: Some(format!("{} record {idx}", input.display())),
        ..Default::default()
    };
    let svg = render_edges(&lat, &dimers, &opts)?;
    let mut w = output(cfg.out.as_ref())?;
    w.write_all(svg.as_bytes())?;
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file = RunConfig::from_json(r#"{"k": 3, "seed": 5, "weights": [1, 2, 3]}"#).unwrap();
        let over = RunConfig { seed: Some(9), ..Default::default() };
        let m = file.merged(over);
        assert_eq!(m.k, Some(3));
        assert_eq!(m.seed, Some(9));
        assert_eq!(m.weights, Some([1.0, 2.0, 3.0]));
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(matches!(RunConfig::from_json(r#"{"kk": 3}"#), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn radii_must_be_ordered() {
        let bad = RunConfig { radii: Some([3.0, 2.0, 5.0]), ..Default::default() };
        assert!(bad.validate().is_err());
        let big = RunConfig { k: Some(8), radii: Some([1.0, 2.0, 5.0]), ..Default::default() };
        assert!(big.validate().is_err());
        let ok = RunConfig { k: Some(12), radii: Some([1.0, 2.0, 5.0]), ..Default::default() };
        assert!(ok.validate().is_ok());
    }

    #[test]
    fn value_parsers() {
        assert_eq!(parse_triple::<f64>("1,2.5,3").unwrap(), [1.0, 2.5, 3.0]);
        assert!(parse_triple::<f64>("1,2").is_err());
        assert_eq!(parse_face("-1,2").unwrap(), FaceCoord::new(-1, 2));
        assert_eq!(parse_edge("C:0,-1").unwrap(), [2, 0, -1]);
        assert!(parse_edge("D:0,0").is_err());
    }

    #[test]
    fn z_scores() {
        assert_eq!(z_score(0.5, 0.5, 0.0), 0.0);
        assert!(z_score(0.6, 0.5, 0.0).is_infinite());
        assert_eq!(z_score(1.0 / 3.0, 0.333_333_333_333_333_4, 0.0), 0.0);
        assert!((z_score(0.6, 0.5, 0.05) - 2.0).abs() < 1e-12);
        let (m, s) = mean_and_sigma(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["hexloop", "no-such-command"]), 2);
        assert_eq!(run(["hexloop", "enumerate", "--k", "x"]), 2);
        assert_eq!(run(["hexloop", "enumerate"]), 2);
        assert_eq!(run(["hexloop", "--help"]), 0);
    }
}
