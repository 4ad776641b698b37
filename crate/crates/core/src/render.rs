//! Standalone SVG pictures of configurations.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::height::{heights_from_edges, increment, HeightField};
use crate::hexlattice::{EdgeType, FaceCoord, Lattice, Point};
use crate::matching::{EdgeConfig, EdgeSet};
use crate::topology::strands_of;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Layer {
    /// Dimers colored by edge type.
    #[default]
    Dimers,
    /// Loops and paths of the complement, one color per strand.
    Loops,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RenderOptions {
    /// Pixels per unit length.
    pub scale: f64,
    pub layer: Layer,
    pub lattice: bool,
    pub heights: bool,
    pub highlight_faces: Vec<FaceCoord>,
    pub highlight_edges: Vec<usize>,
    pub title: Option<String>,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            scale: 24.0,
            layer: Layer::Dimers,
            lattice: true,
            heights: false,
            highlight_faces: Vec::new(),
            highlight_edges: Vec::new(),
            title: None,
        }
    }
}

const TYPE_COLORS: [&str; 3] = ["#d62728", "#2ca02c", "#1f77b4"];

fn strand_color(i: usize) -> String {
    let hue = (i as f64 * 137.507_764) % 360.0;
    format!("hsl({hue:.1},70%,40%)")
}

struct Canvas {
    scale: f64,
    min: Point,
    body: String,
}

impl Canvas {
    fn xy(&self, p: Point) -> (f64, f64) {
        ((p.re - self.min.re) * self.scale, (self.min.im - p.im) * self.scale)
    }

    fn polygon(&mut self, pts: &[Point], style: &str) {
        let coords: Vec<String> = pts
            .iter()
            .map(|&p| {
                let (x, y) = self.xy(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(self.body, r#"<polygon points="{}" {style}/>"#, coords.join(" "));
    }

    fn line(&mut self, a: Point, b: Point, style: &str) {
        let (x1, y1) = self.xy(a);
        let (x2, y2) = self.xy(b);
        let _ = writeln!(self.body, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" {style}/>"#);
    }
}

fn face_polygon(f: FaceCoord) -> Vec<Point> {
    f.corners().iter().map(|v| v.position()).collect()
}

fn edge_segment(lat: &Lattice, e: usize) -> (Point, Point) {
    let id = lat.edge(e);
    let w = id.white().position();
    (w, w + id.etype.vector())
}

/// Checks that adjacent drawn faces differ by a legal increment.
fn check_heights(lat: &Lattice, dimers: &EdgeSet, h: &HeightField) -> Result<()> {
    for fi in 0..lat.num_faces() {
        if !lat.face_is_interior(fi) {
            continue;
        }
        let f = lat.face(fi);
        let hf = h.value(fi);
        for s in 0..6 {
            let (Some(e), Some(hg)) = (lat.face_edges(fi)[s], h.at(f.step(s))) else { continue };
            let d = hg - hf;
            if d != increment(s, dimers.contains(e)) || !(d == 2 || d == -2 || d == 1 || d == -1) {
                return Err(Error::Invariant(format!("illegal height step {d} across {}", lat.edge(e))));
            }
        }
    }
    Ok(())
}

/// Draws the configuration given by its dimer edges (the loop edges are the
/// rest). On windows the dimer side is the complement of the loop edges.
pub fn render_edges(lat: &Arc<Lattice>, dimers: &EdgeSet, opts: &RenderOptions) -> Result<String> {
    if !(opts.scale > 0.0) {
        return Err(Error::InvalidParameter("scale must be positive".into()));
    }
    let faces: Vec<usize> = (0..lat.num_faces()).filter(|&f| lat.face_is_interior(f)).collect();
    if faces.is_empty() {
        return Err(Error::InvalidParameter("nothing to draw".into()));
    }
    let pts: Vec<Point> = faces.iter().flat_map(|&f| face_polygon(lat.face(f))).collect();
    let (mut lo, mut hi) = (pts[0], pts[0]);
    for p in &pts {
        lo = Point::new(lo.re.min(p.re), lo.im.min(p.im));
        hi = Point::new(hi.re.max(p.re), hi.im.max(p.im));
    }
    let pad = 0.5;
    let min = Point::new(lo.re - pad, hi.im + pad);
    let width = (hi.re - lo.re + 2.0 * pad) * opts.scale;
    let height = (hi.im - lo.im + 2.0 * pad) * opts.scale;
    let mut c = Canvas { scale: opts.scale, min, body: String::new() };
    let stroke = opts.scale / 24.0;

    let heights = if opts.heights {
        let h = heights_from_edges(lat, dimers, lat.face(faces[0]))?;
        check_heights(lat, dimers, &h)?;
        Some(h)
    } else {
        None
    };
    if let Some(h) = &heights {
        let vals: Vec<i64> = faces.iter().map(|&f| h.value(f)).collect();
        let (a, b) = (*vals.iter().min().unwrap(), *vals.iter().max().unwrap());
        let span = (b - a).max(1) as f64;
        for (&f, &v) in faces.iter().zip(&vals) {
            let g = (235.0 - 150.0 * (v - a) as f64 / span).round() as u8;
            c.polygon(&face_polygon(lat.face(f)), &format!(r#"fill="rgb({g},{g},{g})" stroke="none""#));
        }
    }
    if opts.lattice {
        for &f in &faces {
            c.polygon(
                &face_polygon(lat.face(f)),
                &format!(r##"fill="none" stroke="#bbbbbb" stroke-width="{:.2}""##, stroke),
            );
        }
    }
    for f in &opts.highlight_faces {
        let idx = lat.face_index(lat.k().map_or(*f, |k| f.reduce(k)));
        if idx.is_none() {
            return Err(Error::InvalidParameter(format!("highlighted face {f} is not drawn")));
        }
        c.polygon(&face_polygon(*f), r##"fill="#ffbf00" fill-opacity="0.55" stroke="#ff7f00""##);
    }
    match opts.layer {
        Layer::Dimers => {
            for e in dimers.iter() {
                let (a, b) = edge_segment(lat, e);
                let t = lat.edge(e).etype;
                let style = format!(
                    r#"stroke="{}" stroke-width="{:.2}" stroke-linecap="round""#,
                    TYPE_COLORS[t.index()],
                    4.0 * stroke
                );
                c.line(a, b, &style);
            }
        }
        Layer::Loops => {
            let loops = dimers.complement();
            for (i, s) in strands_of(lat, &loops).strands.iter().enumerate() {
                let style = format!(
                    r#"stroke="{}" stroke-width="{:.2}" stroke-linecap="round""#,
                    strand_color(i),
                    3.0 * stroke
                );
                for &e in &s.edges {
                    let (a, b) = edge_segment(lat, e);
                    c.line(a, b, &style);
                }
            }
        }
    }
    for &e in &opts.highlight_edges {
        if e >= lat.num_edges() {
            return Err(Error::InvalidParameter(format!("edge index {e} out of range")));
        }
        let (a, b) = edge_segment(lat, e);
        c.line(a, b, &format!(r##"stroke="#000000" stroke-width="{:.2}" stroke-dasharray="2,2""##, 1.5 * stroke));
    }

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.2} {height:.2}">"#
    );
    if let Some(t) = &opts.title {
        let _ = writeln!(out, "<title>{}</title>", escape(t));
    }
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    out.push_str(&c.body);
    out.push_str("</svg>\n");
    Ok(out)
}

/// Draws any edge configuration. Loop configurations are drawn through their
/// dimer complement so both layers are available.
pub fn render<C: EdgeConfig>(config: &C, is_loop: bool, opts: &RenderOptions) -> Result<String> {
    let dimers = if is_loop { config.edges().complement() } else { config.edges().clone() };
    render_edges(config.lattice(), &dimers, opts)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Edge types in drawing order, exposed for legends.
pub fn type_colors() -> [(EdgeType, &'static str); 3] {
    [(EdgeType::A, TYPE_COLORS[0]), (EdgeType::B, TYPE_COLORS[1]), (EdgeType::C, TYPE_COLORS[2])]
}
