//! Dimer and fully packed loop configurations, complement and flips.

use std::io::{Read, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::height::increment;
use crate::hexlattice::{EdgeType, FaceCoord, Lattice};

/// Packed membership bitmask over edge indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeSet {
    words: Vec<u64>,
    len: usize,
}

impl EdgeSet {
    pub fn new(len: usize) -> Self {
        EdgeSet { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn from_indices(len: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut s = EdgeSet::new(len);
        for i in idx {
            s.insert(i);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.words[i >> 6] >> (i & 63) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        self.words[i >> 6] |= 1 << (i & 63);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        self.words[i >> 6] &= !(1 << (i & 63));
    }

    #[inline]
    pub fn toggle(&mut self, i: usize) {
        self.words[i >> 6] ^= 1 << (i & 63);
    }

    pub fn set(&mut self, i: usize, on: bool) {
        if on {
            self.insert(i)
        } else {
            self.remove(i)
        }
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.contains(i))
    }

    pub fn xor(&self, other: &EdgeSet) -> EdgeSet {
        assert_eq!(self.len, other.len);
        EdgeSet { words: self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect(), len: self.len }
    }

    pub fn and(&self, other: &EdgeSet) -> EdgeSet {
        assert_eq!(self.len, other.len);
        EdgeSet { words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(), len: self.len }
    }

    pub fn complement(&self) -> EdgeSet {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        let extra = words.len() * 64 - self.len;
        if extra > 0 {
            let last = words.len() - 1;
            words[last] &= u64::MAX >> extra;
        }
        EdgeSet { words, len: self.len }
    }
}

/// Shared behavior of dimer and loop configurations.
pub trait EdgeConfig: Clone {
    fn lattice(&self) -> &Arc<Lattice>;
    fn edges(&self) -> &EdgeSet;
    fn edges_mut(&mut self) -> &mut EdgeSet;

    fn contains(&self, e: usize) -> bool {
        self.edges().contains(e)
    }

    /// `|E ∩ ∂f|` counted with multiplicity (relevant on the k = 1 torus).
    fn boundary_count(&self, f: usize) -> usize {
        self.lattice().face_edges(f).iter().flatten().filter(|&&e| self.contains(e)).count()
    }

    fn is_flippable(&self, f: usize) -> bool {
        let lat = self.lattice();
        lat.face_is_interior(f) && lat.face_edges(f).iter().all(Option::is_some) && self.boundary_count(f) == 3
    }

    /// Flips in place; returns whether anything changed.
    fn flip_mut(&mut self, f: usize) -> bool {
        if !self.is_flippable(f) {
            return false;
        }
        let fe = self.lattice().face_edges(f);
        let edges = self.edges_mut();
        for e in fe.iter().flatten() {
            edges.toggle(*e);
        }
        true
    }

    fn flip(&self, f: usize) -> Self {
        let mut c = self.clone();
        c.flip_mut(f);
        c
    }

    fn flip_at(&self, f: FaceCoord) -> Self {
        match self.lattice().face_index(f) {
            Some(i) => self.flip(i),
            None => self.clone(),
        }
    }

    /// Applies flips left to right; counts the flips that changed something.
    fn flip_sequence(&self, faces: &[usize]) -> (Self, usize) {
        let mut c = self.clone();
        let applied = faces.iter().filter(|&&f| c.flip_mut(f)).count();
        (c, applied)
    }
}

#[derive(Clone, Debug)]
pub struct DimerConfig {
    lat: Arc<Lattice>,
    edges: EdgeSet,
}

#[derive(Clone, Debug)]
pub struct LoopConfig {
    lat: Arc<Lattice>,
    edges: EdgeSet,
}

impl PartialEq for DimerConfig {
    fn eq(&self, o: &Self) -> bool {
        (Arc::ptr_eq(&self.lat, &o.lat) || self.lat.shape() == o.lat.shape()) && self.edges == o.edges
    }
}

impl PartialEq for LoopConfig {
    fn eq(&self, o: &Self) -> bool {
        (Arc::ptr_eq(&self.lat, &o.lat) || self.lat.shape() == o.lat.shape()) && self.edges == o.edges
    }
}

impl EdgeConfig for DimerConfig {
    fn lattice(&self) -> &Arc<Lattice> {
        &self.lat
    }
    fn edges(&self) -> &EdgeSet {
        &self.edges
    }
    fn edges_mut(&mut self) -> &mut EdgeSet {
        &mut self.edges
    }
}

impl EdgeConfig for LoopConfig {
    fn lattice(&self) -> &Arc<Lattice> {
        &self.lat
    }
    fn edges(&self) -> &EdgeSet {
        &self.edges
    }
    fn edges_mut(&mut self) -> &mut EdgeSet {
        &mut self.edges
    }
}

fn degree_check(lat: &Lattice, edges: &EdgeSet, want: usize, what: &str) -> Result<()> {
    if edges.len() != lat.num_edges() {
        return Err(Error::InvalidConfig(format!("edge set has {} bits, lattice has {} edges", edges.len(), lat.num_edges())));
    }
    for v in 0..lat.num_vertices() {
        if !lat.vertex_is_interior(v) {
            continue;
        }
        let d = lat.vertex_edges(v).iter().filter(|&&e| edges.contains(e)).count();
        if d != want {
            return Err(Error::InvalidConfig(format!("{what}: vertex {} has degree {d}", lat.vertex(v))));
        }
    }
    Ok(())
}

impl DimerConfig {
    pub fn new(lat: Arc<Lattice>, edges: EdgeSet) -> Result<Self> {
        degree_check(&lat, &edges, 1, "not a perfect matching")?;
        Ok(DimerConfig { lat, edges })
    }

    pub fn new_unchecked(lat: Arc<Lattice>, edges: EdgeSet) -> Self {
        DimerConfig { lat, edges }
    }

    /// All edges of one type; a valid matching on any torus.
    pub fn all_of_type(lat: Arc<Lattice>, t: EdgeType) -> Self {
        let n = lat.num_edges();
        let edges = EdgeSet::from_indices(n, (0..n).filter(|&e| lat.edge(e).etype == t));
        DimerConfig { lat, edges }
    }

    pub fn validate(&self) -> Result<()> {
        degree_check(&self.lat, &self.edges, 1, "not a perfect matching")
    }

    pub fn into_edges(self) -> EdgeSet {
        self.edges
    }

    pub fn complement(&self) -> LoopConfig {
        LoopConfig { lat: self.lat.clone(), edges: self.edges.complement() }
    }

    /// Number of dimers of each type.
    pub fn type_counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for e in self.edges.iter() {
            c[self.lat.edge(e).etype.index()] += 1;
        }
        c
    }

    /// `(h(−k,0), h(0,k))` with `h(0,0) = 0`.
    pub fn height_change(&self) -> Result<(i64, i64)> {
        let k = self.lat.k().ok_or_else(|| Error::InvalidParameter("height change needs a torus".into()))? as i32;
        Ok(height_change_along(&self.lat, &self.edges, k, 0, 0))
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        encode(&self.lat, &self.edges, ConfigKind::Dimer)
    }
}

/// Height change measured along the face row through `m = row` and the
/// face column through `n = col`.
pub(crate) fn height_change_along(lat: &Lattice, edges: &EdgeSet, k: i32, row: i32, col: i32) -> (i64, i64) {
    let mut h1 = 0;
    let mut f = FaceCoord::new(0, row);
    for _ in 0..k {
        let fi = lat.face_index(f).unwrap();
        let e = lat.face_edges(fi)[2].unwrap();
        h1 += increment(2, edges.contains(e));
        f = f.step(2);
    }
    let mut h2 = 0;
    let mut f = FaceCoord::new(col, 0);
    for _ in 0..k {
        let fi = lat.face_index(f).unwrap();
        let e = lat.face_edges(fi)[0].unwrap();
        h2 += increment(0, edges.contains(e));
        f = f.step(0);
    }
    (h1, h2)
}

impl LoopConfig {
    pub fn new(lat: Arc<Lattice>, edges: EdgeSet) -> Result<Self> {
        degree_check(&lat, &edges, 2, "not fully packed")?;
        Ok(LoopConfig { lat, edges })
    }

    pub fn new_unchecked(lat: Arc<Lattice>, edges: EdgeSet) -> Self {
        LoopConfig { lat, edges }
    }

    pub fn validate(&self) -> Result<()> {
        degree_check(&self.lat, &self.edges, 2, "not fully packed")
    }

    pub fn into_edges(self) -> EdgeSet {
        self.edges
    }

    /// Back to the dimer configuration; on a window boundary edges are kept
    /// out of the matching, so the result is only meaningful on a torus.
    pub fn complement(&self) -> DimerConfig {
        DimerConfig { lat: self.lat.clone(), edges: self.edges.complement() }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        encode(&self.lat, &self.edges, ConfigKind::Loop)
    }
}

pub fn complement(m: &DimerConfig) -> LoopConfig {
    m.complement()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConfigKind {
    Dimer,
    Loop,
}

/// File magic of the binary configuration format.
pub const MAGIC: [u8; 4] = *b"HXLC";
const VERSION: u8 = 1;
const HEADER_LEN: usize = 12;

/// Binary layout: magic (4), version (1), kind (1: 0 dimer, 1 loop),
/// reserved (2, zero), k (u32 LE), then 3k² membership bits in edge order
/// (cell-major with `cell = m·k + n`, etype-minor), least significant bit
/// first within each byte.
fn encode(lat: &Lattice, edges: &EdgeSet, kind: ConfigKind) -> Result<Vec<u8>> {
    let k = lat.k().ok_or_else(|| Error::InvalidParameter("only torus configurations are serializable".into()))?;
    let nbits = 3 * k * k;
    let mut out = Vec::with_capacity(HEADER_LEN + nbits.div_ceil(8));
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(match kind {
        ConfigKind::Dimer => 0,
        ConfigKind::Loop => 1,
    });
    out.extend_from_slice(&[0, 0]);
    out.extend_from_slice(&(k as u32).to_le_bytes());
    let mut bytes = vec![0u8; nbits.div_ceil(8)];
    for e in edges.iter() {
        bytes[e / 8] |= 1 << (e % 8);
    }
    out.extend_from_slice(&bytes);
    Ok(out)
}

/// A decoded record: either configuration kind.
#[derive(Clone, Debug)]
pub enum AnyConfig {
    Dimer(DimerConfig),
    Loop(LoopConfig),
}

impl AnyConfig {
    pub fn lattice(&self) -> &Arc<Lattice> {
        match self {
            AnyConfig::Dimer(c) => c.lattice(),
            AnyConfig::Loop(c) => c.lattice(),
        }
    }

    pub fn as_dimer(&self) -> DimerConfig {
        match self {
            AnyConfig::Dimer(c) => c.clone(),
            AnyConfig::Loop(c) => c.complement(),
        }
    }
}

/// Reads one record; `Ok(None)` at a clean end of stream. Records with the
/// same k share `cache`'s lattice.
pub fn read_config<R: Read>(r: &mut R, cache: &mut Option<Arc<Lattice>>) -> Result<Option<AnyConfig>> {
    let mut header = [0u8; HEADER_LEN];
    let mut got = 0;
    while got < HEADER_LEN {
        let n = r.read(&mut header[got..])?;
        if n == 0 {
            break;
        }
        got += n;
    }
    if got == 0 {
        return Ok(None);
    }
    if got < HEADER_LEN || header[..4] != MAGIC {
        return Err(Error::Format("bad configuration header".into()));
    }
    if header[4] != VERSION {
        return Err(Error::Format(format!("unsupported version {}", header[4])));
    }
    let k = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let lat = match cache {
        Some(l) if l.k() == Some(k) => l.clone(),
        _ => {
            let l = Arc::new(Lattice::torus(k)?);
            *cache = Some(l.clone());
            l
        }
    };
    let nbits = 3 * k * k;
    let mut bytes = vec![0u8; nbits.div_ceil(8)];
    r.read_exact(&mut bytes).map_err(|_| Error::Format("truncated configuration body".into()))?;
    let edges = EdgeSet::from_indices(nbits, (0..nbits).filter(|&e| bytes[e / 8] >> (e % 8) & 1 == 1));
    match header[5] {
        0 => Ok(Some(AnyConfig::Dimer(DimerConfig::new(lat, edges)?))),
        1 => Ok(Some(AnyConfig::Loop(LoopConfig::new(lat, edges)?))),
        t => Err(Error::Format(format!("unknown configuration kind {t}"))),
    }
}

pub fn read_all<R: Read>(r: &mut R) -> Result<Vec<AnyConfig>> {
    let mut cache = None;
    let mut out = Vec::new();
    while let Some(c) = read_config(r, &mut cache)? {
        out.push(c);
    }
    Ok(out)
}

pub fn write_config<W: Write>(w: &mut W, c: &DimerConfig) -> Result<()> {
    w.write_all(&c.to_bytes()?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hexlattice::EdgeId;

    fn torus(k: usize) -> Arc<Lattice> {
        Arc::new(Lattice::torus(k).unwrap())
    }

    #[test]
    fn k1_complement() {
        let lat = torus(1);
        let m = DimerConfig::all_of_type(lat.clone(), EdgeType::A);
        m.validate().unwrap();
        let w = m.complement();
        w.validate().unwrap();
        let got: Vec<EdgeType> = w.edges().iter().map(|e| lat.edge(e).etype).collect();
        assert_eq!(got, vec![EdgeType::B, EdgeType::C]);
        assert_eq!(w.complement(), m);
        // doubled boundary: A counted twice
        assert_eq!(m.boundary_count(0), 2);
        assert!(!m.is_flippable(0));
    }

    #[test]
    fn complement_sizes() {
        for k in 2..=5 {
            let lat = torus(k);
            for t in EdgeType::ALL {
                let m = DimerConfig::all_of_type(lat.clone(), t);
                assert_eq!(m.edges().count(), k * k);
                assert_eq!(m.complement().edges().count(), 2 * k * k);
            }
        }
    }

    #[test]
    fn flip_basics() {
        let lat = torus(3);
        // every face of the all-A configuration has two A edges on its boundary
        let m = DimerConfig::all_of_type(lat.clone(), EdgeType::A);
        for f in 0..lat.num_faces() {
            assert_eq!(m.boundary_count(f), 2);
            assert_eq!(m.flip(f), m);
        }
    }

    #[test]
    fn frozen_height_changes() {
        for k in 1..=5i64 {
            let lat = torus(k as usize);
            let hc = |t| DimerConfig::all_of_type(lat.clone(), t).height_change().unwrap();
            assert_eq!(hc(EdgeType::A), (2 * k, -k));
            assert_eq!(hc(EdgeType::C), (-k, 2 * k));
            assert_eq!(hc(EdgeType::B), (-k, -k));
        }
    }

    #[test]
    fn serialization_roundtrip() {
        let lat = torus(3);
        let m = DimerConfig::all_of_type(lat.clone(), EdgeType::B);
        let bytes = m.to_bytes().unwrap();
        assert_eq!(bytes.len(), 12 + 4);
        let mut stream = bytes.clone();
        stream.extend(m.complement().to_bytes().unwrap());
        let back = read_all(&mut stream.as_slice()).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].as_dimer(), m);
        assert_eq!(back[1].as_dimer(), m);
        // bit 1 is B(0,0)
        assert_eq!(bytes[12] & 0b111, 0b010);
        let e = lat.edge_index(EdgeId::new(0, 0, EdgeType::B)).unwrap();
        assert_eq!(e, 1);
    }

    #[test]
    fn serialization_rejects_garbage() {
        assert!(read_all(&mut &b"nonsense-bytes"[..]).is_err());
        let lat = torus(2);
        let mut bytes = DimerConfig::all_of_type(lat, EdgeType::A).to_bytes().unwrap();
        bytes.pop();
        assert!(read_all(&mut bytes.as_slice()).is_err());
    }

    #[test]
    fn edgeset_ops() {
        let a = EdgeSet::from_indices(70, [0, 5, 69]);
        let b = EdgeSet::from_indices(70, [5, 6]);
        assert_eq!(a.xor(&b).iter().collect::<Vec<_>>(), vec![0, 6, 69]);
        assert_eq!(a.complement().count(), 67);
        assert_eq!(a.and(&b).count(), 1);
    }
}
