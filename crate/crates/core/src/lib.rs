//! Dimers and fully packed loops on the honeycomb lattice.

pub mod cli;
pub mod doubledimer;
pub mod enumeration;
pub mod error;
pub mod glauber;
pub mod height;
pub mod hexlattice;
pub mod kasteleyn;
pub mod matching;
pub mod render;
pub mod swapper;
pub mod topology;

pub use error::{Error, Result};
pub use hexlattice::{Color, EdgeId, EdgeType, FaceCoord, Lattice, VertexId};
pub use matching::{DimerConfig, EdgeConfig, EdgeSet, LoopConfig};
