//! Scattering quantum walks on chains and rings of star graphs.
//!
//! The crate has four layers:
//!
//! * [`maze`]: the graph family, its directed-edge basis and the neighbor
//!   oracle that hides which spoke of each star is the connection.
//! * [`walk`]: exact real-amplitude state-vector evolution.
//! * [`analytic`]: closed forms (reduced Grover rotation, ring Bloch sums,
//!   mirror-chain amplitudes, Bessel approximations, integer-step bounds).
//! * [`recovery`]: path-recovery strategies and the classical baseline.
//!
//! [`verify`] bundles the cross-checks between simulation and closed forms.

pub mod analytic;
pub mod error;
pub mod maze;
pub mod recovery;
pub mod verify;
pub mod walk;

pub use error::{Error, Result};
pub use maze::{DirectedEdge, MazeSpec, NeighborAnswer, Topology, Vertex};
pub use walk::{StatePrescription, WalkState};
