//! Four-field extended Galerkin discretization of second-order elliptic
//! problems on 2D simplicial meshes.
//!
//! The unknowns are a cellwise flux `p`, a flux residual `p̌` on the
//! skeleton, a cellwise scalar `u` and a scalar residual `ǔ` on the skeleton.
//! The crate assembles the symmetric indefinite block system, performs the
//! static eliminations that turn it into HDG, WG, LDG and mixed DG schemes,
//! and measures inf-sup constants, convergence rates and the `ρ → 0` limits
//! to the conforming primal and mixed methods.
//!
//! The crate is `no_std` (it needs `alloc`); file formats, threads and the
//! command line live in the companion `xg` crate.

#![no_std]

extern crate alloc;

pub mod assembly;
pub mod conditions;
pub mod eliminate;
pub mod error;
pub mod linalg;
pub mod mesh;
pub mod polybasis;
pub mod presets;
pub mod solver;
pub mod spaces;
pub mod verify;

pub use error::XgError;
pub use mesh::{BoundaryKind, EdgeTag, Mesh2D, MeshError};
