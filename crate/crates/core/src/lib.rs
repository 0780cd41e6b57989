//! Surfaces of revolution, curvature functionals and quantitative inequalities
//! for the Helfrich energy with spontaneous curvature.

pub mod body;
pub mod compmesh;
pub mod constructions;
pub mod diameter;
pub mod elliptic;
pub mod error;
pub mod functionals;
pub mod geom;
pub mod inequalities;
pub mod kernels;
pub mod mesh;
pub mod mesh_io;
pub mod minimize;
pub mod nodoid;
pub mod profile;
pub mod qmc;
pub mod quadrature;
pub mod surface;

pub use error::{GeomError, Result};
pub use geom::{RigidMotion, Vec3};
pub use quadrature::{integrate_1d, QuadSpec};
