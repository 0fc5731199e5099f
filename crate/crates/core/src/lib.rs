pub mod error;
pub mod geom;
pub mod io;
pub mod linalg;
pub mod rng;
pub mod special;
pub mod analytics;
pub mod samplers;
pub mod gof;
pub mod estimators;
pub mod experiments;

pub use error::{Error, Result};
pub use geom::{Cap, Configuration, PlanePoint, Rotation, SpherePoint};
pub use rng::RngSeed;
