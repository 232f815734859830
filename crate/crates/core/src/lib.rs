//! Numerical toolkit for limit sets of Kleinian groups: hyperbolic geometry,
//! word enumeration, Patterson–Sullivan measures, boundary crossed products
//! and finite truncations of Fredholm modules.

pub mod crossed_product;
pub mod error;
pub mod groups;
pub mod hyperbolic;
pub mod kcycles;
pub mod linalg;
pub mod mobius;
pub mod patterson_sullivan;
pub mod word;

pub use error::{Error, Result};
pub use groups::{GroupKind, GroupPresentation, GroupSpec};
pub use hyperbolic::{busemann, geodesic_toward, hyp_distance, BoundaryPoint, InteriorPoint, Isometry};
pub use word::Word;
