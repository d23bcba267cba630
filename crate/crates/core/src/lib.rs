//! Zeta functions of cyclic covers y^r = F(x) of the projective line over a
//! prime field, by p-adic reduction in Monsky-Washnitzer cohomology with
//! linear-recurrence interval products.

#[cfg(feature = "cli")]
pub mod cli;
pub mod curve;
pub mod error;
pub mod fp;
pub mod frob;
pub mod horizontal;
pub mod linrec;
pub mod oracle;
pub mod padic;
pub mod vertical;
pub mod zeta;

pub use curve::CurveSpec;
pub use error::{Error, Result};
pub use zeta::{compute_zeta, Options, Strategy, ZetaResult};
