//! Twisted and warped products over the real line.

pub mod fiber;
pub mod profile;
pub mod riccati;
pub mod split;
pub mod twisted;

pub use fiber::{Fiber, FiberKind};
pub use profile::WarpingProfile;
pub use riccati::{
    riccati_obstruction, riccati_obstruction_with, BlowUpTrigger, RiccatiConfig, RiccatiReport, RiccatiSample,
    TimeDirection,
};
pub use split::{radial_identity_n, sphere_example_lambda, split_cd_threshold, RadialIdentity, SplitSpace, Threshold};
pub use twisted::{twisted_ricci_analytic, TwistedProduct};
