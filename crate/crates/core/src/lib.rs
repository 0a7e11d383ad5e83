pub mod dispersion;
pub mod eval;
pub mod mdn;
pub mod mfp;
pub mod rng;
pub mod wavefield;
