pub mod dist;
pub mod levy;
pub mod metrics;
pub mod quadfun;
pub mod spectral;
pub mod stein;
pub mod expcli;
