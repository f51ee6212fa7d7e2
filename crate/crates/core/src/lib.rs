//! Local surface-area estimators on lattice digitizations of solids.

pub mod configcount;
pub mod decomposition;
pub mod estimator;
pub mod exact;
pub mod experiments;
pub mod geometry;
pub mod lattice;
