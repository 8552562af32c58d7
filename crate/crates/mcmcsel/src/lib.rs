pub mod divergence;
pub mod error;
pub mod knn;
pub mod quadrature;
pub mod seed;
pub mod stats;
pub mod target;
