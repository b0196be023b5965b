//! Numerical kernels shared by the rest of the crate.

pub mod distribution;
pub mod eigen;
pub mod empirical;
pub mod kmeans;
pub mod nmf;
pub mod special;
pub mod stats;

pub use distribution::{open_unit, Distribution, Tabulated};
pub use eigen::{eigen_real_parts, eigen_real_parts_top, eigenvalues_sorted, EigenReal};
pub use empirical::{rank_levels, tie_level, EmpiricalCdf};
pub use kmeans::{kmeans, Clustering};
pub use nmf::{rank_one_factorize, RankOne};
