//! Reference estimators: KSG and Mixed KSG on k-nearest neighbours, and a
//! CART forest with isotonic calibration. The plain CART forest itself is
//! [`crate::forest::ForestConfig::cart`].

mod digamma;
mod irf;
mod isotonic;
mod knn;
mod ksg;

pub use digamma::digamma;
pub use irf::{irf_estimate, IsotonicForest};
pub use isotonic::{pava, CalibrationMap, ClassCalibrator};
pub use knn::{max_norm, KnnIndex, Neighbor};
pub use ksg::{ksg_estimate, ksg_mi, mixed_ksg_estimate, mixed_ksg_mi, KsgParams};
