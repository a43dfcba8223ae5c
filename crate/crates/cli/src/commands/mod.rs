pub mod geodesic;
pub mod potential;
pub mod transform;
pub mod verify;
pub mod waves;
