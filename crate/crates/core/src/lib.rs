//! Exact arithmetic, local symbols and quadratic forms over ℚ, quaternion
//! algebras, and a certificate engine for symbolic field towers.

pub mod arith;
pub mod forms;
pub mod local;
pub mod oracle;
pub mod quaternion;
pub mod tower;
