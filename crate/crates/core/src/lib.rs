//! Schottky groups acting on the upper half-plane: exact and ball-arithmetic
//! geometry, verified upper bounds for the dimension of the limit set, and
//! numerical exploration of individual limit points.

pub mod scalar;
pub mod hyperbolic;
pub mod schottky;
pub mod dimension;
pub mod limit;
