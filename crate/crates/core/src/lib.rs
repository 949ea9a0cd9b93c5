pub mod arith;
pub mod dos;
pub mod error;
pub mod experiment;
pub mod harmonics;
pub mod lyapunov;
pub mod model;
pub mod pruefer;
pub mod sl2;
pub mod stats;
pub mod verify;
