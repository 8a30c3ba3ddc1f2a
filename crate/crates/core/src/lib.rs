//! Euler characteristics of Milnor fibres, boundaries and links of real
//! polynomial map germs: closed formulas, fibre sampling and Vietoris–Rips
//! estimation.

pub mod estimator;
pub mod germ;
pub mod formulas;
pub mod grid;
pub mod sampler;
pub mod space;

pub use germ::{GermError, GermFlags, MapGerm, PolyMap, Polynomial};
pub use space::{chi, ChiValue, SpaceExpr};
