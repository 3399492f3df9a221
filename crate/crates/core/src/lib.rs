//! Exact q-difference Drinfeld-Sokolov reduction.

pub mod cyclo;
pub mod error;
pub mod gauge;
pub mod loop_sl;
pub mod lattice;
pub mod matrix;
pub mod miura;
pub mod poly;
pub mod ratfunc;
pub mod ring;
pub mod rmatrix;
pub mod roots;
pub mod series;
pub mod verify;

pub use cyclo::Cyclo;
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use poly::Poly;
pub use ratfunc::CycloRat;
pub use ring::{Dual, Field, Rational, Ring};
pub use series::LaurentSeries;
pub use roots::{CoxeterData, RootSystem, RootType};
pub use loop_sl::{CanonicalOperator, LoopMatrix};
pub use gauge::GaugeFixResult;
pub use lattice::{LatticeConnection, LatticeR, TwistedFactorization};
pub use miura::{CartanPoissonOp, MiuraData};
pub use rmatrix::{BlockOperator, ModeOperator};
