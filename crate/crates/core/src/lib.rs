//! Separability analysis of bipartite quantum states through the duality
//! between ensembles of a state and Kraus operators of a channel.
//!
//! Numeric code is generic over [`scalar::Real`]; the aliases below fix `f64`.

pub mod criteria;
pub mod decompose;
pub mod duality;
pub mod error;
pub mod factorize;
pub mod io;
pub mod linalg;
pub mod poly;
pub mod scalar;
pub mod states;

pub use error::{Error, Result};

pub type Complex64 = scalar::Complex<f64>;
pub type Matrix = linalg::CMatrix<f64>;
pub type State = states::DensityMatrix<f64>;
pub type StateEnsemble = states::Ensemble<f64>;
pub type Kraus = duality::KrausSet<f64>;
pub type Mixing = duality::MixingMatrix<f64>;
pub type Decomposition = decompose::SeparableDecomposition<f64>;
