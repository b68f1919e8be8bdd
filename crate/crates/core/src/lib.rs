pub mod admm;
pub mod error;
pub mod io;
pub mod issapl;
pub mod lasso;
pub mod phi;
pub mod problem;
pub mod prox;
pub mod rng;
pub mod subgradient;
pub mod support;
