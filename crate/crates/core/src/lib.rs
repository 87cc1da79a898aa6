pub mod arith;
pub mod cache;
pub mod dirichlet;
pub mod error;
pub mod measures;
pub mod norms;
pub mod polydisc;
pub mod quadrature;
pub mod sampling;
pub mod volterra;
pub mod zeta;

pub use error::{Error, Result};
pub use dirichlet::{Character, DirichletSeries, Evaluation, LogPowerTail, PolydiscPolynomial};
pub use measures::{AdmissibleMeasure, MeasureSpec, WeightRule};
pub use norms::{BlochWeight, NormRecord, SeminormEstimate, StripGrid};
pub use num_complex::Complex64;
pub use polydisc::{MobiusTuple, PolydiscGrid};
pub use quadrature::QuadratureConfig;
pub use sampling::TorusRule;
pub use volterra::FiniteSectionMatrix;
