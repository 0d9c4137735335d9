//! Hierarchical correlation reconstruction: density estimation and imputation
//! on `[0, 1]^d` from data with missing values.
//!
//! A density is a linear combination `ρ(x) = Σ_f a_f f(x)` of products of
//! orthonormal one-dimensional functions. Each coefficient is the mean of its
//! basis function over the records that observe the function's support, so
//! incomplete records still contribute to every term they can.
//!
//! ```
//! use hcr::{fit, BasisSpec64, Dataset64, Family64, ImputePolicy, Record};
//!
//! let rows = vec![
//!     vec![Some(0.1), Some(0.2)],
//!     vec![Some(0.4), Some(0.5)],
//!     vec![Some(0.8), Some(0.7)],
//!     vec![Some(0.3), None],
//! ];
//! let data = Dataset64::from_rows(rows).unwrap();
//! let spec = BasisSpec64::build_full(vec![Family64::legendre(2); 2], &[0, 2, 2]).unwrap();
//! let model = fit(&spec, &data).unwrap();
//! let filled = model.impute(&Record::new(vec![None, Some(0.5)]), ImputePolicy::Expected).unwrap();
//! assert!(filled[0].values[0] > 0.0 && filled[0].values[0] < 1.0);
//! ```
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! and `*32` aliases fix the type.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis1d;
pub mod dataset;
pub mod density;
mod error;
pub mod estimator;
pub mod impute;
pub mod likelihood;
mod model;
pub mod model_file;
pub mod poly;
pub mod quadrature;
mod scalar;
pub mod slice;
pub mod tensor_basis;

pub use basis1d::{Family1D, FamilyKind};
pub use dataset::{Dataset, Record, Schema, TableOptions, Transform};
pub use error::{HcrError, Result};
pub use estimator::{fit, LearningRateSchedule, PruneReport};
pub use impute::{Imputation, ImputeNote, ImputePolicy};
pub use likelihood::{RefineConfig, RefineOutcome, RepairStrategy};
pub use model::{EvidenceFlag, Model, Subset, Term};
pub use scalar::Scalar;
pub use slice::{Cluster, ConditionalSlice, Mode, SliceMoments};
pub use tensor_basis::{BasisSpec, MultiIndex};

pub type Family64 = Family1D<f64>;
pub type BasisSpec64 = BasisSpec<f64>;
pub type Dataset64 = Dataset<f64>;
pub type Model64 = Model<f64>;
pub type Slice64 = ConditionalSlice<f64>;

pub type Family32 = Family1D<f32>;
pub type BasisSpec32 = BasisSpec<f32>;
pub type Dataset32 = Dataset<f32>;
pub type Model32 = Model<f32>;
pub type Slice32 = ConditionalSlice<f32>;
