//! Exact structural-identifiability analysis for partially observed
//! two-dimensional polynomial SDEs.
//!
//! The pipeline runs from a parsed [`dsl::ModelSpec`] through the Itô moment
//! recurrence ([`moments`]), elimination of unobserved moments into
//! necessarily satisfied equations ([`elimination`]), and extraction of
//! identifiable parameter combinations with a Jacobian-rank certificate
//! ([`ident`]). [`ou`] and [`sim`] provide the numerical side: closed-form
//! Ornstein-Uhlenbeck covariances and Euler-Maruyama ensembles used to check
//! that matched parameter sets are indistinguishable.

pub mod dsl;
pub mod elimination;
pub mod ident;
pub mod moments;
pub mod ou;
pub mod sim;
pub mod symbolic;
