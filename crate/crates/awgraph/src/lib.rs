//! Certification pipeline for the Askey-Wilson structure of distance-regular
//! graphs of q-Racah type.
//!
//! Starting from a finite graph, the crate certifies distance-regularity in
//! exact integer arithmetic, computes the spectral decomposition of the
//! adjacency algebra together with its Krein parameters, searches for
//! Q-polynomial orderings, fits the q-Racah eigenvalue form, decomposes the
//! standard module of the subconstituent algebra at a base vertex into thin
//! irreducible modules, extracts a Leonard system from each module, and
//! finally assembles central elements certifying the Askey-Wilson relations
//! on the whole standard module.  Every analytic claim is backed by a
//! reported residual; nothing is trusted symbolically.

// index-based loops are kept wherever the indices mirror tensor notation
// (q^h_ij, θ_i, p^h_ij); iterator rewrites would obscure the math
#![allow(clippy::needless_range_loop)]

pub mod awalgebra;
pub mod graph;
pub mod leonard;
pub mod linalg;
pub mod pipeline;
pub mod qracah;
pub mod report;
pub mod spectral;
pub mod tmodule;
