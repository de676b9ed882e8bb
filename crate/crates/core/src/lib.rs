//! Symbolic 4-manifold constructions with machine-checked fundamental groups.
//!
//! Group elements are free-group [`Word`]s; manifolds carry finite
//! presentations of their fundamental groups together with embedded surface
//! and surgery-torus data. Operations rewrite presentations and invariants,
//! and [`certify`] decides (with bounded effort) whether the result is
//! trivial or cyclic, emitting a replayable [`Certificate`].

pub mod abelianize;
pub mod blocks;
pub mod certify;
pub mod geography;
pub mod manifest;
pub mod presentation;
pub mod surgery;
pub mod word;

pub use abelianize::{h1, relation_matrix, smith_normal_form, H1Result, IntMatrix, SmithForm};
pub use blocks::{EmbeddedSurface, MarkedManifold, Parity, SurgeryDatum};
pub use certify::{certify, replay, Budget, Certificate, Target, Verdict};
pub use geography::{coords, freedman_model, realize_pair, region_check, wedge_sum, FreedmanModel, GeoPoint};
pub use presentation::{FpPresentation, GeneratorMap, PresentationError};
pub use surgery::{blow_up, fiber_sum, torus_surgery, Gluing, SumIdentification, SurgeryError};
pub use word::{Generator, Letter, Word, WordError};
