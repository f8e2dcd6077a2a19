//! Reconstruction of textured 3D garment models (T-shirts and pants) from a
//! front and a back product photo plus parsed annotations.
//!
//! The pipeline stages map onto the top-level modules:
//!
//! * [`annotation`] — landmark/mask interchange formats and validation,
//! * [`geomkit`] — contour extraction, arc-length sampling, ellipse inversion,
//! * [`measure`] — pixel geometry to metric measurement reports,
//! * [`lattice`] — trivariate Bernstein free-form deformation,
//! * [`template`] — procedural garment templates and mesh I/O,
//! * [`texwarp`] — moving-least-squares texture lifting onto the atlas,
//! * [`pipeline`] — end-to-end orchestration used by the CLI,
//! * [`synth`] — deterministic synthetic fixtures for tests and demos.

pub mod annotation;
pub mod geom;
pub mod geomkit;
pub mod lattice;
pub mod measure;
pub mod pipeline;
pub mod synth;
pub mod template;
pub mod texwarp;
