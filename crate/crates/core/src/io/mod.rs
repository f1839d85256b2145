//! Configuration files, point-pattern persistence, run manifests and SVG
//! rendering.

pub mod config;
pub mod manifest;
pub mod pattern;
pub mod svg;
