//! Graph-SIM: graph-based spatiotemporal interaction modelling for
//! pedestrian crossing-action prediction on bird's-eye-view traffic scenes.
//!
//! The pipeline ingests annotated scenes (densifying sparse keyframe boxes
//! to the working frame rate), clusters road users hierarchically per
//! frame, builds relative-importance weighted interaction graphs, and runs
//! a spatiotemporal graph convolution plus recurrent classifier over the
//! observation windows of each target pedestrian. A synthetic-scene
//! generator makes the whole pipeline runnable, and testable, at desk
//! scale without the real dataset.

pub mod clustering;
pub mod config;
pub mod eval;
pub mod graph;
pub mod ingest;
pub mod model;
pub mod nn;
pub mod pipeline;
pub mod scene;
pub mod synthetic;
