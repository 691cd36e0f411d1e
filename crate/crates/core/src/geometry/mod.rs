//! Rolling-shutter projection machinery: the per-pixel reprojection map,
//! row-0 correction, synthesis, triangulation, flow filtering and rendering.

pub mod flow;
pub mod frame;
pub mod maps;
pub mod motion;
pub mod render;
pub mod synth;
pub mod triangulate;

pub use flow::{bidirectional_filter, sample_flow};
pub use frame::{correction_map, pi_project, pi_project_with_depth, RsFrame};
pub use maps::{epe, CoordinateMap, DepthMap, EpeReport, FlowField, Target};
pub use motion::{constant_velocity_rowposes, fit_constant_velocity, identity_rowposes, Twist};
pub use render::{fill_holes, render_corrected, Filled, Splat, DEFAULT_FILL_RADIUS};
pub use synth::{synthesize_rs, synthesize_rs_with, SynthesisOptions, SynthesizedFrame};
pub use triangulate::{triangulate, Triangulation};
