//! Output formats: DOT, JSON and text tables.

mod dot;
mod json;
mod top;

pub use dot::{
    default_color_map, emit_dot, selected_nodes, DotOptions, GraphView, DEFAULT_THRESHOLD,
};
pub use json::{emit_json, from_value, parse_json, JsonError, JsonModel, SCHEMA_VERSION};
pub use top::{emit_top, top_nodes};
