//! On-disk formats.
//!
//! Three formats, all specified to the byte so other tools can produce and
//! consume them without this crate:
//!
//! * [`grid_file`] — `OCGRID` binary container for grid stacks;
//! * [`table_csv`] — plain CSV sample tables;
//! * [`model_file`] — JSON fitted-model container.
//!
//! Every reader returns structured [`crate::error::Error`] values on malformed
//! input — readers must never panic, whatever the bytes.

pub mod grid_file;
pub mod model_file;
pub mod table_csv;

pub use grid_file::{decode_grid, encode_grid, read_grid, write_grid};
pub use model_file::{decode_model, encode_model, read_model, write_model};
pub use table_csv::{decode_table, encode_table, read_table, write_table};
