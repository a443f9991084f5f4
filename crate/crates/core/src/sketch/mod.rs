//! Round schedule, chunk messages, measurement layout and sketch files.

pub mod apply;
pub mod chunk;
pub mod io;
pub mod params;

pub use apply::{add_round, apply_sketch, Signal, Sketch};
pub use chunk::{chunk_symbols, chunk_symbols_into, make_chunks, Chunk, ChunkScratch};
pub use io::{read_sketch, sketch_from_bytes, sketch_to_bytes, write_sketch};
pub use params::{round_count, specs_digest, CellCoord, RoundParams, RoundSpec, Schedule, SketchConfig};
