//! Reed-Solomon and Parvaresh-Vardy codes, and the bit gadgets that carry
//! chunk messages through linear measurements.

pub mod gadget;
pub mod pv;
pub mod rs;

pub use gadget::{BitEncoder, gadget_decode_bit, gadget_decode_symbol, gadget_encode_layout, pack_bits, unpack_bits};
pub use pv::{pv_encode, pv_list_decode, pv_list_decode_verbose, ListDecodeOutcome, PVParams, PVSymbol};
pub use rs::{rs_decode_bw, rs_encode, to_received, RSParams, Received};
