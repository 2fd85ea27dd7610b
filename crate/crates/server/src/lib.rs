//! Networked host for two-seat matches.
//!
//! Each room owns one match and processes its commands one at a time on a
//! dedicated task. State changes are written to the match log before they
//! are broadcast to both seats.

pub mod client;
pub mod hub;
pub mod protocol;
pub mod room;

pub use hub::{generate_code, router, serve, Hub, HubConfig, DEFAULT_MAX_ROOMS};
pub use protocol::{BackendChoice, ClientMessage, Envelope, ErrorCode, ServerMessage, WireError};
pub use room::{Outbound, Recipient, Room};
