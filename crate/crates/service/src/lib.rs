//! Interactive exploration sessions served over WebSocket.
//!
//! Clients send JSON control messages as text frames. The server answers with
//! JSON `stats`/`pong`/`error` text frames and binary `FRME` image frames.

pub mod protocol;
mod server;
mod session;

pub use protocol::{
    decode_frame, encode_frame, ClientMessage, FrameHeader, ServerMessage, Stats, FRAME_MAGIC, HEADER_LEN,
};
pub use server::{serve, serve_listener};
pub use session::{coalesce, CameraState, Response, Session, SessionConfig, DEFAULT_VIEWPORT};
