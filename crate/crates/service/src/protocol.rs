//! Wire format shared with the browser viewer.

use serde::{Deserialize, Serialize};
use voxelskip::render::Frame;
use voxelskip::tf::Rgba;

pub const FRAME_MAGIC: [u8; 4] = *b"FRME";
pub const HEADER_LEN: usize = 16;

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    SetTf { rgba: Vec<Rgba> },
    SetIndex { kind: String },
    SetCamera { azimuth_deg: f64, elevation_deg: f64, zoom: f64 },
    Ping,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
pub struct Stats {
    pub occupancy_pct: f64,
    pub build_ms: f64,
    pub classify_ms: f64,
    pub nodes: usize,
    pub height: usize,
    pub render_ms: f64,
    pub samples: u64,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Stats(Stats),
    Pong,
    Error { reason: String },
}

impl ServerMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages always serialize")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrameHeader {
    pub width: u32,
    pub height: u32,
    pub seq: u32,
}

/// Header followed by the frame's RGBA8 pixels, rows top to bottom.
pub fn encode_frame(frame: &Frame, seq: u32) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + frame.pixels.len());
    out.extend_from_slice(&FRAME_MAGIC);
    for v in [frame.width, frame.height, seq] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&frame.pixels);
    out
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FrameError {
    #[error("frame shorter than its header")]
    Truncated,
    #[error("missing FRME magic")]
    BadMagic,
    #[error("payload is {got} bytes, header implies {want}")]
    Size { got: usize, want: usize },
}

pub fn decode_frame(bytes: &[u8]) -> Result<(FrameHeader, &[u8]), FrameError> {
    if bytes.len() < HEADER_LEN {
        return Err(FrameError::Truncated);
    }
    if bytes[..4] != FRAME_MAGIC {
        return Err(FrameError::BadMagic);
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let header = FrameHeader { width: word(4), height: word(8), seq: word(12) };
    let payload = &bytes[HEADER_LEN..];
    let want = header.width as usize * header.height as usize * 4;
    if payload.len() != want {
        return Err(FrameError::Size { got: payload.len(), want });
    }
    Ok((header, payload))
}
