use std::sync::Arc;
use std::time::Instant;

use voxelskip::bench::TfSpec;
use voxelskip::render::{render_frame, Camera, Frame, RenderOptions};
use voxelskip::{build_index, classify, occupancy, report_stats, IndexKind, SpatialIndex, TransferFunction, Volume};

use crate::protocol::{encode_frame, ClientMessage, ServerMessage, Stats};

pub const DEFAULT_VIEWPORT: u32 = 512;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CameraState {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    pub zoom: f64,
}

impl Default for CameraState {
    fn default() -> Self {
        CameraState { azimuth_deg: 30.0, elevation_deg: 20.0, zoom: 1.0 }
    }
}

impl CameraState {
    fn validate(&self) -> Result<(), String> {
        if !(self.azimuth_deg.is_finite() && self.elevation_deg.is_finite()) {
            return Err("camera angles must be finite".into());
        }
        if !(self.zoom.is_finite() && self.zoom > 0.0) {
            return Err("zoom must be positive and finite".into());
        }
        Ok(())
    }

    pub fn camera(&self, volume: &Volume, viewport: u32) -> Camera {
        Camera::orbit(volume.dims(), self.azimuth_deg, self.elevation_deg, self.zoom, viewport, viewport)
            .expect("camera state is validated on every update")
    }
}

#[derive(Clone, Debug)]
pub struct SessionConfig {
    pub viewport: u32,
    pub kind: IndexKind,
    pub tf: TransferFunction,
    pub camera: CameraState,
    pub render: RenderOptions,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            viewport: DEFAULT_VIEWPORT,
            kind: IndexKind::KdDeepMls32,
            tf: TfSpec::default().load().expect("built-in transfer function"),
            camera: CameraState::default(),
            render: RenderOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Response {
    Text(String),
    Binary(Vec<u8>),
}

impl Response {
    fn message(m: ServerMessage) -> Self {
        Response::Text(m.to_json())
    }

    fn error(reason: impl Into<String>) -> Self {
        Response::message(ServerMessage::Error { reason: reason.into() })
    }
}

/// State of one client connection. Messages are handled one at a time.
pub struct Session {
    volume: Arc<Volume>,
    tf: TransferFunction,
    kind: IndexKind,
    index: SpatialIndex,
    camera: CameraState,
    viewport: u32,
    render: RenderOptions,
    occupancy_pct: f64,
    classify_ms: f64,
    build_ms: f64,
    next_seq: u32,
}

impl Session {
    pub fn new(volume: Arc<Volume>, cfg: SessionConfig) -> voxelskip::Result<Self> {
        if cfg.viewport == 0 {
            return Err(voxelskip::Error::Config("viewport must be positive".into()));
        }
        cfg.camera.validate().map_err(voxelskip::Error::Config)?;
        let mut s = Session {
            volume,
            tf: cfg.tf,
            kind: cfg.kind,
            index: SpatialIndex::Naive,
            camera: cfg.camera,
            viewport: cfg.viewport,
            render: cfg.render,
            occupancy_pct: 0.0,
            classify_ms: 0.0,
            build_ms: 0.0,
            next_seq: 0,
        };
        s.rebuild(true)?;
        Ok(s)
    }

    pub fn volume(&self) -> &Volume {
        &self.volume
    }

    pub fn tf(&self) -> &TransferFunction {
        &self.tf
    }

    pub fn kind(&self) -> IndexKind {
        self.kind
    }

    pub fn index(&self) -> &SpatialIndex {
        &self.index
    }

    pub fn camera(&self) -> CameraState {
        self.camera
    }

    pub fn viewport(&self) -> u32 {
        self.viewport
    }

    pub fn render_options(&self) -> RenderOptions {
        self.render
    }

    /// Stats and a frame for the current state, sent when a client connects.
    pub fn greeting(&mut self) -> Vec<Response> {
        self.stats_and_frame()
    }

    pub fn handle_message(&mut self, text: &str) -> Vec<Response> {
        match serde_json::from_str::<ClientMessage>(text) {
            Ok(msg) => self.handle(msg),
            Err(e) => vec![Response::error(format!("malformed message: {e}"))],
        }
    }

    pub fn handle(&mut self, msg: ClientMessage) -> Vec<Response> {
        match msg {
            ClientMessage::Ping => vec![Response::message(ServerMessage::Pong)],
            ClientMessage::SetTf { rgba } => match TransferFunction::new(rgba) {
                Ok(tf) => {
                    let previous = std::mem::replace(&mut self.tf, tf);
                    if let Err(e) = self.rebuild(true) {
                        self.tf = previous;
                        return vec![Response::error(e.to_string())];
                    }
                    self.stats_and_frame()
                }
                Err(e) => vec![Response::error(e.to_string())],
            },
            ClientMessage::SetIndex { kind } => match kind.parse::<IndexKind>() {
                Ok(kind) => {
                    let previous = std::mem::replace(&mut self.kind, kind);
                    if let Err(e) = self.rebuild(false) {
                        self.kind = previous;
                        return vec![Response::error(e.to_string())];
                    }
                    self.stats_and_frame()
                }
                Err(e) => vec![Response::error(e.to_string())],
            },
            ClientMessage::SetCamera { azimuth_deg, elevation_deg, zoom } => {
                let camera = CameraState { azimuth_deg, elevation_deg, zoom };
                if let Err(reason) = camera.validate() {
                    return vec![Response::error(reason)];
                }
                self.camera = camera;
                let (frame, _) = self.render();
                vec![self.frame_response(&frame)]
            }
        }
    }

    /// Unsolicited binary input is not part of the protocol.
    pub fn handle_binary(&mut self) -> Vec<Response> {
        vec![Response::error("binary client messages are not supported")]
    }

    fn rebuild(&mut self, reclassify: bool) -> voxelskip::Result<()> {
        let start = Instant::now();
        let visible = classify(&self.volume, &self.tf, true);
        let occupancy_pct =
            if reclassify { 100.0 * occupancy(&classify(&self.volume, &self.tf, false)) } else { self.occupancy_pct };
        let classify_ms = ms_since(start);
        let start = Instant::now();
        let index = build_index(self.kind, &visible)?;
        self.build_ms = ms_since(start);
        self.index = index;
        self.classify_ms = classify_ms;
        self.occupancy_pct = occupancy_pct;
        Ok(())
    }

    fn render(&self) -> (Frame, f64) {
        let start = Instant::now();
        let cam = self.camera.camera(&self.volume, self.viewport);
        let frame = render_frame(&self.volume, &self.tf, &self.index, &cam, self.render);
        (frame, ms_since(start))
    }

    fn stats_and_frame(&mut self) -> Vec<Response> {
        let (frame, render_ms) = self.render();
        let stats = report_stats(&self.index);
        let stats = Stats {
            occupancy_pct: self.occupancy_pct,
            build_ms: self.build_ms,
            classify_ms: self.classify_ms,
            nodes: stats.node_count,
            height: stats.height,
            render_ms,
            samples: frame.sample_count,
        };
        vec![Response::message(ServerMessage::Stats(stats)), self.frame_response(&frame)]
    }

    fn frame_response(&mut self, frame: &Frame) -> Response {
        let seq = self.next_seq;
        self.next_seq = self.next_seq.checked_add(1).expect("frame sequence exhausted");
        Response::Binary(encode_frame(frame, seq))
    }
}

fn ms_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn is_valid_set_tf(text: &str) -> bool {
    match serde_json::from_str::<ClientMessage>(text) {
        Ok(ClientMessage::SetTf { rgba }) => TransferFunction::new(rgba).is_ok(),
        _ => false,
    }
}

/// Drops every valid `set_tf` that is immediately followed by another valid
/// `set_tf` in the same queued batch. The survivor produces the same final
/// state, and no frame is lost that would have shown the dropped one.
pub fn coalesce<T: AsRef<str>>(batch: Vec<T>) -> Vec<T> {
    let valid: Vec<bool> = batch.iter().map(|m| is_valid_set_tf(m.as_ref())).collect();
    batch
        .into_iter()
        .enumerate()
        .filter(|&(i, _)| !(valid[i] && valid.get(i + 1).copied().unwrap_or(false)))
        .map(|(_, m)| m)
        .collect()
}
