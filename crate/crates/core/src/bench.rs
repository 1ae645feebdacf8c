//! Benchmark driver: classify, build each index kind (timed), render a
//! rotating orthographic sequence, and emit one CSV row per (dataset, kind).

use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::index::{build_index, report_stats, IndexKind, SpatialIndex};
use crate::render::{render_frame, Camera, RenderOptions, DEFAULT_DT};
use crate::volume::{gen_blobs, gen_menger, gen_shell, load_raw_with_sidecar};
use crate::{classify, occupancy, Error, Result, TransferFunction, Volume};

pub const CSV_HEADER: [&str; 8] = ["dataset", "index", "occupancy_pct", "build_s", "fps", "nodes", "height", "samples"];

/// Where a volume comes from: a raw file with sidecar, or a generator.
#[derive(Clone, Debug, PartialEq)]
pub enum DatasetSpec {
    File(PathBuf),
    Menger { level: u32 },
    Shell { dims: u32, radius: f64, thickness: f64 },
    Blobs { dims: u32, n: usize, seed: u64 },
}

fn parse_params(s: &str) -> Result<Vec<(&str, &str)>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::Config(format!("expected key=value, got {kv:?}")))
        })
        .collect()
}

fn param<T: FromStr>(params: &[(&str, &str)], key: &str, default: Option<T>) -> Result<T> {
    match params.iter().find(|(k, _)| *k == key) {
        Some((_, v)) => v.parse().map_err(|_| Error::Config(format!("bad value {v:?} for {key}"))),
        None => default.ok_or_else(|| Error::Config(format!("missing parameter {key}"))),
    }
}

fn check_keys(params: &[(&str, &str)], allowed: &[&str]) -> Result<()> {
    match params.iter().find(|(k, _)| !allowed.contains(k)) {
        Some((k, _)) => Err(Error::Config(format!("unknown parameter {k:?}"))),
        None => Ok(()),
    }
}

impl FromStr for DatasetSpec {
    type Err = Error;

    /// `menger:level=3`, `shell:dims=128,radius=48,thickness=2`,
    /// `blobs:dims=128,n=100,seed=7` (optionally prefixed with `gen:`), or a
    /// path to a `.raw` file.
    fn from_str(s: &str) -> Result<Self> {
        let spec = s.strip_prefix("gen:").unwrap_or(s);
        let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let p = parse_params(rest);
        match name {
            "menger" => {
                let p = p?;
                check_keys(&p, &["level"])?;
                let level = param(&p, "level", Some(3))?;
                if level > 6 {
                    return Err(Error::Config(format!("menger level {level} exceeds 6")));
                }
                Ok(DatasetSpec::Menger { level })
            }
            "shell" => {
                let p = p?;
                check_keys(&p, &["dims", "radius", "thickness"])?;
                let dims: u32 = param(&p, "dims", Some(128))?;
                let radius = param(&p, "radius", Some(dims as f64 * 0.375))?;
                let thickness: f64 = param(&p, "thickness", Some(2.0))?;
                if dims == 0 || thickness <= 0.0 {
                    return Err(Error::Config("shell needs dims >= 1 and thickness > 0".into()));
                }
                Ok(DatasetSpec::Shell { dims, radius, thickness })
            }
            "blobs" => {
                let p = p?;
                check_keys(&p, &["dims", "n", "seed"])?;
                let dims = param(&p, "dims", Some(128))?;
                let n = param(&p, "n", Some(100))?;
                let seed = param(&p, "seed", Some(7))?;
                if dims == 0 || n == 0 {
                    return Err(Error::Config("blobs needs dims >= 1 and n >= 1".into()));
                }
                Ok(DatasetSpec::Blobs { dims, n, seed })
            }
            _ if s.starts_with("gen:") => Err(Error::Config(format!("unknown generator {name:?}"))),
            _ => Ok(DatasetSpec::File(PathBuf::from(s))),
        }
    }
}

impl DatasetSpec {
    pub fn load(&self) -> Result<Volume> {
        Ok(match *self {
            DatasetSpec::File(ref p) => load_raw_with_sidecar(p)?,
            DatasetSpec::Menger { level } => gen_menger(level),
            DatasetSpec::Shell { dims, radius, thickness } => {
                gen_shell([dims; 3], [dims as f64 / 2.0; 3], radius, thickness)
            }
            DatasetSpec::Blobs { dims, n, seed } => gen_blobs([dims; 3], n, seed),
        })
    }
}

/// Transfer function source: a JSON file or a named preset.
#[derive(Clone, Debug, PartialEq)]
pub enum TfSpec {
    File(PathBuf),
    /// White, opaque for every non-zero scalar.
    Opaque,
    /// Alpha ramp from `lo` to `hi`, peaking at `alpha`.
    Ramp {
        lo: f32,
        hi: f32,
        alpha: f32,
    },
}

impl Default for TfSpec {
    fn default() -> Self {
        TfSpec::Ramp { lo: 0.1, hi: 1.0, alpha: 0.5 }
    }
}

impl FromStr for TfSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        match name {
            "opaque" => Ok(TfSpec::Opaque),
            "ramp" => {
                let p = parse_params(rest)?;
                check_keys(&p, &["lo", "hi", "alpha"])?;
                let lo = param(&p, "lo", Some(0.1))?;
                let hi = param(&p, "hi", Some(1.0))?;
                let alpha = param(&p, "alpha", Some(0.5))?;
                if !(lo < hi) || !(0.0..=1.0).contains(&alpha) {
                    return Err(Error::Config("ramp needs lo < hi and alpha in [0, 1]".into()));
                }
                Ok(TfSpec::Ramp { lo, hi, alpha })
            }
            _ => Ok(TfSpec::File(PathBuf::from(s))),
        }
    }
}

impl TfSpec {
    pub fn load(&self) -> Result<TransferFunction> {
        Ok(match *self {
            TfSpec::File(ref p) => TransferFunction::load(p)?,
            TfSpec::Opaque => TransferFunction::opaque([1.0; 3]),
            TfSpec::Ramp { lo, hi, alpha } => TransferFunction::ramp(lo, hi, alpha, [0.1, 0.3, 0.9], [1.0, 0.9, 0.6]),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub datasets: Vec<(String, DatasetSpec)>,
    pub tf: TfSpec,
    pub kinds: Vec<IndexKind>,
    /// Views per full 360° rotation.
    pub frames: u32,
    /// Square viewport edge in pixels.
    pub viewport: u32,
    pub dt: f64,
    /// Build repetitions; the median is reported.
    pub reps: u32,
    pub csv: Option<PathBuf>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            datasets: Vec::new(),
            tf: TfSpec::default(),
            kinds: IndexKind::ALL.to_vec(),
            frames: 36,
            viewport: 1024,
            dt: DEFAULT_DT,
            reps: 3,
            csv: None,
        }
    }
}

impl BenchConfig {
    /// Adds a dataset by its spec string, which also becomes its CSV label.
    pub fn with_dataset(mut self, spec: &str) -> Result<Self> {
        self.datasets.push((spec.to_string(), spec.parse()?));
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::Config("no dataset given".into()));
        }
        if self.kinds.is_empty() {
            return Err(Error::Config("no index kind given".into()));
        }
        if self.frames < 1 {
            return Err(Error::Config("frames must be >= 1".into()));
        }
        if self.viewport < 16 {
            return Err(Error::Config("viewport must be >= 16".into()));
        }
        if self.reps < 1 {
            return Err(Error::Config("reps must be >= 1".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Config("dt must be positive".into()));
        }
        Ok(())
    }
}

/// Parses a comma-separated list of index kinds.
pub fn parse_kinds(s: &str) -> Result<Vec<IndexKind>> {
    s.split(',').map(|k| k.trim().parse()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRecord {
    pub dataset: String,
    pub index: String,
    /// Visible voxels before dilation, in percent.
    pub occupancy_pct: f64,
    /// Median build time over the repetitions.
    #[serde(rename = "build_s")]
    pub build_seconds: f64,
    pub fps: f64,
    #[serde(rename = "nodes")]
    pub node_count: usize,
    pub height: usize,
    #[serde(rename = "samples")]
    pub total_samples: u64,
}

pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of nothing");
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Builds `kind` `reps` times; returns the last index and the median seconds.
pub fn timed_build(kind: IndexKind, b: &crate::BinaryVolume, reps: u32) -> Result<(SpatialIndex, f64)> {
    let mut times = Vec::with_capacity(reps as usize);
    let mut index = None;
    for _ in 0..reps.max(1) {
        let start = Instant::now();
        let built = build_index(kind, b)?;
        times.push(start.elapsed().as_secs_f64());
        index = Some(built);
    }
    Ok((index.expect("at least one repetition"), median(&mut times)))
}

pub fn run_benchmark(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    cfg.validate()?;
    let tf = cfg.tf.load()?;
    let opts = RenderOptions { dt: cfg.dt, ..Default::default() };
    let mut records = Vec::new();
    for (label, spec) in &cfg.datasets {
        let volume = spec.load()?;
        let occupancy_pct = 100.0 * occupancy(&classify(&volume, &tf, false));
        let visible = classify(&volume, &tf, true);
        for &kind in &cfg.kinds {
            let (index, build_seconds) = timed_build(kind, &visible, cfg.reps)?;
            let stats = report_stats(&index);
            let mut total_samples = 0;
            let start = Instant::now();
            for i in 0..cfg.frames {
                let azimuth = 360.0 * i as f64 / cfg.frames as f64;
                let cam = Camera::orbit(volume.dims(), azimuth, 0.0, 1.0, cfg.viewport, cfg.viewport)?;
                total_samples += render_frame(&volume, &tf, &index, &cam, opts).sample_count;
            }
            let seconds = start.elapsed().as_secs_f64().max(1e-9);
            records.push(BenchRecord {
                dataset: label.clone(),
                index: kind.to_string(),
                occupancy_pct,
                build_seconds,
                fps: cfg.frames as f64 / seconds,
                node_count: stats.node_count,
                height: stats.height,
                total_samples,
            });
        }
    }
    if let Some(path) = &cfg.csv {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        write_csv(&records, file)?;
    }
    Ok(records)
}

pub fn write_csv(records: &[BenchRecord], out: impl Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("csv output", e))?;
    Ok(())
}
