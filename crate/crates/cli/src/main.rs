use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use voxelskip::bench::{parse_kinds, run_benchmark, write_csv, BenchConfig, DatasetSpec, TfSpec};
use voxelskip::render::{render_frame, Camera, RenderOptions, DEFAULT_DT};
use voxelskip::{build_index, classify, report_stats, IndexKind};
use voxelskip_service::{serve, SessionConfig, DEFAULT_VIEWPORT};

#[derive(Parser)]
#[command(name = "voxelskip", version, about = "Empty space skipping for volume ray marching")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time index builds and rendering; one CSV row per dataset and index kind.
    Bench(BenchArgs),
    /// Serve interactive sessions over WebSocket.
    Serve(ServeArgs),
    /// Render a single frame to PNG.
    Render(RenderArgs),
}

#[derive(Args)]
struct BenchArgs {
    /// Raw volume path or generator spec such as `gen:shell:dims=128,radius=48,thickness=2`. Repeatable.
    #[arg(long, required = true)]
    dataset: Vec<String>,
    /// Transfer function JSON file, `opaque`, or `ramp:lo=..,hi=..,alpha=..`.
    #[arg(long, default_value = "ramp")]
    tf: String,
    /// Comma-separated index kinds.
    #[arg(long, default_value = "naive,grid,lbvh,kd-shallow,kd-deep-mls32,kd-deep-mls128,kd-binned-mls32,hybrid")]
    index: String,
    #[arg(long, default_value_t = 36)]
    frames: u32,
    #[arg(long, default_value_t = 1024)]
    viewport: u32,
    #[arg(long, default_value_t = DEFAULT_DT)]
    dt: f64,
    #[arg(long, default_value_t = 3)]
    reps: u32,
    /// Output CSV; stdout if omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    dataset: String,
    #[arg(long, default_value_t = 9000)]
    port: u16,
    #[arg(long, default_value_t = DEFAULT_VIEWPORT)]
    viewport: u32,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Initial transfer function.
    #[arg(long, default_value = "ramp")]
    tf: String,
    /// Initial index kind.
    #[arg(long, default_value = "kd-deep-mls32")]
    index: String,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    dataset: String,
    #[arg(long, default_value = "ramp")]
    tf: String,
    #[arg(long, default_value = "kd-deep-mls32")]
    index: String,
    #[arg(long, default_value_t = 30.0, allow_negative_numbers = true)]
    azimuth: f64,
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    elevation: f64,
    #[arg(long, default_value_t = 1.0)]
    zoom: f64,
    #[arg(long, default_value_t = DEFAULT_VIEWPORT)]
    viewport: u32,
    #[arg(long, default_value_t = DEFAULT_DT)]
    dt: f64,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Bench(a) => bench(a),
        Command::Serve(a) => serve_cmd(a),
        Command::Render(a) => render(a),
    }
}

fn bench(a: BenchArgs) -> Result<()> {
    let mut cfg = BenchConfig {
        tf: a.tf.parse()?,
        kinds: parse_kinds(&a.index)?,
        frames: a.frames,
        viewport: a.viewport,
        dt: a.dt,
        reps: a.reps,
        csv: a.csv.clone(),
        ..Default::default()
    };
    for d in &a.dataset {
        cfg = cfg.with_dataset(d)?;
    }
    let records = run_benchmark(&cfg)?;
    if a.csv.is_none() {
        write_csv(&records, std::io::stdout().lock())?;
    }
    Ok(())
}

fn serve_cmd(a: ServeArgs) -> Result<()> {
    let volume = a.dataset.parse::<DatasetSpec>()?.load().context("loading dataset")?;
    let cfg = SessionConfig {
        viewport: a.viewport,
        kind: a.index.parse()?,
        tf: a.tf.parse::<TfSpec>()?.load()?,
        ..Default::default()
    };
    let addr = format!("{}:{}", a.host, a.port);
    eprintln!("listening on ws://{addr}");
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(serve(addr, Arc::new(volume), cfg))?;
    Ok(())
}

fn render(a: RenderArgs) -> Result<()> {
    let volume = a.dataset.parse::<DatasetSpec>()?.load().context("loading dataset")?;
    let tf = a.tf.parse::<TfSpec>()?.load()?;
    let kind: IndexKind = a.index.parse()?;
    let index = build_index(kind, &classify(&volume, &tf, true))?;
    let cam = Camera::orbit(volume.dims(), a.azimuth, a.elevation, a.zoom, a.viewport, a.viewport)?;
    let opts = RenderOptions { dt: a.dt, ..Default::default() };
    let frame = render_frame(&volume, &tf, &index, &cam, opts);
    frame.save_png(&a.out)?;
    let stats = report_stats(&index);
    eprintln!(
        "{kind}: {} nodes, height {}, {} samples -> {}",
        stats.node_count,
        stats.height,
        frame.sample_count,
        a.out.display()
    );
    Ok(())
}
