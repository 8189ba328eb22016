mod analyze;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use av1lab::codec::io::{load_raw, load_y4m, write_raw, write_y4m};
use av1lab::codec::metrics::psnr;
use av1lab::codec::{decode_sequence, encode_sequence_report, EncodeConfig, Partition, TileSpec};
use av1lab::frame::{ChromaFormat, Frame};
use av1lab::grain::GrainParams;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "av1lab", version, about = "Intra-only encode/decode harness and tool demonstrations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a y4m or raw file.
    Encode(EncodeArgs),
    /// Decode a stream to y4m or raw.
    Decode(DecodeArgs),
    /// Run tool demonstrations on synthetic fixtures.
    Analyze(AnalyzeArgs),
}

/// Geometry of headerless input. Ignored for y4m.
#[derive(Args)]
struct RawArgs {
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    /// 420, 422, 444 or mono.
    #[arg(long, default_value = "420")]
    chroma: String,
    #[arg(long, default_value_t = 8)]
    bit_depth: u32,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// 0 codes losslessly.
    #[arg(long, default_value_t = 100)]
    qp: u8,
    #[arg(long, default_value_t = 64)]
    sb_size: usize,
    /// Uniform tile grid as ROWSxCOLS, e.g. 2x2.
    #[arg(long, conflicts_with_all = ["tile_widths", "tile_heights"])]
    tiles: Option<String>,
    /// Explicit tile column widths in superblocks, comma separated.
    #[arg(long, value_delimiter = ',', requires = "tile_heights")]
    tile_widths: Option<Vec<usize>>,
    /// Explicit tile row heights in superblocks, comma separated.
    #[arg(long, value_delimiter = ',', requires = "tile_widths")]
    tile_heights: Option<Vec<usize>>,
    /// Fixed coding block size, or MIN-MAX for a rate-distortion quadtree.
    #[arg(long, default_value = "16")]
    blocks: String,
    #[arg(long)]
    no_deblock: bool,
    #[arg(long)]
    no_cdef: bool,
    #[arg(long)]
    no_restoration: bool,
    /// Horizontal downscale denominator over 8 (9..=16); 8 disables.
    #[arg(long, default_value_t = 8)]
    superres_denom: usize,
    /// JSON file with film grain parameters.
    #[arg(long)]
    grain_params: Option<PathBuf>,
    /// Where to write the JSON report; stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    raw: RawArgs,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    input: PathBuf,
    /// y4m when the name ends in .y4m, raw otherwise.
    #[arg(long)]
    output: PathBuf,
    /// Reference video to measure PSNR against.
    #[arg(long)]
    metrics: Option<PathBuf>,
    #[command(flatten)]
    raw: RawArgs,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Where to write the JSON report; stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn is_y4m(p: &Path) -> bool {
    p.extension().is_some_and(|e| e.eq_ignore_ascii_case("y4m"))
}

fn chroma_format(s: &str) -> Result<ChromaFormat> {
    Ok(match s {
        "420" => ChromaFormat::Yuv420,
        "422" => ChromaFormat::Yuv422,
        "444" => ChromaFormat::Yuv444,
        "mono" | "400" => ChromaFormat::Monochrome,
        _ => bail!("unknown chroma format {s}"),
    })
}

fn load(path: &Path, raw: &RawArgs) -> Result<Vec<Frame>> {
    let frames = if is_y4m(path) {
        load_y4m(path)?
    } else {
        let (Some(w), Some(h)) = (raw.width, raw.height) else {
            bail!("raw input {} needs --width and --height", path.display());
        };
        load_raw(path, w, h, chroma_format(&raw.chroma)?, raw.bit_depth)?
    };
    if frames.is_empty() {
        bail!("{} holds no frames", path.display());
    }
    Ok(frames)
}

fn save(path: &Path, frames: &[Frame]) -> Result<()> {
    if is_y4m(path) {
        write_y4m(path, frames)?;
    } else {
        write_raw(path, frames)?;
    }
    Ok(())
}

fn parse_tiles(s: &str) -> Result<TileSpec> {
    let (r, c) = s.split_once(['x', 'X']).context("--tiles takes ROWSxCOLS")?;
    Ok(TileSpec::Uniform { rows: r.trim().parse()?, cols: c.trim().parse()? })
}

fn parse_blocks(s: &str) -> Result<Partition> {
    Ok(match s.split_once('-') {
        Some((a, b)) => Partition::Search { min: a.trim().parse()?, max: b.trim().parse()? },
        None => Partition::Fixed(s.trim().parse()?),
    })
}

/// Per-plane and combined PSNR, with lossless as the string "inf".
fn psnr_json(a: &Frame, b: &Frame) -> Result<Value> {
    let p = psnr(a, b)?;
    let db = |v: f64| if v.is_finite() { json!(v) } else { json!("inf") };
    Ok(json!({ "planes": p.planes.iter().map(|x| db(x.db())).collect::<Vec<_>>(), "combined": db(p.combined.db()) }))
}

fn emit(report: &Value, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    match path {
        Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn encode(a: EncodeArgs) -> Result<()> {
    let frames = load(&a.input, &a.raw)?;
    let tiles = match (&a.tiles, &a.tile_widths, &a.tile_heights) {
        (Some(t), _, _) => parse_tiles(t)?,
        (None, Some(w), Some(h)) => TileSpec::Explicit { widths: w.clone(), heights: h.clone() },
        _ => TileSpec::default(),
    };
    let grain = match &a.grain_params {
        Some(p) => Some(serde_json::from_str::<GrainParams>(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?),
        None => None,
    };
    let cfg = EncodeConfig {
        base_qp: a.qp,
        sb_size: a.sb_size,
        tiles,
        partition: parse_blocks(&a.blocks)?,
        deblock: !a.no_deblock,
        cdef: !a.no_cdef,
        restoration: !a.no_restoration,
        superres_denom: a.superres_denom,
        grain,
    };
    let report = encode_sequence_report(&frames, &cfg)?;
    std::fs::write(&a.output, &report.bytes).with_context(|| format!("writing {}", a.output.display()))?;
    let per_frame = report
        .frames
        .iter()
        .zip(&frames)
        .map(|(f, src)| {
            Ok(json!({
                "tile_bytes": f.tile_bytes,
                "stages": f.stages,
                "psnr": psnr_json(src, &f.reference)?,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let (w, h) = (frames[0].width(), frames[0].height());
    let summary = json!({
        "input": a.input,
        "output": a.output,
        "width": w,
        "height": h,
        "bit_depth": frames[0].bit_depth(),
        "frames": frames.len(),
        "qp": a.qp,
        "bytes": report.bytes.len(),
        "bits_per_pixel": report.bytes.len() as f64 * 8.0 / (w * h * frames.len()) as f64,
        "per_frame": per_frame,
    });
    emit(&summary, a.report.as_deref())
}

fn decode(a: DecodeArgs) -> Result<()> {
    let bytes = std::fs::read(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let frames: Vec<Frame> = decode_sequence(&bytes)?.into_iter().map(|d| d.display).collect();
    save(&a.output, &frames)?;
    let mut summary = json!({ "input": a.input, "output": a.output, "bytes": bytes.len(), "frames": frames.len() });
    if let Some(r) = &a.metrics {
        let reference = load(r, &a.raw)?;
        if reference.len() != frames.len() {
            bail!("{} has {} frames, the stream {}", r.display(), reference.len(), frames.len());
        }
        let per_frame = reference.iter().zip(&frames).map(|(r, d)| psnr_json(r, d)).collect::<Result<Vec<_>>>()?;
        summary["psnr"] = json!(per_frame);
    }
    emit(&summary, None)
}

fn run_analyze(a: AnalyzeArgs) -> Result<()> {
    let report = json!({
        "warp": analyze::warp_check()?,
        "interpolation": analyze::interp_check()?,
        "cdef_directions": analyze::cdef_direction_map()?,
        "entropy": analyze::entropy_efficiency()?,
    });
    emit(&report, a.report.as_deref())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Encode(a) => encode(a),
        Command::Decode(a) => decode(a),
        Command::Analyze(a) => run_analyze(a),
    }
}
