//! Batch CLI for the garment reconstruction pipeline.
//!
//! Config precedence: CLI flags > `--config` key=value file > built-in
//! defaults. The effective configuration is echoed into report.json by the
//! build command. Outputs are byte-deterministic for identical inputs.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use garment3d::annotation::{CaptureMode, GarmentType};
use garment3d::pipeline::{
    cmd_build, cmd_deform, cmd_measure, cmd_texture, cmd_validate, PipelineConfig,
};
use garment3d::synth::{make_bundle, write_bundle_files, BundleOptions};
use garment3d::template::{
    make_pants_template, make_tshirt_template, save_template, PantsParams, TshirtParams,
};
use garment3d::texwarp::WarpKind;

#[derive(Parser)]
#[command(name = "garment3d", version, about = "Textured 3D garment reconstruction from product photos")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write model.obj, model.mtl, atlas.png,
    /// measurements.json, lattice.json and report.json.
    Build(CommonArgs),
    /// Validate the annotation bundle; prints one line per check.
    Validate(CommonArgs),
    /// Measurement stage only: writes measurements.json.
    Measure(CommonArgs),
    /// Deformation stage only: writes model.obj, model.mtl, lattice.json.
    Deform(CommonArgs),
    /// Texture stage only: writes atlas.png.
    Texture(CommonArgs),
    /// Generate a garment template directory (template.obj + template.json).
    MakeTemplate(MakeTemplateArgs),
    /// Generate a synthetic annotation fixture (photos, landmarks, masks).
    SynthFixture(SynthArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GarmentArg {
    Tshirt,
    Pants,
}

impl From<GarmentArg> for GarmentType {
    fn from(v: GarmentArg) -> Self {
        match v {
            GarmentArg::Tshirt => GarmentType::Tshirt,
            GarmentArg::Pants => GarmentType::Pants,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CaptureArg {
    Mannequin,
    FlatLay,
}

impl From<CaptureArg> for CaptureMode {
    fn from(v: CaptureArg) -> Self {
        match v {
            CaptureArg::Mannequin => CaptureMode::Mannequin,
            CaptureArg::FlatLay => CaptureMode::FlatLay,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum WarpArg {
    Mls,
    Tps,
}

impl From<WarpArg> for WarpKind {
    fn from(v: WarpArg) -> Self {
        match v {
            WarpArg::Mls => WarpKind::Mls,
            WarpArg::Tps => WarpKind::Tps,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long, value_enum)]
    garment_type: Option<GarmentArg>,
    #[arg(long, value_enum)]
    capture_mode: Option<CaptureArg>,
    /// Front photo (PNG).
    #[arg(long)]
    front: Option<PathBuf>,
    /// Back photo (PNG).
    #[arg(long)]
    back: Option<PathBuf>,
    #[arg(long)]
    front_landmarks: Option<PathBuf>,
    #[arg(long)]
    back_landmarks: Option<PathBuf>,
    #[arg(long)]
    front_mask: Option<PathBuf>,
    #[arg(long)]
    back_mask: Option<PathBuf>,
    /// Template directory (template.obj + template.json); generated
    /// procedurally when omitted.
    #[arg(long)]
    template: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Real-world reference measurement, e.g. sleeve_length_left=0.62
    #[arg(long)]
    measure: Option<String>,
    /// Contour samples per landmark segment.
    #[arg(long)]
    n_contour: Option<usize>,
    /// Atlas resolution (power of two in [256, 8192]).
    #[arg(long)]
    atlas_size: Option<u32>,
    #[arg(long, value_enum)]
    warp: Option<WarpArg>,
    /// Single-photo mode: derive the back view by mirroring the front.
    #[arg(long)]
    symmetric: bool,
    /// Config file with key=value lines (same keys as the long flags).
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct MakeTemplateArgs {
    #[arg(long, value_enum)]
    garment_type: GarmentArg,
    #[arg(long)]
    out: PathBuf,
    /// Grid cells across the garment width.
    #[arg(long, default_value_t = 24)]
    segments: usize,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    garment_type: GarmentArg,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "mannequin")]
    capture_mode: CaptureArg,
    /// Skip the back view files (for symmetric-mode runs).
    #[arg(long)]
    no_back: bool,
}

fn fail(msg: String, code: i32) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code as u8)
}

fn parse_config_file(path: &PathBuf) -> Result<BTreeMap<String, String>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("config file {}: {e}", path.display()))?;
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value", lineno + 1))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parse_measure_spec(text: &str) -> Result<(String, f64), String> {
    let (name, meters) = text
        .split_once('=')
        .ok_or_else(|| format!("--measure expects name=<meters>, got \"{text}\""))?;
    let meters: f64 = meters
        .trim()
        .parse()
        .map_err(|e| format!("--measure value: {e}"))?;
    Ok((name.trim().to_string(), meters))
}

/// Merges CLI flags over the config file over defaults.
fn resolve(args: &CommonArgs) -> Result<PipelineConfig, String> {
    let file = match &args.config {
        Some(path) => parse_config_file(path)?,
        None => BTreeMap::new(),
    };
    let from_file = |key: &str| file.get(key).cloned();
    let path_opt = |cli: &Option<PathBuf>, key: &str| -> Option<PathBuf> {
        cli.clone().or_else(|| from_file(key).map(PathBuf::from))
    };

    let garment_type = match (&args.garment_type, from_file("garment_type")) {
        (Some(g), _) => (*g).into(),
        (None, Some(v)) => match v.as_str() {
            "tshirt" => GarmentType::Tshirt,
            "pants" => GarmentType::Pants,
            other => return Err(format!("config garment_type: unknown value \"{other}\"")),
        },
        (None, None) => return Err("--garment-type is required".into()),
    };
    let capture_mode = match (&args.capture_mode, from_file("capture_mode")) {
        (Some(c), _) => (*c).into(),
        (None, Some(v)) => match v.as_str() {
            "mannequin" => CaptureMode::Mannequin,
            "flat_lay" => CaptureMode::FlatLay,
            other => return Err(format!("config capture_mode: unknown value \"{other}\"")),
        },
        (None, None) => CaptureMode::Mannequin,
    };
    let warp = match (&args.warp, from_file("warp")) {
        (Some(w), _) => (*w).into(),
        (None, Some(v)) => match v.as_str() {
            "mls" => WarpKind::Mls,
            "tps" => WarpKind::Tps,
            other => return Err(format!("config warp: unknown value \"{other}\"")),
        },
        (None, None) => WarpKind::Mls,
    };
    let scale_measurement = match (&args.measure, from_file("measure")) {
        (Some(m), _) => Some(parse_measure_spec(m)?),
        (None, Some(m)) => Some(parse_measure_spec(&m)?),
        (None, None) => None,
    };
    let parse_num = |cli: Option<String>, key: &str| -> Result<Option<String>, String> {
        Ok(cli.or_else(|| from_file(key)))
    };
    let contour_samples = match parse_num(args.n_contour.map(|v| v.to_string()), "n_contour")? {
        Some(v) => v.parse().map_err(|e| format!("n_contour: {e}"))?,
        None => 50,
    };
    let atlas_size = match parse_num(args.atlas_size.map(|v| v.to_string()), "atlas_size")? {
        Some(v) => v.parse().map_err(|e| format!("atlas_size: {e}"))?,
        None => 2048,
    };
    let symmetric = args.symmetric
        || from_file("symmetric")
            .map(|v| v == "true" || v == "1")
            .unwrap_or(false);

    let front_image = path_opt(&args.front, "front").ok_or("--front is required")?;
    let front_landmarks =
        path_opt(&args.front_landmarks, "front_landmarks").ok_or("--front-landmarks is required")?;
    let front_mask =
        path_opt(&args.front_mask, "front_mask").ok_or("--front-mask is required")?;
    let out_dir = path_opt(&args.out, "out").ok_or("--out is required")?;

    Ok(PipelineConfig {
        garment_type,
        capture_mode,
        front_image,
        front_landmarks,
        front_mask,
        back_image: path_opt(&args.back, "back"),
        back_landmarks: path_opt(&args.back_landmarks, "back_landmarks"),
        back_mask: path_opt(&args.back_mask, "back_mask"),
        template_dir: path_opt(&args.template, "template"),
        out_dir,
        scale_measurement,
        contour_samples,
        atlas_size,
        warp,
        symmetric,
        deterministic: true,
    })
}

fn run_pipeline(
    args: &CommonArgs,
    f: impl FnOnce(&PipelineConfig) -> Result<(), garment3d::pipeline::PipelineError>,
) -> ExitCode {
    let config = match resolve(args) {
        Ok(c) => c,
        Err(msg) => return fail(msg, 2),
    };
    match f(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.to_string(), e.exit_code()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Build(args) => run_pipeline(&args, |cfg| {
            let artifacts = cmd_build(cfg)?;
            println!("wrote {}", artifacts.model_obj.display());
            println!("wrote {}", artifacts.model_mtl.display());
            println!("wrote {}", artifacts.atlas_png.display());
            println!("wrote {}", artifacts.measurements_json.display());
            println!("wrote {}", artifacts.lattice_json.display());
            println!("wrote {}", artifacts.report_json.display());
            Ok(())
        }),
        Command::Validate(args) => {
            let config = match resolve(&args) {
                Ok(c) => c,
                Err(msg) => return fail(msg, 2),
            };
            match cmd_validate(&config) {
                Ok(report) => {
                    print!("{report}");
                    if report.passed() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(2)
                    }
                }
                Err(e) => fail(e.to_string(), e.exit_code()),
            }
        }
        Command::Measure(args) => run_pipeline(&args, |cfg| {
            let report = cmd_measure(cfg)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
            Ok(())
        }),
        Command::Deform(args) => run_pipeline(&args, |cfg| {
            cmd_deform(cfg)?;
            println!("wrote {}", cfg.out_dir.join("model.obj").display());
            Ok(())
        }),
        Command::Texture(args) => run_pipeline(&args, |cfg| {
            let stats = cmd_texture(cfg)?;
            for s in &stats {
                let flag = if s.skipped {
                    " SKIPPED"
                } else if s.spill_warning {
                    " SPILL-WARNING"
                } else {
                    ""
                };
                println!(
                    "piece {}: {} pairs, {:.2}% spill{flag}",
                    s.piece,
                    s.pair_count,
                    100.0 * s.spill_fraction
                );
            }
            Ok(())
        }),
        Command::MakeTemplate(args) => {
            let result = match GarmentType::from(args.garment_type) {
                GarmentType::Tshirt => make_tshirt_template(&TshirtParams {
                    segments_across: args.segments,
                    ..TshirtParams::default()
                }),
                GarmentType::Pants => make_pants_template(&PantsParams {
                    segments_across: args.segments,
                    ..PantsParams::default()
                }),
            };
            let asset = match result {
                Ok(a) => a,
                Err(e) => return fail(e.to_string(), 2),
            };
            match save_template(&asset, &args.out) {
                Ok(()) => {
                    println!("wrote {}", args.out.join("template.obj").display());
                    println!("wrote {}", args.out.join("template.json").display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e.to_string(), 4),
            }
        }
        Command::SynthFixture(args) => {
            let opts = BundleOptions {
                garment: args.garment_type.into(),
                capture_mode: args.capture_mode.into(),
                with_back: !args.no_back,
                ..BundleOptions::default()
            };
            let (bundle, reference) = make_bundle(&opts);
            match write_bundle_files(&bundle, &args.out) {
                Ok(files) => {
                    println!("wrote {}", files.front_image.display());
                    println!("wrote {}", files.front_landmarks.display());
                    println!("wrote {}", files.front_mask.display());
                    if let Some(p) = files.back_image {
                        println!("wrote {}", p.display());
                    }
                    if let Some(p) = files.back_landmarks {
                        println!("wrote {}", p.display());
                    }
                    if let Some(p) = files.back_mask {
                        println!("wrote {}", p.display());
                    }
                    println!("reference measurement: {}={}", reference.0, reference.1);
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e.to_string(), 4),
            }
        }
    }
}
