//! End-to-end orchestration behind the CLI: load and validate a bundle,
//! measure, solve and deform the template, extract textures, and write the
//! deterministic artifact set (model.obj, model.mtl, atlas.png,
//! measurements.json, lattice.json, report.json).
//!
//! Staged commands (`measure`, `deform`, `texture`) recompute from the
//! original inputs, so chaining them reproduces `build` outputs byte for
//! byte.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::annotation::{
    load_landmarks, load_mask, validate_bundle, AnnotationBundle, AnnotationError, CaptureMode,
    GarmentType, ValidationReport, View, ViewData,
};
use crate::lattice::{
    deform, embed, solve_lattice_pants, solve_lattice_tshirt, ControlLattice, LatticeError,
};
use crate::measure::{
    measure_pants, measure_tshirt, pixel_scale, MeasureError, MeasurementReport,
};
use crate::template::{
    load_template, make_pants_template, make_tshirt_template, save_model, PantsParams,
    TemplateAsset, TemplateError, TshirtParams,
};
use crate::texwarp::{compose_atlas, AtlasOptions, PieceStats, TexWarpError, WarpKind};

/// Pipeline stages named in error messages and the report.
pub const STAGE_ANNOTATION: &str = "annotation";
pub const STAGE_VALIDATION: &str = "validation";
pub const STAGE_MEASURE: &str = "measure";
pub const STAGE_TEMPLATE: &str = "template";
pub const STAGE_LATTICE: &str = "lattice";
pub const STAGE_TEXTURE: &str = "texture";
pub const STAGE_OUTPUT: &str = "output";

#[derive(Debug, Error)]
#[error("stage {stage}: {kind}")]
pub struct PipelineError {
    pub stage: &'static str,
    #[source]
    pub kind: PipelineErrorKind,
}

#[derive(Debug, Error)]
pub enum PipelineErrorKind {
    #[error("{0}")]
    Annotation(#[from] AnnotationError),
    #[error("bundle validation failed:\n{0}")]
    ValidationFailed(ValidationReport),
    #[error("{0}")]
    Measure(#[from] MeasureError),
    #[error("{0}")]
    Template(#[from] TemplateError),
    #[error("{0}")]
    Lattice(#[from] LatticeError),
    #[error("{0}")]
    TexWarp(#[from] TexWarpError),
    #[error("{0}")]
    Config(String),
    #[error("i/o on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    fn new(stage: &'static str, kind: impl Into<PipelineErrorKind>) -> Self {
        Self {
            stage,
            kind: kind.into(),
        }
    }

    /// CLI exit code: 2 validation, 3 measurement infeasibility, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match &self.kind {
            PipelineErrorKind::Io { .. } => 4,
            PipelineErrorKind::Annotation(e) => match e {
                AnnotationError::Io { .. } | AnnotationError::MaskDecode { .. } => 4,
                _ => 2,
            },
            PipelineErrorKind::Template(e) => match e {
                TemplateError::Io { .. } => 4,
                _ => 2,
            },
            PipelineErrorKind::Measure(e) => match e {
                MeasureError::Inconsistent(_) | MeasureError::BadReference(_) => 3,
                _ => 2,
            },
            PipelineErrorKind::Lattice(e) => match e {
                LatticeError::Infeasible(_) => 3,
                _ => 2,
            },
            PipelineErrorKind::ValidationFailed(_)
            | PipelineErrorKind::TexWarp(_)
            | PipelineErrorKind::Config(_) => 2,
        }
    }
}

/// Fully resolved run configuration (CLI flags over config file over
/// defaults; the CLI performs the merge).
#[derive(Debug, Clone, Serialize)]
pub struct PipelineConfig {
    pub garment_type: GarmentType,
    pub capture_mode: CaptureMode,
    pub front_image: PathBuf,
    pub front_landmarks: PathBuf,
    pub front_mask: PathBuf,
    pub back_image: Option<PathBuf>,
    pub back_landmarks: Option<PathBuf>,
    pub back_mask: Option<PathBuf>,
    pub template_dir: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// `(reference name, meters)`.
    pub scale_measurement: Option<(String, f64)>,
    pub contour_samples: usize,
    pub atlas_size: u32,
    pub warp: WarpKind,
    pub symmetric: bool,
    /// Seed-free determinism; always on, echoed for reproducibility.
    pub deterministic: bool,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if !self.atlas_size.is_power_of_two() || !(256..=8192).contains(&self.atlas_size) {
            return Err(PipelineError::new(
                STAGE_ANNOTATION,
                PipelineErrorKind::Config(format!(
                    "atlas size must be a power of two in [256, 8192], got {}",
                    self.atlas_size
                )),
            ));
        }
        if !self.deterministic {
            return Err(PipelineError::new(
                STAGE_ANNOTATION,
                PipelineErrorKind::Config("determinism cannot be disabled".into()),
            ));
        }
        Ok(())
    }
}

fn load_image(path: &Path) -> Result<image::RgbaImage, PipelineError> {
    let img = image::open(path).map_err(|e| {
        PipelineError::new(
            STAGE_ANNOTATION,
            PipelineErrorKind::Io {
                path: path.display().to_string(),
                source: std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()),
            },
        )
    })?;
    Ok(img.to_rgba8())
}

fn load_view(
    garment: GarmentType,
    view: View,
    image: &Path,
    landmarks: &Path,
    mask: &Path,
) -> Result<ViewData, PipelineError> {
    let image = load_image(image)?;
    let landmarks = load_landmarks(landmarks)
        .map_err(|e| PipelineError::new(STAGE_ANNOTATION, e))?;
    let mask =
        load_mask(mask, garment, view).map_err(|e| PipelineError::new(STAGE_ANNOTATION, e))?;
    if landmarks.view != view {
        return Err(PipelineError::new(
            STAGE_ANNOTATION,
            PipelineErrorKind::Config(format!(
                "{view} landmark file declares view {}",
                landmarks.view
            )),
        ));
    }
    if landmarks.garment_type != garment {
        return Err(PipelineError::new(
            STAGE_ANNOTATION,
            PipelineErrorKind::Config(format!(
                "{view} landmark file declares garment {}",
                landmarks.garment_type
            )),
        ));
    }
    Ok(ViewData {
        image,
        landmarks,
        mask,
    })
}

/// Loads the annotation bundle named by the config.
pub fn load_bundle(config: &PipelineConfig) -> Result<AnnotationBundle, PipelineError> {
    let front = load_view(
        config.garment_type,
        View::Front,
        &config.front_image,
        &config.front_landmarks,
        &config.front_mask,
    )?;
    let back_given = [
        config.back_image.as_ref(),
        config.back_landmarks.as_ref(),
        config.back_mask.as_ref(),
    ];
    let back = match (
        back_given.iter().filter(|p| p.is_some()).count(),
        config.symmetric,
    ) {
        (3, _) => Some(load_view(
            config.garment_type,
            View::Back,
            config.back_image.as_ref().unwrap(),
            config.back_landmarks.as_ref().unwrap(),
            config.back_mask.as_ref().unwrap(),
        )?),
        (0, true) => None,
        (0, false) => {
            return Err(PipelineError::new(
                STAGE_ANNOTATION,
                PipelineErrorKind::Config(
                    "no back view given: provide --back/--back-landmarks/--back-mask \
                     or enable --symmetric"
                        .into(),
                ),
            ))
        }
        _ => {
            return Err(PipelineError::new(
                STAGE_ANNOTATION,
                PipelineErrorKind::Config(
                    "back view needs all of --back, --back-landmarks and --back-mask".into(),
                ),
            ))
        }
    };
    Ok(AnnotationBundle {
        garment_type: config.garment_type,
        capture_mode: config.capture_mode,
        front,
        back,
        scale_measurement: config.scale_measurement.clone(),
    })
}

/// Loads the configured template directory, or generates the default
/// template for the garment type.
pub fn obtain_template(config: &PipelineConfig) -> Result<TemplateAsset, PipelineError> {
    match &config.template_dir {
        Some(dir) => load_template(dir).map_err(|e| PipelineError::new(STAGE_TEMPLATE, e)),
        None => match config.garment_type {
            GarmentType::Tshirt => make_tshirt_template(&TshirtParams::default()),
            GarmentType::Pants => make_pants_template(&PantsParams::default()),
        }
        .map_err(|e| PipelineError::new(STAGE_TEMPLATE, e)),
    }
}

/// Runs the measurement stage against a loaded bundle and template.
pub fn measure_bundle(
    config: &PipelineConfig,
    bundle: &AnnotationBundle,
    template: &TemplateAsset,
) -> Result<MeasurementReport, PipelineError> {
    let user = config
        .scale_measurement
        .as_ref()
        .map(|(name, meters)| (name.as_str(), *meters));
    let scale = pixel_scale(&bundle.front.landmarks, user)
        .map_err(|e| PipelineError::new(STAGE_MEASURE, e))?;
    let report = match config.garment_type {
        GarmentType::Tshirt => MeasurementReport::Tshirt(
            measure_tshirt(
                &bundle.front.landmarks,
                config.capture_mode,
                &scale,
                template.constants.chest_rho,
            )
            .map_err(|e| PipelineError::new(STAGE_MEASURE, e))?,
        ),
        GarmentType::Pants => MeasurementReport::Pants(
            measure_pants(
                &bundle.front.landmarks,
                config.capture_mode,
                &scale,
                template.constants.waist_rho,
            )
            .map_err(|e| PipelineError::new(STAGE_MEASURE, e))?,
        ),
    };
    Ok(report)
}

/// Solves the lattice for a report and deforms the template vertices.
pub fn deform_template(
    report: &MeasurementReport,
    template: &TemplateAsset,
) -> Result<(ControlLattice, Vec<crate::geom::Pt3>), PipelineError> {
    let lattice = match report {
        MeasurementReport::Tshirt(r) => solve_lattice_tshirt(r, template),
        MeasurementReport::Pants(r) => solve_lattice_pants(r, template),
    }
    .map_err(|e| PipelineError::new(STAGE_LATTICE, e))?;
    let embedding = embed(&template.vertices, &lattice.bbox)
        .map_err(|e| PipelineError::new(STAGE_LATTICE, e))?;
    let vertices = deform(&embedding, &lattice);
    Ok((lattice, vertices))
}

fn write_text(path: &Path, text: &str) -> Result<(), PipelineError> {
    std::fs::write(path, text).map_err(|source| {
        PipelineError::new(
            STAGE_OUTPUT,
            PipelineErrorKind::Io {
                path: path.display().to_string(),
                source,
            },
        )
    })
}

fn ensure_out_dir(config: &PipelineConfig) -> Result<(), PipelineError> {
    std::fs::create_dir_all(&config.out_dir).map_err(|source| {
        PipelineError::new(
            STAGE_OUTPUT,
            PipelineErrorKind::Io {
                path: config.out_dir.display().to_string(),
                source,
            },
        )
    })
}

fn atlas_options(config: &PipelineConfig) -> AtlasOptions {
    AtlasOptions {
        samples_per_segment: config.contour_samples,
        atlas_size: config.atlas_size,
        warp: config.warp,
        ..AtlasOptions::default()
    }
}

fn require_valid(bundle: &AnnotationBundle) -> Result<ValidationReport, PipelineError> {
    let report = validate_bundle(bundle);
    if !report.passed() {
        return Err(PipelineError::new(
            STAGE_VALIDATION,
            PipelineErrorKind::ValidationFailed(report),
        ));
    }
    Ok(report)
}

/// Per-stage wall-clock timings in the report; excluded from determinism
/// comparisons.
#[derive(Debug, Clone, Serialize, Default)]
pub struct Timings {
    pub stages_ms: Vec<(String, f64)>,
}

#[derive(Serialize)]
struct RunReport<'a> {
    config: &'a PipelineConfig,
    validation: &'a ValidationReport,
    warp: &'a [PieceStats],
    timing: &'a Timings,
}

/// Artifacts produced by [`cmd_build`].
#[derive(Debug)]
pub struct BuildArtifacts {
    pub model_obj: PathBuf,
    pub model_mtl: PathBuf,
    pub atlas_png: PathBuf,
    pub measurements_json: PathBuf,
    pub lattice_json: PathBuf,
    pub report_json: PathBuf,
}

/// Full pipeline: validate, measure, deform, texture, write everything.
pub fn cmd_build(config: &PipelineConfig) -> Result<BuildArtifacts, PipelineError> {
    config.validate()?;
    let mut timings = Timings::default();
    let mut clock = Instant::now();
    let mut lap = |name: &str, timings: &mut Timings| {
        timings
            .stages_ms
            .push((name.to_string(), clock.elapsed().as_secs_f64() * 1e3));
        clock = Instant::now();
    };

    let bundle = load_bundle(config)?;
    lap(STAGE_ANNOTATION, &mut timings);
    let validation = require_valid(&bundle)?;
    lap(STAGE_VALIDATION, &mut timings);
    let template = obtain_template(config)?;
    lap(STAGE_TEMPLATE, &mut timings);
    let report = measure_bundle(config, &bundle, &template)?;
    lap(STAGE_MEASURE, &mut timings);
    let (lattice, vertices) = deform_template(&report, &template)?;
    lap(STAGE_LATTICE, &mut timings);
    let (atlas, piece_stats) = compose_atlas(&bundle, &template, &atlas_options(config))
        .map_err(|e| PipelineError::new(STAGE_TEXTURE, e))?;
    lap(STAGE_TEXTURE, &mut timings);

    ensure_out_dir(config)?;
    let (model_obj, model_mtl) = save_model(
        &vertices,
        &template.material_coords,
        &template.faces,
        "atlas.png",
        &config.out_dir,
    )
    .map_err(|e| PipelineError::new(STAGE_OUTPUT, e))?;
    let atlas_png = config.out_dir.join("atlas.png");
    atlas.raster.save(&atlas_png).map_err(|e| {
        PipelineError::new(
            STAGE_OUTPUT,
            PipelineErrorKind::Io {
                path: atlas_png.display().to_string(),
                source: std::io::Error::new(std::io::ErrorKind::Other, e.to_string()),
            },
        )
    })?;
    let measurements_json = config.out_dir.join("measurements.json");
    write_text(
        &measurements_json,
        &serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    let lattice_json = config.out_dir.join("lattice.json");
    write_text(
        &lattice_json,
        &serde_json::to_string_pretty(&lattice).expect("lattice serializes"),
    )?;
    lap(STAGE_OUTPUT, &mut timings);

    let report_json = config.out_dir.join("report.json");
    let run_report = RunReport {
        config,
        validation: &validation,
        warp: &piece_stats,
        timing: &timings,
    };
    write_text(
        &report_json,
        &serde_json::to_string_pretty(&run_report).expect("run report serializes"),
    )?;

    Ok(BuildArtifacts {
        model_obj,
        model_mtl,
        atlas_png,
        measurements_json,
        lattice_json,
        report_json,
    })
}

/// Validation stage alone; the CLI prints the per-check lines and exits 0/2.
pub fn cmd_validate(config: &PipelineConfig) -> Result<ValidationReport, PipelineError> {
    config.validate()?;
    let bundle = load_bundle(config)?;
    Ok(validate_bundle(&bundle))
}

/// Measurement stage alone: writes measurements.json.
pub fn cmd_measure(config: &PipelineConfig) -> Result<MeasurementReport, PipelineError> {
    config.validate()?;
    let bundle = load_bundle(config)?;
    require_valid(&bundle)?;
    let template = obtain_template(config)?;
    let report = measure_bundle(config, &bundle, &template)?;
    ensure_out_dir(config)?;
    write_text(
        &config.out_dir.join("measurements.json"),
        &serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    Ok(report)
}

/// Deform stage alone: writes model.obj, model.mtl and lattice.json.
pub fn cmd_deform(config: &PipelineConfig) -> Result<(), PipelineError> {
    config.validate()?;
    let bundle = load_bundle(config)?;
    require_valid(&bundle)?;
    let template = obtain_template(config)?;
    let report = measure_bundle(config, &bundle, &template)?;
    let (lattice, vertices) = deform_template(&report, &template)?;
    ensure_out_dir(config)?;
    save_model(
        &vertices,
        &template.material_coords,
        &template.faces,
        "atlas.png",
        &config.out_dir,
    )
    .map_err(|e| PipelineError::new(STAGE_OUTPUT, e))?;
    write_text(
        &config.out_dir.join("lattice.json"),
        &serde_json::to_string_pretty(&lattice).expect("lattice serializes"),
    )?;
    Ok(())
}

/// Texture stage alone: writes atlas.png.
pub fn cmd_texture(config: &PipelineConfig) -> Result<Vec<PieceStats>, PipelineError> {
    config.validate()?;
    let bundle = load_bundle(config)?;
    require_valid(&bundle)?;
    let template = obtain_template(config)?;
    let (atlas, stats) = compose_atlas(&bundle, &template, &atlas_options(config))
        .map_err(|e| PipelineError::new(STAGE_TEXTURE, e))?;
    ensure_out_dir(config)?;
    let atlas_png = config.out_dir.join("atlas.png");
    atlas.raster.save(&atlas_png).map_err(|e| {
        PipelineError::new(
            STAGE_OUTPUT,
            PipelineErrorKind::Io {
                path: atlas_png.display().to_string(),
                source: std::io::Error::new(std::io::ErrorKind::Other, e.to_string()),
            },
        )
    })?;
    Ok(stats)
}
