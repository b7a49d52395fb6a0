use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use shapefilter::embed::{default_k, isomap_embed};
use shapefilter::io;
use shapefilter::metrics::evaluate;
use shapefilter::pipeline::{
    extract_contours, filter_sequence, generate_synthetic_sequence, ScenarioSpec,
};
use shapefilter::srv::{align_path, srv_transform, ShapePath};
use shapefilter::weights::{scheme_weights, WeightParams};
use shapefilter::{FilterConfig, MaskStack, Scheme};

use crate::failure::Failure;
use crate::{EmbedArgs, EvalArgs, FilterArgs, FilterParams, SynthArgs, WeightsArgs};

/// Bumped whenever any file written by the tool changes layout.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
pub struct Formats {
    pub masks: String,
    pub contours: String,
    pub weights: String,
    pub flags: String,
    pub embedding: String,
}

impl Formats {
    fn current() -> Self {
        Formats {
            masks: "pgm-p5-8bit".into(),
            contours: "csv t,i,x,y".into(),
            weights: "csv t,w".into(),
            flags: "csv t,flag".into(),
            embedding: "csv t,x,y".into(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub format_version: u32,
    pub formats: Formats,
    pub command: String,
    pub input: PathBuf,
    /// Command-specific settings.
    pub config: serde_json::Value,
    /// Command-specific results worth keeping next to the outputs.
    #[serde(default)]
    pub summary: serde_json::Value,
    pub outputs: Vec<String>,
}

impl Manifest {
    fn new(command: &str, input: &Path, config: serde_json::Value) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            format_version: FORMAT_VERSION,
            formats: Formats::current(),
            command: command.into(),
            input: fs::canonicalize(input).unwrap_or_else(|_| input.to_path_buf()),
            config,
            summary: serde_json::Value::Null,
            outputs: Vec::new(),
        }
    }

    fn write(&self, dir: &Path) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(self)? + "\n";
        io::write_atomic(&dir.join("manifest.json"), text.as_bytes())?;
        Ok(())
    }
}

fn read_manifest(path: &Path) -> Result<Manifest, Failure> {
    let text = fs::read(path)
        .map_err(|e| Failure::empty_input(format!("cannot read manifest {}: {e}", path.display())))?;
    let m: Manifest = serde_json::from_slice(&text)?;
    if m.format_version != FORMAT_VERSION {
        return Err(Failure::config(format!(
            "manifest format version {} is not supported (expected {FORMAT_VERSION})",
            m.format_version
        )));
    }
    Ok(m)
}

/// Reads a frame directory, treating a missing or frameless directory as
/// empty input.
fn read_frames(dir: &Path) -> Result<MaskStack, Failure> {
    if !dir.is_dir() {
        return Err(Failure::empty_input(format!("{} is not a directory", dir.display())));
    }
    let stack = io::read_frame_dir(dir)?;
    if stack.is_empty() {
        return Err(Failure::empty_input(format!("no .pgm frames in {}", dir.display())));
    }
    Ok(stack)
}

fn create_out_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn filter_config(p: &FilterParams) -> Result<FilterConfig, Failure> {
    let outlier_flags = match &p.flags {
        Some(path) => Some(io::read_flags_csv(path)?),
        None => None,
    };
    let config = FilterConfig {
        n_samples: p.samples,
        rho: p.rho,
        rho_pre: p.rho_pre,
        scheme: p.scheme,
        a_const: p.a,
        c_const: p.c,
        outlier_flags,
        frame_interval: p.dt,
        normalize_weights: true,
    };
    if config.scheme == Scheme::Piecewise && config.outlier_flags.is_none() {
        return Err(Failure::config("--scheme piecewise requires --flags <csv>"));
    }
    config.validate()?;
    Ok(config)
}

pub fn filter(args: &FilterArgs) -> Result<(), Failure> {
    let (input, config) = match &args.manifest {
        Some(path) => {
            let m = read_manifest(path)?;
            if m.command != "filter" {
                return Err(Failure::config(format!(
                    "manifest was written by '{}', not 'filter'",
                    m.command
                )));
            }
            let config: FilterConfig = serde_json::from_value(m.config)
                .map_err(|e| Failure::config(format!("manifest config: {e}")))?;
            config.validate()?;
            (m.input, config)
        }
        None => {
            let input = args.input.clone().expect("clap enforces --in or --manifest");
            (input, filter_config(&args.params)?)
        }
    };
    let masks = read_frames(&input)?;
    let out = filter_sequence(&masks, &config)?;
    let filtered = out.masks(masks.width(), masks.height());

    create_out_dir(&args.out)?;
    io::write_contours_csv(&args.out.join("contours.csv"), &out.contours)?;
    io::write_weights_csv(&args.out.join("weights.csv"), &out.weights)?;
    io::write_frame_dir(&args.out, &filtered)?;

    let mut manifest = Manifest::new("filter", &input, serde_json::to_value(&config)?);
    manifest.summary = json!({
        "frames": masks.len(),
        "width": masks.width(),
        "height": masks.height(),
        "roughness": out.roughness,
    });
    manifest.outputs = ["contours.csv".to_string(), "weights.csv".to_string()]
        .into_iter()
        .chain((0..masks.len()).map(io::frame_file_name))
        .collect();
    manifest.write(&args.out)
}

pub fn eval(args: &EvalArgs) -> Result<(), Failure> {
    let truth = read_frames(&args.truth)?;
    let test = read_frames(&args.input)?;
    let metrics = evaluate(&truth, &test)?;
    let text = serde_json::to_string(&metrics)?;
    if let Some(path) = &args.out {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            create_out_dir(parent)?;
        }
        io::write_atomic(path, format!("{text}\n").as_bytes())?;
    }
    println!("{text}");
    Ok(())
}

pub fn embed(args: &EmbedArgs) -> Result<(), Failure> {
    if !args.input.is_file() {
        return Err(Failure::empty_input(format!("{} is not a file", args.input.display())));
    }
    let contours = io::read_contours_csv(&args.input)?;
    if contours.is_empty() {
        return Err(Failure::empty_input(format!("no contours in {}", args.input.display())));
    }
    let shapes = contours
        .iter()
        .map(srv_transform)
        .collect::<shapefilter::Result<Vec<_>>>()?;
    let path = ShapePath::with_unit_times(shapes)?;
    let (aligned, _) = align_path(&path)?;
    let k = args.k.unwrap_or_else(|| default_k(aligned.len()));
    let embedding = isomap_embed(&aligned, k)?;

    create_out_dir(&args.out)?;
    io::write_embedding_csv(&args.out.join("embedding.csv"), &embedding)?;
    io::write_embedding_svg(&args.out.join("embedding.svg"), &embedding)?;
    let mut manifest = Manifest::new("embed", &args.input, json!({ "k": k }));
    manifest.summary = json!({
        "frames": embedding.coords.len(),
        "stress": embedding.stress,
        "trajectory_length": embedding.trajectory_length(),
    });
    manifest.outputs = vec!["embedding.csv".into(), "embedding.svg".into()];
    manifest.write(&args.out)
}

pub fn synth(args: &SynthArgs) -> Result<(), Failure> {
    if args.frames < 2 {
        return Err(Failure::config(format!("--frames must be at least 2, got {}", args.frames)));
    }
    let spec = ScenarioSpec::random(args.seed, args.frames, args.outliers, args.noise);
    let seq = generate_synthetic_sequence(&spec)?;

    create_out_dir(&args.out)?;
    io::write_frame_dir(&args.out.join("truth"), &seq.truth)?;
    io::write_frame_dir(&args.out.join("noisy"), &seq.masks)?;
    io::write_flags_csv(&args.out.join("flags.csv"), &seq.outlier_flags)?;
    let scenario = serde_json::to_string_pretty(&spec)? + "\n";
    io::write_atomic(&args.out.join("scenario.json"), scenario.as_bytes())?;

    let mut manifest = Manifest::new(
        "synth",
        &args.out,
        json!({
            "seed": args.seed,
            "frames": args.frames,
            "outliers": args.outliers,
            "noise": args.noise,
        }),
    );
    manifest.outputs = vec![
        "truth/".into(),
        "noisy/".into(),
        "flags.csv".into(),
        "scenario.json".into(),
    ];
    manifest.write(&args.out)
}

pub fn weights(args: &WeightsArgs) -> Result<(), Failure> {
    let config = filter_config(&args.params)?;
    let masks = read_frames(&args.input)?;
    let contours = extract_contours(&masks, config.n_samples)?;
    let shapes = contours
        .iter()
        .map(srv_transform)
        .collect::<shapefilter::Result<Vec<_>>>()?;
    let times = (0..shapes.len())
        .map(|i| i as f64 * config.frame_interval)
        .collect();
    let (aligned, _) = align_path(&ShapePath::new(shapes, times)?)?;
    let params = WeightParams {
        a: config.a_const,
        c: config.c_const,
        rho_pre: config.rho_pre,
        outlier_flags: config.outlier_flags.clone(),
    };
    let w = scheme_weights(&aligned, config.scheme, &params)?;
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_out_dir(parent)?;
    }
    io::write_weights_csv(&args.out, &w)?;
    Ok(())
}
