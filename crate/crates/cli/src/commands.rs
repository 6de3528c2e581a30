use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use imfkit_core::eval::{self, SweepConfig};
use imfkit_core::pano::{self, FusionParams, OverlapPair, StitchSpec, MIN_OVERLAP_AREA};
use imfkit_core::synth::{self, Curve, PairParams, TripleParams};
use imfkit_core::table::{load_tables, save_tables, TableFormat};
use imfkit_core::{apply_imf, decode_image, encode_png, metrics, simulate_overlap, Error};
use serde::Serialize;

use crate::{ApplyArgs, EstimateArgs, Kind, StitchArgs, SweepArgs, SynthgenArgs};

pub enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(anyhow!(msg.into()))
}

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn estimate(a: EstimateArgs) -> Outcome {
    let src = decode_image(&a.src)?;
    let reference = decode_image(&a.reference)?;
    let (src, reference) = if a.nc > 0 { simulate_overlap(&src, &reference, a.nc)? } else { (src, reference) };
    let tables = if a.raw { a.method.estimate(&src, &reference)? } else { a.method.estimate_total(&src, &reference)? };
    for p in save_tables(&tables, &a.out, a.format.into())? {
        log::info!("wrote {}", p.display());
    }
    Ok(())
}

pub fn apply(a: ApplyArgs) -> Outcome {
    let tables = load_tables(&a.tables)?;
    let input = decode_image(&a.input)?;
    let mapped = apply_imf(&input, &tables)?;
    encode_png(&mapped, &a.out)?;
    Ok(())
}

pub fn sweep(a: SweepArgs) -> Outcome {
    let found = eval::discover_pairs(&a.dir)?;
    let pairs = eval::load_pairs(&found)?;
    let cfg = SweepConfig { methods: a.methods, nc_list: a.nc_list, ssim: !a.no_ssim };
    let records = eval::sweep(&pairs, &cfg)?;
    for r in &records {
        log::info!(
            "{} {} {} n_c={} psnr={:.3}",
            found[r.pair].0,
            r.direction.name(),
            r.record.estimator,
            r.record.n_c,
            r.record.psnr
        );
    }
    let mut rows: Vec<metrics::EvalRecord> = records.iter().map(|r| r.record.clone()).collect();
    rows.extend(eval::aggregate(&records));
    if let Some(parent) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    let file = fs::File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    metrics::write_records(file, &rows)?;
    Ok(())
}

#[derive(Serialize)]
struct StitchManifest<'a> {
    tool: &'static str,
    version: &'static str,
    spec: &'a StitchSpec,
    estimator: &'static str,
    min_overlap_area: usize,
    fusion: FusionParams,
    pyramid_depth: usize,
    layout: &'a pano::Layout,
    outputs: Vec<String>,
}

pub fn stitch(a: StitchArgs) -> Outcome {
    let text = fs::read_to_string(&a.spec).with_context(|| format!("reading {}", a.spec.display()))?;
    let base = a.spec.parent().unwrap_or_else(|| Path::new(""));
    let (spec, as_written) = StitchSpec::from_json(&text, base)
        .and_then(|s| Ok((s, StitchSpec::from_json(&text, Path::new(""))?)))
        .map_err(|e| match e {
            Error::Config(_) => Failure::Usage(e.into()),
            e => e.into(),
        })?;
    let fusion = FusionParams::default();
    let out = pano::stitch_hdr(&spec, &fusion).map_err(|e| match e {
        Error::Config(_) => Failure::Usage(e.into()),
        e => e.into(),
    })?;
    create_dir(&a.out)?;
    let mut outputs = vec!["fused.png".to_string()];
    encode_png(&out.fused, a.out.join("fused.png"))?;
    if a.no_intermediates {
        return Ok(());
    }
    for (l, p) in out.panos.panos.iter().enumerate() {
        let name = format!("pano_{l}.png");
        encode_png(p, a.out.join(&name))?;
        outputs.push(name);
    }
    let format: TableFormat = a.format.into();
    for (label, tables) in out.chain.labelled() {
        for p in save_tables(tables, a.out.join("tables").join(&label), format)? {
            let rel = p.strip_prefix(&a.out).unwrap_or(&p);
            outputs.push(rel.to_string_lossy().replace('\\', "/"));
        }
    }
    outputs.push("timings.json".into());
    let manifest = StitchManifest {
        tool: "imfkit",
        version: env!("CARGO_PKG_VERSION"),
        spec: &as_written,
        estimator: "wha",
        min_overlap_area: MIN_OVERLAP_AREA,
        fusion,
        pyramid_depth: fusion.depth_for(out.layout.width, out.layout.height),
        layout: &out.layout,
        outputs,
    };
    write_json(&a.out.join("manifest.json"), &manifest)?;
    write_json(&a.out.join("timings.json"), &out.timings)?;
    Ok(())
}

#[derive(Serialize)]
struct SynthManifest {
    tool: &'static str,
    version: &'static str,
    seed: u64,
    count: usize,
    kind: &'static str,
    curve: String,
    param: Option<f64>,
    noise: f64,
    size: usize,
    channels: usize,
}

#[derive(Serialize)]
struct TripleTruth {
    exposures: Vec<f64>,
    gamma: f64,
}

pub fn synthgen(a: SynthgenArgs) -> Outcome {
    if a.channels != 1 && a.channels != 3 {
        return Err(usage(format!("--channels must be 1 or 3, got {}", a.channels)));
    }
    if !(a.noise.is_finite() && a.noise >= 0.0) {
        return Err(usage(format!("--noise must be a non-negative number, got {}", a.noise)));
    }
    if a.count == 0 {
        return Err(usage("--count must be at least 1"));
    }
    create_dir(&a.out)?;
    let mut rng = synth::rng(a.seed);
    let size = match a.kind {
        Kind::Pair => {
            let size = a.size.unwrap_or(PairParams::default().width);
            if size < 16 {
                return Err(usage(format!("--size must be at least 16, got {size}")));
            }
            let p = PairParams { width: size, height: size, channels: a.channels, noise: a.noise };
            for i in 0..a.count {
                let curve: Curve = match a.param {
                    Some(v) => a.curve.with_param(v),
                    None => a.curve.sample(&mut rng),
                };
                let pair = synth::exposure_pair(&mut rng, curve, &p);
                let dir = a.out.join(format!("pair_{i:03}"));
                create_dir(&dir)?;
                encode_png(&pair.a, dir.join("a.png"))?;
                encode_png(&pair.b, dir.join("b.png"))?;
                pair.curve.table().save_csv(dir.join("curve.csv"))?;
                write_json(&dir.join("curve.json"), &pair.curve)?;
            }
            size
        }
        Kind::Triple => {
            let defaults = TripleParams::default();
            let height = a.size.unwrap_or(defaults.height);
            if height < 48 {
                return Err(usage(format!("--size must be at least 48 for triples, got {height}")));
            }
            let p = TripleParams {
                tile_width: height,
                height,
                overlap: height / 3,
                channels: a.channels,
                noise: a.noise,
                ..defaults
            };
            for i in 0..a.count {
                let triple = synth::bracketed_triple(&mut rng, &p);
                let dir = a.out.join(format!("triple_{i:03}"));
                create_dir(&dir)?;
                let mut inputs = Vec::new();
                for (l, img) in triple.images.iter().enumerate() {
                    let name = format!("tile_{l}.png");
                    encode_png(img, dir.join(&name))?;
                    inputs.push(PathBuf::from(name));
                }
                let overlaps: Vec<OverlapPair> = triple.overlaps.clone();
                let spec = StitchSpec { inputs, overlaps, feather: p.overlap / 2 };
                write_json(&dir.join("stitch.json"), &spec)?;
                write_json(&dir.join("truth.json"), &TripleTruth { exposures: triple.exposures.clone(), gamma: synth::DISPLAY_GAMMA })?;
            }
            height
        }
    };
    let manifest = SynthManifest {
        tool: "imfkit",
        version: env!("CARGO_PKG_VERSION"),
        seed: a.seed,
        count: a.count,
        kind: match a.kind {
            Kind::Pair => "pair",
            Kind::Triple => "triple",
        },
        curve: a.curve.to_string(),
        param: a.param,
        noise: a.noise,
        size,
        channels: a.channels,
    };
    write_json(&a.out.join("manifest.json"), &manifest)?;
    Ok(())
}
