use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::anyhow;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use rustico_core::datasets::{list_images, load_dataset, load_image};
use rustico_core::eval::{evaluate_centerlines, evaluate_segmentation, read_csv_column, EvalItem, MetricSet};
use rustico_core::multi_orientation_cosfire;
use rustico_core::{BinaryMask, Channel, GrayImage, RunConfig, RusticoOperator};

use crate::failure::Failure;
use crate::Mode;

/// Parsed configuration plus the directory its relative paths refer to.
struct Loaded {
    cfg: RunConfig,
    base: PathBuf,
}

impl Loaded {
    fn read(path: &Path) -> Result<Self, Failure> {
        let text =
            fs::read_to_string(path).map_err(|e| Failure::io(e).context(format!("reading {}", path.display())))?;
        let cfg =
            RunConfig::from_json(&text).map_err(|e| Failure::config(e).context(format!("in {}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self { cfg, base })
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    fn output(&self) -> PathBuf {
        self.resolve(&self.cfg.output)
    }

    fn dataset_root(&self) -> PathBuf {
        self.resolve(&self.cfg.dataset.root)
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Failure::io(e).context(format!("creating {}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| Failure::io(e).context(format!("writing {}", path.display())))
}

pub fn configure(config: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let run = Loaded::read(config)?;
    let op = run.cfg.build_operator()?;
    let f = op.excitatory();
    println!("{:>4}  {:>8}  {:>8}  {:>10}  {:>8}", "pol", "sigma", "rho", "phi(deg)", "blur");
    for t in f.tuples() {
        println!(
            "{:>4}  {:>8.3}  {:>8.3}  {:>10.3}  {:>8.3}",
            t.polarity.sign(),
            t.sigma,
            t.rho,
            t.phi.to_degrees(),
            f.blur().sigma_at(t.rho)
        );
    }
    let path = out.map(Path::to_path_buf).unwrap_or_else(|| run.output().join("filter.json"));
    let mut text = op.to_json();
    text.push('\n');
    write_file(&path, text.as_bytes())?;
    eprintln!("{} tuples written to {}", f.len(), path.display());
    Ok(())
}

#[derive(Serialize)]
struct InputRecord {
    id: String,
    file: String,
    sha256: String,
}

#[derive(Serialize)]
struct ApplySidecar<'a> {
    software: &'static str,
    version: &'static str,
    mode: &'static str,
    operator: serde_json::Value,
    config: &'a RunConfig,
    threshold: Option<f64>,
    inputs: Vec<InputRecord>,
    failures: Vec<String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn apply_one(
    op: &RusticoOperator,
    mode: Mode,
    run: &RunConfig,
    id: &str,
    path: &Path,
    out: &Path,
    threshold: Option<f64>,
) -> Result<InputRecord, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::io(e).context(format!("reading {}", path.display())))?;
    let img = load_image(path, run.load_options())
        .map_err(|e| Failure::from(e).context(format!("loading {}", path.display())))?;
    let resp = match mode {
        Mode::Rustico => op.multi_orientation_response(&img)?,
        Mode::Cosfire => multi_orientation_cosfire(op.excitatory(), op.orientations(), &img)?,
    };
    let png = resp.to_luma8_scaled();
    let target = out.join(format!("{id}.png"));
    png.save(&target).map_err(|e| Failure::io(e).context(format!("writing {}", target.display())))?;
    if let Some(t) = threshold {
        let mask = BinaryMask::from_fn(resp.width(), resp.height(), |x, y| {
            f64::from(png.get_pixel(x as u32, y as u32).0[0]) / 255.0 >= t
        });
        mask.save_png(out.join(format!("{id}_mask.png")))?;
    }
    let file = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(InputRecord { id: id.to_string(), file, sha256: sha256_hex(&bytes) })
}

pub fn apply(
    config: &Path,
    filter: Option<&Path>,
    out: Option<&Path>,
    threshold: Option<f64>,
    mode: Mode,
    images: &[PathBuf],
) -> Result<(), Failure> {
    let run = Loaded::read(config)?;
    if let Some(t) = threshold {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Failure::config(anyhow!("threshold must lie in (0, 1], got {t}")));
        }
    }
    let op = match filter {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::io(e).context(format!("reading {}", p.display())))?;
            RusticoOperator::from_json(&text).map_err(|e| Failure::config(e).context(format!("in {}", p.display())))?
        }
        None => run.cfg.build_operator()?,
    };

    let inputs: Vec<(String, PathBuf)> = if images.is_empty() {
        list_images(&run.dataset_root(), run.cfg.dataset.layout)?
    } else {
        images
            .iter()
            .map(|p| (p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(), p.clone()))
            .collect()
    };
    let ids: BTreeSet<&str> = inputs.iter().map(|(id, _)| id.as_str()).collect();
    if ids.len() != inputs.len() {
        return Err(Failure::config(anyhow!("input images must have distinct file stems")));
    }

    let out = out.map(Path::to_path_buf).unwrap_or_else(|| run.output().join("responses"));
    fs::create_dir_all(&out).map_err(|e| Failure::io(e).context(format!("creating {}", out.display())))?;

    let start = Instant::now();
    let total = inputs.len();
    let results: Vec<Result<InputRecord, (String, Failure)>> = inputs
        .par_iter()
        .map(|(id, path)| {
            let r = apply_one(&op, mode, &run.cfg, id, path, &out, threshold).map_err(|e| (id.clone(), e));
            match &r {
                Ok(_) => eprintln!("[{}] {id} done", mode.name()),
                Err((_, e)) => eprintln!("[{}] {id} failed: {:#}", mode.name(), e.error),
            }
            r
        })
        .collect();

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err((id, e)) => failures.push(format!("{id}: {:#}", e.error)),
        }
    }
    let sidecar = ApplySidecar {
        software: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        mode: mode.name(),
        operator: serde_json::to_value(op.to_document()).expect("operator serializes"),
        config: &run.cfg,
        threshold,
        inputs: records,
        failures: failures.clone(),
    };
    let mut text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    text.push('\n');
    write_file(&out.join("apply.json"), text.as_bytes())?;
    eprintln!(
        "{} of {total} images in {:.1}s -> {}",
        total - failures.len(),
        start.elapsed().as_secs_f64(),
        out.display()
    );

    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::io(anyhow!("{} of {total} images failed:\n  {}", failures.len(), failures.join("\n  "))))
    }
}

pub fn eval(
    config: &Path,
    responses: Option<&Path>,
    out: Option<&Path>,
    baseline: Option<&Path>,
) -> Result<(), Failure> {
    let run = Loaded::read(config)?;
    let cfg = &run.cfg;
    let responses = responses.map(Path::to_path_buf).unwrap_or_else(|| run.output().join("responses"));
    let out = out.map(Path::to_path_buf).unwrap_or_else(|| run.output().join("eval"));
    let metric_set = cfg.evaluation.metric_set;
    let start = Instant::now();

    let stream = load_dataset(&run.dataset_root(), cfg.dataset.layout, cfg.load_options())?;
    let mut dataset_ids = BTreeSet::new();
    let mut missing = Vec::new();
    let mut items = Vec::new();
    for item in stream {
        let item = item?;
        dataset_ids.insert(item.id.clone());
        let gt = match metric_set {
            MetricSet::Prf => item.gt_centerline.or(item.gt_segmentation),
            MetricSet::MccCal => item.gt_segmentation.or(item.gt_centerline),
        }
        .ok_or_else(|| Failure::io(anyhow!("no ground truth for {}", item.id)))?;
        let path = responses.join(format!("{}.png", item.id));
        if !path.is_file() {
            missing.push(item.id);
            continue;
        }
        items.push((item.id, path, gt, item.fov));
    }
    let extra: Vec<String> = fs::read_dir(&responses)
        .map_err(|e| Failure::io(e).context(format!("reading {}", responses.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "png"))
        .filter_map(|p| p.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .filter(|s| !s.ends_with("_mask") && !dataset_ids.contains(s))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        let mut msg = String::from("unmatched response/ground-truth pairs");
        if !missing.is_empty() {
            msg += &format!("; no response for: {}", missing.join(", "));
        }
        if !extra.is_empty() {
            msg += &format!("; no ground truth for: {}", extra.join(", "));
        }
        return Err(Failure::eval(anyhow!(msg)));
    }

    let items: Vec<EvalItem> = items
        .into_par_iter()
        .map(|(id, path, gt, fov)| {
            let response = GrayImage::load(&path, Channel::Luminance)
                .map_err(|e| Failure::io(e).context(format!("loading {}", path.display())))?;
            if response.dims() != gt.dims() {
                return Err(Failure::eval(anyhow!(
                    "{id}: response is {:?} but ground truth is {:?}",
                    response.dims(),
                    gt.dims()
                )));
            }
            Ok(EvalItem { id, response, gt, fov })
        })
        .collect::<Result<_, _>>()?;

    let name = cfg.dataset.layout.name();
    let grid = cfg.evaluation.threshold_grid;
    let mut report = match metric_set {
        MetricSet::Prf => evaluate_centerlines(name, items, cfg.tolerance(), grid)?,
        MetricSet::MccCal => evaluate_segmentation(name, items, grid, cfg.cal_params())?,
    };
    if let Some(b) = baseline {
        let text = fs::read_to_string(b).map_err(|e| Failure::io(e).context(format!("reading {}", b.display())))?;
        let column = read_csv_column(&text, metric_set.primary())?;
        let p = report.attach_baseline(&column)?;
        eprintln!("paired p-value vs {}: {p:.6}", b.display());
    }
    report.write(&out).map_err(|e| Failure::io(e).context(format!("writing {}", out.display())))?;
    let avg = report.averages();
    let summary: Vec<String> = metric_set.columns().iter().map(|c| format!("{c}={:.4}", avg[*c])).collect();
    eprintln!(
        "t*={:.2} {} ({:.1}s) -> {}",
        report.t_star,
        summary.join(" "),
        start.elapsed().as_secs_f64(),
        out.display()
    );
    Ok(())
}
