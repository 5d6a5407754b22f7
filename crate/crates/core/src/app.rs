//! Command implementations behind the `reglue-kit` binary.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::classify::{
    classify_free_critical, find_center, find_misiurewicz, scan_cell, ClassificationTag, ScanCell, ScanOptions,
    DEFAULT_MAX_ITER,
};
use crate::config::{parse_config, parse_pair, parse_scan_line, scan_line, scan_ppm, Angle, BetaChoice, Command, ConfigError, JobConfig};
use crate::cuts::{build_cut_complex, build_cut_family, cut_family_svg, initial_cut, Curve, CutDocument};
use crate::maps::{family_member, FamilyMember};
use crate::rays::{beta_boundary_case, boettcher, trace_ray, LANDING_LEVELS};
use crate::reglue::{demo_clouds, demo_csv};
use crate::sphere::chordal_distance;
use crate::spider::{angle_to_portrait, spider_solve};
use crate::svg::{render, Layer, PALETTE};

/// Environment variable capping the scan worker pool.
pub const THREADS_ENV: &str = "REGLUE_KIT_THREADS";
const SPIDER_MAX_ITER: usize = 500;
/// How far a traced landing point may sit from the critical value before a
/// ray-based beta is refused.
pub const BETA_SNAP_TOL: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Numeric(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) | AppError::Io { .. } => 2,
            AppError::Numeric(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            AppError::Config(_) => "config",
            AppError::Io { .. } => "io",
            AppError::Numeric(_) => "numeric",
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "error": self.kind(), "message": self.to_string() })
    }
}

fn numeric(e: impl std::fmt::Display) -> AppError {
    AppError::Numeric(e.to_string())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> AppError + '_ {
    move |source| AppError::Io { path: path.to_path_buf(), source }
}

fn write_file(path: &Path, data: impl AsRef<[u8]>) -> Result<(), AppError> {
    fs::write(path, data).map_err(io_err(path))
}

/// Builds a job from an optional config file and `key=value` overrides
/// (overrides win).
pub fn load_job(command: Command, config: Option<&Path>, overrides: &[String]) -> Result<JobConfig, AppError> {
    let file = match config {
        Some(path) => parse_config(&fs::read_to_string(path).map_err(io_err(path))?)?,
        None => BTreeMap::new(),
    };
    let mut pairs: Vec<(String, String)> = file.into_iter().collect();
    for o in overrides {
        pairs.push(parse_pair(o).ok_or_else(|| ConfigError::Invalid(format!("expected key=value, got {o:?}")))?);
    }
    Ok(JobConfig::from_pairs(command, pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))?)
}

/// Runs a job, writing its files under `cfg.out`, and returns a summary.
pub fn run(cfg: &JobConfig) -> Result<Value, AppError> {
    fs::create_dir_all(&cfg.out).map_err(io_err(&cfg.out))?;
    match cfg.command {
        Command::Scan => run_scan(cfg),
        Command::Classify => run_classify(cfg),
        Command::Center => run_center(cfg),
        Command::Cuts => run_cuts(cfg),
        Command::Ray => run_ray(cfg),
        Command::ReglueDemo => run_reglue_demo(cfg),
    }
}

fn member(cfg: &JobConfig) -> Result<FamilyMember, AppError> {
    let p = cfg.parameter.ok_or(ConfigError::Missing("parameter (a= or c=)"))?;
    family_member(cfg.k, p).map_err(|e| ConfigError::Invalid(e.to_string()).into())
}

fn thread_count() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Valid records of an earlier run of the same scan; a torn last line is
/// dropped and the file truncated to its last complete record.
fn load_partial_scan(path: &Path, cfg: &JobConfig, opts: &ScanOptions) -> Result<BTreeMap<usize, ScanCell>, AppError> {
    let mut done = BTreeMap::new();
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(done),
        Err(e) => return Err(io_err(path)(e)),
    };
    let window = cfg.scan_window();
    let n = opts.resolution * opts.resolution;
    let complete = text.rfind('\n').map_or(0, |i| i + 1);
    for line in text[..complete].lines() {
        let cell = parse_scan_line(line)?;
        let expected = (cell.index < n).then(|| window.cell_center(opts.resolution, cell.index % opts.resolution, cell.index / opts.resolution));
        if expected != Some(cell.parameter) {
            return Err(ConfigError::Invalid(format!("{} belongs to a different scan", path.display())).into());
        }
        done.insert(cell.index, cell);
    }
    if complete < text.len() {
        let f = fs::OpenOptions::new().write(true).open(path).map_err(io_err(path))?;
        f.set_len(complete as u64).map_err(io_err(path))?;
    }
    Ok(done)
}

fn run_scan(cfg: &JobConfig) -> Result<Value, AppError> {
    let window = cfg.scan_window();
    let opts = ScanOptions {
        resolution: cfg.resolution,
        basin_resolution: cfg.basin_resolution,
        max_iter: cfg.max_iter.unwrap_or(DEFAULT_MAX_ITER),
        snap_centers: true,
    };
    let n = opts.resolution * opts.resolution;
    let jsonl = cfg.out.join("scan.jsonl");
    let ppm = cfg.out.join("scan.ppm");
    let mut done = load_partial_scan(&jsonl, cfg, &opts)?;
    let resumed = done.len();
    let todo: Vec<usize> = (0..n).filter(|i| !done.contains_key(i)).take(cfg.limit.unwrap_or(usize::MAX)).collect();

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = thread_count() {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(numeric)?;
    let file = fs::OpenOptions::new().create(true).append(true).open(&jsonl).map_err(io_err(&jsonl))?;

    // Workers send cells to a single writer, which emits them in index order
    // so the file does not depend on scheduling.
    let (tx, rx) = mpsc::channel::<ScanCell>();
    let written = std::thread::scope(|s| {
        let writer = s.spawn(|| -> std::io::Result<Vec<ScanCell>> {
            let mut out = BufWriter::new(file);
            let mut pending = BTreeMap::new();
            let mut next = 0;
            let mut written = Vec::with_capacity(todo.len());
            for cell in rx {
                pending.insert(cell.index, cell);
                while next < todo.len() {
                    let Some(cell) = pending.remove(&todo[next]) else { break };
                    writeln!(out, "{}", scan_line(&cell))?;
                    written.push(cell);
                    next += 1;
                }
            }
            out.flush()?;
            Ok(written)
        });
        pool.install(|| todo.par_iter().for_each_with(tx, |tx, &i| {
            let _ = tx.send(scan_cell(cfg.k, &window, &opts, i));
        }));
        writer.join().expect("scan writer panicked")
    })
    .map_err(io_err(&jsonl))?;
    let computed = written.len();
    done.extend(written.into_iter().map(|c| (c.index, c)));

    let complete = done.len() == n;
    let cells: Vec<ScanCell> = done.into_values().collect();
    if complete {
        write_file(&ppm, scan_ppm(&cells, opts.resolution))?;
    }
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for c in &cells {
        *counts.entry(tag_name(c.tag)).or_default() += 1;
    }
    Ok(json!({
        "command": "scan",
        "k": cfg.k,
        "window": window,
        "resolution": opts.resolution,
        "cells": n,
        "resumed": resumed,
        "computed": computed,
        "complete": complete,
        "counts": counts,
        "jsonl": jsonl,
        "ppm": if complete { Some(ppm) } else { None },
    }))
}

fn tag_name(tag: ClassificationTag) -> String {
    serde_json::to_value(tag).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

fn run_classify(cfg: &JobConfig) -> Result<Value, AppError> {
    let fm = member(cfg)?;
    let class = classify_free_critical(&fm, cfg.basin_resolution, cfg.max_iter.unwrap_or(DEFAULT_MAX_ITER));
    let report = json!({
        "command": "classify",
        "k": cfg.k,
        "parameter": fm.parameter,
        "tag": class.tag,
        "evidence": class.evidence,
    });
    let path = cfg.out.join("classify.json");
    write_file(&path, pretty(&report))?;
    Ok(report)
}

fn run_center(cfg: &JobConfig) -> Result<Value, AppError> {
    let max_iter = cfg.max_iter.unwrap_or(SPIDER_MAX_ITER);
    let report = match cfg.angle {
        Some(Angle::Rational { p, q }) => {
            let portrait = angle_to_portrait(p, q).map_err(|e| ConfigError::Invalid(e.to_string()))?;
            let sol = spider_solve(&portrait, cfg.tolerance, max_iter).map_err(numeric)?;
            // Polish with Newton on the corresponding critical-orbit equation.
            let newton = if portrait.preperiod == 0 {
                find_center(1, portrait.period, sol.c)
            } else {
                find_misiurewicz(portrait.preperiod, portrait.period, sol.c)
            }
            .map_err(numeric)?;
            let csv = cfg.out.join("center.csv");
            write_file(&csv, sol.to_csv())?;
            json!({
                "command": "center",
                "k": 1,
                "angle": format!("{p}/{q}"),
                "portrait": portrait,
                "parameter": sol.c,
                "spider_steps": sol.history.len(),
                "newton": newton,
                "discrepancy": (sol.c - newton.parameter).norm(),
                "convergence_csv": csv,
            })
        }
        _ => {
            let landing = cfg.landing.ok_or(ConfigError::Missing("landing"))?;
            let guess = cfg.parameter.ok_or(ConfigError::Missing("guess (a= or c=)"))?;
            let sol = find_center(cfg.k, landing, guess).map_err(numeric)?;
            json!({ "command": "center", "k": cfg.k, "landing": landing, "guess": guess, "parameter": sol.parameter, "newton": sol })
        }
    };
    write_file(&cfg.out.join("center.json"), pretty(&report))?;
    Ok(report)
}

/// The arc `β` from the free critical value used to seed the cut family.
fn beta_curve(cfg: &JobConfig, fm: &FamilyMember) -> Result<Curve, AppError> {
    let v = fm.free_critical_value();
    match cfg.beta {
        BetaChoice::Segment => {
            let vz = v.finite().ok_or_else(|| AppError::Numeric("critical value at infinity".into()))?;
            // k = 1: one unit radially outward; k = 2: towards -2.
            let outward = if vz.norm() > 0.0 { vz + vz / vz.norm() } else { vz + 1.0 };
            let end = cfg.beta_end.unwrap_or(if cfg.k == 1 { outward } else { Complex64::new(-2.0, 0.0) });
            Curve::segment(vz, end).map_err(|e| ConfigError::Invalid(e.to_string()).into())
        }
        BetaChoice::Ray => {
            let angle = cfg.angle.ok_or(ConfigError::Missing("angle"))?.value();
            let b = beta_boundary_case(fm, angle).map_err(numeric)?;
            b.snapped(v, BETA_SNAP_TOL).map_err(numeric)
        }
    }
}

/// Half-width of a drawing square holding the finite vertices of `curves`.
fn view_half_width<'a>(curves: impl Iterator<Item = &'a Curve>) -> f64 {
    let r = curves
        .flat_map(|c| c.vertices.iter())
        .filter_map(|p| p.finite())
        .map(|z| z.re.abs().max(z.im.abs()))
        .filter(|r| *r <= 10.0)
        .fold(1.0, f64::max);
    (1.1 * r).ceil()
}

fn run_cuts(cfg: &JobConfig) -> Result<Value, AppError> {
    let fm = member(cfg)?;
    let beta = beta_curve(cfg, &fm)?;
    let z = initial_cut(&fm.map, &beta).map_err(numeric)?;
    let family = build_cut_family(&fm.map, &z, cfg.depth).map_err(numeric)?;
    let complex = build_cut_complex(&family).map_err(numeric)?;
    let half = view_half_width(family.arcs().map(|a| &a.curve));
    let svg = cut_family_svg(&family, half);
    let summary = json!({
        "command": "cuts",
        "k": cfg.k,
        "parameter": fm.parameter,
        "depth": cfg.depth,
        "beta": cfg.beta,
        "arc_counts": family.arc_counts(),
        "stats": complex.stats,
    });
    let doc = CutDocument { family, complex: Some(complex) };
    write_file(&cfg.out.join("cuts.json"), serde_json::to_string(&doc).map_err(numeric)?)?;
    write_file(&cfg.out.join("cuts.svg"), svg)?;
    Ok(summary)
}

fn run_ray(cfg: &JobConfig) -> Result<Value, AppError> {
    let fm = member(cfg)?;
    let angle = cfg.angle.ok_or(ConfigError::Missing("angle"))?.value();
    let (report, curve) = if cfg.boundary {
        let b = beta_boundary_case(&fm, angle).map_err(numeric)?;
        let report = json!({
            "command": "ray",
            "boundary": true,
            "angle": angle,
            "center": b.center,
            "preperiod": b.preperiod,
            "landing": b.landing,
            "distance_to_critical_value": b.distance_to_critical_value,
            "max_residual": b.ray.max_residual,
            "curve": b.curve,
        });
        (report, b.curve)
    } else {
        let m = &fm.map;
        let bd = boettcher(m, m.c1(), cfg.k as usize).map_err(numeric)?;
        let t1 = 1.0 - 2f64.powi(-*LANDING_LEVELS.end());
        let ray = trace_ray(&bd, angle, 0.05, t1, 0.05).map_err(numeric)?;
        let v = fm.free_critical_value();
        let report = json!({
            "command": "ray",
            "boundary": false,
            "angle": angle,
            "cycle_point": bd.point,
            "landing": ray.landing,
            "distance_to_critical_value": ray.landing.map(|l| chordal_distance(l, v)),
            "max_residual": ray.max_residual,
            "ray": ray,
        });
        (report, ray.trace)
    };
    write_file(&cfg.out.join("ray.json"), pretty(&report))?;
    let layer = Layer { id: "ray".into(), color: PALETTE[1].into(), curves: vec![&curve] };
    write_file(&cfg.out.join("ray.svg"), render(&[layer], view_half_width(std::iter::once(&curve))))?;
    let mut summary = report;
    if let Some(obj) = summary.as_object_mut() {
        obj.remove("curve");
        obj.remove("ray");
    }
    Ok(summary)
}

fn run_reglue_demo(cfg: &JobConfig) -> Result<Value, AppError> {
    let points = demo_clouds(cfg.samples, cfg.seed);
    let path = cfg.out.join("reglue.csv");
    write_file(&path, demo_csv(&points))?;
    Ok(json!({ "command": "reglue-demo", "points": points.len(), "seed": cfg.seed, "csv": path }))
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("values serialize") + "\n"
}

