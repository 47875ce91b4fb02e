//! CSV and PNG sinks. Numeric output is formatted with Rust's shortest
//! round-trip representation, so it is byte-stable across runs.

use std::fs::File;
use std::path::Path;

use anyhow::{Context, Result};
use image::{Rgb, RgbImage};

use lu_flow::diagnostics::ConvergenceReport;
use lu_flow::solver::TrajectoryRecord;

pub const TRAJECTORY_HEADER: [&str; 6] = ["time", "energy", "enstrophy", "h_norm", "v_norm", "max_div"];

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))
}

fn trajectory_rows(record: &TrajectoryRecord) -> impl Iterator<Item = [String; 6]> + '_ {
    record.times.iter().zip(&record.diagnostics).map(|(t, d)| {
        [t, &d.energy, &d.enstrophy, &d.h_norm, &d.v_norm, &d.max_divergence].map(|x| x.to_string())
    })
}

pub fn write_trajectory(path: &Path, record: &TrajectoryRecord) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(TRAJECTORY_HEADER)?;
    for row in trajectory_rows(record) {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// All members in one file with a leading `member` column.
pub fn write_ensemble(path: &Path, records: &[TrajectoryRecord]) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec!["member"];
    header.extend(TRAJECTORY_HEADER);
    w.write_record(&header)?;
    for (m, record) in records.iter().enumerate() {
        for row in trajectory_rows(record) {
            let mut full = vec![m.to_string()];
            full.extend(row);
            w.write_record(&full)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Ensemble mean and standard deviation of the energy at each time.
pub fn write_aggregate(path: &Path, records: &[TrajectoryRecord]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["time", "mean_energy", "std_energy", "mean_enstrophy", "max_div"])?;
    let n = records.len() as f64;
    for (i, t) in records[0].times.iter().enumerate() {
        let e: Vec<f64> = records.iter().map(|r| r.diagnostics[i].energy).collect();
        let mean = e.iter().sum::<f64>() / n;
        let var = e.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        let ens = records.iter().map(|r| r.diagnostics[i].enstrophy).sum::<f64>() / n;
        let div = records
            .iter()
            .map(|r| r.diagnostics[i].max_divergence)
            .fold(0.0, f64::max);
        w.write_record([t, &mean, &var.sqrt(), &ens, &div].map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_convergence(path: &Path, report: &ConvergenceReport) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["epsilon", "h_error", "v_error", "fitted_slope", "ensemble_size", "shared_path"])?;
    for ((e, h), v) in report.epsilons.iter().zip(&report.h_errors).zip(&report.v_errors) {
        w.write_record([
            e.to_string(),
            h.to_string(),
            v.to_string(),
            report.fitted_slope.to_string(),
            report.ensemble_size.to_string(),
            report.shared_path.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_rows(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

const WIDTH: u32 = 640;
const HEIGHT: u32 = 480;
const MARGIN: f64 = 40.0;

/// Line chart of each series on shared axes, logarithmic when `log` is set.
/// Non-positive values are dropped on log axes.
pub fn plot_lines(path: &Path, series: &[(&[f64], &[f64])], log: bool) -> Result<()> {
    let tf = |v: f64| if log { v.log10() } else { v };
    let pts: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|(x, y)| {
            x.iter()
                .zip(y.iter())
                .filter(|(a, b)| !log || (**a > 0.0 && **b > 0.0))
                .map(|(a, b)| (tf(*a), tf(*b)))
                .filter(|(a, b)| a.is_finite() && b.is_finite())
                .collect()
        })
        .collect();
    let all = pts.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let mut img = RgbImage::from_pixel(WIDTH, HEIGHT, Rgb([255, 255, 255]));
    let axis = Rgb([0, 0, 0]);
    let (w, h) = (WIDTH as f64, HEIGHT as f64);
    draw_line(&mut img, (MARGIN, h - MARGIN), (w - MARGIN, h - MARGIN), axis);
    draw_line(&mut img, (MARGIN, MARGIN), (MARGIN, h - MARGIN), axis);
    if x0.is_finite() && y0.is_finite() {
        let span = |lo: f64, hi: f64| if hi > lo { hi - lo } else { 1.0 };
        let map = |(x, y): (f64, f64)| {
            (
                MARGIN + (x - x0) / span(x0, x1) * (w - 2.0 * MARGIN),
                h - MARGIN - (y - y0) / span(y0, y1) * (h - 2.0 * MARGIN),
            )
        };
        let colors = [Rgb([200, 30, 30]), Rgb([30, 90, 200]), Rgb([30, 150, 60]), Rgb([150, 60, 160])];
        for (i, line) in pts.iter().enumerate() {
            let c = colors[i % colors.len()];
            for seg in line.windows(2) {
                draw_line(&mut img, map(seg[0]), map(seg[1]), c);
            }
            for &p in line {
                let (px, py) = map(p);
                for dx in -2..=2 {
                    for dy in -2..=2 {
                        put(&mut img, px + dx as f64, py + dy as f64, c);
                    }
                }
            }
        }
    }
    img.save(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn put(img: &mut RgbImage, x: f64, y: f64, c: Rgb<u8>) {
    if x >= 0.0 && y >= 0.0 && (x as u32) < img.width() && (y as u32) < img.height() {
        img.put_pixel(x as u32, y as u32, c);
    }
}

fn draw_line(img: &mut RgbImage, a: (f64, f64), b: (f64, f64), c: Rgb<u8>) {
    let steps = (b.0 - a.0).abs().max((b.1 - a.1).abs()).ceil().max(1.0) as usize;
    for i in 0..=steps {
        let s = i as f64 / steps as f64;
        put(img, a.0 + s * (b.0 - a.0), a.1 + s * (b.1 - a.1), c);
    }
}
