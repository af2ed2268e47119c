//! SVG charts from battery CSVs, one series per protocol, averaged over seeds.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use drugsim_core::battery::{DELIVERY_RATIO_CSV, FIRST_DEATH_CSV, RESIDUAL_ENERGY_CSV};
use plotters::prelude::*;

const SIZE: (u32, u32) = (800, 500);
const PALETTE: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(255, 127, 14),
    RGBColor(44, 160, 44),
    RGBColor(214, 39, 40),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub protocol: String,
    pub seed: u64,
    pub time_s: f64,
    pub value: f64,
}

pub fn read_rows(path: &Path) -> Result<Vec<Row>> {
    let mut reader =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["protocol", "seed", "time_s", "value"] {
        bail!("{}: unexpected header {:?}", path.display(), headers);
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let field = |j: usize| record.get(j).unwrap_or_default();
        let line = i + 2;
        rows.push(Row {
            protocol: field(0).to_string(),
            seed: field(1)
                .parse()
                .with_context(|| format!("{}:{line}: bad seed", path.display()))?,
            time_s: field(2)
                .parse()
                .with_context(|| format!("{}:{line}: bad time_s", path.display()))?,
            value: field(3)
                .parse()
                .with_context(|| format!("{}:{line}: bad value", path.display()))?,
        });
    }
    if rows.is_empty() {
        bail!("{} has no data rows", path.display());
    }
    Ok(rows)
}

/// Mean value per (protocol, time) over seeds.
fn averaged(rows: &[Row]) -> BTreeMap<String, Vec<(f64, f64)>> {
    let mut acc: BTreeMap<String, BTreeMap<u64, (f64, usize)>> = BTreeMap::new();
    for r in rows {
        // Key on the bit pattern so equal times from different seeds merge.
        let slot = acc
            .entry(r.protocol.clone())
            .or_default()
            .entry(r.time_s.to_bits())
            .or_default();
        slot.0 += r.value;
        slot.1 += 1;
    }
    acc.into_iter()
        .map(|(p, points)| {
            let mut series: Vec<(f64, f64)> = points
                .into_iter()
                .map(|(t, (sum, n))| (f64::from_bits(t), sum / n as f64))
                .collect();
            series.sort_by(|a, b| a.0.total_cmp(&b.0));
            (p, series)
        })
        .collect()
}

fn draw_err<E: std::error::Error + Send + Sync + 'static>(
    e: DrawingAreaErrorKind<E>,
) -> anyhow::Error {
    anyhow::anyhow!("drawing failed: {e}")
}

fn line_chart(rows: &[Row], out: &Path, title: &str, y_label: &str, y_scale: f64) -> Result<()> {
    let series = averaged(rows);
    let x_max = rows.iter().map(|r| r.time_s).fold(0.0, f64::max).max(1e-9);
    let y_max = rows
        .iter()
        .map(|r| r.value * y_scale)
        .fold(0.0, f64::max)
        .max(1e-9)
        * 1.05;

    let root = SVGBackend::new(out, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(draw_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(15)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(0.0..x_max, 0.0..y_max)
        .map_err(draw_err)?;
    chart
        .configure_mesh()
        .x_desc("Time (s)")
        .y_desc(y_label)
        .draw()
        .map_err(draw_err)?;
    for (i, (protocol, points)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        chart
            .draw_series(LineSeries::new(
                points.iter().map(|&(t, v)| (t, v * y_scale)),
                color.stroke_width(2),
            ))
            .map_err(draw_err)?
            .label(protocol.as_str())
            .legend(move |(x, y)| {
                PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2))
            });
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(draw_err)?;
    root.present().map_err(draw_err)?;
    Ok(())
}

/// Mean first death time per protocol. Runs with no death count at the
/// horizon; the bar label says how many seeds survived.
fn first_death_chart(rows: &[Row], out: &Path) -> Result<()> {
    let mut per: BTreeMap<&str, (f64, usize, usize)> = BTreeMap::new();
    for r in rows {
        let slot = per.entry(r.protocol.as_str()).or_default();
        if r.value.is_finite() {
            slot.0 += r.value;
        } else {
            slot.0 += r.time_s;
            slot.2 += 1;
        }
        slot.1 += 1;
    }
    let bars: Vec<(&str, f64, usize, usize)> = per
        .into_iter()
        .map(|(p, (sum, n, survived))| (p, sum / n as f64, n, survived))
        .collect();
    let y_max = bars.iter().map(|b| b.1).fold(0.0, f64::max).max(1e-9) * 1.15;
    let n = bars.len();

    let root = SVGBackend::new(out, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(draw_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("Time until the first node dies", ("sans-serif", 22))
        .margin(15)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(0.0..n as f64, 0.0..y_max)
        .map_err(draw_err)?;
    let names: Vec<String> = bars.iter().map(|b| b.0.to_string()).collect();
    chart
        .configure_mesh()
        .disable_x_mesh()
        .x_labels(n * 2 + 1)
        .x_label_formatter(&|x| {
            let i = x.floor() as usize;
            if (x - i as f64 - 0.5).abs() < 1e-6 {
                names.get(i).cloned().unwrap_or_default()
            } else {
                String::new()
            }
        })
        .y_desc("First death (s, mean over seeds)")
        .draw()
        .map_err(draw_err)?;
    for (i, (_, mean, runs, survived)) in bars.iter().enumerate() {
        let x0 = i as f64 + 0.2;
        let x1 = i as f64 + 0.8;
        let color = PALETTE[i % PALETTE.len()];
        chart
            .draw_series(std::iter::once(Rectangle::new(
                [(x0, 0.0), (x1, *mean)],
                color.filled(),
            )))
            .map_err(draw_err)?;
        let label = if *survived > 0 {
            format!("{mean:.1} s ({survived}/{runs} no death)")
        } else {
            format!("{mean:.1} s")
        };
        chart
            .draw_series(std::iter::once(Text::new(
                label,
                (x0, *mean + y_max * 0.02),
                ("sans-serif", 14),
            )))
            .map_err(draw_err)?;
    }
    root.present().map_err(draw_err)?;
    Ok(())
}

/// Reads the three battery CSVs in `input` and writes one SVG per CSV into
/// `output`. Every input is read and checked before anything is drawn.
pub fn render(input: &Path, output: &Path) -> Result<Vec<PathBuf>> {
    let first = read_rows(&input.join(FIRST_DEATH_CSV))?;
    let delivery = read_rows(&input.join(DELIVERY_RATIO_CSV))?;
    let residual = read_rows(&input.join(RESIDUAL_ENERGY_CSV))?;
    std::fs::create_dir_all(output)?;

    let files = vec![
        output.join("first_death.svg"),
        output.join("delivery_ratio.svg"),
        output.join("residual_energy.svg"),
    ];
    first_death_chart(&first, &files[0])?;
    line_chart(
        &delivery,
        &files[1],
        "Delivery ratio vs time",
        "Delivery ratio (%)",
        100.0,
    )?;
    line_chart(
        &residual,
        &files[2],
        "Residual energy vs time",
        "Residual energy (J)",
        1.0,
    )?;
    Ok(files)
}
