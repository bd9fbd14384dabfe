//! SVG charts for sweep and variance CSVs.
//!
//! The chart type is inferred from the header. Sweep files give error
//! versus step size with one line and one shaded 95% band per estimator,
//! plus a dashed line at each estimator's lowest error. Variance files give
//! the empirical variance versus n with dashed black model bounds.
//! Output depends only on the input file.

use std::path::Path;

use plotters::prelude::*;

use crate::error::{ExperimentError, Result};
use crate::sweep::SWEEP_HEADER;
use crate::table::CsvTable;
use crate::variance_study::VARIANCE_HEADER;

const SIZE: (u32, u32) = (800, 560);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChartKind {
    Sweep,
    Variance,
}

struct Series {
    name: String,
    points: Vec<(f64, f64)>,
    band: Vec<(f64, f64, f64)>,
}

fn plot_err<E: std::fmt::Display>(e: E) -> ExperimentError {
    ExperimentError::Plot(e.to_string())
}

fn header_matches(table: &CsvTable, expected: &[&str]) -> bool {
    table.header.len() == expected.len() && table.header.iter().zip(expected).all(|(a, b)| a == b)
}

fn check_rows(table: &CsvTable) -> Result<()> {
    if table.rows.is_empty() {
        return Err(ExperimentError::Csv {
            line: 2,
            msg: "the file has a header but no data rows".into(),
        });
    }
    Ok(())
}

fn sweep_series(table: &CsvTable) -> Result<Vec<Series>> {
    let mut series: Vec<Series> = Vec::new();
    for (i, row) in table.rows.iter().enumerate() {
        let (alpha, mean, half) = (table.float(i, 1)?, table.float(i, 2)?, table.float(i, 3)?);
        if half < 0.0 {
            return Err(ExperimentError::Csv {
                line: i as u64 + 2,
                msg: format!("negative confidence half-width {half}"),
            });
        }
        let name = &row[0];
        let idx = match series.iter().position(|s| &s.name == name) {
            Some(idx) => idx,
            None => {
                series.push(Series {
                    name: name.clone(),
                    points: vec![],
                    band: vec![],
                });
                series.len() - 1
            }
        };
        series[idx].points.push((alpha, mean));
        series[idx].band.push((alpha, mean - half, mean + half));
    }
    Ok(series)
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn draw_sweep(table: &CsvTable, svg: &mut String) -> Result<()> {
    let series = sweep_series(table)?;
    let (x0, x1) = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    // divergent step sizes would flatten everything else, so cap the axis
    let floor = series
        .iter()
        .flat_map(|s| s.band.iter().map(|b| b.1))
        .fold(f64::INFINITY, f64::min);
    let initial = series
        .iter()
        .flat_map(|s| s.points.first().map(|p| p.1))
        .fold(0.0, f64::max);
    let top = series
        .iter()
        .flat_map(|s| s.band.iter().map(|b| b.2))
        .fold(f64::NEG_INFINITY, f64::max)
        .min(if initial > 0.0 { 1.5 * initial } else { f64::INFINITY });
    let (y0, y1) = bounds([floor.max(0.0), top].into_iter());

    let root = SVGBackend::with_string(svg, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("RMS value error vs step size", ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("step size α")
        .y_desc("mean RMS error")
        .draw()
        .map_err(plot_err)?;

    let clip = |y: f64| y.clamp(y0, y1);
    for (i, s) in series.iter().enumerate() {
        let color = Palette99::pick(i).to_rgba();
        let mut outline: Vec<(f64, f64)> = s.band.iter().map(|&(x, lo, _)| (x, clip(lo))).collect();
        outline.extend(s.band.iter().rev().map(|&(x, _, hi)| (x, clip(hi))));
        chart
            .draw_series(std::iter::once(Polygon::new(outline, color.mix(0.2).filled())))
            .map_err(plot_err)?;
        chart
            .draw_series(LineSeries::new(
                s.points.iter().map(|&(x, y)| (x, clip(y))),
                color.stroke_width(2),
            ))
            .map_err(plot_err)?
            .label(s.name.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
        let best = s.points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        chart
            .draw_series(DashedLineSeries::new(
                [(x0, clip(best)), (x1, clip(best))],
                6,
                4,
                color.stroke_width(1),
            ))
            .map_err(plot_err)?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .position(SeriesLabelPosition::UpperLeft)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)
}

fn draw_variance(table: &CsvTable, svg: &mut String) -> Result<()> {
    let mut empirical = Vec::new();
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for i in 0..table.rows.len() {
        let n = table.float(i, 0)?;
        empirical.push((n, table.float(i, 1)?, table.float(i, 2)?));
        lower.push((n, table.float(i, 3)?));
        upper.push((n, table.float(i, 4)?));
    }
    let (x0, x1) = bounds(empirical.iter().map(|p| p.0));
    let (y0, y1) = bounds(
        empirical
            .iter()
            .flat_map(|p| [p.1 - p.2, p.1 + p.2])
            .chain(lower.iter().map(|p| p.1))
            .chain(upper.iter().map(|p| p.1)),
    );

    let root = SVGBackend::with_string(svg, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("n-step return variance", ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(70)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("n")
        .y_desc("variance")
        .draw()
        .map_err(plot_err)?;

    let blue = BLUE.to_rgba();
    chart
        .draw_series(empirical.iter().map(|&(n, v, se)| {
            PathElement::new(
                vec![(n, v - 3.0 * se), (n, v + 3.0 * se)],
                blue.mix(0.5).stroke_width(1),
            )
        }))
        .map_err(plot_err)?;
    chart
        .draw_series(LineSeries::new(
            empirical.iter().map(|p| (p.0, p.1)),
            blue.stroke_width(2),
        ))
        .map_err(plot_err)?
        .label("empirical (±3 SE)")
        .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], blue.stroke_width(2)));
    for (name, line) in [("model ρ = 0", &lower), ("model ρ = 1", &upper)] {
        chart
            .draw_series(DashedLineSeries::new(line.iter().copied(), 6, 4, BLACK.stroke_width(1)))
            .map_err(plot_err)?
            .label(name)
            .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], BLACK.stroke_width(1)));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .position(SeriesLabelPosition::UpperLeft)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)
}

/// Renders a parsed CSV to an SVG string.
pub fn render_svg(table: &CsvTable) -> Result<(ChartKind, String)> {
    let kind = if header_matches(table, &SWEEP_HEADER) {
        ChartKind::Sweep
    } else if header_matches(table, &VARIANCE_HEADER) {
        ChartKind::Variance
    } else {
        return Err(ExperimentError::Csv {
            line: 1,
            msg: format!(
                "unrecognised header `{}`; expected `{}` or `{}`",
                table.header.join(","),
                SWEEP_HEADER.join(","),
                VARIANCE_HEADER.join(",")
            ),
        });
    };
    check_rows(table)?;
    let mut svg = String::new();
    match kind {
        ChartKind::Sweep => draw_sweep(table, &mut svg)?,
        ChartKind::Variance => draw_variance(table, &mut svg)?,
    }
    Ok((kind, svg))
}

/// Reads `csv`, renders it and writes the SVG to `out`. Nothing is written
/// when the input is invalid.
pub fn plot(csv: &Path, out: &Path) -> Result<ChartKind> {
    let table = CsvTable::read(csv)?;
    let (kind, svg) = render_svg(&table)?;
    std::fs::write(out, svg).map_err(|e| ExperimentError::io(out, e))?;
    Ok(kind)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_header_is_rejected() {
        let t = CsvTable::parse("x,y\n1,2\n").unwrap();
        assert!(matches!(render_svg(&t), Err(ExperimentError::Csv { line: 1, .. })));
    }
}
