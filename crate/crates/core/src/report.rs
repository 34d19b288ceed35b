//! Serialization of sweep results: threshold tables as CSV/JSON, slice grids
//! as CSV, and correctable-region slices as SVG. All numeric fields are
//! formatted with fixed precision so reruns are byte-identical.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::sweep::{SliceResult, ThresholdRecord};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot serialize: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot write csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("cannot encode csv: {0}")]
    CsvUtf8(#[from] std::string::FromUtf8Error),
}

fn num(value: f64) -> String {
    format!("{value:.6}")
}

/// Threshold table CSV. A missing threshold (scheme uncorrectable even
/// without loss) is written as "none".
pub fn thresholds_to_csv(records: &[ThresholdRecord]) -> Result<String, ReportError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record([
        "scheme",
        "ancilla",
        "p_succ",
        "network",
        "encoding",
        "axis",
        "threshold_value",
        "units",
        "layer_count",
        "beamsplitter_count",
    ])?;
    for r in records {
        writer.write_record([
            r.scheme.as_str(),
            r.ancilla.as_str(),
            &num(r.p_succ),
            r.network.name(),
            r.encoding.name(),
            r.axis.name(),
            &r.threshold.map_or_else(|| "none".to_string(), num),
            r.axis.units(),
            &r.layer_count.to_string(),
            &r.beamsplitter_count.to_string(),
        ])?;
    }
    Ok(String::from_utf8(writer.into_inner().expect("vec sink"))?)
}

#[derive(Serialize)]
struct ThresholdJsonRow<'a> {
    scheme: &'a str,
    ancilla: &'a str,
    p_succ: f64,
    network: &'a str,
    encoding: &'a str,
    axis: &'a str,
    threshold_value: Option<f64>,
    units: &'a str,
    layer_count: usize,
    beamsplitter_count: usize,
}

pub fn thresholds_to_json(records: &[ThresholdRecord]) -> Result<String, ReportError> {
    let rows: Vec<ThresholdJsonRow> = records
        .iter()
        .map(|r| ThresholdJsonRow {
            scheme: &r.scheme,
            ancilla: &r.ancilla,
            p_succ: r.p_succ,
            network: r.network.name(),
            encoding: r.encoding.name(),
            axis: r.axis.name(),
            threshold_value: r.threshold,
            units: r.axis.units(),
            layer_count: r.layer_count,
            beamsplitter_count: r.beamsplitter_count,
        })
        .collect();
    Ok(serde_json::to_string_pretty(&rows)? + "\n")
}

/// Long-format CSV for one slice: one row per grid point per (network,
/// encoding) assessment.
pub fn slice_to_csv(slice: &SliceResult) -> Result<String, ReportError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record([
        "scheme",
        "x_axis",
        "y_axis",
        "x_value",
        "y_value",
        "p_loss",
        "network",
        "encoding",
        "effective_erasure",
        "correctable",
    ])?;
    let grid = &slice.grid;
    let nx = grid.x_values.len();
    for a in &slice.assessments {
        for (iy, &y) in grid.y_values.iter().enumerate() {
            for (ix, &x) in grid.x_values.iter().enumerate() {
                let idx = iy * nx + ix;
                writer.write_record([
                    grid.scheme.as_str(),
                    grid.x_axis.name(),
                    grid.y_axis.name(),
                    &num(x),
                    &num(y),
                    &num(grid.p_loss[idx]),
                    a.network.name(),
                    a.encoding.name(),
                    &num(a.effective_erasure[idx]),
                    if a.correctable[idx] { "true" } else { "false" },
                ])?;
            }
        }
    }
    Ok(String::from_utf8(writer.into_inner().expect("vec sink"))?)
}

const SVG_CELL: f64 = 12.0;
const SVG_MARGIN_LEFT: f64 = 70.0;
const SVG_MARGIN_BOTTOM: f64 = 50.0;
const SVG_MARGIN_TOP: f64 = 30.0;
const SVG_MARGIN_RIGHT: f64 = 20.0;

/// Renders the correctable region of one slice/(network, encoding) pair as an
/// SVG heat map: green cells are loss points where the network stays
/// error-correctable, shaded cells are not.
pub fn slice_to_svg(slice: &SliceResult, assessment_index: usize) -> String {
    let grid = &slice.grid;
    let a = &slice.assessments[assessment_index];
    let nx = grid.x_values.len();
    let ny = grid.y_values.len();
    let plot_w = SVG_CELL * nx as f64;
    let plot_h = SVG_CELL * ny as f64;
    let width = SVG_MARGIN_LEFT + plot_w + SVG_MARGIN_RIGHT;
    let height = SVG_MARGIN_TOP + plot_h + SVG_MARGIN_BOTTOM;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\">"
    );
    let _ = writeln!(
        svg,
        "  <title>{} / {} / {}: correctable region</title>",
        grid.scheme,
        a.network.name(),
        a.encoding.name()
    );
    let _ = writeln!(
        svg,
        "  <text x=\"{:.1}\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\">{} (p_succ {}), {} / {}</text>",
        SVG_MARGIN_LEFT + plot_w / 2.0,
        grid.scheme,
        num(grid.p_succ),
        a.network.name(),
        a.encoding.name()
    );
    // grid cells, y rendered upward
    for iy in 0..ny {
        for ix in 0..nx {
            let idx = iy * nx + ix;
            let x = SVG_MARGIN_LEFT + SVG_CELL * ix as f64;
            let y = SVG_MARGIN_TOP + plot_h - SVG_CELL * (iy + 1) as f64;
            let fill = if a.correctable[idx] {
                "#2e9e4f"
            } else {
                "#d8d8d8"
            };
            let _ = writeln!(
                svg,
                "  <rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{SVG_CELL:.1}\" \
                 height=\"{SVG_CELL:.1}\" fill=\"{fill}\"><title>{}={}, {}={}, \
                 p_loss={}, p_er={}</title></rect>",
                grid.x_axis.name(),
                num(grid.x_values[ix]),
                grid.y_axis.name(),
                num(grid.y_values[iy]),
                num(grid.p_loss[idx]),
                num(a.effective_erasure[idx]),
            );
        }
    }
    // axis labels and end-point ticks
    let _ = writeln!(
        svg,
        "  <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"middle\">{} [{}]</text>",
        SVG_MARGIN_LEFT + plot_w / 2.0,
        SVG_MARGIN_TOP + plot_h + 38.0,
        grid.x_axis.name(),
        grid.x_axis.units(),
    );
    let _ = writeln!(
        svg,
        "  <text x=\"14\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"middle\" transform=\"rotate(-90 14 {:.1})\">{} [{}]</text>",
        SVG_MARGIN_TOP + plot_h / 2.0,
        SVG_MARGIN_TOP + plot_h / 2.0,
        grid.y_axis.name(),
        grid.y_axis.units(),
    );
    for (value, x, anchor) in [
        (grid.x_values[0], SVG_MARGIN_LEFT, "start"),
        (grid.x_values[nx - 1], SVG_MARGIN_LEFT + plot_w, "end"),
    ] {
        let _ = writeln!(
            svg,
            "  <text x=\"{x:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"10\" \
             text-anchor=\"{anchor}\">{}</text>",
            SVG_MARGIN_TOP + plot_h + 16.0,
            num(value),
        );
    }
    for (value, y) in [
        (grid.y_values[0], SVG_MARGIN_TOP + plot_h),
        (grid.y_values[ny - 1], SVG_MARGIN_TOP + 8.0),
    ] {
        let _ = writeln!(
            svg,
            "  <text x=\"{:.1}\" y=\"{y:.1}\" font-family=\"sans-serif\" font-size=\"10\" \
             text-anchor=\"end\">{}</text>",
            SVG_MARGIN_LEFT - 4.0,
            num(value),
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{AxisRange, SweepConfig};
    use crate::sweep::{sweep_slices, threshold_records};

    fn tiny_config() -> SweepConfig {
        let mut config = SweepConfig::default();
        config.schemes = vec!["boosted-phi+".to_string()];
        config.networks = vec![crate::fbqc::FusionNetwork::SixRing];
        config.encodings = vec![crate::fbqc::EncodingMode::Shor22];
        config.bisection_tolerance = 1e-3;
        let tiny = AxisRange {
            min: 0.0,
            max: 0.1,
            points: 3,
        };
        config.axes.bs_loss_db = tiny;
        config.axes.prop_loss_db_per_cm = AxisRange { max: 1.0, ..tiny };
        config.axes.p_eff = AxisRange {
            min: 0.9,
            max: 1.0,
            points: 3,
        };
        config
    }

    #[test]
    fn threshold_csv_layout() {
        let records = threshold_records(&tiny_config()).unwrap();
        let csv = thresholds_to_csv(&records).unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "scheme,ancilla,p_succ,network,encoding,axis,threshold_value,units,\
             layer_count,beamsplitter_count"
        );
        assert_eq!(csv.lines().count(), 1 + records.len());
        let p_eff_row = csv
            .lines()
            .find(|l| l.contains(",p_eff,"))
            .expect("p_eff row");
        assert!(p_eff_row.starts_with("boosted-phi+,|Phi+>,0.750000,six_ring,shor_2_2,"));
        assert!(p_eff_row.contains(",probability,"));
        assert!(p_eff_row.ends_with(",5,10"));
    }

    #[test]
    fn threshold_csv_marks_missing_values() {
        let mut config = tiny_config();
        config.schemes = vec!["regular".to_string()];
        config.encodings = vec![crate::fbqc::EncodingMode::Bare];
        let records = threshold_records(&config).unwrap();
        let csv = thresholds_to_csv(&records).unwrap();
        for line in csv.lines().skip(1) {
            assert!(line.contains(",none,"), "{line}");
        }
    }

    #[test]
    fn threshold_json_parses_back() {
        let records = threshold_records(&tiny_config()).unwrap();
        let json = thresholds_to_json(&records).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        let rows = parsed.as_array().unwrap();
        assert_eq!(rows.len(), records.len());
        assert_eq!(rows[0]["scheme"], "boosted-phi+");
        assert!(rows[0]["threshold_value"].is_number() || rows[0]["threshold_value"].is_null());
    }

    #[test]
    fn slice_csv_and_svg_render() {
        let slices = sweep_slices(&tiny_config()).unwrap();
        for slice in &slices {
            let csv = slice_to_csv(slice).unwrap();
            let cells = slice.grid.x_values.len() * slice.grid.y_values.len();
            assert_eq!(csv.lines().count(), 1 + cells * slice.assessments.len());
            let svg = slice_to_svg(slice, 0);
            assert!(svg.starts_with("<svg "));
            assert!(svg.ends_with("</svg>\n"));
            assert_eq!(svg.matches("<rect ").count(), cells);
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let config = tiny_config();
        let a = threshold_records(&config).unwrap();
        let b = threshold_records(&config).unwrap();
        assert_eq!(
            thresholds_to_csv(&a).unwrap(),
            thresholds_to_csv(&b).unwrap()
        );
        let sa = sweep_slices(&config).unwrap();
        let sb = sweep_slices(&config).unwrap();
        assert_eq!(slice_to_csv(&sa[0]).unwrap(), slice_to_csv(&sb[0]).unwrap());
        assert_eq!(slice_to_svg(&sa[0], 0), slice_to_svg(&sb[0], 0));
    }
}
