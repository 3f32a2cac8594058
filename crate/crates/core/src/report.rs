//! Machine-readable run reports and plot emission.
//!
//! Reports are plain serde structs serialized with stable field order, so a
//! fixed seed yields byte-identical files across runs and thread counts.
//! Plots are hand-assembled SVG strings with no rendering dependency.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fwer::RejectionSet;
use crate::sim::BenchmarkReport;

/// Report written by a calibration run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub version: String,
    /// Echo of the effective configuration, keyed by flag name.
    pub config: BTreeMap<String, String>,
    pub n_examples: usize,
    pub n_grid: usize,
    /// Empirical risk per grid point, one row per controlled risk.
    pub empirical_risk: Vec<Vec<f64>>,
    /// Combined per-grid-point p-values, when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pvalues: Option<Vec<f64>>,
    pub rejection: RejectionSet,
    /// Flat index and parameter vector of the deployed point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selected: Option<SelectedPoint>,
    pub abstained: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedPoint {
    pub index: usize,
    pub value: Vec<f64>,
}

impl CalibrationReport {
    pub fn to_json(&self) -> String {
        let mut text =
            serde_json::to_string_pretty(self).expect("report serialization cannot fail");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("report json: {e}")))
    }
}

pub fn benchmark_report_to_json(report: &BenchmarkReport) -> String {
    let mut text =
        serde_json::to_string_pretty(report).expect("report serialization cannot fail");
    text.push('\n');
    text
}

const PLOT_WIDTH: f64 = 640.0;
const PLOT_HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 20.0;
const MARGIN_BOTTOM: f64 = 50.0;
const METHOD_COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Self-contained SVG: the true risk curve over the grid, dashed target
/// levels, and one marker per (method, alpha) endpoint.
pub fn render_benchmark_svg(report: &BenchmarkReport, risks: &[f64]) -> String {
    let inner_w = PLOT_WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let inner_h = PLOT_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let y_max = risks
        .iter()
        .chain(report.alphas.iter())
        .fold(0.0f64, |a, &b| a.max(b))
        * 1.2;
    let x_px = |lambda: f64| MARGIN_LEFT + lambda * inner_w;
    let y_px = |risk: f64| MARGIN_TOP + (1.0 - risk / y_max) * inner_h;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{PLOT_WIDTH}\" height=\"{PLOT_HEIGHT}\" viewBox=\"0 0 {PLOT_WIDTH} {PLOT_HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        MARGIN_LEFT,
        MARGIN_TOP,
        MARGIN_LEFT,
        MARGIN_TOP + inner_h
    ));
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        MARGIN_LEFT,
        MARGIN_TOP + inner_h,
        MARGIN_LEFT + inner_w,
        MARGIN_TOP + inner_h
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">lambda</text>\n",
        MARGIN_LEFT + inner_w / 2.0,
        PLOT_HEIGHT - 10.0
    ));
    svg.push_str(&format!(
        "<text x=\"15\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 15 {})\">risk</text>\n",
        MARGIN_TOP + inner_h / 2.0,
        MARGIN_TOP + inner_h / 2.0
    ));
    // Risk curve.
    if risks.len() > 1 {
        let mut points = String::new();
        for (j, &r) in risks.iter().enumerate() {
            let lambda = j as f64 / (risks.len() - 1) as f64;
            points.push_str(&format!("{:.2},{:.2} ", x_px(lambda), y_px(r)));
        }
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n",
            points.trim_end()
        ));
    }
    // Target levels.
    for &alpha in &report.alphas {
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{:.2}\" x2=\"{}\" y2=\"{:.2}\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n",
            MARGIN_LEFT,
            y_px(alpha),
            MARGIN_LEFT + inner_w,
            y_px(alpha)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{:.2}\" font-size=\"10\" fill=\"gray\">alpha={alpha}</text>\n",
            MARGIN_LEFT + inner_w - 70.0,
            y_px(alpha) - 3.0
        ));
    }
    // Endpoints.
    for (m_idx, method) in report.methods.iter().enumerate() {
        let color = METHOD_COLORS[m_idx % METHOD_COLORS.len()];
        for (a_idx, &alpha) in report.alphas.iter().enumerate() {
            if let Some(endpoint) = report.endpoints[m_idx][a_idx] {
                svg.push_str(&format!(
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{}\"/>\n",
                    x_px(endpoint),
                    y_px(alpha),
                    color
                ));
            }
        }
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"{}\">{}</text>\n",
            MARGIN_LEFT + 8.0,
            MARGIN_TOP + 14.0 * (m_idx as f64 + 1.0),
            color,
            method
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
