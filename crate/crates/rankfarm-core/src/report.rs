//! Rendering of ranking reports into human- and machine-readable outputs,
//! including per-service radar (kiviat) chart data.
//!
//! No plotting happens here: the radar export emits the axis data any
//! external plotter can consume. Rendering is deterministic; identical
//! reports yield byte-identical output.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ahp::RankingReport;
use crate::error::Error;
use crate::requirements::{Direction, RequestedValue};
use crate::Result;

/// Radar-chart data for one service: one axis per top-level attribute, in
/// hierarchy order, carrying that service's aggregated ranking values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KiviatData {
    #[serde(rename = "service")]
    pub service_id: String,
    pub axes: Vec<KiviatAxis>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KiviatAxis {
    pub attribute: String,
    pub value: f64,
}

/// One radar record per service; axis order is identical across services.
pub fn kiviat_export(report: &RankingReport) -> Vec<KiviatData> {
    report
        .service_order
        .iter()
        .enumerate()
        .map(|(i, service_id)| KiviatData {
            service_id: service_id.clone(),
            axes: report
                .top_level
                .iter()
                .map(|v| KiviatAxis {
                    attribute: v.name.clone(),
                    value: v.values[i],
                })
                .collect(),
        })
        .collect()
}

/// Output encodings of a ranking report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::UnsupportedFormat(other.to_string())),
        }
    }
}

/// Report sections selectable on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportSection {
    Sub,
    Top,
    Groups,
    Final,
    All,
}

impl ReportSection {
    fn wants_sub(self) -> bool {
        matches!(self, ReportSection::Sub | ReportSection::All)
    }
    fn wants_top(self) -> bool {
        matches!(self, ReportSection::Top | ReportSection::All)
    }
    fn wants_groups(self) -> bool {
        matches!(self, ReportSection::Groups | ReportSection::All)
    }
    fn wants_final(self) -> bool {
        matches!(self, ReportSection::Final | ReportSection::All)
    }
}

impl FromStr for ReportSection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sub" => Ok(ReportSection::Sub),
            "top" => Ok(ReportSection::Top),
            "groups" => Ok(ReportSection::Groups),
            "final" => Ok(ReportSection::Final),
            "all" => Ok(ReportSection::All),
            other => Err(Error::UnsupportedFormat(format!("section {other}"))),
        }
    }
}

/// Renders the report. JSON always carries the full report (a stable schema
/// mirroring [`RankingReport`]); text and csv honor the section selection.
pub fn render_report(
    report: &RankingReport,
    format: ReportFormat,
    section: ReportSection,
) -> Result<Vec<u8>> {
    let out = match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report)
                .map_err(|e| Error::Schema(format!("report serialization: {e}")))?;
            s.push('\n');
            s
        }
        ReportFormat::Text => render_text(report, section),
        ReportFormat::Csv => render_csv(report, section),
    };
    Ok(out.into_bytes())
}

fn vector_table(
    title: &str,
    report: &RankingReport,
    vectors: &[crate::ahp::RankingVector],
    out: &mut String,
) {
    let _ = writeln!(out, "{title}");
    let width = |s: &str| s.len().max(8);
    let mut header = format!("{:<10}", "service");
    for v in vectors {
        let _ = write!(header, "  {:>w$}", v.name, w = width(&v.name));
    }
    let _ = writeln!(out, "{header}");
    for (i, service) in report.service_order.iter().enumerate() {
        let _ = write!(out, "{service:<10}");
        for v in vectors {
            let _ = write!(out, "  {:>w$.4}", v.values[i], w = width(&v.name));
        }
        let _ = writeln!(out);
    }
    let _ = writeln!(out);
}

fn render_text(report: &RankingReport, section: ReportSection) -> String {
    let mut out = String::new();
    if section.wants_sub() {
        vector_table("Sub-Level Attribute Ranking", report, &report.sub_level, &mut out);
    }
    if section.wants_top() {
        vector_table("Top-Level Attribute Ranking", report, &report.top_level, &mut out);
    }
    if section.wants_groups() {
        vector_table("QoS Group Ranking", report, &report.groups, &mut out);
    }
    if section.wants_final() {
        let _ = writeln!(out, "Final Overall AHP Ranking");
        let _ = writeln!(out, "{:<6}{:<10}{:>8}  preference", "rank", "service", "value");
        for c in &report.choices {
            let _ = writeln!(out, "{:<6}{:<10}{:>8.4}  {}", c.rank, c.service_id, c.value, c.label);
        }
        let _ = writeln!(out);
    }
    if !report.requested_qos.is_empty() {
        let _ = writeln!(out, "Requested QoS Values");
        for (attribute, requested) in &report.requested_qos {
            let shown = match requested {
                RequestedValue::Target { value } => format!("{value}"),
                RequestedValue::Bound { bound, direction } => {
                    let sign = match direction {
                        Direction::Lt => "<",
                        Direction::Gt => ">",
                    };
                    format!("{sign} {bound}")
                }
            };
            let _ = writeln!(out, "{attribute:<16}{shown}");
        }
        let _ = writeln!(out);
    }
    if !report.warnings.is_empty() {
        let _ = writeln!(out, "Warnings");
        for w in &report.warnings {
            let _ = writeln!(out, "- {w}");
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_vector_table(
    report: &RankingReport,
    vectors: &[crate::ahp::RankingVector],
    out: &mut String,
) {
    let mut header = vec!["service".to_string()];
    header.extend(vectors.iter().map(|v| csv_field(&v.name)));
    let _ = writeln!(out, "{}", header.join(","));
    for (i, service) in report.service_order.iter().enumerate() {
        let mut row = vec![csv_field(service)];
        row.extend(vectors.iter().map(|v| format!("{}", v.values[i])));
        let _ = writeln!(out, "{}", row.join(","));
    }
}

fn render_csv(report: &RankingReport, section: ReportSection) -> String {
    let mut tables: Vec<String> = Vec::new();
    if section.wants_sub() {
        let mut t = String::new();
        csv_vector_table(report, &report.sub_level, &mut t);
        tables.push(t);
    }
    if section.wants_top() {
        let mut t = String::new();
        csv_vector_table(report, &report.top_level, &mut t);
        tables.push(t);
    }
    if section.wants_groups() {
        let mut t = String::new();
        csv_vector_table(report, &report.groups, &mut t);
        tables.push(t);
    }
    if section.wants_final() {
        let mut t = String::new();
        let _ = writeln!(t, "rank,service,value,label");
        for c in &report.choices {
            let _ = writeln!(
                t,
                "{},{},{},{}",
                c.rank,
                csv_field(&c.service_id),
                c.value,
                csv_field(&c.label)
            );
        }
        tables.push(t);
    }
    tables.join("\n")
}

/// Kiviat data rendered as json or csv. The csv form is wide: one row per
/// service, one column per axis.
pub fn render_kiviat(records: &[KiviatData], format: ReportFormat) -> Result<Vec<u8>> {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(records)
                .map_err(|e| Error::Schema(format!("kiviat serialization: {e}")))?;
            s.push('\n');
            Ok(s.into_bytes())
        }
        ReportFormat::Csv => {
            let mut out = String::new();
            let mut header = vec!["service".to_string()];
            if let Some(first) = records.first() {
                header.extend(first.axes.iter().map(|a| csv_field(&a.attribute)));
            }
            let _ = writeln!(out, "{}", header.join(","));
            for record in records {
                let mut row = vec![csv_field(&record.service_id)];
                row.extend(record.axes.iter().map(|a| format!("{}", a.value)));
                let _ = writeln!(out, "{}", row.join(","));
            }
            Ok(out.into_bytes())
        }
        ReportFormat::Text => Err(Error::UnsupportedFormat(
            "kiviat data supports json and csv only".into(),
        )),
    }
}
