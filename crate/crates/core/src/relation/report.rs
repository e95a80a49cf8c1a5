use std::fmt::Write as _;
use std::str::FromStr;

use super::{EvalReport, RelationCategory};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "table" => Ok(ReportFormat::Table),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(format!("unknown report format {:?} (expected table, csv or json)", s)),
        }
    }
}

/// Render reports side by side: one row per space in every table.
pub fn render_report(reports: &[EvalReport], format: ReportFormat) -> Result<Vec<u8>> {
    let text = match format {
        ReportFormat::Table => render_table(reports),
        ReportFormat::Csv => render_csv(reports),
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(reports)?;
            s.push('\n');
            s
        }
    };
    Ok(text.into_bytes())
}

fn cell(x: f64, undefined: bool) -> String {
    if undefined {
        format!("{:.2}*", x)
    } else {
        format!("{:.2}", x)
    }
}

fn render_table(reports: &[EvalReport]) -> String {
    let mut out = String::new();
    let mut flagged = false;

    out.push_str("| | RC | SSRIC | R-Prec | R-Rec |\n");
    out.push_str("|---|---|---|---|---|\n");
    for r in reports {
        flagged |= r.r_prec_undefined;
        let _ = writeln!(
            out,
            "| {} | {} | {:.2} | {} | {:.2} |",
            r.space_name,
            r.rc,
            r.ssric,
            cell(r.r_prec, r.r_prec_undefined),
            r.r_rec
        );
    }

    for cat in RelationCategory::ALL {
        let _ = write!(out, "\n| {} | N / Total | R-Prec | R-Rec |\n|---|---|---|---|\n", cat.label());
        for r in reports {
            let row = &r.per_category[cat.index()];
            flagged |= row.r_prec_undefined;
            let _ = writeln!(
                out,
                "| {} | {} / {} | {} | {:.2} |",
                r.space_name,
                row.n,
                row.total,
                cell(row.r_prec, row.r_prec_undefined),
                row.r_rec
            );
        }
    }

    if flagged {
        out.push_str("\n* nothing retrieved; R-Prec undefined and shown as 0\n");
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Shortest representation that round-trips, always with a decimal point.
fn csv_num(x: f64) -> String {
    format!("{:?}", x)
}

fn render_csv(reports: &[EvalReport]) -> String {
    let mut out = String::new();
    out.push_str("space,RC,SSRIC,R_Prec,R_Rec,TR,N,retrieved,oov_skipped,k\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            csv_field(&r.space_name),
            r.rc,
            csv_num(r.ssric),
            csv_num(r.r_prec),
            csv_num(r.r_rec),
            r.tr,
            r.n_relations,
            r.retrieved,
            r.oov_skipped,
            r.k
        );
    }
    for r in reports {
        let _ = write!(out, "\nspace,{}\ncategory,N,Total,R_Prec,R_Rec\n", csv_field(&r.space_name));
        for row in &r.per_category {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                row.category.name(),
                row.n,
                row.total,
                csv_num(row.r_prec),
                csv_num(row.r_rec)
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relation::CategoryRow;

    fn report(name: &str, rc: usize, ssric: f64, prec: f64, rec: f64) -> EvalReport {
        EvalReport {
            space_name: name.into(),
            provenance: "LSA [test]".into(),
            config: "k=10".into(),
            k: 10,
            seed: Some(1),
            sample_terms: vec!["pears".into()],
            n_relations: 1000,
            oov_skipped: 0,
            rc,
            tr: 450,
            retrieved: 567,
            ssric,
            r_prec: prec,
            r_rec: rec,
            r_prec_undefined: false,
            per_category: RelationCategory::ALL
                .into_iter()
                .map(|c| CategoryRow {
                    category: c,
                    n: if c == RelationCategory::CauseEffect { 10 } else { 0 },
                    total: rc,
                    relations: 90,
                    retrieved: 41,
                    r_prec: 0.24,
                    r_rec: 0.11,
                    r_prec_undefined: false,
                })
                .collect(),
        }
    }

    #[test]
    fn table_layout() {
        let out = render_report(&[report("LSA", 210, 0.45, 0.37, 0.21)], ReportFormat::Table).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "| | RC | SSRIC | R-Prec | R-Rec |");
        assert_eq!(lines[2], "| LSA | 210 | 0.45 | 0.37 | 0.21 |");
        assert!(text.contains("| Cause-Effect | N / Total | R-Prec | R-Rec |\n|---|---|---|---|\n| LSA | 10 / 210 | 0.24 | 0.11 |"));
        assert_eq!(text.matches("| N / Total |").count(), 10);
        assert!(!text.contains('*'));
    }

    #[test]
    fn undefined_precision_is_flagged() {
        let mut r = report("LSA", 0, 0.0, 0.0, 0.0);
        r.r_prec_undefined = true;
        let text = String::from_utf8(render_report(&[r], ReportFormat::Table).unwrap()).unwrap();
        assert!(text.contains("| LSA | 0 | 0.00 | 0.00* | 0.00 |"));
        assert!(text.ends_with("R-Prec undefined and shown as 0\n"));
    }

    #[test]
    fn json_round_trip() {
        let reports = vec![report("LSA", 210, 0.45, 0.37, 1.0 / 3.0)];
        let bytes = render_report(&reports, ReportFormat::Json).unwrap();
        let back: Vec<EvalReport> = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(back, reports);
    }

    #[test]
    fn csv_quoting_and_numbers() {
        let text = String::from_utf8(
            render_report(&[report("Word2Vec, \"raw\"", 1, 1.0, 0.5, 0.25)], ReportFormat::Csv).unwrap(),
        )
        .unwrap();
        assert!(text.contains("\"Word2Vec, \"\"raw\"\"\",1,1.0,0.5,0.25,450,1000,567,0,10\n"));
        assert!(text.contains("CauseEffect,10,1,0.24,0.11\n"));
    }
}
