//! Rendering of report documents to JSON and CSV text.

use zetaglue::glue::ReportRow;

use crate::run::Document;

pub const CSV_HEADER: [&str; 7] = ["identity", "r", "lhs", "rhs", "residual", "tolerance", "pass"];

pub fn render_json(doc: &Document) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("report serializes");
    text.push('\n');
    text
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn lines(row: &ReportRow) -> Vec<[String; 7]> {
    let mut out = Vec::new();
    for s in &row.samples {
        out.push([
            row.identity.clone(),
            num(s.r),
            num(s.value),
            num(row.rhs),
            num(s.residual),
            num(row.tolerance),
            String::new(),
        ]);
    }
    let r = match (row.r, row.extrapolation.is_some()) {
        (_, true) => "inf".to_string(),
        (Some(r), false) => num(r),
        (None, false) => String::new(),
    };
    out.push([
        row.identity.clone(),
        r,
        num(row.lhs),
        num(row.rhs),
        num(row.residual),
        num(row.tolerance),
        row.pass.to_string(),
    ]);
    out
}

/// One line per fixed-`r` row; limit rows expand to their samples, with an
/// empty pass column, followed by the extrapolated value at `r = inf`.
pub fn render_csv(rows: &[ReportRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for row in rows {
        for line in lines(row) {
            w.write_record(&line).expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 records")
}

#[cfg(test)]
mod tests {
    use super::*;
    use zetaglue::glue::{adiabatic_limit, check_gluing, GeometryConfig, Identity, Tolerances, DEFAULT_R_GRID};
    use zetaglue::spectra::CrossSection;

    #[test]
    fn fixed_rows_have_one_line() {
        let rep = check_gluing(&GeometryConfig::new(CrossSection::Point, 1.0, 1.0), &Tolerances::default()).unwrap();
        let text = render_csv(&rep.rows);
        let mut it = text.lines();
        assert_eq!(it.next(), Some("identity,r,lhs,rhs,residual,tolerance,pass"));
        let first: Vec<&str> = it.next().unwrap().split(',').collect();
        assert_eq!(first[0], "gluing");
        assert_eq!(first[1], "");
        assert_eq!(first[6], "true");
        assert_eq!(text.lines().count(), 1 + rep.rows.len());
    }

    #[test]
    fn limit_rows_expand_to_samples() {
        let cfg = GeometryConfig::new(CrossSection::Point, 1.0, 1.0);
        let rep = adiabatic_limit(&cfg, &DEFAULT_R_GRID, Identity::CollarDtn, &Tolerances::default()).unwrap();
        let text = render_csv(&rep.rows);
        let rs: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
        assert_eq!(rs, ["1.0", "2.0", "4.0", "8.0", "inf"]);
    }
}
