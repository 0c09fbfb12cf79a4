//! Contour CSV: header `x,y`, then one point per line in curve order.

use thiserror::Error;
use tongue_contour_core::{Contour, ContourError, PixelPoint};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct CsvError {
    /// 1-based.
    pub line: usize,
    pub kind: CsvErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CsvErrorKind {
    #[error("expected header \"x,y\"")]
    Header,
    #[error("expected two non-negative integers, got {0:?}")]
    Field(String),
    #[error("fewer than 2 points")]
    TooFewPoints,
    #[error("duplicate consecutive point")]
    DuplicatePoint,
    #[error("first and last points coincide")]
    Closed,
}

fn parse_point(line: &str) -> Option<PixelPoint> {
    let (x, y) = line.split_once(',')?;
    Some(PixelPoint::new(x.trim().parse().ok()?, y.trim().parse().ok()?))
}

pub fn read_contour_csv(text: &str) -> Result<Contour, CsvError> {
    let mut lines = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l));
    if lines.next().map(str::trim) != Some("x,y") {
        return Err(CsvError {
            line: 1,
            kind: CsvErrorKind::Header,
        });
    }
    let mut points: Vec<PixelPoint> = Vec::new();
    let mut last_line = 1;
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        if line.is_empty() {
            // a trailing newline yields one empty final line
            continue;
        }
        let err = |kind| CsvError { line: line_no, kind };
        let p = parse_point(line).ok_or_else(|| err(CsvErrorKind::Field(line.to_owned())))?;
        if points.last() == Some(&p) {
            return Err(err(CsvErrorKind::DuplicatePoint));
        }
        points.push(p);
        last_line = line_no;
    }
    Contour::new(points).map_err(|e| CsvError {
        line: last_line,
        kind: match e {
            ContourError::TooFewPoints(_) => CsvErrorKind::TooFewPoints,
            ContourError::ConsecutiveDuplicate { .. } => CsvErrorKind::DuplicatePoint,
            ContourError::Closed => CsvErrorKind::Closed,
        },
    })
}

pub fn write_contour_csv(contour: &Contour) -> String {
    let mut out = String::from("x,y\n");
    for p in contour.points() {
        out.push_str(&format!("{},{}\n", p.x, p.y));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(c: &Contour) -> Vec<(u32, u32)> {
        c.points().iter().map(|p| (p.x, p.y)).collect()
    }

    #[test]
    fn direct_parse() {
        let c = read_contour_csv("x,y\n0,0\n1,0\n2,1").unwrap();
        assert_eq!(pts(&c), vec![(0, 0), (1, 0), (2, 1)]);
        assert_eq!(write_contour_csv(&c), "x,y\n0,0\n1,0\n2,1\n");
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(read_contour_csv("x,y\n5,5").unwrap_err().kind, CsvErrorKind::TooFewPoints);
        assert_eq!(
            read_contour_csv("x,y\n0,0\n0,0\n1,0").unwrap_err(),
            CsvError {
                line: 3,
                kind: CsvErrorKind::DuplicatePoint
            }
        );
        let err = read_contour_csv("x,y\n0,0\n1,a\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(matches!(err.kind, CsvErrorKind::Field(_)));
        assert_eq!(read_contour_csv("y,x\n0,0\n1,1").unwrap_err().line, 1);
        assert_eq!(read_contour_csv("x,y\n-1,0\n1,1").unwrap_err().line, 2);
        assert_eq!(read_contour_csv("x,y\n0,0\n1,0\n0,0\n").unwrap_err().kind, CsvErrorKind::Closed);
    }
}
