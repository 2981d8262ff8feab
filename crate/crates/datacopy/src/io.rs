//! CSV point-set files: one point per line, comma-separated reals, with an
//! optional header row.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use datacopy_core::{PointSet, Role};

use crate::error::{CliError, Result};

fn is_number(token: &str) -> bool {
    token.trim().parse::<f64>().is_ok()
}

/// Parses CSV text. The first non-blank line is a header, and skipped, when
/// any of its fields is not a number. Blank lines are ignored; line numbers
/// in errors count every physical line from 1.
pub fn parse_point_set(text: &str, role: Role) -> Result<PointSet> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
        .peekable();

    if let Some((_, first)) = lines.peek() {
        if first.split(',').any(|t| !is_number(t)) {
            lines.next();
        }
    }

    let mut data = Vec::new();
    let mut dim = None;
    for (line, content) in lines {
        let mut found = 0;
        for (col, token) in content.split(',').enumerate() {
            let value = token.trim().parse::<f64>().map_err(|_| CliError::Parse {
                line,
                column: col + 1,
                token: token.to_string(),
            })?;
            data.push(value);
            found += 1;
        }
        let expected = *dim.get_or_insert(found);
        if found != expected {
            return Err(CliError::Ragged {
                line,
                expected,
                found,
            });
        }
    }
    let dim = dim.ok_or(CliError::NoRows)?;
    Ok(PointSet::new(data, dim, role)?)
}

pub fn load_point_set(path: impl AsRef<Path>, role: Role) -> Result<PointSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_point_set(&text, role)
}

/// Headerless CSV using the shortest decimal form that parses back to the
/// same `f64`.
pub fn format_point_set(points: &PointSet) -> String {
    let mut out = String::with_capacity(points.as_slice().len() * 20);
    for row in points.rows() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write_real(&mut out, *v);
        }
        out.push('\n');
    }
    out
}

/// Shortest round-trip digits; exponent form only for very small or very
/// large magnitudes.
pub(crate) fn write_real(out: &mut String, v: f64) {
    let a = v.abs();
    let res = if a != 0.0 && !(1e-5..1e16).contains(&a) {
        write!(out, "{v:e}")
    } else {
        write!(out, "{v}")
    };
    res.expect("writing to a String");
}

pub fn save_point_set(points: &PointSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_point_set(points)).map_err(|e| CliError::io(path, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_and_header() {
        let p = parse_point_set("0,0\n1,2\n", Role::Train).unwrap();
        assert_eq!((p.len(), p.dim()), (2, 2));
        assert_eq!(p.row(1), &[1.0, 2.0]);

        let p = parse_point_set("x,y\n0,0\n", Role::Train).unwrap();
        assert_eq!((p.len(), p.dim()), (1, 2));
    }

    #[test]
    fn ragged_names_the_line() {
        let err = parse_point_set("0,0\n1\n", Role::Train).unwrap_err();
        assert!(matches!(
            err,
            CliError::Ragged {
                line: 2,
                expected: 2,
                found: 1
            }
        ));
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn bad_cell_names_line_and_column() {
        let err = parse_point_set("a,b\n1,2\n3,oops\n", Role::Train).unwrap_err();
        assert!(matches!(
            err,
            CliError::Parse {
                line: 3,
                column: 2,
                ..
            }
        ));
    }

    #[test]
    fn crlf_blank_lines_and_spaces() {
        let p = parse_point_set("1, 2\r\n\r\n3 ,4\r\n", Role::Test).unwrap();
        assert_eq!(p.as_slice(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(p.role(), Role::Test);
    }

    #[test]
    fn empty_or_header_only_is_an_error() {
        assert!(matches!(
            parse_point_set("", Role::Train),
            Err(CliError::NoRows)
        ));
        assert!(matches!(
            parse_point_set("x,y\n", Role::Train),
            Err(CliError::NoRows)
        ));
    }

    #[test]
    fn format_contract() {
        let p = PointSet::from_values(&[0.1], Role::Train).unwrap();
        assert_eq!(format_point_set(&p), "0.1\n");
        let p = PointSet::from_rows(&[[1.0, -2.5], [3.0, 1e-300]], Role::Train).unwrap();
        assert_eq!(format_point_set(&p), "1,-2.5\n3,1e-300\n");
    }
}
