//! Matrix Market (coordinate, real) reader and writer.
//!
//! Symmetric and skew-symmetric files are expanded to full storage on read.
//! Duplicate entries are summed. Pattern, complex, hermitian and dense
//! `array` files are rejected.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    General,
    Symmetric,
    SkewSymmetric,
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
    let text = String::from_utf8(bytes)
        .map_err(|_| Error::UnsupportedFormat(format!("{} is not a text file", path.display())))?;
    parse_matrix_market(BufReader::new(text.as_bytes()))
}

/// Parses Matrix Market text from any buffered reader.
pub fn parse_matrix_market(reader: impl BufRead) -> Result<SparseMatrix> {
    let mut lines = reader.lines().enumerate();
    let io_err = |line: usize, e: std::io::Error| Error::Parse {
        line,
        msg: e.to_string(),
    };

    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty file".into(),
    })?;
    let header = header.map_err(|e| io_err(1, e))?;
    let layout = parse_header(&header)?;

    let mut size: Option<(usize, usize)> = None;
    let mut triplets = Vec::new();
    let mut stored = 0usize;
    for (lineno, line) in lines {
        let lineno = lineno + 1;
        let line = line.map_err(|e| io_err(lineno, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match size {
            None => {
                if fields.len() != 3 {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: "size line must have three fields".into(),
                    });
                }
                let rows: usize = parse_field(fields[0], lineno)?;
                let cols: usize = parse_field(fields[1], lineno)?;
                let nnz: usize = parse_field(fields[2], lineno)?;
                if rows != cols {
                    return Err(Error::UnsupportedFormat(format!(
                        "non-square matrix {rows} x {cols}"
                    )));
                }
                size = Some((rows, nnz));
                triplets.reserve(if layout == Layout::General {
                    nnz
                } else {
                    2 * nnz
                });
            }
            Some((n, _)) => {
                if fields.len() != 3 {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: "entry line must have three fields".into(),
                    });
                }
                let i: usize = parse_field(fields[0], lineno)?;
                let j: usize = parse_field(fields[1], lineno)?;
                let v: f64 = parse_field(fields[2], lineno)?;
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("index ({i}, {j}) out of range"),
                    });
                }
                let (i, j) = (i - 1, j - 1);
                stored += 1;
                triplets.push((i, j, v));
                if i != j {
                    match layout {
                        Layout::General => {}
                        Layout::Symmetric => triplets.push((j, i, v)),
                        Layout::SkewSymmetric => triplets.push((j, i, -v)),
                    }
                }
            }
        }
    }
    let (n, declared) = size.ok_or(Error::Parse {
        line: 0,
        msg: "missing size line".into(),
    })?;
    if stored != declared {
        return Err(Error::Parse {
            line: 0,
            msg: format!("declared {declared} entries, found {stored}"),
        });
    }
    SparseMatrix::from_triplets(n, &triplets)
}

fn parse_header(header: &str) -> Result<Layout> {
    let tokens: Vec<String> = header
        .split_whitespace()
        .map(|t| t.to_ascii_lowercase())
        .collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(Error::Parse {
            line: 1,
            msg: format!("malformed header: {header:?}"),
        });
    }
    if tokens[2] != "coordinate" {
        return Err(Error::UnsupportedFormat(format!("{} storage", tokens[2])));
    }
    match tokens[3].as_str() {
        "real" | "integer" | "double" => {}
        other => return Err(Error::UnsupportedFormat(format!("{other} field"))),
    }
    match tokens[4].as_str() {
        "general" => Ok(Layout::General),
        "symmetric" => Ok(Layout::Symmetric),
        "skew-symmetric" => Ok(Layout::SkewSymmetric),
        other => Err(Error::UnsupportedFormat(format!("{other} symmetry"))),
    }
}

fn parse_field<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("cannot parse {s:?}"),
    })
}

/// Writes `a` in coordinate real format. Symmetric matrices are written as the
/// lower triangle with a `symmetric` header.
pub fn write_matrix_market(path: impl AsRef<Path>, a: &SparseMatrix) -> Result<()> {
    let path = path.as_ref();
    let to_io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(to_io)?;
    let mut w = BufWriter::new(file);
    write_matrix_market_to(&mut w, a).map_err(to_io)?;
    w.flush().map_err(to_io)
}

pub fn write_matrix_market_to(w: &mut impl Write, a: &SparseMatrix) -> std::io::Result<()> {
    let symmetric = a.is_symmetric();
    let kind = if symmetric { "symmetric" } else { "general" };
    writeln!(w, "%%MatrixMarket matrix coordinate real {kind}")?;
    let count = if symmetric {
        (0..a.n())
            .map(|i| a.row(i).0.iter().filter(|&&j| j <= i).count())
            .sum()
    } else {
        a.nnz()
    };
    writeln!(w, "{} {} {}", a.n(), a.n(), count)?;
    // column-major order for the lower triangle, matching common tooling output
    let t = a.transpose();
    let src = if symmetric { &t } else { a };
    for i in 0..a.n() {
        let (cols, vals) = src.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if symmetric {
                if j < i {
                    continue;
                }
                // `{:e}` prints the shortest representation that round-trips exactly
                writeln!(w, "{} {} {:e}", j + 1, i + 1, v)?;
            } else {
                writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<SparseMatrix> {
        parse_matrix_market(s.as_bytes())
    }

    #[test]
    fn symmetric_expansion() {
        let a = parse(
            "%%MatrixMarket matrix coordinate real symmetric\n% comment\n2 2 3\n1 1 4\n2 1 1\n2 2 4\n",
        )
        .unwrap();
        assert_eq!(a.to_dense(), vec![vec![4.0, 1.0], vec![1.0, 4.0]]);
        assert!(a.is_symmetric());
    }

    #[test]
    fn general_roundtrip_bitwise() {
        let a = SparseMatrix::from_dense(&[
            vec![0.1, 0.0, -3.25e-7],
            vec![1.0 / 3.0, 2.0, 0.0],
            vec![0.0, std::f64::consts::PI, 5.0],
        ])
        .unwrap();
        let mut buf = Vec::new();
        write_matrix_market_to(&mut buf, &a).unwrap();
        let b = parse(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn duplicates_are_summed() {
        let a = parse(
            "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1.5\n1 1 2.5\n2 2 1\n",
        )
        .unwrap();
        assert_eq!(a.get(0, 0), 4.0);
    }

    #[test]
    fn zero_diagonal_is_loadable_and_flagged() {
        let a =
            parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n1 2 1\n").unwrap();
        assert_eq!(a.first_zero_diagonal(), Some(1));
    }

    #[test]
    fn unsupported_fields() {
        for kind in ["pattern", "complex"] {
            let err = parse(&format!(
                "%%MatrixMarket matrix coordinate {kind} general\n1 1 1\n1 1 1\n"
            ))
            .unwrap_err();
            assert!(matches!(err, Error::UnsupportedFormat(_)), "{kind}");
        }
        let err = parse("%%MatrixMarket matrix array real general\n1 1\n1\n").unwrap_err();
        assert!(matches!(err, Error::UnsupportedFormat(_)));
    }

    #[test]
    fn malformed_header() {
        assert!(matches!(
            parse("hello\n1 1 1\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn binary_file_rejected() {
        let dir = std::env::temp_dir().join(format!("a2ilu-mm-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bin.mtx");
        std::fs::write(&path, [0xff, 0xfe, 0x00, 0x81]).unwrap();
        assert!(matches!(
            read_matrix_market(&path),
            Err(Error::UnsupportedFormat(_))
        ));
        std::fs::remove_dir_all(&dir).ok();
    }
}
