//! CSV persistence for run records and tables.
//!
//! Every file is written to a temporary sibling and renamed into place, so a
//! reader never sees a partial table.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::diagnostics::RunRecord;
use crate::error::{Error, Result};

pub const RECORD_HEADER: &str = "t,linf,E,P,C_E,C_P,growth_factor";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn format_records(records: &[RunRecord]) -> String {
    let mut out = String::with_capacity(32 + records.len() * 170);
    out.push_str(RECORD_HEADER);
    out.push('\n');
    for r in records {
        let fields = [r.t, r.linf, r.energy, r.momentum, r.c_e, r.c_p, r.growth_factor];
        let line: Vec<String> = fields.iter().map(|v| fmt_f64(*v)).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}

/// Parses text produced by [`format_records`].
pub fn parse_records(text: &str) -> Result<Vec<RunRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end_matches('\r') == RECORD_HEADER => {}
        _ => {
            return Err(Error::Csv {
                line: 1,
                reason: format!("expected header `{RECORD_HEADER}`"),
            })
        }
    }
    let mut records = Vec::new();
    for (i, line) in lines {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let mut vals = [0.0; 7];
        let mut count = 0;
        for field in line.split(',') {
            if count == vals.len() {
                count += 1;
                break;
            }
            vals[count] = field.trim().parse::<f64>().map_err(|_| Error::Csv {
                line: i + 1,
                reason: format!("cannot parse `{field}` as a number"),
            })?;
            count += 1;
        }
        if count != vals.len() {
            return Err(Error::Csv {
                line: i + 1,
                reason: format!("expected {} fields", vals.len()),
            });
        }
        records.push(RunRecord {
            t: vals[0],
            linf: vals[1],
            energy: vals[2],
            momentum: vals[3],
            c_e: vals[4],
            c_p: vals[5],
            growth_factor: vals[6],
        });
    }
    Ok(records)
}

/// Writes `contents` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = std::path::PathBuf::from(tmp);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io)
}

pub fn emit_csv(records: &[RunRecord], path: &Path) -> Result<()> {
    write_atomic(path, &format_records(records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(t: f64) -> RunRecord {
        RunRecord {
            t,
            linf: 1.79e-4,
            energy: -13.911337892283951,
            momentum: -0.2721655267886245,
            c_e: 4.96e-10,
            c_p: 3.6e-8,
            growth_factor: 1.66,
        }
    }

    #[test]
    fn header_only_and_single_row() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        emit_csv(&[], &p).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), format!("{RECORD_HEADER}\n"));
        emit_csv(&[rec(0.0)], &p).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(parse_records(&text).unwrap(), vec![rec(0.0)]);
        // no temporaries left behind
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn io_errors_carry_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let target = blocker.join("sub.csv");
        match emit_csv(&[], &target) {
            Err(Error::Io { path, .. }) => assert_eq!(path, target),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_input() {
        assert!(parse_records("").is_err());
        assert!(parse_records("t,linf\n").is_err());
        let bad = format!("{RECORD_HEADER}\n1,2,3\n");
        assert!(matches!(parse_records(&bad), Err(Error::Csv { line: 2, .. })));
        let bad = format!("{RECORD_HEADER}\n1,2,3,4,5,6,x\n");
        assert!(parse_records(&bad).is_err());
        let bad = format!("{RECORD_HEADER}\n1,2,3,4,5,6,7,8\n");
        assert!(parse_records(&bad).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_bitwise(vals in proptest::collection::vec(proptest::num::f64::ANY, 7)) {
            let r = RunRecord {
                t: vals[0], linf: vals[1], energy: vals[2], momentum: vals[3],
                c_e: vals[4], c_p: vals[5], growth_factor: vals[6],
            };
            let back = parse_records(&format_records(&[r])).unwrap();
            let a = [r.t, r.linf, r.energy, r.momentum, r.c_e, r.c_p, r.growth_factor];
            let b = &back[0];
            let b = [b.t, b.linf, b.energy, b.momentum, b.c_e, b.c_p, b.growth_factor];
            for (x, y) in a.iter().zip(b) {
                prop_assert!(x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()));
            }
        }
    }
}
