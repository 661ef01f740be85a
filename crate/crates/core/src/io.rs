//! JSON-lines edge lists.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::Metric;
use crate::spanner::{EdgeKind, FtSpanner};

#[derive(Debug, Serialize, Deserialize)]
struct EdgeRecord {
    u: usize,
    v: usize,
    w: f64,
    kind: EdgeKind,
    level: usize,
}

#[derive(Debug, Error)]
pub enum EdgeFileError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// One `{"u","v","w","kind","level"}` object per line; `w` is scaled back to input units.
pub fn write_edges(mut out: impl Write, sp: &FtSpanner, scale: f64) -> std::io::Result<()> {
    for e in sp.edges() {
        let rec = EdgeRecord {
            u: e.u,
            v: e.v,
            w: e.w * scale,
            kind: e.kind,
            level: e.level,
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads an edge list for the points of `m`. Weights are recomputed from the
/// metric; blank lines are skipped.
pub fn read_edges(input: impl BufRead, m: &Metric) -> Result<FtSpanner, EdgeFileError> {
    let mut sp = FtSpanner::new(m.len());
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: EdgeRecord = serde_json::from_str(&line).map_err(|e| EdgeFileError::Parse {
            line: i + 1,
            msg: e.to_string(),
        })?;
        if rec.u >= m.len() || rec.v >= m.len() {
            return Err(EdgeFileError::Parse {
                line: i + 1,
                msg: format!("vertex out of range for {} points", m.len()),
            });
        }
        sp.insert(rec.u, rec.v, m.dist(rec.u, rec.v), rec.kind, rec.level);
    }
    Ok(sp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let m = crate::gen::uniform_plane(6, 1);
        let norm = m.normalize();
        let sp = FtSpanner::complete(&norm);
        let mut buf = Vec::new();
        write_edges(&mut buf, &sp, norm.scale()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 15);
        assert!(text.lines().next().unwrap().contains("\"kind\":\"cross-clique\""));
        let back = read_edges(text.as_bytes(), &norm).unwrap();
        assert_eq!(back.edges(), sp.edges());
    }

    #[test]
    fn rejects_bad_lines() {
        let m = crate::gen::line(3);
        let err = read_edges("{\"u\":0,\"v\":7,\"w\":1,\"kind\":\"tree-clique\",\"level\":0}\n".as_bytes(), &m);
        assert!(matches!(err, Err(EdgeFileError::Parse { line: 1, .. })));
        assert!(read_edges("not json\n".as_bytes(), &m).is_err());
    }
}
