//! The DTF tensor file format, label files and CSV emission.
//!
//! DTF is a three-line ASCII header followed by the tensor entries in
//! linearization order (first index fastest):
//!
//! ```text
//! DTF1
//! dims: I1 I2 ... IN
//! order: first-fastest
//! v1 v2 v3 ...
//! ```
//!
//! The binary variant uses the same header terminated by one blank line,
//! then raw little-endian IEEE-754 f64 values. Text values are written in
//! Rust's shortest round-trip notation, so load/store round trips bitwise.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::AffinityGraph;
use crate::tensor::DenseTensor;

const MAGIC: &str = "DTF1";
const ORDER_LINE: &str = "order: first-fastest";

/// Encodes a tensor as DTF text.
pub fn dtf_to_text(t: &DenseTensor) -> String {
    let dims: Vec<String> = t.shape().iter().map(|d| d.to_string()).collect();
    let mut s = format!("{MAGIC}\ndims: {}\n{ORDER_LINE}\n", dims.join(" "));
    for chunk in t.data().chunks(8) {
        let row: Vec<String> = chunk.iter().map(|v| v.to_string()).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

/// Encodes a tensor as DTF binary.
pub fn dtf_to_binary(t: &DenseTensor) -> Vec<u8> {
    let dims: Vec<String> = t.shape().iter().map(|d| d.to_string()).collect();
    let header = format!("{MAGIC}\ndims: {}\n{ORDER_LINE}\n\n", dims.join(" "));
    let mut bytes = header.into_bytes();
    for v in t.data() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    bytes
}

/// Decodes either DTF variant (a blank line after the header marks binary).
pub fn dtf_from_bytes(bytes: &[u8]) -> Result<DenseTensor> {
    let mut pos = 0usize;
    let mut next_line = || -> Result<&str> {
        let rest = &bytes[pos..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::Parse("truncated DTF header".into()))?;
        let line = std::str::from_utf8(&rest[..end])
            .map_err(|_| Error::Parse("non-UTF8 DTF header".into()))?;
        pos += end + 1;
        Ok(line.trim_end_matches('\r'))
    };

    if next_line()? != MAGIC {
        return Err(Error::Parse(format!("missing {MAGIC} magic line")));
    }
    let dims_line = next_line()?;
    let dims_str = dims_line
        .strip_prefix("dims:")
        .ok_or_else(|| Error::Parse("missing dims line".into()))?;
    let shape: Vec<usize> = dims_str
        .split_whitespace()
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad extent '{s}'")))
        })
        .collect::<Result<_>>()?;
    if next_line()? != ORDER_LINE {
        return Err(Error::Parse(format!("expected '{ORDER_LINE}'")));
    }
    let count: usize = shape.iter().product();
    let payload = &bytes[pos..];

    // a blank line directly after the header marks the binary variant
    let binary = payload.first() == Some(&b'\n')
        || (payload.first() == Some(&b'\r') && payload.get(1) == Some(&b'\n'));
    let data = if binary {
        let skip = if payload[0] == b'\r' { 2 } else { 1 };
        let raw = &payload[skip..];
        if raw.len() != count * 8 {
            return Err(Error::Parse(format!(
                "binary payload has {} bytes, expected {}",
                raw.len(),
                count * 8
            )));
        }
        raw.chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect()
    } else {
        let text = std::str::from_utf8(payload)
            .map_err(|_| Error::Parse("non-UTF8 DTF payload".into()))?;
        let values: Vec<f64> = text
            .split_whitespace()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad value '{s}'")))
            })
            .collect::<Result<_>>()?;
        if values.len() != count {
            return Err(Error::Parse(format!(
                "{} values for shape of {} entries",
                values.len(),
                count
            )));
        }
        values
    };
    DenseTensor::new(shape, data)
}

pub fn write_dtf_text(path: impl AsRef<Path>, t: &DenseTensor) -> Result<()> {
    fs::write(path, dtf_to_text(t))?;
    Ok(())
}

pub fn write_dtf_binary(path: impl AsRef<Path>, t: &DenseTensor) -> Result<()> {
    fs::write(path, dtf_to_binary(t))?;
    Ok(())
}

pub fn read_dtf(path: impl AsRef<Path>) -> Result<DenseTensor> {
    let bytes = fs::read(&path)?;
    dtf_from_bytes(&bytes)
}

/// Labels are one integer per line, aligned with the last-mode index order.
pub fn labels_to_text(labels: &[usize]) -> String {
    let mut s = String::new();
    for l in labels {
        s.push_str(&l.to_string());
        s.push('\n');
    }
    s
}

pub fn labels_from_text(text: &str) -> Result<Vec<usize>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad label '{l}'")))
        })
        .collect()
}

pub fn write_labels(path: impl AsRef<Path>, labels: &[usize]) -> Result<()> {
    fs::write(path, labels_to_text(labels))?;
    Ok(())
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    labels_from_text(&fs::read_to_string(path)?)
}

/// CSV edge list of the affinity graph, `i,j,weight` with 0-based indices.
pub fn edge_list_csv(g: &AffinityGraph) -> String {
    let mut s = String::from("i,j,weight\n");
    for (i, j, w) in g.edges() {
        s.push_str(&format!("{i},{j},{w}\n"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::TauPolicy;
    use crate::rng;

    fn sample_tensor() -> DenseTensor {
        let mut r = rng::stream(50, "io-test", 0);
        DenseTensor::new(
            vec![3, 2, 4],
            (0..24).map(|_| rng::uniform(&mut r, 0.0, 255.0)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn text_round_trip_is_bitwise() {
        let t = sample_tensor();
        let decoded = dtf_from_bytes(dtf_to_text(&t).as_bytes()).unwrap();
        assert_eq!(decoded.shape(), t.shape());
        assert_eq!(decoded.data(), t.data());
    }

    #[test]
    fn binary_round_trip_is_bitwise() {
        let t = sample_tensor();
        let decoded = dtf_from_bytes(&dtf_to_binary(&t)).unwrap();
        assert_eq!(decoded.shape(), t.shape());
        assert_eq!(decoded.data(), t.data());
    }

    #[test]
    fn header_errors_are_reported() {
        assert!(dtf_from_bytes(b"XYZ\ndims: 2\norder: first-fastest\n1 2\n").is_err());
        assert!(dtf_from_bytes(b"DTF1\ndims: 2 2\norder: first-fastest\n1 2 3\n").is_err());
        assert!(dtf_from_bytes(b"DTF1\ndims: 2\norder: last-fastest\n1 2\n").is_err());
        assert!(dtf_from_bytes(b"DTF1\ndims: 2\n").is_err());
    }

    #[test]
    fn labels_round_trip() {
        let labels = vec![0usize, 2, 1, 1, 0, 3];
        let text = labels_to_text(&labels);
        assert_eq!(labels_from_text(&text).unwrap(), labels);
        assert!(labels_from_text("1\nx\n").is_err());
    }

    #[test]
    fn edge_list_matches_graph() {
        let samples = vec![vec![0.0], vec![1.0], vec![5.0]];
        let g = AffinityGraph::build(&samples, 1, TauPolicy::Fixed(1.0)).unwrap();
        let csv = edge_list_csv(&g);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("i,j,weight"));
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), g.edges().len());
        for (row, (i, j, w)) in rows.iter().zip(g.edges()) {
            assert_eq!(*row, format!("{i},{j},{w}"));
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = std::env::temp_dir().join("rntd-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let t = sample_tensor();
        let p_text = dir.join("t.dtf");
        let p_bin = dir.join("t.bdtf");
        write_dtf_text(&p_text, &t).unwrap();
        write_dtf_binary(&p_bin, &t).unwrap();
        assert_eq!(read_dtf(&p_text).unwrap().data(), t.data());
        assert_eq!(read_dtf(&p_bin).unwrap().data(), t.data());
        std::fs::remove_dir_all(&dir).ok();
    }
}
