use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Edge, NetError, Skeleton};

const MAGIC: &str = "cascadenet-skeleton";
const VERSION: &str = "v1";

/// Writes the header `cascadenet-skeleton v1 N=<n> L=<l>` and one
/// `debtor creditor` pair per line.
pub fn write_skeleton<W: Write>(g: &Skeleton, out: W) -> Result<(), NetError> {
    let mut out = BufWriter::new(out);
    writeln!(out, "{MAGIC} {VERSION} N={} L={}", g.node_count(), g.edge_count())?;
    for e in g.edges() {
        writeln!(out, "{} {}", e.debtor, e.creditor)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_skeleton_file(g: &Skeleton, path: &Path) -> Result<(), NetError> {
    write_skeleton(g, File::create(path)?)
}

fn header_value(token: Option<&str>, key: &str) -> Result<usize, NetError> {
    token
        .and_then(|t| t.strip_prefix(key))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| NetError::Format(format!("header lacks {key}<count>")))
}

/// Parses the skeleton format and validates the edge list.
pub fn read_skeleton<R: Read>(input: R) -> Result<Skeleton, NetError> {
    let mut lines = BufReader::new(input).lines();
    let header = lines.next().ok_or_else(|| NetError::Format("empty file".into()))??;
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some(MAGIC) {
        return Err(NetError::Format("missing cascadenet-skeleton header".into()));
    }
    match tokens.next() {
        Some(VERSION) => {}
        other => return Err(NetError::Format(format!("unsupported version {}", other.unwrap_or("<none>")))),
    }
    let n = header_value(tokens.next(), "N=")?;
    let l = header_value(tokens.next(), "L=")?;
    let mut edges = Vec::with_capacity(l);
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace().map(str::parse::<usize>);
        match (parts.next(), parts.next(), parts.next()) {
            (Some(Ok(v)), Some(Ok(w)), None) => edges.push(Edge::new(v, w)),
            _ => return Err(NetError::Format(format!("line {}: expected `debtor creditor`", lineno + 2))),
        }
    }
    if edges.len() != l {
        return Err(NetError::Format(format!("header declares {l} edges, found {}", edges.len())));
    }
    Skeleton::new(n, edges)
}

pub fn read_skeleton_file(path: &Path) -> Result<Skeleton, NetError> {
    read_skeleton(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let g = Skeleton::new(4, vec![Edge::new(0, 1), Edge::new(3, 2), Edge::new(2, 0)]).unwrap();
        let mut buf = Vec::new();
        write_skeleton(&g, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("cascadenet-skeleton v1 N=4 L=3\n"));
        assert_eq!(read_skeleton(buf.as_slice()).unwrap(), g);
    }

    #[test]
    fn rejects_unknown_version_and_bad_counts() {
        assert!(read_skeleton("cascadenet-skeleton v2 N=2 L=0\n".as_bytes()).is_err());
        assert!(read_skeleton("cascadenet-skeleton v1 N=2 L=2\n0 1\n".as_bytes()).is_err());
        assert!(read_skeleton("cascadenet-skeleton v1 N=2 L=1\n0 0\n".as_bytes()).is_err());
    }
}
