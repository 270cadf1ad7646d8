//! Binary snapshot and text dump of a [`Tpg`].
//!
//! Snapshot layout, all integers little-endian:
//!
//! ```text
//! b"TPG1"
//! u64 users, u64 items, u64 preference nodes, u64 undirected edges, u64 pruned (0|1)
//! u64 offsets[vertices + 1]
//! u32 neighbors[2 * edges]
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::Tpg;
use crate::error::{Error, Result};
use crate::graph::CsrGraph;

const MAGIC: &[u8; 4] = b"TPG1";

pub fn write_snapshot(path: impl AsRef<Path>, tpg: &Tpg) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    w.write_all(MAGIC).map_err(io)?;
    let header = [
        tpg.num_users() as u64,
        tpg.num_items() as u64,
        tpg.preference_count() as u64,
        tpg.edge_count() as u64,
        tpg.is_pruned() as u64,
    ];
    for v in header.iter().chain(tpg.graph().offsets()) {
        w.write_all(&v.to_le_bytes()).map_err(io)?;
    }
    for v in tpg.graph().neighbor_array() {
        w.write_all(&v.to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_snapshot(path: impl AsRef<Path>) -> Result<Tpg> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let mut r = BufReader::new(File::open(path).map_err(io)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != MAGIC {
        return Err(Error::Snapshot(format!("bad magic {magic:?}")));
    }
    let read_u64 = |r: &mut BufReader<File>| -> Result<u64> {
        let mut b = [0u8; 8];
        r.read_exact(&mut b).map_err(io)?;
        Ok(u64::from_le_bytes(b))
    };
    let users = read_u64(&mut r)? as usize;
    let items = read_u64(&mut r)? as usize;
    let prefs = read_u64(&mut r)? as usize;
    let edges = read_u64(&mut r)? as usize;
    let pruned = match read_u64(&mut r)? {
        0 => false,
        1 => true,
        other => return Err(Error::Snapshot(format!("pruned flag {other}"))),
    };
    let vertices = users + prefs + 2 * items;
    let mut offsets = Vec::with_capacity(vertices + 1);
    for _ in 0..=vertices {
        offsets.push(read_u64(&mut r)?);
    }
    let mut raw = vec![0u8; 8 * edges];
    r.read_exact(&mut raw).map_err(io)?;
    let neighbors = raw
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if r.read(&mut [0u8; 1]).map_err(io)? != 0 {
        return Err(Error::Snapshot("trailing bytes".into()));
    }
    let graph = CsrGraph::from_parts(offsets, neighbors, None)?;
    Tpg::from_graph(users, items, pruned, graph)
}

/// Writes one `node: neighbor neighbor ...` line per node.
pub fn write_debug_dump(mut out: impl Write, tpg: &Tpg) -> std::io::Result<()> {
    let g = tpg.graph();
    for v in 0..g.node_count() {
        write!(out, "{v}:")?;
        for n in g.neighbors(v) {
            write!(out, " {n}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::{ItemId, UserId};
    use crate::ingest::{Observation, ObservationSet};
    use crate::tpg::build_tpg;

    fn sample() -> ObservationSet {
        [(0, 0, 1), (1, 2, 0), (1, 0, 1)]
            .into_iter()
            .map(|(u, d, n)| Observation::new(UserId(u), ItemId(d), ItemId(n)).unwrap())
            .collect()
    }

    #[test]
    fn snapshot_round_trip_both_modes() {
        let dir = tempfile::tempdir().unwrap();
        for pruned in [false, true] {
            let g = build_tpg(3, 3, &sample(), pruned).unwrap();
            let p = dir.path().join(format!("g{pruned}.tpg"));
            write_snapshot(&p, &g).unwrap();
            let bytes = std::fs::read(&p).unwrap();
            assert_eq!(&bytes[..4], b"TPG1");
            assert_eq!(u64::from_le_bytes(bytes[4..12].try_into().unwrap()), 3);
            assert_eq!(read_snapshot(&p).unwrap(), g);
        }
    }

    #[test]
    fn corrupt_snapshot_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.tpg");
        std::fs::write(&p, b"TPG2").unwrap();
        assert!(matches!(read_snapshot(&p), Err(Error::Snapshot(_))));
        let g = build_tpg(2, 2, &ObservationSet::new(), false).unwrap();
        write_snapshot(&p, &g).unwrap();
        let mut bytes = std::fs::read(&p).unwrap();
        bytes.push(0);
        std::fs::write(&p, bytes).unwrap();
        assert!(read_snapshot(&p).is_err());
    }

    #[test]
    fn debug_dump_lists_neighbors() {
        let g = build_tpg(1, 2, &ObservationSet::new(), false).unwrap();
        let mut out = Vec::new();
        write_debug_dump(&mut out, &g).unwrap();
        let text = String::from_utf8(out).unwrap();
        // user 0, prefs 1..3, reps 3..7: "0>1" at 1 links A_d=3 and B_u=6
        assert_eq!(text.lines().next(), Some("0:"));
        assert_eq!(text.lines().nth(1), Some("1: 3 6"));
        assert_eq!(text.lines().count(), 7);
    }
}
