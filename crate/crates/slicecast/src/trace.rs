//! Trace data model and CSV interchange format.
//!
//! A trace is an ordered collection of crowd-sourced observations, one
//! per (hour, user, cell, tile, app) activity. Records are kept raw;
//! aggregation to per-period sums happens in the feature builders.
//! The CSV format (`period,user_id,cell_id,tile_x,tile_y,app_id,dl_bytes,ul_bytes`)
//! is the interchange boundary for all CLI subcommands.

use std::collections::BTreeSet;
use std::io::{Read, Write};

use crate::{Error, Result};

pub const TRACE_HEADER: [&str; 8] = [
    "period", "user_id", "cell_id", "tile_x", "tile_y", "app_id", "dl_bytes", "ul_bytes",
];

/// One-hour time slot, counted from the start of the trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimePeriod(pub u32);

/// Square of the abstract coverage grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TileCoord {
    pub x: u32,
    pub y: u32,
}

/// A single crowd-sourced observation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub period: TimePeriod,
    pub user_id: String,
    pub cell_id: String,
    pub tile: TileCoord,
    pub app_id: String,
    pub dl_bytes: u64,
    pub ul_bytes: u64,
}

/// Summary statistics over a trace, re-derivable from its records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TraceMeta {
    pub duration_periods: u32,
    pub n_users: usize,
    pub n_cells: usize,
    pub n_apps: usize,
    pub n_tiles: usize,
    pub total_traffic_bytes: u64,
}

/// An ordered record set plus its consistent summary.
///
/// Canonical sort order is (period, user_id) so file round-trips and
/// diff-based comparisons are deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    records: Vec<TraceRecord>,
    meta: TraceMeta,
}

impl Trace {
    /// Builds a trace from records: sorts them canonically and derives the meta.
    pub fn from_records(mut records: Vec<TraceRecord>) -> Self {
        records.sort_by(|a, b| {
            (a.period, &a.user_id, &a.cell_id, &a.app_id, a.tile)
                .cmp(&(b.period, &b.user_id, &b.cell_id, &b.app_id, b.tile))
        });
        let meta = summarize_records(&records);
        Trace { records, meta }
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn meta(&self) -> &TraceMeta {
        &self.meta
    }

    pub fn duration(&self) -> u32 {
        self.meta.duration_periods
    }
}

/// Counts distinct users/cells/apps/tiles and total traffic.
/// Order-independent: any permutation of the same records yields the same meta.
pub fn summarize(trace: &Trace) -> TraceMeta {
    summarize_records(&trace.records)
}

fn summarize_records(records: &[TraceRecord]) -> TraceMeta {
    let mut users = BTreeSet::new();
    let mut cells = BTreeSet::new();
    let mut apps = BTreeSet::new();
    let mut tiles = BTreeSet::new();
    let mut total: u64 = 0;
    let mut max_period: Option<u32> = None;
    for r in records {
        users.insert(&r.user_id);
        cells.insert(&r.cell_id);
        apps.insert(&r.app_id);
        tiles.insert(r.tile);
        total += r.dl_bytes + r.ul_bytes;
        max_period = Some(max_period.map_or(r.period.0, |m| m.max(r.period.0)));
    }
    TraceMeta {
        duration_periods: max_period.map_or(0, |m| m + 1),
        n_users: users.len(),
        n_cells: cells.len(),
        n_apps: apps.len(),
        n_tiles: tiles.len(),
        total_traffic_bytes: total,
    }
}

/// Reads a trace from the documented CSV format.
///
/// Malformed rows are reported with their line number. Duplicate
/// (period, user, cell, app, tile) rows are allowed; they are summed
/// downstream by the feature builders.
pub fn load_trace<R: Read>(source: R) -> Result<Trace> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    {
        let headers = reader.headers()?;
        let expected: Vec<&str> = TRACE_HEADER.to_vec();
        let got: Vec<&str> = headers.iter().collect();
        if got != expected {
            return Err(Error::MalformedTrace {
                line: 1,
                msg: format!("bad header: expected {:?}, got {:?}", expected.join(","), got.join(",")),
            });
        }
    }
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |i: usize| -> Result<&str> {
            row.get(i).ok_or_else(|| Error::MalformedTrace {
                line,
                msg: format!("missing field {}", TRACE_HEADER[i]),
            })
        };
        let parse_u32 = |i: usize| -> Result<u32> {
            field(i)?.trim().parse().map_err(|e| Error::MalformedTrace {
                line,
                msg: format!("bad {}: {}", TRACE_HEADER[i], e),
            })
        };
        let parse_bytes = |i: usize| -> Result<u64> {
            let raw = field(i)?.trim();
            let v: i64 = raw.parse().map_err(|e| Error::MalformedTrace {
                line,
                msg: format!("bad {}: {}", TRACE_HEADER[i], e),
            })?;
            if v < 0 {
                return Err(Error::MalformedTrace {
                    line,
                    msg: format!("negative {}: {}", TRACE_HEADER[i], v),
                });
            }
            Ok(v as u64)
        };
        let parse_id = |i: usize| -> Result<String> {
            let s = field(i)?.trim();
            if s.is_empty() {
                return Err(Error::MalformedTrace {
                    line,
                    msg: format!("empty {}", TRACE_HEADER[i]),
                });
            }
            Ok(s.to_string())
        };
        records.push(TraceRecord {
            period: TimePeriod(parse_u32(0)?),
            user_id: parse_id(1)?,
            cell_id: parse_id(2)?,
            tile: TileCoord { x: parse_u32(3)?, y: parse_u32(4)? },
            app_id: parse_id(5)?,
            dl_bytes: parse_bytes(6)?,
            ul_bytes: parse_bytes(7)?,
        });
    }
    Ok(Trace::from_records(records))
}

/// Writes a trace in the documented CSV format. `load_trace(write_trace(t))`
/// reproduces `t` record for record.
pub fn write_trace<W: Write>(trace: &Trace, sink: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(TRACE_HEADER)?;
    for r in &trace.records {
        writer.write_record(&[
            r.period.0.to_string(),
            r.user_id.clone(),
            r.cell_id.clone(),
            r.tile.x.to_string(),
            r.tile.y.to_string(),
            r.app_id.clone(),
            r.dl_bytes.to_string(),
            r.ul_bytes.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn load_trace_file(path: &std::path::Path) -> Result<Trace> {
    load_trace(std::fs::File::open(path)?)
}

pub fn write_trace_file(trace: &Trace, path: &std::path::Path) -> Result<()> {
    write_trace(trace, std::io::BufWriter::new(std::fs::File::create(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(period: u32, user: &str, cell: &str, tile: (u32, u32), app: &str, dl: u64, ul: u64) -> TraceRecord {
        TraceRecord {
            period: TimePeriod(period),
            user_id: user.into(),
            cell_id: cell.into(),
            tile: TileCoord { x: tile.0, y: tile.1 },
            app_id: app.into(),
            dl_bytes: dl,
            ul_bytes: ul,
        }
    }

    #[test]
    fn empty_file_header_only() {
        let input = "period,user_id,cell_id,tile_x,tile_y,app_id,dl_bytes,ul_bytes\n";
        let t = load_trace(input.as_bytes()).unwrap();
        assert_eq!(t.records().len(), 0);
        assert_eq!(*t.meta(), TraceMeta::default());
    }

    #[test]
    fn single_row_meta() {
        let input = "period,user_id,cell_id,tile_x,tile_y,app_id,dl_bytes,ul_bytes\n\
                     0,u1,c1,0,0,a1,100,10\n";
        let t = load_trace(input.as_bytes()).unwrap();
        let m = t.meta();
        assert_eq!(m.n_users, 1);
        assert_eq!(m.n_cells, 1);
        assert_eq!(m.n_apps, 1);
        assert_eq!(m.n_tiles, 1);
        assert_eq!(m.total_traffic_bytes, 110);
        assert_eq!(m.duration_periods, 1);
    }

    #[test]
    fn negative_bytes_reports_line() {
        let input = "period,user_id,cell_id,tile_x,tile_y,app_id,dl_bytes,ul_bytes\n\
                     0,u1,c1,0,0,a1,100,10\n\
                     1,u1,c1,0,0,a1,-5,0\n";
        let err = load_trace(input.as_bytes()).unwrap_err();
        match err {
            Error::MalformedTrace { line, msg } => {
                assert_eq!(line, 3);
                assert!(msg.contains("dl_bytes"), "{msg}");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn bad_header_rejected() {
        let input = "period,user\n0,u1\n";
        assert!(matches!(load_trace(input.as_bytes()), Err(Error::MalformedTrace { line: 1, .. })));
    }

    #[test]
    fn write_empty_is_header_only() {
        let t = Trace::from_records(vec![]);
        let mut buf = Vec::new();
        write_trace(&t, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "period,user_id,cell_id,tile_x,tile_y,app_id,dl_bytes,ul_bytes\n"
        );
    }

    #[test]
    fn two_records_in_period_order() {
        let t = Trace::from_records(vec![
            rec(5, "u1", "c1", (0, 0), "a1", 1, 0),
            rec(2, "u2", "c2", (1, 1), "a2", 2, 0),
        ]);
        let mut buf = Vec::new();
        write_trace(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("2,u2"));
        assert!(lines[2].starts_with("5,u1"));
    }

    #[test]
    fn summarize_hand_counts() {
        let t = Trace::from_records(vec![
            rec(0, "u1", "c1", (0, 0), "a1", 100, 10),
            rec(1, "u1", "c2", (0, 1), "a1", 100, 10),
            rec(2, "u1", "c1", (0, 0), "a2", 0, 0),
        ]);
        let m = t.meta();
        assert_eq!(m.n_users, 1);
        assert_eq!(m.n_cells, 2);
        assert_eq!(m.total_traffic_bytes, 220);
        assert_eq!(m.duration_periods, 3);
    }

    fn arb_record() -> impl Strategy<Value = TraceRecord> {
        (
            0u32..50,
            "[a-z][a-z0-9]{0,4}",
            0u32..4,
            (0u32..6, 0u32..6),
            0u32..3,
            0u64..10_000,
            0u64..1_000,
        )
            .prop_map(|(p, user, cell, tile, app, dl, ul)| TraceRecord {
                period: TimePeriod(p),
                user_id: user,
                cell_id: format!("c{cell}"),
                tile: TileCoord { x: tile.0, y: tile.1 },
                app_id: format!("a{app}"),
                dl_bytes: dl,
                ul_bytes: ul,
            })
    }

    proptest! {
        #[test]
        fn round_trip_identity(records in proptest::collection::vec(arb_record(), 0..60)) {
            let t = Trace::from_records(records);
            let mut buf = Vec::new();
            write_trace(&t, &mut buf).unwrap();
            let back = load_trace(&buf[..]).unwrap();
            prop_assert_eq!(&t, &back);
        }

        #[test]
        fn summarize_order_independent(records in proptest::collection::vec(arb_record(), 0..60), seed in any::<u64>()) {
            let t = Trace::from_records(records.clone());
            let mut shuffled = records;
            // deterministic pseudo-shuffle
            let n = shuffled.len();
            if n > 1 {
                for i in (1..n).rev() {
                    let j = ((seed.wrapping_mul(i as u64 + 1)) % (i as u64 + 1)) as usize;
                    shuffled.swap(i, j);
                }
            }
            let t2 = Trace::from_records(shuffled);
            prop_assert_eq!(t.meta(), t2.meta());
        }

        #[test]
        fn total_matches_brute_force(records in proptest::collection::vec(arb_record(), 0..60)) {
            let brute: u64 = records.iter().map(|r| r.dl_bytes + r.ul_bytes).sum();
            let t = Trace::from_records(records);
            prop_assert_eq!(t.meta().total_traffic_bytes, brute);
        }
    }
}
