use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use super::{Observation, ObservationSet, RatingRecord};
use crate::error::{Error, Result};
use crate::ids::{ItemId, UserId};

/// On-disk layout of a rating file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DatasetFormat {
    /// MovieLens 100K `u.data`: `user\titem\trating\ttimestamp`.
    MovieLens100K,
    /// MovieLens 1M `ratings.dat`: `user::item::rating::timestamp`.
    MovieLens1M,
}

impl DatasetFormat {
    fn separator(self) -> &'static str {
        match self {
            DatasetFormat::MovieLens100K => "\t",
            DatasetFormat::MovieLens1M => "::",
        }
    }

    /// Inclusive rating scale.
    pub fn scale(self) -> (u8, u8) {
        (1, 5)
    }

    pub fn name(self) -> &'static str {
        match self {
            DatasetFormat::MovieLens100K => "ml-100k",
            DatasetFormat::MovieLens1M => "ml-1m",
        }
    }
}

impl FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ml-100k" | "u.data" | "tab" => Ok(DatasetFormat::MovieLens100K),
            "ml-1m" | "ratings.dat" | "double-colon" => Ok(DatasetFormat::MovieLens1M),
            other => Err(Error::InvalidParameter(format!(
                "unknown dataset format `{other}` (expected ml-100k or ml-1m)"
            ))),
        }
    }
}

/// Bidirectional mapping between raw identifiers and dense indices.
///
/// Dense ids follow the sorted order of the raw ids (numeric when every raw id
/// is an integer, lexicographic otherwise), so the map does not depend on the
/// row order of the input file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IdMap {
    raw: Vec<String>,
    dense: HashMap<String, u32>,
}

impl IdMap {
    pub fn from_raw<'a>(ids: impl IntoIterator<Item = &'a str>) -> Self {
        let mut raw: Vec<String> = ids
            .into_iter()
            .collect::<HashSet<&str>>()
            .into_iter()
            .map(str::to_owned)
            .collect();
        if raw.iter().all(|r| r.parse::<u64>().is_ok()) {
            raw.sort_by_key(|r| r.parse::<u64>().unwrap());
        } else {
            raw.sort();
        }
        let dense = raw
            .iter()
            .enumerate()
            .map(|(i, r)| (r.clone(), i as u32))
            .collect();
        IdMap { raw, dense }
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn dense(&self, raw: &str) -> Option<u32> {
        self.dense.get(raw).copied()
    }

    pub fn raw(&self, dense: u32) -> Option<&str> {
        self.raw.get(dense as usize).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.raw.iter().enumerate().map(|(i, r)| (r.as_str(), i as u32))
    }
}

/// Parsed rating file with its id maps.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RatingData {
    pub records: Vec<RatingRecord>,
    pub users: IdMap,
    pub items: IdMap,
}

impl RatingData {
    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn num_items(&self) -> usize {
        self.items.len()
    }
}

pub fn parse_ratings(path: impl AsRef<Path>, format: DatasetFormat) -> Result<RatingData> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8_lossy(&bytes);
    parse_ratings_str(&text, format, path)
}

/// Parses rating text; `origin` is used only in error messages.
pub fn parse_ratings_str(text: &str, format: DatasetFormat, origin: &Path) -> Result<RatingData> {
    let sep = format.separator();
    let (lo, hi) = format.scale();
    let parse_err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };

    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(sep).map(str::trim).collect();
        if fields.len() < 3 || fields.len() > 4 {
            return Err(parse_err(
                line_no,
                format!("expected 3 or 4 fields, found {}", fields.len()),
            ));
        }
        if fields[0].is_empty() || fields[1].is_empty() {
            return Err(parse_err(line_no, "empty user or item id".into()));
        }
        let rating: u8 = fields[2]
            .parse()
            .map_err(|_| parse_err(line_no, format!("rating `{}` is not an integer", fields[2])))?;
        if rating < lo || rating > hi {
            return Err(Error::Validation(format!(
                "line {line_no}: rating {rating} outside scale {lo}..={hi}"
            )));
        }
        let timestamp = match fields.get(3) {
            Some(t) => Some(
                t.parse::<u64>()
                    .map_err(|_| parse_err(line_no, format!("timestamp `{t}` is not an integer")))?,
            ),
            None => None,
        };
        rows.push((line_no, fields[0], fields[1], rating, timestamp));
    }

    let users = IdMap::from_raw(rows.iter().map(|r| r.1));
    let items = IdMap::from_raw(rows.iter().map(|r| r.2));
    let mut seen = HashSet::with_capacity(rows.len());
    let mut records = Vec::with_capacity(rows.len());
    for (line_no, u, i, rating, timestamp) in rows {
        let user = UserId(users.dense(u).unwrap());
        let item = ItemId(items.dense(i).unwrap());
        if !seen.insert((user, item)) {
            return Err(Error::Validation(format!(
                "line {line_no}: duplicate rating of item {i} by user {u}"
            )));
        }
        records.push(RatingRecord {
            user,
            item,
            rating,
            timestamp,
        });
    }
    Ok(RatingData {
        records,
        users,
        items,
    })
}

/// Writes `raw\tdense` lines.
pub fn write_id_map(path: impl AsRef<Path>, map: &IdMap) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for (raw, dense) in map.iter() {
        writeln!(w, "{raw}\t{dense}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_id_map(path: impl AsRef<Path>) -> Result<IdMap> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut pairs = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let mut it = line.split('\t');
        let (Some(raw), Some(dense), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::Parse {
                path: path.into(),
                line: idx + 1,
                message: "expected `raw<TAB>dense`".into(),
            });
        };
        let dense: u32 = dense.parse().map_err(|_| Error::Parse {
            path: path.into(),
            line: idx + 1,
            message: format!("dense id `{dense}` is not an integer"),
        })?;
        pairs.push((raw.to_owned(), dense));
    }
    pairs.sort_by_key(|p| p.1);
    if pairs.iter().enumerate().any(|(i, p)| p.1 as usize != i) {
        return Err(Error::Validation(format!(
            "{}: dense ids are not contiguous from 0",
            path.display()
        )));
    }
    let dense = pairs.iter().map(|(r, d)| (r.clone(), *d)).collect();
    Ok(IdMap {
        raw: pairs.into_iter().map(|p| p.0).collect(),
        dense,
    })
}

/// Writes one `user\tdesirable\tundesirable` triple per line.
pub fn write_observations(path: impl AsRef<Path>, observations: &ObservationSet) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for o in observations {
        writeln!(w, "{}\t{}\t{}", o.user, o.desirable, o.undesirable)
            .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_observations(path: impl AsRef<Path>) -> Result<ObservationSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let err = |message: String| Error::Parse {
            path: path.into(),
            line: idx + 1,
            message,
        };
        let fields: Vec<u32> = line
            .split('\t')
            .map(|f| f.parse::<u32>().map_err(|_| err(format!("`{f}` is not a dense id"))))
            .collect::<Result<_>>()?;
        let [u, d, n] = fields[..] else {
            return Err(err(format!("expected 3 fields, found {}", fields.len())));
        };
        out.push(Observation::new(UserId(u), ItemId(d), ItemId(n)).map_err(|e| err(e.to_string()))?);
    }
    Ok(out.into_iter().collect())
}
