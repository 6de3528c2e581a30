//! Lookup tables mapping source intensities to (real-valued) target intensities.
//!
//! Entries are optional: estimators leave bins that do not occur in the
//! source overlap absent until [`crate::complete`] fills them.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::LEVELS;

#[derive(Clone, Debug, PartialEq)]
pub struct ImfTable {
    entries: [Option<f64>; LEVELS],
}

impl Default for ImfTable {
    fn default() -> Self {
        Self::empty()
    }
}

impl ImfTable {
    pub fn empty() -> Self {
        Self { entries: [None; LEVELS] }
    }

    pub fn identity() -> Self {
        Self::from_fn(|z| z as f64)
    }

    /// A total table with `f(z)` at every level.
    pub fn from_fn(mut f: impl FnMut(u8) -> f64) -> Self {
        let mut t = Self::empty();
        for z in 0..LEVELS {
            t.entries[z] = Some(f(z as u8));
        }
        t
    }

    pub fn from_entries(entries: [Option<f64>; LEVELS]) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &[Option<f64>; LEVELS] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, z: u8) -> Option<f64> {
        self.entries[z as usize]
    }

    pub fn set(&mut self, z: u8, value: f64) {
        self.entries[z as usize] = Some(value);
    }

    pub fn clear(&mut self, z: u8) {
        self.entries[z as usize] = None;
    }

    pub fn is_present(&self, z: u8) -> bool {
        self.entries[z as usize].is_some()
    }

    pub fn present_count(&self) -> usize {
        self.entries.iter().filter(|e| e.is_some()).count()
    }

    pub fn is_total(&self) -> bool {
        self.entries.iter().all(Option::is_some)
    }

    /// `(z, value)` for every present entry in increasing `z`.
    pub fn present(&self) -> impl Iterator<Item = (u8, f64)> + '_ {
        self.entries.iter().enumerate().filter_map(|(z, e)| e.map(|v| (z as u8, v)))
    }

    pub fn require_total(&self) -> Result<()> {
        match self.entries.iter().position(Option::is_none) {
            Some(z) => Err(Error::NotTotal(z)),
            None => Ok(()),
        }
    }

    /// Values of a total table. Panics if any entry is absent.
    pub fn values(&self) -> [f64; LEVELS] {
        let mut out = [0.0; LEVELS];
        for (o, e) in out.iter_mut().zip(self.entries.iter()) {
            *o = e.expect("values() on a partial table");
        }
        out
    }

    /// True when the present entries never decrease with `z`.
    pub fn is_non_decreasing(&self) -> bool {
        let mut prev = f64::NEG_INFINITY;
        for (_, v) in self.present() {
            if v < prev {
                return false;
            }
            prev = v;
        }
        true
    }

    /// Evaluates a total table at a real abscissa by linear interpolation
    /// between the bracketing integer entries. Arguments are clamped to
    /// the dynamic range first.
    pub fn eval(&self, x: f64) -> Result<f64> {
        self.require_total()?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, (LEVELS - 1) as f64);
        let lo = x.floor() as usize;
        let frac = x - lo as f64;
        let v_lo = self.entries[lo].unwrap_or(f64::NAN);
        if frac == 0.0 {
            return v_lo;
        }
        let v_hi = self.entries[lo + 1].unwrap_or(f64::NAN);
        v_lo + frac * (v_hi - v_lo)
    }

    pub fn max_abs_diff(&self, other: &ImfTable) -> Option<f64> {
        let mut worst: Option<f64> = None;
        for (a, b) in self.entries.iter().zip(other.entries.iter()) {
            if let (Some(a), Some(b)) = (a, b) {
                let d = (a - b).abs();
                worst = Some(worst.map_or(d, |w| w.max(d)));
            }
        }
        worst
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["z", "value", "present"]).map_err(csv_err)?;
        for (z, e) in self.entries.iter().enumerate() {
            let (value, present) = match e {
                // Display for f64 prints the shortest string that parses back to the same bits
                Some(v) => (v.to_string(), "1"),
                None => (String::new(), "0"),
            };
            wr.write_record([z.to_string(), value, present.to_string()]).map_err(csv_err)?;
        }
        wr.flush().map_err(|e| Error::TableFormat(e.to_string()))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let headers = rd.headers().map_err(csv_err)?.clone();
        if headers.iter().map(str::trim).collect::<Vec<_>>() != ["z", "value", "present"] {
            return Err(Error::TableFormat(format!("unexpected header {headers:?}")));
        }
        let mut entries = [None; LEVELS];
        let mut seen = [false; LEVELS];
        for (line, rec) in rd.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let bad = |what: &str| Error::TableFormat(format!("row {}: {what}", line + 2));
            if rec.len() != 3 {
                return Err(bad("expected 3 fields"));
            }
            let z: usize = rec[0].trim().parse().map_err(|_| bad("z is not an integer"))?;
            if z >= LEVELS || seen[z] {
                return Err(bad("z out of range or repeated"));
            }
            seen[z] = true;
            let present = match rec[2].trim() {
                "1" | "true" => true,
                "0" | "false" => false,
                _ => return Err(bad("present must be 0 or 1")),
            };
            if present {
                let v: f64 = rec[1].trim().parse().map_err(|_| bad("value is not a number"))?;
                if !v.is_finite() {
                    return Err(bad("value is not finite"));
                }
                entries[z] = Some(v);
            }
        }
        if let Some(z) = seen.iter().position(|s| !s) {
            return Err(Error::TableFormat(format!("missing row for z = {z}")));
        }
        Ok(Self { entries })
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(file))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::TableFormat(e.to_string())
}

#[derive(Serialize, Deserialize)]
struct TableBundle {
    channels: Vec<Vec<Option<f64>>>,
}

/// Serializes one table per channel into a single JSON document.
pub fn tables_to_json(tables: &[ImfTable]) -> Result<String> {
    let bundle = TableBundle { channels: tables.iter().map(|t| t.entries.to_vec()).collect() };
    serde_json::to_string_pretty(&bundle).map_err(|e| Error::TableFormat(e.to_string()))
}

pub fn tables_from_json(s: &str) -> Result<Vec<ImfTable>> {
    let bundle: TableBundle = serde_json::from_str(s).map_err(|e| Error::TableFormat(e.to_string()))?;
    bundle
        .channels
        .into_iter()
        .enumerate()
        .map(|(c, entries)| {
            let entries: [Option<f64>; LEVELS] = entries
                .try_into()
                .map_err(|v: Vec<_>| Error::TableFormat(format!("channel {c} has {} entries", v.len())))?;
            Ok(ImfTable { entries })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

pub const JSON_BUNDLE_NAME: &str = "tables.json";

pub fn channel_csv_name(c: usize) -> String {
    format!("channel_{c}.csv")
}

/// Writes per-channel tables into `dir`, returning the files created.
pub fn save_tables(tables: &[ImfTable], dir: impl AsRef<Path>, format: TableFormat) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    match format {
        TableFormat::Csv => tables
            .iter()
            .enumerate()
            .map(|(c, t)| {
                let p = dir.join(channel_csv_name(c));
                t.save_csv(&p).map(|_| p)
            })
            .collect(),
        TableFormat::Json => {
            let p = dir.join(JSON_BUNDLE_NAME);
            fs::write(&p, tables_to_json(tables)?).map_err(|e| Error::io(&p, e))?;
            Ok(vec![p])
        }
    }
}

/// Loads tables from a JSON bundle file, or from a directory holding either
/// a JSON bundle or `channel_<c>.csv` files.
pub fn load_tables(path: impl AsRef<Path>) -> Result<Vec<ImfTable>> {
    let path = path.as_ref();
    if path.is_file() {
        let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        return tables_from_json(&s);
    }
    let bundle = path.join(JSON_BUNDLE_NAME);
    if bundle.is_file() {
        return load_tables(bundle);
    }
    let mut tables = Vec::new();
    loop {
        let p = path.join(channel_csv_name(tables.len()));
        if !p.is_file() {
            break;
        }
        tables.push(ImfTable::load_csv(p)?);
    }
    if tables.is_empty() {
        return Err(Error::io(path, std::io::Error::new(std::io::ErrorKind::NotFound, "no table files found")));
    }
    Ok(tables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tiny_partial() -> ImfTable {
        let mut t = ImfTable::empty();
        t.set(0, 4.0 / 3.0);
        t.set(1, 2.0);
        t.set(200, 254.999999999999);
        t
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        tiny_partial().write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("z,value,present"));
        assert_eq!(lines.next(), Some("0,1.3333333333333333,1"));
        assert_eq!(lines.next(), Some("1,2,1"));
        assert_eq!(lines.next(), Some("2,,0"));
        assert_eq!(s.lines().count(), 257);
    }

    #[test]
    fn csv_rejects_garbage() {
        assert!(ImfTable::read_csv("z,value,present\n0,1,1\n".as_bytes()).is_err());
        assert!(ImfTable::read_csv("a,b,c\n".as_bytes()).is_err());
        let mut rows = String::from("z,value,present\n");
        for z in 0..256 {
            rows.push_str(&format!("{z},x,1\n"));
        }
        assert!(ImfTable::read_csv(rows.as_bytes()).is_err());
    }

    #[test]
    fn eval_interpolates_and_clamps() {
        let t = ImfTable::from_fn(|z| 2.0 * z as f64);
        assert_eq!(t.eval(10.25).unwrap(), 20.5);
        assert_eq!(t.eval(-3.0).unwrap(), 0.0);
        assert_eq!(t.eval(400.0).unwrap(), 510.0);
        assert!(matches!(tiny_partial().eval(1.0), Err(Error::NotTotal(2))));
    }

    #[test]
    fn load_dir_prefers_bundle_then_csv() {
        let dir = tempfile::tempdir().unwrap();
        let tables = vec![tiny_partial(), ImfTable::identity(), ImfTable::empty()];
        save_tables(&tables, dir.path(), TableFormat::Csv).unwrap();
        assert_eq!(load_tables(dir.path()).unwrap(), tables);
        let other = vec![ImfTable::identity()];
        save_tables(&other, dir.path(), TableFormat::Json).unwrap();
        assert_eq!(load_tables(dir.path()).unwrap(), other);
        assert_eq!(load_tables(dir.path().join(JSON_BUNDLE_NAME)).unwrap(), other);
        assert!(load_tables(dir.path().join("missing")).is_err());
    }

    fn arb_table() -> impl Strategy<Value = ImfTable> {
        proptest::collection::vec(proptest::option::of(-1e6f64..1e6), LEVELS)
            .prop_map(|v| ImfTable::from_entries(v.try_into().unwrap()))
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_lossless(t in arb_table()) {
            let mut buf = Vec::new();
            t.write_csv(&mut buf).unwrap();
            prop_assert_eq!(ImfTable::read_csv(buf.as_slice()).unwrap(), t);
        }

        #[test]
        fn json_round_trip_is_lossless(a in arb_table(), b in arb_table()) {
            let tables = vec![a, b];
            let s = tables_to_json(&tables).unwrap();
            prop_assert_eq!(tables_from_json(&s).unwrap(), tables);
        }
    }
}
