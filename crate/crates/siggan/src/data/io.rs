//! Dataset serialization: a little-endian binary container plus CSV export.
//!
//! Binary layout (all integers and floats little-endian):
//!
//! ```text
//! magic      4 bytes  "SGD1"
//! version    u32      1
//! n_train    u32
//! n_test     u32
//! signal_len u32
//! rate_hz    f64
//! norm_flag  u8       0 or 1
//! [norm]     4 x f64  signal_min, signal_max, ra_min, ra_max (if flag = 1)
//! samples    n_train + n_test times (train block first):
//!   id       u64
//!   rpm      f64
//!   feed     f64
//!   depth    f64
//!   ra       f64
//!   signal   signal_len x f64
//! ```
//!
//! Writing a dataset read from disk reproduces the input byte for byte.

use std::fs;
use std::io::{Cursor, Read as _};
use std::path::Path;

use crate::data::{Dataset, LabeledSignal, MachiningParams, NormRecord};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"SGD1";
const VERSION: u32 = 1;

fn put_f64(buf: &mut Vec<u8>, v: f64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn get_u32(c: &mut Cursor<&[u8]>) -> Result<u32> {
    let mut b = [0u8; 4];
    c.read_exact(&mut b)
        .map_err(|_| Error::Format("dataset file truncated".into()))?;
    Ok(u32::from_le_bytes(b))
}

fn get_u64(c: &mut Cursor<&[u8]>) -> Result<u64> {
    let mut b = [0u8; 8];
    c.read_exact(&mut b)
        .map_err(|_| Error::Format("dataset file truncated".into()))?;
    Ok(u64::from_le_bytes(b))
}

fn get_f64(c: &mut Cursor<&[u8]>) -> Result<f64> {
    let mut b = [0u8; 8];
    c.read_exact(&mut b)
        .map_err(|_| Error::Format("dataset file truncated".into()))?;
    Ok(f64::from_le_bytes(b))
}

fn put_sample(buf: &mut Vec<u8>, s: &LabeledSignal) {
    buf.extend_from_slice(&s.id.to_le_bytes());
    put_f64(buf, s.params.rpm);
    put_f64(buf, s.params.feed_mm_min);
    put_f64(buf, s.params.depth_um);
    put_f64(buf, s.ra_um);
    for &v in &s.signal {
        put_f64(buf, v);
    }
}

fn get_sample(c: &mut Cursor<&[u8]>, l: usize) -> Result<LabeledSignal> {
    let id = get_u64(c)?;
    let rpm = get_f64(c)?;
    let feed_mm_min = get_f64(c)?;
    let depth_um = get_f64(c)?;
    let ra_um = get_f64(c)?;
    let mut signal = Vec::with_capacity(l);
    for _ in 0..l {
        signal.push(get_f64(c)?);
    }
    Ok(LabeledSignal {
        id,
        params: MachiningParams {
            rpm,
            feed_mm_min,
            depth_um,
        },
        ra_um,
        signal,
    })
}

pub fn dataset_to_bytes(ds: &Dataset) -> Result<Vec<u8>> {
    ds.validate()?;
    let l = ds.signal_len();
    let mut buf = Vec::with_capacity(40 + ds.len() * (8 + 4 * 8 + l * 8));
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(ds.train.len() as u32).to_le_bytes());
    buf.extend_from_slice(&(ds.test.len() as u32).to_le_bytes());
    buf.extend_from_slice(&(l as u32).to_le_bytes());
    put_f64(&mut buf, ds.sample_rate_hz);
    match &ds.norm {
        Some(n) => {
            buf.push(1);
            put_f64(&mut buf, n.signal_min);
            put_f64(&mut buf, n.signal_max);
            put_f64(&mut buf, n.ra_min);
            put_f64(&mut buf, n.ra_max);
        }
        None => buf.push(0),
    }
    for s in ds.all() {
        put_sample(&mut buf, s);
    }
    Ok(buf)
}

pub fn dataset_from_bytes(bytes: &[u8]) -> Result<Dataset> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(Error::Format("not a dataset file (bad magic)".into()));
    }
    let mut c = Cursor::new(bytes);
    c.set_position(4);
    let version = get_u32(&mut c)?;
    if version != VERSION {
        return Err(Error::Format(format!(
            "unsupported dataset version {version}, expected {VERSION}"
        )));
    }
    let n_train = get_u32(&mut c)? as usize;
    let n_test = get_u32(&mut c)? as usize;
    let l = get_u32(&mut c)? as usize;
    let sample_rate_hz = get_f64(&mut c)?;
    let mut flag = [0u8; 1];
    c.read_exact(&mut flag)
        .map_err(|_| Error::Format("dataset file truncated".into()))?;
    let norm = match flag[0] {
        0 => None,
        1 => Some(NormRecord {
            signal_min: get_f64(&mut c)?,
            signal_max: get_f64(&mut c)?,
            ra_min: get_f64(&mut c)?,
            ra_max: get_f64(&mut c)?,
        }),
        other => {
            return Err(Error::Format(format!(
                "bad normalization flag {other} in dataset file"
            )))
        }
    };
    let mut train = Vec::with_capacity(n_train);
    for _ in 0..n_train {
        train.push(get_sample(&mut c, l)?);
    }
    let mut test = Vec::with_capacity(n_test);
    for _ in 0..n_test {
        test.push(get_sample(&mut c, l)?);
    }
    if c.position() as usize != bytes.len() {
        return Err(Error::Format(format!(
            "dataset file has {} trailing bytes",
            bytes.len() - c.position() as usize
        )));
    }
    let ds = Dataset {
        sample_rate_hz,
        train,
        test,
        norm,
    };
    ds.validate()?;
    Ok(ds)
}

pub fn write_dataset(path: &Path, ds: &Dataset) -> Result<()> {
    fs::write(path, dataset_to_bytes(ds)?)?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    dataset_from_bytes(&fs::read(path)?)
}

/// Nine significant digits, scientific; keeps CSV artifacts diff-friendly.
pub fn sig9(v: f64) -> String {
    format!("{v:.8e}")
}

/// Six significant digits for human-facing percentages.
pub fn sig6(v: f64) -> String {
    format!("{v:.5e}")
}

/// One row per sample: id, split, condition, label, raw samples.
pub fn dataset_to_csv(ds: &Dataset) -> String {
    let l = ds.signal_len();
    let mut out = String::new();
    out.push_str("id,split,rpm,feed_mm_min,depth_um,ra_um");
    for n in 0..l {
        out.push_str(&format!(",s{n}"));
    }
    out.push('\n');
    let mut row = |s: &LabeledSignal, split: &str| {
        out.push_str(&format!(
            "{},{},{},{},{},{}",
            s.id,
            split,
            s.params.rpm,
            s.params.feed_mm_min,
            s.params.depth_um,
            sig9(s.ra_um)
        ));
        for &v in &s.signal {
            out.push(',');
            out.push_str(&sig9(v));
        }
        out.push('\n');
    };
    for s in &ds.train {
        row(s, "train");
    }
    for s in &ds.test {
        row(s, "test");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::surrogate::{synth_dataset, SurrogateSpec};

    fn small_spec(len: usize) -> SurrogateSpec {
        SurrogateSpec {
            signal_len: len,
            ..SurrogateSpec::default()
        }
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let ds = synth_dataset(&small_spec(64), 9).unwrap();
        let bytes = dataset_to_bytes(&ds).unwrap();
        let back = dataset_from_bytes(&bytes).unwrap();
        assert_eq!(back, ds);
        let bytes2 = dataset_to_bytes(&back).unwrap();
        assert_eq!(bytes, bytes2);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.sgd");
        let ds = synth_dataset(&small_spec(64), 2).unwrap();
        write_dataset(&path, &ds).unwrap();
        assert_eq!(read_dataset(&path).unwrap(), ds);
    }

    #[test]
    fn bad_magic_and_truncation_are_diagnosed() {
        let ds = synth_dataset(&small_spec(64), 2).unwrap();
        let bytes = dataset_to_bytes(&ds).unwrap();

        let mut corrupt = bytes.clone();
        corrupt[0] = b'X';
        assert!(dataset_from_bytes(&corrupt).is_err());

        let truncated = &bytes[..bytes.len() - 3];
        assert!(dataset_from_bytes(truncated).is_err());

        let mut padded = bytes.clone();
        padded.extend_from_slice(&[0, 1, 2]);
        assert!(dataset_from_bytes(&padded).is_err());
    }

    #[test]
    fn csv_has_header_split_column_and_all_rows() {
        let ds = synth_dataset(&small_spec(64), 2).unwrap();
        let csv = dataset_to_csv(&ds);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 65);
        assert!(lines[0].starts_with("id,split,rpm,feed_mm_min,depth_um,ra_um,s0"));
        assert_eq!(lines.iter().filter(|l| l.contains(",train,")).count(), 52);
        assert_eq!(lines.iter().filter(|l| l.contains(",test,")).count(), 12);
    }

    #[test]
    fn sig9_formats_nine_significant_digits() {
        assert_eq!(sig9(1.0), "1.00000000e0");
        assert_eq!(sig9(-0.125), "-1.25000000e-1");
    }
}
