//! FILMv1 field snapshots and CSV norm series.
//!
//! FILMv1 layout: the 7 bytes `FILMv1\0`, little-endian `u32` dimension,
//! `u32` points per axis, `f64` simulation time, then `M^N` little-endian
//! `f64` samples in row-major order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{FilmError, Result};
use crate::integrator::NormSeries;
use crate::spectral::{forward_transform, inverse_transform, Grid, SpectralField};

pub const SNAPSHOT_MAGIC: &[u8; 7] = b"FILMv1\0";

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub grid: Grid,
    pub time: f64,
    pub samples: Vec<f64>,
}

impl Snapshot {
    pub fn from_field(field: &SpectralField, time: f64) -> Result<Self> {
        Ok(Self {
            grid: *field.grid(),
            time,
            samples: inverse_transform(field)?,
        })
    }

    pub fn to_field(&self) -> Result<SpectralField> {
        forward_transform(&self.grid, &self.samples)
    }
}

pub fn write_snapshot<W: Write>(mut w: W, snap: &Snapshot) -> Result<()> {
    if snap.samples.len() != snap.grid.len() {
        return Err(FilmError::SizeMismatch {
            expected: snap.grid.len(),
            got: snap.samples.len(),
        });
    }
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_all(&(snap.grid.dim() as u32).to_le_bytes())?;
    w.write_all(&(snap.grid.points() as u32).to_le_bytes())?;
    w.write_all(&snap.time.to_le_bytes())?;
    for x in &snap.samples {
        w.write_all(&x.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<Snapshot> {
    let mut magic = [0u8; 7];
    r.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(FilmError::Format("not a FILMv1 snapshot".into()));
    }
    let mut word = [0u8; 4];
    r.read_exact(&mut word)?;
    let dim = u32::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let points = u32::from_le_bytes(word) as usize;
    let grid = Grid::new(dim, points)?;
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    let time = f64::from_le_bytes(buf);
    let mut samples = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        r.read_exact(&mut buf)?;
        samples.push(f64::from_le_bytes(buf));
    }
    if r.read(&mut buf)? != 0 {
        return Err(FilmError::Format("trailing bytes after snapshot samples".into()));
    }
    Ok(Snapshot { grid, time, samples })
}

pub fn save_snapshot(path: impl AsRef<Path>, field: &SpectralField, time: f64) -> Result<()> {
    let snap = Snapshot::from_field(field, time)?;
    write_snapshot(BufWriter::new(File::create(path)?), &snap)
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<Snapshot> {
    read_snapshot(BufReader::new(File::open(path)?))
}

pub const NORM_CSV_HEADER: &str = "t,A0,A2,A4,L2,H2,Linf,mean,envelope,H4_sq_integral";

/// One row per sample; values use the shortest round-trip decimal form and
/// a missing envelope is left empty.
pub fn write_norm_csv<W: Write>(mut w: W, series: &NormSeries) -> Result<()> {
    writeln!(w, "{NORM_CSV_HEADER}")?;
    for i in 0..series.len() {
        let envelope = series.envelope[i].map(|e| e.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            series.times[i],
            series.a0[i],
            series.a2[i],
            series.a4[i],
            series.l2[i],
            series.h2[i],
            series.linf[i],
            series.mean[i],
            envelope,
            series.h4_sq_integral[i],
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a file written by [`write_norm_csv`]. The per-sample `H^4` column
/// is not stored and comes back empty.
pub fn read_norm_csv<R: Read>(r: R) -> Result<NormSeries> {
    let mut text = String::new();
    BufReader::new(r).read_to_string(&mut text)?;
    let mut lines = text.lines();
    if lines.next() != Some(NORM_CSV_HEADER) {
        return Err(FilmError::Format("unexpected norm CSV header".into()));
    }
    let mut s = NormSeries::default();
    for (n, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(FilmError::Format(format!("row {}: expected 10 fields", n + 1)));
        }
        let num = |j: usize| {
            fields[j]
                .parse::<f64>()
                .map_err(|e| FilmError::Format(format!("row {}, column {}: {e}", n + 1, j + 1)))
        };
        s.times.push(num(0)?);
        s.a0.push(num(1)?);
        s.a2.push(num(2)?);
        s.a4.push(num(3)?);
        s.l2.push(num(4)?);
        s.h2.push(num(5)?);
        s.linf.push(num(6)?);
        s.mean.push(num(7)?);
        s.envelope.push(if fields[8].is_empty() { None } else { Some(num(8)?) });
        s.h4_sq_integral.push(num(9)?);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_round_trip_is_exact() {
        let g = Grid::new(2, 8).unwrap();
        let samples: Vec<f64> = (0..64).map(|i| (i as f64 * 0.37).sin() / 3.0).collect();
        let snap = Snapshot {
            grid: g,
            time: 0.125,
            samples,
        };
        let mut bytes = Vec::new();
        write_snapshot(&mut bytes, &snap).unwrap();
        assert_eq!(bytes.len(), 7 + 4 + 4 + 8 + 64 * 8);
        assert_eq!(&bytes[..7], b"FILMv1\0");
        assert_eq!(&bytes[7..11], &2u32.to_le_bytes());
        assert_eq!(read_snapshot(bytes.as_slice()).unwrap(), snap);
    }

    #[test]
    fn snapshot_rejects_bad_input() {
        let mut bytes = b"FILMv2\0".to_vec();
        bytes.extend_from_slice(&[0; 16]);
        assert!(read_snapshot(bytes.as_slice()).is_err());
        let snap = Snapshot {
            grid: Grid::new(1, 8).unwrap(),
            time: 0.0,
            samples: vec![0.0; 8],
        };
        let mut bytes = Vec::new();
        write_snapshot(&mut bytes, &snap).unwrap();
        assert!(read_snapshot(&bytes[..bytes.len() - 1]).is_err());
        bytes.push(0);
        assert!(read_snapshot(bytes.as_slice()).is_err());
        let short = Snapshot {
            samples: vec![0.0; 7],
            ..snap
        };
        assert!(write_snapshot(Vec::new(), &short).is_err());
    }

    #[test]
    fn norm_csv_round_trip() {
        let g = Grid::new(1, 16).unwrap();
        let v = SpectralField::from_cosines(g, &[(vec![1], 0.1, 0.3), (vec![2], 1.0 / 3.0, 0.0)]).unwrap();
        let mut s = NormSeries::default();
        s.push(0.0, &v, Some(0.1));
        s.push(0.1, &v.scaled(0.5), None);
        let mut out = Vec::new();
        write_norm_csv(&mut out, &s).unwrap();
        let text = String::from_utf8(out.clone()).unwrap();
        assert!(text.starts_with(NORM_CSV_HEADER));
        assert!(text.lines().nth(2).unwrap().contains(",,"));
        let back = read_norm_csv(out.as_slice()).unwrap();
        assert_eq!(back.a2, s.a2);
        assert_eq!(back.envelope, s.envelope);
        assert_eq!(back.h4_sq_integral, s.h4_sq_integral);
    }
}
