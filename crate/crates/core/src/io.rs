//! File formats: CSV tables for people and plotting tools, little-endian
//! binary dumps for checkpoints and matrices. Floats in CSV use the shortest
//! representation that parses back to the same `f64`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeDistribution;
use crate::mc::HistogramBin;
use crate::stationary::{RecenteredState, WrappedCycleMatrix};

pub const CHECKPOINT_VERSION: u8 = 1;

#[derive(Serialize, Deserialize)]
struct DistributionRow {
    site_index: i64,
    position: f64,
    mass: f64,
    density: f64,
}

/// Columns `site_index,position,mass,density`, one row per admissible site.
pub fn write_distribution_csv<W: Write>(dist: &LatticeDistribution, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for p in dist.rescaled_density() {
        out.serialize(DistributionRow { site_index: p.site, position: p.position, mass: p.mass, density: p.density })?;
    }
    out.flush()?;
    Ok(())
}

/// Reads what [`write_distribution_csv`] wrote. Without `n`, the scale is
/// recovered from a row with a nonzero site as `site_index / position`.
pub fn read_distribution_csv<R: Read>(r: R, n: Option<u32>) -> Result<LatticeDistribution> {
    let mut rows = Vec::new();
    for row in csv::Reader::from_reader(r).deserialize() {
        let row: DistributionRow = row?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Format("distribution file has no rows".into()));
    }
    let n = match n {
        Some(n) => n,
        None => {
            let row = rows
                .iter()
                .find(|r| r.site_index != 0)
                .ok_or_else(|| Error::Format("cannot infer n from a file holding only site 0".into()))?;
            let n = (row.site_index as f64 / row.position).round();
            if !(n >= 1.0 && n <= u32::MAX as f64) {
                return Err(Error::Format(format!("inferred scale {n} is not a positive integer")));
            }
            n as u32
        }
    };
    let lo = rows.iter().map(|r| r.site_index).min().unwrap();
    let hi = rows.iter().map(|r| r.site_index).max().unwrap();
    let mut masses = vec![0.0; (hi - lo + 1) as usize];
    for row in &rows {
        masses[(row.site_index - lo) as usize] += row.mass;
    }
    LatticeDistribution::from_masses(lo, masses, n)
}

/// Layout: version `u8`, n `u32`, offset `i64`, steps taken `u64`,
/// length `u64`, then `length` masses as `f64`. All little-endian.
pub fn write_checkpoint<W: Write>(dist: &LatticeDistribution, mut w: W) -> Result<()> {
    w.write_all(&[CHECKPOINT_VERSION])?;
    w.write_all(&dist.n_scale().to_le_bytes())?;
    w.write_all(&dist.offset().to_le_bytes())?;
    w.write_all(&dist.steps_taken().to_le_bytes())?;
    w.write_all(&(dist.masses().len() as u64).to_le_bytes())?;
    for m in dist.masses() {
        w.write_all(&m.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_f64s<R: Read>(r: &mut R, len: u64) -> Result<Vec<f64>> {
    // don't trust the header with the allocation size
    let mut out = Vec::with_capacity(len.min(1 << 20) as usize);
    for _ in 0..len {
        out.push(f64::from_le_bytes(read_array(r)?));
    }
    Ok(out)
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<LatticeDistribution> {
    let [version] = read_array::<1, _>(&mut r)?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Format(format!("unsupported checkpoint version {version}")));
    }
    let n = u32::from_le_bytes(read_array(&mut r)?);
    let offset = i64::from_le_bytes(read_array(&mut r)?);
    let steps = u64::from_le_bytes(read_array(&mut r)?);
    let len = u64::from_le_bytes(read_array(&mut r)?);
    let masses = read_f64s(&mut r, len)?;
    Ok(LatticeDistribution::from_masses(offset, masses, n)?.with_steps_taken(steps))
}

/// Layout: size `u64`, cycle steps `u64`, then the entries row-major as
/// `f64`. All little-endian.
pub fn write_matrix<W: Write>(matrix: &WrappedCycleMatrix, mut w: W) -> Result<()> {
    w.write_all(&(matrix.size() as u64).to_le_bytes())?;
    w.write_all(&matrix.cycle_steps().to_le_bytes())?;
    for x in matrix.entries() {
        w.write_all(&x.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix<R: Read>(mut r: R) -> Result<WrappedCycleMatrix> {
    let size = u64::from_le_bytes(read_array(&mut r)?);
    let cycle_steps = u64::from_le_bytes(read_array(&mut r)?);
    let count = size.checked_mul(size).ok_or_else(|| Error::Format(format!("matrix size {size} overflows")))?;
    let entries = read_f64s(&mut r, count)?;
    let rows = entries.chunks(size.max(1) as usize).map(<[f64]>::to_vec).collect();
    WrappedCycleMatrix::from_rows(rows, cycle_steps)
}

#[derive(Serialize)]
struct StationaryRow {
    state: usize,
    wrapped_position: f64,
    recentered_position: f64,
    mass: f64,
    density: f64,
}

/// Columns `state,wrapped_position,recentered_position,mass,density`.
pub fn write_stationary_csv<W: Write>(states: &[RecenteredState], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for s in states {
        out.serialize(StationaryRow {
            state: s.state,
            wrapped_position: s.wrapped_position,
            recentered_position: s.position,
            mass: s.mass,
            density: s.density,
        })?;
    }
    out.flush()?;
    Ok(())
}

/// A single `sample` column.
pub fn write_samples_csv<W: Write>(samples: &[f64], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["sample"])?;
    for x in samples {
        out.write_record([x.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_samples_csv<R: Read>(r: R) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for record in csv::Reader::from_reader(r).records() {
        let record = record?;
        let field = record.get(0).ok_or_else(|| Error::Format("empty sample row".into()))?;
        out.push(field.trim().parse::<f64>().map_err(|e| Error::Format(format!("bad sample {field:?}: {e}")))?);
    }
    Ok(out)
}

/// Columns `bin_left,bin_right,count`.
pub fn write_histogram_csv<W: Write>(bins: &[HistogramBin], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for b in bins {
        out.serialize(b)?;
    }
    out.flush()?;
    Ok(())
}
