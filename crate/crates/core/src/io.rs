//! On-disk formats: binary configuration snapshots, event-log CSV and
//! field-trajectory CSV.
//!
//! Snapshot layout (little-endian throughout):
//! magic `"ABCF"`, version `u16` (1 = one byte per site, 2 = four sites per
//! byte, 2 bits each), `N u64`, `gamma f64`, `a f64`, `E_A f64`, `E_B f64`,
//! `E_C f64`, `seed u64`, `time f64`, then the site payload.

use std::io::{Read, Write};

use crate::dynkin::DynkinLedger;
use crate::engine::{Event, EventLog};
use crate::error::{Error, Result};
use crate::lattice::{Configuration, Species};
use crate::params::ModelParams;

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"ABCF";

/// Site payload encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotEncoding {
    /// one byte per site (version 1)
    Bytes,
    /// packed, 4 sites per byte (version 2)
    Packed,
}

pub fn write_snapshot<W: Write>(
    w: &mut W,
    params: &ModelParams,
    config: &Configuration,
    time: f64,
    encoding: SnapshotEncoding,
) -> Result<()> {
    let version: u16 = match encoding {
        SnapshotEncoding::Bytes => 1,
        SnapshotEncoding::Packed => 2,
    };
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_all(&version.to_le_bytes())?;
    w.write_all(&(config.len() as u64).to_le_bytes())?;
    w.write_all(&params.gamma().to_le_bytes())?;
    w.write_all(&params.a().to_le_bytes())?;
    for e in params.field() {
        w.write_all(&e.to_le_bytes())?;
    }
    w.write_all(&params.seed().to_le_bytes())?;
    w.write_all(&time.to_le_bytes())?;
    match encoding {
        SnapshotEncoding::Bytes => {
            let bytes: Vec<u8> = config.sites().iter().map(|&s| s as u8).collect();
            w.write_all(&bytes)?;
        }
        SnapshotEncoding::Packed => {
            let mut bytes = Vec::with_capacity(config.len() / 4 + 1);
            for chunk in config.sites().chunks(4) {
                let mut b = 0u8;
                for (i, &s) in chunk.iter().enumerate() {
                    b |= (s as u8) << (2 * i);
                }
                bytes.push(b);
            }
            w.write_all(&bytes)?;
        }
    }
    Ok(())
}

/// Header fields and configuration of a snapshot.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub n: usize,
    pub gamma: f64,
    pub a: f64,
    pub field: [f64; 3],
    pub seed: u64,
    pub time: f64,
    pub config: Configuration,
}

pub fn read_snapshot<R: Read>(r: &mut R) -> Result<Snapshot> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(Error::BadSnapshot(format!("bad magic {magic:?}")));
    }
    let mut u2 = [0u8; 2];
    let mut u8b = [0u8; 8];
    r.read_exact(&mut u2)?;
    let version = u16::from_le_bytes(u2);
    r.read_exact(&mut u8b)?;
    let n = u64::from_le_bytes(u8b) as usize;
    let mut f64s = [0.0f64; 7];
    let read_f64 = |r: &mut R| -> Result<f64> {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        Ok(f64::from_le_bytes(b))
    };
    let gamma = read_f64(r)?;
    let a = read_f64(r)?;
    for v in f64s.iter_mut().take(3) {
        *v = read_f64(r)?;
    }
    r.read_exact(&mut u8b)?;
    let seed = u64::from_le_bytes(u8b);
    let time = read_f64(r)?;
    let sites = match version {
        1 => {
            let mut bytes = vec![0u8; n];
            r.read_exact(&mut bytes)?;
            bytes
                .into_iter()
                .map(|b| match b {
                    0 => Ok(Species::A),
                    1 => Ok(Species::B),
                    2 => Ok(Species::C),
                    other => Err(Error::BadSnapshot(format!("bad species byte {other}"))),
                })
                .collect::<Result<Vec<_>>>()?
        }
        2 => {
            let packed = vec![0u8; (n + 3) / 4];
            let mut packed = packed;
            r.read_exact(&mut packed)?;
            let mut sites = Vec::with_capacity(n);
            for (i, b) in packed.iter().enumerate() {
                for j in 0..4 {
                    if 4 * i + j >= n {
                        break;
                    }
                    let code = (b >> (2 * j)) & 0b11;
                    match code {
                        0 => sites.push(Species::A),
                        1 => sites.push(Species::B),
                        2 => sites.push(Species::C),
                        _ => return Err(Error::BadSnapshot("bad packed species".into())),
                    }
                }
            }
            sites
        }
        v => return Err(Error::BadSnapshot(format!("unknown version {v}"))),
    };
    Ok(Snapshot {
        n,
        gamma,
        a,
        field: [f64s[0], f64s[1], f64s[2]],
        seed,
        time,
        config: Configuration::new(sites)?,
    })
}

/// Write an event log as CSV with columns `time,bond,left_species,right_species`.
pub fn write_event_log_csv<W: Write>(w: &mut W, log: &EventLog) -> Result<()> {
    writeln!(w, "time,bond,left_species,right_species")?;
    for ev in &log.events {
        writeln!(
            w,
            "{},{},{},{}",
            ev.time,
            ev.bond,
            ev.left.as_char(),
            ev.right.as_char()
        )?;
    }
    Ok(())
}

pub fn read_event_log_csv<R: Read>(r: &mut R) -> Result<EventLog> {
    let mut text = String::new();
    let mut rr = std::io::BufReader::new(r);
    rr.read_to_string(&mut text)?;
    let mut events = Vec::new();
    let mut elapsed = 0.0f64;
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 4 {
            return Err(Error::BadSnapshot(format!("event CSV line {lineno}: {line}")));
        }
        let time: f64 = parts[0]
            .parse()
            .map_err(|_| Error::BadSnapshot(format!("bad time on line {lineno}")))?;
        let bond: usize = parts[1]
            .parse()
            .map_err(|_| Error::BadSnapshot(format!("bad bond on line {lineno}")))?;
        let left = Species::from_char(parts[2].chars().next().unwrap_or('?'))
            .ok_or_else(|| Error::BadSnapshot(format!("bad species on line {lineno}")))?;
        let right = Species::from_char(parts[3].chars().next().unwrap_or('?'))
            .ok_or_else(|| Error::BadSnapshot(format!("bad species on line {lineno}")))?;
        events.push(Event { time, bond, left, right });
        elapsed = elapsed.max(time);
    }
    Ok(EventLog { events, elapsed })
}

/// Field-trajectory CSV header. Complex-valued ledger pieces are written as
/// `_re`/`_im` column pairs.
pub const FIELD_TRAJECTORY_HEADER: &str =
    "time,mode_label,k,re,im,i_re,i_im,b_re,b_im,r_re,r_im,m_re,m_im,qv_running";

pub fn write_field_trajectory_csv<W: Write>(
    w: &mut W,
    ledger: &DynkinLedger,
    k: i64,
) -> Result<()> {
    writeln!(w, "{FIELD_TRAJECTORY_HEADER}")?;
    for row in &ledger.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            row.t,
            ledger.spec.label.name(),
            k,
            row.z.re,
            row.z.im,
            row.i_t.re,
            row.i_t.im,
            row.b_t.re,
            row.b_t.im,
            row.r_t.re,
            row.r_t.im,
            row.m_t.re,
            row.m_t.im,
            row.qv
        )?;
    }
    Ok(())
}

/// One parsed field-trajectory row.
#[derive(Debug, Clone, Copy)]
pub struct FieldTrajectoryRow {
    pub t: f64,
    pub k: i64,
    pub plus_mode: bool,
    pub z: (f64, f64),
    pub i_t: (f64, f64),
    pub b_t: (f64, f64),
    pub r_t: (f64, f64),
    pub m_t: (f64, f64),
    pub qv: f64,
}

pub fn read_field_trajectory_csv<R: Read>(r: &mut R) -> Result<Vec<FieldTrajectoryRow>> {
    let mut text = String::new();
    std::io::BufReader::new(r).read_to_string(&mut text)?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let p: Vec<&str> = line.split(',').collect();
        if p.len() != 14 {
            return Err(Error::BadSnapshot(format!("field CSV line {lineno}")));
        }
        let f = |i: usize| -> Result<f64> {
            p[i].parse()
                .map_err(|_| Error::BadSnapshot(format!("bad number on line {lineno}")))
        };
        rows.push(FieldTrajectoryRow {
            t: f(0)?,
            plus_mode: p[1] == "plus",
            k: p[2]
                .parse()
                .map_err(|_| Error::BadSnapshot(format!("bad k on line {lineno}")))?,
            z: (f(3)?, f(4)?),
            i_t: (f(5)?, f(6)?),
            b_t: (f(7)?, f(8)?),
            r_t: (f(9)?, f(10)?),
            m_t: (f(11)?, f(12)?),
            qv: f(13)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::sample_product_measure;
    use crate::rng::single_rng;

    #[test]
    fn snapshot_round_trip_both_encodings() {
        let params = ModelParams::new(37, 0.5, [1.0, -0.25, 0.5], 99).unwrap();
        let mut rng = single_rng(1);
        let config = sample_product_measure(0.3, 0.3, 37, &mut rng).unwrap();
        for enc in [SnapshotEncoding::Bytes, SnapshotEncoding::Packed] {
            let mut buf = Vec::new();
            write_snapshot(&mut buf, &params, &config, 0.625, enc).unwrap();
            let snap = read_snapshot(&mut buf.as_slice()).unwrap();
            assert_eq!(snap.n, 37);
            assert_eq!(snap.config, config);
            assert_eq!(snap.time, 0.625);
            assert_eq!(snap.field, params.field());
            assert_eq!(snap.seed, 99);
        }
    }

    #[test]
    fn event_log_csv_round_trip() {
        use crate::engine::simulate;
        let params = ModelParams::new(16, 0.0, [1.0, 0.0, 0.5], 5).unwrap();
        let mut rng = single_rng(2);
        let init = sample_product_measure(1.0 / 3.0, 1.0 / 3.0, 16, &mut rng).unwrap();
        let (log, fin) = simulate(&params, init.clone(), 0.01, &[], &mut []).unwrap();
        let mut buf = Vec::new();
        write_event_log_csv(&mut buf, &log).unwrap();
        let log2 = read_event_log_csv(&mut buf.as_slice()).unwrap();
        assert_eq!(log.events.len(), log2.events.len());
        assert_eq!(log2.replay(&init), fin);
    }
}
