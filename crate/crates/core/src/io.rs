//! Little-endian binary persistence for fields ("GKDV"), trajectories
//! ("GKTR"), and weighted ensembles ("GKEN"), plus atomic file writes and a
//! JSON interchange path for single fields.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::flow::{FlowConfig, Trajectory, Variant};
use crate::sampler::GibbsEnsemble;
use crate::spectral::SpectralField;

pub const FIELD_MAGIC: &[u8; 4] = b"GKDV";
pub const TRAJECTORY_MAGIC: &[u8; 4] = b"GKTR";
pub const ENSEMBLE_MAGIC: &[u8; 4] = b"GKEN";
pub const FORMAT_VERSION: u32 = 1;

fn bad(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

struct Reader<R: Read>(R);

impl<R: Read> Reader<R> {
    fn bytes<const K: usize>(&mut self) -> Result<[u8; K]> {
        let mut buf = [0u8; K];
        self.0.read_exact(&mut buf)?;
        Ok(buf)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }

    fn magic(&mut self, want: &[u8; 4]) -> Result<()> {
        let got: [u8; 4] = self.bytes()?;
        if &got != want {
            return Err(bad(format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(&got),
                String::from_utf8_lossy(want)
            )));
        }
        let version = self.u32()?;
        if version != FORMAT_VERSION {
            return Err(bad(format!("unsupported format version {version}")));
        }
        Ok(())
    }

    fn field_body(&mut self, max_mode: usize) -> Result<SpectralField> {
        let mut coeffs = Vec::with_capacity(max_mode);
        for _ in 0..max_mode {
            let re = self.f64()?;
            let im = self.f64()?;
            coeffs.push(Complex64::new(re, im));
        }
        SpectralField::new(coeffs)
    }
}

fn write_field_body(w: &mut dyn Write, f: &SpectralField) -> Result<()> {
    for c in f.coeffs() {
        w.write_all(&c.re.to_le_bytes())?;
        w.write_all(&c.im.to_le_bytes())?;
    }
    Ok(())
}

fn checked_mode_count(n: u32) -> Result<usize> {
    if n == 0 || n > 1 << 24 {
        return Err(bad(format!("implausible mode count {n}")));
    }
    Ok(n as usize)
}

/// Write through a temp file in the destination directory, then rename.
pub fn atomic_write(path: &Path, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(d) => tempfile::NamedTempFile::new_in(d)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    {
        let mut buf = BufWriter::new(tmp.as_file_mut());
        write(&mut buf)?;
        buf.flush()?;
    }
    tmp.persist(path)
        .map_err(|e| Error::Format(format!("atomic rename failed: {e}")))?;
    Ok(())
}

pub fn write_field(path: &Path, f: &SpectralField) -> Result<()> {
    atomic_write(path, |w| {
        w.write_all(FIELD_MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(f.max_mode() as u32).to_le_bytes())?;
        write_field_body(w, f)
    })
}

pub fn read_field(path: &Path) -> Result<SpectralField> {
    let mut r = Reader(BufReader::new(fs::File::open(path)?));
    r.magic(FIELD_MAGIC)?;
    let n = checked_mode_count(r.u32()?)?;
    r.field_body(n)
}

/// Base-10 JSON interchange for single fields.
pub fn write_field_json(path: &Path, f: &SpectralField) -> Result<()> {
    let text = serde_json::to_string_pretty(f)?;
    atomic_write(path, |w| {
        w.write_all(text.as_bytes())?;
        Ok(())
    })
}

pub fn read_field_json(path: &Path) -> Result<SpectralField> {
    Ok(serde_json::from_reader(BufReader::new(fs::File::open(
        path,
    )?))?)
}

fn variant_tag(v: Variant) -> u8 {
    match v {
        Variant::Gauged => 0,
        Variant::Ungauged => 1,
    }
}

fn variant_from_tag(tag: u8) -> Result<Variant> {
    match tag {
        0 => Ok(Variant::Gauged),
        1 => Ok(Variant::Ungauged),
        other => Err(bad(format!("unknown variant tag {other}"))),
    }
}

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    atomic_write(path, |w| {
        w.write_all(TRAJECTORY_MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(traj.config.max_mode as u32).to_le_bytes())?;
        w.write_all(&[variant_tag(traj.config.variant)])?;
        w.write_all(&traj.config.nonlin_coeff.to_le_bytes())?;
        w.write_all(&traj.config.dt.to_le_bytes())?;
        w.write_all(&traj.dt_out().to_le_bytes())?;
        w.write_all(&(traj.len() as u64).to_le_bytes())?;
        write_field_body(w, &traj.initial)?;
        for state in &traj.states {
            write_field_body(w, state)?;
        }
        Ok(())
    })
}

pub fn read_trajectory(path: &Path) -> Result<Trajectory> {
    let mut r = Reader(BufReader::new(fs::File::open(path)?));
    r.magic(TRAJECTORY_MAGIC)?;
    let n = checked_mode_count(r.u32()?)?;
    let variant = variant_from_tag(r.bytes::<1>()?[0])?;
    let nonlin_coeff = r.f64()?;
    let dt = r.f64()?;
    let dt_out = r.f64()?;
    let count = r.u64()? as usize;
    if count == 0 || count > 1 << 32 {
        return Err(bad(format!("implausible state count {count}")));
    }
    let initial = r.field_body(n)?;
    let mut states = Vec::with_capacity(count);
    for _ in 0..count {
        states.push(r.field_body(n)?);
    }
    let times = (0..count).map(|k| k as f64 * dt_out).collect();
    let horizon = (count - 1) as f64 * dt_out;
    Ok(Trajectory {
        times,
        states,
        config: FlowConfig {
            max_mode: n,
            dt,
            horizon,
            variant,
            nonlin_coeff,
            output_stride: 1,
        },
        initial,
    })
}

pub fn write_ensemble(path: &Path, ens: &GibbsEnsemble) -> Result<()> {
    atomic_write(path, |w| {
        w.write_all(ENSEMBLE_MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(ens.max_mode as u32).to_le_bytes())?;
        w.write_all(&(ens.len() as u64).to_le_bytes())?;
        w.write_all(&ens.cutoff_b.to_le_bytes())?;
        w.write_all(&ens.seed.to_le_bytes())?;
        w.write_all(&ens.stream_id.to_le_bytes())?;
        for f in &ens.samples {
            write_field_body(w, f)?;
        }
        for &wt in &ens.weights {
            w.write_all(&wt.to_le_bytes())?;
        }
        Ok(())
    })
}

pub fn read_ensemble(path: &Path) -> Result<GibbsEnsemble> {
    let mut r = Reader(BufReader::new(fs::File::open(path)?));
    r.magic(ENSEMBLE_MAGIC)?;
    let n = checked_mode_count(r.u32()?)?;
    let m = r.u64()? as usize;
    if m == 0 || m > 1 << 32 {
        return Err(bad(format!("implausible sample count {m}")));
    }
    let cutoff_b = r.f64()?;
    let seed = r.u64()?;
    let stream_id = r.u64()?;
    let mut samples = Vec::with_capacity(m);
    for _ in 0..m {
        samples.push(r.field_body(n)?);
    }
    let mut weights = Vec::with_capacity(m);
    for _ in 0..m {
        weights.push(r.f64()?);
    }
    Ok(GibbsEnsemble {
        samples,
        weights,
        cutoff_b,
        max_mode: n,
        seed,
        stream_id,
    })
}
