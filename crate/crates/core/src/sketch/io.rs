//! Binary sketch files.
//!
//! Layout, little-endian: magic `SLSK`, `u16` version, 32-byte SHA-256 of
//! the serialized round parameters, `u16` round count, the round
//! parameters, then one `f64` per measurement.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::apply::Sketch;
use super::params::{specs_digest, RoundSpec, Schedule};

const MAGIC: &[u8; 4] = b"SLSK";
const VERSION: u16 = 1;

pub fn sketch_to_bytes(schedule: &Schedule, sketch: &Sketch) -> Result<Vec<u8>> {
    if sketch.digest != schedule.digest() {
        return Err(Error::DigestMismatch);
    }
    let specs = schedule.specs();
    let mut out = Vec::with_capacity(64 + sketch.values.len() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&sketch.digest);
    out.extend_from_slice(&(specs.len() as u16).to_le_bytes());
    for s in &specs {
        out.extend_from_slice(&s.to_bytes());
    }
    for v in &sketch.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn sketch_from_bytes(bytes: &[u8]) -> Result<(Schedule, Sketch)> {
    let bad = |msg: &str| Error::Format(msg.to_string());
    if bytes.len() < 40 || &bytes[..4] != MAGIC {
        return Err(bad("not a sketch file"));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported sketch version {version}")));
    }
    let digest: [u8; 32] = bytes[6..38].try_into().expect("32 bytes");
    let rounds = u16::from_le_bytes([bytes[38], bytes[39]]) as usize;
    let mut pos = 40;
    let mut specs = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let (spec, used) = RoundSpec::from_bytes(&bytes[pos..])?;
        specs.push(spec);
        pos += used;
    }
    if specs_digest(&specs) != digest {
        return Err(Error::DigestMismatch);
    }
    let schedule = Schedule::from_specs(specs)?;
    let rest = &bytes[pos..];
    if rest.len() != schedule.measurement_count() * 8 {
        return Err(Error::Format(format!(
            "expected {} measurements, found {} bytes",
            schedule.measurement_count(),
            rest.len()
        )));
    }
    let values = rest
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok((schedule, Sketch { digest, values }))
}

pub fn write_sketch(path: &Path, schedule: &Schedule, sketch: &Sketch) -> Result<()> {
    fs::write(path, sketch_to_bytes(schedule, sketch)?)?;
    Ok(())
}

pub fn read_sketch(path: &Path) -> Result<(Schedule, Sketch)> {
    sketch_from_bytes(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::{apply_sketch, Signal, SketchConfig};

    #[test]
    fn file_round_trip() {
        let s = Schedule::new(300, 2, 0.5, &SketchConfig::default(), 4).unwrap();
        let x = Signal::new(300, vec![(4, 1.5), (200, -0.25)]).unwrap();
        let sk = apply_sketch(&s, &x).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.slsk");
        write_sketch(&path, &s, &sk).unwrap();
        let (s2, sk2) = read_sketch(&path).unwrap();
        assert_eq!(s2.digest(), s.digest());
        assert_eq!(s2.specs(), s.specs());
        assert_eq!(sk2, sk);
    }

    #[test]
    fn corruption_detected() {
        let s = Schedule::new(300, 2, 0.5, &SketchConfig::default(), 4).unwrap();
        let sk = Sketch::zeros(&s);
        let bytes = sketch_to_bytes(&s, &sk).unwrap();
        let mut flipped = bytes.clone();
        flipped[60] ^= 1; // inside the round parameters
        assert!(matches!(sketch_from_bytes(&flipped), Err(Error::DigestMismatch)));
        assert!(matches!(sketch_from_bytes(&bytes[..bytes.len() - 8]), Err(Error::Format(_))));
        assert!(matches!(sketch_from_bytes(b"nope"), Err(Error::Format(_))));
    }
}
