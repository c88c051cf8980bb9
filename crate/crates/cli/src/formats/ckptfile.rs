//! Checkpoint container file.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic  8 bytes  "LSYNCKP1"
//! u32    format version
//! str    model kind tag          (str = u16 length + UTF-8 bytes)
//! u32    feature_dim
//! u32    noise_dim
//! u32    g_hidden
//! u32    d_hidden
//! u32    swdnn_hidden
//! u64    epoch
//! str    phase
//! u64*4  rng state
//! u32    scalar count, then per scalar: str name, f64 value
//! u32    tensor count, then per tensor: str name, u32 rows, u32 cols,
//!        rows*cols f64 values
//! ```
//!
//! Save and load round-trip bit-exactly.

use std::fs;
use std::path::Path;

use lipsyn_core::matrix::Matrix;
use lipsyn_core::nets::{ArchDescriptor, Checkpoint, ModelKind};

use crate::{CliError, CliResult};

const MAGIC: &[u8; 8] = b"LSYNCKP1";

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> CliResult<&'a [u8]> {
        if self.pos + n > self.data.len() {
            return Err(CliError::data(format!(
                "{}: truncated checkpoint",
                self.path.display()
            )));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self) -> CliResult<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> CliResult<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> CliResult<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> CliResult<f64> {
        Ok(f64::from_bits(self.u64()?))
    }

    fn string(&mut self) -> CliResult<String> {
        let len = self.u16()? as usize;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec())
            .map_err(|_| CliError::data(format!("{}: bad UTF-8 string", self.path.display())))
    }
}

fn push_string(out: &mut Vec<u8>, s: &str) {
    let bytes = s.as_bytes();
    assert!(bytes.len() <= u16::MAX as usize, "string too long for format");
    out.extend_from_slice(&(bytes.len() as u16).to_le_bytes());
    out.extend_from_slice(bytes);
}

/// Serialize a checkpoint to a file.
pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> CliResult<()> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&ckpt.version.to_le_bytes());
    push_string(&mut out, &ckpt.arch.kind.tag());
    for v in [
        ckpt.arch.feature_dim,
        ckpt.arch.noise_dim,
        ckpt.arch.g_hidden,
        ckpt.arch.d_hidden,
        ckpt.arch.swdnn_hidden,
    ] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    out.extend_from_slice(&ckpt.epoch.to_le_bytes());
    push_string(&mut out, &ckpt.phase);
    for w in ckpt.rng_state {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out.extend_from_slice(&(ckpt.scalars.len() as u32).to_le_bytes());
    for (name, value) in &ckpt.scalars {
        push_string(&mut out, name);
        out.extend_from_slice(&value.to_bits().to_le_bytes());
    }
    out.extend_from_slice(&(ckpt.tensors.len() as u32).to_le_bytes());
    for (name, tensor) in &ckpt.tensors {
        push_string(&mut out, name);
        out.extend_from_slice(&(tensor.rows() as u32).to_le_bytes());
        out.extend_from_slice(&(tensor.cols() as u32).to_le_bytes());
        for v in tensor.as_slice() {
            out.extend_from_slice(&v.to_bits().to_le_bytes());
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Load a checkpoint file.
pub fn load_checkpoint(path: &Path) -> CliResult<Checkpoint> {
    let data = fs::read(path)?;
    let mut r = Reader {
        data: &data,
        pos: 0,
        path,
    };
    if r.take(8)? != MAGIC {
        return Err(CliError::data(format!(
            "{}: not a lipsyn checkpoint",
            path.display()
        )));
    }
    let version = r.u32()?;
    let kind_tag = r.string()?;
    let kind = ModelKind::parse(&kind_tag).ok_or_else(|| {
        CliError::data(format!("{}: unknown model kind {kind_tag:?}", path.display()))
    })?;
    let feature_dim = r.u32()? as usize;
    let noise_dim = r.u32()? as usize;
    let g_hidden = r.u32()? as usize;
    let d_hidden = r.u32()? as usize;
    let swdnn_hidden = r.u32()? as usize;
    let epoch = r.u64()?;
    let phase = r.string()?;
    let rng_state = [r.u64()?, r.u64()?, r.u64()?, r.u64()?];
    let n_scalars = r.u32()? as usize;
    let mut scalars = Vec::with_capacity(n_scalars);
    for _ in 0..n_scalars {
        let name = r.string()?;
        scalars.push((name, r.f64()?));
    }
    let n_tensors = r.u32()? as usize;
    let mut tensors = Vec::with_capacity(n_tensors);
    for _ in 0..n_tensors {
        let name = r.string()?;
        let rows = r.u32()? as usize;
        let cols = r.u32()? as usize;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            data.push(r.f64()?);
        }
        tensors.push((name, Matrix::from_vec(rows, cols, data)?));
    }
    if r.pos != data.len() {
        return Err(CliError::data(format!(
            "{}: trailing bytes in checkpoint",
            path.display()
        )));
    }
    Ok(Checkpoint {
        version,
        arch: ArchDescriptor {
            kind,
            feature_dim,
            noise_dim,
            g_hidden,
            d_hidden,
            swdnn_hidden,
        },
        epoch,
        phase,
        rng_state,
        tensors,
        scalars,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use lipsyn_core::nets::{GeneratorNet, ParamSet};
    use lipsyn_core::rng::SeededRng;

    #[test]
    fn checkpoint_round_trip_is_bit_exact() {
        let mut rng = SeededRng::new(12);
        let g = GeneratorNet::new(4, 2, false, 3, &mut rng);
        let mut ckpt = Checkpoint::new(ArchDescriptor {
            kind: ModelKind::Csg,
            feature_dim: 4,
            noise_dim: 2,
            g_hidden: 3,
            d_hidden: 2,
            swdnn_hidden: 0,
        });
        ckpt.epoch = 17;
        ckpt.phase = "adversarial".into();
        ckpt.rng_state = [1, u64::MAX, 3, 0x1234_5678_9abc_def0];
        ckpt.push_tensors("g.", &g.param_names(), &g.params());
        ckpt.scalars.push(("adam_g.t".into(), 1234.0));
        // Include awkward values; they must survive bit-for-bit.
        ckpt.scalars.push(("weird".into(), -0.0));
        ckpt.tensors.push((
            "edge".into(),
            Matrix::from_vec(1, 3, vec![f64::MIN_POSITIVE, 1e308, -1e-308]).unwrap(),
        ));

        let dir = std::env::temp_dir().join(format!("lipsyn-ckpt-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("test.ckpt");
        save_checkpoint(&path, &ckpt).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        assert_eq!(loaded, ckpt);

        // Save the loaded checkpoint again: identical bytes.
        let path2 = dir.join("test2.ckpt");
        save_checkpoint(&path2, &loaded).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn bad_magic_is_rejected() {
        let dir = std::env::temp_dir().join(format!("lipsyn-ckpt-bad-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.ckpt");
        std::fs::write(&path, b"NOTACKPT????").unwrap();
        assert!(load_checkpoint(&path).is_err());
    }
}
