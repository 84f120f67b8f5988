use std::io::{Read, Write};

use scenemt_core::numcore::Tensor;
use scenemt_core::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"SCMTCKP1";

/// Layout: magic, `u64` tensor count, then per tensor a `u32`-prefixed UTF-8
/// name, `u32` rank, `u64` dims and the data as little-endian `f64`.
pub fn write_checkpoint<'a, W, I>(mut w: W, tensors: I) -> std::io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = (&'a str, &'a Tensor)>,
    I::IntoIter: ExactSizeIterator,
{
    let tensors = tensors.into_iter();
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&(tensors.len() as u64).to_le_bytes())?;
    for (name, t) in tensors {
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
        w.write_all(&(t.shape().len() as u32).to_le_bytes())?;
        for &d in t.shape() {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        for &x in t.data() {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    w.flush()
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| {
            Error::Structural(format!("checkpoint truncated at byte {}", self.pos))
        })?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }

    fn u64(&mut self) -> Result<usize> {
        let v = u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes"));
        usize::try_from(v)
            .map_err(|_| Error::Structural(format!("size {v} does not fit in memory")))
    }
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Vec<(String, Tensor)>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)
        .map_err(|e| Error::Structural(format!("reading checkpoint: {e}")))?;
    let mut rd = Reader {
        bytes: &bytes,
        pos: 0,
    };
    if rd.take(CHECKPOINT_MAGIC.len())? != CHECKPOINT_MAGIC {
        return Err(Error::Structural(
            "not a checkpoint file (bad magic)".into(),
        ));
    }
    let count = rd.u64()?;
    let mut out = Vec::new();
    for _ in 0..count {
        let len = rd.u32()?;
        let name = std::str::from_utf8(rd.take(len)?)
            .map_err(|_| Error::Structural("tensor name is not UTF-8".into()))?
            .to_string();
        let rank = rd.u32()?;
        let shape = (0..rank).map(|_| rd.u64()).collect::<Result<Vec<_>>>()?;
        let n = shape
            .iter()
            .try_fold(1usize, |a, &d| a.checked_mul(d))
            .filter(|&n| n.checked_mul(8).is_some_and(|b| b <= bytes.len()))
            .ok_or_else(|| {
                Error::Structural(format!("tensor `{name}` has an impossible shape {shape:?}"))
            })?;
        let data = rd
            .take(n * 8)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        out.push((name, Tensor::new(&shape, data)?));
    }
    if rd.pos != bytes.len() {
        return Err(Error::Structural(format!(
            "{} trailing bytes after the last tensor",
            bytes.len() - rd.pos
        )));
    }
    Ok(out)
}
