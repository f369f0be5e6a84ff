//! Binary weight container.
//!
//! Layout: the 8-byte magic `THPADW01`, then one record per parameter tensor:
//! `layer index: u32`, `rank: u32`, `rank` dimensions as `u32`, then the
//! values as little-endian `f64`. Each trainable layer contributes its weight
//! record followed by its bias record. All integers are little-endian.

use std::io::{Read, Write};
use std::path::Path;

use super::network::{Network, Params};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const MAGIC: &[u8; 8] = b"THPADW01";

#[derive(Debug, Clone, PartialEq)]
pub struct WeightRecord {
    pub layer: u32,
    pub tensor: Tensor,
}

pub fn encode(net: &Network) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + net.num_parameters() * 8 + 64);
    out.extend_from_slice(MAGIC);
    for (i, p) in net.params().iter().enumerate() {
        let Some(p) = p else { continue };
        for t in [&p.weight, &p.bias] {
            out.extend_from_slice(&(i as u32).to_le_bytes());
            out.extend_from_slice(&(t.shape().len() as u32).to_le_bytes());
            for &d in t.shape() {
                out.extend_from_slice(&(d as u32).to_le_bytes());
            }
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    out
}

fn take<'a>(buf: &mut &'a [u8], n: usize) -> Result<&'a [u8]> {
    if buf.len() < n {
        return Err(Error::WeightFile("truncated record".into()));
    }
    let (head, tail) = buf.split_at(n);
    *buf = tail;
    Ok(head)
}

fn read_u32(buf: &mut &[u8]) -> Result<u32> {
    Ok(u32::from_le_bytes(take(buf, 4)?.try_into().unwrap()))
}

pub fn decode(bytes: &[u8]) -> Result<Vec<WeightRecord>> {
    let mut buf = bytes;
    if take(&mut buf, 8).ok() != Some(MAGIC.as_slice()) {
        return Err(Error::WeightFile("bad magic, expected THPADW01".into()));
    }
    let mut records = Vec::new();
    while !buf.is_empty() {
        let layer = read_u32(&mut buf)?;
        let rank = read_u32(&mut buf)? as usize;
        if rank == 0 || rank > 8 {
            return Err(Error::WeightFile(format!("unsupported tensor rank {rank}")));
        }
        let dims = (0..rank)
            .map(|_| read_u32(&mut buf).map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        let len = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&l| l.checked_mul(8).is_some_and(|b| b <= buf.len()))
            .ok_or_else(|| Error::WeightFile("truncated values".into()))?;
        let values = take(&mut buf, len * 8)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let tensor = Tensor::new(dims, values).map_err(|e| Error::WeightFile(e.to_string()))?;
        records.push(WeightRecord { layer, tensor });
    }
    Ok(records)
}

pub fn save(net: &Network, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&encode(net)).map_err(|e| Error::io(path, e))
}

pub fn read(path: &Path) -> Result<Vec<WeightRecord>> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

/// Loads weight/bias record pairs into `net`, checking every shape.
///
/// Layers listed in `skip` are ignored (for example a classifier head of a
/// different size). Momentum state of loaded layers is cleared. Returns the
/// number of layers loaded.
pub fn apply(net: &mut Network, records: &[WeightRecord], skip: &[usize]) -> Result<usize> {
    if records.len() % 2 != 0 {
        return Err(Error::WeightFile("records must come in weight/bias pairs".into()));
    }
    let mut loaded = 0;
    for pair in records.chunks_exact(2) {
        let (w, b) = (&pair[0], &pair[1]);
        if w.layer != b.layer {
            return Err(Error::WeightFile(format!(
                "weight of layer {} followed by bias of layer {}",
                w.layer, b.layer
            )));
        }
        let layer = w.layer as usize;
        if skip.contains(&layer) {
            continue;
        }
        let spec = *net
            .layers()
            .get(layer)
            .ok_or_else(|| Error::WeightFile(format!("layer {layer} does not exist")))?;
        let Some((ws, bs)) = spec.param_shapes() else {
            return Err(Error::WeightFile(format!("layer {layer} ({spec}) has no parameters")));
        };
        if w.tensor.shape() != ws.as_slice() || b.tensor.shape() != bs.as_slice() {
            return Err(Error::WeightFile(format!(
                "layer {layer} ({spec}) expects {ws:?}/{bs:?}, file has {:?}/{:?}",
                w.tensor.shape(),
                b.tensor.shape()
            )));
        }
        net.set_layer(
            layer,
            spec,
            Some(Params {
                weight: w.tensor.clone(),
                bias: b.tensor.clone(),
            }),
        )?;
        loaded += 1;
    }
    Ok(loaded)
}
