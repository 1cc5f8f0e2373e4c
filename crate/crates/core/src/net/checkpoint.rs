//! Binary checkpoints.
//!
//! Layout, all integers little-endian:
//! `b"MTNN"`, u32 version, u64 length + config JSON, u64 step, then each
//! tensor as u64 length + f64 values: for every hidden layer its weights
//! (row-major) and bias, then the head weights.

use std::path::Path;

use super::{Layer, MultitaskNetwork, NetError, NetworkConfig};

const MAGIC: &[u8; 4] = b"MTNN";
pub const CHECKPOINT_VERSION: u32 = 1;

impl MultitaskNetwork {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(32 + self.parameter_count() * 8);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        let json = serde_json::to_vec(&self.config).expect("config serializes");
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
        out.extend_from_slice(&self.step.to_le_bytes());
        let mut tensor = |t: &[f64]| {
            out.extend_from_slice(&(t.len() as u64).to_le_bytes());
            for v in t {
                out.extend_from_slice(&v.to_le_bytes());
            }
        };
        for l in &self.layers {
            tensor(&l.to_row_major());
            tensor(&l.bias);
        }
        tensor(&self.heads);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, NetError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(NetError::Checkpoint("bad magic".into()));
        }
        let version = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
        if version != CHECKPOINT_VERSION {
            return Err(NetError::Checkpoint(format!("unsupported version {version}")));
        }
        let len = r.u64()? as usize;
        let config: NetworkConfig =
            serde_json::from_slice(r.take(len)?).map_err(|e| NetError::Checkpoint(format!("config: {e}")))?;
        config.validate()?;
        let step = r.u64()?;
        let mut layers = Vec::new();
        let mut n_in = config.input_dim;
        for &n_out in &config.hidden_sizes {
            let weights = r.tensor(n_in * n_out)?;
            let bias = r.tensor(n_out)?;
            layers.push(Layer::from_row_major(n_in, n_out, &weights, bias));
            n_in = n_out;
        }
        let heads = r.tensor(config.n_tasks * 2 * config.top_width())?;
        if r.pos != bytes.len() {
            return Err(NetError::Checkpoint(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        Ok(MultitaskNetwork { config, layers, heads, step })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], NetError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| NetError::Checkpoint("truncated".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64, NetError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn tensor(&mut self, expected: usize) -> Result<Vec<f64>, NetError> {
        let len = self.u64()? as usize;
        if len != expected {
            return Err(NetError::Checkpoint(format!("tensor of {len} values, expected {expected}")));
        }
        let raw = self.take(len.checked_mul(8).ok_or_else(|| NetError::Checkpoint("overflow".into()))?)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

pub fn save_checkpoint(net: &MultitaskNetwork, path: &Path) -> Result<(), NetError> {
    std::fs::write(path, net.to_bytes()).map_err(|source| NetError::Io { path: path.to_path_buf(), source })
}

pub fn load_checkpoint(path: &Path) -> Result<MultitaskNetwork, NetError> {
    let bytes = std::fs::read(path).map_err(|source| NetError::Io { path: path.to_path_buf(), source })?;
    MultitaskNetwork::from_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let cfg = NetworkConfig { input_dim: 32, hidden_sizes: vec![8, 3], n_tasks: 2, ..Default::default() };
        let mut net = MultitaskNetwork::init(cfg).unwrap();
        net.step = 17;
        net.heads[0] = -0.0;
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("net.bin");
        save_checkpoint(&net, &p).unwrap();
        let back = load_checkpoint(&p).unwrap();
        assert_eq!(back.to_bytes(), net.to_bytes());
        assert_eq!(back.step(), 17);
    }

    #[test]
    fn corrupt_input() {
        let net = MultitaskNetwork::init(NetworkConfig { input_dim: 4, hidden_sizes: vec![2], ..Default::default() })
            .unwrap();
        let bytes = net.to_bytes();
        assert!(MultitaskNetwork::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(MultitaskNetwork::from_bytes(&bad).is_err());
        let mut long = bytes;
        long.push(0);
        assert!(MultitaskNetwork::from_bytes(&long).is_err());
    }
}
