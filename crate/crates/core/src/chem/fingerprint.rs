use std::fmt;

use super::ChemError;

pub const DEFAULT_NBITS: usize = 1024;

/// Fixed-length bit vector.
///
/// The hex form lists bytes in increasing bit order: byte `k` holds bits
/// `8k..8k+8`, least significant bit first. Every `nbits` is a power of two
/// and at least 8 when hex encoded.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    words: Vec<u64>,
    nbits: usize,
}

impl Fingerprint {
    pub fn new(nbits: usize) -> Result<Self, ChemError> {
        if nbits == 0 || !nbits.is_power_of_two() {
            return Err(ChemError::BadLength(nbits));
        }
        Ok(Fingerprint { words: vec![0; nbits.div_ceil(64)], nbits })
    }

    pub fn nbits(&self) -> usize {
        self.nbits
    }

    pub fn set(&mut self, bit: usize) {
        assert!(bit < self.nbits, "bit {bit} out of range for {} bits", self.nbits);
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn clear(&mut self, bit: usize) {
        assert!(bit < self.nbits);
        self.words[bit / 64] &= !(1 << (bit % 64));
    }

    pub fn get(&self, bit: usize) -> bool {
        bit < self.nbits && self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn popcount(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Indices of set bits in increasing order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let tz = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + tz)
                }
            })
        })
    }

    pub fn from_indices(nbits: usize, indices: &[usize]) -> Result<Self, ChemError> {
        let mut fp = Fingerprint::new(nbits)?;
        for &i in indices {
            if i >= nbits {
                return Err(ChemError::Encoding(format!("index {i} >= {nbits}")));
            }
            fp.set(i);
        }
        Ok(fp)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.nbits];
        for i in self.ones() {
            v[i] = 1.0;
        }
        v
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let nbytes = self.nbits.div_ceil(8);
        self.words.iter().flat_map(|w| w.to_le_bytes()).take(nbytes).collect()
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }

    pub fn from_hex(nbits: usize, s: &str) -> Result<Self, ChemError> {
        let bytes = hex::decode(s).map_err(|e| ChemError::Encoding(e.to_string()))?;
        let mut fp = Fingerprint::new(nbits)?;
        if bytes.len() != nbits.div_ceil(8) {
            return Err(ChemError::Encoding(format!(
                "expected {} hex bytes for {nbits} bits, found {}",
                nbits.div_ceil(8),
                bytes.len()
            )));
        }
        for (i, &b) in bytes.iter().enumerate() {
            fp.words[i / 8] |= u64::from(b) << (8 * (i % 8));
        }
        if nbits < 8 && fp.ones().any(|i| i >= nbits) {
            return Err(ChemError::Encoding("bits set beyond the fingerprint length".into()));
        }
        Ok(fp)
    }

    /// Space-separated list of set bit indices.
    pub fn to_sparse_string(&self) -> String {
        self.ones().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
    }

    pub fn from_sparse_string(nbits: usize, s: &str) -> Result<Self, ChemError> {
        let idx = s
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|e| ChemError::Encoding(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Fingerprint::from_indices(nbits, &idx)
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }
}

impl fmt::Debug for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fingerprint({} bits, on: [{}])", self.nbits, self.to_sparse_string())
    }
}

/// Jaccard similarity of the set bits; two empty fingerprints score 1.
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64, ChemError> {
    if a.nbits != b.nbits {
        return Err(ChemError::LengthMismatch(a.nbits, b.nbits));
    }
    let (mut both, mut either) = (0u32, 0u32);
    for (x, y) in a.words().iter().zip(b.words()) {
        both += (x & y).count_ones();
        either += (x | y).count_ones();
    }
    if either == 0 {
        return Ok(1.0);
    }
    Ok(f64::from(both) / f64::from(either))
}
