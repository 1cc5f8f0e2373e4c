//! Molecule parsing and circular fingerprints.
//!
//! SMILES strings are parsed into heavy-atom graphs ([`Molecule`]) with
//! implicit hydrogens counted on each atom. [`ecfp`] then grows circular
//! fragments around every atom and folds their identifiers into a
//! fixed-length [`Fingerprint`].
//!
//! ```
//! use mtscreen::chem::{ecfp, parse_smiles, tanimoto};
//!
//! let ethanol = parse_smiles("CCO").unwrap();
//! let reversed = parse_smiles("OCC").unwrap();
//! let a = ecfp(&ethanol, 2, 1024).unwrap();
//! let b = ecfp(&reversed, 2, 1024).unwrap();
//! assert_eq!(a, b);
//! assert_eq!(tanimoto(&a, &b).unwrap(), 1.0);
//! ```

mod ecfp;
mod element;
mod fingerprint;
mod hash;
mod molecule;
mod smiles;

pub use ecfp::{atom_invariant, ecfp, ecfp4, fragment_identifiers, MAX_RADIUS};
pub use element::Element;
pub use fingerprint::{tanimoto, Fingerprint, DEFAULT_NBITS};
pub use hash::{stable_hash, StableHasher};
pub use molecule::{Atom, Bond, BondOrder, Molecule};
pub use smiles::{parse_smiles, to_smiles};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChemError {
    #[error("SMILES syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("atom {atom} ({element}) exceeds its allowed valence")]
    Valence { atom: usize, element: String },
    #[error("molecule has no heavy atoms")]
    EmptyMolecule,
    #[error("radius {0} exceeds the supported maximum of {MAX_RADIUS}")]
    RadiusTooLarge(u32),
    #[error("fingerprint length {0} is not a positive power of two")]
    BadLength(usize),
    #[error("fingerprint lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("malformed fingerprint encoding: {0}")]
    Encoding(String),
}

impl ChemError {
    pub(crate) fn syntax(offset: usize, message: impl Into<String>) -> Self {
        ChemError::Syntax { offset, message: message.into() }
    }
}

/// Outcome of featurizing a batch of SMILES strings.
#[derive(Debug, Clone, Default)]
pub struct FeaturizeSummary {
    pub total: usize,
    pub parsed: usize,
    pub failed: usize,
}

impl FeaturizeSummary {
    pub fn failure_rate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.failed as f64 / self.total as f64
        }
    }
}

/// Featurizes each SMILES string; failures are returned in place as errors
/// and tallied in the summary.
pub fn featurize_batch<'a, I>(
    smiles: I,
    radius: u32,
    nbits: usize,
) -> (Vec<Result<Fingerprint, ChemError>>, FeaturizeSummary)
where
    I: IntoIterator<Item = &'a str>,
{
    let mut summary = FeaturizeSummary::default();
    let out: Vec<_> = smiles
        .into_iter()
        .map(|s| {
            summary.total += 1;
            let fp = parse_smiles(s).and_then(|m| ecfp(&m, radius, nbits));
            match fp {
                Ok(_) => summary.parsed += 1,
                Err(_) => summary.failed += 1,
            }
            fp
        })
        .collect();
    (out, summary)
}
