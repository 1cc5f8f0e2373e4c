use std::collections::{BTreeSet, HashSet};

use super::{stable_hash, ChemError, Fingerprint, Molecule};

pub const MAX_RADIUS: u32 = 8;

/// Initial identifier of an atom: a hash of element, heavy degree, total
/// hydrogen count, formal charge, aromaticity and ring membership.
pub fn atom_invariant(mol: &Molecule, atom: usize) -> u64 {
    let a = &mol.atoms[atom];
    stable_hash(&[
        u64::from(a.element.atomic_number()),
        mol.degree(atom) as u64,
        u64::from(a.total_h_count()),
        a.formal_charge as i64 as u64,
        u64::from(a.aromatic),
        u64::from(a.ring_member),
    ])
}

/// Identifiers of all distinct circular fragments up to `radius` bonds.
///
/// Layer 0 contributes one identifier per atom. At each further layer an
/// atom's identifier is rehashed with the sorted `(bond order, neighbour
/// identifier)` pairs of the previous layer. A new identifier is kept only
/// if the set of bonds it covers grew and was not already covered by a
/// fragment from an earlier layer; fragments of the same layer with equal
/// bond sets keep the smallest identifier. Isolated atoms keep their layer-0
/// identifier.
pub fn fragment_identifiers(mol: &Molecule, radius: u32) -> Result<Vec<u64>, ChemError> {
    if radius > MAX_RADIUS {
        return Err(ChemError::RadiusTooLarge(radius));
    }
    if mol.is_empty() {
        return Err(ChemError::EmptyMolecule);
    }
    let n = mol.atom_count();
    let nb = mol.bonds.len();
    let mut ids: Vec<u64> = (0..n).map(|i| atom_invariant(mol, i)).collect();
    let mut emitted: BTreeSet<u64> = ids.iter().copied().collect();

    let mut cover: Vec<Vec<bool>> = vec![vec![false; nb]; n];
    let mut seen_covers: HashSet<Vec<bool>> = HashSet::new();

    for layer in 1..=radius {
        let mut next_ids = ids.clone();
        let mut next_cover = cover.clone();
        let mut candidates: Vec<(Vec<bool>, u64)> = Vec::new();
        for atom in 0..n {
            if mol.degree(atom) == 0 {
                continue;
            }
            let mut env: Vec<(u64, u64)> = mol.neighbors(atom).map(|(w, o)| (o.code(), ids[w])).collect();
            env.sort_unstable();
            let mut words = Vec::with_capacity(2 + 2 * env.len());
            words.push(u64::from(layer));
            words.push(ids[atom]);
            for (o, id) in env {
                words.push(o);
                words.push(id);
            }
            next_ids[atom] = stable_hash(&words);

            let c = &mut next_cover[atom];
            for &bi in mol.bonds_of(atom) {
                c[bi] = true;
                let w = mol.bonds[bi].other(atom);
                for (k, &covered) in cover[w].iter().enumerate() {
                    if covered {
                        c[k] = true;
                    }
                }
            }
            if *c != cover[atom] && !seen_covers.contains(c) {
                candidates.push((c.clone(), next_ids[atom]));
            }
        }
        candidates.sort();
        let mut last: Option<&Vec<bool>> = None;
        for (c, id) in &candidates {
            if last != Some(c) {
                emitted.insert(*id);
                last = Some(c);
            }
        }
        for (c, _) in candidates {
            seen_covers.insert(c);
        }
        ids = next_ids;
        cover = next_cover;
    }
    Ok(emitted.into_iter().collect())
}

/// Folds the fragment identifiers into `nbits` bits via `id mod nbits`.
pub fn ecfp(mol: &Molecule, radius: u32, nbits: usize) -> Result<Fingerprint, ChemError> {
    let mut fp = Fingerprint::new(nbits)?;
    for id in fragment_identifiers(mol, radius)? {
        fp.set((id % nbits as u64) as usize);
    }
    Ok(fp)
}

/// Radius-2 fingerprint with the default length.
pub fn ecfp4(mol: &Molecule) -> Result<Fingerprint, ChemError> {
    ecfp(mol, 2, super::DEFAULT_NBITS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;

    fn mol(s: &str) -> Molecule {
        parse_smiles(s).unwrap()
    }

    #[test]
    fn invariants() {
        let m = mol("CC");
        assert_eq!(atom_invariant(&m, 0), atom_invariant(&m, 1));
        let m = mol("CO");
        assert_ne!(atom_invariant(&m, 0), atom_invariant(&m, 1));
        let m = mol("CCC");
        assert_ne!(atom_invariant(&m, 0), atom_invariant(&m, 1));
        assert_eq!(atom_invariant(&m, 0), atom_invariant(&m, 2));
    }

    #[test]
    fn methane_sets_one_bit() {
        let fp = ecfp(&mol("C"), 2, 1024).unwrap();
        assert_eq!(fp.popcount(), 1);
    }

    #[test]
    fn ethanol_fragment_count() {
        // Hand enumeration: three atom environments at layer 0, three
        // distinct one-bond neighbourhoods ({C0-C1}, {C0-C1,C1-O}, {C1-O}) at
        // layer 1, and every layer-2 neighbourhood repeats the full bond set.
        let ids = fragment_identifiers(&mol("CCO"), 2).unwrap();
        assert_eq!(ids.len(), 6);
        let fp = ecfp(&mol("CCO"), 2, 1024).unwrap();
        assert!(fp.popcount() <= 9);
        assert_eq!(fp.popcount(), 6);
    }

    #[test]
    fn errors() {
        assert!(matches!(ecfp(&mol("C"), 9, 1024), Err(ChemError::RadiusTooLarge(9))));
        assert!(matches!(ecfp(&mol("C"), 2, 1000), Err(ChemError::BadLength(1000))));
        let empty = parse_smiles("[H][H]").unwrap();
        assert!(matches!(ecfp(&empty, 2, 1024), Err(ChemError::EmptyMolecule)));
    }

    #[test]
    fn atom_order_does_not_matter() {
        for (a, b) in [("CCO", "OCC"), ("c1ccccc1O", "Oc1ccccc1"), ("CC(=O)N", "NC(C)=O"), ("C1CCNCC1", "N1CCCCC1")] {
            assert_eq!(ecfp(&mol(a), 2, 2048).unwrap(), ecfp(&mol(b), 2, 2048).unwrap(), "{a} vs {b}");
        }
    }

    #[test]
    fn deterministic() {
        let m = mol("CC(C)Cc1ccc(cc1)C(C)C(=O)O");
        assert_eq!(ecfp(&m, 2, 1024).unwrap(), ecfp(&m, 2, 1024).unwrap());
    }
}
