//! Parses SMILES, computes ECFP4 fingerprints and compares molecules.
//!
//! `cargo run --example featurize`

use mtscreen::chem::{ecfp4, featurize_batch, parse_smiles, tanimoto, DEFAULT_NBITS};

fn main() {
    let molecules = [
        ("aspirin", "CC(=O)Oc1ccccc1C(=O)O"),
        ("salicylic acid", "OC(=O)c1ccccc1O"),
        ("caffeine", "Cn1cnc2c1c(=O)n(C)c(=O)n2C"),
    ];
    let fps: Vec<_> = molecules.iter().map(|(_, s)| ecfp4(&parse_smiles(s).unwrap()).unwrap()).collect();
    for ((name, _), fp) in molecules.iter().zip(&fps) {
        println!("{name:>15}: {} of {DEFAULT_NBITS} bits set", fp.ones().count());
    }
    println!("aspirin vs salicylic acid: {:.3}", tanimoto(&fps[0], &fps[1]).unwrap());
    println!("aspirin vs caffeine:       {:.3}", tanimoto(&fps[0], &fps[2]).unwrap());

    let (results, summary) = featurize_batch(["CCO", "c1ccccc1", "C1CC", "N#N"], 2, 1024);
    for r in &results {
        if let Err(e) = r {
            println!("rejected: {e}");
        }
    }
    println!("{} of {} parsed ({:.0}% failed)", summary.parsed, summary.total, 100.0 * summary.failure_rate());
}
