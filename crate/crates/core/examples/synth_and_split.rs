//! Generates a synthetic screening collection, writes it to disk, loads it
//! back and assigns stratified folds.
//!
//! `cargo run --example synth_and_split`

use mtscreen::data::{
    active_occurrence_rate, load_collection, stratified_kfold, synth_collection, write_collection, SynthConfig,
};

fn main() {
    let cfg = SynthConfig { n_tasks: 6, n_compounds: 1000, held_in: 4, held_out: 2, ..Default::default() };
    let c = synth_collection(&cfg).unwrap();
    let dir = std::env::temp_dir().join("mtscreen-synth-example");
    let manifest = write_collection(&c, &dir).unwrap();
    let loaded = load_collection(&manifest).unwrap().collection;
    assert_eq!(loaded.datasets.len(), c.datasets.len());
    println!("wrote {}", manifest.display());

    for d in &loaded.datasets {
        let folds = stratified_kfold(d, 5, 7).unwrap();
        let actives: Vec<usize> = (0..5)
            .map(|f| folds.test_indices(f).iter().filter(|&&i| d.records[i].label).count())
            .collect();
        let aor = active_occurrence_rate(&loaded, &d.id, &[]).unwrap();
        println!(
            "{:<10} {:>5} records, {:>3} actives, per fold {:?}, AOR {:.2}",
            d.id,
            d.records.len(),
            d.n_actives(),
            actives,
            aor.mean
        );
    }
    println!("held in {:?}, held out {:?}", loaded.held_in, loaded.held_out);
}
