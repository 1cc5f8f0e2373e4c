//! Renders median AUC and enrichment tables for several models, with a
//! sign-test column against a reference model.
//!
//! `cargo run --example report`

use mtscreen::cli::build_report;
use mtscreen::data::Group;
use mtscreen::metrics::ENRICHMENT_FPRS;
use mtscreen::metrics::EvalReport;

fn model(name: &str, aucs: &[(&str, Group, f64)]) -> EvalReport {
    let mut r = EvalReport::new(name, 2, 0);
    for &(id, group, auc) in aucs {
        let enrichment = ENRICHMENT_FPRS.map(|f: f64| (auc - 0.5) * 2.0 / f.sqrt());
        r.push(id, group, vec![auc - 0.01, auc + 0.01], &[enrichment.to_vec(), enrichment.to_vec()]).unwrap();
    }
    r
}

fn main() {
    let ids = [("pcba-1", Group::Pcba), ("pcba-2", Group::Pcba), ("muv-1", Group::Muv), ("dude-1", Group::Dude)];
    let with = |aucs: [f64; 4]| -> Vec<(&str, Group, f64)> { ids.iter().zip(aucs).map(|(&(i, g), a)| (i, g, a)).collect() };
    let multitask = model("pmtnn", &with([0.88, 0.84, 0.80, 0.93]));
    let forest = model("rf", &with([0.80, 0.83, 0.76, 0.95]));
    let single = model("pstnn", &with([0.82, 0.80, 0.74, 0.91]));

    println!("{}", build_report(&[multitask.clone(), forest.clone()], Some(&single), &[]).unwrap().render());
    println!("{}", build_report(&[multitask, forest], Some(&single), &[Group::Dude]).unwrap().render());
}
