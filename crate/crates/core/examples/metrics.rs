//! PAD metrics, rank-1, fusion, boxplot statistics and score histograms on
//! hand-made score records.
//!
//! ```bash
//! cargo run --example metrics
//! ```

use thermopad::eval::{
    boxplot_stats, fuse_scores, histogram_csv, pad_metrics, rank1, score_histogram, ScoreModality, ScoreRecord,
};
use thermopad::protocol::SplitMode;

fn main() -> thermopad::Result<()> {
    // two identities (labels 0, 1) and the fake class (label 2)
    let rgb = vec![
        ScoreRecord::new("a_RGB", "a", ScoreModality::Rgb, 0, vec![0.7, 0.2, 0.1]),
        ScoreRecord::new("b_RGB", "b", ScoreModality::Rgb, 1, vec![0.5, 0.4, 0.1]),
        ScoreRecord::new("c_RGB", "c", ScoreModality::Rgb, 2, vec![0.6, 0.1, 0.3]),
    ];
    let th = vec![
        ScoreRecord::new("a_TH", "a", ScoreModality::Th, 0, vec![0.8, 0.1, 0.1]),
        ScoreRecord::new("b_TH", "b", ScoreModality::Th, 1, vec![0.1, 0.8, 0.1]),
        ScoreRecord::new("c_TH", "c", ScoreModality::Th, 2, vec![0.05, 0.05, 0.9]),
    ];
    let fused = fuse_scores(&rgb, &th)?;
    for (name, records) in [("RGB", &rgb), ("TH", &th), ("FUSED", &fused)] {
        let m = pad_metrics(records);
        println!(
            "{name:<5} rank-1 {:?}  APCER {:?}  BPCER {:?}",
            rank1(records),
            m.apcer,
            m.bpcer
        );
    }

    let per_split_accuracy = [0.98, 0.99, 1.0, 1.0, 0.97, 1.0, 0.99, 0.92, 1.0, 0.99];
    println!("{:#?}", boxplot_stats(&per_split_accuracy)?);

    let bins = score_histogram(&fused, 5, SplitMode::ClosedSet)?;
    print!("{}", histogram_csv(&bins)?);
    Ok(())
}
