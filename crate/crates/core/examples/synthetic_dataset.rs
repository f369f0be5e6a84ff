//! Generate paired RGB/TH hands, write them as a manifest with PNG images,
//! and load them back.
//!
//! ```bash
//! cargo run --example synthetic_dataset -- /tmp/hands
//! ```

use std::path::PathBuf;

use thermopad::data::{generate_with_truth, load_manifest, write_dataset, Authenticity, Modality, SyntheticParams};

fn main() -> thermopad::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("thermopad-hands"));
    let params = SyntheticParams {
        num_subjects: 5,
        images_per_class_per_modality: 4,
        ..SyntheticParams::default()
    };
    let (d, truth) = generate_with_truth(&params)?;
    println!("{} samples, {} classes", d.len(), d.num_classes());
    for m in Modality::ALL {
        println!(
            "  {m}: {} real, {} fake",
            d.count(m, Authenticity::Real),
            d.count(m, Authenticity::Fake)
        );
    }

    let mean_iou = |a: Authenticity| {
        let v: Vec<f64> = truth
            .iter()
            .filter(|t| t.authenticity == a)
            .map(|t| t.silhouette_heat_iou())
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    println!(
        "silhouette/heat IoU: real {:.3}, fake {:.3}",
        mean_iou(Authenticity::Real),
        mean_iou(Authenticity::Fake)
    );

    let manifest = write_dataset(&d, &out)?;
    let back = load_manifest(&out)?;
    println!(
        "wrote {} and reloaded {} samples (identical: {})",
        manifest.display(),
        back.len(),
        back == d
    );
    Ok(())
}
