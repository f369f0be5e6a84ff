//! Open-set (subject-disjoint) and closed-set split plans.
//!
//! ```bash
//! cargo run --example splits
//! ```

use std::collections::BTreeSet;

use thermopad::data::{generate_synthetic_dataset, SyntheticParams};
use thermopad::protocol::{closed_set_plans, make_open_set_splits, Ratios};

fn main() -> thermopad::Result<()> {
    let d = generate_synthetic_dataset(&SyntheticParams {
        images_per_class_per_modality: 5,
        image_size: (32, 32),
        ..SyntheticParams::default()
    })?;

    for plan in make_open_set_splits(&d, 3, Ratios::default(), 0)? {
        print!("open-set split {}:", plan.split_id);
        for (name, ids) in plan.subsets() {
            let subjects: BTreeSet<u32> = ids.iter().map(|id| d.get(id).unwrap().subject_id).collect();
            print!("  {name} {subjects:?}");
        }
        println!();
    }

    let plan = &closed_set_plans(&d, 1, Ratios::default(), 0)?[0];
    println!(
        "closed-set split: {} / {} / {} samples (both modalities)",
        plan.train.len(),
        plan.val.len(),
        plan.test.len()
    );
    println!("{}", &plan.to_json()?[..200]);
    Ok(())
}
