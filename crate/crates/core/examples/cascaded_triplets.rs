//! Sample a cascaded triplet dataset and check its tier structure.

use seannet::triplets::{gen_dataset, TripletOptions};
use seannet::world::{gen_world, WorldConfig};

fn main() -> seannet::Result<()> {
    let worlds = vec![
        gen_world(1, &WorldConfig::default())?,
        gen_world(2, &WorldConfig::default())?,
    ];
    let dataset = gen_dataset(&worlds, 1000, 5, &TripletOptions::default())?;
    println!("tier histogram {:?}", dataset.histogram());
    for t in &dataset.triplets {
        t.check_rule()?;
    }
    for tier in 1..=5 {
        let t = dataset.triplets.iter().find(|t| t.tier == tier).expect("every tier present");
        println!(
            "tier {tier}: anchor {} positive {} ({:?}) negative {} ({:?})",
            t.anchor.pose, t.positive.pose, t.positive_deviation, t.negative.pose, t.negative_deviation
        );
    }
    Ok(())
}
