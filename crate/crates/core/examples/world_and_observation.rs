//! Generate a room and look around from one reachable pose.
//!
//! cargo run --example world_and_observation -- [seed]

use seannet::world::{apply_dynamics, gen_world, render_observation, CameraConfig, Dynamics, Heading, WorldConfig};

fn main() -> seannet::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let world = gen_world(seed, &WorldConfig::default())?;
    let count = |d| world.objects.iter().filter(|o| o.dynamics == d).count();
    println!(
        "room {:?} m, {} objects ({} static, {} low-dynamic, {} high-dynamic), {} reachable cells",
        world.bounds,
        world.objects.len(),
        count(Dynamics::Static),
        count(Dynamics::LowDynamic),
        count(Dynamics::HighDynamic),
        world.reachable.len()
    );

    let camera = CameraConfig::default();
    let pose = world.reachable_poses()[world.reachable.len() / 2];
    for heading in Heading::ALL {
        let obs = render_observation(&world, &pose.with_heading(heading), &camera)?;
        let labels: Vec<&str> = obs.detections.iter().map(|d| d.class_label.as_str()).collect();
        println!("{}: {} detections {:?}", obs.pose, labels.len(), labels);
    }

    // the same view after objects have been moved around
    let moved = apply_dynamics(&world, seed + 1);
    let obs = render_observation(&moved, &pose, &camera)?;
    println!("after dynamics {}: {} detections", obs.pose, obs.detections.len());
    Ok(())
}
