//! Embed views of a room and compare them by cosine similarity.

use seannet::model::{ModelConfig, SceneEmbedder, SeanNet};
use seannet::world::{apply_dynamics, gen_world, render_observation, CameraConfig, Pose, WorldConfig};

fn main() -> seannet::Result<()> {
    let world = gen_world(2, &WorldConfig::default())?;
    let camera = CameraConfig::default();
    let net = SeanNet::new(ModelConfig::desk(), 0)?;
    let anchor = world.reachable_poses()[world.reachable.len() / 2];
    let moved = apply_dynamics(&world, 9);
    let here = render_observation(&world, &anchor, &camera)?;

    let same_place = render_observation(&moved, &anchor, &camera)?;
    println!("same pose after dynamics   {:.4}", net.similarity(&here, &same_place)?);
    for (di, dj) in [(1, 0), (2, 0), (0, 3)] {
        let other = anchor.offset(di, dj);
        if world.is_reachable(&other) {
            let obs = render_observation(&world, &other, &camera)?;
            println!("offset ({di},{dj})               {:.4}", net.similarity(&here, &obs)?);
        }
    }
    let turned: Pose = anchor.with_heading(anchor.heading.rotated(2));
    let obs = render_observation(&world, &turned, &camera)?;
    println!("turned to {:3}              {:.4}", turned.heading, net.similarity(&here, &obs)?);
    Ok(())
}
