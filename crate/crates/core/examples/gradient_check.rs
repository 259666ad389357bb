//! Compare backpropagated similarity gradients with central differences.

use seannet::model::{ModelConfig, SeanNet};
use seannet::world::{gen_world, render_observation, CameraConfig, Observation, WorldConfig};

fn main() -> seannet::Result<()> {
    let world = gen_world(1, &WorldConfig::default())?;
    let camera = CameraConfig::default();
    let views: Vec<Observation> = world
        .reachable_poses()
        .iter()
        .map(|p| render_observation(&world, p, &camera))
        .collect::<seannet::Result<Vec<_>>>()?
        .into_iter()
        .filter(|o| o.detections.len() == 4)
        .take(2)
        .collect();
    let config = ModelConfig {
        object_dim: 16,
        gcn_dims: [8, 6, 4],
        sg_dim: 16,
        scene_dim: 16,
        pe_dim: 8,
        word_dim: 8,
        dropout: 0.0,
        ..ModelConfig::desk()
    };
    let net = SeanNet::new(config, 7)?;
    let (a, b) = (net.encode(&views[0])?, net.encode(&views[1])?);
    let (s, grads) = net.similarity_with_gradients(&a, &b)?;
    println!("similarity {s:.6}");

    let h = 1e-5;
    for (name, t) in net.params.iter() {
        let mut worst: f64 = 0.0;
        for idx in (0..t.len()).step_by(11) {
            let mut probe = net.clone();
            probe.params.get_mut(name).expect("known name").data_mut()[idx] += h;
            let up = probe.similarity_encoded(&a, &b)?;
            probe.params.get_mut(name).expect("known name").data_mut()[idx] -= 2.0 * h;
            let down = probe.similarity_encoded(&a, &b)?;
            let numeric = (up - down) / (2.0 * h);
            let analytic = grads.get(name).expect("known name").data()[idx];
            worst = worst.max((numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-6));
        }
        println!("{name:24} max relative error {worst:.2e}");
    }
    Ok(())
}
