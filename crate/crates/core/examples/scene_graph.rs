//! Extract the scene graph of a view and inspect its adjacency matrices.

use seannet::scenegraph::{build_adjacency, Relation};
use seannet::world::{gen_world, render_observation, CameraConfig, WorldConfig};

fn main() -> seannet::Result<()> {
    let world = gen_world(3, &WorldConfig::default())?;
    let camera = CameraConfig::default();
    let obs = world
        .reachable_poses()
        .into_iter()
        .map(|p| render_observation(&world, &p, &camera))
        .find(|o| o.as_ref().is_ok_and(|o| o.detections.len() >= 4))
        .expect("some view sees four objects")?;

    let sg = &obs.scene_graph;
    println!("view {} with {} nodes", obs.pose, sg.nodes.len());
    for e in sg.edges.iter().filter(|e| e.relation != Relation::Disjoint) {
        let label = |id: usize| &world.objects[id].class_label;
        println!("  {} -[{:?}]-> {}", label(e.from), e.relation, label(e.to));
    }

    let adj = build_adjacency(sg, world.max_instances)?;
    for r in Relation::PROPAGATING {
        let ones: f64 = adj.part(r).data().iter().sum();
        let norm = adj.normalized(r);
        let m = adj.size;
        let sums: Vec<String> = adj
            .detected
            .iter()
            .map(|&i| format!("{:.3}", norm.data()[i * m..(i + 1) * m].iter().sum::<f64>()))
            .collect();
        println!("{r:?}: {ones} edges, normalized row sums {}", sums.join(" "));
    }
    Ok(())
}
