//! Build a topological map, plan a route and run navigation trials.

use seannet::navigation::{
    build_topo_map, default_places, plan, run_benchmark, sample_trials, BenchmarkMode, GroundTruthLocalizer,
    RotationModel, SubNodeId, TrialConfig,
};
use seannet::world::{gen_world, CameraConfig, Heading, WorldConfig};

fn main() -> seannet::Result<()> {
    let world = gen_world(1, &WorldConfig::default())?;
    let map = build_topo_map(&world, &default_places(&world, 4), &CameraConfig::default(), RotationModel::default())?;
    println!("{} places, {} translation edges", map.nodes.len(), map.edges.len());

    let start = SubNodeId::new(0, Heading::East);
    let goal = SubNodeId::new(map.nodes.len() - 1, Heading::North);
    let (path, cost) = plan(&map, start, goal)?;
    let route: Vec<String> = path.iter().map(|s| format!("{}{:?}", s, map.nodes[s.node].cell)).collect();
    println!("route cost {cost}: {}", route.join(" -> "));

    let worlds = [world];
    let maps = [map];
    println!("{}", seannet::navigation::BenchmarkReport::CSV_HEADER);
    for (p_err, mode) in [(0.0, BenchmarkMode::Arbitrary), (0.05, BenchmarkMode::Neighbor), (0.05, BenchmarkMode::Arbitrary)] {
        let trials = sample_trials(&maps, 50, mode, 3)?;
        let config = TrialConfig {
            p_err,
            ..TrialConfig::default()
        };
        let report = run_benchmark(&worlds, &maps, &mut GroundTruthLocalizer, &trials, mode, &config)?;
        println!("{}  (ground truth, p_err {p_err})", report.csv_row());
    }
    Ok(())
}
