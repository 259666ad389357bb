//! Train the scene embedder on two rooms, then pick a localization
//! threshold and compare it with untrained weights on navigation trials.
//!
//! cargo run --release --example train_localizer -- [epochs] [n_triplets]

use seannet::model::{ModelConfig, SeanNet};
use seannet::navigation::{
    build_topo_map, default_places, run_benchmark, sample_trials, BenchmarkMode, RotationModel, SimilarityLocalizer,
    TopoMap, TrialConfig,
};
use seannet::training::{
    encode_dataset, evaluate_encoded, select_threshold, similarity_stats, train, HyperParams, ThresholdMethod,
};
use seannet::triplets::{gen_dataset, TripletOptions};
use seannet::world::{gen_world, CameraConfig, WorldConfig};

fn main() -> seannet::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<usize>().expect("numeric argument"));
    let epochs = args.next().unwrap_or(30);
    let n = args.next().unwrap_or(2000);

    let worlds = vec![
        gen_world(1, &WorldConfig::default())?,
        gen_world(2, &WorldConfig::default())?,
    ];
    let options = TripletOptions::default();
    let initial = SeanNet::new(ModelConfig::desk(), 0)?;
    let train_set = encode_dataset(&initial, &gen_dataset(&worlds, n, 10, &options)?)?;
    let val_set = encode_dataset(&initial, &gen_dataset(&worlds, 200, 11, &options)?)?;
    let test_set = encode_dataset(&initial, &gen_dataset(&worlds, 500, 12, &options)?)?;

    let hp = HyperParams {
        epochs,
        ..HyperParams::default()
    };
    let outcome = train(initial.clone(), &train_set, &val_set, &hp, |m| {
        println!(
            "epoch {:2} lr {:.5} loss {:.4} val {:.3}",
            m.epoch,
            m.lr,
            m.train_loss,
            m.val_accuracy.unwrap_or(f64::NAN)
        );
    })?;
    let trained = outcome.model;
    for (name, model) in [("untrained", &initial), ("trained", &trained)] {
        let e = evaluate_encoded(model, &test_set)?;
        println!(
            "{name:9} held-out accuracy {:.3}  mean s_AP {:.3}  mean s_AN {:.3}",
            e.accuracy, e.mean_s_ap, e.mean_s_an
        );
    }

    let camera = CameraConfig::default();
    let maps: Vec<TopoMap> = worlds
        .iter()
        .map(|w| build_topo_map(w, &default_places(w, 4), &camera, RotationModel::default()))
        .collect::<seannet::Result<_>>()?;
    let trials = sample_trials(&maps, 100, BenchmarkMode::Neighbor, 7)?;
    for (name, model) in [("untrained", &initial), ("trained", &trained)] {
        let stats = similarity_stats(model, &worlds[0], &camera, 30, 5)?;
        let eps = select_threshold(&stats, ThresholdMethod::default())?;
        let means: Vec<String> = (0..=3)
            .map(|k| format!("{:.3}", stats.mean_at_distance(k).unwrap_or(f64::NAN)))
            .collect();
        let mut localizer = SimilarityLocalizer::new(model, eps);
        let report = run_benchmark(&worlds, &maps, &mut localizer, &trials, BenchmarkMode::Neighbor, &TrialConfig::default())?;
        println!(
            "{name:9} similarity by offset {}  threshold {eps:.3}  neighbor success {:.0}%",
            means.join(" "),
            100.0 * report.success
        );
    }
    Ok(())
}
