use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::map::{plan, Action, SubNodeId, TopoMap};
use crate::error::{Error, Result};
use crate::model::{localize, SceneEmbedder};
use crate::rng::{derive_seed, rng_from_seed};
use crate::tensor::cosine;
use crate::world::{apply_dynamics, render_observation, CameraConfig, Observation, Pose, WorldState};

/// Correct action towards `target`, which must be one translation step
/// away in the robot frame or the same cell at another heading. With
/// probability `p_err` a uniformly chosen different action is returned.
pub fn oracle_navigator(current: &Pose, target: &Pose, p_err: f64, seed: u64) -> Result<Action> {
    let correct = correct_action(current, target)?;
    let mut rng = rng_from_seed(seed);
    if rng.random::<f64>() < p_err {
        let others: Vec<Action> = Action::ALL.iter().copied().filter(|&a| a != correct).collect();
        return Ok(others[rng.random_range(0..others.len())]);
    }
    Ok(correct)
}

fn correct_action(current: &Pose, target: &Pose) -> Result<Action> {
    if current.cell() == target.cell() {
        return match (target.heading.quarter_turns() - current.heading.quarter_turns()).rem_euclid(4) {
            1 | 2 => Ok(Action::RotateLeft90),
            3 => Ok(Action::RotateRight90),
            _ => Err(Error::Usage(format!("already at {target}"))),
        };
    }
    if current.heading == target.heading {
        for a in [Action::Forward, Action::Leftward, Action::Rightward] {
            if a.apply(current) == *target {
                return Ok(a);
            }
        }
    }
    Err(Error::Usage(format!(
        "{target} is neither one step nor a rotation away from {current}"
    )))
}

/// Next single-step waypoint from `current` towards `goal`: sideways or
/// forward moves first, then turns once the cell matches. A goal straight
/// behind is approached by turning.
fn waypoint(current: &Pose, goal: &Pose) -> Pose {
    if current.cell() == goal.cell() {
        let turn = (goal.heading.quarter_turns() - current.heading.quarter_turns()).rem_euclid(4);
        return current.with_heading(current.heading.rotated(if turn == 3 { -1 } else { 1 }));
    }
    let (dx, dy) = (goal.i - current.i, goal.j - current.j);
    let (fx, fy) = current.heading.forward();
    let (lx, ly) = current.heading.left();
    let ahead = dx * fx + dy * fy;
    let left = dx * lx + dy * ly;
    if ahead > 0 {
        Action::Forward.apply(current)
    } else if left > 0 {
        Action::Leftward.apply(current)
    } else if left < 0 {
        Action::Rightward.apply(current)
    } else {
        current.with_heading(current.heading.rotated(1))
    }
}

/// A localization decision for one query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub similarity: f64,
    pub localized: bool,
}

/// Decides whether the current observation matches a map sub-node.
pub trait Localizer {
    /// Called once before trials on `map`.
    fn prepare(&mut self, map: &TopoMap) -> Result<()>;

    fn check(&self, current: &Observation, target: SubNodeId, map: &TopoMap) -> Result<Decision>;
}

/// Compares true poses; never wrong.
#[derive(Debug, Clone, Copy, Default)]
pub struct GroundTruthLocalizer;

impl Localizer for GroundTruthLocalizer {
    fn prepare(&mut self, _map: &TopoMap) -> Result<()> {
        Ok(())
    }

    fn check(&self, current: &Observation, target: SubNodeId, map: &TopoMap) -> Result<Decision> {
        let same = current.pose == map.pose(target);
        Ok(Decision {
            similarity: if same { 1.0 } else { 0.0 },
            localized: same,
        })
    }
}

/// Thresholded cosine similarity of scene embeddings.
pub struct SimilarityLocalizer<'a, E: SceneEmbedder> {
    pub embedder: &'a E,
    pub epsilon: f64,
    cache: Vec<[Vec<f64>; 4]>,
}

impl<'a, E: SceneEmbedder> SimilarityLocalizer<'a, E> {
    pub fn new(embedder: &'a E, epsilon: f64) -> Self {
        Self {
            embedder,
            epsilon,
            cache: Vec::new(),
        }
    }
}

impl<E: SceneEmbedder> Localizer for SimilarityLocalizer<'_, E> {
    fn prepare(&mut self, map: &TopoMap) -> Result<()> {
        self.cache = map
            .nodes
            .iter()
            .map(|n| {
                let v: Vec<Vec<f64>> = n
                    .observations
                    .iter()
                    .map(|o| self.embedder.embed(o))
                    .collect::<Result<_>>()?;
                Ok(v.try_into().expect("four headings"))
            })
            .collect::<Result<_>>()?;
        Ok(())
    }

    fn check(&self, current: &Observation, target: SubNodeId, map: &TopoMap) -> Result<Decision> {
        let stored = match self.cache.get(target.node) {
            Some(v) if self.cache.len() == map.nodes.len() => v[target.heading.quarter_turns() as usize].clone(),
            _ => self.embedder.embed(map.observation(target))?,
        };
        let similarity = cosine(&self.embedder.embed(current)?, &stored)?;
        Ok(Decision {
            similarity,
            localized: localize(similarity, self.epsilon),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    NavigationFailure,
    LocalizationFailure,
    Collision,
}

impl Outcome {
    pub const ALL: [Outcome; 4] = [
        Outcome::Success,
        Outcome::NavigationFailure,
        Outcome::LocalizationFailure,
        Outcome::Collision,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentLog {
    pub from: SubNodeId,
    pub to: SubNodeId,
    pub rotation: bool,
    pub actions: Vec<Action>,
    pub similarities: Vec<f64>,
    pub decisions: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub outcome: Outcome,
    /// Translation actions plus one per rotation segment.
    pub steps: usize,
    pub final_pose: Pose,
    pub segments: Vec<SegmentLog>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    /// Step budget per translation segment.
    pub k_max: usize,
    /// Optional step budget for the whole trial.
    pub trial_cap: Option<usize>,
    pub p_err: f64,
    pub camera: CameraConfig,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            k_max: 12,
            trial_cap: None,
            p_err: 0.05,
            camera: CameraConfig::default(),
        }
    }
}

/// Navigate from `start` to `goal` in `world` using `map` (built earlier,
/// possibly before the objects moved).
///
/// Rotation segments are executed directly. Translation segments repeat
/// observe, localize, act until the localizer fires; firing away from the
/// segment target or staying silent on it ends the trial as a localization
/// failure, judged against the true pose.
pub fn run_trial(
    world: &WorldState,
    map: &TopoMap,
    localizer: &impl Localizer,
    start: SubNodeId,
    goal: SubNodeId,
    config: &TrialConfig,
    seed: u64,
) -> Result<TrialResult> {
    let (path, _) = plan(map, start, goal)?;
    let mut pose = map.pose(start);
    let mut steps = 0;
    let mut segments: Vec<SegmentLog> = Vec::new();
    let finish = |outcome, steps, pose, segments| {
        Ok(TrialResult {
            outcome,
            steps,
            final_pose: pose,
            segments,
        })
    };

    for (k, w) in path.windows(2).enumerate() {
        let (from, to) = (w[0], w[1]);
        let target = map.pose(to);
        let mut log = SegmentLog {
            from,
            to,
            rotation: from.node == to.node,
            actions: Vec::new(),
            similarities: Vec::new(),
            decisions: Vec::new(),
        };
        if log.rotation {
            while pose.heading != target.heading {
                let a = correct_action(&pose, &target.with_heading(target.heading))?;
                log.actions.push(a);
                pose = a.apply(&pose);
            }
            steps += 1;
            segments.push(log);
            continue;
        }
        let mut seg_steps = 0;
        loop {
            let obs = render_observation(world, &pose, &config.camera)?;
            let d = localizer.check(&obs, to, map)?;
            log.similarities.push(d.similarity);
            log.decisions.push(d.localized);
            let at_target = pose == target;
            if d.localized != at_target {
                segments.push(log);
                return finish(Outcome::LocalizationFailure, steps, pose, segments);
            }
            if at_target {
                break;
            }
            if seg_steps >= config.k_max || config.trial_cap.is_some_and(|cap| steps >= cap) {
                segments.push(log);
                return finish(Outcome::NavigationFailure, steps, pose, segments);
            }
            let next = waypoint(&pose, &target);
            let action = oracle_navigator(
                &pose,
                &next,
                config.p_err,
                derive_seed(seed, "navigator", &[k as u64, seg_steps as u64]),
            )?;
            log.actions.push(action);
            seg_steps += 1;
            steps += 1;
            let moved = action.apply(&pose);
            if !world.is_reachable(&moved) {
                segments.push(log);
                return finish(Outcome::Collision, steps, pose, segments);
            }
            pose = moved;
        }
        segments.push(log);
    }

    // confirm arrival when the path ended with turns (or was empty)
    if segments.last().is_none_or(|s| s.rotation) {
        let obs = render_observation(world, &pose, &config.camera)?;
        let d = localizer.check(&obs, goal, map)?;
        let at_goal = pose == map.pose(goal);
        if d.localized != at_goal {
            return finish(Outcome::LocalizationFailure, steps, pose, segments);
        }
    }
    finish(Outcome::Success, steps, pose, segments)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkMode {
    /// Goal is a translation neighbour of the start, same heading.
    Neighbor,
    /// Goal is any other connected sub-node.
    Arbitrary,
}

impl BenchmarkMode {
    pub fn label(self) -> &'static str {
        match self {
            BenchmarkMode::Neighbor => "neighbor",
            BenchmarkMode::Arbitrary => "arbitrary",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub mode: BenchmarkMode,
    pub total: usize,
    pub success: f64,
    pub navigation_failure: f64,
    pub localization_failure: f64,
    pub collision: f64,
    pub outcomes: Vec<Outcome>,
}

impl BenchmarkReport {
    fn from_outcomes(mode: BenchmarkMode, outcomes: Vec<Outcome>) -> Self {
        let n = outcomes.len().max(1) as f64;
        let rate = |o| outcomes.iter().filter(|&&x| x == o).count() as f64 / n;
        Self {
            mode,
            total: outcomes.len(),
            success: rate(Outcome::Success),
            navigation_failure: rate(Outcome::NavigationFailure),
            localization_failure: rate(Outcome::LocalizationFailure),
            collision: rate(Outcome::Collision),
            outcomes,
        }
    }

    pub const CSV_HEADER: &'static str =
        "mode,total,success_pct,navigation_failure_pct,localization_failure_pct,collision_pct";

    pub fn csv_row(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "{},{},{:.2},{:.2},{:.2},{:.2}",
            self.mode.label(),
            self.total,
            100.0 * self.success,
            100.0 * self.navigation_failure,
            100.0 * self.localization_failure,
            100.0 * self.collision
        );
        s
    }
}

/// One benchmark trial: world index, start, goal and seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialSpec {
    pub world: usize,
    pub start: SubNodeId,
    pub goal: SubNodeId,
    pub seed: u64,
}

/// Draw `n` trials over the maps; the same seed gives the same trials.
pub fn sample_trials(maps: &[TopoMap], n: usize, mode: BenchmarkMode, seed: u64) -> Result<Vec<TrialSpec>> {
    let usable: Vec<usize> = (0..maps.len()).filter(|&k| !maps[k].edges.is_empty()).collect();
    if usable.is_empty() {
        return Err(Error::Usage("no map has translation edges".into()));
    }
    let mut out = Vec::with_capacity(n);
    let mut rng = rng_from_seed(derive_seed(seed, "trials", &[]));
    while out.len() < n {
        let w = usable[rng.random_range(0..usable.len())];
        let map = &maps[w];
        let subs: Vec<SubNodeId> = map.sub_nodes().collect();
        let start = subs[rng.random_range(0..subs.len())];
        let goal = match mode {
            BenchmarkMode::Neighbor => {
                let moves: Vec<SubNodeId> = map
                    .neighbors(start)
                    .into_iter()
                    .map(|(s, _)| s)
                    .filter(|s| s.node != start.node)
                    .collect();
                if moves.is_empty() {
                    continue;
                }
                moves[rng.random_range(0..moves.len())]
            }
            BenchmarkMode::Arbitrary => {
                let goal = subs[rng.random_range(0..subs.len())];
                if goal.node == start.node || plan(map, start, goal).is_err() {
                    continue;
                }
                goal
            }
        };
        let trial_seed = rng.random();
        out.push(TrialSpec {
            world: w,
            start,
            goal,
            seed: trial_seed,
        });
    }
    Ok(out)
}

/// Run trials with object dynamics applied between mapping and navigation.
pub fn run_benchmark(
    worlds: &[WorldState],
    maps: &[TopoMap],
    localizer: &mut impl Localizer,
    trials: &[TrialSpec],
    mode: BenchmarkMode,
    config: &TrialConfig,
) -> Result<BenchmarkReport> {
    if worlds.len() != maps.len() {
        return Err(Error::Usage("one map per world is required".into()));
    }
    let mut outcomes = vec![Outcome::Success; trials.len()];
    for w in 0..worlds.len() {
        let mine: Vec<usize> = (0..trials.len()).filter(|&k| trials[k].world == w).collect();
        if mine.is_empty() {
            continue;
        }
        localizer.prepare(&maps[w])?;
        for k in mine {
            let t = &trials[k];
            let moved = apply_dynamics(&worlds[w], derive_seed(t.seed, "benchmark_dynamics", &[]));
            outcomes[k] = run_trial(&moved, &maps[w], localizer, t.start, t.goal, config, t.seed)?.outcome;
        }
    }
    Ok(BenchmarkReport::from_outcomes(mode, outcomes))
}
