//! Cascaded triplet datasets.
//!
//! Each triplet holds an anchor, a positive and a negative observation. The
//! five tiers fix how far the positive and negative lie from the anchor:
//!
//! | tier | share | positive | negative |
//! |------|-------|----------|----------|
//! | 1 | 50% | same pose, objects moved | 1 step |
//! | 2 | 20% | 1 step | 2 steps |
//! | 3 | 15% | 2 steps | 3 steps |
//! | 4 | 10% | 3 steps | 4 steps |
//! | 5 | 5% | 4 steps | same cell, turned |
//!
//! Steps are Manhattan distances on the grid with the anchor heading kept.

use std::io::{BufRead, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::world::{apply_dynamics, render_observation, CameraConfig, Observation, Pose, WorldState};

pub const DATASET_FORMAT: &str = "seannet-triplets";
pub const DATASET_VERSION: u32 = 1;
pub const TIER_SHARES: [f64; 5] = [0.50, 0.20, 0.15, 0.10, 0.05];
pub const OFFSET_RETRIES: usize = 50;
/// Attempts at drawing a fresh anchor before dataset generation gives up.
pub const ANCHOR_RETRIES: usize = 200;

/// Offset of a pose from the anchor: grid steps and signed heading change in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deviation {
    pub dx: i32,
    pub dy: i32,
    /// One of `0`, `90`, `180`, `-90`.
    pub dtheta: i32,
}

impl Deviation {
    pub fn manhattan(&self) -> i32 {
        self.dx.abs() + self.dy.abs()
    }

    fn between(a: &Pose, b: &Pose) -> Self {
        let turns = (b.heading.quarter_turns() - a.heading.quarter_turns()).rem_euclid(4);
        Self {
            dx: b.i - a.i,
            dy: b.j - a.j,
            dtheta: [0, 90, 180, -90][turns as usize],
        }
    }
}

/// Required positive and negative offsets for a tier: Manhattan distances
/// and whether the negative must turn.
pub fn tier_rule(tier: u8) -> Result<(i32, i32, bool)> {
    match tier {
        1 => Ok((0, 1, false)),
        2 => Ok((1, 2, false)),
        3 => Ok((2, 3, false)),
        4 => Ok((3, 4, false)),
        5 => Ok((4, 0, true)),
        _ => Err(Error::Usage(format!("tier must be 1..5, got {tier}"))),
    }
}

/// Exact tier counts for `n` triplets; tier 1 absorbs the rounding remainder.
pub fn tier_counts(n: usize) -> [usize; 5] {
    let mut counts = [0; 5];
    for t in 1..5 {
        counts[t] = (n as f64 * TIER_SHARES[t]).round() as usize;
    }
    counts[0] = n.saturating_sub(counts[1..].iter().sum());
    counts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triplet {
    /// Index into the dataset's world list.
    pub world: usize,
    pub tier: u8,
    pub anchor: Observation,
    pub positive: Observation,
    pub negative: Observation,
    pub positive_deviation: Deviation,
    pub negative_deviation: Deviation,
}

impl Triplet {
    /// Whether the record obeys its tier's deviation rule.
    pub fn check_rule(&self) -> Result<()> {
        let (p, n, turn) = tier_rule(self.tier)?;
        let pd = self.positive_deviation;
        let nd = self.negative_deviation;
        let ok_p = pd.manhattan() == p && pd.dtheta == 0;
        let ok_n = if turn {
            nd.dtheta != 0
        } else {
            nd.manhattan() == n && nd.dtheta == 0
        };
        let consistent = pd == Deviation::between(&self.anchor.pose, &self.positive.pose)
            && nd == Deviation::between(&self.anchor.pose, &self.negative.pose);
        if ok_p && ok_n && consistent {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "tier {} triplet with deviations {pd:?} / {nd:?}",
                self.tier
            )))
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TripletOptions {
    pub camera: CameraConfig,
    /// Render tier 2..5 positives after object dynamics as well.
    pub positive_dynamics: bool,
}


fn offsets(k: i32) -> Vec<(i32, i32)> {
    if k == 0 {
        return vec![(0, 0)];
    }
    let mut v = Vec::with_capacity(4 * k as usize);
    for dx in -k..=k {
        let r = k - dx.abs();
        v.push((dx, r));
        if r != 0 {
            v.push((dx, -r));
        }
    }
    v
}

fn offset_pose(world: &WorldState, anchor: &Pose, k: i32, rng: &mut ChaCha8Rng) -> Result<Pose> {
    let candidates = offsets(k);
    for _ in 0..OFFSET_RETRIES {
        let (dx, dy) = candidates[rng.random_range(0..candidates.len())];
        let p = anchor.offset(dx, dy);
        if world.is_reachable(&p) {
            return Ok(p);
        }
    }
    Err(Error::Sampling(format!(
        "no reachable pose {k} steps from {anchor} after {OFFSET_RETRIES} draws"
    )))
}

/// Sample one triplet of `tier` with a uniformly drawn anchor.
pub fn sample_triplet(world: &WorldState, tier: u8, seed: u64, options: &TripletOptions) -> Result<Triplet> {
    let poses = world.reachable_poses();
    if poses.is_empty() {
        return Err(Error::Sampling("world has no reachable poses".into()));
    }
    let mut rng = rng_from_seed(derive_seed(seed, "anchor", &[]));
    let anchor = poses[rng.random_range(0..poses.len())];
    sample_triplet_at(world, 0, &anchor, tier, seed, options)
}

/// Sample one triplet of `tier` around a given anchor pose.
pub fn sample_triplet_at(
    world: &WorldState,
    world_index: usize,
    anchor: &Pose,
    tier: u8,
    seed: u64,
    options: &TripletOptions,
) -> Result<Triplet> {
    let (p_steps, n_steps, turn) = tier_rule(tier)?;
    let mut rng = rng_from_seed(derive_seed(seed, "offsets", &[]));
    let positive_pose = offset_pose(world, anchor, p_steps, &mut rng)?;
    let negative_pose = if turn {
        anchor.with_heading(anchor.heading.rotated(rng.random_range(1..4)))
    } else {
        offset_pose(world, anchor, n_steps, &mut rng)?
    };
    let camera = &options.camera;
    let anchor_obs = render_observation(world, anchor, camera)?;
    let positive = if tier == 1 || options.positive_dynamics {
        let moved = apply_dynamics(world, derive_seed(seed, "dynamics", &[]));
        render_observation(&moved, &positive_pose, camera)?
    } else {
        render_observation(world, &positive_pose, camera)?
    };
    let negative = render_observation(world, &negative_pose, camera)?;
    Ok(Triplet {
        world: world_index,
        tier,
        positive_deviation: Deviation::between(anchor, &positive_pose),
        negative_deviation: Deviation::between(anchor, &negative_pose),
        anchor: anchor_obs,
        positive,
        negative,
    })
}

/// Reference to a source world: its position in the input list and a
/// digest of its serialized form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldRef {
    pub index: usize,
    pub sha256: String,
}

pub fn world_digest(world: &WorldState) -> Result<String> {
    Ok(hex::encode(Sha256::digest(world.to_json()?.as_bytes())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub format: String,
    pub version: u32,
    pub seed: u64,
    pub worlds: Vec<WorldRef>,
    pub n: usize,
    pub tier_histogram: [usize; 5],
}

#[derive(Debug, Clone, PartialEq)]
pub struct TripletDataset {
    pub header: DatasetHeader,
    pub triplets: Vec<Triplet>,
}

impl TripletDataset {
    pub fn len(&self) -> usize {
        self.triplets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triplets.is_empty()
    }

    pub fn histogram(&self) -> [usize; 5] {
        let mut h = [0; 5];
        for t in &self.triplets {
            h[usize::from(t.tier) - 1] += 1;
        }
        h
    }

    /// Line-delimited JSON: the header, then one record per triplet.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        serde_json::to_writer(&mut w, &self.header)?;
        w.write_all(b"\n")?;
        for t in &self.triplets {
            serde_json::to_writer(&mut w, t)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_from(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines();
        let first = lines
            .next()
            .ok_or_else(|| Error::Format("empty dataset file".into()))??;
        let header: DatasetHeader = serde_json::from_str(&first)?;
        if header.format != DATASET_FORMAT || header.version != DATASET_VERSION {
            return Err(Error::Format(format!(
                "unsupported dataset {} v{}",
                header.format, header.version
            )));
        }
        let mut triplets = Vec::with_capacity(header.n);
        for line in lines {
            let line = line?;
            if !line.trim().is_empty() {
                triplets.push(serde_json::from_str(&line)?);
            }
        }
        let ds = Self { header, triplets };
        if ds.triplets.len() != ds.header.n || ds.histogram() != ds.header.tier_histogram {
            return Err(Error::Format("dataset records do not match the header".into()));
        }
        Ok(ds)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(f)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

/// Generate `n` triplets over `worlds` with exact tier proportions.
///
/// Tier assignment is shuffled; each record draws its world and anchor
/// uniformly and redraws the anchor when no valid offsets exist.
pub fn gen_dataset(worlds: &[WorldState], n: usize, seed: u64, options: &TripletOptions) -> Result<TripletDataset> {
    if worlds.is_empty() {
        return Err(Error::Usage("no worlds given".into()));
    }
    if n < 20 {
        return Err(Error::Usage(format!("need at least 20 triplets, got {n}")));
    }
    let counts = tier_counts(n);
    let mut tiers: Vec<u8> = counts
        .iter()
        .enumerate()
        .flat_map(|(t, &c)| std::iter::repeat_n(t as u8 + 1, c))
        .collect();
    tiers.shuffle(&mut rng_from_seed(derive_seed(seed, "tiers", &[])));
    let poses: Vec<Vec<Pose>> = worlds.iter().map(WorldState::reachable_poses).collect();

    let mut triplets = Vec::with_capacity(n);
    for (idx, &tier) in tiers.iter().enumerate() {
        let mut last_err = None;
        let mut done = false;
        for attempt in 0..ANCHOR_RETRIES {
            let s = derive_seed(seed, "triplet", &[idx as u64, attempt as u64]);
            let mut rng = rng_from_seed(s);
            let w = rng.random_range(0..worlds.len());
            if poses[w].is_empty() {
                continue;
            }
            let anchor = poses[w][rng.random_range(0..poses[w].len())];
            match sample_triplet_at(&worlds[w], w, &anchor, tier, s, options) {
                Ok(t) => {
                    triplets.push(t);
                    done = true;
                    break;
                }
                Err(e @ Error::Sampling(_)) => last_err = Some(e),
                Err(e) => return Err(e),
            }
        }
        if !done {
            return Err(last_err.unwrap_or_else(|| Error::Sampling("no world has reachable poses".into())));
        }
    }
    let header = DatasetHeader {
        format: DATASET_FORMAT.into(),
        version: DATASET_VERSION,
        seed,
        worlds: worlds
            .iter()
            .enumerate()
            .map(|(index, w)| Ok(WorldRef { index, sha256: world_digest(w)? }))
            .collect::<Result<_>>()?,
        n,
        tier_histogram: counts,
    };
    Ok(TripletDataset { header, triplets })
}

/// Partition world indices `0..n` into train, validation and test sets by
/// the given ratios. Every set with a positive ratio gets at least one
/// world when `n` allows it.
pub fn split_worlds(n: usize, ratios: [f64; 3], seed: u64) -> Result<[Vec<usize>; 3]> {
    let total: f64 = ratios.iter().sum();
    if ratios.iter().any(|&r| r < 0.0 || !r.is_finite()) || total <= 0.0 {
        return Err(Error::Config(format!("invalid split ratios {ratios:?}")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng_from_seed(derive_seed(seed, "world_split", &[])));
    let mut train = (ratios[0] / total * n as f64).round() as usize;
    let mut val = ((ratios[1] / total * n as f64).round() as usize).min(n - train.min(n));
    let mut test = n - train.min(n) - val;
    if n >= 3 {
        if ratios[2] > 0.0 && test == 0 {
            test = 1;
        }
        if ratios[1] > 0.0 && val == 0 {
            val = 1;
        }
        train = n - val - test;
    }
    let sizes = [train.min(n), val, test];
    let val_start = sizes[0];
    let test_start = (sizes[0] + sizes[1]).min(n);
    Ok([
        idx[..val_start].to_vec(),
        idx[val_start..test_start].to_vec(),
        idx[test_start..].to_vec(),
    ])
}
