#![allow(dead_code)]

//! Random small no-signalling models for the integration suites.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use contextuality::{connected_components, corpus, EmpiricalModel, Outcomes, RingSpec, Scenario, Section};

/// An antichain cover on `n` measurements with at most `max` contexts. Half
/// the time it is the cycle of consecutive pairs, where small contextual
/// models are common.
fn random_cover(rng: &mut impl Rng, n: usize, max: usize) -> Vec<Vec<usize>> {
    if n >= 3 && n <= max && rng.gen_bool(0.5) {
        return (0..n)
            .map(|i| {
                let mut pair = vec![i, (i + 1) % n];
                pair.sort_unstable();
                pair
            })
            .collect();
    }
    loop {
        let count = rng.gen_range(1..=max);
        let mut contexts: Vec<BTreeSet<usize>> = (0..count)
            .map(|_| {
                let size = rng.gen_range(1..=n.min(3));
                let mut all: Vec<usize> = (0..n).collect();
                all.shuffle(rng);
                all.into_iter().take(size).collect()
            })
            .collect();
        for m in 0..n {
            if !contexts.iter().any(|c| c.contains(&m)) {
                let k = rng.gen_range(0..contexts.len());
                contexts[k].insert(m);
            }
        }
        let mut cover: Vec<BTreeSet<usize>> = Vec::new();
        for c in &contexts {
            if !contexts.iter().any(|d| d != c && c.is_subset(d)) && !cover.contains(c) {
                cover.push(c.clone());
            }
        }
        if cover.len() > max {
            continue;
        }
        return cover.into_iter().map(|c| c.into_iter().collect()).collect();
    }
}

/// Drops sections whose restriction to an overlap is missing from the other
/// context, until the images agree everywhere. `None` if a context empties.
fn prune_to_no_signalling(scn: &Scenario, mut supports: Vec<Vec<Section>>) -> Option<Vec<Vec<Section>>> {
    loop {
        let mut changed = false;
        for i in 0..supports.len() {
            for j in 0..supports.len() {
                if i == j {
                    continue;
                }
                let overlap: Vec<usize> = scn
                    .context(i)
                    .iter()
                    .filter(|m| scn.context(j).contains(m))
                    .copied()
                    .collect();
                if overlap.is_empty() {
                    continue;
                }
                let image: BTreeSet<Section> = supports[j]
                    .iter()
                    .map(|s| s.restrict(&overlap).unwrap())
                    .collect();
                let before = supports[i].len();
                supports[i].retain(|s| image.contains(&s.restrict(&overlap).unwrap()));
                changed |= supports[i].len() != before;
            }
        }
        if supports.iter().any(Vec::is_empty) {
            return None;
        }
        if !changed {
            return Some(supports);
        }
    }
}

/// A random connected no-signalling model with at most four measurements and
/// four contexts, over two or three outcomes.
pub fn random_model(rng: &mut impl Rng) -> EmpiricalModel {
    loop {
        let n = rng.gen_range(2..=4);
        let k = rng.gen_range(2..=3u64);
        let cover = random_cover(rng, n, 4);
        let labels: Vec<String> = (0..n).map(|i| format!("m{i}")).collect();
        let named: Vec<Vec<String>> = cover
            .iter()
            .map(|c| c.iter().map(|&i| labels[i].clone()).collect())
            .collect();
        let scn = Scenario::new(labels.clone(), named, Outcomes::Ring(k)).unwrap();
        if connected_components(&scn).len() != 1 {
            continue;
        }
        let density = rng.gen_range(0.25..0.9);
        let supports: Vec<Vec<Section>> = (0..scn.cover().len())
            .map(|ci| {
                contextuality::sections_of(&scn, scn.context(ci))
                    .unwrap()
                    .into_iter()
                    .filter(|_| rng.gen_bool(density))
                    .collect()
            })
            .collect();
        if let Some(supports) = prune_to_no_signalling(&scn, supports) {
            return EmpiricalModel::new(scn, supports).unwrap();
        }
    }
}

pub fn random_models(seed: u64, count: usize) -> Vec<EmpiricalModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_model(&mut rng)).collect()
}

pub fn model_from_seed(seed: u64) -> EmpiricalModel {
    random_model(&mut ChaCha8Rng::seed_from_u64(seed))
}

/// Finite rings the outcomes embed into, smallest first.
pub fn finite_rings_for(model: &EmpiricalModel) -> Vec<RingSpec> {
    match model.scenario().outcome_count() {
        2 => vec![RingSpec::Mod(2), RingSpec::Mod(3), RingSpec::Mod(4)],
        _ => vec![RingSpec::Mod(3), RingSpec::Mod(4), RingSpec::Mod(6)],
    }
}

pub fn corpus_models() -> Vec<(&'static str, EmpiricalModel)> {
    corpus::names().map(|n| (n, corpus::model(n).unwrap())).collect()
}
