#![allow(dead_code)]

use ftf_core::{ClassLabel, Instance, SkillId, Task, Worker};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random desk-scale instance: `n ∈ [4, 15]` workers, `m ∈ [3, 10]` skills,
/// both classes present, and a coverable task.
pub fn small_instance<R: Rng>(rng: &mut R) -> (Instance, Task) {
    let n = rng.random_range(4..=15);
    let m = rng.random_range(3..=10);
    small_instance_with(rng, n, m)
}

pub fn small_instance_with<R: Rng>(rng: &mut R, n: usize, m: usize) -> (Instance, Task) {
    loop {
        let class1_share = rng.random_range(0.15..0.85);
        let mut workers = Vec::with_capacity(n);
        for id in 0..n {
            let k = rng.random_range(0..=3.min(m));
            let skills = index::sample(rng, m, k).into_vec();
            // Costs on a 0.05 grid in [0.05, 10] so ties occur now and then.
            let cost = f64::from(rng.random_range(1..=200u32)) * 0.05;
            let class = if rng.random_bool(class1_share) {
                ClassLabel::Class1
            } else {
                ClassLabel::Class2
            };
            workers.push(Worker::new(id as u64, cost, class, skills));
        }
        let counts = workers.iter().filter(|w| w.class == ClassLabel::Class1).count();
        if counts == 0 || counts == n {
            continue;
        }
        let instance = Instance::new(m, workers).unwrap();
        let pooled: Vec<usize> = (0..m)
            .filter(|&s| !instance.pool(SkillId::from(s)).is_empty())
            .collect();
        if pooled.is_empty() {
            continue;
        }
        let k = rng.random_range(1..=pooled.len().min(5));
        let picks = index::sample(rng, pooled.len(), k);
        let task = Task::new(0, picks.into_iter().map(|i| pooled[i]));
        return (instance, task);
    }
}
