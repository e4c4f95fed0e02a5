// SPDX-License-Identifier: Apache-2.0

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;

use super::{DcScenario, FleetResult, Regime};

/// Successive fault ticks of one chip slot, starting at `born`.
struct FaultStream {
    rng: ChaCha8Rng,
    gap: Option<Geometric>,
    next: u64,
}

impl FaultStream {
    fn new(seed: u64, chip: u64, p: f64, born: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chip);
        let gap = (p > 0.0).then(|| Geometric::new(p).expect("p checked in [0, 1]"));
        let mut s = FaultStream { rng, gap, next: u64::MAX };
        s.next = s.draw(born);
        s
    }

    /// First fault tick at or after `from`; `u64::MAX` when there is none.
    fn draw(&mut self, from: u64) -> u64 {
        match &self.gap {
            Some(g) => from.saturating_add(g.sample(&mut self.rng)),
            None => u64::MAX,
        }
    }

    fn advance(&mut self) -> u64 {
        let t = self.next;
        self.next = self.draw(t.saturating_add(1));
        t
    }
}

/// Fixed chip count. A chip that reaches its fault limit is replaced and
/// runs fresh from the next tick; the faulting tick contributes the
/// post-fault throughput (zero for a dead chip).
pub fn simulate_fixed_time(s: &DcScenario) -> FleetResult {
    let deg = &s.degradation;
    let max = deg.len();
    let mut replacements = 0u64;
    let mut faults = 0u64;
    let mut aggregate = 0.0f64;
    for chip in 0..s.chips {
        let mut stream = FaultStream::new(s.seed, chip, s.fault_prob, 0);
        let mut count = 0usize;
        let mut chip_sum = 0.0f64;
        let mut from = 0u64;
        while stream.next < s.ticks {
            let t = stream.advance();
            faults += 1;
            chip_sum += deg[count] * (t - from) as f64;
            count += 1;
            if count == max {
                replacements += 1;
                count = 0;
            } else {
                chip_sum += deg[count];
            }
            from = t + 1;
        }
        chip_sum += deg[count] * (s.ticks - from) as f64;
        aggregate += chip_sum;
    }
    FleetResult { replacements_or_purchases: replacements, aggregate_throughput: aggregate, faults }
}

/// Fixed capacity. At the end of each tick, if capacity is below the target
/// the smallest number of fresh chips restoring it is bought; they serve
/// from the next tick. Dead chips are retired, degraded VFAs are kept.
pub fn simulate_fixed_throughput(s: &DcScenario) -> FleetResult {
    let target = match s.regime {
        Regime::FixedThroughput { target } => target,
        Regime::FixedTime => s.chips as f64,
    };
    let deg = &s.degradation;
    let max = deg.len();
    // chips alive, by accumulated fault count
    let mut hist = vec![0u64; max];
    hist[0] = s.chips;
    let mut counts: Vec<usize> = vec![0; s.chips as usize];
    let mut streams: Vec<FaultStream> = (0..s.chips).map(|c| FaultStream::new(s.seed, c, s.fault_prob, 0)).collect();
    let mut events: BinaryHeap<Reverse<(u64, u64)>> = streams
        .iter()
        .enumerate()
        .filter(|(_, st)| st.next < s.ticks)
        .map(|(c, st)| Reverse((st.next, c as u64)))
        .collect();

    let capacity = |hist: &[u64]| -> f64 { hist.iter().zip(deg).map(|(&h, &d)| h as f64 * d).sum() };
    let mut purchases = 0u64;
    let mut faults = 0u64;
    let mut aggregate = 0.0f64;
    let mut t = 0u64;
    while t < s.ticks {
        while let Some(&Reverse((when, chip))) = events.peek() {
            if when != t {
                break;
            }
            events.pop();
            let c = chip as usize;
            faults += 1;
            hist[counts[c]] -= 1;
            counts[c] += 1;
            if counts[c] < max {
                hist[counts[c]] += 1;
                streams[c].advance();
                if streams[c].next < s.ticks {
                    events.push(Reverse((streams[c].next, chip)));
                }
            }
        }
        let cap = capacity(&hist);
        aggregate += cap;
        let shortfall = target - cap;
        if shortfall > 1e-9 {
            let buy = (shortfall - 1e-9).ceil() as u64;
            purchases += buy;
            for _ in 0..buy {
                let id = counts.len() as u64;
                let st = FaultStream::new(s.seed, id, s.fault_prob, t + 1);
                if st.next < s.ticks {
                    events.push(Reverse((st.next, id)));
                }
                streams.push(st);
                counts.push(0);
            }
            hist[0] += buy;
        }
        // Capacity is constant, and at or above target, until the next fault.
        let next = events.peek().map_or(s.ticks, |Reverse((w, _))| *w).min(s.ticks);
        aggregate += capacity(&hist) * (next - (t + 1)) as f64;
        t = next;
    }
    FleetResult { replacements_or_purchases: purchases, aggregate_throughput: aggregate, faults }
}

pub fn simulate(s: &DcScenario) -> FleetResult {
    match s.regime {
        Regime::FixedTime => simulate_fixed_time(s),
        Regime::FixedThroughput { .. } => simulate_fixed_throughput(s),
    }
}

/// Runs `base` once per seed in parallel; results are in seed order.
pub fn run_seeds(base: &DcScenario, seeds: &[u64]) -> Vec<FleetResult> {
    seeds.par_iter().map(|&seed| simulate(&base.with_seed(seed))).collect()
}
