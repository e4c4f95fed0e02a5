// SPDX-License-Identifier: Apache-2.0

use super::{total_cycles, FaultScenario, LatencyParams, PipelineError, PipelineSpec};
use crate::numeric::Real;

/// Largest relative speedup error accepted by default.
pub const DEFAULT_RESIDUAL_BOUND: f64 = 0.10;

/// A pipeline, its faults and the speedup it was observed to reach.
#[derive(Clone, Debug)]
pub struct Observation<F> {
    pub pipeline: PipelineSpec,
    pub scenario: FaultScenario,
    /// FPGA parameters used when the scenario has FPGA fallbacks; the
    /// transmission field is ignored.
    pub latency: LatencyParams,
    pub target: F,
}

impl<F: Real> Observation<F> {
    pub fn software(pipeline: PipelineSpec, scenario: FaultScenario, target: F) -> Self {
        Observation { pipeline, scenario, latency: LatencyParams::software(0), target }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Calibration<F> {
    /// Continuous least-squares optimum.
    pub transmission: F,
    /// Whole-cycle T used for the reported residuals.
    pub transmission_cycles: u64,
    /// `predicted / target - 1` per observation, at `transmission_cycles`.
    pub residuals: Vec<F>,
    pub predicted: Vec<F>,
}

impl<F: Real> Calibration<F> {
    pub fn max_abs_residual(&self) -> F {
        self.residuals.iter().fold(F::zero(), |m, r| m.max(r.abs()))
    }
}

/// Total cycles as `a + b·T`.
struct Linear<F> {
    sw: F,
    a: F,
    b: F,
    target: F,
}

impl<F: Real> Linear<F> {
    fn residual(&self, t: F) -> F {
        self.sw / (self.a + self.b * t) / self.target - F::one()
    }
}

fn objective<F: Real>(lines: &[Linear<F>], t: F) -> F {
    lines
        .iter()
        .map(|l| {
            let r = l.residual(t);
            r * r
        })
        .fold(F::zero(), |s, x| s + x)
}

/// Fits the transmission latency `T` minimizing the summed squared
/// relative speedup error over `observations`.
///
/// Fails with [`PipelineError::NoFeasibleT`] when the best whole-cycle `T`
/// leaves any residual above `bound`.
pub fn calibrate_transmission<F: Real>(
    observations: &[Observation<F>],
    bound: F,
) -> Result<Calibration<F>, PipelineError> {
    if observations.is_empty() {
        return Err(PipelineError::NoObservations);
    }
    let mut lines = Vec::with_capacity(observations.len());
    for o in observations {
        let at = |t: u64| {
            let l = LatencyParams { transmission: t, ..o.latency };
            total_cycles(&o.pipeline, &o.scenario, &l).map(|b| b.total_cycles)
        };
        let a = at(0)?;
        let b = at(1)? - a;
        lines.push(Linear {
            sw: F::of_u64(o.pipeline.sw_total_cycles()),
            a: F::of_u64(a),
            b: F::of_u64(b),
            target: o.target,
        });
    }

    // Beyond T = max C every crossing-bearing prediction is below 1/2.
    let t_max = lines.iter().filter(|l| l.b > F::zero()).map(|l| l.sw).fold(F::zero(), F::max);
    let t_star = if t_max == F::zero() { F::zero() } else { minimize(|t| objective(&lines, t), t_max) };

    let floor = t_star.floor().to_u64().unwrap_or(0);
    let cycles = [floor, floor + 1]
        .into_iter()
        .min_by(|&x, &y| {
            let (fx, fy) = (objective(&lines, F::of_u64(x)), objective(&lines, F::of_u64(y)));
            fx.partial_cmp(&fy).expect("finite objective")
        })
        .expect("two candidates");
    let tc = F::of_u64(cycles);
    let residuals: Vec<F> = lines.iter().map(|l| l.residual(tc)).collect();
    let predicted = lines.iter().map(|l| l.sw / (l.a + l.b * tc)).collect();
    let cal = Calibration { transmission: t_star, transmission_cycles: cycles, residuals, predicted };
    let worst = cal.max_abs_residual();
    if worst > bound {
        return Err(PipelineError::NoFeasibleT {
            best_t: t_star.to_f64().unwrap_or(f64::NAN),
            max_residual: worst.to_f64().unwrap_or(f64::NAN),
            bound: bound.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(cal)
}

/// Grid scan over `[0, hi]` followed by golden-section refinement of the
/// best bracket.
fn minimize<F: Real>(f: impl Fn(F) -> F, hi: F) -> F {
    const GRID: usize = 4096;
    let step = hi / F::of_u64(GRID as u64);
    let at = |i: usize| step * F::of_u64(i as u64);
    let best =
        (0..=GRID).min_by(|&i, &j| f(at(i)).partial_cmp(&f(at(j))).expect("finite objective")).expect("non-empty grid");
    let (mut a, mut b) = (at(best.saturating_sub(1)), at((best + 1).min(GRID)));
    let inv_phi = F::of((5f64.sqrt() - 1.0) / 2.0);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    for _ in 0..200 {
        if (b - a).abs() <= F::epsilon() * (F::one() + b.abs()) {
            break;
        }
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - (b - a) * inv_phi;
        d = a + (b - a) * inv_phi;
    }
    (a + b) / F::of(2.0)
}
