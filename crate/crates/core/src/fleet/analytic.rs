// SPDX-License-Identifier: Apache-2.0

use super::AcceleratorKind;
use crate::numeric::Real;

/// `P(X >= m)` for `X ~ Binomial(n, p)`, summed directly from the tail so
/// that tiny probabilities keep full relative precision.
pub fn binomial_tail<F: Real>(n: u64, p: F, m: u64) -> F {
    if m == 0 {
        return F::one();
    }
    if m > n || p <= F::zero() {
        return F::zero();
    }
    if p >= F::one() {
        return F::one();
    }
    let q = F::one() - p;
    // ln pmf(m) = ln C(n, m) + m ln p + (n - m) ln q
    let mut ln_choose = F::zero();
    for i in 0..m {
        ln_choose = ln_choose + (F::of_u64(n - i) / F::of_u64(i + 1)).ln();
    }
    let ln_pmf = ln_choose + F::of_u64(m) * p.ln() + F::of_u64(n - m) * (-p).ln_1p();
    let mut term = ln_pmf.exp();
    let mut sum = term;
    let ratio = p / q;
    let mut k = m;
    while k < n {
        term = term * F::of_u64(n - k) / F::of_u64(k + 1) * ratio;
        sum = sum + term;
        k += 1;
        if term <= sum * F::epsilon() {
            break;
        }
    }
    sum.min(F::one())
}

/// Expected replacements over `ticks` for `chips` chip slots.
///
/// A chip that dies on its first fault is replaced once per fault, so the
/// expectation is exactly `chips·ticks·p`. For `max_faults > 1` this
/// returns `chips·P(Binomial(ticks, p) >= max_faults)`, the probability that
/// a slot needs at least one replacement; it undercounts repeat
/// replacements and is accurate while `p·ticks` is well below 1.
pub fn expected_replacements<F: Real>(p: F, ticks: u64, chips: u64, kind: AcceleratorKind, max_faults: u64) -> F {
    let n = F::of_u64(chips);
    match kind {
        AcceleratorKind::Vfa if max_faults > 1 => n * binomial_tail(ticks, p, max_faults),
        _ => n * F::of_u64(ticks) * p,
    }
}
