// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PipelineError;

/// Where `k` faults land in an `n`-stage pipeline.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    /// Spread evenly, away from both ends.
    Interior,
    /// The first `k` stages.
    Head,
    /// The last `k` stages.
    Tail,
    /// One contiguous block in the middle.
    Clustered,
    /// Maximizes the number of healthy segments, hence crossings.
    Worst,
    /// Exactly these stages.
    Explicit(Vec<usize>),
}

impl Placement {
    pub fn positions(&self, n: usize, k: usize) -> Result<Vec<usize>, PipelineError> {
        if let Placement::Explicit(v) = self {
            let mut v = v.clone();
            v.sort_unstable();
            v.dedup();
            if let Some(&stage) = v.iter().find(|&&s| s >= n) {
                return Err(PipelineError::FaultOutOfRange { stage, n });
            }
            return Ok(v);
        }
        if k > n {
            return Err(PipelineError::TooManyFaults { k, n });
        }
        if k == n {
            return Ok((0..n).collect());
        }
        Ok(match self {
            Placement::Head => (0..k).collect(),
            Placement::Tail => (n - k..n).collect(),
            Placement::Clustered => {
                let start = (n - k) / 2;
                (start..start + k).collect()
            }
            // round((i+1)·n/(k+1)); the spacing n/(k+1) ≥ 1 keeps them distinct
            Placement::Interior => (0..k).map(|i| ((i + 1) * n * 2 + (k + 1)) / (2 * (k + 1))).collect(),
            Placement::Worst => {
                if 2 * k < n {
                    // k isolated faults leave k+1 segments
                    (0..k).map(|i| 2 * i + 1).collect()
                } else {
                    // isolate every healthy stage: n-k segments
                    let healthy: Vec<usize> = (0..n - k).map(|i| 2 * i).collect();
                    (0..n).filter(|s| !healthy.contains(s)).collect()
                }
            }
            Placement::Explicit(_) => unreachable!(),
        })
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Placement::Interior => f.write_str("interior"),
            Placement::Head => f.write_str("head"),
            Placement::Tail => f.write_str("tail"),
            Placement::Clustered => f.write_str("clustered"),
            Placement::Worst => f.write_str("worst"),
            Placement::Explicit(v) => {
                let parts: Vec<String> = v.iter().map(|s| s.to_string()).collect();
                write!(f, "at:{}", parts.join(":"))
            }
        }
    }
}

impl FromStr for Placement {
    type Err = String;

    /// `interior`, `head`, `tail`, `clustered`, `worst` or `at:2:4`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "interior" => Placement::Interior,
            "head" => Placement::Head,
            "tail" => Placement::Tail,
            "clustered" => Placement::Clustered,
            "worst" => Placement::Worst,
            _ => match s.strip_prefix("at:") {
                Some(rest) => Placement::Explicit(
                    rest.split(':')
                        .map(|x| x.parse::<usize>().map_err(|e| format!("`{x}`: {e}")))
                        .collect::<Result<_, _>>()?,
                ),
                None => return Err(format!("unknown placement `{s}`")),
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::healthy_segments;

    #[test]
    fn interior_spreads_faults() {
        assert_eq!(Placement::Interior.positions(6, 1).unwrap(), [3]);
        assert_eq!(Placement::Interior.positions(6, 2).unwrap(), [2, 4]);
        assert_eq!(Placement::Interior.positions(12, 2).unwrap(), [4, 8]);
        assert_eq!(Placement::Interior.positions(10, 2).unwrap(), [3, 7]);
        assert_eq!(Placement::Interior.positions(6, 5).unwrap(), [1, 2, 3, 4, 5]);
    }

    #[test]
    fn interior_positions_are_distinct_and_in_range() {
        for n in 1..30 {
            for k in 0..=n {
                let p = Placement::Interior.positions(n, k).unwrap();
                assert_eq!(p.len(), k);
                assert!(p.windows(2).all(|w| w[0] < w[1]));
                assert!(p.iter().all(|&s| s < n));
            }
        }
    }

    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        (0u32..1 << n)
            .filter(|m| m.count_ones() as usize == k)
            .map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect())
            .collect()
    }

    #[test]
    fn worst_maximizes_segments() {
        for n in 1..=12 {
            for k in 0..=n {
                let best = subsets(n, k).into_iter().map(|s| healthy_segments(s, n)).max().unwrap();
                let w = Placement::Worst.positions(n, k).unwrap();
                assert_eq!(w.len(), k);
                assert_eq!(healthy_segments(w, n), best, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn parse_and_print() {
        for s in ["interior", "head", "tail", "clustered", "worst", "at:1:4"] {
            assert_eq!(s.parse::<Placement>().unwrap().to_string(), s);
        }
        assert!("middle".parse::<Placement>().is_err());
        assert_eq!(Placement::Head.positions(3, 4), Err(PipelineError::TooManyFaults { k: 4, n: 3 }));
    }
}
