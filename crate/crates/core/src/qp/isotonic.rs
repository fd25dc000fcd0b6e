use serde::{Deserialize, Serialize};

/// Ordering imposed on a signal along its samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
}

impl Direction {
    pub fn label(self) -> &'static str {
        match self {
            Direction::Increasing => "inc",
            Direction::Decreasing => "dec",
        }
    }
}

/// Exact check (no tolerance) that `v` is ordered per `direction`.
pub fn is_monotone(v: &[f64], direction: Direction) -> bool {
    v.windows(2).all(|w| match direction {
        Direction::Increasing => w[0] <= w[1],
        Direction::Decreasing => w[0] >= w[1],
    })
}

/// Euclidean projection of `v` onto the monotone cone, additionally
/// intersected with the nonnegative orthant when `nonneg` is set.
///
/// Pool-adjacent-violators, then clamping at zero. Clamping after PAVA is
/// exact: for a nondecreasing fit the negative entries form a prefix, and the
/// projection onto `{x nondecreasing, x ≥ 0}` is `max(pava(v), 0)`.
pub fn isotonic_project(v: &[f64], direction: Direction, nonneg: bool) -> Vec<f64> {
    let mut out = match direction {
        Direction::Increasing => pava_increasing(v.iter().copied()),
        Direction::Decreasing => {
            let mut r = pava_increasing(v.iter().rev().copied());
            r.reverse();
            r
        }
    };
    if nonneg {
        for x in &mut out {
            if *x < 0.0 {
                *x = 0.0;
            }
        }
    }
    out
}

fn pava_increasing(values: impl Iterator<Item = f64>) -> Vec<f64> {
    // (sum, count) per pooled block.
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    let mut len = 0;
    for v in values {
        len += 1;
        blocks.push((v, 1));
        while blocks.len() >= 2 {
            let (s1, c1) = blocks[blocks.len() - 1];
            let (s0, c0) = blocks[blocks.len() - 2];
            if s0 / c0 as f64 > s1 / c1 as f64 {
                blocks.pop();
                *blocks.last_mut().unwrap() = (s0 + s1, c0 + c1);
            } else {
                break;
            }
        }
    }
    let mut out = Vec::with_capacity(len);
    for (sum, count) in blocks {
        let mean = sum / count as f64;
        out.extend(std::iter::repeat(mean).take(count));
    }
    out
}
