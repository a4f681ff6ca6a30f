use serde::{Deserialize, Serialize};

use crate::error::HarnessError;
use crate::frontier::{FrontierPath, JumpRecord};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpMatch {
    pub a: JumpRecord,
    pub b: JumpRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// Largest `|lambda_a - lambda_b|` over the union of both time grids.
    pub sup: f64,
    /// Time at which `sup` is attained.
    pub sup_at: f64,
    pub l1: f64,
    pub t_end: f64,
    pub matched: Vec<JumpMatch>,
    pub unmatched_a: Vec<JumpRecord>,
    pub unmatched_b: Vec<JumpRecord>,
}

/// Distances between two frontier paths on `[0, min t_end]`, evaluated
/// right-continuously on the merged time grid, and a greedy alignment of
/// the jump registries: two jumps match when their times differ by at most
/// `t_tol` and both endpoints by at most `lambda_tol`.
pub fn compare_paths(a: &FrontierPath, b: &FrontierPath, t_tol: f64, lambda_tol: f64) -> Result<Comparison, HarnessError> {
    if a.is_empty() || b.is_empty() {
        return Err(HarnessError::Mismatch("empty frontier path".into()));
    }
    if a.alpha != b.alpha {
        return Err(HarnessError::Mismatch(format!("alpha {} vs {}", a.alpha, b.alpha)));
    }
    let t_end = a.t_end().min(b.t_end());
    let mut times: Vec<f64> = a.times.iter().chain(&b.times).copied().filter(|&t| t <= t_end).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut sup = 0.0;
    let mut sup_at = 0.0;
    let mut l1 = 0.0;
    for (i, &t) in times.iter().enumerate() {
        let d = (a.value_at(t) - b.value_at(t)).abs();
        if d > sup {
            sup = d;
            sup_at = t;
        }
        if let Some(&next) = times.get(i + 1) {
            l1 += d * (next - t);
        }
    }
    let mut used = vec![false; b.jumps.len()];
    let mut matched = Vec::new();
    let mut unmatched_a = Vec::new();
    for ja in &a.jumps {
        let hit = b.jumps.iter().enumerate().position(|(i, jb)| {
            !used[i]
                && (ja.t - jb.t).abs() <= t_tol
                && (ja.lambda_minus - jb.lambda_minus).abs() <= lambda_tol
                && (ja.lambda_plus - jb.lambda_plus).abs() <= lambda_tol
        });
        match hit {
            Some(i) => {
                used[i] = true;
                matched.push(JumpMatch { a: *ja, b: b.jumps[i] });
            }
            None => unmatched_a.push(*ja),
        }
    }
    let unmatched_b = b
        .jumps
        .iter()
        .zip(&used)
        .filter(|(_, &u)| !u)
        .map(|(j, _)| *j)
        .collect();
    Ok(Comparison {
        sup,
        sup_at,
        l1,
        t_end,
        matched,
        unmatched_a,
        unmatched_b,
    })
}
