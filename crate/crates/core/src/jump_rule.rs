//! The physical jump condition.
//!
//! A frontier sitting at `lambda_minus` jumps by
//! `inf{x > 0 : F(lambda_minus + x) - F(lambda_minus) < x / alpha}`,
//! where `F` is the CDF of the surviving mass. Two resolvers live here: a
//! scan against a continuous CDF, and the particle cascade, whose least
//! fixed point is the finite-population version of the same infimum.

use serde::{Deserialize, Serialize};

use crate::error::JumpError;

/// Slack applied to the strict inequality so that exact ties do not jump.
pub const TIE_GUARD: f64 = 1e-14;

/// Number of bisection halvings used to refine an exact scan.
pub const BISECTION_STEPS: u32 = 20;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct JumpResult {
    pub delta: f64,
    pub new_frontier: f64,
    pub absorbed_mass: f64,
    /// Indices into the sorted alive slice (particle form only).
    pub absorbed_indices: Vec<usize>,
    /// The scan ran out of room before the inequality held.
    pub total_freeze: bool,
}

/// Resolution of the continuum scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub h_scan: f64,
    pub x_max: f64,
    /// The CDF is exact and piecewise linear, so bisection below `h_scan`
    /// is meaningful.
    pub exact: bool,
}

impl ScanSpec {
    pub fn new(h_scan: f64, x_max: f64, exact: bool) -> Self {
        ScanSpec { h_scan, x_max, exact }
    }
}

/// Resolves the jump rule against a non-decreasing CDF.
pub fn continuum_jump<F>(cdf: F, lambda_minus: f64, alpha: f64, scan: &ScanSpec) -> Result<JumpResult, JumpError>
where
    F: Fn(f64) -> f64,
{
    if !(scan.h_scan > 0.0) || !(scan.x_max > 0.0) {
        return Err(JumpError::Scan(format!(
            "h_scan = {} and x_max = {} must be positive",
            scan.h_scan, scan.x_max
        )));
    }
    let base = cdf(lambda_minus);
    let none = JumpResult {
        new_frontier: lambda_minus,
        ..Default::default()
    };
    if alpha <= 0.0 {
        return Ok(none);
    }
    let increment = |x: f64| cdf(lambda_minus + x) - base;
    let holds = |x: f64, inc: f64| inc < x / alpha - TIE_GUARD * alpha;

    let mut prev_x = 0.0;
    let mut prev_inc = 0.0;
    let mut k: u64 = 1;
    loop {
        let x = (k as f64 * scan.h_scan).min(scan.x_max);
        let inc = increment(x);
        if inc < prev_inc - 1e-12 {
            return Err(JumpError::NonMonotoneCdf {
                x: lambda_minus + x,
                before: prev_inc,
                after: inc,
            });
        }
        if holds(x, inc) {
            if k == 1 {
                return Ok(none);
            }
            let delta = if scan.exact {
                // prev_x fails, x holds: shrink the bracket
                let (mut lo, mut hi) = (prev_x, x);
                for _ in 0..BISECTION_STEPS {
                    let mid = 0.5 * (lo + hi);
                    if holds(mid, increment(mid)) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                hi
            } else {
                x
            };
            return Ok(JumpResult {
                delta,
                new_frontier: lambda_minus + delta,
                absorbed_mass: increment(delta),
                absorbed_indices: Vec::new(),
                total_freeze: false,
            });
        }
        if x >= scan.x_max {
            return Ok(JumpResult {
                delta: scan.x_max,
                new_frontier: lambda_minus + scan.x_max,
                absorbed_mass: inc,
                absorbed_indices: Vec::new(),
                total_freeze: true,
            });
        }
        prev_x = x;
        prev_inc = inc;
        k += 1;
    }
}

fn check_alive(alive_sorted: &[f64], lambda_start: f64) -> Result<(), JumpError> {
    for (i, w) in alive_sorted.windows(2).enumerate() {
        if w[1] < w[0] {
            return Err(JumpError::Unsorted(i + 1));
        }
    }
    if let Some(&first) = alive_sorted.first() {
        if first <= lambda_start {
            return Err(JumpError::BelowFrontier {
                position: first,
                frontier: lambda_start,
            });
        }
    }
    Ok(())
}

/// Absorption cascade started by `k0` fresh absorptions.
///
/// Each absorbed particle moves the frontier by `alpha / n_total`; the
/// cascade stops at the least fixed point of
/// `m -> #{alive in (lambda_start, lambda_start + alpha (k0 + m) / n_total]}`.
pub fn cascade_jump(
    alive_sorted: &[f64],
    lambda_start: f64,
    k0: usize,
    alpha: f64,
    n_total: usize,
) -> Result<JumpResult, JumpError> {
    check_alive(alive_sorted, lambda_start)?;
    let quantum = alpha / n_total as f64;
    let mut k = 0usize;
    loop {
        let level = lambda_start + quantum * (k0 + k) as f64;
        let mut next = k;
        while next < alive_sorted.len() && alive_sorted[next] <= level {
            next += 1;
        }
        if next == k {
            break;
        }
        k = next;
    }
    let delta = quantum * (k0 + k) as f64;
    Ok(JumpResult {
        delta,
        new_frontier: lambda_start + delta,
        absorbed_mass: k as f64 / n_total as f64,
        absorbed_indices: (0..k).collect(),
        total_freeze: false,
    })
}

/// Exhaustive least-fixed-point check of a cascade result.
pub fn verify_cascade_minimality(
    alive_sorted: &[f64],
    lambda_start: f64,
    k0: usize,
    alpha: f64,
    n_total: usize,
    result: &JumpResult,
) -> bool {
    let quantum = alpha / n_total as f64;
    let count_at = |m: usize| {
        let level = lambda_start + quantum * (k0 + m) as f64;
        alive_sorted
            .iter()
            .filter(|&&x| x > lambda_start && x <= level)
            .count()
    };
    let least = (0..=n_total.max(alive_sorted.len())).find(|&m| count_at(m) == m);
    let Some(m) = least else {
        return false;
    };
    let expected_delta = quantum * (k0 + m) as f64;
    result.absorbed_indices.len() == m
        && result.absorbed_indices.iter().enumerate().all(|(i, &j)| i == j)
        && (result.delta - expected_delta).abs() <= 1e-12 * (1.0 + expected_delta.abs())
}

/// Weighted cascade over ordered atoms.
///
/// Atom `i` is absorbed once the frontier exceeds `thresholds[i]`, and each
/// absorbed atom moves the frontier by `alpha * masses[i]`. Atoms must be
/// ordered by threshold. Returns the number absorbed and the final frontier.
pub fn weighted_cascade(thresholds: &[f64], masses: &[f64], lambda_start: f64, alpha: f64) -> (usize, f64) {
    let mut lambda = lambda_start;
    let mut k = 0;
    while k < thresholds.len() && thresholds[k] < lambda {
        lambda += alpha * masses[k];
        k += 1;
    }
    (k, lambda)
}
