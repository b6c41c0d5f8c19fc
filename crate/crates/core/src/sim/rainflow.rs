//! Four-point rainflow counting and damage-equivalent loads.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    /// Peak-to-peak range.
    pub range: f64,
    pub mean: f64,
    /// 1 for a closed cycle, 0.5 for a residue half cycle.
    pub count: f64,
}

fn turning_points(series: &[f64]) -> Vec<f64> {
    let mut tp: Vec<f64> = Vec::with_capacity(series.len());
    for &x in series {
        if tp.last() == Some(&x) {
            continue;
        }
        if tp.len() >= 2 {
            let a = tp[tp.len() - 2];
            let b = tp[tp.len() - 1];
            if (b - a) * (x - b) > 0.0 {
                // b is not an extremum
                tp.pop();
            }
        }
        tp.push(x);
    }
    tp
}

/// Cycles of `series`; residue ranges are counted as half cycles.
pub fn rainflow(series: &[f64]) -> Vec<Cycle> {
    if series.len() < 3 {
        return Vec::new();
    }
    let mut cycles = Vec::new();
    let mut stack: Vec<f64> = Vec::new();
    for x in turning_points(series) {
        stack.push(x);
        while stack.len() >= 4 {
            let k = stack.len();
            let (a, b, c, d) = (stack[k - 4], stack[k - 3], stack[k - 2], stack[k - 1]);
            let inner = (c - b).abs();
            if inner <= (b - a).abs() && inner <= (d - c).abs() {
                cycles.push(Cycle { range: inner, mean: 0.5 * (b + c), count: 1.0 });
                stack.drain(k - 3..k - 1);
            } else {
                break;
            }
        }
    }
    for w in stack.windows(2) {
        cycles.push(Cycle {
            range: (w[1] - w[0]).abs(),
            mean: 0.5 * (w[0] + w[1]),
            count: 0.5,
        });
    }
    cycles
}

/// `(Σ nᵢ Sᵢ^m / n_ref)^{1/m}`.
pub fn del_from_cycles(cycles: &[Cycle], m: f64, n_ref: f64) -> f64 {
    let damage: f64 = cycles.iter().map(|c| c.count * c.range.powf(m)).sum();
    (damage / n_ref).powf(1.0 / m)
}

pub fn del(series: &[f64], m: f64, n_ref: f64) -> f64 {
    del_from_cycles(&rainflow(series), m, n_ref)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_short_series() {
        assert!(rainflow(&[1.0, 1.0, 1.0, 1.0]).iter().all(|c| c.range == 0.0));
        assert_eq!(del(&[3.0; 100], 4.0, 1.0), 0.0);
        assert!(rainflow(&[1.0, 2.0]).is_empty());
    }

    #[test]
    fn textbook_sequence() {
        // classic example: -2 1 -3 5 -1 3 -4 4 -2
        let s = [-2.0, 1.0, -3.0, 5.0, -1.0, 3.0, -4.0, 4.0, -2.0];
        let c = rainflow(&s);
        let full: Vec<f64> = c.iter().filter(|c| c.count == 1.0).map(|c| c.range).collect();
        assert_eq!(full, vec![4.0]);
        let half: f64 = c.iter().filter(|c| c.count == 0.5).map(|c| c.range).sum();
        assert_eq!(half, 3.0 + 4.0 + 8.0 + 9.0 + 8.0 + 6.0);
    }

    #[test]
    fn monotone_run_is_one_half_cycle() {
        let c = rainflow(&[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(c, vec![Cycle { range: 3.0, mean: 1.5, count: 0.5 }]);
    }
}
