//! Budgeted maximization over a box of real parameters: a grid pass
//! followed by golden-section sweeps per coordinate.
//!
//! Evaluations may be invalid (`None`), which counts as `-inf`. Typical
//! objectives here rise up to a validity cliff, so the golden-section step
//! keeps the valid side when exactly one probe is invalid.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase")]
pub struct SearchBudget {
    /// Grid points per coordinate.
    pub grid_points: usize,
    pub golden_iters: usize,
    pub sweeps: usize,
    pub max_evals: usize,
    pub boundary_samples: usize,
    pub image_samples: usize,
    pub coverage_samples: usize,
    pub eps_cov: f64,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            grid_points: 9,
            golden_iters: 40,
            sweeps: 2,
            max_evals: 400,
            boundary_samples: 512,
            image_samples: 512,
            coverage_samples: 512,
            eps_cov: 1e-3,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Best<T> {
    pub params: Vec<f64>,
    pub value: f64,
    pub payload: T,
    pub evals: usize,
}

/// Larger value wins; equal values go to the lexicographically smaller
/// parameter vector.
fn better(value: f64, params: &[f64], than_value: f64, than_params: &[f64]) -> bool {
    match value.partial_cmp(&than_value) {
        Some(Ordering::Greater) => true,
        Some(Ordering::Equal) => lex_less(params, than_params),
        _ => false,
    }
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(Ordering::Less) => return true,
            Some(Ordering::Greater) => return false,
            _ => {}
        }
    }
    false
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 || hi <= lo {
        return vec![hi];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Maximizes `eval` over the box `ranges`. `extra` lists additional grid
/// values per coordinate (natural candidates such as the value making a
/// map onto). Deterministic for a deterministic `eval`.
pub fn maximize<T, F>(ranges: &[(f64, f64)], extra: &[Vec<f64>], budget: &SearchBudget, eval: F) -> Option<Best<T>>
where
    T: Send,
    F: Fn(&[f64]) -> Option<(f64, T)> + Sync,
{
    let dim = ranges.len();
    if dim == 0 {
        let (value, payload) = eval(&[])?;
        return Some(Best { params: vec![], value, payload, evals: 1 });
    }
    let max_evals = budget.max_evals.max(1);
    // grid size per coordinate so that the full grid uses at most half the budget
    let mut g = budget.grid_points.max(2);
    while g > 2 && g.pow(dim as u32) > max_evals / 2 {
        g -= 1;
    }
    let axes: Vec<Vec<f64>> = ranges
        .iter()
        .enumerate()
        .map(|(i, &(lo, hi))| {
            let mut v = linspace(lo, hi, g);
            if let Some(e) = extra.get(i) {
                v.extend(e.iter().copied().filter(|x| *x >= lo && *x <= hi));
            }
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v.dedup();
            v
        })
        .collect();
    let mut grid: Vec<Vec<f64>> = vec![vec![]];
    for axis in &axes {
        grid = grid
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    grid.truncate(max_evals);
    let mut evals = grid.len();
    let results: Vec<Option<(f64, T)>> = grid.par_iter().map(|p| eval(p)).collect();
    let mut best: Option<Best<T>> = None;
    for (p, r) in grid.into_iter().zip(results) {
        if let Some((value, payload)) = r {
            let replace = match &best {
                None => true,
                Some(b) => better(value, &p, b.value, &b.params),
            };
            if replace {
                best = Some(Best { params: p, value, payload, evals: 0 });
            }
        }
    }
    let mut best = best?;

    let phi = (5f64.sqrt() - 1.0) / 2.0;
    'sweeps: for _ in 0..budget.sweeps {
        for i in 0..dim {
            let axis = &axes[i];
            let c = best.params[i];
            let pos = axis.iter().position(|&x| x >= c).unwrap_or(axis.len() - 1);
            let mut a = axis[pos.saturating_sub(1)].max(ranges[i].0);
            let mut b = axis[(pos + 1).min(axis.len() - 1)].min(ranges[i].1);
            if b <= a {
                continue;
            }
            let probe = |x: f64, best: &Best<T>| {
                let mut p = best.params.clone();
                p[i] = x;
                let r = eval(&p);
                (p, r)
            };
            let mut x1 = b - phi * (b - a);
            let mut x2 = a + phi * (b - a);
            let (p1, r1) = probe(x1, &best);
            let (p2, r2) = probe(x2, &best);
            evals += 2;
            let mut f1 = r1.as_ref().map(|r| r.0);
            let mut f2 = r2.as_ref().map(|r| r.0);
            absorb(&mut best, p1, r1);
            absorb(&mut best, p2, r2);
            for _ in 0..budget.golden_iters {
                if evals + 2 > max_evals {
                    break 'sweeps;
                }
                let move_right = match (f1, f2) {
                    (Some(v1), Some(v2)) => v2 >= v1,
                    (Some(_), None) => false,
                    (None, Some(_)) => true,
                    (None, None) => {
                        let c = best.params[i];
                        if c <= x1 {
                            b = x1;
                        } else if c >= x2 {
                            a = x2;
                        } else {
                            a = x1;
                            b = x2;
                        }
                        x1 = b - phi * (b - a);
                        x2 = a + phi * (b - a);
                        let (p1, r1) = probe(x1, &best);
                        let (p2, r2) = probe(x2, &best);
                        evals += 2;
                        f1 = r1.as_ref().map(|r| r.0);
                        f2 = r2.as_ref().map(|r| r.0);
                        absorb(&mut best, p1, r1);
                        absorb(&mut best, p2, r2);
                        continue;
                    }
                };
                if move_right {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + phi * (b - a);
                    let (p, r) = probe(x2, &best);
                    f2 = r.as_ref().map(|r| r.0);
                    absorb(&mut best, p, r);
                } else {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - phi * (b - a);
                    let (p, r) = probe(x1, &best);
                    f1 = r.as_ref().map(|r| r.0);
                    absorb(&mut best, p, r);
                }
                evals += 1;
            }
        }
    }
    best.evals = evals;
    Some(best)
}

fn absorb<T>(best: &mut Best<T>, params: Vec<f64>, r: Option<(f64, T)>) {
    if let Some((value, payload)) = r {
        if better(value, &params, best.value, &best.params) {
            *best = Best { params, value, payload, evals: best.evals };
        }
    }
}
