//! Limited-memory BFGS with a backtracking (Armijo) line search.
//!
//! The inverse-Hessian product comes from the usual two-loop recursion over the
//! last `history` curvature pairs. Pairs with non-positive curvature are
//! dropped rather than stored.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsConfig {
    pub history: usize,
    pub max_iters: usize,
    /// Relative improvement below which an iteration counts as stalled.
    pub rel_tol: f64,
    /// Consecutive stalled iterations before stopping.
    pub patience: usize,
    /// Sufficient-decrease constant.
    pub armijo: f64,
    pub max_backtracks: usize,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self {
            history: 10,
            max_iters: 400,
            rel_tol: 1e-7,
            patience: 5,
            armijo: 1e-4,
            max_backtracks: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxIters,
    Stalled,
    ZeroGradient,
    /// The line search could not decrease the cost even along steepest descent.
    NoProgress,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub cost: f64,
    pub iterations: usize,
    pub stop: StopReason,
}

/// Non-finite cost or gradient at an accepted point. `iteration` 0 is the start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonFinite {
    pub iteration: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

fn two_loop(g: &[f64], pairs: &VecDeque<Pair>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(pairs.len());
    for p in pairs.iter().rev() {
        let a = p.rho * dot(&p.s, &q);
        q.iter_mut().zip(&p.y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    if let Some(last) = pairs.back() {
        let gamma = dot(&last.s, &last.y) / dot(&last.y, &last.y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for (p, a) in pairs.iter().zip(alphas.iter().rev()) {
        let b = p.rho * dot(&p.y, &q);
        q.iter_mut().zip(&p.s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

/// Minimizes `f`, which returns the cost and gradient at a point.
/// `on_iter(iteration, x, cost)` runs after every accepted step, with
/// iterations numbered from 1.
pub fn minimize<F, C>(x0: Vec<f64>, mut f: F, cfg: &LbfgsConfig, mut on_iter: C) -> Result<Minimum, NonFinite>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
    C: FnMut(usize, &[f64], f64),
{
    let mut x = x0;
    let (mut fx, mut g) = f(&x);
    if !fx.is_finite() || !all_finite(&g) {
        return Err(NonFinite { iteration: 0 });
    }
    let mut pairs: VecDeque<Pair> = VecDeque::with_capacity(cfg.history);
    let mut stalled = 0usize;
    let mut iter = 0usize;

    let stop = loop {
        if iter >= cfg.max_iters {
            break StopReason::MaxIters;
        }
        let gnorm = dot(&g, &g).sqrt();
        if gnorm == 0.0 {
            break StopReason::ZeroGradient;
        }

        let mut dir = two_loop(&g, &pairs);
        let mut slope = dot(&g, &dir);
        if pairs.is_empty() || slope.is_nan() || slope >= 0.0 || !all_finite(&dir) {
            pairs.clear();
            dir = g.iter().map(|v| -v / gnorm).collect();
            slope = -gnorm;
        }

        let mut accepted = line_search(&mut f, &x, fx, &dir, slope, cfg);
        if accepted.is_none() && !pairs.is_empty() {
            pairs.clear();
            dir = g.iter().map(|v| -v / gnorm).collect();
            accepted = line_search(&mut f, &x, fx, &dir, -gnorm, cfg);
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            break StopReason::NoProgress;
        };
        iter += 1;
        if !all_finite(&g_new) {
            return Err(NonFinite { iteration: iter });
        }

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() && sy > 0.0 {
            if pairs.len() == cfg.history {
                pairs.pop_front();
            }
            pairs.push_back(Pair { s, y, rho: 1.0 / sy });
        }

        let improvement = (fx - f_new) / fx.abs().max(f64::MIN_POSITIVE);
        x = x_new;
        fx = f_new;
        g = g_new;
        on_iter(iter, &x, fx);

        if improvement < cfg.rel_tol {
            stalled += 1;
            if stalled >= cfg.patience {
                break StopReason::Stalled;
            }
        } else {
            stalled = 0;
        }
    };

    Ok(Minimum {
        x,
        cost: fx,
        iterations: iter,
        stop,
    })
}

fn line_search<F>(
    f: &mut F,
    x: &[f64],
    fx: f64,
    dir: &[f64],
    slope: f64,
    cfg: &LbfgsConfig,
) -> Option<(Vec<f64>, f64, Vec<f64>)>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let mut t = 1.0;
    for _ in 0..cfg.max_backtracks {
        let trial: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a + t * d).collect();
        let (ft, gt) = f(&trial);
        if ft.is_finite() && ft <= fx + cfg.armijo * t * slope && ft < fx {
            return Some((trial, ft, gt));
        }
        t *= 0.5;
    }
    None
}
