//! Reference computations shared by the integration tests. Nothing here calls
//! into the crate's numerical code.

#![allow(dead_code)]

use std::f64::consts::PI;

fn normal_density(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * PI).sqrt()
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = simpson(a, b, fa, fm, fb);
    adaptive(f, a, b, fa, fm, fb, whole, tol, 60)
}

/// `P(Z > x)` as `½ - ∫_0^x φ(t) dt`.
pub fn q_oracle(x: f64) -> f64 {
    if x == 0.0 {
        return 0.5;
    }
    let area = integrate(&normal_density, 0.0, x.abs(), 1e-15);
    if x > 0.0 {
        0.5 - area
    } else {
        0.5 + area
    }
}

/// Straightforward tug-of-war simulation used as a reference for the final-step
/// correct-selection rate. Returns `(rate, standard error)`.
pub fn tow_correct_rate(probs: &[f64], omega: f64, amplitude: f64, trials: u64, horizon: u64, seed: u64) -> (f64, f64) {
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    let m = probs.len();
    let best = (0..m).max_by(|&a, &b| probs[a].total_cmp(&probs[b])).unwrap();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut hits = 0u64;
    for _ in 0..trials {
        let mut q = vec![0.0f64; m];
        let mut last = 0;
        for _ in 0..horizon {
            let total: f64 = q.iter().sum();
            let mut top = f64::NEG_INFINITY;
            let mut ties: Vec<usize> = Vec::new();
            for (k, &qk) in q.iter().enumerate() {
                let x = qk - (total - qk) / (m as f64 - 1.0) + rng.random_range(-amplitude..=amplitude);
                if x > top {
                    top = x;
                    ties.clear();
                    ties.push(k);
                } else if x == top {
                    ties.push(k);
                }
            }
            let k = ties[rng.random_range(0..ties.len())];
            if rng.random::<f64>() < probs[k] {
                q[k] += 1.0;
            } else {
                q[k] -= omega;
            }
            last = k;
        }
        hits += u64::from(last == best);
    }
    let p = hits as f64 / trials as f64;
    (p, (p * (1.0 - p) / trials as f64).sqrt())
}
