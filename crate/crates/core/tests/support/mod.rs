//! Reference computations shared by the oracle tests and the acceptance run.

use trickle_core::model::gamma_exact;

pub fn choose(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Adaptive Simpson quadrature.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 50)
}

/// Average over every `n`-subset of `P(at most k-1 members transmit)`,
/// with each subset's distribution from `gamma_exact`.
pub fn enumerated_subset_average(probs: &[f64], n: usize, k: usize) -> f64 {
    let y = probs.len();
    let mut total = 0.0;
    let mut subsets = 0usize;
    for mask in 0u32..(1 << y) {
        if mask.count_ones() as usize != n {
            continue;
        }
        let members: Vec<f64> = (0..y)
            .filter(|l| mask & (1 << l) != 0)
            .map(|l| probs[l])
            .collect();
        total += (0..k)
            .map(|j| gamma_exact(j, &members).unwrap())
            .sum::<f64>();
        subsets += 1;
    }
    total / subsets as f64
}
