//! Panel-based Gauss–Legendre quadrature.
//!
//! All theory-side integrals in this crate go through [`integrate_refining`]:
//! the integration domain is cut into panels at caller-supplied breakpoints
//! (placed on the integrand's features), each panel gets a fixed-order
//! Gauss–Legendre rule, and the panel count is doubled until two successive
//! estimates agree to the requested relative tolerance.

use num_complex::Complex64;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1],
/// computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess for the i-th root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(x) and P_n'(x) by upward recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

const PANEL_ORDER: usize = 16;

fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    use std::sync::OnceLock;
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

fn integrate_once(f: &impl Fn(f64) -> Complex64, panels: &[f64]) -> Complex64 {
    let (nodes, weights) = panel_rule();
    let mut total = Complex64::new(0.0, 0.0);
    for pair in panels.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in nodes.iter().zip(weights.iter()) {
            acc += w * f(mid + half * x);
        }
        total += half * acc;
    }
    total
}

fn split_panels(panels: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(panels.len() * 2 - 1);
    for pair in panels.windows(2) {
        out.push(pair[0]);
        out.push(0.5 * (pair[0] + pair[1]));
    }
    out.push(*panels.last().unwrap());
    out
}

/// Integrate `f` over the union of panels defined by ascending `breakpoints`,
/// doubling the panel count until successive estimates differ by less than
/// `rel_tol` relative to the current estimate (twice in a row, to guard
/// against accidental agreement).
pub fn integrate_refining(
    f: &impl Fn(f64) -> Complex64,
    breakpoints: &[f64],
    rel_tol: f64,
    max_doublings: usize,
) -> Complex64 {
    debug_assert!(breakpoints.len() >= 2);
    debug_assert!(breakpoints.windows(2).all(|p| p[0] < p[1]));
    let mut panels: Vec<f64> = breakpoints.to_vec();
    let mut prev = integrate_once(f, &panels);
    let mut agreed = 0;
    for _ in 0..max_doublings {
        panels = split_panels(&panels);
        let cur = integrate_once(f, &panels);
        let scale = cur.norm().max(f64::MIN_POSITIVE);
        if (cur - prev).norm() <= rel_tol * scale {
            agreed += 1;
            if agreed >= 2 {
                return cur;
            }
        } else {
            agreed = 0;
        }
        prev = cur;
    }
    prev
}

/// Real-valued convenience wrapper around [`integrate_refining`].
pub fn integrate_refining_real(
    f: &impl Fn(f64) -> f64,
    breakpoints: &[f64],
    rel_tol: f64,
    max_doublings: usize,
) -> f64 {
    integrate_refining(
        &|x| Complex64::new(f(x), 0.0),
        breakpoints,
        rel_tol,
        max_doublings,
    )
    .re
}

/// Ascending breakpoints covering [lo, hi] with a geometric ladder of panel
/// edges clustered around each entry of `features` (half-width `w0`, growing
/// by powers of two). Used to seed the refinement on peaked integrands.
pub fn feature_breakpoints(lo: f64, hi: f64, features: &[f64], w0: f64) -> Vec<f64> {
    assert!(lo < hi);
    let mut pts = vec![lo, hi];
    for &c in features {
        pts.push(c.clamp(lo, hi));
        let mut w = w0;
        // ladder out to the full interval on both sides
        while w < (hi - lo) {
            for s in [-1.0, 1.0] {
                let x = c + s * w;
                if x > lo && x < hi {
                    pts.push(x);
                }
            }
            w *= 2.0;
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // drop near-duplicate edges (they create zero-width panels)
    let span = hi - lo;
    let mut out = Vec::with_capacity(pts.len());
    for p in pts {
        if out.is_empty() || p - *out.last().unwrap() > 1e-12 * span {
            out.push(p);
        }
    }
    if *out.last().unwrap() < hi {
        out.push(hi);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_nodes_integrate_polynomials_exactly() {
        let (nodes, weights) = gauss_legendre(16);
        // degree-31 monomial is integrated exactly by a 16-point rule
        let exact = 2.0 / 31.0; // integral of x^30 over [-1,1]
        let got: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * x.powi(30))
            .sum();
        assert!((got - exact).abs() < 1e-14, "got {got}, want {exact}");
    }

    #[test]
    fn refining_integrates_lorentzian_tail() {
        // integral of 1/(1+x^2) over [-W, W] -> 2 atan(W)
        let w = 1e6;
        let pts = feature_breakpoints(-w, w, &[0.0], 0.25);
        let got = integrate_refining_real(&|x| 1.0 / (1.0 + x * x), &pts, 1e-10, 20);
        let exact = 2.0 * w.atan();
        assert!(
            ((got - exact) / exact).abs() < 1e-9,
            "got {got}, want {exact}"
        );
    }

    #[test]
    fn refining_handles_oscillatory_factor() {
        // integral of cos(40 x) e^{-x} over [0, 10]
        let f = |x: f64| (40.0 * x).cos() * (-x).exp();
        let pts: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
        let got = integrate_refining_real(&f, &pts, 1e-12, 20);
        // antiderivative of e^{-x} cos(bx): e^{-x} (b sin(bx) - cos(bx)) / (1+b^2)
        let anti = |x: f64| (-x as f64).exp() * (40.0 * (40.0 * x).sin() - (40.0 * x).cos()) / 1601.0;
        let exact = anti(10.0) - anti(0.0);
        assert!((got - exact).abs() < 1e-12, "got {got}, want {exact}");
    }
}
