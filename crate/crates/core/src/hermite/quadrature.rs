//! Gaussian-expectation quadrature rules.
//!
//! Every rule here integrates against the standard normal density: the
//! weights sum to one and `Σ w_i f(x_i) ≈ E f(X)`, `X ~ N(0,1)`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

/// Integration cutoff of the half-line rules. The Gaussian density at 24 is
/// below 1e-125, far past double-precision relevance for the integrands
/// used here (polynomial growth times at most `e^{x²/4}`).
pub const HALF_LINE_CUTOFF: f64 = 24.0;

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `E f(X)` under the rule.
    pub fn expect(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum RuleKind {
    Hermite,
    Split,
}

type Cache = RwLock<HashMap<(RuleKind, usize), Arc<QuadratureRule>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn cached(kind: RuleKind, order: usize, build: fn(usize) -> QuadratureRule) -> Arc<QuadratureRule> {
    if let Some(rule) = cache()
        .read()
        .expect("quadrature cache poisoned")
        .get(&(kind, order))
    {
        return Arc::clone(rule);
    }
    let rule = Arc::new(build(order));
    cache()
        .write()
        .expect("quadrature cache poisoned")
        .entry((kind, order))
        .or_insert(rule)
        .clone()
}

/// Gauss–Hermite rule of the given order, rescaled to the standard normal
/// (`x = √2 t`, weights divided by `√π`). Exact for polynomials of degree
/// below `2 * order`.
pub fn gauss_hermite(order: usize) -> Arc<QuadratureRule> {
    cached(RuleKind::Hermite, order, build_gauss_hermite)
}

/// Gauss–Legendre on `[-CUTOFF, 0]` and `[0, CUTOFF]` with `order` nodes per
/// half, weighted by the normal density. Meant for integrands with a kink or
/// jump at the origin, where Gauss–Hermite converges only algebraically.
pub fn split_gaussian(order: usize) -> Arc<QuadratureRule> {
    cached(RuleKind::Split, order, build_split)
}

fn build_gauss_hermite(n: usize) -> QuadratureRule {
    assert!(n >= 1, "quadrature order must be positive");
    // Roots of H_n are the eigenvalues of the Jacobi matrix with zero
    // diagonal and off-diagonal √(k/2). Each is polished by Newton on the
    // orthonormal recurrence, which also yields the weight 2/p'².
    let pim4 = PI.powf(-0.25);
    let m = n.div_ceil(2);
    let mut off: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
    let mut roots = symmetric_tridiagonal_eigenvalues(vec![0.0; n], &mut off);
    roots.sort_by(|a, b| b.total_cmp(a));
    let mut t = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..m {
        let mut z = roots[i];
        let mut pp = 0.0;
        for _ in 0..8 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        t[i] = z;
        t[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        t[m - 1] = 0.0;
    }
    let inv_sqrt_pi = 1.0 / PI.sqrt();
    // Ascending order keeps summation order deterministic and symmetric.
    let mut pairs: Vec<(f64, f64)> = t
        .into_iter()
        .zip(w)
        .map(|(t, w)| (std::f64::consts::SQRT_2 * t, w * inv_sqrt_pi))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (nodes, weights) = pairs.into_iter().unzip();
    QuadratureRule { nodes, weights }
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL with
/// Wilkinson shifts. `off[k]` couples rows `k` and `k + 1`.
fn symmetric_tridiagonal_eigenvalues(mut d: Vec<f64>, off: &mut [f64]) -> Vec<f64> {
    let n = d.len();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(off);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(
                iter <= 60,
                "tridiagonal eigenvalue iteration did not converge"
            );
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be positive");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn build_split(order: usize) -> QuadratureRule {
    let (x, w) = gauss_legendre(order);
    let half = HALF_LINE_CUTOFF / 2.0;
    let density = |t: f64| (-0.5 * t * t).exp() / (2.0 * PI).sqrt();
    let mut nodes = Vec::with_capacity(2 * order);
    let mut weights = Vec::with_capacity(2 * order);
    // negative half, ascending
    for (xi, wi) in x.iter().zip(&w).rev() {
        let t = -half * (xi + 1.0);
        nodes.push(t);
        weights.push(half * wi * density(t));
    }
    for (xi, wi) in x.iter().zip(&w) {
        let t = half * (xi + 1.0);
        nodes.push(t);
        weights.push(half * wi * density(t));
    }
    QuadratureRule { nodes, weights }
}
