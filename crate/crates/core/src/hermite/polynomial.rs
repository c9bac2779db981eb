/// Normalized probabilists' Hermite polynomial `he_k(x) = He_k(x)/√(k!)`,
/// orthonormal under the standard normal.
///
/// Uses `he_{k+1} = (x he_k - √k he_{k-1}) / √(k+1)`, which stays bounded
/// where the unnormalized recurrence overflows.
pub fn hermite_eval(k: usize, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for j in 0..k {
        let jf = j as f64;
        let next = (x * cur - jf.sqrt() * prev) / (jf + 1.0).sqrt();
        prev = cur;
        cur = next;
    }
    cur
}

/// Fills `out[k] = he_k(x)` for `k < out.len()`.
pub fn hermite_values(x: f64, out: &mut [f64]) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for (j, slot) in out.iter_mut().enumerate() {
        *slot = cur;
        let jf = j as f64;
        let next = (x * cur - jf.sqrt() * prev) / (jf + 1.0).sqrt();
        prev = cur;
        cur = next;
    }
}

pub(crate) fn sqrt_factorial(k: usize) -> f64 {
    (1..=k).map(|j| (j as f64).sqrt()).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::quadrature::gauss_hermite;

    #[test]
    fn low_degrees() {
        assert_eq!(hermite_eval(0, 3.7), 1.0);
        assert_eq!(hermite_eval(1, -2.5), -2.5);
        assert!((hermite_eval(2, 0.0) + 1.0 / 2f64.sqrt()).abs() < 1e-15);
        let x = 1.3;
        assert!((hermite_eval(2, x) - (x * x - 1.0) / 2f64.sqrt()).abs() < 1e-15);
        assert!((hermite_eval(3, x) - (x.powi(3) - 3.0 * x) / 6f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn values_match_single_evaluation() {
        let mut v = [0.0; 12];
        hermite_values(0.77, &mut v);
        for (k, &vk) in v.iter().enumerate() {
            assert_eq!(vk, hermite_eval(k, 0.77));
        }
    }

    #[test]
    fn orthonormal_under_gaussian() {
        let rule = gauss_hermite(200);
        let mut vals = vec![0.0; 21];
        let mut gram = vec![0.0; 21 * 21];
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            hermite_values(x, &mut vals);
            for j in 0..21 {
                for k in 0..21 {
                    gram[j * 21 + k] += w * vals[j] * vals[k];
                }
            }
        }
        for j in 0..21 {
            for k in 0..21 {
                let want = if j == k { 1.0 } else { 0.0 };
                assert!(
                    (gram[j * 21 + k] - want).abs() <= 1e-10,
                    "({j},{k}) = {}",
                    gram[j * 21 + k]
                );
            }
        }
    }
}
