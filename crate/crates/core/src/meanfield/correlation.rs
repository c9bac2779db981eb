use crate::error::{Error, Result};
use crate::linalg::GramMatrix;

/// Tolerance on the unit diagonal.
pub const UNIT_DIAGONAL_TOL: f64 = 1e-9;

/// Unit-diagonal PSD matrix evolved by the mean-field recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    gram: GramMatrix,
}

impl CorrelationMatrix {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        Self::from_gram(GramMatrix::new(n, data)?)
    }

    pub fn from_gram(gram: GramMatrix) -> Result<Self> {
        let n = gram.n();
        for i in 0..n {
            let d = gram.get(i, i);
            if (d - 1.0).abs() > UNIT_DIAGONAL_TOL {
                return Err(Error::invalid(format!(
                    "diagonal entry {i} is {d}, expected 1"
                )));
            }
            for j in 0..i {
                let v = gram.get(i, j);
                if v.abs() > 1.0 + UNIT_DIAGONAL_TOL {
                    return Err(Error::invalid(format!(
                        "correlation ({i},{j}) = {v} outside [-1, 1]"
                    )));
                }
            }
        }
        Ok(Self { gram })
    }

    /// Rescales a Gram matrix with positive diagonal to unit diagonal.
    pub fn normalize(gram: &GramMatrix) -> Result<Self> {
        if let Some(i) = (0..gram.n()).find(|&i| !(gram.get(i, i) > 0.0)) {
            return Err(Error::ZeroVector { index: i });
        }
        let entries = gram
            .normalized_entries()
            .into_iter()
            .map(|v| v.clamp(-1.0, 1.0))
            .collect();
        Ok(Self {
            gram: GramMatrix::from_raw(gram.n(), entries),
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            gram: GramMatrix::identity(n),
        }
    }

    pub fn equicorrelation(n: usize, rho: f64) -> Result<Self> {
        if n >= 2 && !(rho > -1.0 / (n as f64 - 1.0) && rho <= 1.0) {
            return Err(Error::invalid(format!(
                "equicorrelation {rho} is not PSD for n = {n} (need -1/(n-1) < ρ ≤ 1)"
            )));
        }
        Self::from_gram(GramMatrix::equicorrelation(n, rho)?)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.gram.n()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.gram.get(i, j)
    }

    pub fn as_gram(&self) -> &GramMatrix {
        &self.gram
    }

    pub fn into_gram(self) -> GramMatrix {
        self.gram
    }
}

/// Lyapunov potential `γ(G) = max_{i≠j} |G_ij| / (1 - |G_ij|)`.
///
/// Returns `+inf` if some pair is perfectly (anti-)correlated.
pub fn lyapunov_gamma(g: &CorrelationMatrix) -> Result<f64> {
    gamma_of_entries(g.n(), |i, j| g.get(i, j))
}

/// [`lyapunov_gamma`] of an arbitrary Gram matrix, after normalizing it to
/// unit diagonal.
pub fn lyapunov_gamma_gram(g: &GramMatrix) -> Result<f64> {
    let n = g.n();
    let entries = g.normalized_entries();
    if let Some(i) = (0..n).find(|&i| !(g.get(i, i) > 0.0)) {
        return Err(Error::ZeroVector { index: i });
    }
    gamma_of_entries(n, |i, j| entries[i * n + j])
}

fn gamma_of_entries(n: usize, entry: impl Fn(usize, usize) -> f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid("γ needs at least two samples"));
    }
    let mut m: f64 = 0.0;
    for i in 0..n {
        for j in 0..i {
            m = m.max(entry(i, j).abs());
        }
    }
    Ok(if m >= 1.0 {
        f64::INFINITY
    } else {
        m / (1.0 - m)
    })
}
