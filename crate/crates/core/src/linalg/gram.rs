use super::matrix::{dot, DenseMatrix};
use crate::error::{Error, Result};

/// Absolute symmetry tolerance enforced when a Gram matrix is loaded.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Negative Cholesky pivots down to `-PSD_TOL * trace / n` are accepted as
/// round-off on a PSD matrix.
pub const PSD_TOL: f64 = 1e-9;
/// Absolute floor below which a pivot counts as exactly zero.
pub const PIVOT_FLOOR: f64 = 1e-300;
/// Relative (to the pivot's diagonal entry, per unit of dimension) floor for
/// zero pivots. Exactly duplicated samples leave an O(ε) pivot after
/// cancellation; this catches them.
const RELATIVE_PIVOT_FLOOR: f64 = 16.0 * f64::EPSILON;

/// Symmetric positive semi-definite matrix of pairwise inner products.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    n: usize,
    data: Vec<f64>,
}

impl GramMatrix {
    /// Validating constructor: symmetric, non-negative diagonal, numerically
    /// PSD.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || data.len() != n * n {
            return Err(Error::invalid(format!(
                "Gram matrix of order {n} needs {} entries, got {}",
                n * n,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite Gram entry"));
        }
        for i in 0..n {
            if data[i * n + i] < 0.0 {
                return Err(Error::invalid(format!("negative diagonal entry at {i}")));
            }
            for j in 0..i {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                if (a - b).abs() > SYMMETRY_TOL {
                    return Err(Error::invalid(format!(
                        "asymmetric entries ({i},{j})={a} vs ({j},{i})={b}"
                    )));
                }
            }
        }
        let g = Self { n, data };
        cholesky(&g)?;
        Ok(g)
    }

    pub(crate) fn from_raw(n: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n * n);
        Self { n, data }
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self::from_raw(n, data)
    }

    /// Unit-diagonal matrix with every off-diagonal equal to `rho`.
    pub fn equicorrelation(n: usize, rho: f64) -> Result<Self> {
        let data = (0..n * n)
            .map(|k| if k / n == k % n { 1.0 } else { rho })
            .collect();
        Self::new(n, data)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::from_raw(self.n, self.data.iter().map(|v| v * c).collect())
    }

    /// Entries `G_ij / sqrt(G_ii G_jj)`; zero rows stay zero.
    pub fn normalized_entries(&self) -> Vec<f64> {
        let n = self.n;
        let scale: Vec<f64> = (0..n)
            .map(|i| {
                let d = self.get(i, i);
                if d > 0.0 {
                    1.0 / d.sqrt()
                } else {
                    0.0
                }
            })
            .collect();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = if i == j {
                    1.0
                } else {
                    self.get(i, j) * scale[i] * scale[j]
                };
            }
        }
        out
    }

    /// Largest off-diagonal magnitude.
    pub fn max_off_diagonal(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..i {
                m = m.max(self.get(i, j).abs());
            }
        }
        m
    }

    /// Element-wise maximum absolute difference.
    pub fn max_abs_diff(&self, other: &GramMatrix) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::invalid("Gram matrices of different order"));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// `G[i][j] = <x_i, x_j>` over the columns of `x`.
pub fn gram_from_columns(x: &DenseMatrix) -> Result<GramMatrix> {
    if x.cols() == 0 {
        return Err(Error::invalid("matrix has no columns"));
    }
    if !x.is_finite() {
        return Err(Error::invalid("non-finite matrix entry"));
    }
    Ok(gram_of_rows(&x.transpose()))
}

/// `C = X Xᵀ`, the Gram matrix of the rows of `x`.
pub fn gram_from_rows(x: &DenseMatrix) -> Result<GramMatrix> {
    if x.rows() == 0 {
        return Err(Error::invalid("matrix has no rows"));
    }
    if !x.is_finite() {
        return Err(Error::invalid("non-finite matrix entry"));
    }
    Ok(gram_of_rows(x))
}

fn gram_of_rows(x: &DenseMatrix) -> GramMatrix {
    let n = x.rows();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = dot(x.row(i), x.row(j));
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    GramMatrix::from_raw(n, data)
}

/// Pivots of a semi-definite Cholesky factorization.
#[derive(Debug, Clone)]
pub struct Cholesky {
    /// Squared diagonal of the factor (`L_jj²`); zero where degenerate.
    pub pivots: Vec<f64>,
    /// True when some pivot fell below the zero floor.
    pub degenerate: bool,
}

impl Cholesky {
    pub fn log_det(&self) -> f64 {
        if self.degenerate {
            f64::NEG_INFINITY
        } else {
            self.pivots.iter().map(|p| p.ln()).sum()
        }
    }
}

/// Semi-definite Cholesky. Zero pivots zero their column of the factor after
/// checking that the residual column is consistent with PSD.
pub fn cholesky(g: &GramMatrix) -> Result<Cholesky> {
    let n = g.n();
    let tol = PSD_TOL * (g.trace() / n as f64).max(0.0);
    let rel_floor = RELATIVE_PIVOT_FLOOR * n as f64;
    let mut l = vec![0.0; n * n];
    let mut pivots = Vec::with_capacity(n);
    let mut degenerate = false;

    for j in 0..n {
        let lj = &l[j * n..j * n + j];
        let p = g.get(j, j) - dot(lj, lj);
        if p < -tol {
            return Err(Error::NotPsd { index: j, pivot: p });
        }
        let floor = PIVOT_FLOOR.max(rel_floor * g.get(j, j));
        if p <= floor {
            degenerate = true;
            pivots.push(0.0);
            for i in j + 1..n {
                let r = g.get(i, j) - dot(&l[i * n..i * n + j], &l[j * n..j * n + j]);
                // [[p, r], [r, q]] must itself be PSD.
                if r * r > (p.abs() + tol) * (g.get(i, i) + tol) {
                    return Err(Error::NotPsd { index: j, pivot: p });
                }
            }
            continue;
        }
        pivots.push(p);
        let d = p.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let r = g.get(i, j) - dot(&l[i * n..i * n + j], &l[j * n..j * n + j]);
            l[i * n + j] = r / d;
        }
    }
    Ok(Cholesky { pivots, degenerate })
}

/// Natural log of `det(G)`, or `-inf` for a numerically singular matrix.
pub fn log_det_psd(g: &GramMatrix) -> Result<f64> {
    Ok(cholesky(g)?.log_det())
}

/// Log-determinant, trace and isometry of a PSD matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralSummary {
    pub log_det: f64,
    pub trace: f64,
    pub n: usize,
    /// `det^{1/n} / (trace/n)`, in `[0, 1]`.
    pub iso: f64,
    /// `-ln iso`, `+inf` for degenerate matrices.
    pub iso_gap: f64,
}

/// Isometry of `g`, evaluated in log space so deep-layer gaps do not
/// underflow.
pub fn spectral_summary(g: &GramMatrix) -> Result<SpectralSummary> {
    let trace = g.trace();
    if !(trace > 0.0) {
        return Err(Error::DegenerateInput("Gram matrix has zero trace".into()));
    }
    let n = g.n();
    let log_det = log_det_psd(g)?;
    let mut iso_gap = (trace / n as f64).ln() - log_det / n as f64;
    if iso_gap < 0.0 {
        // AM-GM guarantees a non-negative gap; anything below is round-off.
        if iso_gap < -1e-12 {
            return Err(Error::InvalidInput(format!(
                "isometry gap {iso_gap:e} below zero beyond round-off"
            )));
        }
        iso_gap = 0.0;
    }
    Ok(SpectralSummary {
        log_det,
        trace,
        n,
        iso: (-iso_gap).exp(),
        iso_gap,
    })
}

/// Determinant sandwich for unit-diagonal PSD matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetBounds {
    /// `max(0, (1 - (n-1) m)^n)` with `m` the largest off-diagonal magnitude.
    pub lower: f64,
    /// `1 - m²`.
    pub upper: f64,
    /// The lower bound only holds when `(n-1) m <= 1`.
    pub lower_valid: bool,
}

pub fn det_bounds(g: &GramMatrix) -> Result<DetBounds> {
    let n = g.n();
    if let Some(i) = (0..n).find(|&i| (g.get(i, i) - 1.0).abs() > 1e-9) {
        return Err(Error::invalid(format!(
            "diagonal entry {i} is {} (unit diagonal required)",
            g.get(i, i)
        )));
    }
    let m = g.max_off_diagonal();
    let spread = (n as f64 - 1.0) * m;
    Ok(DetBounds {
        lower: (1.0 - spread).max(0.0).powi(n as i32),
        upper: 1.0 - m * m,
        lower_valid: spread <= 1.0,
    })
}
