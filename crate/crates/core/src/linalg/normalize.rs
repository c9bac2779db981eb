use super::matrix::{dot, DenseMatrix};
use crate::error::{Error, Result};

/// Norms below this are treated as zero vectors.
pub const ZERO_NORM: f64 = 1e-300;

/// Euclidean norms of a batch of vectors with their mean and population
/// variance.
#[derive(Debug, Clone, PartialEq)]
pub struct NormStats {
    pub norms: Vec<f64>,
    pub mean: f64,
    /// `(1/n) Σ (a_i - ā)²`.
    pub variance: f64,
}

impl NormStats {
    pub fn from_norms(norms: Vec<f64>) -> Result<Self> {
        if norms.is_empty() {
            return Err(Error::invalid("no norms"));
        }
        if norms.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::invalid("norms must be finite and non-negative"));
        }
        let n = norms.len() as f64;
        let mean = norms.iter().sum::<f64>() / n;
        let variance = norms.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
        Ok(Self {
            norms,
            mean,
            variance,
        })
    }

    /// `variance / mean²`.
    pub fn bias(&self) -> Result<f64> {
        if !(self.mean > 0.0) {
            return Err(Error::invalid("mean norm is zero"));
        }
        Ok(self.variance / (self.mean * self.mean))
    }
}

pub fn row_norms(x: &DenseMatrix) -> Vec<f64> {
    (0..x.rows())
        .map(|i| dot(x.row(i), x.row(i)).sqrt())
        .collect()
}

pub fn column_norms(x: &DenseMatrix) -> Vec<f64> {
    let mut sq = vec![0.0; x.cols()];
    for i in 0..x.rows() {
        for (s, v) in sq.iter_mut().zip(x.row(i)) {
            *s += v * v;
        }
    }
    sq.into_iter().map(f64::sqrt).collect()
}

/// Rescales every row to `target_norm`; returns the pre-normalization norm
/// statistics. With `target_norm = sqrt(cols)` this is layer normalization.
pub fn normalize_rows(x: &DenseMatrix, target_norm: f64) -> Result<(DenseMatrix, NormStats)> {
    let norms = row_norms(x);
    if let Some(index) = norms.iter().position(|&a| !(a > ZERO_NORM)) {
        return Err(Error::ZeroVector { index });
    }
    let mut out = x.clone();
    let cols = x.cols();
    for (i, a) in norms.iter().enumerate() {
        let s = target_norm / a;
        for v in &mut out.as_mut_slice()[i * cols..(i + 1) * cols] {
            *v *= s;
        }
    }
    Ok((out, NormStats::from_norms(norms)?))
}

/// Column counterpart of [`normalize_rows`]: projects each sample (column)
/// onto the sphere of radius `target_norm`.
pub fn normalize_columns(x: &DenseMatrix, target_norm: f64) -> Result<(DenseMatrix, NormStats)> {
    let norms = column_norms(x);
    if let Some(index) = norms.iter().position(|&a| !(a > ZERO_NORM)) {
        return Err(Error::ZeroVector { index });
    }
    let scale: Vec<f64> = norms.iter().map(|a| target_norm / a).collect();
    let mut out = x.clone();
    let cols = x.cols();
    for row in out.as_mut_slice().chunks_mut(cols) {
        for (v, s) in row.iter_mut().zip(&scale) {
            *v *= s;
        }
    }
    Ok((out, NormStats::from_norms(norms)?))
}

/// Subtracts each column's mean from that column.
pub fn center_columns(x: &DenseMatrix) -> DenseMatrix {
    let (rows, cols) = (x.rows(), x.cols());
    if rows == 0 {
        return x.clone();
    }
    let mut mean = vec![0.0; cols];
    for i in 0..rows {
        for (m, v) in mean.iter_mut().zip(x.row(i)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= rows as f64);
    let mut out = x.clone();
    for row in out.as_mut_slice().chunks_mut(cols) {
        for (v, m) in row.iter_mut().zip(&mean) {
            *v -= m;
        }
    }
    out
}

/// Subtracts each row's mean from that row.
pub fn center_rows(x: &DenseMatrix) -> DenseMatrix {
    let cols = x.cols();
    if cols == 0 {
        return x.clone();
    }
    let mut out = x.clone();
    for row in out.as_mut_slice().chunks_mut(cols) {
        let m = row.iter().sum::<f64>() / cols as f64;
        row.iter_mut().for_each(|v| *v -= m);
    }
    out
}

/// `1 + var/mean²` of the norms: the guaranteed isometry gain of projecting
/// the vectors onto a common sphere.
pub fn isometry_ratio_identity(norms: &NormStats) -> Result<f64> {
    if norms.norms.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::invalid("all norms must be positive"));
    }
    Ok(1.0 + norms.bias()?)
}

/// Exact value of `Iso(Ĝ)/Iso(G)` for sphere projection:
/// `mean(a²) / geomean(a²)`. Equals
/// [`isometry_ratio_identity`] times `(ā / geomean(a))² ≥ 1`, so the
/// identity above is a lower bound that is tight only for equal norms.
pub fn isometry_ratio_exact(norms: &NormStats) -> Result<f64> {
    if norms.norms.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::invalid("all norms must be positive"));
    }
    let n = norms.norms.len() as f64;
    let mean_sq = norms.norms.iter().map(|a| a * a).sum::<f64>() / n;
    let log_geo_sq = 2.0 * norms.norms.iter().map(|a| a.ln()).sum::<f64>() / n;
    Ok((mean_sq.ln() - log_geo_sq).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_rows_examples() {
        let x = DenseMatrix::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let (y, s) = normalize_rows(&x, 1.0).unwrap();
        assert_eq!(y, x);
        assert_eq!(s.variance, 0.0);

        let x = DenseMatrix::new(2, 2, vec![1.0, 0.0, 0.0, 2.0]).unwrap();
        let (y, s) = normalize_rows(&x, 1.0).unwrap();
        assert_eq!(y.as_slice(), &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!((s.mean, s.variance), (1.5, 0.25));
    }

    #[test]
    fn zero_row_is_reported() {
        let x = DenseMatrix::new(2, 2, vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            normalize_rows(&x, 1.0),
            Err(Error::ZeroVector { index: 1 })
        ));
        assert!(matches!(
            normalize_columns(&x.transpose(), 1.0),
            Err(Error::ZeroVector { index: 1 })
        ));
    }

    #[test]
    fn centering() {
        let x = DenseMatrix::new(2, 1, vec![1.0, 3.0]).unwrap();
        assert_eq!(center_columns(&x).as_slice(), &[-1.0, 1.0]);
        let c = DenseMatrix::new(2, 1, vec![-1.0, 1.0]).unwrap();
        assert_eq!(center_columns(&c), c);
        assert_eq!(center_rows(&x.transpose()).as_slice(), &[-1.0, 1.0]);
    }

    #[test]
    fn ratio_examples() {
        let eq = NormStats::from_norms(vec![2.0, 2.0, 2.0]).unwrap();
        assert_eq!(isometry_ratio_identity(&eq).unwrap(), 1.0);
        assert!((isometry_ratio_exact(&eq).unwrap() - 1.0).abs() < 1e-15);

        let s = NormStats::from_norms(vec![1.0, 2.0]).unwrap();
        assert!((isometry_ratio_identity(&s).unwrap() - 10.0 / 9.0).abs() < 1e-15);
        // mean(a²)=2.5, geomean(a²)=2
        assert!((isometry_ratio_exact(&s).unwrap() - 1.25).abs() < 1e-15);

        let z = NormStats::from_norms(vec![0.0, 1.0]).unwrap();
        assert!(isometry_ratio_identity(&z).is_err());
    }
}
