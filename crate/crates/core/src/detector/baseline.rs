use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::embedding::Observation;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest acceptable condition number of the window-mean covariance.
pub const MAX_CONDITION: f64 = 1e12;
/// Weight of the scaled identity mixed into an ill-conditioned covariance.
pub const SHRINKAGE: f64 = 1e-6;

/// Nominal reference for the window statistic: training mean and the
/// covariance of the difference between training and window means.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineModel<T: Real> {
    mean0: DVector<T>,
    cov: DMatrix<T>,
    scale: T,
    sigma: DMatrix<T>,
    sigma_inverse: DMatrix<T>,
    shrunk: bool,
}

impl<T: Real> BaselineModel<T> {
    /// Training mean `y0`.
    pub fn mean0(&self) -> &DVector<T> {
        &self.mean0
    }

    /// Unbiased covariance of the training vectors, before shrinkage.
    pub fn cov(&self) -> &DMatrix<T> {
        &self.cov
    }

    /// `1/|T_p| + 1/n`.
    pub fn scale(&self) -> T {
        self.scale
    }

    /// Covariance of `y0 - y_w` actually used, after any shrinkage.
    pub fn sigma(&self) -> &DMatrix<T> {
        &self.sigma
    }

    pub fn sigma_inverse(&self) -> &DMatrix<T> {
        &self.sigma_inverse
    }

    pub fn was_shrunk(&self) -> bool {
        self.shrunk
    }

    pub fn dim(&self) -> usize {
        self.mean0.len()
    }

    /// `sqrt(a^T Sigma^-1 a)`.
    pub fn mahalanobis(&self, a: &DVector<T>, b: &DVector<T>) -> Result<T> {
        if a.len() != self.dim() || b.len() != self.dim() {
            return Err(Error::invalid(format!(
                "vectors of dimension {} and {} against a model of dimension {}",
                a.len(),
                b.len(),
                self.dim()
            )));
        }
        let diff = a - b;
        let q = diff.dot(&(&self.sigma_inverse * &diff));
        Ok(if q > T::zero() { q.sqrt() } else { T::zero() })
    }
}

/// Fits the nominal model from the covariance sample `tp` for windows of
/// `n` observations.
pub fn fit_baseline<T: Real, O: Observation<T>>(tp: &[O], n: usize) -> Result<BaselineModel<T>> {
    if n == 0 {
        return Err(Error::invalid("window size must be at least 1"));
    }
    let Some(first) = tp.first() else {
        return Err(Error::invalid("empty training sample"));
    };
    let m = first.vector().len();
    if m == 0 {
        return Err(Error::invalid("zero-dimensional observations"));
    }
    if tp.len() < m + 2 {
        return Err(Error::invalid(format!(
            "{} training vectors for dimension {m}; need at least {}",
            tp.len(),
            m + 2
        )));
    }
    if tp.iter().any(|o| o.vector().len() != m) {
        return Err(Error::invalid("training vectors differ in dimension"));
    }

    let count = T::from_usize_lossy(tp.len());
    let mut mean0 = DVector::zeros(m);
    for o in tp {
        mean0 += o.vector();
    }
    mean0 /= count;
    let mut cov = DMatrix::zeros(m, m);
    for o in tp {
        let c = o.vector() - &mean0;
        cov.ger(T::one(), &c, &c, T::one());
    }
    cov /= count - T::one();
    cov = (&cov + cov.transpose()) * T::lit(0.5);

    let scale = T::one() / count + T::one() / T::from_usize_lossy(n);
    let mut shrunk = false;
    let mut sigma = &cov * scale;
    if !well_conditioned(&sigma) {
        let trace = cov.trace() / T::from_usize_lossy(m);
        let eps = T::lit(SHRINKAGE);
        let regular = &cov * (T::one() - eps) + DMatrix::identity(m, m) * (eps * trace);
        sigma = regular * scale;
        shrunk = true;
        if !well_conditioned(&sigma) {
            return Err(Error::DegeneratePrototypes(
                "training covariance is singular even after shrinkage; prototypes are redundant".into(),
            ));
        }
    }
    let sigma_inverse = symmetric_inverse(&sigma);
    Ok(BaselineModel {
        mean0,
        cov,
        scale,
        sigma,
        sigma_inverse,
        shrunk,
    })
}

fn well_conditioned<T: Real>(a: &DMatrix<T>) -> bool {
    let eig = SymmetricEigen::new(a.clone()).eigenvalues;
    let max = eig.iter().copied().fold(T::lit(f64::NEG_INFINITY), |x, y| if y > x { y } else { x });
    let min = eig.iter().copied().fold(T::infinity(), |x, y| if y < x { y } else { x });
    min > T::zero() && max / min <= T::lit(MAX_CONDITION)
}

/// Inverse through the eigendecomposition, symmetric by construction.
fn symmetric_inverse<T: Real>(a: &DMatrix<T>) -> DMatrix<T> {
    let eig = SymmetricEigen::new(a.clone());
    let inv = eig.eigenvalues.map(|l| T::one() / l);
    &eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose()
}

/// Mahalanobis distance between the training mean and the mean of `window`.
pub fn window_statistic<T: Real, O: Observation<T>>(model: &BaselineModel<T>, window: &[O]) -> Result<T> {
    if window.is_empty() {
        return Err(Error::invalid("empty window"));
    }
    let m = model.dim();
    let mut mean = DVector::zeros(m);
    for o in window {
        if o.vector().len() != m {
            return Err(Error::invalid(format!(
                "window vector of dimension {} against a model of dimension {m}",
                o.vector().len()
            )));
        }
        mean += o.vector();
    }
    mean /= T::from_usize_lossy(window.len());
    model.mahalanobis(&model.mean0, &mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn vecs(rows: &[&[f64]]) -> Vec<DVector<f64>> {
        rows.iter().map(|r| DVector::from_row_slice(r)).collect()
    }

    #[test]
    fn identical_vectors_are_degenerate() {
        let tp = vec![DVector::from_vec(vec![1.0, 2.0]); 10];
        assert!(matches!(fit_baseline(&tp, 5), Err(Error::DegeneratePrototypes(_))));
    }

    #[test]
    fn mean_of_two_points() {
        let tp = vecs(&[&[0.0, 0.0], &[2.0, 2.0], &[0.0, 2.0], &[2.0, 0.0]]);
        let model = fit_baseline(&tp, 1).unwrap();
        assert_eq!(model.mean0().as_slice(), &[1.0, 1.0]);
        assert_eq!(model.scale(), 1.25);
        // unbiased: 4/3 on the diagonal, no correlation
        assert!((model.cov()[(0, 0)] - 4.0 / 3.0).abs() < 1e-12);
        assert!(model.cov()[(0, 1)].abs() < 1e-12);
        assert!(!model.was_shrunk());
    }

    #[test]
    fn standard_normal_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let tp: Vec<DVector<f64>> = (0..10_000)
            .map(|_| DVector::from_fn(4, |_, _| StandardNormal.sample(&mut rng)))
            .collect();
        let model = fit_baseline(&tp, 10).unwrap();
        assert!((model.cov() - DMatrix::identity(4, 4)).abs().max() < 0.05);
    }

    #[test]
    fn diagonal_mahalanobis() {
        // scale = 1/4 + 1/1 would blur the example; set sigma directly
        let model = BaselineModel {
            mean0: DVector::from_vec(vec![0.0, 0.0]),
            cov: DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0])),
            scale: 1.0,
            sigma: DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0])),
            sigma_inverse: DMatrix::from_diagonal(&DVector::from_vec(vec![0.25, 1.0])),
            shrunk: false,
        };
        let w = vecs(&[&[2.0, 3.0]]);
        assert!((window_statistic(&model, &w).unwrap() - 10f64.sqrt()).abs() < 1e-12);
        let at_mean = vecs(&[&[1.0, -1.0], &[-1.0, 1.0]]);
        assert_eq!(window_statistic(&model, &at_mean).unwrap(), 0.0);
        assert!(window_statistic(&model, &vecs(&[&[1.0]])).is_err());
        assert!(window_statistic::<f64, DVector<f64>>(&model, &[]).is_err());
    }

    #[test]
    fn nearly_collinear_sample_is_shrunk() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let tp: Vec<DVector<f64>> = (0..50)
            .map(|_| {
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                DVector::from_vec(vec![a, a + 1e-9 * b, b])
            })
            .collect();
        let model = fit_baseline(&tp, 5).unwrap();
        assert!(model.was_shrunk());
        let id = model.sigma() * model.sigma_inverse();
        assert!((id - DMatrix::identity(3, 3)).abs().max() < 1e-4);
    }

    #[test]
    fn too_few_vectors() {
        let tp = vecs(&[&[0.0, 1.0], &[1.0, 0.0], &[2.0, 2.0]]);
        assert!(fit_baseline(&tp, 1).is_err());
        assert!(fit_baseline(&tp, 0).is_err());
    }
}
