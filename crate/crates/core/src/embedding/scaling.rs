//! Identified-vertex embedding: Frobenius distance between adjacency
//! matrices, classical scaling of the prototype distances, and the linear
//! map `u = X J y^2` of a dissimilarity vector `y`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::DissimilarityVector;
use crate::error::{Error, Result};
use crate::graph::IdentifiedGraph;
use crate::scalar::Real;

/// Fraction of the positive spectrum that the kept dimensions must capture.
const RETAINED_MASS: f64 = 1.0 - 1e-6;

/// `||W1 - W2||_F` over the full matrices.
pub fn frobenius_distance<T: Real>(g1: &IdentifiedGraph<T>, g2: &IdentifiedGraph<T>) -> Result<T> {
    if g1.universe_size() != g2.universe_size() {
        return Err(Error::invalid(format!(
            "universe sizes differ: {} vs {}",
            g1.universe_size(),
            g2.universe_size()
        )));
    }
    Ok((g1.weights() - g2.weights()).norm())
}

/// Frobenius dissimilarity vector of `g` against identified prototypes.
pub fn embed_identified<T: Real>(g: &IdentifiedGraph<T>, prototypes: &[IdentifiedGraph<T>]) -> Result<DissimilarityVector<T>> {
    let values = prototypes
        .iter()
        .map(|r| frobenius_distance(g, r))
        .collect::<Result<Vec<T>>>()?;
    DissimilarityVector::new(DVector::from_vec(values))
}

/// Coordinates of the prototypes recovered by classical scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingModel<T: Real> {
    /// `k x M`; column `i` is prototype `i`.
    x: DMatrix<T>,
    /// Kept eigenvalues of the double-centred Gram matrix, descending; they
    /// are also the eigenvalues of `X X^T`.
    eigenvalues: Vec<T>,
}

impl<T: Real> ScalingModel<T> {
    pub fn coordinates(&self) -> &DMatrix<T> {
        &self.x
    }

    /// Embedding dimension `k`.
    pub fn dim(&self) -> usize {
        self.x.nrows()
    }

    pub fn num_prototypes(&self) -> usize {
        self.x.ncols()
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// `X X^T`.
    pub fn gram(&self) -> DMatrix<T> {
        &self.x * self.x.transpose()
    }

    /// Fewer than `k + 1` prototypes cannot pin down a point of `R^k`.
    pub fn is_underdetermined(&self) -> bool {
        self.num_prototypes() < self.dim() + 1
    }
}

/// Classical scaling of a Euclidean distance matrix.
///
/// Double-centres the squared distances, keeps eigenvalues above
/// `tol * largest`, then the smallest leading subset holding all but 1e-6 of
/// that positive mass. Fails on eigenvalues below `-tol * largest`, which
/// mean the distances are not Euclidean.
pub fn classical_scaling<T: Real>(pairwise: &DMatrix<T>, tol: T) -> Result<ScalingModel<T>> {
    if !pairwise.is_square() || pairwise.nrows() == 0 {
        return Err(Error::invalid("distance matrix must be square and non-empty"));
    }
    let m = pairwise.nrows();
    for i in 0..m {
        if pairwise[(i, i)] != T::zero() {
            return Err(Error::invalid("distance matrix needs a zero diagonal"));
        }
        for j in 0..i {
            let (a, b) = (pairwise[(i, j)], pairwise[(j, i)]);
            if (a - b).abs() > T::lit(1e-12) * (T::one() + a.abs()) {
                return Err(Error::invalid("distance matrix must be symmetric"));
            }
        }
    }

    let squared = pairwise.map(|d| d * d);
    let b = double_centre(&squared) * T::lit(-0.5);
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());

    let largest = eig.eigenvalues[order[0]];
    if !(largest > T::zero()) {
        return Err(Error::Geometry("all points coincide; no embedding dimension".into()));
    }
    let smallest = eig.eigenvalues[order[m - 1]];
    if smallest < -tol * largest {
        return Err(Error::Geometry(format!(
            "distance matrix is not Euclidean: eigenvalue {smallest} against largest {largest}"
        )));
    }

    let positive: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| eig.eigenvalues[i] > tol * largest)
        .collect();
    let mass: T = positive.iter().map(|&i| eig.eigenvalues[i]).sum();
    let mut k = 0;
    let mut acc = T::zero();
    while k < positive.len() && acc < T::lit(RETAINED_MASS) * mass {
        acc += eig.eigenvalues[positive[k]];
        k += 1;
    }

    let kept = &positive[..k];
    let x = DMatrix::from_fn(k, m, |r, c| {
        eig.eigenvalues[kept[r]].sqrt() * eig.eigenvectors[(c, kept[r])]
    });
    Ok(ScalingModel {
        x,
        eigenvalues: kept.iter().map(|&i| eig.eigenvalues[i]).collect(),
    })
}

/// `J A J` with `J = I - 11^T / M`.
fn double_centre<T: Real>(a: &DMatrix<T>) -> DMatrix<T> {
    let m = a.nrows();
    let mf = T::from_usize_lossy(m);
    let row_means: Vec<T> = (0..m).map(|i| a.row(i).sum() / mf).collect();
    let col_means: Vec<T> = (0..m).map(|j| a.column(j).sum() / mf).collect();
    let grand = row_means.iter().copied().sum::<T>() / mf;
    DMatrix::from_fn(m, m, |i, j| a[(i, j)] - row_means[i] - col_means[j] + grand)
}

/// `u = X J y^2`: square the components, centre them, map through `X`.
pub fn u_transform<T: Real>(y: &DissimilarityVector<T>, model: &ScalingModel<T>) -> Result<DVector<T>> {
    let m = model.num_prototypes();
    if y.dim() != m {
        return Err(Error::invalid(format!("vector has {} components, model has {m} prototypes", y.dim())));
    }
    let sq = y.values().map(|v| v * v);
    let mean = sq.sum() / T::from_usize_lossy(m);
    let centred = sq.map(|v| v - mean);
    Ok(&model.x * centred)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn distances(points: &[Vec<f64>]) -> DMatrix<f64> {
        let n = points.len();
        DMatrix::from_fn(n, n, |i, j| {
            points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
    }

    fn recovered(model: &ScalingModel<f64>) -> DMatrix<f64> {
        let x = model.coordinates();
        let m = x.ncols();
        DMatrix::from_fn(m, m, |i, j| (x.column(i) - x.column(j)).norm())
    }

    #[test]
    fn right_triangle() {
        let d = DMatrix::from_row_slice(3, 3, &[0., 3., 4., 3., 0., 5., 4., 5., 0.]);
        let model = classical_scaling(&d, 1e-9).unwrap();
        assert_eq!(model.dim(), 2);
        assert!((recovered(&model) - d).abs().max() < 1e-9);
    }

    #[test]
    fn duplicate_prototypes_coincide() {
        let d = DMatrix::from_row_slice(3, 3, &[0., 0., 2., 0., 0., 2., 2., 2., 0.]);
        let model = classical_scaling(&d, 1e-9).unwrap();
        assert_eq!(model.dim(), 1);
        let x = model.coordinates();
        assert!((x.column(0) - x.column(1)).norm() < 1e-12);
    }

    #[test]
    fn random_points_in_r5() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Vec<f64>> = (0..12)
            .map(|_| (0..5).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let d = distances(&pts);
        let model = classical_scaling(&d, 1e-9).unwrap();
        assert_eq!(model.dim(), 5);
        assert!((recovered(&model) - &d).abs().max() < 1e-9);
        let gram_eigs = SymmetricEigen::new(model.gram()).eigenvalues;
        let mut g: Vec<f64> = gram_eigs.iter().copied().collect();
        g.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (a, b) in g.iter().zip(model.eigenvalues()) {
            assert!((a - b).abs() < 1e-9 * b.max(1.0));
        }
    }

    #[test]
    fn non_euclidean_rejected() {
        // violates the triangle inequality
        let d = DMatrix::from_row_slice(3, 3, &[0., 1., 5., 1., 0., 1., 5., 1., 0.]);
        assert!(matches!(classical_scaling(&d, 1e-9), Err(Error::Geometry(_))));
        assert!(matches!(
            classical_scaling(&DMatrix::<f64>::zeros(3, 3), 1e-9),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn u_of_zero_and_constant_vectors() {
        let d = DMatrix::from_row_slice(3, 3, &[0., 3., 4., 3., 0., 5., 4., 5., 0.]);
        let model = classical_scaling(&d, 1e-9).unwrap();
        let zero = DissimilarityVector::new(DVector::zeros(3)).unwrap();
        assert_eq!(u_transform(&zero, &model).unwrap(), DVector::zeros(2));
        let constant = DissimilarityVector::new(DVector::from_element(3, 2.5)).unwrap();
        assert!(u_transform(&constant, &model).unwrap().norm() < 1e-12);
        let short = DissimilarityVector::new(DVector::zeros(2)).unwrap();
        assert!(u_transform(&short, &model).is_err());
    }

    #[test]
    fn u_matches_direct_matrix_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pts: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..3).map(|_| rng.random_range(0.0..1.0)).collect())
            .collect();
        let model = classical_scaling(&distances(&pts), 1e-9).unwrap();
        let m = 6;
        let j = DMatrix::<f64>::identity(m, m) - DMatrix::from_element(m, m, 1.0 / m as f64);
        for _ in 0..20 {
            let y: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..2.0)).collect();
            let ysq = DVector::from_iterator(m, y.iter().map(|v| v * v));
            let direct = model.coordinates() * &j * ysq;
            let u = u_transform(&DissimilarityVector::new(DVector::from_vec(y)).unwrap(), &model).unwrap();
            assert!((u - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn frobenius() {
        let a = DMatrix::from_row_slice(3, 3, &[0., 0.2, 0.5, 0.2, 0., 0.1, 0.5, 0.1, 0.]);
        let mut b = a.clone();
        b[(0, 1)] = 0.9;
        b[(1, 0)] = 0.9;
        let ga = IdentifiedGraph::new(a, false).unwrap();
        let gb = IdentifiedGraph::new(b, false).unwrap();
        assert_eq!(frobenius_distance(&ga, &ga).unwrap(), 0.0);
        let d = frobenius_distance(&ga, &gb).unwrap();
        assert!((d - 2f64.sqrt() * 0.7).abs() < 1e-12);
        let small = IdentifiedGraph::new(DMatrix::zeros(2, 2), false).unwrap();
        assert!(frobenius_distance(&ga, &small).is_err());
    }
}
