use nalgebra::{Matrix3, Vector3};

/// Eigen-decomposition of a symmetric 3x3 matrix with eigenvalues sorted
/// descending. Tiny negative eigenvalues from rounding are clamped to 0.
pub(crate) fn eigen_sym3_sorted(m: &Matrix3<f64>) -> ([f64; 3], [Vector3<f64>; 3]) {
    let se = m.symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        se.eigenvalues[b]
            .partial_cmp(&se.eigenvalues[a])
            .expect("finite eigenvalues")
    });
    let mut values = [0.0; 3];
    let mut vectors = [Vector3::zeros(); 3];
    for (slot, &src) in order.iter().enumerate() {
        values[slot] = se.eigenvalues[src].max(0.0);
        vectors[slot] = se.eigenvectors.column(src).into_owned();
    }
    (values, vectors)
}

pub(crate) fn det3(m: &Matrix3<f64>) -> f64 {
    m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
        - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
        + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_sorted_descending() {
        let m = Matrix3::from_diagonal(&Vector3::new(2.0, 5.0, 1.0));
        let (vals, vecs) = eigen_sym3_sorted(&m);
        assert_eq!(vals, [5.0, 2.0, 1.0]);
        assert!(vecs[0].dot(&Vector3::y()).abs() > 0.999);
        assert!(vecs[2].dot(&Vector3::z()).abs() > 0.999);
    }

    #[test]
    fn det_matches_nalgebra() {
        let m = Matrix3::new(2.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 4.0);
        assert!((det3(&m) - m.determinant()).abs() < 1e-12);
    }
}
