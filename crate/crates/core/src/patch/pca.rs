//! Principal component projection of flattened patches.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Projects the rows of `rows` (M samples x p features) onto the top `k`
/// principal axes of the column-centered data. No whitening. Each axis is
/// oriented so that its largest-magnitude loading is positive.
///
/// When `p > M` the eigenproblem is solved on the M x M Gram matrix instead
/// of the p x p covariance; both give the same projections.
pub fn pca_fit_transform(rows: &[Vec<f64>], k: usize) -> Result<Vec<Vec<f64>>> {
    let m = rows.len();
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "PCA needs at least 2 samples, got {m}"
        )));
    }
    let p = rows[0].len();
    if rows.iter().any(|r| r.len() != p) {
        return Err(Error::InvalidArgument(
            "PCA rows have unequal length".into(),
        ));
    }
    if k == 0 || k > m.min(p) {
        return Err(Error::InvalidArgument(format!(
            "PCA with {k} components on {m} x {p} data"
        )));
    }

    let mut x = DMatrix::from_fn(m, p, |i, j| rows[i][j]);
    for j in 0..p {
        let mean = x.column(j).sum() / m as f64;
        x.column_mut(j).add_scalar_mut(-mean);
    }

    let loadings = if p <= m {
        let cov = x.transpose() * &x;
        top_eigenvectors(cov, k)
            .into_iter()
            .map(|(_, v)| v)
            .collect::<Vec<_>>()
    } else {
        let gram = &x * x.transpose();
        let scale = gram.amax().max(f64::MIN_POSITIVE);
        top_eigenvectors(gram, k)
            .into_iter()
            .map(|(lambda, u)| {
                if lambda > 1e-12 * scale {
                    (x.transpose() * u) / lambda.sqrt()
                } else {
                    nalgebra::DVector::zeros(p)
                }
            })
            .collect()
    };

    let mut out = vec![vec![0.0; k]; m];
    for (c, mut v) in loadings.into_iter().enumerate() {
        orient(&mut v);
        let scores = &x * &v;
        for i in 0..m {
            out[i][c] = scores[i];
        }
    }
    Ok(out)
}

/// Eigenpairs with the `k` largest eigenvalues, descending.
fn top_eigenvectors(sym: DMatrix<f64>, k: usize) -> Vec<(f64, nalgebra::DVector<f64>)> {
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    order
        .into_iter()
        .take(k)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors.column(i).into_owned()))
        .collect()
}

fn orient(v: &mut nalgebra::DVector<f64>) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if !v.is_empty() && v[best] < 0.0 {
        v.neg_mut();
    }
}
