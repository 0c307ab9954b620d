//! Implicit-shift QL iteration for real symmetric tridiagonal matrices.
//!
//! The eigenvector rotations can be accumulated for every row (full
//! eigenvectors) or only for a chosen subset of rows. Transfer between the
//! chain ends needs just the first and last components, which makes each
//! disorder sample O(N²) instead of O(N³).

use crate::error::{Error, Result};

/// Iteration cap per eigenvalue.
pub const MAX_SWEEPS: usize = 50;

/// Eigenvalues (ascending) with the requested eigenvector rows.
///
/// `rows[r][k]` is component `row_index[r]` of eigenvector `k`.
#[derive(Debug, Clone)]
pub(crate) struct TridiagonalEigen {
    pub values: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

/// Eigenvalues only, ascending.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    Ok(ql_implicit(diag, off, &[])?.values)
}

/// Full decomposition. Returns eigenvalues and eigenvectors, `vectors[k][j]`
/// being component `j` of eigenvector `k`. No sign convention is applied.
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = diag.len();
    let all: Vec<usize> = (0..n).collect();
    let TridiagonalEigen { values, rows } = ql_implicit(diag, off, &all)?;
    let vectors = (0..n)
        .map(|k| rows.iter().map(|row| row[k]).collect())
        .collect();
    Ok((values, vectors))
}

pub(crate) fn ql_implicit(
    diag: &[f64],
    off: &[f64],
    row_index: &[usize],
) -> Result<TridiagonalEigen> {
    let n = diag.len();
    assert!(n >= 1, "empty matrix");
    assert_eq!(off.len() + 1, n, "off-diagonal must have n-1 entries");

    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let mut z: Vec<Vec<f64>> = row_index
        .iter()
        .map(|&site| {
            let mut row = vec![0.0; n];
            row[site] = 1.0;
            row
        })
        .collect();

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            if sweeps == MAX_SWEEPS {
                return Err(Error::NoConvergence {
                    index: l,
                    sweeps: MAX_SWEEPS,
                });
            }
            sweeps += 1;

            // Wilkinson-type shift from the leading 2x2 block
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated_early = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated_early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in z.iter_mut() {
                    let f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if deflated_early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[x].total_cmp(&d[y]));
    let values = order.iter().map(|&k| d[k]).collect();
    let rows = z
        .into_iter()
        .map(|row| order.iter().map(|&k| row[k]).collect())
        .collect();
    Ok(TridiagonalEigen { values, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn residual(diag: &[f64], off: &[f64], lambda: f64, v: &[f64]) -> f64 {
        let n = diag.len();
        (0..n)
            .map(|i| {
                let mut hv = diag[i] * v[i];
                if i > 0 {
                    hv += off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    hv += off[i] * v[i + 1];
                }
                (hv - lambda * v[i]).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn two_by_two() {
        let vals = tridiagonal_eigenvalues(&[0.0, 0.0], &[1.0]).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-15 && (vals[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_chain_closed_form() {
        for n in [1usize, 2, 5, 16, 63] {
            let diag = vec![0.0; n];
            let off = vec![1.0; n.saturating_sub(1)];
            let (vals, vecs) = tridiagonal_eigen(&diag, &off).unwrap();
            let mut expected: Vec<f64> = (1..=n)
                .map(|k| 2.0 * (PI * k as f64 / (n as f64 + 1.0)).cos())
                .collect();
            expected.sort_by(f64::total_cmp);
            for k in 0..n {
                assert!((vals[k] - expected[k]).abs() < 1e-13);
                assert!(residual(&diag, &off, vals[k], &vecs[k]) < 1e-12);
            }
        }
    }

    #[test]
    fn orthonormal_vectors_for_irregular_matrix() {
        let diag = [4.0, -1.0, 2.5, 0.0, 3.0, -2.0];
        let off = [1.0, 0.3, 2.0, 0.01, 1.5];
        let (vals, vecs) = tridiagonal_eigen(&diag, &off).unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        for i in 0..6 {
            assert!(residual(&diag, &off, vals[i], &vecs[i]) < 1e-12);
            for j in 0..6 {
                let dot: f64 = vecs[i].iter().zip(&vecs[j]).map(|(x, y)| x * y).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn selected_rows_match_full_vectors() {
        let diag = [0.0; 7];
        let off = [0.5, 1.1, 0.9, 1.3, 0.7, 0.2];
        let (_, full) = tridiagonal_eigen(&diag, &off).unwrap();
        let part = ql_implicit(&diag, &off, &[0, 6]).unwrap();
        for k in 0..7 {
            assert_eq!(part.rows[0][k], full[k][0]);
            assert_eq!(part.rows[1][k], full[k][6]);
        }
    }

    #[test]
    fn decoupled_blocks_and_zero_couplings() {
        let diag = [1.0, 2.0, 3.0];
        let off = [0.0, 0.0];
        let vals = tridiagonal_eigenvalues(&diag, &off).unwrap();
        assert_eq!(vals, vec![1.0, 2.0, 3.0]);
    }
}
