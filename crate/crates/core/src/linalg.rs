//! Small dense least-squares solves with residual and rank diagnostics.
//!
//! Everything goes through a one-sided Jacobi SVD. The systems here are at
//! most a few dozen rows by at most 32 columns, where Jacobi is both fast and
//! accurate to rounding even with repeated singular values.

/// Outcome of `min ‖A x − b‖` for one or more right-hand sides.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub solutions: Vec<Vec<f64>>,
    /// `max_i |(A x − b)_i|` per right-hand side.
    pub residuals: Vec<f64>,
    pub smallest_singular_value: f64,
    pub largest_singular_value: f64,
}

/// Thin SVD `A = U Σ Vᵀ` of an `m × n` matrix with `m ≥ n`.
struct Svd {
    /// `n` left singular vectors of length `m` (zero for zero singular values).
    u: Vec<Vec<f64>>,
    sigma: Vec<f64>,
    /// `n` right singular vectors of length `n`.
    v: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Hestenes one-sided Jacobi on the columns of `rows` (padded with zero rows
/// when wide, so `V` always spans `R^n`).
fn svd(rows: &[Vec<f64>], n: usize) -> Svd {
    let m = rows.len().max(n);
    let mut u: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..m).map(|i| rows.get(i).map_or(0.0, |r| r[j])).collect())
        .collect();
    let mut v: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&u[p], &u[p]);
                let beta = dot(&u[q], &u[q]);
                let gamma = dot(&u[p], &u[q]);
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for cols in [&mut u, &mut v] {
                    let (lo, hi) = cols.split_at_mut(q);
                    for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                        let (a, b) = (*x, *y);
                        *x = c * a - s * b;
                        *y = s * a + c * b;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma: Vec<f64> = u.iter().map(|c| dot(c, c).sqrt()).collect();
    for (c, s) in u.iter_mut().zip(&sigma) {
        if *s > 0.0 {
            c.iter_mut().for_each(|x| *x /= s);
        }
    }
    Svd { u, sigma, v }
}

impl Svd {
    /// `x = Σ_{σ_k > cutoff} v_k (u_k · b) / σ_k`.
    fn solve(&self, b: &[f64], cutoff: f64) -> Vec<f64> {
        let n = self.v.len();
        let mut x = vec![0.0; n];
        for k in 0..n {
            if self.sigma[k] > cutoff {
                let c = dot(&self.u[k][..b.len()], b) / self.sigma[k];
                x.iter_mut().zip(&self.v[k]).for_each(|(xi, vi)| *xi += c * vi);
            }
        }
        x
    }
}

/// Solves the overdetermined system `rows · x = rhs[k]` for every `k` via SVD.
/// Singular values at or below `cutoff` are treated as zero.
pub fn solve_least_squares(rows: &[Vec<f64>], rhs: &[Vec<f64>], cutoff: f64) -> LeastSquares {
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    let d = svd(rows, n);
    // Wide systems have a non-trivial kernel even when every reported value is large.
    let smallest = if m < n {
        0.0
    } else {
        d.sigma.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let largest = d.sigma.iter().copied().fold(0.0, f64::max);
    let mut solutions = Vec::with_capacity(rhs.len());
    let mut residuals = Vec::with_capacity(rhs.len());
    for b in rhs {
        let x = d.solve(b, cutoff);
        residuals.push(rows.iter().zip(b).map(|(r, bi)| (dot(r, &x) - bi).abs()).fold(0.0, f64::max));
        solutions.push(x);
    }
    LeastSquares {
        solutions,
        residuals,
        smallest_singular_value: if smallest.is_finite() { smallest } else { 0.0 },
        largest_singular_value: largest,
    }
}

/// Orthonormal basis of `{x : rows · x = 0}`, from right singular vectors whose
/// singular value is at or below `cutoff`.
pub fn null_space(rows: &[Vec<f64>], n: usize, cutoff: f64) -> Vec<Vec<f64>> {
    let d = svd(rows, n);
    d.sigma
        .iter()
        .zip(d.v)
        .filter(|(s, _)| **s <= cutoff)
        .map(|(_, v)| v)
        .collect()
}

/// Moore–Penrose pseudo-inverse as row-major nested vectors (`n × m`).
pub fn pseudo_inverse(rows: &[Vec<f64>], cutoff: f64) -> Vec<Vec<f64>> {
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    let d = svd(rows, n);
    let mut p = vec![vec![0.0; m]; n];
    for k in 0..n {
        if d.sigma[k] > cutoff {
            for (i, row) in p.iter_mut().enumerate() {
                let vk = d.v[k][i] / d.sigma[k];
                for (j, x) in row.iter_mut().enumerate() {
                    *x += vk * d.u[k][j];
                }
            }
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn consistent_overdetermined_system() {
        let rows = vec![
            vec![1.0, 0.0],
            vec![0.0, 2.0],
            vec![1.0, 1.0],
        ];
        let ls = solve_least_squares(&rows, &[vec![1.0, 4.0, 3.0]], 1e-12);
        assert!((ls.solutions[0][0] - 1.0).abs() < 1e-14);
        assert!((ls.solutions[0][1] - 2.0).abs() < 1e-14);
        assert!(ls.residuals[0] < 1e-14);
        assert!(ls.smallest_singular_value > 0.5);
    }

    #[test]
    fn inconsistent_system_reports_residual() {
        let rows = vec![vec![1.0], vec![1.0]];
        let ls = solve_least_squares(&rows, &[vec![0.0, 2.0]], 1e-12);
        assert!((ls.solutions[0][0] - 1.0).abs() < 1e-14);
        assert!((ls.residuals[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rank_deficiency_shows_in_singular_values() {
        let rows = vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![0.0, 0.0]];
        let ls = solve_least_squares(&rows, &[vec![1.0, 2.0, 0.0]], 1e-12);
        assert!(ls.smallest_singular_value < 1e-12);
        let wide = solve_least_squares(&[vec![1.0, 0.0]], &[vec![1.0]], 1e-12);
        assert_eq!(wide.smallest_singular_value, 0.0);
    }

    #[test]
    fn kernel_of_a_covector() {
        let ns = null_space(&[vec![0.0, 0.0, 1.0]], 3, 1e-12);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(v[2].abs() < 1e-14);
            let norm: f64 = v.iter().map(|x| x * x).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pseudo_inverse_of_tall_matrix() {
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]];
        let p = pseudo_inverse(&rows, 1e-12);
        assert_eq!(p.len(), 2);
        assert_eq!(p[0].len(), 3);
        assert!((p[0][0] - 1.0).abs() < 1e-14 && (p[1][1] - 1.0).abs() < 1e-14);
        assert!(p[0][2].abs() < 1e-14);
    }

    #[test]
    fn repeated_singular_values_stay_accurate() {
        // structured system with a 1-ulp perturbation that trips some SVD codes
        let s = 0.2726446551485552;
        let mut rows = vec![
            vec![0.0, 0.9647840519854413, 0.26304321514639634, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0, -0.5869578338176853, 0.8096175030964008],
            vec![0.0, s, -1.0, 0.0, 0.0, 0.0],
            vec![-s, 0.0, 0.0, 0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        ];
        rows.extend(std::iter::repeat_n(vec![0.0; 6], 6));
        rows.push(vec![0.0, 0.0, 0.0, 0.0, 1.0, 0.7249816506842448]);
        rows.push(vec![0.0, 0.0, 0.0, -1.0, 0.0, 0.0]);
        rows.push(vec![0.0, 0.0, 0.0, -0.7249816506842448, 0.0, 0.0]);
        let mut b = vec![0.0; rows.len()];
        b[1] = 1.0;
        let ls = solve_least_squares(&rows, &[b], 1e-13);
        assert!(ls.residuals[0] < 1e-14, "{}", ls.residuals[0]);
        assert!((ls.solutions[0][4] + 0.5869578338176853).abs() < 1e-14);
    }
}
