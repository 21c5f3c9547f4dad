//! Least squares for the four-coefficient combination model, solved through
//! the normal equations with partial-pivot Gaussian elimination.

pub const RIDGE_LAMBDA: f64 = 1e-8;
/// A pivot smaller than this fraction of the largest diagonal entry of XᵀX
/// marks the system as rank deficient.
const PIVOT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeastSquares {
    pub coefficients: [f64; 4],
    pub rank_deficient: bool,
}

/// Minimizes Σ (y − x·w)² over `w`. Falls back to ridge with
/// [`RIDGE_LAMBDA`] when XᵀX is singular.
pub fn solve_least_squares(design: &[[f64; 4]], target: &[f64]) -> LeastSquares {
    debug_assert_eq!(design.len(), target.len());
    let mut gram = [[0f64; 4]; 4];
    let mut rhs = [0f64; 4];
    for (x, &y) in design.iter().zip(target) {
        for i in 0..4 {
            rhs[i] += x[i] * y;
            for j in 0..4 {
                gram[i][j] += x[i] * x[j];
            }
        }
    }
    if let Some(w) = solve4(gram, rhs) {
        return LeastSquares {
            coefficients: w,
            rank_deficient: false,
        };
    }
    for (i, row) in gram.iter_mut().enumerate() {
        row[i] += RIDGE_LAMBDA;
    }
    let w = solve4(gram, rhs).unwrap_or([0.0; 4]);
    LeastSquares {
        coefficients: w,
        rank_deficient: true,
    }
}

fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    let scale = (0..4).map(|i| a[i][i].abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    for col in 0..4 {
        let pivot = (col..4).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= PIVOT_TOLERANCE * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (dst, src) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *dst -= f * src;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0f64; 4];
    for row in (0..4).rev() {
        let tail: f64 = (row + 1..4).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}
