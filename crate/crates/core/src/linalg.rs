//! Small dense symmetric solves used by the simulator and the fitters.

pub(crate) type Mat3 = [[f64; 3]; 3];

/// Relative pivot floor below which a symmetric matrix is treated as singular.
const PIVOT_TOL: f64 = 1e-12;

/// Cholesky factor `L` (lower triangular) of a symmetric positive definite
/// matrix, or `None` when a pivot falls below `PIVOT_TOL` times the largest
/// diagonal entry.
pub(crate) fn cholesky3(a: &Mat3) -> Option<Mat3> {
    let scale = a[0][0].abs().max(a[1][1].abs()).max(a[2][2].abs());
    if !(scale > 0.0) || !scale.is_finite() {
        return None;
    }
    let mut l = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= PIVOT_TOL * scale {
                    return None;
                }
                l[i][i] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Some(l)
}

pub(crate) fn cholesky_solve3(l: &Mat3, b: [f64; 3]) -> [f64; 3] {
    let mut y = [0.0; 3];
    for i in 0..3 {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let mut s = y[i];
        for k in i + 1..3 {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    x
}

pub(crate) fn solve_spd3(a: &Mat3, b: [f64; 3]) -> Option<[f64; 3]> {
    cholesky3(a).map(|l| cholesky_solve3(&l, b))
}

/// Inverse of a symmetric positive definite matrix.
pub(crate) fn inverse_spd3(a: &Mat3) -> Option<Mat3> {
    let l = cholesky3(a)?;
    let mut inv = [[0.0; 3]; 3];
    for j in 0..3 {
        let mut e = [0.0; 3];
        e[j] = 1.0;
        let col = cholesky_solve3(&l, e);
        for i in 0..3 {
            inv[i][j] = col[i];
        }
    }
    Some(inv)
}

/// Inverse of a symmetric positive definite 2×2 matrix.
pub(crate) fn inverse_spd2(a: [[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    let scale = a[0][0].abs().max(a[1][1].abs());
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if !(a[0][0] > 0.0) || !(det > PIVOT_TOL * scale * scale) {
        return None;
    }
    Some([
        [a[1][1] / det, -a[0][1] / det],
        [-a[1][0] / det, a[0][0] / det],
    ])
}

pub(crate) fn mat_vec3(a: &Mat3, x: [f64; 3]) -> [f64; 3] {
    [
        a[0][0] * x[0] + a[0][1] * x[1] + a[0][2] * x[2],
        a[1][0] * x[0] + a[1][1] * x[1] + a[1][2] * x[2],
        a[2][0] * x[0] + a[2][1] * x[1] + a[2][2] * x[2],
    ]
}
