//! Small dense helpers over row-major `f64` slices.

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Determinant of an `n`×`n` row-major matrix by LU with partial pivoting.
/// The matrix is overwritten.
pub(crate) fn determinant(a: &mut [f64], n: usize) -> f64 {
    debug_assert!(a.len() >= n * n);
    let mut det = 1.0;
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col * n + col].abs();
        for row in col + 1..n {
            let v = a[row * n + col].abs();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for row in col + 1..n {
            let f = a[row * n + col] / p;
            if f != 0.0 {
                for j in col + 1..n {
                    a[row * n + j] -= f * a[col * n + j];
                }
            }
        }
    }
    det
}

pub(crate) fn factorial(m: usize) -> f64 {
    (1..=m).map(|i| i as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_small() {
        let mut a = [2.0, 1.0, 1.0, 3.0];
        assert!((determinant(&mut a, 2) - 5.0).abs() < 1e-15);
        // needs a row swap
        let mut b = [0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        assert!((determinant(&mut b, 3) + 1.0).abs() < 1e-15);
        let mut c = [1.0, 2.0, 2.0, 4.0];
        assert_eq!(determinant(&mut c, 2), 0.0);
    }

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), 1.0);
        assert_eq!(factorial(4), 24.0);
    }
}
