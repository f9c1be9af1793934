//! Savitzky–Golay smoothing with periodic (wrap-around) boundaries.

use nalgebra::{DMatrix, DVector};

use crate::error::GeometryError;

/// Centre-point smoothing kernel of a Savitzky–Golay filter.
#[derive(Clone, Debug, PartialEq)]
pub struct SavGol {
    window: usize,
    order: usize,
    coeffs: Vec<f64>,
}

impl SavGol {
    /// Builds the kernel for an odd `window` and polynomial `order < window`.
    pub fn new(window: usize, order: usize) -> Result<SavGol, GeometryError> {
        if window == 0 || window.is_multiple_of(2) {
            return Err(GeometryError::EvenWindow(window));
        }
        if order >= window {
            return Err(GeometryError::OrderTooHigh { order, window });
        }
        let half = (window / 2) as f64;
        let scale = half.max(1.0);
        // Vandermonde on offsets scaled to [-1, 1] for conditioning.
        let a = DMatrix::from_fn(window, order + 1, |i, k| {
            ((i as f64 - half) / scale).powi(k as i32)
        });
        // Value of the fit at offset 0 is the constant term: e0^T (A^T A)^-1 A^T.
        let ata = a.transpose() * &a;
        let mut e0 = DVector::zeros(order + 1);
        e0[0] = 1.0;
        let g = ata
            .lu()
            .solve(&e0)
            .expect("Savitzky-Golay normal matrix is nonsingular for order < window");
        let coeffs = (&a * g).iter().copied().collect();
        Ok(SavGol {
            window,
            order,
            coeffs,
        })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Convolution weights for offsets `-h..=h`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Smoothed value at interior index `t` of a non-periodic signal.
    /// Returns `None` when the window does not fit.
    pub fn apply_at(&self, signal: &[f64], t: usize) -> Option<f64> {
        let h = self.window / 2;
        if t < h || t + h >= signal.len() {
            return None;
        }
        Some(
            self.coeffs
                .iter()
                .zip(&signal[t - h..=t + h])
                .map(|(c, v)| c * v)
                .sum(),
        )
    }

    /// Smooths a periodic signal. The window must not exceed the length.
    pub fn apply_circular(&self, signal: &[f64]) -> Result<Vec<f64>, GeometryError> {
        let n = signal.len();
        if n < 3 {
            return Err(GeometryError::TooShort(n));
        }
        if self.window > n {
            return Err(GeometryError::WindowTooLarge {
                window: self.window,
                len: n,
            });
        }
        let h = self.window / 2;
        Ok((0..n)
            .map(|t| {
                self.coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, c)| c * signal[(t + n + j - h) % n])
                    .sum()
            })
            .collect())
    }
}

/// Smooths the closed curve `(x, y)` with a circular Savitzky–Golay filter.
pub fn sg_smooth_circular(
    x: &[f64],
    y: &[f64],
    window: usize,
    order: usize,
) -> Result<(Vec<f64>, Vec<f64>), GeometryError> {
    assert_eq!(x.len(), y.len(), "coordinate arrays differ in length");
    let sg = SavGol::new(window, order)?;
    Ok((sg.apply_circular(x)?, sg.apply_circular(y)?))
}

/// Window/order actually used for a contour of length `n`: when the window
/// exceeds `n / 2` it shrinks to the largest odd value `<= max(3, n / 2)` and
/// the order is capped below it.
pub fn fit_window(window: usize, order: usize, n: usize) -> (usize, usize) {
    if window <= n / 2 {
        return (window, order);
    }
    let mut w = (n / 2).max(3);
    if w.is_multiple_of(2) {
        w -= 1;
    }
    (w, order.min(w - 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_is_preserved() {
        let x = vec![5.0; 20];
        let y = vec![-2.0; 20];
        let (sx, sy) = sg_smooth_circular(&x, &y, 7, 2).unwrap();
        assert!(sx.iter().all(|v| (v - 5.0).abs() < 1e-12));
        assert!(sy.iter().all(|v| (v + 2.0).abs() < 1e-12));
    }

    #[test]
    fn linear_ramp_reproduced_in_open_mode() {
        let x: Vec<f64> = (0..50).map(|t| t as f64).collect();
        for (w, p) in [(5, 1), (9, 2), (11, 3)] {
            let sg = SavGol::new(w, p).unwrap();
            for t in w / 2..50 - w / 2 {
                assert!((sg.apply_at(&x, t).unwrap() - t as f64).abs() < 1e-9);
            }
            assert!(sg.apply_at(&x, 0).is_none());
        }
    }

    #[test]
    fn known_five_point_quadratic_kernel() {
        // classic (-3, 12, 17, 12, -3) / 35
        let sg = SavGol::new(5, 2).unwrap();
        let expect = [-3.0, 12.0, 17.0, 12.0, -3.0].map(|v| v / 35.0);
        for (a, b) in sg.coeffs().iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn errors() {
        assert_eq!(SavGol::new(4, 1), Err(GeometryError::EvenWindow(4)));
        assert_eq!(
            SavGol::new(5, 5),
            Err(GeometryError::OrderTooHigh {
                order: 5,
                window: 5
            })
        );
        let sg = SavGol::new(9, 2).unwrap();
        assert_eq!(
            sg.apply_circular(&[0.0; 5]),
            Err(GeometryError::WindowTooLarge { window: 9, len: 5 })
        );
        assert_eq!(
            sg.apply_circular(&[0.0; 2]),
            Err(GeometryError::TooShort(2))
        );
    }

    #[test]
    fn window_fallback() {
        assert_eq!(fit_window(11, 3, 40), (11, 3));
        assert_eq!(fit_window(11, 3, 16), (7, 3));
        assert_eq!(fit_window(11, 4, 8), (3, 2));
        assert_eq!(fit_window(9, 2, 3), (3, 2));
    }
}
