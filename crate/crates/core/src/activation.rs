//! Elementwise activations and their derivatives.

use crate::matrix::Matrix;
use crate::num;

/// Supported activation kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    /// Logistic sigmoid, output strictly in (0, 1).
    Sigmoid,
    /// Hyperbolic tangent.
    Tanh,
    /// Rectified linear unit.
    Relu,
}

impl Activation {
    /// Apply the activation to a scalar.
    #[inline]
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Activation::Sigmoid => num::sigmoid(x),
            Activation::Tanh => num::tanh(x),
            Activation::Relu => x.max(0.0),
        }
    }

    /// Derivative expressed through the activation *output* `y`.
    ///
    /// For relu the derivative at 0 is taken as 0 (subgradient choice).
    #[inline]
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Tanh => 1.0 - y * y,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Elementwise application to a matrix.
pub fn activation(kind: Activation, x: &Matrix) -> Matrix {
    x.map(|v| kind.eval(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_points() {
        assert_eq!(Activation::Sigmoid.eval(0.0), 0.5);
        assert_eq!(Activation::Tanh.eval(0.0), 0.0);
        assert_eq!(Activation::Relu.eval(-2.0), 0.0);
        assert_eq!(Activation::Relu.eval(3.5), 3.5);
    }

    #[test]
    fn sigmoid_symmetry() {
        let mut rng = crate::rng::SeededRng::new(6);
        for _ in 0..200 {
            let x = rng.uniform(-30.0, 30.0);
            let s = Activation::Sigmoid.eval(x) + Activation::Sigmoid.eval(-x);
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sigmoid_output_strictly_inside_unit_interval() {
        let m = Matrix::from_vec(1, 3, vec![-40.0, 0.0, 40.0]).unwrap();
        let y = activation(Activation::Sigmoid, &m);
        for &v in y.as_slice() {
            assert!(v > 0.0 && v < 1.0);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = crate::rng::SeededRng::new(12);
        for kind in [Activation::Sigmoid, Activation::Tanh, Activation::Relu] {
            for _ in 0..50 {
                let x = rng.uniform(-3.0, 3.0);
                if kind == Activation::Relu && x.abs() < 1e-3 {
                    continue; // kink
                }
                let eps = 1e-6;
                let numeric = (kind.eval(x + eps) - kind.eval(x - eps)) / (2.0 * eps);
                let analytic = kind.derivative_from_output(kind.eval(x));
                assert!((numeric - analytic).abs() < 1e-6, "{kind:?} at {x}");
            }
        }
    }
}
