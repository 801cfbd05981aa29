//! Gauss–Hermite rules for ∫ e^{-x²} f(x) dx.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest supported rule order.
pub const MAX_HERMITE_ORDER: usize = 192;
/// Order used by the Gauss–Hermite series of the audibility and outage formulas.
pub const DEFAULT_HERMITE_ORDER: usize = 12;

/// Nodes and weights of a quadrature rule, nodes sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
    pub order: usize,
}

impl<T: Real> QuadratureRule<T> {
    /// Σ w_i f(x_i).
    pub fn apply<F: FnMut(T) -> T>(&self, mut f: F) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// E f(G) for standard normal G: (1/√π) Σ w_i f(√2 x_i).
    pub fn normal_expectation<F: FnMut(T) -> T>(&self, mut f: F) -> T {
        let sqrt2 = T::SQRT_2();
        self.apply(|x| f(sqrt2 * x)) / T::PI().sqrt()
    }
}

/// Physicists' Gauss–Hermite rule of the given order.
///
/// Nodes are the roots of H_n, found by Newton iteration on the orthonormal
/// three-term recurrence from asymptotic starting guesses.
pub fn gauss_hermite_rule<T: Real>(order: usize) -> Result<QuadratureRule<T>> {
    if order == 0 || order > MAX_HERMITE_ORDER {
        return Err(Error::domain(
            "gauss_hermite_rule",
            format!("order must lie in 1..={MAX_HERMITE_ORDER}, got {order}"),
        ));
    }
    let n = order;
    let nf = T::from_count(n);
    let two = T::lit(2.0);
    let pi_m4 = T::one() / T::PI().powf(T::lit(0.25));
    let mut x = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let half = n.div_ceil(2);
    let mut z = T::zero();
    for i in 0..half {
        z = match i {
            0 => {
                (two * nf + T::one()).sqrt()
                    - T::lit(1.85575) * (two * nf + T::one()).powf(T::lit(-0.16667))
            }
            1 => z - T::lit(1.14) * nf.powf(T::lit(0.426)) / z,
            2 => T::lit(1.86) * z - T::lit(0.86) * x[0],
            3 => T::lit(1.91) * z - T::lit(0.91) * x[1],
            _ => two * z - x[i - 2],
        };
        let mut pp = T::one();
        for _ in 0..100 {
            let mut p1 = pi_m4;
            let mut p2 = T::zero();
            for j in 1..=n {
                let jf = T::from_count(j);
                let p3 = p2;
                p2 = p1;
                p1 = z * (two / jf).sqrt() * p2 - ((jf - T::one()) / jf).sqrt() * p3;
            }
            pp = (two * nf).sqrt() * p2;
            let step = p1 / pp;
            z -= step;
            if step.abs() <= T::epsilon() * T::lit(4.0) * (T::one() + z.abs()) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = two / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = T::zero();
    }
    x.reverse();
    w.reverse();
    Ok(QuadratureRule {
        nodes: x,
        weights: w,
        order,
    })
}
