//! Perron root and vector of an irreducible nonnegative matrix, certified by the
//! Collatz–Wielandt bracket `min_i (Mv)_i / v_i ≤ ρ ≤ max_i (Mv)_i / v_i`.

use serde::{Deserialize, Serialize};

use super::{is_irreducible, PayoffMatrix, SimplexVector};
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Eigenvector of `Mᵀ`.
    Left,
    /// Eigenvector of `M`.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerronOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PerronOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerronPair {
    pub rho_lower: f64,
    pub rho_upper: f64,
    pub vector: SimplexVector,
    pub side: Side,
    pub iterations: usize,
}

impl PerronPair {
    pub fn rho(&self) -> f64 {
        0.5 * (self.rho_lower + self.rho_upper)
    }

    /// `rho_upper / rho_lower − 1`
    pub fn relative_width(&self) -> f64 {
        self.rho_upper / self.rho_lower - 1.0
    }
}

/// Collatz–Wielandt ratios of a full-support vector with their extreme indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioBracket {
    pub alpha: f64,
    pub beta: f64,
    pub argmin: usize,
    pub argmax: usize,
}

impl RatioBracket {
    fn from_ratios(ratios: impl Iterator<Item = f64>) -> Self {
        let mut b = RatioBracket {
            alpha: f64::INFINITY,
            beta: f64::NEG_INFINITY,
            argmin: 0,
            argmax: 0,
        };
        for (i, r) in ratios.enumerate() {
            if r < b.alpha {
                b.alpha = r;
                b.argmin = i;
            }
            if r > b.beta {
                b.beta = r;
                b.argmax = i;
            }
        }
        b
    }
}

/// `min/max_i (Mv)_i / v_i`.
pub fn ratio_bracket(m: &PayoffMatrix, v: &SimplexVector) -> Result<RatioBracket> {
    check_full_support(m, v)?;
    let mv = m.mul_vec(v.as_slice());
    Ok(RatioBracket::from_ratios(
        mv.iter().zip(v.as_slice()).map(|(a, b)| a / b),
    ))
}

/// `min/max_j (Mᵀv)_j / v_j`, the bracket of the transpose.
pub fn ratio_bracket_left(m: &PayoffMatrix, v: &SimplexVector) -> Result<RatioBracket> {
    check_full_support(m, v)?;
    let mv = m.tmul_vec(v.as_slice());
    Ok(RatioBracket::from_ratios(
        mv.iter().zip(v.as_slice()).map(|(a, b)| a / b),
    ))
}

fn check_full_support(m: &PayoffMatrix, v: &SimplexVector) -> Result<()> {
    if v.len() != m.n() {
        return Err(Error::DimensionMismatch {
            expected: m.n(),
            found: v.len(),
        });
    }
    match v.first_zero() {
        Some(index) => Err(Error::NotFullSupport { index }),
        None => Ok(()),
    }
}

pub fn perron(m: &PayoffMatrix, side: Side, tol: f64) -> Result<PerronPair> {
    perron_with(
        m,
        side,
        PerronOptions {
            tol,
            ..Default::default()
        },
    )
}

/// Power iteration on `M + cI`, `c = 1 + max_i M[i,i]`, until the bracket of `M` on the
/// current iterate satisfies `β/α − 1 ≤ tol`.
pub fn perron_with(m: &PayoffMatrix, side: Side, opts: PerronOptions) -> Result<PerronPair> {
    if !(opts.tol > 0.0) {
        return Err(Error::OutOfRange {
            name: "tol",
            value: opts.tol,
        });
    }
    let n = m.n();
    if n == 1 {
        let r = m.get(0, 0);
        if r <= 0.0 {
            return Err(Error::ZeroMatrix);
        }
        return Ok(PerronPair {
            rho_lower: r,
            rho_upper: r,
            vector: SimplexVector::pure(1, 0),
            side,
            iterations: 0,
        });
    }
    if !is_irreducible(m) {
        return Err(Error::NotIrreducible);
    }
    let work = match side {
        Side::Right => m.clone(),
        Side::Left => m.transpose(),
    };
    let shift = 1.0 + work.max_diagonal();
    let mut v = vec![1.0 / n as f64; n];

    for iteration in 0..=opts.max_iter {
        let mv = work.mul_vec(&v);
        if v.iter().all(|&x| x > 0.0) {
            let b = RatioBracket::from_ratios(mv.iter().zip(&v).map(|(a, b)| a / b));
            if b.alpha > 0.0 && b.beta / b.alpha - 1.0 <= opts.tol {
                return Ok(PerronPair {
                    rho_lower: b.alpha,
                    rho_upper: b.beta,
                    vector: SimplexVector::new(v)?,
                    side,
                    iterations: iteration,
                });
            }
        }
        let mut next: Vec<f64> = mv.iter().zip(&v).map(|(a, b)| a + shift * b).collect();
        let sum: f64 = next.iter().sum();
        for x in &mut next {
            *x /= sum;
        }
        v = next;
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn m(rows: &[&[f64]]) -> PayoffMatrix {
        PayoffMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn periodic_two_cycle_converges() {
        let p = perron(&m(&[&[0.0, 1.0], &[1.0, 0.0]]), Side::Right, 1e-10).unwrap();
        assert!(p.rho_lower <= 1.0 && 1.0 <= p.rho_upper);
        assert_relative_eq!(p.vector.as_slice()[0], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn complete_graph_root_is_n_minus_one() {
        let a = PayoffMatrix::from_fn(3, |i, j| if i == j { 0.0 } else { 1.0 }).unwrap();
        let p = perron(&a, Side::Left, 1e-10).unwrap();
        assert_relative_eq!(p.rho(), 2.0, max_relative = 1e-10);
        for &w in p.vector.as_slice() {
            assert_relative_eq!(w, 1.0 / 3.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn two_by_two_sqrt_two() {
        let a = m(&[&[0.0, 2.0], &[1.0, 0.0]]);
        let p = perron(&a, Side::Right, 1e-12).unwrap();
        let s2 = 2f64.sqrt();
        assert!(p.rho_lower <= s2 * (1.0 + 1e-15) && s2 <= p.rho_upper * (1.0 + 1e-15));
        let v = p.vector.as_slice();
        assert_relative_eq!(v[0] / v[1], s2, max_relative = 1e-10);
        let l = perron(&a, Side::Left, 1e-12).unwrap();
        let u = l.vector.as_slice();
        // left vector of [[0,2],[1,0]] is ∝ [1, √2]
        assert_relative_eq!(u[1] / u[0], s2, max_relative = 1e-10);
    }

    #[test]
    fn reducible_rejected() {
        assert_eq!(
            perron(&m(&[&[1.0, 1.0], &[0.0, 1.0]]), Side::Right, 1e-10),
            Err(Error::NotIrreducible)
        );
        assert_eq!(perron(&m(&[&[0.0]]), Side::Right, 1e-10), Err(Error::ZeroMatrix));
        let one = perron(&m(&[&[3.0]]), Side::Left, 1e-10).unwrap();
        assert_eq!((one.rho_lower, one.rho_upper), (3.0, 3.0));
    }

    #[test]
    fn budget_exhaustion_reports_no_convergence() {
        let a = m(&[&[0.0, 2.0, 0.0], &[1.0, 0.0, 1.0], &[3.0, 0.0, 0.0]]);
        let err = perron_with(
            &a,
            Side::Right,
            PerronOptions {
                tol: 1e-10,
                max_iter: 3,
            },
        )
        .unwrap_err();
        assert_eq!(err, Error::NoConvergence { iterations: 3 });
    }

    #[test]
    fn ratio_bracket_examples() {
        let swap = m(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let b = ratio_bracket(&swap, &SimplexVector::uniform(2)).unwrap();
        assert_eq!((b.alpha, b.beta), (1.0, 1.0));

        let a = m(&[&[0.0, 2.0], &[1.0, 0.0]]);
        let b = ratio_bracket(&a, &SimplexVector::uniform(2)).unwrap();
        assert_eq!((b.alpha, b.argmin, b.beta, b.argmax), (1.0, 1, 2.0, 0));

        let err = ratio_bracket(&a, &SimplexVector::pure(2, 0)).unwrap_err();
        assert_eq!(err, Error::NotFullSupport { index: 1 });
    }

    #[test]
    fn ratio_bracket_all_ones_grid() {
        // [[1,1],[1,1]] has ρ = 2; the bracket straddles 2 and collapses only at uniform.
        let ones = m(&[&[1.0, 1.0], &[1.0, 1.0]]);
        for k in 1..100 {
            let p = k as f64 / 100.0;
            let v = SimplexVector::new(vec![p, 1.0 - p]).unwrap();
            let b = ratio_bracket(&ones, &v).unwrap();
            assert!(b.alpha <= 2.0 + 1e-12 && 2.0 - 1e-12 <= b.beta);
            if k == 50 {
                assert_relative_eq!(b.alpha, b.beta);
            } else {
                assert!(b.beta - b.alpha > 1e-6);
            }
        }
    }
}
