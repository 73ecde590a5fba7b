use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

/// Polynomial in `p` with exact rational coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactPoly {
    coeffs: Vec<BigRational>,
}

fn binomials(n: usize) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for i in 0..n {
        let next = row.last().unwrap() * BigInt::from(n - i) / BigInt::from(i + 1);
        row.push(next);
    }
    row
}

impl ExactPoly {
    pub fn new(coeffs: Vec<BigRational>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    pub fn zero() -> Self {
        Self::new(Vec::new())
    }

    /// `Σ_j h_j p^j (1-p)^{m-j}`.
    pub fn from_bernstein(h: &[BigUint], m: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); m + 1];
        for (j, hj) in h.iter().enumerate() {
            if hj.is_zero() {
                continue;
            }
            let hj = BigInt::from(hj.clone());
            // (1-p)^{m-j} = Σ_i C(m-j, i) (-p)^i
            for (i, c) in binomials(m - j).into_iter().enumerate() {
                let term = &hj * c;
                if i % 2 == 0 {
                    coeffs[j + i] += term;
                } else {
                    coeffs[j + i] -= term;
                }
            }
        }
        Self::new(coeffs.into_iter().map(BigRational::from_integer).collect())
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Degree, with `0` for constants and the zero polynomial.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn eval(&self, p: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * p + c)
    }

    /// Exact evaluation at the binary value of `p`, rounded once at the end.
    pub fn eval_f64(&self, p: f64) -> f64 {
        let p = BigRational::from_float(p).expect("finite p");
        self.eval(&p).to_f64().unwrap_or(f64::NAN)
    }

    pub fn mul(&self, other: &ExactPoly) -> ExactPoly {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return ExactPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ExactPoly::new(out)
    }

    pub fn sub(&self, other: &ExactPoly) -> ExactPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &[BigRational], i: usize| v.get(i).cloned().unwrap_or_else(BigRational::zero);
        ExactPoly::new((0..n).map(|i| get(&self.coeffs, i) - get(&other.coeffs, i)).collect())
    }

    /// Coefficients in the Bernstein basis of degree `n >= degree`; all of
    /// them nonnegative certifies the polynomial is nonnegative on `[0, 1]`.
    pub fn bernstein(&self, n: usize) -> Vec<BigRational> {
        assert!(n >= self.degree());
        if self.coeffs.is_empty() {
            return vec![BigRational::zero(); n + 1];
        }
        let binom = binomials(n);
        (0..=n)
            .map(|k| {
                // b_k = Σ_{i<=k} C(k, i) / C(n, i) a_i
                let ck = binomials(k);
                (0..=k.min(self.coeffs.len() - 1))
                    .map(|i| BigRational::new(ck[i].clone(), binom[i].clone()) * &self.coeffs[i])
                    .fold(BigRational::zero(), |a, b| a + b)
            })
            .collect()
    }

    /// Whether the value lies in `[0, 1]` at `p = j / steps` for all `j`.
    pub fn is_probability_on_grid(&self, steps: u32) -> bool {
        (0..=steps).all(|j| {
            let v = self.eval(&BigRational::new(j.into(), steps.into()));
            !v.is_negative() && v <= BigRational::one()
        })
    }
}

impl fmt::Display for ExactPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match (i, a.is_one()) {
                (0, _) => write!(f, "{a}")?,
                (_, true) => {}
                _ => write!(f, "{a}*")?,
            }
            match i {
                0 => {}
                1 => write!(f, "p")?,
                _ => write!(f, "p^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Serialize for ExactPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.coeffs.iter().map(|c| c.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn bernstein_round_trip() {
        // One edge: P(open) = p, from h = [0, 1].
        let p = ExactPoly::from_bernstein(&[BigUint::zero(), BigUint::one()], 1);
        assert_eq!(p.to_string(), "p");
        // Two edges, both open: h = [0, 0, 1] gives p^2.
        let q = ExactPoly::from_bernstein(&[BigUint::zero(), BigUint::zero(), BigUint::one()], 2);
        assert_eq!(q.to_string(), "p^2");
        assert_eq!(q.eval(&r(1, 3)), r(1, 9));
        let all = ExactPoly::from_bernstein(&[1u32, 2, 1].map(BigUint::from), 2);
        assert!(all.is_constant() && all.eval(&r(2, 7)) == r(1, 1));
        assert!(q.bernstein(4).iter().all(|b| !b.is_negative()));
        assert_eq!(all.sub(&all), ExactPoly::zero());
    }
}
