//! Probabilists' Hermite polynomials and the orthonormal Hermite functions
//! `e_1, e_2, ...` that serve as the CONS of `L²(R)` everywhere else.
//!
//! Indexing is 1-based: `e_j` has polynomial degree `j - 1`.

use crate::error::{Error, Result};

/// Truncation level of the Hermite basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HermiteBasisSpec {
    max_index: usize,
}

impl HermiteBasisSpec {
    pub fn new(max_index: usize) -> Result<Self> {
        if max_index == 0 {
            return Err(Error::Domain("basis max_index must be >= 1".into()));
        }
        Ok(Self { max_index })
    }

    pub fn max_index(&self) -> usize {
        self.max_index
    }
}

/// Window and step of a composite trapezoid rule on the real line.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Default for QuadratureSpec {
    /// Hermite functions up to index 500 are negligible outside [-30, 30]
    /// at double precision.
    fn default() -> Self {
        Self { lo: -30.0, hi: 30.0, step: 1e-3 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) {
            return Err(Error::Domain("quadrature step must be positive".into()));
        }
        if !(self.hi > self.lo) {
            return Err(Error::Domain("quadrature window is empty".into()));
        }
        Ok(())
    }

    pub fn nodes(&self) -> usize {
        ((self.hi - self.lo) / self.step).round() as usize + 1
    }

    /// Composite trapezoid of `f` over the window.
    pub fn trapezoid(&self, f: impl Fn(f64) -> f64) -> f64 {
        let n = self.nodes();
        let h = (self.hi - self.lo) / (n - 1) as f64;
        let mut acc = 0.5 * (f(self.lo) + f(self.hi));
        for m in 1..n - 1 {
            acc += f(self.lo + m as f64 * h);
        }
        acc * h
    }
}

/// Probabilists' Hermite polynomial `He_n(z)` via the three-term recurrence
/// `He_{n+1} = z He_n - n He_{n-1}`.
pub fn hermite_polynomial_prob(n: u32, z: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = z;
    for m in 1..n {
        let next = z * cur - m as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

const PI_POW_NEG_QUARTER: f64 = 0.751_125_544_464_942_5;

/// Fill `out` with `e_1(x), ..., e_k(x)` using the normalized recurrence
/// `psi_n = x sqrt(2/n) psi_{n-1} - sqrt((n-1)/n) psi_{n-2}`.
///
/// Stable (no overflow) for k <= 500 and |x| <= 50; in the far tail the
/// values underflow to subnormal/zero rather than producing NaN/Inf.
pub fn hermite_functions_upto(k: usize, x: f64, out: &mut Vec<f64>) {
    out.clear();
    if k == 0 {
        return;
    }
    let psi0 = PI_POW_NEG_QUARTER * (-0.5 * x * x).exp();
    out.push(psi0);
    if k == 1 {
        return;
    }
    out.push(x * std::f64::consts::SQRT_2 * psi0);
    for n in 2..k {
        let nf = n as f64;
        let v = x * (2.0 / nf).sqrt() * out[n - 1] - ((nf - 1.0) / nf).sqrt() * out[n - 2];
        out.push(v);
    }
}

/// The orthonormal Hermite function `e_j(x)` (1-based index).
pub fn hermite_function(j: usize, x: f64) -> Result<f64> {
    if j == 0 {
        return Err(Error::Domain("hermite function index must be >= 1".into()));
    }
    let mut buf = Vec::with_capacity(j);
    hermite_functions_upto(j, x, &mut buf);
    Ok(buf[j - 1])
}

/// Coefficients `<f, e_j>` for `j = 1..K` by composite trapezoid quadrature.
///
/// The truncated reconstruction `sum_j <f, e_j> e_j` is the action of the
/// basis projection `A_K` on `f`.
pub fn project_coefficients(
    f: impl Fn(f64) -> f64,
    spec: HermiteBasisSpec,
    quad: QuadratureSpec,
) -> Result<Vec<f64>> {
    quad.validate()?;
    let k = spec.max_index();
    let n = quad.nodes();
    let h = (quad.hi - quad.lo) / (n - 1) as f64;
    let mut coeffs = vec![0.0_f64; k];
    let mut basis = Vec::with_capacity(k);
    for m in 0..n {
        let x = quad.lo + m as f64 * h;
        let w = if m == 0 || m == n - 1 { 0.5 } else { 1.0 };
        let fx = f(x) * w;
        hermite_functions_upto(k, x, &mut basis);
        for j in 0..k {
            coeffs[j] += fx * basis[j];
        }
    }
    for c in &mut coeffs {
        *c *= h;
    }
    Ok(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn he_polynomial_anchors() {
        assert_eq!(hermite_polynomial_prob(0, 3.7), 1.0);
        assert_eq!(hermite_polynomial_prob(2, 1.0), 0.0);
        // He_3(z) = z^3 - 3z at z = 2
        assert!((hermite_polynomial_prob(3, 2.0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn hermite_function_anchors() {
        assert!((hermite_function(1, 0.0).unwrap() - 0.7511255444649425).abs() < 1e-15);
        assert_eq!(hermite_function(2, 0.0).unwrap(), 0.0);
        assert!((hermite_function(3, 0.0).unwrap() - (-0.5311259660135985)).abs() < 1e-14);
    }

    #[test]
    fn index_zero_is_domain_error() {
        assert!(hermite_function(0, 1.0).is_err());
    }

    #[test]
    fn no_nan_inf_up_to_500() {
        for &x in &[-50.0, -37.2, -5.0, 0.0, 0.3, 12.0, 50.0] {
            let mut buf = Vec::new();
            hermite_functions_upto(500, x, &mut buf);
            for (j, v) in buf.iter().enumerate() {
                assert!(v.is_finite(), "e_{} at x={} not finite: {}", j + 1, x, v);
            }
        }
    }

    #[test]
    fn rodrigues_oracle_cross_check() {
        // Independent route: unnormalized physicists' recurrence
        // H_{n+1} = 2 x H_n - 2 n H_{n-1}, then apply the normalization
        // (sqrt(pi) 2^{j-1} (j-1)!)^{-1/2} e^{-x^2/2}.
        for j in 1..=20usize {
            let n = j - 1;
            let mut x = -5.0;
            while x <= 5.0 {
                let mut h_prev = 1.0_f64;
                let mut h_cur = 2.0 * x;
                let h = if n == 0 {
                    1.0
                } else {
                    for m in 1..n {
                        let next = 2.0 * x * h_cur - 2.0 * m as f64 * h_prev;
                        h_prev = h_cur;
                        h_cur = next;
                    }
                    h_cur
                };
                let mut log_norm = 0.5 * std::f64::consts::PI.ln() + n as f64 * std::f64::consts::LN_2;
                for m in 1..=n {
                    log_norm += (m as f64).ln();
                }
                let oracle = h * (-0.5 * log_norm).exp() * (-0.5 * x * x).exp();
                let got = hermite_function(j, x).unwrap();
                let scale = got.abs().max(oracle.abs());
                assert!(
                    (got - oracle).abs() <= 1e-10 * scale,
                    "j={} x={} got={} oracle={}",
                    j,
                    x,
                    got,
                    oracle
                );
                x += 0.1;
            }
        }
    }

    #[test]
    fn projection_orthonormality_and_linearity() {
        let quad = QuadratureSpec::default();
        // f = e_3, K = 5 -> (0,0,1,0,0)
        let c = project_coefficients(
            |x| hermite_function(3, x).unwrap(),
            HermiteBasisSpec::new(5).unwrap(),
            quad,
        )
        .unwrap();
        let expect = [0.0, 0.0, 1.0, 0.0, 0.0];
        for (a, b) in c.iter().zip(expect) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        // f = e_1 + 2 e_4, K = 2 -> (1, 0): the projection drops index 4
        let c = project_coefficients(
            |x| hermite_function(1, x).unwrap() + 2.0 * hermite_function(4, x).unwrap(),
            HermiteBasisSpec::new(2).unwrap(),
            quad,
        )
        .unwrap();
        assert!((c[0] - 1.0).abs() < 1e-8);
        assert!(c[1].abs() < 1e-8);
    }

    #[test]
    fn projection_gaussian_anchor() {
        // <e^{-x^2/2}, e_1> = pi^{-1/4} * sqrt(pi)
        let c = project_coefficients(
            |x| (-0.5 * x * x).exp(),
            HermiteBasisSpec::new(1).unwrap(),
            QuadratureSpec::default(),
        )
        .unwrap();
        let expect = std::f64::consts::PI.sqrt() * 0.7511255444649425;
        assert!((c[0] - expect).abs() < 1e-8, "{} vs {}", c[0], expect);
    }

    #[test]
    fn invalid_quadrature_is_rejected() {
        let quad = QuadratureSpec { lo: 1.0, hi: -1.0, step: 1e-3 };
        assert!(project_coefficients(|_| 1.0, HermiteBasisSpec::new(1).unwrap(), quad).is_err());
        let quad = QuadratureSpec { lo: -1.0, hi: 1.0, step: 0.0 };
        assert!(project_coefficients(|_| 1.0, HermiteBasisSpec::new(1).unwrap(), quad).is_err());
    }
}
