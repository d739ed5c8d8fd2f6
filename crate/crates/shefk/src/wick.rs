//! The Cameron-Martin / Wiener-chaos algebra on the Hermite basis:
//! multi-indices, generalized Hermite polynomials `H_alpha`, sparse chaos
//! expansions, Wick product, Wick exponentials, and the second quantization
//! of the basis projection (which acts as conditional expectation on the
//! Gaussian coordinates `Z_1..Z_K`).

use crate::error::{Error, Result};
use crate::hermite::hermite_polynomial_prob;
use rand::Rng;
use rand_distr::StandardNormal;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

/// A finitely supported sequence of nonnegative integers `(alpha_1, alpha_2, ...)`.
///
/// Stored without trailing zeros; ordered graded-lexicographically (by total
/// order `|alpha|`, then entrywise) so iteration and serialization are
/// deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(mut entries: Vec<u32>) -> Self {
        while entries.last() == Some(&0) {
            entries.pop();
        }
        Self(entries)
    }

    pub fn zero() -> Self {
        Self(Vec::new())
    }

    /// The unit index `delta_j` (1-based `j`).
    pub fn unit(j: usize) -> Self {
        assert!(j >= 1);
        let mut v = vec![0; j];
        v[j - 1] = 1;
        Self(v)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// `alpha_j` with 1-based `j`.
    pub fn get(&self, j: usize) -> u32 {
        assert!(j >= 1);
        self.0.get(j - 1).copied().unwrap_or(0)
    }

    /// Total order `|alpha|`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Largest basis index carrying a positive entry (0 for the zero index).
    pub fn support_bound(&self) -> usize {
        self.0.len()
    }

    /// `alpha! = prod_j alpha_j!`.
    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&a| (1..=a).map(|m| m as f64).product::<f64>())
            .product()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        let n = self.0.len().max(other.0.len());
        let mut v = vec![0u32; n];
        for (i, slot) in v.iter_mut().enumerate() {
            *slot = self.0.get(i).copied().unwrap_or(0) + other.0.get(i).copied().unwrap_or(0);
        }
        MultiIndex::new(v)
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.order(), &self.0).cmp(&(other.order(), &other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_empty() {
            return f.write_char('0');
        }
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_char(',')?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// A finitely supported map `alpha -> x_alpha`, representing
/// `X = sum_alpha x_alpha H_alpha(Z)` in the Cameron-Martin basis.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChaosExpansion {
    terms: BTreeMap<MultiIndex, f64>,
}

impl ChaosExpansion {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut e = Self::new();
        e.insert(MultiIndex::zero(), c);
        e
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (MultiIndex, f64)>) -> Self {
        let mut e = Self::new();
        for (a, c) in terms {
            e.insert(a, c);
        }
        e
    }

    /// Adds `c` to the coefficient of `alpha`; exact zeros are not stored.
    pub fn insert(&mut self, alpha: MultiIndex, c: f64) {
        if c == 0.0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(alpha) {
            Entry::Occupied(mut o) => {
                let v = o.get() + c;
                if v == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> f64 {
        self.terms.get(alpha).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(a, c)| (a, *c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest basis index used by any term.
    pub fn basis_bound(&self) -> usize {
        self.terms.keys().map(|a| a.support_bound()).max().unwrap_or(0)
    }

    /// Largest total order of any term.
    pub fn degree_bound(&self) -> u32 {
        self.terms.keys().map(|a| a.order()).max().unwrap_or(0)
    }

    /// `|X|_{L^2}^2 = sum_alpha x_alpha^2 alpha!`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.terms.iter().map(|(a, c)| c * c * a.factorial()).sum()
    }

    /// Line-oriented text format: a `K=.. N=..` header, then one term per
    /// line as `alpha_1,...,alpha_m : coefficient` (trailing zeros omitted).
    pub fn write_text(&self, w: &mut impl Write, k: usize, n: u32) -> std::io::Result<()> {
        writeln!(w, "K={k} N={n}")?;
        for (a, c) in self.terms() {
            writeln!(w, "{a} : {c:.17e}")?;
        }
        Ok(())
    }

    /// Parse the format produced by [`write_text`](Self::write_text).
    /// Returns the expansion and the header `(K, N)`.
    pub fn read_text(r: impl BufRead) -> Result<(Self, usize, u32)> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty chaos expansion file".into()))??;
        let mut k = None;
        let mut n = None;
        for tok in header.split_whitespace() {
            if let Some(v) = tok.strip_prefix("K=") {
                k = Some(v.parse::<usize>().map_err(|e| Error::Parse(e.to_string()))?);
            } else if let Some(v) = tok.strip_prefix("N=") {
                n = Some(v.parse::<u32>().map_err(|e| Error::Parse(e.to_string()))?);
            }
        }
        let (k, n) = match (k, n) {
            (Some(k), Some(n)) => (k, n),
            _ => return Err(Error::Parse(format!("bad chaos header: {header}"))),
        };
        let mut exp = ChaosExpansion::new();
        for line in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (idx, coef) = line
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("bad chaos term line: {line}")))?;
            let entries = idx
                .trim()
                .split(',')
                .map(|t| t.trim().parse::<u32>().map_err(|e| Error::Parse(e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            let c: f64 = coef.trim().parse().map_err(|e: std::num::ParseFloatError| {
                Error::Parse(e.to_string())
            })?;
            exp.insert(MultiIndex::new(entries), c);
        }
        Ok((exp, k, n))
    }
}

/// A sample of the noise coordinates `Z = (Z_1, ..., Z_K)`,
/// `Z_j = int e_j dW`, i.i.d. standard Gaussians.
#[derive(Debug, Clone)]
pub struct NoiseRealization {
    z: Vec<f64>,
}

impl NoiseRealization {
    pub fn new(z: Vec<f64>) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::Domain("noise realization must have length >= 1".into()));
        }
        Ok(Self { z })
    }

    pub fn sample(k: usize, rng: &mut impl Rng) -> Result<Self> {
        Self::new((0..k).map(|_| rng.sample(StandardNormal)).collect())
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }
}

/// Generalized Hermite polynomial `H_alpha(z) = prod_j He_{alpha_j}(z_j)`.
pub fn wick_polynomial(alpha: &MultiIndex, z: &[f64]) -> Result<f64> {
    if alpha.support_bound() > z.len() {
        return Err(Error::Domain(format!(
            "multi-index support {} exceeds noise length {}",
            alpha.support_bound(),
            z.len()
        )));
    }
    Ok(alpha
        .entries()
        .iter()
        .zip(z)
        .map(|(&a, &zj)| hermite_polynomial_prob(a, zj))
        .product())
}

/// Pointwise evaluation `sum_alpha x_alpha H_alpha(z)`.
pub fn chaos_eval(x: &ChaosExpansion, z: &[f64]) -> Result<f64> {
    if x.basis_bound() > z.len() {
        return Err(Error::Domain(format!(
            "expansion basis bound {} exceeds noise length {}",
            x.basis_bound(),
            z.len()
        )));
    }
    let mut acc = 0.0;
    for (a, c) in x.terms() {
        acc += c * wick_polynomial(a, z)?;
    }
    Ok(acc)
}

/// Wick product on the Hermite basis: `H_alpha <> H_beta = H_{alpha+beta}`,
/// so `(X <> Y)_gamma = sum_{alpha+beta=gamma} x_alpha y_beta`.
pub fn wick_product(x: &ChaosExpansion, y: &ChaosExpansion) -> ChaosExpansion {
    let mut out = ChaosExpansion::new();
    for (a, ca) in x.terms() {
        for (b, cb) in y.terms() {
            out.insert(a.add(b), ca * cb);
        }
    }
    out
}

/// All multi-indices with support bound `<= k` and total order `<= n`,
/// in graded lexicographic order.
pub fn multi_indices(k: usize, n: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; k];
    fn rec(cur: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
        if pos == cur.len() {
            out.push(MultiIndex::new(cur.clone()));
            return;
        }
        for a in 0..=remaining {
            cur[pos] = a;
            rec(cur, pos + 1, remaining - a, out);
        }
        cur[pos] = 0;
    }
    rec(&mut cur, 0, n, &mut out);
    out.sort();
    out
}

/// Truncated chaos expansion of a Wick (stochastic) exponential together
/// with the L^2 mass of the discarded tail.
#[derive(Debug, Clone)]
pub struct WickExponential {
    pub expansion: ChaosExpansion,
    /// `sum_{|alpha| > N} prod_j c_j^{2 alpha_j} / alpha_j!`
    pub tail_l2: f64,
}

/// Degree-`n` truncation of `E^f = exp(sum_j c_j Z_j - 1/2 sum_j c_j^2)`
/// for `f = sum_j c_j e_j`: the coefficients are
/// `x_alpha = prod_j c_j^{alpha_j} / alpha_j!`.
pub fn wick_exponential(c: &[f64], n: u32) -> WickExponential {
    let mut expansion = ChaosExpansion::new();
    let mut kept_l2 = 0.0;
    for alpha in multi_indices(c.len(), n) {
        let mut coef = 1.0;
        for (j, &a) in alpha.entries().iter().enumerate() {
            for m in 1..=a {
                coef *= c[j] / m as f64;
            }
        }
        kept_l2 += coef * coef * alpha.factorial();
        expansion.insert(alpha, coef);
    }
    let norm_sq: f64 = c.iter().map(|v| v * v).sum::<f64>().exp();
    WickExponential { expansion, tail_l2: (norm_sq - kept_l2).max(0.0) }
}

/// Second quantization `Gamma(A_Kp)` of the basis projection: keeps exactly
/// the terms supported on the first `kp` coordinates.
pub fn second_quantization(x: &ChaosExpansion, kp: usize) -> ChaosExpansion {
    ChaosExpansion::from_terms(
        x.terms()
            .filter(|(a, _)| a.support_bound() <= kp)
            .map(|(a, c)| (a.clone(), c)),
    )
}

/// Monte Carlo conditional expectation `E[X | Z_1..Z_kp = z_head]`, averaging
/// an evaluator over resampled tail coordinates. Used as the independent
/// oracle against `second_quantization` + `chaos_eval`.
pub fn conditional_expectation_mc(
    eval: impl Fn(&[f64]) -> f64,
    k_big: usize,
    z_head: &[f64],
    n_samples: usize,
    rng: &mut impl Rng,
) -> Result<(f64, f64)> {
    let kp = z_head.len();
    if k_big <= kp {
        return Err(Error::Domain("k_big must exceed the conditioning length".into()));
    }
    let mut z = vec![0.0; k_big];
    z[..kp].copy_from_slice(z_head);
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..n_samples {
        for slot in &mut z[kp..] {
            *slot = rng.sample(StandardNormal);
        }
        let v = eval(&z);
        sum += v;
        sumsq += v * v;
    }
    let n = n_samples as f64;
    let mean = sum / n;
    let var = (sumsq / n - mean * mean).max(0.0);
    Ok((mean, (var / n).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, StreamRole};
    use proptest::prelude::*;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn wick_polynomial_anchors() {
        assert_eq!(wick_polynomial(&MultiIndex::zero(), &[1.0, 2.0]).unwrap(), 1.0);
        assert_eq!(wick_polynomial(&mi(&[1]), &[0.3]).unwrap(), 0.3);
        // He_2(1) * He_1(2) = 0 * 2
        assert_eq!(wick_polynomial(&mi(&[2, 1]), &[1.0, 2.0]).unwrap(), 0.0);
        assert!(wick_polynomial(&mi(&[0, 0, 1]), &[1.0]).is_err());
    }

    #[test]
    fn chaos_eval_anchors() {
        let c = ChaosExpansion::constant(4.2);
        assert_eq!(chaos_eval(&c, &[0.1]).unwrap(), 4.2);
        let x = ChaosExpansion::from_terms([(mi(&[1]), 1.0), (mi(&[0, 1]), 2.0)]);
        assert_eq!(chaos_eval(&x, &[0.5, -1.0]).unwrap(), -1.5);
        assert!(chaos_eval(&x, &[0.5]).is_err());
    }

    #[test]
    fn wick_exponential_generating_function() {
        // sum_n He_n(z)/n! = e^{z - 1/2}
        let we = wick_exponential(&[1.0], 30);
        let got = chaos_eval(&we.expansion, &[0.4]).unwrap();
        assert!((got - (0.4_f64 - 0.5).exp()).abs() < 1e-9, "{got}");
    }

    #[test]
    fn wick_exponential_coefficients() {
        let we = wick_exponential(&[0.0, 0.0], 4);
        assert_eq!(we.expansion, ChaosExpansion::constant(1.0));
        assert!(we.tail_l2 < 1e-15);

        let we = wick_exponential(&[1.0], 3);
        assert_eq!(we.expansion.coefficient(&MultiIndex::zero()), 1.0);
        assert_eq!(we.expansion.coefficient(&mi(&[1])), 1.0);
        assert_eq!(we.expansion.coefficient(&mi(&[2])), 0.5);
        assert!((we.expansion.coefficient(&mi(&[3])) - 1.0 / 6.0).abs() < 1e-15);
        // E[exponential] = 1: the alpha = 0 coefficient is always 1
        let we = wick_exponential(&[0.3, -1.1, 0.25], 5);
        assert_eq!(we.expansion.coefficient(&MultiIndex::zero()), 1.0);
    }

    #[test]
    fn wick_product_anchors() {
        let one = ChaosExpansion::constant(1.0);
        let y = ChaosExpansion::from_terms([(mi(&[2]), 0.5), (mi(&[1, 3]), -2.0)]);
        assert_eq!(wick_product(&one, &y), y);
        // Z_1 <> Z_1 = He_2(Z_1)
        let z1 = ChaosExpansion::from_terms([(mi(&[1]), 1.0)]);
        assert_eq!(wick_product(&z1, &z1), ChaosExpansion::from_terms([(mi(&[2]), 1.0)]));
        // Z_1 <> Z_2 evaluated at (a, b) is a*b
        let z2 = ChaosExpansion::from_terms([(mi(&[0, 1]), 1.0)]);
        let p = wick_product(&z1, &z2);
        assert_eq!(p, ChaosExpansion::from_terms([(mi(&[1, 1]), 1.0)]));
        assert!((chaos_eval(&p, &[1.7, -0.4]).unwrap() - 1.7 * -0.4).abs() < 1e-15);
        // mean of a Wick product: coefficient at alpha = 0 is x_0 * y_0
        let x = ChaosExpansion::from_terms([(MultiIndex::zero(), 3.0), (mi(&[1]), 1.0)]);
        let y = ChaosExpansion::from_terms([(MultiIndex::zero(), -2.0), (mi(&[0, 2]), 5.0)]);
        assert_eq!(wick_product(&x, &y).coefficient(&MultiIndex::zero()), -6.0);
    }

    #[test]
    fn second_quantization_anchors() {
        let x = ChaosExpansion::from_terms([(mi(&[1]), 1.0), (mi(&[0, 1]), 2.0)]);
        assert_eq!(second_quantization(&x, 2), x);
        assert_eq!(second_quantization(&x, 1), ChaosExpansion::from_terms([(mi(&[1]), 1.0)]));
        // Gamma(A_Kp) E^c = E^{c restricted}, coefficientwise
        let c = [0.7, -0.3, 0.4];
        let full = wick_exponential(&c, 6).expansion;
        let restricted = wick_exponential(&c[..2], 6).expansion;
        assert_eq!(second_quantization(&full, 2), restricted);
    }

    #[test]
    fn second_quantization_idempotent_contraction() {
        let x = ChaosExpansion::from_terms([
            (mi(&[1]), 1.0),
            (mi(&[0, 2]), -0.5),
            (mi(&[1, 0, 3]), 0.25),
        ]);
        let p = second_quantization(&x, 2);
        assert_eq!(second_quantization(&p, 2), p);
        assert!(p.l2_norm_sq() <= x.l2_norm_sq());
    }

    #[test]
    fn parseval_mc_l2_norm() {
        // E[X(Z)^2] over 10^6 draws matches sum x_alpha^2 alpha! within 3 SE.
        let x = ChaosExpansion::from_terms([
            (MultiIndex::zero(), 0.5),
            (mi(&[1]), 1.0),
            (mi(&[2, 1]), -0.7),
            (mi(&[0, 0, 3]), 0.4),
        ]);
        let exact = x.l2_norm_sq();
        let n = 1_000_000usize;
        let mut rng = stream(42, StreamRole::Conditional, 0);
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let z: Vec<f64> = (0..3).map(|_| rng.sample(StandardNormal)).collect();
            let v = chaos_eval(&x, &z).unwrap();
            sum += v * v;
            sumsq += v.powi(4);
        }
        let mean = sum / n as f64;
        let se = ((sumsq / n as f64 - mean * mean).max(0.0) / n as f64).sqrt();
        assert!((mean - exact).abs() < 3.0 * se, "mean {mean} exact {exact} se {se}");
    }

    #[test]
    fn conditional_expectation_oracle_anchors() {
        let mut rng = stream(7, StreamRole::Conditional, 1);
        // X = Z_1 Z_2, condition on Z_1 = 0.7: E = 0
        let x = ChaosExpansion::from_terms([(mi(&[1, 1]), 1.0)]);
        let (m, se) =
            conditional_expectation_mc(|z| chaos_eval(&x, z).unwrap(), 2, &[0.7], 20_000, &mut rng)
                .unwrap();
        assert!(m.abs() < 3.0 * se);
        // X = He_2(Z_2): E = 0
        let x = ChaosExpansion::from_terms([(mi(&[0, 2]), 1.0)]);
        let (m, se) =
            conditional_expectation_mc(|z| chaos_eval(&x, z).unwrap(), 2, &[0.7], 20_000, &mut rng)
                .unwrap();
        assert!(m.abs() < 3.0 * se);
        // X = Z_1^2 is measurable: reproduced exactly, zero spread
        let (m, se) =
            conditional_expectation_mc(|z| z[0] * z[0], 2, &[0.7], 1000, &mut rng).unwrap();
        assert!((m - 0.49).abs() < 1e-12);
        assert!(se < 1e-12);
    }

    #[test]
    fn appendix_b_identity_small() {
        // chaos_eval(second_quantization(X, kp), z) vs the MC conditional
        // expectation, at a few conditioning points.
        let x = ChaosExpansion::from_terms([
            (MultiIndex::zero(), 0.3),
            (mi(&[1]), -0.8),
            (mi(&[0, 2]), 0.5),
            (mi(&[1, 1, 1]), 0.9),
            (mi(&[0, 0, 0, 2]), -0.4),
        ]);
        let kp = 2;
        let proj = second_quantization(&x, kp);
        let mut rng = stream(99, StreamRole::Conditional, 5);
        for trial in 0..10 {
            let head: Vec<f64> =
                (0..kp).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let (m, se) = conditional_expectation_mc(
                |z| chaos_eval(&x, z).unwrap(),
                4,
                &head,
                40_000,
                &mut stream(100, StreamRole::Conditional, trial),
            )
            .unwrap();
            let exact = chaos_eval(&proj, &head).unwrap();
            assert!((m - exact).abs() < 3.0 * se + 1e-12, "trial {trial}: {m} vs {exact} se {se}");
        }
    }

    #[test]
    fn text_round_trip() {
        let x = ChaosExpansion::from_terms([
            (MultiIndex::zero(), 1.0),
            (mi(&[0, 1]), 2.0),
            (mi(&[3]), -0.125),
        ]);
        let mut buf = Vec::new();
        x.write_text(&mut buf, 5, 8).unwrap();
        let (back, k, n) = ChaosExpansion::read_text(&buf[..]).unwrap();
        assert_eq!(back, x);
        assert_eq!((k, n), (5, 8));
    }

    #[test]
    fn multi_index_enumeration() {
        // support <= 2, order <= 2: 0, (1), (0,1), (2), (1,1), (0,2)
        let idx = multi_indices(2, 2);
        assert_eq!(idx.len(), 6);
        assert_eq!(idx[0], MultiIndex::zero());
        for w in idx.windows(2) {
            assert!(w[0] < w[1]);
        }
        // C(K+N, N) count check
        assert_eq!(multi_indices(4, 10).len(), 1001);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn wick_product_commutes_and_associates(
            xa in proptest::collection::vec((proptest::collection::vec(0u32..3, 0..3), -2.0..2.0f64), 1..4),
            ya in proptest::collection::vec((proptest::collection::vec(0u32..3, 0..3), -2.0..2.0f64), 1..4),
            za in proptest::collection::vec((proptest::collection::vec(0u32..3, 0..3), -2.0..2.0f64), 1..4),
        ) {
            let build = |v: Vec<(Vec<u32>, f64)>| {
                ChaosExpansion::from_terms(v.into_iter().map(|(a, c)| (MultiIndex::new(a), c)))
            };
            let (x, y, z) = (build(xa), build(ya), build(za));
            let xy = wick_product(&x, &y);
            let yx = wick_product(&y, &x);
            for (a, c) in xy.terms() {
                prop_assert!((c - yx.coefficient(a)).abs() <= 1e-12 * c.abs().max(1.0));
            }
            let xy_z = wick_product(&xy, &z);
            let x_yz = wick_product(&x, &wick_product(&y, &z));
            for (a, c) in xy_z.terms() {
                prop_assert!((c - x_yz.coefficient(a)).abs() <= 1e-10 * c.abs().max(1.0));
            }
            for (a, c) in x_yz.terms() {
                prop_assert!((c - xy_z.coefficient(a)).abs() <= 1e-10 * c.abs().max(1.0));
            }
        }

        #[test]
        fn bessel_under_projection(
            xa in proptest::collection::vec((proptest::collection::vec(0u32..3, 0..4), -2.0..2.0f64), 1..6),
            kp in 0usize..4,
        ) {
            let x = ChaosExpansion::from_terms(
                xa.into_iter().map(|(a, c)| (MultiIndex::new(a), c)));
            let p = second_quantization(&x, kp);
            prop_assert!(p.l2_norm_sq() <= x.l2_norm_sq() + 1e-12);
            prop_assert_eq!(second_quantization(&p, kp), p.clone());
        }
    }
}
