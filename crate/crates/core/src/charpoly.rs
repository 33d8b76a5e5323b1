//! Characteristic polynomials of symmetric filters and their factorization
//! into elementary length-3 filters `[1, p, 1]`.
//!
//! A symmetric filter of order `N` has a monic palindromic characteristic
//! polynomial of degree `2N`. The substitution `y = x + 1/x` halves the
//! degree: the resulting degree-`N` polynomial has the elementary factor
//! parameters `p(k)` as its roots. Root finding runs on that reduced
//! polynomial, which is both cheaper and better conditioned than attacking
//! the palindromic polynomial directly.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::signal::Sequence;

/// Relative tolerance for symmetry validation of filter coefficients.
const SYMMETRY_TOL: f64 = 1e-12;

/// Width of the band around `|p| = 2` snapped to the critical classes.
/// The critical case is structurally different (defective transfer matrix),
/// so float noise must not flip it.
pub const CLASSIFY_EPS: f64 = 1e-9;

/// Maximum relative coefficient error allowed when the factorization is
/// convolved back and compared against the original filter.
pub const DECOMPOSITION_RESIDUAL_TOL: f64 = 1e-9;

/// A finite symmetric filter of odd length `2N + 1`.
///
/// `gain` is the trailing coefficient `c(N)`, the divisor that makes the
/// characteristic polynomial monic.
#[derive(Debug, Clone, PartialEq)]
pub struct Filter {
    coeffs: Vec<f64>,
    order: usize,
    gain: f64,
}

impl Filter {
    /// Build from the full coefficient list `c(-N) .. c(N)`.
    ///
    /// The list must have odd length and be symmetric to `1e-12` relative to
    /// its largest coefficient; zero edge pairs are stripped so the order is
    /// tight. Coefficients are symmetrized exactly after validation.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptySequence);
        }
        if coeffs.len() % 2 == 0 {
            return Err(Error::EvenLength(coeffs.len()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteSample);
        }
        let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if scale == 0.0 {
            return Err(Error::ZeroFilter);
        }
        let n = coeffs.len();
        for k in 0..n / 2 {
            let left = coeffs[k];
            let right = coeffs[n - 1 - k];
            if (left - right).abs() > SYMMETRY_TOL * scale {
                return Err(Error::AsymmetricFilter {
                    k: n / 2 - k,
                    left,
                    right,
                });
            }
        }
        // Exact symmetrization, then strip zero edges.
        let mut sym = coeffs;
        for k in 0..n / 2 {
            let avg = 0.5 * (sym[k] + sym[n - 1 - k]);
            sym[k] = avg;
            sym[n - 1 - k] = avg;
        }
        let mut lo = 0;
        let mut hi = sym.len();
        while hi - lo > 1 && sym[lo] == 0.0 {
            lo += 1;
            hi -= 1;
        }
        let coeffs: Vec<f64> = sym[lo..hi].to_vec();
        if coeffs.len() == 1 && coeffs[0] == 0.0 {
            return Err(Error::ZeroFilter);
        }
        let order = (coeffs.len() - 1) / 2;
        let gain = coeffs[coeffs.len() - 1];
        Ok(Self {
            coeffs,
            order,
            gain,
        })
    }

    /// Build from the half specification `c(0) .. c(N)`.
    pub fn from_half(half: &[f64]) -> Result<Self> {
        if half.is_empty() {
            return Err(Error::EmptySequence);
        }
        let mut coeffs: Vec<f64> = half.iter().rev().copied().collect();
        coeffs.extend_from_slice(&half[1..]);
        Self::new(coeffs)
    }

    /// The elementary filter `[1, p, 1]`.
    pub fn elementary(p: f64) -> Result<Self> {
        Self::new(vec![1.0, p, 1.0])
    }

    /// The unit filter (convolution identity).
    pub fn unitary() -> Self {
        Self {
            coeffs: vec![1.0],
            order: 0,
            gain: 1.0,
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    /// View the filter as a centered sequence (origin at `c(0)`).
    pub fn as_sequence(&self) -> Sequence {
        Sequence::new(self.coeffs.clone(), self.order).expect("filter invariants hold")
    }
}

/// Monic palindromic characteristic polynomial of degree `2N`,
/// coefficients stored in ascending powers.
#[derive(Debug, Clone, PartialEq)]
pub struct CharPolynomial {
    coeffs: Vec<f64>,
}

impl CharPolynomial {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() % 2 == 0 || coeffs.len() < 3 {
            return Err(Error::NotPalindromic);
        }
        let n = coeffs.len();
        let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        for k in 0..n / 2 {
            if (coeffs[k] - coeffs[n - 1 - k]).abs() > SYMMETRY_TOL * scale {
                return Err(Error::NotPalindromic);
            }
        }
        let lead = coeffs[n - 1];
        if lead == 0.0 {
            return Err(Error::ZeroFilter);
        }
        let mut monic: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();
        for k in 0..n / 2 {
            let avg = 0.5 * (monic[k] + monic[n - 1 - k]);
            monic[k] = avg;
            monic[n - 1 - k] = avg;
        }
        monic[n - 1] = 1.0;
        monic[0] = 1.0;
        Ok(Self { coeffs: monic })
    }

    /// Ascending coefficients; `coeffs()[k]` multiplies `x^k`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }
}

/// Monic degree-`N` polynomial whose roots are the elementary factor
/// parameters `p(k)`. Ascending coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct QPolynomial {
    coeffs: Vec<f64>,
}

impl QPolynomial {
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        horner(&self.coeffs, x).0
    }
}

/// Invertibility class of an elementary factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum FactorClass {
    /// `|p| > 2`: the inverse exists and decays exponentially.
    Invertible,
    /// `p = +2`: defective transfer matrix, eigenvalue -1.
    CriticalPlus,
    /// `p = -2`: defective transfer matrix, eigenvalue +1.
    CriticalMinus,
    /// `|p| < 2`: unit-circle eigenvalues, bounded pseudo-inverse only.
    Oscillatory,
}

impl FactorClass {
    pub fn is_invertible(self) -> bool {
        matches!(self, FactorClass::Invertible)
    }

    fn rank(self) -> u8 {
        match self {
            FactorClass::Invertible => 0,
            FactorClass::CriticalPlus | FactorClass::CriticalMinus => 1,
            FactorClass::Oscillatory => 2,
        }
    }
}

impl std::fmt::Display for FactorClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FactorClass::Invertible => "invertible",
            FactorClass::CriticalPlus => "critical (p = +2)",
            FactorClass::CriticalMinus => "critical (p = -2)",
            FactorClass::Oscillatory => "oscillatory",
        };
        f.write_str(s)
    }
}

/// One elementary factor `[1, p, 1]` of a decomposition.
///
/// `center` is the middle coefficient. It is real for the common case;
/// complex centers always come in conjugate pairs (linked through
/// `conjugate_partner`) whose product is a real length-5 filter.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementaryFactor {
    pub center: Complex64,
    pub conjugate_partner: Option<usize>,
    pub class: FactorClass,
}

impl ElementaryFactor {
    pub fn is_real(&self) -> bool {
        self.center.im == 0.0
    }
}

/// Compact factor description used in reports and exported metadata.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FactorSummary {
    pub p: f64,
    #[serde(skip_serializing_if = "is_zero")]
    pub p_imag: f64,
    pub class: FactorClass,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

/// A gain and an ordered factor list whose convolution reproduces the
/// original filter to `residual` (max relative coefficient error).
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub gain: f64,
    pub factors: Vec<ElementaryFactor>,
    pub residual: f64,
}

impl Decomposition {
    pub fn invertible_count(&self) -> usize {
        self.factors.iter().filter(|f| f.class.is_invertible()).count()
    }

    pub fn noninvertible_count(&self) -> usize {
        self.factors.len() - self.invertible_count()
    }

    pub fn summaries(&self) -> Vec<FactorSummary> {
        self.factors
            .iter()
            .map(|f| FactorSummary {
                p: f.center.re,
                p_imag: f.center.im,
                class: f.class,
            })
            .collect()
    }
}

/// Normalize a filter into its monic palindromic characteristic polynomial.
pub fn char_polynomial(f: &Filter) -> CharPolynomial {
    let coeffs: Vec<f64> = f.coeffs().iter().map(|c| c / f.gain()).collect();
    let n = coeffs.len();
    let mut monic = coeffs;
    // The division by gain makes the edges exactly 1.
    monic[0] = 1.0;
    monic[n - 1] = 1.0;
    CharPolynomial { coeffs: monic }
}

/// Reduce a palindromic polynomial of degree `2N` to the degree-`N`
/// polynomial with roots `p(k)`.
///
/// Uses the substitution `y = x + 1/x`: with `G_k(y) = x^k + x^-k` and the
/// recurrence `G_0 = 2, G_1 = y, G_{k+1} = y G_k - G_{k-1}`, the Laurent
/// form of the polynomial becomes a degree-`N` polynomial in `y` with roots
/// `-p(k)`; flipping the sign of every coefficient whose degree differs from
/// `N` by an odd amount moves the roots to `+p(k)`.
pub fn reduce_to_q(pc: &CharPolynomial) -> QPolynomial {
    let deg = pc.degree();
    let n = deg / 2;
    debug_assert!(deg % 2 == 0);
    let a = &pc.coeffs()[n..]; // a[k] = coefficient of x^(k+n), k = 0..=n

    // Accumulate a(0) + sum_k a(k) * G_k(y) as coefficient vectors in y.
    let mut acc = vec![0.0; n + 1];
    acc[0] = a[0];
    let mut g_prev = vec![2.0]; // G_0
    let mut g_cur = vec![0.0, 1.0]; // G_1
    for k in 1..=n {
        for (i, &g) in g_cur.iter().enumerate() {
            acc[i] += a[k] * g;
        }
        if k < n {
            // G_{k+1} = y * G_k - G_{k-1}
            let mut next = vec![0.0; k + 2];
            for (i, &g) in g_cur.iter().enumerate() {
                next[i + 1] += g;
            }
            for (i, &g) in g_prev.iter().enumerate() {
                next[i] -= g;
            }
            g_prev = std::mem::replace(&mut g_cur, next);
        }
    }
    // Sign flip: q_j = (-1)^(n - j) * r_j.
    for (j, c) in acc.iter_mut().enumerate() {
        if (n - j) % 2 == 1 {
            *c = -*c;
        }
    }
    QPolynomial { coeffs: acc }
}

fn horner(coeffs: &[f64], x: Complex64) -> (Complex64, Complex64) {
    let mut val = Complex64::new(0.0, 0.0);
    let mut deriv = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        deriv = deriv * x + val;
        val = val * x + c;
    }
    (val, deriv)
}

fn root_residual_target(degree: usize, p: Complex64) -> f64 {
    1e-11 * (1.0 + p.norm().powi(degree as i32))
}

/// A few Newton steps to polish an eigenvalue-based root estimate.
fn polish_root(coeffs: &[f64], mut z: Complex64, keep_real: bool) -> Complex64 {
    let mut best = z;
    let mut best_res = horner(coeffs, z).0.norm();
    for _ in 0..32 {
        let (val, deriv) = horner(coeffs, z);
        if deriv.norm() == 0.0 {
            break;
        }
        let step = val / deriv;
        z -= step;
        if keep_real {
            z = Complex64::new(z.re, 0.0);
        }
        let res = horner(coeffs, z).0.norm();
        if res < best_res {
            best_res = res;
            best = z;
        }
        if step.norm() <= 1e-16 * (1.0 + z.norm()) {
            break;
        }
    }
    best
}

fn quadratic_roots(c0: f64, c1: f64) -> (Complex64, Complex64) {
    // Monic x^2 + c1 x + c0, stable against cancellation.
    let disc = c1 * c1 - 4.0 * c0;
    if disc >= 0.0 {
        let s = disc.sqrt();
        let q = -0.5 * (c1 + c1.signum() * s);
        let (r1, r2) = if q == 0.0 {
            (0.0, 0.0)
        } else {
            (q, c0 / q)
        };
        (Complex64::new(r1, 0.0), Complex64::new(r2, 0.0))
    } else {
        let re = -0.5 * c1;
        let im = 0.5 * (-disc).sqrt();
        (Complex64::new(re, im), Complex64::new(re, -im))
    }
}

fn companion_eigenvalues(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let m = DMatrix::from_fn(n, n, |r, c| {
        if c == n - 1 {
            -coeffs[r]
        } else if r == c + 1 {
            1.0
        } else {
            0.0
        }
    });
    m.complex_eigenvalues().iter().copied().collect()
}

/// Classify a real elementary parameter.
pub fn classify(p: f64) -> FactorClass {
    let d = p.abs() - 2.0;
    if d > CLASSIFY_EPS {
        FactorClass::Invertible
    } else if d < -CLASSIFY_EPS {
        FactorClass::Oscillatory
    } else if p > 0.0 {
        FactorClass::CriticalPlus
    } else {
        FactorClass::CriticalMinus
    }
}

/// Find the roots of `Q` and wrap them as elementary factors.
///
/// Real roots are returned singly; complex roots appear in adjacent
/// conjugate pairs with `conjugate_partner` set. Each root is polished by
/// Newton steps until `|Q(p)| <= 1e-11 * (1 + |p|^N)`.
pub fn find_factor_params(q: &QPolynomial) -> Result<Vec<ElementaryFactor>> {
    let n = q.degree();
    if n == 0 {
        return Ok(Vec::new());
    }
    let coeffs = q.coeffs();
    let raw: Vec<Complex64> = match n {
        1 => vec![Complex64::new(-coeffs[0], 0.0)],
        2 => {
            let (a, b) = quadratic_roots(coeffs[0], coeffs[1]);
            vec![a, b]
        }
        _ => companion_eigenvalues(coeffs),
    };

    // Snap nearly-real roots, polish, and keep complex roots as exact
    // conjugate pairs by polishing only the positive-imaginary member.
    let real_snap = |z: Complex64| z.im.abs() <= 1e-8 * (1.0 + z.norm());
    let mut reals: Vec<f64> = Vec::new();
    let mut complexes: Vec<Complex64> = Vec::new();
    for z in raw {
        if real_snap(z) {
            let p = polish_root(coeffs, Complex64::new(z.re, 0.0), true);
            reals.push(p.re);
        } else if z.im > 0.0 {
            complexes.push(polish_root(coeffs, z, false));
        }
    }
    reals.sort_by(|a, b| a.total_cmp(b));
    complexes.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

    let mut factors = Vec::with_capacity(n);
    for &p in &reals {
        factors.push(ElementaryFactor {
            center: Complex64::new(p, 0.0),
            conjugate_partner: None,
            class: classify(p),
        });
    }
    for &z in &complexes {
        let i = factors.len();
        factors.push(ElementaryFactor {
            center: z,
            conjugate_partner: Some(i + 1),
            class: FactorClass::Invertible,
        });
        factors.push(ElementaryFactor {
            center: z.conj(),
            conjugate_partner: Some(i),
            class: FactorClass::Invertible,
        });
    }
    if factors.len() != n {
        return Err(Error::RootFinding {
            coeffs: coeffs.to_vec(),
            residual: f64::NAN,
        });
    }
    for f in &factors {
        let res = q.eval(f.center).norm();
        if !(res <= root_residual_target(n, f.center)) {
            return Err(Error::RootFinding {
                coeffs: coeffs.to_vec(),
                residual: res,
            });
        }
    }
    Ok(factors)
}

/// Decompose a filter into its gain and elementary factors.
///
/// Factors are ordered invertible first, then critical, then oscillatory
/// (ties broken by the real then imaginary part of `p`), so output is
/// reproducible. The reconvolution residual is checked against
/// [`DECOMPOSITION_RESIDUAL_TOL`].
pub fn decompose(f: &Filter) -> Result<Decomposition> {
    if f.order() == 0 {
        return Ok(Decomposition {
            gain: f.gain(),
            factors: Vec::new(),
            residual: 0.0,
        });
    }
    let q = reduce_to_q(&char_polynomial(f));
    let mut factors = find_factor_params(&q)?;

    // Stable sort, then remap the conjugate partner indices.
    let mut perm: Vec<usize> = (0..factors.len()).collect();
    perm.sort_by(|&a, &b| {
        let (fa, fb) = (&factors[a], &factors[b]);
        fa.class
            .rank()
            .cmp(&fb.class.rank())
            .then(fa.center.re.total_cmp(&fb.center.re))
            .then(fa.center.im.total_cmp(&fb.center.im))
    });
    let mut new_pos = vec![0usize; factors.len()];
    for (new_i, &old_i) in perm.iter().enumerate() {
        new_pos[old_i] = new_i;
    }
    let mut sorted: Vec<ElementaryFactor> = perm.iter().map(|&i| factors[i].clone()).collect();
    for fac in &mut sorted {
        fac.conjugate_partner = fac.conjugate_partner.map(|old| new_pos[old]);
    }
    factors = sorted;

    let mut d = Decomposition {
        gain: f.gain(),
        factors,
        residual: 0.0,
    };
    let recon = reconvolve(&d)?;
    let scale = f.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let residual = if recon.coeffs().len() != f.coeffs().len() {
        f64::INFINITY
    } else {
        recon
            .coeffs()
            .iter()
            .zip(f.coeffs())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            / scale
    };
    if !(residual <= DECOMPOSITION_RESIDUAL_TOL) {
        return Err(Error::ResidualTooLarge(residual));
    }
    d.residual = residual;
    Ok(d)
}

/// Convolve the factors of a decomposition back into a filter.
///
/// Complex conjugate pairs must be intact; any imaginary residue above
/// `1e-10` relative is an error, below that it is dropped.
pub fn reconvolve(d: &Decomposition) -> Result<Filter> {
    for (i, f) in d.factors.iter().enumerate() {
        if f.center.im != 0.0 {
            let ok = f
                .conjugate_partner
                .and_then(|j| d.factors.get(j))
                .map(|g| {
                    let diff = (g.center - f.center.conj()).norm();
                    diff <= 1e-8 * (1.0 + f.center.norm())
                })
                .unwrap_or(false);
            if !ok {
                return Err(Error::UnpairedComplexFactor(i));
            }
        }
    }
    let mut acc = vec![Complex64::new(1.0, 0.0)];
    for f in &d.factors {
        let mut next = vec![Complex64::new(0.0, 0.0); acc.len() + 2];
        for (i, &a) in acc.iter().enumerate() {
            next[i] += a;
            next[i + 1] += a * f.center;
            next[i + 2] += a;
        }
        acc = next;
    }
    let scale = acc.iter().fold(1.0f64, |m, c| m.max(c.re.abs()));
    let max_im = acc.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
    if max_im > 1e-10 * scale {
        return Err(Error::UnpairedComplexFactor(0));
    }
    Filter::new(acc.iter().map(|c| c.re * d.gain).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn char_polynomial_examples() {
        let f = Filter::new(vec![1.0, 2.3, 1.0]).unwrap();
        assert_eq!(char_polynomial(&f).coeffs(), &[1.0, 2.3, 1.0]);

        let f2 = Filter::new(vec![2.0, 4.6, 2.0]).unwrap();
        assert_eq!(f2.gain(), 2.0);
        assert_eq!(char_polynomial(&f2).coeffs(), &[1.0, 2.3, 1.0]);

        let f3 = Filter::new(vec![1.0, 0.0, 1.0]).unwrap();
        assert_eq!(char_polynomial(&f3).coeffs(), &[1.0, 0.0, 1.0]);
    }

    #[test]
    fn filter_strips_zero_edges() {
        let f = Filter::new(vec![0.0, 1.0, 2.0, 1.0, 0.0]).unwrap();
        assert_eq!(f.order(), 1);
        assert_eq!(f.coeffs(), &[1.0, 2.0, 1.0]);
    }

    #[test]
    fn filter_rejects_asymmetry_and_even_length() {
        assert!(matches!(
            Filter::new(vec![1.0, 2.0, 1.5]),
            Err(Error::AsymmetricFilter { .. })
        ));
        assert!(matches!(
            Filter::new(vec![1.0, 1.0]),
            Err(Error::EvenLength(2))
        ));
        assert!(matches!(Filter::new(vec![0.0]), Err(Error::ZeroFilter)));
    }

    #[test]
    fn half_form_round_trips() {
        let f = Filter::from_half(&[6.6, 4.3, 1.0]).unwrap();
        assert_eq!(f.coeffs(), &[1.0, 4.3, 6.6, 4.3, 1.0]);
    }

    #[test]
    fn char_polynomial_rejects_non_palindromes() {
        assert!(matches!(
            CharPolynomial::new(vec![1.0, 2.0, 3.0, 2.5, 1.0]),
            Err(Error::NotPalindromic)
        ));
        assert!(matches!(
            CharPolynomial::new(vec![1.0, 2.0]),
            Err(Error::NotPalindromic)
        ));
    }

    #[test]
    fn reduce_matches_known_forms() {
        // Degree 2: x^2 + c0 x + ... reduces to the linear x - c0.
        let pc = CharPolynomial::new(vec![1.0, 2.3, 1.0]).unwrap();
        let q = reduce_to_q(&pc);
        assert_eq!(q.coeffs(), &[-2.3, 1.0]);

        // Degree 4 with coefficients (1, c1, c0, c1, 1).
        let (c0, c1) = (6.6, 4.3);
        let pc = CharPolynomial::new(vec![1.0, c1, c0, c1, 1.0]).unwrap();
        let q = reduce_to_q(&pc);
        assert_eq!(q.coeffs(), &[c0 - 2.0, -c1, 1.0]);

        // Degree 6 with coefficients (1, c2, c1, c0, c1, c2, 1).
        let (c0, c1, c2) = (-1.25, 7.5, 0.75);
        let pc = CharPolynomial::new(vec![1.0, c2, c1, c0, c1, c2, 1.0]).unwrap();
        let q = reduce_to_q(&pc);
        assert_eq!(q.coeffs(), &[-(c0 - 2.0 * c2), c1 - 3.0, -c2, 1.0]);
    }

    #[test]
    fn factor_params_examples() {
        let q = QPolynomial {
            coeffs: vec![4.6, -4.3, 1.0],
        };
        let f = find_factor_params(&q).unwrap();
        let mut ps: Vec<f64> = f.iter().map(|x| x.center.re).collect();
        ps.sort_by(f64::total_cmp);
        assert!((ps[0] - 2.0).abs() < 1e-12);
        assert!((ps[1] - 2.3).abs() < 1e-12);

        let q = QPolynomial {
            coeffs: vec![-2.3, 1.0],
        };
        let f = find_factor_params(&q).unwrap();
        assert_eq!(f[0].center, Complex64::new(2.3, 0.0));

        let q = QPolynomial {
            coeffs: vec![1.0, 0.0, 1.0],
        };
        let f = find_factor_params(&q).unwrap();
        assert_eq!(f.len(), 2);
        assert!(f[0].center.im != 0.0);
        assert_eq!(f[0].center.conj(), f[1].center);
        assert_eq!(f[0].conjugate_partner, Some(1));
        assert_eq!(f[1].conjugate_partner, Some(0));
    }

    #[test]
    fn decompose_examples() {
        let f = Filter::new(vec![1.0, 4.3, 6.6, 4.3, 1.0]).unwrap();
        let d = decompose(&f).unwrap();
        assert_eq!(d.gain, 1.0);
        let mut ps: Vec<f64> = d.factors.iter().map(|x| x.center.re).collect();
        ps.sort_by(f64::total_cmp);
        assert!((ps[0] - 2.0).abs() < 1e-9);
        assert!((ps[1] - 2.3).abs() < 1e-9);
        assert!(d.residual <= DECOMPOSITION_RESIDUAL_TOL);

        let d = decompose(&Filter::new(vec![1.0, 2.0, 1.0]).unwrap()).unwrap();
        assert_eq!(d.factors.len(), 1);
        assert_eq!(d.factors[0].class, FactorClass::CriticalPlus);
        assert!((d.factors[0].center.re - 2.0).abs() < 1e-12);

        let d = decompose(&Filter::new(vec![3.0, 6.9, 3.0]).unwrap()).unwrap();
        assert_eq!(d.gain, 3.0);
        assert!((d.factors[0].center.re - 2.3).abs() < 1e-12);
    }

    #[test]
    fn decompose_orders_by_class() {
        // p values: 2.3 (invertible), -2 (critical), 1 (oscillatory)
        let a = Filter::elementary(2.3).unwrap().as_sequence();
        let b = Filter::elementary(-2.0).unwrap().as_sequence();
        let c = Filter::elementary(1.0).unwrap().as_sequence();
        let prod = crate::signal::convolve(&crate::signal::convolve(&a, &b), &c);
        let f = Filter::new(prod.values().to_vec()).unwrap();
        let d = decompose(&f).unwrap();
        let classes: Vec<FactorClass> = d.factors.iter().map(|x| x.class).collect();
        assert_eq!(
            classes,
            vec![
                FactorClass::Invertible,
                FactorClass::CriticalMinus,
                FactorClass::Oscillatory
            ]
        );
    }

    #[test]
    fn reconvolve_examples() {
        let d = Decomposition {
            gain: 1.0,
            factors: vec![ElementaryFactor {
                center: Complex64::new(2.3, 0.0),
                conjugate_partner: None,
                class: FactorClass::Invertible,
            }],
            residual: 0.0,
        };
        assert_eq!(reconvolve(&d).unwrap().coeffs(), &[1.0, 2.3, 1.0]);

        let d = Decomposition {
            gain: 2.0,
            factors: vec![ElementaryFactor {
                center: Complex64::new(2.0, 0.0),
                conjugate_partner: None,
                class: FactorClass::CriticalPlus,
            }],
            residual: 0.0,
        };
        assert_eq!(reconvolve(&d).unwrap().coeffs(), &[2.0, 4.0, 2.0]);

        let d = Decomposition {
            gain: 1.0,
            factors: vec![
                ElementaryFactor {
                    center: Complex64::new(2.0, 0.0),
                    conjugate_partner: None,
                    class: FactorClass::CriticalPlus,
                },
                ElementaryFactor {
                    center: Complex64::new(2.3, 0.0),
                    conjugate_partner: None,
                    class: FactorClass::Invertible,
                },
            ],
            residual: 0.0,
        };
        let f = reconvolve(&d).unwrap();
        for (got, want) in f.coeffs().iter().zip([1.0, 4.3, 6.6, 4.3, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn reconvolve_rejects_unpaired_complex() {
        let d = Decomposition {
            gain: 1.0,
            factors: vec![ElementaryFactor {
                center: Complex64::new(1.0, 0.5),
                conjugate_partner: None,
                class: FactorClass::Invertible,
            }],
            residual: 0.0,
        };
        assert!(matches!(
            reconvolve(&d),
            Err(Error::UnpairedComplexFactor(_))
        ));
    }

    #[test]
    fn complex_pair_round_trip() {
        // A length-5 filter whose Q has complex roots: product of
        // [1, 1+0.5i, 1] and [1, 1-0.5i, 1] = [1, 2, 3.25, 2, 1].
        let f = Filter::new(vec![1.0, 2.0, 3.25, 2.0, 1.0]).unwrap();
        let d = decompose(&f).unwrap();
        assert_eq!(d.factors.len(), 2);
        assert!(d.factors.iter().all(|x| x.class.is_invertible()));
        assert!(d.factors.iter().all(|x| x.center.im != 0.0));
        let recon = reconvolve(&d).unwrap();
        for (got, want) in recon.coeffs().iter().zip(f.coeffs()) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(2.3), FactorClass::Invertible);
        assert_eq!(classify(1.0), FactorClass::Oscillatory);
        assert_eq!(classify(-2.0), FactorClass::CriticalMinus);
        assert_eq!(classify(2.0 + 1e-10), FactorClass::CriticalPlus);
        assert_eq!(classify(-2.0 - 1e-10), FactorClass::CriticalMinus);
        assert_eq!(classify(2.001), FactorClass::Invertible);
    }
}
