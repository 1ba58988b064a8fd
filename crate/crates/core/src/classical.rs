//! Classical limit: continuum Hamiltonians `F(H₀)`, weighted Poisson
//! brackets on polynomials in `(a, a⁺)`, the `ħ`-order of the commutator
//! expansion and the quantisation rule `[a, a⁺] = ∫ Θ` over `[H₀ ∓ ħ/2]`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::deformation::{build_ladder_table, DeformationKind, DeformationSpec};
use crate::error::{Error, Result};
use crate::numerics::{integrate_adaptive, regression_slope};

/// A real function of `H₀` with two derivatives.
#[derive(Clone)]
pub enum ClassicalFunction {
    /// Coefficients `c₀ + c₁x + c₂x² + ...`; derivatives are exact.
    Polynomial(Vec<f64>),
    /// Derivatives by central differences at relative step `1e-5`.
    Callable(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for ClassicalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassicalFunction::Polynomial(c) => f.debug_tuple("Polynomial").field(c).finish(),
            ClassicalFunction::Callable(_) => f.write_str("Callable(..)"),
        }
    }
}

const FD_STEP: f64 = 1e-5;

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v)
}

fn poly_derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, v)| k as f64 * v).collect()
}

impl ClassicalFunction {
    pub fn callable<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        ClassicalFunction::Callable(Arc::new(f))
    }

    /// `x^k`.
    pub fn power(k: usize) -> Self {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        ClassicalFunction::Polynomial(c)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ClassicalFunction::Polynomial(c) => poly_eval(c, x),
            ClassicalFunction::Callable(f) => f(x),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            ClassicalFunction::Polynomial(c) => poly_eval(&poly_derivative(c), x),
            ClassicalFunction::Callable(f) => {
                let h = FD_STEP * x.abs().max(1.0);
                (f(x + h) - f(x - h)) / (2.0 * h)
            }
        }
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        match self {
            ClassicalFunction::Polynomial(c) => poly_eval(&poly_derivative(&poly_derivative(c)), x),
            ClassicalFunction::Callable(f) => {
                let h = FD_STEP * x.abs().max(1.0);
                (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
            }
        }
    }

    /// `F'` as a new function; exact for polynomials.
    pub fn differentiate(&self) -> ClassicalFunction {
        match self {
            ClassicalFunction::Polynomial(c) => ClassicalFunction::Polynomial(poly_derivative(c)),
            ClassicalFunction::Callable(_) => {
                let this = self.clone();
                ClassicalFunction::callable(move |x| this.derivative(x))
            }
        }
    }

    pub fn coefficients(&self) -> Option<&[f64]> {
        match self {
            ClassicalFunction::Polynomial(c) => Some(c),
            ClassicalFunction::Callable(_) => None,
        }
    }
}

/// Continuum Hamiltonian `F(x) = ∫₀ˣ f(s) ds` of a series spec. Apply
/// [`crate::deformation::scale_coefficients`] first for the `ħ` scaling.
pub fn classical_hamiltonian(spec: &DeformationSpec) -> Result<ClassicalFunction> {
    match spec.kind() {
        DeformationKind::Series { coeffs } => {
            let mut c = vec![0.0];
            c.extend(coeffs.iter().enumerate().map(|(k, v)| v / (k + 1) as f64));
            Ok(ClassicalFunction::Polynomial(c))
        }
        other => Err(Error::UnsupportedKind { op: "classical_hamiltonian", kind: other.name() }),
    }
}

/// Polynomial in `a = (q + ip)/√2` and `a⁺ = (q - ip)/√2`, stored as
/// `(i, j) -> c` for `c aⁱ a⁺ʲ`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PhasePoly {
    terms: BTreeMap<(usize, usize), Complex64>,
}

impl PhasePoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(i: usize, j: usize, c: Complex64) -> Self {
        let mut p = Self::zero();
        p.accumulate(i, j, c);
        p
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial(0, 0, Complex64::new(c, 0.0))
    }

    pub fn a() -> Self {
        Self::monomial(1, 0, Complex64::new(1.0, 0.0))
    }

    pub fn a_plus() -> Self {
        Self::monomial(0, 1, Complex64::new(1.0, 0.0))
    }

    pub fn q() -> Self {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::a().add(&Self::a_plus()).scale(s)
    }

    pub fn p() -> Self {
        let s = Complex64::new(0.0, -std::f64::consts::FRAC_1_SQRT_2);
        Self::a().sub(&Self::a_plus()).scale(s)
    }

    /// `H₀ = a a⁺ = (q² + p²)/2`.
    pub fn h0() -> Self {
        Self::monomial(1, 1, Complex64::new(1.0, 0.0))
    }

    fn accumulate(&mut self, i: usize, j: usize, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let e = self.terms.entry((i, j)).or_default();
        *e += c;
        if *e == Complex64::new(0.0, 0.0) {
            self.terms.remove(&(i, j));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.terms.iter().map(|(&(i, j), &c)| (i, j, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (i, j, c) in other.terms() {
            out.accumulate(i, j, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self::zero();
        for (i, j, c) in self.terms() {
            out.accumulate(i, j, c * s);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (i, j, c) in self.terms() {
            for (k, l, d) in other.terms() {
                out.accumulate(i + k, j + l, c * d);
            }
        }
        out
    }

    pub fn d_a(&self) -> Self {
        let mut out = Self::zero();
        for (i, j, c) in self.terms().filter(|t| t.0 > 0) {
            out.accumulate(i - 1, j, c * i as f64);
        }
        out
    }

    pub fn d_a_plus(&self) -> Self {
        let mut out = Self::zero();
        for (i, j, c) in self.terms().filter(|t| t.1 > 0) {
            out.accumulate(i, j - 1, c * j as f64);
        }
        out
    }

    /// `w(H₀)` for a real polynomial `w`.
    pub fn of_h0(coeffs: &[f64]) -> Self {
        let mut out = Self::zero();
        for (k, &c) in coeffs.iter().enumerate() {
            out.accumulate(k, k, Complex64::new(c, 0.0));
        }
        out
    }

    pub fn eval(&self, q: f64, p: f64) -> Complex64 {
        let a = Complex64::new(q, p) * std::f64::consts::FRAC_1_SQRT_2;
        let ad = a.conj();
        self.terms().map(|(i, j, c)| c * a.powi(i as i32) * ad.powi(j as i32)).sum()
    }
}

/// `{f, g} = ∂_a f ∂_{a⁺} g - ∂_{a⁺} f ∂_a g`, normalised so `{a, a⁺} = 1`
/// (equal to `i` times the `(q, p)` bracket).
pub fn canonical_bracket(f: &PhasePoly, g: &PhasePoly) -> PhasePoly {
    f.d_a().mul(&g.d_a_plus()).sub(&f.d_a_plus().mul(&g.d_a()))
}

/// Weighted bracket `w(H₀) {f, g}`.
#[derive(Debug, Clone)]
pub struct WeightedBracket {
    pub bracket: PhasePoly,
    pub weight: ClassicalFunction,
}

impl WeightedBracket {
    pub fn eval(&self, q: f64, p: f64) -> Complex64 {
        let h0 = 0.5 * (q * q + p * p);
        self.bracket.eval(q, p) * self.weight.eval(h0)
    }

    /// Polynomial form, available when the weight is a polynomial.
    pub fn to_poly(&self) -> Option<PhasePoly> {
        let w = self.weight.coefficients()?;
        Some(PhasePoly::of_h0(w).mul(&self.bracket))
    }
}

pub fn poisson_bracket(f: &PhasePoly, g: &PhasePoly, weight: &ClassicalFunction) -> WeightedBracket {
    WeightedBracket { bracket: canonical_bracket(f, g), weight: weight.clone() }
}

/// Cyclic sum `{f,{g,h}} + {g,{h,f}} + {h,{f,g}}` for a polynomial weight.
pub fn jacobi_sum(f: &PhasePoly, g: &PhasePoly, h: &PhasePoly, weight: &[f64]) -> PhasePoly {
    let w = PhasePoly::of_h0(weight);
    let br = |x: &PhasePoly, y: &PhasePoly| w.mul(&canonical_bracket(x, y));
    br(f, &br(g, h)).add(&br(g, &br(h, f))).add(&br(h, &br(f, g)))
}

/// Residuals `r(ħ) = |F(H₀+ħ/2) - F(H₀-ħ/2) - ħ F'(H₀)|` and their
/// log-log slope; `slope` is `None` when every residual is below `1e-14`.
#[derive(Debug, Clone)]
pub struct OrderReport {
    pub slope: Option<f64>,
    pub residuals: Vec<(f64, f64)>,
}

impl OrderReport {
    pub fn is_exact(&self) -> bool {
        self.slope.is_none()
    }
}

impl Serialize for OrderReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("OrderReport", 2)?;
        match self.slope {
            Some(v) => st.serialize_field("slope", &v)?,
            None => st.serialize_field("slope", "exact")?,
        }
        let pairs: Vec<[f64; 2]> = self.residuals.iter().map(|&(h, r)| [h, r]).collect();
        st.serialize_field("residuals", &pairs)?;
        st.end()
    }
}

pub const EXACT_THRESHOLD: f64 = 1e-14;

pub fn commutator_order_check(f: &ClassicalFunction, h0: f64, hbars: &[f64]) -> Result<OrderReport> {
    if hbars.len() < 2 {
        return Err(Error::InvalidSpec("need at least two hbar values".into()));
    }
    if hbars.windows(2).any(|w| w[1] >= w[0]) || hbars.iter().any(|&h| h.is_nan() || h < 1e-4) {
        return Err(Error::InvalidSpec("hbar values must decrease and stay >= 1e-4".into()));
    }
    let slope_at = f.derivative(h0);
    let residuals: Vec<(f64, f64)> = hbars
        .iter()
        .map(|&h| (h, (f.eval(h0 + 0.5 * h) - f.eval(h0 - 0.5 * h) - h * slope_at).abs()))
        .collect();
    if residuals.iter().any(|r| !r.1.is_finite()) {
        return Err(Error::NonFinite("residual".into()));
    }
    if residuals.iter().all(|r| r.1 < EXACT_THRESHOLD) {
        return Ok(OrderReport { slope: None, residuals });
    }
    let xs: Vec<f64> = residuals.iter().map(|r| r.0.ln()).collect();
    let ys: Vec<f64> = residuals.iter().map(|r| r.1.max(f64::MIN_POSITIVE).ln()).collect();
    Ok(OrderReport { slope: Some(regression_slope(&xs, &ys)), residuals })
}

pub const QUADRATURE_TOL: f64 = 1e-12;

/// `(∫_{H₀-ħ/2}^{H₀+ħ/2} Θ, ħΘ(H₀) + ħ³Θ''(H₀)/24)`.
pub fn quantize_bracket(theta: &ClassicalFunction, h0: f64, hbar: f64) -> Result<(f64, f64)> {
    let (lo, hi) = (h0 - 0.5 * hbar, h0 + 0.5 * hbar);
    let probes = (0..=16).map(|k| lo + (hi - lo) * k as f64 / 16.0);
    for x in probes {
        if !theta.eval(x).is_finite() {
            return Err(Error::NonFinite(format!("theta({x})")));
        }
    }
    let (integral, _) = integrate_adaptive(|x| theta.eval(x), lo, hi, QUADRATURE_TOL);
    if !integral.is_finite() {
        return Err(Error::NonFinite("integral".into()));
    }
    let expansion = hbar * theta.eval(h0) + hbar.powi(3) / 24.0 * theta.second_derivative(h0);
    Ok((integral, expansion))
}

/// Comparison of the ladder sum `F(n)` with the antiderivative `∫₀ⁿ f`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ContinuumReport {
    pub levels: usize,
    pub max_deviation: f64,
    pub max_f_prime: f64,
    /// `max_deviation / max_f_prime`.
    pub constant: f64,
    pub deviations: Vec<f64>,
}

pub fn continuum_consistency(spec: &DeformationSpec) -> Result<ContinuumReport> {
    let cont = classical_hamiltonian(spec)?;
    let table = build_ladder_table(spec);
    let d = table.dim();
    let deviations: Vec<f64> = (0..=d).map(|n| table.ladder()[n] - cont.eval(n as f64)).collect();
    let max_deviation = deviations.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let f = cont.differentiate();
    let samples = 64 * d.max(1);
    let max_f_prime = (0..=samples)
        .map(|k| f.derivative(d as f64 * k as f64 / samples as f64).abs())
        .fold(0.0, f64::max);
    let constant = if max_f_prime > 0.0 { max_deviation / max_f_prime } else { 0.0 };
    Ok(ContinuumReport { levels: d, max_deviation, max_f_prime, constant, deviations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn hamiltonians() {
        let s = DeformationSpec::series(1.0, vec![1.0], 8).unwrap();
        assert_eq!(classical_hamiltonian(&s).unwrap().coefficients().unwrap(), &[0.0, 1.0]);
        let s = DeformationSpec::series(1.0, vec![1.0, 2.0], 8).unwrap();
        let f = classical_hamiltonian(&s).unwrap();
        assert_eq!(f.coefficients().unwrap(), &[0.0, 1.0, 1.0]);
        assert_eq!(f.eval(0.0), 0.0);
        // discrete sum n + n(n-1) differs from x + x² by n at integers
        let t = build_ladder_table(&s);
        for n in 0..8 {
            assert_eq!(t.ladder()[n] - f.eval(n as f64), -(n as f64));
        }
        let q = DeformationSpec::q_symmetric(1.0, 1.2, 8).unwrap();
        assert!(classical_hamiltonian(&q).is_err());
    }

    #[test]
    fn brackets() {
        let unit = ClassicalFunction::Polynomial(vec![1.0]);
        let b = poisson_bracket(&PhasePoly::a(), &PhasePoly::a_plus(), &unit);
        assert_eq!(b.to_poly().unwrap(), PhasePoly::constant(1.0));
        let w = ClassicalFunction::Polynomial(vec![1.0, 2.0]);
        let b = poisson_bracket(&PhasePoly::a(), &PhasePoly::a_plus(), &w);
        // H₀ = 2 at q = 2, p = 0
        assert_eq!(b.eval(2.0, 0.0), Complex64::new(5.0, 0.0));
        // i times the canonical (q, p) bracket
        let qp = canonical_bracket(&PhasePoly::q(), &PhasePoly::p());
        assert!((qp.eval(0.3, 0.1) - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn jacobi_for_generators() {
        let j = jacobi_sum(&PhasePoly::a(), &PhasePoly::a_plus(), &PhasePoly::h0(), &[1.0, 2.0]);
        assert!(j.is_zero());
    }

    fn arb_cubic() -> impl Strategy<Value = PhasePoly> {
        prop::collection::vec(((0usize..=3, 0usize..=3), -3i32..=3), 1..5).prop_map(|ts| {
            let mut p = PhasePoly::zero();
            for ((i, j), c) in ts {
                if i + j <= 3 {
                    p = p.add(&PhasePoly::monomial(i, j, one() * c as f64));
                }
            }
            p
        })
    }

    proptest! {
        #[test]
        fn weighted_jacobi(f in arb_cubic(), g in arb_cubic(), h in arb_cubic(),
                           w in prop::collection::vec(-2i32..=2, 1..3)) {
            let w: Vec<f64> = w.into_iter().map(f64::from).collect();
            prop_assert!(jacobi_sum(&f, &g, &h, &w).is_zero());
        }

        #[test]
        fn quantisation_matches_difference(c in prop::collection::vec(-2.0f64..2.0, 1..6),
                                           h0 in 0.2f64..3.0, hbar in 0.01f64..0.5) {
            let mut coeffs = vec![0.0];
            coeffs.extend(c);
            let big_f = ClassicalFunction::Polynomial(coeffs);
            let (integral, _) = quantize_bracket(&big_f.differentiate(), h0, hbar).unwrap();
            let diff = big_f.eval(h0 + 0.5 * hbar) - big_f.eval(h0 - 0.5 * hbar);
            prop_assert!((integral - diff).abs() < 1e-12);
        }
    }

    #[test]
    fn order_examples() {
        let hbars = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
        assert!(commutator_order_check(&ClassicalFunction::power(1), 1.0, &hbars).unwrap().is_exact());
        assert!(commutator_order_check(&ClassicalFunction::power(2), 1.0, &hbars).unwrap().is_exact());
        let rep = commutator_order_check(&ClassicalFunction::power(3), 1.0, &hbars).unwrap();
        assert!((rep.slope.unwrap() - 3.0).abs() < 0.01);
        for &(h, r) in &rep.residuals {
            assert!((r - h.powi(3) / 4.0).abs() < 1e-12);
        }
        let json = serde_json::to_string(&commutator_order_check(&ClassicalFunction::power(1), 1.0, &hbars).unwrap()).unwrap();
        assert!(json.starts_with(r#"{"slope":"exact","residuals":[[0.1,"#), "{json}");
        assert!(commutator_order_check(&ClassicalFunction::power(3), 1.0, &[1e-3, 1e-2]).is_err());
    }

    #[test]
    fn quantisation_examples() {
        let (i, e) = quantize_bracket(&ClassicalFunction::Polynomial(vec![1.0]), 1.0, 0.3).unwrap();
        assert!((i - 0.3).abs() < 1e-15 && (e - 0.3).abs() < 1e-15);
        let (i, e) = quantize_bracket(&ClassicalFunction::power(1), 2.0, 0.1).unwrap();
        assert!((i - 0.2).abs() < 1e-15 && (e - 0.2).abs() < 1e-15);
        let (i, e) = quantize_bracket(&ClassicalFunction::power(2), 1.0, 0.1).unwrap();
        let want = 0.1 * (1.0 + 0.01 / 12.0);
        assert!((i - want).abs() < 1e-15 && (e - want).abs() < 1e-15);
        let bad = ClassicalFunction::callable(|x| 1.0 / (x - 1.0));
        assert!(quantize_bracket(&bad, 1.0, 0.1).is_err());
    }

    #[test]
    fn callable_derivatives() {
        let f = ClassicalFunction::callable(|x: f64| x.sin());
        assert!((f.derivative(0.7) - 0.7f64.cos()).abs() < 1e-9);
        assert!((f.second_derivative(0.7) + 0.7f64.sin()).abs() < 1e-5);
    }

    #[test]
    fn continuum_report() {
        let s = DeformationSpec::series(1.0, vec![1.0, 2.0], 8).unwrap();
        let rep = continuum_consistency(&s).unwrap();
        assert_eq!(rep.max_deviation, 8.0);
        assert_eq!(rep.max_f_prime, 2.0);
        assert_eq!(rep.constant, 4.0);
    }
}
