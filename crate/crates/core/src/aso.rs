//! Anti-standard-ordered monomials `A⁺ⁿ ∗ Aᵐ`, the bullet products and the
//! basis transforms `σ`, `σ⁻¹` to and from the eigenstate basis.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::deformation::LadderTable;
use crate::eigenstate::{self, EigenElement};
use crate::error::{Error, Result};
use crate::numerics::{ComplexDot2, Dot2};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Finite combination of `A⁺ⁿ Aᵐ` with `n + m <= max_degree`.
#[derive(Clone)]
pub struct AsoElement {
    table: Arc<LadderTable>,
    max_degree: usize,
    coeffs: BTreeMap<(usize, usize), Complex64>,
}

impl fmt::Debug for AsoElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AsoElement")
            .field("max_degree", &self.max_degree)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl PartialEq for AsoElement {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl AsoElement {
    /// Empty element with the default degree cap `2(D-1)`, beyond which
    /// every monomial has an index `>= D` and vanishes under `σ`.
    pub fn zero(table: &Arc<LadderTable>) -> Self {
        Self::with_max_degree(table, 2 * (table.dim() - 1))
    }

    pub fn with_max_degree(table: &Arc<LadderTable>, max_degree: usize) -> Self {
        Self { table: table.clone(), max_degree, coeffs: BTreeMap::new() }
    }

    /// `A⁺ⁿ Aᵐ`.
    pub fn monomial(table: &Arc<LadderTable>, n: usize, m: usize) -> Result<Self> {
        let mut x = Self::zero(table);
        x.add_term(n, m, Complex64::new(1.0, 0.0))?;
        Ok(x)
    }

    pub fn unit(table: &Arc<LadderTable>) -> Self {
        Self::monomial(table, 0, 0).expect("unit is within any degree cap")
    }

    pub fn from_terms<I>(table: &Arc<LadderTable>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Complex64)>,
    {
        let mut x = Self::zero(table);
        for (n, m, c) in terms {
            x.add_term(n, m, c)?;
        }
        Ok(x)
    }

    pub fn add_term(&mut self, n: usize, m: usize, c: Complex64) -> Result<()> {
        if n + m > self.max_degree {
            return Err(Error::LevelCap { level: n + m, cap: self.max_degree });
        }
        self.accumulate(n, m, c);
        Ok(())
    }

    fn accumulate(&mut self, n: usize, m: usize, c: Complex64) {
        if c == ZERO {
            return;
        }
        let entry = self.coeffs.entry((n, m)).or_insert(ZERO);
        *entry += c;
        if *entry == ZERO {
            self.coeffs.remove(&(n, m));
        }
    }

    pub fn table(&self) -> &Arc<LadderTable> {
        &self.table
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn get(&self, n: usize, m: usize) -> Complex64 {
        self.coeffs.get(&(n, m)).copied().unwrap_or(ZERO)
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.coeffs.iter().map(|(&(n, m), &c)| (n, m, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest `n + m` among stored terms.
    pub fn degree(&self) -> usize {
        self.coeffs.keys().map(|(n, m)| n + m).max().unwrap_or(0)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::with_max_degree(&self.table, self.max_degree);
        for (n, m, v) in self.terms() {
            out.accumulate(n, m, v * c);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_tables(&self.table, &other.table)?;
        let mut out = Self::with_max_degree(&self.table, self.max_degree.max(other.max_degree));
        for (n, m, v) in self.terms().chain(other.terms()) {
            out.accumulate(n, m, v);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Drops terms with `n > window` or `m > window`.
    pub fn restrict(&self, window: usize) -> Self {
        let mut out = Self::with_max_degree(&self.table, self.max_degree);
        out.coeffs = self
            .coeffs
            .iter()
            .filter(|(&(n, m), _)| n <= window && m <= window)
            .map(|(&k, &v)| (k, v))
            .collect();
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        let doc = AsoDoc {
            terms: self
                .terms()
                .map(|(n, m, c)| AsoTerm { np: n, nm: m, re: c.re, im: c.im })
                .collect(),
        };
        serde_json::to_string(&doc).expect("element serialises")
    }

    pub fn from_json(table: &Arc<LadderTable>, text: &str) -> Result<Self> {
        let doc: AsoDoc = serde_json::from_str(text)?;
        Self::from_terms(table, doc.terms.into_iter().map(|t| (t.np, t.nm, Complex64::new(t.re, t.im))))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AsoDoc {
    terms: Vec<AsoTerm>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AsoTerm {
    np: usize,
    nm: usize,
    re: f64,
    #[serde(default)]
    im: f64,
}

fn check_tables(a: &Arc<LadderTable>, b: &Arc<LadderTable>) -> Result<()> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(Error::Incompatible("elements built on different ladder tables".into()))
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Undeformed bullet product by derivative pairing:
/// `(A⁺ⁿAᵐ)•(A⁺ʳAˢ) = Σ_k ħᵏ k! C(m,k) C(r,k) A⁺^{n+r-k} A^{m+s-k}`.
///
/// Terms above the smaller of the two degree caps are dropped.
pub fn bullet_undeformed(x: &AsoElement, y: &AsoElement) -> Result<AsoElement> {
    check_tables(&x.table, &y.table)?;
    if !x.table.is_standard() {
        return Err(Error::UnsupportedKind {
            op: "bullet_undeformed",
            kind: x.table.spec().kind().name(),
        });
    }
    let hbar = x.table.hbar();
    let cap = x.max_degree.min(y.max_degree);
    let mut out = AsoElement::with_max_degree(&x.table, cap);
    for (n, m, a) in x.terms() {
        for (r, s, b) in y.terms() {
            let mut fact = 1.0;
            for k in 0..=m.min(r) {
                if k > 0 {
                    fact *= k as f64;
                }
                let (p, q) = (n + r - k, m + s - k);
                if p + q > cap {
                    continue;
                }
                let w = hbar.powi(k as i32) * fact * binomial(m, k) * binomial(r, k);
                out.accumulate(p, q, a * b * w);
            }
        }
    }
    Ok(out)
}

/// `C(n,m,i)` and the memoised inverse coefficients `D(n,m,k)`.
type DRows = RwLock<HashMap<(usize, usize), Arc<Vec<f64>>>>;

pub struct SigmaCoeffs {
    table: Arc<LadderTable>,
    margin: usize,
    d_rows: DRows,
}

impl fmt::Debug for SigmaCoeffs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SigmaCoeffs")
            .field("dim", &self.table.dim())
            .field("margin", &self.margin)
            .finish()
    }
}

impl SigmaCoeffs {
    /// Coefficients with the default truncation margin `K = D/2`.
    pub fn new(table: &Arc<LadderTable>) -> Self {
        Self::with_margin(table, table.dim() / 2)
    }

    pub fn with_margin(table: &Arc<LadderTable>, margin: usize) -> Self {
        Self { table: table.clone(), margin: margin.min(table.dim()), d_rows: RwLock::new(HashMap::new()) }
    }

    pub fn table(&self) -> &Arc<LadderTable> {
        &self.table
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    /// Largest index `n, m` covered by the round-trip guarantee, `D - K`.
    pub fn safe_window(&self) -> usize {
        self.table.dim() - self.margin
    }

    /// `C(n,m,i) = √(F!(n+i) F!(m+i)) / F!(i)`; indices must stay `<= D`.
    pub fn c(&self, n: usize, m: usize, i: usize) -> f64 {
        let ff = self.table.ladder_fact();
        let r1 = ff[n + i] / ff[i];
        let direct = if n == m { r1 } else { (r1 * (ff[m + i] / ff[i])).sqrt() };
        if direct.is_finite() && direct != 0.0 {
            return direct;
        }
        if self.table.first_degenerate_level().is_some_and(|j| j <= n.max(m) + i) {
            return direct;
        }
        let t = &self.table;
        (0.5 * (t.ln_ladder_fact(n + i) + t.ln_ladder_fact(m + i)) - t.ln_ladder_fact(i)).exp()
    }

    /// Fails when some `F(j)`, `1 <= j <= D`, is not strictly positive.
    pub fn check_invertible(&self) -> Result<()> {
        match self.table.first_degenerate_level() {
            Some(level) => Err(Error::Degenerate { level, value: self.table.ladder()[level] }),
            None => Ok(()),
        }
    }

    /// `D(n,m,k)` for `0 <= k < D - max(n,m)`.
    ///
    /// Each step forms the whole sum before the single division, so the
    /// round trip `σ∘σ⁻¹` telescopes to one rounding per coefficient.
    pub fn d_row(&self, n: usize, m: usize) -> Arc<Vec<f64>> {
        if let Some(row) = self.d_rows.read().unwrap().get(&(n, m)) {
            return row.clone();
        }
        let len = self.table.dim().saturating_sub(n.max(m));
        let mut row = Vec::with_capacity(len);
        for k in 0..len {
            if k == 0 {
                row.push(1.0 / self.c(n, m, 0));
                continue;
            }
            let mut acc = Dot2::new();
            for (i, &d) in row.iter().enumerate() {
                acc.add_product(self.c(n + i, m + i, k - i), d);
            }
            row.push(-acc.value() / self.c(n + k, m + k, 0));
        }
        let row = Arc::new(row);
        self.d_rows.write().unwrap().entry((n, m)).or_insert(row).clone()
    }

    /// `σ(A⁺ⁿAᵐ) = Σ_i C(n,m,i) Ω_{n+i,m+i}`, truncated at `D`.
    pub fn sigma(&self, x: &AsoElement) -> Result<EigenElement> {
        check_tables(&self.table, &x.table)?;
        let d = self.table.dim();
        let mut acc: BTreeMap<(usize, usize), ComplexDot2> = BTreeMap::new();
        for (n, m, c) in x.terms() {
            for i in 0..d.saturating_sub(n.max(m)) {
                acc.entry((n + i, m + i)).or_default().add_scaled(c, self.c(n, m, i));
            }
        }
        EigenElement::from_terms(&self.table, acc.into_iter().map(|((n, m), v)| (n, m, v.value())))
    }

    /// `σ⁻¹(Ω_nm) = Σ_k D(n,m,k) A⁺^{n+k} A^{m+k}`.
    pub fn sigma_inverse(&self, x: &EigenElement) -> Result<AsoElement> {
        check_tables(&self.table, x.table())?;
        self.check_invertible()?;
        let mut acc: BTreeMap<(usize, usize), ComplexDot2> = BTreeMap::new();
        for (n, m, c) in x.terms() {
            let row = self.d_row(n, m);
            for (k, &dk) in row.iter().enumerate() {
                acc.entry((n + k, m + k)).or_default().add_scaled(c, dk);
            }
        }
        AsoElement::from_terms(&self.table, acc.into_iter().map(|((n, m), v)| (n, m, v.value())))
    }

    /// `x • y = σ⁻¹(σ(x) ∗ σ(y))`. The whole truncated result is returned;
    /// it is reliable for indices up to [`SigmaCoeffs::safe_window`].
    pub fn bullet(&self, x: &AsoElement, y: &AsoElement) -> Result<AsoElement> {
        self.check_invertible()?;
        let prod = eigenstate::star(&self.sigma(x)?, &self.sigma(y)?)?;
        self.sigma_inverse(&prod)
    }
}

pub fn sigma(x: &AsoElement) -> Result<EigenElement> {
    SigmaCoeffs::new(&x.table).sigma(x)
}

pub fn sigma_inverse(x: &EigenElement) -> Result<AsoElement> {
    SigmaCoeffs::new(x.table()).sigma_inverse(x)
}

pub fn bullet_deformed(x: &AsoElement, y: &AsoElement) -> Result<AsoElement> {
    check_tables(&x.table, &y.table)?;
    SigmaCoeffs::new(&x.table).bullet(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deformation::{build_ladder_table, DeformationSpec};
    use crate::eigenstate::{generator, sigma_hom, Generator, Word};
    use nalgebra::DMatrix;

    fn table(spec: DeformationSpec) -> Arc<LadderTable> {
        Arc::new(build_ladder_table(&spec))
    }

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    // Truncated Fock matrices of a, a⁺ for the undeformed oracle.
    fn fock(d: usize, hbar: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        let mut a = DMatrix::zeros(d, d);
        for n in 0..d - 1 {
            a[(n, n + 1)] = (hbar * (n + 1) as f64).sqrt();
        }
        let ad = a.transpose();
        (a, ad)
    }

    #[test]
    fn undeformed_examples() {
        let t = table(DeformationSpec::standard(1.0, 8).unwrap());
        let mono = |n, m| AsoElement::monomial(&t, n, m).unwrap();
        let got = bullet_undeformed(&mono(0, 1), &mono(1, 0)).unwrap();
        assert_eq!(got, mono(1, 1).add(&mono(0, 0)).unwrap());
        assert_eq!(bullet_undeformed(&mono(1, 0), &mono(0, 1)).unwrap(), mono(1, 1));
        let got = bullet_undeformed(&mono(1, 1), &mono(1, 1)).unwrap();
        assert_eq!(got, mono(2, 2).add(&mono(1, 1)).unwrap());

        // oracle: (a⁺a)² = a⁺²a² + a⁺a on the D=8 truncation
        let (a, ad) = fock(8, 1.0);
        let n_op = &ad * &a;
        let lhs = &n_op * &n_op;
        let rhs = &ad * &ad * &a * &a + &n_op;
        assert!((lhs - rhs).abs().max() < 1e-12);
    }

    #[test]
    fn undeformed_matches_matrix_oracle_at_hbar() {
        let hbar = 0.5;
        let d = 10;
        let t = table(DeformationSpec::standard(hbar, d).unwrap());
        let (a, ad) = fock(d, hbar);
        let mat = |n: usize, m: usize| ad.pow(n as u32) * a.pow(m as u32);
        for (n, m, r, s) in [(0, 1, 1, 0), (1, 2, 2, 1), (0, 2, 2, 0), (2, 1, 1, 2)] {
            let x = AsoElement::monomial(&t, n, m).unwrap();
            let y = AsoElement::monomial(&t, r, s).unwrap();
            let prod = bullet_undeformed(&x, &y).unwrap();
            let mut got = DMatrix::zeros(d, d);
            for (p, q, c) in prod.terms() {
                got += mat(p, q) * c.re;
            }
            let want = mat(n, m) * mat(r, s);
            let w = d - (m + r);
            for i in 0..w {
                for j in 0..w {
                    assert!((got[(i, j)] - want[(i, j)]).abs() < 1e-12, "({n},{m})({r},{s}) at {i},{j}");
                }
            }
        }
    }

    #[test]
    fn bullet_undeformed_rejects_deformed_tables() {
        let t = table(DeformationSpec::q_symmetric(1.0, 1.3, 6).unwrap());
        let x = AsoElement::unit(&t);
        assert!(matches!(bullet_undeformed(&x, &x), Err(Error::UnsupportedKind { .. })));
    }

    #[test]
    fn sigma_examples() {
        let t = table(DeformationSpec::qp(1.0, 2.0, 0.5, 12).unwrap());
        let s = SigmaCoeffs::new(&t);
        let unit = s.sigma(&AsoElement::unit(&t)).unwrap();
        assert_eq!(unit, EigenElement::identity(&t));
        let ap = s.sigma(&AsoElement::monomial(&t, 1, 0).unwrap()).unwrap();
        let diff = ap.sub(&generator(Generator::APlus, &t)).unwrap();
        assert!(diff.max_abs() < 1e-12);

        let st = table(DeformationSpec::standard(1.0, 12).unwrap());
        let n = sigma(&AsoElement::monomial(&st, 1, 1).unwrap()).unwrap();
        let want = sigma_hom(&Word::parse("A⁺A").unwrap(), &st);
        assert!(n.sub(&want).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn vacuum_expansion() {
        let hbar = 0.5;
        let t = table(DeformationSpec::standard(hbar, 16).unwrap());
        let s = SigmaCoeffs::new(&t);
        let vac = s.sigma_inverse(&EigenElement::basis(&t, 0, 0).unwrap()).unwrap();
        let mut fact = 1.0;
        for i in 0..16 {
            if i > 0 {
                fact *= i as f64;
            }
            let want = (-1f64).powi(i as i32) / (fact * hbar.powi(i as i32));
            let got = vac.get(i, i).re;
            assert!((got - want).abs() <= 1e-10 * want.abs(), "i={i} got={got} want={want}");
        }
        let unit = s.sigma_inverse(&EigenElement::identity(&t)).unwrap();
        assert!(unit.restrict(s.safe_window()).sub(&AsoElement::unit(&t)).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn degenerate_fixture_fails() {
        let t = table(DeformationSpec::table(1.0, vec![1.0, 0.0, -1.0]).unwrap());
        let err = sigma_inverse(&EigenElement::basis(&t, 0, 0).unwrap()).unwrap_err();
        assert_eq!(err, Error::Degenerate { level: 3, value: 0.0 });
    }

    #[test]
    fn deformed_commutator_is_f_of_n() {
        let t = table(DeformationSpec::q_symmetric(1.0, 1.3, 16).unwrap());
        let s = SigmaCoeffs::new(&t);
        let a = AsoElement::monomial(&t, 0, 1).unwrap();
        let ad = AsoElement::monomial(&t, 1, 0).unwrap();
        let comm = s.bullet(&a, &ad).unwrap().sub(&s.bullet(&ad, &a).unwrap()).unwrap();
        let mut f_diag = EigenElement::zero(&t);
        for i in 0..16 {
            f_diag.add_term(i, i, Complex64::new(t.f()[i], 0.0)).unwrap();
        }
        let want = s.sigma_inverse(&f_diag).unwrap();
        let w = s.safe_window();
        let diff = comm.restrict(w).sub(&want.restrict(w)).unwrap();
        assert!(diff.max_abs() < 1e-9, "{}", diff.max_abs());
    }

    #[test]
    fn unit_is_neutral() {
        let t = table(DeformationSpec::series(1.0, vec![1.0, 0.1], 16).unwrap());
        let s = SigmaCoeffs::new(&t);
        let x = AsoElement::from_terms(&t, [(1, 2, one()), (0, 3, Complex64::new(0.5, -1.0))]).unwrap();
        let got = s.bullet(&AsoElement::unit(&t), &x).unwrap();
        let diff = got.restrict(s.safe_window()).sub(&x).unwrap();
        assert!(diff.max_abs() < 1e-10, "{}", diff.max_abs());
    }

    #[test]
    fn json_round_trip() {
        let t = table(DeformationSpec::standard(1.0, 4).unwrap());
        let x = AsoElement::from_terms(&t, [(2, 1, Complex64::new(1.0, 2.0))]).unwrap();
        assert_eq!(AsoElement::from_json(&t, &x.to_json()).unwrap(), x);
    }
}
