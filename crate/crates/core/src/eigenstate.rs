//! The eigenstate basis `Ω_nm` of the truncated deformed algebra.
//!
//! An [`EigenElement`] is a sparse complex matrix of coefficients on
//! `Ω_nm`, `0 <= n, m < D`. The star product is the matrix product and
//! `π` sends an element to its dense coefficient matrix.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::deformation::LadderTable;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Generator {
    E,
    A,
    APlus,
    N,
    H,
}

impl Generator {
    /// Net change of the level index: `A` lowers, `A+` raises.
    pub fn ladder_degree(self) -> usize {
        match self {
            Generator::A | Generator::APlus => 1,
            _ => 0,
        }
    }
}

impl std::str::FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "E" | "1" => Ok(Generator::E),
            "A" => Ok(Generator::A),
            "A⁺" | "A^+" | "A+" | "Ad" | "A_plus" | "Aplus" => Ok(Generator::APlus),
            "N" => Ok(Generator::N),
            "H" => Ok(Generator::H),
            other => Err(Error::Parse(format!("unknown generator `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone)]
pub struct EigenElement {
    table: Arc<LadderTable>,
    coeffs: BTreeMap<(usize, usize), Complex64>,
}

impl fmt::Debug for EigenElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EigenElement")
            .field("dim", &self.dim())
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl PartialEq for EigenElement {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.coeffs == other.coeffs
    }
}

fn same_table(a: &Arc<LadderTable>, b: &Arc<LadderTable>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl EigenElement {
    pub fn zero(table: &Arc<LadderTable>) -> Self {
        Self { table: table.clone(), coeffs: BTreeMap::new() }
    }

    /// `Ω_nm`.
    pub fn basis(table: &Arc<LadderTable>, n: usize, m: usize) -> Result<Self> {
        let mut x = Self::zero(table);
        x.add_term(n, m, Complex64::new(1.0, 0.0))?;
        Ok(x)
    }

    /// `I = Σ Ω_nn`.
    pub fn identity(table: &Arc<LadderTable>) -> Self {
        generator(Generator::E, table)
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

    /// Adds `c Ω_nm`, dropping the entry if it cancels to zero.
    pub fn add_term(&mut self, n: usize, m: usize, c: Complex64) -> Result<()> {
        let d = self.dim();
        if n >= d || m >= d {
            return Err(Error::LevelCap { level: n.max(m), cap: d });
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

    pub fn dim(&self) -> usize {
        self.table.dim()
    }

    pub fn table(&self) -> &Arc<LadderTable> {
        &self.table
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

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::Incompatible(format!(
                "dimension {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        if !same_table(&self.table, &other.table) {
            return Err(Error::Incompatible("elements built on different ladder tables".into()));
        }
        Ok(())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(&self.table);
        for (n, m, v) in self.terms() {
            out.accumulate(n, m, v * c);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (n, m, v) in other.terms() {
            out.accumulate(n, m, v);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drops all terms with an index `> window`.
    pub fn restrict(&self, window: usize) -> Self {
        let mut out = Self::zero(&self.table);
        out.coeffs = self
            .coeffs
            .iter()
            .filter(|(&(n, m), _)| n <= window && m <= window)
            .map(|(&k, &v)| (k, v))
            .collect();
        out
    }

    pub fn to_json(&self) -> String {
        let doc = EigenDoc {
            dim: self.dim(),
            terms: self
                .terms()
                .map(|(n, m, c)| EigenTerm { n, m, re: c.re, im: c.im })
                .collect(),
        };
        serde_json::to_string(&doc).expect("element serialises")
    }

    pub fn from_json(table: &Arc<LadderTable>, text: &str) -> Result<Self> {
        let doc: EigenDoc = serde_json::from_str(text)?;
        if doc.dim != table.dim() {
            return Err(Error::Incompatible(format!(
                "document dim {} but table dim {}",
                doc.dim,
                table.dim()
            )));
        }
        Self::from_terms(table, doc.terms.into_iter().map(|t| (t.n, t.m, Complex64::new(t.re, t.im))))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EigenDoc {
    dim: usize,
    terms: Vec<EigenTerm>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EigenTerm {
    n: usize,
    m: usize,
    re: f64,
    #[serde(default)]
    im: f64,
}

/// `Ω_nm ∗ Ω_n'm' = δ_mn' Ω_nm'`, extended bilinearly.
pub fn star(x: &EigenElement, y: &EigenElement) -> Result<EigenElement> {
    x.check_compatible(y)?;
    let mut rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); y.dim()];
    for (n, m, c) in y.terms() {
        rows[n].push((m, c));
    }
    let mut out = EigenElement::zero(&x.table);
    for (n, m, a) in x.terms() {
        for &(k, b) in &rows[m] {
            out.accumulate(n, k, a * b);
        }
    }
    Ok(out)
}

/// `x ∗ y − y ∗ x`.
pub fn commutator(x: &EigenElement, y: &EigenElement) -> Result<EigenElement> {
    star(x, y)?.sub(&star(y, x)?)
}

/// Conjugate transpose of the coefficient matrix.
pub fn conjugate(x: &EigenElement) -> EigenElement {
    let mut out = EigenElement::zero(&x.table);
    out.coeffs = x.terms().map(|(n, m, c)| ((m, n), c.conj())).collect();
    out
}

/// `⟨x, y⟩ = Σ conj(x_nm) y_nm`.
pub fn inner_product(x: &EigenElement, y: &EigenElement) -> Result<Complex64> {
    x.check_compatible(y)?;
    Ok(x.terms().map(|(n, m, c)| c.conj() * y.get(n, m)).sum())
}

/// Truncated image of a generator in the eigenstate basis.
pub fn generator(which: Generator, table: &Arc<LadderTable>) -> EigenElement {
    let d = table.dim();
    let lad = table.ladder();
    let mut x = EigenElement::zero(table);
    let re = |v: f64| Complex64::new(v, 0.0);
    match which {
        Generator::E => (0..d).for_each(|n| x.accumulate(n, n, re(1.0))),
        Generator::N => (0..d).for_each(|n| x.accumulate(n, n, re(n as f64))),
        Generator::H => (0..d).for_each(|n| x.accumulate(n, n, re(table.spectrum()[n]))),
        Generator::A => (0..d - 1).for_each(|n| x.accumulate(n, n + 1, re(lad[n + 1].sqrt()))),
        Generator::APlus => (0..d - 1).for_each(|n| x.accumulate(n + 1, n, re(lad[n + 1].sqrt()))),
    }
    x
}

/// Generator action by the ladder relations, without forming the generator.
pub fn apply_ladder(side: Side, which: Generator, x: &EigenElement) -> EigenElement {
    let table = &x.table;
    let d = table.dim();
    let lad = table.ladder();
    let mut out = EigenElement::zero(table);
    for (n, m, c) in x.terms() {
        let k = if side == Side::Left { n } else { m };
        // (new index, factor) for the acted-on index
        let moved = match (side, which) {
            (_, Generator::E) => Some((k, 1.0)),
            (_, Generator::N) => Some((k, k as f64)),
            (_, Generator::H) => Some((k, table.spectrum()[k])),
            (Side::Left, Generator::A) | (Side::Right, Generator::APlus) => {
                (k > 0).then(|| (k - 1, lad[k].sqrt()))
            }
            (Side::Left, Generator::APlus) | (Side::Right, Generator::A) => {
                (k + 1 < d).then(|| (k + 1, lad[k + 1].sqrt()))
            }
        };
        if let Some((k2, f)) = moved {
            let (n2, m2) = if side == Side::Left { (k2, m) } else { (n, k2) };
            out.accumulate(n2, m2, c * f);
        }
    }
    out
}

/// Dense image `π(x)` with `π(Ω_nm) = e(n, m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    entries: DMatrix<Complex64>,
}

impl OperatorMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Self {
        assert!(entries.is_square(), "operator matrices are square");
        Self { entries }
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Inverse of `π`.
    pub fn to_element(&self, table: &Arc<LadderTable>) -> Result<EigenElement> {
        if self.dim() != table.dim() {
            return Err(Error::Incompatible(format!(
                "matrix dim {} but table dim {}",
                self.dim(),
                table.dim()
            )));
        }
        let mut x = EigenElement::zero(table);
        for n in 0..self.dim() {
            for m in 0..self.dim() {
                x.accumulate(n, m, self.entries[(n, m)]);
            }
        }
        Ok(x)
    }
}

pub fn pi_matrix(x: &EigenElement) -> OperatorMatrix {
    let d = x.dim();
    let mut entries = DMatrix::from_element(d, d, ZERO);
    for (n, m, c) in x.terms() {
        entries[(n, m)] = c;
    }
    OperatorMatrix { entries }
}

/// A formal linear combination of generator words, e.g. `"A A⁺ - A⁺ A"` or
/// `"2*N + 0.5*1"`.
#[derive(Debug, Clone, PartialEq)]
pub struct Word {
    terms: Vec<(Complex64, Vec<Generator>)>,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Gen(Generator),
    Unit,
    Num(f64),
    Imag,
    Plus,
    Minus,
    Times,
}

fn tokenize(s: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            _ if c.is_whitespace() => i += 1,
            '*' | '∗' | '·' => {
                out.push(Token::Times);
                i += 1;
            }
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' | '−' => {
                out.push(Token::Minus);
                i += 1;
            }
            'i' => {
                out.push(Token::Imag);
                i += 1;
            }
            'A' => {
                let rest: String = chars[i + 1..].iter().take(2).collect();
                if rest.starts_with('⁺') || rest.starts_with('d') {
                    out.push(Token::Gen(Generator::APlus));
                    i += 2;
                } else if rest.starts_with("^+") {
                    out.push(Token::Gen(Generator::APlus));
                    i += 3;
                } else {
                    out.push(Token::Gen(Generator::A));
                    i += 1;
                }
            }
            'N' => {
                out.push(Token::Gen(Generator::N));
                i += 1;
            }
            'E' => {
                out.push(Token::Gen(Generator::E));
                i += 1;
            }
            'H' => {
                out.push(Token::Gen(Generator::H));
                i += 1;
            }
            _ if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                if text == "1" && !matches!(chars.get(i), Some('*')) {
                    out.push(Token::Unit);
                } else {
                    let v = text
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad number `{text}`")))?;
                    out.push(Token::Num(v));
                }
            }
            _ => return Err(Error::Parse(format!("unexpected character `{c}` in word"))),
        }
    }
    Ok(out)
}

impl Word {
    pub fn parse(text: &str) -> Result<Self> {
        let tokens = tokenize(text)?;
        if tokens.is_empty() {
            return Err(Error::Parse("empty word".into()));
        }
        let mut terms = Vec::new();
        let mut sign = 1.0;
        let mut coeff = Complex64::new(1.0, 0.0);
        let mut gens: Vec<Generator> = Vec::new();
        let mut seen = false;
        let mut flush = |sign: f64, coeff: Complex64, gens: &mut Vec<Generator>, seen: bool| {
            if !seen {
                return Err(Error::Parse(format!("dangling operator in `{text}`")));
            }
            terms.push((coeff * sign, std::mem::take(gens)));
            Ok(())
        };
        for tok in tokens {
            match tok {
                Token::Plus | Token::Minus => {
                    if seen {
                        flush(sign, coeff, &mut gens, seen)?;
                        sign = 1.0;
                    }
                    if tok == Token::Minus {
                        sign = -sign;
                    }
                    coeff = Complex64::new(1.0, 0.0);
                    seen = false;
                }
                Token::Times => {}
                Token::Num(v) => {
                    coeff *= v;
                    seen = true;
                }
                Token::Imag => {
                    coeff *= Complex64::new(0.0, 1.0);
                    seen = true;
                }
                Token::Unit => seen = true,
                Token::Gen(g) => {
                    if g != Generator::E {
                        gens.push(g);
                    }
                    seen = true;
                }
            }
        }
        flush(sign, coeff, &mut gens, seen)?;
        Ok(Word { terms })
    }

    pub fn terms(&self) -> &[(Complex64, Vec<Generator>)] {
        &self.terms
    }

    /// Largest number of ladder generators in a single monomial.
    pub fn ladder_degree(&self) -> usize {
        self.terms
            .iter()
            .map(|(_, g)| g.iter().map(|x| x.ladder_degree()).sum())
            .max()
            .unwrap_or(0)
    }
}

/// `Σ(u)`: evaluates the word by composing truncated generator matrices.
pub fn sigma_hom(word: &Word, table: &Arc<LadderTable>) -> EigenElement {
    let d = table.dim();
    let gens: Vec<DMatrix<Complex64>> =
        [Generator::E, Generator::A, Generator::APlus, Generator::N, Generator::H]
            .iter()
            .map(|&g| pi_matrix(&generator(g, table)).into_entries())
            .collect();
    let index = |g: Generator| match g {
        Generator::E => 0,
        Generator::A => 1,
        Generator::APlus => 2,
        Generator::N => 3,
        Generator::H => 4,
    };
    let mut total = DMatrix::from_element(d, d, ZERO);
    for (c, word) in &word.terms {
        let mut m = DMatrix::<Complex64>::identity(d, d);
        for &g in word {
            m = &m * &gens[index(g)];
        }
        total += m * *c;
    }
    OperatorMatrix { entries: total }
        .to_element(table)
        .expect("dims agree by construction")
}
