//! Coproducts on the truncated tensor square `F_D ⊗ F_D`.
//!
//! Tensor basis states `|i, j⟩` are indexed `i * D + j`, matching
//! `kron(X, Y)[(i D + j, k D + l)] = X[i, k] Y[j, l]`.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::aso::{bullet_undeformed, AsoElement, SigmaCoeffs};
use crate::deformation::{build_ladder_table, LadderTable};
use crate::eigenstate::{generator, pi_matrix, Generator};
use crate::equivalence::EquivalenceMap;
use crate::error::{Error, Result};

/// Largest single-mode dimension accepted for tensor computations.
pub const MAX_TENSOR_DIM: usize = 8;

fn c(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorOperator {
    entries: DMatrix<Complex64>,
    dim: usize,
}

impl TensorOperator {
    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Single-mode dimension `D`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mul(&self, other: &TensorOperator) -> TensorOperator {
        TensorOperator { entries: &self.entries * &other.entries, dim: self.dim }
    }

    pub fn commutator(&self, other: &TensorOperator) -> TensorOperator {
        let e = &self.entries * &other.entries - &other.entries * &self.entries;
        TensorOperator { entries: e, dim: self.dim }
    }

    /// Largest deviation from `other` over columns `|i, j⟩` with
    /// `i + j <= max_total`.
    pub fn column_deviation(&self, other: &TensorOperator, max_total: usize) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                if i + j > max_total {
                    continue;
                }
                let col = i * d + j;
                for row in 0..d * d {
                    let diff = (self.entries[(row, col)] - other.entries[(row, col)]).norm();
                    worst = worst.max(diff);
                }
            }
        }
        worst
    }

    /// Largest deviation on the block `|i, j⟩ -> |k, l⟩` with all four
    /// indices `<= window`.
    pub fn interior_deviation(&self, other: &TensorOperator, window: usize) -> f64 {
        let d = self.dim;
        let inside = |s: usize| s / d <= window && s % d <= window;
        let mut worst: f64 = 0.0;
        for row in (0..d * d).filter(|&r| inside(r)) {
            for col in (0..d * d).filter(|&s| inside(s)) {
                worst = worst.max((self.entries[(row, col)] - other.entries[(row, col)]).norm());
            }
        }
        worst
    }

    pub fn identity(dim: usize) -> TensorOperator {
        TensorOperator { entries: DMatrix::identity(dim * dim, dim * dim), dim }
    }
}

fn check_tensor_table(table: &LadderTable) -> Result<()> {
    if table.dim() > MAX_TENSOR_DIM {
        return Err(Error::LevelCap { level: table.dim(), cap: MAX_TENSOR_DIM });
    }
    Ok(())
}

fn check_standard(table: &LadderTable, op: &'static str) -> Result<()> {
    if !table.is_standard() {
        return Err(Error::UnsupportedKind { op, kind: table.spec().kind().name() });
    }
    Ok(())
}

fn gen_matrix(g: Generator, table: &Arc<LadderTable>) -> DMatrix<Complex64> {
    pi_matrix(&generator(g, table)).into_entries()
}

/// Symbolic sum of tensor products of single generators, one per slot.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorExpr {
    slots: usize,
    terms: Vec<(f64, Vec<Generator>)>,
}

fn gen_key(g: Generator) -> u8 {
    match g {
        Generator::E => 0,
        Generator::A => 1,
        Generator::APlus => 2,
        Generator::N => 3,
        Generator::H => 4,
    }
}

impl TensorExpr {
    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn terms(&self) -> &[(f64, Vec<Generator>)] {
        &self.terms
    }

    /// Sorts terms and merges equal generator strings.
    fn normalise(mut self) -> Self {
        self.terms.sort_by_key(|(_, g)| g.iter().map(|&x| gen_key(x)).collect::<Vec<_>>());
        let mut out: Vec<(f64, Vec<Generator>)> = Vec::new();
        for (w, g) in self.terms {
            match out.last_mut() {
                Some((w0, g0)) if *g0 == g => *w0 += w,
                _ => out.push((w, g)),
            }
        }
        out.retain(|(w, _)| *w != 0.0);
        TensorExpr { slots: self.slots, terms: out }
    }

    /// Applies the `h(1)` coproduct to slot `slot`, producing one more slot.
    pub fn apply_coproduct(&self, slot: usize, hbar: f64) -> Result<TensorExpr> {
        let mut terms = Vec::new();
        for (w, gens) in &self.terms {
            for (w2, pair) in coproduct_h1_expr(gens[slot], hbar)?.terms {
                let mut g = gens[..slot].to_vec();
                g.extend(pair);
                g.extend_from_slice(&gens[slot + 1..]);
                terms.push((w * w2, g));
            }
        }
        Ok(TensorExpr { slots: self.slots + 1, terms }.normalise())
    }

    /// Dense matrix on the `slots`-fold tensor power of the Fock space.
    pub fn to_matrix(&self, table: &Arc<LadderTable>) -> DMatrix<Complex64> {
        let d = table.dim();
        let size = d.pow(self.slots as u32);
        let mut out = DMatrix::from_element(size, size, c(0.0));
        for (w, gens) in &self.terms {
            let mut m = DMatrix::from_element(1, 1, c(*w));
            for &g in gens {
                m = m.kronecker(&gen_matrix(g, table));
            }
            out += m;
        }
        out
    }
}

/// Coproduct of `h(1)` plus the non-canonical number operator:
/// `Δ(x) = x⊗1 + 1⊗x` on `1, A, A⁺` (with `Δ(1) = 1⊗1`) and
/// `Δ(N) = N⊗1 + 1⊗N + (A⊗A⁺ + A⁺⊗A)/ħ`.
pub fn coproduct_h1_expr(which: Generator, hbar: f64) -> Result<TensorExpr> {
    use Generator::*;
    let terms = match which {
        E => vec![(1.0, vec![E, E])],
        A | APlus => vec![(1.0, vec![which, E]), (1.0, vec![E, which])],
        N => vec![
            (1.0, vec![N, E]),
            (1.0, vec![E, N]),
            (1.0 / hbar, vec![A, APlus]),
            (1.0 / hbar, vec![APlus, A]),
        ],
        H => return Err(Error::UnsupportedKind { op: "coproduct", kind: "H" }),
    };
    Ok(TensorExpr { slots: 2, terms }.normalise())
}

pub fn coproduct_h1(which: Generator, table: &Arc<LadderTable>) -> Result<TensorOperator> {
    check_tensor_table(table)?;
    check_standard(table, "coproduct_h1")?;
    let expr = coproduct_h1_expr(which, table.hbar())?;
    Ok(TensorOperator { entries: expr.to_matrix(table), dim: table.dim() })
}

/// `(Δ⊗id)Δ(x)` and `(id⊗Δ)Δ(x)` as symbolic three-slot expressions.
pub fn coassociativity_pair(which: Generator, hbar: f64) -> Result<(TensorExpr, TensorExpr)> {
    let delta = coproduct_h1_expr(which, hbar)?;
    Ok((delta.apply_coproduct(0, hbar)?, delta.apply_coproduct(1, hbar)?))
}

/// Co-unit on generators: `ε(1) = 1`, zero on `A`, `A⁺`, `N`.
pub fn counit(which: Generator) -> Result<f64> {
    match which {
        Generator::E => Ok(1.0),
        Generator::A | Generator::APlus | Generator::N => Ok(0.0),
        Generator::H => Err(Error::UnsupportedKind { op: "counit", kind: "H" }),
    }
}

/// Homomorphic extension of the co-unit to an ASO element: only the
/// constant term survives.
pub fn counit_aso(x: &AsoElement) -> Complex64 {
    x.get(0, 0)
}

/// Sign of the antipode on a generator, `S(x) = sign · x`.
///
/// The algebra unit has `S(1) = 1`; the central generator of `h(1)`, which
/// the Fock realisation identifies with the unit, is primitive and has
/// `S = -1`.
pub fn antipode_sign(which: Generator) -> Result<f64> {
    match which {
        Generator::E => Ok(1.0),
        Generator::A | Generator::APlus | Generator::N => Ok(-1.0),
        Generator::H => Err(Error::UnsupportedKind { op: "antipode", kind: "H" }),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AntipodeReport {
    /// `S(A⁺)S(A) - S(A)S(A⁺) = S([A, A⁺])` with a primitive central element.
    pub central_generator_consistent: bool,
    /// The same relation when the central element is the unit, `S(1) = 1`.
    pub unit_identification_consistent: bool,
}

/// Checks the antipode against `[A, A⁺] = ħ Z` in the faithful 3×3
/// Heisenberg representation `A = e12`, `A⁺ = e23`, `Z = e13 / ħ`.
pub fn antipode_check(hbar: f64) -> AntipodeReport {
    let e = |i: usize, j: usize| {
        let mut m = DMatrix::<f64>::zeros(3, 3);
        m[(i, j)] = 1.0;
        m
    };
    let (a, ad, z) = (e(0, 1), e(1, 2), e(0, 2) / hbar);
    let s = |x: &DMatrix<f64>| -x;
    // anti-homomorphism: S(xy - yx) = S(y)S(x) - S(x)S(y)
    let lhs = s(&ad) * s(&a) - s(&a) * s(&ad);
    let central = &z * (-hbar);
    let unit = DMatrix::<f64>::identity(3, 3) * hbar;
    AntipodeReport {
        central_generator_consistent: lhs == central,
        unit_identification_consistent: lhs == unit,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CounitReport {
    pub hbar: f64,
    /// `ε(A)ε(A⁺) - ε(A⁺)ε(A)` over the sampled candidate values.
    pub max_scalar_commutator: f64,
    /// `ħ ε(1)`, which a homomorphic co-unit would have to match.
    pub required: f64,
    pub obstruction: bool,
}

/// Any `ε` with `ε(1) = 1` multiplicative on the Weyl product must send
/// `[A, A⁺] = ħ` to a commutator of scalars, which vanishes.
pub fn counit_obstruction(hbar: f64) -> CounitReport {
    let samples = [-2.0, -0.5, 0.0, 0.25, 1.0, 3.0];
    let mut worst: f64 = 0.0;
    for &x in &samples {
        for &y in &samples {
            let ex = Complex64::new(x, 0.5 * y);
            let ey = Complex64::new(y, -x);
            worst = worst.max((ex * ey - ey * ex).norm());
        }
    }
    let required = hbar;
    CounitReport { hbar, max_scalar_commutator: worst, required, obstruction: worst != required }
}

pub fn counit_obstruction_check(table: &LadderTable) -> CounitReport {
    counit_obstruction(table.hbar())
}

/// Weyl coproduct `Δ(A) = (A⊗1 + 1⊗A)/√2`, `Δ(A⁺)` alike, `Δ(1) = 1⊗1`,
/// and `ħ Δ(N) = Δ(A⁺) Δ(A)`.
pub fn coproduct_weyl(which: Generator, table: &Arc<LadderTable>) -> Result<TensorOperator> {
    check_tensor_table(table)?;
    check_standard(table, "coproduct_weyl")?;
    let d = table.dim();
    let one = DMatrix::<Complex64>::identity(d, d);
    let lift = |g: Generator| {
        let m = gen_matrix(g, table);
        (m.kronecker(&one) + one.kronecker(&m)) * c(std::f64::consts::FRAC_1_SQRT_2)
    };
    let entries = match which {
        Generator::E => DMatrix::identity(d * d, d * d),
        Generator::A | Generator::APlus => lift(which),
        Generator::N => lift(Generator::APlus) * lift(Generator::A) * c(1.0 / table.hbar()),
        Generator::H => return Err(Error::UnsupportedKind { op: "coproduct_weyl", kind: "H" }),
    };
    Ok(TensorOperator { entries, dim: d })
}

/// `K(M)` for `M = Δ_W(N)` by functional calculus on each block of fixed
/// total number `t = i + j`, computed as `1 + Σ (K(λ) - 1) P_λ`. The result is
/// exact on blocks `t <= D - 1`, where the truncation keeps the whole block.
fn k_of_number(map: &EquivalenceMap, m: &DMatrix<Complex64>, d: usize) -> DMatrix<Complex64> {
    let k = map.k_values();
    let mut out = DMatrix::<Complex64>::identity(d * d, d * d);
    for t in 0..=2 * (d - 1) {
        let states: Vec<usize> =
            (0..d).filter(|&i| t >= i && t - i < d).map(|i| i * d + (t - i)).collect();
        let n = states.len();
        let block = DMatrix::<f64>::from_fn(n, n, |r, s| m[(states[r], states[s])].re);
        let eig = SymmetricEigen::new(block);
        let mut delta = DMatrix::<f64>::zeros(n, n);
        for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
            let level = (lambda.round().max(0.0) as usize).min(k.len() - 1);
            let w = k[level] - 1.0;
            if w == 0.0 {
                continue;
            }
            let v = eig.eigenvectors.column(idx);
            delta += v * v.transpose() * w;
        }
        for r in 0..n {
            for s in 0..n {
                out[(states[r], states[s])] += c(delta[(r, s)]);
            }
        }
    }
    out
}

/// Coproduct transported through the bosonisation `A = K(N) a`:
/// `Δ(N) = Δ_W(N)`, `Δ(A) = K(Δ_W N) Δ_W(a)`, `Δ(A⁺) = Δ_W(a⁺) K(Δ_W N)`.
pub fn coproduct_deformed(which: Generator, map: &EquivalenceMap) -> Result<TensorOperator> {
    let target = map.target();
    check_tensor_table(target)?;
    check_standard(target, "coproduct_deformed")?;
    if !map.invertible() {
        map.k_matrix()?;
    }
    let d = target.dim();
    let number = coproduct_weyl(Generator::N, target)?;
    let entries = match which {
        Generator::E | Generator::N => return coproduct_weyl(which, target),
        Generator::A => {
            k_of_number(map, number.entries(), d) * coproduct_weyl(Generator::A, target)?.entries
        }
        Generator::APlus => {
            coproduct_weyl(Generator::APlus, target)?.entries * k_of_number(map, number.entries(), d)
        }
        Generator::H => return Err(Error::UnsupportedKind { op: "coproduct_deformed", kind: "H" }),
    };
    Ok(TensorOperator { entries, dim: d })
}

/// `Δ(A⁺)ⁿ Δ(A)ᵐ` summed over an ASO element.
fn lift_aso(x: &AsoElement, ad: &TensorOperator, a: &TensorOperator) -> TensorOperator {
    let d = a.dim;
    let mut out = DMatrix::from_element(d * d, d * d, c(0.0));
    for (n, m, coeff) in x.terms() {
        let mut op = DMatrix::<Complex64>::identity(d * d, d * d);
        for _ in 0..n {
            op = &op * &ad.entries;
        }
        for _ in 0..m {
            op = &op * &a.entries;
        }
        out += op * coeff;
    }
    TensorOperator { entries: out, dim: d }
}

fn monomials_up_to(degree: usize) -> Vec<(usize, usize)> {
    (0..=degree).flat_map(|n| (0..=degree - n).map(move |m| (n, m))).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct HomomorphismReport {
    /// Total ladder degree of the word pairs checked.
    pub max_degree: usize,
    /// Columns `|i, j⟩` with `i + j <= window` are compared.
    pub window: usize,
    pub max_deviation: f64,
}

/// `Δ_W(x • y) = Δ_W(x) Δ_W(y)` on ASO monomial pairs of total degree
/// `<= max_degree`, with the bullet product from the pairing formula.
pub fn weyl_homomorphism_check(table: &Arc<LadderTable>, max_degree: usize) -> Result<HomomorphismReport> {
    let d = table.dim();
    let a = coproduct_weyl(Generator::A, table)?;
    let ad = coproduct_weyl(Generator::APlus, table)?;
    let window = (d - 1).saturating_sub(max_degree);
    let mut worst: f64 = 0.0;
    for &(n, m) in &monomials_up_to(max_degree) {
        for &(r, s) in &monomials_up_to(max_degree - n - m) {
            let x = AsoElement::monomial(table, n, m)?;
            let y = AsoElement::monomial(table, r, s)?;
            let lhs = lift_aso(&bullet_undeformed(&x, &y)?, &ad, &a);
            let rhs = lift_aso(&x, &ad, &a).mul(&lift_aso(&y, &ad, &a));
            worst = worst.max(lhs.column_deviation(&rhs, window));
        }
    }
    Ok(HomomorphismReport { max_degree, window, max_deviation: worst })
}

/// `Δ(x • y) = Δ(x) Δ(y)` for the transported coproduct, with the deformed
/// bullet product computed on a single-mode table of cap `2D + 2` so that
/// every coefficient reaching the compared columns is free of truncation.
pub fn deformed_homomorphism_check(map: &EquivalenceMap, max_degree: usize) -> Result<HomomorphismReport> {
    let d = map.target().dim();
    let wide_spec = map.source().spec().with_level_cap(2 * d + 2)?;
    let wide = Arc::new(build_ladder_table(&wide_spec));
    let coeffs = SigmaCoeffs::new(&wide);
    coeffs.check_invertible()?;
    let a = coproduct_deformed(Generator::A, map)?;
    let ad = coproduct_deformed(Generator::APlus, map)?;
    let window = (d - 1).saturating_sub(max_degree);
    let keep = 2 * (d - 1);
    let mut worst: f64 = 0.0;
    for &(n, m) in &monomials_up_to(max_degree) {
        for &(r, s) in &monomials_up_to(max_degree - n - m) {
            let x = AsoElement::monomial(&wide, n, m)?;
            let y = AsoElement::monomial(&wide, r, s)?;
            let prod = coeffs.bullet(&x, &y)?.restrict(keep);
            let lhs = lift_aso(&prod, &ad, &a);
            let rhs = lift_aso(&x, &ad, &a).mul(&lift_aso(&y, &ad, &a));
            worst = worst.max(lhs.column_deviation(&rhs, window));
        }
    }
    Ok(HomomorphismReport { max_degree, window, max_deviation: worst })
}
