//! Exact rational arithmetic for the σ transforms and the star product.
//!
//! Work happens in the unnormalised basis `Ω̃_nm = √(F!(n) F!(m)) Ω_nm`, in
//! which every coefficient of interest is rational:
//!
//! * `σ(A⁺ⁿAᵐ) = Σ_i Ω̃_{n+i,m+i} / F!(i)`,
//! * `Ω̃_nm ∗ Ω̃_n'm' = δ_mn' F!(m) Ω̃_nm'`,
//! * `A = Σ Ω̃_{n,n+1} / F!(n)` and `A⁺ = Σ Ω̃_{n+1,n} / F!(n)`.
//!
//! Floating-point parameters are read through their shortest decimal form,
//! so `0.1` becomes exactly `1/10`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};

use crate::deformation::{DeformationKind, DeformationSpec};
use crate::error::{Error, Result};

/// Exact rational value of the shortest decimal representation of `x`.
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    if !x.is_finite() {
        return Err(Error::NonFinite(format!("{x}")));
    }
    let text = format!("{x}");
    let (neg, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.as_str()),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    let num: BigInt = format!("{int_part}{frac_part}")
        .parse()
        .map_err(|_| Error::Parse(format!("cannot read `{text}` as a decimal")))?;
    let den = BigInt::from(10u32).pow(frac_part.len() as u32);
    let r = BigRational::new(num, den);
    Ok(if neg { -r } else { r })
}

/// Rational ladder data `f`, `F`, `F!` up to the level cap.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactTable {
    f: Vec<BigRational>,
    ladder: Vec<BigRational>,
    ladder_fact: Vec<BigRational>,
}

impl ExactTable {
    pub fn new(spec: &DeformationSpec) -> Result<Self> {
        let d = spec.level_cap();
        let hbar = rational_from_f64(spec.hbar())?;
        let ladder: Vec<BigRational> = match spec.kind() {
            DeformationKind::Standard => {
                (0..=d).map(|n| &hbar * BigRational::from_integer(n.into())).collect()
            }
            DeformationKind::QSymmetric { q } => {
                let q = rational_from_f64(*q)?;
                let qi = q.recip();
                let den = &q - &qi;
                (0..=d)
                    .map(|n| {
                        let e = n as i32;
                        &hbar * (q.clone().pow(e) - qi.clone().pow(e)) / &den
                    })
                    .collect()
            }
            DeformationKind::Qp { q, p } => {
                let q = rational_from_f64(*q)?;
                let p = rational_from_f64(*p)?;
                let den = &q - &p;
                (0..=d)
                    .map(|n| {
                        let e = n as i32;
                        &hbar * (q.clone().pow(e) - p.clone().pow(e)) / &den
                    })
                    .collect()
            }
            DeformationKind::Series { coeffs } => {
                let cs = coeffs.iter().map(|&c| rational_from_f64(c)).collect::<Result<Vec<_>>>()?;
                let mut acc = vec![BigRational::zero()];
                for n in 0..d {
                    let x = BigRational::from_integer(n.into());
                    let f = cs.iter().rev().fold(BigRational::zero(), |a, c| a * &x + c);
                    let next = &acc[n] + f;
                    acc.push(next);
                }
                acc
            }
            DeformationKind::Table { values } => {
                let mut acc = vec![BigRational::zero()];
                for n in 0..d {
                    let next = &acc[n] + rational_from_f64(values[n])?;
                    acc.push(next);
                }
                acc
            }
        };
        let f = (0..d).map(|n| &ladder[n + 1] - &ladder[n]).collect();
        let mut ladder_fact = vec![BigRational::one()];
        for n in 1..=d {
            let next = &ladder_fact[n - 1] * &ladder[n];
            ladder_fact.push(next);
        }
        Ok(Self { f, ladder, ladder_fact })
    }

    pub fn dim(&self) -> usize {
        self.f.len()
    }

    pub fn f(&self) -> &[BigRational] {
        &self.f
    }

    pub fn ladder(&self) -> &[BigRational] {
        &self.ladder
    }

    pub fn ladder_fact(&self) -> &[BigRational] {
        &self.ladder_fact
    }

    pub fn check_invertible(&self) -> Result<()> {
        for j in 1..self.ladder.len() {
            if !self.ladder[j].is_positive() {
                let value = rational_to_f64(&self.ladder[j]);
                return Err(Error::Degenerate { level: j, value });
            }
        }
        Ok(())
    }

    /// `D̃(k)`: the inverse coefficients in the unnormalised basis, which do
    /// not depend on `(n, m)`. `D̃(0) = 1`, `D̃(k) = -Σ_{i<k} D̃(i) / F!(k-i)`.
    pub fn d_tilde(&self) -> Result<Vec<BigRational>> {
        self.check_invertible()?;
        let d = self.dim();
        let mut out: Vec<BigRational> = vec![BigRational::one()];
        for k in 1..d {
            let s = (0..k).fold(BigRational::zero(), |acc, i| acc + &out[i] / &self.ladder_fact[k - i]);
            out.push(-s);
        }
        Ok(out)
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Sparse rational element; the meaning of the indices (monomial or
/// unnormalised eigenstate) is fixed by the function that produced it.
pub type Terms = BTreeMap<(usize, usize), BigRational>;

fn accumulate(out: &mut Terms, key: (usize, usize), v: BigRational) {
    if v.is_zero() {
        return;
    }
    let entry = out.entry(key).or_insert_with(BigRational::zero);
    *entry += v;
    if entry.is_zero() {
        out.remove(&key);
    }
}

pub fn add(x: &Terms, y: &Terms) -> Terms {
    let mut out = x.clone();
    for (&k, v) in y {
        accumulate(&mut out, k, v.clone());
    }
    out
}

pub fn sub(x: &Terms, y: &Terms) -> Terms {
    let mut out = x.clone();
    for (&k, v) in y {
        accumulate(&mut out, k, -v.clone());
    }
    out
}

/// `Ω̃_nm`, or the monomial `A⁺ⁿAᵐ`.
pub fn unit_term(n: usize, m: usize) -> Terms {
    Terms::from([((n, m), BigRational::one())])
}

/// `σ` from monomials to the unnormalised eigenstate basis.
pub fn sigma(table: &ExactTable, x: &Terms) -> Terms {
    let d = table.dim();
    let mut out = Terms::new();
    for (&(n, m), c) in x {
        for i in 0..d.saturating_sub(n.max(m)) {
            accumulate(&mut out, (n + i, m + i), c / &table.ladder_fact[i]);
        }
    }
    out
}

/// `σ⁻¹` from the unnormalised eigenstate basis to monomials.
pub fn sigma_inverse(table: &ExactTable, x: &Terms) -> Result<Terms> {
    let dt = table.d_tilde()?;
    let d = table.dim();
    let mut out = Terms::new();
    for (&(n, m), c) in x {
        for (k, dk) in dt.iter().enumerate().take(d.saturating_sub(n.max(m))) {
            accumulate(&mut out, (n + k, m + k), c * dk);
        }
    }
    Ok(out)
}

/// Star product in the unnormalised basis.
pub fn star(table: &ExactTable, x: &Terms, y: &Terms) -> Terms {
    let mut out = Terms::new();
    for (&(n, m), a) in x {
        for (&(m2, k), b) in y.range((m, 0)..(m + 1, 0)) {
            debug_assert_eq!(m, m2);
            accumulate(&mut out, (n, k), a * b * &table.ladder_fact[m]);
        }
    }
    out
}

pub fn commutator(table: &ExactTable, x: &Terms, y: &Terms) -> Terms {
    sub(&star(table, x, y), &star(table, y, x))
}

/// `x • y = σ⁻¹(σ(x) ∗ σ(y))` on monomials.
pub fn bullet(table: &ExactTable, x: &Terms, y: &Terms) -> Result<Terms> {
    sigma_inverse(table, &star(table, &sigma(table, x), &sigma(table, y)))
}

/// Generator images `A` and `A⁺` in the unnormalised basis.
pub fn ladder_generators(table: &ExactTable) -> (Terms, Terms) {
    let d = table.dim();
    let mut a = Terms::new();
    let mut ad = Terms::new();
    for n in 0..d - 1 {
        let w = table.ladder_fact[n].recip();
        accumulate(&mut a, (n, n + 1), w.clone());
        accumulate(&mut ad, (n + 1, n), w);
    }
    (a, ad)
}

/// `f(N) = Σ f(n) Ω_nn` in the unnormalised basis, for `n < len`.
pub fn f_diagonal(table: &ExactTable, len: usize) -> Terms {
    let mut out = Terms::new();
    for n in 0..len {
        accumulate(&mut out, (n, n), &table.f[n] / &table.ladder_fact[n]);
    }
    out
}

/// Exact squared equivalence factors `K(n)² = F_A(n+1) / F_B(n+1)`.
pub fn k_squared(src: &ExactTable, tgt: &ExactTable) -> Result<Vec<Option<BigRational>>> {
    if src.dim() != tgt.dim() {
        return Err(Error::Incompatible(format!("dimension {} vs {}", src.dim(), tgt.dim())));
    }
    Ok((0..src.dim())
        .map(|n| {
            let b = &tgt.ladder[n + 1];
            (!b.is_zero()).then(|| &src.ladder[n + 1] / b)
        })
        .collect())
}
