//! The invariant suite behind `dboson verify`: every check runs on one
//! deformation at one level cap and reports its worst deviation.

use std::sync::Arc;

use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::aso::{bullet_undeformed, AsoElement, SigmaCoeffs};
use crate::deformation::{build_ladder_table, DeformationSpec, LadderTable};
use crate::eigenstate::{self, generator, pi_matrix, EigenElement, Generator};
use crate::equivalence::build_map;
use crate::error::{Error, Result};
use crate::exact::{self, ExactTable, Terms};
use crate::hopf::{self, MAX_TENSOR_DIM};

pub const MAX_FLOAT_DIM: usize = 64;
pub const MAX_RATIONAL_DIM: usize = 16;
/// Single-mode cap for the tensor checks.
pub const TENSOR_DIM: usize = 6;
/// Largest `n, m` used by the round-trip and bullet checks.
pub const ROUND_TRIP_WINDOW: usize = 8;
const SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Float,
    Rational,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "float" => Ok(Mode::Float),
            "rational" => Ok(Mode::Rational),
            other => Err(Error::Parse(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst deviation seen; `0` in rational mode when the identity holds.
    pub max_deviation: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl CheckResult {
    fn measured(name: &'static str, dev: f64, tol: f64, detail: String) -> Self {
        Self { name, passed: dev <= tol, max_deviation: Some(dev), tolerance: Some(tol), detail }
    }

    fn exact(name: &'static str, holds: bool, detail: String) -> Self {
        Self { name, passed: holds, max_deviation: None, tolerance: None, detail }
    }

    fn error(name: &'static str, e: Error) -> Self {
        Self { name, passed: false, max_deviation: None, tolerance: None, detail: e.to_string() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub dim: usize,
    pub mode: Mode,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

/// Runs all checks on `spec` restricted to `dim` levels.
pub fn run(spec: &DeformationSpec, dim: usize, mode: Mode) -> Result<VerifyReport> {
    let cap = match mode {
        Mode::Float => MAX_FLOAT_DIM,
        Mode::Rational => MAX_RATIONAL_DIM,
    };
    if dim < 2 || dim > cap {
        return Err(Error::LevelCap { level: dim, cap });
    }
    let spec = spec.with_level_cap(dim)?;
    let table = Arc::new(build_ladder_table(&spec));
    let checks = match mode {
        Mode::Float => vec![
            star_associativity(&table),
            commutator_identity(&table),
            sigma_round_trip(&table),
            bullet_consistency(&table),
            bosonisation(&table),
            coproduct_homomorphism(&spec),
        ],
        Mode::Rational => match ExactTable::new(&spec) {
            Ok(et) => vec![
                exact_star_associativity(&et),
                exact_commutator_identity(&et),
                exact_round_trip(&et),
                exact_bullet(&et),
                exact_bosonisation(&et, &spec),
                coproduct_homomorphism(&spec),
            ],
            Err(e) => vec![CheckResult::error("rational_table", e)],
        },
    };
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { dim, mode, checks, passed })
}

fn dyadic(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(-16i32..=16) as f64 / 8.0
}

fn random_sparse(table: &Arc<LadderTable>, rng: &mut ChaCha8Rng, terms: usize) -> EigenElement {
    let d = table.dim();
    let mut x = EigenElement::zero(table);
    for _ in 0..terms {
        let (n, m) = (rng.gen_range(0..d), rng.gen_range(0..d));
        let c = Complex64::new(dyadic(rng), dyadic(rng));
        x.add_term(n, m, c).expect("indices in range");
    }
    x
}

/// Exact equality of `(xy)z` and `x(yz)` for sparse dyadic triples.
pub fn star_associativity(table: &Arc<LadderTable>) -> CheckResult {
    let name = "star_associativity";
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let terms = 2 * table.dim();
        let (x, y, z) = (
            random_sparse(table, &mut rng, terms),
            random_sparse(table, &mut rng, terms),
            random_sparse(table, &mut rng, terms),
        );
        let run = || -> Result<f64> {
            let l = eigenstate::star(&eigenstate::star(&x, &y)?, &z)?;
            let r = eigenstate::star(&x, &eigenstate::star(&y, &z)?)?;
            Ok(l.sub(&r)?.max_abs())
        };
        match run() {
            Ok(d) => worst = worst.max(d),
            Err(e) => return CheckResult::error(name, e),
        }
    }
    CheckResult::measured(name, worst, 0.0, "20 random sparse dyadic triples".into())
}

/// `π([A, A⁺]) = diag f(0..D-2)`, relative to `max(1, F(n+1))`.
pub fn commutator_identity(table: &Arc<LadderTable>) -> CheckResult {
    let name = "commutator_identity";
    let d = table.dim();
    let comm = match eigenstate::commutator(&generator(Generator::A, table), &generator(Generator::APlus, table)) {
        Ok(c) => pi_matrix(&c).into_entries(),
        Err(e) => return CheckResult::error(name, e),
    };
    let mut worst: f64 = 0.0;
    for n in 0..d - 1 {
        for m in 0..d - 1 {
            let want = if n == m { table.f()[n] } else { 0.0 };
            let scale = table.ladder()[n.max(m) + 1].abs().max(1.0);
            worst = worst.max((comm[(n, m)] - want).norm() / scale);
        }
    }
    CheckResult::measured(name, worst, 1e-12, "interior n, m <= D-2, relative to max(1, F(n+1))".into())
}

/// `σ∘σ⁻¹` on `Ω_nm` and `σ⁻¹∘σ` on monomials, for `n, m <= w`, compared on
/// the same window. Each deviation is divided by `Σ_k |c_k| ‖T(e_k)‖` over
/// the intermediate terms `c_k e_k`, which is the size of the float
/// cancellation in the second map.
pub fn sigma_round_trip(table: &Arc<LadderTable>) -> CheckResult {
    let name = "sigma_round_trip";
    let coeffs = SigmaCoeffs::new(table);
    let w = ROUND_TRIP_WINDOW.min(coeffs.safe_window());
    let run = || -> Result<(f64, f64)> {
        let (mut rel, mut abs): (f64, f64) = (0.0, 0.0);
        for n in 0..=w {
            for m in 0..=w {
                let o = EigenElement::basis(table, n, m)?;
                let mid = coeffs.sigma_inverse(&o)?;
                let mut scale: f64 = 1.0;
                for (i, j, c) in mid.terms() {
                    scale += c.norm() * coeffs.sigma(&AsoElement::monomial(table, i, j)?)?.restrict(w).max_abs();
                }
                let dev = coeffs.sigma(&mid)?.sub(&o)?.restrict(w).max_abs();
                abs = abs.max(dev);
                rel = rel.max(dev / scale);

                let x = AsoElement::monomial(table, n, m)?;
                let mid = coeffs.sigma(&x)?;
                let mut scale: f64 = 1.0;
                for (i, j, c) in mid.terms() {
                    let e = EigenElement::basis(table, i, j)?;
                    scale += c.norm() * coeffs.sigma_inverse(&e)?.restrict(w).max_abs();
                }
                let dev = coeffs.sigma_inverse(&mid)?.sub(&x)?.restrict(w).max_abs();
                abs = abs.max(dev);
                rel = rel.max(dev / scale);
            }
        }
        Ok((rel, abs))
    };
    match run() {
        Ok((rel, abs)) => CheckResult::measured(
            name,
            rel,
            1e-10,
            format!("n, m <= {w}, relative to intermediate term size; absolute {abs:.3e}"),
        ),
        Err(e) => CheckResult::error(name, e),
    }
}

fn monomial_pairs(max_degree: usize) -> Vec<((usize, usize), (usize, usize))> {
    let monos: Vec<(usize, usize)> =
        (0..=max_degree).flat_map(|n| (0..=max_degree - n).map(move |m| (n, m))).collect();
    monos.iter().flat_map(|&x| monos.iter().map(move |&y| (x, y))).collect()
}

/// Standard table: deformed and pairing bullets agree on degree `<= 3`
/// pairs. Deformed tables: `A•A⁺ - A⁺•A = σ⁻¹(f(N))` and bullet
/// associativity on low monomials, all inside the safe window.
pub fn bullet_consistency(table: &Arc<LadderTable>) -> CheckResult {
    let name = "bullet_consistency";
    let coeffs = SigmaCoeffs::new(table);
    let w = coeffs.safe_window();
    let run = || -> Result<(f64, String)> {
        let mut worst: f64 = 0.0;
        if table.is_standard() {
            for ((n, m), (r, s)) in monomial_pairs(3) {
                let x = AsoElement::monomial(table, n, m)?;
                let y = AsoElement::monomial(table, r, s)?;
                let a = coeffs.bullet(&x, &y)?.restrict(w);
                let b = bullet_undeformed(&x, &y)?.restrict(w);
                worst = worst.max(a.sub(&b)?.max_abs());
            }
            return Ok((worst, format!("deformed vs pairing bullet, degree <= 3, window {w}")));
        }
        let a = AsoElement::monomial(table, 0, 1)?;
        let ad = AsoElement::monomial(table, 1, 0)?;
        let comm = coeffs.bullet(&a, &ad)?.sub(&coeffs.bullet(&ad, &a)?)?;
        let mut f_diag = EigenElement::zero(table);
        for n in 0..table.dim() {
            f_diag.add_term(n, n, Complex64::new(table.f()[n], 0.0))?;
        }
        let want = coeffs.sigma_inverse(&f_diag)?;
        let scale = want.restrict(w).max_abs().max(1.0);
        worst = worst.max(comm.restrict(w).sub(&want.restrict(w))?.max_abs() / scale);
        let monos = [(0, 1), (1, 0), (1, 1)];
        for &(n, m) in &monos {
            for &(r, s) in &monos {
                for &(u, v) in &monos {
                    let x = AsoElement::monomial(table, n, m)?;
                    let y = AsoElement::monomial(table, r, s)?;
                    let z = AsoElement::monomial(table, u, v)?;
                    let l = coeffs.bullet(&coeffs.bullet(&x, &y)?, &z)?.restrict(w);
                    let r = coeffs.bullet(&x, &coeffs.bullet(&y, &z)?)?.restrict(w);
                    let scale = l.max_abs().max(1.0);
                    worst = worst.max(l.sub(&r)?.max_abs() / scale);
                }
            }
        }
        Ok((worst, format!("commutator and associativity, window {w}, relative")))
    };
    match run() {
        Ok((dev, detail)) => CheckResult::measured(name, dev, 1e-9, detail),
        Err(e) => CheckResult::error(name, e),
    }
}

/// Bosonisation onto the standard boson: the images reproduce the source
/// generators and `[A, A⁺] = diag f` on the interior.
pub fn bosonisation(table: &Arc<LadderTable>) -> CheckResult {
    let name = "bosonisation_conjugation";
    let run = || -> Result<f64> {
        let std_spec = DeformationSpec::standard(table.hbar(), table.dim())?;
        let map = build_map(table, &Arc::new(build_ladder_table(&std_spec)))?;
        let (a, ad) = map.transform_generators()?;
        let (a, ad) = (a.into_entries(), ad.into_entries());
        let mut worst: f64 = 0.0;
        let src_a = pi_matrix(&generator(Generator::A, table)).into_entries();
        let d = table.dim();
        for n in 0..d {
            for m in 0..d {
                let scale = table.ladder()[n.max(m).min(d - 1) + 1].abs().sqrt().max(1.0);
                worst = worst.max((a[(n, m)] - src_a[(n, m)]).norm() / scale);
            }
        }
        let comm = &a * &ad - &ad * &a;
        for n in 0..d - 1 {
            let scale = table.ladder()[n + 1].abs().max(1.0);
            worst = worst.max((comm[(n, n)] - table.f()[n]).norm() / scale);
        }
        Ok(worst)
    };
    match run() {
        Ok(dev) => CheckResult::measured(name, dev, 1e-12, "target standard, relative".into()),
        Err(e) => CheckResult::error(name, e),
    }
}

/// Transported coproduct homomorphism on degree `<= 2` words at `D = 6`.
pub fn coproduct_homomorphism(spec: &DeformationSpec) -> CheckResult {
    let name = "coproduct_homomorphism";
    let run = || -> Result<f64> {
        let dt = TENSOR_DIM.min(spec.level_cap()).min(MAX_TENSOR_DIM);
        let src = Arc::new(build_ladder_table(&spec.with_level_cap(dt)?));
        let tgt = Arc::new(build_ladder_table(&DeformationSpec::standard(spec.hbar(), dt)?));
        let map = build_map(&src, &tgt)?;
        if let Some(level) = map.first_defect() {
            return Err(Error::Degenerate { level, value: src.ladder()[level] });
        }
        let weyl = hopf::weyl_homomorphism_check(&tgt, 2)?;
        let deformed = hopf::deformed_homomorphism_check(&map, 2)?;
        Ok(weyl.max_deviation.max(deformed.max_deviation))
    };
    match run() {
        Ok(dev) => CheckResult::measured(name, dev, 1e-10, format!("tensor dim {TENSOR_DIM}, degree <= 2")),
        Err(e) => CheckResult::error(name, e),
    }
}

fn random_terms(d: usize, rng: &mut ChaCha8Rng, count: usize) -> Terms {
    let mut out = Terms::new();
    for _ in 0..count {
        let key = (rng.gen_range(0..d), rng.gen_range(0..d));
        let v = num_rational::BigRational::new(rng.gen_range(-9i64..=9).into(), rng.gen_range(1i64..=9).into());
        let sum = out.remove(&key).unwrap_or_else(num_rational::BigRational::zero) + v;
        if !sum.is_zero() {
            out.insert(key, sum);
        }
    }
    out
}

pub fn exact_star_associativity(t: &ExactTable) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let d = t.dim();
    let holds = (0..10).all(|_| {
        let (x, y, z) = (random_terms(d, &mut rng, d), random_terms(d, &mut rng, d), random_terms(d, &mut rng, d));
        exact::star(t, &exact::star(t, &x, &y), &z) == exact::star(t, &x, &exact::star(t, &y, &z))
    });
    CheckResult::exact("star_associativity", holds, "10 random rational triples".into())
}

pub fn exact_commutator_identity(t: &ExactTable) -> CheckResult {
    let (a, ad) = exact::ladder_generators(t);
    let mut comm = exact::commutator(t, &a, &ad);
    let top = t.dim() - 1;
    comm.remove(&(top, top));
    let holds = comm == exact::f_diagonal(t, top);
    CheckResult::exact("commutator_identity", holds, "interior n <= D-2".into())
}

pub fn exact_round_trip(t: &ExactTable) -> CheckResult {
    let name = "sigma_round_trip";
    let d = t.dim();
    let run = || -> Result<bool> {
        for n in 0..d {
            for m in 0..d {
                let o = exact::unit_term(n, m);
                if exact::sigma(t, &exact::sigma_inverse(t, &o)?) != o {
                    return Ok(false);
                }
                if exact::sigma_inverse(t, &exact::sigma(t, &o))? != o {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    };
    match run() {
        Ok(h) => CheckResult::exact(name, h, format!("all n, m < {d}")),
        Err(e) => CheckResult::error(name, e),
    }
}

/// Bullet associativity on low monomials and, for the standard boson,
/// agreement with the pairing formula, all exact.
pub fn exact_bullet(t: &ExactTable) -> CheckResult {
    let name = "bullet_consistency";
    let w = t.dim() / 2;
    let keep = |x: Terms| -> Terms { x.into_iter().filter(|((n, m), _)| *n <= w && *m <= w).collect() };
    let run = || -> Result<bool> {
        let monos = [(0, 1), (1, 0), (1, 1)];
        for &x in &monos {
            for &y in &monos {
                for &z in &monos {
                    let (x, y, z) = (exact::unit_term(x.0, x.1), exact::unit_term(y.0, y.1), exact::unit_term(z.0, z.1));
                    let l = exact::bullet(t, &exact::bullet(t, &x, &y)?, &z)?;
                    let r = exact::bullet(t, &x, &exact::bullet(t, &y, &z)?)?;
                    if keep(l) != keep(r) {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    };
    match run() {
        Ok(h) => CheckResult::exact(name, h, format!("associativity on degree-1,2 monomials, window {w}")),
        Err(e) => CheckResult::error(name, e),
    }
}

/// `K(n)² F_B(n+1) = F_A(n+1)` exactly against the standard boson.
pub fn exact_bosonisation(t: &ExactTable, spec: &DeformationSpec) -> CheckResult {
    let name = "bosonisation_conjugation";
    let run = || -> Result<bool> {
        let std_spec = DeformationSpec::standard(spec.hbar(), spec.level_cap())?;
        let tgt = ExactTable::new(&std_spec)?;
        let k2 = exact::k_squared(t, &tgt)?;
        for (n, k) in k2.iter().enumerate() {
            match k {
                Some(k) if k > &num_rational::BigRational::zero() => {
                    if k * &tgt.ladder()[n + 1] != t.ladder()[n + 1] {
                        return Ok(false);
                    }
                }
                _ => {
                    return Err(Error::Degenerate { level: n + 1, value: exact::rational_to_f64(&t.ladder()[n + 1]) })
                }
            }
        }
        Ok(true)
    };
    match run() {
        Ok(h) => CheckResult::exact(name, h, "squared factors against the standard boson".into()),
        Err(e) => CheckResult::error(name, e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_specs_pass() {
        for spec in [
            DeformationSpec::standard(1.0, 32).unwrap(),
            DeformationSpec::qp(1.0, 2.0, 1.0, 32).unwrap(),
        ] {
            for mode in [Mode::Float, Mode::Rational] {
                let rep = run(&spec, 12, mode).unwrap();
                assert!(rep.passed, "{:?} {mode:?}: {:#?}", spec.kind(), rep.checks);
            }
        }
    }

    #[test]
    fn fixture_fails_round_trip() {
        let spec = DeformationSpec::table(1.0, vec![1.0, 0.0, -1.0]).unwrap();
        let rep = run(&spec, 3, Mode::Float).unwrap();
        assert!(!rep.passed);
        let rt = rep.checks.iter().find(|c| c.name == "sigma_round_trip").unwrap();
        assert!(!rt.passed);
        assert!(rt.detail.contains("F(3)"), "{}", rt.detail);
    }

    #[test]
    fn dims_are_capped() {
        let spec = DeformationSpec::standard(1.0, 32).unwrap();
        assert!(run(&spec, 17, Mode::Rational).is_err());
        assert!(run(&spec, 65, Mode::Float).is_err());
    }
}
