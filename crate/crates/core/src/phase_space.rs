//! Phase-space realisation: the left-right eigenstates `Ω_nm(q, p)` of the
//! standard oscillator, grid quadrature, and density evolution.
//!
//! Conventions: `a = (q + i p)/√2`, `a⁺ = (q - i p)/√2`, so that
//! `Ω_00 = 2 exp(-(q² + p²)/ħ)` and `(2πħ)⁻¹ ∬ conj(Ω_nm) Ω_n'm' = δ_nn' δ_mm'`.
//! Deformed states reuse these profiles with deformed coefficients and
//! spectra.

use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::deformation::LadderTable;
use crate::eigenstate::EigenElement;
use crate::error::{Error, Result};
use crate::numerics::{fmt17, laguerre, pairwise_sum};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Default grid half width in units of `√ħ`.
pub const DEFAULT_HALF_WIDTH_FACTOR: f64 = 8.0;
pub const DEFAULT_GRID_POINTS: usize = 512;

/// Uniform `M × M` grid on `[-L, L]²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseGrid {
    half_width: f64,
    points: usize,
}

impl PhaseGrid {
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!("half width must be positive, got {half_width}")));
        }
        if points < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points per axis, got {points}")));
        }
        Ok(Self { half_width, points })
    }

    /// `L = 8√ħ`, `M = 512`.
    pub fn default_for(hbar: f64) -> Self {
        Self { half_width: DEFAULT_HALF_WIDTH_FACTOR * hbar.sqrt(), points: DEFAULT_GRID_POINTS }
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.points {
            0.5
        } else {
            1.0
        }
    }
}

/// Samples on a [`PhaseGrid`], row-major with `q` along rows.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerField {
    samples: Vec<Complex64>,
    grid: PhaseGrid,
    hbar: f64,
}

impl WignerField {
    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// Sample at `(q_i, p_j)`.
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.samples[i * self.grid.points + j]
    }

    pub fn conj(&self) -> WignerField {
        WignerField { samples: self.samples.iter().map(|z| z.conj()).collect(), ..self.clone() }
    }

    fn check_compatible(&self, other: &WignerField) -> Result<()> {
        if self.grid != other.grid || self.hbar != other.hbar {
            return Err(Error::InvalidGrid("fields live on different grids or hbar".into()));
        }
        Ok(())
    }

    /// `Σ c_k field_k` over fields on a common grid.
    pub fn combine(parts: &[(Complex64, &WignerField)]) -> Result<WignerField> {
        let first = parts.first().ok_or_else(|| Error::InvalidGrid("no fields to combine".into()))?.1;
        let mut samples = vec![ZERO; first.samples.len()];
        for (c, f) in parts {
            first.check_compatible(f)?;
            for (s, v) in samples.iter_mut().zip(&f.samples) {
                *s += c * v;
            }
        }
        Ok(WignerField { samples, grid: first.grid, hbar: first.hbar })
    }

    /// CSV with header `q,p,re,im`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "q,p,re,im")?;
        let m = self.grid.points;
        for i in 0..m {
            for j in 0..m {
                let z = self.at(i, j);
                let (q, p) = (self.grid.coord(i), self.grid.coord(j));
                writeln!(out, "{},{},{},{}", fmt17(q), fmt17(p), fmt17(z.re), fmt17(z.im))?;
            }
        }
        Ok(())
    }
}

/// Closed form of `Ω_nm(q, p)`. With `α = (q + i p)/√(2ħ)` and `m >= n`,
/// `Ω_nm = 2 (-1)ⁿ √(n!/m!) (2α)^{m-n} e^{-2|α|²} L_n^{(m-n)}(4|α|²)`,
/// and `Ω_nm = conj(Ω_mn)` for `n > m`.
pub fn omega_at(n: usize, m: usize, q: f64, p: f64, hbar: f64) -> Complex64 {
    if n > m {
        return omega_at(m, n, q, p, hbar).conj();
    }
    let alpha = Complex64::new(q, p) / (2.0 * hbar).sqrt();
    let r2 = alpha.norm_sqr();
    let k = m - n;
    let ratio: f64 = (n + 1..=m).map(|j| 1.0 / j as f64).product();
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let radial = 2.0 * sign * ratio.sqrt() * (-2.0 * r2).exp() * laguerre(n, k as f64, 4.0 * r2);
    (alpha * 2.0).powi(k as i32) * radial
}

/// Samples `Ω_nm` on the grid; rows are evaluated in parallel, each sample
/// independently, so the result does not depend on scheduling.
pub fn eval_omega(n: usize, m: usize, grid: &PhaseGrid, hbar: f64) -> WignerField {
    let pts = grid.points;
    let samples: Vec<Complex64> = (0..pts)
        .into_par_iter()
        .flat_map_iter(|i| {
            let q = grid.coord(i);
            (0..pts).map(move |j| omega_at(n, m, q, grid.coord(j), hbar))
        })
        .collect();
    WignerField { samples, grid: *grid, hbar }
}

/// Trapezoidal `(2πħ)⁻¹ ∬ conj(x) y dq dp`, summed pairwise row by row.
pub fn quadrature_ip(x: &WignerField, y: &WignerField) -> Result<Complex64> {
    x.check_compatible(y)?;
    let g = &x.grid;
    let pts = g.points;
    let rows: Vec<Complex64> = (0..pts)
        .into_par_iter()
        .map(|i| {
            let terms: Vec<Complex64> =
                (0..pts).map(|j| x.at(i, j).conj() * y.at(i, j) * g.weight(j)).collect();
            pairwise_sum(&terms) * g.weight(i)
        })
        .collect();
    let h = g.spacing();
    Ok(pairwise_sum(&rows) * (h * h / (2.0 * std::f64::consts::PI * x.hbar)))
}

/// Field of an eigenstate-basis element, `Σ c_nm Ω_nm`.
pub fn element_field(x: &EigenElement, grid: &PhaseGrid) -> WignerField {
    let hbar = x.table().hbar();
    let fields: Vec<(Complex64, WignerField)> =
        x.terms().map(|(n, m, c)| (c, eval_omega(n, m, grid, hbar))).collect();
    if fields.is_empty() {
        return WignerField { samples: vec![ZERO; grid.points * grid.points], grid: *grid, hbar };
    }
    let parts: Vec<(Complex64, &WignerField)> = fields.iter().map(|(c, f)| (*c, f)).collect();
    WignerField::combine(&parts).expect("fields share the grid")
}

/// `ρ = Σ c_nm Ω_nm` with `c` Hermitian and of unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySpec {
    c: DMatrix<Complex64>,
    table: Arc<LadderTable>,
}

const DENSITY_TOL: f64 = 1e-12;

impl DensitySpec {
    pub fn new(c: DMatrix<Complex64>, table: &Arc<LadderTable>) -> Result<Self> {
        let d = table.dim();
        if c.shape() != (d, d) {
            return Err(Error::InvalidDensity(format!(
                "coefficient matrix is {:?}, expected {d}x{d}",
                c.shape()
            )));
        }
        let scale = c.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for n in 0..d {
            for m in 0..=n {
                if (c[(n, m)] - c[(m, n)].conj()).norm() > DENSITY_TOL * scale {
                    return Err(Error::InvalidDensity(format!("not Hermitian at ({n}, {m})")));
                }
            }
        }
        let tr = c.trace();
        if (tr - 1.0).norm() > DENSITY_TOL * scale {
            return Err(Error::InvalidDensity(format!("trace is {tr}, expected 1")));
        }
        Ok(Self { c, table: table.clone() })
    }

    pub fn from_element(x: &EigenElement) -> Result<Self> {
        let c = crate::eigenstate::pi_matrix(x).into_entries();
        Self::new(c, x.table())
    }

    /// `ω ∗ conj(ω)` normalised to unit trace, with `ω` drawn from `rng`.
    pub fn random<R: rand::Rng>(table: &Arc<LadderTable>, rng: &mut R) -> Self {
        let d = table.dim();
        let w = DMatrix::from_fn(d, d, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let mut c = &w * w.adjoint();
        let tr = c.trace().re;
        c /= Complex64::new(tr, 0.0);
        // symmetrise the rounding so the stored matrix is exactly Hermitian
        for n in 0..d {
            c[(n, n)].im = 0.0;
            for m in 0..n {
                c[(n, m)] = c[(m, n)].conj();
            }
        }
        Self { c, table: table.clone() }
    }

    pub fn coeffs(&self) -> &DMatrix<Complex64> {
        &self.c
    }

    pub fn table(&self) -> &Arc<LadderTable> {
        &self.table
    }

    pub fn trace(&self) -> Complex64 {
        self.c.trace()
    }

    /// `Σ |c_nm|²`.
    pub fn purity(&self) -> f64 {
        self.c.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn to_element(&self) -> EigenElement {
        crate::eigenstate::OperatorMatrix::new(self.c.clone())
            .to_element(&self.table)
            .expect("dims agree")
    }
}

/// `c_nm(t) = c_nm(0) e^{i t ω_nm}` with `ω_nm = E(m) - E(n)`.
pub fn evolve_density(rho0: &DensitySpec, t: f64) -> DensitySpec {
    let d = rho0.table.dim();
    let e = rho0.table.spectrum();
    let mut c = rho0.c.clone();
    for n in 0..d {
        for m in n + 1..d {
            let phase = Complex64::from_polar(1.0, t * (e[m] - e[n]));
            c[(n, m)] = rho0.c[(n, m)] * phase;
            c[(m, n)] = c[(n, m)].conj();
        }
    }
    DensitySpec { c, table: rho0.table.clone() }
}

/// `⟨O⟩ = Σ O_mn c_nm`.
pub fn expectation(obs: &EigenElement, rho: &DensitySpec) -> Result<Complex64> {
    if obs.dim() != rho.table.dim() {
        return Err(Error::Incompatible(format!("observable dim {} vs density dim {}", obs.dim(), rho.table.dim())));
    }
    let terms: Vec<Complex64> = obs.terms().map(|(m, n, o)| o * rho.c[(n, m)]).collect();
    Ok(pairwise_sum(&terms))
}

/// Largest level count accepted by [`expectation_quadrature`].
pub const QUADRATURE_MAX_DIM: usize = 6;

/// `(2πħ)⁻¹ ∬ O ρ` on the grid, as a cross-check of [`expectation`].
pub fn expectation_quadrature(obs: &EigenElement, rho: &DensitySpec, grid: &PhaseGrid) -> Result<Complex64> {
    let d = rho.table.dim();
    if d > QUADRATURE_MAX_DIM {
        return Err(Error::LevelCap { level: d, cap: QUADRATURE_MAX_DIM });
    }
    if obs.dim() != d {
        return Err(Error::Incompatible(format!("observable dim {} vs density dim {d}", obs.dim())));
    }
    let o = element_field(obs, grid);
    let r = element_field(&rho.to_element(), grid);
    quadrature_ip(&o.conj(), &r)
}

/// Observables tracked along an evolution.
#[derive(Debug, Clone, Serialize)]
pub struct EvolutionStep {
    pub t: f64,
    pub trace: f64,
    pub number: f64,
    pub energy: f64,
    pub purity: f64,
}

/// Evolves `rho0` on `steps + 1` equally spaced times in `[t0, t1]`.
pub fn evolve_trace(rho0: &DensitySpec, t0: f64, t1: f64, steps: usize) -> Result<Vec<(EvolutionStep, DensitySpec)>> {
    if steps == 0 || !(t0.is_finite() && t1.is_finite()) {
        return Err(Error::InvalidSpec("need finite times and at least one step".into()));
    }
    let table = &rho0.table;
    let n_op = crate::eigenstate::generator(crate::eigenstate::Generator::N, table);
    let h_op = crate::eigenstate::generator(crate::eigenstate::Generator::H, table);
    let dt = (t1 - t0) / steps as f64;
    (0..=steps)
        .map(|k| {
            let t = t0 + k as f64 * dt;
            let rho = evolve_density(rho0, t);
            let step = EvolutionStep {
                t,
                trace: rho.trace().re,
                number: expectation(&n_op, &rho)?.re,
                energy: expectation(&h_op, &rho)?.re,
                purity: rho.purity(),
            };
            Ok((step, rho))
        })
        .collect()
}

/// CSV `t,n,m,re,im` of every coefficient at every step.
pub fn write_coefficients_csv<W: Write>(trace: &[(EvolutionStep, DensitySpec)], mut out: W) -> std::io::Result<()> {
    writeln!(out, "t,n,m,re,im")?;
    for (step, rho) in trace {
        let d = rho.c.nrows();
        for n in 0..d {
            for m in 0..d {
                let z = rho.c[(n, m)];
                writeln!(out, "{},{n},{m},{},{}", fmt17(step.t), fmt17(z.re), fmt17(z.im))?;
            }
        }
    }
    Ok(())
}

/// CSV `t,observable,value` with the trace, `⟨N⟩`, `⟨H⟩` and purity.
pub fn write_observables_csv<W: Write>(trace: &[(EvolutionStep, DensitySpec)], mut out: W) -> std::io::Result<()> {
    writeln!(out, "t,observable,value")?;
    for (s, _) in trace {
        for (name, v) in [("trace", s.trace), ("N", s.number), ("H", s.energy), ("purity", s.purity)] {
            writeln!(out, "{},{name},{}", fmt17(s.t), fmt17(v))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deformation::{build_ladder_table, DeformationSpec};
    use crate::eigenstate::{generator, Generator};
    use rand::SeedableRng;

    // Normalised Hermite functions ψ_n(x) for ħ, by the stable recurrence.
    fn hermite_functions(nmax: usize, x: f64, hbar: f64) -> Vec<f64> {
        let xi = x / hbar.sqrt();
        let mut out = vec![std::f64::consts::PI.powf(-0.25) * (-0.5 * xi * xi).exp()];
        if nmax > 0 {
            out.push(2f64.sqrt() * xi * out[0]);
        }
        for n in 1..nmax {
            let k = n as f64;
            let next = (2.0 / (k + 1.0)).sqrt() * xi * out[n] - (k / (k + 1.0)).sqrt() * out[n - 1];
            out.push(next);
        }
        out.iter().map(|v| v * hbar.powf(-0.25)).collect()
    }

    // Ω_nm = 2 ∫ ψ_n(q+y) ψ_m(q-y) e^{-2ipy/ħ} dy by trapezoid on a wide grid.
    fn omega_oracle(n: usize, m: usize, q: f64, p: f64, hbar: f64) -> Complex64 {
        let half = 12.0 * hbar.sqrt() + q.abs();
        let steps = 4000;
        let h = 2.0 * half / steps as f64;
        let mut acc = ZERO;
        for k in 0..=steps {
            let y = -half + k as f64 * h;
            let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
            let a = hermite_functions(n.max(m), q + y, hbar)[n];
            let b = hermite_functions(n.max(m), q - y, hbar)[m];
            acc += Complex64::from_polar(w * a * b, -2.0 * p * y / hbar);
        }
        acc * (2.0 * h)
    }

    #[test]
    fn closed_form_matches_oracle() {
        let pts = [(0.0, 0.0), (0.7, -0.3), (-1.2, 0.9), (2.1, 1.4)];
        for hbar in [1.0, 0.5] {
            for n in 0..=8 {
                for m in 0..=8 {
                    for &(q, p) in &pts {
                        let got = omega_at(n, m, q, p, hbar);
                        let want = omega_oracle(n, m, q, p, hbar);
                        assert!((got - want).norm() < 1e-10, "n={n} m={m} q={q} p={p}: {got} vs {want}");
                    }
                }
            }
        }
    }

    #[test]
    fn vacuum_and_parity() {
        assert_eq!(omega_at(0, 0, 0.0, 0.0, 1.0), Complex64::new(2.0, 0.0));
        let v = omega_at(0, 1, 0.4, -0.8, 1.0);
        let w = omega_at(0, 1, -0.4, 0.8, 1.0);
        assert!((v + w).norm() < 1e-15);
    }

    #[test]
    fn quadrature_examples() {
        let hbar = 1.0;
        let grid = PhaseGrid::default_for(hbar);
        let o00 = eval_omega(0, 0, &grid, hbar);
        assert!((quadrature_ip(&o00, &o00).unwrap() - 1.0).norm() < 1e-8);
        // normalisation of the bare integral: conj(1) · Ω_00
        let ones = WignerField { samples: vec![Complex64::new(1.0, 0.0); 512 * 512], grid, hbar };
        assert!((quadrature_ip(&ones, &o00).unwrap() - 1.0).norm() < 1e-8);
        let o01 = eval_omega(0, 1, &grid, hbar);
        let o10 = eval_omega(1, 0, &grid, hbar);
        assert!(quadrature_ip(&o01, &o10).unwrap().norm() < 1e-8);
        let o23 = eval_omega(2, 3, &grid, hbar);
        assert!((quadrature_ip(&o23, &o23).unwrap() - 1.0).norm() < 1e-6);
    }

    #[test]
    fn deterministic_fields() {
        let grid = PhaseGrid::new(4.0, 65).unwrap();
        assert_eq!(eval_omega(2, 1, &grid, 0.7), eval_omega(2, 1, &grid, 0.7));
        assert!(PhaseGrid::new(0.0, 10).is_err());
        assert!(PhaseGrid::new(1.0, 1).is_err());
    }

    fn table(spec: DeformationSpec) -> Arc<LadderTable> {
        Arc::new(build_ladder_table(&spec))
    }

    #[test]
    fn evolution_examples() {
        let st = table(DeformationSpec::standard(1.0, 4).unwrap());
        let mut c = DMatrix::from_element(4, 4, ZERO);
        c[(0, 0)] = Complex64::new(0.5, 0.0);
        c[(1, 1)] = Complex64::new(0.5, 0.0);
        let diag = DensitySpec::new(c.clone(), &st).unwrap();
        assert_eq!(evolve_density(&diag, 3.7), diag);

        c[(0, 1)] = Complex64::new(0.25, 0.0);
        c[(1, 0)] = Complex64::new(0.25, 0.0);
        let rho = DensitySpec::new(c.clone(), &st).unwrap();
        let t = 0.9;
        let got = evolve_density(&rho, t).coeffs()[(0, 1)];
        assert!((got - Complex64::from_polar(0.25, t)).norm() < 1e-15);

        let qp = table(DeformationSpec::qp(1.0, 2.0, 1.0, 4).unwrap());
        let rho = DensitySpec::new(c, &qp).unwrap();
        let got = evolve_density(&rho, t).coeffs()[(0, 1)];
        assert!((got - Complex64::from_polar(0.25, 1.5 * t)).norm() < 1e-15);
    }

    #[test]
    fn density_validation() {
        let st = table(DeformationSpec::standard(1.0, 3).unwrap());
        let mut c = DMatrix::from_element(3, 3, ZERO);
        c[(0, 0)] = Complex64::new(1.0, 0.0);
        c[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(matches!(DensitySpec::new(c.clone(), &st), Err(Error::InvalidDensity(_))));
        c[(0, 1)] = ZERO;
        c[(0, 0)] = Complex64::new(0.5, 0.0);
        assert!(matches!(DensitySpec::new(c, &st), Err(Error::InvalidDensity(_))));
    }

    #[test]
    fn expectations() {
        let st = table(DeformationSpec::standard(1.0, 4).unwrap());
        let rho = DensitySpec::from_element(&EigenElement::basis(&st, 1, 1).unwrap()).unwrap();
        let h = generator(Generator::H, &st);
        assert_eq!(expectation(&h, &rho).unwrap(), Complex64::new(1.5, 0.0));
        let one = EigenElement::identity(&st);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let r = DensitySpec::random(&st, &mut rng);
        assert!((expectation(&one, &r).unwrap() - 1.0).norm() < 1e-14);
        let grid = PhaseGrid::new(8.0, 256).unwrap();
        let quad = expectation_quadrature(&h, &r, &grid).unwrap();
        assert!((quad - expectation(&h, &r).unwrap()).norm() < 1e-8);
    }

    #[test]
    fn conservation_along_trace() {
        let qp = table(DeformationSpec::qp(1.0, 2.0, 1.0, 8).unwrap());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let rho = DensitySpec::random(&qp, &mut rng);
        let trace = evolve_trace(&rho, 0.0, 100.0, 1000).unwrap();
        let first = &trace[0].0;
        for (s, r) in &trace {
            assert!((s.energy - first.energy).abs() < 1e-12);
            assert!((s.number - first.number).abs() < 1e-12);
            assert!((s.purity - first.purity).abs() < 1e-12);
            assert_eq!(r.coeffs(), &r.coeffs().adjoint());
        }
    }
}
