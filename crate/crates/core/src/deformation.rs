//! Deformation functions `f` on Fock levels and the derived ladder tables.
//!
//! Deformations are stored in commutator form `[A, A+] = f(N)`. The ladder
//! function is `F(n) = f(0) + ... + f(n-1)` with `F(0) = 0`, its running
//! product is `F!(n)` with `F!(0) = 1`, and the oscillator spectrum is
//! `E(n) = (F(n+1) + F(n)) / 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_LEVEL_CAP: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub enum DeformationKind {
    /// `f(n) = hbar`.
    Standard,
    /// Symmetric q-bracket ladder `F(n) = hbar (q^n - q^-n) / (q - q^-1)`.
    QSymmetric { q: f64 },
    /// `F(n) = hbar (q^n - p^n) / (q - p)`.
    Qp { q: f64, p: f64 },
    /// `f(n) = c0 + c1 n + ... + cK n^K`.
    Series { coeffs: Vec<f64> },
    /// Explicit values `f(0), f(1), ...`.
    Table { values: Vec<f64> },
}

impl DeformationKind {
    pub fn name(&self) -> &'static str {
        match self {
            DeformationKind::Standard => "standard",
            DeformationKind::QSymmetric { .. } => "q",
            DeformationKind::Qp { .. } => "qp",
            DeformationKind::Series { .. } => "series",
            DeformationKind::Table { .. } => "table",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeformationSpec {
    hbar: f64,
    kind: DeformationKind,
    level_cap: usize,
}

impl DeformationSpec {
    pub fn new(hbar: f64, kind: DeformationKind, level_cap: usize) -> Result<Self> {
        let spec = Self { hbar, kind, level_cap };
        spec.validate()?;
        Ok(spec)
    }

    pub fn standard(hbar: f64, level_cap: usize) -> Result<Self> {
        Self::new(hbar, DeformationKind::Standard, level_cap)
    }

    pub fn q_symmetric(hbar: f64, q: f64, level_cap: usize) -> Result<Self> {
        Self::new(hbar, DeformationKind::QSymmetric { q }, level_cap)
    }

    pub fn qp(hbar: f64, q: f64, p: f64, level_cap: usize) -> Result<Self> {
        Self::new(hbar, DeformationKind::Qp { q, p }, level_cap)
    }

    pub fn series(hbar: f64, coeffs: Vec<f64>, level_cap: usize) -> Result<Self> {
        Self::new(hbar, DeformationKind::Series { coeffs }, level_cap)
    }

    /// Table spec whose level cap is the number of supplied values.
    pub fn table(hbar: f64, values: Vec<f64>) -> Result<Self> {
        let cap = values.len();
        Self::new(hbar, DeformationKind::Table { values }, cap)
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn kind(&self) -> &DeformationKind {
        &self.kind
    }

    pub fn level_cap(&self) -> usize {
        self.level_cap
    }

    /// Same deformation with a different level cap.
    pub fn with_level_cap(&self, level_cap: usize) -> Result<Self> {
        Self::new(self.hbar, self.kind.clone(), level_cap)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if !(self.hbar.is_finite() && self.hbar > 0.0) {
            return bad(format!("hbar must be positive and finite, got {}", self.hbar));
        }
        if self.level_cap == 0 {
            return bad("level_cap must be positive".into());
        }
        match &self.kind {
            DeformationKind::Standard => {}
            DeformationKind::QSymmetric { q } => {
                if !(q.is_finite() && *q > 0.0) || *q == 1.0 {
                    return bad(format!("q must be positive and different from 1, got {q}"));
                }
            }
            DeformationKind::Qp { q, p } => {
                if !(q.is_finite() && p.is_finite() && *q > 0.0 && *p > 0.0) || q == p {
                    return bad(format!("q, p must be positive and distinct, got {q}, {p}"));
                }
            }
            DeformationKind::Series { coeffs } => {
                if coeffs.is_empty() {
                    return bad("series needs at least one coefficient".into());
                }
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return bad("series coefficients must be finite".into());
                }
            }
            DeformationKind::Table { values } => {
                if values.len() < self.level_cap {
                    return bad(format!(
                        "table has {} values but level_cap is {}",
                        values.len(),
                        self.level_cap
                    ));
                }
                if values.iter().any(|c| !c.is_finite()) {
                    return bad("table values must be finite".into());
                }
            }
        }
        for n in 0..self.level_cap {
            let v = self.f_unchecked(n);
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("f({n}) = {v}")));
            }
        }
        Ok(())
    }

    /// Closed-form ladder function for the preset kinds.
    fn closed_ladder(&self, n: usize) -> Option<f64> {
        let h = self.hbar;
        match &self.kind {
            DeformationKind::Standard => Some(h * n as f64),
            DeformationKind::QSymmetric { q } => {
                let nn = n as i32;
                Some(h * (q.powi(nn) - q.powi(-nn)) / (q - 1.0 / q))
            }
            DeformationKind::Qp { q, p } => {
                let nn = n as i32;
                Some(h * (q.powi(nn) - p.powi(nn)) / (q - p))
            }
            _ => None,
        }
    }

    fn f_unchecked(&self, n: usize) -> f64 {
        match &self.kind {
            DeformationKind::Standard => self.hbar,
            DeformationKind::Series { coeffs } => {
                let x = n as f64;
                coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
            }
            DeformationKind::Table { values } => values[n],
            _ => self.closed_ladder(n + 1).unwrap() - self.closed_ladder(n).unwrap(),
        }
    }

    /// Parse the JSON spec document.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawSpec = serde_json::from_str(text)?;
        raw.into_spec()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&RawSpec::from_spec(self)).expect("spec serialises")
    }
}

/// Wire form: `{"hbar": 1.0, "kind": "series", "coeffs": [..], "level_cap": 32}`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    #[serde(default = "one")]
    hbar: f64,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    level_cap: Option<usize>,
}

fn one() -> f64 {
    1.0
}

impl RawSpec {
    fn into_spec(self) -> Result<DeformationSpec> {
        let allowed: &[&str] = match self.kind.as_str() {
            "standard" => &[],
            "q" => &["q"],
            "qp" => &["q", "p"],
            "series" => &["coeffs"],
            "table" => &["values"],
            other => return Err(Error::InvalidSpec(format!("unknown kind `{other}`"))),
        };
        let present = [
            ("q", self.q.is_some()),
            ("p", self.p.is_some()),
            ("coeffs", self.coeffs.is_some()),
            ("values", self.values.is_some()),
        ];
        for (name, is_set) in present {
            if is_set && !allowed.contains(&name) {
                return Err(Error::InvalidSpec(format!(
                    "field `{name}` is not valid for kind `{}`",
                    self.kind
                )));
            }
            if !is_set && allowed.contains(&name) {
                return Err(Error::InvalidSpec(format!(
                    "kind `{}` requires field `{name}`",
                    self.kind
                )));
            }
        }
        let kind = match self.kind.as_str() {
            "standard" => DeformationKind::Standard,
            "q" => DeformationKind::QSymmetric { q: self.q.unwrap() },
            "qp" => DeformationKind::Qp { q: self.q.unwrap(), p: self.p.unwrap() },
            "series" => DeformationKind::Series { coeffs: self.coeffs.unwrap() },
            _ => DeformationKind::Table { values: self.values.unwrap() },
        };
        let cap = match (&kind, self.level_cap) {
            (_, Some(cap)) => cap,
            (DeformationKind::Table { values }, None) => values.len(),
            _ => DEFAULT_LEVEL_CAP,
        };
        DeformationSpec::new(self.hbar, kind, cap)
    }

    fn from_spec(spec: &DeformationSpec) -> Self {
        let mut raw = RawSpec {
            hbar: spec.hbar,
            kind: spec.kind.name().to_string(),
            q: None,
            p: None,
            coeffs: None,
            values: None,
            level_cap: Some(spec.level_cap),
        };
        match &spec.kind {
            DeformationKind::Standard => {}
            DeformationKind::QSymmetric { q } => raw.q = Some(*q),
            DeformationKind::Qp { q, p } => {
                raw.q = Some(*q);
                raw.p = Some(*p);
            }
            DeformationKind::Series { coeffs } => raw.coeffs = Some(coeffs.clone()),
            DeformationKind::Table { values } => raw.values = Some(values.clone()),
        }
        raw
    }
}

/// `f(n)` for `n < level_cap`.
pub fn eval_f(spec: &DeformationSpec, n: usize) -> Result<f64> {
    if n >= spec.level_cap {
        return Err(Error::LevelCap { level: n, cap: spec.level_cap });
    }
    Ok(spec.f_unchecked(n))
}

/// Cached ladder data up to the level cap `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderTable {
    spec: DeformationSpec,
    f: Vec<f64>,
    ladder: Vec<f64>,
    ladder_fact: Vec<f64>,
    spectrum: Vec<f64>,
}

impl LadderTable {
    pub fn spec(&self) -> &DeformationSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.level_cap
    }

    pub fn hbar(&self) -> f64 {
        self.spec.hbar
    }

    /// `f(0..D)`.
    pub fn f(&self) -> &[f64] {
        &self.f
    }

    /// `F(0..=D)`.
    pub fn ladder(&self) -> &[f64] {
        &self.ladder
    }

    /// `F!(0..=D)`.
    pub fn ladder_fact(&self) -> &[f64] {
        &self.ladder_fact
    }

    /// `E(0..D)`.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    /// True when every `f(n)` equals `hbar`, i.e. the undeformed boson.
    pub fn is_standard(&self) -> bool {
        self.f.iter().all(|&v| v == self.spec.hbar)
    }

    /// First level `j` in `1..=D` where `F(j)` is not strictly positive and finite.
    pub fn first_degenerate_level(&self) -> Option<usize> {
        (1..self.ladder.len()).find(|&j| !(self.ladder[j].is_finite() && self.ladder[j] > 0.0))
    }

    /// `ln F!(n)`, valid when `F(1..=n)` are positive.
    pub fn ln_ladder_fact(&self, n: usize) -> f64 {
        self.ladder[1..=n].iter().map(|v| v.ln()).sum()
    }
}

pub fn build_ladder_table(spec: &DeformationSpec) -> LadderTable {
    let d = spec.level_cap;
    let f: Vec<f64> = (0..d).map(|n| spec.f_unchecked(n)).collect();
    let ladder: Vec<f64> = match spec.closed_ladder(0) {
        Some(_) => (0..=d).map(|n| spec.closed_ladder(n).unwrap()).collect(),
        None => {
            let mut acc = vec![0.0; d + 1];
            for n in 1..=d {
                acc[n] = acc[n - 1] + f[n - 1];
            }
            acc
        }
    };
    let mut ladder_fact = vec![1.0; d + 1];
    for n in 1..=d {
        ladder_fact[n] = ladder_fact[n - 1] * ladder[n];
    }
    let spectrum = (0..d).map(|n| 0.5 * (ladder[n + 1] + ladder[n])).collect();
    LadderTable { spec: spec.clone(), f, ladder, ladder_fact, spectrum }
}

/// Substitute `c_n -> c_n hbar^n` in a series spec.
pub fn scale_coefficients(spec: &DeformationSpec) -> Result<DeformationSpec> {
    match &spec.kind {
        DeformationKind::Series { coeffs } => {
            let scaled = coeffs
                .iter()
                .enumerate()
                .map(|(n, c)| c * spec.hbar.powi(n as i32))
                .collect();
            DeformationSpec::series(spec.hbar, scaled, spec.level_cap)
        }
        other => Err(Error::UnsupportedKind { op: "scale_coefficients", kind: other.name() }),
    }
}
