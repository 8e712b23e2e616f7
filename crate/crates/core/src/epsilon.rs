//! Truncated polynomials in the mirror interaction terms `eps_A .. eps_F`.
//!
//! Each path contributes `amp * prod_{n on path} (1 - eps_n)`; summing the
//! paths that reach a detector and truncating at a fixed total degree gives
//! the order-by-order bookkeeping of first-, second- and third-order
//! interactions. The `eps_n` are abstract complex scalars.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interferometer::{self, InterferometerGraph, LayoutError, Mirror, UnknownMirrorSymbol};
use crate::numeric::fmt_number;
use crate::Complex;

/// Truncation order used when none is given.
pub const DEFAULT_ORDER: u32 = 3;

/// Tolerance of [`EpsilonPolynomial::prune_default`].
pub const DEFAULT_PRUNE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EpsilonError {
    #[error(transparent)]
    UnknownMirrorSymbol(#[from] UnknownMirrorSymbol),
    #[error("truncation orders differ: {0} vs {1}")]
    OrderMismatch(u32, u32),
    #[error("order {requested} is beyond the truncation order {truncation}")]
    OrderOutOfRange { requested: u32, truncation: u32 },
    #[error("no value assigned to eps_{0}")]
    MissingAssignment(Mirror),
    #[error("cannot sum an empty list of polynomials")]
    Empty,
    #[error(transparent)]
    Layout(#[from] LayoutError),
}

/// Product of powers of the interaction symbols, stored as exponents in the
/// canonical order `A, B, C, E, F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct EpsilonMonomial {
    exponents: [u8; 5],
}

impl EpsilonMonomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn var(m: Mirror) -> Self {
        let mut exponents = [0; 5];
        exponents[m.index()] = 1;
        Self { exponents }
    }

    /// Monomial from a list of symbols, repeated symbols raising the power.
    pub fn from_symbols(symbols: &[Mirror]) -> Self {
        let mut exponents = [0u8; 5];
        for m in symbols {
            exponents[m.index()] += 1;
        }
        Self { exponents }
    }

    pub fn exponent(&self, m: Mirror) -> u32 {
        self.exponents[m.index()] as u32
    }

    pub fn degree(&self) -> u32 {
        self.exponents.iter().map(|&e| e as u32).sum()
    }

    fn symbols(&self) -> impl Iterator<Item = Mirror> + '_ {
        Mirror::ALL
            .into_iter()
            .flat_map(move |m| std::iter::repeat_n(m, self.exponents[m.index()] as usize))
    }

    fn times(&self, other: &Self) -> Self {
        let mut exponents = self.exponents;
        for (e, o) in exponents.iter_mut().zip(other.exponents) {
            *e += o;
        }
        Self { exponents }
    }
}

impl Ord for EpsilonMonomial {
    /// Degree first, then lexicographic on the expanded symbol sequence.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.symbols().cmp(other.symbols()))
    }
}

impl PartialOrd for EpsilonMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for EpsilonMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree() == 0 {
            return f.write_str("1");
        }
        let mut first = true;
        for m in Mirror::ALL {
            let e = self.exponent(m);
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            write!(f, "eps_{m}")?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for EpsilonMonomial {
    type Err = UnknownMirrorSymbol;

    /// Parses `1`, `eps_A`, `eps_A*eps_E^2`, or the bare form `A*E^2`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "1" {
            return Ok(Self::one());
        }
        let mut exponents = [0u8; 5];
        for factor in s.split('*') {
            let factor = factor.trim();
            let factor = factor.strip_prefix("eps_").unwrap_or(factor);
            let (sym, pow) = match factor.split_once('^') {
                Some((a, b)) => (a, b.parse::<u8>().map_err(|_| UnknownMirrorSymbol(factor.into()))?),
                None => (factor, 1),
            };
            let m: Mirror = sym.parse()?;
            exponents[m.index()] += pow;
        }
        Ok(Self { exponents })
    }
}

/// Complex-coefficient polynomial in `eps_A .. eps_F`, truncated at a fixed
/// total degree. Exact-zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonPolynomial {
    terms: BTreeMap<EpsilonMonomial, Complex>,
    order: u32,
}

impl EpsilonPolynomial {
    pub fn zero(order: u32) -> Self {
        Self {
            terms: BTreeMap::new(),
            order,
        }
    }

    pub fn constant(c: Complex, order: u32) -> Self {
        let mut p = Self::zero(order);
        p.insert(EpsilonMonomial::one(), c);
        p
    }

    /// The single symbol `eps_m` (zero when `order == 0`).
    pub fn var(m: Mirror, order: u32) -> Self {
        let mut p = Self::zero(order);
        p.insert(EpsilonMonomial::var(m), Complex::new(1.0, 0.0));
        p
    }

    /// Build from explicit terms; terms above `order` are dropped.
    pub fn from_terms(terms: impl IntoIterator<Item = (EpsilonMonomial, Complex)>, order: u32) -> Self {
        let mut p = Self::zero(order);
        for (m, c) in terms {
            p.insert(m, c);
        }
        p
    }

    fn insert(&mut self, m: EpsilonMonomial, c: Complex) {
        if m.degree() > self.order {
            return;
        }
        let slot = self.terms.entry(m).or_insert(Complex::new(0.0, 0.0));
        *slot += c;
        if *slot == Complex::new(0.0, 0.0) {
            self.terms.remove(&m);
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&EpsilonMonomial, &Complex)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &EpsilonMonomial) -> Complex {
        self.terms.get(m).copied().unwrap_or_default()
    }

    pub fn constant_term(&self) -> Complex {
        self.coefficient(&EpsilonMonomial::one())
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().map(EpsilonMonomial::degree).max()
    }

    pub fn scale(&self, c: Complex) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, v)| (*m, v * c)), self.order)
    }

    /// Same polynomial with a lower truncation order.
    pub fn truncate(&self, order: u32) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, v)| (*m, *v)), order.min(self.order))
    }

    /// Only the terms of total degree `k`.
    pub fn extract_order(&self, k: u32) -> Result<Self, EpsilonError> {
        if k > self.order {
            return Err(EpsilonError::OrderOutOfRange {
                requested: k,
                truncation: self.order,
            });
        }
        Ok(Self::from_terms(
            self.terms
                .iter()
                .filter(|(m, _)| m.degree() == k)
                .map(|(m, v)| (*m, *v)),
            self.order,
        ))
    }

    /// Numeric value for the given symbol values.
    pub fn evaluate(&self, assignment: &BTreeMap<Mirror, Complex>) -> Result<Complex, EpsilonError> {
        let mut acc = Complex::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut term = *c;
            for sym in Mirror::ALL {
                let e = m.exponent(sym);
                if e == 0 {
                    continue;
                }
                let v = assignment.get(&sym).ok_or(EpsilonError::MissingAssignment(sym))?;
                term *= v.powu(e);
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Drops coefficients with `|c| <= tol`.
    pub fn prune(&self, tol: f64) -> Self {
        Self::from_terms(
            self.terms.iter().filter(|(_, c)| c.norm() > tol).map(|(m, c)| (*m, *c)),
            self.order,
        )
    }

    pub fn prune_default(&self) -> Self {
        self.prune(DEFAULT_PRUNE_TOL)
    }

    /// Divides by the constant term, so the result starts with 1.
    pub fn normalized(&self) -> Option<Self> {
        let c0 = self.constant_term();
        if c0 == Complex::new(0.0, 0.0) {
            return None;
        }
        Some(self.scale(c0.inv()))
    }

    /// One line per order, `order k: <terms>`.
    pub fn display_by_order(&self) -> String {
        let mut out = String::new();
        for k in 0..=self.order {
            let part = self.extract_order(k).expect("k within order");
            out.push_str(&format!("order {k}: {part}\n"));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("polynomial serialization cannot fail")
    }
}

impl Add for &EpsilonPolynomial {
    type Output = EpsilonPolynomial;

    /// Termwise sum, truncated at the smaller of the two orders.
    fn add(self, rhs: &EpsilonPolynomial) -> EpsilonPolynomial {
        let mut out = self.truncate(self.order.min(rhs.order));
        for (m, c) in &rhs.terms {
            out.insert(*m, *c);
        }
        out
    }
}

impl Sub for &EpsilonPolynomial {
    type Output = EpsilonPolynomial;

    fn sub(self, rhs: &EpsilonPolynomial) -> EpsilonPolynomial {
        self + &(-rhs)
    }
}

impl Neg for &EpsilonPolynomial {
    type Output = EpsilonPolynomial;

    fn neg(self) -> EpsilonPolynomial {
        EpsilonPolynomial::from_terms(self.terms.iter().map(|(m, c)| (*m, -c)), self.order)
    }
}

impl Mul for &EpsilonPolynomial {
    type Output = EpsilonPolynomial;

    /// Product truncated at the smaller of the two orders.
    fn mul(self, rhs: &EpsilonPolynomial) -> EpsilonPolynomial {
        let order = self.order.min(rhs.order);
        let mut out = EpsilonPolynomial::zero(order);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                if ma.degree() + mb.degree() <= order {
                    out.insert(ma.times(mb), ca * cb);
                }
            }
        }
        out
    }
}

macro_rules! owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for EpsilonPolynomial {
            type Output = EpsilonPolynomial;

            fn $method(self, rhs: EpsilonPolynomial) -> EpsilonPolynomial {
                (&self).$method(&rhs)
            }
        }
    };
}

owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

impl Neg for EpsilonPolynomial {
    type Output = EpsilonPolynomial;

    fn neg(self) -> EpsilonPolynomial {
        -&self
    }
}

fn write_coefficient(f: &mut fmt::Formatter<'_>, c: Complex, leading: bool, bare_unit: bool) -> fmt::Result {
    let (negative, body) = if c.im == 0.0 {
        let mag = c.re.abs();
        let body = if bare_unit && mag == 1.0 {
            String::new()
        } else {
            fmt_number(mag)
        };
        (c.re < 0.0, body)
    } else if c.re == 0.0 {
        let mag = c.im.abs();
        let body = if mag == 1.0 {
            "i".to_string()
        } else {
            format!("{}i", fmt_number(mag))
        };
        (c.im < 0.0, body)
    } else {
        let sign = if c.im < 0.0 { '-' } else { '+' };
        (
            false,
            format!("({}{sign}{}i)", fmt_number(c.re), fmt_number(c.im.abs())),
        )
    };
    match (leading, negative) {
        (true, true) => f.write_str("-")?,
        (true, false) => {}
        (false, true) => f.write_str(" - ")?,
        (false, false) => f.write_str(" + ")?,
    }
    f.write_str(&body)
}

impl fmt::Display for EpsilonPolynomial {
    /// Canonical form: monomials by degree, then lexicographically.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let constant = m.degree() == 0;
            write_coefficient(f, *c, i == 0, !constant)?;
            if !constant {
                let real_unit = c.im == 0.0 && c.re.abs() == 1.0;
                if !real_unit {
                    f.write_str("*")?;
                }
                write!(f, "{m}")?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermDocument {
    monomial: String,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct PolynomialDocument {
    order: u32,
    terms: Vec<TermDocument>,
}

impl Serialize for EpsilonPolynomial {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        PolynomialDocument {
            order: self.order,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| TermDocument {
                    monomial: m.to_string(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for EpsilonPolynomial {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = PolynomialDocument::deserialize(deserializer)?;
        let mut terms = Vec::with_capacity(doc.terms.len());
        for t in doc.terms {
            let m: EpsilonMonomial = t.monomial.parse().map_err(serde::de::Error::custom)?;
            if m.degree() > doc.order {
                return Err(serde::de::Error::custom(format!(
                    "term {m} exceeds truncation order {}",
                    doc.order
                )));
            }
            terms.push((m, Complex::new(t.re, t.im)));
        }
        Ok(EpsilonPolynomial::from_terms(terms, doc.order))
    }
}

/// `amplitude * prod_{n in mirrors} (1 - eps_n)`, truncated at `order`.
pub fn expand_path(amplitude: Complex, mirrors: &[Mirror], order: u32) -> EpsilonPolynomial {
    let mut acc = EpsilonPolynomial::constant(amplitude, order);
    let one = EpsilonPolynomial::constant(Complex::new(1.0, 0.0), order);
    for &m in mirrors {
        let factor = &one - &EpsilonPolynomial::var(m, order);
        acc = &acc * &factor;
    }
    acc
}

/// [`expand_path`] with the mirrors given by name.
pub fn expand_path_symbols<S: AsRef<str>>(
    amplitude: Complex,
    mirrors: &[S],
    order: u32,
) -> Result<EpsilonPolynomial, EpsilonError> {
    let parsed = mirrors
        .iter()
        .map(|s| s.as_ref().parse::<Mirror>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(expand_path(amplitude, &parsed, order))
}

/// Termwise sum of polynomials sharing one truncation order.
pub fn sum_paths(polys: &[EpsilonPolynomial]) -> Result<EpsilonPolynomial, EpsilonError> {
    let first = polys.first().ok_or(EpsilonError::Empty)?;
    let mut acc = EpsilonPolynomial::zero(first.order);
    for p in polys {
        if p.order != first.order {
            return Err(EpsilonError::OrderMismatch(first.order, p.order));
        }
        acc = &acc + p;
    }
    Ok(acc)
}

/// How path amplitudes enter [`detector_expansion`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AmplitudeMode {
    /// Bare network amplitudes from the splitter and phase settings.
    #[default]
    Physical,
    /// Every path weighted by 1.
    Unit,
}

/// Sum of the expanded path products over all paths reaching `detector`.
pub fn detector_expansion(
    graph: &InterferometerGraph,
    detector: &str,
    order: u32,
    mode: AmplitudeMode,
) -> Result<EpsilonPolynomial, EpsilonError> {
    let paths = interferometer::enumerate_paths_to(graph, detector);
    let mut polys = Vec::with_capacity(paths.len());
    for p in &paths {
        let amp = match mode {
            AmplitudeMode::Physical => interferometer::path_amplitude(graph, p)?,
            AmplitudeMode::Unit => Complex::new(1.0, 0.0),
        };
        polys.push(expand_path(amp, &p.mirrors(graph), order));
    }
    if polys.is_empty() {
        return Ok(EpsilonPolynomial::zero(order));
    }
    sum_paths(&polys)
}
