use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul};

use super::KernelError;

/// Assignment of naturals to polynomial variables.
pub type ParamSubstitution = BTreeMap<String, u64>;

/// Shorthand for the common single-parameter assignment `{n ↦ i}`.
pub fn rho(var: &str, value: u64) -> ParamSubstitution {
    let mut m = BTreeMap::new();
    m.insert(var.to_string(), value);
    m
}

/// Product of variables with positive exponents.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Monomial(BTreeMap<String, u32>);

impl Monomial {
    pub fn unit() -> Self {
        Monomial(BTreeMap::new())
    }

    pub fn var(name: &str) -> Self {
        let mut m = BTreeMap::new();
        m.insert(name.to_string(), 1);
        Monomial(m)
    }

    pub fn degree(&self) -> u32 {
        self.0.values().sum()
    }

    pub fn factors(&self) -> impl Iterator<Item = (&String, u32)> {
        self.0.iter().map(|(k, v)| (k, *v))
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = self.0.clone();
        for (v, e) in &other.0 {
            *out.entry(v.clone()).or_insert(0) += e;
        }
        Monomial(out)
    }
}

/// Polynomial with natural coefficients, kept in canonical form
/// (no zero coefficients, monomials sorted).
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, u64>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn one() -> Self {
        Polynomial::constant(1)
    }

    pub fn constant(c: u64) -> Self {
        let mut p = Polynomial::zero();
        if c != 0 {
            p.terms.insert(Monomial::unit(), c);
        }
        p
    }

    pub fn var(name: &str) -> Self {
        Polynomial::monomial(1, Monomial::var(name))
    }

    pub fn monomial(coeff: u64, m: Monomial) -> Self {
        let mut p = Polynomial::zero();
        if coeff != 0 {
            p.terms.insert(m, coeff);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, u64)> {
        self.terms.iter().map(|(m, c)| (m, *c))
    }

    /// Value when the polynomial has no variables.
    pub fn as_constant(&self) -> Option<u64> {
        match self.terms.len() {
            0 => Some(0),
            1 => self.terms.get(&Monomial::unit()).copied(),
            _ => None,
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.terms
            .keys()
            .flat_map(|m| m.0.keys().cloned())
            .collect()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut acc = Polynomial::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn eval(&self, rho: &ParamSubstitution) -> Result<u64, KernelError> {
        let mut total: u64 = 0;
        for (m, c) in &self.terms {
            let mut val = *c;
            for (v, e) in &m.0 {
                let x = *rho
                    .get(v)
                    .ok_or_else(|| KernelError::UnboundParamVar(v.clone()))?;
                let xe = x.checked_pow(*e).ok_or(KernelError::Overflow)?;
                val = val.checked_mul(xe).ok_or(KernelError::Overflow)?;
            }
            total = total.checked_add(val).ok_or(KernelError::Overflow)?;
        }
        Ok(total)
    }

    /// Replace `var` by `by` everywhere.
    pub fn substitute(&self, var: &str, by: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let mut rest = m.0.clone();
            let e = rest.remove(var).unwrap_or(0);
            let term = Polynomial::monomial(*c, Monomial(rest));
            out = &out + &(&term * &by.pow(e));
        }
        out
    }

    /// Replace every variable bound in `rho` by its value.
    pub fn partial_eval(&self, rho: &ParamSubstitution) -> Polynomial {
        let mut out = self.clone();
        for (v, x) in rho {
            out = out.substitute(v, &Polynomial::constant(*x));
        }
        out
    }

    pub fn scale(&self, k: u64) -> Polynomial {
        self * &Polynomial::constant(k)
    }

    fn add_term(&mut self, m: Monomial, c: u64) {
        if c == 0 {
            return;
        }
        *self.terms.entry(m).or_insert(0) += c;
    }

    /// Coefficient-wise difference `self - other` as signed integers.
    fn signed_diff(&self, other: &Polynomial) -> BTreeMap<Monomial, i128> {
        let mut out: BTreeMap<Monomial, i128> = BTreeMap::new();
        for (m, c) in &self.terms {
            *out.entry(m.clone()).or_insert(0) += *c as i128;
        }
        for (m, c) in &other.terms {
            *out.entry(m.clone()).or_insert(0) -= *c as i128;
        }
        out.retain(|_, c| *c != 0);
        out
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), *c);
        }
        out
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: Polynomial) -> Polynomial {
        &self + &rhs
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}

impl From<u64> for Polynomial {
    fn from(c: u64) -> Self {
        Polynomial::constant(c)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, e) in &self.0 {
            if !first {
                f.write_str("*")?;
            }
            first = false;
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        // Highest degree first, constant last.
        let mut items: Vec<(&Monomial, &u64)> = self.terms.iter().collect();
        items.sort_by(|a, b| b.0.degree().cmp(&a.0.degree()).then(b.0.cmp(a.0)));
        for (i, (m, c)) in items.into_iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if m.0.is_empty() {
                write!(f, "{c}")?;
            } else if *c == 1 {
                write!(f, "{m}")?;
            } else {
                write!(f, "{c}*{m}")?;
            }
        }
        Ok(())
    }
}

/// Outcome of comparing two polynomials pointwise over the naturals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Leq {
    Holds,
    /// An assignment where the left side is strictly larger.
    Refuted(ParamSubstitution),
    Indeterminate,
}

impl Leq {
    pub fn holds(&self) -> bool {
        matches!(self, Leq::Holds)
    }
}

const UNIVARIATE_SCAN_CAP: i128 = 1_000_000;
const GRID_CAP: u64 = 200_000;

/// Decide `p(ρ) ≤ q(ρ)` for every assignment of naturals.
///
/// Coefficient dominance proves it outright. With at most one variable the
/// question is decided exactly: past the Cauchy root bound the sign of the
/// difference is that of its leading coefficient, and below it every point
/// is checked. With more variables a bounded grid search can only refute.
pub fn poly_leq(p: &Polynomial, q: &Polynomial) -> Leq {
    let diff = q.signed_diff(p);
    if diff.values().all(|c| *c >= 0) {
        return Leq::Holds;
    }
    let vars: Vec<String> = p.vars().union(&q.vars()).cloned().collect();
    match vars.len() {
        0 => Leq::Refuted(ParamSubstitution::new()),
        1 => univariate_leq(&diff, &vars[0]),
        _ => grid_refute(p, q, &vars),
    }
}

fn univariate_leq(diff: &BTreeMap<Monomial, i128>, var: &str) -> Leq {
    let deg = diff.keys().map(Monomial::degree).max().unwrap_or(0) as usize;
    let mut coeffs = alloc::vec![0i128; deg + 1];
    for (m, c) in diff {
        coeffs[m.degree() as usize] += c;
    }
    let eval = |x: i128| -> Option<i128> {
        let mut acc: i128 = 0;
        for c in coeffs.iter().rev() {
            acc = acc.checked_mul(x)?.checked_add(*c)?;
        }
        Some(acc)
    };
    let lc = coeffs[deg];
    let max_other = coeffs[..deg].iter().map(|c| c.abs()).max().unwrap_or(0);
    let bound = 1 + max_other / lc.abs() + 1;
    if bound > UNIVARIATE_SCAN_CAP {
        return Leq::Indeterminate;
    }
    for x in 0..=bound {
        match eval(x) {
            Some(v) if v < 0 => return Leq::Refuted(rho(var, x as u64)),
            Some(_) => {}
            None => return Leq::Indeterminate,
        }
    }
    if lc > 0 {
        Leq::Holds
    } else {
        // Negative leading coefficient: eventually negative, and past the
        // bound already is.
        Leq::Refuted(rho(var, (bound + 1) as u64))
    }
}

fn grid_refute(p: &Polynomial, q: &Polynomial, vars: &[String]) -> Leq {
    let d = p.degree().max(q.degree()) as u64;
    let side = d + 3;
    let total = side.checked_pow(vars.len() as u32).unwrap_or(u64::MAX);
    if total > GRID_CAP {
        return Leq::Indeterminate;
    }
    for idx in 0..total {
        let mut r = ParamSubstitution::new();
        let mut k = idx;
        for v in vars {
            r.insert(v.clone(), k % side);
            k /= side;
        }
        if let (Ok(a), Ok(b)) = (p.eval(&r), q.eval(&r)) {
            if a > b {
                return Leq::Refuted(r);
            }
        }
    }
    Leq::Indeterminate
}
