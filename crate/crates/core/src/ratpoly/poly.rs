use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Exponent pair `x^x * y^y`.
///
/// Ordered graded-lexicographically with `x` before `y`, highest first, so
/// iterating a [`BivarPoly`] visits terms in print order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Monomial {
    pub x: u32,
    pub y: u32,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { x: 0, y: 0 };

    pub fn new(x: u32, y: u32) -> Self {
        Monomial { x, y }
    }

    pub fn degree(&self) -> u32 {
        self.x + self.y
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .degree()
            .cmp(&self.degree())
            .then(other.x.cmp(&self.x))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Polynomial in `x`, `y` with coefficients in `C`.
#[derive(Clone, PartialEq, Debug)]
pub struct BivarPoly<C> {
    terms: BTreeMap<Monomial, C>,
}

impl<C: Scalar> Default for BivarPoly<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Scalar> BivarPoly<C> {
    pub fn zero() -> Self {
        BivarPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn constant(c: C) -> Self {
        Self::term(c, 0, 0)
    }

    pub fn x() -> Self {
        Self::term(C::one(), 1, 0)
    }

    pub fn y() -> Self {
        Self::term(C::one(), 0, 1)
    }

    pub fn term(c: C, i: u32, j: u32) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::new(i, j), c);
        p
    }

    /// Sum of the given terms; repeated exponents accumulate.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = ((u32, u32), C)>,
    {
        let mut p = Self::zero();
        for ((i, j), c) in terms {
            p.add_term(Monomial::new(i, j), c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = existing.add_ref(&c);
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in graded-lex order, highest first.
    pub fn terms(&self) -> impl Iterator<Item = (Monomial, &C)> + '_ {
        self.terms.iter().map(|(m, c)| (*m, c))
    }

    pub fn coeff(&self, i: u32, j: u32) -> C {
        self.terms
            .get(&Monomial::new(i, j))
            .cloned()
            .unwrap_or_else(C::zero)
    }

    /// Total degree; the zero polynomial has none.
    pub fn total_degree(&self) -> Result<u32> {
        self.terms
            .keys()
            .next()
            .map(Monomial::degree)
            .ok_or(Error::ZeroPolynomial)
    }

    pub fn degree_in_x(&self) -> u32 {
        self.terms.keys().map(|m| m.x).max().unwrap_or(0)
    }

    pub fn degree_in_y(&self) -> u32 {
        self.terms.keys().map(|m| m.y).max().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    pub fn involves_only_x(&self) -> bool {
        self.terms.keys().all(|m| m.y == 0)
    }

    pub fn involves_only_y(&self) -> bool {
        self.terms.keys().all(|m| m.x == 0)
    }

    /// Sum of the terms of total degree exactly `d`.
    ///
    /// This is the restriction of the degree-`d` homogenization to the line
    /// at infinity; it is zero when `d` exceeds the total degree.
    pub fn leading_form(&self, d: u32) -> Result<Self> {
        if let Ok(actual) = self.total_degree() {
            if d < actual {
                return Err(Error::DegreeTooSmall {
                    requested: d,
                    actual,
                });
            }
        }
        Ok(BivarPoly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == d)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        })
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        BivarPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, a)| (*m, a.mul_ref(c)))
                .filter(|(_, a)| !a.is_zero())
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Substitute `x := sub_x`, `y := sub_y` and expand.
    pub fn compose(&self, sub_x: &Self, sub_y: &Self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let xs = powers(sub_x, self.degree_in_x());
        let ys = powers(sub_y, self.degree_in_y());
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let prod = if m.x == 0 {
                ys[m.y as usize].clone()
            } else if m.y == 0 {
                xs[m.x as usize].clone()
            } else {
                &xs[m.x as usize] * &ys[m.y as usize]
            };
            for (pm, pc) in prod.terms {
                let coeff = if c.is_one() { pc } else { pc.mul_ref(c) };
                out.add_term(pm, coeff);
            }
        }
        out
    }

    /// Exact value at `(x, y)`.
    pub fn evaluate(&self, x: &C, y: &C) -> C {
        let xs = scalar_powers(x, self.degree_in_x());
        let ys = scalar_powers(y, self.degree_in_y());
        let mut acc = C::zero();
        for (m, c) in &self.terms {
            let mono = match (m.x, m.y) {
                (0, 0) => None,
                (i, 0) => Some(xs[i as usize].clone()),
                (0, j) => Some(ys[j as usize].clone()),
                (i, j) => Some(xs[i as usize].mul_ref(&ys[j as usize])),
            };
            let term = match mono {
                None => c.clone(),
                Some(v) if c.is_one() => v,
                Some(v) if (-c.clone()).is_one() => -v,
                Some(v) => v.mul_ref(c),
            };
            acc = acc.add_ref(&term);
        }
        acc
    }

    /// Exchange the roles of `x` and `y`.
    pub fn swap_vars(&self) -> Self {
        BivarPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (Monomial::new(m.y, m.x), c.clone()))
                .collect(),
        }
    }

    pub fn map_coeffs<D: Scalar>(&self, f: impl Fn(&C) -> D) -> BivarPoly<D> {
        let mut out = BivarPoly::zero();
        for (m, c) in &self.terms {
            out.add_term(*m, f(c));
        }
        out
    }
}

fn powers<C: Scalar>(p: &BivarPoly<C>, max: u32) -> Vec<BivarPoly<C>> {
    let mut out = Vec::with_capacity(max as usize + 1);
    out.push(BivarPoly::one());
    for k in 1..=max as usize {
        let next = &out[k - 1] * p;
        out.push(next);
    }
    out
}

fn scalar_powers<C: Scalar>(v: &C, max: u32) -> Vec<C> {
    let mut out = Vec::with_capacity(max as usize + 1);
    out.push(C::one());
    for k in 1..=max as usize {
        let next = if k == 1 {
            v.clone()
        } else {
            out[k - 1].mul_ref(v)
        };
        out.push(next);
    }
    out
}

impl<C: Scalar> Add for &BivarPoly<C> {
    type Output = BivarPoly<C>;
    fn add(self, rhs: &BivarPoly<C>) -> BivarPoly<C> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl<C: Scalar> Sub for &BivarPoly<C> {
    type Output = BivarPoly<C>;
    fn sub(self, rhs: &BivarPoly<C>) -> BivarPoly<C> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, -c.clone());
        }
        out
    }
}

impl<C: Scalar> Mul for &BivarPoly<C> {
    type Output = BivarPoly<C>;
    fn mul(self, rhs: &BivarPoly<C>) -> BivarPoly<C> {
        let mut acc: BTreeMap<Monomial, C> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let m = Monomial::new(ma.x + mb.x, ma.y + mb.y);
                let prod = ca.mul_ref(cb);
                match acc.get_mut(&m) {
                    Some(e) => *e = e.add_ref(&prod),
                    None => {
                        acc.insert(m, prod);
                    }
                }
            }
        }
        acc.retain(|_, c| !c.is_zero());
        BivarPoly { terms: acc }
    }
}

impl<C: Scalar> Neg for &BivarPoly<C> {
    type Output = BivarPoly<C>;
    fn neg(self) -> BivarPoly<C> {
        BivarPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (*m, -c.clone()))
                .collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl<C: Scalar> $tr for BivarPoly<C> {
            type Output = BivarPoly<C>;
            fn $method(self, rhs: BivarPoly<C>) -> BivarPoly<C> {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<C: Scalar> Neg for BivarPoly<C> {
    type Output = BivarPoly<C>;
    fn neg(self) -> BivarPoly<C> {
        -&self
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::with_capacity(2);
        for (var, e) in [("x", self.x), ("y", self.y)] {
            match e {
                0 => {}
                1 => parts.push(var.to_string()),
                _ => parts.push(format!("{var}^{e}")),
            }
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

impl<C: Scalar + fmt::Display> fmt::Display for BivarPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative_val();
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let a = c.abs_val();
            if m.degree() == 0 {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{a}*{m}")?;
            }
        }
        Ok(())
    }
}
