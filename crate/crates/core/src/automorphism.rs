//! Plane polynomial automorphisms built from generator words.
//!
//! Every [`PlaneAutomorphism`] carries its forward pair `(p, q)`, an inverse
//! pair `(r, s)` and the word of generators it was built from. Inverses are
//! never computed from scratch: generators come with closed-form inverses
//! and composition/conjugation combine the stored ones.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::{Poly, Rat};

/// One generator of an automorphism word.
#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    /// `(p(x) - a*y, x)`.
    Henon { a: Rat, p: Poly },
    /// `(a*x + P(y), b*y + c)`.
    Triangular { a: Rat, b: Rat, c: Rat, big_p: Poly },
    /// A user-supplied pair with its explicit inverse.
    Pair {
        p: Poly,
        q: Poly,
        pinv: Poly,
        qinv: Poly,
    },
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Henon { a, p } => write!(f, "henon(a={a}, p={p})"),
            Generator::Triangular { a, b, c, big_p } => {
                write!(f, "triangular(a={a}, b={b}, c={c}, P={big_p})")
            }
            Generator::Pair { p, q, .. } => write!(f, "pair({p}, {q})"),
        }
    }
}

/// A generator, possibly inverted.
#[derive(Clone, Debug, PartialEq)]
pub struct Letter {
    pub gen: Generator,
    pub inverted: bool,
}

impl Letter {
    fn inverse(&self) -> Letter {
        Letter {
            gen: self.gen.clone(),
            inverted: !self.inverted,
        }
    }

    /// The polynomial pair of this letter.
    fn pair(&self) -> (Poly, Poly) {
        let map = match &self.gen {
            Generator::Henon { a, p } => PlaneAutomorphism::henon(a.clone(), p.clone()),
            Generator::Triangular { a, b, c, big_p } => {
                PlaneAutomorphism::triangular(a.clone(), b.clone(), c.clone(), big_p.clone())
            }
            Generator::Pair { p, q, pinv, qinv } => {
                PlaneAutomorphism::pair(p.clone(), q.clone(), pinv.clone(), qinv.clone())
            }
        }
        .expect("letters come from validated maps");
        if self.inverted {
            map.inv
        } else {
            map.fwd
        }
    }
}

/// Adjacent `g g^-1` pairs cancelled.
fn reduce_word<'a>(letters: impl IntoIterator<Item = &'a Letter>) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::new();
    for l in letters {
        if out.last().is_some_and(|top| *top == l.inverse()) {
            out.pop();
        } else {
            out.push(l.clone());
        }
    }
    out
}

/// Product of a word, composing one letter at a time from the right so that
/// no intermediate exceeds the degree of a partial product.
fn word_pair(word: &[Letter]) -> (Poly, Poly) {
    let mut acc = (Poly::x(), Poly::y());
    for l in word.iter().rev() {
        acc = compose_pairs(&l.pair(), &acc);
    }
    acc
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverted {
            write!(f, "{}^-1", self.gen)
        } else {
            write!(f, "{}", self.gen)
        }
    }
}

/// Polynomial automorphism of the affine plane with a stored inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneAutomorphism {
    fwd: (Poly, Poly),
    inv: (Poly, Poly),
    /// Generators, leftmost applied last.
    word: Vec<Letter>,
}

fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// `(p, q)` after `(u, v)`, i.e. `(p(u, v), q(u, v))`.
fn compose_pairs(outer: &(Poly, Poly), inner: &(Poly, Poly)) -> (Poly, Poly) {
    (
        outer.0.compose(&inner.0, &inner.1),
        outer.1.compose(&inner.0, &inner.1),
    )
}

fn is_identity(pair: &(Poly, Poly)) -> bool {
    pair.0 == Poly::x() && pair.1 == Poly::y()
}

fn pair_degree(pair: &(Poly, Poly)) -> Result<u32> {
    let dp = pair.0.total_degree()?;
    let dq = pair.1.total_degree()?;
    Ok(dp.max(dq))
}

impl PlaneAutomorphism {
    pub fn identity() -> Self {
        PlaneAutomorphism {
            fwd: (Poly::x(), Poly::y()),
            inv: (Poly::x(), Poly::y()),
            word: Vec::new(),
        }
    }

    /// Hénon map `(p(x) - a*y, x)` with inverse `(y, (p(y) - x)/a)`.
    pub fn henon(a: Rat, p: Poly) -> Result<Self> {
        if a.is_zero() {
            return Err(Error::InvalidMap("henon: a must be nonzero".into()));
        }
        if !p.involves_only_x() {
            return Err(Error::InvalidMap("henon: p must be a polynomial in x".into()));
        }
        let deg = p.total_degree().unwrap_or(0);
        if deg < 2 {
            return Err(Error::InvalidMap(format!(
                "henon: deg p must be at least 2, got {deg}"
            )));
        }
        let fwd = (&p - &Poly::y().scale(&a), Poly::x());
        let p_of_y = p.swap_vars();
        let inv = (Poly::y(), (&p_of_y - &Poly::x()).scale(&(Rat::one() / &a)));
        let f = PlaneAutomorphism {
            fwd,
            inv,
            word: vec![Letter {
                gen: Generator::Henon { a, p },
                inverted: false,
            }],
        };
        f.validate()?;
        Ok(f)
    }

    /// Triangular map `(a*x + P(y), b*y + c)`.
    pub fn triangular(a: Rat, b: Rat, c: Rat, big_p: Poly) -> Result<Self> {
        if a.is_zero() || b.is_zero() {
            return Err(Error::InvalidMap("triangular: a*b must be nonzero".into()));
        }
        if !big_p.involves_only_y() {
            return Err(Error::InvalidMap(
                "triangular: P must be a polynomial in y".into(),
            ));
        }
        let fwd = (
            &Poly::x().scale(&a) + &big_p,
            &Poly::y().scale(&b) + &Poly::constant(c.clone()),
        );
        // y' = (y - c)/b, x' = (x - P(y'))/a.
        let y_back = (&Poly::y() - &Poly::constant(c.clone())).scale(&(Rat::one() / &b));
        let p_back = big_p.compose(&Poly::x(), &y_back);
        let x_back = (&Poly::x() - &p_back).scale(&(Rat::one() / &a));
        let f = PlaneAutomorphism {
            fwd,
            inv: (x_back, y_back),
            word: vec![Letter {
                gen: Generator::Triangular { a, b, c, big_p },
                inverted: false,
            }],
        };
        f.validate()?;
        Ok(f)
    }

    /// User-supplied pair; the inverse must be given and is only checked.
    pub fn pair(p: Poly, q: Poly, pinv: Poly, qinv: Poly) -> Result<Self> {
        let f = PlaneAutomorphism {
            fwd: (p.clone(), q.clone()),
            inv: (pinv.clone(), qinv.clone()),
            word: vec![Letter {
                gen: Generator::Pair { p, q, pinv, qinv },
                inverted: false,
            }],
        };
        f.validate()?;
        Ok(f)
    }

    /// Exact compose-check in both orders, plus nonzero components.
    pub fn validate(&self) -> Result<()> {
        pair_degree(&self.fwd).map_err(|_| Error::InvalidMap("zero component".into()))?;
        pair_degree(&self.inv).map_err(|_| Error::InvalidMap("zero inverse component".into()))?;
        if !is_identity(&compose_pairs(&self.fwd, &self.inv)) {
            return Err(Error::InverseMismatch("f after f^-1 is not the identity".into()));
        }
        if !is_identity(&compose_pairs(&self.inv, &self.fwd)) {
            return Err(Error::InverseMismatch("f^-1 after f is not the identity".into()));
        }
        Ok(())
    }

    pub fn fwd(&self) -> &(Poly, Poly) {
        &self.fwd
    }

    pub fn inv(&self) -> &(Poly, Poly) {
        &self.inv
    }

    pub fn word(&self) -> &[Letter] {
        &self.word
    }

    /// The word with adjacent `g g^-1` pairs cancelled.
    pub fn reduced_word(&self) -> Vec<Letter> {
        reduce_word(&self.word)
    }

    /// Forward pair of `f^k`, built from the reduced word of the power.
    fn power_pair(&self, k: usize) -> (Poly, Poly) {
        let word = reduce_word((0..k).flat_map(|_| self.word.iter()));
        word_pair(&word)
    }

    pub fn inverse(&self) -> Self {
        PlaneAutomorphism {
            fwd: self.inv.clone(),
            inv: self.fwd.clone(),
            word: self.word.iter().rev().map(Letter::inverse).collect(),
        }
    }

    /// `max(deg p, deg q)`.
    pub fn degree(&self) -> u32 {
        pair_degree(&self.fwd).expect("validated at construction")
    }

    /// `max(deg r, deg s)` of the inverse.
    pub fn inverse_degree(&self) -> u32 {
        pair_degree(&self.inv).expect("validated at construction")
    }

    pub fn is_identity(&self) -> bool {
        is_identity(&self.fwd)
    }

    /// Image of an affine rational point.
    pub fn apply(&self, x: &Rat, y: &Rat) -> (Rat, Rat) {
        (self.fwd.0.evaluate(x, y), self.fwd.1.evaluate(x, y))
    }

    /// Preimage of an affine rational point.
    pub fn apply_inv(&self, x: &Rat, y: &Rat) -> (Rat, Rat) {
        (self.inv.0.evaluate(x, y), self.inv.1.evaluate(x, y))
    }

    /// Leading forms of the forward pair in degree `d = degree()`.
    pub fn leading_forms(&self) -> (Poly, Poly) {
        let d = self.degree();
        (
            self.fwd.0.leading_form(d).expect("d is the max degree"),
            self.fwd.1.leading_form(d).expect("d is the max degree"),
        )
    }

    /// `[deg f, deg f^2, ..., deg f^n]` by exact composition.
    pub fn degree_sequence(&self, n: usize) -> Vec<u32> {
        (1..=n)
            .map(|k| pair_degree(&self.power_pair(k)).expect("automorphism components are nonzero"))
            .collect()
    }

    /// Dynamical degree from `tau = deg(f^2)/deg(f)`.
    pub fn dynamical_degree(&self) -> Result<u32> {
        let d = self.degree();
        let square = self.power_pair(2);
        let d2 = pair_degree(&square)?;
        if d2 <= d {
            return Ok(1);
        }
        if d2 % d != 0 {
            return Err(Error::Inconsistent(format!(
                "deg f^2 / deg f = {d2}/{d} is neither <= 1 nor an integer"
            )));
        }
        Ok(d2 / d)
    }

    /// Indeterminacy locus on the line at infinity of the extension to the
    /// projective plane.
    pub fn indeterminacy_at_infinity(&self) -> Result<InfinityPoint> {
        let d = self.degree();
        if d < 2 {
            return Err(Error::InvalidMap(format!(
                "indeterminacy needs degree >= 2, got {d}"
            )));
        }
        let (lp, lq) = self.leading_forms();
        let forms: Vec<BinForm> = [lp, lq]
            .iter()
            .filter(|f| !f.is_zero())
            .map(|f| BinForm::from_leading(f, d))
            .collect();
        let mut acc = forms[0].clone();
        for f in &forms[1..] {
            acc = acc.gcd(f);
        }
        InfinityPoint::from_binform(acc.square_free())
    }

    /// Whether the forward and backward indeterminacy loci are disjoint.
    pub fn is_regular(&self) -> Result<bool> {
        let p = self.indeterminacy_at_infinity()?;
        let q = self.inverse().indeterminacy_at_infinity()?;
        Ok(!p.meets(&q))
    }
}

/// `f ∘ g`.
pub fn compose_maps(f: &PlaneAutomorphism, g: &PlaneAutomorphism) -> PlaneAutomorphism {
    let mut word = f.word.clone();
    word.extend(g.word.iter().cloned());
    PlaneAutomorphism {
        fwd: compose_pairs(&f.fwd, &g.fwd),
        inv: compose_pairs(&g.inv, &f.inv),
        word,
    }
}

/// `γ^-1 ∘ f ∘ γ`.
pub fn conjugate(f: &PlaneAutomorphism, gamma: &PlaneAutomorphism) -> PlaneAutomorphism {
    compose_maps(&gamma.inverse(), &compose_maps(f, gamma))
}

impl fmt::Display for PlaneAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.fwd.0, self.fwd.1)
    }
}

/// Point (or finite set of points) on the line at infinity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InfinityPoint {
    /// `(X : Y)` with `gcd = 1` and first nonzero coordinate positive.
    Rational { x: BigInt, y: BigInt },
    /// Square-free primitive integer binary form whose roots are the
    /// locus; `coeffs[i]` multiplies `X^i Y^(k-i)`.
    NonRational { coeffs: Vec<BigInt> },
}

impl InfinityPoint {
    fn from_binform(sf: BinForm) -> Result<Self> {
        let k = sf.degree();
        if k == 0 {
            return Err(Error::EmptyLocus);
        }
        if k == 1 {
            // c0*Y + c1*X = 0 has the root (-c0 : c1).
            let c0 = sf.finite.first().cloned().unwrap_or_else(Rat::zero);
            let c1 = if sf.inf == 1 {
                Rat::zero()
            } else {
                sf.finite[1].clone()
            };
            let (mut x, mut y) = rat_pair_to_ints(&(-c0), &c1);
            if x.is_negative() || (x.is_zero() && y.is_negative()) {
                x = -x;
                y = -y;
            }
            return Ok(InfinityPoint::Rational { x, y });
        }
        Ok(InfinityPoint::NonRational {
            coeffs: sf.integer_coeffs(),
        })
    }

    fn to_binform(&self) -> BinForm {
        let coeffs: Vec<Rat> = match self {
            InfinityPoint::Rational { x, y } => {
                // y*X - x*Y.
                vec![Rat::from_integer(-x.clone()), Rat::from_integer(y.clone())]
            }
            InfinityPoint::NonRational { coeffs } => {
                coeffs.iter().cloned().map(Rat::from_integer).collect()
            }
        };
        BinForm::from_coeffs(coeffs)
    }

    /// Whether the two loci share a point.
    pub fn meets(&self, other: &InfinityPoint) -> bool {
        self.to_binform().gcd(&other.to_binform()).degree() > 0
    }
}

impl fmt::Display for InfinityPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfinityPoint::Rational { x, y } => write!(f, "({x}:{y}:0)"),
            InfinityPoint::NonRational { coeffs } => {
                let k = coeffs.len() - 1;
                let terms: Vec<String> = coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(i, c)| format!("{c}*X^{i}*Y^{}", k - i))
                    .collect();
                write!(f, "roots of {}", terms.join(" + "))
            }
        }
    }
}

fn rat_pair_to_ints(a: &Rat, b: &Rat) -> (BigInt, BigInt) {
    let m = a.denom().lcm(b.denom());
    let x = a.numer() * (&m / a.denom());
    let y = b.numer() * (&m / b.denom());
    let g = x.gcd(&y);
    if g.is_zero() {
        return (x, y);
    }
    (x / &g, y / &g)
}

/// Binary form `F(X, Y)` stored as `u(t) = F(t, 1)` plus the multiplicity of
/// the root `(1 : 0)`.
#[derive(Clone, Debug)]
struct BinForm {
    finite: Vec<Rat>,
    inf: u32,
}

impl BinForm {
    fn from_coeffs(mut coeffs: Vec<Rat>) -> Self {
        let total = coeffs.len() as u32 - 1;
        trim(&mut coeffs);
        let deg_u = coeffs.len().saturating_sub(1) as u32;
        BinForm {
            inf: total - deg_u,
            finite: coeffs,
        }
    }

    fn from_leading(form: &Poly, d: u32) -> Self {
        Self::from_coeffs((0..=d).map(|i| form.coeff(i, d - i)).collect())
    }

    /// Number of roots on the projective line, with multiplicity.
    fn degree(&self) -> u32 {
        self.finite.len().saturating_sub(1) as u32 + self.inf
    }

    fn gcd(&self, other: &BinForm) -> BinForm {
        BinForm {
            finite: upoly_gcd(&self.finite, &other.finite),
            inf: self.inf.min(other.inf),
        }
    }

    fn square_free(&self) -> BinForm {
        let g = upoly_gcd(&self.finite, &derivative(&self.finite));
        BinForm {
            finite: upoly_div(&self.finite, &g),
            inf: self.inf.min(1),
        }
    }

    /// Primitive integer coefficients of `X^i Y^(k-i)`, leading entry positive.
    fn integer_coeffs(&self) -> Vec<BigInt> {
        let mut coeffs = self.finite.clone();
        coeffs.extend(std::iter::repeat(Rat::zero()).take(self.inf as usize));
        let m = coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let mut ints: Vec<BigInt> = coeffs
            .iter()
            .map(|c| c.numer() * (&m / c.denom()))
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        let lead_neg = ints
            .iter()
            .rev()
            .find(|c| !c.is_zero())
            .is_some_and(|c| c.is_negative());
        for c in ints.iter_mut() {
            *c = &*c / &g;
            if lead_neg {
                *c = -&*c;
            }
        }
        ints
    }
}

fn trim(p: &mut Vec<Rat>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn derivative(p: &[Rat]) -> Vec<Rat> {
    let mut out: Vec<Rat> = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * rat(i as i64))
        .collect();
    trim(&mut out);
    out
}

/// Quotient and remainder of univariate division.
fn upoly_divrem(a: &[Rat], b: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    assert!(!b.is_empty(), "division by the zero polynomial");
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut q = vec![Rat::zero(); r.len() - db];
    let lead = &b[db];
    while r.len() > db && !r.is_empty() {
        let k = r.len() - 1 - db;
        let c = r.last().expect("nonempty") / lead;
        for (i, bc) in b.iter().enumerate() {
            r[k + i] = &r[k + i] - &c * bc;
        }
        q[k] = c;
        trim(&mut r);
    }
    trim(&mut q);
    (q, r)
}

fn upoly_div(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    upoly_divrem(a, b).0
}

/// Monic gcd; the gcd of two zero polynomials is zero.
fn upoly_gcd(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let (_, r) = upoly_divrem(&a, &b);
        a = b;
        b = r;
    }
    if let Some(lead) = a.last().cloned() {
        for c in a.iter_mut() {
            *c = &*c / &lead;
        }
    }
    a
}
