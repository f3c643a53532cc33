//! Logarithmic naive heights over the rationals and the growth constant of a
//! map.
//!
//! Heights are doubles computed from exact integers. Everything that must be
//! exact (iteration, normalisation) stays in [`BigInt`].

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::automorphism::PlaneAutomorphism;
use crate::error::{Error, Result};
use crate::ratpoly::{decimal_digits, parse_rat};
use crate::{Poly, Rat};

/// Padding applied to floating height inequalities.
pub const HEIGHT_EPS: f64 = 1.0 / (1u64 << 40) as f64;

/// Natural log of `|n|`, correct to a few ulps for any size; `-inf` at zero.
pub fn log_abs(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 1000 {
        return n.abs().to_f64().expect("fits in a double").ln();
    }
    let shift = bits - 64;
    let top = (n.abs() >> shift).to_f64().expect("64-bit value");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Primitive integer point of projective space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProjPoint {
    coords: Vec<BigInt>,
}

impl ProjPoint {
    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    /// Accepts integers that already satisfy the invariants.
    pub fn from_primitive(coords: Vec<BigInt>) -> Result<Self> {
        let p = normalize_ints(coords.clone())?;
        if p.coords != coords {
            return Err(Error::Input("coordinates are not primitive".into()));
        }
        Ok(p)
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(":"))
    }
}

fn normalize_ints(mut coords: Vec<BigInt>) -> Result<ProjPoint> {
    let g = coords.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    if g.is_zero() {
        return Err(Error::ZeroPoint);
    }
    let neg = coords
        .iter()
        .find(|c| !c.is_zero())
        .is_some_and(|c| c.is_negative());
    for c in coords.iter_mut() {
        if !g.is_one() {
            *c = &*c / &g;
        }
        if neg {
            *c = -&*c;
        }
    }
    Ok(ProjPoint { coords })
}

/// Primitive integer vector projectively equal to `raw`.
pub fn normalize(raw: &[Rat]) -> Result<ProjPoint> {
    let m = raw
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    normalize_ints(raw.iter().map(|c| c.numer() * (&m / c.denom())).collect())
}

/// `log max |x_i|` of a primitive vector.
pub fn naive_height(p: &ProjPoint) -> f64 {
    let max = p
        .coords
        .iter()
        .map(|c| c.abs())
        .max()
        .expect("nonempty point");
    log_abs(&max)
}

/// Rational point of the affine plane.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffinePoint {
    pub x: Rat,
    pub y: Rat,
}

impl AffinePoint {
    pub fn new(x: Rat, y: Rat) -> Self {
        AffinePoint { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        AffinePoint {
            x: Rat::from_integer(x.into()),
            y: Rat::from_integer(y.into()),
        }
    }

    /// Parses `X,Y` or `X Y` with rational coordinates.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if parts.len() != 2 {
            return Err(Error::Input(format!(
                "expected two coordinates, got {:?}",
                text.trim()
            )));
        }
        Ok(AffinePoint {
            x: parse_rat(parts[0])?,
            y: parse_rat(parts[1])?,
        })
    }

    pub fn is_integral(&self) -> bool {
        self.x.is_integer() && self.y.is_integer()
    }
}

impl fmt::Display for AffinePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Serialised as `{"x": "p/q", "y": "r/s"}` so that no precision is lost.
impl Serialize for AffinePoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("AffinePoint", 2)?;
        st.serialize_field("x", &self.x.to_string())?;
        st.serialize_field("y", &self.y.to_string())?;
        st.end()
    }
}

pub fn naive_height_affine(pt: &AffinePoint) -> f64 {
    LiftedPoint::from_affine(pt).height()
}

/// Primitive lift `(X : Y : Z)` of an affine point, with `Z > 0`.
///
/// Unlike [`ProjPoint`] the sign is fixed by `Z`, which keeps the affine
/// chart explicit during iteration.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LiftedPoint {
    pub x: BigInt,
    pub y: BigInt,
    pub z: BigInt,
}

impl LiftedPoint {
    pub fn from_affine(pt: &AffinePoint) -> Self {
        let z = pt.x.denom().lcm(pt.y.denom());
        LiftedPoint {
            x: pt.x.numer() * (&z / pt.x.denom()),
            y: pt.y.numer() * (&z / pt.y.denom()),
            z,
        }
    }

    pub fn to_affine(&self) -> AffinePoint {
        AffinePoint {
            x: Rat::new(self.x.clone(), self.z.clone()),
            y: Rat::new(self.y.clone(), self.z.clone()),
        }
    }

    pub fn height(&self) -> f64 {
        let m = self.x.abs().max(self.y.abs()).max(self.z.clone());
        log_abs(&m)
    }

    /// Decimal digits of the largest coordinate.
    pub fn digits(&self) -> u64 {
        decimal_digits(&self.x)
            .max(decimal_digits(&self.y))
            .max(decimal_digits(&self.z))
    }

    fn normalized(x: BigInt, y: BigInt, z: BigInt) -> Self {
        debug_assert!(z.is_positive());
        if z.is_one() {
            return LiftedPoint { x, y, z };
        }
        // Reduce the large coordinates modulo the (usually small) z first.
        let gx = z.gcd(&x.mod_floor(&z));
        let g = gx.gcd(&y.mod_floor(&gx));
        if g.is_one() {
            LiftedPoint { x, y, z }
        } else {
            LiftedPoint {
                x: x / &g,
                y: y / &g,
                z: z / &g,
            }
        }
    }
}

/// One term `c * X^i * Y^j * Z^k` of an integer form.
#[derive(Clone, Debug)]
struct FormTerm {
    i: u32,
    j: u32,
    k: u32,
    c: BigInt,
}

/// Degree-`d` integer homogenisation `(F0, F1, F2)` of a polynomial pair:
/// `F0 = m Z^d p(X/Z, Y/Z)`, `F1 = m Z^d q(X/Z, Y/Z)`, `F2 = m Z^d`, with `m`
/// the least common denominator of the coefficients.
#[derive(Clone, Debug)]
pub struct IntegerLift {
    d: u32,
    forms: [Vec<FormTerm>; 3],
    /// True when `m = 1`, so integral points stay integral.
    integral: bool,
}

impl IntegerLift {
    pub fn new(pair: &(Poly, Poly)) -> Self {
        let d = pair
            .0
            .total_degree()
            .unwrap_or(0)
            .max(pair.1.total_degree().unwrap_or(0));
        let m = pair
            .0
            .terms()
            .chain(pair.1.terms())
            .fold(BigInt::one(), |acc, (_, c)| acc.lcm(c.denom()));
        let lift = |p: &Poly| -> Vec<FormTerm> {
            p.terms()
                .map(|(mon, c)| FormTerm {
                    i: mon.x,
                    j: mon.y,
                    k: d - mon.degree(),
                    c: c.numer() * (&m / c.denom()),
                })
                .collect()
        };
        let f2 = vec![FormTerm {
            i: 0,
            j: 0,
            k: d,
            c: m.clone(),
        }];
        IntegerLift {
            d,
            forms: [lift(&pair.0), lift(&pair.1), f2],
            integral: m.is_one(),
        }
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn is_integral(&self) -> bool {
        self.integral
    }

    /// Terms `(i, j, c)` of form `k` restricted to the chart `Z = 1`.
    pub(crate) fn affine_terms(&self, k: usize) -> Vec<(u32, u32, BigInt)> {
        self.forms[k].iter().map(|t| (t.i, t.j, t.c.clone())).collect()
    }

    /// `C`: the largest absolute coefficient sum of the three forms.
    pub fn coefficient_bound(&self) -> BigInt {
        self.forms
            .iter()
            .map(|f| f.iter().fold(BigInt::zero(), |acc, t| acc + t.c.abs()))
            .max()
            .expect("three forms")
    }

    /// Image of a lifted point, renormalised to a primitive lift.
    pub fn apply(&self, p: &LiftedPoint) -> LiftedPoint {
        let pw = |v: &BigInt, skip: bool| -> Vec<BigInt> {
            let mut out = vec![BigInt::one()];
            if skip {
                return out;
            }
            for e in 1..=self.d as usize {
                let next = &out[e - 1] * v;
                out.push(next);
            }
            out
        };
        let z_one = p.z.is_one();
        let xs = pw(&p.x, false);
        let ys = pw(&p.y, false);
        let zs = pw(&p.z, z_one);
        let eval = |form: &[FormTerm]| -> BigInt {
            let mut acc = BigInt::zero();
            for t in form {
                let mut v = if t.i == 0 {
                    ys[t.j as usize].clone()
                } else if t.j == 0 {
                    xs[t.i as usize].clone()
                } else {
                    &xs[t.i as usize] * &ys[t.j as usize]
                };
                if !z_one && t.k > 0 {
                    v *= &zs[t.k as usize];
                }
                if t.c.is_one() {
                    acc += v;
                } else if (-&t.c).is_one() {
                    acc -= v;
                } else {
                    acc += v * &t.c;
                }
            }
            acc
        };
        let x = eval(&self.forms[0]);
        let y = eval(&self.forms[1]);
        let z = eval(&self.forms[2]);
        LiftedPoint::normalized(x, y, z)
    }
}

/// Time direction of a map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Fwd,
    Inv,
}

/// `c2 = log C` so that `h(f(x)) <= deg f * h(x) + c2` for every rational
/// affine point.
pub fn growth_constant(f: &PlaneAutomorphism, dir: Direction) -> f64 {
    let pair = match dir {
        Direction::Fwd => f.fwd(),
        Direction::Inv => f.inv(),
    };
    log_abs(&IntegerLift::new(pair).coefficient_bound())
}

/// Every affine rational point whose primitive lift `(X : Y : Z)` has
/// `max(|X|, |Y|, Z) <= bound`, in lexicographic order of `(Z, X, Y)`.
pub fn points_of_bounded_height(bound: u64) -> Vec<AffinePoint> {
    let b = bound as i64;
    let mut out = Vec::new();
    for z in 1..=b {
        for x in -b..=b {
            let gxz = x.gcd(&z);
            for y in -b..=b {
                if gxz.gcd(&y) == 1 {
                    out.push(AffinePoint::new(
                        Rat::new(x.into(), z.into()),
                        Rat::new(y.into(), z.into()),
                    ));
                }
            }
        }
    }
    out
}
