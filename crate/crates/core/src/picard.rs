//! Intersection calculus on the surface `V` obtained by resolving a degree-`d`
//! Hénon map.
//!
//! `Pic(V)` has the basis `H#, E_1..E_{2d-1}, F_1..F_{2d-1}`: the strict
//! transform of the line at infinity and the exceptional curves over the
//! two indeterminacy points. The intersection form is read off the
//! configuration (a chain for each point, with `E_1` attached to `E_d`),
//! and the pullbacks of a line along the blow-down `π` and the two extended
//! morphisms `φ = f∘π`, `ψ = f^{-1}∘π` solve small linear systems.

use std::fmt;
use std::ops::{Add, Sub};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::scalar::Scalar;

/// Labelled basis of `Pic(V)` for a given `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PicBasis {
    d: u32,
}

impl PicBasis {
    pub fn new(d: u32) -> Result<Self> {
        if d < 2 {
            return Err(Error::OutOfRange(format!("d must be at least 2, got {d}")));
        }
        Ok(PicBasis { d })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// `4d - 1`.
    pub fn dim(&self) -> usize {
        4 * self.d as usize - 1
    }

    /// Number of exceptional curves over each point, `2d - 1`.
    pub fn chain_len(&self) -> usize {
        2 * self.d as usize - 1
    }

    pub fn h(&self) -> usize {
        0
    }

    /// Index of `E_i`, `1 <= i <= 2d - 1`.
    pub fn e(&self, i: usize) -> usize {
        debug_assert!((1..=self.chain_len()).contains(&i));
        i
    }

    /// Index of `F_j`, `1 <= j <= 2d - 1`.
    pub fn f(&self, j: usize) -> usize {
        debug_assert!((1..=self.chain_len()).contains(&j));
        self.chain_len() + j
    }

    pub fn labels(&self) -> Vec<String> {
        let n = self.chain_len();
        let mut out = vec!["H#".to_string()];
        out.extend((1..=n).map(|i| format!("E{i}")));
        out.extend((1..=n).map(|j| format!("F{j}")));
        out
    }

    /// Exchange the `E` and `F` blocks.
    pub fn mirror_index(&self, k: usize) -> usize {
        let n = self.chain_len();
        match k {
            0 => 0,
            k if k <= n => k + n,
            k => k - n,
        }
    }
}

/// Divisor class with coefficients over [`PicBasis`].
#[derive(Clone, Debug, PartialEq)]
pub struct DivisorClass<F> {
    basis: PicBasis,
    coeffs: Vec<F>,
}

impl<F: Scalar> DivisorClass<F> {
    pub fn zero(basis: PicBasis) -> Self {
        DivisorClass {
            basis,
            coeffs: vec![F::zero(); basis.dim()],
        }
    }

    pub fn from_coeffs(basis: PicBasis, coeffs: Vec<F>) -> Result<Self> {
        if coeffs.len() != basis.dim() {
            return Err(Error::Input(format!(
                "expected {} coefficients, got {}",
                basis.dim(),
                coeffs.len()
            )));
        }
        Ok(DivisorClass { basis, coeffs })
    }

    pub fn basis(&self) -> PicBasis {
        self.basis
    }

    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &F {
        &self.coeffs[k]
    }

    fn set(&mut self, k: usize, v: F) {
        self.coeffs[k] = v;
    }

    pub fn scale(&self, c: &F) -> Self {
        DivisorClass {
            basis: self.basis,
            coeffs: self.coeffs.iter().map(|v| v.mul_ref(c)).collect(),
        }
    }

    /// The `E <-> F` swap.
    pub fn mirror(&self) -> Self {
        let mut out = Self::zero(self.basis);
        for (k, v) in self.coeffs.iter().enumerate() {
            out.set(self.basis.mirror_index(k), v.clone());
        }
        out
    }

    /// Intersection number against `other` under `form`.
    pub fn dot(&self, other: &Self, form: &Matrix<F>) -> F {
        linalg::bilinear(&self.coeffs, form, &other.coeffs)
    }

    /// Every coefficient is nonnegative.
    pub fn is_effective(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative_val())
    }
}

impl<F: Scalar> Add for &DivisorClass<F> {
    type Output = DivisorClass<F>;
    fn add(self, rhs: &DivisorClass<F>) -> DivisorClass<F> {
        DivisorClass {
            basis: self.basis,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a.add_ref(b))
                .collect(),
        }
    }
}

impl<F: Scalar> Sub for &DivisorClass<F> {
    type Output = DivisorClass<F>;
    fn sub(self, rhs: &DivisorClass<F>) -> DivisorClass<F> {
        DivisorClass {
            basis: self.basis,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a.sub_ref(b))
                .collect(),
        }
    }
}

impl<F: Scalar + fmt::Display> fmt::Display for DivisorClass<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels = self.basis.labels();
        let mut first = true;
        for (c, label) in self.coeffs.iter().zip(&labels) {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative_val();
            match (first, neg) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            let a = c.abs_val();
            if a.is_one() {
                write!(f, "{label}")?;
            } else {
                write!(f, "{a}*{label}")?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Symmetric intersection matrix of `Pic(V)`.
pub fn intersection_matrix(d: u32) -> Result<Matrix<i64>> {
    let b = PicBasis::new(d)?;
    let n = b.chain_len();
    let du = d as usize;
    let mut m = vec![vec![0i64; b.dim()]; b.dim()];
    let mut link = |i: usize, j: usize| {
        m[i][j] = 1;
        m[j][i] = 1;
    };
    for side in [PicBasis::e, PicBasis::f] {
        let idx = |i| side(&b, i);
        link(b.h(), idx(2));
        link(idx(1), idx(du));
        for i in 2..n {
            link(idx(i), idx(i + 1));
        }
    }
    m[b.h()][b.h()] = -3;
    for side in [PicBasis::e, PicBasis::f] {
        let idx = |i| side(&b, i);
        m[idx(1)][idx(1)] = -(d as i64);
        for i in 2..n {
            m[idx(i)][idx(i)] = -2;
        }
        m[idx(n)][idx(n)] = -1;
    }
    Ok(m)
}

/// The intersection matrix with entries in `F`.
pub fn intersection_form<F: Scalar>(d: u32) -> Result<Matrix<F>> {
    Ok(intersection_matrix(d)?
        .into_iter()
        .map(|row| row.into_iter().map(F::from_i64).collect())
        .collect())
}

/// Pullbacks of a line `(π*H, φ*H, ψ*H)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pullbacks<F> {
    pub pi: DivisorClass<F>,
    pub phi: DivisorClass<F>,
    pub psi: DivisorClass<F>,
}

/// Solve the defining intersection conditions:
/// `π*H · H# = 1` and zero against every exceptional curve;
/// `φ*H · E_{2d-1} = 1` and zero against every other basis curve;
/// `ψ*H` is the mirror system.
pub fn solve_pullbacks<F: Scalar>(d: u32) -> Result<Pullbacks<F>> {
    let b = PicBasis::new(d)?;
    let form = intersection_form::<F>(d)?;
    let unit = |k: usize| -> Vec<F> {
        let mut v = vec![F::zero(); b.dim()];
        v[k] = F::one();
        v
    };
    let n = b.chain_len();
    let rhs = [unit(b.h()), unit(b.e(n)), unit(b.f(n))];
    let mut sols = linalg::solve_many(&form, &rhs)?.into_iter();
    let mut next = || DivisorClass {
        basis: b,
        coeffs: sols.next().expect("three solutions"),
    };
    Ok(Pullbacks {
        pi: next(),
        phi: next(),
        psi: next(),
    })
}

/// Closed-form pullbacks as displayed coefficient formulas.
pub fn closed_form_pullbacks<F: Scalar>(d: u32) -> Result<Pullbacks<F>> {
    let b = PicBasis::new(d)?;
    let n = b.chain_len();
    let du = d as usize;
    let c = |v: usize| F::from_i64(v as i64);

    let mut pi = DivisorClass::zero(b);
    pi.set(b.h(), F::one());
    for i in 1..=n {
        let v = if i <= du { c(i) } else { c(du) };
        pi.set(b.e(i), v.clone());
        pi.set(b.f(i), v);
    }

    let mut phi = DivisorClass::zero(b);
    phi.set(b.h(), c(du));
    phi.set(b.e(1), F::one());
    for i in 2..=du {
        phi.set(b.e(i), c(du));
    }
    for i in du + 1..=n {
        phi.set(b.e(i), c(2 * du - i));
    }
    for j in 1..=n {
        let v = if j <= du { c(j * du) } else { c(du * du) };
        phi.set(b.f(j), v);
    }

    let psi = phi.mirror();
    Ok(Pullbacks { pi, phi, psi })
}

/// `D = φ*H + ψ*H - (d + 1/d) π*H` from the solved pullbacks.
pub fn effective_excess<F: Scalar>(d: u32) -> Result<DivisorClass<F>> {
    let p = solve_pullbacks::<F>(d)?;
    let df = F::from_i64(d as i64);
    let weight = df.clone() + F::one() / df;
    Ok(&(&p.phi + &p.psi) - &p.pi.scale(&weight))
}

/// Closed-form coefficients of `D`.
pub fn closed_form_excess<F: Scalar>(d: u32) -> Result<DivisorClass<F>> {
    let b = PicBasis::new(d)?;
    let n = b.chain_len();
    let du = d as i64;
    let df = F::from_i64(du);
    let c = F::from_i64;
    let mut out = DivisorClass::zero(b);
    out.set(b.h(), c(du * du - 1) / df.clone());
    let e1 = c(du - 1) / df.clone();
    out.set(b.e(1), e1.clone());
    out.set(b.f(1), e1);
    for i in 2..=n {
        let ii = i as i64;
        let v = if ii <= du {
            c(du * du - ii) / df.clone()
        } else {
            c(2 * du - ii - 1)
        };
        out.set(b.e(i), v.clone());
        out.set(b.f(i), v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rat;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n.into(), d.into())
    }

    fn ints(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&c| r(c, 1)).collect()
    }

    #[test]
    fn d2_matrix() {
        let m = intersection_matrix(2).unwrap();
        assert_eq!(m.len(), 7);
        let diag: Vec<i64> = (0..7).map(|i| m[i][i]).collect();
        assert_eq!(diag, vec![-3, -2, -2, -1, -2, -2, -1]);
        for i in 0..7 {
            for j in 0..7 {
                assert_eq!(m[i][j], m[j][i]);
            }
        }
        // E1-E2 (E_1 meets E_d), E2-E3, H#-E2, and the F mirror.
        assert_eq!(m[1][2], 1);
        assert_eq!(m[2][3], 1);
        assert_eq!(m[0][2], 1);
        assert_eq!(m[0][5], 1);
        assert_eq!(m[1][3], 0);
    }

    #[test]
    fn d3_self_intersections() {
        let b = PicBasis::new(3).unwrap();
        let m = intersection_matrix(3).unwrap();
        assert_eq!(m[b.e(1)][b.e(1)], -3);
        assert_eq!(m[b.f(1)][b.f(1)], -3);
        assert_eq!(m[b.e(5)][b.e(5)], -1);
        assert_eq!(m[b.e(1)][b.e(3)], 1);
        assert_eq!(m[b.e(1)][b.e(2)], 0);
        assert!(intersection_matrix(1).is_err());
    }

    #[test]
    fn d2_pullbacks() {
        let b = PicBasis::new(2).unwrap();
        let p = solve_pullbacks::<Rat>(2).unwrap();
        assert_eq!(p.pi, DivisorClass::from_coeffs(b, ints(&[1, 1, 2, 2, 1, 2, 2])).unwrap());
        assert_eq!(p.phi, DivisorClass::from_coeffs(b, ints(&[2, 1, 2, 1, 2, 4, 4])).unwrap());
        assert_eq!(p.psi, p.phi.mirror());
        assert_eq!(p, closed_form_pullbacks::<Rat>(2).unwrap());
    }

    #[test]
    fn closed_form_spot_values() {
        let b5 = PicBasis::new(5).unwrap();
        let p5 = closed_form_pullbacks::<Rat>(5).unwrap();
        assert_eq!(p5.phi.coeff(b5.e(7)), &r(3, 1));
        let b3 = PicBasis::new(3).unwrap();
        let p3 = closed_form_pullbacks::<Rat>(3).unwrap();
        assert_eq!(p3.phi.coeff(b3.f(2)), &r(6, 1));
    }

    #[test]
    fn d2_excess() {
        let b = PicBasis::new(2).unwrap();
        let d = effective_excess::<Rat>(2).unwrap();
        let expect = vec![r(3, 2), r(1, 2), r(1, 1), r(0, 1), r(1, 2), r(1, 1), r(0, 1)];
        assert_eq!(d, DivisorClass::from_coeffs(b, expect).unwrap());
        assert!(d.is_effective());
        let b4 = PicBasis::new(4).unwrap();
        assert_eq!(effective_excess::<Rat>(4).unwrap().coeff(b4.e(3)), &r(13, 4));
    }

    #[test]
    fn table_through_twelve() {
        for d in 2..=12u32 {
            let b = PicBasis::new(d).unwrap();
            let form = intersection_form::<Rat>(d).unwrap();
            let solved = solve_pullbacks::<Rat>(d).unwrap();
            assert_eq!(solved, closed_form_pullbacks::<Rat>(d).unwrap(), "d = {d}");
            let ex = effective_excess::<Rat>(d).unwrap();
            assert_eq!(ex, closed_form_excess::<Rat>(d).unwrap());
            assert!(ex.is_effective());
            assert_eq!(ex.coeff(b.e(b.chain_len())), &r(0, 1));
            let one = r(1, 1);
            let dd = r(d as i64, 1);
            assert_eq!(solved.pi.dot(&solved.pi, &form), one);
            assert_eq!(solved.phi.dot(&solved.phi, &form), one);
            assert_eq!(solved.psi.dot(&solved.psi, &form), one);
            assert_eq!(solved.pi.dot(&solved.phi, &form), dd);
            assert_eq!(solved.pi.dot(&solved.psi, &form), dd);
        }
    }

    #[test]
    fn display_skips_zero_terms() {
        let d = effective_excess::<Rat>(2).unwrap();
        assert_eq!(d.to_string(), "3/2*H# + 1/2*E1 + E2 + 1/2*F1 + F2");
    }

    #[test]
    fn float_solve_agrees() {
        let exact = solve_pullbacks::<Rat>(4).unwrap();
        let float = solve_pullbacks::<f64>(4).unwrap();
        for (a, b) in exact.phi.coeffs().iter().zip(float.phi.coeffs()) {
            assert!((a.to_f64() - b).abs() < 1e-9);
        }
    }
}
