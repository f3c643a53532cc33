//! Orbits of a regular automorphism: split heights recovered from
//! neighbouring canonical heights, the orbit height, and point counts along
//! an orbit.
//!
//! Along a non-periodic orbit `ĥ(f^l x) = δ^l ĥ⁺(x) + δ₋^-l ĥ⁻(x)`, so every
//! canonical count reduces to [`count_exponential`]-style scans of two
//! estimates. Naive counts iterate the orbit itself: exactly while the
//! coordinates are moderate, then (for integral orbits) with outward-rounded
//! intervals.

use std::fmt;
use std::fmt::Write as _;

use num_traits::Float;
use serde::Serialize;

use crate::canonical::{HeightEngine, HeightEstimate, PeriodicVerdict};
use crate::error::{Error, Result};
use crate::heights::{naive_height_affine, AffinePoint, Direction, LiftedPoint};
use crate::interval::{eval_terms, BigInterval};
use crate::io::format_real;
use crate::scalar::Scalar;

/// Iteration limit handed to the periodicity test before any scan.
pub const DEFAULT_MAX_ITER: usize = 200;
/// Decimal digits after which integral orbits continue in intervals.
pub const EXACT_DIGITS: u64 = 10_000;
const MAX_SCAN_STEPS: usize = 10_000;
/// Widest acceptable height bracket from interval continuation.
const MAX_BRACKET: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HeightKind {
    Naive,
    Canonical,
}

/// Height of `f^l x` bracketed as `lo <= h <= hi`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub l: i64,
    pub lo: f64,
    pub hi: f64,
}

/// Points of an orbit below a threshold. `ambiguous` counts samples whose
/// bracket straddles the threshold; they are not included in `count`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Count {
    pub count: usize,
    pub ambiguous: usize,
    /// Smallest and largest `l` counted or ambiguous.
    pub range: Option<(i64, i64)>,
}

/// Errors out unless the point is certified non-periodic.
pub fn require_aperiodic(engine: &HeightEngine, x: &AffinePoint) -> Result<()> {
    match engine.is_periodic(x, DEFAULT_MAX_ITER) {
        PeriodicVerdict::NotPeriodic { .. } => Ok(()),
        PeriodicVerdict::Periodic { period } => Err(Error::Precondition(format!(
            "point {x} is periodic with period {period}"
        ))),
        PeriodicVerdict::Undecided { iterations, .. } => Err(Error::Undecided(iterations)),
    }
}

/// Height samples of one orbit, scanned far enough in both directions to
/// answer [`OrbitScan::count`] for every threshold up to `t_max`.
#[derive(Clone, Debug)]
pub struct OrbitScan {
    kind: HeightKind,
    patience: usize,
    t_max: f64,
    /// `l = 0, 1, 2, ...`
    fwd: Vec<Sample>,
    /// `l = 0, -1, -2, ...`
    bwd: Vec<Sample>,
}

impl OrbitScan {
    pub fn new(engine: &HeightEngine, x: &AffinePoint, kind: HeightKind, t_max: f64) -> Result<Self> {
        if !(t_max > 0.0) || !t_max.is_finite() {
            return Err(Error::Precondition(format!("threshold must be positive, got {t_max}")));
        }
        require_aperiodic(engine, x)?;
        let (fwd, bwd) = match kind {
            HeightKind::Naive => (
                naive_side(engine, x, Direction::Fwd, t_max)?,
                naive_side(engine, x, Direction::Inv, t_max)?,
            ),
            HeightKind::Canonical => {
                let a = engine.hplus(x)?;
                let b = engine.hminus(x)?;
                (
                    canonical_side(engine, &a, &b, Direction::Fwd, t_max)?,
                    canonical_side(engine, &a, &b, Direction::Inv, t_max)?,
                )
            }
        };
        Ok(OrbitScan {
            kind,
            patience: engine.patience(),
            t_max,
            fwd,
            bwd,
        })
    }

    pub fn kind(&self) -> HeightKind {
        self.kind
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// All samples ordered by `l`.
    pub fn samples(&self) -> Vec<Sample> {
        let mut out: Vec<Sample> = self.bwd.iter().skip(1).rev().cloned().collect();
        out.extend(self.fwd.iter().cloned());
        out
    }

    /// `#{l : h(f^l x) <= t}`, walking each direction until `patience`
    /// consecutive samples exceed `t`.
    pub fn count(&self, t: f64) -> Result<Count> {
        if t > self.t_max {
            return Err(Error::OutOfRange(format!(
                "threshold {t} beyond the scanned range {}",
                self.t_max
            )));
        }
        let mut total = Count {
            count: 0,
            ambiguous: 0,
            range: None,
        };
        for (side, skip_origin) in [(&self.fwd, false), (&self.bwd, true)] {
            let mut run = 0;
            let mut finished = false;
            for (i, s) in side.iter().enumerate() {
                if s.lo > t {
                    run += 1;
                    if run >= self.patience {
                        finished = true;
                        break;
                    }
                    continue;
                }
                run = 0;
                if skip_origin && i == 0 {
                    continue;
                }
                if s.hi <= t {
                    total.count += 1;
                } else {
                    total.ambiguous += 1;
                }
                total.range = Some(match total.range {
                    None => (s.l, s.l),
                    Some((a, b)) => (a.min(s.l), b.max(s.l)),
                });
            }
            if !finished {
                return Err(Error::OutOfRange(format!(
                    "scan ended before {} samples exceeded {t}",
                    self.patience
                )));
            }
        }
        Ok(total)
    }
}

fn signed(dir: Direction, l: usize) -> i64 {
    match dir {
        Direction::Fwd => l as i64,
        Direction::Inv => -(l as i64),
    }
}

fn naive_side(engine: &HeightEngine, x: &AffinePoint, dir: Direction, t_max: f64) -> Result<Vec<Sample>> {
    let patience = engine.patience();
    let h0 = naive_height_affine(x);
    let mut out = vec![Sample { l: 0, lo: h0, hi: h0 }];
    let mut run = usize::from(h0 > t_max);
    let mut cur = engine.to_core(x);
    let mut l = 0usize;
    let continue_in_intervals = engine.integral_core() && x.is_integral();
    while run < patience {
        if continue_in_intervals && cur.digits() > EXACT_DIGITS {
            return interval_tail(engine, cur, dir, t_max, out, run, l);
        }
        if l >= MAX_SCAN_STEPS {
            return Err(Error::Undecided(l));
        }
        cur = engine.step(&cur, dir);
        l += 1;
        if cur.digits() > engine.digit_cap() {
            return Err(Error::DigitCap {
                cap: engine.digit_cap(),
                step: signed(dir, l),
            });
        }
        let h = naive_height_affine(&engine.from_core(&cur));
        out.push(Sample {
            l: signed(dir, l),
            lo: h,
            hi: h,
        });
        run = if h > t_max { run + 1 } else { 0 };
    }
    Ok(out)
}

/// Continues an integral orbit (`z = 1`) in interval arithmetic.
fn interval_tail(
    engine: &HeightEngine,
    start: LiftedPoint,
    dir: Direction,
    t_max: f64,
    mut out: Vec<Sample>,
    mut run: usize,
    mut l: usize,
) -> Result<Vec<Sample>> {
    debug_assert!(start.z == 1.into());
    let lift = engine.lift(dir);
    let terms = [lift.affine_terms(0), lift.affine_terms(1)];
    let gamma = engine
        .gamma_lift()
        .map(|g| [g.affine_terms(0), g.affine_terms(1)]);
    let mut ix = BigInterval::exact(start.x);
    let mut iy = BigInterval::exact(start.y);
    while run < engine.patience() {
        if l >= MAX_SCAN_STEPS {
            return Err(Error::Undecided(l));
        }
        let nx = eval_terms(&terms[0], &ix, &iy);
        let ny = eval_terms(&terms[1], &ix, &iy);
        ix = nx;
        iy = ny;
        l += 1;
        let (px, py) = match &gamma {
            Some(g) => (eval_terms(&g[0], &ix, &iy), eval_terms(&g[1], &ix, &iy)),
            None => (ix.clone(), iy.clone()),
        };
        let (lx, hx) = px.log_abs_bounds();
        let (ly, hy) = py.log_abs_bounds();
        let lo = lx.max(ly).max(0.0);
        let hi = hx.max(hy).max(0.0);
        if hi - lo > MAX_BRACKET * (1.0 + hi) {
            return Err(Error::Precision(signed(dir, l)));
        }
        out.push(Sample {
            l: signed(dir, l),
            lo,
            hi,
        });
        run = if lo > t_max { run + 1 } else { 0 };
    }
    Ok(out)
}

/// `[max(v - e, 0), v + e]` for an estimate with budget `e`.
fn bracket(est: &HeightEstimate) -> (f64, f64) {
    let e = est.budget();
    ((est.value - e).max(0.0), est.value + e)
}

fn canonical_side(
    engine: &HeightEngine,
    a: &HeightEstimate,
    b: &HeightEstimate,
    dir: Direction,
    t_max: f64,
) -> Result<Vec<Sample>> {
    let (d, dm) = (engine.delta() as f64, engine.delta_minus() as f64);
    let (a_lo, a_hi) = bracket(a);
    let (b_lo, b_hi) = bracket(b);
    let mut out = Vec::new();
    let mut run = 0;
    let mut k = 0usize;
    while run < engine.patience() {
        if k > MAX_SCAN_STEPS {
            return Err(Error::Undecided(k));
        }
        let l = signed(dir, k) as i32;
        let (wp, wm) = (d.powi(l), dm.powi(-l));
        let lo = wp * a_lo + wm * b_lo;
        let hi = wp * a_hi + wm * b_hi;
        out.push(Sample { l: l as i64, lo, hi });
        run = if lo > t_max { run + 1 } else { 0 };
        k += 1;
    }
    Ok(out)
}

/// `#{l : h(f^l x) <= t}` for one threshold.
pub fn count_below(engine: &HeightEngine, x: &AffinePoint, t: f64, kind: HeightKind) -> Result<Count> {
    OrbitScan::new(engine, x, kind, t)?.count(t)
}

/// Counts for several thresholds from one scan.
pub fn counts_below(
    engine: &HeightEngine,
    x: &AffinePoint,
    ts: &[f64],
    kind: HeightKind,
) -> Result<Vec<Count>> {
    let t_max = ts.iter().cloned().fold(f64::NAN, f64::max);
    let scan = OrbitScan::new(engine, x, kind, t_max)?;
    ts.iter().map(|&t| scan.count(t)).collect()
}

/// `(ĥ⁺, ĥ⁻)` from `ĥ(f x)` and `ĥ(f^-1 x)`:
/// `ĥ⁺ = K (δ₋ ĥ(f x) - ĥ(f^-1 x)/δ₋)`, `ĥ⁻ = K (δ ĥ(f^-1 x) - ĥ(f x)/δ)`,
/// `K = δδ₋ / ((δδ₋)^2 - 1)`.
pub fn split_from_neighbors<S: Scalar>(h_fwd: &S, h_bwd: &S, delta: u32, delta_minus: u32) -> (S, S) {
    let d = S::from_i64(delta as i64);
    let dm = S::from_i64(delta_minus as i64);
    let dd = d.mul_ref(&dm);
    let k = dd.clone() / (dd.mul_ref(&dd) - S::one());
    let plus = k.mul_ref(&(dm.mul_ref(h_fwd) - h_bwd.clone() / dm.clone()));
    let minus = k.mul_ref(&(d.mul_ref(h_bwd) - h_fwd.clone() / d));
    (plus, minus)
}

/// [`split_from_neighbors`] applied to canonical-height estimates at the two
/// neighbours of `x`.
pub fn hpm_from_h(engine: &HeightEngine, x: &AffinePoint) -> Result<(f64, f64)> {
    let y = engine.to_core(x);
    let hf = engine.hcanonical_core(&engine.step(&y, Direction::Fwd))?.value;
    let hb = engine.hcanonical_core(&engine.step(&y, Direction::Inv))?.value;
    Ok(split_from_neighbors(&hf, &hb, engine.delta(), engine.delta_minus()))
}

/// Error budget of [`hpm_from_h`] implied by the budgets of the two
/// neighbouring estimates.
pub fn hpm_budget(engine: &HeightEngine, x: &AffinePoint) -> Result<(f64, f64)> {
    let y = engine.to_core(x);
    let ef = engine.hcanonical_core(&engine.step(&y, Direction::Fwd))?.budget();
    let eb = engine.hcanonical_core(&engine.step(&y, Direction::Inv))?.budget();
    let (d, dm) = (engine.delta() as f64, engine.delta_minus() as f64);
    let k = d * dm / ((d * dm).powi(2) - 1.0);
    Ok((k * (dm * ef + eb / dm), k * (d * eb + ef / d)))
}

/// Canonical height of an orbit; `-∞` exactly for finite orbits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitHeight {
    NegInfinity,
    Finite(f64),
}

impl OrbitHeight {
    pub fn finite(&self) -> Option<f64> {
        match self {
            OrbitHeight::Finite(v) => Some(*v),
            OrbitHeight::NegInfinity => None,
        }
    }
}

impl fmt::Display for OrbitHeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrbitHeight::NegInfinity => write!(f, "-inf"),
            OrbitHeight::Finite(v) => write!(f, "{}", format_real(*v)),
        }
    }
}

/// `log ĥ⁺/log δ + log ĥ⁻/log δ₋` and its error from the two budgets.
fn orbit_height_from(a: &HeightEstimate, b: &HeightEstimate, delta: u32, delta_minus: u32) -> Result<(f64, f64)> {
    if !(a.value > 0.0 && b.value > 0.0) {
        return Err(Error::Precondition(
            "split heights are not positive at this depth".into(),
        ));
    }
    let (ld, ldm) = ((delta as f64).ln(), (delta_minus as f64).ln());
    let value = a.value.ln() / ld + b.value.ln() / ldm;
    let rel = |e: &HeightEstimate| {
        let m = e.value - e.budget();
        if m > 0.0 {
            (e.value / m).ln()
        } else {
            f64::INFINITY
        }
    };
    Ok((value, rel(a) / ld + rel(b) / ldm))
}

pub fn orbit_height(engine: &HeightEngine, x: &AffinePoint) -> Result<OrbitHeight> {
    match engine.is_periodic(x, DEFAULT_MAX_ITER) {
        PeriodicVerdict::Periodic { .. } => Ok(OrbitHeight::NegInfinity),
        PeriodicVerdict::Undecided { iterations, .. } => Err(Error::Undecided(iterations)),
        PeriodicVerdict::NotPeriodic { .. } => {
            let a = engine.hplus(x)?;
            let b = engine.hminus(x)?;
            let (v, _) = orbit_height_from(&a, &b, engine.delta(), engine.delta_minus())?;
            Ok(OrbitHeight::Finite(v))
        }
    }
}

/// `1/log δ + 1/log δ₋`.
pub fn kappa(delta: u32, delta_minus: u32) -> f64 {
    1.0 / (delta as f64).ln() + 1.0 / (delta_minus as f64).ln()
}

/// Half-width `log 2/log δ + log 2/log δ₋ + 1` of the counting band.
pub fn band_half_width(delta: u32, delta_minus: u32) -> f64 {
    std::f64::consts::LN_2 * kappa(delta, delta_minus) + 1.0
}

/// One row of a counting table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Enclosure {
    #[serde(rename = "T")]
    pub t: f64,
    pub observed: usize,
    pub ambiguous: usize,
    /// `κ log T - ĥ(O)`.
    pub predicted: f64,
    pub half_width: f64,
    /// Widening from the error of `ĥ(O)`.
    pub slack: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

/// Canonical counts against the band `κ log T - ĥ(O) ± w` for each `T`.
pub fn counting_table(engine: &HeightEngine, x: &AffinePoint, ts: &[f64]) -> Result<Vec<Enclosure>> {
    require_aperiodic(engine, x)?;
    let (d, dm) = (engine.delta(), engine.delta_minus());
    let a = engine.hplus(x)?;
    let b = engine.hminus(x)?;
    let (h_o, err) = orbit_height_from(&a, &b, d, dm)?;
    let k = kappa(d, dm);
    for &t in ts {
        if !(t > 0.0) || k * t.ln() < h_o {
            return Err(Error::OutOfRange(format!(
                "T = {} is below the orbit threshold: κ log T < ĥ(O) = {}",
                format_real(t),
                format_real(h_o)
            )));
        }
    }
    let counts = counts_below(engine, x, ts, HeightKind::Canonical)?;
    let w = band_half_width(d, dm);
    Ok(ts
        .iter()
        .zip(counts)
        .map(|(&t, c)| {
            let predicted = k * t.ln() - h_o;
            let lower = predicted - w - err;
            let upper = predicted + w + err;
            Enclosure {
                t,
                observed: c.count,
                ambiguous: c.ambiguous,
                predicted,
                half_width: w,
                slack: err,
                lower,
                upper,
                pass: c.count as f64 >= lower && (c.count + c.ambiguous) as f64 <= upper,
            }
        })
        .collect())
}

pub fn counting_enclosure(engine: &HeightEngine, x: &AffinePoint, t: f64) -> Result<Enclosure> {
    Ok(counting_table(engine, x, &[t])?.remove(0))
}

/// Result of [`count_exponential`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpCount<F> {
    pub count: usize,
    pub lower: F,
    pub upper: F,
}

/// `#{l ∈ ℤ : δ^l A + δ₋^-l B <= T}` with the two-sided logarithmic bounds.
pub fn count_exponential<F: Float>(a: F, b: F, delta: u32, delta_minus: u32, t: F) -> Result<ExpCount<F>> {
    let zero = F::zero();
    if !(a > zero && b > zero && t > zero) {
        return Err(Error::Precondition("A, B and T must be positive".into()));
    }
    if delta < 2 || delta_minus < 2 {
        return Err(Error::Precondition("degrees must be at least 2".into()));
    }
    let cast = |v: f64| F::from(v).expect("float conversion");
    let (d, dm) = (cast(delta as f64), cast(delta_minus as f64));
    let (ld, ldm) = (d.ln(), dm.ln());
    let threshold = (a.ln() * ldm / (ld + ldm) + b.ln() * ld / (ld + ldm)).exp();
    if t < threshold {
        return Err(Error::Precondition(
            "T is below A^(log δ₋/Σ) B^(log δ/Σ)".into(),
        ));
    }
    let l_lo = ((b / t).ln() / ldm).floor().to_i64().expect("finite") - 1;
    let l_hi = ((t / a).ln() / ld).ceil().to_i64().expect("finite") + 1;
    let count = (l_lo..=l_hi)
        .filter(|&l| {
            let l = l as i32;
            d.powi(l) * a + dm.powi(-l) * b <= t
        })
        .count();
    let two = cast(2.0);
    let one = F::one();
    Ok(ExpCount {
        count,
        lower: -one + (t / (two * a)).ln() / ld + (t / (two * b)).ln() / ldm,
        upper: one + (t / a).ln() / ld + (t / b).ln() / ldm,
    })
}

/// `(ε₁, ε₂)` of the orbit minimum bounds.
pub fn epsilons(delta: u32, delta_minus: u32) -> (f64, f64) {
    let (ld, ldm) = ((delta as f64).ln(), (delta_minus as f64).ln());
    let e1 = (1.0 + ld / ldm).ln() / ld + (1.0 + ldm / ld).ln() / ldm;
    let e2 = e1 + kappa(delta, delta_minus) * ld.max(ldm);
    (e1, e2)
}

/// Check of `ĥ(O) + ε₁ <= κ min log ĥ <= ĥ(O) + ε₂` on a sampled window.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinHeightCheck {
    pub t0: f64,
    pub window: (i64, i64),
    /// Sampled `l` of smallest canonical height.
    pub l_min: i64,
    pub min_log_height: f64,
    pub orbit_height: f64,
    pub eps1: f64,
    pub eps2: f64,
    /// Combined error of `ĥ(O)` and `κ min log ĥ`.
    pub slack: f64,
    pub eps1_ok: bool,
    pub eps2_ok: bool,
}

/// Samples `ĥ(f^l x)` directly for `l` in `[⌊t₀⌋ - 1, ⌊t₀⌋ + 2]`.
pub fn min_orbit_height_bounds(engine: &HeightEngine, x: &AffinePoint) -> Result<MinHeightCheck> {
    require_aperiodic(engine, x)?;
    let (d, dm) = (engine.delta(), engine.delta_minus());
    let (ld, ldm) = ((d as f64).ln(), (dm as f64).ln());
    let a = engine.hplus(x)?;
    let b = engine.hminus(x)?;
    let (h_o, err_o) = orbit_height_from(&a, &b, d, dm)?;
    let t0 = ((b.value * ldm).ln() - (a.value * ld).ln()) / (ld + ldm);
    let base = t0.floor() as i64;
    let window = (base - 1, base + 2);

    let y = engine.to_core(x);
    let fwd_len = window.1.max(0) as u32;
    let bwd_len = (-window.0).max(0) as u32;
    let fwd = engine.orbit(&y, Direction::Fwd, fwd_len)?;
    let bwd = engine.orbit(&y, Direction::Inv, bwd_len)?;
    let mut best: Option<(i64, f64, f64)> = None;
    for l in window.0..=window.1 {
        let pt = if l >= 0 {
            &fwd[l as usize]
        } else {
            &bwd[(-l) as usize]
        };
        let est = engine.hcanonical_core(pt)?;
        if best.as_ref().map_or(true, |(_, v, _)| est.value < *v) {
            best = Some((l, est.value, est.budget()));
        }
    }
    let (l_min, g, e) = best.expect("nonempty window");
    if !(g > 0.0) {
        return Err(Error::Precondition("canonical height not positive on the window".into()));
    }
    let min_log = g.ln();
    let log_err = if g > e { (g / (g - e)).ln() } else { f64::INFINITY };
    let k = kappa(d, dm);
    let (e1, e2) = epsilons(d, dm);
    let slack = err_o + k * log_err;
    Ok(MinHeightCheck {
        t0,
        window,
        l_min,
        min_log_height: min_log,
        orbit_height: h_o,
        eps1: e1,
        eps2: e2,
        slack,
        eps1_ok: h_o + e1 <= k * min_log + slack,
        eps2_ok: k * min_log <= h_o + e2 + slack,
    })
}

/// One orbit point with its naive height and its canonical height from the
/// split identity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitSample {
    pub l: i64,
    pub point: AffinePoint,
    pub h_nv: f64,
    pub hhat: f64,
}

/// The window `f^l x`, `|l| <= radius`, of a non-periodic orbit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitRecord {
    pub base: AffinePoint,
    pub samples: Vec<OrbitSample>,
    pub hplus0: f64,
    pub hminus0: f64,
    pub orbit_height: f64,
}

impl OrbitRecord {
    pub fn build(engine: &HeightEngine, x: &AffinePoint, radius: u32) -> Result<Self> {
        require_aperiodic(engine, x)?;
        let a = engine.hplus(x)?;
        let b = engine.hminus(x)?;
        let (h_o, _) = orbit_height_from(&a, &b, engine.delta(), engine.delta_minus())?;
        let (d, dm) = (engine.delta() as f64, engine.delta_minus() as f64);
        let y = engine.to_core(x);
        let fwd = engine.orbit(&y, Direction::Fwd, radius)?;
        let bwd = engine.orbit(&y, Direction::Inv, radius)?;
        let mut samples = Vec::with_capacity(2 * radius as usize + 1);
        let lifted = bwd.iter().skip(1).rev().chain(fwd.iter());
        for (i, core_pt) in lifted.enumerate() {
            let l = i as i64 - radius as i64;
            let point = engine.from_core(core_pt);
            samples.push(OrbitSample {
                l,
                h_nv: naive_height_affine(&point),
                hhat: d.powi(l as i32) * a.value + dm.powi(-(l as i32)) * b.value,
                point,
            });
        }
        Ok(OrbitRecord {
            base: x.clone(),
            samples,
            hplus0: a.value,
            hminus0: b.value,
            orbit_height: h_o,
        })
    }

    /// `l,x,y,h_nv,hhat` with exact coordinates.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("l,x,y,h_nv,hhat\n");
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                s.l,
                s.point.x,
                s.point.y,
                format_real(s.h_nv),
                format_real(s.hhat)
            );
        }
        out
    }
}

/// `T,count,predicted,lower,upper`.
pub fn counting_csv(rows: &[Enclosure]) -> String {
    let mut out = String::from("T,count,predicted,lower,upper\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            format_real(r.t),
            r.observed,
            format_real(r.predicted),
            format_real(r.lower),
            format_real(r.upper)
        );
    }
    out
}

/// Least-squares `(slope, intercept)` of `y` against `x`.
pub fn least_squares(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// `e^a, e^(a + s), ..., e^b` with `steps` points.
pub fn exp_grid(a: f64, b: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![a.exp()],
        _ => (0..steps)
            .map(|i| (a + (b - a) * i as f64 / (steps - 1) as f64).exp())
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphism::PlaneAutomorphism;
    use crate::ratpoly::parse_poly;
    use crate::Rat;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn engine(a: i64, p: &str) -> HeightEngine {
        let f = PlaneAutomorphism::henon(Rat::from_integer(a.into()), parse_poly(p).unwrap()).unwrap();
        HeightEngine::new(f).unwrap()
    }

    fn pt(x: i64, y: i64) -> AffinePoint {
        AffinePoint::from_ints(x, y)
    }

    /// Brute-force scan over a fixed wide window.
    fn brute_exp(a: f64, b: f64, d: u32, dm: u32, t: f64) -> usize {
        (-200i32..=200)
            .filter(|&l| (d as f64).powi(l) * a + (dm as f64).powi(-l) * b <= t)
            .count()
    }

    #[test]
    fn worked_exponential_case() {
        let r = count_exponential(1.0, 1.0, 2, 2, 8.0).unwrap();
        assert_eq!(r.count, 5);
        assert!((r.lower - 3.0).abs() < 1e-12);
        assert!((r.upper - 7.0).abs() < 1e-12);
        assert_eq!(brute_exp(1.0, 1.0, 2, 2, 8.0), 5);
    }

    #[test]
    fn exponential_boundary_is_inclusive() {
        let (a, b) = (1.5, 2.25);
        let r = count_exponential(a, b, 3, 2, a + b).unwrap();
        assert!(r.count >= 1);
        assert_eq!(r.count, brute_exp(a, b, 3, 2, a + b));
    }

    #[test]
    fn exponential_precondition() {
        assert!(matches!(
            count_exponential(4.0, 4.0, 2, 2, 3.0),
            Err(Error::Precondition(_))
        ));
        assert!(count_exponential(-1.0, 1.0, 2, 2, 3.0).is_err());
    }

    #[test]
    fn exponential_random_trials() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let degs = [2u32, 3, 4, 6];
        for _ in 0..1000 {
            let d = degs[rng.gen_range(0..4)];
            let dm = degs[rng.gen_range(0..4)];
            let a: f64 = (rng.gen_range(-5.0..5.0f64)).exp();
            let b: f64 = (rng.gen_range(-5.0..5.0f64)).exp();
            let (ld, ldm) = ((d as f64).ln(), (dm as f64).ln());
            let thr = (a.ln() * ldm / (ld + ldm) + b.ln() * ld / (ld + ldm)).exp();
            let t = thr * rng.gen_range(0.0..12.0f64).exp();
            let r = count_exponential(a, b, d, dm, t).unwrap();
            assert_eq!(r.count, brute_exp(a, b, d, dm, t));
            assert!(r.lower <= r.count as f64 && r.count as f64 <= r.upper);
        }
    }

    #[test]
    fn epsilons_equal_degrees() {
        let (e1, e2) = epsilons(2, 2);
        assert!((e1 - 2.0).abs() < 1e-12);
        assert!((e2 - 4.0).abs() < 1e-12);
        assert!((band_half_width(2, 2) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn split_identity_exact() {
        // A, B arbitrary; neighbours from the scaling identities.
        let (d, dm) = (3u32, 2u32);
        let a = Rat::new(7.into(), 5.into());
        let b = Rat::new(2.into(), 9.into());
        let (rd, rdm) = (Rat::from_integer(d.into()), Rat::from_integer(dm.into()));
        let hf = &rd * &a + &b / &rdm;
        let hb = &a / &rd + &rdm * &b;
        let (p, m) = split_from_neighbors(&hf, &hb, d, dm);
        assert_eq!(p, a);
        assert_eq!(m, b);
        assert_eq!(p + m, a + b);
    }

    #[test]
    fn split_at_fixed_point_is_zero() {
        let e = engine(1, "x^2");
        let (p, m) = hpm_from_h(&e, &pt(0, 0)).unwrap();
        let (bp, bm) = hpm_budget(&e, &pt(0, 0)).unwrap();
        assert!(p.abs() <= bp && m.abs() <= bm);
    }

    #[test]
    fn split_matches_directional_estimates() {
        let e = engine(1, "x^2");
        let x = pt(3, 0);
        let (p, m) = hpm_from_h(&e, &x).unwrap();
        let hp = e.hplus(&x).unwrap();
        let hm = e.hminus(&x).unwrap();
        let tail = e.tail(Direction::Fwd, e.depth()) + e.tail(Direction::Inv, e.depth());
        assert!((p - hp.value).abs() <= 3.0 * tail, "{p} vs {}", hp.value);
        assert!((m - hm.value).abs() <= 3.0 * tail, "{m} vs {}", hm.value);
        let (bp, bm) = hpm_budget(&e, &x).unwrap();
        assert!(p >= -bp && m >= -bm);
    }

    #[test]
    fn orbit_height_of_periodic_point() {
        let e = engine(1, "x^2");
        assert_eq!(orbit_height(&e, &pt(0, 0)).unwrap(), OrbitHeight::NegInfinity);
    }

    #[test]
    fn orbit_height_constant_along_orbit() {
        let e = engine(1, "x^2");
        let x = pt(3, 0);
        let h0 = orbit_height(&e, &x).unwrap().finite().unwrap();
        let x1 = e.apply_f(&x);
        let x2 = e.apply_f(&x1);
        for y in [x1, x2] {
            let h = orbit_height(&e, &y).unwrap().finite().unwrap();
            assert!((h - h0).abs() < 1e-6, "{h} vs {h0}");
        }
    }

    #[test]
    fn count_below_small_threshold_is_zero() {
        let e = engine(1, "x^2");
        let x = pt(3, 0);
        // Every orbit point other than the origin has height >= 0; T tiny.
        let c = count_below(&e, &x, 1e-3, HeightKind::Naive).unwrap();
        assert_eq!(c.count, 0);
        let c = count_below(&e, &x, 1e-3, HeightKind::Canonical).unwrap();
        assert_eq!(c.count + c.ambiguous, 0);
    }

    #[test]
    fn naive_count_matches_wide_enumeration() {
        let e = engine(1, "x^2");
        let x = pt(3, 0);
        let t = 50.0;
        let c = count_below(&e, &x, t, HeightKind::Naive).unwrap();
        // Oracle: exact orbit over a window of 40 steps each way.
        let mut n = usize::from(naive_height_affine(&x) <= t);
        for dir in [Direction::Fwd, Direction::Inv] {
            let mut cur = (x.x.clone(), x.y.clone());
            for _ in 0..12 {
                cur = match dir {
                    Direction::Fwd => e.core().apply(&cur.0, &cur.1),
                    Direction::Inv => e.core().apply_inv(&cur.0, &cur.1),
                };
                if naive_height_affine(&AffinePoint::new(cur.0.clone(), cur.1.clone())) <= t {
                    n += 1;
                }
            }
        }
        assert_eq!(c.count, n);
        assert_eq!(c.ambiguous, 0);
    }

    #[test]
    fn counts_are_monotone_and_orbit_invariant() {
        let e = engine(1, "x^2");
        let x = pt(3, 0);
        let ts = exp_grid(1.0, 8.0, 8);
        let a = counts_below(&e, &x, &ts, HeightKind::Naive).unwrap();
        let b = counts_below(&e, &e.apply_f(&x), &ts, HeightKind::Naive).unwrap();
        for w in a.windows(2) {
            assert!(w[0].count <= w[1].count);
        }
        assert_eq!(
            a.iter().map(|c| c.count).collect::<Vec<_>>(),
            b.iter().map(|c| c.count).collect::<Vec<_>>()
        );
    }

    #[test]
    fn interval_continuation_agrees_with_exact() {
        // Exact iteration past the switch point against the interval samples.
        let e = engine(1, "x^2");
        let x = pt(3, 0);
        let t = 5.0e4;
        let scan = OrbitScan::new(&e, &x, HeightKind::Naive, t).unwrap();
        let mut cur = e.to_core(&x);
        for s in scan.samples().iter().filter(|s| s.l > 0).take(17) {
            cur = e.step(&cur, Direction::Fwd);
            let h = cur.height();
            assert!(s.lo - 1e-9 <= h && h <= s.hi + 1e-9, "l={} {h} [{}, {}]", s.l, s.lo, s.hi);
        }
    }

    #[test]
    fn enclosure_at_e10() {
        let e = engine(1, "x^2");
        let r = counting_enclosure(&e, &pt(3, 0), 10f64.exp()).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.half_width - 3.0).abs() < 1e-12);
    }

    #[test]
    fn enclosure_out_of_range() {
        let e = engine(1, "x^2");
        let x = pt(3, 0);
        let h_o = orbit_height(&e, &x).unwrap().finite().unwrap();
        let t = (h_o / kappa(2, 2)).exp() * 0.5;
        assert!(matches!(counting_enclosure(&e, &x, t), Err(Error::OutOfRange(_))));
        // Below the threshold the count is empty.
        let c = count_below(&e, &x, t, HeightKind::Canonical).unwrap();
        assert_eq!(c.count, 0);
    }

    #[test]
    fn enclosure_just_above_threshold() {
        let e = engine(1, "x^2");
        let x = pt(3, 0);
        let h_o = orbit_height(&e, &x).unwrap().finite().unwrap();
        let t = (h_o / kappa(2, 2)).exp() * (1.0 + 1e-9);
        let r = counting_enclosure(&e, &x, t).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn periodic_point_rejected_by_counts() {
        let e = engine(1, "x^2");
        assert!(matches!(
            count_below(&e, &pt(0, 0), 10.0, HeightKind::Naive),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn min_bounds_hold() {
        let e = engine(1, "x^2");
        let r = min_orbit_height_bounds(&e, &pt(3, 0)).unwrap();
        assert!(r.eps1_ok && r.eps2_ok, "{r:?}");
        assert!(r.window.0 <= r.t0.floor() as i64 && r.t0.floor() as i64 + 1 <= r.window.1);
    }

    #[test]
    fn record_window_and_csv() {
        let e = engine(1, "x^2");
        let rec = OrbitRecord::build(&e, &pt(3, 0), 3).unwrap();
        let ls: Vec<i64> = rec.samples.iter().map(|s| s.l).collect();
        assert_eq!(ls, (-3..=3).collect::<Vec<_>>());
        assert!(rec.samples.iter().all(|s| s.h_nv >= 0.0));
        assert_eq!(rec.samples[3].point, pt(3, 0));
        assert_eq!(rec.samples[4].point, pt(9, 3));
        let csv = rec.to_csv();
        assert!(csv.starts_with("l,x,y,h_nv,hhat\n-3,"));
        assert_eq!(csv.lines().count(), 8);
    }

    #[test]
    fn least_squares_line() {
        let (s, i) = least_squares(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]).unwrap();
        assert!((s - 2.0).abs() < 1e-12 && (i - 1.0).abs() < 1e-12);
        assert!(least_squares(&[(1.0, 1.0)]).is_none());
    }

    proptest! {
        #[test]
        fn split_sums_to_total(an in 1i64..50, ad in 1i64..50, bn in 1i64..50, bd in 1i64..50,
                               di in 0usize..4, dmi in 0usize..4) {
            let degs = [2u32, 3, 4, 6];
            let (d, dm) = (degs[di], degs[dmi]);
            let a = Rat::new(an.into(), ad.into());
            let b = Rat::new(bn.into(), bd.into());
            let (rd, rdm) = (Rat::from_integer(d.into()), Rat::from_integer(dm.into()));
            let hf = &rd * &a + &b / &rdm;
            let hb = &a / &rd + &rdm * &b;
            let (p, m) = split_from_neighbors(&hf, &hb, d, dm);
            prop_assert_eq!(p + m, a + b);
        }

        #[test]
        fn exponential_bounds_bracket(la in -4.0f64..4.0, lb in -4.0f64..4.0, lt in 0.0f64..10.0,
                                      di in 0usize..4, dmi in 0usize..4) {
            let degs = [2u32, 3, 4, 6];
            let (d, dm) = (degs[di], degs[dmi]);
            let (a, b) = (la.exp(), lb.exp());
            let (ld, ldm) = ((d as f64).ln(), (dm as f64).ln());
            let t = (la * ldm / (ld + ldm) + lb * ld / (ld + ldm) + lt).exp();
            let r = count_exponential(a, b, d, dm, t).unwrap();
            prop_assert!(r.lower <= r.count as f64 && r.count as f64 <= r.upper);
        }
    }
}
