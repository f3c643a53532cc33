//! Canonical heights by truncated limits.
//!
//! A [`HeightEngine`] wraps a regular core map `g` and an optional conjugator
//! `Γ`, describing `f = Γ ∘ g ∘ Γ^-1`. Heights of `f` are heights of `g` at
//! `Γ^-1(x)`. The forward part is estimated by `h(g^N y) / δ^N`, the backward
//! part by `h(g^-N y) / δ₋^N`; both come with the telescoped tail bound of
//! the step inequality `h(g z) <= δ h(z) + c2`.

use std::fmt;

use serde::Serialize;

use crate::automorphism::PlaneAutomorphism;
use crate::error::{Error, Result};
use crate::heights::{growth_constant, AffinePoint, Direction, IntegerLift, LiftedPoint};
use crate::scalar::Scalar;
use crate::Rat;

/// Default truncation depth for `δ = 2`.
pub const DEFAULT_DEPTH: u32 = 12;
/// Default per-coordinate digit cap for exact iteration.
pub const DEFAULT_DIGIT_CAP: u64 = 2_000_000;
/// Default number of consecutive growth steps required by scans.
pub const DEFAULT_PATIENCE: usize = 5;

/// Depth giving roughly the same coordinate sizes as depth 12 at `δ = 2`.
pub fn default_depth(delta: u32) -> u32 {
    let n = (DEFAULT_DEPTH as f64 * std::f64::consts::LN_2 / (delta as f64).ln()).floor();
    (n as u32).clamp(2, DEFAULT_DEPTH)
}

/// Truncated canonical-height value with its error fields.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeightEstimate {
    /// `v_N`.
    pub value: f64,
    /// `v_N` plus the telescoped step bound.
    pub upper_bound: f64,
    /// `|v_N - v_{N-1}|` plus the tail; an empirical two-sided error.
    pub lower_slack: f64,
    /// Certified lower bound, only when a lower constant was supplied.
    pub rigorous_lower: Option<f64>,
    pub depth: u32,
}

impl HeightEstimate {
    /// `upper_bound - value`.
    pub fn tail(&self) -> f64 {
        self.upper_bound - self.value
    }

    /// Two-sided error budget used when comparing estimates.
    pub fn budget(&self) -> f64 {
        self.lower_slack.max(self.tail())
    }

    fn sum(&self, other: &HeightEstimate) -> HeightEstimate {
        HeightEstimate {
            value: self.value + other.value,
            upper_bound: self.upper_bound + other.upper_bound,
            lower_slack: self.lower_slack + other.lower_slack,
            rigorous_lower: None,
            depth: self.depth,
        }
    }
}

impl fmt::Display for HeightEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:.12e} (+{:.3e}, ±{:.3e})",
            self.value,
            self.tail(),
            self.lower_slack
        )
    }
}

/// Outcome of a periodicity test.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum PeriodicVerdict {
    /// `f^period(x) = x` with `period` minimal.
    Periodic { period: usize },
    /// Heights grew past the threshold in both directions and the canonical
    /// height is positive beyond its error.
    NotPeriodic {
        steps: usize,
        hhat: f64,
        budget: f64,
    },
    Undecided { iterations: usize, reason: String },
}

/// Regime of the squaring recurrence `a_{l+1} = a_l^2 - 2 D^{-2^l}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Diverges,
    TendsToOne,
    TendsToZero,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::Diverges => "diverges",
            Regime::TendsToOne => "tends_to_one",
            Regime::TendsToZero => "tends_to_zero",
        };
        write!(f, "{s}")
    }
}

/// Predicted regime plus the computed trajectory `a_0, a_1, ...`.
#[derive(Clone, Debug)]
pub struct Trajectory<S> {
    pub regime: Regime,
    pub values: Vec<S>,
}

impl<S: Scalar> Trajectory<S> {
    /// Regime read off the last computed value: beyond `10^6` diverges,
    /// within `10^-6` of zero or one settles there, anything else is open.
    pub fn observed_regime(&self) -> Option<Regime> {
        let last = self.values.last()?.to_f64();
        if last > 1e6 {
            Some(Regime::Diverges)
        } else if last.abs() < 1e-6 {
            Some(Regime::TendsToZero)
        } else if (last - 1.0).abs() < 1e-6 {
            Some(Regime::TendsToOne)
        } else {
            None
        }
    }
}

/// Iterate `a_{l+1} = a_l^2 - 2 D^{-2^l}` for `l < steps` and classify by
/// comparing `a` with `1 + 1/D`.
///
/// Iteration stops early once `a_l` exceeds `2^64`, which keeps exact
/// scalars bounded in the divergent regime.
pub fn furter_sequence_classify<S: Scalar>(a: S, d: S, steps: usize) -> Result<Trajectory<S>> {
    if d < S::from_i64(4) {
        return Err(Error::Precondition("D must be at least 4".into()));
    }
    if a < S::one() {
        return Err(Error::Precondition("a must be at least 1".into()));
    }
    if steps == 0 {
        return Err(Error::Precondition("at least one step is required".into()));
    }
    let threshold = S::one() + S::one() / d.clone();
    let regime = if a > threshold {
        Regime::Diverges
    } else if a == threshold {
        Regime::TendsToOne
    } else {
        Regime::TendsToZero
    };
    let cap = S::from_i64(1 << 32).powu(2);
    let two = S::from_i64(2);
    let mut e = S::one() / d;
    let mut values = vec![a];
    for _ in 0..steps {
        let cur = values.last().expect("nonempty").clone();
        if cur > cap {
            break;
        }
        let next = cur.mul_ref(&cur).sub_ref(&two.mul_ref(&e));
        values.push(next);
        e = e.mul_ref(&e);
    }
    Ok(Trajectory { regime, values })
}

/// Canonical height machinery for `f = Γ ∘ g ∘ Γ^-1`.
#[derive(Clone, Debug)]
pub struct HeightEngine {
    core: PlaneAutomorphism,
    gamma: Option<PlaneAutomorphism>,
    delta: u32,
    delta_minus: u32,
    c2_fwd: f64,
    c2_inv: f64,
    depth: u32,
    c_lower: Option<f64>,
    digit_cap: u64,
    patience: usize,
    lift_fwd: IntegerLift,
    lift_inv: IntegerLift,
    gamma_lifts: Option<(IntegerLift, IntegerLift)>,
}

impl HeightEngine {
    /// Engine for a regular core with `δ >= 2` and no conjugator.
    pub fn new(core: PlaneAutomorphism) -> Result<Self> {
        let delta = core.dynamical_degree()?;
        if delta < 2 {
            return Err(Error::Unsupported(
                "dynamical degree 1: triangularizable maps have no canonical height".into(),
            ));
        }
        if !core.is_regular()? {
            return Err(Error::Unsupported(
                "core map is not regular; supply a regular core and a conjugator".into(),
            ));
        }
        let delta_minus = core.inverse_degree();
        if delta_minus < 2 {
            return Err(Error::Inconsistent("inverse of a regular map has degree 1".into()));
        }
        Ok(HeightEngine {
            c2_fwd: growth_constant(&core, Direction::Fwd),
            c2_inv: growth_constant(&core, Direction::Inv),
            lift_fwd: IntegerLift::new(core.fwd()),
            lift_inv: IntegerLift::new(core.inv()),
            depth: default_depth(delta.max(delta_minus)),
            core,
            gamma: None,
            delta,
            delta_minus,
            c_lower: None,
            digit_cap: DEFAULT_DIGIT_CAP,
            patience: DEFAULT_PATIENCE,
            gamma_lifts: None,
        })
    }

    /// Use `f = gamma ∘ g ∘ gamma^-1`.
    pub fn with_conjugator(mut self, gamma: PlaneAutomorphism) -> Self {
        if gamma.is_identity() {
            self.gamma = None;
            self.gamma_lifts = None;
        } else {
            self.gamma_lifts = Some((IntegerLift::new(gamma.fwd()), IntegerLift::new(gamma.inv())));
            self.gamma = Some(gamma);
        }
        self
    }

    pub fn with_depth(mut self, depth: u32) -> Result<Self> {
        if depth < 2 {
            return Err(Error::Precondition("depth must be at least 2".into()));
        }
        self.depth = depth;
        Ok(self)
    }

    pub fn with_c_lower(mut self, c: f64) -> Self {
        self.c_lower = Some(c);
        self
    }

    pub fn with_digit_cap(mut self, cap: u64) -> Self {
        self.digit_cap = cap;
        self
    }

    pub fn with_patience(mut self, patience: usize) -> Result<Self> {
        if patience == 0 {
            return Err(Error::Precondition("patience must be at least 1".into()));
        }
        self.patience = patience;
        Ok(self)
    }

    pub fn core(&self) -> &PlaneAutomorphism {
        &self.core
    }

    pub fn conjugator(&self) -> Option<&PlaneAutomorphism> {
        self.gamma.as_ref()
    }

    pub fn delta(&self) -> u32 {
        self.delta
    }

    pub fn delta_minus(&self) -> u32 {
        self.delta_minus
    }

    pub fn c2_fwd(&self) -> f64 {
        self.c2_fwd
    }

    pub fn c2_inv(&self) -> f64 {
        self.c2_inv
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn c_lower(&self) -> Option<f64> {
        self.c_lower
    }

    pub fn digit_cap(&self) -> u64 {
        self.digit_cap
    }

    pub fn patience(&self) -> usize {
        self.patience
    }

    /// `c2 / ((δ - 1) δ^n)` in the given direction.
    pub fn tail(&self, dir: Direction, n: u32) -> f64 {
        let (c2, d) = match dir {
            Direction::Fwd => (self.c2_fwd, self.delta as f64),
            Direction::Inv => (self.c2_inv, self.delta_minus as f64),
        };
        c2 / ((d - 1.0) * d.powi(n as i32))
    }

    /// `δδ₋ / ((δ - 1)(δ₋ - 1))`.
    pub fn lower_constant_factor(&self) -> f64 {
        let (d, dm) = (self.delta as f64, self.delta_minus as f64);
        d * dm / ((d - 1.0) * (dm - 1.0))
    }

    /// `Γ^-1(x)` as a primitive lift.
    pub fn to_core(&self, x: &AffinePoint) -> LiftedPoint {
        let p = LiftedPoint::from_affine(x);
        match &self.gamma_lifts {
            Some((_, inv)) => inv.apply(&p),
            None => p,
        }
    }

    /// `Γ(y)`.
    pub fn from_core(&self, y: &LiftedPoint) -> AffinePoint {
        match &self.gamma_lifts {
            Some((fwd, _)) => fwd.apply(y).to_affine(),
            None => y.to_affine(),
        }
    }

    /// One step of the core map in the given direction.
    pub fn step(&self, y: &LiftedPoint, dir: Direction) -> LiftedPoint {
        match dir {
            Direction::Fwd => self.lift_fwd.apply(y),
            Direction::Inv => self.lift_inv.apply(y),
        }
    }

    /// `f(x)` computed through the core.
    pub fn apply_f(&self, x: &AffinePoint) -> AffinePoint {
        self.from_core(&self.step(&self.to_core(x), Direction::Fwd))
    }

    /// `f^-1(x)` computed through the core.
    pub fn apply_f_inv(&self, x: &AffinePoint) -> AffinePoint {
        self.from_core(&self.step(&self.to_core(x), Direction::Inv))
    }

    pub(crate) fn lift(&self, dir: Direction) -> &IntegerLift {
        match dir {
            Direction::Fwd => &self.lift_fwd,
            Direction::Inv => &self.lift_inv,
        }
    }

    /// Integer lift of `Γ`, when a conjugator is present.
    pub(crate) fn gamma_lift(&self) -> Option<&IntegerLift> {
        self.gamma_lifts.as_ref().map(|(fwd, _)| fwd)
    }

    /// Whether the core and conjugator keep integral points integral.
    pub fn integral_core(&self) -> bool {
        self.lift_fwd.is_integral()
            && self.lift_inv.is_integral()
            && self
                .gamma_lifts
                .as_ref()
                .map_or(true, |(a, b)| a.is_integral() && b.is_integral())
    }

    /// `y, g^±1 y, ..., g^±n y` with the digit cap enforced.
    pub fn orbit(&self, y: &LiftedPoint, dir: Direction, n: u32) -> Result<Vec<LiftedPoint>> {
        let sign: i64 = if dir == Direction::Fwd { 1 } else { -1 };
        let mut out = Vec::with_capacity(n as usize + 1);
        out.push(y.clone());
        for l in 1..=n {
            let next = self.step(out.last().expect("nonempty"), dir);
            if next.digits() > self.digit_cap {
                return Err(Error::DigitCap {
                    cap: self.digit_cap,
                    step: sign * l as i64,
                });
            }
            out.push(next);
        }
        Ok(out)
    }

    fn directional(&self, y: &LiftedPoint, dir: Direction) -> Result<HeightEstimate> {
        let n = self.depth;
        let orbit = self.orbit(y, dir, n)?;
        let d = match dir {
            Direction::Fwd => self.delta as f64,
            Direction::Inv => self.delta_minus as f64,
        };
        let v_n = orbit[n as usize].height() / d.powi(n as i32);
        let v_prev = orbit[n as usize - 1].height() / d.powi(n as i32 - 1);
        let tail = self.tail(dir, n);
        let rigorous_lower = self.c_lower.map(|c| {
            // Lower floor applied at g^N y, with the opposite part bounded by
            // its ceiling h(y) + c2'/(δ' - 1).
            let (d_other, c2_other) = match dir {
                Direction::Fwd => (self.delta_minus as f64, self.c2_inv),
                Direction::Inv => (self.delta as f64, self.c2_fwd),
            };
            let ceiling = y.height() + c2_other / (d_other - 1.0);
            let slack = self.lower_constant_factor() * c + ceiling / d_other.powi(n as i32);
            (v_n - slack / d.powi(n as i32)).max(0.0)
        });
        Ok(HeightEstimate {
            value: v_n,
            upper_bound: v_n + tail,
            lower_slack: (v_n - v_prev).abs() + tail,
            rigorous_lower,
            depth: n,
        })
    }

    /// `ĥ⁺` at a core point.
    pub fn hplus_core(&self, y: &LiftedPoint) -> Result<HeightEstimate> {
        self.directional(y, Direction::Fwd)
    }

    /// `ĥ⁻` at a core point.
    pub fn hminus_core(&self, y: &LiftedPoint) -> Result<HeightEstimate> {
        self.directional(y, Direction::Inv)
    }

    /// `ĥ = ĥ⁺ + ĥ⁻` at a core point.
    pub fn hcanonical_core(&self, y: &LiftedPoint) -> Result<HeightEstimate> {
        let plus = self.hplus_core(y)?;
        let minus = self.hminus_core(y)?;
        let mut out = plus.sum(&minus);
        if let Some(c) = self.c_lower {
            let split = plus.rigorous_lower.unwrap_or(0.0) + minus.rigorous_lower.unwrap_or(0.0);
            let floor = y.height() - self.lower_constant_factor() * c;
            out.rigorous_lower = Some(split.max(floor).max(0.0));
        }
        Ok(out)
    }

    pub fn hplus(&self, x: &AffinePoint) -> Result<HeightEstimate> {
        self.hplus_core(&self.to_core(x))
    }

    pub fn hminus(&self, x: &AffinePoint) -> Result<HeightEstimate> {
        self.hminus_core(&self.to_core(x))
    }

    pub fn hcanonical(&self, x: &AffinePoint) -> Result<HeightEstimate> {
        self.hcanonical_core(&self.to_core(x))
    }

    /// `|ĥ(f x)/δ + ĥ(f^-1 x)/δ₋ - (1 + 1/(δδ₋)) ĥ(x)|` from the value fields.
    pub fn functional_equation_residual(&self, x: &AffinePoint) -> Result<f64> {
        let y = self.to_core(x);
        let (d, dm) = (self.delta as f64, self.delta_minus as f64);
        let h0 = self.hcanonical_core(&y)?.value;
        let hf = self.hcanonical_core(&self.step(&y, Direction::Fwd))?.value;
        let hb = self.hcanonical_core(&self.step(&y, Direction::Inv))?.value;
        Ok((hf / d + hb / dm - (1.0 + 1.0 / (d * dm)) * h0).abs())
    }

    /// Error budget for the residual: the weighted tails of the three
    /// estimates involved.
    pub fn residual_budget(&self) -> f64 {
        let (d, dm) = (self.delta as f64, self.delta_minus as f64);
        let t = self.tail(Direction::Fwd, self.depth) + self.tail(Direction::Inv, self.depth);
        t / d + t / dm + (1.0 + 1.0 / (d * dm)) * t
    }

    /// Exact cycle detection plus a height-growth divergence certificate.
    pub fn is_periodic(&self, x: &AffinePoint, max_iter: usize) -> PeriodicVerdict {
        let y = self.to_core(x);
        let h0 = y.height();
        let thresholds = [
            h0 + self.c2_fwd / (self.delta as f64 - 1.0) + 1.0,
            h0 + self.c2_inv / (self.delta_minus as f64 - 1.0) + 1.0,
        ];
        let dirs = [Direction::Fwd, Direction::Inv];
        let mut cur = [y.clone(), y.clone()];
        let mut last_h = [h0, h0];
        let mut run = [0usize, 0usize];
        let mut hhat_checked = false;
        for k in 1..=max_iter {
            for s in 0..2 {
                let next = self.step(&cur[s], dirs[s]);
                if next == y {
                    return PeriodicVerdict::Periodic { period: k };
                }
                if next.digits() > self.digit_cap {
                    return PeriodicVerdict::Undecided {
                        iterations: k,
                        reason: format!("digit cap {} exceeded", self.digit_cap),
                    };
                }
                let h = next.height();
                if h > last_h[s] && h > thresholds[s] {
                    run[s] += 1;
                } else {
                    run[s] = 0;
                }
                last_h[s] = h;
                cur[s] = next;
            }
            if !hhat_checked && run[0] >= self.patience && run[1] >= self.patience {
                hhat_checked = true;
                match self.hcanonical_core(&y) {
                    Ok(est) if est.value > est.budget() => {
                        return PeriodicVerdict::NotPeriodic {
                            steps: k,
                            hhat: est.value,
                            budget: est.budget(),
                        };
                    }
                    Ok(_) => {}
                    Err(e) => {
                        return PeriodicVerdict::Undecided {
                            iterations: k,
                            reason: e.to_string(),
                        };
                    }
                }
            }
        }
        PeriodicVerdict::Undecided {
            iterations: max_iter,
            reason: "no cycle and no divergence certificate".into(),
        }
    }
}

/// Periodicity for a bare map: the full certificate when the map supports an
/// engine, cycle detection alone otherwise.
pub fn is_periodic(f: &PlaneAutomorphism, x: &AffinePoint, max_iter: usize) -> PeriodicVerdict {
    if let Ok(engine) = HeightEngine::new(f.clone()) {
        return engine.is_periodic(x, max_iter);
    }
    let start = (x.x.clone(), x.y.clone());
    let mut cur = start.clone();
    for k in 1..=max_iter {
        cur = f.apply(&cur.0, &cur.1);
        if cur == start {
            return PeriodicVerdict::Periodic { period: k };
        }
    }
    PeriodicVerdict::Undecided {
        iterations: max_iter,
        reason: "map has no canonical height; cycle detection only".into(),
    }
}

/// `1 + 1/D` as an exact rational, for callers building boundary inputs.
pub fn furter_threshold(d: u32) -> Rat {
    Rat::new((d + 1).into(), d.into())
}
