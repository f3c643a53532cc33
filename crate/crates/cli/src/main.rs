//! `arithdyn`: heights, dynamical degrees, periodicity and orbit counts for
//! plane polynomial automorphisms described by JSON map documents.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use arithdyn::canonical::{self, HeightEstimate};
use arithdyn::heights::{naive_height_affine, LiftedPoint};
use arithdyn::io::{format_real, parse_points, MapDesc};
use arithdyn::orbit::{
    counting_csv, counting_table, counts_below, exp_grid, least_squares, min_orbit_height_bounds,
    HeightKind, OrbitRecord,
};
use arithdyn::picard::{
    closed_form_excess, closed_form_pullbacks, effective_excess, intersection_form,
    solve_pullbacks,
};
use arithdyn::{AffinePoint, Divisor, Error, HeightEngine, PeriodicVerdict, PicBasis, Rat};

const EXIT_FALSE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_UNDECIDED: u8 = 3;
const EXIT_RESOURCE: u8 = 4;
const MIN_DIGIT_CAP: u64 = 10_000;

#[derive(Parser)]
#[command(
    name = "arithdyn",
    version,
    about = "Heights and orbits of plane polynomial automorphisms"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Naive heights of points.
    Height {
        #[command(flatten)]
        points: PointArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Degree, dynamical degrees and regularity of a map.
    Dyndeg {
        #[arg(long, value_name = "PATH")]
        map: PathBuf,
        /// Length of the printed degree sequence.
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Canonical heights with error fields and the functional-equation
    /// residual.
    Canheight {
        #[command(flatten)]
        engine: EngineArgs,
        #[command(flatten)]
        points: PointArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Orbit window and orbit point counts against the counting band.
    Orbit {
        #[command(flatten)]
        engine: EngineArgs,
        #[command(flatten)]
        points: PointArgs,
        /// Single threshold T.
        #[arg(long = "T", value_name = "R", conflicts_with = "t_grid")]
        t: Option<f64>,
        /// Thresholds e^a, ..., e^b with `steps` points.
        #[arg(long = "T-grid", value_name = "a:b:steps")]
        t_grid: Option<String>,
        /// Half-width of the printed orbit window.
        #[arg(long, default_value_t = 4)]
        radius: u32,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Periodicity verdicts.
    Periodic {
        #[command(flatten)]
        engine: EngineArgs,
        #[command(flatten)]
        points: PointArgs,
        #[arg(long, default_value_t = canonical_max_iter())]
        max_iter: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Pullback and excess divisor tables on the resolution surface.
    Picard {
        #[arg(long)]
        d: u32,
        #[command(flatten)]
        out: OutArgs,
    },
}

const fn canonical_max_iter() -> usize {
    arithdyn::orbit::DEFAULT_MAX_ITER
}

#[derive(Args)]
struct PointArgs {
    /// A single point `X,Y` with rational coordinates.
    #[arg(long, value_name = "X,Y", allow_hyphen_values = true)]
    point: Option<String>,
    /// A file with one point per line.
    #[arg(long, value_name = "PATH")]
    points: Option<PathBuf>,
}

#[derive(Args)]
struct EngineArgs {
    #[arg(long, value_name = "PATH")]
    map: PathBuf,
    /// Truncation depth; defaults to a value scaled to the dynamical degree.
    #[arg(long, value_name = "N")]
    depth: Option<u32>,
    #[arg(long, value_name = "K", default_value_t = canonical::DEFAULT_PATIENCE)]
    patience: usize,
    #[arg(long = "digit-cap", value_name = "M", default_value_t = canonical::DEFAULT_DIGIT_CAP)]
    digit_cap: u64,
    /// Lower constant for certified lower bounds.
    #[arg(long = "c-lower", value_name = "R")]
    c_lower: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Args)]
struct OutArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Evaluate independent points in parallel.
    #[arg(long)]
    parallel: bool,
}

/// Output text plus exit status.
struct Report {
    text: String,
    code: u8,
}

impl Report {
    fn ok(text: String) -> Self {
        Report { text, code: 0 }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Undecided(_) => EXIT_UNDECIDED,
        Error::DigitCap { .. } | Error::Precision(_) => EXIT_RESOURCE,
        _ => EXIT_INPUT,
    }
}

fn read(path: &PathBuf) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn load_map(path: &PathBuf) -> Result<MapDesc, Error> {
    MapDesc::from_json(&read(path)?)
}

fn load_points(args: &PointArgs) -> Result<Vec<AffinePoint>, Error> {
    match (&args.point, &args.points) {
        (Some(p), None) => Ok(vec![AffinePoint::parse(p)?]),
        (None, Some(path)) => {
            let pts = parse_points(&read(path)?)?;
            if pts.is_empty() {
                return Err(Error::Input(format!("{}: no points", path.display())));
            }
            Ok(pts)
        }
        (Some(_), Some(_)) => Err(Error::Input("give either --point or --points".into())),
        (None, None) => Err(Error::Input("a point is required (--point or --points)".into())),
    }
}

fn build_engine(args: &EngineArgs) -> Result<HeightEngine, Error> {
    if args.patience < 1 {
        return Err(Error::Input("patience must be at least 1".into()));
    }
    if args.digit_cap < MIN_DIGIT_CAP {
        return Err(Error::Input(format!("digit cap must be at least {MIN_DIGIT_CAP}")));
    }
    let mut e = load_map(&args.map)?.engine()?;
    if let Some(n) = args.depth {
        e = e.with_depth(n)?;
    }
    e = e.with_patience(args.patience)?.with_digit_cap(args.digit_cap);
    if let Some(c) = args.c_lower {
        e = e.with_c_lower(c);
    }
    Ok(e)
}

/// Map over points, in parallel when asked; output order is the input order.
fn map_points<T: Send>(
    pts: &[AffinePoint],
    parallel: bool,
    f: impl Fn(&AffinePoint) -> T + Sync + Send,
) -> Vec<T> {
    if parallel {
        pts.par_iter().map(&f).collect()
    } else {
        pts.iter().map(f).collect()
    }
}

/// Round to 12 significant digits for JSON; non-finite values become strings.
fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(format_real(v).parse::<f64>().expect("formatted real parses"))
    } else {
        json!(format_real(v))
    }
}

fn point_csv(p: &AffinePoint) -> String {
    format!("{},{}", p.x, p.y)
}

fn estimate_json(e: &HeightEstimate) -> Value {
    json!({
        "value": num(e.value),
        "upper_bound": num(e.upper_bound),
        "lower_slack": num(e.lower_slack),
        "budget": num(e.budget()),
        "rigorous_lower": e.rigorous_lower.map(num),
        "depth": e.depth,
    })
}

fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialise");
    s.push('\n');
    s
}

fn cmd_height(points: &PointArgs, out: &OutArgs) -> Result<Report, Error> {
    let pts = load_points(points)?;
    let rows = map_points(&pts, out.parallel, |p| {
        let lift = LiftedPoint::from_affine(p);
        let max = [&lift.x, &lift.y, &lift.z]
            .into_iter()
            .map(|c| c.magnitude())
            .max()
            .expect("three coordinates")
            .clone();
        (p.clone(), lift, max, naive_height_affine(p))
    });
    let text = match out.format {
        Format::Text => rows
            .iter()
            .map(|(p, _, m, h)| format!("{}: h_nv = log {m} ≈ {}\n", point_csv(p), format_real(*h)))
            .collect(),
        Format::Csv => {
            let mut s = String::from("x,y,max_coord,h_nv\n");
            for (p, _, m, h) in &rows {
                s += &format!("{},{m},{}\n", point_csv(p), format_real(*h));
            }
            s
        }
        Format::Json => render_json(&json!({
            "command": "height",
            "points": rows.iter().map(|(p, l, m, h)| json!({
                "point": p,
                "lift": [l.x.to_string(), l.y.to_string(), l.z.to_string()],
                "max_coord": m.to_string(),
                "h_nv": num(*h),
            })).collect::<Vec<_>>(),
        })),
    };
    Ok(Report::ok(text))
}

fn cmd_dyndeg(map: &PathBuf, n: usize, out: &OutArgs) -> Result<Report, Error> {
    let f = load_map(map)?.build()?;
    let d = f.degree();
    let delta = f.dynamical_degree()?;
    let delta_minus = f.inverse().dynamical_degree()?;
    let regular = d >= 2 && f.is_regular().unwrap_or(false);
    let seq = f.degree_sequence(n);
    let seq_s: Vec<String> = seq.iter().map(u32::to_string).collect();
    let text = match out.format {
        Format::Text => format!(
            "d={d} δ={delta} δ₋={delta_minus} regular={regular} degrees={}\n",
            seq_s.join(",")
        ),
        Format::Csv => format!(
            "d,delta,delta_minus,regular,degrees\n{d},{delta},{delta_minus},{regular},{}\n",
            seq_s.join(" ")
        ),
        Format::Json => render_json(&json!({
            "command": "dyndeg",
            "degree": d,
            "inverse_degree": f.inverse_degree(),
            "delta": delta,
            "delta_minus": delta_minus,
            "regular": regular,
            "degree_sequence": seq,
        })),
    };
    Ok(Report::ok(text))
}

fn cmd_canheight(engine: &EngineArgs, points: &PointArgs, out: &OutArgs) -> Result<Report, Error> {
    let e = build_engine(engine)?;
    let pts = load_points(points)?;
    type Row = (AffinePoint, HeightEstimate, HeightEstimate, HeightEstimate, f64);
    let rows: Vec<Result<Row, Error>> = map_points(&pts, out.parallel, |p| {
        Ok((
            p.clone(),
            e.hplus(p)?,
            e.hminus(p)?,
            e.hcanonical(p)?,
            e.functional_equation_residual(p)?,
        ))
    });
    let rows: Vec<Row> = rows.into_iter().collect::<Result<_, _>>()?;
    let budget = e.residual_budget();
    let text = match out.format {
        Format::Text => {
            let mut s = format!(
                "δ={} δ₋={} depth={} c2={} c2₋={}\n",
                e.delta(),
                e.delta_minus(),
                e.depth(),
                format_real(e.c2_fwd()),
                format_real(e.c2_inv())
            );
            for (p, hp, hm, h, r) in &rows {
                s += &format!("point {}\n", point_csv(p));
                for (name, est) in [("hplus ", hp), ("hminus", hm), ("hhat  ", h)] {
                    s += &format!(
                        "  {name} = {}  tail = {}  slack = {}",
                        format_real(est.value),
                        format_real(est.tail()),
                        format_real(est.lower_slack)
                    );
                    if let Some(lo) = est.rigorous_lower {
                        s += &format!("  lower = {}", format_real(lo));
                    }
                    s.push('\n');
                }
                s += &format!(
                    "  residual = {}  budget = {}\n",
                    format_real(*r),
                    format_real(budget)
                );
            }
            s
        }
        Format::Csv => {
            let mut s = String::from("x,y,hplus,hplus_err,hminus,hminus_err,hhat,hhat_err,residual\n");
            for (p, hp, hm, h, r) in &rows {
                s += &format!(
                    "{},{},{},{},{},{},{},{}\n",
                    point_csv(p),
                    format_real(hp.value),
                    format_real(hp.budget()),
                    format_real(hm.value),
                    format_real(hm.budget()),
                    format_real(h.value),
                    format_real(h.budget()),
                    format_real(*r)
                );
            }
            s
        }
        Format::Json => render_json(&json!({
            "command": "canheight",
            "delta": e.delta(),
            "delta_minus": e.delta_minus(),
            "depth": e.depth(),
            "c2": num(e.c2_fwd()),
            "c2_minus": num(e.c2_inv()),
            "residual_budget": num(budget),
            "points": rows.iter().map(|(p, hp, hm, h, r)| json!({
                "point": p,
                "hplus": estimate_json(hp),
                "hminus": estimate_json(hm),
                "hhat": estimate_json(h),
                "residual": num(*r),
            })).collect::<Vec<_>>(),
        })),
    };
    Ok(Report::ok(text))
}

fn parse_grid(t: Option<f64>, grid: Option<&str>) -> Result<Vec<f64>, Error> {
    if let Some(t) = t {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Input(format!("T must be positive, got {t}")));
        }
        return Ok(vec![t]);
    }
    let spec = grid.unwrap_or("5:21:9");
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::Input(format!("bad --T-grid {spec:?}; expected a:b:steps"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if steps == 0 || !a.is_finite() || !b.is_finite() || b < a {
        return Err(bad());
    }
    Ok(exp_grid(a, b, steps))
}

struct OrbitOutput {
    record: OrbitRecord,
    table: Vec<arithdyn::orbit::Enclosure>,
    naive: Result<Vec<usize>, Error>,
    min_check: arithdyn::orbit::MinHeightCheck,
}

fn orbit_one(e: &HeightEngine, x: &AffinePoint, ts: &[f64], radius: u32) -> Result<OrbitOutput, Error> {
    let record = OrbitRecord::build(e, x, radius)?;
    let table = counting_table(e, x, ts)?;
    let naive = counts_below(e, x, ts, HeightKind::Naive).map(|v| v.iter().map(|c| c.count).collect());
    let min_check = min_orbit_height_bounds(e, x)?;
    Ok(OrbitOutput {
        record,
        table,
        naive,
        min_check,
    })
}

fn naive_slope(ts: &[f64], counts: &[usize]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = ts.iter().zip(counts).map(|(t, c)| (t.ln(), *c as f64)).collect();
    least_squares(&pts)
}

fn cmd_orbit(
    engine: &EngineArgs,
    points: &PointArgs,
    t: Option<f64>,
    grid: Option<&str>,
    radius: u32,
    out: &OutArgs,
) -> Result<Report, Error> {
    let e = build_engine(engine)?;
    let pts = load_points(points)?;
    let ts = parse_grid(t, grid)?;
    let results = map_points(&pts, out.parallel, |x| orbit_one(&e, x, &ts, radius));
    let outs: Vec<OrbitOutput> = results.into_iter().collect::<Result<_, _>>()?;
    let all_pass = outs.iter().all(|o| o.table.iter().all(|r| r.pass));
    let text = match out.format {
        Format::Csv => outs
            .iter()
            .map(|o| format!("{}\n{}", o.record.to_csv(), counting_csv(&o.table)))
            .collect::<Vec<_>>()
            .join("\n"),
        Format::Text => {
            let mut s = String::new();
            for o in &outs {
                let r = &o.record;
                s += &format!(
                    "point {}  δ={} δ₋={}  hplus={} hminus={} orbit_height={}\n",
                    point_csv(&r.base),
                    e.delta(),
                    e.delta_minus(),
                    format_real(r.hplus0),
                    format_real(r.hminus0),
                    format_real(r.orbit_height)
                );
                let m = &o.min_check;
                s += &format!(
                    "min log height {} at l={} (t0={}): eps1_ok={} eps2_ok={}\n\n",
                    format_real(m.min_log_height),
                    m.l_min,
                    format_real(m.t0),
                    m.eps1_ok,
                    m.eps2_ok
                );
                s += &r.to_csv();
                s += "\nT,count,predicted,lower,upper,pass,naive_count\n";
                for (i, row) in o.table.iter().enumerate() {
                    let naive = match &o.naive {
                        Ok(v) => v[i].to_string(),
                        Err(_) => "-".into(),
                    };
                    s += &format!(
                        "{},{},{},{},{},{},{naive}\n",
                        format_real(row.t),
                        row.observed,
                        format_real(row.predicted),
                        format_real(row.lower),
                        format_real(row.upper),
                        row.pass
                    );
                }
                match &o.naive {
                    Ok(v) => {
                        if let Some((slope, intercept)) = naive_slope(&ts, v) {
                            s += &format!(
                                "naive slope {} (κ = {}), intercept {}\n",
                                format_real(slope),
                                format_real(arithdyn::orbit::kappa(e.delta(), e.delta_minus())),
                                format_real(intercept)
                            );
                        }
                    }
                    Err(err) => s += &format!("naive counts unavailable: {err}\n"),
                }
                s.push('\n');
            }
            s
        }
        Format::Json => render_json(&json!({
            "command": "orbit",
            "delta": e.delta(),
            "delta_minus": e.delta_minus(),
            "kappa": num(arithdyn::orbit::kappa(e.delta(), e.delta_minus())),
            "T": ts.iter().map(|t| num(*t)).collect::<Vec<_>>(),
            "points": outs.iter().map(|o| {
                let r = &o.record;
                let (naive, slope, naive_error) = match &o.naive {
                    Ok(v) => {
                        let fit = naive_slope(&ts, v).map(|(s, i)| json!({"slope": num(s), "intercept": num(i)}));
                        (json!(v), fit.unwrap_or(Value::Null), Value::Null)
                    }
                    Err(err) => (Value::Null, Value::Null, json!(err.to_string())),
                };
                json!({
                    "point": r.base,
                    "hplus0": num(r.hplus0),
                    "hminus0": num(r.hminus0),
                    "orbit_height": num(r.orbit_height),
                    "samples": r.samples.iter().map(|s| json!({
                        "l": s.l, "point": s.point, "h_nv": num(s.h_nv), "hhat": num(s.hhat),
                    })).collect::<Vec<_>>(),
                    "counting": o.table.iter().map(|row| json!({
                        "T": num(row.t),
                        "count": row.observed,
                        "ambiguous": row.ambiguous,
                        "predicted": num(row.predicted),
                        "lower": num(row.lower),
                        "upper": num(row.upper),
                        "slack": num(row.slack),
                        "pass": row.pass,
                    })).collect::<Vec<_>>(),
                    "naive_counts": naive,
                    "naive_fit": slope,
                    "naive_error": naive_error,
                    "min_height": {
                        "t0": num(o.min_check.t0),
                        "l_min": o.min_check.l_min,
                        "min_log_height": num(o.min_check.min_log_height),
                        "eps1": num(o.min_check.eps1),
                        "eps2": num(o.min_check.eps2),
                        "eps1_ok": o.min_check.eps1_ok,
                        "eps2_ok": o.min_check.eps2_ok,
                    },
                })
            }).collect::<Vec<_>>(),
        })),
    };
    Ok(Report {
        text,
        code: if all_pass { 0 } else { EXIT_FALSE },
    })
}

fn cmd_periodic(engine: &EngineArgs, points: &PointArgs, max_iter: usize, out: &OutArgs) -> Result<Report, Error> {
    let desc = load_map(&engine.map)?;
    let pts = load_points(points)?;
    let verdicts: Vec<PeriodicVerdict> = match build_engine(engine) {
        Ok(e) => map_points(&pts, out.parallel, |p| e.is_periodic(p, max_iter)),
        Err(Error::Unsupported(_)) => {
            let f = desc.build()?;
            map_points(&pts, out.parallel, |p| canonical::is_periodic(&f, p, max_iter))
        }
        Err(err) => return Err(err),
    };
    let code = if verdicts.iter().any(|v| matches!(v, PeriodicVerdict::Undecided { .. })) {
        EXIT_UNDECIDED
    } else if verdicts.iter().any(|v| matches!(v, PeriodicVerdict::NotPeriodic { .. })) {
        EXIT_FALSE
    } else {
        0
    };
    let text = match out.format {
        Format::Text => pts
            .iter()
            .zip(&verdicts)
            .map(|(p, v)| {
                let body = match v {
                    PeriodicVerdict::Periodic { period } => format!("periodic, period {period}"),
                    PeriodicVerdict::NotPeriodic { steps, hhat, budget } => format!(
                        "not periodic (steps = {steps}, hhat = {}, budget = {})",
                        format_real(*hhat),
                        format_real(*budget)
                    ),
                    PeriodicVerdict::Undecided { iterations, reason } => {
                        format!("undecided after {iterations} iterations: {reason}")
                    }
                };
                format!("{}: {body}\n", point_csv(p))
            })
            .collect(),
        Format::Csv => {
            let mut s = String::from("x,y,verdict,period,steps,hhat,budget\n");
            for (p, v) in pts.iter().zip(&verdicts) {
                s += &match v {
                    PeriodicVerdict::Periodic { period } => format!("{},periodic,{period},,,\n", point_csv(p)),
                    PeriodicVerdict::NotPeriodic { steps, hhat, budget } => format!(
                        "{},not_periodic,,{steps},{},{}\n",
                        point_csv(p),
                        format_real(*hhat),
                        format_real(*budget)
                    ),
                    PeriodicVerdict::Undecided { iterations, .. } => {
                        format!("{},undecided,,{iterations},,\n", point_csv(p))
                    }
                };
            }
            s
        }
        Format::Json => render_json(&json!({
            "command": "periodic",
            "points": pts.iter().zip(&verdicts).map(|(p, v)| {
                let mut obj = json!({ "point": p });
                let fields = match v {
                    PeriodicVerdict::Periodic { period } => json!({"verdict": "periodic", "period": period}),
                    PeriodicVerdict::NotPeriodic { steps, hhat, budget } => json!({
                        "verdict": "not_periodic", "steps": steps, "hhat": num(*hhat), "budget": num(*budget),
                    }),
                    PeriodicVerdict::Undecided { iterations, reason } => json!({
                        "verdict": "undecided", "iterations": iterations, "reason": reason,
                    }),
                };
                for (k, val) in fields.as_object().expect("object").iter() {
                    obj[k] = val.clone();
                }
                obj
            }).collect::<Vec<_>>(),
        })),
    };
    Ok(Report { text, code })
}

fn cmd_picard(d: u32, out: &OutArgs) -> Result<Report, Error> {
    let basis = PicBasis::new(d)?;
    let form = intersection_form::<Rat>(d)?;
    let p = solve_pullbacks::<Rat>(d)?;
    let excess = effective_excess::<Rat>(d)?;
    let closed = p == closed_form_pullbacks::<Rat>(d)?;
    let excess_closed = excess == closed_form_excess::<Rat>(d)?;
    let effective = excess.is_effective();
    let products = [
        ("pi.pi", p.pi.dot(&p.pi, &form)),
        ("phi.phi", p.phi.dot(&p.phi, &form)),
        ("psi.psi", p.psi.dot(&p.psi, &form)),
        ("pi.phi", p.pi.dot(&p.phi, &form)),
        ("pi.psi", p.pi.dot(&p.psi, &form)),
    ];
    let one = Rat::from_integer(1.into());
    let dd = Rat::from_integer(d.into());
    let products_ok = products[..3].iter().all(|(_, v)| *v == one) && products[3..].iter().all(|(_, v)| *v == dd);
    let all_ok = closed && excess_closed && effective && products_ok;
    let labels = basis.labels();
    let classes: [(&str, &Divisor); 4] = [("pi*H", &p.pi), ("phi*H", &p.phi), ("psi*H", &p.psi), ("D", &excess)];
    let text = match out.format {
        Format::Text | Format::Csv => {
            let sep = if out.format == Format::Csv { "," } else { " " };
            let mut s = String::new();
            if out.format == Format::Text {
                s += &format!("d = {d}\n");
            }
            s += &format!("class{sep}{}\n", labels.join(sep));
            for (name, c) in &classes {
                let cells: Vec<String> = c.coeffs().iter().map(Rat::to_string).collect();
                s += &format!("{name}{sep}{}\n", cells.join(sep));
            }
            if out.format == Format::Text {
                s += &format!(
                    "checks: closed_form={closed} excess_closed_form={excess_closed} effective={effective} {}\n",
                    products.iter().map(|(n, v)| format!("{n}={v}")).collect::<Vec<_>>().join(" ")
                );
            }
            s
        }
        Format::Json => render_json(&json!({
            "command": "picard",
            "d": d,
            "labels": labels,
            "classes": classes.iter().map(|(name, c)| json!({
                "name": name,
                "coeffs": c.coeffs().iter().map(Rat::to_string).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "checks": {
                "closed_form": closed,
                "excess_closed_form": excess_closed,
                "effective": effective,
                "products": products.iter().map(|(n, v)| json!({"name": n, "value": v.to_string()})).collect::<Vec<_>>(),
                "all": all_ok,
            },
        })),
    };
    Ok(Report {
        text,
        code: if all_ok { 0 } else { EXIT_FALSE },
    })
}

fn run(cli: &Cli) -> Result<Report, Error> {
    match &cli.cmd {
        Command::Height { points, out } => cmd_height(points, out),
        Command::Dyndeg { map, n, out } => cmd_dyndeg(map, *n, out),
        Command::Canheight { engine, points, out } => cmd_canheight(engine, points, out),
        Command::Orbit {
            engine,
            points,
            t,
            t_grid,
            radius,
            out,
        } => cmd_orbit(engine, points, *t, t_grid.as_deref(), *radius, out),
        Command::Periodic {
            engine,
            points,
            max_iter,
            out,
        } => cmd_periodic(engine, points, *max_iter, out),
        Command::Picard { d, out } => cmd_picard(*d, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(report) => {
            print!("{}", report.text);
            ExitCode::from(report.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
