//! The five experiment drivers behind the CLI, plus the sequence builders
//! they share with the tests.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;
use std::time::Instant;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::actions::{ceil_to_grid, estimate_qi_constants, line_elem_at, Action, ActionError, ActionSpec};
use crate::boundary::{boundary_gap, limit_point, BoundaryError, BoundaryPoint, CauchyOptions, ConvergenceVerdict, End};
use crate::conditions::{
    build_boundary_map, check_condition_doublestar, check_condition_star, derive_constants, minimal_m_table,
    verify_tracking_bounds, ConditionError, NamedSequence, SqDist,
};
use crate::config::{ConfigError, ExperimentConfig, ExperimentKind, RigidFamily};
use crate::exec::Exec;
use crate::groups::{
    ball, ball_count, parse_family, parse_word, GroupElement, GroupError, GroupFamily, Letter, LineElem,
    WeightAssignment,
};
use crate::num::{q, to_f64, Q};
use crate::oracle::complex_distance;
use crate::report::{Report, ReportError, Table};
use crate::spaces::{PieceSpec, Space, SpaceError, SpacePoint, WeightedTree};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Condition(#[from] ConditionError),
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("{0}")]
    Invalid(String),
}

/// Note attached to every conjecture scan.
pub const SCAN_DISCLAIMER: &str =
    "invariant sampling only: angle spectra are a heuristic signal and do not decide whether the boundaries are homeomorphic";

/// `g_1 = first`; `g_n` appends `even` (n even) or `odd` (n odd), repeated
/// until `2^{n-1}` letters were added, so `|g_n| = 2ⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub struct DoublingFamily {
    pub first: Vec<Letter>,
    pub even: Vec<Letter>,
    pub odd: Vec<Letter>,
}

impl DoublingFamily {
    /// `g_1 = ab`, appending powers of `a` (n even) and `b` (n odd).
    pub fn example_6_1(fam: &GroupFamily) -> Result<DoublingFamily, GroupError> {
        Ok(DoublingFamily { first: parse_word(fam, "a b")?, even: parse_word(fam, "a")?, odd: parse_word(fam, "b")? })
    }

    /// `g_1 = s1 s2`, appending powers of `s3 s2` (n even) and `s1 s2` (n odd).
    pub fn coxeter(fam: &GroupFamily) -> Result<DoublingFamily, GroupError> {
        Ok(DoublingFamily {
            first: parse_word(fam, "s1 s2")?,
            even: parse_word(fam, "s3 s2")?,
            odd: parse_word(fam, "s1 s2")?,
        })
    }

    /// Words `g_1..g_n`.
    pub fn words(&self, n: usize) -> Vec<Vec<Letter>> {
        let mut out: Vec<Vec<Letter>> = Vec::with_capacity(n);
        for k in 1..=n {
            let w = match out.last() {
                None => self.first.clone(),
                Some(prev) => {
                    let block = if k % 2 == 0 { &self.even } else { &self.odd };
                    let mut w = prev.clone();
                    let add = 1usize << (k - 1);
                    while w.len() < prev.len() + add {
                        w.extend_from_slice(block);
                    }
                    w
                }
            };
            out.push(w);
        }
        out
    }

    /// `(g_k, 2^k)` for `k = 1..=n` in a `base×line` family.
    pub fn elements(&self, fam: &GroupFamily, n: usize) -> Result<Vec<GroupElement>, GroupError> {
        let GroupFamily::DirectWithLine { line, .. } = fam else {
            return Err(GroupError::InvalidFamily(format!("{fam} has no line factor")));
        };
        self.words(n)
            .iter()
            .enumerate()
            .map(|(i, w)| with_line(fam, w, line_elem_at(*line, 1i64 << (i + 1))))
            .collect()
    }

    /// `x_k = ℓ(g_k)/2^k` for `k = 1..=n` under weights `w`, by the
    /// recurrence `x_k = x_{k-1}/2 + ℓ(block)/(2|block|)`.
    pub fn ratio_recurrence(&self, w: &WeightAssignment, n: usize) -> Vec<Q> {
        let len = |b: &[Letter]| b.iter().map(|l| w.weight(*l)).sum::<Q>();
        let half = Q::new(1, 2);
        let step = |b: &[Letter]| len(b) * half / Q::from_integer(b.len() as i128);
        let (even, odd) = (step(&self.even), step(&self.odd));
        let mut x = len(&self.first) * half;
        let mut out = vec![x];
        for k in 2..=n {
            x = x * half + if k % 2 == 0 { even } else { odd };
            out.push(x);
        }
        out
    }

    /// Angles `arctan(1/x)` of the even and odd subsequences, from the
    /// recurrence run to `n = 60`.
    pub fn sublimit_angles(&self, w: &WeightAssignment) -> (f64, f64) {
        let xs = self.ratio_recurrence(w, 60);
        let angle = |x: &Q| (1.0 / to_f64(x)).atan();
        (angle(&xs[59]), angle(&xs[58]))
    }
}

/// `(w, line)` in a `base×line` family, with `w` in base letters.
pub fn with_line(fam: &GroupFamily, w: &[Letter], line: LineElem) -> Result<GroupElement, GroupError> {
    match fam.reduce(w)? {
        GroupElement::WithLine(b, _) => Ok(GroupElement::WithLine(b, line)),
        _ => Err(GroupError::InvalidFamily(format!("{fam} has no line factor"))),
    }
}

/// `g, g², …, gⁿ`.
pub fn power_sequence(fam: &GroupFamily, g: &GroupElement, n: usize) -> Result<Vec<GroupElement>, GroupError> {
    let mut out = Vec::with_capacity(n);
    let mut acc = g.clone();
    for _ in 0..n {
        out.push(acc.clone());
        acc = fam.multiply(&acc, g)?;
    }
    Ok(out)
}

fn base_family(fam: &GroupFamily) -> Result<&GroupFamily, ExperimentError> {
    match fam {
        GroupFamily::DirectWithLine { base, .. } => Ok(base),
        _ => Err(ExperimentError::Invalid(format!("{fam} has no line factor"))),
    }
}

/// `a^i b^i` in `F2xZ`, at height 0.
pub fn br_element(fam: &GroupFamily, i: usize) -> Result<GroupElement, GroupError> {
    let w = parse_word(fam, &format!("a^{i} b^{i}"))?;
    with_line(fam, &w, LineElem::IDENTITY)
}

fn action(spec: &Option<ActionSpec>, default: ActionSpec) -> Result<Action, ActionError> {
    Action::from_spec(spec.as_ref().unwrap_or(&default))
}

fn product_spec(family: &str, weights: &[(&str, i128)], shifts: &[(&str, i128)]) -> ActionSpec {
    let map = |v: &[(&str, i128)]| v.iter().map(|(k, x)| (k.to_string(), q(*x))).collect::<BTreeMap<_, _>>();
    ActionSpec::Product { family: family.into(), weights: map(weights), shifts: map(shifts) }
}

fn lattice_spec(rows: [[i128; 2]; 2]) -> ActionSpec {
    ActionSpec::Lattice { basis: rows.iter().map(|r| r.iter().map(|x| q(*x)).collect()).collect() }
}

fn square() -> Vec<Vec<Q>> {
    vec![vec![q(1), q(0)], vec![q(0), q(1)]]
}

fn shear() -> Vec<Vec<Q>> {
    vec![vec![q(1), q(0)], vec![q(1), q(1)]]
}

fn complex_spec(family: &str, pieces: Vec<PieceSpec>) -> ActionSpec {
    ActionSpec::Complex { family: family.into(), pieces }
}

/// The `X` and `Y` actions, with `Y = X` in sanity mode.
fn pair(cfg: &ExperimentConfig, dx: ActionSpec, dy: ActionSpec) -> Result<(Action, Action), ExperimentError> {
    let ax = action(&cfg.x, dx)?;
    let ay = if cfg.sanity { ax.clone() } else { action(&cfg.y, dy)? };
    if ax.family() != ay.family() {
        return Err(ActionError::DifferentGroups(ax.family().to_string(), ay.family().to_string()).into());
    }
    Ok((ax, ay))
}

fn cauchy_options(cfg: &ExperimentConfig) -> CauchyOptions {
    CauchyOptions { eps0: cfg.constants.eps0, radii: cfg.horizons.radii.clone(), min_tail: 2 }
}

fn orbit(a: &Action, gs: &[GroupElement]) -> Result<Vec<SpacePoint>, ActionError> {
    gs.iter().map(|g| a.orbit_point(g)).collect()
}

fn product_tree(a: &Action) -> Result<&WeightedTree, ExperimentError> {
    a.product_parts()
        .map(|(s, _)| &s.tree)
        .ok_or_else(|| ExperimentError::Invalid("expected an action on tree×ℝ".into()))
}

fn f(x: f64) -> String {
    format!("{x:.12}")
}

fn verdict_name(v: &ConvergenceVerdict) -> &'static str {
    match v {
        ConvergenceVerdict::ConvergesTo { .. } => "converges",
        ConvergenceVerdict::Divergent { .. } => "divergent",
        ConvergenceVerdict::Bounded { .. } => "bounded",
    }
}

fn describe_point(fam: &GroupFamily, p: &BoundaryPoint) -> String {
    match p {
        BoundaryPoint::Tree { end } => end.describe(fam),
        BoundaryPoint::Product { end, theta } => format!("[{}, {theta:.12}]", end.describe(fam)),
        BoundaryPoint::Flat { direction } => format!("{direction:?}"),
        BoundaryPoint::Complex { prefix, period } => format!("{} ({})^inf", fam.format(prefix), fam.format(period)),
    }
}

/// Whether `end` is periodic and agrees with `period^∞` to `depth`.
fn end_matches(tree: &WeightedTree, end: &End, period: &[Letter], depth: f64) -> bool {
    let End::Periodic { .. } = end else { return false };
    let Ok(expected) = End::periodic(Vec::new(), period.to_vec()) else { return false };
    match (end.letters_to_depth(tree, depth), expected.letters_to_depth(tree, depth)) {
        (Ok(a), Ok(b)) => {
            let k = a.len().min(b.len());
            a[..k] == b[..k]
        }
        _ => false,
    }
}

/// Runs the experiment named in `cfg`.
pub fn run(cfg: &ExperimentConfig, exec: Exec) -> Result<Report, ExperimentError> {
    cfg.validate()?;
    let start = Instant::now();
    let mut report = match cfg.experiment {
        ExperimentKind::BowersRuane => run_bowers_ruane(cfg, exec)?,
        ExperimentKind::Example61 => run_doubling(cfg, exec, false)?,
        ExperimentKind::CoxeterFamily => run_doubling(cfg, exec, true)?,
        ExperimentKind::RigidFamily => run_rigid_family(cfg, exec)?,
        ExperimentKind::ConjectureScan => run_conjecture_scan(cfg, exec)?,
    };
    report.elapsed_ms = start.elapsed().as_millis();
    Ok(report)
}

pub fn run_bowers_ruane(cfg: &ExperimentConfig, exec: Exec) -> Result<Report, ExperimentError> {
    let (ax, ay) = pair(cfg, product_spec("F2xZ", &[], &[]), product_spec("F2xZ", &[], &[("b", 2)]))?;
    let fam = ax.family().clone();
    let bf = base_family(&fam)?.clone();
    let (tx, ty) = (product_tree(&ax)?.clone(), product_tree(&ay)?.clone());
    let opts = cauchy_options(cfg);
    let horizon = cfg.sequence();
    let mut report = Report::new(cfg);

    let mut limits = Table::new(
        "limits",
        &["i", "x_verdict", "x_limit", "x_expected_theta", "y_verdict", "y_limit", "y_expected_theta", "y_theta_error", "end_ok"],
    );
    let mut worst = 0.0f64;
    let mut ends_ok = true;
    let mut x_limits = Vec::new();
    let mut y_limits = Vec::new();
    for i in 1..=cfg.horizons.family {
        let g = br_element(&fam, i)?;
        let seq = power_sequence(&fam, &g, horizon)?;
        let base = g.base().expect("line family").clone();
        let letters = bf.letters(&base);
        let expected = |a: &Action, t: &WeightedTree| to_f64(&a.shift(&base)).atan2(t.depth(&letters));
        let (ex, ey) = (expected(&ax, &tx), expected(&ay, &ty));
        let vx = limit_point(ax.space(), &orbit(&ax, &seq)?, &opts)?;
        let vy = limit_point(ay.space(), &orbit(&ay, &seq)?, &opts)?;
        let (y_err, y_end) = match &vy {
            ConvergenceVerdict::ConvergesTo { point: BoundaryPoint::Product { end, theta }, .. } => {
                ((theta - ey).abs(), end_matches(&ty, end, &letters, 100.0))
            }
            _ => (f64::INFINITY, false),
        };
        let x_end = matches!(&vx, ConvergenceVerdict::ConvergesTo { point: BoundaryPoint::Product { end, theta }, .. }
            if end_matches(&tx, end, &letters, 100.0) && (theta - ex).abs() < 1e-9);
        worst = worst.max(y_err);
        ends_ok &= y_end && x_end;
        let lim = |v: &ConvergenceVerdict| match v {
            ConvergenceVerdict::ConvergesTo { point, .. } => describe_point(&fam, point),
            _ => String::new(),
        };
        limits.push(vec![
            i.to_string(),
            verdict_name(&vx).into(),
            lim(&vx),
            f(ex),
            verdict_name(&vy).into(),
            lim(&vy),
            f(ey),
            f(y_err),
            (x_end && y_end).to_string(),
        ]);
        x_limits.push(vx);
        y_limits.push(vy);
    }
    report.check(
        "limits_of_powers",
        worst < 1e-9 && ends_ok,
        true,
        format!("max |θ − atan2(shift, length)| = {worst:.3e}; ends g_i^∞: {ends_ok}"),
    );
    report.tables.push(limits);

    // (aⁿ, 0) in both spaces.
    let a = with_line(&fam, &parse_word(&fam, "a")?, LineElem::IDENTITY)?;
    let seq_a = power_sequence(&fam, &a, horizon)?;
    let ax_lim = limit_point(ax.space(), &orbit(&ax, &seq_a)?, &opts)?;
    let ay_lim = limit_point(ay.space(), &orbit(&ay, &seq_a)?, &opts)?;
    let a_inf = BoundaryPoint::Product { end: End::periodic(Vec::new(), parse_word(&fam, "a")?)?, theta: 0.0 };
    let exact = matches!(&ax_lim, ConvergenceVerdict::ConvergesTo { point, .. } if *point == a_inf);
    report.check("a_power_limit", exact, true, format!("(aⁿ,0)·x₀ → {}", describe_point(&fam, &a_inf)));
    report.result("a_power_limit_x", &ax_lim)?;
    report.result("a_power_limit_y", &ay_lim)?;

    // Gaps at the reference radius between the limits of g_iⁿ and of aⁿ.
    let r = cfg.horizons.reference_radius;
    let mut gaps = Table::new("gaps", &["i", "r", "preimage_gap", "image_gap"]);
    let point = |v: &ConvergenceVerdict| match v {
        ConvergenceVerdict::ConvergesTo { point, .. } => Some(point.clone()),
        _ => None,
    };
    let (ax_a, ay_a) = (point(&ax_lim), point(&ay_lim));
    let mut pre = Vec::new();
    let mut img = Vec::new();
    for (i, (vx, vy)) in x_limits.iter().zip(&y_limits).enumerate() {
        let gx = match (point(vx), &ax_a) {
            (Some(p), Some(q)) => boundary_gap(ax.space(), &p, q, r)?,
            _ => f64::NAN,
        };
        let gy = match (point(vy), &ay_a) {
            (Some(p), Some(q)) => boundary_gap(ay.space(), &p, q, r)?,
            _ => f64::NAN,
        };
        gaps.push(vec![(i + 1).to_string(), f(r), f(gx), f(gy)]);
        pre.push(gx);
        img.push(gy);
    }
    let floor = 0.8 * r * (2.0 - 2f64.sqrt()).sqrt();
    let last_pre = pre.last().copied().unwrap_or(f64::NAN);
    let min_img = img.iter().copied().fold(f64::INFINITY, f64::min);
    if cfg.sanity {
        let same = pre.iter().zip(&img).all(|(a, b)| (a - b).abs() < 1e-9);
        report.check("gaps_equal", same, true, "identical actions give identical gaps");
    } else {
        report.check(
            "boundary_discontinuity",
            last_pre < 0.2 && min_img >= floor,
            false,
            format!("last preimage gap {last_pre:.6} (< 0.2), smallest image gap {min_img:.6} (≥ {floor:.6})"),
        );
    }
    report.tables.push(gaps);

    // M̂ growth and a (*) check.
    let n = cfg.constants.n;
    let l = cfg.horizons.ball;
    let table = minimal_m_table(&ax, &ay, &n, l, exec)?;
    let mut mt = Table::new("m_hat", &["ball", "m_hat", "m_hat_exact", "elements", "pairs"]);
    for row in &table.rows {
        let exact = match row.m_hat {
            SqDist::Exact(sq) => format!("sqrt({sq})"),
            SqDist::Approx(_) => String::new(),
        };
        mt.push(vec![row.ball.to_string(), f(row.m_hat_value), exact, row.elements.to_string(), row.pairs.to_string()]);
    }
    let half = table.rows[(l / 2) as usize].m_hat_value;
    let full = table.rows[l as usize].m_hat_value;
    let ratio = if half > 0.0 { full / half } else { f64::INFINITY };
    report.result("m_hat_ratio", &ratio)?;
    if cfg.sanity {
        report.check("m_hat_bounded", full <= to_f64(&n) + 1e-9, true, format!("M̂({l}) = {full:.6} ≤ N"));
    } else {
        report.check("m_hat_growth", ratio >= 1.5, false, format!("M̂({l})/M̂({}) = {ratio:.4}", l / 2));
    }
    report.result("m_hat_table", &table)?;
    report.tables.push(mt);

    let m = match cfg.constants.m {
        Some(m) => m,
        None if cfg.sanity => n,
        None => ceil_to_grid(half, 64).max(Q::new(1, 64)),
    };
    let star = check_condition_star(&ax, &ay, &n, &m, l, exec)?;
    if cfg.sanity {
        report.check("star_holds", star.holds, true, format!("(*) with M = {m} on the ball of radius {l}"));
    } else {
        report.check(
            "star_violated",
            star.witness.is_some(),
            false,
            format!("(*) with M = {m} on the ball of radius {l}: {}", if star.holds { "holds" } else { "violated" }),
        );
    }
    report.result("star", &star)?;
    Ok(report)
}

/// The F2×ℤ doubling family (`coxeter = false`) or the Coxeter one.
pub fn run_doubling(cfg: &ExperimentConfig, _exec: Exec, coxeter: bool) -> Result<Report, ExperimentError> {
    let (dx, dy) = if coxeter {
        let fam = "(Z2*Z2*Z2)x(Z2*Z2)";
        (product_spec(fam, &[], &[]), product_spec(fam, &[("s1", 2)], &[]))
    } else {
        (product_spec("F2xZ", &[], &[]), product_spec("F2xZ", &[("a", 2)], &[]))
    };
    let (ax, ay) = pair(cfg, dx, dy)?;
    let fam = ax.family().clone();
    let bf = base_family(&fam)?.clone();
    let family = if coxeter { DoublingFamily::coxeter(&fam)? } else { DoublingFamily::example_6_1(&fam)? };
    let n = cfg.sequence();
    let elems = family.elements(&fam, n)?;
    let words = family.words(n);
    let ty = product_tree(&ay)?;
    let wy = ty.weights().clone();
    let xs = family.ratio_recurrence(&wy, n);
    let mut report = Report::new(cfg);

    let mut lengths = Table::new("lengths", &["n", "length", "two_pow_n", "y_length", "ratio", "recurrence"]);
    let mut lengths_ok = true;
    for (i, w) in words.iter().enumerate() {
        let k = i + 1;
        let base = elems[i].base().expect("line family");
        let len = bf.word_length(base);
        let yl = bf.length(base, &wy);
        let ratio = yl / Q::from_integer(1i128 << k);
        lengths_ok &= len == 1u64 << k && w.len() as u64 == len && ratio == xs[i];
        lengths.push(vec![k.to_string(), len.to_string(), (1u64 << k).to_string(), yl.to_string(), ratio.to_string(), xs[i].to_string()]);
    }
    report.check("lengths", lengths_ok, true, "|g_n| = 2ⁿ and ℓ_Y(g_n)/2ⁿ follows the recurrence");
    report.tables.push(lengths);

    if coxeter {
        let base = parse_family("Z2*Z2*Z2")?;
        let w = WeightAssignment::unit(&base);
        let mut ok = true;
        let mut counts = Table::new("ball_counts", &["radius", "count", "expected"]);
        for l in 0..=cfg.horizons.ball.min(12) {
            let c = ball_count(&base, &w, &Q::from_integer(l as i128));
            let e = 3 * (1usize << l) - 2;
            ok &= c == e;
            counts.push(vec![l.to_string(), c.to_string(), e.to_string()]);
        }
        report.check("ball_counts", ok, true, "|B(L)| = 3·2^L − 2 in ℤ₂∗ℤ₂∗ℤ₂");
        report.tables.push(counts);
    }

    let opts = cauchy_options(cfg);
    let seqs = [NamedSequence { name: "g_n".into(), elements: elems.clone() }];
    let ds = check_condition_doublestar(&ax, &ay, &seqs, &opts)?;
    let row = &ds.rows[0];
    let verdicts = format!("X Cauchy: {}, Y Cauchy: {}", row.x.verdict.is_cauchy(), row.y.verdict.is_cauchy());
    if cfg.sanity {
        report.check("doublestar_holds", ds.holds, true, verdicts);
    } else {
        report.check("doublestar_case_1", row.case == Some(1), false, verdicts);
    }
    report.result("doublestar", &ds)?;

    let px = orbit(&ax, &elems)?;
    let vx = limit_point(ax.space(), &px, &opts)?;
    let x_theta = match &vx {
        ConvergenceVerdict::ConvergesTo { point: BoundaryPoint::Product { theta, .. }, .. } => Some(*theta),
        _ => None,
    };
    report.check(
        "x_limit",
        x_theta.is_some_and(|t| (t - FRAC_PI_4).abs() < 1e-6),
        false,
        format!("X limit angle {x_theta:?}, expected π/4"),
    );
    report.result("x_limit", &vx)?;

    let (even, odd) = family.sublimit_angles(&wy);
    report.result("expected_sublimits", &serde_json::json!({ "even": even, "odd": odd }))?;
    let py = orbit(&ay, &elems)?;
    let mut angles = Table::new("angles", &["n", "y_angle", "expected_sublimit"]);
    for (i, p) in py.iter().enumerate() {
        let a = crate::boundary::product_angle(ay.space(), p).unwrap_or(f64::NAN);
        let e = if (i + 1) % 2 == 0 { even } else { odd };
        angles.push(vec![(i + 1).to_string(), f(a), f(e)]);
    }
    report.tables.push(angles);
    let vy = limit_point(ay.space(), &py, &opts)?;
    if !cfg.sanity {
        let detail;
        let ok = match &vy {
            ConvergenceVerdict::Divergent { clusters, .. } if clusters.len() == 2 => {
                let mut worst = 0.0f64;
                let mut parities_ok = true;
                for c in clusters {
                    let parity = (c.indices[0] + 1) % 2;
                    parities_ok &= c.indices.iter().all(|i| (i + 1) % 2 == parity);
                    let e = if parity == 0 { even } else { odd };
                    worst = worst.max((c.angle.unwrap_or(f64::NAN) - e).abs());
                }
                detail = format!("cluster angle errors ≤ {worst:.3e}; clusters split by parity: {parities_ok}");
                parities_ok && worst < 1e-3
            }
            v => {
                detail = format!("Y sequence {}", verdict_name(v));
                false
            }
        };
        report.check("y_sublimits", ok, false, detail);
    }
    report.result("y_limit", &vy)?;
    Ok(report)
}

/// Direction `d·B_X⁻¹·B_Y`, normalised.
fn predicted_direction(bx: &[Vec<Q>], by: &[Vec<Q>], d: &[f64]) -> Option<Vec<f64>> {
    let m = |b: &[Vec<Q>]| DMatrix::from_fn(b.len(), b.len(), |i, j| to_f64(&b[i][j]));
    let inv = m(bx).try_inverse()?;
    let z = DMatrix::from_row_slice(1, d.len(), d) * inv * m(by);
    let norm = z.norm();
    Some(z.iter().map(|c| c / norm).collect())
}

fn m_hat_rows(table: &crate::conditions::MTable) -> Table {
    let mut t = Table::new("m_hat", &["ball", "m_hat", "m_hat_exact", "elements", "pairs"]);
    for row in &table.rows {
        let exact = match row.m_hat {
            SqDist::Exact(sq) => format!("sqrt({sq})"),
            SqDist::Approx(_) => String::new(),
        };
        t.push(vec![row.ball.to_string(), f(row.m_hat_value), exact, row.elements.to_string(), row.pairs.to_string()]);
    }
    t
}

pub fn run_rigid_family(cfg: &ExperimentConfig, exec: Exec) -> Result<Report, ExperimentError> {
    let family = cfg.family.unwrap_or(match cfg.x {
        Some(ActionSpec::Complex { .. }) => RigidFamily::FlatInterval,
        _ => RigidFamily::LatticePair,
    });
    let one = || q(1);
    let (dx, dy) = match family {
        RigidFamily::LatticePair => (lattice_spec([[1, 0], [0, 1]]), lattice_spec([[1, 0], [1, 1]])),
        RigidFamily::FlatInterval => (
            complex_spec("(ZxZ)*Z2", vec![PieceSpec::FlatLattice { basis: square() }, PieceSpec::Interval { length: one() }]),
            complex_spec("(ZxZ)*Z2", vec![PieceSpec::FlatLattice { basis: shear() }, PieceSpec::Interval { length: q(2) }]),
        ),
        RigidFamily::FlatCone => (
            complex_spec("Z^2*Z3", vec![PieceSpec::FlatLattice { basis: square() }, PieceSpec::Cone { order: 3, spoke: one() }]),
            complex_spec("Z^2*Z3", vec![PieceSpec::FlatLattice { basis: shear() }, PieceSpec::Cone { order: 3, spoke: q(2) }]),
        ),
        RigidFamily::FlatFlat => (
            complex_spec("Z^2*Z^2", vec![PieceSpec::FlatLattice { basis: square() }, PieceSpec::FlatLattice { basis: square() }]),
            complex_spec("Z^2*Z^2", vec![PieceSpec::FlatLattice { basis: shear() }, PieceSpec::FlatLattice { basis: square() }]),
        ),
    };
    let (ax, ay) = pair(cfg, dx, dy)?;
    let mut report = Report::new(cfg);
    report.result("family", &family)?;
    let n = cfg.constants.n;
    let qi = estimate_qi_constants(&ax, &ay, &q(4), cfg.constants.c_max, exec)?;
    report.result("qi_constants", &qi)?;

    if family != RigidFamily::LatticePair {
        return rigid_complex(cfg, exec, &ax, &ay, report);
    }

    let l = cfg.horizons.ball;
    let table = minimal_m_table(&ax, &ay, &n, l, exec)?;
    let back = l.saturating_sub(4) as usize;
    let stable = table.rows[back].m_hat == table.rows[l as usize].m_hat;
    let m_hat = table.rows[l as usize].m_hat_value;
    report.check(
        "m_hat_stable",
        stable,
        false,
        format!("M̂({back}) = {:.6}, M̂({l}) = {m_hat:.6}", table.rows[back].m_hat_value),
    );
    report.tables.push(m_hat_rows(&table));
    report.result("m_hat_table", &table)?;

    let m = cfg.constants.m.unwrap_or_else(|| ceil_to_grid(m_hat, 8).max(Q::new(1, 8)));
    let k = derive_constants(qi.lambda, qi.c, n, m, cfg.constants.big_r, None)?;
    let opts = cauchy_options(cfg);
    let horizon = cfg.sequence();
    let nf = to_f64(&n);
    let s5 = 5f64.sqrt();
    let alpha = BoundaryPoint::Flat { direction: vec![2.0 / s5, 1.0 / s5] };
    let map = build_boundary_map(&ax, &ay, &alpha, nf, horizon, &opts)?;
    let tracking = verify_tracking_bounds(&ax, &ay, &map, &k)?;
    let mut bounds = Table::new("tracking_bounds", &["id", "statement", "bound", "worst", "checked", "violations"]);
    for b in &tracking.checks {
        bounds.push(vec![b.id.to_string(), b.statement.clone(), f(b.bound), f(b.worst), b.checked.to_string(), b.violations.to_string()]);
    }
    report.check("tracking_bounds", tracking.holds, true, format!("six bounds along (2,1)/√5 to horizon {horizon}"));
    report.tables.push(bounds);
    report.result("tracking", &tracking)?;

    let (bx, by) = (ax.lattice_basis().expect("lattice"), ay.lattice_basis().expect("lattice"));
    let mut phi = Table::new("boundary_map", &["k", "direction", "image", "predicted", "error"]);
    let mut worst = 0.0f64;
    for j in 0..16 {
        let t = std::f64::consts::TAU * j as f64 / 16.0;
        let d = vec![t.cos(), t.sin()];
        let map = build_boundary_map(&ax, &ay, &BoundaryPoint::Flat { direction: d.clone() }, nf, horizon, &opts)?;
        let predicted = predicted_direction(bx, by, &d)
            .ok_or_else(|| ExperimentError::Invalid("singular lattice basis".into()))?;
        let (image, err) = match &map.image {
            ConvergenceVerdict::ConvergesTo { point: BoundaryPoint::Flat { direction }, .. } => {
                let e = direction.iter().zip(&predicted).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                (format!("({:.6}, {:.6})", direction[0], direction[1]), e)
            }
            v => (verdict_name(v).to_string(), f64::INFINITY),
        };
        worst = worst.max(err);
        phi.push(vec![
            j.to_string(),
            format!("({:.6}, {:.6})", d[0], d[1]),
            image,
            format!("({:.6}, {:.6})", predicted[0], predicted[1]),
            f(err),
        ]);
    }
    report.check("boundary_map_linear", worst < 0.05, false, format!("max direction error {worst:.4} over 16 directions"));
    report.tables.push(phi);
    Ok(report)
}

fn rigid_complex(
    cfg: &ExperimentConfig,
    exec: Exec,
    ax: &Action,
    ay: &Action,
    mut report: Report,
) -> Result<Report, ExperimentError> {
    let fam = ax.family();
    let mut worst = 0.0f64;
    let mut checked = 0;
    for a in [ax, ay] {
        let Space::Complex(c) = a.space() else { continue };
        let elems: Vec<GroupElement> = ball(fam, &WeightAssignment::unit(fam), &q(3))
            .into_iter()
            .filter(|g| !fam.is_identity(g))
            .collect();
        let o = a.space().basepoint();
        let errs: Vec<Result<f64, ExperimentError>> = exec.map(&elems, |g| {
            let p = a.orbit_point(g)?;
            let half = a.space().distance(&o, &p)? / 2.0;
            let SpacePoint::Complex(mid) = a.space().geodesic_eval(&o, &p, half)? else {
                return Err(SpaceError::Mismatch.into());
            };
            let SpacePoint::Complex(pv) = &p else { return Err(SpaceError::Mismatch.into()) };
            let id = c.vertex(&fam.identity());
            let e1 = (complex_distance(c, &id, pv)? - c.distance(&id, pv)).abs();
            let e2 = (complex_distance(c, &mid, pv)? - c.distance(&mid, pv)).abs();
            Ok(e1.max(e2))
        });
        for e in errs {
            worst = worst.max(e?);
            checked += 1;
        }
    }
    report.check(
        "distance_oracle",
        worst < 1e-6,
        true,
        format!("closed-form distances against graph shortest paths on {checked} elements, max error {worst:.3e}"),
    );
    let l = cfg.horizons.ball.min(4);
    let table = minimal_m_table(ax, ay, &cfg.constants.n, l, exec)?;
    report.tables.push(m_hat_rows(&table));
    report.result("m_hat_table", &table)?;
    report.notes.push("boundary map samples need limit points, which are not computed in gluing complexes".into());
    Ok(report)
}

/// Cyclically reduced nontrivial words of `F2` with at most `max_len` letters.
fn cyclic_words(max_len: u64) -> Result<Vec<Vec<Letter>>, GroupError> {
    let f2 = parse_family("F2")?;
    let mut out: Vec<Vec<Letter>> = ball(&f2, &WeightAssignment::unit(&f2), &Q::from_integer(max_len as i128))
        .into_iter()
        .map(|g| f2.letters(&g))
        .filter(|w| !w.is_empty() && w[0] != w[w.len() - 1].inverse())
        .collect();
    out.sort();
    Ok(out)
}

pub fn run_conjecture_scan(cfg: &ExperimentConfig, exec: Exec) -> Result<Report, ExperimentError> {
    let fam = parse_family("(F2xZ)*Z2")?;
    let f2 = parse_family("F2")?;
    let mut report = Report::new(cfg);
    let max = cfg.horizons.word_length;
    let words = cyclic_words(max.saturating_sub(1))?;
    let mut elements: Vec<(Vec<Letter>, u64)> = Vec::new();
    for w in &words {
        for k in 1..=max - w.len() as u64 {
            elements.push((w.clone(), k));
        }
    }
    let t = parse_word(&fam, "t")?[0];
    let mut spectra: Vec<Vec<f64>> = Vec::new();
    let mut cross = 0.0f64;
    for &(p, qq) in &cfg.pairs {
        let c = crate::spaces::FreeProductComplex::new(
            fam.clone(),
            vec![PieceSpec::TreeTimesLine { weights: vec![q(p as i128), q(qq as i128)] }, PieceSpec::Interval { length: q(1) }],
        )?;
        let w = WeightAssignment::new(&f2, vec![q(p as i128), q(qq as i128)])?;
        let rows: Vec<Result<(f64, f64), ExperimentError>> = exec.map(&elements, |(word, k)| {
            let len = to_f64(&word.iter().map(|l| w.weight(*l)).sum::<Q>());
            let mut full = word.clone();
            full.extend(std::iter::repeat(t).take(*k as usize));
            let g = fam.reduce(&full)?;
            let cube = fam.pow(&g, 3);
            let err = (c.orbit_length(&cube) - 3.0 * len.hypot(*k as f64)).abs();
            Ok(((*k as f64 / len).atan(), err))
        });
        let mut angles = Vec::with_capacity(rows.len());
        for r in rows {
            let (a, e) = r?;
            cross = cross.max(e);
            angles.push(a);
        }
        spectra.push(angles);
    }
    report.check(
        "periodic_lengths",
        cross < 1e-9,
        true,
        format!("|(w,k)³| = 3·√(ℓ(w)² + k²) on every sampled element, max error {cross:.3e}"),
    );

    let mut cols = vec!["word".to_string(), "k".to_string()];
    cols.extend(cfg.pairs.iter().map(|(p, q)| format!("angle_{p}_{q}")));
    let mut table = Table { name: "spectrum".into(), columns: cols, rows: Vec::new() };
    for (i, (w, k)) in elements.iter().enumerate() {
        let mut row = vec![crate::groups::format_word(&f2, w), k.to_string()];
        row.extend(spectra.iter().map(|s| f(s[i])));
        table.push(row);
    }
    report.tables.push(table);

    let mut dist = Table::new("distances", &["pair_a", "pair_b", "max_entry_difference", "hausdorff"]);
    let mut all = Vec::new();
    for i in 0..spectra.len() {
        for j in i + 1..spectra.len() {
            let entry = spectra[i].iter().zip(&spectra[j]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let h = hausdorff(&spectra[i], &spectra[j]);
            let name = |k: usize| format!("({}, {})", cfg.pairs[k].0, cfg.pairs[k].1);
            dist.push(vec![name(i), name(j), f(entry), f(h)]);
            all.push(serde_json::json!({ "a": cfg.pairs[i], "b": cfg.pairs[j], "max_entry_difference": entry, "hausdorff": h }));
        }
    }
    report.tables.push(dist);
    report.result("distances", &all)?;
    report.result("disclaimer", &SCAN_DISCLAIMER)?;
    report.notes.push(SCAN_DISCLAIMER.into());
    Ok(report)
}

/// Hausdorff distance between two finite sets of reals.
pub fn hausdorff(a: &[f64], b: &[f64]) -> f64 {
    let one_way = |x: &[f64], y: &[f64]| {
        x.iter()
            .map(|u| y.iter().map(|v| (u - v).abs()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubling_words_have_length_two_pow_n() {
        let fam = parse_family("F2xZ").unwrap();
        let d = DoublingFamily::example_6_1(&fam).unwrap();
        for (i, w) in d.words(8).iter().enumerate() {
            assert_eq!(w.len(), 1 << (i + 1));
        }
        let w = WeightAssignment::new(&parse_family("F2").unwrap(), vec![q(2), q(1)]).unwrap();
        assert_eq!(d.ratio_recurrence(&w, 2), vec![Q::new(3, 2), Q::new(7, 4)]);
    }

    #[test]
    fn hausdorff_is_symmetric() {
        assert_eq!(hausdorff(&[0.0, 1.0], &[0.0]), 1.0);
        assert_eq!(hausdorff(&[0.0], &[0.0, 1.0]), 1.0);
    }
}
