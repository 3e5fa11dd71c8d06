//! Orbit segment conditions for a pair of actions of one group, the derived
//! constants, and the boundary map built by tracking a ray with orbit points.
//!
//! Condition (*) asks that whenever `a·x₀` is within `N` of `[x₀, g·x₀]`,
//! `a·y₀` is within `M` of `[y₀, g·y₀]`. The scans below enumerate `g` in a
//! unit-length ball and, for each `g`, only the `a` that can possibly be
//! within `N` of the segment.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::actions::{cocompactness_radius, line_elem_at, Action, ActionError};
use crate::boundary::{
    is_cauchy, limit_point, ray_eval, BoundaryError, BoundaryPoint, CauchyOptions, CauchyReport, ConvergenceVerdict,
};
use crate::exec::Exec;
use crate::groups::{ball, GroupElement, GroupError, GroupFamily, Letter, WeightAssignment};
use crate::num::{common_denominator, qser, scaled_int, to_f64, Frac, Q};
use crate::spaces::flat::origin_segment_sq_exact;
use crate::spaces::product::{product_segment_sq, product_segment_sq_exact};
use crate::spaces::{GeodesicPath, Space, SpaceError, SpacePoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConditionError {
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("invalid constant: {0}")]
    InvalidConstant(String),
    #[error("ray point {i} is {distance} from the orbit, more than N = {n}")]
    NoOrbitNear { i: usize, n: f64, distance: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// Constants of the tracking argument, all exact.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantSet {
    #[serde(with = "qser")]
    pub lambda: Q,
    #[serde(with = "qser")]
    pub c: Q,
    #[serde(with = "qser")]
    pub n: Q,
    #[serde(with = "qser")]
    pub m: Q,
    #[serde(with = "qser")]
    pub big_r: Q,
    #[serde(with = "qser")]
    pub n_tilde: Q,
    /// `λ(N+Ñ)+C+M`
    #[serde(with = "qser")]
    pub m_tilde: Q,
    /// `λ(2N+1)+2M+C`
    #[serde(with = "qser")]
    pub m_prime: Q,
    /// `λ(R+C+M)+N`
    #[serde(with = "qser")]
    pub r: Q,
}

/// Derives `M̃`, `M′` and `r`; `Ñ` defaults to `2N`.
pub fn derive_constants(
    lambda: Q,
    c: Q,
    n: Q,
    m: Q,
    big_r: Q,
    n_tilde: Option<Q>,
) -> Result<ConstantSet, ConditionError> {
    let zero = Q::from_integer(0);
    let n_tilde = n_tilde.unwrap_or(n * Q::from_integer(2));
    for (name, v) in [("λ", lambda), ("N", n), ("M", m), ("R", big_r), ("Ñ", n_tilde)] {
        if v <= zero {
            return Err(ConditionError::InvalidConstant(format!("{name} = {v} must be positive")));
        }
    }
    if c < zero {
        return Err(ConditionError::InvalidConstant(format!("C = {c} must be nonnegative")));
    }
    let one = Q::from_integer(1);
    let two = Q::from_integer(2);
    Ok(ConstantSet {
        lambda,
        c,
        n,
        m,
        big_r,
        n_tilde,
        m_tilde: lambda * (n + n_tilde) + c + m,
        m_prime: lambda * (two * n + one) + two * m + c,
        r: lambda * (big_r + c + m) + n,
    })
}

/// Whether `path` meets the closed ball `B(center, radius)`.
pub fn segment_ball_intersects(
    space: &Space,
    path: &GeodesicPath,
    center: &SpacePoint,
    radius: f64,
) -> Result<bool, ConditionError> {
    Ok(space.point_to_path(center, path)?.0 <= radius + 1e-12)
}

/// A squared distance, exact when the scan could compute it exactly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum SqDist {
    Exact(#[serde(with = "qser")] Q),
    Approx(f64),
}

impl SqDist {
    pub fn sq(&self) -> f64 {
        match self {
            SqDist::Exact(q) => to_f64(q),
            SqDist::Approx(x) => *x,
        }
    }

    pub fn dist(&self) -> f64 {
        self.sq().max(0.0).sqrt()
    }

    pub fn cmp(&self, other: &SqDist) -> Ordering {
        match (self, other) {
            (SqDist::Exact(a), SqDist::Exact(b)) => a.cmp(b),
            _ => self.sq().total_cmp(&other.sq()),
        }
    }

    /// Strictly farther than `m`.
    pub fn exceeds(&self, m: &Q) -> bool {
        match self {
            SqDist::Exact(q) => *q > m * m,
            SqDist::Approx(x) => x.sqrt() > to_f64(m) + 1e-9,
        }
    }
}

#[derive(Clone, Debug)]
struct Hit {
    g: GroupElement,
    a: GroupElement,
    g_len: u64,
    a_len: u64,
    y: SqDist,
}

#[derive(Clone, Debug, Default)]
struct Bucket {
    g_count: usize,
    pairs: usize,
    max: Option<Hit>,
    violation: Option<Hit>,
}

fn key_cmp(fam: &GroupFamily, h: &Hit, other: &Hit) -> Ordering {
    let unit = WeightAssignment::unit(fam);
    (h.g_len, h.a_len)
        .cmp(&(other.g_len, other.a_len))
        .then_with(|| fam.enumeration_cmp(&unit, &h.g, &other.g))
        .then_with(|| fam.enumeration_cmp(&unit, &h.a, &other.a))
}

impl Bucket {
    /// Offers a pair; `build` is only called when the pair could replace a
    /// stored one.
    fn offer(
        &mut self,
        fam: &GroupFamily,
        y: SqDist,
        lens: (u64, u64),
        m: Option<&Q>,
        build: impl Fn() -> (GroupElement, GroupElement),
    ) {
        let make = || {
            let (g, a) = build();
            Hit { g, a, g_len: lens.0, a_len: lens.1, y }
        };
        let take_max = match &self.max {
            None => true,
            Some(cur) => match y.cmp(&cur.y) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => lens <= (cur.g_len, cur.a_len),
            },
        };
        if take_max {
            let h = make();
            if self.max.as_ref().map_or(true, |cur| y.cmp(&cur.y).is_gt() || key_cmp(fam, &h, cur).is_lt()) {
                self.max = Some(h);
            }
        }
        if let Some(m) = m {
            if y.exceeds(m) && self.violation.as_ref().map_or(true, |cur| lens <= (cur.g_len, cur.a_len)) {
                let h = make();
                if self.violation.as_ref().map_or(true, |cur| key_cmp(fam, &h, cur).is_lt()) {
                    self.violation = Some(h);
                }
            }
        }
    }

    /// Whether a pair with approximate squared distance `y` could change
    /// the bucket; `m_sq` is `M²` when violations are collected.
    fn wants(&self, y: f64, m_sq: Option<f64>) -> bool {
        let tol = |v: f64| 1e-9 * (1.0 + v.abs());
        self.max.as_ref().map_or(true, |cur| {
            let c = cur.y.sq();
            y >= c - tol(c)
        }) || m_sq.is_some_and(|m| y > m - tol(m))
    }

    fn merge(&mut self, fam: &GroupFamily, other: Bucket) {
        self.g_count += other.g_count;
        self.pairs += other.pairs;
        if let Some(h) = other.max {
            let better = self.max.as_ref().map_or(true, |cur| match h.y.cmp(&cur.y) {
                Ordering::Equal => key_cmp(fam, &h, cur).is_lt(),
                o => o.is_gt(),
            });
            if better {
                self.max = Some(h);
            }
        }
        if let Some(h) = other.violation {
            if self.violation.as_ref().map_or(true, |cur| key_cmp(fam, &h, cur).is_lt()) {
                self.violation = Some(h);
            }
        }
    }
}

type Buckets = BTreeMap<u64, Bucket>;

fn merge_all(fam: &GroupFamily, parts: Vec<Result<Buckets, ConditionError>>) -> Result<Buckets, ConditionError> {
    let mut out = Buckets::new();
    for part in parts {
        for (k, b) in part? {
            out.entry(k).or_default().merge(fam, b);
        }
    }
    Ok(out)
}

const CHUNK: usize = 64;

fn base_letters(base: &GroupFamily) -> Vec<Letter> {
    let mut out = Vec::new();
    for gen in 0..base.num_generators() as u16 {
        out.push(base.letter(gen, false));
        if !base.is_involution(gen) {
            out.push(base.letter(gen, true));
        }
    }
    out
}

/// Nonempty reduced words whose weight under `weight` is at most `limit`.
fn branches(letters: &[Letter], weight: &dyn Fn(Letter) -> Q, limit: &Q) -> Vec<Vec<Letter>> {
    fn grow(
        cur: &mut Vec<Letter>,
        total: Q,
        letters: &[Letter],
        weight: &dyn Fn(Letter) -> Q,
        limit: &Q,
        out: &mut Vec<Vec<Letter>>,
    ) {
        for &l in letters {
            if cur.last().is_some_and(|p| p.inverse() == l) {
                continue;
            }
            let t = total + weight(l);
            if t <= *limit {
                cur.push(l);
                out.push(cur.clone());
                grow(cur, t, letters, weight, limit, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), Q::from_integer(0), letters, weight, limit, &mut out);
    out
}

/// Whether a branch may hang off the arc `w` after its first `k` letters.
fn branch_allowed(w: &[Letter], k: usize, first: Letter) -> bool {
    !(k < w.len() && w[k] == first) && !(k > 0 && w[k - 1].inverse() == first)
}

/// Integer data of one product action after scaling by `s`.
struct ProductSide {
    s: i128,
    weight: Vec<i128>,
    phi: Vec<i128>,
}

impl ProductSide {
    fn new(a: &Action, letters: &[Letter]) -> Result<ProductSide, ConditionError> {
        let (space, _) = a.product_parts().ok_or_else(|| ConditionError::Unsupported("not a product".into()))?;
        let (shifts, _) = a.product_shifts().expect("product action");
        let mut vals: Vec<Q> = letters.iter().map(|l| space.tree.weight_q(*l)).collect();
        vals.extend_from_slice(shifts);
        let s = common_denominator(vals.iter());
        let size = letters.iter().map(|l| l.0 as usize + 1).max().unwrap_or(0);
        let mut weight = vec![0; size];
        let mut phi = vec![0; size];
        for &l in letters {
            weight[l.0 as usize] = scaled_int(&space.tree.weight_q(l), s);
            phi[l.0 as usize] = scaled_int(&shifts[l.gen() as usize], s) * l.sign() as i128;
        }
        Ok(ProductSide { s, weight, phi })
    }

    fn prefix_sums(&self, w: &[Letter]) -> (Vec<i128>, Vec<i128>) {
        let mut d = vec![0i128; w.len() + 1];
        let mut p = vec![0i128; w.len() + 1];
        for (i, l) in w.iter().enumerate() {
            d[i + 1] = d[i] + self.weight[l.0 as usize];
            p[i + 1] = p[i] + self.phi[l.0 as usize];
        }
        (d, p)
    }

    fn sums(&self, w: &[Letter]) -> (i128, i128) {
        w.iter()
            .fold((0, 0), |(d, p), l| (d + self.weight[l.0 as usize], p + self.phi[l.0 as usize]))
    }
}

/// Squared distance, in units of `1/s²`, from height `xh` at tree offset
/// `delta` off the arc at `u` to the segment; exact when it fits.
fn product_sq(dt: i128, dh: i128, u: i128, delta: i128, xh: i128) -> Result<Frac, f64> {
    product_segment_sq_exact(dt, dh, 0, u, delta, xh)
        .ok_or_else(|| product_segment_sq(dt as f64, dh as f64, 0.0, u as f64, delta as f64, xh as f64).0)
}

fn scan_product(ax: &Action, ay: &Action, n: &Q, m: Option<&Q>, l: u64, exec: Exec) -> Result<Buckets, ConditionError> {
    let (_, base) = ax.product_parts().expect("checked by caller");
    let (_, line) = ax.product_shifts().expect("product action");
    let fam = ax.family();
    let letters = base_letters(base);
    let xs = ProductSide::new(ax, &letters)?;
    let ys = ProductSide::new(ay, &letters)?;
    let (xspace, _) = ax.product_parts().expect("product action");
    let brs: Vec<(Vec<Letter>, (i128, i128), (i128, i128))> =
        branches(&letters, &|l| xspace.tree.weight_q(l), n)
            .into_iter()
            .map(|b| {
                let (sx, sy) = (xs.sums(&b), ys.sums(&b));
                (b, sx, sy)
            })
            .collect();
    let n_sq_scaled = n * n * Q::from_integer(xs.s * xs.s);
    let ns = to_f64(n) * xs.s as f64;
    let ys_sq = Q::from_integer(ys.s * ys.s);
    let ns_sq = ns * ns;
    let ys_sq_f = (ys.s * ys.s) as f64;
    let m_sq = m.map(|m| to_f64(m) * to_f64(m));
    let near = |v: f64| 1e-9 * (1.0 + v);
    let bases = ball(base, &WeightAssignment::unit(base), &Q::from_integer(l as i128));
    let chunks: Vec<&[GroupElement]> = bases.chunks(CHUNK).collect();
    let empty: (Vec<Letter>, (i128, i128), (i128, i128)) = (Vec::new(), (0, 0), (0, 0));
    let parts = exec.map(&chunks, |chunk| {
        let mut out = Buckets::new();
        for b in chunk.iter() {
            let w = base.letters(b);
            let mlen = w.len();
            let (dx, px) = xs.prefix_sums(&w);
            let (dy, py) = ys.prefix_sums(&w);
            let rest = (l as i64) - mlen as i64;
            for tg in -rest..=rest {
                let g_len = mlen as u64 + tg.unsigned_abs();
                let bucket = out.entry(g_len).or_insert_with(Bucket::default);
                bucket.g_count += 1;
                let hx = tg as i128 * xs.s + px[mlen];
                let hy = tg as i128 * ys.s + py[mlen];
                let dt = dx[mlen];
                for k in 0..=mlen {
                    for (br, (bwx, bpx), (bwy, bpy)) in std::iter::once(&empty).chain(brs.iter()) {
                        if let Some(&first) = br.first() {
                            if !branch_allowed(&w, k, first) {
                                continue;
                            }
                        }
                        let u = dx[k];
                        let slack = ns - *bwx as f64;
                        let (slo, shi) = if dt > 0 {
                            (((u as f64 - slack) / dt as f64).max(0.0), ((u as f64 + slack) / dt as f64).min(1.0))
                        } else {
                            (0.0, 1.0)
                        };
                        if slo > shi + 1e-12 {
                            continue;
                        }
                        let (h1, h2) = (slo * hx as f64, shi * hx as f64);
                        let vphi = px[k] + bpx;
                        let lo = ((h1.min(h2) - ns - vphi as f64) / xs.s as f64).ceil() as i64 - 1;
                        let hi = ((h1.max(h2) + ns - vphi as f64) / xs.s as f64).floor() as i64 + 1;
                        for t in lo..=hi {
                            let xh = t as i128 * xs.s + vphi;
                            let approx = product_segment_sq(dt as f64, hx as f64, 0.0, u as f64, *bwx as f64, xh as f64).0;
                            let inside = if approx < ns_sq - near(ns_sq) {
                                true
                            } else if approx > ns_sq + near(ns_sq) {
                                false
                            } else {
                                match product_sq(dt, hx, u, *bwx, xh) {
                                    Ok(f) => f.cmp_q(&n_sq_scaled) != Ordering::Greater,
                                    Err(x) => x.sqrt() <= ns + 1e-9 * xs.s as f64,
                                }
                            };
                            if !inside {
                                continue;
                            }
                            bucket.pairs += 1;
                            let yh = t as i128 * ys.s + py[k] + bpy;
                            let y_approx =
                                product_segment_sq(dy[mlen] as f64, hy as f64, 0.0, dy[k] as f64, *bwy as f64, yh as f64).0
                                    / ys_sq_f;
                            if !bucket.wants(y_approx, m_sq) {
                                continue;
                            }
                            let y = match product_sq(dy[mlen], hy, dy[k], *bwy, yh) {
                                Ok(f) => SqDist::Exact(f.to_q() / ys_sq),
                                Err(x) => SqDist::Approx(x / (ys.s * ys.s) as f64),
                            };
                            let a_len = (k + br.len()) as u64 + t.unsigned_abs();
                            bucket.offer(fam, y, (g_len, a_len), m, || {
                                let g = GroupElement::WithLine(Box::new(b.clone()), line_elem_at(line, tg));
                                let mut v = w[..k].to_vec();
                                v.extend_from_slice(br);
                                let vb = base.reduce(&v).expect("reduced base word");
                                (g, GroupElement::WithLine(Box::new(vb), line_elem_at(line, t)))
                            });
                        }
                    }
                }
            }
        }
        Ok(out)
    });
    merge_all(fam, parts)
}

fn scaled_basis(basis: &[Vec<Q>]) -> (i128, Vec<Vec<i128>>) {
    let s = common_denominator(basis.iter().flatten());
    (s, basis.iter().map(|r| r.iter().map(|v| scaled_int(v, s)).collect()).collect())
}

fn combine(z: &[i64], rows: &[Vec<i128>]) -> Vec<i128> {
    let mut out = vec![0i128; rows[0].len()];
    for (zi, row) in z.iter().zip(rows) {
        for (o, b) in out.iter_mut().zip(row) {
            *o += *zi as i128 * b;
        }
    }
    out
}

fn scan_flat(ax: &Action, ay: &Action, n: &Q, m: Option<&Q>, l: u64, exec: Exec) -> Result<Buckets, ConditionError> {
    let bx = ax.lattice_basis().expect("checked by caller");
    let by = ay.lattice_basis().expect("checked by caller");
    let dim = bx.len();
    let fam = ax.family();
    let (sx, ix) = scaled_basis(bx);
    let (sy, iy) = scaled_basis(by);
    let inverse = DMatrix::from_fn(dim, dim, |i, j| to_f64(&bx[j][i]))
        .try_inverse()
        .ok_or_else(|| ConditionError::InvalidConstant("singular lattice basis".into()))?;
    let nf = to_f64(n);
    let n_sq_scaled = n * n * Q::from_integer(sx * sx);
    let ys_sq = Q::from_integer(sy * sy);
    let gs = ball(fam, &WeightAssignment::unit(fam), &Q::from_integer(l as i128));
    let chunks: Vec<&[GroupElement]> = gs.chunks(CHUNK).collect();
    let parts = exec.map(&chunks, |chunk| {
        let mut out = Buckets::new();
        for g in chunk.iter() {
            let GroupElement::Abelian(zg) = g else { unreachable!("lattice elements") };
            let g_len: u64 = zg.iter().map(|v| v.unsigned_abs()).sum();
            let bucket = out.entry(g_len).or_insert_with(Bucket::default);
            bucket.g_count += 1;
            let px = combine(zg, &ix);
            let py = combine(zg, &iy);
            let mut lo = vec![i64::MAX; dim];
            let mut hi = vec![i64::MIN; dim];
            for code in 0..(1usize << dim) {
                let corner: Vec<f64> = (0..dim)
                    .map(|i| {
                        let e = px[i] as f64 / sx as f64;
                        if code >> i & 1 == 1 {
                            e.max(0.0) + nf
                        } else {
                            e.min(0.0) - nf
                        }
                    })
                    .collect();
                let c = &inverse * DVector::from_column_slice(&corner);
                for i in 0..dim {
                    lo[i] = lo[i].min(c[i].floor() as i64 - 1);
                    hi[i] = hi[i].max(c[i].ceil() as i64 + 1);
                }
            }
            let mut z = lo.clone();
            loop {
                let fx = origin_segment_sq_exact(&combine(&z, &ix), &px);
                if fx.cmp_q(&n_sq_scaled) != Ordering::Greater {
                    bucket.pairs += 1;
                    let y = SqDist::Exact(origin_segment_sq_exact(&combine(&z, &iy), &py).to_q() / ys_sq);
                    let a_len: u64 = z.iter().map(|v| v.unsigned_abs()).sum();
                    bucket.offer(fam, y, (g_len, a_len), m, || (g.clone(), GroupElement::Abelian(z.clone())));
                }
                let mut i = 0;
                while i < dim && z[i] == hi[i] {
                    z[i] = lo[i];
                    i += 1;
                }
                if i == dim {
                    break;
                }
                z[i] += 1;
            }
        }
        Ok(out)
    });
    merge_all(fam, parts)
}

/// Candidates for `a` when `X` is a tree or a complex: every element whose
/// orbit point can be within `n` of `path`.
fn generic_candidates(ax: &Action, g: &GroupElement, path: &GeodesicPath, n: &Q) -> Result<Vec<GroupElement>, ConditionError> {
    let fam = ax.family();
    match ax.space() {
        Space::Tree(t) => {
            let w = fam.letters(g);
            let letters = base_letters(fam);
            let brs = branches(&letters, &|l| t.weight_q(l), n);
            let mut out = Vec::new();
            for k in 0..=w.len() {
                out.push(fam.reduce(&w[..k])?);
                for br in brs.iter().filter(|br| branch_allowed(&w, k, br[0])) {
                    let mut v = w[..k].to_vec();
                    v.extend_from_slice(br);
                    out.push(fam.reduce(&v)?);
                }
            }
            Ok(out)
        }
        Space::Complex(c) => {
            let pieces: Vec<_> = path.segments.iter().filter_map(|s| s.piece.clone()).collect();
            Ok(c.orbit_near_path(&pieces, to_f64(n))?)
        }
        _ => Err(ConditionError::Unsupported("orbit search for this pair of actions".into())),
    }
}

fn scan_generic(ax: &Action, ay: &Action, n: &Q, m: Option<&Q>, l: u64, exec: Exec) -> Result<Buckets, ConditionError> {
    let fam = ax.family();
    let nf = to_f64(n);
    let gs = ball(fam, &WeightAssignment::unit(fam), &Q::from_integer(l as i128));
    let chunks: Vec<&[GroupElement]> = gs.chunks(CHUNK).collect();
    let (ox, oy) = (ax.basepoint(), ay.basepoint());
    let parts = exec.map(&chunks, |chunk| {
        let mut out = Buckets::new();
        for g in chunk.iter() {
            let g_len = fam.word_length(g);
            let bucket = out.entry(g_len).or_insert_with(Bucket::default);
            bucket.g_count += 1;
            let xpath = ax.space().geodesic(&ox, &ax.orbit_point(g)?)?;
            let ypath = ay.space().geodesic(&oy, &ay.orbit_point(g)?)?;
            for a in generic_candidates(ax, g, &xpath, n)? {
                let dx = ax.space().point_to_path(&ax.orbit_point(&a)?, &xpath)?.0;
                if dx > nf + 1e-9 {
                    continue;
                }
                bucket.pairs += 1;
                let dy = ay.space().point_to_path(&ay.orbit_point(&a)?, &ypath)?.0;
                let a_len = fam.word_length(&a);
                bucket.offer(fam, SqDist::Approx(dy * dy), (g_len, a_len), m, || (g.clone(), a.clone()));
            }
        }
        Ok(out)
    });
    merge_all(fam, parts)
}

fn scan(ax: &Action, ay: &Action, n: &Q, m: Option<&Q>, l: u64, exec: Exec) -> Result<Buckets, ConditionError> {
    if ax.family() != ay.family() {
        return Err(ActionError::DifferentGroups(ax.family().to_string(), ay.family().to_string()).into());
    }
    if *n <= Q::from_integer(0) {
        return Err(ConditionError::InvalidConstant(format!("N = {n} must be positive")));
    }
    match (ax.space(), ay.space()) {
        (Space::Product(_), Space::Product(_)) => scan_product(ax, ay, n, m, l, exec),
        (Space::Flat(_), Space::Flat(_)) => scan_flat(ax, ay, n, m, l, exec),
        (Space::Tree(_) | Space::Complex(_), _) => scan_generic(ax, ay, n, m, l, exec),
        _ => Err(ConditionError::Unsupported("orbit search for this pair of actions".into())),
    }
}

/// A pair `(g, a)` with its distances recomputed through the generic space
/// routines.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StarWitness {
    pub g: String,
    pub a: String,
    pub g_len: u64,
    pub a_len: u64,
    pub x_distance: f64,
    /// Arclength along `[x₀, g·x₀]` of the point nearest `a·x₀`.
    pub x_foot: f64,
    pub y_distance: f64,
    pub y_sq: SqDist,
}

fn replay(ax: &Action, ay: &Action, h: &Hit) -> Result<StarWitness, ConditionError> {
    let fam = ax.family();
    let xpath = ax.space().geodesic(&ax.basepoint(), &ax.orbit_point(&h.g)?)?;
    let ypath = ay.space().geodesic(&ay.basepoint(), &ay.orbit_point(&h.g)?)?;
    let (x_distance, x_foot) = ax.space().point_to_path(&ax.orbit_point(&h.a)?, &xpath)?;
    let y_distance = ay.space().point_to_path(&ay.orbit_point(&h.a)?, &ypath)?.0;
    Ok(StarWitness {
        g: fam.format(&h.g),
        a: fam.format(&h.a),
        g_len: h.g_len,
        a_len: h.a_len,
        x_distance,
        x_foot,
        y_distance,
        y_sq: h.y,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StarReport {
    pub n: f64,
    pub m: f64,
    pub ball: u64,
    /// Exact squared covering radius of the `X` orbit, when known.
    pub covering_sq: Option<String>,
    /// Whether `N` reaches the covering radius of the `X` orbit.
    pub covers: bool,
    pub holds: bool,
    pub elements: usize,
    pub pairs: usize,
    /// The pair with the largest `Y` distance.
    pub max_pair: Option<StarWitness>,
    /// The least pair, by `(|g|, |a|, enumeration order)`, exceeding `M`.
    pub witness: Option<StarWitness>,
}

fn covering_ok(ax: &Action, n: &Q, exec: Exec) -> Result<(bool, Option<String>), ConditionError> {
    match ax.covering_sq_closed_form() {
        Some(sq) => Ok((n * n >= sq, Some(sq.to_string()))),
        None => {
            let est = cocompactness_radius(ax, &Q::from_integer(3), 8, exec)?;
            Ok((to_f64(n) + 1e-9 >= est.n, None))
        }
    }
}

/// Checks (*) for `g` in the unit ball of radius `l`.
pub fn check_condition_star(
    ax: &Action,
    ay: &Action,
    n: &Q,
    m: &Q,
    l: u64,
    exec: Exec,
) -> Result<StarReport, ConditionError> {
    let (covers, covering_sq) = covering_ok(ax, n, exec)?;
    let buckets = scan(ax, ay, n, Some(m), l, exec)?;
    let fam = ax.family();
    let mut all = Bucket::default();
    for (_, b) in buckets {
        all.merge(fam, b);
    }
    let witness = all.violation.as_ref().map(|h| replay(ax, ay, h)).transpose()?;
    Ok(StarReport {
        n: to_f64(n),
        m: to_f64(m),
        ball: l,
        covering_sq,
        covers,
        holds: covers && witness.is_none(),
        elements: all.g_count,
        pairs: all.pairs,
        max_pair: all.max.as_ref().map(|h| replay(ax, ay, h)).transpose()?,
        witness,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MRow {
    pub ball: u64,
    /// Smallest `M` for which (*) holds on the ball.
    pub m_hat: SqDist,
    pub m_hat_value: f64,
    pub elements: usize,
    pub pairs: usize,
    pub witness: Option<StarWitness>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MTable {
    pub n: f64,
    pub covers: bool,
    pub rows: Vec<MRow>,
}

/// `M̂(L′)` for every `L′ ≤ l`, from one scan of the ball of radius `l`.
pub fn minimal_m_table(ax: &Action, ay: &Action, n: &Q, l: u64, exec: Exec) -> Result<MTable, ConditionError> {
    let (covers, _) = covering_ok(ax, n, exec)?;
    let buckets = scan(ax, ay, n, None, l, exec)?;
    let fam = ax.family();
    let mut acc = Bucket::default();
    let mut rows = Vec::new();
    for radius in 0..=l {
        if let Some(b) = buckets.get(&radius) {
            acc.merge(fam, b.clone());
        }
        let m_hat = acc.max.as_ref().map_or(SqDist::Exact(Q::from_integer(0)), |h| h.y);
        rows.push(MRow {
            ball: radius,
            m_hat,
            m_hat_value: m_hat.dist(),
            elements: acc.g_count,
            pairs: acc.pairs,
            witness: acc.max.as_ref().map(|h| replay(ax, ay, h)).transpose()?,
        });
    }
    Ok(MTable { n: to_f64(n), covers, rows })
}

/// A named sequence of group elements.
#[derive(Clone, Debug)]
pub struct NamedSequence {
    pub name: String,
    pub elements: Vec<GroupElement>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoubleStarRow {
    pub name: String,
    pub x: CauchyReport,
    pub y: CauchyReport,
    /// 1: Cauchy in `X` only, so the orbit map has no continuous extension.
    /// 2: Cauchy in `Y` only, so its inverse has none.
    pub case: Option<u8>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoubleStarReport {
    pub rows: Vec<DoubleStarRow>,
    pub holds: bool,
}

/// Checks (**) on each sequence: `{g_i x₀}` is Cauchy iff `{g_i y₀}` is.
pub fn check_condition_doublestar(
    ax: &Action,
    ay: &Action,
    seqs: &[NamedSequence],
    opts: &CauchyOptions,
) -> Result<DoubleStarReport, ConditionError> {
    let mut rows = Vec::new();
    for s in seqs {
        let px = s.elements.iter().map(|g| ax.orbit_point(g)).collect::<Result<Vec<_>, _>>()?;
        let py = s.elements.iter().map(|g| ay.orbit_point(g)).collect::<Result<Vec<_>, _>>()?;
        let x = is_cauchy(ax.space(), &px, opts)?;
        let y = is_cauchy(ay.space(), &py, opts)?;
        let case = match (x.verdict.is_cauchy(), y.verdict.is_cauchy()) {
            (true, false) => Some(1),
            (false, true) => Some(2),
            _ => None,
        };
        rows.push(DoubleStarRow { name: s.name.clone(), x, y, case });
    }
    let holds = rows.iter().all(|r| r.case.is_none());
    Ok(DoubleStarReport { rows, holds })
}

/// Orbit points tracking the ray to `α` and the limit of their images.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryMap {
    pub alpha: BoundaryPoint,
    #[serde(skip)]
    pub elements: Vec<GroupElement>,
    pub words: Vec<String>,
    /// `d(g_i x₀, ξ_α(i))`.
    pub offsets: Vec<f64>,
    pub image: ConvergenceVerdict,
}

/// For `i = 1..=horizon`, picks the orbit point nearest `ξ_α(i)` (ties by
/// enumeration order) and takes the limit of the `Y` orbit points.
pub fn build_boundary_map(
    ax: &Action,
    ay: &Action,
    alpha: &BoundaryPoint,
    n: f64,
    horizon: usize,
    opts: &CauchyOptions,
) -> Result<BoundaryMap, ConditionError> {
    let fam = ax.family();
    let mut elements = Vec::with_capacity(horizon);
    let mut offsets = Vec::with_capacity(horizon);
    for i in 1..=horizon {
        let p = ray_eval(ax.space(), alpha, i as f64)?;
        let (g, d) = ax.nearest_orbit(&p)?;
        if d > n + 1e-9 {
            return Err(ConditionError::NoOrbitNear { i, n, distance: d });
        }
        elements.push(g);
        offsets.push(d);
    }
    let py = elements.iter().map(|g| ay.orbit_point(g)).collect::<Result<Vec<_>, _>>()?;
    let image = limit_point(ay.space(), &py, opts)?;
    Ok(BoundaryMap {
        alpha: alpha.clone(),
        words: elements.iter().map(|g| fam.format(g)).collect(),
        elements,
        offsets,
        image,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub id: u8,
    pub statement: String,
    pub bound: f64,
    pub worst: f64,
    pub checked: usize,
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrackingBoundsReport {
    pub constants: ConstantSet,
    pub horizon: usize,
    pub checks: Vec<BoundCheck>,
    pub holds: bool,
}

fn bound_check(id: u8, statement: &str, bound: f64, values: impl IntoIterator<Item = f64>) -> BoundCheck {
    let mut worst = 0.0f64;
    let mut checked = 0;
    let mut violations = 0;
    for v in values {
        worst = worst.max(v);
        checked += 1;
        if v > bound + 1e-9 {
            violations += 1;
        }
    }
    BoundCheck { id, statement: statement.into(), bound, worst, checked, violations }
}

/// Step along the image ray when checking that it stays near the `Y` orbit
/// points.
const RAY_STEP: f64 = 0.25;

/// Checks the six tracking bounds along `map`. Bounds (3) and (6) need the
/// image limit; they are reported as violated when it was not found.
pub fn verify_tracking_bounds(ax: &Action, ay: &Action, map: &BoundaryMap, k: &ConstantSet) -> Result<TrackingBoundsReport, ConditionError> {
    let (x, y) = (ax.space(), ay.space());
    let (ox, oy) = (ax.basepoint(), ay.basepoint());
    let gs = &map.elements;
    let h = gs.len();
    let px = gs.iter().map(|g| ax.orbit_point(g)).collect::<Result<Vec<_>, _>>()?;
    let py = gs.iter().map(|g| ay.orbit_point(g)).collect::<Result<Vec<_>, _>>()?;
    let (lam, c, n) = (to_f64(&k.lambda), to_f64(&k.c), to_f64(&k.n));
    let (nt, mt) = (to_f64(&k.n_tilde), to_f64(&k.m_tilde));

    let mut b1 = Vec::new();
    let mut b2 = Vec::new();
    for j in 1..h {
        let xpath = x.geodesic(&ox, &px[j])?;
        let ypath = y.geodesic(&oy, &py[j])?;
        for i in 0..j {
            b1.push(x.point_to_path(&px[i], &xpath)?.0);
            b2.push(y.point_to_path(&py[i], &ypath)?.0);
        }
    }
    let step_x = (1..h).map(|i| x.distance(&px[i - 1], &px[i])).collect::<Result<Vec<_>, _>>()?;
    let step_y = (1..h).map(|i| y.distance(&py[i - 1], &py[i])).collect::<Result<Vec<_>, _>>()?;

    let b3_bound = mt + 1.0;
    let b6_bound = 3.0 * (mt + 1.0) + lam * (2.0 * n + 1.0) + c;
    let (b3, b6): (Vec<f64>, Vec<f64>) = match &map.image {
        ConvergenceVerdict::ConvergesTo { point, .. } => {
            let mut b3 = Vec::new();
            let mut max_foot = 0.0f64;
            for p in &py {
                let reach = y.distance(&oy, p)? + mt + 2.0;
                let end = ray_eval(y, point, reach)?;
                let path = y.geodesic(&oy, &end)?;
                let (d, foot) = y.point_to_path(p, &path)?;
                b3.push(d);
                max_foot = max_foot.max(foot);
            }
            let mut b6 = Vec::new();
            let steps = (max_foot / RAY_STEP).floor() as usize;
            for s in 0..=steps {
                let q = ray_eval(y, point, s as f64 * RAY_STEP)?;
                let mut best = f64::INFINITY;
                for p in &py {
                    best = best.min(y.distance(&q, p)?);
                }
                b6.push(best);
            }
            (b3, b6)
        }
        _ => (vec![f64::INFINITY], vec![f64::INFINITY]),
    };
    let checks = vec![
        bound_check(1, "d_X(g_i x0, [x0, g_j x0]) <= N~ for i < j", nt, b1),
        bound_check(2, "d_Y(g_i y0, [y0, g_j y0]) <= M~ for i < j", mt, b2),
        bound_check(3, "d_Y(g_i y0, image ray) <= M~ + 1", b3_bound, b3),
        bound_check(4, "d_X(g_i x0, g_{i+1} x0) <= 2N + 1", 2.0 * n + 1.0, step_x),
        bound_check(5, "d_Y(g_i y0, g_{i+1} y0) <= lambda(2N+1) + C", lam * (2.0 * n + 1.0) + c, step_y),
        bound_check(6, "image ray within 3(M~+1) + lambda(2N+1) + C of the orbit points", b6_bound, b6),
    ];
    let holds = checks.iter().all(|b| b.violations == 0);
    Ok(TrackingBoundsReport { constants: k.clone(), horizon: h, checks, holds })
}
