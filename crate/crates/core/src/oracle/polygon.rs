//! Planar perimeter descent on two polygonal chains.
//!
//! Each phase is a polygonal chain whose two endpoints slide along the axis
//! `x₁ = 0`; the chain and the axis segment between its endpoints enclose the
//! phase. The discrete cost is
//!
//! ```text
//! ρ−·len(left) + ρ+·len(right) + γ·(|t− − t+| + |b− − b+|)
//! ```
//!
//! with `t±`, `b±` the top and bottom endpoint heights, minimized under
//! `area(left) = V−/ρ−`, `area(right) = V+/ρ+`.
//!
//! Each step is a damped Newton step on the KKT system of the current active
//! set, followed by an exact projection back onto both area constraints and
//! a backtracking search that only accepts non-increasing cost. An endpoint
//! gap is either free with a fixed sign, or pinned at zero; a pinned gap is
//! released once its endpoint forces leave the subdifferential interval
//! `[−γ, γ]`. The top-left endpoint height is held fixed because the cost is
//! invariant under translations along the axis.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::geometry::ProblemParams;

/// Generalized gradient norm at which the flow counts as converged.
pub const GRAD_TOL: f64 = 1e-8;
const NOISE: f64 = 0.01;
const AREA_TOL: f64 = 1e-13;
const COST_SLACK: f64 = 1e-13;
/// Below this gradient norm, steps whose cost change is at rounding level
/// are accepted.
const NEAR_TOL: f64 = 1e-6;
const ARMIJO: f64 = 1e-4;
const RELEASE_MARGIN: f64 = 1e-9;
const MAX_HALVINGS: usize = 40;
const MU_START: f64 = 1e-6;
const MU_MAX: f64 = 1e14;

type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolygonState {
    /// Left chain from its top endpoint to its bottom endpoint.
    pub vertices_left: Vec<Point>,
    /// Right chain from its top endpoint to its bottom endpoint.
    pub vertices_right: Vec<Point>,
    /// Area multipliers `(λ−, λ+)`.
    pub multipliers: [f64; 2],
    /// Last accepted step length.
    pub step: f64,
}

impl PolygonState {
    fn chain(&self, c: usize) -> &[Point] {
        if c == 0 {
            &self.vertices_left
        } else {
            &self.vertices_right
        }
    }

    fn chain_mut(&mut self, c: usize) -> &mut Vec<Point> {
        if c == 0 {
            &mut self.vertices_left
        } else {
            &mut self.vertices_right
        }
    }

    /// Enclosed areas `(|Ω−|, |Ω+|)`.
    pub fn areas(&self) -> [f64; 2] {
        [chain_area(&self.vertices_left, 1.0), chain_area(&self.vertices_right, -1.0)]
    }

    /// Top and bottom endpoint gaps `t− − t+` and `b− − b+`.
    pub fn gaps(&self) -> [f64; 2] {
        let (l, r) = (&self.vertices_left, &self.vertices_right);
        [l[0][1] - r[0][1], l[l.len() - 1][1] - r[r.len() - 1][1]]
    }

    pub fn cost(&self, p: &ProblemParams) -> f64 {
        let [gt, gb] = self.gaps();
        p.rho_minus * chain_length(&self.vertices_left)
            + p.rho_plus * chain_length(&self.vertices_right)
            + p.gamma * (gt.abs() + gb.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConfig {
    pub n_vertices: usize,
    pub max_steps: usize,
    pub seed: u64,
    /// Record a frame every this many steps; `0` records none.
    pub frame_every: usize,
}

impl FlowConfig {
    pub fn new(n_vertices: usize, max_steps: usize, seed: u64) -> Self {
        FlowConfig { n_vertices, max_steps, seed, frame_every: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolygonFrame {
    pub step: usize,
    pub left: Vec<Point>,
    pub right: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowResult {
    pub state: PolygonState,
    /// Largest orthogonal distance to the fitted circle over the fitted
    /// radius, per chain.
    pub circle_fit_residuals: [f64; 2],
    pub fitted_radii: [f64; 2],
    pub cost_trace: Vec<f64>,
    pub steps: usize,
    pub grad_norm: f64,
    pub frames: Vec<PolygonFrame>,
}

impl FlowResult {
    pub fn final_cost(&self) -> f64 {
        *self.cost_trace.last().expect("cost trace is never empty")
    }
}

fn chain_length(v: &[Point]) -> f64 {
    v.windows(2).map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1])).sum()
}

/// Shoelace area of the chain closed along the axis; `sign` is `+1` for the
/// counter-clockwise left chain and `−1` for the right one.
fn chain_area(v: &[Point], sign: f64) -> f64 {
    let n = v.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum();
    0.5 * sign * twice
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Gap {
    /// `γ = 0`: the gap does not enter the cost.
    Free,
    Signed(f64),
    Pinned,
}

/// Coordinate bookkeeping: interior vertices carry `(x₁, x₂)`, endpoints only
/// `x₂`.
struct Layout {
    n: usize,
    per_chain: usize,
    /// Unit ray direction of every vertex, per chain.
    rays: [Vec<Point>; 2],
}

impl Layout {
    fn new(n: usize) -> Self {
        let rays = [1.0, -1.0].map(|dir| {
            (0..n)
                .map(|k| {
                    let theta = FRAC_PI_2 + dir * PI * k as f64 / (n - 1) as f64;
                    if k == 0 {
                        [0.0, 1.0]
                    } else if k == n - 1 {
                        [0.0, -1.0]
                    } else {
                        [theta.cos(), theta.sin()]
                    }
                })
                .collect()
        });
        Layout { n, per_chain: 2 * (n - 2) + 2, rays }
    }

    fn dim(&self) -> usize {
        2 * self.per_chain
    }

    fn index(&self, chain: usize, k: usize, comp: usize) -> Option<usize> {
        let base = chain * self.per_chain;
        if k == 0 || k == self.n - 1 {
            (comp == 1).then_some(base + usize::from(k != 0))
        } else {
            Some(base + 2 + 2 * (k - 1) + comp)
        }
    }

    fn top(&self, chain: usize) -> usize {
        chain * self.per_chain
    }

    fn bottom(&self, chain: usize) -> usize {
        chain * self.per_chain + 1
    }

    fn add(&self, s: &mut PolygonState, dx: &DVector<f64>, t: f64) {
        for c in 0..2 {
            for k in 0..self.n {
                for comp in 0..2 {
                    if let Some(i) = self.index(c, k, comp) {
                        s.chain_mut(c)[k][comp] += t * dx[i];
                    }
                }
            }
        }
    }
}

/// Gradients and Hessians over the full coordinate vector.
struct Derivatives {
    /// Gradient of the weighted lengths.
    length_grad: DVector<f64>,
    length_hess: DMatrix<f64>,
    /// Rows: gradients of the two areas.
    area_grad: [DVector<f64>; 2],
    area_hess: [DMatrix<f64>; 2],
}

fn derivatives(s: &PolygonState, lay: &Layout, p: &ProblemParams) -> Derivatives {
    let d = lay.dim();
    let mut length_grad = DVector::zeros(d);
    let mut length_hess = DMatrix::zeros(d, d);
    let mut area_grad = [DVector::zeros(d), DVector::zeros(d)];
    let mut area_hess = [DMatrix::zeros(d, d), DMatrix::zeros(d, d)];
    for c in 0..2 {
        let v = s.chain(c);
        let rho = if c == 0 { p.rho_minus } else { p.rho_plus };
        let sign = if c == 0 { 1.0 } else { -1.0 };
        for k in 0..lay.n - 1 {
            let dx = [v[k + 1][0] - v[k][0], v[k + 1][1] - v[k][1]];
            let len = dx[0].hypot(dx[1]);
            let e = [dx[0] / len, dx[1] / len];
            for a in 0..2 {
                if let Some(i) = lay.index(c, k + 1, a) {
                    length_grad[i] += rho * e[a];
                }
                if let Some(i) = lay.index(c, k, a) {
                    length_grad[i] -= rho * e[a];
                }
                for b in 0..2 {
                    let kab = rho * (f64::from(u8::from(a == b)) - e[a] * e[b]) / len;
                    for (ka, kb, sgn) in [(k, k, 1.0), (k + 1, k + 1, 1.0), (k, k + 1, -1.0), (k + 1, k, -1.0)] {
                        if let (Some(i), Some(j)) = (lay.index(c, ka, a), lay.index(c, kb, b)) {
                            length_hess[(i, j)] += sgn * kab;
                        }
                    }
                }
            }
        }
        let n = lay.n;
        for k in 0..n {
            let (prev, next) = (v[(k + n - 1) % n], v[(k + 1) % n]);
            if let Some(i) = lay.index(c, k, 0) {
                area_grad[c][i] += 0.5 * sign * (next[1] - prev[1]);
            }
            if let Some(i) = lay.index(c, k, 1) {
                area_grad[c][i] += 0.5 * sign * (prev[0] - next[0]);
            }
            let j = (k + 1) % n;
            let h = 0.5 * sign;
            if let (Some(xi), Some(yj)) = (lay.index(c, k, 0), lay.index(c, j, 1)) {
                area_hess[c][(xi, yj)] += h;
                area_hess[c][(yj, xi)] += h;
            }
            if let (Some(xj), Some(yi)) = (lay.index(c, j, 0), lay.index(c, k, 1)) {
                area_hess[c][(xj, yi)] -= h;
                area_hess[c][(yi, xj)] -= h;
            }
        }
    }
    Derivatives { length_grad, length_hess, area_grad, area_hess }
}

/// Linear map from the reduced variables to the full coordinates: every
/// vertex moves along its ray, one variable per vertex.
///
/// The two left endpoints share a variable, which keeps the left trace
/// centred on the origin and removes the near-invariance under translations
/// along the axis.
type Map = Vec<Option<(usize, f64)>>;

fn reduction(lay: &Layout) -> (Map, usize) {
    let mut map: Map = vec![None; lay.dim()];
    map[lay.top(0)] = Some((0, 1.0));
    map[lay.bottom(0)] = Some((0, -1.0));
    map[lay.top(1)] = Some((1, 1.0));
    map[lay.bottom(1)] = Some((2, -1.0));
    let mut next = 3;
    for c in 0..2 {
        for k in 1..lay.n - 1 {
            for comp in 0..2 {
                let i = lay.index(c, k, comp).expect("interior vertices carry both coordinates");
                map[i] = Some((next, lay.rays[c][k][comp]));
            }
            next += 1;
        }
    }
    (map, next)
}

fn reduce_vec(v: &DVector<f64>, map: &Map, m: usize) -> DVector<f64> {
    let mut out = DVector::zeros(m);
    for (i, slot) in map.iter().enumerate() {
        if let Some((a, w)) = slot {
            out[*a] += w * v[i];
        }
    }
    out
}

fn reduce_mat(h: &DMatrix<f64>, map: &Map, m: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m, m);
    for (i, si) in map.iter().enumerate() {
        let Some((a, wa)) = si else { continue };
        for (j, sj) in map.iter().enumerate() {
            if let Some((b, wb)) = sj {
                let v = h[(i, j)];
                if v != 0.0 {
                    out[(*a, *b)] += wa * wb * v;
                }
            }
        }
    }
    out
}

fn expand(dy: &DVector<f64>, map: &Map) -> DVector<f64> {
    DVector::from_iterator(map.len(), map.iter().map(|s| s.map_or(0.0, |(a, w)| w * dy[a])))
}

/// Gradient of the full cost (lengths plus signed gap terms).
fn cost_grad(der: &Derivatives, lay: &Layout, gaps: &[Gap; 2], gamma: f64) -> DVector<f64> {
    let mut g = der.length_grad.clone();
    for (w, gap) in gaps.iter().enumerate() {
        if let Gap::Signed(sigma) = gap {
            let (l, r) = if w == 0 { (lay.top(0), lay.top(1)) } else { (lay.bottom(0), lay.bottom(1)) };
            g[l] += gamma * sigma;
            g[r] -= gamma * sigma;
        }
    }
    g
}

/// `w` minimizing `‖g + Cᵀw‖` for constraint gradients `C` (one per row).
fn multipliers(g: &DVector<f64>, rows: &[DVector<f64>]) -> DVector<f64> {
    let k = rows.len();
    let gram = DMatrix::from_fn(k, k, |i, j| rows[i].dot(&rows[j]));
    let rhs = DVector::from_iterator(k, rows.iter().map(|r| -r.dot(g)));
    gram.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(k))
}

/// Restores both areas by Newton steps along the interior-only area
/// gradient; endpoints do not move.
fn project(s: &mut PolygonState, lay: &Layout, targets: [f64; 2]) -> bool {
    for c in 0..2 {
        let sign = if c == 0 { 1.0 } else { -1.0 };
        for _ in 0..50 {
            let v = s.chain(c);
            let a = chain_area(v, sign);
            if (a - targets[c]).abs() <= AREA_TOL * targets[c] {
                break;
            }
            let n = v.len();
            let grad: Vec<Point> = (1..n - 1)
                .map(|k| {
                    let u = lay.rays[c][k];
                    let g = [0.5 * sign * (v[k + 1][1] - v[k - 1][1]), 0.5 * sign * (v[k - 1][0] - v[k + 1][0])];
                    let along = g[0] * u[0] + g[1] * u[1];
                    [along * u[0], along * u[1]]
                })
                .collect();
            let norm2: f64 = grad.iter().map(|g| g[0] * g[0] + g[1] * g[1]).sum();
            if norm2 == 0.0 {
                return false;
            }
            let t = (targets[c] - a) / norm2;
            let vm = s.chain_mut(c);
            for (k, g) in grad.iter().enumerate() {
                vm[k + 1][0] += t * g[0];
                vm[k + 1][1] += t * g[1];
            }
        }
        let a = chain_area(s.chain(c), sign);
        if !((a - targets[c]).abs() <= 1e-10 * targets[c]) {
            return false;
        }
    }
    true
}

/// Every vertex strictly out along its ray.
fn admissible(s: &PolygonState, lay: &Layout) -> bool {
    (0..2).all(|c| {
        s.chain(c).iter().zip(&lay.rays[c]).all(|(q, u)| {
            let r = q[0] * u[0] + q[1] * u[1];
            r.is_finite() && r > 0.0
        })
    })
}

fn initial_state(p: &ProblemParams, lay: &Layout, seed: u64) -> PolygonState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = lay.n;
    let mut half_disk = |rho: f64, v: f64, rays: &[Point]| -> Vec<Point> {
        let r = (2.0 * v / (PI * rho)).sqrt();
        rays.iter()
            .enumerate()
            .map(|(k, u)| {
                let rk = if k == 0 || k == n - 1 { r } else { r * (1.0 + NOISE * rng.gen_range(-1.0..=1.0)) };
                [rk * u[0], rk * u[1]]
            })
            .collect()
    };
    let vertices_left = half_disk(p.rho_minus, p.v_minus, &lay.rays[0]);
    let vertices_right = half_disk(p.rho_plus, p.v_plus, &lay.rays[1]);
    PolygonState { vertices_left, vertices_right, multipliers: [0.0; 2], step: 1.0 }
}

fn initial_gaps(s: &PolygonState, gamma: f64) -> [Gap; 2] {
    s.gaps().map(|u| {
        if gamma == 0.0 {
            Gap::Free
        } else if u == 0.0 {
            Gap::Pinned
        } else {
            Gap::Signed(u.signum())
        }
    })
}

/// Gap direction `e` in full coordinates with `e·dx = du`.
fn gap_row(lay: &Layout, w: usize) -> DVector<f64> {
    let mut e = DVector::zeros(lay.dim());
    let (l, r) = if w == 0 { (lay.top(0), lay.top(1)) } else { (lay.bottom(0), lay.bottom(1)) };
    e[l] = 1.0;
    e[r] = -1.0;
    e
}

fn pinned(gaps: &[Gap; 2]) -> Vec<usize> {
    (0..2).filter(|&w| gaps[w] == Gap::Pinned).collect()
}

/// Constraint gradients in reduced variables: both areas, then one row per
/// pinned gap.
fn constraint_rows(der: &Derivatives, lay: &Layout, gaps: &[Gap; 2], map: &Map, m: usize) -> Vec<DVector<f64>> {
    let mut rows = vec![reduce_vec(&der.area_grad[0], map, m), reduce_vec(&der.area_grad[1], map, m)];
    rows.extend(pinned(gaps).into_iter().map(|w| reduce_vec(&gap_row(lay, w), map, m)));
    rows
}

/// Generalized gradient norm: the least-squares Lagrangian residual plus, for
/// each pinned gap, how far its multiplier leaves `[−γ, γ]`.
fn stationarity(gy: &DVector<f64>, rows: &[DVector<f64>], gamma: f64) -> (f64, DVector<f64>) {
    let w = multipliers(gy, rows);
    let mut residual = gy.clone();
    for (r, wi) in rows.iter().zip(w.iter()) {
        residual += r * *wi;
    }
    let excess: f64 = w.iter().skip(2).map(|wi| (wi.abs() - gamma).max(0.0).powi(2)).sum();
    ((residual.norm_squared() + excess).sqrt(), w)
}

/// Constrained descent of the discrete cost from two noisy half-disks.
pub fn polygon_flow_2d(p: &ProblemParams, cfg: &FlowConfig) -> Result<FlowResult> {
    p.validate()?;
    if p.dim != 2 {
        return domain(format!("polygon flow needs N = 2, got N = {}", p.dim));
    }
    if cfg.n_vertices < 32 {
        return domain(format!("n_vertices = {} must be at least 32", cfg.n_vertices));
    }
    let lay = Layout::new(cfg.n_vertices);
    let (map, m) = reduction(&lay);
    let targets = [p.v_minus / p.rho_minus, p.v_plus / p.rho_plus];
    let mut s = initial_state(p, &lay, cfg.seed);
    if !project(&mut s, &lay, targets) {
        return domain("could not enforce the area constraints on the initial chains");
    }
    let mut gaps = initial_gaps(&s, p.gamma);
    let mut cost = s.cost(p);
    let mut cost_trace = vec![cost];
    let mut frames = Vec::new();
    let record = |step: usize, s: &PolygonState, frames: &mut Vec<PolygonFrame>| {
        if cfg.frame_every > 0 && step % cfg.frame_every == 0 {
            frames.push(PolygonFrame { step, left: s.vertices_left.clone(), right: s.vertices_right.clone() });
        }
    };
    record(0, &s, &mut frames);

    let mut mu = 0.0f64;
    let mut steps = 0;
    let mut grad_norm;
    // Gaps released this step whose release was refused by the line search.
    let mut held = [false; 2];
    loop {
        let der = derivatives(&s, &lay, p);
        let g = cost_grad(&der, &lay, &gaps, p.gamma);
        let gy = reduce_vec(&g, &map, m);
        let rows = constraint_rows(&der, &lay, &gaps, &map, m);
        let (gn, w) = stationarity(&gy, &rows, p.gamma);
        grad_norm = gn;
        let lambda = [-w[0], -w[1]];
        s.multipliers = lambda;
        if grad_norm <= GRAD_TOL {
            break;
        }
        if steps >= cfg.max_steps {
            return Err(Error::NonConvergence { steps, grad_norm });
        }

        let hess = &der.length_hess - &der.area_hess[0] * lambda[0] - &der.area_hess[1] * lambda[1];
        let hy = reduce_mat(&hess, &map, m);
        let areas = s.areas();
        let u = s.gaps();
        let pins = pinned(&gaps);

        let mut accepted = None;
        let mut released = false;
        while accepted.is_none() {
            let k = rows.len();
            let mut kkt = DMatrix::zeros(m + k, m + k);
            kkt.view_mut((0, 0), (m, m)).copy_from(&hy);
            for i in 0..m {
                kkt[(i, i)] += mu;
                for (c, row) in rows.iter().enumerate() {
                    kkt[(i, m + c)] = row[i];
                    kkt[(m + c, i)] = row[i];
                }
            }
            let mut rhs = DVector::zeros(m + k);
            rhs.rows_mut(0, m).copy_from(&(-&gy));
            rhs[m] = targets[0] - areas[0];
            rhs[m + 1] = targets[1] - areas[1];
            for (j, &gw) in pins.iter().enumerate() {
                rhs[m + 2 + j] = -u[gw];
            }
            if let Some(sol) = kkt.lu().solve(&rhs).filter(|x| x.iter().all(|v| v.is_finite())) {
                // A pin whose Newton multiplier leaves [−γ, γ] is released in
                // the direction the multiplier pushes.
                let release = pins
                    .iter()
                    .enumerate()
                    .filter(|(_, &gw)| !held[gw])
                    .map(|(j, &gw)| (gw, sol[m + 2 + j]))
                    .filter(|(_, nu)| nu.abs() > p.gamma * (1.0 + RELEASE_MARGIN))
                    .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()));
                if let Some((gw, nu)) = release {
                    gaps[gw] = Gap::Signed(nu.signum());
                    released = true;
                    break;
                }
                let dx = expand(&sol.rows(0, m).into_owned(), &map);
                let search = Search { slope: g.dot(&dx), near: grad_norm < NEAR_TOL, cost };
                match line_search(&s, &dx, &lay, &gaps, p, targets, &search) {
                    Outcome::Accepted(next, t, pin) => accepted = Some((next, t, pin)),
                    Outcome::Blocked(gw) if u[gw] == 0.0 => {
                        // Just released but the step turns straight back.
                        gaps[gw] = Gap::Pinned;
                        held[gw] = true;
                        released = true;
                        break;
                    }
                    Outcome::Blocked(_) | Outcome::Rejected => {}
                }
            }
            if accepted.is_none() {
                mu = if mu == 0.0 { MU_START } else { 10.0 * mu };
                if mu > MU_MAX {
                    return Err(Error::NonConvergence { steps, grad_norm });
                }
            }
        }
        if released {
            continue;
        }
        let (next, t, pin) = accepted.expect("loop exits only on acceptance or release");
        s = next;
        s.step = t;
        if let Some(gw) = pin {
            gaps[gw] = Gap::Pinned;
        }
        held = [false; 2];
        cost = s.cost(p);
        cost_trace.push(cost);
        steps += 1;
        record(steps, &s, &mut frames);
        mu = if mu <= MU_START { 0.0 } else { mu / 3.0 };
    }

    let fits = [fit_circle(&s.vertices_left), fit_circle(&s.vertices_right)];
    Ok(FlowResult {
        circle_fit_residuals: [fits[0].1, fits[1].1],
        fitted_radii: [fits[0].0, fits[1].0],
        state: s,
        cost_trace,
        steps,
        grad_norm,
        frames,
    })
}

struct Search {
    /// Directional derivative of the cost along the step.
    slope: f64,
    near: bool,
    cost: f64,
}

enum Outcome {
    Accepted(PolygonState, f64, Option<usize>),
    /// The step would immediately flip the sign of this gap.
    Blocked(usize),
    Rejected,
}

fn line_search(
    s: &PolygonState,
    dx: &DVector<f64>,
    lay: &Layout,
    gaps: &[Gap; 2],
    p: &ProblemParams,
    targets: [f64; 2],
    search: &Search,
) -> Outcome {
    if !(search.slope < 0.0 || search.near) {
        return Outcome::Rejected;
    }
    // Largest step before a signed gap would change sign.
    let u = s.gaps();
    let mut t_cross = f64::INFINITY;
    let mut cross_gap = None;
    for (w, gap) in gaps.iter().enumerate() {
        if let Gap::Signed(sigma) = gap {
            let (l, r) = if w == 0 { (lay.top(0), lay.top(1)) } else { (lay.bottom(0), lay.bottom(1)) };
            let du = dx[l] - dx[r];
            if sigma * du < 0.0 {
                let t = -u[w] / du;
                if t < t_cross {
                    t_cross = t;
                    cross_gap = Some(w);
                }
            }
        }
    }
    let mut t = if t_cross <= 1.0 { t_cross } else { 1.0 };
    if !(t > 0.0) {
        return cross_gap.map_or(Outcome::Rejected, Outcome::Blocked);
    }
    for _ in 0..MAX_HALVINGS {
        let mut trial = s.clone();
        lay.add(&mut trial, dx, t);
        let pin = if t == t_cross { cross_gap } else { None };
        for w in 0..2 {
            if gaps[w] == Gap::Pinned || pin == Some(w) {
                // The gap is zero up to rounding here; make it exact.
                let (kl, kr) = if w == 0 { (0, 0) } else { (lay.n - 1, lay.n - 1) };
                trial.vertices_right[kr][1] = trial.vertices_left[kl][1];
            }
        }
        if admissible(&trial, lay) && project(&mut trial, lay, targets) && admissible(&trial, lay) {
            let c = trial.cost(p);
            let armijo = search.slope < 0.0 && c <= search.cost + ARMIJO * t * search.slope;
            if armijo || (search.near && c <= search.cost + COST_SLACK) {
                return Outcome::Accepted(trial, t, pin);
            }
        }
        t *= 0.5;
    }
    Outcome::Rejected
}

/// Algebraic circle fit followed by one Gauss–Newton step on the geometric
/// distances. Returns the radius and the largest `|dist − r| / r`.
pub fn fit_circle(pts: &[Point]) -> (f64, f64) {
    let mut ata = Matrix3::zeros();
    let mut atb = Vector3::zeros();
    for q in pts {
        let row = Vector3::new(q[0], q[1], 1.0);
        ata += row * row.transpose();
        atb += row * -(q[0] * q[0] + q[1] * q[1]);
    }
    let sol = ata.lu().solve(&atb).unwrap_or_else(Vector3::zeros);
    let (mut a, mut b) = (-0.5 * sol[0], -0.5 * sol[1]);
    let mut r = (a * a + b * b - sol[2]).max(0.0).sqrt();

    let mut jtj = Matrix3::zeros();
    let mut jtr = Vector3::zeros();
    for q in pts {
        let d = (q[0] - a).hypot(q[1] - b);
        let row = Vector3::new(-(q[0] - a) / d, -(q[1] - b) / d, -1.0);
        jtj += row * row.transpose();
        jtr += row * (d - r);
    }
    if let Some(step) = jtj.lu().solve(&(-jtr)) {
        a += step[0];
        b += step[1];
        r += step[2];
    }
    let worst = pts.iter().map(|q| ((q[0] - a).hypot(q[1] - b) - r).abs()).fold(0.0, f64::max);
    (r, worst / r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn circle_fit_recovers_arc() {
        let pts: Vec<Point> = (0..50)
            .map(|k| {
                let t = 0.3 + 2.0 * k as f64 / 49.0;
                [1.5 + 2.0 * t.cos(), -0.7 + 2.0 * t.sin()]
            })
            .collect();
        let (r, res) = fit_circle(&pts);
        assert!((r - 2.0).abs() < 1e-12);
        assert!(res < 1e-12);
    }

    #[test]
    fn half_disk_area_and_length() {
        let n = 2000;
        let v: Vec<Point> = (0..n)
            .map(|k| {
                let th = FRAC_PI_2 + PI * k as f64 / (n - 1) as f64;
                [th.cos(), th.sin()]
            })
            .collect();
        assert!((chain_area(&v, 1.0) - FRAC_PI_2).abs() < 1e-5);
        assert!((chain_length(&v) - PI).abs() < 1e-5);
    }

    #[test]
    fn area_derivatives_match_differences() {
        let p = ProblemParams::new(2, 1.0, 2.0, 1.0, 1.5, 0.3).unwrap();
        let lay = Layout::new(32);
        let s = initial_state(&p, &lay, 7);
        let der = derivatives(&s, &lay, &p);
        let h = 1e-6;
        for i in [0, 1, 5, 40, lay.dim() - 3] {
            let mut e = DVector::zeros(lay.dim());
            e[i] = 1.0;
            let (mut a, mut b) = (s.clone(), s.clone());
            lay.add(&mut a, &e, h);
            lay.add(&mut b, &e, -h);
            let fd_area = (a.areas()[i / lay.per_chain] - b.areas()[i / lay.per_chain]) / (2.0 * h);
            assert!((fd_area - der.area_grad[i / lay.per_chain][i]).abs() < 1e-8, "area grad {i}");
            let len = |q: &PolygonState| p.rho_minus * chain_length(&q.vertices_left) + p.rho_plus * chain_length(&q.vertices_right);
            let fd_len = (len(&a) - len(&b)) / (2.0 * h);
            assert!((fd_len - der.length_grad[i]).abs() < 1e-7, "length grad {i}");
            let da = derivatives(&a, &lay, &p);
            let db = derivatives(&b, &lay, &p);
            let col = (&da.length_grad - &db.length_grad) / (2.0 * h);
            for j in 0..lay.dim() {
                assert!((col[j] - der.length_hess[(j, i)]).abs() < 1e-5, "length hess ({j},{i})");
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        let p = ProblemParams::new(3, 1.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        assert!(polygon_flow_2d(&p, &FlowConfig::new(64, 100, 0)).is_err());
        let p = ProblemParams::new(2, 1.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        assert!(polygon_flow_2d(&p, &FlowConfig::new(16, 100, 0)).is_err());
    }

    #[test]
    fn symmetric_flow_finds_half_disks() {
        let p = ProblemParams::new(2, 1.0, 1.0, FRAC_PI_2, FRAC_PI_2, 0.0).unwrap();
        let r = polygon_flow_2d(&p, &FlowConfig::new(128, 500, 1)).unwrap();
        assert!(r.circle_fit_residuals.iter().all(|&x| x <= 1e-3), "{:?}", r.circle_fit_residuals);
        assert!(r.fitted_radii.iter().all(|&x| (x - 1.0).abs() < 1e-2), "{:?}", r.fitted_radii);
        assert!(r.cost_trace.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        let areas = r.state.areas();
        assert!((areas[0] - FRAC_PI_2).abs() < 1e-6 && (areas[1] - FRAC_PI_2).abs() < 1e-6);
    }
}
