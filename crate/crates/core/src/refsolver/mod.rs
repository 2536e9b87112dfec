//! Direct finite-difference solver for the free boundary problem
//!
//! ```text
//! f_t - f_xx = λ(t) (δ(x - p + a) - δ(x - p - a)),   λ = -f_x(p, t),   f(p, t) = 0
//! ```
//!
//! on `[-L, L]` with homogeneous Dirichlet ends. The price is the interpolated
//! nodal sign change. Each node owns the cell `[x_i - h/2, x_i + h/2]`, and
//! `λ` is the diffusive flux at a position `m` blended from the two cell
//! edges around it; with that choice the nodal mass left of `m` changes only
//! through the deposits, `±λ dt` split onto the two nodes nearest `m ∓ a` with
//! hat weights. The implicit scheme takes `m` halfway between the old and new
//! price (a few fixed-point sweeps) and solves `λ` together with the new
//! profile by Sherman-Morrison on the tridiagonal system. The explicit scheme
//! uses the old price and the old profile.

mod tridiag;

use alloc::vec::Vec;
use core::fmt;

use crate::datum::{Datum, MassPair};
use crate::pricepath::{Method, PricePoint, PriceTrajectory};
use tridiag::Tridiagonal;

#[derive(Debug, Clone, PartialEq)]
pub enum FdError {
    BadGrid(&'static str),
    /// Explicit scheme with `dt > h²/2`.
    UnstableTimeStep { dt: f64, limit: f64 },
    /// Fewer than eight cells per transaction cost.
    UnresolvedCost { cost: f64, spacing: f64 },
    /// Support or deposit locations too close to the Dirichlet ends.
    DomainTooSmall,
    /// `sup|f|` more than doubled in one step.
    Instability { t: f64 },
    /// Nonzero profile without a positive-to-nonpositive node pair.
    NoSignChange { t: f64 },
    /// Sample times unordered or outside `[0, horizon]`.
    BadSamples,
}

impl fmt::Display for FdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FdError::BadGrid(why) => write!(f, "bad grid: {why}"),
            FdError::UnstableTimeStep { dt, limit } => {
                write!(f, "explicit time step {dt} exceeds the stability limit {limit}")
            }
            FdError::UnresolvedCost { cost, spacing } => {
                write!(f, "transaction cost {cost} spans fewer than 8 cells of width {spacing}")
            }
            FdError::DomainTooSmall => write!(f, "domain too small for the datum and its deposits"),
            FdError::Instability { t } => write!(f, "solution blew up at t = {t}"),
            FdError::NoSignChange { t } => write!(f, "lost the sign change at t = {t}"),
            FdError::BadSamples => write!(f, "sample times must be increasing and inside [0, horizon]"),
        }
    }
}

impl core::error::Error for FdError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Explicit,
    Implicit,
}

/// Uniform grid on `[-L, L]` with `cells` cells and nominal time step `dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdGrid {
    half_width: f64,
    cells: usize,
    dt: f64,
    scheme: Scheme,
}

impl FdGrid {
    pub fn new(half_width: f64, cells: usize, dt: f64, scheme: Scheme) -> Result<Self, FdError> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(FdError::BadGrid("half width must be positive"));
        }
        if cells < 4 {
            return Err(FdError::BadGrid("need at least four cells"));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(FdError::BadGrid("time step must be positive"));
        }
        let grid = Self { half_width, cells, dt, scheme };
        let limit = 0.5 * grid.spacing() * grid.spacing();
        if scheme == Scheme::Explicit && dt > limit {
            return Err(FdError::UnstableTimeStep { dt, limit });
        }
        Ok(grid)
    }

    /// Explicit: `dt = 0.4 h²`. Implicit: `dt = h / 2`.
    pub fn with_default_step(half_width: f64, cells: usize, scheme: Scheme) -> Result<Self, FdError> {
        let h = 2.0 * half_width / cells as f64;
        let dt = match scheme {
            Scheme::Explicit => 0.4 * h * h,
            Scheme::Implicit => 0.5 * h,
        };
        Self::new(half_width, cells, dt, scheme)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.cells as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }
}

/// Nodal density together with the current price and transaction rate.
#[derive(Debug, Clone, PartialEq)]
pub struct FdState {
    values: Vec<f64>,
    time: f64,
    price: f64,
    lambda: f64,
    cell: usize,
    cost: f64,
    spacing: f64,
    half_width: f64,
}

impl FdState {
    /// Raw nodal state on `grid` (including the two Dirichlet end nodes).
    pub fn from_nodes(grid: &FdGrid, values: Vec<f64>, price: f64, cost: f64) -> Result<Self, FdError> {
        if values.len() != grid.cells() + 1 {
            return Err(FdError::BadGrid("node count must be cells + 1"));
        }
        let h = grid.spacing();
        let hint = (((price + grid.half_width()) / h) as usize).min(grid.cells() - 1);
        let mut state = Self {
            values,
            time: 0.0,
            price,
            lambda: 0.0,
            cell: hint,
            cost,
            spacing: h,
            half_width: grid.half_width(),
        };
        state.values[0] = 0.0;
        state.values[grid.cells()] = 0.0;
        if let Some(cell) = locate_crossing(&state.values, hint) {
            state.cell = cell;
            state.lambda = edge_flux(|i| state.values[i], h, state.half_width, price);
        }
        Ok(state)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn price(&self) -> f64 {
        self.price
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Piecewise-linear interpolant of the nodal values.
    pub fn value_at(&self, x: f64) -> f64 {
        let pos = (x + self.half_width) / self.spacing;
        if !(pos >= 0.0 && pos <= (self.values.len() - 1) as f64) {
            return 0.0;
        }
        let j = (libm::floor(pos) as usize).min(self.values.len() - 2);
        let theta = pos - j as f64;
        (1.0 - theta) * self.values[j] + theta * self.values[j + 1]
    }

    /// Positive mass left of `p` and negative mass right of `p`, integrating
    /// the nodal interpolant exactly.
    pub fn masses(&self) -> MassPair {
        let h = self.spacing;
        let k = self.cell;
        let v = &self.values;
        let mut plus = 0.0;
        let mut minus = 0.0;
        for i in 0..v.len() - 1 {
            if i < k {
                plus += positive_part(v[i], v[i + 1], h);
            } else if i > k {
                minus += positive_part(-v[i], -v[i + 1], h);
            }
        }
        let left = (self.price - self.node(k)).clamp(0.0, h);
        plus += positive_part(v[k], 0.0, left);
        minus += positive_part(0.0, -v[k + 1], h - left);
        MassPair::new(plus, minus)
    }

    /// Largest wrong-signed magnitude: negative values left of `p`, positive
    /// values right of it.
    pub fn sign_defect(&self) -> f64 {
        self.values.iter().enumerate().fold(0.0, |m, (i, &v)| {
            let x = self.node(i);
            let wrong = if x < self.price { -v } else if x > self.price { v } else { 0.0 };
            m.max(wrong)
        })
    }

}

/// `∫ max(g, 0)` over an interval of length `len` for linear `g` with end
/// values `v0`, `v1`.
fn positive_part(v0: f64, v1: f64, len: f64) -> f64 {
    match (v0 >= 0.0, v1 >= 0.0) {
        (true, true) => 0.5 * len * (v0 + v1),
        (false, false) => 0.0,
        (true, false) => 0.5 * len * v0 * v0 / (v0 - v1),
        (false, true) => 0.5 * len * v1 * v1 / (v1 - v0),
    }
}

/// Cell `k` with `v[k] > 0 >= v[k+1]` nearest to `hint`.
fn locate_crossing(v: &[f64], hint: usize) -> Option<usize> {
    crossing_near(v.len(), hint, |i| v[i])
}

fn crossing_near(nodes: usize, hint: usize, v: impl Fn(usize) -> f64) -> Option<usize> {
    let last = nodes - 2;
    let hint = hint.min(last);
    let is_crossing = |k: usize| v(k) > 0.0 && v(k + 1) <= 0.0;
    (0..=last).find_map(|d| {
        let left = hint.checked_sub(d).filter(|&k| is_crossing(k));
        left.or_else(|| Some(hint + d).filter(|&k| k <= last && is_crossing(k)))
    })
}

/// Zero of the linear interpolant on cell `k`.
fn crossing_point(v0: f64, v1: f64, x0: f64, h: f64) -> f64 {
    x0 + h * v0 / (v0 - v1)
}

/// Diffusive flux at `m` for nodal values `v`: `-(v[j] - v[j-1])/h` and
/// `-(v[j+1] - v[j])/h` weighted by the fraction of node `j`'s cell lying
/// right and left of `m`. The nodal mass `h Σ v_i` left of `m` (counting
/// node `j` by that fraction) leaves at exactly this rate.
fn edge_flux(v: impl Fn(usize) -> f64, h: f64, half_width: f64, m: f64) -> f64 {
    let s = (m + half_width) / h + 0.5;
    let j = libm::floor(s) as usize;
    let w = s - j as f64;
    let (left, mid, right) = (v(j - 1), v(j), v(j + 1));
    -((1.0 - w) * (mid - left) + w * (right - mid)) / h
}

/// Sampled output of [`FdSolver::solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct FdRun {
    pub trajectory: PriceTrajectory,
    pub snapshots: Vec<Snapshot>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub state: FdState,
}

/// Time marcher for a fixed grid.
#[derive(Debug, Clone)]
pub struct FdSolver {
    grid: FdGrid,
    factor: Option<Tridiagonal>,
    // scratch buffers over the interior unknowns
    work: Vec<f64>,
    deposit: Vec<f64>,
}

impl FdSolver {
    pub fn new(grid: FdGrid) -> Self {
        Self { grid, factor: None, work: Vec::new(), deposit: Vec::new() }
    }

    pub fn grid(&self) -> &FdGrid {
        &self.grid
    }

    /// Samples `f_I` at the nodes; requires the support and `[p0 - 2a, p0 + 2a]`
    /// inside `[-L/2, L/2]` and at least eight cells per `a`.
    pub fn init(&self, datum: &Datum) -> Result<FdState, FdError> {
        let g = &self.grid;
        let (a, p0) = (datum.cost(), datum.p0());
        if a / g.spacing() < 8.0 {
            return Err(FdError::UnresolvedCost { cost: a, spacing: g.spacing() });
        }
        let (x_min, x_max) = datum.support();
        let half = 0.5 * g.half_width();
        if x_min.min(p0 - 2.0 * a) < -half || x_max.max(p0 + 2.0 * a) > half {
            return Err(FdError::DomainTooSmall);
        }
        let values = (0..=g.cells()).map(|i| datum.value(g.node(i))).collect();
        let mut state = FdState::from_nodes(g, values, p0, a)?;
        state.price = p0;
        Ok(state)
    }

    /// One step of the nominal size `dt`.
    pub fn step(&mut self, state: &mut FdState) -> Result<(), FdError> {
        self.advance(state, self.grid.dt)
    }

    /// One step of size `dt` (at most the nominal step for the explicit scheme).
    pub fn advance(&mut self, state: &mut FdState, dt: f64) -> Result<(), FdError> {
        let g = self.grid;
        let (h, n, half_width) = (g.spacing(), g.cells(), g.half_width());
        let before = state.sup_abs();

        let crossing = locate_crossing(&state.values, state.cell);
        if crossing.is_none() && before > 0.0 {
            return Err(FdError::NoSignChange { t: state.time });
        }
        if let Some(k) = crossing {
            let v = &state.values;
            state.cell = k;
            state.price = crossing_point(v[k], v[k + 1], g.node(k), h);
        }
        let (p_old, cost) = (state.price, state.cost);
        let scale = dt / h;

        // deposit pattern per unit λ on interior unknowns 1..n-1 (index i-1)
        let deposit = &mut self.deposit;
        deposit.clear();
        deposit.resize(n - 1, 0.0);

        let r = dt / (h * h);
        match g.scheme {
            Scheme::Explicit => {
                if dt > 0.5 * h * h * (1.0 + 1e-12) {
                    return Err(FdError::UnstableTimeStep { dt, limit: 0.5 * h * h });
                }
                let mut lambda = 0.0;
                if crossing.is_some() {
                    add_hat(deposit, &g, p_old - cost, scale)?;
                    add_hat(deposit, &g, p_old + cost, -scale)?;
                    lambda = edge_flux(|i| state.values[i], h, half_width, p_old);
                }
                let old = &mut self.work;
                old.clear();
                old.extend_from_slice(&state.values);
                for i in 1..n {
                    let lap = old[i - 1] - 2.0 * old[i] + old[i + 1];
                    state.values[i] = old[i] + r * lap + lambda * deposit[i - 1];
                }
            }
            Scheme::Implicit => {
                let factor = match &self.factor {
                    Some(f) if f.r() == r => f,
                    _ => self.factor.insert(Tridiagonal::new(n - 1, r)),
                };
                let y = &mut state.values[1..n];
                factor.solve(y);
                if let Some(k) = crossing {
                    let z = deposit;
                    let at = |w: &[f64], i: usize| if i == 0 || i == n { 0.0 } else { w[i - 1] };
                    let mut m = p_old;
                    let mut lambda = 0.0;
                    let mut touched = (0, 0);
                    for _ in 0..MIDPOINT_SWEEPS {
                        z[touched.0..touched.1].fill(0.0);
                        let first = add_hat(z, &g, m - cost, scale)?;
                        let last = add_hat(z, &g, m + cost, -scale)? + 1;
                        touched = factor.solve_local(z, first, last);
                        // λ = flux of the new profile y + λ z at m
                        let fy = edge_flux(|i| at(y, i), h, half_width, m);
                        let fz = edge_flux(|i| at(z, i), h, half_width, m);
                        lambda = fy / (1.0 - fz);
                        let v = |i: usize| at(y, i) + lambda * at(z, i);
                        let Some(c) = crossing_near(n + 1, k, v) else { break };
                        let next = 0.5 * (p_old + crossing_point(v(c), v(c + 1), g.node(c), h));
                        if (next - m).abs() <= 1e-6 * h {
                            break;
                        }
                        m = next;
                    }
                    for (yi, zi) in y[touched.0..touched.1].iter_mut().zip(&z[touched.0..touched.1]) {
                        *yi += lambda * zi;
                    }
                }
            }
        }
        state.time += dt;

        let after = state.sup_abs();
        if before > 0.0 && after > 2.0 * before {
            return Err(FdError::Instability { t: state.time });
        }
        if let Some(k) = locate_crossing(&state.values, state.cell) {
            let v = &state.values;
            state.cell = k;
            state.price = crossing_point(v[k], v[k + 1], g.node(k), h);
            state.lambda = edge_flux(|i| v[i], h, half_width, state.price);
        } else if after > 0.0 {
            return Err(FdError::NoSignChange { t: state.time });
        } else {
            state.lambda = 0.0;
        }
        Ok(())
    }

    /// Marches to `horizon`, recording price points (and snapshots when
    /// `keep_snapshots`) at every sample time. Steps are shortened so the
    /// samples are hit exactly.
    pub fn solve(
        &mut self,
        datum: &Datum,
        horizon: f64,
        samples: &[f64],
        keep_snapshots: bool,
    ) -> Result<FdRun, FdError> {
        let ordered = samples.windows(2).all(|w| w[0] < w[1]);
        let inside = samples.iter().all(|&t| (0.0..=horizon).contains(&t));
        if !(ordered && inside && horizon > 0.0) {
            return Err(FdError::BadSamples);
        }
        let mut state = self.init(datum)?;
        let mut trajectory = PriceTrajectory::new(Method::FdReference, datum.fingerprint());
        let mut snapshots = Vec::new();

        let mut record = |state: &FdState, t: f64| {
            let k = state.cell;
            trajectory.points.push(PricePoint {
                t,
                p: state.price,
                lambda: state.lambda,
                bracket: (state.node(k), state.node(k + 1)),
            });
            if keep_snapshots {
                snapshots.push(Snapshot { t, state: state.clone() });
            }
        };

        let targets = samples.iter().copied().filter(|&t| t > 0.0).chain(
            (samples.last().is_none_or(|&t| t < horizon)).then_some(horizon),
        );
        if samples.first() == Some(&0.0) {
            record(&state, 0.0);
        }
        for target in targets {
            let span = target - state.time;
            let steps = libm::ceil(span / self.grid.dt * (1.0 - 1e-12)).max(1.0) as usize;
            let dt = span / steps as f64;
            for _ in 0..steps {
                self.advance(&mut state, dt)?;
            }
            state.time = target;
            if samples.contains(&target) {
                record(&state, target);
            }
        }
        Ok(FdRun { trajectory, snapshots })
    }
}

/// Splits `weight` onto the two nodes around `x`; returns the lower interior
/// index touched.
/// Fixed-point sweeps for the implicit midpoint price.
const MIDPOINT_SWEEPS: usize = 4;

fn add_hat(target: &mut [f64], grid: &FdGrid, x: f64, weight: f64) -> Result<usize, FdError> {
    let pos = (x + grid.half_width()) / grid.spacing();
    if !(pos >= 1.0 && pos < (grid.cells() - 1) as f64) {
        return Err(FdError::DomainTooSmall);
    }
    let j = libm::floor(pos) as usize;
    let theta = pos - j as f64;
    target[j - 1] += weight * (1.0 - theta);
    target[j] += weight * theta;
    Ok(j - 1)
}
