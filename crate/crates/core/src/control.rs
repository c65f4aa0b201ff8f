//! Interface map, desk-scale ROM controllers and plant/ROM co-simulation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::geometry::AaBox;
use crate::linalg;
use crate::rom::Rom;
use crate::sf::{evaluate_sf, ClosenessBound, SfConstants};
use crate::systems::LtiPlant;

pub const GRID_CELLS: usize = 50;

/// `u = F(x − Θx̂) + Ξx̂ + Ψû`.
pub fn refine_input(
    x: &DVector<f64>,
    x_hat: &DVector<f64>,
    u_hat: &DVector<f64>,
    rom: &Rom,
    f_gain: &DMatrix<f64>,
) -> Result<DVector<f64>> {
    let n = rom.theta.nrows();
    if x.len() != n || x_hat.len() != rom.reduced_dim() || u_hat.len() != rom.input_dim() {
        return Err(Error::dim(
            "interface map arguments",
            format!("x {n}, x_hat {}, u_hat {}", rom.reduced_dim(), rom.input_dim()),
            format!("x {}, x_hat {}, u_hat {}", x.len(), x_hat.len(), u_hat.len()),
        ));
    }
    if f_gain.shape() != (rom.xi.nrows(), n) {
        return Err(Error::dim(
            "F",
            format!("{}x{n}", rom.xi.nrows()),
            format!("{}x{}", f_gain.nrows(), f_gain.ncols()),
        ));
    }
    Ok(f_gain * (x - &rom.theta * x_hat) + &rom.xi * x_hat + &rom.psi * u_hat)
}

/// State feedback on the ROM.
pub trait RomPolicy {
    fn control(&mut self, x_hat: &DVector<f64>) -> DVector<f64>;
    fn input_box(&self) -> Option<&AaBox> {
        None
    }
}

/// `û ≡ 0`.
#[derive(Debug, Clone)]
pub struct ZeroPolicy(pub usize);

impl RomPolicy for ZeroPolicy {
    fn control(&mut self, _: &DVector<f64>) -> DVector<f64> {
        DVector::zeros(self.0)
    }
}

/// Scale `v` uniformly so it fits in a box centred at the origin.
fn fit_into(v: DVector<f64>, b: &AaBox) -> DVector<f64> {
    let mut s: f64 = 1.0;
    for i in 0..v.len() {
        let lim = if v[i] >= 0.0 { b.hi[i] } else { b.lo[i] };
        if v[i] != 0.0 {
            s = s.min((lim / v[i]).max(0.0));
        }
    }
    let mut out = v * s;
    // (lim / v)·v can overshoot lim by an ulp.
    b.clamp(out.as_mut_slice());
    out
}

fn scalar_actuation(rom: &Rom) -> Result<f64> {
    let s = rom.b_hat[(0, 0)];
    let nh = rom.reduced_dim();
    if rom.b_hat.shape() != (nh, nh) || s == 0.0 || (&rom.b_hat - DMatrix::identity(nh, nh) * s).amax() > 1e-12 * s.abs() {
        return Err(Error::Precondition("the ROM must be fully actuated with B_hat = s*I".into()));
    }
    Ok(s)
}

/// `û = fit(k(x̂_c − x̂) − B̂⁻¹Âx̂_c)`, which makes `x̂_c` the equilibrium and
/// moves `x̂` straight towards it.
#[derive(Debug, Clone)]
pub struct SafetyController {
    pub center: DVector<f64>,
    pub gain: f64,
    pub feedforward: DVector<f64>,
    pub input_box: AaBox,
    /// ROM states from which the output stays in the shrunk safe box.
    pub start_box: AaBox,
}

impl RomPolicy for SafetyController {
    fn control(&mut self, x_hat: &DVector<f64>) -> DVector<f64> {
        fit_into((&self.center - x_hat) * self.gain + &self.feedforward, &self.input_box)
    }

    fn input_box(&self) -> Option<&AaBox> {
        Some(&self.input_box)
    }
}

/// Safety controller keeping `S·Θ·x̂` inside `safe_box` shrunk by `margin`.
///
/// Requires a diagonal `Â` with equal entries so that saturation does not
/// bend the straight-line approach to the centre.
pub fn safety_controller(
    rom: &Rom,
    output_map: &DMatrix<f64>,
    safe_box: &AaBox,
    input_box: &AaBox,
    margin: f64,
) -> Result<SafetyController> {
    let s = scalar_actuation(rom)?;
    let nh = rom.reduced_dim();
    let cs = output_map * &rom.theta;
    if cs.nrows() != safe_box.dim() || input_box.dim() != nh {
        return Err(Error::dim(
            "safety boxes",
            format!("safe box {}, input box {nh}", cs.nrows()),
            format!("safe box {}, input box {}", safe_box.dim(), input_box.dim()),
        ));
    }
    for (axis, hw) in safe_box.half_widths().into_iter().enumerate() {
        if hw <= margin {
            return Err(Error::SafetyInfeasible {
                axis,
                half_width: hw,
                margin,
            });
        }
    }
    let target = DMatrix::from_column_slice(safe_box.dim(), 1, &safe_box.center());
    let center = linalg::lstsq(&cs, &target).column(0).into_owned();
    let y_c = &cs * &center;
    let mut gamma = f64::INFINITY;
    for (j, hw) in safe_box.half_widths().into_iter().enumerate() {
        let room = hw - margin - (y_c[j] - safe_box.center()[j]).abs();
        let spread: f64 = cs.row(j).iter().map(|v| v.abs()).sum();
        if spread > 0.0 {
            gamma = gamma.min(room / spread);
        } else if room < 0.0 {
            gamma = -1.0;
        }
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::SafetyInfeasible {
            axis: 0,
            half_width: safe_box.half_widths().into_iter().fold(f64::INFINITY, f64::min),
            margin,
        });
    }
    let start_box = AaBox::new(
        center.iter().map(|c| c - gamma).collect(),
        center.iter().map(|c| c + gamma).collect(),
    )?;
    let feedforward = -(&rom.a_hat * &center) / s;
    let gain = 1.0 / s;
    if !fit_into(feedforward.clone(), input_box).relative_eq(&feedforward, 1e-12, 1e-12) {
        return Err(Error::SafetyInfeasible {
            axis: 0,
            half_width: input_box.max_norm(),
            margin: feedforward.norm(),
        });
    }
    Ok(SafetyController {
        center,
        gain,
        feedforward,
        input_box: input_box.clone(),
        start_box,
    })
}

/// Reach-while-avoid problem in the 2-D output plane `ŷ = SΘx̂`.
#[derive(Debug, Clone)]
pub struct ReachAvoidSpec {
    pub output_map: DMatrix<f64>,
    pub domain: AaBox,
    pub start: DVector<f64>,
    pub target: AaBox,
    pub obstacles: Vec<AaBox>,
    pub input_box: AaBox,
    pub margin: f64,
}

/// Waypoint tracker: `v = k_p(w − ŷ)` capped at `v_max`, realised through
/// `û = B̂⁻¹(C⁻¹v − Âx̂)` and scaled into the input box.
#[derive(Debug, Clone)]
pub struct ReachAvoidController {
    pub waypoints: Vec<DVector<f64>>,
    pub target_shrunk: AaBox,
    c_out: DMatrix<f64>,
    c_inv: DMatrix<f64>,
    a_hat: DMatrix<f64>,
    b_scale: f64,
    k_p: f64,
    v_max: f64,
    switch_radius: f64,
    next: usize,
    reached: bool,
    input_box: AaBox,
}

impl ReachAvoidController {
    pub fn reached(&self) -> bool {
        self.reached
    }

    pub fn output(&self, x_hat: &DVector<f64>) -> DVector<f64> {
        &self.c_out * x_hat
    }
}

impl RomPolicy for ReachAvoidController {
    fn control(&mut self, x_hat: &DVector<f64>) -> DVector<f64> {
        let y = &self.c_out * x_hat;
        if self.reached || self.target_shrunk.contains(y.as_slice()) {
            self.reached = true;
            return DVector::zeros(x_hat.len());
        }
        while self.next + 1 < self.waypoints.len() && (&self.waypoints[self.next] - &y).norm() < self.switch_radius {
            self.next += 1;
        }
        let mut v = (&self.waypoints[self.next] - &y) * self.k_p;
        let speed = v.norm();
        if speed > self.v_max {
            v *= self.v_max / speed;
        }
        let u = (&self.c_inv * v - &self.a_hat * x_hat) / self.b_scale;
        fit_into(u, &self.input_box)
    }

    fn input_box(&self) -> Option<&AaBox> {
        Some(&self.input_box)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct QueueItem {
    cost: f64,
    node: usize,
}

impl Eq for QueueItem {}

impl Ord for QueueItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.cost.total_cmp(&self.cost).then(self.node.cmp(&other.node))
    }
}

impl PartialOrd for QueueItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn visible(a: &[f64], b: &[f64], obstacles: &[AaBox]) -> bool {
    obstacles.iter().all(|o| !o.segment_intersects(a, b))
}

/// Shortest 8-connected path on a `GRID_CELLS²` grid of cell centres from
/// `start` to `goal`, shortcut by line of sight. Returns the waypoints
/// after `start`, ending at `goal`.
pub fn plan_path(domain: &AaBox, start: &[f64], goal: &[f64], obstacles: &[AaBox]) -> Result<Vec<DVector<f64>>> {
    if domain.dim() != 2 || start.len() != 2 || goal.len() != 2 {
        return Err(Error::InvalidArgument("path planning works in the plane".into()));
    }
    for (what, p) in [("start", start), ("goal", goal)] {
        if obstacles.iter().any(|o| o.contains(p)) {
            return Err(Error::PlanningInfeasible(format!("{what} point {p:?} lies inside an inflated obstacle")));
        }
    }
    if visible(start, goal, obstacles) {
        return Ok(vec![DVector::from_column_slice(goal)]);
    }
    let g = GRID_CELLS;
    let hw = domain.half_widths();
    let cell = [2.0 * hw[0] / g as f64, 2.0 * hw[1] / g as f64];
    let centre = |i: usize, j: usize| [domain.lo[0] + (i as f64 + 0.5) * cell[0], domain.lo[1] + (j as f64 + 0.5) * cell[1]];
    let free: Vec<bool> = (0..g * g)
        .map(|k| {
            let c = centre(k / g, k % g);
            !obstacles.iter().any(|o| o.contains(&c))
        })
        .collect();
    let nearest_visible = |p: &[f64]| -> Option<usize> {
        (0..g * g)
            .filter(|&k| free[k] && visible(p, &centre(k / g, k % g), obstacles))
            .min_by(|&a, &b| {
                let (ca, cb) = (centre(a / g, a % g), centre(b / g, b % g));
                let da = (ca[0] - p[0]).hypot(ca[1] - p[1]);
                let db = (cb[0] - p[0]).hypot(cb[1] - p[1]);
                da.total_cmp(&db)
            })
    };
    let (Some(s), Some(t)) = (nearest_visible(start), nearest_visible(goal)) else {
        return Err(Error::PlanningInfeasible("start or goal cannot see any free grid cell".into()));
    };

    let mut dist = vec![f64::INFINITY; g * g];
    let mut prev = vec![usize::MAX; g * g];
    let mut heap = BinaryHeap::new();
    dist[s] = 0.0;
    heap.push(QueueItem { cost: 0.0, node: s });
    while let Some(QueueItem { cost, node }) = heap.pop() {
        if node == t {
            break;
        }
        if cost > dist[node] {
            continue;
        }
        let (i, j) = ((node / g) as i64, (node % g) as i64);
        let here = centre(i as usize, j as usize);
        for di in -1..=1 {
            for dj in -1..=1 {
                let (ni, nj) = (i + di, j + dj);
                if (di == 0 && dj == 0) || ni < 0 || nj < 0 || ni >= g as i64 || nj >= g as i64 {
                    continue;
                }
                let nb = ni as usize * g + nj as usize;
                if !free[nb] {
                    continue;
                }
                let there = centre(ni as usize, nj as usize);
                if !visible(&here, &there, obstacles) {
                    continue;
                }
                let c = cost + (there[0] - here[0]).hypot(there[1] - here[1]);
                if c < dist[nb] {
                    dist[nb] = c;
                    prev[nb] = node;
                    heap.push(QueueItem { cost: c, node: nb });
                }
            }
        }
    }
    if !dist[t].is_finite() {
        return Err(Error::PlanningInfeasible(
            "no obstacle-free path between start and target on the planning grid".into(),
        ));
    }
    let mut cells = vec![t];
    while let Some(&last) = cells.last() {
        if last == s {
            break;
        }
        cells.push(prev[last]);
    }
    cells.reverse();
    let mut points: Vec<[f64; 2]> = vec![[start[0], start[1]]];
    points.extend(cells.iter().map(|&k| centre(k / g, k % g)));
    points.push([goal[0], goal[1]]);

    // Greedy line-of-sight shortcutting.
    let mut out = Vec::new();
    let mut cur = 0;
    while cur + 1 < points.len() {
        let mut far = cur + 1;
        for k in (cur + 1..points.len()).rev() {
            if visible(&points[cur], &points[k], obstacles) {
                far = k;
                break;
            }
        }
        out.push(DVector::from_column_slice(&points[far]));
        cur = far;
    }
    Ok(out)
}

/// Plan on obstacles inflated by the margin plus the waypoint switch radius,
/// then build the tracker.
pub fn reach_avoid_controller(rom: &Rom, spec: &ReachAvoidSpec) -> Result<ReachAvoidController> {
    let s = scalar_actuation(rom)?;
    let nh = rom.reduced_dim();
    let c_out = &spec.output_map * &rom.theta;
    if c_out.shape() != (2, 2) || nh != 2 || spec.input_box.dim() != 2 {
        return Err(Error::Precondition(
            "reach-while-avoid needs a 2-state ROM with a square output map".into(),
        ));
    }
    let c_inv = c_out
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Precondition("the ROM output map S*Θ is singular".into()))?;
    let hw = spec.domain.half_widths();
    let cell = 2.0 * hw[0].min(hw[1]) / GRID_CELLS as f64;
    let switch_radius = 0.5 * cell;
    let target_shrunk = spec.target.shrink(spec.margin).ok_or_else(|| {
        Error::PlanningInfeasible(format!("target box is narrower than twice the margin {:.3e}", spec.margin))
    })?;
    let inflated: Vec<AaBox> = spec.obstacles.iter().map(|o| o.inflate(spec.margin + switch_radius)).collect();
    let goal = target_shrunk.center();
    let waypoints = if target_shrunk.contains(spec.start.as_slice()) {
        vec![DVector::from_vec(goal)]
    } else {
        plan_path(&spec.domain, spec.start.as_slice(), &goal, &inflated)?
    };
    // Leave headroom in the input box for the −Âx̂ compensation over the domain.
    let u_room = spec.input_box.half_widths().into_iter().fold(f64::INFINITY, f64::min);
    let c_inv_norm = linalg::spectral_norm(&c_inv);
    let drift = linalg::spectral_norm(&rom.a_hat) * c_inv_norm * spec.domain.max_norm();
    let v_max = (s.abs() * u_room - drift).max(0.1 * s.abs() * u_room) / c_inv_norm;
    Ok(ReachAvoidController {
        waypoints,
        target_shrunk,
        c_out,
        c_inv,
        a_hat: rom.a_hat.clone(),
        b_scale: s,
        k_p: 2.0,
        v_max,
        switch_radius,
        next: 0,
        reached: false,
        input_box: spec.input_box.clone(),
    })
}

/// Paired plant/ROM trajectories on a common grid.
#[derive(Debug, Clone)]
pub struct CosimRecord {
    pub times: Vec<f64>,
    pub plant_states: Vec<DVector<f64>>,
    pub rom_states: Vec<DVector<f64>>,
    pub rom_inputs: Vec<DVector<f64>>,
    pub refined_inputs: Vec<DVector<f64>>,
    /// `‖x(t) − Θx̂(t)‖`.
    pub output_error: Vec<f64>,
    pub sf_values: Vec<f64>,
    pub bound: ClosenessBound,
}

impl CosimRecord {
    pub fn max_error(&self) -> f64 {
        self.output_error.iter().copied().fold(0.0, f64::max)
    }

    /// Largest `error − bound` over the grid; negative when the bound holds.
    pub fn worst_excess(&self) -> f64 {
        self.output_error
            .iter()
            .zip(&self.bound.values)
            .map(|(e, b)| e - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn u_hat_sup(&self) -> f64 {
        self.bound.u_hat_sup
    }

    /// Rows `t, x…, x̂…, û…, u…, error, bound` for every `every`-th grid
    /// point, always including the last.
    pub fn write_csv<W: Write>(&self, out: W, every: usize) -> Result<()> {
        if every == 0 {
            return Err(Error::InvalidArgument("CSV stride must be positive".into()));
        }
        let mut w = csv::Writer::from_writer(out);
        let n = self.plant_states.first().map_or(0, |v| v.len());
        let nh = self.rom_states.first().map_or(0, |v| v.len());
        let mh = self.rom_inputs.first().map_or(0, |v| v.len());
        let m = self.refined_inputs.first().map_or(0, |v| v.len());
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("x{i}")));
        header.extend((1..=nh).map(|i| format!("xhat{i}")));
        header.extend((1..=mh).map(|i| format!("uhat{i}")));
        header.extend((1..=m).map(|i| format!("u{i}")));
        header.push("error".into());
        header.push("bound".into());
        w.write_record(&header)?;
        let last = self.times.len().saturating_sub(1);
        for k in (0..self.times.len()).filter(|k| k % every == 0 || *k == last) {
            let mut row = vec![format!("{:.17e}", self.times[k])];
            for v in [&self.plant_states[k], &self.rom_states[k], &self.rom_inputs[k], &self.refined_inputs[k]] {
                row.extend(v.iter().map(|x| format!("{x:.17e}")));
            }
            row.push(format!("{:.17e}", self.output_error[k]));
            row.push(format!("{:.17e}", self.bound.values[k]));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Exact zero-order-hold step of `ż = Mz + Nw` as matrices `z⁺ = Φz + Γw`,
/// read off `exp([[M, N], [0, 0]]·τ)`. Exact stepping matters because the
/// data-driven feedback gains make `A + BF` very stiff.
fn zoh_propagators(m: &DMatrix<f64>, nmat: &DMatrix<f64>, tau: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let d = m.nrows();
    let w = nmat.ncols();
    let mut aug = DMatrix::zeros(d + w, d + w);
    aug.view_mut((0, 0), (d, d)).copy_from(&(m * tau));
    aug.view_mut((0, d), (d, w)).copy_from(&(nmat * tau));
    let e = aug.exp();
    (e.view((0, 0), (d, d)).into_owned(), e.view((0, d), (d, w)).into_owned())
}

/// Step the plant under the interface map and the ROM under `policy` on a
/// common grid, holding `û` over each step and integrating exactly.
#[allow(clippy::too_many_arguments)]
pub fn cosimulate(
    plant: &LtiPlant,
    rom: &Rom,
    cert: &Certificate,
    constants: &SfConstants,
    policy: &mut dyn RomPolicy,
    x0: &DVector<f64>,
    x_hat0: &DVector<f64>,
    tau: f64,
    horizon: f64,
) -> Result<CosimRecord> {
    let n = plant.state_dim();
    let nh = rom.reduced_dim();
    let mh = rom.input_dim();
    if x0.len() != n || x_hat0.len() != nh || rom.theta.nrows() != n || cert.f.shape() != (plant.input_dim(), n) {
        return Err(Error::dim(
            "co-simulation",
            format!("x0 {n}, x_hat0 {nh}"),
            format!("x0 {}, x_hat0 {}", x0.len(), x_hat0.len()),
        ));
    }
    if !(tau > 0.0) || !(horizon >= 0.0) {
        return Err(Error::InvalidArgument(format!("need tau > 0 and horizon >= 0, got {tau}, {horizon}")));
    }
    let steps = (horizon / tau).round() as usize;
    let b = plant.b();
    let mut mm = DMatrix::zeros(n + nh, n + nh);
    mm.view_mut((0, 0), (n, n)).copy_from(&(plant.a() + b * &cert.f));
    mm.view_mut((0, n), (n, nh)).copy_from(&(b * (&rom.xi - &cert.f * &rom.theta)));
    mm.view_mut((n, n), (nh, nh)).copy_from(&rom.a_hat);
    let mut nmat = DMatrix::zeros(n + nh, mh);
    nmat.view_mut((0, 0), (n, mh)).copy_from(&(b * &rom.psi));
    nmat.view_mut((n, 0), (nh, mh)).copy_from(&rom.b_hat);
    let (phi, gamma) = zoh_propagators(&mm, &nmat, tau);

    let mut z = DVector::zeros(n + nh);
    z.rows_mut(0, n).copy_from(x0);
    z.rows_mut(n, nh).copy_from(x_hat0);
    let mut rec = CosimRecord {
        times: Vec::with_capacity(steps + 1),
        plant_states: Vec::with_capacity(steps + 1),
        rom_states: Vec::with_capacity(steps + 1),
        rom_inputs: Vec::with_capacity(steps + 1),
        refined_inputs: Vec::with_capacity(steps + 1),
        output_error: Vec::with_capacity(steps + 1),
        sf_values: Vec::with_capacity(steps + 1),
        bound: ClosenessBound {
            v0: 0.0,
            u_hat_sup: 0.0,
            times: Vec::new(),
            values: Vec::new(),
        },
    };
    for k in 0..=steps {
        let x = z.rows(0, n).into_owned();
        let xh = z.rows(n, nh).into_owned();
        if !x.iter().chain(xh.iter()).all(|v| v.is_finite()) {
            return Err(Error::IntegrationDiverged {
                step: k,
                time: k as f64 * tau,
            });
        }
        let uh = policy.control(&xh);
        let u = refine_input(&x, &xh, &uh, rom, &cert.f)?;
        rec.output_error.push((&x - &rom.theta * &xh).norm());
        rec.sf_values.push(evaluate_sf(&x, &xh, &cert.p, &rom.theta)?);
        rec.times.push(k as f64 * tau);
        if k < steps {
            z = &phi * &z + &gamma * &uh;
        }
        rec.plant_states.push(x);
        rec.rom_states.push(xh);
        rec.rom_inputs.push(uh);
        rec.refined_inputs.push(u);
    }
    let u_sup = rec.rom_inputs.iter().map(|u| u.norm()).fold(0.0, f64::max);
    rec.bound = ClosenessBound::new(constants, rec.sf_values[0], u_sup, &rec.times);
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_rom() -> Rom {
        Rom::new(
            DMatrix::from_element(1, 1, -1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_column_slice(2, 1, &[0.6, 0.8]),
            DMatrix::from_element(1, 1, 0.5),
            DMatrix::from_element(1, 1, 2.0),
        )
        .unwrap()
    }

    #[test]
    fn interface_map_cases() {
        let rom = scalar_rom();
        let f = DMatrix::from_row_slice(1, 2, &[-1.0, 3.0]);
        let xh = DVector::from_element(1, 2.0);
        let x = &rom.theta * &xh;
        let u = refine_input(&x, &xh, &DVector::zeros(1), &rom, &f).unwrap();
        assert!((u[0] - 1.0).abs() < 1e-15);
        let x = DVector::from_vec(vec![1.0, 1.0]);
        let u = refine_input(&x, &DVector::zeros(1), &DVector::zeros(1), &rom, &f).unwrap();
        assert_eq!(u[0], 2.0);
    }

    #[test]
    fn fit_keeps_direction() {
        let b = AaBox::symmetric(2, 1.0);
        let v = fit_into(DVector::from_vec(vec![4.0, -2.0]), &b);
        assert!((v[0] - 1.0).abs() < 1e-15 && (v[1] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn planner_goes_around_a_wall() {
        let domain = AaBox::from_pairs(&[(0.0, 10.0), (0.0, 10.0)]);
        let wall = AaBox::from_pairs(&[(4.0, 6.0), (0.0, 8.0)]);
        let path = plan_path(&domain, &[1.0, 1.0], &[9.0, 1.0], std::slice::from_ref(&wall)).unwrap();
        let mut prev = vec![1.0, 1.0];
        for w in &path {
            assert!(!wall.segment_intersects(&prev, w.as_slice()));
            prev = w.as_slice().to_vec();
        }
        assert_eq!(prev, vec![9.0, 1.0]);

        let blocker = AaBox::from_pairs(&[(4.0, 6.0), (-1.0, 11.0)]);
        assert!(matches!(
            plan_path(&domain, &[1.0, 1.0], &[9.0, 1.0], &[blocker]),
            Err(Error::PlanningInfeasible(_))
        ));
    }

    #[test]
    fn zoh_propagator_matches_scalar_solution() {
        let m = DMatrix::from_element(1, 1, -2.0);
        let nm = DMatrix::from_element(1, 1, 1.0);
        let (phi, gamma) = zoh_propagators(&m, &nm, 0.1);
        // x' = -2x + 0.5 from x = 1: x(t) = 0.25 + 0.75 e^{-2t}.
        let want = 0.25 + 0.75 * (-0.2f64).exp();
        assert!((phi[(0, 0)] + gamma[(0, 0)] * 0.5 - want).abs() < 1e-14);
        // Stiff modes decay instead of blowing up.
        let (phi, _) = zoh_propagators(&DMatrix::from_element(1, 1, -8e4), &nm, 1e-3);
        assert!(phi[(0, 0)].abs() < 1e-30);
    }
}
