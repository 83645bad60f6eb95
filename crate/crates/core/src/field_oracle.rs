//! Full three-component field on the cylinder `B² × (0, 1)`, minimized by
//! accelerated gradient descent. Independent of the radial discretization:
//! a Cartesian mask in the plane, cell-centred layers in `z`.
//!
//! The discrete energy per unit `h² h_z` volume is the usual 5+2-point
//! Dirichlet form plus `W(1 - |u|²) / (2ε²)` at interior nodes. Lateral
//! boundary nodes carry `(x/|x|, 0)`; the `z` faces are free (no edges leave
//! the slab), which is the reflection-ghost Neumann condition.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitBall};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ProfilePair;
use crate::nonescaping::check_epsilon;
use crate::potential::PotentialSpec;

/// Number of field components.
pub const COMPONENTS: usize = 3;
const MAGIC: &[u8; 4] = b"GLF1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Interior,
    /// Lateral boundary node with data `(x/|x|, 0)`.
    Dirichlet,
    Exterior,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CylinderGrid {
    k: usize,
    layers: usize,
    kinds: Vec<NodeKind>,
    /// Plane indices of interior nodes.
    interior: Vec<usize>,
    /// For each interior node, its four in-plane neighbours.
    neighbours: Vec<[usize; 4]>,
}

impl CylinderGrid {
    /// `(K+1)²` nodes on `[-1, 1]²` and `L` cell-centred layers on `(0, 1)`.
    pub fn new(k: usize, layers: usize) -> Result<Self> {
        if k < 32 || !k.is_multiple_of(2) {
            return Err(Error::Sizing(format!("K = {k} must be even and at least 32")));
        }
        if layers < 8 {
            return Err(Error::Sizing(format!("L = {layers} must be at least 8")));
        }
        let side = k + 1;
        let h = 2.0 / k as f64;
        let inside = |a: usize, b: usize| {
            let x = -1.0 + a as f64 * h;
            let y = -1.0 + b as f64 * h;
            x * x + y * y < 1.0
        };
        let mut kinds = vec![NodeKind::Exterior; side * side];
        for a in 0..side {
            for b in 0..side {
                if inside(a, b) {
                    kinds[a * side + b] = NodeKind::Interior;
                }
            }
        }
        let mut interior = Vec::new();
        let mut neighbours = Vec::new();
        for a in 0..side {
            for b in 0..side {
                if kinds[a * side + b] != NodeKind::Interior {
                    continue;
                }
                let nb = [(a - 1) * side + b, (a + 1) * side + b, a * side + b - 1, a * side + b + 1];
                for &q in &nb {
                    if kinds[q] == NodeKind::Exterior {
                        kinds[q] = NodeKind::Dirichlet;
                    }
                }
                interior.push(a * side + b);
                neighbours.push(nb);
            }
        }
        Ok(Self {
            k,
            layers,
            kinds,
            interior,
            neighbours,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn side(&self) -> usize {
        self.k + 1
    }

    pub fn spacing(&self) -> f64 {
        2.0 / self.k as f64
    }

    pub fn layer_spacing(&self) -> f64 {
        1.0 / self.layers as f64
    }

    pub fn plane_len(&self) -> usize {
        self.side() * self.side()
    }

    pub fn kind(&self, plane_index: usize) -> NodeKind {
        self.kinds[plane_index]
    }

    pub fn interior_count(&self) -> usize {
        self.interior.len()
    }

    /// Planar coordinates of a plane index.
    pub fn position(&self, plane_index: usize) -> (f64, f64) {
        let side = self.side();
        let h = self.spacing();
        let a = plane_index / side;
        let b = plane_index % side;
        (-1.0 + a as f64 * h, -1.0 + b as f64 * h)
    }

    /// Centre of layer `m`.
    pub fn layer_centre(&self, m: usize) -> f64 {
        (m as f64 + 0.5) * self.layer_spacing()
    }

    /// Integer squared distance to the centre in lattice units.
    fn radius_class(&self, plane_index: usize) -> usize {
        let side = self.side();
        let c = (self.k / 2) as isize;
        let a = (plane_index / side) as isize - c;
        let b = (plane_index % side) as isize - c;
        (a * a + b * b) as usize
    }

    fn offset(&self, layer: usize, plane_index: usize) -> usize {
        (layer * self.plane_len() + plane_index) * COMPONENTS
    }

    fn boundary_value(&self, plane_index: usize) -> [f64; 3] {
        let (x, y) = self.position(plane_index);
        let r = x.hypot(y);
        if r == 0.0 {
            [0.0; 3]
        } else {
            [x / r, y / r, 0.0]
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub grid: Arc<CylinderGrid>,
    /// Three components per node, layer-major, then `x`, then `y`.
    pub values: Vec<f64>,
    pub epsilon: f64,
    pub energy: f64,
    pub iterations: usize,
    /// Max norm of the volume-scaled energy gradient at interior nodes.
    pub gradient_norm: f64,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldInit {
    /// Sampled from the radial pair, constant in `z`.
    Embed,
    /// Independent uniform samples of the unit ball at interior nodes.
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_iterations: 400_000,
        }
    }
}

fn blank_values(grid: &CylinderGrid) -> Vec<f64> {
    let mut values = vec![0.0; grid.layers * grid.plane_len() * COMPONENTS];
    for m in 0..grid.layers {
        for p in 0..grid.plane_len() {
            if grid.kinds[p] != NodeKind::Interior {
                let o = grid.offset(m, p);
                values[o..o + 3].copy_from_slice(&grid.boundary_value(p));
            }
        }
    }
    values
}

/// Embed a radial pair as `u(x, z) = (f(|x|) x/|x|, g(|x|))`.
pub fn z_invariant_embed(grid: &Arc<CylinderGrid>, pair: &ProfilePair) -> Result<FieldState> {
    if pair.grid.dimension() != 2 {
        return Err(Error::Sizing(format!(
            "the cylinder oracle embeds N = 2 profiles, got N = {}",
            pair.grid.dimension()
        )));
    }
    let epsilon = pair.epsilon.finite()?;
    let mut values = blank_values(grid);
    for &p in &grid.interior {
        let (x, y) = grid.position(p);
        let r = x.hypot(y);
        let f = pair.grid.interpolate(&pair.f, r);
        let g = pair.grid.interpolate(&pair.g, r);
        let u = if r == 0.0 { [0.0, 0.0, g] } else { [f * x / r, f * y / r, g] };
        for m in 0..grid.layers {
            let o = grid.offset(m, p);
            values[o..o + 3].copy_from_slice(&u);
        }
    }
    Ok(FieldState {
        grid: grid.clone(),
        values,
        epsilon,
        energy: f64::NAN,
        iterations: 0,
        gradient_norm: f64::NAN,
        seed: None,
    })
}

/// Independent uniform samples of the closed unit ball at every interior node.
pub fn random_seed(grid: &Arc<CylinderGrid>, epsilon: f64, seed: u64) -> FieldState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = blank_values(grid);
    for m in 0..grid.layers {
        for &p in &grid.interior {
            let v: [f64; 3] = UnitBall.sample(&mut rng);
            let o = grid.offset(m, p);
            values[o..o + 3].copy_from_slice(&v);
        }
    }
    FieldState {
        grid: grid.clone(),
        values,
        epsilon,
        energy: f64::NAN,
        iterations: 0,
        gradient_norm: f64::NAN,
        seed: Some(seed),
    }
}

struct Energy<'a> {
    spec: &'a PotentialSpec,
    grid: &'a CylinderGrid,
    inv_e2: f64,
}

impl Energy<'_> {
    /// Discrete `E_ε`.
    fn value(&self, u: &[f64]) -> Result<f64> {
        let g = self.grid;
        let h = g.spacing();
        let hz = g.layer_spacing();
        let per_layer: Result<Vec<f64>> = (0..g.layers)
            .into_par_iter()
            .map(|m| {
                let mut planar = 0.0;
                let mut vertical = 0.0;
                let mut potential = 0.0;
                for (idx, &p) in g.interior.iter().enumerate() {
                    let o = g.offset(m, p);
                    let up = &u[o..o + 3];
                    for &q in &g.neighbours[idx] {
                        // interior pairs once, interior-boundary pairs always
                        if g.kinds[q] == NodeKind::Interior && q < p {
                            continue;
                        }
                        let oq = g.offset(m, q);
                        planar += sq_dist(up, &u[oq..oq + 3]);
                    }
                    if m + 1 < g.layers {
                        let on = g.offset(m + 1, p);
                        vertical += sq_dist(up, &u[on..on + 3]);
                    }
                    let n2 = up[0] * up[0] + up[1] * up[1] + up[2] * up[2];
                    potential += self.spec.eval(1.0 - n2)?.w;
                }
                Ok(0.5 * hz * planar + 0.5 * h * h / hz * vertical + 0.5 * h * h * hz * self.inv_e2 * potential)
            })
            .collect();
        Ok(per_layer?.iter().sum())
    }

    /// Gradient divided by the node volume `h² h_z`, written into `out` at interior nodes.
    fn gradient(&self, u: &[f64], out: &mut [f64]) -> Result<f64> {
        let g = self.grid;
        let h = g.spacing();
        let hz = g.layer_spacing();
        let inv_h2 = 1.0 / (h * h);
        let inv_hz2 = 1.0 / (hz * hz);
        let layer_len = g.plane_len() * COMPONENTS;
        let maxes: Result<Vec<f64>> = out
            .par_chunks_mut(layer_len)
            .enumerate()
            .map(|(m, chunk)| {
                let mut worst = 0.0_f64;
                for (idx, &p) in g.interior.iter().enumerate() {
                    let o = g.offset(m, p);
                    let up = [u[o], u[o + 1], u[o + 2]];
                    let mut acc = [0.0; 3];
                    for &q in &g.neighbours[idx] {
                        let oq = g.offset(m, q);
                        for c in 0..3 {
                            acc[c] += inv_h2 * (up[c] - u[oq + c]);
                        }
                    }
                    for nm in [m.wrapping_sub(1), m + 1] {
                        if nm < g.layers {
                            let on = g.offset(nm, p);
                            for c in 0..3 {
                                acc[c] += inv_hz2 * (up[c] - u[on + c]);
                            }
                        }
                    }
                    let n2 = up[0] * up[0] + up[1] * up[1] + up[2] * up[2];
                    let wp = self.spec.eval(1.0 - n2)?.wp;
                    let local = o - m * layer_len;
                    for c in 0..3 {
                        let v = acc[c] - self.inv_e2 * wp * up[c];
                        chunk[local + c] = v;
                        worst = worst.max(v.abs());
                    }
                }
                Ok(worst)
            })
            .collect();
        Ok(maxes?.into_iter().fold(0.0, f64::max))
    }

    /// Upper bound on the Hessian of the scaled energy for `|u| ≤ 1`.
    fn lipschitz(&self) -> f64 {
        let g = self.grid;
        let h = g.spacing();
        let hz = g.layer_spacing();
        let mut curvature: f64 = 0.0;
        for k in 0..=20 {
            let t = k as f64 / 20.0;
            if let Ok(v) = self.spec.eval(t) {
                curvature = curvature.max(v.wp.abs() + 2.0 * v.wpp.abs());
            }
        }
        8.0 / (h * h) + 4.0 / (hz * hz) + self.inv_e2 * curvature
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

/// Discrete full energy of a state.
pub fn full_energy(spec: &PotentialSpec, state: &FieldState) -> Result<f64> {
    check_epsilon(state.epsilon)?;
    Energy {
        spec,
        grid: &state.grid,
        inv_e2: 1.0 / (state.epsilon * state.epsilon),
    }
    .value(&state.values)
}

/// Max norm of the volume-scaled energy gradient at interior nodes.
pub fn gradient_norm(spec: &PotentialSpec, state: &FieldState) -> Result<f64> {
    check_epsilon(state.epsilon)?;
    let mut out = vec![0.0; state.values.len()];
    Energy {
        spec,
        grid: &state.grid,
        inv_e2: 1.0 / (state.epsilon * state.epsilon),
    }
    .gradient(&state.values, &mut out)
}

/// Build the starting state for [`minimize_full_energy`].
pub fn initial_state(
    grid: &Arc<CylinderGrid>,
    epsilon: f64,
    init: FieldInit,
    embed_pair: Option<&ProfilePair>,
) -> Result<FieldState> {
    match init {
        FieldInit::Random { seed } => Ok(random_seed(grid, epsilon, seed)),
        FieldInit::Embed => {
            let pair = embed_pair.ok_or_else(|| Error::Config("embed initialization needs a radial pair".into()))?;
            let mut s = z_invariant_embed(grid, pair)?;
            s.epsilon = epsilon;
            Ok(s)
        }
    }
}

/// Accelerated gradient descent from `start` until the scaled gradient is below tolerance.
///
/// Nesterov momentum with restart: a momentum step that raises the energy is
/// replaced by a plain gradient step, and the step length is halved if even
/// that fails, so every accepted step lowers the energy.
pub fn minimize_full_energy(spec: &PotentialSpec, start: FieldState, opts: &OracleOptions) -> Result<FieldState> {
    check_epsilon(start.epsilon)?;
    let grid = start.grid.clone();
    let model = Energy {
        spec,
        grid: &grid,
        inv_e2: 1.0 / (start.epsilon * start.epsilon),
    };
    let n = start.values.len();
    let mut x = start.values.clone();
    let mut x_prev = x.clone();
    let mut y = x.clone();
    let mut grad = vec![0.0; n];
    let mut energy = model.value(&x)?;
    let mut step = 1.0 / model.lipschitz();
    let mut momentum_k = 0usize;
    let mut rises = 0usize;
    let mut iterations = 0usize;
    let interior: Vec<usize> = (0..grid.layers)
        .flat_map(|m| grid.interior.iter().map(move |&p| (m, p)))
        .map(|(m, p)| grid.offset(m, p))
        .collect();

    let mut gnorm = model.gradient(&x, &mut grad)?;
    while gnorm >= opts.tolerance {
        if iterations >= opts.max_iterations {
            return Err(Error::NonConvergence {
                iterations,
                residual: gnorm,
            });
        }
        iterations += 1;
        let beta = momentum_k as f64 / (momentum_k as f64 + 3.0);
        for &o in &interior {
            for c in 0..3 {
                y[o + c] = x[o + c] + beta * (x[o + c] - x_prev[o + c]);
            }
        }
        let mut trial = y.clone();
        model.gradient(&y, &mut grad)?;
        for &o in &interior {
            for c in 0..3 {
                trial[o + c] -= step * grad[o + c];
            }
        }
        let mut trial_energy = model.value(&trial)?;
        // changes below this are summation noise
        let slack = 1e-13 * energy.abs();
        if !(trial_energy <= energy + slack) {
            momentum_k = 0;
            model.gradient(&x, &mut grad)?;
            loop {
                trial.copy_from_slice(&x);
                for &o in &interior {
                    for c in 0..3 {
                        trial[o + c] -= step * grad[o + c];
                    }
                }
                trial_energy = model.value(&trial)?;
                if trial_energy <= energy + slack || !trial_energy.is_finite() {
                    break;
                }
                step *= 0.5;
                rises += 1;
                if rises >= 10 {
                    return Err(Error::NumericalBreakdown(format!(
                        "energy rose on 10 successive steps at eps = {}",
                        start.epsilon
                    )));
                }
            }
        } else {
            momentum_k += 1;
        }
        if !trial_energy.is_finite() {
            return Err(Error::NumericalBreakdown("non-finite field energy".into()));
        }
        rises = 0;
        std::mem::swap(&mut x_prev, &mut x);
        x.copy_from_slice(&trial);
        energy = trial_energy;
        gnorm = model.gradient(&x, &mut grad)?;
    }
    Ok(FieldState {
        grid,
        values: x,
        epsilon: start.epsilon,
        energy,
        iterations,
        gradient_norm: gnorm,
        seed: start.seed,
    })
}

impl FieldState {
    fn node(&self, layer: usize, plane_index: usize) -> [f64; 3] {
        let o = self.grid.offset(layer, plane_index);
        [self.values[o], self.values[o + 1], self.values[o + 2]]
    }

    /// `z`-average of the field at every interior node, in interior order.
    fn z_average(&self) -> Vec<[f64; 3]> {
        let layers = self.grid.layers as f64;
        self.grid
            .interior
            .iter()
            .map(|&p| {
                let mut s = [0.0; 3];
                for m in 0..self.grid.layers {
                    let v = self.node(m, p);
                    for c in 0..3 {
                        s[c] += v[c];
                    }
                }
                s.map(|v| v / layers)
            })
            .collect()
    }

    /// Third component over interior nodes, `(min, max)`.
    pub fn third_component_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for m in 0..self.grid.layers {
            for &p in &self.grid.interior {
                let v = self.node(m, p)[2];
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }

    /// Largest `|u|` over all nodes.
    pub fn max_modulus(&self) -> f64 {
        self.values
            .chunks_exact(3)
            .map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt())
            .fold(0.0, f64::max)
    }

    /// Apply `u ↦ R u` at every node, with `R` the planar rotation by
    /// `angle` followed by `u₃ ↦ -u₃`. Negation keeps `+0.0` fixed so that
    /// fields with `u₃ ≡ 0` map to themselves bitwise when `angle = 0`.
    pub fn transformed(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let mut out = self.clone();
        for v in out.values.chunks_exact_mut(3) {
            if angle != 0.0 {
                let (a, b) = (v[0], v[1]);
                v[0] = c * a - s * b;
                v[1] = s * a + c * b;
            }
            if v[2] != 0.0 {
                v[2] = -v[2];
            }
        }
        out
    }

    /// The reflection `u₃ ↦ -u₃`.
    pub fn reflected(&self) -> Self {
        self.transformed(0.0)
    }

    /// Raw dump: `GLF1`, then `K`, `L`, `M` as little-endian `u32`, then the
    /// values as little-endian `f64` with `z` outermost, then `x`, `y`, component.
    pub fn write_binary<W: Write>(&self, mut writer: W) -> Result<()> {
        writer.write_all(MAGIC)?;
        for v in [self.grid.k as u32, self.grid.layers as u32, COMPONENTS as u32] {
            writer.write_all(&v.to_le_bytes())?;
        }
        for v in &self.values {
            writer.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn save_binary(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_binary(std::io::BufWriter::new(file))
    }
}

/// Read a dump written by [`FieldState::write_binary`]; returns `(K, L, values)`.
pub fn read_binary<R: Read>(mut reader: R) -> Result<(usize, usize, Vec<f64>)> {
    let mut magic = [0u8; 4];
    reader.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Parse("not a GLF1 field dump".into()));
    }
    let mut word = [0u8; 4];
    let mut header = [0usize; 3];
    for slot in &mut header {
        reader.read_exact(&mut word)?;
        *slot = u32::from_le_bytes(word) as usize;
    }
    if header[2] != COMPONENTS {
        return Err(Error::Parse(format!("expected {COMPONENTS} components, found {}", header[2])));
    }
    let count = (header[0] + 1) * (header[0] + 1) * header[1] * COMPONENTS;
    let mut values = Vec::with_capacity(count);
    let mut buf = [0u8; 8];
    for _ in 0..count {
        reader.read_exact(&mut buf)?;
        values.push(f64::from_le_bytes(buf));
    }
    Ok((header[0], header[1], values))
}

/// `max |u(x, z) - ū(x)|` with `ū` the `z`-average.
pub fn z_invariance_deviation(state: &FieldState) -> f64 {
    let avg = state.z_average();
    let mut worst = 0.0_f64;
    for m in 0..state.grid.layers {
        for (idx, &p) in state.grid.interior.iter().enumerate() {
            let v = state.node(m, p);
            let d = sq_dist(&v, &avg[idx]).sqrt();
            worst = worst.max(d);
        }
    }
    worst
}

/// Departure of the `z`-averaged field from the equivariant radial form.
///
/// Nodes are grouped by exact lattice radius; the result is the largest
/// spread of `|u_planar|` or `u₃` within a group plus the largest
/// misalignment `|u_planar - |u_planar| x/|x||`.
pub fn radial_symmetry_deviation(state: &FieldState) -> f64 {
    let grid = &state.grid;
    let avg = state.z_average();
    let mut groups: std::collections::BTreeMap<usize, [f64; 4]> = std::collections::BTreeMap::new();
    let mut misalignment = 0.0_f64;
    for (idx, &p) in grid.interior.iter().enumerate() {
        let v = avg[idx];
        let planar = v[0].hypot(v[1]);
        let entry = groups
            .entry(grid.radius_class(p))
            .or_insert([f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY]);
        entry[0] = entry[0].min(planar);
        entry[1] = entry[1].max(planar);
        entry[2] = entry[2].min(v[2]);
        entry[3] = entry[3].max(v[2]);
        let (x, y) = grid.position(p);
        let r = x.hypot(y);
        if r > 0.0 {
            let dx = v[0] - planar * x / r;
            let dy = v[1] - planar * y / r;
            misalignment = misalignment.max(dx.hypot(dy));
        }
    }
    let spread = groups
        .values()
        .map(|e| (e[1] - e[0]).max(e[3] - e[2]))
        .fold(0.0, f64::max);
    spread + misalignment
}

/// Relative change of the energy under `u ↦ R u` (see [`FieldState::transformed`]).
pub fn rotation_energy_invariance(spec: &PotentialSpec, state: &FieldState, angle: f64) -> Result<f64> {
    let e0 = full_energy(spec, state)?;
    let e1 = full_energy(spec, &state.transformed(angle))?;
    Ok((e0 - e1).abs() / e0.abs().max(f64::MIN_POSITIVE))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub epsilon: f64,
    pub energy: f64,
    pub z_dev: f64,
    pub radial_dev: f64,
    pub third_comp_min: f64,
    pub third_comp_max: f64,
    pub seed: Option<u64>,
}

impl OracleSummary {
    pub fn of(state: &FieldState) -> Self {
        let (lo, hi) = state.third_component_range();
        Self {
            epsilon: state.epsilon,
            energy: state.energy,
            z_dev: z_invariance_deviation(state),
            radial_dev: radial_symmetry_deviation(state),
            third_comp_min: lo,
            third_comp_max: hi,
            seed: state.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, Epsilon};

    fn cyl() -> Arc<CylinderGrid> {
        Arc::new(CylinderGrid::new(32, 8).unwrap())
    }

    fn bump_pair() -> ProfilePair {
        let g = Arc::new(build_grid(2, 128).unwrap());
        let f: Vec<f64> = g.nodes().iter().map(|r| r * (2.0 - r) / (1.0 + 0.0 * r)).collect();
        let gg: Vec<f64> = g.nodes().iter().map(|r| 0.5 * (1.0 - r * r)).collect();
        ProfilePair::new(g, f, gg, Epsilon::Finite(0.2)).unwrap()
    }

    #[test]
    fn sizing_is_checked() {
        assert!(CylinderGrid::new(31, 8).is_err());
        assert!(CylinderGrid::new(16, 8).is_err());
        assert!(CylinderGrid::new(32, 4).is_err());
    }

    #[test]
    fn boundary_ring_surrounds_interior() {
        let g = cyl();
        for p in 0..g.plane_len() {
            if g.kind(p) == NodeKind::Dirichlet {
                let (x, y) = g.position(p);
                assert!(x * x + y * y >= 1.0);
            }
        }
        assert!(g.interior_count() > 700);
    }

    #[test]
    fn embed_is_z_invariant_and_radial() {
        let g = cyl();
        let s = z_invariant_embed(&g, &bump_pair()).unwrap();
        assert!(z_invariance_deviation(&s) < 1e-14);
        assert!(radial_symmetry_deviation(&s) < 1e-8);
    }

    #[test]
    fn reflection_of_flat_state_is_bitwise_identity() {
        let g = cyl();
        let mut pair = bump_pair();
        pair.g.iter_mut().for_each(|v| *v = 0.0);
        let s = z_invariant_embed(&g, &pair).unwrap();
        let r = s.reflected();
        assert!(s.values.iter().zip(&r.values).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn binary_round_trip() {
        let g = cyl();
        let s = random_seed(&g, 0.3, 11);
        let mut buf = Vec::new();
        s.write_binary(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"GLF1");
        let (k, l, values) = read_binary(buf.as_slice()).unwrap();
        assert_eq!((k, l), (32, 8));
        assert_eq!(values, s.values);
    }

    #[test]
    fn random_seed_is_reproducible_and_bounded() {
        let g = cyl();
        let a = random_seed(&g, 0.3, 5);
        let b = random_seed(&g, 0.3, 5);
        assert_eq!(a.values, b.values);
        assert!(a.max_modulus() <= 1.0);
    }
}
