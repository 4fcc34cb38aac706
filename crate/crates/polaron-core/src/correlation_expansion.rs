//! Correlation-expansion hierarchy on a discretized phonon bath, truncated
//! after two phonon operators.
//!
//! Every tracked quantity is a connected moment ⟨X Φ⟩_c where X is a
//! one-excitation system operator and Φ is 1, β_q or β_q β_m with
//! β ∈ {b, b†}. Pure-phonon moments are frozen at their thermal values.
//! The frame rotates at the polaron-shifted exciton frequency.

use crate::error::{PolaronError, Result};
use crate::phonon_bath::DiscretizedPhononModes;
use crate::photonic_reservoir::{LorentzianCavity, PhotonReservoir};
use crate::reservoir_me::ZplRates;
use crate::units_numerics::{
    mev_to_rad_ps, CorrelationTrace, FrequencyGrid, Rk4, Spectrum, Trajectory,
};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Desk-scale discretization and propagation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HierarchyConfig {
    pub modes: usize,
    /// Upper edge of the mode grid (rad/ps).
    pub omega_max: f64,
    /// RK4 step (ps).
    pub dt: f64,
    /// Length of propagated correlation traces (ps).
    pub tau_end: f64,
}

impl Default for HierarchyConfig {
    fn default() -> Self {
        Self {
            modes: 150,
            omega_max: mev_to_rad_ps(5.0),
            dt: 0.002,
            tau_end: 50.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Level {
    Exciton,
    Photon,
    Ground,
}

/// Which block of the density matrix the hierarchy follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    /// Coherences with the ground state: ⟨σ⁻Φ⟩ and ⟨aΦ⟩. Components are
    /// [`EXCITON`] and [`PHOTON`].
    Amplitude,
    /// The one-excitation block: ⟨σ⁺σ⁻Φ⟩, ⟨a†σ⁻Φ⟩, ⟨σ⁺aΦ⟩, ⟨a†aΦ⟩, in the
    /// component order [`EXCITON_EXCITON`], [`EXCITON_PHOTON`],
    /// [`PHOTON_EXCITON`], [`PHOTON_PHOTON`] (ket level first).
    Population,
}

pub const EXCITON: usize = 0;
pub const PHOTON: usize = 1;
pub const EXCITON_EXCITON: usize = 0;
pub const EXCITON_PHOTON: usize = 1;
pub const PHOTON_EXCITON: usize = 2;
pub const PHOTON_PHOTON: usize = 3;

impl Sector {
    fn components(self) -> Vec<(Level, Level)> {
        use Level::*;
        match self {
            Sector::Amplitude => vec![(Exciton, Ground), (Photon, Ground)],
            Sector::Population => vec![
                (Exciton, Exciton),
                (Exciton, Photon),
                (Photon, Exciton),
                (Photon, Photon),
            ],
        }
    }
}

/// Storage map of one component block.
///
/// Phonon slots s < N stand for b_s and s ≥ N for b†_{s−N}. Like-operator
/// pairs are packed upper triangles; the mixed b_q b†_m block is stored full.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub components: usize,
    pub modes: usize,
}

impl Layout {
    fn packed(&self) -> usize {
        self.modes * (self.modes + 1) / 2
    }

    pub fn block(&self) -> usize {
        1 + 2 * self.modes + 2 * self.packed() + self.modes * self.modes
    }

    pub fn len(&self) -> usize {
        self.components * self.block()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn pack(q: usize, m: usize) -> usize {
        let (i, j) = if q <= m { (q, m) } else { (m, q) };
        j * (j + 1) / 2 + i
    }

    /// Offset of the first-order slot inside a block.
    pub fn first(&self, slot: usize) -> usize {
        1 + slot
    }

    /// Offset of the second-order moment for the slot pair (order-free).
    pub fn second(&self, a: usize, b: usize) -> usize {
        let n = self.modes;
        let bb = 1 + 2 * n;
        let dd = bb + self.packed();
        let mixed = dd + self.packed();
        match (a < n, b < n) {
            (true, true) => bb + Self::pack(a, b),
            (false, false) => dd + Self::pack(a - n, b - n),
            (true, false) => mixed + a * n + (b - n),
            (false, true) => mixed + b * n + (a - n),
        }
    }

    /// All second-order entries as (offset, slot a, slot b), each stored
    /// moment listed once.
    fn second_entries(&self) -> Vec<(usize, usize, usize)> {
        let n = self.modes;
        let mut out = Vec::with_capacity(self.block() - 1 - 2 * n);
        for m in 0..n {
            for q in 0..=m {
                out.push((self.second(q, m), q, m));
            }
        }
        for m in 0..n {
            for q in 0..=m {
                out.push((self.second(n + q, n + m), n + q, n + m));
            }
        }
        for q in 0..n {
            for m in 0..n {
                out.push((self.second(q, n + m), q, n + m));
            }
        }
        out
    }
}

/// Flat hierarchy state, component-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyState {
    pub layout: Layout,
    pub data: Vec<C64>,
}

impl HierarchyState {
    pub fn zeros(layout: Layout) -> Self {
        Self {
            layout,
            data: vec![ZERO; layout.len()],
        }
    }

    fn block(&self, component: usize) -> &[C64] {
        let b = self.layout.block();
        &self.data[component * b..(component + 1) * b]
    }

    fn block_mut(&mut self, component: usize) -> &mut [C64] {
        let b = self.layout.block();
        &mut self.data[component * b..(component + 1) * b]
    }

    pub fn singlet(&self, component: usize) -> C64 {
        self.block(component)[0]
    }

    pub fn set_singlet(&mut self, component: usize, value: C64) {
        self.block_mut(component)[0] = value;
    }

    /// ⟨X b_q⟩_c.
    pub fn lowering(&self, component: usize, q: usize) -> C64 {
        self.block(component)[self.layout.first(q)]
    }

    /// ⟨X b†_q⟩_c.
    pub fn raising(&self, component: usize, q: usize) -> C64 {
        self.block(component)[self.layout.first(self.layout.modes + q)]
    }

    /// Connected second-order moment for two phonon slots.
    pub fn pair(&self, component: usize, a: usize, b: usize) -> C64 {
        self.block(component)[self.layout.second(a, b)]
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// Linear right-hand side of the truncated hierarchy for one sector.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    sector: Sector,
    layout: Layout,
    system: Vec<C64>,
    couplings: Vec<f64>,
    /// Phonon frequency carried by each slot (+ω for b, −ω for b†).
    slot_frequency: Vec<f64>,
    /// Σ of slot frequencies for every offset in a block.
    block_frequency: Vec<f64>,
    /// Vertex strength: −i on an exciton ket, +i on an exciton bra.
    feed: Vec<C64>,
    /// Contraction source λ_s (ket · w_ket + bra · w_bra) per component and slot.
    source: Vec<Vec<C64>>,
    exciton_shift: f64,
}

/// Builds the amplitude hierarchy ⟨σ⁻Φ⟩, ⟨aΦ⟩.
pub fn assemble_hierarchy(
    modes: &DiscretizedPhononModes,
    cav: &LorentzianCavity,
    zpl: &ZplRates,
) -> Result<Hierarchy> {
    Hierarchy::new(modes, cav, zpl, Sector::Amplitude)
}

impl Hierarchy {
    pub fn new(
        modes: &DiscretizedPhononModes,
        cav: &LorentzianCavity,
        zpl: &ZplRates,
        sector: Sector,
    ) -> Result<Self> {
        let n = modes.len();
        if n < 10 {
            return Err(PolaronError::InsufficientModes { n });
        }
        let comps = sector.components();
        let nc = comps.len();
        let layout = Layout {
            components: nc,
            modes: n,
        };
        let exciton_shift: f64 = modes
            .frequencies
            .iter()
            .zip(&modes.couplings)
            .map(|(&w, &l)| l * l / w)
            .sum();

        let energy = |a: Level, b: Level| -> C64 {
            use Level::*;
            match (a, b) {
                (Exciton, Exciton) => C64::new(exciton_shift, -0.5 * zpl.total()),
                (Photon, Photon) => C64::new(cav.detuning, -0.5 * cav.kappa),
                (Exciton, Photon) | (Photon, Exciton) => C64::new(cav.coupling, 0.0),
                _ => ZERO,
            }
        };
        let mut system = vec![ZERO; nc * nc];
        for (p, &(ket, bra)) in comps.iter().enumerate() {
            for (pp, &(ket2, bra2)) in comps.iter().enumerate() {
                let mut v = ZERO;
                if bra == bra2 {
                    v -= I * energy(ket, ket2);
                }
                if ket == ket2 {
                    v += I * energy(bra, bra2).conj();
                }
                system[p * nc + pp] = v;
            }
            if ket == Level::Exciton && bra == Level::Exciton {
                system[p * nc + p] += zpl.dephasing;
            }
        }

        let slot_frequency: Vec<f64> = modes
            .frequencies
            .iter()
            .copied()
            .chain(modes.frequencies.iter().map(|w| -w))
            .collect();
        let mut block_frequency = vec![0.0; layout.block()];
        for s in 0..2 * n {
            block_frequency[layout.first(s)] = slot_frequency[s];
        }
        for (off, a, b) in layout.second_entries() {
            block_frequency[off] = slot_frequency[a] + slot_frequency[b];
        }

        let mut feed = Vec::with_capacity(nc);
        let mut source = Vec::with_capacity(nc);
        for &(ket, bra) in &comps {
            let kv = if ket == Level::Exciton { -I } else { ZERO };
            let bv = if bra == Level::Exciton { I } else { ZERO };
            feed.push(kv + bv);
            source.push(
                (0..2 * n)
                    .map(|s| {
                        let q = s % n;
                        let occ = modes.occupations[q];
                        let (w_ket, w_bra) = if s < n {
                            (occ + 1.0, occ)
                        } else {
                            (occ, occ + 1.0)
                        };
                        (kv * w_ket + bv * w_bra) * modes.couplings[q]
                    })
                    .collect(),
            );
        }

        Ok(Self {
            sector,
            layout,
            system,
            couplings: modes.couplings.clone(),
            slot_frequency,
            block_frequency,
            feed,
            source,
            exciton_shift,
        })
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    /// Polaron shift Σ λ_q²/ω_q of the discrete bath; the bare exciton sits
    /// this far above the frame.
    pub fn exciton_shift(&self) -> f64 {
        self.exciton_shift
    }

    fn components(&self) -> usize {
        self.layout.components
    }

    fn lambda(&self, slot: usize) -> f64 {
        self.couplings[slot % self.layout.modes]
    }

    /// Writes dy/dt into `out`.
    pub fn apply(&self, y: &[C64], out: &mut [C64]) {
        let layout = self.layout;
        let n = layout.modes;
        let nc = self.components();
        let bsize = layout.block();
        let entries = second_entries_cached(layout);
        out.par_chunks_mut(bsize).enumerate().for_each(|(p, ob)| {
            let yb = &y[p * bsize..(p + 1) * bsize];
            for (idx, o) in ob.iter_mut().enumerate() {
                let mut v = -I * self.block_frequency[idx] * yb[idx];
                for pp in 0..nc {
                    let s = self.system[p * nc + pp];
                    if s != ZERO {
                        v += s * y[pp * bsize + idx];
                    }
                }
                *o = v;
            }
            let f = self.feed[p];
            let src = &self.source[p];
            if f != ZERO {
                let mut acc = ZERO;
                for k in 0..n {
                    acc += (yb[layout.first(k)] + yb[layout.first(n + k)]) * self.couplings[k];
                }
                ob[0] += f * acc;
            }
            for s in 0..2 * n {
                let mut acc = ZERO;
                if f != ZERO {
                    for k in 0..n {
                        acc += (yb[layout.second(s, k)] + yb[layout.second(s, n + k)])
                            * self.couplings[k];
                    }
                }
                ob[layout.first(s)] += src[s] * yb[0] + f * acc;
            }
            for &(off, a, b) in entries.iter() {
                ob[off] += src[b] * yb[layout.first(a)] + src[a] * yb[layout.first(b)];
            }
        });
    }

    /// Solves (𝓛 + z) x = r by eliminating the two-phonon blocks, which are
    /// local in (q, m), and factorizing the remaining dense system.
    ///
    /// `rhs` holds one or more right-hand sides; only the singlet and
    /// first-order parts of the solutions are returned unless `full` is set.
    fn solve_shifted(
        &self,
        z: C64,
        rhs: &[&HierarchyState],
        full: bool,
    ) -> Option<Vec<HierarchyState>> {
        let layout = self.layout;
        let n = layout.modes;
        let nc = self.components();
        let width = 1 + 2 * n;
        let dim = nc * width;
        let at = |p: usize, j: usize| p * width + j;
        let mut r = DMatrix::<C64>::zeros(dim, dim);
        let mut b = DMatrix::<C64>::zeros(dim, rhs.len());
        for (col, state) in rhs.iter().enumerate() {
            for p in 0..nc {
                for j in 0..width {
                    b[(at(p, j), col)] = state.block(p)[j];
                }
            }
        }
        for p in 0..nc {
            for pp in 0..nc {
                let s = self.system[p * nc + pp];
                for j in 0..width {
                    r[(at(p, j), at(pp, j))] += s;
                }
            }
            r[(at(p, 0), at(p, 0))] += z;
            for s in 0..2 * n {
                r[(at(p, 1 + s), at(p, 1 + s))] += z - I * self.slot_frequency[s];
                r[(at(p, 0), at(p, 1 + s))] += self.feed[p] * self.lambda(s);
                r[(at(p, 1 + s), at(p, 0))] += self.source[p][s];
            }
        }

        let entries = second_entries_cached(layout);
        let mut inverses = if full {
            Vec::with_capacity(entries.len())
        } else {
            Vec::new()
        };
        let mut m = vec![ZERO; nc * nc];
        for &(off, a, bslot) in entries.iter() {
            let shift = z - I * (self.slot_frequency[a] + self.slot_frequency[bslot]);
            for (k, v) in m.iter_mut().enumerate() {
                *v = self.system[k];
                if k % (nc + 1) == 0 {
                    *v += shift;
                }
            }
            if !invert_small(nc, &mut m) {
                return None;
            }
            // Targets: (first-order slot fed, partner coupling).
            let targets: &[(usize, f64)] = &if a == bslot {
                vec![(a, self.lambda(a))]
            } else {
                vec![(a, self.lambda(bslot)), (bslot, self.lambda(a))]
            };
            for p in 0..nc {
                if self.feed[p] == ZERO {
                    continue;
                }
                for &(t, lam) in targets {
                    let fp = self.feed[p] * lam;
                    for pp in 0..nc {
                        let w = fp * m[p * nc + pp];
                        if w == ZERO {
                            continue;
                        }
                        r[(at(p, 1 + t), at(pp, 1 + a))] -= w * self.source[pp][bslot];
                        r[(at(p, 1 + t), at(pp, 1 + bslot))] -= w * self.source[pp][a];
                        for (col, state) in rhs.iter().enumerate() {
                            b[(at(p, 1 + t), col)] -= w * state.block(pp)[off];
                        }
                    }
                }
            }
            if full {
                inverses.push(m.clone());
            }
        }

        let x = r.lu().solve(&b)?;
        let mut out = Vec::with_capacity(rhs.len());
        for (col, state) in rhs.iter().enumerate() {
            let mut sol = HierarchyState::zeros(layout);
            for p in 0..nc {
                for j in 0..width {
                    sol.block_mut(p)[j] = x[(at(p, j), col)];
                }
            }
            if full {
                for (&(off, a, bslot), inv) in entries.iter().zip(&inverses) {
                    let residual: Vec<C64> = (0..nc)
                        .map(|pp| {
                            state.block(pp)[off]
                                - self.source[pp][bslot] * sol.block(pp)[1 + a]
                                - self.source[pp][a] * sol.block(pp)[1 + bslot]
                        })
                        .collect();
                    for p in 0..nc {
                        let v: C64 = (0..nc).map(|pp| inv[p * nc + pp] * residual[pp]).sum();
                        sol.block_mut(p)[off] = v;
                    }
                }
            }
            out.push(sol);
        }
        Some(out)
    }

    /// ∫₀^∞ y(t) dt for the trajectory starting at `y0`, i.e. −𝓛⁻¹ y0.
    pub fn time_integral(&self, y0: &HierarchyState) -> Result<HierarchyState> {
        let mut x = self
            .solve_shifted(ZERO, &[y0], true)
            .ok_or(PolaronError::SingularDenominator { omega: 0.0 })?
            .remove(0);
        x.data.iter_mut().for_each(|v| *v = -*v);
        Ok(x)
    }

    /// Re ∫₀^∞ y_read(τ) e^{iδτ} dτ for each (seed, read) probe, on the grid.
    /// All probes share one factorization per frequency.
    pub fn resolvent_spectra(
        &self,
        probes: &[(&HierarchyState, usize)],
        grid: &FrequencyGrid,
    ) -> Result<Vec<Spectrum>> {
        if grid.is_empty() {
            return Err(PolaronError::EmptyGrid);
        }
        let points = grid.points();
        let seeds: Vec<&HierarchyState> = probes.iter().map(|p| p.0).collect();
        let rows: Vec<Vec<f64>> = points
            .par_iter()
            .map(|&w| {
                let xs = self
                    .solve_shifted(I * w, &seeds, false)
                    .ok_or(PolaronError::SingularDenominator { omega: w })?;
                Ok(xs
                    .iter()
                    .zip(probes)
                    .map(|(x, p)| -x.singlet(p.1).re)
                    .collect())
            })
            .collect::<Result<_>>()?;
        Ok((0..probes.len())
            .map(|k| Spectrum::new(points.clone(), rows.iter().map(|r| r[k]).collect()))
            .collect())
    }
}

fn second_entries_cached(layout: Layout) -> std::sync::Arc<Vec<(usize, usize, usize)>> {
    use std::collections::HashMap;
    use std::sync::{Arc, Mutex, OnceLock};
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<(usize, usize, usize)>>>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("entry cache poisoned");
    guard
        .entry(layout.modes)
        .or_insert_with(|| Arc::new(layout.second_entries()))
        .clone()
}

/// In-place Gauss-Jordan inverse of a small row-major matrix.
fn invert_small(n: usize, a: &mut [C64]) -> bool {
    let mut inv = vec![ZERO; n * n];
    for i in 0..n {
        inv[i * n + i] = C64::new(1.0, 0.0);
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].norm().total_cmp(&a[j * n + col].norm()))
            .unwrap();
        if a[pivot * n + col].norm() < 1e-300 {
            return false;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
                inv.swap(pivot * n + k, col * n + k);
            }
        }
        let d = a[col * n + col].inv();
        for k in 0..n {
            a[col * n + k] *= d;
            inv[col * n + k] *= d;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = a[row * n + col];
            if f == ZERO {
                continue;
            }
            for k in 0..n {
                let (ak, ik) = (a[col * n + k], inv[col * n + k]);
                a[row * n + k] -= f * ak;
                inv[row * n + k] -= f * ik;
            }
        }
    }
    a.copy_from_slice(&inv);
    true
}

/// RK4 trajectory of the full hierarchy.
pub fn propagate_one_time(
    h: &Hierarchy,
    y0: &HierarchyState,
    t_end: f64,
    dt: f64,
    record_every: usize,
) -> Result<Trajectory> {
    crate::units_numerics::integrate_ode(
        |_, y, dy| h.apply(y, dy),
        &y0.data,
        t_end,
        dt,
        record_every,
    )
}

/// Propagates until the state changes by less than 1e-8 (relative) per ps.
pub fn propagate_to_steady_state(
    h: &Hierarchy,
    y0: &HierarchyState,
    dt: f64,
    t_max: f64,
) -> Result<HierarchyState> {
    let per_ps = (1.0 / dt).round().max(1.0) as usize;
    let mut rk = Rk4::new(y0.data.len());
    let mut y = y0.data.clone();
    let mut rhs = |_: f64, y: &[C64], dy: &mut [C64]| h.apply(y, dy);
    let mut t = 0.0;
    let mut change = f64::INFINITY;
    while t < t_max {
        let before = y.clone();
        for _ in 0..per_ps {
            rk.step(&mut rhs, t, dt, &mut y);
            t += dt;
        }
        if y.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(PolaronError::NonFiniteState { t_ps: t });
        }
        let scale = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
        change = y
            .iter()
            .zip(&before)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if change <= 1e-8 * scale.max(f64::MIN_POSITIVE) {
            return Ok(HierarchyState {
                layout: h.layout,
                data: y,
            });
        }
    }
    Err(PolaronError::NoSteadyState {
        residual: change,
        t_ps: t,
    })
}

/// Singlet `read` of the hierarchy propagated from `seed`, sampled every step.
pub fn regression_trace(
    h: &Hierarchy,
    seed: &HierarchyState,
    read: usize,
    dt: f64,
    t_end: f64,
) -> Result<CorrelationTrace> {
    let steps = (t_end / dt).round() as usize;
    let mut rk = Rk4::new(seed.data.len());
    let mut y = seed.data.clone();
    let mut rhs = |_: f64, y: &[C64], dy: &mut [C64]| h.apply(y, dy);
    let bsize = h.layout.block();
    let mut values = Vec::with_capacity(steps + 1);
    values.push(y[read * bsize]);
    for s in 0..steps {
        rk.step(&mut rhs, s as f64 * dt, dt, &mut y);
        let v = y[read * bsize];
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(PolaronError::NonFiniteState {
                t_ps: (s + 1) as f64 * dt,
            });
        }
        values.push(v);
    }
    CorrelationTrace::new(dt, values)
}

/// Whose emission a regression seed describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Emitter {
    Exciton,
    Cavity,
}

/// Amplitude-sector seed for ⟨A†(t) X(t+τ)⟩ built from one-excitation
/// moments ⟨A† X Φ⟩, with A = σ⁻ or a.
pub fn regression_seed(moments: &HierarchyState, emitter: Emitter) -> HierarchyState {
    let modes = moments.layout.modes;
    let mut seed = HierarchyState::zeros(Layout {
        components: 2,
        modes,
    });
    let (from_exciton, from_photon) = match emitter {
        Emitter::Exciton => (EXCITON_EXCITON, PHOTON_EXCITON),
        Emitter::Cavity => (EXCITON_PHOTON, PHOTON_PHOTON),
    };
    seed.block_mut(EXCITON)
        .copy_from_slice(moments.block(from_exciton));
    seed.block_mut(PHOTON)
        .copy_from_slice(moments.block(from_photon));
    seed
}

/// How the dot is excited before emission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialCondition {
    /// Exciton created at t = 0 with an undisplaced thermal lattice; the
    /// spectrum integrates over all emission times.
    #[default]
    InvertedAtom,
    /// Weak incoherent pump in steady state.
    SteadyPump,
}

/// Spectra from the hierarchy; `coupled_mode` and `green_function` are peak
/// normalized, `polarization` is not.
#[derive(Debug, Clone)]
pub struct CeSpectra {
    pub coupled_mode: Spectrum,
    pub green_function: Spectrum,
    pub polarization: Spectrum,
    /// ⟨σ⁺σ⁻⟩ (steady pump) or ∫⟨σ⁺σ⁻⟩dt (inverted atom).
    pub exciton_weight: f64,
}

/// One-excitation moments that seed the two-time correlations.
pub fn emission_moments(
    modes: &DiscretizedPhononModes,
    cav: &LorentzianCavity,
    zpl: &ZplRates,
    init: InitialCondition,
) -> Result<HierarchyState> {
    let (zpl, weight) = match init {
        InitialCondition::InvertedAtom => (ZplRates { pump: 0.0, ..*zpl }, 1.0),
        InitialCondition::SteadyPump => {
            if !(zpl.pump > 0.0) {
                return Err(PolaronError::InvalidParameter {
                    name: "pump",
                    value: zpl.pump,
                });
            }
            (*zpl, zpl.pump)
        }
    };
    let pop = Hierarchy::new(modes, cav, &zpl, Sector::Population)?;
    let mut y0 = HierarchyState::zeros(pop.layout);
    y0.set_singlet(EXCITON_EXCITON, C64::new(weight, 0.0));
    let moments = pop.time_integral(&y0)?;
    if !moments.is_finite() {
        return Err(PolaronError::NonFiniteState {
            t_ps: f64::INFINITY,
        });
    }
    Ok(moments)
}

/// Coupled-mode, Green-function and polarization spectra on a detuning grid.
pub fn two_time_spectrum(
    modes: &DiscretizedPhononModes,
    cav: &LorentzianCavity,
    zpl: &ZplRates,
    init: InitialCondition,
    grid: &FrequencyGrid,
) -> Result<CeSpectra> {
    let moments = emission_moments(modes, cav, zpl, init)?;
    let zpl_amp = match init {
        InitialCondition::InvertedAtom => ZplRates { pump: 0.0, ..*zpl },
        InitialCondition::SteadyPump => *zpl,
    };
    let amp = Hierarchy::new(modes, cav, &zpl_amp, Sector::Amplitude)?;
    let dot_seed = regression_seed(&moments, Emitter::Exciton);
    let cav_seed = regression_seed(&moments, Emitter::Cavity);
    let mut both = amp.resolvent_spectra(&[(&dot_seed, EXCITON), (&cav_seed, PHOTON)], grid)?;
    let cavity = both.pop().expect("two probes");
    let dot = both.pop().expect("two probes");
    let filter = PhotonReservoir::Cavity(*cav);
    let filtered = dot
        .omega
        .iter()
        .zip(&dot.values)
        .map(|(&w, &s)| filter.propagator(w) * s)
        .collect();
    Ok(CeSpectra {
        coupled_mode: cavity.normalized(),
        green_function: Spectrum::new(dot.omega.clone(), filtered).normalized(),
        polarization: dot,
        exciton_weight: moments.singlet(EXCITON_EXCITON).re,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phonon_bath::{discretize_modes, PhononBath, PhononBathParams};
    use crate::units_numerics::{half_fourier, uev_to_rad_ps};

    fn modes(t: f64, n: usize) -> DiscretizedPhononModes {
        discretize_modes(&PhononBathParams::inas(t), n, mev_to_rad_ps(5.0)).unwrap()
    }

    fn cavity(d_mev: f64, kappa_uev: f64, g_uev: f64) -> LorentzianCavity {
        LorentzianCavity {
            detuning: mev_to_rad_ps(d_mev),
            kappa: uev_to_rad_ps(kappa_uev),
            coupling: uev_to_rad_ps(g_uev),
        }
    }

    fn unit_dot(layout: Layout) -> HierarchyState {
        let mut y = HierarchyState::zeros(layout);
        y.set_singlet(EXCITON, C64::new(1.0, 0.0));
        y
    }

    #[test]
    fn layout_offsets_are_unique() {
        let l = Layout {
            components: 1,
            modes: 12,
        };
        let mut seen = vec![false; l.block()];
        seen[0] = true;
        for s in 0..24 {
            seen[l.first(s)] = true;
        }
        for (off, a, b) in l.second_entries() {
            assert!(!seen[off] || l.first(a) == off, "duplicate offset {off}");
            assert_eq!(l.second(a, b), l.second(b, a));
            seen[off] = true;
        }
        assert!(seen.iter().all(|&v| v));
    }

    #[test]
    fn source_term_from_bare_polarization() {
        let m = modes(4.0, 20);
        let h = assemble_hierarchy(
            &m,
            &cavity(0.0, 65.0, 50.0),
            &ZplRates::from_uev(5.0, 55.0, 0.0),
        )
        .unwrap();
        let y = unit_dot(h.layout());
        let mut dy = vec![ZERO; y.data.len()];
        h.apply(&y.data, &mut dy);
        for q in 0..m.len() {
            let expect = -I * m.couplings[q] * (m.occupations[q] + 1.0);
            assert!((dy[h.layout().first(q)] - expect).norm() < 1e-14);
            let expect_dagger = -I * m.couplings[q] * m.occupations[q];
            assert!((dy[h.layout().first(m.len() + q)] - expect_dagger).norm() < 1e-14);
        }
    }

    #[test]
    fn vacuum_stays_zero() {
        let m = modes(4.0, 16);
        let h = assemble_hierarchy(
            &m,
            &cavity(0.0, 65.0, 100.0),
            &ZplRates::from_uev(5.0, 55.0, 0.0),
        )
        .unwrap();
        let traj =
            propagate_one_time(&h, &HierarchyState::zeros(h.layout()), 2.0, 0.01, 50).unwrap();
        assert!(traj.last().iter().all(|v| *v == ZERO));
    }

    #[test]
    fn bare_cavity_decays_at_half_kappa() {
        let m = modes(0.0, 10);
        let cav = LorentzianCavity {
            detuning: 0.0,
            kappa: uev_to_rad_ps(65.0),
            coupling: 0.0,
        };
        let h = assemble_hierarchy(&m, &cav, &ZplRates::default()).unwrap();
        let mut y = HierarchyState::zeros(h.layout());
        y.set_singlet(PHOTON, C64::new(1.0, 0.0));
        let trace = regression_trace(&h, &y, PHOTON, 0.01, 20.0).unwrap();
        let end = trace.values.last().unwrap().norm();
        let rate = -end.ln() / trace.t_end();
        assert!((rate / (0.5 * cav.kappa) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn uncoupled_dot_matches_independent_boson_correlation() {
        let p = PhononBathParams::inas(4.0);
        let bath = PhononBath::new(p);
        let m = discretize_modes(&p, 60, mev_to_rad_ps(5.0)).unwrap();
        let zpl = ZplRates::from_uev(5.0, 55.0, 0.0);
        let h = assemble_hierarchy(&m, &cavity(0.0, 65.0, 0.0), &zpl).unwrap();
        let trace = regression_trace(&h, &unit_dot(h.layout()), EXCITON, 0.005, 10.0).unwrap();
        let mut worst: f64 = 0.0;
        for (t, v) in trace.times().zip(&trace.values) {
            let exact = (-0.5 * zpl.total() * t + bath.phi(t) - bath.phi0()).exp();
            worst = worst.max((v - exact).norm());
        }
        assert!(worst < 0.03, "max deviation {worst}");
    }

    #[test]
    fn resolvent_matches_transformed_trace() {
        let m = modes(4.0, 14);
        let cav = cavity(0.5, 400.0, 100.0);
        let h = assemble_hierarchy(&m, &cav, &ZplRates::from_uev(200.0, 200.0, 0.0)).unwrap();
        let y = unit_dot(h.layout());
        let grid = FrequencyGrid::from_mev(-1.5, 1.5, 31).unwrap();
        let direct = h
            .resolvent_spectra(&[(&y, EXCITON)], &grid)
            .unwrap()
            .remove(0);
        let trace = regression_trace(&h, &y, EXCITON, 0.002, 120.0).unwrap();
        let conj = CorrelationTrace::new(trace.dt, trace.values.iter().map(|v| v.conj()).collect())
            .unwrap();
        let mirrored =
            FrequencyGrid::new(-grid.point(grid.len() - 1), -grid.point(0), grid.len()).unwrap();
        let via_trace = half_fourier(&conj, &mirrored).unwrap();
        let top = direct.max_value();
        for (i, v) in direct.values.iter().enumerate() {
            let other = via_trace.values[grid.len() - 1 - i];
            assert!((v - other).abs() < 2e-3 * top, "{i}: {v} vs {other}");
        }
    }

    #[test]
    fn time_integral_matches_propagation() {
        let m = modes(4.0, 12);
        let cav = cavity(0.3, 600.0, 150.0);
        let pop = Hierarchy::new(
            &m,
            &cav,
            &ZplRates::from_uev(300.0, 100.0, 0.0),
            Sector::Population,
        )
        .unwrap();
        let mut y0 = HierarchyState::zeros(pop.layout());
        y0.set_singlet(EXCITON_EXCITON, C64::new(1.0, 0.0));
        let solved = pop.time_integral(&y0).unwrap();
        let dt = 0.002;
        let traj = propagate_one_time(&pop, &y0, 60.0, dt, 1).unwrap();
        let len = traj.states.len();
        let mut integral = vec![ZERO; y0.data.len()];
        for (k, s) in traj.states.iter().enumerate() {
            let w = if k == 0 || k == len - 1 { 0.5 * dt } else { dt };
            for (acc, v) in integral.iter_mut().zip(s) {
                *acc += v * w;
            }
        }
        let scale = solved.data.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let worst = solved
            .data
            .iter()
            .zip(&integral)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-4 * scale, "worst {worst} of {scale}");
    }

    #[test]
    fn population_moments_stay_hermitian() {
        let m = modes(4.0, 12);
        let pop = Hierarchy::new(
            &m,
            &cavity(-0.5, 100.0, 100.0),
            &ZplRates::from_uev(5.0, 55.0, 0.0),
            Sector::Population,
        )
        .unwrap();
        let mut y0 = HierarchyState::zeros(pop.layout());
        y0.set_singlet(EXCITON_EXCITON, C64::new(1.0, 0.0));
        let traj = propagate_one_time(&pop, &y0, 5.0, 0.005, 100).unwrap();
        let n = m.len();
        for data in &traj.states {
            let y = HierarchyState {
                layout: pop.layout(),
                data: data.clone(),
            };
            assert!(y.singlet(EXCITON_EXCITON).im.abs() < 1e-12);
            assert!((y.singlet(EXCITON_PHOTON) - y.singlet(PHOTON_EXCITON).conj()).norm() < 1e-12);
            for q in 0..n {
                assert!(
                    (y.raising(EXCITON_EXCITON, q) - y.lowering(EXCITON_EXCITON, q).conj()).norm()
                        < 1e-12
                );
                assert!(
                    (y.raising(PHOTON_EXCITON, q) - y.lowering(EXCITON_PHOTON, q).conj()).norm()
                        < 1e-12
                );
                for k in 0..n {
                    let mixed = y.pair(EXCITON_EXCITON, q, n + k);
                    assert!((mixed - y.pair(EXCITON_EXCITON, k, n + q).conj()).norm() < 1e-12);
                    let bb = y.pair(PHOTON_PHOTON, q, k);
                    assert!((y.pair(PHOTON_PHOTON, n + q, n + k) - bb.conj()).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn phonon_free_hierarchy_gives_symmetric_doublet() {
        let m = discretize_modes(
            &PhononBathParams::inas(4.0).without_coupling(),
            10,
            mev_to_rad_ps(5.0),
        )
        .unwrap();
        let cav = cavity(0.0, 65.0, 100.0);
        let grid = FrequencyGrid::from_mev(-0.3, 0.3, 601).unwrap();
        let s = two_time_spectrum(
            &m,
            &cav,
            &ZplRates::from_uev(5.0, 55.0, 0.0),
            InitialCondition::InvertedAtom,
            &grid,
        )
        .unwrap();
        let v = &s.coupled_mode.values;
        for i in 0..v.len() {
            assert!((v[i] - v[v.len() - 1 - i]).abs() < 1e-9);
        }
        let top = v.iter().cloned().fold(0.0, f64::max);
        assert!(v[300] < 0.9 * top);
    }

    #[test]
    fn pumped_and_inverted_seeds_agree() {
        let m = modes(4.0, 20);
        let cav = cavity(-1.0, 65.0, 100.0);
        let grid = FrequencyGrid::from_mev(-1.5, 0.5, 201).unwrap();
        let zpl = ZplRates::from_uev(5.0, 55.0, 0.1);
        let inv = two_time_spectrum(&m, &cav, &zpl, InitialCondition::InvertedAtom, &grid).unwrap();
        let pumped =
            two_time_spectrum(&m, &cav, &zpl, InitialCondition::SteadyPump, &grid).unwrap();
        let worst = inv
            .coupled_mode
            .values
            .iter()
            .zip(&pumped.coupled_mode.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(worst < 0.01, "{worst}");
    }

    #[test]
    fn relaxed_emission_has_red_sideband() {
        let m = modes(4.0, 60);
        let grid = FrequencyGrid::from_mev(-2.0, 2.0, 81).unwrap();
        let s = two_time_spectrum(
            &m,
            &cavity(0.0, 65.0, 0.0),
            &ZplRates::from_uev(5.0, 55.0, 0.0),
            InitialCondition::InvertedAtom,
            &grid,
        )
        .unwrap();
        let at = |mev: f64| s.polarization.interpolate(mev_to_rad_ps(mev));
        assert!(
            at(-0.8) > 1.5 * at(0.8),
            "red {} blue {}",
            at(-0.8),
            at(0.8)
        );
    }
}
