//! Full time-local polaron master equation on a truncated dot-cavity space.
//!
//! Basis (exciton, photons): |g0⟩, |g1⟩, |e0⟩, |g2⟩, |e1⟩, |e2⟩. Density
//! matrices are vectorized column by column, so vec(AρB) = (Bᵀ ⊗ A) vec ρ.

use crate::error::{PolaronError, Result};
use crate::phonon_bath::PhononBath;
use crate::photonic_reservoir::{LorentzianCavity, PhotonReservoir};
use crate::reservoir_me::ZplRates;
use crate::units_numerics::{
    emission_transform, phonon_kernel_integral, CorrelationTrace, FrequencyGrid, Spectrum,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

pub const BASIS_DIM: usize = 6;
const STATES: [(usize, usize); BASIS_DIM] = [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (1, 2)];
const STEADY_RESIDUAL: f64 = 1e-10;

pub type DensityMatrix = DMatrix<Complex64>;
type Superoperator = DMatrix<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn index(exciton: usize, photons: usize) -> Option<usize> {
    STATES.iter().position(|&s| s == (exciton, photons))
}

/// Cavity annihilation operator a.
pub fn cavity_lowering() -> DMatrix<Complex64> {
    let mut a = DMatrix::zeros(BASIS_DIM, BASIS_DIM);
    for (col, &(e, n)) in STATES.iter().enumerate() {
        if n > 0 {
            if let Some(row) = index(e, n - 1) {
                a[(row, col)] = c((n as f64).sqrt());
            }
        }
    }
    a
}

/// Exciton lowering operator σ⁻.
pub fn exciton_lowering() -> DMatrix<Complex64> {
    let mut s = DMatrix::zeros(BASIS_DIM, BASIS_DIM);
    for (col, &(e, n)) in STATES.iter().enumerate() {
        if e == 1 {
            s[(index(0, n).expect("ground partner exists"), col)] = c(1.0);
        }
    }
    s
}

/// Lowering operator whose two-time correlation is requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator {
    Cavity,
    Exciton,
}

impl Operator {
    fn lowering(self) -> DMatrix<Complex64> {
        match self {
            Operator::Cavity => cavity_lowering(),
            Operator::Exciton => exciton_lowering(),
        }
    }
}

fn identity() -> DMatrix<Complex64> {
    DMatrix::identity(BASIS_DIM, BASIS_DIM)
}

fn left(a: &DMatrix<Complex64>) -> Superoperator {
    identity().kronecker(a)
}

fn right(b: &DMatrix<Complex64>) -> Superoperator {
    b.transpose().kronecker(&identity())
}

fn sandwich(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Superoperator {
    b.transpose().kronecker(a)
}

/// (rate/2) L(O), with L(O)ρ = 2OρO† − O†Oρ − ρO†O.
fn dissipator(op: &DMatrix<Complex64>, rate: f64) -> Superoperator {
    let od = op.adjoint();
    let n = &od * op;
    (sandwich(op, &od) * c(2.0) - left(&n) - right(&n)) * c(0.5 * rate)
}

fn vectorize(m: &DMatrix<Complex64>) -> DVector<Complex64> {
    DVector::from_column_slice(m.as_slice())
}

fn matricize(v: &DVector<Complex64>) -> DMatrix<Complex64> {
    DMatrix::from_column_slice(BASIS_DIM, BASIS_DIM, v.as_slice())
}

fn excitations(state: usize) -> isize {
    let (e, n) = STATES[state];
    (e + n) as isize
}

/// Vectorized indices of |i⟩⟨j| with one excitation fewer in i than in j.
fn lowering_sector() -> Vec<usize> {
    (0..BASIS_DIM * BASIS_DIM)
        .filter(|&k| excitations(k % BASIS_DIM) - excitations(k / BASIS_DIM) == -1)
        .collect()
}

/// Tr[A X] for X given in vectorized form.
fn trace_with(a: &DMatrix<Complex64>, x: &DVector<Complex64>) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..BASIS_DIM {
        for i in 0..BASIS_DIM {
            acc += a[(j, i)] * x[i + BASIS_DIM * j];
        }
    }
    acc
}

/// Generator dρ/dt = 𝓛ρ of the polaron master equation.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    pub matrix: Superoperator,
}

/// Assembles the full generator: coherent dressed Jaynes-Cummings part,
/// Lindblad losses and the Markovian phonon scattering term evaluated in
/// the eigenbasis of the dressed Hamiltonian.
pub fn build_liouvillian(
    cav: &LorentzianCavity,
    bath: &PhononBath,
    zpl: &ZplRates,
) -> Result<Liouvillian> {
    let a = cavity_lowering();
    let sm = exciton_lowering();
    let b = bath.mean_displacement();
    let dressed = c(b * cav.coupling);
    let hop = sm.adjoint() * &a;
    let h = a.adjoint() * &a * c(cav.detuning) + (&hop + hop.adjoint()) * dressed;

    let minus_i = Complex64::new(0.0, -1.0);
    let mut l = (left(&h) - right(&h)) * minus_i;
    l += dissipator(&a, cav.kappa);
    l += dissipator(&sm, zpl.radiative);
    l += dissipator(&(sm.adjoint() * &sm), zpl.dephasing);
    l += dissipator(&sm.adjoint(), zpl.pump);

    if bath.params().coupling_ps2 != 0.0 && cav.coupling != 0.0 {
        let g = c(cav.coupling);
        let even = (&hop + hop.adjoint()) * g;
        let odd = (&hop - hop.adjoint()) * (g * Complex64::new(0.0, 1.0));
        let eig = h.clone().symmetric_eigen();
        let v = eig.eigenvectors;
        let energies = eig.eigenvalues;
        let b2 = b * b;
        let mut cache: Vec<(f64, Complex64, Complex64)> = Vec::new();
        let mut transforms = |delta: f64| -> Result<(Complex64, Complex64)> {
            if let Some(&(_, ke, ko)) = cache.iter().find(|(d, _, _)| (d - delta).abs() < 1e-12) {
                return Ok((ke, ko));
            }
            let ke = phonon_kernel_integral(|t| (bath.phi(t).cosh() - 1.0) * b2, delta)?;
            let ko = phonon_kernel_integral(|t| bath.phi(t).sinh() * b2, delta)?;
            cache.push((delta, ke, ko));
            Ok((ke, ko))
        };
        let mut y_even = DMatrix::zeros(BASIS_DIM, BASIS_DIM);
        let mut y_odd = DMatrix::zeros(BASIS_DIM, BASIS_DIM);
        let xe = v.adjoint() * &even * &v;
        let xo = v.adjoint() * &odd * &v;
        for j in 0..BASIS_DIM {
            for k in 0..BASIS_DIM {
                if xe[(j, k)].norm() == 0.0 && xo[(j, k)].norm() == 0.0 {
                    continue;
                }
                let (ke, ko) = transforms(energies[j] - energies[k])?;
                y_even[(j, k)] = xe[(j, k)] * ke;
                y_odd[(j, k)] = xo[(j, k)] * ko;
            }
        }
        for (x, y) in [
            (even, &v * y_even * v.adjoint()),
            (odd, &v * y_odd * v.adjoint()),
        ] {
            // −([X, Yρ] + h.c.)
            let yd = y.adjoint();
            l -= left(&(&x * &y)) - sandwich(&y, &x) + right(&(&yd * &x)) - sandwich(&x, &yd);
        }
    }
    Ok(Liouvillian { matrix: l })
}

impl Liouvillian {
    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        matricize(&(&self.matrix * vectorize(rho)))
    }

    fn propagator(&self, dt: f64) -> Superoperator {
        (&self.matrix * c(dt)).exp()
    }

    /// Steady state reached by propagating from the vacuum with step
    /// doubling until ‖𝓛ρ‖ < 1e-10.
    pub fn steady_state(&self) -> Result<DensityMatrix> {
        let mut rho = DMatrix::zeros(BASIS_DIM, BASIS_DIM);
        rho[(0, 0)] = c(1.0);
        self.relax(rho)
    }

    fn relax(&self, rho: DensityMatrix) -> Result<DensityMatrix> {
        let mut step_len = 1.0;
        let mut step = self.propagator(step_len);
        let mut x = vectorize(&rho);
        let mut t = 0.0;
        let mut residual = f64::INFINITY;
        for _ in 0..48 {
            x = &step * &x;
            t += step_len;
            let mut m = matricize(&x);
            m = (&m + m.adjoint()) * c(0.5);
            let tr = m.trace();
            m /= tr;
            x = vectorize(&m);
            residual = (&self.matrix * &x).camax();
            if !residual.is_finite() {
                return Err(PolaronError::NonFiniteState { t_ps: t });
            }
            if residual < STEADY_RESIDUAL {
                return Ok(m);
            }
            step = &step * &step;
            step_len *= 2.0;
        }
        Err(PolaronError::NoSteadyState { residual, t_ps: t })
    }

    /// ⟨A(t_ss + τ) B(t_ss)⟩ on τ = 0, dt, …, t_end.
    pub fn two_time_correlation(
        &self,
        a: &DMatrix<Complex64>,
        b: &DMatrix<Complex64>,
        rho: &DensityMatrix,
        dt: f64,
        t_end: f64,
    ) -> Result<CorrelationTrace> {
        let step = self.propagator(dt);
        let n = (t_end / dt).round() as usize + 1;
        let mut x = vectorize(&(b * rho));
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            values.push(trace_with(a, &x));
            x = &step * &x;
        }
        CorrelationTrace::new(dt, values)
    }

    /// Re∫₀^∞ Tr[A e^{𝓛τ} X] e^{−iδτ} dτ = Re Tr[A (iδ − 𝓛)⁻¹ X].
    ///
    /// X must be a one-quantum coherence (ket one excitation below the
    /// bra). The generator conserves that difference, so the solve runs on
    /// this sector alone, where 𝓛 has no zero mode.
    fn resolvent_spectrum(
        &self,
        a: &DMatrix<Complex64>,
        x: &DMatrix<Complex64>,
        grid: &FrequencyGrid,
    ) -> Result<Spectrum> {
        let sector = lowering_sector();
        let n = sector.len();
        let block = DMatrix::from_fn(n, n, |i, j| self.matrix[(sector[i], sector[j])]);
        let xv = vectorize(x);
        let rhs = DVector::from_fn(n, |i, _| xv[sector[i]]);
        let weights = DVector::from_fn(n, |i, _| {
            let (row, col) = (sector[i] % BASIS_DIM, sector[i] / BASIS_DIM);
            a[(col, row)]
        });
        let values: Vec<Option<f64>> = grid
            .points()
            .into_par_iter()
            .map(|w| {
                let m = DMatrix::<Complex64>::identity(n, n) * Complex64::new(0.0, w) - &block;
                m.lu().solve(&rhs).map(|y| {
                    weights
                        .iter()
                        .zip(y.iter())
                        .map(|(p, q)| p * q)
                        .sum::<Complex64>()
                        .re
                })
            })
            .collect();
        let mut out = Vec::with_capacity(values.len());
        for (v, w) in values.into_iter().zip(grid.points()) {
            out.push(v.ok_or(PolaronError::SingularDenominator { omega: w })?);
        }
        Ok(Spectrum::new(grid.points(), out))
    }

    /// Steady-state spectrum of ⟨O†(t+τ)O(t)⟩, unnormalized.
    pub fn steady_spectrum(&self, op: Operator, grid: &FrequencyGrid) -> Result<Spectrum> {
        let rho = self.steady_state()?;
        let o = op.lowering();
        self.resolvent_spectrum(&o.adjoint(), &(&o * rho), grid)
    }

    /// Coupled-mode cavity spectrum from ⟨a†(t+τ)a(t)⟩, peak-normalized.
    pub fn coupled_mode_spectrum(&self, grid: &FrequencyGrid) -> Result<Spectrum> {
        Ok(self.steady_spectrum(Operator::Cavity, grid)?.normalized())
    }

    /// Lab-frame dot polarization spectrum: ⟨σ⁺(t+τ)σ⁻(t)⟩ e^{φ(τ)}.
    pub fn polarization_spectrum(
        &self,
        bath: &PhononBath,
        grid: &FrequencyGrid,
    ) -> Result<Spectrum> {
        const DT: f64 = 0.005;
        let rho = self.steady_state()?;
        let sm = exciton_lowering();
        let sp = sm.adjoint();
        let mut s = self.resolvent_spectrum(&sp, &(&sm * &rho), grid)?;
        if bath.params().coupling_ps2 == 0.0 {
            return Ok(s);
        }
        let t_end = sideband_window(bath);
        let corr = self.two_time_correlation(&sp, &sm, &rho, DT, t_end)?;
        let dressed: Vec<Complex64> = corr
            .times()
            .zip(&corr.values)
            .map(|(t, v)| v * (bath.phi(t).exp() - 1.0))
            .collect();
        let side = emission_transform(&CorrelationTrace::new(DT, dressed)?, grid)?;
        for (v, x) in s.values.iter_mut().zip(side.values) {
            *v += x;
        }
        Ok(s)
    }

    /// Dot polarization spectrum projected through the cavity propagator,
    /// peak-normalized.
    pub fn green_function_spectrum(
        &self,
        cav: &LorentzianCavity,
        bath: &PhononBath,
        grid: &FrequencyGrid,
    ) -> Result<Spectrum> {
        let s0 = self.polarization_spectrum(bath, grid)?;
        let reservoir = PhotonReservoir::Cavity(*cav);
        let values = s0
            .omega
            .iter()
            .zip(&s0.values)
            .map(|(&w, &v)| reservoir.propagator(w) * v)
            .collect();
        Ok(Spectrum::new(s0.omega, values).normalized())
    }

    /// Re∫₀^∞dt∫₀^∞dτ ⟨a†(t+τ)a(t)⟩ e^{−iδτ} starting from |e0⟩, peak-normalized.
    ///
    /// The t-integral of ρ(t) is accumulated exactly per step from the
    /// augmented exponential exp([[𝓛, 1], [0, 0]] h).
    pub fn inverted_atom_spectrum(&self, grid: &FrequencyGrid) -> Result<Spectrum> {
        const STEP: f64 = 1.0;
        const MAX_T: f64 = 1e5;
        let dim = BASIS_DIM * BASIS_DIM;
        let mut aug = DMatrix::<Complex64>::zeros(2 * dim, 2 * dim);
        aug.view_mut((0, 0), (dim, dim)).copy_from(&self.matrix);
        aug.view_mut((0, dim), (dim, dim)).fill_with_identity();
        let aug = (aug * c(STEP)).exp();
        let forward = aug.view((0, 0), (dim, dim)).into_owned();
        let integral = aug.view((0, dim), (dim, dim)).into_owned();

        let a = cavity_lowering();
        let mut rho = DMatrix::zeros(BASIS_DIM, BASIS_DIM);
        rho[(
            index(1, 0).expect("basis state"),
            index(1, 0).expect("basis state"),
        )] = c(1.0);
        let mut x = vectorize(&rho);
        let mut acc = DVector::<Complex64>::zeros(dim);
        let mut t = 0.0;
        loop {
            acc += &integral * &x;
            x = &forward * &x;
            t += STEP;
            let excited = (&a * matricize(&x)).camax();
            if excited < 1e-14 {
                break;
            }
            if t > MAX_T {
                return Err(PolaronError::NoSteadyState {
                    residual: excited,
                    t_ps: t,
                });
            }
        }
        let emitted = &a * matricize(&acc);
        Ok(self
            .resolvent_spectrum(&a.adjoint(), &emitted, grid)?
            .normalized())
    }
}

/// Delay after which |e^{φ} − 1| has fallen below 1e-10 of its start value.
fn sideband_window(bath: &PhononBath) -> f64 {
    const MAX_T: f64 = 300.0;
    let peak = (bath.phi(0.0).exp() - 1.0).norm();
    let mut t = 5.0;
    while t < MAX_T && (bath.phi(t).exp() - 1.0).norm() > 1e-10 * peak {
        t += 1.0;
    }
    t
}
