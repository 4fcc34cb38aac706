use crate::error::{PolaronError, Result};
use num_complex::Complex64;

/// Fixed-step classic Runge-Kutta integrator with reusable scratch buffers.
///
/// The right-hand side writes dy/dt into its last argument.
pub struct Rk4 {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); dim];
        Self {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }

    pub fn step<F>(&mut self, rhs: &mut F, t: f64, dt: f64, y: &mut [Complex64])
    where
        F: FnMut(f64, &[Complex64], &mut [Complex64]),
    {
        let half = 0.5 * dt;
        rhs(t, y, &mut self.k1);
        for ((tmp, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k1) {
            *tmp = y + k * half;
        }
        rhs(t + half, &self.tmp, &mut self.k2);
        for ((tmp, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k2) {
            *tmp = y + k * half;
        }
        rhs(t + half, &self.tmp, &mut self.k3);
        for ((tmp, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k3) {
            *tmp = y + k * dt;
        }
        rhs(t + dt, &self.tmp, &mut self.k4);
        let sixth = dt / 6.0;
        for (i, y) in y.iter_mut().enumerate() {
            *y += (self.k1[i] + (self.k2[i] + self.k3[i]) * 2.0 + self.k4[i]) * sixth;
        }
    }
}

/// Sampled solution of an ODE.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<Complex64>>,
}

impl Trajectory {
    pub fn last(&self) -> &[Complex64] {
        self.states
            .last()
            .expect("trajectory holds the initial state")
    }
}

/// Integrates from t = 0 to `t_end` with step `dt`, recording the state every
/// `record_every` steps (and always at the start and end).
pub fn integrate_ode<F>(
    mut rhs: F,
    y0: &[Complex64],
    t_end: f64,
    dt: f64,
    record_every: usize,
) -> Result<Trajectory>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    if !(dt > 0.0) {
        return Err(PolaronError::InvalidParameter {
            name: "dt",
            value: dt,
        });
    }
    if !(t_end >= dt) {
        return Err(PolaronError::InvalidParameter {
            name: "t_end",
            value: t_end,
        });
    }
    let steps = (t_end / dt).round() as usize;
    let every = record_every.max(1);
    let mut rk = Rk4::new(y0.len());
    let mut y = y0.to_vec();
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![y.clone()],
    };
    for s in 0..steps {
        let t = s as f64 * dt;
        rk.step(&mut rhs, t, dt, &mut y);
        if y.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(PolaronError::NonFiniteState { t_ps: t + dt });
        }
        if (s + 1) % every == 0 || s + 1 == steps {
            traj.times.push((s + 1) as f64 * dt);
            traj.states.push(y.clone());
        }
    }
    Ok(traj)
}
