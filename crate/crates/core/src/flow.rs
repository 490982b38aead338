//! Trajectory integration with conservation monitoring.
//!
//! Fixed-step Stormer-Verlet (kick-drift-kick, separable fields only) and
//! RK4 take `N = ceil(T / h)` steps of exactly `T / N`; the adaptive method is
//! the Dormand-Prince 5(4) pair with standard step control.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{MonitorRecord, Observable, Separable, VectorField};
use crate::stencil::central_stencil;

/// Integration halts once two bodies come closer than this.
pub const SINGULARITY_GUARD: f64 = 1e-6;
/// Smallest admissible step relative to `max(1, |t|)`.
pub const MIN_STEP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    StormerVerlet,
    Rk4,
    Dopri5,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    /// `None` picks Stormer-Verlet for separable fields and DOPRI5 otherwise.
    #[serde(default)]
    pub method: Option<Method>,
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default)]
    pub rtol: Option<f64>,
    #[serde(default)]
    pub atol: Option<f64>,
    pub max_time: f64,
    /// Keep every `record_every`-th accepted step (the final state is always kept).
    #[serde(default = "one")]
    pub record_every: usize,
    /// Budget of attempted adaptive steps (default 5 000 000).
    #[serde(default)]
    pub max_steps: Option<usize>,
}

fn one() -> usize {
    1
}

const DEFAULT_RTOL: f64 = 1e-10;
const DEFAULT_ATOL: f64 = 1e-12;
const DEFAULT_MAX_STEPS: usize = 5_000_000;

impl IntegratorConfig {
    pub fn verlet(step: f64, max_time: f64) -> Self {
        Self::fixed(Method::StormerVerlet, step, max_time)
    }

    pub fn rk4(step: f64, max_time: f64) -> Self {
        Self::fixed(Method::Rk4, step, max_time)
    }

    fn fixed(method: Method, step: f64, max_time: f64) -> Self {
        Self {
            method: Some(method),
            step: Some(step),
            rtol: None,
            atol: None,
            max_time,
            record_every: 1,
            max_steps: None,
        }
    }

    pub fn dopri5(rtol: f64, atol: f64, max_time: f64) -> Self {
        Self {
            method: Some(Method::Dopri5),
            step: None,
            rtol: Some(rtol),
            atol: Some(atol),
            max_time,
            record_every: 1,
            max_steps: None,
        }
    }

    pub fn recording_every(mut self, k: usize) -> Self {
        self.record_every = k;
        self
    }

    pub fn with_max_steps(mut self, n: usize) -> Self {
        self.max_steps = Some(n);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: Option<f64>| match v {
            Some(x) if !(x.is_finite() && x > 0.0) => Err(Error::InvalidInput(format!(
                "{name} must be positive, got {x}"
            ))),
            _ => Ok(()),
        };
        positive("step", self.step)?;
        positive("rtol", self.rtol)?;
        positive("atol", self.atol)?;
        positive("max_time", Some(self.max_time))?;
        if self.max_steps == Some(0) {
            return Err(Error::InvalidInput("max_steps must be at least 1".into()));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidInput(
                "record_every must be at least 1".into(),
            ));
        }
        if matches!(self.method, Some(Method::StormerVerlet | Method::Rk4)) && self.step.is_none() {
            return Err(Error::InvalidInput("fixed-step methods need a step".into()));
        }
        Ok(())
    }

    fn resolve(&self, field: &dyn VectorField) -> Result<Scheme> {
        self.validate()?;
        let method = self.method.unwrap_or(match (field.separable(), self.step) {
            (Some(_), Some(_)) => Method::StormerVerlet,
            _ => Method::Dopri5,
        });
        Ok(match method {
            Method::StormerVerlet | Method::Rk4 => {
                let h = self.step.expect("validated");
                let n = ((self.max_time / h) - 1e-9).ceil().max(1.0) as usize;
                Scheme::Fixed { method, n }
            }
            Method::Dopri5 => Scheme::Adaptive {
                rtol: self.rtol.unwrap_or(DEFAULT_RTOL),
                atol: self.atol.unwrap_or(DEFAULT_ATOL),
                max_steps: self.max_steps.unwrap_or(DEFAULT_MAX_STEPS),
            },
        })
    }
}

#[derive(Debug, Clone, Copy)]
enum Scheme {
    Fixed {
        method: Method,
        n: usize,
    },
    Adaptive {
        rtol: f64,
        atol: f64,
        max_steps: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Halt {
    Singularity { t_last: f64, min_sep: f64 },
    StepUnderflow { t_last: f64, step: f64 },
    StepLimit { t_last: f64, steps: usize },
    EvaluationFailure { t_last: f64, message: String },
}

impl Halt {
    pub fn t_last(&self) -> f64 {
        match self {
            Halt::Singularity { t_last, .. }
            | Halt::StepUnderflow { t_last, .. }
            | Halt::StepLimit { t_last, .. }
            | Halt::EvaluationFailure { t_last, .. } => *t_last,
        }
    }

    fn into_error(self) -> Error {
        let t_last = self.t_last();
        let reason = match self {
            Halt::Singularity { min_sep, .. } => {
                format!("near collision (min separation {min_sep:e})")
            }
            Halt::StepUnderflow { step, .. } => format!("step size underflow ({step:e})"),
            Halt::StepLimit { steps, .. } => format!("step budget of {steps} exhausted"),
            Halt::EvaluationFailure { message, .. } => message,
        };
        Error::IntegrationHalted { t_last, reason }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// `X(z)` at each recorded state, for Hermite interpolation.
    pub rates: Vec<Vec<f64>>,
    pub monitors: Vec<MonitorRecord>,
    /// Present when integration stopped before `max_time`.
    pub halt: Option<Halt>,
}

impl Trajectory {
    fn new() -> Self {
        Self {
            times: Vec::new(),
            states: Vec::new(),
            rates: Vec::new(),
            monitors: Vec::new(),
            halt: None,
        }
    }

    fn push(&mut self, field: &dyn VectorField, t: f64, z: &[f64], rate: Vec<f64>) {
        self.times.push(t);
        self.states.push(z.to_vec());
        self.rates.push(rate);
        self.monitors.push(field.monitor(z));
    }

    /// Builds a trajectory from states computed elsewhere (e.g. a closed-form
    /// solution); rates and monitors are evaluated from `field`.
    pub fn from_states(
        field: &dyn VectorField,
        times: Vec<f64>,
        states: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if times.len() != states.len() || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "times must be strictly increasing, one per state".into(),
            ));
        }
        let mut traj = Self::new();
        for (t, z) in times.into_iter().zip(states) {
            let rate = field.eval(&z)?;
            traj.push(field, t, &z, rate);
        }
        Ok(traj)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("non-empty trajectory")
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("non-empty trajectory")
    }

    pub fn is_complete(&self) -> bool {
        self.halt.is_none()
    }

    /// Turns a halted run into an error.
    pub fn require_complete(self) -> Result<Self> {
        match self.halt {
            Some(h) => Err(h.into_error()),
            None => Ok(self),
        }
    }

    /// Cubic Hermite interpolation between recorded states.
    pub fn interpolate(&self, t: f64) -> Result<Vec<f64>> {
        if self.is_empty() || t < self.t_start() || t > self.t_end() {
            return Err(Error::InvalidInput(format!(
                "t = {t} outside the trajectory"
            )));
        }
        let i = match self.times.partition_point(|&s| s <= t) {
            0 => 0,
            k if k >= self.len() => return Ok(self.final_state().to_vec()),
            k => k - 1,
        };
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * s) * (1.0 - s).powi(2),
            s * (1.0 - s).powi(2),
            s * s * (3.0 - 2.0 * s),
            s * s * (s - 1.0),
        );
        Ok((0..self.dim())
            .map(|k| {
                h00 * self.states[i][k]
                    + h10 * h * self.rates[i][k]
                    + h01 * self.states[i + 1][k]
                    + h11 * h * self.rates[i + 1][k]
            })
            .collect())
    }

    fn monitor_series(&self, pick: impl Fn(&MonitorRecord) -> f64) -> Vec<f64> {
        self.monitors.iter().map(pick).collect()
    }

    /// `max |E(t) - E(0)| / |E(0)|`.
    pub fn energy_drift(&self) -> f64 {
        let e = self.monitor_series(|m| m.energy);
        relative_deviation(&e)
    }

    pub fn ang_mom_drift(&self) -> f64 {
        let l = self.monitor_series(|m| m.ang_mom);
        relative_deviation(&l)
    }

    /// `(max I - min I) / mean I` over the recorded states.
    pub fn inertia_rel_variation(&self) -> f64 {
        let i = self.monitor_series(|m| m.inertia);
        let (lo, hi) = i
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| {
                (l.min(x), h.max(x))
            });
        let mean = i.iter().sum::<f64>() / i.len() as f64;
        (hi - lo) / mean
    }

    /// One CSV row per recorded state, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.dim();
        let mut header = vec!["t".to_string()];
        if n.is_multiple_of(2) {
            header.extend((1..=n / 2).map(|i| format!("q{i}")));
            header.extend((1..=n / 2).map(|i| format!("p{i}")));
        } else {
            header.extend((1..=n).map(|i| format!("z{i}")));
        }
        header.extend(["energy", "ang_mom", "inertia", "min_sep"].map(String::from));
        writeln!(w, "{}", header.join(","))?;
        for ((t, z), m) in self.times.iter().zip(&self.states).zip(&self.monitors) {
            let mut row = vec![fmt17(*t)];
            row.extend(z.iter().map(|x| fmt17(*x)));
            row.extend([m.energy, m.ang_mom, m.inertia, m.min_sep].map(fmt17));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn relative_deviation(v: &[f64]) -> f64 {
    let Some(&v0) = v.first() else { return 0.0 };
    let dev = v.iter().fold(0.0f64, |m, x| m.max((x - v0).abs()));
    if v0 == 0.0 {
        dev
    } else {
        dev / v0.abs()
    }
}

fn guard(field: &dyn VectorField, z: &[f64]) -> Option<f64> {
    let sep = field.separable()?;
    let min_sep = sep.min_separation(&z[..z.len() / 2])?;
    (min_sep < SINGULARITY_GUARD).then_some(min_sep)
}

fn check_start(field: &dyn VectorField, z0: &[f64]) -> Result<()> {
    if field.dim() != z0.len() {
        return Err(Error::InvalidInput(format!(
            "state of length {}, field dimension {}",
            z0.len(),
            field.dim()
        )));
    }
    if let Some(min_sep) = guard(field, z0) {
        return Err(Halt::Singularity {
            t_last: 0.0,
            min_sep,
        }
        .into_error());
    }
    Ok(())
}

fn separable_rate(sep: &dyn Separable, z: &[f64], force: &[f64]) -> Vec<f64> {
    let mut r = sep.velocity(&z[z.len() / 2..]);
    r.extend_from_slice(force);
    r
}

/// Runs over the signed time span `span`, calling `record(t, z, rate, step_index)`
/// for the initial state and every accepted step.
fn run(
    field: &dyn VectorField,
    z0: &[f64],
    span: f64,
    scheme: Scheme,
    mut record: impl FnMut(f64, &[f64], Vec<f64>, bool),
) -> Result<Option<Halt>> {
    check_start(field, z0)?;
    let mut z = z0.to_vec();
    field.project(&mut z);
    let halt_on = |t: f64, e: Error| match e {
        Error::Singularity { separation, .. } => Halt::Singularity {
            t_last: t,
            min_sep: separation,
        },
        other => Halt::EvaluationFailure {
            t_last: t,
            message: other.to_string(),
        },
    };

    match scheme {
        Scheme::Fixed { method, n } => {
            let h = span / n as f64;
            let sep = match method {
                Method::StormerVerlet => Some(field.separable().ok_or_else(|| {
                    Error::Unsupported("Stormer-Verlet needs a separable field".into())
                })?),
                _ => None,
            };
            let half = z.len() / 2;
            let mut force = match sep {
                Some(s) => s.force(&z[..half])?,
                None => Vec::new(),
            };
            let mut rate = match sep {
                Some(s) => separable_rate(s, &z, &force),
                None => field.eval(&z)?,
            };
            record(0.0, &z, rate.clone(), n == 0);
            for step in 1..=n {
                let t_prev = (step - 1) as f64 * h;
                let t = if step == n { span } else { step as f64 * h };
                let mut zn = z.clone();
                let outcome = match sep {
                    Some(s) => verlet_step(s, &mut zn, &mut force, h)
                        .map(|_| separable_rate(s, &zn, &force)),
                    None => rk4_step(field, &mut zn, &rate, h).and_then(|_| field.eval(&zn)),
                };
                match outcome {
                    Ok(r) => {
                        if let Some(min_sep) = guard(field, &zn) {
                            return Ok(Some(Halt::Singularity {
                                t_last: t_prev,
                                min_sep,
                            }));
                        }
                        field.project(&mut zn);
                        z = zn;
                        rate = r;
                        record(t, &z, rate.clone(), step == n);
                    }
                    Err(e) => return Ok(Some(halt_on(t_prev, e))),
                }
            }
            Ok(None)
        }
        Scheme::Adaptive {
            rtol,
            atol,
            max_steps,
        } => {
            let dir = span.signum();
            let mut k1 = field.eval(&z)?;
            record(0.0, &z, k1.clone(), false);
            let mut t = 0.0;
            let mut h = dir * initial_step(field, &z, &k1, rtol, atol, span.abs())?;
            let mut rejected_last = false;
            let mut attempts = 0usize;
            while dir * (span - t) > 0.0 {
                if attempts == max_steps {
                    return Ok(Some(Halt::StepLimit {
                        t_last: t,
                        steps: attempts,
                    }));
                }
                attempts += 1;
                let last = dir * (t + h - span) >= 0.0;
                if last {
                    h = span - t;
                }
                if h.abs() < MIN_STEP * t.abs().max(1.0) && !last {
                    return Ok(Some(Halt::StepUnderflow {
                        t_last: t,
                        step: h.abs(),
                    }));
                }
                let attempt = dopri_step(field, &z, &k1, h, rtol, atol);
                let (zn, k7, err) = match attempt {
                    Ok(v) => v,
                    Err(e @ Error::Singularity { .. }) => return Ok(Some(halt_on(t, e))),
                    Err(_) => (z.clone(), k1.clone(), f64::INFINITY),
                };
                if err <= 1.0 {
                    if let Some(min_sep) = guard(field, &zn) {
                        return Ok(Some(Halt::Singularity { t_last: t, min_sep }));
                    }
                    t = if last { span } else { t + h };
                    z = zn;
                    field.project(&mut z);
                    k1 = k7;
                    record(t, &z, k1.clone(), last);
                    let fac = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    h *= if rejected_last { fac.min(1.0) } else { fac };
                    rejected_last = false;
                } else {
                    let fac = if err.is_finite() {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 1.0)
                    } else {
                        0.2
                    };
                    h *= fac;
                    rejected_last = true;
                    if h.abs() < MIN_STEP * t.abs().max(1.0) {
                        return Ok(Some(Halt::StepUnderflow {
                            t_last: t,
                            step: h.abs(),
                        }));
                    }
                }
            }
            Ok(None)
        }
    }
}

fn verlet_step(sep: &dyn Separable, z: &mut [f64], force: &mut Vec<f64>, h: f64) -> Result<()> {
    let half = z.len() / 2;
    let (q, p) = z.split_at_mut(half);
    for (pi, fi) in p.iter_mut().zip(force.iter()) {
        *pi += 0.5 * h * fi;
    }
    for (qi, vi) in q.iter_mut().zip(sep.velocity(p)) {
        *qi += h * vi;
    }
    *force = sep.force(q)?;
    for (pi, fi) in p.iter_mut().zip(force.iter()) {
        *pi += 0.5 * h * fi;
    }
    Ok(())
}

fn axpy(z: &[f64], terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = z.to_vec();
    for (c, k) in terms {
        for (o, ki) in out.iter_mut().zip(k.iter()) {
            *o += c * ki;
        }
    }
    out
}

fn rk4_step(field: &dyn VectorField, z: &mut [f64], k1: &[f64], h: f64) -> Result<()> {
    let k2 = field.eval(&axpy(z, &[(0.5 * h, k1)]))?;
    let k3 = field.eval(&axpy(z, &[(0.5 * h, &k2)]))?;
    let k4 = field.eval(&axpy(z, &[(h, &k3)]))?;
    for i in 0..z.len() {
        z[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(())
}

fn error_norm(err: &[f64], y0: &[f64], y1: &[f64], rtol: f64, atol: f64) -> f64 {
    let n = err.len() as f64;
    (err.iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| (e / (atol + rtol * a.abs().max(b.abs()))).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
}

fn initial_step(
    field: &dyn VectorField,
    z: &[f64],
    f0: &[f64],
    rtol: f64,
    atol: f64,
    span: f64,
) -> Result<f64> {
    let sc: Vec<f64> = z.iter().map(|x| atol + rtol * x.abs()).collect();
    let rms = |v: &[f64]| {
        (v.iter().zip(&sc).map(|(x, s)| (x / s).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
    };
    let (d0, d1) = (rms(z), rms(f0));
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(span);
    let f1 = field.eval(&axpy(z, &[(h0, f0)]))?;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).min(span))
}

/// One Dormand-Prince step; returns the new state, its rate (FSAL) and the
/// scaled error norm.
fn dopri_step(
    field: &dyn VectorField,
    z: &[f64],
    k1: &[f64],
    h: f64,
    rtol: f64,
    atol: f64,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let k2 = field.eval(&axpy(z, &[(h / 5.0, k1)]))?;
    let k3 = field.eval(&axpy(z, &[(h * 3.0 / 40.0, k1), (h * 9.0 / 40.0, &k2)]))?;
    let k4 = field.eval(&axpy(
        z,
        &[
            (h * 44.0 / 45.0, k1),
            (h * -56.0 / 15.0, &k2),
            (h * 32.0 / 9.0, &k3),
        ],
    ))?;
    let k5 = field.eval(&axpy(
        z,
        &[
            (h * 19372.0 / 6561.0, k1),
            (h * -25360.0 / 2187.0, &k2),
            (h * 64448.0 / 6561.0, &k3),
            (h * -212.0 / 729.0, &k4),
        ],
    ))?;
    let k6 = field.eval(&axpy(
        z,
        &[
            (h * 9017.0 / 3168.0, k1),
            (h * -355.0 / 33.0, &k2),
            (h * 46732.0 / 5247.0, &k3),
            (h * 49.0 / 176.0, &k4),
            (h * -5103.0 / 18656.0, &k5),
        ],
    ))?;
    let zn = axpy(
        z,
        &[
            (h * 35.0 / 384.0, k1),
            (h * 500.0 / 1113.0, &k3),
            (h * 125.0 / 192.0, &k4),
            (h * -2187.0 / 6784.0, &k5),
            (h * 11.0 / 84.0, &k6),
        ],
    );
    let k7 = field.eval(&zn)?;
    let err: Vec<f64> = (0..z.len())
        .map(|i| {
            h * (71.0 / 57600.0 * k1[i] - 71.0 / 16695.0 * k3[i] + 71.0 / 1920.0 * k4[i]
                - 17253.0 / 339200.0 * k5[i]
                + 22.0 / 525.0 * k6[i]
                - 1.0 / 40.0 * k7[i])
        })
        .collect();
    let e = error_norm(&err, z, &zn, rtol, atol);
    if !zn.iter().all(|x| x.is_finite()) {
        return Ok((zn, k7, f64::INFINITY));
    }
    Ok((zn, k7, e))
}

/// Integrates `X` from `z0` over `[0, max_time]`. A run that approaches a
/// collision or underflows its step returns the partial trajectory with
/// [`Trajectory::halt`] set.
pub fn integrate(
    field: &dyn VectorField,
    z0: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let scheme = cfg.resolve(field)?;
    let mut traj = Trajectory::new();
    let mut count = 0usize;
    let every = cfg.record_every;
    let halt = run(field, z0, cfg.max_time, scheme, |t, z, rate, last| {
        if count.is_multiple_of(every) || last {
            traj.push(field, t, z, rate);
        }
        count += 1;
    })?;
    traj.halt = halt;
    Ok(traj)
}

/// Final state after the signed span `span`.
pub fn advance(
    field: &dyn VectorField,
    z0: &[f64],
    span: f64,
    cfg: &IntegratorConfig,
) -> Result<Vec<f64>> {
    if span == 0.0 {
        return Ok(z0.to_vec());
    }
    let cfg = IntegratorConfig {
        max_time: span.abs(),
        ..cfg.clone()
    };
    let scheme = cfg.resolve(field)?;
    let mut out = z0.to_vec();
    let halt = run(field, z0, span, scheme, |_, z, _, _| out.copy_from_slice(z))?;
    match halt {
        Some(h) => Err(h.into_error()),
        None => Ok(out),
    }
}

/// `|z(T -> 0) - z0|` after integrating forward to `max_time` and back.
pub fn reverse_check(field: &dyn VectorField, z0: &[f64], cfg: &IntegratorConfig) -> Result<f64> {
    let forward = advance(field, z0, cfg.max_time, cfg)?;
    let back = advance(field, &forward, -cfg.max_time, cfg)?;
    Ok(back
        .iter()
        .zip(z0)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeProbe {
    /// Estimates of `d^k/dt^k F(gamma(t))` at `t0`, `k = 1..=k_max`.
    pub derivatives: Vec<f64>,
    pub errors: Vec<f64>,
    /// Grid spacing used for each order.
    pub spacings: Vec<f64>,
}

const PROBE_TOL: f64 = 1e-13;
const PROBE_LEVELS: usize = 12;
// Per grid step; grids that need more run into a singularity.
const PROBE_MAX_STEPS: usize = 20_000;

/// Finite-difference estimates of the time derivatives of `F` along the
/// solution through `traj` at `t0`.
///
/// The solution is re-integrated with tight tolerances onto uniform grids
/// around `t0`; each order uses a wide central stencil, and the grid spacing
/// is halved until successive estimates stop improving.
pub fn derivative_probe(
    f: &dyn Observable,
    field: &dyn VectorField,
    traj: &Trajectory,
    t0: f64,
    k_max: usize,
) -> Result<DerivativeProbe> {
    if k_max == 0 {
        return Err(Error::InvalidInput("k_max must be at least 1".into()));
    }
    if traj.is_empty() || t0 < traj.t_start() || t0 > traj.t_end() {
        return Err(Error::InsufficientSamples(format!(
            "t0 = {t0} is not covered by the trajectory"
        )));
    }
    let i = traj.times.partition_point(|&s| s <= t0).saturating_sub(1);
    let tight = IntegratorConfig::dopri5(PROBE_TOL, PROBE_TOL, 1.0);
    let z0 = advance(field, &traj.states[i], t0 - traj.times[i], &tight)?;
    probe_at(f, field, &z0, k_max)
}

/// As [`derivative_probe`], starting directly from a phase point.
pub fn probe_at(
    f: &dyn Observable,
    field: &dyn VectorField,
    z0: &[f64],
    k_max: usize,
) -> Result<DerivativeProbe> {
    let radius = k_max + 4;
    let tight = IntegratorConfig::dopri5(PROBE_TOL, PROBE_TOL, 1.0).with_max_steps(PROBE_MAX_STEPS);
    let speed = field.eval(z0)?.iter().map(|x| x * x).sum::<f64>().sqrt();
    let s0 = 0.5 / (1.0 + speed) / radius as f64 * 4.0;

    // values[level][offset + radius]
    let mut levels: Vec<Option<Vec<f64>>> = Vec::with_capacity(PROBE_LEVELS);
    for level in 0..PROBE_LEVELS {
        let s = s0 / f64::powi(2.0, level as i32);
        let sample = || -> Result<Vec<f64>> {
            let mut vals = vec![0.0; 2 * radius + 1];
            vals[radius] = f.value(z0)?;
            for dir in [1.0, -1.0] {
                let mut z = z0.to_vec();
                for j in 1..=radius {
                    z = advance(field, &z, dir * s, &tight)?;
                    let idx = (radius as i64 + dir as i64 * j as i64) as usize;
                    vals[idx] = f.value(&z)?;
                }
            }
            Ok(vals)
        };
        levels.push(sample().ok());
    }

    let mut out = DerivativeProbe {
        derivatives: Vec::with_capacity(k_max),
        errors: Vec::with_capacity(k_max),
        spacings: Vec::with_capacity(k_max),
    };
    for k in 1..=k_max {
        let stencil = central_stencil(k, radius);
        let estimates: Vec<Option<f64>> = levels
            .iter()
            .enumerate()
            .map(|(level, vals)| {
                let vals = vals.as_ref()?;
                let s = s0 / f64::powi(2.0, level as i32);
                let acc: f64 = stencil
                    .iter()
                    .map(|&(o, w)| w * vals[(radius as i64 + o) as usize])
                    .sum();
                Some(acc / s.powi(k as i32))
            })
            .collect();
        let mut best: Option<(f64, f64, f64)> = None;
        for level in 0..PROBE_LEVELS - 1 {
            if let (Some(a), Some(b)) = (estimates[level], estimates[level + 1]) {
                let err = (a - b).abs();
                if best.is_none_or(|(_, e, _)| err < e) {
                    best = Some((b, err, s0 / f64::powi(2.0, level as i32 + 1)));
                }
            }
        }
        let (d, e, s) = best.ok_or_else(|| {
            Error::InsufficientSamples("re-integration failed on every probe grid".into())
        })?;
        out.derivatives.push(d);
        out.errors.push(e);
        out.spacings.push(s);
    }
    Ok(out)
}
