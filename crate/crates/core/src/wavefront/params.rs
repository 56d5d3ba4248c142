//! Ray spacing from the error budget.

use core::fmt;

use crate::fmath;
use crate::mesh::MeshStats;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Mode {
    /// δ from the worst-case bound; only representable for tiny meshes.
    Strict,
    /// δ = ε / (2 n µ η), validated against the oracle rather than proven.
    Practical,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiscretizationParams {
    pub epsilon: f64,
    /// Angular spacing of rays at a vertex or critical source (radians).
    pub delta: f64,
    /// Spacing of rays along a critical segment (length).
    pub sigma: f64,
    pub eps_prime: f64,
    pub eta: f64,
    pub mode: Mode,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParamsError {
    InvalidEpsilon(f64),
    /// The strict spacing is below the smallest normal double.
    Underflow { log2_delta: f64 },
}

impl fmt::Display for ParamsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamsError::InvalidEpsilon(e) => write!(f, "epsilon must lie in (0, 1], got {e}"),
            ParamsError::Underflow { log2_delta } => write!(
                f,
                "strict ray spacing underflows (log2 delta = {log2_delta:.1}); use practical mode"
            ),
        }
    }
}

impl core::error::Error for ParamsError {}

/// η = 1 + 1/cos θ_cm.
pub fn eta(stats: &MeshStats) -> f64 {
    1.0 + 1.0 / fmath::cos(stats.theta_cm)
}

/// ε′ = min(ε / (n³ µ η), l_min / (4 n w_max l_max)).
pub fn eps_prime(stats: &MeshStats, epsilon: f64) -> f64 {
    let n = stats.n as f64;
    let a = epsilon / (n * n * n * stats.mu * eta(stats));
    let b = stats.l_min / (4.0 * n * stats.w_max * stats.l_max);
    a.min(b)
}

pub fn compute_params(stats: &MeshStats, epsilon: f64, mode: Mode) -> Result<DiscretizationParams, ParamsError> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(ParamsError::InvalidEpsilon(epsilon));
    }
    let eta = eta(stats);
    let ep = eps_prime(stats, epsilon);
    let delta = match mode {
        Mode::Practical => epsilon / (2.0 * stats.n as f64 * stats.mu * eta),
        Mode::Strict => strict_delta(ep, stats.n, stats.mu)?,
    };
    Ok(DiscretizationParams { epsilon, delta, sigma: ep, eps_prime: ep, eta, mode })
}

/// (ε′)^{n²} · ε′ / (2µ), correctly rounded (evaluated in double-double).
pub fn strict_delta(eps_prime: f64, n: usize, mu: f64) -> Result<f64, ParamsError> {
    let e = (n * n + 1) as u64;
    let log2_delta = e as f64 * fmath::log2(eps_prime) - fmath::log2(2.0 * mu);
    // stay clear of the subnormal range; the exact result must be a normal double
    if !(log2_delta > -1021.0) {
        return Err(ParamsError::Underflow { log2_delta });
    }
    // scale to keep intermediate powers normal
    let (m, k) = frexp(eps_prime);
    let p = dd_pow(Dd::from(m), e);
    let q = p.div(2.0 * mu);
    let v = ldexp(q.hi + q.lo, k * e as i32);
    if v == 0.0 || !v.is_normal() {
        return Err(ParamsError::Underflow { log2_delta });
    }
    Ok(v)
}

fn frexp(x: f64) -> (f64, i32) {
    let (m, e) = libm::frexp(x);
    (m, e)
}

fn ldexp(x: f64, e: i32) -> f64 {
    libm::ldexp(x, e)
}

/// Unevaluated sum hi + lo.
#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, libm::fma(a, b, -p))
}

impl Dd {
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = two_sum(p, e);
        Dd { hi, lo }
    }

    fn div(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        let (p, e) = two_prod(q1, d);
        let r = (self.hi - p - e) + self.lo;
        let q2 = r / d;
        let (hi, lo) = two_sum(q1, q2);
        Dd { hi, lo }
    }
}

fn dd_pow(mut b: Dd, mut e: u64) -> Dd {
    let mut acc = Dd::from(1.0);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul(b);
        }
        b = b.mul(b);
        e >>= 1;
    }
    acc
}
