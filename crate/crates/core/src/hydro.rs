//! Brooks-Corey constitutive laws, the Kirchhoff transform and the two graph
//! parametrizations `tau -> (s(tau), u(tau))`.
//!
//! Normalization: `s(0) = 0` and `u(0) = 0`. Below the dry end of the graph
//! (`tau < 0`) both parametrizations are extended by `s = 0`, `u = tau`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// Which closed form to use for the Kirchhoff exponent `eta` and `u_b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EtaMode {
    /// `eta = beta + 3 + 1/beta`, `u_b = -p_b / (beta eta)`.
    Paper,
    /// `eta = 3 + 1/beta`, `u_b = -p_b / (3 beta + 1)`, obtained by integrating
    /// `lambda(S(p))` directly. Agrees with [`kirchhoff_quadrature`].
    #[default]
    Derived,
}

impl fmt::Display for EtaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EtaMode::Paper => "paper",
            EtaMode::Derived => "derived",
        })
    }
}

impl FromStr for EtaMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(EtaMode::Paper),
            "derived" => Ok(EtaMode::Derived),
            _ => Err(Error::Config(format!("unknown eta mode `{s}` (expected paper|derived)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrooksCorey {
    /// Entry pressure `p_b < 0`.
    pub entry_pressure: f64,
    /// Pore-size exponent `beta > 0`.
    pub beta: f64,
    pub eta_mode: EtaMode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    pub eta: f64,
    /// Kirchhoff value at saturation onset.
    pub u_b: f64,
    /// Branch switch of the tau-formulation.
    pub tau_star: f64,
    /// Smallest tau with `s(tau) = 1` in the tau-formulation.
    pub tau_sat: f64,
}

impl BrooksCorey {
    pub fn new(entry_pressure: f64, beta: f64, eta_mode: EtaMode) -> Result<Self> {
        if !(entry_pressure < 0.0) || !entry_pressure.is_finite() {
            return Err(Error::Config(format!("entry pressure must be negative, got {entry_pressure}")));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Config(format!("beta must be positive, got {beta}")));
        }
        Ok(BrooksCorey { entry_pressure, beta, eta_mode })
    }

    pub fn derive_params(&self) -> DerivedParams {
        let beta = self.beta;
        let eta = match self.eta_mode {
            EtaMode::Paper => beta + 3.0 + 1.0 / beta,
            EtaMode::Derived => 3.0 + 1.0 / beta,
        };
        let u_b = -self.entry_pressure / (beta * eta);
        let tau_star = (eta * u_b).powf(1.0 / (1.0 - eta)).min(1.0);
        let tau_sat = tau_star + u_b * (1.0 - tau_star.powf(eta));
        DerivedParams { eta, u_b, tau_star, tau_sat }
    }

    /// `S(p) = (p / p_b)^(-beta)` below the entry pressure, 1 above.
    pub fn saturation(&self, p: f64) -> f64 {
        if p >= self.entry_pressure {
            1.0
        } else {
            (p / self.entry_pressure).powf(-self.beta)
        }
    }

    pub fn mobility_exponent(&self) -> f64 {
        3.0 + 2.0 / self.beta
    }

    /// `lambda(s) = s^(3 + 2/beta)` on `s` clamped to `[0, 1]`.
    pub fn mobility(&self, s: f64) -> f64 {
        s.clamp(0.0, 1.0).powf(self.mobility_exponent())
    }

    /// Derivative of [`Self::mobility`]; zero outside `(0, 1)`.
    pub fn mobility_derivative(&self, s: f64) -> f64 {
        if s <= 0.0 || s >= 1.0 {
            0.0
        } else {
            let a = self.mobility_exponent();
            a * s.powf(a - 1.0)
        }
    }

    /// `sup |lambda'|` on `[0, 1]`.
    pub fn max_mobility_derivative(&self) -> f64 {
        self.mobility_exponent()
    }

    /// `S~(u) = (u / u_b)^(1/eta)` below `u_b`, 1 above, 0 for `u <= 0`.
    pub fn kirchhoff_saturation(&self, u: f64) -> f64 {
        let d = self.derive_params();
        if u <= 0.0 {
            0.0
        } else if u >= d.u_b {
            1.0
        } else {
            (u / d.u_b).powf(1.0 / d.eta)
        }
    }

    /// Right derivative of [`Self::kirchhoff_saturation`]; infinite at `u = 0`.
    pub fn kirchhoff_saturation_derivative(&self, u: f64) -> f64 {
        let d = self.derive_params();
        if u < 0.0 || u >= d.u_b {
            0.0
        } else if u == 0.0 {
            f64::INFINITY
        } else {
            (u / d.u_b).powf(1.0 / d.eta - 1.0) / (d.eta * d.u_b)
        }
    }

    /// Closed-form Kirchhoff transform `u(p)`.
    pub fn kirchhoff_of_pressure(&self, p: f64) -> f64 {
        let d = self.derive_params();
        if p >= self.entry_pressure {
            d.u_b + (p - self.entry_pressure)
        } else {
            d.u_b * self.saturation(p).powf(d.eta)
        }
    }
}

/// `u(p) = int_{-inf}^{p} lambda(S(a)) da` by adaptive quadrature, with a
/// relative accuracy of about `1e-12`.
pub fn kirchhoff_quadrature(model: &BrooksCorey, p: f64) -> Result<f64> {
    let pb = model.entry_pressure;
    let integrand = |a: f64| model.mobility(model.saturation(a));
    // a = q / (1 - t) maps t in [0, 1) onto (-inf, q]
    let tail = |q: f64| {
        quadrature::integrate(
            |t| {
                let one_minus = 1.0 - t;
                integrand(q / one_minus) * (-q) / (one_minus * one_minus)
            },
            0.0,
            1.0,
            1e-13,
            0.0,
        )
    };
    if p <= pb {
        tail(p)
    } else {
        Ok(tail(pb)? + quadrature::integrate(integrand, pb, p, 1e-13, 0.0)?)
    }
}

/// Compare both closed forms against [`kirchhoff_quadrature`] on log-spaced
/// pressures in `(1000 p_b, p_b)` and return the mode with the smaller
/// maximal relative error, together with both errors.
pub fn select_eta_mode(entry_pressure: f64, beta: f64) -> Result<(EtaMode, f64, f64)> {
    let mut worst = [0.0_f64; 2];
    for (slot, mode) in [EtaMode::Paper, EtaMode::Derived].into_iter().enumerate() {
        let model = BrooksCorey::new(entry_pressure, beta, mode)?;
        for p in log_spaced_pressures(entry_pressure, 20) {
            let q = kirchhoff_quadrature(&model, p)?;
            let c = model.kirchhoff_of_pressure(p);
            worst[slot] = worst[slot].max(((c - q) / q).abs());
        }
    }
    let mode = if worst[1] <= worst[0] { EtaMode::Derived } else { EtaMode::Paper };
    Ok((mode, worst[0], worst[1]))
}

/// `n` pressures log-spaced strictly inside `(1000 p_b, p_b)`.
pub fn log_spaced_pressures(entry_pressure: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let frac = (i as f64 + 0.5) / n as f64;
            entry_pressure * 10f64.powf(3.0 * frac)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Formulation {
    /// `u(tau) = tau`, `s(tau) = S~(tau)`: Newton in the Kirchhoff variable.
    #[serde(rename = "u")]
    Kirchhoff,
    /// `max(s', u') = 1`, `s(0) = 0`.
    #[serde(rename = "tau")]
    Tau,
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Formulation::Kirchhoff => "u",
            Formulation::Tau => "tau",
        })
    }
}

impl FromStr for Formulation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "u" | "kirchhoff" => Ok(Formulation::Kirchhoff),
            "tau" => Ok(Formulation::Tau),
            _ => Err(Error::Config(format!("unknown formulation `{s}` (expected tau|u)"))),
        }
    }
}

/// Values of a parametrization at one point, with right derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphPoint {
    pub s: f64,
    pub u: f64,
    pub ds: f64,
    pub du: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parametrization {
    pub kind: Formulation,
    pub model: BrooksCorey,
    pub params: DerivedParams,
}

impl Parametrization {
    /// Dry-limit pressure of the graph. Infinite for Brooks-Corey.
    pub const DRY_PRESSURE: f64 = f64::NEG_INFINITY;
    /// Kirchhoff value at the dry end of the graph.
    pub const DRY_KIRCHHOFF: f64 = 0.0;

    pub fn new(kind: Formulation, model: BrooksCorey) -> Self {
        Parametrization { kind, model, params: model.derive_params() }
    }

    /// Kirchhoff value at the branch switch of the tau-formulation.
    fn u_star(&self) -> f64 {
        self.params.u_b * self.params.tau_star.powf(self.params.eta)
    }

    pub fn eval(&self, tau: f64) -> GraphPoint {
        if tau < 0.0 {
            return GraphPoint { s: 0.0, u: tau, ds: 0.0, du: 1.0 };
        }
        let d = &self.params;
        match self.kind {
            Formulation::Kirchhoff => GraphPoint {
                s: self.model.kirchhoff_saturation(tau),
                u: tau,
                ds: self.model.kirchhoff_saturation_derivative(tau),
                du: 1.0,
            },
            Formulation::Tau if tau < d.tau_star => GraphPoint {
                s: tau,
                u: d.u_b * tau.powf(d.eta),
                ds: 1.0,
                du: d.eta * d.u_b * tau.powf(d.eta - 1.0),
            },
            Formulation::Tau => {
                let u = self.u_star() + (tau - d.tau_star);
                GraphPoint {
                    s: self.model.kirchhoff_saturation(u),
                    u,
                    ds: self.model.kirchhoff_saturation_derivative(u),
                    du: 1.0,
                }
            }
        }
    }

    pub fn saturation(&self, tau: f64) -> f64 {
        self.eval(tau).s
    }

    pub fn kirchhoff(&self, tau: f64) -> f64 {
        self.eval(tau).u
    }

    /// Pressure on the graph: `p_b s^(-1/beta)` while unsaturated,
    /// `p_b + u - u_b` once saturated.
    pub fn pressure(&self, tau: f64) -> f64 {
        let g = self.eval(tau);
        if g.s >= 1.0 {
            self.model.entry_pressure + g.u - self.params.u_b
        } else if g.s <= 0.0 {
            Self::DRY_PRESSURE
        } else {
            self.model.entry_pressure * g.s.powf(-1.0 / self.model.beta)
        }
    }

    /// Smallest `tau >= 0` with `s(tau) = s`.
    pub fn sat_inverse(&self, s: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::OutOfRange(format!("saturation {s} outside [0, 1]")));
        }
        let d = &self.params;
        Ok(match self.kind {
            Formulation::Kirchhoff => d.u_b * s.powf(d.eta),
            Formulation::Tau if s < d.tau_star => s,
            Formulation::Tau => d.tau_star + (d.u_b * s.powf(d.eta) - self.u_star()),
        })
    }

    /// `tau` with `p(tau) = p`.
    pub fn tau_of_pressure(&self, p: f64) -> f64 {
        let pb = self.model.entry_pressure;
        if p < pb {
            return self
                .sat_inverse(self.model.saturation(p))
                .expect("Brooks-Corey saturation lies in [0, 1]");
        }
        let u = self.params.u_b + (p - pb);
        match self.kind {
            Formulation::Kirchhoff => u,
            Formulation::Tau => self.params.tau_star + (u - self.u_star()),
        }
    }

    /// `int_0^tau s(a) da`, piecewise closed form.
    pub fn saturation_integral(&self, tau: f64) -> f64 {
        if tau <= 0.0 {
            return 0.0;
        }
        let d = &self.params;
        // int of (v / u_b)^(1/eta) dv from 0 to v
        let power = |v: f64| d.u_b * d.eta / (d.eta + 1.0) * (v / d.u_b).powf(1.0 + 1.0 / d.eta);
        match self.kind {
            Formulation::Kirchhoff => {
                if tau <= d.u_b {
                    power(tau)
                } else {
                    power(d.u_b) + (tau - d.u_b)
                }
            }
            Formulation::Tau => {
                let ts = d.tau_star;
                if tau <= ts {
                    return 0.5 * tau * tau;
                }
                let (u0, u) = (self.u_star(), self.kirchhoff(tau));
                let base = 0.5 * ts * ts - power(u0);
                if u <= d.u_b {
                    base + power(u)
                } else {
                    base + power(d.u_b) + (u - d.u_b)
                }
            }
        }
    }

    /// `xi(tau) = int_0^tau sqrt(u'(a)) da`, piecewise closed form.
    pub fn xi(&self, tau: f64) -> f64 {
        if tau <= 0.0 {
            return tau;
        }
        let d = &self.params;
        match self.kind {
            Formulation::Kirchhoff => tau,
            Formulation::Tau => {
                let half = 0.5 * (d.eta + 1.0);
                let lower = |t: f64| (d.eta * d.u_b).sqrt() * t.powf(half) / half;
                if tau < d.tau_star {
                    lower(tau)
                } else {
                    lower(d.tau_star) + (tau - d.tau_star)
                }
            }
        }
    }
}

/// `(min, max)` over the grid of `max(s'(tau), u'(tau))`.
pub fn check_nondegeneracy(param: &Parametrization, grid: &[f64]) -> (f64, f64) {
    grid.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| {
        let g = param.eval(t);
        let m = g.ds.max(g.du);
        (lo.min(m), hi.max(m))
    })
}
