//! The two competing lineshapes.
//!
//! * EIT: a broad positive and a narrow negative Lorentzian, both centred at
//!   zero detuning, `C₊²/(γ₊²+δ²) − C₋²/(γ₋²+δ²)`.
//! * ATS: two equal-width positive Lorentzians at `±δ₀`,
//!   `C²[1/(γ²+(δ−δ₀)²) + 1/(γ²+(δ+δ₀)²)]`.
//!
//! Amplitudes and widths only enter squared, so the fitter works on an
//! unconstrained raw vector and [`ModelParams::from_raw`] folds it back into
//! canonical (non-negative) form.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ModelKind {
    Eit,
    Ats,
}

impl ModelKind {
    pub const ALL: [ModelKind; 2] = [ModelKind::Eit, ModelKind::Ats];

    /// Number of fitted parameters K.
    pub const fn n_params(self) -> usize {
        match self {
            ModelKind::Eit => 4,
            ModelKind::Ats => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Eit => "EIT",
            ModelKind::Ats => "ATS",
        }
    }

    /// Model value for a raw parameter vector of length [`Self::n_params`].
    #[inline]
    pub fn eval(self, p: &[f64], delta: f64) -> f64 {
        match self {
            ModelKind::Eit => eit_raw(p, delta),
            ModelKind::Ats => ats_raw(p, delta),
        }
    }

    /// Writes ∂(model)/∂p_k into `out`.
    #[inline]
    pub fn gradient(self, p: &[f64], delta: f64, out: &mut [f64]) {
        match self {
            ModelKind::Eit => {
                let (cp, cm, gp, gm) = (p[0], p[1], p[2], p[3]);
                let lp = 1.0 / (gp * gp + delta * delta);
                let lm = 1.0 / (gm * gm + delta * delta);
                out[0] = 2.0 * cp * lp;
                out[1] = -2.0 * cm * lm;
                out[2] = -2.0 * cp * cp * gp * lp * lp;
                out[3] = 2.0 * cm * cm * gm * lm * lm;
            }
            ModelKind::Ats => {
                let (c, g, d0) = (p[0], p[1], p[2]);
                let (lo, hi) = (delta - d0, delta + d0);
                let l1 = 1.0 / (g * g + lo * lo);
                let l2 = 1.0 / (g * g + hi * hi);
                out[0] = 2.0 * c * (l1 + l2);
                out[1] = -2.0 * c * c * g * (l1 * l1 + l2 * l2);
                out[2] = 2.0 * c * c * (lo * l1 * l1 - hi * l2 * l2);
            }
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EitParams {
    pub c_plus: f64,
    pub c_minus: f64,
    pub g_plus: f64,
    pub g_minus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtsParams {
    pub c: f64,
    pub g: f64,
    pub d0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "UPPERCASE")]
pub enum ModelParams {
    Eit(EitParams),
    Ats(AtsParams),
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Eit(_) => ModelKind::Eit,
            ModelParams::Ats(_) => ModelKind::Ats,
        }
    }

    /// Canonical parameters from a raw fit vector: every entry enters squared
    /// (or, for δ₀, symmetrically) so absolute values describe the same curve.
    pub fn from_raw(kind: ModelKind, raw: &[f64]) -> Self {
        match kind {
            ModelKind::Eit => ModelParams::Eit(EitParams {
                c_plus: raw[0].abs(),
                c_minus: raw[1].abs(),
                g_plus: raw[2].abs(),
                g_minus: raw[3].abs(),
            }),
            ModelKind::Ats => ModelParams::Ats(AtsParams {
                c: raw[0].abs(),
                g: raw[1].abs(),
                d0: raw[2].abs(),
            }),
        }
    }

    pub fn to_raw(&self) -> Vec<f64> {
        match *self {
            ModelParams::Eit(m) => vec![m.c_plus, m.c_minus, m.g_plus, m.g_minus],
            ModelParams::Ats(m) => vec![m.c, m.g, m.d0],
        }
    }

    pub fn eval(&self, delta: f64) -> f64 {
        match self {
            ModelParams::Eit(m) => eval_eit(m, delta),
            ModelParams::Ats(m) => eval_ats(m, delta),
        }
    }
}

fn eit_raw(p: &[f64], delta: f64) -> f64 {
    let d2 = delta * delta;
    p[0] * p[0] / (p[2] * p[2] + d2) - p[1] * p[1] / (p[3] * p[3] + d2)
}

fn ats_raw(p: &[f64], delta: f64) -> f64 {
    let g2 = p[1] * p[1];
    let lo = delta - p[2];
    let hi = delta + p[2];
    p[0] * p[0] * (1.0 / (g2 + lo * lo) + 1.0 / (g2 + hi * hi))
}

pub fn eval_eit(m: &EitParams, delta: f64) -> f64 {
    eit_raw(&[m.c_plus, m.c_minus, m.g_plus, m.g_minus], delta)
}

pub fn eval_ats(m: &AtsParams, delta: f64) -> f64 {
    ats_raw(&[m.c, m.g, m.d0], delta)
}

/// Analytic gradient of the model value with respect to its parameters.
pub fn jacobian(params: &ModelParams, delta: f64) -> Vec<f64> {
    let raw = params.to_raw();
    let mut out = vec![0.0; raw.len()];
    params.kind().gradient(&raw, delta, &mut out);
    out
}
