//! Akaike information arithmetic and the EIT/ATS verdict.
//!
//! For a least-squares fit with `N` points and `K` parameters the information
//! is `I = N·ln(σ̂²) + 2K`. Akaike weights are the softmax of `−I/2`; per-point
//! weights apply the same softmax to `−I/(2N)`, which stays graded for noisy
//! data where the ordinary weights snap to 0 or 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitter::{fit, FitConfig, FitResult};
use crate::lineshape::Spectrum;
use crate::models::ModelKind;
use crate::par;

/// Relative floor on σ̂² (in units of the squared data scale) applied before the logarithm.
pub const SIGMA_SQ_FLOOR: f64 = 1e-30;

pub const DEFAULT_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "PascalCase")]
pub enum Verdict {
    Eit,
    Ats,
    Inconclusive,
}

/// Scores of one candidate model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelScore {
    pub model: ModelKind,
    /// `None` when the fit failed.
    pub fit: Option<FitResult>,
    pub fit_error: Option<String>,
    pub aic: Option<f64>,
    pub akaike_weight: f64,
    pub per_point_aic: Option<f64>,
    pub per_point_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub n_points: usize,
    /// EIT first, then ATS.
    pub models: Vec<ModelScore>,
    pub verdict: Verdict,
    pub inconclusive_margin: f64,
    /// Set when exactly one of the two fits failed.
    pub fit_failure: bool,
}

impl SelectionReport {
    pub fn score(&self, kind: ModelKind) -> &ModelScore {
        self.models
            .iter()
            .find(|m| m.model == kind)
            .expect("report holds both models")
    }

    /// `[w̄_EIT, w̄_ATS]`.
    pub fn per_point_pair(&self) -> [f64; 2] {
        [
            self.score(ModelKind::Eit).per_point_weight,
            self.score(ModelKind::Ats).per_point_weight,
        ]
    }

    /// `[w_EIT, w_ATS]`.
    pub fn akaike_pair(&self) -> [f64; 2] {
        [
            self.score(ModelKind::Eit).akaike_weight,
            self.score(ModelKind::Ats).akaike_weight,
        ]
    }
}

/// `max(ssr/n, floor · scale²)`, the variance estimate used inside the logarithm.
pub fn floored_sigma_sq(ssr: f64, n: usize, scale: f64) -> f64 {
    (ssr / n as f64).max(SIGMA_SQ_FLOOR * scale * scale).max(f64::MIN_POSITIVE)
}

/// `n·ln(ssr/n) + 2k`.
pub fn aic_least_squares(ssr: f64, n: usize, k: usize) -> f64 {
    let n_f = n as f64;
    n_f * (ssr / n_f).ln() + 2.0 * k as f64
}

fn softmax_neg_half(values: &[f64]) -> Vec<f64> {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let terms: Vec<f64> = values.iter().map(|v| (-(v - min) / 2.0).exp()).collect();
    let total: f64 = terms.iter().sum();
    terms.iter().map(|t| t / total).collect()
}

/// `w_i = exp(−I_i/2) / Σ_k exp(−I_k/2)`, evaluated with the minimum shifted out.
pub fn akaike_weights(aics: &[f64]) -> Vec<f64> {
    softmax_neg_half(aics)
}

/// Akaike weights of the per-point information `I_i / n`.
pub fn per_point_weights(aics: &[f64], n: usize) -> Vec<f64> {
    let per_point: Vec<f64> = aics.iter().map(|i| i / n as f64).collect();
    softmax_neg_half(&per_point)
}

/// Ω_EIT = (Γ_ab − Γ_bc)/2, the pump strength below which both dressed states
/// decay into a shared reservoir.
pub fn eit_threshold(gamma_ab: f64, gamma_bc: f64) -> Result<f64> {
    if !(gamma_bc >= 0.0) || !gamma_ab.is_finite() {
        return Err(Error::Domain(format!("invalid dephasing rates ({gamma_ab}, {gamma_bc})")));
    }
    if gamma_bc > gamma_ab {
        return Err(Error::Domain(format!(
            "gamma_bc = {gamma_bc} exceeds gamma_ab = {gamma_ab}; no shared-reservoir region"
        )));
    }
    Ok((gamma_ab - gamma_bc) / 2.0)
}

/// Ω_σ = √(2σΓ_abΓ_bc/(1−2σ)): below it the induced transparency is smaller
/// than twice the relative noise.
pub fn noise_threshold(gamma_ab: f64, gamma_bc: f64, sigma: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&sigma) {
        return Err(Error::Domain(format!("noise sigma must lie in [0, 0.5), got {sigma}")));
    }
    Ok((2.0 * sigma * gamma_ab * gamma_bc / (1.0 - 2.0 * sigma)).sqrt())
}

/// Larger per-point weight wins unless the two are within `margin` of each other.
pub fn verdict_from_weights(w_eit: f64, w_ats: f64, margin: f64) -> Verdict {
    if (w_eit - w_ats).abs() < margin {
        Verdict::Inconclusive
    } else if w_eit > w_ats {
        Verdict::Eit
    } else {
        Verdict::Ats
    }
}

/// Builds the report from the two fit outcomes (EIT, ATS).
pub fn assemble_report(
    data: &Spectrum,
    outcomes: [Result<FitResult>; 2],
    margin: f64,
) -> Result<SelectionReport> {
    let n = data.len();
    let scale = data.max_abs_value();
    let [eit, ats] = outcomes;
    let fits = [(ModelKind::Eit, eit), (ModelKind::Ats, ats)];

    if fits.iter().all(|(_, r)| r.is_err()) {
        let msg = fits
            .iter()
            .filter_map(|(k, r)| r.as_ref().err().map(|e| format!("{k}: {e}")))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::AllFitsFailed(msg));
    }

    let aics: Vec<Option<f64>> = fits
        .iter()
        .map(|(kind, r)| {
            r.as_ref().ok().map(|f| {
                let var = floored_sigma_sq(f.ssr, n, scale);
                aic_least_squares(var * n as f64, n, kind.n_params())
            })
        })
        .collect();
    let present: Vec<f64> = aics.iter().flatten().cloned().collect();
    let aw = akaike_weights(&present);
    let pw = per_point_weights(&present, n);

    let mut slot = 0;
    let mut models = Vec::with_capacity(2);
    for ((kind, r), aic) in fits.into_iter().zip(&aics) {
        let (akaike_weight, per_point_weight) = if aic.is_some() {
            slot += 1;
            (aw[slot - 1], pw[slot - 1])
        } else {
            (0.0, 0.0)
        };
        let (fit, fit_error) = match r {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        };
        models.push(ModelScore {
            model: kind,
            fit,
            fit_error,
            aic: *aic,
            akaike_weight,
            per_point_aic: aic.map(|i| i / n as f64),
            per_point_weight,
        });
    }

    let fit_failure = slot == 1;
    let verdict = if fit_failure {
        if aics[0].is_some() {
            Verdict::Eit
        } else {
            Verdict::Ats
        }
    } else {
        verdict_from_weights(models[0].per_point_weight, models[1].per_point_weight, margin)
    };

    Ok(SelectionReport {
        n_points: n,
        models,
        verdict,
        inconclusive_margin: margin,
        fit_failure,
    })
}

/// Fits both models to `data` and scores them.
pub fn discriminate(data: &Spectrum, cfg: &FitConfig, margin: f64) -> Result<SelectionReport> {
    if !(margin >= 0.0) {
        return Err(Error::InvalidParameter(format!("margin must be >= 0, got {margin}")));
    }
    let mut outcomes = par::map_indices(2, |i| fit(ModelKind::ALL[i], data, cfg)).into_iter();
    let eit = outcomes.next().expect("two outcomes");
    let ats = outcomes.next().expect("two outcomes");
    // invalid input is not a model-specific failure
    if let (Err(e), Err(_)) = (&eit, &ats) {
        if matches!(
            e,
            Error::DegenerateData | Error::InvalidSpectrum(_) | Error::InvalidParameter(_)
        ) {
            return Err(e.clone());
        }
    }
    assemble_report(data, [eit, ats], margin)
}
