//! Analytic spectra of the resonantly probed Λ three-level atom and of the
//! superconducting-circuit transmission line.
//!
//! The steady-state probe coherence to linear order in the probe field is
//!
//! ```text
//! σ_ab(δ) = α / [δ + Δ − iΓ_ab − Ω² / (δ − iΓ_bc)]
//! ```
//!
//! and the absorption is taken to be `A(δ) = Im σ_ab(δ)` (unit proportionality
//! constant). The same response can be resummed over its two complex poles
//! `δ±` with strengths `S±`, the "decaying dressed states".

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Physical parameters of the Λ atom. All rates share one unit system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TlaParams {
    /// Probe Rabi frequency.
    pub alpha: f64,
    /// Pump Rabi frequency Ω.
    pub omega: f64,
    /// One-photon detuning Δ.
    pub delta1: f64,
    pub gamma_ab: f64,
    pub gamma_bc: f64,
}

impl TlaParams {
    /// Resonantly pumped atom (`Δ = 0`) with unit probe strength.
    pub fn resonant(omega: f64, gamma_ab: f64, gamma_bc: f64) -> Self {
        Self {
            alpha: 1.0,
            omega,
            delta1: 0.0,
            gamma_ab,
            gamma_bc,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.alpha, self.omega, self.delta1, self.gamma_ab, self.gamma_bc]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("atom parameters must be finite".into()));
        }
        if self.alpha <= 0.0 {
            return Err(Error::InvalidParameter(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if self.omega < 0.0 {
            return Err(Error::InvalidParameter(format!("omega must be >= 0, got {}", self.omega)));
        }
        if self.gamma_ab <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gamma_ab must be > 0, got {}",
                self.gamma_ab
            )));
        }
        if self.gamma_bc < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gamma_bc must be >= 0, got {}",
                self.gamma_bc
            )));
        }
        Ok(())
    }
}

/// Parameters of the flux-qubit transmission line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    /// Population relaxation rate γ_ab.
    pub gamma_rel: f64,
    pub gamma_ab: f64,
    pub gamma_bc: f64,
    /// Control-field amplitude Ω.
    pub omega: f64,
}

impl CircuitParams {
    /// Reported flux-qubit rates in MHz/2π: γ = 11, Γ_ab = 7.2, Γ_bc = 0.96·Γ_ab, Ω = 6.
    pub fn flux_qubit() -> Self {
        Self {
            gamma_rel: 11.0,
            gamma_ab: 7.2,
            gamma_bc: 0.96 * 7.2,
            omega: 6.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.gamma_rel, self.gamma_ab, self.gamma_bc, self.omega]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("circuit parameters must be finite".into()));
        }
        if self.gamma_rel <= 0.0 || self.gamma_ab <= 0.0 {
            return Err(Error::InvalidParameter(
                "gamma_rel and gamma_ab must be > 0".into(),
            ));
        }
        if self.gamma_bc < 0.0 || self.omega < 0.0 {
            return Err(Error::InvalidParameter("gamma_bc and omega must be >= 0".into()));
        }
        Ok(())
    }
}

/// Poles and residue strengths of `σ_ab/α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleDecomposition {
    pub delta_plus: Complex64,
    pub delta_minus: Complex64,
    pub s_plus: Complex64,
    pub s_minus: Complex64,
}

impl PoleDecomposition {
    /// `S₊/(δ−δ₊) + S₋/(δ−δ₋)`, which equals `σ_ab(δ)/α`.
    pub fn resummed(&self, delta: f64) -> Complex64 {
        self.s_plus / (delta - self.delta_plus) + self.s_minus / (delta - self.delta_minus)
    }
}

/// A sampled profile on a strictly increasing detuning grid.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Spectrum {
    pub deltas: Vec<f64>,
    pub values: Vec<f64>,
    /// Per-point experimental uncertainty, when reported.
    pub sigma_exp: Option<Vec<f64>>,
    /// Free-form provenance tags.
    pub meta: BTreeMap<String, String>,
}

impl Spectrum {
    pub fn new(deltas: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let s = Self {
            deltas,
            values,
            sigma_exp: None,
            meta: BTreeMap::new(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_sigma(mut self, sigma: Vec<f64>) -> Result<Self> {
        self.sigma_exp = Some(sigma);
        self.validate()?;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }

    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.deltas.len() != self.values.len() {
            return Err(Error::InvalidSpectrum(format!(
                "{} detunings but {} values",
                self.deltas.len(),
                self.values.len()
            )));
        }
        if let Some(sigma) = &self.sigma_exp {
            if sigma.len() != self.deltas.len() {
                return Err(Error::InvalidSpectrum("sigma column length mismatch".into()));
            }
            if sigma.iter().any(|s| !s.is_finite() || *s < 0.0) {
                return Err(Error::InvalidSpectrum("sigma must be finite and >= 0".into()));
            }
        }
        if self.deltas.iter().chain(&self.values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpectrum("non-finite entry".into()));
        }
        check_increasing(&self.deltas)
    }
}

fn check_increasing(grid: &[f64]) -> Result<()> {
    match grid.windows(2).position(|w| w[1] <= w[0]) {
        Some(i) => Err(Error::InvalidSpectrum(format!(
            "grid not strictly increasing at index {}",
            i + 1
        ))),
        None => Ok(()),
    }
}

/// `lo, lo+step, …` up to `hi` inclusive (rounded to the nearest whole number of steps).
pub fn uniform_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(Error::InvalidParameter(format!(
            "bad grid {lo}:{hi}:{step}"
        )));
    }
    let n = ((hi - lo) / step).round() as usize + 1;
    Ok((0..n).map(|i| lo + i as f64 * step).collect())
}

/// |δ| ≤ 5 in steps of 0.05: 201 points.
pub fn default_grid() -> Vec<f64> {
    (-100..=100).map(|i| i as f64 * 0.05).collect()
}

pub fn susceptibility(p: &TlaParams, delta: f64) -> Result<Complex64> {
    let inner = Complex64::new(delta, -p.gamma_bc);
    if inner.norm_sqr() == 0.0 {
        if p.omega == 0.0 {
            // pump term vanishes identically
            return finish(p, delta, Complex64::new(delta + p.delta1, -p.gamma_ab));
        }
        return Err(Error::Singular { delta });
    }
    let denom = Complex64::new(delta + p.delta1, -p.gamma_ab) - p.omega * p.omega / inner;
    finish(p, delta, denom)
}

fn finish(p: &TlaParams, delta: f64, denom: Complex64) -> Result<Complex64> {
    let value = p.alpha / denom;
    if denom.norm() < f64::MIN_POSITIVE || !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::Singular { delta });
    }
    Ok(value)
}

pub fn pole_decomposition(p: &TlaParams) -> Result<PoleDecomposition> {
    p.validate()?;
    let center = Complex64::new(-p.delta1 / 2.0, (p.gamma_ab + p.gamma_bc) / 2.0);
    let shift = Complex64::new(p.delta1, -p.gamma_ab + p.gamma_bc);
    let radicand = p.omega * p.omega + shift * shift / 4.0;
    // A negative zero imaginary part would put the principal root on the other side of the cut.
    let root = Complex64::new(radicand.re, radicand.im + 0.0).sqrt();
    let delta_plus = center + root;
    let delta_minus = center - root;
    let split = delta_plus - delta_minus;
    let separation = split.norm();
    if separation < 1e-10 * (p.gamma_ab + p.gamma_bc) {
        return Err(Error::DegeneratePoles { separation });
    }
    let s_plus = (delta_plus - I * p.gamma_bc) / split;
    let s_minus = -(delta_minus - I * p.gamma_bc) / split;
    Ok(PoleDecomposition {
        delta_plus,
        delta_minus,
        s_plus,
        s_minus,
    })
}

/// Absorption `Im σ_ab(δ_j)` over `grid`.
pub fn absorption_profile(p: &TlaParams, grid: &[f64]) -> Result<Spectrum> {
    p.validate()?;
    check_increasing(grid)?;
    let values = grid
        .iter()
        .enumerate()
        .map(|(index, &d)| {
            susceptibility(p, d)
                .map(|s| s.im)
                .map_err(|e| Error::AtGridPoint {
                    index,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut spectrum = Spectrum::new(grid.to_vec(), values)?;
    spectrum.meta.insert("source".into(), "lambda-atom absorption".into());
    spectrum.meta.insert("alpha".into(), p.alpha.to_string());
    spectrum.meta.insert("omega".into(), p.omega.to_string());
    spectrum.meta.insert("delta1".into(), p.delta1.to_string());
    spectrum.meta.insert("gamma_ab".into(), p.gamma_ab.to_string());
    spectrum.meta.insert("gamma_bc".into(), p.gamma_bc.to_string());
    Ok(spectrum)
}

/// Complex transmission `t = 1 − (γ/2)/[Γ_ab + iδ + Ω²/(Γ_bc + iδ)]`.
pub fn transmission(c: &CircuitParams, delta: f64) -> Complex64 {
    let inner = Complex64::new(c.gamma_bc, delta);
    let pump = if c.omega == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        c.omega * c.omega / inner
    };
    1.0 - (c.gamma_rel / 2.0) / (Complex64::new(c.gamma_ab, delta) + pump)
}

/// Absorption-like profile `1 − Re t(δ_j)`.
pub fn transmission_profile(c: &CircuitParams, grid: &[f64]) -> Result<Spectrum> {
    c.validate()?;
    check_increasing(grid)?;
    let values = grid.iter().map(|&d| 1.0 - transmission(c, d).re).collect();
    let mut spectrum = Spectrum::new(grid.to_vec(), values)?;
    spectrum.meta.insert("source".into(), "circuit 1 - Re(t)".into());
    spectrum.meta.insert("gamma_rel".into(), c.gamma_rel.to_string());
    spectrum.meta.insert("gamma_ab".into(), c.gamma_ab.to_string());
    spectrum.meta.insert("gamma_bc".into(), c.gamma_bc.to_string());
    spectrum.meta.insert("omega".into(), c.omega.to_string());
    Ok(spectrum)
}

/// Fractional drop of on-resonance absorption caused by the pump, `Ω²/(Γ_ab·Γ_bc + Ω²)`.
pub fn transparency_depth(p: &TlaParams) -> Result<f64> {
    p.validate()?;
    if p.delta1 != 0.0 {
        return Err(Error::Domain(
            "transparency depth is defined for resonant drive only".into(),
        ));
    }
    if p.gamma_bc <= 0.0 {
        return Err(Error::Domain("transparency depth needs gamma_bc > 0".into()));
    }
    let w2 = p.omega * p.omega;
    Ok(w2 / (p.gamma_ab * p.gamma_bc + w2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn bare_atom_on_resonance() {
        let p = TlaParams::resonant(0.0, 1.0, 0.1);
        let s = susceptibility(&p, 0.0).unwrap();
        assert_relative_eq!(s.re, 0.0, epsilon = 1e-15);
        assert_relative_eq!(s.im, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn pumped_atom_on_resonance() {
        let p = TlaParams::resonant(0.5, 1.0, 0.1);
        let s = susceptibility(&p, 0.0).unwrap();
        assert_relative_eq!(s.im, 1.0 / 3.5, epsilon = 1e-14);
        assert_relative_eq!(s.re, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn detuned_value_matches_independent_evaluation() {
        // evaluated separately with 30-digit arithmetic: -0.25 + 0.75i
        let p = TlaParams {
            alpha: 1.0,
            omega: 1.0,
            delta1: 0.3,
            gamma_ab: 1.0,
            gamma_bc: 0.1,
        };
        let s = susceptibility(&p, 0.7).unwrap();
        assert!((s.re + 0.25).abs() < 1e-12);
        assert!((s.im - 0.75).abs() < 1e-12);
    }

    #[test]
    fn singular_point_is_reported() {
        let p = TlaParams::resonant(0.3, 1.0, 0.0);
        assert_eq!(susceptibility(&p, 0.0), Err(Error::Singular { delta: 0.0 }));
        let err = absorption_profile(&p, &default_grid()).unwrap_err();
        assert!(matches!(err, Error::AtGridPoint { index: 100, .. }));
        // without pump the same point is regular
        let q = TlaParams::resonant(0.0, 1.0, 0.0);
        assert!(susceptibility(&q, 0.0).is_ok());
    }

    #[test]
    fn unpumped_poles() {
        let d = pole_decomposition(&TlaParams::resonant(0.0, 1.0, 0.1)).unwrap();
        assert!((d.delta_plus - Complex64::new(0.0, 1.0)).norm() < 1e-14);
        assert!((d.delta_minus - Complex64::new(0.0, 0.1)).norm() < 1e-14);
    }

    #[test]
    fn strong_pump_poles_approach_dressed_states() {
        let d = pole_decomposition(&TlaParams::resonant(3.0, 1.0, 0.1)).unwrap();
        assert!((d.delta_plus.re - 3.0).abs() < 0.02 * 3.0);
        assert!((d.delta_minus.re + 3.0).abs() < 0.02 * 3.0);
        assert!((d.delta_plus.im - 0.55).abs() < 0.02 * 0.55);
        assert!((d.delta_minus.im - 0.55).abs() < 0.02 * 0.55);
        assert!((d.s_plus.re - 0.5).abs() < 0.05);
    }

    #[test]
    fn exceptional_point_is_degenerate() {
        let p = TlaParams::resonant(0.45, 1.0, 0.1);
        assert!(matches!(
            pole_decomposition(&p),
            Err(Error::DegeneratePoles { .. })
        ));
    }

    #[test]
    fn default_grid_has_201_points() {
        let g = default_grid();
        assert_eq!(g.len(), 201);
        assert_eq!(g[0], -5.0);
        assert_eq!(g[200], 5.0);
        assert_eq!(g[100], 0.0);
        assert_eq!(uniform_grid(-5.0, 5.0, 0.05).unwrap().len(), 201);
    }

    #[test]
    fn resonant_profile_is_even() {
        let s = absorption_profile(&TlaParams::resonant(0.7, 1.0, 0.1), &default_grid()).unwrap();
        let n = s.len();
        for j in 0..n {
            assert!((s.values[j] - s.values[n - 1 - j]).abs() < 1e-12);
        }
    }

    #[test]
    fn profile_rejects_unsorted_grid() {
        let p = TlaParams::resonant(0.7, 1.0, 0.1);
        assert!(absorption_profile(&p, &[0.0, 1.0, 0.5]).is_err());
    }

    #[test]
    fn circuit_unpumped_center() {
        let c = CircuitParams {
            omega: 0.0,
            ..CircuitParams::flux_qubit()
        };
        let s = transmission_profile(&c, &[0.0]).unwrap();
        assert_relative_eq!(s.values[0], 5.5 / 7.2, epsilon = 1e-14);
        let far = transmission_profile(&CircuitParams::flux_qubit(), &[-1e7, 1e7]).unwrap();
        assert!(far.values.iter().all(|v| v.abs() < 1e-6));
    }

    #[test]
    fn circuit_profile_has_central_window() {
        let grid = uniform_grid(-30.0, 30.0, 0.25).unwrap();
        let s = transmission_profile(&CircuitParams::flux_qubit(), &grid).unwrap();
        let center = s.values[grid.len() / 2];
        let peak = s.values.iter().cloned().fold(f64::MIN, f64::max);
        assert!(center < 0.95 * peak, "center {center} peak {peak}");
        let argmax = s.values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert!(grid[argmax].abs() > 2.0);
    }

    #[test]
    fn depth_examples() {
        assert_eq!(transparency_depth(&TlaParams::resonant(0.0, 1.0, 0.1)).unwrap(), 0.0);
        let om = (0.025_f64).sqrt();
        assert_relative_eq!(
            transparency_depth(&TlaParams::resonant(om, 1.0, 0.1)).unwrap(),
            0.2,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            transparency_depth(&TlaParams::resonant(0.5, 1.0, 0.1)).unwrap(),
            0.25 / 0.35,
            epsilon = 1e-12
        );
        let detuned = TlaParams {
            delta1: 0.2,
            ..TlaParams::resonant(0.5, 1.0, 0.1)
        };
        assert!(matches!(transparency_depth(&detuned), Err(Error::Domain(_))));
    }

    fn atom() -> impl Strategy<Value = TlaParams> {
        (0.0..4.0f64, -2.0..2.0f64, 0.05..3.0f64, 0.001..1.0f64).prop_map(
            |(omega, delta1, gamma_ab, frac)| TlaParams {
                alpha: 1.0,
                omega,
                delta1,
                gamma_ab,
                gamma_bc: frac * gamma_ab,
            },
        )
    }

    proptest! {
        #[test]
        fn strengths_sum_to_one(p in atom()) {
            if let Ok(d) = pole_decomposition(&p) {
                prop_assert!((d.s_plus + d.s_minus - 1.0).norm() < 1e-12);
                prop_assert!(d.delta_plus.im > 0.0 && d.delta_minus.im > 0.0);
            }
        }

        #[test]
        fn resummation_matches_direct(p in atom(), delta in -6.0..6.0f64) {
            if let Ok(d) = pole_decomposition(&p) {
                let direct = susceptibility(&p, delta).unwrap();
                let summed = d.resummed(delta);
                prop_assert!((direct - summed).norm() <= 1e-10 * direct.norm().max(1.0));
            }
        }

        #[test]
        fn shared_reservoir_region(frac in 0.0..0.98f64, gbc in 0.01..0.5f64) {
            let gamma_ab = 1.0;
            let omega = frac * (gamma_ab - gbc) / 2.0;
            let d = pole_decomposition(&TlaParams::resonant(omega, gamma_ab, gbc)).unwrap();
            prop_assert!(d.delta_plus.re.abs() < 1e-10 && d.delta_minus.re.abs() < 1e-10);
            prop_assert!(d.s_plus.im.abs() < 1e-10 && d.s_minus.im.abs() < 1e-10);
        }

        #[test]
        fn absorption_is_positive(p in atom(), delta in -20.0..20.0f64) {
            prop_assert!(susceptibility(&p, delta).unwrap().im > 0.0);
        }

        #[test]
        fn depth_matches_two_evaluations(omega in 0.0..3.0f64, gab in 0.1..3.0f64, frac in 0.01..1.0f64) {
            let p = TlaParams::resonant(omega, gab, frac * gab);
            let bare = TlaParams { omega: 0.0, ..p };
            let direct = 1.0 - susceptibility(&p, 0.0).unwrap().im / susceptibility(&bare, 0.0).unwrap().im;
            prop_assert!((transparency_depth(&p).unwrap() - direct).abs() < 1e-12);
        }
    }
}
