//! Multiplicative Gaussian noise and Rabi-frequency / dephasing sweeps.
//!
//! Every replicate draws its noise from a ChaCha stream selected by
//! `(seed, replicate)`, so sweep output does not depend on how work is split
//! across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitter::FitConfig;
use crate::lineshape::{absorption_profile, transparency_depth, Spectrum, TlaParams};
use crate::par;
use crate::selection::{discriminate, DEFAULT_MARGIN};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Relative standard deviation σ of ξ in `(1 + ξ)·A`.
    pub sigma: f64,
    pub seed: u64,
    pub n_replicates: usize,
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        Self {
            sigma: 0.0,
            seed: 0,
            n_replicates: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.sigma) {
            return Err(Error::InvalidParameter(format!(
                "noise sigma must lie in [0, 0.5), got {}",
                self.sigma
            )));
        }
        if self.n_replicates == 0 {
            return Err(Error::InvalidParameter("n_replicates must be >= 1".into()));
        }
        Ok(())
    }

    /// Noiseless data gives identical replicates, so one suffices.
    fn effective_replicates(&self) -> usize {
        if self.sigma == 0.0 {
            1
        } else {
            self.n_replicates
        }
    }
}

/// `values[j] ← (1 + ξ_j)·values[j]` with independent `ξ_j ~ N(0, σ²)`.
///
/// Negative outputs are kept. `sigma_exp` records the absolute standard
/// deviation `σ·|A_j|` of every point.
pub fn add_noise(data: &Spectrum, spec: &NoiseSpec, replicate: usize) -> Result<Spectrum> {
    spec.validate()?;
    if replicate >= spec.n_replicates {
        return Err(Error::InvalidParameter(format!(
            "replicate {replicate} out of range (n_replicates = {})",
            spec.n_replicates
        )));
    }
    let mut out = data.clone();
    out.sigma_exp = Some(data.values.iter().map(|v| spec.sigma * v.abs()).collect());
    out.meta.insert("noise_sigma".into(), spec.sigma.to_string());
    out.meta.insert("noise_seed".into(), spec.seed.to_string());
    out.meta.insert("noise_replicate".into(), replicate.to_string());
    if spec.sigma == 0.0 {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(replicate as u64);
    for v in out.values.iter_mut() {
        let xi: f64 = StandardNormal.sample(&mut rng);
        *v *= 1.0 + spec.sigma * xi;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Swept values (Ω).
    pub axis: Vec<f64>,
    /// `[w̄_EIT, w̄_ATS]` per axis point, averaged over replicates.
    pub per_point_weights: Vec<[f64; 2]>,
    /// `[w_EIT, w_ATS]` per axis point, averaged over replicates.
    pub akaike_weights: Vec<[f64; 2]>,
    /// Replicates whose discrimination failed outright, per axis point.
    pub failures: Vec<usize>,
    /// Interpolated Ω where w̄_EIT − w̄_ATS first turns non-positive.
    pub crossover: Option<f64>,
    /// Same for the Akaike weights.
    pub akaike_crossover: Option<f64>,
}

/// First point where `diff` goes from positive to non-positive, linearly
/// interpolated between the bracketing samples.
pub fn crossover(axis: &[f64], diff: &[f64]) -> Option<f64> {
    axis.windows(2).zip(diff.windows(2)).find_map(|(x, d)| {
        if d[0] > 0.0 && d[1] <= 0.0 {
            let t = d[0] / (d[0] - d[1]);
            Some(x[0] + t * (x[1] - x[0]))
        } else {
            None
        }
    })
}

fn check_axis(axis: &[f64], what: &str) -> Result<()> {
    if axis.is_empty() || axis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!(
            "{what} must be non-empty and strictly increasing"
        )));
    }
    Ok(())
}

/// Resonant (Δ = 0) sweep of the pump Rabi frequency.
///
/// For each Ω the profile on `grid` is generated, noise applied per replicate,
/// both models fitted and their weights averaged over replicates.
pub fn sweep_omega(
    gamma_ab: f64,
    gamma_bc: f64,
    noise: &NoiseSpec,
    omegas: &[f64],
    grid: &[f64],
    cfg: &FitConfig,
) -> Result<SweepResult> {
    noise.validate()?;
    cfg.validate()?;
    check_axis(omegas, "omegas")?;
    let clean = omegas
        .iter()
        .map(|&om| absorption_profile(&TlaParams::resonant(om, gamma_ab, gamma_bc), grid))
        .collect::<Result<Vec<_>>>()?;

    let reps = noise.effective_replicates();
    let jobs = omegas.len() * reps;
    let outcomes = par::map_indices(jobs, |job| {
        let (i, rep) = (job / reps, job % reps);
        let data = add_noise(&clean[i], noise, rep).ok()?;
        let report = discriminate(&data, cfg, DEFAULT_MARGIN).ok()?;
        Some((report.per_point_pair(), report.akaike_pair()))
    });

    let mut per_point_weights = Vec::with_capacity(omegas.len());
    let mut akaike_weights = Vec::with_capacity(omegas.len());
    let mut failures = Vec::with_capacity(omegas.len());
    for chunk in outcomes.chunks(reps) {
        let ok: Vec<_> = chunk.iter().flatten().collect();
        failures.push(reps - ok.len());
        if ok.is_empty() {
            per_point_weights.push([f64::NAN; 2]);
            akaike_weights.push([f64::NAN; 2]);
            continue;
        }
        let m = ok.len() as f64;
        let mean = |f: &dyn Fn(&([f64; 2], [f64; 2])) -> f64| ok.iter().map(|o| f(o)).sum::<f64>() / m;
        per_point_weights.push([mean(&|o| o.0[0]), mean(&|o| o.0[1])]);
        akaike_weights.push([mean(&|o| o.1[0]), mean(&|o| o.1[1])]);
    }

    let diff = |w: &[[f64; 2]]| w.iter().map(|p| p[0] - p[1]).collect::<Vec<_>>();
    Ok(SweepResult {
        crossover: crossover(omegas, &diff(&per_point_weights)),
        akaike_crossover: crossover(omegas, &diff(&akaike_weights)),
        axis: omegas.to_vec(),
        per_point_weights,
        akaike_weights,
        failures,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryResult {
    pub gamma_ab: f64,
    pub gamma_bc: Vec<f64>,
    /// Per-point-weight crossover Ω_AIC for each Γ_bc.
    pub omega_aic: Vec<Option<f64>>,
    /// Transparency depth of the profile at Ω_AIC.
    pub depth_at_crossover: Vec<Option<f64>>,
}

/// Ω_AIC as a function of Γ_bc.
pub fn sweep_gbc_boundary(
    gamma_ab: f64,
    gbc_values: &[f64],
    noise: &NoiseSpec,
    omegas: &[f64],
    grid: &[f64],
    cfg: &FitConfig,
) -> Result<BoundaryResult> {
    check_axis(gbc_values, "gamma_bc values")?;
    if let Some(g) = gbc_values.iter().find(|&&g| !(g > 0.0 && g < gamma_ab)) {
        return Err(Error::InvalidParameter(format!(
            "gamma_bc = {g} must lie in (0, gamma_ab)"
        )));
    }
    let mut omega_aic = Vec::with_capacity(gbc_values.len());
    let mut depth_at_crossover = Vec::with_capacity(gbc_values.len());
    for &gbc in gbc_values {
        let sweep = sweep_omega(gamma_ab, gbc, noise, omegas, grid, cfg)?;
        let depth = match sweep.crossover {
            Some(om) => Some(transparency_depth(&TlaParams::resonant(om, gamma_ab, gbc))?),
            None => None,
        };
        omega_aic.push(sweep.crossover);
        depth_at_crossover.push(depth);
    }
    Ok(BoundaryResult {
        gamma_ab,
        gamma_bc: gbc_values.to_vec(),
        omega_aic,
        depth_at_crossover,
    })
}
