//! Gaussian von Neumann meter.
//!
//! The system is coupled impulsively to a pointer through `exp(-i g O ⊗ p)`,
//! which translates the pointer wavefunction by `g·λ` on every eigenspace of
//! `O`. After projecting the system on the post-selected state the pointer is
//!
//! ```text
//! Φ(x) = Σ_λ ⟨post|P_λ|pre⟩ φ(x − gλ),   φ(x) = (2πσ²)^(-1/4) exp(−x²/4σ²)
//! ```
//!
//! evaluated exactly on a uniform grid (no small-`g` expansion). The weak value
//! is read back as `⟨x⟩/g + i·⟨p⟩·2σ²/g`, using `Var(p) = 1/(4σ²)` for the
//! initial Gaussian (ħ = 1). Momentum statistics come from an FFT of the grid
//! wavefunction.
//!
//! Spectral projectors `P_λ` are built factor by factor when the observable is a
//! single tensor-product term of Hermitian locals, so the sparse qudit spaces
//! never need to be materialized. Anything else goes through a dense Hermitian
//! eigendecomposition bounded by [`DEFAULT_DENSE_CAP`].

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Strategy};
use crate::hilbert::{structure_of, LocalMatrix, OperatorExpr, DEFAULT_DENSE_CAP, TOLERANCE};
use crate::weakvalue::{self, PrePostEnsemble};

/// Coupling used for demonstrations, in units of `sigma`.
pub const DEFAULT_G_OVER_SIGMA: f64 = 0.01;
pub const DEFAULT_GRID_POINTS: usize = 1024;
/// Conditioning probability below which post-selection is considered null.
pub const MIN_SUCCESS_PROBABILITY: f64 = 1e-14;

/// Eigenvalues closer than this are treated as one eigenspace.
const EIGEN_CLUSTER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeterConfig {
    pub sigma: f64,
    pub g: f64,
    pub grid_halfwidth: f64,
    pub grid_points: usize,
}

impl MeterConfig {
    /// Grid defaults: half-width `10σ`, 1024 points.
    pub fn new(sigma: f64, g: f64) -> Self {
        Self {
            sigma,
            g,
            grid_halfwidth: 10.0 * sigma,
            grid_points: DEFAULT_GRID_POINTS,
        }
    }

    pub fn with_g(self, g: f64) -> Self {
        Self { g, ..self }
    }

    pub fn with_grid(self, grid_halfwidth: f64, grid_points: usize) -> Self {
        Self {
            grid_halfwidth,
            grid_points,
            ..self
        }
    }

    fn validate(&self, max_abs_eigenvalue: f64) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::Config(format!(
                "sigma must be finite and positive, got {}",
                self.sigma
            )));
        }
        if !self.g.is_finite() || self.g == 0.0 {
            return Err(Error::Config(format!(
                "g must be finite and nonzero, got {}",
                self.g
            )));
        }
        if self.grid_points < 2 || !self.grid_points.is_power_of_two() {
            return Err(Error::Config(format!(
                "grid_points must be a power of two >= 2, got {}",
                self.grid_points
            )));
        }
        let needed = 5.0 * self.sigma + self.g.abs() * max_abs_eigenvalue;
        if !(self.grid_halfwidth >= needed) {
            return Err(Error::Grid(format!(
                "half-width {} < 5σ + |g|·max|λ| = {}",
                self.grid_halfwidth, needed
            )));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.grid_halfwidth / self.grid_points as f64
    }

    pub fn position(&self, k: usize) -> f64 {
        -self.grid_halfwidth + k as f64 * self.dx()
    }
}

impl Default for MeterConfig {
    fn default() -> Self {
        Self::new(1.0, DEFAULT_G_OVER_SIGMA)
    }
}

/// One eigenspace of the observable as seen by the ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBranch {
    pub eigenvalue: f64,
    /// `⟨post|P_λ|pre⟩`.
    pub amplitude: Complex64,
    /// `‖P_λ|pre⟩‖²`.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub g: f64,
    pub sigma: f64,
    pub success_probability: f64,
    pub conditional_position_mean: f64,
    pub conditional_momentum_mean: f64,
    /// Conditional pointer state on the grid, `Σ|ψ_k|² dx = 1`.
    pub pointer_wavefunction: Vec<Complex64>,
    pub grid_start: f64,
    pub grid_step: f64,
    pub inferred_weak_value: Complex64,
    /// Norm of system ⊗ pointer right after the coupling (before post-selection).
    pub coupled_norm: f64,
}

#[derive(Serialize)]
struct ComplexJson {
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct RecordJson {
    g: f64,
    sigma: f64,
    success_probability: f64,
    position_mean: f64,
    momentum_mean: f64,
    weak_value: ComplexJson,
}

impl MeasurementRecord {
    /// `{g, sigma, success_probability, position_mean, momentum_mean, weak_value:{re,im}}`.
    pub fn to_json(&self) -> String {
        let json = RecordJson {
            g: self.g,
            sigma: self.sigma,
            success_probability: self.success_probability,
            position_mean: self.conditional_position_mean,
            momentum_mean: self.conditional_momentum_mean,
            weak_value: ComplexJson {
                re: self.inferred_weak_value.re,
                im: self.inferred_weak_value.im,
            },
        };
        serde_json::to_string_pretty(&json).expect("record json is always serializable")
    }

    /// `x,density` rows of `|ψ(x)|²` for external plotting.
    pub fn density_csv(&self) -> String {
        let mut out = String::from("x,density\n");
        for (k, psi) in self.pointer_wavefunction.iter().enumerate() {
            let x = self.grid_start + k as f64 * self.grid_step;
            out.push_str(&format!(
                "{},{}\n",
                weakvalue::format_sig17(x),
                weakvalue::format_sig17(psi.norm_sqr())
            ));
        }
        out
    }
}

/// Spectral branches of `op` for this ensemble, merged by eigenvalue.
pub fn spectral_branches(ens: &PrePostEnsemble, op: &OperatorExpr) -> Result<Vec<SpectralBranch>> {
    if let Some(branches) = factorized_branches(ens, op)? {
        return Ok(branches);
    }
    dense_branches(ens, op, DEFAULT_DENSE_CAP)
}

/// Eigenspaces of a Hermitian local matrix as `(eigenvalue, projector)`.
fn local_spectrum(m: &LocalMatrix) -> Vec<(f64, LocalMatrix)> {
    let eig = SymmetricEigen::new(m.clone());
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut out: Vec<(f64, LocalMatrix)> = Vec::new();
    for i in order {
        let lambda = eig.eigenvalues[i];
        let v = eig.eigenvectors.column(i);
        let p = v * v.adjoint();
        match out.last_mut() {
            Some((mu, acc)) if (lambda - *mu).abs() <= EIGEN_CLUSTER_TOL => *acc += p,
            _ => out.push((lambda, p)),
        }
    }
    out
}

/// Factor-by-factor decomposition for a single product term with real
/// coefficient and Hermitian locals; `None` when the operator is not of
/// that form.
fn factorized_branches(
    ens: &PrePostEnsemble,
    op: &OperatorExpr,
) -> Result<Option<Vec<SpectralBranch>>> {
    let [term] = op.terms() else {
        return Ok(None);
    };
    if term.coeff.im.abs() > TOLERANCE {
        return Ok(None);
    }
    let mut spectra: Vec<(&str, Vec<(f64, LocalMatrix)>)> = Vec::new();
    for (label, m) in &term.locals {
        if !structure_of(m, TOLERANCE).hermitian {
            return Ok(None);
        }
        spectra.push((label.as_str(), local_spectrum(m)));
    }

    let pre = ens.pre();
    let post = ens.post();
    let mut branches = Vec::new();
    // Odometer over one eigenspace per factor.
    let mut choice = vec![0usize; spectra.len()];
    loop {
        let mut eigenvalue = term.coeff.re;
        let mut locals = Vec::with_capacity(spectra.len());
        for ((label, spectrum), &c) in spectra.iter().zip(&choice) {
            eigenvalue *= spectrum[c].0;
            locals.push((*label, spectrum[c].1.clone()));
        }
        let projected = OperatorExpr::product(op.space().clone(), locals)?.apply(pre)?;
        branches.push(SpectralBranch {
            eigenvalue,
            amplitude: post.inner(&projected)?,
            weight: projected.norm_sqr(),
        });

        let mut f = 0;
        loop {
            if f == choice.len() {
                return Ok(Some(merge_branches(branches)));
            }
            choice[f] += 1;
            if choice[f] < spectra[f].1.len() {
                break;
            }
            choice[f] = 0;
            f += 1;
        }
    }
}

fn dense_branches(
    ens: &PrePostEnsemble,
    op: &OperatorExpr,
    cap: usize,
) -> Result<Vec<SpectralBranch>> {
    let m = op.to_dense(cap)?;
    if !structure_of(&m, TOLERANCE).hermitian {
        return Err(Error::Structure(
            "weak measurement requires a Hermitian observable".into(),
        ));
    }
    let pre = ens.pre().to_dense(cap)?;
    let post = ens.post().to_dense(cap)?;
    let eig = SymmetricEigen::new(m);
    Ok(branches_from_eigenbasis(
        eig.eigenvalues.as_slice(),
        &eig.eigenvectors,
        &pre,
        &post,
    ))
}

/// Groups an orthonormal eigenbasis (columns of `vectors`) into eigenspaces.
/// Any orthonormal basis of a degenerate eigenspace gives the same branches.
pub fn branches_from_eigenbasis(
    eigenvalues: &[f64],
    vectors: &DMatrix<Complex64>,
    pre: &DVector<Complex64>,
    post: &DVector<Complex64>,
) -> Vec<SpectralBranch> {
    let branches = eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let v = vectors.column(i);
            let along_pre = v.dotc(pre);
            let post_along = post.dotc(&v);
            SpectralBranch {
                eigenvalue: lambda,
                amplitude: post_along * along_pre,
                weight: along_pre.norm_sqr(),
            }
        })
        .collect();
    merge_branches(branches)
}

fn merge_branches(mut branches: Vec<SpectralBranch>) -> Vec<SpectralBranch> {
    branches.sort_by(|a, b| a.eigenvalue.total_cmp(&b.eigenvalue));
    let mut out: Vec<SpectralBranch> = Vec::with_capacity(branches.len());
    for b in branches {
        match out.last_mut() {
            Some(last) if (b.eigenvalue - last.eigenvalue).abs() <= EIGEN_CLUSTER_TOL => {
                last.amplitude += b.amplitude;
                last.weight += b.weight;
            }
            _ => out.push(b),
        }
    }
    out
}

fn gaussian(x: f64, sigma: f64) -> f64 {
    (2.0 * PI * sigma * sigma).powf(-0.25) * (-x * x / (4.0 * sigma * sigma)).exp()
}

pub fn simulate_weak_measurement(
    ens: &PrePostEnsemble,
    op: &OperatorExpr,
    meter: &MeterConfig,
) -> Result<MeasurementRecord> {
    let branches = spectral_branches(ens, op)?;
    simulate_with_branches(&branches, meter)
}

/// Pointer readout for precomputed spectral branches.
pub fn simulate_with_branches(
    branches: &[SpectralBranch],
    meter: &MeterConfig,
) -> Result<MeasurementRecord> {
    let max_abs = branches
        .iter()
        .map(|b| b.eigenvalue.abs())
        .fold(0.0, f64::max);
    meter.validate(max_abs)?;
    let (sigma, g, n) = (meter.sigma, meter.g, meter.grid_points);
    let dx = meter.dx();

    let mut psi = vec![Complex64::new(0.0, 0.0); n];
    let mut coupled_norm = 0.0;
    for b in branches {
        let shift = g * b.eigenvalue;
        let mut branch_norm = 0.0;
        for (k, slot) in psi.iter_mut().enumerate() {
            let phi = gaussian(meter.position(k) - shift, sigma);
            *slot += b.amplitude * phi;
            branch_norm += phi * phi;
        }
        coupled_norm += b.weight * branch_norm * dx;
    }

    let success_probability: f64 = psi.iter().map(|a| a.norm_sqr()).sum::<f64>() * dx;
    if !(success_probability >= MIN_SUCCESS_PROBABILITY) {
        return Err(Error::NullPostselection {
            overlap: success_probability.max(0.0).sqrt(),
            label: None,
        });
    }

    let position_mean = psi
        .iter()
        .enumerate()
        .map(|(k, a)| meter.position(k) * a.norm_sqr())
        .sum::<f64>()
        * dx
        / success_probability;

    let mut spectrum = psi.clone();
    FftPlanner::new().plan_fft_forward(n).process(&mut spectrum);
    let dp = 2.0 * PI / (n as f64 * dx);
    let (mut p_weighted, mut p_total) = (0.0, 0.0);
    for (j, a) in spectrum.iter().enumerate() {
        let wrapped = if j < n / 2 {
            j as f64
        } else {
            j as f64 - n as f64
        };
        let w = a.norm_sqr();
        p_weighted += wrapped * dp * w;
        p_total += w;
    }
    let momentum_mean = p_weighted / p_total;

    let scale = Complex64::new(1.0 / success_probability.sqrt(), 0.0);
    let pointer_wavefunction = psi.into_iter().map(|a| a * scale).collect();

    Ok(MeasurementRecord {
        g,
        sigma,
        success_probability,
        conditional_position_mean: position_mean,
        conditional_momentum_mean: momentum_mean,
        pointer_wavefunction,
        grid_start: -meter.grid_halfwidth,
        grid_step: dx,
        inferred_weak_value: Complex64::new(
            position_mean / g,
            momentum_mean * 2.0 * sigma * sigma / g,
        ),
        coupled_norm,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub g: f64,
    pub inferred: Complex64,
    pub error: f64,
}

pub fn convergence_sweep(
    ens: &PrePostEnsemble,
    op: &OperatorExpr,
    meter: &MeterConfig,
    g_list: &[f64],
) -> Result<Vec<SweepPoint>> {
    convergence_sweep_with(ens, op, meter, g_list, Strategy::default())
}

/// `|inferred − exact|` per coupling, where `exact` is the weak value. One grid
/// per `g`; output order follows `g_list`, which must be sorted descending.
pub fn convergence_sweep_with(
    ens: &PrePostEnsemble,
    op: &OperatorExpr,
    meter: &MeterConfig,
    g_list: &[f64],
    strategy: Strategy,
) -> Result<Vec<SweepPoint>> {
    if g_list.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::Config(
            "g_list must be sorted in strictly descending order".into(),
        ));
    }
    let exact = weakvalue::weak_value(ens, op)?;
    let branches = spectral_branches(ens, op)?;
    exec::try_map(strategy, g_list, |&g| {
        let record = simulate_with_branches(&branches, &meter.with_g(g))?;
        Ok(SweepPoint {
            g,
            inferred: record.inferred_weak_value,
            error: (record.inferred_weak_value - exact).norm(),
        })
    })
}
