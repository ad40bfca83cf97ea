//! ADMM pan-sharpening solver.
//!
//! Solves
//!
//! ```text
//! min_u  γ f(u) + (1 − γ) TV(u)
//! s.t.   ‖x_l − D_s H_s u_l‖₂ ≤ √M σ_{x_l}   for every band l
//!        ‖p − G u‖₂ ≤ √N σ_p
//! ```
//!
//! where `f` penalizes band gradients that cross the level lines of the
//! panchromatic image and `TV` is the multiband total variation. The problem
//! is split as `min F(y) s.t. y = M u` and solved with scaled ADMM:
//!
//! 1. `z = M u − λ/β`
//! 2. `y = prox_{F/β}(z)` block by block (shrinkage, directional shrinkage,
//!    two ball projections)
//! 3. `u = (MᵀM)⁻¹ Mᵀ (y + λ/β)` in the Fourier domain
//! 4. `λ ← λ + β (y − M u)`

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::operators::{
    eta_field, nearest_upsample, SensorModel, SplitOperator, SplitVector, DEFAULT_ETA_EPS_REL,
};
use crate::prox::{
    project_ball_inplace, prox_levelline_inplace, prox_tv_inplace, BallSpec, Selector,
};
use crate::tensor::{HyperCube, PanImage, VectorField};

/// How the split variables are seeded before the first sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitMode {
    /// `y = M u₀`, so the first primal residual is zero.
    #[default]
    Consistent,
    /// Blur block seeded with the upsampled measurements and band 0 of the
    /// spectral block with `p`.
    Measurements,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Balance between the level-line term (`γ`) and TV (`1 − γ`).
    pub gamma: f64,
    /// ADMM penalty.
    pub beta: f64,
    pub max_iters: usize,
    /// Relative primal and dual residual threshold; 0 runs the full budget.
    pub primal_tol: f64,
    /// Level-line direction is zeroed where `‖∇p‖ ≤ eps_rel · max ‖∇p‖`.
    pub eps_rel: f64,
    /// Record every n-th iteration in the convergence history.
    pub log_every: usize,
    pub init: InitMode,
    /// Multiplies every constraint radius.
    pub radius_scale: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            gamma: 0.01,
            beta: 1000.0,
            max_iters: 300,
            primal_tol: 0.0,
            eps_rel: DEFAULT_ETA_EPS_REL,
            log_every: 1,
            init: InitMode::Consistent,
            radius_scale: 1.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::InvalidParameter(format!("gamma {} not in [0, 1]", self.gamma)));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta {} must be > 0", self.beta)));
        }
        if !(self.primal_tol >= 0.0) {
            return Err(Error::InvalidParameter("primal_tol must be >= 0".into()));
        }
        if !(self.eps_rel > 0.0) {
            return Err(Error::InvalidParameter("eps_rel must be > 0".into()));
        }
        if !(self.radius_scale >= 0.0) {
            return Err(Error::InvalidParameter("radius_scale must be >= 0".into()));
        }
        Ok(())
    }

    fn tv_threshold(&self) -> f64 {
        (1.0 - self.gamma) / self.beta
    }

    fn levelline_threshold(&self) -> f64 {
        self.gamma / self.beta
    }
}

/// Residual norms of the two data-fit constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintStatus {
    /// `‖x_l − D_s H_s u_l‖₂` per band.
    pub hx_residual: Vec<f64>,
    pub hx_radius: Vec<f64>,
    /// `‖x_l‖₂` per band, used to normalize violations.
    pub hx_scale: Vec<f64>,
    /// `‖p − G u‖₂`.
    pub pan_residual: f64,
    pub pan_radius: f64,
    pub pan_scale: f64,
}

impl ConstraintStatus {
    /// Largest `‖r_l‖ − radius_l` over bands; negative when strictly feasible.
    pub fn hx_slack(&self) -> f64 {
        self.hx_residual
            .iter()
            .zip(&self.hx_radius)
            .map(|(r, rad)| r - rad)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn pan_slack(&self) -> f64 {
        self.pan_residual - self.pan_radius
    }

    /// Largest violation `max(0, ‖r‖ − radius)` over all constraints,
    /// divided by the norm of the matching measurement.
    pub fn relative_violation(&self) -> f64 {
        let hx = self
            .hx_residual
            .iter()
            .zip(&self.hx_radius)
            .zip(&self.hx_scale)
            .map(|((r, rad), s)| (r - rad).max(0.0) / s.max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        let pan = (self.pan_residual - self.pan_radius).max(0.0) / self.pan_scale.max(f64::MIN_POSITIVE);
        hx.max(pan)
    }
}

/// One row of the convergence history.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub objective: f64,
    /// `‖y − M u‖`.
    pub primal_residual: f64,
    /// `‖y − M u‖ / ‖M u‖`.
    pub relative_primal: f64,
    /// `‖M (u_k − u_{k−1})‖ / ‖M u‖`.
    pub relative_dual: f64,
    pub hx_slack: f64,
    pub pan_slack: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceReport {
    pub records: Vec<IterationRecord>,
    pub iterations: usize,
    /// True when the residual criterion fired before the iteration budget ran out.
    pub converged: bool,
}

impl ConvergenceReport {
    pub const CSV_HEADER: &'static str =
        "iteration,objective,primal_residual,relative_primal,relative_dual,hx_slack,pan_slack";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{:e},{:e},{:e},{:e},{:e},{:e}",
                r.iteration,
                r.objective,
                r.primal_residual,
                r.relative_primal,
                r.relative_dual,
                r.hx_slack,
                r.pan_slack
            );
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }
}

/// ADMM variables.
#[derive(Debug, Clone)]
pub struct SplitState {
    pub u: HyperCube,
    pub y: SplitVector,
    pub lambda: SplitVector,
    /// `M u` for the current `u`.
    pub mu: SplitVector,
    pub iteration: usize,
    pub history: Vec<IterationRecord>,
}

impl SplitState {
    /// `‖y − M u‖`.
    pub fn primal_residual(&self) -> f64 {
        self.y.combine(1.0, &self.mu, -1.0).norm()
    }
}

/// A bound pan-sharpening problem: measurements, sensor and solver settings.
pub struct PanSharpener {
    x: HyperCube,
    p: PanImage,
    model: SensorModel,
    config: SolverConfig,
    op: SplitOperator,
    eta: VectorField,
    hx_balls: Vec<BallSpec>,
    pan_ball: BallSpec,
}

impl PanSharpener {
    pub fn new(x: &HyperCube, p: &PanImage, model: &SensorModel, config: &SolverConfig) -> Result<Self> {
        model.validate()?;
        config.validate()?;
        let q = model.q;
        if x.width() * q != p.width() || x.height() * q != p.height() {
            return Err(Error::Shape(format!(
                "hyperspectral {}x{} times q = {} does not match panchromatic {}x{}",
                x.width(),
                x.height(),
                q,
                p.width(),
                p.height()
            )));
        }
        if x.bands() != model.bands() {
            return Err(Error::Shape(format!(
                "cube has {} bands, sensor model {}",
                x.bands(),
                model.bands()
            )));
        }
        if !x.is_finite() || !p.is_finite() {
            return Err(Error::NonFinite("input measurements".into()));
        }
        let (w, h) = (p.width(), p.height());
        let op = SplitOperator::new(model, w, h)?;
        let eta = eta_field(p, config.eps_rel)?;
        let low_pixels = x.pixels() as f64;
        let high_pixels = p.len() as f64;
        let selector = Selector::Spatial {
            width: w,
            height: h,
            q,
            offset: model.offset,
        };
        let hx_balls = (0..x.bands())
            .map(|b| {
                BallSpec::new(
                    x.band_data(b).to_vec(),
                    low_pixels.sqrt() * model.sigma_x[b] * config.radius_scale,
                    selector,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let pan_ball = BallSpec::new(
            p.data().to_vec(),
            high_pixels.sqrt() * model.sigma_p * config.radius_scale,
            Selector::Spectral { pixels: w * h },
        )?;
        Ok(Self {
            x: x.clone(),
            p: p.clone(),
            model: model.clone(),
            config: config.clone(),
            op,
            eta,
            hx_balls,
            pan_ball,
        })
    }

    pub fn operator(&self) -> &SplitOperator {
        &self.op
    }

    pub fn eta(&self) -> &VectorField {
        &self.eta
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn model(&self) -> &SensorModel {
        &self.model
    }

    pub fn hx_balls(&self) -> &[BallSpec] {
        &self.hx_balls
    }

    pub fn pan_ball(&self) -> &BallSpec {
        &self.pan_ball
    }

    /// Nearest-neighbour upsampling of the measurements.
    pub fn upsampled(&self) -> HyperCube {
        nearest_upsample(&self.x, self.model.q)
    }

    pub fn initialize(&self) -> Result<SplitState> {
        let u = self.upsampled();
        let mu = self.op.apply(&u)?;
        let mut y = mu.clone();
        if self.config.init == InitMode::Measurements {
            y.blur = u.clone();
            y.spectral.band_data_mut(0).copy_from_slice(self.p.data());
        }
        Ok(SplitState {
            lambda: self.op.zeros(),
            u,
            y,
            mu,
            iteration: 0,
            history: Vec::new(),
        })
    }

    /// Block-wise prox of `F/β` at `z`, in place.
    pub fn prox_blocks(&self, z: &mut SplitVector) {
        let tv_tau = self.config.tv_threshold();
        let ll_tau = self.config.levelline_threshold();
        for field in &mut z.tv {
            prox_tv_inplace(field, tv_tau);
        }
        for field in &mut z.levelline {
            prox_levelline_inplace(field, &self.eta, ll_tau);
        }
        for (b, ball) in self.hx_balls.iter().enumerate() {
            project_ball_inplace(z.blur.band_data_mut(b), ball);
        }
        project_ball_inplace(z.spectral.data_mut(), &self.pan_ball);
    }

    /// One ADMM sweep.
    pub fn iterate(&self, state: &mut SplitState) -> Result<IterationRecord> {
        let iteration = state.iteration + 1;
        let inv_beta = 1.0 / self.config.beta;

        let mut y = state.mu.combine(1.0, &state.lambda, -inv_beta);
        self.prox_blocks(&mut y);
        if let Some(block) = y.non_finite_block() {
            return Err(Error::Diverged { iteration, block });
        }

        let rhs = y.combine(1.0, &state.lambda, inv_beta);
        let u = self.op.solve_u_fourier(&rhs)?;
        if !u.is_finite() {
            return Err(Error::Diverged {
                iteration,
                block: "u",
            });
        }
        let mu = self.op.apply(&u)?;
        let residual = y.combine(1.0, &mu, -1.0);
        state.lambda.add_scaled(self.config.beta, &residual);
        if let Some(block) = state.lambda.non_finite_block() {
            return Err(Error::Diverged { iteration, block });
        }

        let mu_norm = mu.norm().max(f64::MIN_POSITIVE);
        let primal = residual.norm();
        let dual = mu.combine(1.0, &state.mu, -1.0).norm();
        let status = self.constraints(&u)?;
        let record = IterationRecord {
            iteration,
            objective: self.objective(&u),
            primal_residual: primal,
            relative_primal: primal / mu_norm,
            relative_dual: dual / mu_norm,
            hx_slack: status.hx_slack(),
            pan_slack: status.pan_slack(),
        };

        state.u = u;
        state.y = y;
        state.mu = mu;
        state.iteration = iteration;
        if self.config.log_every > 0 && iteration % self.config.log_every == 0 {
            state.history.push(record.clone());
        }
        Ok(record)
    }

    pub fn run(&self) -> Result<(HyperCube, ConvergenceReport)> {
        let mut state = self.initialize()?;
        let mut converged = false;
        let mut last = None;
        while state.iteration < self.config.max_iters {
            let record = self.iterate(&mut state)?;
            let tol = self.config.primal_tol;
            let done = tol > 0.0 && record.relative_primal < tol && record.relative_dual < tol;
            last = Some(record);
            if done {
                converged = true;
                break;
            }
        }
        if let Some(record) = last {
            if state.history.last().map(|r| r.iteration) != Some(record.iteration) {
                state.history.push(record);
            }
        }
        let report = ConvergenceReport {
            records: state.history,
            iterations: state.iteration,
            converged,
        };
        Ok((state.u, report))
    }

    /// `γ f(u) + (1 − γ) TV(u)`.
    pub fn objective(&self, u: &HyperCube) -> f64 {
        let (f, tv) = regularizers(u, &self.eta);
        self.config.gamma * f + (1.0 - self.config.gamma) * tv
    }

    pub fn constraints(&self, u: &HyperCube) -> Result<ConstraintStatus> {
        let mu = self.op.apply(u)?;
        let hx_residual = self
            .hx_balls
            .iter()
            .enumerate()
            .map(|(b, ball)| ball.distance(mu.blur.band_data(b)))
            .collect();
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        Ok(ConstraintStatus {
            hx_residual,
            hx_radius: self.hx_balls.iter().map(|b| b.radius).collect(),
            hx_scale: self.hx_balls.iter().map(|b| norm(&b.data)).collect(),
            pan_residual: self.pan_ball.distance(mu.spectral.data()),
            pan_radius: self.pan_ball.radius,
            pan_scale: norm(&self.pan_ball.data),
        })
    }
}

/// `(f(u), TV(u))` for a level-line field `eta`.
pub fn regularizers(u: &HyperCube, eta: &VectorField) -> (f64, f64) {
    let (w, h) = (u.width(), u.height());
    let mut gh = vec![0.0; w * h];
    let mut gv = vec![0.0; w * h];
    let (mut f, mut tv) = (0.0, 0.0);
    for b in 0..u.bands() {
        crate::operators::gradient_into(u.band_data(b), w, h, &mut gh, &mut gv);
        for i in 0..w * h {
            tv += gh[i].hypot(gv[i]);
            f += (gh[i] * eta.h[i] + gv[i] * eta.v[i]).abs();
        }
    }
    (f, tv)
}

/// Runs the solver from the upsampled measurements.
pub fn run(
    x: &HyperCube,
    p: &PanImage,
    model: &SensorModel,
    config: &SolverConfig,
) -> Result<(HyperCube, ConvergenceReport)> {
    PanSharpener::new(x, p, model, config)?.run()
}
