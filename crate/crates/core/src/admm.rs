//! ADMM solver for PAPR-constrained ISAC precoding.
//!
//! The problem is
//!
//! ```text
//! min  c₁‖Hx − s_D‖² + c₂‖s − s₀‖²,   s = Bx,
//! s.t. |s_i|² ≤ ε,  ‖C_l s‖² = E_l for every antenna l,
//! ```
//!
//! with c₁ = ρ/‖s_D‖², c₂ = (1−ρ)/‖s₀‖² and B the per-antenna synthesis
//! (F^H⊗I at Nyquist rate, the band-limited F̃_os^H⊗I when oversampled).
//! The splitting y = s (peak cap) and v = s (antenna energy) gives the closed
//! form projections below; the s-step is solved in the frequency variable x,
//! where the system matrix is block diagonal with one Nt×Nt block per
//! subcarrier. Because BᴴB = I this is the same step as solving A s = b with
//! A = c₁ĤᴴĤ + (c₂+η)I whenever B is square.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{complex_normal, ChannelRealization};
use crate::comm_metrics::ConstellationSymbols;
use crate::error::{check_len, IsacError, Result};
use crate::grid::{GridConfig, SamplingMode};
use crate::ideal_waveform::ideal_comm_waveform;
use crate::operators::Synthesis;
use crate::signal::{energy, inner, norm, FreqVector, TimeVector};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// ε = 10^(PAPR/10)·E_l/n, with E_l the per-antenna effective energy and n the
/// samples per antenna of `mode`.
pub fn derive_eps(
    papr_max_db: f64,
    grid: &GridConfig,
    mode: SamplingMode,
    energy_total: f64,
) -> Result<f64> {
    if !(papr_max_db >= 0.0) {
        return Err(IsacError::Infeasible(format!(
            "PAPR cap {papr_max_db} dB is below 0 dB"
        )));
    }
    Ok(
        10f64.powf(papr_max_db / 10.0) * grid.antenna_energy(energy_total)
            / grid.samples(mode) as f64,
    )
}

/// One ISAC design instance.
#[derive(Debug, Clone)]
pub struct IsacProblem {
    pub grid: GridConfig,
    pub mode: SamplingMode,
    pub channel: ChannelRealization,
    pub s_d: ConstellationSymbols,
    /// Normalized ideal radar waveform on the time grid of `mode`.
    pub s0: TimeVector,
    pub rho: f64,
    pub eps: f64,
    pub energy_total: f64,
}

impl IsacProblem {
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        g.validate()?;
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(IsacError::InvalidArgument(format!(
                "rho {} outside [0, 1]",
                self.rho
            )));
        }
        if !(self.energy_total > 0.0) || !(self.eps > 0.0) {
            return Err(IsacError::InvalidArgument(
                "energy and peak cap must be positive".into(),
            ));
        }
        check_len(g.time_len(self.mode), self.s0.len())?;
        if self.s0.mode != self.mode {
            return Err(IsacError::InvalidArgument(
                "s0 sampling mode differs from the problem".into(),
            ));
        }
        if self.channel.n_tx() != g.n_tx || self.channel.n_sub() != g.n_sub {
            return Err(IsacError::InvalidArgument(
                "channel dimensions differ from the grid".into(),
            ));
        }
        check_len(g.n_sub * self.channel.n_users(), self.s_d.len())?;
        if self.s_d.energy() <= 0.0 || self.s0.energy() <= 0.0 {
            return Err(IsacError::ZeroEnergy);
        }
        let floor = self.antenna_energy() / g.samples(self.mode) as f64;
        if self.eps < floor * (1.0 - 1e-12) {
            return Err(IsacError::Infeasible(format!(
                "peak cap {:.3e} below the average sample power {:.3e}",
                self.eps, floor
            )));
        }
        Ok(())
    }

    /// Per-antenna effective energy E_l = Ns/(Ns+Ncp)·E_t/Nt.
    pub fn antenna_energy(&self) -> f64 {
        self.grid.antenna_energy(self.energy_total)
    }

    pub fn comm_weight(&self) -> f64 {
        self.rho / self.s_d.energy()
    }

    pub fn radar_weight(&self) -> f64 {
        (1.0 - self.rho) / self.s0.energy()
    }

    pub fn synthesis(&self) -> Synthesis {
        Synthesis::for_mode(&self.grid, self.mode)
    }

    /// Weighted (communication, radar) terms at x with s = Bx.
    pub fn terms(&self, x: &[Complex64], s: &[Complex64]) -> Result<(f64, f64)> {
        let hx = self.channel.apply(x)?;
        let comm: f64 = hx
            .iter()
            .zip(&self.s_d.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let radar: f64 = s
            .iter()
            .zip(self.s0.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok((self.comm_weight() * comm, self.radar_weight() * radar))
    }

    /// QᴴQ x = c₁HᴴHx + c₂x.
    pub fn gram_apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let hhx = self.channel.adjoint(&self.channel.apply(x)?)?;
        let (c1, c2) = (self.comm_weight(), self.radar_weight());
        Ok(hhx.iter().zip(x).map(|(a, b)| a * c1 + b * c2).collect())
    }
}

/// Entrywise projection of s − λ onto |·|² ≤ ε.
pub fn update_y(s: &[Complex64], lambda: &[Complex64], eps: f64) -> Vec<Complex64> {
    let cap = eps.sqrt();
    s.iter()
        .zip(lambda)
        .map(|(a, b)| {
            let t = a - b;
            if t.norm_sqr() <= eps {
                t
            } else {
                t * (cap / t.norm())
            }
        })
        .collect()
}

/// Per-antenna projection of s − μ onto the sphere ‖C_l v‖² = `antenna_energy`.
/// A zero antenna sequence maps to the equal-phase vector on the sphere.
pub fn update_v(
    s: &[Complex64],
    mu: &[Complex64],
    n_tx: usize,
    antenna_energy: f64,
) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = s.iter().zip(mu).map(|(a, b)| a - b).collect();
    let n = v.len() / n_tx;
    let radius = antenna_energy.sqrt();
    for l in 0..n_tx {
        let e: f64 = (0..n).map(|m| v[m * n_tx + l].norm_sqr()).sum();
        if e > 0.0 {
            let c = radius / e.sqrt();
            (0..n).for_each(|m| v[m * n_tx + l] *= c);
        } else {
            let fill = Complex64::new((antenna_energy / n as f64).sqrt(), 0.0);
            (0..n).for_each(|m| v[m * n_tx + l] = fill);
        }
    }
    v
}

/// λ' = λ + y − s, μ' = μ + v − s.
pub fn update_duals(
    lambda: &[Complex64],
    mu: &[Complex64],
    y: &[Complex64],
    v: &[Complex64],
    s: &[Complex64],
) -> (Vec<Complex64>, Vec<Complex64>) {
    let l = lambda
        .iter()
        .zip(y)
        .zip(s)
        .map(|((l, y), s)| l + y - s)
        .collect();
    let m = mu
        .iter()
        .zip(v)
        .zip(s)
        .map(|((m, v), s)| m + v - s)
        .collect();
    (l, m)
}

/// Exact per-antenna projection onto {‖z‖² = E_l, |z_i|² ≤ ε}: phases are
/// kept and magnitudes become min(c|w_i|, √ε) for the unique c that meets the
/// energy. Entries that are exactly zero share leftover energy equally when
/// the nonzero ones saturate.
pub fn project_feasible(
    w: &[Complex64],
    n_tx: usize,
    antenna_energy: f64,
    eps: f64,
) -> Result<Vec<Complex64>> {
    let n = w.len() / n_tx;
    if (n as f64) * eps < antenna_energy * (1.0 - 1e-12) {
        return Err(IsacError::Infeasible(
            "peak cap too small for the antenna energy".into(),
        ));
    }
    let cap = eps.sqrt();
    let mut out = vec![ZERO; w.len()];
    for l in 0..n_tx {
        let mut order: Vec<usize> = (0..n).map(|m| m * n_tx + l).collect();
        order.sort_by(|a, b| w[*b].norm().total_cmp(&w[*a].norm()));
        let mut suffix = vec![0.0; n + 1];
        for r in (0..n).rev() {
            suffix[r] = suffix[r + 1] + w[order[r]].norm_sqr();
        }
        let mut k = 0;
        let mut scale = None;
        while k < n {
            let remaining = antenna_energy - k as f64 * eps;
            if remaining <= 1e-15 * antenna_energy {
                scale = Some(0.0);
                break;
            }
            let tail = suffix[k];
            if tail <= 0.0 {
                break;
            }
            let c = (remaining / tail).sqrt();
            if c * w[order[k]].norm() <= cap {
                scale = Some(c);
                break;
            }
            k += 1;
        }
        for (rank, &i) in order.iter().enumerate() {
            let z = w[i];
            out[i] = if rank < k {
                z * (cap / z.norm())
            } else {
                z * scale.unwrap_or(0.0)
            };
        }
        if scale.is_none() {
            // every nonzero entry saturated; spread the rest over the zeros
            let zeros = order[k..].len();
            let fill = ((antenna_energy - k as f64 * eps).max(0.0) / zeros as f64).sqrt();
            for &i in &order[k..] {
                out[i] = Complex64::new(fill, 0.0);
            }
        }
    }
    Ok(out)
}

/// Factorized s-step. A_n = c₁H_nᴴH_n + (c₂+η)I per subcarrier, computed once.
pub struct SUpdate<'a> {
    problem: &'a IsacProblem,
    synthesis: Synthesis,
    blocks: Vec<Cholesky<Complex64, Dyn>>,
    rhs_const: Vec<Complex64>,
    eta: f64,
}

/// Result of one s-step.
#[derive(Debug, Clone)]
pub struct SStep {
    pub x: Vec<Complex64>,
    pub s: Vec<Complex64>,
    /// ‖A x − b‖/‖b‖.
    pub residual: f64,
}

impl<'a> SUpdate<'a> {
    pub fn new(problem: &'a IsacProblem, eta: f64) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(IsacError::InvalidArgument("eta must be positive".into()));
        }
        let (c1, c2) = (problem.comm_weight(), problem.radar_weight());
        let nt = problem.grid.n_tx;
        let blocks = problem
            .channel
            .freq_blocks
            .iter()
            .enumerate()
            .map(|(n, h)| {
                let a = h.adjoint() * h * Complex64::new(c1, 0.0)
                    + DMatrix::identity(nt, nt) * Complex64::new(c2 + eta, 0.0);
                Cholesky::new(a).ok_or_else(|| IsacError::Factorization(format!("subcarrier {n}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let synthesis = problem.synthesis();
        let hs = problem.channel.adjoint(&problem.s_d.data)?;
        let bs0 = synthesis.analyze(&problem.s0)?;
        let rhs_const = hs.iter().zip(&bs0).map(|(a, b)| a * c1 + b * c2).collect();
        Ok(Self {
            problem,
            synthesis,
            blocks,
            rhs_const,
            eta,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// A x in the frequency variable.
    pub fn apply_a(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let g = self.problem.gram_apply(x)?;
        Ok(g.iter().zip(x).map(|(a, b)| a + b * self.eta).collect())
    }

    /// Right-hand side b for the given auxiliaries and duals.
    pub fn rhs(
        &self,
        y: &[Complex64],
        v: &[Complex64],
        lambda: &[Complex64],
        mu: &[Complex64],
    ) -> Result<Vec<Complex64>> {
        let t: Vec<Complex64> = (0..y.len())
            .map(|i| y[i] + lambda[i] + v[i] + mu[i])
            .collect();
        let bt = self.synthesis.analyze(&t)?;
        let h = 0.5 * self.eta;
        Ok(self
            .rhs_const
            .iter()
            .zip(&bt)
            .map(|(a, b)| a + b * h)
            .collect())
    }

    pub fn solve(
        &self,
        y: &[Complex64],
        v: &[Complex64],
        lambda: &[Complex64],
        mu: &[Complex64],
    ) -> Result<SStep> {
        let b = self.rhs(y, v, lambda, mu)?;
        let nt = self.problem.grid.n_tx;
        let mut x = vec![ZERO; b.len()];
        for (n, chol) in self.blocks.iter().enumerate() {
            let bn = DVector::from_column_slice(&b[n * nt..(n + 1) * nt]);
            x[n * nt..(n + 1) * nt].copy_from_slice(chol.solve(&bn).as_slice());
        }
        let ax = self.apply_a(&x)?;
        let residual =
            norm(&ax.iter().zip(&b).map(|(a, c)| a - c).collect::<Vec<_>>()) / norm(&b).max(1e-300);
        let s = self.synthesis.synthesize(&x)?;
        Ok(SStep { x, s, residual })
    }
}

/// One s-step from scratch (factorizes A).
pub fn update_s(
    problem: &IsacProblem,
    y: &[Complex64],
    v: &[Complex64],
    lambda: &[Complex64],
    mu: &[Complex64],
    eta: f64,
) -> Result<SStep> {
    SUpdate::new(problem, eta)?.solve(y, v, lambda, mu)
}

/// Spectral quantities behind the penalty bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaBound {
    pub value: f64,
    pub l_f: f64,
    pub lambda_min: f64,
    pub alpha: f64,
    pub eps_prop: f64,
}

fn power_iteration(a: &DMatrix<Complex64>, rng: &mut ChaCha8Rng) -> f64 {
    let n = a.nrows();
    let mut q = DVector::from_fn(n, |_, _| complex_normal(rng));
    q /= Complex64::new(q.norm(), 0.0);
    let mut value = 0.0;
    for it in 0..20_000 {
        let z = a * &q;
        let rq = q.dotc(&z).re;
        let nz = z.norm();
        if nz == 0.0 {
            return 0.0;
        }
        q = z / Complex64::new(nz, 0.0);
        if it > 10 && (rq - value).abs() <= 1e-15 * rq.abs().max(1e-300) {
            return rq;
        }
        value = rq;
    }
    value
}

/// α²L_f²/(ε²λ_min(QᴴQ)) with L_f = λ_max(QᴴQ). QᴴQ = c₁HᴴH + c₂I is block
/// diagonal over subcarriers; both extremes come from power iteration on each
/// block (λ_min through the shifted block λ_max I − A_n).
pub fn eta_bound(problem: &IsacProblem, alpha: f64, eps_prop: f64) -> Result<EtaBound> {
    let (c1, c2) = (problem.comm_weight(), problem.radar_weight());
    let nt = problem.grid.n_tx;
    let mut rng = ChaCha8Rng::seed_from_u64(0x51);
    let grams: Vec<DMatrix<Complex64>> = problem
        .channel
        .freq_blocks
        .iter()
        .map(|h| {
            h.adjoint() * h * Complex64::new(c1, 0.0)
                + DMatrix::identity(nt, nt) * Complex64::new(c2, 0.0)
        })
        .collect();
    let mut l_f: f64 = 0.0;
    let mut lambda_min = f64::INFINITY;
    for a in &grams {
        let top = power_iteration(a, &mut rng);
        let shifted = DMatrix::identity(nt, nt) * Complex64::new(top, 0.0) - a;
        let gap = power_iteration(&shifted, &mut rng);
        l_f = l_f.max(top);
        lambda_min = lambda_min.min((top - gap).max(0.0));
    }
    let value = if lambda_min > 0.0 {
        alpha * alpha * l_f * l_f / (eps_prop * eps_prop * lambda_min)
    } else {
        f64::INFINITY
    };
    Ok(EtaBound {
        value,
        l_f,
        lambda_min,
        alpha,
        eps_prop,
    })
}

/// ADMM starting point.
#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    Zero,
    Radar,
    Comm,
    Custom(TimeVector),
}

impl Init {
    pub fn name(&self) -> &'static str {
        match self {
            Init::Zero => "zero",
            Init::Radar => "radar",
            Init::Comm => "comm",
            Init::Custom(_) => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmmOptions {
    /// Penalty η; `None` uses max(eta_bound, 1).
    pub eta: Option<f64>,
    pub max_iters: usize,
    pub tol: f64,
    pub alpha: f64,
    pub eps_prop: f64,
}

impl Default for AdmmOptions {
    fn default() -> Self {
        Self {
            eta: None,
            max_iters: 2000,
            tol: 1e-6,
            alpha: 1.0,
            eps_prop: 1.0,
        }
    }
}

/// Iterate variables; λ̃ = [λ; μ] and ξ = [y; v] are read off these fields.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub s: Vec<Complex64>,
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
    pub v: Vec<Complex64>,
    pub lambda: Vec<Complex64>,
    pub mu: Vec<Complex64>,
    pub iter: usize,
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub objective: f64,
    pub comm_term: f64,
    pub radar_term: f64,
    pub lagrangian: f64,
    pub res_y: f64,
    pub res_v: f64,
    /// ‖2Qᴴ(Qs−β) − ηBᴴ(λ+μ)‖ / max(1, ‖ηBᴴ(λ+μ)‖).
    pub stationarity: f64,
    pub solve_residual: f64,
    /// ‖λ̃⁽ᵐ⁺¹⁾ − λ̃⁽ᵐ⁾‖².
    pub dual_step_sq: f64,
    /// ‖s⁽ᵐ⁺¹⁾ − s⁽ᵐ⁾‖².
    pub primal_step_sq: f64,
    /// η·Re[λ̃ᴴ(λ̃⁽ᵐ⁾ − λ̃⁽ᵐ⁻¹⁾)], a lower bound on the Lagrangian.
    pub lower_bound: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub records: Vec<IterationRecord>,
}

impl ConvergenceTrace {
    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    /// First iteration whose Lagrangian exceeds its predecessor by more than
    /// `rel_slack` (relative to the larger magnitude).
    pub fn first_lagrangian_increase(&self, rel_slack: f64) -> Option<usize> {
        self.records.windows(2).find_map(|w| {
            let (a, b) = (w[0].lagrangian, w[1].lagrangian);
            (b - a > rel_slack * a.abs().max(b.abs())).then_some(w[1].iter)
        })
    }

    pub fn lagrangian_non_increasing(&self, rel_slack: f64) -> bool {
        self.first_lagrangian_increase(rel_slack).is_none()
    }

    pub fn max_stationarity(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.stationarity)
            .fold(0.0, f64::max)
    }

    pub fn max_solve_residual(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.solve_residual)
            .fold(0.0, f64::max)
    }

    /// Iterations where ‖Δλ̃‖² > α²L_f²/(η²ε²)·‖Δs‖².
    pub fn dual_bound_violations(&self, bound: &EtaBound, eta: f64) -> usize {
        let k = (bound.alpha * bound.l_f / (eta * bound.eps_prop)).powi(2);
        self.records
            .iter()
            .filter(|r| r.dual_step_sq > k * r.primal_step_sq * (1.0 + 1e-9) + 1e-300)
            .count()
    }

    /// Iterations where the Lagrangian falls below its logged lower bound.
    pub fn lower_bound_violations(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.lagrangian < r.lower_bound - 1e-9 * r.lower_bound.abs().max(1.0))
            .count()
    }
}

/// Output of [`run_admm`].
#[derive(Debug, Clone)]
pub struct AdmmOutput {
    /// Emitted waveform: the raw iterate projected onto both constraint sets.
    pub s: TimeVector,
    /// Bᴴs, the subcarrier-domain precoder output seen by the users.
    pub x: FreqVector,
    /// Last raw iterate s = Bx.
    pub raw: TimeVector,
    pub raw_x: FreqVector,
    pub trace: ConvergenceTrace,
    pub converged: bool,
    pub eta: f64,
    pub bound: EtaBound,
    pub state: AdmmState,
}

fn lagrangian_parts(s: &[Complex64], aux: &[Complex64], dual: &[Complex64]) -> f64 {
    let mut a = 0.0;
    let mut b = 0.0;
    for i in 0..s.len() {
        a += (aux[i] - s[i] + dual[i]).norm_sqr();
        b += dual[i].norm_sqr();
    }
    a - b
}

/// Runs the y/v → s → dual iteration until the scaled primal residual drops
/// below `tol` or `max_iters` is reached.
pub fn run_admm(problem: &IsacProblem, init: &Init, opts: &AdmmOptions) -> Result<AdmmOutput> {
    problem.validate()?;
    let grid = &problem.grid;
    let nt = grid.n_tx;
    let n = grid.time_len(problem.mode);
    let bound = eta_bound(problem, opts.alpha, opts.eps_prop)?;
    let eta = match opts.eta {
        Some(e) => e,
        None => bound.value.max(1.0),
    };
    if !eta.is_finite() {
        return Err(IsacError::InvalidArgument(
            "penalty bound is unbounded (λ_min = 0); pass eta explicitly".into(),
        ));
    }
    let step = SUpdate::new(problem, eta)?;
    let synthesis = problem.synthesis();
    let e_l = problem.antenna_energy();

    let mut s = match init {
        Init::Zero => vec![ZERO; n],
        Init::Radar => problem.s0.data.clone(),
        Init::Comm => {
            ideal_comm_waveform(&problem.channel, &problem.s_d, grid)?
                .in_mode(grid, problem.mode)?
                .data
        }
        Init::Custom(t) => {
            check_len(n, t.len())?;
            t.data.clone()
        }
    };
    let mut x = synthesis.analyze(&s)?;
    let mut lambda = vec![ZERO; n];
    let mut mu = vec![ZERO; n];
    let mut y = vec![ZERO; n];
    let mut v = vec![ZERO; n];
    let mut trace = ConvergenceTrace::default();
    let mut converged = false;
    let scale = (n as f64).sqrt();
    let mut iter = 0;

    while iter < opts.max_iters {
        iter += 1;
        y = update_y(&s, &lambda, problem.eps);
        v = update_v(&s, &mu, nt, e_l);
        let next = step.solve(&y, &v, &lambda, &mu)?;
        let (nl, nm) = update_duals(&lambda, &mu, &y, &v, &next.s);

        let dual_step_sq = energy(
            &nl.iter()
                .zip(&lambda)
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
        ) + energy(&nm.iter().zip(&mu).map(|(a, b)| a - b).collect::<Vec<_>>());
        let primal_step_sq = energy(
            &next
                .s
                .iter()
                .zip(&s)
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
        );
        let lower_bound = eta
            * (inner(
                &nl,
                &nl.iter()
                    .zip(&lambda)
                    .map(|(a, b)| a - b)
                    .collect::<Vec<_>>(),
            )
            .re + inner(
                &nm,
                &nm.iter().zip(&mu).map(|(a, b)| a - b).collect::<Vec<_>>(),
            )
            .re);

        s = next.s;
        x = next.x;
        lambda = nl;
        mu = nm;

        if s.iter()
            .chain(&lambda)
            .chain(&mu)
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(IsacError::NonFinite(iter));
        }

        let (comm, radar) = problem.terms(&x, &s)?;
        let objective = comm + radar;
        let lagrangian = objective
            + 0.5 * eta * (lagrangian_parts(&s, &y, &lambda) + lagrangian_parts(&s, &v, &mu));
        let res_y = norm(&y.iter().zip(&s).map(|(a, b)| a - b).collect::<Vec<_>>());
        let res_v = norm(&v.iter().zip(&s).map(|(a, b)| a - b).collect::<Vec<_>>());

        // 2Qᴴ(Qs − β) in the frequency variable, against ηBᴴ(λ + μ).
        let gq = problem.gram_apply(&x)?;
        let lhs: Vec<Complex64> = gq
            .iter()
            .zip(&step.rhs_const)
            .map(|(a, b)| 2.0 * (a - b))
            .collect();
        let lm: Vec<Complex64> = lambda.iter().zip(&mu).map(|(a, b)| (a + b) * eta).collect();
        let rhs = synthesis.analyze(&lm)?;
        let stationarity = norm(&lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect::<Vec<_>>())
            / norm(&rhs).max(1.0);

        trace.records.push(IterationRecord {
            iter,
            objective,
            comm_term: comm,
            radar_term: radar,
            lagrangian,
            res_y,
            res_v,
            stationarity,
            solve_residual: next.residual,
            dual_step_sq,
            primal_step_sq,
            lower_bound,
        });

        if res_y.max(res_v) / scale < opts.tol {
            converged = true;
            break;
        }
    }

    let emitted = project_feasible(&s, nt, e_l, problem.eps)?;
    let emitted_x = synthesis.analyze(&emitted)?;
    Ok(AdmmOutput {
        s: TimeVector::effective(emitted, problem.mode),
        x: FreqVector(emitted_x),
        raw: TimeVector::effective(s.clone(), problem.mode),
        raw_x: FreqVector(x.clone()),
        trace,
        converged,
        eta,
        bound,
        state: AdmmState {
            s,
            x,
            y,
            v,
            lambda,
            mu,
            iter,
            eta,
        },
    })
}
