//! Maximum-likelihood envelope fits at each candidate dimension.
//!
//! For a semi-orthogonal basis G (r by j) the profiled objective is
//!
//! ```text
//! J(G) = log|G' S_res G| + log|G' S_Y^{-1} G| + log|S_Y|
//! ```
//!
//! which equals `log|G' S_res G| + log|Go' S_Y Go|` for any orthonormal
//! completion Go. J depends on G only through span(G), and the fitted
//! log-likelihood at dimension j is `-(nr/2)(log 2pi + 1) - (n/2) J`.
//!
//! The minimizer over j-dimensional subspaces is found by cyclic
//! single-column updates: with all other columns fixed, the objective in
//! the remaining direction v (expressed in an orthonormal basis N of the
//! free subspace) is `log(v'Av) + log(v'Bv)` for two small positive
//! definite matrices. Stationary points satisfy a self-consistent
//! eigen-equation, so each column update scans the eigenvectors of
//! `A/(v'Av) + B/(v'Bv)` and accepts the best strict improvement. Sweeps
//! repeat until the objective decrease falls below a relative tolerance.
//! Several deterministic initializations are descended independently and
//! the best result kept.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{
    self, is_semi_orthogonal, logdet_spd, orthonormal_complement, subspace_distance,
    sym_eigen_desc,
};
use crate::ols::{gaussian_profile_loglik, OlsFit};
use crate::weights::param_count;

/// Settings for the subspace optimizer.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OptimizerSettings {
    /// Maximum number of full column sweeps per start.
    pub max_sweeps: usize,
    /// Stop when a sweep decreases the objective by less than this
    /// relative amount.
    pub rel_tol: f64,
    /// Number of initialization strategies to descend from (1 to 4, in
    /// the order listed on [`fit_envelope`]).
    pub n_starts: usize,
    /// Budget (number of objective evaluations) for the exhaustive
    /// eigenvector-subset start; the scan is skipped when 2*C(r,j)
    /// exceeds it.
    pub scan_budget: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            max_sweeps: 500,
            rel_tol: 1e-10,
            n_starts: 4,
            scan_budget: 512,
        }
    }
}

/// Envelope maximum-likelihood fit at one dimension.
#[derive(Debug, Clone)]
pub struct EnvelopeFit {
    /// Fitted dimension, 1-based.
    pub j: usize,
    /// Semi-orthogonal basis of the fitted subspace, r by j.
    pub gamma: DMatrix<f64>,
    /// Orthonormal completion, r by (r - j).
    pub gamma0: DMatrix<f64>,
    /// Coordinates of the coefficient matrix: gamma' * beta_ols, j by p.
    pub eta: DMatrix<f64>,
    /// Material covariance gamma' S_res gamma, j by j.
    pub omega: DMatrix<f64>,
    /// Immaterial covariance gamma0' S_Y gamma0.
    pub omega0: DMatrix<f64>,
    /// Coefficient estimate gamma * eta, r by p.
    pub beta_env: DMatrix<f64>,
    /// Gaussian log-likelihood at the fit.
    pub loglik: f64,
    /// Parameter count of the dimension-j model.
    pub k: usize,
    /// Value of the minimized subspace objective J.
    pub objective: f64,
}

impl EnvelopeFit {
    /// Reconstructed error covariance gamma omega gamma' + gamma0 omega0 gamma0'.
    pub fn sigma_hat(&self) -> DMatrix<f64> {
        &self.gamma * &self.omega * self.gamma.transpose()
            + &self.gamma0 * &self.omega0 * self.gamma0.transpose()
    }
}

/// Prepared moment matrices for objective evaluations at a fixed dataset.
struct ObjectiveCtx {
    /// S_res
    a: DMatrix<f64>,
    /// S_Y^{-1}
    b: DMatrix<f64>,
    /// S_res^{-1}
    a_inv: DMatrix<f64>,
    ld_sy: f64,
    sy: DMatrix<f64>,
}

impl ObjectiveCtx {
    fn new(moments: &OlsFit) -> Result<Self> {
        linalg::check_spd(&moments.sigma_res, "sigma_res")?;
        linalg::check_spd(&moments.sigma_y, "sigma_y")?;
        let chol_y = moments
            .sigma_y
            .clone()
            .cholesky()
            .ok_or_else(|| Error::DegenerateCovariance("sigma_y is not positive definite".into()))?;
        let ld_sy = 2.0 * chol_y.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let chol_res = moments.sigma_res.clone().cholesky().ok_or_else(|| {
            Error::DegenerateCovariance("sigma_res is not positive definite".into())
        })?;
        Ok(Self {
            a: moments.sigma_res.clone(),
            b: chol_y.inverse(),
            a_inv: chol_res.inverse(),
            ld_sy,
            sy: moments.sigma_y.clone(),
        })
    }

    fn eval(&self, g: &DMatrix<f64>) -> Result<f64> {
        let ga = g.transpose() * &self.a * g;
        let gb = g.transpose() * &self.b * g;
        Ok(logdet_spd(&ga, "G'S_res G")? + logdet_spd(&gb, "G'S_Y^-1 G")? + self.ld_sy)
    }
}

/// Evaluates the subspace objective J at a given orthonormal basis.
pub fn envelope_objective(basis: &DMatrix<f64>, moments: &OlsFit) -> Result<f64> {
    if basis.nrows() != moments.r() || basis.ncols() == 0 || basis.ncols() > moments.r() {
        return Err(Error::DimensionMismatch(format!(
            "basis is {}x{} but moments have r = {}",
            basis.nrows(),
            basis.ncols(),
            moments.r()
        )));
    }
    if !is_semi_orthogonal(basis, 1e-8) {
        return Err(Error::ContractViolation(
            "basis columns are not orthonormal within 1e-8".into(),
        ));
    }
    ObjectiveCtx::new(moments)?.eval(basis)
}

/// Fits the envelope model at dimension `j`.
///
/// Initialization strategies, descended in order and capped by
/// `opts.n_starts`:
/// 1. the j leading eigenvectors of S_res,
/// 2. the j leading eigenvectors of S_Y,
/// 3. the j eigenvectors of S_res most aligned with span(beta_ols),
/// 4. the best j-subset of eigenvectors of S_res or S_Y under J
///    (exhaustive scan, only when the combination count fits the budget).
///
/// Starts tied within 1e-12 in objective are broken toward the span
/// closest to initialization 1.
pub fn fit_envelope(moments: &OlsFit, j: usize, opts: &OptimizerSettings) -> Result<EnvelopeFit> {
    let r = moments.r();
    if j == 0 || j > r {
        return Err(Error::ContractViolation(format!(
            "dimension must satisfy 1 <= j <= r = {r}, got {j}"
        )));
    }
    if j == r {
        // full space: the envelope model coincides with the OLS model
        let ld_res = logdet_spd(&moments.sigma_res, "sigma_res")?;
        return Ok(finish_fit(
            moments,
            DMatrix::identity(r, r),
            DMatrix::zeros(r, 0),
            ld_res,
        ));
    }

    let ctx = ObjectiveCtx::new(moments)?;
    let starts = build_starts(moments, &ctx, j, opts)?;
    let reference_span = starts[0].clone();

    // When the complement is lower-dimensional the same objective is
    // descended in complement coordinates: for orthonormal (G, G0),
    // log|G' S_res G| = log|S_res| + log|G0' S_res^{-1} G0| and
    // log|G' S_Y^{-1} G| + log|S_Y| = log|G0' S_Y G0|, so J differs from
    // the complement form only by the constant log|S_res|.
    let use_complement = r - j < j;
    let run = |start: DMatrix<f64>, polish: bool| -> Result<(f64, DMatrix<f64>, bool)> {
        let (g, converged) = if use_complement {
            let g0 = orthonormal_complement(&start);
            let (g0_final, _, converged) = descend(&ctx.a_inv, &ctx.sy, g0, opts, polish)?;
            (orthonormal_complement(&g0_final), converged)
        } else {
            let (g, _, converged) = descend(&ctx.a, &ctx.b, start, opts, polish)?;
            (g, converged)
        };
        let value = ctx.eval(&g)?;
        Ok((value, g, converged))
    };

    // explore every start with column sweeps, then finish the two best
    // basins with the quasi-Newton polish
    let mut explored = Vec::with_capacity(starts.len());
    for start in &starts {
        explored.push(run(start.clone(), false)?);
    }
    explored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best: Option<(f64, DMatrix<f64>, bool)> = None;
    for (_, g, _) in explored.into_iter().take(2) {
        let (value, g, converged) = run(g, true)?;
        let better = match &best {
            None => true,
            Some((best_value, best_g, _)) => {
                if value < best_value - 1e-12 {
                    true
                } else if value <= best_value + 1e-12 {
                    subspace_distance(&g, &reference_span)
                        < subspace_distance(best_g, &reference_span)
                } else {
                    false
                }
            }
        };
        if better {
            best = Some((value, g, converged));
        }
    }
    let (value, gamma, converged) = best.expect("at least one start");
    let gamma0 = orthonormal_complement(&gamma);
    let fit = finish_fit(moments, gamma, gamma0, value);
    if !converged {
        let grad_norm = projected_gradient_norm(&ctx, &fit.gamma);
        return Err(Error::NonConvergence {
            best: Box::new(fit),
            sweeps: opts.max_sweeps,
            grad_norm,
        });
    }
    Ok(fit)
}

/// Fits every dimension j = 1..=r.
pub fn fit_ladder(moments: &OlsFit, opts: &OptimizerSettings) -> Result<Vec<EnvelopeFit>> {
    (1..=moments.r()).map(|j| fit_envelope(moments, j, opts)).collect()
}

fn finish_fit(
    moments: &OlsFit,
    gamma: DMatrix<f64>,
    gamma0: DMatrix<f64>,
    objective: f64,
) -> EnvelopeFit {
    let j = gamma.ncols();
    let eta = gamma.transpose() * &moments.beta_ols;
    let beta_env = &gamma * &eta;
    let omega = gamma.transpose() * &moments.sigma_res * &gamma;
    let omega0 = gamma0.transpose() * &moments.sigma_y * &gamma0;
    let loglik = gaussian_profile_loglik(moments.n, moments.r(), objective);
    let k = param_count(j, moments.p(), moments.r()).expect("j validated");
    EnvelopeFit {
        j,
        gamma,
        gamma0,
        eta,
        omega,
        omega0,
        beta_env,
        loglik,
        k,
        objective,
    }
}

fn build_starts(
    moments: &OlsFit,
    ctx: &ObjectiveCtx,
    j: usize,
    opts: &OptimizerSettings,
) -> Result<Vec<DMatrix<f64>>> {
    let r = moments.r();
    let n_starts = opts.n_starts.clamp(1, 4);
    let (_, vec_res) = sym_eigen_desc(&ctx.a);
    let (_, vec_y) = sym_eigen_desc(&ctx.sy);

    let mut starts = Vec::with_capacity(n_starts);
    starts.push(vec_res.columns(0, j).clone_owned());
    if n_starts >= 2 {
        starts.push(vec_y.columns(0, j).clone_owned());
    }
    if n_starts >= 3 {
        // eigenvectors of S_res ranked by squared projection onto span(beta)
        let beta_basis = orthonormal_span(&moments.beta_ols);
        let mut scored: Vec<(usize, f64)> = (0..r)
            .map(|i| {
                let v = vec_res.column(i);
                let proj = beta_basis.transpose() * v;
                (i, proj.norm_squared())
            })
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut idx: Vec<usize> = scored.iter().take(j).map(|(i, _)| *i).collect();
        idx.sort_unstable();
        starts.push(select_columns(&vec_res, &idx));
    }
    if n_starts >= 4 {
        if let Some(scan) = best_eigenvector_subset(ctx, &vec_res, &vec_y, j, opts.scan_budget)? {
            starts.push(scan);
        }
    }
    Ok(starts)
}

/// Orthonormal basis of the column span of a (possibly rank-deficient)
/// matrix, via SVD.
fn orthonormal_span(m: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested");
    let tol = 1e-12 * svd.singular_values.iter().cloned().fold(0.0, f64::max).max(1e-300);
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count().max(1);
    u.columns(0, rank).clone_owned()
}

fn select_columns(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m.nrows(), idx.len());
    for (dst, &src) in idx.iter().enumerate() {
        out.set_column(dst, &m.column(src));
    }
    out
}

/// Best j-subset of eigenvectors of S_res or S_Y under J, or None when the
/// scan exceeds the evaluation budget.
fn best_eigenvector_subset(
    ctx: &ObjectiveCtx,
    vec_res: &DMatrix<f64>,
    vec_y: &DMatrix<f64>,
    j: usize,
    budget: usize,
) -> Result<Option<DMatrix<f64>>> {
    let r = vec_res.nrows();
    let combos = binomial(r, j);
    if combos.saturating_mul(2) > budget {
        return Ok(None);
    }
    let mut best: Option<(f64, DMatrix<f64>)> = None;
    for source in [vec_res, vec_y] {
        let mut idx: Vec<usize> = (0..j).collect();
        loop {
            let g = select_columns(source, &idx);
            let value = ctx.eval(&g)?;
            if best.as_ref().map_or(true, |(v, _)| value < *v) {
                best = Some((value, g));
            }
            if !next_combination(&mut idx, r) {
                break;
            }
        }
    }
    Ok(best.map(|(_, g)| g))
}

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    let mut out = 1usize;
    for i in 0..k {
        out = out.saturating_mul(n - i) / (i + 1);
    }
    out
}

/// Advances `idx` to the next k-combination of {0, .., n-1}; false at the end.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for t in i + 1..k {
                idx[t] = idx[t - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Cyclic column-update descent of log|G'M1 G| + log|G'M2 G| from one
/// starting basis. Returns the final basis, the core objective value and
/// whether the sweep loop converged.
fn descend(
    m1: &DMatrix<f64>,
    m2: &DMatrix<f64>,
    mut g: DMatrix<f64>,
    opts: &OptimizerSettings,
    polish: bool,
) -> Result<(DMatrix<f64>, f64, bool)> {
    let j = g.ncols();
    let eval = |g: &DMatrix<f64>| -> Result<f64> {
        Ok(logdet_spd(&(g.transpose() * m1 * g), "G'M1 G")?
            + logdet_spd(&(g.transpose() * m2 * g), "G'M2 G")?)
    };
    // exploration passes (polish = false) only rank candidate basins, so
    // they run fewer sweeps and skip the quasi-Newton finish
    let max_sweeps = if polish { opts.max_sweeps } else { opts.max_sweeps.min(60) };
    let mut value = eval(&g)?;
    let mut converged = false;
    for _ in 0..max_sweeps {
        let sweep_start = value;
        for col in 0..j {
            let rest = drop_column(&g, col);
            let free = orthonormal_complement(&rest);
            let a_bar = compressed_schur(m1, &rest, &free)?;
            let b_bar = compressed_schur(m2, &rest, &free)?;
            let current = free.transpose() * g.column(col);
            let updated = minimize_column(&a_bar, &b_bar, current);
            g.set_column(col, &(&free * updated));
        }
        // re-orthonormalize to remove drift; QR keeps column identity so
        // the sweep state is not scrambled between iterations
        g = g.qr().q();
        value = eval(&g)?;
        // column moves zigzag on coupled rotations; a quasi-Newton phase
        // finishes the local descent
        let grad_norm = if polish {
            polish_phase(m1, m2, &mut g, &mut value, opts.rel_tol, &eval)?
        } else {
            None
        };
        // stop on a stalled objective or on first-order stationarity,
        // whichever certificate comes first
        let stalled = sweep_start - value < opts.rel_tol * sweep_start.abs().max(1.0);
        let stationary = grad_norm.map_or(false, |n| n < 1e-8 * (1.0 + value.abs()));
        if stalled || stationary {
            converged = true;
            break;
        }
    }
    Ok((g, value, converged))
}

/// Limited-memory quasi-Newton descent on the subspace manifold
/// (projection-transported L-BFGS with a QR retraction and Armijo
/// backtracking). The column sweeps supply globalization; this phase
/// supplies fast local convergence in the ill-conditioned valleys where
/// first-order coordinate moves crawl.
fn polish_phase(
    m1: &DMatrix<f64>,
    m2: &DMatrix<f64>,
    g: &mut DMatrix<f64>,
    value: &mut f64,
    rel_tol: f64,
    eval: &impl Fn(&DMatrix<f64>) -> Result<f64>,
) -> Result<Option<f64>> {
    let tangent_grad = |g: &DMatrix<f64>| -> Option<DMatrix<f64>> {
        let s1 = (g.transpose() * m1 * g).cholesky()?;
        let s2 = (g.transpose() * m2 * g).cholesky()?;
        let grad = 2.0 * (m1 * g * s1.inverse() + m2 * g * s2.inverse());
        Some(&grad - g * (g.transpose() * &grad))
    };
    let project = |g: &DMatrix<f64>, t: &DMatrix<f64>| -> DMatrix<f64> { t - g * (g.transpose() * t) };

    let gtol = |f: f64| 1e-9 * (1.0 + f.abs());
    let gain_floor = 1e-3 * rel_tol * value.abs().max(1.0);
    const MEMORY: usize = 8;
    let mut pairs: Vec<(DMatrix<f64>, DMatrix<f64>, f64)> = Vec::new(); // (s, y, 1/<s,y>)
    let Some(mut grad) = tangent_grad(g) else {
        return Ok(None);
    };
    let mut last_norm = grad.norm();
    for _ in 0..150 {
        last_norm = grad.norm();
        if last_norm < gtol(*value) {
            break;
        }
        // two-loop recursion for the quasi-Newton direction
        let mut q = grad.clone();
        let mut alphas = Vec::with_capacity(pairs.len());
        for (s, y, rho) in pairs.iter().rev() {
            let alpha = rho * s.dot(&q);
            q -= alpha * y;
            alphas.push(alpha);
        }
        if let Some((s, y, _)) = pairs.last() {
            let gamma = s.dot(y) / y.dot(y);
            q *= gamma.clamp(1e-12, 1e12);
        }
        for ((s, y, rho), alpha) in pairs.iter().zip(alphas.iter().rev()) {
            let beta = rho * y.dot(&q);
            q += (alpha - beta) * s;
        }
        let mut direction = project(g, &q);
        let mut descent = direction.dot(&grad);
        if !(descent > 0.0) {
            direction = grad.clone();
            descent = grad.norm_squared();
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let candidate = (&*g - step * &direction).qr().q();
            if let Ok(candidate_value) = eval(&candidate) {
                if candidate_value < *value - 1e-4 * step * descent {
                    accepted = Some((candidate, candidate_value));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((g_new, value_new)) = accepted else {
            break;
        };
        let gain = *value - value_new;
        let Some(grad_new) = tangent_grad(&g_new) else {
            *g = g_new;
            *value = value_new;
            break;
        };
        // transport the curvature pair to the new tangent space
        let s = project(&g_new, &(&g_new - &*g));
        let y = &grad_new - project(&g_new, &grad);
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            for (ps, py, prho) in pairs.iter_mut() {
                *ps = project(&g_new, ps);
                *py = project(&g_new, py);
                let dot = ps.dot(py);
                *prho = if dot.abs() > 1e-300 { 1.0 / dot } else { 0.0 };
            }
            pairs.retain(|(_, _, rho)| rho.is_finite() && *rho != 0.0);
            if pairs.len() == MEMORY {
                pairs.remove(0);
            }
            pairs.push((s, y, 1.0 / sy));
        }
        *g = g_new;
        *value = value_new;
        grad = grad_new;
        if gain < gain_floor {
            last_norm = grad.norm();
            break;
        }
    }
    Ok(Some(last_norm))
}

fn drop_column(m: &DMatrix<f64>, col: usize) -> DMatrix<f64> {
    let idx: Vec<usize> = (0..m.ncols()).filter(|&c| c != col).collect();
    select_columns(m, &idx)
}

/// Schur complement of span(rest) in `m`, compressed onto the free
/// subspace: free' (m - m rest (rest' m rest)^{-1} rest' m) free.
fn compressed_schur(
    m: &DMatrix<f64>,
    rest: &DMatrix<f64>,
    free: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    if rest.ncols() == 0 {
        return Ok(free.transpose() * m * free);
    }
    let t = m * rest;
    let s = rest.transpose() * &t;
    let chol = s
        .cholesky()
        .ok_or_else(|| Error::DegenerateCovariance("singular block in column update".into()))?;
    let solved = chol.solve(&t.transpose());
    let reduced = m - &t * solved;
    Ok(free.transpose() * reduced * free)
}

/// Minimizes log(v'Av) + log(v'Bv) over unit vectors.
///
/// Stationary points solve the self-consistent eigen-equation of
/// A/(v'Av) + B/(v'Bv), so the main loop scans that matrix's
/// eigenvectors and accepts strict improvements. Near-degenerate
/// eigenvalues can make the minimizer a mixture the scan cannot reach;
/// a projected-gradient polish with backtracking follows.
fn minimize_column(a: &DMatrix<f64>, b: &DMatrix<f64>, start: DVector<f64>) -> DVector<f64> {
    let h = |v: &DVector<f64>| -> f64 {
        let qa = quad_form(a, v);
        let qb = quad_form(b, v);
        if qa <= 0.0 || qb <= 0.0 {
            f64::INFINITY
        } else {
            qa.ln() + qb.ln()
        }
    };
    let mut v = &start / start.norm();
    let mut best = h(&v);
    for _ in 0..64 {
        let qa = quad_form(a, &v);
        let qb = quad_form(b, &v);
        if qa <= 0.0 || qb <= 0.0 {
            break;
        }
        let m = a / qa + b / qb;
        let (_, vectors) = sym_eigen_desc(&m);
        let mut improved = false;
        for col in 0..vectors.ncols() {
            let candidate = vectors.column(col).clone_owned();
            let val = h(&candidate);
            if val < best - 1e-15 {
                best = val;
                v = candidate;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    // gradient polish on the unit sphere
    for _ in 0..24 {
        let qa = quad_form(a, &v);
        let qb = quad_form(b, &v);
        if qa <= 0.0 || qb <= 0.0 {
            break;
        }
        let grad = 2.0 * (a * &v / qa + b * &v / qb);
        let tangent = &grad - v.dot(&grad) * &v;
        let norm = tangent.norm();
        if norm < 1e-13 {
            break;
        }
        let mut step = 1.0;
        let mut moved = false;
        for _ in 0..20 {
            let candidate = (&v - step * &tangent).normalize();
            let val = h(&candidate);
            if val < best - 1e-15 * (1.0 + best.abs()) {
                best = val;
                v = candidate;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    v
}

fn quad_form(m: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    (v.transpose() * m * v)[(0, 0)]
}

/// Frobenius norm of the gradient of J projected on the tangent space of
/// the Grassmann manifold at G.
fn projected_gradient_norm(ctx: &ObjectiveCtx, g: &DMatrix<f64>) -> f64 {
    let ga = g.transpose() * &ctx.a * g;
    let gb = g.transpose() * &ctx.b * g;
    let (Some(ga_inv), Some(gb_inv)) = (ga.try_inverse(), gb.try_inverse()) else {
        return f64::NAN;
    };
    let grad = 2.0 * (&ctx.a * g * ga_inv + &ctx.b * g * gb_inv);
    let r = g.nrows();
    let projected = (DMatrix::identity(r, r) - g * g.transpose()) * grad;
    projected.norm()
}
