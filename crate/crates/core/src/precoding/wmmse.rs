//! WMMSE alternating optimization for the max-min net-rate problem.
//!
//! Outer loop: refresh per-(user, stream) MMSE equalizers and weights at
//! the current precoders, which turns every rate into a concave quadratic
//! minorant that is tight at the current point. Inner step: maximize the
//! min over the mode's objective rows of these minorants inside the power
//! ball, by one of two routes:
//!
//! * projected supergradient ascent on a soft-min of the rows, with the
//!   temperature annealed upward and a backtracking line search on the
//!   exact (hard) min;
//! * bisection on the epigraph value, each feasibility probe running a
//!   few multiplicative-weight rounds whose inner precoder update is the
//!   closed-form weighted-MMSE solution per column.
//!
//! The candidate from either route is accepted only if it improves the
//! minorant, which makes the true objective trace non-decreasing up to
//! floating-point noise regardless of how sloppy the inner step was.

use super::rates::{mode_objective, objective_rows, rate_report, stream_rates, RateReport};
use super::{CsitSet, Mode, PrecoderSet, PrecodingError, STREAM_C, STREAM_P1, STREAM_P2};
use crate::rng::{complex_gaussian, rng_for, Stream};
use crate::util::{dot_h, norm2, solve_hermitian};
use crate::{Group, Scheme};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

/// Inner convex-subproblem route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerSolver {
    /// Soft-min supergradient ascent with projection onto the power ball.
    ProjectedSubgradient,
    /// Epigraph bisection with closed-form per-column feasibility probes.
    BisectionSocpFree,
}

/// Cold-start strategies; RSMA solves additionally warm-start from the
/// converged SDMA and NOMA (both orderings) solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitStrategy {
    /// Every active stream beamformed at the weakest user's channel.
    MrtWeakest,
    /// Each private stream at its own group's weakest user, the common
    /// stream at the overall weakest.
    MrtPerGroup,
    /// Independent isotropic random directions.
    RandomIsotropic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_outer_iters: usize,
    /// Relative objective change below which an iteration counts as
    /// stable; three in a row terminate the loop.
    pub convergence_tol: f64,
    /// Monotonicity slack on the objective trace.
    pub epigraph_tol: f64,
    pub multistart: Vec<InitStrategy>,
    pub inner_solver: InnerSolver,
    /// Seed for the random starts.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_outer_iters: 500,
            convergence_tol: 1e-6,
            epigraph_tol: 1e-7,
            multistart: vec![
                InitStrategy::MrtWeakest,
                InitStrategy::MrtPerGroup,
                InitStrategy::RandomIsotropic,
                InitStrategy::RandomIsotropic,
                InitStrategy::RandomIsotropic,
            ],
            inner_solver: InnerSolver::ProjectedSubgradient,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub precoders: PrecoderSet,
    pub rates: RateReport,
    /// Objective value after each outer iteration of the winning start.
    pub objective_trace: Vec<f64>,
    /// Transmit power at the same points.
    pub power_trace: Vec<f64>,
    /// False when the winning start ran out of outer iterations.
    pub converged: bool,
}

impl SolveResult {
    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace never empty")
    }
}

/// Interference sources of stream `s` (the common stream is cancelled
/// before private decoding).
fn interferers(s: usize) -> &'static [usize] {
    match s {
        STREAM_C => &[STREAM_P1, STREAM_P2],
        STREAM_P1 => &[STREAM_P2],
        STREAM_P2 => &[STREAM_P1],
        _ => unreachable!(),
    }
}

/// Per-(user, stream) equalizer/weight state of the rate-WMMSE surrogate.
struct Surrogate<'a> {
    csit: &'a CsitSet,
    mode: Mode,
    sigma2: f64,
    /// `u[s][i]`, MMSE equalizer of stream `s` at flat user `i`.
    u: [[Complex64; 4]; 3],
    /// `w[s][i]`, inverse MMSE weight.
    w: [[f64; 4]; 3],
}

impl<'a> Surrogate<'a> {
    /// Equalizers and weights at the current precoders (the minorant is
    /// tight there).
    fn at(csit: &'a CsitSet, p: &PrecoderSet, sigma2: f64, mode: Mode) -> Self {
        let mut u = [[Complex64::ZERO; 4]; 3];
        let mut w = [[1.0f64; 4]; 3];
        let active = mode.active();
        for s in 0..3 {
            if !active[s] {
                continue;
            }
            for &i in CsitSet::stream_users(s) {
                let h = &csit.h[i];
                let amp = dot_h(h, p.column(s));
                let mut t = sigma2 + amp.norm_sqr();
                for &j in interferers(s) {
                    t += dot_h(h, p.column(j)).norm_sqr();
                }
                let ueq = amp.conj() / t;
                let mse = 1.0 - amp.norm_sqr() / t;
                u[s][i] = ueq;
                w[s][i] = 1.0 / mse.max(1e-300);
            }
        }
        Surrogate { csit, mode, sigma2, u, w }
    }

    /// Quadratic minorant of user `i`'s rate on stream `s` at precoders `p`.
    fn user_rate(&self, s: usize, i: usize, p: &PrecoderSet) -> f64 {
        let h = &self.csit.h[i];
        let u = self.u[s][i];
        let w = self.w[s][i];
        let mut t = self.sigma2 + dot_h(h, p.column(s)).norm_sqr();
        for &j in interferers(s) {
            t += dot_h(h, p.column(j)).norm_sqr();
        }
        let eps = u.norm_sqr() * t - 2.0 * (u * dot_h(h, p.column(s))).re + 1.0;
        w.log2() + (1.0 - w * eps) / LN_2
    }

    /// Stream minorant: min over the stream's users. Returns the value
    /// and the arg-min user.
    fn stream_rate(&self, s: usize, p: &PrecoderSet) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for &i in CsitSet::stream_users(s) {
            let v = self.user_rate(s, i, p);
            if v < best.0 {
                best = (v, i);
            }
        }
        best
    }

    /// Objective-row values at `p` (the surrogate of the max-min net rate
    /// is the min of these).
    fn row_values(&self, p: &PrecoderSet) -> Vec<f64> {
        let active = self.mode.active();
        let streams: [f64; 3] = std::array::from_fn(|s| {
            if active[s] {
                self.stream_rate(s, p).0
            } else {
                0.0
            }
        });
        objective_rows(self.mode)
            .iter()
            .map(|row| row[0] * streams[0] + row[1] * streams[1] + row[2] * streams[2])
            .collect()
    }

    fn objective(&self, p: &PrecoderSet) -> f64 {
        self.row_values(p).iter().fold(f64::INFINITY, |a, &b| a.min(b))
    }

    /// Supergradient (wrt conjugate coordinates) of the soft-min of the
    /// rows at temperature `beta`, stacked per stream column. The min over
    /// each stream's users is softened with the same temperature: max-min
    /// optima sit exactly on user ties, where a hard arg-min direction
    /// would stall the line search.
    fn softmin_gradient(&self, p: &PrecoderSet, beta: f64) -> Vec<Vec<Complex64>> {
        let n_tx = self.csit.n_tx();
        let active = self.mode.active();
        let rows = objective_rows(self.mode);
        let values = self.row_values(p);
        let min_v = values.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let weights: Vec<f64> = values.iter().map(|v| (-beta * (v - min_v)).exp()).collect();
        let wsum: f64 = weights.iter().sum();

        // Effective weight of each stream's minorant in the blended
        // objective.
        let mut stream_weight = [0.0f64; 3];
        for (row, wk) in rows.iter().zip(&weights) {
            for s in 0..3 {
                stream_weight[s] += row[s] * wk / wsum;
            }
        }

        let mut grad = vec![vec![Complex64::ZERO; n_tx]; 3];
        for s in 0..3 {
            if !active[s] || stream_weight[s] == 0.0 {
                continue;
            }
            let users = CsitSet::stream_users(s);
            let rates: Vec<f64> = users.iter().map(|&i| self.user_rate(s, i, p)).collect();
            let rmin = rates.iter().fold(f64::INFINITY, |a, &b| a.min(b));
            let uweights: Vec<f64> = rates.iter().map(|r| (-beta * (r - rmin)).exp()).collect();
            let usum: f64 = uweights.iter().sum();
            for (&i, &uw) in users.iter().zip(&uweights) {
                let h = &self.csit.h[i];
                let u = self.u[s][i];
                let w = self.w[s][i];
                let scale = stream_weight[s] * (uw / usum) * w / LN_2;
                // d/dp_t of -eps: -|u|^2 h (h^H p_t) for t in the cone,
                // plus conj(u) h for the stream's own column.
                for &t in [s].iter().chain(interferers(s)) {
                    if !active[t] {
                        continue;
                    }
                    let hp = dot_h(h, p.column(t));
                    for a in 0..n_tx {
                        grad[t][a] -= scale * u.norm_sqr() * h[a] * hp;
                    }
                }
                for a in 0..n_tx {
                    grad[s][a] += scale * u.conj() * h[a];
                }
            }
        }
        grad
    }
}

fn apply_step(p: &PrecoderSet, grad: &[Vec<Complex64>], eta: f64, p_t: f64) -> PrecoderSet {
    let mut next = p.clone();
    let active = p.mode.active();
    for s in 0..3 {
        if !active[s] {
            continue;
        }
        for (v, g) in next.column_mut(s).iter_mut().zip(&grad[s]) {
            *v += eta * g;
        }
    }
    next.project_to_power(p_t);
    next
}

/// Route (b): supergradient ascent on the annealed soft-min with a
/// backtracking line search on the exact surrogate.
fn inner_subgradient(sur: &Surrogate, p0: &PrecoderSet, p_t: f64) -> PrecoderSet {
    let mut p = p0.clone();
    let mut best_val = sur.objective(&p);
    let mut beta = 2.0;
    for _ in 0..60 {
        let grad = sur.softmin_gradient(&p, beta);
        let gnorm: f64 = grad.iter().map(|c| norm2(c)).sum::<f64>().sqrt();
        if gnorm < 1e-14 {
            break;
        }
        let mut eta = 0.5 * p_t.sqrt() / gnorm;
        let mut improved = false;
        for _ in 0..30 {
            let cand = apply_step(&p, &grad, eta, p_t);
            let val = sur.objective(&cand);
            if val > best_val + 1e-15 {
                p = cand;
                best_val = val;
                improved = true;
                break;
            }
            eta *= 0.5;
        }
        if !improved {
            beta *= 4.0;
            if beta > 1e6 {
                break;
            }
        } else {
            beta = (beta * 1.3).min(1e6);
        }
    }
    p
}

/// Closed-form per-column update for a fixed blend of rows (`lambda`) and
/// per-stream user weights (`phi`): each active column solves a ridge
/// system, with the ridge found by bisection on the power constraint.
fn weighted_closed_form(
    sur: &Surrogate,
    lambda: &[f64],
    phi: &[[f64; 4]; 3],
    p_t: f64,
    mode: Mode,
) -> PrecoderSet {
    let n_tx = sur.csit.n_tx();
    let rows = objective_rows(mode);
    let active = mode.active();
    let mut c_s = [0.0f64; 3];
    for (row, &lk) in rows.iter().zip(lambda) {
        for s in 0..3 {
            c_s[s] += lk * row[s];
        }
    }

    // Quadratic data per column: A_t (Hermitian) and linear term b_t.
    let mut a_mats: Vec<Vec<Vec<Complex64>>> =
        vec![vec![vec![Complex64::ZERO; n_tx]; n_tx]; 3];
    let mut b_vecs: Vec<Vec<Complex64>> = vec![vec![Complex64::ZERO; n_tx]; 3];
    for s in 0..3 {
        if !active[s] || c_s[s] == 0.0 {
            continue;
        }
        for &i in CsitSet::stream_users(s) {
            let h = &sur.csit.h[i];
            let coeff = c_s[s] * phi[s][i] * sur.w[s][i] / LN_2;
            let u2 = sur.u[s][i].norm_sqr();
            for &t in [s].iter().chain(interferers(s)) {
                if !active[t] {
                    continue;
                }
                for r in 0..n_tx {
                    for c in 0..n_tx {
                        a_mats[t][r][c] += coeff * u2 * h[r] * h[c].conj();
                    }
                }
            }
            for r in 0..n_tx {
                b_vecs[s][r] += coeff * sur.u[s][i].conj() * h[r];
            }
        }
    }

    let solve_at = |mu: f64| -> PrecoderSet {
        let mut p = PrecoderSet::zeros(n_tx, mode);
        for s in 0..3 {
            if !active[s] {
                continue;
            }
            if norm2(&b_vecs[s]) == 0.0 {
                continue;
            }
            let mut a = a_mats[s].clone();
            for (r, row) in a.iter_mut().enumerate() {
                row[r] += Complex64::new(mu, 0.0);
            }
            let col = solve_hermitian(&a, &b_vecs[s]);
            if col.iter().all(|v| v.is_finite()) {
                *p.column_mut(s) = col;
            }
        }
        p
    };

    let p0 = solve_at(0.0);
    if p0.total_power() <= p_t && p0.total_power().is_finite() {
        return p0;
    }
    // Power is decreasing in the ridge; grow an upper bracket then bisect.
    let mut mu_hi = 1e-9;
    while solve_at(mu_hi).total_power() > p_t {
        mu_hi *= 10.0;
        if mu_hi > 1e12 {
            break;
        }
    }
    let mut lo = 0.0;
    let mut hi = mu_hi;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if solve_at(mid).total_power() > p_t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut p = solve_at(hi);
    p.project_to_power(p_t);
    p
}

/// Route (a): bisection on the epigraph value. Each feasibility probe
/// runs multiplicative-weight rounds over rows and users around the
/// closed-form column update; because the row values are concave in the
/// precoders, the running average of the iterates is also evaluated (it
/// often beats every single iterate of an oscillating game).
fn inner_bisection(sur: &Surrogate, p0: &PrecoderSet, p_t: f64, tol: f64) -> PrecoderSet {
    let mode = p0.mode;
    let rows = objective_rows(mode);
    let active = mode.active();

    let mut best_p = p0.clone();
    let mut best_val = sur.objective(&best_p);

    // Upper bound on any row: stream minorants never exceed
    // log2(w) + 1/ln2 (mse = 0).
    let stream_cap: [f64; 3] = std::array::from_fn(|s| {
        if !active[s] {
            return 0.0;
        }
        CsitSet::stream_users(s)
            .iter()
            .map(|&i| sur.w[s][i].log2() + 1.0 / LN_2)
            .fold(f64::INFINITY, f64::min)
    });
    let mut t_hi = rows
        .iter()
        .map(|row| row[0] * stream_cap[0] + row[1] * stream_cap[1] + row[2] * stream_cap[2])
        .fold(f64::INFINITY, f64::min);
    let mut t_lo = best_val;
    if !t_hi.is_finite() || t_hi <= t_lo {
        return best_p;
    }

    // Min-player weights persist across probes.
    let mut lambda = vec![1.0 / rows.len() as f64; rows.len()];
    let mut phi = [[0.0f64; 4]; 3];
    for s in 0..3 {
        for &i in CsitSet::stream_users(s) {
            phi[s][i] = 1.0 / CsitSet::stream_users(s).len() as f64;
        }
    }

    for _ in 0..20 {
        if t_hi - t_lo <= tol.max(1e-9 * t_hi.abs()) {
            break;
        }
        let t_mid = 0.5 * (t_lo + t_hi);
        let mut reached = false;
        let n_tx = sur.csit.n_tx();
        let mut p_sum = PrecoderSet::zeros(n_tx, mode);
        for round in 0..40 {
            let p_cur = weighted_closed_form(sur, &lambda, &phi, p_t, mode);
            for s in 0..3 {
                for a in 0..n_tx {
                    p_sum.column_mut(s)[a] += p_cur.column(s)[a];
                }
            }
            let mut p_avg = p_sum.clone();
            let scale = 1.0 / (round + 1) as f64;
            for s in 0..3 {
                for v in p_avg.column_mut(s).iter_mut() {
                    *v *= scale;
                }
            }
            p_avg.project_to_power(p_t);
            for cand in [&p_cur, &p_avg] {
                let v = sur.objective(cand);
                if v > best_val {
                    best_val = v;
                    best_p = cand.clone();
                }
            }
            if best_val >= t_mid - 1e-12 {
                reached = true;
                break;
            }
            // Shift weight toward violated rows / weak users.
            let vals = sur.row_values(&p_cur);
            let v = vals.iter().fold(f64::INFINITY, |a, &b| a.min(b));
            let spread = vals.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - v + 1e-12;
            for (lk, &vk) in lambda.iter_mut().zip(&vals) {
                *lk *= (-1.0 * (vk - v) / spread).exp();
            }
            let lsum: f64 = lambda.iter().sum();
            lambda.iter_mut().for_each(|l| *l /= lsum);
            for s in 0..3 {
                if !active[s] {
                    continue;
                }
                let users = CsitSet::stream_users(s);
                let rates: Vec<f64> = users.iter().map(|&i| sur.user_rate(s, i, &p_cur)).collect();
                let rmin = rates.iter().fold(f64::INFINITY, |a, &b| a.min(b));
                let rspread =
                    rates.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - rmin + 1e-12;
                let mut total = 0.0;
                for (&i, &r) in users.iter().zip(&rates) {
                    phi[s][i] *= (-1.0 * (r - rmin) / rspread).exp();
                    total += phi[s][i];
                }
                for &i in users {
                    phi[s][i] /= total;
                }
            }
        }
        if reached {
            t_lo = best_val;
        } else {
            t_hi = t_mid;
        }
    }
    best_p
}

fn weakest_user(csit: &CsitSet) -> usize {
    (0..4)
        .min_by(|&a, &b| norm2(&csit.h[a]).partial_cmp(&norm2(&csit.h[b])).unwrap())
        .unwrap()
}

fn cold_start(
    csit: &CsitSet,
    p_t: f64,
    mode: Mode,
    strategy: InitStrategy,
    seed: u64,
    index: usize,
) -> PrecoderSet {
    let n_tx = csit.n_tx();
    let active = mode.active();
    let n_active = active.iter().filter(|&&a| a).count();
    let per_stream = p_t / n_active as f64;
    let mut p = PrecoderSet::zeros(n_tx, mode);
    match strategy {
        InitStrategy::MrtWeakest => {
            let h = &csit.h[weakest_user(csit)];
            let scale = (per_stream / norm2(h)).sqrt();
            for s in 0..3 {
                if active[s] {
                    *p.column_mut(s) = h.iter().map(|v| v * scale).collect();
                }
            }
        }
        InitStrategy::MrtPerGroup => {
            let weakest_of = |users: &[usize]| {
                *users
                    .iter()
                    .min_by(|&&a, &&b| {
                        norm2(&csit.h[a]).partial_cmp(&norm2(&csit.h[b])).unwrap()
                    })
                    .unwrap()
            };
            for s in 0..3 {
                if active[s] {
                    let h = &csit.h[weakest_of(CsitSet::stream_users(s))];
                    let scale = (per_stream / norm2(h)).sqrt();
                    *p.column_mut(s) = h.iter().map(|v| v * scale).collect();
                }
            }
        }
        InitStrategy::RandomIsotropic => {
            let mut rng = rng_for(seed, &[Stream::SolverInit as u64, index as u64]);
            for s in 0..3 {
                if active[s] {
                    let dir: Vec<Complex64> =
                        (0..n_tx).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
                    let scale = (per_stream / norm2(&dir)).sqrt();
                    *p.column_mut(s) = dir.iter().map(|v| v * scale).collect();
                }
            }
        }
    }
    p
}

/// Runs the alternating optimization from one starting point.
fn solve_from(
    csit: &CsitSet,
    p_t: f64,
    sigma2: f64,
    mode: Mode,
    cfg: &SolverConfig,
    start: PrecoderSet,
) -> SolveResult {
    let mut p = start;
    p.project_to_power(p_t);
    let mut obj = mode_objective(mode, &stream_rates(csit, &p, sigma2));
    let mut objective_trace = vec![obj];
    let mut power_trace = vec![p.total_power()];
    let mut stable = 0usize;
    let mut converged = false;

    for _ in 0..cfg.max_outer_iters {
        let sur = Surrogate::at(csit, &p, sigma2, mode);
        let candidate = match cfg.inner_solver {
            InnerSolver::ProjectedSubgradient => inner_subgradient(&sur, &p, p_t),
            InnerSolver::BisectionSocpFree => inner_bisection(&sur, &p, p_t, cfg.epigraph_tol),
        };
        // Monotone safeguard: only move if the minorant improved.
        if sur.objective(&candidate) >= sur.objective(&p) {
            p = candidate;
        }
        let new_obj = mode_objective(mode, &stream_rates(csit, &p, sigma2));
        objective_trace.push(new_obj);
        power_trace.push(p.total_power());
        let rel = (new_obj - obj).abs() / new_obj.abs().max(1e-12);
        if rel < cfg.convergence_tol {
            stable += 1;
            if stable >= 3 {
                converged = true;
                obj = new_obj;
                break;
            }
        } else {
            stable = 0;
        }
        obj = new_obj;
    }
    let _ = obj;
    let rates = rate_report(csit, &p, sigma2);
    SolveResult { precoders: p, rates, objective_trace, power_trace, converged }
}

fn solve_mode(
    csit: &CsitSet,
    p_t: f64,
    sigma2: f64,
    mode: Mode,
    cfg: &SolverConfig,
    warm: Vec<PrecoderSet>,
) -> SolveResult {
    let mut starts: Vec<PrecoderSet> = Vec::new();
    for (idx, &strategy) in cfg.multistart.iter().enumerate() {
        starts.push(cold_start(csit, p_t, mode, strategy, cfg.seed, idx));
    }
    for mut w in warm {
        w.mode = mode;
        starts.push(w);
    }
    let results = crate::exec::indexed_map(starts.len(), |i| {
        solve_from(csit, p_t, sigma2, mode, cfg, starts[i].clone())
    });
    let mut best = results
        .into_iter()
        .max_by(|a, b| a.objective().partial_cmp(&b.objective()).unwrap())
        .expect("at least one start");

    // Perturbation restarts around the winner: cheap escape hatch from
    // shallow stationary points. The original result is kept unless a
    // restart strictly improves it.
    let active = mode.active();
    for hop in 0..3u64 {
        let mut rng = rng_for(cfg.seed, &[Stream::SolverInit as u64, 0x40 + hop]);
        let mut start = best.precoders.clone();
        for s in 0..3 {
            if !active[s] {
                continue;
            }
            let scale = (norm2(start.column(s)).sqrt() * 0.3).max(0.05 * p_t.sqrt());
            for v in start.column_mut(s).iter_mut() {
                *v += complex_gaussian(&mut rng, scale * scale);
            }
        }
        start.project_to_power(p_t);
        let hopped = solve_from(csit, p_t, sigma2, mode, cfg, start);
        if hopped.objective() > best.objective() {
            best = hopped;
        }
    }
    best
}

/// Solves the max-min fairness problem for `scheme`.
///
/// RSMA warm-starts from the converged SDMA and NOMA solutions (both
/// orderings), so its objective never lands below theirs. NOMA solves
/// both group orderings and keeps the better. Non-convergence is reported
/// through [`SolveResult::converged`], never as an error.
pub fn solve_maxmin(
    csit: &CsitSet,
    p_t: f64,
    sigma2: f64,
    scheme: Scheme,
    cfg: &SolverConfig,
) -> Result<SolveResult, PrecodingError> {
    if !(p_t > 0.0) {
        return Err(PrecodingError::NonPositive { name: "p_t" });
    }
    if !(sigma2 > 0.0) {
        return Err(PrecodingError::NonPositive { name: "sigma2" });
    }
    Ok(match scheme {
        Scheme::Sdma => solve_mode(csit, p_t, sigma2, Mode::Sdma, cfg, Vec::new()),
        Scheme::Noma => {
            let a = solve_mode(
                csit,
                p_t,
                sigma2,
                Mode::Noma { common_group: Group::G2 },
                cfg,
                Vec::new(),
            );
            let b = solve_mode(
                csit,
                p_t,
                sigma2,
                Mode::Noma { common_group: Group::G1 },
                cfg,
                Vec::new(),
            );
            if a.objective() >= b.objective() {
                a
            } else {
                b
            }
        }
        Scheme::Rsma => {
            let sdma = solve_mode(csit, p_t, sigma2, Mode::Sdma, cfg, Vec::new());
            let noma2 = solve_mode(
                csit,
                p_t,
                sigma2,
                Mode::Noma { common_group: Group::G2 },
                cfg,
                Vec::new(),
            );
            let noma1 = solve_mode(
                csit,
                p_t,
                sigma2,
                Mode::Noma { common_group: Group::G1 },
                cfg,
                Vec::new(),
            );
            let warm =
                vec![sdma.precoders.clone(), noma2.precoders.clone(), noma1.precoders.clone()];
            solve_mode(csit, p_t, sigma2, Mode::Rsma, cfg, warm)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;

    fn random_csit(seed: u64) -> CsitSet {
        let mut rng = rng_for(seed, &[0xD0]);
        CsitSet::new(std::array::from_fn(|_| {
            (0..2).map(|_| complex_gaussian(&mut rng, 1.0)).collect()
        }))
        .unwrap()
    }

    fn orthogonal_csit() -> CsitSet {
        let e1 = vec![Complex64::new(1.0, 0.0), Complex64::ZERO];
        let e2 = vec![Complex64::ZERO, Complex64::new(1.0, 0.0)];
        CsitSet::new([e1.clone(), e1, e2.clone(), e2]).unwrap()
    }

    #[test]
    fn sdma_orthogonal_matches_closed_form() {
        // Orthogonal equal-strength groups: the optimum serves each group
        // on its own axis with half the power and zero interference.
        let csit = orthogonal_csit();
        let (p_t, sigma2) = (2.0, 0.25);
        let cfg = SolverConfig::default();
        let res = solve_maxmin(&csit, p_t, sigma2, Scheme::Sdma, &cfg).unwrap();
        let want = (1.0 + (p_t / 2.0) / sigma2).log2();
        assert!(
            (res.objective() - want).abs() < 1e-4 * want,
            "objective {} vs closed form {want}",
            res.objective()
        );
        assert!(res.converged);
        assert!(res.precoders.mode_zeros_hold());
    }

    #[test]
    fn traces_monotone_and_power_feasible() {
        let (p_t, sigma2) = (1.0, 0.1);
        for seed in 0..8u64 {
            let csit = random_csit(seed);
            for inner in [InnerSolver::ProjectedSubgradient, InnerSolver::BisectionSocpFree] {
                let cfg = SolverConfig { inner_solver: inner, ..SolverConfig::default() };
                let res = solve_maxmin(&csit, p_t, sigma2, Scheme::Rsma, &cfg).unwrap();
                for pair in res.objective_trace.windows(2) {
                    assert!(
                        pair[1] >= pair[0] - cfg.epigraph_tol,
                        "seed {seed} {inner:?}: trace decreased {} -> {}",
                        pair[0],
                        pair[1]
                    );
                }
                for &pw in &res.power_trace {
                    assert!(pw <= p_t * (1.0 + 1e-9), "power violated: {pw}");
                }
            }
        }
    }

    #[test]
    fn rsma_dominates_special_cases() {
        let (p_t, sigma2) = (1.0, 0.05);
        for seed in 100..120u64 {
            let csit = random_csit(seed);
            let cfg = SolverConfig::default();
            let rsma = solve_maxmin(&csit, p_t, sigma2, Scheme::Rsma, &cfg).unwrap();
            let sdma = solve_maxmin(&csit, p_t, sigma2, Scheme::Sdma, &cfg).unwrap();
            let noma = solve_maxmin(&csit, p_t, sigma2, Scheme::Noma, &cfg).unwrap();
            let floor = sdma.objective().max(noma.objective()) - 1e-6;
            assert!(
                rsma.objective() >= floor,
                "seed {seed}: rsma {} below max(sdma {}, noma {})",
                rsma.objective(),
                sdma.objective(),
                noma.objective()
            );
        }
    }

    #[test]
    fn aligned_channels_put_power_on_common() {
        // Fully aligned groups: interference cannot be nulled, so the
        // common stream should carry nearly all the power.
        let h = vec![Complex64::new(1.0, 0.2), Complex64::new(0.4, -0.6)];
        let csit = CsitSet::new([h.clone(), h.clone(), h.clone(), h]).unwrap();
        let res =
            solve_maxmin(&csit, 1.0, 1e-3, Scheme::Rsma, &SolverConfig::default()).unwrap();
        let frac = res.precoders.power_fractions();
        assert!(frac[0] >= 0.9, "common power fraction {} below 0.9", frac[0]);
    }

    #[test]
    fn mode_constraints_exact_zero() {
        let csit = random_csit(7);
        let cfg = SolverConfig::default();
        let sdma = solve_maxmin(&csit, 1.0, 0.1, Scheme::Sdma, &cfg).unwrap();
        assert!(sdma.precoders.p_c.iter().all(|&v| v == Complex64::ZERO));
        let noma = solve_maxmin(&csit, 1.0, 0.1, Scheme::Noma, &cfg).unwrap();
        assert!(noma.precoders.mode_zeros_hold());
        match noma.precoders.mode {
            Mode::Noma { common_group } => {
                let off = noma.precoders.private(common_group);
                assert!(off.iter().all(|&v| v == Complex64::ZERO));
            }
            other => panic!("expected NOMA mode, got {other:?}"),
        }
    }

    #[test]
    fn sdma_solution_evaluates_identically_under_rsma() {
        let csit = random_csit(55);
        let cfg = SolverConfig::default();
        let sdma = solve_maxmin(&csit, 1.0, 0.2, Scheme::Sdma, &cfg).unwrap();
        let mut as_rsma = sdma.precoders.clone();
        as_rsma.mode = Mode::Rsma;
        let report = rate_report(&csit, &as_rsma, 0.2);
        assert!((report.min_net() - sdma.objective()).abs() < 1e-12);
    }
}
