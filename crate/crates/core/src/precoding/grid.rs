//! Exhaustive grid oracle for two-antenna instances.
//!
//! Unit-norm 2-vectors are parameterized by two angles,
//! `[cos(theta), sin(theta) e^{j phi}]` (the global phase is irrelevant to
//! every rate), gridded `resolution` points per angle; the full power
//! budget is split over the active streams on a simplex grid of the same
//! resolution. Doubling the resolution yields a superset grid, so the
//! oracle objective can only improve.

use super::rates::{rate_report, RateReport};
use super::{CsitSet, Mode, PrecoderSet, PrecodingError};
use crate::exec::indexed_map;
use crate::util::dot_h;
use num_complex::Complex64;
use std::f64::consts::PI;

fn directions(resolution: usize) -> Vec<Vec<Complex64>> {
    let mut dirs = Vec::with_capacity(resolution * resolution);
    for i in 0..resolution {
        let theta = (i as f64) * (PI / 2.0) / resolution as f64;
        for j in 0..resolution {
            let phi = (j as f64) * 2.0 * PI / resolution as f64;
            dirs.push(vec![
                Complex64::new(theta.cos(), 0.0),
                Complex64::from_polar(theta.sin(), phi),
            ]);
        }
    }
    dirs
}

/// Power splits over `n_active` streams summing exactly to 1, with
/// `resolution` steps per axis.
fn splits(n_active: usize, resolution: usize) -> Vec<Vec<f64>> {
    let r = resolution;
    let mut out = Vec::new();
    match n_active {
        2 => {
            for i in 0..=r {
                out.push(vec![i as f64 / r as f64, (r - i) as f64 / r as f64]);
            }
        }
        3 => {
            for i in 0..=r {
                for j in 0..=(r - i) {
                    out.push(vec![
                        i as f64 / r as f64,
                        j as f64 / r as f64,
                        (r - i - j) as f64 / r as f64,
                    ]);
                }
            }
        }
        _ => unreachable!("modes have 2 or 3 active streams"),
    }
    out
}

/// Monotone surrogate of the mode objective from per-stream min-SINRs;
/// avoids logs in the hot loop. `s` entries follow [common, p1, p2] with
/// inactive streams at 0.
fn surrogate(mode: Mode, s: [f64; 3]) -> f64 {
    match mode {
        // min over both private mins.
        Mode::Sdma => s[1].min(s[2]),
        // min over the surviving private and the common stream.
        Mode::Noma { common_group } => {
            let private = if common_group == crate::Group::G1 { s[2] } else { s[1] };
            private.min(s[0])
        }
        // min((1+c)(1+p1)(1+p2), ((1+p1)(1+c))^2, ((1+p2)(1+c))^2):
        // the squared comparison mirrors the 1/2 weight on the
        // equalizing-split row.
        Mode::Rsma => {
            let a = (1.0 + s[0]) * (1.0 + s[1]) * (1.0 + s[2]);
            let b = (1.0 + s[1]) * (1.0 + s[0]);
            let c = (1.0 + s[2]) * (1.0 + s[0]);
            a.min(b * b).min(c * c)
        }
    }
}

/// Exhaustively searches precoder directions and power splits for the
/// best max-min objective of `mode`. Only two TX antennas are supported.
pub fn grid_oracle_maxmin(
    csit: &CsitSet,
    p_t: f64,
    sigma2: f64,
    mode: Mode,
    resolution: usize,
) -> Result<(PrecoderSet, RateReport), PrecodingError> {
    if csit.n_tx() != 2 {
        return Err(PrecodingError::OracleAntennaCount(csit.n_tx()));
    }
    if !(p_t > 0.0) {
        return Err(PrecodingError::NonPositive { name: "p_t" });
    }
    if !(sigma2 > 0.0) {
        return Err(PrecodingError::NonPositive { name: "sigma2" });
    }
    if resolution < 2 {
        return Err(PrecodingError::BadResolution);
    }

    let active: Vec<usize> =
        mode.active().into_iter().enumerate().filter(|&(_, a)| a).map(|(s, _)| s).collect();
    let dirs = directions(resolution);
    let n_dirs = dirs.len();
    // Precomputed |h_u^H d|^2 lookup.
    let gains: Vec<[f64; 4]> = dirs
        .iter()
        .map(|d| std::array::from_fn(|u| dot_h(&csit.h[u], d).norm_sqr()))
        .collect();
    let power_splits = splits(active.len(), resolution);

    // One task per direction assignment of the first active stream.
    let per_first = indexed_map(n_dirs, |d0| {
        let mut best = (f64::NEG_INFINITY, vec![0usize; active.len()], 0usize);
        let mut assign = vec![0usize; active.len()];
        assign[0] = d0;
        search_rest(
            1,
            &mut assign,
            n_dirs,
            &gains,
            &power_splits,
            sigma2,
            p_t,
            mode,
            &active,
            &mut best,
        );
        best
    });
    let mut best = (f64::NEG_INFINITY, vec![0usize; active.len()], 0usize);
    for cand in per_first {
        if cand.0 > best.0 {
            best = cand;
        }
    }

    let mut precoders = PrecoderSet::zeros(2, mode);
    let split = &power_splits[best.2];
    for (slot, &s) in active.iter().enumerate() {
        let beta = split[slot] * p_t;
        *precoders.column_mut(s) =
            dirs[best.1[slot]].iter().map(|v| v * beta.sqrt()).collect();
    }
    let report = rate_report(csit, &precoders, sigma2);
    Ok((precoders, report))
}

#[allow(clippy::too_many_arguments)]
fn search_rest(
    depth: usize,
    assign: &mut Vec<usize>,
    n_dirs: usize,
    gains: &[[f64; 4]],
    power_splits: &[Vec<f64>],
    sigma2: f64,
    p_t: f64,
    mode: Mode,
    active: &[usize],
    best: &mut (f64, Vec<usize>, usize),
) {
    if depth == active.len() {
        for (split_idx, split) in power_splits.iter().enumerate() {
            // Per-user received power of each stream slot.
            let mut stream_power = [[0.0f64; 4]; 3];
            for (slot, &s) in active.iter().enumerate() {
                let beta = split[slot] * p_t;
                let g = &gains[assign[slot]];
                for u in 0..4 {
                    stream_power[s][u] = beta * g[u];
                }
            }
            let mut sinr_min = [0.0f64; 3];
            for &s in active {
                let mut worst = f64::INFINITY;
                for &u in CsitSet::stream_users(s) {
                    let interference: f64 = match s {
                        super::STREAM_C => stream_power[1][u] + stream_power[2][u],
                        super::STREAM_P1 => stream_power[2][u],
                        super::STREAM_P2 => stream_power[1][u],
                        _ => unreachable!(),
                    };
                    worst = worst.min(stream_power[s][u] / (sigma2 + interference));
                }
                sinr_min[s] = worst;
            }
            let val = surrogate(mode, sinr_min);
            if val > best.0 {
                *best = (val, assign.clone(), split_idx);
            }
        }
        return;
    }
    for d in 0..n_dirs {
        assign[depth] = d;
        search_rest(
            depth + 1,
            assign,
            n_dirs,
            gains,
            power_splits,
            sigma2,
            p_t,
            mode,
            active,
            best,
        );
    }
}
