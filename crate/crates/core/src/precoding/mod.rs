//! Max-min fair precoder design for two-group multicast.
//!
//! Three streams share the transmit array: a common stream decoded by all
//! four users and one private stream per group. SDMA and NOMA are the
//! zero-constrained special cases (common stream off, respectively one
//! private stream off). The solver is a weighted-MMSE alternating
//! optimization with a safeguarded inner step and multistart; an
//! exhaustive grid search over two-antenna precoders serves as the
//! independent check.

pub mod grid;
pub mod rates;
pub mod wmmse;

use crate::allocation::CommonSplit;
use crate::scenario::WidebandCsit;
use crate::util::norm2;
use crate::{Group, Scheme};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use grid::grid_oracle_maxmin;
pub use rates::{
    common_rate, common_rate_group, mode_objective, private_rate_group, rate_report,
    stream_rates, RateReport, StreamRates,
};
pub use wmmse::{solve_maxmin, InitStrategy, InnerSolver, SolveResult, SolverConfig};

#[derive(Debug, Error, PartialEq)]
pub enum PrecodingError {
    #[error("the grid oracle supports exactly 2 TX antennas, got {0}")]
    OracleAntennaCount(usize),
    #[error("expected CSIT for 4 users, got {0}")]
    CsitCount(usize),
    #[error("CSIT vectors must share one antenna count")]
    CsitShape,
    #[error("{name} must be strictly positive")]
    NonPositive { name: &'static str },
    #[error("grid resolution must be at least 2")]
    BadResolution,
}

/// Stream indices used throughout this module: common, private 1, private 2.
pub const STREAM_C: usize = 0;
pub const STREAM_P1: usize = 1;
pub const STREAM_P2: usize = 2;

/// Operating mode; NOMA records which group's message rides the common
/// stream (that group's private stream is off).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Rsma,
    Sdma,
    Noma { common_group: Group },
}

impl Mode {
    pub fn scheme(self) -> Scheme {
        match self {
            Mode::Rsma => Scheme::Rsma,
            Mode::Sdma => Scheme::Sdma,
            Mode::Noma { .. } => Scheme::Noma,
        }
    }

    /// Which of [common, private1, private2] carry power in this mode.
    pub fn active(self) -> [bool; 3] {
        match self {
            Mode::Rsma => [true, true, true],
            Mode::Sdma => [false, true, true],
            Mode::Noma { common_group } => {
                [true, common_group != Group::G1, common_group != Group::G2]
            }
        }
    }

    /// The fixed common split implied by the mode, if any (RSMA chooses
    /// its split from the rates instead).
    pub fn fixed_split(self) -> Option<CommonSplit> {
        match self {
            Mode::Rsma => None,
            Mode::Sdma => Some(CommonSplit::EVEN),
            Mode::Noma { common_group } => Some(CommonSplit::all_to(common_group)),
        }
    }
}

/// Wideband CSIT for all four users, ordered (g1u1, g1u2, g2u1, g2u2).
#[derive(Debug, Clone, PartialEq)]
pub struct CsitSet {
    pub h: [Vec<Complex64>; 4],
}

impl CsitSet {
    pub fn new(users: [Vec<Complex64>; 4]) -> Result<Self, PrecodingError> {
        let n = users[0].len();
        if users.iter().any(|u| u.len() != n) || n == 0 {
            return Err(PrecodingError::CsitShape);
        }
        Ok(CsitSet { h: users })
    }

    pub fn from_wideband(csit: &[WidebandCsit]) -> Result<Self, PrecodingError> {
        if csit.len() != 4 {
            return Err(PrecodingError::CsitCount(csit.len()));
        }
        Self::new([
            csit[0].h_hat.clone(),
            csit[1].h_hat.clone(),
            csit[2].h_hat.clone(),
            csit[3].h_hat.clone(),
        ])
    }

    pub fn n_tx(&self) -> usize {
        self.h[0].len()
    }

    /// Flat user indices belonging to `g` (0,1 for group 1; 2,3 for 2).
    pub fn group_users(g: Group) -> [usize; 2] {
        match g {
            Group::G1 => [0, 1],
            Group::G2 => [2, 3],
        }
    }

    /// Users that must decode stream `s`.
    pub fn stream_users(s: usize) -> &'static [usize] {
        match s {
            STREAM_C => &[0, 1, 2, 3],
            STREAM_P1 => &[0, 1],
            STREAM_P2 => &[2, 3],
            _ => unreachable!(),
        }
    }
}

/// The precoder matrix `[p_c, p_1, p_2]` plus the mode it was designed
/// for. Columns of inactive streams are exactly zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecoderSet {
    pub p_c: Vec<Complex64>,
    pub p_1: Vec<Complex64>,
    pub p_2: Vec<Complex64>,
    pub mode: Mode,
}

impl PrecoderSet {
    pub fn zeros(n_tx: usize, mode: Mode) -> Self {
        PrecoderSet {
            p_c: vec![Complex64::ZERO; n_tx],
            p_1: vec![Complex64::ZERO; n_tx],
            p_2: vec![Complex64::ZERO; n_tx],
            mode,
        }
    }

    pub fn column(&self, s: usize) -> &[Complex64] {
        match s {
            STREAM_C => &self.p_c,
            STREAM_P1 => &self.p_1,
            STREAM_P2 => &self.p_2,
            _ => unreachable!(),
        }
    }

    pub fn column_mut(&mut self, s: usize) -> &mut Vec<Complex64> {
        match s {
            STREAM_C => &mut self.p_c,
            STREAM_P1 => &mut self.p_1,
            STREAM_P2 => &mut self.p_2,
            _ => unreachable!(),
        }
    }

    pub fn private(&self, g: Group) -> &[Complex64] {
        match g {
            Group::G1 => &self.p_1,
            Group::G2 => &self.p_2,
        }
    }

    /// `trace(P P^H)`.
    pub fn total_power(&self) -> f64 {
        norm2(&self.p_c) + norm2(&self.p_1) + norm2(&self.p_2)
    }

    /// Scales everything down to the power budget if necessary.
    pub fn project_to_power(&mut self, p_t: f64) {
        let pw = self.total_power();
        if pw > p_t {
            let s = (p_t / pw).sqrt();
            for col in [&mut self.p_c, &mut self.p_1, &mut self.p_2] {
                for v in col.iter_mut() {
                    *v *= s;
                }
            }
        }
    }

    /// Checks the mode's structural zero constraints exactly.
    pub fn mode_zeros_hold(&self) -> bool {
        let active = self.mode.active();
        (0..3).all(|s| active[s] || self.column(s).iter().all(|&v| v == Complex64::ZERO))
    }

    /// Power split over the three streams, normalized by total power.
    pub fn power_fractions(&self) -> [f64; 3] {
        let total = self.total_power();
        if total == 0.0 {
            return [0.0; 3];
        }
        [norm2(&self.p_c) / total, norm2(&self.p_1) / total, norm2(&self.p_2) / total]
    }
}
