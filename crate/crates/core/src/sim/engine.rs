//! Parallel trial runner with mergeable counts.
//!
//! Trial `i` draws from `ChaCha8Rng::seed_from_u64(seed)` switched to stream
//! `i`, so any partition of the trial range into shards gives the same
//! counts. Importance weights are accumulated in 64.64 fixed point so that
//! merging is exact integer addition.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::channel::{sample_channel, ChannelConfig, Sampling, SimScenario};
use super::protocol::{run_trial, ArqTrialOutcome, ProtocolConfig};
use super::stats::{estimate_slope, wilson, SlopeEstimate, SlopePoint, Z95};
use crate::analytic;
use crate::error::{Error, Result};

const FIXED_ONE: f64 = 18_446_744_073_709_551_616.0; // 2^64
const CHUNK: u64 = 1 << 14;

fn to_fixed(w: f64) -> u128 {
    (w * FIXED_ONE).round() as u128
}

fn from_fixed(x: u128) -> f64 {
    x as f64 / FIXED_ONE
}

/// Sufficient statistics of a batch of trials.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub n: u64,
    pub errors: u64,
    pub user_errors: [u64; 2],
    pub rounds_sum: u64,
    /// `beyond[l - 1]` counts trials with `rounds_used > l`, `l < L`.
    pub beyond: Vec<u64>,
    pub error_weight: u128,
    pub error_weight_sq: u128,
    pub beyond_weight: Vec<u128>,
    pub beyond_weight_sq: Vec<u128>,
}

impl Counts {
    pub fn new(l: u32) -> Self {
        let k = l.saturating_sub(1) as usize;
        Counts {
            beyond: vec![0; k],
            beyond_weight: vec![0; k],
            beyond_weight_sq: vec![0; k],
            ..Default::default()
        }
    }

    pub fn record(&mut self, out: &ArqTrialOutcome, weight: f64) {
        let w = to_fixed(weight);
        let w2 = to_fixed(weight * weight);
        self.n += 1;
        self.rounds_sum += out.rounds_used as u64;
        if out.error {
            self.errors += 1;
            self.error_weight += w;
            self.error_weight_sq += w2;
        }
        for (k, e) in out.user_errors.iter().enumerate() {
            self.user_errors[k] += *e as u64;
        }
        for l in 1..out.rounds_used as usize {
            self.beyond[l - 1] += 1;
            self.beyond_weight[l - 1] += w;
            self.beyond_weight_sq[l - 1] += w2;
        }
    }

    pub fn merge(&mut self, o: &Counts) {
        self.n += o.n;
        self.errors += o.errors;
        self.user_errors[0] += o.user_errors[0];
        self.user_errors[1] += o.user_errors[1];
        self.rounds_sum += o.rounds_sum;
        self.error_weight += o.error_weight;
        self.error_weight_sq += o.error_weight_sq;
        for k in 0..self.beyond.len() {
            self.beyond[k] += o.beyond[k];
            self.beyond_weight[k] += o.beyond_weight[k];
            self.beyond_weight_sq[k] += o.beyond_weight_sq[k];
        }
    }

    /// `sum rounds_used = n + sum_l #(rounds_used > l)`.
    pub fn accounting_holds(&self) -> bool {
        self.rounds_sum == self.n + self.beyond.iter().sum::<u64>()
    }
}

/// Complete description of one Monte Carlo campaign.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub scenario: SimScenario,
    #[serde(rename = "L")]
    pub l: u32,
    pub r1: f64,
    pub snr_db_list: Vec<f64>,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(rename = "T", default = "default_t")]
    pub t: u32,
    /// Trials per SNR point before adaptive extension.
    pub n_trials: u64,
    /// Extension stops here; `None` means no extension.
    #[serde(default)]
    pub max_trials: Option<u64>,
    #[serde(default = "default_min_events")]
    pub min_events: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_sampling")]
    pub sampling: Sampling,
}

fn default_c() -> f64 {
    1.0
}
fn default_t() -> u32 {
    100
}
fn default_min_events() -> u64 {
    50
}
fn default_sampling() -> Sampling {
    Sampling::Plain
}

impl SimConfig {
    pub fn protocol(&self) -> Result<ProtocolConfig> {
        ProtocolConfig::new(self.scenario, self.l, self.r1, self.t)
    }

    pub fn channel(&self, snr_db: f64) -> Result<ChannelConfig> {
        ChannelConfig::new(self.scenario, snr_db, self.c)
    }

    pub fn validate(&self) -> Result<()> {
        self.protocol()?;
        self.sampling.validate()?;
        if self.n_trials == 0 {
            return Err(Error::InvalidArgument("n_trials must be at least 1".into()));
        }
        if self.snr_db_list.is_empty() {
            return Err(Error::InvalidArgument("snr_db_list is empty".into()));
        }
        for &s in &self.snr_db_list {
            self.channel(s)?;
        }
        if let Some(m) = self.max_trials {
            if m < self.n_trials {
                return Err(Error::InvalidArgument("max_trials is below n_trials".into()));
            }
        }
        Ok(())
    }

    /// Asymptotic exponent the error slope should approach, where one is
    /// known. Long-term static ARQ with `L` rounds behaves like the
    /// single-round scheme at rate `r1 / L`.
    pub fn analytic_d(&self) -> Option<f64> {
        let per_round = self.r1 / self.l as f64;
        match self.scenario {
            SimScenario::Relay => analytic::ddf_relay_dmt(per_round).ok(),
            SimScenario::Mar => analytic::ddf_mar_lower(per_round).ok(),
            SimScenario::Cvma => analytic::cvma_ddf_lower_general(self.r1, self.l).ok(),
        }
    }
}

/// Runs trials `start..end` at one SNR.
pub fn run_range(
    seed: u64,
    start: u64,
    end: u64,
    proto: &ProtocolConfig,
    chan: &ChannelConfig,
    sampling: &Sampling,
) -> Counts {
    let base = ChaCha8Rng::seed_from_u64(seed);
    let chunks: Vec<(u64, u64)> = (start..end)
        .step_by(CHUNK as usize)
        .map(|a| (a, (a + CHUNK).min(end)))
        .collect();
    chunks
        .par_iter()
        .map(|&(a, b)| {
            let mut counts = Counts::new(proto.l);
            for i in a..b {
                let mut rng = base.clone();
                rng.set_stream(i);
                let (draw, w) = sample_channel(chan, sampling, &mut rng);
                counts.record(&run_trial(&draw, proto, chan), w);
            }
            counts
        })
        .reduce(
            || Counts::new(proto.l),
            |mut a, b| {
                a.merge(&b);
                a
            },
        )
}

/// Shard `index` of `count` equal slices of `0..n`.
pub fn run_shard(
    cfg: &SimConfig,
    snr_db: f64,
    index: u64,
    count: u64,
    n: u64,
) -> Result<Counts> {
    if count == 0 || index >= count {
        return Err(Error::InvalidArgument(format!("shard {index} of {count}")));
    }
    let a = n * index / count;
    let b = n * (index + 1) / count;
    Ok(run_range(cfg.seed, a, b, &cfg.protocol()?, &cfg.channel(snr_db)?, &cfg.sampling))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointEstimate {
    pub snr_db: f64,
    pub pe: f64,
    pub pe_lo: f64,
    pub pe_hi: f64,
    pub pe_std: f64,
    /// Average throughput in bits per channel use.
    pub eta: f64,
    /// `p(l)` for `l = 1..L-1`.
    pub p: Vec<f64>,
    pub p_std: Vec<f64>,
    pub counts: Counts,
}

fn weighted_mean_std(sum: u128, sum_sq: u128, n: u64) -> (f64, f64) {
    let nf = n as f64;
    let m = from_fixed(sum) / nf;
    let var = (from_fixed(sum_sq) / nf - m * m).max(0.0);
    (m, (var / nf).sqrt())
}

impl PointEstimate {
    pub fn from_counts(snr_db: f64, counts: Counts, proto: &ProtocolConfig, sampling: &Sampling) -> Self {
        let n = counts.n;
        let (pe, pe_std) = weighted_mean_std(counts.error_weight, counts.error_weight_sq, n);
        let (pe_lo, pe_hi) = if sampling.is_importance() {
            ((pe - Z95 * pe_std).max(0.0), pe + Z95 * pe_std)
        } else {
            wilson(counts.errors, n, Z95)
        };
        let (p, p_std): (Vec<f64>, Vec<f64>) = counts
            .beyond_weight
            .iter()
            .zip(&counts.beyond_weight_sq)
            .map(|(&s, &s2)| weighted_mean_std(s, s2, n))
            .unzip();
        let rho = 10f64.powf(snr_db / 10.0);
        let eta = proto.rate_bits(rho) / (1.0 + p.iter().sum::<f64>());
        PointEstimate {
            snr_db,
            pe,
            pe_lo,
            pe_hi,
            pe_std,
            eta,
            p,
            p_std,
            counts,
        }
    }

    pub fn slope_point(&self) -> SlopePoint {
        SlopePoint {
            snr_db: self.snr_db,
            p: self.pe,
            std_err: self.pe_std,
            events: self.counts.errors,
        }
    }
}

/// One SNR point, extended by doubling until `min_events` errors are seen or
/// `max_trials` is reached.
pub fn run_point(cfg: &SimConfig, snr_db: f64) -> Result<PointEstimate> {
    let proto = cfg.protocol()?;
    let chan = cfg.channel(snr_db)?;
    let mut n = cfg.n_trials;
    let mut counts = run_range(cfg.seed, 0, n, &proto, &chan, &cfg.sampling);
    let max = cfg.max_trials.unwrap_or(cfg.n_trials);
    while counts.errors < cfg.min_events && n < max {
        let next = n.saturating_mul(2).min(max);
        counts.merge(&run_range(cfg.seed, n, next, &proto, &chan, &cfg.sampling));
        n = next;
    }
    debug_assert!(counts.accounting_holds());
    Ok(PointEstimate::from_counts(snr_db, counts, &proto, &cfg.sampling))
}

/// Every SNR point of the campaign, sharing random numbers across points.
pub fn run_trials(cfg: &SimConfig) -> Result<Vec<PointEstimate>> {
    cfg.validate()?;
    cfg.snr_db_list.iter().map(|&s| run_point(cfg, s)).collect()
}

pub fn slope_of(points: &[PointEstimate], min_events: u64) -> Result<SlopeEstimate> {
    let pts: Vec<SlopePoint> = points.iter().map(PointEstimate::slope_point).collect();
    estimate_slope(&pts, min_events)
}

fn fmt(x: f64) -> String {
    format!("{x:.6e}")
}

/// `snr_db,pe,pe_lo,pe_hi,eta,p1,...,p[L-1],n_trials,errors`
pub fn write_sim_csv<W: Write>(out: W, l: u32, points: &[PointEstimate]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["snr_db", "pe", "pe_lo", "pe_hi", "eta"].map(String::from).to_vec();
    header.extend((1..l).map(|k| format!("p{k}")));
    header.extend(["n_trials", "errors"].map(String::from));
    w.write_record(&header)?;
    for p in points {
        let mut rec = vec![
            format!("{}", p.snr_db),
            fmt(p.pe),
            fmt(p.pe_lo),
            fmt(p.pe_hi),
            fmt(p.eta),
        ];
        rec.extend(p.p.iter().map(|&x| fmt(x)));
        rec.push(p.counts.n.to_string());
        rec.push(p.counts.errors.to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeRow {
    pub scenario: String,
    #[serde(rename = "L")]
    pub l: u32,
    pub r1: f64,
    pub slope: f64,
    pub ci95: f64,
    pub analytic_d: Option<f64>,
}

/// `scenario,L,r1,slope,ci95,analytic_d`
pub fn write_slope_csv<W: Write>(out: W, rows: &[SlopeRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}
