//! Random Gaussian codebooks with literal bounded-distance ARQ decoding.
//!
//! Symbols have unit energy and the destination noise variance is
//! `1/rho`. A message is accepted in round `l` iff it is the only one whose
//! signature lies within `l T (1 + delta) sigma^2` of the received prefix;
//! the last round falls back to ML.

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::protocol::label_cvma;

pub const MAX_MESSAGES: u32 = 1 << 10;
pub const MAX_T: u32 = 512;
/// Complex entries per codebook.
pub const MAX_CODEBOOK_ENTRIES: u64 = 1 << 21;
const CODEBOOK_STREAM: u64 = u64::MAX;
const CHUNK: u64 = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabScenario {
    Relay,
    /// Two sources with `sqrt(M)` messages each, decoded as one joint message.
    MarJoint,
    /// Superior-user acceptance on one antenna, the inferior user acting as
    /// interference.
    CvmaSuperior,
}

impl LabScenario {
    pub fn name(self) -> &'static str {
        match self {
            LabScenario::Relay => "relay",
            LabScenario::MarJoint => "mar_joint",
            LabScenario::CvmaSuperior => "cvma_superior",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabConfig {
    pub scenario: LabScenario,
    #[serde(rename = "L")]
    pub l: u32,
    #[serde(rename = "T")]
    pub t: u32,
    #[serde(rename = "M")]
    pub m: u32,
    #[serde(default = "default_delta")]
    pub delta: f64,
    pub snr_db: f64,
    /// Destination-to-relay noise variance ratio.
    #[serde(default = "default_c")]
    pub c: f64,
    pub n_trials: u64,
    #[serde(default)]
    pub seed: u64,
}

fn default_delta() -> f64 {
    0.2
}
fn default_c() -> f64 {
    1.0
}

impl LabConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l == 0 || self.l > 16 {
            return Err(Error::InvalidArgument(format!("L = {} must be in 1..=16", self.l)));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::domain("delta", self.delta, "(0, inf)"));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::domain("snr_db", self.snr_db, "finite"));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::domain("noise ratio c", self.c, "(0, inf)"));
        }
        if self.m < 2 || self.t == 0 || self.n_trials == 0 {
            return Err(Error::InvalidArgument("need M >= 2, T >= 1 and n_trials >= 1".into()));
        }
        if self.m > MAX_MESSAGES || self.t > MAX_T {
            return Err(Error::ResourceGuard(format!(
                "M = {} and T = {} exceed the limits M <= {MAX_MESSAGES}, T <= {MAX_T}",
                self.m, self.t
            )));
        }
        let entries = self.m as u64 * self.l as u64 * self.t as u64;
        if entries > MAX_CODEBOOK_ENTRIES {
            return Err(Error::ResourceGuard(format!(
                "codebook of {entries} symbols exceeds {MAX_CODEBOOK_ENTRIES}"
            )));
        }
        if self.scenario == LabScenario::MarJoint && side(self.m).is_none() {
            return Err(Error::InvalidArgument(format!(
                "the joint MAR lab needs a square M, got {}",
                self.m
            )));
        }
        Ok(())
    }

    pub fn rho(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    pub fn sigma2(&self) -> f64 {
        1.0 / self.rho()
    }

    /// `log2(M) / T` bits per symbol.
    pub fn rate_bits(&self) -> f64 {
        (self.m as f64).log2() / self.t as f64
    }

    fn len(&self) -> usize {
        (self.l * self.t) as usize
    }
}

fn side(m: u32) -> Option<u32> {
    let s = (m as f64).sqrt().round() as u32;
    (s * s == m).then_some(s)
}

fn cn<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// `rows x len` i.i.d. `CN(0, 1)` entries, row-major.
#[derive(Clone, Debug)]
pub struct Codebook {
    pub rows: usize,
    pub len: usize,
    pub data: Vec<Complex64>,
}

impl Codebook {
    pub fn random<R: Rng + ?Sized>(rows: usize, len: usize, rng: &mut R) -> Self {
        Codebook {
            rows,
            len,
            data: (0..rows * len).map(|_| cn(rng, 1.0)).collect(),
        }
    }

    pub fn row(&self, m: usize) -> &[Complex64] {
        &self.data[m * self.len..(m + 1) * self.len]
    }

    pub fn mean_energy(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.data.len() as f64
    }
}

/// Relay-channel signatures: `g_sd x_s(m)` before the relay switches at
/// `switch`, plus `g_rd x_r(m)` from there on.
pub fn build_relay_signatures(
    xs: &Codebook,
    xr: &Codebook,
    g_sd: Complex64,
    g_rd: Complex64,
    switch: usize,
) -> Vec<Vec<Complex64>> {
    (0..xs.rows)
        .map(|m| {
            xs.row(m)
                .iter()
                .zip(xr.row(m))
                .enumerate()
                .map(|(k, (&a, &b))| if k < switch { g_sd * a } else { g_sd * a + g_rd * b })
                .collect()
        })
        .collect()
}

fn dist2(y: &[Complex64], s: &[Complex64]) -> f64 {
    y.iter().zip(s).map(|(a, b)| (a - b).norm_sqr()).sum()
}

/// Minimum-distance message over the common prefix; ties go to the lowest
/// index.
pub fn ml_decode(y: &[Complex64], signatures: &[Vec<Complex64>]) -> usize {
    let n = y.len();
    let mut best = (0, f64::INFINITY);
    for (m, s) in signatures.iter().enumerate() {
        let d = dist2(y, &s[..n]);
        if d < best.1 {
            best = (m, d);
        }
    }
    best.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Accept(usize),
    /// `inside` signatures fell in the sphere (0 or at least 2).
    Reject { inside: usize },
}

/// Accepts the unique message within `radius` (squared distance) of `y`.
pub fn bounded_distance_accept(y: &[Complex64], signatures: &[Vec<Complex64>], radius: f64) -> Decision {
    let n = y.len();
    let mut inside = 0;
    let mut which = 0;
    for (m, s) in signatures.iter().enumerate() {
        if dist2(y, &s[..n]) <= radius {
            inside += 1;
            which = m;
        }
    }
    if inside == 1 {
        Decision::Accept(which)
    } else {
        Decision::Reject { inside }
    }
}

/// Mergeable lab tallies.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LabCounts {
    pub n: u64,
    /// First accept in round `l`, index `l - 1`.
    pub accept: Vec<u64>,
    /// Accepted a wrong message in some round.
    pub undetected: u64,
    /// No accept before the last round and the ML decision there is wrong.
    pub final_err: u64,
    /// Unconditional rejects and ML errors in rounds `l < L`.
    pub reject_early: u64,
    pub ml_err_early: u64,
    pub relay_errors: u64,
    pub sphere_violations: u64,
    pub noise_violations: u64,
}

impl LabCounts {
    fn new(l: u32) -> Self {
        LabCounts {
            accept: vec![0; l as usize],
            ..Default::default()
        }
    }

    pub fn merge(&mut self, o: &LabCounts) {
        self.n += o.n;
        for (a, b) in self.accept.iter_mut().zip(&o.accept) {
            *a += b;
        }
        self.undetected += o.undetected;
        self.final_err += o.final_err;
        self.reject_early += o.reject_early;
        self.ml_err_early += o.ml_err_early;
        self.relay_errors += o.relay_errors;
        self.sphere_violations += o.sphere_violations;
        self.noise_violations += o.noise_violations;
    }
}

struct Books {
    /// Relay: source; MAR: source 1; CVMA: user 0.
    a: Codebook,
    /// Relay: relay; MAR: source 2; CVMA: user 1.
    b: Codebook,
    /// MAR relay codebook over joint messages.
    r: Option<Codebook>,
}

fn make_books(cfg: &LabConfig) -> Books {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(CODEBOOK_STREAM);
    let (m, n) = (cfg.m as usize, cfg.len());
    match cfg.scenario {
        LabScenario::Relay | LabScenario::CvmaSuperior => Books {
            a: Codebook::random(m, n, &mut rng),
            b: Codebook::random(m, n, &mut rng),
            r: None,
        },
        LabScenario::MarJoint => {
            let s = side(cfg.m).expect("validated") as usize;
            Books {
                a: Codebook::random(s, n, &mut rng),
                b: Codebook::random(s, n, &mut rng),
                r: Some(Codebook::random(m, n, &mut rng)),
            }
        }
    }
}

/// Symbols needed to push `bits` through a link of capacity `cap`.
fn listen_symbols(bits: f64, cap: f64) -> usize {
    if cap <= 0.0 {
        usize::MAX
    } else {
        (bits / cap).ceil().min(usize::MAX as f64 / 2.0) as usize
    }
}

/// Everything a trial needs for the destination side.
struct TrialSetup {
    y: Vec<Complex64>,
    signatures: Vec<Vec<Complex64>>,
    truth: usize,
    /// Per-symbol variance of what the sphere test treats as noise.
    noise_level: f64,
    /// Whether `y - s(truth)` is pure destination noise.
    clean: bool,
    relay_error: bool,
}

fn relay_setup<R: Rng>(cfg: &LabConfig, books: &Books, rng: &mut R) -> TrialSetup {
    let (n, sigma2) = (cfg.len(), cfg.sigma2());
    let truth = rng.random_range(0..cfg.m as usize);
    let (g_sd, g_sr, g_rd) = (cn(rng, 1.0), cn(rng, 1.0), cn(rng, 1.0));
    let relay_noise: Vec<Complex64> = (0..n).map(|_| cn(rng, sigma2 / cfg.c)).collect();
    let noise: Vec<Complex64> = (0..n).map(|_| cn(rng, sigma2)).collect();

    let bits = cfg.t as f64 * cfg.rate_bits();
    let switch = listen_symbols(bits, (1.0 + cfg.c * cfg.rho() * g_sr.norm_sqr()).log2()).min(n);
    let relayed = if switch < n {
        let yr: Vec<Complex64> = books.a.row(truth)[..switch]
            .iter()
            .zip(&relay_noise)
            .map(|(x, z)| g_sr * x + z)
            .collect();
        let relay_sigs: Vec<Vec<Complex64>> = (0..books.a.rows)
            .map(|m| books.a.row(m)[..switch].iter().map(|x| g_sr * x).collect())
            .collect();
        ml_decode(&yr, &relay_sigs)
    } else {
        truth
    };
    let signatures = build_relay_signatures(&books.a, &books.b, g_sd, g_rd, switch);
    let sent = &books.b.row(relayed);
    let y = (0..n)
        .map(|k| {
            let relay = if k < switch { Complex64::new(0.0, 0.0) } else { g_rd * sent[k] };
            g_sd * books.a.row(truth)[k] + relay + noise[k]
        })
        .collect();
    TrialSetup {
        y,
        signatures,
        truth,
        noise_level: sigma2,
        clean: relayed == truth,
        relay_error: relayed != truth,
    }
}

fn mar_setup<R: Rng>(cfg: &LabConfig, books: &Books, rng: &mut R) -> TrialSetup {
    let (n, sigma2) = (cfg.len(), cfg.sigma2());
    let s = books.a.rows;
    let xr = books.r.as_ref().expect("MAR relay codebook");
    let truth = rng.random_range(0..cfg.m as usize);
    let (g1, g2, gr, h1, h2) = (cn(rng, 1.0), cn(rng, 1.0), cn(rng, 1.0), cn(rng, 1.0), cn(rng, 1.0));
    let relay_noise: Vec<Complex64> = (0..n).map(|_| cn(rng, sigma2 / cfg.c)).collect();
    let noise: Vec<Complex64> = (0..n).map(|_| cn(rng, sigma2)).collect();

    let sources = |m: usize, k: usize, a: Complex64, b: Complex64| {
        a * books.a.row(m / s)[k] + b * books.b.row(m % s)[k]
    };
    let bits = cfg.t as f64 * cfg.rate_bits();
    let crho = cfg.c * cfg.rho();
    let switch = listen_symbols(bits / 2.0, (1.0 + crho * h1.norm_sqr().min(h2.norm_sqr())).log2())
        .max(listen_symbols(bits, (1.0 + crho * (h1.norm_sqr() + h2.norm_sqr())).log2()))
        .min(n);
    let relayed = if switch < n {
        let yr: Vec<Complex64> = (0..switch).map(|k| sources(truth, k, h1, h2) + relay_noise[k]).collect();
        let relay_sigs: Vec<Vec<Complex64>> = (0..cfg.m as usize)
            .map(|m| (0..switch).map(|k| sources(m, k, h1, h2)).collect())
            .collect();
        ml_decode(&yr, &relay_sigs)
    } else {
        truth
    };
    let sig = |m: usize, relay_msg: usize, k: usize| {
        let relay = if k < switch { Complex64::new(0.0, 0.0) } else { gr * xr.row(relay_msg)[k] };
        sources(m, k, g1, g2) + relay
    };
    let signatures = (0..cfg.m as usize).map(|m| (0..n).map(|k| sig(m, m, k)).collect()).collect();
    let y = (0..n).map(|k| sig(truth, relayed, k) + noise[k]).collect();
    TrialSetup {
        y,
        signatures,
        truth,
        noise_level: sigma2,
        clean: relayed == truth,
        relay_error: relayed != truth,
    }
}

fn cvma_setup<R: Rng>(cfg: &LabConfig, books: &Books, rng: &mut R) -> TrialSetup {
    let (n, sigma2) = (cfg.len(), cfg.sigma2());
    let m0 = rng.random_range(0..cfg.m as usize);
    let m1 = rng.random_range(0..cfg.m as usize);
    let g = [[cn(rng, 1.0), cn(rng, 1.0)], [cn(rng, 1.0), cn(rng, 1.0)]];
    let noise: Vec<Complex64> = (0..n).map(|_| cn(rng, sigma2)).collect();
    let lab = label_cvma(&g, cfg.rho());
    let (s, i, a) = (lab.superior, 1 - lab.superior, lab.antenna);
    let books_of = |k: usize| if k == 0 { &books.a } else { &books.b };
    let msgs = [m0, m1];
    let (g_ss, g_is) = (g[s][a], g[i][a]);
    let y = (0..n)
        .map(|k| g_ss * books_of(s).row(msgs[s])[k] + g_is * books_of(i).row(msgs[i])[k] + noise[k])
        .collect();
    let signatures = (0..cfg.m as usize)
        .map(|m| books_of(s).row(m).iter().map(|x| g_ss * x).collect())
        .collect();
    TrialSetup {
        y,
        signatures,
        truth: msgs[s],
        noise_level: g_is.norm_sqr() + sigma2,
        clean: false,
        relay_error: false,
    }
}

fn run_one(cfg: &LabConfig, books: &Books, trial: u64, base: &ChaCha8Rng, counts: &mut LabCounts) {
    let mut rng = base.clone();
    rng.set_stream(trial);
    let setup = match cfg.scenario {
        LabScenario::Relay => relay_setup(cfg, books, &mut rng),
        LabScenario::MarJoint => mar_setup(cfg, books, &mut rng),
        LabScenario::CvmaSuperior => cvma_setup(cfg, books, &mut rng),
    };
    counts.n += 1;
    counts.relay_errors += setup.relay_error as u64;
    let t = cfg.t as usize;
    let mut decided = false;
    for l in 1..=cfg.l as usize {
        let y = &setup.y[..l * t];
        let radius = (l * t) as f64 * (1.0 + cfg.delta) * setup.noise_level;
        let decision = bounded_distance_accept(y, &setup.signatures, radius);
        if l < cfg.l as usize {
            counts.reject_early += matches!(decision, Decision::Reject { .. }) as u64;
            counts.ml_err_early += (ml_decode(y, &setup.signatures) != setup.truth) as u64;
        }
        if decided {
            continue;
        }
        if let Decision::Accept(m) = decision {
            decided = true;
            counts.accept[l - 1] += 1;
            // the accepted message is alone in its sphere
            let unique = setup
                .signatures
                .iter()
                .enumerate()
                .all(|(k, s)| (dist2(y, &s[..y.len()]) <= radius) == (k == m));
            counts.sphere_violations += (!unique) as u64;
            if m != setup.truth {
                counts.undetected += 1;
                if setup.clean && dist2(y, &setup.signatures[setup.truth][..y.len()]) <= radius {
                    counts.noise_violations += 1;
                }
            }
        } else if l == cfg.l as usize && ml_decode(y, &setup.signatures) != setup.truth {
            counts.final_err += 1;
        }
    }
}

/// Per-configuration lab output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabResult {
    pub config: LabConfig,
    pub counts: LabCounts,
    /// First-accept frequency per round.
    pub accept_rate: Vec<f64>,
    pub undetected_rate: f64,
    pub final_error_rate: f64,
    /// Rejects over ML errors in rounds before the last; `None` without ML
    /// errors.
    pub nack_ml_ratio: Option<f64>,
    pub relay_error_rate: f64,
    pub codebook_energy: f64,
}

pub fn run_arq_lab(cfg: &LabConfig) -> Result<LabResult> {
    cfg.validate()?;
    let books = make_books(cfg);
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    let chunks: Vec<(u64, u64)> = (0..cfg.n_trials)
        .step_by(CHUNK as usize)
        .map(|a| (a, (a + CHUNK).min(cfg.n_trials)))
        .collect();
    let counts = chunks
        .par_iter()
        .map(|&(a, b)| {
            let mut c = LabCounts::new(cfg.l);
            for i in a..b {
                run_one(cfg, &books, i, &base, &mut c);
            }
            c
        })
        .reduce(
            || LabCounts::new(cfg.l),
            |mut a, b| {
                a.merge(&b);
                a
            },
        );
    let n = counts.n as f64;
    Ok(LabResult {
        config: cfg.clone(),
        accept_rate: counts.accept.iter().map(|&a| a as f64 / n).collect(),
        undetected_rate: counts.undetected as f64 / n,
        final_error_rate: counts.final_err as f64 / n,
        nack_ml_ratio: (counts.ml_err_early > 0)
            .then(|| counts.reject_early as f64 / counts.ml_err_early as f64),
        relay_error_rate: counts.relay_errors as f64 / n,
        codebook_energy: books.a.mean_energy(),
        counts,
    })
}

/// `scenario,T,M,delta,snr_db,accept1..acceptL,undetected,final_err,nack_ml_ratio,n_trials`.
/// Rows may have different `L`; the accept columns span the largest.
pub fn write_lab_csv<W: Write>(out: W, results: &[LabResult]) -> Result<()> {
    let lmax = results.iter().map(|r| r.config.l).max().unwrap_or(1);
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["scenario", "T", "M", "delta", "snr_db"].map(String::from).to_vec();
    header.extend((1..=lmax).map(|k| format!("accept{k}")));
    header.extend(["undetected", "final_err", "nack_ml_ratio", "n_trials"].map(String::from));
    w.write_record(&header)?;
    for r in results {
        let c = &r.config;
        let mut rec = vec![
            c.scenario.name().to_string(),
            c.t.to_string(),
            c.m.to_string(),
            c.delta.to_string(),
            c.snr_db.to_string(),
        ];
        rec.extend((0..lmax as usize).map(|k| r.accept_rate.get(k).map_or(String::new(), |a| format!("{a:.6e}"))));
        rec.push(format!("{:.6e}", r.undetected_rate));
        rec.push(format!("{:.6e}", r.final_error_rate));
        rec.push(r.nack_ml_ratio.map_or(String::new(), |x| format!("{x:.6e}")));
        rec.push(r.counts.n.to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn cfg(scenario: LabScenario) -> LabConfig {
        LabConfig {
            scenario,
            l: 2,
            t: 32,
            m: 16,
            delta: 0.2,
            snr_db: 20.0,
            c: 1.0,
            n_trials: 2000,
            seed: 5,
        }
    }

    #[test]
    fn noiseless_decoding() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs = Codebook::random(8, 16, &mut rng);
        let xr = Codebook::random(8, 16, &mut rng);
        let sigs = build_relay_signatures(&xs, &xr, c(1.0), c(0.5), 8);
        assert_eq!(ml_decode(&sigs[3], &sigs), 3);
        assert_eq!(bounded_distance_accept(&sigs[3], &sigs, 1e-9), Decision::Accept(3));
    }

    #[test]
    fn ties_and_duplicates() {
        let s = vec![vec![c(1.0)], vec![c(-1.0)]];
        assert_eq!(ml_decode(&[c(0.0)], &s), 0);
        let same = vec![vec![c(1.0)], vec![c(1.0)]];
        assert_eq!(bounded_distance_accept(&[c(1.0)], &same, 0.5), Decision::Reject { inside: 2 });
    }

    #[test]
    fn signatures_without_relay() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let xs = Codebook::random(4, 10, &mut rng);
        let xr = Codebook::random(4, 10, &mut rng);
        let direct = build_relay_signatures(&xs, &xr, c(0.7), c(0.0), 3);
        let full_listen = build_relay_signatures(&xs, &xr, c(0.7), c(2.0), 10);
        for m in 0..4 {
            let want: Vec<_> = xs.row(m).iter().map(|x| c(0.7) * x).collect();
            assert_eq!(direct[m], want);
            assert_eq!(full_listen[m], want);
        }
    }

    #[test]
    fn codebook_energy_near_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = Codebook::random(64, 128, &mut rng);
        assert!((b.mean_energy() - 1.0).abs() < 0.05);
    }

    #[test]
    fn resource_guard() {
        let mut big = cfg(LabScenario::Relay);
        big.m = 4096;
        assert!(matches!(big.validate(), Err(Error::ResourceGuard(_))));
        let mut odd = cfg(LabScenario::MarJoint);
        odd.m = 8;
        assert!(odd.validate().is_err());
    }

    #[test]
    fn every_scenario_runs_clean() {
        for s in [LabScenario::Relay, LabScenario::MarJoint, LabScenario::CvmaSuperior] {
            let r = run_arq_lab(&cfg(s)).unwrap();
            assert_eq!(r.counts.sphere_violations, 0);
            assert_eq!(r.counts.noise_violations, 0);
            let accepted: u64 = r.counts.accept.iter().sum();
            assert!(accepted <= r.counts.n);
        }
    }

    #[test]
    fn deterministic_and_chunk_independent() {
        let a = run_arq_lab(&cfg(LabScenario::Relay)).unwrap();
        let b = run_arq_lab(&cfg(LabScenario::Relay)).unwrap();
        assert_eq!(a.counts, b.counts);
    }
}
