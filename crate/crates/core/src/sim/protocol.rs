//! Mutual-information outage proxies for each ARQ round.
//!
//! A round is accepted iff the accumulated mutual information after `l`
//! rounds supports the per-symbol rate `R1 / l`. Undetected errors are not
//! modelled here; see the codebook lab for those.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::channel::{ChannelConfig, ChannelDraw, SimScenario};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    /// Maximum number of ARQ rounds.
    #[serde(rename = "L")]
    pub l: u32,
    /// First-round multiplexing gain.
    pub r1: f64,
    /// Symbols per round.
    #[serde(rename = "T")]
    pub t: u32,
}

impl ProtocolConfig {
    pub fn new(scenario: SimScenario, l: u32, r1: f64, t: u32) -> Result<Self> {
        if l == 0 || l > 32 {
            return Err(Error::InvalidArgument(format!("L = {l} must be in 1..=32")));
        }
        if t == 0 {
            return Err(Error::InvalidArgument("T must be at least 1".into()));
        }
        let hi = match scenario {
            SimScenario::Relay | SimScenario::Mar => 1.0,
            SimScenario::Cvma => 2.0,
        };
        if !(0.0..hi).contains(&r1) {
            return Err(Error::domain("r1", r1, format!("[0, {hi})")));
        }
        Ok(ProtocolConfig { l, r1, t })
    }

    /// First-round rate `R1 = r1 log2 rho` in bits per symbol.
    pub fn rate_bits(&self, rho: f64) -> f64 {
        self.r1 * rho.log2()
    }
}

fn cap(x: f64) -> f64 {
    (1.0 + x).log2()
}

/// `ceil(bits / capacity)` in symbols, `u64::MAX` when the link carries
/// nothing.
fn symbols_needed(bits: f64, capacity: f64) -> u64 {
    if bits <= 0.0 {
        0
    } else if capacity <= 0.0 {
        u64::MAX
    } else {
        let s = (bits / capacity).ceil();
        if s >= u64::MAX as f64 {
            u64::MAX
        } else {
            s as u64
        }
    }
}

fn fraction_of(symbols: u64, window: u64) -> f64 {
    symbols.min(window) as f64 / window as f64
}

/// Symbols the relay listens before it can decode both sources, with
/// `R = R1` over a round of `T` symbols.
pub fn relay_listen_symbols_mar(h1_sq: f64, h2_sq: f64, rate: f64, rho: f64, c: f64, t: u32) -> u64 {
    let bits = t as f64 * rate;
    let each = symbols_needed(bits / 2.0, cap(c * rho * h1_sq.min(h2_sq)));
    let both = symbols_needed(bits, cap(c * rho * (h1_sq + h2_sq)));
    each.max(both)
}

/// `T' / T` with `T' = min{T, max{ceil(TR/(2 log2(1 + c rho min|h|^2))),
/// ceil(TR / log2(1 + c rho (|h1|^2 + |h2|^2)))}}`.
pub fn relay_listen_fraction_mar(h1_sq: f64, h2_sq: f64, r1: f64, rho: f64, c: f64, t: u32) -> f64 {
    let rate = r1 * rho.log2();
    fraction_of(relay_listen_symbols_mar(h1_sq, h2_sq, rate, rho, c, t), t as u64)
}

/// Symbols the helping user listens to the inferior user.
pub fn relay_listen_symbols_cvma(h_sq: f64, rate: f64, rho: f64, c: f64, t: u32) -> u64 {
    symbols_needed(t as f64 * rate / 2.0, cap(c * rho * h_sq))
}

/// `T' / T` with `T' = min{T, ceil(T R1 / (2 log2(1 + |h|^2 c rho)))}`.
pub fn relay_listen_fraction_cvma(h_sq: f64, r1: f64, rho: f64, c: f64, t: u32) -> f64 {
    let rate = r1 * rho.log2();
    fraction_of(relay_listen_symbols_cvma(h_sq, rate, rho, c, t), t as u64)
}

/// Relay outage after `l` rounds at accumulated rate `R1 / l`.
pub fn round_outage_relay(draw: &ChannelDraw, l: u32, proto: &ProtocolConfig, chan: &ChannelConfig) -> bool {
    let ChannelDraw::Relay { g_sd, g_sr, g_rd } = *draw else {
        panic!("relay outage needs a relay draw");
    };
    let rho = chan.rho();
    let rate = proto.rate_bits(rho);
    if rate <= 0.0 {
        return false;
    }
    let window = l as u64 * proto.t as u64;
    let listen = symbols_needed(proto.t as f64 * rate, cap(chan.c * rho * g_sr.norm_sqr()));
    let f = fraction_of(listen, window);
    let (sd, rd) = (g_sd.norm_sqr(), g_rd.norm_sqr());
    let mi = f * cap(rho * sd) + (1.0 - f) * cap(rho * (sd + rd));
    mi < rate / l as f64
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MarOutage {
    pub type1: bool,
    pub type2: bool,
    pub type12: bool,
}

impl MarOutage {
    pub fn any(&self) -> bool {
        self.type1 || self.type2 || self.type12
    }
}

/// Per-type MAR outage after `l` rounds.
pub fn round_outage_mar(draw: &ChannelDraw, l: u32, proto: &ProtocolConfig, chan: &ChannelConfig) -> MarOutage {
    let ChannelDraw::Mar { g1, g2, gr, h1, h2 } = *draw else {
        panic!("MAR outage needs a MAR draw");
    };
    let rho = chan.rho();
    let rate1 = proto.rate_bits(rho);
    if rate1 <= 0.0 {
        return MarOutage::default();
    }
    let window = l as u64 * proto.t as u64;
    let listen = relay_listen_symbols_mar(h1.norm_sqr(), h2.norm_sqr(), rate1, rho, chan.c, proto.t);
    let f = fraction_of(listen, window);
    let rate = rate1 / l as f64;
    let (a, b, r) = (g1.norm_sqr(), g2.norm_sqr(), gr.norm_sqr());
    let single = |g: f64| f * cap(rho * g) + (1.0 - f) * cap(rho * (g + r)) < rate / 2.0;
    MarOutage {
        type1: single(a),
        type2: single(b),
        type12: f * cap(rho * (a + b)) + (1.0 - f) * cap(rho * (a + b + r)) < rate,
    }
}

/// Superior/inferior assignment of a CVMA draw.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CvmaLabels {
    /// Index of the superior source.
    pub superior: usize,
    /// Destination antenna where the superior source has the best SINR.
    pub antenna: usize,
    pub g_ss: f64,
    pub g_si: f64,
    pub g_is: f64,
    pub g_ii: f64,
}

fn sinr(rho: f64, signal: f64, interference: f64) -> f64 {
    rho * signal / (1.0 + rho * interference)
}

/// Picks the source-antenna pair with the largest SINR, treating the other
/// source as interference. Ties go to the lower index.
pub fn label_cvma(g: &[[Complex64; 2]; 2], rho: f64) -> CvmaLabels {
    let p = |k: usize, l: usize| g[k][l].norm_sqr();
    let mut best = (0, 0, f64::NEG_INFINITY);
    for k in 0..2 {
        for l in 0..2 {
            let s = sinr(rho, p(k, l), p(1 - k, l));
            if s > best.2 {
                best = (k, l, s);
            }
        }
    }
    let (s, a) = (best.0, best.1);
    let (i, b) = (1 - s, 1 - a);
    CvmaLabels {
        superior: s,
        antenna: a,
        g_ss: p(s, a),
        g_si: p(s, b),
        g_is: p(i, a),
        g_ii: p(i, b),
    }
}

impl CvmaLabels {
    /// The labeling condition: the `(s, s)` SINR is no smaller than the
    /// other three.
    pub fn holds(&self, rho: f64) -> bool {
        let ss = sinr(rho, self.g_ss, self.g_is);
        ss >= sinr(rho, self.g_si, self.g_ii)
            && ss >= sinr(rho, self.g_is, self.g_ss)
            && ss >= sinr(rho, self.g_ii, self.g_si)
    }
}

/// `log2 det(I + rho G G^H)` for a 2x2 `G`.
pub fn log_det_2x2(g: &[[Complex64; 2]; 2], rho: f64) -> f64 {
    let trace: f64 = g.iter().flatten().map(|z| z.norm_sqr()).sum();
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    (1.0 + rho * trace + rho * rho * det.norm_sqr()).log2()
}

/// Result of one long-term static ARQ trial.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ArqTrialOutcome {
    pub rounds_used: u32,
    /// Bit `l - 1` set when something was accepted in round `l`.
    pub per_round_accept: u32,
    pub error: bool,
    pub user_errors: [bool; 2],
}

pub fn run_relay(draw: &ChannelDraw, proto: &ProtocolConfig, chan: &ChannelConfig) -> ArqTrialOutcome {
    for l in 1..=proto.l {
        if !round_outage_relay(draw, l, proto, chan) {
            return ArqTrialOutcome {
                rounds_used: l,
                per_round_accept: 1 << (l - 1),
                error: false,
                user_errors: [false; 2],
            };
        }
    }
    ArqTrialOutcome {
        rounds_used: proto.l,
        per_round_accept: 0,
        error: true,
        user_errors: [true, false],
    }
}

/// One feedback bit for both sources: accept iff no outage type occurs.
pub fn run_mar(draw: &ChannelDraw, proto: &ProtocolConfig, chan: &ChannelConfig) -> ArqTrialOutcome {
    let mut last = MarOutage::default();
    for l in 1..=proto.l {
        last = round_outage_mar(draw, l, proto, chan);
        if !last.any() {
            return ArqTrialOutcome {
                rounds_used: l,
                per_round_accept: 1 << (l - 1),
                error: false,
                user_errors: [false; 2],
            };
        }
    }
    ArqTrialOutcome {
        rounds_used: proto.l,
        per_round_accept: 0,
        error: true,
        user_errors: [last.type1 || last.type12, last.type2 || last.type12],
    }
}

/// Decoder state between CVMA rounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CvmaState {
    Neither,
    /// The superior message was accepted in round `l'`.
    SuperiorAt(u32),
    Both,
}

/// Per-round CVMA decoder: joint decoding of both messages, else the
/// superior message treating the inferior one as interference, else NACK.
/// Once the superior message is known, the superior user helps the inferior
/// one as a DDF relay.
pub fn cvma_round(
    labels: &CvmaLabels,
    g: &[[Complex64; 2]; 2],
    h_sq: f64,
    l: u32,
    state: CvmaState,
    proto: &ProtocolConfig,
    chan: &ChannelConfig,
) -> CvmaState {
    let rho = chan.rho();
    let rate1 = proto.rate_bits(rho);
    if rate1 <= 0.0 {
        return CvmaState::Both;
    }
    let lf = l as f64;
    match state {
        CvmaState::Both => CvmaState::Both,
        CvmaState::Neither => {
            let per_user = |k: usize| cap(rho * (g[k][0].norm_sqr() + g[k][1].norm_sqr())) >= rate1 / (2.0 * lf);
            if per_user(0) && per_user(1) && log_det_2x2(g, rho) >= rate1 / lf {
                return CvmaState::Both;
            }
            if cap(sinr(rho, labels.g_ss, labels.g_is)) >= rate1 / (2.0 * lf) {
                // the inferior message may follow by cancellation in the same round
                return inferior_after_help(labels, h_sq, l, l, proto, chan);
            }
            CvmaState::Neither
        }
        CvmaState::SuperiorAt(lp) => inferior_after_help(labels, h_sq, l, lp, proto, chan),
    }
}

fn inferior_after_help(
    labels: &CvmaLabels,
    h_sq: f64,
    l: u32,
    lp: u32,
    proto: &ProtocolConfig,
    chan: &ChannelConfig,
) -> CvmaState {
    let rho = chan.rho();
    let rate1 = proto.rate_bits(rho);
    let t = proto.t as u64;
    let after = (l - lp) as u64 * t;
    let listen = relay_listen_symbols_cvma(h_sq, rate1, rho, chan.c, proto.t).min(after);
    let alone = cap(rho * (labels.g_is + labels.g_ii));
    let helped = cap(rho * (labels.g_ss + labels.g_si + labels.g_is + labels.g_ii));
    let bits = (lp as u64 * t + listen) as f64 * alone + (after - listen) as f64 * helped;
    if bits >= t as f64 * rate1 / 2.0 {
        CvmaState::Both
    } else {
        CvmaState::SuperiorAt(lp)
    }
}

pub fn run_cvma(draw: &ChannelDraw, proto: &ProtocolConfig, chan: &ChannelConfig) -> ArqTrialOutcome {
    let ChannelDraw::Cvma { g, h } = *draw else {
        panic!("CVMA trial needs a CVMA draw");
    };
    let rho = chan.rho();
    let labels = label_cvma(&g, rho);
    debug_assert!(labels.holds(rho));
    let mut state = CvmaState::Neither;
    let mut accept = 0;
    for l in 1..=proto.l {
        let next = cvma_round(&labels, &g, h.norm_sqr(), l, state, proto, chan);
        if next != state {
            accept |= 1 << (l - 1);
        }
        state = next;
        if state == CvmaState::Both {
            return ArqTrialOutcome {
                rounds_used: l,
                per_round_accept: accept,
                error: false,
                user_errors: [false; 2],
            };
        }
    }
    let mut user_errors = [true; 2];
    if let CvmaState::SuperiorAt(_) = state {
        user_errors[labels.superior] = false;
    }
    ArqTrialOutcome {
        rounds_used: proto.l,
        per_round_accept: accept,
        error: true,
        user_errors,
    }
}

pub fn run_trial(draw: &ChannelDraw, proto: &ProtocolConfig, chan: &ChannelConfig) -> ArqTrialOutcome {
    match chan.scenario {
        SimScenario::Relay => run_relay(draw, proto, chan),
        SimScenario::Mar => run_mar(draw, proto, chan),
        SimScenario::Cvma => run_cvma(draw, proto, chan),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn mar_listen_fraction_formula() {
        let rho = 1e3_f64;
        let rate = 0.5 * rho.log2();
        let a = (100.0 * rate / 2.0 / (1.0 + rho).log2()).ceil();
        let b = (100.0 * rate / (1.0 + 2.0 * rho).log2()).ceil();
        let f = relay_listen_fraction_mar(1.0, 1.0, 0.5, rho, 1.0, 100);
        assert_eq!(f, a.max(b) / 100.0);
        assert_eq!(f, 0.46);
        assert_eq!(relay_listen_fraction_mar(0.0, 0.0, 0.5, rho, 1.0, 100), 1.0);
        assert!(relay_listen_fraction_mar(1e9, 1e9, 0.5, 1e6, 1.0, 1000) < 0.2);
    }

    #[test]
    fn cvma_listen_fraction() {
        assert_eq!(relay_listen_fraction_cvma(0.0, 1.0, 100.0, 1.0, 100), 1.0);
        assert_eq!(relay_listen_fraction_cvma(1e3, 1.0, 100.0, 1.0, 1), 1.0);
        let rho = 1e6_f64;
        let f = relay_listen_fraction_cvma(10.0, 1.0, rho, 1.0, 10_000);
        let asym = rho.log2() / (2.0 * (10.0 * rho).log2());
        assert!((f - asym).abs() < 1e-3, "{f} vs {asym}");
    }

    #[test]
    fn relay_outage_limits() {
        let chan = ChannelConfig::new(SimScenario::Relay, 20.0, 1.0).unwrap();
        let proto = ProtocolConfig::new(SimScenario::Relay, 2, 0.5, 100).unwrap();
        let good = ChannelDraw::Relay { g_sd: c(1e3), g_sr: c(0.0), g_rd: c(0.0) };
        let dead = ChannelDraw::Relay { g_sd: c(0.0), g_sr: c(0.0), g_rd: c(0.0) };
        for l in 1..=2 {
            assert!(!round_outage_relay(&good, l, &proto, &chan));
            assert!(round_outage_relay(&dead, l, &proto, &chan));
        }
    }

    #[test]
    fn zero_rate_never_fails() {
        let chan = ChannelConfig::new(SimScenario::Cvma, 20.0, 1.0).unwrap();
        let proto = ProtocolConfig::new(SimScenario::Cvma, 2, 0.0, 100).unwrap();
        let dead = ChannelDraw::Cvma { g: [[c(0.0); 2]; 2], h: c(0.0) };
        let out = run_trial(&dead, &proto, &chan);
        assert!(!out.error);
        assert_eq!(out.rounds_used, 1);
    }

    #[test]
    fn cvma_extremes() {
        let chan = ChannelConfig::new(SimScenario::Cvma, 20.0, 1.0).unwrap();
        let proto = ProtocolConfig::new(SimScenario::Cvma, 2, 1.0, 100).unwrap();
        let diag = ChannelDraw::Cvma { g: [[c(30.0), c(0.01)], [c(0.01), c(30.0)]], h: c(1.0) };
        let out = run_trial(&diag, &proto, &chan);
        assert_eq!((out.rounds_used, out.error), (1, false));
        let dead = ChannelDraw::Cvma { g: [[c(0.0); 2]; 2], h: c(0.0) };
        let out = run_trial(&dead, &proto, &chan);
        assert_eq!((out.rounds_used, out.error, out.per_round_accept), (2, true, 0));
    }

    #[test]
    fn labeling_picks_strongest_pair() {
        let g = [[c(0.1), c(0.2)], [c(2.0), c(0.3)]];
        let lab = label_cvma(&g, 100.0);
        assert_eq!((lab.superior, lab.antenna), (1, 0));
        assert!(lab.holds(100.0));
    }

    #[test]
    fn log_det_matches_direct_expansion() {
        let g = [
            [Complex64::new(0.3, -1.0), Complex64::new(0.5, 0.2)],
            [Complex64::new(-0.7, 0.1), Complex64::new(1.1, 0.4)],
        ];
        let rho = 7.0;
        // entries of I + rho G G^H
        let a = 1.0 + rho * (g[0][0].norm_sqr() + g[0][1].norm_sqr());
        let d = 1.0 + rho * (g[1][0].norm_sqr() + g[1][1].norm_sqr());
        let b = rho * (g[0][0] * g[1][0].conj() + g[0][1] * g[1][1].conj());
        let direct = (a * d - b.norm_sqr()).log2();
        assert!((log_det_2x2(&g, rho) - direct).abs() < 1e-12);
    }
}
