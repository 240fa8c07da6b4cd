//! Rayleigh channel draws, plain or importance-sampled.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimScenario {
    Relay,
    Mar,
    Cvma,
}

impl SimScenario {
    pub fn links(self) -> usize {
        match self {
            SimScenario::Relay => 3,
            SimScenario::Mar | SimScenario::Cvma => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SimScenario::Relay => "relay",
            SimScenario::Mar => "mar",
            SimScenario::Cvma => "cvma",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub scenario: SimScenario,
    pub snr_db: f64,
    /// Destination-to-relay noise variance ratio.
    pub c: f64,
}

impl ChannelConfig {
    pub fn new(scenario: SimScenario, snr_db: f64, c: f64) -> Result<Self> {
        if !snr_db.is_finite() {
            return Err(Error::domain("snr_db", snr_db, "finite"));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::domain("noise ratio c", c, "(0, inf)"));
        }
        Ok(ChannelConfig { scenario, snr_db, c })
    }

    pub fn rho(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }
}

/// One quasi-static realisation, fixed over all rounds of a message.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChannelDraw {
    Relay {
        g_sd: Complex64,
        g_sr: Complex64,
        g_rd: Complex64,
    },
    Mar {
        g1: Complex64,
        g2: Complex64,
        gr: Complex64,
        h1: Complex64,
        h2: Complex64,
    },
    Cvma {
        /// `g[k][l]`: source `k` to destination antenna `l`.
        g: [[Complex64; 2]; 2],
        /// Inter-user link.
        h: Complex64,
    },
}

impl ChannelDraw {
    fn from_links(scenario: SimScenario, z: &[Complex64; 5]) -> Self {
        match scenario {
            SimScenario::Relay => ChannelDraw::Relay {
                g_sd: z[0],
                g_sr: z[1],
                g_rd: z[2],
            },
            SimScenario::Mar => ChannelDraw::Mar {
                g1: z[0],
                g2: z[1],
                gr: z[2],
                h1: z[3],
                h2: z[4],
            },
            SimScenario::Cvma => ChannelDraw::Cvma {
                g: [[z[0], z[1]], [z[2], z[3]]],
                h: z[4],
            },
        }
    }

    /// The draw with the two users exchanged (MAR and CVMA).
    pub fn swapped_users(&self) -> Self {
        match *self {
            ChannelDraw::Mar { g1, g2, gr, h1, h2 } => ChannelDraw::Mar {
                g1: g2,
                g2: g1,
                gr,
                h1: h2,
                h2: h1,
            },
            ChannelDraw::Cvma { g, h } => ChannelDraw::Cvma {
                g: [g[1], g[0]],
                h,
            },
            relay => relay,
        }
    }
}

/// How link power gains `|g|^2` are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sampling {
    /// `|g|^2 ~ Exp(1)`.
    Plain,
    /// Defensive mixture `alpha Exp(1) + (1 - alpha) Exp(mean rho^-gamma)`
    /// per link, with likelihood-ratio weights.
    Importance { alpha: f64, gamma: f64 },
}

impl Sampling {
    pub fn validate(&self) -> Result<()> {
        if let Sampling::Importance { alpha, gamma } = *self {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::domain("importance alpha", alpha, "(0, 1]"));
            }
            if !(gamma.is_finite() && gamma >= 0.0) {
                return Err(Error::domain("importance gamma", gamma, "[0, inf)"));
            }
        }
        Ok(())
    }

    pub fn is_importance(&self) -> bool {
        matches!(self, Sampling::Importance { .. })
    }
}

fn unit_open<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // (0, 1]
    1.0 - rng.random::<f64>()
}

/// Draws every link of the scenario. The random stream consumed is the same
/// for every SNR and sampling mode, so draws are common random numbers
/// across an SNR sweep. Returns the draw and its likelihood-ratio weight.
pub fn sample_channel<R: Rng + ?Sized>(
    cfg: &ChannelConfig,
    sampling: &Sampling,
    rng: &mut R,
) -> (ChannelDraw, f64) {
    let mut z = [Complex64::new(0.0, 0.0); 5];
    let mut weight = 1.0;
    let theta = match *sampling {
        Sampling::Plain => 1.0,
        Sampling::Importance { gamma, .. } => cfg.rho().powf(-gamma),
    };
    for zk in z.iter_mut().take(cfg.scenario.links()) {
        let select = rng.random::<f64>();
        let e = -unit_open(rng).ln();
        let phase = std::f64::consts::TAU * rng.random::<f64>();
        let power = match *sampling {
            Sampling::Plain => e,
            Sampling::Importance { alpha, .. } => {
                let x = if select < alpha { e } else { theta * e };
                let q = alpha * (-x).exp() + (1.0 - alpha) / theta * (-x / theta).exp();
                weight *= (-x).exp() / q;
                x
            }
        };
        *zk = Complex64::from_polar(power.sqrt(), phase);
    }
    (ChannelDraw::from_links(cfg.scenario, &z), weight)
}
