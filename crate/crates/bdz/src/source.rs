//! Finite-state binary sources for redundancy measurement.
//!
//! A unifilar source walks a deterministic state machine: each state has a
//! probability of emitting 1 and a successor per emitted bit, so the
//! probability of a string is a single product along one state path.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coder::encode_with_stats;
use crate::error::{Error, Result};

/// An s-state binary source with deterministic transitions.
#[derive(Clone, Debug)]
pub struct MarkovSource {
    /// `next[state][bit]`, states 0-based.
    next: Vec<[u32; 2]>,
    /// Probability of emitting 1 in each state.
    emit_one: Vec<f64>,
    initial: u32,
}

impl MarkovSource {
    pub fn new(next: Vec<[u32; 2]>, emit_one: Vec<f64>, initial: u32) -> Result<Self> {
        let s = next.len();
        if s == 0 || emit_one.len() != s {
            return Err(Error::domain(
                "need one emission probability and one transition row per state",
            ));
        }
        if initial as usize >= s {
            return Err(Error::domain("initial state out of range"));
        }
        for row in &next {
            if row.iter().any(|&t| t as usize >= s) {
                return Err(Error::domain("transition target out of range"));
            }
        }
        if emit_one.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::domain("emission probabilities must lie in [0, 1]"));
        }
        Ok(MarkovSource {
            next,
            emit_one,
            initial,
        })
    }

    /// Memoryless source emitting 1 with probability `theta`.
    pub fn bernoulli(theta: f64) -> Result<Self> {
        MarkovSource::new(vec![[0, 0]], vec![theta], 0)
    }

    /// Order-r Markov source: one probability per length-r context, contexts
    /// numbered by their bits (most recent bit least significant).
    pub fn markov(probs: &[f64]) -> Result<Self> {
        let s = probs.len();
        if s == 0 || !s.is_power_of_two() {
            return Err(Error::domain(
                "context model needs a power-of-two number of probabilities",
            ));
        }
        let mask = s as u32 - 1;
        let next = (0..s as u32)
            .map(|state| [(state << 1) & mask, ((state << 1) | 1) & mask])
            .collect();
        MarkovSource::new(next, probs.to_vec(), 0)
    }

    /// Parse `bernoulli:0.5` or `markov:0.9,0.1,...`.
    pub fn parse_preset(preset: &str) -> Result<Self> {
        let (kind, args) = preset
            .split_once(':')
            .ok_or_else(|| Error::domain(format!("preset {preset:?} needs kind:args")))?;
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::domain(format!("bad probability {s:?}")))
        };
        match kind {
            "bernoulli" => MarkovSource::bernoulli(parse(args)?),
            "markov" => {
                let probs = args.split(',').map(parse).collect::<Result<Vec<f64>>>()?;
                MarkovSource::markov(&probs)
            }
            other => Err(Error::domain(format!("unknown source preset {other:?}"))),
        }
    }

    /// Parse the line-based config format:
    ///
    /// ```text
    /// states 2
    /// initial 0
    /// emit 0.9 0.1
    /// next 0 0 1
    /// next 1 0 1
    /// seed 42
    /// ```
    ///
    /// `next <state> <on-0> <on-1>`; states are 0-based; `seed` is optional.
    pub fn from_config(text: &str) -> Result<(Self, Option<u64>)> {
        let mut states = None;
        let mut initial = 0u32;
        let mut emit: Option<Vec<f64>> = None;
        let mut rows: Vec<Option<[u32; 2]>> = Vec::new();
        let mut seed = None;

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap();
            let rest: Vec<&str> = parts.collect();
            let bad = |what: &str| {
                Error::domain(format!("config line {}: {what}", lineno + 1))
            };
            match key {
                "states" => {
                    let s: usize = rest
                        .first()
                        .and_then(|v| v.parse().ok())
                        .ok_or_else(|| bad("states needs a count"))?;
                    rows = vec![None; s];
                    states = Some(s);
                }
                "initial" => {
                    initial = rest
                        .first()
                        .and_then(|v| v.parse().ok())
                        .ok_or_else(|| bad("initial needs a state"))?;
                }
                "emit" => {
                    emit = Some(
                        rest.iter()
                            .map(|v| v.parse::<f64>().map_err(|_| bad("bad probability")))
                            .collect::<Result<Vec<f64>>>()?,
                    );
                }
                "next" => {
                    if rest.len() != 3 {
                        return Err(bad("next needs: state on-0 on-1"));
                    }
                    let nums: Vec<u32> = rest
                        .iter()
                        .map(|v| v.parse().map_err(|_| bad("bad state index")))
                        .collect::<Result<Vec<u32>>>()?;
                    let slot = rows
                        .get_mut(nums[0] as usize)
                        .ok_or_else(|| bad("next row before states, or out of range"))?;
                    *slot = Some([nums[1], nums[2]]);
                }
                "seed" => {
                    seed = Some(
                        rest.first()
                            .and_then(|v| v.parse().ok())
                            .ok_or_else(|| bad("seed needs a u64"))?,
                    );
                }
                other => return Err(bad(&format!("unknown key {other:?}"))),
            }
        }

        let s = states.ok_or_else(|| Error::domain("config: missing states"))?;
        let emit = emit.ok_or_else(|| Error::domain("config: missing emit"))?;
        if emit.len() != s {
            return Err(Error::domain("config: emit row length != states"));
        }
        let next = rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.ok_or_else(|| Error::domain(format!("config: missing next {i}"))))
            .collect::<Result<Vec<[u32; 2]>>>()?;
        Ok((MarkovSource::new(next, emit, initial)?, seed))
    }

    pub fn state_count(&self) -> usize {
        self.next.len()
    }

    /// `log2` of the probability the source assigns to `bits`; negative
    /// infinity when some step has probability zero.
    pub fn log_prob(&self, bits: &[u8]) -> f64 {
        let mut state = self.initial as usize;
        let mut sum = 0.0f64;
        for &b in bits {
            let p1 = self.emit_one[state];
            let p = if b == 1 { p1 } else { 1.0 - p1 };
            if p == 0.0 {
                return f64::NEG_INFINITY;
            }
            sum += p.log2();
            state = self.next[state][b as usize] as usize;
        }
        sum
    }

    /// Draw `n` bits; identical seeds give identical strings.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<u8> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = self.initial as usize;
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let bit = u8::from(rng.gen::<f64>() < self.emit_one[state]);
            out.push(bit);
            state = self.next[state][bit as usize] as usize;
        }
        out
    }
}

/// One compression-versus-source measurement.
#[derive(Clone, Copy, Debug)]
pub struct RedundancyRecord {
    pub n: u64,
    /// Body bits: terminal/literal bit plus the level sections.
    pub codeword_bits: u64,
    /// Container overhead (magic, length headers, byte padding).
    pub container_bits: u64,
    pub log2_mu: f64,
    /// `codeword_bits + log2_mu`; infinite when the source gives the string
    /// probability zero.
    pub redundancy: f64,
    /// `redundancy * log2(n) / n`.
    pub per_sample: f64,
    /// `16 + 4 log2(s)` for an s-state source.
    pub theorem_budget: f64,
    pub mu_is_zero: bool,
}

/// Compress `bits` and compare the body length against the source's ideal
/// code length.
pub fn measure_redundancy(src: &MarkovSource, bits: &[u8]) -> Result<RedundancyRecord> {
    let (_, stats) = encode_with_stats(bits)?;
    let n = stats.n;
    let log2_mu = src.log_prob(bits);
    let mu_is_zero = log2_mu == f64::NEG_INFINITY;
    let redundancy = if mu_is_zero {
        f64::INFINITY
    } else {
        stats.body_bits as f64 + log2_mu
    };
    let per_sample = if n > 1 {
        redundancy * (n as f64).log2() / n as f64
    } else {
        0.0
    };
    Ok(RedundancyRecord {
        n,
        codeword_bits: stats.body_bits,
        container_bits: stats.container_bits,
        log2_mu,
        redundancy,
        per_sample,
        theorem_budget: 16.0 + 4.0 * (src.state_count() as f64).log2(),
        mu_is_zero,
    })
}

/// Stable mixing of (seed, n, rep) into one sampling seed.
pub fn mix_seed(seed: u64, n: u64, rep: u64) -> u64 {
    splitmix(splitmix(splitmix(seed) ^ n) ^ rep)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
