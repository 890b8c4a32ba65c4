//! Real potentials with finite stored support and ℓ¹_s moment certificates.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tail mass (in ℓ¹₁) below which an infinite-tail potential is cut off.
pub const TAIL_TOLERANCE: f64 = 1e-12;

/// A real sequence q_n supported on `offset .. offset + values.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pub offset: i64,
    pub values: Vec<f64>,
    /// moments[s] = Σ (1+|n|)^s |q_n| for s = 0..=3.
    pub moments: [f64; 4],
    pub label: Option<String>,
    /// Largest s for which q ∈ ℓ¹_s is asserted; `None` means finite support,
    /// where every moment is finite.
    pub decay_class: Option<u32>,
    /// Cut-off radius of a truncated infinite-tail potential.
    pub truncation_radius: Option<i64>,
}

impl Potential {
    pub fn new(offset: i64, values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite potential value {v}"
            )));
        }
        let moments = compute_moments(offset, &values);
        Ok(Potential {
            offset,
            values,
            moments,
            label: None,
            decay_class: None,
            truncation_radius: None,
        })
    }

    pub fn zero() -> Self {
        Potential::new(0, Vec::new()).unwrap().with_label("zero")
    }

    /// `strength` at a single site.
    pub fn delta(site: i64, strength: f64) -> Self {
        Potential::new(site, vec![strength])
            .unwrap()
            .with_label(format!("delta({site},{strength})"))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn name(&self) -> &str {
        self.label.as_deref().unwrap_or("unnamed")
    }

    /// Samples q_n = c(1+|n|)^{−β} and truncates where the ℓ¹₁ tail mass drops
    /// below [`TAIL_TOLERANCE`], using the integral bound
    /// Σ_{|n|>R} (1+|n|)|q_n| ≤ 2c(1+R)^{2−β}/(β−2).
    pub fn power_law(c: f64, beta: f64) -> Result<Self> {
        if beta <= 2.0 {
            return Err(Error::InvalidInput(format!(
                "power-law exponent {beta} must exceed 2 for an l1_1 potential"
            )));
        }
        let tail = |r: f64| 2.0 * c.abs() * (1.0 + r).powf(2.0 - beta) / (beta - 2.0);
        let mut r = 1.0f64;
        while tail(r) >= TAIL_TOLERANCE {
            r *= 1.25;
            if r > 1e8 {
                return Err(Error::InvalidInput(
                    "power-law tail too heavy to truncate at desk scale".into(),
                ));
            }
        }
        let r = r.ceil() as i64;
        let values = (-r..=r)
            .map(|n| c * (1.0 + n.abs() as f64).powf(-beta))
            .collect();
        let mut p = Potential::new(-r, values)?;
        // q ∈ ℓ¹_s iff β − s > 1.
        p.decay_class = Some((beta - 1.0).ceil() as u32 - 1);
        p.truncation_radius = Some(r);
        p.label = Some(format!("power({c},{beta})"));
        Ok(p)
    }

    /// Random finite-support potential with entries uniform in
    /// [−amplitude, amplitude] on `offset .. offset + len`.
    pub fn random<R: Rng>(rng: &mut R, offset: i64, len: usize, amplitude: f64) -> Self {
        let values = (0..len)
            .map(|_| rng.gen_range(-amplitude..=amplitude))
            .collect();
        Potential::new(offset, values)
            .unwrap()
            .with_label(format!("random[{offset},{}]", offset + len as i64 - 1))
    }

    pub fn get(&self, n: i64) -> f64 {
        let i = n - self.offset;
        if i < 0 || i as usize >= self.values.len() {
            0.0
        } else {
            self.values[i as usize]
        }
    }

    /// First and last sites carrying a nonzero value, `None` for q ≡ 0.
    pub fn support(&self) -> Option<(i64, i64)> {
        let first = self.values.iter().position(|v| *v != 0.0)?;
        let last = self.values.iter().rposition(|v| *v != 0.0)?;
        Some((self.offset + first as i64, self.offset + last as i64))
    }

    pub fn is_zero(&self) -> bool {
        self.support().is_none()
    }

    /// Σ (1+|n|)^s |q_n| for arbitrary real s.
    pub fn weighted_l1(&self, s: f64) -> f64 {
        self.iter()
            .map(|(n, q)| (1.0 + n.abs() as f64).powf(s) * q.abs())
            .sum()
    }

    /// Σ_{k ≥ from} |q_k|.
    pub fn tail_mass_right(&self, from: i64) -> f64 {
        self.iter()
            .filter(|(n, _)| *n >= from)
            .map(|(_, q)| q.abs())
            .sum()
    }

    /// Σ_{k ≤ to} |q_k|.
    pub fn tail_mass_left(&self, to: i64) -> f64 {
        self.iter()
            .filter(|(n, _)| *n <= to)
            .map(|(_, q)| q.abs())
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (self.offset + i as i64, *v))
    }

    /// Whether q ∈ ℓ¹_s is certified.
    pub fn certifies(&self, s: u32) -> bool {
        self.decay_class.is_none_or(|c| c >= s)
    }

    /// Reflected potential n ↦ q_{−n}.
    pub fn reflected(&self) -> Self {
        let len = self.values.len() as i64;
        let mut values = self.values.clone();
        values.reverse();
        let mut p = Potential::new(-(self.offset + len - 1), values).unwrap();
        p.label = self.label.as_ref().map(|l| format!("reflect({l})"));
        p.decay_class = self.decay_class;
        p.truncation_radius = self.truncation_radius;
        p
    }

    /// Parses the plain-text format (`offset=`, optional `label=`, one real
    /// per line) or CSV with an `n,q` header.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .peekable();
        let csv = lines
            .peek()
            .map(|(_, l)| l.replace(' ', "").eq_ignore_ascii_case("n,q"))
            .unwrap_or(false);
        if csv {
            lines.next();
            let mut entries = Vec::new();
            for (ln, l) in lines {
                let mut it = l.split(',');
                let (Some(n), Some(q), None) = (it.next(), it.next(), it.next()) else {
                    return Err(Error::Parse {
                        line: ln,
                        msg: format!("expected `n,q`, got `{l}`"),
                    });
                };
                let n: i64 = n.trim().parse().map_err(|e| Error::Parse {
                    line: ln,
                    msg: format!("{e}"),
                })?;
                let q: f64 = q.trim().parse().map_err(|e| Error::Parse {
                    line: ln,
                    msg: format!("{e}"),
                })?;
                entries.push((n, q));
            }
            if entries.is_empty() {
                return Ok(Potential::zero());
            }
            let lo = entries.iter().map(|e| e.0).min().unwrap();
            let hi = entries.iter().map(|e| e.0).max().unwrap();
            let mut values = vec![0.0; (hi - lo + 1) as usize];
            for (n, q) in entries {
                values[(n - lo) as usize] += q;
            }
            return Potential::new(lo, values);
        }
        let mut offset = None;
        let mut label = None;
        let mut values = Vec::new();
        for (ln, l) in lines {
            if let Some((k, v)) = l.split_once('=') {
                match k.trim() {
                    "offset" => {
                        offset = Some(v.trim().parse::<i64>().map_err(|e| Error::Parse {
                            line: ln,
                            msg: format!("bad offset: {e}"),
                        })?)
                    }
                    "label" => label = Some(v.trim().to_string()),
                    other => {
                        return Err(Error::Parse {
                            line: ln,
                            msg: format!("unknown header key `{other}`"),
                        })
                    }
                }
            } else {
                values.push(l.parse::<f64>().map_err(|e| Error::Parse {
                    line: ln,
                    msg: format!("bad value `{l}`: {e}"),
                })?);
            }
        }
        let offset = offset.ok_or(Error::Parse {
            line: 1,
            msg: "missing `offset=` header".into(),
        })?;
        let mut p = Potential::new(offset, values)?;
        p.label = label;
        Ok(p)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut p = Potential::parse(&text)?;
        if p.label.is_none() {
            p.label = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        Ok(p)
    }

    /// Renders the plain-text format accepted by [`Potential::parse`].
    pub fn to_text(&self) -> String {
        let mut s = format!("offset={}\n", self.offset);
        if let Some(l) = &self.label {
            s.push_str(&format!("label={l}\n"));
        }
        for v in &self.values {
            s.push_str(&format!("{v:e}\n"));
        }
        s
    }

    /// Named builtin potentials: `zero`, `delta`, `delta:<c>`, `power:<c>:<β>`.
    pub fn builtin(name: &str) -> Result<Self> {
        let parts: Vec<&str> = name.split(':').collect();
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| Error::Config(format!("bad number `{s}` in builtin `{name}`: {e}")))
        };
        match parts.as_slice() {
            ["zero"] | ["free"] => Ok(Potential::zero()),
            ["delta"] => Ok(Potential::delta(0, 2.0)),
            ["delta", c] => Ok(Potential::delta(0, num(c)?)),
            ["power", c, b] => Potential::power_law(num(c)?, num(b)?),
            ["random", seed] => {
                let seed = seed.parse::<u64>().map_err(|e| {
                    Error::Config(format!("bad seed `{seed}` in builtin `{name}`: {e}"))
                })?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok(Potential::random(&mut rng, -3, 7, 1.0).with_label(name))
            }
            _ => Err(Error::Config(format!("unknown builtin potential `{name}`"))),
        }
    }
}

fn compute_moments(offset: i64, values: &[f64]) -> [f64; 4] {
    let mut m = [0.0; 4];
    for (i, q) in values.iter().enumerate() {
        let w = 1.0 + (offset + i as i64).abs() as f64;
        let mut ws = 1.0;
        for slot in m.iter_mut() {
            *slot += ws * q.abs();
            ws *= w;
        }
    }
    m
}
