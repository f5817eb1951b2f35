//! Theta characteristics `[ε, δ]` with `ε, δ ∈ {0,1}^g`.
//!
//! Characteristics are stored as a pair of bit masks (bit `i` is component
//! `i`). The canonical order is lexicographic on `(ε, δ)` with `ε` major
//! and component 0 most significant, which fixes the coordinate order of
//! the theta-constant vector.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::siegel::PeriodMatrix;

/// Largest genus for which characteristics can be represented.
pub const MAX_CHAR_GENUS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Characteristic {
    genus: u8,
    eps: u32,
    delta: u32,
}

impl Characteristic {
    pub fn zero(genus: usize) -> Self {
        assert!((1..=MAX_CHAR_GENUS).contains(&genus), "genus {genus} out of range");
        Characteristic { genus: genus as u8, eps: 0, delta: 0 }
    }

    /// Build from component vectors. Integer entries are reduced mod 2, so
    /// `-1` becomes `1`.
    pub fn from_components(eps: &[i64], delta: &[i64]) -> Result<Self> {
        if eps.len() != delta.len() {
            return Err(Error::InvalidCharacteristic(format!(
                "eps has length {} but delta has length {}",
                eps.len(),
                delta.len()
            )));
        }
        let g = eps.len();
        if g == 0 || g > MAX_CHAR_GENUS {
            return Err(Error::InvalidCharacteristic(format!("genus {g} out of range")));
        }
        let pack = |v: &[i64]| {
            v.iter()
                .enumerate()
                .fold(0u32, |acc, (i, &b)| acc | (((b.rem_euclid(2)) as u32) << i))
        };
        Ok(Characteristic { genus: g as u8, eps: pack(eps), delta: pack(delta) })
    }

    /// Strict constructor for untrusted input: every component must be 0 or 1.
    pub fn from_bits(eps: &[u8], delta: &[u8]) -> Result<Self> {
        if let Some(b) = eps.iter().chain(delta).find(|&&b| b > 1) {
            return Err(Error::InvalidCharacteristic(format!("component {b} is not a bit")));
        }
        let e: Vec<i64> = eps.iter().map(|&b| b as i64).collect();
        let d: Vec<i64> = delta.iter().map(|&b| b as i64).collect();
        Self::from_components(&e, &d)
    }

    pub fn genus(&self) -> usize {
        self.genus as usize
    }

    pub fn eps_bit(&self, i: usize) -> u8 {
        ((self.eps >> i) & 1) as u8
    }

    pub fn delta_bit(&self, i: usize) -> u8 {
        ((self.delta >> i) & 1) as u8
    }

    pub fn eps(&self) -> Vec<u8> {
        (0..self.genus()).map(|i| self.eps_bit(i)).collect()
    }

    pub fn delta(&self) -> Vec<u8> {
        (0..self.genus()).map(|i| self.delta_bit(i)).collect()
    }

    pub fn eps_f64(&self) -> Vec<f64> {
        (0..self.genus()).map(|i| self.eps_bit(i) as f64).collect()
    }

    pub fn delta_f64(&self) -> Vec<f64> {
        (0..self.genus()).map(|i| self.delta_bit(i) as f64).collect()
    }

    /// `ε·δ mod 2`.
    pub fn parity(&self) -> Parity {
        if (self.eps & self.delta).count_ones() % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn is_even(&self) -> bool {
        self.parity() == Parity::Even
    }

    pub fn is_zero(&self) -> bool {
        self.eps == 0 && self.delta == 0
    }

    /// Characteristic of a block-diagonal period matrix `τ1 ⊕ τ2`.
    pub fn direct_sum(&self, other: &Characteristic) -> Characteristic {
        let g = self.genus() + other.genus();
        assert!(g <= MAX_CHAR_GENUS, "genus {g} out of range");
        Characteristic {
            genus: g as u8,
            eps: self.eps | (other.eps << self.genus),
            delta: self.delta | (other.delta << self.genus),
        }
    }

    /// Position of this characteristic in the canonical order of all `4^g`.
    pub fn index(&self) -> u64 {
        let g = self.genus();
        ((reverse_bits(self.eps, g) as u64) << g) | reverse_bits(self.delta, g) as u64
    }

    fn from_index(genus: usize, idx: u64) -> Self {
        let mask = (1u64 << genus) - 1;
        Characteristic {
            genus: genus as u8,
            eps: reverse_bits(((idx >> genus) & mask) as u32, genus),
            delta: reverse_bits((idx & mask) as u32, genus),
        }
    }
}

fn reverse_bits(v: u32, g: usize) -> u32 {
    (0..g).fold(0, |acc, i| acc | (((v >> i) & 1) << (g - 1 - i)))
}

impl Ord for Characteristic {
    fn cmp(&self, other: &Self) -> Ordering {
        self.genus.cmp(&other.genus).then(self.index().cmp(&other.index()))
    }
}

impl PartialOrd for Characteristic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Characteristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Compact form `eps:delta`, e.g. `11:10`.
impl fmt::Display for Characteristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits = |v: Vec<u8>| v.iter().map(|b| char::from(b'0' + b)).collect::<String>();
        write!(f, "[{}:{}]", bits(self.eps()), bits(self.delta()))
    }
}

/// Accepts `11:10`, `[11:10]` or the JSON form `{"eps":[1,1],"delta":[1,0]}`.
impl FromStr for Characteristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            return serde_json::from_str(s).map_err(|e| Error::InvalidCharacteristic(e.to_string()));
        }
        let inner = s.trim_start_matches('[').trim_end_matches(']');
        let (e, d) = inner
            .split_once(':')
            .ok_or_else(|| Error::InvalidCharacteristic(format!("expected eps:delta, got {s:?}")))?;
        let parse = |t: &str| -> Result<Vec<u8>> {
            t.chars()
                .filter(|c| !matches!(c, ',' | ' '))
                .map(|c| match c {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    other => Err(Error::InvalidCharacteristic(format!("bad bit {other:?}"))),
                })
                .collect()
        };
        Characteristic::from_bits(&parse(e)?, &parse(d)?)
    }
}

#[derive(Serialize, Deserialize)]
struct CharacteristicJson {
    eps: Vec<u8>,
    delta: Vec<u8>,
}

impl Serialize for Characteristic {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CharacteristicJson { eps: self.eps(), delta: self.delta() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Characteristic {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = CharacteristicJson::deserialize(d)?;
        Characteristic::from_bits(&raw.eps, &raw.delta).map_err(serde::de::Error::custom)
    }
}

pub fn parity(ch: &Characteristic) -> Parity {
    ch.parity()
}

/// All `4^g` characteristics in canonical order.
pub fn enumerate_all(genus: usize) -> Vec<Characteristic> {
    assert!((1..=MAX_CHAR_GENUS).contains(&genus), "genus {genus} out of range");
    (0..(1u64 << (2 * genus))).map(|i| Characteristic::from_index(genus, i)).collect()
}

/// The `2^{g-1}(2^g+1)` even characteristics in canonical order.
pub fn enumerate_even(genus: usize) -> Vec<Characteristic> {
    enumerate_all(genus).into_iter().filter(Characteristic::is_even).collect()
}

/// The `2^{g-1}(2^g-1)` odd characteristics in canonical order.
pub fn enumerate_odd(genus: usize) -> Vec<Characteristic> {
    enumerate_all(genus).into_iter().filter(|c| !c.is_even()).collect()
}

/// The 2-torsion point `(τε + δ)/2`.
pub fn half_period(tau: &PeriodMatrix, ch: &Characteristic) -> Result<Vec<Complex64>> {
    let g = tau.genus();
    if ch.genus() != g {
        return Err(Error::GenusMismatch { expected: g, got: ch.genus() });
    }
    let m = tau.matrix();
    Ok((0..g)
        .map(|i| {
            let te: Complex64 = (0..g).map(|j| m[(i, j)] * ch.eps_bit(j) as f64).sum();
            (te + ch.delta_bit(i) as f64) * 0.5
        })
        .collect())
}
