use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, TodaError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl Family {
    pub fn letter(self) -> char {
        match self {
            Family::A => 'A',
            Family::B => 'B',
            Family::C => 'C',
            Family::D => 'D',
            Family::E => 'E',
            Family::F => 'F',
            Family::G => 'G',
        }
    }

    fn from_letter(c: char) -> Option<Self> {
        Some(match c.to_ascii_uppercase() {
            'A' => Family::A,
            'B' => Family::B,
            'C' => Family::C,
            'D' => Family::D,
            'E' => Family::E,
            'F' => Family::F,
            'G' => Family::G,
            _ => return None,
        })
    }
}

/// A simple Lie algebra label: family letter plus rank, e.g. `E8`.
///
/// Construction enforces the rank constraints of each family, so every value
/// of this type names an algebra with a well-defined Cartan matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LieAlgebraType {
    family: Family,
    rank: usize,
}

impl LieAlgebraType {
    pub fn new(family: Family, rank: usize) -> Result<Self> {
        let violated = match family {
            Family::A if rank < 1 => Some("family A requires rank >= 1"),
            Family::B if rank < 2 => Some("family B requires rank >= 2"),
            Family::C if rank < 2 => Some("family C requires rank >= 2"),
            Family::D if rank < 3 => Some("family D requires rank >= 3"),
            Family::E if !(6..=8).contains(&rank) => Some("family E requires rank in {6, 7, 8}"),
            Family::F if rank != 4 => Some("family F requires rank = 4"),
            Family::G if rank != 2 => Some("family G requires rank = 2"),
            _ => None,
        };
        match violated {
            Some(constraint) => Err(TodaError::InvalidRank {
                family: family.letter(),
                rank,
                constraint,
            }),
            None => Ok(Self { family, rank }),
        }
    }

    pub fn a(rank: usize) -> Result<Self> {
        Self::new(Family::A, rank)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// The nine algebra types at representative ranks, parametric families
    /// at the given rank (clamped up to the family minimum).
    pub fn representatives(rank: usize) -> Vec<Self> {
        use Family::*;
        let mut out = vec![
            Self::new(A, rank.max(1)),
            Self::new(B, rank.max(2)),
            Self::new(C, rank.max(2)),
            Self::new(D, rank.max(3)),
        ];
        out.extend([6, 7, 8].map(|r| Self::new(E, r)));
        out.push(Self::new(F, 4));
        out.push(Self::new(G, 2));
        out.into_iter().map(|r| r.expect("valid representative")).collect()
    }
}

impl fmt::Display for LieAlgebraType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.family.letter(), self.rank)
    }
}

impl FromStr for LieAlgebraType {
    type Err = TodaError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut chars = s.chars();
        let family = chars
            .next()
            .and_then(Family::from_letter)
            .ok_or_else(|| TodaError::UnknownAlgebra(s.to_string()))?;
        let rank: usize = chars
            .as_str()
            .parse()
            .map_err(|_| TodaError::UnknownAlgebra(s.to_string()))?;
        Self::new(family, rank)
    }
}

impl Serialize for LieAlgebraType {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LieAlgebraType {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
