use alloc::vec::Vec;
use core::fmt;

use super::{KernelError, ParamSubstitution, Polynomial};

/// Bitstring, most significant bit first.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct BitString(pub Vec<bool>);

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString(alloc::vec![false; len])
    }

    pub fn ones(len: usize) -> Self {
        BitString(alloc::vec![true; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// All strings of length `len` in increasing binary order.
    pub fn all(len: usize) -> impl Iterator<Item = BitString> {
        let count: u64 = 1u64 << len;
        (0..count).map(move |k| BitString::from_u64(k, len))
    }

    pub fn from_u64(k: u64, len: usize) -> Self {
        BitString((0..len).rev().map(|i| (k >> i) & 1 == 1).collect())
    }

    /// Left-pad with zeros to `len`; `None` if already longer.
    pub fn padded(&self, len: usize) -> Option<BitString> {
        if self.0.len() > len {
            return None;
        }
        let mut bits = alloc::vec![false; len - self.0.len()];
        bits.extend_from_slice(&self.0);
        Some(BitString(bits))
    }

    pub fn xor(&self, other: &BitString) -> BitString {
        BitString(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect())
    }

    pub fn parse_bits(s: &str) -> Option<BitString> {
        s.chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<Vec<bool>>>()
            .map(BitString)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("#")?;
        for b in &self.0 {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum GroundType {
    Bool,
    Str(Polynomial),
}

impl fmt::Display for GroundType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundType::Bool => f.write_str("Bool"),
            GroundType::Str(p) => write!(f, "Str[{p}]"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum GroundValue {
    Bool(bool),
    Bits(BitString),
}

impl fmt::Display for GroundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundValue::Bool(true) => f.write_str("true"),
            GroundValue::Bool(false) => f.write_str("false"),
            GroundValue::Bits(b) => write!(f, "{b}"),
        }
    }
}

/// Concrete carrier of a ground type at a given assignment.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Carrier {
    Bool,
    Bits(usize),
}

impl Carrier {
    pub fn values(&self) -> Vec<GroundValue> {
        match self {
            Carrier::Bool => alloc::vec![GroundValue::Bool(false), GroundValue::Bool(true)],
            Carrier::Bits(n) => BitString::all(*n).map(GroundValue::Bits).collect(),
        }
    }

    /// Membership, allowing strings shorter than the carrier length.
    pub fn admits(&self, v: &GroundValue) -> bool {
        match (self, v) {
            (Carrier::Bool, GroundValue::Bool(_)) => true,
            (Carrier::Bits(n), GroundValue::Bits(b)) => b.len() <= *n,
            _ => false,
        }
    }

    /// Bring `v` to the carrier's canonical representative.
    pub fn normalize(&self, v: &GroundValue) -> Option<GroundValue> {
        match (self, v) {
            (Carrier::Bool, GroundValue::Bool(b)) => Some(GroundValue::Bool(*b)),
            (Carrier::Bits(n), GroundValue::Bits(b)) => b.padded(*n).map(GroundValue::Bits),
            _ => None,
        }
    }
}

pub fn carrier(ty: &GroundType, rho: &ParamSubstitution) -> Result<Carrier, KernelError> {
    match ty {
        GroundType::Bool => Ok(Carrier::Bool),
        GroundType::Str(p) => Ok(Carrier::Bits(p.eval(rho)? as usize)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::rho;

    #[test]
    fn carriers() {
        let c = carrier(&GroundType::Str(Polynomial::var("n")), &rho("n", 3)).unwrap();
        assert_eq!(c.values().len(), 8);
        assert_eq!(carrier(&GroundType::Bool, &rho("n", 3)).unwrap().values().len(), 2);
        let c0 = carrier(&GroundType::Str(Polynomial::var("n")), &rho("n", 0)).unwrap();
        assert_eq!(c0.values(), alloc::vec![GroundValue::Bits(BitString::default())]);
    }

    #[test]
    fn padding_is_msb_first() {
        let b = BitString::parse_bits("1").unwrap();
        assert_eq!(b.padded(3).unwrap().to_string(), "#001");
        assert_eq!(BitString::from_u64(5, 3).to_string(), "#101");
    }
}
