use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::KernelError;

/// Exact probability.
pub type Prob = BigRational;

pub fn prob(num: i64, den: i64) -> Prob {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Finitely supported distribution with exact rational weights summing to 1.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Distribution<T: Ord> {
    support: BTreeMap<T, Prob>,
}

impl<T: Ord + Clone> Distribution<T> {
    pub fn pure(x: T) -> Self {
        let mut support = BTreeMap::new();
        support.insert(x, Prob::one());
        Distribution { support }
    }

    /// Merge equal outcomes, drop zero weights, and insist on a total of 1.
    pub fn from_weights<I: IntoIterator<Item = (T, Prob)>>(items: I) -> Result<Self, KernelError> {
        let mut support: BTreeMap<T, Prob> = BTreeMap::new();
        let mut total = Prob::zero();
        for (x, w) in items {
            if w.is_negative() {
                return Err(KernelError::InvalidWeights);
            }
            total += &w;
            *support.entry(x).or_insert_with(Prob::zero) += w;
        }
        support.retain(|_, w| !w.is_zero());
        if !total.is_one() || support.is_empty() {
            return Err(KernelError::InvalidWeights);
        }
        Ok(Distribution { support })
    }

    pub fn uniform<I: IntoIterator<Item = T>>(items: I) -> Result<Self, KernelError> {
        let xs: Vec<T> = items.into_iter().collect();
        if xs.is_empty() {
            return Err(KernelError::InvalidWeights);
        }
        let w = Prob::new(BigInt::one(), BigInt::from(xs.len()));
        Self::from_weights(xs.into_iter().map(|x| (x, w.clone())))
    }

    pub fn map<U: Ord + Clone, F: FnMut(&T) -> U>(&self, mut f: F) -> Distribution<U> {
        let mut support: BTreeMap<U, Prob> = BTreeMap::new();
        for (x, w) in &self.support {
            *support.entry(f(x)).or_insert_with(Prob::zero) += w;
        }
        Distribution { support }
    }

    pub fn bind<U: Ord + Clone, F: FnMut(&T) -> Distribution<U>>(&self, mut k: F) -> Distribution<U> {
        self.try_bind::<U, core::convert::Infallible, _>(|x| Ok(k(x)))
            .unwrap_or_else(|e| match e {})
    }

    pub fn try_bind<U: Ord + Clone, E, F: FnMut(&T) -> Result<Distribution<U>, E>>(
        &self,
        mut k: F,
    ) -> Result<Distribution<U>, E> {
        let mut support: BTreeMap<U, Prob> = BTreeMap::new();
        for (x, w) in &self.support {
            for (y, v) in k(x)?.support {
                *support.entry(y).or_insert_with(Prob::zero) += w * v;
            }
        }
        Ok(Distribution { support })
    }

    /// Convex combination `Σ rᵢ·𝒟ᵢ`.
    pub fn sum<I: IntoIterator<Item = (Prob, Distribution<T>)>>(parts: I) -> Result<Self, KernelError> {
        let mut items = Vec::new();
        for (r, d) in parts {
            for (x, w) in d.support {
                items.push((x, &r * w));
            }
        }
        Self::from_weights(items)
    }

    pub fn prob(&self, x: &T) -> Prob {
        self.support.get(x).cloned().unwrap_or_else(Prob::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = &T> {
        self.support.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, &Prob)> {
        self.support.iter()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn is_dirac(&self) -> bool {
        self.support.len() == 1
    }

    pub fn into_entries(self) -> Vec<(T, Prob)> {
        self.support.into_iter().collect()
    }
}

impl<T: Ord + fmt::Display> fmt::Display for Distribution<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (x, w)) in self.support.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{w}: {x}")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_must_sum_to_one() {
        assert_eq!(
            Distribution::from_weights([(1, prob(1, 2)), (2, prob(1, 3))]),
            Err(KernelError::InvalidWeights)
        );
        let d = Distribution::from_weights([(1, prob(1, 2)), (1, prob(1, 2))]).unwrap();
        assert!(d.is_dirac());
    }

    #[test]
    fn bind_of_coins() {
        let coin = Distribution::uniform([false, true]).unwrap();
        let two = coin.bind(|a| coin.map(|b| *a as u8 + *b as u8));
        assert_eq!(two.prob(&1), prob(1, 2));
        assert_eq!(two.prob(&0), prob(1, 4));
    }
}
