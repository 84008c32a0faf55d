//! Sign formulas, returned as `+1` / `-1`.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub type Sign = i32;

/// `(-1)^e` for any integer exponent.
pub fn pow_m1(e: i64) -> Sign {
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

pub fn relation_sign(j: usize, k: usize, l: usize) -> Sign {
    pow_m1((j + k * l) as i64)
}

/// Sign of the term `m_{j+1+l}(x_1..x_j, m_k(..), ..)` in the relations.
pub fn relation_entry_sign(j: usize, k: usize, l: usize, degs: &[i64]) -> Sign {
    let s: i64 = degs[..j].iter().sum();
    pow_m1(j as i64 + (k * l) as i64 + (2 - k as i64) * s)
}

pub fn morphism_lhs_sign(j: usize, k: usize, l: usize) -> Sign {
    pow_m1((l + j * k) as i64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum Convention {
    Keller,
    LH,
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::Keller => "Keller",
            Convention::LH => "LH",
        })
    }
}

impl FromStr for Convention {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "keller" => Ok(Convention::Keller),
            "lh" => Ok(Convention::LH),
            _ => Err(format!("unknown convention {s}")),
        }
    }
}

impl Convention {
    pub fn other(self) -> Self {
        match self {
            Convention::Keller => Convention::LH,
            Convention::LH => Convention::Keller,
        }
    }
}

/// Sign of `m'_r (f_{i_1} ⊗ ... ⊗ f_{i_r})` in the morphism relations.
pub fn morphism_rhs_sign(partition: &[usize], convention: Convention) -> Sign {
    let r = partition.len() as i64;
    let e: i64 = match convention {
        Convention::Keller => partition
            .iter()
            .enumerate()
            .map(|(idx, &i)| (r - (idx as i64 + 1)) * (i as i64 - 1))
            .sum(),
        Convention::LH => {
            let mut acc = 0i64;
            let mut run = 0i64;
            for &i in partition {
                run += i as i64;
                acc += (1 - i as i64) * run;
            }
            acc
        }
    };
    pow_m1(e)
}

pub fn convention_convert_sign(i: usize) -> Sign {
    pow_m1((i * i.saturating_sub(1) / 2) as i64)
}

/// Sign of a boundary stratum created at the edge to the right of leaf `j`.
pub fn boundary_component_sign(n: usize, j: usize, stable_dims: &[usize]) -> Sign {
    let s: i64 = stable_dims[..j].iter().map(|&d| d as i64 - n as i64).sum();
    pow_m1(n as i64 + j as i64 - 1 + s)
}

pub fn koszul_swap_sign(a: i64, b: i64) -> Sign {
    pow_m1(a * b)
}

/// Prefactor exponent families for `m_d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum PrefactorStrategy {
    /// `sum_{i=2}^d (i-1)|x_i|`
    Weighted,
    /// `(d-1)|x_d| + sum_{i=1}^{d-2} i|x_i|`
    LiteralTail,
    /// `sum_{i=1}^{d} (d-i)|x_i|`
    Reversed,
    /// `sum_{i=1}^{d} i|x_i|`
    Shifted,
    /// no prefactor
    Trivial,
}

impl PrefactorStrategy {
    pub const ALL: [PrefactorStrategy; 5] = [
        PrefactorStrategy::Weighted,
        PrefactorStrategy::LiteralTail,
        PrefactorStrategy::Reversed,
        PrefactorStrategy::Shifted,
        PrefactorStrategy::Trivial,
    ];

    pub fn exponent(self, degs: &[i64]) -> i64 {
        let d = degs.len() as i64;
        let x = |i: i64| degs[(i - 1) as usize];
        match self {
            PrefactorStrategy::Weighted => (2..=d).map(|i| (i - 1) * x(i)).sum(),
            PrefactorStrategy::LiteralTail => {
                if d < 2 {
                    0
                } else {
                    (d - 1) * x(d) + (1..=d - 2).map(|i| i * x(i)).sum::<i64>()
                }
            }
            PrefactorStrategy::Reversed => (1..=d).map(|i| (d - i) * x(i)).sum(),
            PrefactorStrategy::Shifted => (1..=d).map(|i| i * x(i)).sum(),
            PrefactorStrategy::Trivial => 0,
        }
    }
}

impl fmt::Display for PrefactorStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for PrefactorStrategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        PrefactorStrategy::ALL
            .iter()
            .copied()
            .find(|p| format!("{p:?}").eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown prefactor strategy {s}"))
    }
}

pub fn md_prefactor(degs: &[i64], strategy: PrefactorStrategy) -> Sign {
    if degs.len() <= 1 {
        return 1;
    }
    pow_m1(strategy.exponent(degs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relation_signs() {
        assert_eq!(relation_sign(0, 1, 0), 1);
        assert_eq!(relation_sign(1, 2, 0), -1);
        assert_eq!(relation_sign(1, 1, 1), 1);
        assert_eq!(relation_entry_sign(1, 2, 0, &[1]), -1);
        assert_eq!(relation_entry_sign(1, 1, 1, &[1]), -1);
        assert_eq!(relation_entry_sign(0, 2, 3, &[]), pow_m1(6));
    }

    #[test]
    fn morphism_signs() {
        assert_eq!(morphism_lhs_sign(0, 1, 0), 1);
        assert_eq!(morphism_lhs_sign(1, 1, 0), -1);
        assert_eq!(morphism_lhs_sign(0, 2, 1), -1);
        assert_eq!(morphism_rhs_sign(&[1, 1], Convention::Keller), 1);
        assert_eq!(morphism_rhs_sign(&[2, 1], Convention::Keller), -1);
        assert_eq!(morphism_rhs_sign(&[1, 1], Convention::LH), 1);
    }

    #[test]
    fn conversion_and_boundary() {
        assert_eq!(convention_convert_sign(1), 1);
        assert_eq!(convention_convert_sign(2), -1);
        assert_eq!(convention_convert_sign(4), 1);
        assert_eq!(boundary_component_sign(2, 1, &[1]), -1);
        assert_eq!(boundary_component_sign(2, 0, &[]), -1);
        assert_eq!(boundary_component_sign(2, 2, &[1, 1]), -1);
    }

    #[test]
    fn prefactor_and_koszul() {
        assert_eq!(md_prefactor(&[5], PrefactorStrategy::Weighted), 1);
        assert_eq!(md_prefactor(&[1, 1], PrefactorStrategy::Weighted), -1);
        assert_eq!(md_prefactor(&[0, 0], PrefactorStrategy::Weighted), 1);
        assert_eq!(koszul_swap_sign(1, 1), -1);
        assert_eq!(koszul_swap_sign(0, 7), 1);
        assert_eq!(koszul_swap_sign(2, 3), 1);
        assert_eq!("weighted".parse::<PrefactorStrategy>(), Ok(PrefactorStrategy::Weighted));
    }
}
