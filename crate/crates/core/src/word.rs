//! Unbounded non-negative machine words and the structured bit-pattern
//! builders (replication, block masks, digit masks) shared by the host
//! simulator and the transpiler.

use std::fmt;
use std::ops::{Add, BitAnd, BitOr, BitXor, Mul, Shl, Shr};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

/// One MRAM memory cell: a non-negative integer of unbounded bit width.
///
/// There are no negative values anywhere in the machine model; subtraction
/// is monus (saturates at zero).
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(BigUint);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WordError {
    #[error("pattern needs {pattern_bits} bits but the declared width is {width}")]
    PatternTooWide { pattern_bits: u64, width: u64 },
    #[error("digit mask parameters out of range: g={g}, p={p}, a={a}, digits={digits}")]
    BadDigitMask { g: u64, p: u32, a: u64, digits: u32 },
    #[error("pattern size overflows the host word: {0}")]
    SizeOverflow(String),
}

impl Word {
    pub fn zero() -> Self {
        Word(BigUint::zero())
    }

    pub fn one() -> Self {
        Word(BigUint::one())
    }

    /// 2^k.
    pub fn pow2(k: u64) -> Self {
        let mut b = BigUint::zero();
        b.set_bit(k, true);
        Word(b)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Raw binary length: number of bits in the value, 0 for zero.
    /// Cost accounting wants [`bitlen`] instead, which maps 0 to 1.
    pub fn bits(&self) -> u64 {
        self.0.bits()
    }

    /// Number of binary digits; by convention `bitlen(0) = 1` so every
    /// operand contributes positive cost under the logarithmic model.
    pub fn bitlen(&self) -> u64 {
        self.0.bits().max(1)
    }

    pub fn bit(&self, i: u64) -> bool {
        self.0.bit(i)
    }

    pub fn set_bit(&mut self, i: u64, value: bool) {
        self.0.set_bit(i, value);
    }

    pub fn count_ones(&self) -> u64 {
        self.0.count_ones()
    }

    /// Indices of the set bits, lowest first.
    pub fn iter_set_bits(&self) -> impl Iterator<Item = u64> + '_ {
        self.0
            .iter_u64_digits()
            .enumerate()
            .flat_map(|(limb_idx, limb)| {
                (0..64).filter_map(move |b| {
                    if (limb >> b) & 1 == 1 {
                        Some(limb_idx as u64 * 64 + b)
                    } else {
                        None
                    }
                })
            })
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }

    pub fn to_usize(&self) -> Option<usize> {
        self.0.to_usize()
    }

    /// Natural-number subtraction: `max(self - rhs, 0)`.
    pub fn monus(&self, rhs: &Word) -> Word {
        if self.0 >= rhs.0 {
            Word(&self.0 - &rhs.0)
        } else {
            Word::zero()
        }
    }

    /// Floor division; `None` when `rhs` is zero.
    pub fn div_floor(&self, rhs: &Word) -> Option<Word> {
        if rhs.0.is_zero() {
            None
        } else {
            Some(Word(&self.0 / &rhs.0))
        }
    }

    pub fn as_biguint(&self) -> &BigUint {
        &self.0
    }

    pub fn into_biguint(self) -> BigUint {
        self.0
    }
}

/// `bitlen` as a free function, for call sites that read better that way.
pub fn bitlen(w: &Word) -> u64 {
    w.bitlen()
}

/// Σ_{i=0}^{count-1} pattern · 2^{i·width}: `count` copies of `pattern`
/// laid side by side in fields of `width` bits.
///
/// Built with the doubling recurrence rep(2k) = rep(k)·(1 + 2^{k·width}),
/// so the mirrored MRAM subroutine needs only O(log count) multiply/add
/// instructions; the transpiler emits exactly this shape.
pub fn replicate(pattern: &Word, width: u64, count: u64) -> Result<Word, WordError> {
    if pattern.bits() > width {
        return Err(WordError::PatternTooWide {
            pattern_bits: pattern.bits(),
            width,
        });
    }
    if count == 0 {
        return Ok(Word::zero());
    }
    width
        .checked_mul(count)
        .ok_or_else(|| WordError::SizeOverflow(format!("{width} bits x {count} copies")))?;

    let mut acc = pattern.clone();
    let mut len: u64 = 1; // copies accumulated so far
    let top = 63 - count.leading_zeros() as u64;
    for bit_pos in (0..top).rev() {
        // rep(2k) = rep(k) * (1 + 2^{k*width})
        acc = &acc * &(Word::pow2(len * width) + Word::one());
        len *= 2;
        if (count >> bit_pos) & 1 == 1 {
            // rep(2k+1) = (rep(2k) << width) + pattern
            acc = (acc << width) + pattern.clone();
            len += 1;
        }
    }
    debug_assert_eq!(len, count);
    Ok(acc)
}

/// Ones at exactly the bit positions `base .. base+length`: (2^length − 1)·2^base.
pub fn blockmask(base: u64, length: u64) -> Word {
    let ones = Word::pow2(length).monus(&Word::one());
    ones << base
}

/// The word with a one at every bit position i ∈ [0, g^digits) whose base-g
/// digit number `p` equals `a`, and zeros elsewhere.
///
/// Equals replicate(blockmask(a·g^p, g^p), g^{p+1}, g^{digits−p−1}).
pub fn digitmask(g: u64, p: u32, a: u64, digits: u32) -> Result<Word, WordError> {
    if g < 2 || a >= g || digits <= p {
        return Err(WordError::BadDigitMask { g, p, a, digits });
    }
    let overflow = || WordError::SizeOverflow(format!("g={g}, digits={digits}"));
    let g_p = g.checked_pow(p).ok_or_else(overflow)?;
    let g_p1 = g.checked_pow(p + 1).ok_or_else(overflow)?;
    let rest = g.checked_pow(digits - p - 1).ok_or_else(overflow)?;
    let block = blockmask(a.checked_mul(g_p).ok_or_else(overflow)?, g_p);
    replicate(&block, g_p1, rest)
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({})", self.0)
    }
}

impl From<u64> for Word {
    fn from(v: u64) -> Self {
        Word(BigUint::from(v))
    }
}

impl From<u32> for Word {
    fn from(v: u32) -> Self {
        Word(BigUint::from(v))
    }
}

impl From<usize> for Word {
    fn from(v: usize) -> Self {
        Word(BigUint::from(v))
    }
}

impl From<BigUint> for Word {
    fn from(v: BigUint) -> Self {
        Word(v)
    }
}

impl FromStr for Word {
    type Err = num_bigint::ParseBigIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(Word(s.parse()?))
    }
}

impl Add for Word {
    type Output = Word;
    fn add(self, rhs: Word) -> Word {
        Word(self.0 + rhs.0)
    }
}

impl Add for &Word {
    type Output = Word;
    fn add(self, rhs: &Word) -> Word {
        Word(&self.0 + &rhs.0)
    }
}

impl Mul for &Word {
    type Output = Word;
    fn mul(self, rhs: &Word) -> Word {
        Word(&self.0 * &rhs.0)
    }
}

impl BitAnd for &Word {
    type Output = Word;
    fn bitand(self, rhs: &Word) -> Word {
        Word(&self.0 & &rhs.0)
    }
}

impl BitOr for &Word {
    type Output = Word;
    fn bitor(self, rhs: &Word) -> Word {
        Word(&self.0 | &rhs.0)
    }
}

impl BitXor for &Word {
    type Output = Word;
    fn bitxor(self, rhs: &Word) -> Word {
        Word(&self.0 ^ &rhs.0)
    }
}

impl Shl<u64> for Word {
    type Output = Word;
    fn shl(self, k: u64) -> Word {
        Word(self.0 << k)
    }
}

impl Shl<u64> for &Word {
    type Output = Word;
    fn shl(self, k: u64) -> Word {
        Word(&self.0 << k)
    }
}

impl Shr<u64> for &Word {
    type Output = Word;
    fn shr(self, k: u64) -> Word {
        if k >= self.0.bits() {
            Word::zero()
        } else {
            Word(&self.0 >> k)
        }
    }
}
