#![allow(dead_code)]

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn occurs(haystack: &[u8], needle: &[u8]) -> bool {
    needle.len() <= haystack.len() && haystack.windows(needle.len()).any(|w| w == needle)
}

/// Word count by literal substring search: a word keeps growing while it
/// still occurs in the text before its own last symbol.
pub fn naive_lz76(s: &[u8]) -> usize {
    let n = s.len();
    let (mut c, mut i) = (0, 0);
    while i < n {
        let mut l = 1;
        while i + l <= n && occurs(&s[..i + l - 1], &s[i..i + l]) {
            l += 1;
        }
        c += 1;
        i += l;
    }
    c
}

fn arctan_inv(x: u32, scale: &BigInt) -> BigInt {
    let x2 = BigInt::from(x) * x;
    let mut power = scale / x;
    let mut sum = power.clone();
    let mut k = 1u32;
    loop {
        power /= &x2;
        if power == BigInt::from(0) {
            return sum;
        }
        let term = &power / (2 * k + 1);
        if k % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
        k += 1;
    }
}

/// First `n` bits of the binary expansion of pi, starting with the integer
/// part `11`.
pub fn pi_bits(n: usize) -> Vec<u8> {
    const GUARD: usize = 64;
    let scale = BigInt::from(1) << (n - 2 + GUARD);
    let pi: BigInt = (arctan_inv(5, &scale) * 16 - arctan_inv(239, &scale) * 4) >> GUARD;
    pi.to_str_radix(2).bytes().take(n).map(|b| b - b'0').collect()
}

pub fn prng_bits(seed: u64, n: usize) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(0..2u8)).collect()
}

pub fn bit_string(bits: &[u8]) -> String {
    bits.iter().map(|&b| char::from(b'0' + b)).collect()
}
