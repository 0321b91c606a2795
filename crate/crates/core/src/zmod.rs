//! Exact arithmetic in Z/NZ: factorization, CRT, and square roots.
//!
//! Everything here works on `u64` residues with `u128` intermediate
//! products, which is far more than the moduli used elsewhere in the crate
//! ever need.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Primes below this bound have their square roots found by a direct scan;
/// larger primes go through Tonelli-Shanks.
const SCAN_LIMIT: u64 = 64;

/// The ring Z/NZ together with its factorization.
///
/// Cloning is cheap: the factorization and the table of N-th roots of unity
/// used by the transforms are shared.
#[derive(Clone)]
pub struct RingContext {
    inner: Arc<RingInner>,
}

struct RingInner {
    modulus: u64,
    prime_factors: Vec<(u64, u32)>,
    squarefree: bool,
    // roots[k] = exp(2 pi i k / N), each entry evaluated independently.
    roots: Vec<Complex64>,
}

impl RingContext {
    /// Factors `modulus` by trial division.
    pub fn new(modulus: u64) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::ModulusTooSmall(modulus));
        }
        let prime_factors = factorize(modulus);
        let squarefree = prime_factors.iter().all(|&(_, e)| e == 1);
        let roots = (0..modulus)
            .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / modulus as f64))
            .collect();
        Ok(Self {
            inner: Arc::new(RingInner {
                modulus,
                prime_factors,
                squarefree,
                roots,
            }),
        })
    }

    pub fn modulus(&self) -> u64 {
        self.inner.modulus
    }

    /// The modulus as an index bound.
    pub fn n(&self) -> usize {
        self.inner.modulus as usize
    }

    /// Ascending `(prime, multiplicity)` pairs.
    pub fn prime_factors(&self) -> &[(u64, u32)] {
        &self.inner.prime_factors
    }

    /// Number of distinct prime divisors.
    pub fn omega(&self) -> u32 {
        self.inner.prime_factors.len() as u32
    }

    pub fn is_squarefree(&self) -> bool {
        self.inner.squarefree
    }

    /// `exp(2 pi i k / N)` for `k` in `0..N`.
    pub fn roots_of_unity(&self) -> &[Complex64] {
        &self.inner.roots
    }

    pub fn same_ring(&self, other: &RingContext) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.modulus() == other.modulus()
    }

    pub(crate) fn check_same(&self, other: &RingContext) -> Result<()> {
        if self.same_ring(other) {
            Ok(())
        } else {
            Err(Error::RingMismatch {
                expected: self.modulus(),
                found: other.modulus(),
            })
        }
    }

    pub(crate) fn require_squarefree(&self) -> Result<()> {
        if self.is_squarefree() {
            Ok(())
        } else {
            Err(Error::NotSquarefree(self.modulus()))
        }
    }

    /// Residues `z` in `0..N` with `z^2 = c (mod N)`, ascending.
    pub fn square_roots(&self, c: u64) -> Vec<u64> {
        square_roots_mod(c, self)
    }

    /// Number of square roots of `c` modulo `N`.
    pub fn count_square_roots(&self, c: u64) -> u64 {
        count_square_roots(c, self)
    }
}

impl fmt::Debug for RingContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RingContext")
            .field("modulus", &self.modulus())
            .field("prime_factors", &self.prime_factors())
            .field("omega", &self.omega())
            .field("squarefree", &self.is_squarefree())
            .finish()
    }
}

impl PartialEq for RingContext {
    fn eq(&self, other: &Self) -> bool {
        self.modulus() == other.modulus()
    }
}

impl Eq for RingContext {}

/// Builds the ring context for Z/NZ; rejects `N < 2`.
pub fn make_ring(modulus: u64) -> Result<RingContext> {
    RingContext::new(modulus)
}

fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut factors = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            factors.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        factors.push((n, 1));
    }
    factors
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Combines `(value, modulus)` congruences with pairwise coprime moduli into
/// the unique residue modulo their product.
pub fn crt_combine(residues: &[(u64, u64)]) -> Result<u64> {
    for (i, &(_, a)) in residues.iter().enumerate() {
        if a == 0 {
            return Err(Error::ModulusTooSmall(0));
        }
        for &(_, b) in &residues[i + 1..] {
            if gcd(a, b) != 1 {
                return Err(Error::NotCoprime(a, b));
            }
        }
    }
    let mut x = 0u64;
    let mut m = 1u64;
    for &(v, mi) in residues {
        let v = v % mi;
        // x + m * k = v (mod mi)
        let m_inv = inv_mod(m % mi, mi).expect("coprime moduli are invertible");
        let diff = (v + mi - x % mi) % mi;
        let k = mul_mod(diff, m_inv, mi);
        let next = m
            .checked_mul(mi)
            .ok_or_else(|| Error::Invalid("CRT product overflows u64".into()))?;
        x = ((x as u128 + m as u128 * k as u128) % next as u128) as u64;
        m = next;
    }
    Ok(x)
}

/// Legendre symbol of `a` modulo an odd prime `p`: 0, 1 or -1.
pub fn legendre(a: u64, p: u64) -> i32 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    if pow_mod(a, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Tonelli-Shanks square root of a nonzero quadratic residue `a` modulo an
/// odd prime `p`. Returns `None` when `a` is a non-residue.
pub fn tonelli_shanks(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if legendre(a, p) != 1 {
        return None;
    }
    let mut q = p - 1;
    let mut s = 0;
    while q.is_multiple_of(2) {
        q /= 2;
        s += 1;
    }
    let z = (2..p).find(|&z| legendre(z, p) == -1)?;
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

/// All square roots of `c` modulo a prime power `p^e`, ascending.
fn roots_mod_prime_power(c: u64, p: u64, e: u32) -> Vec<u64> {
    let q = p.pow(e);
    let c = c % q;
    if e > 1 || p < SCAN_LIMIT {
        return (0..q).filter(|&z| mul_mod(z, z, q) == c).collect();
    }
    // p is an odd prime >= SCAN_LIMIT here.
    match tonelli_shanks(c, p) {
        Some(0) => vec![0],
        Some(r) => {
            let mut v = vec![r, p - r];
            v.sort_unstable();
            v
        }
        None => Vec::new(),
    }
}

/// The residues `z` in `0..N` with `z^2 = c (mod N)`, ascending.
///
/// Roots are found prime by prime and glued together with the CRT. Prime
/// powers (non-squarefree moduli) fall back to a scan of that component.
pub fn square_roots_mod(c: u64, ring: &RingContext) -> Vec<u64> {
    let components: Vec<(u64, Vec<u64>)> = ring
        .prime_factors()
        .iter()
        .map(|&(p, e)| (p.pow(e), roots_mod_prime_power(c, p, e)))
        .collect();
    if components.iter().any(|(_, r)| r.is_empty()) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut choice = vec![0usize; components.len()];
    loop {
        let residues: Vec<(u64, u64)> = components
            .iter()
            .zip(&choice)
            .map(|((q, roots), &i)| (roots[i], *q))
            .collect();
        out.push(crt_combine(&residues).expect("prime powers are coprime"));
        // odometer over the per-prime choices
        let mut k = 0;
        loop {
            if k == choice.len() {
                out.sort_unstable();
                return out;
            }
            choice[k] += 1;
            if choice[k] < components[k].1.len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

/// Number of square roots of `c` modulo `N`, computed as the product of the
/// per-prime counts without enumerating the roots.
pub fn count_square_roots(c: u64, ring: &RingContext) -> u64 {
    ring.prime_factors()
        .iter()
        .map(|&(p, e)| {
            if e > 1 {
                return roots_mod_prime_power(c, p, e).len() as u64;
            }
            let r = c % p;
            if p == 2 || r == 0 {
                1
            } else if legendre(r, p) == 1 {
                2
            } else {
                0
            }
        })
        .product()
}
