//! Elementary number theory used by the series algebra: a smallest-prime-factor
//! sieve, factorization over the first `d` primes, and primality for indices
//! beyond the sieve range.

use std::sync::{Arc, Mutex, OnceLock};

/// Smallest-prime-factor table for `1..=limit`. `spf[1] = 1`.
#[derive(Debug, Clone)]
pub struct Sieve {
    spf: Vec<u32>,
}

impl Sieve {
    pub fn new(limit: usize) -> Self {
        let limit = limit.max(1);
        let mut spf = vec![0u32; limit + 1];
        spf[1] = 1;
        let mut primes: Vec<u32> = Vec::new();
        for i in 2..=limit {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                let m = i * p as usize;
                if p > si || m > limit {
                    break;
                }
                spf[m] = p;
            }
        }
        Self { spf }
    }

    /// Shared sieve covering at least `limit`, grown on demand.
    pub fn shared(limit: usize) -> Arc<Sieve> {
        static CACHE: OnceLock<Mutex<Option<Arc<Sieve>>>> = OnceLock::new();
        let cell = CACHE.get_or_init(|| Mutex::new(None));
        let mut guard = cell.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(s) = guard.as_ref() {
            if s.limit() >= limit {
                return Arc::clone(s);
            }
        }
        let s = Arc::new(Sieve::new(limit.max(1 << 10)));
        *guard = Some(Arc::clone(&s));
        s
    }

    pub fn limit(&self) -> usize {
        self.spf.len() - 1
    }

    pub fn smallest_prime_factor(&self, n: usize) -> usize {
        self.spf[n] as usize
    }

    pub fn is_prime(&self, n: usize) -> bool {
        n >= 2 && self.spf[n] as usize == n
    }

    /// Prime factorization as (prime, exponent) pairs in increasing order.
    pub fn factorize(&self, mut n: usize) -> Vec<(u64, u32)> {
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf[n] as usize;
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p as u64, e));
        }
        out
    }

    /// All divisors of `n` (unsorted).
    pub fn divisors(&self, n: usize) -> Vec<usize> {
        let mut divs = vec![1usize];
        for (p, e) in self.factorize(n) {
            let len = divs.len();
            let mut pk = 1usize;
            for _ in 0..e {
                pk *= p as usize;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs
    }
}

/// The first `count` primes.
pub fn first_primes(count: usize) -> Vec<u64> {
    if count == 0 {
        return vec![];
    }
    // p_k < k (ln k + ln ln k) for k >= 6
    let k = count.max(6) as f64;
    let bound = (k * (k.ln() + k.ln().ln())).ceil() as usize + 10;
    let sieve = Sieve::new(bound);
    (2..=bound)
        .filter(|&n| sieve.is_prime(n))
        .take(count)
        .map(|p| p as u64)
        .collect()
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for all 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime `>= n`.
pub fn next_prime(n: u64) -> u64 {
    let mut k = n.max(2);
    while !is_prime_u64(k) {
        k += 1;
    }
    k
}

/// Exponent vector of `n` over `primes`, or `None` if `n` has another prime factor.
pub fn smooth_exponents(mut n: u64, primes: &[u64]) -> Option<Vec<u32>> {
    if n == 0 {
        return None;
    }
    let mut exps = vec![0u32; primes.len()];
    for (j, &p) in primes.iter().enumerate() {
        while n % p == 0 {
            n /= p;
            exps[j] += 1;
        }
    }
    (n == 1).then_some(exps)
}
