//! Small exact combinatorics shared across the crate.

/// Binomial coefficient, 0 when `k > n`. Panics on overflow of `u128`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul((n - i) as u128).expect("binomial overflow") / (i as u128 + 1);
    }
    acc
}

/// Multinomial coefficient `(sum parts)! / prod(parts!)`.
pub fn multinomial(parts: &[u64]) -> u128 {
    let mut total = 0u64;
    let mut acc: u128 = 1;
    for &p in parts {
        total += p;
        acc = acc
            .checked_mul(binomial(total, p))
            .expect("multinomial overflow");
    }
    acc
}

pub fn catalan(n: u64) -> u128 {
    binomial(2 * n, n) / (n as u128 + 1)
}

pub fn factorial_f64(n: u64) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Exact product of rationals `num_i / den_i` known to be a positive integer.
///
/// Returns `None` on overflow or when the product is not integral.
pub fn integer_product(factors: impl IntoIterator<Item = (i128, i128)>) -> Option<u128> {
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    let mut negative = false;
    for (a, b) in factors {
        if a == 0 {
            return Some(0);
        }
        negative ^= (a < 0) ^ (b < 0);
        let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
        let g = gcd(a, den);
        a /= g;
        den /= g;
        let g = gcd(b, num);
        b /= g;
        num /= g;
        num = num.checked_mul(a)?;
        den = den.checked_mul(b)?;
        let g = gcd(num, den);
        num /= g;
        den /= g;
    }
    if den != 1 || negative {
        return None;
    }
    Some(num)
}

/// All weak compositions of `total` into `parts` nonnegative parts, lexicographic.
pub fn weak_compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    fn rec(rem: u32, slots: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            cur.push(rem);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for v in 0..=rem {
            cur.push(v);
            rec(rem - v, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}
